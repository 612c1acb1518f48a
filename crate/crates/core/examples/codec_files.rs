//! WAV in, .sacx container out, and back, for both methods.

use sacx::audio::{load_audio, save_audio, LoadOptions};
use sacx::codec::{decode_container, encode_signal, CodecConfig, DecodeOptions, Rate};
use sacx::container::{Container, Method};
use sacx::corpus::music_like;
use sacx::metrics::similarity;

fn main() -> sacx::Result<()> {
    let dir = std::env::temp_dir().join("sacx-example");
    std::fs::create_dir_all(&dir)?;
    let wav = dir.join("music.wav");
    save_audio(&music_like(16_000, 2)?, &wav)?;
    let input = load_audio(&wav, LoadOptions::default())?;

    for (method, rate) in [(Method::Sfft, Rate::BitBudget(5568)), (Method::Cs, Rate::BitBudget(5568))] {
        let cfg = CodecConfig { seed: 11, ..CodecConfig::new(method, rate) };
        let path = dir.join(format!("music-{method}.sacx"));
        encode_signal(&input, &cfg)?.write(&path)?;
        let container = Container::read(&path)?;
        let decoded = decode_container(&container, &DecodeOptions::default())?;
        save_audio(&decoded.signal, dir.join(format!("music-{method}.wav")))?;
        println!(
            "{method}: {} frames, {} bytes on disk, similarity {:.3e}",
            container.frames.len(),
            std::fs::metadata(&path)?.len(),
            similarity(input.samples(), decoded.signal.samples())?
        );
    }
    println!("files in {}", dir.display());
    Ok(())
}
