use num_complex::Complex64;
use proptest::prelude::*;
use sacx::audio::AudioSignal;
use sacx::codec::{encode_signal, CodecConfig, Rate};
use sacx::container::{Container, Method, FILE_HEADER_BYTES};
use sacx::metrics::similarity;
use sacx::sfft::{pack_coefficient, unpack_coefficient, MAX_SCALED_VALUE};
use sacx::Error;

fn signal(len: usize) -> AudioSignal {
    let s = (0..len).map(|t| 0.4 * (t as f64 * 0.07).sin() + 0.1 * (t as f64 * 1.3).cos()).collect();
    AudioSignal::new(s, 22_050).unwrap()
}

fn containers() -> Vec<Container> {
    let x = signal(700);
    let cs = CodecConfig { frame_len: 256, seed: 5, ..CodecConfig::new(Method::Cs, Rate::CompressionRatio(0.6)) };
    let sfft = CodecConfig { frame_len: 256, ..CodecConfig::new(Method::Sfft, Rate::Coefficients(20)) };
    vec![encode_signal(&x, &cs).unwrap(), encode_signal(&x, &sfft).unwrap()]
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (i, c) in containers().into_iter().enumerate() {
        let path = dir.path().join(format!("{i}.sacx"));
        c.write(&path).unwrap();
        let back = Container::read(&path).unwrap();
        assert_eq!(back.header, c.header);
        assert_eq!(back.to_bytes().unwrap(), c.to_bytes().unwrap());
    }
    assert!(matches!(Container::read(dir.path().join("missing.sacx")), Err(Error::MissingFile(_))));
}

#[test]
fn every_truncation_names_its_frame() {
    for c in containers() {
        let bytes = c.to_bytes().unwrap();
        let record = (bytes.len() - FILE_HEADER_BYTES) / c.frames.len();
        for cut in FILE_HEADER_BYTES..bytes.len() {
            match Container::from_bytes(&bytes[..cut]) {
                Err(Error::Truncated { frame }) => assert_eq!(frame, (cut - FILE_HEADER_BYTES) / record, "cut {cut}"),
                other => panic!("cut {cut}: {other:?}"),
            }
        }
        for cut in 0..FILE_HEADER_BYTES {
            assert!(matches!(Container::from_bytes(&bytes[..cut]), Err(Error::CorruptHeader(_))));
        }
    }
}

#[test]
fn header_fields_are_little_endian() {
    let bytes = containers()[1].to_bytes().unwrap();
    assert_eq!(&bytes[..6], b"SACX\x01\x02");
    assert_eq!(u32::from_le_bytes(bytes[6..10].try_into().unwrap()), 22_050);
    assert_eq!(u16::from_le_bytes(bytes[10..12].try_into().unwrap()), 256);
    assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 3);
    assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 700);
}

proptest! {
    #[test]
    fn packed_index_survives_any_value(index in 0usize..1024, re in -1.0f64..1.0, im in -1.0f64..1.0, scale in 1e-6f64..1e3) {
        let v = Complex64::new(re, im) * MAX_SCALED_VALUE * scale;
        let (pc, saturated) = pack_coefficient(v, index, scale).unwrap();
        let (back, i) = unpack_coefficient(pc, scale);
        prop_assert!(!saturated);
        prop_assert_eq!(i, index);
        prop_assert!((back.re - v.re).abs() <= scale / 32.0 && (back.im - v.im).abs() <= scale / 32.0);
    }

    #[test]
    fn similarity_is_scale_invariant(xs in prop::collection::vec(-1.0f64..1.0, 8..64), noise in 0.0f64..0.5, c in 0.01f64..100.0) {
        prop_assume!(xs.iter().any(|v| v.abs() > 1e-3));
        let y: Vec<f64> = xs.iter().enumerate().map(|(i, v)| v + noise * (i as f64).sin()).collect();
        let s1 = similarity(&xs, &y).unwrap();
        let xs2: Vec<f64> = xs.iter().map(|v| v * c).collect();
        let y2: Vec<f64> = y.iter().map(|v| v * c).collect();
        let s2 = similarity(&xs2, &y2).unwrap();
        prop_assert!((s1 - s2).abs() <= 1e-9 * s1.max(1e-12));
    }
}
