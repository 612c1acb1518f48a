//! Compression-ratio sweep over the bundled corpus.
//!
//! cargo run --release --example bench_sweep -- [frames] [reps] [bp_max_iter]

use sacx::bench::{run_cr_sweep, summary_table, write_report, BenchConfig, ReportFormat, CR_SWEEP};
use sacx::corpus::bundled_corpus;
use sacx::recovery::RecoveryConfig;

fn main() -> sacx::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let frames = args.first().copied().unwrap_or(2);
    let cfg = BenchConfig {
        timing_reps: args.get(1).copied().unwrap_or(1),
        recovery: RecoveryConfig { bp_max_iter: args.get(2).copied().unwrap_or(2000), ..RecoveryConfig::default() },
        ..BenchConfig::default()
    };
    for s in bundled_corpus(frames, cfg.frame_len)? {
        let rows = run_cr_sweep(&s.signal, &CR_SWEEP, &cfg)?;
        println!("== {} ==\n{}", s.name, summary_table(&rows));
        write_report(&rows, std::io::stdout(), ReportFormat::Csv)?;
    }
    Ok(())
}
