use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = sacx::cli::Cli::parse();
    if let Err(e) = sacx::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(sacx::cli::exit_code(&e));
    }
}
