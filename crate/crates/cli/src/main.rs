use clap::Parser;
use receptive_jitai_cli::{error::exit, run, Cli, LOG_ENV};
use std::io::Write;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            let _ = std::io::stdout().flush();
            std::process::exit(exit::OK);
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
