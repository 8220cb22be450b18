use clap::Parser;

use ihas_cli::{dispatch, exit_code, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(&cli.command) {
        eprintln!("error: {}: {err}", err.category());
        std::process::exit(exit_code(&err));
    }
}
