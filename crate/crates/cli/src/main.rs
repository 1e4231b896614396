use std::io::ErrorKind;

use clap::Parser;
use spinmarket_cli::commands::{run, Cli};
use spinmarket_cli::error::CliError;

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        // a closed downstream pipe (`| head`) is not a failure
        Err(CliError::Io { source, .. }) if source.kind() == ErrorKind::BrokenPipe => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
