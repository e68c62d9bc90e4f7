use clap::Parser;
use mechnet_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("mechnet: {e}");
        std::process::exit(e.exit_code());
    }
}
