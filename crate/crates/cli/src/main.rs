use clap::Parser;
use octogrid_cli::commands::{main_with, Cli};

fn main() {
    let code = main_with(Cli::parse(), std::io::stdout().lock(), std::io::stderr().lock());
    std::process::exit(code);
}
