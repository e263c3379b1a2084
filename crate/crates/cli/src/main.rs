use clap::Parser;
use holoverify_cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
