use clap::Parser;
use hkcalib::harness::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
