//! Command-line entry point; all logic lives in the library's `cli`
//! module so it can be exercised by tests.

use clap::Parser;
use muspin::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
