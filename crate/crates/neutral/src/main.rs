use clap::Parser;
use neutral::cli::{run, Cli, EXIT_OK};

fn main() {
    let cli = Cli::parse();
    let outcome = run(&cli);
    if outcome.code == EXIT_OK || outcome.code == neutral::cli::EXIT_FAIL {
        println!("{}", outcome.message);
    } else {
        eprintln!("{}", outcome.message);
    }
    std::process::exit(outcome.code);
}
