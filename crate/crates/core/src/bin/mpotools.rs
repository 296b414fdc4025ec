//! Command-line entry point; all logic lives in the library.

fn main() {
    std::process::exit(mpotools::cli::run(std::env::args_os()));
}
