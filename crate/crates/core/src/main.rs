//! Binary entry point for the `mdsc` command-line tool.

fn main() {
    if let Err(err) = mdsc::cli::run() {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
