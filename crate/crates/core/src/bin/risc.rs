use clap::Parser;

fn main() {
    let cli = risc::cli::Cli::parse();
    match risc::cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
