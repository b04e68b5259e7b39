use clap::Parser;

fn main() {
    let cli = bihartree::cli::Cli::parse();
    if let Err(err) = bihartree::cli::run(cli) {
        eprintln!("error: {}", err);
        std::process::exit(1);
    }
}
