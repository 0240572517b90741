use clap::Parser;

fn main() {
    let cli = tiphase::cli::Cli::parse();
    std::process::exit(tiphase::cli::run(cli));
}
