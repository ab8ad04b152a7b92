use clap::Parser;

fn main() {
    let cli = mpinv_cli::Cli::try_parse().unwrap_or_else(|e| e.exit());
    std::process::exit(mpinv_cli::run(cli));
}
