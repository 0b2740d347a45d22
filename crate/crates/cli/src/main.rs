use clap::Parser;

fn main() {
    let cli = colombeau_cli::Cli::parse();
    std::process::exit(colombeau_cli::run(cli));
}
