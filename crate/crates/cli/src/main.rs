use clap::Parser;

fn main() {
    let cli = broadcd::Cli::parse();
    let stdout = std::io::stdout();
    if let Err(e) = broadcd::run(&cli, &mut stdout.lock()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
