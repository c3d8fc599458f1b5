use clap::Parser;

fn main() {
    let cli = cflimits_cli::Cli::parse();
    let stdout = std::io::stdout();
    if let Err(e) = cflimits_cli::run(&cli, &mut stdout.lock()) {
        eprintln!("cflimits: {e}");
        std::process::exit(e.exit_code());
    }
}
