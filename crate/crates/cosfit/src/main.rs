use clap::Parser;
use cosfit::cli;

fn main() {
    let parsed = match cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    if let Err(e) = cli::run(&parsed) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
