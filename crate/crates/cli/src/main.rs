use clap::Parser;
use cpm_cli::args::Cli;

fn main() {
    let code = match Cli::try_parse() {
        Ok(cli) => match cpm_cli::commands::execute(cli) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                1
            } else {
                0
            }
        }
    };
    std::process::exit(code);
}
