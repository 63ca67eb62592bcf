use clap::Parser;
use orlicz_lab_cli::{run, Cli, Status};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { Status::ConfigError.code() } else { 0 };
            std::process::exit(code);
        }
    };
    std::process::exit(run(&cli).code());
}
