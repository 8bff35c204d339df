mod args;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use run::{CliError, EXIT_INPUT};

fn fail(e: &CliError) -> ExitCode {
    let _ = writeln!(std::io::stderr(), "{}", serde_json::to_string(e).expect("error serializes"));
    ExitCode::from(e.exit as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            return fail(&CliError { error: "usage".into(), message: e.render().to_string(), exit: EXIT_INPUT });
        }
    };
    cmc_index_lab::par::init_threads(cli.threads);
    let result = match &cli.command {
        Command::Mesh(a) => run::cmd_mesh(a),
        Command::Spectrum(a) => run::cmd_spectrum(a),
        Command::Verify(a) => run::cmd_verify(a),
        Command::Threshold(a) => run::cmd_threshold(a),
    };
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.body.as_bytes());
            let _ = stdout.flush();
            ExitCode::from(out.exit as u8)
        }
        Err(e) => fail(&e),
    }
}
