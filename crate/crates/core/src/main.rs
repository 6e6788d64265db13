use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use bncagg::cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command.out_path() {
        Some(path) => File::create(path)
            .map_err(CliError::from)
            .and_then(|f| write_with(&cli, BufWriter::new(f))),
        None => write_with(&cli, BufWriter::new(io::stdout().lock())),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("bncagg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn write_with<W: Write>(cli: &Cli, mut out: W) -> Result<i32, CliError> {
    let code = run(cli, &mut out)?;
    out.flush()?;
    Ok(code)
}
