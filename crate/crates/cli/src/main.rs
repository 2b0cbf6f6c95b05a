use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use katofan_cli::{execute, CliError, Command, Format, Options};

/// Kato fans, their monoids and chart criteria from the command line.
///
/// Exit status: 0 on success, 1 on a domain error, 2 on a parse or usage error.
#[derive(Debug, Parser)]
#[command(name = "katofan", version)]
struct Cli {
    command: Command,
    /// script (`.kf`), or a structured document for `ingest`
    file: Option<PathBuf>,
    /// target name and command arguments, e.g. `N2 (1,1)` for membership
    args: Vec<String>,
    /// split index for facelem-check
    #[arg(long)]
    split: Option<usize>,
    /// residue characteristic (0 or a prime)
    #[arg(long = "char")]
    residue_char: Option<u64>,
    /// degree bound for membership, flags and saturation
    #[arg(long, default_value_t = katofan_core::monoid::DEFAULT_BOUND)]
    bound: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// seed for `sample`
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// write the output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let input = cli.file.as_ref().map(std::fs::read_to_string).transpose()?;
    let opts = Options {
        split: cli.split,
        residue_char: cli.residue_char,
        bound: cli.bound,
        format: cli.format,
        seed: cli.seed,
    };
    let out = execute(cli.command, input.as_deref(), &cli.args, &opts)?;
    let rendered = out.render(cli.command, cli.format)?;
    match &cli.out {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let origin = cli
                .file
                .as_ref()
                .map(|p| format!("{}: ", p.display()))
                .unwrap_or_default();
            eprintln!("{origin}{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
