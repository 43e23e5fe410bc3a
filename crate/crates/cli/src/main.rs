use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dirac_cli::{commands, CliError, Format, Options};
use dirac_core::BracketMode;

#[derive(Parser)]
#[command(
    name = "dirac",
    version,
    about = "Dirac brackets and finite-dimensional quantization checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Poisson,
    Dirac,
}

impl From<Mode> for BracketMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Poisson => BracketMode::Poisson,
            Mode::Dirac => BracketMode::Dirac,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    /// System file
    file: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Record per-stage wall-clock timings in the report
    #[arg(long)]
    timings: bool,
}

impl Common {
    fn options(&self) -> Options {
        Options {
            timings: self.timings,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Full report: classification, trace identity, closure and verdict
    Analyze(Common),
    /// Bracket of two expressions
    Bracket {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long, value_enum, default_value = "dirac")]
        mode: Mode,
    },
    /// Second-class check of the constraints
    Classify(Common),
    /// sum_i {x_i, p_i}_D against n - m
    Trace(Common),
    /// Structure constants and central charges of the primaries
    Closure {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "dirac")]
        mode: Mode,
    },
    /// Finite-dimensionality verdict
    Verdict(Common),
}

fn run(cli: Cli) -> Result<String, CliError> {
    let (report, format) = match cli.command {
        Command::Bracket { file, f, g, mode } => {
            let mut s = commands::bracket(&file, &f, &g, mode.into())?;
            s.push('\n');
            return Ok(s);
        }
        Command::Analyze(c) => (commands::analyze(&c.file, &c.options())?, c.format),
        Command::Classify(c) => (commands::classify(&c.file, &c.options())?, c.format),
        Command::Trace(c) => (commands::trace(&c.file, &c.options())?, c.format),
        Command::Closure { common: c, mode } => (
            commands::closure(&c.file, mode.into(), &c.options())?,
            c.format,
        ),
        Command::Verdict(c) => (commands::verdict(&c.file, &c.options())?, c.format),
    };
    Ok(report.render(format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = e.hint() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
