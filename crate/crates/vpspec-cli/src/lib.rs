//! Command-line front end for `vpspec`: JSON configuration, CSV datasets and
//! the verification suite.

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "vpspec", version, about = "Spectral analysis of the linearized Vlasov–Poisson system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Moment table, survival threshold and the Υ identity residual
    Moments,
    /// Langmuir branch over (0, κ₀] with its convexity certificate
    Branch,
    /// Damped roots past κ₀ against the asymptotic rate law
    Landau,
    /// Green function split and the Green-versus-Volterra densities
    Green,
    /// Field traces, decomposition residual and the oscillatory synthesis
    Evolve,
    /// Property suite on the shipped profiles; exit 0 iff every check passes
    Verify,
}

/// Path of the companion synthesis table: `<out>.synthesis.csv`.
pub fn synthesis_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".synthesis.csv");
    PathBuf::from(s)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    let out = match cli.command {
        Command::Moments => commands::moments(&cfg)?,
        Command::Branch => commands::branch(&cfg)?,
        Command::Landau => commands::landau(&cfg)?,
        Command::Green => commands::green(&cfg)?,
        Command::Evolve => commands::evolve(&cfg)?,
        Command::Verify => {
            let (text, ok) = verify::verify(&cfg)?;
            match &cfg.out {
                Some(p) => write_file(p, &text)?,
                None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("stdout", e))?,
            }
            return Ok(if ok { 0 } else { 1 });
        }
    };
    for w in &out.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    match &cfg.out {
        Some(p) => {
            write_file(p, &out.main)?;
            if let Some(s) = &out.synthesis {
                write_file(&synthesis_path(p), s)?;
            }
        }
        None => {
            let mut text = out.main;
            if let Some(s) = &out.synthesis {
                text.push_str("# synthesis\n");
                text.push_str(s);
            }
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("stdout", e))?;
        }
    }
    Ok(0)
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
