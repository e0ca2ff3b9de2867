use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use tpespec::config::{parse_config, parse_preset, plan_from_inputs, Command};
use tpespec::{run, Error};

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Spectrum,
    Stimulated,
    Onephoton,
    Coincidence,
    Sweep,
    Calibrate,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Spectrum => Command::Spectrum,
            Cmd::Stimulated => Command::Stimulated,
            Cmd::Onephoton => Command::Onephoton,
            Cmd::Coincidence => Command::Coincidence,
            Cmd::Sweep => Command::Sweep,
            Cmd::Calibrate => Command::Calibrate,
        }
    }
}

/// Two-photon emission spectra and coincidence simulations.
///
/// Exit codes: 0 success, 1 usage or parse error, 2 physics error, 3 I/O error.
#[derive(Parser)]
#[command(name = "tpespec", version)]
struct Cli {
    command: Cmd,
    /// Run configuration file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Shipped preset instead of a config file (fig1a, fig1b, fig3a, fig3b, fig4, calibrate).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory [default: $TPESPEC_OUT/<config name>].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(cli: Cli) -> tpespec::Result<()> {
    let mut plan = match (&cli.config, &cli.preset) {
        (Some(path), _) => parse_config(path)?,
        (None, Some(name)) => parse_preset(name)?,
        (None, None) => return Err(Error::Usage("give --config or --preset".into())),
    };
    let command = Command::from(cli.command);
    if command != plan.command {
        let mut inputs = plan.inputs.clone();
        inputs.command = command;
        plan = plan_from_inputs(inputs, &plan.source)?;
    }
    if let Some(seed) = cli.seed {
        plan = plan.with_seed(seed);
    }
    if let Some(out) = cli.out {
        plan = plan.with_output_dir(out);
    }
    let report = run(&plan)?;
    print!("{}", report.summary.to_text());
    eprintln!("wrote {} files to {}", report.files.len(), report.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tpespec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
