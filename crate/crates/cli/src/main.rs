//! Command-line driver for the two-photon double-slit simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use biphoton::io::{self, Output, Overrides, RunManifest, RunOutcome};
use biphoton::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "biphoton",
    version,
    about = "Two-photon Young's double-slit simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic coincidence-rate surface.
    Pattern(RunArgs),
    /// Monte Carlo coincidence histogram and singles.
    Simulate(RunArgs),
    /// Cuts, fringe fits and stripe tilt (histogram too when --events or --seed is given).
    Analyze(RunArgs),
    /// Compare the analytic surface with the path-sum oracle.
    OracleCheck(RunArgs),
    /// Run the outputs listed in the config file.
    Run(RunArgs),
    /// All outputs for the four bundled presets, one directory each.
    ReproduceFig4(Fig4Args),
    /// Bundled presets.
    Presets {
        #[command(subcommand)]
        command: PresetCommand,
    },
}

#[derive(Subcommand)]
enum PresetCommand {
    /// Print the preset names.
    List,
    /// Print a preset's config file.
    Show { name: String },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    events: Option<u64>,
    /// Bins per axis for surfaces and histograms.
    #[arg(long)]
    bins: Option<usize>,
    /// Disable the single-slit diffraction envelope.
    #[arg(long)]
    no_envelope: bool,
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Fig4Args {
    #[arg(long, default_value = io::DEFAULT_OUTPUT_DIR)]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            events: self.events,
            bins: self.bins,
            envelope: self.no_envelope.then_some(false),
        }
    }
}

fn manifest(args: &RunArgs, outputs: Option<&[Output]>) -> Result<RunManifest, Error> {
    let mut manifest = match (&args.config, &args.preset) {
        (Some(path), _) => io::load_config(path)?,
        (None, Some(name)) => io::load_preset(name)?,
        (None, None) => unreachable!("clap requires --config or --preset"),
    };
    if let Some(outputs) = outputs {
        manifest = manifest.with_outputs(outputs)?;
    }
    args.common.overrides().apply(&mut manifest)?;
    if let Some(out) = &args.out {
        manifest.output_dir = out.clone();
    }
    Ok(manifest)
}

fn report(outcome: &RunOutcome, quiet: bool) {
    let summary = &outcome.summary;
    if !quiet {
        for file in &outcome.files {
            println!("wrote {}", file.display());
        }
        if let Some(t) = &summary.tilt.analytic {
            println!("tilt (analytic): {:.3} deg", t.tilt.angle_degrees);
        }
        if let Some(t) = &summary.tilt.histogram {
            println!("tilt (histogram): {:.3} deg", t.tilt.angle_degrees);
        }
        if let Some(o) = &summary.oracle_check {
            println!(
                "oracle: max deviation {:.3}%, quadrature change {:.4}%",
                100.0 * o.max_deviation,
                100.0 * o.quadrature_change
            );
        }
    }
    for c in summary.self_checks.iter().filter(|c| !c.passed) {
        eprintln!("self-check {} failed: {}", c.name, c.detail);
    }
}

fn execute(command: Command) -> Result<i32, Error> {
    let (args, outputs): (RunArgs, Option<Vec<Output>>) = match command {
        Command::Presets { command } => {
            match command {
                PresetCommand::List => io::preset_names().for_each(|n| println!("{n}")),
                PresetCommand::Show { name } => print!("{}", io::preset_text(&name)?),
            }
            return Ok(0);
        }
        Command::ReproduceFig4(args) => {
            let mut code = 0;
            for (name, outcome) in io::reproduce_fig4(&args.out, &args.common.overrides())? {
                if !args.common.quiet {
                    println!("== {name}");
                }
                report(&outcome, args.common.quiet);
                code = code.max(outcome.exit_code());
            }
            return Ok(code);
        }
        Command::Pattern(a) => (a, Some(vec![Output::Surface, Output::Summary])),
        Command::Simulate(a) => (a, Some(vec![Output::Histogram, Output::Summary])),
        Command::Analyze(a) => {
            let mut outputs = vec![
                Output::Surface,
                Output::Cuts,
                Output::Fits,
                Output::Tilt,
                Output::Summary,
            ];
            if a.common.events.is_some() || a.common.seed.is_some() {
                outputs.push(Output::Histogram);
            }
            (a, Some(outputs))
        }
        Command::OracleCheck(a) => (a, Some(vec![Output::OracleCheck, Output::Summary])),
        Command::Run(a) => (a, None),
    };
    let manifest = manifest(&args, outputs.as_deref())?;
    let outcome = io::run(&manifest)?;
    report(&outcome, args.common.quiet);
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    // Usage errors count as configuration errors; clap would otherwise exit with 2.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
