//! Command-line entry points.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use toml::Value;

use crate::pipeline::{
    load_analysis, load_run, load_system, load_topology, run_pipeline, stage_analyze, stage_extend,
    stage_generate, stage_report, stage_simulate,
};
use crate::report::SystemSummary;
use crate::shell::Shell;
use crate::spec::SpecFile;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "polybead", version, about = "Coarse-grained MD of topological polymers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Spec file (TOML)
    pub spec: PathBuf,
    /// Output directory, overriding `out` in the spec
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Random seed, overriding `seed` in the spec
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the initial configuration
    Generate(Common),
    /// Simulate a generated configuration, or extend the last run
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Continue the run in the output directory by this many steps
        #[arg(long)]
        extend: Option<u64>,
    },
    /// Analyze the trajectory in the output directory
    Analyze(Common),
    /// Compile report.md from the analysis in the output directory
    Report(Common),
    /// Run the whole pipeline (a list-valued key runs a sweep)
    Run(Common),
    /// Interactive workflow shell
    Shell {
        /// Initial spec file
        spec: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn apply_overrides(file: &mut SpecFile, out: Option<&Path>, seed: Option<u64>) -> Result<()> {
    if let Some(out) = out {
        file.set("out", Value::String(out.display().to_string()))?;
    }
    if let Some(seed) = seed {
        let seed = i64::try_from(seed).map_err(|_| Error::Spec(vec![format!("seed: {seed} is too large")]))?;
        file.set("seed", Value::Integer(seed))?;
    }
    Ok(())
}

fn load(common: &Common) -> Result<SpecFile> {
    let mut file = SpecFile::load(&common.spec)?;
    apply_overrides(&mut file, common.out.as_deref(), common.seed)?;
    Ok(file)
}

fn execute(command: Command, stdout: &mut dyn Write, stdin: &mut dyn BufRead) -> Result<()> {
    let say = |stdout: &mut dyn Write, s: String| writeln!(stdout, "{s}").map_err(Error::io("<stdout>"));
    match command {
        Command::Generate(c) => {
            let spec = load(&c)?.resolve()?;
            let state = stage_generate(&spec, &spec.out)?;
            let s = SystemSummary::of(&state);
            say(
                stdout,
                format!(
                    "{} polymer: {} polymer beads, {} solvent beads, {} bonds -> {}",
                    spec.architecture().name(),
                    s.polymer_beads,
                    s.solvent_beads,
                    s.bonds,
                    spec.out.display()
                ),
            )
        }
        Command::Simulate { common, extend } => {
            let spec = load(&common)?.resolve()?;
            match extend {
                Some(extra) => {
                    let (mut engine, mut traj) = load_run(&spec, &spec.out)?;
                    stage_extend(&mut engine, &mut traj, extra, &spec.out)?;
                    say(stdout, format!("extended to step {}", engine.state().step))
                }
                None => {
                    let state = load_system(&spec.out)?;
                    let (engine, _) = stage_simulate(&spec, state, &spec.out)?;
                    say(stdout, format!("simulated to step {}", engine.state().step))
                }
            }
        }
        Command::Analyze(c) => {
            let spec = load(&c)?.resolve()?;
            let topology = load_topology(&spec.out)?;
            let state = load_system(&spec.out)?;
            let (_, traj) = load_run(&spec, &spec.out)?;
            let record = stage_analyze(&spec, &topology, SystemSummary::of(&state), &traj, &spec.out)?;
            say(stdout, format!("analyzed {} frames up to step {}", traj.frames.len(), record.final_step))
        }
        Command::Report(c) => {
            let spec = load(&c)?.resolve()?;
            let record = load_analysis(&spec.out)?;
            let path = stage_report(&spec, &record, &spec.out)?;
            say(stdout, format!("wrote {}", path.display()))
        }
        Command::Run(c) => {
            let rows = run_pipeline(&load(&c)?)?;
            let mut failed = 0;
            for row in &rows {
                match &row.outcome {
                    Ok(o) => say(stdout, format!("ok {}", o.out.display()))?,
                    Err(e) => {
                        failed += 1;
                        say(stdout, format!("FAILED {}: {e}", row.label))?;
                    }
                }
            }
            if failed > 0 {
                return Err(Error::Workflow(format!("{failed} of {} sweep runs failed", rows.len())));
            }
            Ok(())
        }
        Command::Shell { spec, out, seed } => {
            let mut file = match spec {
                Some(p) => SpecFile::load(&p)?,
                None => SpecFile::new(),
            };
            apply_overrides(&mut file, out.as_deref(), seed)?;
            let mut shell = Shell::new(file, stdout);
            shell.run(stdin)
        }
    }
}

/// Parses `args` and runs the command, returning the process exit status:
/// 0 on success, 2 for usage or spec validation errors, 1 otherwise.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write, stdin: &mut dyn BufRead) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match execute(cli.command, stdout, stdin) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
