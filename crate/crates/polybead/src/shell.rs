//! Line-oriented workflow shell: edit the spec, generate, run, extend and
//! report, one command per line.

use std::fs;
use std::io::{BufRead, Write};

use polybead_core::engine::{Engine, Trajectory};
use polybead_core::{SystemState, Topology};

use crate::pipeline::{stage_analyze, stage_extend, stage_generate, stage_report, stage_simulate, AnalysisRecord};
use crate::report::SystemSummary;
use crate::spec::{show, PipelineSpec, SpecFile};
use crate::{Error, Result};

pub const HELP: &str = "\
commands:
  set <param> <value>   change one spec parameter, keeping all others
  gen                   build the initial configuration and summarize it
  run                   simulate and analyze (generates first if needed)
  extend <steps>        continue the last run
  show                  print the current spec
  report                write report.md for the last run
  help                  print this text
  quit                  leave the shell";

struct Generated {
    spec: PipelineSpec,
    state: SystemState,
}

struct LastRun {
    spec: PipelineSpec,
    topology: Topology,
    system: SystemSummary,
    engine: Engine,
    traj: Trajectory,
    record: AnalysisRecord,
}

pub struct Shell<W> {
    spec: SpecFile,
    generated: Option<Generated>,
    last: Option<LastRun>,
    out: W,
}

fn summary(record: &AnalysisRecord) -> String {
    let obs = &record.observables;
    let mut s = format!("step {}: <R_g^2> = {:.4}", record.final_step, obs.rg2.window_mean);
    if let Some(r) = &obs.end_to_end {
        s += &format!(", <R_ee> = {:.4}", r.window_mean);
    }
    match &obs.persistence {
        Some(p) if p.is_rigid() => s += ", l_p = inf",
        Some(p) => s += &format!(", l_p = {:.4}", p.value()),
        None => {}
    }
    s + &format!(", D = {:.4e}", obs.msd.diffusion)
}

impl<W: Write> Shell<W> {
    pub fn new(spec: SpecFile, out: W) -> Self {
        Shell {
            spec,
            generated: None,
            last: None,
            out,
        }
    }

    pub fn spec(&self) -> &SpecFile {
        &self.spec
    }

    pub fn into_output(self) -> W {
        self.out
    }

    fn say(&mut self, text: impl AsRef<str>) -> Result<()> {
        writeln!(self.out, "{}", text.as_ref()).map_err(Error::io("<shell output>"))
    }

    /// Reads commands until `quit` or end of input.
    pub fn run(&mut self, input: impl BufRead) -> Result<()> {
        self.say("polybead shell; defaults dt = 0.01, gamma = 1, T = 1 ('help' lists commands)")?;
        for line in input.lines() {
            let line = line.map_err(Error::io("<shell input>"))?;
            if !self.execute(&line)? {
                break;
            }
        }
        Ok(())
    }

    /// Runs one command line. Returns `false` on `quit`. Command failures
    /// are printed and the session continues; only output errors propagate.
    pub fn execute(&mut self, line: &str) -> Result<bool> {
        let words: Vec<&str> = line.split_whitespace().collect();
        let outcome = match words.as_slice() {
            [] => Ok(()),
            ["quit" | "exit"] => return Ok(false),
            ["help"] => self.say(HELP),
            ["show"] => {
                let text = self.spec.describe();
                self.say(text.trim_end())
            }
            ["set", key, value @ ..] if !value.is_empty() => self.set(key, &value.join(" ")),
            ["gen"] => self.gen().map(|_| ()),
            ["run"] => self.run_sim(),
            ["extend", steps] => match steps.parse::<u64>() {
                Ok(n) if n > 0 => self.extend(n),
                _ => self.say(format!("error: extend needs a positive step count, got '{steps}'")),
            },
            ["report"] => self.report(),
            _ => {
                self.say(format!("unknown command '{}'", line.trim()))?;
                self.say(HELP)
            }
        };
        if let Err(e) = outcome {
            if let Error::Io { path, .. } = &e {
                if path.as_os_str().to_string_lossy().starts_with("<shell") {
                    return Err(e);
                }
            }
            self.say(format!("error: {e}"))?;
        }
        Ok(true)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = SpecFile::parse_value(value);
        let old = self.spec.set(key, value.clone())?;
        let old = match old {
            Some(o) => show(&o),
            None => crate::spec::default_value(key).map_or("unset".into(), |v| format!("{} (default)", show(&v))),
        };
        self.say(format!("{key}: {old} -> {}", show(&value)))?;
        if self.generated.is_some() {
            self.say("configuration is stale; the next gen or run rebuilds it")?;
        }
        Ok(())
    }

    fn gen(&mut self) -> Result<&Generated> {
        let spec = self.spec.resolve()?;
        fs::create_dir_all(&spec.out).map_err(Error::io(&spec.out))?;
        let spec_path = spec.out.join("spec.toml");
        fs::write(&spec_path, self.spec.to_toml()).map_err(Error::io(&spec_path))?;
        let state = stage_generate(&spec, &spec.out)?;
        let s = SystemSummary::of(&state);
        let changed = match &self.generated {
            Some(g) if g.spec != spec => " (rebuilt with the updated spec)",
            Some(_) => " (rebuilt, spec unchanged)",
            None => "",
        };
        self.say(format!(
            "generated {} polymer: {} polymer beads, {} solvent beads, {} bonds, box {} -> {}{changed}",
            spec.architecture().name(),
            s.polymer_beads,
            s.solvent_beads,
            s.bonds,
            spec.box_side,
            spec.out.join("system.data").display()
        ))?;
        self.last = None;
        Ok(self.generated.insert(Generated { spec, state }))
    }

    fn run_sim(&mut self) -> Result<()> {
        let spec = self.spec.resolve()?;
        if self.generated.as_ref().is_none_or(|g| g.spec != spec) {
            self.gen()?;
        }
        let g = self.generated.as_ref().expect("generated above");
        let topology = g.state.topology.clone();
        let system = SystemSummary::of(&g.state);
        let (engine, traj) = stage_simulate(&spec, g.state.clone(), &spec.out)?;
        let record = stage_analyze(&spec, &topology, system, &traj, &spec.out)?;
        self.say(format!("ran {} steps; {}", spec.run.steps, summary(&record)))?;
        self.last = Some(LastRun {
            spec,
            topology,
            system,
            engine,
            traj,
            record,
        });
        Ok(())
    }

    fn extend(&mut self, steps: u64) -> Result<()> {
        let Some(last) = self.last.as_mut() else {
            return self.say("error: nothing to extend; use 'run' first");
        };
        let from = last.engine.state().step;
        stage_extend(&mut last.engine, &mut last.traj, steps, &last.spec.out)?;
        last.record = stage_analyze(&last.spec, &last.topology, last.system, &last.traj, &last.spec.out)?;
        let text = format!("extended from step {from} to {}; {}", last.engine.state().step, summary(&last.record));
        self.say(text)
    }

    fn report(&mut self) -> Result<()> {
        let Some(last) = &self.last else {
            return self.say("error: nothing to report; use 'run' first");
        };
        let path = stage_report(&last.spec, &last.record, &last.spec.out)?;
        self.say(format!("wrote {}", path.display()))
    }

    /// Last step of the current run, if any.
    pub fn current_step(&self) -> Option<u64> {
        self.last.as_ref().map(|l| l.engine.state().step)
    }

    /// Trajectory of the current run, if any.
    pub fn trajectory(&self) -> Option<&Trajectory> {
        self.last.as_ref().map(|l| &l.traj)
    }

    /// Configuration from the last `gen`, if any.
    pub fn generated_state(&self) -> Option<&SystemState> {
        self.generated.as_ref().map(|g| &g.state)
    }
}
