//! Markdown run reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use polybead_core::analysis::ObservableSet;
use polybead_core::topogen::PolymerShape;
use polybead_core::{SystemState, ThermostatSpec};
use serde::{Deserialize, Serialize};

use crate::spec::PipelineSpec;
use crate::{Error, Result};

const DASH: &str = "—";

/// Bead and bond counts of the simulated system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSummary {
    pub polymer_beads: usize,
    pub solvent_beads: usize,
    pub bonds: usize,
}

impl SystemSummary {
    pub fn of(state: &SystemState) -> Self {
        SystemSummary {
            polymer_beads: state.count(polybead_core::Species::Polymer),
            solvent_beads: state.count(polybead_core::Species::Solvent),
            bonds: state.bonds.len(),
        }
    }
}

/// A plot file, referenced relative to the report's directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlotRef {
    pub title: String,
    pub file: PathBuf,
}

pub struct RunContext<'a> {
    pub spec: &'a PipelineSpec,
    pub system: SystemSummary,
    /// Last simulated step, which exceeds `spec.run.steps` after extensions.
    pub final_step: u64,
    /// Free text placed under the Context heading.
    pub note: Option<&'a str>,
}

fn fmt(x: f64) -> String {
    if x == 0.0 || (1e-3..1e4).contains(&x.abs()) {
        format!("{x:.4}")
    } else {
        format!("{x:.4e}")
    }
}

fn shape_rows(shape: &PolymerShape) -> Vec<(&'static str, String)> {
    match *shape {
        PolymerShape::Linear { n } | PolymerShape::Ring { n } => vec![("Chain length N", n.to_string())],
        PolymerShape::Brush {
            backbone,
            grafting_density,
            side_chain,
        } => vec![
            ("Backbone length N_b", backbone.to_string()),
            ("Grafting density σ_g", grafting_density.to_string()),
            ("Side-chain length N_s", side_chain.to_string()),
            ("Side chains", PolymerShape::graft_count(backbone, grafting_density).to_string()),
        ],
        PolymerShape::Star { arm_length, arms } => vec![
            ("Arm length N_a", arm_length.to_string()),
            ("Arms m", arms.to_string()),
        ],
        PolymerShape::Dendrimer {
            generations,
            branching,
            spacer,
        } => vec![
            ("Generations G", generations.to_string()),
            ("Branching factor b", branching.to_string()),
            ("Spacer length N_s", spacer.to_string()),
        ],
    }
}

/// Report text; identical inputs give identical output.
pub fn render_report(ctx: &RunContext<'_>, obs: &ObservableSet, plots: &[PlotRef]) -> String {
    let spec = ctx.spec;
    let arch = spec.architecture().name();
    let mut s = String::new();
    let _ = writeln!(s, "# Simulation report: {arch} polymer\n");

    s.push_str("## Context\n\n");
    let solvent = if ctx.system.solvent_beads == 0 {
        "in implicit solvent".to_string()
    } else {
        format!("in explicit solvent ({} beads)", ctx.system.solvent_beads)
    };
    let _ = writeln!(
        s,
        "Coarse-grained bead-spring simulation of a single {arch} polymer of {} beads {solvent}, \
         run for {} steps under a {} thermostat. Averages are taken over the second half of the trajectory.",
        ctx.system.polymer_beads,
        ctx.final_step,
        spec.thermostat.name()
    );
    if let Some(note) = ctx.note {
        let _ = writeln!(s, "\n{note}");
    }

    s.push_str("\n## System Configuration\n\n| Parameter | Value |\n|---|---|\n");
    let _ = writeln!(s, "| Architecture | {arch} |");
    for (k, v) in shape_rows(&spec.shape) {
        let _ = writeln!(s, "| {k} | {v} |");
    }
    let _ = writeln!(s, "| Box side B | {} |", spec.box_side);
    let _ = writeln!(s, "| Solvent density n_s | {} |", spec.solvent_density);
    let _ = writeln!(s, "| Polymer beads | {} |", ctx.system.polymer_beads);
    let _ = writeln!(s, "| Solvent beads | {} |", ctx.system.solvent_beads);
    let _ = writeln!(s, "| Bonds | {} |", ctx.system.bonds);

    s.push_str("\n## Simulation Parameters\n\n| Parameter | Value |\n|---|---|\n");
    let p = &spec.params;
    let _ = writeln!(s, "| ε_pp | {} |", p.eps_pp);
    let _ = writeln!(s, "| ε_ss | {} |", p.eps_ss);
    let _ = writeln!(s, "| ε_sp | {} |", p.eps_sp);
    let _ = writeln!(s, "| Thermostat | {} |", spec.thermostat.name());
    let _ = writeln!(s, "| Temperature T | {} |", spec.thermostat.temperature());
    match spec.thermostat {
        ThermostatSpec::Langevin { gamma, .. } => {
            let _ = writeln!(s, "| Friction γ | {gamma} |");
        }
        ThermostatSpec::NoseHoover { q, .. } => {
            let q = q.map_or_else(|| "0.1 × 3n (default)".to_string(), |q| q.to_string());
            let _ = writeln!(s, "| Thermostat mass Q | {q} |");
        }
    }
    let _ = writeln!(s, "| Steps requested | {} |", spec.run.steps);
    let _ = writeln!(s, "| Steps simulated | {} |", ctx.final_step);
    let _ = writeln!(s, "| Time step dt | {} |", spec.run.dt);
    let _ = writeln!(s, "| Dump interval | {} |", spec.run.dump_every);
    let _ = writeln!(s, "| Seed | {} |", spec.run.seed);

    s.push_str("\n## Results\n\n");
    let _ = writeln!(
        s,
        "Analysis window: steps {} to {} ({} frames).\n",
        obs.window_start, ctx.final_step, obs.window_frames
    );
    s.push_str("| Observable | Value |\n|---|---|\n");
    let _ = writeln!(s, "| Mean R_g² | {} |", fmt(obs.rg2.window_mean));
    let ree = obs.end_to_end.as_ref().map_or(DASH.to_string(), |r| fmt(r.window_mean));
    let _ = writeln!(s, "| Mean R_ee | {ree} |");
    let lp = match &obs.persistence {
        None => DASH.to_string(),
        Some(fit) if fit.is_rigid() => "∞".to_string(),
        Some(fit) => fmt(fit.value()),
    };
    let _ = writeln!(s, "| Persistence length l_p | {lp} |");
    let _ = writeln!(s, "| Diffusion coefficient D | {} |", fmt(obs.msd.diffusion));

    if !plots.is_empty() {
        s.push_str("\n## Plots\n");
        for plot in plots {
            let _ = writeln!(s, "\n### {}\n\n![{}]({})", plot.title, plot.title, plot.file.display());
        }
    }
    s
}

/// Writes the report to `path`; every plot must exist relative to the
/// report's directory.
pub fn write_report(ctx: &RunContext<'_>, obs: &ObservableSet, plots: &[PlotRef], path: &Path) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    for plot in plots {
        let target = dir.join(&plot.file);
        if !target.is_file() {
            return Err(Error::MissingPlot(target));
        }
    }
    fs::write(path, render_report(ctx, obs, plots)).map_err(Error::io(path))
}
