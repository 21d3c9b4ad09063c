//! Generate → simulate → analyze → report, with each stage reading and
//! writing files in one output directory.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use polybead_core::analysis::{analyze, AnalysisOptions, ObservableSet};
use polybead_core::engine::{extend_run, Checkpoint, Engine, ThermoSample, Trajectory};
use polybead_core::forcefield::FeneParams;
use polybead_core::topogen::generate;
use polybead_core::{SystemState, Topology};
use serde::{Deserialize, Serialize};

use crate::data::{read_system, read_topology, write_system};
use crate::dump::{dump_frame_string, read_dump, write_dump};
use crate::plot::{emit_plot, PlotKind, PlotLabels, PlotSeries};
use crate::report::{write_report, PlotRef, RunContext, SystemSummary};
use crate::spec::{show, PipelineSpec, SpecFile};
use crate::tsv::{num, read_table, table_string, write_table};
use crate::{Error, Result};

pub const DATA_STEM: &str = "system";
pub const DUMP_FILE: &str = "trajectory.dump";
pub const THERMO_FILE: &str = "thermo.tsv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const ANALYSIS_FILE: &str = "analysis.json";
pub const REPORT_FILE: &str = "report.md";
pub const FAILED_MARKER: &str = "FAILED";

const THERMO_HEADER: [&str; 5] = ["step", "temperature", "potential_energy", "kinetic_energy", "xi"];

/// Final state plus the engine checkpoint taken with it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SavedRun {
    pub state: SystemState,
    pub checkpoint: Checkpoint,
}

/// Everything the report stage needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub final_step: u64,
    pub system: SystemSummary,
    pub observables: ObservableSet,
    pub plots: Vec<PlotRef>,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::io(dir))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).map_err(Error::io(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path).map_err(Error::io(path))?;
    Ok(serde_json::from_str(&s)?)
}

/// Builds the initial configuration and writes `system.data` with its
/// topology sidecar.
pub fn stage_generate(spec: &PipelineSpec, out: &Path) -> Result<SystemState> {
    create_dir(out)?;
    let state = generate(&spec.generator())?;
    write_system(&state, out, DATA_STEM)?;
    Ok(state)
}

fn thermo_rows(traj: &Trajectory, from: usize) -> Vec<Vec<String>> {
    traj.thermo[from..]
        .iter()
        .map(|t| {
            vec![
                t.step.to_string(),
                num(t.temperature),
                num(t.potential_energy),
                num(t.kinetic_energy),
                num(t.xi),
            ]
        })
        .collect()
}

fn save_run(engine: &Engine, out: &Path) -> Result<()> {
    write_json(
        &SavedRun {
            state: engine.state().clone(),
            checkpoint: engine.checkpoint(),
        },
        &out.join(CHECKPOINT_FILE),
    )
}

pub fn new_engine(spec: &PipelineSpec, state: SystemState) -> Result<Engine> {
    Ok(Engine::new(
        state,
        spec.params,
        FeneParams::default(),
        spec.thermostat,
        &spec.run,
    )?)
}

/// Runs `spec.run.steps` steps and writes the dump, thermo table and
/// checkpoint.
pub fn stage_simulate(spec: &PipelineSpec, state: SystemState, out: &Path) -> Result<(Engine, Trajectory)> {
    create_dir(out)?;
    let mut engine = new_engine(spec, state)?;
    let mut traj = Trajectory::for_state(engine.state());
    engine.advance(spec.run.steps, &mut traj)?;
    write_dump(&traj, &out.join(DUMP_FILE))?;
    write_table(&out.join(THERMO_FILE), &THERMO_HEADER, &thermo_rows(&traj, 0))?;
    save_run(&engine, out)?;
    Ok((engine, traj))
}

/// Continues a run by `extra` steps, appending to the dump and thermo table
/// and replacing the checkpoint.
pub fn stage_extend(engine: &mut Engine, traj: &mut Trajectory, extra: u64, out: &Path) -> Result<()> {
    let (frames_before, thermo_before) = (traj.frames.len(), traj.thermo.len());
    extend_run(engine, traj, extra)?;
    let dump_path = out.join(DUMP_FILE);
    let mut dump = OpenOptions::new().append(true).open(&dump_path).map_err(Error::io(&dump_path))?;
    for frame in &traj.frames[frames_before..] {
        dump.write_all(dump_frame_string(frame, traj.sim_box, &traj.species).as_bytes())
            .map_err(Error::io(&dump_path))?;
    }
    let thermo_path = out.join(THERMO_FILE);
    let rows = table_string(&THERMO_HEADER, &thermo_rows(traj, thermo_before));
    let body = rows.split_once('\n').map_or("", |(_, b)| b);
    let mut thermo = OpenOptions::new().append(true).open(&thermo_path).map_err(Error::io(&thermo_path))?;
    thermo.write_all(body.as_bytes()).map_err(Error::io(&thermo_path))?;
    save_run(engine, out)
}

/// Restores the engine and trajectory of a finished run in `out`.
pub fn load_run(spec: &PipelineSpec, out: &Path) -> Result<(Engine, Trajectory)> {
    let saved: SavedRun = read_json(&out.join(CHECKPOINT_FILE))?;
    let engine = Engine::resume(
        saved.state,
        spec.params,
        FeneParams::default(),
        spec.thermostat,
        &spec.run,
        saved.checkpoint,
    )?;
    let mut traj = read_dump(&out.join(DUMP_FILE))?;
    traj.thermo = read_thermo(&out.join(THERMO_FILE))?;
    Ok((engine, traj))
}

fn read_thermo(path: &Path) -> Result<Vec<ThermoSample>> {
    let (header, rows) = read_table(path)?;
    let bad = |line: usize, msg: &str| Error::Parse {
        source_name: path.display().to_string(),
        line,
        msg: msg.to_string(),
    };
    if header != THERMO_HEADER {
        return Err(bad(1, "unexpected thermo columns"));
    }
    rows.iter()
        .enumerate()
        .map(|(k, r)| {
            let f = |c: usize| r.get(c).and_then(|v| v.parse::<f64>().ok()).ok_or_else(|| bad(k + 2, "bad number"));
            Ok(ThermoSample {
                step: r[0].parse().map_err(|_| bad(k + 2, "bad step"))?,
                temperature: f(1)?,
                potential_energy: f(2)?,
                kinetic_energy: f(3)?,
                xi: f(4)?,
            })
        })
        .collect()
}

fn plot(
    out: &Path,
    plots: &mut Vec<PlotRef>,
    file: &str,
    title: &str,
    kind: PlotKind,
    labels: (&str, &str),
    series: Vec<PlotSeries>,
) -> Result<()> {
    emit_plot(&series, kind, &PlotLabels::new(title, labels.0, labels.1), &out.join(file))?;
    plots.push(PlotRef {
        title: title.to_string(),
        file: PathBuf::from(file),
    });
    Ok(())
}

/// Analyzes `traj`, writing `analysis.json`, one SVG per observable and a
/// TSV of the plotted data next to each.
pub fn stage_analyze(
    spec: &PipelineSpec,
    topology: &Topology,
    system: SystemSummary,
    traj: &Trajectory,
    out: &Path,
) -> Result<AnalysisRecord> {
    create_dir(out)?;
    let options = AnalysisOptions {
        dt: spec.run.dt,
        ..Default::default()
    };
    let obs = analyze(traj, topology, &options)?;
    let mut plots = Vec::new();
    let pts = |v: &[(u64, f64)]| v.iter().map(|&(s, y)| (s as f64, y)).collect::<Vec<_>>();

    plot(
        out,
        &mut plots,
        "rg2.svg",
        "Radius of gyration",
        PlotKind::Line,
        ("step", "R_g^2"),
        vec![PlotSeries::from_points("R_g^2", pts(&obs.rg2.values))],
    )?;
    if let Some(ree) = &obs.end_to_end {
        plot(
            out,
            &mut plots,
            "ree.svg",
            "End-to-end distance",
            PlotKind::Line,
            ("step", "R_ee"),
            vec![PlotSeries::from_points("R_ee", pts(&ree.values))],
        )?;
    }
    if let Some(fit) = &obs.persistence {
        let mut series = vec![PlotSeries::from_points(
            "<cos θ(s)>",
            fit.correlation.iter().map(|&(s, c)| (s as f64, c)),
        )];
        if let Some(lp) = fit.lp {
            series.push(PlotSeries::from_points(
                format!("exp(-s/{lp:.3})"),
                fit.correlation.iter().map(|&(s, _)| (s as f64, (-(s as f64) / lp).exp())),
            ));
        }
        plot(
            out,
            &mut plots,
            "bond_correlation.svg",
            "Bond orientation correlation",
            PlotKind::Line,
            ("s", "<cos θ(s)>"),
            series,
        )?;
    }
    plot(
        out,
        &mut plots,
        "msd.svg",
        "Centre-of-mass mean squared displacement",
        PlotKind::Line,
        ("Δt", "MSD"),
        vec![PlotSeries::from_points("MSD", obs.msd.curve.iter().copied())],
    )?;
    let pq_kind = if obs.form_factor.iter().all(|&(_, p)| p > 0.0) {
        PlotKind::LogLog
    } else {
        PlotKind::Line
    };
    plot(
        out,
        &mut plots,
        "form_factor.svg",
        "Form factor",
        pq_kind,
        ("q", "P(q)"),
        vec![PlotSeries::from_points("P(q)", obs.form_factor.iter().copied())],
    )?;
    plot(
        out,
        &mut plots,
        "rdf.svg",
        "Pair distance distribution",
        PlotKind::Line,
        ("r", "g(r)"),
        vec![PlotSeries::from_points("g(r)", obs.rdf.bins.iter().copied())],
    )?;
    if !traj.thermo.is_empty() {
        plot(
            out,
            &mut plots,
            "temperature.svg",
            "Kinetic temperature",
            PlotKind::Line,
            ("step", "T"),
            vec![PlotSeries::from_points(
                "T",
                traj.thermo.iter().map(|t| (t.step as f64, t.temperature)),
            )],
        )?;
    }

    let record = AnalysisRecord {
        final_step: traj.last_step().unwrap_or(0),
        system,
        observables: obs,
        plots,
    };
    write_json(&record, &out.join(ANALYSIS_FILE))?;
    Ok(record)
}

pub fn load_analysis(out: &Path) -> Result<AnalysisRecord> {
    read_json(&out.join(ANALYSIS_FILE))
}

pub fn stage_report(spec: &PipelineSpec, record: &AnalysisRecord, out: &Path) -> Result<PathBuf> {
    let ctx = RunContext {
        spec,
        system: record.system,
        final_step: record.final_step,
        note: None,
    };
    let path = out.join(REPORT_FILE);
    write_report(&ctx, &record.observables, &record.plots, &path)?;
    Ok(path)
}

/// Reads the generated system of `out`.
pub fn load_system(out: &Path) -> Result<SystemState> {
    read_system(out, DATA_STEM)
}

pub fn load_topology(out: &Path) -> Result<Topology> {
    read_topology(&out.join(format!("{DATA_STEM}.topology.json")))
}

/// Result of one completed run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub out: PathBuf,
    pub record: AnalysisRecord,
}

fn run_stages(spec: &PipelineSpec) -> Result<RunOutcome> {
    let out = spec.out.as_path();
    let state = stage_generate(spec, out)?;
    let system = SystemSummary::of(&state);
    let topology = state.topology.clone();
    let (_, traj) = stage_simulate(spec, state, out)?;
    let record = stage_analyze(spec, &topology, system, &traj, out)?;
    stage_report(spec, &record, out)?;
    Ok(RunOutcome {
        out: out.to_path_buf(),
        record,
    })
}

/// Runs every stage into `spec.out`. Outputs written before a failure are
/// kept and a `FAILED` file records the error.
pub fn run_single(spec: &PipelineSpec) -> Result<RunOutcome> {
    let out = spec.out.as_path();
    create_dir(out)?;
    let marker = out.join(FAILED_MARKER);
    if marker.exists() {
        fs::remove_file(&marker).map_err(Error::io(&marker))?;
    }
    let result = run_stages(spec);
    if let Err(e) = &result {
        fs::write(&marker, format!("{e}\n")).map_err(Error::io(&marker))?;
    }
    result
}

/// One row of a sweep summary.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub label: String,
    pub value: String,
    pub outcome: std::result::Result<RunOutcome, String>,
}

/// Runs a spec file: a single run into `out`, or one sub-run per value of
/// the sweep key followed by `summary.md` and `summary.tsv` in `out`.
pub fn run_pipeline(file: &SpecFile) -> Result<Vec<SweepRow>> {
    let points = file.expand()?;
    let sweep = file.sweep()?;
    if sweep.is_none() {
        let point = &points[0];
        create_dir(&point.spec.out)?;
        fs::write(point.spec.out.join("spec.toml"), file.to_toml()).map_err(Error::io(&point.spec.out))?;
        let outcome = run_single(&point.spec)?;
        return Ok(vec![SweepRow {
            label: String::new(),
            value: String::new(),
            outcome: Ok(outcome),
        }]);
    }
    let (key, _) = sweep.expect("checked above");
    let base = match file.effective("out") {
        Some(toml::Value::String(s)) => PathBuf::from(s),
        _ => PathBuf::from("."),
    };
    create_dir(&base)?;
    let mut rows = Vec::new();
    for point in &points {
        let mut single = file.clone();
        single.set(&key, point.value.clone())?;
        single.set("out", toml::Value::String(point.spec.out.display().to_string()))?;
        create_dir(&point.spec.out)?;
        fs::write(point.spec.out.join("spec.toml"), single.to_toml()).map_err(Error::io(&point.spec.out))?;
        rows.push(SweepRow {
            label: point.label.clone(),
            value: show(&point.value),
            outcome: run_single(&point.spec).map_err(|e| e.to_string()),
        });
    }
    write_summary(&base, &key, &rows)?;
    Ok(rows)
}

fn summary_cells(o: &RunOutcome) -> [String; 4] {
    let obs = &o.record.observables;
    let dash = || "—".to_string();
    [
        num(obs.rg2.window_mean),
        obs.end_to_end.as_ref().map_or_else(dash, |r| num(r.window_mean)),
        obs.persistence
            .as_ref()
            .map_or_else(dash, |p| if p.is_rigid() { "inf".into() } else { num(p.value()) }),
        num(obs.msd.diffusion),
    ]
}

fn write_summary(base: &Path, key: &str, rows: &[SweepRow]) -> Result<()> {
    let mut table = Vec::new();
    let mut md = format!("# Sweep over {key}\n\n| {key} | R_g² | R_ee | l_p | D | report |\n|---|---|---|---|---|---|\n");
    for row in rows {
        match &row.outcome {
            Ok(o) => {
                let c = summary_cells(o);
                md.push_str(&format!(
                    "| {} | {} | {} | {} | {} | [{}]({}/{REPORT_FILE}) |\n",
                    row.value, c[0], c[1], c[2], c[3], row.label, row.label
                ));
                let mut r = vec![row.value.clone()];
                r.extend(c);
                r.push("ok".into());
                table.push(r);
            }
            Err(e) => {
                md.push_str(&format!("| {} | — | — | — | — | failed: {} |\n", row.value, e.lines().next().unwrap_or("")));
                let mut r = vec![row.value.clone()];
                r.extend(std::iter::repeat_n("—".to_string(), 4));
                r.push("failed".into());
                table.push(r);
            }
        }
    }
    let path = base.join("summary.md");
    fs::write(&path, md).map_err(Error::io(&path))?;
    write_table(&base.join("summary.tsv"), &[key, "rg2", "ree", "lp", "D", "status"], &table)
}
