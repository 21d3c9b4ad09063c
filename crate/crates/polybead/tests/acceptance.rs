//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines print in order. Set
//! `POLYBEAD_ACCEPTANCE_QUICK=1` to skip the long-running brush study.
//! Failed criteria are listed at the end; the exit status is nonzero for
//! them only with `POLYBEAD_ACCEPTANCE_STRICT=1`. A panic outside a
//! criterion still fails the target.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use polybead::data::{lammps_data_string, read_lammps_data, write_lammps_data};
use polybead::dump::{read_dump, write_dump};
use polybead::pipeline::{
    load_analysis, load_run, load_topology, run_single, stage_extend, stage_generate, stage_simulate,
    DUMP_FILE, REPORT_FILE,
};
use polybead::polybead_core::analysis::{
    analysis_window, analyze, end_to_end_distance, fit_persistence, form_factor, msd_and_diffusion, persistence_length,
    AnalysisOptions, Chain,
};
use polybead::polybead_core::engine::{extend_run, run, step_nve, Trajectory, TrajectoryFrame};
use polybead::polybead_core::forcefield::{
    compute_forces, compute_forces_all_pairs, FeneParams, ForceAccumulator, ForceField,
};
use polybead::polybead_core::topogen::{
    generate, generate_brush, generate_dendrimer, generate_linear, generate_ring, generate_star, pack_solvent,
    GeneratorSpec, PolymerShape,
};
use polybead::polybead_core::{
    Architecture, InteractionParams, RunSpec, SimBox, Species, SystemState, ThermostatSpec, Topology, Vec3,
};
use polybead::shell::Shell;
use polybead::spec::SpecFile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const R0: f64 = 1.5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn langevin(temperature: f64) -> ThermostatSpec {
    ThermostatSpec::Langevin { gamma: 1.0, temperature }
}

fn max_bond_length(traj: &Trajectory, bonds: &[(usize, usize)]) -> f64 {
    traj.frames
        .iter()
        .flat_map(|f| bonds.iter().map(|&(i, j)| (f.positions[i] - f.positions[j]).norm()))
        .fold(0.0, f64::max)
}

fn bond_pairs(state: &SystemState) -> Vec<(usize, usize)> {
    state.bonds.iter().map(|b| b.key()).collect()
}

// 1 -----------------------------------------------------------------------

fn potential(state: &SystemState, params: &InteractionParams) -> f64 {
    compute_forces_all_pairs(state, params, &FeneParams::default()).unwrap().potential_energy
}

fn displaced(state: &SystemState, bead: usize, axis: usize, h: f64) -> SystemState {
    let mut s = state.clone();
    let b = &mut s.beads[bead];
    let mut p = b.position.to_array();
    p[axis] += h;
    let (w, img) = s.sim_box.wrap(Vec3::new(p[0], p[1], p[2]));
    b.position = w;
    for k in 0..3 {
        b.image[k] += img[k];
    }
    s
}

/// True when some pair distance of `bead` lies within `h` of the cutoff,
/// where the truncated potential has a force jump and central differences
/// are meaningless.
fn straddles_cutoff(state: &SystemState, bead: usize, r_cut: f64, h: f64) -> bool {
    let p = state.beads[bead].position;
    state.beads.iter().enumerate().any(|(j, b)| {
        j != bead && (state.sim_box.minimum_image(b.position - p).norm() - r_cut).abs() < 2.0 * h
    })
}

fn criterion_1() -> Outcome {
    let side = 8.0;
    let n_s = 180.0 / (side * side * side);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut max_list_diff = 0.0f64;
    let mut max_rel = 0.0f64;
    let (mut checked, mut skipped, mut configs) = (0, 0, 0);
    let h = 1e-5;
    for seed in 0..50u64 {
        let state = generate_linear(20, side, n_s, seed).unwrap();
        assert_eq!(state.n_beads(), 200);
        configs += 1;
        let params = InteractionParams::new(
            rng.random_range(0.1..2.0),
            rng.random_range(0.1..2.0),
            rng.random_range(0.1..2.0),
        );
        let fene = FeneParams::default();
        let reference = compute_forces_all_pairs(&state, &params, &fene).unwrap();
        let cells = compute_forces(&state, &params, &fene).unwrap();
        let mut ff = ForceField::new(params, fene);
        let mut verlet = ForceAccumulator::zeroed(state.n_beads());
        ff.compute(&state, &mut verlet).unwrap();
        for acc in [&cells, &verlet] {
            for (a, b) in acc.forces.iter().zip(&reference.forces) {
                for (x, y) in a.to_array().iter().zip(b.to_array()) {
                    max_list_diff = max_list_diff.max((x - y).abs());
                }
            }
        }
        for _ in 0..6 {
            let bead = rng.random_range(0..state.n_beads());
            if straddles_cutoff(&state, bead, params.r_cut, h) {
                skipped += 1;
                continue;
            }
            for axis in 0..3 {
                let up = potential(&displaced(&state, bead, axis, h), &params);
                let down = potential(&displaced(&state, bead, axis, -h), &params);
                let numeric = -(up - down) / (2.0 * h);
                let analytic = reference.forces[bead].to_array()[axis];
                max_rel = max_rel.max((analytic - numeric).abs() / analytic.abs().max(1.0));
                checked += 1;
            }
        }
    }
    outcome(
        max_list_diff <= 1e-9 && max_rel < 1e-4,
        format!(
            "force correctness: {configs} configs of 200 beads, max |cell/verlet - all-pairs| = {max_list_diff:.2e} (<= 1e-9), \
             max finite-difference rel. error = {max_rel:.2e} over {checked} components (< 1e-4; {skipped} beads within 2h of r_c skipped)"
        ),
    )
}

// 2 -----------------------------------------------------------------------

fn empty_box(side: f64) -> SystemState {
    SystemState {
        beads: Vec::new(),
        bonds: Vec::new(),
        topology: Topology::new(Architecture::Linear),
        sim_box: SimBox::new(side).unwrap(),
        step: 0,
    }
}

fn criterion_2() -> Outcome {
    let side = 7.5;
    let state = pack_solvent(empty_box(side), 200.0 / (side * side * side), 5).unwrap();
    let n = state.n_beads();
    let params = InteractionParams::default();
    let mut warm = RunSpec::new(2000, 5);
    warm.dt = 0.005;
    let (engine, _) = run(state, params, FeneParams::default(), langevin(1.0), &warm).unwrap();
    let mut state = engine.into_state();
    let mut ff = ForceField::new(params, FeneParams::default());
    let mut acc = ForceAccumulator::zeroed(n);
    ff.compute(&state, &mut acc).unwrap();
    let energy = |s: &SystemState, a: &ForceAccumulator| {
        a.potential_energy + s.beads.iter().map(|b| 0.5 * b.mass * b.velocity.norm2()).sum::<f64>()
    };
    let e0 = energy(&state, &acc);
    let steps = 10_000;
    let mut series = Vec::with_capacity(steps);
    for _ in 0..steps {
        step_nve(&mut state, &mut ff, &mut acc, 0.005).unwrap();
        series.push((energy(&state, &acc) - e0) / n as f64);
    }
    // drift is the systematic trend: least-squares slope times the run length
    let t_mean = (steps as f64 - 1.0) / 2.0;
    let e_mean = series.iter().sum::<f64>() / steps as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, e) in series.iter().enumerate() {
        sxy += (k as f64 - t_mean) * (e - e_mean);
        sxx += (k as f64 - t_mean).powi(2);
    }
    let drift = (sxy / sxx * steps as f64).abs();
    let worst = series.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    outcome(
        drift < 1e-3,
        format!(
            "NVE drift: {n}-bead LJ fluid, 1e4 steps at dt = 0.005, fitted drift {drift:.2e} per bead (< 1e-3); \
             final E - E0 = {:.2e}, largest excursion {worst:.2e}",
            series[steps - 1]
        ),
    )
}

// 3 -----------------------------------------------------------------------

fn criterion_3() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for thermostat in [ThermostatSpec::langevin(), ThermostatSpec::nose_hoover()] {
        let state = pack_solvent(empty_box(10.0), 0.5, 9).unwrap();
        let n = state.n_beads();
        let (_, traj) = run(state, InteractionParams::default(), FeneParams::default(), thermostat, &RunSpec::new(50_000, 9)).unwrap();
        let half: Vec<_> = traj.thermo.iter().filter(|t| t.step >= 25_000).collect();
        let t_mean = half.iter().map(|t| t.temperature).sum::<f64>() / half.len() as f64;
        let xi_mean = half.iter().map(|t| t.xi).sum::<f64>() / half.len() as f64;
        pass &= (t_mean - 1.0).abs() <= 0.05;
        let extra = match thermostat {
            ThermostatSpec::NoseHoover { .. } => format!(", mean xi = {xi_mean:.2e}"),
            ThermostatSpec::Langevin { .. } => String::new(),
        };
        parts.push(format!("{} T = {t_mean:.4}{extra} ({n} beads)", thermostat.name()));
    }
    outcome(pass, format!("thermostat targets: 5e4 steps, second half: {} (1.00 +- 0.05)", parts.join("; ")))
}

// 4 -----------------------------------------------------------------------

fn criterion_4() -> Outcome {
    let mut fits = Vec::new();
    for seed in 1..=16u64 {
        let state = generate_linear(1, 20.0, 0.0, seed).unwrap();
        let (_, traj) = run(state, InteractionParams::default(), FeneParams::default(), langevin(1.0), &RunSpec::new(200_000, seed)).unwrap();
        let window = analysis_window(&traj.frames);
        fits.push(msd_and_diffusion(window, &[0], 0.01).unwrap().diffusion);
    }
    let mean = fits.iter().sum::<f64>() / fits.len() as f64;
    let sd = (fits.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (fits.len() - 1) as f64).sqrt();
    outcome(
        (mean - 1.0).abs() <= 0.15,
        format!(
            "Einstein relation: free bead, gamma = T = 1, 2e5 steps, seeds 1..=16: mean D = {mean:.4} (1.0 +- 0.15), \
             per-seed sd {sd:.3}, range [{:.3}, {:.3}]",
            fits.iter().cloned().fold(f64::INFINITY, f64::min),
            fits.iter().cloned().fold(0.0, f64::max)
        ),
    )
}

// 5, 6 --------------------------------------------------------------------

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn criterion_5() -> Outcome {
    let mut means = Vec::new();
    let mut max_bond = 0.0f64;
    for eps in [0.3, 0.6, 1.0] {
        let mut sum = 0.0;
        for seed in 1..=4u64 {
            let state = generate_linear(40, 40.0, 0.0, seed).unwrap();
            let bonds = bond_pairs(&state);
            let topology = state.topology.clone();
            let params = InteractionParams::new(eps, 1.0, 1.0);
            let (_, traj) = run(state, params, FeneParams::default(), langevin(1.0), &RunSpec::new(100_000, seed)).unwrap();
            max_bond = max_bond.max(max_bond_length(&traj, &bonds));
            sum += analyze(&traj, &topology, &AnalysisOptions::default()).unwrap().rg2.window_mean;
        }
        means.push(sum / 4.0);
    }
    outcome(
        strictly_decreasing(&means) && max_bond < R0,
        format!(
            "collapse trend: linear N = 40, eps_pp = 0.3/0.6/1.0, 1e5 steps x 4 seeds: <R_g^2> = {:.3} / {:.3} / {:.3} \
             (strictly decreasing), max bond {max_bond:.3} < R0",
            means[0], means[1], means[2]
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut means = Vec::new();
    let mut per_seed = Vec::new();
    let mut max_bond = 0.0f64;
    for sigma in [0.2, 0.6, 1.0] {
        let mut values = Vec::new();
        for seed in 1..=4u64 {
            let state = generate_brush(20, sigma, 5, 20.0, 0.2, seed).unwrap();
            let bonds = bond_pairs(&state);
            let topology = state.topology.clone();
            let params = InteractionParams::new(0.3, 0.3, 1.5);
            let (_, traj) = run(state, params, FeneParams::default(), langevin(1.0), &RunSpec::new(100_000, seed)).unwrap();
            max_bond = max_bond.max(max_bond_length(&traj, &bonds));
            let obs = analyze(&traj, &topology, &AnalysisOptions::default()).unwrap();
            values.push(obs.persistence.map_or(f64::NAN, |p| p.value()));
        }
        means.push(values.iter().sum::<f64>() / values.len() as f64);
        per_seed.push(values.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(","));
    }
    let increasing = means.windows(2).all(|w| w[1] > w[0]);
    outcome(
        increasing && max_bond < R0,
        format!(
            "brush stiffening: N_b = 20, N_s = 5, n_s = 0.2, B = 20, sigma_g = 0.2/0.6/1.0, 1e5 steps x 4 seeds: \
             backbone l_p = {:.3} / {:.3} / {:.3} (strictly increasing; per seed [{}] [{}] [{}]), max bond {max_bond:.3} < R0",
            means[0], means[1], means[2], per_seed[0], per_seed[1], per_seed[2]
        ),
    )
}

// 7 -----------------------------------------------------------------------

fn freely_rotating(l: f64, bonds: usize, frames: usize, seed: u64) -> Vec<TrajectoryFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cos_t = (-1.0 / l).exp();
    let sin_t = (1.0 - cos_t * cos_t).sqrt();
    (0..frames)
        .map(|f| {
            let mut u = Vec3::new(0.0, 0.0, 1.0);
            let mut p = vec![Vec3::new(5.0, 5.0, 5.0)];
            for _ in 0..bonds {
                p.push(*p.last().unwrap() + u * 0.97);
                let helper = if u.z.abs() < 0.9 { Vec3::new(0.0, 0.0, 1.0) } else { Vec3::new(1.0, 0.0, 0.0) };
                let e1 = u.cross(helper).normalized();
                let e2 = u.cross(e1);
                let phi = rng.random::<f64>() * std::f64::consts::TAU;
                u = (u * cos_t + (e1 * phi.cos() + e2 * phi.sin()) * sin_t).normalized();
            }
            TrajectoryFrame {
                step: f as u64,
                positions: p,
            }
        })
        .collect()
}

fn brownian(d0: f64, dt: f64, frames: usize, seed: u64) -> Vec<TrajectoryFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = (2.0 * d0 * dt).sqrt();
    let mut p = Vec3::ZERO;
    let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
    (0..frames)
        .map(|k| {
            if k > 0 {
                p += Vec3::new(g(), g(), g()) * s;
            }
            TrajectoryFrame {
                step: k as u64,
                positions: vec![p],
            }
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (l, seed) in [(1.0, 11u64), (3.0, 12), (10.0, 13)] {
        let exact: Vec<(usize, f64)> = (1..=60).map(|k| (k, (-(k as f64) / l).exp())).collect();
        let exact_lp = fit_persistence(exact).unwrap().value();
        // 10^4 chains keep the sampling sd of the fit near 0.5% at l = 10
        let frames = freely_rotating(l, 150, 10_000, seed);
        let fit = persistence_length(&frames, &[Chain::open((0..151).collect())]).unwrap();
        pass &= (fit.value() - l).abs() < 0.02 * l && (exact_lp - l).abs() < 0.02 * l;
        parts.push(format!("l_p({l}) = {:.4} sampled, {exact_lp:.4} exact", fit.value()));
    }
    // one path scatters by tens of percent, so recovery is judged on the
    // mean over independent paths
    let paths = 400;
    let d = (0..paths)
        .map(|seed| msd_and_diffusion(&brownian(1.0, 0.01, 500, 1000 + seed), &[0], 0.01).unwrap().diffusion)
        .sum::<f64>()
        / paths as f64;
    pass &= (d - 1.0).abs() < 0.1;
    parts.push(format!("D = {d:.4} (mean of {paths} paths)"));
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let n = 1 + k * 7;
        let spread = [1.0, 10.0, 50.0][k % 3];
        let positions: Vec<Vec3> = (0..n)
            .map(|_| Vec3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()) * spread)
            .collect();
        let ids: Vec<usize> = (0..n).collect();
        let pq = form_factor(&[TrajectoryFrame { step: 0, positions }], &ids, &[1e-6]).unwrap();
        worst = worst.max((pq[0].1 - 1.0).abs());
    }
    pass &= worst < 1e-6;
    parts.push(format!("max |P(1e-6) - 1| = {worst:.1e}"));
    outcome(pass, format!("estimator recovery: {} (2% / 10% / 1e-6)", parts.join(", ")))
}

// 8 -----------------------------------------------------------------------

/// Connected components and independent cycles of the bond graph.
fn graph_shape(state: &SystemState) -> (usize, usize) {
    let n = state.n_beads();
    let mut adj = vec![Vec::new(); n];
    for b in &state.bonds {
        let (i, j) = b.key();
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut seen = vec![false; n];
    let mut components = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    (components, state.bonds.len() + components - n)
}

fn criterion_8() -> Outcome {
    let dendrimer_beads = |g: u32, b: usize, s: usize| 1 + (1..=g).map(|k| b.pow(k) * s).sum::<usize>();
    let cases: Vec<(&str, SystemState, usize, usize, usize)> = vec![
        ("linear 40", generate_linear(40, 60.0, 0.0, 1).unwrap(), 40, 39, 0),
        (
            "brush 20/0.6/5",
            generate_brush(20, 0.6, 5, 30.0, 0.0, 1).unwrap(),
            20 + (0.6f64 * 20.0).round() as usize * 5,
            20 + (0.6f64 * 20.0).round() as usize * 5 - 1,
            0,
        ),
        ("star 5x6", generate_star(5, 6, 20.0, 0.0, 1).unwrap(), 1 + 6 * 5, 6 * 5, 0),
        ("dendrimer 2/2/1", generate_dendrimer(2, 2, 1, 15.0, 0.0, 1).unwrap(), dendrimer_beads(2, 2, 1), dendrimer_beads(2, 2, 1) - 1, 0),
        ("ring 10", generate_ring(10, 15.0, 0.0, 1).unwrap(), 10, 10, 1),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, state, beads, bonds, cycles) in cases {
        let (components, found_cycles) = graph_shape(&state);
        let ok = state.n_beads() == beads && state.bonds.len() == bonds && components == 1 && found_cycles == cycles;
        pass &= ok;
        parts.push(format!("{name} -> {}/{}", state.n_beads(), state.bonds.len()));
    }
    // adding solvent never changes the polymer
    let solvated = generate_star(5, 6, 20.0, 0.1, 1).unwrap();
    pass &= solvated.count(Species::Polymer) == 31 && solvated.bonds.len() == 30 && solvated.count(Species::Solvent) == 800;
    outcome(pass, format!("generator counting: {}; star with n_s = 0.1 adds 800 solvent beads", parts.join(", ")))
}

// 9 -----------------------------------------------------------------------

fn pipeline_spec(body: &str, out: &Path) -> SpecFile {
    SpecFile::parse(&format!("{body}\nout = {:?}\n", out.display().to_string())).unwrap()
}

fn report_value(report: &str, label: &str) -> Option<String> {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("| {label} | ")))
        .map(|v| v.trim_end_matches(" |").to_string())
}

fn criterion_9(scratch: &Path) -> Outcome {
    let runs = [
        ("linear", "architecture = \"linear\"\nN = 20\nB = 20\nn_s = 0.05"),
        ("ring", "architecture = \"ring\"\nN = 20\nB = 20\nn_s = 0.05"),
        ("brush", "architecture = \"brush\"\nN_b = 20\nsigma_g = 0.6\nN_s = 5\nB = 20\nn_s = 0.05"),
        ("star", "architecture = \"star\"\nN_a = 6\nm = 4\nB = 20\nn_s = 0.05"),
        ("dendrimer", "architecture = \"dendrimer\"\nG = 3\nb = 2\nN_s = 2\nB = 20\nn_s = 0.05"),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, body) in runs {
        let out = scratch.join(name);
        let spec = pipeline_spec(&format!("{body}\nsteps = 4000\nseed = 3"), &out)
            .resolve()
            .unwrap();
        run_single(&spec).unwrap();
        let record = load_analysis(&out).unwrap();
        let obs = &record.observables;
        let report = fs::read_to_string(out.join(REPORT_FILE)).unwrap();
        let ree_row = report_value(&report, "Mean R_ee").unwrap();
        let lp_row = report_value(&report, "Persistence length l_p").unwrap();

        // recompute from the files on disk
        let traj = read_dump(&out.join(DUMP_FILE)).unwrap();
        let topo = load_topology(&out).unwrap();
        let window = analysis_window(&traj.frames);
        let chain = match topo.architecture {
            Architecture::Star => Some(Chain::open(topo.arms[0].clone())),
            Architecture::Ring => Some(Chain::closed(topo.backbone.clone())),
            Architecture::Dendrimer => None,
            _ => Some(Chain::open(topo.backbone.clone())),
        };
        let ok = match topo.architecture {
            Architecture::Dendrimer => {
                obs.end_to_end.is_none() && obs.persistence.is_none() && ree_row == "—" && lp_row == "—"
            }
            Architecture::Ring => {
                let c = chain.unwrap();
                obs.end_to_end.is_none()
                    && ree_row == "—"
                    && obs.persistence.as_ref() == Some(&persistence_length(window, &[c]).unwrap())
            }
            _ => {
                let c = chain.unwrap();
                let ree: Vec<f64> = window.iter().map(|f| end_to_end_distance(&f.positions, &c.ids).unwrap()).collect();
                let ree_mean = ree.iter().sum::<f64>() / ree.len() as f64;
                let restricted = match topo.architecture {
                    Architecture::Brush => c.ids.len() == 20 && topo.graft_points.len() == 12,
                    Architecture::Star => c.ids.len() == 7 && c.ids[0] == 0,
                    _ => c.ids.len() == 20,
                };
                restricted
                    && obs.end_to_end.as_ref().is_some_and(|s| (s.window_mean - ree_mean).abs() <= 1e-12 * ree_mean)
                    && obs.persistence.as_ref() == Some(&persistence_length(window, &[c]).unwrap())
                    && ree_row != "—"
                    && lp_row != "—"
            }
        };
        pass &= ok;
        parts.push(format!("{name}: R_ee {ree_row}, l_p {lp_row}"));
    }
    outcome(
        pass,
        format!(
            "applicability on pipeline outputs: {}; brush/star values match backbone/arm-0 recomputation",
            parts.join("; ")
        ),
    )
}

// 10 ----------------------------------------------------------------------

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn criterion_10(scratch: &Path) -> Outcome {
    let mut checks = Vec::new();

    // run(a + b) against run(a) + extend(b), for both thermostats
    let mut continuation = true;
    for thermostat in [ThermostatSpec::langevin(), ThermostatSpec::nose_hoover()] {
        let state = generate_star(4, 3, 10.0, 0.2, 21).unwrap();
        let mut whole = RunSpec::new(1200, 21);
        whole.dump_every = 50;
        let mut part = whole;
        part.steps = 700;
        let params = InteractionParams::default();
        let (e_whole, t_whole) = run(state.clone(), params, FeneParams::default(), thermostat, &whole).unwrap();
        let (mut e_part, mut t_part) = run(state, params, FeneParams::default(), thermostat, &part).unwrap();
        extend_run(&mut e_part, &mut t_part, 500).unwrap();
        continuation &= e_whole.state() == e_part.state() && t_whole == t_part && e_whole.checkpoint() == e_part.checkpoint();
    }
    checks.push(("run(a+b) == run(a)+extend(b)", continuation));

    // the same through files: simulate, restore from the checkpoint, extend
    let spec_text = "architecture = \"brush\"\nN_b = 12\nsigma_g = 0.5\nN_s = 3\nB = 12\nn_s = 0.1\nseed = 4\ndump_every = 50";
    let a = scratch.join("resume_a");
    let b = scratch.join("resume_b");
    let short = pipeline_spec(&format!("{spec_text}\nsteps = 600"), &a).resolve().unwrap();
    let long = pipeline_spec(&format!("{spec_text}\nsteps = 1000"), &b).resolve().unwrap();
    let state = stage_generate(&short, &a).unwrap();
    stage_simulate(&short, state, &a).unwrap();
    let (mut engine, mut traj) = load_run(&short, &a).unwrap();
    stage_extend(&mut engine, &mut traj, 400, &a).unwrap();
    let state = stage_generate(&long, &b).unwrap();
    stage_simulate(&long, state, &b).unwrap();
    let resumed = ["trajectory.dump", "thermo.tsv", "checkpoint.json"]
        .iter()
        .all(|f| fs::read(a.join(f)).unwrap() == fs::read(b.join(f)).unwrap());
    checks.push(("checkpoint resume", resumed));

    // pipeline and shell produce the same report
    let body = "architecture = \"ring\"\nN = 16\nB = 15\nn_s = 0.1\nsteps = 2000\nseed = 8";
    let piped = run_single(&pipeline_spec(body, &scratch.join("pipe")).resolve().unwrap()).unwrap();
    let mut shell = Shell::new(pipeline_spec(body, &scratch.join("shell")), Vec::new());
    for cmd in ["gen", "run", "report"] {
        shell.execute(cmd).unwrap();
    }
    let same_report = fs::read(piped.out.join(REPORT_FILE)).unwrap() == fs::read(scratch.join("shell").join(REPORT_FILE)).unwrap();
    checks.push(("pipeline report == shell report", same_report));

    // (spec, seed) determinism of whole pipelines, every output file
    let body = "architecture = \"star\"\nN_a = 5\nm = 4\nB = 14\nn_s = 0.1\nthermostat = \"nose-hoover\"\nsteps = 1500\nseed = 12";
    run_single(&pipeline_spec(body, &scratch.join("det1")).resolve().unwrap()).unwrap();
    run_single(&pipeline_spec(body, &scratch.join("det2")).resolve().unwrap()).unwrap();
    let d1 = dir_bytes(&scratch.join("det1"));
    let deterministic = d1 == dir_bytes(&scratch.join("det2")) && d1.len() > 10;
    checks.push(("pipeline determinism", deterministic));

    outcome(
        checks.iter().all(|c| c.1),
        format!(
            "workflow equivalence: {}",
            checks
                .iter()
                .map(|(n, ok)| format!("{n} {}", if *ok { "ok" } else { "MISMATCH" }))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

// 11 ----------------------------------------------------------------------

fn criterion_11(scratch: &Path) -> Outcome {
    let shapes = [
        PolymerShape::Linear { n: 40 },
        PolymerShape::Ring { n: 10 },
        PolymerShape::Brush {
            backbone: 20,
            grafting_density: 0.6,
            side_chain: 5,
        },
        PolymerShape::Star { arm_length: 5, arms: 6 },
        PolymerShape::Dendrimer {
            generations: 2,
            branching: 2,
            spacer: 1,
        },
    ];
    let mut pass = true;
    let mut files = 0;
    for (k, shape) in shapes.into_iter().enumerate() {
        for n_s in [0.0, 0.1] {
            let state = generate(&GeneratorSpec::new(shape, 14.0, n_s, k as u64)).unwrap();
            let first = scratch.join(format!("g{k}_{n_s}.data"));
            let second = scratch.join(format!("g{k}_{n_s}.again.data"));
            write_lammps_data(&state, &first).unwrap();
            let back = read_lammps_data(&first).unwrap();
            write_lammps_data(&back, &second).unwrap();
            pass &= fs::read(&first).unwrap() == fs::read(&second).unwrap();
            pass &= back.beads == state.beads && back.bonds == state.bonds;

            let mut spec = RunSpec::new(200, k as u64);
            spec.dump_every = 40;
            let (engine, traj) = run(state, InteractionParams::default(), FeneParams::default(), langevin(1.0), &spec).unwrap();
            pass &= lammps_data_string(&read_back(engine.state(), scratch)) == lammps_data_string(engine.state());
            let d1 = scratch.join(format!("g{k}_{n_s}.dump"));
            let d2 = scratch.join(format!("g{k}_{n_s}.again.dump"));
            write_dump(&traj, &d1).unwrap();
            let t = read_dump(&d1).unwrap();
            write_dump(&t, &d2).unwrap();
            pass &= fs::read(&d1).unwrap() == fs::read(&d2).unwrap() && t.frames == traj.frames;
            files += 4;
        }
    }
    outcome(
        pass,
        format!("I/O round trips: {files} data and dump files (5 architectures, with and without solvent, before and after dynamics) byte-identical"),
    )
}

fn read_back(state: &SystemState, scratch: &Path) -> SystemState {
    let p = scratch.join("moved.data");
    write_lammps_data(state, &p).unwrap();
    read_lammps_data(&p).unwrap()
}

fn main() {
    let quick = std::env::var_os("POLYBEAD_ACCEPTANCE_QUICK").is_some_and(|v| v != "0");
    let scratch = tempfile::tempdir().unwrap();
    let s = scratch.path();
    let criteria: Vec<(u32, Box<dyn Fn() -> Outcome>)> = vec![
        (1, Box::new(criterion_1)),
        (2, Box::new(criterion_2)),
        (3, Box::new(criterion_3)),
        (4, Box::new(criterion_4)),
        (5, Box::new(criterion_5)),
        (6, Box::new(criterion_6)),
        (7, Box::new(criterion_7)),
        (8, Box::new(criterion_8)),
        (9, Box::new(|| criterion_9(&s.join("c9")))),
        (10, Box::new(|| criterion_10(&s.join("c10")))),
        (11, Box::new(|| criterion_11(&s.join("c11")))),
    ];
    for dir in ["c9", "c10", "c11"] {
        fs::create_dir_all(s.join(dir)).unwrap();
    }
    let mut failed = Vec::new();
    for (n, check) in &criteria {
        if *n == 6 && quick {
            println!("criterion {n:>2} SKIP  brush stiffening (long-running tier; POLYBEAD_ACCEPTANCE_QUICK is set)");
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        println!("criterion {n:>2} {}  {detail} [{secs:.1} s]", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(*n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        if std::env::var_os("POLYBEAD_ACCEPTANCE_STRICT").is_some_and(|v| v != "0") {
            std::process::exit(1);
        }
    }
}
