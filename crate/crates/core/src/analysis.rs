//! Conformational observables of the polymer: R_g², end-to-end distance,
//! persistence length, centre-of-mass MSD and diffusion coefficient, form
//! factor P(q) and the intra-polymer pair distance distribution g(r).
//!
//! All averaged quantities use the second half of the trajectory (frames with
//! `step >= first + (last - first) / 2`). Time series for R_g² and R_ee cover
//! the whole run.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::engine::{Trajectory, TrajectoryFrame};
use crate::{Architecture, Error, Result, Species, Topology, Vec3};

/// Smallest correlation used by the persistence-length fit.
pub const MIN_CORRELATION: f64 = 0.05;
pub const DEFAULT_Q_POINTS: usize = 64;
pub const DEFAULT_RDF_BIN: f64 = 0.1;

/// Ordered bead ids along a chain; `closed` for rings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub ids: Vec<usize>,
    pub closed: bool,
}

impl Chain {
    pub fn open(ids: Vec<usize>) -> Self {
        Chain { ids, closed: false }
    }

    pub fn closed(ids: Vec<usize>) -> Self {
        Chain { ids, closed: true }
    }

    fn bond_count(&self) -> usize {
        if self.closed {
            self.ids.len()
        } else {
            self.ids.len().saturating_sub(1)
        }
    }
}

/// Which chain-based observables exist for an architecture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Applicability {
    pub end_to_end: bool,
    pub persistence_length: bool,
}

/// Per-architecture rules: dendrimers have neither R_ee nor l_p, rings have
/// no R_ee, brushes use the backbone and stars a single arm.
pub struct ApplicabilityMatrix;

impl ApplicabilityMatrix {
    pub fn for_architecture(a: Architecture) -> Applicability {
        match a {
            Architecture::Linear | Architecture::Brush | Architecture::Star => Applicability {
                end_to_end: true,
                persistence_length: true,
            },
            Architecture::Ring => Applicability {
                end_to_end: false,
                persistence_length: true,
            },
            Architecture::Dendrimer => Applicability {
                end_to_end: false,
                persistence_length: false,
            },
        }
    }

    /// Chains on which R_ee and l_p are evaluated. Stars use arm 0 unless
    /// `all_arms` is set.
    pub fn chains(topology: &Topology, all_arms: bool) -> Vec<Chain> {
        match topology.architecture {
            Architecture::Linear | Architecture::Brush => vec![Chain::open(topology.backbone.clone())],
            Architecture::Ring => vec![Chain::closed(topology.backbone.clone())],
            Architecture::Star => {
                let n = if all_arms { topology.arms.len() } else { topology.arms.len().min(1) };
                topology.arms[..n].iter().cloned().map(Chain::open).collect()
            }
            Architecture::Dendrimer => Vec::new(),
        }
    }
}

/// Frames in the analysis window (second half of the run).
pub fn analysis_window(frames: &[TrajectoryFrame]) -> &[TrajectoryFrame] {
    let (Some(first), Some(last)) = (frames.first(), frames.last()) else {
        return frames;
    };
    let span = last.step - first.step;
    let start = frames
        .iter()
        .position(|f| 2 * (f.step - first.step) >= span)
        .unwrap_or(frames.len());
    &frames[start..]
}

fn center_of_mass(positions: &[Vec3], ids: &[usize]) -> Vec3 {
    ids.iter().map(|&i| positions[i]).sum::<Vec3>() / ids.len() as f64
}

/// Mean squared distance of the selected beads from their centre of mass.
pub fn radius_of_gyration_sq(positions: &[Vec3], ids: &[usize]) -> Result<f64> {
    if ids.is_empty() {
        return Err(Error::InsufficientData {
            what: "radius of gyration selection",
            needed: 1,
            got: 0,
        });
    }
    let c = center_of_mass(positions, ids);
    Ok(ids.iter().map(|&i| (positions[i] - c).norm2()).sum::<f64>() / ids.len() as f64)
}

/// `|r_last - r_first|` along an ordered chain.
pub fn end_to_end_distance(positions: &[Vec3], chain: &[usize]) -> Result<f64> {
    if chain.len() < 2 {
        return Err(Error::InsufficientData {
            what: "end-to-end chain length",
            needed: 2,
            got: chain.len(),
        });
    }
    Ok((positions[chain[chain.len() - 1]] - positions[chain[0]]).norm())
}

/// End-to-end distance of the architecture's reference chain, or
/// [`Error::NotApplicable`] for rings and dendrimers.
pub fn end_to_end(frame: &TrajectoryFrame, topology: &Topology) -> Result<f64> {
    if !ApplicabilityMatrix::for_architecture(topology.architecture).end_to_end {
        return Err(Error::NotApplicable {
            observable: "end-to-end distance",
            architecture: topology.architecture,
        });
    }
    let chains = ApplicabilityMatrix::chains(topology, false);
    let chain = chains.first().ok_or(Error::InvalidState("topology has no chain".into()))?;
    end_to_end_distance(&frame.positions, &chain.ids)
}

/// Result of fitting `<cos θ(s)> = exp(-s / l_p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceFit {
    /// Persistence length in bond lengths; `None` for a perfectly rigid chain.
    pub lp: Option<f64>,
    /// `(s, <cos θ(s)>)` for every separation.
    pub correlation: Vec<(usize, f64)>,
    /// Inclusive range of `s` used in the fit.
    pub fit_range: (usize, usize),
    /// RMS residual of `ln <cos θ(s)> + s / l_p` over the fit range.
    pub residual: f64,
}

impl PersistenceFit {
    /// `l_p`, with `+inf` for a rigid chain.
    pub fn value(&self) -> f64 {
        self.lp.unwrap_or(f64::INFINITY)
    }

    pub fn is_rigid(&self) -> bool {
        self.lp.is_none()
    }
}

fn unit_bonds(positions: &[Vec3], chain: &Chain) -> Vec<Vec3> {
    let n = chain.ids.len();
    (0..chain.bond_count())
        .map(|k| (positions[chain.ids[(k + 1) % n]] - positions[chain.ids[k]]).normalized())
        .collect()
}

/// Bond-bond orientation correlation `<u_k · u_{k+s}>`, averaged over all
/// bond pairs of every chain and frame. Rings use cyclic separations up to
/// half the ring.
pub fn bond_correlation(frames: &[TrajectoryFrame], chains: &[Chain]) -> Result<Vec<(usize, f64)>> {
    let s_max = chains
        .iter()
        .map(|c| if c.closed { c.bond_count() / 2 } else { c.bond_count().saturating_sub(1) })
        .max()
        .unwrap_or(0);
    if s_max == 0 {
        return Err(Error::InsufficientData {
            what: "beads per chain for bond correlations",
            needed: 3,
            got: chains.iter().map(|c| c.ids.len()).max().unwrap_or(0),
        });
    }
    if frames.is_empty() {
        return Err(Error::InsufficientData {
            what: "frames",
            needed: 1,
            got: 0,
        });
    }
    let mut sums = vec![0.0; s_max + 1];
    let mut counts = vec![0usize; s_max + 1];
    for frame in frames {
        for chain in chains {
            let u = unit_bonds(&frame.positions, chain);
            let m = u.len();
            let chain_smax = if chain.closed { m / 2 } else { m.saturating_sub(1) };
            for s in 1..=chain_smax {
                let pairs = if chain.closed { m } else { m - s };
                for k in 0..pairs {
                    sums[s] += u[k].dot(u[(k + s) % m]);
                }
                counts[s] += pairs;
            }
        }
    }
    Ok((1..=s_max)
        .filter(|&s| counts[s] > 0)
        .map(|s| (s, sums[s] / counts[s] as f64))
        .collect())
}

/// Fits `ln <cos θ(s)> = -s / l_p` through the origin by least squares over
/// the leading separations whose correlation stays at or above
/// [`MIN_CORRELATION`] (`s = 1` is always used when positive).
pub fn fit_persistence(correlation: Vec<(usize, f64)>) -> Result<PersistenceFit> {
    let Some(&(_, c1)) = correlation.first() else {
        return Err(Error::EstimatorUndefined("no bond correlations to fit"));
    };
    if !(c1 > 0.0) {
        return Err(Error::EstimatorUndefined(
            "bond correlation at s = 1 is not positive; persistence length undefined",
        ));
    }
    let mut used = 1;
    while used < correlation.len() && correlation[used].1 >= MIN_CORRELATION {
        used += 1;
    }
    let fit = &correlation[..used];
    let sum_s2: f64 = fit.iter().map(|&(s, _)| (s * s) as f64).sum();
    let sum_s_ln: f64 = fit.iter().map(|&(s, c)| s as f64 * libm::log(c)).sum();
    let fit_range = (fit[0].0, fit[fit.len() - 1].0);
    if !(sum_s_ln < 0.0) || fit.iter().all(|&(_, c)| c >= 1.0 - 1e-12) {
        return Ok(PersistenceFit {
            lp: None,
            correlation,
            fit_range,
            residual: 0.0,
        });
    }
    let lp = -sum_s2 / sum_s_ln;
    let residual = libm::sqrt(
        fit.iter()
            .map(|&(s, c)| {
                let r = libm::log(c) + s as f64 / lp;
                r * r
            })
            .sum::<f64>()
            / fit.len() as f64,
    );
    Ok(PersistenceFit {
        lp: Some(lp),
        correlation,
        fit_range,
        residual,
    })
}

/// Persistence length of `chains` over `frames`.
pub fn persistence_length(frames: &[TrajectoryFrame], chains: &[Chain]) -> Result<PersistenceFit> {
    fit_persistence(bond_correlation(frames, chains)?)
}

/// Centre-of-mass mean squared displacement and the diffusion coefficient
/// obtained from `MSD = 6 D Δt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsdResult {
    /// `(Δt, MSD)` including `Δt = 0`.
    pub curve: Vec<(f64, f64)>,
    pub diffusion: f64,
}

/// MSD of the centre of mass of `ids` over all time origins in `frames`,
/// with `D` from a least-squares fit through the origin over lags up to half
/// the span of `frames`.
pub fn msd_and_diffusion(frames: &[TrajectoryFrame], ids: &[usize], dt: f64) -> Result<MsdResult> {
    if frames.len() < 2 {
        return Err(Error::InsufficientData {
            what: "frames for MSD",
            needed: 2,
            got: frames.len(),
        });
    }
    if ids.is_empty() {
        return Err(Error::InsufficientData {
            what: "beads for MSD",
            needed: 1,
            got: 0,
        });
    }
    let coms: Vec<(u64, Vec3)> = frames
        .iter()
        .map(|f| (f.step, center_of_mass(&f.positions, ids)))
        .collect();
    let mut by_lag: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    by_lag.insert(0, (0.0, coms.len()));
    for (a, &(sa, ca)) in coms.iter().enumerate() {
        for &(sb, cb) in &coms[a + 1..] {
            let e = by_lag.entry(sb - sa).or_insert((0.0, 0));
            e.0 += (cb - ca).norm2();
            e.1 += 1;
        }
    }
    let span = coms[coms.len() - 1].0 - coms[0].0;
    let curve: Vec<(f64, f64)> = by_lag
        .iter()
        .map(|(&lag, &(sum, n))| (lag as f64 * dt, sum / n as f64))
        .collect();
    let (mut num, mut den) = (0.0, 0.0);
    for (&lag, &(sum, n)) in &by_lag {
        if lag == 0 || 2 * lag > span {
            continue;
        }
        let t = lag as f64 * dt;
        num += t * sum / n as f64;
        den += t * t;
    }
    let diffusion = if den > 0.0 { num / (6.0 * den) } else { 0.0 };
    Ok(MsdResult { curve, diffusion })
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        libm::sin(x) / x
    }
}

/// `npts` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, npts: usize) -> Vec<f64> {
    if npts == 1 {
        return vec![lo];
    }
    let (a, b) = (libm::log(lo), libm::log(hi));
    (0..npts)
        .map(|k| libm::exp(a + (b - a) * k as f64 / (npts - 1) as f64))
        .collect()
}

/// Default scattering grid: 64 points from `2π/B` to `2π/0.5`.
pub fn default_q_grid(box_side: f64) -> Vec<f64> {
    let two_pi = 2.0 * core::f64::consts::PI;
    log_grid(two_pi / box_side, two_pi / 0.5, DEFAULT_Q_POINTS)
}

/// `P(q) = <sin(q r_ij) / (q r_ij)>` over all ordered pairs of `ids`
/// including `i = j`, averaged over `frames`.
pub fn form_factor(frames: &[TrajectoryFrame], ids: &[usize], q_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if q_grid.is_empty() {
        return Err(Error::InsufficientData {
            what: "q values",
            needed: 1,
            got: 0,
        });
    }
    if let Some(&q) = q_grid.iter().find(|&&q| !(q > 0.0 && q.is_finite())) {
        return Err(Error::invalid("q", format!("scattering vectors must be positive, got {q}")));
    }
    if ids.is_empty() || frames.is_empty() {
        return Err(Error::InsufficientData {
            what: "beads and frames for P(q)",
            needed: 1,
            got: 0,
        });
    }
    let n = ids.len() as f64;
    let mut acc = vec![0.0; q_grid.len()];
    let mut dists = Vec::with_capacity(ids.len() * (ids.len() - 1) / 2);
    for frame in frames {
        dists.clear();
        for (a, &i) in ids.iter().enumerate() {
            for &j in &ids[a + 1..] {
                dists.push((frame.positions[j] - frame.positions[i]).norm());
            }
        }
        for (k, &q) in q_grid.iter().enumerate() {
            let cross: f64 = dists.iter().map(|&r| sinc(q * r)).sum();
            acc[k] += (n + 2.0 * cross) / (n * n);
        }
    }
    let nf = frames.len() as f64;
    Ok(q_grid.iter().zip(acc).map(|(&q, s)| (q, s / nf)).collect())
}

/// Histogram-normalised pair distance distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDistribution {
    /// `(bin centre, g)`.
    pub bins: Vec<(f64, f64)>,
    /// Raw pair counts summed over frames.
    pub counts: Vec<u64>,
    pub bin_width: f64,
    pub pairs_per_frame: usize,
}

/// g(r) over unordered pairs `i != j` of `ids`: counts per bin divided by
/// (pairs · bin width) and averaged over frames, so `Σ g Δr` is the fraction
/// of pairs closer than the last bin edge. Bins cover `[0, r_max]`.
pub fn rdf(frames: &[TrajectoryFrame], ids: &[usize], bin_width: f64, r_max: f64) -> Result<PairDistribution> {
    if ids.len() < 2 {
        return Err(Error::InsufficientData {
            what: "beads for g(r)",
            needed: 2,
            got: ids.len(),
        });
    }
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::invalid("bin_width", "must be positive"));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::invalid("r_max", "must be positive"));
    }
    if frames.is_empty() {
        return Err(Error::InsufficientData {
            what: "frames for g(r)",
            needed: 1,
            got: 0,
        });
    }
    let nbins = (libm::ceil(r_max / bin_width - 1e-9) as usize).max(1);
    let mut counts = vec![0u64; nbins];
    for frame in frames {
        for (a, &i) in ids.iter().enumerate() {
            for &j in &ids[a + 1..] {
                let r = (frame.positions[j] - frame.positions[i]).norm();
                if r > r_max {
                    continue;
                }
                let k = ((r / bin_width) as usize).min(nbins - 1);
                counts[k] += 1;
            }
        }
    }
    let pairs = ids.len() * (ids.len() - 1) / 2;
    let norm = (pairs * frames.len()) as f64 * bin_width;
    let bins = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| ((k as f64 + 0.5) * bin_width, c as f64 / norm))
        .collect();
    Ok(PairDistribution {
        bins,
        counts,
        bin_width,
        pairs_per_frame: pairs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Integration time step, converting step lags into time.
    pub dt: f64,
    /// Scattering vectors; `None` selects [`default_q_grid`].
    pub q_grid: Option<Vec<f64>>,
    pub rdf_bin_width: f64,
    /// Largest pair distance histogrammed; `None` selects `B/2`.
    pub rdf_r_max: Option<f64>,
    /// Average star l_p and R_ee over all arms instead of arm 0.
    pub average_star_arms: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            dt: 0.01,
            q_grid: None,
            rdf_bin_width: DEFAULT_RDF_BIN,
            rdf_r_max: None,
            average_star_arms: false,
        }
    }
}

/// A per-frame series plus its mean over the analysis window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub values: Vec<(u64, f64)>,
    pub window_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub architecture: Architecture,
    /// First step of the analysis window.
    pub window_start: u64,
    pub window_frames: usize,
    pub rg2: Series,
    /// Absent for rings and dendrimers.
    pub end_to_end: Option<Series>,
    /// Absent for dendrimers.
    pub persistence: Option<PersistenceFit>,
    pub msd: MsdResult,
    pub form_factor: Vec<(f64, f64)>,
    pub rdf: PairDistribution,
}

fn series(frames: &[TrajectoryFrame], window_start: u64, f: impl Fn(&TrajectoryFrame) -> Result<f64>) -> Result<Series> {
    let values = frames
        .iter()
        .map(|fr| Ok((fr.step, f(fr)?)))
        .collect::<Result<Vec<_>>>()?;
    let in_window: Vec<f64> = values.iter().filter(|(s, _)| *s >= window_start).map(|&(_, v)| v).collect();
    let window_mean = in_window.iter().sum::<f64>() / in_window.len() as f64;
    Ok(Series { values, window_mean })
}

/// Runs every applicable estimator on the polymer beads of `traj`.
pub fn analyze(traj: &Trajectory, topology: &Topology, options: &AnalysisOptions) -> Result<ObservableSet> {
    if traj.frames.len() < 2 {
        return Err(Error::InsufficientData {
            what: "trajectory frames",
            needed: 2,
            got: traj.frames.len(),
        });
    }
    let ids: Vec<usize> = traj
        .species
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == Species::Polymer)
        .map(|(i, _)| i)
        .collect();
    if ids.is_empty() {
        return Err(Error::InsufficientData {
            what: "polymer beads",
            needed: 1,
            got: 0,
        });
    }
    let window = analysis_window(&traj.frames);
    let window_start = window[0].step;
    let rules = ApplicabilityMatrix::for_architecture(topology.architecture);
    let chains = ApplicabilityMatrix::chains(topology, options.average_star_arms);

    let rg2 = series(&traj.frames, window_start, |f| radius_of_gyration_sq(&f.positions, &ids))?;
    let end_to_end = if rules.end_to_end {
        Some(series(&traj.frames, window_start, |f| {
            let total: f64 = chains
                .iter()
                .map(|c| end_to_end_distance(&f.positions, &c.ids))
                .sum::<Result<f64>>()?;
            Ok(total / chains.len() as f64)
        })?)
    } else {
        None
    };
    let persistence = if rules.persistence_length {
        Some(persistence_length(window, &chains)?)
    } else {
        None
    };
    let msd = msd_and_diffusion(window, &ids, options.dt)?;
    let q_grid = options
        .q_grid
        .clone()
        .unwrap_or_else(|| default_q_grid(traj.sim_box.side()));
    let form_factor = form_factor(window, &ids, &q_grid)?;
    let half_box = 0.5 * traj.sim_box.side();
    let r_max = options.rdf_r_max.unwrap_or(half_box);
    if r_max > half_box {
        return Err(Error::invalid("r_max", format!("must not exceed B/2 = {half_box}")));
    }
    let rdf = rdf(window, &ids, options.rdf_bin_width, r_max)?;
    Ok(ObservableSet {
        architecture: topology.architecture,
        window_start,
        window_frames: window.len(),
        rg2,
        end_to_end,
        persistence,
        msd,
        form_factor,
        rdf,
    })
}
