//! Initial polymer + solvent configurations for the five architectures.
//!
//! Chains are grown as self-avoiding random walks with bond length
//! [`BOND_LENGTH`], close to the FENE + LJ equilibrium, and shifted so the
//! polymer's centre of mass sits at the box centre. No two beads end up closer
//! than [`MIN_SEPARATION`]. The same spec and seed always produce the same
//! state, bit for bit.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{
    Architecture, Bead, Bond, Error, InteractionParams, Result, SimBox, Species, SystemState,
    Topology, Vec3,
};

/// Initial bond length.
pub const BOND_LENGTH: f64 = 0.97;
/// Minimum distance between any two generated beads.
pub const MIN_SEPARATION: f64 = 0.9;
/// Highest total number density a generator attempts to fill.
pub const MAX_DENSITY: f64 = 0.85;

const ATTEMPTS_PER_BEAD: usize = 1000;
const GROWTH_RESTARTS: usize = 50;
const SOLVENT_ATTEMPTS_PER_BEAD: usize = 2000;
/// Stream id of the solvent RNG, kept apart from the polymer growth stream.
const SOLVENT_STREAM: u64 = 2;

/// Architecture-specific generator parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "architecture", rename_all = "lowercase")]
pub enum PolymerShape {
    Linear {
        n: usize,
    },
    Ring {
        n: usize,
    },
    Brush {
        backbone: usize,
        grafting_density: f64,
        side_chain: usize,
    },
    Star {
        arm_length: usize,
        arms: usize,
    },
    Dendrimer {
        generations: u32,
        branching: usize,
        spacer: usize,
    },
}

impl PolymerShape {
    pub fn architecture(&self) -> Architecture {
        match self {
            PolymerShape::Linear { .. } => Architecture::Linear,
            PolymerShape::Ring { .. } => Architecture::Ring,
            PolymerShape::Brush { .. } => Architecture::Brush,
            PolymerShape::Star { .. } => Architecture::Star,
            PolymerShape::Dendrimer { .. } => Architecture::Dendrimer,
        }
    }

    /// Number of side chains on a brush, `round(σ_g N_b)`.
    pub fn graft_count(backbone: usize, grafting_density: f64) -> usize {
        libm::round(grafting_density * backbone as f64) as usize
    }

    pub fn polymer_beads(&self) -> usize {
        match *self {
            PolymerShape::Linear { n } | PolymerShape::Ring { n } => n,
            PolymerShape::Brush {
                backbone,
                grafting_density,
                side_chain,
            } => backbone + Self::graft_count(backbone, grafting_density) * side_chain,
            PolymerShape::Star { arm_length, arms } => 1 + arms * arm_length,
            PolymerShape::Dendrimer {
                generations,
                branching,
                spacer,
            } => {
                let mut total = 1usize;
                let mut per_gen = 1usize;
                for _ in 0..generations {
                    per_gen = per_gen.saturating_mul(branching);
                    total = total.saturating_add(per_gen.saturating_mul(spacer));
                }
                total
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PolymerShape::Linear { n } => {
                if n < 1 {
                    return Err(Error::invalid("N", "chain length must be at least 1"));
                }
            }
            PolymerShape::Ring { n } => {
                if n < 3 {
                    return Err(Error::invalid("N", format!("a ring needs at least 3 beads, got {n}")));
                }
            }
            PolymerShape::Brush {
                backbone,
                grafting_density,
                side_chain,
            } => {
                if backbone < 2 {
                    return Err(Error::invalid("N_b", "backbone needs at least 2 beads"));
                }
                if !(0.0..=1.0).contains(&grafting_density) {
                    return Err(Error::invalid(
                        "sigma_g",
                        format!("grafting density must lie in [0, 1], got {grafting_density}"),
                    ));
                }
                if side_chain < 1 {
                    return Err(Error::invalid("N_s", "side chain length must be at least 1"));
                }
            }
            PolymerShape::Star { arm_length, arms } => {
                if arm_length < 1 {
                    return Err(Error::invalid("N_a", "arm length must be at least 1"));
                }
                if arms < 1 {
                    return Err(Error::invalid("m", "need at least one arm"));
                }
            }
            PolymerShape::Dendrimer {
                generations,
                branching,
                spacer,
            } => {
                if generations < 1 {
                    return Err(Error::invalid("G", "need at least one generation"));
                }
                if branching < 2 {
                    return Err(Error::invalid("b", "branching factor must be at least 2"));
                }
                if spacer < 1 {
                    return Err(Error::invalid("N_s", "spacer length must be at least 1"));
                }
            }
        }
        Ok(())
    }
}

/// Full generator input: polymer shape plus box side `B`, solvent number
/// density `n_s` and seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub shape: PolymerShape,
    pub box_side: f64,
    pub solvent_density: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(shape: PolymerShape, box_side: f64, solvent_density: f64, seed: u64) -> Self {
        GeneratorSpec {
            shape,
            box_side,
            solvent_density,
            seed,
        }
    }

    /// `round(n_s B^3)`.
    pub fn solvent_count(&self) -> usize {
        solvent_count(self.solvent_density, self.box_side)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        let sim_box = SimBox::new(self.box_side)?;
        sim_box.check_cutoff(InteractionParams::default().r_cut)?;
        if !(self.solvent_density.is_finite() && self.solvent_density >= 0.0) {
            return Err(Error::invalid(
                "n_s",
                format!("solvent density must be >= 0, got {}", self.solvent_density),
            ));
        }
        match self.shape {
            PolymerShape::Ring { n } => {
                let diameter = BOND_LENGTH / libm::sin(core::f64::consts::PI / n as f64);
                if diameter >= self.box_side {
                    return Err(Error::invalid(
                        "N",
                        format!("ring diameter {diameter:.3} does not fit in box B = {}", self.box_side),
                    ));
                }
            }
            PolymerShape::Star { arm_length, .. } if arm_length as f64 * BOND_LENGTH >= 0.5 * self.box_side => {
                return Err(Error::invalid(
                    "N_a",
                    format!("straight arm of {arm_length} beads exceeds half the box side {}", self.box_side),
                ));
            }
            _ => {}
        }
        let total = self.shape.polymer_beads().saturating_add(self.solvent_count());
        let capacity = (MAX_DENSITY * sim_box.volume()) as usize;
        if total > capacity {
            return Err(Error::invalid(
                "n_s",
                format!("{total} beads exceed the capacity {capacity} of a box with B = {}", self.box_side),
            ));
        }
        Ok(())
    }
}

pub fn solvent_count(density: f64, box_side: f64) -> usize {
    libm::round(density * box_side * box_side * box_side) as usize
}

/// Builds the configuration described by `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<SystemState> {
    spec.validate()?;
    let sim_box = SimBox::new(spec.box_side)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let polymer = match spec.shape {
        PolymerShape::Linear { n } => grow_linear(n, sim_box, &mut rng)?,
        PolymerShape::Ring { n } => place_ring(n, sim_box, &mut rng)?,
        PolymerShape::Brush {
            backbone,
            grafting_density,
            side_chain,
        } => grow_brush(backbone, grafting_density, side_chain, sim_box, &mut rng)?,
        PolymerShape::Star { arm_length, arms } => place_star(arm_length, arms, sim_box, &mut rng)?,
        PolymerShape::Dendrimer {
            generations,
            branching,
            spacer,
        } => grow_dendrimer(generations, branching, spacer, sim_box, &mut rng)?,
    };
    let state = polymer.into_state(sim_box);
    let state = pack_solvent(state, spec.solvent_density, spec.seed)?;
    debug_assert!(state.validate().is_ok());
    Ok(state)
}

pub fn generate_linear(n: usize, box_side: f64, n_s: f64, seed: u64) -> Result<SystemState> {
    generate(&GeneratorSpec::new(PolymerShape::Linear { n }, box_side, n_s, seed))
}

pub fn generate_ring(n: usize, box_side: f64, n_s: f64, seed: u64) -> Result<SystemState> {
    generate(&GeneratorSpec::new(PolymerShape::Ring { n }, box_side, n_s, seed))
}

pub fn generate_brush(
    backbone: usize,
    grafting_density: f64,
    side_chain: usize,
    box_side: f64,
    n_s: f64,
    seed: u64,
) -> Result<SystemState> {
    let shape = PolymerShape::Brush {
        backbone,
        grafting_density,
        side_chain,
    };
    generate(&GeneratorSpec::new(shape, box_side, n_s, seed))
}

pub fn generate_star(arm_length: usize, arms: usize, box_side: f64, n_s: f64, seed: u64) -> Result<SystemState> {
    generate(&GeneratorSpec::new(PolymerShape::Star { arm_length, arms }, box_side, n_s, seed))
}

pub fn generate_dendrimer(
    generations: u32,
    branching: usize,
    spacer: usize,
    box_side: f64,
    n_s: f64,
    seed: u64,
) -> Result<SystemState> {
    let shape = PolymerShape::Dendrimer {
        generations,
        branching,
        spacer,
    };
    generate(&GeneratorSpec::new(shape, box_side, n_s, seed))
}

/// Adds `round(n_s B^3)` solvent beads at uniformly random positions, each
/// at least [`MIN_SEPARATION`] away from every bead already present.
pub fn pack_solvent(mut state: SystemState, n_s: f64, seed: u64) -> Result<SystemState> {
    if !(n_s.is_finite() && n_s >= 0.0) {
        return Err(Error::invalid("n_s", format!("solvent density must be >= 0, got {n_s}")));
    }
    let sim_box = state.sim_box;
    let requested = solvent_count(n_s, sim_box.side());
    if requested == 0 {
        return Ok(state);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SOLVENT_STREAM);

    let mut grid = OccupancyGrid::new(sim_box, MIN_SEPARATION);
    for b in &state.beads {
        grid.insert(b.position);
    }
    let side = sim_box.side();
    let budget = SOLVENT_ATTEMPTS_PER_BEAD.saturating_mul(requested);
    let mut placed = 0;
    let mut attempts = 0;
    while placed < requested {
        if attempts == budget {
            return Err(Error::PackingFailed { placed, requested });
        }
        attempts += 1;
        let p = Vec3::new(
            rng.random::<f64>() * side,
            rng.random::<f64>() * side,
            rng.random::<f64>() * side,
        );
        let (p, _) = sim_box.wrap(p);
        if grid.is_free(p) {
            grid.insert(p);
            let id = state.beads.len();
            state.beads.push(Bead::new(id, Species::Solvent, p, [0; 3]));
            placed += 1;
        }
    }
    Ok(state)
}

/// Uniform hash grid used for overlap rejection during solvent packing.
struct OccupancyGrid {
    sim_box: SimBox,
    min_dist2: f64,
    n: usize,
    cell: f64,
    cells: Vec<Vec<Vec3>>,
    all: Vec<Vec3>,
}

impl OccupancyGrid {
    fn new(sim_box: SimBox, min_dist: f64) -> Self {
        let n = libm::floor(sim_box.side() / min_dist) as usize;
        let n = if n >= 3 { n } else { 0 };
        OccupancyGrid {
            sim_box,
            min_dist2: min_dist * min_dist,
            n,
            cell: if n > 0 { sim_box.side() / n as f64 } else { sim_box.side() },
            cells: vec![Vec::new(); n * n * n],
            all: Vec::new(),
        }
    }

    fn coords(&self, p: Vec3) -> [usize; 3] {
        let n = self.n as isize;
        let c = |x: f64| (libm::floor(x / self.cell) as isize).clamp(0, n - 1) as usize;
        [c(p.x), c(p.y), c(p.z)]
    }

    fn insert(&mut self, p: Vec3) {
        if self.n == 0 {
            self.all.push(p);
            return;
        }
        let [x, y, z] = self.coords(p);
        self.cells[x + self.n * (y + self.n * z)].push(p);
    }

    fn is_free(&self, p: Vec3) -> bool {
        let clear = |q: &Vec3| self.sim_box.minimum_image(*q - p).norm2() >= self.min_dist2;
        if self.n == 0 {
            return self.all.iter().all(clear);
        }
        let n = self.n as isize;
        let [x, y, z] = self.coords(p);
        for dz in -1..=1isize {
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let w = |c: usize, d: isize| ((c as isize + d).rem_euclid(n)) as usize;
                    let idx = w(x, dx) + self.n * (w(y, dy) + self.n * w(z, dz));
                    if !self.cells[idx].iter().all(clear) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Polymer under construction, in unwrapped coordinates.
struct Polymer {
    positions: Vec<Vec3>,
    bonds: Vec<Bond>,
    topology: Topology,
}

impl Polymer {
    fn new(architecture: Architecture) -> Self {
        Polymer {
            positions: Vec::new(),
            bonds: Vec::new(),
            topology: Topology::new(architecture),
        }
    }

    fn into_state(self, sim_box: SimBox) -> SystemState {
        let n = self.positions.len() as f64;
        let com = self.positions.iter().copied().sum::<Vec3>() / n;
        let shift = sim_box.center() - com;
        let beads = self
            .positions
            .iter()
            .enumerate()
            .map(|(id, &p)| {
                let (w, image) = sim_box.wrap(p + shift);
                Bead::new(id, Species::Polymer, w, image)
            })
            .collect();
        SystemState {
            beads,
            bonds: self.bonds,
            topology: self.topology,
            sim_box,
            step: 0,
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// `true` if `p` keeps [`MIN_SEPARATION`] from every placed bead (periodic).
fn clear_of(positions: &[Vec3], p: Vec3, sim_box: SimBox) -> bool {
    let min2 = MIN_SEPARATION * MIN_SEPARATION;
    positions
        .iter()
        .all(|q| sim_box.minimum_image(*q - p).norm2() >= min2)
}

/// Places one bead bonded to `anchor` by a random self-avoiding step.
/// `bias` pulls the step direction towards `outward` (zero for none).
fn grow_bead(
    positions: &[Vec3],
    anchor: Vec3,
    outward: Vec3,
    bias: f64,
    sim_box: SimBox,
    rng: &mut ChaCha8Rng,
) -> Option<Vec3> {
    for _ in 0..ATTEMPTS_PER_BEAD {
        let dir = (random_unit(rng) + outward * bias).normalized();
        if dir.norm2() == 0.0 {
            continue;
        }
        let p = anchor + dir * BOND_LENGTH;
        if clear_of(positions, p, sim_box) {
            return Some(p);
        }
    }
    None
}

/// Appends a chain of `len` beads hanging from `anchor` (or a free chain if
/// `anchor` is `None`) and returns the new ids in order.
fn grow_chain(
    poly: &mut Polymer,
    anchor: Option<usize>,
    len: usize,
    center: Vec3,
    bias: f64,
    sim_box: SimBox,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let mut ids = Vec::with_capacity(len);
    let mut prev = anchor;
    for _ in 0..len {
        let id = poly.positions.len();
        let p = match prev {
            None => center,
            Some(a) => {
                let base = poly.positions[a];
                let outward = (base - center).normalized();
                grow_bead(&poly.positions, base, outward, bias, sim_box, rng).ok_or(Error::GrowthFailed {
                    bead: id,
                    attempts: ATTEMPTS_PER_BEAD,
                })?
            }
        };
        poly.positions.push(p);
        if let Some(a) = prev {
            poly.bonds.push(Bond::new(a, id));
        }
        ids.push(id);
        prev = Some(id);
    }
    Ok(ids)
}

/// Retries a whole growth procedure from scratch until it succeeds.
fn with_restarts(
    rng: &mut ChaCha8Rng,
    mut build: impl FnMut(&mut ChaCha8Rng) -> Result<Polymer>,
) -> Result<Polymer> {
    let mut last = None;
    for _ in 0..GROWTH_RESTARTS {
        match build(rng) {
            Ok(p) => return Ok(p),
            Err(e @ Error::GrowthFailed { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn grow_linear(n: usize, sim_box: SimBox, rng: &mut ChaCha8Rng) -> Result<Polymer> {
    with_restarts(rng, |rng| {
        let mut poly = Polymer::new(Architecture::Linear);
        let ids = grow_chain(&mut poly, None, n, Vec3::ZERO, 0.0, sim_box, rng)?;
        poly.topology.backbone = ids;
        Ok(poly)
    })
}

/// Regular polygon with side [`BOND_LENGTH`] in a randomly oriented plane.
fn place_ring(n: usize, sim_box: SimBox, rng: &mut ChaCha8Rng) -> Result<Polymer> {
    let radius = BOND_LENGTH / (2.0 * libm::sin(core::f64::consts::PI / n as f64));
    if 2.0 * radius >= sim_box.side() {
        return Err(Error::invalid(
            "N",
            format!("ring diameter {:.3} does not fit in box B = {}", 2.0 * radius, sim_box.side()),
        ));
    }
    let e1 = random_unit(rng);
    let mut e2 = random_unit(rng);
    e2 = (e2 - e1 * e1.dot(e2)).normalized();
    if e2.norm2() == 0.0 {
        e2 = e1.cross(Vec3::new(0.0, 0.0, 1.0)).normalized();
    }
    let mut poly = Polymer::new(Architecture::Ring);
    for k in 0..n {
        let phi = 2.0 * core::f64::consts::PI * k as f64 / n as f64;
        poly.positions
            .push(e1 * (radius * libm::cos(phi)) + e2 * (radius * libm::sin(phi)));
        poly.bonds.push(Bond::new(k, (k + 1) % n));
    }
    poly.topology.backbone = (0..n).collect();
    Ok(poly)
}

/// Backbone indices carrying side chains: `floor((k + 0.5) N_b / n_g)`.
pub fn graft_indices(backbone: usize, n_grafts: usize) -> Vec<usize> {
    (0..n_grafts)
        .map(|k| libm::floor((k as f64 + 0.5) * backbone as f64 / n_grafts as f64) as usize)
        .collect()
}

fn grow_brush(
    backbone: usize,
    grafting_density: f64,
    side_chain: usize,
    sim_box: SimBox,
    rng: &mut ChaCha8Rng,
) -> Result<Polymer> {
    let n_g = PolymerShape::graft_count(backbone, grafting_density);
    let grafts = graft_indices(backbone, n_g);
    with_restarts(rng, |rng| {
        let mut poly = Polymer::new(Architecture::Brush);
        let bb = grow_chain(&mut poly, None, backbone, Vec3::ZERO, 0.0, sim_box, rng)?;
        for &g in &grafts {
            // push side chains away from the backbone's local axis
            let prev = poly.positions[bb[g.saturating_sub(1)]];
            let next = poly.positions[bb[(g + 1).min(backbone - 1)]];
            let here = poly.positions[bb[g]];
            let mid = (prev + next) * 0.5;
            let center = if (here - mid).norm2() > 1e-12 { mid } else { here - random_unit(rng) };
            grow_chain(&mut poly, Some(bb[g]), side_chain, center, 1.0, sim_box, rng)?;
        }
        poly.topology.backbone = bb;
        poly.topology.graft_points = grafts.clone();
        Ok(poly)
    })
}

/// Golden-spiral directions, then relaxed by a fixed number of pairwise
/// repulsion sweeps so small sets approach the best-spread arrangement.
fn spread_directions(m: usize) -> Vec<Vec3> {
    let golden = core::f64::consts::PI * (3.0 - libm::sqrt(5.0));
    let mut dirs: Vec<Vec3> = (0..m)
        .map(|k| {
            if m == 1 {
                return Vec3::new(0.0, 0.0, 1.0);
            }
            let z = 1.0 - (2.0 * k as f64 + 1.0) / m as f64;
            let r = libm::sqrt((1.0 - z * z).max(0.0));
            let phi = golden * k as f64;
            Vec3::new(r * libm::cos(phi), r * libm::sin(phi), z)
        })
        .collect();
    let step = 0.5 / m as f64;
    for _ in 0..500 {
        let push: Vec<Vec3> = dirs
            .iter()
            .map(|&a| {
                dirs.iter()
                    .filter(|&&b| b != a)
                    .map(|&b| {
                        let d = a - b;
                        d / (d.norm2() * d.norm())
                    })
                    .sum::<Vec3>()
            })
            .collect();
        for (d, p) in dirs.iter_mut().zip(push) {
            let tangential = p - *d * d.dot(p);
            *d = (*d + tangential * step).normalized();
        }
    }
    dirs
}

fn place_star(arm_length: usize, arms: usize, sim_box: SimBox, rng: &mut ChaCha8Rng) -> Result<Polymer> {
    if arm_length as f64 * BOND_LENGTH >= 0.5 * sim_box.side() {
        return Err(Error::invalid(
            "N_a",
            format!(
                "straight arm of {arm_length} beads exceeds half the box side {}",
                0.5 * sim_box.side()
            ),
        ));
    }
    let dirs = spread_directions(arms);
    with_restarts(rng, |rng| {
        let mut poly = Polymer::new(Architecture::Star);
        poly.positions.push(Vec3::ZERO);
        for dir in &dirs {
            let mut arm = vec![0usize];
            let mut prev = 0usize;
            for _ in 0..arm_length {
                let id = poly.positions.len();
                let straight = poly.positions[prev] + *dir * BOND_LENGTH;
                let p = if clear_of(&poly.positions, straight, sim_box) {
                    straight
                } else {
                    // crowded near the core: random step biased along the arm
                    grow_bead(&poly.positions, poly.positions[prev], *dir, 1.5, sim_box, rng).ok_or(
                        Error::GrowthFailed {
                            bead: id,
                            attempts: ATTEMPTS_PER_BEAD,
                        },
                    )?
                };
                poly.positions.push(p);
                poly.bonds.push(Bond::new(prev, id));
                arm.push(id);
                prev = id;
            }
            poly.topology.arms.push(arm);
        }
        Ok(poly)
    })
}

fn grow_dendrimer(
    generations: u32,
    branching: usize,
    spacer: usize,
    sim_box: SimBox,
    rng: &mut ChaCha8Rng,
) -> Result<Polymer> {
    with_restarts(rng, |rng| {
        let mut poly = Polymer::new(Architecture::Dendrimer);
        poly.positions.push(Vec3::ZERO);
        let mut labels = vec![0u32];
        let mut terminals = vec![0usize];
        for g in 1..=generations {
            let mut next = Vec::with_capacity(terminals.len() * branching);
            for &t in &terminals {
                for _ in 0..branching {
                    let ids = grow_chain(&mut poly, Some(t), spacer, Vec3::ZERO, 1.0, sim_box, rng)?;
                    labels.extend(core::iter::repeat_n(g, ids.len()));
                    next.push(*ids.last().expect("spacer >= 1"));
                }
            }
            terminals = next;
        }
        poly.topology.generations = labels;
        Ok(poly)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimum_image;
    use alloc::collections::VecDeque;

    fn bond_lengths(s: &SystemState) -> Vec<f64> {
        s.bonds
            .iter()
            .map(|b| minimum_image(s.beads[b.j].position - s.beads[b.i].position, s.sim_box).norm())
            .collect()
    }

    fn min_pair_distance(s: &SystemState) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..s.beads.len() {
            for j in (i + 1)..s.beads.len() {
                let d = minimum_image(s.beads[j].position - s.beads[i].position, s.sim_box).norm();
                best = best.min(d);
            }
        }
        best
    }

    fn assert_well_formed(s: &SystemState) {
        s.validate().unwrap();
        for r in bond_lengths(s) {
            assert!(r > 0.8 && r < 1.1, "bond length {r}");
        }
        assert!(min_pair_distance(s) >= MIN_SEPARATION - 1e-9);
    }

    /// Independent bead count: walk the tree level by level.
    fn dendrimer_count_oracle(g: u32, b: usize, ns: usize) -> usize {
        let mut total = 1;
        let mut ends = 1;
        for _ in 0..g {
            ends *= b;
            total += ends * ns;
        }
        total
    }

    fn adjacency(s: &SystemState) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); s.n_beads()];
        for b in &s.bonds {
            adj[b.i].push(b.j);
            adj[b.j].push(b.i);
        }
        adj
    }

    /// A graph is a simple path iff it is connected, has n-1 edges and every
    /// degree is at most 2.
    fn is_path_graph(s: &SystemState) -> bool {
        let n = s.count(Species::Polymer);
        let adj = adjacency(s);
        if s.bonds.len() + 1 != n || adj.iter().take(n).any(|a| a.len() > 2) {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().all(|&x| x)
    }

    #[test]
    fn linear_counts() {
        let s = generate_linear(40, 40.0, 0.0, 1).unwrap();
        assert_eq!((s.n_beads(), s.bonds.len()), (40, 39));
        assert_eq!(s.topology.backbone, (0..40).collect::<Vec<_>>());
        assert_well_formed(&s);

        let s = generate_linear(1, 10.0, 0.0, 1).unwrap();
        assert_eq!((s.n_beads(), s.bonds.len()), (1, 0));

        let s = generate_linear(10, 20.0, 0.2, 5).unwrap();
        assert_eq!(s.count(Species::Polymer), 10);
        assert_eq!(s.count(Species::Solvent), (0.2f64 * 8000.0).round() as usize);
        assert_eq!(s.count(Species::Solvent), 1600);
        assert_well_formed(&s);
    }

    #[test]
    fn ring_counts() {
        let s = generate_ring(10, 20.0, 0.0, 3).unwrap();
        assert_eq!((s.n_beads(), s.bonds.len()), (10, 10));
        assert!(s.bonds.contains(&Bond::new(9, 0)));
        assert_well_formed(&s);

        let s = generate_ring(30, 25.0, 0.3, 4).unwrap();
        assert_eq!(s.count(Species::Polymer), 30);
        assert_eq!(s.bonds.len(), 30);
        assert_eq!(s.count(Species::Solvent), (0.3f64 * 25f64.powi(3)).round() as usize);
        assert_eq!(s.count(Species::Solvent), 4688);
        assert_well_formed(&s);

        assert!(matches!(generate_ring(2, 20.0, 0.0, 1), Err(Error::InvalidParameter { name: "N", .. })));
        assert!(generate_ring(3, 20.0, 0.0, 1).is_ok());
        assert!(generate_ring(40, 10.0, 0.0, 1).is_err());
    }

    #[test]
    fn brush_counts() {
        let s = generate_brush(20, 0.6, 5, 20.0, 0.0, 2).unwrap();
        let n_g = (0.6f64 * 20.0).round() as usize;
        assert_eq!(n_g, 12);
        assert_eq!(s.n_beads(), 20 + n_g * 5);
        assert_eq!((s.n_beads(), s.bonds.len()), (80, 79));
        assert_eq!(s.topology.graft_points.len(), 12);
        assert_eq!(s.topology.backbone.len(), 20);
        assert_well_formed(&s);

        let s = generate_brush(20, 1.0, 5, 20.0, 0.0, 2).unwrap();
        assert_eq!((s.n_beads(), s.bonds.len()), (120, 119));
        assert_eq!(s.topology.graft_points, (0..20).collect::<Vec<_>>());
        assert_well_formed(&s);

        let s = generate_brush(20, 0.0, 5, 20.0, 0.0, 2).unwrap();
        assert_eq!((s.n_beads(), s.bonds.len()), (20, 19));
        assert!(is_path_graph(&s));

        assert!(matches!(
            generate_brush(20, 1.5, 5, 20.0, 0.0, 2),
            Err(Error::InvalidParameter { name: "sigma_g", .. })
        ));
        assert!(generate_brush(20, -0.1, 5, 20.0, 0.0, 2).is_err());
    }

    #[test]
    fn graft_points_evenly_spaced() {
        let g = graft_indices(20, 12);
        assert_eq!(g, vec![0, 2, 4, 5, 7, 9, 10, 12, 14, 15, 17, 19]);
        let g = graft_indices(20, 4);
        assert_eq!(g, vec![2, 7, 12, 17]);
    }

    #[test]
    fn star_counts() {
        let s = generate_star(5, 6, 20.0, 0.0, 1).unwrap();
        assert_eq!((s.n_beads(), s.bonds.len()), (31, 30));
        assert_eq!(s.topology.arms.len(), 6);
        for arm in &s.topology.arms {
            assert_eq!(arm.len(), 6);
            assert_eq!(arm[0], 0);
        }
        assert_well_formed(&s);

        let s = generate_star(3, 12, 20.0, 0.0, 1).unwrap();
        assert_eq!((s.n_beads(), s.bonds.len()), (1 + 12 * 3, 12 * 3));
        assert_eq!((s.n_beads(), s.bonds.len()), (37, 36));
        assert_well_formed(&s);

        let s = generate_star(5, 1, 20.0, 0.0, 1).unwrap();
        assert_eq!(s.n_beads(), 6);
        assert!(is_path_graph(&s));

        assert!(generate_star(11, 3, 20.0, 0.0, 1).is_err());
    }

    #[test]
    fn crowded_star_still_avoids_overlaps() {
        let s = generate_star(8, 12, 20.0, 0.0, 9).unwrap();
        assert_eq!(s.n_beads(), 97);
        assert_well_formed(&s);
        // no room around the core for 30 first-shell beads
        assert!(matches!(generate_star(4, 30, 20.0, 0.0, 9), Err(Error::GrowthFailed { .. })));
    }

    #[test]
    fn star_directions_are_spread() {
        let dirs = spread_directions(6);
        let min_angle = dirs
            .iter()
            .enumerate()
            .flat_map(|(i, a)| dirs[i + 1..].iter().map(move |b| a.dot(*b).acos()))
            .fold(f64::INFINITY, f64::min);
        // octahedron optimum is 90 degrees
        assert!(min_angle > 89.0f64.to_radians(), "{}", min_angle.to_degrees());
        // and the icosahedron for twelve arms, 63.43 degrees
        let dirs = spread_directions(12);
        let min_angle = dirs
            .iter()
            .enumerate()
            .flat_map(|(i, a)| dirs[i + 1..].iter().map(move |b| a.dot(*b).acos()))
            .fold(f64::INFINITY, f64::min);
        assert!(min_angle > 63.0f64.to_radians(), "{}", min_angle.to_degrees());
    }

    #[test]
    fn dendrimer_counts() {
        for (g, b, ns, beads) in [(2, 2, 1, 7), (1, 3, 2, 7), (3, 2, 1, 15)] {
            let s = generate_dendrimer(g, b, ns, 20.0, 0.0, 1).unwrap();
            assert_eq!(s.n_beads(), dendrimer_count_oracle(g, b, ns));
            assert_eq!((s.n_beads(), s.bonds.len()), (beads, beads - 1));
            assert_eq!(s.topology.generations.len(), beads);
            assert_eq!(s.topology.generations[0], 0);
            assert_eq!(*s.topology.generations.iter().max().unwrap(), g);
            assert_well_formed(&s);
        }
        let s = generate_dendrimer(3, 3, 2, 20.0, 0.0, 1).unwrap();
        assert_eq!(s.n_beads(), dendrimer_count_oracle(3, 3, 2));
        assert_well_formed(&s);
        // junction degrees: the core has b branches, internal terminals b + 1
        let adj = adjacency(&s);
        assert_eq!(adj[0].len(), 3);
    }

    #[test]
    fn solvent_packing() {
        let base = generate_linear(10, 20.0, 0.0, 1).unwrap();
        let same = pack_solvent(base.clone(), 0.0, 1).unwrap();
        assert_eq!(same, base);
        let s = pack_solvent(base.clone(), 0.2, 1).unwrap();
        assert_eq!(s.count(Species::Solvent), 1600);
        let s = pack_solvent(base, 0.3, 1).unwrap();
        assert_eq!(s.count(Species::Solvent), 2400);
        assert_well_formed(&s);
        assert!(s.beads.iter().filter(|b| b.species == Species::Solvent).all(|b| b.image == [0; 3]));
    }

    #[test]
    fn overfull_box_is_rejected() {
        let base = generate_linear(10, 6.0, 0.0, 1).unwrap();
        assert!(matches!(pack_solvent(base, 1.5, 1), Err(Error::PackingFailed { .. })));
        assert!(generate_linear(10, 6.0, 1.0, 1).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let a = generate_brush(20, 0.6, 5, 20.0, 0.3, 42).unwrap();
        let b = generate_brush(20, 0.6, 5, 20.0, 0.3, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_brush(20, 0.6, 5, 20.0, 0.3, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn small_box_rejected() {
        assert!(matches!(generate_linear(5, 4.0, 0.0, 1), Err(Error::InvalidParameter { name: "B", .. })));
    }

    #[test]
    fn polymer_is_centred() {
        let s = generate_linear(30, 40.0, 0.0, 8).unwrap();
        let pos = s.unwrapped_positions();
        let com = pos.iter().copied().sum::<Vec3>() / pos.len() as f64;
        assert!((com - s.sim_box.center()).norm() < 1e-9);
    }
}
