//! Domain types shared by every stage: the periodic box, beads, bonds, the
//! polymer topology annotations and the parameter sets for interactions,
//! thermostats and runs.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Cubic periodic simulation box `[0, side)^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimBox {
    side: f64,
}

impl SimBox {
    pub fn new(side: f64) -> Result<Self> {
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::invalid("B", format!("box side must be positive, got {side}")));
        }
        Ok(SimBox { side })
    }

    #[inline]
    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn volume(&self) -> f64 {
        self.side * self.side * self.side
    }

    pub fn center(&self) -> Vec3 {
        Vec3::splat(0.5 * self.side)
    }

    /// The minimum-image convention requires `B >= 2 r_cut`.
    pub fn check_cutoff(&self, r_cut: f64) -> Result<()> {
        if self.side < 2.0 * r_cut {
            return Err(Error::invalid(
                "B",
                format!("box side {} is smaller than twice the cutoff {}", self.side, r_cut),
            ));
        }
        Ok(())
    }

    /// Wraps `x` into `[0, B)` and returns how many box lengths were removed.
    #[inline]
    pub fn wrap_coord(&self, x: f64) -> (f64, i32) {
        let b = self.side;
        let shift = libm::floor(x / b);
        let mut w = x - shift * b;
        let mut image = shift as i32;
        if w >= b {
            w -= b;
            image += 1;
        }
        if w < 0.0 {
            w += b;
            image -= 1;
        }
        // x slightly below zero can round up to exactly b in the line above
        if w >= b {
            w = 0.0;
            image += 1;
        }
        (w, image)
    }

    /// Wraps a position, returning the wrapped point and the image shift.
    pub fn wrap(&self, p: Vec3) -> (Vec3, [i32; 3]) {
        let (x, ix) = self.wrap_coord(p.x);
        let (y, iy) = self.wrap_coord(p.y);
        let (z, iz) = self.wrap_coord(p.z);
        (Vec3::new(x, y, z), [ix, iy, iz])
    }

    /// Reconstructs an unwrapped coordinate from a wrapped one and its image.
    #[inline]
    pub fn unwrap(&self, p: Vec3, image: [i32; 3]) -> Vec3 {
        Vec3::new(
            p.x + image[0] as f64 * self.side,
            p.y + image[1] as f64 * self.side,
            p.z + image[2] as f64 * self.side,
        )
    }

    #[inline]
    pub fn minimum_image(&self, d: Vec3) -> Vec3 {
        minimum_image(d, *self)
    }

    /// [`SimBox::minimum_image`] for the difference of two wrapped
    /// positions, where every component already lies in `(-B, B)`.
    #[inline(always)]
    pub fn minimum_image_wrapped(&self, d: Vec3) -> Vec3 {
        let b = self.side;
        let half = 0.5 * b;
        d.map(|c| {
            if c > half {
                c - b
            } else if c <= -half {
                c + b
            } else {
                c
            }
        })
    }
}

/// Nearest periodic copy of displacement `d`; every component ends up in
/// `(-B/2, B/2]`.
#[inline]
pub fn minimum_image(d: Vec3, sim_box: SimBox) -> Vec3 {
    let b = sim_box.side;
    let half = 0.5 * b;
    d.map(|c| {
        let mut r = c - b * libm::round(c / b);
        if r <= -half {
            r += b;
        } else if r > half {
            r -= b;
        }
        r
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Species {
    Polymer,
    Solvent,
}

impl Species {
    /// LAMMPS atom type: 1 for polymer, 2 for solvent.
    pub fn atom_type(self) -> u32 {
        match self {
            Species::Polymer => 1,
            Species::Solvent => 2,
        }
    }

    pub fn from_atom_type(t: u32) -> Option<Species> {
        match t {
            1 => Some(Species::Polymer),
            2 => Some(Species::Solvent),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bead {
    pub id: usize,
    pub species: Species,
    /// Wrapped position in `[0, B)^3`.
    pub position: Vec3,
    /// Number of box lengths crossed along each axis.
    pub image: [i32; 3],
    pub velocity: Vec3,
    pub mass: f64,
}

impl Bead {
    pub fn new(id: usize, species: Species, position: Vec3, image: [i32; 3]) -> Self {
        Bead {
            id,
            species,
            position,
            image,
            velocity: Vec3::ZERO,
            mass: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
}

impl Bond {
    pub fn new(i: usize, j: usize) -> Self {
        Bond { i, j }
    }

    /// `(min, max)` of the endpoints.
    pub fn key(&self) -> (usize, usize) {
        if self.i < self.j {
            (self.i, self.j)
        } else {
            (self.j, self.i)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Linear,
    Ring,
    Brush,
    Star,
    Dendrimer,
}

impl Architecture {
    pub const ALL: [Architecture; 5] = [
        Architecture::Linear,
        Architecture::Ring,
        Architecture::Brush,
        Architecture::Star,
        Architecture::Dendrimer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Linear => "linear",
            Architecture::Ring => "ring",
            Architecture::Brush => "brush",
            Architecture::Star => "star",
            Architecture::Dendrimer => "dendrimer",
        }
    }

    pub fn from_name(s: &str) -> Option<Architecture> {
        Architecture::ALL.into_iter().find(|a| a.name() == s)
    }

    /// Every architecture except `Ring` is a tree.
    pub fn is_tree(self) -> bool {
        !matches!(self, Architecture::Ring)
    }
}

/// Structural annotations that the bond list alone does not carry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub architecture: Architecture,
    /// Ordered chain for linear, ring and brush polymers.
    #[serde(default)]
    pub backbone: Vec<usize>,
    /// Star arms, each ordered outwards and starting at the core bead.
    #[serde(default)]
    pub arms: Vec<Vec<usize>>,
    /// Generation label per polymer bead (dendrimers only, core = 0).
    #[serde(default)]
    pub generations: Vec<u32>,
    /// Backbone beads carrying a side chain (brushes only).
    #[serde(default)]
    pub graft_points: Vec<usize>,
}

impl Topology {
    pub fn new(architecture: Architecture) -> Self {
        Topology {
            architecture,
            backbone: Vec::new(),
            arms: Vec::new(),
            generations: Vec::new(),
            graft_points: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub beads: Vec<Bead>,
    pub bonds: Vec<Bond>,
    pub topology: Topology,
    pub sim_box: SimBox,
    pub step: u64,
}

impl SystemState {
    pub fn n_beads(&self) -> usize {
        self.beads.len()
    }

    pub fn polymer_ids(&self) -> Vec<usize> {
        self.beads
            .iter()
            .filter(|b| b.species == Species::Polymer)
            .map(|b| b.id)
            .collect()
    }

    pub fn count(&self, species: Species) -> usize {
        self.beads.iter().filter(|b| b.species == species).count()
    }

    pub fn unwrapped_positions(&self) -> Vec<Vec3> {
        self.beads
            .iter()
            .map(|b| self.sim_box.unwrap(b.position, b.image))
            .collect()
    }

    pub fn species(&self) -> Vec<Species> {
        self.beads.iter().map(|b| b.species).collect()
    }

    /// Checks the structural invariants: dense ids, wrapped positions, bonds
    /// only between distinct polymer beads without duplicates, the bond count
    /// rule for trees and rings, and that consecutive entries of every ordered
    /// topology list are bonded.
    pub fn validate(&self) -> Result<()> {
        let n = self.beads.len();
        let side = self.sim_box.side();
        for (k, b) in self.beads.iter().enumerate() {
            if b.id != k {
                return Err(Error::InvalidState(format!("bead at index {k} has id {}", b.id)));
            }
            if !b.position.is_finite() || !b.velocity.is_finite() {
                return Err(Error::InvalidState(format!("bead {k} has non-finite coordinates")));
            }
            for c in b.position.to_array() {
                if !(0.0..side).contains(&c) {
                    return Err(Error::InvalidState(format!(
                        "bead {k} position component {c} outside [0, {side})"
                    )));
                }
            }
        }
        let mut keys: Vec<(usize, usize)> = Vec::with_capacity(self.bonds.len());
        for bond in &self.bonds {
            if bond.i == bond.j || bond.i >= n || bond.j >= n {
                return Err(Error::InvalidState(format!("invalid bond {}-{}", bond.i, bond.j)));
            }
            if self.beads[bond.i].species != Species::Polymer
                || self.beads[bond.j].species != Species::Polymer
            {
                return Err(Error::InvalidState(format!(
                    "bond {}-{} touches a solvent bead",
                    bond.i, bond.j
                )));
            }
            keys.push(bond.key());
        }
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidState("duplicate bond".into()));
        }

        let n_poly = self.count(Species::Polymer);
        let expected = if self.topology.architecture.is_tree() {
            n_poly.saturating_sub(1)
        } else {
            n_poly
        };
        if self.bonds.len() != expected {
            return Err(Error::InvalidState(format!(
                "{} polymer beads with {:?} topology need {} bonds, found {}",
                n_poly,
                self.topology.architecture,
                expected,
                self.bonds.len()
            )));
        }

        let bonded = |a: usize, b: usize| {
            let k = if a < b { (a, b) } else { (b, a) };
            keys.binary_search(&k).is_ok()
        };
        let check_chain = |chain: &[usize], what: &str| -> Result<()> {
            let mut seen: Vec<usize> = chain.to_vec();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidState(format!("{what} contains a repeated bead")));
            }
            if let Some(&bad) = chain.iter().find(|&&id| id >= n) {
                return Err(Error::InvalidState(format!("{what} references bead {bad}")));
            }
            for w in chain.windows(2) {
                if !bonded(w[0], w[1]) {
                    return Err(Error::InvalidState(format!(
                        "{what}: consecutive beads {} and {} are not bonded",
                        w[0], w[1]
                    )));
                }
            }
            Ok(())
        };
        check_chain(&self.topology.backbone, "backbone")?;
        for arm in &self.topology.arms {
            check_chain(arm, "arm")?;
        }
        Ok(())
    }
}

/// Σ m v² / g with `g = 3 n` degrees of freedom and `k_B = 1`.
pub fn kinetic_temperature(state: &SystemState) -> Result<f64> {
    if state.beads.is_empty() {
        return Err(Error::EmptySystem);
    }
    let twice_ke: f64 = state
        .beads
        .iter()
        .map(|b| b.mass * b.velocity.norm2())
        .sum();
    Ok(twice_ke / (3 * state.beads.len()) as f64)
}

/// Species-resolved Lennard-Jones parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionParams {
    pub eps_pp: f64,
    pub eps_ss: f64,
    pub eps_sp: f64,
    pub sigma: f64,
    pub r_cut: f64,
}

impl Default for InteractionParams {
    fn default() -> Self {
        InteractionParams {
            eps_pp: 1.0,
            eps_ss: 1.0,
            eps_sp: 1.0,
            sigma: 1.0,
            r_cut: 2.5,
        }
    }
}

impl InteractionParams {
    pub fn new(eps_pp: f64, eps_ss: f64, eps_sp: f64) -> Self {
        InteractionParams {
            eps_pp,
            eps_ss,
            eps_sp,
            ..Default::default()
        }
    }

    #[inline]
    pub fn epsilon(&self, a: Species, b: Species) -> f64 {
        match (a, b) {
            (Species::Polymer, Species::Polymer) => self.eps_pp,
            (Species::Solvent, Species::Solvent) => self.eps_ss,
            _ => self.eps_sp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eps_pp", self.eps_pp),
            ("eps_ss", self.eps_ss),
            ("eps_sp", self.eps_sp),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid("sigma", "must be positive"));
        }
        if !(self.r_cut.is_finite() && self.r_cut > 0.0) {
            return Err(Error::invalid("r_cut", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ThermostatSpec {
    Langevin { gamma: f64, temperature: f64 },
    /// `q = None` selects the default thermostat mass `0.1 g`.
    NoseHoover { temperature: f64, q: Option<f64> },
}

impl ThermostatSpec {
    pub fn langevin() -> Self {
        ThermostatSpec::Langevin {
            gamma: 1.0,
            temperature: 1.0,
        }
    }

    pub fn nose_hoover() -> Self {
        ThermostatSpec::NoseHoover {
            temperature: 1.0,
            q: None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ThermostatSpec::Langevin { .. } => "Langevin",
            ThermostatSpec::NoseHoover { .. } => "Nose-Hoover",
        }
    }

    pub fn temperature(&self) -> f64 {
        match *self {
            ThermostatSpec::Langevin { temperature, .. }
            | ThermostatSpec::NoseHoover { temperature, .. } => temperature,
        }
    }

    /// Nosé–Hoover thermostat mass for `dof` degrees of freedom.
    pub fn nose_hoover_mass(&self, dof: usize) -> Option<f64> {
        match *self {
            ThermostatSpec::NoseHoover { q, .. } => Some(q.unwrap_or(0.1 * dof as f64)),
            ThermostatSpec::Langevin { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.temperature();
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::invalid("T", format!("temperature must be positive, got {t}")));
        }
        match *self {
            ThermostatSpec::Langevin { gamma, .. } => {
                if !(gamma.is_finite() && gamma > 0.0) {
                    return Err(Error::invalid("gamma", format!("must be positive, got {gamma}")));
                }
            }
            ThermostatSpec::NoseHoover { q: Some(q), .. } => {
                if !(q.is_finite() && q > 0.0) {
                    return Err(Error::invalid("Q", format!("must be positive, got {q}")));
                }
            }
            ThermostatSpec::NoseHoover { q: None, .. } => {}
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub steps: u64,
    pub dt: f64,
    pub dump_every: u64,
    pub seed: u64,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            steps: 10_000,
            dt: 0.01,
            dump_every: 100,
            seed: 0,
        }
    }
}

impl RunSpec {
    pub fn new(steps: u64, seed: u64) -> Self {
        RunSpec {
            steps,
            seed,
            ..Default::default()
        }
    }

    /// `steps = 0` is accepted here (it yields a single frame); the CLI
    /// requires a positive step count.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.dump_every == 0 {
            return Err(Error::invalid("dump_every", "must be positive"));
        }
        Ok(())
    }
}
