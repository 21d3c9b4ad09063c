//! Kremer–Grest style force field: species-resolved truncated-shifted
//! Lennard-Jones between non-bonded pairs and FENE (with its purely repulsive
//! LJ core) between bonded pairs.
//!
//! Directly bonded beads interact through the FENE potential only; the plain
//! LJ term is not applied to them a second time.

mod cell_list;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use cell_list::CellList;

use crate::{Error, InteractionParams, Result, SimBox, Species, SystemState, Vec3};

/// `2^{1/6}`, the minimum of the LJ potential in units of `σ`.
pub const LJ_MINIMUM: f64 = 1.122_462_048_309_373;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeneParams {
    pub k: f64,
    pub r0: f64,
    pub eps: f64,
    pub sigma: f64,
}

impl Default for FeneParams {
    fn default() -> Self {
        FeneParams {
            k: 30.0,
            r0: 1.5,
            eps: 1.0,
            sigma: 1.0,
        }
    }
}

impl FeneParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::invalid("K", "FENE spring constant must be positive"));
        }
        if !(self.r0.is_finite() && self.r0 > self.sigma) {
            return Err(Error::invalid("R0", "FENE maximum extension must exceed sigma"));
        }
        Ok(())
    }
}

/// Truncated-shifted LJ energy and `-dU/dr` at distance `r`.
///
/// Zero beyond `r_cut`; at `r_cut` the energy is exactly zero and the force
/// is reported as zero as well.
pub fn lj_pair(r: f64, eps: f64, sigma: f64, r_cut: f64) -> Result<(f64, f64)> {
    if r <= 0.0 {
        return Err(Error::ZeroDistance);
    }
    if r >= r_cut {
        return Ok((0.0, 0.0));
    }
    let (u, f_over_r) = lj_r2(r * r, eps, sigma * sigma, lj_shift(sigma, r_cut));
    Ok((u, f_over_r * r))
}

/// `(σ/r_c)^12 - (σ/r_c)^6`, subtracted so that `U(r_c) = 0`.
#[inline]
fn lj_shift(sigma: f64, r_cut: f64) -> f64 {
    let s6 = libm::pow(sigma / r_cut, 6.0);
    s6 * s6 - s6
}

/// Energy and `-(dU/dr)/r` from the squared distance.
#[inline(always)]
fn lj_r2(r2: f64, eps: f64, sigma2: f64, shift: f64) -> (f64, f64) {
    let sr2 = sigma2 / r2;
    let sr6 = sr2 * sr2 * sr2;
    let sr12 = sr6 * sr6;
    let u = 4.0 * eps * (sr12 - sr6 - shift);
    let f_over_r = 24.0 * eps * (2.0 * sr12 - sr6) / r2;
    (u, f_over_r)
}

/// FENE bond energy and `-dU/dr`. The LJ `+ε` core only acts for
/// `r <= 2^{1/6} σ`.
pub fn fene_pair(r: f64, p: &FeneParams) -> Result<(f64, f64)> {
    if r <= 0.0 {
        return Err(Error::ZeroDistance);
    }
    if r >= p.r0 {
        return Err(Error::BeyondMaxExtension { r, r0: p.r0 });
    }
    let (u, f_over_r) = fene_r2(r * r, p);
    Ok((u, f_over_r * r))
}

#[inline(always)]
fn fene_r2(r2: f64, p: &FeneParams) -> (f64, f64) {
    let r0sq = p.r0 * p.r0;
    let x = 1.0 - r2 / r0sq;
    let mut u = -0.5 * p.k * r0sq * libm::log(x);
    let mut f_over_r = -p.k / x;
    let sigma2 = p.sigma * p.sigma;
    if r2 <= LJ_MINIMUM * LJ_MINIMUM * sigma2 {
        let sr2 = sigma2 / r2;
        let sr6 = sr2 * sr2 * sr2;
        u += 4.0 * p.eps * (sr6 * sr6 - sr6) + p.eps;
        f_over_r += 24.0 * p.eps * (2.0 * sr6 * sr6 - sr6) / r2;
    }
    (u, f_over_r)
}

/// Per-bead forces plus the total potential energy.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ForceAccumulator {
    pub forces: Vec<Vec3>,
    pub potential_energy: f64,
    pub pair_energy: f64,
    pub bond_energy: f64,
}

impl ForceAccumulator {
    pub fn zeroed(n: usize) -> Self {
        ForceAccumulator {
            forces: vec![Vec3::ZERO; n],
            ..Default::default()
        }
    }

    fn reset(&mut self, n: usize) {
        self.forces.clear();
        self.forces.resize(n, Vec3::ZERO);
        self.potential_energy = 0.0;
        self.pair_energy = 0.0;
        self.bond_energy = 0.0;
    }

    pub fn net_force(&self) -> Vec3 {
        self.forces.iter().copied().sum()
    }
}

/// Precomputed species-pair tables.
#[derive(Clone, Copy, Debug)]
struct PairTable {
    eps: [[f64; 2]; 2],
    sigma2: f64,
    shift: f64,
    r_cut2: f64,
}

impl PairTable {
    fn new(params: &InteractionParams) -> Self {
        PairTable {
            eps: [
                [params.eps_pp, params.eps_sp],
                [params.eps_sp, params.eps_ss],
            ],
            sigma2: params.sigma * params.sigma,
            shift: lj_shift(params.sigma, params.r_cut),
            r_cut2: params.r_cut * params.r_cut,
        }
    }
}

#[inline(always)]
fn species_index(s: Species) -> usize {
    match s {
        Species::Polymer => 0,
        Species::Solvent => 1,
    }
}

/// Sorted bonded partners of every bead.
fn exclusion_lists(state: &SystemState) -> Vec<Vec<usize>> {
    let mut ex = vec![Vec::new(); state.beads.len()];
    for b in &state.bonds {
        ex[b.i].push(b.j);
        ex[b.j].push(b.i);
    }
    for e in &mut ex {
        e.sort_unstable();
    }
    ex
}

#[inline(always)]
fn accumulate_pair(
    i: usize,
    j: usize,
    d: Vec3,
    r2: f64,
    table: &PairTable,
    kinds: &[u8],
    acc: &mut ForceAccumulator,
) -> Result<()> {
    if r2 == 0.0 {
        return Err(Error::Overlap { i, j, r: 0.0 });
    }
    let eps = table.eps[kinds[i] as usize][kinds[j] as usize];
    let (u, f_over_r) = lj_r2(r2, eps, table.sigma2, table.shift);
    let f = d * f_over_r;
    acc.forces[i] -= f;
    acc.forces[j] += f;
    acc.pair_energy += u;
    Ok(())
}

fn accumulate_bonds(state: &SystemState, fene: &FeneParams, acc: &mut ForceAccumulator) -> Result<()> {
    let b = state.sim_box;
    for bond in &state.bonds {
        let (i, j) = (bond.i, bond.j);
        let d = b.minimum_image_wrapped(state.beads[j].position - state.beads[i].position);
        let r2 = d.norm2();
        if r2 == 0.0 {
            return Err(Error::Overlap { i, j, r: 0.0 });
        }
        if r2 >= fene.r0 * fene.r0 {
            return Err(Error::BondOverstretch {
                i,
                j,
                r: libm::sqrt(r2),
                r0: fene.r0,
            });
        }
        let (u, f_over_r) = fene_r2(r2, fene);
        let f = d * f_over_r;
        acc.forces[i] -= f;
        acc.forces[j] += f;
        acc.bond_energy += u;
    }
    Ok(())
}

fn species_codes(state: &SystemState) -> Vec<u8> {
    state
        .beads
        .iter()
        .map(|b| species_index(b.species) as u8)
        .collect()
}

fn positions(state: &SystemState) -> Vec<Vec3> {
    state.beads.iter().map(|b| b.position).collect()
}

/// Forces and energy of `state` using a freshly built cell list.
pub fn compute_forces(
    state: &SystemState,
    params: &InteractionParams,
    fene: &FeneParams,
) -> Result<ForceAccumulator> {
    let cells = CellList::build(&positions(state), state.sim_box, params.r_cut);
    compute_forces_with(state, params, fene, |f| cells.for_each_pair(f))
}

/// Reference evaluation over all `n(n-1)/2` pairs.
pub fn compute_forces_all_pairs(
    state: &SystemState,
    params: &InteractionParams,
    fene: &FeneParams,
) -> Result<ForceAccumulator> {
    let n = state.beads.len();
    compute_forces_with(state, params, fene, |f| {
        for i in 0..n {
            for j in (i + 1)..n {
                f(i, j);
            }
        }
    })
}

fn compute_forces_with(
    state: &SystemState,
    params: &InteractionParams,
    fene: &FeneParams,
    pairs: impl FnOnce(&mut dyn FnMut(usize, usize)),
) -> Result<ForceAccumulator> {
    let n = state.beads.len();
    let table = PairTable::new(params);
    let kinds = species_codes(state);
    let ex = exclusion_lists(state);
    let b = state.sim_box;
    let mut acc = ForceAccumulator::zeroed(n);
    let mut err = None;
    pairs(&mut |i, j| {
        if err.is_some() {
            return;
        }
        let d = b.minimum_image_wrapped(state.beads[j].position - state.beads[i].position);
        let r2 = d.norm2();
        if r2 >= table.r_cut2 || ex[i].binary_search(&j).is_ok() {
            return;
        }
        if let Err(e) = accumulate_pair(i, j, d, r2, &table, &kinds, &mut acc) {
            err = Some(e);
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    accumulate_bonds(state, fene, &mut acc)?;
    acc.potential_energy = acc.pair_energy + acc.bond_energy;
    Ok(acc)
}

/// Verlet neighbour list with a skin, built through the cell list.
#[derive(Clone, Debug)]
struct NeighborList {
    /// Partners `j > i` of bead `i` are `partners[starts[i]..starts[i + 1]]`,
    /// in increasing order.
    starts: Vec<u32>,
    partners: Vec<u32>,
    reference: Vec<Vec3>,
}

/// Reusable force evaluator for the integration loop.
///
/// Keeps the exclusion lists and a skin-padded neighbour list between calls;
/// the list is rebuilt once any bead has moved more than half the skin since
/// the last build, so the set of pairs inside `r_cut` is always complete.
#[derive(Clone, Debug)]
pub struct ForceField {
    pub params: InteractionParams,
    pub fene: FeneParams,
    skin: f64,
    table: PairTable,
    kinds: Vec<u8>,
    exclusions: Vec<Vec<usize>>,
    list: Option<NeighborList>,
    rebuilds: u64,
    scratch: Vec<Vec3>,
}

impl ForceField {
    pub const DEFAULT_SKIN: f64 = 0.3;

    pub fn new(params: InteractionParams, fene: FeneParams) -> Self {
        Self::with_skin(params, fene, Self::DEFAULT_SKIN)
    }

    pub fn with_skin(params: InteractionParams, fene: FeneParams, skin: f64) -> Self {
        ForceField {
            params,
            fene,
            skin,
            table: PairTable::new(&params),
            kinds: Vec::new(),
            exclusions: Vec::new(),
            list: None,
            rebuilds: 0,
            scratch: Vec::new(),
        }
    }

    /// Number of neighbour-list builds so far.
    pub fn rebuilds(&self) -> u64 {
        self.rebuilds
    }

    /// Forces the next evaluation to rebuild all cached structures.
    pub fn invalidate(&mut self) {
        self.list = None;
        self.kinds.clear();
    }

    fn needs_rebuild(&self, state: &SystemState) -> bool {
        let Some(list) = &self.list else { return true };
        if list.reference.len() != state.beads.len() {
            return true;
        }
        let limit = 0.25 * self.skin * self.skin;
        state.beads.iter().zip(&list.reference).any(|(b, r)| {
            (state.sim_box.unwrap(b.position, b.image) - *r).norm2() > limit
        })
    }

    fn rebuild(&mut self, state: &SystemState) {
        if self.kinds.len() != state.beads.len() {
            self.kinds = species_codes(state);
            self.exclusions = exclusion_lists(state);
        }
        let b = state.sim_box;
        let reach = self.params.r_cut + self.skin;
        let reach2 = reach * reach;
        let pos = positions(state);
        let cells = CellList::build(&pos, b, reach);
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let ex = &self.exclusions;
        cells.for_each_pair(|i, j| {
            let (i, j) = if i < j { (i, j) } else { (j, i) };
            if b.minimum_image_wrapped(pos[j] - pos[i]).norm2() <= reach2 && ex[i].binary_search(&j).is_err() {
                pairs.push((i as u32, j as u32));
            }
        });
        // (i, j) order makes the force sum independent of cell layout and of
        // when the list was built
        let n = pos.len();
        let mut starts = vec![0u32; n + 1];
        for &(i, _) in &pairs {
            starts[i as usize + 1] += 1;
        }
        for i in 0..n {
            starts[i + 1] += starts[i];
        }
        let mut fill = starts.clone();
        let mut partners = vec![0u32; pairs.len()];
        for &(i, j) in &pairs {
            partners[fill[i as usize] as usize] = j;
            fill[i as usize] += 1;
        }
        for i in 0..n {
            partners[starts[i] as usize..starts[i + 1] as usize].sort_unstable();
        }
        self.list = Some(NeighborList {
            starts,
            partners,
            reference: state.unwrapped_positions(),
        });
        self.rebuilds += 1;
    }

    pub fn compute(&mut self, state: &SystemState, acc: &mut ForceAccumulator) -> Result<()> {
        if self.needs_rebuild(state) {
            self.rebuild(state);
        }
        let n = state.beads.len();
        acc.reset(n);
        let b = state.sim_box;
        let table = self.table;
        let list = self.list.as_ref().expect("neighbour list built above");
        self.scratch.clear();
        self.scratch.extend(state.beads.iter().map(|b| b.position));
        let pos = &self.scratch;
        for i in 0..n {
            let pi = pos[i];
            let range = list.starts[i] as usize..list.starts[i + 1] as usize;
            for &j in &list.partners[range] {
                let j = j as usize;
                let d = b.minimum_image_wrapped(pos[j] - pi);
                let r2 = d.norm2();
                if r2 >= table.r_cut2 {
                    continue;
                }
                accumulate_pair(i, j, d, r2, &table, &self.kinds, acc)?;
            }
        }
        accumulate_bonds(state, &self.fene, acc)?;
        acc.potential_energy = acc.pair_energy + acc.bond_energy;
        Ok(())
    }
}

/// Checks that a box can host the cutoff under the minimum-image convention.
pub fn check_box(sim_box: SimBox, params: &InteractionParams) -> Result<()> {
    sim_box.check_cutoff(params.r_cut)
}
