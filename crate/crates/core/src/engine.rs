//! Time integration: velocity Verlet with a Langevin or a Nosé–Hoover
//! thermostat, trajectory recording and run continuation.
//!
//! The Langevin friction and noise are folded into the force used by the
//! second half-kick, `F = F_c - γ m v + R` with
//! `R ~ sqrt(2 m γ k_B T / dt) N(0, 1)` per component. The Nosé–Hoover
//! thermostat is a single friction variable integrated by half-step
//! splitting around the velocity Verlet core.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::forcefield::{FeneParams, ForceAccumulator, ForceField};
use crate::{
    kinetic_temperature, Error, InteractionParams, Result, RunSpec, SimBox, Species, SystemState,
    ThermostatSpec, Vec3,
};

/// Speed above which a run is aborted as numerically unstable.
pub const MAX_SPEED: f64 = 1.0e3;
/// Stream id of the integrator RNG (generators use the other streams).
const ENGINE_STREAM: u64 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoseHooverState {
    pub xi: f64,
}

/// Unwrapped coordinates of every bead at one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFrame {
    pub step: u64,
    pub positions: Vec<Vec3>,
}

/// Thermodynamic sample taken alongside each frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoSample {
    pub step: u64,
    pub temperature: f64,
    pub potential_energy: f64,
    pub kinetic_energy: f64,
    pub xi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub sim_box: SimBox,
    pub species: Vec<Species>,
    pub frames: Vec<TrajectoryFrame>,
    #[serde(default)]
    pub thermo: Vec<ThermoSample>,
}

impl Trajectory {
    pub fn new(sim_box: SimBox, species: Vec<Species>) -> Self {
        Trajectory {
            sim_box,
            species,
            frames: Vec::new(),
            thermo: Vec::new(),
        }
    }

    pub fn for_state(state: &SystemState) -> Self {
        Trajectory::new(state.sim_box, state.species())
    }

    pub fn last_step(&self) -> Option<u64> {
        self.frames.last().map(|f| f.step)
    }

    /// Appends a frame; steps must be strictly increasing.
    pub fn push(&mut self, frame: TrajectoryFrame) -> Result<()> {
        if frame.positions.len() != self.species.len() {
            return Err(Error::InvalidState(alloc::format!(
                "frame has {} beads, trajectory has {}",
                frame.positions.len(),
                self.species.len()
            )));
        }
        if let Some(last) = self.last_step() {
            if frame.step <= last {
                return Err(Error::InvalidState(alloc::format!(
                    "frame step {} does not follow {}",
                    frame.step,
                    last
                )));
            }
        }
        self.frames.push(frame);
        Ok(())
    }
}

#[inline]
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Gaussian velocities with variance `T/m` per component, then zero total
/// momentum.
pub fn initialize_velocities(state: &mut SystemState, temperature: f64, rng: &mut ChaCha8Rng) {
    if state.beads.is_empty() {
        return;
    }
    for b in &mut state.beads {
        let s = libm::sqrt(temperature / b.mass);
        b.velocity = Vec3::new(
            s * gaussian(rng),
            s * gaussian(rng),
            s * gaussian(rng),
        );
    }
    let total_mass: f64 = state.beads.iter().map(|b| b.mass).sum();
    let momentum: Vec3 = state.beads.iter().map(|b| b.velocity * b.mass).sum();
    let vcm = momentum / total_mass;
    for b in &mut state.beads {
        b.velocity -= vcm;
    }
}

/// Moves every bead by `dt v`, keeping positions wrapped and images current.
fn drift(state: &mut SystemState, dt: f64) {
    let sim_box = state.sim_box;
    for b in &mut state.beads {
        let (w, shift) = sim_box.wrap(b.position + b.velocity * dt);
        b.position = w;
        for k in 0..3 {
            b.image[k] += shift[k];
        }
    }
}

fn kick(state: &mut SystemState, forces: &[Vec3], half_dt: f64) {
    for (b, f) in state.beads.iter_mut().zip(forces) {
        b.velocity += *f * (half_dt / b.mass);
    }
}

fn twice_kinetic(state: &SystemState) -> f64 {
    state.beads.iter().map(|b| b.mass * b.velocity.norm2()).sum()
}

fn check_speeds(state: &SystemState) -> Result<()> {
    for b in &state.beads {
        let v2 = b.velocity.norm2();
        if !(v2 <= MAX_SPEED * MAX_SPEED) {
            return Err(Error::BlowUp {
                step: state.step,
                bead: b.id,
                speed: libm::sqrt(v2),
            });
        }
    }
    Ok(())
}

/// Adds `-γ m v + R` to `forces`.
fn add_langevin(state: &SystemState, forces: &mut [Vec3], gamma: f64, temperature: f64, dt: f64, rng: &mut ChaCha8Rng) {
    for (b, f) in state.beads.iter().zip(forces.iter_mut()) {
        let amp = libm::sqrt(2.0 * b.mass * gamma * temperature / dt);
        let noise = Vec3::new(
            gaussian(rng),
            gaussian(rng),
            gaussian(rng),
        );
        *f += noise * amp - b.velocity * (gamma * b.mass);
    }
}

/// One plain velocity-Verlet step (no thermostat). `acc` must hold the
/// forces at the current positions and is updated to the new ones.
pub fn step_nve(state: &mut SystemState, ff: &mut ForceField, acc: &mut ForceAccumulator, dt: f64) -> Result<()> {
    kick(state, &acc.forces, 0.5 * dt);
    drift(state, dt);
    ff.compute(state, acc)?;
    kick(state, &acc.forces, 0.5 * dt);
    state.step += 1;
    check_speeds(state)
}

/// One Langevin step. `total` holds the force (conservative + friction +
/// noise) used for the first half-kick and is replaced by the new one;
/// `acc` receives the conservative part.
#[allow(clippy::too_many_arguments)]
pub fn step_langevin(
    state: &mut SystemState,
    ff: &mut ForceField,
    acc: &mut ForceAccumulator,
    total: &mut Vec<Vec3>,
    dt: f64,
    gamma: f64,
    temperature: f64,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    kick(state, total, 0.5 * dt);
    drift(state, dt);
    ff.compute(state, acc)?;
    total.clear();
    total.extend_from_slice(&acc.forces);
    add_langevin(state, total, gamma, temperature, dt, rng);
    kick(state, total, 0.5 * dt);
    state.step += 1;
    check_speeds(state)
}

/// Half-step update of the Nosé–Hoover friction,
/// `dξ/dt = (Σ m v² - g k_B T) / Q`.
pub fn nose_hoover_half_step(nh: &mut NoseHooverState, twice_ke: f64, dof: f64, temperature: f64, q: f64, dt: f64) {
    nh.xi += 0.5 * dt * (twice_ke - dof * temperature) / q;
}

/// One Nosé–Hoover step: ξ half-step, velocity scaling by `exp(-ξ dt/2)`,
/// velocity Verlet, scaling again and a second ξ half-step.
#[allow(clippy::too_many_arguments)]
pub fn step_nose_hoover(
    state: &mut SystemState,
    nh: &mut NoseHooverState,
    ff: &mut ForceField,
    acc: &mut ForceAccumulator,
    dt: f64,
    temperature: f64,
    q: f64,
) -> Result<()> {
    let dof = (3 * state.beads.len()) as f64;
    nose_hoover_half_step(nh, twice_kinetic(state), dof, temperature, q, dt);
    let scale = libm::exp(-0.5 * dt * nh.xi);
    for b in &mut state.beads {
        b.velocity *= scale;
    }
    kick(state, &acc.forces, 0.5 * dt);
    drift(state, dt);
    ff.compute(state, acc)?;
    kick(state, &acc.forces, 0.5 * dt);
    let scale = libm::exp(-0.5 * dt * nh.xi);
    for b in &mut state.beads {
        b.velocity *= scale;
    }
    nose_hoover_half_step(nh, twice_kinetic(state), dof, temperature, q, dt);
    state.step += 1;
    if !nh.xi.is_finite() {
        return Err(Error::InvalidState("Nose-Hoover friction became non-finite".into()));
    }
    check_speeds(state)
}

/// Everything besides the [`SystemState`] needed to continue a run exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub step: u64,
    pub nose_hoover: NoseHooverState,
    pub rng: ChaCha8Rng,
    /// Force used by the next first half-kick.
    pub forces: Vec<Vec3>,
}

/// Owns a state and advances it under one thermostat.
#[derive(Clone, Debug)]
pub struct Engine {
    state: SystemState,
    ff: ForceField,
    thermostat: ThermostatSpec,
    nose_hoover: NoseHooverState,
    nh_mass: f64,
    dt: f64,
    dump_every: u64,
    rng: ChaCha8Rng,
    acc: ForceAccumulator,
    total: Vec<Vec3>,
}

impl Engine {
    /// Prepares a run. Velocities are drawn at the thermostat temperature when
    /// the state is at step 0 with all beads at rest.
    pub fn new(
        mut state: SystemState,
        params: InteractionParams,
        fene: FeneParams,
        thermostat: ThermostatSpec,
        run: &RunSpec,
    ) -> Result<Engine> {
        Self::check_inputs(&state, &params, &fene, &thermostat, run)?;
        let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
        rng.set_stream(ENGINE_STREAM);
        if state.step == 0 && state.beads.iter().all(|b| b.velocity == Vec3::ZERO) {
            initialize_velocities(&mut state, thermostat.temperature(), &mut rng);
        }
        let mut engine = Engine::assemble(state, params, fene, thermostat, run, rng);
        engine.ff.compute(&engine.state, &mut engine.acc)?;
        engine.total = engine.acc.forces.clone();
        if let ThermostatSpec::Langevin { gamma, temperature } = thermostat {
            add_langevin(&engine.state, &mut engine.total, gamma, temperature, run.dt, &mut engine.rng);
        }
        Ok(engine)
    }

    /// Rebuilds an engine from a state and the checkpoint taken with it.
    pub fn resume(
        state: SystemState,
        params: InteractionParams,
        fene: FeneParams,
        thermostat: ThermostatSpec,
        run: &RunSpec,
        checkpoint: Checkpoint,
    ) -> Result<Engine> {
        Self::check_inputs(&state, &params, &fene, &thermostat, run)?;
        if checkpoint.step != state.step {
            return Err(Error::StepMismatch {
                state: state.step,
                trajectory: checkpoint.step,
            });
        }
        if checkpoint.forces.len() != state.beads.len() {
            return Err(Error::InvalidState("checkpoint force count differs from bead count".into()));
        }
        let mut engine = Engine::assemble(state, params, fene, thermostat, run, checkpoint.rng);
        engine.nose_hoover = checkpoint.nose_hoover;
        engine.ff.compute(&engine.state, &mut engine.acc)?;
        engine.total = checkpoint.forces;
        Ok(engine)
    }

    fn check_inputs(
        state: &SystemState,
        params: &InteractionParams,
        fene: &FeneParams,
        thermostat: &ThermostatSpec,
        run: &RunSpec,
    ) -> Result<()> {
        if state.beads.is_empty() {
            return Err(Error::EmptySystem);
        }
        params.validate()?;
        fene.validate()?;
        thermostat.validate()?;
        run.validate()?;
        state.sim_box.check_cutoff(params.r_cut)
    }

    fn assemble(
        state: SystemState,
        params: InteractionParams,
        fene: FeneParams,
        thermostat: ThermostatSpec,
        run: &RunSpec,
        rng: ChaCha8Rng,
    ) -> Engine {
        let dof = 3 * state.beads.len();
        Engine {
            nh_mass: thermostat.nose_hoover_mass(dof).unwrap_or(0.0),
            state,
            ff: ForceField::new(params, fene),
            thermostat,
            nose_hoover: NoseHooverState::default(),
            dt: run.dt,
            dump_every: run.dump_every,
            rng,
            acc: ForceAccumulator::default(),
            total: Vec::new(),
        }
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn into_state(self) -> SystemState {
        self.state
    }

    pub fn thermostat(&self) -> ThermostatSpec {
        self.thermostat
    }

    pub fn nose_hoover(&self) -> NoseHooverState {
        self.nose_hoover
    }

    pub fn potential_energy(&self) -> f64 {
        self.acc.potential_energy
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * twice_kinetic(&self.state)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            step: self.state.step,
            nose_hoover: self.nose_hoover,
            rng: self.rng.clone(),
            forces: self.total.clone(),
        }
    }

    pub fn step(&mut self) -> Result<()> {
        match self.thermostat {
            ThermostatSpec::Langevin { gamma, temperature } => step_langevin(
                &mut self.state,
                &mut self.ff,
                &mut self.acc,
                &mut self.total,
                self.dt,
                gamma,
                temperature,
                &mut self.rng,
            ),
            ThermostatSpec::NoseHoover { temperature, .. } => step_nose_hoover(
                &mut self.state,
                &mut self.nose_hoover,
                &mut self.ff,
                &mut self.acc,
                self.dt,
                temperature,
                self.nh_mass,
            ),
        }
    }

    fn sample(&self) -> (TrajectoryFrame, ThermoSample) {
        let frame = TrajectoryFrame {
            step: self.state.step,
            positions: self.state.unwrapped_positions(),
        };
        let thermo = ThermoSample {
            step: self.state.step,
            temperature: kinetic_temperature(&self.state).unwrap_or(0.0),
            potential_energy: self.acc.potential_energy,
            kinetic_energy: self.kinetic_energy(),
            xi: self.nose_hoover.xi,
        };
        (frame, thermo)
    }

    fn record(&self, traj: &mut Trajectory) -> Result<()> {
        if traj.last_step() == Some(self.state.step) {
            return Ok(());
        }
        let (frame, thermo) = self.sample();
        traj.push(frame)?;
        traj.thermo.push(thermo);
        Ok(())
    }

    /// Advances `steps` steps, recording a frame at every multiple of the dump
    /// interval and at the final step. The current step is recorded first if
    /// the trajectory does not already end there.
    pub fn advance(&mut self, steps: u64, traj: &mut Trajectory) -> Result<()> {
        self.record(traj)?;
        for _ in 0..steps {
            self.step()?;
            if self.state.step % self.dump_every == 0 {
                self.record(traj)?;
            }
        }
        self.record(traj)
    }
}

/// Runs `run.steps` steps from `state`; the returned engine holds the final
/// state and the thermostat state for continuation.
pub fn run(
    state: SystemState,
    params: InteractionParams,
    fene: FeneParams,
    thermostat: ThermostatSpec,
    run: &RunSpec,
) -> Result<(Engine, Trajectory)> {
    let mut engine = Engine::new(state, params, fene, thermostat, run)?;
    let mut traj = Trajectory::for_state(engine.state());
    engine.advance(run.steps, &mut traj)?;
    Ok((engine, traj))
}

/// Continues a run for `extra_steps`, appending to `traj`.
pub fn extend_run(engine: &mut Engine, traj: &mut Trajectory, extra_steps: u64) -> Result<()> {
    if let Some(last) = traj.last_step() {
        if last != engine.state().step {
            return Err(Error::StepMismatch {
                state: engine.state().step,
                trajectory: last,
            });
        }
    }
    engine.advance(extra_steps, traj)
}
