use polybead_core::engine::{extend_run, initialize_velocities, run, step_nve};
use polybead_core::forcefield::{compute_forces_all_pairs, FeneParams, ForceAccumulator, ForceField};
use polybead_core::topogen::{generate_brush, generate_dendrimer, generate_linear, generate_ring, generate_star};
use polybead_core::{InteractionParams, RunSpec, SystemState, ThermostatSpec, Vec3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn shape(kind: u8, seed: u64) -> SystemState {
    let (b, n_s) = (9.0, 0.15);
    match kind {
        0 => generate_linear(12, b, n_s, seed),
        1 => generate_ring(12, b, n_s, seed),
        2 => generate_brush(8, 0.5, 3, b, n_s, seed),
        3 => generate_star(3, 4, b, n_s, seed),
        _ => generate_dendrimer(2, 2, 2, b, n_s, seed),
    }
    .unwrap()
}

fn params() -> InteractionParams {
    InteractionParams::new(0.5, 1.0, 1.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn pair_forces_cancel(kind in 0u8..5, seed in 0u64..1000) {
        let state = shape(kind, seed);
        let acc = compute_forces_all_pairs(&state, &params(), &FeneParams::default()).unwrap();
        let net = acc.net_force();
        let scale: f64 = acc.forces.iter().map(|f| f.norm2().sqrt()).sum::<f64>().max(1.0);
        prop_assert!(net.norm2().sqrt() < 1e-10 * scale, "net force {net:?}");
    }

    #[test]
    fn verlet_list_matches_all_pairs(kind in 0u8..5, seed in 0u64..1000, skin in 0.05f64..1.0) {
        let state = shape(kind, seed);
        let reference = compute_forces_all_pairs(&state, &params(), &FeneParams::default()).unwrap();
        let mut ff = ForceField::with_skin(params(), FeneParams::default(), skin);
        let mut acc = ForceAccumulator::zeroed(state.n_beads());
        ff.compute(&state, &mut acc).unwrap();
        for (a, b) in acc.forces.iter().zip(&reference.forces) {
            prop_assert!((*a - *b).norm2().sqrt() < 1e-9);
        }
        prop_assert!((acc.potential_energy - reference.potential_energy).abs() < 1e-9);
    }
}

fn nve_positions(mut state: SystemState, skin: f64, steps: usize) -> (Vec<Vec3>, u64) {
    let mut ff = ForceField::with_skin(params(), FeneParams::default(), skin);
    let mut acc = ForceAccumulator::zeroed(state.n_beads());
    ff.compute(&state, &mut acc).unwrap();
    for _ in 0..steps {
        step_nve(&mut state, &mut ff, &mut acc, 0.005).unwrap();
    }
    (state.beads.iter().map(|b| b.position).collect(), ff.rebuilds())
}

#[test]
fn skin_does_not_change_the_trajectory() {
    let mut state = shape(2, 11);
    initialize_velocities(&mut state, 1.0, &mut ChaCha8Rng::seed_from_u64(3));
    let (thin, thin_rebuilds) = nve_positions(state.clone(), 0.1, 400);
    let (thick, thick_rebuilds) = nve_positions(state, 0.8, 400);
    assert_eq!(thin, thick);
    assert!(thin_rebuilds > thick_rebuilds, "{thin_rebuilds} vs {thick_rebuilds}");
}

#[test]
fn extension_continues_bit_for_bit() {
    for thermostat in [ThermostatSpec::langevin(), ThermostatSpec::nose_hoover()] {
        let state = shape(3, 5);
        let spec = |steps| {
            let mut r = RunSpec::new(steps, 9);
            r.dump_every = 50;
            r
        };
        let (whole, whole_traj) = run(state.clone(), params(), FeneParams::default(), thermostat, &spec(600)).unwrap();
        let (mut part, mut part_traj) = run(state, params(), FeneParams::default(), thermostat, &spec(250)).unwrap();
        extend_run(&mut part, &mut part_traj, 350).unwrap();
        assert_eq!(whole.state(), part.state());
        assert_eq!(whole.nose_hoover(), part.nose_hoover());
        assert_eq!(whole_traj.frames, part_traj.frames);
        assert_eq!(whole_traj.thermo.len(), part_traj.thermo.len());
    }
}
