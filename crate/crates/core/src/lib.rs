//! Core of `polybead`, a coarse-grained molecular dynamics toolkit for
//! topological polymers (linear, ring, brush, star and dendrimer) in explicit
//! or implicit solvent.
//!
//! Everything here is pure computation over in-memory data and only needs
//! `alloc`: configuration generators ([`topogen`]), the FENE + truncated-shifted
//! Lennard-Jones force field ([`forcefield`]), Langevin and Nosé–Hoover time
//! integration ([`engine`]) and the conformational observables ([`analysis`]).
//! File formats, plotting and the command line live in the `polybead` crate.
//!
//! All quantities are in reduced Lennard-Jones units: `σ = 1`, `ε = 1`,
//! `m = 1`, `k_B = 1`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod engine;
mod error;
pub mod forcefield;
mod system;
pub mod topogen;
mod vec3;

pub use error::{Error, Result};
pub use system::{
    kinetic_temperature, minimum_image, Architecture, Bead, Bond, InteractionParams, RunSpec,
    SimBox, Species, SystemState, ThermostatSpec, Topology,
};
pub use vec3::Vec3;
