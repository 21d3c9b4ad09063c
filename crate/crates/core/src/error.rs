use alloc::string::String;

use crate::system::Architecture;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("system contains no beads")]
    EmptySystem,

    #[error("inconsistent system state: {0}")]
    InvalidState(String),

    #[error("pair distance is zero")]
    ZeroDistance,

    #[error("bond length {r} exceeds the maximum extension {r0}")]
    BeyondMaxExtension { r: f64, r0: f64 },

    #[error("beads {i} and {j} overlap (r = {r:e})")]
    Overlap { i: usize, j: usize, r: f64 },

    #[error("bond {i}-{j} overstretched: r = {r} >= R0 = {r0}")]
    BondOverstretch { i: usize, j: usize, r: f64, r0: f64 },

    #[error("could not grow bead {bead} without overlap after {attempts} attempts")]
    GrowthFailed { bead: usize, attempts: usize },

    #[error("solvent packing failed: placed {placed} of {requested} beads")]
    PackingFailed { placed: usize, requested: usize },

    #[error("numerical blow-up at step {step}: bead {bead} has speed {speed}")]
    BlowUp { step: u64, bead: usize, speed: f64 },

    #[error("{observable} is not defined for {architecture:?} polymers")]
    NotApplicable {
        observable: &'static str,
        architecture: Architecture,
    },

    #[error("{0}")]
    EstimatorUndefined(&'static str),

    #[error("{what}: need at least {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("state is at step {state} but trajectory ends at step {trajectory}")]
    StepMismatch { state: u64, trajectory: u64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
