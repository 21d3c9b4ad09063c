//! File formats, plots, reports and the command-line workflow around
//! [`polybead_core`].

pub mod cli;
pub mod data;
pub mod dump;
mod error;
pub mod pipeline;
pub mod plot;
pub mod report;
pub mod shell;
pub mod spec;
pub mod tsv;

pub use error::{Error, Result};
pub use polybead_core;
