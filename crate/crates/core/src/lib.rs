//! Opportunistic interference alignment (OIA) with 1-bit feedback in the
//! three-cell MIMO interference channel.
//!
//! Each cell serves one of `K` candidate users. Users measure how well the
//! two interfering transmitters already align at their receiver (squared
//! chordal distance between the interference subspaces) and report a single
//! bit: whether that metric is below a threshold. The crate provides the
//! threshold designs, a Monte Carlo link simulator, a closed-form
//! interference alignment baseline with quantized feedback, FLOP counts,
//! and an experiment harness that writes CSV tables.
//!
//! Cells and users are indexed from 0 throughout.

pub mod channel;
pub mod complexity;
pub mod error;
pub mod grassmann;
pub mod harness;
pub mod ia;
pub mod lambert;
pub mod linalg;
pub mod oia;
pub mod threshold;

pub use error::{Error, Result};
