//! Simulation of the Kirchhoff-law-Johnson-noise (KLJN) key exchange over a
//! capacitive cable, a passive eavesdropper exploiting the cable capacitance,
//! the capacitor-killer countermeasure and XOR privacy amplification.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod cable;
pub mod compare;
pub mod error;
pub mod harness;
pub mod netlist;
pub mod noise;
pub mod privacy;
pub mod protocol;
pub mod seeds;
pub mod stats;
pub mod transient;
pub mod waveform;

pub use error::{Error, Result};
pub use waveform::Waveform;
