//! Simulation library for DCSK encryption of power packets.
//!
//! The crate covers the chaotic chip generator, packet framing, the DCSK
//! modulator and correlation receiver (including the power-carrying variant
//! whose data half is scaled by the line amplitude), an AWGN channel,
//! partial and whole packet encryption with a line-tapping attacker, and
//! the power and spectrum measurements used by the experiment commands.

pub mod analysis;
pub mod channel;
pub mod chaos;
pub mod dcsk;
pub mod error;
pub mod experiment;
pub mod packet;
pub mod pipeline;
pub mod signal;
mod sum;

pub use error::{Error, Result};
