//! Switch-based hybrid beamforming for wideband MIMO-OFDM receivers.
//!
//! The pipeline is: draw a clustered wideband channel ([`channel`]), design
//! fully digital transmit precoders ([`txbeam`]), search a binary analog
//! combiner shared by all subcarriers ([`solvers`]) against the log-det
//! objective in [`rxbeam`], and score spectral / energy efficiency
//! ([`powermodel`]). [`harness`] runs seeded Monte Carlo experiments over
//! those pieces.

pub mod channel;
pub mod error;
pub mod harness;
pub mod numkernel;
pub mod powermodel;
pub mod rxbeam;
pub mod solvers;
pub mod txbeam;

pub use error::{Error, Result};
