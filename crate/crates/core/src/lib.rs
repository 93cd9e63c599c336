//! Joint BS / relay / IRS beamforming for a multiuser MISO downlink in
//! which an intelligent reflecting surface and a half-duplex
//! decode-and-forward relay operate together.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: Hermitian matrix primitives.
//! - [`conic`]: a dense primal-dual interior-point solver for the
//!   semidefinite subproblems.
//! - [`channel`]: topology, path loss and Rayleigh channel draws.
//! - [`system`]: effective channels, SINRs and the sum-rate objective.
//! - [`subproblems`]: the three convexified beamforming subproblems and
//!   rank-one recovery.
//! - [`ao`]: the alternating optimization loop and benchmark schemes.
//! - [`harness`]: Monte-Carlo sweeps, configuration and CSV output.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ao;
pub mod channel;
pub mod conic;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod subproblems;
pub mod system;

pub use error::{Error, Result};
