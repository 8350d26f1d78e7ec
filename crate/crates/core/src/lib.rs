//! Key-rate engine and round-level Monte-Carlo simulator for device-independent
//! quantum secret sharing (DI QSS) over three-photon GHZ states.
//!
//! The crate computes, from first principles:
//!
//! * joint measurement statistics of noisy, lossy GHZ states ([`states`]),
//! * CHSH/Svetlichny polynomials and closed-form QBER predictions ([`correlations`]),
//! * the conditional-entropy lower bound that certifies secrecy against
//!   collective attacks, for an arbitrary key-basis mixing weight and optional
//!   noise preprocessing ([`entropy`]),
//! * asymptotic key rates, noise/efficiency thresholds and fiber-distance
//!   limits ([`keyrate`]),
//! * and a seeded round-level simulation of the full protocol ([`mcsim`]).
//!
//! All quantities are deterministic functions of their inputs; the simulator is
//! reproducible from a 64-bit seed. See the `diqss` binary for the command-line
//! front end.

pub mod correlations;
pub mod entropy;
pub mod error;
pub mod keyrate;
pub mod mcsim;
pub mod qmath;
pub mod report;
pub mod states;
pub mod tolerances;

pub use error::{Error, Result};
