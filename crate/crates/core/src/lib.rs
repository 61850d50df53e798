//! Simulation library for a two-level atom exchanging k1 photons of one
//! cavity mode against k2 photons of another (the two-mode multiphoton
//! Jaynes-Cummings model), with Schroedinger-cat initial fields.
//!
//! The interaction decomposes into independent two-state blocks, so the
//! time evolution in `dynamics` is exact; `oracle` re-derives it by dense
//! Runge-Kutta integration as an independent check. Observables live in
//! `phase` (Pegg-Barnett distributions and moments), `wigner`
//! (phase-space-origin values and pointwise evaluation) and `dynamics`
//! (inversion, photon statistics); `analysis` extracts revival-collapse
//! structure from any swept observable.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod phase;
pub mod scenario;
pub mod states;
pub mod verify;
pub mod wigner;

pub use error::{Error, Result};
