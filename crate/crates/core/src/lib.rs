//! Maximum-likelihood MIMO detection with a simulated coherent Ising machine.
//!
//! The pipeline: a real-expanded MIMO instance ([`mimo`]) gets linear
//! initial guesses ([`linear`]); corrections to a guess are encoded as an
//! Ising problem ([`ising`]) whose size comes from a spectral radius
//! estimate ([`radius`]); the problem is annealed on an ODE model of the
//! CIM ([`cim`]); and [`mdi`] iterates all of this over several stages
//! with two guess tracks.

pub mod cim;
pub mod error;
pub mod ising;
pub mod linear;
pub mod mdi;
pub mod mimo;
pub mod numerics;
pub mod radius;

pub use error::{Error, Result};
