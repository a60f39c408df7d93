//! Exact and perturbative tools for a one-dimensional lattice fermion
//! built from two alternating gates: a chirality-conditioned shift with an
//! on-site mass mixing, and a phase applied wherever two walkers share a
//! site. The crate evolves few-particle sectors exactly, expands the same
//! dynamics in powers of the interaction phase or of the mass amplitude
//! with integer-exact coefficients, scans for two-particle bound states in
//! a momentum-block representation, and cross-checks the combinatorial
//! identities underlying all of it.

pub mod algebra;
pub mod error;
pub mod export;
pub mod free;
pub mod hybrid;
pub mod interaction;
pub mod lemmas;
pub mod mass_classes;
pub mod pair;
pub mod par;
pub mod sector;

pub use algebra::{Bit, BitPath, BinLabel, Chirality, GradedAmplitude, Letter, WalkParams};
pub use error::{Error, Result};
pub use par::Exec;
