//! Reservoir engineering of squeezed light and squeezed baths in cavity QED.
//!
//! A driven three-level Λ atom coupled to a cavity mode is reduced to an
//! effective two-level interaction `(λ1 a + λ2 a† + β) σ₋ + h.c.`. That one
//! interaction supports two protocols, both simulated here:
//!
//! * [`beam`]: a stream of atoms crossing a high-Q cavity pumps the field into
//!   a displaced squeezed vacuum `D(α) S(ξ) |0⟩`;
//! * [`squeezedbath`]: a single atom in a strongly damped cavity sees an ideal
//!   squeezed vacuum reservoir.
//!
//! Everything is in units where `ħ = 1` and the vacuum Rabi coupling `g = 1`;
//! rates are multiples of `g`, times are multiples of `1/g`.
//!
//! The atom ⊗ field ordering is used for every composite operator, so the
//! composite basis index is `atom_level * (n_max + 1) + n`.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beam;
pub mod dynamics;
mod error;
pub mod hilbert;
pub mod io;
pub mod model;
pub mod squeezedbath;
pub mod validate;
pub mod wigner;

pub use error::{Error, Result};
pub use hilbert::{CMatrix, CVector, Operator, QuantumState, C64};
