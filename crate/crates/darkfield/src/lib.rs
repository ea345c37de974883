//! Bright and dark collective modes of multimode bosonic fields.
//!
//! A field built from `M` modes that couple identically to matter splits into
//! one *bright* collective mode (the symmetric combination, which couples with
//! strength enhanced by `sqrt(M)`) and `M - 1` *dark* modes that carry photons
//! and energy but exchange none of it. For thermal input this traps the
//! fraction `(M - 1) / M` of the energy in states invisible to linear
//! light-matter coupling.
//!
//! The crate provides the machinery to state and check that claim numerically:
//!
//! - [`hilbert`]: truncated Fock spaces, elementary operators, and
//!   tensor-product embedding for `M` modes plus an optional two-level atom.
//! - [`collective`]: the unitary collective basis, collective number states,
//!   and collective occupation observables.
//! - [`thermal`]: Bose-Einstein occupations, multimode thermal states, and
//!   their projections onto dark states.
//! - [`dynamics`]: the dissipative master equation with scheduled couplings
//!   and detunings, the effective bright-mode decay, and the analytic law it
//!   obeys.
//! - [`combinatorics`]: exact big-integer counting of bright, dark, and
//!   intermediate states, checked against brute-force nested sums.
//! - [`analysis`]: first-order-correlation intensity, bright/dark energy
//!   partition, and free-space Planck-integral ratios.
//!
//! Everything is deterministic: no randomness, no platform-dependent
//! iteration orders, fixed evaluation order in the numerics.

pub mod analysis;
pub mod collective;
pub mod combinatorics;
pub mod dynamics;
pub mod hilbert;
pub mod linalg;
pub mod thermal;
pub mod tol;

mod error;

pub use error::{Error, Result};

// The book chapters double as doctests so the guide cannot drift from the
// library. `cargo test --doc -p darkfield` runs every fenced snippet.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fock-spaces.md")]
    mod fock_spaces {}
    #[doc = include_str!("../../../book/src/collective-modes.md")]
    mod collective_modes {}
    #[doc = include_str!("../../../book/src/thermal-states.md")]
    mod thermal_states {}
    #[doc = include_str!("../../../book/src/master-equation.md")]
    mod master_equation {}
    #[doc = include_str!("../../../book/src/counting-states.md")]
    mod counting_states {}
    #[doc = include_str!("../../../book/src/intensity-and-energy.md")]
    mod intensity_and_energy {}
}
