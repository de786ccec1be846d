//! Spectral theory of the linearized Vlasov–Poisson system near radial equilibria.
//!
//! The crate evaluates the dielectric function `D(λ,k)`, the survival threshold
//! `κ₀`, the Langmuir branch `τ*(k)`, Landau-damped roots past the threshold,
//! the mode-wise Green function split into oscillatory and remainder parts, and
//! electric-field traces. Every route has an independent brute-force check:
//! contour residues against `1/∂_λD`, the Green route against a time-domain
//! Volterra solve, and the field decomposition against the direct trace.
//!
//! The crate is `no_std` with `alloc`; all operations are pure functions of
//! immutable inputs.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dispersion;
pub mod equilibria;
pub mod error;
pub mod field;
pub mod fit;
pub mod green;
pub mod quad;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
