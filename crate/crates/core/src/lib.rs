//! Time evolution of decaying states by exact pole expansions.
//!
//! `psi(r, t)` for a particle escaping a short-range radial potential is
//! written as a sum of closed-form Moshinsky functions over the resonances
//! of the potential and three lattices of auxiliary poles. See the `book/`
//! directory for a guided tour; its snippets are compiled as doctests.

pub mod asymptotics;
pub mod cn;
pub mod contour;
pub mod error;
pub mod evolution;
pub mod jost;
pub mod moshinsky;
pub mod ode;
pub mod poles;
pub mod quad;
pub mod scalar;
pub mod spectral;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::{Complex, Context};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod chapter_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/special-functions.md")]
mod chapter_special_functions {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/moshinsky.md")]
mod chapter_moshinsky {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/jost.md")]
mod chapter_jost {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/spectral.md")]
mod chapter_spectral {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/poles.md")]
mod chapter_poles {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/expansion.md")]
mod chapter_expansion {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/asymptotics.md")]
mod chapter_asymptotics {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/crank-nicolson.md")]
mod chapter_crank_nicolson {}
