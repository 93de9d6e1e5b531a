//! Discrete Weyl-Wigner phase space for a `d`-dimensional Hilbert space
//! viewed as a quantum torus.
//!
//! Operators are expanded in translations `T_xi` and reflections `R_x`
//! labelled by integer pairs on the `2d x 2d` lattice; the expansion
//! coefficients are the chord and center (Wigner) arrays. The guide in
//! `book/` walks through the modules with runnable examples.
//!
//! ```
//! use torus_wigner::TorusDim;
//! use torus_wigner::phase_repr::coherent_state;
//!
//! let dim = TorusDim::new(8);
//! let psi = coherent_state(&dim, dim.point(4, 4));
//! let w = psi.wigner();
//! assert!((w.sum().re / 16.0 - 1.0).abs() < 1e-10);
//! ```

pub mod doublespace;
pub mod error;
pub mod identities;
pub mod io;
pub mod lattice;
pub mod lines;
pub mod phase_repr;
pub mod random;
pub mod sic;
pub mod weylops;

pub use error::{Error, Result};
pub use lattice::{symplectic, PhasePoint, TorusDim};

// The guide's code blocks run as doctests of this crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/representations.md")]
    mod representations {}
    #[doc = include_str!("../../../book/src/lines.md")]
    mod lines {}
    #[doc = include_str!("../../../book/src/identities.md")]
    mod identities {}
    #[doc = include_str!("../../../book/src/sic.md")]
    mod sic {}
    #[doc = include_str!("../../../book/src/doublespace.md")]
    mod doublespace {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
