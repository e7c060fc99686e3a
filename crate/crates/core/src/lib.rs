//! Boolean Holant problems with non-negative rational weights.
//!
//! The crate covers exact evaluation of signature grids, windability and
//! its certificates, the Markov chain on near-assignments and the
//! approximate counter built on it, and reductions of matchings circuits to
//! perfect matchings.

pub mod circuit;
pub mod class;
pub mod counter;
pub mod error;
pub mod io;
pub mod lp;
pub mod matchgates;
pub mod mcmc;
pub mod pm;
pub mod prat;
pub mod signature;

pub use circuit::{Circuit, CircuitBuilder};
pub use error::{Error, Result};
pub use signature::{IndexSet, Named, Rational, Signature};

/// The guide in `book/`, compiled so that its listings run as doctests.
#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/signatures.md")]
    pub mod signatures {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    pub mod circuits {}
    #[doc = include_str!("../../../book/src/classes.md")]
    pub mod classes {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    pub mod sampling {}
    #[doc = include_str!("../../../book/src/matchgates.md")]
    pub mod matchgates {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
