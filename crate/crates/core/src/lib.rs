//! Numerical models of single-mode squeezed vacuum light under optical loss.
//!
//! The crate converts between three descriptions of a zero-mean Gaussian
//! state of one optical mode:
//!
//! - quadrature variances ([`GaussianState`]) and their Wigner function
//!   ([`wigner`]),
//! - the Fock-basis density matrix and photon-number distribution
//!   ([`fock`]),
//! - the frequency-resolved output of a below-threshold optical parametric
//!   oscillator ([`spectrum`]).
//!
//! A seeded balanced-homodyne sampler ([`homodyne`]) closes the loop from
//! synthetic detector data back to state parameters.
//!
//! Variances are held internally relative to a vacuum variance of one
//! ([`VarianceConvention::Unity`]). The crate is `no_std` and only needs
//! `alloc`; transcendental functions come from `libm` so results do not
//! depend on the platform math library.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
pub mod fock;
pub mod homodyne;
pub mod math;
pub mod presets;
pub mod spectrum;
pub mod state;
pub mod wigner;

pub use error::{Error, Result};
pub use state::{
    apply_loss, db_to_linear, infer_loss, linear_to_db, mean_photon_number, purity, GaussianState,
    LossChannel, LossEstimate, VarianceConvention,
};
