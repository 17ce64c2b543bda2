//! Mean-value and covariance dynamics of a spin ensemble, possibly inverted and
//! inhomogeneously broadened, coupled to a single cavity mode.
//!
//! The dynamics are the Holstein–Primakoff linearization: a real linear system
//! `dy/dt = M y` for the quadrature means and `dγ/dt = Mγ + γMᵀ + N` for the
//! symmetrized covariance. Closed forms for the homogeneous, Lorentzian and
//! Gaussian cases live in [`analytics`], driven-cavity response in [`probing`].

pub mod analytics;
pub mod broadening;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod probing;

pub use error::{Error, Result};
