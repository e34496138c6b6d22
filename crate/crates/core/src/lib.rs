//! Numerics for the conformally invariant logarithmic operator on the n-sphere.
//!
//! The crate is organised bottom-up:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`sphere`] | points on 𝕊ⁿ, chordal distance, product quadrature grids |
//! | [`special`] | log-gamma, digamma, real spherical-harmonic basis |
//! | [`harmonics`] | band-limited analysis/synthesis and the spectral multipliers of `H`, `P₂ₛ`, `A₂ₛ` |
//! | [`conformal`] | stereographic projection, lifted inversions/reflections, Möbius maps, pullbacks |
//! | [`energy`] | the quadratic form `ℰ`, the log-Sobolev deficit, weak Euler–Lagrange residuals |
//! | [`dynamics`] | deficit-minimizing flow, extremizer fitting, moving-spheres diagnostics |
//!
//! Everything is `no_std` with `alloc`; IO and the command line live in the
//! companion `confsob` crate.
//!
//! ```
//! use confsob_core::harmonics::multiplier_h;
//! use core::f64::consts::PI;
//!
//! // On 𝕊², degree-one harmonics are eigenfunctions of H with eigenvalue 2π.
//! let h1 = multiplier_h(2, 1).unwrap();
//! assert!((h1 - 2.0 * PI).abs() < 1e-12);
//! ```

#![cfg_attr(not(test), no_std)]
#![warn(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;

mod error;
pub(crate) mod linalg;
pub(crate) mod sum;

pub mod conformal;
pub mod dynamics;
pub mod energy;
pub mod harmonics;
pub mod special;
pub mod sphere;

pub use error::{Error, Result};

pub mod prelude {
    //! Commonly used types and functions.
    pub use crate::conformal::{
        extremizer, ConformalMap, Extremizer, ExtremizerParams, Pullback, SigmaRegion,
    };
    pub use crate::dynamics::{
        critical_alpha, critical_lambda, fit_extremizer, minimize_deficit, moving_sphere_profile,
        FlowConfig, MovingCenter,
    };
    pub use crate::energy::{beckner_deficit, constant_cn, el_residual, energy_spectral};
    pub use crate::harmonics::{HarmonicCoeffs, MultiplierTable, Transform};
    pub use crate::sphere::{
        build_grid, chordal_distance, sphere_area, Constant, GridFunction, Infallible, QuadratureGrid,
        SphereFunction,
        SpherePoint,
    };
    pub use crate::{Error, Result};
}
