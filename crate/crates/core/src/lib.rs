//! Spectral simulator for the normalized Ricci flow on closed surfaces in
//! conformal gauge, with diagnostics and the estimates of the uniqueness
//! argument evaluated on pairs of numerical solutions.
//!
//! Backgrounds are the unit-area flat torus and round sphere. A metric
//! `g = exp(2u) gbar` evolves through its conformal factor `u`; see
//! [`flow::eval_rhs`].

pub mod diagnostics;
pub mod error;
pub mod estimates;
pub mod experiments;
pub mod flow;
pub mod geometry;
pub mod par;
pub mod plot;

pub use error::{Error, Result};
pub use geometry::{build_surface, BackgroundSurface, ScalarField, SurfaceKind};
