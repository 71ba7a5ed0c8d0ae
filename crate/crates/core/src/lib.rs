//! Numerical laboratory for the generalized fractional Benjamin-Bona-Mahony
//! equation
//!
//! ```text
//! u_t + u_x + (1/2)(u^{p+1})_x + (3/4) D^alpha u_x + (5/4) D^alpha u_t = 0
//! ```
//!
//! on a periodic domain, where `D^alpha` has Fourier symbol `|xi|^alpha`.
//!
//! * [`spectral`]: periodic grids, transforms and Fourier multipliers.
//! * [`solitary`]: Petviashvili iteration, the closed-form `sech^2` wave and
//!   ground-state rescaling.
//! * [`stability`]: the closed-form stability discriminant, critical speeds,
//!   region maps and dense spectra of the linearized operators.
//! * [`evolution`]: pseudo-spectral RK4 time stepping with invariant tracking.
//! * [`io`]: CSV / JSON / binary snapshot formats.
//! * [`sweep`]: batch evaluation over parameter points, parallel when the
//!   `parallel` feature is enabled.

pub mod error;
pub mod evolution;
pub mod io;
pub mod params;
pub mod solitary;
pub mod spectral;
pub mod stability;
pub mod sweep;

pub use error::{Error, Result};
pub use params::{Branch, GroundStateMap, ModelParams};
pub use spectral::SpectralGrid;
