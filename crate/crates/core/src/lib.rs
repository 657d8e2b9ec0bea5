//! Numerical toolkit for nonlocal isoperimetry on balls and nearly spherical sets.
//!
//! Fractional perimeters and Riesz potentials of balls, the spectra of the
//! associated operators on the unit sphere, Fuglede-type quadratic forms and the
//! stability thresholds β⋆ and m⋆ of the energy `Per_s + β V_α`.

pub mod ball_energy;
pub mod error;
pub mod general_sets;
pub mod harmonics;
pub mod nearly_spherical;
pub mod par;
pub mod quadforms;
pub mod specfun;
pub mod sphere_numerics;
pub mod spectrum;
pub mod thresholds;

pub use error::{Error, Result};
