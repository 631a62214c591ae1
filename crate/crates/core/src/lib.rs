//! Numerical dynamics of complex quadratic Henon maps
//! H(x, y) = (x^2 + c - a y, x) at small Jacobian a.
//!
//! Layers, bottom up: [`polynomial_dynamics`] (the polynomial p = x^2 + c),
//! [`henon_core`] (the map, escape functions, periodic points),
//! [`critical_locus`] (tangencies of the stable/unstable foliations),
//! [`cocycle`] (the leafwise multiplier alpha) and [`deck_group`].

pub mod angle;
pub mod cocycle;
pub mod compensated;
pub mod critical_locus;
pub mod deck_group;
pub mod error;
pub mod extrapolate;
pub mod henon_core;
pub mod polynomial_dynamics;

pub use angle::{Angle, LeafLabel};
pub use error::{Error, Result};
pub use num_complex::Complex64;
