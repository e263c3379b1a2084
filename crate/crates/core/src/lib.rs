//! Numerical verification of vector-valued holomorphic calculus on polydiscs.
//!
//! The crate models a polydisc `O ⊆ ℂ^d`, a finite atomic measure space
//! `(Ω, μ)` hosting `E = L^p(Ω)`, and two-variable holomorphic families
//! `f(z, t)`. Bounded point-evaluation style functionals on `H^∞(O)` are
//! realized as finite complex quadrature measures, and every identity or
//! inequality linking the slices `f(·, t)` with the vector map
//! `z ↦ f(z, ·)` is turned into a [`theorems::CheckReport`].

pub mod cauchy;
pub mod domain;
pub mod error;
pub mod family;
pub mod functional;
pub mod measure;
pub mod sampling;
pub mod theorems;

mod sum;

pub use num_complex::Complex64;

pub use crate::cauchy::{
    cauchy_derivative, cauchy_eval, order_bound, schwarz_check, taylor_coefficients,
    telescoping_check, OrderBound, TaylorTable,
};
pub use crate::domain::{MultiIndex, Polydisc, TorusQuadrature};
pub use crate::error::{Error, Result};
pub use crate::family::{FamilyKind, HoloFamily};
pub use crate::functional::{BpFunctional, FunctionalTarget};
pub use crate::measure::{Atom, Exponent, FiniteMeasureSpace, LpVector};
pub use crate::theorems::{CheckReport, Quantity};
