//! One checker per identity or inequality linking the slices `f(·, t)`
//! with the vector map `F(z) = f(z, ·)`.
//!
//! Each checker returns a [`CheckReport`] whose `pass` flag is
//! `residual <= tol`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::cauchy::{cauchy_derivative, derivative_rule};
use crate::domain::MultiIndex;
use crate::error::{Error, Result};
use crate::family::HoloFamily;
use crate::functional::BpFunctional;
use crate::measure::{Exponent, FiniteMeasureSpace, LpVector};
use crate::sampling;
use crate::sum;

/// Default tolerances.
pub mod tol {
    /// Both sides are the same finite sums in a different association order.
    pub const ALGEBRAIC: f64 = 1e-12;
    /// Point evaluations on both sides.
    pub const DIRAC: f64 = 1e-13;
    /// One side under torus quadrature at n = 64, shrink <= 0.5.
    pub const QUADRATURE: f64 = 1e-9;
    pub const LINEARIZATION: f64 = 1e-10;
    pub const DERIVATIVE: f64 = 1e-10;
    /// Relative slack in `lhs <= rhs (1 + NORM_BOUND)`.
    pub const NORM_BOUND: f64 = 1e-9;
    pub const SPAN: f64 = 1e-8;
    pub const SCHWARZ: f64 = 1e-12;
    /// Relative slack for order-bound domination (rounding only).
    pub const ORDER_BOUND: f64 = 1e-12;
    /// Relative agreement of quadrature and closed-form derivative profiles.
    pub const MATTNER: f64 = 1e-8;
}

/// A complex or real quantity; serialized as `[re, im]` or a number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Quantity {
    Complex(Complex64),
    Real(f64),
}

impl From<Complex64> for Quantity {
    fn from(v: Complex64) -> Self {
        Quantity::Complex(v)
    }
}

impl From<f64> for Quantity {
    fn from(v: f64) -> Self {
        Quantity::Real(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub family: String,
    pub functional: String,
    pub p: Option<Exponent>,
    pub alpha: Vec<usize>,
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    pub n: usize,
    pub seed: u64,
}

impl CheckReport {
    pub fn new(
        check: impl Into<String>,
        family: impl Into<String>,
        functional: impl Into<String>,
        lhs: impl Into<Quantity>,
        rhs: impl Into<Quantity>,
        residual: f64,
        tol: f64,
    ) -> Self {
        Self {
            check: check.into(),
            family: family.into(),
            functional: functional.into(),
            p: None,
            alpha: Vec::new(),
            lhs: lhs.into(),
            rhs: rhs.into(),
            residual,
            tol,
            pass: residual <= tol,
            n: 0,
            seed: 0,
        }
    }

    pub fn with_p(mut self, p: Exponent) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_alpha(mut self, alpha: &MultiIndex) -> Self {
        self.alpha = alpha.entries().to_vec();
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Replaces the tolerance and recomputes `pass`.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self.pass = self.residual <= tol;
        self
    }
}

/// `φ_F`, computed slice by slice: entry `i` is `φ(f(·, t_i))`.
pub fn linearize(phi: &BpFunctional, fam: &HoloFamily, space: &FiniteMeasureSpace) -> Result<LpVector> {
    space
        .atoms()
        .iter()
        .map(|a| phi.apply_slice(fam, a))
        .collect::<Result<Vec<_>>>()
        .map(LpVector::new)
}

/// `Σ_k w_k F(z_k)`, the vector-valued integral of `F` against the
/// representing measure of `φ`.
pub fn bochner_integral(phi: &BpFunctional, fam: &HoloFamily, space: &FiniteMeasureSpace) -> Result<LpVector> {
    phi.check_domain(&fam.domain)?;
    let columns = phi
        .nodes()
        .iter()
        .zip(phi.weights())
        .map(|(z, w)| fam.vector(z, space).map(|v| v.scaled(*w)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LpVector::new(
        (0..space.len())
            .map(|i| {
                let row: Vec<Complex64> = columns.iter().map(|col| col.values()[i]).collect();
                phi.scale() * sum::pairwise(&row)
            })
            .collect(),
    ))
}

/// `φ_F` for the exact functional behind `φ` (closed-form point values
/// and derivatives of each slice).
pub fn linearize_exact(phi: &BpFunctional, fam: &HoloFamily, space: &FiniteMeasureSpace) -> Result<LpVector> {
    space
        .atoms()
        .iter()
        .map(|a| phi.apply_slice_exact(fam, a))
        .collect::<Result<Vec<_>>>()
        .map(LpVector::new)
}

/// `max_h |⟨φ_F, h⟩ - φ(z ↦ ⟨F(z), h⟩)|` over the given duals.
pub fn linearization_residual(
    phi: &BpFunctional,
    fam: &HoloFamily,
    space: &FiniteMeasureSpace,
    duals: &[LpVector],
    p: Exponent,
) -> Result<CheckReport> {
    let lin = linearize(phi, fam, space)?;
    let mut worst = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
    for h in duals {
        let lhs = space.pairing(&lin, h)?;
        let rhs = phi.apply_dual(fam, h, space)?;
        let r = (lhs - rhs).norm();
        if r >= worst.2 {
            worst = (lhs, rhs, r);
        }
    }
    Ok(CheckReport::new("linearization", &fam.label, &phi.label, worst.0, worst.1, worst.2, tol::LINEARIZATION).with_p(p))
}

/// Interchange of the functional with integration against `h ∈ L^q`:
/// `∫ φ(f_t) h(t) dμ(t) = φ(z ↦ ∫ f(z, t) h(t) dμ(t))`.
///
/// The left side applies the exact functional to each slice (closed-form
/// values and derivatives); the right side applies its quadrature measure
/// to the scalar map `z ↦ ⟨F(z), h⟩`. The residual therefore measures the
/// quadrature realization of `φ` and shrinks geometrically with `n`.
pub fn fubini_residual(
    phi: &BpFunctional,
    fam: &HoloFamily,
    h: &LpVector,
    space: &FiniteMeasureSpace,
    p: Exponent,
) -> Result<CheckReport> {
    let exact = linearize_exact(phi, fam, space)?;
    let lhs = space.pairing(&exact, h)?;
    let rhs = phi.apply_dual(fam, h, space)?;
    Ok(CheckReport::new("fubini", &fam.label, &phi.label, lhs, rhs, (lhs - rhs).norm(), tol::QUADRATURE).with_p(p))
}

/// `‖D^α F(a) - (D^α_z f(a, t_i))_i‖_p`: the Cauchy derivative applied to
/// the vector map `F` against the per-slice scalar Cauchy derivatives.
pub fn derivative_consistency(
    fam: &HoloFamily,
    space: &FiniteMeasureSpace,
    center: &[Complex64],
    alpha: &MultiIndex,
    radius: &[f64],
    n: usize,
    p: Exponent,
) -> Result<CheckReport> {
    let (nodes, weights) = derivative_rule(center, alpha, radius, n)?;
    let rule = BpFunctional::measure("cauchy", nodes, weights)?;
    let vector_level = bochner_integral(&rule, fam, space)?;
    let per_atom = space
        .atoms()
        .iter()
        .map(|a| cauchy_derivative(fam.slice(a), center, alpha, radius, n))
        .collect::<Result<Vec<_>>>()
        .map(LpVector::new)?;
    let residual = space.lp_norm(&vector_level.sub(&per_atom)?, p)?;
    Ok(CheckReport::new(
        "derivative_consistency",
        &fam.label,
        format!("derivative{alpha}"),
        space.lp_norm(&vector_level, p)?,
        space.lp_norm(&per_atom, p)?,
        residual,
        tol::DERIVATIVE,
    )
    .with_p(p)
    .with_alpha(alpha)
    .with_n(n))
}

/// Differentiation under the integral: the Cauchy derivative of
/// `z ↦ ⟨F(z), h⟩` at `a` against `⟨(D^α_z f(a, t_i))_i, h⟩` from the
/// closed-form slice derivatives.
pub fn diff_under_integral(
    fam: &HoloFamily,
    h: &LpVector,
    space: &FiniteMeasureSpace,
    center: &[Complex64],
    alpha: &MultiIndex,
    radius: &[f64],
    n: usize,
) -> Result<CheckReport> {
    space.check(h)?;
    let rule_nodes = derivative_rule(center, alpha, radius, n)?.0;
    rule_nodes.iter().try_for_each(|z| fam.domain.require_contains(z))?;
    let composed = |z: &[Complex64]| {
        fam.vector(z, space)
            .and_then(|v| space.pairing(&v, h))
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    };
    let lhs = cauchy_derivative(composed, center, alpha, radius, n)?;
    let rhs = space.pairing(&fam.derivative_vector(center, alpha, space)?, h)?;
    Ok(CheckReport::new(
        "diff_under_integral",
        &fam.label,
        format!("derivative{alpha}"),
        lhs,
        rhs,
        (lhs - rhs).norm(),
        tol::DERIVATIVE,
    )
    .with_alpha(alpha)
    .with_n(n))
}

/// `‖φ_F‖_p <= TV(φ) · sup_z ‖F(z)‖_p`.
///
/// The supremum is estimated from below on the boundary grid of the
/// polydisc shrunk by `shrink` (`density^d` points) together with the
/// nodes of `φ`; the total variation bounds `‖φ‖` from above. The residual
/// is the relative excess `max(lhs - rhs, 0) / rhs`.
pub fn norm_bound_check(
    phi: &BpFunctional,
    fam: &HoloFamily,
    space: &FiniteMeasureSpace,
    p: Exponent,
    shrink: f64,
    density: usize,
) -> Result<CheckReport> {
    let lhs = space.lp_norm(&linearize(phi, fam, space)?, p)?;
    let grid_sup = fam.grid_sup_lp_norm(space, p, shrink, density)?;
    let node_sup = phi
        .nodes()
        .iter()
        .map(|z| fam.vector(z, space).and_then(|v| space.lp_norm(&v, p)))
        .try_fold(0.0, |acc: f64, v| v.map(|v| acc.max(v)))?;
    let rhs = phi.total_variation() * grid_sup.max(node_sup);
    let residual = if rhs > 0.0 { (lhs - rhs).max(0.0) / rhs } else { lhs };
    Ok(CheckReport::new("norm_bound", &fam.label, &phi.label, lhs, rhs, residual, tol::NORM_BOUND).with_p(p))
}

/// Weighted `L²` distance of `φ_F` from `span {F(z_k)}`, by a minimum-norm
/// least-squares solve. `lhs` is `‖φ_F‖_2`, `rhs` the norm of its
/// projection.
pub fn span_residual(
    phi: &BpFunctional,
    fam: &HoloFamily,
    space: &FiniteMeasureSpace,
    samples: &[Vec<Complex64>],
) -> Result<CheckReport> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("span residual needs at least one sample point".into()));
    }
    let target = linearize(phi, fam, space)?;
    let sqrt_w: Vec<f64> = space.atoms().iter().map(|a| a.weight.sqrt()).collect();
    let columns = samples
        .iter()
        .map(|z| fam.vector(z, space))
        .collect::<Result<Vec<_>>>()?;
    let m = space.len();
    let a = DMatrix::from_fn(m, columns.len(), |i, k| columns[k].values()[i] * sqrt_w[i]);
    let b = DVector::from_fn(m, |i, _| target.values()[i] * sqrt_w[i]);
    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let cutoff = SPAN_RANK_CUTOFF * sigma_max;
    let (residual, projection) = if sigma_max == 0.0 {
        (b.norm(), 0.0)
    } else {
        let x = svd
            .solve(&b, cutoff)
            .map_err(|e| Error::InvalidParameter(format!("least squares failed: {e}")))?;
        let fitted = &a * x;
        ((&fitted - &b).norm(), fitted.norm())
    };
    Ok(CheckReport::new("span", &fam.label, &phi.label, b.norm(), projection, residual, tol::SPAN))
}

/// Singular values below this fraction of the largest are treated as zero.
const SPAN_RANK_CUTOFF: f64 = 1e-13;

/// Derivative profiles of one order on a region grid (univariate families).
#[derive(Clone, Debug, Serialize)]
pub struct MattnerOrder {
    pub order: usize,
    /// `t_i ↦ max_z |D^k f(z, t_i)|`, by Cauchy quadrature.
    pub profile: Vec<f64>,
    /// `max_z Σ_i |D^k f(z, t_i)| μ_i`, by Cauchy quadrature.
    pub integral_sup: f64,
    /// The same supremum from the closed-form derivatives.
    pub integral_sup_exact: f64,
}

/// Profiles for orders `0..=max_order` on `grid`. Each derivative is a
/// Cauchy derivative on the circle about the grid point of radius
/// `0.95 (R - |z - center|)`, with `n` nodes.
pub fn mattner_profile(
    fam: &HoloFamily,
    space: &FiniteMeasureSpace,
    max_order: usize,
    grid: &[Vec<Complex64>],
    n: usize,
) -> Result<Vec<MattnerOrder>> {
    if fam.dim() != 1 {
        return Err(Error::InvalidParameter(format!(
            "derivative profiles are univariate, family has dimension {}",
            fam.dim()
        )));
    }
    grid.iter().try_for_each(|z| fam.domain.require_contains(z))?;
    let (center, big_r) = (fam.domain.center()[0], fam.domain.radius()[0]);
    (0..=max_order)
        .map(|order| {
            let alpha = MultiIndex::new(vec![order]);
            let mut profile = vec![0.0f64; space.len()];
            let mut integral_sup: f64 = 0.0;
            let mut integral_sup_exact: f64 = 0.0;
            for z in grid {
                let r = 0.95 * (big_r - (z[0] - center).norm());
                let mut quad_terms = Vec::with_capacity(space.len());
                let mut exact_terms = Vec::with_capacity(space.len());
                for (i, atom) in space.atoms().iter().enumerate() {
                    let d = cauchy_derivative(fam.slice(atom), z, &alpha, &[r], n)?.norm();
                    profile[i] = profile[i].max(d);
                    quad_terms.push(d * atom.weight);
                    exact_terms.push(fam.derivative(z, &alpha, atom)?.norm() * atom.weight);
                }
                integral_sup = integral_sup.max(sum::pairwise_real(&quad_terms));
                integral_sup_exact = integral_sup_exact.max(sum::pairwise_real(&exact_terms));
            }
            Ok(MattnerOrder {
                order,
                profile,
                integral_sup,
                integral_sup_exact,
            })
        })
        .collect()
}

/// One report per order: quadrature against closed-form integral suprema,
/// relative residual; any non-finite value fails.
pub fn mattner_reports(fam: &HoloFamily, orders: &[MattnerOrder], n: usize) -> Vec<CheckReport> {
    orders
        .iter()
        .map(|o| {
            let finite = o.integral_sup.is_finite()
                && o.integral_sup_exact.is_finite()
                && o.profile.iter().all(|v| v.is_finite());
            let residual = if finite {
                (o.integral_sup - o.integral_sup_exact).abs() / o.integral_sup_exact.max(1.0)
            } else {
                f64::INFINITY
            };
            CheckReport::new(
                "mattner_profile",
                &fam.label,
                format!("derivative[{}]", o.order),
                o.integral_sup,
                o.integral_sup_exact,
                residual,
                tol::MATTNER,
            )
            .with_alpha(&MultiIndex::new(vec![o.order]))
            .with_n(n)
        })
        .collect()
}

/// Seeded duals on the unit sphere of `L^q`.
pub fn random_duals(space: &FiniteMeasureSpace, q: Exponent, count: usize, seed: u64) -> Result<Vec<LpVector>> {
    let mut rng = sampling::rng(seed);
    (0..count).map(|_| sampling::unit_dual(&mut rng, space, q)).collect()
}
