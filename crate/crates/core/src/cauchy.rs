//! Cauchy-integral machinery on polydiscs: evaluation, derivatives, Taylor
//! coefficients, the Schwarz-type difference bounds and order bounds built
//! from Taylor coefficient magnitudes.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::domain::{unit_root, MultiIndex, Polydisc, TorusQuadrature};
use crate::error::{Error, Result};
use crate::family::HoloFamily;
use crate::measure::{FiniteMeasureSpace, LpVector};
use crate::sampling;
use crate::sum;

/// Cauchy formula on the torus of `contour`, discretized with `n` nodes per
/// variable.
///
/// The trapezoidal sum is divided by the same sum applied to the constant
/// function 1 (barycentric form). This is exact for polynomials of degree
/// `< n` in every variable; for other analytic integrands the error decays
/// geometrically in `n`.
pub fn cauchy_eval<F>(f: F, contour: &Polydisc, z: &[Complex64], n: usize) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Complex64,
{
    contour.require_contains(z)?;
    let quad = TorusQuadrature::new(contour, n)?;
    let rows = quad.cauchy_kernel_rows(z);
    let norm: Complex64 = rows.iter().map(|row| sum::pairwise(row)).product();
    let weights = quad.tensor_weights(&rows);
    let terms: Vec<Complex64> = quad
        .points()
        .iter()
        .zip(&weights)
        .map(|(w, c)| c * f(w))
        .collect();
    Ok(sum::pairwise(&terms) / norm)
}

/// Nodes and weights of the rule `g ↦ D^α g(center)` obtained from the
/// Cauchy formula for derivatives on the torus `(center, radius)`.
///
/// `α!` is folded into the weights so that applying the rule as a
/// functional and calling [`cauchy_derivative`] share one code path.
pub(crate) fn derivative_rule(
    center: &[Complex64],
    alpha: &MultiIndex,
    radius: &[f64],
    n: usize,
) -> Result<(Vec<Vec<Complex64>>, Vec<Complex64>)> {
    if alpha.dim() != center.len() {
        return Err(Error::DimensionMismatch {
            expected: center.len(),
            got: alpha.dim(),
        });
    }
    let min = (alpha.max_entry() + 2).max(TorusQuadrature::MIN_NODES);
    if n < min {
        return Err(Error::TooFewNodes { n, min });
    }
    let quad = TorusQuadrature::with_center(center, radius, n)?;
    let nf = n as f64;
    let rows: Vec<Vec<Complex64>> = alpha
        .entries()
        .iter()
        .zip(radius)
        .enumerate()
        .map(|(j, (&a, &r))| {
            let scale = if j == 0 { alpha.factorial() } else { 1.0 } / (nf * r.powi(a as i32));
            // (w - a)^{-α_j} = r^{-α_j} exp(-2πi α_j k / n)
            (0..n).map(|k| unit_root(n - (a * k) % n, n) * scale).collect()
        })
        .collect();
    Ok((quad.points(), quad.tensor_weights(&rows)))
}

/// `D^α f(center) = α!/(2πi)^d ∮ f(w) / ∏_j (w_j - a_j)^{α_j + 1} dw`
/// on the torus `(center, radius)` with `n` nodes per variable.
///
/// Exact for polynomials whose degree in each variable is below
/// `n + min_j α_j`.
pub fn cauchy_derivative<F>(f: F, center: &[Complex64], alpha: &MultiIndex, radius: &[f64], n: usize) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Complex64,
{
    let (nodes, weights) = derivative_rule(center, alpha, radius, n)?;
    Ok(apply_rule(&nodes, &weights, f))
}

pub(crate) fn apply_rule<F>(nodes: &[Vec<Complex64>], weights: &[Complex64], f: F) -> Complex64
where
    F: Fn(&[Complex64]) -> Complex64,
{
    let terms: Vec<Complex64> = nodes.iter().zip(weights).map(|(z, w)| w * f(z)).collect();
    sum::pairwise(&terms)
}

/// Taylor coefficients `c_m = D^m f(a) / m!` for `0 <= m_j <= order`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaylorTable {
    center: Vec<Complex64>,
    radius: Vec<f64>,
    order: usize,
    /// `(order+1)^d` entries, first variable fastest.
    coeffs: Vec<Complex64>,
}

impl TaylorTable {
    pub fn new(center: Vec<Complex64>, radius: Vec<f64>, order: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let want = (order + 1).pow(center.len() as u32);
        if coeffs.len() != want {
            return Err(Error::InvalidParameter(format!(
                "Taylor table needs {want} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self {
            center,
            radius,
            order,
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn center(&self) -> &[Complex64] {
        &self.center
    }

    pub fn radius(&self) -> &[f64] {
        &self.radius
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Multi-index of flat entry `idx`.
    pub fn index(&self, mut idx: usize) -> MultiIndex {
        let side = self.order + 1;
        MultiIndex::new(
            (0..self.dim())
                .map(|_| {
                    let m = idx % side;
                    idx /= side;
                    m
                })
                .collect(),
        )
    }

    pub fn coefficient(&self, m: &MultiIndex) -> Option<Complex64> {
        if m.dim() != self.dim() || m.max_entry() > self.order {
            return None;
        }
        let side = self.order + 1;
        let flat = m.entries().iter().rev().fold(0, |acc, &k| acc * side + k);
        Some(self.coeffs[flat])
    }

    /// Truncated power series `Σ_m c_m (z - a)^m`.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let terms: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let m = self.index(idx);
                c * m
                    .entries()
                    .iter()
                    .zip(z.iter().zip(&self.center))
                    .map(|(&k, (z, a))| (z - a).powu(k as u32))
                    .product::<Complex64>()
            })
            .collect();
        sum::pairwise(&terms)
    }
}

/// Taylor coefficients up to `order` per variable, by a discrete Fourier
/// transform of samples on the torus `(center, radius)` with `n` nodes
/// per variable. Requires `n > 2 order`.
pub fn taylor_coefficients<F>(f: F, center: &[Complex64], radius: &[f64], order: usize, n: usize) -> Result<TaylorTable>
where
    F: Fn(&[Complex64]) -> Complex64,
{
    if n <= 2 * order {
        return Err(Error::TooFewNodes { n, min: 2 * order + 1 });
    }
    let quad = TorusQuadrature::with_center(center, radius, n)?;
    let d = quad.dim();
    let mut data: Vec<Complex64> = quad.points().iter().map(|w| f(w)).collect();
    let mut dims = vec![n; d];
    let side = order + 1;
    let twiddle: Vec<Vec<Complex64>> = (0..side)
        .map(|m| (0..n).map(|k| unit_root(n - (m * k) % n, n)).collect())
        .collect();

    for axis in 0..d {
        let stride: usize = dims[..axis].iter().product();
        let outer: usize = dims[axis + 1..].iter().product();
        let mut next_dims = dims.clone();
        next_dims[axis] = side;
        let mut next = vec![Complex64::new(0.0, 0.0); stride * side * outer];
        let scale = 1.0 / n as f64;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for o in 0..outer {
            for s in 0..stride {
                for (m, tw) in twiddle.iter().enumerate() {
                    for (k, b) in buf.iter_mut().enumerate() {
                        *b = data[s + stride * (k + n * o)] * tw[k];
                    }
                    let r_pow = radius[axis].powi(m as i32);
                    next[s + stride * (m + side * o)] = sum::pairwise(&buf) * scale / r_pow;
                }
            }
        }
        data = next;
        dims = next_dims;
    }
    TaylorTable::new(center.to_vec(), radius.to_vec(), order, data)
}

/// Largest value of `|f(z) - f(a)| - (2/r) ‖f‖_∞ |z - a|` over `samples`
/// seeded uniform points of `Ball(a; r)`. `‖f‖_∞` is estimated on a dense
/// grid of the circle `|z - a| = r`, so `f` must be continuous on the
/// closed ball.
pub fn schwarz_check<F>(f: F, center: Complex64, radius: f64, samples: usize, seed: u64) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("at least one sample is required".into()));
    }
    let sup = sampling::kronecker_angles(SCHWARZ_GRID)
        .into_iter()
        .map(|theta| f(center + Complex64::from_polar(radius, theta)).norm())
        .fold(0.0, f64::max);
    let fa = f(center);
    let mut rng = sampling::rng(seed);
    let violation = (0..samples)
        .map(|_| {
            let z = sampling::point_in_disc(&mut rng, center, radius);
            (f(z) - fa).norm() - 2.0 / radius * sup * (z - center).norm()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(violation)
}

const SCHWARZ_GRID: usize = 512;

/// Multivariate difference bound from telescoping the Schwarz estimate
/// one coordinate at a time:
/// `|f(z,t) - f(a,t)| <= Σ_j (2/r_j) ‖f_t‖_∞ |z_j - a_j|` on the polydisc
/// `(a, r)`.
///
/// For each of `samples` pairs, `a` is drawn from the domain shrunk by
/// `shrink` and `z` from the polydisc `(a, r)` with
/// `r_j = 0.95 (R_j - |a_j - center_j|)`. The sup-norm of every slice is
/// estimated on a `density^d` torus grid. Returns the largest violation
/// over pairs and atoms (nonpositive when the bound holds).
pub fn telescoping_check(
    fam: &HoloFamily,
    space: &FiniteMeasureSpace,
    shrink: f64,
    samples: usize,
    density: usize,
    seed: u64,
) -> Result<f64> {
    let domain = &fam.domain;
    domain.shrunk(shrink)?;
    let mut rng = sampling::rng(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let a = sampling::point_in_polydisc(&mut rng, domain, shrink);
        let r: Vec<f64> = (0..domain.dim())
            .map(|j| 0.95 * (domain.radius()[j] - (a[j] - domain.center()[j]).norm()))
            .collect();
        let local = Polydisc::new(a.clone(), r.clone())?;
        let z: Vec<Complex64> = (0..domain.dim())
            .map(|j| a[j] + Complex64::from_polar(r[j] * rng.gen::<f64>(), std::f64::consts::TAU * rng.gen::<f64>()))
            .collect();
        let grid = sampling::torus_grid(&local, 1.0, density);
        for atom in space.atoms() {
            let slice = fam.slice(atom);
            let sup = grid.iter().map(|w| slice(w).norm()).fold(0.0, f64::max);
            let bound: f64 = (0..domain.dim()).map(|j| 2.0 / r[j] * sup * (z[j] - a[j]).norm()).sum();
            worst = worst.max((slice(&z) - slice(&a)).norm() - bound);
        }
    }
    Ok(worst)
}

/// Componentwise majorant `|F(z)| <= u + tail` on the closed polydisc
/// `(a, shrink·r)`.
#[derive(Clone, Debug, Serialize)]
pub struct OrderBound {
    /// `u_i = Σ_{m_j <= M} |c_m(t_i)| ∏_j (shrink·r_j)^{m_j}`
    pub u: LpVector,
    /// Geometric majorant of the omitted coefficients, maximized over atoms.
    pub tail: f64,
    /// Largest fitted decay ratio `q` over atoms.
    pub ratio: f64,
    /// Whether every atom's high-order coefficients were at rounding level,
    /// in which case the table is treated as exact and contributes no tail.
    pub truncated: bool,
}

impl OrderBound {
    /// Largest `|F(z)_i| - (u_i + tail)` over `samples` seeded points of the
    /// closed polydisc `(a, shrink·r)`; odd samples lie on its
    /// distinguished boundary.
    #[allow(clippy::too_many_arguments)]
    pub fn max_violation(
        &self,
        fam: &HoloFamily,
        space: &FiniteMeasureSpace,
        center: &[Complex64],
        radius: &[f64],
        shrink: f64,
        samples: usize,
        seed: u64,
    ) -> Result<f64> {
        let mut rng = sampling::rng(seed);
        let mut worst = f64::NEG_INFINITY;
        for k in 0..samples {
            let z: Vec<Complex64> = center
                .iter()
                .zip(radius)
                .map(|(&a, &r)| {
                    let rad = if k % 2 == 1 { 1.0 } else { rng.gen::<f64>().sqrt() };
                    a + Complex64::from_polar(shrink * r * rad, std::f64::consts::TAU * rng.gen::<f64>())
                })
                .collect();
            for (atom, u) in space.atoms().iter().zip(self.u.values()) {
                let v = fam.slice(atom)(&z).norm();
                worst = worst.max(v - (u.re + self.tail));
            }
        }
        Ok(worst)
    }
}

/// Order bound for `F` on the closed polydisc `(a, shrink·r)` from Taylor
/// coefficients about `a` up to `order` per variable.
///
/// The omitted coefficients are majorized by fitting `|c_m| r^m <= C q^{|m|}`
/// on the last third of total degrees `s <= order`; the tail is then
/// `Σ_{m outside the table} C (q·shrink)^{|m|}`. The fit is a heuristic
/// (the series only guarantees absolute convergence) and fails with
/// [`Error::TailDiverges`] when `q·shrink >= 1`.
pub fn order_bound(
    fam: &HoloFamily,
    space: &FiniteMeasureSpace,
    center: &[Complex64],
    radius: &[f64],
    order: usize,
    shrink: f64,
) -> Result<OrderBound> {
    if !(shrink > 0.0 && shrink <= 1.0) {
        return Err(Error::InvalidShrink(shrink));
    }
    if order == 0 {
        return Err(Error::InvalidParameter("order bound needs at least order 1".into()));
    }
    if order > MAX_ORDER {
        return Err(Error::InvalidParameter(format!("order {order} exceeds the supported maximum {MAX_ORDER}")));
    }
    fam.domain.check_dim(center)?;
    fam.validate_for(space)?;
    let n = 2 * order + 2;
    let d = center.len();
    let mut u = Vec::with_capacity(space.len());
    let mut tail: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    let mut truncated = true;
    for atom in space.atoms() {
        let table = taylor_coefficients(fam.slice(atom), center, radius, order, n)?;
        // normalized magnitudes |c_m| r^m
        let mags: Vec<(usize, f64)> = table
            .coeffs()
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let m = table.index(idx);
                let rm: f64 = m.entries().iter().zip(radius).map(|(&k, r)| r.powi(k as i32)).product();
                (m.order(), c.norm() * rm)
            })
            .collect();
        let ui = table
            .coeffs()
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let m = table.index(idx);
                c.norm() * m.entries().iter().zip(radius).map(|(&k, r)| (shrink * r).powi(k as i32)).product::<f64>()
            })
            .collect::<Vec<_>>();
        u.push(Complex64::new(sum::pairwise_real(&ui), 0.0));

        match fit_geometric(&mags, order) {
            Fit::Negligible => {}
            Fit::Geometric { constant, q } => {
                truncated = false;
                let x = q * shrink;
                if x >= 1.0 {
                    return Err(Error::TailDiverges { ratio: q, shrink });
                }
                let all = (1.0 - x).powi(-(d as i32));
                let boxed = ((1.0 - x.powi(order as i32 + 1)) / (1.0 - x)).powi(d as i32);
                tail = tail.max(constant * (all - boxed).max(0.0));
                ratio = ratio.max(q);
            }
        }
    }
    Ok(OrderBound {
        u: LpVector::new(u),
        tail,
        ratio,
        truncated,
    })
}

const MAX_ORDER: usize = 128;

/// Relative level below which a normalized coefficient is rounding noise.
const NOISE_FLOOR: f64 = 1e-14;

enum Fit {
    Negligible,
    Geometric { constant: f64, q: f64 },
}

/// Fits `B_s <= C q^s` where `B_s` is the largest normalized magnitude of
/// total degree `s`, using degrees in the last third of `1..=order`.
fn fit_geometric(mags: &[(usize, f64)], order: usize) -> Fit {
    let peak = mags.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    if peak == 0.0 {
        return Fit::Negligible;
    }
    let floor = NOISE_FLOOR * peak;
    let by_degree = |s: usize| {
        mags.iter()
            .filter(|&&(deg, _)| deg == s)
            .map(|&(_, v)| v)
            .fold(0.0, f64::max)
    };
    let start = ((2 * order).div_ceil(3)).max(1);
    let window: Vec<(f64, f64)> = (start..=order)
        .map(|s| (s as f64, by_degree(s)))
        .filter(|&(_, b)| b > floor)
        .collect();
    if window.is_empty() {
        return Fit::Negligible;
    }
    let log_q = if window.len() == 1 {
        let (s, b) = window[0];
        let b0 = by_degree(0).max(floor);
        (b / b0).ln() / s
    } else {
        let k = window.len() as f64;
        let mean_s = window.iter().map(|w| w.0).sum::<f64>() / k;
        let mean_l = window.iter().map(|w| w.1.ln()).sum::<f64>() / k;
        let cov: f64 = window.iter().map(|w| (w.0 - mean_s) * (w.1.ln() - mean_l)).sum();
        let var: f64 = window.iter().map(|w| (w.0 - mean_s).powi(2)).sum();
        cov / var
    };
    let q = log_q.exp();
    let constant = window.iter().map(|&(s, b)| b / q.powf(s)).fold(0.0, f64::max);
    Fit::Geometric { constant, q }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{FamilyKind, PolyTerm};
    use crate::measure::Atom;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit(d: usize) -> Polydisc {
        Polydisc::unit(d).unwrap()
    }

    #[test]
    fn eval_constant() {
        let v = cauchy_eval(|_| c(3.0, -1.0), &unit(2), &[c(0.2, 0.1), c(-0.4, 0.0)], 8).unwrap();
        assert!((v - c(3.0, -1.0)).norm() < 1e-13);
    }

    #[test]
    fn eval_bivariate_monomial() {
        let z = [c(0.3, 0.0), c(0.0, 0.5)];
        let v = cauchy_eval(|w| w[0] * w[0] * w[1], &unit(2), &z, 32).unwrap();
        assert!((v - c(0.0, 0.045)).norm() < 1e-14, "{v}");
    }

    #[test]
    fn eval_rational() {
        let v = cauchy_eval(|w| 1.0 / (2.0 - w[0]), &unit(1), &[c(0.5, 0.0)], 64).unwrap();
        assert!((v - 2.0 / 3.0).norm() < 1e-12);
    }

    #[test]
    fn eval_rejects_boundary_points() {
        assert!(matches!(
            cauchy_eval(|w| w[0], &unit(1), &[c(1.0, 0.0)], 16),
            Err(Error::OutsideDomain { .. })
        ));
        assert!(matches!(cauchy_eval(|w| w[0], &unit(1), &[c(0.0, 0.0)], 3), Err(Error::TooFewNodes { .. })));
    }

    #[test]
    fn eval_converges_geometrically() {
        let f = |w: &[Complex64]| 1.0 / (1.0 - 0.5 * w[0]);
        let z = [Complex64::from_polar(0.5, 0.7)];
        let exact = f(&z);
        let e16 = (cauchy_eval(f, &unit(1), &z, 16).unwrap() - exact).norm();
        let e32 = (cauchy_eval(f, &unit(1), &z, 32).unwrap() - exact).norm();
        assert!(e32 <= e16 / 100.0, "e16 {e16} e32 {e32}");
    }

    #[test]
    fn derivative_examples() {
        let zero1 = [c(0.0, 0.0)];
        let v = cauchy_derivative(|w| w[0].powu(3), &zero1, &MultiIndex::new(vec![3]), &[1.0], 8).unwrap();
        assert!((v - 6.0).norm() < 1e-13);

        let zero2 = [c(0.0, 0.0); 2];
        let v = cauchy_derivative(|w| w[0] * w[1] * w[1], &zero2, &MultiIndex::new(vec![1, 2]), &[1.0, 1.0], 8).unwrap();
        assert!((v - 2.0).norm() < 1e-13);

        let v = cauchy_derivative(|w| w[0].exp(), &zero1, &MultiIndex::new(vec![5]), &[1.0], 32).unwrap();
        assert!((v - 1.0).norm() < 1e-11);
    }

    #[test]
    fn derivative_needs_enough_nodes() {
        let r = cauchy_derivative(|w| w[0], &[c(0.0, 0.0)], &MultiIndex::new(vec![5]), &[1.0], 6);
        assert!(matches!(r, Err(Error::TooFewNodes { n: 6, min: 7 })));
        let r = cauchy_derivative(|w| w[0], &[c(0.0, 0.0)], &MultiIndex::new(vec![1, 1]), &[1.0], 8);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    /// Central differences with one Richardson step, on the real axis
    /// direction of each variable (holomorphic, so equal to ∂/∂z_j).
    fn finite_difference(f: &dyn Fn(&[Complex64]) -> Complex64, a: &[Complex64], alpha: &[usize]) -> Complex64 {
        fn diff(f: &dyn Fn(&[Complex64]) -> Complex64, a: &[Complex64], alpha: &[usize], h: f64) -> Complex64 {
            let Some(j) = alpha.iter().position(|&k| k > 0) else {
                return f(a);
            };
            let mut rest = alpha.to_vec();
            rest[j] -= 1;
            let mut plus = a.to_vec();
            let mut minus = a.to_vec();
            plus[j] += h;
            minus[j] -= h;
            (diff(f, &plus, &rest, h) - diff(f, &minus, &rest, h)) / (2.0 * h)
        }
        let h = 1e-3;
        let coarse = diff(f, a, alpha, h);
        let fine = diff(f, a, alpha, h / 2.0);
        (4.0 * fine - coarse) / 3.0
    }

    #[test]
    fn derivative_matches_finite_differences() {
        type Func = Box<dyn Fn(&[Complex64]) -> Complex64>;
        let funcs: Vec<(&str, Func)> = vec![
            ("exp", Box::new(|w: &[Complex64]| (w[0] + 0.5 * w[1]).exp())),
            ("geo", Box::new(|w: &[Complex64]| 1.0 / ((1.0 - 0.5 * w[0]) * (1.0 - 0.3 * w[1])))),
            ("mix", Box::new(|w: &[Complex64]| (w[0] * w[1]).sin() + w[1].powu(3))),
        ];
        let a = [c(0.1, -0.05), c(-0.2, 0.1)];
        for (name, f) in &funcs {
            for alpha in MultiIndex::up_to_order(2, 2) {
                let q = cauchy_derivative(f, &a, &alpha, &[0.5, 0.5], 64).unwrap();
                let fd = finite_difference(f.as_ref(), &a, alpha.entries());
                assert!((q - fd).norm() <= 1e-5 * q.norm().max(1.0), "{name} {alpha}: {q} vs {fd}");
            }
        }
    }

    #[test]
    fn taylor_examples() {
        let t = taylor_coefficients(|w| w[0].exp(), &[c(0.0, 0.0)], &[1.0], 6, 32).unwrap();
        let mut fact = 1.0;
        for k in 0..=6 {
            if k > 0 {
                fact *= k as f64;
            }
            let ck = t.coefficient(&MultiIndex::new(vec![k])).unwrap();
            assert!((ck - 1.0 / fact).norm() < 1e-12, "k={k}");
        }
        let t = taylor_coefficients(|w| 1.0 / (1.0 - 0.5 * w[0]), &[c(0.0, 0.0)], &[1.0], 10, 64).unwrap();
        for k in 0..=10 {
            let ck = t.coefficient(&MultiIndex::new(vec![k])).unwrap();
            assert!((ck - 0.5f64.powi(k as i32)).norm() < 1e-12);
        }
        assert!(matches!(
            taylor_coefficients(|w| w[0], &[c(0.0, 0.0)], &[1.0], 8, 16),
            Err(Error::TooFewNodes { .. })
        ));
    }

    #[test]
    fn taylor_round_trip_of_tabulated_family() {
        let space = FiniteMeasureSpace::uniform(5).unwrap();
        let fam = crate::family::HoloFamily::preset("tabulated_taylor", &space).unwrap();
        let FamilyKind::TabulatedTaylor { order, entries } = &fam.kind else {
            unreachable!()
        };
        for (atom, entry) in space.atoms().iter().zip(entries) {
            let t = taylor_coefficients(fam.slice(atom), fam.domain.center(), &[0.9], *order, 16).unwrap();
            for (got, want) in t.coeffs().iter().zip(&entry.coeffs) {
                assert!((got - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn taylor_bivariate_polynomial_and_eval() {
        let f = |w: &[Complex64]| 1.0 + 2.0 * w[0] * w[1] * w[1] - c(0.0, 3.0) * w[0].powu(3);
        let a = [c(0.0, 0.0); 2];
        let t = taylor_coefficients(f, &a, &[1.0, 0.5], 3, 8).unwrap();
        assert!((t.coefficient(&MultiIndex::new(vec![1, 2])).unwrap() - 2.0).norm() < 1e-12);
        assert!((t.coefficient(&MultiIndex::new(vec![3, 0])).unwrap() - c(0.0, -3.0)).norm() < 1e-12);
        assert!(t.coefficient(&MultiIndex::new(vec![1, 1])).unwrap().norm() < 1e-12);
        let z = [c(0.2, 0.1), c(-0.3, 0.2)];
        assert!((t.eval(&z) - f(&z)).norm() < 1e-12);
    }

    #[test]
    fn eval_at_center_matches_constant_coefficient() {
        let f = |w: &[Complex64]| (w[0] * c(0.3, 0.2)).exp() / (1.0 - 0.4 * w[0]);
        let a = [c(0.1, 0.1)];
        let contour = Polydisc::new(a.to_vec(), vec![0.5]).unwrap();
        let v = cauchy_eval(f, &contour, &a, 32).unwrap();
        let t = taylor_coefficients(f, &a, &[0.5], 4, 32).unwrap();
        assert!((v - t.coeffs()[0]).norm() < 1e-12);
    }

    #[test]
    fn derivative_equals_factorial_times_coefficient() {
        let space = FiniteMeasureSpace::uniform(4).unwrap();
        for name in ["polynomial2", "geometric2", "exponential2", "separable2", "constant2"] {
            let fam = crate::family::HoloFamily::preset(name, &space).unwrap();
            let a = [c(0.05, 0.0), c(0.0, -0.1)];
            let r = [0.5, 0.5];
            for atom in space.atoms() {
                let t = taylor_coefficients(fam.slice(atom), &a, &r, 4, 32).unwrap();
                for alpha in MultiIndex::up_to_order(2, 4) {
                    let d = cauchy_derivative(fam.slice(atom), &a, &alpha, &r, 32).unwrap();
                    let want = alpha.factorial() * t.coefficient(&alpha).unwrap();
                    assert!((d - want).norm() <= 1e-10 * want.norm().max(1.0), "{name} {alpha}");
                }
            }
        }
    }

    #[test]
    fn schwarz_examples() {
        let v = schwarz_check(|z| z, c(0.0, 0.0), 1.0, 500, 0).unwrap();
        assert!(v <= 0.0);
        let v = schwarz_check(|_| c(2.0, 0.0), c(0.0, 0.0), 1.0, 100, 0).unwrap();
        assert!(v <= 0.0);
        let v = schwarz_check(|z| z * z, c(0.0, 0.0), 1.0, 1000, 0).unwrap();
        assert!(v <= 0.0);
        assert!(schwarz_check(|z| z, c(0.0, 0.0), 0.0, 10, 0).is_err());
    }

    #[test]
    fn telescoping_bound_holds() {
        let space = FiniteMeasureSpace::uniform(4).unwrap();
        let fam = crate::family::HoloFamily::preset("geometric2", &space).unwrap();
        let v = telescoping_check(&fam, &space, 0.5, 40, 16, 1).unwrap();
        assert!(v <= 1e-12, "violation {v}");
    }

    #[test]
    fn order_bound_affine_is_exact() {
        // F(z) = v0 + v1 z with v0 = (1+i, 2), v1 = (3, -1)
        let space = FiniteMeasureSpace::new(vec![Atom::new(c(0.0, 0.0), 1.0), Atom::new(c(1.0, 0.0), 1.0)]).unwrap();
        let fam = crate::family::HoloFamily::new(
            "affine",
            FamilyKind::Polynomial {
                terms: vec![
                    PolyTerm::new(c(1.0, 1.0), 0, vec![0]),
                    PolyTerm::new(c(-(1.0), -1.0), 1, vec![0]),
                    PolyTerm::new(c(2.0, 0.0), 1, vec![0]),
                    PolyTerm::new(c(3.0, 0.0), 0, vec![1]),
                    PolyTerm::new(c(-4.0, 0.0), 1, vec![1]),
                ],
            },
            Polydisc::new(vec![c(0.0, 0.0)], vec![2.0]).unwrap(),
        )
        .unwrap();
        let ob = order_bound(&fam, &space, &[c(0.0, 0.0)], &[1.0], 6, 1.0).unwrap();
        let want = [2f64.sqrt() + 3.0, 2.0 + 1.0];
        for (u, w) in ob.u.values().iter().zip(want) {
            assert!((u.re - w).abs() < 1e-12, "{u} vs {w}");
        }
        assert_eq!(ob.tail, 0.0);
        assert!(ob.truncated);
    }

    #[test]
    fn order_bound_constant() {
        let space = FiniteMeasureSpace::uniform(3).unwrap();
        let fam = crate::family::HoloFamily::preset("constant", &space).unwrap();
        let ob = order_bound(&fam, &space, &[c(0.0, 0.0)], &[0.95], 10, 0.5).unwrap();
        for u in ob.u.values() {
            assert!((u.re - 5f64.sqrt()).abs() < 1e-13);
        }
    }

    #[test]
    fn order_bound_dominates_geometric_family() {
        let space = FiniteMeasureSpace::uniform(16).unwrap();
        let fam = crate::family::HoloFamily::preset("geometric", &space).unwrap();
        let ob = order_bound(&fam, &space, &[c(0.0, 0.0)], &[1.0], 40, 0.5).unwrap();
        let v = ob.max_violation(&fam, &space, &[c(0.0, 0.0)], &[1.0], 0.5, 200, 0).unwrap();
        assert!(v <= 1e-12, "violation {v}");
        assert!(ob.ratio < 2.0);
    }

    #[test]
    fn order_bound_reports_divergent_tail() {
        // the contour |z| = 1.1 encloses the pole at 1/0.95, so the sampled
        // coefficients grow like 1.045^m
        let space = FiniteMeasureSpace::new(vec![Atom::new(c(1.0, 0.0), 1.0)]).unwrap();
        let fam = crate::family::HoloFamily::new(
            "steep",
            FamilyKind::Geometric { beta: vec![c(0.95, 0.0)] },
            Polydisc::new(vec![c(0.0, 0.0)], vec![1.01]).unwrap(),
        )
        .unwrap();
        let r = order_bound(&fam, &space, &[c(0.0, 0.0)], &[1.1], 30, 1.0);
        assert!(matches!(r, Err(Error::TailDiverges { .. })), "{r:?}");
    }
}
