//! Polydisc geometry and tensor-product trapezoidal rules on the
//! distinguished boundary.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum;

/// Product of `d` open discs `∏_j Ball(center_j; radius_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolydisc")]
pub struct Polydisc {
    center: Vec<Complex64>,
    radius: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPolydisc {
    center: Vec<Complex64>,
    radius: Vec<f64>,
}

impl TryFrom<RawPolydisc> for Polydisc {
    type Error = Error;

    fn try_from(raw: RawPolydisc) -> Result<Self> {
        Polydisc::new(raw.center, raw.radius)
    }
}

impl Polydisc {
    pub fn new(center: Vec<Complex64>, radius: Vec<f64>) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidPolydisc("dimension must be at least 1".into()));
        }
        if center.len() != radius.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                got: radius.len(),
            });
        }
        if let Some(r) = radius.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::InvalidPolydisc(format!("radius {r} is not positive and finite")));
        }
        if center.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidPolydisc("center must be finite".into()));
        }
        Ok(Self { center, radius })
    }

    /// Unit polydisc centered at the origin.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); dim], vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[Complex64] {
        &self.center
    }

    pub fn radius(&self) -> &[f64] {
        &self.radius
    }

    pub fn min_radius(&self) -> f64 {
        self.radius.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `|z_j - a_j| < shrink * r_j` for every coordinate.
    pub fn contains(&self, z: &[Complex64], shrink: f64) -> Result<bool> {
        self.check_dim(z)?;
        check_shrink(shrink)?;
        Ok(z
            .iter()
            .zip(&self.center)
            .zip(&self.radius)
            .all(|((zj, aj), rj)| (zj - aj).norm() < shrink * rj))
    }

    /// Errors with [`Error::OutsideDomain`] unless `contains(z, 1)`.
    pub fn require_contains(&self, z: &[Complex64]) -> Result<()> {
        if self.contains(z, 1.0)? {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                point: format_point(z),
                domain: self.to_string(),
            })
        }
    }

    /// Concentric polydisc with every radius multiplied by `shrink`.
    pub fn shrunk(&self, shrink: f64) -> Result<Self> {
        check_shrink(shrink)?;
        Ok(Self {
            center: self.center.clone(),
            radius: self.radius.iter().map(|r| r * shrink).collect(),
        })
    }

    /// Whether the closed polydisc `(center, radius)` sits inside `self`.
    pub fn contains_closed(&self, center: &[Complex64], radius: &[f64]) -> Result<bool> {
        self.check_dim(center)?;
        if radius.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: radius.len(),
            });
        }
        Ok((0..self.dim()).all(|j| (center[j] - self.center[j]).norm() + radius[j] < self.radius[j]))
    }

    pub(crate) fn check_dim(&self, z: &[Complex64]) -> Result<()> {
        if z.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            })
        }
    }
}

impl fmt::Display for Polydisc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "polydisc(center {}, radius {:?})", format_point(&self.center), self.radius)
    }
}

fn check_shrink(shrink: f64) -> Result<()> {
    if shrink > 0.0 && shrink <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidShrink(shrink))
    }
}

pub(crate) fn format_point(z: &[Complex64]) -> String {
    let parts: Vec<String> = z.iter().map(|c| format!("{}{:+}i", c.re, c.im)).collect();
    format!("({})", parts.join(", "))
}

/// A multi-index `α ∈ ℕ_0^d`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        Self(entries)
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max_entry(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `α! = ∏_j α_j!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    /// All multi-indices of dimension `dim` with `|α| <= max_order`, in
    /// graded order (by `|α|`, then lexicographically).
    pub fn up_to_order(dim: usize, max_order: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for order in 0..=max_order {
            let mut current = vec![0; dim];
            compositions(order, 0, &mut current, &mut out);
        }
        out
    }
}

fn compositions(remaining: usize, pos: usize, current: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for k in (0..=remaining).rev() {
        current[pos] = k;
        compositions(remaining - k, pos + 1, current, out);
    }
    current[pos] = 0;
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `exp(2πi k/n)`, exact at multiples of a quarter turn.
pub(crate) fn unit_root(k: usize, n: usize) -> Complex64 {
    let k = k % n;
    if (4 * k).is_multiple_of(n) {
        return match 4 * k / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let (s, c) = (TAU * k as f64 / n as f64).sin_cos();
    Complex64::new(c, s)
}

/// Tensor-product trapezoidal rule on the distinguished boundary
/// `∏_j {|w_j - a_j| = r_j}` with `n` equispaced nodes per variable.
///
/// Tensor nodes are enumerated with the first variable varying fastest.
#[derive(Clone, Debug)]
pub struct TorusQuadrature {
    center: Vec<Complex64>,
    radius: Vec<f64>,
    n: usize,
    /// `w_{j,k} - a_j = r_j exp(2πi k/n)`, one row per variable.
    offsets: Vec<Vec<Complex64>>,
}

impl TorusQuadrature {
    pub const MIN_NODES: usize = 4;

    pub fn new(polydisc: &Polydisc, n: usize) -> Result<Self> {
        Self::with_center(polydisc.center(), polydisc.radius(), n)
    }

    pub fn with_center(center: &[Complex64], radius: &[f64], n: usize) -> Result<Self> {
        if n < Self::MIN_NODES {
            return Err(Error::TooFewNodes { n, min: Self::MIN_NODES });
        }
        let polydisc = Polydisc::new(center.to_vec(), radius.to_vec())?;
        let offsets = polydisc
            .radius
            .iter()
            .map(|&r| (0..n).map(|k| unit_root(k, n) * r).collect())
            .collect();
        Ok(Self {
            center: polydisc.center,
            radius: polydisc.radius,
            n,
            offsets,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn nodes_per_variable(&self) -> usize {
        self.n
    }

    pub fn center(&self) -> &[Complex64] {
        &self.center
    }

    pub fn radius(&self) -> &[f64] {
        &self.radius
    }

    /// Total number of tensor nodes, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The `n` nodes `w_{j,k}` of variable `j`.
    pub fn variable_nodes(&self, j: usize) -> Vec<Complex64> {
        self.offsets[j].iter().map(|o| self.center[j] + o).collect()
    }

    /// `w_{j,k} - a_j` for variable `j`.
    pub fn variable_offsets(&self, j: usize) -> &[Complex64] {
        &self.offsets[j]
    }

    /// Per-variable node indices of tensor node `index`.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        (0..self.dim())
            .map(|_| {
                let k = index % self.n;
                index /= self.n;
                k
            })
            .collect()
    }

    pub fn point(&self, index: usize) -> Vec<Complex64> {
        self.digits(index)
            .into_iter()
            .enumerate()
            .map(|(j, k)| self.center[j] + self.offsets[j][k])
            .collect()
    }

    pub fn points(&self) -> Vec<Vec<Complex64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Tensor product of per-variable weight rows: entry `i` is
    /// `∏_j rows[j][digits(i)_j]`.
    pub fn tensor_weights(&self, rows: &[Vec<Complex64>]) -> Vec<Complex64> {
        debug_assert_eq!(rows.len(), self.dim());
        let mut out = vec![Complex64::new(1.0, 0.0)];
        for row in rows {
            debug_assert_eq!(row.len(), self.n);
            // first variable fastest: the new variable becomes the slowest digit
            out = row.iter().flat_map(|w| out.iter().map(move |acc| acc * w)).collect();
        }
        out
    }

    /// Normalized torus mean `n^{-d} Σ_k g(w_k)`.
    pub fn mean<G>(&self, g: G) -> Complex64
    where
        G: Fn(&[Complex64]) -> Complex64,
    {
        let values: Vec<Complex64> = self.points().iter().map(|w| g(w)).collect();
        sum::pairwise(&values) / self.len() as f64
    }

    /// Discretized `(2πi)^{-d} ∮…∮ g(w) dw_1…dw_d`.
    pub fn contour_integral<G>(&self, g: G) -> Complex64
    where
        G: Fn(&[Complex64]) -> Complex64,
    {
        let n = self.n as f64;
        let rows: Vec<Vec<Complex64>> = self.offsets.iter().map(|o| o.iter().map(|w| w / n).collect()).collect();
        let weights = self.tensor_weights(&rows);
        let values: Vec<Complex64> = self
            .points()
            .iter()
            .zip(&weights)
            .map(|(w, c)| c * g(w))
            .collect();
        sum::pairwise(&values)
    }

    /// Raw trapezoidal Cauchy-kernel weights at `z`:
    /// `∏_j (w_j - a_j) / (n (w_j - z_j))`.
    pub fn cauchy_kernel_rows(&self, z: &[Complex64]) -> Vec<Vec<Complex64>> {
        let n = self.n as f64;
        self.offsets
            .iter()
            .enumerate()
            .map(|(j, row)| {
                row.iter()
                    .map(|o| o / (n * (self.center[j] + o - z[j])))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn contains_examples() {
        let p = Polydisc::unit(1).unwrap();
        assert!(p.contains(&[c(0.5, 0.0)], 1.0).unwrap());
        assert!(!p.contains(&[c(1.0, 0.0)], 1.0).unwrap());
        assert!(!p.contains(&[c(0.5, 0.0)], 0.4).unwrap());
    }

    #[test]
    fn contains_rejects_bad_input() {
        let p = Polydisc::unit(2).unwrap();
        assert!(matches!(p.contains(&[c(0.0, 0.0)], 1.0), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(p.contains(&[c(0.0, 0.0); 2], 0.0), Err(Error::InvalidShrink(_))));
        assert!(matches!(p.contains(&[c(0.0, 0.0); 2], 1.5), Err(Error::InvalidShrink(_))));
    }

    #[test]
    fn polydisc_validation() {
        assert!(Polydisc::new(vec![], vec![]).is_err());
        assert!(Polydisc::new(vec![c(0.0, 0.0)], vec![0.0]).is_err());
        assert!(Polydisc::new(vec![c(0.0, 0.0)], vec![-1.0]).is_err());
        assert!(Polydisc::new(vec![c(0.0, 0.0)], vec![1.0, 2.0]).is_err());
        let json = r#"{"center": [[0.5, 0.0]], "radius": [0.0]}"#;
        assert!(serde_json::from_str::<Polydisc>(json).is_err());
    }

    #[test]
    fn fourth_roots_of_unity() {
        let q = TorusQuadrature::new(&Polydisc::unit(1).unwrap(), 4).unwrap();
        assert_eq!(q.variable_nodes(0), vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]);
    }

    #[test]
    fn tensor_count_and_order() {
        let p = Polydisc::new(vec![c(0.1, 0.0), c(0.0, -0.2)], vec![1.0, 0.5]).unwrap();
        let q = TorusQuadrature::new(&p, 8).unwrap();
        assert_eq!(q.len(), 64);
        assert_eq!(q.points().len(), 64);
        assert_eq!(q.digits(9), vec![1, 1]);
        assert_eq!(q.point(1)[1], q.point(0)[1]);
    }

    #[test]
    fn too_few_nodes() {
        let p = Polydisc::unit(1).unwrap();
        assert!(matches!(TorusQuadrature::new(&p, 3), Err(Error::TooFewNodes { n: 3, .. })));
    }

    #[test]
    fn mean_of_identity_vanishes() {
        let q = TorusQuadrature::new(&Polydisc::unit(1).unwrap(), 16).unwrap();
        assert!(q.mean(|w| w[0]).norm() < 1e-15);
    }

    #[test]
    fn monomials_integrate_to_zero() {
        let p = Polydisc::new(vec![c(0.3, -0.1), c(-0.2, 0.4)], vec![2.0, 0.7]).unwrap();
        let n = 12;
        let q = TorusQuadrature::new(&p, n).unwrap();
        for j in 0..2 {
            let (a, r) = (p.center()[j], p.radius()[j]);
            for m in 1..n as i32 {
                let v = q.mean(|w| (w[j] - a).powi(m));
                assert!(v.norm() < 1e-14 * r.powi(m), "j={j} m={m} v={v}");
            }
            // m = n aliases onto the constant term
            let v = q.mean(|w| (w[j] - a).powi(n as i32));
            assert!((v - r.powi(n as i32)).norm() < 1e-12 * r.powi(n as i32));
        }
    }

    #[test]
    fn nodes_on_distinguished_boundary() {
        let p = Polydisc::new(vec![c(1.0, 2.0), c(-3.0, 0.5)], vec![0.25, 4.0]).unwrap();
        let q = TorusQuadrature::new(&p, 37).unwrap();
        for w in q.points() {
            for ((wj, cj), rj) in w.iter().zip(p.center()).zip(p.radius()) {
                let dev = ((wj - cj).norm() - rj).abs();
                assert!(dev < 1e-14 * rj.max(1.0), "dev {dev}");
            }
        }
    }

    #[test]
    fn contour_integral_of_inverse_offset() {
        // (2πi)^{-1} ∮ dw / (w - a) = 1
        let p = Polydisc::new(vec![c(0.5, 0.5)], vec![0.3]).unwrap();
        let q = TorusQuadrature::new(&p, 8).unwrap();
        let v = q.contour_integral(|w| 1.0 / (w[0] - c(0.5, 0.5)));
        assert!((v - 1.0).norm() < 1e-14);
    }

    #[test]
    fn multi_index_enumeration() {
        let all = MultiIndex::up_to_order(2, 2);
        let expect: Vec<MultiIndex> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ]
        .into_iter()
        .map(MultiIndex::new)
        .collect();
        assert_eq!(all, expect);
        assert_eq!(MultiIndex::new(vec![2, 3]).factorial(), 12.0);
        assert_eq!(MultiIndex::new(vec![2, 3]).order(), 5);
    }

    proptest::proptest! {
        #[test]
        fn contains_is_monotone_in_shrink(
            re in -2.0f64..2.0, im in -2.0f64..2.0,
            s1 in 0.01f64..1.0, s2 in 0.01f64..1.0,
        ) {
            let p = Polydisc::new(vec![c(0.1, -0.2)], vec![1.3]).unwrap();
            let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            let z = [c(re, im)];
            if p.contains(&z, lo).unwrap() {
                proptest::prop_assert!(p.contains(&z, hi).unwrap());
            }
        }
    }
}
