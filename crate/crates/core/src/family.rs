//! Two-variable holomorphic families `f(z, t)` with closed-form values and
//! derivatives.
//!
//! `F(z) = f(z, ·)` is the vector view (one entry per atom) and
//! `f_t = f(·, t)` the scalar slice. Every kind evaluates derivatives from
//! its own closed form, so quadrature results can always be compared with
//! an independent oracle.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{factorial, MultiIndex, Polydisc};
use crate::error::{Error, Result};
use crate::measure::{Atom, Exponent, FiniteMeasureSpace, LpVector};
use crate::sampling;

/// `coef · t^{t_power} · z^{z_powers}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub coef: Complex64,
    #[serde(default)]
    pub t_power: u32,
    pub z_powers: Vec<usize>,
}

impl PolyTerm {
    pub fn new(coef: Complex64, t_power: u32, z_powers: Vec<usize>) -> Self {
        Self { coef, t_power, z_powers }
    }
}

/// Stored Taylor coefficients of `f(·, t)` for one atom parameter, about
/// the domain center. `coeffs` has length `(order+1)^d`, first variable
/// varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorEntry {
    pub param: Complex64,
    pub coeffs: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `f(z, t) = value`
    Constant { value: Complex64 },
    /// `f(z, t) = Σ coef · t^k · z^m`
    Polynomial { terms: Vec<PolyTerm> },
    /// `f(z, t) = ∏_j 1 / (1 - β_j t z_j)`
    Geometric { beta: Vec<Complex64> },
    /// `f(z, t) = exp(t Σ_j s_j z_j)`
    Exponential { scale: Vec<Complex64> },
    /// `f(z, t) = exp(Σ_j s_j z_j) · Σ_k c_k t^k`
    Separable { z_scale: Vec<Complex64>, t_coeffs: Vec<Complex64> },
    /// `f(z, t) = Σ_{m ≤ order} c_m(t) (z - a)^m` with per-atom tables
    TabulatedTaylor { order: usize, entries: Vec<TaylorEntry> },
    /// `f(z, t) = base(z, t) · h(t)` with `h` tabulated per atom parameter
    Modulated { base: Box<FamilyKind>, factors: Vec<(Complex64, Complex64)> },
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Constant { .. } => "constant",
            FamilyKind::Polynomial { .. } => "polynomial",
            FamilyKind::Geometric { .. } => "geometric",
            FamilyKind::Exponential { .. } => "exponential",
            FamilyKind::Separable { .. } => "separable",
            FamilyKind::TabulatedTaylor { .. } => "tabulated_taylor",
            FamilyKind::Modulated { .. } => "modulated",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily")]
pub struct HoloFamily {
    pub label: String,
    #[serde(flatten)]
    pub kind: FamilyKind,
    pub domain: Polydisc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub declared_bound: Option<f64>,
}

#[derive(Deserialize)]
struct RawFamily {
    #[serde(default)]
    label: Option<String>,
    #[serde(flatten)]
    kind: FamilyKind,
    domain: Polydisc,
    #[serde(default)]
    declared_bound: Option<f64>,
}

impl TryFrom<RawFamily> for HoloFamily {
    type Error = Error;

    fn try_from(raw: RawFamily) -> Result<Self> {
        let label = raw.label.unwrap_or_else(|| raw.kind.name().to_string());
        let mut fam = HoloFamily::new(label, raw.kind, raw.domain)?;
        fam.declared_bound = raw.declared_bound;
        Ok(fam)
    }
}

/// Names accepted by [`HoloFamily::preset`].
pub const PRESETS: &[(&str, &str)] = &[
    ("constant", "f = 2 + i on the unit disc"),
    ("constant2", "f = 2 + i on the unit bidisc"),
    ("polynomial", "f = t z^2 + (0.5 - 0.25i) t^2 z + 1"),
    ("polynomial2", "f = t z1^2 z2 + 0.3i t^2 z1 z2^2 + z2 - 0.5 t"),
    ("affine", "f = 1 + t z"),
    ("geometric", "f = 1 / (1 - 0.5 t z)"),
    ("geometric2", "f = 1 / ((1 - 0.5 t z1)(1 - 0.3 t z2))"),
    ("exponential", "f = exp(t z)"),
    ("exponential2", "f = exp(t (z1 - 0.5 z2))"),
    ("separable", "f = exp(0.8 z) (1 + 0.5 t^2)"),
    ("separable2", "f = exp(0.8 z1 + 0.4i z2) (1 + 0.5 t^2)"),
    ("tabulated_taylor", "degree-6 Taylor table per atom, c_m(t) = 0.5^m e^{i(m + t)} / (1 + m)"),
];

/// The five closed-form kinds, one preset each per dimension.
pub const BUILTIN_KINDS_1D: &[&str] = &["constant", "polynomial", "geometric", "exponential", "separable"];
pub const BUILTIN_KINDS_2D: &[&str] = &["constant2", "polynomial2", "geometric2", "exponential2", "separable2"];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl HoloFamily {
    pub fn new(label: impl Into<String>, kind: FamilyKind, domain: Polydisc) -> Result<Self> {
        let fam = Self {
            label: label.into(),
            kind,
            domain,
            declared_bound: None,
        };
        fam.validate_shape()?;
        Ok(fam)
    }

    pub fn with_declared_bound(mut self, bound: f64) -> Self {
        self.declared_bound = Some(bound);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Registry lookup. `space` supplies the atom parameters needed by the
    /// tabulated preset.
    pub fn preset(name: &str, space: &FiniteMeasureSpace) -> Result<Self> {
        let d1 = || Polydisc::unit(1);
        let d2 = || Polydisc::unit(2);
        let fam = match name {
            "constant" => Self::new(name, FamilyKind::Constant { value: c(2.0, 1.0) }, d1()?)?
                .with_declared_bound(5f64.sqrt()),
            "constant2" => Self::new(name, FamilyKind::Constant { value: c(2.0, 1.0) }, d2()?)?
                .with_declared_bound(5f64.sqrt()),
            "polynomial" => Self::new(
                name,
                FamilyKind::Polynomial {
                    terms: vec![
                        PolyTerm::new(c(1.0, 0.0), 1, vec![2]),
                        PolyTerm::new(c(0.5, -0.25), 2, vec![1]),
                        PolyTerm::new(c(1.0, 0.0), 0, vec![0]),
                    ],
                },
                d1()?,
            )?,
            "polynomial2" => Self::new(
                name,
                FamilyKind::Polynomial {
                    terms: vec![
                        PolyTerm::new(c(1.0, 0.0), 1, vec![2, 1]),
                        PolyTerm::new(c(0.0, 0.3), 2, vec![1, 2]),
                        PolyTerm::new(c(1.0, 0.0), 0, vec![0, 1]),
                        PolyTerm::new(c(-0.5, 0.0), 1, vec![0, 0]),
                    ],
                },
                d2()?,
            )?,
            "affine" => Self::new(
                name,
                FamilyKind::Polynomial {
                    terms: vec![
                        PolyTerm::new(c(1.0, 0.0), 0, vec![0]),
                        PolyTerm::new(c(1.0, 0.0), 1, vec![1]),
                    ],
                },
                d1()?,
            )?,
            "geometric" => Self::new(name, FamilyKind::Geometric { beta: vec![c(0.5, 0.0)] }, d1()?)?,
            "geometric2" => Self::new(
                name,
                FamilyKind::Geometric {
                    beta: vec![c(0.5, 0.0), c(0.3, 0.0)],
                },
                d2()?,
            )?,
            "exponential" => Self::new(name, FamilyKind::Exponential { scale: vec![c(1.0, 0.0)] }, d1()?)?,
            "exponential2" => Self::new(
                name,
                FamilyKind::Exponential {
                    scale: vec![c(1.0, 0.0), c(-0.5, 0.0)],
                },
                d2()?,
            )?,
            "separable" => Self::new(
                name,
                FamilyKind::Separable {
                    z_scale: vec![c(0.8, 0.0)],
                    t_coeffs: vec![c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
                },
                d1()?,
            )?,
            "separable2" => Self::new(
                name,
                FamilyKind::Separable {
                    z_scale: vec![c(0.8, 0.0), c(0.0, 0.4)],
                    t_coeffs: vec![c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
                },
                d2()?,
            )?,
            "tabulated_taylor" => {
                let order = 6;
                let entries = space
                    .atoms()
                    .iter()
                    .map(|a| TaylorEntry {
                        param: a.param,
                        coeffs: (0..=order)
                            .map(|m| {
                                let m = m as f64;
                                Complex64::from_polar(0.5f64.powf(m) / (1.0 + m), m + a.param.re)
                            })
                            .collect(),
                    })
                    .collect();
                Self::new(name, FamilyKind::TabulatedTaylor { order, entries }, d1()?)?
            }
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        Ok(fam)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn validate_shape(&self) -> Result<()> {
        if let FamilyKind::Modulated { base, .. } = &self.kind {
            return Self {
                label: self.label.clone(),
                kind: (**base).clone(),
                domain: self.domain.clone(),
                declared_bound: None,
            }
            .validate_shape();
        }
        let d = self.dim();
        let check_len = |what: &str, len: usize| {
            if len == d {
                Ok(())
            } else {
                Err(Error::InvalidFamily(format!("{what} has length {len}, domain dimension is {d}")))
            }
        };
        match &self.kind {
            FamilyKind::Constant { .. } => Ok(()),
            FamilyKind::Polynomial { terms } => terms.iter().try_for_each(|t| check_len("z_powers", t.z_powers.len())),
            FamilyKind::Geometric { beta } => check_len("beta", beta.len()),
            FamilyKind::Exponential { scale } => check_len("scale", scale.len()),
            FamilyKind::Separable { z_scale, .. } => check_len("z_scale", z_scale.len()),
            FamilyKind::TabulatedTaylor { order, entries } => {
                let want = (order + 1).pow(d as u32);
                match entries.iter().find(|e| e.coeffs.len() != want) {
                    Some(e) => Err(Error::InvalidFamily(format!(
                        "table for parameter {} has {} coefficients, expected {want}",
                        e.param,
                        e.coeffs.len()
                    ))),
                    None => Ok(()),
                }
            }
            FamilyKind::Modulated { .. } => unreachable!("handled above"),
        }
    }

    /// The family `(z, t) ↦ f(z, t) h(t)`.
    pub fn modulated(&self, h: &LpVector, space: &FiniteMeasureSpace) -> Result<Self> {
        space.check(h)?;
        let factors = space.atoms().iter().map(|a| a.param).zip(h.values().iter().copied()).collect();
        Ok(Self {
            label: format!("{}*h", self.label),
            kind: FamilyKind::Modulated {
                base: Box::new(self.kind.clone()),
                factors,
            },
            domain: self.domain.clone(),
            declared_bound: None,
        })
    }

    fn base(&self) -> Option<(Self, &[(Complex64, Complex64)])> {
        match &self.kind {
            FamilyKind::Modulated { base, factors } => Some((
                Self {
                    label: self.label.clone(),
                    kind: (**base).clone(),
                    domain: self.domain.clone(),
                    declared_bound: None,
                },
                factors,
            )),
            _ => None,
        }
    }

    fn factor_for(factors: &[(Complex64, Complex64)], t: Complex64) -> Result<Complex64> {
        factors
            .iter()
            .find(|(p, _)| *p == t)
            .map(|(_, h)| *h)
            .ok_or_else(|| Error::UnknownAtom(t.to_string()))
    }

    /// Checks that every slice `f(·, t_i)` is holomorphic and bounded on
    /// the closed domain.
    pub fn validate_for(&self, space: &FiniteMeasureSpace) -> Result<()> {
        match &self.kind {
            FamilyKind::Geometric { beta } => {
                for atom in space.atoms() {
                    for (j, b) in beta.iter().enumerate() {
                        let reach = self.domain.center()[j].norm() + self.domain.radius()[j];
                        let rate = (b * atom.param).norm() * reach;
                        if rate >= 1.0 {
                            return Err(Error::InvalidFamily(format!(
                                "geometric pole inside the closed domain: |beta_{j} t| sup|z_{j}| = {rate} for t = {}",
                                atom.param
                            )));
                        }
                    }
                }
                Ok(())
            }
            FamilyKind::TabulatedTaylor { .. } => {
                for atom in space.atoms() {
                    self.table_for(atom.param)?;
                }
                Ok(())
            }
            FamilyKind::Modulated { .. } => {
                let (base, factors) = self.base().expect("modulated");
                for atom in space.atoms() {
                    Self::factor_for(factors, atom.param)?;
                }
                base.validate_for(space)
            }
            _ => Ok(()),
        }
    }

    fn table_for(&self, t: Complex64) -> Result<&[Complex64]> {
        match &self.kind {
            FamilyKind::TabulatedTaylor { entries, .. } => entries
                .iter()
                .find(|e| e.param == t)
                .map(|e| e.coeffs.as_slice())
                .ok_or_else(|| Error::UnknownAtom(t.to_string())),
            _ => unreachable!("table_for on a non-tabulated family"),
        }
    }

    /// `f(z, t)`; `z` must lie in the open domain.
    pub fn eval(&self, z: &[Complex64], atom: &Atom) -> Result<Complex64> {
        self.domain.require_contains(z)?;
        self.value_at(z, atom.param)
    }

    /// `D^α_z f(z, t)` from the closed form.
    pub fn derivative(&self, z: &[Complex64], alpha: &MultiIndex, atom: &Atom) -> Result<Complex64> {
        self.domain.require_contains(z)?;
        if alpha.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: alpha.dim(),
            });
        }
        self.derivative_at(z, alpha.entries(), atom.param)
    }

    /// `F(z) = (f(z, t_i))_i`.
    pub fn vector(&self, z: &[Complex64], space: &FiniteMeasureSpace) -> Result<LpVector> {
        self.domain.require_contains(z)?;
        space
            .atoms()
            .iter()
            .map(|a| self.value_at(z, a.param))
            .collect::<Result<Vec<_>>>()
            .map(LpVector::new)
    }

    /// `(D^α_z f(z, t_i))_i` from the closed form.
    pub fn derivative_vector(&self, z: &[Complex64], alpha: &MultiIndex, space: &FiniteMeasureSpace) -> Result<LpVector> {
        space
            .atoms()
            .iter()
            .map(|a| self.derivative(z, alpha, a))
            .collect::<Result<Vec<_>>>()
            .map(LpVector::new)
    }

    /// Scalar slice `z ↦ f(z, t)` for quadrature routines. Points are
    /// assumed to be inside the domain; evaluation failures become NaN.
    pub fn slice<'a>(&'a self, atom: &'a Atom) -> impl Fn(&[Complex64]) -> Complex64 + 'a {
        move |z| self.value_at(z, atom.param).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }

    /// Grid estimate of `‖f_t‖_∞` over the closed polydisc shrunk by `shrink`.
    ///
    /// The grid is nested in `density`, so the estimate is nondecreasing in
    /// `density` and never exceeds the true supremum.
    pub fn slice_supnorm(&self, atom: &Atom, density: usize, shrink: f64) -> Result<f64> {
        if density < 2 {
            return Err(Error::InvalidParameter(format!("grid density must be at least 2, got {density}")));
        }
        check_closed_shrink(shrink)?;
        sampling::torus_grid(&self.domain, shrink, density)
            .iter()
            .map(|z| self.value_at(z, atom.param).map(|v| v.norm()))
            .try_fold(0.0, |acc: f64, v| v.map(|v| acc.max(v)))
    }

    /// Grid estimate of `sup_z ‖F(z)‖_p` over the closed polydisc shrunk by
    /// `shrink`, on `density^d` boundary points.
    pub fn grid_sup_lp_norm(&self, space: &FiniteMeasureSpace, p: Exponent, shrink: f64, density: usize) -> Result<f64> {
        check_closed_shrink(shrink)?;
        sampling::torus_grid(&self.domain, shrink, density)
            .iter()
            .map(|z| self.vector(z, space).and_then(|v| space.lp_norm(&v, p)))
            .try_fold(0.0, |acc: f64, v| v.map(|v| acc.max(v)))
    }

    fn value_at(&self, z: &[Complex64], t: Complex64) -> Result<Complex64> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        let one = Complex64::new(1.0, 0.0);
        let v = match &self.kind {
            FamilyKind::Constant { value } => *value,
            FamilyKind::Polynomial { terms } => terms
                .iter()
                .map(|term| term.coef * t.powu(term.t_power) * monomial(z, &term.z_powers))
                .sum(),
            FamilyKind::Geometric { beta } => beta.iter().zip(z).map(|(b, zj)| one / (one - b * t * zj)).product(),
            FamilyKind::Exponential { scale } => (t * dot(scale, z)).exp(),
            FamilyKind::Separable { z_scale, t_coeffs } => dot(z_scale, z).exp() * horner(t_coeffs, t),
            FamilyKind::TabulatedTaylor { order, .. } => {
                let table = self.table_for(t)?;
                let shifted: Vec<Complex64> = z.iter().zip(self.domain.center()).map(|(z, a)| z - a).collect();
                table_sum(table, *order, &shifted, &vec![0; self.dim()])
            }
            FamilyKind::Modulated { .. } => {
                let (base, factors) = self.base().expect("modulated");
                base.value_at(z, t)? * Self::factor_for(factors, t)?
            }
        };
        Ok(v)
    }

    fn derivative_at(&self, z: &[Complex64], alpha: &[usize], t: Complex64) -> Result<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let order: usize = alpha.iter().sum();
        let v = match &self.kind {
            FamilyKind::Constant { value } => {
                if order == 0 {
                    *value
                } else {
                    zero
                }
            }
            FamilyKind::Polynomial { terms } => terms
                .iter()
                .map(|term| term.coef * t.powu(term.t_power) * monomial_derivative(z, &term.z_powers, alpha))
                .sum(),
            FamilyKind::Geometric { beta } => beta
                .iter()
                .zip(z)
                .zip(alpha)
                .map(|((b, zj), &k)| {
                    let bt = b * t;
                    factorial(k) * bt.powu(k as u32) / (one - bt * zj).powu(k as u32 + 1)
                })
                .product(),
            FamilyKind::Exponential { scale } => {
                let factor: Complex64 = scale.iter().zip(alpha).map(|(s, &k)| (s * t).powu(k as u32)).product();
                factor * (t * dot(scale, z)).exp()
            }
            FamilyKind::Separable { z_scale, t_coeffs } => {
                let factor: Complex64 = z_scale.iter().zip(alpha).map(|(s, &k)| s.powu(k as u32)).product();
                factor * dot(z_scale, z).exp() * horner(t_coeffs, t)
            }
            FamilyKind::TabulatedTaylor { order: m, .. } => {
                let table = self.table_for(t)?;
                let shifted: Vec<Complex64> = z.iter().zip(self.domain.center()).map(|(z, a)| z - a).collect();
                table_sum(table, *m, &shifted, alpha)
            }
            FamilyKind::Modulated { .. } => {
                let (base, factors) = self.base().expect("modulated");
                base.derivative_at(z, alpha, t)? * Self::factor_for(factors, t)?
            }
        };
        Ok(v)
    }
}

/// Closed shrunken polydiscs must stay inside the open domain.
fn check_closed_shrink(shrink: f64) -> Result<()> {
    if shrink > 0.0 && shrink < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidShrink(shrink))
    }
}

fn dot(a: &[Complex64], z: &[Complex64]) -> Complex64 {
    a.iter().zip(z).map(|(a, z)| a * z).sum()
}

fn horner(coeffs: &[Complex64], t: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c)
}

fn monomial(z: &[Complex64], powers: &[usize]) -> Complex64 {
    z.iter().zip(powers).map(|(z, &m)| z.powu(m as u32)).product()
}

/// `D^α z^m = ∏_j m_j!/(m_j - α_j)! z_j^{m_j - α_j}`, zero when some `α_j > m_j`.
fn monomial_derivative(z: &[Complex64], powers: &[usize], alpha: &[usize]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for ((zj, &m), &a) in z.iter().zip(powers).zip(alpha) {
        if a > m {
            return Complex64::new(0.0, 0.0);
        }
        acc *= falling(m, a) * zj.powu((m - a) as u32);
    }
    acc
}

/// `m (m-1) … (m-a+1)`
fn falling(m: usize, a: usize) -> f64 {
    ((m - a + 1)..=m).map(|k| k as f64).product()
}

/// `D^α Σ_m c_m w^m` for a dense table with `order+1` entries per variable.
fn table_sum(table: &[Complex64], order: usize, w: &[Complex64], alpha: &[usize]) -> Complex64 {
    let side = order + 1;
    table
        .iter()
        .enumerate()
        .map(|(idx, coef)| {
            let mut rest = idx;
            let powers: Vec<usize> = (0..w.len())
                .map(|_| {
                    let m = rest % side;
                    rest /= side;
                    m
                })
                .collect();
            coef * monomial_derivative(w, &powers, alpha)
        })
        .sum()
}
