//! Finite atomic measure spaces and the discretized `L^p(Ω)`.
//!
//! `Σ` is the power set of the atom list. Atoms of weight zero form null
//! sets: they never contribute to a norm or a pairing.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum;

/// A point `t ∈ Ω` with its mass `μ({t})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub param: Complex64,
    pub weight: f64,
}

impl Atom {
    pub fn new(param: Complex64, weight: f64) -> Self {
        Self { param, weight }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct FiniteMeasureSpace {
    atoms: Vec<Atom>,
}

#[derive(Deserialize)]
struct RawSpace {
    atoms: Vec<Atom>,
}

impl TryFrom<RawSpace> for FiniteMeasureSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        FiniteMeasureSpace::new(raw.atoms)
    }
}

impl FiniteMeasureSpace {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidSpace("at least one atom is required".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if !(a.weight.is_finite() && a.weight >= 0.0) {
                return Err(Error::InvalidSpace(format!("atom {i} has weight {}", a.weight)));
            }
            if !(a.param.re.is_finite() && a.param.im.is_finite()) {
                return Err(Error::InvalidSpace(format!("atom {i} has a non-finite parameter")));
            }
        }
        Ok(Self { atoms })
    }

    /// `k` atoms with parameters equally spaced in `[-1, 1]`, each of mass `1/k`.
    pub fn uniform(k: usize) -> Result<Self> {
        Self::with_weights(k, |_| 1.0 / k as f64)
    }

    /// `k` atoms with parameters equally spaced in `[-1, 1]`; atom `i` has
    /// mass `2^{-(i+1)}`.
    pub fn geometric(k: usize) -> Result<Self> {
        Self::with_weights(k, |i| 0.5f64.powi(i as i32 + 1))
    }

    fn with_weights(k: usize, weight: impl Fn(usize) -> f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSpace("at least one atom is required".into()));
        }
        let atoms = (0..k)
            .map(|i| {
                let t = if k == 1 { 0.0 } else { -1.0 + 2.0 * i as f64 / (k - 1) as f64 };
                Atom::new(Complex64::new(t, 0.0), weight(i))
            })
            .collect();
        Self::new(atoms)
    }

    /// Parses `uniform-<k>` or `geometric-<k>`.
    pub fn preset(name: &str) -> Result<Self> {
        let bad = || Error::InvalidSpace(format!("unknown space preset `{name}`"));
        let (kind, k) = name.rsplit_once('-').ok_or_else(bad)?;
        let k: usize = k.parse().map_err(|_| bad())?;
        match kind {
            "uniform" => Self::uniform(k),
            "geometric" => Self::geometric(k),
            _ => Err(bad()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Copy of the space with one more atom appended.
    pub fn with_atom(&self, atom: Atom) -> Result<Self> {
        let mut atoms = self.atoms.clone();
        atoms.push(atom);
        Self::new(atoms)
    }

    pub(crate) fn check(&self, v: &LpVector) -> Result<()> {
        if v.len() == self.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.len(),
                got: v.len(),
            })
        }
    }

    /// `(Σ_i |g_i|^p μ_i)^{1/p}`, or the essential supremum for `p = ∞`.
    pub fn lp_norm(&self, g: &LpVector, p: Exponent) -> Result<f64> {
        self.check(g)?;
        let live = g.values.iter().zip(&self.atoms).filter(|(_, a)| a.weight > 0.0);
        if p.is_infinite() {
            return Ok(live.map(|(v, _)| v.norm()).fold(0.0, f64::max));
        }
        let p = p.value();
        let terms: Vec<f64> = live.map(|(v, a)| v.norm().powf(p) * a.weight).collect();
        Ok(sum::pairwise_real(&terms).powf(1.0 / p))
    }

    /// Bilinear pairing `Σ_i g_i h_i μ_i` (no conjugation).
    pub fn pairing(&self, g: &LpVector, h: &LpVector) -> Result<Complex64> {
        self.check(g)?;
        self.check(h)?;
        let terms: Vec<Complex64> = g
            .values
            .iter()
            .zip(&h.values)
            .zip(&self.atoms)
            .filter(|(_, a)| a.weight > 0.0)
            .map(|((g, h), a)| g * h * a.weight)
            .collect();
        Ok(sum::pairwise(&terms))
    }

    /// The element `h` of the unit ball of `L^q` with `pairing(g, h) = ‖g‖_p`.
    pub fn dual_witness(&self, g: &LpVector, p: Exponent) -> Result<LpVector> {
        self.check(g)?;
        let norm = self.lp_norm(g, p)?;
        let mut h = LpVector::zeros(self.len());
        if norm == 0.0 {
            return Ok(h);
        }
        let phase = |v: Complex64| if v.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { v.conj() / v.norm() };
        if p.is_infinite() {
            let (i, a) = self
                .atoms
                .iter()
                .enumerate()
                .filter(|(_, a)| a.weight > 0.0)
                .max_by(|(i, _), (j, _)| g.values[*i].norm().total_cmp(&g.values[*j].norm()))
                .expect("nonzero norm implies a charged atom");
            h.values[i] = phase(g.values[i]) / a.weight;
        } else if p.value() == 1.0 {
            for (hv, gv) in h.values.iter_mut().zip(&g.values) {
                *hv = phase(*gv);
            }
        } else {
            let p = p.value();
            for (hv, gv) in h.values.iter_mut().zip(&g.values) {
                *hv = phase(*gv) * (gv.norm() / norm).powf(p - 1.0);
            }
        }
        Ok(h)
    }
}

/// Lebesgue exponent `p ∈ [1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            Ok(Self(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `q = p / (p - 1)`, with `1 ↔ ∞`.
    pub fn dual(self) -> Self {
        if self.0 == 1.0 {
            Self::INFINITY
        } else if self.is_infinite() {
            Self::ONE
        } else {
            Self(self.0 / (self.0 - 1.0))
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Self::INFINITY),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("cannot parse exponent `{other}`")))?;
                Self::new(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

/// One complex value per atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LpVector {
    values: Vec<Complex64>,
}

impl LpVector {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn constant(len: usize, value: Complex64) -> Self {
        Self::new(vec![value; len])
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }

    /// Componentwise `self - other`; lengths must agree.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Self::new(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect()))
    }

    /// Componentwise product with `other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Self::new(self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect()))
    }
}

impl From<Vec<Complex64>> for LpVector {
    fn from(values: Vec<Complex64>) -> Self {
        Self::new(values)
    }
}
