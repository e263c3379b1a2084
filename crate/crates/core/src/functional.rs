//! bp-continuous functionals on `H^∞(O)` realized as finite complex
//! measures `ν = Σ_k w_k δ_{z_k}`, so that `φ(g) = Σ_k w_k g(z_k)`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cauchy::{apply_rule, derivative_rule};
use crate::domain::{format_point, MultiIndex, Polydisc};
use crate::error::{Error, Result};
use crate::family::HoloFamily;
use crate::measure::{Atom, FiniteMeasureSpace, LpVector};
use crate::sampling;
use crate::sum;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn is_one(z: &Complex64) -> bool {
    *z == ONE
}

/// The exact functional a quadrature measure stands for.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FunctionalTarget {
    /// The measure is the functional itself.
    Measure,
    /// `g ↦ g(point)`
    PointEvaluation { point: Vec<Complex64> },
    /// `g ↦ D^α g(center)`, discretized on the torus `(center, radius)`.
    Derivative {
        center: Vec<Complex64>,
        alpha: MultiIndex,
        radius: Vec<f64>,
        n: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BpFunctional {
    pub label: String,
    nodes: Vec<Vec<Complex64>>,
    weights: Vec<Complex64>,
    /// Common factor applied after summation; the effective weights are
    /// `scale * weights`.
    #[serde(skip_serializing_if = "is_one")]
    scale: Complex64,
    #[serde(skip)]
    target: FunctionalTarget,
}

impl BpFunctional {
    pub fn measure(label: impl Into<String>, nodes: Vec<Vec<Complex64>>, weights: Vec<Complex64>) -> Result<Self> {
        let label = label.into();
        if nodes.is_empty() {
            return Err(Error::InvalidFunctional(format!("{label}: at least one node is required")));
        }
        if nodes.len() != weights.len() {
            return Err(Error::InvalidFunctional(format!(
                "{label}: {} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        let d = nodes[0].len();
        if d == 0 || nodes.iter().any(|z| z.len() != d) {
            return Err(Error::InvalidFunctional(format!("{label}: nodes must share one positive dimension")));
        }
        if weights.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(Error::InvalidFunctional(format!("{label}: weights must be finite")));
        }
        Ok(Self {
            label,
            nodes,
            weights,
            scale: ONE,
            target: FunctionalTarget::Measure,
        })
    }

    /// Point evaluation at `z0`.
    pub fn dirac(z0: Vec<Complex64>) -> Self {
        Self {
            label: format!("dirac{}", format_point(&z0)),
            nodes: vec![z0.clone()],
            weights: vec![ONE],
            scale: ONE,
            target: FunctionalTarget::PointEvaluation { point: z0 },
        }
    }

    /// `g ↦ D^α g(center)` through the Cauchy formula for derivatives on the
    /// torus `(center, radius)` with `n` nodes per variable. Requires
    /// `n > 2 max_j α_j + 2`.
    pub fn derivative(center: Vec<Complex64>, alpha: MultiIndex, radius: Vec<f64>, n: usize) -> Result<Self> {
        let min = 2 * alpha.max_entry() + 3;
        if n < min {
            return Err(Error::TooFewNodes { n, min });
        }
        let (nodes, weights) = derivative_rule(&center, &alpha, &radius, n)?;
        Ok(Self {
            label: format!("derivative{}@{}", alpha, format_point(&center)),
            nodes,
            weights,
            scale: ONE,
            target: FunctionalTarget::Derivative {
                center,
                alpha,
                radius,
                n,
            },
        })
    }

    /// Uniform measure on the torus `(center, radius)`; by the mean value
    /// property it evaluates holomorphic functions at `center`.
    pub fn torus_mean(center: Vec<Complex64>, radius: Vec<f64>, n: usize) -> Result<Self> {
        let alpha = MultiIndex::zero(center.len());
        let mut phi = Self::derivative(center.clone(), alpha, radius, n)?;
        phi.label = format!("mean@{}", format_point(&center));
        phi.target = FunctionalTarget::PointEvaluation { point: center };
        Ok(phi)
    }

    /// `count` seeded nodes uniform in `domain.shrunk(shrink)` with complex
    /// weights whose parts are uniform in `[-1, 1]`.
    pub fn random(domain: &Polydisc, shrink: f64, count: usize, seed: u64) -> Result<Self> {
        let mut rng = sampling::rng(seed);
        let nodes = sampling::points_in_polydisc(&mut rng, domain, shrink, count);
        let weights = (0..count).map(|_| sampling::complex_scalar(&mut rng)).collect();
        Self::measure(format!("random{count}#{seed}"), nodes, weights)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: FunctionalSpec = serde_json::from_str(text)?;
        spec.build()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn dim(&self) -> usize {
        self.nodes[0].len()
    }

    pub fn nodes(&self) -> &[Vec<Complex64>] {
        &self.nodes
    }

    /// Weights before the common [`scale`](Self::scale).
    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    pub fn target(&self) -> &FunctionalTarget {
        &self.target
    }

    /// `Σ_k |w_k|`, an upper bound for the norm of the functional on `H^∞`.
    pub fn total_variation(&self) -> f64 {
        let mags: Vec<f64> = self.weights.iter().map(|w| w.norm()).collect();
        self.scale.norm() * sum::pairwise_real(&mags)
    }

    /// `factor · φ`. The factor multiplies every sum after it is formed,
    /// so results scale exactly up to one rounding.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.label = format!("{}*{}", self.label, factor);
        out.scale *= factor;
        out
    }

    /// Errors unless every node lies in the open `domain`.
    pub fn check_domain(&self, domain: &Polydisc) -> Result<()> {
        self.nodes.iter().try_for_each(|z| domain.require_contains(z))
    }

    /// `Σ_k w_k g(z_k)`
    pub fn apply<G>(&self, g: G) -> Complex64
    where
        G: Fn(&[Complex64]) -> Complex64,
    {
        self.scale * apply_rule(&self.nodes, &self.weights, g)
    }

    /// `φ(f(·, t))`
    pub fn apply_slice(&self, fam: &HoloFamily, atom: &Atom) -> Result<Complex64> {
        self.check_domain(&fam.domain)?;
        let values = self
            .nodes
            .iter()
            .map(|z| fam.eval(z, atom))
            .collect::<Result<Vec<_>>>()?;
        let terms: Vec<Complex64> = values.iter().zip(&self.weights).map(|(v, w)| w * v).collect();
        Ok(self.scale * sum::pairwise(&terms))
    }

    /// `φ(z ↦ ⟨F(z), h⟩)`
    pub fn apply_dual(&self, fam: &HoloFamily, h: &LpVector, space: &FiniteMeasureSpace) -> Result<Complex64> {
        self.check_domain(&fam.domain)?;
        space.check(h)?;
        let terms = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| Ok(w * space.pairing(&fam.vector(z, space)?, h)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.scale * sum::pairwise(&terms))
    }

    /// The exact target functional applied to `f(·, t)`, using the family's
    /// closed form for point evaluations and derivatives. Plain measures
    /// fall back to [`apply_slice`](Self::apply_slice).
    pub fn apply_slice_exact(&self, fam: &HoloFamily, atom: &Atom) -> Result<Complex64> {
        match &self.target {
            FunctionalTarget::Measure => self.apply_slice(fam, atom),
            FunctionalTarget::PointEvaluation { point } => Ok(self.scale * fam.eval(point, atom)?),
            FunctionalTarget::Derivative { center, alpha, .. } => {
                self.check_domain(&fam.domain)?;
                Ok(self.scale * fam.derivative(center, alpha, atom)?)
            }
        }
    }
}

/// JSON form: either an explicit measure or a named constructor.
#[derive(Deserialize)]
#[serde(untagged)]
enum FunctionalSpec {
    Named(NamedSpec),
    Measure {
        #[serde(default)]
        label: Option<String>,
        nodes: Vec<NodeSpec>,
        weights: Vec<Complex64>,
        #[serde(default)]
        scale: Option<Complex64>,
    },
}

#[derive(Deserialize)]
#[serde(tag = "constructor", rename_all = "snake_case")]
enum NamedSpec {
    Dirac {
        z0: NodeSpec,
    },
    Derivative {
        center: NodeSpec,
        alpha: Vec<usize>,
        radius: Vec<f64>,
        n: usize,
    },
}

/// A node is `[re, im]` in one variable or a list of those.
#[derive(Deserialize)]
#[serde(untagged)]
enum NodeSpec {
    Scalar(Complex64),
    Vector(Vec<Complex64>),
}

impl NodeSpec {
    fn into_point(self) -> Vec<Complex64> {
        match self {
            NodeSpec::Scalar(z) => vec![z],
            NodeSpec::Vector(z) => z,
        }
    }
}

impl FunctionalSpec {
    fn build(self) -> Result<BpFunctional> {
        match self {
            FunctionalSpec::Named(NamedSpec::Dirac { z0 }) => Ok(BpFunctional::dirac(z0.into_point())),
            FunctionalSpec::Named(NamedSpec::Derivative {
                center,
                alpha,
                radius,
                n,
            }) => BpFunctional::derivative(center.into_point(), MultiIndex::new(alpha), radius, n),
            FunctionalSpec::Measure {
                label,
                nodes,
                weights,
                scale,
            } => {
                let phi = BpFunctional::measure(
                    label.unwrap_or_else(|| "measure".into()),
                    nodes.into_iter().map(NodeSpec::into_point).collect(),
                    weights,
                )?;
                Ok(match scale {
                    Some(f) => BpFunctional { scale: f, ..phi },
                    None => phi,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::cauchy_derivative;
    use crate::family::{FamilyKind, PolyTerm};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scaling_is_exact_on_cancelling_sums() {
        let phi = BpFunctional::derivative(vec![c(0.0, 0.0)], MultiIndex::new(vec![1]), vec![0.5], 64).unwrap();
        let g = |_: &[Complex64]| c(2.0, 1.0);
        let one = phi.apply(g);
        let seven = phi.scaled(c(7.0, 0.0)).apply(g);
        assert_eq!(seven, one * 7.0);
        assert_eq!(phi.scaled(c(7.0, 0.0)).total_variation(), 7.0 * phi.total_variation());
        let json = serde_json::to_string(&phi.scaled(c(0.0, 2.0))).unwrap();
        let back = BpFunctional::from_json(&json).unwrap();
        assert_eq!(back.scale(), c(0.0, 2.0));
        assert_eq!(back.apply(g), c(0.0, 2.0) * one);
    }

    #[test]
    fn dirac_examples() {
        let phi = BpFunctional::dirac(vec![c(0.5, 0.0)]);
        assert_eq!(phi.apply(|_| c(2.0, -1.0)), c(2.0, -1.0));
        assert_eq!(phi.apply(|w| w[0] * w[0]), c(0.25, 0.0));
        assert_eq!(phi.total_variation(), 1.0);
    }

    #[test]
    fn derivative_examples() {
        let zero = vec![c(0.0, 0.0)];
        let phi = BpFunctional::derivative(zero.clone(), MultiIndex::new(vec![0]), vec![0.5], 8).unwrap();
        assert!((phi.apply(|_| c(3.0, 1.0)) - c(3.0, 1.0)).norm() < 1e-15);
        for k in 1..6usize {
            let phi = BpFunctional::derivative(zero.clone(), MultiIndex::new(vec![k]), vec![1.0], 2 * k + 3).unwrap();
            let fact: f64 = (1..=k).map(|i| i as f64).product();
            assert!((phi.apply(|w| w[0].powu(k as u32)) - fact).norm() < 1e-12 * fact);
        }
        let phi = BpFunctional::derivative(vec![c(0.0, 0.0); 2], MultiIndex::new(vec![1, 1]), vec![1.0, 1.0], 8).unwrap();
        assert!((phi.apply(|w| w[0] * w[1]) - 1.0).norm() < 1e-14);
    }

    #[test]
    fn derivative_needs_enough_nodes() {
        let r = BpFunctional::derivative(vec![c(0.0, 0.0)], MultiIndex::new(vec![2]), vec![1.0], 6);
        assert!(matches!(r, Err(Error::TooFewNodes { n: 6, min: 7 })));
    }

    #[test]
    fn derivative_total_variation_witness() {
        let phi = BpFunctional::derivative(vec![c(0.0, 0.0)], MultiIndex::new(vec![1]), vec![1.0], 64).unwrap();
        // g(z) = z has sup-norm 1 on the unit disc and φ(g) = 1
        assert!((phi.apply(|w| w[0]) - 1.0).norm() < 1e-14);
        assert!(phi.total_variation() >= 1.0);
    }

    #[test]
    fn weights_example_total_variation() {
        let phi = BpFunctional::measure("pm", vec![vec![c(0.0, 0.0)], vec![c(0.1, 0.0)]], vec![c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(phi.total_variation(), 2.0);
    }

    #[test]
    fn apply_slice_examples() {
        let space = FiniteMeasureSpace::uniform(5).unwrap();
        let fam = HoloFamily::preset("geometric", &space).unwrap();
        let atom = space.atoms()[3];
        let z0 = vec![c(0.2, 0.3)];
        assert_eq!(BpFunctional::dirac(z0.clone()).apply_slice(&fam, &atom).unwrap(), fam.eval(&z0, &atom).unwrap());

        let cubic = HoloFamily::new(
            "tz3",
            FamilyKind::Polynomial {
                terms: vec![PolyTerm::new(c(1.0, 0.0), 1, vec![3])],
            },
            Polydisc::unit(1).unwrap(),
        )
        .unwrap();
        let phi = BpFunctional::derivative(vec![c(0.0, 0.0)], MultiIndex::new(vec![3]), vec![0.5], 16).unwrap();
        for a in space.atoms() {
            let v = phi.apply_slice(&cubic, a).unwrap();
            assert!((v - 6.0 * a.param).norm() < 1e-13);
        }

        let mean = BpFunctional::torus_mean(vec![c(0.0, 0.0)], vec![0.5], 32).unwrap();
        for a in space.atoms() {
            let v = mean.apply_slice(&fam, a).unwrap();
            assert!((v - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn nodes_outside_domain_are_rejected() {
        let space = FiniteMeasureSpace::uniform(3).unwrap();
        let fam = HoloFamily::preset("exponential", &space).unwrap();
        let phi = BpFunctional::dirac(vec![c(1.2, 0.0)]);
        assert!(matches!(phi.apply_slice(&fam, &space.atoms()[0]), Err(Error::OutsideDomain { .. })));
        let h = LpVector::zeros(3);
        assert!(phi.apply_dual(&fam, &h, &space).is_err());
    }

    #[test]
    fn apply_dual_examples() {
        let space = FiniteMeasureSpace::geometric(4).unwrap();
        let fam = HoloFamily::preset("separable", &space).unwrap();
        let z0 = vec![c(-0.1, 0.2)];
        let h = LpVector::new(vec![c(1.0, 0.5), c(0.0, -1.0), c(2.0, 0.0), c(-0.3, 0.3)]);
        let dirac = BpFunctional::dirac(z0.clone());
        let want = space.pairing(&fam.vector(&z0, &space).unwrap(), &h).unwrap();
        assert_eq!(dirac.apply_dual(&fam, &h, &space).unwrap(), want);
        assert_eq!(dirac.apply_dual(&fam, &LpVector::zeros(4), &space).unwrap(), c(0.0, 0.0));

        // separable: φ(g) · ⟨m, h⟩
        let phi = BpFunctional::random(&fam.domain, 0.5, 6, 11).unwrap();
        let g_part = phi.apply(|w| (0.8 * w[0]).exp());
        let m = LpVector::new(space.atoms().iter().map(|a| 1.0 + 0.5 * a.param * a.param).collect());
        let want = g_part * space.pairing(&m, &h).unwrap();
        assert!((phi.apply_dual(&fam, &h, &space).unwrap() - want).norm() < 1e-13);
    }

    #[test]
    fn derivative_functional_matches_cauchy_derivative() {
        let space = FiniteMeasureSpace::uniform(6).unwrap();
        for name in ["geometric2", "exponential2", "polynomial2"] {
            let fam = HoloFamily::preset(name, &space).unwrap();
            let a = vec![c(0.1, 0.0), c(0.0, 0.1)];
            for alpha in MultiIndex::up_to_order(2, 3) {
                let phi = BpFunctional::derivative(a.clone(), alpha.clone(), vec![0.5, 0.5], 16).unwrap();
                for atom in space.atoms() {
                    let via_functional = phi.apply_slice(&fam, atom).unwrap();
                    let direct = cauchy_derivative(fam.slice(atom), &a, &alpha, &[0.5, 0.5], 16).unwrap();
                    assert!((via_functional - direct).norm() <= 1e-15 * direct.norm().max(1.0), "{name} {alpha}");
                }
            }
        }
    }

    #[test]
    fn bp_convergent_sequence() {
        // g_n(z) = z^n is bounded by 1 on the unit disc and tends to 0 pointwise on
        // the nodes, which sit inside the 0.9-polydisc.
        let phi = BpFunctional::random(&Polydisc::unit(1).unwrap(), 0.9, 8, 5).unwrap();
        let tv = phi.total_variation();
        let mut prev = f64::INFINITY;
        for n in [10u32, 40, 160, 640] {
            let v = phi.apply(|w| w[0].powu(n)).norm();
            assert!(v <= tv);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert!(prev < 1e-20);
    }

    #[test]
    fn json_forms() {
        let m = BpFunctional::from_json(r#"{"label": "two", "nodes": [[0.1, 0.0], [0.0, 0.2]], "weights": [[1, 0], [0, -1]]}"#).unwrap();
        assert_eq!(m.nodes()[1], vec![c(0.0, 0.2)]);
        assert_eq!(m.label, "two");
        let m2 = BpFunctional::from_json(r#"{"nodes": [[[0.1, 0.0], [0.2, 0.0]]], "weights": [[1, 0]]}"#).unwrap();
        assert_eq!(m2.dim(), 2);
        let back = BpFunctional::from_json(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back.nodes(), m.nodes());
        assert_eq!(back.weights(), m.weights());

        let d = BpFunctional::from_json(r#"{"constructor": "dirac", "z0": [0.3, 0.0]}"#).unwrap();
        assert_eq!(d.target(), &FunctionalTarget::PointEvaluation { point: vec![c(0.3, 0.0)] });
        let der = BpFunctional::from_json(
            r#"{"constructor": "derivative", "center": [[0, 0]], "alpha": [2], "radius": [0.5], "n": 16}"#,
        )
        .unwrap();
        assert_eq!(der.nodes().len(), 16);
        assert!(BpFunctional::from_json(r#"{"nodes": [], "weights": []}"#).is_err());
        assert!(BpFunctional::from_json(r#"{"nodes": [[0, 0]], "weights": [[1, 0], [2, 0]]}"#).is_err());
    }

    fn small_complex() -> impl Strategy<Value = Complex64> {
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| c(a, b))
    }

    proptest! {
        #[test]
        fn linear_in_the_integrand(seed in 0u64..1000, lambda in small_complex()) {
            let space = FiniteMeasureSpace::uniform(4).unwrap();
            let geo = HoloFamily::preset("geometric", &space).unwrap();
            let exp = HoloFamily::preset("exponential", &space).unwrap();
            let phi = BpFunctional::random(&geo.domain, 0.7, 5, seed).unwrap();
            for atom in space.atoms() {
                let g1 = geo.slice(atom);
                let g2 = exp.slice(atom);
                let combined = phi.apply(|w| g1(w) + lambda * g2(w));
                let split = phi.apply(&g1) + lambda * phi.apply(&g2);
                prop_assert!((combined - split).norm() <= 1e-13 * (1.0 + split.norm()));
            }
            let h = LpVector::new(vec![c(1.0, 0.0), c(0.5, 0.5), c(0.0, -1.0), c(2.0, 0.0)]);
            let lhs = phi.apply(|w| {
                let v = geo.vector(w, &space).unwrap();
                let u = exp.vector(w, &space).unwrap();
                space.pairing(&v, &h).unwrap() + lambda * space.pairing(&u, &h).unwrap()
            });
            let rhs = phi.apply_dual(&geo, &h, &space).unwrap() + lambda * phi.apply_dual(&exp, &h, &space).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-13 * (1.0 + rhs.norm()));
        }

        #[test]
        fn bounded_by_total_variation(seed in 0u64..1000) {
            let space = FiniteMeasureSpace::uniform(3).unwrap();
            let fam = HoloFamily::preset("exponential", &space).unwrap();
            let phi = BpFunctional::random(&fam.domain, 0.5, 6, seed).unwrap();
            for atom in space.atoms() {
                let sup_nodes = phi.nodes().iter().map(|z| fam.eval(z, atom).unwrap().norm()).fold(0.0, f64::max);
                let v = phi.apply_slice(&fam, atom).unwrap().norm();
                prop_assert!(v <= phi.total_variation() * sup_nodes * (1.0 + 1e-14));
                let sup_grid = fam.slice_supnorm(atom, 32, 0.9).unwrap();
                prop_assert!(v <= phi.total_variation() * sup_grid * (1.0 + 1e-14));
            }
        }
    }
}
