//! Seeded pseudo-random sampling and deterministic sup-norm grids.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::Polydisc;
use crate::error::Result;
use crate::measure::{Exponent, FiniteMeasureSpace, LpVector};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point of the closed disc of radius `radius` about `center`.
pub fn point_in_disc(rng: &mut impl Rng, center: Complex64, radius: f64) -> Complex64 {
    let rad = radius * rng.gen::<f64>().sqrt();
    center + Complex64::from_polar(rad, TAU * rng.gen::<f64>())
}

/// Uniform point of the closed polydisc `polydisc.shrunk(shrink)`.
pub fn point_in_polydisc(rng: &mut impl Rng, polydisc: &Polydisc, shrink: f64) -> Vec<Complex64> {
    polydisc
        .center()
        .iter()
        .zip(polydisc.radius())
        .map(|(&a, &r)| point_in_disc(rng, a, shrink * r))
        .collect()
}

pub fn points_in_polydisc(rng: &mut impl Rng, polydisc: &Polydisc, shrink: f64, count: usize) -> Vec<Vec<Complex64>> {
    (0..count).map(|_| point_in_polydisc(rng, polydisc, shrink)).collect()
}

/// Complex scalar with independent uniform parts in `[-1, 1]`.
pub fn complex_scalar(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

/// Random element of the unit sphere of `L^q` (the zero vector when every
/// atom is null).
pub fn unit_dual(rng: &mut impl Rng, space: &FiniteMeasureSpace, q: Exponent) -> Result<LpVector> {
    let h = LpVector::new((0..space.len()).map(|_| complex_scalar(rng)).collect());
    let norm = space.lp_norm(&h, q)?;
    if norm == 0.0 {
        return Ok(h);
    }
    Ok(h.scaled(Complex64::new(1.0 / norm, 0.0)))
}

/// Angles `2π·frac(k·φ⁻¹)` for `k < count`, golden-ratio Kronecker sequence.
/// The first `m` entries are the grid of density `m`, so grids are nested.
pub fn kronecker_angles(count: usize) -> Vec<f64> {
    let step = (5f64.sqrt() - 1.0) / 2.0;
    (0..count).map(|k| TAU * (k as f64 * step).fract()).collect()
}

/// Deterministic grid on the distinguished boundary of
/// `polydisc.shrunk(shrink)`: the tensor product of `density` nested
/// Kronecker angles per variable. For holomorphic maps the supremum over
/// the closed shrunken polydisc is attained there.
pub fn torus_grid(polydisc: &Polydisc, shrink: f64, density: usize) -> Vec<Vec<Complex64>> {
    let angles = kronecker_angles(density);
    let units: Vec<Complex64> = angles.iter().map(|&a| Complex64::from_polar(1.0, a)).collect();
    let d = polydisc.dim();
    let total = density.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|j| {
                    let k = idx % density;
                    idx /= density;
                    polydisc.center()[j] + units[k] * (shrink * polydisc.radius()[j])
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_reproducible_and_inside() {
        let p = Polydisc::new(vec![Complex64::new(0.5, -0.5), Complex64::new(0.0, 0.0)], vec![2.0, 0.1]).unwrap();
        let a = points_in_polydisc(&mut rng(7), &p, 0.5, 50);
        let b = points_in_polydisc(&mut rng(7), &p, 0.5, 50);
        assert_eq!(a, b);
        for z in &a {
            assert!(p.contains(z, 0.5 + 1e-12).unwrap());
        }
    }

    #[test]
    fn nested_grids() {
        let small = kronecker_angles(10);
        let large = kronecker_angles(40);
        assert_eq!(&large[..10], &small[..]);
        assert_eq!(small[0], 0.0);
    }

    #[test]
    fn unit_dual_is_normalized() {
        let s = FiniteMeasureSpace::uniform(6).unwrap();
        let q = Exponent::new(1.5).unwrap();
        let h = unit_dual(&mut rng(3), &s, q).unwrap();
        assert!((s.lp_norm(&h, q).unwrap() - 1.0).abs() < 1e-14);
    }
}
