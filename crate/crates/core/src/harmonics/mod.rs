//! Band-limited analysis and synthesis on 𝕊¹ and 𝕊², and the spectral
//! multipliers of the operators `H`, `P₂ₛ` and `A₂ₛ`.
//!
//! Coefficients are stored densely in [`mode_index`] order. Transforms on
//! the product grids are separable: an azimuthal sum per ring followed by a
//! Legendre sum per order.

mod multipliers;
mod oracle;
mod transform;

use alloc::sync::Arc;
use alloc::vec::Vec;

pub use multipliers::{
    apply_h, apply_p2s, multiplier_a2s, multiplier_h, multiplier_p2s, MultiplierTable,
};
pub use oracle::{log_operator_pv, log_operator_pv_truncated, p2s_direct};
pub use transform::Transform;

pub use crate::special::{degree_multiplicity, mode_count, mode_index, orders};
use crate::special::basis_values;
use crate::sphere::{GridFunction, QuadratureGrid, SphereFunction, SpherePoint};
use crate::{Error, Result};

/// Real spherical-harmonic coefficients `u_{l,m}` up to a band limit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HarmonicCoeffs {
    n: usize,
    band_limit: usize,
    values: Vec<f64>,
}

fn check_dim(n: usize) -> Result<()> {
    match n {
        1 | 2 => Ok(()),
        0 => Err(Error::InvalidDimension(0)),
        _ => Err(Error::UnsupportedGridDimension(n)),
    }
}

impl HarmonicCoeffs {
    /// All-zero coefficients.
    pub fn zeros(n: usize, band_limit: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            n,
            band_limit,
            values: alloc::vec![0.0; mode_count(n, band_limit)],
        })
    }

    /// Wraps a dense coefficient vector in [`mode_index`] order.
    pub fn from_values(n: usize, band_limit: usize, values: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        if values.len() != mode_count(n, band_limit) {
            return Err(Error::ShapeMismatch);
        }
        Ok(Self {
            n,
            band_limit,
            values,
        })
    }

    /// A single unit coefficient at `(l, m)`.
    pub fn unit(n: usize, band_limit: usize, l: usize, m: i64) -> Result<Self> {
        let mut c = Self::zeros(n, band_limit)?;
        c.set(l, m, 1.0)?;
        Ok(c)
    }

    /// Sphere dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Largest degree carried.
    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    /// Dense coefficients.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable dense coefficients.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Consumes into the dense vector.
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Coefficient `u_{l,m}`.
    pub fn get(&self, l: usize, m: i64) -> Result<f64> {
        if l > self.band_limit {
            return Err(Error::IndexOutOfRange { l, m });
        }
        Ok(self.values[mode_index(self.n, l, m)?])
    }

    /// Sets `u_{l,m}`.
    pub fn set(&mut self, l: usize, m: i64, v: f64) -> Result<()> {
        if l > self.band_limit {
            return Err(Error::IndexOutOfRange { l, m });
        }
        let i = mode_index(self.n, l, m)?;
        self.values[i] = v;
        Ok(())
    }

    /// `(l, m, value)` triples in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        let n = self.n;
        (0..=self.band_limit)
            .flat_map(move |l| orders(n, l).map(move |m| (l, m)))
            .zip(&self.values)
            .map(|((l, m), &v)| (l, m, v))
    }

    /// Degree of each stored coefficient.
    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.n;
        (0..=self.band_limit).flat_map(move |l| core::iter::repeat_n(l, degree_multiplicity(n, l)))
    }

    /// Σ u_{l,m}², the L² norm squared by Parseval.
    pub fn norm_sq(&self) -> f64 {
        crate::sum::compensated_sum(self.values.iter().map(|v| v * v))
    }

    /// Spectral inner product Σ u_{l,m} v_{l,m}.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(crate::sum::compensated_sum(
            self.values.iter().zip(&other.values).map(|(a, b)| a * b),
        ))
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.band_limit != other.band_limit {
            return Err(Error::ShapeMismatch);
        }
        Ok(())
    }

    /// Copies into band limit `band_limit`, truncating or zero-padding.
    pub fn with_band_limit(&self, band_limit: usize) -> Self {
        let mut values = alloc::vec![0.0; mode_count(self.n, band_limit)];
        let keep = values.len().min(self.values.len());
        values[..keep].copy_from_slice(&self.values[..keep]);
        Self {
            n: self.n,
            band_limit,
            values,
        }
    }

    /// `self + k·other`.
    pub fn add_scaled(&self, k: f64, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += k * b;
        }
        Ok(out)
    }

    /// `k·self`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= k);
        out
    }

    /// Quadrature projection `u_{l,m} = ∫ f Y_{l,m}`; the grid must be exact
    /// for degree `2·band_limit`.
    pub fn analyze(f: &GridFunction, band_limit: usize) -> Result<Self> {
        Transform::new(f.grid(), band_limit)?.analyze(f.values())
    }

    /// Samples `f` on `grid` and projects it to `band_limit`.
    pub fn project(f: &dyn SphereFunction, grid: &Arc<QuadratureGrid>, band_limit: usize) -> Result<Self> {
        let values = f.sample(grid)?;
        Self::analyze(&values, band_limit)
    }

    /// Σ u_{l,m} Y_{l,m} at every node of `grid`.
    pub fn synthesize(&self, grid: &Arc<QuadratureGrid>) -> Result<GridFunction> {
        let t = Transform::synthesis_only(grid, self.n, self.band_limit)?;
        GridFunction::new(grid, t.synthesize(self)?)
    }
}

impl SphereFunction for HarmonicCoeffs {
    /// Off-grid synthesis at an arbitrary point.
    fn eval(&self, xi: &SpherePoint) -> Result<f64> {
        let mut basis = Vec::new();
        basis_values(self.n, self.band_limit, xi, &mut basis)?;
        Ok(crate::sum::compensated_sum(
            basis.iter().zip(&self.values).map(|(y, c)| y * c),
        ))
    }
}

/// See [`HarmonicCoeffs::analyze`].
pub fn analyze(f: &GridFunction, band_limit: usize) -> Result<HarmonicCoeffs> {
    HarmonicCoeffs::analyze(f, band_limit)
}

/// See [`HarmonicCoeffs::synthesize`].
pub fn synthesize(c: &HarmonicCoeffs, grid: &Arc<QuadratureGrid>) -> Result<GridFunction> {
    c.synthesize(grid)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::sphere::build_grid;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize, d: usize) -> Arc<QuadratureGrid> {
        Arc::new(build_grid(n, d).unwrap())
    }

    pub(crate) fn random_coeffs(n: usize, band: usize, seed: u64) -> HarmonicCoeffs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals = (0..mode_count(n, band)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        HarmonicCoeffs::from_values(n, band, vals).unwrap()
    }

    #[test]
    fn gram_matrix_is_identity() {
        for (n, band) in [(1, 12), (2, 10)] {
            let g = grid(n, band);
            let basis: Vec<Vec<f64>> = g
                .nodes()
                .iter()
                .map(|p| {
                    let mut v = Vec::new();
                    basis_values(n, band, p, &mut v).unwrap();
                    v
                })
                .collect();
            let k = mode_count(n, band);
            for a in 0..k {
                for b in 0..k {
                    let s: f64 = basis
                        .iter()
                        .zip(g.weights())
                        .map(|(y, w)| w * y[a] * y[b])
                        .sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((s - want).abs() < 1e-10, "n={n} ({a},{b}): {s}");
                }
            }
        }
    }

    #[test]
    fn integrate_examples() {
        let g = grid(2, 8);
        let y10 = GridFunction::from_fn(&g, |p| crate::special::zonal_basis(2, 1, 0, p).unwrap());
        assert!((y10.integral()).abs() < 1e-12);
        assert!((y10.map(|v| v * v).integral() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn analyze_examples() {
        let g = grid(2, 16);
        let one = GridFunction::from_fn(&g, |_| 1.0);
        let c = analyze(&one, 8).unwrap();
        for (l, m, v) in c.iter() {
            let want = if l == 0 { (4.0 * PI).sqrt() } else { 0.0 };
            assert!((v - want).abs() < 1e-10, "({l},{m})");
        }
        let y21 = GridFunction::from_fn(&g, |p| crate::special::zonal_basis(2, 2, 1, p).unwrap());
        let c = analyze(&y21, 8).unwrap();
        for (l, m, v) in c.iter() {
            let want = if (l, m) == (2, 1) { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-10, "({l},{m}) = {v}");
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let g = grid(2, 6);
        let f = GridFunction::from_fn(&g, |_| 1.0);
        assert!(matches!(analyze(&f, 7), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn roundtrip_band_limited() {
        for (n, band) in [(1, 20), (2, 12)] {
            let c = random_coeffs(n, band, 3);
            let g = grid(n, 2 * band);
            let f = c.synthesize(&g).unwrap();
            let back = analyze(&f, band).unwrap();
            let f2 = back.synthesize(&g).unwrap();
            let err = f
                .values()
                .iter()
                .zip(f2.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-8, "n={n}: {err}");
            // Parseval against quadrature.
            assert!((c.norm_sq() / f.norm_sq() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn synthesis_examples() {
        let g = grid(2, 6);
        let z = HarmonicCoeffs::zeros(2, 4).unwrap();
        assert!(z.synthesize(&g).unwrap().values().iter().all(|&v| v == 0.0));
        let mut c = HarmonicCoeffs::zeros(2, 4).unwrap();
        c.set(0, 0, (4.0 * PI).sqrt()).unwrap();
        assert!(c.synthesize(&g).unwrap().values().iter().all(|v| (v - 1.0).abs() < 1e-13));
    }

    #[test]
    fn off_grid_evaluation_matches_synthesis() {
        for (n, band) in [(1, 9), (2, 9)] {
            let c = random_coeffs(n, band, 11);
            let g = grid(n, 12);
            let f = c.synthesize(&g).unwrap();
            for (p, v) in g.nodes().iter().zip(f.values()) {
                assert!((c.eval(p).unwrap() - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn addition_theorem_is_rotation_invariant() {
        // Σ_m Y_lm(ξ)Y_lm(η) depends only on ξ·η: compare a pair with a
        // rigidly rotated copy.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let band = 9;
        for _ in 0..20 {
            let a = SpherePoint::from_polar(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
            let b = SpherePoint::from_polar(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
            let (al, be, ga) = (rng.gen_range(0.0..6.3), rng.gen_range(0.0..3.1), rng.gen_range(0.0..6.3));
            let rot = |p: &SpherePoint| {
                let c = p.coords();
                let r1 = [c[0] * libm::cos(al) - c[1] * libm::sin(al), c[0] * libm::sin(al) + c[1] * libm::cos(al), c[2]];
                let r2 = [r1[0], r1[1] * libm::cos(be) - r1[2] * libm::sin(be), r1[1] * libm::sin(be) + r1[2] * libm::cos(be)];
                let r3 = [r2[0] * libm::cos(ga) - r2[1] * libm::sin(ga), r2[0] * libm::sin(ga) + r2[1] * libm::cos(ga), r2[2]];
                SpherePoint::new(r3.to_vec()).unwrap()
            };
            let (ra, rb) = (rot(&a), rot(&b));
            let (mut ya, mut yb, mut yra, mut yrb) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            basis_values(2, band, &a, &mut ya).unwrap();
            basis_values(2, band, &b, &mut yb).unwrap();
            basis_values(2, band, &ra, &mut yra).unwrap();
            basis_values(2, band, &rb, &mut yrb).unwrap();
            for l in 0..=band {
                let range = l * l..(l + 1) * (l + 1);
                let s: f64 = range.clone().map(|i| ya[i] * yb[i]).sum();
                let r: f64 = range.map(|i| yra[i] * yrb[i]).sum();
                assert!((s - r).abs() < 1e-10, "l={l}: {s} vs {r}");
            }
        }
    }

    #[test]
    fn iter_and_get_agree() {
        let c = random_coeffs(2, 5, 2);
        for (l, m, v) in c.iter() {
            assert_eq!(c.get(l, m).unwrap(), v);
        }
        assert_eq!(c.degrees().count(), c.values().len());
        assert!(c.get(6, 0).is_err());
    }
}
