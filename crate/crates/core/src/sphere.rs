//! Geometry of 𝕊ⁿ ⊂ ℝⁿ⁺¹, product quadrature grids and integration.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, exp, sin, sqrt};

use crate::special::ln_gamma;
use crate::sum::{compensated_sum, Accumulator};
use crate::{Error, Result};

/// A point of 𝕊ⁿ, stored by its ambient coordinates in ℝⁿ⁺¹.
///
/// Construction normalizes, so points produced by composing maps never drift
/// off the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Normalizes `coords` onto the unit sphere of dimension `coords.len() - 1`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidDimension(coords.len().saturating_sub(1)));
        }
        let norm = norm(&coords);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            coords: coords.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// `(0, …, 0, 1)`.
    pub fn north_pole(n: usize) -> Self {
        let mut coords = alloc::vec![0.0; n + 1];
        coords[n] = 1.0;
        Self { coords }
    }

    /// `S = (0, …, 0, -1)`.
    pub fn south_pole(n: usize) -> Self {
        let mut coords = alloc::vec![0.0; n + 1];
        coords[n] = -1.0;
        Self { coords }
    }

    /// Point of 𝕊¹ at angle `theta` from the first axis.
    pub fn from_angle(theta: f64) -> Self {
        Self {
            coords: alloc::vec![cos(theta), sin(theta)],
        }
    }

    /// Point of 𝕊² with polar angle `theta` (from the north pole) and azimuth `phi`.
    pub fn from_polar(theta: f64, phi: f64) -> Self {
        let s = sin(theta);
        Self {
            coords: alloc::vec![s * cos(phi), s * sin(phi), cos(theta)],
        }
    }

    /// Sphere dimension `n`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Ambient coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Last ambient coordinate `ξ_{n+1}`.
    pub fn height(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }

    /// Euclidean inner product with another vector of the ambient space.
    pub fn dot(&self, v: &[f64]) -> f64 {
        dot(&self.coords, v)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// |𝕊ⁿ| = 2π^{(n+1)/2} / Γ((n+1)/2).
pub fn sphere_area(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidDimension(n));
    }
    let h = (n as f64 + 1.0) / 2.0;
    Ok(2.0 * exp(h * libm::log(PI) - ln_gamma(h)?))
}

/// Chordal (ambient Euclidean) distance `|ξ − η|`.
pub fn chordal_distance(xi: &SpherePoint, eta: &SpherePoint) -> Result<f64> {
    if xi.dim() != eta.dim() {
        return Err(Error::DimensionMismatch {
            expected: xi.dim(),
            found: eta.dim(),
        });
    }
    Ok(sqrt(dist_sq(&xi.coords, &eta.coords)))
}

/// A function that can be evaluated anywhere on the sphere.
pub trait SphereFunction {
    /// Value at `xi`.
    fn eval(&self, xi: &SpherePoint) -> Result<f64>;

    /// Samples the function at every node of `grid`.
    fn sample(&self, grid: &Arc<QuadratureGrid>) -> Result<GridFunction> {
        let values = grid
            .nodes()
            .iter()
            .map(|p| self.eval(p))
            .collect::<Result<Vec<_>>>()?;
        GridFunction::new(grid, values)
    }
}

impl<F> SphereFunction for F
where
    F: Fn(&SpherePoint) -> Result<f64>,
{
    fn eval(&self, xi: &SpherePoint) -> Result<f64> {
        self(xi)
    }
}

/// Adapter for infallible closures.
#[derive(Debug, Clone, Copy)]
pub struct Infallible<F>(pub F);

impl<F: Fn(&SpherePoint) -> f64> SphereFunction for Infallible<F> {
    fn eval(&self, xi: &SpherePoint) -> Result<f64> {
        Ok((self.0)(xi))
    }
}

/// The constant function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl SphereFunction for Constant {
    fn eval(&self, _: &SpherePoint) -> Result<f64> {
        Ok(self.0)
    }
}

/// Node structure of a grid, used by the fast separable transforms.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Layout {
    /// Equispaced angles `offset + 2π(k + 1/3)/count`.
    Circle { count: usize, offset: f64 },
    /// Gauss–Legendre rings in `cos θ` × equispaced azimuths, ring-major.
    Product {
        cos_theta: Vec<f64>,
        ring_weights: Vec<f64>,
        n_azimuth: usize,
        offset: f64,
    },
}

/// Nodes and positive surface-measure weights on 𝕊¹ or 𝕊².
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    n: usize,
    degree: usize,
    nodes: Vec<SpherePoint>,
    weights: Vec<f64>,
    pub(crate) layout: Layout,
}

// Circle nodes are shifted by a third of a step: that never lands on the
// poles ±π/2 whatever the node count.
const CIRCLE_SHIFT: f64 = 1.0 / 3.0;

impl QuadratureGrid {
    /// Builds the product rule for `n ∈ {1, 2}`, exact for spherical
    /// polynomials of degree ≤ `2·degree`.
    pub fn new(n: usize, degree: usize) -> Result<Self> {
        Self::with_offset(n, degree, 0.0)
    }

    /// Same rule rotated about the polar axis by `offset` radians.
    pub fn with_offset(n: usize, degree: usize, offset: f64) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidDegree);
        }
        match n {
            1 => {
                let count = 2 * degree + 2;
                let w = 2.0 * PI / count as f64;
                let nodes = (0..count)
                    .map(|k| {
                        SpherePoint::from_angle(offset + 2.0 * PI * (k as f64 + CIRCLE_SHIFT) / count as f64)
                    })
                    .collect();
                Ok(Self {
                    n,
                    degree,
                    nodes,
                    weights: alloc::vec![w; count],
                    layout: Layout::Circle { count, offset },
                })
            }
            2 => {
                let (cos_theta, ring_weights) = gauss_legendre(degree + 1);
                let n_azimuth = 2 * degree + 2;
                let dphi = 2.0 * PI / n_azimuth as f64;
                let mut nodes = Vec::with_capacity(cos_theta.len() * n_azimuth);
                let mut weights = Vec::with_capacity(nodes.capacity());
                for (&x, &g) in cos_theta.iter().zip(&ring_weights) {
                    let s = sqrt((1.0 - x * x).max(0.0));
                    for k in 0..n_azimuth {
                        let phi = offset + dphi * k as f64;
                        nodes.push(SpherePoint {
                            coords: alloc::vec![s * cos(phi), s * sin(phi), x],
                        });
                        weights.push(g * dphi);
                    }
                }
                Ok(Self {
                    n,
                    degree,
                    nodes,
                    weights,
                    layout: Layout::Product {
                        cos_theta,
                        ring_weights,
                        n_azimuth,
                        offset,
                    },
                })
            }
            0 => Err(Error::InvalidDimension(0)),
            _ => Err(Error::UnsupportedGridDimension(n)),
        }
    }

    /// The same rule rotated by a further `angle` about the polar axis.
    pub fn rotated(&self, angle: f64) -> Self {
        Self::with_offset(self.n, self.degree, self.offset() + angle)
            .expect("parameters already validated")
    }

    /// Sphere dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Declared degree; the rule is exact up to polynomial degree `2·degree`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Quadrature nodes.
    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    /// Surface-measure weights, aligned with [`nodes`](Self::nodes).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Always false; grids have at least four nodes.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Rotation about the polar axis.
    pub fn offset(&self) -> f64 {
        match self.layout {
            Layout::Circle { offset, .. } | Layout::Product { offset, .. } => offset,
        }
    }

    /// Smallest chordal distance between two distinct nodes.
    pub fn min_spacing(&self) -> f64 {
        match &self.layout {
            Layout::Circle { count, .. } => 2.0 * sin(PI / *count as f64),
            Layout::Product {
                cos_theta,
                n_azimuth,
                ..
            } => {
                let half = sin(PI / *n_azimuth as f64);
                let thetas: Vec<f64> = cos_theta.iter().map(|&x| libm::acos(x)).collect();
                let along = thetas
                    .iter()
                    .map(|&t| 2.0 * sin(t) * half)
                    .fold(f64::INFINITY, f64::min);
                let across = thetas
                    .windows(2)
                    .map(|w| 2.0 * sin((w[1] - w[0]).abs() / 2.0))
                    .fold(f64::INFINITY, f64::min);
                along.min(across)
            }
        }
    }

    /// Σ wᵢ f(ξᵢ).
    pub fn integrate(&self, f: &GridFunction) -> Result<f64> {
        if !self.same_rule(&f.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(self.integrate_values(&f.values))
    }

    pub(crate) fn integrate_values(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        compensated_sum(self.weights.iter().zip(values).map(|(w, v)| w * v))
    }

    /// Σ wᵢ f(ξᵢ) for a function evaluated on the fly.
    pub fn integrate_fn(&self, f: &dyn SphereFunction) -> Result<f64> {
        let mut acc = Accumulator::new();
        for (p, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f.eval(p)?);
        }
        Ok(acc.total())
    }

    pub(crate) fn same_rule(&self, other: &QuadratureGrid) -> bool {
        core::ptr::eq(self, other)
            || (self.n == other.n && self.degree == other.degree && self.offset() == other.offset())
    }
}

/// Builds the product quadrature grid; see [`QuadratureGrid::new`].
pub fn build_grid(n: usize, degree: usize) -> Result<QuadratureGrid> {
    QuadratureGrid::new(n, degree)
}

/// Σ wᵢ f(ξᵢ); fails when `f` was sampled on another grid.
pub fn integrate(grid: &QuadratureGrid, f: &GridFunction) -> Result<f64> {
    grid.integrate(f)
}

/// Values sampled at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<QuadratureGrid>,
    values: Vec<f64>,
}

impl GridFunction {
    /// Wraps node values; the length must match the node count.
    pub fn new(grid: &Arc<QuadratureGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values,
        })
    }

    /// Samples an infallible closure.
    pub fn from_fn(grid: &Arc<QuadratureGrid>, f: impl Fn(&SpherePoint) -> f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: grid.nodes().iter().map(f).collect(),
        }
    }

    /// The grid the values live on.
    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    /// Node values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination with another function on the same grid.
    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.grid.same_rule(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// ∫ f over the sphere.
    pub fn integral(&self) -> f64 {
        self.grid.integrate_values(&self.values)
    }

    /// Quadrature L² norm squared.
    pub fn norm_sq(&self) -> f64 {
        compensated_sum(self.grid.weights().iter().zip(&self.values).map(|(w, v)| w * v * v))
    }

    /// Largest absolute node value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Gauss–Legendre nodes (descending) and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; count];
    let mut weights = alloc::vec![0.0; count];
    let nf = count as f64;
    for i in 0..count.div_ceil(2) {
        let mut x = cos(PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(count, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(count, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[count - 1 - i] = -x;
        weights[count - 1 - i] = w;
    }
    if count % 2 == 1 {
        nodes[count / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn area_formula() {
        assert!((sphere_area(1).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(2).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3).unwrap() - 2.0 * PI * PI).abs() < 1e-13);
        assert_eq!(sphere_area(0), Err(Error::InvalidDimension(0)));
    }

    #[test]
    fn circle_rule_shape() {
        let g = build_grid(1, 3).unwrap();
        assert_eq!(g.len(), 8);
        for w in g.weights() {
            assert!((w - 2.0 * PI / 8.0).abs() < 1e-15);
        }
    }

    #[test]
    fn product_rule_counts_and_area() {
        for degree in [1, 4, 16, 33] {
            let g = build_grid(2, degree).unwrap();
            assert_eq!(g.len(), (degree + 1) * (2 * degree + 2));
            assert!(g.weights().iter().all(|&w| w > 0.0));
            let total: f64 = compensated_sum(g.weights().iter().copied());
            assert!((total / (4.0 * PI) - 1.0).abs() < 1e-10);
        }
        let total: f64 = build_grid(1, 5).unwrap().weights().iter().sum();
        assert!((total / (2.0 * PI) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn higher_dimensions_rejected() {
        assert_eq!(build_grid(3, 4), Err(Error::UnsupportedGridDimension(3)));
        assert_eq!(build_grid(2, 0), Err(Error::InvalidDegree));
    }

    #[test]
    fn gauss_legendre_integrates_monomials() {
        let (x, w) = gauss_legendre(7);
        for k in 0..=13u32 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * libm::pow(*x, k as f64)).sum();
            let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn nodes_avoid_poles() {
        for n in [1, 2] {
            for degree in 1..40 {
                let g = build_grid(n, degree).unwrap();
                for p in g.nodes() {
                    assert!((1.0 + p.height()).abs() > 1e-6);
                    assert!((1.0 - p.height()).abs() > 1e-6);
                }
            }
        }
    }

    #[test]
    fn integrate_rejects_foreign_function() {
        let a = Arc::new(build_grid(2, 4).unwrap());
        let b = Arc::new(build_grid(2, 5).unwrap());
        let f = GridFunction::from_fn(&b, |_| 1.0);
        assert_eq!(integrate(&a, &f), Err(Error::GridMismatch));
        let f = GridFunction::from_fn(&a, |_| 1.0);
        assert!((integrate(&a, &f).unwrap() - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn min_spacing_matches_brute_force() {
        for (n, d) in [(1, 5), (2, 6), (2, 11)] {
            let g = build_grid(n, d).unwrap();
            let mut best = f64::INFINITY;
            for i in 0..g.len() {
                for j in 0..i {
                    best = best.min(chordal_distance(&g.nodes()[i], &g.nodes()[j]).unwrap());
                }
            }
            assert!((g.min_spacing() - best).abs() < 1e-12, "{} vs {}", g.min_spacing(), best);
        }
    }

    #[test]
    fn distance_examples() {
        let a = SpherePoint::new(alloc::vec![1.0, 0.0, 0.0]).unwrap();
        let b = SpherePoint::new(alloc::vec![0.0, 1.0, 0.0]).unwrap();
        let c = SpherePoint::new(alloc::vec![-1.0, 0.0, 0.0]).unwrap();
        assert_eq!(chordal_distance(&a, &a).unwrap(), 0.0);
        assert!((chordal_distance(&a, &c).unwrap() - 2.0).abs() < 1e-15);
        assert!((chordal_distance(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let d = SpherePoint::north_pole(1);
        assert!(chordal_distance(&a, &d).is_err());
    }

    fn point3() -> impl Strategy<Value = SpherePoint> {
        prop::array::uniform3(-1.0f64..1.0)
            .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
            .prop_map(|v| SpherePoint::new(v.to_vec()).unwrap())
    }

    proptest! {
        #[test]
        fn construction_normalizes(v in prop::array::uniform4(-5.0f64..5.0)) {
            prop_assume!(v.iter().map(|x| x * x).sum::<f64>() > 1e-8);
            let p = SpherePoint::new(v.to_vec()).unwrap();
            prop_assert!((norm(p.coords()) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn chordal_metric_axioms(a in point3(), b in point3(), c in point3()) {
            let ab = chordal_distance(&a, &b).unwrap();
            let ba = chordal_distance(&b, &a).unwrap();
            let bc = chordal_distance(&b, &c).unwrap();
            let ac = chordal_distance(&a, &c).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ac <= ab + bc + 1e-14);
            prop_assert!((0.0..=2.0 + 1e-15).contains(&ab));
        }
    }
}
