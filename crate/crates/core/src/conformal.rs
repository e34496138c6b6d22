//! Stereographic projection, lifted inversions and reflections, Möbius maps
//! of the sphere, pullbacks and the extremizer family.
//!
//! All three map families are involutions, so each map is its own inverse
//! and `J_Φ = J_{Φ⁻¹}`.

use alloc::vec::Vec;

use libm::{pow, sqrt};

use crate::sphere::{dist_sq, dot, norm, QuadratureGrid, SphereFunction, SpherePoint};
use crate::{Error, Result};

const POLE_TOL: f64 = 1e-14;

/// Inverse stereographic projection `𝒮: ℝⁿ → 𝕊ⁿ∖{S}`.
pub fn stereographic(x: &[f64]) -> Result<SpherePoint> {
    if x.is_empty() {
        return Err(Error::InvalidDimension(0));
    }
    let r2 = dot(x, x);
    let d = 1.0 + r2;
    let mut coords: Vec<f64> = x.iter().map(|v| 2.0 * v / d).collect();
    coords.push((1.0 - r2) / d);
    SpherePoint::new(coords)
}

/// Stereographic projection `𝒮⁻¹(ξ)_i = ξ_i/(1+ξ_{n+1})`.
pub fn inverse_stereographic(xi: &SpherePoint) -> Result<Vec<f64>> {
    let c = xi.coords();
    let d = 1.0 + xi.height();
    if d < POLE_TOL {
        return Err(Error::Pole("south pole has no stereographic image"));
    }
    Ok(c[..c.len() - 1].iter().map(|v| v / d).collect())
}

/// Jacobian of `𝒮` at `x`: (2/(1+|x|²))ⁿ.
fn stereo_factor(x: &[f64]) -> f64 {
    2.0 / (1.0 + dot(x, x))
}

/// Lifted inversion `Φ_{λ,ξ₀} = 𝒮∘I_{λ,x₀}∘𝒮⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    lambda: f64,
    xi0: SpherePoint,
    x0: Vec<f64>,
}

impl Inversion {
    /// Radius λ of the planar sphere.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Centre on the sphere.
    pub fn xi0(&self) -> &SpherePoint {
        &self.xi0
    }

    /// Centre in the plane, `𝒮⁻¹(ξ₀)`.
    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    fn plane_offset(&self, xi: &SpherePoint) -> Result<(Vec<f64>, f64)> {
        let x = inverse_stereographic(xi)?;
        let d: Vec<f64> = x.iter().zip(&self.x0).map(|(a, b)| a - b).collect();
        let d2 = dot(&d, &d);
        if d2 <= POLE_TOL * POLE_TOL * (1.0 + dot(&self.x0, &self.x0)) {
            return Err(Error::Pole("inversion centre"));
        }
        Ok((d, d2))
    }
}

/// Lifted reflection `Ψ_{α,e} = 𝒮∘R_{α,e}∘𝒮⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reflection {
    alpha: f64,
    e: Vec<f64>,
}

impl Reflection {
    /// Offset α of the hyperplane `x·e = α`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Unit normal `e ∈ 𝕊ⁿ⁻¹`.
    pub fn normal(&self) -> &[f64] {
        &self.e
    }
}

/// The involutive Möbius map carrying the constant 1 to the extremizer
/// with parameter ζ: inversion in the sphere orthogonal to 𝕊ⁿ centred at
/// `a/|a|²`, `a = ζ/(1+√(1−|ζ|²))`. ζ = 0 is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Moebius {
    zeta: Vec<f64>,
    a: Vec<f64>,
    a2: f64,
}

impl Moebius {
    /// The parameter ζ.
    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    fn is_identity(&self) -> bool {
        self.a2 == 0.0
    }
}

/// A conformal self-map of 𝕊ⁿ from one of the three families.
#[derive(Debug, Clone, PartialEq)]
pub enum ConformalMap {
    /// `Φ_{λ,ξ₀}`.
    LiftedInversion(Inversion),
    /// `Ψ_{α,e}`.
    LiftedReflection(Reflection),
    /// Möbius map with parameter ζ.
    Moebius(Moebius),
}

impl ConformalMap {
    /// `Φ_{λ,ξ₀}`; requires λ > 0 and ξ₀ ≠ S.
    pub fn inversion(lambda: f64, xi0: SpherePoint) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter("inversion radius must be positive"));
        }
        let x0 = inverse_stereographic(&xi0)?;
        Ok(Self::LiftedInversion(Inversion { lambda, xi0, x0 }))
    }

    /// `Φ_{λ,𝒮(x₀)}` from the planar centre.
    pub fn inversion_at(lambda: f64, x0: &[f64]) -> Result<Self> {
        Self::inversion(lambda, stereographic(x0)?)
    }

    /// `Ψ_{α,e}`; `e` is normalized.
    pub fn reflection(alpha: f64, e: Vec<f64>) -> Result<Self> {
        if e.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if !alpha.is_finite() {
            return Err(Error::Parameter("reflection offset must be finite"));
        }
        let r = norm(&e);
        if r == 0.0 || !r.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self::LiftedReflection(Reflection {
            alpha,
            e: e.into_iter().map(|v| v / r).collect(),
        }))
    }

    /// Möbius map with `ζ ∈ ℝⁿ⁺¹`, `|ζ| < 1`.
    pub fn moebius(zeta: Vec<f64>) -> Result<Self> {
        if zeta.len() < 2 {
            return Err(Error::InvalidDimension(zeta.len().saturating_sub(1)));
        }
        let z2 = dot(&zeta, &zeta);
        if !(z2 < 1.0) {
            return Err(Error::Parameter("Möbius parameter needs |zeta| < 1"));
        }
        let k = 1.0 / (1.0 + sqrt(1.0 - z2));
        let a: Vec<f64> = zeta.iter().map(|v| k * v).collect();
        let a2 = dot(&a, &a);
        Ok(Self::Moebius(Moebius { zeta, a, a2 }))
    }

    /// The identity, as the Möbius map with ζ = 0.
    pub fn identity(n: usize) -> Result<Self> {
        Self::moebius(alloc::vec![0.0; n + 1])
    }

    /// Sphere dimension n.
    pub fn dim(&self) -> usize {
        match self {
            Self::LiftedInversion(m) => m.xi0.dim(),
            Self::LiftedReflection(m) => m.e.len(),
            Self::Moebius(m) => m.zeta.len() - 1,
        }
    }

    fn check(&self, xi: &SpherePoint) -> Result<()> {
        if xi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: xi.dim(),
            });
        }
        Ok(())
    }

    /// Φ(ξ).
    pub fn apply(&self, xi: &SpherePoint) -> Result<SpherePoint> {
        self.check(xi)?;
        match self {
            Self::LiftedInversion(m) => {
                let (d, d2) = m.plane_offset(xi)?;
                let k = m.lambda * m.lambda / d2;
                let y: Vec<f64> = d.iter().zip(&m.x0).map(|(v, c)| k * v + c).collect();
                stereographic(&y)
            }
            Self::LiftedReflection(m) => {
                let x = inverse_stereographic(xi)?;
                let t = 2.0 * (m.alpha - dot(&x, &m.e));
                let y: Vec<f64> = x.iter().zip(&m.e).map(|(v, e)| v + t * e).collect();
                stereographic(&y)
            }
            Self::Moebius(m) => {
                if m.is_identity() {
                    return Ok(xi.clone());
                }
                let w = xi.coords();
                let aw = dot(&m.a, w);
                let den = 1.0 - 2.0 * aw + m.a2;
                let proj = 2.0 * aw / m.a2;
                let coords = w
                    .iter()
                    .zip(&m.a)
                    .map(|(x, a)| ((1.0 - m.a2) * x + 2.0 * a - proj * a) / den)
                    .collect();
                SpherePoint::new(coords)
            }
        }
    }

    /// `J_Φ(ξ) = |det DΦ(ξ)|`, by the chain rule on the closed-form factors.
    pub fn jacobian(&self, xi: &SpherePoint) -> Result<f64> {
        self.check(xi)?;
        let n = self.dim() as i32;
        let base = match self {
            Self::LiftedInversion(m) => {
                let (d, d2) = m.plane_offset(xi)?;
                let k = m.lambda * m.lambda / d2;
                let y: Vec<f64> = d.iter().zip(&m.x0).map(|(v, c)| k * v + c).collect();
                stereo_factor(&y) * k / (1.0 + xi.height())
            }
            Self::LiftedReflection(m) => {
                let x = inverse_stereographic(xi)?;
                let t = 2.0 * (m.alpha - dot(&x, &m.e));
                let y: Vec<f64> = x.iter().zip(&m.e).map(|(v, e)| v + t * e).collect();
                stereo_factor(&y) / (1.0 + xi.height())
            }
            Self::Moebius(m) => {
                if m.is_identity() {
                    return Ok(1.0);
                }
                (1.0 - m.a2) / (1.0 - 2.0 * dot(&m.a, xi.coords()) + m.a2)
            }
        };
        Ok(libm::pow(base, n as f64))
    }

    /// Φ⁻¹; every supported map is an involution.
    pub fn inverse(&self) -> Self {
        self.clone()
    }

    /// The region Σ on which the moving-spheres comparison takes place.
    pub fn sigma(&self) -> Option<SigmaRegion> {
        match self {
            Self::LiftedInversion(m) => Some(SigmaRegion::Ball {
                lambda: m.lambda,
                x0: m.x0.clone(),
            }),
            Self::LiftedReflection(m) => Some(SigmaRegion::HalfSpace {
                alpha: m.alpha,
                e: m.e.clone(),
            }),
            Self::Moebius(_) => None,
        }
    }
}

/// `Σ_{λ,ξ₀} = 𝒮(B_λ(x₀))` or `𝒮(H_{α,e})`.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaRegion {
    /// Image of the open ball `B_λ(x₀)`.
    Ball {
        /// Radius.
        lambda: f64,
        /// Planar centre.
        x0: Vec<f64>,
    },
    /// Image of the open half-space `{x·e > α}`.
    HalfSpace {
        /// Offset.
        alpha: f64,
        /// Unit normal.
        e: Vec<f64>,
    },
}

impl SigmaRegion {
    /// Strict membership test.
    pub fn contains(&self, xi: &SpherePoint) -> Result<bool> {
        let x = inverse_stereographic(xi)?;
        match self {
            Self::Ball { lambda, x0 } => {
                if x0.len() != x.len() {
                    return Err(Error::DimensionMismatch {
                        expected: x0.len(),
                        found: x.len(),
                    });
                }
                Ok(dist_sq(&x, x0) < lambda * lambda)
            }
            Self::HalfSpace { alpha, e } => {
                if e.len() != x.len() {
                    return Err(Error::DimensionMismatch {
                        expected: e.len(),
                        found: x.len(),
                    });
                }
                Ok(dot(&x, e) > *alpha)
            }
        }
    }
}

/// `ξ ∈ Σ`.
pub fn in_sigma(region: &SigmaRegion, xi: &SpherePoint) -> Result<bool> {
    region.contains(xi)
}

/// `u_Φ = J_Φ^{1/2}·u∘Φ`.
pub struct Pullback<'a> {
    u: &'a dyn SphereFunction,
    map: ConformalMap,
}

impl<'a> Pullback<'a> {
    /// Pullback of `u` under `map`.
    pub fn new(u: &'a dyn SphereFunction, map: ConformalMap) -> Self {
        Self { u, map }
    }

    /// The map Φ.
    pub fn map(&self) -> &ConformalMap {
        &self.map
    }
}

impl SphereFunction for Pullback<'_> {
    fn eval(&self, xi: &SpherePoint) -> Result<f64> {
        let j = self.map.jacobian(xi)?;
        Ok(sqrt(j) * self.u.eval(&self.map.apply(xi)?)?)
    }
}

/// Pullback `u_Φ` of `u`.
pub fn pullback<'a>(u: &'a dyn SphereFunction, map: &ConformalMap) -> Pullback<'a> {
    Pullback::new(u, map.clone())
}

/// Parameters (ζ, c) of `c(√(1−|ζ|²)/(1−ζ·ω))^{n/2}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtremizerParams {
    /// ζ ∈ ℝⁿ⁺¹, |ζ| < 1.
    pub zeta: Vec<f64>,
    /// Amplitude c ≥ 0.
    pub c: f64,
}

impl ExtremizerParams {
    /// Validated parameters.
    pub fn new(zeta: Vec<f64>, c: f64) -> Result<Self> {
        let p = Self { zeta, c };
        p.validate()?;
        Ok(p)
    }

    /// The constant `c` on 𝕊ⁿ.
    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(alloc::vec![0.0; n + 1], c)
    }

    /// Sphere dimension.
    pub fn dim(&self) -> usize {
        self.zeta.len().saturating_sub(1)
    }

    /// |ζ|.
    pub fn zeta_norm(&self) -> f64 {
        norm(&self.zeta)
    }

    fn validate(&self) -> Result<()> {
        if self.zeta.len() < 2 {
            return Err(Error::InvalidDimension(self.dim()));
        }
        if !(dot(&self.zeta, &self.zeta) < 1.0) {
            return Err(Error::Parameter("extremizer needs |zeta| < 1"));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(Error::Parameter("extremizer amplitude must be nonnegative"));
        }
        Ok(())
    }

    /// The Möbius map Φ with `extremizer(ζ, 1) = 1_Φ`.
    pub fn map(&self) -> Result<ConformalMap> {
        ConformalMap::moebius(self.zeta.clone())
    }

    /// Planar bubble `c(2b/(b²+|x−a|²))^{n/2}` equal to the plane pullback.
    pub fn bubble(&self) -> Result<Bubble> {
        self.validate()?;
        let n = self.dim();
        let t = self.zeta[n];
        let q = sqrt(1.0 - dot(&self.zeta, &self.zeta));
        Ok(Bubble {
            a: self.zeta[..n].iter().map(|z| z / (1.0 + t)).collect(),
            b: q / (1.0 + t),
            c: self.c,
        })
    }
}

/// `ω ↦ c(√(1−|ζ|²)/(1−ζ·ω))^{n/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremizer {
    params: ExtremizerParams,
    q: f64,
}

impl Extremizer {
    /// Parameters of this member.
    pub fn params(&self) -> &ExtremizerParams {
        &self.params
    }
}

/// The extremizer with parameters `p`.
pub fn extremizer(p: &ExtremizerParams) -> Result<Extremizer> {
    p.validate()?;
    Ok(Extremizer {
        q: sqrt(1.0 - dot(&p.zeta, &p.zeta)),
        params: p.clone(),
    })
}

impl SphereFunction for Extremizer {
    fn eval(&self, xi: &SpherePoint) -> Result<f64> {
        let n = self.params.dim();
        if xi.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: xi.dim(),
            });
        }
        let base = self.q / (1.0 - dot(&self.params.zeta, xi.coords()));
        Ok(self.params.c * pow(base, n as f64 / 2.0))
    }
}

/// Standard bubble on ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct Bubble {
    /// Centre a.
    pub a: Vec<f64>,
    /// Scale b > 0.
    pub b: f64,
    /// Amplitude c.
    pub c: f64,
}

impl Bubble {
    /// `c(2b/(b²+|x−a|²))^{n/2}`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.a.len() {
            return Err(Error::DimensionMismatch {
                expected: self.a.len(),
                found: x.len(),
            });
        }
        let base = 2.0 * self.b / (self.b * self.b + dist_sq(x, &self.a));
        Ok(self.c * pow(base, self.a.len() as f64 / 2.0))
    }

    /// The sphere-side parameters: with η = 𝒮(a),
    /// ζ = (2η − b²(1+η_{n+1})e_{n+1})/(2 + b²(1+η_{n+1})).
    pub fn sphere_params(&self) -> Result<ExtremizerParams> {
        if !(self.b > 0.0) {
            return Err(Error::Parameter("bubble scale must be positive"));
        }
        let eta = stereographic(&self.a)?;
        let n = self.a.len();
        let k = self.b * self.b * (1.0 + eta.height());
        let mut zeta: Vec<f64> = eta.coords().iter().map(|v| 2.0 * v).collect();
        zeta[n] -= k;
        let den = 2.0 + k;
        zeta.iter_mut().for_each(|v| *v /= den);
        ExtremizerParams::new(zeta, self.c)
    }
}

/// `v(x) = (2/(1+|x|²))^{n/2} u(𝒮(x))`.
pub struct PlanePullback<'a> {
    u: &'a dyn SphereFunction,
}

impl PlanePullback<'_> {
    /// Value at `x ∈ ℝⁿ`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let f = stereo_factor(x);
        Ok(pow(f, x.len() as f64 / 2.0) * self.u.eval(&stereographic(x)?)?)
    }
}

/// Planar pullback `u_𝒮` of a sphere function.
pub fn pullback_to_plane(u: &dyn SphereFunction) -> PlanePullback<'_> {
    PlanePullback { u }
}

/// `l(ξ,η) = 1/|ξ−η|ⁿ − J_Φ^{1/2}(η)/|ξ−Φ(η)|ⁿ`.
pub fn kernel_l(map: &ConformalMap, xi: &SpherePoint, eta: &SpherePoint) -> Result<f64> {
    map.check(xi)?;
    let n = map.dim() as f64;
    let d2 = dist_sq(xi.coords(), eta.coords());
    if d2 == 0.0 {
        return Err(Error::Parameter("kernel needs distinct points"));
    }
    let image = map.apply(eta)?;
    let j = map.jacobian(eta)?;
    let e2 = dist_sq(xi.coords(), image.coords());
    if e2 == 0.0 {
        return Err(Error::Parameter("xi coincides with the image of eta"));
    }
    Ok(pow(d2, -n / 2.0) - sqrt(j) * pow(e2, -n / 2.0))
}

/// max over grid nodes in Σ of |w(η) + J_Φ(η)^{1/2} w(Φ(η))|.
pub fn antisymmetry_defect(
    w: &dyn SphereFunction,
    map: &ConformalMap,
    region: &SigmaRegion,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for eta in grid.nodes() {
        if !region.contains(eta)? {
            continue;
        }
        let j = map.jacobian(eta)?;
        let d = w.eval(eta)? + sqrt(j) * w.eval(&map.apply(eta)?)?;
        worst = worst.max(d.abs());
    }
    Ok(worst)
}
