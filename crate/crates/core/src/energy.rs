//! The quadratic form `ℰ`, the log-Sobolev functional and its deficit, weak
//! Euler–Lagrange residuals, the conformal transformation rules and the
//! entropy (Gibbs) inequality.

use alloc::sync::Arc;
use alloc::vec::Vec;

use libm::{exp, log, pow, sqrt};

use crate::conformal::{pullback, ConformalMap};
use crate::harmonics::{multiplier_h, HarmonicCoeffs, MultiplierTable, Transform};
use crate::special::digamma;
use crate::sphere::{sphere_area, GridFunction, QuadratureGrid, SphereFunction};
use crate::sum::Accumulator;
use crate::{Error, Result};

/// Values below this are treated as this in `u ln u`.
pub const FLOOR: f64 = 1e-12;

/// Sharp constant `C_n = (4/n)π^{n/2}/Γ(n/2)`.
pub fn constant_cn(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let half = n as f64 / 2.0;
    Ok(4.0 / n as f64 * exp(half * log(core::f64::consts::PI) - crate::special::ln_gamma(half)?))
}

/// `ℰ[u,v] = Σ h_l u_{l,m} v_{l,m}`.
pub fn energy_spectral(u: &HarmonicCoeffs, v: &HarmonicCoeffs) -> Result<f64> {
    u.check_same_shape(v)?;
    MultiplierTable::log_operator(u.dim(), u.band_limit())?.quadratic_form(u, v)
}

fn check_pair(u: &GridFunction, v: &GridFunction) -> Result<()> {
    if !Arc::ptr_eq(u.grid(), v.grid()) && !u.grid().same_rule(v.grid()) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// ½ Σ_{|ξ_i−ξ_j| ≥ ε} w_i w_j (u_i−u_j)(v_i−v_j)/|ξ_i−ξ_j|ⁿ.
///
/// `eps` must be at least twice the smallest node spacing.
pub fn energy_direct(u: &GridFunction, v: &GridFunction, eps: f64) -> Result<f64> {
    check_pair(u, v)?;
    let grid = u.grid();
    let min = 2.0 * grid.min_spacing();
    if !(eps >= min) {
        return Err(Error::EpsilonTooSmall { eps, min });
    }
    let n = grid.dim() as i32;
    let eps2 = eps * eps;
    let (x, w) = (grid.nodes(), grid.weights());
    let (uv, vv) = (u.values(), v.values());
    let mut total = Accumulator::new();
    for i in 0..x.len() {
        let xi = x[i].coords();
        let mut row = Accumulator::new();
        for j in (i + 1)..x.len() {
            let d2 = crate::sphere::dist_sq(xi, x[j].coords());
            if d2 < eps2 {
                continue;
            }
            let kernel = if n == 2 { 1.0 / d2 } else { 1.0 / pow(d2, 0.5 * n as f64) };
            row.add(w[j] * (uv[i] - uv[j]) * (vv[i] - vv[j]) * kernel);
        }
        total.add(w[i] * row.total());
    }
    // The pair sum over i<j already equals ½ of the full double sum.
    Ok(total.total())
}

/// [`energy_direct`] at ε and 2ε combined to cancel the O(ε²) cap loss.
pub fn energy_direct_extrapolated(u: &GridFunction, v: &GridFunction, eps: f64) -> Result<f64> {
    let near = energy_direct(u, v, eps)?;
    let far = energy_direct(u, v, 2.0 * eps)?;
    Ok((4.0 * near - far) / 3.0)
}

/// Both sides of `∬(v(ω)−v(η))²/|ω−η|ⁿ = n·C_n·Σ(ψ(l+n/2)−ψ(n/2))v_{l,m}²`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyIdentity {
    /// Double integral by direct quadrature (ε-extrapolated).
    pub direct: f64,
    /// Digamma sum side.
    pub spectral: f64,
    /// |direct − spectral|/|spectral|.
    pub relative_error: f64,
    /// Grid degree of the direct quadrature.
    pub grid_degree: usize,
    /// Exclusion radius.
    pub eps: f64,
}

/// Checks the spectral energy identity for `v` on `grid`. `eps` defaults to
/// twice the smallest node spacing.
pub fn energy_identity(v: &HarmonicCoeffs, grid: &Arc<QuadratureGrid>, eps: Option<f64>) -> Result<EnergyIdentity> {
    let n = v.dim();
    let half = n as f64 / 2.0;
    let base = digamma(half)?;
    let mut acc = Accumulator::new();
    for (l, _, c) in v.iter() {
        acc.add((digamma(l as f64 + half)? - base) * c * c);
    }
    let spectral = n as f64 * constant_cn(n)? * acc.total();
    let f = v.synthesize(grid)?;
    let eps = eps.unwrap_or(2.0 * grid.min_spacing());
    let direct = 2.0 * energy_direct_extrapolated(&f, &f, eps)?;
    Ok(EnergyIdentity {
        direct,
        spectral,
        relative_error: (direct - spectral).abs() / spectral.abs(),
        grid_degree: grid.degree(),
        eps,
    })
}

fn x_ln_x2(x: f64, scale: f64) -> f64 {
    // x² ln(x²·scale) with 0·ln 0 = 0.
    let s = x * x;
    if s == 0.0 {
        0.0
    } else {
        s * log(s * scale)
    }
}

/// `C_n ∫ u² ln(u²|𝕊ⁿ|/‖u‖₂²)`.
pub fn beckner_rhs(u: &GridFunction) -> Result<f64> {
    let grid = u.grid();
    let n = grid.dim();
    let norm = u.norm_sq();
    if norm == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let scale = sphere_area(n)? / norm;
    let vals: Vec<f64> = u.values().iter().map(|&x| x_ln_x2(x, scale)).collect();
    Ok(constant_cn(n)? * grid.integrate_values(&vals))
}

/// Both sides and the gap of the log-Sobolev inequality.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeficitReport {
    /// 2ℰ[u,u].
    pub energy_term: f64,
    /// C_n ∫u² ln(u²|𝕊ⁿ|/‖u‖₂²).
    pub entropy_term: f64,
    /// energy_term − entropy_term.
    pub deficit: f64,
    /// Sphere dimension.
    pub n: usize,
    /// Band limit of u.
    pub band_limit: usize,
    /// Degree of the grid used for the entropy.
    pub grid_degree: usize,
}

impl DeficitReport {
    /// deficit / energy_term (0 when both vanish).
    pub fn relative(&self) -> f64 {
        if self.energy_term == 0.0 {
            self.deficit
        } else {
            self.deficit / self.energy_term
        }
    }
}

/// Log-Sobolev deficit with the spectral energy and the entropy by
/// quadrature on `grid`.
pub fn beckner_deficit(u: &HarmonicCoeffs, grid: &Arc<QuadratureGrid>) -> Result<DeficitReport> {
    let energy_term = 2.0 * energy_spectral(u, u)?;
    let entropy_term = beckner_rhs(&u.synthesize(grid)?)?;
    Ok(DeficitReport {
        energy_term,
        entropy_term,
        deficit: energy_term - entropy_term,
        n: u.dim(),
        band_limit: u.band_limit(),
        grid_degree: grid.degree(),
    })
}

/// Weak residuals `r_{l,m} = ℰ[Y_{l,m},u] − C_n ∫ Y_{l,m} u ln u`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ElResidual {
    /// Residuals for test harmonics up to `l_test`.
    pub residuals: HarmonicCoeffs,
    /// max |r_{l,m}|.
    pub max_abs: f64,
    /// Whether u was floored at [`FLOOR`] somewhere.
    pub floored: bool,
    /// Band limit of u.
    pub band_limit: usize,
    /// Highest test degree.
    pub l_test: usize,
    /// Degree of the grid used for `u ln u`.
    pub grid_degree: usize,
}

/// Weak Euler–Lagrange residual of `u` against `Y_{l,m}`, `l ≤ l_test`.
/// Nonpositive node values are an error unless `allow_floor`.
pub fn el_residual(u: &HarmonicCoeffs, l_test: usize, grid: &Arc<QuadratureGrid>, allow_floor: bool) -> Result<ElResidual> {
    let n = u.dim();
    let values = u.synthesize(grid)?;
    let mut floored = false;
    let g: Vec<f64> = values
        .values()
        .iter()
        .map(|&x| {
            let x = if x > FLOOR {
                x
            } else {
                floored = true;
                FLOOR
            };
            x * log(x)
        })
        .collect();
    if floored && !allow_floor {
        return Err(Error::NonPositive);
    }
    let proj = Transform::new(grid, l_test)?.analyze(&g)?;
    let hu = MultiplierTable::log_operator(n, l_test)?.apply(&u.with_band_limit(l_test))?;
    let cn = constant_cn(n)?;
    let residuals = hu.add_scaled(-cn, &proj)?;
    let max_abs = residuals.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(ElResidual {
        residuals,
        max_abs,
        floored,
        band_limit: u.band_limit(),
        l_test,
        grid_degree: grid.degree(),
    })
}

/// Pullback of a band-limited function re-projected to a working band
/// limit, with its Parseval defect.
struct Projected {
    coeffs: HarmonicCoeffs,
    truncation: f64,
}

fn project_pullback(u: &HarmonicCoeffs, map: &ConformalMap, grid: &Arc<QuadratureGrid>, l_work: usize) -> Result<Projected> {
    let sampled = pullback(u, map).sample(grid)?;
    let coeffs = Transform::new(grid, l_work)?.analyze(sampled.values())?;
    let norm = sampled.norm_sq();
    if !norm.is_finite() || coeffs.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence("pullback projection overflow"));
    }
    let truncation = (norm - coeffs.norm_sq()).abs() / norm.max(f64::MIN_POSITIVE);
    Ok(Projected { coeffs, truncation })
}

/// Residual of `ℰ[u_Φ,v_Φ] = ℰ[u,v] + C_n ∫ u v ln J_{Φ⁻¹}^{−1/2}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfEReport {
    /// ℰ[u_Φ,v_Φ] after projection to the working band limit.
    pub lhs: f64,
    /// ℰ[u,v] + C_n ∫ u v ln J_{Φ⁻¹}^{−1/2}.
    pub rhs: f64,
    /// ℰ[u,v].
    pub energy: f64,
    /// |lhs − rhs|.
    pub residual: f64,
    /// Relative L² mass of the pullbacks lost above the working band limit.
    pub truncation: f64,
    /// Working band limit L′.
    pub l_work: usize,
}

fn working_grid(n: usize, l_work: usize) -> Result<Arc<QuadratureGrid>> {
    Ok(Arc::new(QuadratureGrid::new(n, 2 * l_work)?))
}

/// Checks the conformal transformation rule of `ℰ`; pullbacks are
/// projected to `l_work` on a grid of degree `2·l_work`.
pub fn verify_conf_e(u: &HarmonicCoeffs, v: &HarmonicCoeffs, map: &ConformalMap, l_work: usize) -> Result<ConfEReport> {
    u.check_same_shape(v)?;
    if map.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: map.dim(),
        });
    }
    let grid = working_grid(u.dim(), l_work.max(u.band_limit()))?;
    let pu = project_pullback(u, map, &grid, l_work)?;
    let pv = project_pullback(v, map, &grid, l_work)?;
    let lhs = energy_spectral(&pu.coeffs, &pv.coeffs)?;
    let energy = energy_spectral(u, v)?;
    let inverse = map.inverse();
    let (fu, fv) = (u.synthesize(&grid)?, v.synthesize(&grid)?);
    let integrand = grid
        .nodes()
        .iter()
        .zip(fu.values().iter().zip(fv.values()))
        .map(|(p, (a, b))| Ok(a * b * (-0.5) * log(inverse.jacobian(p)?)))
        .collect::<Result<Vec<f64>>>()?;
    let rhs = energy + constant_cn(u.dim())? * grid.integrate_values(&integrand);
    Ok(ConfEReport {
        lhs,
        rhs,
        energy,
        residual: (lhs - rhs).abs(),
        truncation: pu.truncation.max(pv.truncation),
        l_work,
    })
}

/// Residual of `H(u_Φ) = (Hu)_Φ + C_n u_Φ ln J_Φ^{1/2}` at grid nodes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfHReport {
    /// max over nodes of the pointwise residual.
    pub max_residual: f64,
    /// max over nodes of |Hu|, the natural scale of the identity.
    pub scale: f64,
    /// Relative L² mass of u_Φ lost above the working band limit.
    pub truncation: f64,
    /// Working band limit L′.
    pub l_work: usize,
}

/// Checks the conformal transformation rule of `H` on the nodes of a grid
/// of degree `2·l_work`.
pub fn verify_conf_h(u: &HarmonicCoeffs, map: &ConformalMap, l_work: usize) -> Result<ConfHReport> {
    let n = u.dim();
    if map.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: map.dim(),
        });
    }
    let grid = working_grid(n, l_work.max(u.band_limit()))?;
    let pu = project_pullback(u, map, &grid, l_work)?;
    let lhs = crate::harmonics::apply_h(&pu.coeffs)?.synthesize(&grid)?;
    let hu = crate::harmonics::apply_h(u)?;
    let cn = constant_cn(n)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (p, l) in grid.nodes().iter().zip(lhs.values()) {
        let j = map.jacobian(p)?;
        let q = map.apply(p)?;
        let hq = hu.eval(&q)?;
        let u_phi = sqrt(j) * u.eval(&q)?;
        let rhs = sqrt(j) * hq + cn * u_phi * 0.5 * log(j);
        worst = worst.max((l - rhs).abs());
        scale = scale.max(hu.eval(p)?.abs());
    }
    Ok(ConfHReport {
        max_residual: worst,
        scale,
        truncation: pu.truncation,
        l_work,
    })
}

/// `∫f ln f + ln ∫e^g − ∫fg`, nonnegative for probability densities f.
pub fn gibbs_gap(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    check_pair(f, g)?;
    let grid = f.grid();
    if f.values().iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::NonPositive);
    }
    let mass = f.integral();
    if (mass - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(mass));
    }
    let entropy: Vec<f64> = f.values().iter().map(|&x| if x == 0.0 { 0.0 } else { x * log(x) }).collect();
    let gmax = g.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = g.values().iter().map(|&x| exp(x - gmax)).collect();
    let log_partition = gmax + log(grid.integrate_values(&shifted));
    let fg: Vec<f64> = f.values().iter().zip(g.values()).map(|(a, b)| if *a == 0.0 { 0.0 } else { a * b }).collect();
    Ok(grid.integrate_values(&entropy) + log_partition - grid.integrate_values(&fg))
}

/// h_l for the degree of every coefficient.
pub(crate) fn degree_multipliers(u: &HarmonicCoeffs) -> Result<Vec<f64>> {
    let table: Vec<f64> = (0..=u.band_limit())
        .map(|l| multiplier_h(u.dim(), l))
        .collect::<Result<_>>()?;
    Ok(u.degrees().map(|l| table[l]).collect())
}
