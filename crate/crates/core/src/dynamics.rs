//! Deficit-minimizing gradient flow, least-squares fitting of the extremizer
//! family, and the moving-spheres scans for the critical scale.

use alloc::sync::Arc;
use alloc::vec::Vec;

use libm::{atanh, log, pow, sqrt, tanh};

use crate::conformal::{antisymmetry_defect, ConformalMap, ExtremizerParams, SigmaRegion};
use crate::energy::{beckner_deficit, constant_cn, degree_multipliers, DeficitReport};
use crate::harmonics::{HarmonicCoeffs, Transform};
use crate::linalg::solve;
use crate::sphere::{dot, norm, sphere_area, QuadratureGrid, SphereFunction, SpherePoint};
use crate::{Error, Result};

/// Largest |ζ| accepted from fits at the default band limits.
pub const ZETA_GUARD: f64 = 0.9;

/// Settings of [`minimize_deficit`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FlowConfig {
    /// Initial step size; adapted by the line search.
    pub step: f64,
    /// Iteration budget.
    pub max_iterations: usize,
    /// Stop when an accepted step lowers the deficit by less than this.
    pub tol: f64,
    /// Stop when the tangential gradient norm falls below this.
    pub grad_tol: f64,
    /// Band limit of the iterates.
    pub band_limit: usize,
    /// Constraint value ‖u‖₂² (`None`: keep that of the initial datum).
    pub norm_sq: Option<f64>,
    /// Degree of the grid for the entropy (`None`: 4·band limit).
    pub grid_degree: Option<usize>,
    /// Halvings allowed per line search.
    pub max_backtracks: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            step: 1e-2,
            max_iterations: 2000,
            tol: 1e-13,
            grad_tol: 1e-9,
            band_limit: 16,
            norm_sq: None,
            grid_degree: None,
            max_backtracks: 40,
        }
    }
}

/// The log-Sobolev deficit as a function of the coefficient vector, with
/// quadrature on a fixed grid.
#[derive(Debug, Clone)]
pub struct DeficitFunctional {
    transform: Transform,
    h: Vec<f64>,
    cn: f64,
    area: f64,
    n: usize,
    band_limit: usize,
}

impl DeficitFunctional {
    /// Functional for band limit `band_limit` on a grid of the given degree.
    pub fn new(n: usize, band_limit: usize, grid_degree: usize) -> Result<Self> {
        let grid = Arc::new(QuadratureGrid::new(n, grid_degree)?);
        let transform = Transform::new(&grid, band_limit)?;
        let h = degree_multipliers(&HarmonicCoeffs::zeros(n, band_limit)?)?;
        Ok(Self {
            transform,
            h,
            cn: constant_cn(n)?,
            area: sphere_area(n)?,
            n,
            band_limit,
        })
    }

    /// The grid of the entropy quadrature.
    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        self.transform.grid()
    }

    fn check(&self, c: &HarmonicCoeffs) -> Result<()> {
        if c.dim() != self.n || c.band_limit() != self.band_limit {
            return Err(Error::ShapeMismatch);
        }
        Ok(())
    }

    fn parts(&self, c: &HarmonicCoeffs) -> Result<(Vec<f64>, f64)> {
        let u = self.transform.synthesize(c)?;
        let norm = self.transform.grid().integrate_values(&u.iter().map(|x| x * x).collect::<Vec<_>>());
        if norm == 0.0 {
            return Err(Error::ZeroFunction);
        }
        Ok((u, norm))
    }

    /// 2Σh_l c² − C_n Σ w u² ln(u²|𝕊ⁿ|/N), N = Σ w u².
    pub fn value(&self, c: &HarmonicCoeffs) -> Result<f64> {
        self.check(c)?;
        let (u, norm) = self.parts(c)?;
        let energy: f64 = self.h.iter().zip(c.values()).map(|(h, x)| h * x * x).sum();
        let scale = self.area / norm;
        let ent: Vec<f64> = u
            .iter()
            .map(|&x| {
                let s = x * x;
                if s == 0.0 {
                    0.0
                } else {
                    s * log(s * scale)
                }
            })
            .collect();
        Ok(2.0 * energy - self.cn * self.transform.grid().integrate_values(&ent))
    }

    /// Exact gradient of [`value`](Self::value):
    /// 4h_l c − 2C_n·A[u(ln u² + ln(|𝕊ⁿ|/N))], A the quadrature projection.
    pub fn gradient(&self, c: &HarmonicCoeffs) -> Result<HarmonicCoeffs> {
        self.check(c)?;
        let (u, norm) = self.parts(c)?;
        let shift = log(self.area / norm);
        let g: Vec<f64> = u
            .iter()
            .map(|&x| if x == 0.0 { 0.0 } else { x * (log(x * x) + shift) })
            .collect();
        let a = self.transform.analyze(&g)?;
        let vals = self
            .h
            .iter()
            .zip(c.values())
            .zip(a.values())
            .map(|((h, x), p)| 4.0 * h * x - 2.0 * self.cn * p)
            .collect();
        HarmonicCoeffs::from_values(self.n, self.band_limit, vals)
    }

    /// Full report with energy and entropy terms.
    pub fn report(&self, c: &HarmonicCoeffs) -> Result<DeficitReport> {
        beckner_deficit(c, self.grid())
    }
}

/// Why the flow stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FlowStatus {
    /// Gradient or decrease below tolerance.
    Converged,
    /// Iteration budget exhausted.
    MaxIterations,
    /// No decrease after the allowed backtracks.
    LineSearchFailed,
}

/// Output of [`minimize_deficit`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FlowResult {
    /// Final iterate.
    pub coeffs: HarmonicCoeffs,
    /// Deficit after every accepted step, starting with the initial datum.
    pub trajectory: Vec<f64>,
    /// Accepted steps.
    pub iterations: usize,
    /// Stopping reason.
    pub status: FlowStatus,
    /// Tangential gradient norm at the final iterate.
    pub grad_norm: f64,
    /// Deficit report of the final iterate.
    pub report: DeficitReport,
}

fn tangent(g: &HarmonicCoeffs, c: &HarmonicCoeffs) -> Result<HarmonicCoeffs> {
    let k = g.dot(c)? / c.norm_sq();
    g.add_scaled(-k, c)
}

fn renormalize(c: &HarmonicCoeffs, norm_sq: f64) -> HarmonicCoeffs {
    c.scaled(sqrt(norm_sq / c.norm_sq()))
}

/// Projected gradient descent of the deficit on `{‖u‖₂² = const}` with an
/// Armijo backtracking line search.
pub fn minimize_deficit(init: &HarmonicCoeffs, cfg: &FlowConfig) -> Result<FlowResult> {
    if !(cfg.step > 0.0) || cfg.max_iterations == 0 || cfg.band_limit == 0 {
        return Err(Error::Parameter("flow settings must be positive"));
    }
    let start = init.with_band_limit(cfg.band_limit);
    if start.norm_sq() == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let target = match cfg.norm_sq {
        Some(v) if v > 0.0 => v,
        Some(_) => return Err(Error::Parameter("norm constraint must be positive")),
        None => start.norm_sq(),
    };
    let functional = DeficitFunctional::new(
        init.dim(),
        cfg.band_limit,
        cfg.grid_degree.unwrap_or(4 * cfg.band_limit),
    )?;
    let mut c = renormalize(&start, target);
    let mut d = functional.value(&c)?;
    let mut trajectory = alloc::vec![d];
    let mut step = cfg.step;
    let mut status = FlowStatus::MaxIterations;
    let mut iterations = 0;
    let mut grad_norm;
    loop {
        let g = tangent(&functional.gradient(&c)?, &c)?;
        grad_norm = sqrt(g.norm_sq());
        if grad_norm <= cfg.grad_tol {
            status = FlowStatus::Converged;
            break;
        }
        if iterations >= cfg.max_iterations {
            break;
        }
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let trial = renormalize(&c.add_scaled(-step, &g)?, target);
            let dt = functional.value(&trial)?;
            if dt <= d - 1e-4 * step * grad_norm * grad_norm {
                accepted = Some((trial, dt));
                break;
            }
            step *= 0.5;
        }
        let Some((next, dn)) = accepted else {
            status = FlowStatus::LineSearchFailed;
            break;
        };
        let decrease = d - dn;
        c = next;
        d = dn;
        trajectory.push(d);
        iterations += 1;
        step *= 1.5;
        if decrease < cfg.tol {
            status = FlowStatus::Converged;
            grad_norm = sqrt(tangent(&functional.gradient(&c)?, &c)?.norm_sq());
            break;
        }
    }
    let report = functional.report(&c)?;
    Ok(FlowResult {
        coeffs: c,
        trajectory,
        iterations,
        status,
        grad_norm,
        report,
    })
}

/// Deficit of `c` with entropy quadrature on a degree-`grid_degree` grid.
pub fn deficit_value(c: &HarmonicCoeffs, grid_degree: usize) -> Result<f64> {
    DeficitFunctional::new(c.dim(), c.band_limit(), grid_degree)?.value(c)
}

/// Gradient of [`deficit_value`] in coefficient space.
pub fn deficit_gradient(c: &HarmonicCoeffs, grid_degree: usize) -> Result<HarmonicCoeffs> {
    DeficitFunctional::new(c.dim(), c.band_limit(), grid_degree)?.gradient(c)
}

/// Output of [`fit_extremizer`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    /// Best-fitting (ζ, c).
    pub params: ExtremizerParams,
    /// ‖u − fit‖₂/‖u‖₂ by quadrature.
    pub residual: f64,
    /// residual ≤ 1e−2.
    pub in_family: bool,
    /// Levenberg–Marquardt iterations used.
    pub iterations: usize,
}

/// Residual threshold for membership in the family.
pub const FAMILY_TOL: f64 = 1e-2;

struct FitProblem<'a> {
    nodes: &'a [SpherePoint],
    sw: Vec<f64>,
    target: Vec<f64>,
    n: usize,
}

impl FitProblem<'_> {
    /// ζ from the unconstrained parameter p: ζ = tanh|p|·p/|p|.
    fn zeta(p: &[f64]) -> Vec<f64> {
        let r = norm(p);
        let k = if r < 1e-300 { 1.0 } else { tanh(r) / r };
        p.iter().map(|v| k * v).collect()
    }

    /// dζ/dp, row-major (n+1)×(n+1).
    fn zeta_jacobian(p: &[f64]) -> Vec<f64> {
        let k = p.len();
        let r = norm(p);
        let mut out = alloc::vec![0.0; k * k];
        if r < 1e-8 {
            for i in 0..k {
                out[i * k + i] = 1.0;
            }
            return out;
        }
        let t = tanh(r);
        let a = t / r;
        let b = (1.0 - t * t) - a;
        for i in 0..k {
            for j in 0..k {
                out[i * k + j] = b * p[i] * p[j] / (r * r) + if i == j { a } else { 0.0 };
            }
        }
        out
    }

    /// Weighted residuals and their Jacobian wrt (p, c).
    fn eval(&self, p: &[f64], c: f64, with_jac: bool) -> (Vec<f64>, Vec<f64>) {
        let zeta = Self::zeta(p);
        let k = p.len();
        let z2 = dot(&zeta, &zeta);
        let q = sqrt(1.0 - z2);
        let half = self.n as f64 / 2.0;
        let dz = if with_jac { Self::zeta_jacobian(p) } else { Vec::new() };
        let mut res = Vec::with_capacity(self.nodes.len());
        let mut jac = Vec::with_capacity(if with_jac { self.nodes.len() * (k + 1) } else { 0 });
        let mut dfz = alloc::vec![0.0; k];
        for ((x, sw), t) in self.nodes.iter().zip(&self.sw).zip(&self.target) {
            let w = x.coords();
            let den = 1.0 - dot(&zeta, w);
            let shape = pow(q / den, half);
            let f = c * shape;
            res.push(sw * (f - t));
            if with_jac {
                for j in 0..k {
                    dfz[j] = f * half * (w[j] / den - zeta[j] / (1.0 - z2));
                }
                for i in 0..k {
                    let d: f64 = (0..k).map(|j| dfz[j] * dz[j * k + i]).sum();
                    jac.push(sw * d);
                }
                jac.push(sw * shape);
            }
        }
        (res, jac)
    }
}

/// Least-squares fit of `c(√(1−|ζ|²)/(1−ζ·ω))^{n/2}` to `u` by
/// Levenberg–Marquardt over ζ = tanh|p|·p̂ and c.
pub fn fit_extremizer(u: &HarmonicCoeffs) -> Result<FitResult> {
    let n = u.dim();
    let grid = Arc::new(QuadratureGrid::new(n, (2 * u.band_limit()).max(32))?);
    let values = u.synthesize(&grid)?;
    let unorm = values.norm_sq();
    if unorm == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let area = sphere_area(n)?;
    let problem = FitProblem {
        nodes: grid.nodes(),
        sw: grid.weights().iter().map(|w| sqrt(*w)).collect(),
        target: values.values().to_vec(),
        n,
    };

    let mut c = u.get(0, 0)? / sqrt(area);
    let first: Vec<f64> = (0..=n)
        .map(|j| {
            let vals: Vec<f64> = grid
                .nodes()
                .iter()
                .zip(values.values())
                .map(|(p, v)| v * p.coords()[j])
                .collect();
            grid.integrate_values(&vals)
        })
        .collect();
    // ∫u ω_j ≈ c·(n/2)·ζ_j·|𝕊ⁿ|/(n+1) for small ζ.
    let mut zeta0: Vec<f64> = first
        .iter()
        .map(|m| (2.0 / n as f64) * m * (n as f64 + 1.0) / (area * c))
        .collect();
    let degree_one: f64 = first.iter().map(|m| m * m).sum::<f64>() * (n as f64 + 1.0) / area;
    if degree_one < 1e-14 || !c.is_finite() || c == 0.0 {
        zeta0.iter_mut().for_each(|z| *z = 0.0);
    }
    let r0 = norm(&zeta0);
    if r0 > ZETA_GUARD {
        zeta0.iter_mut().for_each(|z| *z *= ZETA_GUARD / r0);
    }
    let r0 = norm(&zeta0);
    let mut p: Vec<f64> = if r0 > 0.0 {
        zeta0.iter().map(|z| z * atanh(r0) / r0).collect()
    } else {
        zeta0
    };
    if !c.is_finite() {
        c = 0.0;
    }

    let k = n + 2;
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let (mut res, mut jac) = problem.eval(&p, c, true);
    let mut current = cost(&res);
    let mut mu = 1e-3;
    let mut iterations = 0;
    for it in 0..200 {
        iterations = it + 1;
        let mut jtj = alloc::vec![0.0; k * k];
        let mut jtr = alloc::vec![0.0; k];
        for (row, r) in jac.chunks_exact(k).zip(&res) {
            for a in 0..k {
                jtr[a] -= row[a] * r;
                for b in 0..k {
                    jtj[a * k + b] += row[a] * row[b];
                }
            }
        }
        let grad = sqrt(jtr.iter().map(|v| v * v).sum::<f64>());
        if grad <= 1e-15 * unorm.max(1.0) {
            break;
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for d in 0..k {
                a[d * k + d] += mu * (jtj[d * k + d] + 1e-12);
            }
            let Some(delta) = solve(a, jtr.clone()) else {
                mu *= 10.0;
                continue;
            };
            let p_new: Vec<f64> = p.iter().zip(&delta).map(|(x, d)| x + d).collect();
            let c_new = c + delta[k - 1];
            let (r_new, _) = problem.eval(&p_new, c_new, false);
            let trial = cost(&r_new);
            if trial.is_finite() && trial < current {
                let step: f64 = delta.iter().map(|d| d * d).sum::<f64>();
                p = p_new;
                c = c_new;
                let rel = (current - trial) / current.max(1e-300);
                current = trial;
                let (r2, j2) = problem.eval(&p, c, true);
                res = r2;
                jac = j2;
                mu = (mu * 0.3).max(1e-12);
                improved = true;
                if rel < 1e-15 || step < 1e-30 {
                    mu = f64::INFINITY;
                }
                break;
            }
            mu *= 10.0;
        }
        if !improved || mu.is_infinite() {
            break;
        }
    }
    let zeta = FitProblem::zeta(&p);
    let zn = norm(&zeta);
    if zn > ZETA_GUARD {
        return Err(Error::ConditioningGuard(zn));
    }
    if !c.is_finite() {
        return Err(Error::Divergence("extremizer fit"));
    }
    let residual = sqrt(current / unorm);
    Ok(FitResult {
        params: ExtremizerParams::new(zeta, c.max(0.0))?,
        residual,
        in_family: residual <= FAMILY_TOL,
        iterations,
    })
}

/// Centre of a moving-spheres scan.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MovingCenter {
    /// Lifted inversions `Φ_{λ,ξ₀}` about ξ₀ (coordinates in ℝⁿ⁺¹).
    Inversion {
        /// ξ₀.
        xi0: Vec<f64>,
    },
    /// Lifted reflections `Ψ_{α,e}` with normal e ∈ 𝕊ⁿ⁻¹.
    Reflection {
        /// e.
        e: Vec<f64>,
    },
}

impl MovingCenter {
    fn map(&self, value: f64) -> Result<ConformalMap> {
        match self {
            Self::Inversion { xi0 } => ConformalMap::inversion(value, SpherePoint::new(xi0.clone())?),
            Self::Reflection { e } => ConformalMap::reflection(value, e.clone()),
        }
    }
}

/// `w = u_Φ − u` sampled on Σ for a list of parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MovingSphereReport {
    /// ξ₀ or e.
    pub center: MovingCenter,
    /// λ or α values, increasing.
    pub values: Vec<f64>,
    /// min over Σ-nodes of w (0 when Σ holds no node).
    pub min_w: Vec<f64>,
    /// max over Σ-nodes of |w|.
    pub sup_abs_w: Vec<f64>,
    /// Antisymmetry defect of each w.
    pub defects: Vec<f64>,
    /// Number of grid nodes in Σ for each value.
    pub sigma_nodes: Vec<usize>,
    /// Estimated critical λ₀ or α(e).
    pub critical: Option<f64>,
    /// sup_Σ|w| at the critical value.
    pub sup_at_critical: Option<f64>,
    /// Azimuthal offset of the grid actually used.
    pub grid_offset: f64,
}

impl MovingSphereReport {
    /// Whether w vanishes at the critical value to within `tol`.
    pub fn symmetric(&self, tol: f64) -> bool {
        self.sup_at_critical.is_some_and(|s| s <= tol)
    }
}

struct Probe {
    min: f64,
    sup: f64,
    defect: f64,
    count: usize,
}

fn probe(u: &dyn SphereFunction, center: &MovingCenter, value: f64, grid: &QuadratureGrid) -> Result<Probe> {
    let map = center.map(value)?;
    let region: SigmaRegion = map.sigma().ok_or(Error::Parameter("map has no comparison region"))?;
    let (mut min, mut sup, mut count) = (f64::INFINITY, 0.0f64, 0usize);
    let w = |eta: &SpherePoint| -> Result<f64> {
        let j = map.jacobian(eta)?;
        Ok(sqrt(j) * u.eval(&map.apply(eta)?)? - u.eval(eta)?)
    };
    for eta in grid.nodes() {
        if !region.contains(eta)? {
            continue;
        }
        let v = w(eta)?;
        min = min.min(v);
        sup = sup.max(v.abs());
        count += 1;
    }
    let defect = antisymmetry_defect(&w, &map, &region, grid)?;
    Ok(Probe {
        min: if count == 0 { 0.0 } else { min },
        sup,
        defect,
        count,
    })
}

/// Runs `f` on `grid`, retrying once on a rotated copy after a pole hit.
fn with_retry<T>(grid: &QuadratureGrid, f: impl Fn(&QuadratureGrid) -> Result<T>) -> Result<(T, f64)> {
    match f(grid) {
        Err(Error::Pole(_)) => {
            let rotated = grid.rotated(0.5 * core::f64::consts::PI / (grid.degree() as f64 + 1.0));
            let offset = rotated.offset();
            Ok((f(&rotated)?, offset))
        }
        other => Ok((other?, grid.offset())),
    }
}

fn profile_on(u: &dyn SphereFunction, center: &MovingCenter, values: &[f64], grid: &QuadratureGrid) -> Result<MovingSphereReport> {
    let mut report = MovingSphereReport {
        center: center.clone(),
        values: values.to_vec(),
        min_w: Vec::new(),
        sup_abs_w: Vec::new(),
        defects: Vec::new(),
        sigma_nodes: Vec::new(),
        critical: None,
        sup_at_critical: None,
        grid_offset: grid.offset(),
    };
    for &v in values {
        let p = probe(u, center, v, grid)?;
        report.min_w.push(p.min);
        report.sup_abs_w.push(p.sup);
        report.defects.push(p.defect);
        report.sigma_nodes.push(p.count);
    }
    Ok(report)
}

/// Samples `w_{λ,ξ₀}` (or `w_{α,e}`) on Σ-nodes of `grid` for each value.
pub fn moving_sphere_profile(
    u: &dyn SphereFunction,
    center: &MovingCenter,
    values: &[f64],
    grid: &QuadratureGrid,
) -> Result<MovingSphereReport> {
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("scan values must increase strictly"));
    }
    let (mut report, offset) = with_retry(grid, |g| profile_on(u, center, values, g))?;
    report.grid_offset = offset;
    Ok(report)
}

/// Scan points per critical-value search.
pub const SCAN_POINTS: usize = 32;

fn critical_search(
    u: &dyn SphereFunction,
    center: &MovingCenter,
    scan: Vec<f64>,
    good_side_high: bool,
    tol: f64,
    grid: &QuadratureGrid,
) -> Result<MovingSphereReport> {
    let run = |g: &QuadratureGrid| -> Result<MovingSphereReport> {
        let mut report = profile_on(u, center, &scan, g)?;
        let umax = g
            .nodes()
            .iter()
            .map(|p| u.eval(p).map(f64::abs))
            .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))?;
        let threshold = -tol * umax;
        let negative = |min: f64| min < threshold;
        // Walk from the side where w ≥ 0 is expected towards the other.
        let order: Vec<usize> = if good_side_high {
            (0..scan.len()).rev().collect()
        } else {
            (0..scan.len()).collect()
        };
        if negative(report.min_w[order[0]]) {
            return Err(Error::Parameter("w is already negative at the starting end"));
        }
        let hit = order
            .windows(2)
            .find(|w| negative(report.min_w[w[1]]))
            .ok_or(Error::NoSignChange)?;
        let (mut good, mut bad) = (scan[hit[0]], scan[hit[1]]);
        for _ in 0..200 {
            let mid = 0.5 * (good + bad);
            if mid == good || mid == bad || (bad - good).abs() <= 1e-13 * good.abs().max(1.0) {
                break;
            }
            if negative(probe(u, center, mid, g)?.min) {
                bad = mid;
            } else {
                good = mid;
            }
        }
        let at = probe(u, center, good, g)?;
        report.critical = Some(good);
        report.sup_at_critical = Some(at.sup);
        Ok(report)
    };
    let (mut report, offset) = with_retry(grid, run)?;
    report.grid_offset = offset;
    Ok(report)
}

/// Critical scale λ₀(ξ₀): the sign change of min_Σ w_{λ,ξ₀} located by a
/// 32-point logarithmic scan of `interval` and bisection. w counts as
/// negative below `−tol·max|u|`.
pub fn critical_lambda(
    u: &dyn SphereFunction,
    xi0: &SpherePoint,
    interval: (f64, f64),
    tol: f64,
    grid: &QuadratureGrid,
) -> Result<MovingSphereReport> {
    let (lo, hi) = interval;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Parameter("need 0 < lambda_lo < lambda_hi"));
    }
    let ratio = log(hi / lo) / (SCAN_POINTS - 1) as f64;
    let scan = (0..SCAN_POINTS).map(|k| lo * libm::exp(ratio * k as f64)).collect();
    let center = MovingCenter::Inversion {
        xi0: xi0.coords().to_vec(),
    };
    critical_search(u, &center, scan, false, tol, grid)
}

/// Critical reflection position α(e): planes are moved from `interval.1`
/// downwards until min_Σ w_{α,e} turns negative, then bisected.
pub fn critical_alpha(
    u: &dyn SphereFunction,
    e: &[f64],
    interval: (f64, f64),
    tol: f64,
    grid: &QuadratureGrid,
) -> Result<MovingSphereReport> {
    let (lo, hi) = interval;
    if !(hi > lo) {
        return Err(Error::Parameter("need alpha_lo < alpha_hi"));
    }
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let scan = (0..SCAN_POINTS).map(|k| lo + step * k as f64).collect();
    let r = norm(e);
    if r == 0.0 {
        return Err(Error::ZeroVector);
    }
    let center = MovingCenter::Reflection {
        e: e.iter().map(|v| v / r).collect(),
    };
    critical_search(u, &center, scan, true, tol, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::extremizer;
    use crate::harmonics::tests::random_coeffs;
    use crate::sphere::{Constant, Infallible};
    use core::f64::consts::PI;

    fn constant(n: usize, band: usize, value: f64) -> HarmonicCoeffs {
        let mut c = HarmonicCoeffs::zeros(n, band).unwrap();
        c.set(0, 0, value * sqrt(sphere_area(n).unwrap())).unwrap();
        c
    }

    fn positive_random(n: usize, band: usize, seed: u64, amp: f64) -> HarmonicCoeffs {
        let r = random_coeffs(n, band, seed);
        let scale = amp / sqrt(r.norm_sq());
        let mut c = r.scaled(scale);
        c.set(0, 0, sqrt(sphere_area(n).unwrap())).unwrap();
        c
    }

    fn project(u: &dyn SphereFunction, n: usize, l: usize) -> HarmonicCoeffs {
        HarmonicCoeffs::project(u, &Arc::new(QuadratureGrid::new(n, 2 * l).unwrap()), l).unwrap()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for (n, band, seed) in [(2, 6, 1), (2, 8, 2), (1, 10, 3)] {
            let f = DeficitFunctional::new(n, band, 4 * band).unwrap();
            let c = positive_random(n, band, seed, 1.0);
            let g = f.gradient(&c).unwrap();
            let h = 1e-4;
            let mut err = 0.0;
            for k in 0..c.values().len() {
                let mut plus = c.clone();
                plus.values_mut()[k] += h;
                let mut minus = c.clone();
                minus.values_mut()[k] -= h;
                let fd = (f.value(&plus).unwrap() - f.value(&minus).unwrap()) / (2.0 * h);
                err += (fd - g.values()[k]).powi(2);
            }
            assert!(sqrt(err) <= 1e-5 * sqrt(g.norm_sq()), "{} vs {}", sqrt(err), sqrt(g.norm_sq()));
        }
    }

    #[test]
    fn functional_matches_report() {
        let c = positive_random(2, 8, 5, 0.8);
        let f = DeficitFunctional::new(2, 8, 32).unwrap();
        let a = f.value(&c).unwrap();
        let b = f.report(&c).unwrap().deficit;
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn flow_from_constant_stops_at_once() {
        let r = minimize_deficit(&constant(2, 8, 1.0), &FlowConfig { band_limit: 8, ..Default::default() }).unwrap();
        assert_eq!(r.status, FlowStatus::Converged);
        assert_eq!(r.iterations, 0);
        assert!(r.trajectory[0].abs() < 1e-12);
    }

    #[test]
    fn flow_near_fixed_point() {
        let p = ExtremizerParams::new(alloc::vec![0.0, 0.0, 0.3], 1.0).unwrap();
        let u = project(&extremizer(&p).unwrap(), 2, 16);
        let r = minimize_deficit(&u, &FlowConfig::default()).unwrap();
        assert!(r.report.deficit <= 1e-3);
        let moved = sqrt(r.coeffs.add_scaled(-1.0, &u).unwrap().norm_sq());
        assert!(moved <= 1e-2, "{moved}");
    }

    #[test]
    fn flow_is_monotone_and_norm_preserving() {
        let init = positive_random(2, 8, 9, 1.5);
        let cfg = FlowConfig {
            band_limit: 8,
            max_iterations: 300,
            ..Default::default()
        };
        let r = minimize_deficit(&init, &cfg).unwrap();
        assert!(r.trajectory.windows(2).all(|w| w[1] <= w[0]));
        assert!((r.coeffs.norm_sq() / init.norm_sq() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn flow_reaches_family() {
        let mut init = constant(2, 16, 1.0);
        let v = init.get(1, 0).unwrap();
        init.set(1, 0, v + 0.5).unwrap();
        init.set(2, 1, 0.2).unwrap();
        let r = minimize_deficit(&init, &FlowConfig::default()).unwrap();
        assert!(r.report.deficit <= 1e-4, "{:?}", r.report);
        let fit = fit_extremizer(&r.coeffs).unwrap();
        assert!(fit.residual <= 1e-2, "{fit:?}");
    }

    #[test]
    fn fit_recovers_member() {
        let p = ExtremizerParams::new(alloc::vec![0.4, 0.0, 0.0], 1.0).unwrap();
        let u = project(&extremizer(&p).unwrap(), 2, 32);
        let fit = fit_extremizer(&u).unwrap();
        for (a, b) in fit.params.zeta.iter().zip(&p.zeta) {
            assert!((a - b).abs() < 1e-6, "{fit:?}");
        }
        assert!((fit.params.c - 1.0).abs() < 1e-6);
        assert!(fit.in_family);
        let again = project(&extremizer(&fit.params).unwrap(), 2, 32);
        let refit = fit_extremizer(&again).unwrap();
        for (a, b) in refit.params.zeta.iter().zip(&fit.params.zeta) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!((refit.params.c - fit.params.c).abs() < 1e-8);
    }

    #[test]
    fn fit_examples() {
        let fit = fit_extremizer(&constant(2, 8, 3.0)).unwrap();
        assert!(fit.params.zeta_norm() < 1e-12);
        assert!((fit.params.c - 3.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        let y20 = HarmonicCoeffs::unit(2, 8, 2, 0).unwrap();
        let fit = fit_extremizer(&y20).unwrap();
        assert!(!fit.in_family && fit.residual > 0.5, "{fit:?}");
        let p = ExtremizerParams::new(alloc::vec![-0.3, 0.5], 2.0).unwrap();
        let u = project(&extremizer(&p).unwrap(), 1, 48);
        let fit = fit_extremizer(&u).unwrap();
        assert!((fit.params.zeta[1] - 0.5).abs() < 1e-6 && (fit.params.c - 2.0).abs() < 1e-6);
    }

    #[test]
    fn fit_guard() {
        let p = ExtremizerParams::new(alloc::vec![0.0, 0.95, 0.0], 1.0).unwrap();
        let u = project(&extremizer(&p).unwrap(), 2, 32);
        assert!(matches!(fit_extremizer(&u), Err(Error::ConditioningGuard(_))));
    }

    fn grid(d: usize) -> QuadratureGrid {
        QuadratureGrid::new(2, d).unwrap()
    }

    #[test]
    fn constant_profile_signs() {
        let one = Constant(1.0);
        let center = MovingCenter::Inversion {
            xi0: alloc::vec![0.0, 0.0, 1.0],
        };
        let r = moving_sphere_profile(&one, &center, &[0.3, 0.6, 0.9, 1.0], &grid(24)).unwrap();
        assert!(r.min_w[..3].iter().all(|&m| m >= 0.0));
        assert!(r.sup_abs_w[3] < 1e-10);
        assert!(r.defects.iter().all(|&d| d < 1e-8));
        let refl = MovingCenter::Reflection {
            e: alloc::vec![0.6, -0.8],
        };
        let r = moving_sphere_profile(&one, &refl, &[0.0], &grid(24)).unwrap();
        assert!(r.sup_abs_w[0] < 1e-10);
    }

    #[test]
    fn critical_scale_of_constant() {
        let r = critical_lambda(&Constant(1.0), &SpherePoint::north_pole(2), (0.05, 20.0), 1e-9, &grid(24)).unwrap();
        assert!((r.critical.unwrap() - 1.0).abs() < 1e-2);
        assert!(r.sup_at_critical.unwrap() < 1e-6);
    }

    #[test]
    fn critical_scale_of_member() {
        let p = ExtremizerParams::new(alloc::vec![0.2, -0.1, 0.3], 1.0).unwrap();
        let e = extremizer(&p).unwrap();
        let bubble = p.bubble().unwrap();
        let x0 = [0.4, -0.2];
        let xi0 = crate::conformal::stereographic(&x0).unwrap();
        let r = critical_lambda(&e, &xi0, (0.05, 20.0), 1e-9, &grid(24)).unwrap();
        let want = sqrt(bubble.b * bubble.b + crate::sphere::dist_sq(&x0, &bubble.a));
        assert!((r.critical.unwrap() - want).abs() < 1e-6, "{r:?}");
        assert!(r.sup_at_critical.unwrap() < 1e-3);
        let e_dir = [0.0, 1.0];
        let r = critical_alpha(&e, &e_dir, (-4.0, 4.0), 1e-9, &grid(24)).unwrap();
        assert!((r.critical.unwrap() - bubble.a[1]).abs() < 1e-6);
        assert!(r.sup_at_critical.unwrap() < 1e-3);
    }

    #[test]
    fn non_solution_is_flagged() {
        let y20 = HarmonicCoeffs::unit(2, 2, 2, 0).unwrap();
        let u = Infallible(move |p: &SpherePoint| 1.0 + 0.5 * y20.eval(p).unwrap() * sqrt(4.0 * PI / 5.0));
        let r = critical_lambda(&u, &SpherePoint::from_polar(0.7, 0.4), (0.05, 20.0), 1e-9, &grid(24)).unwrap();
        assert!(!r.symmetric(1e-3), "{r:?}");
    }

    #[test]
    fn pole_collision_rotates_grid() {
        let g = grid(8);
        let node = g.nodes()[5].clone();
        let r = critical_lambda(&Constant(1.0), &node, (0.05, 20.0), 1e-9, &g).unwrap();
        assert_ne!(r.grid_offset, g.offset());
    }
}
