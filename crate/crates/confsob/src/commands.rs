//! The four subcommands. Each returns its report and an exit code:
//! 0 when every tolerance is met, 1 otherwise.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use confsob_core::conformal::stereographic;
use confsob_core::dynamics::{
    critical_alpha, critical_lambda, fit_extremizer, minimize_deficit, FitResult, FlowConfig, FlowResult,
    MovingSphereReport,
};
use confsob_core::harmonics::{multiplier_h, multiplier_p2s};
use confsob_core::special::{digamma, ln_gamma};
use confsob_core::sphere::{QuadratureGrid, SpherePoint};
use serde::Serialize;

use crate::config::RunConfig;
use crate::init::InitSpec;
use crate::io::{write_json, write_profile_csv, write_table_csv, CoeffFile, SCHEMA};
use crate::suites::{run_suites, Fault, SuiteResult};
use crate::BoxError;

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub command: &'static str,
    pub config: RunConfig,
    pub pass: bool,
    pub first_failure: Option<&'static str>,
    pub suites: Vec<SuiteResult>,
}

pub fn cmd_verify(cfg: &RunConfig, fault: Option<Fault>) -> Result<(VerifyReport, i32), BoxError> {
    cfg.require_grid_dimension()?;
    let suites = run_suites(cfg, fault);
    let first_failure = suites.iter().find(|s| !s.pass).map(|s| s.name);
    let report = VerifyReport {
        schema: SCHEMA,
        command: "verify",
        config: cfg.clone(),
        pass: first_failure.is_none(),
        first_failure,
        suites,
    };
    write_json(cfg.out.as_deref(), &report)?;
    Ok((report, i32::from(first_failure.is_some())))
}

/// s-values sampled in the spectrum table: fractions of n/2.
pub fn spectrum_s_values(n: usize) -> [f64; 3] {
    let half = n as f64 / 2.0;
    [0.25 * half, 0.5 * half, 0.75 * half]
}

/// Degrees of the asymptotic sanity rows.
pub const SANITY_DEGREES: [usize; 2] = [1_000, 10_000];

/// Columns: `l`, `h`, `h_over_cln` = h/(c ln l), `h_over_asymptote` =
/// h/(c(ln l − ψ(n/2))), then one `p2s_s=…` column per sampled s.
/// The exit code checks `h_over_asymptote` on the sanity rows to 1e−3.
pub fn cmd_spectrum(n: usize, l_max: usize, out: Option<&Path>) -> Result<i32, BoxError> {
    if n == 0 {
        return Err(confsob_core::Error::InvalidDimension(n).into());
    }
    let half = n as f64 / 2.0;
    let c = 2.0 * PI.powf(half) / ln_gamma(half)?.exp();
    let shift = digamma(half)?;
    let s_values = spectrum_s_values(n);
    let mut header = vec!["l".to_string(), "h".into(), "h_over_cln".into(), "h_over_asymptote".into()];
    header.extend(s_values.iter().map(|s| format!("p2s_s={s}")));
    let mut degrees: Vec<usize> = (0..=l_max).collect();
    degrees.extend(SANITY_DEGREES.iter().filter(|&&l| l > l_max));
    let mut rows = Vec::with_capacity(degrees.len());
    let mut ok = true;
    for l in degrees {
        let h = multiplier_h(n, l)?;
        let ln = (l as f64).ln();
        let (ratio, asym) = if l >= 2 {
            (h / (c * ln), h / (c * (ln - shift)))
        } else {
            (f64::NAN, f64::NAN)
        };
        if SANITY_DEGREES.contains(&l) {
            ok &= (asym - 1.0).abs() <= 1e-3;
        }
        let mut row = vec![h, ratio, asym];
        for &s in &s_values {
            row.push(multiplier_p2s(n, l, s)?);
        }
        rows.push((l, row));
    }
    write_table_csv(out, &header, &rows)?;
    Ok(i32::from(!ok))
}

#[derive(Debug, Serialize)]
pub struct FitSummary {
    pub zeta: Vec<f64>,
    pub c: f64,
    pub residual: f64,
    pub in_family: bool,
    pub iterations: usize,
}

impl From<&FitResult> for FitSummary {
    fn from(f: &FitResult) -> Self {
        Self {
            zeta: f.params.zeta.clone(),
            c: f.params.c,
            residual: f.residual,
            in_family: f.in_family,
            iterations: f.iterations,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MinimizeReport {
    pub schema: u32,
    pub command: &'static str,
    pub config: RunConfig,
    pub init: String,
    pub pass: bool,
    pub status: confsob_core::dynamics::FlowStatus,
    pub iterations: usize,
    pub grad_norm: f64,
    pub deficit: confsob_core::energy::DeficitReport,
    pub trajectory: Vec<f64>,
    pub fit: Option<FitSummary>,
    pub fit_error: Option<String>,
    pub coefficients: CoeffFile,
}

pub fn cmd_minimize(cfg: &RunConfig, init: &str) -> Result<(MinimizeReport, i32), BoxError> {
    cfg.require_grid_dimension()?;
    let spec: InitSpec = init.parse()?;
    let start = spec.coeffs(cfg.n, cfg.band_limit, cfg.seed)?;
    let flow = FlowConfig {
        step: cfg.step,
        max_iterations: cfg.max_iterations,
        band_limit: cfg.band_limit,
        grid_degree: Some(cfg.grid_degree),
        ..FlowConfig::default()
    };
    let FlowResult {
        coeffs,
        trajectory,
        iterations,
        status,
        grad_norm,
        report,
    } = minimize_deficit(&start, &flow)?;
    let (fit, fit_error) = match fit_extremizer(&coeffs) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let tol = &cfg.tolerances;
    let pass = status != confsob_core::dynamics::FlowStatus::LineSearchFailed
        && report.deficit <= tol.flow_deficit
        && fit.as_ref().is_some_and(|f| f.residual <= tol.fit_residual);
    let out = MinimizeReport {
        schema: SCHEMA,
        command: "minimize",
        config: cfg.clone(),
        init: init.to_string(),
        pass,
        status,
        iterations,
        grad_norm,
        deficit: report,
        trajectory,
        fit: fit.as_ref().map(FitSummary::from),
        fit_error,
        coefficients: CoeffFile::from(&coeffs),
    };
    write_json(cfg.out.as_deref(), &out)?;
    Ok((out, i32::from(!pass)))
}

/// Centre of a moving-spheres run.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// ξ₀ on the sphere.
    Xi0(Vec<f64>),
    /// x₀ in the plane, mapped to ξ₀ = 𝒮(x₀).
    X0(Vec<f64>),
    /// Reflection normal.
    Normal(Vec<f64>),
}

#[derive(Debug, Serialize)]
pub struct MoveSpheresReport {
    pub schema: u32,
    pub command: &'static str,
    pub config: RunConfig,
    pub u: String,
    pub pass: bool,
    pub symmetric: bool,
    /// Expected critical value when u is a family member.
    pub predicted: Option<f64>,
    pub profile: MovingSphereReport,
}

/// `csv` defaults to the report path with a `.csv` extension.
pub fn cmd_movespheres(
    cfg: &RunConfig,
    u: &str,
    target: &Target,
    range: Option<(f64, f64)>,
    csv: Option<&Path>,
) -> Result<(MoveSpheresReport, i32), BoxError> {
    cfg.require_grid_dimension()?;
    let n = cfg.n;
    let spec: InitSpec = u.parse()?;
    let f = spec.function(n, cfg.band_limit, cfg.seed)?;
    let grid = QuadratureGrid::new(n, cfg.grid_degree)?;
    let bubble = spec.family_params(n)?.map(|p| p.bubble()).transpose()?;
    let tol = 1e-9;
    let (profile, predicted) = match target {
        Target::Normal(e) => {
            let profile = critical_alpha(f.as_ref(), e, range.unwrap_or((-4.0, 4.0)), tol, &grid)?;
            let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
            let predicted = bubble.map(|b| b.a.iter().zip(e).map(|(a, e)| a * e).sum::<f64>() / norm);
            (profile, predicted)
        }
        Target::Xi0(_) | Target::X0(_) => {
            let (xi0, x0) = match target {
                Target::X0(x0) => (stereographic(x0)?, Some(x0.clone())),
                Target::Xi0(v) => {
                    let p = SpherePoint::new(v.clone())?;
                    let x0 = confsob_core::conformal::inverse_stereographic(&p).ok();
                    (p, x0)
                }
                Target::Normal(_) => unreachable!(),
            };
            let profile = critical_lambda(f.as_ref(), &xi0, range.unwrap_or((0.01, 100.0)), tol, &grid)?;
            let predicted = match (bubble, x0) {
                (Some(b), Some(x0)) => {
                    Some((b.b * b.b + x0.iter().zip(&b.a).map(|(x, a)| (x - a).powi(2)).sum::<f64>()).sqrt())
                }
                _ => None,
            };
            (profile, predicted)
        }
    };
    let symmetric = profile.symmetric(cfg.tolerances.identity);
    let report = MoveSpheresReport {
        schema: SCHEMA,
        command: "movespheres",
        config: cfg.clone(),
        u: u.to_string(),
        pass: symmetric,
        symmetric,
        predicted,
        profile,
    };
    write_json(cfg.out.as_deref(), &report)?;
    let csv_path: Option<PathBuf> = csv
        .map(Path::to_path_buf)
        .or_else(|| cfg.out.as_ref().map(|p| p.with_extension("csv")));
    if let Some(p) = csv_path {
        write_profile_csv(Some(&p), &report.profile)?;
    }
    Ok((report, i32::from(!symmetric)))
}
