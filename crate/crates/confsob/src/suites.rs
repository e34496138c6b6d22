//! Identity suites run by `confsob verify`.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use confsob_core::conformal::{extremizer, in_sigma, kernel_l, stereographic, ConformalMap, ExtremizerParams};
use confsob_core::dynamics::critical_lambda;
use confsob_core::energy::{
    beckner_deficit, el_residual, energy_direct_extrapolated, gibbs_gap, verify_conf_e, verify_conf_h,
};
use confsob_core::harmonics::{
    mode_count, multiplier_a2s, multiplier_h, multiplier_p2s, HarmonicCoeffs, MultiplierTable,
};
use confsob_core::sphere::{chordal_distance, Constant, GridFunction, QuadratureGrid, SpherePoint};
use confsob_core::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::io::MapSpec;

/// Deliberate faults for exercising the failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Scales the log multipliers by 1.25 in the spectral side of the energy identity.
    CorruptMultiplier,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub pass: bool,
    /// Worst value of the checked quantity.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub maps: Vec<MapSpec>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    rng: ChaCha8Rng,
    fault: Option<Fault>,
}

type SuiteFn = fn(&mut Ctx) -> Result<SuiteResult>;

/// Suite names in run order.
pub const SUITES: [&str; 10] = [
    "confdistance",
    "kernelsign",
    "conftransfE",
    "conftransfH",
    "energyharmonics",
    "gibbs",
    "deficit",
    "elresidual",
    "multipliers",
    "movingspheres",
];

fn suite_fn(name: &str) -> SuiteFn {
    match name {
        "confdistance" => conf_distance,
        "kernelsign" => kernel_sign,
        "conftransfE" => conf_e,
        "conftransfH" => conf_h,
        "energyharmonics" => energy_harmonics,
        "gibbs" => gibbs,
        "deficit" => deficit,
        "elresidual" => el_family,
        "multipliers" => multipliers,
        _ => moving_spheres,
    }
}

fn result(name: &'static str, worst: f64, tolerance: f64, pass: bool, detail: String) -> SuiteResult {
    SuiteResult {
        name,
        pass,
        worst,
        tolerance,
        detail,
        maps: Vec::new(),
    }
}

fn grid(n: usize, degree: usize) -> Result<Arc<QuadratureGrid>> {
    Ok(Arc::new(QuadratureGrid::new(n, degree)?))
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> SpherePoint {
    if n == 1 {
        return SpherePoint::from_angle(rng.gen_range(0.0..2.0 * PI));
    }
    let z: f64 = rng.gen_range(-1.0..1.0);
    SpherePoint::from_polar(z.acos(), rng.gen_range(0.0..2.0 * PI))
}

fn random_coeffs(rng: &mut ChaCha8Rng, n: usize, band: usize) -> Result<HarmonicCoeffs> {
    let vals = (0..mode_count(n, band)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    HarmonicCoeffs::from_values(n, band, vals)
}

fn random_zeta(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let r = rng.gen_range(lo..hi);
    random_point(rng, n).coords().iter().map(|v| v * r).collect()
}

fn random_plane_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect()
}

fn random_inversion(rng: &mut ChaCha8Rng, n: usize) -> Result<ConformalMap> {
    let x0 = random_plane_point(rng, n);
    ConformalMap::inversion(rng.gen_range(0.3..3.0), stereographic(&x0)?)
}

fn random_reflection(rng: &mut ChaCha8Rng, n: usize) -> Result<ConformalMap> {
    let e = if n == 1 {
        vec![if rng.gen_bool(0.5) { 1.0 } else { -1.0 }]
    } else {
        random_point(rng, n - 1).coords().to_vec()
    };
    ConformalMap::reflection(rng.gen_range(-1.5..1.5), e)
}

/// |Φξ − Φη|² = J(ξ)^{1/n} J(η)^{1/n} |ξ − η|².
fn conf_distance(ctx: &mut Ctx) -> Result<SuiteResult> {
    let n = ctx.cfg.n;
    let tol = ctx.cfg.tolerances.distance;
    let (mut worst, mut pairs, mut maps) = (0.0f64, 0usize, Vec::new());
    for k in 0..18 {
        let map = match k % 3 {
            0 => random_inversion(&mut ctx.rng, n)?,
            1 => random_reflection(&mut ctx.rng, n)?,
            _ => ConformalMap::moebius(random_zeta(&mut ctx.rng, n, 0.0, 0.8))?,
        };
        for _ in 0..50 {
            let (a, b) = (random_point(&mut ctx.rng, n), random_point(&mut ctx.rng, n));
            let images = map.apply(&a).and_then(|fa| Ok((fa, map.apply(&b)?)));
            let (fa, fb) = match images {
                Err(Error::Pole(_)) => continue,
                other => other?,
            };
            let lhs = chordal_distance(&fa, &fb)?.powi(2);
            let scale = (map.jacobian(&a)? * map.jacobian(&b)?).powf(1.0 / n as f64);
            let rhs = scale * chordal_distance(&a, &b)?.powi(2);
            worst = worst.max((lhs - rhs).abs() / rhs.max(lhs));
            pairs += 1;
        }
        maps.push(MapSpec::from(&map));
    }
    let mut r = result("confdistance", worst, tol, worst <= tol, format!("{pairs} pairs under 18 maps"));
    r.maps = maps;
    Ok(r)
}

/// l(ξ, η) > 0 for ξ, η in Σ.
fn kernel_sign(ctx: &mut Ctx) -> Result<SuiteResult> {
    let n = ctx.cfg.n;
    let (mut bad, mut pairs, mut min) = (0usize, 0usize, f64::INFINITY);
    for k in 0..20 {
        let map = if k % 2 == 0 {
            random_inversion(&mut ctx.rng, n)?
        } else {
            random_reflection(&mut ctx.rng, n)?
        };
        let region = map.sigma().ok_or(Error::Parameter("map without comparison region"))?;
        let mut inside = Vec::new();
        let mut draws = 0;
        while inside.len() < 2000 && draws < 400_000 {
            draws += 1;
            let p = random_point(&mut ctx.rng, n);
            if in_sigma(&region, &p)? {
                inside.push(p);
            }
        }
        for pair in inside.chunks_exact(2) {
            let l = kernel_l(&map, &pair[0], &pair[1])?;
            min = min.min(l);
            pairs += 1;
            if !(l > 0.0) {
                bad += 1;
            }
        }
    }
    Ok(result(
        "kernelsign",
        bad as f64,
        0.0,
        bad == 0 && pairs > 0,
        format!("{bad} violations in {pairs} pairs, smallest kernel {min:.3e}"),
    ))
}

fn work_band(cfg: &RunConfig) -> usize {
    if cfg.n == 1 {
        (4 * cfg.band_limit).max(64)
    } else {
        (2 * cfg.band_limit).max(32)
    }
}

fn conf_e(ctx: &mut Ctx) -> Result<SuiteResult> {
    let (n, band, tol) = (ctx.cfg.n, ctx.cfg.band_limit, ctx.cfg.tolerances.identity);
    let (mut worst, mut trunc, mut maps) = (0.0f64, 0.0f64, Vec::new());
    for _ in 0..5 {
        let u = random_coeffs(&mut ctx.rng, n, band)?;
        let v = random_coeffs(&mut ctx.rng, n, band)?;
        let map = ConformalMap::moebius(random_zeta(&mut ctx.rng, n, 0.05, 0.5))?;
        let r = verify_conf_e(&u, &v, &map, work_band(ctx.cfg))?;
        worst = worst.max(r.residual / (1.0 + r.energy.abs()));
        trunc = trunc.max(r.truncation);
        maps.push(MapSpec::from(&map));
    }
    let mut r = result(
        "conftransfE",
        worst,
        tol,
        worst <= tol,
        format!("residual/(1+|E|) over 5 triples; pullback truncation {trunc:.2e}"),
    );
    r.maps = maps;
    Ok(r)
}

fn conf_h(ctx: &mut Ctx) -> Result<SuiteResult> {
    let (n, tol) = (ctx.cfg.n, ctx.cfg.tolerances.identity);
    let band = ctx.cfg.band_limit.min(8);
    let (mut worst, mut maps) = (0.0f64, Vec::new());
    for _ in 0..3 {
        let u = random_coeffs(&mut ctx.rng, n, band)?;
        let map = ConformalMap::moebius(random_zeta(&mut ctx.rng, n, 0.05, 0.2))?;
        let r = verify_conf_h(&u, &map, work_band(ctx.cfg))?;
        worst = worst.max(r.max_residual / r.scale.max(1e-300));
        maps.push(MapSpec::from(&map));
    }
    let mut r = result(
        "conftransfH",
        worst,
        tol,
        worst <= tol,
        format!("max pointwise residual / max|Hu| over 3 pairs, band {band}"),
    );
    r.maps = maps;
    Ok(r)
}

/// Direct double quadrature against 2Σ h_l v².
fn energy_harmonics(ctx: &mut Ctx) -> Result<SuiteResult> {
    let n = ctx.cfg.n;
    let tol = ctx.cfg.tolerances.energy;
    let band = ctx.cfg.band_limit.min(8);
    let g = grid(n, if n == 1 { 32 * band } else { 4 * band })?;
    let mut table = MultiplierTable::log_operator(n, band)?;
    if ctx.fault == Some(Fault::CorruptMultiplier) {
        let vals = table.values().iter().map(|h| 1.25 * h).collect();
        table = MultiplierTable::from_values(n, vals)?;
    }
    let eps = 2.0 * g.min_spacing();
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let v = random_coeffs(&mut ctx.rng, n, band)?;
        let f = v.synthesize(&g)?;
        let direct = 2.0 * energy_direct_extrapolated(&f, &f, eps)?;
        let spectral = 2.0 * table.quadratic_form(&v, &v)?;
        worst = worst.max((direct - spectral).abs() / spectral.abs());
    }
    Ok(result(
        "energyharmonics",
        worst,
        tol,
        worst <= tol,
        format!("5 functions of band {band}, grid degree {}, eps {eps:.3e}", g.degree()),
    ))
}

fn gibbs(ctx: &mut Ctx) -> Result<SuiteResult> {
    let g = grid(ctx.cfg.n, 16)?;
    let tol = ctx.cfg.tolerances.gibbs;
    let eq_tol = ctx.cfg.tolerances.gibbs_equality;
    let (mut min_gap, mut max_eq) = (f64::INFINITY, 0.0f64);
    for _ in 0..200 {
        let raw: Vec<f64> = (0..g.len()).map(|_| ctx.rng.gen_range(0.01..2.0)).collect();
        let raw = GridFunction::new(&g, raw)?;
        let mass = raw.integral();
        let f = raw.map(|x| x / mass);
        let amp = ctx.rng.gen_range(0.1..10.0);
        let h: Vec<f64> = (0..g.len()).map(|_| ctx.rng.gen_range(-amp..amp)).collect();
        min_gap = min_gap.min(gibbs_gap(&f, &GridFunction::new(&g, h)?)?);
        let c = ctx.rng.gen_range(-5.0..5.0);
        max_eq = max_eq.max(gibbs_gap(&f, &f.map(|x| x.ln() + c))?.abs());
    }
    Ok(result(
        "gibbs",
        -min_gap,
        tol,
        min_gap >= -tol && max_eq <= eq_tol,
        format!("min gap {min_gap:.3e} on 200 pairs, max |gap| {max_eq:.2e} at equality"),
    ))
}

fn deficit(ctx: &mut Ctx) -> Result<SuiteResult> {
    let (n, band, tol) = (ctx.cfg.n, ctx.cfg.band_limit, ctx.cfg.tolerances.deficit);
    let g = grid(n, ctx.cfg.grid_degree)?;
    let mut min_rel = f64::INFINITY;
    for _ in 0..20 {
        let u = random_coeffs(&mut ctx.rng, n, band)?;
        min_rel = min_rel.min(beckner_deficit(&u, &g)?.relative());
    }
    Ok(result(
        "deficit",
        -min_rel,
        tol,
        min_rel >= -tol,
        format!("min deficit/energy {min_rel:.3e} over 20 functions"),
    ))
}

fn el_family(ctx: &mut Ctx) -> Result<SuiteResult> {
    let (n, band, tol) = (ctx.cfg.n, ctx.cfg.band_limit, ctx.cfg.tolerances.identity);
    let g = grid(n, ctx.cfg.grid_degree.max(4 * band))?;
    let project_grid = grid(n, 4 * band)?;
    let mut worst: f64 = 0.0;
    for r in [0.0, 0.2, 0.4] {
        let zeta = random_zeta(&mut ctx.rng, n, r, r + f64::EPSILON);
        let p = ExtremizerParams::new(zeta, 1.0)?;
        let u = HarmonicCoeffs::project(&extremizer(&p)?, &project_grid, band)?;
        worst = worst.max(el_residual(&u, band.min(8), &g, false)?.max_abs);
    }
    Ok(result(
        "elresidual",
        worst,
        tol,
        worst <= tol,
        format!("max |r_lm| for |zeta| in {{0, 0.2, 0.4}} at band {band}"),
    ))
}

/// h_l against the central difference of the P₂ₛ and A₂ₛ multipliers at s = 0.
fn multipliers(ctx: &mut Ctx) -> Result<SuiteResult> {
    let tol = ctx.cfg.tolerances.multiplier;
    let s = 1e-5;
    let top = ctx.cfg.band_limit.max(64);
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        let half = n as f64 / 2.0;
        let scale = 2.0 * PI.powf(half) / gamma(half);
        let (p0, a0) = (multiplier_p2s(n, 0, s)?, multiplier_a2s(n, 0, s)?);
        for l in 1..=top {
            let fd = ((p0 - multiplier_p2s(n, l, s)?) - (a0 - multiplier_a2s(n, l, s)?)) / (4.0 * s);
            worst = worst.max((fd * scale / multiplier_h(n, l)? - 1.0).abs());
        }
    }
    Ok(result(
        "multipliers",
        worst,
        tol,
        worst <= tol,
        format!("relative error for n = 1..4, l <= {top}, s = {s:e}"),
    ))
}

fn gamma(x: f64) -> f64 {
    confsob_core::special::ln_gamma(x).map_or(f64::NAN, f64::exp)
}

/// Critical scale of u ≡ 1 at the north pole and of one family member.
fn moving_spheres(ctx: &mut Ctx) -> Result<SuiteResult> {
    let n = ctx.cfg.n;
    let tol = ctx.cfg.tolerances.identity;
    let g = QuadratureGrid::new(n, if n == 1 { 64 } else { 24 })?;
    let range = (0.01, 100.0);
    let one = critical_lambda(&Constant(1.0), &SpherePoint::north_pole(n), range, 1e-9, &g)?;
    let lam = one.critical.unwrap_or(f64::NAN);
    let sup_one = one.sup_at_critical.unwrap_or(f64::INFINITY);
    let p = ExtremizerParams::new(random_zeta(&mut ctx.rng, n, 0.1, 0.4), 1.0)?;
    let b = p.bubble()?;
    let x0 = random_plane_point(&mut ctx.rng, n);
    let rep = critical_lambda(&extremizer(&p)?, &stereographic(&x0)?, range, 1e-9, &g)?;
    let want = (b.b * b.b + x0.iter().zip(&b.a).map(|(x, a)| (x - a).powi(2)).sum::<f64>()).sqrt();
    let got = rep.critical.unwrap_or(f64::NAN);
    let sup = rep.sup_at_critical.unwrap_or(f64::INFINITY);
    let worst = sup.max(sup_one);
    let pass = (lam - 1.0).abs() <= 1e-2 && sup_one <= 1e-6 && sup <= tol && (got - want).abs() <= tol * want;
    Ok(result(
        "movingspheres",
        worst,
        tol,
        pass,
        format!("u=1: lambda0 {lam:.6}; member: lambda0 {got:.6} (bubble {want:.6}), sup|w| {sup:.2e}"),
    ))
}

/// Runs every suite; results come back in [`SUITES`] order whatever the
/// worker count.
pub fn run_suites(cfg: &RunConfig, fault: Option<Fault>) -> Vec<SuiteResult> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<SuiteResult>>> = Mutex::new(vec![None; SUITES.len()]);
    let workers = cfg.workers.clamp(1, SUITES.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= SUITES.len() {
                    break;
                }
                let name = SUITES[i];
                let mut ctx = Ctx {
                    cfg,
                    rng: ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(1_000_003).wrapping_add(i as u64)),
                    fault,
                };
                let r = suite_fn(name)(&mut ctx).unwrap_or_else(|e| result(name, f64::NAN, f64::NAN, false, format!("error: {e}")));
                slots.lock().expect("suite slot lock")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("suite slot lock")
        .into_iter()
        .map(|r| r.expect("every suite ran"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigFile;

    fn cfg(n: usize, band: usize) -> RunConfig {
        let flags = ConfigFile {
            n: Some(n),
            band_limit: Some(band),
            ..Default::default()
        };
        RunConfig::resolve(flags, None).unwrap()
    }

    #[test]
    fn corrupt_multiplier_fails_energy_only() {
        let c = cfg(2, 8);
        let mut ctx = Ctx {
            cfg: &c,
            rng: ChaCha8Rng::seed_from_u64(1),
            fault: Some(Fault::CorruptMultiplier),
        };
        assert!(!energy_harmonics(&mut ctx).unwrap().pass);
        ctx.fault = None;
        assert!(energy_harmonics(&mut ctx).unwrap().pass);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut c = cfg(1, 8);
        c.workers = 1;
        let a = run_suites(&c, None);
        c.workers = 4;
        let b = run_suites(&c, None);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.iter().all(|r| r.pass), "{a:#?}");
    }
}
