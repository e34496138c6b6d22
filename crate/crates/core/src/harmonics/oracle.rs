//! Slow quadrature evaluations of the integral operators, used to check the
//! spectral path.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{asin, cos, exp, log, pow, sin, sqrt};

use crate::special::ln_gamma;
use crate::sphere::{gauss_legendre, SphereFunction, SpherePoint};
use crate::sum::Accumulator;
use crate::{Error, Result};

/// Unit tangent vectors orthogonal to `xi` (one for n=1, two for n=2).
fn tangent_frame(xi: &SpherePoint) -> Result<Vec<Vec<f64>>> {
    let x = xi.coords();
    match xi.dim() {
        1 => Ok(alloc::vec![alloc::vec![-x[1], x[0]]]),
        2 => {
            let axis = (0..3)
                .min_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs()))
                .unwrap_or(0);
            let mut t1 = alloc::vec![0.0; 3];
            t1[axis] = 1.0;
            let d = x[axis];
            for (t, &c) in t1.iter_mut().zip(x) {
                *t -= d * c;
            }
            let r = sqrt(t1.iter().map(|v| v * v).sum());
            t1.iter_mut().for_each(|v| *v /= r);
            let t2 = alloc::vec![
                x[1] * t1[2] - x[2] * t1[1],
                x[2] * t1[0] - x[0] * t1[2],
                x[0] * t1[1] - x[1] * t1[0],
            ];
            Ok(alloc::vec![t1, t2])
        }
        n => Err(Error::UnsupportedGridDimension(n)),
    }
}

/// Mean of `u` over the geodesic sphere of radius `theta` about `xi`.
fn shell_mean(
    u: &dyn SphereFunction,
    xi: &SpherePoint,
    frame: &[Vec<f64>],
    theta: f64,
    azimuths: usize,
) -> Result<f64> {
    let (c, s) = (cos(theta), sin(theta));
    let x = xi.coords();
    let point = |dir: &dyn Fn(usize) -> f64| {
        let coords = (0..x.len()).map(|i| c * x[i] + s * dir(i)).collect();
        SpherePoint::new(coords)
    };
    if frame.len() == 1 {
        let t = &frame[0];
        let a = u.eval(&point(&|i| t[i])?)?;
        let b = u.eval(&point(&|i| -t[i])?)?;
        return Ok(0.5 * (a + b));
    }
    let mut acc = Accumulator::new();
    for k in 0..azimuths {
        let phi = 2.0 * PI * k as f64 / azimuths as f64;
        let (cp, sp) = (cos(phi), sin(phi));
        acc.add(u.eval(&point(&|i| cp * frame[0][i] + sp * frame[1][i])?)?);
    }
    Ok(acc.total() / azimuths as f64)
}

/// d/dθ of the cap measure: 2 on the circle, 2π sin θ on 𝕊².
fn shell_measure(n: usize, theta: f64) -> f64 {
    if n == 1 {
        2.0
    } else {
        2.0 * PI * sin(theta)
    }
}

/// ∫_{|ξ−η| ≥ ε} (u(ξ) − u(η))/|ξ−η|ⁿ dη with `res` Gauss nodes in the
/// polar angle about ξ and `2·res` azimuths.
pub fn log_operator_pv_truncated(u: &dyn SphereFunction, xi: &SpherePoint, eps: f64, res: usize) -> Result<f64> {
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::Parameter("exclusion radius must lie in (0, 2)"));
    }
    if res == 0 {
        return Err(Error::InvalidDegree);
    }
    let n = xi.dim();
    let frame = tangent_frame(xi)?;
    let center = u.eval(xi)?;
    let lo = 2.0 * asin(eps / 2.0);
    let (nodes, weights) = gauss_legendre(res);
    let half = 0.5 * (PI - lo);
    let mut acc = Accumulator::new();
    for (x, w) in nodes.iter().zip(&weights) {
        let theta = lo + half * (x + 1.0);
        let chord = 2.0 * sin(0.5 * theta);
        let mean = shell_mean(u, xi, &frame, theta, 2 * res)?;
        acc.add(w * half * (center - mean) * shell_measure(n, theta) / pow(chord, n as f64));
    }
    Ok(acc.total())
}

/// Principal value `(Hu)(ξ)`: truncations at ε and ε/2 combined to cancel
/// the O(ε²) cap term.
pub fn log_operator_pv(u: &dyn SphereFunction, xi: &SpherePoint, eps: f64, res: usize) -> Result<f64> {
    let coarse = log_operator_pv_truncated(u, xi, eps, res)?;
    let fine = log_operator_pv_truncated(u, xi, 0.5 * eps, res)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `(P₂ₛu)(ξ)` by direct quadrature of its weakly singular kernel, for
/// 0 < s < n/2. The substitution θ = π t^{1/(2s)} removes the endpoint
/// singularity.
pub fn p2s_direct(u: &dyn SphereFunction, xi: &SpherePoint, s: f64, res: usize) -> Result<f64> {
    let n = xi.dim();
    let half = n as f64 / 2.0;
    if !(s > 0.0 && s < half) {
        return Err(Error::Parameter("direct P2s requires 0 < s < n/2"));
    }
    if res == 0 {
        return Err(Error::InvalidDegree);
    }
    let frame = tangent_frame(xi)?;
    let kappa = exp(ln_gamma(half - s)? - 2.0 * s * log(2.0) - half * log(PI) - ln_gamma(s)?);
    let k = 1.0 / (2.0 * s);
    let (nodes, weights) = gauss_legendre(res);
    let mut acc = Accumulator::new();
    for (x, w) in nodes.iter().zip(&weights) {
        let t = 0.5 * (x + 1.0);
        let theta = PI * pow(t, k);
        let dtheta = PI * k * pow(t, k - 1.0);
        let chord = 2.0 * sin(0.5 * theta);
        let mean = shell_mean(u, xi, &frame, theta, 2 * res)?;
        acc.add(0.5 * w * dtheta * mean * shell_measure(n, theta) * pow(chord, 2.0 * s - n as f64));
    }
    Ok(kappa * acc.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::tests::random_coeffs;
    use crate::harmonics::{apply_h, apply_p2s};
    use crate::sphere::Constant;

    fn sample_points(n: usize) -> Vec<SpherePoint> {
        if n == 1 {
            [0.3, 1.9, 4.4].iter().map(|&a| SpherePoint::from_angle(a)).collect()
        } else {
            [(0.4, 0.2), (1.7, 2.5), (2.9, 5.1)]
                .iter()
                .map(|&(t, p)| SpherePoint::from_polar(t, p))
                .collect()
        }
    }

    #[test]
    fn p2s_of_constant() {
        let v = p2s_direct(&Constant(1.0), &SpherePoint::north_pole(2), 0.5, 32).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = p2s_direct(&Constant(1.0), &SpherePoint::from_angle(1.0), 0.25, 48).unwrap();
        let want = multiplier(1, 0, 0.25);
        assert!((v - want).abs() < 1e-8 * want, "{v} {want}");
    }

    fn multiplier(n: usize, l: usize, s: f64) -> f64 {
        crate::harmonics::multiplier_p2s(n, l, s).unwrap()
    }

    #[test]
    fn pv_of_constant_is_zero() {
        let v = log_operator_pv(&Constant(2.5), &SpherePoint::from_polar(1.0, 1.0), 0.1, 24).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn pv_matches_spectral() {
        for n in [1, 2] {
            let u = random_coeffs(n, 6, 11 + n as u64);
            let hu = apply_h(&u).unwrap();
            let scale = sample_points(n)
                .iter()
                .map(|p| hu.eval(p).unwrap().abs())
                .fold(0.0, f64::max);
            for p in sample_points(n) {
                let direct = log_operator_pv(&u, &p, 0.05, 64).unwrap();
                let spectral = hu.eval(&p).unwrap();
                assert!((direct - spectral).abs() <= 1e-2 * scale, "n={n}: {direct} vs {spectral}");
            }
        }
    }

    #[test]
    fn richardson_improves_truncation() {
        let u = random_coeffs(2, 4, 3);
        let p = SpherePoint::from_polar(0.8, 0.3);
        let exact = apply_h(&u).unwrap().eval(&p).unwrap();
        let raw = log_operator_pv_truncated(&u, &p, 0.2, 64).unwrap();
        let extrapolated = log_operator_pv(&u, &p, 0.2, 64).unwrap();
        assert!((extrapolated - exact).abs() < (raw - exact).abs());
    }

    #[test]
    fn p2s_matches_spectral() {
        for n in [1, 2] {
            let s = if n == 1 { 0.25 } else { 0.5 };
            let u = random_coeffs(n, 6, 21 + n as u64);
            let pu = apply_p2s(&u, s).unwrap();
            for p in sample_points(n) {
                let direct = p2s_direct(&u, &p, s, 64).unwrap();
                let spectral = pu.eval(&p).unwrap();
                assert!((direct - spectral).abs() <= 1e-3 * (1.0 + spectral.abs()), "{direct} vs {spectral}");
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = SpherePoint::north_pole(2);
        assert!(log_operator_pv(&Constant(1.0), &p, 0.0, 8).is_err());
        assert!(p2s_direct(&Constant(1.0), &p, 1.0, 8).is_err());
        assert!(p2s_direct(&Constant(1.0), &SpherePoint::north_pole(3), 0.5, 8).is_err());
    }
}
