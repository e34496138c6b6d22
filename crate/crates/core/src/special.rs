//! Log-gamma, digamma and the real orthonormal harmonic bases of 𝕊¹ and 𝕊².

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use libm::{atan2, log, sqrt};

use crate::sphere::SpherePoint;
use crate::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// B_{2k} / (2k(2k−1)) for k = 1..8 (Stirling series of ln Γ).
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// B_{2k} / (2k) for k = 1..7 (asymptotic series of ψ).
const DIGAMMA_ASYMP: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
];

const LN_GAMMA_SHIFT: f64 = 15.0;
const DIGAMMA_SHIFT: f64 = 8.0;

/// ln Γ(x) for x > 0.
///
/// Shifts the argument above 15 with Γ(x+1) = xΓ(x), then sums eight terms
/// of the Stirling series.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain("ln_gamma requires a finite x > 0"));
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    let mut z = x;
    let mut prod = 1.0;
    while z < LN_GAMMA_SHIFT {
        prod *= z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut p = inv;
    for c in STIRLING {
        series += c * p;
        p *= inv2;
    }
    Ok((z - 0.5) * log(z) - z + LN_SQRT_2PI + series - log(prod))
}

/// ψ(x) = Γ′(x)/Γ(x) for x > 0.
///
/// Recurrence ψ(x+1) = ψ(x) + 1/x until x ≥ 8, then the asymptotic series.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain("digamma requires a finite x > 0"));
    }
    let mut z = x;
    let mut shift = 0.0;
    while z < DIGAMMA_SHIFT {
        shift += 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    let mut p = inv2;
    for c in DIGAMMA_ASYMP {
        series += c * p;
        p *= inv2;
    }
    Ok(log(z) - 0.5 / z - series - shift)
}

/// Number of real harmonics of degree exactly `l` on 𝕊ⁿ, `n ∈ {1, 2}`.
pub fn degree_multiplicity(n: usize, l: usize) -> usize {
    match (n, l) {
        (_, 0) => 1,
        (1, _) => 2,
        _ => 2 * l + 1,
    }
}

/// Number of harmonics of degree ≤ `band_limit`.
pub fn mode_count(n: usize, band_limit: usize) -> usize {
    match n {
        1 => 2 * band_limit + 1,
        _ => (band_limit + 1) * (band_limit + 1),
    }
}

/// Orders `m` carried by degree `l`.
///
/// On 𝕊² these are `-l..=l` (negative orders are the sine branch). On 𝕊¹
/// degree `l ≥ 1` carries `+l` (cosine) and `-l` (sine).
pub fn orders(n: usize, l: usize) -> impl Iterator<Item = i64> {
    let l = l as i64;
    let (lo, step) = match n {
        1 if l > 0 => (-l, 2 * l as usize),
        _ => (-l, 1),
    };
    (lo..=l).step_by(step.max(1))
}

/// Flat position of `(l, m)` in a coefficient vector.
pub fn mode_index(n: usize, l: usize, m: i64) -> Result<usize> {
    let li = l as i64;
    match n {
        1 => match (l, m) {
            (0, 0) => Ok(0),
            (_, m) if l > 0 && m == li => Ok(2 * l),
            (_, m) if l > 0 && m == -li => Ok(2 * l - 1),
            _ => Err(Error::IndexOutOfRange { l, m }),
        },
        2 => {
            if m.abs() > li {
                return Err(Error::IndexOutOfRange { l, m });
            }
            Ok(l * l + (m + li) as usize)
        }
        _ => Err(Error::UnsupportedGridDimension(n)),
    }
}

#[inline]
pub(crate) fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Fully normalized associated Legendre values P̄ₗᵐ(x) for all `m ≤ l ≤ lmax`,
/// triangular order. Normalized so that Yₗₘ = P̄ₗ^{|m|}(cos θ)·{1, √2 cos mφ, √2 sin |m|φ}.
///
/// Upward recurrence in `l` at fixed `m`; `s = sin θ ≥ 0`.
pub(crate) fn legendre_table(lmax: usize, x: f64, s: f64, out: &mut Vec<f64>) {
    out.clear();
    out.resize(tri(lmax, lmax) + 1, 0.0);
    let mut pmm = 1.0 / sqrt(4.0 * PI);
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= sqrt((2.0 * mf + 1.0) / (2.0 * mf)) * s;
        }
        out[tri(m, m)] = pmm;
        if m == lmax {
            break;
        }
        let mf = m as f64;
        let mut prev = pmm;
        let mut cur = sqrt(2.0 * mf + 3.0) * x * pmm;
        out[tri(m + 1, m)] = cur;
        for l in m + 2..=lmax {
            let lf = l as f64;
            let a = sqrt((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf));
            let lm1 = lf - 1.0;
            let b = sqrt((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0));
            let next = a * (x * cur - b * prev);
            out[tri(l, m)] = next;
            prev = cur;
            cur = next;
        }
    }
}

/// cos(mφ), sin(mφ) for m = 0..=mmax by angle addition.
pub(crate) fn trig_table(mmax: usize, phi: f64, cos_out: &mut Vec<f64>, sin_out: &mut Vec<f64>) {
    cos_out.clear();
    sin_out.clear();
    let (s1, c1) = (libm::sin(phi), libm::cos(phi));
    let (mut c, mut s) = (1.0, 0.0);
    for _ in 0..=mmax {
        cos_out.push(c);
        sin_out.push(s);
        let nc = c * c1 - s * s1;
        s = s * c1 + c * s1;
        c = nc;
    }
}

/// Evaluates every basis function of degree ≤ `band_limit` at `xi`, in
/// [`mode_index`] order.
pub fn basis_values(n: usize, band_limit: usize, xi: &SpherePoint, out: &mut Vec<f64>) -> Result<()> {
    if xi.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: xi.dim(),
        });
    }
    let c = xi.coords();
    out.clear();
    match n {
        1 => {
            let theta = atan2(c[1], c[0]);
            let (mut cs, mut sn) = (Vec::new(), Vec::new());
            trig_table(band_limit, theta, &mut cs, &mut sn);
            out.push(1.0 / sqrt(2.0 * PI));
            let k = 1.0 / sqrt(PI);
            for l in 1..=band_limit {
                out.push(k * sn[l]);
                out.push(k * cs[l]);
            }
            Ok(())
        }
        2 => {
            let (x, y, z) = (c[0], c[1], c[2]);
            let s = sqrt(x * x + y * y);
            let phi = atan2(y, x);
            let mut leg = Vec::new();
            legendre_table(band_limit, z, s, &mut leg);
            let (mut cs, mut sn) = (Vec::new(), Vec::new());
            trig_table(band_limit, phi, &mut cs, &mut sn);
            out.resize(mode_count(2, band_limit), 0.0);
            for l in 0..=band_limit {
                let base = l * l + l;
                out[base] = leg[tri(l, 0)];
                for m in 1..=l {
                    let p = SQRT_2 * leg[tri(l, m)];
                    out[base + m] = p * cs[m];
                    out[base - m] = p * sn[m];
                }
            }
            Ok(())
        }
        _ => Err(Error::UnsupportedGridDimension(n)),
    }
}

/// Real orthonormal harmonic Yₗₘ at `xi` on 𝕊¹ or 𝕊².
pub fn zonal_basis(n: usize, l: usize, m: i64, xi: &SpherePoint) -> Result<f64> {
    let idx = mode_index(n, l, m)?;
    let mut vals = Vec::new();
    basis_values(n, l, xi, &mut vals)?;
    Ok(vals[idx])
}

#[cfg(test)]
mod tests {
    use super::*;

    // High-precision reference values (40-digit arithmetic), rounded.
    const LN_GAMMA_REF: [(f64, f64); 14] = [
        (0.001, 6.907_178_885_383_853_682_5),
        (0.01, 4.599_479_878_042_021_722_5),
        (0.1, 2.252_712_651_734_205_959_9),
        (0.5, 0.572_364_942_924_700_087_07),
        (1.0, 0.0),
        (1.5, -0.120_782_237_635_245_222_35),
        (2.5, 0.284_682_870_472_919_159_63),
        (5.0, 3.178_053_830_347_945_619_6),
        (7.3, 7.147_892_523_022_249_032_8),
        (10.0, 12.801_827_480_081_469_611),
        (33.25, 82.429_238_345_909_042_294),
        (100.0, 359.134_205_369_575_398_78),
        (1234.5, 7_550.550_901_077_894_895_7),
        (1e6, 12_815_504.569_147_611_660),
    ];

    const DIGAMMA_REF: [(f64, f64); 11] = [
        (0.001, -1_000.575_571_931_810_300_5),
        (0.1, -10.423_754_940_411_076_795),
        (0.5, -1.963_510_026_021_423_479_4),
        (1.0, -0.577_215_664_901_532_860_61),
        (1.5, 0.036_489_973_978_576_520_559),
        (2.0, 0.422_784_335_098_467_139_39),
        (3.7, 1.167_153_539_361_511_385_9),
        (8.0, 2.015_641_477_955_609_996_5),
        (12.5, 2.485_195_651_274_912_048_2),
        (100.0, 4.600_161_852_738_087_400_2),
        (1e4, 9.210_290_371_142_849_403_6),
    ];

    #[test]
    fn ln_gamma_matches_reference() {
        for (x, want) in LN_GAMMA_REF {
            let got = ln_gamma(x).unwrap();
            // Absolute 1e-12 while |ln Γ| is O(1); beyond that f64 only
            // carries relative precision.
            let tol = 1e-12 * want.abs().max(1.0);
            assert!((got - want).abs() <= tol, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn ln_gamma_examples() {
        assert_eq!(ln_gamma(1.0).unwrap(), 0.0);
        assert!((ln_gamma(0.5).unwrap() - log(sqrt(PI))).abs() < 1e-14);
        assert!((ln_gamma(5.0).unwrap() - log(24.0)).abs() < 1e-13);
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-1.5).is_err());
    }

    #[test]
    fn digamma_matches_reference() {
        for (x, want) in DIGAMMA_REF {
            let got = digamma(x).unwrap();
            assert!((got - want).abs() <= 1e-12, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn digamma_examples() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(2.0).unwrap() - digamma(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((digamma(1.0).unwrap() + euler).abs() < 1e-14);
        assert!((digamma(0.5).unwrap() + euler + 2.0 * log(2.0)).abs() < 1e-14);
        assert!(digamma(0.0).is_err());
    }

    #[test]
    fn index_layout_is_dense() {
        for n in [1, 2] {
            let band = 7;
            let mut seen = alloc::vec![false; mode_count(n, band)];
            for l in 0..=band {
                assert_eq!(orders(n, l).count(), degree_multiplicity(n, l));
                for m in orders(n, l) {
                    let i = mode_index(n, l, m).unwrap();
                    assert!(!seen[i]);
                    seen[i] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
        assert!(mode_index(2, 2, 3).is_err());
        assert!(mode_index(1, 2, 1).is_err());
    }

    #[test]
    fn basis_examples() {
        let p = SpherePoint::from_polar(0.7, 2.1);
        assert!((zonal_basis(2, 0, 0, &p).unwrap() - 1.0 / sqrt(4.0 * PI)).abs() < 1e-15);
        let theta = 0.4;
        let q = SpherePoint::from_angle(theta);
        assert!((zonal_basis(1, 1, 1, &q).unwrap() - libm::cos(theta) / sqrt(PI)).abs() < 1e-15);
        let north = SpherePoint::north_pole(2);
        assert!((zonal_basis(2, 1, 0, &north).unwrap() - sqrt(3.0 / (4.0 * PI))).abs() < 1e-15);
        assert!(zonal_basis(2, 1, 2, &north).is_err());
    }

    #[test]
    fn low_degree_closed_forms() {
        // Y₂₀ = √(5/16π)(3z² − 1), Y₂,₂ = √(15/16π)(x² − y²), Y₂,−₁ = √(15/4π) y z.
        let p = SpherePoint::new(alloc::vec![0.3, -0.5, 0.8]).unwrap();
        let (x, y, z) = (p.coords()[0], p.coords()[1], p.coords()[2]);
        let cases = [
            (2, 0, sqrt(5.0 / (16.0 * PI)) * (3.0 * z * z - 1.0)),
            (2, 2, sqrt(15.0 / (16.0 * PI)) * (x * x - y * y)),
            (2, -1, sqrt(15.0 / (4.0 * PI)) * y * z),
            (1, 1, sqrt(3.0 / (4.0 * PI)) * x),
            (1, -1, sqrt(3.0 / (4.0 * PI)) * y),
        ];
        for (l, m, want) in cases {
            let got = zonal_basis(2, l, m, &p).unwrap();
            assert!((got - want).abs() < 1e-14, "({l},{m}): {got} vs {want}");
        }
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn digamma_recurrence(x in 1e-3f64..100.0) {
            let d = digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x;
            prop_assert!(d.abs() <= 1e-12 * (1.0 / x).max(1.0));
        }

        #[test]
        fn ln_gamma_recurrence(x in 1e-3f64..100.0) {
            let d = ln_gamma(x + 1.0).unwrap() - ln_gamma(x).unwrap() - log(x);
            prop_assert!(d.abs() <= 1e-12 * ln_gamma(x + 1.0).unwrap().abs().max(1.0));
        }
    }
}
