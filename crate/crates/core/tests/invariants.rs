#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

use std::f64::consts::PI;
use std::sync::Arc;

use confsob_core::conformal::{inverse_stereographic, stereographic};
use confsob_core::harmonics::{apply_h, mode_count};
use confsob_core::prelude::*;
use proptest::prelude::*;

fn grid(n: usize, degree: usize) -> Arc<QuadratureGrid> {
    Arc::new(QuadratureGrid::new(n, degree).unwrap())
}

fn coeffs(n: usize, band: usize) -> impl Strategy<Value = HarmonicCoeffs> {
    prop::collection::vec(-1.0f64..1.0, mode_count(n, band))
        .prop_map(move |v| HarmonicCoeffs::from_values(n, band, v).unwrap())
}

fn zeta(max: f64) -> impl Strategy<Value = Vec<f64>> {
    (0.0f64..max, 0.0f64..PI, 0.0f64..2.0 * PI)
        .prop_map(|(r, t, p)| vec![r * t.sin() * p.cos(), r * t.sin() * p.sin(), r * t.cos()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn analysis_inverts_synthesis(c in coeffs(2, 6)) {
        let g = grid(2, 12);
        let back = HarmonicCoeffs::analyze(&c.synthesize(&g).unwrap(), 6).unwrap();
        for (a, b) in back.values().iter().zip(c.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn deficit_is_scale_invariant(c in coeffs(2, 5), k in 0.1f64..10.0) {
        let g = grid(2, 20);
        let base = beckner_deficit(&c, &g).unwrap();
        let scaled = beckner_deficit(&c.scaled(k), &g).unwrap();
        prop_assert!((scaled.deficit - k * k * base.deficit).abs() <= 1e-9 * k * k * base.energy_term);
        prop_assert!(base.deficit >= -1e-9 * base.energy_term);
    }

    #[test]
    fn energy_is_symmetric_and_nonnegative(u in coeffs(1, 10), v in coeffs(1, 10)) {
        let a = energy_spectral(&u, &v).unwrap();
        prop_assert_eq!(a, energy_spectral(&v, &u).unwrap());
        prop_assert!(energy_spectral(&u, &u).unwrap() >= 0.0);
        let hu = apply_h(&u).unwrap();
        prop_assert!((hu.dot(&v).unwrap() - a).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn family_members_have_no_deficit(z in zeta(0.4), c in 0.2f64..5.0) {
        let p = ExtremizerParams::new(z, c).unwrap();
        let u = HarmonicCoeffs::project(&extremizer(&p).unwrap(), &grid(2, 64), 32).unwrap();
        let r = beckner_deficit(&u, &grid(2, 128)).unwrap();
        prop_assert!(r.relative().abs() < 1e-6, "{:?}", r);
    }

    #[test]
    fn moebius_pullback_of_constant_is_member(z in zeta(0.6)) {
        let map = ConformalMap::moebius(z.clone()).unwrap();
        let one = Constant(1.0);
        let pulled = Pullback::new(&one, map);
        let member = extremizer(&ExtremizerParams::new(z, 1.0).unwrap()).unwrap();
        for p in grid(2, 6).nodes() {
            let (a, b) = (pulled.eval(p).unwrap(), member.eval(p).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn stereographic_roundtrip(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let back = inverse_stereographic(&stereographic(&[x, y]).unwrap()).unwrap();
        prop_assert!((back[0] - x).abs() < 1e-12 * (1.0 + x.abs()));
        prop_assert!((back[1] - y).abs() < 1e-12 * (1.0 + y.abs()));
    }
}

#[test]
fn fit_after_flow_is_stable() {
    let mut init = HarmonicCoeffs::zeros(2, 8).unwrap();
    init.set(0, 0, (4.0 * PI).sqrt()).unwrap();
    init.set(1, 1, 0.8).unwrap();
    init.set(3, -2, 0.3).unwrap();
    let cfg = FlowConfig {
        band_limit: 8,
        ..Default::default()
    };
    let r = minimize_deficit(&init, &cfg).unwrap();
    let fit = fit_extremizer(&r.coeffs).unwrap();
    assert!(fit.in_family, "{fit:?}");
    let zeta = &fit.params.zeta;
    assert!(zeta[0] > 0.0 && zeta[1].abs() < 0.5 * zeta[0]);
}

#[test]
fn critical_scale_agrees_with_bubble() {
    let p = ExtremizerParams::new(vec![0.3, 0.1, -0.2], 1.0).unwrap();
    let e = extremizer(&p).unwrap();
    let b = p.bubble().unwrap();
    let g = QuadratureGrid::new(2, 24).unwrap();
    let x0 = [1.0, 1.0];
    let r = critical_lambda(&e, &stereographic(&x0).unwrap(), (0.01, 100.0), 1e-9, &g).unwrap();
    let want = (b.b * b.b + (x0[0] - b.a[0]).powi(2) + (x0[1] - b.a[1]).powi(2)).sqrt();
    assert!((r.critical.unwrap() - want).abs() < 1e-6 * want);
    assert!(r.symmetric(1e-6));
    assert!(r.min_w.iter().zip(&r.values).all(|(m, l)| *l > want || *m >= -1e-9));
}
