use proptest::prelude::*;
use sbf::multipliers::*;
use sbf::Error;
use std::f64::consts::PI;

fn q(eps: f64, k: i64) -> SymbolQuery {
    SymbolQuery::new(eps, k).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

// Reference values: the printed formulas evaluated with 40-digit mpmath.

#[test]
fn dtn_reference_values() {
    assert!(close(dtn_eigen_tangential(q(0.01, 10)).unwrap(), 9.6793348321552625408, 1e-12));
    assert!(close(dtn_eigen_normal(q(0.01, 10)).unwrap(), 10.098282607843552689, 1e-12));
    assert!(close(ntd_eigen(Direction::Tangential, q(0.01, 1)).unwrap(), 0.38565710399044945565, 1e-12));
    assert!(close(ntd_eigen(Direction::Normal, q(0.01, 1)).unwrap(), 0.26929250039469818398, 1e-12));
}

#[test]
fn double_layer_reference_values() {
    let t = double_layer_tangential(1.0).unwrap();
    assert!(close(t.q_te, -0.06918288167354082809, 1e-12));
    assert!(close(t.q_tf, 0.18393506054501633933, 1e-12));
    let n = double_layer_normal(1.0).unwrap();
    assert!(close(n.q_nn, -0.29868723941649185057, 1e-12));
    assert!(close(n.q_no, -0.41829249608479310895, 1e-12));
    assert!(close(n.q_np, 0.18393506054501633933, 1e-12));
}

#[test]
fn inverse_reference_values() {
    let eps = 1.0 / (2.0 * PI);
    let t = single_layer_inverse_tangential(q(eps, 1)).unwrap();
    assert!(close(t.a, 6.5813878852893130103, 1e-12));
    assert!(close(t.b, 8.1245192366607614262, 1e-12));
    assert!(close(t.c, 22.830426358610835863, 1e-12));
    let n = single_layer_inverse_normal(q(eps, 1)).unwrap();
    let want = [
        6.4277032450782350184,
        3.0915925765865419327,
        0.47234286592350338909,
        5.1180783897467157466,
        -1.3096248553315192718,
        4.1733926578997089685,
    ];
    for (got, w) in [n.a, n.b, n.c, n.d, n.e, n.f].into_iter().zip(want) {
        assert!(close(got, w, 1e-12), "{got} vs {w}");
    }
}

#[test]
fn forward_reference_values() {
    let eps = 1.0 / (2.0 * PI);
    let t = single_layer_forward_tangential(q(eps, 1)).unwrap() / num_complex::Complex64::new(eps, 0.0);
    assert!(close(t[(0, 0)].re, 0.27099046923132669099, 1e-12));
    assert!(close(t[(0, 1)].im, 0.096435662025700550558, 1e-12));
    assert!(close(t[(1, 1)].re, 0.078119145179925589873, 1e-12));
    let n = single_layer_forward_normal(q(eps, 1)).unwrap() / num_complex::Complex64::new(eps, 0.0);
    assert!(close(n[(0, 0)].re, 0.2205680942365662607, 1e-12));
    assert!(close(n[(0, 1)].re, -0.13792177351407621906, 1e-12));
    assert!(close(n[(0, 2)].im, 0.018316516845774960685, 1e-12));
    assert!(close(n[(1, 1)].re, 0.29868723941649185057, 1e-12));
    assert!(close(n[(1, 2)].im, -0.078119145179925589873, 1e-12));
    assert!(close(n[(2, 2)].re, 0.2620542057249419292, 1e-12));
}

#[test]
fn composition_reference_values() {
    assert!(close(dtn_via_boundary_integral(Direction::Tangential, q(0.01, 5)).unwrap(), 5.8961085149059327855, 1e-12));
    assert!(close(dtn_via_boundary_integral(Direction::Normal, q(0.01, 5)).unwrap(), 6.8730295054891788796, 1e-12));
}

#[test]
fn angle_averaged_components() {
    let eps = 1.0 / (2.0 * PI);
    let t = angle_averaged(Direction::Tangential, q(eps, 1)).unwrap();
    assert_eq!(t.theta.value, 0.0);
    assert!(close(t.z.value, 2.0 * 6.5813878852893130103, 1e-12) && !t.z.imaginary);
    assert!(close(t.r.value, -2.0 * 8.1245192366607614262, 1e-12) && t.r.imaginary);
    let n = angle_averaged(Direction::Normal, q(eps, 1)).unwrap();
    let m = single_layer_inverse_normal(q(eps, 1)).unwrap();
    assert_eq!(n.r.value, m.a - m.b);
    assert_eq!(n.theta.value, m.b - m.d);
    assert!(n.z.imaginary);
}

#[test]
fn zero_mode_and_domain_errors() {
    assert!(matches!(dtn_eigen_normal(q(0.1, 0)), Err(Error::ZeroMode(_))));
    assert!(matches!(ntd_eigen(Direction::Tangential, q(0.1, 0)), Err(Error::ZeroMode(_))));
    assert!(matches!(angle_averaged(Direction::Normal, q(0.1, 0)), Err(Error::ZeroMode(_))));
    assert!(SymbolQuery::new(0.0, 1).is_err());
    assert!(double_layer_normal(-1.0).is_err());
    assert!(semigroup_factor(Direction::Normal, q(0.1, 2), -1.0).is_err());
}

#[test]
fn double_layer_small_z() {
    let t = double_layer_tangential(1e-6).unwrap();
    assert!(t.q_tf.abs() < 1e-5);
}

#[test]
fn large_mode_slopes() {
    let eps = 0.01;
    let (k1, k2) = ((4.0 / (2.0 * PI * eps)) as i64, (64.0 / (2.0 * PI * eps)) as i64);
    for d in [Direction::Tangential, Direction::Normal] {
        let s = (dtn_eigen(d, q(eps, k2)).unwrap() / dtn_eigen(d, q(eps, k1)).unwrap()).ln() / ((k2 as f64) / (k1 as f64)).ln();
        assert!((s - 1.0).abs() <= 0.05, "{d:?} dtn slope {s}");
        let s = (ntd_eigen(d, q(eps, k2)).unwrap() / ntd_eigen(d, q(eps, k1)).unwrap()).ln() / ((k2 as f64) / (k1 as f64)).ln();
        assert!((s + 1.0).abs() <= 0.05, "{d:?} ntd slope {s}");
    }
}

#[test]
fn low_mode_log_scaling() {
    let vals: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&e: &f64| dtn_eigen_normal(q(e, 1)).unwrap() * e.ln().abs()).collect();
    // bounded and comparable across four decades
    let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(lo > 1.0 && hi < 30.0 && hi / lo < 1.5, "{vals:?}");
}

#[test]
fn tangential_coupling_small_z() {
    // m_tA stays bounded while m_tB grows like 8/z.
    for i in 2..10 {
        let z = 10f64.powf(-0.5 * i as f64);
        let m = single_layer_inverse_tangential(q(z / (2.0 * PI), 1)).unwrap();
        assert!(m.a > 4.0 && m.a < 4.6, "m_tA({z}) = {}", m.a);
        assert!((z * m.b / 8.0 - 1.0).abs() < 0.01, "z m_tB({z}) = {}", z * m.b);
    }
}

#[test]
fn semigroup_regimes() {
    // Rate ∝ ε⁻¹|k|³ above |k| = 1/(2πε), ∝ |log ε| k⁴ below.
    let eps = 1e-3;
    let rate = |k: i64| {
        let r = (2.0 * PI * k as f64).powi(4) * ntd_eigen(Direction::Normal, q(eps, k)).unwrap();
        // the factor decays at exactly this rate
        let tau = 0.5 / r;
        assert!((semigroup_factor(Direction::Normal, q(eps, k), tau).unwrap().ln() + 0.5).abs() < 1e-14);
        r
    };
    let slope = |a: i64, b: i64| (rate(b) / rate(a)).ln() / (b as f64 / a as f64).ln();
    let hi = slope(2000, 32000);
    let lo = slope(1, 8);
    assert!((hi - 3.0).abs() < 0.1, "high-mode slope {hi}");
    assert!((lo - 4.0).abs() < 0.3, "low-mode slope {lo}");
}

#[test]
fn table_rows_and_symmetry() {
    let t = build_table(Family::DtnT, 0.01, 128).unwrap();
    assert_eq!(t.entries.len(), 257);
    for k in 1..=128 {
        assert_eq!(t.get(k), t.get(-k));
    }
    assert!(close(t.get(10).unwrap(), 9.6793348321552625408, 1e-12));
    assert!(build_table(Family::BiN, 0.01, 0).is_err());
}

proptest! {
    #[test]
    fn symbols_even_and_positive(le in -3.0f64..-0.7, k in 1i64..5000) {
        let eps = 10f64.powf(le);
        for d in [Direction::Tangential, Direction::Normal] {
            let a = dtn_eigen(d, q(eps, k)).unwrap();
            prop_assert!(a > 0.0);
            prop_assert_eq!(a, dtn_eigen(d, q(eps, -k)).unwrap());
            prop_assert!((ntd_eigen(d, q(eps, k)).unwrap() * a - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn forward_hermitian_positive(lz in -2.0f64..1.0) {
        let eps = 10f64.powf(lz) / (2.0 * PI);
        let t = single_layer_forward_tangential(q(eps, 1)).unwrap();
        let n = single_layer_forward_normal(q(eps, 1)).unwrap();
        prop_assert!((t - t.adjoint()).norm() <= 1e-15 * t.norm());
        prop_assert!((n - n.adjoint()).norm() <= 1e-15 * n.norm());
        // Hermitian positive definite: leading principal minors
        prop_assert!(t[(0, 0)].re > 0.0 && t.determinant().re > 0.0);
        let m2 = n[(0, 0)] * n[(1, 1)] - n[(0, 1)] * n[(1, 0)];
        prop_assert!(n[(0, 0)].re > 0.0 && m2.re > 0.0 && n.determinant().re > 0.0);
    }

    #[test]
    fn composition_matches_eigenvalue(lz in -2.0f64..1.0, normal in any::<bool>()) {
        let d = if normal { Direction::Normal } else { Direction::Tangential };
        let qq = q(10f64.powf(lz) / (2.0 * PI), 1);
        let a = dtn_eigen(d, qq).unwrap();
        prop_assert!((dtn_via_boundary_integral(d, qq).unwrap() - a).abs() <= 1e-10 * a);
    }

    #[test]
    fn semigroup_monotone(tau in 0.0f64..1e-4, k in 1i64..50) {
        let qa = q(0.01, k);
        let qb = q(0.01, k + 1);
        let a = semigroup_factor(Direction::Normal, qa, tau).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(semigroup_factor(Direction::Normal, qb, tau).unwrap() <= a);
        prop_assert!(semigroup_factor(Direction::Normal, qa, 2.0 * tau).unwrap() <= a);
    }
}
