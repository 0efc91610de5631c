use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use sbf::fields::SurfaceField;
use sbf::geometry::*;
use sbf::layers::*;
use std::f64::consts::PI;

type V3 = Vector3<f64>;
type M3 = Matrix3<f64>;

fn v3() -> impl Strategy<Value = V3> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b, c)| V3::new(a, b, c))
}

fn unit() -> impl Strategy<Value = V3> {
    v3().prop_filter("nonzero", |v| v.norm() > 0.1).prop_map(|v| v.normalize())
}

/// Velocity and pressure of one double-layer source at the origin.
fn dl_flow(x: &V3, n_src: &V3, psi: &V3) -> (V3, f64) {
    (stresslet_r(x, n_src) * psi, pressure_kernel_r(x, n_src).dot(psi))
}

#[test]
fn stokeslet_on_axis() {
    let g = stokeslet(&V3::new(0.0, 0.0, 2.0), &V3::zeros()).unwrap();
    let want = M3::from_diagonal(&V3::new(1.0, 1.0, 2.0)) / (16.0 * PI);
    assert!((g - want).norm() < 1e-15);
    assert!(stokeslet(&V3::x(), &V3::x()).is_err());
}

#[test]
fn hypersingular_kernel_is_the_stress_of_the_double_layer() {
    let n_src = V3::new(0.3, -0.5, 0.8).normalize();
    let n = V3::new(-0.2, 0.9, 0.1).normalize();
    let psi = V3::new(0.7, 0.2, -1.1);
    let x = V3::new(0.4, 0.3, -0.6);
    let h = 1e-5;
    let mut grad = M3::zeros();
    for k in 0..3 {
        let mut e = V3::zeros();
        e[k] = h;
        let d = (dl_flow(&(x + e), &n_src, &psi).0 - dl_flow(&(x - e), &n_src, &psi).0) / (2.0 * h);
        grad.set_column(k, &d);
    }
    let p = dl_flow(&x, &n_src, &psi).1;
    let traction = (-M3::identity() * p + grad + grad.transpose()) * n;
    let k = hypersingular_kernel(&x, &V3::zeros(), &n, &n_src).unwrap() * psi;
    assert!((k - traction).norm() < 1e-7 * traction.norm(), "{k} vs {traction}");
}

#[test]
fn double_layer_pressure_is_harmonic_and_divergence_free() {
    let n_src = V3::new(0.1, 0.2, 0.9).normalize();
    let psi = V3::new(1.0, -0.4, 0.3);
    let x = V3::new(0.5, -0.2, 0.3);
    let h = 1e-4;
    let mut div = 0.0;
    let mut lap = 0.0;
    for k in 0..3 {
        let mut e = V3::zeros();
        e[k] = h;
        let (up, pp) = dl_flow(&(x + e), &n_src, &psi);
        let (um, pm) = dl_flow(&(x - e), &n_src, &psi);
        div += (up[k] - um[k]) / (2.0 * h);
        lap += (pp + pm - 2.0 * dl_flow(&x, &n_src, &psi).1) / (h * h);
    }
    assert!(div.abs() < 1e-6, "{div}");
    assert!(lap.abs() < 1e-3, "{lap}");
}

#[test]
fn theta_identity_example() {
    let (lhs, rhs) = bessel_theta_identity(1, 2.0).unwrap();
    assert!((lhs - rhs).abs() < 1e-12);
    assert!(bessel_theta_identity(7, 1.0).is_err());
}

#[test]
fn exterior_limit_of_double_layer() {
    // Off-surface values along the normal extrapolate to the principal value plus ½ψ.
    let eps = 0.1;
    let (ns, nth) = (256, 64);
    let surf = Surface::straight_tube(eps, ns, nth, 8).unwrap();
    let psi = SurfaceField::from_fn(ns, nth, |i, _| V3::new((2.0 * PI * i as f64 / ns as f64).cos(), 0.0, 0.5));
    let i = 3;
    let ext = double_layer_apply(&surf, &psi, &[i], Side::ExteriorLimit).unwrap()[0];
    let pv = double_layer_apply(&surf, &psi, &[i], Side::OnSurface).unwrap()[0];
    assert!((ext - pv - psi.values[i] * 0.5).norm() < 1e-15);
    let x = surf.grid.nodes[i];
    let n = surf.grid.normals[i];
    let at = |h: f64| double_layer_at(&surf, &psi, &(x + n * h)).unwrap();
    let extrap = at(0.2 * eps) * 2.0 - at(0.4 * eps);
    assert!((extrap - ext).norm() < 1e-2 * psi.values[i].norm(), "{extrap} vs {ext}");
}

#[test]
fn layers_decay_in_the_far_field() {
    let c = FourierCurve::circle(0.02);
    let surf = Surface::closed(&c, &periodicized_frame(&c, 32).unwrap(), 32, 8, false).unwrap();
    let phi = SurfaceField::from_fn(32, 8, |i, _| V3::new(1.0, 0.5 * (i as f64).sin(), 0.2));
    let dir = V3::new(0.3, 0.4, 1.0).normalize();
    let sl = |d: f64| single_layer_at(&surf, &phi, &(dir * d)).unwrap().norm();
    let dl = |d: f64| double_layer_at(&surf, &phi, &(dir * d)).unwrap().norm();
    assert!((sl(100.0) / sl(200.0) - 2.0).abs() < 0.02);
    assert!((dl(100.0) / dl(200.0) - 4.0).abs() < 0.05);
}

#[test]
fn straight_tube_constant_double_layer() {
    let surf = Surface::straight_tube(0.1, 16, 8, 4).unwrap();
    let psi = SurfaceField::from_fn(16, 8, |_, _| V3::z());
    let d = double_layer_apply(&surf, &psi, &[0, 17, 100], Side::OnSurface).unwrap();
    for v in d {
        assert!((v + V3::z() * 0.5).norm() < 1e-3, "{v}");
    }
}

#[test]
fn on_surface_operators_are_linear() {
    let c = perturbed_circle(0.02, 0.05, 3, 0.0, 0, 8).unwrap();
    let surf = Surface::closed(&c, &periodicized_frame(&c, 32).unwrap(), 32, 8, false).unwrap();
    let a = SurfaceField::from_fn(32, 8, |i, j| V3::new(i as f64, j as f64, 1.0) * 0.1);
    let b = SurfaceField::from_fn(32, 8, |i, j| V3::new((i * j) as f64 % 3.0, -1.0, 0.5));
    let mix = SurfaceField::from_fn(32, 8, |i, j| a.at(i, j) * 2.0 - b.at(i, j) * 0.5);
    let targets: Vec<usize> = (0..surf.len()).step_by(7).collect();
    let s = |f: &SurfaceField| single_layer_apply(&surf, f, &targets).unwrap();
    let d = |f: &SurfaceField| double_layer_apply(&surf, f, &targets, Side::OnSurface).unwrap();
    for (op, name) in [(&s as &dyn Fn(&SurfaceField) -> Vec<V3>, "S"), (&d, "D")] {
        let (ra, rb, rm) = (op(&a), op(&b), op(&mix));
        for k in 0..targets.len() {
            let want = ra[k] * 2.0 - rb[k] * 0.5;
            assert!((rm[k] - want).norm() <= 1e-12 * want.norm().max(1.0), "{name}");
        }
    }
    let t = hypersingular_traction(&surf, &mix).unwrap();
    let (ta, tb) = (hypersingular_traction(&surf, &a).unwrap(), hypersingular_traction(&surf, &b).unwrap());
    for k in 0..surf.len() {
        let want = ta.values[k] * 2.0 - tb.values[k] * 0.5;
        assert!((t.values[k] - want).norm() <= 1e-10 * want.norm().max(1.0));
    }
}

#[test]
fn symbol_errors_shrink_on_refinement() {
    let coarse = symbol_errors(0.05, 2, 64, 8, 16).unwrap();
    let fine = symbol_errors(0.05, 2, 128, 16, 16).unwrap();
    assert!(fine.max() < coarse.max(), "{coarse:?} {fine:?}");
    assert!(fine.max() < 0.05);
}

#[test]
fn grid_mismatch_rejected() {
    let surf = Surface::straight_tube(0.1, 8, 4, 2).unwrap();
    assert!(single_layer_apply(&surf, &SurfaceField::zeros(8, 8), &[0]).is_err());
}

proptest! {
    #[test]
    fn stokeslet_symmetric_and_homogeneous(x in v3(), y in v3(), a in 0.1f64..10.0) {
        prop_assume!((x - y).norm() > 1e-3);
        let g = stokeslet(&x, &y).unwrap();
        prop_assert!((g - g.transpose()).norm() <= 1e-14 * g.norm());
        prop_assert!((g - stokeslet(&y, &x).unwrap()).norm() <= 1e-14 * g.norm());
        let ga = stokeslet(&(x * a), &(y * a)).unwrap();
        prop_assert!((ga * a - g).norm() <= 1e-12 * g.norm());
        let shift = V3::new(3.0, -2.0, 1.0);
        prop_assert!((stokeslet(&(x + shift), &(y + shift)).unwrap() - g).norm() <= 1e-12 * g.norm());
    }

    #[test]
    fn stresslet_is_rank_one(x in v3(), y in v3(), n in unit()) {
        prop_assume!((x - y).norm() > 1e-2);
        let t = stresslet(&x, &y, &n).unwrap();
        let r = (x - y).normalize();
        prop_assert!((t - t.transpose()).norm() <= 1e-14 * t.norm().max(1e-300));
        // every column is parallel to R
        prop_assert!((t - r * (r.transpose() * t)).norm() <= 1e-12 * t.norm().max(1e-300));
        let s = t.singular_values();
        prop_assert!(s.iter().filter(|&&v| v > 1e-12 * s.max()).count() <= 1);
    }

    #[test]
    fn rotlet_antisymmetric(x in v3(), y in v3()) {
        let d = (x - y).norm();
        prop_assume!(d > 1e-2);
        let l = rotlet(&x, &y).unwrap();
        prop_assert!((l + rotlet(&y, &x).unwrap()).norm() <= 1e-14 * l.norm());
        prop_assert!((l.norm() - 1.0 / (d * d)).abs() <= 1e-12 / (d * d));
    }

    #[test]
    fn hypersingular_degree_minus_three(x in v3(), n in unit(), m in unit(), a in 0.2f64..5.0) {
        prop_assume!(x.norm() > 1e-2);
        let k = hypersingular_r(&x, &n, &m);
        let ka = hypersingular_r(&(x * a), &n, &m);
        prop_assert!((ka * a.powi(3) - k).norm() <= 1e-12 * k.norm());
    }
}
