use nalgebra::Vector3;
use proptest::prelude::*;
use sbf::fields::*;
use sbf::geometry::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

type V3 = Vector3<f64>;

fn tau() -> f64 {
    2.0 * PI
}

fn curved_frame(n: usize) -> FrameField {
    static CURVE: OnceLock<FourierCurve> = OnceLock::new();
    let c = CURVE.get_or_init(|| perturbed_circle(0.02, 0.05, 3, 0.1, 2, 32).unwrap());
    periodicized_frame(c, n).unwrap()
}

fn grid(eps: f64, ns: usize, nth: usize) -> SurfaceGrid {
    let c = FourierCurve::circle(eps);
    SurfaceGrid::new_unchecked(&c, &periodicized_frame(&c, ns).unwrap(), ns, nth).unwrap()
}

#[test]
fn spectral_derivative_is_exact_on_band_limited_data() {
    let f = PeriodicVectorField::from_fn(32, |s| V3::new((3.0 * tau() * s).cos(), (tau() * s).sin() + 2.0, (5.0 * tau() * s).sin()));
    let d = f.spectral_derivative(1).unwrap();
    for (i, v) in d.values.iter().enumerate() {
        let s = i as f64 / 32.0;
        let want = V3::new(-3.0 * tau() * (3.0 * tau() * s).sin(), tau() * (tau() * s).cos(), 5.0 * tau() * (5.0 * tau() * s).cos());
        assert!((v - want).norm() < 1e-12);
    }
    let d2 = f.spectral_derivative(2).unwrap();
    let dd = d.spectral_derivative(1).unwrap();
    for (a, b) in d2.values.iter().zip(&dd.values) {
        assert!((a - b).norm() < 1e-10);
    }
}

#[test]
fn phi_is_identity_on_straight_frame() {
    let fr = FrameField::straight(16);
    let g = PeriodicVectorField::from_fn(16, |s| V3::new(s, 1.0 - s, (tau() * s).sin()));
    let h = phi_forward(&fr, &g).unwrap();
    for (a, b) in g.values.iter().zip(&h.values) {
        assert!((a - b).norm() < 1e-15);
    }
}

#[test]
fn phi_round_trip_on_curved_frame() {
    let fr = curved_frame(64);
    let g = PeriodicVectorField::from_fn(64, |s| V3::new((tau() * s).cos(), 0.3, (2.0 * tau() * s).sin()));
    let h = phi_forward(&fr, &g).unwrap();
    let back = phi_inverse(&fr, &h).unwrap();
    for i in 0..64 {
        assert!((back.values[i] - g.values[i]).norm() < 1e-14);
        assert!((h.values[i].norm() - g.values[i].norm()).abs() < 1e-14);
    }
}

#[test]
fn phi_mean_subtraction() {
    let fr = curved_frame(64);
    let h = PeriodicVectorField::from_fn(64, |s| V3::new(1.0 + (tau() * s).cos(), -2.0, 0.5 + (3.0 * tau() * s).sin()));
    let (h0, mean) = subtract_phi_mean(&fr, &h).unwrap();
    assert!(phi_inverse(&fr, &h0).unwrap().mean().norm() < 1e-14);
    assert!((mean - phi_inverse(&fr, &h).unwrap().mean()).norm() < 1e-15);
    // subtracting twice changes nothing
    let (h00, m2) = subtract_phi_mean(&fr, &h0).unwrap();
    assert!(m2.norm() < 1e-14);
    for (a, b) in h0.values.iter().zip(&h00.values) {
        assert!((a - b).norm() < 1e-14);
    }
}

#[test]
fn p01_projection() {
    let g = grid(0.05, 16, 16);
    let local = |f: &dyn Fn(f64) -> [f64; 3]| {
        SurfaceField::from_fn(16, 16, |i, j| {
            let (er, eth, et) = g.local_basis(i, j);
            let c = f(g.theta(j));
            er * c[0] + eth * c[1] + et * c[2]
        })
    };
    // second harmonics vanish
    let w2 = local(&|t| [(2.0 * t).cos(), (2.0 * t).sin(), (3.0 * t).cos()]);
    assert!(project_p01(&w2, &g).unwrap().max_norm() < 1e-14);
    // constant e_θ (swirl) is dropped
    let swirl = local(&|_| [0.0, 1.0, 0.0]);
    assert!(project_p01(&swirl, &g).unwrap().max_norm() < 1e-14);
    // first harmonics and constants are kept
    let w1 = local(&|t| [1.0 + t.cos(), t.sin(), 2.0 - t.sin()]);
    let p = project_p01(&w1, &g).unwrap();
    for (a, b) in p.values.iter().zip(&w1.values) {
        assert!((a - b).norm() < 1e-14);
    }
    let mix = SurfaceField::from_fn(16, 16, |i, j| w1.at(i, j) + w2.at(i, j) + swirl.at(i, j));
    let p1 = project_p01(&mix, &g).unwrap();
    let p2 = project_p01(&p1, &g).unwrap();
    for (a, b) in p1.values.iter().zip(&p2.values) {
        assert!((a - b).norm() < 1e-14);
    }
}

#[test]
fn angle_average_of_simple_tractions() {
    let eps = 0.05;
    let g = grid(eps, 32, 16);
    let fr = &g.frame;
    let et = SurfaceField::from_fn(32, 16, |i, _| fr.e_t[i]);
    let f = angle_average_traction(&et, &g).unwrap();
    for i in 0..32 {
        assert!((f.values[i] - fr.e_t[i] * tau() * eps).norm() < 1e-14);
    }
    // ∫ e_r J dθ = −πε²(κ₁e_n1 + κ₂e_n2)
    let er = SurfaceField::from_fn(32, 16, |i, j| g.local_basis(i, j).0);
    let f = angle_average_traction(&er, &g).unwrap();
    for i in 0..32 {
        let want = -(fr.e_n1[i] * fr.kappa1[i] + fr.e_n2[i] * fr.kappa2[i]) * PI * eps * eps;
        assert!((f.values[i] - want).norm() < 1e-14);
    }
    assert!(angle_average_traction(&SurfaceField::zeros(16, 16), &g).is_err());
}

proptest! {
    #[test]
    fn phi_preserves_norms(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, k in 1usize..5) {
        static FRAME: OnceLock<FrameField> = OnceLock::new();
        let fr = FRAME.get_or_init(|| curved_frame(32));
        let g = PeriodicVectorField::from_fn(32, |s| V3::new(a * (k as f64 * tau() * s).cos(), b, c * (tau() * s).sin()));
        let h = phi_forward(fr, &g).unwrap();
        for i in 0..32 {
            prop_assert!((h.values[i].norm() - g.values[i].norm()).abs() <= 1e-13);
        }
        let back = phi_inverse(fr, &h).unwrap();
        for i in 0..32 {
            prop_assert!((back.values[i] - g.values[i]).norm() <= 1e-13);
        }
    }

    #[test]
    fn spectral_round_trip(vals in proptest::collection::vec(-1.0f64..1.0, 48)) {
        let f = PeriodicVectorField::new(vals.chunks(3).map(|c| V3::new(c[0], c[1], c[2])).collect());
        let g = PeriodicVectorField::from_spectrum(&f.spectrum());
        for (a, b) in f.values.iter().zip(&g.values) {
            prop_assert!((a - b).norm() <= 1e-14);
        }
    }
}
