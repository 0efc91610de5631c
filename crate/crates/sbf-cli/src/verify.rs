//! Verification suites behind `sbf verify`.

use crate::args::Suite;
use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use sbf::geometry::{
    compute_length, max_curvature, min_separation, periodicized_frame, perturbed_circle, FourierCurve, SurfaceGrid,
};
use sbf::layers::{bessel_theta_identity, null_integrals, symbol_errors, Surface};
use sbf::multipliers::{
    compose_normal, compose_tangential, double_layer_normal, double_layer_tangential, dtn_eigen, ntd_eigen,
    single_layer_forward_normal, single_layer_forward_tangential, single_layer_inverse_normal,
    single_layer_inverse_tangential, Direction, DoubleLayerNormal, DoubleLayerTangential, SlInverseNormal,
    SlInverseTangential, SymbolQuery,
};
use sbf::specfun::{bessel_i, bessel_k, ratio, ratio_derivative, BesselSet, RatioKind};
use serde::Serialize;
use std::f64::consts::PI;

type V3 = Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub measured: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// The symbol pieces the `symbols` suite recombines. Swapping one for a
/// faulty version must make the suite fail.
#[derive(Clone, Copy)]
pub struct SymbolSource {
    pub double_layer_tangential: fn(f64) -> sbf::Result<DoubleLayerTangential>,
    pub double_layer_normal: fn(f64) -> sbf::Result<DoubleLayerNormal>,
    pub inverse_tangential: fn(SymbolQuery) -> sbf::Result<SlInverseTangential>,
    pub inverse_normal: fn(SymbolQuery) -> sbf::Result<SlInverseNormal>,
}

impl Default for SymbolSource {
    fn default() -> Self {
        SymbolSource {
            double_layer_tangential,
            double_layer_normal,
            inverse_tangential: single_layer_inverse_tangential,
            inverse_normal: single_layer_inverse_normal,
        }
    }
}

/// `measured ≤ bound` passes.
fn at_most(name: &str, measured: sbf::Result<f64>, bound: f64) -> Check {
    let measured = measured.unwrap_or(f64::NAN);
    let ok = measured <= bound;
    Check { name: name.into(), status: if ok { Status::Pass } else { Status::Fail }, measured, bound }
}

/// `measured ≥ bound` passes.
fn at_least(name: &str, measured: sbf::Result<f64>, bound: f64) -> Check {
    let measured = measured.unwrap_or(f64::NAN);
    let ok = measured >= bound;
    Check { name: name.into(), status: if ok { Status::Pass } else { Status::Fail }, measured, bound }
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Largest value of `f` over `xs`, propagating the first error.
fn worst(xs: &[f64], f: impl Fn(f64) -> sbf::Result<f64>) -> sbf::Result<f64> {
    xs.iter().try_fold(0.0f64, |m, &x| Ok(m.max(f(x)?)))
}

/// Count of sample points where `ok` fails.
fn violations(xs: &[f64], ok: impl Fn(f64) -> sbf::Result<bool>) -> sbf::Result<f64> {
    xs.iter().try_fold(0.0, |n, &x| Ok(if ok(x)? { n } else { n + 1.0 }))
}

pub fn bessel() -> Vec<Check> {
    let wide = logspace(1e-3, 50.0, 200);
    let large = logspace(1.0, 40.0, 200);
    vec![
        at_most(
            "wronskian",
            worst(&wide, |z| Ok((z * (bessel_k(1, z)? * bessel_i(0, z)? + bessel_k(0, z)? * bessel_i(1, z)?) - 1.0).abs())),
            1e-12,
        ),
        at_most(
            "recurrence K2 = K0 + 2K1/z",
            worst(&wide, |z| {
                let s = BesselSet::new(z)?;
                Ok((s.k2 - s.k0 - 2.0 * s.k1 / z).abs() / s.k2)
            }),
            1e-12,
        ),
        at_most(
            "K1/K0 two-sided bound, z in [1, 40] (violations)",
            violations(&large, |z| {
                let a = ratio(RatioKind::K1K0, z)? - 1.0 - 1.0 / (2.0 * z) + 1.0 / (8.0 * z * z);
                Ok(a > 0.0 && a <= 1.0 / (8.0 * z.powi(3)))
            }),
            0.0,
        ),
        at_most(
            "K0/K1 two-sided bound, z in [1, 40] (violations)",
            violations(&large, |z| {
                let b = ratio(RatioKind::K0K1, z)? - 1.0 + 1.0 / (2.0 * z) - 3.0 / (8.0 * z * z);
                Ok(b < 0.0 && b >= -4.0 / (11.0 * z.powi(3)))
            }),
            0.0,
        ),
        at_most(
            "0 <= K1/K0 - K0/K1 <= 1/z (violations)",
            violations(&wide, |z| {
                let d = ratio(RatioKind::K1K0, z)? - ratio(RatioKind::K0K1, z)?;
                Ok(d >= 0.0 && d <= 1.0 / z)
            }),
            0.0,
        ),
        at_most(
            "1 <= z(I0/I1 - I1/I0) < 2 for z >= 0.1 (violations)",
            violations(&logspace(0.1, 50.0, 200), |z| {
                let w = z * (ratio(RatioKind::I0I1, z)? - ratio(RatioKind::I1I0, z)?);
                Ok((1.0..2.0).contains(&w))
            }),
            0.0,
        ),
        at_most(
            "ratio derivatives vs central differences",
            worst(&logspace(0.05, 20.0, 100), |z| {
                let h = 1e-6;
                RatioKind::ALL.iter().try_fold(0.0f64, |m, &k| {
                    let fd = (ratio(k, z + h)? - ratio(k, z - h)?) / (2.0 * h);
                    let d = ratio_derivative(k, z)?;
                    Ok(m.max((fd - d).abs() / d.abs().max(1.0)))
                })
            }),
            1e-6,
        ),
    ]
}

fn query(z: f64) -> sbf::Result<SymbolQuery> {
    SymbolQuery::new(z / (2.0 * PI), 1)
}

pub fn symbols(src: &SymbolSource) -> Vec<Check> {
    let zs = logspace(0.01, 10.0, 50);
    let composition = |d: Direction| {
        worst(&zs, move |z| {
            let q = query(z)?;
            let bi = match d {
                Direction::Tangential => compose_tangential(&(src.inverse_tangential)(q)?, &(src.double_layer_tangential)(z)?),
                Direction::Normal => compose_normal(&(src.inverse_normal)(q)?, &(src.double_layer_normal)(z)?),
            };
            let m = dtn_eigen(d, q)?;
            Ok((bi - m).abs() / m)
        })
    };
    vec![
        at_most("tangential composition vs DtN eigenvalue", composition(Direction::Tangential), 1e-10),
        at_most("normal composition vs DtN eigenvalue", composition(Direction::Normal), 1e-10),
        at_most(
            "tangential forward times inverse",
            worst(&zs, |z| {
                let q = query(z)?;
                let p = single_layer_forward_tangential(q)? * (src.inverse_tangential)(q)?.matrix() / Complex64::new(q.eps, 0.0);
                Ok((p - Matrix2::identity()).norm())
            }),
            1e-10,
        ),
        at_most(
            "normal forward times inverse",
            worst(&zs, |z| {
                let q = query(z)?;
                let p = single_layer_forward_normal(q)? * (src.inverse_normal)(q)?.matrix() / Complex64::new(q.eps, 0.0);
                Ok((p - Matrix3::identity()).norm())
            }),
            1e-10,
        ),
        at_most(
            "NtD times DtN eigenvalue",
            worst(&zs, |z| {
                let q = query(z)?;
                let t = ntd_eigen(Direction::Tangential, q)? * dtn_eigen(Direction::Tangential, q)?;
                let n = ntd_eigen(Direction::Normal, q)? * dtn_eigen(Direction::Normal, q)?;
                Ok((t - 1.0).abs().max((n - 1.0).abs()))
            }),
            1e-14,
        ),
    ]
}

pub fn quadrature() -> Vec<Check> {
    let coarse = symbol_errors(0.05, 4, 256, 32, 32);
    let fine = symbol_errors(0.05, 4, 512, 64, 32);
    let ratio = match (&coarse, &fine) {
        (Ok(c), Ok(f)) => Ok([
            c.single_t / f.single_t,
            c.double_t / f.double_t,
            c.single_n / f.single_n,
            c.double_n / f.double_n,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)),
        (Err(e), _) | (_, Err(e)) => Err(sbf::Error::Integration(e.to_string())),
    };
    vec![
        at_most("layer symbols at 256x32, eps 0.05, k <= 4", coarse.map(|e| e.max()), 1e-3),
        at_least("error ratio under one grid doubling (min)", ratio, 2.0),
    ]
}

pub fn identities() -> Vec<Check> {
    let mut checks: Vec<Check> = (1..=6)
        .map(|i| {
            at_most(
                &format!("theta identity {i}"),
                [0.5, 2.0, 10.0].iter().try_fold(0.0f64, |m, &z| {
                    let (l, r) = bessel_theta_identity(i, z)?;
                    Ok(m.max((l - r).abs() / r.abs().max(1.0)))
                }),
                1e-8,
            )
        })
        .collect();
    checks.push(at_most("stresslet and pressure null integrals", null_identity_residual(), 1e-6));
    checks
}

/// Largest exterior integral of the stresslet and pressure kernels over a
/// perturbed loop with ε = 0.05 at 128x32.
fn null_identity_residual() -> sbf::Result<f64> {
    let eps = 0.05;
    let c = perturbed_circle(eps, 0.05, 3, 0.02, 2, 8)?;
    let surf = Surface::closed(&c, &periodicized_frame(&c, 128)?, 128, 32, false)?;
    let c0 = c.coeff(0).map(|z| z.re);
    let centroid = V3::new(c0[0], c0[1], c0[2]);
    let mut ys = vec![centroid, centroid + V3::new(0.0, 0.0, 0.5), V3::new(1.0, -0.5, 0.2)];
    for (s, d) in [(0.1, 2.0), (0.37, 3.0), (0.62, 5.0), (0.9, 10.0)] {
        let x = c.point(s);
        let t = c.eval(s).d[0].normalize();
        let r = x - centroid;
        let out = (r - t * r.dot(&t)).normalize();
        ys.push(x + out * d * eps);
        ys.push(x + t.cross(&out) * d * eps);
    }
    Ok(ys.iter().fold(0.0, |m, y| {
        let (kd, pd) = null_integrals(&surf, y);
        m.max(kd.norm()).max(pd.norm())
    }))
}

pub fn geometry() -> Vec<Check> {
    let circle = FourierCurve::circle(0.05);
    let planar = || periodicized_frame(&circle, 64);
    let bent = || perturbed_circle(0.01, 0.1, 3, 0.3, 2, 16).and_then(|c| periodicized_frame(&c, 256));
    vec![
        at_most("circle length", Ok((compute_length(&circle) - 1.0).abs()), 1e-12),
        at_most("circle chord-arc constant 2/pi", Ok((min_separation(&circle).star - 2.0 / PI).abs()), 1e-9),
        at_most("circle maximum curvature 2pi", Ok((max_curvature(&circle) - 2.0 * PI).abs()), 1e-8),
        at_most("planar circle kappa3", planar().map(|f| f.kappa3.abs()), 1e-8),
        at_most(
            "planar circle kappa1 = 2pi",
            planar().map(|f| f.kappa1.iter().fold(0.0f64, |m, k| m.max((k - 2.0 * PI).abs()))),
            1e-8,
        ),
        at_most(
            "circle surface area 2 pi eps",
            planar()
                .and_then(|f| SurfaceGrid::new_unchecked(&circle, &f, 64, 16))
                .map(|g| (g.total_area() - 2.0 * PI * 0.05).abs()),
            1e-12,
        ),
        at_most("frame ODE residual, perturbed loop", bent().and_then(|f| f.ode_residual()), 1e-6),
        at_most("|kappa3| <= pi, perturbed loop", bent().map(|f| f.kappa3.abs()), PI),
    ]
}

pub fn run_suite(suite: Suite, src: &SymbolSource) -> Report {
    let parts: Vec<(Suite, Vec<Check>)> = match suite {
        Suite::Bessel => vec![(suite, bessel())],
        Suite::Symbols => vec![(suite, symbols(src))],
        Suite::Quadrature => vec![(suite, quadrature())],
        Suite::Identities => vec![(suite, identities())],
        Suite::Geometry => vec![(suite, geometry())],
        Suite::All => vec![
            (Suite::Bessel, bessel()),
            (Suite::Symbols, symbols(src)),
            (Suite::Quadrature, quadrature()),
            (Suite::Identities, identities()),
            (Suite::Geometry, geometry()),
        ],
    };
    let prefix = suite == Suite::All;
    let checks: Vec<Check> = parts
        .into_iter()
        .flat_map(|(s, cs)| {
            cs.into_iter().map(move |mut c| {
                if prefix {
                    c.name = format!("{}/{}", s.name(), c.name);
                }
                c
            })
        })
        .collect();
    let pass = checks.iter().all(|c| c.status == Status::Pass);
    Report { suite: suite.name().into(), checks, pass }
}
