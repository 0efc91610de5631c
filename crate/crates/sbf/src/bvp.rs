//! Static Dirichlet-to-Neumann and Neumann-to-Dirichlet solves.
//!
//! On the straight cylinder both maps are Fourier multipliers. On a curved
//! filament the single-layer equation `S[w] = (½I − D)[v]` is assembled
//! densely; eliminating `w` gives the discrete DtN matrix on the `3Ns`
//! centerline unknowns, which is what `ntd_curved` inverts.

use crate::error::{Error, Result};
use crate::fields::{angle_average_traction, phi_forward, phi_inverse, PeriodicVectorField, SurfaceField, V3};
use crate::geometry::{FourierCurve, FrameField};
use crate::layers::{self, Surface};
use crate::multipliers::{dtn_eigen, Direction, SymbolQuery};
use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// How the `k = 0` mode is treated by the straight-cylinder maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZeroModePolicy {
    /// Nonzero means are an error.
    Reject,
    /// The mean is multiplied by the `k = ±1` value.
    NearestMode,
}

const MEAN_TOL: f64 = 1e-12;
/// Largest accepted relative residual of a direct solve.
const RESIDUAL_TOL: f64 = 1e-10;

fn straight_apply(eps: f64, v: &PeriodicVectorField, policy: ZeroModePolicy, invert: bool) -> Result<PeriodicVectorField> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let mean = v.mean();
    if policy == ZeroModePolicy::Reject && mean.norm() > MEAN_TOL * (1.0 + v.max_norm()) {
        return Err(Error::ZeroMode(format!("field mean {:.3e} is not zero", mean.norm())));
    }
    let n = v.n();
    let mut table = Vec::with_capacity(n / 2 + 1);
    for k in 0..=(n / 2) as i64 {
        let q = SymbolQuery::new(eps, k.max(1))?;
        let t = dtn_eigen(Direction::Tangential, q)?;
        let nn = dtn_eigen(Direction::Normal, q)?;
        table.push(if invert { (1.0 / t, 1.0 / nn) } else { (t, nn) });
    }
    Ok(v.apply_multiplier(|k| {
        let (t, nn) = table[k.unsigned_abs() as usize];
        [Complex64::new(nn, 0.0), Complex64::new(nn, 0.0), Complex64::new(t, 0.0)]
    }))
}

/// Straight-cylinder DtN map: `z` by `m_t⁻¹(k)`, `x` and `y` by `m_n⁻¹(k)`.
pub fn dtn_straight(eps: f64, v: &PeriodicVectorField, policy: ZeroModePolicy) -> Result<PeriodicVectorField> {
    straight_apply(eps, v, policy, false)
}

/// Straight-cylinder NtD map, the reciprocal multipliers.
pub fn ntd_straight(eps: f64, f: &PeriodicVectorField, policy: ZeroModePolicy) -> Result<PeriodicVectorField> {
    straight_apply(eps, f, policy, true)
}

/// Solver settings for the curved problems.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BvpConfig {
    /// Regularization weight relative to the mean diagonal of `S`.
    pub eta_rel: f64,
    /// Largest admissible `Ns · Nθ`.
    pub max_nodes: usize,
}

impl Default for BvpConfig {
    fn default() -> Self {
        BvpConfig { eta_rel: 1.0, max_nodes: 16384 }
    }
}

/// Solver metadata reported alongside results.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub ns: usize,
    pub nth: usize,
    pub eta: f64,
    /// Relative residual of the factorized single-layer solve.
    pub residual: f64,
    /// Asymmetry `‖S − Sᵀ‖/‖S‖` of the assembled block.
    pub asymmetry: f64,
}

/// Assembled and factorized curved DtN system.
pub struct DtnSystem {
    pub surface: Surface,
    pub report: SolveReport,
    /// `(½I − D)` applied to θ-independent fields, `3N × 3Ns`.
    rhs_map: Mat<f64>,
    /// `S⁻¹(½I − D)L`, the surface traction per centerline datum.
    traction: Mat<f64>,
    /// Angle average of `traction`, the discrete DtN matrix.
    dtn: Mat<f64>,
    dtn_lu: PartialPivLu<f64>,
}

fn flat(v: &[V3]) -> Mat<f64> {
    Mat::from_fn(3 * v.len(), 1, |i, _| v[i / 3][i % 3])
}

fn unflat(d: &Mat<f64>) -> Vec<V3> {
    (0..d.nrows() / 3).map(|i| V3::new(d[(3 * i, 0)], d[(3 * i + 1, 0)], d[(3 * i + 2, 0)])).collect()
}

fn rel_residual(a: &Mat<f64>, x: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let r = a * x - b;
    r.norm_l2() / b.norm_l2().max(f64::MIN_POSITIVE)
}

/// Add `η n_i Σ_j (n_j·w_j) a_j / A` to `s`.
fn add_normal_projector(s: &mut Mat<f64>, surf: &Surface, eta: f64) {
    let g = &surf.grid;
    let area: f64 = g.weights.iter().sum();
    let n = g.len();
    for j in 0..n {
        let c = eta * g.weights[j] / area;
        for b in 0..3 {
            let nb = g.normals[j][b] * c;
            for i in 0..n {
                for a in 0..3 {
                    s[(3 * i + a, 3 * j + b)] += g.normals[i][a] * nb;
                }
            }
        }
    }
}

/// `(½I − D)L` where `L` replicates a centerline value across θ.
fn rhs_matrix(surf: &Surface) -> Mat<f64> {
    let g = &surf.grid;
    let (n, nth) = (g.len(), g.nth);
    let d = layers::double_layer_matrix(surf);
    let mut out = Mat::zeros(3 * n, 3 * g.ns);
    for j in 0..n {
        let col = j / nth;
        for b in 0..3 {
            for i in 0..3 * n {
                out[(i, 3 * col + b)] -= d[(i, 3 * j + b)];
            }
        }
    }
    for i in 0..3 * n {
        out[(i, 3 * (i / 3 / nth) + i % 3)] += 0.5;
    }
    out
}

/// Angle-average matrix `3Ns × 3N`.
fn average_matrix(surf: &Surface) -> Mat<f64> {
    let g = &surf.grid;
    let dth = 2.0 * PI / g.nth as f64;
    let mut a = Mat::zeros(3 * g.ns, 3 * g.len());
    for j in 0..g.len() {
        for c in 0..3 {
            a[(3 * (j / g.nth) + c, 3 * j + c)] = g.jacobian[j] * dth;
        }
    }
    a
}

/// Assemble `S` (regularized by the normal projector), `(½I − D)`, and
/// eliminate the surface traction.
pub fn assemble_dtn_system(surface: Surface, cfg: BvpConfig) -> Result<DtnSystem> {
    let g = &surface.grid;
    let n = g.len();
    if n > cfg.max_nodes {
        return Err(Error::TooLarge(format!("{n} surface nodes exceed the cap {}", cfg.max_nodes)));
    }
    let mut s = layers::single_layer_matrix(&surface);
    let asymmetry = {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..3 * n {
            for j in 0..i {
                let (a, b) = (s[(i, j)], s[(j, i)]);
                num += (a - b) * (a - b);
                den += a * a + b * b;
            }
        }
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    };
    let trace: f64 = (0..3 * n).map(|i| s[(i, i)]).sum();
    let eta = cfg.eta_rel * trace / (3 * n) as f64;
    add_normal_projector(&mut s, &surface, eta);
    let rhs_map = rhs_matrix(&surface);
    let traction = s.partial_piv_lu().solve(&rhs_map);
    let residual = rel_residual(&s, &traction, &rhs_map);
    drop(s);
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::LinearAlgebra { msg: "single-layer solve inaccurate".into(), residual });
    }
    let dtn = average_matrix(&surface) * &traction;
    let dtn_lu = dtn.partial_piv_lu();
    let report = SolveReport { ns: g.ns, nth: g.nth, eta, residual, asymmetry };
    Ok(DtnSystem { surface, report, rhs_map, traction, dtn, dtn_lu })
}

impl DtnSystem {
    /// Discrete DtN matrix on `3Ns` centerline values (node-major).
    pub fn dtn_matrix(&self) -> &Mat<f64> {
        &self.dtn
    }

    /// `(½I − D)[v]` on the surface.
    pub fn dirichlet_rhs(&self, v: &PeriodicVectorField) -> Result<SurfaceField> {
        self.check(v)?;
        let r = &self.rhs_map * flat(&v.values);
        Ok(SurfaceField { ns: self.surface.grid.ns, nth: self.surface.grid.nth, values: unflat(&r) })
    }

    fn check(&self, v: &PeriodicVectorField) -> Result<()> {
        if v.n() != self.surface.grid.ns {
            return Err(Error::GridMismatch(format!("field has {} samples, grid {}", v.n(), self.surface.grid.ns)));
        }
        Ok(())
    }
}

/// Solve `S[w] = (½I − D)[v]` and return `(f, w)` with `f` the angle average.
pub fn dtn_curved(sys: &DtnSystem, v: &PeriodicVectorField) -> Result<(PeriodicVectorField, SurfaceField)> {
    sys.check(v)?;
    let w = &sys.traction * flat(&v.values);
    let g = &sys.surface.grid;
    let w = SurfaceField { ns: g.ns, nth: g.nth, values: unflat(&w) };
    let f = angle_average_traction(&w, g)?;
    Ok((f, w))
}

/// Find θ-independent `v` whose traction averages to `f`; returns `(v, w)`.
pub fn ntd_curved(sys: &DtnSystem, f: &PeriodicVectorField) -> Result<(PeriodicVectorField, SurfaceField)> {
    sys.check(f)?;
    let rhs = flat(&f.values);
    let mut v = sys.dtn_lu.solve(&rhs);
    let mut residual = rel_residual(&sys.dtn, &v, &rhs);
    if !(residual <= RESIDUAL_TOL) {
        // Rank-deficient: Tikhonov-regularized normal equations.
        eprintln!("warning: NtD matrix ill-conditioned (residual {residual:.2e}), using least squares");
        let at = sys.dtn.transpose().to_owned();
        let mut ata = &at * &sys.dtn;
        let tau = 1e-12 * ata.norm_l2();
        for i in 0..ata.nrows() {
            ata[(i, i)] += tau;
        }
        v = ata.partial_piv_lu().solve(&(&at * &rhs));
        residual = rel_residual(&sys.dtn, &v, &rhs);
        if !residual.is_finite() {
            return Err(Error::LinearAlgebra { msg: "NtD solve failed".into(), residual });
        }
    }
    let w = &sys.traction * &v;
    let g = &sys.surface.grid;
    Ok((PeriodicVectorField::new(unflat(&v)), SurfaceField { ns: g.ns, nth: g.nth, values: unflat(&w) }))
}

/// Main-term prediction `Φ dtnStraight Φ⁻¹ v₀^Φ` plus the mean term reported
/// separately.
pub fn decomposition_prediction(frame: &FrameField, eps: f64, v: &PeriodicVectorField) -> Result<(PeriodicVectorField, V3)> {
    let g = phi_inverse(frame, v)?;
    let mean = g.mean();
    let g0 = g.map(|x| x - mean);
    let f = dtn_straight(eps, &g0, ZeroModePolicy::NearestMode)?;
    Ok((phi_forward(frame, &f)?, mean))
}

/// One row of a decomposition study.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionRow {
    pub eps: f64,
    pub ns: usize,
    pub nth: usize,
    /// `‖dtnCurved(v) − Φ dtnStraight Φ⁻¹ v₀^Φ‖_∞`.
    pub error: f64,
    /// `‖Φ dtnStraight Φ⁻¹ v₀^Φ‖_∞` for scale.
    pub reference: f64,
    /// Norm of the frame mean of `v`.
    pub mean: f64,
    /// `e(previous ε) / e(ε)`.
    pub ratio: Option<f64>,
}

/// Sweep `ε` over a fixed centerline shape with `v = Φ[g]` for a fixed
/// frame-component field `g`. Grids come from `grid(ε)`.
pub fn decomposition_error(
    curve: &FourierCurve,
    eps_list: &[f64],
    g: impl Fn(f64) -> V3,
    grid: impl Fn(f64) -> (usize, usize),
    cfg: BvpConfig,
) -> Result<Vec<DecompositionRow>> {
    let mut rows: Vec<DecompositionRow> = Vec::new();
    for &eps in eps_list {
        let (ns, nth) = grid(eps);
        let c = FourierCurve { eps, ..curve.clone() };
        let frame = crate::geometry::periodicized_frame(&c, ns)?;
        let surf = Surface::closed(&c, &frame, ns, nth, false)?;
        let sys = assemble_dtn_system(surf, cfg)?;
        let v = phi_forward(&frame, &PeriodicVectorField::from_fn(ns, &g))?;
        let (f, _) = dtn_curved(&sys, &v)?;
        let (pred, mean) = decomposition_prediction(&frame, eps, &v)?;
        let error = f.values.iter().zip(&pred.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let ratio = rows.last().map(|r| r.error / error);
        rows.push(DecompositionRow { eps, ns, nth, error, reference: pred.max_norm(), mean: mean.norm(), ratio });
    }
    Ok(rows)
}

/// Traction from the completed double layer: `T[(½I + D + V)⁻¹ v]`.
pub fn neumann_data_completed(surface: &Surface, v: &PeriodicVectorField) -> Result<SurfaceField> {
    let g = &surface.grid;
    if v.n() != g.ns {
        return Err(Error::GridMismatch(format!("field has {} samples, grid {}", v.n(), g.ns)));
    }
    let n = g.len();
    let mut m = layers::double_layer_matrix(surface) + layers::completion_matrix(surface);
    for i in 0..3 * n {
        m[(i, i)] += 0.5;
    }
    let rhs = flat(&SurfaceField::lift(v, g.nth).values);
    let phi = m.partial_piv_lu().solve(&rhs);
    let residual = rel_residual(&m, &phi, &rhs);
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::LinearAlgebra { msg: "completed solve inaccurate".into(), residual });
    }
    let phi = SurfaceField { ns: g.ns, nth: g.nth, values: unflat(&phi) };
    layers::hypersingular_traction(surface, &phi)
}
