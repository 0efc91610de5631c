//! Stokes kernels and their quadrature on the filament surface.
//!
//! On-surface layer potentials use a co-located punctured trapezoid rule with
//! density subtraction:
//!
//! ```text
//! S[φ](x_i) = Σ_{j≠i} G(x_i, x_j)(φ_j − φ_i) w_j + W(x_i) φ_i,   W(x) = ∫ G(x, ·) dS
//! D[φ](x_i) = Σ_{j≠i} K_D(x_i, x_j)(φ_j − φ_i) w_j − ½ φ_i
//! ```
//!
//! `W` is integrated accurately per target (Duffy-transformed Gauss rules on
//! a patch around the target, graded panels elsewhere). The staggered
//! trapezoid rule is kept as [`staggered_apply`] for comparison.

use crate::error::{Error, Result};
use crate::fields::{SurfaceField, V3};
use crate::geometry::{FourierCurve, FrameField, SurfaceGrid, SurfaceMap};
use crate::quadrature::{tanh_sinh, GaussRule};
use crate::specfun::{bessel_i, bessel_k, cosine_integral};
use faer::Mat;
use nalgebra::Matrix3;
use rayon::prelude::*;
use std::f64::consts::PI;

pub type M3 = Matrix3<f64>;

const INV_8PI: f64 = 1.0 / (8.0 * PI);

fn coincident(r: f64, what: &str) -> Result<()> {
    if !(r > 0.0) {
        return Err(Error::Singularity(format!("{what} evaluated at coincident points")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Kernels on R = x − x′

#[inline]
pub fn stokeslet_r(r: &V3) -> M3 {
    let d = r.norm();
    (M3::identity() / d + r * r.transpose() / (d * d * d)) * INV_8PI
}

#[inline]
pub fn stresslet_r(r: &V3, n_src: &V3) -> M3 {
    let d = r.norm();
    let d2 = d * d;
    r * r.transpose() * (3.0 / (4.0 * PI) * r.dot(n_src) / (d2 * d2 * d))
}

#[inline]
pub fn pressure_kernel_r(r: &V3, n_src: &V3) -> V3 {
    let d = r.norm();
    let d2 = d * d;
    (-n_src / (d2 * d) + r * (3.0 * r.dot(n_src) / (d2 * d2 * d))) / (2.0 * PI)
}

#[inline]
pub fn hypersingular_r(r: &V3, n: &V3, n_src: &V3) -> M3 {
    let d = r.norm();
    let d2 = d * d;
    let d3 = d2 * d;
    let d5 = d3 * d2;
    let d7 = d5 * d2;
    let rn = r.dot(n);
    let rnp = r.dot(n_src);
    let rr = r * r.transpose();
    let t1 = n * n_src.transpose() * (2.0 / d3);
    let t2 = (r * n.transpose() * rnp + rr * n.dot(n_src)) * (3.0 / d5);
    let t3 = (M3::identity() * (rn * rnp) + n_src * r.transpose() * rn) * (3.0 / d5);
    let t4 = rr * (-30.0 * rn * rnp / d7);
    (t1 + t2 + t3 + t4) / (4.0 * PI)
}

/// Stokeslet `(1/8π)(I/|R| + R⊗R/|R|³)`.
pub fn stokeslet(x: &V3, y: &V3) -> Result<M3> {
    let r = x - y;
    coincident(r.norm(), "Stokeslet")?;
    Ok(stokeslet_r(&r))
}

/// Stresslet `(3/4π) R⊗R (R·n′)/|R|⁵`.
pub fn stresslet(x: &V3, y: &V3, n_src: &V3) -> Result<M3> {
    let r = x - y;
    coincident(r.norm(), "stresslet")?;
    Ok(stresslet_r(&r, n_src))
}

/// Double-layer pressure kernel `(1/2π)(−n′/|R|³ + 3R(R·n′)/|R|⁵)`.
pub fn pressure_kernel(x: &V3, y: &V3, n_src: &V3) -> Result<V3> {
    let r = x - y;
    coincident(r.norm(), "pressure kernel")?;
    Ok(pressure_kernel_r(&r, n_src))
}

/// Rotlet `−R/|R|³`.
pub fn rotlet(x: &V3, y: &V3) -> Result<V3> {
    let r = x - y;
    let d = r.norm();
    coincident(d, "rotlet")?;
    Ok(-r / (d * d * d))
}

/// Double-layer stress kernel `K_T(x, x′; n, n′)`.
pub fn hypersingular_kernel(x: &V3, y: &V3, n: &V3, n_src: &V3) -> Result<M3> {
    let r = x - y;
    coincident(r.norm(), "hypersingular kernel")?;
    Ok(hypersingular_r(&r, n, n_src))
}

// ---------------------------------------------------------------------------
// Surfaces

/// Quadrature parameters for the self-integral `W`.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    /// Gauss points per direction on each Duffy triangle and far panel.
    pub gauss: usize,
    /// Trapezoid points in θ on far panels.
    pub nv: usize,
    /// Half-width of the near patch in units of `ε`.
    pub patch: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { gauss: 20, nv: 128, patch: 2.0 }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Closed(SurfaceMap),
    /// Straight tube about the `z` axis, unit period, images `|m| ≤ P`.
    Tube { images: usize },
}

/// A discretized filament surface with precomputed self-integrals.
#[derive(Debug, Clone)]
pub struct Surface {
    pub grid: SurfaceGrid,
    kind: Kind,
    /// `W(x_i) = ∫ G(x_i, ·) dS` at every node.
    pub w_self: Vec<M3>,
}

fn rot_z(th: f64) -> M3 {
    let (s, c) = th.sin_cos();
    M3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

impl Surface {
    /// Closed filament around `curve` with frame sampled at `ns` points.
    pub fn closed(curve: &FourierCurve, frame: &FrameField, ns: usize, nth: usize, checked: bool) -> Result<Self> {
        Self::closed_with(curve, frame, ns, nth, checked, QuadConfig::default())
    }

    pub fn closed_with(
        curve: &FourierCurve,
        frame: &FrameField,
        ns: usize,
        nth: usize,
        checked: bool,
        cfg: QuadConfig,
    ) -> Result<Self> {
        let grid = if checked {
            SurfaceGrid::new(curve, frame, ns, nth)?
        } else {
            SurfaceGrid::new_unchecked(curve, frame, ns, nth)?
        };
        let step = (ns / (8 * curve.modes).max(64)).max(1);
        let step = if ns % step == 0 { step } else { 1 };
        let map = SurfaceMap::new(curve, &frame.subsample(step));
        let w_self = closed_self_integrals(&map, &grid, cfg);
        Ok(Surface { grid, kind: Kind::Closed(map), w_self })
    }

    /// Straight periodic tube of radius `eps` about the `z` axis.
    pub fn straight_tube(eps: f64, ns: usize, nth: usize, images: usize) -> Result<Self> {
        Self::straight_tube_with(eps, ns, nth, images, QuadConfig::default())
    }

    pub fn straight_tube_with(eps: f64, ns: usize, nth: usize, images: usize, cfg: QuadConfig) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.25) {
            return Err(Error::Geometry(format!("tube radius {eps} outside (0, 1/4)")));
        }
        let frame = FrameField::straight(ns);
        let dth = 2.0 * PI / nth as f64;
        let ds = 1.0 / ns as f64;
        let mut nodes = Vec::with_capacity(ns * nth);
        let mut normals = Vec::with_capacity(ns * nth);
        let mut centers = Vec::with_capacity(ns * nth);
        for i in 0..ns {
            let s = i as f64 * ds;
            for j in 0..nth {
                let th = j as f64 * dth;
                let er = V3::new(th.cos(), th.sin(), 0.0);
                nodes.push(V3::new(0.0, 0.0, s) + er * eps);
                normals.push(er);
                centers.push(V3::new(0.0, 0.0, s));
            }
        }
        let grid = SurfaceGrid {
            ns,
            nth,
            eps,
            frame,
            nodes,
            normals,
            jacobian: vec![eps; ns * nth],
            weights: vec![eps * ds * dth; ns * nth],
            centers,
        };
        let u_max = images as f64 + 0.5;
        let w0 = tube_self_integral(eps, u_max, cfg);
        let w_self = (0..ns * nth)
            .map(|idx| {
                let r = rot_z((idx % nth) as f64 * dth);
                r * w0 * r.transpose()
            })
            .collect();
        Ok(Surface { grid, kind: Kind::Tube { images }, w_self })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn is_tube(&self) -> bool {
        matches!(self.kind, Kind::Tube { .. })
    }

    pub fn map(&self) -> Option<&SurfaceMap> {
        match &self.kind {
            Kind::Closed(m) => Some(m),
            Kind::Tube { .. } => None,
        }
    }

    /// Visit every source `(j, image shift, weight factor)` relevant to a
    /// target at axial coordinate `s_t`.
    #[inline]
    fn for_each_source(&self, s_t: f64, mut f: impl FnMut(usize, f64, f64)) {
        match self.kind {
            Kind::Closed(_) => {
                for j in 0..self.len() {
                    f(j, 0.0, 1.0);
                }
            }
            Kind::Tube { images } => {
                let u_max = images as f64 + 0.5;
                let ns = self.grid.ns;
                let nth = self.grid.nth;
                let tol = 1e-9 / ns as f64;
                for i in 0..ns {
                    let s = i as f64 / ns as f64;
                    // u = s + m − s_t within [−U, U]
                    let m_lo = (-u_max - s + s_t - tol).ceil() as i64;
                    let m_hi = (u_max - s + s_t + tol).floor() as i64;
                    for m in m_lo..=m_hi {
                        let u = s + m as f64 - s_t;
                        let fac = if (u.abs() - u_max).abs() < tol { 0.5 } else { 1.0 };
                        for j in 0..nth {
                            f(i * nth + j, m as f64, fac);
                        }
                    }
                }
            }
        }
    }

    fn axial(&self, x: &V3) -> f64 {
        match self.kind {
            Kind::Closed(_) => 0.0,
            Kind::Tube { .. } => x.z,
        }
    }

    /// Source position with image shift applied.
    #[inline]
    fn src(&self, j: usize, shift: f64) -> V3 {
        let mut y = self.grid.nodes[j];
        y.z += shift;
        y
    }

    #[inline]
    fn src_center(&self, j: usize, shift: f64) -> V3 {
        let mut y = self.grid.centers[j];
        y.z += shift;
        y
    }

    fn punctured(&self, r: &V3, x: &V3) -> bool {
        r.norm() <= 1e-12 * (1.0 + x.norm())
    }
}

// ---------------------------------------------------------------------------
// Self-integral W = ∫ G dS

struct Patch {
    /// `(u, v, weight)` in σ and θ offsets, weight includes the Duffy factor.
    near: Vec<(f64, f64, f64)>,
    /// `(u, weight)` far nodes in σ; the θ rule is a uniform trapezoid.
    far: Vec<(f64, f64)>,
}

fn patch_rule(a: f64, e: f64, u_far: f64, cfg: QuadConfig) -> Patch {
    let g = GaussRule::new(cfg.gauss);
    let mut near = Vec::new();
    let ub = [-a, -e, -0.25 * e, 0.0, 0.25 * e, e, a];
    let mut edges: Vec<((f64, f64), (f64, f64))> = Vec::new();
    for w in ub.windows(2) {
        edges.push(((w[0], PI), (w[1], PI)));
        edges.push(((w[0], -PI), (w[1], -PI)));
    }
    let vb = [-PI, -0.5 * PI, 0.0, 0.5 * PI, PI];
    for w in vb.windows(2) {
        edges.push(((a, w[0]), (a, w[1])));
        edges.push(((-a, w[0]), (-a, w[1])));
    }
    let nodes: Vec<(f64, f64)> = g.on(0.0, 1.0).collect();
    for (p, q) in edges {
        let cross = (p.0 * q.1 - p.1 * q.0).abs();
        for &(t, wt) in &nodes {
            for &(s, ws) in &nodes {
                let eu = p.0 + s * (q.0 - p.0);
                let ev = p.1 + s * (q.1 - p.1);
                near.push((t * eu, t * ev, wt * ws * t * cross));
            }
        }
    }
    let mut far = Vec::new();
    let mut br = vec![a];
    while br.last().unwrap() * 2.0 < u_far {
        let b = br.last().unwrap() * 2.0;
        br.push(b);
    }
    br.push(u_far);
    for sgn in [1.0, -1.0] {
        for w in br.windows(2) {
            for (u, wu) in g.on(w[0], w[1]) {
                far.push((sgn * u, wu));
            }
        }
    }
    Patch { near, far }
}

fn tube_self_integral(eps: f64, u_max: f64, cfg: QuadConfig) -> M3 {
    let a = cfg.patch * eps;
    let rule = patch_rule(a, eps, u_max, cfg);
    let x0 = V3::new(eps, 0.0, 0.0);
    let pos = |u: f64, v: f64| V3::new(eps * v.cos(), eps * v.sin(), u);
    let mut tot = M3::zeros();
    for &(u, v, w) in &rule.near {
        tot += stokeslet_r(&(x0 - pos(u, v))) * (w * eps);
    }
    let dv = 2.0 * PI / cfg.nv as f64;
    for &(u, wu) in &rule.far {
        for k in 0..cfg.nv {
            let v = k as f64 * dv;
            tot += stokeslet_r(&(x0 - pos(u, v))) * (wu * dv * eps);
        }
    }
    tot
}

fn closed_self_integrals(map: &SurfaceMap, grid: &SurfaceGrid, cfg: QuadConfig) -> Vec<M3> {
    let ns = grid.ns;
    let nth = grid.nth;
    let eps = grid.eps;
    let rows: Vec<Vec<M3>> = (0..ns)
        .into_par_iter()
        .map(|i| {
            let s0 = i as f64 / ns as f64;
            let sp = grid.frame.speed[i];
            let a = cfg.patch * eps / sp;
            let rule = patch_rule(a, eps / sp, 0.5, cfg);
            let near_c: Vec<_> = rule.near.iter().map(|&(u, _, _)| map.centerline(s0 + u)).collect();
            let far_c: Vec<_> = rule.far.iter().map(|&(u, _)| map.centerline(s0 + u)).collect();
            let surf = |c: &(V3, V3, V3, V3, f64, f64, f64), th: f64| -> (V3, f64) {
                let (x, _t, n1, n2, k1, k2, spd) = *c;
                let (st, ct) = th.sin_cos();
                let er = n1 * ct + n2 * st;
                (x + er * eps, eps * (1.0 - eps * (k1 * ct + k2 * st)) * spd)
            };
            let dv = 2.0 * PI / cfg.nv as f64;
            (0..nth)
                .map(|j| {
                    let th0 = grid.theta(j);
                    let x0 = grid.nodes[i * nth + j];
                    let mut tot = M3::zeros();
                    for (c, &(_, v, w)) in near_c.iter().zip(&rule.near) {
                        let (y, area) = surf(c, th0 + v);
                        tot += stokeslet_r(&(x0 - y)) * (w * area);
                    }
                    for (c, &(_, wu)) in far_c.iter().zip(&rule.far) {
                        for k in 0..cfg.nv {
                            let (y, area) = surf(c, th0 + k as f64 * dv);
                            tot += stokeslet_r(&(x0 - y)) * (wu * dv * area);
                        }
                    }
                    tot
                })
                .collect()
        })
        .collect();
    rows.into_iter().flatten().collect()
}

// ---------------------------------------------------------------------------
// Tube far-field tail for the single layer

/// `−2 Ci(2π|k|U)` for `k ≠ 0`, zero at `k = 0`.
fn tail_symbol(k: i64, u_max: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    -2.0 * cosine_integral(2.0 * PI * k.unsigned_abs() as f64 * u_max).unwrap_or(0.0)
}

/// Convolution weights `c(d_i) = (1/Ns) Σ_k μ_k e^{2πik i/Ns}` on the s-grid.
fn tail_weights(ns: usize, u_max: f64) -> Vec<f64> {
    (0..ns)
        .map(|d| {
            let mut acc = 0.0;
            for i in 0..ns {
                let k = crate::fields::wavenumber(i, ns);
                acc += tail_symbol(k, u_max) * (2.0 * PI * k as f64 * d as f64 / ns as f64).cos();
            }
            acc / ns as f64
        })
        .collect()
}

fn tail_tensor() -> M3 {
    (M3::identity() + V3::z() * V3::z().transpose()) * INV_8PI
}

// ---------------------------------------------------------------------------
// Applications at selected targets

/// Single layer at the listed node indices.
pub fn single_layer_apply(surf: &Surface, phi: &SurfaceField, targets: &[usize]) -> Result<Vec<V3>> {
    check(surf, phi)?;
    let g = &surf.grid;
    let base: Vec<V3> = targets
        .par_iter()
        .map(|&i| {
            let x = g.nodes[i];
            let mut acc = surf.w_self[i] * phi.values[i];
            surf.for_each_source(surf.axial(&x), |j, shift, fac| {
                let r = x - surf.src(j, shift);
                if surf.punctured(&r, &x) {
                    return;
                }
                acc += stokeslet_r(&r) * (phi.values[j] - phi.values[i]) * (g.weights[j] * fac);
            });
            acc
        })
        .collect();
    if let Kind::Tube { images } = surf.kind {
        let u_max = images as f64 + 0.5;
        let cw = tail_weights(g.ns, u_max);
        let line = line_density(phi, g);
        let t = tail_tensor();
        return Ok(targets
            .iter()
            .zip(base)
            .map(|(&i, b)| {
                let row = i / g.nth;
                let mut acc = V3::zeros();
                for (ip, l) in line.iter().enumerate() {
                    acc += l * cw[(row + g.ns - ip) % g.ns];
                }
                b + t * acc
            })
            .collect());
    }
    Ok(base)
}

/// `∫ φ J dθ` per s-row.
fn line_density(phi: &SurfaceField, g: &SurfaceGrid) -> Vec<V3> {
    let dth = 2.0 * PI / g.nth as f64;
    (0..g.ns)
        .map(|i| (0..g.nth).map(|j| phi.at(i, j) * g.jacobian[i * g.nth + j] * dth).sum())
        .collect()
}

/// Which limit of the double layer to return on the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Principal value.
    OnSurface,
    /// Limit from the fluid: principal value plus `½ψ`.
    ExteriorLimit,
}

/// Double layer at the listed node indices.
pub fn double_layer_apply(surf: &Surface, psi: &SurfaceField, targets: &[usize], side: Side) -> Result<Vec<V3>> {
    check(surf, psi)?;
    let g = &surf.grid;
    Ok(targets
        .par_iter()
        .map(|&i| {
            let x = g.nodes[i];
            let mut acc = V3::zeros();
            surf.for_each_source(surf.axial(&x), |j, shift, fac| {
                let r = x - surf.src(j, shift);
                if surf.punctured(&r, &x) {
                    return;
                }
                acc += stresslet_r(&r, &g.normals[j]) * (psi.values[j] - psi.values[i]) * (g.weights[j] * fac);
            });
            match side {
                Side::OnSurface => acc - psi.values[i] * 0.5,
                Side::ExteriorLimit => acc,
            }
        })
        .collect())
}

/// Plain trapezoid double layer at an off-surface point.
pub fn double_layer_at(surf: &Surface, psi: &SurfaceField, x: &V3) -> Result<V3> {
    check(surf, psi)?;
    let g = &surf.grid;
    let mut acc = V3::zeros();
    surf.for_each_source(surf.axial(x), |j, shift, fac| {
        let r = x - surf.src(j, shift);
        acc += stresslet_r(&r, &g.normals[j]) * psi.values[j] * (g.weights[j] * fac);
    });
    Ok(acc)
}

/// Plain trapezoid single layer at an off-surface point.
pub fn single_layer_at(surf: &Surface, phi: &SurfaceField, x: &V3) -> Result<V3> {
    check(surf, phi)?;
    let g = &surf.grid;
    let mut acc = V3::zeros();
    surf.for_each_source(surf.axial(x), |j, shift, fac| {
        let r = x - surf.src(j, shift);
        acc += stokeslet_r(&r) * phi.values[j] * (g.weights[j] * fac);
    });
    Ok(acc)
}

/// `(∫ K_D(y, ·) dS, ∫ p^D(y, ·) dS)` at an off-surface point `y`.
pub fn null_integrals(surf: &Surface, y: &V3) -> (M3, V3) {
    let g = &surf.grid;
    let mut kd = M3::zeros();
    let mut pd = V3::zeros();
    surf.for_each_source(surf.axial(y), |j, shift, fac| {
        let r = y - surf.src(j, shift);
        let w = g.weights[j] * fac;
        kd += stresslet_r(&r, &g.normals[j]) * w;
        pd += pressure_kernel_r(&r, &g.normals[j]) * w;
    });
    (kd, pd)
}

/// Completion flow: centerline Stokeslets plus rotlets carrying the moment
/// `(x′ − X(s′)) × φ(x′)`.
pub fn completion_flow_at(surf: &Surface, phi: &SurfaceField, x: &V3) -> Result<V3> {
    check(surf, phi)?;
    let g = &surf.grid;
    let mut acc = V3::zeros();
    let mut bad = false;
    surf.for_each_source(surf.axial(x), |j, shift, fac| {
        let c = surf.src_center(j, shift);
        let r = x - c;
        let d = r.norm();
        if d <= 1e-12 {
            bad = true;
            return;
        }
        let w = g.weights[j] * fac;
        let m = (g.nodes[j] - g.centers[j]).cross(&phi.values[j]);
        let l = -r / (d * d * d);
        acc += (stokeslet_r(&r) * phi.values[j] + l.cross(&m) * INV_8PI) * w;
    });
    if bad {
        return Err(Error::Singularity("completion flow evaluated on the centerline".into()));
    }
    Ok(acc)
}

/// Completion flow at the listed nodes.
pub fn completion_flow_apply(surf: &Surface, phi: &SurfaceField, targets: &[usize]) -> Result<Vec<V3>> {
    targets.par_iter().map(|&i| completion_flow_at(surf, phi, &surf.grid.nodes[i])).collect()
}

/// Distance from `x` to the centerline, by dense sampling and local refinement.
pub fn centerline_distance(surf: &Surface, x: &V3) -> f64 {
    match &surf.kind {
        Kind::Tube { .. } => (x.x * x.x + x.y * x.y).sqrt(),
        Kind::Closed(map) => {
            let c = &map.curve;
            let n = (16 * c.modes).max(512);
            let (mut best, mut at) = (f64::INFINITY, 0.0);
            for i in 0..n {
                let s = i as f64 / n as f64;
                let d = (c.point(s) - x).norm();
                if d < best {
                    best = d;
                    at = s;
                }
            }
            let (mut lo, mut hi) = (at - 1.0 / n as f64, at + 1.0 / n as f64);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..60 {
                let m1 = hi - g * (hi - lo);
                let m2 = lo + g * (hi - lo);
                if (c.point(m1) - x).norm() < (c.point(m2) - x).norm() {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            best.min((c.point(0.5 * (lo + hi)) - x).norm())
        }
    }
}

/// Velocity `D[φ](x) + V[φ](x)` at an exterior point.
pub fn exterior_velocity(surf: &Surface, phi: &SurfaceField, x: &V3) -> Result<V3> {
    if centerline_distance(surf, x) < surf.grid.eps {
        return Err(Error::Domain("point lies inside the filament".into()));
    }
    Ok(double_layer_at(surf, phi, x)? + completion_flow_at(surf, phi, x)?)
}

/// Traction `T[φ] = −σ[D[φ]]n − σ[V[φ]]n` at every node.
pub fn hypersingular_traction(surf: &Surface, phi: &SurfaceField) -> Result<SurfaceField> {
    check(surf, phi)?;
    let g = &surf.grid;
    let vals: Vec<V3> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let x = g.nodes[i];
            let n = g.normals[i];
            let mut sd = V3::zeros();
            let mut sv = V3::zeros();
            surf.for_each_source(surf.axial(&x), |j, shift, fac| {
                let w = g.weights[j] * fac;
                let r = x - surf.src(j, shift);
                if !surf.punctured(&r, &x) {
                    sd += hypersingular_r(&r, &n, &g.normals[j]) * (phi.values[j] - phi.values[i]) * w;
                }
                sv += completion_stress_r(&(x - surf.src_center(j, shift)), &n, &(g.nodes[j] - g.centers[j]), &phi.values[j]) * w;
            });
            -sd - sv
        })
        .collect();
    Ok(SurfaceField { ns: g.ns, nth: g.nth, values: vals })
}

/// Integrand of `σ[V[φ]]n` for one source.
#[inline]
fn completion_stress_r(rx: &V3, n: &V3, arm: &V3, phi: &V3) -> V3 {
    let d = rx.norm();
    let d5 = d.powi(5);
    let m = arm.cross(phi);
    let rxm = rx.cross(&m);
    let rn = rx.dot(n);
    (rx * (-2.0 * rn * rx.dot(phi) / d5) + rxm * (rn / d5) + rx * (n.dot(&rxm) / d5)) * (3.0 / (8.0 * PI))
}

fn check(surf: &Surface, f: &SurfaceField) -> Result<()> {
    if f.ns != surf.grid.ns || f.nth != surf.grid.nth {
        return Err(Error::GridMismatch(format!(
            "field {}x{} vs surface {}x{}",
            f.ns, f.nth, surf.grid.ns, surf.grid.nth
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Dense operator matrices (3N × 3N, node-major, xyz-minor)

fn fill_blocks(n: usize, blocks: Vec<Vec<(usize, M3)>>) -> Mat<f64> {
    let mut m = Mat::<f64>::zeros(3 * n, 3 * n);
    for (i, row) in blocks.into_iter().enumerate() {
        for (j, b) in row {
            for p in 0..3 {
                for q in 0..3 {
                    m[(3 * i + p, 3 * j + q)] += b[(p, q)];
                }
            }
        }
    }
    m
}

fn row_blocks(surf: &Surface, kernel: impl Fn(&V3, usize, usize) -> M3 + Sync) -> Vec<Vec<(usize, M3)>> {
    let g = &surf.grid;
    let n = g.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let x = g.nodes[i];
            let mut acc = vec![M3::zeros(); n];
            surf.for_each_source(surf.axial(&x), |j, shift, fac| {
                let r = x - surf.src(j, shift);
                if surf.punctured(&r, &x) {
                    return;
                }
                acc[j] += kernel(&r, i, j) * (g.weights[j] * fac);
            });
            let off: M3 = acc.iter().sum();
            acc[i] -= off;
            acc.into_iter().enumerate().collect()
        })
        .collect()
}

/// Single-layer matrix with density subtraction (and the tube tail).
pub fn single_layer_matrix(surf: &Surface) -> Mat<f64> {
    let g = &surf.grid;
    let n = g.len();
    let mut blocks = row_blocks(surf, |r, _, _| stokeslet_r(r));
    for (i, row) in blocks.iter_mut().enumerate() {
        row[i].1 += surf.w_self[i];
    }
    let mut m = fill_blocks(n, blocks);
    if let Kind::Tube { images } = surf.kind {
        let cw = tail_weights(g.ns, images as f64 + 0.5);
        let t = tail_tensor();
        let dth = 2.0 * PI / g.nth as f64;
        for i in 0..n {
            let row = i / g.nth;
            for j in 0..n {
                let col = j / g.nth;
                let b = t * (cw[(row + g.ns - col) % g.ns] * g.jacobian[j] * dth);
                for p in 0..3 {
                    for q in 0..3 {
                        m[(3 * i + p, 3 * j + q)] += b[(p, q)];
                    }
                }
            }
        }
    }
    m
}

/// Principal-value double-layer matrix (on-surface, including `−½I`).
pub fn double_layer_matrix(surf: &Surface) -> Mat<f64> {
    let g = &surf.grid;
    let mut blocks = row_blocks(surf, |r, _, j| stresslet_r(r, &g.normals[j]));
    for (i, row) in blocks.iter_mut().enumerate() {
        row[i].1 -= M3::identity() * 0.5;
    }
    fill_blocks(g.len(), blocks)
}

/// Completion-flow matrix on the surface nodes.
pub fn completion_matrix(surf: &Surface) -> Mat<f64> {
    let g = &surf.grid;
    let n = g.len();
    let blocks: Vec<Vec<(usize, M3)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = g.nodes[i];
            let mut acc = vec![M3::zeros(); n];
            surf.for_each_source(surf.axial(&x), |j, shift, fac| {
                let r = x - surf.src_center(j, shift);
                let d = r.norm();
                let arm = g.nodes[j] - g.centers[j];
                // l × (arm × φ) = arm (l·φ) − φ (l·arm)
                let l = -r / (d * d * d);
                let rot = (arm * l.transpose() - M3::identity() * l.dot(&arm)) * INV_8PI;
                acc[j] += (stokeslet_r(&r) + rot) * (g.weights[j] * fac);
            });
            acc.into_iter().enumerate().collect()
        })
        .collect();
    fill_blocks(n, blocks)
}

// ---------------------------------------------------------------------------
// Comparison with the straight-cylinder symbols

/// Worst relative errors of the discrete layers against the analytic symbols.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SymbolErrors {
    pub single_t: f64,
    pub double_t: f64,
    pub single_n: f64,
    pub double_n: f64,
}

impl SymbolErrors {
    pub fn max(&self) -> f64 {
        self.single_t.max(self.double_t).max(self.single_n).max(self.double_n)
    }
}

/// Apply the discrete single and double layers on the straight tube to
/// `e^{2πiks} e_z` and `e^{2πiks} e_x`, `1 ≤ k ≤ kmax`, and compare with the
/// symbols at the targets `θ = 0` and `θ = π/2` (the nodes are equivalent by
/// rotation, these two see every component).
pub fn symbol_errors(eps: f64, kmax: i64, ns: usize, nth: usize, images: usize) -> Result<SymbolErrors> {
    use crate::multipliers::{
        double_layer_normal, double_layer_tangential, single_layer_forward_normal,
        single_layer_forward_tangential, SymbolQuery,
    };
    use num_complex::Complex64 as C;
    if nth % 4 != 0 {
        return Err(Error::Domain(format!("nth = {nth} must be a multiple of 4")));
    }
    let surf = Surface::straight_tube(eps, ns, nth, images)?;
    let targets = [0, nth / 4];
    let mut worst = [0.0f64; 4];
    for k in 1..=kmax {
        let q = SymbolQuery::new(eps, k)?;
        let st = single_layer_forward_tangential(q)?;
        let dt = double_layer_tangential(q.z())?;
        let sn = single_layer_forward_normal(q)?;
        let dn = double_layer_normal(q.z())?;
        for dir in 0..2 {
            let mode = |phase: f64| {
                SurfaceField::from_fn(ns, nth, |i, _| {
                    let a = 2.0 * PI * k as f64 * i as f64 / ns as f64 - phase;
                    if dir == 0 { V3::new(0.0, 0.0, a.cos()) } else { V3::new(a.cos(), 0.0, 0.0) }
                })
            };
            // cos and sin parts give the real and imaginary parts of the complex mode
            let (re, im) = (mode(0.0), mode(0.5 * PI));
            let s = [single_layer_apply(&surf, &re, &targets)?, single_layer_apply(&surf, &im, &targets)?];
            let d = [
                double_layer_apply(&surf, &re, &targets, Side::OnSurface)?,
                double_layer_apply(&surf, &im, &targets, Side::OnSurface)?,
            ];
            let (mut es, mut ns_, mut ed, mut nd) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for (t, &j) in targets.iter().enumerate() {
                let th = surf.grid.theta(j);
                let er = V3::new(th.cos(), th.sin(), 0.0);
                let et = V3::new(-th.sin(), th.cos(), 0.0);
                let ez = V3::z();
                let cv = |a: C, u: V3, b: C, v: V3, c: C, w: V3| [0, 1, 2].map(|i| a * u[i] + b * v[i] + c * w[i]);
                let zero = C::new(0.0, 0.0);
                let (want_s, want_d) = if dir == 0 {
                    (
                        cv(st[(0, 0)], ez, st[(1, 0)], er, zero, ez),
                        cv(C::new(dt.q_te, 0.0), ez, C::new(0.0, dt.q_tf), er, zero, ez),
                    )
                } else {
                    // e_x = cosθ e_r − sinθ e_θ
                    let co: Vec<C> = (0..3).map(|r| sn[(r, 0)] - sn[(r, 1)]).collect();
                    (
                        cv(co[0] * th.cos(), er, co[1] * th.sin(), et, co[2] * th.cos(), ez),
                        cv(
                            C::new(dn.q_nn * th.cos(), 0.0),
                            er,
                            C::new(-dn.q_no * th.sin(), 0.0),
                            et,
                            C::new(0.0, dn.q_np * th.cos()),
                            ez,
                        ),
                    )
                };
                for c in 0..3 {
                    let gs = C::new(s[0][t][c], s[1][t][c]);
                    let gd = C::new(d[0][t][c], d[1][t][c]);
                    es = es.max((gs - want_s[c]).norm());
                    ed = ed.max((gd - want_d[c]).norm());
                    ns_ = ns_.max(want_s[c].norm());
                    nd = nd.max(want_d[c].norm());
                }
            }
            worst[2 * dir] = worst[2 * dir].max(es / ns_);
            worst[2 * dir + 1] = worst[2 * dir + 1].max(ed / nd);
        }
    }
    Ok(SymbolErrors { single_t: worst[0], double_t: worst[1], single_n: worst[2], double_n: worst[3] })
}

// ---------------------------------------------------------------------------
// Staggered trapezoid (comparison rule)

/// Single and double layer at on-surface targets `(s, θ)` using a source grid
/// offset by half a cell in both directions from the targets. Only the
/// straight tube is supported; `phi` is evaluated at the source points.
pub fn staggered_apply(
    eps: f64,
    ns: usize,
    nth: usize,
    images: usize,
    phi: impl Fn(f64, f64) -> V3,
    target: (f64, f64),
) -> (V3, V3) {
    let ds = 1.0 / ns as f64;
    let dth = 2.0 * PI / nth as f64;
    let (s0, th0) = target;
    let x = V3::new(eps * th0.cos(), eps * th0.sin(), s0);
    let mut sl = V3::zeros();
    let mut dl = V3::zeros();
    let span = (images as i64 + 1) * ns as i64;
    for a in -span..span {
        let u = (a as f64 + 0.5) * ds;
        for b in 0..nth {
            let th = th0 + (b as f64 + 0.5) * dth;
            let n = V3::new(th.cos(), th.sin(), 0.0);
            let y = V3::new(eps * th.cos(), eps * th.sin(), s0 + u);
            let r = x - y;
            let f = phi(s0 + u, th);
            let w = eps * ds * dth;
            sl += stokeslet_r(&r) * f * w;
            dl += stresslet_r(&r, &n) * f * w;
        }
    }
    (sl, dl)
}

// ---------------------------------------------------------------------------
// Bessel θ-integral identities

/// `(lhs, rhs)` for identity `index ∈ 1..=6`:
/// `∫₀^{2π} sin^{m}(θ/2) K_j(z sin(θ/2)) dθ` with `m = index − 1`, `j = m mod 2`.
pub fn bessel_theta_identity(index: usize, z: f64) -> Result<(f64, f64)> {
    if !(1..=6).contains(&index) {
        return Err(Error::Domain(format!("identity index {index} not in 1..=6")));
    }
    if !(z > 0.0) {
        return Err(Error::Domain(format!("z must be positive, got {z}")));
    }
    let m = (index - 1) as i32;
    let j = (m % 2) as u32;
    // θ = 2φ and symmetry about φ = π/2: ∫₀^{2π} = 4∫₀^{π/2}
    let lhs = 4.0
        * tanh_sinh(0.0, 0.5 * PI, 1e-15, |p| {
            let sp = p.sin();
            sp.powi(m) * bessel_k(j, z * sp).unwrap_or(0.0)
        });
    let h = 0.5 * z;
    let (i0, i1) = (bessel_i(0, h)?, bessel_i(1, h)?);
    let (k0, k1) = (bessel_k(0, h)?, bessel_k(1, h)?);
    let a = i0 * k0 - i1 * k1;
    let b = i0 * k1 - i1 * k0;
    let rhs = match index {
        1 => 2.0 * PI * i0 * k0,
        2 => PI * b,
        3 => PI * a,
        4 => PI * b - 2.0 * PI / z * i1 * k1,
        5 => PI * a + PI / z * b - 4.0 * PI / (z * z) * i1 * k1,
        _ => {
            PI * b + PI / z * (i0 * k0 - 3.0 * i1 * k1) + 4.0 * PI / (z * z) * b
                - 16.0 * PI / (z * z * z) * i1 * k1
        }
    };
    Ok((lhs, rhs))
}
