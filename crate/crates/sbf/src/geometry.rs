//! Closed filament centerlines as truncated Fourier series, their frames and
//! the tubular surface of radius `ε` around them.
//!
//! ```
//! use sbf::geometry::{periodicized_frame, FourierCurve};
//! let circle = FourierCurve::circle(0.05);
//! let frame = periodicized_frame(&circle, 64).unwrap();
//! assert!(frame.kappa3.abs() < 1e-12);
//! assert!((frame.kappa1[0] - 2.0 * std::f64::consts::PI).abs() < 1e-8);
//! ```

use crate::error::{Error, Result};
use crate::fields::{dft, wavenumber, V3};
use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Closed curve `X(σ) = Σ_{|k|≤K} c_k e^{2πikσ}` with radius ratio `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCurve {
    pub modes: usize,
    pub eps: f64,
    /// `coeffs[k + K]` for `k = −K..=K`.
    pub coeffs: Vec<[Complex64; 3]>,
}

/// Position and σ-derivatives up to fourth order.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub x: V3,
    pub d: [V3; 4],
}

impl FourierCurve {
    pub fn new(modes: usize, eps: f64, coeffs: Vec<[Complex64; 3]>) -> Result<Self> {
        if coeffs.len() != 2 * modes + 1 {
            return Err(Error::Input(format!("expected {} coefficient triples, got {}", 2 * modes + 1, coeffs.len())));
        }
        let c = FourierCurve { modes, eps, coeffs };
        let scale = c.coeffs.iter().flat_map(|t| t.iter()).map(|z| z.norm()).fold(1e-300, f64::max);
        for k in 0..=modes {
            for d in 0..3 {
                let a = c.coeffs[modes + k][d];
                let b = c.coeffs[modes - k][d].conj();
                if (a - b).norm() > 1e-10 * scale {
                    return Err(Error::Input(format!("coefficients not conjugate-symmetric at k={k}")));
                }
            }
        }
        Ok(c)
    }

    /// Unit-circumference circle of radius `1/(2π)` in the `xy` plane.
    pub fn circle(eps: f64) -> Self {
        Self::circle_radius(1.0 / (2.0 * PI), eps)
    }

    pub fn circle_radius(r: f64, eps: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        let mut coeffs = vec![[z; 3]; 3];
        coeffs[2] = [Complex64::new(0.5 * r, 0.0), Complex64::new(0.0, -0.5 * r), z];
        coeffs[0] = [Complex64::new(0.5 * r, 0.0), Complex64::new(0.0, 0.5 * r), z];
        FourierCurve { modes: 1, eps, coeffs }
    }

    /// Project point samples at `σ_i = i/N` onto modes `|k| ≤ modes`.
    pub fn from_samples(points: &[V3], modes: usize, eps: f64) -> Result<Self> {
        let n = points.len();
        if n < 2 * modes + 1 {
            return Err(Error::Input(format!("{n} samples cannot carry {modes} modes")));
        }
        let mut coeffs = vec![[Complex64::new(0.0, 0.0); 3]; 2 * modes + 1];
        for d in 0..3 {
            let mut buf: Vec<Complex64> = points.iter().map(|p| Complex64::new(p[d], 0.0)).collect();
            dft(&mut buf);
            for (i, b) in buf.iter().enumerate() {
                let k = wavenumber(i, n);
                if k.unsigned_abs() as usize <= modes && !(n % 2 == 0 && i == n / 2) {
                    coeffs[(k + modes as i64) as usize][d] = *b;
                }
            }
        }
        Ok(FourierCurve { modes, eps, coeffs })
    }

    /// Curve with the same shape and at least `modes` modes (zero padded or truncated).
    pub fn with_modes(&self, modes: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        let mut coeffs = vec![[z; 3]; 2 * modes + 1];
        for k in -(modes.min(self.modes) as i64)..=(modes.min(self.modes) as i64) {
            coeffs[(k + modes as i64) as usize] = self.coeffs[(k + self.modes as i64) as usize];
        }
        FourierCurve { modes, eps: self.eps, coeffs }
    }

    pub fn coeff(&self, k: i64) -> [Complex64; 3] {
        self.coeffs[(k + self.modes as i64) as usize]
    }

    /// Position and derivatives at `σ`.
    pub fn eval(&self, s: f64) -> CurvePoint {
        let mut x = self.coeff(0).map(|c| c.re);
        let mut d = [[0.0; 3]; 4];
        let w = Complex64::from_polar(1.0, 2.0 * PI * s);
        let mut ph = Complex64::new(1.0, 0.0);
        for k in 1..=self.modes as i64 {
            ph *= w;
            let c = self.coeff(k);
            let ik = Complex64::new(0.0, 2.0 * PI * k as f64);
            for dim in 0..3 {
                // conjugate pair contributes 2 Re(c_k e^{2πikσ} (2πik)^m)
                let base = c[dim] * ph;
                x[dim] += 2.0 * base.re;
                let mut f = base;
                for m in 0..4 {
                    f *= ik;
                    d[m][dim] += 2.0 * f.re;
                }
            }
        }
        CurvePoint { x: V3::from(x), d: d.map(V3::from) }
    }

    pub fn point(&self, s: f64) -> V3 {
        self.eval(s).x
    }

    pub fn sample(&self, n: usize) -> Vec<V3> {
        (0..n).map(|i| self.point(i as f64 / n as f64)).collect()
    }

    /// Spectral `∂_σ^order` samples on an `n`-point grid.
    pub fn derivative_samples(&self, n: usize, order: usize) -> Vec<V3> {
        (0..n).map(|i| self.eval(i as f64 / n as f64).d[order - 1]).collect()
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut c = self.clone();
        for t in c.coeffs.iter_mut() {
            for z in t.iter_mut() {
                *z *= a;
            }
        }
        c
    }

    pub fn rotated(&self, r: &Matrix3<f64>) -> Self {
        let mut c = self.clone();
        for t in c.coeffs.iter_mut() {
            let re = r * V3::new(t[0].re, t[1].re, t[2].re);
            let im = r * V3::new(t[0].im, t[1].im, t[2].im);
            for d in 0..3 {
                t[d] = Complex64::new(re[d], im[d]);
            }
        }
        c
    }

    pub fn translated(&self, v: V3) -> Self {
        let mut c = self.clone();
        let k0 = self.modes;
        for d in 0..3 {
            c.coeffs[k0][d] += v[d];
        }
        c
    }

    /// Energy in modes `|k| > k_cut`.
    pub fn tail_energy(&self, k_cut: usize) -> f64 {
        let mut e = 0.0;
        for k in (k_cut + 1)..=self.modes {
            for kk in [k as i64, -(k as i64)] {
                e += self.coeff(kk).iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        e
    }

    /// Bending energy `∫|∂_σ²X|² dσ` (Parseval).
    pub fn bending_energy(&self) -> f64 {
        let mut e = 0.0;
        for k in 1..=self.modes as i64 {
            let w = (2.0 * PI * k as f64).powi(4);
            for kk in [k, -k] {
                e += w * self.coeff(kk).iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        e
    }
}

fn quad_points(c: &FourierCurve) -> usize {
    (32 * c.modes).max(512)
}

/// `λ = ∫₀¹ |∂_σX| dσ` by the periodic trapezoid rule.
pub fn compute_length(c: &FourierCurve) -> f64 {
    let n = quad_points(c);
    (0..n).map(|i| c.eval(i as f64 / n as f64).d[0].norm()).sum::<f64>() / n as f64
}

fn speed_spectrum(c: &FourierCurve, n: usize) -> (Vec<f64>, Vec<Complex64>) {
    let speeds: Vec<f64> = (0..n).map(|i| c.eval(i as f64 / n as f64).d[0].norm()).collect();
    let mut buf: Vec<Complex64> = speeds.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft(&mut buf);
    (speeds, buf)
}

/// Maximum relative deviation of the speed from its mean.
pub fn speed_deviation(c: &FourierCurve) -> f64 {
    let n = quad_points(c);
    let sp: Vec<f64> = (0..n).map(|i| c.eval(i as f64 / n as f64).d[0].norm()).collect();
    let mean = sp.iter().sum::<f64>() / n as f64;
    sp.iter().map(|v| (v / mean - 1.0).abs()).fold(0.0, f64::max)
}

fn reparam_once(c: &FourierCurve, modes: usize) -> Result<FourierCurve> {
    let n = (16 * modes.max(c.modes)).max(1024).next_power_of_two();
    let (speeds, spec) = speed_spectrum(c, n);
    let len = spec[0].re;
    let min = speeds.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 1e-12 * len) {
        return Err(Error::Degenerate(format!("speed vanishes (min {min:e})")));
    }
    // S(σ) = σ + Σ_{k≠0} ĉ_k/(2πik λ) (e^{2πikσ} − 1): cumulative arclength fraction.
    let half = n / 2;
    let cum = |s: f64| -> f64 {
        let w = Complex64::from_polar(1.0, 2.0 * PI * s);
        let mut ph = Complex64::new(1.0, 0.0);
        let mut acc = s;
        for k in 1..half {
            ph *= w;
            let ck = spec[k] / len;
            let t = ck * (ph - 1.0) / Complex64::new(0.0, 2.0 * PI * k as f64);
            acc += 2.0 * t.re;
        }
        acc
    };
    let mut pts = Vec::with_capacity(n);
    let mut sig: f64 = 0.0;
    for j in 0..n {
        let target = j as f64 / n as f64;
        if j > 0 {
            sig = sig.max(target - 0.5 / n as f64);
        }
        let mut x = sig.max(0.0);
        for _ in 0..50 {
            let f = cum(x) - target;
            let dfdx = c.eval(x).d[0].norm() / len;
            let step = f / dfdx;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        sig = x;
        pts.push(c.point(x));
    }
    FourierCurve::from_samples(&pts, modes, c.eps)
}

/// Reparameterize to constant speed (equal to the length), keeping the image
/// of `σ = 0` and the mode count.
pub fn arclength_reparameterize(c: &FourierCurve) -> Result<FourierCurve> {
    arclength_reparameterize_with_modes(c, c.modes)
}

pub fn arclength_reparameterize_with_modes(c: &FourierCurve, modes: usize) -> Result<FourierCurve> {
    if speed_deviation(c) <= 1e-12 && modes == c.modes {
        return Ok(c.clone());
    }
    let mut cur = reparam_once(c, modes)?;
    for _ in 0..50 {
        if speed_deviation(&cur) <= 1e-10 {
            break;
        }
        let next = reparam_once(&cur, modes)?;
        let change = next
            .coeffs
            .iter()
            .zip(&cur.coeffs)
            .flat_map(|(a, b)| (0..3).map(move |d| (a[d] - b[d]).norm()))
            .fold(0.0, f64::max);
        cur = next;
        if change < 1e-14 {
            break;
        }
    }
    Ok(cur)
}

/// Uniform rescaling about `X(0)` to unit length, then arclength
/// reparameterization.
pub fn rescale_to_unit_length(c: &FourierCurve) -> Result<FourierCurve> {
    rescale_to_unit_length_with_modes(c, c.modes)
}

pub fn rescale_to_unit_length_with_modes(c: &FourierCurve, modes: usize) -> Result<FourierCurve> {
    let lam = compute_length(c);
    if !(lam > 0.0) {
        return Err(Error::Degenerate("zero length".into()));
    }
    let x0 = c.point(0.0);
    let scaled = c.scaled(1.0 / lam).translated(x0 * (1.0 - 1.0 / lam));
    arclength_reparameterize_with_modes(&scaled, modes)
}

/// Pure parallel-transport frame sampled at `σ_i = i/n`.
#[derive(Debug, Clone)]
pub struct BishopFrame {
    pub e_t: Vec<V3>,
    pub e1: Vec<V3>,
    pub e2: Vec<V3>,
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<f64>,
    /// Arclength fraction at each sample.
    pub s: Vec<f64>,
    pub speed: Vec<f64>,
    pub length: f64,
    /// Holonomy angle from `ẽ1(0)` to `ẽ1(1)` in the `(ẽ1, ẽ2)(0)` plane.
    pub phi: f64,
    /// Orthonormality defect of the transported frame after one loop.
    pub drift: f64,
}

/// Unit tangent and its σ-derivative.
fn tangent(c: &FourierCurve, s: f64) -> (V3, V3, f64) {
    let p = c.eval(s);
    let sp = p.d[0].norm();
    let t = p.d[0] / sp;
    let dt = (p.d[1] - t * p.d[1].dot(&t)) / sp;
    (t, dt, sp)
}

fn initial_normal(c: &FourierCurve) -> V3 {
    let (t, dt, _) = tangent(c, 0.0);
    if dt.norm() > 1e-8 {
        return dt.normalize();
    }
    let axes = [V3::x(), V3::y(), V3::z()];
    let a = axes.iter().min_by(|a, b| a.dot(&t).abs().total_cmp(&b.dot(&t).abs())).unwrap();
    (a - t * a.dot(&t)).normalize()
}

pub fn bishop_frame(c: &FourierCurve, n: usize) -> Result<BishopFrame> {
    if n < 4 {
        return Err(Error::Input("frame grid needs at least 4 points".into()));
    }
    let total_min = (64 * c.modes).max(4096);
    let sub = total_min.div_ceil(n);
    let h = 1.0 / (n * sub) as f64;
    let length = compute_length(c);

    // state: e1 and accumulated arclength
    let rhs = |s: f64, e: &V3| -> (V3, f64) {
        let (t, dt, sp) = tangent(c, s);
        (-t * e.dot(&dt), sp / length)
    };

    let e1_0 = initial_normal(c);
    let mut e1 = e1_0;
    let mut acc = 0.0;
    let mut out_e1 = Vec::with_capacity(n);
    let mut out_s = Vec::with_capacity(n);
    for i in 0..n {
        out_e1.push(e1);
        out_s.push(acc);
        for m in 0..sub {
            let s = (i * sub + m) as f64 * h;
            let (k1, a1) = rhs(s, &e1);
            let (k2, a2) = rhs(s + 0.5 * h, &(e1 + k1 * (0.5 * h)));
            let (k3, a3) = rhs(s + 0.5 * h, &(e1 + k2 * (0.5 * h)));
            let (k4, a4) = rhs(s + h, &(e1 + k3 * h));
            e1 += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            acc += (a1 + 2.0 * a2 + 2.0 * a3 + a4) * (h / 6.0);
            let (t, _, _) = tangent(c, s + h);
            e1 -= t * e1.dot(&t);
            e1 /= e1.norm();
        }
    }
    if !e1.iter().all(|v| v.is_finite()) {
        return Err(Error::Integration("Bishop transport produced non-finite values".into()));
    }
    let (t0, _, _) = tangent(c, 0.0);
    let e2_0 = t0.cross(&e1_0);
    let e1_end = e1;
    let e2_end = t0.cross(&e1_end);
    let drift = (e1_end.norm() - 1.0).abs().max(e1_end.dot(&t0).abs()).max(e2_end.dot(&e1_end).abs());
    let phi = e1_end.dot(&e2_0).atan2(e1_end.dot(&e1_0));

    let mut e_t = Vec::with_capacity(n);
    let mut e2 = Vec::with_capacity(n);
    let mut kappa1 = Vec::with_capacity(n);
    let mut kappa2 = Vec::with_capacity(n);
    let mut speed = Vec::with_capacity(n);
    for i in 0..n {
        let s = i as f64 / n as f64;
        let (t, dt, sp) = tangent(c, s);
        let b = t.cross(&out_e1[i]);
        kappa1.push(dt.dot(&out_e1[i]) / sp);
        kappa2.push(dt.dot(&b) / sp);
        e_t.push(t);
        e2.push(b);
        speed.push(sp);
    }
    Ok(BishopFrame { e_t, e1: out_e1, e2, kappa1, kappa2, s: out_s, speed, length, phi, drift })
}

/// Periodic orthonormal frame `(e_t, e_n1, e_n2)` sampled at `σ_i = i/n`.
///
/// Curvature coefficients are per unit physical arclength; `κ₃ = −φ/λ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameField {
    pub e_t: Vec<V3>,
    pub e_n1: Vec<V3>,
    pub e_n2: Vec<V3>,
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<f64>,
    pub kappa3: f64,
    /// `|∂_σX|` at each sample.
    pub speed: Vec<f64>,
    /// Arclength fraction at each sample.
    pub s: Vec<f64>,
    pub length: f64,
}

impl FrameField {
    pub fn n(&self) -> usize {
        self.e_t.len()
    }

    /// Frame of the straight `z`-axis: `(e_z, e_x, e_y)`.
    pub fn straight(n: usize) -> Self {
        FrameField {
            e_t: vec![V3::z(); n],
            e_n1: vec![V3::x(); n],
            e_n2: vec![V3::y(); n],
            kappa1: vec![0.0; n],
            kappa2: vec![0.0; n],
            kappa3: 0.0,
            speed: vec![1.0; n],
            s: (0..n).map(|i| i as f64 / n as f64).collect(),
            length: 1.0,
        }
    }

    /// Largest residual of the frame equations per unit arclength
    /// `e_t′ = κ₁e_n1 + κ₂e_n2`, `e_n1′ = −κ₁e_t + κ₃e_n2`, `e_n2′ = −κ₂e_t − κ₃e_n1`,
    /// with derivatives taken spectrally.
    pub fn ode_residual(&self) -> Result<f64> {
        use crate::fields::PeriodicVectorField;
        let d = |v: &[V3]| PeriodicVectorField::new(v.to_vec()).spectral_derivative(1);
        let (dt, d1, d2) = (d(&self.e_t)?, d(&self.e_n1)?, d(&self.e_n2)?);
        let k3 = self.kappa3;
        let mut worst: f64 = 0.0;
        for i in 0..self.n() {
            let a = 1.0 / self.speed[i];
            let (k1, k2) = (self.kappa1[i], self.kappa2[i]);
            let r_t = dt.values[i] * a - self.e_n1[i] * k1 - self.e_n2[i] * k2;
            let r_1 = d1.values[i] * a + self.e_t[i] * k1 - self.e_n2[i] * k3;
            let r_2 = d2.values[i] * a + self.e_t[i] * k2 + self.e_n1[i] * k3;
            worst = worst.max(r_t.norm()).max(r_1.norm()).max(r_2.norm());
        }
        Ok(worst)
    }

    /// Largest deviation of `(e_t, e_n1, e_n2)` from orthonormality.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n() {
            let b = [self.e_t[i], self.e_n1[i], self.e_n2[i]];
            for p in 0..3 {
                for q in 0..3 {
                    let target = if p == q { 1.0 } else { 0.0 };
                    d = d.max((b[p].dot(&b[q]) - target).abs());
                }
            }
        }
        d
    }

    /// Take every `step`-th sample.
    pub fn subsample(&self, step: usize) -> Self {
        let pick = |v: &Vec<V3>| v.iter().step_by(step).cloned().collect::<Vec<_>>();
        let pickf = |v: &Vec<f64>| v.iter().step_by(step).cloned().collect::<Vec<_>>();
        FrameField {
            e_t: pick(&self.e_t),
            e_n1: pick(&self.e_n1),
            e_n2: pick(&self.e_n2),
            kappa1: pickf(&self.kappa1),
            kappa2: pickf(&self.kappa2),
            kappa3: self.kappa3,
            speed: pickf(&self.speed),
            s: pickf(&self.s),
            length: self.length,
        }
    }
}

pub fn periodicized_frame(c: &FourierCurve, n: usize) -> Result<FrameField> {
    let b = bishop_frame(c, n)?;
    Ok(periodicize(&b))
}

pub fn periodicize(b: &BishopFrame) -> FrameField {
    let n = b.e_t.len();
    let kappa3 = -b.phi / b.length;
    let mut e_n1 = Vec::with_capacity(n);
    let mut e_n2 = Vec::with_capacity(n);
    let mut kappa1 = Vec::with_capacity(n);
    let mut kappa2 = Vec::with_capacity(n);
    for i in 0..n {
        let a = -b.phi * b.s[i];
        let (sa, ca) = a.sin_cos();
        e_n1.push(b.e1[i] * ca + b.e2[i] * sa);
        e_n2.push(-b.e1[i] * sa + b.e2[i] * ca);
        kappa1.push(ca * b.kappa1[i] + sa * b.kappa2[i]);
        kappa2.push(-sa * b.kappa1[i] + ca * b.kappa2[i]);
    }
    FrameField {
        e_t: b.e_t.clone(),
        e_n1,
        e_n2,
        kappa1,
        kappa2,
        kappa3,
        speed: b.speed.clone(),
        s: b.s.clone(),
        length: b.length,
    }
}

/// Real trigonometric interpolant of several periodic channels.
#[derive(Debug, Clone)]
pub struct TrigInterp {
    /// `coeffs[k][ch]` for `k = 0..=M`; the Nyquist entry is pre-halved and
    /// `k ≥ 1` entries pre-doubled.
    coeffs: Vec<Vec<Complex64>>,
    channels: usize,
}

impl TrigInterp {
    pub fn new(samples: &[Vec<f64>]) -> Self {
        let channels = samples.len();
        let n = samples[0].len();
        let m = n / 2;
        let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); channels]; m + 1];
        for (ch, data) in samples.iter().enumerate() {
            let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            dft(&mut buf);
            for k in 0..=m {
                let mut c = buf[k];
                if k > 0 {
                    c *= 2.0;
                }
                if n % 2 == 0 && k == m && k > 0 {
                    c *= 0.5;
                }
                coeffs[k][ch] = c;
            }
        }
        TrigInterp { coeffs, channels }
    }

    pub fn eval(&self, s: f64, out: &mut [f64]) {
        let w = Complex64::from_polar(1.0, 2.0 * PI * s);
        let mut ph = Complex64::new(1.0, 0.0);
        out[..self.channels].iter_mut().for_each(|x| *x = 0.0);
        for (k, row) in self.coeffs.iter().enumerate() {
            if k > 0 {
                ph *= w;
            }
            for (o, c) in out.iter_mut().zip(row) {
                *o += (c * ph).re;
            }
        }
    }
}

/// Surface geometry at arbitrary `(σ, θ)`, from the exact curve and an
/// interpolated periodic frame.
#[derive(Debug, Clone)]
pub struct SurfaceMap {
    pub curve: FourierCurve,
    interp: TrigInterp,
    pub eps: f64,
}

/// Local geometry at one surface point.
#[derive(Debug, Clone, Copy)]
pub struct SurfacePoint {
    pub x: V3,
    /// Centerline point `X(σ)`.
    pub center: V3,
    pub normal: V3,
    pub e_theta: V3,
    pub e_t: V3,
    /// Area element per `dσ dθ`.
    pub area: f64,
}

impl SurfaceMap {
    pub fn new(curve: &FourierCurve, frame: &FrameField) -> Self {
        let mut ch: Vec<Vec<f64>> = Vec::with_capacity(8);
        for d in 0..3 {
            ch.push(frame.e_n1.iter().map(|v| v[d]).collect());
        }
        for d in 0..3 {
            ch.push(frame.e_n2.iter().map(|v| v[d]).collect());
        }
        ch.push(frame.kappa1.clone());
        ch.push(frame.kappa2.clone());
        SurfaceMap { curve: curve.clone(), interp: TrigInterp::new(&ch), eps: curve.eps }
    }

    /// Centerline data at `σ`: `(X, e_t, e_n1, e_n2, κ1, κ2, speed)`.
    pub fn centerline(&self, s: f64) -> (V3, V3, V3, V3, f64, f64, f64) {
        let p = self.curve.eval(s);
        let sp = p.d[0].norm();
        let t = p.d[0] / sp;
        let mut buf = [0.0; 8];
        self.interp.eval(s, &mut buf);
        let mut n1 = V3::new(buf[0], buf[1], buf[2]);
        n1 -= t * n1.dot(&t);
        n1 /= n1.norm();
        let n2 = t.cross(&n1);
        (p.x, t, n1, n2, buf[6], buf[7], sp)
    }

    pub fn point(&self, s: f64, theta: f64) -> SurfacePoint {
        let (x, t, n1, n2, k1, k2, sp) = self.centerline(s);
        let (st, ct) = theta.sin_cos();
        let er = n1 * ct + n2 * st;
        let eth = -n1 * st + n2 * ct;
        let khat = k1 * ct + k2 * st;
        SurfacePoint {
            x: x + er * self.eps,
            center: x,
            normal: er,
            e_theta: eth,
            e_t: t,
            area: self.eps * (1.0 - self.eps * khat) * sp,
        }
    }
}

/// Nodes, normals and Jacobian of the tubular surface on an `Ns × Nθ` grid.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    pub ns: usize,
    pub nth: usize,
    pub eps: f64,
    pub frame: FrameField,
    /// Row-major in `s`: index `i * nth + j`.
    pub nodes: Vec<V3>,
    pub normals: Vec<V3>,
    /// `J = ε(1 − εκ̂)`, per unit physical arclength and radian.
    pub jacobian: Vec<f64>,
    /// Quadrature weights `J |∂_σX| Δσ Δθ`.
    pub weights: Vec<f64>,
    pub centers: Vec<V3>,
}

/// Radius bound `min(1/(2κ_*), c_Γ/2)/4` used as an admissibility heuristic.
pub fn radius_bound(c: &FourierCurve) -> f64 {
    let k = max_curvature(c);
    let sep = min_separation(c).c_gamma;
    (1.0 / (2.0 * k)).min(0.5 * sep) / 4.0
}

impl SurfaceGrid {
    pub fn new(c: &FourierCurve, frame: &FrameField, ns: usize, nth: usize) -> Result<Self> {
        let bound = radius_bound(c);
        if c.eps > bound {
            return Err(Error::Geometry(format!("eps {} exceeds radius bound {bound:.4e}", c.eps)));
        }
        Self::new_unchecked(c, frame, ns, nth)
    }

    /// As [`new`](Self::new) without the radius heuristic; only positivity
    /// of the Jacobian is enforced.
    pub fn new_unchecked(c: &FourierCurve, frame: &FrameField, ns: usize, nth: usize) -> Result<Self> {
        if frame.n() != ns {
            return Err(Error::GridMismatch(format!("frame has {} samples, grid {ns}", frame.n())));
        }
        if nth < 4 || ns < 4 {
            return Err(Error::Input("grid needs at least 4 points per direction".into()));
        }
        let eps = c.eps;
        let dth = 2.0 * PI / nth as f64;
        let ds = 1.0 / ns as f64;
        let mut nodes = Vec::with_capacity(ns * nth);
        let mut normals = Vec::with_capacity(ns * nth);
        let mut jacobian = Vec::with_capacity(ns * nth);
        let mut weights = Vec::with_capacity(ns * nth);
        let mut centers = Vec::with_capacity(ns * nth);
        for i in 0..ns {
            let x = c.point(i as f64 / ns as f64);
            for j in 0..nth {
                let th = j as f64 * dth;
                let er = frame.e_n1[i] * th.cos() + frame.e_n2[i] * th.sin();
                let khat = frame.kappa1[i] * th.cos() + frame.kappa2[i] * th.sin();
                let jac = eps * (1.0 - eps * khat);
                if !(jac > 0.0) {
                    return Err(Error::Geometry(format!("non-positive Jacobian at node ({i},{j})")));
                }
                nodes.push(x + er * eps);
                normals.push(er);
                jacobian.push(jac);
                weights.push(jac * frame.speed[i] * ds * dth);
                centers.push(x);
            }
        }
        Ok(SurfaceGrid { ns, nth, eps, frame: frame.clone(), nodes, normals, jacobian, weights, centers })
    }

    pub fn len(&self) -> usize {
        self.ns * self.nth
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.nth as f64
    }

    /// `(e_r, e_θ, e_t)` at node `(i, j)`.
    pub fn local_basis(&self, i: usize, j: usize) -> (V3, V3, V3) {
        let th = self.theta(j);
        let (st, ct) = th.sin_cos();
        let n1 = self.frame.e_n1[i];
        let n2 = self.frame.e_n2[i];
        (n1 * ct + n2 * st, -n1 * st + n2 * ct, self.frame.e_t[i])
    }

    pub fn total_area(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Chord–arc constant of a closed curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Separation {
    /// `inf |X(σ) − X(σ′)| / |σ − σ′|` (periodic distance in σ).
    pub star: f64,
    /// Same ratio per unit arclength fraction, `star / λ` for arclength curves.
    pub c_gamma: f64,
    pub sigma: (f64, f64),
}

fn periodic_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Minimum chord–arc ratio over grid pairs with `|σ−σ′| ≥ 2/N`, refined by
/// local coordinate search.
pub fn min_separation(c: &FourierCurve) -> Separation {
    let n = (8 * c.modes).max(256);
    let pts = c.sample(n);
    let ratio = |a: f64, b: f64| -> f64 {
        let d = periodic_dist(a, b);
        (c.point(a) - c.point(b)).norm() / d
    };
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..n {
        for j in (i + 2)..n {
            let d = periodic_dist(i as f64 / n as f64, j as f64 / n as f64);
            if d < 2.0 / n as f64 - 1e-12 {
                continue;
            }
            let r = (pts[i] - pts[j]).norm() / d;
            if r < best.0 {
                best = (r, i as f64 / n as f64, j as f64 / n as f64);
            }
        }
    }
    let (mut r, mut a, mut b) = best;
    let mut step = 1.0 / n as f64;
    let floor = 2.0 / n as f64;
    for _ in 0..60 {
        let mut improved = false;
        for (da, db) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step), (step, step), (-step, -step)] {
            let (na, nb) = (a + da, b + db);
            if periodic_dist(na, nb) < floor {
                continue;
            }
            let nr = ratio(na, nb);
            if nr < r {
                r = nr;
                a = na;
                b = nb;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    let lam = compute_length(c);
    Separation { star: r, c_gamma: r / lam, sigma: (a.rem_euclid(1.0), b.rem_euclid(1.0)) }
}

/// Curvature `|X_σ × X_σσ| / |X_σ|³` at `σ`.
pub fn curvature_at(c: &FourierCurve, s: f64) -> f64 {
    let p = c.eval(s);
    p.d[0].cross(&p.d[1]).norm() / p.d[0].norm().powi(3)
}

/// `κ_* = sup |X_ss|`, grid search then golden-section refinement.
pub fn max_curvature(c: &FourierCurve) -> f64 {
    let n = (16 * c.modes).max(256);
    let (mut best, mut at) = (0.0, 0.0);
    for i in 0..n {
        let s = i as f64 / n as f64;
        let k = curvature_at(c, s);
        if k > best {
            best = k;
            at = s;
        }
    }
    let h = 1.0 / n as f64;
    let (mut lo, mut hi) = (at - h, at + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if curvature_at(c, m1) > curvature_at(c, m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.max(curvature_at(c, 0.5 * (lo + hi)))
}

/// `5%`-style perturbed circle: radius `R(1 + δ cos(2πmσ))` in-plane plus an
/// out-of-plane mode `δ_z R sin(2π m_z σ)`, rescaled to unit length.
pub fn perturbed_circle(eps: f64, delta: f64, m: usize, delta_z: f64, m_z: usize, modes: usize) -> Result<FourierCurve> {
    let n = (8 * modes).max(256);
    let r0 = 1.0 / (2.0 * PI);
    let pts: Vec<V3> = (0..n)
        .map(|i| {
            let s = i as f64 / n as f64;
            let a = 2.0 * PI * s;
            let r = r0 * (1.0 + delta * (m as f64 * a).cos());
            V3::new(r * a.cos(), r * a.sin(), delta_z * r0 * (m_z as f64 * a).sin())
        })
        .collect();
    let c = FourierCurve::from_samples(&pts, modes, eps)?;
    rescale_to_unit_length(&c)
}
