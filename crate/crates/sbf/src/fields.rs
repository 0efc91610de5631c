//! Periodic vector fields on the centerline and on the filament surface.
//!
//! A [`PeriodicVectorField`] holds samples at `s_i = i/N`; spectral
//! coefficients are computed on demand with an FFT and use the convention
//! `g(s) = Σ_k ĝ_k e^{2πiks}` with `ĝ_k = (1/N) Σ_i g(s_i) e^{-2πiks_i}`.

use crate::error::{Error, Result};
use crate::geometry::{FrameField, SurfaceGrid};
use nalgebra::Vector3;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type V3 = Vector3<f64>;
pub type C3 = [Complex64; 3];

/// Forward DFT scaled by `1/N`.
pub fn dft(data: &mut [Complex64]) {
    let n = data.len();
    FftPlanner::new().plan_fft_forward(n).process(data);
    let s = 1.0 / n as f64;
    data.iter_mut().for_each(|x| *x *= s);
}

/// Inverse of [`dft`] (unscaled synthesis).
pub fn idft(data: &mut [Complex64]) {
    let n = data.len();
    FftPlanner::new().plan_fft_inverse(n).process(data);
}

/// Signed wavenumber of FFT slot `i` for length `n`.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicVectorField {
    pub values: Vec<V3>,
}

impl PeriodicVectorField {
    pub fn new(values: Vec<V3>) -> Self {
        PeriodicVectorField { values }
    }

    pub fn zeros(n: usize) -> Self {
        PeriodicVectorField { values: vec![V3::zeros(); n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> V3) -> Self {
        PeriodicVectorField { values: (0..n).map(|i| f(i as f64 / n as f64)).collect() }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Spectral coefficients in FFT order.
    pub fn spectrum(&self) -> Vec<C3> {
        let n = self.n();
        let mut out = vec![[Complex64::new(0.0, 0.0); 3]; n];
        for c in 0..3 {
            let mut buf: Vec<Complex64> = self.values.iter().map(|v| Complex64::new(v[c], 0.0)).collect();
            dft(&mut buf);
            for (o, b) in out.iter_mut().zip(buf) {
                o[c] = b;
            }
        }
        out
    }

    /// Inverse of [`spectrum`](Self::spectrum); imaginary parts are dropped.
    pub fn from_spectrum(spec: &[C3]) -> Self {
        let n = spec.len();
        let mut values = vec![V3::zeros(); n];
        for c in 0..3 {
            let mut buf: Vec<Complex64> = spec.iter().map(|s| s[c]).collect();
            idft(&mut buf);
            for (v, b) in values.iter_mut().zip(buf) {
                v[c] = b.re;
            }
        }
        PeriodicVectorField { values }
    }

    pub fn mean(&self) -> V3 {
        self.values.iter().sum::<V3>() / self.n() as f64
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(&V3) -> V3) -> Self {
        PeriodicVectorField { values: self.values.iter().map(f).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(&V3, &V3) -> V3) -> Result<Self> {
        same_n(self.n(), other.n())?;
        Ok(PeriodicVectorField { values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect() })
    }

    /// Apply a per-mode multiplier `m(k)` to each component.
    pub fn apply_multiplier(&self, m: impl Fn(i64) -> [Complex64; 3]) -> Self {
        let n = self.n();
        let mut spec = self.spectrum();
        for (i, s) in spec.iter_mut().enumerate() {
            let k = wavenumber(i, n);
            let f = m(k);
            for c in 0..3 {
                s[c] *= f[c];
            }
        }
        Self::from_spectrum(&spec)
    }

    /// `∂_s^order` by the multiplier `(2πik)^order`. For odd orders the
    /// Nyquist mode of an even-length grid is dropped to keep the result real.
    pub fn spectral_derivative(&self, order: u32) -> Result<Self> {
        if !(1..=4).contains(&order) {
            return Err(Error::Domain(format!("derivative order {order} not in 1..=4")));
        }
        let n = self.n();
        Ok(self.apply_multiplier(|k| {
            if order % 2 == 1 && n % 2 == 0 && k.unsigned_abs() as usize == n / 2 {
                return [Complex64::new(0.0, 0.0); 3];
            }
            let f = Complex64::new(0.0, 2.0 * PI * k as f64).powu(order);
            [f; 3]
        }))
    }

    /// Trigonometric interpolant at arbitrary `s`; the Nyquist mode is split
    /// evenly between `±N/2`.
    pub fn eval_at(&self, s: f64) -> V3 {
        eval_spectrum(&self.spectrum(), s)
    }
}

/// Evaluate a spectrum (FFT order) at `s`.
pub fn eval_spectrum(spec: &[C3], s: f64) -> V3 {
    let n = spec.len();
    let mut out = V3::zeros();
    for (i, c) in spec.iter().enumerate() {
        let k = wavenumber(i, n);
        let (w, k) = if n % 2 == 0 && i == n / 2 { (0.5, k) } else { (1.0, k) };
        let ph = Complex64::from_polar(1.0, 2.0 * PI * k as f64 * s);
        for d in 0..3 {
            out[d] += w * (c[d] * ph).re;
            if w == 0.5 {
                out[d] += 0.5 * (c[d] * ph.conj()).re;
            }
        }
    }
    out
}

fn same_n(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!("{a} vs {b} samples")));
    }
    Ok(())
}

/// `Φg = g_z e_t + g_x e_n1 + g_y e_n2`.
pub fn phi_forward(frame: &FrameField, g: &PeriodicVectorField) -> Result<PeriodicVectorField> {
    same_n(frame.n(), g.n())?;
    Ok(PeriodicVectorField {
        values: (0..g.n())
            .map(|i| {
                let v = g.values[i];
                frame.e_t[i] * v.z + frame.e_n1[i] * v.x + frame.e_n2[i] * v.y
            })
            .collect(),
    })
}

/// `Φ⁻¹h = (h·e_n1) e_x + (h·e_n2) e_y + (h·e_t) e_z`.
pub fn phi_inverse(frame: &FrameField, h: &PeriodicVectorField) -> Result<PeriodicVectorField> {
    same_n(frame.n(), h.n())?;
    Ok(PeriodicVectorField {
        values: (0..h.n())
            .map(|i| {
                let v = h.values[i];
                V3::new(v.dot(&frame.e_n1[i]), v.dot(&frame.e_n2[i]), v.dot(&frame.e_t[i]))
            })
            .collect(),
    })
}

/// `h₀^Φ = h − Φ(mean of Φ⁻¹h)`; returns `(h₀^Φ, mean)`.
pub fn subtract_phi_mean(frame: &FrameField, h: &PeriodicVectorField) -> Result<(PeriodicVectorField, V3)> {
    let g = phi_inverse(frame, h)?;
    let mean = g.mean();
    let shift = phi_forward(frame, &PeriodicVectorField { values: vec![mean; h.n()] })?;
    let h0 = h.zip_map(&shift, |a, b| a - b)?;
    Ok((h0, mean))
}

/// ℝ³-valued samples on the `(s_i, θ_j)` surface grid, stored row-major in `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceField {
    pub ns: usize,
    pub nth: usize,
    pub values: Vec<V3>,
}

impl SurfaceField {
    pub fn zeros(ns: usize, nth: usize) -> Self {
        SurfaceField { ns, nth, values: vec![V3::zeros(); ns * nth] }
    }

    pub fn from_fn(ns: usize, nth: usize, f: impl Fn(usize, usize) -> V3) -> Self {
        let mut values = Vec::with_capacity(ns * nth);
        for i in 0..ns {
            for j in 0..nth {
                values.push(f(i, j));
            }
        }
        SurfaceField { ns, nth, values }
    }

    /// Replicate a centerline field across θ.
    pub fn lift(v: &PeriodicVectorField, nth: usize) -> Self {
        Self::from_fn(v.n(), nth, |i, _| v.values[i])
    }

    pub fn at(&self, i: usize, j: usize) -> V3 {
        self.values[i * self.nth + j]
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn check_grid(w: &SurfaceField, grid: &SurfaceGrid) -> Result<()> {
    if w.ns != grid.ns || w.nth != grid.nth {
        return Err(Error::GridMismatch(format!(
            "field {}x{} vs grid {}x{}",
            w.ns, w.nth, grid.ns, grid.nth
        )));
    }
    Ok(())
}

/// Keep the zero- and one-modes in θ of the local `(e_r, e_θ, e_t)`
/// components, dropping the zero mode of the `e_θ` component.
pub fn project_p01(w: &SurfaceField, grid: &SurfaceGrid) -> Result<SurfaceField> {
    check_grid(w, grid)?;
    let nth = grid.nth;
    let mut out = SurfaceField::zeros(grid.ns, nth);
    for i in 0..grid.ns {
        // local components along e_r, e_θ, e_t
        let mut comps = [vec![0.0; nth], vec![0.0; nth], vec![0.0; nth]];
        for j in 0..nth {
            let (er, eth, et) = grid.local_basis(i, j);
            let v = w.at(i, j);
            comps[0][j] = v.dot(&er);
            comps[1][j] = v.dot(&eth);
            comps[2][j] = v.dot(&et);
        }
        let mut proj = [vec![0.0; nth], vec![0.0; nth], vec![0.0; nth]];
        for c in 0..3 {
            let (mut a0, mut ac, mut as_) = (0.0, 0.0, 0.0);
            for j in 0..nth {
                let th = grid.theta(j);
                a0 += comps[c][j];
                ac += comps[c][j] * th.cos();
                as_ += comps[c][j] * th.sin();
            }
            a0 /= nth as f64;
            ac *= 2.0 / nth as f64;
            as_ *= 2.0 / nth as f64;
            if c == 1 {
                a0 = 0.0;
            }
            for j in 0..nth {
                let th = grid.theta(j);
                proj[c][j] = a0 + ac * th.cos() + as_ * th.sin();
            }
        }
        for j in 0..nth {
            let (er, eth, et) = grid.local_basis(i, j);
            out.values[i * nth + j] = er * proj[0][j] + eth * proj[1][j] + et * proj[2][j];
        }
    }
    Ok(out)
}

/// `f(s_i) = Σ_j w(s_i, θ_j) J(s_i, θ_j) Δθ`.
pub fn angle_average_traction(w: &SurfaceField, grid: &SurfaceGrid) -> Result<PeriodicVectorField> {
    check_grid(w, grid)?;
    let dth = 2.0 * PI / grid.nth as f64;
    Ok(PeriodicVectorField {
        values: (0..grid.ns)
            .map(|i| (0..grid.nth).map(|j| w.at(i, j) * grid.jacobian[i * grid.nth + j] * dth).sum())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let f = PeriodicVectorField::from_fn(16, |s| V3::new((2.0 * PI * s).sin(), (4.0 * PI * s).cos(), 1.0 + s * 0.0));
        let g = PeriodicVectorField::from_spectrum(&f.spectrum());
        for (a, b) in f.values.iter().zip(&g.values) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn fourth_derivative_of_sine() {
        let f = PeriodicVectorField::from_fn(32, |s| V3::new((2.0 * PI * s).sin(), 0.0, 0.0));
        let d = f.spectral_derivative(4).unwrap();
        let c = (2.0 * PI).powi(4);
        for (i, v) in d.values.iter().enumerate() {
            let s = i as f64 / 32.0;
            assert!((v.x - c * (2.0 * PI * s).sin()).abs() < 1e-9 * c);
        }
        assert!(d.mean().norm() < 1e-9);
    }

    #[test]
    fn interpolation_exact_on_band_limited() {
        let f = PeriodicVectorField::from_fn(8, |s| V3::new((2.0 * PI * s).cos(), (6.0 * PI * s).sin(), 0.5));
        let s = 0.123;
        let v = f.eval_at(s);
        assert!((v.x - (2.0 * PI * s).cos()).abs() < 1e-13);
        assert!((v.y - (6.0 * PI * s).sin()).abs() < 1e-13);
        assert!((v.z - 0.5).abs() < 1e-14);
    }
}
