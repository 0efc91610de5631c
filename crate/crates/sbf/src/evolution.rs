//! Filament evolution `∂_t X = −λ⁻¹ L_ε[∂_σ⁴X]` with the NtD map replaced
//! by its straight-cylinder main part, advanced by an exponential
//! integrator, plus an optional boundary-integral correction.
//!
//! Frame-spectral step: with `Y = Φ⁻¹X` and `C = Φ⁻¹∂⁴X − ∂⁴Y` frozen over
//! the step, each Fourier mode of `Y` is advanced exactly under
//! `dY/dτ = −m(k)(∂⁴Y + C)`, `τ = dt/λ`. The mean of `Y` moves with the
//! `k = ±1` mobility.

use crate::bvp::{assemble_dtn_system, ntd_curved, ntd_straight, BvpConfig, ZeroModePolicy};
use crate::error::{Error, Result};
use crate::fields::{dft, idft, phi_forward, phi_inverse, wavenumber, PeriodicVectorField, V3};
use crate::geometry::{
    compute_length, max_curvature, min_separation, periodicized_frame, speed_deviation, FourierCurve, FrameField,
};
use crate::layers::Surface;
use crate::multipliers::{ntd_eigen, Direction, SymbolQuery};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    FrameSpectral,
    Cartesian,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeConfig {
    pub variant: Variant,
    pub dt: f64,
    pub steps: usize,
    /// Recompute the curved correction every `M` steps; 0 disables it.
    pub correction_every: usize,
    /// Fourier modes kept in the curve.
    pub modes: usize,
    /// Centerline samples used by the step (and by the correction solve).
    pub ns: usize,
    /// Angular points for the correction solve.
    pub nth: usize,
    /// Abort when the chord–arc constant `|X|_⋆` falls below this.
    pub min_star: f64,
}

impl SchemeConfig {
    pub fn new(dt: f64, steps: usize, modes: usize) -> Self {
        SchemeConfig {
            variant: Variant::FrameSpectral,
            dt,
            steps,
            correction_every: 0,
            modes,
            ns: (8 * modes).max(64).next_power_of_two(),
            nth: 8,
            min_star: 1e-3,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Input(format!("dt must be positive, got {}", self.dt)));
        }
        if self.ns < 2 * self.modes + 2 {
            return Err(Error::Input(format!("ns = {} cannot carry {} modes", self.ns, self.modes)));
        }
        if self.correction_every > 0 && self.nth < 4 {
            return Err(Error::Input("correction needs nth >= 4".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Diagnostics {
    pub lambda: f64,
    pub kappa_max: f64,
    pub star: f64,
    pub bending_energy: f64,
    pub r_eff: f64,
    /// Relative energy that fell outside the kept modes in the last step.
    pub truncated: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionState {
    pub t: f64,
    pub curve: FourierCurve,
    pub lambda: f64,
    pub diagnostics: Diagnostics,
}

pub fn diagnostics(curve: &FourierCurve, truncated: f64) -> Diagnostics {
    let lambda = compute_length(curve);
    Diagnostics {
        lambda,
        kappa_max: max_curvature(curve),
        star: min_separation(curve).star,
        bending_energy: curve.bending_energy(),
        r_eff: lambda / (2.0 * PI),
        truncated,
    }
}

impl EvolutionState {
    pub fn new(curve: FourierCurve) -> Self {
        let d = diagnostics(&curve, 0.0);
        EvolutionState { t: 0.0, lambda: d.lambda, curve, diagnostics: d }
    }
}

/// NtD multipliers `(m_n(k), m_t(k))` for `k = 0..=n/2`, the `k = 0` row
/// copying `k = 1`.
fn mobility_table(eps: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    (0..=(n / 2) as i64)
        .map(|k| {
            let q = SymbolQuery::new(eps, k.max(1))?;
            Ok((ntd_eigen(Direction::Normal, q)?, ntd_eigen(Direction::Tangential, q)?))
        })
        .collect()
}

fn spectra(v: &[V3]) -> [Vec<Complex64>; 3] {
    [0, 1, 2].map(|c| {
        let mut d: Vec<Complex64> = v.iter().map(|x| Complex64::new(x[c], 0.0)).collect();
        dft(&mut d);
        d
    })
}

fn from_spectra(s: &[Vec<Complex64>; 3]) -> Vec<V3> {
    let n = s[0].len();
    let mut out = vec![V3::zeros(); n];
    for (c, spec) in s.iter().enumerate() {
        let mut d = spec.clone();
        idft(&mut d);
        for (o, z) in out.iter_mut().zip(&d) {
            o[c] = z.re;
        }
    }
    out
}

/// Exact solution over `τ` of `dŷ/dτ = −m((2πk)⁴ŷ + ĉ)` for one mode.
pub fn propagate_mode(y: Complex64, c: Complex64, k: i64, m: f64, tau: f64) -> Complex64 {
    if k == 0 {
        return y - c * (m * tau);
    }
    let w = (2.0 * PI * k as f64).powi(4);
    let e = (-tau * w * m).exp();
    y * e - c * ((1.0 - e) / w)
}

/// One main-part step; the new curve is truncated to `cfg.modes`.
pub fn main_part_step(state: &EvolutionState, cfg: &SchemeConfig) -> Result<EvolutionState> {
    main_part_step_forced(state, cfg, None)
}

fn main_part_step_forced(state: &EvolutionState, cfg: &SchemeConfig, forcing: Option<&PeriodicVectorField>) -> Result<EvolutionState> {
    cfg.validate()?;
    let curve = &state.curve;
    let n = cfg.ns;
    let eps = curve.eps;
    let tau = cfg.dt / state.lambda;
    let table = mobility_table(eps, n)?;
    let x = curve.sample(n);
    let g = curve.derivative_samples(n, 4);
    let mut x_new = match cfg.variant {
        Variant::FrameSpectral => {
            let frame = periodicized_frame(curve, n)?;
            frame_spectral_update(&frame, &x, &g, &table, tau)?
        }
        Variant::Cartesian => {
            let frame = periodicized_frame(curve, n)?;
            cartesian_update(&frame, &x, &table, tau)
        }
    };
    if let Some(f) = forcing {
        for (xi, fi) in x_new.iter_mut().zip(&f.values) {
            *xi -= fi * tau;
        }
    }
    let full = FourierCurve::from_samples(&x_new, n / 2 - 1, eps)?;
    let total = full.tail_energy(0).max(f64::MIN_POSITIVE);
    let truncated = full.tail_energy(cfg.modes) / total;
    let next = full.with_modes(cfg.modes);
    let d = diagnostics(&next, truncated);
    if !(0.5..=1.5).contains(&d.lambda) {
        return Err(Error::Stability(format!("length {:.6} left [1/2, 3/2] at t = {:.6e}", d.lambda, state.t + cfg.dt)));
    }
    if d.star < cfg.min_star {
        return Err(Error::SelfIntersection(format!("|X|_* = {:.3e} at t = {:.6e}", d.star, state.t + cfg.dt)));
    }
    Ok(EvolutionState { t: state.t + cfg.dt, lambda: d.lambda, curve: next, diagnostics: d })
}

fn frame_spectral_update(frame: &FrameField, x: &[V3], g: &[V3], table: &[(f64, f64)], tau: f64) -> Result<Vec<V3>> {
    let n = x.len();
    let y = phi_inverse(frame, &PeriodicVectorField::new(x.to_vec()))?;
    let h = phi_inverse(frame, &PeriodicVectorField::new(g.to_vec()))?;
    let ys = spectra(&y.values);
    let hs = spectra(&h.values);
    let mut out = ys.clone();
    for i in 0..n {
        let k = wavenumber(i, n);
        let w = (2.0 * PI * k as f64).powi(4);
        let (mn, mt) = table[k.unsigned_abs() as usize];
        for c in 0..3 {
            let m = if c == 2 { mt } else { mn };
            let cc = hs[c][i] - ys[c][i] * w;
            out[c][i] = propagate_mode(ys[c][i], cc, k, m, tau);
        }
    }
    let y_new = PeriodicVectorField::new(from_spectra(&out));
    Ok(phi_forward(frame, &y_new)?.values)
}

/// Cartesian components: `m_t` along the mean tangent, `m_n` across it; when
/// the mean tangent vanishes every component takes `m_n`.
fn cartesian_update(frame: &FrameField, x: &[V3], table: &[(f64, f64)], tau: f64) -> Vec<V3> {
    let n = x.len();
    let mean_t: V3 = frame.e_t.iter().sum::<V3>() / n as f64;
    let axis = if mean_t.norm() < 1e-8 { None } else { Some(mean_t.normalize()) };
    let xs = spectra(x);
    let mut out = xs.clone();
    for i in 0..n {
        let k = wavenumber(i, n);
        if k == 0 {
            continue;
        }
        let w = (2.0 * PI * k as f64).powi(4);
        let (mn, mt) = table[k.unsigned_abs() as usize];
        let en = (-tau * w * mn).exp();
        match axis {
            None => {
                for c in 0..3 {
                    out[c][i] = xs[c][i] * en;
                }
            }
            Some(a) => {
                let et = (-tau * w * mt).exp();
                let v = [xs[0][i], xs[1][i], xs[2][i]];
                let along: Complex64 = (0..3).map(|c| v[c] * a[c]).sum();
                for c in 0..3 {
                    let par = along * a[c];
                    out[c][i] = par * et + (v[c] - par) * en;
                }
            }
        }
    }
    from_spectra(&out)
}

/// `L_ε(X̃)[f] − Φ L̄_ε Φ⁻¹ f` for `f = ∂_σ⁴X` on the unit-length rescaled
/// curve `X̃ = X/λ`; by the rescaling rule the result scales back as is.
pub fn correction_force(state: &EvolutionState, cfg: &SchemeConfig) -> Result<PeriodicVectorField> {
    if cfg.correction_every == 0 {
        return Err(Error::Input("correction is disabled".into()));
    }
    let unit = state.curve.scaled(1.0 / state.lambda);
    let n = cfg.ns;
    let frame = periodicized_frame(&unit, n)?;
    let f = PeriodicVectorField::new(state.curve.derivative_samples(n, 4));
    let surf = Surface::closed(&unit, &frame, n, cfg.nth, false)?;
    let sys = assemble_dtn_system(surf, BvpConfig::default())?;
    let (v, _) = ntd_curved(&sys, &f)?;
    let main = {
        let g = phi_inverse(&frame, &f)?;
        phi_forward(&frame, &ntd_straight(unit.eps, &g, ZeroModePolicy::NearestMode)?)?
    };
    v.zip_map(&main, |a, b| a - b)
}

/// Result of [`evolve`]: accepted states and the abort reason, if any.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub states: Vec<EvolutionState>,
    pub abort: Option<String>,
    /// Some step pushed more than [`TRUNCATION_TOL`] of the energy above the kept modes.
    pub under_resolved: bool,
}

/// Relative energy above the kept modes tolerated per step.
pub const TRUNCATION_TOL: f64 = 1e-12;

impl Trajectory {
    fn done(states: Vec<EvolutionState>, abort: Option<String>) -> Self {
        let under_resolved = states.iter().any(|s| s.diagnostics.truncated > TRUNCATION_TOL);
        Trajectory { states, abort, under_resolved }
    }
}

/// Run `cfg.steps` steps from an arclength-parameterized unit-length curve.
pub fn evolve(initial: &FourierCurve, cfg: &SchemeConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let lam = compute_length(initial);
    if (lam - 1.0).abs() > 1e-8 || speed_deviation(initial) > 1e-8 {
        return Err(Error::Input(format!(
            "initial curve must be unit-length and arclength-parameterized (length {lam:.12}, speed deviation {:.2e})",
            speed_deviation(initial)
        )));
    }
    let mut states = vec![EvolutionState::new(initial.with_modes(cfg.modes))];
    let mut forcing: Option<PeriodicVectorField> = None;
    for step in 0..cfg.steps {
        let cur = states.last().expect("nonempty");
        if cfg.correction_every > 0 && step % cfg.correction_every == 0 {
            match correction_force(cur, cfg) {
                Ok(f) => forcing = Some(f),
                Err(e) => return Ok(Trajectory::done(states, Some(e.to_string()))),
            }
        }
        match main_part_step_forced(cur, cfg, forcing.as_ref()) {
            Ok(s) => states.push(s),
            Err(e) => return Ok(Trajectory::done(states, Some(e.to_string()))),
        }
    }
    Ok(Trajectory::done(states, None))
}

/// `R(t) = R₀ − (2π)³ m_{ε,n}(1) t`, valid while `R(t) > 0`.
pub fn circle_reduction_oracle(r0: f64, eps: f64, t: f64) -> Result<f64> {
    let m = ntd_eigen(Direction::Normal, SymbolQuery::new(eps, 1)?)?;
    Ok(r0 - (2.0 * PI).powi(3) * m * t)
}

/// Largest `dt` with `τ (2πk)⁴ m(k) ≤ arg` for all `|k| ≤ modes` at length `λ`.
pub fn stable_dt(eps: f64, modes: usize, lambda: f64, arg: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 1..=modes.max(1) as i64 {
        let q = SymbolQuery::new(eps, k)?;
        let m = ntd_eigen(Direction::Normal, q)?.max(ntd_eigen(Direction::Tangential, q)?);
        worst = worst.max((2.0 * PI * k as f64).powi(4) * m);
    }
    Ok(arg * lambda / worst)
}

/// `Σ_k (2πk)⁴ m_n(k) |X̂_k|²` of the unit-length rescaled curve.
pub fn spectral_energy(curve: &FourierCurve) -> Result<f64> {
    let lam = compute_length(curve);
    let mut e = 0.0;
    for k in 1..=curve.modes as i64 {
        let m = ntd_eigen(Direction::Normal, SymbolQuery::new(curve.eps, k)?)?;
        let w = (2.0 * PI * k as f64).powi(4) * m;
        for kk in [k, -k] {
            e += w * curve.coeff(kk).iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
    }
    Ok(e / (lam * lam))
}
