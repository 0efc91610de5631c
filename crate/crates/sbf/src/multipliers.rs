//! Fourier symbols of the slender-body operators on the straight periodic
//! cylinder of radius `ε` about the unit-length `z` axis.
//!
//! All symbols depend on the mode `k` only through `z = 2πε|k|`. The
//! Q-functions are coded term by term as they appear in the closed forms so
//! that the composition check in [`dtn_via_boundary_integral`] is a genuine
//! cross-check rather than an algebraic tautology.
//!
//! ```
//! use sbf::multipliers::{dtn_eigen_normal, dtn_via_boundary_integral, Direction, SymbolQuery};
//! let q = SymbolQuery::new(0.01, 5).unwrap();
//! let direct = dtn_eigen_normal(q).unwrap();
//! let composed = dtn_via_boundary_integral(Direction::Normal, q).unwrap();
//! assert!((composed / direct - 1.0).abs() < 1e-10);
//! ```

use crate::error::{Error, Result};
use crate::specfun::BesselSet;
use nalgebra::{Matrix2, Matrix3};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Tangential (`e_z`) or normal (`e_x`, `e_y`) channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Tangential,
    Normal,
}

/// One `(ε, k)` pair; `z = 2πε|k|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolQuery {
    pub eps: f64,
    pub k: i64,
}

impl SymbolQuery {
    pub fn new(eps: f64, k: i64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!("eps must be positive, got {eps}")));
        }
        Ok(SymbolQuery { eps, k })
    }

    pub fn z(&self) -> f64 {
        2.0 * PI * self.eps * self.k.unsigned_abs() as f64
    }

    fn nonzero(&self) -> Result<BesselSet> {
        if self.k == 0 {
            return Err(Error::ZeroMode("symbol undefined at k = 0 (mean-zero data required)".into()));
        }
        BesselSet::new(self.z())
    }
}

/// A real coefficient that may carry a factor of `i` in the operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Entry {
    pub value: f64,
    pub imaginary: bool,
}

impl Entry {
    pub fn real(value: f64) -> Self {
        Entry { value, imaginary: false }
    }

    pub fn imag(value: f64) -> Self {
        Entry { value, imaginary: true }
    }

    pub fn to_complex(self) -> Complex64 {
        if self.imaginary {
            Complex64::new(0.0, self.value)
        } else {
            Complex64::new(self.value, 0.0)
        }
    }
}

// ---------------------------------------------------------------------------
// DtN / NtD eigenvalues

fn mt_inv(b: &BesselSet) -> f64 {
    let z = b.z;
    let (k0, k1) = (b.k0, b.k1);
    // 8π²ε|k| = 4πz
    4.0 * PI * z * k1 * k1 / (2.0 * k0 * k1 + z * (k0 * k0 - k1 * k1))
}

fn mn_inv(b: &BesselSet) -> f64 {
    let z = b.z;
    let (k0, k1, k2) = (b.k0, b.k1, b.k2);
    let num = 4.0 * k1 * k1 * k2 + z * k1 * (k1 * k1 - k0 * k2);
    let den = 2.0 * k0 * k1 * k2 + z * (k1 * k1 * (k0 + k2) - 2.0 * k0 * k0 * k2);
    2.0 * PI * z * num / den
}

/// Tangential DtN eigenvalue `m_t⁻¹(k)`.
pub fn dtn_eigen_tangential(q: SymbolQuery) -> Result<f64> {
    Ok(mt_inv(&q.nonzero()?))
}

/// Normal DtN eigenvalue `m_n⁻¹(k)`.
pub fn dtn_eigen_normal(q: SymbolQuery) -> Result<f64> {
    Ok(mn_inv(&q.nonzero()?))
}

pub fn dtn_eigen(direction: Direction, q: SymbolQuery) -> Result<f64> {
    match direction {
        Direction::Tangential => dtn_eigen_tangential(q),
        Direction::Normal => dtn_eigen_normal(q),
    }
}

/// NtD eigenvalue, the reciprocal of the DtN eigenvalue.
pub fn ntd_eigen(direction: Direction, q: SymbolQuery) -> Result<f64> {
    Ok(1.0 / dtn_eigen(direction, q)?)
}

// ---------------------------------------------------------------------------
// Double layer

/// `(Q_tE, Q_tF)`: `D̄[e^{2πiks} e_z] = Q_tE e_z + i Q_tF e_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubleLayerTangential {
    pub q_te: f64,
    pub q_tf: f64,
}

/// `(Q_nN, Q_nO, Q_nP)`:
/// `D̄[e^{2πiks} e_x] = Q_nN cosθ e_r − Q_nO sinθ e_θ + i Q_nP cosθ e_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubleLayerNormal {
    pub q_nn: f64,
    pub q_no: f64,
    pub q_np: f64,
}

fn dl_t(b: &BesselSet) -> DoubleLayerTangential {
    let z = b.z;
    let (i0, i1, k0, k1) = (b.i0, b.i1, b.k0, b.k1);
    DoubleLayerTangential {
        q_te: z * z * (i0 * k0 - i1 * k1) - 0.5 * z * (i0 * k1 - i1 * k0),
        q_tf: -z * z * (i1 * k0 - i0 * k1) - z * i1 * k1,
    }
}

fn dl_n(b: &BesselSet) -> DoubleLayerNormal {
    let z = b.z;
    let (i0, i1, k0, k1) = (b.i0, b.i1, b.k0, b.k1);
    DoubleLayerNormal {
        q_nn: z * z * (i1 * k1 - i0 * k0) + 1.5 * z * (i1 * k0 - i0 * k1) + 2.0 * i1 * k1,
        q_no: -0.5 * z * (i1 * k0 - i0 * k1) - 2.0 * i1 * k1,
        q_np: z * z * (i0 * k1 - i1 * k0) - z * i1 * k1,
    }
}

fn positive_z(z: f64) -> Result<BesselSet> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("double-layer symbol needs z > 0, got {z}")));
    }
    BesselSet::new(z)
}

pub fn double_layer_tangential(z: f64) -> Result<DoubleLayerTangential> {
    Ok(dl_t(&positive_z(z)?))
}

pub fn double_layer_normal(z: f64) -> Result<DoubleLayerNormal> {
    Ok(dl_n(&positive_z(z)?))
}

// ---------------------------------------------------------------------------
// Single layer, forward

fn sl_fwd_t(b: &BesselSet, eps: f64) -> Matrix2<Complex64> {
    let h = 0.5 * b.z;
    let (i0, i1, k0, k1) = (b.i0, b.i1, b.k0, b.k1);
    let a = i0 * k0 + h * (i1 * k0 - i0 * k1);
    let c = i1 * k1 + h * (i1 * k0 - i0 * k1);
    let off = h * (i0 * k0 - i1 * k1);
    let r = |x: f64| Complex64::new(eps * x, 0.0);
    let im = |x: f64| Complex64::new(0.0, eps * x);
    Matrix2::new(r(a), im(off), im(-off), r(c))
}

fn sl_fwd_n(b: &BesselSet, eps: f64) -> Matrix3<Complex64> {
    let z = b.z;
    let (i0, i1, k0, k1) = (b.i0, b.i1, b.k0, b.k1);
    let ik10 = i1 * k0 - i0 * k1;
    let q_h = -(1.5 / z) * ik10 - 3.0 / (z * z) * i1 * k1 + 0.5 * z * (i0 * k1 - i1 * k0) + (i0 * k0 - i1 * k1);
    let q_i = -(1.5 / z) * ik10 - 3.0 / (z * z) * i1 * k1 + 0.5 * (i0 * k0 - i1 * k1);
    let q_j = 0.5 * z * (i1 * k1 - i0 * k0) + 0.5 * ik10 + i1 * k1 / z;
    let q_k = -((1.5 / z) * ik10 + 3.0 / (z * z) * i1 * k1 - i0 * k0);
    let q_l = 0.5 * ik10 + i1 * k1 / z;
    let q_m = 0.5 * z * (i0 * k1 - i1 * k0);
    let r = |x: f64| Complex64::new(eps * x, 0.0);
    let im = |x: f64| Complex64::new(0.0, eps * x);
    Matrix3::new(
        r(q_h), r(q_i), im(-q_j),
        r(q_i), r(q_k), im(-q_l),
        im(q_j), im(q_l), r(q_m),
    )
}

/// `ε` times the forward single-layer symbol on `(e_z, e_r)`, acting on
/// coefficient vectors of `(f_z e_z + f_r e_r) e^{2πiks}`.
pub fn single_layer_forward_tangential(q: SymbolQuery) -> Result<Matrix2<Complex64>> {
    let b = q.nonzero()?;
    Ok(sl_fwd_t(&b, q.eps))
}

/// `ε` times the forward single-layer symbol on `(cosθ e_r, sinθ e_θ, cosθ e_z)`.
pub fn single_layer_forward_normal(q: SymbolQuery) -> Result<Matrix3<Complex64>> {
    let b = q.nonzero()?;
    Ok(sl_fwd_n(&b, q.eps))
}

// ---------------------------------------------------------------------------
// Single layer, inverse

/// Components `m_tA, m_tB, m_tC` of the inverse tangential single layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlInverseTangential {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SlInverseTangential {
    /// The matrix `ε M⁻¹` acts by (without the `ε⁻¹`) on `(e_z, e_r)`.
    pub fn matrix(&self) -> Matrix2<Complex64> {
        let r = |x: f64| Complex64::new(x, 0.0);
        let im = |x: f64| Complex64::new(0.0, x);
        Matrix2::new(r(self.a), im(-self.b), im(self.b), r(self.c))
    }
}

/// Components `m_nA … m_nF` of the inverse normal single layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlInverseNormal {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl SlInverseNormal {
    /// Matrix on `(cosθ e_r, sinθ e_θ, cosθ e_z)` coefficients.
    pub fn matrix(&self) -> Matrix3<Complex64> {
        let r = |x: f64| Complex64::new(x, 0.0);
        let im = |x: f64| Complex64::new(0.0, x);
        Matrix3::new(
            r(self.a), r(self.b), im(self.c),
            r(self.b), r(self.d), im(-self.e),
            im(-self.c), im(self.e), r(self.f),
        )
    }
}

const SINGULAR_TOL: f64 = 1e-14;

fn sl_inv_t(b: &BesselSet) -> Result<SlInverseTangential> {
    let z = b.z;
    let r_k10 = b.k1 / b.k0;
    let r_k01 = b.k0 / b.k1;
    let r_i10 = b.i1 / b.i0;
    let r_i01 = b.i0 / b.i1;
    let q_a = (1.0 / (b.i0 * b.k0)) * (1.0 + 0.5 * z * (r_k01 - r_i01));
    let q_c = (1.0 / (b.i1 * b.k1)) * (1.0 + 0.5 * z * (r_i10 - r_k10));
    let q_b = 0.5 * z * (1.0 / (b.i1 * b.k1) - 1.0 / (b.i0 * b.k0));
    let q_d = (1.0 + 0.5 * z * (r_i10 - r_i01)) * (1.0 + 0.5 * z * (r_k01 - r_k10));
    if q_d.abs() < SINGULAR_TOL {
        return Err(Error::SingularSymbol(format!("Q_tD({z}) = {q_d:e}")));
    }
    Ok(SlInverseTangential { a: q_a / q_d, b: q_b / q_d, c: q_c / q_d })
}

fn sl_inv_n(b: &BesselSet) -> Result<SlInverseNormal> {
    let z = b.z;
    let ri = b.i1 / b.i0; // I1/I0
    let rk = b.k1 / b.k0; // K1/K0
    let ir = b.i0 / b.i1; // I0/I1
    let kr = b.k0 / b.k1; // K0/K1
    let p = 1.0 / (b.i1 * b.k1);
    let z2 = z * z;
    let q_a = p * (4.0 + 4.0 / z2 * ri * rk + 2.0 / z * (rk - ri) - 2.0 * z * (ir - kr) - 2.0 * (ir * rk + ri * kr));
    let q_b = p * (2.0 * rk * (ir - ri) + 2.0 * (ri * kr - 1.0) + 2.0 / z * (ri - rk) - 4.0 / z2 * ri * rk);
    let q_c = 2.0 * p * (2.0 / z * ri * rk + 2.0 * (ir - kr) + (ri - rk) + z * ir * kr - z - 4.0 / z);
    let q_d = p
        * (4.0 / z2 * ri * rk + 2.0 / z * (rk - ri) + 2.0 * (2.0 * ri * rk - ri * kr - ir * rk)
            + z2 * (ir - ri) * (kr - rk));
    let q_e = p * (4.0 / z * ri * rk - 4.0 / z + 2.0 * (ir - kr) + z * (ir - ri) * (kr - rk));
    let q_f = p
        * (12.0 / z2 + 6.0 / z * (kr - ir + rk - ri) - 3.0 * (ir * (kr + rk) + ri * kr) + (ri * rk + 8.0)
            + 2.0 * z * (kr - ir));
    let q_g = (2.0 / z + (1.0 - z * ir) * (ir - ri)) * (2.0 / z - (1.0 + z * kr) * (kr - rk));
    if q_g.abs() < SINGULAR_TOL {
        return Err(Error::SingularSymbol(format!("Q_nG({z}) = {q_g:e}")));
    }
    Ok(SlInverseNormal {
        a: q_a / q_g,
        b: q_b / q_g,
        c: q_c / q_g,
        d: q_d / q_g,
        e: q_e / q_g,
        f: q_f / q_g,
    })
}

pub fn single_layer_inverse_tangential(q: SymbolQuery) -> Result<SlInverseTangential> {
    sl_inv_t(&q.nonzero()?)
}

pub fn single_layer_inverse_normal(q: SymbolQuery) -> Result<SlInverseNormal> {
    sl_inv_n(&q.nonzero()?)
}

// ---------------------------------------------------------------------------
// Angle-averaged inverse single layer

/// `(m_r, m_θ, m_z)` of the angle-averaged inverse single layer for one
/// direction; the operator multiplies by `π(m_r f_r + m_θ f_θ + m_z f_z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleAveraged {
    pub r: Entry,
    pub theta: Entry,
    pub z: Entry,
}

pub fn angle_averaged(direction: Direction, q: SymbolQuery) -> Result<AngleAveraged> {
    match direction {
        Direction::Tangential => {
            let m = single_layer_inverse_tangential(q)?;
            Ok(AngleAveraged {
                r: Entry::imag(-2.0 * m.b),
                theta: Entry::real(0.0),
                z: Entry::real(2.0 * m.a),
            })
        }
        Direction::Normal => {
            let m = single_layer_inverse_normal(q)?;
            Ok(AngleAveraged {
                r: Entry::real(m.a - m.b),
                theta: Entry::real(m.b - m.d),
                z: Entry::imag(m.c + m.e),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Composition

/// `2π(m_tA(½ − Q_tE) − m_tB Q_tF)`: the angle-averaged inverse single layer
/// applied to `(½I − D̄) e_z = (½ − Q_tE) e_z − i Q_tF e_r`.
pub fn compose_tangential(m: &SlInverseTangential, d: &DoubleLayerTangential) -> f64 {
    2.0 * PI * (m.a * (0.5 - d.q_te) - m.b * d.q_tf)
}

/// Normal analogue on `(½I − D̄) e_x = (½ − Q_nN) cosθ e_r + (Q_nO − ½) sinθ e_θ − i Q_nP cosθ e_z`.
pub fn compose_normal(m: &SlInverseNormal, d: &DoubleLayerNormal) -> f64 {
    PI * ((m.a - m.b) * (0.5 - d.q_nn) + (m.b - m.d) * (d.q_no - 0.5) + (m.c + m.e) * d.q_np)
}

fn bi_t(b: &BesselSet) -> Result<f64> {
    Ok(compose_tangential(&sl_inv_t(b)?, &dl_t(b)))
}

fn bi_n(b: &BesselSet) -> Result<f64> {
    Ok(compose_normal(&sl_inv_n(b)?, &dl_n(b)))
}

/// DtN eigenvalue recovered by applying the angle-averaged inverse single
/// layer to `(½I − D̄)` of the mode.
pub fn dtn_via_boundary_integral(direction: Direction, q: SymbolQuery) -> Result<f64> {
    let b = q.nonzero()?;
    match direction {
        Direction::Tangential => bi_t(&b),
        Direction::Normal => bi_n(&b),
    }
}

// ---------------------------------------------------------------------------
// Semigroup

/// `exp(−τ (2πk)⁴ m(k))`; equal to 1 at `k = 0` or `τ = 0`.
pub fn semigroup_factor(direction: Direction, q: SymbolQuery, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!("tau must be nonnegative, got {tau}")));
    }
    if q.k == 0 || tau == 0.0 {
        return Ok(1.0);
    }
    let m = ntd_eigen(direction, q)?;
    let w = (2.0 * PI * q.k as f64).powi(4);
    Ok((-tau * w * m).exp())
}

// ---------------------------------------------------------------------------
// Tables

/// How the `k = 0` entry of a table is filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZeroMode {
    /// Copy of the `k = ±1` value.
    NearestMode,
}

impl ZeroMode {
    pub fn name(self) -> &'static str {
        match self {
            ZeroMode::NearestMode => "nearest-mode",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    DtnT,
    DtnN,
    NtdT,
    NtdN,
    BiT,
    BiN,
}

impl Family {
    pub const ALL: [Family; 6] = [Family::DtnT, Family::DtnN, Family::NtdT, Family::NtdN, Family::BiT, Family::BiN];

    pub fn name(self) -> &'static str {
        match self {
            Family::DtnT => "m_t_inv",
            Family::DtnN => "m_n_inv",
            Family::NtdT => "m_t",
            Family::NtdN => "m_n",
            Family::BiT => "bi_t",
            Family::BiN => "bi_n",
        }
    }

    fn eval(self, b: &BesselSet) -> Result<f64> {
        match self {
            Family::DtnT => Ok(mt_inv(b)),
            Family::DtnN => Ok(mn_inv(b)),
            Family::NtdT => Ok(1.0 / mt_inv(b)),
            Family::NtdN => Ok(1.0 / mn_inv(b)),
            Family::BiT => bi_t(b),
            Family::BiN => bi_n(b),
        }
    }
}

/// Per-mode values of one symbol family for `k ∈ [−kmax, kmax]`.
#[derive(Debug, Clone, Serialize)]
pub struct MultiplierTable {
    pub family: Family,
    pub eps: f64,
    pub zero_mode: ZeroMode,
    /// `(k, z, value)` rows in increasing `k`.
    pub entries: Vec<(i64, f64, f64)>,
}

impl MultiplierTable {
    pub fn get(&self, k: i64) -> Option<f64> {
        let kmax = (self.entries.len() as i64 - 1) / 2;
        if k.abs() > kmax {
            return None;
        }
        Some(self.entries[(k + kmax) as usize].2)
    }
}

pub fn build_table(family: Family, eps: f64, kmax: usize) -> Result<MultiplierTable> {
    if kmax == 0 {
        return Err(Error::Domain("kmax must be at least 1".into()));
    }
    SymbolQuery::new(eps, 1)?;
    let kmax = kmax as i64;
    let mut positive = Vec::with_capacity(kmax as usize);
    for k in 1..=kmax {
        let q = SymbolQuery { eps, k };
        positive.push((q.z(), family.eval(&BesselSet::new(q.z())?)?));
    }
    let mut entries = Vec::with_capacity(2 * kmax as usize + 1);
    for k in -kmax..=kmax {
        let (z, v) = if k == 0 { (0.0, positive[0].1) } else { positive[(k.abs() - 1) as usize] };
        entries.push((k, z, v));
    }
    Ok(MultiplierTable { family, eps, zero_mode: ZeroMode::NearestMode, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mode_rejected() {
        let q = SymbolQuery::new(0.01, 0).unwrap();
        assert!(matches!(dtn_eigen_tangential(q), Err(Error::ZeroMode(_))));
        assert!(matches!(single_layer_inverse_normal(q), Err(Error::ZeroMode(_))));
        assert_eq!(semigroup_factor(Direction::Normal, q, 1.0).unwrap(), 1.0);
        assert!(double_layer_tangential(0.0).is_err());
    }

    #[test]
    fn table_shape() {
        let t = build_table(Family::BiN, 0.01, 8).unwrap();
        assert_eq!(t.entries.len(), 17);
        assert_eq!(t.get(3), t.get(-3));
        assert_eq!(t.get(0), t.get(1));
        assert!(t.get(9).is_none());
    }
}
