//! Modified Bessel functions of integer order 0, 1, 2 and the ratio functions
//! built from them.
//!
//! Every routine has an exponentially scaled form, `e^{-z} I_n(z)` and
//! `e^{z} K_n(z)`, and all ratios are formed from scaled values so nothing
//! overflows for arguments up to several hundred.
//!
//! ```
//! use sbf::specfun::{bessel_i, bessel_k};
//! let z = 0.5;
//! let w = z * (bessel_k(1, z).unwrap() * bessel_i(0, z).unwrap()
//!     + bessel_k(0, z).unwrap() * bessel_i(1, z).unwrap());
//! assert!((w - 1.0).abs() < 1e-14);
//! ```

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Above this argument `I_n` switches from the power series to the
/// large-argument expansion.
const I_SERIES_MAX: f64 = 17.0;

/// Above this argument `K_n` switches from the log series to Steed's
/// continued fraction.
const K_SERIES_MAX: f64 = 2.0;

/// The four Bessel ratios used by the straight-cylinder symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioKind {
    K1K0,
    K0K1,
    I1I0,
    I0I1,
}

impl RatioKind {
    pub const ALL: [RatioKind; 4] = [RatioKind::K1K0, RatioKind::K0K1, RatioKind::I1I0, RatioKind::I0I1];

    pub fn name(self) -> &'static str {
        match self {
            RatioKind::K1K0 => "K1/K0",
            RatioKind::K0K1 => "K0/K1",
            RatioKind::I1I0 => "I1/I0",
            RatioKind::I0I1 => "I0/I1",
        }
    }
}

fn check_order(order: u32) -> Result<()> {
    if order > 2 {
        return Err(Error::Domain(format!("Bessel order {order} not supported (0, 1, 2 only)")));
    }
    Ok(())
}

/// `I_n(z)` by its power series, all terms positive.
fn i_series(order: u32, z: f64) -> f64 {
    let half = 0.5 * z;
    let q = half * half;
    let mut term = match order {
        0 => 1.0,
        1 => half,
        _ => 0.5 * q,
    };
    let mut sum = term;
    if q == 0.0 {
        return sum;
    }
    let n = order as f64;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + n));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
        k += 1.0;
    }
    sum
}

/// `e^{-z} I_n(z) · sqrt(2πz)` from the large-argument expansion.
fn i_asymptotic_core(order: u32, z: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (k * 8.0 * z);
        if next.abs() >= term.abs() || next == 0.0 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        k += 1.0;
    }
    sum
}

/// Exponentially scaled `e^{-z} I_n(z)` for `n ∈ {0,1,2}`, `z ≥ 0`.
pub fn bessel_i_scaled(order: u32, z: f64) -> Result<f64> {
    check_order(order)?;
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("I_{order} needs z >= 0, got {z}")));
    }
    if z <= I_SERIES_MAX {
        Ok(i_series(order, z) * (-z).exp())
    } else {
        Ok(i_asymptotic_core(order, z) / (2.0 * std::f64::consts::PI * z).sqrt())
    }
}

/// `I_n(z)` for `n ∈ {0,1,2}`, `z ≥ 0`.
pub fn bessel_i(order: u32, z: f64) -> Result<f64> {
    check_order(order)?;
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("I_{order} needs z >= 0, got {z}")));
    }
    if z <= I_SERIES_MAX {
        Ok(i_series(order, z))
    } else {
        Ok(bessel_i_scaled(order, z)? * z.exp())
    }
}

/// `(K_0, K_1)` from the series with logarithmic term, valid for small `z`.
fn k01_series(z: f64) -> (f64, f64) {
    let half = 0.5 * z;
    let q = half * half;
    let lg = half.ln();
    let i0 = i_series(0, z);
    let i1 = i_series(1, z);

    // K0 = -(ln(z/2) + γ) I0 + Σ_{k≥1} H_k q^k/(k!)²
    let mut t0 = 1.0;
    let mut h = 0.0;
    let mut s0 = 0.0;
    // K1 = 1/z + ln(z/2) I1 - (z/4) Σ_{k≥0} (ψ(k+1)+ψ(k+2)) q^k/(k!(k+1)!)
    let mut t1 = 1.0;
    let mut s1 = 2.0 * (-EULER_GAMMA) + 1.0;
    let mut k = 1.0;
    loop {
        t0 *= q / (k * k);
        h += 1.0 / k;
        s0 += t0 * h;
        t1 *= q / (k * (k + 1.0));
        let psi_sum = 2.0 * (h - EULER_GAMMA) + 1.0 / (k + 1.0);
        s1 += t1 * psi_sum;
        if t0 * h < 1e-17 * s0.abs() && t1 * psi_sum.abs() < 1e-17 * s1.abs() {
            break;
        }
        k += 1.0;
    }
    let k0 = -(lg + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / z + lg * i1 - 0.25 * z * s1;
    (k0, k1)
}

/// Scaled `(e^z K_0, e^z K_1)` by Steed's continued fraction, for `z ≳ 2`.
fn k01_scaled_cf(z: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + z);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * z)).sqrt() / s;
    let k1 = k0 * (z + 0.5 - h) / z;
    (k0, k1)
}

fn k_scaled_all(z: f64) -> (f64, f64, f64) {
    let (k0, k1) = if z <= K_SERIES_MAX {
        let (k0, k1) = k01_series(z);
        let e = z.exp();
        (k0 * e, k1 * e)
    } else {
        k01_scaled_cf(z)
    };
    (k0, k1, k0 + 2.0 * k1 / z)
}

/// Exponentially scaled `e^{z} K_n(z)` for `n ∈ {0,1,2}`, `z > 0`.
/// `K_2` comes from `K_2 = K_0 + 2 K_1 / z`.
pub fn bessel_k_scaled(order: u32, z: f64) -> Result<f64> {
    check_order(order)?;
    if !(z > 0.0) {
        return Err(Error::Domain(format!("K_{order} needs z > 0, got {z}")));
    }
    let (k0, k1, k2) = k_scaled_all(z);
    Ok(match order {
        0 => k0,
        1 => k1,
        _ => k2,
    })
}

/// `K_n(z)` for `n ∈ {0,1,2}`, `z > 0`.
pub fn bessel_k(order: u32, z: f64) -> Result<f64> {
    check_order(order)?;
    if !(z > 0.0) {
        return Err(Error::Domain(format!("K_{order} needs z > 0, got {z}")));
    }
    if z <= K_SERIES_MAX {
        let (k0, k1) = k01_series(z);
        return Ok(match order {
            0 => k0,
            1 => k1,
            _ => k0 + 2.0 * k1 / z,
        });
    }
    Ok(bessel_k_scaled(order, z)? * (-z).exp())
}

/// All scaled values needed by the symbols at one argument.
///
/// `i*` hold `e^{-z} I_n(z)`, `k*` hold `e^{z} K_n(z)`, so products `i_a k_b`
/// equal the unscaled products `I_a K_b`.
#[derive(Debug, Clone, Copy)]
pub struct BesselSet {
    pub z: f64,
    pub i0: f64,
    pub i1: f64,
    pub i2: f64,
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
}

impl BesselSet {
    pub fn new(z: f64) -> Result<Self> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Domain(format!("Bessel set needs finite z > 0, got {z}")));
        }
        let (k0, k1, k2) = k_scaled_all(z);
        Ok(BesselSet {
            z,
            i0: bessel_i_scaled(0, z)?,
            i1: bessel_i_scaled(1, z)?,
            i2: bessel_i_scaled(2, z)?,
            k0,
            k1,
            k2,
        })
    }

    pub fn ratio(&self, kind: RatioKind) -> f64 {
        match kind {
            RatioKind::K1K0 => self.k1 / self.k0,
            RatioKind::K0K1 => self.k0 / self.k1,
            RatioKind::I1I0 => self.i1 / self.i0,
            RatioKind::I0I1 => self.i0 / self.i1,
        }
    }
}

/// Ratio of Bessel functions evaluated through scaled values.
pub fn ratio(kind: RatioKind, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("ratio {} needs z > 0, got {z}", kind.name())));
    }
    Ok(BesselSet::new(z)?.ratio(kind))
}

/// Closed-form first derivative of a Bessel ratio.
pub fn ratio_derivative(kind: RatioKind, z: f64) -> Result<f64> {
    let r = ratio(kind, z)?;
    Ok(match kind {
        RatioKind::K1K0 => r * r - r / z - 1.0,
        RatioKind::K0K1 => r * r + r / z - 1.0,
        RatioKind::I1I0 => -r * r - r / z + 1.0,
        RatioKind::I0I1 => -r * r + r / z + 1.0,
    })
}

/// Cosine integral `Ci(x)` for `x > 0`.
///
/// Series below 4, auxiliary-function continued fraction above.
pub fn cosine_integral(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("Ci needs x > 0, got {x}")));
    }
    if x <= 4.0 {
        // Ci(x) = γ + ln x + Σ_{k≥1} (-x²)^k / (2k (2k)!)
        let mut term = 1.0;
        let mut sum = 0.0;
        let x2 = x * x;
        for k in 1..200 {
            let kk = k as f64;
            term *= -x2 / ((2.0 * kk - 1.0) * (2.0 * kk));
            let add = term / (2.0 * kk);
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        return Ok(EULER_GAMMA + x.ln() + sum);
    }
    // E1(ix) by the Lentz continued fraction; Ci(x) = -Re E1(ix).
    use num_complex::Complex64;
    let zi = Complex64::new(0.0, x);
    let one = Complex64::new(1.0, 0.0);
    let tiny = 1e-300;
    let mut b = zi + one;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = one / b;
    let mut h = d;
    for i in 1..10_000 {
        let fi = i as f64;
        let an = -fi * fi;
        b += 2.0;
        d = one / (b + d * an);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - one).norm() < 1e-16 {
            break;
        }
    }
    let e1 = h * Complex64::new(x.cos(), -x.sin());
    Ok(-e1.re)
}
