//! One-dimensional quadrature rules used by the kernel integrals.

use gauss_quad::GaussLegendre;
use std::num::NonZeroUsize;

/// Gauss–Legendre nodes and weights mapped to `[a, b]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let n = NonZeroUsize::new(n.max(1)).expect("nonzero");
        let gl = GaussLegendre::new(n);
        let (nodes, weights) = gl.as_node_weight_pairs().iter().copied().unzip();
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights on `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Tanh-sinh quadrature on `[a, b]`, tolerant of integrable endpoint
/// singularities. Halves the step until successive estimates agree to `tol`.
pub fn tanh_sinh(a: f64, b: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let half = 0.5 * (b - a);
    let tmax = 4.5;
    // Abscissae are formed from the distance to the nearer endpoint so that
    // points crowding an endpoint do not round onto it.
    let eval = |t: f64| -> f64 {
        let sh = FRAC_PI_2 * t.sinh();
        let ch = FRAC_PI_2 * t.cosh();
        let e = (-2.0 * sh.abs()).exp();
        let gap = 2.0 * e / (1.0 + e); // 1 - |tanh(sh)|
        let w = ch * 4.0 * e / ((1.0 + e) * (1.0 + e)); // ch * sech²(sh)
        if gap * half == 0.0 {
            return 0.0;
        }
        let x = if t < 0.0 { a + half * gap } else { b - half * gap };
        if x <= a || x >= b {
            return 0.0;
        }
        f(x) * w * half
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= tmax {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut est = sum * h;
    for _level in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= tmax {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let next = sum * h;
        if (next - est).abs() <= tol * next.abs().max(1e-300) {
            return next;
        }
        est = next;
    }
    est
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_polynomial_exact() {
        let g = GaussRule::new(5);
        let v = g.integrate(0.0, 2.0, |x| x.powi(9));
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-10);
    }

    #[test]
    fn tanh_sinh_log_singularity() {
        let v = tanh_sinh(0.0, 1.0, 1e-14, |x| x.ln());
        assert!((v + 1.0).abs() < 1e-13, "{v}");
        let v = tanh_sinh(0.0, 1.0, 1e-14, |x| 1.0 / x.sqrt());
        assert!((v - 2.0).abs() < 1e-12, "{v}");
    }
}
