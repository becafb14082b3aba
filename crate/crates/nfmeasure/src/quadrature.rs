//! Gauss–Legendre quadrature. Nodes/weights on [-1, 1] are computed by Newton
//! iteration on the Legendre polynomial and cached per order.

use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

static CACHE: Lazy<Mutex<HashMap<usize, &'static GaussRule>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

#[derive(Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Legendre P_n(x) and derivative P_n'(x) by the standard three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

pub fn gauss_legendre(n: usize) -> &'static GaussRule {
    assert!(n >= 1);
    let mut cache = CACHE.lock().unwrap();
    if let Some(r) = cache.get(&n) {
        return r;
    }
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let rule: &'static GaussRule = Box::leak(Box::new(GaussRule { nodes, weights }));
    cache.insert(n, rule);
    rule
}

/// ∫_a^b f(x) dx with an n-point rule.
pub fn integrate<F: FnMut(f64) -> f64>(n: usize, a: f64, b: f64, mut f: F) -> f64 {
    let rule = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        s += w * f(mid + half * x);
    }
    s * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1usize, 2, 5, 20, 100, 500] {
            let r = gauss_legendre(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-12, "n={n} sum={s}");
        }
    }

    #[test]
    fn exact_on_polynomials() {
        // n-point rule is exact through degree 2n-1.
        let v = integrate(4, -1.0, 1.0, |x| x.powi(6));
        assert!((v - 2.0 / 7.0).abs() < 1e-13);
        let v = integrate(3, 0.0, 2.0, |x| 3.0 * x * x);
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_integral() {
        let v = integrate(40, 0.0, std::f64::consts::PI, |x| x.sin());
        assert!((v - 2.0).abs() < 1e-13);
    }
}
