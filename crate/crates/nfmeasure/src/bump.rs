//! Smooth compactly supported profiles φ, φ₀, ψ. Everything is a tensor
//! product of the standard mollifier m(t) = exp(-1/(1-t²)), so all Fourier
//! transforms reduce to the 1-D transforms of m and m², which are computed by
//! Gauss–Legendre quadrature and memoized by exact frequency.
//!
//! Convention throughout: f̂(ξ) = ∫ e^{-2πi x·ξ} f(x) dx.

use crate::quadrature::integrate;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

pub fn m_bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

static M_HAT_CACHE: Lazy<Mutex<HashMap<u64, f64>>> = Lazy::new(|| Mutex::new(HashMap::new()));
static M2_HAT_CACHE: Lazy<Mutex<HashMap<u64, f64>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// Composite quadrature over [-1,1]: fixed 64-point Gauss panels, at least
/// ~32 nodes per oscillation period of cos(2πξt).
fn oscillatory_ft(f: impl Fn(f64) -> f64, xi: f64) -> f64 {
    let panels = (xi.abs() / 1.0).ceil().max(32.0).min(200_000.0) as usize;
    let w = 2.0 / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        let a = -1.0 + i as f64 * w;
        acc += integrate(64, a, a + w, |t| {
            f(t) * (2.0 * std::f64::consts::PI * xi * t).cos()
        });
    }
    acc
}

/// ∫_{-1}^{1} m(t) cos(2πξt) dt (m is even, so the transform is real even).
pub fn m_hat_raw(xi: f64) -> f64 {
    let key = xi.abs().to_bits();
    if let Some(&v) = M_HAT_CACHE.lock().unwrap().get(&key) {
        return v;
    }
    let v = oscillatory_ft(m_bump, xi);
    M_HAT_CACHE.lock().unwrap().insert(key, v);
    v
}

/// ∫_{-1}^{1} m(t)² cos(2πξt) dt.
pub fn m2_hat_raw(xi: f64) -> f64 {
    let key = xi.abs().to_bits();
    if let Some(&v) = M2_HAT_CACHE.lock().unwrap().get(&key) {
        return v;
    }
    let v = oscillatory_ft(|t| m_bump(t) * m_bump(t), xi);
    M2_HAT_CACHE.lock().unwrap().insert(key, v);
    v
}

/// Profile parameters: quadrature order policy plus derived normalizations.
#[derive(Debug, Clone)]
pub struct BumpProfile {
    /// ∫ m over [-1,1].
    pub int_m: f64,
    /// Normalization 1/∫m, so that c·m has unit integral.
    pub c_norm: f64,
    /// ∫ (c·m)² — value of phi_sq_hat at 0 per coordinate.
    pub int_cm_sq: f64,
    /// m(1/2), the ψ normalizer.
    pub m_half: f64,
    /// Base quadrature order (grows with frequency automatically).
    pub quad_order: usize,
}

pub static PROFILE: Lazy<BumpProfile> = Lazy::new(|| {
    let int_m = integrate(2000, -1.0, 1.0, m_bump);
    let c_norm = 1.0 / int_m;
    let int_cm_sq = integrate(2000, -1.0, 1.0, |t| {
        let v = c_norm * m_bump(t);
        v * v
    });
    BumpProfile {
        int_m,
        c_norm,
        int_cm_sq,
        m_half: m_bump(0.5),
        quad_order: 2000,
    }
});

// ---------------------------------------------------------------------------
// φ: the unit-mass bump on [-1,1]^d.
// ---------------------------------------------------------------------------

pub fn phi_eval(x: &[f64]) -> f64 {
    let c = PROFILE.c_norm;
    x.iter().map(|&t| c * m_bump(t)).product()
}

/// 1-D transform of c·m; real, even, value 1 at 0.
pub fn phi_hat_1d(xi: f64) -> f64 {
    PROFILE.c_norm * m_hat_raw(xi)
}

pub fn phi_hat(xi: &[f64]) -> Complex64 {
    Complex64::new(xi.iter().map(|&v| phi_hat_1d(v)).product(), 0.0)
}

/// 1-D transform of (c·m)².
pub fn phi_sq_hat_1d(xi: f64) -> f64 {
    PROFILE.c_norm * PROFILE.c_norm * m2_hat_raw(xi)
}

pub fn phi_sq_hat(xi: &[f64]) -> Complex64 {
    Complex64::new(xi.iter().map(|&v| phi_sq_hat_1d(v)).product(), 0.0)
}

// ---------------------------------------------------------------------------
// φ₀: unit-mass bump with per-coordinate support [1/8, 3/8] (a subset of the
// union of intervals the construction allows), keeping supp(φ₀) ⊂ (0,1)^d.
// ---------------------------------------------------------------------------

pub fn phi0_eval_1d(x: f64) -> f64 {
    8.0 * PROFILE.c_norm * m_bump(8.0 * x - 2.0)
}

pub fn phi0_eval(x: &[f64]) -> f64 {
    x.iter().map(|&t| phi0_eval_1d(t)).product()
}

/// FT of the 1-D factor: shift of the rescaled bump gives a phase times the
/// real transform, e^{-iπξ/2}·(c·m)^(ξ/8).
pub fn phi0_hat_1d(xi: f64) -> Complex64 {
    let phase = -std::f64::consts::PI * xi / 2.0;
    Complex64::new(phase.cos(), phase.sin()) * phi_hat_1d(xi / 8.0)
}

pub fn phi0_hat(xi: &[f64]) -> Complex64 {
    xi.iter().map(|&v| phi0_hat_1d(v)).product()
}

// ---------------------------------------------------------------------------
// ψ: ≥ 1 on [-1,1]^d, supported in [-2,2]^d.
// ---------------------------------------------------------------------------

pub fn psi_eval(x: &[f64]) -> f64 {
    let mh = PROFILE.m_half;
    x.iter().map(|&t| m_bump(t / 2.0) / mh).product()
}

pub fn psi_hat_1d(xi: f64) -> f64 {
    2.0 * m_hat_raw(2.0 * xi) / PROFILE.m_half
}

pub fn psi_hat(xi: &[f64]) -> Complex64 {
    Complex64::new(xi.iter().map(|&v| psi_hat_1d(v)).product(), 0.0)
}

// ---------------------------------------------------------------------------
// Derived constants.
// ---------------------------------------------------------------------------

/// Fitted far-field constant: C_N = max over a log grid of |φ̂₁d(ξ)|(1+|ξ|)^N.
pub fn schwartz_constant(n: u32, xi_max: f64) -> f64 {
    let mut c = 0.0f64;
    let mut xi = 0.25f64;
    while xi <= xi_max {
        c = c.max(phi_hat_1d(xi).abs() * (1.0 + xi).powi(n as i32));
        xi *= 1.1;
    }
    c
}

/// The §8 constant: largest c with φ̂²(ξ) ≥ c whenever |ξ| ≤ c, found by
/// bisection with the minimum over the ball probed on a direction grid.
pub fn small_c(d: usize) -> f64 {
    let min_on_ball = |r: f64| -> f64 {
        // Π phi_sq_hat_1d(ξ_i) over |ξ| = r, probed on a grid of directions
        // (including axes and the diagonal, where extrema of products occur).
        let mut best = f64::INFINITY;
        let steps = 16;
        let mut dir = vec![0.0f64; d];
        fn rec(i: usize, left: f64, dir: &mut Vec<f64>, steps: usize, r: f64, best: &mut f64) {
            let d = dir.len();
            if i == d - 1 {
                dir[i] = left.sqrt();
                let v: f64 = dir.iter().map(|&u| super::bump::phi_sq_hat_1d(r * u)).product();
                *best = best.min(v);
                return;
            }
            for s in 0..=steps {
                let frac = s as f64 / steps as f64;
                dir[i] = (left * frac).sqrt();
                rec(i + 1, left * (1.0 - frac), dir, steps, r, best);
            }
        }
        rec(0, 1.0, &mut dir, steps, r, &mut best);
        best
    };
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if min_on_ball(mid) >= mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Stable digest of the profile parameters, embedded in report headers.
pub fn profile_hash() -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(PROFILE.int_m.to_le_bytes());
    h.update(PROFILE.int_cm_sq.to_le_bytes());
    h.update(PROFILE.m_half.to_le_bytes());
    h.update((PROFILE.quad_order as u64).to_le_bytes());
    for xi in [0.5f64, 1.0, 2.0, 5.0] {
        h.update(phi_hat_1d(xi).to_le_bytes());
    }
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Independent oracle: plain midpoint rule with many points.
    fn midpoint_ft(f: impl Fn(f64) -> f64, a: f64, b: f64, xi: f64) -> Complex64 {
        let n = 400_000;
        let h = (b - a) / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let x = a + (i as f64 + 0.5) * h;
            let ph = -2.0 * std::f64::consts::PI * xi * x;
            acc += f(x) * Complex64::new(ph.cos(), ph.sin());
        }
        acc * h
    }

    #[test]
    fn normalizations() {
        assert!((phi_hat(&[0.0, 0.0]).re - 1.0).abs() < 1e-12);
        assert!((phi0_hat(&[0.0, 0.0]).re - 1.0).abs() < 1e-12);
        assert!(phi_sq_hat(&[0.0, 0.0]).re > 0.0);
        assert!((PROFILE.c_norm - 2.25229).abs() < 1e-4);
    }

    #[test]
    fn supports() {
        assert_eq!(phi_eval(&[1.0, 0.0]), 0.0);
        assert_eq!(phi_eval(&[0.5, -1.2]), 0.0);
        assert!(phi_eval(&[0.0, 0.0]) > 0.0);
        assert_eq!(phi0_eval(&[0.0, 0.0]), 0.0);
        assert!(phi0_eval(&[0.25, 0.25]) > 0.0);
        assert_eq!(phi0_eval(&[0.5, 0.25]), 0.0);
        assert!(psi_eval(&[0.0]) >= 1.0);
        assert_eq!(psi_eval(&[3.0, 0.0]), 0.0);
    }

    #[test]
    fn phi_hat_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..8 {
            let xi = rng.gen_range(-20.0..20.0);
            let oracle = midpoint_ft(|t| PROFILE.c_norm * m_bump(t), -1.0, 1.0, xi);
            let got = phi_hat_1d(xi);
            assert!((got - oracle.re).abs() < 1e-10, "xi={xi}");
            assert!(oracle.im.abs() < 1e-10);
        }
    }

    #[test]
    fn phi_sq_hat_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..6 {
            let xi = rng.gen_range(-15.0..15.0);
            let c = PROFILE.c_norm;
            let oracle = midpoint_ft(|t| c * c * m_bump(t) * m_bump(t), -1.0, 1.0, xi);
            assert!((phi_sq_hat_1d(xi) - oracle.re).abs() < 1e-10, "xi={xi}");
        }
    }

    #[test]
    fn phi0_hat_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..6 {
            let xi = rng.gen_range(-30.0..30.0);
            let oracle = midpoint_ft(phi0_eval_1d, 0.125, 0.375, xi);
            let got = phi0_hat_1d(xi);
            assert!((got - oracle).norm() < 1e-10, "xi={xi}");
        }
    }

    #[test]
    fn psi_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10_000 {
            let x = [rng.gen_range(-2.5..2.5), rng.gen_range(-2.5..2.5)];
            let v = psi_eval(&x);
            let in_b = x.iter().all(|t| t.abs() <= 1.0);
            let in_2b = x.iter().all(|t| t.abs() < 2.0);
            if in_b {
                assert!(v >= 1.0, "{x:?}");
            }
            if !in_2b {
                assert_eq!(v, 0.0, "{x:?}");
            }
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn schwartz_envelope_monotone_in_n() {
        // Fitted constants exist for every N ≤ 12: the envelope check is that
        // |φ̂(ξ)|(1+|ξ|)^N stays below its fitted max across the grid.
        let mut prev = 0.0;
        for n in 1..=12 {
            let c = schwartz_constant(n, 1e4);
            assert!(c.is_finite() && c > 0.0);
            assert!(c >= prev, "envelope constant should grow with N");
            prev = c;
        }
    }

    #[test]
    fn small_c_is_valid() {
        let c = small_c(2);
        assert!(c > 0.0 && c < 1.0);
        // Spot-check the defining property on the ball |ξ| ≤ c.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = rng.gen_range(0.0..c);
            let v = phi_sq_hat(&[r * a.cos(), r * a.sin()]).re;
            assert!(v >= c - 1e-9, "r={r} v={v} c={c}");
        }
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(profile_hash(), profile_hash());
        assert_eq!(profile_hash().len(), 64);
    }
}
