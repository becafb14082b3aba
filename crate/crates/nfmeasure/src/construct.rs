//! The construction pipeline: level parameters (τ, ρ, M_k, η_k, P_k, c_k, J_k),
//! periodic bump trains Φ_{I,η}, densities F_k, and the iterated measures μ_k
//! in both space and frequency.
//!
//! Space-side evaluation is exact bookkeeping over lattice points plus smooth
//! bump arithmetic. Frequency-side evaluation has two independent routes:
//!
//! * closed forms on the sparse spectrum ∪_I T(δ⁻¹I) (fast, exact indicators);
//! * a leaf atlas: the support of μ_k decomposes into finitely many boxes, each
//!   carrying a chain of bump factors, and every Fourier integral factors into
//!   per-coordinate Gauss–Legendre integrals on those boxes. This is the
//!   quadrature oracle the recursive route is tested against.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bump::{self, PROFILE};
use crate::idealalg::{
    different_ideal, enumerate_q, ideal_inverse, ideal_mul, ideal_norm, pick_j, FracIdeal,
    PrimeIdealRecord,
};
use crate::latgeo::{in_spectrum, points_in_box};
use crate::linalg::{clear_denominators, hnf, q_from_z, q_to_f64, qmat_mul, Q, Z};
use crate::nfcore::NumberField;
use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

/// Support of φ₀ per coordinate.
pub const SUPP_LO: f64 = 0.125;
pub const SUPP_HI: f64 = 0.375;

const ATLAS_CAP: usize = 2_000_000;
const BALL_LEAF_CAP: f64 = 400_000.0;

// ---------------------------------------------------------------------------
// Parameters.
// ---------------------------------------------------------------------------

/// One bump family inside F_k: the train Φ_{I,η_k} with its multiplier
/// (P_k for the J-train, 1 for Q(M_k) members).
#[derive(Debug, Clone)]
pub struct BumpFamily {
    /// The ideal I.
    pub ideal: FracIdeal,
    /// I⁻¹, the lattice of bump centers.
    pub inv: FracIdeal,
    /// Integer HNF rows of the spectrum sublattice T(δ⁻¹I) ⊆ Z^d.
    pub spectrum: Vec<Vec<i64>>,
    /// P_k for the J family, 1 otherwise.
    pub mult: f64,
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct Level {
    pub m: f64,
    /// η_k = M_k^{-(1+τ)}.
    pub eta: f64,
    /// P_k (0 on even levels).
    pub p_mult: f64,
    /// c_k = 1/(P_k N(J_k) + Σ_{I∈Q(M_k)} N(I)), exact.
    pub c_exact: Q,
    pub c: f64,
    pub j: Option<PrimeIdealRecord>,
    pub families: Vec<BumpFamily>,
    /// Σ over families of mult·N(I) = 1/c_k.
    pub weight_total: f64,
}

/// Everything derived from (K, τ, ρ, M list, N): levels with exact c_k,
/// picked J_k, spectrum sublattices, plus caches for support atlases and
/// far-field envelopes used by the truncated μ̂ recursion.
pub struct ConstructionParams {
    pub field: NumberField,
    pub tau: f64,
    pub rho: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub ms: Vec<f64>,
    pub levels: Vec<Level>,
    /// Schwartz order driving truncation budgets (desk default 24).
    pub schwartz_n: u32,
    pub growth_policy: String,
    pub warnings: Vec<String>,
    pub delta_inv: FracIdeal,
    atlas_cache: Mutex<HashMap<Vec<usize>, Arc<Atlas>>>,
    envelope_cache: Mutex<HashMap<usize, (f64, f64)>>,
}

impl std::fmt::Debug for ConstructionParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConstructionParams")
            .field("tau", &self.tau)
            .field("rho", &self.rho)
            .field("ms", &self.ms)
            .field("schwartz_n", &self.schwartz_n)
            .finish()
    }
}

/// Default growth policy: M_{k+1} = ceil(M_k^{3/2}).
pub fn default_growth(m1: f64, count: usize) -> Vec<f64> {
    let mut ms = Vec::with_capacity(count);
    let mut m = m1;
    for _ in 0..count {
        ms.push(m);
        m = m.powf(1.5).ceil();
    }
    ms
}

/// Integer HNF rows of T(δ⁻¹I).
fn spectrum_lattice(k: &NumberField, delta_inv: &FracIdeal, ideal: &FracIdeal) -> Result<Vec<Vec<i64>>> {
    let di = ideal_mul(k, delta_inv, ideal);
    let t_q: Vec<Vec<Q>> = k
        .trace_mat
        .iter()
        .map(|row| row.iter().map(q_from_z).collect())
        .collect();
    let rows_q = qmat_mul(&di.q_basis(), &t_q);
    let (den, rows_z) = clear_denominators(&rows_q);
    if !den.is_one() {
        return Err(Error::Numerical(
            "spectrum lattice T(δ⁻¹I) is not integral".into(),
        ));
    }
    let h = hnf(&rows_z);
    if h.len() != k.d {
        return Err(Error::Numerical("spectrum lattice is not full rank".into()));
    }
    let mut out = Vec::with_capacity(k.d);
    for row in h {
        let mut r = Vec::with_capacity(k.d);
        for v in row {
            r.push(v.to_i64().ok_or_else(|| {
                Error::Numerical("spectrum lattice entry exceeds i64".into())
            })?);
        }
        out.push(r);
    }
    Ok(out)
}

pub fn params_new(
    k: &NumberField,
    tau: f64,
    rho: f64,
    ms: &[f64],
    schwartz_n: u32,
) -> Result<ConstructionParams> {
    let d = k.d;
    if !(tau > 1.0) {
        return Err(Error::InvalidParam("tau must exceed 1".into()));
    }
    if !(-(d as f64) < rho && rho < d as f64) {
        return Err(Error::InvalidParam("rho must satisfy -d < rho < d".into()));
    }
    if ms.is_empty() {
        return Err(Error::InvalidParam("M list must be nonempty".into()));
    }
    for w in ms.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidParam("M list must be strictly increasing".into()));
        }
    }
    let rho_plus = rho.max(0.0);
    let rho_minus = (-rho).max(0.0);
    let delta = different_ideal(k)?;
    let delta_inv = ideal_inverse(k, &delta);
    let mut warnings = Vec::new();
    let mut levels = Vec::with_capacity(ms.len());
    for (idx, &m) in ms.iter().enumerate() {
        let lev = idx + 1; // 1-indexed level
        let eta = m.powf(-(1.0 + tau));
        let q_set = enumerate_q(k, m)?;
        if q_set.is_empty() {
            return Err(Error::InvalidParam(format!("Q({m}) is empty")));
        }
        let odd = lev % 2 == 1;
        let (j, p_mult, p_exact) = if odd {
            let j = pick_j(k, m, rho)?;
            // Exact P_k = M_k^{ρ⁻} when that power is an integer; otherwise the
            // nearest representable rational (recorded in the weight identity).
            let p = m.powf(rho_minus);
            let p_exact = if (p - p.round()).abs() < 1e-9 {
                q_from_z(Z::from(p.round() as i64))
            } else {
                Q::from_float(p).ok_or_else(|| Error::Numerical("bad P_k".into()))?
            };
            (Some(j), q_to_f64(&p_exact), p_exact)
        } else {
            (None, 0.0, Q::zero())
        };
        let mut denom = Q::zero();
        if let Some(jr) = &j {
            denom += &p_exact * q_from_z(jr.norm.clone());
        }
        for rec in &q_set {
            denom += q_from_z(rec.norm.clone());
        }
        let c_exact = denom.recip();
        let c = q_to_f64(&c_exact);

        let mut families = Vec::new();
        let mut push_family = |ideal: &FracIdeal, norm: f64, mult: f64| -> Result<()> {
            families.push(BumpFamily {
                ideal: ideal.clone(),
                inv: ideal_inverse(k, ideal),
                spectrum: spectrum_lattice(k, &delta_inv, ideal)?,
                mult,
                norm,
            });
            Ok(())
        };
        if let Some(jr) = &j {
            push_family(&jr.ideal, jr.norm.to_f64().unwrap(), p_mult)?;
        }
        for rec in &q_set {
            push_family(&rec.ideal, rec.norm.to_f64().unwrap(), 1.0)?;
        }
        // Desk-scale warnings: the squared-transform closed form and several
        // lemma constants need η_k < C_B⁻¹ N(I)^{-1/d}.
        for fam in &families {
            if eta >= fam.norm.powf(-1.0 / d as f64) / k.c_b {
                warnings.push(format!(
                    "level {lev}: eta = {eta:.3e} >= C_B^-1 N(I)^(-1/d) for N(I) = {}",
                    fam.norm
                ));
                break;
            }
        }
        levels.push(Level {
            m,
            eta,
            p_mult,
            c_exact,
            c,
            j,
            families,
            weight_total: 1.0 / c,
        });
    }
    // Adjacent-level support feasibility: bumps of level k+1 can meet the
    // level-k support only if the minimal center separation allows it.
    for w in levels.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let min_prod = a
            .families
            .iter()
            .flat_map(|fa| b.families.iter().map(move |fb| fa.norm * fb.norm))
            .fold(f64::INFINITY, f64::min);
        let sep = min_prod.powf(-1.0 / d as f64) / k.c_b;
        if sep > a.eta + b.eta {
            warnings.push(format!(
                "levels {:.0}->{:.0}: minimal center separation {sep:.3e} exceeds eta_k+eta_k+1 = {:.3e}; the refined measure may vanish",
                a.m, b.m, a.eta + b.eta
            ));
        }
    }
    Ok(ConstructionParams {
        field: k.clone(),
        tau,
        rho,
        rho_plus,
        rho_minus,
        ms: ms.to_vec(),
        levels,
        schwartz_n,
        growth_policy: "ceil(M^(3/2))".into(),
        warnings,
        delta_inv,
        atlas_cache: Mutex::new(HashMap::new()),
        envelope_cache: Mutex::new(HashMap::new()),
    })
}

// ---------------------------------------------------------------------------
// Integer lattice helpers (spectrum sublattices of Z^d).
// ---------------------------------------------------------------------------

/// Is s in the lattice spanned (over Z) by the upper-triangular HNF rows?
pub fn ilat_contains(h: &[Vec<i64>], s: &[i64]) -> bool {
    let d = h.len();
    let mut rem: Vec<i128> = s.iter().map(|&v| v as i128).collect();
    for i in 0..d {
        let p = h[i][i] as i128;
        if rem[i] % p != 0 {
            return false;
        }
        let y = rem[i] / p;
        for c in i..d {
            rem[c] -= y * h[i][c] as i128;
        }
    }
    rem.iter().all(|&v| v == 0)
}

/// All lattice points in the closed integer box [lo, hi].
pub fn ilat_points_in_box(h: &[Vec<i64>], lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let d = h.len();
    let mut out = Vec::new();
    let mut partial = vec![0i128; d];
    rec_ilat(h, lo, hi, 0, &mut partial, &mut Vec::new(), &mut out);
    out
}

fn rec_ilat(
    h: &[Vec<i64>],
    lo: &[i64],
    hi: &[i64],
    i: usize,
    partial: &mut Vec<i128>,
    ys: &mut Vec<i128>,
    out: &mut Vec<Vec<i64>>,
) {
    let d = h.len();
    if i == d {
        out.push(partial.iter().map(|&v| v as i64).collect());
        return;
    }
    // Coordinate i is partial[i] + y_i * h[i][i]; rows j > i do not touch it.
    let p = h[i][i] as i128;
    let (a, b) = (lo[i] as i128 - partial[i], hi[i] as i128 - partial[i]);
    let y_lo = a.div_euclid(p) + if a.rem_euclid(p) != 0 { 1 } else { 0 };
    let y_hi = b.div_euclid(p);
    for y in y_lo..=y_hi {
        let saved = partial.clone();
        for c in i..d {
            partial[c] += y * h[i][c] as i128;
        }
        ys.push(y);
        rec_ilat(h, lo, hi, i + 1, partial, ys, out);
        ys.pop();
        *partial = saved;
    }
}

// ---------------------------------------------------------------------------
// Trains and densities in space.
// ---------------------------------------------------------------------------

/// Φ_{I,η}(x) = Σ_{r∈I⁻¹} η^{-d} φ((x-r)/η): only the centers within ℓ∞
/// distance η of x contribute.
pub fn phi_train_eval(k: &NumberField, ideal: &FracIdeal, eta: f64, x: &[f64]) -> Result<f64> {
    let inv = ideal_inverse(k, ideal);
    phi_train_eval_inv(&inv, eta, x)
}

/// Same as [`phi_train_eval`] but with the inverse lattice precomputed.
pub fn phi_train_eval_inv(inv: &FracIdeal, eta: f64, x: &[f64]) -> Result<f64> {
    let d = x.len();
    let lo: Vec<f64> = x.iter().map(|&v| v - eta).collect();
    let hi: Vec<f64> = x.iter().map(|&v| v + eta).collect();
    let pts = points_in_box(inv, &lo, &hi, crate::latgeo::DEFAULT_ENUM_CAP)?;
    let c = PROFILE.c_norm;
    let mut acc = 0.0;
    for p in pts {
        let mut term = 1.0;
        for i in 0..d {
            let t = (x[i] - q_to_f64(&p.coords[i])) / eta;
            term *= c * bump::m_bump(t) / eta;
        }
        acc += term;
    }
    Ok(acc)
}

/// Φ̂_{I,η}(s) = φ̂(ηs)·N(I)·1_{δ⁻¹I}(T⁻¹s), exact indicator.
pub fn phi_train_hat(k: &NumberField, ideal: &FracIdeal, eta: f64, s: &[i64]) -> Complex64 {
    if !in_spectrum(k, ideal, s) {
        return Complex64::new(0.0, 0.0);
    }
    let norm = q_to_f64(&ideal_norm(ideal));
    let phase: f64 = s.iter().map(|&v| bump::phi_hat_1d(eta * v as f64)).product();
    Complex64::new(norm * phase, 0.0)
}

/// (Φ_{I,η}²)^(s) = η^{-d}·φ̂²(ηs)·N(I)·1_{δ⁻¹I}(T⁻¹s); requires
/// η < C_B⁻¹N(I)^{-1/d} so the squared train is still a disjoint sum.
pub fn phi_train_sq_hat(
    k: &NumberField,
    ideal: &FracIdeal,
    eta: f64,
    s: &[i64],
) -> Result<Complex64> {
    let norm = q_to_f64(&ideal_norm(ideal));
    if eta >= norm.powf(-1.0 / k.d as f64) / k.c_b {
        return Err(Error::InvalidParam(
            "squared train needs eta < C_B^-1 N(I)^(-1/d)".into(),
        ));
    }
    if !in_spectrum(k, ideal, s) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let f: f64 = s
        .iter()
        .map(|&v| bump::phi_sq_hat_1d(eta * v as f64))
        .product();
    Ok(Complex64::new(
        eta.powi(-(k.d as i32)) * f * norm,
        0.0,
    ))
}

impl ConstructionParams {
    pub fn level(&self, k: usize) -> Result<&Level> {
        if k == 0 || k > self.levels.len() {
            return Err(Error::InvalidParam(format!("level {k} out of range")));
        }
        Ok(&self.levels[k - 1])
    }

    /// F_k(x) = c_k (P_k Φ_{J_k,η_k}(x) + Σ_{I∈Q(M_k)} Φ_{I,η_k}(x)).
    pub fn fk_eval(&self, k: usize, x: &[f64]) -> Result<f64> {
        let lev = self.level(k)?;
        let mut acc = 0.0;
        for fam in &lev.families {
            if fam.mult == 0.0 {
                continue;
            }
            acc += fam.mult * phi_train_eval_inv(&fam.inv, lev.eta, x)?;
        }
        Ok(lev.c * acc)
    }

    /// F̂_k(s) on integer frequencies: real-valued sparse sum over the
    /// spectrum sublattices.
    pub fn fk_hat(&self, k: usize, s: &[i64]) -> Result<f64> {
        let lev = self.level(k)?;
        let mut w = 0.0;
        for fam in &lev.families {
            if fam.mult != 0.0 && ilat_contains(&fam.spectrum, s) {
                w += fam.mult * fam.norm;
            }
        }
        if w == 0.0 {
            return Ok(0.0);
        }
        let phase: f64 = s
            .iter()
            .map(|&v| bump::phi_hat_1d(lev.eta * v as f64))
            .product();
        Ok(lev.c * w * phase)
    }

    /// μ_k density φ₀(x)·Π_{j≤k} F_j(x); k = 0 is φ₀ itself.
    pub fn mu_density(&self, k: usize, x: &[f64]) -> Result<f64> {
        let mut acc = bump::phi0_eval(x);
        for j in 1..=k {
            if acc == 0.0 {
                return Ok(0.0);
            }
            acc *= self.fk_eval(j, x)?;
        }
        Ok(acc)
    }
}

// ---------------------------------------------------------------------------
// The support atlas: leaf decomposition of μ_k.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct LeafFactor {
    pub center: Vec<f64>,
    pub eta: f64,
}

/// One box of the support decomposition together with the chain of bump
/// factors living on it. The density on the leaf is
/// weight · φ₀(x) · Π_f (c/η)^d φ((x-center)/η) restricted to [lo, hi].
#[derive(Debug, Clone)]
pub struct Leaf {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub factors: Vec<LeafFactor>,
    pub weight: f64,
}

#[derive(Debug)]
pub struct Atlas {
    pub d: usize,
    pub leaves: Vec<Leaf>,
    /// Levels whose factors were refined exactly (ascending).
    pub levels: Vec<usize>,
}

fn refine_leaves(
    lev: &Level,
    leaves: &[Leaf],
    cap: usize,
) -> Result<Vec<Leaf>> {
    let mut next = Vec::new();
    for leaf in leaves {
        for fam in &lev.families {
            if fam.mult == 0.0 {
                continue;
            }
            let lo_s: Vec<f64> = leaf.lo.iter().map(|&v| v - lev.eta).collect();
            let hi_s: Vec<f64> = leaf.hi.iter().map(|&v| v + lev.eta).collect();
            let pts = points_in_box(&fam.inv, &lo_s, &hi_s, crate::latgeo::DEFAULT_ENUM_CAP)?;
            for p in pts {
                let center: Vec<f64> = p.coords.iter().map(q_to_f64).collect();
                let mut lo = leaf.lo.clone();
                let mut hi = leaf.hi.clone();
                let mut ok = true;
                for c in 0..lo.len() {
                    lo[c] = lo[c].max(center[c] - lev.eta);
                    hi[c] = hi[c].min(center[c] + lev.eta);
                    if lo[c] >= hi[c] {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    continue;
                }
                let mut factors = leaf.factors.clone();
                factors.push(LeafFactor {
                    center,
                    eta: lev.eta,
                });
                next.push(Leaf {
                    lo,
                    hi,
                    factors,
                    weight: leaf.weight * lev.c * fam.mult,
                });
                if next.len() > cap {
                    return Err(Error::CapExceeded(format!(
                        "support atlas exceeded {cap} leaves"
                    )));
                }
            }
        }
    }
    Ok(next)
}

impl ConstructionParams {
    /// Decompose supp(μ) ∩ root box into leaves, refining exactly at the given
    /// levels (ascending 1-based indices).
    pub fn build_atlas(&self, levels: &[usize], root_lo: &[f64], root_hi: &[f64]) -> Result<Atlas> {
        let d = self.field.d;
        let mut lo = vec![SUPP_LO; d];
        let mut hi = vec![SUPP_HI; d];
        for c in 0..d {
            lo[c] = lo[c].max(root_lo[c]);
            hi[c] = hi[c].min(root_hi[c]);
            if lo[c] >= hi[c] {
                return Ok(Atlas {
                    d,
                    leaves: Vec::new(),
                    levels: levels.to_vec(),
                });
            }
        }
        let mut leaves = vec![Leaf {
            lo,
            hi,
            factors: Vec::new(),
            weight: 1.0,
        }];
        for &k in levels {
            let lev = self.level(k)?;
            leaves = refine_leaves(lev, &leaves, ATLAS_CAP)?;
            if leaves.is_empty() {
                break;
            }
        }
        Ok(Atlas {
            d,
            leaves,
            levels: levels.to_vec(),
        })
    }

    fn atlas_for(&self, levels: Vec<usize>) -> Result<Arc<Atlas>> {
        if let Some(a) = self.atlas_cache.lock().unwrap().get(&levels) {
            return Ok(a.clone());
        }
        let d = self.field.d;
        let atlas = Arc::new(self.build_atlas(&levels, &vec![0.0; d], &vec![1.0; d])?);
        self.atlas_cache
            .lock()
            .unwrap()
            .insert(levels, atlas.clone());
        Ok(atlas)
    }
}

/// ∫_a^b e^{-2πi f x}·(leaf 1-D factor) dx with panel count tied to f.
pub(crate) fn leaf_int_1d(leaf: &Leaf, coord: usize, freq: f64) -> Complex64 {
    let (a, b) = (leaf.lo[coord], leaf.hi[coord]);
    let w = b - a;
    let panels = (1.0 + freq.abs() * w / 6.0).ceil() as usize;
    let rule = gauss_legendre(48);
    let c = PROFILE.c_norm;
    let mut acc = Complex64::new(0.0, 0.0);
    let pw = w / panels as f64;
    for p in 0..panels {
        let (pa, pb) = (a + p as f64 * pw, a + (p + 1) as f64 * pw);
        let half = 0.5 * (pb - pa);
        let mid = 0.5 * (pa + pb);
        for (node, wt) in rule.nodes.iter().zip(rule.weights.iter()) {
            let x = mid + half * node;
            let mut v = bump::phi0_eval_1d(x);
            for f in &leaf.factors {
                if v == 0.0 {
                    break;
                }
                v *= c * bump::m_bump((x - f.center[coord]) / f.eta) / f.eta;
            }
            if v != 0.0 {
                let ph = -2.0 * std::f64::consts::PI * freq * x;
                acc += Complex64::new(ph.cos(), ph.sin()) * (v * wt * half);
            }
        }
    }
    acc
}

fn leaf_hat(leaf: &Leaf, s: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(leaf.weight, 0.0);
    for c in 0..s.len() {
        acc *= leaf_int_1d(leaf, c, s[c]);
    }
    acc
}

impl ConstructionParams {
    /// Direct-quadrature oracle for μ̂_k(s): sums exact per-leaf tensor
    /// Gauss–Legendre integrals. Accepts real frequencies.
    pub fn mu_hat_direct(&self, k: usize, s: &[f64]) -> Result<Complex64> {
        let atlas = self.atlas_for((1..=k).collect())?;
        Ok(atlas_hat(&atlas, s))
    }

    /// μ̂_{l,k}: the measure with level k removed from the product
    /// F_l···F_1·φ₀, evaluated by the same leaf-atlas quadrature.
    /// μ_{k,k} = μ_{k−1}.
    pub fn mu_skip_hat(&self, l: usize, k: usize, s: &[f64]) -> Result<Complex64> {
        if !(l >= k && k >= 1) {
            return Err(Error::InvalidParam("need l >= k >= 1".into()));
        }
        self.level(l)?;
        let levels: Vec<usize> = (1..=l).filter(|&j| j != k).collect();
        let atlas = self.atlas_for(levels)?;
        Ok(atlas_hat(&atlas, s))
    }

    /// Atlas for the density Φ_{J_j,η_j}·F_k···F_1·φ₀: the μ_k atlas refined
    /// once more by the J train of level `j_level` with unit coefficient and
    /// unit multiplicity.
    pub fn phi_j_mu_atlas(&self, k: usize, j_level: usize) -> Result<Arc<Atlas>> {
        let lev = self.level(j_level)?;
        if lev.j.is_none() {
            return Err(Error::InvalidParam(format!(
                "level {j_level} has no prime ideal J (even level)"
            )));
        }
        let jfam = BumpFamily {
            mult: 1.0,
            ..lev.families[0].clone()
        };
        let synth = Level {
            c: 1.0,
            families: vec![jfam],
            ..lev.clone()
        };
        let base = self.atlas_for((1..=k).collect())?;
        let leaves = refine_leaves(&synth, &base.leaves, ATLAS_CAP)?;
        Ok(Arc::new(Atlas {
            d: self.field.d,
            leaves,
            levels: (1..=k).collect(),
        }))
    }
}

pub(crate) fn atlas_hat(atlas: &Atlas, s: &[f64]) -> Complex64 {
    if atlas.leaves.len() > 256 {
        // Parallel over leaves; collected in leaf order so the final
        // sequential sum is deterministic.
        let vals: Vec<Complex64> = atlas
            .leaves
            .par_iter()
            .map(|leaf| leaf_hat(leaf, s))
            .collect();
        vals.into_iter().sum()
    } else {
        atlas.leaves.iter().map(|leaf| leaf_hat(leaf, s)).sum()
    }
}

// ---------------------------------------------------------------------------
// Truncated μ̂ recursion with a far-field tail bound.
// ---------------------------------------------------------------------------

/// L¹ mass of |φ̂| per coordinate, for crude spectrum-wide tail sums.
static PHI_HAT_L1: Lazy<f64> = Lazy::new(|| {
    crate::quadrature::integrate(4000, -80.0, 80.0, |u| bump::phi_hat_1d(u).abs())
});

#[derive(Debug, Clone, Copy)]
pub struct MuHatResult {
    pub value: Complex64,
    /// Bound on the dropped far-field contribution (fitted envelope of the
    /// previous level's transform times the skipped spectrum weight).
    pub tail: f64,
    pub terms: usize,
}

impl ConstructionParams {
    /// Fitted far-field envelope |μ̂_k(u)| ≤ A(1+|u|)^{-β}, sampled from the
    /// direct oracle (from φ̂₀ itself for k = 0). Cached per level.
    pub fn mu_hat_envelope(&self, k: usize) -> Result<(f64, f64)> {
        if let Some(&e) = self.envelope_cache.lock().unwrap().get(&k) {
            return Ok(e);
        }
        let d = self.field.d;
        let scale = if k == 0 {
            60.0
        } else {
            4.0 * self.levels[k - 1].m.powf(1.0 + self.tau)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eefA7 + k as u64);
        let mut samples: Vec<(f64, f64)> = Vec::new();
        let radii = 14usize;
        for i in 0..radii {
            let r = 4.0 * (scale / 4.0).powf(i as f64 / (radii - 1) as f64);
            let mut best: f64 = 0.0;
            for _ in 0..4 {
                let mut u: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
                u.iter_mut().for_each(|v| *v = *v / n * r);
                let val = if k == 0 {
                    bump::phi0_hat(&u).norm()
                } else {
                    self.mu_hat_direct(k, &u)?.norm()
                };
                best = best.max(val);
            }
            samples.push((r, best.max(1e-300)));
        }
        // Log-log least squares, then lift A so the envelope dominates
        // every sample with margin.
        let n = samples.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &(r, v) in &samples {
            let (x, y) = ((1.0 + r).ln(), v.ln());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let beta = (-slope).max(0.0);
        let mut a: f64 = 0.0;
        for &(r, v) in &samples {
            a = a.max(v * (1.0 + r).powf(beta));
        }
        let env = (3.0 * a, beta);
        self.envelope_cache.lock().unwrap().insert(k, env);
        Ok(env)
    }

    /// μ̂_k(s) by the discrete convolution over the F̂_k spectrum, truncated to
    /// |s−t| ≤ R with the t = 0 term always kept, plus a tail bound.
    pub fn mu_hat(&self, k: usize, s: &[i64], t_max: f64) -> Result<MuHatResult> {
        let mut memo: HashMap<(usize, Vec<i64>), MuHatResult> = HashMap::new();
        self.mu_hat_rec(k, s, t_max, &mut memo)
    }

    fn mu_hat_rec(
        &self,
        k: usize,
        s: &[i64],
        t_max: f64,
        memo: &mut HashMap<(usize, Vec<i64>), MuHatResult>,
    ) -> Result<MuHatResult> {
        if k == 0 {
            let sf: Vec<f64> = s.iter().map(|&v| v as f64).collect();
            return Ok(MuHatResult {
                value: bump::phi0_hat(&sf),
                tail: 0.0,
                terms: 1,
            });
        }
        let key = (k, s.to_vec());
        if let Some(r) = memo.get(&key) {
            return Ok(*r);
        }
        let lev = self.level(k)?.clone();
        if t_max < lev.m.powf(1.0 + self.tau) {
            return Err(Error::InvalidParam(
                "truncation radius below the level's spectrum scale".into(),
            ));
        }
        // Inner radius: where μ̂_{k−1} still carries mass.
        let prev_scale = if k >= 2 {
            self.levels[k - 2].m.powf(1.0 + self.tau)
        } else {
            8.0
        };
        let r_inner = t_max.min(3.0 * prev_scale + 120.0);
        let (env_a, env_b) = self.mu_hat_envelope(k - 1)?;
        let env = |u: f64| env_a * (1.0 + u).powf(-env_b);

        // t = 0 always included; F̂_k(0) = 1.
        let base = self.mu_hat_rec(k - 1, s, t_max, memo)?;
        let mut value = base.value;
        let mut tail = base.tail;
        let mut terms = base.terms;

        let d = self.field.d;
        let r_outer = 2.0 * r_inner;
        let lo: Vec<i64> = s.iter().map(|&v| v - r_outer.ceil() as i64).collect();
        let hi: Vec<i64> = s.iter().map(|&v| v + r_outer.ceil() as i64).collect();
        // Gather spectrum weights per frequency so a t shared by several
        // sublattices triggers one recursive call.
        let mut weights: HashMap<Vec<i64>, f64> = HashMap::new();
        for fam in &lev.families {
            if fam.mult == 0.0 {
                continue;
            }
            for t in ilat_points_in_box(&fam.spectrum, &lo, &hi) {
                if t.iter().all(|&v| v == 0) {
                    continue;
                }
                *weights.entry(t).or_insert(0.0) += fam.mult * fam.norm;
            }
        }
        let mut keys: Vec<Vec<i64>> = weights.keys().cloned().collect();
        keys.sort();
        for t in keys {
            let w = weights[&t];
            let dist = t
                .iter()
                .zip(s.iter())
                .map(|(&a, &b)| ((a - b) as f64).powi(2))
                .sum::<f64>()
                .sqrt();
            let phase: f64 = t
                .iter()
                .map(|&v| bump::phi_hat_1d(lev.eta * v as f64))
                .product();
            let coef = lev.c * w * phase;
            if dist <= r_inner {
                let u: Vec<i64> = s.iter().zip(t.iter()).map(|(&a, &b)| a - b).collect();
                let inner = self.mu_hat_rec(k - 1, &u, t_max, memo)?;
                value += inner.value * coef;
                tail += coef.abs() * inner.tail;
                terms += inner.terms;
            } else {
                tail += coef.abs() * env(dist);
            }
        }
        // Spectrum mass beyond the enumerated box: per family,
        // Σ_{t∈Λ}|φ̂(η t)| ≲ η^{-d}·‖φ̂‖_{L¹}^d / N(I).
        let mut sf = 0.0;
        for fam in &lev.families {
            if fam.mult == 0.0 {
                continue;
            }
            sf += lev.c * fam.mult * lev.eta.powi(-(d as i32)) * PHI_HAT_L1.powi(d as i32);
        }
        tail += sf * env(r_outer);
        let res = MuHatResult { value, tail, terms };
        memo.insert(key, res);
        Ok(res)
    }
}

// ---------------------------------------------------------------------------
// Ball masses and support samples.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct BallMass {
    pub mass: f64,
    /// Number of levels refined exactly; levels beyond this were dropped
    /// under the equidistribution crossover (their train averages to 1 at
    /// scales much larger than its cell).
    pub levels_exact: usize,
    pub crossover: bool,
}

impl ConstructionParams {
    /// μ_k(B) for the ℓ∞ ball B = [center−r, center+r]^d: refine the support
    /// atlas inside B level by level and integrate leaf-wise. When a level's
    /// exact refinement would exceed the leaf budget and the ball is much
    /// coarser than that level's cells, the remaining levels are dropped
    /// (their local average is 1 by construction).
    pub fn ball_mass(&self, k: usize, center: &[f64], radius: f64) -> Result<BallMass> {
        if radius <= 0.0 {
            return Err(Error::InvalidParam("radius must be positive".into()));
        }
        let d = self.field.d;
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for c in 0..d {
            lo.push((center[c] - radius).max(SUPP_LO));
            hi.push((center[c] + radius).min(SUPP_HI));
            if lo[c] >= hi[c] {
                return Ok(BallMass {
                    mass: 0.0,
                    levels_exact: k,
                    crossover: false,
                });
            }
        }
        let mut leaves = vec![Leaf {
            lo,
            hi,
            factors: Vec::new(),
            weight: 1.0,
        }];
        let mut levels_exact = 0usize;
        let mut crossover = false;
        for j in 1..=k {
            let lev = self.level(j)?;
            // Estimated leaf count after refining: box volume times total
            // center density, summed over current leaves.
            let mut est = 0.0;
            for leaf in &leaves {
                let mut vol = 1.0;
                for c in 0..d {
                    vol *= leaf.hi[c] - leaf.lo[c] + 2.0 * lev.eta;
                }
                est += vol * lev.weight_total;
            }
            if est > BALL_LEAF_CAP {
                if radius * lev.m >= 2.0 {
                    crossover = true;
                    break;
                }
                return Err(Error::CapExceeded(format!(
                    "ball refinement at level {j} needs ~{est:.1e} leaves"
                )));
            }
            leaves = refine_leaves(lev, &leaves, ATLAS_CAP)?;
            levels_exact = j;
            if leaves.is_empty() {
                break;
            }
        }
        let mass: f64 = if leaves.len() > 256 {
            let vals: Vec<f64> = leaves
                .par_iter()
                .map(|leaf| leaf_hat(leaf, &vec![0.0; d]).re)
                .collect();
            vals.into_iter().sum()
        } else {
            leaves
                .iter()
                .map(|leaf| leaf_hat(leaf, &vec![0.0; d]).re)
                .sum()
        };
        Ok(BallMass {
            mass,
            levels_exact,
            crossover,
        })
    }

    /// Points with μ_k density > 0, spread across the leaf atlas.
    pub fn sample_support(&self, k: usize, count: usize) -> Result<Vec<Vec<f64>>> {
        let atlas = self.atlas_for((1..=k).collect())?;
        if atlas.leaves.is_empty() {
            return Ok(Vec::new());
        }
        let stride = (atlas.leaves.len() / count.max(1)).max(1);
        let mut out = Vec::new();
        for leaf in atlas.leaves.iter().step_by(stride) {
            if out.len() == count {
                break;
            }
            let x: Vec<f64> = leaf
                .lo
                .iter()
                .zip(leaf.hi.iter())
                .map(|(&a, &b)| 0.5 * (a + b))
                .collect();
            out.push(x);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Sparse frequency arrays.
// ---------------------------------------------------------------------------

/// Sparse complex coefficients on an integer frequency box, with the
/// truncation radius and a bound on everything outside it.
#[derive(Debug, Clone)]
pub struct FourierArray {
    pub radius: i64,
    pub entries: BTreeMap<Vec<i64>, Complex64>,
    pub t_max: f64,
    pub tail_bound: f64,
}

impl ConstructionParams {
    /// F̂_k on the box |s|∞ ≤ radius; only spectrum points materialize.
    pub fn fk_fourier_array(&self, k: usize, radius: i64) -> Result<FourierArray> {
        let lev = self.level(k)?;
        let d = self.field.d;
        let lo = vec![-radius; d];
        let hi = vec![radius; d];
        let mut weights: HashMap<Vec<i64>, f64> = HashMap::new();
        for fam in &lev.families {
            if fam.mult == 0.0 {
                continue;
            }
            for t in ilat_points_in_box(&fam.spectrum, &lo, &hi) {
                *weights.entry(t).or_insert(0.0) += fam.mult * fam.norm;
            }
        }
        let mut entries = BTreeMap::new();
        for (t, w) in weights {
            let phase: f64 = t
                .iter()
                .map(|&v| bump::phi_hat_1d(lev.eta * v as f64))
                .product();
            let v = lev.c * w * phase;
            if v != 0.0 {
                entries.insert(t, Complex64::new(v, 0.0));
            }
        }
        // |F̂_k| ≤ |φ̂(η s)| ≤ max over the far region of the first-coordinate
        // profile (other coordinates bounded by 1).
        let x = lev.eta * radius as f64;
        let mut envelope: f64 = 0.0;
        let mut u = x;
        while u <= 4.0 * x.max(1.0) {
            envelope = envelope.max(bump::phi_hat_1d(u).abs());
            u += 0.05 * x.max(0.5);
        }
        Ok(FourierArray {
            radius,
            entries,
            t_max: radius as f64,
            tail_bound: envelope,
        })
    }
}
