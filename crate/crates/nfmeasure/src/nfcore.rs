//! Exact arithmetic in a number field K = Q(θ) of degree d given by a monic
//! integer defining polynomial, using the power basis {1, θ, ..., θ^{d-1}}.
//!
//! All element arithmetic is exact rational. Embeddings (the complex roots of
//! the defining polynomial) are carried as rational-complex approximations
//! accurate to better than 1e-35, so that analytic constants and cross-checks
//! against the exact trace form hold far below their stated tolerances.

use crate::linalg::{q_from_z, q_to_f64, qmat_det, qmat_inverse, Q, Z};
use crate::polyfp;
use crate::{Error, Result};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Element of K as exact rational coordinates in the power basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    pub coords: Vec<Q>,
}

impl FieldElement {
    pub fn from_int_coords(v: &[i64]) -> Self {
        FieldElement {
            coords: v.iter().map(|&c| q_from_z(Z::from(c))).collect(),
        }
    }

    pub fn zero(d: usize) -> Self {
        FieldElement {
            coords: vec![Q::zero(); d],
        }
    }

    pub fn one(d: usize) -> Self {
        let mut coords = vec![Q::zero(); d];
        coords[0] = Q::one();
        FieldElement { coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &FieldElement) -> FieldElement {
        FieldElement {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &FieldElement) -> FieldElement {
        FieldElement {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> FieldElement {
        FieldElement {
            coords: self.coords.iter().map(|a| a * c).collect(),
        }
    }
}

/// Euclidean length of the coordinate vector: float value plus exact square.
pub fn euclid_len(a: &FieldElement) -> (f64, Q) {
    let sq: Q = a.coords.iter().map(|c| c * c).sum();
    (q_to_f64(&sq).sqrt(), sq)
}

/// Rational-complex number; exact field ops on approximate root data.
#[derive(Debug, Clone, PartialEq)]
pub struct Qc {
    pub re: Q,
    pub im: Q,
}

impl Qc {
    pub fn zero() -> Qc {
        Qc {
            re: Q::zero(),
            im: Q::zero(),
        }
    }

    pub fn from_q(re: Q) -> Qc {
        Qc {
            re,
            im: Q::zero(),
        }
    }

    pub fn add(&self, o: &Qc) -> Qc {
        Qc {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    pub fn sub(&self, o: &Qc) -> Qc {
        Qc {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    pub fn mul(&self, o: &Qc) -> Qc {
        Qc {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn div(&self, o: &Qc) -> Qc {
        let den = &o.re * &o.re + &o.im * &o.im;
        Qc {
            re: (&self.re * &o.re + &self.im * &o.im) / &den,
            im: (&self.im * &o.re - &self.re * &o.im) / &den,
        }
    }

    pub fn abs_sq(&self) -> Q {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }

    /// Round both parts to `digits` decimal digits to keep Newton iterates small.
    fn rounded(&self, digits: u32) -> Qc {
        Qc {
            re: q_round(&self.re, digits),
            im: q_round(&self.im, digits),
        }
    }
}

fn q_round(q: &Q, digits: u32) -> Q {
    let scale = Z::from(10u32).pow(digits);
    let scaled = q * q_from_z(scale.clone());
    let (num, den) = (scaled.numer().clone(), scaled.denom().clone());
    let two_num = Z::from(2) * num;
    let rounded = (&two_num + den.clone()).div_floor(&(Z::from(2) * den));
    Q::new(rounded, scale)
}

#[derive(Debug, Clone)]
pub struct NumberField {
    pub d: usize,
    /// Monic defining polynomial, low degree first, length d+1.
    pub poly: Vec<Z>,
    /// ω_i ω_j = Σ_k c[i][j][k] ω_k.
    pub mult_table: Vec<Vec<Vec<Q>>>,
    /// Row per embedding, entry τ(ω_i); rational-complex, error < 1e-35.
    pub embeddings: Vec<Vec<Qc>>,
    pub embeddings_f64: Vec<Vec<Complex64>>,
    /// T[i][j] = tr(ω_i ω_j).
    pub trace_mat: Vec<Vec<Z>>,
    pub trace_inv: Vec<Vec<Q>>,
    pub disc: Z,
    pub c_b: f64,
    /// Exact-arithmetic value of C_B² from the embedding data (error < 1e-30).
    pub c_b_sq: Q,
    pub c_0: f64,
    pub t_inv_opnorm: f64,
}

const ROOT_DIGITS: u32 = 45;

/// Build the field from a monic integer polynomial. `monogenic_override`
/// asserts disc(poly) = disc(K) when the automatic check (squarefree
/// discriminant, else Dedekind's index criterion at each p with p² | disc)
/// cannot certify it.
pub fn nf_from_polynomial(coeffs: &[Z], monogenic_override: bool) -> Result<NumberField> {
    let d = coeffs.len().checked_sub(1).filter(|&d| d >= 1).ok_or_else(|| {
        Error::InvalidParam("defining polynomial must have degree >= 1".into())
    })?;
    if coeffs[d] != Z::one() {
        return Err(Error::InvalidParam("defining polynomial must be monic".into()));
    }

    let roots = certified_roots(coeffs)?;
    if !irreducible_over_q(coeffs, &roots) {
        return Err(Error::InvalidParam(
            "defining polynomial is reducible over Q".into(),
        ));
    }

    // Powers of θ reduced mod the polynomial, as integer coordinate vectors.
    let theta_pows = theta_powers(coeffs, 2 * d - 1.max(1));
    let mut mult_table = vec![vec![vec![Q::zero(); d]; d]; d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                mult_table[i][j][k] = q_from_z(theta_pows[i + j][k].clone());
            }
        }
    }

    // Trace of multiplication by ω_k, then T[i][j] = Σ_k c_{ijk} tr(ω_k).
    let tr_basis: Vec<Q> = (0..d)
        .map(|k| {
            let m = mult_matrix_from_table(&mult_table, &FieldElement {
                coords: (0..d)
                    .map(|t| if t == k { Q::one() } else { Q::zero() })
                    .collect(),
            });
            (0..d).map(|j| m[j][j].clone()).sum()
        })
        .collect();
    let mut trace_mat = vec![vec![Z::zero(); d]; d];
    let mut trace_q = vec![vec![Q::zero(); d]; d];
    for i in 0..d {
        for j in 0..d {
            let t: Q = (0..d).map(|k| &mult_table[i][j][k] * &tr_basis[k]).sum();
            if !t.denom().is_one() {
                return Err(Error::Numerical("non-integral trace pairing".into()));
            }
            trace_mat[i][j] = t.numer().clone();
            trace_q[i][j] = t;
        }
    }
    let disc_q = qmat_det(&trace_q);
    let disc = disc_q.numer().clone();
    if disc.is_zero() {
        return Err(Error::Numerical("degenerate trace form".into()));
    }
    let trace_inv = qmat_inverse(&trace_q)
        .ok_or_else(|| Error::Numerical("trace form not invertible".into()))?;

    check_monogenic(coeffs, &disc, monogenic_override)?;

    // Embedding matrix: row per root θ_τ, entry τ(ω_i) = θ_τ^i.
    let embeddings: Vec<Vec<Qc>> = roots
        .iter()
        .map(|r| {
            let mut row = Vec::with_capacity(d);
            let mut p = Qc::from_q(Q::one());
            for _ in 0..d {
                row.push(p.clone());
                p = p.mul(r).rounded(ROOT_DIGITS);
            }
            row
        })
        .collect();
    let embeddings_f64: Vec<Vec<Complex64>> = embeddings
        .iter()
        .map(|row| row.iter().map(Qc::to_c64).collect())
        .collect();

    // Cross-check T against Σ_τ τ(ω_i)τ(ω_j).
    for i in 0..d {
        for j in 0..d {
            let mut s = Qc::zero();
            for row in &embeddings {
                s = s.add(&row[i].mul(&row[j]));
            }
            let diff = s.sub(&Qc::from_q(q_from_z(trace_mat[i][j].clone())));
            if q_to_f64(&diff.abs_sq()) > 1e-40 {
                return Err(Error::Numerical(format!(
                    "trace form vs embeddings mismatch at ({i},{j})"
                )));
            }
        }
    }

    let c_b_sq = embeddings
        .iter()
        .map(|row| row.iter().map(Qc::abs_sq).sum::<Q>())
        .max()
        .unwrap();
    let c_b = q_to_f64(&c_b_sq).sqrt();

    let t_inv_f64: Vec<Vec<f64>> = trace_inv
        .iter()
        .map(|row| row.iter().map(q_to_f64).collect())
        .collect();
    let t_inv_opnorm = operator_norm(&t_inv_f64);
    let n_delta = q_to_f64(&q_from_z(disc.abs()));
    // Exponent on N(delta) is -1/d: the annulus bound comes from
    // N(delta^{-1}) N(I) <= C_B^d \|T^{-1}\|^d |s|^d with N(delta^{-1}) = N(delta)^{-1}.
    let c_0 = 2f64.powf(-1.0 / d as f64) / c_b / t_inv_opnorm * n_delta.powf(-1.0 / d as f64);

    Ok(NumberField {
        d,
        poly: coeffs.to_vec(),
        mult_table,
        embeddings,
        embeddings_f64,
        trace_mat,
        trace_inv,
        disc,
        c_b,
        c_b_sq,
        c_0,
        t_inv_opnorm,
    })
}

/// θ^k mod poly for k = 0..=kmax, as integer coordinate vectors of length d.
fn theta_powers(coeffs: &[Z], kmax: usize) -> Vec<Vec<Z>> {
    let d = coeffs.len() - 1;
    let mut out = Vec::with_capacity(kmax + 1);
    let mut cur = vec![Z::zero(); d];
    cur[0] = Z::one();
    out.push(cur.clone());
    for _ in 1..=kmax {
        // Multiply by θ: shift, then reduce θ^d = -Σ coeffs[i] θ^i.
        let top = cur[d - 1].clone();
        let mut next = vec![Z::zero(); d];
        for i in (1..d).rev() {
            next[i] = cur[i - 1].clone();
        }
        for i in 0..d {
            next[i] -= &top * &coeffs[i];
        }
        cur = next;
        out.push(cur.clone());
    }
    out
}

fn mult_matrix_from_table(table: &[Vec<Vec<Q>>], a: &FieldElement) -> Vec<Vec<Q>> {
    let d = a.coords.len();
    // Column j = coordinates of a·ω_j.
    let mut m = vec![vec![Q::zero(); d]; d];
    for j in 0..d {
        for i in 0..d {
            if a.coords[i].is_zero() {
                continue;
            }
            for k in 0..d {
                m[k][j] += &a.coords[i] * &table[i][j][k];
            }
        }
    }
    m
}

impl NumberField {
    pub fn mult_matrix(&self, a: &FieldElement) -> Vec<Vec<Q>> {
        mult_matrix_from_table(&self.mult_table, a)
    }

    pub fn theta(&self) -> FieldElement {
        let mut coords = vec![Q::zero(); self.d];
        if self.d > 1 {
            coords[1] = Q::one();
        } else {
            // degree 1: θ is the rational root itself.
            coords[0] = q_from_z(-self.poly[0].clone());
        }
        FieldElement { coords }
    }

    /// f'(θ), the generator of the different ideal in a monogenic presentation.
    pub fn poly_derivative_at_theta(&self) -> FieldElement {
        let d = self.d;
        let mut acc = FieldElement::zero(d);
        let theta_pows = theta_powers(&self.poly, d.max(1));
        for i in 1..=d {
            let c = q_from_z(Z::from(i) * self.poly[i].clone());
            for k in 0..d {
                acc.coords[k] += &c * &q_from_z(theta_pows[i - 1][k].clone());
            }
        }
        acc
    }

    /// Apply the trace-form inverse to an exact rational vector.
    pub fn t_inv_apply(&self, v: &[Q]) -> Vec<Q> {
        (0..self.d)
            .map(|i| (0..self.d).map(|j| &self.trace_inv[i][j] * &v[j]).sum())
            .collect()
    }
}

pub fn elem_mul(k: &NumberField, a: &FieldElement, b: &FieldElement) -> FieldElement {
    let d = k.d;
    let mut coords = vec![Q::zero(); d];
    for i in 0..d {
        if a.coords[i].is_zero() {
            continue;
        }
        for j in 0..d {
            if b.coords[j].is_zero() {
                continue;
            }
            let prod = &a.coords[i] * &b.coords[j];
            for t in 0..d {
                coords[t] += &prod * &k.mult_table[i][j][t];
            }
        }
    }
    FieldElement { coords }
}

pub fn elem_norm(k: &NumberField, a: &FieldElement) -> Q {
    qmat_det(&k.mult_matrix(a))
}

pub fn elem_trace(k: &NumberField, a: &FieldElement) -> Q {
    let m = k.mult_matrix(a);
    (0..k.d).map(|i| m[i][i].clone()).sum()
}

/// Embed an element under embedding index `t`, in f64 precision.
pub fn embed_f64(k: &NumberField, a: &FieldElement, t: usize) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (i, c) in a.coords.iter().enumerate() {
        s += k.embeddings_f64[t][i] * q_to_f64(c);
    }
    s
}

// ---------------------------------------------------------------------------
// Root finding: Durand–Kerner in f64, then exact-rational Newton polishing.
// ---------------------------------------------------------------------------

fn eval_poly_c64(coeffs: &[Z], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + Complex64::new(c.to_f64().unwrap_or(f64::MAX), 0.0);
    }
    acc
}

fn eval_poly_qc(coeffs: &[Z], z: &Qc) -> Qc {
    let mut acc = Qc::zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(z).add(&Qc::from_q(q_from_z(c.clone())));
    }
    acc
}

fn derivative_coeffs(coeffs: &[Z]) -> Vec<Z> {
    (1..coeffs.len())
        .map(|i| Z::from(i) * coeffs[i].clone())
        .collect()
}

/// All complex roots of a monic integer polynomial, each accurate to < 1e-35,
/// with verified pairwise separation.
fn certified_roots(coeffs: &[Z]) -> Result<Vec<Qc>> {
    let d = coeffs.len() - 1;
    if d == 1 {
        return Ok(vec![Qc::from_q(q_from_z(-coeffs[0].clone()))]);
    }
    // Durand–Kerner from the standard spiral start.
    let seed = Complex64::new(0.4, 0.9);
    let mut zs: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..2000 {
        let mut max_step = 0.0f64;
        for i in 0..d {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if j != i {
                    denom *= zs[i] - zs[j];
                }
            }
            let step = eval_poly_c64(coeffs, zs[i]) / denom;
            zs[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-13 {
            break;
        }
    }

    let deriv = derivative_coeffs(coeffs);
    let mut roots = Vec::with_capacity(d);
    for z0 in &zs {
        let mut z = Qc {
            re: float_to_q(z0.re),
            im: float_to_q(z0.im),
        };
        // Quadratic convergence: a handful of steps reach ~1e-40 from ~1e-12.
        for _ in 0..12 {
            let f = eval_poly_qc(coeffs, &z);
            let df = eval_poly_qc(&deriv, &z);
            if df.abs_sq().is_zero() {
                return Err(Error::Numerical("root polishing hit critical point".into()));
            }
            z = z.sub(&f.div(&df)).rounded(ROOT_DIGITS);
            if q_to_f64(&eval_poly_qc(coeffs, &z).abs_sq()) < 1e-80 {
                break;
            }
        }
        if q_to_f64(&eval_poly_qc(coeffs, &z).abs_sq()) >= 1e-72 {
            return Err(Error::Numerical("root polishing failed to converge".into()));
        }
        roots.push(z);
    }
    // Separation certificate.
    for i in 0..d {
        for j in (i + 1)..d {
            if q_to_f64(&roots[i].sub(&roots[j]).abs_sq()) < 1e-20 {
                return Err(Error::Numerical("failed to separate roots".into()));
            }
        }
    }
    roots.sort_by(|a, b| {
        q_to_f64(&a.re)
            .partial_cmp(&q_to_f64(&b.re))
            .unwrap()
            .then(q_to_f64(&a.im).partial_cmp(&q_to_f64(&b.im)).unwrap())
    });
    Ok(roots)
}

fn float_to_q(x: f64) -> Q {
    let scale = 1e15;
    let n = (x * scale).round();
    Q::new(Z::from(n as i64), Z::from(scale as i64))
}

/// Irreducibility over Q for a monic integer polynomial: every proper subset
/// of roots whose elementary-symmetric coefficients look integral is verified
/// (or refuted) by exact polynomial division.
fn irreducible_over_q(coeffs: &[Z], roots: &[Qc]) -> bool {
    let d = coeffs.len() - 1;
    if d == 1 {
        return true;
    }
    for mask in 1u32..(1 << d) - 1 {
        let sz = mask.count_ones() as usize;
        if sz >= d {
            continue;
        }
        // Monic polynomial with the selected roots.
        let mut fac = vec![Qc::from_q(Q::one())];
        for (i, r) in roots.iter().enumerate() {
            if mask & (1 << i) == 0 {
                continue;
            }
            let mut next = vec![Qc::zero(); fac.len() + 1];
            for (k, c) in fac.iter().enumerate() {
                next[k + 1] = next[k + 1].add(c);
                next[k] = next[k].sub(&c.mul(r)).rounded(ROOT_DIGITS);
            }
            fac = next;
        }
        let mut cand: Vec<Z> = Vec::with_capacity(sz + 1);
        let mut ok = true;
        for c in &fac {
            if q_to_f64(&c.im).abs() > 1e-10 {
                ok = false;
                break;
            }
            let re = q_to_f64(&c.re);
            let nearest = re.round();
            if (re - nearest).abs() > 1e-10 || nearest.abs() > 1e15 {
                ok = false;
                break;
            }
            cand.push(Z::from(nearest as i64));
        }
        if ok && divides_exactly(coeffs, &cand) {
            return false;
        }
    }
    true
}

/// Exact test: does monic g divide monic f over Z?
fn divides_exactly(f: &[Z], g: &[Z]) -> bool {
    let gd = g.len() - 1;
    if gd == 0 {
        return true;
    }
    let mut r: Vec<Z> = f.to_vec();
    while r.len() > gd && r.iter().any(|c| !c.is_zero()) {
        while r.last() == Some(&Z::zero()) {
            r.pop();
        }
        if r.len() <= gd {
            break;
        }
        let c = r.last().unwrap().clone();
        let shift = r.len() - 1 - gd;
        for i in 0..=gd {
            let t = &c * &g[i];
            r[i + shift] -= t;
        }
    }
    r.iter().all(|c| c.is_zero())
}

// ---------------------------------------------------------------------------
// Monogenicity certification.
// ---------------------------------------------------------------------------

/// Accept if disc(poly) is squarefree, or Dedekind's criterion certifies
/// p ∤ [O_K : Z[θ]] at every prime with p² | disc, or the caller overrides.
fn check_monogenic(coeffs: &[Z], disc: &Z, override_flag: bool) -> Result<()> {
    if override_flag {
        return Ok(());
    }
    for p in squared_prime_divisors(&disc.abs()) {
        if !dedekind_index_coprime(coeffs, p) {
            return Err(Error::InvalidParam(format!(
                "cannot certify monogenic presentation: index test failed at p={p}; \
                 pass the override flag if disc(poly) = disc(K) is known"
            )));
        }
    }
    Ok(())
}

fn squared_prime_divisors(n: &Z) -> Vec<u64> {
    let mut n = n.clone();
    let mut out = Vec::new();
    let mut p = Z::from(2);
    while &p * &p <= n {
        if n.is_multiple_of(&p) {
            let mut e = 0;
            while n.is_multiple_of(&p) {
                n /= &p;
                e += 1;
            }
            if e >= 2 {
                out.push(p.to_u64().unwrap());
            }
        }
        p += 1;
    }
    out
}

/// Dedekind's criterion: with f̄ = Π ḡ_i^{e_i} mod p, set g* = Π g_i (lift),
/// h* a lift of f̄/ḡ*, and T = (g*h* − f)/p; then p ∤ index iff
/// gcd(T̄, ḡ*, h̄*) = 1 in F_p[x].
fn dedekind_index_coprime(coeffs: &[Z], p: u64) -> bool {
    let fp = polyfp::reduce_bigint_poly(coeffs, p);
    let factors = polyfp::factor_monic(&fp, p);
    let mut g_star = vec![1u64];
    for (g, _) in &factors {
        g_star = polyfp::mul(&g_star, g, p);
    }
    let mut h_bar = vec![1u64];
    for (g, e) in &factors {
        for _ in 1..*e {
            h_bar = polyfp::mul(&h_bar, g, p);
        }
    }
    // Lift g*, h* to Z[x] with coefficients in [0, p), form T = (g*h* - f)/p.
    let lift = |q: &polyfp::Poly| -> Vec<Z> { q.iter().map(|&c| Z::from(c)).collect() };
    let gz = lift(&g_star);
    let hz = lift(&h_bar);
    let mut prod = vec![Z::zero(); gz.len() + hz.len() - 1];
    for (i, a) in gz.iter().enumerate() {
        for (j, b) in hz.iter().enumerate() {
            prod[i + j] += a * b;
        }
    }
    let n = prod.len().max(coeffs.len());
    let pz = Z::from(p);
    let mut t_int = vec![Z::zero(); n];
    for i in 0..n {
        let a = prod.get(i).cloned().unwrap_or_else(Z::zero);
        let b = coeffs.get(i).cloned().unwrap_or_else(Z::zero);
        t_int[i] = (a - b) / &pz;
    }
    let t_bar = polyfp::reduce_bigint_poly(&t_int, p);
    let g1 = polyfp::gcd(&t_bar, &g_star, p);
    let g2 = polyfp::gcd(&g1, &h_bar, p);
    polyfp::degree(&g2) == Some(0) || g2.is_empty()
}

/// Euclidean operator norm via power iteration on AᵀA.
fn operator_norm(a: &[Vec<f64>]) -> f64 {
    let d = a.len();
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut lam = 0.0;
    for _ in 0..500 {
        // w = Aᵀ(Av)
        let av: Vec<f64> = (0..d)
            .map(|i| (0..d).map(|j| a[i][j] * v[j]).sum())
            .collect();
        let w: Vec<f64> = (0..d)
            .map(|j| (0..d).map(|i| a[i][j] * av[i]).sum())
            .collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lam = norm;
        v = w.iter().map(|x| x / norm).collect();
    }
    lam.sqrt()
}

pub fn z_from_i64(v: i64) -> Z {
    Z::from(v)
}

pub fn poly_from_i64(v: &[i64]) -> Vec<Z> {
    v.iter().map(|&c| Z::from(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gauss() -> NumberField {
        nf_from_polynomial(&poly_from_i64(&[1, 0, 1]), false).unwrap()
    }

    fn sqrt2() -> NumberField {
        nf_from_polynomial(&poly_from_i64(&[-2, 0, 1]), false).unwrap()
    }

    #[test]
    fn gauss_field_constants() {
        let k = gauss();
        assert_eq!(k.d, 2);
        assert_eq!(k.trace_mat, vec![
            vec![BigInt::from(2), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(-2)]
        ]);
        assert_eq!(k.disc, BigInt::from(-4));
        assert!((k.c_b - 2f64.sqrt()).abs() < 1e-12);
        assert!((k.t_inv_opnorm - 0.5).abs() < 1e-10);
        // 2^{-1/2} * 2^{-1/2} * 2 * 4^{-1/2} = 1/2
        assert!((k.c_0 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn sqrt2_field_constants() {
        let k = sqrt2();
        assert_eq!(k.trace_mat, vec![
            vec![BigInt::from(2), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(4)]
        ]);
        assert_eq!(k.disc, BigInt::from(8));
    }

    #[test]
    fn degree_one_field() {
        let k = nf_from_polynomial(&poly_from_i64(&[-1, 1]), false).unwrap();
        assert_eq!(k.d, 1);
        assert_eq!(k.trace_mat, vec![vec![BigInt::from(1)]]);
        assert!((k.c_b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reducible_rejected() {
        // x² - 1 = (x-1)(x+1)
        assert!(nf_from_polynomial(&poly_from_i64(&[-1, 0, 1]), false).is_err());
        // x³ - x = x(x-1)(x+1)
        assert!(nf_from_polynomial(&poly_from_i64(&[0, -1, 0, 1]), false).is_err());
    }

    #[test]
    fn gauss_multiplication() {
        let k = gauss();
        let i = FieldElement::from_int_coords(&[0, 1]);
        assert_eq!(elem_mul(&k, &i, &i), FieldElement::from_int_coords(&[-1, 0]));
        let a = FieldElement::from_int_coords(&[3, 4]);
        let abar = FieldElement::from_int_coords(&[3, -4]);
        assert_eq!(elem_mul(&k, &a, &abar), FieldElement::from_int_coords(&[25, 0]));
        let one = FieldElement::one(2);
        assert_eq!(elem_mul(&k, &a, &one), a);
    }

    #[test]
    fn norms_and_traces() {
        let k = gauss();
        let a = FieldElement::from_int_coords(&[3, 4]);
        assert_eq!(elem_norm(&k, &a), q_from_z(Z::from(25)));
        assert_eq!(elem_trace(&k, &a), q_from_z(Z::from(6)));
        assert_eq!(elem_trace(&k, &FieldElement::from_int_coords(&[0, 1])), Q::zero());
        assert_eq!(elem_norm(&k, &FieldElement::one(2)), Q::one());
        let s = sqrt2();
        let b = FieldElement::from_int_coords(&[1, 1]);
        assert_eq!(elem_norm(&s, &b), q_from_z(Z::from(-1)));
    }

    #[test]
    fn euclid_len_examples() {
        let (l, sq) = euclid_len(&FieldElement::from_int_coords(&[3, 4]));
        assert_eq!(sq, q_from_z(Z::from(25)));
        assert!((l - 5.0).abs() < 1e-14);
        let half = FieldElement {
            coords: vec![Q::new(Z::one(), Z::from(2)), Q::new(Z::one(), Z::from(2))],
        };
        let (l, sq) = euclid_len(&half);
        assert_eq!(sq, Q::new(Z::one(), Z::from(2)));
        assert!((l - 2f64.sqrt() / 2.0).abs() < 1e-14);
    }

    fn random_element(rng: &mut ChaCha8Rng, d: usize) -> FieldElement {
        FieldElement {
            coords: (0..d)
                .map(|_| Q::new(Z::from(rng.gen_range(-30i64..=30)), Z::from(rng.gen_range(1i64..=7))))
                .collect(),
        }
    }

    #[test]
    fn norm_multiplicative_trace_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in [gauss(), sqrt2()] {
            for _ in 0..200 {
                let a = random_element(&mut rng, k.d);
                let b = random_element(&mut rng, k.d);
                assert_eq!(
                    elem_norm(&k, &elem_mul(&k, &a, &b)),
                    elem_norm(&k, &a) * elem_norm(&k, &b)
                );
                assert_eq!(
                    elem_trace(&k, &a.add(&b)),
                    elem_trace(&k, &a) + elem_trace(&k, &b)
                );
            }
        }
    }

    #[test]
    fn norm_bounded_by_cb_power() {
        // |N(q)| ≤ C_B^d |q|^d, checked as N(q)² ≤ (C_B²)^d (|q|²)^d with the
        // exact rational C_B² carried by the field (error far below slack).
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in [gauss(), sqrt2()] {
            for _ in 0..10_000 {
                let a = random_element(&mut rng, k.d);
                if a.is_zero() {
                    continue;
                }
                let n = elem_norm(&k, &a);
                let lhs = &n * &n;
                let (_, qsq) = euclid_len(&a);
                let mut rhs = Q::one();
                for _ in 0..k.d {
                    rhs = rhs * &k.c_b_sq * &qsq;
                }
                assert!(lhs <= rhs, "C_B bound failed for {:?}", a);
            }
        }
    }

    #[test]
    fn trace_duality() {
        // tr(r·(T⁻¹s)) = r·s exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in [gauss(), sqrt2()] {
            for _ in 0..100 {
                let r = random_element(&mut rng, k.d);
                let s = random_element(&mut rng, k.d);
                let tinv_s = FieldElement {
                    coords: k.t_inv_apply(&s.coords),
                };
                let lhs = elem_trace(&k, &elem_mul(&k, &r, &tinv_s));
                let rhs: Q = r.coords.iter().zip(&s.coords).map(|(a, b)| a * b).sum();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn derivative_at_theta() {
        // f = x²+1, f'(θ) = 2θ = 2i in Q(i).
        let k = gauss();
        assert_eq!(
            k.poly_derivative_at_theta(),
            FieldElement::from_int_coords(&[0, 2])
        );
    }

    #[test]
    fn embeddings_match_norm() {
        let k = gauss();
        let a = FieldElement::from_int_coords(&[3, 4]);
        let prod: Complex64 = (0..k.d).map(|t| embed_f64(&k, &a, t)).product();
        assert!((prod.re - 25.0).abs() < 1e-9 && prod.im.abs() < 1e-9);
    }
}
