//! Fractional-ideal algebra over a monogenic number field: canonical HNF
//! representation, product/sum/intersection/inverse, norms, the different
//! ideal, Dedekind prime factorization, the prime window Q(M), and the ideal
//! Chinese remainder theorem.

use crate::linalg::{
    clear_denominators, hnf, q_from_z, q_to_f64, qmat_inverse, qmat_transpose, solve_integer,
    zmat_det, Q, Z,
};
use crate::nfcore::{elem_mul, FieldElement, NumberField};
use crate::polyfp;
use crate::primes::sieve;
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Fractional ideal as (1/den)·(Z-module spanned by the HNF rows), in the
/// coordinates of the power basis. The representation is canonical: rows are
/// in Hermite normal form and den is minimal, so equality is field equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FracIdeal {
    pub den: Z,
    pub hnf: Vec<Vec<Z>>,
}

impl FracIdeal {
    /// Canonicalize integer rows over a common denominator.
    pub fn from_scaled_rows(den: Z, rows: &[Vec<Z>]) -> Result<FracIdeal> {
        assert!(den.is_positive());
        let h = hnf(rows);
        if h.len() != rows[0].len() {
            return Err(Error::InvalidParam("ideal module is not full rank".into()));
        }
        let mut content = den.clone();
        for row in &h {
            for e in row {
                content = content.gcd(e);
            }
        }
        let hnf = h
            .iter()
            .map(|row| row.iter().map(|e| e / &content).collect())
            .collect();
        Ok(FracIdeal {
            den: den / &content,
            hnf,
        })
    }

    pub fn from_q_rows(rows: &[Vec<Q>]) -> Result<FracIdeal> {
        let (den, int_rows) = clear_denominators(rows);
        FracIdeal::from_scaled_rows(den, &int_rows)
    }

    pub fn one(d: usize) -> FracIdeal {
        let mut hnf = vec![vec![Z::zero(); d]; d];
        for (i, row) in hnf.iter_mut().enumerate() {
            row[i] = Z::one();
        }
        FracIdeal {
            den: Z::one(),
            hnf,
        }
    }

    pub fn dim(&self) -> usize {
        self.hnf.len()
    }

    /// Basis of the underlying lattice in Q^d, as rational rows.
    pub fn q_basis(&self) -> Vec<Vec<Q>> {
        let den = q_from_z(&self.den);
        self.hnf
            .iter()
            .map(|row| row.iter().map(|e| q_from_z(e) / &den).collect())
            .collect()
    }

    /// Basis elements as field elements.
    pub fn basis_elements(&self) -> Vec<FieldElement> {
        self.q_basis()
            .into_iter()
            .map(|coords| FieldElement { coords })
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    /// Exact membership test for an element of K.
    pub fn contains(&self, a: &FieldElement) -> bool {
        let den = q_from_z(&self.den);
        let mut scaled = Vec::with_capacity(a.coords.len());
        for c in &a.coords {
            let v = c * &den;
            if !v.denom().is_one() {
                return false;
            }
            scaled.push(v.numer().clone());
        }
        solve_integer(&self.hnf, &scaled).is_some()
    }

    /// Sub-lattice (hence sub-ideal) test.
    pub fn is_subset_of(&self, other: &FracIdeal) -> bool {
        self.basis_elements().iter().all(|b| other.contains(b))
    }

    /// O_K-module closure check: each ω_i times each basis element stays inside.
    pub fn is_ok_module(&self, k: &NumberField) -> bool {
        let basis = self.basis_elements();
        (0..k.d).all(|i| {
            let mut w = vec![Q::zero(); k.d];
            w[i] = Q::one();
            let omega = FieldElement { coords: w };
            basis
                .iter()
                .all(|b| self.contains(&elem_mul(k, b, &omega)))
        })
    }
}

pub fn ideal_norm(i: &FracIdeal) -> Q {
    let d = i.dim();
    let det = zmat_det(&i.hnf).abs();
    let mut den_pow = Z::one();
    for _ in 0..d {
        den_pow *= &i.den;
    }
    q_from_z(det) / q_from_z(den_pow)
}

pub fn ideal_norm_f64(i: &FracIdeal) -> f64 {
    q_to_f64(&ideal_norm(i))
}

pub fn ideal_from_generators(k: &NumberField, gens: &[FieldElement]) -> Result<FracIdeal> {
    if gens.iter().all(|g| g.is_zero()) {
        return Err(Error::InvalidParam("all ideal generators are zero".into()));
    }
    let mut rows = Vec::new();
    for g in gens {
        if g.is_zero() {
            continue;
        }
        for j in 0..k.d {
            let mut w = vec![Q::zero(); k.d];
            w[j] = Q::one();
            let omega = FieldElement { coords: w };
            rows.push(elem_mul(k, g, &omega).coords);
        }
    }
    FracIdeal::from_q_rows(&rows)
}

pub fn principal(k: &NumberField, g: &FieldElement) -> Result<FracIdeal> {
    ideal_from_generators(k, std::slice::from_ref(g))
}

pub fn ideal_mul(k: &NumberField, a: &FracIdeal, b: &FracIdeal) -> FracIdeal {
    let ea = a.basis_elements();
    let eb = b.basis_elements();
    let mut rows = Vec::with_capacity(ea.len() * eb.len());
    for x in &ea {
        for y in &eb {
            rows.push(elem_mul(k, x, y).coords);
        }
    }
    FracIdeal::from_q_rows(&rows).expect("product of nonzero ideals is full rank")
}

pub fn ideal_sum(a: &FracIdeal, b: &FracIdeal) -> FracIdeal {
    let mut rows = a.q_basis();
    rows.extend(b.q_basis());
    FracIdeal::from_q_rows(&rows).expect("sum of nonzero ideals is full rank")
}

/// Dual lattice: rows of (B⁻¹)ᵀ for basis rows B.
fn lattice_dual(rows: &[Vec<Q>]) -> Vec<Vec<Q>> {
    qmat_transpose(&qmat_inverse(rows).expect("full-rank lattice"))
}

pub fn ideal_intersect(a: &FracIdeal, b: &FracIdeal) -> FracIdeal {
    // L1 ∩ L2 = (L1* + L2*)*.
    let mut dual_rows = lattice_dual(&a.q_basis());
    dual_rows.extend(lattice_dual(&b.q_basis()));
    let sum = FracIdeal::from_q_rows(&dual_rows).expect("dual sum full rank");
    FracIdeal::from_q_rows(&lattice_dual(&sum.q_basis())).expect("intersection full rank")
}

/// Trace dual of the ideal's lattice: {x : tr(xy) ∈ Z for all y in the lattice}.
pub fn trace_dual(k: &NumberField, i: &FracIdeal) -> FracIdeal {
    let v = i.q_basis();
    let t: Vec<Vec<Q>> = k
        .trace_mat
        .iter()
        .map(|row| row.iter().map(q_from_z).collect())
        .collect();
    // Rows W with W·(T·Vᵀ) = I, i.e. W = (V·T)⁻ᵀ (T symmetric).
    let vt = crate::linalg::qmat_mul(&v, &t);
    let w = qmat_transpose(&qmat_inverse(&vt).expect("trace form invertible"));
    FracIdeal::from_q_rows(&w).expect("trace dual full rank")
}

/// δ = ⟨f′(θ)⟩ for the monogenic presentation, cross-checked against the
/// lattice identity δ⁻¹ = T⁻¹(Z^d), with N(δ) = |disc|.
pub fn different_ideal(k: &NumberField) -> Result<FracIdeal> {
    let delta = principal(k, &k.poly_derivative_at_theta())?;
    let delta_inv = ideal_inverse(k, &delta);
    let t_inv_lattice = FracIdeal::from_q_rows(&k.trace_inv)?;
    if delta_inv != t_inv_lattice {
        return Err(Error::Numerical(
            "different ideal fails the T^{-1}(Z^d) cross-check".into(),
        ));
    }
    if ideal_norm(&delta) != q_from_z(k.disc.abs()) {
        return Err(Error::Numerical("N(δ) != |disc|".into()));
    }
    Ok(delta)
}

/// I⁻¹ = (trace dual of I) · δ.
pub fn ideal_inverse(k: &NumberField, i: &FracIdeal) -> FracIdeal {
    let dual = trace_dual(k, i);
    let delta = principal(k, &k.poly_derivative_at_theta()).expect("nonzero derivative");
    ideal_mul(k, &dual, &delta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimeIdealRecord {
    pub ideal: FracIdeal,
    /// Residue characteristic.
    pub p: u64,
    /// Residue degree.
    pub f: usize,
    /// Ramification index in the factorization of ⟨p⟩.
    pub e: u32,
    pub norm: Z,
}

/// Dedekind factorization of ⟨p⟩ from the factorization of the defining
/// polynomial mod p. Valid because the presentation is monogenic.
pub fn prime_ideals_above(k: &NumberField, p: u64) -> Result<Vec<PrimeIdealRecord>> {
    if !crate::primes::is_prime(p) {
        return Err(Error::InvalidParam(format!("{p} is not prime")));
    }
    let fp = polyfp::reduce_bigint_poly(&k.poly, p);
    let factors = polyfp::factor_monic(&fp, p);
    let theta = k.theta();
    let mut p_coords = vec![Q::zero(); k.d];
    p_coords[0] = q_from_z(Z::from(p));
    let p_elem = FieldElement { coords: p_coords };
    let mut out = Vec::new();
    for (g, e) in factors {
        let f = polyfp::degree(&g).unwrap();
        // g(θ) with lifted coefficients.
        let mut g_theta = FieldElement::zero(k.d);
        let mut pow = FieldElement::one(k.d);
        for &c in &g {
            let mut term = pow.clone();
            for t in term.coords.iter_mut() {
                *t *= q_from_z(Z::from(c));
            }
            g_theta = g_theta.add(&term);
            pow = elem_mul(k, &pow, &theta);
        }
        let ideal = ideal_from_generators(k, &[p_elem.clone(), g_theta])?;
        let norm = Z::from(p).pow(f as u32);
        debug_assert_eq!(ideal_norm(&ideal), q_from_z(&norm));
        out.push(PrimeIdealRecord {
            ideal,
            p,
            f,
            e,
            norm,
        });
    }
    out.sort_by(|a, b| (a.norm.clone(), a.ideal.hnf.clone()).cmp(&(b.norm.clone(), b.ideal.hnf.clone())));
    Ok(out)
}

/// All prime ideals with norm in [lo, hi] (inclusive window in f64), ordered
/// by (norm, HNF lexicographic).
pub fn primes_in_norm_window(k: &NumberField, lo: f64, hi: f64) -> Result<Vec<PrimeIdealRecord>> {
    let pmax = hi.floor();
    if pmax < 2.0 {
        return Ok(vec![]);
    }
    if pmax > 1e12 {
        return Err(Error::CapExceeded(format!(
            "prime window upper bound {pmax} too large"
        )));
    }
    let mut out = Vec::new();
    for p in sieve(pmax as u64) {
        for rec in prime_ideals_above(k, p)? {
            let n = rec.norm.to_f64().unwrap();
            if n >= lo && n <= hi {
                out.push(rec);
            }
        }
    }
    out.sort_by(|a, b| (a.norm.clone(), a.ideal.hnf.clone()).cmp(&(b.norm.clone(), b.ideal.hnf.clone())));
    Ok(out)
}

/// Q(M): prime ideals with M^d/2 ≤ N(I) ≤ M^d.
pub fn enumerate_q(k: &NumberField, m: f64) -> Result<Vec<PrimeIdealRecord>> {
    if m <= 1.0 {
        return Err(Error::InvalidParam("Q(M) requires M > 1".into()));
    }
    let md = m.powi(k.d as i32);
    primes_in_norm_window(k, md / 2.0, md)
}

/// J_k: the norm window is [M^{d+ρ}/2, M^{d+ρ}]; deterministic smallest-norm
/// choice with HNF tie-break.
pub fn pick_j(k: &NumberField, m: f64, rho: f64) -> Result<PrimeIdealRecord> {
    let d = k.d as f64;
    if rho <= -d || rho >= d {
        return Err(Error::InvalidParam("need -d < rho < d".into()));
    }
    let w = m.powf(d + rho);
    let cands = primes_in_norm_window(k, w / 2.0, w)?;
    cands.into_iter().next().ok_or_else(|| {
        Error::InvalidParam(format!(
            "no prime ideal with norm in [{}, {}]; enlarge M",
            w / 2.0,
            w
        ))
    })
}

/// Reduce a modulo the lattice of L into the fundamental parallelepiped of its
/// triangular basis (deterministic coset representative).
pub fn reduce_mod(a: &FieldElement, l: &FracIdeal) -> FieldElement {
    let basis = l.q_basis();
    let d = basis.len();
    let mut coords = a.coords.clone();
    // Basis is upper triangular: eliminate from the last coordinate down.
    for i in (0..d).rev() {
        let q = &coords[i] / &basis[i][i];
        let f = q.floor();
        if !f.is_zero() {
            for j in 0..d {
                coords[j] = &coords[j] - &(&f * &basis[i][j]);
            }
        }
    }
    FieldElement { coords }
}

/// Ideal CRT on cosets a1 + D·I1 and a2 + D·I2. Returns None when the cosets
/// are disjoint, i.e. a1 - a2 ∉ D(I1+I2); otherwise a representative a and
/// L = D·I1 ∩ D·I2 with a + L equal to the intersection of the cosets.
pub fn crt_intersect_cosets(
    k: &NumberField,
    d_ideal: &FracIdeal,
    i1: &FracIdeal,
    i2: &FracIdeal,
    a1: &FieldElement,
    a2: &FieldElement,
) -> Result<Option<(FieldElement, FracIdeal)>> {
    if !d_ideal.contains(a1) || !d_ideal.contains(a2) {
        return Err(Error::InvalidParam("CRT shifts must lie in D".into()));
    }
    let s = ideal_sum(i1, i2);
    let ds = ideal_mul(k, d_ideal, &s);
    if !ds.contains(&a1.sub(a2)) {
        return Ok(None);
    }
    // x1 ∈ S⁻¹I1, x2 ∈ S⁻¹I2 with x1 + x2 = 1, by an exact HNF solve on the
    // stacked bases of the two (integral, comaximal-normalized) factors.
    let s_inv = ideal_inverse(k, &s);
    let f1 = ideal_mul(k, &s_inv, i1);
    let f2 = ideal_mul(k, &s_inv, i2);
    let mut rows_q = f1.q_basis();
    rows_q.extend(f2.q_basis());
    let (den, rows) = clear_denominators(&rows_q);
    let mut target = vec![Z::zero(); k.d];
    target[0] = den.clone();
    let y = solve_integer(&rows, &target).ok_or_else(|| {
        Error::Numerical("CRT partition of unity not found (S⁻¹I1 + S⁻¹I2 ≠ O_K?)".into())
    })?;
    let den_q = q_from_z(&den);
    let mut x1 = vec![Q::zero(); k.d];
    for (i, yi) in y.iter().take(k.d).enumerate() {
        for j in 0..k.d {
            x1[j] += q_from_z(yi) * q_from_z(&rows[i][j]) / &den_q;
        }
    }
    let x1 = FieldElement { coords: x1 };
    let x2 = FieldElement::one(k.d).sub(&x1);
    debug_assert!(f1.contains(&x1) && f2.contains(&x2));
    let l = ideal_intersect(&ideal_mul(k, d_ideal, i1), &ideal_mul(k, d_ideal, i2));
    let a = elem_mul(k, &x1, a2).add(&elem_mul(k, &x2, a1));
    Ok(Some((reduce_mod(&a, &l), l)))
}

/// |{I ∈ Q(M) : J ⊆ I}| by exact containment tests.
pub fn divisor_count(k: &NumberField, j: &FracIdeal, m: f64) -> Result<usize> {
    if !j.is_integral() {
        return Err(Error::InvalidParam("divisor_count needs an integral ideal".into()));
    }
    Ok(enumerate_q(k, m)?
        .into_iter()
        .filter(|rec| j.is_subset_of(&rec.ideal))
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfcore::{elem_norm, nf_from_polynomial, poly_from_i64};
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gauss() -> NumberField {
        nf_from_polynomial(&poly_from_i64(&[1, 0, 1]), false).unwrap()
    }

    fn sqrt2() -> NumberField {
        nf_from_polynomial(&poly_from_i64(&[-2, 0, 1]), false).unwrap()
    }

    fn gen(k: &NumberField, v: &[i64]) -> FracIdeal {
        principal(k, &FieldElement::from_int_coords(v)).unwrap()
    }

    #[test]
    fn generator_examples() {
        let k = gauss();
        let i = gen(&k, &[1, 1]);
        assert!(i.is_integral());
        assert_eq!(ideal_norm(&i), q_from_z(Z::from(2)));
        let o = gen(&k, &[1, 0]);
        assert_eq!(o, FracIdeal::one(2));
        let half = principal(
            &k,
            &FieldElement {
                coords: vec![Q::new(Z::one(), Z::from(2)), Q::zero()],
            },
        )
        .unwrap();
        assert_eq!(half.den, Z::from(2));
        assert_eq!(half.hnf, FracIdeal::one(2).hnf);
        assert_eq!(ideal_norm(&half), Q::new(Z::one(), Z::from(4)));
    }

    #[test]
    fn mul_sum_intersect_examples() {
        let k = gauss();
        let p1 = gen(&k, &[2, 1]);
        let p2 = gen(&k, &[2, -1]);
        assert_eq!(ideal_intersect(&p1, &p2), gen(&k, &[5, 0]));
        assert_eq!(ideal_sum(&p1, &p2), FracIdeal::one(2));
        let i = gen(&k, &[1, 1]);
        assert_eq!(ideal_mul(&k, &i, &FracIdeal::one(2)), i);
    }

    #[test]
    fn inverse_examples() {
        let k = gauss();
        let three = gen(&k, &[3, 0]);
        let inv = ideal_inverse(&k, &three);
        assert_eq!(inv.den, Z::from(3));
        assert_eq!(inv.hnf, FracIdeal::one(2).hnf);
        assert_eq!(ideal_norm(&inv), Q::new(Z::one(), Z::from(9)));
        assert_eq!(ideal_inverse(&k, &FracIdeal::one(2)), FracIdeal::one(2));
        let i = gen(&k, &[1, 1]);
        let inv = ideal_inverse(&k, &i);
        // (1-i)/2 generates the inverse.
        let g = FieldElement {
            coords: vec![Q::new(Z::one(), Z::from(2)), Q::new(Z::from(-1), Z::from(2))],
        };
        assert!(inv.contains(&g));
        assert_eq!(ideal_mul(&k, &i, &inv), FracIdeal::one(2));
        assert_eq!(ideal_norm(&inv), Q::new(Z::one(), Z::from(2)));
    }

    #[test]
    fn different_examples() {
        let k = gauss();
        let delta = different_ideal(&k).unwrap();
        assert_eq!(delta, gen(&k, &[2, 0]));
        assert_eq!(ideal_norm(&delta), q_from_z(Z::from(4)));
        let q = nf_from_polynomial(&poly_from_i64(&[-1, 1]), false).unwrap();
        assert_eq!(different_ideal(&q).unwrap(), FracIdeal::one(1));
        let s = sqrt2();
        assert_eq!(ideal_norm(&different_ideal(&s).unwrap()), q_from_z(Z::from(8)));
    }

    #[test]
    fn primes_above_examples() {
        let k = gauss();
        let above5 = prime_ideals_above(&k, 5).unwrap();
        assert_eq!(above5.len(), 2);
        assert!(above5.iter().all(|r| r.norm == Z::from(5) && r.f == 1 && r.e == 1));
        let above3 = prime_ideals_above(&k, 3).unwrap();
        assert_eq!(above3.len(), 1);
        assert_eq!(above3[0].norm, Z::from(9));
        assert_eq!(above3[0].ideal, gen(&k, &[3, 0]));
        let above2 = prime_ideals_above(&k, 2).unwrap();
        assert_eq!(above2.len(), 1);
        assert_eq!(above2[0].norm, Z::from(2));
        assert_eq!(above2[0].e, 2);
        assert_eq!(above2[0].ideal, gen(&k, &[1, 1]));
    }

    #[test]
    fn factorization_reconstructs_p() {
        for k in [gauss(), sqrt2()] {
            for p in [2u64, 3, 5, 7, 11, 13] {
                let mut prod = FracIdeal::one(k.d);
                for rec in prime_ideals_above(&k, p).unwrap() {
                    for _ in 0..rec.e {
                        prod = ideal_mul(&k, &prod, &rec.ideal);
                    }
                }
                assert_eq!(prod, gen(&k, &[p as i64, 0]), "p={p}");
            }
        }
    }

    #[test]
    fn q_window_examples() {
        let k = gauss();
        let q3 = enumerate_q(&k, 3.0).unwrap();
        let norms: Vec<i64> = q3.iter().map(|r| r.norm.to_i64().unwrap()).collect();
        assert_eq!(norms, vec![5, 5, 9]);
        assert!(enumerate_q(&k, 1.2).unwrap().is_empty());
        assert_eq!(enumerate_q(&k, 2.0).unwrap().len(), 1);
    }

    #[test]
    fn pick_j_examples() {
        let k = gauss();
        let j = pick_j(&k, 3.0, 0.0).unwrap();
        assert_eq!(j.norm, Z::from(5));
        assert_eq!(j, enumerate_q(&k, 3.0).unwrap()[0]);
        assert!(pick_j(&k, 1.1, 0.0).is_err());
    }

    #[test]
    fn crt_examples() {
        let k = gauss();
        let o = FracIdeal::one(2);
        let p1 = gen(&k, &[2, 1]);
        let p2 = gen(&k, &[2, -1]);
        let a1 = FieldElement::zero(2);
        let a2 = FieldElement::one(2);
        let (a, l) = crt_intersect_cosets(&k, &o, &p1, &p2, &a1, &a2)
            .unwrap()
            .unwrap();
        assert_eq!(l, gen(&k, &[5, 0]));
        // a ≡ 0 mod ⟨2+i⟩ and ≡ 1 mod ⟨2-i⟩; 3+4i is one such representative.
        assert!(p1.contains(&a));
        assert!(p2.contains(&a.sub(&FieldElement::one(2))));
        let diff = a.sub(&FieldElement::from_int_coords(&[3, 4]));
        assert!(l.contains(&diff));

        let (a, l) = crt_intersect_cosets(&k, &o, &o, &o, &a1, &a1)
            .unwrap()
            .unwrap();
        assert!(a.is_zero());
        assert_eq!(l, o);

        let three = gen(&k, &[3, 0]);
        let r = crt_intersect_cosets(&k, &o, &three, &three, &a1, &a2).unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn crt_brute_force_small() {
        // Compare against residue enumeration for products of small primes.
        let k = gauss();
        let o = FracIdeal::one(2);
        let p1 = gen(&k, &[1, 1]); // norm 2
        let p2 = gen(&k, &[2, 1]); // norm 5
        let a1 = FieldElement::one(2);
        let a2 = FieldElement::from_int_coords(&[1, 1]);
        let (a, l) = crt_intersect_cosets(&k, &o, &p1, &p2, &a1, &a2)
            .unwrap()
            .unwrap();
        assert_eq!(l, ideal_intersect(&p1, &p2));
        // Every integral point in a box that is ≡ a mod L matches both cosets.
        for x in -10i64..=10 {
            for y in -10i64..=10 {
                let z = FieldElement::from_int_coords(&[x, y]);
                let in_both = p1.contains(&z.sub(&a1)) && p2.contains(&z.sub(&a2));
                let in_coset = l.contains(&z.sub(&a));
                assert_eq!(in_both, in_coset, "({x},{y})");
            }
        }
    }

    #[test]
    fn divisor_count_examples() {
        let k = gauss();
        assert_eq!(divisor_count(&k, &gen(&k, &[5, 0]), 3.0).unwrap(), 2);
        assert_eq!(divisor_count(&k, &FracIdeal::one(2), 3.0).unwrap(), 0);
        assert_eq!(divisor_count(&k, &gen(&k, &[3, 0]), 3.0).unwrap(), 1);
    }

    #[test]
    fn random_algebra_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for k in [gauss(), sqrt2()] {
            for _ in 0..30 {
                let a = FieldElement::from_int_coords(&[
                    rng.gen_range(-9i64..=9),
                    rng.gen_range(-9i64..=9),
                ]);
                let b = FieldElement::from_int_coords(&[
                    rng.gen_range(-9i64..=9),
                    rng.gen_range(-9i64..=9),
                ]);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                let ia = principal(&k, &a).unwrap();
                let ib = principal(&k, &b).unwrap();
                // Norm multiplicativity and the principal norm law.
                assert_eq!(
                    ideal_norm(&ideal_mul(&k, &ia, &ib)),
                    ideal_norm(&ia) * ideal_norm(&ib)
                );
                assert_eq!(ideal_norm(&ia), elem_norm(&k, &a).abs());
                // Inverse law.
                assert_eq!(
                    ideal_mul(&k, &ia, &ideal_inverse(&k, &ia)),
                    FracIdeal::one(k.d)
                );
                // Quotient law: I_ab ⊆ I_a and N(I_ab)/N(I_a) = index.
                let iab = ideal_mul(&k, &ia, &ib);
                assert!(iab.is_subset_of(&ia));
                let ratio = ideal_norm(&iab) / ideal_norm(&ia);
                let index = (zmat_det(&iab.hnf).abs() * ia.den.pow(k.d as u32))
                    / (zmat_det(&ia.hnf).abs() * iab.den.pow(k.d as u32));
                assert_eq!(ratio, q_from_z(index));
                // Modules are O_K-stable.
                assert!(ia.is_ok_module(&k));
                assert!(ideal_inverse(&k, &ia).is_ok_module(&k));
            }
        }
    }
}
