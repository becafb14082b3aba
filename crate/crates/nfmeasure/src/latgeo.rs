//! Geometry of the lattices attached to fractional ideals: exact point
//! enumeration in boxes, coset representatives R(I) = I⁻¹ ∩ [0,1)^d, distances,
//! pairwise separation, lattice exponential sums, and the finite-witness
//! membership test for the well-approximable set E(K,B,τ).

use crate::idealalg::{
    ideal_inverse, ideal_intersect, ideal_mul, ideal_norm, ideal_norm_f64, principal,
    primes_in_norm_window, FracIdeal,
};
use crate::linalg::{q_from_z, q_to_f64, Q, Z};
use crate::nfcore::{FieldElement, NumberField};
use crate::{Error, Result};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

pub const DEFAULT_ENUM_CAP: usize = 1_000_000;

/// A fractional ideal viewed as a lattice in R^d: rational basis rows with a
/// float mirror, and the covolume (= ideal norm in power-basis coordinates).
#[derive(Debug, Clone)]
pub struct LatticeView {
    pub ideal: FracIdeal,
    pub basis_q: Vec<Vec<Q>>,
    pub basis_f64: Vec<Vec<f64>>,
    pub covolume: Q,
}

impl LatticeView {
    pub fn new(ideal: FracIdeal) -> LatticeView {
        let basis_q = ideal.q_basis();
        let basis_f64 = basis_q
            .iter()
            .map(|r| r.iter().map(q_to_f64).collect())
            .collect();
        let covolume = ideal_norm(&ideal);
        LatticeView {
            ideal,
            basis_q,
            basis_f64,
            covolume,
        }
    }
}

fn f64_to_q(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

/// Exact lattice points of the module `I` inside the half-open box
/// [lo, hi), by recursive coordinate bounding on the triangular HNF basis.
pub fn points_in_box(i: &FracIdeal, lo: &[f64], hi: &[f64], cap: usize) -> Result<Vec<FieldElement>> {
    let lo_q: Vec<Q> = lo.iter().map(|&x| f64_to_q(x)).collect();
    let hi_q: Vec<Q> = hi.iter().map(|&x| f64_to_q(x)).collect();
    points_in_box_q(i, &lo_q, &hi_q, cap)
}

pub fn points_in_box_q(
    i: &FracIdeal,
    lo: &[Q],
    hi: &[Q],
    cap: usize,
) -> Result<Vec<FieldElement>> {
    let d = i.dim();
    for c in 0..d {
        if lo[c] >= hi[c] {
            return Err(Error::InvalidParam("box must satisfy lo < hi".into()));
        }
    }
    // Volume-based cap pre-check.
    let mut vol = Q::one();
    for c in 0..d {
        vol *= &hi[c] - &lo[c];
    }
    let est = q_to_f64(&vol) / q_to_f64(&ideal_norm(i)).max(f64::MIN_POSITIVE);
    if est > 4.0 * cap as f64 {
        return Err(Error::CapExceeded(format!(
            "estimated {est:.3e} lattice points exceeds cap {cap}"
        )));
    }
    let basis = i.q_basis();
    let mut out = Vec::new();
    let mut coeffs = vec![Z::zero(); d];
    let mut partial = vec![vec![Q::zero(); d]; d + 1];
    enumerate_rec(&basis, lo, hi, 0, &mut coeffs, &mut partial, &mut out, cap)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn enumerate_rec(
    basis: &[Vec<Q>],
    lo: &[Q],
    hi: &[Q],
    depth: usize,
    coeffs: &mut Vec<Z>,
    partial: &mut Vec<Vec<Q>>,
    out: &mut Vec<FieldElement>,
    cap: usize,
) -> Result<()> {
    let d = basis.len();
    if depth == d {
        if out.len() >= cap {
            return Err(Error::CapExceeded(format!("more than {cap} lattice points")));
        }
        out.push(FieldElement {
            coords: partial[d].clone(),
        });
        return Ok(());
    }
    // Coordinate `depth` receives contributions only from rows 0..=depth of the
    // upper-triangular basis, so the admissible coefficient range is an interval.
    let b = &basis[depth][depth];
    let p = partial[depth][depth].clone();
    let lo_bound = (&lo[depth] - &p) / b;
    let hi_bound = (&hi[depth] - &p) / b;
    let z_min = lo_bound.ceil().to_integer();
    let hi_ceil = hi_bound.ceil();
    let z_max = if hi_ceil == hi_bound {
        hi_bound.to_integer() - 1
    } else {
        hi_bound.floor().to_integer()
    };
    let mut z = z_min;
    while z <= z_max {
        coeffs[depth] = z.clone();
        let zq = q_from_z(&z);
        let row = partial[depth].clone();
        for c in 0..d {
            partial[depth + 1][c] = &row[c] + &(&zq * &basis[depth][c]);
        }
        enumerate_rec(basis, lo, hi, depth + 1, coeffs, partial, out, cap)?;
        z += 1;
    }
    Ok(())
}

/// R(I) = I⁻¹ ∩ [0,1)^d, a complete set of representatives of I⁻¹/O_K.
pub fn representatives(k: &NumberField, i: &FracIdeal) -> Result<Vec<FieldElement>> {
    if !i.is_integral() {
        return Err(Error::InvalidParam("representatives needs an integral ideal".into()));
    }
    let inv = ideal_inverse(k, i);
    let lo = vec![Q::zero(); k.d];
    let hi = vec![Q::one(); k.d];
    let pts = points_in_box_q(&inv, &lo, &hi, DEFAULT_ENUM_CAP)?;
    let n = ideal_norm(i);
    if q_from_z(Z::from(pts.len())) != n {
        return Err(Error::Numerical(format!(
            "|R(I)| = {} but N(I) = {}",
            pts.len(),
            n
        )));
    }
    Ok(pts)
}

/// dist(x, I⁻¹): exact minimum over the lattice points of I⁻¹ near x.
pub fn dist_to_lattice(k: &NumberField, x: &[f64], i: &FracIdeal) -> f64 {
    let inv = ideal_inverse(k, i);
    dist_to_module(x, &inv)
}

/// Distance from x to the lattice spanned by the module's basis.
pub fn dist_to_module(x: &[f64], module: &FracIdeal) -> f64 {
    let view = LatticeView::new(module.clone());
    let d = view.basis_f64.len();
    // Round the basis coefficients of x (forward substitution on the
    // triangular basis) to land on a nearby lattice point.
    let mut y = vec![0.0f64; d];
    for c in 0..d {
        let mut acc = x[c];
        for j in 0..c {
            acc -= y[j] * view.basis_f64[j][c];
        }
        y[c] = acc / view.basis_f64[c][c];
    }
    let mut t0 = vec![0.0f64; d];
    for j in 0..d {
        let r = y[j].round();
        for c in 0..d {
            t0[c] += r * view.basis_f64[j][c];
        }
    }
    let r0: f64 = x
        .iter()
        .zip(&t0)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if r0 == 0.0 {
        return 0.0;
    }
    let lo: Vec<f64> = x.iter().map(|&c| c - r0 * 1.0000001 - 1e-12).collect();
    let hi: Vec<f64> = x.iter().map(|&c| c + r0 * 1.0000001 + 1e-12).collect();
    let pts = points_in_box(module, &lo, &hi, DEFAULT_ENUM_CAP)
        .expect("distance search box within cap");
    let mut best = r0;
    for p in &pts {
        let dist: f64 = p
            .coords
            .iter()
            .zip(x)
            .map(|(c, &xc)| {
                let v = q_to_f64(c) - xc;
                v * v
            })
            .sum::<f64>()
            .sqrt();
        best = best.min(dist);
    }
    best
}

#[derive(Debug, Clone)]
pub struct SeparationResult {
    pub min_sep: f64,
    /// (N(I₁ ∩ I₂))^{-1/d} / C_B.
    pub bound: f64,
    pub pairs_checked: usize,
}

/// Minimum distance between distinct points r₁ ∈ I₁⁻¹, r₂ ∈ I₂⁻¹ in a box,
/// checked against the separation lemma bound.
pub fn min_separation(
    k: &NumberField,
    i1: &FracIdeal,
    i2: &FracIdeal,
    lo: &[f64],
    hi: &[f64],
) -> Result<SeparationResult> {
    let p1 = points_in_box(&ideal_inverse(k, i1), lo, hi, DEFAULT_ENUM_CAP)?;
    let p2 = points_in_box(&ideal_inverse(k, i2), lo, hi, DEFAULT_ENUM_CAP)?;
    let mut best_sq: Option<Q> = None;
    let mut pairs = 0usize;
    for a in &p1 {
        for b in &p2 {
            if a == b {
                continue;
            }
            pairs += 1;
            let sq: Q = a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| {
                    let v = x - y;
                    &v * &v
                })
                .sum();
            if best_sq.as_ref().map_or(true, |cur| &sq < cur) {
                best_sq = Some(sq);
            }
        }
    }
    let min_sep = best_sq
        .map(|sq| q_to_f64(&sq).sqrt())
        .unwrap_or(f64::INFINITY);
    let n_cap = ideal_norm_f64(&ideal_intersect(i1, i2));
    let bound = n_cap.powf(-1.0 / k.d as f64) / k.c_b;
    if min_sep < bound * (1.0 - 1e-9) {
        return Err(Error::Numerical(format!(
            "separation lemma violated: min {min_sep} < bound {bound}"
        )));
    }
    Ok(SeparationResult {
        min_sep,
        bound,
        pairs_checked: pairs,
    })
}

/// Σ_{r ∈ R(I)} e(r·s) with e(u) = e^{-2πiu}, phases reduced mod 1 exactly,
/// together with the exact spectrum predicate s ∈ T(δ⁻¹ I).
pub fn exp_sum(k: &NumberField, i: &FracIdeal, s: &[i64]) -> Result<(Complex64, bool)> {
    let reps = representatives(k, i)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for r in &reps {
        let dot: Q = r
            .coords
            .iter()
            .zip(s)
            .map(|(c, &si)| c * q_from_z(Z::from(si)))
            .sum();
        let frac = &dot - dot.floor();
        let angle = -2.0 * std::f64::consts::PI * q_to_f64(&frac);
        acc += Complex64::new(angle.cos(), angle.sin());
    }
    Ok((acc, in_spectrum(k, i, s)))
}

/// Exact test s ∈ T(δ⁻¹I), i.e. T⁻¹s ∈ δ⁻¹I.
pub fn in_spectrum(k: &NumberField, i: &FracIdeal, s: &[i64]) -> bool {
    let sq: Vec<Q> = s.iter().map(|&v| q_from_z(Z::from(v))).collect();
    let v = k.t_inv_apply(&sq);
    let delta_inv = ideal_inverse(
        k,
        &principal(k, &k.poly_derivative_at_theta()).expect("nonzero derivative"),
    );
    let target = ideal_mul(k, &delta_inv, i);
    target.contains(&FieldElement { coords: v })
}

/// All integral ideals with 2 ≤ N(I) ≤ bound (plus optionally O_K), by
/// multiplicative enumeration over prime ideals, sorted by (norm, HNF).
pub fn integral_ideals_up_to(
    k: &NumberField,
    bound: u64,
    include_unit: bool,
) -> Result<Vec<(FracIdeal, u64)>> {
    let primes = primes_in_norm_window(k, 2.0, bound as f64)?;
    let mut out: Vec<(FracIdeal, u64)> = Vec::new();
    if include_unit {
        out.push((FracIdeal::one(k.d), 1));
    }
    fn rec(
        k: &NumberField,
        primes: &[(FracIdeal, u64)],
        idx: usize,
        cur: &FracIdeal,
        norm: u64,
        bound: u64,
        out: &mut Vec<(FracIdeal, u64)>,
    ) {
        for (i, (p, np)) in primes.iter().enumerate().skip(idx) {
            if norm.saturating_mul(*np) > bound {
                continue;
            }
            let next = ideal_mul(k, cur, p);
            let nn = norm * np;
            out.push((next.clone(), nn));
            rec(k, primes, i, &next, nn, bound, out);
        }
    }
    let plist: Vec<(FracIdeal, u64)> = primes
        .into_iter()
        .map(|r| {
            let n = r.norm.to_u64().expect("desk-scale norm");
            (r.ideal, n)
        })
        .collect();
    rec(k, &plist, 0, &FracIdeal::one(k.d), 1, bound, &mut out);
    out.sort_by(|a, b| (a.1, &a.0.hnf).cmp(&(b.1, &b.0.hnf)));
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct MembershipWitness {
    pub norm: u64,
    pub dist: f64,
    pub bound: f64,
}

/// Finite proxy for x ∈ E(K,B,τ): count integral ideals I with N(I) ≤
/// norm_bound and dist(x, I⁻¹) ≤ N(I)^{-(τ+1)/d}; true when at least
/// `min_witnesses` such ideals exist.
pub fn e_membership(
    k: &NumberField,
    x: &[f64],
    tau: f64,
    norm_bound: u64,
    min_witnesses: usize,
) -> Result<(bool, Vec<MembershipWitness>)> {
    if tau <= 1.0 {
        return Err(Error::InvalidParam("e_membership requires tau > 1".into()));
    }
    let mut witnesses = Vec::new();
    for (ideal, norm) in integral_ideals_up_to(k, norm_bound, true)? {
        let bound = (norm as f64).powf(-(tau + 1.0) / k.d as f64);
        let dist = dist_to_lattice(k, x, &ideal);
        if dist <= bound {
            witnesses.push(MembershipWitness { norm, dist, bound });
        }
    }
    Ok((witnesses.len() >= min_witnesses, witnesses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfcore::{nf_from_polynomial, poly_from_i64};

    fn gauss() -> NumberField {
        nf_from_polynomial(&poly_from_i64(&[1, 0, 1]), false).unwrap()
    }

    fn gen(k: &NumberField, v: &[i64]) -> FracIdeal {
        principal(k, &FieldElement::from_int_coords(v)).unwrap()
    }

    fn half(a: i64, b: i64) -> FieldElement {
        FieldElement {
            coords: vec![Q::new(Z::from(a), Z::from(2)), Q::new(Z::from(b), Z::from(2))],
        }
    }

    #[test]
    fn points_in_box_examples() {
        let k = gauss();
        let i = gen(&k, &[1, 1]);
        let inv = ideal_inverse(&k, &i);
        let pts = points_in_box(&inv, &[0.0, 0.0], &[1.0, 1.0], 1000).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts.contains(&FieldElement::zero(2)));
        assert!(pts.contains(&half(1, 1)));

        let o = FracIdeal::one(2);
        let pts = points_in_box(&o, &[0.0, 0.0], &[1.0, 1.0], 1000).unwrap();
        assert_eq!(pts, vec![FieldElement::zero(2)]);

        let third = principal(
            &k,
            &FieldElement {
                coords: vec![Q::new(Z::one(), Z::from(3)), Q::zero()],
            },
        )
        .unwrap();
        let pts = points_in_box(&third, &[0.0, 0.0], &[1.0, 1.0], 1000).unwrap();
        assert_eq!(pts.len(), 9);
    }

    #[test]
    fn cap_is_enforced() {
        let k = gauss();
        let third = principal(
            &k,
            &FieldElement {
                coords: vec![Q::new(Z::one(), Z::from(3)), Q::zero()],
            },
        )
        .unwrap();
        assert!(matches!(
            points_in_box(&third, &[0.0, 0.0], &[100.0, 100.0], 10),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn representatives_examples() {
        let k = gauss();
        let r = representatives(&k, &gen(&k, &[1, 1])).unwrap();
        assert_eq!(r.len(), 2);
        let r = representatives(&k, &FracIdeal::one(2)).unwrap();
        assert_eq!(r, vec![FieldElement::zero(2)]);
        let r = representatives(&k, &gen(&k, &[3, 0])).unwrap();
        assert_eq!(r.len(), 9);
        for p in &r {
            for c in &p.coords {
                assert!(c.denom() == &Z::from(3) || c.denom().is_one());
            }
        }
    }

    #[test]
    fn representative_count_matches_norm() {
        let k = gauss();
        for (ideal, norm) in integral_ideals_up_to(&k, 200, true).unwrap() {
            let r = representatives(&k, &ideal).unwrap();
            assert_eq!(r.len() as u64, norm);
        }
    }

    #[test]
    fn pairwise_differences_leave_ok() {
        let k = gauss();
        let o = FracIdeal::one(2);
        for v in [[1i64, 1], [3, 0], [2, 1]] {
            let i = gen(&k, &v);
            let reps = representatives(&k, &i).unwrap();
            for (a, x) in reps.iter().enumerate() {
                for y in reps.iter().skip(a + 1) {
                    assert!(!o.contains(&x.sub(y)));
                }
            }
        }
    }

    #[test]
    fn translation_completeness() {
        // For r0 ∈ I⁻¹, {r0 + r mod Z^d} is again R(I).
        let k = gauss();
        let i = gen(&k, &[2, 1]);
        let reps = representatives(&k, &i).unwrap();
        let r0 = &reps[1];
        let mut translated: Vec<Vec<Q>> = reps
            .iter()
            .map(|r| {
                r.add(r0)
                    .coords
                    .iter()
                    .map(|c| c - c.floor())
                    .collect()
            })
            .collect();
        let mut orig: Vec<Vec<Q>> = reps.iter().map(|r| r.coords.clone()).collect();
        translated.sort();
        orig.sort();
        assert_eq!(translated, orig);
    }

    #[test]
    fn dist_examples() {
        let k = gauss();
        let d = dist_to_lattice(&k, &[0.5, 0.5], &FracIdeal::one(2));
        assert!((d - 2f64.sqrt() / 2.0).abs() < 1e-12);
        let d = dist_to_lattice(&k, &[0.5, 0.5], &gen(&k, &[1, 1]));
        assert!(d < 1e-12);
        let d = dist_to_lattice(&k, &[0.0, 0.0], &gen(&k, &[3, 0]));
        assert!(d < 1e-12);
    }

    #[test]
    fn dist_periodic_under_integers() {
        let k = gauss();
        let i = gen(&k, &[2, 1]);
        for x in [[0.3, 0.7], [0.11, 0.52]] {
            let d0 = dist_to_lattice(&k, &x, &i);
            let d1 = dist_to_lattice(&k, &[x[0] + 3.0, x[1] - 2.0], &i);
            assert!((d0 - d1).abs() < 1e-10);
        }
    }

    #[test]
    fn separation_examples() {
        let k = gauss();
        let three = gen(&k, &[3, 0]);
        let r = min_separation(&k, &three, &three, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((r.min_sep - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.bound - 1.0 / (3.0 * 2f64.sqrt())).abs() < 1e-12);

        let o = FracIdeal::one(2);
        let r = min_separation(&k, &o, &o, &[0.0, 0.0], &[2.0, 2.0]).unwrap();
        assert!((r.min_sep - 1.0).abs() < 1e-12);

        let r = min_separation(&k, &gen(&k, &[2, 1]), &gen(&k, &[2, -1]), &[0.0, 0.0], &[1.0, 1.0])
            .unwrap();
        assert!(r.min_sep >= 1.0 / (5.0 * 2f64.sqrt()) - 1e-12);
    }

    #[test]
    fn exp_sum_examples() {
        let k = gauss();
        let i = gen(&k, &[1, 1]);
        let (v, inside) = exp_sum(&k, &i, &[1, 1]).unwrap();
        assert!(inside);
        assert!((v.re - 2.0).abs() < 1e-12 && v.im.abs() < 1e-12);
        let (v, inside) = exp_sum(&k, &i, &[1, 0]).unwrap();
        assert!(!inside);
        assert!(v.norm() < 1e-12);
        let (v, inside) = exp_sum(&k, &gen(&k, &[3, 0]), &[0, 0]).unwrap();
        assert!(inside);
        assert!((v.re - 9.0).abs() < 1e-12);
    }

    #[test]
    fn exp_sum_dichotomy_scan() {
        let k = gauss();
        for v in [[1i64, 1], [3, 0], [2, 1]] {
            let i = gen(&k, &v);
            let n = ideal_norm_f64(&i);
            for s0 in -6..=6 {
                for s1 in -6..=6 {
                    let (val, inside) = exp_sum(&k, &i, &[s0, s1]).unwrap();
                    let expect = if inside { n } else { 0.0 };
                    assert!(
                        (val.re - expect).abs() < 1e-9 && val.im.abs() < 1e-9,
                        "I={v:?} s=({s0},{s1}) val={val}"
                    );
                }
            }
        }
    }

    #[test]
    fn ideal_enumeration_is_complete_for_small_norms() {
        let k = gauss();
        let all = integral_ideals_up_to(&k, 25, true).unwrap();
        // Norm counts in Z[i] for n = 1..25 (number of ideals of each norm).
        let mut by_norm = std::collections::BTreeMap::new();
        for (_, n) in &all {
            *by_norm.entry(*n).or_insert(0usize) += 1;
        }
        assert_eq!(by_norm.get(&1), Some(&1));
        assert_eq!(by_norm.get(&2), Some(&1));
        assert_eq!(by_norm.get(&5), Some(&2));
        assert_eq!(by_norm.get(&25), Some(&3)); // ⟨2+i⟩², ⟨2+i⟩⟨2−i⟩, ⟨2−i⟩²
        assert_eq!(by_norm.get(&3), None);
        assert_eq!(by_norm.get(&9), Some(&1));
    }

    #[test]
    fn membership_examples() {
        let k = gauss();
        let (ok, w) = e_membership(&k, &[0.0, 0.0], 2.0, 30, 3).unwrap();
        assert!(ok);
        assert_eq!(
            w.len(),
            integral_ideals_up_to(&k, 30, true).unwrap().len(),
            "origin is in every inverse-ideal lattice"
        );
        // Golden-ratio coordinates are badly approximable: far fewer witnesses.
        let g = 0.618033988749894848;
        let (_, w_bad) = e_membership(&k, &[g, g], 2.0, 30, 3).unwrap();
        assert!(w_bad.len() < w.len());
    }
}
