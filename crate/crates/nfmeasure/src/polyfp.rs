//! Univariate polynomial arithmetic and factorization over F_p, for the
//! Dedekind factorization of rational primes. Coefficients are `u64` residues;
//! products go through `u128`, so any p < 2^63 is safe (desk usage stays far
//! below that).

use crate::primes::{mul_mod, pow_mod};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense coefficients, low degree first, no trailing zeros (zero = empty vec).
pub type Poly = Vec<u64>;

pub fn trim(mut f: Poly) -> Poly {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

pub fn degree(f: &Poly) -> Option<usize> {
    if f.is_empty() {
        None
    } else {
        Some(f.len() - 1)
    }
}

pub fn reduce_bigint_poly(coeffs: &[BigInt], p: u64) -> Poly {
    let pz = BigInt::from(p);
    trim(
        coeffs
            .iter()
            .map(|c| {
                let r = c.mod_floor(&pz);
                r.to_u64().expect("residue fits u64")
            })
            .collect(),
    )
}

pub fn add(f: &Poly, g: &Poly, p: u64) -> Poly {
    let n = f.len().max(g.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let a = f.get(i).copied().unwrap_or(0);
        let b = g.get(i).copied().unwrap_or(0);
        out[i] = (a + b) % p;
    }
    trim(out)
}

pub fn sub(f: &Poly, g: &Poly, p: u64) -> Poly {
    let n = f.len().max(g.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let a = f.get(i).copied().unwrap_or(0);
        let b = g.get(i).copied().unwrap_or(0);
        out[i] = (a + p - b) % p;
    }
    trim(out)
}

pub fn mul(f: &Poly, g: &Poly, p: u64) -> Poly {
    if f.is_empty() || g.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; f.len() + g.len() - 1];
    for (i, &a) in f.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in g.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(a, b, p)) % p;
        }
    }
    trim(out)
}

pub fn scalar_mul(f: &Poly, c: u64, p: u64) -> Poly {
    trim(f.iter().map(|&a| mul_mod(a, c, p)).collect())
}

/// Remainder of f by monic-normalizable g.
pub fn rem(f: &Poly, g: &Poly, p: u64) -> Poly {
    let gd = degree(g).expect("division by zero polynomial");
    let lead_inv = pow_mod(g[gd], p - 2, p);
    let mut r = f.clone();
    while let Some(rd) = degree(&r) {
        if rd < gd {
            break;
        }
        let c = mul_mod(r[rd], lead_inv, p);
        let shift = rd - gd;
        for i in 0..=gd {
            let t = mul_mod(c, g[i], p);
            r[i + shift] = (r[i + shift] + p - t) % p;
        }
        r = trim(r);
    }
    r
}

pub fn make_monic(f: &Poly, p: u64) -> Poly {
    match degree(f) {
        None => vec![],
        Some(d) => {
            let inv = pow_mod(f[d], p - 2, p);
            scalar_mul(f, inv, p)
        }
    }
}

pub fn gcd(f: &Poly, g: &Poly, p: u64) -> Poly {
    let mut a = f.clone();
    let mut b = g.clone();
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    make_monic(&a, p)
}

pub fn derivative(f: &Poly, p: u64) -> Poly {
    if f.len() <= 1 {
        return vec![];
    }
    trim((1..f.len()).map(|i| mul_mod(f[i], (i as u64) % p, p)).collect())
}

/// g^e mod f.
pub fn pow_mod_poly(g: &Poly, mut e: u64, f: &Poly, p: u64) -> Poly {
    let mut base = rem(g, f, p);
    let mut acc = vec![1u64];
    while e > 0 {
        if e & 1 == 1 {
            acc = rem(&mul(&acc, &base, p), f, p);
        }
        base = rem(&mul(&base, &base, p), f, p);
        e >>= 1;
    }
    acc
}

/// Full factorization of a monic f over F_p into monic irreducibles with
/// multiplicities, in deterministic order (degree, then coefficients).
pub fn factor_monic(f: &Poly, p: u64) -> Vec<(Poly, u32)> {
    assert!(degree(f).is_some(), "cannot factor zero");
    let f = make_monic(f, p);
    let mut out: Vec<(Poly, u32)> = Vec::new();
    for (g, e) in squarefree_decomposition(&f, p) {
        for irr in factor_squarefree(&g, p) {
            merge_factor(&mut out, irr, e);
        }
    }
    out.sort_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)));
    out
}

fn merge_factor(out: &mut Vec<(Poly, u32)>, g: Poly, e: u32) {
    for item in out.iter_mut() {
        if item.0 == g {
            item.1 += e;
            return;
        }
    }
    out.push((g, e));
}

/// Squarefree decomposition in characteristic p, including the f = h(x^p)
/// degenerate case (then f = h~^p with h~ the p-th-root pullback).
fn squarefree_decomposition(f: &Poly, p: u64) -> Vec<(Poly, u32)> {
    if degree(f) == Some(0) {
        return vec![];
    }
    let df = derivative(f, p);
    if df.is_empty() {
        // f(x) = h(x^p); over F_p, c^(1/p) = c^(p^(k-1)) — for prime field, c itself
        // since Frobenius is identity on F_p.
        let mut h = Vec::new();
        let mut i = 0usize;
        while i < f.len() {
            h.push(f[i]);
            i += p as usize;
        }
        let h = trim(h);
        return squarefree_decomposition(&h, p)
            .into_iter()
            .map(|(g, e)| (g, e * p as u32))
            .collect();
    }
    let mut out = Vec::new();
    let mut c = gcd(f, &df, p);
    let mut w = divide_exact(f, &c, p);
    let mut i = 1u32;
    while degree(&w) != Some(0) {
        let y = gcd(&w, &c, p);
        let fac = divide_exact(&w, &y, p);
        if degree(&fac) != Some(0) {
            out.push((fac, i));
        }
        w = y.clone();
        c = divide_exact(&c, &y, p);
        i += 1;
    }
    if degree(&c) != Some(0) {
        // Remaining part is a p-th power.
        for (g, e) in squarefree_decomposition(&c, p) {
            out.push((g, e));
        }
    }
    out
}

fn divide_exact(f: &Poly, g: &Poly, p: u64) -> Poly {
    let gd = degree(g).unwrap();
    let fd = match degree(f) {
        None => return vec![],
        Some(d) => d,
    };
    assert!(fd >= gd);
    let lead_inv = pow_mod(g[gd], p - 2, p);
    let mut r = f.clone();
    let mut q = vec![0u64; fd - gd + 1];
    while let Some(rd) = degree(&r) {
        if rd < gd {
            break;
        }
        let c = mul_mod(r[rd], lead_inv, p);
        let shift = rd - gd;
        q[shift] = c;
        for i in 0..=gd {
            let t = mul_mod(c, g[i], p);
            r[i + shift] = (r[i + shift] + p - t) % p;
        }
        r = trim(r);
    }
    assert!(r.is_empty(), "non-exact division");
    trim(q)
}

/// Factor a squarefree monic polynomial: distinct-degree splitting, then
/// Cantor–Zassenhaus (odd p) or exhaustive trial division (p = 2).
fn factor_squarefree(f: &Poly, p: u64) -> Vec<Poly> {
    let n = degree(f).unwrap();
    if n == 0 {
        return vec![];
    }
    if n == 1 {
        return vec![make_monic(f, p)];
    }
    if p == 2 {
        return factor_trial(f, p);
    }
    let mut out = Vec::new();
    let mut rest = make_monic(f, p);
    let x = vec![0u64, 1];
    let mut h = x.clone(); // x^(p^i) mod f, updated against the shrinking rest
    let mut deg = 1usize;
    while let Some(rd) = degree(&rest) {
        if rd == 0 {
            break;
        }
        if deg * 2 > rd {
            out.push(rest.clone());
            break;
        }
        h = frobenius(&h, &rest, p);
        let split = gcd(&sub(&h, &x, p), &rest, p);
        if degree(&split).unwrap_or(0) > 0 {
            out.extend(equal_degree_split(&split, deg, p));
            rest = divide_exact(&rest, &split, p);
            h = rem(&h, &rest, p);
        }
        deg += 1;
    }
    out
}

/// h(x) -> h(x)^p mod f.
fn frobenius(h: &Poly, f: &Poly, p: u64) -> Poly {
    pow_mod_poly(h, p, f, p)
}

/// Cantor–Zassenhaus equal-degree splitting for odd p; f = product of
/// irreducibles of degree `deg`. Deterministically seeded for reproducibility.
fn equal_degree_split(f: &Poly, deg: usize, p: u64) -> Vec<Poly> {
    let n = degree(f).unwrap();
    if n == deg {
        return vec![make_monic(f, p)];
    }
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&p.to_le_bytes());
    seed[8..16].copy_from_slice(&(n as u64).to_le_bytes());
    for (i, c) in f.iter().take(2).enumerate() {
        seed[16 + 8 * i..24 + 8 * i].copy_from_slice(&c.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    let e = (p.pow(deg as u32) - 1) / 2;
    loop {
        let a: Poly = trim((0..n).map(|_| rng.gen_range(0..p)).collect());
        if degree(&a).unwrap_or(0) == 0 {
            continue;
        }
        let b = pow_mod_poly(&a, e, f, p);
        let g = gcd(&sub(&b, &vec![1], p), f, p);
        let gd = degree(&g).unwrap_or(0);
        if gd > 0 && gd < n {
            let mut out = equal_degree_split(&g, deg, p);
            out.extend(equal_degree_split(&divide_exact(f, &g, p), deg, p));
            return out;
        }
    }
}

/// Exhaustive trial division; only used for tiny fields (p = 2).
fn factor_trial(f: &Poly, p: u64) -> Vec<Poly> {
    let mut rest = make_monic(f, p);
    let mut out = Vec::new();
    let mut d = 1usize;
    while degree(&rest).unwrap_or(0) > 0 {
        let rd = degree(&rest).unwrap();
        if 2 * d > rd {
            out.push(rest);
            break;
        }
        let mut found = false;
        for mask in 0..p.pow(d as u32) {
            let mut cand: Poly = Vec::with_capacity(d + 1);
            let mut m = mask;
            for _ in 0..d {
                cand.push(m % p);
                m /= p;
            }
            cand.push(1);
            if rem(&rest, &cand, p).is_empty() {
                rest = divide_exact(&rest, &cand, p);
                out.push(cand);
                found = true;
                break;
            }
        }
        if !found {
            d += 1;
        }
    }
    out
}
