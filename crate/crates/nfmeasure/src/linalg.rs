//! Exact dense linear algebra for small matrices: rational Gauss–Jordan,
//! integer Hermite normal form (row style), and exact linear solves over Z.
//!
//! Matrices are `Vec<Vec<_>>` in row-major order. Lattices/modules are always
//! given by *rows* spanning them over Z.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Z = BigInt;
pub type Q = BigRational;

pub fn q_from_z<T: std::borrow::Borrow<Z>>(z: T) -> Q {
    Q::from_integer(z.borrow().clone())
}

pub fn q_to_f64(q: &Q) -> f64 {
    // Scale into i128 range before converting; adequate for the magnitudes
    // appearing here (coordinates and norms at desk scale).
    let n = q.numer();
    let d = q.denom();
    let bits = n.bits().max(d.bits());
    if bits <= 100 {
        let nf = bigint_to_f64(n);
        let df = bigint_to_f64(d);
        nf / df
    } else {
        let shift = bits - 100;
        let n2 = n >> shift;
        let d2 = d >> shift;
        bigint_to_f64(&n2) / bigint_to_f64(&d2)
    }
}

fn bigint_to_f64(z: &Z) -> f64 {
    let (sign, digits) = z.to_u64_digits();
    let mut v = 0.0f64;
    for d in digits.iter().rev() {
        v = v * 18446744073709551616.0 + *d as f64;
    }
    match sign {
        num_bigint::Sign::Minus => -v,
        _ => v,
    }
}

pub fn qmat_identity(d: usize) -> Vec<Vec<Q>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect()
}

pub fn qmat_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![Q::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                let t = &a[i][l] * &b[l][j];
                out[i][j] += t;
            }
        }
    }
    out
}

/// Row vector times matrix: (x M)_j = Σ_i x_i M[i][j].
pub fn qvec_mat(x: &[Q], m: &[Vec<Q>]) -> Vec<Q> {
    let cols = m[0].len();
    let mut out = vec![Q::zero(); cols];
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for j in 0..cols {
            out[j] += xi * &m[i][j];
        }
    }
    out
}

/// Matrix times column vector: (M x)_i = Σ_j M[i][j] x_j.
pub fn qmat_vec(m: &[Vec<Q>], x: &[Q]) -> Vec<Q> {
    m.iter()
        .map(|row| {
            let mut s = Q::zero();
            for (a, b) in row.iter().zip(x) {
                s += a * b;
            }
            s
        })
        .collect()
}

pub fn qmat_transpose(m: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = m.len();
    let c = m[0].len();
    (0..c).map(|j| (0..n).map(|i| m[i][j].clone()).collect()).collect()
}

pub fn qmat_det(m: &[Vec<Q>]) -> Q {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut det = Q::one();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero());
        let piv = match piv {
            Some(p) => p,
            None => return Q::zero(),
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col].clone();
        let inv = a[col][col].recip();
        for j in col..n {
            let t = &a[col][j] * &inv;
            a[col][j] = t;
        }
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in col..n {
                let t = &a[col][j] * &f;
                a[r][j] -= t;
            }
        }
    }
    det
}

/// Exact inverse via Gauss–Jordan; `None` when singular.
pub fn qmat_inverse(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut inv = qmat_identity(n);
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(piv, col);
        inv.swap(piv, col);
        let f = a[col][col].recip();
        for j in 0..n {
            a[col][j] *= f.clone();
            inv[col][j] *= f.clone();
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = &a[col][j] * &f;
                a[r][j] -= t;
                let t = &inv[col][j] * &f;
                inv[r][j] -= t;
            }
        }
    }
    Some(inv)
}

pub fn zmat_det(m: &[Vec<Z>]) -> Z {
    let q: Vec<Vec<Q>> = m.iter().map(|r| r.iter().map(q_from_z).collect()).collect();
    let d = qmat_det(&q);
    debug_assert!(d.is_integer());
    d.to_integer()
}

/// Row-style Hermite normal form of a full-column-rank integer matrix
/// (rows span the lattice, n ≥ d). Returns the d×d upper-triangular basis with
/// positive diagonal and entries above each pivot reduced into [0, pivot).
pub fn hnf(rows: &[Vec<Z>]) -> Vec<Vec<Z>> {
    hnf_with_transform(rows).0
}

/// As [`hnf`], but also returns U (n×n, unimodular) with U·rows = [H; 0].
pub fn hnf_with_transform(rows: &[Vec<Z>]) -> (Vec<Vec<Z>>, Vec<Vec<Z>>) {
    let n = rows.len();
    let d = rows[0].len();
    let mut a: Vec<Vec<Z>> = rows.to_vec();
    let mut u: Vec<Vec<Z>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Z::one() } else { Z::zero() }).collect())
        .collect();
    let mut pivot_row = 0usize;
    for col in 0..d {
        // Euclidean reduction: shrink entries in this column below pivot_row
        // until at most one is nonzero.
        loop {
            let mut idx: Vec<usize> =
                (pivot_row..n).filter(|&r| !a[r][col].is_zero()).collect();
            if idx.len() <= 1 {
                break;
            }
            idx.sort_by_key(|&r| a[r][col].abs());
            let small = idx[0];
            for &r in &idx[1..] {
                let qt = div_round(&a[r][col], &a[small][col]);
                if !qt.is_zero() {
                    for j in 0..d {
                        let t = &a[small][j] * &qt;
                        a[r][j] -= t;
                    }
                    for j in 0..n {
                        let t = &u[small][j] * &qt;
                        u[r][j] -= t;
                    }
                }
            }
        }
        let nz = (pivot_row..n).find(|&r| !a[r][col].is_zero());
        let nz = match nz {
            Some(r) => r,
            None => continue, // rank-deficient column; callers require full rank
        };
        a.swap(nz, pivot_row);
        u.swap(nz, pivot_row);
        if a[pivot_row][col].is_negative() {
            for j in 0..d {
                a[pivot_row][j] = -a[pivot_row][j].clone();
            }
            for j in 0..n {
                u[pivot_row][j] = -u[pivot_row][j].clone();
            }
        }
        // Reduce entries above the pivot into [0, pivot).
        for r in 0..pivot_row {
            let qt = a[r][col].div_floor(&a[pivot_row][col]);
            if !qt.is_zero() {
                for j in 0..d {
                    let t = &a[pivot_row][j] * &qt;
                    a[r][j] -= t;
                }
                for j in 0..n {
                    let t = &u[pivot_row][j] * &qt;
                    u[r][j] -= t;
                }
            }
        }
        pivot_row += 1;
        if pivot_row == d.min(n) {
            break;
        }
    }
    // Re-reduce above the diagonal (later pivots can disturb earlier columns).
    for col in (0..pivot_row).rev() {
        for r in 0..col {
            let qt = a[r][col].div_floor(&a[col][col]);
            if !qt.is_zero() {
                for j in 0..d {
                    let t = &a[col][j] * &qt;
                    a[r][j] -= t;
                }
                for j in 0..n {
                    let t = &u[col][j] * &qt;
                    u[r][j] -= t;
                }
            }
        }
    }
    (a[..pivot_row].to_vec(), u)
}

/// Nearest-integer quotient (rounds half toward zero bias is fine here).
fn div_round(a: &Z, b: &Z) -> Z {
    let (q, r) = a.div_rem(b);
    let two_r: Z = &r * 2;
    if two_r.abs() > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Solve z·rows = target over Z (rows n×d spanning a rank-d lattice).
/// Returns `None` when target is not in the row span over Z.
pub fn solve_integer(rows: &[Vec<Z>], target: &[Z]) -> Option<Vec<Z>> {
    let n = rows.len();
    let d = rows[0].len();
    let (h, u) = hnf_with_transform(rows);
    if h.len() < d {
        return None;
    }
    // Forward substitution on the triangular H: target = y·H.
    let mut y = vec![Z::zero(); n];
    for j in 0..d {
        let mut acc = target[j].clone();
        for i in 0..j {
            acc -= &y[i] * &h[i][j];
        }
        let (q, r) = acc.div_rem(&h[j][j]);
        if !r.is_zero() {
            return None;
        }
        y[j] = q;
    }
    // z = y·U.
    let mut z = vec![Z::zero(); n];
    for i in 0..n {
        if y[i].is_zero() {
            continue;
        }
        for j in 0..n {
            z[j] += &y[i] * &u[i][j];
        }
    }
    Some(z)
}

/// Clear denominators of rational rows and return (den, integer rows) with
/// rows·(1/den) equal to the input span.
pub fn clear_denominators(rows: &[Vec<Q>]) -> (Z, Vec<Vec<Z>>) {
    let mut den = Z::one();
    for row in rows {
        for x in row {
            den = den.lcm(x.denom());
        }
    }
    let int_rows = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    let scaled = x * q_from_z(&den);
                    debug_assert!(scaled.is_integer());
                    scaled.to_integer()
                })
                .collect()
        })
        .collect();
    (den, int_rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zm(rows: &[&[i64]]) -> Vec<Vec<Z>> {
        rows.iter().map(|r| r.iter().map(|&x| Z::from(x)).collect()).collect()
    }

    #[test]
    fn hnf_triangularizes_and_reduces() {
        let m = zm(&[&[4, 6], &[2, 5]]);
        let h = hnf(&m);
        assert_eq!(h, zm(&[&[2, 1], &[0, 4]]));
        // Same lattice: determinant preserved up to sign, membership preserved.
        assert_eq!(zmat_det(&h).abs(), zmat_det(&m).abs());
    }

    #[test]
    fn hnf_redundant_rows() {
        let m = zm(&[&[1, 0], &[0, 1], &[3, 7]]);
        let h = hnf(&m);
        assert_eq!(h, zm(&[&[1, 0], &[0, 1]]));
    }

    #[test]
    fn solve_integer_roundtrip() {
        let m = zm(&[&[2, 1], &[0, 3]]);
        let t = vec![Z::from(4), Z::from(8)];
        let z = solve_integer(&m, &t).unwrap();
        let mut back = vec![Z::zero(); 2];
        for i in 0..2 {
            for j in 0..2 {
                back[j] += &z[i] * &m[i][j];
            }
        }
        assert_eq!(back, t);
        assert!(solve_integer(&m, &[Z::from(1), Z::from(1)]).is_none());
    }

    #[test]
    fn qmat_inverse_identity() {
        let m: Vec<Vec<Q>> = zm(&[&[2, 1], &[1, 1]])
            .iter()
            .map(|r| r.iter().map(q_from_z).collect())
            .collect();
        let inv = qmat_inverse(&m).unwrap();
        let prod = qmat_mul(&m, &inv);
        assert_eq!(prod, qmat_identity(2));
    }

    #[test]
    fn det_exact() {
        let m = zm(&[&[3, 1], &[1, 2]]);
        assert_eq!(zmat_det(&m), Z::from(5));
    }
}
