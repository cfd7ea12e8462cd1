//! Exact linear algebra over the rationals and integers: rank computation,
//! a fast modular rank bound used to certify exactness, and Smith normal
//! form with transformation matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rank of a rational matrix, by fraction-free elimination.
pub fn rank_exact(m: &[Vec<BigRational>]) -> usize {
    if m.is_empty() || m[0].is_empty() {
        return 0;
    }
    // clear denominators row by row
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
        })
        .collect();
    rank_int(&mut a)
}

/// Rank of an integer matrix. Rows are divided by their gcd after every
/// elimination step to control coefficient growth.
pub fn rank_int(a: &mut [Vec<BigInt>]) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut rank = 0;
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row == rows {
            break;
        }
        let Some(p) = (pivot_row..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(pivot_row, p);
        for r in (pivot_row + 1)..rows {
            if a[r][col].is_zero() {
                continue;
            }
            let g = a[pivot_row][col].gcd(&a[r][col]);
            let f_pivot = &a[r][col] / &g;
            let f_row = &a[pivot_row][col] / &g;
            for c in col..cols {
                let v = &a[r][c] * &f_row - &a[pivot_row][c] * &f_pivot;
                a[r][c] = v;
            }
            normalize_row(&mut a[r]);
        }
        pivot_row += 1;
        rank += 1;
    }
    rank
}

fn normalize_row(row: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for v in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            return;
        }
    }
    if g > BigInt::one() {
        for v in row.iter_mut() {
            *v = &*v / &g;
        }
    }
}

pub const RANK_PRIME: u64 = 2_147_483_647;

/// Rank of the matrix reduced mod `RANK_PRIME`. Always a lower bound for
/// the rational rank, with equality unless the prime divides a pivot minor.
/// Returns `None` if some denominator vanishes mod p.
pub fn rank_mod_p(m: &[Vec<BigRational>]) -> Option<usize> {
    let p = RANK_PRIME;
    if m.is_empty() || m[0].is_empty() {
        return Some(0);
    }
    let reduce = |x: &BigRational| -> Option<u64> {
        let num = ((x.numer() % p) + p) % p;
        let den = ((x.denom() % p) + p) % p;
        let num: u64 = num.try_into().ok()?;
        let den: u64 = den.try_into().ok()?;
        if den == 0 {
            return None;
        }
        Some(num * inv_mod(den, p) % p)
    };
    let mut a: Vec<Vec<u64>> = Vec::with_capacity(m.len());
    for row in m {
        let mut r = Vec::with_capacity(row.len());
        for x in row {
            r.push(reduce(x)?);
        }
        a.push(r);
    }
    Some(rank_mod_matrix(&mut a, p))
}

fn rank_mod_matrix(a: &mut [Vec<u64>], p: u64) -> usize {
    let rows = a.len();
    let cols = a[0].len();
    let mut rank = 0;
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row == rows {
            break;
        }
        let Some(pr) = (pivot_row..rows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(pivot_row, pr);
        let inv = inv_mod(a[pivot_row][col], p);
        for r in (pivot_row + 1)..rows {
            if a[r][col] == 0 {
                continue;
            }
            let factor = a[r][col] * inv % p;
            for c in col..cols {
                let sub = factor * a[pivot_row][c] % p;
                a[r][c] = (a[r][c] + p - sub) % p;
            }
        }
        pivot_row += 1;
        rank += 1;
    }
    rank
}

fn inv_mod(x: u64, p: u64) -> u64 {
    // Fermat; p is prime and fits in 32 bits so products fit in u64... they
    // do not quite (p ~ 2^31), so use u128 in the square-and-multiply.
    let mut base = x as u128;
    let mut exp = p - 2;
    let modulus = p as u128;
    let mut acc: u128 = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc as u64
}

/// An integer diagonalization `U * A * V = S` with `U`, `V` unimodular and
/// `S` diagonal. This is Smith normal form except that the divisibility
/// chain on the diagonal is not enforced; lattice-membership questions only
/// need diagonality.
pub struct Smith {
    pub s: Vec<Vec<BigInt>>,
    pub u: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
}

pub fn smith_normal_form(a: &[Vec<i64>]) -> Smith {
    let rows = a.len();
    let cols = a[0].len();
    let mut s: Vec<Vec<BigInt>> = a
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut u = identity(rows);
    let mut v = identity(cols);

    let mut k = 0;
    while k < rows.min(cols) {
        // move a nonzero pivot of minimal absolute value to (k, k)
        let Some((pi, pj)) = min_nonzero(&s, k) else {
            break;
        };
        swap_rows(&mut s, &mut u, k, pi);
        swap_cols(&mut s, &mut v, k, pj);
        loop {
            let mut clean = true;
            for i in (k + 1)..rows {
                if !s[i][k].is_zero() {
                    let q = div_round(&s[i][k], &s[k][k]);
                    row_op(&mut s, &mut u, i, k, &q);
                    if !s[i][k].is_zero() {
                        swap_rows(&mut s, &mut u, k, i);
                        clean = false;
                    }
                }
            }
            for j in (k + 1)..cols {
                if !s[k][j].is_zero() {
                    let q = div_round(&s[k][j], &s[k][k]);
                    col_op(&mut s, &mut v, j, k, &q);
                    if !s[k][j].is_zero() {
                        swap_cols(&mut s, &mut v, k, j);
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if s[k][k].is_negative() {
            for j in 0..cols {
                s[k][j] = -s[k][j].clone();
            }
            for j in 0..rows {
                u[k][j] = -u[k][j].clone();
            }
        }
        k += 1;
    }
    Smith { s, u, v }
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect()
}

fn min_nonzero(s: &[Vec<BigInt>], k: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in k..s.len() {
        for j in k..s[0].len() {
            if s[i][j].is_zero() {
                continue;
            }
            match best {
                None => best = Some((i, j)),
                Some((bi, bj)) => {
                    if s[i][j].abs() < s[bi][bj].abs() {
                        best = Some((i, j));
                    }
                }
            }
        }
    }
    best
}

fn swap_rows(s: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], a: usize, b: usize) {
    if a != b {
        s.swap(a, b);
        u.swap(a, b);
    }
}

fn swap_cols(s: &mut [Vec<BigInt>], v: &mut [Vec<BigInt>], a: usize, b: usize) {
    if a == b {
        return;
    }
    for row in s.iter_mut() {
        row.swap(a, b);
    }
    for row in v.iter_mut() {
        row.swap(a, b);
    }
}

/// row_i -= q * row_k (also applied to U)
fn row_op(s: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], i: usize, k: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for c in 0..s[0].len() {
        let val = &s[i][c] - q * &s[k][c];
        s[i][c] = val;
    }
    for c in 0..u[0].len() {
        let val = &u[i][c] - q * &u[k][c];
        u[i][c] = val;
    }
}

/// col_j -= q * col_k (also applied to V)
fn col_op(s: &mut [Vec<BigInt>], v: &mut [Vec<BigInt>], j: usize, k: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for row in s.iter_mut() {
        let val = &row[j] - q * &row[k];
        row[j] = val;
    }
    for row in v.iter_mut() {
        let val = &row[j] - q * &row[k];
        row[j] = val;
    }
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // rounded division so remainders shrink in absolute value
    let (q, r) = a.div_rem(b);
    if r.abs() * 2 > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::big;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| big(x)).collect())
            .collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_exact(&mat(&[&[1, 0], &[0, 1]])), 2);
        assert_eq!(rank_exact(&mat(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(rank_exact(&mat(&[&[1, 2], &[2, 4]])), 1);
        let id5: Vec<Vec<BigRational>> = (0..5)
            .map(|i| (0..5).map(|j| big((i == j) as i64)).collect())
            .collect();
        assert_eq!(rank_exact(&id5), 5);
    }

    #[test]
    fn rank_equals_transpose_rank() {
        let m = mat(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9], &[1, 1, 1]]);
        let t: Vec<Vec<BigRational>> = (0..3)
            .map(|j| (0..4).map(|i| m[i][j].clone()).collect())
            .collect();
        assert_eq!(rank_exact(&m), rank_exact(&t));
        assert_eq!(rank_exact(&m), 2);
    }

    #[test]
    fn modular_rank_agrees_on_small_matrices() {
        for m in [
            mat(&[&[1, 2], &[2, 4]]),
            mat(&[&[3, 1, 4], &[1, 5, 9], &[2, 6, 5]]),
            mat(&[&[0, 0], &[0, 0]]),
        ] {
            assert_eq!(rank_mod_p(&m), Some(rank_exact(&m)));
        }
    }

    #[test]
    fn smith_of_laplacian_like_matrix() {
        // Laplacian of a triangle: invariant factors 1, 3, 0
        let a = vec![vec![2, -1, -1], vec![-1, 2, -1], vec![-1, -1, 2]];
        let snf = smith_normal_form(&a);
        // check U*A*V = S
        let n = 3;
        let mut prod = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigInt::zero();
                for k in 0..n {
                    for l in 0..n {
                        acc += &snf.u[i][k] * BigInt::from(a[k][l]) * &snf.v[l][j];
                    }
                }
                prod[i][j] = acc;
            }
        }
        assert_eq!(prod, snf.s);
        let diag: Vec<BigInt> = (0..n).map(|i| snf.s[i][i].clone()).collect();
        assert_eq!(
            diag,
            vec![BigInt::from(1), BigInt::from(3), BigInt::from(0)]
        );
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    assert!(snf.s[i][j].is_zero());
                }
            }
        }
    }
}
