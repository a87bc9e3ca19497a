//! Exact rank over the rationals.
//!
//! Small matrices use fraction-free (Bareiss) elimination. Large integer
//! matrices use a certified modular route: the rank of the Gram matrix modulo
//! a prime is a lower bound, and kernel vectors reconstructed from the modular
//! echelon form, checked exactly over the integers, give the matching upper
//! bound. When the certificate fails the Bareiss path is used instead.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::RationalMatrix;

const MODULAR_THRESHOLD: usize = 10_000;
const PRIMES: [u64; 2] = [(1 << 61) - 1, 4_611_686_018_427_387_847];

pub fn exact_rank(m: &RationalMatrix) -> usize {
    let rows: Vec<Vec<BigInt>> = (0..m.rows())
        .map(|i| {
            let row = m.row(i);
            let l = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            row.iter().map(|q| q.numer() * (&l / q.denom())).collect()
        })
        .collect();
    if m.rows() * m.cols() >= MODULAR_THRESHOLD {
        let small: Option<Vec<Vec<(usize, i64)>>> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(j, v)| v.to_i64().map(|x| (j, x)))
                    .collect()
            })
            .collect();
        if let Some(sparse) = small {
            if let Some(r) = certified_modular_rank(m.cols(), &sparse) {
                return r;
            }
        }
    }
    exact_rank_bareiss(rows)
}

/// Rank of an integer matrix given as sparse rows `(column, value)`.
pub fn exact_rank_integer_rows(cols: usize, rows: &[Vec<(usize, i64)>]) -> usize {
    if let Some(r) = certified_modular_rank(cols, rows) {
        return r;
    }
    let dense = rows
        .iter()
        .map(|row| {
            let mut v = vec![BigInt::zero(); cols];
            for &(j, x) in row {
                v[j] += x;
            }
            v
        })
        .collect();
    exact_rank_bareiss(dense)
}

/// Fraction-free Gaussian elimination over the integers.
pub fn exact_rank_bareiss(mut a: Vec<Vec<BigInt>>) -> usize {
    let nrows = a.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = a[0].len();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, piv);
        let (top, rest) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let p = pivot_row[c].clone();
        for row in rest.iter_mut() {
            let f = std::mem::take(&mut row[c]);
            for j in c + 1..ncols {
                let v = &p * &row[j] - &f * &pivot_row[j];
                row[j] = v / &prev;
            }
        }
        prev = p;
        r += 1;
        if r == nrows {
            break;
        }
    }
    r
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}


fn inv_mod(a: u64, p: u64) -> u64 {
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = mulmod(result, base, p);
        }
        base = mulmod(base, base, p);
        e >>= 1;
    }
    result
}

/// Rational reconstruction of `a mod p` as `n/d` with `|n|, d <= bound`.
fn reconstruct(a: u64, p: u64, bound: i128) -> Option<(i128, i128)> {
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 > bound {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if t1 == 0 || t1.abs() > bound {
        return None;
    }
    Some(if t1 < 0 { (-r1, -t1) } else { (r1, t1) })
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Returns `None` when the modular certificate cannot be completed.
fn certified_modular_rank(cols: usize, rows: &[Vec<(usize, i64)>]) -> Option<usize> {
    let nrows = rows.len();
    if nrows == 0 || cols == 0 {
        return Some(0);
    }
    // Work in the smaller dimension: Gram of columns when tall, of rows when wide.
    let tall = cols <= nrows;
    let dim = if tall { cols } else { nrows };
    let lines: Vec<Vec<(usize, i64)>> = if tall {
        rows.to_vec()
    } else {
        let mut by_col = vec![Vec::new(); cols];
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                by_col[j].push((i, v));
            }
        }
        by_col
    };
    PRIMES.iter().find_map(|&p| {
        let mut g = vec![0u64; dim * dim];
        for line in &lines {
            for &(i, vi) in line {
                for &(j, vj) in line {
                    let prod = (vi as i128 * vj as i128).rem_euclid(p as i128) as u64;
                    let cell = &mut g[i * dim + j];
                    *cell = ((*cell as u128 + prod as u128) % p as u128) as u64;
                }
            }
        }
        let (rank, pivots) = rref_mod(&mut g, dim, p);
        if rank == dim {
            return Some(rank);
        }
        let bound = ((p / 2) as f64).sqrt() as i128;
        let mut pivot_of_col = vec![None; dim];
        for (r, &c) in pivots.iter().enumerate() {
            pivot_of_col[c] = Some(r);
        }
        for f in (0..dim).filter(|&c| pivot_of_col[c].is_none()) {
            let mut num = vec![0i128; dim];
            let mut den = vec![1i128; dim];
            num[f] = 1;
            for (r, &c) in pivots.iter().enumerate() {
                let entry = g[r * dim + f];
                let neg = if entry == 0 { 0 } else { p - entry };
                let (n, d) = reconstruct(neg, p, bound)?;
                num[c] = n;
                den[c] = d;
            }
            let mut l: i128 = 1;
            for &d in &den {
                l = l.checked_mul(d / gcd_i128(l, d))?;
            }
            let v: Vec<i128> = num
                .iter()
                .zip(&den)
                .map(|(&n, &d)| n.checked_mul(l / d))
                .collect::<Option<_>>()?;
            if !kernel_holds(rows, cols, tall, &v)? {
                return None;
            }
        }
        Some(rank)
    })
}

fn kernel_holds(rows: &[Vec<(usize, i64)>], cols: usize, tall: bool, v: &[i128]) -> Option<bool> {
    if tall {
        for row in rows {
            let mut s: i128 = 0;
            for &(j, x) in row {
                s = s.checked_add((x as i128).checked_mul(v[j])?)?;
            }
            if s != 0 {
                return Some(false);
            }
        }
    } else {
        let mut acc = vec![0i128; cols];
        for (i, row) in rows.iter().enumerate() {
            if v[i] == 0 {
                continue;
            }
            for &(j, x) in row {
                acc[j] = acc[j].checked_add((x as i128).checked_mul(v[i])?)?;
            }
        }
        if acc.iter().any(|&s| s != 0) {
            return Some(false);
        }
    }
    Some(true)
}

/// In-place reduced row echelon form modulo `p`; returns rank and pivot columns.
fn rref_mod(g: &mut [u64], dim: usize, p: u64) -> (usize, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..dim {
        let Some(piv) = (r..dim).find(|&i| g[i * dim + c] != 0) else {
            continue;
        };
        if piv != r {
            for j in 0..dim {
                g.swap(piv * dim + j, r * dim + j);
            }
        }
        let inv = inv_mod(g[r * dim + c], p);
        for j in c..dim {
            g[r * dim + j] = mulmod(g[r * dim + j], inv, p);
        }
        let pivot_row: Vec<u64> = g[r * dim..(r + 1) * dim].to_vec();
        for i in 0..dim {
            if i == r {
                continue;
            }
            let f = g[i * dim + c];
            if f == 0 {
                continue;
            }
            for j in c..dim {
                if pivot_row[j] != 0 {
                    let sub = mulmod(f, pivot_row[j], p);
                    let cell = &mut g[i * dim + j];
                    *cell = if *cell >= sub { *cell - sub } else { *cell + p - sub };
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (r, pivots)
}
