use num_complex::Complex64;

use super::{ComplexMatrix, RealMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const HERMITIAN_TOL: f64 = 1e-12;

fn jacobi_params(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let theta = (aqq - app) / (2.0 * apq);
    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
    let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    (c, t * c)
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues ascend; eigenvectors are the columns of the returned matrix.
pub fn eig_symmetric(m: &RealMatrix) -> Result<(Vec<f64>, RealMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigensolver needs a square matrix".into()));
    }
    let n = m.rows();
    let scale = m.frobenius_norm().max(1.0);
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            dev = dev.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    let mut a = RealMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let mut v = RealMatrix::identity(n);
    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let (c, s) = jacobi_params(a[(p, p)], a[(q, q)], apq);
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = RealMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((values, vectors))
}

/// Eigen-decomposition of a Hermitian matrix. Each rotation first removes the
/// phase of the pivot entry, then applies a real Jacobi rotation.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigensolver needs a square matrix".into()));
    }
    let n = m.rows();
    let scale = m.frobenius_norm().max(1.0);
    let dev = m.max_abs_diff(&m.adjoint());
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let mut v = ComplexMatrix::identity(n);
    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)].norm_sqr();
                }
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let beta = a[(p, q)];
                let mag = beta.norm();
                if mag < 1e-300 {
                    continue;
                }
                let phase = beta / mag;
                let phase_c = phase.conj();
                for k in 0..n {
                    a[(k, q)] *= phase_c;
                    v[(k, q)] *= phase_c;
                }
                for k in 0..n {
                    a[(q, k)] *= phase;
                }
                let (c, s) = jacobi_params(a[(p, p)].re, a[(q, q)].re, mag);
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * c - akq * s;
                    a[(k, q)] = akp * s + akq * c;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = apk * c - aqk * s;
                    a[(q, k)] = apk * s + aqk * c;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * c - vkq * s;
                    v[(k, q)] = vkp * s + vkq * c;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((values, vectors))
}

pub fn min_eigenvalue_symmetric(m: &RealMatrix) -> Result<f64> {
    let (vals, _) = eig_symmetric(m)?;
    Ok(vals.first().copied().unwrap_or(0.0))
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(m: &RealMatrix) -> Result<RealMatrix> {
    let n = m.rows();
    let mut l = RealMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(m: &ComplexMatrix, vals: &[f64], vecs: &ComplexMatrix) -> f64 {
        let n = m.rows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += m[(i, k)] * vecs[(k, j)];
                }
                worst = worst.max((s - vecs[(i, j)] * vals[j]).norm());
            }
        }
        worst
    }

    #[test]
    fn pauli_y_spectrum() {
        let y = ComplexMatrix::from_vec(
            2,
            2,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let (vals, vecs) = eig_hermitian(&y).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        assert!(residual(&y, &vals, &vecs) < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = RealMatrix::from_vec(2, 2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eig_symmetric(&m), Err(Error::NotHermitian(_))));
        assert!(matches!(eig_hermitian(&m.to_complex()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn cholesky_detects_indefinite() {
        let m = RealMatrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(cholesky(&m).is_err());
        let p = RealMatrix::from_vec(2, 2, vec![4.0, 2.0, 2.0, 3.0]).unwrap();
        let l = cholesky(&p).unwrap();
        let back = l.matmul(&l.transpose()).unwrap();
        assert!(back.sub(&p).unwrap().frobenius_norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn hermitian_residual_small(n in 1usize..9, entries in proptest::collection::vec(-1.0f64..1.0, 2 * 81)) {
            let m = ComplexMatrix::from_fn(n, n, |i, j| {
                let (lo, hi) = (i.min(j), i.max(j));
                let re = entries[lo * 9 + hi];
                let im = if i == j { 0.0 } else { entries[81 + lo * 9 + hi] };
                if i <= j { Complex64::new(re, im) } else { Complex64::new(re, -im) }
            });
            let (vals, vecs) = eig_hermitian(&m).unwrap();
            let norm = m.frobenius_norm().max(1.0);
            prop_assert!(residual(&m, &vals, &vecs) <= 1e-9 * norm);
            let gram = vecs.adjoint().matmul(&vecs).unwrap();
            prop_assert!(gram.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-12);
            prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn symmetric_trace_preserved(n in 1usize..10, entries in proptest::collection::vec(-2.0f64..2.0, 100)) {
            let m = RealMatrix::from_fn(n, n, |i, j| entries[i.min(j) * 10 + i.max(j)]);
            let (vals, vecs) = eig_symmetric(&m).unwrap();
            let tr: f64 = vals.iter().sum();
            prop_assert!((tr - m.trace()).abs() < 1e-10);
            let back = vecs.matmul(&RealMatrix::from_fn(n, n, |i, j| if i == j { vals[i] } else { 0.0 }))
                .unwrap()
                .matmul(&vecs.transpose())
                .unwrap();
            prop_assert!(back.sub(&m).unwrap().frobenius_norm() < 1e-10);
        }
    }
}
