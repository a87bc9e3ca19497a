//! Real semidefinite programs over affine matrix families.
//!
//! Linear equalities are eliminated exactly over the rationals, which leaves
//! a linear matrix inequality `C - sum_i y_i A_i >= 0`. That problem is solved
//! by an infeasible-start primal-dual interior-point method (HKM direction
//! with Mehrotra predictor-corrector steps).

use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{cholesky, eig_symmetric, Rational, RealMatrix};

/// Verdict is `Feasible` when `lambda_star >= FEASIBLE_THRESHOLD`.
pub const FEASIBLE_THRESHOLD: f64 = -1e-7;
/// Verdict is `Infeasible` when `lambda_star < INFEASIBLE_THRESHOLD`.
pub const INFEASIBLE_THRESHOLD: f64 = -1e-5;

const MAX_ITERATIONS: usize = 150;
/// Merit accepted as converged when the iteration stalls before `tol`.
const STALL_TOL: f64 = 1e-7;

/// Symmetric matrix entries, each stored once with `i <= j`.
pub type SymEntries = Vec<(usize, usize, Rational)>;

/// `Gamma(z) = constant + sum_k z_k basis[k]`.
#[derive(Debug, Clone)]
pub struct AffineFamily {
    pub n: usize,
    pub constant: SymEntries,
    pub basis: Vec<SymEntries>,
}

#[derive(Debug, Clone)]
pub struct LinearEquality {
    pub coeffs: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

/// Solution set `z = offset + sum_f w_f columns[f]` of a linear system.
#[derive(Debug, Clone)]
pub struct Parametrization {
    pub offset: Vec<Rational>,
    pub columns: Vec<Vec<(usize, Rational)>>,
}

/// Exact elimination. Returns `None` when the system is inconsistent.
pub fn parametrize(num_vars: usize, eqs: &[LinearEquality]) -> Option<Parametrization> {
    // pivot variable -> (row without pivot, rhs) meaning z_p = rhs - row . z
    let mut pivots: BTreeMap<usize, (BTreeMap<usize, Rational>, Rational)> = BTreeMap::new();
    for eq in eqs {
        let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
        for (j, v) in &eq.coeffs {
            *row.entry(*j).or_insert_with(Rational::zero) += v;
        }
        row.retain(|_, v| !v.is_zero());
        let mut rhs = eq.rhs.clone();
        for (p, (prow, prhs)) in &pivots {
            if let Some(f) = row.remove(p) {
                rhs -= &f * prhs;
                for (j, v) in prow {
                    let e = row.entry(*j).or_insert_with(Rational::zero);
                    *e -= &f * v;
                }
                row.retain(|_, v| !v.is_zero());
            }
        }
        let Some((&p, _)) = row.iter().next() else {
            if rhs.is_zero() {
                continue;
            }
            return None;
        };
        let lead = row.remove(&p).unwrap();
        for v in row.values_mut() {
            *v /= &lead;
        }
        rhs /= &lead;
        for (prow, prhs) in pivots.values_mut() {
            if let Some(f) = prow.remove(&p) {
                *prhs -= &f * &rhs;
                for (j, v) in &row {
                    let e = prow.entry(*j).or_insert_with(Rational::zero);
                    *e -= &f * v;
                }
                prow.retain(|_, v| !v.is_zero());
            }
        }
        pivots.insert(p, (row, rhs));
    }
    let mut offset = vec![Rational::zero(); num_vars];
    for (p, (_, rhs)) in &pivots {
        offset[*p] = rhs.clone();
    }
    let columns = (0..num_vars)
        .filter(|j| !pivots.contains_key(j))
        .map(|f| {
            let mut col = vec![(f, Rational::from_integer(1.into()))];
            for (p, (prow, _)) in &pivots {
                if let Some(c) = prow.get(&f) {
                    col.push((*p, -c.clone()));
                }
            }
            col.sort_by_key(|e| e.0);
            col
        })
        .collect();
    Some(Parametrization { offset, columns })
}

fn accumulate(target: &mut BTreeMap<(usize, usize), Rational>, entries: &SymEntries, f: &Rational) {
    for (i, j, v) in entries {
        let key = (*i.min(j), *i.max(j));
        *target.entry(key).or_insert_with(Rational::zero) += f * v;
    }
}

fn finish(map: BTreeMap<(usize, usize), Rational>) -> SymEntries {
    map.into_iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|((i, j), v)| (i, j, v))
        .collect()
}

impl AffineFamily {
    fn reparametrize(&self, par: &Parametrization) -> AffineFamily {
        let mut constant = BTreeMap::new();
        accumulate(&mut constant, &self.constant, &Rational::from_integer(1.into()));
        for (k, z) in par.offset.iter().enumerate() {
            if !z.is_zero() {
                accumulate(&mut constant, &self.basis[k], z);
            }
        }
        let basis = par
            .columns
            .iter()
            .map(|col| {
                let mut m = BTreeMap::new();
                for (k, c) in col {
                    accumulate(&mut m, &self.basis[*k], c);
                }
                finish(m)
            })
            .collect();
        AffineFamily {
            n: self.n,
            constant: finish(constant),
            basis,
        }
    }

    pub fn evaluate(&self, z: &[f64]) -> RealMatrix {
        let mut g = RealMatrix::zeros(self.n, self.n);
        add_sym(&mut g, &self.constant, 1.0);
        for (k, e) in self.basis.iter().enumerate() {
            if z[k] != 0.0 {
                add_sym(&mut g, e, z[k]);
            }
        }
        g
    }
}

fn add_sym(g: &mut RealMatrix, entries: &SymEntries, f: f64) {
    for (i, j, v) in entries {
        let v = f * v.to_f64().unwrap_or(0.0);
        g[(*i, *j)] += v;
        if i != j {
            g[(*j, *i)] += v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Feasible,
    Infeasible,
    Indeterminate,
}

#[derive(Debug, Clone)]
pub struct SdpOutcome {
    pub verdict: Verdict,
    /// Smallest eigenvalue of the returned witness, a lower bound on the optimum.
    pub lambda_star: f64,
    /// Primal objective of the interior-point run, an upper bound up to solver accuracy.
    pub upper_bound: f64,
    pub iterations: usize,
    pub witness: Option<RealMatrix>,
}

#[derive(Debug, Clone)]
pub struct SdpMaximum {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub reliable: bool,
    pub iterations: usize,
    pub witness: Option<RealMatrix>,
}

/// `sum coeffs * Gamma[i][j] = rhs`; the pair `(i, j)` names the symmetric entry.
#[derive(Debug, Clone)]
pub struct EntryConstraint {
    pub coeffs: Vec<((usize, usize), Rational)>,
    pub rhs: Rational,
}

/// Does some real symmetric PSD `n x n` matrix meet the entry constraints?
#[derive(Debug, Clone)]
pub struct SdpFeasibilityProblem {
    pub n: usize,
    pub constraints: Vec<EntryConstraint>,
}

impl SdpFeasibilityProblem {
    fn entry_var(&self, i: usize, j: usize) -> usize {
        let (i, j) = (i.min(j), i.max(j));
        i * self.n - i * (i + 1) / 2 + j
    }

    fn family(&self) -> Result<(AffineFamily, Vec<LinearEquality>)> {
        let n = self.n;
        let m = n * (n + 1) / 2;
        let one = Rational::from_integer(1.into());
        let mut basis = vec![Vec::new(); m];
        for i in 0..n {
            for j in i..n {
                basis[self.entry_var(i, j)] = vec![(i, j, one.clone())];
            }
        }
        let mut eqs = Vec::new();
        for c in &self.constraints {
            let mut coeffs = Vec::new();
            for ((i, j), v) in &c.coeffs {
                if *i >= n || *j >= n {
                    return Err(Error::DimensionMismatch(format!("entry ({i},{j}) outside {n}x{n}")));
                }
                coeffs.push((self.entry_var(*i, *j), v.clone()));
            }
            eqs.push(LinearEquality {
                coeffs,
                rhs: c.rhs.clone(),
            });
        }
        Ok((
            AffineFamily {
                n,
                constant: Vec::new(),
                basis,
            },
            eqs,
        ))
    }
}

/// Maximizes the smallest eigenvalue of a PSD completion meeting the constraints.
pub fn sdp_max_min_eigenvalue(problem: &SdpFeasibilityProblem, tol: f64) -> Result<SdpOutcome> {
    let (fam, eqs) = problem.family()?;
    max_min_eigenvalue_family(&fam, &eqs, tol)
}

/// Maximizes `sum objective * Gamma[i][j]` over PSD matrices meeting the constraints.
pub fn sdp_maximize(
    objective: &[((usize, usize), Rational)],
    problem: &SdpFeasibilityProblem,
    tol: f64,
) -> Result<SdpMaximum> {
    let (fam, eqs) = problem.family()?;
    let lin: Vec<(usize, Rational)> = objective
        .iter()
        .map(|((i, j), v)| (problem.entry_var(*i, *j), v.clone()))
        .collect();
    maximize_family(&fam, &eqs, &Rational::zero(), &lin, tol)
}

pub(crate) fn max_min_eigenvalue_family(
    fam: &AffineFamily,
    eqs: &[LinearEquality],
    tol: f64,
) -> Result<SdpOutcome> {
    let Some(par) = parametrize(fam.basis.len(), eqs) else {
        return Ok(SdpOutcome {
            verdict: Verdict::Infeasible,
            lambda_star: f64::NEG_INFINITY,
            upper_bound: f64::NEG_INFINITY,
            iterations: 0,
            witness: None,
        });
    };
    let red = fam.reparametrize(&par);
    let n = red.n;
    // variables (w, t): C = F0, A_k = -F_k, A_t = I, maximize t
    let mut a: Vec<Vec<(usize, usize, f64)>> = red.basis.iter().map(|e| to_f64_entries(e, -1.0)).collect();
    a.push((0..n).map(|i| (i, i, 1.0)).collect());
    let mut b = vec![0.0; a.len()];
    *b.last_mut().unwrap() = 1.0;
    let c = red.evaluate(&vec![0.0; red.basis.len()]);
    let sol = solve_lmi(&c, &a, &b, tol)?;
    let w = &sol.y[..red.basis.len()];
    let gamma = red.evaluate(w);
    let (vals, _) = eig_symmetric(&gamma)?;
    let lambda = vals[0];
    let upper = sol.primal_obj.max(lambda);
    let verdict = if lambda >= FEASIBLE_THRESHOLD {
        Verdict::Feasible
    } else if lambda < INFEASIBLE_THRESHOLD && upper < INFEASIBLE_THRESHOLD {
        Verdict::Infeasible
    } else {
        Verdict::Indeterminate
    };
    Ok(SdpOutcome {
        verdict,
        lambda_star: lambda,
        upper_bound: upper,
        iterations: sol.iterations,
        witness: Some(gamma),
    })
}

pub(crate) fn maximize_family(
    fam: &AffineFamily,
    eqs: &[LinearEquality],
    offset: &Rational,
    objective: &[(usize, Rational)],
    tol: f64,
) -> Result<SdpMaximum> {
    let par = parametrize(fam.basis.len(), eqs)
        .ok_or_else(|| Error::Sdp("linear constraints are inconsistent".into()))?;
    let red = fam.reparametrize(&par);
    let mut dense_obj = vec![Rational::zero(); fam.basis.len()];
    for (k, v) in objective {
        dense_obj[*k] += v;
    }
    let mut const_obj = offset.clone();
    for (k, z) in par.offset.iter().enumerate() {
        const_obj += &dense_obj[k] * z;
    }
    let b: Vec<f64> = par
        .columns
        .iter()
        .map(|col| {
            col.iter()
                .fold(Rational::zero(), |acc, (k, c)| acc + &dense_obj[*k] * c)
                .to_f64()
                .unwrap_or(0.0)
        })
        .collect();
    let const_obj = const_obj.to_f64().unwrap_or(0.0);
    if red.basis.is_empty() {
        let g = red.evaluate(&[]);
        let lam = eig_symmetric(&g)?.0.first().copied().unwrap_or(0.0);
        if lam < FEASIBLE_THRESHOLD {
            return Err(Error::Sdp("relaxation is infeasible".into()));
        }
        return Ok(SdpMaximum {
            value: const_obj,
            lower: const_obj,
            upper: const_obj,
            reliable: true,
            iterations: 0,
            witness: Some(g),
        });
    }
    let a: Vec<Vec<(usize, usize, f64)>> = red.basis.iter().map(|e| to_f64_entries(e, -1.0)).collect();
    let c = red.evaluate(&vec![0.0; red.basis.len()]);
    let sol = solve_lmi(&c, &a, &b, tol)?;
    let gamma = red.evaluate(&sol.y);
    let lam = eig_symmetric(&gamma)?.0[0];
    let lower = const_obj + sol.dual_obj;
    let upper = const_obj + sol.primal_obj;
    let reliable = sol.converged && lam >= -1e-6;
    Ok(SdpMaximum {
        value: lower,
        lower,
        upper,
        reliable,
        iterations: sol.iterations,
        witness: Some(gamma),
    })
}

fn to_f64_entries(e: &SymEntries, f: f64) -> Vec<(usize, usize, f64)> {
    e.iter()
        .map(|(i, j, v)| (*i, *j, f * v.to_f64().unwrap_or(0.0)))
        .collect()
}

struct LmiSolution {
    y: Vec<f64>,
    primal_obj: f64,
    dual_obj: f64,
    iterations: usize,
    converged: bool,
}

/// `<A, Z>` for symmetric sparse `A` and arbitrary square `Z`.
fn inner(a: &[(usize, usize, f64)], z: &RealMatrix) -> f64 {
    a.iter()
        .map(|&(i, j, v)| if i == j { v * z[(i, i)] } else { v * (z[(i, j)] + z[(j, i)]) })
        .sum()
}

fn dense_inner(a: &RealMatrix, b: &RealMatrix) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

fn apply_adjoint(a: &[Vec<(usize, usize, f64)>], y: &[f64], n: usize) -> RealMatrix {
    let mut out = RealMatrix::zeros(n, n);
    for (k, entries) in a.iter().enumerate() {
        if y[k] == 0.0 {
            continue;
        }
        for &(i, j, v) in entries {
            out[(i, j)] += y[k] * v;
            if i != j {
                out[(j, i)] += y[k] * v;
            }
        }
    }
    out
}

fn symmetrize(m: &RealMatrix) -> RealMatrix {
    RealMatrix::from_fn(m.rows(), m.cols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

fn mul(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    a.matmul(b).expect("square matrices of equal size")
}

fn lower_inverse(l: &RealMatrix) -> RealMatrix {
    let n = l.rows();
    let mut inv = RealMatrix::zeros(n, n);
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                s -= l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
    }
    inv
}

fn spd_inverse(m: &RealMatrix) -> Result<RealMatrix> {
    let linv = lower_inverse(&cholesky(m)?);
    Ok(mul(&linv.transpose(), &linv))
}

/// Largest `alpha` with `z + alpha dz` PSD, given `z` positive definite.
fn max_step(z: &RealMatrix, dz: &RealMatrix) -> Result<f64> {
    let linv = lower_inverse(&cholesky(z)?);
    let w = symmetrize(&mul(&mul(&linv, dz), &linv.transpose()));
    let lam = eig_symmetric(&w)?.0[0];
    Ok(if lam >= 0.0 { f64::INFINITY } else { -1.0 / lam })
}

fn solve_spd(l: &RealMatrix, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = rhs[i];
        for k in 0..i {
            s -= l[(i, k)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[(k, i)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    z
}

/// Maximize `b^T y` subject to `C - sum y_i A_i >= 0`.
fn solve_lmi(c: &RealMatrix, a: &[Vec<(usize, usize, f64)>], b: &[f64], tol: f64) -> Result<LmiSolution> {
    let n = c.rows();
    let m = a.len();
    let norm_c = c.frobenius_norm();
    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let max_a = a
        .iter()
        .map(|e| e.iter().map(|t| t.2 * t.2 * if t.0 == t.1 { 1.0 } else { 2.0 }).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let sqn = (n as f64).sqrt();
    let xi = 10f64.max(sqn).max(
        a.iter()
            .zip(b)
            .map(|(e, bk)| {
                let na = e.iter().map(|t| t.2.abs()).sum::<f64>();
                sqn * (1.0 + bk.abs()) / (1.0 + na)
            })
            .fold(0.0, f64::max),
    );
    let eta = 10f64.max(sqn).max(max_a).max(norm_c);
    let mut x = RealMatrix::identity(n).scale(&xi);
    let mut s = RealMatrix::identity(n).scale(&eta);
    let mut y = vec![0.0; m];
    let mut best: Option<(f64, Vec<f64>, f64, f64)> = None;
    let mut iterations_run = 0;
    for iter in 0..MAX_ITERATIONS {
        iterations_run = iter + 1;
        let ax: Vec<f64> = a.iter().map(|e| inner(e, &x)).collect();
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(bi, v)| bi - v).collect();
        let rd = c.sub(&s).unwrap().sub(&apply_adjoint(a, &y, n)).unwrap();
        let pobj = dense_inner(c, &x);
        let dobj: f64 = b.iter().zip(&y).map(|(p, q)| p * q).sum();
        let pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + norm_b);
        let dinf = rd.frobenius_norm() / (1.0 + norm_c);
        let relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let merit = pinf.max(dinf).max(relgap);
        if best.as_ref().is_none_or(|bst| merit < bst.0) {
            best = Some((merit, y.clone(), pobj, dobj));
        }
        if pinf < tol && dinf < tol && relgap < tol {
            return Ok(LmiSolution {
                y,
                primal_obj: pobj,
                dual_obj: dobj,
                iterations: iter,
                converged: true,
            });
        }
        if y.iter().any(|v| v.abs() > 1e12) {
            return Err(Error::Sdp("objective appears unbounded".into()));
        }
        if x.frobenius_norm() > 1e12 {
            return Err(Error::Sdp("linear matrix inequality appears infeasible".into()));
        }
        // S loses definiteness numerically only next to the optimum
        let Ok(sinv) = spd_inverse(&s) else { break };
        // Schur complement M_ij = <A_i, X A_j S^-1>
        let g: Vec<RealMatrix> = a
            .iter()
            .map(|entries| {
                let mut gj = RealMatrix::zeros(n, n);
                for &(p, q, v) in entries {
                    for r in 0..n {
                        let xp = x[(r, p)] * v;
                        let xq = x[(r, q)] * v;
                        for col in 0..n {
                            gj[(r, col)] += xp * sinv[(q, col)];
                            if p != q {
                                gj[(r, col)] += xq * sinv[(p, col)];
                            }
                        }
                    }
                }
                gj
            })
            .collect();
        let mut schur = RealMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                schur[(i, j)] = inner(&a[i], &g[j]);
            }
        }
        let mut schur = symmetrize(&schur);
        let diag_scale = (0..m).map(|i| schur[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let chol = loop {
            match cholesky(&schur) {
                Ok(l) => break l,
                Err(_) => {
                    for i in 0..m {
                        schur[(i, i)] += 1e-12 * diag_scale;
                    }
                }
            }
        };
        let xrds = mul(&mul(&x, &rd), &sinv);
        let a_xrds: Vec<f64> = a.iter().map(|e| inner(e, &xrds)).collect();
        let direction = |rc: &RealMatrix| -> (Vec<f64>, RealMatrix, RealMatrix) {
            let rhs: Vec<f64> = (0..m)
                .map(|i| rp[i] - inner(&a[i], rc) + a_xrds[i])
                .collect();
            let dy = solve_spd(&chol, &rhs);
            let ds = rd.sub(&apply_adjoint(a, &dy, n)).unwrap();
            let dx = symmetrize(&rc.sub(&mul(&mul(&x, &ds), &sinv)).unwrap());
            (dy, dx, ds)
        };
        let mu = dense_inner(&x, &s) / n as f64;
        let rc_aff = x.scale(&-1.0);
        let (_, dx_aff, ds_aff) = direction(&rc_aff);
        let (Ok(ap), Ok(ad)) = (max_step(&x, &dx_aff), max_step(&s, &ds_aff)) else { break };
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let x_aff = x.add(&dx_aff.scale(&ap)).unwrap();
        let s_aff = s.add(&ds_aff.scale(&ad)).unwrap();
        let mu_aff = dense_inner(&x_aff, &s_aff) / n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let corr = mul(&mul(&dx_aff, &ds_aff), &sinv);
        let rc = sinv.scale(&(sigma * mu)).sub(&x).unwrap().sub(&corr).unwrap();
        let (dy, dx, ds) = direction(&rc);
        let gamma = 0.95;
        let (Ok(ap), Ok(ad)) = (max_step(&x, &dx), max_step(&s, &ds)) else { break };
        let (ap, ad) = ((gamma * ap).min(1.0), (gamma * ad).min(1.0));
        x = symmetrize(&x.add(&dx.scale(&ap)).unwrap());
        s = symmetrize(&s.add(&ds.scale(&ad)).unwrap());
        for (yi, di) in y.iter_mut().zip(&dy) {
            *yi += ad * di;
        }
        if ap < 1e-10 && ad < 1e-10 {
            break;
        }
    }
    let (merit, y, pobj, dobj) = best.expect("at least one iteration");
    Ok(LmiSolution {
        y,
        primal_obj: pobj,
        dual_obj: dobj,
        iterations: iterations_run,
        converged: merit < STALL_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn unit_diagonal(n: usize) -> Vec<EntryConstraint> {
        (0..n)
            .map(|i| EntryConstraint {
                coeffs: vec![((i, i), q(1, 1))],
                rhs: q(1, 1),
            })
            .collect()
    }

    #[test]
    fn parametrize_detects_inconsistency() {
        let eqs = vec![
            LinearEquality { coeffs: vec![(0, q(1, 1)), (1, q(1, 1))], rhs: q(1, 1) },
            LinearEquality { coeffs: vec![(0, q(2, 1)), (1, q(2, 1))], rhs: q(3, 1) },
        ];
        assert!(parametrize(2, &eqs).is_none());
        let par = parametrize(3, &eqs[..1]).unwrap();
        assert_eq!(par.columns.len(), 2);
        assert_eq!(par.offset[0], q(1, 1));
    }

    #[test]
    fn correlation_matrix_bounds() {
        // 2x2 with unit diagonal: lambda_min = 1 - |c|, best at c = 0
        let p = SdpFeasibilityProblem { n: 2, constraints: unit_diagonal(2) };
        let out = sdp_max_min_eigenvalue(&p, 1e-9).unwrap();
        assert_eq!(out.verdict, Verdict::Feasible);
        assert!((out.lambda_star - 1.0).abs() < 1e-6);
        let mut cons = unit_diagonal(3);
        // pairwise correlations -0.9 cannot all hold: 1 + 2c < 0
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            cons.push(EntryConstraint { coeffs: vec![((i, j), q(1, 1))], rhs: q(-9, 10) });
        }
        let out = sdp_max_min_eigenvalue(&SdpFeasibilityProblem { n: 3, constraints: cons }, 1e-9).unwrap();
        assert_eq!(out.verdict, Verdict::Infeasible);
        assert!((out.lambda_star - (1.0 - 1.8)).abs() < 1e-6);
    }

    #[test]
    fn inconsistent_constraints_are_infeasible() {
        let mut cons = unit_diagonal(2);
        cons.push(EntryConstraint { coeffs: vec![((0, 0), q(1, 1))], rhs: q(2, 1) });
        let out = sdp_max_min_eigenvalue(&SdpFeasibilityProblem { n: 2, constraints: cons }, 1e-9).unwrap();
        assert_eq!(out.verdict, Verdict::Infeasible);
    }

    #[test]
    fn maximize_off_diagonal_sum() {
        // max sum of off-diagonal entries of a 3x3 correlation matrix is 3 (all ones)
        let p = SdpFeasibilityProblem { n: 3, constraints: unit_diagonal(3) };
        let obj = vec![((0, 1), q(1, 1)), ((0, 2), q(1, 1)), ((1, 2), q(1, 1))];
        let out = sdp_maximize(&obj, &p, 1e-9).unwrap();
        assert!(out.reliable);
        assert!((out.value - 3.0).abs() < 1e-6, "{}", out.value);
        // min is -3/2, i.e. max of the negation is 3/2
        let neg: Vec<_> = obj.iter().map(|(e, v)| (*e, -v.clone())).collect();
        let out = sdp_maximize(&neg, &p, 1e-9).unwrap();
        assert!((out.value - 1.5).abs() < 1e-6, "{}", out.value);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn adding_constraints_never_raises_lambda(vals in proptest::collection::vec(-10i64..=10, 6), k in 1usize..6) {
            let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
            let all: Vec<EntryConstraint> = unit_diagonal(4)
                .into_iter()
                .chain(pairs.iter().zip(&vals).map(|(&(i, j), &v)| EntryConstraint {
                    coeffs: vec![((i, j), q(1, 1))],
                    rhs: q(v, 10),
                }))
                .collect();
            let fewer = SdpFeasibilityProblem { n: 4, constraints: all[..4 + k - 1].to_vec() };
            let more = SdpFeasibilityProblem { n: 4, constraints: all[..4 + k].to_vec() };
            let a = sdp_max_min_eigenvalue(&fewer, 1e-9).unwrap();
            let b = sdp_max_min_eigenvalue(&more, 1e-9).unwrap();
            prop_assert!(b.lambda_star <= a.lambda_star + 1e-6, "{} > {}", b.lambda_star, a.lambda_star);
        }
    }
}
