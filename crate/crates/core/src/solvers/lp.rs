//! Two-phase dense-tableau simplex with Bland's rule, generic over exact
//! rationals and `f64`. Variables are implicitly nonnegative.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numerics::Rational;

pub trait LpScalar:
    Clone
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + PartialOrd
    + Send
    + Sync
{
    fn negligible(&self) -> bool;
    fn positive(&self) -> bool;
    fn negative(&self) -> bool;
    fn to_f64(&self) -> f64;
}

impl LpScalar for Rational {
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    fn positive(&self) -> bool {
        self.is_positive()
    }
    fn negative(&self) -> bool {
        self.is_negative()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

const FLOAT_EPS: f64 = 1e-10;

impl LpScalar for f64 {
    fn negligible(&self) -> bool {
        self.abs() <= FLOAT_EPS
    }
    fn positive(&self) -> bool {
        *self > FLOAT_EPS
    }
    fn negative(&self) -> bool {
        *self < -FLOAT_EPS
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint<T> {
    /// Sparse `(variable, coefficient)` pairs.
    pub coeffs: Vec<(usize, T)>,
    pub sense: Sense,
    pub rhs: T,
}

#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    pub num_vars: usize,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub maximize: bool,
}

/// Optimal primal point, optimal value and a dual vector with
/// `sum_i dual_i * rhs_i == value`.
///
/// Sign conventions: for a maximization the dual is nonnegative on `Le` rows,
/// nonpositive on `Ge` rows and satisfies `A^T y >= c`; for a minimization the
/// signs flip and `A^T y <= c`.
#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub value: T,
    pub primal: Vec<T>,
    pub dual: Vec<T>,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 1_000_000;

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
    reduced: Vec<T>,
    iterations: usize,
}

impl<T: LpScalar> Tableau<T> {
    fn pivot(&mut self, r: usize, e: usize) {
        let piv = self.rows[r][e].clone();
        let ncols = self.rows[r].len();
        for j in 0..ncols {
            if !self.rows[r][j].is_zero() {
                self.rows[r][j] = self.rows[r][j].clone() / piv.clone();
            }
        }
        self.rhs[r] = self.rhs[r].clone() / piv;
        let nz: Vec<usize> = (0..ncols).filter(|&j| !self.rows[r][j].is_zero()).collect();
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][e].is_zero() {
                continue;
            }
            let f = self.rows[i][e].clone();
            for &j in &nz {
                let v = self.rows[i][j].clone() - f.clone() * pivot_row[j].clone();
                self.rows[i][j] = v;
            }
            self.rows[i][e] = T::zero();
            self.rhs[i] = self.rhs[i].clone() - f * pivot_rhs.clone();
        }
        let f = self.reduced[e].clone();
        if !f.is_zero() {
            for &j in &nz {
                let v = self.reduced[j].clone() - f.clone() * pivot_row[j].clone();
                self.reduced[j] = v;
            }
            self.reduced[e] = T::zero();
        }
        self.basis[r] = e;
        self.iterations += 1;
    }

    /// Maximizes with Bland's rule over columns allowed to enter.
    fn run(&mut self, allowed: &dyn Fn(usize) -> bool) -> Result<()> {
        loop {
            if self.iterations > MAX_ITERATIONS {
                return Err(Error::IterationLimit(MAX_ITERATIONS));
            }
            let Some(e) = (0..self.reduced.len()).find(|&j| allowed(j) && self.reduced[j].positive())
            else {
                return Ok(());
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][e];
                if !a.positive() {
                    continue;
                }
                let ratio = self.rhs[i].clone() / a.clone();
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        if ratio < best || (ratio == best && self.basis[i] < self.basis[k]) {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
            match leave {
                Some((r, _)) => self.pivot(r, e),
                None => return Err(Error::Unbounded),
            }
        }
    }

    fn set_costs(&mut self, costs: &[T]) {
        let mut d = costs.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = costs[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, slot) in d.iter_mut().enumerate() {
                let a = &self.rows[i][j];
                if !a.is_zero() {
                    *slot = slot.clone() - cb.clone() * a.clone();
                }
            }
        }
        self.reduced = d;
    }
}

pub fn lp_solve<T: LpScalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
    let n = lp.num_vars;
    if lp.objective.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "objective has {} entries for {n} variables",
            lp.objective.len()
        )));
    }
    let m = lp.constraints.len();
    // column layout: originals, then one slack/surplus per inequality, then artificials
    let mut flipped = vec![false; m];
    let mut senses = Vec::with_capacity(m);
    let mut dense_rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        let mut row = vec![T::zero(); n];
        for (j, v) in &c.coeffs {
            if *j >= n {
                return Err(Error::DimensionMismatch(format!("variable {j} out of range")));
            }
            row[*j] = row[*j].clone() + v.clone();
        }
        let mut sense = c.sense;
        let mut b = c.rhs.clone();
        if b.negative() {
            flipped[i] = true;
            row = row.into_iter().map(|v| -v).collect();
            b = -b;
            sense = match sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        senses.push(sense);
        dense_rows.push(row);
        rhs.push(b);
    }
    let n_slack = senses.iter().filter(|s| **s != Sense::Eq).count();
    let n_art = senses.iter().filter(|s| **s != Sense::Le).count();
    let total = n + n_slack + n_art;
    let art_start = n + n_slack;
    let mut identity_col = vec![0; m];
    let mut rows = Vec::with_capacity(m);
    let (mut s_idx, mut a_idx) = (n, art_start);
    for (i, row) in dense_rows.into_iter().enumerate() {
        let mut full = row;
        full.resize(total, T::zero());
        match senses[i] {
            Sense::Le => {
                full[s_idx] = T::one();
                identity_col[i] = s_idx;
                s_idx += 1;
            }
            Sense::Ge => {
                full[s_idx] = -T::one();
                s_idx += 1;
                full[a_idx] = T::one();
                identity_col[i] = a_idx;
                a_idx += 1;
            }
            Sense::Eq => {
                full[a_idx] = T::one();
                identity_col[i] = a_idx;
                a_idx += 1;
            }
        }
        rows.push(full);
    }
    let mut tab = Tableau {
        rows,
        rhs,
        basis: identity_col.clone(),
        reduced: Vec::new(),
        iterations: 0,
    };
    let is_art = |j: usize| j >= art_start;
    if n_art > 0 {
        let costs: Vec<T> = (0..total)
            .map(|j| if is_art(j) { -T::one() } else { T::zero() })
            .collect();
        tab.set_costs(&costs);
        tab.run(&|_| true)?;
        let infeasibility = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .filter(|(b, _)| is_art(**b))
            .fold(T::zero(), |acc, (_, v)| acc + v.clone());
        if !infeasibility.negligible() {
            return Err(Error::Infeasible);
        }
        for r in 0..m {
            if is_art(tab.basis[r]) {
                if let Some(j) = (0..art_start).find(|&j| !tab.rows[r][j].negligible()) {
                    tab.pivot(r, j);
                }
            }
        }
    }
    let sign = if lp.maximize { T::one() } else { -T::one() };
    let mut costs = vec![T::zero(); total];
    for j in 0..n {
        costs[j] = sign.clone() * lp.objective[j].clone();
    }
    tab.set_costs(&costs);
    tab.run(&|j| !is_art(j))?;

    let mut primal = vec![T::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            primal[b] = tab.rhs[i].clone();
        }
    }
    let value = (0..n).fold(T::zero(), |acc, j| {
        acc + lp.objective[j].clone() * primal[j].clone()
    });
    let dual = (0..m)
        .map(|i| {
            let y = -tab.reduced[identity_col[i]].clone();
            let y = if flipped[i] { -y } else { y };
            sign.clone() * y
        })
        .collect();
    Ok(LpSolution {
        value,
        primal,
        dual,
        iterations: tab.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn cons(coeffs: &[i64], sense: Sense, rhs: i64) -> Constraint<Rational> {
        Constraint {
            coeffs: coeffs.iter().enumerate().map(|(j, &v)| (j, q(v))).collect(),
            sense,
            rhs: q(rhs),
        }
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> 36 at (2, 6)
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![q(3), q(5)],
            constraints: vec![
                cons(&[1, 0], Sense::Le, 4),
                cons(&[0, 2], Sense::Le, 12),
                cons(&[3, 2], Sense::Le, 18),
            ],
            maximize: true,
        };
        let s = lp_solve(&lp).unwrap();
        assert_eq!(s.value, q(36));
        assert_eq!(s.primal, vec![q(2), q(6)]);
        let dual_obj = s.dual.iter().zip([4, 12, 18]).fold(q(0), |a, (y, b)| a + y * q(b));
        assert_eq!(dual_obj, q(36));
    }

    #[test]
    fn minimization_with_equalities_and_negative_rhs() {
        // min x + 2y s.t. x + y = 3, -x + y >= -1  -> optimum x=2, y=1, value 4
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![q(1), q(2)],
            constraints: vec![cons(&[1, 1], Sense::Eq, 3), cons(&[-1, 1], Sense::Ge, -1)],
            maximize: false,
        };
        let s = lp_solve(&lp).unwrap();
        assert_eq!(s.value, q(4));
        let dual_obj = s.dual[0].clone() * q(3) + s.dual[1].clone() * q(-1);
        assert_eq!(dual_obj, q(4));
        assert!(s.dual[1] >= q(0));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LinearProgram {
            num_vars: 1,
            objective: vec![q(1)],
            constraints: vec![cons(&[1], Sense::Le, 1), cons(&[1], Sense::Ge, 2)],
            maximize: true,
        };
        assert!(matches!(lp_solve(&lp), Err(Error::Infeasible)));
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![q(1), q(0)],
            constraints: vec![cons(&[1, -1], Sense::Le, 1)],
            maximize: true,
        };
        assert!(matches!(lp_solve(&lp), Err(Error::Unbounded)));
    }

    #[test]
    fn redundant_equalities() {
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![q(1), q(1)],
            constraints: vec![
                cons(&[1, 1], Sense::Eq, 2),
                cons(&[2, 2], Sense::Eq, 4),
                cons(&[1, 0], Sense::Le, 1),
            ],
            maximize: true,
        };
        assert_eq!(lp_solve(&lp).unwrap().value, q(2));
    }

    proptest! {
        #[test]
        fn strong_duality_on_random_packing_lps(
            a in proptest::collection::vec(0i64..5, 20),
            b in proptest::collection::vec(1i64..10, 4),
            c in proptest::collection::vec(-3i64..6, 5),
        ) {
            let constraints: Vec<_> = (0..4)
                .map(|i| cons(&a[i * 5..i * 5 + 5], Sense::Le, b[i]))
                .chain((0..5).map(|j| {
                    let mut row = vec![0; 5];
                    row[j] = 1;
                    cons(&row, Sense::Le, 7)
                }))
                .collect();
            let lp = LinearProgram { num_vars: 5, objective: c.iter().map(|&v| q(v)).collect(), constraints: constraints.clone(), maximize: true };
            let s = lp_solve(&lp).unwrap();
            let dual_obj = s.dual.iter().zip(&constraints).fold(q(0), |acc, (y, k)| acc + y * &k.rhs);
            prop_assert_eq!(&dual_obj, &s.value);
            for y in &s.dual { prop_assert!(*y >= q(0)); }
            for j in 0..5 {
                let col: Rational = constraints.iter().zip(&s.dual).fold(q(0), |acc, (k, y)| {
                    acc + k.coeffs.iter().filter(|(v, _)| *v == j).fold(q(0), |s2, (_, w)| s2 + w * y)
                });
                prop_assert!(col >= q(c[j]));
            }
            let fl = LinearProgram {
                num_vars: 5,
                objective: c.iter().map(|&v| v as f64).collect(),
                constraints: constraints.iter().map(|k| Constraint {
                    coeffs: k.coeffs.iter().map(|(j, v)| (*j, LpScalar::to_f64(v))).collect(),
                    sense: k.sense,
                    rhs: LpScalar::to_f64(&k.rhs),
                }).collect(),
                maximize: true,
            };
            let sf = lp_solve(&fl).unwrap();
            prop_assert!((sf.value - LpScalar::to_f64(&s.value)).abs() < 1e-8);
        }
    }
}
