//! NPA outer approximations of the quantum set at level 1 and 1+AB.
//!
//! Operators are the projectors `E_{a|x}`, `F_{b|y}` with the last outcome of
//! every setting dropped. Moment matrix entries are identified by reducing
//! the operator words with idempotence, orthogonality of outcomes of the same
//! setting and commutation between the parties. The matrix is taken real, so
//! a word and its adjoint share one variable.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{eig_symmetric, Rational, RealMatrix};
use crate::polytope::BellExpression;
use crate::quantum::QuantumStrategy;
use crate::scenario::Scenario;
use crate::solvers::{max_min_eigenvalue_family, maximize_family, AffineFamily, LinearEquality, SymEntries, Verdict};
use crate::zeros::TableOfZeros;

/// Solver tolerance for the interior-point runs.
const SDP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Level {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "1+AB")]
    OnePlusAb,
}

impl std::str::FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "one" => Ok(Level::One),
            "1+ab" | "1ab" => Ok(Level::OnePlusAb),
            other => Err(Error::Parse(format!("unknown NPA level `{other}`, expected 1 or 1+AB"))),
        }
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Level::One => "1",
            Level::OnePlusAb => "1+AB",
        })
    }
}

/// Letters are `(setting, outcome)` pairs.
type Word = Vec<(usize, usize)>;

/// A monomial `A B` with `A` a product of Alice's projectors and `B` of Bob's.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub alice: Word,
    pub bob: Word,
}

impl Monomial {
    fn identity() -> Self {
        Self { alice: Vec::new(), bob: Vec::new() }
    }

    fn is_identity(&self) -> bool {
        self.alice.is_empty() && self.bob.is_empty()
    }

    fn adjoint(&self) -> Self {
        Self {
            alice: self.alice.iter().rev().copied().collect(),
            bob: self.bob.iter().rev().copied().collect(),
        }
    }
}

/// Collapses repeated letters and kills products of distinct outcomes of one
/// setting. `None` means the product is zero.
fn reduce(word: &[(usize, usize)]) -> Option<Word> {
    let mut out: Word = Vec::with_capacity(word.len());
    for &l in word {
        match out.last() {
            Some(&last) if last == l => {}
            Some(&last) if last.0 == l.0 => return None,
            _ => out.push(l),
        }
    }
    Some(out)
}

/// `m_i^dag m_j` reduced and identified with its adjoint.
fn product(mi: &Monomial, mj: &Monomial) -> Option<Monomial> {
    let adj = mi.adjoint();
    let alice = reduce(&[adj.alice, mj.alice.clone()].concat())?;
    let bob = reduce(&[adj.bob, mj.bob.clone()].concat())?;
    let m = Monomial { alice, bob };
    let a = m.adjoint();
    Some(if a < m { a } else { m })
}

/// Moment matrix layout with its entry identifications.
#[derive(Debug, Clone)]
pub struct MomentStructure {
    pub scenario: Scenario,
    pub level: Level,
    pub monomials: Vec<Monomial>,
    /// Variable of each entry `(i, j)`, `i <= j`; `None` for constant entries.
    variables: BTreeMap<(usize, usize), Option<usize>>,
    /// Words of the variables in order.
    pub words: Vec<Monomial>,
    family: AffineFamily,
}

impl MomentStructure {
    pub fn size(&self) -> usize {
        self.monomials.len()
    }

    pub fn num_variables(&self) -> usize {
        self.words.len()
    }

    fn var_of(&self, m: &Monomial) -> Option<usize> {
        self.words.binary_search(m).ok()
    }

    /// `p(a, b | x, y)` as `constant + sum coeff * variable`.
    pub fn cell_expression(&self, x: usize, y: usize, a: usize, b: usize) -> (Rational, Vec<(usize, Rational)>) {
        let s = self.scenario;
        let (la, lb) = (s.n_a - 1, s.n_b - 1);
        let alice_terms: Vec<(Option<usize>, i64)> = if a < la {
            vec![(Some(a), 1)]
        } else {
            std::iter::once((None, 1)).chain((0..la).map(|k| (Some(k), -1))).collect()
        };
        let bob_terms: Vec<(Option<usize>, i64)> = if b < lb {
            vec![(Some(b), 1)]
        } else {
            std::iter::once((None, 1)).chain((0..lb).map(|k| (Some(k), -1))).collect()
        };
        let mut constant = Rational::zero();
        let mut coeffs: BTreeMap<usize, Rational> = BTreeMap::new();
        for (ea, ca) in &alice_terms {
            for (fb, cb) in &bob_terms {
                let m = Monomial {
                    alice: ea.map(|k| vec![(x, k)]).unwrap_or_default(),
                    bob: fb.map(|k| vec![(y, k)]).unwrap_or_default(),
                };
                let c = Rational::from_integer((ca * cb).into());
                if m.is_identity() {
                    constant += c;
                } else {
                    let v = self.var_of(&m).expect("level-one words are present");
                    *coeffs.entry(v).or_insert_with(Rational::zero) += c;
                }
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        (constant, coeffs.into_iter().collect())
    }

    /// Evaluates the matrix at given variable values.
    pub fn evaluate(&self, values: &[f64]) -> RealMatrix {
        self.family.evaluate(values)
    }
}

pub fn build_moment_structure(s: &Scenario, level: Level) -> MomentStructure {
    let mut monomials = vec![Monomial::identity()];
    let alice: Vec<(usize, usize)> = (0..s.n_x).flat_map(|x| (0..s.n_a - 1).map(move |a| (x, a))).collect();
    let bob: Vec<(usize, usize)> = (0..s.n_y).flat_map(|y| (0..s.n_b - 1).map(move |b| (y, b))).collect();
    monomials.extend(alice.iter().map(|&l| Monomial { alice: vec![l], bob: Vec::new() }));
    monomials.extend(bob.iter().map(|&l| Monomial { alice: Vec::new(), bob: vec![l] }));
    if level == Level::OnePlusAb {
        for &la in &alice {
            for &lb in &bob {
                monomials.push(Monomial { alice: vec![la], bob: vec![lb] });
            }
        }
    }
    let n = monomials.len();
    let mut entries: BTreeMap<(usize, usize), Option<Monomial>> = BTreeMap::new();
    let mut words = std::collections::BTreeSet::new();
    for i in 0..n {
        for j in i..n {
            let w = product(&monomials[i], &monomials[j]);
            if let Some(w) = &w {
                if !w.is_identity() {
                    words.insert(w.clone());
                }
            }
            entries.insert((i, j), w);
        }
    }
    let words: Vec<Monomial> = words.into_iter().collect();
    let mut constant: SymEntries = Vec::new();
    let mut basis: Vec<SymEntries> = vec![Vec::new(); words.len()];
    let mut variables = BTreeMap::new();
    for ((i, j), w) in entries {
        let v = match w {
            None => None,
            Some(w) if w.is_identity() => {
                constant.push((i, j, Rational::one()));
                None
            }
            Some(w) => {
                let k = words.binary_search(&w).unwrap();
                basis[k].push((i, j, Rational::one()));
                Some(k)
            }
        };
        variables.insert((i, j), v);
    }
    MomentStructure {
        scenario: *s,
        level,
        monomials,
        variables,
        words,
        family: AffineFamily { n, constant, basis },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NpaVerdict {
    pub verdict: Verdict,
    pub level: Level,
    /// Largest achievable smallest eigenvalue of the moment matrix.
    pub lambda_star: f64,
    pub iterations: usize,
    #[serde(skip)]
    pub witness: Option<RealMatrix>,
}

/// Is there a moment matrix at the given level vanishing on every cell of
/// the table?
pub fn npa_feasible_at(t: &TableOfZeros, level: Level) -> Result<NpaVerdict> {
    let ms = build_moment_structure(&t.scenario, level);
    let eqs: Vec<LinearEquality> = t
        .cells()
        .map(|c| {
            let (constant, coeffs) = ms.cell_expression(c.x, c.y, c.a, c.b);
            LinearEquality { coeffs, rhs: -constant }
        })
        .collect();
    let out = max_min_eigenvalue_family(&ms.family, &eqs, SDP_TOL)?;
    Ok(NpaVerdict {
        verdict: out.verdict,
        level,
        lambda_star: out.lambda_star,
        iterations: out.iterations,
        witness: out.witness,
    })
}

/// Level one first, escalating to 1+AB when the verdict is indeterminate.
pub fn npa_feasible(t: &TableOfZeros, level: Option<Level>) -> Result<NpaVerdict> {
    if let Some(level) = level {
        return npa_feasible_at(t, level);
    }
    let first = npa_feasible_at(t, Level::One)?;
    if first.verdict != Verdict::Indeterminate {
        return Ok(first);
    }
    npa_feasible_at(t, Level::OnePlusAb)
}

/// Screens many tables in parallel.
pub fn npa_feasible_batch(tables: &[TableOfZeros], level: Option<Level>) -> Result<Vec<NpaVerdict>> {
    tables.par_iter().map(|t| npa_feasible(t, level)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct NpaBound {
    /// Upper bound on the quantum value, up to solver accuracy.
    pub value: f64,
    /// Value attained by the returned moment matrix.
    pub attained: f64,
    pub reliable: bool,
    pub level: Level,
    pub iterations: usize,
}

pub fn npa_upper_bound(expr: &BellExpression, level: Level) -> Result<NpaBound> {
    let s = expr.scenario;
    let ms = build_moment_structure(&s, level);
    let mut offset = Rational::zero();
    let mut obj: BTreeMap<usize, Rational> = BTreeMap::new();
    for i in 0..s.num_cells() {
        let c = &expr.coefficients[i];
        if c.is_zero() {
            continue;
        }
        let cell = s.cell(i);
        let (k, coeffs) = ms.cell_expression(cell.x, cell.y, cell.a, cell.b);
        offset += c * k;
        for (v, w) in coeffs {
            *obj.entry(v).or_insert_with(Rational::zero) += c * w;
        }
    }
    let obj: Vec<(usize, Rational)> = obj.into_iter().filter(|(_, v)| !v.is_zero()).collect();
    let m = maximize_family(&ms.family, &[], &offset, &obj, SDP_TOL)?;
    Ok(NpaBound {
        value: m.upper.max(m.lower),
        attained: m.lower,
        reliable: m.reliable,
        level,
        iterations: m.iterations,
    })
}

/// Moment matrix of an explicit strategy, `Re <psi| m_i^dag m_j |psi>`.
pub fn moment_matrix_of_strategy(strategy: &QuantumStrategy, level: Level) -> Result<(MomentStructure, RealMatrix)> {
    let s = strategy.scenario()?;
    let ms = build_moment_structure(&s, level);
    let (d_a, d_b) = (strategy.d_a, strategy.d_b);
    let op = |word: &Word, ms: &[Vec<crate::numerics::ComplexMatrix>], d: usize| {
        word.iter().fold(crate::numerics::ComplexMatrix::identity(d), |acc, &(x, a)| acc.matmul(&ms[x][a]).unwrap())
    };
    let ops: Vec<_> = ms
        .monomials
        .iter()
        .map(|m| crate::numerics::kron(&op(&m.alice, &strategy.alice, d_a), &op(&m.bob, &strategy.bob, d_b)))
        .collect();
    let psi = &strategy.state.amplitudes;
    let applied: Vec<Vec<num_complex::Complex64>> = ops
        .iter()
        .map(|o| (0..o.rows()).map(|r| o.row(r).iter().zip(psi).map(|(u, v)| u * v).sum()).collect())
        .collect();
    let n = ms.size();
    let g = RealMatrix::from_fn(n, n, |i, j| {
        applied[i].iter().zip(&applied[j]).map(|(u, v)| u.conj() * v).sum::<num_complex::Complex64>().re
    });
    Ok((ms, g))
}

/// Largest violation of the entry identifications by a matrix, and its
/// smallest eigenvalue.
pub fn structure_defect(ms: &MomentStructure, g: &RealMatrix) -> Result<(f64, f64)> {
    let mut values: Vec<Option<f64>> = vec![None; ms.num_variables()];
    let mut worst = (g[(0, 0)] - 1.0).abs();
    for (&(i, j), v) in &ms.variables {
        let e = g[(i, j)];
        worst = worst.max((e - g[(j, i)]).abs());
        match v {
            None => {
                let target = if ms.family.constant.iter().any(|c| c.0 == i && c.1 == j) { 1.0 } else { 0.0 };
                worst = worst.max((e - target).abs());
            }
            Some(k) => match values[*k] {
                Some(first) => worst = worst.max((e - first).abs()),
                None => values[*k] = Some(e),
            },
        }
    }
    let lambda = eig_symmetric(g)?.0[0];
    Ok((worst, lambda))
}
