//! Local polytope computations: local content, Bell expressions, saturating
//! vertices and facet tests.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{exact_rank_integer_rows, Rational};
use crate::scenario::{mixed_radix, ns_dimension, validate_behavior, Behavior, DeterministicStrategy, Scenario, Table};
use crate::solvers::{lp_solve, Constraint, LinearProgram, Sense};

pub const DEFAULT_VERTEX_CAP: u128 = 1 << 31;
/// Largest cell count for which `ns_value` solves its exact LP.
pub const NS_VALUE_CELL_CAP: usize = 600;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bounds {
    pub local: Option<Rational>,
    pub quantum: Option<f64>,
    pub ns: Option<Rational>,
}

/// Linear functional `p -> sum_c coefficients[c] p(c)` on behaviors.
#[derive(Debug, Clone, PartialEq)]
pub struct BellExpression {
    pub scenario: Scenario,
    pub coefficients: Vec<Rational>,
    pub bounds: Bounds,
}

impl BellExpression {
    pub fn new(scenario: Scenario, coefficients: Vec<Rational>) -> Result<Self> {
        if coefficients.len() != scenario.num_cells() {
            return Err(Error::IncompleteTable {
                expected: scenario.num_cells(),
                found: coefficients.len(),
            });
        }
        Ok(Self {
            scenario,
            coefficients,
            bounds: Bounds::default(),
        })
    }

    pub fn value_exact(&self, p: &Behavior) -> Result<Rational> {
        self.scenario.check_same(&p.scenario)?;
        let t = p.require_exact()?;
        Ok(self
            .coefficients
            .iter()
            .zip(t)
            .filter(|(c, _)| !c.is_zero())
            .fold(Rational::zero(), |acc, (c, v)| acc + c * v))
    }

    pub fn value_f64(&self, p: &Behavior) -> Result<f64> {
        self.scenario.check_same(&p.scenario)?;
        Ok(self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| c.to_f64().unwrap_or(0.0) * p.prob(i))
            .sum())
    }

    pub fn value_at(&self, d: &DeterministicStrategy) -> Rational {
        d.cells(&self.scenario)
            .into_iter()
            .fold(Rational::zero(), |acc, i| acc + &self.coefficients[i])
    }

    pub fn swapped(&self) -> Self {
        let s = self.scenario;
        let t = s.swapped();
        let coefficients = (0..t.num_cells())
            .map(|i| self.coefficients[s.cell_index(t.cell(i).swapped())].clone())
            .collect();
        Self {
            scenario: t,
            coefficients,
            bounds: self.bounds.clone(),
        }
    }

    /// Coefficients scaled by the lcm of their denominators.
    fn integer_form(&self) -> Result<(Vec<i64>, BigInt)> {
        let l = self
            .coefficients
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints = self
            .coefficients
            .iter()
            .map(|c| (c.numer() * (&l / c.denom())).to_i64())
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::ExactRequired("coefficients too large for integer scoring"))?;
        Ok((ints, l))
    }
}

/// Deterministic strategies, i.e. vertices of the local polytope, in
/// lexicographic order.
pub fn enumerate_local_vertices(s: &Scenario, cap: u128) -> Result<Vec<DeterministicStrategy>> {
    s.deterministic_strategies(cap)
}

/// Deterministic strategies all of whose cells lie in `support`.
pub fn compatible_vertices(s: &Scenario, support: &[bool]) -> Vec<DeterministicStrategy> {
    let mut out = Vec::new();
    let mut alice = Vec::with_capacity(s.n_x);
    let allowed = vec![vec![true; s.n_b]; s.n_y];
    extend_alice(s, support, &mut alice, allowed, &mut out);
    out
}

fn extend_alice(
    s: &Scenario,
    support: &[bool],
    alice: &mut Vec<usize>,
    allowed: Vec<Vec<bool>>,
    out: &mut Vec<DeterministicStrategy>,
) {
    let x = alice.len();
    if x == s.n_x {
        let choices: Vec<Vec<usize>> = allowed
            .iter()
            .map(|row| (0..s.n_b).filter(|&b| row[b]).collect())
            .collect();
        let total: usize = choices.iter().map(Vec::len).product();
        for k in 0..total {
            let mut rem = k;
            let mut bob = vec![0; s.n_y];
            for y in (0..s.n_y).rev() {
                bob[y] = choices[y][rem % choices[y].len()];
                rem /= choices[y].len();
            }
            out.push(DeterministicStrategy::new(alice.clone(), bob));
        }
        return;
    }
    for a in 0..s.n_a {
        let next: Vec<Vec<bool>> = (0..s.n_y)
            .map(|y| (0..s.n_b).map(|b| allowed[y][b] && support[s.index(x, y, a, b)]).collect())
            .collect();
        if next.iter().all(|row| row.iter().any(|&v| v)) {
            alice.push(a);
            extend_alice(s, support, alice, next, out);
            alice.pop();
        }
    }
}

#[derive(Debug, Clone)]
pub struct LocalContent {
    pub q_l: Rational,
    /// Optimal decomposition weights on deterministic strategies (nonzero only).
    pub weights: Vec<(DeterministicStrategy, Rational)>,
    /// Dual certificate: nonnegative `I` with `tr(I^T P) >= 1` at every
    /// vertex and `tr(I^T p) = q_l`.
    pub dual: BellExpression,
    pub compatible_vertices: usize,
}

impl LocalContent {
    pub fn q_nl(&self) -> Rational {
        Rational::one() - &self.q_l
    }
}

/// Maximal weight of a local behavior in a convex decomposition of `p`.
///
/// Only vertices compatible with the support of `p` can carry weight, so the
/// LP is restricted to those. Zero cells get dual value one, which keeps the
/// certificate valid for every pruned vertex.
pub fn local_content(p: &Behavior) -> Result<LocalContent> {
    let t = p.require_exact()?;
    let rep = validate_behavior(p, 0.0);
    if !rep.valid {
        return Err(Error::InvalidStrategy(format!(
            "behavior is not a valid no-signaling table (normalization {:.3e}, positivity {:.3e}, signaling {:.3e})",
            rep.normalization_error, rep.positivity_error, rep.signaling_error
        )));
    }
    let s = p.scenario;
    let support: Vec<bool> = t.iter().map(|v| v.is_positive()).collect();
    let verts = compatible_vertices(&s, &support);
    let mut dual = vec![Rational::zero(); s.num_cells()];
    for (i, on) in support.iter().enumerate() {
        if !on {
            dual[i] = Rational::one();
        }
    }
    if verts.is_empty() {
        return Ok(LocalContent {
            q_l: Rational::zero(),
            weights: Vec::new(),
            dual: BellExpression::new(s, dual)?,
            compatible_vertices: 0,
        });
    }
    let rows: Vec<usize> = (0..s.num_cells()).filter(|&i| support[i]).collect();
    let mut row_of = vec![usize::MAX; s.num_cells()];
    for (r, &c) in rows.iter().enumerate() {
        row_of[c] = r;
    }
    let mut coeffs: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); rows.len()];
    for (j, v) in verts.iter().enumerate() {
        for c in v.cells(&s) {
            coeffs[row_of[c]].push((j, Rational::one()));
        }
    }
    let lp = LinearProgram {
        num_vars: verts.len(),
        objective: vec![Rational::one(); verts.len()],
        constraints: coeffs
            .into_iter()
            .zip(&rows)
            .map(|(coeffs, &c)| Constraint {
                coeffs,
                sense: Sense::Le,
                rhs: t[c].clone(),
            })
            .collect(),
        maximize: true,
    };
    let sol = lp_solve(&lp)?;
    for (r, &c) in rows.iter().enumerate() {
        dual[c] = sol.dual[r].clone();
    }
    let weights = verts
        .into_iter()
        .zip(sol.primal)
        .filter(|(_, w)| !w.is_zero())
        .collect();
    Ok(LocalContent {
        q_l: sol.value,
        weights,
        dual: BellExpression::new(s, dual)?,
        compatible_vertices: lp.num_vars,
    })
}

/// Floating-point local content, treating entries below `tol` as zeros.
pub fn local_content_float(p: &Behavior, tol: f64) -> Result<f64> {
    let s = p.scenario;
    let probs = p.to_float_vec();
    let support: Vec<bool> = probs.iter().map(|&v| v > tol).collect();
    let verts = compatible_vertices(&s, &support);
    if verts.is_empty() {
        return Ok(0.0);
    }
    let rows: Vec<usize> = (0..s.num_cells()).filter(|&i| support[i]).collect();
    let mut row_of = vec![usize::MAX; s.num_cells()];
    for (r, &c) in rows.iter().enumerate() {
        row_of[c] = r;
    }
    let mut coeffs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows.len()];
    for (j, v) in verts.iter().enumerate() {
        for c in v.cells(&s) {
            coeffs[row_of[c]].push((j, 1.0));
        }
    }
    let lp = LinearProgram {
        num_vars: verts.len(),
        objective: vec![1.0; verts.len()],
        constraints: coeffs
            .into_iter()
            .zip(&rows)
            .map(|(coeffs, &c)| Constraint {
                coeffs,
                sense: Sense::Le,
                rhs: probs[c],
            })
            .collect(),
        maximize: true,
    };
    Ok(lp_solve(&lp)?.value)
}

/// Maximum of the expression over the no-signaling polytope. `None` above
/// [`NS_VALUE_CELL_CAP`] cells, where the exact tableau gets too large.
pub fn ns_value(expr: &BellExpression) -> Result<Option<Rational>> {
    let s = expr.scenario;
    if s.num_cells() > NS_VALUE_CELL_CAP {
        return Ok(None);
    }
    let one = Rational::one;
    let mut constraints = Vec::new();
    for x in 0..s.n_x {
        for y in 0..s.n_y {
            let mut coeffs = Vec::new();
            for a in 0..s.n_a {
                for b in 0..s.n_b {
                    coeffs.push((s.index(x, y, a, b), one()));
                }
            }
            constraints.push(Constraint { coeffs, sense: Sense::Eq, rhs: one() });
        }
    }
    for x in 0..s.n_x {
        for a in 0..s.n_a {
            for y in 1..s.n_y {
                let mut coeffs = Vec::new();
                for b in 0..s.n_b {
                    coeffs.push((s.index(x, y, a, b), one()));
                    coeffs.push((s.index(x, 0, a, b), -one()));
                }
                constraints.push(Constraint { coeffs, sense: Sense::Eq, rhs: Rational::zero() });
            }
        }
    }
    for y in 0..s.n_y {
        for b in 0..s.n_b {
            for x in 1..s.n_x {
                let mut coeffs = Vec::new();
                for a in 0..s.n_a {
                    coeffs.push((s.index(x, y, a, b), one()));
                    coeffs.push((s.index(0, y, a, b), -one()));
                }
                constraints.push(Constraint { coeffs, sense: Sense::Eq, rhs: Rational::zero() });
            }
        }
    }
    let lp = LinearProgram {
        num_vars: s.num_cells(),
        objective: expr.coefficients.clone(),
        constraints,
        maximize: true,
    };
    Ok(Some(lp_solve(&lp)?.value))
}

#[derive(Debug, Clone)]
pub struct LocalMaximum {
    pub value: Rational,
    /// Number of optimal deterministic strategies.
    pub count: u128,
    /// All optimizers in lexicographic order, empty when `count` exceeds the
    /// listing cap.
    pub optimizers: Vec<DeterministicStrategy>,
}

pub const DEFAULT_OPTIMIZER_CAP: u128 = 10_000_000;

/// Exact local maximum and its optimal strategies. Enumerates the party with
/// fewer strategies; the other party best-responds setting by setting.
pub fn local_maximizers(expr: &BellExpression, search_cap: u128, list_cap: u128) -> Result<LocalMaximum> {
    let s = expr.scenario;
    let alice = s.alice_strategy_count().unwrap_or(u128::MAX);
    let bob = s.bob_strategy_count().unwrap_or(u128::MAX);
    if bob < alice {
        let mut res = local_maximizers(&expr.swapped(), search_cap, list_cap)?;
        for d in &mut res.optimizers {
            std::mem::swap(&mut d.alice, &mut d.bob);
        }
        res.optimizers.sort();
        return Ok(res);
    }
    if alice > search_cap {
        return Err(Error::EnumerationTooLarge { count: alice, cap: search_cap });
    }
    let (w, scale) = expr.integer_form()?;
    let n = alice as usize;
    let chunk = (n / 256).max(1);
    struct Part {
        best: i64,
        hits: Vec<(usize, Vec<Vec<usize>>)>,
    }
    let parts: Vec<Part> = (0..n.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut part = Part { best: i64::MIN, hits: Vec::new() };
            let mut scores = vec![0i64; s.n_b];
            for idx in c * chunk..((c + 1) * chunk).min(n) {
                let alpha = mixed_radix(idx, s.n_a, s.n_x);
                let mut total = 0i64;
                let mut argmax = Vec::with_capacity(s.n_y);
                for y in 0..s.n_y {
                    scores.iter_mut().for_each(|v| *v = 0);
                    for (x, &a) in alpha.iter().enumerate() {
                        let base = s.index(x, y, a, 0);
                        for (b, sc) in scores.iter_mut().enumerate() {
                            *sc += w[base + b];
                        }
                    }
                    let m = *scores.iter().max().unwrap();
                    total += m;
                    argmax.push((0..s.n_b).filter(|&b| scores[b] == m).collect::<Vec<_>>());
                }
                if total > part.best {
                    part.best = total;
                    part.hits.clear();
                }
                if total == part.best {
                    part.hits.push((idx, argmax));
                }
            }
            part
        })
        .collect();
    let best = parts.iter().map(|p| p.best).max().unwrap_or(0);
    let hits: Vec<&(usize, Vec<Vec<usize>>)> = parts
        .iter()
        .filter(|p| p.best == best)
        .flat_map(|p| p.hits.iter())
        .collect();
    let count: u128 = hits
        .iter()
        .map(|(_, am)| am.iter().map(|v| v.len() as u128).product::<u128>())
        .sum();
    let mut optimizers = Vec::new();
    if count <= list_cap {
        for (idx, am) in &hits {
            let alpha = mixed_radix(*idx, s.n_a, s.n_x);
            let total: usize = am.iter().map(Vec::len).product();
            for k in 0..total {
                let mut rem = k;
                let mut bob = vec![0; s.n_y];
                for y in (0..s.n_y).rev() {
                    bob[y] = am[y][rem % am[y].len()];
                    rem /= am[y].len();
                }
                optimizers.push(DeterministicStrategy::new(alpha.clone(), bob));
            }
        }
    }
    Ok(LocalMaximum {
        value: Rational::new(best.into(), scale),
        count,
        optimizers,
    })
}

/// Where saturating vertices come from.
#[derive(Debug, Clone)]
pub enum VertexSource {
    /// Scan every deterministic strategy, up to a cap.
    All { cap: u128 },
    /// Filter a supplied candidate list.
    Candidates(Vec<DeterministicStrategy>),
    /// Use the best-response search; requires the bound to be the local maximum.
    Maximizers,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturationReport {
    pub count: usize,
    /// Rank of the saturating vertices as vectors in probability space.
    pub linear_rank: usize,
    /// Dimension of their affine hull, `linear_rank - 1` for nonempty sets.
    pub affine_rank: usize,
}

pub fn saturating_set(expr: &BellExpression, bound: &Rational, source: VertexSource) -> Result<Vec<DeterministicStrategy>> {
    Ok(match source {
        VertexSource::All { cap } => enumerate_local_vertices(&expr.scenario, cap)?
            .into_par_iter()
            .filter(|d| &expr.value_at(d) == bound)
            .collect(),
        VertexSource::Candidates(c) => c.into_iter().filter(|d| &expr.value_at(d) == bound).collect(),
        VertexSource::Maximizers => {
            let m = local_maximizers(expr, DEFAULT_VERTEX_CAP, DEFAULT_OPTIMIZER_CAP)?;
            if &m.value != bound {
                return Err(Error::BoundViolated {
                    bound: bound.to_string(),
                    found: m.value.to_string(),
                });
            }
            if m.optimizers.len() as u128 != m.count {
                return Err(Error::EnumerationTooLarge { count: m.count, cap: DEFAULT_OPTIMIZER_CAP });
            }
            m.optimizers
        }
    })
}

pub fn vertex_rank(s: &Scenario, verts: &[DeterministicStrategy]) -> usize {
    let rows: Vec<Vec<(usize, i64)>> = verts
        .iter()
        .map(|d| {
            let mut r: Vec<(usize, i64)> = d.cells(s).into_iter().map(|c| (c, 1)).collect();
            r.sort_unstable();
            r
        })
        .collect();
    exact_rank_integer_rows(s.num_cells(), &rows)
}

pub fn saturating_vertices(expr: &BellExpression, bound: &Rational, source: VertexSource) -> Result<SaturationReport> {
    let verts = saturating_set(expr, bound, source)?;
    let linear_rank = vertex_rank(&expr.scenario, &verts);
    Ok(SaturationReport {
        count: verts.len(),
        linear_rank,
        affine_rank: linear_rank.saturating_sub(1),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TightnessReport {
    pub saturation: SaturationReport,
    pub ns_dimension: usize,
    pub tight: bool,
}

/// Facet test: tight iff the saturating vertices span a hyperplane of the
/// local polytope, i.e. their linear rank equals its dimension.
pub fn tightness_verdict(expr: &BellExpression, local_bound: &Rational) -> Result<TightnessReport> {
    let max = local_maximizers(expr, DEFAULT_VERTEX_CAP, DEFAULT_OPTIMIZER_CAP)?;
    if &max.value > local_bound {
        return Err(Error::BoundViolated {
            bound: local_bound.to_string(),
            found: max.value.to_string(),
        });
    }
    let saturation = if &max.value < local_bound {
        SaturationReport { count: 0, linear_rank: 0, affine_rank: 0 }
    } else {
        saturating_vertices(expr, local_bound, VertexSource::Maximizers)?
    };
    let d = ns_dimension(&expr.scenario);
    Ok(TightnessReport {
        tight: saturation.linear_rank == d,
        saturation,
        ns_dimension: d,
    })
}

/// Probabilities of a behavior as exact rationals when available.
pub fn exact_or_error(p: &Behavior) -> Result<&[Rational]> {
    match &p.table {
        Table::Exact(v) => Ok(v),
        Table::Float(_) => Err(Error::ExactRequired("local content needs a rational behavior")),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::scenario::validate_behavior;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn chsh_scenario() -> Scenario {
        Scenario::new(2, 2, 2, 2).unwrap()
    }

    pub(crate) fn pr_box() -> Behavior {
        let s = chsh_scenario();
        let mut t = vec![Rational::zero(); 16];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    let b = a ^ (x & y);
                    t[s.index(x, y, a, b)] = q(1, 2);
                }
            }
        }
        Behavior::exact(s, t).unwrap()
    }

    #[test]
    fn deterministic_behavior_is_fully_local() {
        let s = chsh_scenario();
        let d = DeterministicStrategy::new(vec![1, 0], vec![0, 1]);
        let lc = local_content(&d.induced_behavior(&s).unwrap()).unwrap();
        assert_eq!(lc.q_l, q(1, 1));
        assert_eq!(lc.weights.len(), 1);
    }

    #[test]
    fn pr_box_has_no_local_content() {
        let lc = local_content(&pr_box()).unwrap();
        assert_eq!(lc.q_l, q(0, 1));
        assert_eq!(lc.compatible_vertices, 0);
        // dual is the zero-set indicator; every vertex hits at least one zero
        for d in chsh_scenario().deterministic_strategies(100).unwrap() {
            assert!(lc.dual.value_at(&d) >= q(1, 1));
        }
    }

    #[test]
    fn pr_mixture_local_content() {
        // 3/4 PR box + 1/4 uniform; reference value from an independent LP over all 16 vertices
        let mix = Behavior::mixture(&[(q(3, 4), &pr_box()), (q(1, 4), &Behavior::uniform(chsh_scenario()))]).unwrap();
        let lc = local_content(&mix).unwrap();
        assert_eq!(lc.q_l, q(1, 2));
        assert_eq!(lc.dual.value_exact(&mix).unwrap(), lc.q_l);
    }

    #[test]
    fn chsh_ns_value_and_local_max() {
        let s = chsh_scenario();
        let mut coeffs = vec![Rational::zero(); 16];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    let b = a ^ (x & y);
                    coeffs[s.index(x, y, a, b)] = q(1, 4);
                }
            }
        }
        let e = BellExpression::new(s, coeffs).unwrap();
        assert_eq!(ns_value(&e).unwrap(), Some(q(1, 1)));
        let m = local_maximizers(&e, 1 << 20, 1 << 20).unwrap();
        assert_eq!(m.value, q(3, 4));
        assert_eq!(m.count, 8);
        let brute: Vec<_> = s
            .deterministic_strategies(100)
            .unwrap()
            .into_iter()
            .filter(|d| e.value_at(d) == q(3, 4))
            .collect();
        assert_eq!(m.optimizers, brute);
        let t = tightness_verdict(&e, &q(3, 4)).unwrap();
        assert_eq!(t.saturation.linear_rank, 8);
        assert!(t.tight);
        assert!(tightness_verdict(&e, &q(1, 2)).is_err());
    }

    #[test]
    fn swapped_search_matches_direct() {
        // asymmetric scenario forces the Bob-side enumeration
        let s = Scenario::new(3, 3, 2, 2).unwrap();
        let coeffs: Vec<Rational> = (0..s.num_cells()).map(|i| q(((i * 7919) % 11) as i64 - 5, 3)).collect();
        let e = BellExpression::new(s, coeffs).unwrap();
        let m = local_maximizers(&e, 1 << 20, 1 << 20).unwrap();
        let all = s.deterministic_strategies(1 << 20).unwrap();
        let best = all.iter().map(|d| e.value_at(d)).max().unwrap();
        let brute: Vec<_> = all.into_iter().filter(|d| e.value_at(d) == best).collect();
        assert_eq!(m.value, best);
        assert_eq!(m.optimizers, brute);
    }

    #[test]
    fn float_local_content_agrees() {
        let mix = Behavior::mixture(&[(q(1, 3), &pr_box()), (q(2, 3), &Behavior::uniform(chsh_scenario()))]).unwrap();
        let exact = local_content(&mix).unwrap().q_l;
        let f = Behavior::float(mix.scenario, mix.to_float_vec()).unwrap();
        assert!((local_content_float(&f, 1e-12).unwrap() - exact.to_f64().unwrap()).abs() < 1e-9);
        assert!(local_content(&f).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn dual_certificate_is_exact(weights in proptest::collection::vec(0u32..6, 17)) {
            let s = chsh_scenario();
            let verts = s.deterministic_strategies(100).unwrap();
            let behaviors: Vec<Behavior> = verts.iter().map(|d| d.induced_behavior(&s).unwrap()).collect();
            let total: u32 = weights.iter().sum::<u32>() + 1;
            let mut parts: Vec<(Rational, &Behavior)> = weights[..16]
                .iter()
                .zip(&behaviors)
                .map(|(&w, b)| (q(w as i64, total as i64), b))
                .collect();
            let pr = pr_box();
            parts.push((q(weights[16] as i64 + 1, total as i64), &pr));
            let p = Behavior::mixture(&parts).unwrap();
            prop_assert!(validate_behavior(&p, 0.0).valid);
            let lc = local_content(&p).unwrap();
            prop_assert_eq!(lc.dual.value_exact(&p).unwrap(), lc.q_l.clone());
            for d in &verts {
                prop_assert!(lc.dual.value_at(d) >= q(1, 1));
            }
            for c in &lc.dual.coefficients {
                prop_assert!(!c.is_negative());
            }
        }
    }
}
