//! Bell scenarios, behaviors and deterministic strategies.
//!
//! Probability tables are flat vectors indexed by `(x, y, a, b)` in
//! lexicographic order.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{rational_to_f64, Rational};

/// `(|X|, |A|; |Y|, |B|)`: Alice has `n_x` settings with `n_a` outcomes each,
/// Bob has `n_y` settings with `n_b` outcomes each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[usize; 4]", into = "[usize; 4]")]
pub struct Scenario {
    pub n_x: usize,
    pub n_a: usize,
    pub n_y: usize,
    pub n_b: usize,
}

impl TryFrom<[usize; 4]> for Scenario {
    type Error = Error;
    fn try_from(v: [usize; 4]) -> Result<Self> {
        Scenario::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Scenario> for [usize; 4] {
    fn from(s: Scenario) -> Self {
        s.dims()
    }
}

/// A single event `(x, a, y, b)`: Alice gets `a` on `x`, Bob gets `b` on `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: usize,
    pub a: usize,
    pub y: usize,
    pub b: usize,
}

impl Cell {
    pub fn new(x: usize, a: usize, y: usize, b: usize) -> Self {
        Self { x, a, y, b }
    }

    pub fn swapped(self) -> Self {
        Self::new(self.y, self.b, self.x, self.a)
    }
}

impl Scenario {
    pub fn new(n_x: usize, n_a: usize, n_y: usize, n_b: usize) -> Result<Self> {
        if n_x == 0 || n_a == 0 || n_y == 0 || n_b == 0 {
            return Err(Error::InvalidScenario(format!(
                "all sizes must be positive, got ({n_x},{n_a};{n_y},{n_b})"
            )));
        }
        Ok(Self { n_x, n_a, n_y, n_b })
    }

    pub fn dims(&self) -> [usize; 4] {
        [self.n_x, self.n_a, self.n_y, self.n_b]
    }

    pub fn num_cells(&self) -> usize {
        self.n_x * self.n_y * self.n_a * self.n_b
    }

    pub fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * self.n_y + y) * self.n_a + a) * self.n_b + b
    }

    pub fn cell_index(&self, c: Cell) -> usize {
        self.index(c.x, c.y, c.a, c.b)
    }

    pub fn cell(&self, idx: usize) -> Cell {
        let b = idx % self.n_b;
        let rest = idx / self.n_b;
        let a = rest % self.n_a;
        let rest = rest / self.n_a;
        let y = rest % self.n_y;
        let x = rest / self.n_y;
        Cell { x, a, y, b }
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x < self.n_x && c.a < self.n_a && c.y < self.n_y && c.b < self.n_b
    }

    pub fn swapped(&self) -> Self {
        Self {
            n_x: self.n_y,
            n_a: self.n_b,
            n_y: self.n_x,
            n_b: self.n_a,
        }
    }

    pub fn check_same(&self, other: &Scenario) -> Result<()> {
        if self != other {
            return Err(Error::ScenarioMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        Ok(())
    }

    pub fn alice_strategy_count(&self) -> Option<u128> {
        (self.n_a as u128).checked_pow(self.n_x as u32)
    }

    pub fn bob_strategy_count(&self) -> Option<u128> {
        (self.n_b as u128).checked_pow(self.n_y as u32)
    }

    /// `|A|^|X| * |B|^|Y|`, or `None` on overflow.
    pub fn num_deterministic_strategies(&self) -> Option<u128> {
        self.alice_strategy_count()?.checked_mul(self.bob_strategy_count()?)
    }

    /// All deterministic strategies in lexicographic order of `(alice, bob)`.
    pub fn deterministic_strategies(&self, cap: u128) -> Result<Vec<DeterministicStrategy>> {
        let count = self.num_deterministic_strategies().unwrap_or(u128::MAX);
        if count > cap {
            return Err(Error::EnumerationTooLarge { count, cap });
        }
        let na = self.alice_strategy_count().unwrap_or(0) as usize;
        let nb = self.bob_strategy_count().unwrap_or(0) as usize;
        let mut out = Vec::with_capacity(na * nb);
        for i in 0..na {
            let alice = mixed_radix(i, self.n_a, self.n_x);
            for j in 0..nb {
                out.push(DeterministicStrategy {
                    alice: alice.clone(),
                    bob: mixed_radix(j, self.n_b, self.n_y),
                });
            }
        }
        Ok(out)
    }
}

/// Digits of `index` in base `radix`, most significant first.
pub fn mixed_radix(mut index: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % radix;
        index /= radix;
    }
    out
}

/// `(|X|(|A|-1)+1)(|Y|(|B|-1)+1) - 1`, the dimension of the no-signaling
/// and local polytopes.
pub fn ns_dimension(s: &Scenario) -> usize {
    (s.n_x * (s.n_a - 1) + 1) * (s.n_y * (s.n_b - 1) + 1) - 1
}

#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    pub scenario: Scenario,
    pub table: Table,
}

impl Behavior {
    pub fn exact(scenario: Scenario, table: Vec<Rational>) -> Result<Self> {
        if table.len() != scenario.num_cells() {
            return Err(Error::IncompleteTable {
                expected: scenario.num_cells(),
                found: table.len(),
            });
        }
        Ok(Self {
            scenario,
            table: Table::Exact(table),
        })
    }

    pub fn float(scenario: Scenario, table: Vec<f64>) -> Result<Self> {
        if table.len() != scenario.num_cells() {
            return Err(Error::IncompleteTable {
                expected: scenario.num_cells(),
                found: table.len(),
            });
        }
        Ok(Self {
            scenario,
            table: Table::Float(table),
        })
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let v = Rational::new(1.into(), ((scenario.n_a * scenario.n_b) as i64).into());
        Self {
            scenario,
            table: Table::Exact(vec![v; scenario.num_cells()]),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.table, Table::Exact(_))
    }

    pub fn exact_table(&self) -> Option<&[Rational]> {
        match &self.table {
            Table::Exact(v) => Some(v),
            Table::Float(_) => None,
        }
    }

    pub fn require_exact(&self) -> Result<&[Rational]> {
        self.exact_table()
            .ok_or(Error::ExactRequired("behavior must be in rational mode"))
    }

    pub fn prob(&self, idx: usize) -> f64 {
        match &self.table {
            Table::Exact(v) => rational_to_f64(&v[idx]),
            Table::Float(v) => v[idx],
        }
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.prob(self.scenario.index(x, y, a, b))
    }

    pub fn to_float_vec(&self) -> Vec<f64> {
        (0..self.scenario.num_cells()).map(|i| self.prob(i)).collect()
    }

    /// Convex combination of exact behaviors on the same scenario.
    pub fn mixture(parts: &[(Rational, &Behavior)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidStrategy("empty mixture".into()))?;
        let sc = first.1.scenario;
        let mut acc = vec![Rational::zero(); sc.num_cells()];
        for (w, p) in parts {
            sc.check_same(&p.scenario)?;
            for (slot, v) in acc.iter_mut().zip(p.require_exact()?) {
                *slot += w * v;
            }
        }
        Behavior::exact(sc, acc)
    }

    /// Exchanges the roles of Alice and Bob.
    pub fn swapped(&self) -> Self {
        let s = self.scenario;
        let t = s.swapped();
        let perm: Vec<usize> = (0..t.num_cells())
            .map(|i| {
                let c = t.cell(i).swapped();
                s.cell_index(c)
            })
            .collect();
        let table = match &self.table {
            Table::Exact(v) => Table::Exact(perm.iter().map(|&i| v[i].clone()).collect()),
            Table::Float(v) => Table::Float(perm.iter().map(|&i| v[i]).collect()),
        };
        Self { scenario: t, table }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn new(alice: Vec<usize>, bob: Vec<usize>) -> Self {
        Self { alice, bob }
    }

    pub fn validate(&self, s: &Scenario) -> Result<()> {
        if self.alice.len() != s.n_x || self.bob.len() != s.n_y {
            return Err(Error::InvalidStrategy(format!(
                "expected {} and {} settings, got {} and {}",
                s.n_x,
                s.n_y,
                self.alice.len(),
                self.bob.len()
            )));
        }
        if self.alice.iter().any(|&a| a >= s.n_a) || self.bob.iter().any(|&b| b >= s.n_b) {
            return Err(Error::InvalidStrategy("outcome out of range".into()));
        }
        Ok(())
    }

    /// Flat indices of the `|X||Y|` cells this strategy assigns probability one.
    pub fn cells(&self, s: &Scenario) -> Vec<usize> {
        let mut out = Vec::with_capacity(s.n_x * s.n_y);
        for (x, &a) in self.alice.iter().enumerate() {
            for (y, &b) in self.bob.iter().enumerate() {
                out.push(s.index(x, y, a, b));
            }
        }
        out
    }

    pub fn induced_behavior(&self, s: &Scenario) -> Result<Behavior> {
        self.validate(s)?;
        let mut table = vec![Rational::zero(); s.num_cells()];
        for i in self.cells(s) {
            table[i] = Rational::one();
        }
        Behavior::exact(*s, table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub normalization_error: f64,
    pub positivity_error: f64,
    pub signaling_error: f64,
    pub valid: bool,
}

/// Checks normalization, positivity and no-signaling. Exact tables are checked
/// exactly and `tol` is ignored.
pub fn validate_behavior(p: &Behavior, tol: f64) -> ValidationReport {
    match &p.table {
        Table::Exact(v) => validate_generic(&p.scenario, v, |r| r.is_zero(), |r| {
            rational_to_f64(&r.abs())
        }, |r| r.is_negative()),
        Table::Float(v) => {
            let mut rep = validate_generic(&p.scenario, v, |r| r.abs() <= tol, |r| r.abs(), |r| *r < -tol);
            rep.valid = rep.normalization_error <= tol
                && rep.positivity_error <= tol
                && rep.signaling_error <= tol;
            rep
        }
    }
}

fn validate_generic<T>(
    s: &Scenario,
    v: &[T],
    is_zero: impl Fn(&T) -> bool,
    magnitude: impl Fn(&T) -> f64,
    is_negative: impl Fn(&T) -> bool,
) -> ValidationReport
where
    T: Clone + Zero + One + std::ops::Sub<Output = T> + for<'a> std::ops::AddAssign<&'a T>,
{
    let mut ok = true;
    let mut norm_err = 0.0f64;
    let mut pos_err = 0.0f64;
    let mut sig_err = 0.0f64;
    for val in v {
        if is_negative(val) {
            ok = false;
            pos_err = pos_err.max(magnitude(val));
        }
    }
    let block_sum = |x: usize, y: usize| {
        let mut acc = T::zero();
        for a in 0..s.n_a {
            for b in 0..s.n_b {
                acc += &v[s.index(x, y, a, b)];
            }
        }
        acc
    };
    for x in 0..s.n_x {
        for y in 0..s.n_y {
            let d = block_sum(x, y) - T::one();
            if !is_zero(&d) {
                ok = false;
                norm_err = norm_err.max(magnitude(&d));
            }
        }
    }
    let alice_marginal = |x: usize, y: usize, a: usize| {
        let mut acc = T::zero();
        for b in 0..s.n_b {
            acc += &v[s.index(x, y, a, b)];
        }
        acc
    };
    let bob_marginal = |x: usize, y: usize, b: usize| {
        let mut acc = T::zero();
        for a in 0..s.n_a {
            acc += &v[s.index(x, y, a, b)];
        }
        acc
    };
    for x in 0..s.n_x {
        for a in 0..s.n_a {
            let base = alice_marginal(x, 0, a);
            for y in 1..s.n_y {
                let d = alice_marginal(x, y, a) - base.clone();
                if !is_zero(&d) {
                    ok = false;
                    sig_err = sig_err.max(magnitude(&d));
                }
            }
        }
    }
    for y in 0..s.n_y {
        for b in 0..s.n_b {
            let base = bob_marginal(0, y, b);
            for x in 1..s.n_x {
                let d = bob_marginal(x, y, b) - base.clone();
                if !is_zero(&d) {
                    ok = false;
                    sig_err = sig_err.max(magnitude(&d));
                }
            }
        }
    }
    ValidationReport {
        normalization_error: norm_err,
        positivity_error: pos_err,
        signaling_error: sig_err,
        valid: ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_index_round_trip() {
        let s = Scenario::new(3, 2, 4, 3).unwrap();
        for i in 0..s.num_cells() {
            assert_eq!(s.cell_index(s.cell(i)), i);
        }
        assert_eq!(s.index(0, 0, 0, 1), 1);
        assert_eq!(s.index(0, 1, 0, 0), 6);
    }

    #[test]
    fn ns_dimensions() {
        assert_eq!(ns_dimension(&Scenario::new(2, 2, 2, 2).unwrap()), 8);
        assert_eq!(ns_dimension(&Scenario::new(3, 4, 3, 4).unwrap()), 99);
        assert_eq!(ns_dimension(&Scenario::new(5, 8, 5, 8).unwrap()), 1295);
    }

    #[test]
    fn zero_sized_scenario_rejected() {
        assert!(Scenario::new(2, 0, 2, 2).is_err());
        assert!(serde_json::from_str::<Scenario>("[2,2,0,2]").is_err());
    }

    #[test]
    fn deterministic_behaviors_are_valid() {
        let s = Scenario::new(2, 3, 2, 2).unwrap();
        let all = s.deterministic_strategies(1000).unwrap();
        assert_eq!(all.len(), 36);
        for d in &all {
            let p = d.induced_behavior(&s).unwrap();
            assert!(validate_behavior(&p, 0.0).valid);
        }
        assert!(s.deterministic_strategies(10).is_err());
    }

    #[test]
    fn signaling_detected() {
        let s = Scenario::new(2, 2, 2, 2).unwrap();
        let mut t = vec![Rational::zero(); 16];
        // Bob copies Alice's input: deterministic but signaling
        for x in 0..2 {
            for y in 0..2 {
                t[s.index(x, y, 0, x)] = Rational::one();
            }
        }
        let p = Behavior::exact(s, t).unwrap();
        let rep = validate_behavior(&p, 0.0);
        assert!(!rep.valid);
        assert!(rep.signaling_error > 0.5);
        assert!(Behavior::float(s, vec![0.25; 15]).is_err());
    }

    #[test]
    fn float_validation_uses_tolerance() {
        let s = Scenario::new(2, 2, 2, 2).unwrap();
        let mut v = vec![0.25; 16];
        v[0] += 1e-12;
        v[1] -= 1e-12;
        let p = Behavior::float(s, v).unwrap();
        assert!(validate_behavior(&p, 1e-9).valid);
        assert!(!validate_behavior(&p, 1e-14).valid);
    }

    #[test]
    fn swap_is_involution() {
        let s = Scenario::new(2, 3, 3, 2).unwrap();
        let d = DeterministicStrategy::new(vec![2, 1], vec![0, 1, 1]);
        let p = d.induced_behavior(&s).unwrap();
        let q = p.swapped();
        assert_eq!(q.scenario, s.swapped());
        assert_eq!(q.swapped(), p);
        let dq = DeterministicStrategy::new(vec![0, 1, 1], vec![2, 1]).induced_behavior(&s.swapped()).unwrap();
        assert_eq!(q, dq);
    }
}
