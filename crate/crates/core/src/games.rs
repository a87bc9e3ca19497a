//! Nonlocal games: winning probabilities, exact classical values, games
//! built from tables of zeros, lifts to more inputs, and the builtin
//! CHSH, magic square and pentagram games.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numerics::Rational;
use crate::polytope::{local_maximizers, ns_value, BellExpression, DEFAULT_OPTIMIZER_CAP, DEFAULT_VERTEX_CAP};
use crate::scenario::{Behavior, Cell, DeterministicStrategy, Scenario};
use crate::zeros::TableOfZeros;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    pub scenario: Scenario,
    /// Input distribution indexed by `x * n_y + y`.
    pub pi: Vec<Rational>,
    /// Winning predicate in flat `(x, y, a, b)` cell order.
    pub winning: Vec<bool>,
}

impl Game {
    pub fn new(scenario: Scenario, pi: Vec<Rational>, winning: Vec<bool>) -> Result<Self> {
        let pairs = scenario.n_x * scenario.n_y;
        if pi.len() != pairs {
            return Err(Error::IncompleteTable { expected: pairs, found: pi.len() });
        }
        if winning.len() != scenario.num_cells() {
            return Err(Error::IncompleteTable { expected: scenario.num_cells(), found: winning.len() });
        }
        if pi.iter().any(|p| p < &Rational::zero()) || pi.iter().sum::<Rational>() != Rational::one() {
            return Err(Error::Parse("input distribution must be nonnegative and sum to 1".into()));
        }
        Ok(Self { scenario, pi, winning })
    }

    /// Uniform input distribution with winning predicate `w(x, a, y, b)`.
    pub fn uniform(scenario: Scenario, w: impl Fn(usize, usize, usize, usize) -> bool) -> Self {
        let pairs = scenario.n_x * scenario.n_y;
        let winning = (0..scenario.num_cells())
            .map(|i| {
                let c = scenario.cell(i);
                w(c.x, c.a, c.y, c.b)
            })
            .collect();
        Self {
            scenario,
            pi: vec![Rational::new(1.into(), pairs.into()); pairs],
            winning,
        }
    }

    pub fn pi(&self, x: usize, y: usize) -> &Rational {
        &self.pi[x * self.scenario.n_y + y]
    }

    pub fn wins(&self, x: usize, a: usize, y: usize, b: usize) -> bool {
        self.winning[self.scenario.index(x, y, a, b)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameValueReport {
    pub omega_classical: Rational,
    pub optimizer_count: u128,
    /// Empty when there are more optimizers than the listing cap.
    pub optimizers: Vec<DeterministicStrategy>,
    /// Nonsignaling value, when the scenario is small enough for the LP.
    pub omega_ns: Option<Rational>,
    pub quantum_upper_bound: Option<f64>,
}

/// Winning probability of a behavior, exact when the behavior is.
pub fn winning_probability(g: &Game, p: &Behavior) -> Result<f64> {
    let e = expression_from_game(g);
    e.value_f64(p)
}

pub fn winning_probability_exact(g: &Game, p: &Behavior) -> Result<Rational> {
    expression_from_game(g).value_exact(p)
}

/// Coefficients `pi(x, y) W(a, b, x, y)`.
pub fn expression_from_game(g: &Game) -> BellExpression {
    let s = g.scenario;
    let coefficients = (0..s.num_cells())
        .map(|i| {
            let c = s.cell(i);
            if g.winning[i] {
                g.pi(c.x, c.y).clone()
            } else {
                Rational::zero()
            }
        })
        .collect();
    BellExpression::new(s, coefficients).expect("sizes match")
}

/// Exact classical value with every optimal deterministic strategy.
pub fn classical_value(g: &Game) -> Result<GameValueReport> {
    classical_value_with_caps(g, DEFAULT_VERTEX_CAP, DEFAULT_OPTIMIZER_CAP)
}

pub fn classical_value_with_caps(g: &Game, search_cap: u128, list_cap: u128) -> Result<GameValueReport> {
    let e = expression_from_game(g);
    let m = local_maximizers(&e, search_cap, list_cap)?;
    let omega_ns = ns_value(&e)?;
    Ok(GameValueReport {
        omega_classical: m.value,
        optimizer_count: m.count,
        optimizers: m.optimizers,
        omega_ns,
        quantum_upper_bound: None,
    })
}

/// Uniform game lost exactly on the cells of `t`.
pub fn game_from_zeros(t: &TableOfZeros) -> Game {
    Game::uniform(t.scenario, |x, a, y, b| !t.contains(&Cell::new(x, a, y, b)))
}

/// The losing cells of a game.
pub fn zeros_from_game(g: &Game) -> TableOfZeros {
    let s = g.scenario;
    let cells: Vec<Cell> = (0..s.num_cells()).filter(|&i| !g.winning[i]).map(|i| s.cell(i)).collect();
    TableOfZeros::new(s, cells).expect("cells come from the scenario")
}

/// `n` copies of the game side by side. Inputs are copy-major; a pair of
/// inputs from the same copy plays the original game and any other pair is
/// an automatic win. Inputs are drawn uniformly.
pub fn lift_game(g: &Game, n: usize) -> Result<Game> {
    if n == 0 {
        return Err(Error::InvalidScenario("lift count must be positive".into()));
    }
    if n == 1 {
        return Ok(g.clone());
    }
    let s = g.scenario;
    let lifted = Scenario::new(n * s.n_x, s.n_a, n * s.n_y, s.n_b)?;
    Ok(Game::uniform(lifted, |x, a, y, b| {
        if x / s.n_x == y / s.n_y {
            g.wins(x % s.n_x, a, y % s.n_y, b)
        } else {
            true
        }
    }))
}

pub const BUILTIN_GAMES: [&str; 3] = ["chsh", "magic_square", "pentagram"];

pub fn builtin_game(name: &str) -> Result<Game> {
    match name {
        "chsh" => Ok(chsh_game()),
        "magic_square" => Ok(magic_square_game()),
        "pentagram" => Ok(pentagram_game()),
        other => Err(Error::UnknownBuiltin(other.to_string())),
    }
}

/// Win iff `a xor b = x and y`.
pub fn chsh_game() -> Game {
    Game::uniform(Scenario::new(2, 2, 2, 2).unwrap(), |x, a, y, b| (a ^ b) == (x & y))
}

/// Signs `(s1, s2, s1 s2 parity)` for a three-cell line of the square.
/// Bit 1 of `i` gives the first sign and bit 0 the second, with 0 meaning +1.
pub(crate) fn magic_square_tuple(i: usize, parity: i8) -> [i8; 3] {
    let s1 = if i >> 1 & 1 == 0 { 1 } else { -1 };
    let s2 = if i & 1 == 0 { 1 } else { -1 };
    [s1, s2, parity * s1 * s2]
}

/// Output label to tuple index, per row input of Alice.
pub(crate) const MS_ALICE_LABELS: [[usize; 4]; 3] = [[0, 1, 2, 3], [0, 2, 1, 3], [3, 2, 1, 0]];
/// Output label to tuple index, per column input of Bob.
pub(crate) const MS_BOB_LABELS: [[usize; 4]; 3] = [[0, 1, 2, 3], [0, 2, 1, 3], [0, 1, 2, 3]];

/// Alice fills row `x` with product +1, Bob column `y` with product -1; they
/// win iff they agree on the shared entry.
pub fn magic_square_game() -> Game {
    Game::uniform(Scenario::new(3, 4, 3, 4).unwrap(), |x, a, y, b| {
        let row = magic_square_tuple(MS_ALICE_LABELS[x][a], 1);
        let col = magic_square_tuple(MS_BOB_LABELS[y][b], -1);
        row[y] == col[x]
    })
}

/// Vertices of the pentagram along each of its five lines. Vertices are
/// named 0..=9: the four points A B C D of line 0 first, then the pairs
/// ab ac ad bc bd cd.
pub(crate) const PENTAGRAM_LINES: [[usize; 4]; 5] = [[0, 1, 2, 3], [0, 4, 5, 6], [4, 1, 7, 8], [5, 7, 2, 9], [6, 8, 9, 3]];

/// Product of the signs along line `x`.
pub(crate) fn pentagram_parity(x: usize) -> i8 {
    if x == 0 {
        -1
    } else {
        1
    }
}

/// Sign tuple for output `i` of line `x`: the first three signs read from
/// the bits of `i` (most significant first, 0 meaning +1) and the last one
/// fixed by the parity.
pub(crate) fn pentagram_tuple(x: usize, i: usize) -> [i8; 4] {
    let s: Vec<i8> = (0..3).map(|k| if i >> (2 - k) & 1 == 0 { 1 } else { -1 }).collect();
    [s[0], s[1], s[2], pentagram_parity(x) * s[0] * s[1] * s[2]]
}

/// Same line: identical outputs. Different lines: agree on the shared vertex.
pub fn pentagram_game() -> Game {
    Game::uniform(Scenario::new(5, 8, 5, 8).unwrap(), |x, a, y, b| {
        let ta = pentagram_tuple(x, a);
        let tb = pentagram_tuple(y, b);
        if x == y {
            return ta == tb;
        }
        let v = PENTAGRAM_LINES[x].iter().find(|v| PENTAGRAM_LINES[y].contains(v)).unwrap();
        let i = PENTAGRAM_LINES[x].iter().position(|u| u == v).unwrap();
        let j = PENTAGRAM_LINES[y].iter().position(|u| u == v).unwrap();
        ta[i] == tb[j]
    })
}

/// Probability that a behavior answers with the same outputs on equal lines
/// of the pentagram, that it agrees on shared vertices, and that every output
/// has the right parity (the last holds by construction of the alphabet).
pub fn pentagram_conditions(p: &Behavior) -> Result<[f64; 3]> {
    let s = Scenario::new(5, 8, 5, 8)?;
    s.check_same(&p.scenario)?;
    let g = pentagram_game();
    let mut same = 0.0;
    let mut cross = 0.0;
    let mut parity = 0.0;
    for x in 0..5 {
        for y in 0..5 {
            let mut won = 0.0;
            let mut total = 0.0;
            for a in 0..8 {
                for b in 0..8 {
                    let v = p.get(x, y, a, b);
                    total += v;
                    if g.wins(x, a, y, b) {
                        won += v;
                    }
                }
            }
            parity += total;
            if x == y {
                same += won;
            } else {
                cross += won;
            }
        }
    }
    Ok([parity / 25.0, cross / 20.0, same / 5.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeros::is_lhv_realizable;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn chsh_values() {
        let g = chsh_game();
        assert!(!g.wins(1, 0, 1, 0));
        let v = classical_value(&g).unwrap();
        assert_eq!(v.omega_classical, r(3, 4));
        assert_eq!(v.optimizer_count, 8);
        assert_eq!(v.omega_ns, Some(r(1, 1)));
        let u = Behavior::uniform(g.scenario);
        assert_eq!(winning_probability_exact(&g, &u).unwrap(), r(1, 2));
    }

    #[test]
    fn always_win_game() {
        let s = Scenario::new(2, 3, 2, 2).unwrap();
        let g = Game::uniform(s, |_, _, _, _| true);
        let u = Behavior::uniform(s);
        assert_eq!(winning_probability_exact(&g, &u).unwrap(), r(1, 1));
        assert_eq!(classical_value(&g).unwrap().omega_classical, r(1, 1));
        assert!(zeros_from_game(&g).is_empty());
    }

    #[test]
    fn magic_square_lines_have_fixed_parity() {
        for x in 0..3 {
            for a in 0..4 {
                let t = magic_square_tuple(MS_ALICE_LABELS[x][a], 1);
                assert_eq!(t.iter().product::<i8>(), 1);
                let t = magic_square_tuple(MS_BOB_LABELS[x][a], -1);
                assert_eq!(t.iter().product::<i8>(), -1);
            }
        }
        let g = magic_square_game();
        // every input pair loses on exactly half of the outcome pairs
        for x in 0..3 {
            for y in 0..3 {
                let lost = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).filter(|&(a, b)| !g.wins(x, a, y, b)).count();
                assert_eq!(lost, 8);
            }
        }
        assert!(!is_lhv_realizable(&zeros_from_game(&g)).realizable);
    }

    #[test]
    fn pentagram_alphabet() {
        for x in 0..5 {
            let mut seen = std::collections::BTreeSet::new();
            for i in 0..8 {
                let t = pentagram_tuple(x, i);
                assert_eq!(t.iter().product::<i8>(), pentagram_parity(x));
                seen.insert(t);
            }
            assert_eq!(seen.len(), 8);
        }
        // every pair of distinct lines meets in exactly one vertex
        for x in 0..5 {
            for y in 0..5 {
                let shared = PENTAGRAM_LINES[x].iter().filter(|v| PENTAGRAM_LINES[y].contains(v)).count();
                assert_eq!(shared, if x == y { 4 } else { 1 });
            }
        }
    }

    #[test]
    fn zeros_round_trip() {
        let g = magic_square_game();
        let back = game_from_zeros(&zeros_from_game(&g));
        assert_eq!(back, g);
        assert_eq!(builtin_game("chsh").unwrap(), chsh_game());
        assert!(matches!(builtin_game("nope"), Err(Error::UnknownBuiltin(_))));
    }

    #[test]
    fn lift_structure() {
        let g = chsh_game();
        assert_eq!(lift_game(&g, 1).unwrap(), g);
        let l = lift_game(&g, 2).unwrap();
        assert_eq!(l.scenario.dims(), [4, 2, 4, 2]);
        assert!(l.wins(0, 0, 3, 1));
        assert_eq!(l.wins(2, 1, 3, 1), g.wins(0, 1, 1, 1));
        let v = classical_value(&l).unwrap();
        assert_eq!(v.optimizer_count, 64);
        // optimizers are products of optimizers of each copy
        let base = classical_value(&g).unwrap().optimizers;
        for d in &v.optimizers {
            for k in 0..2 {
                let part = DeterministicStrategy::new(d.alice[2 * k..2 * k + 2].to_vec(), d.bob[2 * k..2 * k + 2].to_vec());
                assert!(base.contains(&part));
            }
        }
        assert!(lift_game(&g, 0).is_err());
    }

    #[test]
    fn winning_probability_is_linear() {
        let g = magic_square_game();
        let s = g.scenario;
        let d1 = DeterministicStrategy::new(vec![0, 1, 2], vec![3, 0, 1]).induced_behavior(&s).unwrap();
        let d2 = DeterministicStrategy::new(vec![2, 2, 0], vec![1, 1, 2]).induced_behavior(&s).unwrap();
        let q = r(2, 7);
        let mix = Behavior::mixture(&[(q.clone(), &d1), (r(1, 1) - &q, &d2)]).unwrap();
        let lhs = winning_probability_exact(&g, &mix).unwrap();
        let rhs = &q * winning_probability_exact(&g, &d1).unwrap() + (r(1, 1) - &q) * winning_probability_exact(&g, &d2).unwrap();
        assert_eq!(lhs, rhs);
    }
}
