//! Tables of zeros, LHV realizability, criticality and enumeration of
//! critical nonlocal tables (CNTZs) up to relabeling.
//!
//! A table is nonlocal when every deterministic strategy puts weight on one
//! of its cells, i.e. when it is a transversal of the strategy hypergraph.
//! Critical tables are the minimal transversals.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scenario::{Behavior, Cell, DeterministicStrategy, Scenario};
use crate::symmetry::{bell_group, group_reduce, BellGroup, PartySpec};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TableOfZeros {
    pub scenario: Scenario,
    cells: BTreeSet<Cell>,
}

impl TableOfZeros {
    pub fn new(scenario: Scenario, cells: impl IntoIterator<Item = Cell>) -> Result<Self> {
        let cells: BTreeSet<Cell> = cells.into_iter().collect();
        if let Some(c) = cells.iter().find(|c| !scenario.contains(**c)) {
            return Err(Error::CellOutOfRange(format!("{c:?} in {:?}", scenario.dims())));
        }
        Ok(Self { scenario, cells })
    }

    pub fn empty(scenario: Scenario) -> Self {
        Self { scenario, cells: BTreeSet::new() }
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: &Cell) -> bool {
        self.cells.contains(c)
    }

    pub fn is_subset(&self, other: &TableOfZeros) -> bool {
        self.cells.is_subset(&other.cells)
    }

    pub fn without(&self, c: &Cell) -> Self {
        let mut t = self.clone();
        t.cells.remove(c);
        t
    }

    pub fn union(&self, other: &TableOfZeros) -> Self {
        Self {
            scenario: self.scenario,
            cells: self.cells.union(&other.cells).copied().collect(),
        }
    }

    /// Flat `(x, y, a, b)` indicator of the zero cells.
    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.scenario.num_cells()];
        for c in &self.cells {
            m[self.scenario.cell_index(*c)] = true;
        }
        m
    }

    pub fn swapped(&self) -> Self {
        Self {
            scenario: self.scenario.swapped(),
            cells: self.cells.iter().map(|c| c.swapped()).collect(),
        }
    }

    fn bits(&self) -> Result<u128> {
        if self.scenario.num_cells() > 128 {
            return Err(Error::TooManyCells(self.scenario.num_cells()));
        }
        Ok(self.cells.iter().fold(0u128, |acc, c| acc | 1 << self.scenario.cell_index(*c)))
    }

    fn from_bits(scenario: Scenario, bits: u128) -> Self {
        let cells = (0..scenario.num_cells())
            .filter(|&i| bits >> i & 1 == 1)
            .map(|i| scenario.cell(i))
            .collect();
        Self { scenario, cells }
    }
}

/// Cells whose Alice outcome lies in `alice_outcomes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub alice_outcomes: Vec<usize>,
}

impl Region {
    pub fn full(s: &Scenario) -> Self {
        Self { alice_outcomes: (0..s.n_a).collect() }
    }

    fn allowed(&self, s: &Scenario) -> Vec<bool> {
        let mut v = vec![false; s.n_a];
        for &a in &self.alice_outcomes {
            if a < s.n_a {
                v[a] = true;
            }
        }
        v
    }
}

/// A deterministic strategy avoiding every zero and using only the allowed
/// Alice outcomes, if one exists.
pub fn realizing_strategy(t: &TableOfZeros, alice_allowed: &[bool]) -> Option<DeterministicStrategy> {
    let s = t.scenario;
    let zero = t.mask();
    let mut alice = Vec::with_capacity(s.n_x);
    let allowed = vec![vec![true; s.n_b]; s.n_y];
    search_realization(&s, &zero, alice_allowed, &mut alice, allowed)
}

fn search_realization(
    s: &Scenario,
    zero: &[bool],
    alice_allowed: &[bool],
    alice: &mut Vec<usize>,
    allowed: Vec<Vec<bool>>,
) -> Option<DeterministicStrategy> {
    let x = alice.len();
    if x == s.n_x {
        let bob = allowed.iter().map(|row| row.iter().position(|&v| v).unwrap()).collect();
        return Some(DeterministicStrategy::new(alice.clone(), bob));
    }
    for a in (0..s.n_a).filter(|&a| alice_allowed[a]) {
        let next: Vec<Vec<bool>> = (0..s.n_y)
            .map(|y| (0..s.n_b).map(|b| allowed[y][b] && !zero[s.index(x, y, a, b)]).collect())
            .collect();
        if next.iter().all(|row| row.iter().any(|&v| v)) {
            alice.push(a);
            if let Some(d) = search_realization(s, zero, alice_allowed, alice, next) {
                return Some(d);
            }
            alice.pop();
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realizability {
    pub realizable: bool,
    pub witness: Option<DeterministicStrategy>,
}

/// Is there a local behavior vanishing on every cell of `t`? Equivalently,
/// does some deterministic strategy avoid all of its zeros?
pub fn is_lhv_realizable(t: &TableOfZeros) -> Realizability {
    let witness = realizing_strategy(t, &vec![true; t.scenario.n_a]);
    Realizability {
        realizable: witness.is_some(),
        witness,
    }
}

/// Nonlocal, and removing any single zero makes it realizable.
pub fn is_critical(t: &TableOfZeros) -> bool {
    if is_lhv_realizable(t).realizable {
        return false;
    }
    t.cells().all(|c| is_lhv_realizable(&t.without(&c)).realizable)
}

/// Cells with probability at most `tol` (exactly zero for rational tables).
pub fn zeros_from_behavior(p: &Behavior, tol: f64) -> TableOfZeros {
    let s = p.scenario;
    let cells: Vec<Cell> = match p.exact_table() {
        Some(t) => (0..s.num_cells()).filter(|&i| num_traits::Zero::is_zero(&t[i])).map(|i| s.cell(i)).collect(),
        None => (0..s.num_cells()).filter(|&i| p.prob(i).abs() <= tol).map(|i| s.cell(i)).collect(),
    };
    TableOfZeros::new(s, cells).expect("cells come from the scenario")
}

/// Strategy hypergraph of a region as cell bitmasks, with cell incidence
/// stored as bitsets over strategy ids.
struct Hypergraph {
    edges: Vec<u128>,
    incidence: Vec<Vec<u64>>,
    words: usize,
}

impl Hypergraph {
    fn new(s: &Scenario, alice_allowed: &[bool]) -> Result<Self> {
        if s.num_cells() > 128 {
            return Err(Error::TooManyCells(s.num_cells()));
        }
        let outcomes: Vec<usize> = (0..s.n_a).filter(|&a| alice_allowed[a]).collect();
        let mut edges = Vec::new();
        let n_alice = outcomes.len().pow(s.n_x as u32);
        let n_bob = s.n_b.pow(s.n_y as u32);
        for i in 0..n_alice {
            let alice: Vec<usize> = crate::scenario::mixed_radix(i, outcomes.len(), s.n_x)
                .into_iter()
                .map(|k| outcomes[k])
                .collect();
            for j in 0..n_bob {
                let bob = crate::scenario::mixed_radix(j, s.n_b, s.n_y);
                let d = DeterministicStrategy::new(alice.clone(), bob);
                edges.push(d.cells(s).into_iter().fold(0u128, |acc, c| acc | 1 << c));
            }
        }
        let words = edges.len().div_ceil(64);
        let mut incidence = vec![vec![0u64; words]; s.num_cells()];
        for (k, e) in edges.iter().enumerate() {
            for (c, inc) in incidence.iter_mut().enumerate() {
                if e >> c & 1 == 1 {
                    inc[k / 64] |= 1 << (k % 64);
                }
            }
        }
        Ok(Self { edges, incidence, words })
    }

    fn vertices(&self) -> u128 {
        self.edges.iter().fold(0, |acc, e| acc | e)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn is_empty_bits(v: &[u64]) -> bool {
    v.iter().all(|&w| w == 0)
}

struct Mmcs<'a> {
    hg: &'a Hypergraph,
    seed: u64,
    prune: bool,
    out: Vec<u128>,
}

impl Mmcs<'_> {
    fn run(&mut self, s: u128, mut cand: u128, uncov: Vec<u64>, crit: Vec<(usize, Vec<u64>)>) {
        if is_empty_bits(&uncov) {
            self.out.push(s);
            return;
        }
        // uncovered edge with the fewest candidate cells; ties broken by a hash of (seed, s)
        let mut best = u32::MAX;
        let mut ties: Vec<usize> = Vec::new();
        for (w, &word) in uncov.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let k = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let n = (self.hg.edges[k] & cand).count_ones();
                if n < best {
                    best = n;
                    ties.clear();
                }
                if n == best {
                    ties.push(k);
                }
            }
        }
        if best == 0 {
            return;
        }
        let h = splitmix(self.seed ^ (s as u64) ^ ((s >> 64) as u64).rotate_left(17));
        let edge = self.hg.edges[ties[(h % ties.len() as u64) as usize]];
        let c = edge & cand;
        cand &= !c;
        let mut bits = c;
        while bits != 0 {
            let e = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let inc = &self.hg.incidence[e];
            let mut next_crit = Vec::with_capacity(crit.len() + 1);
            let mut ok = true;
            for (f, cf) in &crit {
                let reduced: Vec<u64> = cf.iter().zip(inc).map(|(a, b)| a & !b).collect();
                if self.prune && is_empty_bits(&reduced) {
                    ok = false;
                    break;
                }
                next_crit.push((*f, reduced));
            }
            if ok {
                let ce: Vec<u64> = uncov.iter().zip(inc).map(|(a, b)| a & b).collect();
                let next_uncov: Vec<u64> = uncov.iter().zip(inc).map(|(a, b)| a & !b).collect();
                next_crit.push((e, ce));
                self.run(s | 1 << e, cand, next_uncov, next_crit);
            }
            cand |= 1 << e;
        }
    }
}

/// Options for [`generate_zpb`].
#[derive(Debug, Clone, Copy)]
pub struct ZpbOptions {
    pub seed: u64,
    /// Cut branches whose tables can no longer be minimal.
    pub prune: bool,
}

impl Default for ZpbOptions {
    fn default() -> Self {
        Self { seed: 0, prune: true }
    }
}

/// Nonlocal completions of `pretable` inside `region`.
///
/// Branches by repeatedly picking an uncovered strategy and adding one of its
/// cells. With pruning the output is exactly the set of minimal completions;
/// a pretable that is already nonlocal in the region is returned unchanged.
pub fn generate_zpb(pretable: &TableOfZeros, region: &Region, opts: ZpbOptions) -> Result<Vec<TableOfZeros>> {
    let s = pretable.scenario;
    let allowed = region.allowed(&s);
    let hg = Hypergraph::new(&s, &allowed)?;
    let p = pretable.bits()?;
    let mut uncov = vec![0u64; hg.words];
    for (k, e) in hg.edges.iter().enumerate() {
        if e & p == 0 {
            uncov[k / 64] |= 1 << (k % 64);
        }
    }
    if is_empty_bits(&uncov) {
        return Ok(vec![pretable.clone()]);
    }
    let mut crit = Vec::new();
    for c in (0..s.num_cells()).filter(|&c| p >> c & 1 == 1) {
        let mut cf = vec![0u64; hg.words];
        for (k, e) in hg.edges.iter().enumerate() {
            if e & p == 1 << c {
                cf[k / 64] |= 1 << (k % 64);
            }
        }
        if opts.prune && is_empty_bits(&cf) {
            return Ok(Vec::new());
        }
        crit.push((c, cf));
    }
    let mut engine = Mmcs { hg: &hg, seed: opts.seed, prune: opts.prune, out: Vec::new() };
    engine.run(p, hg.vertices() & !p, uncov, crit);
    let mut out: Vec<TableOfZeros> = engine.out.into_iter().map(|b| TableOfZeros::from_bits(s, b)).collect();
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CntzOptions {
    pub seed: u64,
    /// Reduce under output relabelings before the full group.
    pub use_subgroup: bool,
    /// Run on the party-swapped scenario and map back.
    pub swap_parties: bool,
    pub prune: bool,
}

impl Default for CntzOptions {
    fn default() -> Self {
        Self { seed: 0, use_subgroup: true, swap_parties: false, prune: true }
    }
}

#[derive(Debug, Clone)]
pub struct CntzEnumeration {
    /// Orbit representatives of the critical tables, canonical and sorted.
    pub classes: Vec<TableOfZeros>,
    /// Classes left after the subset-minimality reduction.
    pub subset_minimal_count: usize,
    /// Classes that also pass the criticality check.
    pub critical_count: usize,
    pub blue_representatives: usize,
    pub red_tables: usize,
    pub pretables: usize,
}

/// All CNTZs of a scenario up to relabeling.
///
/// Alice's outcomes are split into a lower (blue) and upper (red) half. Every
/// CNTZ restricts to a nonlocal table in each half, so it extends some union
/// of a blue and a red critical table. Blue tables are reduced under the
/// split-preserving subgroup; red tables come from shifting blue orbits when
/// the halves have equal size and from a direct enumeration otherwise.
pub fn enumerate_cntz(s: &Scenario, opts: &CntzOptions) -> Result<CntzEnumeration> {
    if opts.swap_parties {
        let inner = enumerate_cntz(&s.swapped(), &CntzOptions { swap_parties: false, ..opts.clone() })?;
        let group = bell_group(s);
        let mapped: Vec<TableOfZeros> = inner.classes.iter().map(TableOfZeros::swapped).collect();
        let classes = group_reduce(mapped, &group, None)?;
        return Ok(CntzEnumeration { classes, ..inner });
    }
    if s.n_a < 2 {
        return Err(Error::RegionSplit(format!("Alice needs at least two outcomes, has {}", s.n_a)));
    }
    if s.num_cells() > 128 {
        return Err(Error::TooManyCells(s.num_cells()));
    }
    let half = s.n_a.div_ceil(2);
    let blue: Vec<usize> = (0..half).collect();
    let red: Vec<usize> = (half..s.n_a).collect();
    let zpb = ZpbOptions { seed: opts.seed, prune: opts.prune };
    let full = bell_group(s);
    let split = BellGroup::new(*s, PartySpec::split(true, vec![blue.clone(), red.clone()]), PartySpec::full(s.n_b));
    let subgroup = BellGroup::outputs_only(s);
    let sub = opts.use_subgroup.then_some(&subgroup);

    let empty = TableOfZeros::empty(*s);
    let blue_all = generate_zpb(&empty, &Region { alice_outcomes: blue.clone() }, zpb)?;
    let blue_reps = group_reduce(blue_all, &split, None)?;
    let red_tables: Vec<TableOfZeros> = if blue.len() == red.len() {
        let mut set = BTreeSet::new();
        for rep in &blue_reps {
            for t in split.orbit(rep)? {
                let shifted = t.cells().map(|c| Cell { a: c.a + half, ..c });
                set.insert(TableOfZeros::new(*s, shifted.collect::<Vec<_>>())?);
            }
        }
        set.into_iter().collect()
    } else {
        generate_zpb(&empty, &Region { alice_outcomes: red.clone() }, zpb)?
    };
    let mut pre = Vec::with_capacity(blue_reps.len() * red_tables.len());
    for b in &blue_reps {
        for r in &red_tables {
            pre.push(b.union(r));
        }
    }
    let pretables = group_reduce(pre, &full, sub)?;

    let region = Region::full(s);
    let found: BTreeMap<(usize, Vec<u64>), TableOfZeros> = pretables
        .par_iter()
        .map(|p| -> Result<Vec<((usize, Vec<u64>), TableOfZeros)>> {
            let mut local = BTreeMap::new();
            for t in generate_zpb(p, &region, zpb)? {
                let key = (t.len(), full.canonical_key(&t)?);
                local.entry(key).or_insert(t);
            }
            Ok(local.into_iter().collect())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let minimal = group_reduce(found.into_values().collect(), &full, sub)?;
    let subset_minimal_count = minimal.len();
    let classes: Vec<TableOfZeros> = minimal.into_par_iter().filter(is_critical).collect();
    Ok(CntzEnumeration {
        critical_count: classes.len(),
        classes,
        subset_minimal_count,
        blue_representatives: blue_reps.len(),
        red_tables: red_tables.len(),
        pretables: pretables.len(),
    })
}

/// A random critical table: add cells in random order until every
/// deterministic strategy is blocked, then drop cells in random order while
/// the table stays nonlocal.
pub fn sample_cntz(s: &Scenario, seed: u64) -> Result<TableOfZeros> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..s.num_cells()).collect();
    order.shuffle(&mut rng);
    let mut t = TableOfZeros::empty(*s);
    for &i in &order {
        if !is_lhv_realizable(&t).realizable {
            break;
        }
        t.cells.insert(s.cell(i));
    }
    if is_lhv_realizable(&t).realizable {
        return Err(Error::RegionSplit("scenario has no nonlocal table of zeros".into()));
    }
    order.shuffle(&mut rng);
    for &i in &order {
        let c = s.cell(i);
        if t.contains(&c) && !is_lhv_realizable(&t.without(&c)).realizable {
            t.cells.remove(&c);
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chsh() -> Scenario {
        Scenario::new(2, 2, 2, 2).unwrap()
    }

    /// Every critical table of the scenario by checking all subsets of cells.
    fn brute_force_critical(s: &Scenario) -> Vec<TableOfZeros> {
        let n = s.num_cells();
        let strategies: Vec<u32> = s
            .deterministic_strategies(1 << 20)
            .unwrap()
            .iter()
            .map(|d| d.cells(s).into_iter().fold(0u32, |acc, c| acc | 1 << c))
            .collect();
        let nonlocal = |m: u32| strategies.iter().all(|&e| e & m != 0);
        (0u32..1 << n)
            .filter(|&m| nonlocal(m) && (0..n).filter(|&c| m >> c & 1 == 1).all(|c| !nonlocal(m & !(1 << c))))
            .map(|m| TableOfZeros::new(*s, (0..n).filter(|&c| m >> c & 1 == 1).map(|c| s.cell(c)).collect::<Vec<_>>()).unwrap())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    #[test]
    fn sampled_tables_are_critical() {
        let s = Scenario::new(3, 3, 3, 2).unwrap();
        for seed in 0..5 {
            assert!(is_critical(&sample_cntz(&s, seed).unwrap()));
        }
    }

    #[test]
    fn realizability_witness_avoids_zeros() {
        let s = chsh();
        let t = TableOfZeros::new(s, vec![Cell::new(0, 0, 0, 0), Cell::new(1, 1, 1, 1)]).unwrap();
        let r = is_lhv_realizable(&t);
        let d = r.witness.unwrap();
        for c in d.cells(&s) {
            assert!(!t.contains(&s.cell(c)));
        }
    }

    #[test]
    fn zpb_from_empty_gives_all_minimal_transversals() {
        let s = chsh();
        let expected = brute_force_critical(&s);
        assert_eq!(expected.len(), 132);
        let got = generate_zpb(&TableOfZeros::empty(s), &Region::full(&s), ZpbOptions::default()).unwrap();
        assert_eq!(got, expected);
        for seed in [1, 7, 99] {
            let other = generate_zpb(&TableOfZeros::empty(s), &Region::full(&s), ZpbOptions { seed, prune: true }).unwrap();
            assert_eq!(other, expected);
        }
    }

    #[test]
    fn zpb_without_pruning_covers_minimal_ones() {
        let s = chsh();
        let expected = brute_force_critical(&s);
        let raw = generate_zpb(&TableOfZeros::empty(s), &Region::full(&s), ZpbOptions { seed: 3, prune: false }).unwrap();
        assert!(raw.len() >= expected.len());
        for t in &expected {
            assert!(raw.contains(t));
        }
        for t in &raw {
            assert!(!is_lhv_realizable(t).realizable);
        }
    }

    #[test]
    fn nonlocal_pretable_returned_as_is() {
        let s = chsh();
        let t = brute_force_critical(&s).pop().unwrap();
        assert_eq!(generate_zpb(&t, &Region::full(&s), ZpbOptions::default()).unwrap(), vec![t]);
    }

    #[test]
    fn too_many_cells_rejected() {
        let s = Scenario::new(3, 4, 3, 4).unwrap();
        assert!(matches!(
            generate_zpb(&TableOfZeros::empty(s), &Region::full(&s), ZpbOptions::default()),
            Err(Error::TooManyCells(144))
        ));
        let one = Scenario::new(2, 1, 2, 2).unwrap();
        assert!(matches!(enumerate_cntz(&one, &CntzOptions::default()), Err(Error::RegionSplit(_))));
    }

    #[test]
    fn enumeration_matches_brute_force_classes() {
        let s = chsh();
        let group = bell_group(&s);
        let oracle = group_reduce(brute_force_critical(&s), &group, None).unwrap();
        for opts in [
            CntzOptions::default(),
            CntzOptions { use_subgroup: false, ..Default::default() },
            CntzOptions { swap_parties: true, seed: 5, ..Default::default() },
            CntzOptions { prune: false, ..Default::default() },
        ] {
            let e = enumerate_cntz(&s, &opts).unwrap();
            assert_eq!(e.classes, oracle, "{opts:?}");
            assert_eq!(e.critical_count, 8);
        }
        let sizes: Vec<usize> = oracle.iter().map(TableOfZeros::len).collect();
        assert_eq!(sizes, vec![4, 4, 4, 5, 6, 6, 6, 8]);
    }
}
