//! Relabeling symmetries of a Bell scenario.
//!
//! Each party's group is a wreath product: settings may be permuted, and the
//! outcomes of every setting are permuted independently inside fixed blocks.
//! The full group uses one block per party; subgroups restrict the blocks or
//! freeze the settings. Parties are never exchanged.

use std::collections::{BTreeMap, HashSet, VecDeque};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scenario::{Cell, Scenario};
use crate::zeros::TableOfZeros;

/// Permutation of one party's labels. `outcomes[s]` acts on the outcomes of
/// source setting `s`, which is then sent to `settings[s]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartyPerm {
    pub settings: Vec<usize>,
    pub outcomes: Vec<Vec<usize>>,
}

impl PartyPerm {
    pub fn identity(n_s: usize, n_o: usize) -> Self {
        Self {
            settings: (0..n_s).collect(),
            outcomes: vec![(0..n_o).collect(); n_s],
        }
    }

    pub fn apply(&self, s: usize, o: usize) -> (usize, usize) {
        (self.settings[s], self.outcomes[s][o])
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &PartyPerm) -> PartyPerm {
        let settings = other.settings.iter().map(|&s| self.settings[s]).collect();
        let outcomes = other
            .outcomes
            .iter()
            .enumerate()
            .map(|(s, perm)| perm.iter().map(|&o| self.outcomes[other.settings[s]][o]).collect())
            .collect();
        PartyPerm { settings, outcomes }
    }

    pub fn inverse(&self) -> PartyPerm {
        let n_s = self.settings.len();
        let n_o = self.outcomes.first().map_or(0, Vec::len);
        let mut settings = vec![0; n_s];
        let mut outcomes = vec![vec![0; n_o]; n_s];
        for s in 0..n_s {
            let t = self.settings[s];
            settings[t] = s;
            for o in 0..n_o {
                outcomes[t][self.outcomes[s][o]] = o;
            }
        }
        PartyPerm { settings, outcomes }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BellGroupElement {
    pub alice: PartyPerm,
    pub bob: PartyPerm,
}

impl BellGroupElement {
    pub fn identity(s: &Scenario) -> Self {
        Self {
            alice: PartyPerm::identity(s.n_x, s.n_a),
            bob: PartyPerm::identity(s.n_y, s.n_b),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            alice: self.alice.compose(&other.alice),
            bob: self.bob.compose(&other.bob),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            alice: self.alice.inverse(),
            bob: self.bob.inverse(),
        }
    }

    pub fn act_cell(&self, c: Cell) -> Cell {
        let (x, a) = self.alice.apply(c.x, c.a);
        let (y, b) = self.bob.apply(c.y, c.b);
        Cell { x, a, y, b }
    }
}

/// Which relabelings one party admits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartySpec {
    pub permute_settings: bool,
    /// Partition of the outcomes; permutations stay inside each block.
    pub blocks: Vec<Vec<usize>>,
}

impl PartySpec {
    pub fn full(n_o: usize) -> Self {
        Self {
            permute_settings: true,
            blocks: vec![(0..n_o).collect()],
        }
    }

    pub fn outcomes_only(n_o: usize) -> Self {
        Self {
            permute_settings: false,
            blocks: vec![(0..n_o).collect()],
        }
    }

    pub fn split(permute_settings: bool, blocks: Vec<Vec<usize>>) -> Self {
        Self { permute_settings, blocks }
    }

    fn is_full(&self, n_o: usize) -> bool {
        self.permute_settings && self.blocks.len() == 1 && self.blocks[0].len() == n_o
    }

    pub fn order(&self, n_s: usize) -> BigUint {
        let fact = |k: usize| (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i));
        let per_setting = self.blocks.iter().fold(BigUint::one(), |acc, b| acc * fact(b.len()));
        let mut total = num_traits::pow(per_setting, n_s);
        if self.permute_settings {
            total *= fact(n_s);
        }
        total
    }

    pub fn elements(&self, n_s: usize, n_o: usize) -> Vec<PartyPerm> {
        let setting_perms: Vec<Vec<usize>> = if self.permute_settings {
            permutations(n_s)
        } else {
            vec![(0..n_s).collect()]
        };
        let mut outcome_choices: Vec<Vec<usize>> = vec![vec![0; n_o]];
        for block in &self.blocks {
            let mut next = Vec::new();
            for base in &outcome_choices {
                for p in permutations(block.len()) {
                    let mut perm = base.clone();
                    for (i, &o) in block.iter().enumerate() {
                        perm[o] = block[p[i]];
                    }
                    next.push(perm);
                }
            }
            outcome_choices = next;
        }
        let mut tuples: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
        for _ in 0..n_s {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    outcome_choices.iter().map(move |c| {
                        let mut t = t.clone();
                        t.push(c.clone());
                        t
                    })
                })
                .collect();
        }
        let mut out = Vec::with_capacity(setting_perms.len() * tuples.len());
        for sp in &setting_perms {
            for t in &tuples {
                out.push(PartyPerm {
                    settings: sp.clone(),
                    outcomes: t.clone(),
                });
            }
        }
        out
    }

    pub fn generators(&self, n_s: usize, n_o: usize) -> Vec<PartyPerm> {
        let id = PartyPerm::identity(n_s, n_o);
        let cycle = |n: usize, fixed: usize| -> Vec<usize> {
            // cycles fixed..n-1, fixes everything below `fixed`
            (0..n)
                .map(|i| if i < fixed { i } else if i + 1 < n { i + 1 } else { fixed })
                .collect()
        };
        let swap01 = |n: usize| -> Vec<usize> {
            let mut p: Vec<usize> = (0..n).collect();
            if n >= 2 {
                p.swap(0, 1);
            }
            p
        };
        if self.is_full(n_o) {
            if n_o == 1 || n_s == 1 {
                let mut g = id.clone();
                let mut h = id.clone();
                if n_o == 1 {
                    g.settings = cycle(n_s, 0);
                    h.settings = swap01(n_s);
                } else {
                    g.outcomes[0] = cycle(n_o, 0);
                    h.outcomes[0] = swap01(n_o);
                }
                return dedup_nontrivial(vec![g, h], &id);
            }
            let mut g = id.clone();
            g.settings = cycle(n_s, 0);
            g.outcomes[1] = swap01(n_o);
            let mut h = id.clone();
            h.settings = cycle(n_s, 1);
            h.outcomes[0] = cycle(n_o, 0);
            h.outcomes[1] = cycle(n_o, 1);
            return dedup_nontrivial(vec![g, h], &id);
        }
        let mut gens = Vec::new();
        if self.permute_settings && n_s >= 2 {
            let mut g = id.clone();
            g.settings = cycle(n_s, 0);
            gens.push(g);
            let mut g = id.clone();
            g.settings = swap01(n_s);
            gens.push(g);
        }
        let where_: Vec<usize> = if self.permute_settings { vec![0] } else { (0..n_s).collect() };
        for block in self.blocks.iter().filter(|b| b.len() >= 2) {
            for &s in &where_ {
                let mut c = id.clone();
                let mut t = id.clone();
                for (i, &o) in block.iter().enumerate() {
                    c.outcomes[s][o] = block[(i + 1) % block.len()];
                }
                t.outcomes[s][block[0]] = block[1];
                t.outcomes[s][block[1]] = block[0];
                gens.push(c);
                gens.push(t);
            }
        }
        dedup_nontrivial(gens, &id)
    }
}

fn dedup_nontrivial(gens: Vec<PartyPerm>, id: &PartyPerm) -> Vec<PartyPerm> {
    let mut out: Vec<PartyPerm> = Vec::new();
    for g in gens {
        if &g != id && !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut cur, &mut out);
    out.sort();
    out
}

fn heap_permute(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, cur, out);
        if k.is_multiple_of(2) {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

/// Limit on the number of elements enumerated for the smaller party when
/// computing canonical forms.
pub const BRUTE_FORCE_LIMIT: usize = 2_000_000;

/// A relabeling group together with the data needed for canonical forms.
#[derive(Debug, Clone)]
pub struct BellGroup {
    pub scenario: Scenario,
    pub alice: PartySpec,
    pub bob: PartySpec,
    generators: Vec<BellGroupElement>,
    canon: Option<Canonizer>,
}

#[derive(Debug, Clone)]
struct Canonizer {
    /// Rows are the sorting party's `(setting, outcome)` pairs when `true` for Alice.
    alice_rows: bool,
    n_s: usize,
    n_o: usize,
    spec: PartySpec,
    /// Bit permutations induced by every element of the other party's group.
    brute: Vec<Vec<u8>>,
}

/// The full relabeling group of a scenario.
pub fn bell_group(s: &Scenario) -> BellGroup {
    BellGroup::new(*s, PartySpec::full(s.n_a), PartySpec::full(s.n_b))
}

impl BellGroup {
    pub fn new(scenario: Scenario, alice: PartySpec, bob: PartySpec) -> Self {
        let s = scenario;
        let id_a = PartyPerm::identity(s.n_x, s.n_a);
        let id_b = PartyPerm::identity(s.n_y, s.n_b);
        let mut generators = Vec::new();
        for g in alice.generators(s.n_x, s.n_a) {
            generators.push(BellGroupElement { alice: g, bob: id_b.clone() });
        }
        for g in bob.generators(s.n_y, s.n_b) {
            generators.push(BellGroupElement { alice: id_a.clone(), bob: g });
        }
        let canon = Canonizer::build(&s, &alice, &bob);
        Self {
            scenario,
            alice,
            bob,
            generators,
            canon,
        }
    }

    /// Output relabelings only: no setting permutations.
    pub fn outputs_only(s: &Scenario) -> Self {
        Self::new(*s, PartySpec::outcomes_only(s.n_a), PartySpec::outcomes_only(s.n_b))
    }

    pub fn order(&self) -> BigUint {
        self.alice.order(self.scenario.n_x) * self.bob.order(self.scenario.n_y)
    }

    pub fn generators(&self) -> &[BellGroupElement] {
        &self.generators
    }

    pub fn elements(&self, cap: u128) -> Result<Vec<BellGroupElement>> {
        let order = self.order().to_u128().unwrap_or(u128::MAX);
        if order > cap {
            return Err(Error::EnumerationTooLarge { count: order, cap });
        }
        let s = self.scenario;
        let a = self.alice.elements(s.n_x, s.n_a);
        let b = self.bob.elements(s.n_y, s.n_b);
        Ok(a.iter()
            .flat_map(|ga| b.iter().map(move |gb| BellGroupElement { alice: ga.clone(), bob: gb.clone() }))
            .collect())
    }

    /// Breadth-first closure of the generators, up to `cap` elements.
    pub fn closure_order(&self, cap: usize) -> Option<usize> {
        let id = BellGroupElement::identity(&self.scenario);
        let mut seen = HashSet::new();
        seen.insert(id.clone());
        let mut queue = VecDeque::from([id]);
        while let Some(g) = queue.pop_front() {
            for h in &self.generators {
                let k = h.compose(&g);
                if seen.insert(k.clone()) {
                    if seen.len() > cap {
                        return None;
                    }
                    queue.push_back(k);
                }
            }
        }
        Some(seen.len())
    }

    pub fn orbit(&self, t: &TableOfZeros) -> Result<Vec<TableOfZeros>> {
        orbit(t, self)
    }

    /// Lexicographically least image of `t` in the row-word order; equal for
    /// two tables exactly when they lie in one orbit.
    pub fn canonical_key(&self, t: &TableOfZeros) -> Result<Vec<u64>> {
        let c = self.canon.as_ref().ok_or_else(|| {
            Error::EnumerationTooLarge {
                count: self.order().to_u128().unwrap_or(u128::MAX),
                cap: BRUTE_FORCE_LIMIT as u128,
            }
        })?;
        self.scenario.check_same(&t.scenario)?;
        Ok(c.key(&c.rows(t)))
    }

    pub fn canonical_form(&self, t: &TableOfZeros) -> Result<TableOfZeros> {
        let key = self.canonical_key(t)?;
        Ok(self.canon.as_ref().unwrap().table(&self.scenario, &key))
    }

    /// Whether some image of `small` under the group is contained in `big`.
    pub fn contains_image(&self, small: &TableOfZeros, big: &TableOfZeros) -> Result<bool> {
        let c = self.canon.as_ref().ok_or(Error::ExactRequired("group too large for containment tests"))?;
        if small.len() > big.len() {
            return Ok(false);
        }
        Ok(c.contains_image(&c.rows(small), &c.rows(big)))
    }

    pub fn stabilizer_order(&self, t: &TableOfZeros) -> Result<usize> {
        let elems = self.elements(BRUTE_FORCE_LIMIT as u128 * 64)?;
        Ok(elems.par_iter().filter(|g| &act(g, t) == t).count())
    }
}

impl Canonizer {
    fn build(s: &Scenario, alice: &PartySpec, bob: &PartySpec) -> Option<Self> {
        let a_order = alice.order(s.n_x).to_usize().unwrap_or(usize::MAX);
        let b_order = bob.order(s.n_y).to_usize().unwrap_or(usize::MAX);
        // brute-force the smaller group; its party labels the bits of each row word
        let alice_rows = b_order <= a_order;
        let (brute_spec, n_bs, n_bo, sort_spec, n_s, n_o) = if alice_rows {
            (bob, s.n_y, s.n_b, alice, s.n_x, s.n_a)
        } else {
            (alice, s.n_x, s.n_a, bob, s.n_y, s.n_b)
        };
        if n_bs * n_bo > 64 || a_order.min(b_order) > BRUTE_FORCE_LIMIT {
            return None;
        }
        let brute = brute_spec
            .elements(n_bs, n_bo)
            .into_iter()
            .map(|g| {
                (0..n_bs * n_bo)
                    .map(|bit| {
                        let (t, o) = g.apply(bit / n_bo, bit % n_bo);
                        (t * n_bo + o) as u8
                    })
                    .collect()
            })
            .collect();
        Some(Self {
            alice_rows,
            n_s,
            n_o,
            spec: sort_spec.clone(),
            brute,
        })
    }

    fn rows(&self, t: &TableOfZeros) -> Vec<u64> {
        let mut rows = vec![0u64; self.n_s * self.n_o];
        let s = t.scenario;
        for c in t.cells() {
            let (r, bit) = if self.alice_rows {
                (c.x * s.n_a + c.a, c.y * s.n_b + c.b)
            } else {
                (c.y * s.n_b + c.b, c.x * s.n_a + c.a)
            };
            rows[r] |= 1 << bit;
        }
        rows
    }

    fn table(&self, s: &Scenario, rows: &[u64]) -> TableOfZeros {
        let mut cells = Vec::new();
        let (other_o, this_o) = if self.alice_rows { (s.n_b, s.n_a) } else { (s.n_a, s.n_b) };
        for (r, &w) in rows.iter().enumerate() {
            let (st, o) = (r / this_o, r % this_o);
            let mut bits = w;
            while bits != 0 {
                let bit = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let (ot, oo) = (bit / other_o, bit % other_o);
                cells.push(if self.alice_rows {
                    Cell::new(st, o, ot, oo)
                } else {
                    Cell::new(ot, oo, st, o)
                });
            }
        }
        TableOfZeros::new(*s, cells).expect("cells stay in range")
    }

    fn permute_word(w: u64, perm: &[u8]) -> u64 {
        let mut out = 0u64;
        let mut bits = w;
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            out |= 1 << perm[b];
        }
        out
    }

    fn normalize(&self, rows: &mut [u64]) {
        for s in 0..self.n_s {
            for block in &self.spec.blocks {
                let mut vals: Vec<u64> = block.iter().map(|&o| rows[s * self.n_o + o]).collect();
                vals.sort_unstable();
                let mut pos = block.clone();
                pos.sort_unstable();
                for (p, v) in pos.into_iter().zip(vals) {
                    rows[s * self.n_o + p] = v;
                }
            }
        }
        if self.spec.permute_settings {
            let mut chunks: Vec<Vec<u64>> = rows.chunks(self.n_o).map(<[u64]>::to_vec).collect();
            chunks.sort_unstable();
            for (dst, src) in rows.chunks_mut(self.n_o).zip(chunks) {
                dst.copy_from_slice(&src);
            }
        }
    }

    fn key(&self, rows: &[u64]) -> Vec<u64> {
        let mut best: Option<Vec<u64>> = None;
        let mut cur = vec![0u64; rows.len()];
        for perm in &self.brute {
            for (d, &w) in cur.iter_mut().zip(rows) {
                *d = Self::permute_word(w, perm);
            }
            self.normalize(&mut cur);
            if best.as_ref().is_none_or(|b| cur < *b) {
                best = Some(cur.clone());
            }
        }
        best.unwrap_or_default()
    }

    fn contains_image(&self, small: &[u64], big: &[u64]) -> bool {
        let n_o = self.n_o;
        let mut cur = vec![0u64; small.len()];
        for perm in &self.brute {
            for (d, &w) in cur.iter_mut().zip(small) {
                *d = Self::permute_word(w, perm);
            }
            let fits = |s: usize, t: usize| -> bool {
                self.spec.blocks.iter().all(|block| {
                    let adj: Vec<Vec<usize>> = block
                        .iter()
                        .map(|&o| {
                            (0..block.len())
                                .filter(|&k| {
                                    let w = cur[s * n_o + o];
                                    w & !big[t * n_o + block[k]] == 0
                                })
                                .collect()
                        })
                        .collect();
                    perfect_matching(&adj, block.len())
                })
            };
            let ok = if self.spec.permute_settings {
                let adj: Vec<Vec<usize>> = (0..self.n_s)
                    .map(|s| (0..self.n_s).filter(|&t| fits(s, t)).collect())
                    .collect();
                perfect_matching(&adj, self.n_s)
            } else {
                (0..self.n_s).all(|s| fits(s, s))
            };
            if ok {
                return true;
            }
        }
        false
    }
}

/// Kuhn's augmenting-path test for a perfect matching of the left side.
fn perfect_matching(adj: &[Vec<usize>], n_right: usize) -> bool {
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none_or(|w| augment(w, adj, seen, owner)) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; n_right];
    (0..adj.len()).all(|u| {
        let mut seen = vec![false; n_right];
        augment(u, adj, &mut seen, &mut owner)
    })
}

pub fn act(g: &BellGroupElement, t: &TableOfZeros) -> TableOfZeros {
    TableOfZeros::new(t.scenario, t.cells().map(|c| g.act_cell(c)).collect::<Vec<_>>())
        .expect("group elements preserve the scenario")
}

/// Orbit by breadth-first search over the generators, sorted by cell list.
pub fn orbit(t: &TableOfZeros, group: &BellGroup) -> Result<Vec<TableOfZeros>> {
    group.scenario.check_same(&t.scenario)?;
    let mut seen = HashSet::new();
    seen.insert(t.clone());
    let mut queue = VecDeque::from([t.clone()]);
    while let Some(u) = queue.pop_front() {
        for g in group.generators() {
            let v = act(g, &u);
            if seen.insert(v.clone()) {
                queue.push_back(v);
            }
        }
    }
    let mut out: Vec<TableOfZeros> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

/// Orbit representatives of `tables` with every table that contains an image
/// of a smaller representative removed. With a subgroup, a first pass reduces
/// under it before the full group is applied. Output: canonical forms sorted
/// by size, then by canonical key.
pub fn group_reduce(
    tables: Vec<TableOfZeros>,
    group: &BellGroup,
    subgroup: Option<&BellGroup>,
) -> Result<Vec<TableOfZeros>> {
    let tables = match subgroup {
        Some(h) => reduce_once(tables, h)?,
        None => tables,
    };
    reduce_once(tables, group)
}

fn reduce_once(tables: Vec<TableOfZeros>, g: &BellGroup) -> Result<Vec<TableOfZeros>> {
    let keyed: Vec<(usize, Vec<u64>)> = tables
        .par_iter()
        .map(|t| Ok((t.len(), g.canonical_key(t)?)))
        .collect::<Result<_>>()?;
    let unique: BTreeMap<(usize, Vec<u64>), ()> = keyed.into_iter().map(|k| (k, ())).collect();
    let c = g.canon.as_ref().expect("canonical_key succeeded");
    let mut by_size: BTreeMap<usize, Vec<Vec<u64>>> = BTreeMap::new();
    for (size, key) in unique.into_keys() {
        by_size.entry(size).or_default().push(key);
    }
    let mut kept: Vec<Vec<u64>> = Vec::new();
    for (_, level) in by_size {
        let survivors: Vec<Vec<u64>> = level
            .into_par_iter()
            .filter(|cand| !kept.iter().any(|k| c.contains_image(k, cand)))
            .collect();
        kept.extend(survivors);
    }
    Ok(kept.iter().map(|k| c.table(&g.scenario, k)).collect())
}
