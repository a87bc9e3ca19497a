//! Pure-state quantum strategies: Pauli observables, joint projective
//! measurements of commuting observables, the induced behaviors, and a
//! seesaw lower bound on quantum values of Bell expressions.

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::games::{magic_square_tuple, pentagram_tuple, MS_ALICE_LABELS, MS_BOB_LABELS, PENTAGRAM_LINES};
use crate::numerics::{approximate_rational, dyadic_rational, eig_hermitian, kron, ComplexMatrix, Rational};
use crate::polytope::BellExpression;
use crate::scenario::{validate_behavior, Behavior, Cell, Scenario};

const UNIT_TOL: f64 = 1e-12;
const OPERATOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::DimensionMismatch(format!("state has squared norm {norm}")));
        }
        Ok(Self { amplitudes })
    }

    /// `sum_i |ii> / sqrt(d)`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut amplitudes = vec![Complex64::zero(); d * d];
        let c = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        for i in 0..d {
            amplitudes[i * d + i] = c;
        }
        Self { amplitudes }
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    /// Coefficients as a `d_a x d_b` matrix, `psi = sum M_ij |i>|j>`.
    fn as_matrix(&self, d_a: usize, d_b: usize) -> ComplexMatrix {
        ComplexMatrix::from_vec(d_a, d_b, self.amplitudes.clone()).expect("state dimension checked")
    }
}

pub fn pauli(symbol: char) -> Result<ComplexMatrix> {
    let (o, i) = (Complex64::one(), Complex64::i());
    let z = Complex64::zero();
    let data = match symbol {
        'I' => vec![o, z, z, o],
        'X' => vec![z, o, o, z],
        'Y' => vec![z, -i, i, z],
        'Z' => vec![o, z, z, -o],
        other => return Err(Error::Parse(format!("unknown Pauli symbol `{other}`"))),
    };
    ComplexMatrix::from_vec(2, 2, data)
}

/// Tensor product of Pauli matrices, e.g. `"XZZ"`, with an optional leading
/// minus sign.
pub fn pauli_string(word: &str) -> Result<ComplexMatrix> {
    let (sign, body) = match word.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, word),
    };
    let mut m = ComplexMatrix::identity(1);
    for c in body.chars() {
        m = kron(&m, &pauli(c)?);
    }
    Ok(m.scale(&Complex64::new(sign, 0.0)))
}

fn is_zero_matrix(m: &ComplexMatrix, tol: f64) -> bool {
    m.data().iter().all(|v| v.norm() <= tol)
}

fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    Ok(a.matmul(b)?.sub(&b.matmul(a)?)?.frobenius_norm())
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointMeasurement {
    /// Sign tuple of each outcome, one sign per observable.
    pub labels: Vec<Vec<i8>>,
    pub projectors: Vec<ComplexMatrix>,
}

impl JointMeasurement {
    pub fn dimension(&self) -> usize {
        self.projectors.first().map_or(0, |p| p.rows())
    }

    pub fn projector_for(&self, label: &[i8]) -> Option<&ComplexMatrix> {
        self.labels.iter().position(|l| l == label).map(|i| &self.projectors[i])
    }

    /// Largest deviation from completeness, idempotence and orthogonality.
    pub fn defect(&self) -> Result<f64> {
        let d = self.dimension();
        let mut sum = ComplexMatrix::zeros(d, d);
        let mut worst = 0.0f64;
        for (i, p) in self.projectors.iter().enumerate() {
            sum = sum.add(p)?;
            worst = worst.max(p.matmul(p)?.max_abs_diff(p));
            for q in &self.projectors[..i] {
                worst = worst.max(p.matmul(q)?.frobenius_norm());
            }
        }
        Ok(worst.max(sum.max_abs_diff(&ComplexMatrix::identity(d))))
    }
}

/// Joint measurement of pairwise commuting +-1-valued observables. Outcomes
/// are the attainable sign tuples in lexicographic order, + before -.
pub fn joint_projectors(obs: &[ComplexMatrix]) -> Result<JointMeasurement> {
    let d = obs.first().map_or(0, |o| o.rows());
    let id = ComplexMatrix::identity(d);
    for (i, o) in obs.iter().enumerate() {
        if o.rows() != d || o.cols() != d {
            return Err(Error::DimensionMismatch(format!("observable {i} is not {d}x{d}")));
        }
        let herm = o.max_abs_diff(&o.adjoint());
        if herm > OPERATOR_TOL {
            return Err(Error::NotHermitian(herm));
        }
        if o.matmul(o)?.max_abs_diff(&id) > OPERATOR_TOL {
            return Err(Error::NotInvolution(i));
        }
        for (j, p) in obs[..i].iter().enumerate() {
            if commutator_norm(o, p)? > OPERATOR_TOL {
                return Err(Error::NonCommuting(j, i));
            }
        }
    }
    let half = Complex64::new(0.5, 0.0);
    let mut labels = Vec::new();
    let mut projectors = Vec::new();
    for k in 0..1usize << obs.len() {
        let signs: Vec<i8> = (0..obs.len()).map(|i| if k >> (obs.len() - 1 - i) & 1 == 0 { 1 } else { -1 }).collect();
        let mut p = id.clone();
        for (o, &s) in obs.iter().zip(&signs) {
            let factor = id.add(&o.scale(&Complex64::new(s as f64, 0.0)))?.scale(&half);
            p = p.matmul(&factor)?;
        }
        if !is_zero_matrix(&p, 1e-9) {
            labels.push(signs);
            projectors.push(p);
        }
    }
    Ok(JointMeasurement { labels, projectors })
}

/// A pure state shared by two parties with projective measurements;
/// `alice[x][a]` is the projector for outcome `a` of setting `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumStrategy {
    pub state: StateVector,
    pub d_a: usize,
    pub d_b: usize,
    pub alice: Vec<Vec<ComplexMatrix>>,
    pub bob: Vec<Vec<ComplexMatrix>>,
}

impl QuantumStrategy {
    pub fn new(state: StateVector, d_a: usize, d_b: usize, alice: Vec<Vec<ComplexMatrix>>, bob: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        if state.dimension() != d_a * d_b {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} for local dimensions {d_a} and {d_b}",
                state.dimension()
            )));
        }
        for (party, ms, d) in [("Alice", &alice, d_a), ("Bob", &bob, d_b)] {
            let n = ms.first().map_or(0, Vec::len);
            if ms.is_empty() || n == 0 {
                return Err(Error::InvalidStrategy(format!("{party} has no measurements")));
            }
            for m in ms.iter() {
                if m.len() != n {
                    return Err(Error::InvalidStrategy(format!("{party} settings have different outcome counts")));
                }
                if m.iter().any(|p| p.rows() != d || p.cols() != d) {
                    return Err(Error::DimensionMismatch(format!("{party} projectors must be {d}x{d}")));
                }
            }
        }
        Ok(Self { state, d_a, d_b, alice, bob })
    }

    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::new(self.alice.len(), self.alice[0].len(), self.bob.len(), self.bob[0].len())
    }

    pub fn behavior(&self) -> Result<Behavior> {
        behavior_from_strategy(&self.state, &self.alice, &self.bob)
    }
}

fn entrywise_dot(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

/// `p(a, b | x, y) = <psi| A_a|x (x) B_b|y |psi>`.
pub fn behavior_from_strategy(psi: &StateVector, alice: &[Vec<ComplexMatrix>], bob: &[Vec<ComplexMatrix>]) -> Result<Behavior> {
    let d_a = alice.first().and_then(|m| m.first()).map_or(0, |p| p.rows());
    let d_b = bob.first().and_then(|m| m.first()).map_or(0, |p| p.rows());
    let strategy = QuantumStrategy::new(psi.clone(), d_a, d_b, alice.to_vec(), bob.to_vec())?;
    let s = strategy.scenario()?;
    let m = psi.as_matrix(d_a, d_b);
    let m_adj = m.adjoint();
    // <psi|A (x) B|psi> = tr(M^dag A M B^T) = sum_ij (M^dag A M)_ij B_ij
    let reduced: Vec<Vec<ComplexMatrix>> = alice
        .iter()
        .map(|ps| ps.iter().map(|p| m_adj.matmul(&p.matmul(&m)?)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut table = vec![0.0; s.num_cells()];
    for x in 0..s.n_x {
        for y in 0..s.n_y {
            for a in 0..s.n_a {
                for b in 0..s.n_b {
                    table[s.index(x, y, a, b)] = entrywise_dot(&reduced[x][a], &bob[y][b]).re;
                }
            }
        }
    }
    let p = Behavior::float(s, table)?;
    let report = validate_behavior(&p, 1e-9);
    if !report.valid {
        return Err(Error::InvalidStrategy(format!("measurements do not give a valid behavior: {report:?}")));
    }
    Ok(p)
}

/// The ten pentagram observables in vertex order (see
/// [`crate::games::pentagram_game`]): `XZZ ZXZ ZZX XXX` then
/// `IIZ IZI XII ZII IXI IIX`.
pub fn pentagram_observables() -> Vec<ComplexMatrix> {
    ["XZZ", "ZXZ", "ZZX", "XXX", "IIZ", "IZI", "XII", "ZII", "IXI", "IIX"]
        .iter()
        .map(|w| pauli_string(w).unwrap())
        .collect()
}

/// Both parties measure the four observables of their line jointly on a
/// maximally entangled pair of three-qubit systems.
pub fn pentagram_strategy() -> QuantumStrategy {
    let obs = pentagram_observables();
    let measurements: Vec<Vec<ComplexMatrix>> = (0..5)
        .map(|x| {
            let line: Vec<ComplexMatrix> = PENTAGRAM_LINES[x].iter().map(|&v| obs[v].clone()).collect();
            let jm = joint_projectors(&line).unwrap();
            (0..8).map(|i| jm.projector_for(&pentagram_tuple(x, i)).unwrap().clone()).collect()
        })
        .collect();
    QuantumStrategy::new(StateVector::maximally_entangled(8), 8, 8, measurements.clone(), measurements).unwrap()
}

/// Two-qubit observables of the magic square, row by row.
pub fn magic_square_observables() -> [[ComplexMatrix; 3]; 3] {
    let p = |w: &str| pauli_string(w).unwrap();
    [
        [p("XI"), p("IX"), p("XX")],
        [p("IZ"), p("ZI"), p("ZZ")],
        [p("-XZ"), p("-ZX"), p("YY")],
    ]
}

/// Alice measures a row and Bob the transpose of a column on two maximally
/// entangled qubit pairs. Rows multiply to the identity and columns to minus
/// the identity.
pub fn magic_square_strategy() -> QuantumStrategy {
    let obs = magic_square_observables();
    let alice = (0..3)
        .map(|x| {
            let jm = joint_projectors(&obs[x]).unwrap();
            (0..4).map(|a| jm.projector_for(&magic_square_tuple(MS_ALICE_LABELS[x][a], 1)).unwrap().clone()).collect()
        })
        .collect();
    let bob = (0..3)
        .map(|y| {
            let col: Vec<ComplexMatrix> = (0..3).map(|x| obs[x][y].transpose()).collect();
            let jm = joint_projectors(&col).unwrap();
            (0..4).map(|b| jm.projector_for(&magic_square_tuple(MS_BOB_LABELS[y][b], -1)).unwrap().clone()).collect()
        })
        .collect();
    QuantumStrategy::new(StateVector::maximally_entangled(4), 4, 4, alice, bob).unwrap()
}

/// Maximal CHSH violation: a maximally entangled qubit pair, Alice measuring
/// `Z` and `X`, Bob measuring `(Z + X)/sqrt 2` and `(Z - X)/sqrt 2`.
pub fn chsh_strategy() -> QuantumStrategy {
    let z = pauli('Z').unwrap();
    let x = pauli('X').unwrap();
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let plus = z.add(&x).unwrap().scale(&h);
    let minus = z.sub(&x).unwrap().scale(&h);
    let split = |o: &ComplexMatrix| joint_projectors(std::slice::from_ref(o)).unwrap().projectors;
    QuantumStrategy::new(
        StateVector::maximally_entangled(2),
        2,
        2,
        vec![split(&z), split(&x)],
        vec![split(&plus), split(&minus)],
    )
    .unwrap()
}

/// Snap every entry to a dyadic rational `k / 2^e`, `e <= 10`, within 1e-9.
pub fn rationalize_dyadic(p: &Behavior) -> Result<Behavior> {
    let table = (0..p.scenario.num_cells())
        .map(|i| {
            let v = p.prob(i);
            dyadic_rational(v, 1e-9, 10).ok_or(Error::Rationalization { index: i, value: v })
        })
        .collect::<Result<Vec<_>>>()?;
    Behavior::exact(p.scenario, table)
}

/// Exact nonsignaling behavior close to `p`. Marginals and the joint
/// probabilities of all but the last outcomes are approximated by fractions
/// with denominator at most `max_den`; the remaining entries follow from
/// normalization, so the result is nonsignaling by construction.
pub fn rationalize_ns(p: &Behavior, tol: f64, max_den: u64) -> Result<Behavior> {
    let s = p.scenario;
    let approx = |v: f64, index: usize| approximate_rational(v, tol, max_den).ok_or(Error::Rationalization { index, value: v });
    let (la, lb) = (s.n_a - 1, s.n_b - 1);
    let mut alice = vec![vec![Rational::zero(); la]; s.n_x];
    for x in 0..s.n_x {
        for a in 0..la {
            let v = (0..s.n_b).map(|b| p.get(x, 0, a, b)).sum();
            alice[x][a] = approx(v, s.index(x, 0, a, 0))?;
        }
    }
    let mut bob = vec![vec![Rational::zero(); lb]; s.n_y];
    for y in 0..s.n_y {
        for b in 0..lb {
            let v = (0..s.n_a).map(|a| p.get(0, y, a, b)).sum();
            bob[y][b] = approx(v, s.index(0, y, 0, b))?;
        }
    }
    let mut table = vec![Rational::zero(); s.num_cells()];
    for x in 0..s.n_x {
        for y in 0..s.n_y {
            for a in 0..la {
                for b in 0..lb {
                    table[s.index(x, y, a, b)] = approx(p.get(x, y, a, b), s.index(x, y, a, b))?;
                }
            }
            for a in 0..la {
                let inner: Rational = (0..lb).map(|b| table[s.index(x, y, a, b)].clone()).sum();
                table[s.index(x, y, a, lb)] = &alice[x][a] - inner;
            }
            for b in 0..lb {
                let inner: Rational = (0..la).map(|a| table[s.index(x, y, a, b)].clone()).sum();
                table[s.index(x, y, la, b)] = &bob[y][b] - inner;
            }
            let rest: Rational = (0..s.n_a)
                .flat_map(|a| (0..s.n_b).map(move |b| (a, b)))
                .filter(|&(a, b)| a < la || b < lb)
                .map(|(a, b)| table[s.index(x, y, a, b)].clone())
                .sum();
            table[s.index(x, y, la, lb)] = Rational::one() - rest;
        }
    }
    Behavior::exact(s, table)
}

#[derive(Debug, Clone)]
pub struct SeesawResult {
    pub value: f64,
    pub strategy: QuantumStrategy,
    /// Value after each sweep of the best restart.
    pub trace: Vec<f64>,
    pub restart: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SeesawOptions {
    pub max_sweeps: usize,
    /// Stop once a sweep improves the value by less than this.
    pub stop: f64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self { max_sweeps: 500, stop: 1e-13 }
    }
}

fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let h = g.add(&g.adjoint()).unwrap();
    eig_hermitian(&h).expect("Hermitian by construction").1
}

fn outer_columns(v: &ComplexMatrix, cols: &[usize]) -> ComplexMatrix {
    let d = v.rows();
    ComplexMatrix::from_fn(d, d, |i, j| cols.iter().map(|&k| v[(i, k)] * v[(j, k)].conj()).sum())
}

/// Random rank-one projective measurements with every outcome used when the
/// dimension allows it.
fn random_measurements(settings: usize, outcomes: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<ComplexMatrix>> {
    (0..settings)
        .map(|_| {
            let u = random_unitary(d, rng);
            let mut owner: Vec<usize> = (0..d).map(|k| k % outcomes).collect();
            for k in (1..d).rev() {
                owner.swap(k, rng.gen_range(0..=k));
            }
            (0..outcomes)
                .map(|a| outer_columns(&u, &(0..d).filter(|&k| owner[k] == a).collect::<Vec<_>>()))
                .collect()
        })
        .collect()
}

/// Orthonormal basis of the range of a projector.
fn range_basis(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (vals, vecs) = eig_hermitian(p)?;
    let cols: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 0.5).collect();
    Ok(ComplexMatrix::from_fn(p.rows(), cols.len(), |i, j| vecs[(i, cols[j])]))
}

/// Best response of one party to fixed effective operators: for every pair of
/// outcomes, re-split their joint subspace along the positive part of the
/// difference of the two effective operators. Exact for two outcomes and
/// never decreases the value otherwise.
fn improve_measurements(ms: &mut [Vec<ComplexMatrix>], effective: &[Vec<ComplexMatrix>]) -> Result<()> {
    for (m, e) in ms.iter_mut().zip(effective) {
        let n = m.len();
        for a in 0..n {
            for b in a + 1..n {
                let joint = m[a].add(&m[b])?;
                let v = range_basis(&joint)?;
                if v.cols() == 0 {
                    continue;
                }
                let diff = e[a].sub(&e[b])?;
                let restricted = v.adjoint().matmul(&diff.matmul(&v)?)?;
                let restricted = restricted.add(&restricted.adjoint())?.scale(&Complex64::new(0.5, 0.0));
                let (vals, vecs) = eig_hermitian(&restricted)?;
                let w = v.matmul(&vecs)?;
                let pos: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 0.0).collect();
                let neg: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] <= 0.0).collect();
                m[a] = outer_columns(&w, &pos);
                m[b] = outer_columns(&w, &neg);
            }
        }
    }
    Ok(())
}

struct Seesaw<'a> {
    expr: &'a BellExpression,
    coeffs: Vec<f64>,
    d_a: usize,
    d_b: usize,
    opts: SeesawOptions,
}

impl Seesaw<'_> {
    fn bell_operator(&self, alice: &[Vec<ComplexMatrix>], bob: &[Vec<ComplexMatrix>]) -> Result<ComplexMatrix> {
        let s = self.expr.scenario;
        let d = self.d_a * self.d_b;
        let mut op = ComplexMatrix::zeros(d, d);
        for x in 0..s.n_x {
            for a in 0..s.n_a {
                for y in 0..s.n_y {
                    let mut eff = ComplexMatrix::zeros(self.d_b, self.d_b);
                    let mut any = false;
                    for b in 0..s.n_b {
                        let c = self.coeffs[s.index(x, y, a, b)];
                        if c != 0.0 {
                            eff = eff.add(&bob[y][b].scale(&Complex64::new(c, 0.0)))?;
                            any = true;
                        }
                    }
                    if any {
                        op = op.add(&kron(&alice[x][a], &eff))?;
                    }
                }
            }
        }
        Ok(op)
    }

    fn top_state(&self, alice: &[Vec<ComplexMatrix>], bob: &[Vec<ComplexMatrix>]) -> Result<(f64, StateVector)> {
        let op = self.bell_operator(alice, bob)?;
        let op = op.add(&op.adjoint())?.scale(&Complex64::new(0.5, 0.0));
        let (vals, vecs) = eig_hermitian(&op)?;
        let top = vals.len() - 1;
        let amps: Vec<Complex64> = (0..vecs.rows()).map(|i| vecs[(i, top)]).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        Ok((vals[top], StateVector { amplitudes: amps.into_iter().map(|a| a / norm).collect() }))
    }

    /// Effective operators `E[x][a]` with value `sum tr(E A)` for Alice,
    /// given the state and Bob's measurements.
    fn alice_effective(&self, m: &ComplexMatrix, bob: &[Vec<ComplexMatrix>]) -> Result<Vec<Vec<ComplexMatrix>>> {
        let s = self.expr.scenario;
        let m_adj = m.adjoint();
        // tr_B[(1 (x) B) |psi><psi|] = M B^T M^dag
        let reduced: Vec<Vec<ComplexMatrix>> = bob
            .iter()
            .map(|ps| ps.iter().map(|p| m.matmul(&p.transpose().matmul(&m_adj)?)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        self.collect(s.n_x, s.n_a, self.d_a, |x, a, acc| {
            for y in 0..s.n_y {
                for b in 0..s.n_b {
                    let c = self.coeffs[s.index(x, y, a, b)];
                    if c != 0.0 {
                        *acc = acc.add(&reduced[y][b].scale(&Complex64::new(c, 0.0)))?;
                    }
                }
            }
            Ok(())
        })
    }

    fn bob_effective(&self, m: &ComplexMatrix, alice: &[Vec<ComplexMatrix>]) -> Result<Vec<Vec<ComplexMatrix>>> {
        let s = self.expr.scenario;
        let m_adj = m.adjoint();
        // tr_A[(A (x) 1) |psi><psi|] = (M^dag A M)^T
        let reduced: Vec<Vec<ComplexMatrix>> = alice
            .iter()
            .map(|ps| ps.iter().map(|p| Ok(m_adj.matmul(&p.matmul(m)?)?.transpose())).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        self.collect(s.n_y, s.n_b, self.d_b, |y, b, acc| {
            for x in 0..s.n_x {
                for a in 0..s.n_a {
                    let c = self.coeffs[s.index(x, y, a, b)];
                    if c != 0.0 {
                        *acc = acc.add(&reduced[x][a].scale(&Complex64::new(c, 0.0)))?;
                    }
                }
            }
            Ok(())
        })
    }

    fn collect(
        &self,
        settings: usize,
        outcomes: usize,
        d: usize,
        mut fill: impl FnMut(usize, usize, &mut ComplexMatrix) -> Result<()>,
    ) -> Result<Vec<Vec<ComplexMatrix>>> {
        let mut out = Vec::with_capacity(settings);
        for x in 0..settings {
            let mut row = Vec::with_capacity(outcomes);
            for a in 0..outcomes {
                let mut acc = ComplexMatrix::zeros(d, d);
                fill(x, a, &mut acc)?;
                row.push(acc);
            }
            out.push(row);
        }
        Ok(out)
    }

    fn value(&self, state: &StateVector, alice: &[Vec<ComplexMatrix>], bob: &[Vec<ComplexMatrix>]) -> Result<f64> {
        let p = behavior_from_strategy(state, alice, bob)?;
        self.expr.value_f64(&p)
    }

    fn run(&self, seed: u64) -> Result<(f64, QuantumStrategy, Vec<f64>)> {
        let s = self.expr.scenario;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut alice = random_measurements(s.n_x, s.n_a, self.d_a, &mut rng);
        let mut bob = random_measurements(s.n_y, s.n_b, self.d_b, &mut rng);
        let mut trace = Vec::new();
        let mut best = f64::NEG_INFINITY;
        let mut state = StateVector::maximally_entangled(1);
        for _ in 0..self.opts.max_sweeps {
            state = self.top_state(&alice, &bob)?.1;
            let m = state.as_matrix(self.d_a, self.d_b);
            let e = self.alice_effective(&m, &bob)?;
            improve_measurements(&mut alice, &e)?;
            let f = self.bob_effective(&m, &alice)?;
            improve_measurements(&mut bob, &f)?;
            let v = self.value(&state, &alice, &bob)?;
            trace.push(v);
            if v <= best + self.opts.stop {
                best = best.max(v);
                break;
            }
            best = v;
        }
        // final state update is optimal for the final measurements
        let (_, top) = self.top_state(&alice, &bob)?;
        let v = self.value(&top, &alice, &bob)?;
        if v >= best {
            state = top;
            best = v;
            trace.push(v);
        }
        let strategy = QuantumStrategy::new(state, self.d_a, self.d_b, alice, bob)?;
        Ok((best, strategy, trace))
    }
}

/// Lower bound on the quantum maximum of `expr` with local dimensions `d_a`,
/// `d_b`: alternate between the best state for fixed measurements and each
/// party's best measurements for fixed state. Restarts run in parallel from
/// seeds derived from `seed`; the best restart wins, ties to the lower index.
pub fn seesaw_optimize(expr: &BellExpression, d_a: usize, d_b: usize, restarts: usize, seed: u64) -> Result<SeesawResult> {
    seesaw_optimize_with(expr, d_a, d_b, restarts, seed, SeesawOptions::default())
}

pub fn seesaw_optimize_with(
    expr: &BellExpression,
    d_a: usize,
    d_b: usize,
    restarts: usize,
    seed: u64,
    opts: SeesawOptions,
) -> Result<SeesawResult> {
    if d_a < 1 || d_b < 1 || restarts == 0 {
        return Err(Error::InvalidStrategy("seesaw needs positive dimensions and restarts".into()));
    }
    let coeffs = expr.coefficients.iter().map(crate::numerics::rational_to_f64).collect();
    let engine = Seesaw { expr, coeffs, d_a, d_b, opts };
    let runs: Vec<(f64, QuantumStrategy, Vec<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| engine.run(seed.wrapping_mul(0x9e37_79b9).wrapping_add(r as u64)))
        .collect::<Result<_>>()?;
    let (restart, (value, strategy, trace)) = runs
        .into_iter()
        .enumerate()
        .fold(None::<(usize, (f64, QuantumStrategy, Vec<f64>))>, |best, (i, run)| match best {
            Some((j, b)) if b.0 >= run.0 => Some((j, b)),
            _ => Some((i, run)),
        })
        .unwrap();
    Ok(SeesawResult { value, strategy, trace, restart })
}

/// Penalized objective for Hardy's paradox: `p(0,0|0,0)` minus `weight`
/// times the probability on each zero cell of the Hardy table.
pub fn hardy_expression(weight: i64) -> BellExpression {
    let s = Scenario::new(2, 2, 2, 2).unwrap();
    let mut c = vec![Rational::zero(); s.num_cells()];
    c[s.index(0, 0, 0, 0)] = Rational::one();
    for &(x, a, y, b) in &HARDY_ZEROS {
        c[s.index(x, y, a, b)] = Rational::from_integer((-weight).into());
    }
    BellExpression::new(s, c).unwrap()
}

/// Best state for fixed measurements among those vanishing exactly on the
/// given cells: the top eigenvector of the objective's Bell operator inside
/// the common kernel of the zero-cell projectors. `None` when that kernel is
/// trivial.
pub fn project_onto_zeros(strategy: &QuantumStrategy, zeros: &[Cell], objective: &BellExpression) -> Result<Option<QuantumStrategy>> {
    let s = strategy.scenario()?;
    s.check_same(&objective.scenario)?;
    let d = strategy.d_a * strategy.d_b;
    let mut k = ComplexMatrix::zeros(d, d);
    for c in zeros {
        k = k.add(&kron(&strategy.alice[c.x][c.a], &strategy.bob[c.y][c.b]))?;
    }
    let (vals, vecs) = eig_hermitian(&k)?;
    let kernel: Vec<usize> = (0..d).filter(|&i| vals[i] < 1e-9).collect();
    if kernel.is_empty() {
        return Ok(None);
    }
    let v = ComplexMatrix::from_fn(d, kernel.len(), |i, j| vecs[(i, kernel[j])]);
    let engine = Seesaw {
        expr: objective,
        coeffs: objective.coefficients.iter().map(crate::numerics::rational_to_f64).collect(),
        d_a: strategy.d_a,
        d_b: strategy.d_b,
        opts: SeesawOptions::default(),
    };
    let op = engine.bell_operator(&strategy.alice, &strategy.bob)?;
    let restricted = v.adjoint().matmul(&op.matmul(&v)?)?;
    let restricted = restricted.add(&restricted.adjoint())?.scale(&Complex64::new(0.5, 0.0));
    let (_, w) = eig_hermitian(&restricted)?;
    let top = w.cols() - 1;
    let amps: Vec<Complex64> = (0..d).map(|i| (0..kernel.len()).map(|j| v[(i, j)] * w[(j, top)]).sum()).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let state = StateVector { amplitudes: amps.into_iter().map(|a| a / norm).collect() };
    Ok(Some(QuantumStrategy { state, ..strategy.clone() }))
}

/// Hardy's paradox on two qubits: maximize `p(0,0|0,0)` with the Hardy zeros
/// enforced by a penalty of weight 1000, then restore them exactly.
pub fn hardy_program(restarts: usize, seed: u64) -> Result<(f64, QuantumStrategy)> {
    let opts = SeesawOptions { max_sweeps: 2000, stop: 1e-15 };
    let r = seesaw_optimize_with(&hardy_expression(1000), 2, 2, restarts, seed, opts)?;
    let objective = hardy_expression(0);
    let zeros: Vec<Cell> = HARDY_ZEROS.iter().map(|&(x, a, y, b)| Cell::new(x, a, y, b)).collect();
    let strategy = project_onto_zeros(&r.strategy, &zeros, &objective)?.unwrap_or(r.strategy);
    let p = strategy.behavior()?;
    Ok((p.get(0, 0, 0, 0), strategy))
}

/// Zero cells `(x, a, y, b)` of Hardy's paradox.
pub const HARDY_ZEROS: [(usize, usize, usize, usize); 3] = [(0, 0, 1, 1), (1, 0, 1, 0), (1, 1, 0, 0)];
