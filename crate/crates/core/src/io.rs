//! JSON file formats. Every writer emits pretty-printed JSON with a trailing
//! newline, and parsing then writing a file reproduces it byte for byte.
//!
//! Tables are flat in `(x, y, a, b)` order. Exact numbers are strings such as
//! `"3/4"`; floating-point tables hold plain numbers.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{builtin_game, Game};
use crate::numerics::{format_rational, parse_rational, ComplexMatrix, Rational};
use crate::polytope::{BellExpression, Bounds};
use crate::quantum::{QuantumStrategy, StateVector};
use crate::scenario::{Behavior, Cell, Scenario, Table};
use crate::zeros::TableOfZeros;

/// Conversion to and from the JSON file formats.
pub trait JsonFile: Sized {
    fn from_json(text: &str) -> Result<Self>;
    fn to_json(&self) -> String;

    fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_json())?)
    }
}

pub fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn parse_entry(text: &str, what: &str, s: &Scenario, i: usize) -> Result<Rational> {
    parse_rational(text).map_err(|e| {
        let c = s.cell(i);
        Error::Parse(format!("{what} entry {i} (x={}, y={}, a={}, b={}): {e}", c.x, c.y, c.a, c.b))
    })
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TableRepr {
    Exact(Vec<String>),
    Float(Vec<f64>),
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Rational,
    Float,
}

/// `mode` is optional on input; the entry types decide, and a stated mode
/// has to agree with them.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BehaviorRepr {
    scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mode: Option<Mode>,
    table: TableRepr,
}

impl JsonFile for Behavior {
    fn from_json(text: &str) -> Result<Self> {
        let r: BehaviorRepr = serde_json::from_str(text)?;
        let found = match r.table {
            TableRepr::Exact(_) => Mode::Rational,
            TableRepr::Float(_) => Mode::Float,
        };
        if let Some(stated) = r.mode.filter(|&m| m != found) {
            return Err(Error::Parse(format!("behavior declares mode {stated:?} but its entries are {found:?}")));
        }
        match r.table {
            TableRepr::Exact(v) => {
                if v.len() != r.scenario.num_cells() {
                    return Err(Error::IncompleteTable { expected: r.scenario.num_cells(), found: v.len() });
                }
                let t = v
                    .iter()
                    .enumerate()
                    .map(|(i, e)| parse_entry(e, "behavior", &r.scenario, i))
                    .collect::<Result<Vec<_>>>()?;
                Behavior::exact(r.scenario, t)
            }
            TableRepr::Float(v) => Behavior::float(r.scenario, v),
        }
    }

    fn to_json(&self) -> String {
        let (mode, table) = match &self.table {
            Table::Exact(v) => (Mode::Rational, TableRepr::Exact(v.iter().map(format_rational).collect())),
            Table::Float(v) => (Mode::Float, TableRepr::Float(v.clone())),
        };
        to_pretty(&BehaviorRepr { scenario: self.scenario, mode: Some(mode), table })
    }
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BoundsRepr {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    local: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    quantum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    ns: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpressionRepr {
    scenario: Scenario,
    coefficients: Vec<String>,
    #[serde(default)]
    bounds: BoundsRepr,
}

impl JsonFile for BellExpression {
    fn from_json(text: &str) -> Result<Self> {
        let r: ExpressionRepr = serde_json::from_str(text)?;
        let s = r.scenario;
        if r.coefficients.len() != s.num_cells() {
            return Err(Error::IncompleteTable { expected: s.num_cells(), found: r.coefficients.len() });
        }
        let c = r
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, e)| parse_entry(e, "coefficient", &s, i))
            .collect::<Result<Vec<_>>>()?;
        let mut e = BellExpression::new(s, c)?;
        e.bounds = Bounds {
            local: r.bounds.local.as_deref().map(parse_rational).transpose()?,
            quantum: r.bounds.quantum,
            ns: r.bounds.ns.as_deref().map(parse_rational).transpose()?,
        };
        Ok(e)
    }

    fn to_json(&self) -> String {
        to_pretty(&ExpressionRepr {
            scenario: self.scenario,
            coefficients: self.coefficients.iter().map(format_rational).collect(),
            bounds: BoundsRepr {
                local: self.bounds.local.as_ref().map(format_rational),
                quantum: self.bounds.quantum,
                ns: self.bounds.ns.as_ref().map(format_rational),
            },
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WinningRepr {
    Table(Vec<u8>),
    Builtin(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameRepr {
    scenario: Scenario,
    /// `[x, y, probability]`; missing pairs have probability 0.
    pi: Vec<(usize, usize, String)>,
    winning: WinningRepr,
}

impl JsonFile for Game {
    fn from_json(text: &str) -> Result<Self> {
        let r: GameRepr = serde_json::from_str(text)?;
        let s = r.scenario;
        let winning = match r.winning {
            WinningRepr::Builtin(name) => {
                let g = builtin_game(&name)?;
                s.check_same(&g.scenario)?;
                g.winning
            }
            WinningRepr::Table(v) => {
                if v.len() != s.num_cells() {
                    return Err(Error::IncompleteTable { expected: s.num_cells(), found: v.len() });
                }
                v.iter()
                    .enumerate()
                    .map(|(i, &w)| match w {
                        0 => Ok(false),
                        1 => Ok(true),
                        _ => {
                            let c = s.cell(i);
                            Err(Error::Parse(format!(
                                "winning entry {i} (x={}, y={}, a={}, b={}) must be 0 or 1",
                                c.x, c.y, c.a, c.b
                            )))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        let mut pi = vec![Rational::from_integer(0.into()); s.n_x * s.n_y];
        for (x, y, v) in &r.pi {
            if *x >= s.n_x || *y >= s.n_y {
                return Err(Error::Parse(format!("input pair ({x}, {y}) outside the scenario")));
            }
            pi[x * s.n_y + y] = parse_rational(v)?;
        }
        Game::new(s, pi, winning)
    }

    fn to_json(&self) -> String {
        let s = self.scenario;
        let pi = (0..s.n_x)
            .flat_map(|x| (0..s.n_y).map(move |y| (x, y)))
            .filter(|&(x, y)| !num_traits::Zero::is_zero(self.pi(x, y)))
            .map(|(x, y)| (x, y, format_rational(self.pi(x, y))))
            .collect();
        to_pretty(&GameRepr {
            scenario: s,
            pi,
            winning: WinningRepr::Table(self.winning.iter().map(|&w| w as u8).collect()),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZerosRepr {
    scenario: Scenario,
    /// `[x, a, y, b]`.
    cells: Vec<[usize; 4]>,
}

impl JsonFile for TableOfZeros {
    fn from_json(text: &str) -> Result<Self> {
        let r: ZerosRepr = serde_json::from_str(text)?;
        TableOfZeros::new(r.scenario, r.cells.iter().map(|&[x, a, y, b]| Cell::new(x, a, y, b)).collect::<Vec<_>>())
    }

    fn to_json(&self) -> String {
        to_pretty(&ZerosRepr {
            scenario: self.scenario,
            cells: self.cells().map(|c| [c.x, c.a, c.y, c.b]).collect(),
        })
    }
}

/// Several tables of one scenario, as written by the enumerator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZerosCollection(pub Vec<TableOfZeros>);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CollectionRepr {
    scenario: Scenario,
    tables: Vec<Vec<[usize; 4]>>,
}

impl JsonFile for ZerosCollection {
    fn from_json(text: &str) -> Result<Self> {
        let r: CollectionRepr = serde_json::from_str(text)?;
        let tables = r
            .tables
            .iter()
            .map(|cells| TableOfZeros::new(r.scenario, cells.iter().map(|&[x, a, y, b]| Cell::new(x, a, y, b)).collect::<Vec<_>>()))
            .collect::<Result<_>>()?;
        Ok(Self(tables))
    }

    fn to_json(&self) -> String {
        let scenario = self.0.first().map(|t| t.scenario).unwrap_or(Scenario { n_x: 1, n_a: 1, n_y: 1, n_b: 1 });
        to_pretty(&CollectionRepr {
            scenario,
            tables: self.0.iter().map(|t| t.cells().map(|c| [c.x, c.a, c.y, c.b]).collect()).collect(),
        })
    }
}

type MatrixRepr = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrategyRepr {
    dimensions: [usize; 2],
    /// Amplitudes `[re, im]` of `sum psi_ij |i>|j>` in row-major order.
    state: Vec<[f64; 2]>,
    alice: Vec<Vec<MatrixRepr>>,
    bob: Vec<Vec<MatrixRepr>>,
}

fn matrix_repr(m: &ComplexMatrix) -> MatrixRepr {
    (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
}

fn matrix_from_repr(r: &MatrixRepr) -> Result<ComplexMatrix> {
    let rows = r.len();
    let cols = r.first().map_or(0, Vec::len);
    if r.iter().any(|row| row.len() != cols) {
        return Err(Error::Parse("ragged projector matrix".into()));
    }
    ComplexMatrix::from_vec(rows, cols, r.iter().flatten().map(|&[re, im]| Complex64::new(re, im)).collect())
}

impl JsonFile for QuantumStrategy {
    fn from_json(text: &str) -> Result<Self> {
        let r: StrategyRepr = serde_json::from_str(text)?;
        let convert = |ms: &Vec<Vec<MatrixRepr>>| -> Result<Vec<Vec<ComplexMatrix>>> {
            ms.iter().map(|m| m.iter().map(matrix_from_repr).collect()).collect()
        };
        let state = StateVector::new(r.state.iter().map(|&[re, im]| Complex64::new(re, im)).collect())?;
        QuantumStrategy::new(state, r.dimensions[0], r.dimensions[1], convert(&r.alice)?, convert(&r.bob)?)
    }

    fn to_json(&self) -> String {
        let convert = |ms: &Vec<Vec<ComplexMatrix>>| ms.iter().map(|m| m.iter().map(matrix_repr).collect()).collect();
        to_pretty(&StrategyRepr {
            dimensions: [self.d_a, self.d_b],
            state: self.state.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
            alice: convert(&self.alice),
            bob: convert(&self.bob),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::magic_square_game;
    use crate::quantum::magic_square_strategy;

    fn round_trip<T: JsonFile + PartialEq + std::fmt::Debug>(v: &T) {
        let text = v.to_json();
        let back = T::from_json(&text).unwrap();
        assert_eq!(&back, v);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn formats_round_trip() {
        let s = Scenario::new(2, 2, 2, 2).unwrap();
        round_trip(&Behavior::uniform(s));
        round_trip(&Behavior::float(s, vec![0.25; 16]).unwrap());
        round_trip(&magic_square_game());
        round_trip(&TableOfZeros::new(s, vec![Cell::new(0, 1, 1, 0)]).unwrap());
        round_trip(&magic_square_strategy());
        let mut e = BellExpression::new(s, vec![Rational::new(1.into(), 3.into()); 16]).unwrap();
        e.bounds.local = Some(Rational::from_integer(1.into()));
        round_trip(&e);
    }

    #[test]
    fn builtin_winning_and_sparse_pi() {
        let text = r#"{"scenario": [2, 2, 2, 2], "pi": [[0, 0, "1/2"], [1, 1, "1/2"]], "winning": "chsh"}"#;
        let g = Game::from_json(text).unwrap();
        assert_eq!(g.pi(0, 1), &Rational::from_integer(0.into()));
        assert!(g.wins(1, 0, 1, 1));
    }

    #[test]
    fn diagnostics_name_the_cell() {
        let mut entries = vec!["1/4"; 16];
        entries[5] = "one quarter";
        let text = format!(r#"{{"scenario": [2, 2, 2, 2], "table": {entries:?}}}"#);
        let err = Behavior::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("entry 5"), "{err}");
        let short = r#"{"scenario": [2, 2, 2, 2], "table": ["1/4"]}"#;
        assert!(matches!(Behavior::from_json(short), Err(Error::IncompleteTable { expected: 16, found: 1 })));
    }

    #[test]
    fn stated_mode_must_match_entries() {
        let s = Scenario::new(2, 2, 2, 2).unwrap();
        assert!(Behavior::uniform(s).to_json().contains(r#""mode": "rational""#));
        let ok = format!(r#"{{"scenario": [2, 2, 2, 2], "mode": "float", "table": {:?}}}"#, vec![0.25; 16]);
        assert!(!Behavior::from_json(&ok).unwrap().is_exact());
        let bad = format!(r#"{{"scenario": [2, 2, 2, 2], "mode": "float", "table": {:?}}}"#, vec!["1/4"; 16]);
        assert!(Behavior::from_json(&bad).unwrap_err().to_string().contains("mode"));
    }
}
