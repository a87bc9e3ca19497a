//! Four views of extreme nonlocality of a single behavior, which coincide:
//! lying on a nonsignaling face free of local points, having no local
//! component, having a nonlocal table of zeros, and winning with certainty a
//! game that no classical strategy always wins.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::Result;
use crate::games::{expression_from_game, game_from_zeros, winning_probability, winning_probability_exact};
use crate::numerics::{format_rational, rational_to_f64, Rational};
use crate::polytope::{local_content, local_content_float, local_maximizers, BellExpression, DEFAULT_VERTEX_CAP};
use crate::scenario::Behavior;
use crate::zeros::{is_lhv_realizable, zeros_from_behavior, TableOfZeros};

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalityReport {
    /// The zero set spans a face of the nonsignaling polytope with no local
    /// point, certified by `face_witness`.
    pub face_nonsignaling: bool,
    /// Local content is zero.
    pub fully_nonlocal: bool,
    /// The table of zeros has no local realization.
    pub nonlocal_zeros: bool,
    /// The game lost exactly on the zeros has classical value below one and
    /// the behavior wins it with certainty.
    pub pseudotelepathy: bool,
    pub local_content: f64,
    pub local_content_exact: Option<String>,
    pub zero_count: usize,
    pub game_classical_value: String,
    pub game_behavior_value: f64,
    #[serde(skip)]
    pub zeros: TableOfZeros,
    /// Nonnegative expression vanishing on the behavior and at least one on
    /// every deterministic strategy.
    #[serde(skip)]
    pub face_witness: Option<BellExpression>,
}

impl ExtremalityReport {
    pub fn verdicts(&self) -> [bool; 4] {
        [self.face_nonsignaling, self.fully_nonlocal, self.nonlocal_zeros, self.pseudotelepathy]
    }

    /// All four verdicts agree.
    pub fn consistent(&self) -> bool {
        let v = self.verdicts();
        v.iter().all(|&b| b == v[0])
    }
}

/// Is `w` at least one on every deterministic strategy?
fn separates_local_points(w: &BellExpression) -> Result<bool> {
    let neg = BellExpression::new(w.scenario, w.coefficients.iter().map(|c| -c).collect())?;
    let m = local_maximizers(&neg, DEFAULT_VERTEX_CAP, 0)?;
    Ok(m.value <= -Rational::one())
}

/// Entries at most `tol` count as zeros for floating-point behaviors.
pub fn extremality_report(p: &Behavior, tol: f64) -> Result<ExtremalityReport> {
    let s = p.scenario;
    let zeros = zeros_from_behavior(p, tol);
    let nonlocal_zeros = !is_lhv_realizable(&zeros).realizable;

    let game = game_from_zeros(&zeros);
    let classical = local_maximizers(&expression_from_game(&game), DEFAULT_VERTEX_CAP, 0)?.value;
    let (game_behavior_value, wins_surely) = match p.exact_table() {
        Some(_) => {
            let w = winning_probability_exact(&game, p)?;
            (rational_to_f64(&w), w.is_one())
        }
        None => {
            let w = winning_probability(&game, p)?;
            (w, w >= 1.0 - tol)
        }
    };
    let pseudotelepathy = wins_surely && classical < Rational::one();

    let (local, local_exact, dual) = match p.exact_table() {
        Some(_) => {
            let lc = local_content(p)?;
            (rational_to_f64(&lc.q_l), Some(lc.q_l.clone()), Some(lc.dual))
        }
        None => (local_content_float(p, tol)?, None, None),
    };
    let fully_nonlocal = match &local_exact {
        Some(q) => q.is_zero(),
        None => local <= tol,
    };

    let mut face_witness = None;
    if fully_nonlocal {
        let w = match dual {
            Some(d) if d.coefficients.iter().all(|c| !c.is_negative()) => d,
            _ => BellExpression::new(
                s,
                (0..s.num_cells())
                    .map(|i| if zeros.contains(&s.cell(i)) { Rational::one() } else { Rational::zero() })
                    .collect(),
            )?,
        };
        let vanishes = match p.exact_table() {
            Some(_) => w.value_exact(p)?.is_zero(),
            None => w.value_f64(p)?.abs() <= tol * s.num_cells() as f64,
        };
        if vanishes && separates_local_points(&w)? {
            face_witness = Some(w);
        }
    }

    Ok(ExtremalityReport {
        face_nonsignaling: face_witness.is_some(),
        fully_nonlocal,
        nonlocal_zeros,
        pseudotelepathy,
        local_content: local,
        local_content_exact: local_exact.as_ref().map(format_rational),
        zero_count: zeros.len(),
        game_classical_value: format_rational(&classical),
        game_behavior_value,
        zeros,
        face_witness,
    })
}
