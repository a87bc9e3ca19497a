use num_traits::One;
use proptest::prelude::*;

use nonlocality::io::JsonFile;
use nonlocality::polytope::{local_content, BellExpression};
use nonlocality::symmetry::{act, bell_group, BellGroupElement};
use nonlocality::zeros::{is_lhv_realizable, TableOfZeros};
use nonlocality::{Behavior, Cell, DeterministicStrategy, Rational, Scenario};

fn scenario() -> impl Strategy<Value = Scenario> {
    (1..=3usize, 2..=3usize, 1..=3usize, 2..=3usize).prop_map(|(x, a, y, b)| Scenario::new(x, a, y, b).unwrap())
}

fn table() -> impl Strategy<Value = TableOfZeros> {
    scenario().prop_flat_map(|s| {
        proptest::collection::vec(any::<bool>(), s.num_cells()).prop_map(move |bits| {
            let cells: Vec<Cell> = bits.iter().enumerate().filter(|(_, &on)| on).map(|(i, _)| s.cell(i)).collect();
            TableOfZeros::new(s, cells).unwrap()
        })
    })
}

fn strategy_in(s: Scenario) -> impl Strategy<Value = DeterministicStrategy> {
    (proptest::collection::vec(0..s.n_a, s.n_x), proptest::collection::vec(0..s.n_b, s.n_y))
        .prop_map(|(a, b)| DeterministicStrategy::new(a, b))
}

/// A local behavior as a mixture of up to four deterministic points with
/// small integer weights.
fn local_behavior() -> impl Strategy<Value = Behavior> {
    scenario().prop_flat_map(|s| {
        proptest::collection::vec((strategy_in(s), 1..10i64), 1..5).prop_map(move |parts| {
            let total: i64 = parts.iter().map(|(_, w)| w).sum();
            let induced: Vec<(Rational, Behavior)> = parts
                .iter()
                .map(|(d, w)| (Rational::new((*w).into(), total.into()), d.induced_behavior(&s).unwrap()))
                .collect();
            let refs: Vec<(Rational, &Behavior)> = induced.iter().map(|(w, p)| (w.clone(), p)).collect();
            Behavior::mixture(&refs).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zeros_json_round_trip(t in table()) {
        let text = t.to_json();
        prop_assert_eq!(TableOfZeros::from_json(&text).unwrap(), t);
    }

    #[test]
    fn behavior_json_round_trip(p in local_behavior()) {
        let back = Behavior::from_json(&p.to_json()).unwrap();
        prop_assert_eq!(back.exact_table(), p.exact_table());
    }

    #[test]
    fn witness_avoids_every_zero(t in table()) {
        let r = is_lhv_realizable(&t);
        if let Some(d) = &r.witness {
            prop_assert!(r.realizable);
            let s = t.scenario;
            prop_assert!(d.cells(&s).into_iter().all(|i| !t.contains(&s.cell(i))));
        } else {
            prop_assert!(!r.realizable);
        }
    }

    #[test]
    fn realizability_is_inherited_by_subtables(t in table(), drop in any::<proptest::sample::Index>()) {
        if t.is_empty() || !is_lhv_realizable(&t).realizable {
            return Ok(());
        }
        let cells: Vec<Cell> = t.cells().collect();
        let smaller = t.without(&cells[drop.index(cells.len())]);
        prop_assert!(is_lhv_realizable(&smaller).realizable);
    }

    #[test]
    fn canonical_form_is_orbit_invariant(t in table(), picks in proptest::collection::vec(any::<proptest::sample::Index>(), 0..8)) {
        let g = bell_group(&t.scenario);
        let gens = g.generators();
        let mut element = BellGroupElement::identity(&t.scenario);
        if !gens.is_empty() {
            for pick in &picks {
                element = gens[pick.index(gens.len())].compose(&element);
            }
        }
        let image = act(&element, &t);
        prop_assert_eq!(image.len(), t.len());
        prop_assert_eq!(g.canonical_form(&image).unwrap(), g.canonical_form(&t).unwrap());
        prop_assert_eq!(is_lhv_realizable(&image).realizable, is_lhv_realizable(&t).realizable);
    }

    #[test]
    fn local_mixtures_have_full_local_content(p in local_behavior()) {
        let lc = local_content(&p).unwrap();
        prop_assert!(lc.q_l.is_one());
        let recombined: Rational = lc.weights.iter().map(|(_, w)| w.clone()).sum();
        prop_assert!(recombined.is_one());
    }

    #[test]
    fn expression_value_is_linear(p in local_behavior(), coeffs in proptest::collection::vec(-3i64..=3, 1..=81)) {
        let s = p.scenario;
        let c: Vec<Rational> = (0..s.num_cells()).map(|i| Rational::from_integer(coeffs[i % coeffs.len()].into())).collect();
        let e = BellExpression::new(s, c).unwrap();
        let lc = local_content(&p).unwrap();
        let direct = e.value_exact(&p).unwrap();
        let via_vertices: Rational = lc.weights.iter().map(|(d, w)| w * e.value_at(d)).sum();
        prop_assert_eq!(direct, via_vertices);
    }
}
