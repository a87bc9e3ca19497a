use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nonlocality::games::{chsh_game, classical_value, expression_from_game, magic_square_game};
use nonlocality::io::JsonFile;
use nonlocality::npa::{npa_feasible, npa_upper_bound, Level};
use nonlocality::numerics::rational_to_f64;
use nonlocality::polytope::BellExpression;
use nonlocality::quantum::{magic_square_strategy, seesaw_optimize};
use nonlocality::symmetry::{act, bell_group, BellGroupElement};
use nonlocality::zeros::TableOfZeros;
use nonlocality::{Rational, Scenario};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

#[test]
fn chsh_sandwich() {
    let g = chsh_game();
    let e = expression_from_game(&g);
    let report = classical_value(&g).unwrap();
    let classical = rational_to_f64(&report.omega_classical);
    let ns = rational_to_f64(&report.omega_ns.unwrap());
    let seesaw = seesaw_optimize(&e, 2, 2, 4, 1).unwrap().value;
    let bound = npa_upper_bound(&e, Level::One).unwrap();
    assert!(bound.reliable);
    assert!(classical <= seesaw + 1e-9);
    assert!(seesaw <= bound.value + 1e-5, "seesaw {seesaw} above bound {}", bound.value);
    assert!(bound.value <= ns + 1e-6);
}

#[test]
fn magic_square_bound_reaches_one() {
    let g = magic_square_game();
    let e = expression_from_game(&g);
    let won = e.value_f64(&magic_square_strategy().behavior().unwrap()).unwrap();
    let bound = npa_upper_bound(&e, Level::One).unwrap();
    assert!((won - 1.0).abs() < 1e-9);
    assert!(bound.value >= won - 1e-5 && bound.value <= 1.0 + 1e-5, "{}", bound.value);
}

#[test]
fn higher_level_never_loosens_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dims in [[2, 2, 2, 2], [2, 3, 2, 2], [3, 2, 2, 2]] {
        let s = Scenario::try_from(dims).unwrap();
        for _ in 0..4 {
            let c = (0..s.num_cells()).map(|_| Rational::from_integer(rng.gen_range(-3i64..=3).into())).collect();
            let e = BellExpression::new(s, c).unwrap();
            let one = npa_upper_bound(&e, Level::One).unwrap();
            let two = npa_upper_bound(&e, Level::OnePlusAb).unwrap();
            assert!(two.value <= one.value + 1e-6, "{dims:?}: {} > {}", two.value, one.value);
        }
    }
}

#[test]
fn feasibility_verdict_is_orbit_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for name in ["cntz_3233.json", "hardy.json"] {
        let t = TableOfZeros::load(fixture(name)).unwrap();
        let g = bell_group(&t.scenario);
        let base = npa_feasible(&t, Some(Level::One)).unwrap().verdict;
        for _ in 0..3 {
            let mut element = BellGroupElement::identity(&t.scenario);
            for _ in 0..6 {
                let k = rng.gen_range(0..g.generators().len());
                element = g.generators()[k].compose(&element);
            }
            let image = act(&element, &t);
            assert_eq!(npa_feasible(&image, Some(Level::One)).unwrap().verdict, base, "{name}");
        }
    }
}
