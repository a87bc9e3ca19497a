//! Command-line front end. Every subcommand reads JSON files and prints a
//! JSON report; yes/no queries exit with 2 on a negative answer.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use num_traits::Zero;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use nonlocality::extremality::extremality_report;
use nonlocality::games::{builtin_game, classical_value, expression_from_game, lift_game, Game};
use nonlocality::io::{to_pretty, JsonFile, ZerosCollection};
use nonlocality::npa::{npa_feasible, npa_upper_bound, Level};
use nonlocality::numerics::{format_decimal, format_rational, rational_to_f64, Rational};
use nonlocality::polytope::{
    local_content, local_content_float, ns_value, tightness_verdict, vertex_rank, BellExpression,
    DEFAULT_VERTEX_CAP,
};
use nonlocality::quantum::{chsh_strategy, magic_square_strategy, pentagram_strategy, rationalize_dyadic, QuantumStrategy};
use nonlocality::scenario::ns_dimension;
use nonlocality::solvers::Verdict;
use nonlocality::symmetry::bell_group;
use nonlocality::zeros::{enumerate_cntz, is_critical, is_lhv_realizable, CntzOptions, TableOfZeros};
use nonlocality::{Behavior, Scenario};

#[derive(Parser)]
#[command(name = "nonlocality", version, about = "Extreme nonlocality toolkit for bipartite Bell scenarios")]
struct Cli {
    /// Worker thread cap.
    #[arg(long, global = true, env = "NONLOCALITY_THREADS")]
    threads: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Largest local weight of a behavior.
    LocalContent {
        behavior: PathBuf,
        /// Entries below this count as zero for floating-point behaviors.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Dual certificate of the local content of an exact behavior.
    DualExpression {
        behavior: PathBuf,
        /// Also write the expression file.
        #[arg(long)]
        expression: Option<PathBuf>,
    },
    /// Exact classical value of a game and its optimal strategies.
    ClassicalValue {
        game: PathBuf,
        /// Add an NPA upper bound on the quantum value at this level.
        #[arg(long)]
        npa_level: Option<Level>,
        /// Skip listing optimizers beyond this many.
        #[arg(long, default_value_t = 1000)]
        list: u128,
    },
    /// Nonsignaling maximum of an expression or game.
    NsValue { input: PathBuf },
    /// NPA upper bound on the quantum maximum of an expression or game.
    NpaBound {
        input: PathBuf,
        #[arg(long, default_value = "1")]
        level: Level,
    },
    /// Quantum feasibility of a table of zeros (exit 2 unless feasible).
    NpaFeasible {
        zeros: PathBuf,
        /// Fixed level; by default level 1, escalating to 1+AB when indeterminate.
        #[arg(long)]
        level: Option<Level>,
    },
    /// LHV realizability of a table of zeros (exit 2 if not realizable).
    Realizable { zeros: PathBuf },
    /// Criticality of a table of zeros (exit 2 if not critical).
    Critical { zeros: PathBuf },
    /// All critical nonlocal tables of zeros up to relabeling.
    CntzEnum {
        /// Scenario as `n_x,n_a,n_y,n_b`.
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Reduce under output relabelings before the full group.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        subgroup: bool,
        #[arg(long)]
        swap_parties: bool,
        /// Write the representatives here.
        #[arg(long)]
        tables: Option<PathBuf>,
    },
    /// Lift a game to `n` copies of its inputs.
    Lift {
        game: PathBuf,
        #[arg(short)]
        n: usize,
        /// Write the lifted game file.
        #[arg(long)]
        game_out: Option<PathBuf>,
    },
    /// Facet test for an expression or game at its local bound (exit 2 if not tight).
    Tightness {
        input: PathBuf,
        /// Local bound to test; defaults to the file's bound or the local maximum.
        #[arg(long)]
        bound: Option<String>,
    },
    /// Write a builtin game with its quantum strategy and behavior.
    Builtin {
        name: String,
        /// Directory for `<name>_game.json`, `<name>_strategy.json` and `<name>_behavior.json`.
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
    /// Compare the four characterizations of extreme nonlocality on a
    /// behavior (exit 2 if they disagree).
    VerifyEquivalence {
        behavior: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

struct Outcome {
    results: Value,
    inputs: Vec<PathBuf>,
    negative: bool,
}

impl Outcome {
    fn new(results: Value, inputs: Vec<PathBuf>) -> Self {
        Self { results, inputs, negative: false }
    }

    fn verdict(mut self, yes: bool) -> Self {
        self.negative = !yes;
        self
    }
}

fn number(r: &Rational) -> Value {
    json!({ "exact": format_rational(r), "decimal": format_decimal(rational_to_f64(r)) })
}

fn float(v: f64) -> Value {
    if v.is_finite() {
        json!({ "decimal": format_decimal(v) })
    } else {
        json!({ "decimal": v.to_string() })
    }
}

fn parse_scenario(text: &str) -> Result<Scenario> {
    let dims: Vec<usize> = text
        .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().with_context(|| format!("bad scenario component `{p}`")))
        .collect::<Result<_>>()?;
    let [n_x, n_a, n_y, n_b] = dims[..] else {
        bail!("scenario needs four numbers n_x,n_a,n_y,n_b")
    };
    Ok(Scenario::new(n_x, n_a, n_y, n_b)?)
}

fn load<T: JsonFile>(path: &Path) -> Result<T> {
    T::load(path).with_context(|| format!("reading {}", path.display()))
}

/// Games are recognized by their `winning` field.
fn load_expression(path: &Path) -> Result<BellExpression> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("winning").is_some() {
        Ok(expression_from_game(&Game::from_json(&text)?))
    } else {
        Ok(BellExpression::from_json(&text)?)
    }
}

fn run(command: Command) -> Result<Outcome> {
    Ok(match command {
        Command::LocalContent { behavior, tol } => {
            let p: Behavior = load(&behavior)?;
            let results = if p.is_exact() {
                let lc = local_content(&p)?;
                json!({
                    "q_l": number(&lc.q_l),
                    "q_nl": number(&lc.q_nl()),
                    "compatible_vertices": lc.compatible_vertices,
                    "decomposition_size": lc.weights.len(),
                })
            } else {
                let q = local_content_float(&p, tol)?;
                json!({ "q_l": float(q), "q_nl": float(1.0 - q) })
            };
            Outcome::new(results, vec![behavior])
        }
        Command::DualExpression { behavior, expression } => {
            let p: Behavior = load(&behavior)?;
            let lc = local_content(&p)?;
            if let Some(out) = &expression {
                lc.dual.save(out)?;
            }
            let coefficients: Vec<String> = lc.dual.coefficients.iter().map(format_rational).collect();
            Outcome::new(
                json!({
                    "q_l": number(&lc.q_l),
                    "value_on_behavior": number(&lc.dual.value_exact(&p)?),
                    "coefficients": coefficients,
                }),
                vec![behavior],
            )
        }
        Command::ClassicalValue { game, npa_level, list } => {
            let g: Game = load(&game)?;
            let mut report = classical_value(&g)?;
            if let Some(level) = npa_level {
                report.quantum_upper_bound = Some(npa_upper_bound(&expression_from_game(&g), level)?.value);
            }
            let shown: Vec<Value> = report
                .optimizers
                .iter()
                .take(list as usize)
                .map(|d| json!({ "alice": d.alice, "bob": d.bob }))
                .collect();
            Outcome::new(
                json!({
                    "omega_classical": number(&report.omega_classical),
                    "optimizer_count": report.optimizer_count.to_string(),
                    "optimizers": shown,
                    "omega_ns": report.omega_ns.as_ref().map(number),
                    "quantum_upper_bound": report.quantum_upper_bound.map(float),
                }),
                vec![game],
            )
        }
        Command::NsValue { input } => {
            let e = load_expression(&input)?;
            let v = ns_value(&e)?;
            Outcome::new(json!({ "ns_value": v.as_ref().map(number), "computed": v.is_some() }), vec![input])
        }
        Command::NpaBound { input, level } => {
            let e = load_expression(&input)?;
            let b = npa_upper_bound(&e, level)?;
            Outcome::new(
                json!({
                    "level": level.to_string(),
                    "upper_bound": float(b.value),
                    "attained": float(b.attained),
                    "reliable": b.reliable,
                    "iterations": b.iterations,
                }),
                vec![input],
            )
        }
        Command::NpaFeasible { zeros, level } => {
            let t: TableOfZeros = load(&zeros)?;
            let v = npa_feasible(&t, level)?;
            let witness = v.witness.as_ref().filter(|_| v.verdict == Verdict::Feasible).map(|w| {
                (0..w.rows()).map(|i| w.row(i).to_vec()).collect::<Vec<_>>()
            });
            Outcome::new(
                json!({
                    "verdict": v.verdict,
                    "level": v.level.to_string(),
                    "lambda_star": float(v.lambda_star),
                    "iterations": v.iterations,
                    "witness": witness,
                }),
                vec![zeros],
            )
            .verdict(v.verdict == Verdict::Feasible)
        }
        Command::Realizable { zeros } => {
            let t: TableOfZeros = load(&zeros)?;
            let r = is_lhv_realizable(&t);
            Outcome::new(
                json!({
                    "realizable": r.realizable,
                    "witness": r.witness.as_ref().map(|d| json!({ "alice": d.alice, "bob": d.bob })),
                }),
                vec![zeros],
            )
            .verdict(r.realizable)
        }
        Command::Critical { zeros } => {
            let t: TableOfZeros = load(&zeros)?;
            let nonlocal = !is_lhv_realizable(&t).realizable;
            let critical = is_critical(&t);
            Outcome::new(json!({ "nonlocal": nonlocal, "critical": critical, "size": t.len() }), vec![zeros])
                .verdict(critical)
        }
        Command::CntzEnum { scenario, seed, subgroup, swap_parties, tables } => {
            let s = parse_scenario(&scenario)?;
            let opts = CntzOptions { seed, use_subgroup: subgroup, swap_parties, ..Default::default() };
            let e = enumerate_cntz(&s, &opts)?;
            if let Some(out) = &tables {
                ZerosCollection(e.classes.clone()).save(out)?;
            }
            let sizes: Vec<usize> = e.classes.iter().map(TableOfZeros::len).collect();
            Outcome::new(
                json!({
                    "scenario": s,
                    "group_order": bell_group(&s).order().to_string(),
                    "classes": e.classes.len(),
                    "subset_minimal": e.subset_minimal_count,
                    "critical": e.critical_count,
                    "sizes": sizes,
                    "blue_representatives": e.blue_representatives,
                    "red_tables": e.red_tables,
                    "pretables": e.pretables,
                }),
                Vec::new(),
            )
        }
        Command::Lift { game, n, game_out } => {
            let g: Game = load(&game)?;
            let lifted = lift_game(&g, n)?;
            if let Some(out) = &game_out {
                lifted.save(out)?;
            }
            let v = classical_value(&lifted)?;
            let rank = (v.optimizers.len() as u128 == v.optimizer_count).then(|| vertex_rank(&lifted.scenario, &v.optimizers));
            let d = ns_dimension(&lifted.scenario);
            Outcome::new(
                json!({
                    "scenario": lifted.scenario,
                    "omega_classical": number(&v.omega_classical),
                    "optimizer_count": v.optimizer_count.to_string(),
                    "optimizer_rank": rank,
                    "ns_dimension": d,
                    "facet": rank.map(|r| r == d),
                }),
                vec![game],
            )
        }
        Command::Tightness { input, bound } => {
            let e = load_expression(&input)?;
            let bound = match bound {
                Some(b) => nonlocality::numerics::parse_rational(&b)?,
                None => match &e.bounds.local {
                    Some(b) => b.clone(),
                    None => nonlocality::polytope::local_maximizers(&e, DEFAULT_VERTEX_CAP, 0)?.value,
                },
            };
            let t = tightness_verdict(&e, &bound)?;
            Outcome::new(
                json!({
                    "local_bound": number(&bound),
                    "saturating_vertices": t.saturation.count,
                    "linear_rank": t.saturation.linear_rank,
                    "affine_rank": t.saturation.affine_rank,
                    "ns_dimension": t.ns_dimension,
                    "tight": t.tight,
                }),
                vec![input],
            )
            .verdict(t.tight)
        }
        Command::Builtin { name, dir } => {
            let g = builtin_game(&name)?;
            let strategy: QuantumStrategy = match name.as_str() {
                "chsh" => chsh_strategy(),
                "magic_square" => magic_square_strategy(),
                _ => pentagram_strategy(),
            };
            let p = strategy.behavior()?;
            let p = rationalize_dyadic(&p).unwrap_or(p);
            std::fs::create_dir_all(&dir)?;
            let files = [
                (dir.join(format!("{name}_game.json")), g.to_json()),
                (dir.join(format!("{name}_strategy.json")), strategy.to_json()),
                (dir.join(format!("{name}_behavior.json")), p.to_json()),
            ];
            for (path, text) in &files {
                std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            let omega = nonlocality::games::winning_probability(&g, &p)?;
            Outcome::new(
                json!({
                    "scenario": g.scenario,
                    "files": files.iter().map(|(p, _)| p.display().to_string()).collect::<Vec<_>>(),
                    "quantum_winning_probability": float(omega),
                    "behavior_exact": p.is_exact(),
                }),
                Vec::new(),
            )
        }
        Command::VerifyEquivalence { behavior, tol } => {
            let p: Behavior = load(&behavior)?;
            let r = extremality_report(&p, tol)?;
            let yes = |b: bool| if b { "yes" } else { "no" };
            Outcome::new(
                json!({
                    "FNS": yes(r.face_nonsignaling),
                    "FN": yes(r.fully_nonlocal),
                    "AVN": yes(r.nonlocal_zeros),
                    "PT": yes(r.pseudotelepathy),
                    "consistent": r.consistent(),
                    "zeros": r.zero_count,
                    "local_content": match &r.local_content_exact {
                        Some(q) => json!({ "exact": q, "decimal": format_decimal(r.local_content) }),
                        None => float(r.local_content),
                    },
                    "omega_classical": r.game_classical_value,
                    "omega_behavior": float(r.game_behavior_value),
                    "face_witness_support": r.face_witness.as_ref().map(|w| w.coefficients.iter().filter(|c| !c.is_zero()).count()),
                }),
                vec![behavior],
            )
            .verdict(r.consistent())
        }
    })
}

fn digest(paths: &[PathBuf]) -> Result<String> {
    let mut h = Sha256::new();
    for p in paths {
        h.update(std::fs::read(p).with_context(|| format!("reading {}", p.display()))?);
    }
    Ok(hex::encode(h.finalize()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not set thread count: {e}");
        }
    }
    let argv: Vec<String> = std::env::args().collect();
    let start = Instant::now();
    let outcome = match run(cli.command).and_then(|o| Ok((digest(&o.inputs)?, o))) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let (input_digest, outcome) = outcome;
    let report = json!({
        "command": argv.get(1..).unwrap_or_default(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "input_digest": input_digest,
        "results": outcome.results,
        "timing_seconds": start.elapsed().as_secs_f64(),
    });
    let text = to_pretty(&report);
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: writing report: {e}");
                    return ExitCode::from(1);
                }
            }
        }
    }
    if outcome.negative {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
