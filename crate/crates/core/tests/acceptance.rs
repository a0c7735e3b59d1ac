//! End-to-end acceptance checks. Each check prints one PASS/FAIL line with
//! its runtime; the test fails if any check fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use faq_core::algebra::{
    check_semiring_axioms, Aggregate, AggregateKind, Axiom, AxiomReport, Carrier, Op, SemiringContext, Value,
    CONTEXT_NAMES,
};
use faq_core::engine::{run_insideout, EngineOptions};
use faq_core::exec::Execution;
use faq_core::frontend::{format_output, plan_rules, RuleKind};
use faq_core::hypergraph::{
    fractional_edge_cover, validate_tree_decomposition, CostModel, EdgeWeight, Hypergraph, ProjectionPolicy, TdCheck,
};
use faq_core::optimizer::{
    faqw_of_ordering, optimize_ordering, tree_decomposition, OptimizerOptions, SearchMode,
};
use faq_core::oracle::brute_force_eval;
use faq_core::ordering::VariableOrdering;
use faq_core::query::{FaqQuery, Instance, RawTable};
use faq_core::random::{random_instance, RandomConfig};
use faq_core::reductions::{
    matrix_chain_product, mcm_decode, mcm_instance, qcq_count_exhaustive, qcq_count_instance, Quantifier, Relation,
};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn r(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

fn ordering(q: &FaqQuery, names: &[&str]) -> VariableOrdering {
    let ids = names.iter().map(|n| q.var_index(n).unwrap()).collect();
    VariableOrdering::new(ids, q.num_vars(), q.free_len()).unwrap()
}

fn four_cycle() -> FaqQuery {
    let mut q = FaqQuery::new("nat-sum-prod").free("b").free("d");
    for v in ["c", "a", "e", "f", "g", "h"] {
        q = q.bound(v, "sum");
    }
    q.factor("R", &["a", "b"])
        .factor("S", &["a", "c"])
        .factor("T", &["b", "c", "d", "e"])
        .factor("U", &["d", "f"])
        .factor("V", &["e", "f"])
        .factor("W", &["e", "g"])
        .factor("Y", &["f", "h"])
}

fn example6() -> FaqQuery {
    FaqQuery::new("nat-sum-prod")
        .bound("a", "sum")
        .bound("d", "sum")
        .bound("b", "max")
        .bound("c", "sum")
        .factor("R", &["a", "b"])
        .factor("S", &["a", "c"])
        .factor("T", &["c", "d"])
}

fn timed(limit: Duration, f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    let detail = f()?;
    let elapsed = start.elapsed();
    ensure!(elapsed <= limit, "{detail}; took {elapsed:.2?}, limit {limit:?}");
    Ok(detail)
}

fn widths() -> Check {
    let mut notes = Vec::new();
    timed(Duration::from_secs(1), || {
        // Subquery of f: U(d,f), V(e,f), ψ1(f), ψ2(e), proj1(d,e) with d=0, e=1, f=2.
        let h = Hypergraph::new(0..3, vec![vec![0, 2], vec![1, 2], vec![2], vec![1], vec![0, 1]]).unwrap();
        let cover = fractional_edge_cover(&h, None).map_err(|e| e.to_string())?;
        ensure!(cover.objective == r(3, 2), "rho* = {}", cover.objective);
        for v in 0..3 {
            let total: BigRational = h
                .edges()
                .iter()
                .zip(&cover.lambda)
                .filter(|(e, _)| e.contains(v))
                .map(|(_, (_, l))| l.clone())
                .sum();
            ensure!(total >= r(1, 1), "vertex {v} covered {total}");
        }
        let half = [r(1, 2), r(1, 2), r(0, 1), r(0, 1), r(1, 2)];
        let sum: BigRational = half.iter().cloned().sum();
        ensure!(sum == cover.objective, "half cover has objective {sum}");
        notes.push("rho*=3/2".to_string());
        Ok(String::new())
    })?;
    timed(Duration::from_secs(1), || {
        let q = four_cycle();
        let sigma = ordering(&q, &["b", "d", "c", "a", "e", "f", "g", "h"]);
        let w = faqw_of_ordering(&q, &sigma).map_err(|e| e.to_string())?.width;
        ensure!(w == r(3, 2), "faqw = {w}");
        let td = tree_decomposition(&q, &sigma).map_err(|e| e.to_string())?;
        let bag = |names: &[&str]| -> BTreeSet<usize> { names.iter().map(|n| q.var_index(n).unwrap()).collect() };
        let got: BTreeSet<BTreeSet<usize>> = td.bags.iter().map(|b| b.iter().copied().collect()).collect();
        let want: BTreeSet<BTreeSet<usize>> = [
            bag(&["f", "h"]),
            bag(&["e", "g"]),
            bag(&["d", "e", "f"]),
            bag(&["a", "b", "c"]),
            bag(&["b", "c", "d", "e"]),
        ]
        .into();
        ensure!(td.bags.len() == 5 && got == want, "bags {:?}", td.bags);
        let check = validate_tree_decomposition(&td, &q.hypergraph().unwrap());
        ensure!(check == TdCheck::Pass, "decomposition invalid: {check:?}");
        notes.push("four-cycle faqw=3/2, 5 bags".into());
        Ok(String::new())
    })?;
    timed(Duration::from_secs(1), || {
        let q = example6();
        let phi = faqw_of_ordering(&q, &ordering(&q, &["a", "d", "b", "c"])).unwrap().width;
        let phi2 = faqw_of_ordering(&q, &ordering(&q, &["a", "c", "d", "b"])).unwrap().width;
        ensure!(phi == r(2, 1) && phi2 == r(1, 1), "widths {phi}, {phi2}");
        let best = optimize_ordering(
            &q,
            &OptimizerOptions {
                mode: SearchMode::Exact,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?;
        ensure!(best.width == r(1, 1), "exact search found {}", best.width);
        notes.push("faqw(phi)=2, faqw(phi')=1, exact=1".into());
        Ok(String::new())
    })?;
    Ok(notes.join("; "))
}

struct Suite {
    instances: usize,
    runs: usize,
    ablation_runs: usize,
    mismatch: Option<String>,
    ablation_mismatch: Option<String>,
    elapsed: Duration,
}

fn engine_text(inst: &Instance, sigma: &VariableOrdering, options: &EngineOptions) -> Result<String, String> {
    run_insideout(inst, sigma, options)
        .map(|r| format_output(inst, &r.output))
        .map_err(|e| e.to_string())
}

/// Random instances checked against the oracle under the identity ordering
/// and every ordering the optimizer emits, with and without projections.
fn oracle_suite() -> Suite {
    let start = Instant::now();
    let cfg = RandomConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut suite = Suite {
        instances: 0,
        runs: 0,
        ablation_runs: 0,
        mismatch: None,
        ablation_mismatch: None,
        elapsed: Duration::ZERO,
    };
    let default = EngineOptions::default();
    let ablated = EngineOptions {
        projections: ProjectionPolicy::Never,
        ..default
    };
    while suite.instances < 250 {
        let inst = random_instance(&mut rng, &cfg).expect("generator yields valid instances");
        let Ok(truth) = brute_force_eval(&inst, Execution::default()) else { continue };
        let truth = format_output(&inst, &truth);
        suite.instances += 1;
        let q = &inst.query;
        let weights = inst.hypergraph_factors().iter().map(|f| EdgeWeight::from_size(f.rows().len())).collect();
        let mut orders = vec![VariableOrdering::identity(inst.num_vars(), inst.free_len())];
        for opts in [
            OptimizerOptions::default(),
            OptimizerOptions {
                mode: SearchMode::Exact,
                ..Default::default()
            },
            OptimizerOptions {
                mode: SearchMode::Exact,
                cost: CostModel::DataAware,
                weights: Some(weights),
                ..Default::default()
            },
        ] {
            orders.push(optimize_ordering(q, &opts).expect("optimizer succeeds").ordering);
        }
        for sigma in &orders {
            let got = engine_text(&inst, sigma, &default);
            suite.runs += 1;
            if got.as_ref() != Ok(&truth) && suite.mismatch.is_none() {
                suite.mismatch = Some(format!("instance {} order {sigma}: {got:?} vs {truth:?}", suite.instances));
            }
            let ablation = engine_text(&inst, sigma, &ablated);
            suite.ablation_runs += 1;
            if ablation != got && suite.ablation_mismatch.is_none() {
                suite.ablation_mismatch = Some(format!("instance {} order {sigma}", suite.instances));
            }
        }
    }
    suite.elapsed = start.elapsed();
    suite
}

fn equivalence(suite: &Suite) -> Check {
    ensure!(suite.mismatch.is_none(), "{}", suite.mismatch.as_ref().unwrap());
    ensure!(suite.instances >= 200, "only {} instances", suite.instances);
    ensure!(suite.elapsed <= Duration::from_secs(60), "took {:.2?}", suite.elapsed);
    Ok(format!(
        "{} instances, {} engine runs equal the oracle in {:.2?}",
        suite.instances, suite.runs, suite.elapsed
    ))
}

fn ablation(suite: &Suite) -> Check {
    ensure!(suite.ablation_mismatch.is_none(), "{}", suite.ablation_mismatch.as_ref().unwrap());
    Ok(format!("{} runs without projections match the default engine", suite.ablation_runs))
}

fn triangle_bindings(n: usize, rng: &mut ChaCha8Rng) -> u64 {
    let dom = (2.0 * (n as f64).sqrt()).round() as u32;
    let q = FaqQuery::new("nat-sum-prod")
        .free("a")
        .free("b")
        .free("c")
        .factor("R", &["a", "b"])
        .factor("S", &["b", "c"])
        .factor("T", &["a", "c"]);
    let mut tables = Vec::new();
    for _ in 0..3 {
        let mut pairs = BTreeSet::new();
        while pairs.len() < n {
            pairs.insert((rng.gen_range(0..dom), rng.gen_range(0..dom)));
        }
        let mut t = RawTable::default();
        for (x, y) in pairs {
            t.push([x, y], Value::int(1));
        }
        tables.push(t);
    }
    let inst = Instance::build(q, tables).unwrap();
    let sigma = VariableOrdering::identity(3, 3);
    run_insideout(&inst, &sigma, &EngineOptions::default()).unwrap().trace.expanded_bindings()
}

fn wcoj() -> Check {
    timed(Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut counts = Vec::new();
        for n in [100usize, 400, 1600] {
            let count = triangle_bindings(n, &mut rng);
            let bound = 10.0 * (n as f64).powf(1.5);
            ensure!((count as f64) <= bound, "N={n}: {count} bindings exceed {bound}");
            counts.push(count);
        }
        for w in counts.windows(2) {
            let ratio = w[1] as f64 / w[0] as f64;
            ensure!(ratio <= 9.0, "bindings {counts:?}, ratio {ratio:.2}");
        }
        Ok(format!("bindings {counts:?} at N = 100, 400, 1600"))
    })
}

fn reductions() -> Check {
    timed(Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let identity = VariableOrdering::identity;
        for round in 0..60 {
            let len = rng.gen_range(1..=5);
            let dims: Vec<usize> = (0..=len).map(|_| rng.gen_range(1..=8)).collect();
            let ms: Vec<Vec<Vec<i64>>> = dims
                .windows(2)
                .map(|d| (0..d[0]).map(|_| (0..d[1]).map(|_| rng.gen_range(-9..=9)).collect()).collect())
                .collect();
            let inst = mcm_instance(&ms).unwrap().instance().unwrap();
            let sigma = identity(inst.num_vars(), inst.free_len());
            let out = run_insideout(&inst, &sigma, &EngineOptions::default()).unwrap().output;
            let got = mcm_decode(&inst, &out, dims[0], dims[len]).map_err(|e| e.to_string())?;
            ensure!(got == matrix_chain_product(&ms).unwrap(), "chain {round} dims {dims:?}");
        }
        let mut qcq = 0;
        for round in 0..150 {
            let nfree = rng.gen_range(1..=2);
            let nq = rng.gen_range(0..=3);
            let free: Vec<String> = (0..nfree).map(|i| format!("x{i}")).collect();
            let quants: Vec<(Quantifier, String)> = (0..nq)
                .map(|i| {
                    let q = if rng.gen_bool(0.5) { Quantifier::Exists } else { Quantifier::ForAll };
                    (q, format!("y{i}"))
                })
                .collect();
            let all: Vec<&String> = free.iter().chain(quants.iter().map(|(_, v)| v)).collect();
            let relations: Vec<Relation> = (0..rng.gen_range(1..=3))
                .map(|i| {
                    let arity = rng.gen_range(1..=2.min(all.len()));
                    let mut vars: Vec<String> = Vec::new();
                    while vars.len() < arity {
                        let v = all[rng.gen_range(0..all.len())].clone();
                        if !vars.contains(&v) {
                            vars.push(v);
                        }
                    }
                    let tuples = (0..1u32 << arity)
                        .filter(|_| rng.gen_bool(0.6))
                        .map(|bits| (0..arity).map(|j| bits >> j & 1 == 1).collect())
                        .collect();
                    Relation { name: format!("R{i}"), vars, tuples }
                })
                .collect();
            let free_refs: Vec<&str> = free.iter().map(String::as_str).collect();
            let quant_refs: Vec<(Quantifier, &str)> = quants.iter().map(|(q, v)| (*q, v.as_str())).collect();
            let inst = qcq_count_instance(&free_refs, &quant_refs, &relations).unwrap().instance().unwrap();
            let sigma = identity(inst.num_vars(), inst.free_len());
            let out = run_insideout(&inst, &sigma, &EngineOptions::default()).unwrap().output;
            let want = qcq_count_exhaustive(&free_refs, &quant_refs, &relations);
            let got = out.scalar_value(&inst.ctx);
            ensure!(got == Value::int(want as i64), "formula {round}: engine {got}, enumeration {want}");
            qcq += 1;
        }
        Ok(format!("60 matrix chains and {qcq} counting instances match"))
    })
}

fn idempotence() -> Check {
    let cfg = RandomConfig {
        contexts: vec!["bool-or-and".into()],
        product_probability: 0.5,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let on = EngineOptions::default();
    let off = EngineOptions {
        idempotence_shortcut: false,
        ..on
    };
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 150 && attempts < 10_000 {
        attempts += 1;
        let inst = random_instance(&mut rng, &cfg).unwrap();
        if !inst.aggregates.iter().flatten().any(Aggregate::is_product) {
            continue;
        }
        let sigma = optimize_ordering(&inst.query, &OptimizerOptions::default()).unwrap().ordering;
        let a = engine_text(&inst, &sigma, &on)?;
        let b = engine_text(&inst, &sigma, &off)?;
        ensure!(a == b, "instance {checked}: {a:?} vs {b:?}");
        checked += 1;
    }
    ensure!(checked == 150, "only {checked} instances had a universal variable");
    Ok(format!("{checked} Boolean queries with universal variables agree"))
}

fn axioms() -> Check {
    timed(Duration::from_secs(5), || {
        for name in CONTEXT_NAMES {
            let ctx = SemiringContext::named(name).unwrap();
            let report = check_semiring_axioms(&ctx, 200, 1).map_err(|e| e.to_string())?;
            ensure!(report == AxiomReport::Pass, "{name}: {report:?}");
        }
        let control = SemiringContext::custom(
            "nat-sum-max",
            Carrier::Nat,
            Op::Max,
            Value::int(0),
            Value::int(0),
            vec![Aggregate {
                name: "sum".into(),
                op: Op::Add,
                kind: AggregateKind::Semiring,
            }],
        );
        match check_semiring_axioms(&control, 100, 1).map_err(|e| e.to_string())? {
            AxiomReport::Violation(v)
                if v.axiom == Axiom::Distributivity && v.witness == [Value::int(1), Value::int(0), Value::int(0)] => {}
            other => return Err(format!("negative control: {other:?}")),
        }
        Ok(format!("{} contexts pass; sum/max fails distributivity at (1,0,0)", CONTEXT_NAMES.len()))
    })
}

fn plan() -> Check {
    let q = four_cycle();
    let tables = q
        .factors
        .iter()
        .map(|f| {
            let mut t = RawTable::default();
            t.push(f.vars.iter().map(|_| "1"), Value::int(1));
            t
        })
        .collect();
    let inst = Instance::build(q.clone(), tables).unwrap();
    let sigma = ordering(&q, &["b", "d", "c", "a", "e", "f", "g", "h"]);
    let trace = run_insideout(&inst, &sigma, &EngineOptions::default()).unwrap().trace;
    let rules = plan_rules(&q, &trace);
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let expected: [(&str, RuleKind, &[&str]); 10] = [
        ("psi1", RuleKind::Aggregate, &["Y"]),
        ("psi2", RuleKind::Aggregate, &["W"]),
        ("proj1", RuleKind::Projection, &["T"]),
        ("psi3", RuleKind::Aggregate, &["U", "V", "psi1", "psi2", "proj1"]),
        ("proj2", RuleKind::Projection, &["R"]),
        ("proj3", RuleKind::Projection, &["S"]),
        ("psi4", RuleKind::Aggregate, &["psi3", "T", "proj2", "proj3"]),
        ("proj4", RuleKind::Projection, &["psi4"]),
        ("psi5", RuleKind::Aggregate, &["R", "S", "proj4"]),
        ("output", RuleKind::Aggregate, &["psi4", "psi5"]),
    ];
    ensure!(rules.len() == expected.len(), "{} rules", rules.len());
    for (rule, (head, kind, body)) in rules.iter().zip(expected) {
        ensure!(
            rule.head == head && rule.kind == kind && set(&rule.body.iter().map(String::as_str).collect::<Vec<_>>()) == set(body),
            "rule `{}` does not match {head} <- {body:?}",
            rule.text
        );
    }
    let heads = |k| rules.iter().filter(|r| r.kind == k).count();
    Ok(format!(
        "{} aggregate rules (psi1..psi5 and output), {} projection rules",
        heads(RuleKind::Aggregate),
        heads(RuleKind::Projection)
    ))
}

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    let mut report = |n: usize, name: &str, f: &dyn Fn() -> Check| {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        match result {
            Ok(detail) => println!("criterion {n} ({name}): PASS [{elapsed:.2?}] {detail}"),
            Err(why) => {
                println!("criterion {n} ({name}): FAIL [{elapsed:.2?}] {why}");
                failed.push(n);
            }
        }
    };
    let suite = catch_unwind(oracle_suite).ok();
    let missing = || Err("oracle suite panicked".to_string());
    report(1, "width goldens", &widths);
    report(2, "oracle equivalence", &|| suite.as_ref().map_or_else(missing, equivalence));
    report(3, "projection ablation", &|| suite.as_ref().map_or_else(missing, ablation));
    report(4, "worst-case optimal join", &wcoj);
    report(5, "reductions", &reductions);
    report(6, "idempotence shortcut", &idempotence);
    report(7, "semiring axioms", &axioms);
    report(8, "plan golden", &plan);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
