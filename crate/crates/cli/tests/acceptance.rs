//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `cargo test --test acceptance -- --nocapture` to see
//! them). The corpus of random instances is generated once and shared.

use std::collections::BTreeMap;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_bigint::BigInt;

use lct_core::constellation::{Branch, Constellation, CurveSpec, PointId};
use lct_core::gen::{branch_from_beta, example_figure1, random_spec, BranchRecipe, GenConfig};
use lct_core::invariants::{beta, contact_pair, point_sets};
use lct_core::lct::{Analysis, Rat, VertexKind};
use lct_core::verify::{check_instance, InstanceSummary};

fn rat64(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

fn pass(criterion: &str, detail: String) {
    println!("criterion {criterion}: PASS - {detail}");
}

fn fail(criterion: &str, detail: String) -> ! {
    println!("criterion {criterion}: FAIL - {detail}");
    panic!("criterion {criterion} failed: {detail}");
}

#[test]
fn acceptance_1_worked_example_threshold() {
    let start = Instant::now();
    let spec = example_figure1();
    let report = lct_core::reconcile(&spec).expect("fixture reconciles");
    let elapsed = start.elapsed();

    if report.lct != rat64(11, 134) {
        fail("1", format!("lct {} != 11/134", report.lct));
    }
    if report.distinguished_vertex != Some(PointId::new(7)) {
        fail(
            "1",
            format!("vertex {:?} != v7", report.distinguished_vertex),
        );
    }
    if report.vertex_kind != Some(VertexKind::TerminalSatellite) {
        fail("1", format!("kind {:?}", report.vertex_kind));
    }
    let sigma = report.sigma_table.as_ref().unwrap();
    let expectations = [(2usize, -17i64), (8, 14)];
    for (v, want) in expectations {
        let got = sigma.get(PointId::new(v));
        if got != &rat64(want, 1) {
            fail("1", format!("sigma(v{v}) = {got} != {want}"));
        }
    }
    // at v7 the weight is 2*2 + 2*1 - (5+3+2+2+1+1) = -8
    let s7 = sigma.get(PointId::new(7));
    if s7 != &rat64(-8, 1) || s7 >= &Rat::new(0.into(), 1.into()) {
        fail("1", format!("sigma(v7) = {s7} != -8"));
    }
    if elapsed >= Duration::from_secs(1) {
        fail("1", format!("runtime {elapsed:?} exceeds 1 s"));
    }
    pass(
        "1",
        format!(
            "lct 11/134 at v7 (terminal_satellite), sigma(v2)=-17, sigma(v7)=-8, \
             sigma(v8)=14, runtime {elapsed:?}"
        ),
    );
}

#[test]
fn acceptance_2_worked_example_invariants() {
    let spec = example_figure1();
    let expected_beta = [
        (5, 17),
        (3, 11),
        (2, 11),
        (2, 13),
        (2, 5),
        (1, 6),
        (1, 6),
        (1, 3),
    ];
    for (i, (b0, b1)) in expected_beta.iter().enumerate() {
        let got = beta(&spec, i).unwrap();
        if got != (BigInt::from(*b0), BigInt::from(*b1)) {
            fail("2", format!("beta of branch {} is {:?}", i + 1, got));
        }
    }
    let sets = point_sets(&spec).unwrap();
    let as_set = |v: &[usize]| {
        v.iter()
            .map(|&i| PointId::new(i))
            .collect::<std::collections::BTreeSet<_>>()
    };
    if sets.s != as_set(&[2, 4, 15]) {
        fail("2", format!("S = {:?}", sets.s));
    }
    if sets.t != as_set(&[7, 8, 11, 13, 17]) {
        fail("2", format!("T = {:?}", sets.t));
    }
    let graph = lct_core::dualgraph::build_dual_graph(&spec).unwrap();
    let families = lct_core::dualgraph::vertex_families(&spec, &graph, &sets);
    if families.v != as_set(&[2, 4, 7, 8, 11, 13, 15, 17]) {
        fail("2", format!("V = {:?}", families.v));
    }
    let pair = contact_pair(&spec, 0, 2).unwrap();
    if (pair.q, pair.c) != (0, 4) {
        fail("2", format!("contact of (1,3) is {pair:?}"));
    }
    for (s, want) in [(1usize, 51i64), (4, 20), (7, 10)] {
        let got = spec.intersection_number(0, s).unwrap();
        if got != BigInt::from(want) {
            fail("2", format!("I(1,{}) = {got} != {want}", s + 1));
        }
    }
    pass(
        "2",
        "beta pairs, S, T, V, contact (0,4), intersections 51/20/10 all exact".into(),
    );
}

#[test]
fn acceptance_3_single_branch_law() {
    let start = Instant::now();
    let mut checked = 0usize;
    for beta0 in 2u64..=12 {
        for beta1 in beta0 + 1..=60 {
            if num_integer::gcd(beta0, beta1) != 1 {
                continue;
            }
            let (records, branch) =
                branch_from_beta(BranchRecipe::OnePair { beta0, beta1 }).unwrap();
            let c = Constellation::from_records(records).unwrap();
            let spec = CurveSpec::new(c, vec![branch]).unwrap();
            // reconcile enforces formula == divisorial == restricted minimum
            let report = match lct_core::reconcile(&spec) {
                Ok(r) => r,
                Err(e) => fail("3", format!("({beta0},{beta1}): {e}")),
            };
            let expected = Rat::new(
                BigInt::from(beta0 + beta1),
                BigInt::from(beta0) * BigInt::from(beta1),
            );
            if report.lct != expected {
                fail(
                    "3",
                    format!("({beta0},{beta1}): lct {} != {expected}", report.lct),
                );
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(30) {
        fail("3", format!("runtime {elapsed:?} exceeds 30 s"));
    }
    pass(
        "3",
        format!("{checked} coprime pairs match 1/b0 + 1/b1 with all methods agreeing, runtime {elapsed:?}"),
    );
}

struct Corpus {
    results: Vec<(u64, Result<InstanceSummary, String>)>,
    elapsed: Duration,
}

fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let start = Instant::now();
        let results = (0..1000u64)
            .map(|seed| {
                let spec = random_spec(&GenConfig {
                    seed,
                    max_points: 40,
                    max_branches: 6,
                })
                .expect("generator succeeds");
                (seed, check_instance(&spec))
            })
            .collect();
        Corpus {
            results,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn acceptance_4_oracle_equivalence() {
    let corpus = corpus();
    let mut vt = 0usize;
    let mut vs = 0usize;
    for (seed, result) in &corpus.results {
        match result {
            Ok(summary) => match summary.vertex_kind {
                VertexKind::TerminalSatellite => vt += 1,
                VertexKind::InitialSeparating => vs += 1,
            },
            Err(e) => fail("4", format!("seed {seed} disagrees:\n{e}")),
        }
    }
    if vt < 50 || vs < 50 {
        fail(
            "4",
            format!("case coverage too thin: {vt} terminal, {vs} separating"),
        );
    }
    if corpus.elapsed >= Duration::from_secs(300) {
        fail("4", format!("runtime {:?} exceeds 5 min", corpus.elapsed));
    }
    pass(
        "4",
        format!(
            "1000 instances, zero disagreements, {vt} terminal-satellite and {vs} \
             initial-separating cases, runtime {:?}",
            corpus.elapsed
        ),
    );
}

#[test]
fn acceptance_5_two_branch_conformance() {
    let mut cases: BTreeMap<String, usize> = BTreeMap::new();
    for seed in 0..300u64 {
        let spec = random_spec(&GenConfig {
            seed,
            max_points: 40,
            max_branches: 2,
        })
        .expect("generator succeeds");
        if spec.branch_count() != 2 {
            fail(
                "5",
                format!("seed {seed} produced {} branches", spec.branch_count()),
            );
        }
        match check_instance(&spec) {
            Ok(summary) => {
                let case = summary.two_branch_case.expect("two-branch case recorded");
                *cases.entry(format!("{case:?}")).or_default() += 1;
            }
            Err(e) => fail("5", format!("seed {seed} disagrees:\n{e}")),
        }
    }
    let names = [
        "NotFreelySeparatedHigh",
        "NotFreelySeparatedLow",
        "FreelyBalanced",
        "FreelyFirstDominates",
        "FreelySecondDominates",
    ];
    for name in names {
        let count = cases.get(name).copied().unwrap_or(0);
        if count < 10 {
            fail("5", format!("sub-case {name} occurred only {count} times"));
        }
    }
    pass(
        "5",
        format!("300 two-branch instances, sub-case counts {cases:?}"),
    );
}

#[test]
fn acceptance_6_property_suite() {
    let corpus = corpus();
    let mut failures = Vec::new();
    for (seed, result) in &corpus.results {
        if let Err(e) = result {
            failures.push(format!("seed {seed}:\n{e}"));
        }
    }
    if !failures.is_empty() {
        fail(
            "6",
            format!(
                "{} instances broke an identity:\n{}",
                failures.len(),
                failures.join("\n")
            ),
        );
    }
    pass(
        "6",
        "case analysis, candidate identities, arrow splits, weight monotonicity and \
         constancy, distinguished-vertex conditions, family cross-checks: all hold on \
         the 1000-instance corpus"
            .into(),
    );
}

#[test]
fn acceptance_7_extensions() {
    let mut lines = Vec::new();
    let mut failed = Vec::new();

    // multiplicities all 1 reduce to the reduced value
    let (records, branch) = branch_from_beta(BranchRecipe::OnePair { beta0: 2, beta1: 3 }).unwrap();
    let cusp = Constellation::from_records(records).unwrap();
    let reduced_spec = CurveSpec::new(cusp.clone(), vec![branch.clone()]).unwrap();
    let reduced_value = lct_core::lct(&reduced_spec).unwrap();
    let unit_mult = CurveSpec::new(
        cusp.clone(),
        vec![Branch::with_multiplicity("C1", branch.at, 1)],
    )
    .unwrap();
    let unit_value = lct_core::lct_nonreduced(&unit_mult).unwrap();
    if unit_value == reduced_value {
        lines.push("unit multiplicities reduce to 5/6".to_string());
    } else {
        failed.push(format!("unit multiplicities gave {unit_value}"));
    }

    // complete ideal of the cusp, exponent 1, confirmed by the oracle on
    // the augmented constellation
    let mut exps = BTreeMap::new();
    exps.insert(PointId::new(3), 1u64);
    let ideal1 = lct_core::lct_complete_ideal(&cusp, &exps).unwrap();
    let oracle1 = Analysis::new(&reduced_spec)
        .unwrap()
        .lct_divisorial()
        .unwrap()
        .0;
    if ideal1.lct == rat64(5, 6) && ideal1.lct == oracle1 {
        lines.push("ideal exponent 1 gives 5/6 = oracle".to_string());
    } else {
        failed.push(format!("ideal exponent 1 gave {}", ideal1.lct));
    }

    // exponent 3: min(1/3, lct of three cusp curvettes), oracle-confirmed
    let mut exps3 = BTreeMap::new();
    exps3.insert(PointId::new(3), 3u64);
    let ideal3 = lct_core::lct_complete_ideal(&cusp, &exps3).unwrap();
    let three_cusps = CurveSpec::new(
        cusp.clone(),
        (0..3)
            .map(|k| Branch::new(format!("A{k}"), PointId::new(3)))
            .collect(),
    )
    .unwrap();
    let three_value = lct_core::lct(&three_cusps).unwrap();
    let oracle3 = Analysis::new(&three_cusps)
        .unwrap()
        .lct_divisorial()
        .unwrap()
        .0;
    let expected3 = rat64(1, 3).min(three_value.clone());
    if ideal3.lct == expected3 && ideal3.lct == oracle3 && ideal3.lct == rat64(5, 18) {
        lines.push("ideal exponent 3 gives min(1/3, 5/18) = 5/18 = oracle".to_string());
    } else {
        failed.push(format!("ideal exponent 3 gave {}", ideal3.lct));
    }

    // the stated tenfold-cusp value; the implemented extension follows
    // min(1/n, lct of n distinct curvettes) and the multiplier-ideal
    // scaling lct(n*C) = lct(C)/n, both of which give 1/12 here: ten
    // curvettes have valuation vector 10*(2,3,6), so the candidates are
    // 2/20, 3/30 and 5/60 = 1/12 < 1/10. The required value 1/10 is not
    // attainable by the stated formula; this check is expected to fail
    // and is kept as stated.
    let tenfold = CurveSpec::new(
        cusp.clone(),
        vec![Branch::with_multiplicity("C1", PointId::new(3), 10)],
    )
    .unwrap();
    let tenfold_value = lct_core::lct_nonreduced(&tenfold).unwrap();
    if tenfold_value == rat64(1, 10) {
        lines.push("tenfold cusp gives 1/10".to_string());
    } else {
        failed.push(format!(
            "tenfold cusp: required 1/10 exactly, computed {tenfold_value}; \
             min(1/10, lct of ten cusp curvettes)) = min(1/10, 5/60) = 1/12 and \
             lct((f^10)) = lct(f)/10 = (5/6)/10 = 1/12, so the required value \
             contradicts the defining formula and the divisorial oracle"
        ));
    }

    if failed.is_empty() {
        pass("7", lines.join("; "));
    } else {
        fail(
            "7",
            format!(
                "{} (passing parts: {})",
                failed.join("; "),
                lines.join("; ")
            ),
        );
    }
}

#[test]
fn acceptance_8_byte_determinism() {
    let bin = env!("CARGO_BIN_EXE_lct");
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("figure1.json");
    let spec = example_figure1();

    // serialize the fixture through the documented input schema
    let mut points = Vec::new();
    for r in spec.constellation.records() {
        let mut entry = serde_json::Map::new();
        entry.insert("id".into(), r.id.index().into());
        if let Some(p) = r.parent {
            entry.insert("parent".into(), p.index().into());
        }
        if let Some(s) = r.satellite_of {
            entry.insert("satellite_of".into(), s.index().into());
        }
        points.push(serde_json::Value::Object(entry));
    }
    let branches: Vec<serde_json::Value> = spec
        .branches
        .iter()
        .map(|b| serde_json::json!({"name": b.name, "at": b.at.index()}))
        .collect();
    let doc = serde_json::json!({"version": 1, "points": points, "branches": branches});
    std::fs::write(&input, serde_json::to_string_pretty(&doc).unwrap()).unwrap();

    let run = |args: &[&str]| -> (Vec<u8>, std::process::ExitStatus) {
        let out = Command::new(bin).args(args).output().expect("binary runs");
        (out.stdout, out.status)
    };

    let input_str = input.to_str().unwrap();
    let (a, status_a) = run(&["compute", input_str, "--deterministic"]);
    let (b, status_b) = run(&["compute", input_str, "--deterministic"]);
    if !status_a.success() || !status_b.success() || a != b {
        fail("8", "compute output differs between identical runs".into());
    }
    // the emitted fraction re-parses to the library value
    let parsed: serde_json::Value = serde_json::from_slice(&a).unwrap();
    if parsed["lct"]["num"] != "11" || parsed["lct"]["den"] != "134" {
        fail(
            "8",
            format!(
                "emitted lct {:?} does not re-parse to 11/134",
                parsed["lct"]
            ),
        );
    }

    let dots_a = dir.path().join("dots_a");
    let dots_b = dir.path().join("dots_b");
    run(&["dot", input_str, "--out", dots_a.to_str().unwrap()]);
    run(&["dot", input_str, "--out", dots_b.to_str().unwrap()]);
    for name in ["dual.dot", "proximity.dot"] {
        let x = std::fs::read(dots_a.join(name)).unwrap();
        let y = std::fs::read(dots_b.join(name)).unwrap();
        if x.is_empty() || x != y {
            fail("8", format!("{name} differs between identical runs"));
        }
    }

    let (g1, _) = run(&["gen", "--seed", "11", "--count", "3", "--deterministic"]);
    let (g2, _) = run(&["gen", "--seed", "11", "--count", "3", "--deterministic"]);
    if g1.is_empty() || g1 != g2 {
        fail("8", "gen summary differs between identical runs".into());
    }

    let (inv1, _) = run(&["invariants", input_str, "--deterministic"]);
    let (inv2, _) = run(&["invariants", input_str, "--deterministic"]);
    if inv1 != inv2 {
        fail("8", "invariants output differs".into());
    }

    pass(
        "8",
        "compute, dot, gen and invariants outputs are byte-identical across runs".into(),
    );
}
