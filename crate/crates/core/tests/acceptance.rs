//! Acceptance suite. Prints one line per criterion and exits nonzero when a
//! criterion fails for a reason other than its documented analysis.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use dstl::checker::{check, CheckOptions};
use dstl::computation::Computation;
use dstl::formula::Temporal;
use dstl::kripke::{ds_frame, validate_frame};
use dstl::lab::{
    counterexample_corpus, fuzz, generate, random_formula, rule_names, trial_rng, GenParams, Rule,
};
use dstl::naive::naive_check;
use dstl::parse::{parse_dsl, parse_spec, parse_temporal};
use dstl::proof::{catalog, check_proof, mutations, parse_scripts, LemmaLibrary, Theorem};
use dstl::semantics::valid;

struct Outcome {
    pass: bool,
    detail: String,
    /// The failure consists exactly of divergences analysed in the
    /// project notes.
    documented: bool,
}

impl Outcome {
    fn ok(detail: impl Into<String>) -> Outcome {
        Outcome {
            pass: true,
            detail: detail.into(),
            documented: false,
        }
    }

    fn fail(detail: impl Into<String>, documented: bool) -> Outcome {
        Outcome {
            pass: false,
            detail: detail.into(),
            documented,
        }
    }
}

fn corpus(name: &str) -> String {
    std::fs::read_to_string(format!("{}/corpus/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn model(name: &str) -> Computation {
    Computation::from_text(&corpus(name)).unwrap()
}

fn holds(c: &Computation, t: &Temporal) -> bool {
    check(c, t, CheckOptions::default()).unwrap().holds
}

fn t(s: &str) -> Temporal {
    parse_temporal(s).unwrap()
}

/// Every bundled model except the deliberately invalid one.
const MODELS: [&str; 10] = [
    "table1.model",
    "table2.model",
    "unless_side.model",
    "stable.model",
    "se.model",
    "cancellation.model",
    "incompleteness.model",
    "d2_converse.model",
    "private_keys.model",
    "leader_election_2.model",
];

const SPECS: [&str; 5] = [
    "table1.spec",
    "table2.spec",
    "cancellation.spec",
    "private_keys.spec",
    "leader_election_2.spec",
];

fn table_verdicts() -> Outcome {
    let t1 = model("table1.model");
    let t2 = model("table2.model");
    let side = model("unless_side.model");
    let stable = model("stable.model");
    let se = model("se.model");
    let cases: Vec<(&str, bool, bool)> = vec![
        ("w -> t", holds(&t1, &t("w -> t")), true),
        ("[n] (w -> t)", holds(&t1, &t("[n] (w -> t)")), true),
        (
            "<n> true -> <n> (w -> t)",
            holds(&t1, &t("<n> true -> <n> (w -> t)")),
            true,
        ),
        ("<n> (w -> t)", holds(&t1, &t("<n> (w -> t)")), false),
        (
            "<n> u leads_to <m> u",
            holds(&t1, &t("<n> u leads_to <m> u")),
            true,
        ),
        (
            "<m> p & <n> v leads_to <m> z & <n> t",
            holds(&t1, &t("<m> p & <n> v leads_to <m> z & <n> t")),
            true,
        ),
        (
            "<m> q leads_to <n> v",
            holds(&t1, &t("<m> q leads_to <n> v")),
            true,
        ),
        (
            "<m> p & <n> v leads_to_c <m> q",
            holds(&t1, &t("<m> p & <n> v leads_to_c <m> q")),
            true,
        ),
        (
            "<n> w because <n> p & <n> u",
            holds(&t1, &t("<n> w because <n> p & <n> u")),
            true,
        ),
        (
            "<n> w because <n> (p & u)",
            holds(&t1, &t("<n> w because <n> (p & u)")),
            true,
        ),
        (
            "<n> p unless <n> t",
            holds(&t2, &t("<n> p unless <n> t")),
            true,
        ),
        ("p unless q | t", holds(&t2, &t("p unless q | t")), true),
        (
            "side condition: <n> p unless <n> q",
            holds(&side, &t("<n> p unless <n> q")),
            false,
        ),
        (
            "stable p, init p, not valid p",
            holds(&stable, &t("stable p"))
                && holds(&stable, &t("init p"))
                && !holds(&stable, &t("p")),
            true,
        ),
        (
            "SE: init <m> p, stable <m> p, [m] p",
            holds(&se, &t("init <m> p"))
                && holds(&se, &t("stable <m> p"))
                && holds(&se, &t("[m] p")),
            true,
        ),
    ];
    let wrong: Vec<&str> = cases
        .iter()
        .filter(|(_, got, want)| got != want)
        .map(|(name, ..)| *name)
        .collect();
    if wrong.is_empty() {
        Outcome::ok(format!("{} verdicts reproduce", cases.len()))
    } else {
        let documented = wrong == ["p unless q | t"];
        Outcome::fail(
            format!(
                "{}/{} verdicts differ: {}",
                wrong.len(),
                cases.len(),
                wrong.join("; ")
            ),
            documented,
        )
    }
}

const AXIOMS: [(&str, &str); 12] = [
    ("K", "[{m}]({F} -> {G}) -> ([{m}]{F} -> [{m}]{G})"),
    ("DSL1", "[{m}]([{m}]{F} <-> {F})"),
    ("DSL2", "[{m}][{n}] false"),
    ("A4", "[{m}]{F} -> [{m}][{m}]{F}"),
    ("D1", "<{m}><{m}>{F} <-> <{m}>{F}"),
    ("D2", "<{m}>({F} & {G}) -> <{m}>{F} & <{m}>{G}"),
    ("D3", "[{m}]({F} -> {G}) -> (<{m}>{F} -> <{m}>{G})"),
    ("D4", "[{m}]{F} -> (<{m}> true -> <{m}>{F})"),
    ("D5", "[{m}](<{m}>{F} <-> {F})"),
    (
        "D6",
        "[{m}]({F} -> {G}) & [{m}]({G} -> {H}) -> [{m}]({F} -> {H})",
    ),
    ("D7", "<{m}>({F} | {G}) <-> <{m}>{F} | <{m}>{G}"),
    ("D8", "[{m}](<{m}>{F} & <{m}>{G} -> <{m}>({F} & {G}))"),
];

fn random_model(rng: &mut impl Rng, p: &GenParams, max_states: usize) -> Computation {
    loop {
        let c = generate(rng, p);
        if c.num_states() <= max_states {
            return c;
        }
    }
}

fn axiom_validity() -> Outcome {
    let p = GenParams {
        components: 1..=3,
        states: 1..=4,
        ..GenParams::default()
    };
    let props = p.props();
    let mut rng = trial_rng(2, 0);
    let mut violations = Vec::new();
    let mut instances = 0;
    for _ in 0..1000 {
        let c = random_model(&mut rng, &p, 8);
        let comps = c.components().to_vec();
        for (name, schema) in AXIOMS {
            let mut pick = comps.clone();
            pick.shuffle(&mut rng);
            if schema.contains("{n}") && pick.len() < 2 {
                continue;
            }
            let mut text = schema.replace("{m}", &pick[0]);
            if let Some(n) = pick.get(1) {
                text = text.replace("{n}", n);
            }
            for meta in ["{F}", "{G}", "{H}"] {
                let depth = rng.gen_range(1..=3);
                let f = random_formula(&mut rng, &props, &comps, depth);
                text = text.replace(meta, &format!("({f})"));
            }
            let f = parse_dsl(&text).unwrap();
            instances += 1;
            if let Some(ds) = valid(&c, &f, 16).unwrap().counterexample() {
                violations.push(format!("{name}: {text} at {}", ds.display(&c)));
            }
        }
    }
    match violations.first() {
        None => Outcome::ok(format!(
            "{instances} instances on 1000 models, 0 violations"
        )),
        Some(v) => Outcome::fail(format!("{} violations, first {v}", violations.len()), false),
    }
}

fn random_temporal(rng: &mut impl Rng, props: &[String], comps: &[String]) -> Temporal {
    let d = rng.gen_range(1..=3);
    let a = random_formula(rng, props, comps, d);
    let d = rng.gen_range(1..=3);
    let b = random_formula(rng, props, comps, d);
    match rng.gen_range(0..8) {
        0 => Temporal::Plain(a),
        1 => Temporal::LeadsTo(a, b),
        2 => Temporal::Because(a, b),
        3 => Temporal::LeadsToC(a, b),
        4 => Temporal::BecauseC(a, b),
        5 => Temporal::Unless(a, b),
        6 => Temporal::Init(a),
        _ => Temporal::Stable(a),
    }
}

fn fixture_formulas(c: &Computation) -> Vec<Temporal> {
    let comps: BTreeSet<String> = c.components().iter().cloned().collect();
    let mut out: Vec<Temporal> = SPECS
        .iter()
        .flat_map(|s| parse_spec(&corpus(s), None).unwrap())
        .collect();
    out.extend(
        counterexample_corpus()
            .into_iter()
            .flat_map(|fx| fx.expected.into_iter().map(|(f, _)| f)),
    );
    out.retain(|f| f.components().is_subset(&comps));
    out
}

fn oracle_equivalence() -> Outcome {
    let mut disagreements = Vec::new();
    let mut compared = 0;
    let p = GenParams {
        components: 1..=3,
        states: 1..=3,
        labels: 3,
        ..GenParams::default()
    };
    let props = p.props();
    let mut rng = trial_rng(3, 0);
    let compare = |c: &Computation, f: &Temporal, out: &mut Vec<String>| {
        if check(c, f, CheckOptions::default()).unwrap().holds != naive_check(c, f).holds {
            out.push(format!("{f} on\n{}", c.to_model_text()));
        }
    };
    for _ in 0..200 {
        let c = random_model(&mut rng, &p, 6);
        let f = random_temporal(&mut rng, &props, c.components());
        compare(&c, &f, &mut disagreements);
        compared += 1;
    }
    for name in MODELS {
        let c = model(name);
        let props: Vec<String> = c.props().into_iter().collect();
        let mut formulas = fixture_formulas(&c);
        formulas.extend((0..25).map(|_| random_temporal(&mut rng, &props, c.components())));
        for f in &formulas {
            compare(&c, f, &mut disagreements);
            compared += 1;
        }
    }
    match disagreements.first() {
        None => Outcome::ok(format!("{compared} comparisons, 0 disagreements")),
        Some(d) => Outcome::fail(
            format!("{} disagreements, first {d}", disagreements.len()),
            false,
        ),
    }
}

fn non_theorems() -> Outcome {
    let mut wrong = Vec::new();
    let mut checked = 0;
    for fx in counterexample_corpus() {
        for (f, want) in &fx.expected {
            checked += 1;
            let got = check(&fx.model, f, CheckOptions::default()).unwrap();
            if got.holds != *want || naive_check(&fx.model, f).holds != *want {
                wrong.push(format!("{}: {f}", fx.name));
            }
            if fx.name == "incompleteness" && !*want {
                let witness = got.failing_ds.map(|d| d.display(&fx.model));
                if witness.as_deref() != Some("m.0 m.1") {
                    wrong.push(format!("incompleteness witness {witness:?}"));
                }
            }
        }
    }
    if wrong.is_empty() {
        Outcome::ok(format!("{checked} verdicts on 4 fixtures, witness m.0 m.1"))
    } else {
        Outcome::fail(wrong.join("; "), false)
    }
}

/// Registers each script of `text` on `lib`, requiring every mutation to be
/// rejected at its own line. Returns the theorems and the mutation count.
fn replay(lib: &mut LemmaLibrary, text: &str, problems: &mut Vec<String>) -> (Vec<Theorem>, usize) {
    let mut out = Vec::new();
    let mut rejected = 0;
    for s in parse_scripts(text).unwrap() {
        for m in mutations(&s) {
            match check_proof(&m.script, lib) {
                Err(e) if e.line_number() == Some(m.line) => rejected += 1,
                Err(e) => problems.push(format!(
                    "{}: {} rejected at {:?}",
                    s.name,
                    m.description,
                    e.line_number()
                )),
                Ok(_) => problems.push(format!("{}: {} accepted", s.name, m.description)),
            }
        }
        match lib.register(s.clone()) {
            Ok(l) => out.push(l.theorem.clone()),
            Err(e) => problems.push(format!("{}: {e}", s.name)),
        }
    }
    (out, rejected)
}

fn proof_replay() -> Outcome {
    let mut problems = Vec::new();
    let mut lib = LemmaLibrary::new();
    let (lemmas, m1) = replay(&mut lib, &corpus("lemmas.proofs"), &mut problems);
    let names: Vec<&str> = lemmas.iter().map(|t| t.name.as_str()).collect();
    if names
        != [
            "A4", "D1", "D2", "D3", "D4", "D5", "D6", "D7", "D8", "Cor1", "Cor2",
        ]
    {
        problems.push(format!("library proves {names:?}"));
    }
    let (keys, m2) = replay(&mut lib, &corpus("private_keys.proofs"), &mut problems);
    let concl: Vec<String> = keys.iter().map(|t| t.conclusion.to_string()).collect();
    if concl != ["[u] ~p", "<b> p leads_to <t> p"] {
        problems.push(format!("private keys conclude {concl:?}"));
    }
    let (election, m3) = replay(&mut lib, &corpus("leader_election_2.proofs"), &mut problems);
    let goal = parse_spec(&corpus("leader_election_2.spec"), None)
        .unwrap()
        .pop()
        .unwrap();
    if election.last().map(|t| &t.conclusion) != Some(&goal) {
        problems.push("leader election does not reach the global property".into());
    }
    let scripts = lemmas.len() + keys.len() + election.len();
    let total = m1 + m2 + m3;
    if problems.is_empty() {
        Outcome::ok(format!(
            "{scripts} scripts check, {total} mutations rejected at their line"
        ))
    } else {
        Outcome::fail(problems.join("; "), false)
    }
}

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const UNSOUND_CONJUNCTION: [&str; 4] = ["LCC", "BCC", "LcCC", "BcCC"];

fn rule_fuzzing() -> Outcome {
    let catalog_names: BTreeSet<String> = catalog().iter().map(|s| s.name.clone()).collect();
    let mut bad = Vec::new();
    let mut min_cover = f64::MAX;
    for name in rule_names()
        .into_iter()
        .filter(|n| catalog_names.contains(n))
    {
        let rule = Rule::resolve(&name).unwrap();
        let (mut violations, mut hits, mut low) = (0, 0, false);
        for seed in SEEDS {
            let r = fuzz(
                &rule,
                500,
                &GenParams {
                    seed,
                    ..GenParams::default()
                },
            );
            violations += r.violations;
            hits += r.corpus_hits.len();
            low |= !r.coverage_ok();
            min_cover = min_cover.min(r.non_vacuous as f64 / r.trials as f64);
        }
        if violations > 0 || hits > 0 || low {
            bad.push((name, violations, hits, low));
        }
    }
    if bad.is_empty() {
        return Outcome::ok(format!(
            "{} rules, 0 violations, min non-vacuous {:.1}%",
            catalog_names.len(),
            100.0 * min_cover
        ));
    }
    let documented =
        bad.iter().map(|b| b.0.as_str()).eq(UNSOUND_CONJUNCTION) && bad.iter().all(|b| !b.3);
    let detail = bad
        .iter()
        .map(|(n, v, h, low)| {
            format!(
                "{n}: {v} violations, {h} corpus hits{}",
                if *low { ", low coverage" } else { "" }
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome::fail(
        format!("{detail}; min non-vacuous {:.1}%", 100.0 * min_cover),
        documented,
    )
}

fn close_implies_far() -> Outcome {
    let p = GenParams::default();
    let mut rng = trial_rng(7, 0);
    let mut models: Vec<Computation> = MODELS.iter().map(|m| model(m)).collect();
    models.extend((0..500).map(|_| generate(&mut rng, &p)));
    let (mut violations, mut grounded) = (Vec::new(), 0);
    for c in &models {
        let props: Vec<String> = c
            .props()
            .into_iter()
            .chain(p.props())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for _ in 0..4 {
            let f = |rng: &mut _| random_formula(rng, &props, c.components(), 2);
            let (a, b) = (f(&mut rng), f(&mut rng));
            let pairs = [
                (
                    Temporal::LeadsToC(a.clone(), b.clone()),
                    Temporal::LeadsTo(a.clone(), b.clone()),
                ),
                (
                    Temporal::BecauseC(a.clone(), b.clone()),
                    Temporal::Because(a, b),
                ),
            ];
            for (close, far) in pairs {
                if holds(c, &close) {
                    grounded += 1;
                    if !holds(c, &far) {
                        violations.push(format!("{close} without {far}"));
                    }
                }
            }
        }
    }
    match violations.first() {
        None => Outcome::ok(format!(
            "{} models, {grounded} close premises held, 0 violations",
            models.len()
        )),
        Some(v) => Outcome::fail(format!("{} violations, first {v}", violations.len()), false),
    }
}

fn frame_validator() -> Outcome {
    // S1 = {s, s'} as component a, S2 = {s''} as component b.
    let c = Computation::from_text("component a: 2\ncomponent b: 1").unwrap();
    let km = ds_frame(&c).unwrap();
    let mut problems = Vec::new();
    if km.worlds().len() != 7 {
        problems.push(format!("{} worlds", km.worlds().len()));
    }
    if !validate_frame(&km).is_empty() {
        problems.push("base frame violates a condition".into());
    }
    let mut drop_loop = km.clone();
    drop_loop.remove_edge("a", "a.0", "a.0");
    let mut leaf_edge = km.clone();
    leaf_edge.add_edge("a", "a.0", "a.1");
    let mut cross_edge = km.clone();
    cross_edge.add_edge("b", "a.0", "b.0");
    for (want, mutant) in [(1u8, drop_loop), (2, leaf_edge), (3, cross_edge)] {
        let v = validate_frame(&mutant);
        if v.is_empty() || v.iter().any(|x| x.condition != want) {
            problems.push(format!(
                "rc{want} mutation flagged as {:?}",
                v.iter().map(|x| x.condition).collect::<Vec<_>>()
            ));
        }
    }
    if problems.is_empty() {
        Outcome::ok("7 worlds, rc1-rc3 hold, each mutation flagged with its condition")
    } else {
        Outcome::fail(problems.join("; "), false)
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 8] = [
        ("table verdicts", Duration::from_secs(1), table_verdicts),
        (
            "DSL axiom validity",
            Duration::from_secs(60),
            axiom_validity,
        ),
        (
            "oracle equivalence",
            Duration::from_secs(120),
            oracle_equivalence,
        ),
        ("known non-theorems", Duration::from_secs(10), non_theorems),
        ("proof replay", Duration::from_secs(10), proof_replay),
        (
            "rule-soundness fuzzing",
            Duration::from_secs(300),
            rule_fuzzing,
        ),
        (
            "LI/BI grounding",
            Duration::from_secs(120),
            close_implies_far,
        ),
        ("frame validator", Duration::from_secs(10), frame_validator),
    ];
    let mut unexpected = 0;
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut out = run();
        let elapsed = start.elapsed();
        if out.pass && elapsed > budget {
            out = Outcome::fail(
                format!("{} (over the {budget:?} budget)", out.detail),
                false,
            );
        }
        let status = match (out.pass, out.documented) {
            (true, _) => "PASS",
            (false, true) => "FAIL (documented)",
            (false, false) => "FAIL",
        };
        println!(
            "criterion {}: {status} {name} [{elapsed:.2?}] {}",
            i + 1,
            out.detail
        );
        if !out.pass && !out.documented {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed outside the documented analysis");
        ExitCode::FAILURE
    }
}
