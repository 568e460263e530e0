//! Rule-soundness fuzzing: random models, random instantiations, and a
//! conclusion check whenever every premise holds.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::checker::{check, CheckOptions};
use crate::computation::{Computation, ComputationDecl};
use crate::formula::{and, or, Dsl, Temporal};
use crate::proof::{box_elim, catalog, general_cancellation, instantiate, Schema};

use super::corpus::counterexample_corpus;
use super::gen::{generate, random_formula, trial_rng, GenParams};

/// Instantiations tried per trial before the trial counts as vacuous.
pub const ATTEMPTS: usize = 30;

/// Rules outside the catalog that are expected to produce violations.
pub const KNOWN_INVALID: [&str; 2] = ["GeneralCancellation", "BoxElim"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown rule `{0}`")]
pub struct UnknownRule(pub String);

/// A rule as the fuzzer sees it. BoxElim has one premise per component of
/// the model at hand, so its schema is built per model.
#[derive(Debug, Clone)]
pub enum Rule {
    Schema(Schema),
    BoxElim,
}

impl Rule {
    pub fn resolve(name: &str) -> Result<Rule, UnknownRule> {
        if name == "BoxElim" {
            return Ok(Rule::BoxElim);
        }
        if name == "GeneralCancellation" {
            return Ok(Rule::Schema(general_cancellation()));
        }
        catalog()
            .iter()
            .find(|s| s.name == name)
            .map(|s| Rule::Schema(s.clone()))
            .ok_or_else(|| UnknownRule(name.to_string()))
    }

    pub fn name(&self) -> &str {
        match self {
            Rule::Schema(s) => &s.name,
            Rule::BoxElim => "BoxElim",
        }
    }

    fn schema_for(&self, c: &Computation) -> Schema {
        match self {
            Rule::Schema(s) => s.clone(),
            Rule::BoxElim => box_elim(c.components()),
        }
    }
}

/// Catalog rules in catalog order, then the known-invalid rules.
pub fn rule_names() -> Vec<String> {
    catalog()
        .iter()
        .map(|s| s.name.clone())
        .chain(KNOWN_INVALID.iter().map(|s| s.to_string()))
        .collect()
}

/// Metavariable assignment for one trial.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instance {
    pub formulas: BTreeMap<String, Dsl>,
    pub comps: BTreeMap<String, String>,
}

impl Instance {
    pub fn premises(&self, s: &Schema) -> Vec<Temporal> {
        s.premises
            .iter()
            .map(|p| instantiate(p, &self.formulas, &self.comps))
            .collect()
    }

    pub fn conclusion(&self, s: &Schema) -> Temporal {
        instantiate(&s.conclusion, &self.formulas, &self.comps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Some premise fails.
    Vacuous,
    Sound,
    Violated,
}

fn opts() -> CheckOptions {
    CheckOptions { cap: 64, jobs: 1 }
}

fn holds(c: &Computation, t: &Temporal) -> bool {
    check(c, t, opts())
        .expect("generated models fit the cap")
        .holds
}

pub fn evaluate(s: &Schema, inst: &Instance, c: &Computation) -> Outcome {
    if !inst.premises(s).iter().all(|p| holds(c, p)) {
        Outcome::Vacuous
    } else if holds(c, &inst.conclusion(s)) {
        Outcome::Sound
    } else {
        Outcome::Violated
    }
}

fn random_instance(
    rng: &mut impl Rng,
    s: &Schema,
    c: &Computation,
    props: &[String],
) -> Option<Instance> {
    let comps = c.components();
    let mut inst = Instance::default();
    if s.injective {
        let mut pool = comps.to_vec();
        pool.shuffle(rng);
        if pool.len() < s.comp_params.len() {
            return None;
        }
        inst.comps = s.comp_params.iter().cloned().zip(pool).collect();
    } else {
        for p in &s.comp_params {
            inst.comps
                .insert(p.clone(), comps.choose(rng).unwrap().clone());
        }
    }
    if s.distinct
        .iter()
        .any(|(a, b)| inst.comps[a] == inst.comps[b])
    {
        return None;
    }
    // Components named by the schema are preferred as locations.
    let mut locs: Vec<String> = inst.comps.values().cloned().collect();
    if locs.is_empty() || rng.gen_bool(0.3) {
        locs = comps.to_vec();
    }
    for f in &s.formula_params {
        let prev = inst
            .formulas
            .values()
            .cloned()
            .collect::<Vec<_>>()
            .choose(rng)
            .cloned();
        let value = match prev {
            Some(prev) if rng.gen_bool(0.15) => prev,
            // Rules relate their metavariables, so a later one is sometimes
            // built on an earlier one.
            Some(prev) if prev.depth() < 3 && rng.gen_bool(0.5) => {
                let depth = rng.gen_range(1..=2);
                let extra = random_formula(rng, props, &locs, depth);
                if rng.gen_bool(0.5) {
                    and(prev, extra)
                } else {
                    or(prev, extra)
                }
            }
            _ => {
                let depth = rng.gen_range(1..=3);
                random_formula(rng, props, &locs, depth)
            }
        };
        inst.formulas.insert(f.clone(), value);
    }
    Some(inst)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub trial: u64,
    /// The shrunk model, in model-file format.
    pub model: String,
    pub bindings: BTreeMap<String, String>,
    pub premises: Vec<String>,
    pub conclusion: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleReport {
    pub rule: String,
    pub seed: u64,
    pub trials: usize,
    pub non_vacuous: usize,
    pub violations: usize,
    /// The first violating trial, shrunk.
    pub counterexample: Option<Counterexample>,
    /// Counterexample-corpus fixtures on which the rule fails, either under
    /// a recorded instantiation or a random one.
    pub corpus_hits: Vec<String>,
}

impl RuleReport {
    /// At least 5% of trials exercised the conclusion.
    pub fn coverage_ok(&self) -> bool {
        self.non_vacuous * 20 >= self.trials
    }

    pub fn expected_invalid(&self) -> bool {
        KNOWN_INVALID.contains(&self.rule.as_str())
    }

    /// Sound rules show no violation anywhere; known-invalid rules show one
    /// somewhere.
    pub fn as_expected(&self) -> bool {
        let violated = self.violations > 0 || !self.corpus_hits.is_empty();
        violated == self.expected_invalid()
    }
}

struct Trial {
    non_vacuous: bool,
    violation: Option<(Computation, Instance)>,
}

fn run_trial(rule: &Rule, p: &GenParams, index: u64) -> Trial {
    let mut rng = trial_rng(p.seed, index);
    let c = generate(&mut rng, p);
    let s = rule.schema_for(&c);
    let props = p.props();
    let attempts = if s.premises.is_empty() && s.formula_params.is_empty() {
        1
    } else {
        ATTEMPTS
    };
    for _ in 0..attempts {
        let Some(inst) = random_instance(&mut rng, &s, &c, &props) else {
            continue;
        };
        match evaluate(&s, &inst, &c) {
            Outcome::Vacuous => continue,
            Outcome::Sound => {
                return Trial {
                    non_vacuous: true,
                    violation: None,
                }
            }
            Outcome::Violated => {
                return Trial {
                    non_vacuous: true,
                    violation: Some((c, inst)),
                }
            }
        }
    }
    Trial {
        non_vacuous: false,
        violation: None,
    }
}

/// Fixtures of the counterexample corpus on which `rule` fails. Random
/// instantiations draw from streams disjoint from the trials'.
fn corpus_hits(rule: &Rule, p: &GenParams) -> Vec<String> {
    let props = p.props();
    let mut hits = Vec::new();
    for (i, fx) in counterexample_corpus().into_iter().enumerate() {
        let c = &fx.model;
        let s = rule.schema_for(c);
        let mut recorded: Vec<Instance> = fx
            .instances
            .iter()
            .filter(|(r, _)| *r == rule.name())
            .map(|(_, inst)| inst.clone())
            .collect();
        for inst in &mut recorded {
            for param in &s.comp_params {
                inst.comps
                    .entry(param.clone())
                    .or_insert_with(|| param.clone());
            }
        }
        let mut rng = trial_rng(p.seed, u64::MAX - i as u64);
        let random = (0..ATTEMPTS).filter_map(|_| random_instance(&mut rng, &s, c, &props));
        if recorded
            .into_iter()
            .chain(random)
            .any(|inst| evaluate(&s, &inst, c) == Outcome::Violated)
        {
            hits.push(fx.name.to_string());
        }
    }
    hits
}

/// Runs `trials` independent trials plus the corpus pass; results depend
/// only on the seed.
pub fn fuzz(rule: &Rule, trials: usize, p: &GenParams) -> RuleReport {
    let results: Vec<Trial> = (0..trials as u64)
        .into_par_iter()
        .map(|i| run_trial(rule, p, i))
        .collect();
    let counterexample = results.iter().enumerate().find_map(|(i, t)| {
        let (c, inst) = t.violation.as_ref()?;
        let small = shrink(rule, c, inst);
        let s = rule.schema_for(&small);
        Some(Counterexample {
            trial: i as u64,
            model: small.to_model_text(),
            bindings: inst
                .comps
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .chain(
                    inst.formulas
                        .iter()
                        .map(|(k, v)| (k.clone(), v.to_string())),
                )
                .collect(),
            premises: inst.premises(&s).iter().map(|t| t.to_string()).collect(),
            conclusion: inst.conclusion(&s).to_string(),
        })
    });
    RuleReport {
        rule: rule.name().to_string(),
        seed: p.seed,
        trials,
        non_vacuous: results.iter().filter(|t| t.non_vacuous).count(),
        violations: results.iter().filter(|t| t.violation.is_some()).count(),
        counterexample,
        corpus_hits: corpus_hits(rule, p),
    }
}

pub fn fuzz_rule(name: &str, trials: usize, p: &GenParams) -> Result<RuleReport, UnknownRule> {
    Ok(fuzz(&Rule::resolve(name)?, trials, p))
}

/// Single-step reductions of a model: drop a message, a label, or a state.
fn reductions(d: &ComputationDecl) -> Vec<ComputationDecl> {
    let mut out = Vec::new();
    for i in 0..d.messages.len() {
        let mut e = d.clone();
        e.messages.remove(i);
        out.push(e);
    }
    for (i, (_, props)) in d.labels.iter().enumerate() {
        for j in 0..props.len() {
            let mut e = d.clone();
            e.labels[i].1.remove(j);
            out.push(e);
        }
    }
    for (k, (name, len)) in d.components.iter().enumerate() {
        if *len < 2 {
            continue;
        }
        for idx in 0..*len {
            let mut e = d.clone();
            e.components[k].1 -= 1;
            let keep = |s: &(String, usize)| !(s.0 == *name && s.1 == idx);
            let shift = |s: &mut (String, usize)| {
                if s.0 == *name && s.1 > idx {
                    s.1 -= 1;
                }
            };
            e.labels.retain(|(s, _)| keep(s));
            e.labels.iter_mut().for_each(|(s, _)| shift(s));
            e.messages.retain(|(a, b)| keep(a) && keep(b));
            e.messages.iter_mut().for_each(|(a, b)| {
                shift(a);
                shift(b);
            });
            out.push(e);
        }
    }
    out
}

/// Greedy deletion of states, labels and messages while the violation
/// persists under the same instantiation.
pub fn shrink(rule: &Rule, c: &Computation, inst: &Instance) -> Computation {
    let mut cur = c.clone();
    'outer: loop {
        for d in reductions(&cur.to_decl()) {
            let Ok(next) = Computation::build(&d) else {
                continue;
            };
            if evaluate(&rule.schema_for(&next), inst, &next) == Outcome::Violated {
                cur = next;
                continue 'outer;
            }
        }
        return cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_dsl;

    fn cancellation() -> Computation {
        Computation::from_text(include_str!("../../corpus/cancellation.model")).unwrap()
    }

    fn cancellation_instance() -> Instance {
        let f = |s: &str| parse_dsl(s).unwrap();
        Instance {
            formulas: BTreeMap::from([
                ("F".to_string(), f("<m> p")),
                ("F1".to_string(), f("<m> p & <n> q")),
                ("G".to_string(), f("<m> r & <n> s")),
            ]),
            comps: BTreeMap::new(),
        }
    }

    #[test]
    fn unknown_rules_are_rejected() {
        assert_eq!(
            fuzz_rule("Frobnicate", 1, &GenParams::default()).unwrap_err(),
            UnknownRule("Frobnicate".into())
        );
        assert_eq!(rule_names().len(), catalog().len() + 2);
    }

    #[test]
    fn general_cancellation_fails_on_the_fixed_model() {
        let s = general_cancellation();
        assert_eq!(
            evaluate(&s, &cancellation_instance(), &cancellation()),
            Outcome::Violated
        );
        let r = fuzz_rule("GeneralCancellation", 20, &GenParams::default()).unwrap();
        assert!(r.corpus_hits.contains(&"cancellation".to_string()));
        assert!(r.as_expected());
    }

    #[test]
    fn box_elimination_fails_on_the_incompleteness_model() {
        let r = fuzz_rule("BoxElim", 5, &GenParams::default()).unwrap();
        assert!(r.corpus_hits.contains(&"incompleteness".to_string()));
    }

    #[test]
    fn shrunk_counterexamples_still_fail() {
        let rule = Rule::resolve("GeneralCancellation").unwrap();
        let small = shrink(&rule, &cancellation(), &cancellation_instance());
        assert!(small.num_states() <= cancellation().num_states());
        assert_eq!(
            evaluate(&general_cancellation(), &cancellation_instance(), &small),
            Outcome::Violated
        );
        let again = Computation::from_text(&small.to_model_text()).unwrap();
        assert_eq!(
            evaluate(&general_cancellation(), &cancellation_instance(), &again),
            Outcome::Violated
        );
    }

    #[test]
    fn fuzzing_is_deterministic() {
        let p = GenParams {
            seed: 3,
            ..GenParams::default()
        };
        assert_eq!(
            fuzz_rule("Conf", 40, &p).unwrap(),
            fuzz_rule("Conf", 40, &p).unwrap()
        );
    }

    #[test]
    fn axioms_are_never_vacuous() {
        let r = fuzz_rule("K", 20, &GenParams::default()).unwrap();
        assert_eq!(r.non_vacuous, 20);
        assert_eq!(r.violations, 0);
    }
}
