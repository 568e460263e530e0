//! Random models, rule-soundness fuzzing and the fixed counterexample
//! corpus.

mod corpus;
mod fuzz;
mod gen;

pub use corpus::{counterexample_corpus, Fixture};
pub use fuzz::{
    evaluate, fuzz, fuzz_rule, rule_names, shrink, Counterexample, Instance, Outcome, Rule,
    RuleReport, UnknownRule, ATTEMPTS, KNOWN_INVALID,
};
pub use gen::{generate, random_computation, random_formula, trial_rng, GenParams};
