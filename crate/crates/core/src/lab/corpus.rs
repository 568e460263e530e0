//! Fixed models on which intuitively plausible claims fail.

use std::collections::BTreeMap;

use crate::computation::Computation;
use crate::formula::Temporal;
use crate::parse::{parse_dsl, parse_temporal};

use super::fuzz::Instance;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub model: Computation,
    /// Formulae with their expected verdicts on `model`.
    pub expected: Vec<(Temporal, bool)>,
    /// Rule instantiations known to fail on `model`, by rule name.
    pub instances: Vec<(&'static str, Instance)>,
}

fn fixture(name: &'static str, text: &str, expected: &[(&str, bool)]) -> Fixture {
    Fixture {
        name,
        model: Computation::from_text(text).expect("bundled model builds"),
        expected: expected
            .iter()
            .map(|(f, v)| (parse_temporal(f).expect("bundled formula parses"), *v))
            .collect(),
        instances: Vec::new(),
    }
}

fn with_instance(mut fx: Fixture, rule: &'static str, formulas: &[(&str, &str)]) -> Fixture {
    let formulas: BTreeMap<String, _> = formulas
        .iter()
        .map(|(k, v)| (k.to_string(), parse_dsl(v).expect("bundled formula parses")))
        .collect();
    fx.instances.push((
        rule,
        Instance {
            formulas,
            comps: BTreeMap::new(),
        },
    ));
    fx
}

pub fn counterexample_corpus() -> Vec<Fixture> {
    vec![
        fixture(
            "unless-side-condition",
            include_str!("../../corpus/unless_side.model"),
            &[("<n> p unless <n> q", false)],
        ),
        with_instance(
            fixture(
                "cancellation",
                include_str!("../../corpus/cancellation.model"),
                &[
                    ("<m> p unless <m> p & <n> q", true),
                    ("<m> p & <n> q unless <m> r & <n> s", true),
                    ("<m> p | <m> p & <n> q unless <m> r & <n> s", false),
                ],
            ),
            "GeneralCancellation",
            &[
                ("F", "<m> p"),
                ("F1", "<m> p & <n> q"),
                ("G", "<m> r & <n> s"),
            ],
        ),
        with_instance(
            fixture(
                "incompleteness",
                include_str!("../../corpus/incompleteness.model"),
                &[("[m] (p | q)", true), ("p | q", false)],
            ),
            "BoxElim",
            &[("F", "p | q")],
        ),
        fixture(
            "d2-converse",
            include_str!("../../corpus/d2_converse.model"),
            &[
                ("<m> (p & q) -> <m> p & <m> q", true),
                ("<m> p & <m> q -> <m> (p & q)", false),
            ],
        ),
    ]
}
