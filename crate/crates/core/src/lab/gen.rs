//! Random computations and random formulae.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::computation::{Computation, ComputationDecl};
use crate::formula::{and, boxed, implies, loc, not, or, prop, Dsl};

const COMPONENT_NAMES: [&str; 6] = ["m", "n", "o", "k", "l", "j"];
const PROP_NAMES: [&str; 8] = ["p", "q", "r", "s", "t", "u", "v", "w"];

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GenParams {
    pub components: RangeInclusive<usize>,
    pub states: RangeInclusive<usize>,
    /// Probability that a state sends a message to some state of another
    /// component.
    pub message_density: f64,
    /// Size of the proposition alphabet.
    pub labels: usize,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> GenParams {
        GenParams {
            components: 1..=3,
            states: 1..=5,
            message_density: 0.3,
            labels: 4,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn props(&self) -> Vec<String> {
        PROP_NAMES[..self.labels.min(PROP_NAMES.len())]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }
}

/// Deterministic generator for trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A random valid computation, reproducible from `p.seed`.
pub fn random_computation(p: &GenParams) -> Computation {
    generate(&mut ChaCha8Rng::seed_from_u64(p.seed), p)
}

/// Draws declarations until one builds; only causal cycles are rejected.
pub fn generate(rng: &mut impl Rng, p: &GenParams) -> Computation {
    let props = p.props();
    loop {
        let k = rng
            .gen_range(p.components.clone())
            .min(COMPONENT_NAMES.len());
        let mut decl = ComputationDecl::default();
        for name in &COMPONENT_NAMES[..k] {
            decl.components
                .push((name.to_string(), rng.gen_range(p.states.clone())));
        }
        for (name, len) in decl.components.clone() {
            for i in 0..len {
                let l: Vec<String> = props
                    .iter()
                    .filter(|_| rng.gen_bool(0.5))
                    .cloned()
                    .collect();
                if !l.is_empty() {
                    decl.labels.push(((name.clone(), i), l));
                }
            }
        }
        if k > 1 {
            for (src, len) in decl.components.clone() {
                for i in 0..len {
                    if rng.gen_bool(p.message_density) {
                        let others: Vec<&(String, usize)> =
                            decl.components.iter().filter(|(c, _)| *c != src).collect();
                        let (dst, dlen) = others.choose(rng).unwrap();
                        let msg = ((src.clone(), i), (dst.clone(), rng.gen_range(0..*dlen)));
                        decl.messages.push(msg);
                    }
                }
            }
        }
        if let Ok(c) = Computation::build(&decl) {
            return c;
        }
    }
}

fn atom(rng: &mut impl Rng, props: &[String]) -> Dsl {
    match rng.gen_range(0..10) {
        0 => Dsl::True,
        1 => Dsl::False,
        _ => prop(props.choose(rng).unwrap()),
    }
}

/// An atom, or a negated proposition when `depth` allows it.
fn literal(rng: &mut impl Rng, props: &[String], depth: usize) -> Dsl {
    if depth > 0 && rng.gen_bool(0.3) {
        not(prop(props.choose(rng).unwrap()))
    } else {
        atom(rng, props)
    }
}

/// A random formula of depth at most `depth`, biased toward located
/// literals.
pub fn random_formula(rng: &mut impl Rng, props: &[String], comps: &[String], depth: usize) -> Dsl {
    if depth == 0 {
        return atom(rng, props);
    }
    let c = |rng: &mut _| comps.choose(rng).unwrap().as_str();
    let sub = |rng: &mut _| random_formula(rng, props, comps, depth - 1);
    match rng.gen_range(0..20) {
        0..=7 => loc(c(rng), literal(rng, props, depth - 1)),
        8..=9 => loc(c(rng), sub(rng)),
        10..=11 => literal(rng, props, depth),
        12..=13 => and(sub(rng), sub(rng)),
        14..=15 => or(sub(rng), sub(rng)),
        16 => not(sub(rng)),
        17 => implies(sub(rng), sub(rng)),
        _ => boxed(c(rng), sub(rng)),
    }
}
