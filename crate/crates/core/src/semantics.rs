//! DSL satisfaction on distributed states of a computation.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::computation::{enumerate_ds, CapExceeded, Computation, DistributedState};
use crate::formula::Dsl;

/// Intersection of the member labels (tails carry their last state's labels).
pub fn valuation(c: &Computation, ds: DistributedState) -> BTreeSet<String> {
    let mut points = ds.points();
    let first = points.next().expect("distributed states are nonempty");
    let mut v = c.point_labels(first).clone();
    for p in points {
        let l = c.point_labels(p);
        v.retain(|x| l.contains(x));
    }
    v
}

/// Structural recursion over the formula; sugar is evaluated through its
/// definition.
pub fn satisfies(c: &Computation, ds: DistributedState, f: &Dsl) -> bool {
    match f {
        Dsl::Prop(p) => ds.points().all(|s| c.point_labels(s).contains(p)),
        Dsl::False => false,
        Dsl::True => true,
        Dsl::Not(g) => !satisfies(c, ds, g),
        Dsl::And(a, b) => satisfies(c, ds, a) && satisfies(c, ds, b),
        Dsl::Or(a, b) => satisfies(c, ds, a) || satisfies(c, ds, b),
        Dsl::Implies(a, b) => !satisfies(c, ds, a) || satisfies(c, ds, b),
        Dsl::Iff(a, b) => satisfies(c, ds, a) == satisfies(c, ds, b),
        Dsl::Loc(m, g) => located(c, ds, m).any(|s| satisfies(c, single(s), g)),
        Dsl::Box(m, g) => located(c, ds, m).all(|s| satisfies(c, single(s), g)),
    }
}

fn located<'a>(
    c: &'a Computation,
    ds: DistributedState,
    m: &str,
) -> impl Iterator<Item = usize> + 'a {
    let mask = c.component_index(m).map_or(0, |k| c.component_mask(k));
    DistributedState::from_bits(ds.bits() & mask)
        .into_iter()
        .flat_map(DistributedState::points)
}

fn single(point: usize) -> DistributedState {
    DistributedState::from_bits(1 << point).unwrap()
}

/// A formula specialized to one computation, evaluated on point masks.
///
/// `p` holds at `ds` iff every member carries `p`, i.e. `ds` avoids the
/// complement of `p`'s mask; `<m> F` holds iff `ds` meets the points of `m`
/// whose singleton satisfies `F`.
#[derive(Debug, Clone)]
pub enum Compiled {
    /// Holds iff the ds has no member outside the mask.
    Within(u64),
    /// Holds iff the ds meets the mask.
    Meets(u64),
    False,
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    pub fn new(c: &Computation, f: &Dsl) -> Compiled {
        compile(c, &f.desugar())
    }

    pub fn eval(&self, ds: u64) -> bool {
        match self {
            Compiled::Within(m) => ds & !m == 0,
            Compiled::Meets(m) => ds & m != 0,
            Compiled::False => false,
            Compiled::Not(g) => !g.eval(ds),
            Compiled::And(a, b) => a.eval(ds) && b.eval(ds),
        }
    }

    /// The masks the verdict depends on: `eval` is constant on any set of
    /// points that agree on membership in every atom mask.
    pub fn atom_masks(&self, out: &mut Vec<u64>) {
        match self {
            Compiled::Within(m) | Compiled::Meets(m) => {
                if !out.contains(m) {
                    out.push(*m)
                }
            }
            Compiled::False => {}
            Compiled::Not(g) => g.atom_masks(out),
            Compiled::And(a, b) => {
                a.atom_masks(out);
                b.atom_masks(out);
            }
        }
    }
}

fn compile(c: &Computation, f: &Dsl) -> Compiled {
    match f {
        Dsl::Prop(p) => Compiled::Within(c.prop_mask(p)),
        Dsl::False => Compiled::False,
        Dsl::Not(g) => Compiled::Not(Box::new(compile(c, g))),
        Dsl::And(a, b) => Compiled::And(Box::new(compile(c, a)), Box::new(compile(c, b))),
        Dsl::Loc(m, g) => {
            let Some(k) = c.component_index(m) else {
                return Compiled::False;
            };
            let inner = compile(c, g);
            let mut mask = 0;
            let mut pts = c.component_mask(k);
            while pts != 0 {
                let bit = pts & pts.wrapping_neg();
                if inner.eval(bit) {
                    mask |= bit;
                }
                pts &= pts - 1;
            }
            Compiled::Meets(mask)
        }
        _ => unreachable!("compile expects a desugared formula"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// The smallest failing distributed state in enumeration order.
    Invalid(DistributedState),
}

impl Validity {
    pub fn holds(self) -> bool {
        self == Validity::Valid
    }

    pub fn counterexample(self) -> Option<DistributedState> {
        match self {
            Validity::Valid => None,
            Validity::Invalid(ds) => Some(ds),
        }
    }
}

const PARALLEL_FROM: usize = 16;

pub fn valid(c: &Computation, f: &Dsl, cap: usize) -> Result<Validity, CapExceeded> {
    let all = enumerate_ds(c, cap)?;
    let compiled = Compiled::new(c, f);
    let failing = if c.num_states() >= PARALLEL_FROM {
        let top = c.states_mask();
        (1..=top)
            .into_par_iter()
            .find_first(|&b| !compiled.eval(b))
            .and_then(DistributedState::from_bits)
    } else {
        all.into_iter().find(|ds| !compiled.eval(ds.bits()))
    };
    Ok(failing.map_or(Validity::Valid, Validity::Invalid))
}
