//! Unoptimized transcription of the temporal semantics, kept as an
//! independent oracle for [`crate::checker::check`].
//!
//! Relations are rebuilt here from the message list by a Warshall closure,
//! and both quantifiers are plain loops over sets of points. Only practical
//! for small models.

use crate::checker::Verdict;
use crate::computation::{Computation, DistributedState, StateId};
use crate::formula::{Dsl, Temporal, TemporalOp};

pub const NAIVE_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pt {
    State(StateId),
    /// Continuation of a component past its last drawn state.
    Tail(usize),
}

struct Model<'a> {
    c: &'a Computation,
    pts: Vec<Pt>,
    /// R* over states, indexed by position in `states`.
    star: Vec<Vec<bool>>,
    next: Vec<Vec<bool>>,
    states: Vec<StateId>,
}

impl<'a> Model<'a> {
    fn new(c: &'a Computation) -> Model<'a> {
        let states: Vec<StateId> = c.states().collect();
        let n = states.len();
        let idx = |s: StateId| states.iter().position(|&x| x == s).unwrap();
        let mut next = vec![vec![false; n]; n];
        for (i, s) in states.iter().enumerate() {
            for (j, t) in states.iter().enumerate() {
                if s.component == t.component && t.index == s.index + 1 {
                    next[i][j] = true;
                }
            }
        }
        for (s, t) in c.messages() {
            next[idx(*s)][idx(*t)] = true;
        }
        let mut star = next.clone();
        for (i, row) in star.iter_mut().enumerate() {
            row[i] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if star[i][k] && star[k][j] {
                        star[i][j] = true;
                    }
                }
            }
        }
        let mut pts: Vec<Pt> = states.iter().map(|&s| Pt::State(s)).collect();
        pts.extend((0..c.components().len()).map(Pt::Tail));
        Model {
            c,
            pts,
            star,
            next,
            states,
        }
    }

    fn pos(&self, s: StateId) -> usize {
        self.states.iter().position(|&x| x == s).unwrap()
    }

    fn last(&self, comp: usize) -> StateId {
        StateId {
            component: comp,
            index: self.c.len(comp) - 1,
        }
    }

    fn as_state(&self, p: Pt) -> StateId {
        match p {
            Pt::State(s) => s,
            Pt::Tail(k) => self.last(k),
        }
    }

    fn component(&self, p: Pt) -> usize {
        self.as_state(p).component
    }

    /// R* extended to the continuation.
    fn reaches(&self, x: Pt, y: Pt) -> bool {
        match (x, y) {
            (Pt::State(s), Pt::State(t)) => self.star[self.pos(s)][self.pos(t)],
            (Pt::State(s), Pt::Tail(k)) => self.star[self.pos(s)][self.pos(self.last(k))],
            (Pt::Tail(k), Pt::Tail(l)) => k == l,
            (Pt::Tail(_), Pt::State(_)) => false,
        }
    }

    /// R= extended to the continuation; `strict` forbids entering it.
    fn steps(&self, x: Pt, y: Pt, strict: bool) -> bool {
        match (x, y) {
            (Pt::State(s), Pt::State(t)) => s == t || self.next[self.pos(s)][self.pos(t)],
            (Pt::State(s), Pt::Tail(k)) => !strict && s == self.last(k),
            (Pt::Tail(k), Pt::Tail(l)) => k == l,
            (Pt::Tail(_), Pt::State(_)) => false,
        }
    }

    fn sat(&self, ds: &[Pt], f: &Dsl) -> bool {
        match f {
            Dsl::Prop(p) => ds
                .iter()
                .all(|&x| self.c.labels(self.as_state(x)).contains(p)),
            Dsl::False => false,
            Dsl::True => true,
            Dsl::Not(g) => !self.sat(ds, g),
            Dsl::And(a, b) => self.sat(ds, a) && self.sat(ds, b),
            Dsl::Or(a, b) => self.sat(ds, a) || self.sat(ds, b),
            Dsl::Implies(a, b) => !self.sat(ds, a) || self.sat(ds, b),
            Dsl::Iff(a, b) => self.sat(ds, a) == self.sat(ds, b),
            Dsl::Loc(m, g) => ds.iter().any(|&x| self.in_comp(x, m) && self.sat(&[x], g)),
            Dsl::Box(m, g) => ds.iter().all(|&x| !self.in_comp(x, m) || self.sat(&[x], g)),
        }
    }

    fn in_comp(&self, x: Pt, m: &str) -> bool {
        self.c.components()[self.component(x)] == m
    }

    fn subset(&self, bits: u64) -> Vec<Pt> {
        (0..self.pts.len())
            .filter(|i| bits >> i & 1 == 1)
            .map(|i| self.pts[i])
            .collect()
    }
}

/// `lo <= hi` under `rel`: every member of `lo` relates to a member of `hi`
/// and every member of `hi` is related to from a member of `lo`.
fn ordered(lo: &[Pt], hi: &[Pt], rel: &dyn Fn(Pt, Pt) -> bool) -> bool {
    lo.iter().all(|&x| hi.iter().any(|&y| rel(x, y)))
        && hi.iter().all(|&y| lo.iter().any(|&x| rel(x, y)))
}

pub fn naive_check(c: &Computation, phi: &Temporal) -> Verdict {
    let op = phi.op();
    let m = Model::new(c);
    let verdict = |failing: Option<u64>| Verdict {
        holds: failing.is_none(),
        failing_ds: failing.and_then(DistributedState::from_bits),
        witness_ds: None,
        operator: op,
    };
    let n_states = m.states.len();
    let n_points = m.pts.len();
    match phi {
        Temporal::Plain(f) => {
            return verdict((1..1u64 << n_states).find(|&b| !m.sat(&m.subset(b), f)));
        }
        Temporal::Init(f) => {
            let ds0: Vec<Pt> = m
                .pts
                .iter()
                .copied()
                .filter(|p| matches!(p, Pt::State(s) if s.index == 0))
                .collect();
            let bits = (0..n_points)
                .filter(|&i| ds0.contains(&m.pts[i]))
                .fold(0u64, |b, i| b | 1 << i);
            return verdict((!m.sat(&ds0, f)).then_some(bits));
        }
        _ => {}
    }
    let (f, g, stable_f);
    match phi {
        Temporal::Stable(x) => {
            stable_f = Dsl::False;
            (f, g) = (x, &stable_f);
        }
        _ => {
            let ops = phi.operands();
            (f, g) = (ops[0], ops[1]);
        }
    }
    let rel = |x: Pt, y: Pt| -> bool {
        match op {
            TemporalOp::LeadsTo | TemporalOp::Because => m.reaches(x, y),
            TemporalOp::LeadsToC | TemporalOp::Unless => m.steps(x, y, false),
            TemporalOp::BecauseC => match y {
                Pt::Tail(_) => m.steps(x, y, false) && matches!(x, Pt::Tail(_)),
                Pt::State(_) => m.steps(x, y, true),
            },
            _ => unreachable!(),
        }
    };
    let forward = matches!(
        op,
        TemporalOp::LeadsTo | TemporalOp::LeadsToC | TemporalOp::Unless
    );
    let failing = (1..1u64 << n_points).find(|&ab| {
        let a = m.subset(ab);
        if !m.sat(&a, f) {
            return false;
        }
        let a_has_tail = a.iter().any(|p| matches!(p, Pt::Tail(_)));
        // members related to some member of `a`; any witness lies inside
        let near = (0..n_points)
            .filter(|&i| {
                a.iter().any(|&x| {
                    if forward {
                        rel(x, m.pts[i])
                    } else {
                        rel(m.pts[i], x)
                    }
                })
            })
            .fold(0u64, |b, i| b | 1 << i);
        let mut bb = near;
        while bb != 0 {
            let b = m.subset(bb);
            let related = if forward {
                ordered(&a, &b, &rel)
            } else {
                ordered(&b, &a, &rel)
            };
            if related {
                let goal = if op == TemporalOp::Unless {
                    let escapes = a_has_tail || a.iter().any(|x| !b.contains(x));
                    (escapes && m.sat(&b, f)) || m.sat(&b, g)
                } else {
                    m.sat(&b, g)
                };
                if goal {
                    return false;
                }
            }
            bb = (bb - 1) & near;
        }
        true
    });
    verdict(failing)
}
