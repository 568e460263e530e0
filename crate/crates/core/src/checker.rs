//! Decides `M |= phi` for every temporal operator.
//!
//! Quantification ranges over *profiles*: sets of points, where a component's
//! tail point stands for states of its continuation after the drawn diagram.
//! A profile without tails is an ordinary distributed state. Propositional
//! satisfaction treats a tail as a copy of the component's last state, so
//! plain formulae and `init` are unaffected; the temporal operators may find
//! their witness in the continuation, which makes `stable` and `unless`
//! behave as on an unbounded run that simply stops changing.
//!
//! The existential half is answered without enumerating candidates. Points
//! are grouped into cells by membership in the goal formula's atom masks;
//! the goal's truth at a candidate depends only on which cells it meets, and
//! the largest admissible candidate built from a set of cells is admissible
//! whenever any candidate is.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::computation::{check_cap, CapExceeded, Computation, DistributedState, DEFAULT_CAP};
use crate::formula::{Dsl, Temporal, TemporalOp};
use crate::semantics::{valid, Compiled};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub cap: usize,
    /// Worker threads for the universal loop; 1 runs inline.
    pub jobs: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            cap: DEFAULT_CAP,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub failing_ds: Option<DistributedState>,
    pub witness_ds: Option<DistributedState>,
    pub operator: TemporalOp,
}

impl Verdict {
    fn new(op: TemporalOp, failing: Option<DistributedState>) -> Verdict {
        Verdict {
            holds: failing.is_none(),
            failing_ds: failing,
            witness_ds: None,
            operator: op,
        }
    }
}

/// Point relations used by the temporal operators, both directions.
struct Relation {
    fwd: Vec<u64>,
    bwd: Vec<u64>,
}

impl Relation {
    fn new(fwd: Vec<u64>) -> Relation {
        let mut bwd = vec![0u64; fwd.len()];
        for (p, &row) in fwd.iter().enumerate() {
            let mut r = row;
            while r != 0 {
                bwd[r.trailing_zeros() as usize] |= 1 << p;
                r &= r - 1;
            }
        }
        Relation { fwd, bwd }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    /// Candidates lie after the quantified profile (`ds <= ds'`).
    Forward,
    /// Candidates lie before it (`ds' <= ds`).
    Backward,
}

fn relation_for(c: &Computation, op: TemporalOp) -> (Relation, Dir) {
    let n = c.num_points();
    match op {
        TemporalOp::LeadsTo => (
            Relation::new((0..n).map(|p| c.reach_mask(p)).collect()),
            Dir::Forward,
        ),
        TemporalOp::Because => (
            Relation::new((0..n).map(|p| c.reach_mask(p)).collect()),
            Dir::Backward,
        ),
        TemporalOp::LeadsToC | TemporalOp::Unless => (
            Relation::new((0..n).map(|p| c.step_mask(p)).collect()),
            Dir::Forward,
        ),
        TemporalOp::BecauseC => {
            // A continuation point is only ever closely preceded by another
            // continuation point, since it may lie arbitrarily far out.
            let tails = c.tails_mask();
            let strict = (0..n)
                .map(|p| {
                    if c.is_tail(p) {
                        c.step_mask(p)
                    } else {
                        c.step_mask(p) & !tails
                    }
                })
                .collect();
            (Relation::new(strict), Dir::Backward)
        }
        _ => unreachable!("no relation for {op:?}"),
    }
}

/// Candidate constraints induced by a quantified profile: the candidate must
/// lie inside the union of the covers and meet every cover.
fn covers(rel: &Relation, dir: Dir, a: u64) -> Vec<u64> {
    let rows = if dir == Dir::Forward {
        &rel.fwd
    } else {
        &rel.bwd
    };
    let mut out = Vec::with_capacity(a.count_ones() as usize);
    let mut m = a;
    while m != 0 {
        out.push(rows[m.trailing_zeros() as usize]);
        m &= m - 1;
    }
    out
}

const DENSE_CELLS: usize = 16;

/// Existential search for one goal formula.
struct Searcher {
    goal: Compiled,
    cell_of: Vec<u64>,
    reps: Vec<u64>,
    /// Goal truth per cell set: dense when few cells, sparse otherwise.
    sat: Vec<u8>,
    sat_sparse: HashMap<u64, bool>,
    memo: HashMap<(u64, Vec<u64>), bool>,
}

impl Searcher {
    fn new(goal: Compiled, points: usize) -> Searcher {
        let mut atoms = Vec::new();
        goal.atom_masks(&mut atoms);
        let mut sigs: Vec<u64> = Vec::new();
        let mut cell_of = Vec::with_capacity(points);
        let mut reps = Vec::new();
        for p in 0..points {
            let sig = atoms
                .iter()
                .enumerate()
                .fold(0u64, |s, (i, m)| s | (m >> p & 1) << i);
            let cell = sigs.iter().position(|&x| x == sig).unwrap_or_else(|| {
                sigs.push(sig);
                reps.push(1u64 << p);
                sigs.len() - 1
            });
            cell_of.push(1u64 << cell);
        }
        let sat = if reps.len() <= DENSE_CELLS {
            vec![0u8; 1usize << reps.len()]
        } else {
            Vec::new()
        };
        Searcher {
            goal,
            cell_of,
            reps,
            sat,
            sat_sparse: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    fn cells(&self, mut mask: u64) -> u64 {
        let mut out = 0;
        while mask != 0 {
            out |= self.cell_of[mask.trailing_zeros() as usize];
            mask &= mask - 1;
        }
        out
    }

    fn eval_cells(&self, t: u64) -> bool {
        let mut rep = 0;
        let mut m = t;
        while m != 0 {
            rep |= self.reps[m.trailing_zeros() as usize];
            m &= m - 1;
        }
        self.goal.eval(rep)
    }

    fn sat(&mut self, t: u64) -> bool {
        if self.sat.is_empty() {
            if let Some(&v) = self.sat_sparse.get(&t) {
                return v;
            }
            let v = self.eval_cells(t);
            self.sat_sparse.insert(t, v);
            return v;
        }
        if self.sat[t as usize] == 0 {
            self.sat[t as usize] = if self.eval_cells(t) { 2 } else { 1 };
        }
        self.sat[t as usize] == 2
    }

    /// Is there a nonempty `B` inside the union of `covers`, meeting each
    /// cover, with `B |= goal`?
    fn exists(&mut self, covers: &[u64]) -> bool {
        let avail = covers.iter().fold(0, |m, c| m | c);
        let avail_t = self.cells(avail);
        let mut need: Vec<u64> = covers.iter().map(|&c| self.cells(c)).collect();
        need.sort_unstable();
        need.dedup();
        let key = (avail_t, need);
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        let need = &key.1;
        let mut found = false;
        let mut t = avail_t;
        while t != 0 {
            if need.iter().all(|&n| n & t != 0) && self.sat(t) {
                found = true;
                break;
            }
            t = (t - 1) & avail_t;
        }
        self.memo.insert(key, found);
        found
    }
}

/// The per-profile obligation of one binary temporal formula.
struct Obligation {
    premise: Compiled,
    rel: Relation,
    dir: Dir,
    /// `F'` for every operator.
    release: Searcher,
    /// `F` again, for the persistence branch of `unless`.
    keep: Option<Searcher>,
    states: u64,
}

impl Obligation {
    fn new(c: &Computation, op: TemporalOp, f: &Dsl, g: &Dsl) -> Obligation {
        let (rel, dir) = relation_for(c, op);
        let n = c.num_points();
        let keep = (op == TemporalOp::Unless).then(|| Searcher::new(Compiled::new(c, f), n));
        Obligation {
            premise: Compiled::new(c, f),
            rel,
            dir,
            release: Searcher::new(Compiled::new(c, g), n),
            keep,
            states: c.states_mask(),
        }
    }

    /// True when `a` does not satisfy the premise or has a witness.
    fn discharged(&mut self, a: u64) -> bool {
        if !self.premise.eval(a) {
            return true;
        }
        let cov = covers(&self.rel, self.dir, a);
        if self.release.exists(&cov) {
            return true;
        }
        let Some(keep) = self.keep.as_mut() else {
            return false;
        };
        if a & !self.states != 0 {
            // continuation points can always be moved further out
            return keep.exists(&cov);
        }
        let mut m = a;
        while m != 0 {
            let drop = !(m & m.wrapping_neg());
            m &= m - 1;
            let reduced: Vec<u64> = cov.iter().map(|c| c & drop).collect();
            if reduced.iter().all(|&c| c != 0) && keep.exists(&reduced) {
                return true;
            }
        }
        false
    }

    /// Goal test for a concrete candidate, used for witness reporting.
    fn accepts(&self, a: u64, b: u64) -> bool {
        let cov = covers(&self.rel, self.dir, a);
        if b & !cov.iter().fold(0, |m, c| m | c) != 0 || cov.iter().any(|&c| c & b == 0) {
            return false;
        }
        if self.release.goal.eval(b) {
            return true;
        }
        let shifted = a & !self.states != 0;
        let escapes = shifted || a & !b != 0;
        self.keep
            .as_ref()
            .is_some_and(|k| escapes && k.goal.eval(b))
    }
}

const CHUNK: u64 = 1 << 12;

fn first_failure(ob: &mut Obligation, lo: u64, hi: u64) -> Option<u64> {
    (lo..hi).find(|&a| !ob.discharged(a))
}

pub fn check(c: &Computation, phi: &Temporal, opts: CheckOptions) -> Result<Verdict, CapExceeded> {
    let phi = phi.desugar();
    let op = phi.op();
    match &phi {
        Temporal::Plain(f) => {
            let v = valid(c, f, opts.cap)?;
            return Ok(Verdict::new(op, v.counterexample()));
        }
        Temporal::Init(f) => {
            check_cap(c, opts.cap)?;
            let ds0 = c.initial_ds();
            let holds = Compiled::new(c, f).eval(ds0.bits());
            return Ok(Verdict::new(op, (!holds).then_some(ds0)));
        }
        _ => {}
    }
    check_cap(c, opts.cap)?;
    let ops = phi.operands();
    let (f, g) = (ops[0], ops[1]);
    let end = c.points_mask() + 1;
    let failing = if opts.jobs <= 1 || end <= CHUNK {
        first_failure(&mut Obligation::new(c, op, f, g), 1, end)
    } else {
        let chunks: Vec<u64> = (0..end.div_ceil(CHUNK)).collect();
        chunks
            .par_iter()
            .map_init(
                || Obligation::new(c, op, f, g),
                |ob, &k| first_failure(ob, (k * CHUNK).max(1), ((k + 1) * CHUNK).min(end)),
            )
            .find_first(Option::is_some)
            .flatten()
    };
    Ok(Verdict::new(
        op,
        failing.and_then(DistributedState::from_bits),
    ))
}

/// Evaluates a temporal formula's obligation at one distributed state. The
/// verdict holds when `ds` violates the premise or has a witness; the
/// witness is the smallest one in enumeration order.
pub fn check_at(c: &Computation, phi: &Temporal, ds: DistributedState) -> Verdict {
    let phi = phi.desugar();
    let op = phi.op();
    let ops = phi.operands();
    match &phi {
        Temporal::Plain(f) | Temporal::Init(f) => {
            let at = if op == TemporalOp::Init {
                c.initial_ds()
            } else {
                ds
            };
            let holds = Compiled::new(c, f).eval(at.bits());
            return Verdict::new(op, (!holds).then_some(at));
        }
        _ => {}
    }
    let ob = Obligation::new(c, op, ops[0], ops[1]);
    let a = ds.bits();
    if !ob.premise.eval(a) {
        return Verdict::new(op, None);
    }
    let avail = covers(&ob.rel, ob.dir, a).iter().fold(0, |m, c| m | c);
    let mut b: u64 = 0;
    loop {
        b = b.wrapping_sub(avail) & avail;
        if b == 0 {
            return Verdict::new(op, Some(ds));
        }
        if ob.accepts(a, b) {
            let mut v = Verdict::new(op, None);
            v.witness_ds = DistributedState::from_bits(b);
            return v;
        }
    }
}

/// Per-formula verdicts for a spec document, in document order.
#[derive(Debug, Clone)]
pub struct SpecReport {
    pub entries: Vec<(Temporal, Verdict)>,
}

impl SpecReport {
    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|(_, v)| v.holds)
    }
}

pub fn check_spec(
    c: &Computation,
    doc: &[Temporal],
    opts: CheckOptions,
) -> Result<SpecReport, CapExceeded> {
    let entries = doc
        .iter()
        .map(|phi| Ok((phi.clone(), check(c, phi, opts)?)))
        .collect::<Result<_, CapExceeded>>()?;
    Ok(SpecReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_temporal;

    fn t(s: &str) -> Temporal {
        parse_temporal(s).unwrap()
    }

    fn holds(c: &Computation, s: &str) -> bool {
        check(c, &t(s), CheckOptions::default()).unwrap().holds
    }

    #[test]
    fn reflexive_operators_hold() {
        let c = Computation::from_text(
            "component m: 3\ncomponent n: 2\nlabels m.1: p\nlabels n.0: p q\nmsg m.0 -> n.1",
        )
        .unwrap();
        for f in ["p", "<m> p & <n> q", "~p", "[n] q"] {
            for op in ["leads_to", "leads_to_c", "because", "because_c", "unless"] {
                assert!(holds(&c, &format!("{f} {op} {f}")), "{f} {op} {f}");
            }
        }
    }

    #[test]
    fn leads_to_needs_a_later_state() {
        let c = Computation::from_text("component m: 2\nlabels m.0: p\nlabels m.1: q").unwrap();
        assert!(holds(&c, "p leads_to q"));
        assert!(holds(&c, "p leads_to_c q"));
        assert!(!holds(&c, "q leads_to p"));
        assert!(holds(&c, "q because p"));
        assert!(!holds(&c, "p because q"));
    }

    #[test]
    fn stable_last_state_persists() {
        let c = Computation::from_text("component m: 2\nlabels m.0: p\nlabels m.1: q").unwrap();
        assert!(holds(&c, "stable q"));
        assert!(!holds(&c, "stable p"));
        assert!(holds(&c, "p unless q"));
    }

    #[test]
    fn init_uses_first_states() {
        let c =
            Computation::from_text("component m: 2\ncomponent n: 1\nlabels m.0: p\nlabels n.0: p")
                .unwrap();
        assert!(holds(&c, "init p"));
        assert!(holds(&c, "init <m> true"));
        assert!(!holds(&c, "init [m] ~p"));
    }

    #[test]
    fn witness_is_smallest() {
        let c = Computation::from_text("component m: 3\nlabels m.1: q\nlabels m.2: q").unwrap();
        let ds = DistributedState::parse(&c, "m.0").unwrap();
        let v = check_at(&c, &t("true leads_to q"), ds);
        assert!(v.holds);
        assert_eq!(v.witness_ds.unwrap().names(&c), ["m.1"]);
    }

    #[test]
    fn parallel_matches_sequential() {
        let text = "component m: 5\ncomponent n: 5\nlabels m.0: p\nlabels m.3: q\nlabels n.2: p q\nlabels n.4: q\nmsg m.1 -> n.2\nmsg n.3 -> m.4";
        let c = Computation::from_text(text).unwrap();
        for s in [
            "p leads_to q",
            "q because p",
            "p unless q",
            "<m> p because_c <n> q",
            "stable <n> q",
        ] {
            let one = check(&c, &t(s), CheckOptions::default()).unwrap();
            let many = check(
                &c,
                &t(s),
                CheckOptions {
                    jobs: 4,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(one, many, "{s}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        let c = Computation::from_text("component m: 5").unwrap();
        let opts = CheckOptions { cap: 4, jobs: 1 };
        assert!(check(&c, &t("p leads_to p"), opts).is_err());
        assert!(check(&c, &t("p"), opts).is_err());
    }

    #[test]
    fn empty_document_passes() {
        let c = Computation::from_text("component m: 1").unwrap();
        assert!(check_spec(&c, &[], CheckOptions::default())
            .unwrap()
            .all_hold());
    }
}
