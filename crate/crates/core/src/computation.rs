//! Space-time diagrams: per-component state sequences, labels and
//! cross-component messages, with the causal relations derived from them.
//!
//! States are numbered component-major (all states of the first component,
//! then the second, ...). Distributed states are bitmasks over that
//! numbering, so enumeration in ascending mask order is deterministic.
//!
//! Every component also owns one *tail point*, numbered after all states.
//! It stands for the unbounded continuation of the component after its last
//! drawn state: the same labels, no further messages. Plain distributed
//! states never contain tails; the temporal checker uses them to quantify
//! over the continuation of the diagram.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

pub const DEFAULT_CAP: usize = 24;
/// Points (states plus one tail per component) must fit in a 64-bit mask.
pub const MAX_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("component `{0}` has no states")]
    EmptyComponent(String),
    #[error("component `{0}` declared twice")]
    DuplicateComponent(String),
    #[error("labels for state {0} declared twice")]
    DuplicateState(String),
    #[error("undeclared component `{0}`")]
    UndeclaredComponent(String),
    #[error("state index {index} out of range for component `{component}` ({len} states)")]
    IndexOutOfRange {
        component: String,
        index: usize,
        len: usize,
    },
    #[error("message {0} -> {1} stays within one component")]
    SameComponentMessage(String, String),
    #[error("causal cycle through state {0}")]
    CausalCycle(String),
    #[error("model has no components")]
    NoComponents,
    #[error("model has {found} states plus tails, at most {max} supported")]
    TooLarge { found: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("model has {states} states, exhaustive checking is capped at {cap}")]
pub struct CapExceeded {
    pub states: usize,
    pub cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId {
    pub component: usize,
    pub index: usize,
}

/// Unvalidated model as read from a model file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComputationDecl {
    pub components: Vec<(String, usize)>,
    pub labels: Vec<((String, usize), Vec<String>)>,
    pub messages: Vec<((String, usize), (String, usize))>,
}

#[derive(Debug, Clone)]
pub struct Computation {
    components: Vec<String>,
    labels: Vec<Vec<BTreeSet<String>>>,
    messages: Vec<(StateId, StateId)>,
    offsets: Vec<usize>,
    n_states: usize,
    /// Reflexive-transitive reachability per point, over points.
    reach: Vec<u64>,
    /// Reflexive one-step successors per point (local successor, messages,
    /// last state to tail).
    step: Vec<u64>,
}

fn parse_state_ref(tok: &str, line: usize) -> Result<(String, usize), ModelError> {
    let (c, i) = tok.split_once('.').ok_or_else(|| ModelError::Syntax {
        line,
        msg: format!("expected <component>.<index>, found `{tok}`"),
    })?;
    let i = i.parse().map_err(|_| ModelError::Syntax {
        line,
        msg: format!("bad state index `{i}`"),
    })?;
    Ok((c.to_string(), i))
}

/// Parses the line-oriented model format:
///
/// ```text
/// component m: 3
/// labels m.0: p q
/// msg m.1 -> n.0
/// ```
pub fn parse_model(text: &str) -> Result<ComputationDecl, ModelError> {
    let mut decl = ComputationDecl::default();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let (kw, rest) = content
            .split_once(char::is_whitespace)
            .unwrap_or((content, ""));
        let rest = rest.trim();
        let syntax = |msg: &str| ModelError::Syntax {
            line,
            msg: msg.to_string(),
        };
        match kw {
            "component" => {
                let (name, count) = rest
                    .split_once(':')
                    .ok_or_else(|| syntax("expected `component <name>: <count>`"))?;
                let count = count
                    .trim()
                    .parse()
                    .map_err(|_| syntax("bad state count"))?;
                decl.components.push((name.trim().to_string(), count));
            }
            "labels" => {
                let (state, props) = rest
                    .split_once(':')
                    .ok_or_else(|| syntax("expected `labels <c>.<i>: props`"))?;
                let state = parse_state_ref(state.trim(), line)?;
                let props = props.split_whitespace().map(str::to_string).collect();
                decl.labels.push((state, props));
            }
            "msg" => {
                let (src, dst) = rest
                    .split_once("->")
                    .ok_or_else(|| syntax("expected `msg <c>.<i> -> <c>.<i>`"))?;
                decl.messages.push((
                    parse_state_ref(src.trim(), line)?,
                    parse_state_ref(dst.trim(), line)?,
                ));
            }
            other => return Err(syntax(&format!("unknown directive `{other}`"))),
        }
    }
    Ok(decl)
}

impl Computation {
    pub fn build(decl: &ComputationDecl) -> Result<Computation, ModelError> {
        if decl.components.is_empty() {
            return Err(ModelError::NoComponents);
        }
        let mut components: Vec<String> = Vec::new();
        let mut labels: Vec<Vec<BTreeSet<String>>> = Vec::new();
        for (name, count) in &decl.components {
            if components.contains(name) {
                return Err(ModelError::DuplicateComponent(name.clone()));
            }
            if *count == 0 {
                return Err(ModelError::EmptyComponent(name.clone()));
            }
            components.push(name.clone());
            labels.push(vec![BTreeSet::new(); *count]);
        }
        let lens: Vec<usize> = labels.iter().map(Vec::len).collect();
        let resolve = |(c, i): &(String, usize)| -> Result<StateId, ModelError> {
            let component = components
                .iter()
                .position(|n| n == c)
                .ok_or_else(|| ModelError::UndeclaredComponent(c.clone()))?;
            let len = lens[component];
            if *i >= len {
                return Err(ModelError::IndexOutOfRange {
                    component: c.clone(),
                    index: *i,
                    len,
                });
            }
            Ok(StateId {
                component,
                index: *i,
            })
        };
        let mut seen = BTreeSet::new();
        for (state, props) in &decl.labels {
            let id = resolve(state)?;
            if !seen.insert(id) {
                return Err(ModelError::DuplicateState(format!(
                    "{}.{}",
                    state.0, state.1
                )));
            }
            labels[id.component][id.index] = props.iter().cloned().collect();
        }
        let mut messages = Vec::new();
        for (src, dst) in &decl.messages {
            let (s, d) = (resolve(src)?, resolve(dst)?);
            if s.component == d.component {
                return Err(ModelError::SameComponentMessage(
                    format!("{}.{}", src.0, src.1),
                    format!("{}.{}", dst.0, dst.1),
                ));
            }
            if !messages.contains(&(s, d)) {
                messages.push((s, d));
            }
        }
        Computation::assemble(components, labels, messages)
    }

    fn assemble(
        components: Vec<String>,
        labels: Vec<Vec<BTreeSet<String>>>,
        messages: Vec<(StateId, StateId)>,
    ) -> Result<Computation, ModelError> {
        let mut offsets = Vec::with_capacity(components.len());
        let mut n_states = 0;
        for l in &labels {
            offsets.push(n_states);
            n_states += l.len();
        }
        let points = n_states + components.len();
        if points > MAX_POINTS {
            return Err(ModelError::TooLarge {
                found: points,
                max: MAX_POINTS,
            });
        }
        let mut c = Computation {
            components,
            labels,
            messages,
            offsets,
            n_states,
            reach: vec![],
            step: vec![],
        };
        let succ = c.successors();
        // Kahn's algorithm; any state left over sits on a cycle.
        let mut indeg = vec![0usize; n_states];
        for out in &succ {
            for &t in out {
                indeg[t] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n_states).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n_states);
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for &t in &succ[s] {
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    queue.push_back(t);
                }
            }
        }
        if order.len() < n_states {
            let stuck = (0..n_states).find(|&i| indeg[i] > 0).unwrap();
            return Err(ModelError::CausalCycle(c.point_name(stuck)));
        }
        let mut step = vec![0u64; points];
        for s in 0..n_states {
            step[s] = 1 << s;
            for &t in &succ[s] {
                step[s] |= 1 << t;
            }
        }
        for (k, _) in c.components.iter().enumerate() {
            let tail = n_states + k;
            step[tail] = 1 << tail;
            step[c.last_point(k)] |= 1 << tail;
        }
        let mut reach = step.clone();
        for &s in order.iter().rev() {
            let mut r = reach[s];
            for &t in &succ[s] {
                r |= reach[t];
            }
            r |= reach[s];
            reach[s] = r;
        }
        // tails of components whose last state is reachable
        for s in 0..n_states {
            for k in 0..c.components.len() {
                if reach[s] >> c.last_point(k) & 1 == 1 {
                    reach[s] |= 1 << (n_states + k);
                }
            }
        }
        c.reach = reach;
        c.step = step;
        Ok(c)
    }

    /// Immediate successors (local next state and message targets) per state.
    fn successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.n_states];
        for (k, l) in self.labels.iter().enumerate() {
            for i in 0..l.len().saturating_sub(1) {
                succ[self.offsets[k] + i].push(self.offsets[k] + i + 1);
            }
        }
        for (s, d) in &self.messages {
            succ[self.point(*s)].push(self.point(*d));
        }
        succ
    }

    pub fn from_text(text: &str) -> Result<Computation, ModelError> {
        Computation::build(&parse_model(text)?)
    }

    pub fn components(&self) -> &[String] {
        &self.components
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c == name)
    }

    pub fn len(&self, component: usize) -> usize {
        self.labels[component].len()
    }

    pub fn num_states(&self) -> usize {
        self.n_states
    }

    /// States plus one tail per component.
    pub fn num_points(&self) -> usize {
        self.n_states + self.components.len()
    }

    pub fn messages(&self) -> &[(StateId, StateId)] {
        &self.messages
    }

    pub fn state(&self, component: &str, index: usize) -> Option<StateId> {
        let c = self.component_index(component)?;
        (index < self.len(c)).then_some(StateId {
            component: c,
            index,
        })
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.components.len()).flat_map(move |c| {
            (0..self.len(c)).map(move |i| StateId {
                component: c,
                index: i,
            })
        })
    }

    pub fn point(&self, s: StateId) -> usize {
        self.offsets[s.component] + s.index
    }

    pub fn is_tail(&self, point: usize) -> bool {
        point >= self.n_states
    }

    pub fn tail_point(&self, component: usize) -> usize {
        self.n_states + component
    }

    fn last_point(&self, component: usize) -> usize {
        self.offsets[component] + self.labels[component].len() - 1
    }

    pub fn point_component(&self, point: usize) -> usize {
        if point >= self.n_states {
            return point - self.n_states;
        }
        self.offsets.partition_point(|&o| o <= point) - 1
    }

    /// The state a point stands for; tails stand for their component's last state.
    pub fn point_state(&self, point: usize) -> StateId {
        let component = self.point_component(point);
        let index = if point >= self.n_states {
            self.len(component) - 1
        } else {
            point - self.offsets[component]
        };
        StateId { component, index }
    }

    pub fn point_name(&self, point: usize) -> String {
        let c = self.point_component(point);
        if self.is_tail(point) {
            format!("{}.*", self.components[c])
        } else {
            format!("{}.{}", self.components[c], point - self.offsets[c])
        }
    }

    pub fn labels(&self, s: StateId) -> &BTreeSet<String> {
        &self.labels[s.component][s.index]
    }

    pub fn point_labels(&self, point: usize) -> &BTreeSet<String> {
        self.labels(self.point_state(point))
    }

    pub fn props(&self) -> BTreeSet<String> {
        self.labels.iter().flatten().flatten().cloned().collect()
    }

    /// Mask of all state points (no tails).
    pub fn states_mask(&self) -> u64 {
        low_bits(self.n_states)
    }

    pub fn points_mask(&self) -> u64 {
        low_bits(self.num_points())
    }

    pub fn tails_mask(&self) -> u64 {
        self.points_mask() & !self.states_mask()
    }

    /// Points (states and tail) belonging to a component.
    pub fn component_mask(&self, component: usize) -> u64 {
        let lo = self.offsets[component];
        (low_bits(self.len(component)) << lo) | 1 << self.tail_point(component)
    }

    /// Points whose labels contain `prop`.
    pub fn prop_mask(&self, prop: &str) -> u64 {
        (0..self.num_points())
            .filter(|&p| self.point_labels(p).contains(prop))
            .fold(0, |m, p| m | 1 << p)
    }

    /// Reflexive-transitive reachability from a point, as a point mask.
    pub fn reach_mask(&self, point: usize) -> u64 {
        self.reach[point]
    }

    /// Reflexive one-step successors of a point.
    pub fn step_mask(&self, point: usize) -> u64 {
        self.step[point]
    }

    /// R*: `(s, t)` when `t` causally depends on `s`.
    pub fn causally_precedes(&self, s: StateId, t: StateId) -> bool {
        self.reach[self.point(s)] >> self.point(t) & 1 == 1
    }

    /// R=: equal, or `t` is the local successor of `s`, or a message goes from `s` to `t`.
    pub fn next_or_same(&self, s: StateId, t: StateId) -> bool {
        self.step[self.point(s)] >> self.point(t) & 1 == 1
    }

    pub fn initial_ds(&self) -> DistributedState {
        let bits = self.offsets.iter().fold(0u64, |m, &o| m | 1 << o);
        DistributedState { bits }
    }

    /// Model-file rendering; parses back to an equal computation.
    pub fn to_model_text(&self) -> String {
        let mut out = String::new();
        for (k, name) in self.components.iter().enumerate() {
            out.push_str(&format!("component {name}: {}\n", self.len(k)));
        }
        for s in self.states() {
            let l = self.labels(s);
            if !l.is_empty() {
                let props: Vec<&str> = l.iter().map(String::as_str).collect();
                out.push_str(&format!(
                    "labels {}.{}: {}\n",
                    self.components[s.component],
                    s.index,
                    props.join(" ")
                ));
            }
        }
        for (s, d) in &self.messages {
            out.push_str(&format!(
                "msg {}.{} -> {}.{}\n",
                self.components[s.component], s.index, self.components[d.component], d.index
            ));
        }
        out
    }

    pub fn to_decl(&self) -> ComputationDecl {
        parse_model(&self.to_model_text()).expect("rendered model parses")
    }
}

fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Relation R* materialized as reachability over states.
#[derive(Debug, Clone)]
pub struct CausalRelation {
    n: usize,
    rows: Vec<u64>,
}

impl CausalRelation {
    pub fn contains(&self, c: &Computation, s: StateId, t: StateId) -> bool {
        self.rows[c.point(s)] >> c.point(t) & 1 == 1
    }

    /// Number of pairs in the relation, reflexive pairs included.
    pub fn pair_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn size(&self) -> usize {
        self.n
    }
}

pub fn causal_closure(c: &Computation) -> CausalRelation {
    let states = c.states_mask();
    CausalRelation {
        n: c.num_states(),
        rows: (0..c.num_states())
            .map(|p| c.reach_mask(p) & states)
            .collect(),
    }
}

pub fn concurrent(c: &Computation, s: StateId, t: StateId) -> bool {
    !c.causally_precedes(s, t) && !c.causally_precedes(t, s)
}

/// A nonempty set of points of one computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DistributedState {
    bits: u64,
}

impl DistributedState {
    pub fn from_bits(bits: u64) -> Option<DistributedState> {
        (bits != 0).then_some(DistributedState { bits })
    }

    pub fn from_states(c: &Computation, states: &[StateId]) -> Option<DistributedState> {
        DistributedState::from_bits(states.iter().fold(0, |m, s| m | 1 << c.point(*s)))
    }

    /// Parses a space-separated list like `m.0 n.2` (`m.*` names a tail).
    pub fn parse(c: &Computation, text: &str) -> Option<DistributedState> {
        let mut bits = 0u64;
        for tok in text.split_whitespace() {
            let (comp, idx) = tok.split_once('.')?;
            let k = c.component_index(comp)?;
            let p = if idx == "*" {
                c.tail_point(k)
            } else {
                c.point(c.state(comp, idx.parse().ok()?)?)
            };
            bits |= 1 << p;
        }
        DistributedState::from_bits(bits)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn points(self) -> impl Iterator<Item = usize> {
        let mut b = self.bits;
        std::iter::from_fn(move || {
            if b == 0 {
                return None;
            }
            let p = b.trailing_zeros() as usize;
            b &= b - 1;
            Some(p)
        })
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn contains(self, point: usize) -> bool {
        self.bits >> point & 1 == 1
    }

    pub fn is_superset_of(self, other: DistributedState) -> bool {
        other.bits & !self.bits == 0
    }

    /// Member names such as `["m.0", "n.2"]`, in point order.
    pub fn names(self, c: &Computation) -> Vec<String> {
        self.points().map(|p| c.point_name(p)).collect()
    }

    pub fn display(self, c: &Computation) -> String {
        self.names(c).join(" ")
    }
}

impl fmt::Display for DistributedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{:#x}}}", self.bits)
    }
}

fn related(rel: impl Fn(usize) -> u64, from: DistributedState, to: DistributedState) -> bool {
    let fwd = from.points().all(|s| rel(s) & to.bits != 0);
    let bwd = to
        .points()
        .all(|t| from.points().any(|s| rel(s) >> t & 1 == 1));
    fwd && bwd
}

/// `ds <= ds2`: every member of `ds` reaches a member of `ds2` under R*, and
/// every member of `ds2` is reached from a member of `ds`.
pub fn leq(c: &Computation, ds: DistributedState, ds2: DistributedState) -> bool {
    related(|p| c.reach_mask(p), ds, ds2)
}

/// As [`leq`] with R= in place of R*.
pub fn leq_c(c: &Computation, ds: DistributedState, ds2: DistributedState) -> bool {
    related(|p| c.step_mask(p), ds, ds2)
}

pub fn initial_ds(c: &Computation) -> DistributedState {
    c.initial_ds()
}

/// Refuses models too large for exhaustive enumeration.
pub fn check_cap(c: &Computation, cap: usize) -> Result<(), CapExceeded> {
    let n = c.num_states();
    if n > cap {
        return Err(CapExceeded { states: n, cap });
    }
    Ok(())
}

/// Every nonempty set of states, in ascending mask order.
pub fn enumerate_ds(
    c: &Computation,
    cap: usize,
) -> Result<impl Iterator<Item = DistributedState>, CapExceeded> {
    check_cap(c, cap)?;
    let n = c.num_states();
    Ok((1..=low_bits(n)).map(|bits| DistributedState { bits }))
}
