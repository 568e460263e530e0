//! Explicit Kripke models, the frame conditions on located accessibility,
//! and the frame induced by a computation (a testing oracle for
//! [`crate::semantics::satisfies`]).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::computation::{Computation, DistributedState};
use crate::formula::Dsl;
use crate::semantics::valuation;

pub const FRAME_STATE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("computation has {0} states, frames are limited to {FRAME_STATE_LIMIT}")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KripkeModel {
    worlds: Vec<String>,
    /// Per component, the accessibility pairs as world indices.
    reach: BTreeMap<String, BTreeSet<(usize, usize)>>,
    valuation: Vec<BTreeSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameViolation {
    /// 1, 2 or 3.
    pub condition: u8,
    pub component: String,
    /// For condition 3, the component of the offending outgoing edge.
    pub other: Option<String>,
    pub triple: (String, String, String),
}

impl fmt::Display for FrameViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (u, v, w) = &self.triple;
        match self.condition {
            1 => write!(f, "rc1 [{}]: {u} -> {v} but no loop at {w}", self.component),
            2 => write!(
                f,
                "rc2 [{}]: {u} -> {v} -> {w} with {v} != {w}",
                self.component
            ),
            _ => write!(
                f,
                "rc3 [{}]: {u} -> {v} but {v} -> {w} in [{}]",
                self.component,
                self.other.as_deref().unwrap_or("?")
            ),
        }
    }
}

impl KripkeModel {
    pub fn new() -> KripkeModel {
        KripkeModel::default()
    }

    /// Adds a world (or returns the existing one) and its index.
    pub fn add_world(&mut self, id: &str) -> usize {
        if let Some(i) = self.world_index(id) {
            return i;
        }
        self.worlds.push(id.to_string());
        self.valuation.push(BTreeSet::new());
        self.worlds.len() - 1
    }

    pub fn add_edge(&mut self, component: &str, from: &str, to: &str) {
        let (u, v) = (self.add_world(from), self.add_world(to));
        self.reach
            .entry(component.to_string())
            .or_default()
            .insert((u, v));
    }

    pub fn remove_edge(&mut self, component: &str, from: &str, to: &str) -> bool {
        let (Some(u), Some(v)) = (self.world_index(from), self.world_index(to)) else {
            return false;
        };
        self.reach
            .get_mut(component)
            .is_some_and(|r| r.remove(&(u, v)))
    }

    pub fn set_valuation(&mut self, world: &str, props: impl IntoIterator<Item = String>) {
        let w = self.add_world(world);
        self.valuation[w] = props.into_iter().collect();
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_index(&self, id: &str) -> Option<usize> {
        self.worlds.iter().position(|w| w == id)
    }

    pub fn edge_count(&self) -> usize {
        self.reach.values().map(BTreeSet::len).sum()
    }

    /// Worlds reachable from `world` through `component`'s relation.
    pub fn successors(&self, component: &str, world: &str) -> Vec<&str> {
        let Some(u) = self.world_index(world) else {
            return vec![];
        };
        self.reach
            .get(component)
            .into_iter()
            .flatten()
            .filter(|(a, _)| *a == u)
            .map(|(_, b)| self.worlds[*b].as_str())
            .collect()
    }

    fn eval(&self, w: usize, f: &Dsl) -> bool {
        match f {
            Dsl::Prop(p) => self.valuation[w].contains(p),
            Dsl::False => false,
            Dsl::True => true,
            Dsl::Not(g) => !self.eval(w, g),
            Dsl::And(a, b) => self.eval(w, a) && self.eval(w, b),
            Dsl::Or(a, b) => self.eval(w, a) || self.eval(w, b),
            Dsl::Implies(a, b) => !self.eval(w, a) || self.eval(w, b),
            Dsl::Iff(a, b) => self.eval(w, a) == self.eval(w, b),
            Dsl::Loc(m, g) => self.out(m, w).any(|v| self.eval(v, g)),
            Dsl::Box(m, g) => self.out(m, w).all(|v| self.eval(v, g)),
        }
    }

    fn out<'a>(&'a self, m: &str, w: usize) -> impl Iterator<Item = usize> + 'a {
        self.reach
            .get(m)
            .into_iter()
            .flatten()
            .filter(move |(a, _)| *a == w)
            .map(|(_, b)| *b)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (w, id) in self.worlds.iter().enumerate() {
            out.push_str(&format!("world {id}\n"));
            if !self.valuation[w].is_empty() {
                let props: Vec<&str> = self.valuation[w].iter().map(String::as_str).collect();
                out.push_str(&format!("val {id}: {}\n", props.join(" ")));
            }
        }
        for (m, pairs) in &self.reach {
            for (u, v) in pairs {
                out.push_str(&format!(
                    "edge {m}: {} -> {}\n",
                    self.worlds[*u], self.worlds[*v]
                ));
            }
        }
        out
    }

    /// Parses `world <id>`, `edge <i>: <id> -> <id>` and `val <id>: p q` lines.
    pub fn from_text(text: &str) -> Result<KripkeModel, KripkeError> {
        let mut km = KripkeModel::new();
        for (n, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: &str| KripkeError::Syntax {
                line: n + 1,
                msg: msg.to_string(),
            };
            let (kw, rest) = content
                .split_once(char::is_whitespace)
                .ok_or_else(|| err("missing arguments"))?;
            match kw {
                "world" => {
                    km.add_world(rest.trim());
                }
                "val" => {
                    let (w, props) = rest
                        .split_once(':')
                        .ok_or_else(|| err("expected `val <id>: props`"))?;
                    km.set_valuation(w.trim(), props.split_whitespace().map(str::to_string));
                }
                "edge" => {
                    let (m, pair) = rest
                        .split_once(':')
                        .ok_or_else(|| err("expected `edge <i>: <u> -> <v>`"))?;
                    let (u, v) = pair.split_once("->").ok_or_else(|| err("expected `->`"))?;
                    km.add_edge(m.trim(), u.trim(), v.trim());
                }
                other => return Err(err(&format!("unknown directive `{other}`"))),
            }
        }
        Ok(km)
    }
}

pub fn kripke_satisfies(km: &KripkeModel, world: &str, f: &Dsl) -> Result<bool, KripkeError> {
    let w = km
        .world_index(world)
        .ok_or_else(|| KripkeError::UnknownWorld(world.to_string()))?;
    Ok(km.eval(w, f))
}

/// Checks rc1 (targets are reflexive), rc2 (targets only reach themselves)
/// and rc3 (targets have no edges of other components), per component.
pub fn validate_frame(km: &KripkeModel) -> Vec<FrameViolation> {
    let name = |i: usize| km.worlds[i].clone();
    let mut out = Vec::new();
    for (m, pairs) in &km.reach {
        for &(u, v) in pairs {
            if !pairs.contains(&(v, v)) {
                out.push(FrameViolation {
                    condition: 1,
                    component: m.clone(),
                    other: None,
                    triple: (name(u), name(v), name(v)),
                });
            }
            for &(_, w) in pairs.range((v, 0)..=(v, usize::MAX)) {
                if w != v {
                    out.push(FrameViolation {
                        condition: 2,
                        component: m.clone(),
                        other: None,
                        triple: (name(u), name(v), name(w)),
                    });
                }
            }
            for (j, other) in &km.reach {
                if j == m {
                    continue;
                }
                for &(_, w) in other.range((v, 0)..=(v, usize::MAX)) {
                    out.push(FrameViolation {
                        condition: 3,
                        component: m.clone(),
                        other: Some(j.clone()),
                        triple: (name(u), name(v), name(w)),
                    });
                }
            }
        }
    }
    out
}

/// World name for a distributed state, e.g. `m.0+n.1`.
pub fn world_name(c: &Computation, ds: DistributedState) -> String {
    ds.names(c).join("+")
}

/// The frame whose worlds are the nonempty sets of states and where `ds`
/// reaches `{s}` through component `i` exactly when `s` is an `i`-state in `ds`.
pub fn ds_frame(c: &Computation) -> Result<KripkeModel, KripkeError> {
    let n = c.num_states();
    if n > FRAME_STATE_LIMIT {
        return Err(KripkeError::TooLarge(n));
    }
    let mut km = KripkeModel::new();
    for bits in 1..(1u64 << n) {
        let ds = DistributedState::from_bits(bits).unwrap();
        km.set_valuation(&world_name(c, ds), valuation(c, ds));
    }
    for bits in 1..(1u64 << n) {
        let ds = DistributedState::from_bits(bits).unwrap();
        for p in ds.points() {
            let m = &c.components()[c.point_component(p)];
            let leaf = DistributedState::from_bits(1 << p).unwrap();
            km.add_edge(m, &world_name(c, ds), &world_name(c, leaf));
        }
    }
    Ok(km)
}
