//! Abstract syntax for located (DSL) formulae and the temporal layer built
//! on top of them, together with desugaring and rendering.

use std::collections::BTreeSet;
use std::fmt;

/// A formula over propositions and location modalities.
///
/// `Loc(m, f)` is the location operator `<m> f`: some state of component `m`
/// inside the distributed state satisfies `f`. `Box` is its dual `[m] f`.
/// `True`, `Or`, `Implies`, `Iff` and `Box` are surface sugar and disappear
/// under [`Dsl::desugar`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dsl {
    Prop(String),
    False,
    True,
    Not(Box<Dsl>),
    And(Box<Dsl>, Box<Dsl>),
    Or(Box<Dsl>, Box<Dsl>),
    Implies(Box<Dsl>, Box<Dsl>),
    Iff(Box<Dsl>, Box<Dsl>),
    Loc(String, Box<Dsl>),
    Box(String, Box<Dsl>),
}

/// Temporal formulae. Operands are always [`Dsl`] formulae; temporal
/// operators never nest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Temporal {
    Plain(Dsl),
    LeadsTo(Dsl, Dsl),
    Because(Dsl, Dsl),
    LeadsToC(Dsl, Dsl),
    BecauseC(Dsl, Dsl),
    Unless(Dsl, Dsl),
    Init(Dsl),
    /// `stable F`, sugar for `F unless false`.
    Stable(Dsl),
}

/// Binary temporal operators, used for tagging verdicts and rule families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalOp {
    Plain,
    LeadsTo,
    Because,
    LeadsToC,
    BecauseC,
    Unless,
    Init,
}

impl TemporalOp {
    pub fn keyword(self) -> &'static str {
        match self {
            TemporalOp::Plain => "invariant",
            TemporalOp::LeadsTo => "leads_to",
            TemporalOp::Because => "because",
            TemporalOp::LeadsToC => "leads_to_c",
            TemporalOp::BecauseC => "because_c",
            TemporalOp::Unless => "unless",
            TemporalOp::Init => "init",
        }
    }
}

// Constructors.
pub fn prop(name: &str) -> Dsl {
    Dsl::Prop(name.to_string())
}
pub fn not(f: Dsl) -> Dsl {
    Dsl::Not(Box::new(f))
}
pub fn and(a: Dsl, b: Dsl) -> Dsl {
    Dsl::And(Box::new(a), Box::new(b))
}
pub fn or(a: Dsl, b: Dsl) -> Dsl {
    Dsl::Or(Box::new(a), Box::new(b))
}
pub fn implies(a: Dsl, b: Dsl) -> Dsl {
    Dsl::Implies(Box::new(a), Box::new(b))
}
pub fn iff(a: Dsl, b: Dsl) -> Dsl {
    Dsl::Iff(Box::new(a), Box::new(b))
}
pub fn loc(c: &str, f: Dsl) -> Dsl {
    Dsl::Loc(c.to_string(), Box::new(f))
}
pub fn boxed(c: &str, f: Dsl) -> Dsl {
    Dsl::Box(c.to_string(), Box::new(f))
}

impl Dsl {
    /// Rewrites into the core constructors `Prop`, `False`, `Not`, `And`, `Loc`.
    pub fn desugar(&self) -> Dsl {
        match self {
            Dsl::Prop(p) => Dsl::Prop(p.clone()),
            Dsl::False => Dsl::False,
            Dsl::True => not(Dsl::False),
            Dsl::Not(f) => not(f.desugar()),
            Dsl::And(a, b) => and(a.desugar(), b.desugar()),
            // a | b == ~(~a & ~b)
            Dsl::Or(a, b) => not(and(not(a.desugar()), not(b.desugar()))),
            // a -> b == ~(a & ~b)
            Dsl::Implies(a, b) => not(and(a.desugar(), not(b.desugar()))),
            Dsl::Iff(a, b) => {
                let (a, b) = (a.desugar(), b.desugar());
                and(not(and(a.clone(), not(b.clone()))), not(and(b, not(a))))
            }
            Dsl::Loc(c, f) => loc(c, f.desugar()),
            Dsl::Box(c, f) => not(loc(c, not(f.desugar()))),
        }
    }

    pub fn is_core(&self) -> bool {
        match self {
            Dsl::Prop(_) | Dsl::False => true,
            Dsl::Not(f) | Dsl::Loc(_, f) => f.is_core(),
            Dsl::And(a, b) => a.is_core() && b.is_core(),
            _ => false,
        }
    }

    pub fn components(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out, &mut BTreeSet::new());
        out
    }

    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect(&self, comps: &mut BTreeSet<String>, props: &mut BTreeSet<String>) {
        match self {
            Dsl::Prop(p) => {
                props.insert(p.clone());
            }
            Dsl::False | Dsl::True => {}
            Dsl::Not(f) => f.collect(comps, props),
            Dsl::And(a, b) | Dsl::Or(a, b) | Dsl::Implies(a, b) | Dsl::Iff(a, b) => {
                a.collect(comps, props);
                b.collect(comps, props);
            }
            Dsl::Loc(c, f) | Dsl::Box(c, f) => {
                comps.insert(c.clone());
                f.collect(comps, props);
            }
        }
    }

    /// Nesting depth of connectives and modalities; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Dsl::Prop(_) | Dsl::False | Dsl::True => 0,
            Dsl::Not(f) | Dsl::Loc(_, f) | Dsl::Box(_, f) => 1 + f.depth(),
            Dsl::And(a, b) | Dsl::Or(a, b) | Dsl::Implies(a, b) | Dsl::Iff(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Binding strength used by the renderer; higher binds tighter.
    fn precedence(&self) -> u8 {
        match self {
            Dsl::Iff(..) => 1,
            Dsl::Implies(..) => 2,
            Dsl::Or(..) => 3,
            Dsl::And(..) => 4,
            Dsl::Not(_) | Dsl::Loc(..) | Dsl::Box(..) => 5,
            Dsl::Prop(_) | Dsl::False | Dsl::True => 6,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Dsl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `&`, `|` and `<->` associate to the left, `->` to the right.
        let bin = |f: &mut fmt::Formatter<'_>, a: &Dsl, op: &str, b: &Dsl, p: u8, right: bool| {
            let (lmin, rmin) = if right { (p + 1, p) } else { (p, p + 1) };
            a.write_child(f, lmin)?;
            write!(f, " {op} ")?;
            b.write_child(f, rmin)
        };
        match self {
            Dsl::Prop(p) => write!(f, "{p}"),
            Dsl::False => write!(f, "false"),
            Dsl::True => write!(f, "true"),
            Dsl::Not(g) => {
                write!(f, "~")?;
                g.write_child(f, 5)
            }
            Dsl::Loc(c, g) => {
                write!(f, "<{c}> ")?;
                g.write_child(f, 5)
            }
            Dsl::Box(c, g) => {
                write!(f, "[{c}] ")?;
                g.write_child(f, 5)
            }
            Dsl::And(a, b) => bin(f, a, "&", b, 4, false),
            Dsl::Or(a, b) => bin(f, a, "|", b, 3, false),
            Dsl::Implies(a, b) => bin(f, a, "->", b, 2, true),
            Dsl::Iff(a, b) => bin(f, a, "<->", b, 1, false),
        }
    }
}

impl Temporal {
    /// Desugars both operands and rewrites `stable F` to `F unless false`.
    pub fn desugar(&self) -> Temporal {
        use Temporal::*;
        match self {
            Plain(f) => Plain(f.desugar()),
            LeadsTo(a, b) => LeadsTo(a.desugar(), b.desugar()),
            Because(a, b) => Because(a.desugar(), b.desugar()),
            LeadsToC(a, b) => LeadsToC(a.desugar(), b.desugar()),
            BecauseC(a, b) => BecauseC(a.desugar(), b.desugar()),
            Unless(a, b) => Unless(a.desugar(), b.desugar()),
            Init(f) => Init(f.desugar()),
            Stable(f) => Unless(f.desugar(), Dsl::False),
        }
    }

    pub fn op(&self) -> TemporalOp {
        match self {
            Temporal::Plain(_) => TemporalOp::Plain,
            Temporal::LeadsTo(..) => TemporalOp::LeadsTo,
            Temporal::Because(..) => TemporalOp::Because,
            Temporal::LeadsToC(..) => TemporalOp::LeadsToC,
            Temporal::BecauseC(..) => TemporalOp::BecauseC,
            Temporal::Unless(..) | Temporal::Stable(_) => TemporalOp::Unless,
            Temporal::Init(_) => TemporalOp::Init,
        }
    }

    /// The DSL operands in left-to-right order.
    pub fn operands(&self) -> Vec<&Dsl> {
        use Temporal::*;
        match self {
            Plain(f) | Init(f) | Stable(f) => vec![f],
            LeadsTo(a, b) | Because(a, b) | LeadsToC(a, b) | BecauseC(a, b) | Unless(a, b) => {
                vec![a, b]
            }
        }
    }

    pub fn components(&self) -> BTreeSet<String> {
        self.operands()
            .into_iter()
            .flat_map(|f| f.components())
            .collect()
    }

    pub fn props(&self) -> BTreeSet<String> {
        self.operands()
            .into_iter()
            .flat_map(|f| f.props())
            .collect()
    }

    pub fn is_temporal(&self) -> bool {
        !matches!(self, Temporal::Plain(_))
    }

    /// Renders `F unless false` as `stable F`.
    pub fn render_with_stable_sugar(&self) -> String {
        match self {
            Temporal::Unless(f, Dsl::False) => Temporal::Stable(f.clone()).to_string(),
            other => other.to_string(),
        }
    }
}

impl From<Dsl> for Temporal {
    fn from(f: Dsl) -> Self {
        Temporal::Plain(f)
    }
}

impl fmt::Display for Temporal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Temporal::*;
        match self {
            Plain(g) => write!(f, "{g}"),
            Init(g) => write!(f, "init {g}"),
            Stable(g) => write!(f, "stable {g}"),
            LeadsTo(a, b) | Because(a, b) | LeadsToC(a, b) | BecauseC(a, b) | Unless(a, b) => {
                write!(f, "{a} {} {b}", self.op().keyword())
            }
        }
    }
}
