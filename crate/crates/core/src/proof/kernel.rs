//! Line-by-line checking, first-order schema matching and the lemma library.

use std::collections::BTreeMap;

use crate::checker::{check, CheckOptions};
use crate::computation::{CapExceeded, Computation};
use crate::formula::{Dsl, Temporal};
use crate::taut::is_tautology;

use super::catalog::{lookup, Schema, Signature};
use super::script::parse_scripts;
use super::{Justification, Level, LineError, ProofError, ProofScript};

/// Desugars and removes double negations at every depth.
pub fn normalize(f: &Dsl) -> Dsl {
    strip(&f.desugar())
}

fn strip(f: &Dsl) -> Dsl {
    match f {
        Dsl::Not(g) => match strip(g) {
            Dsl::Not(h) => *h,
            g => Dsl::Not(Box::new(g)),
        },
        Dsl::And(a, b) => Dsl::And(Box::new(strip(a)), Box::new(strip(b))),
        Dsl::Loc(m, g) => Dsl::Loc(m.clone(), Box::new(strip(g))),
        other => other.clone(),
    }
}

pub fn normalize_temporal(t: &Temporal) -> Temporal {
    map_operands(&t.desugar(), strip)
}

fn map_operands(t: &Temporal, f: impl Fn(&Dsl) -> Dsl) -> Temporal {
    use Temporal::*;
    match t {
        Plain(a) => Plain(f(a)),
        Init(a) => Init(f(a)),
        Stable(a) => Stable(f(a)),
        LeadsTo(a, b) => LeadsTo(f(a), f(b)),
        Because(a, b) => Because(f(a), f(b)),
        LeadsToC(a, b) => LeadsToC(f(a), f(b)),
        BecauseC(a, b) => BecauseC(f(a), f(b)),
        Unless(a, b) => Unless(f(a), f(b)),
    }
}

#[derive(Debug, Clone, Default)]
struct Bindings {
    formulas: BTreeMap<String, Dsl>,
    comps: BTreeMap<String, String>,
}

impl Bindings {
    fn bind_formula(&mut self, var: &str, value: Dsl) -> bool {
        match self.formulas.get(var) {
            Some(v) => *v == value,
            None => {
                self.formulas.insert(var.to_string(), value);
                true
            }
        }
    }

    fn bind_comp(&mut self, var: &str, value: &str) -> bool {
        match self.comps.get(var) {
            Some(v) => v == value,
            None => {
                self.comps.insert(var.to_string(), value.to_string());
                true
            }
        }
    }
}

/// Matches a normalized pattern against a normalized formula.
fn match_dsl(pat: &Dsl, t: &Dsl, b: &mut Bindings) -> bool {
    match (pat, t) {
        (Dsl::Prop(x), _) => b.bind_formula(x, t.clone()),
        (Dsl::False, Dsl::False) => true,
        (Dsl::Not(p), Dsl::Not(u)) => match_dsl(p, u, b),
        // `~F` against a formula without a leading negation: F is its negation
        (Dsl::Not(p), _) => match p.as_ref() {
            Dsl::Prop(x) => b.bind_formula(x, Dsl::Not(Box::new(t.clone()))),
            _ => false,
        },
        (Dsl::And(p, q), Dsl::And(u, v)) => match_dsl(p, u, b) && match_dsl(q, v, b),
        (Dsl::Loc(m, p), Dsl::Loc(n, u)) => b.bind_comp(m, n) && match_dsl(p, u, b),
        _ => false,
    }
}

fn match_temporal(pat: &Temporal, t: &Temporal, b: &mut Bindings) -> bool {
    if pat.op() != t.op() {
        return false;
    }
    pat.operands()
        .iter()
        .zip(t.operands())
        .all(|(p, u)| match_dsl(p, u, b))
}

fn subst(f: &Dsl, formulas: &BTreeMap<String, Dsl>, comps: &BTreeMap<String, String>) -> Dsl {
    match f {
        Dsl::Prop(x) => formulas.get(x).cloned().unwrap_or_else(|| f.clone()),
        Dsl::Not(g) => Dsl::Not(Box::new(subst(g, formulas, comps))),
        Dsl::And(a, c) => Dsl::And(
            Box::new(subst(a, formulas, comps)),
            Box::new(subst(c, formulas, comps)),
        ),
        Dsl::Loc(m, g) => Dsl::Loc(
            comps.get(m).cloned().unwrap_or_else(|| m.clone()),
            Box::new(subst(g, formulas, comps)),
        ),
        other => other.clone(),
    }
}

/// Substitutes bound metavariables into a normalized schema formula.
pub(crate) fn instantiate(
    pat: &Temporal,
    formulas: &BTreeMap<String, Dsl>,
    comps: &BTreeMap<String, String>,
) -> Temporal {
    map_operands(pat, |f| strip(&subst(f, formulas, comps)))
}

/// A checked script: its hypotheses and final line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem {
    pub name: String,
    pub hyps: Vec<Temporal>,
    pub conclusion: Temporal,
    pub level: Level,
}

#[derive(Debug, Clone)]
pub struct CheckedLemma {
    pub schema: Schema,
    pub theorem: Theorem,
    pub script: ProofScript,
}

/// Lemmas citable as derived rules, in registration order.
#[derive(Debug, Clone, Default)]
pub struct LemmaLibrary {
    lemmas: Vec<CheckedLemma>,
}

const BUNDLED: &str = include_str!("../../corpus/lemmas.proofs");

impl LemmaLibrary {
    pub fn new() -> LemmaLibrary {
        LemmaLibrary::default()
    }

    /// The library of derived DSL theorems and leads_to corollaries that
    /// ships with the crate.
    pub fn bundled() -> LemmaLibrary {
        let mut lib = LemmaLibrary::new();
        lib.load(BUNDLED).expect("bundled lemmas check");
        lib
    }

    /// Checks and registers every script of a file, in order.
    pub fn load(&mut self, text: &str) -> Result<Vec<Theorem>, ProofError> {
        let mut out = Vec::new();
        for s in parse_scripts(text)? {
            out.push(self.register(s)?.theorem.clone());
        }
        Ok(out)
    }

    pub fn register(&mut self, script: ProofScript) -> Result<&CheckedLemma, ProofError> {
        if self.get(&script.name).is_some() || lookup(&script.name).is_some() {
            return Err(ProofError::Duplicate(script.name));
        }
        let theorem = check_proof(&script, self)?;
        let schema = generalize(&theorem);
        self.lemmas.push(CheckedLemma {
            schema,
            theorem,
            script,
        });
        Ok(self.lemmas.last().unwrap())
    }

    pub fn get(&self, name: &str) -> Option<&CheckedLemma> {
        self.lemmas.iter().find(|l| l.schema.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.lemmas.iter().map(|l| l.schema.name.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }
}

fn generalize(t: &Theorem) -> Schema {
    let mut comps: Vec<String> = Vec::new();
    let mut formula_params: Vec<String> = Vec::new();
    for f in t.hyps.iter().chain([&t.conclusion]) {
        for c in f.components() {
            if !comps.contains(&c) {
                comps.push(c);
            }
        }
        for p in f.props() {
            if !formula_params.contains(&p) {
                formula_params.push(p);
            }
        }
    }
    Schema {
        name: t.name.clone(),
        premises: t.hyps.iter().map(normalize_temporal).collect(),
        conclusion: normalize_temporal(&t.conclusion),
        signature: Signature::Fixed {
            premises: Level::Dstl,
            conclusion: t.level,
        },
        comp_params: comps,
        formula_params,
        distinct: Vec::new(),
        injective: true,
    }
}

pub fn register_lemma(script: ProofScript, lib: &mut LemmaLibrary) -> Result<(), ProofError> {
    lib.register(script).map(|_| ())
}

fn resolve<'a>(name: &str, lib: &'a LemmaLibrary) -> Option<&'a Schema> {
    lookup(name).or_else(|| lib.get(name).map(|l| &l.schema))
}

/// Checks a cited schema against premise lines and the line's formula.
pub(crate) fn apply_schema(
    schema: &Schema,
    premises: &[(&Temporal, Level)],
    premise_numbers: &[usize],
    inst: &[String],
    target: &Temporal,
) -> Result<Level, LineError> {
    if premises.len() != schema.premises.len() {
        return Err(LineError::Arity {
            rule: schema.name.clone(),
            expected: schema.premises.len(),
            found: premises.len(),
        });
    }
    let level = match schema.signature {
        Signature::Same => {
            let first = premises.first().map_or(Level::Dsl, |p| p.1);
            if premises.iter().any(|p| p.1 != first) {
                return Err(LineError::MixedLevels);
            }
            first
        }
        Signature::Fixed {
            premises: want,
            conclusion,
        } => {
            for (i, (_, lvl)) in premises.iter().enumerate() {
                if *lvl != want {
                    return Err(LineError::Level {
                        rule: schema.name.clone(),
                        line: premise_numbers[i],
                        expected: want,
                        found: *lvl,
                    });
                }
            }
            conclusion
        }
    };
    let mut b = Bindings::default();
    let mut toks = inst.iter();
    for (c, tok) in schema.comp_params.iter().zip(toks.by_ref()) {
        b.bind_comp(c, tok);
    }
    for (f, tok) in schema.formula_params.iter().zip(toks.by_ref()) {
        b.bind_formula(f, Dsl::Prop(tok.clone()));
    }
    if toks.next().is_some() {
        return Err(LineError::ExtraTokens);
    }
    let mismatch = |pat: &Temporal, actual: &Temporal, b: &Bindings| LineError::SchemaMismatch {
        expected: instantiate(pat, &b.formulas, &b.comps).to_string(),
        actual: actual.to_string(),
    };
    for (pat, (actual, _)) in schema.premises.iter().zip(premises) {
        let actual = normalize_temporal(actual);
        if !match_temporal(pat, &actual, &mut b) {
            return Err(mismatch(pat, &actual, &b));
        }
    }
    let target = normalize_temporal(target);
    if !match_temporal(&schema.conclusion, &target, &mut b) {
        return Err(mismatch(&schema.conclusion, &target, &b));
    }
    for (m, n) in &schema.distinct {
        if b.comps.get(m) == b.comps.get(n) {
            let name = b.comps.get(m).cloned().unwrap_or_default();
            return Err(LineError::SameComponent(name.clone(), name));
        }
    }
    if schema.injective {
        let mut seen: Vec<&String> = b.comps.values().collect();
        seen.sort();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(LineError::NotInjective(w[0].clone()));
        }
    }
    if level == Level::Dsl && target.is_temporal() {
        return Err(LineError::NotPlain(target.to_string()));
    }
    Ok(level)
}

/// Checks every line; the final line is the theorem.
pub fn check_proof(script: &ProofScript, lib: &LemmaLibrary) -> Result<Theorem, ProofError> {
    if script.lines.is_empty() {
        return Err(ProofError::Empty(script.name.clone()));
    }
    let mut levels: Vec<Level> = Vec::new();
    let mut hyps = Vec::new();
    for line in &script.lines {
        let fail = |error: LineError| ProofError::Line {
            script: script.name.clone(),
            number: line.number,
            error,
        };
        let level = match &line.justification {
            Justification::Hyp => {
                hyps.push(line.formula.clone());
                Level::Dstl
            }
            Justification::Taut => {
                let Temporal::Plain(f) = &line.formula else {
                    return Err(fail(LineError::NotPlain(line.formula.to_string())));
                };
                if !is_tautology(&normalize(f)).map_err(|e| fail(e.into()))? {
                    return Err(fail(LineError::NotTautology));
                }
                Level::Dsl
            }
            Justification::Cite {
                name,
                premises,
                inst,
            } => {
                let schema =
                    resolve(name, lib).ok_or_else(|| fail(LineError::Unknown(name.clone())))?;
                let mut cited = Vec::new();
                for &p in premises {
                    if p == 0 || p >= line.number {
                        return Err(fail(LineError::ForwardCitation(p)));
                    }
                    cited.push((&script.lines[p - 1].formula, levels[p - 1]));
                }
                apply_schema(schema, &cited, premises, inst, &line.formula).map_err(fail)?
            }
        };
        levels.push(level);
    }
    let last = script.lines.last().unwrap();
    Ok(Theorem {
        name: script.name.clone(),
        hyps,
        conclusion: last.formula.clone(),
        level: *levels.last().unwrap(),
    })
}

/// Per-line truth of a checked script on one computation.
#[derive(Debug, Clone)]
pub struct BridgeReport {
    pub lines: Vec<(usize, bool)>,
    pub hyps_hold: bool,
}

impl BridgeReport {
    /// Derived lines failing while every hypothesis holds: a kernel bug.
    pub fn violations(&self, script: &ProofScript) -> Vec<usize> {
        if !self.hyps_hold {
            return Vec::new();
        }
        self.lines
            .iter()
            .zip(&script.lines)
            .filter(|((_, ok), l)| !ok && l.justification != Justification::Hyp)
            .map(|((n, _), _)| *n)
            .collect()
    }
}

pub fn soundness_bridge(
    c: &Computation,
    script: &ProofScript,
    opts: CheckOptions,
) -> Result<BridgeReport, CapExceeded> {
    let mut lines = Vec::new();
    let mut hyps_hold = true;
    for l in &script.lines {
        let holds = check(c, &l.formula, opts)?.holds;
        if l.justification == Justification::Hyp {
            hyps_hold &= holds;
        }
        lines.push((l.number, holds));
    }
    Ok(BridgeReport { lines, hyps_hold })
}

/// A single-line change to a script's citations.
#[derive(Debug, Clone)]
pub struct Mutation {
    pub line: usize,
    pub description: String,
    pub script: ProofScript,
}

/// Premise swaps and citation shifts; a mutation that cites a line with an
/// identical formula is skipped since it changes nothing.
pub fn mutations(script: &ProofScript) -> Vec<Mutation> {
    let formula = |n: usize| normalize_temporal(&script.lines[n - 1].formula);
    let mut out = Vec::new();
    for (i, line) in script.lines.iter().enumerate() {
        let Justification::Cite {
            name,
            premises,
            inst,
        } = &line.justification
        else {
            continue;
        };
        if premises.iter().any(|&p| p == 0 || p >= line.number) {
            continue;
        }
        let mut variant = |ps: Vec<usize>, description: String| {
            let mut s = script.clone();
            s.lines[i].justification = Justification::Cite {
                name: name.clone(),
                premises: ps,
                inst: inst.clone(),
            };
            out.push(Mutation {
                line: line.number,
                description,
                script: s,
            });
        };
        if premises.len() >= 2 && formula(premises[0]) != formula(premises[1]) {
            let mut ps = premises.clone();
            ps.swap(0, 1);
            variant(ps, format!("swap premises of line {}", line.number));
        }
        if let Some(&first) = premises.first() {
            if first > 1 && formula(first - 1) != formula(first) {
                let mut ps = premises.clone();
                ps[0] = first - 1;
                variant(
                    ps,
                    format!(
                        "line {} cites {} instead of {first}",
                        line.number,
                        first - 1
                    ),
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_dsl;

    fn script(text: &str) -> ProofScript {
        parse_scripts(text).unwrap().remove(0)
    }

    #[test]
    fn bundled_library_and_its_mutations() {
        let scripts = parse_scripts(BUNDLED).unwrap();
        let names: Vec<&str> = scripts.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(
            names,
            ["A4", "D1", "D2", "D3", "D4", "D5", "D6", "D7", "D8", "Cor1", "Cor2"]
        );
        let mut lib = LemmaLibrary::new();
        for s in scripts {
            for m in mutations(&s) {
                let err = check_proof(&m.script, &lib).unwrap_err();
                assert_eq!(
                    err.line_number(),
                    Some(m.line),
                    "{}: {}",
                    s.name,
                    m.description
                );
            }
            lib.register(s).unwrap();
        }
        assert_eq!(lib.get("Cor1").unwrap().schema.premises.len(), 2);
        assert_eq!(lib.get("D5").unwrap().theorem.level, Level::Dsl);
        assert_eq!(lib.get("Cor2").unwrap().theorem.level, Level::Dstl);
    }

    #[test]
    fn normalize_strips_nested_double_negation() {
        let f = parse_dsl("<m> ~~p & ~~~q").unwrap();
        assert_eq!(normalize(&f), parse_dsl("<m> p & ~q").unwrap());
    }

    #[test]
    fn negated_metavariable_matches_positive_formula() {
        let mut b = Bindings::default();
        let pat = normalize(&parse_dsl("~F").unwrap());
        assert!(match_dsl(
            &pat,
            &normalize(&parse_dsl("p").unwrap()),
            &mut b
        ));
        assert_eq!(b.formulas["F"], parse_dsl("~p").unwrap());
    }

    #[test]
    fn axiom_four() {
        let s = script(
            "lemma A4
1. [m]([m]F <-> F) ; DSL1 m
2. ([m]F <-> F) -> (F -> [m]F) ; taut
3. [m](([m]F <-> F) -> (F -> [m]F)) ; Nec 2 m
4. [m](([m]F <-> F) -> (F -> [m]F)) -> ([m]([m]F <-> F) -> [m](F -> [m]F)) ; K m
5. [m]([m]F <-> F) -> [m](F -> [m]F) ; MP 3 4
6. [m](F -> [m]F) ; MP 1 5
7. [m](F -> [m]F) -> ([m]F -> [m][m]F) ; K m
8. [m]F -> [m][m]F ; MP 6 7
qed",
        );
        let t = check_proof(&s, &LemmaLibrary::new()).unwrap();
        assert_eq!(t.level, Level::Dsl);
        for m in mutations(&s) {
            let err = check_proof(&m.script, &LemmaLibrary::new()).unwrap_err();
            assert_eq!(err.line_number(), Some(m.line), "{}", m.description);
        }
    }

    #[test]
    fn errors_are_specific() {
        let lib = LemmaLibrary::new();
        let e = check_proof(&script("lemma x\n1. p ; MP 1 1\nqed"), &lib).unwrap_err();
        assert!(matches!(
            e,
            ProofError::Line {
                error: LineError::ForwardCitation(1),
                ..
            }
        ));
        let e = check_proof(&script("lemma x\n1. [m][m]false ; DSL2\nqed"), &lib).unwrap_err();
        assert!(matches!(
            e,
            ProofError::Line {
                error: LineError::SameComponent(..),
                ..
            }
        ));
        let e = check_proof(&script("lemma x\n1. p ; Frobnicate\nqed"), &lib).unwrap_err();
        assert!(matches!(
            e,
            ProofError::Line {
                error: LineError::Unknown(_),
                ..
            }
        ));
        let e = check_proof(&script("lemma x\n1. p -> q ; taut\nqed"), &lib).unwrap_err();
        assert!(matches!(
            e,
            ProofError::Line {
                error: LineError::NotTautology,
                ..
            }
        ));
        let e = check_proof(&script("lemma x\n1. p ; hyp\n2. [m] p ; K m\nqed"), &lib).unwrap_err();
        assert!(matches!(
            e,
            ProofError::Line {
                error: LineError::SchemaMismatch { .. },
                ..
            }
        ));
        let e = check_proof(
            &script("lemma x\n1. p ; hyp\n2. p leads_to p ; LI 1\nqed"),
            &lib,
        )
        .unwrap_err();
        assert!(matches!(
            e,
            ProofError::Line {
                error: LineError::SchemaMismatch { .. },
                ..
            }
        ));
    }

    #[test]
    fn levels_are_enforced() {
        let lib = LemmaLibrary::new();
        // a DSL tautology cannot feed a DSTL rule without LIFT
        let e = check_proof(
            &script("lemma x\n1. p -> p ; taut\n2. init (p -> p) ; InI 1\nqed"),
            &lib,
        )
        .unwrap_err();
        assert!(matches!(
            e,
            ProofError::Line {
                error: LineError::Level { .. },
                ..
            }
        ));
        let ok = "lemma x\n1. p -> p ; taut\n2. p -> p ; LIFT 1\n3. init (p -> p) ; InI 2\nqed";
        assert_eq!(check_proof(&script(ok), &lib).unwrap().level, Level::Dstl);
        let e = check_proof(
            &script("lemma x\n1. p ; hyp\n2. p -> p ; taut\n3. p ; MP 1 2\nqed"),
            &lib,
        )
        .unwrap_err();
        assert!(matches!(
            e,
            ProofError::Line {
                error: LineError::MixedLevels,
                ..
            }
        ));
    }

    #[test]
    fn lemmas_generalize_and_reject_duplicates() {
        let mut lib = LemmaLibrary::new();
        let text = "lemma Swap\n1. p leads_to_c q ; hyp\n2. p leads_to q ; LI 1\nqed";
        lib.load(text).unwrap();
        assert!(matches!(lib.load(text), Err(ProofError::Duplicate(_))));
        let use_it =
            "lemma user\n1. <a> r leads_to_c s & t ; hyp\n2. <a> r leads_to s & t ; Swap 1\nqed";
        check_proof(&script(use_it), &lib).unwrap();
    }

    #[test]
    fn lemma_components_must_stay_distinct() {
        let mut lib = LemmaLibrary::new();
        lib.load("lemma Two\n1. [m][n]false ; DSL2 m n\nqed")
            .unwrap();
        check_proof(&script("lemma a\n1. [x][y]false ; Two\nqed"), &lib).unwrap();
        let e = check_proof(&script("lemma b\n1. [x][x]false ; Two\nqed"), &lib).unwrap_err();
        assert!(matches!(
            e,
            ProofError::Line {
                error: LineError::NotInjective(_),
                ..
            }
        ));
    }

    #[test]
    fn catalog_names_cannot_be_lemmas() {
        let mut lib = LemmaLibrary::new();
        assert!(matches!(
            lib.load("lemma MP\n1. p -> p ; taut\nqed"),
            Err(ProofError::Duplicate(_))
        ));
    }
}
