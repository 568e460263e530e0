//! The fixed axiom and rule catalog.
//!
//! Schemata are written in the concrete syntax: every proposition is a
//! formula metavariable and every component a component metavariable.

use std::sync::OnceLock;

use crate::formula::Temporal;
use crate::parse::parse_temporal;

use super::kernel::normalize_temporal;
use super::Level;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    /// Premises and conclusion share one level, whichever it is.
    Same,
    Fixed {
        premises: Level,
        conclusion: Level,
    },
}

#[derive(Debug, Clone)]
pub struct Schema {
    pub name: String,
    pub premises: Vec<Temporal>,
    pub conclusion: Temporal,
    pub signature: Signature,
    /// Component metavariables, in instantiation-token order.
    pub comp_params: Vec<String>,
    /// Formula metavariables, in instantiation-token order.
    pub formula_params: Vec<String>,
    pub distinct: Vec<(String, String)>,
    /// Lemma instances must map distinct components to distinct components.
    pub injective: bool,
}

impl Schema {
    pub(crate) fn build(
        name: &str,
        premises: &[&str],
        conclusion: &str,
        signature: Signature,
        comps: &[&str],
        distinct: &[(&str, &str)],
    ) -> Schema {
        let parse = |s: &str| {
            normalize_temporal(&parse_temporal(s).unwrap_or_else(|e| panic!("{name}: {s}: {e}")))
        };
        let premises: Vec<Temporal> = premises.iter().map(|s| parse(s)).collect();
        let conclusion = parse(conclusion);
        let mut formula_params = Vec::new();
        for t in premises.iter().chain([&conclusion]) {
            for p in t.props() {
                if !formula_params.contains(&p) {
                    formula_params.push(p);
                }
            }
        }
        Schema {
            name: name.to_string(),
            premises,
            conclusion,
            signature,
            comp_params: comps.iter().map(|s| s.to_string()).collect(),
            formula_params,
            distinct: distinct
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            injective: false,
        }
    }

    pub fn is_axiom(&self) -> bool {
        self.premises.is_empty()
    }

    /// The schema text: premises, then the conclusion after a turnstile.
    pub fn render(&self) -> String {
        let prem: Vec<String> = self
            .premises
            .iter()
            .map(|p| p.render_with_stable_sugar())
            .collect();
        format!(
            "{} |- {}",
            prem.join(", "),
            self.conclusion.render_with_stable_sugar()
        )
    }
}

const DSL: Signature = Signature::Fixed {
    premises: Level::Dsl,
    conclusion: Level::Dsl,
};
const DSTL: Signature = Signature::Fixed {
    premises: Level::Dstl,
    conclusion: Level::Dstl,
};
const LIFT: Signature = Signature::Fixed {
    premises: Level::Dsl,
    conclusion: Level::Dstl,
};

fn build_catalog() -> Vec<Schema> {
    let mut out = vec![
        Schema::build("K", &[], "[m](F -> G) -> ([m]F -> [m]G)", DSL, &["m"], &[]),
        Schema::build("DSL1", &[], "[m]([m]F <-> F)", DSL, &["m"], &[]),
        Schema::build("DSL2", &[], "[m][n]false", DSL, &["m", "n"], &[("m", "n")]),
        Schema::build("MP", &["F", "F -> G"], "G", Signature::Same, &[], &[]),
        Schema::build("Nec", &["F"], "[m]F", Signature::Same, &["m"], &[]),
        Schema::build("LIFT", &["F"], "F", LIFT, &[], &[]),
        Schema::build("LcI", &[], "F leads_to_c F", DSTL, &[], &[]),
        Schema::build("BcI", &[], "F because_c F", DSTL, &[], &[]),
        Schema::build("LI", &["F leads_to_c G"], "F leads_to G", DSTL, &[], &[]),
        Schema::build("BI", &["F because_c G"], "F because G", DSTL, &[], &[]),
        Schema::build("UI", &[], "F unless F", DSTL, &[], &[]),
        Schema::build("InI", &["F"], "init F", DSTL, &[], &[]),
        Schema::build("SI", &["F"], "stable F", DSTL, &[], &[]),
        Schema::build(
            "SE",
            &["init <m>F", "stable <m>F"],
            "[m]F",
            DSTL,
            &["m"],
            &[],
        ),
        Schema::build(
            "LTR",
            &["F leads_to F1", "F1 leads_to G"],
            "F leads_to G",
            DSTL,
            &[],
            &[],
        ),
        Schema::build(
            "BTR",
            &["F because F1", "F1 because G"],
            "F because G",
            DSTL,
            &[],
            &[],
        ),
        Schema::build(
            "UC",
            &["<m>F unless <m>F1", "<m>F1 unless <m>G"],
            "<m>F | <m>F1 unless <m>G",
            DSTL,
            &["m"],
            &[],
        ),
    ];
    for (prefix, op) in [
        ("L", "leads_to"),
        ("B", "because"),
        ("Lc", "leads_to_c"),
        ("Bc", "because_c"),
    ] {
        out.push(Schema::build(
            &format!("{prefix}SW"),
            &["G -> F", &format!("F {op} F1"), "F1 -> G1"],
            &format!("G {op} G1"),
            DSTL,
            &[],
            &[],
        ));
        out.push(Schema::build(
            &format!("{prefix}PD"),
            &[&format!("F {op} G"), &format!("F1 {op} G")],
            &format!("F | F1 {op} G"),
            DSTL,
            &[],
            &[],
        ));
        out.push(Schema::build(
            &format!("{prefix}CC"),
            &[&format!("G {op} F"), &format!("G {op} F1")],
            &format!("G {op} F & F1"),
            DSTL,
            &[],
            &[],
        ));
    }
    out.extend([
        Schema::build(
            "UCW",
            &["F unless F1", "F1 -> G"],
            "F unless G",
            DSTL,
            &[],
            &[],
        ),
        Schema::build(
            "UD",
            &["F unless F1", "G unless G1"],
            "F | G unless F1 | G1",
            DSTL,
            &[],
            &[],
        ),
        Schema::build("IW", &["init F", "F -> G"], "init G", DSTL, &[], &[]),
        Schema::build(
            "Notif",
            &["F because G", "G leads_to <m>G1", "stable <m>G1"],
            "F & <m>true leads_to <m>G1",
            DSTL,
            &["m"],
            &[],
        ),
        Schema::build(
            "Conf",
            &["stable <m>F", "stable <m>F1"],
            "<m>F & <m>F1 -> <m>(F & F1)",
            DSTL,
            &["m"],
            &[],
        ),
        Schema::build("I1", &[], "init <m>true", DSTL, &["m"], &[]),
        Schema::build("I2", &["init <m>F"], "init [m]F", DSTL, &["m"], &[]),
        Schema::build("I3", &["init [m]F"], "init <m>F", DSTL, &["m"], &[]),
    ]);
    out
}

/// Every axiom and rule, in a fixed order.
pub fn catalog() -> &'static [Schema] {
    static CATALOG: OnceLock<Vec<Schema>> = OnceLock::new();
    CATALOG.get_or_init(build_catalog)
}

pub(crate) fn lookup(name: &str) -> Option<&'static Schema> {
    catalog().iter().find(|s| s.name == name)
}

/// Cancellation without the shared-component restriction of UC; not sound.
pub fn general_cancellation() -> Schema {
    Schema::build(
        "GeneralCancellation",
        &["F unless F1", "F1 unless G"],
        "F | F1 unless G",
        DSTL,
        &[],
        &[],
    )
}

/// From `[m]F` for each listed component conclude `F`; not sound.
pub fn box_elim(components: &[String]) -> Schema {
    let premises: Vec<String> = components.iter().map(|c| format!("[{c}]F")).collect();
    let refs: Vec<&str> = premises.iter().map(String::as_str).collect();
    let comps: Vec<&str> = components.iter().map(String::as_str).collect();
    let mut s = Schema::build("BoxElim", &refs, "F", DSTL, &comps, &[]);
    s.injective = true;
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof::kernel::instantiate;
    use std::collections::BTreeMap;

    #[test]
    fn catalog_names_are_unique() {
        let names: Vec<&str> = catalog().iter().map(|s| s.name.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        assert_eq!(names.len(), 17 + 12 + 8);
    }

    #[test]
    fn instances_render_as_expected() {
        let comps = |pairs: &[(&str, &str)]| {
            pairs
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect()
        };
        let dsl2 = lookup("DSL2").unwrap();
        let inst = instantiate(
            &dsl2.conclusion,
            &BTreeMap::new(),
            &comps(&[("m", "m"), ("n", "n")]),
        );
        assert_eq!(
            inst.to_string(),
            normalize_temporal(&parse_temporal("[m][n]false").unwrap()).to_string()
        );

        let ui = lookup("UI").unwrap();
        let f = BTreeMap::from([("F".to_string(), crate::formula::prop("p"))]);
        let inst = instantiate(&ui.conclusion, &f, &BTreeMap::new());
        assert_eq!(inst.to_string(), "p unless p");

        let notif = lookup("Notif").unwrap();
        assert_eq!(notif.premises.len(), 3);
        assert_eq!(
            notif.premises[2].render_with_stable_sugar(),
            "stable <m> G1"
        );
    }

    #[test]
    fn known_invalid_rules_are_outside_the_catalog() {
        assert!(lookup(&general_cancellation().name).is_none());
        let b = box_elim(&["a".into(), "b".into()]);
        assert!(lookup(&b.name).is_none());
        assert_eq!(b.premises.len(), 2);
    }
}
