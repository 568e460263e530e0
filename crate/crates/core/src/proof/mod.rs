//! Hilbert-style proof scripts checked against the axiom and rule catalog.
//!
//! A script is a numbered list of lines, each a formula with a
//! justification. Formulae are compared after desugaring and removal of
//! double negations, so definitional unfoldings need no line of their own.

mod catalog;
mod kernel;
mod script;

use std::fmt;

use thiserror::Error;

use crate::formula::Temporal;

pub use catalog::{box_elim, catalog, general_cancellation, Schema, Signature};
pub(crate) use kernel::instantiate;
pub use kernel::{
    check_proof, mutations, normalize, normalize_temporal, register_lemma, soundness_bridge,
    BridgeReport, CheckedLemma, LemmaLibrary, Mutation, Theorem,
};
pub use script::{parse_scripts, render_script};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Theorems of the modal logic, valid on every frame.
    Dsl,
    /// Properties of a computation.
    Dstl,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Dsl => "DSL",
            Level::Dstl => "DSTL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    /// An assumption; the lemma becomes a derived rule over its hypotheses.
    Hyp,
    /// A propositional tautology with modal subformulae as atoms.
    Taut,
    /// An axiom, rule or lemma, with cited premise lines and instantiation
    /// tokens (components first, then single-proposition formula parameters).
    Cite {
        name: String,
        premises: Vec<usize>,
        inst: Vec<String>,
    },
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Hyp => f.write_str("hyp"),
            Justification::Taut => f.write_str("taut"),
            Justification::Cite {
                name,
                premises,
                inst,
            } => {
                f.write_str(name)?;
                for p in premises {
                    write!(f, " {p}")?;
                }
                for t in inst {
                    write!(f, " {t}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofLine {
    pub number: usize,
    pub formula: Temporal,
    pub justification: Justification,
    /// 1-based line in the source file.
    pub source_line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofScript {
    pub name: String,
    pub lines: Vec<ProofLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineError {
    #[error("expected {expected}, found {actual}")]
    SchemaMismatch { expected: String, actual: String },
    #[error("line {0} is not an earlier line")]
    ForwardCitation(usize),
    #[error("unknown rule, axiom or lemma `{0}`")]
    Unknown(String),
    #[error("{rule} takes {expected} premises, {found} cited")]
    Arity {
        rule: String,
        expected: usize,
        found: usize,
    },
    #[error("{rule} expects a {expected} premise at line {line}, found {found}")]
    Level {
        rule: String,
        line: usize,
        expected: Level,
        found: Level,
    },
    #[error("mixed premise levels")]
    MixedLevels,
    #[error("{0} must be a formula without temporal operators")]
    NotPlain(String),
    #[error("not a propositional tautology")]
    NotTautology,
    #[error("components {0} and {1} must differ")]
    SameComponent(String, String),
    #[error("lemma instantiation maps two components to {0}")]
    NotInjective(String),
    #[error("too many instantiation tokens")]
    ExtraTokens,
    #[error("{0}")]
    Atoms(#[from] crate::taut::AtomLimitExceeded),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{script}, line {number}: {error}")]
    Line {
        script: String,
        number: usize,
        error: LineError,
    },
    #[error("script {0} has no lines")]
    Empty(String),
    #[error("lemma `{0}` already registered")]
    Duplicate(String),
}

impl ProofError {
    /// Proof line number of a per-line failure.
    pub fn line_number(&self) -> Option<usize> {
        match self {
            ProofError::Line { number, .. } => Some(*number),
            _ => None,
        }
    }
}
