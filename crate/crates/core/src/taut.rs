//! Propositional tautology check with modal-atom abstraction.
//!
//! Each proposition and each maximal `<m> F` subformula (after desugaring,
//! so `[m] F` contributes the atom `<m> ~F`) is an opaque atom.

use crate::formula::Dsl;
use thiserror::Error;

pub const DEFAULT_ATOM_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula has {found} propositional atoms, limit is {limit}")]
pub struct AtomLimitExceeded {
    pub found: usize,
    pub limit: usize,
}

enum Skeleton {
    Atom(usize),
    False,
    Not(Box<Skeleton>),
    And(Box<Skeleton>, Box<Skeleton>),
}

impl Skeleton {
    fn eval(&self, row: u32) -> bool {
        match self {
            Skeleton::Atom(i) => row >> i & 1 == 1,
            Skeleton::False => false,
            Skeleton::Not(f) => !f.eval(row),
            Skeleton::And(a, b) => a.eval(row) && b.eval(row),
        }
    }
}

fn abstract_atoms(f: &Dsl, atoms: &mut Vec<Dsl>) -> Skeleton {
    let mut atom = |f: &Dsl| {
        let i = atoms.iter().position(|a| a == f).unwrap_or_else(|| {
            atoms.push(f.clone());
            atoms.len() - 1
        });
        Skeleton::Atom(i)
    };
    match f {
        Dsl::Prop(_) | Dsl::Loc(..) => atom(f),
        Dsl::False => Skeleton::False,
        Dsl::Not(g) => Skeleton::Not(Box::new(abstract_atoms(g, atoms))),
        Dsl::And(a, b) => Skeleton::And(
            Box::new(abstract_atoms(a, atoms)),
            Box::new(abstract_atoms(b, atoms)),
        ),
        _ => unreachable!("abstract_atoms expects a desugared formula"),
    }
}

/// The distinct opaque atoms of `f`, in order of first occurrence.
pub fn atoms(f: &Dsl) -> Vec<Dsl> {
    let mut out = Vec::new();
    abstract_atoms(&f.desugar(), &mut out);
    out
}

pub fn is_tautology(f: &Dsl) -> Result<bool, AtomLimitExceeded> {
    is_tautology_with_limit(f, DEFAULT_ATOM_LIMIT)
}

pub fn is_tautology_with_limit(f: &Dsl, limit: usize) -> Result<bool, AtomLimitExceeded> {
    let mut atoms = Vec::new();
    let skel = abstract_atoms(&f.desugar(), &mut atoms);
    if atoms.len() > limit.min(31) {
        return Err(AtomLimitExceeded {
            found: atoms.len(),
            limit,
        });
    }
    Ok((0..1u32 << atoms.len()).all(|row| skel.eval(row)))
}
