//! Distributed state temporal logic: formulas, space-time diagram models,
//! a model checker, a Hilbert-style proof kernel and a rule-soundness fuzzer.

pub mod checker;
pub mod computation;
pub mod formula;
pub mod kripke;
pub mod lab;
pub mod naive;
pub mod parse;
pub mod proof;
pub mod semantics;
pub mod taut;
