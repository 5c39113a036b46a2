//! Shared test fixtures: the doubling theory and its worked derivation.

use alloc::vec;

use crate::axioms::{validate_nice, AxiomId, NiceAxiomSet};
use crate::derivation::Derivation;
use crate::syntax::{Equation, Signature, Term, Var};

/// `d/1` plus a binary `g/2` that has no axioms.
pub fn double_signature() -> Signature {
    let mut sig = Signature::new();
    sig.declare("d", 1).unwrap();
    sig.declare("g", 2).unwrap();
    sig
}

pub fn term(text: &str) -> Term {
    double_signature().parse_term(text).unwrap()
}

pub fn equation(lhs: &str, rhs: &str) -> Equation {
    Equation::new(term(lhs), term(rhs))
}

/// d(eps) = eps, d(x0) = d(x)00, d(x1) = d(x)11.
pub fn double_axioms() -> NiceAxiomSet {
    validate_nice(vec![
        (AxiomId::new("d.eps"), equation("(d eps)", "eps")),
        (AxiomId::new("d.zero"), equation("(d (s0 x))", "(s0 (s0 (d x)))")),
        (AxiomId::new("d.one"), equation("(d (s1 x))", "(s1 (s1 (d x)))")),
    ])
    .unwrap()
}

/// `(trans (subst eps y (axiom d.zero ((x y)))) (compat (s0 (s0 z)) z (axiom d.eps ())))`
/// concluding `d(0) = 00`.
pub fn worked_derivation() -> Derivation {
    let ax = double_axioms();
    let left = Derivation::subst(
        Term::eps(),
        Var::new("y"),
        Derivation::axiom(&ax, &AxiomId::new("d.zero"), [(Var::new("x"), Term::var("y"))]).unwrap(),
    );
    let right = Derivation::compat(
        term("(s0 (s0 z))"),
        Var::new("z"),
        Derivation::axiom(&ax, &AxiomId::new("d.eps"), []).unwrap(),
    );
    Derivation::trans(left, right)
}
