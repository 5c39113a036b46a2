//! Terms over a declared signature, substitution and syntactic measures.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::sexp::{self, Pos, Sexp, SexpError};

/// A variable name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A function symbol. The three basic symbols `eps`, `s0`, `s1` build binary
/// strings; every other symbol is `Defined` and gets its meaning from axioms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Eps,
    S0,
    S1,
    Defined(Arc<DefinedSymbol>),
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DefinedSymbol {
    pub name: String,
    pub arity: usize,
}

impl Symbol {
    pub fn name(&self) -> &str {
        match self {
            Symbol::Eps => "eps",
            Symbol::S0 => "s0",
            Symbol::S1 => "s1",
            Symbol::Defined(d) => &d.name,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Symbol::Eps => 0,
            Symbol::S0 | Symbol::S1 => 1,
            Symbol::Defined(d) => d.arity,
        }
    }

    pub fn is_basic(&self) -> bool {
        !matches!(self, Symbol::Defined(_))
    }

    /// `s0`/`s1` as a bit, `None` for everything else.
    pub fn successor_bit(&self) -> Option<bool> {
        match self {
            Symbol::S0 => Some(false),
            Symbol::S1 => Some(true),
            _ => None,
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name(), self.arity())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error(transparent)]
    Sexp(#[from] SexpError),
    #[error("{pos}: unknown function symbol `{name}`")]
    UnknownSymbol { name: String, pos: Pos },
    #[error("{pos}: `{name}` expects {expected} argument(s), got {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
        pos: Pos,
    },
    #[error("{pos}: `{text}` is not a valid identifier")]
    BadIdentifier { text: String, pos: Pos },
    #[error("{pos}: empty application `()`")]
    EmptyList { pos: Pos },
    #[error("symbol `{0}` is already declared")]
    Redeclared(String),
    #[error("`{0}` is reserved")]
    Reserved(String),
}

const RESERVED: &[&str] = &["eps", "s0", "s1", "0", "1"];

/// ASCII word: a letter or `_` followed by letters, digits, `_`, `'`.
pub fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// A closed, explicitly declared set of function symbols. The basic symbols
/// are always present.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    defined: BTreeMap<String, Symbol>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: &str, arity: usize) -> Result<Symbol, SyntaxError> {
        if RESERVED.contains(&name) {
            return Err(SyntaxError::Reserved(name.to_string()));
        }
        if !is_identifier(name) {
            return Err(SyntaxError::BadIdentifier {
                text: name.to_string(),
                pos: Pos::default(),
            });
        }
        if self.defined.contains_key(name) {
            return Err(SyntaxError::Redeclared(name.to_string()));
        }
        let sym = Symbol::Defined(Arc::new(DefinedSymbol {
            name: name.to_string(),
            arity,
        }));
        self.defined.insert(name.to_string(), sym.clone());
        Ok(sym)
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        match name {
            "eps" => Some(Symbol::Eps),
            "s0" => Some(Symbol::S0),
            "s1" => Some(Symbol::S1),
            _ => self.defined.get(name).cloned(),
        }
    }

    /// Declared non-basic symbols, ordered by name.
    pub fn defined(&self) -> impl Iterator<Item = &Symbol> {
        self.defined.values()
    }

    pub fn parse_term(&self, text: &str) -> Result<Term, SyntaxError> {
        parse_term(self, text)
    }
}

/// A first-order term. `App` argument lists always match the symbol's
/// arity when built through [`Term::app`] or the parser.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn eps() -> Term {
        Term::App(Symbol::Eps, Vec::new())
    }

    pub fn s0(t: Term) -> Term {
        Term::App(Symbol::S0, alloc::vec![t])
    }

    pub fn s1(t: Term) -> Term {
        Term::App(Symbol::S1, alloc::vec![t])
    }

    /// `s0`/`s1` chosen by `bit`.
    pub fn succ(bit: bool, t: Term) -> Term {
        if bit {
            Term::s1(t)
        } else {
            Term::s0(t)
        }
    }

    /// The binary string `bits` (leftmost bit applied first) as a basic term.
    pub fn from_bits(bits: &[bool]) -> Term {
        bits.iter().fold(Term::eps(), |t, &b| Term::succ(b, t))
    }

    pub fn app(sym: Symbol, args: Vec<Term>) -> Result<Term, SyntaxError> {
        if args.len() != sym.arity() {
            return Err(SyntaxError::ArityMismatch {
                name: sym.name().to_string(),
                expected: sym.arity(),
                found: args.len(),
                pos: Pos::default(),
            });
        }
        Ok(Term::App(sym, args))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(x) => Some(x),
            Term::App(..) => None,
        }
    }

    /// `lh(t)`: variables count 1, applications 1 plus their arguments.
    pub fn length(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::length).sum::<usize>(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn occurrences(&self, x: &Var) -> usize {
        match self {
            Term::Var(y) => usize::from(y == x),
            Term::App(_, args) => args.iter().map(|a| a.occurrences(x)).sum(),
        }
    }

    pub fn contains_var(&self, x: &Var) -> bool {
        match self {
            Term::Var(y) => y == x,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(x)),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// `t[u/x]`.
    pub fn substitute(&self, x: &Var, u: &Term) -> Term {
        match self {
            Term::Var(y) if y == x => u.clone(),
            Term::Var(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.substitute(x, u)).collect()),
        }
    }

    /// `t[u1/x1][u2/x2]...`, applied left to right.
    pub fn substitute_seq(&self, pairs: &[(Var, Term)]) -> Term {
        pairs.iter().fold(self.clone(), |t, (x, u)| t.substitute(x, u))
    }

    /// Simultaneous substitution; variables outside the map are kept.
    pub fn apply(&self, map: &BTreeMap<Var, Term>) -> Term {
        match self {
            Term::Var(y) => map.get(y).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.apply(map)).collect()),
        }
    }

    pub fn rename(&self, from: &Var, to: &Var) -> Term {
        self.substitute(from, &Term::Var(to.clone()))
    }

    /// A variable, `eps`, or `s0(x)` / `s1(x)` with `x` a variable.
    pub fn is_generalized_variable(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::App(Symbol::Eps, _) => true,
            Term::App(Symbol::S0 | Symbol::S1, args) => matches!(args.as_slice(), [Term::Var(_)]),
            Term::App(..) => false,
        }
    }

    /// One-way matching of `self` (the pattern) against `target`, extending
    /// `binding`. Repeated pattern variables must match equal subterms.
    pub fn match_into(&self, target: &Term, binding: &mut BTreeMap<Var, Term>) -> bool {
        match (self, target) {
            (Term::Var(x), _) => match binding.get(x) {
                Some(bound) => bound == target,
                None => {
                    binding.insert(x.clone(), target.clone());
                    true
                }
            },
            (Term::App(f, ps), Term::App(g, ts)) => {
                f == g && ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, t)| p.match_into(t, binding))
            }
            (Term::App(..), Term::Var(_)) => false,
        }
    }

    /// Bits of a term built only from `eps`, `s0`, `s1`.
    pub fn as_bits(&self) -> Option<Vec<bool>> {
        let mut bits = Vec::new();
        let mut t = self;
        loop {
            match t {
                Term::App(Symbol::Eps, _) => break,
                Term::App(s @ (Symbol::S0 | Symbol::S1), args) => {
                    bits.push(s.successor_bit()?);
                    t = args.first()?;
                }
                _ => return None,
            }
        }
        bits.reverse();
        Some(bits)
    }

    /// Lists every subterm position in pre-order (root first, then arguments
    /// left to right).
    pub fn positions(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.positions_into(&mut path, &mut out);
        out
    }

    fn positions_into(&self, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(path.clone());
        if let Term::App(_, args) = self {
            for (i, a) in args.iter().enumerate() {
                path.push(i);
                a.positions_into(path, out);
                path.pop();
            }
        }
    }

    pub fn at(&self, path: &[usize]) -> Option<&Term> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => match self {
                Term::App(_, args) => args.get(i)?.at(rest),
                Term::Var(_) => None,
            },
        }
    }

    /// Replaces the subterm at `path` by `by`.
    pub fn replace_at(&self, path: &[usize], by: Term) -> Term {
        match path.split_first() {
            None => by,
            Some((&i, rest)) => match self {
                Term::App(f, args) => {
                    let mut args = args.clone();
                    if let Some(a) = args.get_mut(i) {
                        *a = a.replace_at(rest, by);
                    }
                    Term::App(f.clone(), args)
                }
                Term::Var(_) => self.clone(),
            },
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::App(s, args) if args.is_empty() => write!(f, "{s}"),
            Term::App(s, args) => {
                write!(f, "({s}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// An equation `lhs = rhs`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Equation { lhs, rhs }
    }

    /// `lh(t = u) = lh(t) + lh(u) + 1`.
    pub fn length(&self) -> usize {
        self.lhs.length() + self.rhs.length() + 1
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = self.lhs.free_vars();
        self.rhs.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.lhs.collect_vars(out);
        self.rhs.collect_vars(out);
    }

    pub fn substitute(&self, x: &Var, u: &Term) -> Equation {
        Equation::new(self.lhs.substitute(x, u), self.rhs.substitute(x, u))
    }

    pub fn apply(&self, map: &BTreeMap<Var, Term>) -> Equation {
        Equation::new(self.lhs.apply(map), self.rhs.apply(map))
    }

    pub fn flipped(&self) -> Equation {
        Equation::new(self.rhs.clone(), self.lhs.clone())
    }

    pub fn contains_var(&self, x: &Var) -> bool {
        self.lhs.contains_var(x) || self.rhs.contains_var(x)
    }
}

impl fmt::Debug for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// Parses a term in s-expression syntax against `sig`.
///
/// `eps`, `(s0 t)`, `(s1 t)`, `(f t ...)`; `0` and `1` abbreviate `(s0 eps)`
/// and `(s1 eps)`. A bare identifier is a declared nullary symbol if one
/// exists and a variable otherwise.
pub fn parse_term(sig: &Signature, text: &str) -> Result<Term, SyntaxError> {
    let e = sexp::parse_one(text)?;
    term_from_sexp(sig, &e)
}

pub fn term_from_sexp(sig: &Signature, e: &Sexp) -> Result<Term, SyntaxError> {
    match e {
        Sexp::Atom(a, pos) => match a.as_str() {
            "0" => Ok(Term::s0(Term::eps())),
            "1" => Ok(Term::s1(Term::eps())),
            _ => match sig.lookup(a) {
                Some(sym) if sym.arity() == 0 => Ok(Term::App(sym, Vec::new())),
                Some(sym) => Err(SyntaxError::ArityMismatch {
                    name: a.clone(),
                    expected: sym.arity(),
                    found: 0,
                    pos: *pos,
                }),
                None if is_identifier(a) => Ok(Term::var(a)),
                None => Err(SyntaxError::BadIdentifier {
                    text: a.clone(),
                    pos: *pos,
                }),
            },
        },
        Sexp::List(items, pos) => {
            let (head, rest) = items.split_first().ok_or(SyntaxError::EmptyList { pos: *pos })?;
            let name = match head {
                Sexp::Atom(a, _) => a,
                Sexp::List(..) => {
                    return Err(SyntaxError::BadIdentifier {
                        text: format!("{head}"),
                        pos: head.pos(),
                    })
                }
            };
            let sym = sig.lookup(name).ok_or_else(|| SyntaxError::UnknownSymbol {
                name: name.clone(),
                pos: head.pos(),
            })?;
            if sym.arity() != rest.len() {
                return Err(SyntaxError::ArityMismatch {
                    name: name.clone(),
                    expected: sym.arity(),
                    found: rest.len(),
                    pos: *pos,
                });
            }
            let args = rest
                .iter()
                .map(|a| term_from_sexp(sig, a))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Term::App(sym, args))
        }
    }
}

/// Supply of fresh variables `v<k>` that skips every name in `avoid`.
#[derive(Clone, Debug, Default)]
pub struct FreshVars {
    next: usize,
    avoid: BTreeSet<String>,
}

impl FreshVars {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn avoiding<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        FreshVars {
            next: 0,
            avoid: names.into_iter().map(ToString::to_string).collect(),
        }
    }

    pub fn avoid(&mut self, name: &str) {
        self.avoid.insert(name.to_string());
    }

    pub fn fresh(&mut self) -> Var {
        loop {
            let name = format!("v{}", self.next);
            self.next += 1;
            if !self.avoid.contains(&name) {
                self.avoid.insert(name.clone());
                return Var::new(&name);
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::fixtures::double_signature;
    use proptest::prelude::*;

    fn t(text: &str) -> Term {
        double_signature().parse_term(text).unwrap()
    }

    #[test]
    fn term_length_examples() {
        assert_eq!(Term::var("x").length(), 1);
        assert_eq!(Term::eps().length(), 1);
        assert_eq!(t("(s0 (s0 (d x)))").length(), 4);
    }

    #[test]
    fn free_vars_examples() {
        assert_eq!(Term::var("x").free_vars(), [Var::new("x")].into_iter().collect());
        assert!(Term::eps().free_vars().is_empty());
        assert_eq!(t("(d (s0 x))").free_vars(), [Var::new("x")].into_iter().collect());
    }

    #[test]
    fn substitute_examples() {
        let x = Var::new("x");
        assert_eq!(Term::var("x").substitute(&x, &Term::eps()), Term::eps());
        assert_eq!(t("(d x)").substitute(&Var::new("y"), &t("(s0 eps)")), t("(d x)"));
        assert_eq!(
            t("(s0 (s0 (d x)))").substitute(&x, &Term::eps()),
            t("(s0 (s0 (d eps)))")
        );
    }

    #[test]
    fn substitution_sequences_apply_left_to_right() {
        let pairs = [(Var::new("x"), t("y")), (Var::new("y"), t("eps"))];
        assert_eq!(t("(d x)").substitute_seq(&pairs), t("(d eps)"));
    }

    #[test]
    fn generalized_variables() {
        assert!(Term::eps().is_generalized_variable());
        assert!(t("(s0 x)").is_generalized_variable());
        assert!(Term::var("x").is_generalized_variable());
        assert!(!t("(s0 eps)").is_generalized_variable());
        assert!(!t("(d x)").is_generalized_variable());
    }

    #[test]
    fn parse_examples() {
        assert_eq!(t("(s0 eps)"), Term::s0(Term::eps()));
        assert_eq!(t("0"), Term::s0(Term::eps()));
        assert_eq!(t("1"), Term::s1(Term::eps()));
        let sig = double_signature();
        let d = sig.lookup("d").unwrap();
        assert_eq!(t("(d x)"), Term::App(d, alloc::vec![Term::var("x")]));
        assert!(matches!(
            sig.parse_term("(d x y)"),
            Err(SyntaxError::ArityMismatch {
                expected: 1,
                found: 2,
                ..
            })
        ));
        assert!(matches!(
            sig.parse_term("(h x)"),
            Err(SyntaxError::UnknownSymbol { .. })
        ));
        assert!(matches!(sig.parse_term("d"), Err(SyntaxError::ArityMismatch { .. })));
        assert!(matches!(sig.parse_term("(s0 eps"), Err(SyntaxError::Sexp(_))));
    }

    #[test]
    fn nullary_defined_symbols_print_bare() {
        let mut sig = Signature::new();
        sig.declare("c", 0).unwrap();
        let c = sig.parse_term("c").unwrap();
        assert!(c.is_ground());
        assert_eq!(c.to_string(), "c");
        assert_eq!(sig.parse_term("(c)").unwrap(), c);
    }

    #[test]
    fn declarations_are_checked() {
        let mut sig = Signature::new();
        assert!(sig.declare("s0", 1).is_err());
        assert!(sig.declare("9x", 1).is_err());
        sig.declare("f", 2).unwrap();
        assert_eq!(sig.declare("f", 1), Err(SyntaxError::Redeclared("f".into())));
    }

    #[test]
    fn fresh_vars_skip_avoided_names() {
        let mut fresh = FreshVars::avoiding(["v0", "v2"]);
        assert_eq!(fresh.fresh(), Var::new("v1"));
        assert_eq!(fresh.fresh(), Var::new("v3"));
    }

    pub(crate) fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            Just(Term::eps()),
            prop::sample::select(alloc::vec!["x", "y", "z"]).prop_map(Term::var),
        ];
        let sig = double_signature();
        let d = sig.lookup("d").unwrap();
        let g = sig.lookup("g").unwrap();
        leaf.prop_recursive(4, 24, 2, move |inner| {
            let d = d.clone();
            let g = g.clone();
            prop_oneof![
                inner.clone().prop_map(Term::s0),
                inner.clone().prop_map(Term::s1),
                inner.clone().prop_map(move |a| Term::App(d.clone(), alloc::vec![a])),
                (inner.clone(), inner).prop_map(move |(a, b)| Term::App(g.clone(), alloc::vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(term in arb_term()) {
            let text = term.to_string();
            prop_assert_eq!(double_signature().parse_term(&text).unwrap(), term);
        }

        #[test]
        fn substitution_length_formula(term in arb_term(), u in arb_term(), x in prop::sample::select(alloc::vec!["x", "y", "z"])) {
            let x = Var::new(x);
            let k = term.occurrences(&x);
            let out = term.substitute(&x, &u);
            prop_assert_eq!(out.length() + k, term.length() + k * u.length());
        }

        #[test]
        fn substitution_free_vars(term in arb_term(), u in arb_term(), x in prop::sample::select(alloc::vec!["x", "y", "z"])) {
            let x = Var::new(x);
            prop_assume!(term.contains_var(&x));
            let mut expected = term.free_vars();
            expected.remove(&x);
            expected.extend(u.free_vars());
            prop_assert_eq!(term.substitute(&x, &u).free_vars(), expected);
        }
    }
}
