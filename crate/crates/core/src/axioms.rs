//! Nice axiom systems: shape validation, non-overlap and unique matching.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::syntax::{Equation, FreshVars, Symbol, Term, Var};

/// Stable axiom name, e.g. `d.zero`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AxiomId(Arc<str>);

impl AxiomId {
    pub fn new(name: &str) -> Self {
        AxiomId(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Which of the four admissible left-hand-side forms an axiom has.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AxiomShape {
    /// `f(x1, ..., xn) = t`
    Plain,
    /// `f(eps, x1, ..., xn) = t`
    EpsCase,
    /// `f(x0, x1, ..., xn) = t`
    ZeroCase,
    /// `f(x1, x1, ..., xn) = t`
    OneCase,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axiom {
    pub id: AxiomId,
    pub shape: AxiomShape,
    pub symbol: Symbol,
    pub equation: Equation,
}

impl Axiom {
    pub fn lhs(&self) -> &Term {
        &self.equation.lhs
    }

    pub fn rhs(&self) -> &Term {
        &self.equation.rhs
    }

    /// The generalized-variable arguments of the left-hand side.
    pub fn args(&self) -> &[Term] {
        match &self.equation.lhs {
            Term::App(_, args) => args,
            Term::Var(_) => &[],
        }
    }

    /// Variables of the axiom in left-to-right order of the left-hand side.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for a in self.args() {
            match a {
                Term::Var(x) => out.push(x.clone()),
                Term::App(_, inner) => {
                    if let Some(Term::Var(x)) = inner.first() {
                        out.push(x.clone());
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AxiomError {
    #[error("axiom `{id}`: {reason}")]
    Shape { id: AxiomId, reason: String },
    #[error("axiom `{id}`: right-hand side variable `{var}` does not occur on the left")]
    RhsVariable { id: AxiomId, var: Var },
    #[error("axioms `{first}` and `{second}` have overlapping left-hand sides")]
    Overlap { first: AxiomId, second: AxiomId },
    #[error("axiom id `{0}` is used twice")]
    DuplicateId(AxiomId),
}

/// A validated set of nice axioms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NiceAxiomSet {
    axioms: Vec<Axiom>,
    by_id: BTreeMap<AxiomId, usize>,
    by_symbol: BTreeMap<Symbol, Vec<usize>>,
}

fn classify(id: &AxiomId, eq: &Equation) -> Result<(Symbol, AxiomShape), AxiomError> {
    let shape_err = |reason: String| AxiomError::Shape { id: id.clone(), reason };
    let (f, args) = match &eq.lhs {
        Term::App(f, args) if !f.is_basic() => (f, args),
        Term::App(f, _) => return Err(shape_err(format!("left-hand side is headed by basic symbol `{f}`"))),
        Term::Var(_) => return Err(shape_err("left-hand side is a variable".into())),
    };
    let mut seen = BTreeSet::new();
    let mut shape = AxiomShape::Plain;
    for (i, a) in args.iter().enumerate() {
        let var = match a {
            Term::Var(x) => Some(x),
            Term::App(Symbol::Eps, _) if i == 0 => {
                shape = AxiomShape::EpsCase;
                None
            }
            Term::App(s @ (Symbol::S0 | Symbol::S1), inner) if i == 0 => match inner.as_slice() {
                [Term::Var(x)] => {
                    shape = if *s == Symbol::S0 {
                        AxiomShape::ZeroCase
                    } else {
                        AxiomShape::OneCase
                    };
                    Some(x)
                }
                _ => return Err(shape_err(format!("argument `{a}` is not a generalized variable"))),
            },
            _ if i == 0 => return Err(shape_err(format!("argument `{a}` is not a generalized variable"))),
            _ => {
                return Err(shape_err(format!(
                    "argument {} (`{a}`) must be a plain variable",
                    i + 1
                )))
            }
        };
        if let Some(x) = var {
            if !seen.insert(x.clone()) {
                return Err(shape_err(format!("variable `{x}` occurs twice on the left-hand side")));
            }
        }
    }
    if let Some(var) = eq.rhs.free_vars().into_iter().find(|v| !seen.contains(v)) {
        return Err(AxiomError::RhsVariable { id: id.clone(), var });
    }
    Ok((f.clone(), shape))
}

/// Syntactic unification with occurs check.
pub fn unify(a: &Term, b: &Term) -> Option<BTreeMap<Var, Term>> {
    fn walk<'a>(t: &'a Term, s: &'a BTreeMap<Var, Term>) -> &'a Term {
        let mut t = t;
        while let Term::Var(x) = t {
            match s.get(x) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }
    fn occurs(x: &Var, t: &Term, s: &BTreeMap<Var, Term>) -> bool {
        match walk(t, s) {
            Term::Var(y) => x == y,
            Term::App(_, args) => args.iter().any(|a| occurs(x, a, s)),
        }
    }
    fn go(a: &Term, b: &Term, s: &mut BTreeMap<Var, Term>) -> bool {
        let a = walk(a, s).clone();
        let b = walk(b, s).clone();
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if occurs(x, t, s) {
                    return false;
                }
                s.insert(x.clone(), t.clone());
                true
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, s))
            }
        }
    }
    let mut s = BTreeMap::new();
    go(a, b, &mut s).then_some(s)
}

fn rename_apart(t: &Term, tag: &str) -> Term {
    match t {
        Term::Var(x) => Term::Var(Var::new(&format!("{tag}{x}"))),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| rename_apart(a, tag)).collect()),
    }
}

/// Checks every axiom against the four nice shapes and rejects any pair of
/// left-hand sides that unify once their variables are renamed apart.
pub fn validate_nice(axioms: Vec<(AxiomId, Equation)>) -> Result<NiceAxiomSet, AxiomError> {
    let mut set = NiceAxiomSet::default();
    for (id, equation) in axioms {
        let (symbol, shape) = classify(&id, &equation)?;
        if set.by_id.contains_key(&id) {
            return Err(AxiomError::DuplicateId(id));
        }
        let idx = set.axioms.len();
        if let Some(others) = set.by_symbol.get(&symbol) {
            let mine = rename_apart(&equation.lhs, "2#");
            for &j in others {
                let theirs = rename_apart(&set.axioms[j].equation.lhs, "1#");
                if unify(&theirs, &mine).is_some() {
                    return Err(AxiomError::Overlap {
                        first: set.axioms[j].id.clone(),
                        second: id,
                    });
                }
            }
        }
        set.by_id.insert(id.clone(), idx);
        set.by_symbol.entry(symbol.clone()).or_default().push(idx);
        set.axioms.push(Axiom {
            id,
            shape,
            symbol,
            equation,
        });
    }
    Ok(set)
}

/// An axiom with its variables replaced injectively by fresh ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenamedAxiom {
    pub equation: Equation,
    pub renaming: BTreeMap<Var, Var>,
}

impl NiceAxiomSet {
    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Axiom> {
        self.axioms.iter()
    }

    pub fn get(&self, id: &AxiomId) -> Option<&Axiom> {
        self.by_id.get(id).map(|&i| &self.axioms[i])
    }

    pub fn for_symbol(&self, f: &Symbol) -> impl Iterator<Item = &Axiom> {
        self.by_symbol.get(f).into_iter().flatten().map(|&i| &self.axioms[i])
    }

    /// The axiom whose left-hand side `t` is an instance of, with the
    /// matching substitution. Niceness makes the hit unique.
    pub fn match_axiom(&self, t: &Term) -> Option<(&Axiom, BTreeMap<Var, Term>)> {
        let Term::App(f, _) = t else { return None };
        self.for_symbol(f).find_map(|ax| {
            let mut binding = BTreeMap::new();
            ax.lhs().match_into(t, &mut binding).then_some((ax, binding))
        })
    }

    /// Every axiom matching `t`; at most one for a nice set.
    pub fn all_matches(&self, t: &Term) -> Vec<&AxiomId> {
        let Term::App(f, _) = t else { return Vec::new() };
        self.for_symbol(f)
            .filter(|ax| ax.lhs().match_into(t, &mut BTreeMap::new()))
            .map(|ax| &ax.id)
            .collect()
    }

    pub fn rename_injective(&self, id: &AxiomId, fresh: &mut FreshVars) -> Option<RenamedAxiom> {
        let ax = self.get(id)?;
        let renaming: BTreeMap<Var, Var> = ax.vars().into_iter().map(|x| (x, fresh.fresh())).collect();
        let map = renaming
            .iter()
            .map(|(x, y)| (x.clone(), Term::Var(y.clone())))
            .collect();
        Some(RenamedAxiom {
            equation: ax.equation.apply(&map),
            renaming,
        })
    }
}
