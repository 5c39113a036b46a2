//! Random nice theories and random derivations built by forward rule
//! application, for corpus runs and property tests.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pets_core::approx::{Root, Value};
use pets_core::axioms::{validate_nice, AxiomId};
use pets_core::derivation::Derivation;
use pets_core::frame::Assignment;
use pets_core::syntax::{Equation, Signature, Symbol, Term, Var};

use crate::format::Theory;

/// Height limit for generated derivations.
pub const MAX_HEIGHT: usize = 6;

/// Relative weights of the rules at interior nodes.
#[derive(Clone, Copy, Debug)]
pub struct RuleWeights {
    pub axiom: f64,
    pub trans: f64,
    pub subst: f64,
    pub compat: f64,
    pub sym: f64,
    pub refl: f64,
}

impl Default for RuleWeights {
    fn default() -> RuleWeights {
        RuleWeights {
            axiom: 0.30,
            trans: 0.25,
            subst: 0.20,
            compat: 0.15,
            sym: 0.07,
            refl: 0.03,
        }
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const POOL: [&str; 3] = ["x", "y", "z"];

/// A random nice theory over 2 to 4 defined symbols of arity at most 2.
///
/// Each symbol gets no axioms, one plain axiom, or a case split on its first
/// argument. Right-hand sides call lower-numbered symbols freely and the
/// symbol itself only on the predecessor variable, so rewriting terminates.
pub fn random_theory(rng: &mut impl Rng) -> Theory {
    let mut signature = Signature::new();
    let count = rng.random_range(2..=4);
    let symbols: Vec<Symbol> = (0..count)
        .map(|i| {
            let arity = rng.random_range(0..=2);
            signature.declare(&format!("f{i}"), arity).expect("fresh symbol names")
        })
        .collect();
    let mut axioms = Vec::new();
    for (i, f) in symbols.iter().enumerate() {
        let lower = &symbols[..i];
        let extra: Vec<Var> = ["y"]
            .iter()
            .take(f.arity().saturating_sub(1))
            .map(|n| Var::new(n))
            .collect();
        let mode = rng.random_range(0..10);
        if mode < 2 {
            continue;
        }
        if mode < 5 || f.arity() == 0 {
            let vars: Vec<Var> = ["x", "y"].iter().take(f.arity()).map(|n| Var::new(n)).collect();
            let lhs = Term::App(f.clone(), vars.iter().cloned().map(Term::Var).collect());
            let rhs = random_rhs(rng, &vars, lower, None, 3);
            axioms.push((AxiomId::new(&format!("{}.def", f.name())), Equation::new(lhs, rhs)));
            continue;
        }
        let mut cases: Vec<usize> = (0..3).filter(|_| rng.random_bool(0.75)).collect();
        if cases.is_empty() {
            cases.push(rng.random_range(0..3));
        }
        for case in cases {
            let x = Var::new("x");
            let (first, mut vars, name) = match case {
                0 => (Term::eps(), Vec::new(), "eps"),
                1 => (Term::s0(Term::Var(x.clone())), vec![x.clone()], "zero"),
                _ => (Term::s1(Term::Var(x.clone())), vec![x.clone()], "one"),
            };
            let mut args = vec![first];
            args.extend(extra.iter().cloned().map(Term::Var));
            vars.extend(extra.iter().cloned());
            let recursive = (case != 0).then(|| (f.clone(), x.clone()));
            let rhs = random_rhs(rng, &vars, lower, recursive.as_ref(), 3);
            let lhs = Term::App(f.clone(), args);
            axioms.push((AxiomId::new(&format!("{}.{name}", f.name())), Equation::new(lhs, rhs)));
        }
    }
    let axioms = validate_nice(axioms).expect("generated axioms are nice by construction");
    Theory { signature, axioms }
}

/// A right-hand side over `vars`, calling `lower` symbols and, when given,
/// the recursive symbol with the predecessor variable as first argument.
fn random_rhs(
    rng: &mut impl Rng,
    vars: &[Var],
    lower: &[Symbol],
    recursive: Option<&(Symbol, Var)>,
    depth: usize,
) -> Term {
    let leaf = |rng: &mut dyn rand::RngCore| match vars.choose(rng) {
        Some(x) if rng.random_bool(0.7) => Term::Var(x.clone()),
        _ => Term::eps(),
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.random_range(0..10) {
        0..=2 => leaf(rng),
        3..=5 => Term::succ(rng.random_bool(0.5), random_rhs(rng, vars, lower, recursive, depth - 1)),
        6 | 7 if !lower.is_empty() => {
            let g = lower.choose(rng).expect("non-empty");
            let args = (0..g.arity())
                .map(|_| random_rhs(rng, vars, lower, recursive, depth - 1))
                .collect();
            Term::App(g.clone(), args)
        }
        8 | 9 if recursive.is_some() => {
            let (f, x) = recursive.expect("checked");
            let mut args = vec![Term::Var(x.clone())];
            args.extend((1..f.arity()).map(|_| random_rhs(rng, vars, lower, None, depth - 1)));
            Term::App(f.clone(), args)
        }
        _ => Term::succ(rng.random_bool(0.5), leaf(rng)),
    }
}

/// A random term over `x`, `y`, `z` and all symbols of the theory.
pub fn random_term(rng: &mut impl Rng, theory: &Theory, depth: usize) -> Term {
    if depth == 0 || rng.random_bool(0.35) {
        return if rng.random_bool(0.6) {
            Term::var(POOL.choose(rng).expect("non-empty"))
        } else {
            Term::eps()
        };
    }
    let defined: Vec<Symbol> = theory.signature.defined().cloned().collect();
    if rng.random_bool(0.5) || defined.is_empty() {
        Term::succ(rng.random_bool(0.5), random_term(rng, theory, depth - 1))
    } else {
        let f = defined.choose(rng).expect("non-empty");
        Term::App(
            f.clone(),
            (0..f.arity()).map(|_| random_term(rng, theory, depth - 1)).collect(),
        )
    }
}

/// A hole name that does not occur in `t`.
fn hole_for(t: &Term) -> Var {
    let vars = t.free_vars();
    (0..)
        .map(|i| Var::new(&format!("h{i}")))
        .find(|h| !vars.contains(h))
        .expect("infinitely many names")
}

pub struct DerivationGen<'a> {
    pub theory: &'a Theory,
    pub weights: RuleWeights,
}

impl<'a> DerivationGen<'a> {
    pub fn new(theory: &'a Theory) -> DerivationGen<'a> {
        DerivationGen {
            theory,
            weights: RuleWeights::default(),
        }
    }

    /// A checking derivation of height at most `height`.
    pub fn any(&self, rng: &mut impl Rng, height: usize) -> Derivation {
        if height <= 1 {
            return if rng.random_bool(0.9) {
                self.axiom(rng)
            } else {
                Derivation::refl(random_term(rng, self.theory, 2))
            };
        }
        let w = self.weights;
        let total = w.axiom + w.trans + w.subst + w.compat + w.sym + w.refl;
        let mut pick = rng.random::<f64>() * total;
        let mut choose = |weight: f64| {
            pick -= weight;
            pick < 0.0
        };
        if choose(w.axiom) {
            self.axiom(rng)
        } else if choose(w.trans) {
            let left = self.any(rng, height - 1);
            let right = self.from_term(rng, &left.conclusion().rhs.clone(), height - 1);
            Derivation::trans(left, right)
        } else if choose(w.subst) {
            let premise = self.any(rng, height - 1);
            let vars: Vec<Var> = premise.conclusion().free_vars().into_iter().collect();
            let x = match vars.choose(rng) {
                Some(x) if rng.random_bool(0.85) => x.clone(),
                _ => Var::new(POOL.choose(rng).expect("non-empty")),
            };
            Derivation::subst(random_term(rng, self.theory, 2), x, premise)
        } else if choose(w.compat) {
            let premise = self.any(rng, height - 1);
            let base = random_term(rng, self.theory, 2);
            let hole = hole_for(&base);
            let positions = base.positions();
            let at = positions.choose(rng).expect("root position");
            let context = base.replace_at(at, Term::Var(hole.clone()));
            Derivation::compat(context, hole, premise)
        } else if choose(w.sym) {
            Derivation::sym(self.any(rng, height - 1))
        } else {
            Derivation::refl(random_term(rng, self.theory, 2))
        }
    }

    /// An instance of a random axiom; `Refl` when the theory has none.
    fn axiom(&self, rng: &mut impl Rng) -> Derivation {
        let axioms: Vec<_> = self.theory.axioms.iter().collect();
        let Some(a) = axioms.choose(rng) else {
            return Derivation::refl(random_term(rng, self.theory, 2));
        };
        let pairs: Vec<(Var, Term)> = a
            .vars()
            .into_iter()
            .map(|x| {
                let t = if rng.random_bool(0.3) {
                    Term::Var(x.clone())
                } else {
                    random_term(rng, self.theory, 2)
                };
                (x, t)
            })
            .collect();
        Derivation::axiom(&self.theory.axioms, &a.id, pairs).expect("variables come from the axiom")
    }

    /// A derivation of `s = w` for some `w`, rewriting `s` with an axiom at a
    /// random matching position when there is one.
    pub fn from_term(&self, rng: &mut impl Rng, s: &Term, height: usize) -> Derivation {
        if height >= 3 && rng.random_bool(0.3) {
            let first = self.from_term(rng, s, height - 1);
            let mid = first.conclusion().rhs.clone();
            let second = self.from_term(rng, &mid, height - 1);
            return Derivation::trans(first, second);
        }
        let redexes: Vec<(Vec<usize>, Derivation)> = s
            .positions()
            .into_iter()
            .filter(|p| height >= 2 || p.is_empty())
            .filter_map(|p| {
                let sub = s.at(&p)?;
                let (a, binding) = self.theory.axioms.match_axiom(sub)?;
                let step = Derivation::axiom(&self.theory.axioms, &a.id, binding).ok()?;
                Some((p, step))
            })
            .collect();
        match redexes.choose(rng) {
            Some((p, step)) if rng.random_bool(0.9) => {
                if p.is_empty() {
                    step.clone()
                } else {
                    let hole = hole_for(s);
                    Derivation::compat(s.replace_at(p, Term::Var(hole.clone())), hole, step.clone())
                }
            }
            _ => Derivation::refl(s.clone()),
        }
    }
}

/// Sometimes binds some end-equation variables to small values.
pub fn random_assignment(rng: &mut impl Rng, eq: &Equation) -> Assignment {
    let mut rho = Assignment::new();
    if rng.random_bool(0.7) {
        return rho;
    }
    for x in eq.free_vars() {
        if rng.random_bool(0.5) {
            rho.set(x, random_value(rng, 3));
        }
    }
    rho
}

/// A value of gauge at most `max_gauge`.
pub fn random_value(rng: &mut impl Rng, max_gauge: usize) -> Value {
    let len = rng.random_range(0..max_gauge.max(1));
    let root = if rng.random_bool(0.5) { Root::Star } else { Root::Eps };
    Value::new(root, (0..len).map(|_| rng.random_bool(0.5)).collect())
}

/// One generated derivation with its starting assignment.
#[derive(Clone, Debug)]
pub struct FuzzCase {
    pub theory: usize,
    pub derivation: Derivation,
    pub rho: Assignment,
}

pub struct Corpus {
    pub theories: Vec<Theory>,
    pub cases: Vec<FuzzCase>,
}

/// `count` derivations spread round-robin over `theories` random theories,
/// all derived from `seed`.
pub fn corpus(seed: u64, theories: usize, count: usize, height: usize) -> Corpus {
    let mut rng = rng_from_seed(seed);
    let theories: Vec<Theory> = (0..theories.max(1)).map(|_| random_theory(&mut rng)).collect();
    corpus_over(&mut rng, theories, count, height)
}

/// `count` derivations over the given theories.
pub fn corpus_over(rng: &mut impl Rng, theories: Vec<Theory>, count: usize, height: usize) -> Corpus {
    let cases = (0..count)
        .map(|i| {
            let theory = i % theories.len();
            let derivation = DerivationGen::new(&theories[theory]).any(rng, height);
            let rho = random_assignment(rng, derivation.conclusion());
            FuzzCase {
                theory,
                derivation,
                rho,
            }
        })
        .collect();
    Corpus { theories, cases }
}
