//! Frames, assignments, evaluation of terms, and frame updates.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::approx::{ApproxError, ApproxOrder, ConsistentSet, Generator, Suffix, Value, ValueTuple};
use crate::axioms::{AxiomId, NiceAxiomSet};
use crate::derivation::Derivation;
use crate::syntax::{Symbol, Term, Var};

static BOTTOM: ConsistentSet = ConsistentSet::empty();

/// A finite table of consistent sets for defined symbols; symbols without an
/// entry denote `⊥`, the map that is `∗` everywhere.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Frame {
    table: BTreeMap<Symbol, ConsistentSet>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("basic symbol `{0}` cannot be updated")]
    BasicSymbol(Symbol),
    #[error("`{symbol}` has arity {arity} but the generator has extent {extent}")]
    Arity {
        symbol: Symbol,
        arity: usize,
        extent: usize,
    },
    #[error("update on `{symbol}`: {source}")]
    Inconsistent { symbol: Symbol, source: ApproxError },
}

/// Width, gauge and extent of a frame or update sequence. For a sequence the
/// width is its length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Measures {
    pub width: usize,
    pub gauge: usize,
    pub extent: usize,
}

impl Frame {
    pub fn new() -> Frame {
        Frame::default()
    }

    pub fn get(&self, f: &Symbol) -> &ConsistentSet {
        self.table.get(f).unwrap_or(&BOTTOM)
    }

    /// Symbols with a non-empty generator set.
    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &ConsistentSet)> {
        self.table.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Adds one generator; the persistent counterpart of `F ∗ f:v̄↦w`.
    pub fn apply_update(&self, u: &Update) -> Result<Frame, FrameError> {
        if u.symbol.is_basic() {
            return Err(FrameError::BasicSymbol(u.symbol.clone()));
        }
        if u.symbol.arity() != u.gen.extent() {
            return Err(FrameError::Arity {
                symbol: u.symbol.clone(),
                arity: u.symbol.arity(),
                extent: u.gen.extent(),
            });
        }
        let set = self
            .get(&u.symbol)
            .insert(u.gen.clone())
            .map_err(|source| FrameError::Inconsistent {
                symbol: u.symbol.clone(),
                source,
            })?;
        let mut table = self.table.clone();
        table.insert(u.symbol.clone(), set);
        Ok(Frame { table })
    }

    pub fn apply_seq(&self, seq: &UpdateSeq) -> Result<Frame, FrameError> {
        seq.0.iter().try_fold(self.clone(), |f, u| f.apply_update(u))
    }

    /// Pointwise inclusion of generator sets.
    pub fn leq(&self, other: &Frame) -> bool {
        self.table.iter().all(|(f, set)| set.is_subset(other.get(f)))
    }

    /// `w(F)`, `G(F)`, `E(F)`; each is 0 for the empty frame.
    pub fn measures(&self) -> Measures {
        let mut m = Measures::default();
        for (f, set) in &self.table {
            m.width = m.width.max(set.width());
            m.gauge = m.gauge.max(set.gauge());
            if set.width() > 0 {
                m.extent = m.extent.max(f.arity());
            }
        }
        m
    }

    pub fn gauge(&self) -> usize {
        self.measures().gauge
    }

    /// `⟦t⟧_{F,ρ}`.
    pub fn eval(&self, rho: &Assignment, t: &Term) -> Value {
        self.eval_with::<Suffix>(rho, t)
    }

    /// Evaluation with maps applied under the given implementation of `⊑`.
    pub fn eval_with<O: ApproxOrder>(&self, rho: &Assignment, t: &Term) -> Value {
        match t {
            Term::Var(x) => rho.get(x),
            Term::App(Symbol::Eps, _) => Value::eps(),
            Term::App(f @ (Symbol::S0 | Symbol::S1), args) => {
                let bit = f.successor_bit().unwrap_or_default();
                self.eval_with::<O>(rho, &args[0]).push(bit)
            }
            Term::App(f, args) => {
                let xs = ValueTuple::new(args.iter().map(|a| self.eval_with::<O>(rho, a)).collect());
                self.get(f).apply_with::<O>(&xs)
            }
        }
    }
}

/// One generator line per entry, e.g. `d (eps:) -> eps:00`.
impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (sym, set) in &self.table {
            for g in set.generators() {
                writeln!(f, "{sym} {g}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(&self.table).finish()
    }
}

/// A finite map from variables to values; every other variable is `∗`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    table: BTreeMap<Var, Value>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn get(&self, x: &Var) -> Value {
        self.table.get(x).cloned().unwrap_or_else(Value::star)
    }

    /// `ρ[x ↦ v]`.
    pub fn with(&self, x: Var, v: Value) -> Assignment {
        let mut a = self.clone();
        a.set(x, v);
        a
    }

    pub fn set(&mut self, x: Var, v: Value) {
        self.table.insert(x, v);
    }

    /// Drops `x` from the domain, making it `∗` again.
    pub fn remove(&mut self, x: &Var) {
        self.table.remove(x);
    }

    pub fn domain(&self) -> BTreeSet<Var> {
        self.table.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Value)> {
        self.table.iter()
    }

    pub fn width(&self) -> usize {
        self.table.len()
    }

    pub fn gauge(&self) -> usize {
        self.table.values().map(Value::gauge).max().unwrap_or(0)
    }

    /// `ρ₁ ⊑ ρ₂` pointwise, with the `∗` default on both sides.
    pub fn leq(&self, other: &Assignment) -> bool {
        self.table.iter().all(|(x, v)| v.leq(&other.get(x)))
    }
}

impl FromIterator<(Var, Value)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, Value)>>(iter: I) -> Assignment {
        Assignment {
            table: iter.into_iter().collect(),
        }
    }
}

/// One line per binding, e.g. `x = eps:0`.
impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (x, v) in &self.table {
            writeln!(f, "{x} = {v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(&self.table).finish()
    }
}

/// A new generator for one defined symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Update {
    pub symbol: Symbol,
    pub gen: Generator,
}

impl Update {
    pub fn new(symbol: Symbol, gen: Generator) -> Update {
        Update { symbol, gen }
    }

    pub fn gauge(&self) -> usize {
        self.gen.gauge()
    }

    pub fn extent(&self) -> usize {
        self.gen.extent()
    }
}

impl fmt::Display for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.symbol, self.gen)
    }
}

impl fmt::Debug for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct UpdateSeq(pub Vec<Update>);

impl UpdateSeq {
    pub fn new() -> UpdateSeq {
        UpdateSeq::default()
    }

    pub fn push(&mut self, u: Update) {
        self.0.push(u);
    }

    pub fn updates(&self) -> &[Update] {
        &self.0
    }

    /// `seqlh(σ)`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Width is `seqlh(σ)`.
    pub fn measures(&self) -> Measures {
        Measures {
            width: self.0.len(),
            gauge: self.0.iter().map(Update::gauge).max().unwrap_or(0),
            extent: self.0.iter().map(Update::extent).max().unwrap_or(0),
        }
    }
}

impl fmt::Debug for UpdateSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

/// Why an update is not based on a frame, a bound and a derivation.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum UpdateError {
    #[error("update gauge {gauge} exceeds bound {kappa}")]
    Gauge { gauge: usize, kappa: usize },
    #[error("no axiom used in the derivation has arguments matching {0}")]
    NoAxiom(Update),
    #[error("axiom `{axiom}` gives output {expected}, update has {found}")]
    Output {
        axiom: AxiomId,
        expected: Value,
        found: Value,
    },
}

/// Recovers the assignment under which the argument patterns of an axiom
/// (generalized variables) evaluate to `args`.
pub fn match_arguments(patterns: &[Term], args: &ValueTuple) -> Option<Assignment> {
    let mut rho = Assignment::new();
    for (p, v) in patterns.iter().zip(args.values()) {
        match p {
            Term::Var(x) => rho.set(x.clone(), v.clone()),
            Term::App(Symbol::Eps, _) => {
                if *v != Value::eps() {
                    return None;
                }
            }
            Term::App(f, inner) => {
                let bit = f.successor_bit()?;
                let x = inner.first()?.as_var()?;
                let (rest, last) = v.pop()?;
                if last != bit {
                    return None;
                }
                rho.set(x.clone(), rest);
            }
        }
    }
    Some(rho)
}

/// Checks that `u` is an update based on `frame`, `kappa` and the axioms
/// used in `d`.
pub fn validate_update(
    frame: &Frame,
    kappa: usize,
    d: &Derivation,
    ax: &NiceAxiomSet,
    u: &Update,
) -> Result<AxiomId, UpdateError> {
    validate_update_in(frame, kappa, &d.axioms_used(), ax, u)
}

/// As [`validate_update`] with the set of used axioms precomputed. Returns
/// the witnessing axiom.
pub fn validate_update_in(
    frame: &Frame,
    kappa: usize,
    used: &BTreeSet<AxiomId>,
    ax: &NiceAxiomSet,
    u: &Update,
) -> Result<AxiomId, UpdateError> {
    if u.gauge() > kappa {
        return Err(UpdateError::Gauge {
            gauge: u.gauge(),
            kappa,
        });
    }
    for axiom in ax.for_symbol(&u.symbol).filter(|a| used.contains(&a.id)) {
        let Some(rho) = match_arguments(axiom.args(), u.gen.args()) else {
            continue;
        };
        let expected = frame.eval(&rho, axiom.rhs());
        if &expected != u.gen.out() {
            return Err(UpdateError::Output {
                axiom: axiom.id.clone(),
                expected,
                found: u.gen.out().clone(),
            });
        }
        return Ok(axiom.id.clone());
    }
    Err(UpdateError::NoAxiom(u.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{double_axioms, double_signature, term, worked_derivation};
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn v(s: &str) -> Value {
        s.parse().unwrap()
    }

    fn d() -> Symbol {
        double_signature().lookup("d").unwrap()
    }

    fn upd(args: &[&str], out: &str) -> Update {
        Update::new(
            d(),
            Generator::new(ValueTuple::new(args.iter().map(|s| v(s)).collect()), v(out)).unwrap(),
        )
    }

    fn worked_sigma2() -> UpdateSeq {
        UpdateSeq(vec![upd(&["eps"], "eps"), upd(&["eps:0"], "eps:00")])
    }

    #[test]
    fn eval_examples() {
        let empty = Frame::new();
        assert_eq!(empty.eval(&Assignment::new(), &term("(d eps)")), Value::star());
        assert_eq!(empty.eval(&Assignment::new(), &term("(s0 (s1 eps))")), v("eps:10"));
        let f = empty.apply_update(&upd(&["eps"], "eps")).unwrap();
        let rho: Assignment = [(Var::new("x"), Value::eps())].into_iter().collect();
        assert_eq!(f.eval(&rho, &term("(s0 (d x))")), v("eps:0"));
        assert_eq!(empty.eval(&Assignment::new(), &term("(s1 (d y))")), v("star:1"));
    }

    #[test]
    fn update_examples() {
        let u = upd(&["eps"], "eps");
        let f = Frame::new().apply_update(&u).unwrap();
        assert_eq!(f.apply_update(&u).unwrap(), f);
        let g = f.apply_update(&upd(&["eps:0"], "eps:00")).unwrap();
        assert_eq!(g.get(&d()).width(), 2);
        assert_eq!(Frame::new().apply_seq(&worked_sigma2()).unwrap(), g);
        assert_eq!(Frame::new().apply_seq(&UpdateSeq::new()).unwrap(), Frame::new());
        assert!(matches!(
            g.apply_update(&upd(&["eps"], "eps:1")),
            Err(FrameError::Inconsistent { .. })
        ));
        let bad = Update::new(
            Symbol::S0,
            Generator::new(ValueTuple::new(vec![]), Value::eps()).unwrap(),
        );
        assert_eq!(
            Frame::new().apply_update(&bad),
            Err(FrameError::BasicSymbol(Symbol::S0))
        );
        assert!(Frame::new().leq(&g) && f.leq(&g) && !g.leq(&f));
        assert_eq!(g.to_string(), "d (eps:) -> eps:\nd (eps:0) -> eps:00\n");
    }

    #[test]
    fn sequence_concatenation() {
        let s = worked_sigma2();
        let (a, b) = (UpdateSeq(s.0[..1].to_vec()), UpdateSeq(s.0[1..].to_vec()));
        let lhs = Frame::new().apply_seq(&s).unwrap();
        let rhs = Frame::new().apply_seq(&a).unwrap().apply_seq(&b).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn measure_examples() {
        assert_eq!(Frame::new().measures(), Measures::default());
        let g = Frame::new().apply_seq(&worked_sigma2()).unwrap();
        assert_eq!(
            g.measures(),
            Measures {
                width: 2,
                gauge: 3,
                extent: 1
            }
        );
        assert_eq!(
            worked_sigma2().measures(),
            Measures {
                width: 2,
                gauge: 3,
                extent: 1
            }
        );
    }

    #[test]
    fn validate_update_examples() {
        let ax = double_axioms();
        let dd = worked_derivation();
        let e = Frame::new();
        assert_eq!(
            validate_update(&e, 1, &dd, &ax, &upd(&["eps"], "eps")),
            Ok(AxiomId::new("d.eps"))
        );
        let f = e.apply_update(&upd(&["eps"], "eps")).unwrap();
        assert_eq!(
            validate_update(&f, 3, &dd, &ax, &upd(&["eps:0"], "eps:00")),
            Ok(AxiomId::new("d.zero"))
        );
        assert!(matches!(
            validate_update(&f, 3, &dd, &ax, &upd(&["eps:0"], "eps:00")).and(validate_update(
                &f,
                2,
                &dd,
                &ax,
                &upd(&["eps:0"], "eps:00")
            )),
            Err(UpdateError::Gauge { gauge: 3, kappa: 2 })
        ));
        // d.one is not used by the worked derivation.
        assert!(matches!(
            validate_update(&f, 5, &dd, &ax, &upd(&["eps:1"], "eps:00")),
            Err(UpdateError::NoAxiom(_))
        ));
        let with_one = Derivation::axiom(&ax, &AxiomId::new("d.one"), []).unwrap();
        assert_eq!(
            validate_update(&f, 5, &with_one, &ax, &upd(&["eps:1"], "eps:00")),
            Err(UpdateError::Output {
                axiom: AxiomId::new("d.one"),
                expected: v("eps:11"),
                found: v("eps:00"),
            })
        );
    }

    #[test]
    fn argument_patterns() {
        let pats = [term("(s1 x)"), term("y")];
        let rho = match_arguments(&pats, &ValueTuple::new(vec![v("*01"), v("eps")])).unwrap();
        assert_eq!(rho.get(&Var::new("x")), v("*0"));
        assert_eq!(rho.get(&Var::new("y")), Value::eps());
        assert!(match_arguments(&pats, &ValueTuple::new(vec![v("*"), v("eps")])).is_none());
        assert!(match_arguments(&[Term::eps()], &ValueTuple::new(vec![v("*")])).is_none());
    }

    pub(crate) fn arb_frame_and_rho() -> impl Strategy<Value = (Frame, Assignment)> {
        let value = crate::approx::tests::arb_value(3);
        let gens = proptest::collection::vec(
            (0usize..2, proptest::collection::vec(value.clone(), 2), value.clone()),
            0..8,
        );
        let rho = proptest::collection::vec(value, 3);
        (gens, rho).prop_map(|(gens, rho)| {
            let sig = double_signature();
            let syms = [sig.lookup("d").unwrap(), sig.lookup("g").unwrap()];
            let mut frame = Frame::new();
            for (which, args, out) in gens {
                let sym = syms[which].clone();
                let args = ValueTuple::new(args[..sym.arity()].to_vec());
                if let Ok(gen) = Generator::new(args, out) {
                    if let Ok(next) = frame.apply_update(&Update::new(sym, gen)) {
                        frame = next;
                    }
                }
            }
            let rho = ["x", "y", "z"].iter().zip(rho).map(|(x, v)| (Var::new(x), v)).collect();
            (frame, rho)
        })
    }

    proptest! {
        #[test]
        fn value_bound((f, rho) in arb_frame_and_rho(), t in crate::syntax::tests::arb_term()) {
            let v = f.eval(&rho, &t);
            prop_assert!(v.gauge() <= f.gauge().max(rho.gauge()) + t.length());
        }

        #[test]
        fn substitution_lemma((f, rho) in arb_frame_and_rho(),
                              t in crate::syntax::tests::arb_term(),
                              u in crate::syntax::tests::arb_term(),
                              which in 0usize..3) {
            let x = Var::new(["x", "y", "z"][which]);
            let lhs = f.eval(&rho, &t.substitute(&x, &u));
            let rhs = f.eval(&rho.with(x, f.eval(&rho, &u)), &t);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn evaluation_is_monotone((f, rho) in arb_frame_and_rho(),
                                  (g, sigma) in arb_frame_and_rho(),
                                  t in crate::syntax::tests::arb_term()) {
            // Extend f by whatever generators of g fit, and rho by compatible
            // refinements taken from sigma.
            let mut big = f.clone();
            for (sym, set) in g.iter() {
                for gen in set.generators() {
                    if let Ok(next) = big.apply_update(&Update::new(sym.clone(), gen.clone())) {
                        big = next;
                    }
                }
            }
            let mut rho2 = rho.clone();
            for (x, v) in sigma.iter() {
                if rho.get(x).leq(v) {
                    rho2.set(x.clone(), v.clone());
                }
            }
            prop_assert!(f.leq(&big) && rho.leq(&rho2));
            prop_assert!(f.eval(&rho, &t).leq(&big.eval(&rho2, &t)));
        }

        #[test]
        fn update_measure_deltas((f, _) in arb_frame_and_rho(),
                                 args in crate::approx::tests::arb_value(3),
                                 out in crate::approx::tests::arb_value(3)) {
            let Ok(gen) = Generator::new(ValueTuple::new(vec![args]), out) else { return Ok(()); };
            let u = Update::new(d(), gen);
            if let Ok(next) = f.apply_update(&u) {
                let (m, n) = (f.measures(), next.measures());
                prop_assert_eq!(n.gauge, m.gauge.max(u.gauge()));
                prop_assert_eq!(n.extent, m.extent.max(1));
                prop_assert!(next.get(&d()).width() <= f.get(&d()).width() + 1);
            }
        }
    }
}
