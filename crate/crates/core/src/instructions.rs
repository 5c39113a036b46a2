//! Linearization of derivations into instruction sequences, and the
//! evaluators that turn instructions into frame updates.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::approx::{Generator, ValueTuple};
use crate::axioms::{AxiomId, NiceAxiomSet};
use crate::derivation::{Derivation, Rule};
use crate::frame::{validate_update_in, Assignment, Frame, FrameError, Update, UpdateError, UpdateSeq};
use crate::syntax::{Equation, Symbol, Term, Var};

#[derive(Clone, PartialEq, Eq)]
pub enum Instruction {
    /// Use an axiom `t = u` left to right; changes nothing.
    AxFwd(Equation),
    /// Use an axiom `t = u` right to left; records `⟦u⟧` as the value of `t`.
    AxBwd(Equation),
    /// Enter a substitution `[term/var]`; `ctx` is the side of the premise
    /// being rewritten.
    SubUp { ctx: Term, term: Term, var: Var },
    /// Leave a substitution, unbinding `var`.
    SubDown { ctx: Term, term: Term, var: Var },
}

impl Instruction {
    pub fn length(&self) -> usize {
        match self {
            Instruction::AxFwd(eq) | Instruction::AxBwd(eq) => eq.length(),
            Instruction::SubUp { ctx, term, .. } | Instruction::SubDown { ctx, term, .. } => {
                ctx.length() + term.length() + 1
            }
        }
    }
}

/// Trace syntax: `AX-> t = u`, `AX<- t = u`, `SUP x := s [ctx t]`, `SDN x`.
impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::AxFwd(eq) => write!(f, "AX-> {eq}"),
            Instruction::AxBwd(eq) => write!(f, "AX<- {eq}"),
            Instruction::SubUp { ctx, term, var } => write!(f, "SUP {var} := {term} [ctx {ctx}]"),
            Instruction::SubDown { var, .. } => write!(f, "SDN {var}"),
        }
    }
}

impl fmt::Debug for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Sum of instruction lengths.
pub fn total_length(tau: &[Instruction]) -> usize {
    tau.iter().map(Instruction::length).sum()
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum InstructionError {
    #[error("derivation is not in Variable Normal Form")]
    NotVnf,
    #[error("`{0}` is not an axiom equation with a defined head symbol")]
    NotAxiomShape(Equation),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Forward and backward instruction sequences of a VNF derivation.
pub fn extract(d: &Derivation) -> Result<(Vec<Instruction>, Vec<Instruction>), InstructionError> {
    if !d.is_vnf() {
        return Err(InstructionError::NotVnf);
    }
    Ok(extract_unchecked(d))
}

pub fn extract_forward(d: &Derivation) -> Result<Vec<Instruction>, InstructionError> {
    extract(d).map(|(fwd, _)| fwd)
}

pub fn extract_backward(d: &Derivation) -> Result<Vec<Instruction>, InstructionError> {
    extract(d).map(|(_, bwd)| bwd)
}

/// As [`extract`] without the normal-form check.
pub fn extract_unchecked(d: &Derivation) -> (Vec<Instruction>, Vec<Instruction>) {
    match d.rule() {
        Rule::Axiom { .. } => (
            alloc::vec![Instruction::AxFwd(d.conclusion().clone())],
            alloc::vec![Instruction::AxBwd(d.conclusion().clone())],
        ),
        Rule::Refl => (Vec::new(), Vec::new()),
        Rule::Sym(p) => {
            let (fwd, bwd) = extract_unchecked(p);
            (bwd, fwd)
        }
        Rule::Trans(l, r) => {
            let (mut f1, b1) = extract_unchecked(l);
            let (f2, mut b2) = extract_unchecked(r);
            f1.extend(f2);
            b2.extend(b1);
            (f1, b2)
        }
        Rule::Compat { premise, .. } => extract_unchecked(premise),
        Rule::Subst { term, var, premise } => {
            let Equation { lhs: t, rhs: u } = premise.conclusion();
            let (inner_f, inner_b) = extract_unchecked(premise);
            let up = |ctx: &Term| Instruction::SubUp {
                ctx: ctx.clone(),
                term: term.clone(),
                var: var.clone(),
            };
            let down = |ctx: &Term| Instruction::SubDown {
                ctx: ctx.clone(),
                term: term.clone(),
                var: var.clone(),
            };
            let mut fwd = alloc::vec![up(t)];
            fwd.extend(inner_f);
            fwd.push(down(u));
            let mut bwd = alloc::vec![up(u)];
            bwd.extend(inner_b);
            bwd.push(down(t));
            (fwd, bwd)
        }
    }
}

/// The update `f:ρ(t̄) ↦ ⟦u⟧_{F,ρ}` for an axiom equation `f(t̄) = u`, or
/// `None` when `⟦u⟧` is `∗` (nothing to record).
pub fn psi(eq: &Equation, frame: &Frame, rho: &Assignment) -> Result<Option<Update>, InstructionError> {
    let shape_error = || InstructionError::NotAxiomShape(eq.clone());
    let Term::App(f @ Symbol::Defined(_), args) = &eq.lhs else {
        return Err(shape_error());
    };
    if !args.iter().all(Term::is_generalized_variable) {
        return Err(shape_error());
    }
    let vs = ValueTuple::new(args.iter().map(|a| frame.eval(rho, a)).collect());
    let w = frame.eval(rho, &eq.rhs);
    if w.is_star() {
        return Ok(None);
    }
    let gen = Generator::new(vs, w).map_err(|_| shape_error())?;
    Ok(Some(Update::new(f.clone(), gen)))
}

/// The triple threaded through [`phi`]: a fixed base frame, the updates
/// collected so far, and the current assignment. `frame` caches
/// `base ∗ seq`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineState {
    pub base: Frame,
    pub seq: UpdateSeq,
    pub rho: Assignment,
    frame: Frame,
    /// Backward axiom steps whose value was `∗`.
    pub skipped: usize,
}

impl MachineState {
    pub fn new(base: Frame, rho: Assignment) -> MachineState {
        MachineState {
            frame: base.clone(),
            base,
            seq: UpdateSeq::new(),
            rho,
            skipped: 0,
        }
    }

    /// `base ∗ seq`.
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn step(&mut self, instr: &Instruction) -> Result<(), InstructionError> {
        match instr {
            Instruction::AxFwd(_) => {}
            Instruction::AxBwd(eq) => match psi(eq, &self.frame, &self.rho)? {
                Some(u) => {
                    self.frame = self.frame.apply_update(&u)?;
                    self.seq.push(u);
                }
                None => self.skipped += 1,
            },
            Instruction::SubUp { term, var, .. } => {
                let v = self.frame.eval(&self.rho, term);
                self.rho.set(var.clone(), v);
            }
            Instruction::SubDown { var, .. } => self.rho.remove(var),
        }
        Ok(())
    }
}

/// Runs `tau` from `state`.
pub fn phi(tau: &[Instruction], state: &MachineState) -> Result<MachineState, InstructionError> {
    let mut s = state.clone();
    for instr in tau {
        s.step(instr)?;
    }
    Ok(s)
}

/// A named inequality `value <= bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundCheck {
    pub name: String,
    pub value: usize,
    pub bound: usize,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, value: usize, bound: usize) -> BoundCheck {
        BoundCheck {
            name: name.into(),
            value,
            bound,
        }
    }

    pub fn holds(&self) -> bool {
        self.value <= self.bound
    }
}

impl fmt::Display for BoundCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.holds() { "ok" } else { "VIOLATED" };
        write!(f, "{}: {} <= {} {verdict}", self.name, self.value, self.bound)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiAudit {
    pub bounds: Vec<BoundCheck>,
    /// Updates (by index into the final sequence) that fail validation.
    pub invalid_updates: Vec<(usize, UpdateError)>,
}

impl PhiAudit {
    pub fn passed(&self) -> bool {
        self.invalid_updates.is_empty() && self.bounds.iter().all(BoundCheck::holds)
    }
}

/// Checks the measure growth of a run of [`phi`], and that every update it
/// appended is based on the frame before it, `kappa` and the axioms `used`.
pub fn audit_phi_measures(
    before: &MachineState,
    tau: &[Instruction],
    after: &MachineState,
    kappa: usize,
    used: &BTreeSet<AxiomId>,
    ax: &NiceAxiomSet,
) -> PhiAudit {
    let (s0, s1) = (before.seq.measures(), after.seq.measures());
    let lh = total_length(tau);
    let start = before.rho.gauge().max(before.base.gauge()).max(s0.gauge);
    let bounds = alloc::vec![
        BoundCheck::new("seqlh(sigma')", s1.width, s0.width + tau.len()),
        BoundCheck::new("G(rho')", after.rho.gauge(), start + lh),
        BoundCheck::new("G(sigma')", s1.gauge, start + lh),
        BoundCheck::new("E(sigma')", s1.extent, s0.extent + lh),
    ];
    let mut invalid_updates = Vec::new();
    let mut frame = before.frame.clone();
    for (i, u) in after.seq.updates().iter().enumerate().skip(before.seq.len()) {
        if let Err(e) = validate_update_in(&frame, kappa, used, ax, u) {
            invalid_updates.push((i, e));
        }
        match frame.apply_update(u) {
            Ok(next) => frame = next,
            Err(_) => break,
        }
    }
    PhiAudit {
        bounds,
        invalid_updates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::Value;
    use crate::fixtures::{double_axioms, double_signature, equation, term, worked_derivation};
    use crate::syntax::FreshVars;
    use alloc::string::{String, ToString};

    fn v(s: &str) -> Value {
        s.parse().unwrap()
    }

    fn lines(tau: &[Instruction]) -> Vec<String> {
        tau.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn extraction_examples() {
        let (f, b) = extract(&Derivation::refl(Term::eps())).unwrap();
        assert!(f.is_empty() && b.is_empty());
        let ax = double_axioms();
        let a = Derivation::axiom(&ax, &AxiomId::new("d.eps"), []).unwrap();
        let (f, b) = extract(&a).unwrap();
        assert_eq!(lines(&f), ["AX-> (d eps) = eps"]);
        assert_eq!(lines(&b), ["AX<- (d eps) = eps"]);
        let (f, b) = extract(&Derivation::sym(a)).unwrap();
        assert_eq!(lines(&f), ["AX<- (d eps) = eps"]);
        assert_eq!(lines(&b), ["AX-> (d eps) = eps"]);
    }

    #[test]
    fn worked_extraction() {
        let (f, b) = extract(&worked_derivation()).unwrap();
        assert_eq!(
            lines(&f),
            [
                "SUP y := eps [ctx (d (s0 y))]",
                "AX-> (d (s0 y)) = (s0 (s0 (d y)))",
                "SDN y",
                "AX-> (d eps) = eps",
            ]
        );
        assert_eq!(
            lines(&b),
            [
                "AX<- (d eps) = eps",
                "SUP y := eps [ctx (s0 (s0 (d y)))]",
                "AX<- (d (s0 y)) = (s0 (s0 (d y)))",
                "SDN y",
            ]
        );
        assert_eq!(b.iter().map(Instruction::length).collect::<Vec<_>>(), [4, 6, 8, 5]);
        assert_eq!(total_length(&f), total_length(&b));
        assert!(total_length(&f) <= worked_derivation().length());
    }

    #[test]
    fn non_vnf_is_refused() {
        let inst = Derivation::axiom(
            &double_axioms(),
            &AxiomId::new("d.zero"),
            [(Var::new("x"), Term::eps())],
        )
        .unwrap();
        assert_eq!(extract(&inst), Err(InstructionError::NotVnf));
    }

    #[test]
    fn psi_examples() {
        let d = double_signature().lookup("d").unwrap();
        let e = Frame::new();
        let u = psi(&equation("(d eps)", "eps"), &e, &Assignment::new())
            .unwrap()
            .unwrap();
        assert_eq!(u.to_string(), "d:(eps:) -> eps:");
        let f = e.apply_update(&u).unwrap();
        let step = equation("(d (s0 y))", "(s0 (s0 (d y)))");
        let rho: Assignment = [(Var::new("y"), Value::eps())].into_iter().collect();
        let u2 = psi(&step, &f, &rho).unwrap().unwrap();
        assert_eq!(u2.symbol, d);
        assert_eq!(u2.gen.args().values(), [v("eps:0")]);
        assert_eq!(u2.gen.out(), &v("eps:00"));
        let u3 = psi(&step, &e, &Assignment::new()).unwrap().unwrap();
        assert_eq!(u3.to_string(), "d:(star:0) -> star:00");
        // An output of bare `∗` is skipped.
        assert_eq!(psi(&equation("(d x)", "(d x)"), &e, &Assignment::new()), Ok(None));
        assert!(psi(&equation("(s0 x)", "x"), &e, &Assignment::new()).is_err());
    }

    #[test]
    fn worked_phi_runs() {
        let (f, b) = extract(&worked_derivation()).unwrap();
        let start = MachineState::new(Frame::new(), Assignment::new());
        assert_eq!(phi(&[], &start).unwrap(), start);
        let after_f = phi(&f, &start).unwrap();
        assert!(after_f.seq.is_empty());
        assert_eq!(after_f.rho, Assignment::new());
        let after_b = phi(&b, &start).unwrap();
        assert_eq!(
            after_b
                .seq
                .updates()
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>(),
            ["d:(eps:) -> eps:", "d:(eps:0) -> eps:00"]
        );
        assert_eq!(after_b.rho, Assignment::new());
        assert_eq!(after_b.frame(), &Frame::new().apply_seq(&after_b.seq).unwrap());

        let used = worked_derivation().axioms_used();
        let kappa = worked_derivation().length();
        let audit = audit_phi_measures(&start, &b, &after_b, kappa, &used, &double_axioms());
        assert!(audit.passed(), "{audit:?}");
        assert_eq!(audit.bounds[0], BoundCheck::new("seqlh(sigma')", 2, 4));
        assert_eq!(audit.bounds[2], BoundCheck::new("G(sigma')", 3, 23));
        let empty = audit_phi_measures(&start, &[], &start, 0, &used, &double_axioms());
        assert!(empty.passed());
        assert_eq!(empty.bounds[0].value, empty.bounds[0].bound);
    }

    #[test]
    fn concatenation_on_worked_sequences() {
        let (f, b) = extract(&worked_derivation()).unwrap();
        let start = MachineState::new(Frame::new(), Assignment::new());
        for tau in [f, b] {
            for k in 0..=tau.len() {
                let split = phi(&tau[k..], &phi(&tau[..k], &start).unwrap()).unwrap();
                assert_eq!(split, phi(&tau, &start).unwrap());
            }
        }
    }

    #[test]
    fn restoration_with_disjoint_assignment() {
        let d = worked_derivation();
        let rho: Assignment = [(Var::new("z"), v("eps:1")), (Var::new("w"), v("*0"))]
            .into_iter()
            .collect();
        let (f, b) = extract(&d).unwrap();
        let start = MachineState::new(Frame::new(), rho.clone());
        assert_eq!(phi(&f, &start).unwrap().rho, rho);
        assert_eq!(phi(&b, &start).unwrap().rho, rho);
    }

    #[test]
    fn normalized_instances_extract() {
        let ax = double_axioms();
        let d = Derivation::trans(
            Derivation::axiom(&ax, &AxiomId::new("d.one"), [(Var::new("x"), term("0"))]).unwrap(),
            Derivation::compat(
                term("(s1 (s1 h))"),
                Var::new("h"),
                Derivation::trans(
                    Derivation::axiom(&ax, &AxiomId::new("d.zero"), [(Var::new("x"), Term::eps())]).unwrap(),
                    Derivation::compat(
                        term("(s0 (s0 h))"),
                        Var::new("h"),
                        Derivation::axiom(&ax, &AxiomId::new("d.eps"), []).unwrap(),
                    ),
                ),
            ),
        );
        assert!(d.check(&ax).is_ok());
        let n = d.to_vnf_with(&ax, &mut FreshVars::new()).unwrap();
        let (_, b) = extract(&n).unwrap();
        let end = phi(&b, &MachineState::new(Frame::new(), Assignment::new())).unwrap();
        assert_eq!(
            end.frame().eval(&Assignment::new(), &term("(d (s1 (s0 eps)))")),
            v("eps:0011")
        );
    }
}
