//! End-to-end certification: normalize, extract instructions, build update
//! sequences in both directions, and check the soundness inequalities and
//! all measure bounds.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use sha2::{Digest, Sha256};

use crate::approx::Value;
use crate::axioms::{AxiomId, NiceAxiomSet};
use crate::derivation::{Derivation, Diagnostic, Rule};
use crate::frame::{Assignment, Frame, UpdateSeq};
use crate::instructions::{
    audit_phi_measures, extract_unchecked, phi, total_length, BoundCheck, Instruction, InstructionError, MachineState,
};
use crate::syntax::{Equation, FreshVars, Term, Var};

/// How `lh(D)` is computed; recorded in certificates so numbers can be
/// compared across tools.
pub const LENGTH_CONVENTION: &str =
    "sum of node equation lengths; substitution adds lh(t)+lh(s)+1+lh(u)+lh(s)+1, compatibility adds lh(s)+1";

/// Hex SHA-256 of the printed derivation.
pub fn digest(d: &Derivation) -> String {
    let mut text = String::new();
    let _ = write!(text, "{d}");
    let hash = Sha256::digest(text.as_bytes());
    let mut out = String::with_capacity(64);
    for b in hash {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// A node whose soundness claim failed during replay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeFailure {
    /// Child-index path in the normalized derivation.
    pub path: Vec<usize>,
    pub forward: bool,
    /// The node's conclusion oriented in the direction of the run.
    pub claim: Equation,
    pub left: Value,
    pub right: Value,
    pub rho: Assignment,
    pub updates_before: usize,
    pub updates_after: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub original_digest: String,
    pub normalized_digest: String,
    pub length_convention: &'static str,
    pub normalized: Derivation,
    pub equation: Equation,
    pub frame: Frame,
    pub rho: Assignment,
    /// `lh` of the normalized derivation.
    pub length: usize,
    /// `U = max{G(F), G(ρ)} + lh(D)`.
    pub budget: usize,
    pub forward: Vec<Instruction>,
    pub backward: Vec<Instruction>,
    pub sigma1: UpdateSeq,
    pub sigma2: UpdateSeq,
    /// `⟦t⟧_{F,ρ}`
    pub a: Value,
    /// `⟦u⟧_{F∗σ₁,ρ}`
    pub b: Value,
    /// `⟦u⟧_{F,ρ}`
    pub c: Value,
    /// `⟦t⟧_{F∗σ₂,ρ}`
    pub d: Value,
    pub audits: Vec<BoundCheck>,
    /// Updates appended by the runs that fail validation, as text.
    pub invalid_updates: Vec<String>,
    pub rho_restored: bool,
    pub skipped: usize,
    /// Innermost node whose claim fails, when an inequality fails.
    pub failure: Option<NodeFailure>,
}

impl Certificate {
    pub fn forward_holds(&self) -> bool {
        self.a.leq(&self.b)
    }

    pub fn backward_holds(&self) -> bool {
        self.c.leq(&self.d)
    }

    pub fn audits_pass(&self) -> bool {
        self.rho_restored && self.invalid_updates.is_empty() && self.audits.iter().all(BoundCheck::holds)
    }

    pub fn passed(&self) -> bool {
        self.forward_holds() && self.backward_holds() && self.audits_pass()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CertifyError {
    #[error("derivation does not check")]
    DoesNotCheck(Vec<Diagnostic>),
    #[error("assignment binds `{0}`, which is not in the end equation")]
    AssignmentScope(Var),
    #[error("derivation is not in Variable Normal Form")]
    NotVnf,
    #[error(transparent)]
    Instruction(#[from] InstructionError),
    #[error("certification failed")]
    Failed(Box<Certificate>),
}

/// Certifies a derivation: checks it, normalizes it, and verifies
/// `⟦t⟧_{F,ρ} ⊑ ⟦u⟧_{F∗σ₁,ρ}` and `⟦u⟧_{F,ρ} ⊑ ⟦t⟧_{F∗σ₂,ρ}` together with
/// every bound audit.
pub fn certify(
    d: &Derivation,
    ax: &NiceAxiomSet,
    frame: &Frame,
    rho: &Assignment,
) -> Result<Certificate, CertifyError> {
    let report = d.check(ax);
    if !report.is_ok() {
        return Err(CertifyError::DoesNotCheck(report.diagnostics));
    }
    let mut fresh = FreshVars::avoiding(rho.domain().iter().map(Var::name));
    let normalized = d
        .to_vnf_with(ax, &mut fresh)
        .map_err(|_| CertifyError::DoesNotCheck(Vec::new()))?;
    let mut cert = certify_vnf(&normalized, ax, frame, rho)?;
    cert.original_digest = digest(d);
    if cert.passed() {
        Ok(cert)
    } else {
        Err(CertifyError::Failed(Box::new(cert)))
    }
}

/// Runs the certification pipeline on a derivation already in normal form
/// without checking its rules. Inequality and audit failures are recorded
/// in the certificate rather than returned as errors.
pub fn certify_vnf(
    d: &Derivation,
    ax: &NiceAxiomSet,
    frame: &Frame,
    rho: &Assignment,
) -> Result<Certificate, CertifyError> {
    let eq = d.conclusion().clone();
    let end_vars = eq.free_vars();
    if let Some(x) = rho.domain().into_iter().find(|x| !end_vars.contains(x)) {
        return Err(CertifyError::AssignmentScope(x));
    }
    if !d.is_vnf() {
        return Err(CertifyError::NotVnf);
    }
    let length = d.length();
    let start_gauge = frame.gauge().max(rho.gauge());
    let budget = start_gauge + length;
    let used = d.axioms_used();
    let (forward, backward) = extract_unchecked(d);
    let start = MachineState::new(frame.clone(), rho.clone());
    let after_f = phi(&forward, &start)?;
    let after_b = phi(&backward, &start)?;

    let a = frame.eval(rho, &eq.lhs);
    let b = after_f.frame().eval(rho, &eq.rhs);
    let c = frame.eval(rho, &eq.rhs);
    let dd = after_b.frame().eval(rho, &eq.lhs);

    let mut audits = Vec::new();
    let mut invalid_updates = Vec::new();
    for (dir, tau, after) in [("forward", &forward, &after_f), ("backward", &backward, &after_b)] {
        let audit = audit_phi_measures(&start, tau, after, budget, &used, ax);
        audits.extend(audit.bounds.into_iter().map(|b| BoundCheck {
            name: alloc::format!("{dir}: {}", b.name),
            ..b
        }));
        invalid_updates.extend(
            audit
                .invalid_updates
                .iter()
                .map(|(i, e)| alloc::format!("{}: {e}", after.seq.updates()[*i])),
        );
    }
    audits.extend(claim_bounds(&after_f.seq, &after_b.seq, length, start_gauge));
    let (lf, lb) = (total_length(&forward), total_length(&backward));
    audits.push(BoundCheck::new("lh(forward)", lf, length));
    audits.push(BoundCheck::new("lh(backward)", lb, length));
    audits.push(BoundCheck::new("lh(forward) vs lh(backward)", lf, lb));
    audits.push(BoundCheck::new("lh(backward) vs lh(forward)", lb, lf));

    let mut cert = Certificate {
        original_digest: digest(d),
        normalized_digest: digest(d),
        length_convention: LENGTH_CONVENTION,
        normalized: d.clone(),
        equation: eq,
        frame: frame.clone(),
        rho: rho.clone(),
        length,
        budget,
        rho_restored: after_f.rho == *rho && after_b.rho == *rho,
        skipped: after_f.skipped + after_b.skipped,
        forward,
        backward,
        sigma1: after_f.seq,
        sigma2: after_b.seq,
        a,
        b,
        c,
        d: dd,
        audits,
        invalid_updates,
        failure: None,
    };
    if !cert.forward_holds() || !cert.backward_holds() {
        cert.failure = replay_claims(d, frame, rho)?;
    }
    Ok(cert)
}

/// `seqlh(σᵢ), E(σᵢ) <= lh(D)` and `G(σᵢ) <= max{G(F), G(ρ)} + lh(D)`.
pub fn claim_bounds(sigma1: &UpdateSeq, sigma2: &UpdateSeq, length: usize, start_gauge: usize) -> Vec<BoundCheck> {
    let (m1, m2) = (sigma1.measures(), sigma2.measures());
    alloc::vec![
        BoundCheck::new("seqlh(sigma1)", m1.width, length),
        BoundCheck::new("seqlh(sigma2)", m2.width, length),
        BoundCheck::new("E(sigma1)", m1.extent, length),
        BoundCheck::new("E(sigma2)", m2.extent, length),
        BoundCheck::new("G(sigma1)", m1.gauge, start_gauge + length),
        BoundCheck::new("G(sigma2)", m2.gauge, start_gauge + length),
    ]
}

/// Re-runs both directions node by node, checking at every sub-derivation
/// that the value of its left side before its instructions approximates
/// the value of its right side after them. Returns the first failure in
/// post-order, which is the innermost one.
pub fn replay_claims(d: &Derivation, frame: &Frame, rho: &Assignment) -> Result<Option<NodeFailure>, InstructionError> {
    for forward in [true, false] {
        let mut state = MachineState::new(frame.clone(), rho.clone());
        let mut failure = None;
        replay(d, forward, &mut state, &mut Vec::new(), &mut failure)?;
        if failure.is_some() {
            return Ok(failure);
        }
    }
    Ok(None)
}

fn replay(
    d: &Derivation,
    forward: bool,
    state: &mut MachineState,
    path: &mut Vec<usize>,
    failure: &mut Option<NodeFailure>,
) -> Result<(), InstructionError> {
    let before = state.clone();
    let mut child = |i: usize, c: &Derivation, dir: bool, state: &mut MachineState| {
        path.push(i);
        let r = replay(c, dir, state, path, failure);
        path.pop();
        r
    };
    let eq = d.conclusion();
    match d.rule() {
        Rule::Axiom { .. } => state.step(&if forward {
            Instruction::AxFwd(eq.clone())
        } else {
            Instruction::AxBwd(eq.clone())
        })?,
        Rule::Refl => {}
        Rule::Sym(p) => child(0, p, !forward, state)?,
        Rule::Trans(l, r) => {
            if forward {
                child(0, l, true, state)?;
                child(1, r, true, state)?;
            } else {
                child(1, r, false, state)?;
                child(0, l, false, state)?;
            }
        }
        Rule::Compat { premise, .. } => child(0, premise, forward, state)?,
        Rule::Subst { term, var, premise } => {
            let p = premise.conclusion();
            let (up, down) = if forward { (&p.lhs, &p.rhs) } else { (&p.rhs, &p.lhs) };
            state.step(&Instruction::SubUp {
                ctx: up.clone(),
                term: term.clone(),
                var: var.clone(),
            })?;
            child(0, premise, forward, state)?;
            state.step(&Instruction::SubDown {
                ctx: down.clone(),
                term: term.clone(),
                var: var.clone(),
            })?;
        }
    }
    if failure.is_none() {
        let claim = if forward { eq.clone() } else { eq.flipped() };
        let left = before.frame().eval(&before.rho, &claim.lhs);
        let right = state.frame().eval(&before.rho, &claim.rhs);
        if !left.leq(&right) {
            *failure = Some(NodeFailure {
                path: path.clone(),
                forward,
                claim,
                left,
                right,
                rho: before.rho.clone(),
                updates_before: before.seq.len(),
                updates_after: state.seq.len(),
            });
        }
    }
    Ok(())
}

/// Where a derivation stands with respect to proving `0 = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProbeOutcome {
    /// The rule checker refused it.
    RejectedByCheck(Vec<Diagnostic>),
    /// It reached certification and every inequality held.
    Certified { zero_one: bool },
    /// It reached certification and an inequality failed.
    InequalityFailed {
        zero_one: bool,
        a: Value,
        b: Value,
        c: Value,
        d: Value,
    },
    /// Some other stage refused it (normal form, assignment, audits).
    Refused(String),
}

/// Runs a derivation through the pipeline and reports where it stops.
/// With `bypass_check` the rule checker is skipped and the derivation must
/// already be in normal form.
pub fn consistency_probe(d: &Derivation, ax: &NiceAxiomSet, bypass_check: bool) -> ProbeOutcome {
    let zero_one = is_zero_one(d.conclusion());
    let result = if bypass_check {
        certify_vnf(d, ax, &Frame::new(), &Assignment::new())
    } else {
        certify(d, ax, &Frame::new(), &Assignment::new()).or_else(|e| match e {
            CertifyError::Failed(cert) => Ok(*cert),
            other => Err(other),
        })
    };
    match result {
        Err(CertifyError::DoesNotCheck(diags)) => ProbeOutcome::RejectedByCheck(diags),
        Err(e) => ProbeOutcome::Refused(alloc::format!("{e}")),
        Ok(cert) if !cert.forward_holds() || !cert.backward_holds() => ProbeOutcome::InequalityFailed {
            zero_one,
            a: cert.a,
            b: cert.b,
            c: cert.c,
            d: cert.d,
        },
        Ok(cert) if !cert.audits_pass() => ProbeOutcome::Refused(String::from("audit failure")),
        Ok(_) => ProbeOutcome::Certified { zero_one },
    }
}

pub fn is_zero_one(eq: &Equation) -> bool {
    eq.lhs == Term::from_bits(&[false]) && eq.rhs == Term::from_bits(&[true])
}

/// Axioms occurring in `d`, for model checks scoped to a derivation.
pub fn axioms_in_scope(d: &Derivation) -> BTreeSet<AxiomId> {
    d.axioms_used()
}
