//! Derivation trees, rule checking, length measures and Variable Normal Form.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::axioms::{AxiomId, NiceAxiomSet};
use crate::syntax::{Equation, FreshVars, Term, Var};

/// Constant `C` in the normalization bound `lh(to_vnf(D)) <= C * lh(D)^2`.
pub const VNF_LENGTH_CONSTANT: usize = 8;

/// The rule applied at a derivation node.
#[derive(Clone, PartialEq, Eq)]
pub enum Rule {
    /// Instance of an axiom; `instance` maps every axiom variable to a term.
    Axiom {
        id: AxiomId,
        instance: BTreeMap<Var, Term>,
    },
    Refl,
    Sym(Box<Derivation>),
    Trans(Box<Derivation>, Box<Derivation>),
    /// `t = u ⊢ s[t/x] = s[u/x]` with `s = context`, `x = hole`.
    Compat {
        context: Term,
        hole: Var,
        premise: Box<Derivation>,
    },
    /// `t = u ⊢ t[s/x] = u[s/x]` with `s = term`, binding `x = var`.
    Subst {
        term: Term,
        var: Var,
        premise: Box<Derivation>,
    },
}

/// A rule-labelled tree together with the conclusion claimed at its root.
///
/// The constructors compute conclusions from the premises; only
/// [`Derivation::from_parts`] lets a caller claim an arbitrary conclusion,
/// which [`Derivation::check`] then verifies.
#[derive(Clone, PartialEq, Eq)]
pub struct Derivation {
    rule: Rule,
    conclusion: Equation,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DerivationError {
    #[error("unknown axiom `{0}`")]
    UnknownAxiom(AxiomId),
    #[error("axiom `{id}` has no variable `{var}`")]
    NotAnAxiomVariable { id: AxiomId, var: Var },
}

/// Why a node failed [`Derivation::check`].
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("unknown axiom `{0}`")]
    UnknownAxiom(AxiomId),
    #[error("axiom `{id}` has no variable `{var}`")]
    NotAnAxiomVariable { id: AxiomId, var: Var },
    #[error("axiom `{id}`: instance is `{expected}` but the node claims `{found}`")]
    AxiomInstance {
        id: AxiomId,
        expected: Equation,
        found: Equation,
    },
    #[error("reflexivity node claims `{found}`")]
    Refl { found: Equation },
    #[error("{rule}: expected conclusion `{expected}`, node claims `{found}`")]
    Conclusion {
        rule: &'static str,
        expected: Equation,
        found: Equation,
    },
    #[error("transitivity: middle terms differ (`{left}` vs `{right}`)")]
    TransMiddle { left: Term, right: Term },
}

/// A diagnostic located by the child-index path from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: Vec<usize>,
    pub error: CheckError,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at /")?;
        for (i, p) in self.path.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ": {}", self.error)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationMeasures {
    pub length: usize,
    pub vars: BTreeSet<Var>,
    pub bvars: BTreeSet<Var>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VnfViolation {
    NotARenaming {
        path: Vec<usize>,
        id: AxiomId,
    },
    BoundTwice(Var),
    /// A bound variable occurs outside the premise of its Substitution.
    Escapes(Var),
    /// Neither in the end equation nor bound.
    Unaccounted(Var),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VnfError {
    #[error("derivation does not check: {0:?}")]
    DoesNotCheck(Vec<Diagnostic>),
}

fn instance_is_renaming(instance: &BTreeMap<Var, Term>) -> bool {
    let mut images = BTreeSet::new();
    instance
        .values()
        .all(|t| matches!(t, Term::Var(y) if images.insert(y.clone())))
}

impl Derivation {
    pub fn axiom(
        ax: &NiceAxiomSet,
        id: &AxiomId,
        pairs: impl IntoIterator<Item = (Var, Term)>,
    ) -> Result<Derivation, DerivationError> {
        let axiom = ax.get(id).ok_or_else(|| DerivationError::UnknownAxiom(id.clone()))?;
        let vars = axiom.vars();
        let mut instance: BTreeMap<Var, Term> = vars.iter().map(|x| (x.clone(), Term::Var(x.clone()))).collect();
        for (x, t) in pairs {
            match instance.get_mut(&x) {
                Some(slot) => *slot = t,
                None => return Err(DerivationError::NotAnAxiomVariable { id: id.clone(), var: x }),
            }
        }
        let conclusion = axiom.equation.apply(&instance);
        Ok(Derivation {
            rule: Rule::Axiom {
                id: id.clone(),
                instance,
            },
            conclusion,
        })
    }

    pub fn refl(t: Term) -> Derivation {
        Derivation {
            rule: Rule::Refl,
            conclusion: Equation::new(t.clone(), t),
        }
    }

    pub fn sym(premise: Derivation) -> Derivation {
        Derivation {
            conclusion: premise.conclusion.flipped(),
            rule: Rule::Sym(Box::new(premise)),
        }
    }

    /// Conclusion is `left.lhs = right.rhs`; matching middle terms are
    /// verified by [`Derivation::check`].
    pub fn trans(left: Derivation, right: Derivation) -> Derivation {
        Derivation {
            conclusion: Equation::new(left.conclusion.lhs.clone(), right.conclusion.rhs.clone()),
            rule: Rule::Trans(Box::new(left), Box::new(right)),
        }
    }

    pub fn compat(context: Term, hole: Var, premise: Derivation) -> Derivation {
        let conclusion = Equation::new(
            context.substitute(&hole, &premise.conclusion.lhs),
            context.substitute(&hole, &premise.conclusion.rhs),
        );
        Derivation {
            rule: Rule::Compat {
                context,
                hole,
                premise: Box::new(premise),
            },
            conclusion,
        }
    }

    pub fn subst(term: Term, var: Var, premise: Derivation) -> Derivation {
        let conclusion = premise.conclusion.substitute(&var, &term);
        Derivation {
            rule: Rule::Subst {
                term,
                var,
                premise: Box::new(premise),
            },
            conclusion,
        }
    }

    /// Builds a node with an arbitrary claimed conclusion.
    pub fn from_parts(rule: Rule, conclusion: Equation) -> Derivation {
        Derivation { rule, conclusion }
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn conclusion(&self) -> &Equation {
        &self.conclusion
    }

    pub fn children(&self) -> Vec<&Derivation> {
        match &self.rule {
            Rule::Axiom { .. } | Rule::Refl => Vec::new(),
            Rule::Sym(p) | Rule::Compat { premise: p, .. } | Rule::Subst { premise: p, .. } => {
                alloc::vec![&**p]
            }
            Rule::Trans(l, r) => alloc::vec![&**l, &**r],
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Height; a single node has height 1.
    pub fn height(&self) -> usize {
        1 + self.children().iter().map(|c| c.height()).max().unwrap_or(0)
    }

    /// Verifies every node against its rule and the axiom set.
    pub fn check(&self, ax: &NiceAxiomSet) -> CheckReport {
        let mut report = CheckReport::default();
        let mut path = Vec::new();
        self.check_into(ax, &mut path, &mut report.diagnostics);
        report
    }

    fn check_into(&self, ax: &NiceAxiomSet, path: &mut Vec<usize>, out: &mut Vec<Diagnostic>) {
        let mut fail = |error| {
            out.push(Diagnostic {
                path: path.clone(),
                error,
            })
        };
        let found = &self.conclusion;
        match &self.rule {
            Rule::Axiom { id, instance } => match ax.get(id) {
                None => fail(CheckError::UnknownAxiom(id.clone())),
                Some(axiom) => {
                    let vars: BTreeSet<Var> = axiom.vars().into_iter().collect();
                    if let Some(x) = instance.keys().find(|x| !vars.contains(*x)) {
                        fail(CheckError::NotAnAxiomVariable {
                            id: id.clone(),
                            var: x.clone(),
                        });
                    } else {
                        let expected = axiom.equation.apply(instance);
                        if &expected != found {
                            fail(CheckError::AxiomInstance {
                                id: id.clone(),
                                expected,
                                found: found.clone(),
                            });
                        }
                    }
                }
            },
            Rule::Refl => {
                if found.lhs != found.rhs {
                    fail(CheckError::Refl { found: found.clone() });
                }
            }
            Rule::Sym(p) => {
                let expected = p.conclusion.flipped();
                if &expected != found {
                    fail(CheckError::Conclusion {
                        rule: "symmetry",
                        expected,
                        found: found.clone(),
                    });
                }
            }
            Rule::Trans(l, r) => {
                if l.conclusion.rhs != r.conclusion.lhs {
                    fail(CheckError::TransMiddle {
                        left: l.conclusion.rhs.clone(),
                        right: r.conclusion.lhs.clone(),
                    });
                }
                let expected = Equation::new(l.conclusion.lhs.clone(), r.conclusion.rhs.clone());
                if &expected != found {
                    fail(CheckError::Conclusion {
                        rule: "transitivity",
                        expected,
                        found: found.clone(),
                    });
                }
            }
            Rule::Compat { context, hole, premise } => {
                let expected = Equation::new(
                    context.substitute(hole, &premise.conclusion.lhs),
                    context.substitute(hole, &premise.conclusion.rhs),
                );
                if &expected != found {
                    fail(CheckError::Conclusion {
                        rule: "compatibility",
                        expected,
                        found: found.clone(),
                    });
                }
            }
            Rule::Subst { term, var, premise } => {
                let expected = premise.conclusion.substitute(var, term);
                if &expected != found {
                    fail(CheckError::Conclusion {
                        rule: "substitution",
                        expected,
                        found: found.clone(),
                    });
                }
            }
        }
        for (i, c) in self.children().into_iter().enumerate() {
            path.push(i);
            c.check_into(ax, path, out);
            path.pop();
        }
    }

    /// Length surcharge for the rule syntax at this node: Substitution adds
    /// `lh(t, s, x, u, s, x)` for premise `t = u`, Compatibility adds
    /// `lh(s, x)`.
    fn surcharge(&self) -> usize {
        match &self.rule {
            Rule::Subst { term, premise, .. } => {
                let p = &premise.conclusion;
                p.lhs.length() + p.rhs.length() + 2 * term.length() + 2
            }
            Rule::Compat { context, .. } => context.length() + 1,
            _ => 0,
        }
    }

    /// `lh(D)`: the lengths of all equations plus rule-syntax surcharges.
    pub fn length(&self) -> usize {
        self.conclusion.length() + self.surcharge() + self.children().iter().map(|c| c.length()).sum::<usize>()
    }

    /// Variables mentioned at this node (conclusion, substitution term and
    /// bound variable, compatibility context without its hole).
    fn node_vars(&self, out: &mut BTreeSet<Var>) {
        self.conclusion.collect_vars(out);
        match &self.rule {
            Rule::Subst { term, var, .. } => {
                term.collect_vars(out);
                out.insert(var.clone());
            }
            Rule::Compat { context, hole, .. } => {
                let mut ctx = context.free_vars();
                ctx.remove(hole);
                out.extend(ctx);
            }
            _ => {}
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.walk(&mut |d| d.node_vars(&mut out));
        out
    }

    pub fn bound_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.walk(&mut |d| {
            if let Rule::Subst { var, .. } = &d.rule {
                out.insert(var.clone());
            }
        });
        out
    }

    pub fn measure(&self) -> DerivationMeasures {
        DerivationMeasures {
            length: self.length(),
            vars: self.vars(),
            bvars: self.bound_vars(),
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Derivation)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Ids of the axioms used at Axiom nodes.
    pub fn axioms_used(&self) -> BTreeSet<AxiomId> {
        let mut out = BTreeSet::new();
        self.walk(&mut |d| {
            if let Rule::Axiom { id, .. } = &d.rule {
                out.insert(id.clone());
            }
        });
        out
    }

    /// Every name the derivation mentions, including compatibility holes;
    /// fresh variables must avoid all of them.
    pub fn all_names(&self) -> BTreeSet<Var> {
        let mut out = self.vars();
        self.walk(&mut |d| {
            if let Rule::Compat { context, hole, .. } = &d.rule {
                context.collect_vars(&mut out);
                out.insert(hole.clone());
            }
        });
        out
    }

    pub fn vnf_violations(&self) -> Vec<VnfViolation> {
        let mut out = Vec::new();
        let mut binders: BTreeMap<Var, usize> = BTreeMap::new();
        let mut path = Vec::new();
        self.vnf_nodes(self, &mut path, &mut binders, &mut out);
        for (x, n) in &binders {
            if *n > 1 {
                out.push(VnfViolation::BoundTwice(x.clone()));
            }
        }
        let end = self.conclusion.free_vars();
        for x in self.vars() {
            if !end.contains(&x) && !binders.contains_key(&x) {
                out.push(VnfViolation::Unaccounted(x));
            }
        }
        out
    }

    fn vnf_nodes(
        &self,
        root: &Derivation,
        path: &mut Vec<usize>,
        binders: &mut BTreeMap<Var, usize>,
        out: &mut Vec<VnfViolation>,
    ) {
        match &self.rule {
            Rule::Axiom { id, instance } if !instance_is_renaming(instance) => {
                out.push(VnfViolation::NotARenaming {
                    path: path.clone(),
                    id: id.clone(),
                });
            }
            Rule::Subst { var, .. } => {
                *binders.entry(var.clone()).or_default() += 1;
                let mut premise_path = path.clone();
                premise_path.push(0);
                if root.mentions_outside(var, &premise_path, &mut Vec::new()) {
                    out.push(VnfViolation::Escapes(var.clone()));
                }
            }
            _ => {}
        }
        for (i, c) in self.children().into_iter().enumerate() {
            path.push(i);
            c.vnf_nodes(root, path, binders, out);
            path.pop();
        }
    }

    /// Whether `x` is mentioned anywhere except inside the subtree at
    /// `excluded` and except as the binder of that subtree's parent.
    fn mentions_outside(&self, x: &Var, excluded: &[usize], path: &mut Vec<usize>) -> bool {
        if path.as_slice() == excluded {
            return false;
        }
        let is_binder_parent = excluded.len() == path.len() + 1 && excluded.starts_with(path);
        let mut here = BTreeSet::new();
        self.conclusion.collect_vars(&mut here);
        match &self.rule {
            Rule::Subst { term, var, .. } => {
                term.collect_vars(&mut here);
                if !is_binder_parent {
                    here.insert(var.clone());
                }
            }
            Rule::Compat { context, hole, .. } => {
                let mut ctx = context.free_vars();
                ctx.remove(hole);
                here.extend(ctx);
            }
            _ => {}
        }
        if here.contains(x) {
            return true;
        }
        for (i, c) in self.children().into_iter().enumerate() {
            path.push(i);
            let hit = c.mentions_outside(x, excluded, path);
            path.pop();
            if hit {
                return true;
            }
        }
        false
    }

    pub fn is_vnf(&self) -> bool {
        self.vnf_violations().is_empty()
    }

    /// Uniformly renames `from` to `to` everywhere, binders included. Sound
    /// whenever `to` does not occur in the derivation.
    pub fn rename_var(&self, from: &Var, to: &Var) -> Derivation {
        let ren = |t: &Term| t.rename(from, to);
        let ren_var = |x: &Var| if x == from { to.clone() } else { x.clone() };
        let rule = match &self.rule {
            Rule::Axiom { id, instance } => Rule::Axiom {
                id: id.clone(),
                instance: instance.iter().map(|(x, t)| (x.clone(), ren(t))).collect(),
            },
            Rule::Refl => Rule::Refl,
            Rule::Sym(p) => Rule::Sym(Box::new(p.rename_var(from, to))),
            Rule::Trans(l, r) => Rule::Trans(Box::new(l.rename_var(from, to)), Box::new(r.rename_var(from, to))),
            Rule::Compat { context, hole, premise } => Rule::Compat {
                context: ren(context),
                hole: ren_var(hole),
                premise: Box::new(premise.rename_var(from, to)),
            },
            Rule::Subst { term, var, premise } => Rule::Subst {
                term: ren(term),
                var: ren_var(var),
                premise: Box::new(premise.rename_var(from, to)),
            },
        };
        Derivation {
            rule,
            conclusion: Equation::new(ren(&self.conclusion.lhs), ren(&self.conclusion.rhs)),
        }
    }

    /// Converts a checking derivation into Variable Normal Form.
    pub fn to_vnf(&self, ax: &NiceAxiomSet) -> Result<Derivation, VnfError> {
        let mut fresh = FreshVars::avoiding(self.all_names().iter().map(Var::name));
        self.to_vnf_with(ax, &mut fresh)
    }

    /// As [`Derivation::to_vnf`], drawing fresh variables from `fresh`.
    ///
    /// Axiom instances become injective renamings followed by one
    /// Substitution per axiom variable, every Substitution gets its own fresh
    /// bound variable, and variables that occur neither in the end equation
    /// nor under a binder are closed by `Subst(eps, y, _)` at the root.
    pub fn to_vnf_with(&self, ax: &NiceAxiomSet, fresh: &mut FreshVars) -> Result<Derivation, VnfError> {
        let report = self.check(ax);
        if !report.is_ok() {
            return Err(VnfError::DoesNotCheck(report.diagnostics));
        }
        for x in self.all_names() {
            fresh.avoid(x.name());
        }
        let expanded = self.expand_instances(ax, fresh);
        let mut out = expanded.freshen_binders(fresh);
        let end = out.conclusion.free_vars();
        let bound = out.bound_vars();
        let strays: Vec<Var> = out
            .vars()
            .into_iter()
            .filter(|x| !end.contains(x) && !bound.contains(x))
            .collect();
        for y in strays {
            out = Derivation::subst(Term::eps(), y, out);
        }
        Ok(out)
    }

    fn map_children(&self, f: &mut impl FnMut(&Derivation) -> Derivation) -> Derivation {
        let rule = match &self.rule {
            Rule::Axiom { .. } | Rule::Refl => self.rule.clone(),
            Rule::Sym(p) => Rule::Sym(Box::new(f(p))),
            Rule::Trans(l, r) => {
                let l = f(l);
                Rule::Trans(Box::new(l), Box::new(f(r)))
            }
            Rule::Compat { context, hole, premise } => Rule::Compat {
                context: context.clone(),
                hole: hole.clone(),
                premise: Box::new(f(premise)),
            },
            Rule::Subst { term, var, premise } => Rule::Subst {
                term: term.clone(),
                var: var.clone(),
                premise: Box::new(f(premise)),
            },
        };
        Derivation {
            rule,
            conclusion: self.conclusion.clone(),
        }
    }

    fn expand_instances(&self, ax: &NiceAxiomSet, fresh: &mut FreshVars) -> Derivation {
        match &self.rule {
            Rule::Axiom { id, instance } if !instance_is_renaming(instance) => {
                let Some(axiom) = ax.get(id) else {
                    return self.clone();
                };
                let renamed: Vec<(Var, Var)> = axiom.vars().into_iter().map(|x| (x, fresh.fresh())).collect();
                let Ok(mut node) =
                    Derivation::axiom(ax, id, renamed.iter().map(|(x, y)| (x.clone(), Term::Var(y.clone()))))
                else {
                    return self.clone();
                };
                for (x, y) in renamed {
                    let image = instance.get(&x).cloned().unwrap_or(Term::Var(x));
                    node = Derivation::subst(image, y, node);
                }
                debug_assert_eq!(node.conclusion, self.conclusion);
                node
            }
            _ => self.map_children(&mut |c| c.expand_instances(ax, fresh)),
        }
    }

    fn freshen_binders(&self, fresh: &mut FreshVars) -> Derivation {
        match &self.rule {
            Rule::Subst { term, var, premise } => {
                let y = fresh.fresh();
                let premise = premise.rename_var(var, &y).freshen_binders(fresh);
                Derivation {
                    rule: Rule::Subst {
                        term: term.clone(),
                        var: y,
                        premise: Box::new(premise),
                    },
                    conclusion: self.conclusion.clone(),
                }
            }
            _ => self.map_children(&mut |c| c.freshen_binders(fresh)),
        }
    }
}

impl fmt::Debug for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} ⊢ {}", self.conclusion)
    }
}

/// Prints the derivation-file syntax.
impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rule {
            Rule::Axiom { id, instance } => {
                write!(f, "(axiom {id} (")?;
                for (i, (x, t)) in instance.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "({x} {t})")?;
                }
                f.write_str("))")
            }
            Rule::Refl => write!(f, "(refl {})", self.conclusion.lhs),
            Rule::Sym(p) => write!(f, "(sym {p})"),
            Rule::Trans(l, r) => write!(f, "(trans {l} {r})"),
            Rule::Compat { context, hole, premise } => write!(f, "(compat {context} {hole} {premise})"),
            Rule::Subst { term, var, premise } => write!(f, "(subst {term} {var} {premise})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{double_axioms, equation, term, worked_derivation};
    use alloc::string::ToString;

    fn ax_node(id: &str, pairs: &[(&str, &str)]) -> Derivation {
        Derivation::axiom(
            &double_axioms(),
            &AxiomId::new(id),
            pairs.iter().map(|(x, t)| (Var::new(x), term(t))),
        )
        .unwrap()
    }

    #[test]
    fn worked_derivation_checks() {
        let d = worked_derivation();
        assert!(d.check(&double_axioms()).is_ok());
        assert_eq!(d.conclusion(), &equation("(d 0)", "(s0 (s0 eps))"));
        assert_eq!(
            d.to_string(),
            "(trans (subst eps y (axiom d.zero ((x y)))) (compat (s0 (s0 z)) z (axiom d.eps ())))"
        );
    }

    #[test]
    fn trans_middle_mismatch_is_rejected() {
        let d = Derivation::trans(Derivation::refl(term("0")), Derivation::refl(term("1")));
        let report = d.check(&double_axioms());
        assert_eq!(report.diagnostics.len(), 1);
        assert_eq!(report.diagnostics[0].path, Vec::<usize>::new());
        assert!(matches!(report.diagnostics[0].error, CheckError::TransMiddle { .. }));
    }

    #[test]
    fn subst_with_wrong_term_is_rejected() {
        let premise = ax_node("d.zero", &[]);
        let claimed = Equation::new(term("(d (s0 eps))"), term("(s0 (s0 (d (s1 eps))))"));
        let d = Derivation::from_parts(
            Rule::Subst {
                term: Term::eps(),
                var: Var::new("x"),
                premise: Box::new(premise),
            },
            claimed,
        );
        let report = d.check(&double_axioms());
        assert!(matches!(
            report.diagnostics.as_slice(),
            [Diagnostic {
                error: CheckError::Conclusion {
                    rule: "substitution",
                    ..
                },
                ..
            }]
        ));
    }

    #[test]
    fn bad_nodes_are_located() {
        let bad_axiom = Derivation::from_parts(
            Rule::Axiom {
                id: AxiomId::new("d.eps"),
                instance: BTreeMap::new(),
            },
            equation("(d eps)", "0"),
        );
        let unknown = Derivation::from_parts(
            Rule::Axiom {
                id: AxiomId::new("nope"),
                instance: BTreeMap::new(),
            },
            equation("eps", "eps"),
        );
        let d = Derivation::sym(Derivation::trans(bad_axiom, Derivation::sym(unknown)));
        let report = d.check(&double_axioms());
        let paths: Vec<_> = report.diagnostics.iter().map(|d| d.path.clone()).collect();
        assert!(paths.contains(&alloc::vec![0, 0]));
        assert!(paths.contains(&alloc::vec![0, 1, 0]));
        assert!(Derivation::from_parts(Rule::Refl, equation("0", "1"))
            .check(&double_axioms())
            .diagnostics
            .iter()
            .any(|d| matches!(d.error, CheckError::Refl { .. })));
        assert_eq!(
            Derivation::axiom(
                &double_axioms(),
                &AxiomId::new("d.zero"),
                [(Var::new("q"), Term::eps())]
            ),
            Err(DerivationError::NotAnAxiomVariable {
                id: AxiomId::new("d.zero"),
                var: Var::new("q")
            })
        );
    }

    #[test]
    fn measure_examples() {
        assert_eq!(Derivation::refl(Term::eps()).length(), 3);
        assert_eq!(ax_node("d.eps", &[]).length(), 4);
        let d = Derivation::subst(Term::eps(), Var::new("y"), ax_node("d.zero", &[("x", "y")]));
        let m = d.measure();
        assert_eq!(m.bvars, [Var::new("y")].into_iter().collect());
        assert!(m.bvars.is_subset(&m.vars));
        // 8 (axiom) + 8 (conclusion) + 3+1+1+4+1+1 (surcharge) = 27
        assert_eq!(m.length, 27);
        // 27 + 4 (d.eps) + 8 + 4 (compat) + 7 (root)
        assert_eq!(worked_derivation().length(), 50);
    }

    #[test]
    fn vnf_recognition() {
        assert!(worked_derivation().is_vnf());
        let inst = ax_node("d.zero", &[("x", "eps")]);
        assert!(inst.check(&double_axioms()).is_ok());
        assert!(!inst.is_vnf());
        let twice = Derivation::trans(
            Derivation::subst(Term::eps(), Var::new("y"), ax_node("d.zero", &[("x", "y")])),
            Derivation::compat(
                term("(s0 (s0 z))"),
                Var::new("z"),
                Derivation::subst(Term::eps(), Var::new("y"), Derivation::refl(term("(d y)"))),
            ),
        );
        assert!(twice.check(&double_axioms()).is_ok());
        assert!(twice
            .vnf_violations()
            .contains(&VnfViolation::BoundTwice(Var::new("y"))));
    }

    #[test]
    fn free_middle_variable_is_unaccounted() {
        // d(eps) = eps via Trans through the middle term (g-free) `eps`, but
        // with an intermediate Refl on a term that mentions `w` via Compat
        // discarding it.
        let discard = Derivation::compat(Term::eps(), Var::new("h"), Derivation::refl(term("w")));
        let d = Derivation::trans(ax_node("d.eps", &[]), discard);
        assert!(d.check(&double_axioms()).is_ok());
        assert_eq!(
            d.vnf_violations(),
            alloc::vec![VnfViolation::Unaccounted(Var::new("w"))]
        );
        let v = d.to_vnf(&double_axioms()).unwrap();
        assert!(v.is_vnf());
        assert_eq!(v.conclusion(), d.conclusion());
    }

    #[test]
    fn to_vnf_splits_axiom_instances() {
        let inst = ax_node("d.zero", &[("x", "eps")]);
        let v = inst.to_vnf(&double_axioms()).unwrap();
        assert_eq!(v.to_string(), "(subst eps v1 (axiom d.zero ((x v1))))");
        assert!(v.is_vnf());
        assert_eq!(v.conclusion(), inst.conclusion());
    }

    #[test]
    fn to_vnf_on_vnf_input_only_renames() {
        let d = worked_derivation();
        let v = d.to_vnf(&double_axioms()).unwrap();
        assert_eq!(
            v.to_string(),
            "(trans (subst eps v0 (axiom d.zero ((x v0)))) (compat (s0 (s0 z)) z (axiom d.eps ())))"
        );
        assert_eq!(v.length(), d.length());
    }

    #[test]
    fn to_vnf_separates_reused_binders() {
        let branch = || Derivation::subst(Term::eps(), Var::new("y"), ax_node("d.zero", &[("x", "y")]));
        let d = Derivation::trans(branch(), Derivation::sym(branch()));
        assert!(d.check(&double_axioms()).is_ok());
        assert!(!d.is_vnf());
        let v = d.to_vnf(&double_axioms()).unwrap();
        assert!(v.is_vnf());
        assert!(v.check(&double_axioms()).is_ok());
        assert_eq!(v.conclusion(), d.conclusion());
        assert_eq!(v.bound_vars().len(), 2);
    }

    #[test]
    fn escaping_binder_is_not_vnf() {
        // (subst (s0 y) y ...) keeps y in its own conclusion.
        let d = Derivation::subst(term("(s0 y)"), Var::new("y"), ax_node("d.zero", &[("x", "y")]));
        assert!(d.vnf_violations().contains(&VnfViolation::Escapes(Var::new("y"))));
        let v = d.to_vnf(&double_axioms()).unwrap();
        assert!(v.is_vnf());
        assert_eq!(v.conclusion(), d.conclusion());
    }

    #[test]
    fn to_vnf_rejects_non_checking_input() {
        let d = Derivation::trans(Derivation::refl(term("0")), Derivation::refl(term("1")));
        assert!(matches!(d.to_vnf(&double_axioms()), Err(VnfError::DoesNotCheck(_))));
    }
}
