//! Brute-force reference semantics used to validate the kernel: rewriting
//! with the axioms as rules, enumeration of small values, exhaustive
//! κ-model checks and update-preservation checks.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::approx::{ApproxOrder, Suffix, Value};
use crate::axioms::{AxiomId, NiceAxiomSet};
use crate::derivation::Derivation;
use crate::frame::{validate_update_in, Assignment, Frame, FrameError, Update, UpdateError, UpdateSeq};
use crate::syntax::{Symbol, Term, Var};

/// Rewrite steps allowed to [`rewrite_eval`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fuel(pub usize);

impl Default for Fuel {
    fn default() -> Fuel {
        Fuel(10_000)
    }
}

/// Longest intermediate string [`rewrite_eval`] builds before giving up.
pub const MAX_REWRITE_BITS: usize = 4096;

/// Default limit on assignment evaluations in one model check.
pub const DEFAULT_CAP: usize = 1_000_000;

enum Task {
    /// Evaluate a term whose variables are bound in environment `env`.
    Eval(Term, usize),
    Apply(Symbol, usize),
}

/// Matches axiom argument patterns against strings, binding variables.
fn match_strings(patterns: &[Term], args: &[Vec<bool>]) -> Option<BTreeMap<Var, Vec<bool>>> {
    let mut env = BTreeMap::new();
    for (p, bits) in patterns.iter().zip(args) {
        match p {
            Term::Var(x) => {
                env.insert(x.clone(), bits.clone());
            }
            Term::App(Symbol::Eps, _) if bits.is_empty() => {}
            Term::App(f, inner) => {
                let (&last, rest) = bits.split_last()?;
                if f.successor_bit()? != last {
                    return None;
                }
                env.insert(inner.first()?.as_var()?.clone(), rest.to_vec());
            }
        }
    }
    Some(env)
}

/// Evaluates a ground term to a binary string by rewriting innermost and
/// leftmost first, reading each axiom left to right. `None` when a
/// variable is met, no axiom applies, fuel runs out, or a string grows past
/// [`MAX_REWRITE_BITS`].
///
/// Intermediate results are kept as strings rather than terms, so that long
/// strings never become deeply nested terms.
pub fn rewrite_eval(ax: &NiceAxiomSet, t: &Term, fuel: Fuel) -> Option<Vec<bool>> {
    let mut envs: Vec<BTreeMap<Var, Vec<bool>>> = alloc::vec![BTreeMap::new()];
    let mut tasks = alloc::vec![Task::Eval(t.clone(), 0)];
    let mut values: Vec<Vec<bool>> = Vec::new();
    let mut steps = 0;
    while let Some(task) = tasks.pop() {
        match task {
            Task::Eval(Term::Var(x), env) => values.push(envs[env].get(&x)?.clone()),
            Task::Eval(Term::App(Symbol::Eps, _), _) => values.push(Vec::new()),
            Task::Eval(Term::App(f, args), env) => {
                tasks.push(Task::Apply(f, args.len()));
                tasks.extend(args.into_iter().rev().map(|a| Task::Eval(a, env)));
            }
            Task::Apply(f, n) => {
                let args = values.split_off(values.len().checked_sub(n)?);
                if let Some(bit) = f.successor_bit() {
                    let mut bits = args.into_iter().next()?;
                    bits.push(bit);
                    if bits.len() > MAX_REWRITE_BITS {
                        return None;
                    }
                    values.push(bits);
                    continue;
                }
                steps += 1;
                if steps > fuel.0 {
                    return None;
                }
                let (axiom, env) = ax
                    .for_symbol(&f)
                    .find_map(|a| match_strings(a.args(), &args).map(|env| (a, env)))?;
                envs.push(env);
                tasks.push(Task::Eval(axiom.rhs().clone(), envs.len() - 1));
            }
        }
    }
    values.pop()
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("enumeration needs {needed} evaluations, cap is {cap}")]
    CapExceeded { needed: usize, cap: usize },
    #[error("the bound must be at least 1")]
    ZeroKappa,
}

/// Every value of gauge at most `kappa`.
pub fn enumerate_values(kappa: usize, cap: usize) -> Result<Vec<Value>, OracleError> {
    if kappa == 0 {
        return Err(OracleError::ZeroKappa);
    }
    let needed = value_count(kappa);
    if needed > cap {
        return Err(OracleError::CapExceeded { needed, cap });
    }
    Ok(Value::all_up_to_gauge(kappa))
}

/// `2^(κ+1) − 2`, saturating.
pub fn value_count(kappa: usize) -> usize {
    u32::try_from(kappa + 1)
        .ok()
        .and_then(|e| 1usize.checked_shl(e))
        .map_or(usize::MAX, |n| n - 2)
}

/// Which axioms a κ-model check quantifies over, and how far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelCheckScope {
    pub kappa: usize,
    pub axioms: BTreeSet<AxiomId>,
    pub cap: usize,
}

impl ModelCheckScope {
    /// The axioms occurring in `d`.
    pub fn for_derivation(kappa: usize, d: &Derivation) -> ModelCheckScope {
        ModelCheckScope {
            kappa,
            axioms: d.axioms_used(),
            cap: DEFAULT_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelCounterexample {
    pub axiom: AxiomId,
    pub rho: Assignment,
    pub lhs: Value,
    pub rhs: Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelCheck {
    Pass { assignments: usize },
    FrameGauge { gauge: usize, kappa: usize },
    Counterexample(ModelCounterexample),
    CapExceeded { needed: usize, cap: usize },
}

impl ModelCheck {
    pub fn passed(&self) -> bool {
        matches!(self, ModelCheck::Pass { .. })
    }
}

/// Whether `frame` is a κ-model for the scoped axioms: `G(F) <= κ`, and for
/// every assignment of values of gauge at most κ to an axiom's variables
/// the left side approximates the right side.
pub fn check_kappa_model(frame: &Frame, ax: &NiceAxiomSet, scope: &ModelCheckScope) -> ModelCheck {
    check_kappa_model_with::<Suffix>(frame, ax, scope)
}

/// As [`check_kappa_model`] with `⊑` taken from `O` throughout.
pub fn check_kappa_model_with<O: ApproxOrder>(frame: &Frame, ax: &NiceAxiomSet, scope: &ModelCheckScope) -> ModelCheck {
    let kappa = scope.kappa;
    if frame.gauge() > kappa {
        return ModelCheck::FrameGauge {
            gauge: frame.gauge(),
            kappa,
        };
    }
    let axioms: Vec<_> = ax.iter().filter(|a| scope.axioms.contains(&a.id)).collect();
    let per_value = value_count(kappa.max(1));
    let needed = axioms.iter().fold(0usize, |acc, a| {
        let n = u32::try_from(a.vars().len()).map_or(usize::MAX, |k| per_value.saturating_pow(k));
        acc.saturating_add(n)
    });
    if needed > scope.cap {
        return ModelCheck::CapExceeded { needed, cap: scope.cap };
    }
    let values = Value::all_up_to_gauge(kappa);
    let mut count = 0;
    for axiom in axioms {
        let vars = axiom.vars();
        let mut found = None;
        for_each_assignment(&vars, &values, &mut |rho| {
            count += 1;
            let lhs = frame.eval_with::<O>(rho, axiom.lhs());
            let rhs = frame.eval_with::<O>(rho, axiom.rhs());
            if O::leq(&lhs, &rhs) {
                true
            } else {
                found = Some(ModelCounterexample {
                    axiom: axiom.id.clone(),
                    rho: rho.clone(),
                    lhs,
                    rhs,
                });
                false
            }
        });
        if let Some(cx) = found {
            return ModelCheck::Counterexample(cx);
        }
    }
    ModelCheck::Pass { assignments: count }
}

/// Calls `f` on every assignment of `values` to `vars` until it returns
/// false.
fn for_each_assignment(vars: &[Var], values: &[Value], f: &mut impl FnMut(&Assignment) -> bool) {
    if values.is_empty() && !vars.is_empty() {
        return;
    }
    let mut index = alloc::vec![0usize; vars.len()];
    loop {
        let rho: Assignment = vars
            .iter()
            .zip(&index)
            .map(|(x, &i)| (x.clone(), values[i].clone()))
            .collect();
        if !f(&rho) {
            return;
        }
        let mut k = 0;
        loop {
            if k == index.len() {
                return;
            }
            index[k] += 1;
            if index[k] < values.len() {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PreservationError {
    #[error("the starting frame is not a κ-model: {0:?}")]
    NotAModel(ModelCheck),
    #[error("the update is not valid: {0}")]
    InvalidUpdate(UpdateError),
    #[error("the update does not apply: {0}")]
    Apply(FrameError),
    #[error("the updated frame is not a κ-model: {0:?}")]
    NotPreserved(ModelCheck),
}

/// Applies a valid update to a κ-model and checks the result is again a
/// κ-model of the same scope.
pub fn test_update_preservation(
    frame: &Frame,
    ax: &NiceAxiomSet,
    scope: &ModelCheckScope,
    u: &Update,
) -> Result<Frame, PreservationError> {
    let before = check_kappa_model(frame, ax, scope);
    if !before.passed() {
        return Err(PreservationError::NotAModel(before));
    }
    validate_update_in(frame, scope.kappa, &scope.axioms, ax, u).map_err(PreservationError::InvalidUpdate)?;
    let next = frame.apply_update(u).map_err(PreservationError::Apply)?;
    let after = check_kappa_model(&next, ax, scope);
    if !after.passed() {
        return Err(PreservationError::NotPreserved(after));
    }
    Ok(next)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Comparison {
    /// The approximation is below the rewrite value.
    Agrees {
        approx: Value,
        exact: Value,
    },
    /// Rewriting gave no value; nothing to compare.
    NoValue {
        approx: Value,
    },
    Overshoot {
        approx: Value,
        exact: Value,
    },
}

impl Comparison {
    pub fn ok(&self) -> bool {
        !matches!(self, Comparison::Overshoot { .. })
    }
}

/// Compares `⟦t⟧_{F∗σ,∅}` with the value obtained by rewriting `t`.
pub fn oracle_compare(
    ax: &NiceAxiomSet,
    frame: &Frame,
    sigma: &UpdateSeq,
    t: &Term,
    fuel: Fuel,
) -> Result<Comparison, FrameError> {
    let approx = frame.apply_seq(sigma)?.eval(&Assignment::new(), t);
    Ok(match rewrite_eval(ax, t, fuel) {
        None => Comparison::NoValue { approx },
        Some(bits) => {
            let exact = Value::ground(&bits);
            if approx.leq(&exact) {
                Comparison::Agrees { approx, exact }
            } else {
                Comparison::Overshoot { approx, exact }
            }
        }
    })
}
