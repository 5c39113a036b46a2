//! The approximation domain: values, the approximation order, generators,
//! consistent sets and the finitely generated maps they define.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// Leftmost constructor of a value: the unknown `∗` or the empty string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Root {
    Star,
    Eps,
}

/// An approximate value: a root followed by bits in append order, so
/// `eps:10` is the string built by appending 1 then 0 to ε.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value {
    root: Root,
    bits: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ApproxError {
    #[error("extent mismatch: {0} vs {1}")]
    ExtentMismatch(usize, usize),
    #[error("incompatible values {0} and {1}")]
    Incompatible(Value, Value),
    #[error("generator output must not be *")]
    StarOutput,
    #[error("generators {0} and {1} are inconsistent")]
    Inconsistent(Box<Generator>, Box<Generator>),
    #[error("bad value literal `{0}`")]
    BadLiteral(String),
}

impl Value {
    pub fn star() -> Value {
        Value {
            root: Root::Star,
            bits: Vec::new(),
        }
    }

    pub fn eps() -> Value {
        Value {
            root: Root::Eps,
            bits: Vec::new(),
        }
    }

    pub fn new(root: Root, bits: Vec<bool>) -> Value {
        Value { root, bits }
    }

    /// A ground binary string.
    pub fn ground(bits: &[bool]) -> Value {
        Value::new(Root::Eps, bits.to_vec())
    }

    pub fn root(&self) -> Root {
        self.root
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// The value with `bit` appended (the meaning of `s0`/`s1`).
    pub fn push(&self, bit: bool) -> Value {
        let mut bits = self.bits.clone();
        bits.push(bit);
        Value { root: self.root, bits }
    }

    /// Splits off the last appended bit.
    pub fn pop(&self) -> Option<(Value, bool)> {
        let (&last, rest) = self.bits.split_last()?;
        Some((Value::new(self.root, rest.to_vec()), last))
    }

    /// True for the bare `∗`, the least value.
    pub fn is_star(&self) -> bool {
        self.root == Root::Star && self.bits.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.root == Root::Eps
    }

    pub fn gauge(&self) -> usize {
        1 + self.bits.len()
    }

    /// The approximation order `self ⊑ other`.
    pub fn leq(&self, other: &Value) -> bool {
        Suffix::leq(self, other)
    }

    pub fn compatible(&self, other: &Value) -> bool {
        self.leq(other) || other.leq(self)
    }

    /// All values with gauge at most `g`, by increasing gauge.
    pub fn all_up_to_gauge(g: usize) -> Vec<Value> {
        let mut out = Vec::new();
        let mut layer = alloc::vec![Value::star(), Value::eps()];
        for _ in 0..g {
            let next = layer.iter().flat_map(|v| [v.push(false), v.push(true)]).collect();
            out.append(&mut layer);
            layer = next;
        }
        out
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.root {
            Root::Star => "star:",
            Root::Eps => "eps:",
        })?;
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `star:01`, `eps:10`, `*01`, `*`, `eps`, `ε10`.
impl FromStr for Value {
    type Err = ApproxError;

    fn from_str(s: &str) -> Result<Value, ApproxError> {
        let bad = || ApproxError::BadLiteral(s.into());
        let (root, rest) = if let Some(r) = s.strip_prefix("star:") {
            (Root::Star, r)
        } else if let Some(r) = s.strip_prefix("eps:") {
            (Root::Eps, r)
        } else if let Some(r) = s.strip_prefix('*') {
            (Root::Star, r)
        } else if let Some(r) = s.strip_prefix("eps") {
            (Root::Eps, r)
        } else if let Some(r) = s.strip_prefix('ε') {
            (Root::Eps, r)
        } else {
            return Err(bad());
        };
        let bits = rest
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(bad()),
            })
            .collect::<Result<_, _>>()?;
        Ok(Value::new(root, bits))
    }
}

/// An implementation of `⊑`; two are provided so that checks can be run
/// along independent paths.
pub trait ApproxOrder {
    fn leq(v: &Value, w: &Value) -> bool;

    fn compatible(v: &Value, w: &Value) -> bool {
        Self::leq(v, w) || Self::leq(w, v)
    }
}

/// `∗`-rooted values approximate exactly the values ending in their bits;
/// ground values approximate only themselves.
pub struct Suffix;

impl ApproxOrder for Suffix {
    fn leq(v: &Value, w: &Value) -> bool {
        match v.root {
            Root::Star => w.bits.ends_with(&v.bits),
            Root::Eps => v == w,
        }
    }
}

/// The rules `∗ ⊑ w`, `ε ⊑ ε`, and `v ⊑ w ⇒ vb ⊑ wb`, applied literally.
pub struct Inductive;

impl ApproxOrder for Inductive {
    fn leq(v: &Value, w: &Value) -> bool {
        if v.is_star() {
            return true;
        }
        match (v.pop(), w.pop()) {
            (None, None) => v.root == Root::Eps && w.root == Root::Eps,
            (Some((v1, b)), Some((w1, c))) => b == c && Self::leq(&v1, &w1),
            _ => false,
        }
    }
}

/// A tuple of values; its extent is its length.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ValueTuple(pub Vec<Value>);

impl ValueTuple {
    pub fn new(values: Vec<Value>) -> ValueTuple {
        ValueTuple(values)
    }

    pub fn extent(&self) -> usize {
        self.0.len()
    }

    /// Largest component gauge; 0 for the empty tuple.
    pub fn gauge(&self) -> usize {
        self.0.iter().map(Value::gauge).max().unwrap_or(0)
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn leq_with<O: ApproxOrder>(&self, other: &ValueTuple) -> Result<bool, ApproxError> {
        self.same_extent(other)?;
        Ok(self.0.iter().zip(&other.0).all(|(v, w)| O::leq(v, w)))
    }

    pub fn leq(&self, other: &ValueTuple) -> Result<bool, ApproxError> {
        self.leq_with::<Suffix>(other)
    }

    pub fn compatible_with<O: ApproxOrder>(&self, other: &ValueTuple) -> Result<bool, ApproxError> {
        self.same_extent(other)?;
        Ok(self.0.iter().zip(&other.0).all(|(v, w)| O::compatible(v, w)))
    }

    pub fn compatible(&self, other: &ValueTuple) -> Result<bool, ApproxError> {
        self.compatible_with::<Suffix>(other)
    }

    fn same_extent(&self, other: &ValueTuple) -> Result<(), ApproxError> {
        if self.extent() == other.extent() {
            Ok(())
        } else {
            Err(ApproxError::ExtentMismatch(self.extent(), other.extent()))
        }
    }
}

impl fmt::Display for ValueTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for ValueTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The ⊑-largest element of a set of pairwise compatible values; `∗` for the
/// empty set.
pub fn maxapprx<'a>(values: impl IntoIterator<Item = &'a Value>) -> Result<Value, ApproxError> {
    maxapprx_with::<Suffix>(values)
}

pub fn maxapprx_with<'a, O: ApproxOrder>(values: impl IntoIterator<Item = &'a Value>) -> Result<Value, ApproxError> {
    // Everything below a fixed value forms a chain, so one comparison per
    // element against the running maximum detects any incompatible pair.
    let mut best = Value::star();
    for v in values {
        if O::leq(&best, v) {
            best = v.clone();
        } else if !O::leq(v, &best) {
            return Err(ApproxError::Incompatible(best, v.clone()));
        }
    }
    Ok(best)
}

/// A single entry `args ↦ out` of a finitely generated map.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    args: ValueTuple,
    out: Value,
}

impl Generator {
    pub fn new(args: ValueTuple, out: Value) -> Result<Generator, ApproxError> {
        if out.is_star() {
            return Err(ApproxError::StarOutput);
        }
        Ok(Generator { args, out })
    }

    pub fn args(&self) -> &ValueTuple {
        &self.args
    }

    pub fn out(&self) -> &Value {
        &self.out
    }

    /// `G(v̄, w)`.
    pub fn gauge(&self) -> usize {
        self.args.gauge().max(self.out.gauge())
    }

    pub fn extent(&self) -> usize {
        self.args.extent()
    }

    /// Compatible arguments force compatible outputs.
    pub fn consistent_with_by<O: ApproxOrder>(&self, other: &Generator) -> Result<bool, ApproxError> {
        Ok(!self.args.compatible_with::<O>(&other.args)? || O::compatible(&self.out, &other.out))
    }

    pub fn consistent_with(&self, other: &Generator) -> Result<bool, ApproxError> {
        self.consistent_with_by::<Suffix>(other)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.args, self.out)
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite, pairwise consistent set of generators of one extent. The empty
/// set `⊥` has no fixed extent.
#[derive(Clone, PartialEq, Eq, Default, Hash)]
pub struct ConsistentSet {
    gens: BTreeSet<Generator>,
}

impl ConsistentSet {
    pub const fn empty() -> ConsistentSet {
        ConsistentSet { gens: BTreeSet::new() }
    }

    pub fn validate(gens: impl IntoIterator<Item = Generator>) -> Result<ConsistentSet, ApproxError> {
        let mut set = ConsistentSet::empty();
        for g in gens {
            set = set.insert(g)?;
        }
        Ok(set)
    }

    /// The set with `gen` added; checked against every existing generator.
    pub fn insert(&self, gen: Generator) -> Result<ConsistentSet, ApproxError> {
        if self.gens.contains(&gen) {
            return Ok(self.clone());
        }
        for g in &self.gens {
            if g.extent() != gen.extent() {
                return Err(ApproxError::ExtentMismatch(g.extent(), gen.extent()));
            }
            if !g.consistent_with(&gen)? {
                return Err(ApproxError::Inconsistent(Box::new(g.clone()), Box::new(gen)));
            }
        }
        let mut gens = self.gens.clone();
        gens.insert(gen);
        Ok(ConsistentSet { gens })
    }

    pub fn generators(&self) -> impl Iterator<Item = &Generator> {
        self.gens.iter()
    }

    pub fn contains(&self, gen: &Generator) -> bool {
        self.gens.contains(gen)
    }

    pub fn is_subset(&self, other: &ConsistentSet) -> bool {
        self.gens.is_subset(&other.gens)
    }

    /// `#f̂`.
    pub fn width(&self) -> usize {
        self.gens.len()
    }

    pub fn gauge(&self) -> usize {
        self.gens.iter().map(Generator::gauge).max().unwrap_or(0)
    }

    /// Extent of the generators; `None` for `⊥`.
    pub fn extent(&self) -> Option<usize> {
        self.gens.iter().next().map(Generator::extent)
    }

    /// `f̂(x̄)`: the largest output among generators whose arguments
    /// approximate `x̄`.
    pub fn apply(&self, x: &ValueTuple) -> Value {
        self.apply_with::<Suffix>(x)
    }

    pub fn apply_with<O: ApproxOrder>(&self, x: &ValueTuple) -> Value {
        let outs = self
            .gens
            .iter()
            .filter(|g| g.args.leq_with::<O>(x).unwrap_or(false))
            .map(|g| &g.out);
        // Consistency makes the candidate outputs pairwise compatible.
        maxapprx_with::<O>(outs).unwrap_or_else(|_| Value::star())
    }
}

impl fmt::Debug for ConsistentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.gens).finish()
    }
}
