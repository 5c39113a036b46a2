//! Text formats: theory files, derivation files, frame dumps and
//! assignment files.
//!
//! A theory declares function symbols and axioms as s-expressions:
//!
//! ```text
//! (fun d 1)
//! (axiom d.eps  (d eps)     eps)
//! (axiom d.zero (d (s0 x))  (s0 (s0 (d x))))
//! ```
//!
//! Derivations use `(axiom ID ((VAR TERM) ...))`, `(refl T)`, `(sym D)`,
//! `(trans D D)`, `(compat T VAR D)` and `(subst T VAR D)`. Frames hold one
//! generator per line (`d (eps:) -> eps:`), assignments one binding per line
//! (`x = eps:0`).

use std::fmt;

use pets_core::approx::{Generator, Value, ValueTuple};
use pets_core::axioms::{validate_nice, AxiomError, AxiomId, NiceAxiomSet};
use pets_core::derivation::{Derivation, DerivationError};
use pets_core::frame::{Assignment, Frame, FrameError, Update};
use pets_core::sexp::{self, Pos, Sexp};
use pets_core::syntax::{is_identifier, term_from_sexp, Equation, Signature, SyntaxError, Term, Var};

/// A malformed input, located when possible.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{}{message}", location(.line, .col))]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

fn location(line: &usize, col: &usize) -> String {
    match (line, col) {
        (0, _) => String::new(),
        (l, 0) => format!("line {l}: "),
        (l, c) => format!("{l}:{c}: "),
    }
}

impl ParseError {
    fn at(pos: Pos, message: impl Into<String>) -> ParseError {
        ParseError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }

    fn line(line: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line,
            col: 0,
            message: message.into(),
        }
    }
}

impl From<SyntaxError> for ParseError {
    fn from(e: SyntaxError) -> ParseError {
        ParseError {
            line: 0,
            col: 0,
            message: e.to_string(),
        }
    }
}

impl From<sexp::SexpError> for ParseError {
    fn from(e: sexp::SexpError) -> ParseError {
        SyntaxError::from(e).into()
    }
}

/// A signature together with its validated axioms.
#[derive(Clone, Debug)]
pub struct Theory {
    pub signature: Signature,
    pub axioms: NiceAxiomSet,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TheoryError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Niceness(#[from] AxiomError),
}

fn list<'a>(e: &'a Sexp, what: &str) -> Result<&'a [Sexp], ParseError> {
    e.as_list()
        .ok_or_else(|| ParseError::at(e.pos(), format!("expected {what}")))
}

fn atom<'a>(e: &'a Sexp, what: &str) -> Result<&'a str, ParseError> {
    e.as_atom()
        .ok_or_else(|| ParseError::at(e.pos(), format!("expected {what}")))
}

fn arity_error(e: &Sexp, form: &str, expected: usize) -> ParseError {
    ParseError::at(e.pos(), format!("`{form}` takes {expected} argument(s)"))
}

pub fn parse_theory(text: &str) -> Result<Theory, TheoryError> {
    let items = sexp::parse_many(text).map_err(ParseError::from)?;
    let mut signature = Signature::new();
    let mut raw = Vec::new();
    for item in &items {
        let parts = list(item, "`(fun ...)` or `(axiom ...)`")?;
        match parts.first().and_then(Sexp::as_atom) {
            Some("fun") => {
                let [_, name, arity] = parts else {
                    return Err(arity_error(item, "fun", 2).into());
                };
                let name = atom(name, "a symbol name")?;
                let arity: usize = atom(arity, "an arity")?
                    .parse()
                    .map_err(|_| ParseError::at(parts[2].pos(), "arity must be a natural number"))?;
                signature
                    .declare(name, arity)
                    .map_err(|e| ParseError::at(item.pos(), e.to_string()))?;
            }
            Some("axiom") => {
                let [_, id, lhs, rhs] = parts else {
                    return Err(arity_error(item, "axiom", 3).into());
                };
                raw.push((atom(id, "an axiom id")?, lhs, rhs));
            }
            _ => return Err(ParseError::at(item.pos(), "expected `(fun ...)` or `(axiom ...)`").into()),
        }
    }
    let mut axioms = Vec::new();
    for (id, lhs, rhs) in raw {
        let side = |e: &Sexp| term_from_sexp(&signature, e).map_err(|err| ParseError::at(e.pos(), err.to_string()));
        let eq = Equation::new(side(lhs)?, side(rhs)?);
        axioms.push((AxiomId::new(id), eq));
    }
    Ok(Theory {
        axioms: validate_nice(axioms)?,
        signature,
    })
}

/// Prints a theory in the format [`parse_theory`] reads.
pub fn print_theory(theory: &Theory) -> String {
    let mut out = String::new();
    for f in theory.signature.defined() {
        out.push_str(&format!("(fun {} {})\n", f.name(), f.arity()));
    }
    for a in theory.axioms.iter() {
        out.push_str(&format!("(axiom {} {} {})\n", a.id, a.lhs(), a.rhs()));
    }
    out
}

pub fn parse_term(theory: &Theory, text: &str) -> Result<Term, ParseError> {
    Ok(theory.signature.parse_term(text)?)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DerivationFileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    /// Well-formed text that names an unknown axiom or axiom variable.
    #[error(transparent)]
    Rejected(#[from] DerivationError),
}

pub fn parse_derivation(theory: &Theory, text: &str) -> Result<Derivation, DerivationFileError> {
    let e = sexp::parse_one(text).map_err(ParseError::from)?;
    derivation_from_sexp(theory, &e)
}

fn var_from_sexp(theory: &Theory, e: &Sexp) -> Result<Var, ParseError> {
    let name = atom(e, "a variable")?;
    if !is_identifier(name) || theory.signature.lookup(name).is_some() || name == "eps" {
        return Err(ParseError::at(e.pos(), format!("`{name}` is not a variable")));
    }
    Ok(Var::new(name))
}

fn derivation_from_sexp(theory: &Theory, e: &Sexp) -> Result<Derivation, DerivationFileError> {
    let parts = list(e, "a derivation")?;
    let rule = parts.first().and_then(Sexp::as_atom).unwrap_or("");
    let sig = &theory.signature;
    let expect = |n: usize| {
        if parts.len() == n + 1 {
            Ok(())
        } else {
            Err(arity_error(e, rule, n))
        }
    };
    let sub = |i: usize| derivation_from_sexp(theory, &parts[i]);
    Ok(match rule {
        "axiom" => {
            expect(2)?;
            let id = AxiomId::new(atom(&parts[1], "an axiom id")?);
            let mut pairs = Vec::new();
            for pair in list(&parts[2], "a list of `(var term)` pairs")? {
                let [x, t] = list(pair, "a `(var term)` pair")? else {
                    return Err(ParseError::at(pair.pos(), "expected a `(var term)` pair").into());
                };
                pairs.push((
                    var_from_sexp(theory, x)?,
                    term_from_sexp(sig, t).map_err(ParseError::from)?,
                ));
            }
            Derivation::axiom(&theory.axioms, &id, pairs)?
        }
        "refl" => {
            expect(1)?;
            Derivation::refl(term_from_sexp(sig, &parts[1]).map_err(ParseError::from)?)
        }
        "sym" => {
            expect(1)?;
            Derivation::sym(sub(1)?)
        }
        "trans" => {
            expect(2)?;
            Derivation::trans(sub(1)?, sub(2)?)
        }
        "compat" | "subst" => {
            expect(3)?;
            let t = term_from_sexp(sig, &parts[1]).map_err(ParseError::from)?;
            let x = var_from_sexp(theory, &parts[2])?;
            let d = sub(3)?;
            if rule == "compat" {
                Derivation::compat(t, x, d)
            } else {
                Derivation::subst(t, x, d)
            }
        }
        _ => return Err(ParseError::at(e.pos(), "expected one of axiom, refl, sym, trans, compat, subst").into()),
    })
}

pub fn parse_value(text: &str) -> Result<Value, ParseError> {
    text.trim()
        .parse()
        .map_err(|e: pets_core::approx::ApproxError| ParseError::line(0, e.to_string()))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split(['#', ';']).next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FrameFileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: {source}")]
    Inconsistent { line: usize, source: FrameError },
}

/// Reads lines `f (v1 v2 ...) -> w`.
pub fn parse_frame(theory: &Theory, text: &str) -> Result<Frame, FrameFileError> {
    let mut frame = Frame::new();
    for (n, line) in content_lines(text) {
        let bad = |m: &str| ParseError::line(n, m.to_string());
        let (lhs, out) = line
            .split_once("->")
            .ok_or_else(|| bad("expected `f (args) -> value`"))?;
        let (name, args) = lhs
            .trim()
            .split_once('(')
            .ok_or_else(|| bad("expected `(` before arguments"))?;
        let args = args
            .trim()
            .strip_suffix(')')
            .ok_or_else(|| bad("expected `)` after arguments"))?;
        let name = name.trim();
        let symbol = theory
            .signature
            .lookup(name)
            .filter(|s| !s.is_basic())
            .ok_or_else(|| bad(&format!("unknown function symbol `{name}`")))?;
        let values = args
            .split_whitespace()
            .map(parse_value)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(&e.message))?;
        let out = parse_value(out).map_err(|e| bad(&e.message))?;
        let gen = Generator::new(ValueTuple::new(values), out).map_err(|e| bad(&e.to_string()))?;
        frame = frame
            .apply_update(&Update::new(symbol, gen))
            .map_err(|source| FrameFileError::Inconsistent { line: n, source })?;
    }
    Ok(frame)
}

/// Reads lines `x = value`.
pub fn parse_assignment(text: &str) -> Result<Assignment, ParseError> {
    let mut rho = Assignment::new();
    for (n, line) in content_lines(text) {
        let (x, v) = line
            .split_once('=')
            .ok_or_else(|| ParseError::line(n, "expected `variable = value`"))?;
        let x = x.trim();
        if !is_identifier(x) {
            return Err(ParseError::line(n, format!("`{x}` is not a variable")));
        }
        let v = parse_value(v).map_err(|e| ParseError::line(n, e.message))?;
        rho.set(Var::new(x), v);
    }
    Ok(rho)
}

/// Wraps a displayable value so that it prints with one item per line.
pub struct Lines<'a, T>(pub &'a [T]);

impl<T: fmt::Display> fmt::Display for Lines<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in self.0 {
            writeln!(f, "{item}")?;
        }
        Ok(())
    }
}
