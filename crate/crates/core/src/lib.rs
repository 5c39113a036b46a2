//! Kernel for pure equational theories with substitution over nice axiom
//! systems.
//!
//! The crate checks derivations, normalizes them into Variable Normal Form,
//! and certifies them with an approximation semantics: terms are evaluated
//! in finite frames over binary strings extended with an unknown value `*`,
//! and a derivation of `t = u` is replayed as a sequence of instructions that
//! grows a frame until `[[t]] ⊑ [[u]]` (and symmetrically) can be observed.
//!
//! Everything here is `no_std` + `alloc`; file formats, JSON output and the
//! command-line tool live in the companion `pets` crate.

#![no_std]
#![warn(rust_2018_idioms, unused_qualifications)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod approx;
pub mod axioms;
pub mod certifier;
pub mod derivation;
pub mod frame;
pub mod instructions;
pub mod oracle;
pub mod sexp;
pub mod syntax;

#[cfg(test)]
pub(crate) mod fixtures;

pub use approx::{ConsistentSet, Generator, Value, ValueTuple};
pub use axioms::{Axiom, AxiomId, NiceAxiomSet};
pub use certifier::{certify, Certificate};
pub use derivation::Derivation;
pub use frame::{Assignment, Frame, Update, UpdateSeq};
pub use instructions::Instruction;
pub use syntax::{Equation, Signature, Symbol, Term, Var};
