//! Automatic subsets of Z^m represented by finite automata over signed-digit
//! alphabets, classified for sparsity, genericity, and additive stability,
//! with machine-checkable certificates.
//!
//! The crate is organized bottom-up:
//!
//! - [`digits`]: words over integer-tuple letters, least significant digit
//!   first, canonical representations, word combinators.
//! - [`automaton`]: total DFAs/NFAs and their decision procedures.
//! - [`sparsity`]: polynomial- vs exponential-growth classification with
//!   constructive decompositions and witnesses.
//! - [`suffixes`]: forbidden-suffix analysis behind genericity decisions.
//! - [`autoset`]: value-closed automatic sets and their algebra.
//! - [`fsets`]: symbolic cycle-set building blocks and their automata.
//! - [`presburger`]: eventually-periodic exponent predicates and the
//!   order-elimination rewriter producing ladders.
//! - [`classify`]: the end-to-end stability classifier with verdicts.
//! - [`corpus`]: curated example sets with expected classifications.
//! - [`io`]: JSON and DOT serialization of automata.

pub mod automaton;
pub mod classify;
pub mod corpus;
pub mod autoset;
pub mod digits;
pub mod fsets;
pub mod io;
pub mod presburger;
pub mod sparsity;
pub mod suffixes;

pub use automaton::{Alphabet, AutomatonError, Dfa, Nfa, Sym};
pub use digits::{add_fixed_length, canonical_rep, canonical_rep_scalar, Base, DigitError, Letter, Word};
