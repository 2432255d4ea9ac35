//! Structured-text serialization of automata.
//!
//! The JSON schema is stable and round-trips bit-exactly:
//!
//! ```json
//! {
//!   "alphabet": [["-3","2"], ["0","4"]],
//!   "states": 3,
//!   "start": 0,
//!   "finals": [2],
//!   "transitions": [[0, 1, 2], ...]
//! }
//! ```
//!
//! Letter entries are decimal strings so that arbitrary-precision entries
//! survive. The reserved separator serializes as the string `"$"`.

use crate::automaton::{Alphabet, Dfa, Sym};
use crate::digits::Letter;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SymRepr {
    Sep(String),
    Letter(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfaRepr {
    alphabet: Vec<SymRepr>,
    states: usize,
    start: usize,
    finals: Vec<usize>,
    transitions: Vec<(usize, usize, usize)>,
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid automaton document: {0}")]
    Invalid(String),
}

pub fn dfa_to_repr(dfa: &Dfa) -> DfaRepr {
    let alphabet = dfa
        .alphabet()
        .syms()
        .iter()
        .map(|s| match s {
            Sym::Sep => SymRepr::Sep("$".to_string()),
            Sym::Letter(l) => SymRepr::Letter(l.0.iter().map(|e| e.to_string()).collect()),
        })
        .collect();
    let mut transitions = Vec::new();
    for q in 0..dfa.num_states() {
        for a in 0..dfa.alphabet().len() {
            transitions.push((q, a, dfa.step(q, a)));
        }
    }
    DfaRepr {
        alphabet,
        states: dfa.num_states(),
        start: dfa.start(),
        finals: dfa.finals().collect(),
        transitions,
    }
}

pub fn dfa_to_json(dfa: &Dfa) -> String {
    serde_json::to_string_pretty(&dfa_to_repr(dfa)).expect("serializable")
}

pub fn repr_to_dfa(repr: &DfaRepr) -> Result<Dfa, IoError> {
    let mut dim: Option<usize> = None;
    let mut syms = Vec::new();
    for s in &repr.alphabet {
        match s {
            SymRepr::Sep(t) if t == "$" => syms.push(Sym::Sep),
            SymRepr::Sep(t) => return Err(IoError::Invalid(format!("unknown symbol {t:?}"))),
            SymRepr::Letter(entries) => {
                let parsed: Result<Vec<BigInt>, _> = entries.iter().map(|e| BigInt::from_str(e)).collect();
                let l = Letter(parsed.map_err(|e| IoError::Invalid(e.to_string()))?);
                match dim {
                    None => dim = Some(l.dim()),
                    Some(d) if d == l.dim() => {}
                    Some(d) => {
                        return Err(IoError::Invalid(format!(
                            "letter dimension {} differs from {}",
                            l.dim(),
                            d
                        )))
                    }
                }
                syms.push(Sym::Letter(l));
            }
        }
    }
    let alphabet = Alphabet::new(dim.unwrap_or(1), syms);
    if alphabet.len() != repr.alphabet.len() {
        return Err(IoError::Invalid("duplicate alphabet symbols".into()));
    }
    let n = repr.states;
    if repr.start >= n {
        return Err(IoError::Invalid("start state out of range".into()));
    }
    let mut delta = vec![vec![usize::MAX; alphabet.len()]; n];
    for &(q, a, t) in &repr.transitions {
        if q >= n || t >= n || a >= alphabet.len() {
            return Err(IoError::Invalid(format!("transition ({q},{a},{t}) out of range")));
        }
        if delta[q][a] != usize::MAX {
            return Err(IoError::Invalid(format!("duplicate transition for ({q},{a})")));
        }
        delta[q][a] = t;
    }
    for (q, row) in delta.iter().enumerate() {
        for (a, &t) in row.iter().enumerate() {
            if t == usize::MAX {
                return Err(IoError::Invalid(format!("missing transition for ({q},{a})")));
            }
        }
    }
    let mut finals = vec![false; n];
    for &f in &repr.finals {
        if f >= n {
            return Err(IoError::Invalid("final state out of range".into()));
        }
        finals[f] = true;
    }
    Ok(Dfa::new(alphabet, delta, repr.start, finals))
}

pub fn dfa_from_json(text: &str) -> Result<Dfa, IoError> {
    let repr: DfaRepr = serde_json::from_str(text)?;
    repr_to_dfa(&repr)
}

/// GraphViz DOT rendering: doubled circles for finals, labeled edges.
pub fn dfa_to_dot(dfa: &Dfa, name: &str) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "digraph {name} {{").unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  hidden_start [shape=point, style=invis];").unwrap();
    for q in 0..dfa.num_states() {
        let shape = if dfa.is_final(q) { "doublecircle" } else { "circle" };
        writeln!(out, "  q{q} [shape={shape}, label=\"{q}\"];").unwrap();
    }
    writeln!(out, "  hidden_start -> q{};", dfa.start()).unwrap();
    // Group parallel edges into one label.
    for q in 0..dfa.num_states() {
        let mut by_target: std::collections::BTreeMap<usize, Vec<String>> = std::collections::BTreeMap::new();
        for a in 0..dfa.alphabet().len() {
            by_target
                .entry(dfa.step(q, a))
                .or_default()
                .push(dfa.alphabet().sym(a).to_string());
        }
        for (t, labels) in by_target {
            writeln!(out, "  q{q} -> q{t} [label=\"{}\"];", labels.join(",")).unwrap();
        }
    }
    writeln!(out, "}}").unwrap();
    out
}
