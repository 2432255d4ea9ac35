//! Eventually-periodic descriptions of pumped-word membership, and the
//! quantifier-free rewriter that eliminates order atoms from stable
//! formulas or produces an explicit ladder.
//!
//! The key observation is that `delta(q, sigma^t)` is eventually cyclic in
//! t, so membership of `sigma_1^{t_1} ... sigma_n^{t_n}` is a finite union
//! of per-variable constraints "t = c" or "t >= N and t = c (mod mu)". The
//! rewriter then works over formulas whose atoms are congruences,
//! constants, successor links `S^e x_i = x_j`, and (to be eliminated)
//! order atoms `S^e x_i < x_j`.

use crate::automaton::Dfa;
use crate::digits::Letter;
use num_integer::Integer;
use std::collections::BTreeMap;
use std::fmt;

// ---------------------------------------------------------------------------
// Reach profiles and exponent predicates
// ---------------------------------------------------------------------------

/// Eventual cyclicity of t -> delta(q, sigma^t): states for t < threshold,
/// then a cycle of length `period`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachProfile {
    pub threshold: usize,
    pub period: usize,
    /// delta(q, sigma^t) for t = 0 .. threshold-1.
    pub prefix: Vec<usize>,
    /// delta(q, sigma^(threshold + j)) for j = 0 .. period-1.
    pub cycle: Vec<usize>,
}

impl ReachProfile {
    pub fn state_at(&self, t: usize) -> usize {
        if t < self.threshold {
            self.prefix[t]
        } else {
            self.cycle[(t - self.threshold) % self.period]
        }
    }
}

/// Simulates delta(q, sigma^t) until a repeat; minimal threshold and period.
pub fn reach_profile(dfa: &Dfa, q: usize, sigma: &[usize]) -> ReachProfile {
    assert!(!sigma.is_empty(), "reach_profile requires a nonempty word");
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    let mut states = Vec::new();
    let mut cur = q;
    loop {
        if let Some(&first) = seen.get(&cur) {
            let prefix = states[..first].to_vec();
            let cycle = states[first..].to_vec();
            return ReachProfile { threshold: first, period: cycle.len(), prefix, cycle };
        }
        seen.insert(cur, states.len());
        states.push(cur);
        cur = dfa.run(cur, sigma);
    }
}

/// Per-variable constraint of an exponent box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarConstraint {
    Eq(u64),
    /// t >= min and t = residue (mod modulus).
    Periodic { min: u64, residue: u64, modulus: u64 },
}

impl VarConstraint {
    pub fn holds(&self, t: u64) -> bool {
        match self {
            VarConstraint::Eq(c) => t == *c,
            VarConstraint::Periodic { min, residue, modulus } => {
                t >= *min && t % modulus == *residue
            }
        }
    }
}

/// A finite union of constraint boxes, one constraint per variable; the
/// `modulus` field is the lcm of all periodic moduli.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentPredicate {
    pub num_vars: usize,
    pub modulus: u64,
    pub boxes: Vec<Vec<VarConstraint>>,
}

impl ExponentPredicate {
    pub fn eval(&self, t: &[u64]) -> bool {
        assert_eq!(t.len(), self.num_vars);
        self.boxes
            .iter()
            .any(|b| b.iter().zip(t).all(|(c, &v)| c.holds(v)))
    }
}

/// An automaton abstraction for the pumped-word recursion: states need
/// only be stepped by whole registered words and tested for acceptance.
/// This lets the same recursion run both on explicit DFAs and on lazily
/// driven machines (e.g. the bounded-carry value machine under letters
/// outside the concrete alphabet).
pub trait PoweredWords {
    type State: Ord + Clone;
    fn initial(&self) -> Self::State;
    fn apply(&self, state: &Self::State, word: usize) -> Self::State;
    fn accepting(&self, state: &Self::State) -> bool;
    fn num_words(&self) -> usize;
}

struct DfaWords<'a> {
    dfa: &'a Dfa,
    words: &'a [Vec<usize>],
}

impl<'a> PoweredWords for DfaWords<'a> {
    type State = usize;
    fn initial(&self) -> usize {
        self.dfa.start()
    }
    fn apply(&self, state: &usize, word: usize) -> usize {
        self.dfa.run(*state, &self.words[word])
    }
    fn accepting(&self, state: &usize) -> bool {
        self.dfa.is_final(*state)
    }
    fn num_words(&self) -> usize {
        self.words.len()
    }
}

/// Eventual cyclicity of t -> apply^t(state) under one registered word.
fn machine_profile<M: PoweredWords>(m: &M, state: &M::State, word: usize) -> (usize, usize, Vec<M::State>) {
    let mut seen: BTreeMap<M::State, usize> = BTreeMap::new();
    let mut states = Vec::new();
    let mut cur = state.clone();
    loop {
        if let Some(&first) = seen.get(&cur) {
            return (first, states.len() - first, states);
        }
        seen.insert(cur.clone(), states.len());
        states.push(cur.clone());
        cur = m.apply(&cur, word);
    }
}

/// The pumped-word recursion over an abstract machine.
pub fn power_membership_over<M: PoweredWords>(machine: &M) -> ExponentPredicate {
    fn rec<M: PoweredWords>(
        machine: &M,
        idx: usize,
        state: &M::State,
        memo: &mut BTreeMap<(usize, M::State), Vec<Vec<VarConstraint>>>,
    ) -> Vec<Vec<VarConstraint>> {
        if idx == machine.num_words() {
            return if machine.accepting(state) { vec![Vec::new()] } else { Vec::new() };
        }
        if let Some(hit) = memo.get(&(idx, state.clone())) {
            return hit.clone();
        }
        let (threshold, period, states) = machine_profile(machine, state, idx);
        let mut boxes = Vec::new();
        for (t, st) in states.iter().enumerate() {
            let sub = rec(machine, idx + 1, st, memo);
            let constraint = if t < threshold {
                VarConstraint::Eq(t as u64)
            } else {
                VarConstraint::Periodic {
                    min: threshold as u64,
                    residue: (t % period) as u64,
                    modulus: period as u64,
                }
            };
            for mut b in sub {
                b.insert(0, constraint.clone());
                boxes.push(b);
            }
        }
        memo.insert((idx, state.clone()), boxes.clone());
        boxes
    }

    let mut memo = BTreeMap::new();
    let boxes = rec(machine, 0, &machine.initial(), &mut memo);
    let modulus = boxes
        .iter()
        .flatten()
        .filter_map(|c| match c {
            VarConstraint::Periodic { modulus, .. } => Some(*modulus),
            _ => None,
        })
        .fold(1u64, num_integer::lcm);
    ExponentPredicate { num_vars: machine.num_words(), modulus, boxes }
}

/// Membership predicate for sigma_1^{t_1} ... sigma_n^{t_n} in L(dfa),
/// by the eventually-cyclic recursion over the words.
pub fn power_membership(dfa: &Dfa, words: &[Vec<usize>]) -> ExponentPredicate {
    for w in words {
        assert!(!w.is_empty(), "pumped words must be nonempty");
    }
    power_membership_over(&DfaWords { dfa, words })
}

// ---------------------------------------------------------------------------
// Padded multi-track membership
// ---------------------------------------------------------------------------

/// Linear expression over the flattened exponent variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinExpr {
    pub coeffs: Vec<i64>,
    pub constant: i64,
}

impl LinExpr {
    fn zero(n: usize) -> LinExpr {
        LinExpr { coeffs: vec![0; n], constant: 0 }
    }

    fn var(n: usize, v: usize) -> LinExpr {
        let mut e = LinExpr::zero(n);
        e.coeffs[v] = 1;
        e
    }

    fn add(&self, other: &LinExpr) -> LinExpr {
        LinExpr {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
            constant: self.constant + other.constant,
        }
    }

    fn sub(&self, other: &LinExpr) -> LinExpr {
        LinExpr {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
            constant: self.constant - other.constant,
        }
    }

    fn sub_const(&self, c: i64) -> LinExpr {
        LinExpr { coeffs: self.coeffs.clone(), constant: self.constant - c }
    }

    pub fn eval(&self, vals: &[u64]) -> i128 {
        let mut acc = self.constant as i128;
        for (c, &v) in self.coeffs.iter().zip(vals) {
            acc += *c as i128 * v as i128;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PadAtom {
    EqZero(LinExpr),
    GeqZero(LinExpr),
    ModEq { expr: LinExpr, modulus: u64, residue: u64 },
}

impl PadAtom {
    pub fn holds(&self, vals: &[u64]) -> bool {
        match self {
            PadAtom::EqZero(e) => e.eval(vals) == 0,
            PadAtom::GeqZero(e) => e.eval(vals) >= 0,
            PadAtom::ModEq { expr, modulus, residue } => {
                expr.eval(vals).rem_euclid(*modulus as i128) == *residue as i128
            }
        }
    }
}

/// Positive Boolean combinations of linear atoms: the shape produced by the
/// padded recursion (disjunction over block orders, conjunction of block
/// constraints).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PadFormula {
    Const(bool),
    Atom(PadAtom),
    And(Vec<PadFormula>),
    Or(Vec<PadFormula>),
}

impl PadFormula {
    pub fn eval(&self, vals: &[u64]) -> bool {
        match self {
            PadFormula::Const(b) => *b,
            PadFormula::Atom(a) => a.holds(vals),
            PadFormula::And(fs) => fs.iter().all(|f| f.eval(vals)),
            PadFormula::Or(fs) => fs.iter().any(|f| f.eval(vals)),
        }
    }
}

/// Membership of the right-zero-padded synchronization of per-track pumped
/// words in L(dfa).
///
/// Track i carries the pattern `l_{i1}^{k_{i1}} ... l_{i n_i}^{k_{i n_i}}`
/// of scalar letters; all tracks are padded with zeros to the length of the
/// longest. Variables are flattened track-major. The recursion consumes
/// synchronized blocks up to the next pattern-element boundary, branching
/// on which track's element finishes first; the reached state is eventually
/// cyclic in the block length, giving linear constraints over prefix sums.
pub fn padded_power_membership(dfa: &Dfa, patterns: &[Vec<Letter>]) -> PadFormula {
    let m = patterns.len();
    assert_eq!(dfa.alphabet().dim(), m, "one track per dimension");
    let num_vars: usize = patterns.iter().map(|p| p.len()).sum();
    let offsets: Vec<usize> = patterns
        .iter()
        .scan(0usize, |acc, p| {
            let o = *acc;
            *acc += p.len();
            Some(o)
        })
        .collect();

    // Prefix sums K_{ij} as linear expressions; K_{i,0} = 0.
    let prefix_sum = |i: usize, j: usize| -> LinExpr {
        let mut e = LinExpr::zero(num_vars);
        for jj in 0..j {
            e = e.add(&LinExpr::var(num_vars, offsets[i] + jj));
        }
        e
    };

    struct Ctx<'a> {
        dfa: &'a Dfa,
        patterns: &'a [Vec<Letter>],
    }

    fn block_letter(ctx: &Ctx, pointers: &[usize]) -> Option<usize> {
        let entries: Vec<num_bigint::BigInt> = ctx
            .patterns
            .iter()
            .zip(pointers)
            .map(|(p, &ptr)| {
                if ptr < p.len() {
                    p[ptr].0[0].clone()
                } else {
                    num_bigint::BigInt::from(0)
                }
            })
            .collect();
        ctx.dfa.alphabet().index_of_letter(&Letter(entries))
    }

    // Recursion: current automaton state, per-track pointer (elements fully
    // consumed), and the symbolic total consumed length T.
    fn rec(
        ctx: &Ctx,
        q: usize,
        pointers: &[usize],
        t_expr: &LinExpr,
        prefix_sum: &dyn Fn(usize, usize) -> LinExpr,
    ) -> PadFormula {
        let active: Vec<usize> = (0..ctx.patterns.len())
            .filter(|&i| pointers[i] < ctx.patterns[i].len())
            .collect();
        if active.is_empty() {
            return PadFormula::Const(ctx.dfa.is_final(q));
        }
        let letter_idx = match block_letter(ctx, pointers) {
            Some(i) => i,
            None => return PadFormula::Const(false),
        };
        let profile = reach_profile(ctx.dfa, q, &[letter_idx]);
        let mut disjuncts = Vec::new();
        for &winner in &active {
            // Block length Delta = K_{winner, p+1} - T; the winner finishes
            // no later than any other active track.
            let end = prefix_sum(winner, pointers[winner] + 1);
            let delta = end.sub(t_expr);
            let mut guards = vec![PadFormula::Atom(PadAtom::GeqZero(delta.clone()))];
            for &other in &active {
                if other != winner {
                    let other_end = prefix_sum(other, pointers[other] + 1);
                    guards.push(PadFormula::Atom(PadAtom::GeqZero(other_end.sub(&end))));
                }
            }
            let mut next_pointers = pointers.to_vec();
            next_pointers[winner] += 1;
            // Branch on the profile class of Delta.
            let mut cases = Vec::new();
            for t in 0..profile.threshold {
                let sub = rec(ctx, profile.prefix[t], &next_pointers, &end, prefix_sum);
                cases.push(PadFormula::And(vec![
                    PadFormula::Atom(PadAtom::EqZero(delta.sub_const(t as i64))),
                    sub,
                ]));
            }
            for j in 0..profile.period {
                let sub = rec(ctx, profile.cycle[j], &next_pointers, &end, prefix_sum);
                cases.push(PadFormula::And(vec![
                    PadFormula::Atom(PadAtom::GeqZero(delta.sub_const(profile.threshold as i64))),
                    PadFormula::Atom(PadAtom::ModEq {
                        expr: delta.clone(),
                        modulus: profile.period as u64,
                        residue: ((profile.threshold + j) % profile.period) as u64,
                    }),
                    sub,
                ]));
            }
            let mut conj = guards;
            conj.push(PadFormula::Or(cases));
            disjuncts.push(PadFormula::And(conj));
        }
        PadFormula::Or(disjuncts)
    }

    let ctx = Ctx { dfa, patterns };
    let pointers = vec![0usize; m];
    rec(&ctx, dfa.start(), &pointers, &LinExpr::zero(num_vars), &prefix_sum)
}

// ---------------------------------------------------------------------------
// Powers relation
// ---------------------------------------------------------------------------

/// The relation {(k_1..k_n) : (d^{k_1},..,d^{k_n}) in X}, as a disjunction
/// over exponent orderings of box predicates on consecutive differences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowersPredicate {
    /// (permutation f, predicate over (k_{f(0)}, k_{f(1)}-k_{f(0)}, ...)).
    pub orderings: Vec<(Vec<usize>, ExponentPredicate)>,
}

impl PowersPredicate {
    pub fn eval(&self, k: &[u64]) -> bool {
        self.orderings.iter().any(|(f, pred)| {
            let mut diffs = Vec::with_capacity(f.len());
            let mut prev: Option<u64> = None;
            for &v in f.iter().map(|&i| &k[i]) {
                match prev {
                    None => diffs.push(v),
                    Some(p) => {
                        if v < p {
                            return false;
                        }
                        diffs.push(v - p);
                    }
                }
                prev = Some(v);
            }
            pred.eval(&diffs)
        })
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &out {
            for v in 0..n {
                if !p.contains(&v) {
                    let mut p2 = p.clone();
                    p2.push(v);
                    next.push(p2);
                }
            }
        }
        out = next;
    }
    out
}

/// Builds the powers relation of a value-closed set X ⊆ N^n. The caller
/// provides the recognizer of (X ∩ N_{>0}^n) - 1 over the signed alphabet;
/// the column letters have entries 0 or d-1 only, hence lie within it.
pub fn powers_relation_from_shifted(shifted: &Dfa, base: crate::digits::Base, n: usize) -> PowersPredicate {
    let d1 = num_bigint::BigInt::from(base.get() - 1);
    let mut orderings = Vec::new();
    for f in permutations(n) {
        // Column i (i = 1..n): d-1 in the coordinates still running, i.e.
        // those with position >= i-1 in the ordering.
        let mut words = Vec::new();
        for i in 0..n {
            let mut entries = vec![num_bigint::BigInt::from(0); n];
            for (pos, &coord) in f.iter().enumerate() {
                if pos >= i {
                    entries[coord] = d1.clone();
                }
            }
            let letter = Letter(entries);
            let idx = shifted
                .alphabet()
                .index_of_letter(&letter)
                .expect("column letters are standard");
            words.push(vec![idx]);
        }
        let pred = power_membership(shifted, &words);
        orderings.push((f, pred));
    }
    PowersPredicate { orderings }
}

// ---------------------------------------------------------------------------
// L_delta formulas and the rewriter
// ---------------------------------------------------------------------------

/// Atoms of the successor-with-divisibility language, with or without
/// order. Offsets/constants are normalized to the four listed shapes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LAtom {
    /// x_var = residue (mod modulus)
    Mod { var: usize, modulus: u64, residue: u64 },
    /// x_var = value
    EqConst { var: usize, value: u64 },
    /// S^offset x_lhs = x_rhs, i.e. x_lhs + offset = x_rhs
    Link { lhs: usize, offset: u64, rhs: usize },
    /// S^offset x_lhs < x_rhs, i.e. x_lhs + offset < x_rhs
    Less { lhs: usize, offset: u64, rhs: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LFormula {
    Const(bool),
    Atom(LAtom),
    Not(Box<LFormula>),
    And(Vec<LFormula>),
    Or(Vec<LFormula>),
}

impl LFormula {
    pub fn atom(a: LAtom) -> LFormula {
        LFormula::Atom(a)
    }

    pub fn not(f: LFormula) -> LFormula {
        LFormula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<LFormula>) -> LFormula {
        LFormula::And(fs)
    }

    pub fn or(fs: Vec<LFormula>) -> LFormula {
        LFormula::Or(fs)
    }

    /// Normalizing constructor: S^e x_i < K as a disjunction of equalities.
    pub fn term_lt_const(e: u64, var: usize, k: u64) -> LFormula {
        if k <= e {
            return LFormula::Const(false);
        }
        LFormula::Or((0..k - e).map(|v| LFormula::Atom(LAtom::EqConst { var, value: v })).collect())
    }

    /// Normalizing constructor: S^e x_i = K.
    pub fn term_eq_const(e: u64, var: usize, k: u64) -> LFormula {
        if k < e {
            LFormula::Const(false)
        } else {
            LFormula::Atom(LAtom::EqConst { var, value: k - e })
        }
    }

    /// Normalizing constructor: S^e x_i < S^f x_j.
    pub fn term_lt_term(e: u64, i: usize, f: u64, j: usize) -> LFormula {
        if i == j {
            return LFormula::Const(e < f);
        }
        if e >= f {
            LFormula::Atom(LAtom::Less { lhs: i, offset: e - f, rhs: j })
        } else {
            // x_i < x_j + (f - e)  <=>  not (x_j + (f - e) <= x_i)
            let g = f - e;
            LFormula::not(LFormula::or(vec![
                LFormula::Atom(LAtom::Link { lhs: j, offset: g, rhs: i }),
                LFormula::Atom(LAtom::Less { lhs: j, offset: g, rhs: i }),
            ]))
        }
    }

    /// Normalizing constructor: S^e x_i = S^f x_j.
    pub fn term_eq_term(e: u64, i: usize, f: u64, j: usize) -> LFormula {
        if i == j {
            return LFormula::Const(e == f);
        }
        if e >= f {
            LFormula::Atom(LAtom::Link { lhs: i, offset: e - f, rhs: j })
        } else {
            LFormula::Atom(LAtom::Link { lhs: j, offset: f - e, rhs: i })
        }
    }

    pub fn eval(&self, vals: &[u64]) -> bool {
        match self {
            LFormula::Const(b) => *b,
            LFormula::Atom(a) => match a {
                LAtom::Mod { var, modulus, residue } => vals[*var] % modulus == *residue,
                LAtom::EqConst { var, value } => vals[*var] == *value,
                LAtom::Link { lhs, offset, rhs } => vals[*lhs] + offset == vals[*rhs],
                LAtom::Less { lhs, offset, rhs } => vals[*lhs] + offset < vals[*rhs],
            },
            LFormula::Not(f) => !f.eval(vals),
            LFormula::And(fs) => fs.iter().all(|f| f.eval(vals)),
            LFormula::Or(fs) => fs.iter().any(|f| f.eval(vals)),
        }
    }

    pub fn has_order_atoms(&self) -> bool {
        match self {
            LFormula::Const(_) => false,
            LFormula::Atom(a) => matches!(a, LAtom::Less { .. }),
            LFormula::Not(f) => f.has_order_atoms(),
            LFormula::And(fs) | LFormula::Or(fs) => fs.iter().any(|f| f.has_order_atoms()),
        }
    }

    fn visit_atoms(&self, f: &mut dyn FnMut(&LAtom)) {
        match self {
            LFormula::Const(_) => {}
            LFormula::Atom(a) => f(a),
            LFormula::Not(inner) => inner.visit_atoms(f),
            LFormula::And(fs) | LFormula::Or(fs) => {
                for x in fs {
                    x.visit_atoms(f);
                }
            }
        }
    }

    /// lcm of all congruence moduli (at least 1).
    pub fn modulus(&self) -> u64 {
        let mut m = 1u64;
        self.visit_atoms(&mut |a| {
            if let LAtom::Mod { modulus, .. } = a {
                m = m.lcm(modulus);
            }
        });
        m
    }

    /// Strict bound M: larger than every constant and offset in the formula.
    pub fn constant_bound(&self) -> u64 {
        let mut m = 0u64;
        self.visit_atoms(&mut |a| {
            let v = match a {
                LAtom::Mod { .. } => 0,
                LAtom::EqConst { value, .. } => *value,
                LAtom::Link { offset, .. } | LAtom::Less { offset, .. } => *offset,
            };
            m = m.max(v);
        });
        m + 1
    }

    /// Rewrites atoms under the substitution x_var := value.
    pub fn substitute_const(&self, var: usize, value: u64) -> LFormula {
        match self {
            LFormula::Const(b) => LFormula::Const(*b),
            LFormula::Not(f) => LFormula::not(f.substitute_const(var, value)),
            LFormula::And(fs) => {
                LFormula::and(fs.iter().map(|f| f.substitute_const(var, value)).collect())
            }
            LFormula::Or(fs) => {
                LFormula::or(fs.iter().map(|f| f.substitute_const(var, value)).collect())
            }
            LFormula::Atom(a) => match *a {
                LAtom::Mod { var: v, modulus, residue } if v == var => {
                    LFormula::Const(value % modulus == residue)
                }
                LAtom::EqConst { var: v, value: k } if v == var => LFormula::Const(value == k),
                LAtom::Link { lhs, offset, rhs } if lhs == var && rhs == var => {
                    LFormula::Const(offset == 0)
                }
                LAtom::Link { lhs, offset, rhs } if lhs == var => {
                    LFormula::Atom(LAtom::EqConst { var: rhs, value: value + offset })
                }
                LAtom::Link { lhs, offset, rhs } if rhs == var => {
                    LFormula::term_eq_const(offset, lhs, value)
                }
                LAtom::Less { lhs, offset: _, rhs } if lhs == var && rhs == var => {
                    LFormula::Const(false)
                }
                LAtom::Less { lhs, offset, rhs } if lhs == var => {
                    // value + offset < x_rhs
                    LFormula::not(LFormula::Or(
                        (0..=value + offset)
                            .map(|t| LFormula::Atom(LAtom::EqConst { var: rhs, value: t }))
                            .collect(),
                    ))
                }
                LAtom::Less { lhs, offset, rhs } if rhs == var => {
                    LFormula::term_lt_const(offset, lhs, value)
                }
                ref other => LFormula::Atom(other.clone()),
            },
        }
    }

    /// Rewrites atoms under the substitution x_var := x_base + shift.
    pub fn substitute_link(&self, var: usize, base: usize, shift: u64) -> LFormula {
        assert_ne!(var, base);
        match self {
            LFormula::Const(b) => LFormula::Const(*b),
            LFormula::Not(f) => LFormula::not(f.substitute_link(var, base, shift)),
            LFormula::And(fs) => {
                LFormula::and(fs.iter().map(|f| f.substitute_link(var, base, shift)).collect())
            }
            LFormula::Or(fs) => {
                LFormula::or(fs.iter().map(|f| f.substitute_link(var, base, shift)).collect())
            }
            LFormula::Atom(a) => match *a {
                LAtom::Mod { var: v, modulus, residue } if v == var => LFormula::Atom(LAtom::Mod {
                    var: base,
                    modulus,
                    residue: (residue + modulus - (shift % modulus)) % modulus,
                }),
                LAtom::EqConst { var: v, value } if v == var => {
                    LFormula::term_eq_const(shift, base, value)
                }
                LAtom::Link { lhs, offset, rhs } if lhs == var && rhs == var => {
                    LFormula::Const(offset == 0)
                }
                LAtom::Link { lhs, offset, rhs } if lhs == var => {
                    // (x_base + shift) + offset = x_rhs
                    LFormula::term_eq_term(shift + offset, base, 0, rhs)
                }
                LAtom::Link { lhs, offset, rhs } if rhs == var => {
                    // x_lhs + offset = x_base + shift
                    LFormula::term_eq_term(offset, lhs, shift, base)
                }
                LAtom::Less { lhs, offset: _, rhs } if lhs == var && rhs == var => {
                    LFormula::Const(false)
                }
                LAtom::Less { lhs, offset, rhs } if lhs == var => {
                    LFormula::term_lt_term(shift + offset, base, 0, rhs)
                }
                LAtom::Less { lhs, offset, rhs } if rhs == var => {
                    LFormula::term_lt_term(offset, lhs, shift, base)
                }
                ref other => LFormula::Atom(other.clone()),
            },
        }
    }

    /// Prefix textual rendering, e.g. `(and (mod x1 2 1) (lt (S 2 x1) x2))`.
    pub fn render(&self) -> String {
        match self {
            LFormula::Const(true) => "true".into(),
            LFormula::Const(false) => "false".into(),
            LFormula::Not(f) => format!("(not {})", f.render()),
            LFormula::And(fs) => {
                if fs.is_empty() {
                    "true".into()
                } else {
                    format!("(and {})", fs.iter().map(|f| f.render()).collect::<Vec<_>>().join(" "))
                }
            }
            LFormula::Or(fs) => {
                if fs.is_empty() {
                    "false".into()
                } else {
                    format!("(or {})", fs.iter().map(|f| f.render()).collect::<Vec<_>>().join(" "))
                }
            }
            LFormula::Atom(a) => match a {
                LAtom::Mod { var, modulus, residue } => format!("(mod x{} {} {})", var + 1, modulus, residue),
                LAtom::EqConst { var, value } => format!("(eq x{} {})", var + 1, value),
                LAtom::Link { lhs, offset, rhs } => {
                    format!("(eq (S {} x{}) x{})", offset, lhs + 1, rhs + 1)
                }
                LAtom::Less { lhs, offset, rhs } => {
                    format!("(lt (S {} x{}) x{})", offset, lhs + 1, rhs + 1)
                }
            },
        }
    }
}

impl fmt::Display for LFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Evaluates an order-augmented formula on a tuple. Total.
pub fn eval_ldelta(formula: &LFormula, tuple: &[u64]) -> bool {
    formula.eval(tuple)
}

// ---------------------------------------------------------------------------
// The rewriter
// ---------------------------------------------------------------------------

/// An abstract ladder in N^n for a variable partition: the formula holds on
/// (rows[i] ++ cols[j]) exactly when i <= j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LadderWitness {
    pub left_vars: Vec<usize>,
    pub right_vars: Vec<usize>,
    pub rows: Vec<Vec<u64>>,
    pub cols: Vec<Vec<u64>>,
}

impl LadderWitness {
    pub fn size(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    /// Checks the iff pattern under the given formula (variables are global
    /// indices into a tuple of the formula's arity).
    pub fn verify(&self, formula: &LFormula, arity: usize) -> bool {
        if self.rows.len() != self.cols.len() {
            return false;
        }
        for (i, r) in self.rows.iter().enumerate() {
            for (j, c) in self.cols.iter().enumerate() {
                let mut tuple = vec![0u64; arity];
                for (v, &val) in self.left_vars.iter().zip(r) {
                    tuple[*v] = val;
                }
                for (v, &val) in self.right_vars.iter().zip(c) {
                    tuple[*v] = val;
                }
                if formula.eval(&tuple) != (i <= j) {
                    return false;
                }
            }
        }
        true
    }
}

/// Structured outcome of a successful rewrite: mirrors the case analysis so
/// downstream consumers can map each region through value substitutions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StableTree {
    Leaf(bool),
    Node {
        /// Ambient variables of this node, as global indices.
        vars: Vec<usize>,
        /// The (substituted) formula this node decomposes; variables
        /// outside `vars` no longer occur in it.
        formula: LFormula,
        /// The strict constant bound M used at this node.
        m_bound: u64,
        /// The congruence modulus used for the generic cases.
        modulus: u64,
        /// (pinned var, value, subtree over the remaining vars).
        pins: Vec<(usize, u64, StableTree)>,
        /// (base var i, offset e, linked var j with x_j = x_i + e, subtree
        /// over vars without j).
        links: Vec<(usize, u64, usize, StableTree)>,
        /// Residue assignments (per var, mod `modulus`) whose spaced tuples
        /// satisfy the formula for every ordering.
        generic: Vec<Vec<u64>>,
    },
}

impl StableTree {
    /// Reconstructs the equivalent order-free formula.
    pub fn to_formula(&self) -> LFormula {
        match self {
            StableTree::Leaf(b) => LFormula::Const(*b),
            StableTree::Node { vars, m_bound, modulus, pins, links, generic, .. } => {
                let mut disjuncts = Vec::new();
                for (v, k, sub) in pins {
                    disjuncts.push(LFormula::and(vec![
                        LFormula::Atom(LAtom::EqConst { var: *v, value: *k }),
                        sub.to_formula(),
                    ]));
                }
                for (i, e, j, sub) in links {
                    disjuncts.push(LFormula::and(vec![
                        LFormula::Atom(LAtom::Link { lhs: *i, offset: *e, rhs: *j }),
                        sub.to_formula(),
                    ]));
                }
                for residues in generic {
                    let mut conj = Vec::new();
                    // generic position: no pins, no links within the bound
                    for &v in vars {
                        for k in 0..*m_bound {
                            conj.push(LFormula::not(LFormula::Atom(LAtom::EqConst {
                                var: v,
                                value: k,
                            })));
                        }
                    }
                    for &v in vars {
                        for &w in vars {
                            if v != w {
                                for e in 0..*m_bound {
                                    conj.push(LFormula::not(LFormula::Atom(LAtom::Link {
                                        lhs: v,
                                        offset: e,
                                        rhs: w,
                                    })));
                                }
                            }
                        }
                    }
                    for (&v, &r) in vars.iter().zip(residues) {
                        if *modulus > 1 {
                            conj.push(LFormula::Atom(LAtom::Mod {
                                var: v,
                                modulus: *modulus,
                                residue: r,
                            }));
                        }
                    }
                    disjuncts.push(LFormula::and(conj));
                }
                LFormula::or(disjuncts)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RewriteOutcome {
    /// Equivalent order-free formula, with its construction tree.
    Stable(StableTree),
    /// Explicit ladder for one variable partition.
    Unstable(LadderWitness),
}

/// Default ladder size produced by the rewriter.
pub const DEFAULT_LADDER_SIZE: usize = 5;

/// Rewrites a quantifier-free order-augmented formula into an equivalent
/// order-free one, or constructs a ladder for some variable partition.
///
/// Case analysis per consistent region: a variable pinned below the
/// constant bound M recurses with it substituted; two variables within M of
/// each other recurse with the link substituted; in generic position
/// (everything at least M apart) truth depends only on residues and order,
/// and the order may be dropped exactly when every adjacent transposition
/// of every satisfied ordering is also satisfied — a failed swap yields the
/// zigzag ladder for the split at the swap position.
pub fn ldelta_rewrite(formula: &LFormula, arity: usize, ladder_size: usize) -> RewriteOutcome {
    let vars: Vec<usize> = (0..arity).collect();
    rewrite_rec(formula, arity, &vars, ladder_size)
}

fn rewrite_rec(formula: &LFormula, arity: usize, vars: &[usize], ladder_size: usize) -> RewriteOutcome {
    if vars.is_empty() {
        return RewriteOutcome::Stable(StableTree::Leaf(formula.eval(&vec![0; arity])));
    }
    let m = formula.constant_bound();
    let modulus = formula.modulus();

    let mut pins = Vec::new();
    let mut links = Vec::new();

    // Pinned-variable regions.
    for &v in vars {
        for k in 0..m {
            let sub = formula.substitute_const(v, k);
            let rest: Vec<usize> = vars.iter().copied().filter(|&x| x != v).collect();
            match rewrite_rec(&sub, arity, &rest, ladder_size) {
                RewriteOutcome::Stable(t) => pins.push((v, k, t)),
                RewriteOutcome::Unstable(lad) => {
                    // x_v is constant K on every ladder point; attach left.
                    let mut left = lad.left_vars;
                    left.push(v);
                    let rows = lad.rows.into_iter().map(|mut r| {
                        r.push(k);
                        r
                    });
                    return RewriteOutcome::Unstable(LadderWitness {
                        left_vars: left,
                        right_vars: lad.right_vars,
                        rows: rows.collect(),
                        cols: lad.cols,
                    });
                }
            }
        }
    }

    // Linked regions x_j = x_i + e.
    for &i in vars {
        for &j in vars {
            if i == j {
                continue;
            }
            for e in 0..m {
                let sub = formula.substitute_link(j, i, e);
                let rest: Vec<usize> = vars.iter().copied().filter(|&x| x != j).collect();
                match rewrite_rec(&sub, arity, &rest, ladder_size) {
                    RewriteOutcome::Stable(t) => links.push((i, e, j, t)),
                    RewriteOutcome::Unstable(lad) => {
                        // x_j tracks x_i; attach to whichever side holds x_i.
                        let mut left = lad.left_vars.clone();
                        let mut right = lad.right_vars.clone();
                        let mut rows = lad.rows.clone();
                        let mut cols = lad.cols.clone();
                        if let Some(pos) = lad.left_vars.iter().position(|&x| x == i) {
                            left.push(j);
                            for r in &mut rows {
                                let val = r[pos] + e;
                                r.push(val);
                            }
                        } else {
                            let pos =
                                lad.right_vars.iter().position(|&x| x == i).expect("var on a side");
                            right.push(j);
                            for c in &mut cols {
                                let val = c[pos] + e;
                                c.push(val);
                            }
                        }
                        return RewriteOutcome::Unstable(LadderWitness {
                            left_vars: left,
                            right_vars: right,
                            rows,
                            cols,
                        });
                    }
                }
            }
        }
    }

    // Generic position: residues and ordering alone decide.
    let n = vars.len();
    let orderings = permutations(n);
    let mut generic = Vec::new();
    let mut residues = vec![0u64; n];
    loop {
        // evaluate every ordering on a spaced representative
        let mut sat = vec![false; orderings.len()];
        let mut any = false;
        for (oi, ord) in orderings.iter().enumerate() {
            let tuple = spaced_tuple(arity, vars, ord, &residues, m, modulus, None, 0);
            sat[oi] = formula.eval(&tuple);
            any |= sat[oi];
        }
        if any {
            if sat.iter().all(|&s| s) {
                generic.push(residues.clone());
            } else {
                // A boundary adjacent transposition exists; find it and
                // build the zigzag ladder.
                let outcome = boundary_ladder(
                    formula,
                    arity,
                    vars,
                    &orderings,
                    &sat,
                    &residues,
                    m,
                    modulus,
                    ladder_size,
                );
                return RewriteOutcome::Unstable(outcome);
            }
        }
        // next residue assignment
        let mut pos = 0;
        loop {
            if pos == n {
                return RewriteOutcome::Stable(StableTree::Node {
                    vars: vars.to_vec(),
                    formula: formula.clone(),
                    m_bound: m,
                    modulus,
                    pins,
                    links,
                    generic,
                });
            }
            residues[pos] += 1;
            if residues[pos] < modulus {
                break;
            }
            residues[pos] = 0;
            pos += 1;
        }
    }
}

/// Builds a spaced representative tuple for the ordering `ord` (positions
/// into `vars`): values at least M, pairwise at least M apart, matching the
/// residues. When `zigzag` is Some((j, t, u)), positions j-1 and j take the
/// interleaved values of zigzag row t and column u of a ladder of the given
/// size.
fn spaced_tuple(
    arity: usize,
    vars: &[usize],
    ord: &[usize],
    residues: &[u64],
    m: u64,
    modulus: u64,
    zigzag: Option<(usize, usize, usize)>,
    ladder_size: usize,
) -> Vec<u64> {
    let next_val = |lower: u64, pos: usize| -> u64 {
        let r = residues[pos] % modulus;
        let base = lower + m;
        base + (r + modulus - base % modulus) % modulus
    };
    let mut vals = vec![0u64; arity];
    match zigzag {
        None => {
            let mut cur = 0u64;
            for &pos in ord {
                cur = next_val(cur, pos);
                vals[vars[pos]] = cur;
            }
        }
        Some((j, t, u)) => {
            // positions ord[0..j-1] ascending, then the zigzag pair at
            // (ord[j-1], ord[j]) with row index t and column index u, then
            // the remaining positions above everything.
            let mut cur = 0u64;
            for &pos in &ord[..j - 1] {
                cur = next_val(cur, pos);
                vals[vars[pos]] = cur;
            }
            // interleaved chains: a_{j-1,k} and a_{j,k}
            let mut row_vals = Vec::with_capacity(ladder_size + 1);
            let mut col_vals = Vec::with_capacity(ladder_size + 1);
            for _ in 0..=ladder_size {
                cur = next_val(cur, ord[j - 1]);
                row_vals.push(cur);
                cur = next_val(cur, ord[j]);
                col_vals.push(cur);
            }
            vals[vars[ord[j - 1]]] = row_vals[t];
            vals[vars[ord[j]]] = col_vals[u];
            for &pos in &ord[j + 1..] {
                cur = next_val(cur, pos);
                vals[vars[pos]] = cur;
            }
        }
    }
    vals
}

#[allow(clippy::too_many_arguments)]
fn boundary_ladder(
    formula: &LFormula,
    arity: usize,
    vars: &[usize],
    orderings: &[Vec<usize>],
    sat: &[bool],
    residues: &[u64],
    m: u64,
    modulus: u64,
    ladder_size: usize,
) -> LadderWitness {
    // Find a satisfied ordering with an adjacent transposition that fails.
    for (oi, ord) in orderings.iter().enumerate() {
        if !sat[oi] {
            continue;
        }
        for j in 1..ord.len() {
            let mut swapped = ord.clone();
            swapped.swap(j - 1, j);
            let si = orderings.iter().position(|o| *o == swapped).unwrap();
            if sat[si] {
                continue;
            }
            // Build the zigzag ladder for the split before position j:
            // left block ord[0..j], right block ord[j..].
            let left_vars: Vec<usize> = ord[..j].iter().map(|&p| vars[p]).collect();
            let right_vars: Vec<usize> = ord[j..].iter().map(|&p| vars[p]).collect();
            let mut rows = Vec::new();
            let mut cols = Vec::new();
            for t in 0..=ladder_size {
                let tuple =
                    spaced_tuple(arity, vars, ord, residues, m, modulus, Some((j, t, t)), ladder_size);
                rows.push(ord[..j].iter().map(|&p| tuple[vars[p]]).collect::<Vec<u64>>());
                cols.push(ord[j..].iter().map(|&p| tuple[vars[p]]).collect::<Vec<u64>>());
            }
            let witness = LadderWitness { left_vars, right_vars, rows, cols };
            debug_assert!(
                witness.verify(formula, arity),
                "constructed ladder must verify"
            );
            return witness;
        }
    }
    unreachable!("a proper nonempty set of orderings has a boundary transposition");
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{Alphabet, Dfa};
    use crate::digits::Base;

    fn b(d: u32) -> Base {
        Base::new(d).unwrap()
    }

    fn two_letter_alphabet() -> Alphabet {
        Alphabet::sigma_nonneg(b(2), 1)
    }

    #[test]
    fn reach_profile_fixed_point_and_parity() {
        let al = two_letter_alphabet();
        // self-loop automaton: N = 0, mu = 1
        let d = Dfa::universal(al.clone());
        let p = reach_profile(&d, 0, &[0]);
        assert_eq!((p.threshold, p.period), (0, 1));

        // 2-state parity: N = 0, mu = 2
        let width = al.len();
        let parity = Dfa::new(
            al,
            vec![vec![1; width], vec![0; width]],
            0,
            vec![true, false],
        );
        let p = reach_profile(&parity, 0, &[1]);
        assert_eq!((p.threshold, p.period), (0, 2));
        for t in 0..12 {
            assert_eq!(p.state_at(t), t % 2);
        }
    }

    #[test]
    fn reach_profile_matches_simulation_on_random_dfas() {
        let al = two_letter_alphabet();
        let width = al.len();
        let mut seed = 77u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..40 {
            let n = 2 + (next() % 5) as usize;
            let delta: Vec<Vec<usize>> = (0..n)
                .map(|_| (0..width).map(|_| (next() % n as u64) as usize).collect())
                .collect();
            let d = Dfa::new(al.clone(), delta, 0, vec![true; n]);
            let word = vec![(next() % width as u64) as usize, (next() % width as u64) as usize];
            let p = reach_profile(&d, 0, &word);
            let mut q = 0usize;
            for t in 0..100 {
                assert_eq!(p.state_at(t), q, "t = {t}");
                q = d.run(q, &word);
            }
        }
    }

    #[test]
    fn power_membership_basic_shapes() {
        let al = two_letter_alphabet();
        let width = al.len();
        // (ab)* with a = 0, b = 1
        let mut delta = vec![vec![2; width]; 3];
        delta[0][0] = 1;
        delta[1][1] = 0;
        let abstar = Dfa::new(al.clone(), delta, 0, vec![true, false, false]);
        let pred = power_membership(&abstar, &[vec![0, 1]]);
        for t in 0..40u64 {
            assert!(pred.eval(&[t]), "all powers of ab are accepted");
        }

        // a(aa)*: odd powers of a
        let mut delta = vec![vec![2; width]; 3];
        delta[0][0] = 1;
        delta[1][0] = 0;
        let odd = Dfa::new(al, delta, 0, vec![false, true, false]);
        let pred = power_membership(&odd, &[vec![0]]);
        for t in 0..40u64 {
            assert_eq!(pred.eval(&[t]), t % 2 == 1, "t = {t}");
        }
    }

    #[test]
    fn power_membership_matches_brute_force_grids() {
        let al = two_letter_alphabet();
        let width = al.len();
        let mut seed = 0xfeedu64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..15 {
            let n = 2 + (next() % 5) as usize;
            let delta: Vec<Vec<usize>> = (0..n)
                .map(|_| (0..width).map(|_| (next() % n as u64) as usize).collect())
            .collect();
            let finals: Vec<bool> = (0..n).map(|_| next() % 2 == 0).collect();
            let d = Dfa::new(al.clone(), delta, 0, finals);
            let words: Vec<Vec<usize>> = (0..2)
                .map(|_| {
                    let len = 1 + (next() % 2) as usize;
                    (0..len).map(|_| (next() % width as u64) as usize).collect()
                })
                .collect();
            let pred = power_membership(&d, &words);
            for t1 in 0..25u64 {
                for t2 in 0..25u64 {
                    let mut w = Vec::new();
                    for _ in 0..t1 {
                        w.extend(words[0].iter().copied());
                    }
                    for _ in 0..t2 {
                        w.extend(words[1].iter().copied());
                    }
                    assert_eq!(pred.eval(&[t1, t2]), d.accepts_syms(&w), "t=({t1},{t2})");
                }
            }
        }
    }

    #[test]
    fn padded_membership_reduces_to_power_membership_in_dim_one() {
        let al = two_letter_alphabet();
        let width = al.len();
        let mut seed = 0xc0ffeeu64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..20 {
            let n = 2 + (next() % 4) as usize;
            let delta: Vec<Vec<usize>> = (0..n)
                .map(|_| (0..width).map(|_| (next() % n as u64) as usize).collect())
                .collect();
            let finals: Vec<bool> = (0..n).map(|_| next() % 2 == 0).collect();
            let d = Dfa::new(al.clone(), delta, 0, finals);
            // pattern of two single letters on the single track — but note
            // zero-padding: the padded word for (k1, k2) is l1^k1 l2^k2 with
            // no padding at all in dimension 1.
            let l1 = Letter::scalar((next() % 2) as i64);
            let l2 = Letter::scalar((next() % 2) as i64);
            let pad = padded_power_membership(&d, &[vec![l1.clone(), l2.clone()]]);
            let i1 = al.index_of_letter(&l1).unwrap();
            let i2 = al.index_of_letter(&l2).unwrap();
            let pred = power_membership(&d, &[vec![i1], vec![i2]]);
            for k1 in 0..12u64 {
                for k2 in 0..12u64 {
                    assert_eq!(
                        pad.eval(&[k1, k2]),
                        pred.eval(&[k1, k2]),
                        "k = ({k1},{k2})"
                    );
                }
            }
        }
    }

    #[test]
    fn padded_membership_two_tracks_against_brute_force() {
        // Value-diagonal in Z^2 base 2: [1^k1 padded] = [1^k2 padded] iff
        // k1 = k2. Build the exact string automaton for equal tracks.
        let base = b(2);
        let al = Alphabet::sigma_pm(base, 2);
        let width = al.len();
        // accept words where both components are digitwise equal
        let mut delta = vec![vec![1; width]; 2];
        for a in 0..width {
            let l = al.sym(a).letter().unwrap();
            if l.0[0] == l.0[1] {
                delta[0][a] = 0;
            }
        }
        let diag = Dfa::new(al, delta, 0, vec![true, false]);
        let one = Letter::scalar(1);
        let pad = padded_power_membership(&diag, &[vec![one.clone()], vec![one.clone()]]);
        for k1 in 0..25u64 {
            for k2 in 0..25u64 {
                assert_eq!(pad.eval(&[k1, k2]), k1 == k2, "k = ({k1},{k2})");
            }
        }
    }

    #[test]
    fn eval_examples() {
        let f = LFormula::Atom(LAtom::Mod { var: 0, modulus: 2, residue: 0 });
        assert!(eval_ldelta(&f, &[4]));
        assert!(!eval_ldelta(&f, &[5]));
        let g = LFormula::Atom(LAtom::Less { lhs: 0, offset: 2, rhs: 1 });
        assert!(!eval_ldelta(&g, &[3, 5]));
        assert!(eval_ldelta(&g, &[3, 6]));
    }

    #[test]
    fn eval_matches_independent_interpreter() {
        // Independent oracle: direct recursive interpretation written
        // separately from LFormula::eval.
        fn oracle(f: &LFormula, v: &[u64]) -> bool {
            match f {
                LFormula::Const(b) => *b,
                LFormula::Not(x) => !oracle(x, v),
                LFormula::And(xs) => xs.iter().fold(true, |acc, x| acc & oracle(x, v)),
                LFormula::Or(xs) => xs.iter().fold(false, |acc, x| acc | oracle(x, v)),
                LFormula::Atom(LAtom::Mod { var, modulus, residue }) => {
                    v[*var].rem_euclid(*modulus) == *residue
                }
                LFormula::Atom(LAtom::EqConst { var, value }) => v[*var] == *value,
                LFormula::Atom(LAtom::Link { lhs, offset, rhs }) => {
                    v[*rhs] >= *offset && v[*rhs] - offset == v[*lhs]
                }
                LFormula::Atom(LAtom::Less { lhs, offset, rhs }) => {
                    v[*rhs] > *offset && v[*lhs] < v[*rhs] - offset
                }
            }
        }
        let mut seed = 0x5151u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..100 {
            let f = random_formula(&mut next, 3, 3);
            for _ in 0..10 {
                let tuple: Vec<u64> = (0..3).map(|_| next() % 16).collect();
                assert_eq!(f.eval(&tuple), oracle(&f, &tuple), "formula {f}");
            }
        }
    }

    pub(super) fn random_formula(next: &mut dyn FnMut() -> u64, arity: usize, depth: usize) -> LFormula {
        if depth == 0 || next() % 4 == 0 {
            let a = match next() % 4 {
                0 => LAtom::Mod {
                    var: (next() % arity as u64) as usize,
                    modulus: 1 + next() % 4,
                    residue: 0,
                },
                1 => LAtom::EqConst { var: (next() % arity as u64) as usize, value: next() % 6 },
                2 => {
                    let i = (next() % arity as u64) as usize;
                    let mut j = (next() % arity as u64) as usize;
                    if i == j {
                        j = (j + 1) % arity;
                    }
                    LAtom::Link { lhs: i, offset: next() % 5, rhs: j }
                }
                _ => {
                    let i = (next() % arity as u64) as usize;
                    let mut j = (next() % arity as u64) as usize;
                    if i == j {
                        j = (j + 1) % arity;
                    }
                    LAtom::Less { lhs: i, offset: next() % 5, rhs: j }
                }
            };
            let a = if let LAtom::Mod { var, modulus, .. } = a {
                LAtom::Mod { var, modulus, residue: next() % modulus }
            } else {
                a
            };
            return LFormula::Atom(a);
        }
        match next() % 3 {
            0 => LFormula::not(random_formula(next, arity, depth - 1)),
            1 => LFormula::and(vec![
                random_formula(next, arity, depth - 1),
                random_formula(next, arity, depth - 1),
            ]),
            _ => LFormula::or(vec![
                random_formula(next, arity, depth - 1),
                random_formula(next, arity, depth - 1),
            ]),
        }
    }

    #[test]
    fn rewrite_simple_order_formula_gives_ladder() {
        // x1 < x2 is the canonical unstable formula.
        let f = LFormula::Atom(LAtom::Less { lhs: 0, offset: 0, rhs: 1 });
        match ldelta_rewrite(&f, 2, 5) {
            RewriteOutcome::Unstable(lad) => {
                assert_eq!(lad.size(), 5);
                assert!(lad.verify(&f, 2));
            }
            RewriteOutcome::Stable(_) => panic!("pure order must be unstable"),
        }
    }

    #[test]
    fn rewrite_equality_goes_through_substitution() {
        // x1 = x2: stable, output must be order-free and equivalent.
        let f = LFormula::Atom(LAtom::Link { lhs: 0, offset: 0, rhs: 1 });
        match ldelta_rewrite(&f, 2, 5) {
            RewriteOutcome::Stable(tree) => {
                let g = tree.to_formula();
                assert!(!g.has_order_atoms());
                for a in 0..30u64 {
                    for b in 0..30u64 {
                        assert_eq!(g.eval(&[a, b]), f.eval(&[a, b]), "({a},{b})");
                    }
                }
            }
            RewriteOutcome::Unstable(_) => panic!("equality is stable"),
        }
    }

    #[test]
    fn rewrite_congruences_with_redundant_order_split() {
        // (x1 = 0 mod 2) and (x2 = 1 mod 2), wrapped in a redundant order
        // disjunction: the rewriter must drop the order.
        let core = LFormula::and(vec![
            LFormula::Atom(LAtom::Mod { var: 0, modulus: 2, residue: 0 }),
            LFormula::Atom(LAtom::Mod { var: 1, modulus: 2, residue: 1 }),
        ]);
        let order_split = LFormula::or(vec![
            LFormula::Atom(LAtom::Less { lhs: 0, offset: 0, rhs: 1 }),
            LFormula::not(LFormula::Atom(LAtom::Less { lhs: 0, offset: 0, rhs: 1 })),
        ]);
        let f = LFormula::and(vec![core, order_split]);
        match ldelta_rewrite(&f, 2, 5) {
            RewriteOutcome::Stable(tree) => {
                let g = tree.to_formula();
                assert!(!g.has_order_atoms());
                for a in 0..=50u64 {
                    for b in 0..=50u64 {
                        assert_eq!(g.eval(&[a, b]), f.eval(&[a, b]), "({a},{b})");
                    }
                }
            }
            RewriteOutcome::Unstable(_) => panic!("no genuine order dependence"),
        }
    }

    #[test]
    fn render_and_shape() {
        let f = LFormula::and(vec![
            LFormula::Atom(LAtom::Mod { var: 0, modulus: 2, residue: 1 }),
            LFormula::Atom(LAtom::Less { lhs: 0, offset: 2, rhs: 1 }),
        ]);
        assert_eq!(f.render(), "(and (mod x1 2 1) (lt (S 2 x1) x2))");
    }

    #[test]
    fn normalizing_constructors_match_raw_semantics() {
        let mut seed = 99u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..500 {
            let e = next() % 5;
            let f = next() % 5;
            let k = next() % 9;
            let i = 0usize;
            let j = 1usize;
            let x = next() % 20;
            let y = next() % 20;
            let tuple = [x, y];
            assert_eq!(LFormula::term_lt_const(e, i, k).eval(&tuple), x + e < k);
            assert_eq!(LFormula::term_eq_const(e, i, k).eval(&tuple), x + e == k);
            assert_eq!(LFormula::term_lt_term(e, i, f, j).eval(&tuple), x + e < y + f);
            assert_eq!(LFormula::term_eq_term(e, i, f, j).eval(&tuple), x + e == y + f);
        }
    }
}
