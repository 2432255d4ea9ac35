//! Automatic subsets of Z^m with value-level semantics.
//!
//! An [`AutoSet`] recognizer accepts *every* signed-digit representation of
//! each member, so acceptance depends only on the represented value. The
//! closure construction, translation, and Minkowski sums all run on the
//! same bounded-carry machine: two (or three) digit streams represent
//! related values exactly when the digitwise differences, processed least
//! significant first with carries, drain to zero.

use crate::automaton::{Alphabet, AutomatonError, Dfa, Nfa, STATE_LIMIT};
use crate::digits::{canonical_rep, Base, Letter, Word};
use crate::sparsity::{is_sparse, SparsityVerdict};
use crate::suffixes::{forbidden_suffix_witness, recheck_witness, ForbiddenSuffix};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Debug, thiserror::Error)]
pub enum AutoSetError {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(Base, Base),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("operation requires dimension 1, got {0}")]
    NotScalar(usize),
    #[error("set is not contained in N")]
    NotInNat,
    #[error("alphabet contains the reserved separator")]
    SeparatorInAlphabet,
}

/// A base-d, dimension-m automatic set with value-closed semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutoSet {
    base: Base,
    dim: usize,
    dfa: Dfa,
}

type Carry = Vec<BigInt>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Mode {
    Run(usize),
    Pad,
}

fn carry_sub_div(
    base: Base,
    carry: &Carry,
    add: Option<&Letter>,
    add2: Option<&Letter>,
    sub: &Letter,
) -> Option<Carry> {
    let d = base.big();
    let mut out = Vec::with_capacity(carry.len());
    for i in 0..carry.len() {
        let mut v = carry[i].clone();
        if let Some(a) = add {
            v += &a.0[i];
        }
        if let Some(a) = add2 {
            v += &a.0[i];
        }
        v -= &sub.0[i];
        let (q, r) = v.div_rem(&d);
        if !r.is_zero() {
            return None;
        }
        out.push(q);
    }
    Some(out)
}

/// One carry-machine node: an input-automaton state in Run mode (or the
/// padding mode once the input word has been fully guessed) plus the carry.
/// Pad is encoded as usize::MAX.
pub type CarryNode = (usize, Vec<BigInt>);

/// A subset of simultaneously reachable carry nodes: the lazily determinized
/// state of the value machine.
pub type CarryState = BTreeSet<CarryNode>;

const PAD: usize = usize::MAX;

fn carry_node_step(
    input: &Dfa,
    base: Base,
    node: &CarryNode,
    letter: &Letter,
    out: &mut Vec<CarryNode>,
) {
    let (q, carry) = node;
    if *q == PAD {
        if let Some(c2) = carry_sub_div(base, carry, None, None, letter) {
            out.push((PAD, c2));
        }
        return;
    }
    for (ii, sym) in input.alphabet().syms().iter().enumerate() {
        let li = sym.letter().expect("letter alphabet");
        if let Some(c2) = carry_sub_div(base, carry, Some(li), None, letter) {
            out.push((input.step(*q, ii), c2));
        }
    }
    if input.is_final(*q) {
        if let Some(c2) = carry_sub_div(base, carry, None, None, letter) {
            out.push((PAD, c2));
        }
    }
}

/// The bounded-carry value machine over an input recognizer, driven lazily
/// by arbitrary integer letters. It accepts a word w exactly when
/// `[w] = [u] + shift` for some u in the input language; no alphabet needs
/// to be fixed up front, which sidesteps determinization blowups when the
/// probing letters are huge.
pub struct CarryMachine<'a> {
    input: &'a Dfa,
    base: Base,
    dim: usize,
    reach: std::cell::RefCell<ValueReachCache>,
}

impl<'a> CarryMachine<'a> {
    pub fn new(input: &'a Dfa, base: Base, dim: usize) -> CarryMachine<'a> {
        assert!(!input.alphabet().contains_separator());
        assert_eq!(input.alphabet().dim(), dim);
        CarryMachine { input, base, dim, reach: std::cell::RefCell::new(ValueReachCache::default()) }
    }

    pub fn start(&self, shift: &[BigInt]) -> CarryState {
        let mut s = BTreeSet::new();
        s.insert((self.input.start(), shift.to_vec()));
        s
    }

    pub fn step(&self, state: &CarryState, letter: &Letter) -> CarryState {
        let mut out = Vec::new();
        for node in state {
            carry_node_step(self.input, self.base, node, letter, &mut out);
        }
        out.into_iter().collect()
    }

    pub fn step_word(&self, state: &CarryState, word: &Word) -> CarryState {
        let mut cur = state.clone();
        for l in word.letters() {
            cur = self.step(&cur, l);
        }
        cur
    }

    pub fn accepting(&self, state: &CarryState) -> bool {
        let zero = vec![BigInt::zero(); self.dim];
        state.iter().any(|(q, c)| {
            if *q == PAD {
                *c == zero
            } else {
                let neg: Carry = c.iter().map(|x| -x).collect();
                self.reach.borrow_mut().query(self.input, self.base, self.dim, *q, &neg)
            }
        })
    }
}

/// Incremental cache over the (state, residual value) reachability graph.
#[derive(Default)]
struct ValueReachCache {
    solved: BTreeMap<(usize, Carry), bool>,
}

impl ValueReachCache {
    fn query(&mut self, dfa: &Dfa, base: Base, dim: usize, q: usize, v: &Carry) -> bool {
        if let Some(&r) = self.solved.get(&(q, v.clone())) {
            return r;
        }
        let reach = ValueReach { dfa, base, dim };
        let mut roots = BTreeSet::new();
        roots.insert((q, v.clone()));
        for (k, val) in reach.solve(&roots) {
            self.solved.insert(k, val);
        }
        self.solved[&(q, v.clone())]
    }
}

/// Reachability in the (state, residual value) graph: from which pairs can
/// the automaton read some word of exactly that value and accept?
struct ValueReach<'a> {
    dfa: &'a Dfa,
    base: Base,
    dim: usize,
}

impl<'a> ValueReach<'a> {
    fn solve(&self, roots: &BTreeSet<(usize, Carry)>) -> BTreeMap<(usize, Carry), bool> {
        let letters: Vec<&Letter> = self
            .dfa
            .alphabet()
            .syms()
            .iter()
            .map(|s| s.letter().expect("letter alphabet"))
            .collect();
        let zero_carry = vec![BigInt::zero(); self.dim];
        let mut nodes: BTreeMap<(usize, Carry), usize> = BTreeMap::new();
        let mut preds: Vec<Vec<usize>> = Vec::new();
        let mut order: Vec<(usize, Carry)> = Vec::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        let intern = |key: (usize, Carry),
                          nodes: &mut BTreeMap<(usize, Carry), usize>,
                          order: &mut Vec<(usize, Carry)>,
                          preds: &mut Vec<Vec<usize>>,
                          queue: &mut VecDeque<usize>| {
            *nodes.entry(key.clone()).or_insert_with(|| {
                order.push(key);
                preds.push(Vec::new());
                queue.push_back(order.len() - 1);
                order.len() - 1
            })
        };
        for r in roots {
            intern(r.clone(), &mut nodes, &mut order, &mut preds, &mut queue);
        }
        while let Some(id) = queue.pop_front() {
            let (q, v) = order[id].clone();
            for (ai, l) in letters.iter().enumerate() {
                let letter_as_carry = Letter::zero(self.dim);
                let _ = letter_as_carry;
                if let Some(v2) = carry_sub_div(self.base, &v, None, None, l) {
                    let child = (self.dfa.step(q, ai), v2);
                    let cid = intern(child, &mut nodes, &mut order, &mut preds, &mut queue);
                    preds[cid].push(id);
                }
            }
            assert!(order.len() <= STATE_LIMIT, "value reachability explosion");
        }
        // Backward from accepting nodes (final state, zero residual).
        let mut ok = vec![false; order.len()];
        let mut back: VecDeque<usize> = VecDeque::new();
        for (key, &id) in &nodes {
            if key.1 == zero_carry && self.dfa.is_final(key.0) {
                ok[id] = true;
                back.push_back(id);
            }
        }
        while let Some(id) = back.pop_front() {
            for &p in &preds[id] {
                if !ok[p] {
                    ok[p] = true;
                    back.push_back(p);
                }
            }
        }
        nodes.into_iter().map(|(k, id)| (k, ok[id])).collect()
    }
}

/// The value-recognizer engine.
///
/// Builds a DFA over `target` accepting exactly the target-words `w` with
/// `[w] = [u] + shift` for some `u` in the language of `input`. With a zero
/// shift and `target` the standard signed alphabet this is value closure;
/// with a nonzero shift it is translation; with `target` a larger alphabet
/// it extends the allowed representations.
pub fn value_recognizer(
    input: &Dfa,
    base: Base,
    shift: &[BigInt],
    target: &Alphabet,
) -> Result<Dfa, AutoSetError> {
    let dim = target.dim();
    if input.alphabet().contains_separator() || target.contains_separator() {
        return Err(AutoSetError::SeparatorInAlphabet);
    }
    if input.alphabet().dim() != dim {
        return Err(AutoSetError::DimMismatch(input.alphabet().dim(), dim));
    }
    let in_letters: Vec<&Letter> = input
        .alphabet()
        .syms()
        .iter()
        .map(|s| s.letter().expect("letter alphabet"))
        .collect();
    let out_letters: Vec<&Letter> = target
        .syms()
        .iter()
        .map(|s| s.letter().expect("letter alphabet"))
        .collect();

    let start_key = (Mode::Run(input.start()), shift.to_vec());
    let mut ids: BTreeMap<(Mode, Carry), usize> = BTreeMap::new();
    let mut order: Vec<(Mode, Carry)> = Vec::new();
    let mut transitions: Vec<(usize, usize, usize)> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    ids.insert(start_key.clone(), 0);
    order.push(start_key);
    queue.push_back(0);
    while let Some(id) = queue.pop_front() {
        let (mode, carry) = order[id].clone();
        for (oi, lo) in out_letters.iter().enumerate() {
            match &mode {
                Mode::Run(q) => {
                    for (ii, li) in in_letters.iter().enumerate() {
                        if let Some(c2) = carry_sub_div(base, &carry, Some(li), None, lo) {
                            let key = (Mode::Run(input.step(*q, ii)), c2);
                            let next = order.len();
                            let tid = *ids.entry(key.clone()).or_insert_with(|| {
                                order.push(key);
                                queue.push_back(next);
                                next
                            });
                            transitions.push((id, oi, tid));
                        }
                    }
                    if input.is_final(*q) {
                        if let Some(c2) = carry_sub_div(base, &carry, None, None, lo) {
                            let key = (Mode::Pad, c2);
                            let next = order.len();
                            let tid = *ids.entry(key.clone()).or_insert_with(|| {
                                order.push(key);
                                queue.push_back(next);
                                next
                            });
                            transitions.push((id, oi, tid));
                        }
                    }
                }
                Mode::Pad => {
                    if let Some(c2) = carry_sub_div(base, &carry, None, None, lo) {
                        let key = (Mode::Pad, c2);
                        let next = order.len();
                        let tid = *ids.entry(key.clone()).or_insert_with(|| {
                            order.push(key);
                            queue.push_back(next);
                            next
                        });
                        transitions.push((id, oi, tid));
                    }
                }
            }
        }
        if order.len() > STATE_LIMIT {
            return Err(AutomatonError::TooLarge(order.len(), STATE_LIMIT).into());
        }
    }

    // Finality: Pad nodes need zero carry; Run nodes need a continuation of
    // the input word representing the negated carry.
    let mut roots: BTreeSet<(usize, Carry)> = BTreeSet::new();
    for (mode, carry) in &order {
        if let Mode::Run(q) = mode {
            roots.insert((*q, carry.iter().map(|c| -c).collect()));
        }
    }
    let reach = ValueReach { dfa: input, base, dim };
    let solved = reach.solve(&roots);
    let zero = vec![BigInt::zero(); dim];

    let mut nfa = Nfa::new(target.clone(), order.len());
    nfa.set_start(0);
    for (from, sym, to) in transitions {
        nfa.add_transition(from, sym, to);
    }
    for (id, (mode, carry)) in order.iter().enumerate() {
        let fin = match mode {
            Mode::Pad => *carry == zero,
            Mode::Run(q) => solved[&(*q, carry.iter().map(|c| -c).collect::<Vec<_>>())],
        };
        nfa.set_final(id, fin);
    }
    Ok(nfa.determinize()?.minimize())
}

impl AutoSet {
    /// Wraps a raw recognizer (over any finite letter alphabet of matching
    /// dimension) into the value-closed automatic set of its values.
    pub fn from_raw(raw: &Dfa, base: Base, dim: usize) -> Result<AutoSet, AutoSetError> {
        let target = Alphabet::sigma_pm(base, dim);
        let dfa = value_recognizer(raw, base, &vec![BigInt::zero(); dim], &target)?;
        Ok(AutoSet { base, dim, dfa })
    }

    /// Trusts that `dfa` (over the standard signed alphabet) is already
    /// value-closed; used by constructions that are closed by design.
    pub(crate) fn from_closed_dfa(dfa: Dfa, base: Base, dim: usize) -> AutoSet {
        debug_assert_eq!(dfa.alphabet(), &Alphabet::sigma_pm(base, dim));
        AutoSet { base, dim, dfa: dfa.minimize() }
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn empty(base: Base, dim: usize) -> AutoSet {
        AutoSet::from_closed_dfa(Dfa::empty(Alphabet::sigma_pm(base, dim)), base, dim)
    }

    /// All of Z^m.
    pub fn all(base: Base, dim: usize) -> AutoSet {
        AutoSet::from_closed_dfa(Dfa::universal(Alphabet::sigma_pm(base, dim)), base, dim)
    }

    /// The singleton {a}.
    pub fn singleton(base: Base, a: &[BigInt]) -> AutoSet {
        let dim = a.len();
        let alphabet = Alphabet::sigma_pm(base, dim);
        let rep = canonical_rep(a, base);
        let syms: Vec<usize> = rep
            .letters()
            .iter()
            .map(|l| alphabet.index_of_letter(l).expect("canonical letters are standard"))
            .collect();
        let raw = Dfa::single_word(alphabet, &syms);
        AutoSet::from_raw(&raw, base, dim).expect("singleton closure")
    }

    /// The natural numbers as a subset of Z (dimension 1).
    pub fn nat(base: Base) -> AutoSet {
        let sigma = Alphabet::sigma_nonneg(base, 1);
        let raw = Dfa::universal(sigma);
        AutoSet::from_raw(&raw, base, 1).expect("nat closure")
    }

    pub fn member(&self, a: &[BigInt]) -> bool {
        assert_eq!(a.len(), self.dim, "member requires a dim-{} tuple", self.dim);
        let rep = canonical_rep(a, self.base);
        self.dfa.accepts(&rep).expect("canonical letters are standard signed")
    }

    pub fn member_scalar(&self, a: &BigInt) -> bool {
        self.member(std::slice::from_ref(a))
    }

    pub fn is_empty_set(&self) -> bool {
        self.dfa.language_is_empty()
    }

    fn check_compatible(&self, other: &AutoSet) -> Result<(), AutoSetError> {
        if self.base != other.base {
            return Err(AutoSetError::BaseMismatch(self.base, other.base));
        }
        if self.dim != other.dim {
            return Err(AutoSetError::DimMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn union(&self, other: &AutoSet) -> Result<AutoSet, AutoSetError> {
        self.check_compatible(other)?;
        Ok(AutoSet::from_closed_dfa(self.dfa.union(&other.dfa)?, self.base, self.dim))
    }

    pub fn intersection(&self, other: &AutoSet) -> Result<AutoSet, AutoSetError> {
        self.check_compatible(other)?;
        Ok(AutoSet::from_closed_dfa(self.dfa.intersection(&other.dfa)?, self.base, self.dim))
    }

    pub fn difference(&self, other: &AutoSet) -> Result<AutoSet, AutoSetError> {
        self.check_compatible(other)?;
        Ok(AutoSet::from_closed_dfa(self.dfa.difference(&other.dfa)?, self.base, self.dim))
    }

    pub fn symmetric_difference(&self, other: &AutoSet) -> Result<AutoSet, AutoSetError> {
        self.check_compatible(other)?;
        Ok(AutoSet::from_closed_dfa(
            self.dfa.symmetric_difference(&other.dfa)?,
            self.base,
            self.dim,
        ))
    }

    pub fn complement(&self) -> AutoSet {
        AutoSet::from_closed_dfa(self.dfa.complement(), self.base, self.dim)
    }

    /// {-a : a in A}, by letterwise digit negation; the standard signed
    /// alphabet is symmetric, so this is a relabeling.
    pub fn negate(&self) -> AutoSet {
        let alphabet = self.dfa.alphabet().clone();
        let width = alphabet.len();
        let mut delta = vec![vec![0usize; width]; self.dfa.num_states()];
        for q in 0..self.dfa.num_states() {
            for a in 0..width {
                let l = alphabet.sym(a).letter().unwrap();
                let neg = alphabet.index_of_letter(&l.negate()).expect("symmetric alphabet");
                delta[q][neg] = self.dfa.step(q, a);
            }
        }
        let finals = (0..self.dfa.num_states()).map(|q| self.dfa.is_final(q)).collect();
        AutoSet::from_closed_dfa(
            Dfa::new(alphabet, delta, self.dfa.start(), finals),
            self.base,
            self.dim,
        )
    }

    /// c + A, on the bounded-carry machine with initial carry c.
    pub fn translate(&self, c: &[BigInt]) -> Result<AutoSet, AutoSetError> {
        if c.len() != self.dim {
            return Err(AutoSetError::DimMismatch(c.len(), self.dim));
        }
        let target = Alphabet::sigma_pm(self.base, self.dim);
        let dfa = value_recognizer(&self.dfa, self.base, c, &target)?;
        Ok(AutoSet { base: self.base, dim: self.dim, dfa })
    }

    pub fn translate_scalar(&self, c: &BigInt) -> Result<AutoSet, AutoSetError> {
        self.translate(std::slice::from_ref(c))
    }

    /// {a + b : a in A, b in B}: the three-track synchronized adder with
    /// carries in a bounded interval, projected to the sum track, then
    /// re-closed under value semantics.
    pub fn minkowski_sum(&self, other: &AutoSet) -> Result<AutoSet, AutoSetError> {
        self.check_compatible(other)?;
        let target = Alphabet::sigma_pm(self.base, self.dim);
        let letters: Vec<&Letter> =
            target.syms().iter().map(|s| s.letter().unwrap()).collect();
        let zero = vec![BigInt::zero(); self.dim];

        let mut ids: BTreeMap<(usize, usize, Carry), usize> = BTreeMap::new();
        let mut order: Vec<(usize, usize, Carry)> = Vec::new();
        let mut transitions: Vec<(usize, usize, usize)> = Vec::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        let start = (self.dfa.start(), other.dfa.start(), zero.clone());
        ids.insert(start.clone(), 0);
        order.push(start);
        queue.push_back(0);
        while let Some(id) = queue.pop_front() {
            let (qa, qb, carry) = order[id].clone();
            for (oi, lo) in letters.iter().enumerate() {
                for (ia, la) in letters.iter().enumerate() {
                    for (ib, lb) in letters.iter().enumerate() {
                        if let Some(c2) = carry_sub_div(self.base, &carry, Some(la), Some(lb), lo) {
                            let key = (self.dfa.step(qa, ia), other.dfa.step(qb, ib), c2);
                            let next = order.len();
                            let tid = *ids.entry(key.clone()).or_insert_with(|| {
                                order.push(key);
                                queue.push_back(next);
                                next
                            });
                            transitions.push((id, oi, tid));
                        }
                    }
                }
            }
            if order.len() > STATE_LIMIT {
                return Err(AutomatonError::TooLarge(order.len(), STATE_LIMIT).into());
            }
        }
        let mut nfa = Nfa::new(target, order.len());
        nfa.set_start(0);
        for (f, s, t) in transitions {
            nfa.add_transition(f, s, t);
        }
        for (id, (qa, qb, carry)) in order.iter().enumerate() {
            nfa.set_final(id, self.dfa.is_final(*qa) && other.dfa.is_final(*qb) && *carry == zero);
        }
        let projected = nfa.determinize()?.minimize();
        // The projection accepts at least one representation of every sum;
        // closure extends acceptance to all of them.
        AutoSet::from_raw(&projected, self.base, self.dim)
    }

    /// The recognizer restricted to the nonnegative digit alphabet. For
    /// subsets of N this is the classical representation language over
    /// Sigma.
    pub fn sigma_language(&self) -> Dfa {
        let sigma = Alphabet::sigma_nonneg(self.base, self.dim);
        let width = sigma.len();
        let mut delta = vec![vec![0usize; width]; self.dfa.num_states()];
        for q in 0..self.dfa.num_states() {
            for (i, s) in sigma.syms().iter().enumerate() {
                let full = self.dfa.alphabet().index_of(s).expect("sigma within sigma_pm");
                delta[q][i] = self.dfa.step(q, full);
            }
        }
        let finals = (0..self.dfa.num_states()).map(|q| self.dfa.is_final(q)).collect();
        Dfa::new(sigma, delta, self.dfa.start(), finals).minimize()
    }

    /// The recognizer re-expressed over a larger letter alphabet, keeping
    /// value semantics: accepts w over `target` iff `[w]` is a member.
    pub fn extended_recognizer(&self, target: &Alphabet) -> Result<Dfa, AutoSetError> {
        value_recognizer(&self.dfa, self.base, &vec![BigInt::zero(); self.dim], target)
    }

    /// DFA over the signed alphabet accepting exactly the canonical
    /// representations: componentwise sign-consistent digits, and a nonzero
    /// final letter (the empty word stands for 0).
    pub fn canonical_words_dfa(base: Base, dim: usize) -> Dfa {
        let alphabet = Alphabet::sigma_pm(base, dim);
        let width = alphabet.len();
        // Sign modes per component: 0 undecided, 1 nonnegative, 2 nonpositive;
        // one extra bit for "last letter nonzero"; plus a dead state.
        let mode_count = 3usize.pow(dim as u32);
        let states = mode_count * 2 + 1;
        let dead = states - 1;
        let encode = |modes: &[u8], nz: bool| -> usize {
            let mut m = 0usize;
            for &x in modes {
                m = m * 3 + x as usize;
            }
            m * 2 + usize::from(nz)
        };
        let decode = |q: usize| -> (Vec<u8>, bool) {
            let nz = q % 2 == 1;
            let mut m = q / 2;
            let mut modes = vec![0u8; dim];
            for i in (0..dim).rev() {
                modes[i] = (m % 3) as u8;
                m /= 3;
            }
            (modes, nz)
        };
        let mut delta = vec![vec![dead; width]; states];
        for q in 0..states - 1 {
            let (modes, _) = decode(q);
            'letters: for a in 0..width {
                let l = alphabet.sym(a).letter().unwrap();
                let mut next_modes = modes.clone();
                let mut nonzero = false;
                for (i, e) in l.0.iter().enumerate() {
                    if e.is_zero() {
                        continue;
                    }
                    nonzero = true;
                    let want = if e.is_negative() { 2u8 } else { 1u8 };
                    match next_modes[i] {
                        0 => next_modes[i] = want,
                        m if m == want => {}
                        _ => continue 'letters,
                    }
                }
                delta[q][a] = encode(&next_modes, nonzero);
            }
        }
        let finals: Vec<bool> = (0..states)
            .map(|q| q != dead && (q % 2 == 1 || q == encode(&vec![0u8; dim], false)))
            .collect();
        // Start: all modes undecided; the empty word (canonical rep of 0)
        // is accepted, and so is any word ending in a nonzero letter.
        Dfa::new(alphabet, delta, encode(&vec![0u8; dim], false), finals)
    }

    /// The canonical representation language of the set: exactly one word
    /// per member.
    pub fn canonical_language(&self) -> Result<Dfa, AutoSetError> {
        Ok(self
            .dfa
            .intersection(&AutoSet::canonical_words_dfa(self.base, self.dim))?
            .minimize())
    }

    /// Sparsity of the set, decided on the canonical representation
    /// language (the all-representations language of an infinite set is
    /// never sparse: large members have many signed representations).
    pub fn sparsity(&self) -> Result<SparsityVerdict, AutoSetError> {
        Ok(is_sparse(&self.canonical_language()?)?)
    }

    pub fn is_sparse_set(&self) -> Result<bool, AutoSetError> {
        Ok(self.sparsity()?.is_sparse())
    }
}

/// Certificate for genericity of a subset of N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NatGenericity {
    /// Finitely many translates A + t (t in `offsets`) cover N; the offsets
    /// come from the empirically measured maximal gap and are re-verified
    /// on an initial segment.
    Generic { offsets: Vec<BigInt> },
    /// No word of length in offset + period*N ends in the given suffix.
    NonGeneric { witness: ForbiddenSuffix },
}

impl NatGenericity {
    pub fn is_generic(&self) -> bool {
        matches!(self, NatGenericity::Generic { .. })
    }
}

/// Decides whether `a` (which must satisfy A ⊆ N) is generic in N: finitely
/// many translates, possibly negative, cover N.
pub fn is_generic_in_nat(a: &AutoSet) -> Result<NatGenericity, AutoSetError> {
    if a.dim() != 1 {
        return Err(AutoSetError::NotScalar(a.dim()));
    }
    let nat = AutoSet::nat(a.base());
    if !a.difference(&nat)?.is_empty_set() {
        return Err(AutoSetError::NotInNat);
    }
    let sigma_dfa = a.sigma_language();
    if let Some(witness) = forbidden_suffix_witness(&sigma_dfa)? {
        debug_assert!(recheck_witness(&sigma_dfa, &witness, 3).unwrap_or(false));
        return Ok(NatGenericity::NonGeneric { witness });
    }
    // No witness: gaps are bounded. Measure the maximal gap empirically and
    // return the covering offsets 0, -1, ..., -G: a point x is covered by
    // A + (x - a) for the next member a >= x, and a - x is at most the
    // initial member or one less than the largest inter-member distance.
    let mut bound: u64 = 20_000;
    loop {
        let mut needed: u64 = 0;
        let mut last: Option<u64> = None;
        for x in 0..=bound {
            if a.member_scalar(&BigInt::from(x)) {
                let this = match last {
                    None => x,
                    Some(prev) => (x - prev).saturating_sub(1),
                };
                needed = needed.max(this);
                last = Some(x);
            }
        }
        let tail = match last {
            None => bound + 1,
            Some(prev) => bound - prev,
        };
        if (needed.max(tail) + 1) * 4 <= bound || bound >= 1_000_000 {
            let g = needed.max(tail);
            let offsets = (0..=g).map(|t| -BigInt::from(t)).collect();
            return Ok(NatGenericity::Generic { offsets });
        }
        bound *= 4;
    }
}

/// Genericity in Z: both A ∩ N and (-A) ∩ N must be generic in N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZGenericity {
    Generic { pos_offsets: Vec<BigInt>, neg_offsets: Vec<BigInt> },
    NonGeneric { failing_tail_negated: bool, witness: ForbiddenSuffix },
}

impl ZGenericity {
    pub fn is_generic(&self) -> bool {
        matches!(self, ZGenericity::Generic { .. })
    }
}

pub fn is_generic_in_z(a: &AutoSet) -> Result<ZGenericity, AutoSetError> {
    if a.dim() != 1 {
        return Err(AutoSetError::NotScalar(a.dim()));
    }
    let nat = AutoSet::nat(a.base());
    let pos = a.intersection(&nat)?;
    let neg = a.negate().intersection(&nat)?;
    let pos_side = is_generic_in_nat(&pos)?;
    let neg_side = is_generic_in_nat(&neg)?;
    match (pos_side, neg_side) {
        (NatGenericity::Generic { offsets: p }, NatGenericity::Generic { offsets: n }) => {
            Ok(ZGenericity::Generic { pos_offsets: p, neg_offsets: n })
        }
        (NatGenericity::NonGeneric { witness }, _) => {
            Ok(ZGenericity::NonGeneric { failing_tail_negated: false, witness })
        }
        (_, NatGenericity::NonGeneric { witness }) => {
            Ok(ZGenericity::NonGeneric { failing_tail_negated: true, witness })
        }
    }
}

/// The relation a ladder certifies, built from membership instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LadderRelation {
    /// x + y in A, with x, y tuples of the set's dimension.
    Plain,
    /// OR over offsets t of (x + y + t in A); scalar points.
    OffsetUnion(Vec<BigInt>),
    /// AND over components k of (x_k + y in A) or its negation per sign;
    /// rows are tuples with one entry per conjunct, columns are scalars.
    SignedConjunction(Vec<bool>),
}

/// An N-ladder: rows a_0..a_N and columns b_0..b_N with
/// relation(a_i, b_j) holding exactly when i <= j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ladder {
    pub rows: Vec<Vec<BigInt>>,
    pub cols: Vec<Vec<BigInt>>,
    pub relation: LadderRelation,
}

impl Ladder {
    pub fn size(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    /// Evaluates the certified relation on one (row, col) pair.
    pub fn relation_holds(&self, set: &AutoSet, row: &[BigInt], col: &[BigInt]) -> bool {
        match &self.relation {
            LadderRelation::Plain => {
                let sum: Vec<BigInt> = row.iter().zip(col).map(|(a, b)| a + b).collect();
                set.member(&sum)
            }
            LadderRelation::OffsetUnion(offsets) => {
                assert_eq!(row.len(), 1);
                assert_eq!(col.len(), 1);
                offsets.iter().any(|t| set.member_scalar(&(&row[0] + &col[0] + t)))
            }
            LadderRelation::SignedConjunction(signs) => {
                assert_eq!(row.len(), signs.len());
                assert_eq!(col.len(), 1);
                signs
                    .iter()
                    .zip(row)
                    .all(|(&sign, x)| set.member_scalar(&(x + &col[0])) == sign)
            }
        }
    }

    /// Re-checks the full (N+1)^2 membership pattern against the set.
    pub fn verify(&self, set: &AutoSet) -> bool {
        if self.rows.len() != self.cols.len() || self.rows.is_empty() {
            return false;
        }
        for (i, row) in self.rows.iter().enumerate() {
            for (j, col) in self.cols.iter().enumerate() {
                if self.relation_holds(set, row, col) != (i <= j) {
                    return false;
                }
            }
        }
        true
    }

    /// The full membership bit matrix, row-major, for audit output.
    pub fn bits(&self, set: &AutoSet) -> Vec<Vec<bool>> {
        self.rows
            .iter()
            .map(|r| self.cols.iter().map(|c| self.relation_holds(set, r, c)).collect())
            .collect()
    }
}

/// Bounded search for a plain x + y in A ladder of size `n`. Absence is not
/// evidence of stability; returned ladders are always verified.
pub fn ladder_search(set: &AutoSet, n: usize, bound: &BigInt, seed: u64) -> Option<Ladder> {
    assert_eq!(set.dim(), 1, "plain ladder search is one-dimensional");
    let d = set.base().big();
    let mut log_bound = 0usize;
    {
        let mut p = BigInt::one();
        while &p <= bound {
            p *= &d;
            log_bound += 1;
        }
    }
    let max_exp = log_bound.saturating_sub(1);
    let n_rows = n + 1;

    let verify_family = |rows: &[BigInt], cols: &[BigInt]| -> bool {
        for (i, r) in rows.iter().enumerate() {
            for (j, c) in cols.iter().enumerate() {
                if set.member_scalar(&(r + c)) != (i <= j) {
                    return false;
                }
            }
        }
        true
    };

    // Family 1: exponent grids c * d^(s +/- i) with small multipliers and
    // offsets, both orientations.
    let d_small = set.base().get() as i64;
    let mut multipliers: Vec<i64> = Vec::new();
    for c in 1..=(2 * d_small).min(12) {
        multipliers.push(c);
        multipliers.push(-c);
    }
    if max_exp >= n_rows {
        for &c1 in &multipliers {
            for &c2 in &multipliers {
                for dir1 in [1i64, -1] {
                    for dir2 in [1i64, -1] {
                        for s1 in 0..=2usize {
                            for s2 in 0..=2usize {
                                if max_exp < n_rows + s1.max(s2) + 1 {
                                    continue;
                                }
                                let point = |c: i64, dir: i64, s: usize, i: usize| -> BigInt {
                                    let e = if dir > 0 { s + i } else { s + n - i };
                                    BigInt::from(c) * set.base().pow(e)
                                };
                                let rows: Vec<BigInt> =
                                    (0..n_rows).map(|i| point(c1, dir1, s1, i)).collect();
                                let cols: Vec<BigInt> =
                                    (0..n_rows).map(|j| point(c2, dir2, s2, j)).collect();
                                if verify_family(&rows, &cols) {
                                    return Some(Ladder {
                                        rows: rows.into_iter().map(|v| vec![v]).collect(),
                                        cols: cols.into_iter().map(|v| vec![v]).collect(),
                                        relation: LadderRelation::Plain,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Family 2: arithmetic progressions (covers order-like relations).
    for step_r in [1i64, -1, 2, -2, d_small, -d_small] {
        for step_c in [1i64, -1, 2, -2, d_small, -d_small] {
            for off_r in -3i64..=3 {
                for off_c in -3i64..=3 {
                    let rows: Vec<BigInt> =
                        (0..n_rows).map(|i| BigInt::from(off_r + step_r * i as i64)).collect();
                    let cols: Vec<BigInt> =
                        (0..n_rows).map(|j| BigInt::from(off_c + step_c * j as i64)).collect();
                    if verify_family(&rows, &cols) {
                        return Some(Ladder {
                            rows: rows.into_iter().map(|v| vec![v]).collect(),
                            cols: cols.into_iter().map(|v| vec![v]).collect(),
                            relation: LadderRelation::Plain,
                        });
                    }
                }
            }
        }
    }

    // Family 3: mixed exponent rows with translated exponent columns,
    // shuffled by the seed (order only; never soundness).
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut shifts: Vec<(i64, i64)> = Vec::new();
    for t1 in -2i64..=2 {
        for t2 in -2i64..=2 {
            shifts.push((t1, t2));
        }
    }
    shifts.shuffle(&mut rng);
    if max_exp >= n_rows + 3 {
        for &(t1, t2) in &shifts {
            for &c1 in multipliers.iter().take(6) {
                for &c2 in multipliers.iter().take(6) {
                    for dir in [1i64, -1] {
                        let rows: Vec<BigInt> = (0..n_rows)
                            .map(|i| {
                                let e = if dir > 0 { i + 2 } else { n - i + 2 };
                                BigInt::from(c1) * set.base().pow(e) + BigInt::from(t1)
                            })
                            .collect();
                        let cols: Vec<BigInt> = (0..n_rows)
                            .map(|j| {
                                let e = if dir > 0 { j + 2 } else { n - j + 2 };
                                BigInt::from(c2) * set.base().pow(e) + BigInt::from(t2)
                            })
                            .collect();
                        if verify_family(&rows, &cols) {
                            return Some(Ladder {
                                rows: rows.into_iter().map(|v| vec![v]).collect(),
                                cols: cols.into_iter().map(|v| vec![v]).collect(),
                                relation: LadderRelation::Plain,
                            });
                        }
                    }
                }
            }
        }
    }
    None
}
