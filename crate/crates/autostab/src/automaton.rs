//! Deterministic and nondeterministic finite automata over finite letter
//! alphabets, with the decision procedures the rest of the crate builds on:
//! Boolean algebra, determinization, minimization, trimming, exact word
//! counting, and constructive pumping.
//!
//! Transition functions are total; complementation never needs a
//! totalization step because every constructor installs an explicit sink
//! when needed.

use crate::digits::{Base, Letter, Word};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::rc::Rc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AutomatonError {
    #[error("alphabet mismatch between automata")]
    AlphabetMismatch,
    #[error("letter {0} not in alphabet")]
    LetterOutsideAlphabet(String),
    #[error("unknown state {0}")]
    UnknownState(usize),
    #[error("word shorter than pumping length")]
    TooShortToPump,
    #[error("word not accepted")]
    NotAccepted,
    #[error("state explosion: {0} exceeds limit {1}")]
    TooLarge(usize, usize),
}

/// Hard cap on constructed state counts, to fail fast instead of thrashing.
pub const STATE_LIMIT: usize = 400_000;

/// An alphabet symbol: an integer-tuple letter, or the reserved separator
/// used internally by the forbidden-suffix construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Letter(Letter),
    Sep,
}

impl Sym {
    pub fn letter(&self) -> Option<&Letter> {
        match self {
            Sym::Letter(l) => Some(l),
            Sym::Sep => None,
        }
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::Letter(l) => write!(f, "{}", l),
            Sym::Sep => write!(f, "$"),
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
struct AlphabetInner {
    dim: usize,
    syms: Vec<Sym>,
    index: BTreeMap<Sym, usize>,
}

/// An ordered, deduplicated finite set of symbols shared by automata.
#[derive(Debug, Clone)]
pub struct Alphabet(Rc<AlphabetInner>);

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        Rc::ptr_eq(&self.0, &other.0) || self.0.syms == other.0.syms
    }
}
impl Eq for Alphabet {}

impl Alphabet {
    pub fn new(dim: usize, mut syms: Vec<Sym>) -> Alphabet {
        syms.sort();
        syms.dedup();
        let index = syms.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Alphabet(Rc::new(AlphabetInner { dim, syms, index }))
    }

    pub fn from_letters(dim: usize, letters: Vec<Letter>) -> Alphabet {
        Alphabet::new(dim, letters.into_iter().map(Sym::Letter).collect())
    }

    /// The standard signed alphabet: all m-tuples with entries in [-d+1, d-1].
    pub fn sigma_pm(base: Base, dim: usize) -> Alphabet {
        Alphabet::from_letters(dim, tuples_in_range(-(base.get() as i64) + 1, base.get() as i64 - 1, dim))
    }

    /// The standard nonnegative alphabet: all m-tuples with entries in [0, d-1].
    pub fn sigma_nonneg(base: Base, dim: usize) -> Alphabet {
        Alphabet::from_letters(dim, tuples_in_range(0, base.get() as i64 - 1, dim))
    }

    /// This alphabet plus the reserved separator.
    pub fn with_separator(&self) -> Alphabet {
        let mut syms = self.0.syms.clone();
        syms.push(Sym::Sep);
        Alphabet::new(self.0.dim, syms)
    }

    /// Union of the symbol sets; dimensions must agree.
    pub fn merge(&self, other: &Alphabet) -> Alphabet {
        assert_eq!(self.dim(), other.dim());
        let mut syms = self.0.syms.clone();
        syms.extend(other.0.syms.iter().cloned());
        Alphabet::new(self.0.dim, syms)
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn len(&self) -> usize {
        self.0.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.syms.is_empty()
    }

    pub fn syms(&self) -> &[Sym] {
        &self.0.syms
    }

    pub fn sym(&self, i: usize) -> &Sym {
        &self.0.syms[i]
    }

    pub fn index_of(&self, s: &Sym) -> Option<usize> {
        self.0.index.get(s).copied()
    }

    pub fn index_of_letter(&self, l: &Letter) -> Option<usize> {
        self.0.index.get(&Sym::Letter(l.clone())).copied()
    }

    pub fn contains_separator(&self) -> bool {
        self.0.index.contains_key(&Sym::Sep)
    }

    /// True when every symbol is a letter with entries in [0, d-1].
    pub fn is_nonneg_digits(&self, base: Base) -> bool {
        self.0.syms.iter().all(|s| match s {
            Sym::Letter(l) => l.is_standard_nonneg(base),
            Sym::Sep => false,
        })
    }
}

fn tuples_in_range(lo: i64, hi: i64, dim: usize) -> Vec<Letter> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        let mut next = Vec::new();
        for t in &out {
            for v in lo..=hi {
                let mut t2: Vec<num_bigint::BigInt> = t.clone();
                t2.push(v.into());
                next.push(t2);
            }
        }
        out = next;
    }
    out.into_iter().map(Letter).collect()
}

/// A total deterministic finite automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    delta: Vec<Vec<usize>>,
    start: usize,
    finals: Vec<bool>,
}

impl Dfa {
    pub fn new(
        alphabet: Alphabet,
        delta: Vec<Vec<usize>>,
        start: usize,
        finals: Vec<bool>,
    ) -> Dfa {
        let n = delta.len();
        assert!(start < n, "start state out of range");
        assert_eq!(finals.len(), n);
        for row in &delta {
            assert_eq!(row.len(), alphabet.len(), "transition table must be total");
            for &t in row {
                assert!(t < n, "transition target out of range");
            }
        }
        Dfa { alphabet, delta, start, finals }
    }

    /// The automaton rejecting everything.
    pub fn empty(alphabet: Alphabet) -> Dfa {
        let width = alphabet.len();
        Dfa::new(alphabet, vec![vec![0; width]], 0, vec![false])
    }

    /// The automaton accepting every word.
    pub fn universal(alphabet: Alphabet) -> Dfa {
        let width = alphabet.len();
        Dfa::new(alphabet, vec![vec![0; width]], 0, vec![true])
    }

    /// Accepts exactly the given symbol-index word.
    pub fn single_word(alphabet: Alphabet, word: &[usize]) -> Dfa {
        let width = alphabet.len();
        let n = word.len() + 2; // path + sink
        let sink = n - 1;
        let mut delta = vec![vec![sink; width]; n];
        for (i, &s) in word.iter().enumerate() {
            delta[i][s] = i + 1;
        }
        let mut finals = vec![false; n];
        finals[word.len()] = true;
        Dfa::new(alphabet, delta, 0, finals)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_states()).filter(|&q| self.finals[q])
    }

    pub fn step(&self, q: usize, sym: usize) -> usize {
        self.delta[q][sym]
    }

    pub fn run(&self, q: usize, word: &[usize]) -> usize {
        word.iter().fold(q, |s, &a| self.delta[s][a])
    }

    pub fn accepts_syms(&self, word: &[usize]) -> bool {
        self.finals[self.run(self.start, word)]
    }

    /// Converts a letter word into symbol indices, rejecting foreign letters.
    pub fn word_to_syms(&self, w: &Word) -> Result<Vec<usize>, AutomatonError> {
        w.letters()
            .iter()
            .map(|l| {
                self.alphabet
                    .index_of_letter(l)
                    .ok_or_else(|| AutomatonError::LetterOutsideAlphabet(l.to_string()))
            })
            .collect()
    }

    pub fn accepts(&self, w: &Word) -> Result<bool, AutomatonError> {
        Ok(self.accepts_syms(&self.word_to_syms(w)?))
    }

    /// Symbol-index word reconstructed as a letter word.
    pub fn syms_to_word(&self, base: Base, syms: &[usize]) -> Word {
        let letters = syms
            .iter()
            .map(|&i| self.alphabet.sym(i).letter().expect("separator in letter word").clone())
            .collect();
        Word::new(base, self.alphabet.dim(), letters).unwrap()
    }

    fn require_same_alphabet(&self, other: &Dfa) -> Result<(), AutomatonError> {
        if self.alphabet != other.alphabet {
            return Err(AutomatonError::AlphabetMismatch);
        }
        Ok(())
    }

    fn product(&self, other: &Dfa, op: impl Fn(bool, bool) -> bool) -> Result<Dfa, AutomatonError> {
        self.require_same_alphabet(other)?;
        let width = self.alphabet.len();
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut order: Vec<(usize, usize)> = Vec::new();
        let mut delta: Vec<Vec<usize>> = Vec::new();
        let mut queue = VecDeque::new();
        index.insert((self.start, other.start), 0);
        order.push((self.start, other.start));
        queue.push_back((self.start, other.start));
        while let Some((p, q)) = queue.pop_front() {
            let mut row = Vec::with_capacity(width);
            for a in 0..width {
                let t = (self.delta[p][a], other.delta[q][a]);
                let id = *index.entry(t).or_insert_with(|| {
                    order.push(t);
                    queue.push_back(t);
                    order.len() - 1
                });
                row.push(id);
            }
            delta.push(row);
            if delta.len() > STATE_LIMIT {
                return Err(AutomatonError::TooLarge(delta.len(), STATE_LIMIT));
            }
        }
        let finals = order.iter().map(|&(p, q)| op(self.finals[p], other.finals[q])).collect();
        Ok(Dfa::new(self.alphabet.clone(), delta, 0, finals))
    }

    pub fn intersection(&self, other: &Dfa) -> Result<Dfa, AutomatonError> {
        self.product(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Dfa) -> Result<Dfa, AutomatonError> {
        self.product(other, |a, b| a || b)
    }

    pub fn difference(&self, other: &Dfa) -> Result<Dfa, AutomatonError> {
        self.product(other, |a, b| a && !b)
    }

    pub fn symmetric_difference(&self, other: &Dfa) -> Result<Dfa, AutomatonError> {
        self.product(other, |a, b| a != b)
    }

    /// Complement by flipping finals; sound because transitions are total.
    pub fn complement(&self) -> Dfa {
        let mut c = self.clone();
        for f in &mut c.finals {
            *f = !*f;
        }
        c
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::new();
        seen[self.start] = true;
        queue.push_back(self.start);
        while let Some(q) = queue.pop_front() {
            for &t in &self.delta[q] {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// States from which some final state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for q in 0..n {
            for &t in &self.delta[q] {
                rev[t].push(q);
            }
        }
        let mut live = vec![false; n];
        let mut queue = VecDeque::new();
        for q in 0..n {
            if self.finals[q] {
                live[q] = true;
                queue.push_back(q);
            }
        }
        while let Some(q) = queue.pop_front() {
            for &p in &rev[q] {
                if !live[p] {
                    live[p] = true;
                    queue.push_back(p);
                }
            }
        }
        live
    }

    pub fn is_dead(&self, q: usize) -> bool {
        !self.coreachable()[q]
    }

    pub fn language_is_empty(&self) -> bool {
        !self.coreachable()[self.start]
    }

    /// Keeps reachable live states and redirects everything else to one
    /// canonical sink, so the result stays total.
    pub fn trim(&self) -> Dfa {
        let reach = self.reachable();
        let live = self.coreachable();
        let keep: Vec<usize> =
            (0..self.num_states()).filter(|&q| reach[q] && live[q]).collect();
        let width = self.alphabet.len();
        if keep.is_empty() {
            return Dfa::empty(self.alphabet.clone());
        }
        let mut map = vec![usize::MAX; self.num_states()];
        for (i, &q) in keep.iter().enumerate() {
            map[q] = i;
        }
        let sink = keep.len();
        let needs_sink = keep
            .iter()
            .any(|&q| self.delta[q].iter().any(|&t| map[t] == usize::MAX));
        let n = keep.len() + if needs_sink { 1 } else { 0 };
        let mut delta = vec![vec![0; width]; n];
        let mut finals = vec![false; n];
        for &q in &keep {
            finals[map[q]] = self.finals[q];
            for a in 0..width {
                let t = self.delta[q][a];
                delta[map[q]][a] = if map[t] == usize::MAX { sink } else { map[t] };
            }
        }
        if needs_sink {
            for a in 0..width {
                delta[sink][a] = sink;
            }
        }
        Dfa::new(self.alphabet.clone(), delta, map[self.start], finals)
    }

    /// Number of live (reachable and co-reachable) states.
    pub fn live_state_count(&self) -> usize {
        let reach = self.reachable();
        let live = self.coreachable();
        (0..self.num_states()).filter(|&q| reach[q] && live[q]).count()
    }

    /// The unique minimal DFA, in BFS-canonical state order.
    pub fn minimize(&self) -> Dfa {
        let t = self.trim();
        let n = t.num_states();
        let width = t.alphabet.len();
        // Moore partition refinement.
        let mut class: Vec<usize> = t.finals.iter().map(|&f| usize::from(f)).collect();
        loop {
            let mut signature: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
            let mut next = vec![0usize; n];
            for q in 0..n {
                let sig = (class[q], t.delta[q].iter().map(|&s| class[s]).collect::<Vec<_>>());
                let fresh = signature.len();
                next[q] = *signature.entry(sig).or_insert(fresh);
            }
            if next == class {
                break;
            }
            class = next;
        }
        let num_classes = class.iter().copied().max().unwrap_or(0) + 1;
        let mut delta = vec![vec![0; width]; num_classes];
        let mut finals = vec![false; num_classes];
        for q in 0..n {
            finals[class[q]] = t.finals[q];
            for a in 0..width {
                delta[class[q]][a] = class[t.delta[q][a]];
            }
        }
        Dfa::new(t.alphabet.clone(), delta, class[t.start], finals).canonical_order()
    }

    /// Renumbers states in BFS discovery order from the start; two
    /// state-isomorphic DFAs become structurally equal.
    pub fn canonical_order(&self) -> Dfa {
        let n = self.num_states();
        let width = self.alphabet.len();
        let mut map = vec![usize::MAX; n];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        map[self.start] = 0;
        order.push(self.start);
        queue.push_back(self.start);
        while let Some(q) = queue.pop_front() {
            for a in 0..width {
                let t = self.delta[q][a];
                if map[t] == usize::MAX {
                    map[t] = order.len();
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
        // Unreachable states are dropped (minimize/trim callers have none).
        let m = order.len();
        let mut delta = vec![vec![0; width]; m];
        let mut finals = vec![false; m];
        for (i, &q) in order.iter().enumerate() {
            finals[i] = self.finals[q];
            for a in 0..width {
                delta[i][a] = map[self.delta[q][a]];
            }
        }
        Dfa::new(self.alphabet.clone(), delta, 0, finals)
    }

    pub fn language_equal(&self, other: &Dfa) -> Result<bool, AutomatonError> {
        Ok(self.symmetric_difference(other)?.language_is_empty())
    }

    /// Number of accepted words of length exactly `n`, by transfer-matrix DP.
    pub fn count_words(&self, n: usize) -> BigUint {
        let m = self.num_states();
        let mut counts = vec![BigUint::zero(); m];
        counts[self.start] = BigUint::one();
        for _ in 0..n {
            let mut next = vec![BigUint::zero(); m];
            for q in 0..m {
                if counts[q].is_zero() {
                    continue;
                }
                for &t in &self.delta[q] {
                    next[t] += &counts[q];
                }
            }
            counts = next;
        }
        (0..m).filter(|&q| self.finals[q]).map(|q| counts[q].clone()).sum()
    }

    /// Pumping length: the live state count of the trimmed automaton (the
    /// canonical sink added to keep trim total does not count). Runs of
    /// accepted words stay within live states, so this bound is sound.
    pub fn pumping_length(&self) -> usize {
        self.live_state_count().max(1)
    }

    /// Splits an accepted word at the first repeated state of its run:
    /// returns (u, v, w) with v nonempty, |uv| <= pumping length, and
    /// u v^k w accepted for every k.
    pub fn pump_decompose(&self, word: &[usize]) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>), AutomatonError> {
        if !self.accepts_syms(word) {
            return Err(AutomatonError::NotAccepted);
        }
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        let mut q = self.start;
        seen.insert(q, 0);
        for (i, &a) in word.iter().enumerate() {
            q = self.delta[q][a];
            if let Some(&j) = seen.get(&q) {
                return Ok((word[..j].to_vec(), word[j..=i].to_vec(), word[i + 1..].to_vec()));
            }
            seen.insert(q, i + 1);
        }
        Err(AutomatonError::TooShortToPump)
    }

    /// The loop language L_q: words taking state q back to q. Recognized by
    /// the same transition table with start and unique final at q.
    pub fn loop_language(&self, q: usize) -> Result<Dfa, AutomatonError> {
        if q >= self.num_states() {
            return Err(AutomatonError::UnknownState(q));
        }
        let mut finals = vec![false; self.num_states()];
        finals[q] = true;
        Ok(Dfa::new(self.alphabet.clone(), self.delta.clone(), q, finals))
    }

    /// True when the language is infinite: some live state lies on a cycle.
    pub fn language_infinite(&self) -> bool {
        let t = self.trim();
        let live = t.coreachable();
        // colors: 0 unvisited, 1 on stack, 2 done
        let mut color = vec![0u8; t.num_states()];
        for root in 0..t.num_states() {
            if !live[root] || color[root] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            color[root] = 1;
            while let Some(&mut (q, ref mut ei)) = stack.last_mut() {
                if *ei < t.alphabet.len() {
                    let a = *ei;
                    *ei += 1;
                    let to = t.delta[q][a];
                    if !live[to] {
                        continue;
                    }
                    match color[to] {
                        0 => {
                            color[to] = 1;
                            stack.push((to, 0));
                        }
                        1 => return true,
                        _ => {}
                    }
                } else {
                    color[q] = 2;
                    stack.pop();
                }
            }
        }
        false
    }

    /// Lexicographically least accepted word of length exactly `len`, if any.
    pub fn least_accepted_of_length(&self, len: usize) -> Option<Vec<usize>> {
        // backward DP: can state q accept with exactly r more letters?
        let n = self.num_states();
        let mut ok = vec![self.finals.clone()];
        for _ in 0..len {
            let prev = ok.last().unwrap();
            let mut cur = vec![false; n];
            for q in 0..n {
                cur[q] = self.delta[q].iter().any(|&t| prev[t]);
            }
            ok.push(cur);
        }
        if !ok[len][self.start] {
            return None;
        }
        let mut word = Vec::with_capacity(len);
        let mut q = self.start;
        for r in (0..len).rev() {
            let a = (0..self.alphabet.len()).find(|&a| ok[r][self.delta[q][a]])?;
            word.push(a);
            q = self.delta[q][a];
        }
        Some(word)
    }

    /// Shortest word (by symbol indices, lexicographically least among
    /// shortest) driving `from` to `to`.
    pub fn shortest_word_between(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.num_states()];
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::new();
        seen[from] = true;
        queue.push_back(from);
        while let Some(q) = queue.pop_front() {
            if q == to {
                let mut word = Vec::new();
                let mut cur = q;
                while cur != from || prev[cur].is_some() {
                    match prev[cur] {
                        Some((p, a)) => {
                            word.push(a);
                            cur = p;
                            if cur == from && prev[cur].is_none() {
                                break;
                            }
                        }
                        None => break,
                    }
                }
                word.reverse();
                return Some(word);
            }
            for a in 0..self.alphabet.len() {
                let t = self.delta[q][a];
                if !seen[t] {
                    seen[t] = true;
                    prev[t] = Some((q, a));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Shortest accepted continuation from state q, if q is live.
    pub fn shortest_accepting_extension(&self, q: usize) -> Option<Vec<usize>> {
        let finals: Vec<usize> = self.finals().collect();
        finals
            .into_iter()
            .filter_map(|f| self.shortest_word_between(q, f))
            .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
    }

    /// Shortest accepted word overall.
    pub fn shortest_accepted(&self) -> Option<Vec<usize>> {
        self.shortest_accepting_extension(self.start)
    }

    /// For each pair of distinct states, some word accepted from exactly one
    /// of them (the Myhill-Nerode separator); `None` for equivalent states.
    pub fn distinguishing_word(&self, p: usize, q: usize) -> Option<Vec<usize>> {
        if self.finals[p] != self.finals[q] {
            return Some(Vec::new());
        }
        let n = self.num_states();
        let pair = |a: usize, b: usize| a * n + b;
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n * n];
        let mut seen = vec![false; n * n];
        let start = pair(p, q);
        seen[start] = true;
        let mut queue = VecDeque::new();
        queue.push_back((p, q));
        while let Some((a, b)) = queue.pop_front() {
            for s in 0..self.alphabet.len() {
                let (ta, tb) = (self.delta[a][s], self.delta[b][s]);
                let t = pair(ta, tb);
                if seen[t] {
                    continue;
                }
                seen[t] = true;
                prev[t] = Some((pair(a, b), s));
                if self.finals[ta] != self.finals[tb] {
                    let mut word = Vec::new();
                    let mut cur = t;
                    while cur != start {
                        let (pr, sym) = prev[cur].unwrap();
                        word.push(sym);
                        cur = pr;
                    }
                    word.reverse();
                    return Some(word);
                }
                queue.push_back((ta, tb));
            }
        }
        None
    }

    /// All accepted symbol words of length at most `max_len`. Test oracle;
    /// prunes through live states, so the cost is driven by the number of
    /// accepted prefixes rather than the full alphabet tree.
    pub fn enumerate_accepted(&self, max_len: usize) -> Vec<Vec<usize>> {
        let live = self.coreachable();
        let mut out = Vec::new();
        let width = self.alphabet.len();
        let mut frontier: Vec<(Vec<usize>, usize)> = Vec::new();
        if live[self.start] {
            frontier.push((Vec::new(), self.start));
        }
        if self.finals[self.start] {
            out.push(Vec::new());
        }
        for _ in 0..max_len {
            let mut next = Vec::new();
            for (w, q) in &frontier {
                for a in 0..width {
                    let t = self.delta[*q][a];
                    if !live[t] {
                        continue;
                    }
                    let mut w2 = w.clone();
                    w2.push(a);
                    if self.finals[t] {
                        out.push(w2.clone());
                    }
                    next.push((w2, t));
                }
            }
            frontier = next;
        }
        out
    }
}

/// A nondeterministic finite automaton without epsilon moves; multiple
/// start states allowed.
#[derive(Debug, Clone)]
pub struct Nfa {
    alphabet: Alphabet,
    delta: Vec<Vec<BTreeSet<usize>>>,
    starts: BTreeSet<usize>,
    finals: Vec<bool>,
}

impl Nfa {
    pub fn new(alphabet: Alphabet, num_states: usize) -> Nfa {
        let width = alphabet.len();
        Nfa {
            alphabet,
            delta: vec![vec![BTreeSet::new(); width]; num_states],
            starts: BTreeSet::new(),
            finals: vec![false; num_states],
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn add_state(&mut self) -> usize {
        self.delta.push(vec![BTreeSet::new(); self.alphabet.len()]);
        self.finals.push(false);
        self.delta.len() - 1
    }

    pub fn set_start(&mut self, q: usize) {
        self.starts.insert(q);
    }

    pub fn set_final(&mut self, q: usize, f: bool) {
        self.finals[q] = f;
    }

    pub fn add_transition(&mut self, from: usize, sym: usize, to: usize) {
        self.delta[from][sym].insert(to);
    }

    pub fn accepts_syms(&self, word: &[usize]) -> bool {
        let mut cur = self.starts.clone();
        for &a in word {
            let mut next = BTreeSet::new();
            for &q in &cur {
                next.extend(self.delta[q][a].iter().copied());
            }
            cur = next;
        }
        cur.iter().any(|&q| self.finals[q])
    }

    /// Subset construction. The result is total (empty set is the sink).
    pub fn determinize(&self) -> Result<Dfa, AutomatonError> {
        let width = self.alphabet.len();
        let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        let mut delta: Vec<Vec<usize>> = Vec::new();
        let start_set: Vec<usize> = self.starts.iter().copied().collect();
        index.insert(start_set.clone(), 0);
        subsets.push(start_set);
        let mut queue = VecDeque::new();
        queue.push_back(0usize);
        while let Some(id) = queue.pop_front() {
            let subset = subsets[id].clone();
            let mut row = Vec::with_capacity(width);
            for a in 0..width {
                let mut t: BTreeSet<usize> = BTreeSet::new();
                for &q in &subset {
                    t.extend(self.delta[q][a].iter().copied());
                }
                let key: Vec<usize> = t.into_iter().collect();
                let next_id = match index.get(&key) {
                    Some(&i) => i,
                    None => {
                        let i = subsets.len();
                        index.insert(key.clone(), i);
                        subsets.push(key);
                        queue.push_back(i);
                        i
                    }
                };
                row.push(next_id);
            }
            delta.push(row);
            if delta.len() > STATE_LIMIT {
                return Err(AutomatonError::TooLarge(delta.len(), STATE_LIMIT));
            }
        }
        let finals = subsets
            .iter()
            .map(|s| s.iter().any(|&q| self.finals[q]))
            .collect();
        Ok(Dfa::new(self.alphabet.clone(), delta, 0, finals))
    }
}

/// All symbol words of length at most `max_len` over an alphabet of the
/// given width, in length-lexicographic order. Test oracle.
pub fn all_words(width: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for a in 0..width {
                let mut w2 = w.clone();
                w2.push(a);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::Base;

    fn b(d: u32) -> Base {
        Base::new(d).unwrap()
    }

    /// 0*10*2 over the letters {0,1,2} of the given alphabet.
    fn zero_one_zero_two(alphabet: Alphabet) -> Dfa {
        let i0 = alphabet.index_of_letter(&Letter::scalar(0)).unwrap();
        let i1 = alphabet.index_of_letter(&Letter::scalar(1)).unwrap();
        let i2 = alphabet.index_of_letter(&Letter::scalar(2)).unwrap();
        let width = alphabet.len();
        let sink = 3usize;
        let mut delta = vec![vec![sink; width]; 4];
        delta[0][i0] = 0;
        delta[0][i1] = 1;
        delta[1][i0] = 1;
        delta[1][i2] = 2;
        Dfa::new(alphabet, delta, 0, vec![false, false, true, false])
    }

    #[test]
    fn accepts_universal_and_parity() {
        let al = Alphabet::sigma_nonneg(b(2), 1);
        let uni = Dfa::universal(al.clone());
        assert!(uni.accepts_syms(&[0, 1, 0, 1]));
        assert!(uni.accepts_syms(&[]));

        // parity of length: 2 states
        let width = al.len();
        let parity = Dfa::new(
            al,
            vec![(0..width).map(|_| 1).collect(), (0..width).map(|_| 0).collect()],
            0,
            vec![true, false],
        );
        assert!(parity.accepts_syms(&[0, 0, 1, 1]));
        assert!(!parity.accepts_syms(&[0, 0, 1]));
    }

    #[test]
    fn accepts_rejects_foreign_letter() {
        let al = Alphabet::sigma_nonneg(b(3), 1);
        let d = Dfa::universal(al);
        let w = Word::scalar(b(3), &[5]);
        assert!(matches!(d.accepts(&w), Err(AutomatonError::LetterOutsideAlphabet(_))));
    }

    #[test]
    fn pattern_membership_matches_regex_oracle() {
        let al = Alphabet::sigma_nonneg(b(10), 1);
        let d = zero_one_zero_two(al);
        // oracle: word over digits matches 0*10*2
        let is_match = |digits: &[i64]| {
            let mut i = 0;
            while i < digits.len() && digits[i] == 0 {
                i += 1;
            }
            if i >= digits.len() || digits[i] != 1 {
                return false;
            }
            i += 1;
            while i < digits.len() && digits[i] == 0 {
                i += 1;
            }
            i + 1 == digits.len() && digits[i] == 2
        };
        for w in all_words(3, 6) {
            let digits: Vec<i64> = w.iter().map(|&x| x as i64).collect();
            let word = Word::scalar(b(10), &digits);
            assert_eq!(d.accepts(&word).unwrap(), is_match(&digits), "digits {digits:?}");
        }
    }

    #[test]
    fn boolean_ops_match_enumeration() {
        let al = Alphabet::sigma_nonneg(b(3), 1);
        let i0 = al.index_of_letter(&Letter::scalar(0)).unwrap();
        let i1 = al.index_of_letter(&Letter::scalar(1)).unwrap();
        let i2 = al.index_of_letter(&Letter::scalar(2)).unwrap();
        // 0*1 and 0*2
        let mk = |fin: usize| {
            let width = al.len();
            let mut delta = vec![vec![2; width]; 3];
            delta[0][i0] = 0;
            delta[0][fin] = 1;
            Dfa::new(al.clone(), delta, 0, vec![false, true, false])
        };
        let a = mk(i1);
        let c = mk(i2);
        let u = a.union(&c).unwrap();
        for w in all_words(al.len(), 6) {
            let in_a = a.accepts_syms(&w);
            let in_c = c.accepts_syms(&w);
            assert_eq!(u.accepts_syms(&w), in_a || in_c);
            assert_eq!(a.intersection(&c).unwrap().accepts_syms(&w), in_a && in_c);
            assert_eq!(a.difference(&c).unwrap().accepts_syms(&w), in_a && !in_c);
        }
        // involution and empty intersection
        assert!(a.complement().complement().language_equal(&a).unwrap());
        assert!(a.intersection(&a.complement()).unwrap().language_is_empty());
    }

    #[test]
    fn minimize_empty_language_single_sink() {
        let al = Alphabet::sigma_nonneg(b(2), 1);
        let width = al.len();
        let d = Dfa::new(
            al,
            vec![vec![1; width], vec![2; width], vec![2; width]],
            0,
            vec![false, false, false],
        );
        let m = d.minimize();
        assert_eq!(m.num_states(), 1);
        assert!(m.language_is_empty());
    }

    #[test]
    fn minimize_idempotent_and_residual_count() {
        // 6-state redundant automaton for (ab)* with a=0, b=1 over 2 letters.
        let al = Alphabet::sigma_nonneg(b(2), 1);
        let width = al.len();
        let sink = 5;
        let mut delta = vec![vec![sink; width]; 6];
        // duplicate even/odd states: 0,2,4 "even", 1,3 "odd"
        delta[0][0] = 1;
        delta[1][1] = 2;
        delta[2][0] = 3;
        delta[3][1] = 4;
        delta[4][0] = 1;
        let d = Dfa::new(al, delta, 0, vec![true, false, true, false, true, false]);
        let m = d.minimize();
        let mm = m.minimize();
        assert_eq!(m, mm, "minimize must be idempotent up to canonical order");

        // residual-language oracle: number of distinct acceptance vectors over
        // all words of length <= 6 from each reachable state of the trim DFA.
        let t = d.trim();
        let words = all_words(t.alphabet().len(), 6);
        let mut residuals: BTreeSet<Vec<bool>> = BTreeSet::new();
        for q in 0..t.num_states() {
            residuals.insert(words.iter().map(|w| t.finals[t.run(q, w)]).collect());
        }
        assert_eq!(m.num_states(), residuals.len());
        // (ab)* minimal: 2 live states + sink
        assert_eq!(m.num_states(), 3);
    }

    #[test]
    fn count_words_examples() {
        let al2 = Alphabet::sigma_nonneg(b(3), 1);
        let uni = Dfa::universal(al2.clone());
        for n in 0..6 {
            assert_eq!(uni.count_words(n), BigUint::from(3u32).pow(n as u32));
        }

        // {b,c}* with a 2-letter alphabet
        let al = Alphabet::sigma_nonneg(b(2), 1);
        let two = Dfa::universal(al);
        assert_eq!(two.count_words(5), BigUint::from(32u32));

        // 0*10*2 at n = 5: the single 1 can sit in 4 slots before the final 2.
        let al10 = Alphabet::sigma_nonneg(b(10), 1);
        let d = zero_one_zero_two(al10);
        assert_eq!(d.count_words(5), BigUint::from(4u32));
    }

    #[test]
    fn pumping_behaviour() {
        // a*b with a=0, b=1
        let al = Alphabet::sigma_nonneg(b(2), 1);
        let width = al.len();
        let mut delta = vec![vec![2; width]; 3];
        delta[0][0] = 0;
        delta[0][1] = 1;
        let d = Dfa::new(al, delta, 0, vec![false, true, false]);
        assert_eq!(d.pumping_length(), 2);
        let (u, v, w) = d.pump_decompose(&[0, 0, 0, 1]).unwrap();
        assert_eq!((u.clone(), v.clone(), w.clone()), (vec![], vec![0], vec![0, 0, 1]));
        for k in 0..4 {
            let mut pumped = u.clone();
            for _ in 0..k {
                pumped.extend(v.iter().copied());
            }
            pumped.extend(w.iter().copied());
            assert!(d.accepts_syms(&pumped));
        }
        // 3-state cycle automaton pumping length
        let al3 = Alphabet::sigma_nonneg(b(2), 1);
        let width = al3.len();
        let delta = vec![vec![1; width], vec![2; width], vec![0; width]];
        let c = Dfa::new(al3, delta, 0, vec![true, false, false]);
        assert_eq!(c.pumping_length(), 3);
        assert!(matches!(c.pump_decompose(&[0, 1]), Err(AutomatonError::NotAccepted)));
    }

    #[test]
    fn loop_language_properties() {
        let al = Alphabet::sigma_nonneg(b(2), 1);
        let width = al.len();
        // 2-cycle on {0,1} under letter a=0; letter b=1 goes to a sink.
        let mut delta = vec![vec![2; width]; 3];
        delta[0][0] = 1;
        delta[1][0] = 0;
        let d = Dfa::new(al, delta, 0, vec![true, false, false]);
        let lq = d.loop_language(0).unwrap();
        assert!(lq.accepts_syms(&[]));
        assert!(lq.accepts_syms(&[0, 0]));
        assert!(!lq.accepts_syms(&[0]));
        // closure under concatenation on samples
        let words = lq.enumerate_accepted(6);
        for u in words.iter().take(8) {
            for v in words.iter().take(8) {
                let mut uv = u.clone();
                uv.extend(v.iter().copied());
                assert!(lq.accepts_syms(&uv));
            }
        }
        assert!(matches!(d.loop_language(9), Err(AutomatonError::UnknownState(9))));
    }

    #[test]
    fn determinize_matches_nfa_enumeration() {
        let al = Alphabet::sigma_nonneg(b(2), 1);
        let mut n = Nfa::new(al, 3);
        n.set_start(0);
        n.set_start(1);
        // guesses: 0 ->a 1, 0 ->a 2, 1 ->b 2, 2 ->a 0
        n.add_transition(0, 0, 1);
        n.add_transition(0, 0, 2);
        n.add_transition(1, 1, 2);
        n.add_transition(2, 0, 0);
        n.set_final(2, true);
        let d = n.determinize().unwrap();
        for w in all_words(2, 10) {
            assert_eq!(d.accepts_syms(&w), n.accepts_syms(&w), "word {w:?}");
        }
    }

    #[test]
    fn distinguishing_words() {
        let al = Alphabet::sigma_nonneg(b(2), 1);
        let width = al.len();
        let mut delta = vec![vec![2; width]; 3];
        delta[0][0] = 1;
        delta[1][0] = 0;
        let d = Dfa::new(al, delta, 0, vec![true, false, false]);
        let w = d.distinguishing_word(0, 1).unwrap();
        assert_eq!(w, Vec::<usize>::new());
        let w2 = d.distinguishing_word(1, 2).unwrap();
        assert!(d.finals[d.run(1, &w2)] != d.finals[d.run(2, &w2)]);
        assert_eq!(d.distinguishing_word(0, 0), None);
    }
}
