//! Forbidden-suffix analysis for languages of nonnegative digit words.
//!
//! A word tau is a forbidden suffix for `L` restricted to lengths `r + sN`
//! when no word of such a length ending in tau belongs to L. Existence of
//! such a witness is decided exactly, through the separator language
//! `S = { 0^m $ tau : Sigma^(m) tau  does not meet L }`: S is regular, and a
//! witness exists iff S contains a word whose zero block is at least the
//! pumping length of S.

use crate::automaton::{AutomatonError, Dfa, Nfa, Sym};

/// A forbidden-suffix witness: no accepted word of length in `offset +
/// period * N` ends with `suffix` (symbol indices of the base automaton).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForbiddenSuffix {
    pub offset: usize,
    pub period: usize,
    pub suffix: Vec<usize>,
}

/// Decides whether some `(r, s, tau)` witness exists for the language of
/// `dfa`, whose alphabet must consist of nonnegative digit letters only.
///
/// Returns the witness built from the shortest, lexicographically least
/// separator word; absence certifies that every suffix occurs in every
/// sufficiently represented length class.
pub fn forbidden_suffix_witness(dfa: &Dfa) -> Result<Option<ForbiddenSuffix>, AutomatonError> {
    let alphabet = dfa.alphabet();
    assert!(
        !alphabet.contains_separator(),
        "input automaton may not use the reserved separator"
    );
    let sep_alphabet = alphabet.with_separator();
    let sep = sep_alphabet.index_of(&Sym::Sep).expect("separator present");
    // Symbol index i of the base alphabet keeps index i in the extended one:
    // the separator sorts last.
    debug_assert!((0..alphabet.len()).all(|i| sep_alphabet.sym(i) == alphabet.sym(i)));
    let zero = alphabet
        .syms()
        .iter()
        .position(|s| s.letter().map(|l| l.is_zero()).unwrap_or(false))
        .expect("alphabet contains the zero letter");

    // NFA for "0^m $ tau such that some replacement of the zeros lands in L":
    // phase one guesses a letter of L's word per zero read.
    let n = dfa.num_states();
    let mut nfa = Nfa::new(sep_alphabet.clone(), 2 * n);
    let p1 = |q: usize| q;
    let p2 = |q: usize| n + q;
    nfa.set_start(p1(dfa.start()));
    for q in 0..n {
        for a in 0..alphabet.len() {
            nfa.add_transition(p1(q), zero, p1(dfa.step(q, a)));
            nfa.add_transition(p2(q), a, p2(dfa.step(q, a)));
        }
        nfa.add_transition(p1(q), sep, p2(q));
        nfa.set_final(p2(q), dfa.is_final(q));
    }
    let exists_replacement = nfa.determinize()?;

    // Well-formed separator words 0*$Sigma*.
    let wf = {
        let width = sep_alphabet.len();
        let dead = 2usize;
        let mut delta = vec![vec![dead; width]; 3];
        delta[0][zero] = 0;
        delta[0][sep] = 1;
        for a in 0..alphabet.len() {
            delta[1][a] = 1;
        }
        Dfa::new(sep_alphabet.clone(), delta, 0, vec![false, true, false])
    };

    let s_lang = exists_replacement.complement().intersection(&wf)?;
    let p = s_lang.pumping_length();

    // Does S contain a word with zero block of length at least p?
    let long_shape = {
        let width = sep_alphabet.len();
        let dead = p + 2;
        let mut delta = vec![vec![dead; width]; p + 3];
        for i in 0..p {
            delta[i][zero] = i + 1;
        }
        delta[p][zero] = p;
        delta[p][sep] = p + 1;
        for a in 0..alphabet.len() {
            delta[p + 1][a] = p + 1;
        }
        let mut finals = vec![false; p + 3];
        finals[p + 1] = true;
        Dfa::new(sep_alphabet.clone(), delta, 0, finals)
    };
    let long_s = s_lang.intersection(&long_shape)?;
    let witness_word = match long_s.shortest_accepted() {
        None => return Ok(None),
        Some(w) => w,
    };

    let sep_pos = witness_word.iter().position(|&a| a == sep).expect("well-formed");
    let m = sep_pos;
    let tau: Vec<usize> = witness_word[sep_pos + 1..].to_vec();
    debug_assert!(m >= p);

    // Pump the zero block inside S: first repeated state along the zeros.
    let mut states = Vec::with_capacity(m + 1);
    let mut q = s_lang.start();
    states.push(q);
    for _ in 0..m {
        q = s_lang.step(q, zero);
        states.push(q);
    }
    let (mut i0, mut j0) = (0, 0);
    'outer: for j in 1..states.len() {
        for i in 0..j {
            if states[i] == states[j] {
                i0 = i;
                j0 = j;
                break 'outer;
            }
        }
    }
    assert!(j0 > i0, "a zero block of length >= pumping length must repeat a state");
    let s = j0 - i0;
    // 0^{m - s + ks} $ tau lies in S for every k >= 0, so tau is forbidden
    // for lengths (m - s + |tau|) + sN.
    Ok(Some(ForbiddenSuffix { offset: m - s + tau.len(), period: s, suffix: tau }))
}

/// DFA for "words ending in `suffix`" over the automaton's alphabet
/// (matches everything when `suffix` is empty), via KMP progress states.
pub fn ends_with(dfa_alphabet: &crate::automaton::Alphabet, suffix: &[usize]) -> Dfa {
    let width = dfa_alphabet.len();
    let k = suffix.len();
    if k == 0 {
        return Dfa::universal(dfa_alphabet.clone());
    }
    // failure function
    let mut fail = vec![0usize; k + 1];
    for i in 1..k {
        let mut f = fail[i];
        while f > 0 && suffix[i] != suffix[f] {
            f = fail[f];
        }
        fail[i + 1] = if suffix[i] == suffix[f] { f + 1 } else { 0 };
    }
    let step = |p: usize, a: usize| -> usize {
        let mut cur = p;
        loop {
            if cur < k && suffix[cur] == a {
                return cur + 1;
            }
            if cur == 0 {
                return 0;
            }
            cur = fail[cur];
        }
    };
    let mut delta = vec![vec![0; width]; k + 1];
    for p in 0..=k {
        for a in 0..width {
            // From full match, matching continues on the longest proper
            // suffix that is also a prefix.
            let base = if p == k { fail[k] } else { p };
            delta[p][a] = step(base, a);
        }
    }
    let mut finals = vec![false; k + 1];
    finals[k] = true;
    Dfa::new(dfa_alphabet.clone(), delta, 0, finals)
}

/// DFA for words whose length lies in `offset + period * N`.
pub fn length_class(alphabet: &crate::automaton::Alphabet, offset: usize, period: usize) -> Dfa {
    let width = alphabet.len();
    if period == 0 {
        // single exact length
        let n = offset + 2;
        let dead = n - 1;
        let mut delta = vec![vec![dead; width]; n];
        for i in 0..offset {
            for a in 0..width {
                delta[i][a] = i + 1;
            }
        }
        for a in 0..width {
            delta[offset][a] = dead;
        }
        let mut finals = vec![false; n];
        finals[offset] = true;
        return Dfa::new(alphabet.clone(), delta, 0, finals);
    }
    let n = offset + period;
    let mut delta = vec![vec![0; width]; n];
    for i in 0..n {
        let next = if i + 1 < n { i + 1 } else { offset };
        for a in 0..width {
            delta[i][a] = next;
        }
    }
    let mut finals = vec![false; n];
    finals[offset] = true;
    Dfa::new(alphabet.clone(), delta, 0, finals)
}

/// Language-level recheck of a witness: no accepted word of length
/// `offset + period*k` (for the probed `k`s) ends with the suffix.
pub fn recheck_witness(dfa: &Dfa, fs: &ForbiddenSuffix, probes: usize) -> Result<bool, AutomatonError> {
    let suffixed = dfa.intersection(&ends_with(dfa.alphabet(), &fs.suffix))?;
    for k in 0..probes {
        let len = fs.offset + fs.period * k;
        if len < fs.suffix.len() {
            continue;
        }
        if !suffixed.count_words(len).eq(&num_bigint::BigUint::from(0u32)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::Alphabet;
    use crate::digits::{Base, Letter};

    fn b(d: u32) -> Base {
        Base::new(d).unwrap()
    }

    #[test]
    fn universal_language_has_no_witness() {
        let alphabet = Alphabet::sigma_nonneg(b(3), 1);
        let d = Dfa::universal(alphabet);
        assert_eq!(forbidden_suffix_witness(&d).unwrap(), None);
    }

    #[test]
    fn even_numbers_have_no_witness() {
        // Representations of 2N base 10: final digit parity decides, but with
        // LSB first the parity is read immediately; every suffix extends.
        let alphabet = Alphabet::sigma_nonneg(b(10), 1);
        let width = alphabet.len();
        // state 0: empty word (value 0, even); state 1: even; state 2: odd
        let mut delta = vec![vec![0; width]; 3];
        for a in 0..width {
            let l = alphabet.sym(a).letter().unwrap();
            let even = (&l.0[0] % 2u32).eq(&num_bigint::BigInt::from(0));
            // first letter decides the parity; later letters do not change it
            delta[0][a] = if even { 1 } else { 2 };
            delta[1][a] = 1;
            delta[2][a] = 2;
        }
        let d = Dfa::new(alphabet, delta, 0, vec![true, true, false]);
        // wait: parity of the value is the parity of the digit sum weighted by
        // powers of 10, all of which are even except 10^0... only the first
        // letter matters. That is what this automaton encodes.
        assert_eq!(forbidden_suffix_witness(&d).unwrap(), None);
    }

    #[test]
    fn zero_one_zero_two_has_witness() {
        let alphabet = Alphabet::sigma_nonneg(b(10), 1);
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
        let d = Dfa::new(alphabet, delta, 0, vec![false, false, true, false]);
        let fs = forbidden_suffix_witness(&d).unwrap().expect("witness must exist");
        assert!(recheck_witness(&d, &fs, 3).unwrap());
        // brute-force recheck at small lengths
        for k in 0..3 {
            let len = fs.offset + k * fs.period;
            if len > 10 {
                continue;
            }
            for w in crate::automaton::all_words(width, len) {
                if w.len() == len && w.ends_with(&fs.suffix) {
                    assert!(!d.accepts_syms(&w));
                }
            }
        }
    }

    #[test]
    fn ends_with_tracks_suffixes() {
        let alphabet = Alphabet::sigma_nonneg(b(2), 1);
        let m = ends_with(&alphabet, &[1, 1]);
        assert!(m.accepts_syms(&[0, 1, 1]));
        assert!(m.accepts_syms(&[1, 1, 1]));
        assert!(!m.accepts_syms(&[1, 1, 0]));
        assert!(!m.accepts_syms(&[1]));
        let e = ends_with(&alphabet, &[]);
        assert!(e.accepts_syms(&[]));
    }

    #[test]
    fn length_class_counts() {
        let alphabet = Alphabet::sigma_nonneg(b(2), 1);
        let d = length_class(&alphabet, 3, 2);
        for len in 0..10 {
            let expect = len >= 3 && (len - 3) % 2 == 0;
            assert_eq!(
                !d.count_words(len).eq(&num_bigint::BigUint::from(0u32)),
                expect,
                "length {len}"
            );
        }
        let exact = length_class(&alphabet, 2, 0);
        assert!(exact.accepts_syms(&[0, 1]));
        assert!(!exact.accepts_syms(&[0]));
        assert!(!exact.accepts_syms(&[0, 1, 1]));
    }
}
