//! Sparse (polynomial-density) versus non-sparse regular languages.
//!
//! A trimmed DFA recognizes a sparse language exactly when no live state
//! lies on two distinct cycles; equivalently every nontrivial strongly
//! connected component is a single directed cycle. Both directions are
//! constructive here: the sparse side yields a finite union of bounded
//! expressions `u0 w1* u1 ... wn* un`, the non-sparse side a pair of
//! distinct equal-length cycle words at one state.

use crate::automaton::{AutomatonError, Dfa};
use std::collections::BTreeSet;

/// One bounded component `u0 w1* u1 ... wn* un`, as symbol-index words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedExpr {
    pub head: Vec<usize>,
    /// Pairs (w_i, u_i): a starred cycle word followed by a plain segment.
    pub tail: Vec<(Vec<usize>, Vec<usize>)>,
}

impl BoundedExpr {
    /// All words of the family with length at most `max_len`.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack: Vec<(Vec<usize>, usize)> = vec![(self.head.clone(), 0)];
        while let Some((prefix, i)) = stack.pop() {
            if prefix.len() > max_len {
                continue;
            }
            if i == self.tail.len() {
                out.push(prefix);
                continue;
            }
            let (cycle, seg) = &self.tail[i];
            let mut with_cycles = prefix;
            loop {
                let mut next = with_cycles.clone();
                next.extend(seg.iter().copied());
                stack.push((next, i + 1));
                if cycle.is_empty() || with_cycles.len() + cycle.len() > max_len {
                    break;
                }
                with_cycles.extend(cycle.iter().copied());
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Total number of star blocks.
    pub fn num_stars(&self) -> usize {
        self.tail.len()
    }
}

/// Witness for exponential growth: `prefix {cycle_a, cycle_b}* suffix` is
/// contained in the language, with two distinct equal-length cycle words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotSparseWitness {
    pub prefix: Vec<usize>,
    pub cycle_a: Vec<usize>,
    pub cycle_b: Vec<usize>,
    pub suffix: Vec<usize>,
    /// The state the two cycles share, in the trimmed automaton.
    pub state: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SparsityVerdict {
    Sparse(Vec<BoundedExpr>),
    NotSparse(NotSparseWitness),
}

impl SparsityVerdict {
    pub fn is_sparse(&self) -> bool {
        matches!(self, SparsityVerdict::Sparse(_))
    }
}

/// Cap on the number of decomposition components.
const COMPONENT_LIMIT: usize = 200_000;

/// Tarjan strongly connected components over the live subgraph.
fn sccs(dfa: &Dfa, live: &[bool]) -> Vec<usize> {
    let n = dfa.num_states();
    let width = dfa.alphabet().len();
    let mut comp = vec![usize::MAX; n];
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut next_comp = 0usize;

    // Iterative Tarjan: frames of (state, next edge to examine).
    for root in 0..n {
        if !live[root] || index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei < width {
                let a = *ei;
                *ei += 1;
                let w = dfa.step(v, a);
                if !live[w] {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&mut (parent, _)) = call.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// Internal out-edges of `q`: letters whose target stays in q's SCC.
fn internal_edges(dfa: &Dfa, comp: &[usize], live: &[bool], q: usize) -> Vec<usize> {
    (0..dfa.alphabet().len())
        .filter(|&a| {
            let t = dfa.step(q, a);
            live[t] && comp[t] == comp[q]
        })
        .collect()
}

/// Follows the unique internal out-edges from `q` around its cycle back to
/// `q`. Returns `None` when q's SCC is trivial (no internal edge).
fn cycle_word_at(dfa: &Dfa, comp: &[usize], live: &[bool], q: usize) -> Option<Vec<usize>> {
    let mut word = Vec::new();
    let mut cur = q;
    loop {
        let edges = internal_edges(dfa, comp, live, cur);
        debug_assert!(edges.len() <= 1, "cycle_word_at on a non-sparse SCC");
        let a = *edges.first()?;
        word.push(a);
        cur = dfa.step(cur, a);
        if cur == q {
            return Some(word);
        }
    }
}

/// Decides sparsity of the language of `dfa` and extracts the certificate.
pub fn is_sparse(dfa: &Dfa) -> Result<SparsityVerdict, AutomatonError> {
    let t = dfa.trim();
    if t.language_is_empty() {
        return Ok(SparsityVerdict::Sparse(Vec::new()));
    }
    let live = t.coreachable(); // all reachable here, since t is trimmed
    let comp = sccs(&t, &live);

    // Non-sparse when some live state has two internal out-edges.
    for q in 0..t.num_states() {
        if !live[q] {
            continue;
        }
        let edges = internal_edges(&t, &comp, &live, q);
        if edges.len() >= 2 {
            let (a1, a2) = (edges[0], edges[1]);
            let mut y1 = vec![a1];
            y1.extend(t.shortest_word_between(t.step(q, a1), q).expect("cycle closes"));
            let mut y2 = vec![a2];
            y2.extend(t.shortest_word_between(t.step(q, a2), q).expect("cycle closes"));
            // Pad to a common length by taking powers; the words still differ
            // in their first letter.
            let l = num_integer::lcm(y1.len(), y2.len());
            let cycle_a = repeat_word(&y1, l / y1.len());
            let cycle_b = repeat_word(&y2, l / y2.len());
            let prefix = t.shortest_word_between(t.start(), q).expect("q reachable");
            let suffix = t.shortest_accepting_extension(q).expect("q live");
            return Ok(SparsityVerdict::NotSparse(NotSparseWitness {
                prefix,
                cycle_a,
                cycle_b,
                suffix,
                state: q,
            }));
        }
    }

    // Sparse: enumerate skeleton paths (simple paths with a star at the
    // first state of each cyclic SCC they touch).
    let mut components = Vec::new();
    let mut on_path = vec![false; t.num_states()];
    let mut starred_comps: BTreeSet<usize> = BTreeSet::new();
    let mut expr = BoundedExpr { head: Vec::new(), tail: Vec::new() };

    struct Dfs<'a> {
        t: &'a Dfa,
        live: &'a [bool],
        comp: &'a [usize],
        components: &'a mut Vec<BoundedExpr>,
    }

    fn push_letter(expr: &mut BoundedExpr, a: usize) {
        match expr.tail.last_mut() {
            Some((_, seg)) => seg.push(a),
            None => expr.head.push(a),
        }
    }

    fn pop_letter(expr: &mut BoundedExpr) {
        match expr.tail.last_mut() {
            Some((_, seg)) if !seg.is_empty() => {
                seg.pop();
            }
            Some(_) => unreachable!("pop_letter under an empty star segment"),
            None => {
                expr.head.pop();
            }
        }
    }

    fn dfs(
        ctx: &mut Dfs,
        q: usize,
        on_path: &mut Vec<bool>,
        starred: &mut BTreeSet<usize>,
        expr: &mut BoundedExpr,
    ) -> Result<(), AutomatonError> {
        on_path[q] = true;
        let mut new_star = false;
        if !starred.contains(&ctx.comp[q]) {
            if let Some(w) = cycle_word_at(ctx.t, ctx.comp, ctx.live, q) {
                starred.insert(ctx.comp[q]);
                expr.tail.push((w, Vec::new()));
                new_star = true;
            }
        }
        if ctx.t.is_final(q) {
            ctx.components.push(expr.clone());
            if ctx.components.len() > COMPONENT_LIMIT {
                return Err(AutomatonError::TooLarge(ctx.components.len(), COMPONENT_LIMIT));
            }
        }
        for a in 0..ctx.t.alphabet().len() {
            let r = ctx.t.step(q, a);
            if !ctx.live[r] || on_path[r] {
                continue;
            }
            push_letter(expr, a);
            dfs(ctx, r, on_path, starred, expr)?;
            pop_letter(expr);
        }
        if new_star {
            starred.remove(&ctx.comp[q]);
            expr.tail.pop();
        }
        on_path[q] = false;
        Ok(())
    }

    let mut ctx = Dfs { t: &t, live: &live, comp: &comp, components: &mut components };
    dfs(&mut ctx, t.start(), &mut on_path, &mut starred_comps, &mut expr)?;
    Ok(SparsityVerdict::Sparse(components))
}

fn repeat_word(w: &[usize], times: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(w.len() * times);
    for _ in 0..times {
        out.extend(w.iter().copied());
    }
    out
}

/// Checks a sparse decomposition against the language up to `max_len`.
/// Test helper: exponential in `max_len`.
pub fn decomposition_matches(dfa: &Dfa, exprs: &[BoundedExpr], max_len: usize) -> bool {
    let mut union: BTreeSet<Vec<usize>> = BTreeSet::new();
    for e in exprs {
        union.extend(e.words_up_to(max_len));
    }
    let accepted: BTreeSet<Vec<usize>> = dfa.enumerate_accepted(max_len).into_iter().collect();
    union == accepted
}

/// Checks a non-sparse witness: every word `prefix {a,b}^{<=k} suffix` is
/// accepted and the two cycles are distinct words of equal length.
pub fn witness_holds(dfa: &Dfa, w: &NotSparseWitness, k: usize) -> bool {
    if w.cycle_a == w.cycle_b || w.cycle_a.len() != w.cycle_b.len() || w.cycle_a.is_empty() {
        return false;
    }
    let mut middles: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for m in &middles {
            for c in [&w.cycle_a, &w.cycle_b] {
                let mut m2 = m.clone();
                m2.extend(c.iter().copied());
                next.push(m2);
            }
        }
        for m in &next {
            let mut word = w.prefix.clone();
            word.extend(m.iter().copied());
            word.extend(w.suffix.iter().copied());
            if !dfa.accepts_syms(&word) {
                return false;
            }
        }
        middles = next;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{all_words, Alphabet};
    use crate::digits::{Base, Letter};
    use num_bigint::BigUint;

    fn b(d: u32) -> Base {
        Base::new(d).unwrap()
    }

    fn zero_one_zero_two(d: u32) -> Dfa {
        let alphabet = Alphabet::sigma_nonneg(b(d), 1);
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
    fn zero_one_zero_two_is_sparse_with_expected_shape() {
        let d = zero_one_zero_two(10);
        match is_sparse(&d).unwrap() {
            SparsityVerdict::Sparse(exprs) => {
                assert_eq!(exprs.len(), 1);
                let e = &exprs[0];
                // u0 = eps, (w1 = 0, u1 = 1), (w2 = 0, u2 = 2), as letter indices.
                assert!(e.head.is_empty());
                assert_eq!(e.tail.len(), 2);
                assert!(decomposition_matches(&d, &exprs, 9));
            }
            SparsityVerdict::NotSparse(_) => panic!("0*10*2 must be sparse"),
        }
    }

    #[test]
    fn two_letter_universal_is_not_sparse() {
        let alphabet = Alphabet::sigma_nonneg(b(2), 1);
        let d = Dfa::universal(alphabet);
        match is_sparse(&d).unwrap() {
            SparsityVerdict::NotSparse(w) => {
                assert!(witness_holds(&d, &w, 3));
            }
            SparsityVerdict::Sparse(_) => panic!("{{b,c}}* must not be sparse"),
        }
    }

    #[test]
    fn finite_language_sparse_without_stars() {
        let alphabet = Alphabet::sigma_nonneg(b(3), 1);
        let d = Dfa::single_word(alphabet, &[1, 2, 0]);
        match is_sparse(&d).unwrap() {
            SparsityVerdict::Sparse(exprs) => {
                assert_eq!(exprs.len(), 1);
                assert!(exprs[0].tail.is_empty());
                assert_eq!(exprs[0].head, vec![1, 2, 0]);
            }
            _ => panic!("finite language must be sparse"),
        }
    }

    #[test]
    fn empty_language_sparse_empty_decomposition() {
        let alphabet = Alphabet::sigma_nonneg(b(2), 1);
        let d = Dfa::empty(alphabet);
        assert_eq!(is_sparse(&d).unwrap(), SparsityVerdict::Sparse(Vec::new()));
    }

    #[test]
    fn growth_bounds_follow_verdict() {
        // Sparse side: polynomial bound.
        let d = zero_one_zero_two(10);
        if let SparsityVerdict::Sparse(exprs) = is_sparse(&d).unwrap() {
            let c = BigUint::from(exprs.len().max(1));
            let states = d.trim().num_states();
            for n in 0..60usize {
                let bound = &c * BigUint::from((n + 1).pow(states as u32));
                assert!(d.count_words(n) <= bound, "length {n}");
            }
        } else {
            panic!("sparse expected");
        }
        // Non-sparse side: exponential lower bound along the witness family.
        let alphabet = Alphabet::sigma_nonneg(b(2), 1);
        let u = Dfa::universal(alphabet);
        if let SparsityVerdict::NotSparse(w) = is_sparse(&u).unwrap() {
            for k in 0..12usize {
                let len = w.prefix.len() + k * w.cycle_a.len() + w.suffix.len();
                assert!(u.count_words(len) >= BigUint::from(1u32) << k);
            }
        } else {
            panic!("not sparse expected");
        }
    }

    #[test]
    fn random_small_dfas_decomposition_agrees_with_language() {
        // Deterministic pseudo-random small DFAs over 2 letters.
        let alphabet = Alphabet::sigma_nonneg(b(2), 1);
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..120 {
            let n = 2 + (next() % 4) as usize;
            let width = alphabet.len();
            let delta: Vec<Vec<usize>> = (0..n)
                .map(|_| (0..width).map(|_| (next() % n as u64) as usize).collect())
                .collect();
            let finals: Vec<bool> = (0..n).map(|_| next() % 2 == 0).collect();
            let d = Dfa::new(alphabet.clone(), delta, 0, finals);
            match is_sparse(&d).unwrap() {
                SparsityVerdict::Sparse(exprs) => {
                    assert!(decomposition_matches(&d, &exprs, 8));
                }
                SparsityVerdict::NotSparse(w) => {
                    assert!(witness_holds(&d, &w, 3));
                }
            }
        }
    }

    #[test]
    fn all_words_oracle_sizes() {
        assert_eq!(all_words(2, 3).len(), 1 + 2 + 4 + 8);
        assert_eq!(all_words(3, 0).len(), 1);
    }
}
