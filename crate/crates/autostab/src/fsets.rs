//! Symbolic building blocks for the stable side of the dichotomy: cycle
//! sets `C(a; delta) = {a + d^delta a + ... + d^(n delta) a}`, their finite
//! sums and translates, cosets `r + sZ`, and Boolean combinations thereof,
//! with conversions both to value-closed automata and to sparse word-regex
//! form `[u v* w]` up to explicit finite exception lists.

use crate::automaton::{Alphabet, Dfa};
use crate::autoset::{AutoSet, AutoSetError};
use crate::digits::{canonical_rep, canonical_rep_scalar, nonneg_rep_fixed, Base, Letter, Word};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error)]
pub enum FsetError {
    #[error(transparent)]
    AutoSet(#[from] AutoSetError),
    #[error("cycle_to_regex requires dimension 1 and a >= 0")]
    RegexScope,
    #[error("translate_regex precondition failed: {0}")]
    TranslatePre(String),
    #[error("coset modulus must be positive")]
    BadModulus,
    #[error("cosets exist only in dimension 1")]
    CosetDim,
}

/// The cycle set C(a; delta) in Z^m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleSet {
    pub a: Vec<BigInt>,
    pub delta: u32,
    pub base: Base,
}

impl CycleSet {
    pub fn new(base: Base, a: Vec<BigInt>, delta: u32) -> CycleSet {
        assert!(delta > 0, "delta must be positive");
        CycleSet { a, delta, base }
    }

    pub fn scalar(base: Base, a: impl Into<BigInt>, delta: u32) -> CycleSet {
        CycleSet::new(base, vec![a.into()], delta)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// First `n` elements via the recurrence e_{k+1} = a + d^delta * e_k,
    /// starting from e_1 = a.
    pub fn elements(&self, n: usize) -> Vec<Vec<BigInt>> {
        let step = self.base.pow(self.delta as usize);
        let mut out = Vec::with_capacity(n);
        let mut cur = self.a.clone();
        for _ in 0..n {
            out.push(cur.clone());
            cur = self.a.iter().zip(&cur).map(|(ai, ci)| ai + &step * ci).collect();
        }
        out
    }

    /// Elements with all components of magnitude at most `bound` (plus the
    /// first element past it, to make cutoffs visible in tests).
    pub fn elements_up_to(&self, bound: &BigInt) -> Vec<Vec<BigInt>> {
        let mut out = Vec::new();
        for e in self.elements(4096) {
            let past = e.iter().any(|c| c.abs() > *bound);
            out.push(e);
            if past {
                break;
            }
        }
        out
    }

    /// A word sigma of length delta with [sigma] = a, so that
    /// C(a; delta) = {[sigma^n] : n > 0}. Canonical digits are used, with
    /// any overflow folded into the most significant letter.
    pub fn word_form(&self) -> Word {
        let delta = self.delta as usize;
        let rep = canonical_rep(&self.a, self.base);
        if rep.len() <= delta {
            return rep.zero_pad(delta);
        }
        let letters = rep.letters();
        let mut out: Vec<Letter> = letters[..delta - 1].to_vec();
        // Fold the tail into one oversized letter: sum of tail letters
        // scaled by their offset from position delta-1.
        let d = self.base.big();
        let mut top = vec![BigInt::zero(); self.dim()];
        for (k, l) in letters[delta - 1..].iter().enumerate().rev() {
            for (t, e) in top.iter_mut().zip(&l.0) {
                *t = &*t * &d + e;
            }
            let _ = k;
        }
        out.push(Letter(top));
        Word::new(self.base, self.dim(), out).unwrap()
    }

    /// The value-closed automatic set of C(a; delta), through the automaton
    /// of the string language sigma^+.
    pub fn to_autoset(&self) -> Result<AutoSet, FsetError> {
        let sigma = self.word_form();
        let alphabet = Alphabet::from_letters(self.dim(), sigma.letters().to_vec());
        let delta = self.delta as usize;
        // states: 0 = initial, 1..=delta positions; delta is final and loops
        let width = alphabet.len();
        let sink = delta + 1;
        let mut delta_tab = vec![vec![sink; width]; delta + 2];
        for i in 0..delta {
            let from = if i == 0 { 0 } else { i };
            let sym = alphabet.index_of_letter(&sigma.letters()[i]).unwrap();
            delta_tab[from][sym] = i + 1;
        }
        // from the final state the next copy starts
        let first = alphabet.index_of_letter(&sigma.letters()[0]).unwrap();
        let to = if delta == 1 { delta } else { 1 };
        delta_tab[delta][first] = to;
        let mut finals = vec![false; delta + 2];
        finals[delta] = true;
        let raw = Dfa::new(alphabet, delta_tab, 0, finals);
        Ok(AutoSet::from_raw(&raw, self.base, self.dim())?)
    }
}

/// The carry-stabilized regex form of a one-dimensional cycle set with
/// nonnegative a: words u, v, w over the digit alphabet with
/// `[sigma^(N+k)] = [u v^k w]` for all k >= 0, plus the finitely many
/// elements `[sigma^1..sigma^(N-1)]` the family misses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRegex {
    pub u: Word,
    pub v: Word,
    pub w: Word,
    /// Stabilization threshold N.
    pub threshold: usize,
    /// Exactly the symmetric difference between the cycle set and [u v* w].
    pub exceptions: Vec<BigInt>,
}

/// Runs the carry-stabilization algorithm for C(a; delta), a >= 0, m = 1.
///
/// Writing [sigma^i] = b_i d^(i delta) + c_i with 0 <= c_i < d^(i delta),
/// the carries satisfy b_(i+1) = (b_i + a) div d^delta, are nondecreasing
/// and bounded by a, hence stabilize at some index N; from there on the
/// periodic digit block p = (b_N + a) mod d^delta repeats.
pub fn cycle_to_regex(cycle: &CycleSet) -> Result<CycleRegex, FsetError> {
    if cycle.dim() != 1 || cycle.a[0].is_negative() {
        return Err(FsetError::RegexScope);
    }
    let a = cycle.a[0].clone();
    let base = cycle.base;
    let delta = cycle.delta as usize;
    let block = base.pow(delta);

    let mut b = (&a).div_floor(&block); // b_1
    let mut n = 1usize;
    loop {
        let next = (&b + &a).div_floor(&block);
        debug_assert!(next >= b, "carries are nondecreasing");
        debug_assert!(next <= a || a.is_zero(), "carries are bounded by a");
        if next == b {
            break;
        }
        b = next;
        n += 1;
    }
    let p = (&b + &a).mod_floor(&block);

    // s_n = [sigma^n] = a * (d^(n delta) - 1) / (d^delta - 1)
    let pow_nd = base.pow(n * delta);
    let s_n = &a * (&pow_nd - BigInt::one()) / (&block - BigInt::one());
    let c_n = (&s_n).mod_floor(&pow_nd);
    debug_assert_eq!((&s_n).div_floor(&pow_nd), b);

    let u = nonneg_rep_fixed(&c_n, base, n * delta).expect("c_N < d^(N delta)");
    let v = nonneg_rep_fixed(&p, base, delta).expect("p < d^delta");
    let w = canonical_rep_scalar(&b, base);

    // Exceptions: [sigma^i] for 1 <= i < N; for a > 0 these are strictly
    // below [sigma^N] = [u w]-family minimum, so they are exactly the
    // symmetric difference.
    let mut exceptions = Vec::new();
    let mut s = BigInt::zero();
    for _ in 1..n {
        s = &a + &block * &s;
        // s after one update equals [sigma^1] = a, etc.
        exceptions.push(s.clone());
    }
    // recompute forward to be explicit: s_i = a + d^delta * s_(i-1)
    let mut check = BigInt::zero();
    for e in &exceptions {
        check = &a + &block * &check;
        debug_assert_eq!(&check, e);
    }

    Ok(CycleRegex { u, v, w, threshold: n, exceptions })
}

/// Values [x v^k w] for k = 0, 1, ... while they do not exceed `limit`
/// (inclusive); the family is nondecreasing for digit words.
fn family_contains(x: &Word, v: &Word, w: &Word, val: &BigInt) -> bool {
    let base = x.base();
    let mut k = 0usize;
    loop {
        let word = x.concat(&v.power(k)).unwrap().concat(w).unwrap();
        let value = word.value();
        if &value == val {
            return true;
        }
        if value > *val {
            return false;
        }
        // constant family (all-zero v and w): only k = 0 matters
        if v.value().is_zero() && w.value().is_zero() && k > 0 {
            return false;
        }
        k += 1;
        if k > 4096 {
            return false;
        }
        let _ = base;
    }
}

/// Translation of a regex family: gamma + [u v^* w] rewritten as
/// [x y^* z] up to the finitely many leading elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslatedRegex {
    pub x: Word,
    pub y: Word,
    pub z: Word,
    pub threshold: usize,
    /// gamma + [u v^k w] for k below the threshold, minus values the new
    /// family already covers: exactly the symmetric difference.
    pub exceptions: Vec<BigInt>,
}

/// Implements both proof branches of the translation rewriting.
///
/// The general branch finds N with `0 <= gamma + [u v^N] < d^{|u v^N|}` and
/// absorbs the translate into a fresh head word; when u, v consist of the
/// maximal digit d-1 and gamma > 0 no such N exists, and the special branch
/// first rewrites the family as `(gamma - 1) + [0^{|u|} (0^{|v|})^* tau]`
/// with `[tau] = [w] + 1`.
pub fn translate_regex(gamma: &BigInt, u: &Word, v: &Word, w: &Word) -> Result<TranslatedRegex, FsetError> {
    let base = u.base();
    assert_eq!(v.base(), base);
    assert_eq!(w.base(), base);
    assert!(u.is_standard_nonneg() && v.is_standard_nonneg() && w.is_standard_nonneg());
    if v.is_empty() {
        return Err(FsetError::TranslatePre("v must be nonempty".into()));
    }

    // General branch: search for a fitting N.
    let gamma_digits = canonical_rep_scalar(&gamma.abs(), base).len();
    let n_max = gamma_digits + u.len() + 2 * v.len() + 8;
    let mut uvn = u.clone();
    for n in 0..=n_max {
        let val = gamma + uvn.value();
        if !val.is_negative() && val < base.pow(uvn.len()) {
            let x = nonneg_rep_fixed(&val, base, uvn.len()).expect("fits");
            // exceptions: the first n translated elements not already in the
            // new family
            let mut exceptions = Vec::new();
            for k in 0..n {
                let old = gamma + u.concat(&v.power(k)).unwrap().concat(w).unwrap().value();
                if !family_contains(&x, v, w, &old) {
                    exceptions.push(old);
                }
            }
            return Ok(TranslatedRegex { x, y: v.clone(), z: w.clone(), threshold: n, exceptions });
        }
        uvn = uvn.concat(v).unwrap();
    }

    // Special branch: u v in (d-1)^*.
    let top = BigInt::from(base.get() - 1);
    let all_top = |word: &Word| word.letters().iter().all(|l| l.0[0] == top);
    if all_top(u) && all_top(v) {
        let tau = canonical_rep_scalar(&(w.value() + BigInt::one()), base);
        let zeros_u = Word::empty(base, 1).zero_pad(u.len());
        let zeros_v = Word::empty(base, 1).zero_pad(v.len());
        let inner = translate_regex(&(gamma - BigInt::one()), &zeros_u, &zeros_v, &tau)?;
        // The rewrite preserves values index by index, so the inner result
        // describes the same translated family.
        return Ok(inner);
    }
    Err(FsetError::TranslatePre(format!(
        "no fitting head found for gamma={gamma} within {n_max} pump steps"
    )))
}

/// A coset r + sZ as a value-closed automatic set. States track the value
/// of the consumed prefix and the positional weight, both modulo s;
/// acceptance reads only the value residue.
pub fn coset_automaton(r: &BigInt, s: &BigInt, base: Base) -> Result<AutoSet, FsetError> {
    if !s.is_positive() {
        return Err(FsetError::BadModulus);
    }
    let alphabet = Alphabet::sigma_pm(base, 1);
    let target = r.mod_floor(s);
    let width = alphabet.len();
    let mut ids = std::collections::BTreeMap::new();
    let mut order: Vec<(BigInt, BigInt)> = Vec::new();
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let start = (BigInt::zero(), BigInt::one().mod_floor(s));
    ids.insert(start.clone(), 0usize);
    order.push(start);
    let mut qi = 0usize;
    while qi < order.len() {
        let (v, m) = order[qi].clone();
        let mut row = Vec::with_capacity(width);
        for a in 0..width {
            let l = alphabet.sym(a).letter().unwrap();
            let key = ((&v + &l.0[0] * &m).mod_floor(s), (&m * base.big()).mod_floor(s));
            let next = order.len();
            let id = *ids.entry(key.clone()).or_insert_with(|| {
                order.push(key);
                next
            });
            row.push(id);
        }
        delta.push(row);
        qi += 1;
    }
    let finals = order.iter().map(|(v, _)| *v == target).collect();
    Ok(AutoSet::from_closed_dfa(Dfa::new(alphabet, delta, 0, finals), base, 1))
}

/// One translate-of-a-sum component: b + C(a_1;d_1) + ... + C(a_k;d_k).
/// An empty cycle list denotes the singleton {b}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FComponent {
    pub translate: Vec<BigInt>,
    pub cycles: Vec<CycleSet>,
}

impl FComponent {
    pub fn dim(&self) -> usize {
        self.translate.len()
    }

    pub fn to_autoset(&self, base: Base) -> Result<AutoSet, FsetError> {
        let mut acc: Option<AutoSet> = None;
        for c in &self.cycles {
            let ca = c.to_autoset()?;
            acc = Some(match acc {
                None => ca,
                Some(prev) => prev.minkowski_sum(&ca)?,
            });
        }
        let set = match acc {
            None => AutoSet::singleton(base, &self.translate),
            Some(sum) => sum.translate(&self.translate)?,
        };
        Ok(set)
    }

    /// All element sums (before the translate) whose magnitude stays within
    /// the cancellation-safe enumeration bound for `reach`.
    fn sums_within(&self, reach: &BigInt) -> BTreeSet<Vec<BigInt>> {
        // Elements beyond the bound cannot produce small sums except through
        // aligned cancellations, which already occur at small indices.
        let margin = self
            .cycles
            .iter()
            .map(|c| c.base.pow(12 * c.delta as usize))
            .fold(BigInt::one(), |a, b| if a > b { a } else { b });
        let bound = (reach + BigInt::one()) * margin;
        let mut sums: BTreeSet<Vec<BigInt>> = BTreeSet::new();
        sums.insert(vec![BigInt::zero(); self.dim()]);
        for c in &self.cycles {
            let els = c.elements_up_to(&bound);
            let mut next = BTreeSet::new();
            for s in &sums {
                for e in &els {
                    next.insert(s.iter().zip(e).map(|(a, b)| a + b).collect::<Vec<_>>());
                }
            }
            sums = next;
        }
        sums
    }

    /// Exact membership by bounded enumeration of the element sums.
    pub fn contains(&self, x: &[BigInt]) -> bool {
        let want: Vec<BigInt> = x.iter().zip(&self.translate).map(|(a, b)| a - b).collect();
        let reach: BigInt = want.iter().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero);
        self.sums_within(&reach).contains(&want)
    }

    /// All members with every component of magnitude at most `reach`;
    /// precomputing this once makes window sweeps cheap.
    pub fn members_within(&self, reach: &BigInt) -> BTreeSet<Vec<BigInt>> {
        self.sums_within(reach)
            .into_iter()
            .map(|s| s.iter().zip(&self.translate).map(|(a, b)| a + b).collect::<Vec<BigInt>>())
            .filter(|m| m.iter().all(|c| c.abs() <= *reach))
            .collect()
    }
}

/// A groupless F-set: a finite union of translate-of-sum components.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GrouplessFSet {
    pub components: Vec<FComponent>,
}

impl GrouplessFSet {
    pub fn to_autoset(&self, base: Base, dim: usize) -> Result<AutoSet, FsetError> {
        let mut acc = AutoSet::empty(base, dim);
        for c in &self.components {
            acc = acc.union(&c.to_autoset(base)?)?;
        }
        Ok(acc)
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.components.iter().any(|c| c.contains(x))
    }

    /// All members with components of magnitude at most `reach`.
    pub fn members_within(&self, reach: &BigInt) -> BTreeSet<Vec<BigInt>> {
        let mut out = BTreeSet::new();
        for c in &self.components {
            out.extend(c.members_within(reach));
        }
        out
    }
}

/// Boolean expression tree over groupless F-sets and cosets. Kept in
/// negation normal form by `normalize`: complements sit on leaves only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FSetExpr {
    Groupless(GrouplessFSet),
    Coset { r: BigInt, s: BigInt },
    Union(Box<FSetExpr>, Box<FSetExpr>),
    Inter(Box<FSetExpr>, Box<FSetExpr>),
    Compl(Box<FSetExpr>),
}

impl FSetExpr {
    pub fn difference(a: FSetExpr, b: FSetExpr) -> FSetExpr {
        FSetExpr::Inter(Box::new(a), Box::new(FSetExpr::Compl(Box::new(b))))
    }

    /// Negation normal form: push complements down to the leaves.
    pub fn normalize(self) -> FSetExpr {
        fn go(e: FSetExpr, neg: bool) -> FSetExpr {
            match e {
                FSetExpr::Compl(inner) => go(*inner, !neg),
                FSetExpr::Union(a, b) => {
                    let (a, b) = (go(*a, neg), go(*b, neg));
                    if neg {
                        FSetExpr::Inter(Box::new(a), Box::new(b))
                    } else {
                        FSetExpr::Union(Box::new(a), Box::new(b))
                    }
                }
                FSetExpr::Inter(a, b) => {
                    let (a, b) = (go(*a, neg), go(*b, neg));
                    if neg {
                        FSetExpr::Union(Box::new(a), Box::new(b))
                    } else {
                        FSetExpr::Inter(Box::new(a), Box::new(b))
                    }
                }
                leaf => {
                    if neg {
                        FSetExpr::Compl(Box::new(leaf))
                    } else {
                        leaf
                    }
                }
            }
        }
        go(self, false)
    }

    pub fn to_autoset(&self, base: Base, dim: usize) -> Result<AutoSet, FsetError> {
        match self {
            FSetExpr::Groupless(g) => g.to_autoset(base, dim),
            FSetExpr::Coset { r, s } => {
                if dim != 1 {
                    return Err(FsetError::CosetDim);
                }
                coset_automaton(r, s, base)
            }
            FSetExpr::Union(a, b) => Ok(a.to_autoset(base, dim)?.union(&b.to_autoset(base, dim)?)?),
            FSetExpr::Inter(a, b) => {
                Ok(a.to_autoset(base, dim)?.intersection(&b.to_autoset(base, dim)?)?)
            }
            FSetExpr::Compl(a) => Ok(a.to_autoset(base, dim)?.complement()),
        }
    }

    /// Exact symbolic membership (dimension 1 for cosets).
    pub fn contains(&self, x: &[BigInt]) -> bool {
        match self {
            FSetExpr::Groupless(g) => g.contains(x),
            FSetExpr::Coset { r, s } => {
                assert_eq!(x.len(), 1);
                (&x[0] - r).mod_floor(s).is_zero()
            }
            FSetExpr::Union(a, b) => a.contains(x) || b.contains(x),
            FSetExpr::Inter(a, b) => a.contains(x) && b.contains(x),
            FSetExpr::Compl(a) => !a.contains(x),
        }
    }

    /// Human-readable rendering for reports and certificates.
    pub fn render(&self) -> String {
        match self {
            FSetExpr::Groupless(g) => {
                let comps: Vec<String> = g
                    .components
                    .iter()
                    .map(|c| {
                        let t = render_tuple(&c.translate);
                        if c.cycles.is_empty() {
                            format!("{{{t}}}")
                        } else {
                            let cs: Vec<String> = c
                                .cycles
                                .iter()
                                .map(|cy| format!("C({};{})", render_tuple(&cy.a), cy.delta))
                                .collect();
                            format!("trans({t}, {})", cs.join(" + "))
                        }
                    })
                    .collect();
                if comps.is_empty() {
                    "{}".to_string()
                } else {
                    comps.join(" | ")
                }
            }
            FSetExpr::Coset { r, s } => format!("coset({r},{s})"),
            FSetExpr::Union(a, b) => format!("({} | {})", a.render(), b.render()),
            FSetExpr::Inter(a, b) => format!("({} & {})", a.render(), b.render()),
            FSetExpr::Compl(a) => format!("!({})", a.render()),
        }
    }
}

fn render_tuple(t: &[BigInt]) -> String {
    if t.len() == 1 {
        t[0].to_string()
    } else {
        let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(d: u32) -> Base {
        Base::new(d).unwrap()
    }

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn cycle_elements_examples() {
        // C(d-1; 1) elements are d^n - 1.
        for d in [2u32, 3, 10] {
            let c = CycleSet::scalar(b(d), d as i64 - 1, 1);
            let els = c.elements(3);
            let dd = big(d as i64);
            assert_eq!(els[0][0], &dd - 1);
            assert_eq!(els[1][0], &dd * &dd - 1);
            assert_eq!(els[2][0], &dd * &dd * &dd - 1);
        }
        // repunits
        let c = CycleSet::scalar(b(10), 1, 1);
        let els: Vec<BigInt> = c.elements(3).into_iter().map(|mut e| e.pop().unwrap()).collect();
        assert_eq!(els, vec![big(1), big(11), big(111)]);
    }

    #[test]
    fn powers_identity_desk_check() {
        // d^N = {1} ∪ (1 + C(d-1; 1)), checked for the first elements.
        for d in [2u32, 3, 10] {
            let c = CycleSet::scalar(b(d), d as i64 - 1, 1);
            let mut powers: BTreeSet<BigInt> = BTreeSet::new();
            powers.insert(big(1));
            for e in c.elements(8) {
                powers.insert(&e[0] + 1);
            }
            let mut expect = BTreeSet::new();
            let mut p = BigInt::one();
            for _ in 0..9 {
                expect.insert(p.clone());
                p *= d;
            }
            assert_eq!(powers, expect);
        }
    }

    #[test]
    fn word_form_examples() {
        let c = CycleSet::scalar(b(10), 21, 2);
        let w = c.word_form();
        assert_eq!(w, Word::scalar(b(10), &[1, 2]));
        assert_eq!(w.power(2).value(), big(2121));

        let z = CycleSet::scalar(b(10), 0, 3);
        assert_eq!(z.word_form(), Word::scalar(b(10), &[0, 0, 0]));

        // overflow folded into the top letter: a = 12345, delta = 2
        let o = CycleSet::scalar(b(10), 12345, 2);
        let w = o.word_form();
        assert_eq!(w.len(), 2);
        assert_eq!(w.value(), big(12345));
        // elements match [sigma^n]
        for n in 1..5usize {
            assert_eq!(w.power(n).value(), o.elements(n).last().unwrap()[0]);
        }
    }

    #[test]
    fn cycle_autoset_matches_elements() {
        let c = CycleSet::scalar(b(3), 5, 1);
        let s = c.to_autoset().unwrap();
        let els: BTreeSet<BigInt> =
            c.elements(8).into_iter().map(|mut e| e.pop().unwrap()).collect();
        for v in -30i64..2000 {
            assert_eq!(s.member_scalar(&big(v)), els.contains(&big(v)), "v themes {v}");
        }
    }

    #[test]
    fn cycle_to_regex_top_digit() {
        // C(d-1; 1): N = 1, u = (d-1), v = (d-1), w = eps.
        for d in [2u32, 3, 10] {
            let c = CycleSet::scalar(b(d), d as i64 - 1, 1);
            let r = cycle_to_regex(&c).unwrap();
            assert_eq!(r.threshold, 1);
            assert_eq!(r.u, Word::scalar(b(d), &[d as i64 - 1]));
            assert_eq!(r.v, Word::scalar(b(d), &[d as i64 - 1]));
            assert!(r.w.is_empty());
            assert!(r.exceptions.is_empty());
            for k in 0..=10usize {
                let family = r.u.concat(&r.v.power(k)).unwrap().concat(&r.w).unwrap().value();
                let direct = c.elements(k + 1).last().unwrap()[0].clone();
                assert_eq!(family, direct);
            }
        }
    }

    #[test]
    fn cycle_to_regex_repunits_and_fives() {
        let r = cycle_to_regex(&CycleSet::scalar(b(10), 1, 1)).unwrap();
        assert_eq!(r.u, Word::scalar(b(10), &[1]));
        assert_eq!(r.v, Word::scalar(b(10), &[1]));
        assert!(r.w.is_empty());
        assert!(r.exceptions.is_empty());

        let r5 = cycle_to_regex(&CycleSet::scalar(b(10), 5, 1)).unwrap();
        for k in 0..6usize {
            let val = r5.u.concat(&r5.v.power(k)).unwrap().concat(&r5.w).unwrap().value();
            let expect: BigInt = (0..=k).map(|i| big(5) * big(10).pow(i as u32)).sum();
            assert_eq!(val, expect);
        }
    }

    #[test]
    fn cycle_to_regex_random_agreement() {
        let mut seed = 0x12345678u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..50 {
            let d = [2u32, 3, 10][(next() % 3) as usize];
            let delta = 1 + (next() % 3) as u32;
            let a = (next() % 10_000) as i64;
            let c = CycleSet::scalar(b(d), a, delta);
            let r = cycle_to_regex(&c).unwrap();
            let mut family: BTreeSet<BigInt> = BTreeSet::new();
            for k in 0..=12usize {
                family.insert(r.u.concat(&r.v.power(k)).unwrap().concat(&r.w).unwrap().value());
                let direct = c.elements(r.threshold + k).last().unwrap()[0].clone();
                assert!(
                    family.contains(&direct),
                    "d={d} a={a} delta={delta} k={k}: family misses sigma^(N+k)"
                );
            }
            // declared exceptions are exactly the elements the family misses
            let cycle_els: BTreeSet<BigInt> = c
                .elements(r.threshold + 12)
                .into_iter()
                .map(|mut e| e.pop().unwrap())
                .collect();
            let missed: BTreeSet<BigInt> =
                cycle_els.iter().filter(|e| !family.contains(*e)).cloned().collect();
            let declared: BTreeSet<BigInt> = r.exceptions.iter().cloned().collect();
            assert_eq!(missed, declared, "d={d} a={a} delta={delta}");
        }
    }

    #[test]
    fn translate_regex_identity_and_examples() {
        // gamma = 0: identity with threshold 0.
        let u = Word::scalar(b(10), &[5]);
        let v = Word::scalar(b(10), &[1]);
        let w = Word::empty(b(10), 1);
        let t = translate_regex(&big(0), &u, &v, &w).unwrap();
        assert_eq!(t.threshold, 0);
        assert_eq!(t.x, u);
        assert!(t.exceptions.is_empty());

        // gamma = 1 on {9, 99, ...}: the special branch gives powers of ten.
        let nine = Word::scalar(b(10), &[9]);
        let t2 = translate_regex(&big(1), &Word::empty(b(10), 1), &nine, &Word::empty(b(10), 1)).unwrap();
        let mut vals = Vec::new();
        for k in 0..6usize {
            vals.push(t2.x.concat(&t2.y.power(k)).unwrap().concat(&t2.z).unwrap().value());
        }
        let expect: Vec<BigInt> = (0..6u32).map(|k| big(10).pow(k)).collect();
        assert_eq!(vals, expect);

        // gamma = 3 on repunits: from the threshold on, values track 3 + repunit.
        let one = Word::scalar(b(10), &[1]);
        let t3 = translate_regex(&big(3), &one, &one, &Word::empty(b(10), 1)).unwrap();
        for k in 0..6usize {
            let v1 = t3.x.concat(&t3.y.power(k)).unwrap().concat(&t3.z).unwrap().value();
            let original = one.concat(&one.power(t3.threshold + k)).unwrap().value();
            assert_eq!(v1, big(3) + original);
        }
        // exceptions + family = whole translated set, for the first terms
        let mut family: BTreeSet<BigInt> = t3.exceptions.iter().cloned().collect();
        for k in 0..10usize {
            family.insert(t3.x.concat(&t3.y.power(k)).unwrap().concat(&t3.z).unwrap().value());
        }
        for k in 0..8usize {
            let translated = big(3) + one.concat(&one.power(k)).unwrap().value();
            assert!(family.contains(&translated), "k={k}");
        }
    }

    #[test]
    fn coset_membership() {
        let c = coset_automaton(&big(2), &big(5), b(10)).unwrap();
        assert!(c.member_scalar(&big(17)));
        assert!(!c.member_scalar(&big(18)));
        assert!(c.member_scalar(&big(-3)));
        let all = coset_automaton(&big(0), &big(1), b(10)).unwrap();
        for v in [-5i64, 0, 123] {
            assert!(all.member_scalar(&big(v)));
        }
        assert!(coset_automaton(&big(1), &big(0), b(10)).is_err());
    }

    #[test]
    fn fset_union_of_powers_matches_enumeration() {
        // {1} ∪ (1 + C(d-1;1)) equals the powers of d; check over a window.
        let d = 3u32;
        let fset = GrouplessFSet {
            components: vec![
                FComponent { translate: vec![big(1)], cycles: vec![] },
                FComponent {
                    translate: vec![big(1)],
                    cycles: vec![CycleSet::scalar(b(d), d as i64 - 1, 1)],
                },
            ],
        };
        let s = fset.to_autoset(b(d), 1).unwrap();
        let mut powers = BTreeSet::new();
        let mut p = BigInt::one();
        while p < big(100_000) {
            powers.insert(p.clone());
            p *= d;
        }
        let symbolic = fset.members_within(&big(100_000));
        for v in -100i64..100_000 {
            let expect = powers.contains(&big(v));
            assert_eq!(s.member_scalar(&big(v)), expect, "v = {v}");
            assert_eq!(symbolic.contains(&vec![big(v)]), expect, "symbolic v = {v}");
        }
    }

    #[test]
    fn fset_expr_boolean_and_nnf() {
        let d = b(10);
        let powers = FSetExpr::Groupless(GrouplessFSet {
            components: vec![
                FComponent { translate: vec![big(1)], cycles: vec![] },
                FComponent { translate: vec![big(1)], cycles: vec![CycleSet::scalar(d, 9, 1)] },
            ],
        });
        let evens = FSetExpr::Coset { r: big(0), s: big(2) };
        let expr = FSetExpr::difference(powers.clone(), evens.clone());
        let nnf = expr.clone().normalize();
        let s = nnf.to_autoset(d, 1).unwrap();
        for v in -50i64..=1100 {
            let expect = expr.contains(&[big(v)]);
            assert_eq!(s.member_scalar(&big(v)), expect, "v = {v}");
            // odd powers of ten survive the difference: 10 is even, 1 is odd
            if v == 1 {
                assert!(expect);
            }
            if v == 10 || v == 100 {
                assert!(!expect);
            }
        }
        // NNF has complements only on leaves
        fn check_nnf(e: &FSetExpr, under: bool) -> bool {
            match e {
                FSetExpr::Compl(inner) => {
                    !under && matches!(**inner, FSetExpr::Groupless(_) | FSetExpr::Coset { .. })
                }
                FSetExpr::Union(a, b) | FSetExpr::Inter(a, b) => {
                    check_nnf(a, false) && check_nnf(b, false)
                }
                _ => true,
            }
        }
        assert!(check_nnf(&nnf, false));
    }

    #[test]
    fn groupless_fsets_are_sparse() {
        let d = b(3);
        let fset = GrouplessFSet {
            components: vec![FComponent {
                translate: vec![big(7)],
                cycles: vec![CycleSet::scalar(d, 5, 2), CycleSet::scalar(d, 1, 1)],
            }],
        };
        let s = fset.to_autoset(d, 1).unwrap();
        assert!(s.is_sparse_set().unwrap());
        // spot membership against symbolic enumeration
        let symbolic = fset.members_within(&big(2000));
        for v in -200i64..2000 {
            assert_eq!(s.member_scalar(&big(v)), symbolic.contains(&vec![big(v)]), "v = {v}");
        }
    }
}
