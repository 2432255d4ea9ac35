//! Base-d positional representations of integers and integer tuples.
//!
//! Words are finite strings of integer-tuple letters, least significant
//! digit first: the word `k0 k1 ... kn` evaluates to `sum k_i d^i`
//! componentwise. Canonical representations use the usual digits of each
//! component (negated for negative components), zero-padded to a common
//! length; the canonical representation of 0 is the empty word.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::fmt;
use std::str::FromStr;

/// A positional base `d >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct Base(u32);

impl Base {
    pub fn new(d: u32) -> Result<Base, DigitError> {
        if d < 2 {
            return Err(DigitError::BadBase(d));
        }
        Ok(Base(d))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn big(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// d^k as a big integer.
    pub fn pow(self, k: usize) -> BigInt {
        self.big().pow(k as u32)
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DigitError {
    #[error("base must be at least 2, got {0}")]
    BadBase(u32),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(Base, Base),
    #[error("malformed word literal: {0}")]
    Parse(String),
}

/// One letter: an m-tuple of unbounded integers.
///
/// Letters are not restricted to the standard digit ranges; automaton
/// boundaries check alphabet membership where it matters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(pub Vec<BigInt>);

impl Letter {
    pub fn scalar(v: impl Into<BigInt>) -> Letter {
        Letter(vec![v.into()])
    }

    pub fn tuple(vs: Vec<BigInt>) -> Letter {
        Letter(vs)
    }

    pub fn zero(dim: usize) -> Letter {
        Letter(vec![BigInt::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|e| e.is_zero())
    }

    /// Entrywise: every entry in `[-d+1, d-1]`.
    pub fn is_standard_signed(&self, base: Base) -> bool {
        let d = base.big();
        self.0.iter().all(|e| e.abs() < d)
    }

    /// Entrywise: every entry in `[0, d-1]`.
    pub fn is_standard_nonneg(&self, base: Base) -> bool {
        let d = base.big();
        self.0.iter().all(|e| !e.is_negative() && *e < d)
    }

    pub fn negate(&self) -> Letter {
        Letter(self.0.iter().map(|e| -e).collect())
    }

    /// Letter with every entry multiplied by `c`.
    pub fn scale(&self, c: &BigInt) -> Letter {
        Letter(self.0.iter().map(|e| e * c).collect())
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            write!(f, "{}", self.0[0])
        } else {
            write!(f, "(")?;
            for (i, e) in self.0.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", e)?;
            }
            write!(f, ")")
        }
    }
}

/// A finite word of letters over a fixed base and dimension, LSB first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    letters: Vec<Letter>,
    base: Base,
    dim: usize,
}

impl Word {
    pub fn new(base: Base, dim: usize, letters: Vec<Letter>) -> Result<Word, DigitError> {
        for l in &letters {
            if l.dim() != dim {
                return Err(DigitError::DimMismatch(l.dim(), dim));
            }
        }
        Ok(Word { letters, base, dim })
    }

    pub fn empty(base: Base, dim: usize) -> Word {
        Word { letters: Vec::new(), base, dim }
    }

    /// One-dimensional word from small digits, LSB first.
    pub fn scalar(base: Base, digits: &[i64]) -> Word {
        Word {
            letters: digits.iter().map(|&v| Letter::scalar(v)).collect(),
            base,
            dim: 1,
        }
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn push(&mut self, l: Letter) {
        assert_eq!(l.dim(), self.dim, "letter dimension mismatch");
        self.letters.push(l);
    }

    pub fn is_standard_signed(&self) -> bool {
        self.letters.iter().all(|l| l.is_standard_signed(self.base))
    }

    pub fn is_standard_nonneg(&self) -> bool {
        self.letters.iter().all(|l| l.is_standard_nonneg(self.base))
    }

    /// `[k0 k1 ... kn] = sum k_i d^i`, componentwise; the empty word is 0.
    pub fn evaluate(&self) -> Vec<BigInt> {
        let mut acc = vec![BigInt::zero(); self.dim];
        let d = self.base.big();
        for l in self.letters.iter().rev() {
            for (a, e) in acc.iter_mut().zip(&l.0) {
                *a = &*a * &d + e;
            }
        }
        acc
    }

    /// Scalar evaluation; panics unless `dim == 1`.
    pub fn value(&self) -> BigInt {
        assert_eq!(self.dim, 1, "value() requires a one-dimensional word");
        self.evaluate().pop().unwrap()
    }

    pub fn concat(&self, other: &Word) -> Result<Word, DigitError> {
        if self.base != other.base {
            return Err(DigitError::BaseMismatch(self.base, other.base));
        }
        if self.dim != other.dim {
            return Err(DigitError::DimMismatch(self.dim, other.dim));
        }
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Ok(Word { letters, base: self.base, dim: self.dim })
    }

    /// n-fold concatenation of `self` with itself; `power(0)` is the empty word.
    pub fn power(&self, n: usize) -> Word {
        let mut letters = Vec::with_capacity(self.letters.len() * n);
        for _ in 0..n {
            letters.extend(self.letters.iter().cloned());
        }
        Word { letters, base: self.base, dim: self.dim }
    }

    /// The shift `T_i`: every letter multiplied by d^i, so that
    /// `evaluate(shift(w, i)) = d^i * evaluate(w)`.
    pub fn shift(&self, i: usize) -> Word {
        let c = self.base.pow(i);
        Word {
            letters: self.letters.iter().map(|l| l.scale(&c)).collect(),
            base: self.base,
            dim: self.dim,
        }
    }

    pub fn negate(&self) -> Word {
        Word {
            letters: self.letters.iter().map(|l| l.negate()).collect(),
            base: self.base,
            dim: self.dim,
        }
    }

    /// Appends zero letters up to length `len` (no-op when already longer).
    pub fn zero_pad(&self, len: usize) -> Word {
        let mut letters = self.letters.clone();
        while letters.len() < len {
            letters.push(Letter::zero(self.dim));
        }
        Word { letters, base: self.base, dim: self.dim }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "eps");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if self.dim == 1 {
                write!(f, "{}", l.0[0])?;
            } else {
                write!(f, "{}", l)?;
            }
        }
        Ok(())
    }
}

/// Digits of a nonnegative integer in base d, LSB first; empty for 0.
pub fn digits_of(n: &BigInt, base: Base) -> Vec<BigInt> {
    assert!(!n.is_negative());
    let mut out = Vec::new();
    let d = base.big();
    let mut rest = n.clone();
    while !rest.is_zero() {
        let q = &rest / &d;
        let r = &rest - &q * &d;
        out.push(r);
        rest = q;
    }
    out
}

/// The canonical representation of an integer tuple.
///
/// Componentwise usual digits (negated for negative components), all
/// components padded with trailing zeroes to the maximum component length.
pub fn canonical_rep(a: &[BigInt], base: Base) -> Word {
    let dim = a.len();
    let per_component: Vec<Vec<BigInt>> = a
        .iter()
        .map(|c| {
            if c.is_negative() {
                digits_of(&-c, base).into_iter().map(|x| -x).collect()
            } else {
                digits_of(c, base)
            }
        })
        .collect();
    let len = per_component.iter().map(|v| v.len()).max().unwrap_or(0);
    let mut letters = Vec::with_capacity(len);
    for i in 0..len {
        let entries = per_component
            .iter()
            .map(|v| v.get(i).cloned().unwrap_or_else(BigInt::zero))
            .collect();
        letters.push(Letter(entries));
    }
    Word { letters, base, dim }
}

/// Canonical representation of a single integer.
pub fn canonical_rep_scalar(a: &BigInt, base: Base) -> Word {
    canonical_rep(std::slice::from_ref(a), base)
}

/// The word of length `len` over the nonnegative digits representing `v`,
/// or `None` when `v` is out of `[0, d^len)`.
pub fn nonneg_rep_fixed(v: &BigInt, base: Base, len: usize) -> Option<Word> {
    if v.is_negative() || *v >= base.pow(len) {
        return None;
    }
    let mut w = canonical_rep_scalar(v, base);
    debug_assert!(w.len() <= len);
    w = w.zero_pad(len);
    Some(w)
}

/// `+_K`: the unique length-`k` nonnegative-digit word representing
/// `[u] + [v]`, when `0 <= [u] + [v] < d^k`.
pub fn add_fixed_length(u: &Word, v: &Word, k: usize) -> Option<Word> {
    assert_eq!(u.dim(), 1);
    assert_eq!(v.dim(), 1);
    assert_eq!(u.base(), v.base());
    debug_assert!(u.is_standard_nonneg() && v.is_standard_nonneg());
    let sum = u.value() + v.value();
    nonneg_rep_fixed(&sum, u.base(), k)
}

/// Parses the CLI word literal syntax: letters space-separated, LSB first,
/// tuples in parentheses, e.g. `(-3,2) (-2,3) (0,4)` or `1 0 2`.
pub fn parse_word(text: &str, base: Base) -> Result<Word, DigitError> {
    let text = text.trim();
    if text.is_empty() || text == "eps" {
        return Ok(Word::empty(base, 1));
    }
    let mut letters: Vec<Letter> = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        if let Some(stripped) = rest.strip_prefix('(') {
            let close = stripped
                .find(')')
                .ok_or_else(|| DigitError::Parse(format!("unclosed '(' in {text:?}")))?;
            let inner = &stripped[..close];
            let entries: Result<Vec<BigInt>, _> = inner
                .split(',')
                .map(|p| BigInt::from_str(p.trim()).map_err(|e| DigitError::Parse(e.to_string())))
                .collect();
            letters.push(Letter(entries?));
            rest = &stripped[close + 1..];
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            let tok = &rest[..end];
            let v = BigInt::from_str(tok).map_err(|e| DigitError::Parse(e.to_string()))?;
            letters.push(Letter(vec![v]));
            rest = &rest[end..];
        }
    }
    let dim = letters.first().map(|l| l.dim()).unwrap_or(1);
    Word::new(base, dim, letters)
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
    fn evaluate_paper_pair_example() {
        let w = Word::new(
            b(10),
            2,
            vec![
                Letter(vec![big(-3), big(2)]),
                Letter(vec![big(-2), big(3)]),
                Letter(vec![big(0), big(4)]),
            ],
        )
        .unwrap();
        assert_eq!(w.evaluate(), vec![big(-23), big(432)]);
    }

    #[test]
    fn evaluate_empty_is_zero() {
        let w = Word::empty(b(10), 3);
        assert_eq!(w.evaluate(), vec![big(0), big(0), big(0)]);
    }

    #[test]
    fn two_signed_words_same_value() {
        // (-1)(1) and (d-1)(0) both evaluate to d-1.
        for d in [2u32, 3, 10] {
            let w1 = Word::scalar(b(d), &[-1, 1]);
            let w2 = Word::scalar(b(d), &[d as i64 - 1, 0]);
            assert_eq!(w1.value(), big(d as i64 - 1));
            assert_eq!(w1.value(), w2.value());
            assert_ne!(w1, w2);
        }
    }

    #[test]
    fn canonical_rep_paper_example() {
        let w = canonical_rep(&[big(-23), big(432)], b(10));
        assert_eq!(
            w.letters(),
            &[
                Letter(vec![big(-3), big(2)]),
                Letter(vec![big(-2), big(3)]),
                Letter(vec![big(0), big(4)]),
            ]
        );
    }

    #[test]
    fn canonical_rep_zero_is_empty() {
        assert!(canonical_rep(&[big(0)], b(7)).is_empty());
        assert!(canonical_rep(&[big(0), big(0)], b(3)).is_empty());
    }

    #[test]
    fn canonical_rep_negative() {
        let w = canonical_rep_scalar(&big(-7), b(2));
        assert_eq!(w, Word::scalar(b(2), &[-1, -1, -1]));
        assert_eq!(w.value(), big(-7));
    }

    #[test]
    fn canonical_rep_no_trailing_zero_and_standard() {
        for a in -400i64..400 {
            for d in [2u32, 3, 10] {
                let w = canonical_rep_scalar(&big(a), b(d));
                assert_eq!(w.value(), big(a), "round trip a={a} d={d}");
                assert!(w.is_standard_signed());
                if a >= 0 {
                    assert!(w.is_standard_nonneg());
                }
                if let Some(last) = w.letters().last() {
                    assert!(!last.is_zero(), "trailing zero for a={a} d={d}");
                }
            }
        }
    }

    #[test]
    fn repunit_power() {
        let one = Word::scalar(b(10), &[1]);
        let w = one.power(3);
        assert_eq!(w.value(), big(111));
        assert!(one.power(0).is_empty());
    }

    #[test]
    fn shift_scales_value() {
        let w = Word::scalar(b(10), &[1, 2]);
        let s = w.shift(1);
        assert_eq!(s.letters(), &[Letter::scalar(10), Letter::scalar(20)]);
        assert_eq!(s.value(), big(210));
    }

    #[test]
    fn concat_identity_and_law() {
        let sigma = Word::scalar(b(10), &[4, 5]);
        let eps = Word::empty(b(10), 1);
        assert_eq!(eps.concat(&sigma).unwrap(), sigma);
        let u = Word::scalar(b(3), &[1, 2, 0, 1]);
        let v = Word::scalar(b(3), &[2, 2]);
        let uv = u.concat(&v).unwrap();
        assert_eq!(uv.value(), u.value() + b(3).pow(u.len()) * v.value());
    }

    #[test]
    fn concat_mismatch_errors() {
        let u = Word::scalar(b(3), &[1]);
        let v = Word::scalar(b(5), &[1]);
        assert!(matches!(u.concat(&v), Err(DigitError::BaseMismatch(_, _))));
        let t = Word::new(b(3), 2, vec![Letter(vec![big(1), big(1)])]).unwrap();
        assert!(matches!(u.concat(&t), Err(DigitError::DimMismatch(_, _))));
    }

    #[test]
    fn add_fixed_length_examples() {
        // 5 + 7 = 12 as the length-2 word "2 1" (LSB first).
        let s = Word::scalar(b(10), &[5]);
        let t = Word::scalar(b(10), &[7]);
        let r = add_fixed_length(&s, &t, 2).unwrap();
        assert_eq!(r, Word::scalar(b(10), &[2, 1]));

        let e = Word::empty(b(10), 1);
        assert_eq!(add_fixed_length(&e, &e, 0).unwrap(), e);

        // 99 + 1 = 100 does not fit in two digits.
        let n = Word::scalar(b(10), &[9, 9]);
        let one = Word::scalar(b(10), &[1]);
        assert_eq!(add_fixed_length(&n, &one, 2), None);
        assert_eq!(
            add_fixed_length(&n, &one, 3).unwrap(),
            Word::scalar(b(10), &[0, 0, 1])
        );
    }

    #[test]
    fn parse_and_display_words() {
        let w = parse_word("(-3,2) (-2,3) (0,4)", b(10)).unwrap();
        assert_eq!(w.evaluate(), vec![big(-23), big(432)]);
        let v = parse_word("1 0 2", b(3)).unwrap();
        assert_eq!(v, Word::scalar(b(3), &[1, 0, 2]));
        assert_eq!(format!("{}", v), "1 0 2");
        assert_eq!(parse_word("", b(3)).unwrap(), Word::empty(b(3), 1));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn roundtrip_eval_canonical(a in -1_000_000i64..1_000_000, d in prop::sample::select(vec![2u32, 3, 10])) {
                let w = canonical_rep_scalar(&big(a), b(d));
                prop_assert_eq!(w.value(), big(a));
            }

            #[test]
            fn concat_law(
                u in prop::collection::vec(-9i64..=9, 0..20),
                v in prop::collection::vec(-9i64..=9, 0..20),
                d in prop::sample::select(vec![2u32, 3, 10]),
            ) {
                let wu = Word::scalar(b(d), &u);
                let wv = Word::scalar(b(d), &v);
                let uv = wu.concat(&wv).unwrap();
                prop_assert_eq!(uv.value(), wu.value() + b(d).pow(wu.len()) * wv.value());
            }

            #[test]
            fn power_recurrence(
                sigma in prop::collection::vec(-2i64..=2, 1..5),
                n in 0usize..10,
                d in prop::sample::select(vec![2u32, 3, 10]),
            ) {
                let s = Word::scalar(b(d), &sigma);
                let lhs = s.power(n + 1).value();
                let rhs = s.value() + b(d).pow(s.len()) * s.power(n).value();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn shift_law(sigma in prop::collection::vec(-9i64..=9, 0..8), i in 0usize..5) {
                let s = Word::scalar(b(10), &sigma);
                prop_assert_eq!(s.shift(i).value(), b(10).pow(i) * s.value());
            }
        }
    }
}
