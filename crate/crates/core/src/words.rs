//! Continued fractions, multi-indices and the composition words that drive
//! every renormalization step.
//!
//! A multi-index `(a₁,b₁,…,aₙ,bₙ)` stands for the composition
//! `ξ^{bₙ}∘η^{aₙ}∘…∘ξ^{b₁}∘η^{a₁}`. Letter lists produced here are always in
//! application order, so `η^{a₁}` comes first.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WordsError {
    #[error("rotation number must lie strictly between 0 and 1, got {0}")]
    OutOfRange(String),
    #[error("continued-fraction digits must be positive, got {0:?}")]
    BadDigits(Vec<u32>),
    #[error("inconsistent periodic tail: {0}")]
    BadTail(String),
    #[error("multi-index must have an even, nonzero number of entries, got {0}")]
    OddLength(usize),
    #[error("{0} does not succeed {1}")]
    NotComparable(MultiIndex, MultiIndex),
    #[error("rotation number has only {available} digits, level {requested} requested")]
    ShortExpansion { requested: usize, available: usize },
    #[error("no hat decomposition for {0}: {1}")]
    NoHat(MultiIndex, &'static str),
    #[error("no tilde word for {0}: last a-entry is zero")]
    NoTilde(MultiIndex),
    #[error("word {0} cannot be split as η∘F∘(rest): {1}")]
    NoSplit(MultiIndex, &'static str),
}

/// One step of the Gauss map `x ↦ {1/x}`, returning the digit `⌊1/x⌋` too.
pub trait GaussNumber: Sized {
    fn gauss_step(&self) -> Result<(u64, Self), WordsError>;
}

impl GaussNumber for f64 {
    fn gauss_step(&self) -> Result<(u64, f64), WordsError> {
        let x = *self;
        if !(x > 0.0 && x < 1.0) {
            return Err(WordsError::OutOfRange(x.to_string()));
        }
        let inv = 1.0 / x;
        let d = inv.floor();
        Ok((d as u64, inv - d))
    }
}

impl GaussNumber for Ratio<i64> {
    fn gauss_step(&self) -> Result<(u64, Ratio<i64>), WordsError> {
        let zero = Ratio::from_integer(0);
        let one = Ratio::from_integer(1);
        if *self <= zero || *self >= one {
            return Err(WordsError::OutOfRange(self.to_string()));
        }
        let inv = self.recip();
        let d = inv.floor();
        Ok((d.to_integer() as u64, inv - d))
    }
}

pub fn gauss_step<T: GaussNumber>(theta: &T) -> Result<(u64, T), WordsError> {
    theta.gauss_step()
}

/// A rotation number in `(0,1)` given by its continued-fraction digits.
///
/// `digits` holds the preperiod followed by exactly one copy of the period.
/// With `period == 0` the expansion is finite: either an exact rational or
/// a float-derived prefix whose tail is unknown.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RotationRepr", into = "RotationRepr")]
pub struct RotationNumber {
    digits: Vec<u32>,
    preperiod: usize,
    period: usize,
}

#[derive(Serialize, Deserialize)]
struct RotationRepr {
    digits: Vec<u32>,
    #[serde(default)]
    preperiod: usize,
    #[serde(default)]
    period: usize,
}

impl TryFrom<RotationRepr> for RotationNumber {
    type Error = WordsError;
    fn try_from(r: RotationRepr) -> Result<Self, WordsError> {
        RotationNumber::new(r.digits, r.preperiod, r.period)
    }
}

impl From<RotationNumber> for RotationRepr {
    fn from(r: RotationNumber) -> Self {
        RotationRepr { digits: r.digits, preperiod: r.preperiod, period: r.period }
    }
}

impl RotationNumber {
    pub fn new(digits: Vec<u32>, preperiod: usize, period: usize) -> Result<Self, WordsError> {
        if digits.is_empty() || digits.iter().any(|&d| d == 0) {
            return Err(WordsError::BadDigits(digits));
        }
        if period > 0 && digits.len() != preperiod + period {
            return Err(WordsError::BadTail(format!(
                "{} digits given for preperiod {preperiod} and period {period}",
                digits.len()
            )));
        }
        if period == 0 && preperiod != 0 && preperiod != digits.len() {
            return Err(WordsError::BadTail(format!(
                "finite expansion with preperiod {preperiod} but {} digits",
                digits.len()
            )));
        }
        if period == 0 && digits == [1] {
            return Err(WordsError::OutOfRange("1".into()));
        }
        Ok(RotationNumber { digits, preperiod: if period == 0 { 0 } else { preperiod }, period })
    }

    /// θ* = (√5−1)/2 = [0; 1, 1, 1, …].
    pub fn golden() -> Self {
        RotationNumber { digits: vec![1], preperiod: 0, period: 1 }
    }

    pub fn silver() -> Self {
        RotationNumber { digits: vec![2], preperiod: 0, period: 1 }
    }

    pub fn periodic(period: Vec<u32>) -> Result<Self, WordsError> {
        let p = period.len();
        Self::new(period, 0, p)
    }

    pub fn from_rational(theta: Ratio<i64>) -> Result<Self, WordsError> {
        let mut digits = Vec::new();
        let mut x = theta;
        loop {
            let (d, r) = x.gauss_step()?;
            digits.push(d as u32);
            if r == Ratio::from_integer(0) {
                break;
            }
            x = r;
        }
        Self::new(digits, 0, 0)
    }

    /// Finite digit prefix of a float. The tail is not trusted.
    pub fn from_f64(theta: f64, count: usize) -> Result<Self, WordsError> {
        let mut digits = Vec::new();
        let mut x = theta;
        for _ in 0..count.max(1) {
            let (d, r) = x.gauss_step()?;
            digits.push(d as u32);
            if r <= 1e-15 {
                break;
            }
            x = r;
        }
        Self::new(digits, 0, 0)
    }

    pub fn preperiod(&self) -> usize {
        self.preperiod
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn is_finite(&self) -> bool {
        self.period == 0
    }

    /// Number of available digits, `None` when the expansion is infinite.
    pub fn len(&self) -> Option<usize> {
        if self.period == 0 {
            Some(self.digits.len())
        } else {
            None
        }
    }

    /// Digit `a_i`, 1-based.
    pub fn digit(&self, i: usize) -> Option<u32> {
        if i == 0 {
            return None;
        }
        if i <= self.digits.len() {
            return Some(self.digits[i - 1]);
        }
        if self.period == 0 {
            return None;
        }
        let j = (i - 1 - self.preperiod) % self.period;
        Some(self.digits[self.preperiod + j])
    }

    pub fn digits(&self, n: usize) -> Result<Vec<u32>, WordsError> {
        (1..=n)
            .map(|i| {
                self.digit(i).ok_or(WordsError::ShortExpansion {
                    requested: n,
                    available: self.digits.len(),
                })
            })
            .collect()
    }

    pub fn value(&self) -> f64 {
        let depth = if self.period == 0 { self.digits.len() } else { self.preperiod + 120 };
        let mut x = 0.0;
        for i in (1..=depth).rev() {
            x = 1.0 / (self.digit(i).unwrap() as f64 + x);
        }
        x
    }

    /// Multiplier `e^{2πiθ}`.
    pub fn multiplier(&self) -> num_complex::Complex64 {
        num_complex::Complex64::from_polar(1.0, std::f64::consts::TAU * self.value())
    }

    /// The Gauss map shifted `m` times.
    pub fn shift(&self, m: usize) -> Result<Self, WordsError> {
        if m == 0 {
            return Ok(self.clone());
        }
        if self.period == 0 {
            if m >= self.digits.len() {
                return Err(WordsError::ShortExpansion { requested: m + 1, available: self.digits.len() });
            }
            return Self::new(self.digits[m..].to_vec(), 0, 0);
        }
        if m <= self.preperiod {
            return Self::new(self.digits[m..].to_vec(), self.preperiod - m, self.period);
        }
        let rot = (m - self.preperiod) % self.period;
        let mut tail: Vec<u32> = self.digits[self.preperiod..].to_vec();
        tail.rotate_left(rot);
        Self::new(tail, 0, self.period)
    }
}

/// Convergents `(p_k, q_k)` for `k = 0, 1, …`, starting from `p₀/q₀ = 0/1`.
/// Stops early when a finite expansion runs out of digits.
pub fn convergents(theta: &RotationNumber, n: usize) -> Vec<(u64, u64)> {
    let mut out = Vec::with_capacity(n);
    let (mut p2, mut q2) = (1u64, 0u64);
    let (mut p1, mut q1) = (0u64, 1u64);
    if n == 0 {
        return out;
    }
    out.push((p1, q1));
    for k in 1..n {
        let Some(a) = theta.digit(k) else { break };
        let a = a as u64;
        let (p, q) = (a * p1 + p2, a * q1 + q2);
        out.push((p, q));
        (p2, q2, p1, q1) = (p1, q1, p, q);
    }
    out
}

/// Operator exponent: `k = p` for even periods, `2p` for odd ones.
pub fn k_of_period(p: usize) -> usize {
    if p % 2 == 0 {
        p
    } else {
        2 * p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    Eta,
    Xi,
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Eta => write!(f, "η"),
            Letter::Xi => write!(f, "ξ"),
        }
    }
}

/// `(a₁,b₁,…,aₙ,bₙ)`, serialized as a flat integer array.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct MultiIndex(Vec<u32>);

impl TryFrom<Vec<u32>> for MultiIndex {
    type Error = WordsError;
    fn try_from(v: Vec<u32>) -> Result<Self, WordsError> {
        MultiIndex::new(v)
    }
}

impl From<MultiIndex> for Vec<u32> {
    fn from(m: MultiIndex) -> Vec<u32> {
        m.0
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `s ≺ t`
    Precedes,
    /// `s ≻ t`
    Succeeds,
    Equal,
    Incomparable,
}

impl MultiIndex {
    /// Requires only an even, nonzero number of entries. Admissibility is
    /// a separate query because predecessors and tilde words fall outside it.
    pub fn new(entries: Vec<u32>) -> Result<Self, WordsError> {
        if entries.is_empty() || entries.len() % 2 != 0 {
            return Err(WordsError::OddLength(entries.len()));
        }
        Ok(MultiIndex(entries))
    }

    /// `aⱼ ≥ 1` for `j ≥ 2` and `bⱼ ≥ 1` for `j ≤ n−1`, with a trailing
    /// `(0,0)` pair tolerated.
    pub fn is_admissible(&self) -> bool {
        let n = self.pairs();
        (0..n).all(|j| {
            let (a, b) = (self.0[2 * j], self.0[2 * j + 1]);
            let last = j + 1 == n;
            let trailing_empty = last && j > 0 && a == 0 && b == 0;
            (j == 0 || a >= 1 || trailing_empty) && (last || b >= 1)
        })
    }

    /// The empty word `(0,0)`.
    pub fn identity() -> Self {
        MultiIndex(vec![0, 0])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn pairs(&self) -> usize {
        self.0.len() / 2
    }

    pub fn a(&self, j: usize) -> u32 {
        self.0[2 * (j - 1)]
    }

    pub fn b(&self, j: usize) -> u32 {
        self.0[2 * (j - 1) + 1]
    }

    /// Total number of letters.
    pub fn len(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Canonical multi-index of a letter list given in application order.
    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut entries = Vec::new();
        let mut i = 0;
        while i < letters.len() || entries.is_empty() {
            let mut a = 0;
            while i < letters.len() && letters[i] == Letter::Eta {
                a += 1;
                i += 1;
            }
            let mut b = 0;
            while i < letters.len() && letters[i] == Letter::Xi {
                b += 1;
                i += 1;
            }
            entries.push(a);
            entries.push(b);
        }
        MultiIndex(entries)
    }

    /// `s ≻ t` in the partial order on multi-indices.
    pub fn succeeds(&self, t: &MultiIndex) -> bool {
        let n = self.pairs();
        let m = t.pairs();
        if m == 0 || m > n {
            return false;
        }
        let k = m - 1;
        if self.0[..2 * k] != t.0[..2 * k] {
            return false;
        }
        let (c, d) = (t.0[2 * k], t.0[2 * k + 1]);
        let (a, b) = (self.0[2 * k], self.0[2 * k + 1]);
        (c < a && d == 0) || (c == a && d < b)
    }

    /// All `t` with `self ≻ t`, ordered by word length.
    pub fn predecessors(&self) -> Vec<MultiIndex> {
        let mut out = Vec::with_capacity(self.len());
        for k in 0..self.pairs() {
            let head = &self.0[..2 * k];
            let (a, b) = (self.0[2 * k], self.0[2 * k + 1]);
            for c in 0..a {
                let mut e = head.to_vec();
                e.extend([c, 0]);
                out.push(MultiIndex(e));
            }
            for d in 0..b {
                let mut e = head.to_vec();
                e.extend([a, d]);
                out.push(MultiIndex(e));
            }
        }
        out
    }
}

pub fn compare(s: &MultiIndex, t: &MultiIndex) -> Relation {
    if s == t {
        Relation::Equal
    } else if s.succeeds(t) {
        Relation::Succeeds
    } else if t.succeeds(s) {
        Relation::Precedes
    } else {
        Relation::Incomparable
    }
}

/// `q̄ = s̄ ⊖ t̄`, defined for `s̄ ≻ t̄`; then `ζ^{s̄} = ζ^{q̄}∘ζ^{t̄}`.
pub fn subtract(s: &MultiIndex, t: &MultiIndex) -> Result<MultiIndex, WordsError> {
    if !s.succeeds(t) {
        return Err(WordsError::NotComparable(s.clone(), t.clone()));
    }
    let k = t.pairs() - 1;
    let (c, d) = (t.0[2 * k], t.0[2 * k + 1]);
    let (a, b) = (s.0[2 * k], s.0[2 * k + 1]);
    let mut q = Vec::with_capacity(s.0.len() - 2 * k);
    if d == 0 {
        q.extend([a - c, b]);
    } else {
        q.extend([0, b - d]);
    }
    q.extend_from_slice(&s.0[2 * k + 2..]);
    Ok(MultiIndex(q))
}

/// Letters of `ζ^{s̄}` in application order.
pub fn word_expand(s: &MultiIndex) -> Vec<Letter> {
    let mut out = Vec::with_capacity(s.len());
    for pair in s.0.chunks(2) {
        out.extend(std::iter::repeat(Letter::Eta).take(pair[0] as usize));
        out.extend(std::iter::repeat(Letter::Xi).take(pair[1] as usize));
    }
    out
}

/// Words `(s̄ₙ, t̄ₙ)` of the n-th pre-renormalization.
///
/// Level 0 is `((1,0),(0,1))`, and each step is
/// `(η', ξ') = (η^{a}∘ξ, η)` with `a` the next digit of θ.
pub fn renorm_words(theta: &RotationNumber, n: usize) -> Result<(MultiIndex, MultiIndex), WordsError> {
    let digits = theta.digits(n)?;
    let mut s = vec![Letter::Eta];
    let mut t = vec![Letter::Xi];
    for a in digits {
        let mut next = t.clone();
        for _ in 0..a {
            next.extend_from_slice(&s);
        }
        t = std::mem::replace(&mut s, next);
    }
    Ok((MultiIndex::from_letters(&s), MultiIndex::from_letters(&t)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HatPrefix {
    /// `η²`
    EtaEta,
    /// `η∘ξ`
    EtaXi,
}

impl HatPrefix {
    /// Prefix letters in application order.
    pub fn letters(self) -> [Letter; 2] {
        match self {
            HatPrefix::EtaEta => [Letter::Eta, Letter::Eta],
            HatPrefix::EtaXi => [Letter::Xi, Letter::Eta],
        }
    }
}

/// `ŝₙ` together with the prefix that was split off the last block.
///
/// The split is exact only modulo commutation of η and ξ: the letter counts
/// of `ŝₙ` plus the prefix equal those of `s̄ₙ`.
pub fn hat_words(s: &MultiIndex) -> Result<(MultiIndex, HatPrefix), WordsError> {
    let n = s.pairs();
    let (a, b) = (s.a(n), s.b(n));
    let mut e = s.0.clone();
    if a >= 2 {
        e[2 * n - 2] = a - 2;
        Ok((MultiIndex(e), HatPrefix::EtaEta))
    } else if a == 1 {
        if b == 0 {
            return Err(WordsError::NoHat(s.clone(), "aₙ = 1 with bₙ = 0"));
        }
        e[2 * n - 2] = 0;
        e[2 * n - 1] = b - 1;
        Ok((MultiIndex(e), HatPrefix::EtaXi))
    } else {
        Err(WordsError::NoHat(s.clone(), "aₙ = 0"))
    }
}

/// `s̃ₙ = (1,0,a₁,b₁,…,aₙ−1,bₙ)`.
pub fn tilde_words(s: &MultiIndex) -> Result<MultiIndex, WordsError> {
    let n = s.pairs();
    if s.a(n) == 0 {
        return Err(WordsError::NoTilde(s.clone()));
    }
    let mut e = vec![1, 0];
    e.extend_from_slice(&s.0);
    let last = e.len() - 2;
    e[last] -= 1;
    Ok(MultiIndex(e))
}

/// Literal factorization `ζ^{s̄} = η∘F∘ζ^{rest}` used by the two-dimensional
/// operator: the last applied letter must be η, and `F` is the letter
/// applied just before it.
pub fn operator_split(s: &MultiIndex) -> Result<(MultiIndex, Letter), WordsError> {
    let letters = word_expand(s);
    let m = letters.len();
    if m < 2 {
        return Err(WordsError::NoSplit(s.clone(), "fewer than two letters"));
    }
    if letters[m - 1] != Letter::Eta {
        return Err(WordsError::NoSplit(s.clone(), "last applied letter is ξ"));
    }
    Ok((MultiIndex::from_letters(&letters[..m - 2]), letters[m - 2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_examples() {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (d, r) = gauss_step(&g).unwrap();
        assert_eq!(d, 1);
        assert!((r - g).abs() < 1e-15);
        assert_eq!(gauss_step(&Ratio::new(1, 4)).unwrap(), (4, Ratio::from_integer(0)));
        assert_eq!(gauss_step(&Ratio::new(2, 7)).unwrap(), (3, Ratio::new(1, 2)));
        assert!(gauss_step(&1.0f64).is_err());
        assert!(gauss_step(&Ratio::new(0, 1)).is_err());
    }

    #[test]
    fn convergent_examples() {
        let q: Vec<u64> = convergents(&RotationNumber::golden(), 7).iter().map(|c| c.1).collect();
        assert_eq!(q, [1, 1, 2, 3, 5, 8, 13]);
        let quarter = RotationNumber::from_rational(Ratio::new(1, 4)).unwrap();
        let q: Vec<u64> = convergents(&quarter, 6).iter().map(|c| c.1).collect();
        assert_eq!(q, [1, 4]);
        let q: Vec<u64> = convergents(&RotationNumber::silver(), 5).iter().map(|c| c.1).collect();
        assert_eq!(q[1..], [2, 5, 12, 29]);
    }

    #[test]
    fn k_examples() {
        assert_eq!((k_of_period(1), k_of_period(2), k_of_period(3)), (2, 2, 6));
    }

    #[test]
    fn compare_and_subtract_examples() {
        let m = |v: &[u32]| MultiIndex::new(v.to_vec()).unwrap();
        assert_eq!(compare(&m(&[1, 1, 1, 1]), &m(&[1, 1, 1, 0])), Relation::Succeeds);
        assert_eq!(compare(&m(&[1, 1]), &m(&[1, 1])), Relation::Equal);
        assert_eq!(compare(&m(&[1, 1, 1, 1]), &m(&[2, 0])), Relation::Incomparable);
        assert_eq!(subtract(&m(&[1, 1, 1, 1]), &m(&[1, 1, 1, 0])).unwrap(), m(&[0, 1]));
        assert_eq!(subtract(&m(&[2, 1]), &m(&[1, 0])).unwrap(), m(&[1, 1]));
        assert_eq!(subtract(&m(&[1, 2]), &m(&[1, 1])).unwrap(), m(&[0, 1]));
        assert!(subtract(&m(&[1, 1]), &m(&[2, 0])).is_err());
    }

    #[test]
    fn expand_examples() {
        use Letter::*;
        let m = |v: &[u32]| MultiIndex::new(v.to_vec()).unwrap();
        assert_eq!(word_expand(&m(&[1, 1])), [Eta, Xi]);
        assert_eq!(word_expand(&m(&[0, 1])), [Xi]);
        assert_eq!(word_expand(&m(&[2, 1, 1, 0])), [Eta, Eta, Xi, Eta]);
    }

    #[test]
    fn golden_words() {
        let g = RotationNumber::golden();
        let m = |v: &[u32]| MultiIndex::new(v.to_vec()).unwrap();
        assert_eq!(renorm_words(&g, 0).unwrap(), (m(&[1, 0]), m(&[0, 1])));
        assert_eq!(renorm_words(&g, 1).unwrap(), (m(&[0, 1, 1, 0]), m(&[1, 0])));
        assert_eq!(renorm_words(&g, 2).unwrap(), (m(&[1, 1, 1, 0]), m(&[0, 1, 1, 0])));
        let q = convergents(&g, 14);
        for n in 0..=12 {
            let (s, t) = renorm_words(&g, n).unwrap();
            assert_eq!(s.len() as u64, q[n + 1].1);
            assert_eq!(t.len() as u64, q[n].1);
        }
        let short = RotationNumber::from_rational(Ratio::new(2, 7)).unwrap();
        assert!(renorm_words(&short, 5).is_err());
    }

    #[test]
    fn hat_and_tilde_examples() {
        let m = |v: &[u32]| MultiIndex::new(v.to_vec()).unwrap();
        assert_eq!(hat_words(&m(&[1, 1, 2, 1])).unwrap(), (m(&[1, 1, 0, 1]), HatPrefix::EtaEta));
        assert_eq!(hat_words(&m(&[1, 1, 1, 2])).unwrap(), (m(&[1, 1, 0, 1]), HatPrefix::EtaXi));
        assert_eq!(hat_words(&m(&[1, 1, 3, 1])).unwrap(), (m(&[1, 1, 1, 1]), HatPrefix::EtaEta));
        assert!(hat_words(&m(&[1, 1, 1, 0])).is_err());
        assert_eq!(tilde_words(&m(&[1, 1])).unwrap(), m(&[1, 0, 0, 1]));
        assert_eq!(tilde_words(&m(&[2, 1])).unwrap(), m(&[1, 0, 1, 1]));
        assert_eq!(tilde_words(&m(&[1, 1, 1, 1])).unwrap(), m(&[1, 0, 1, 1, 0, 1]));
        assert!(tilde_words(&m(&[0, 1])).is_err());
    }

    #[test]
    fn golden_operator_split() {
        let (s, t) = renorm_words(&RotationNumber::golden(), 2).unwrap();
        let m = |v: &[u32]| MultiIndex::new(v.to_vec()).unwrap();
        assert_eq!(operator_split(&s).unwrap(), (m(&[1, 0]), Letter::Xi));
        assert_eq!(operator_split(&t).unwrap(), (MultiIndex::identity(), Letter::Xi));
    }

    #[test]
    fn serde_forms() {
        let m = MultiIndex::new(vec![1, 1, 1, 0]).unwrap();
        assert_eq!(serde_json::to_string(&m).unwrap(), "[1,1,1,0]");
        let r: RotationNumber = serde_json::from_str(r#"{"digits":[1],"preperiod":0,"period":1}"#).unwrap();
        assert_eq!(r, RotationNumber::golden());
        assert!(serde_json::from_str::<MultiIndex>("[1,1,1]").is_err());
        assert!(MultiIndex::new(vec![1, 0, 1, 1]).unwrap().is_admissible() == false);
        assert!(MultiIndex::new(vec![1, 1, 0, 0]).unwrap().is_admissible());
    }
}
