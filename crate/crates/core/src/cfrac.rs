//! Hirzebruch-Jung continued fractions and chain rewriting.
//!
//! A chain `[c_1,...,c_t]` encodes a linear configuration of rational curves
//! by negated self-intersections and evaluates to
//! `c_1 - 1/(c_2 - 1/(...))`.  Evaluation runs over the projective rational
//! line, so inner zeros are values rather than division errors.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CfracError {
    #[error("invalid fraction {n}/{a}: need n > a >= 1 with gcd(n, a) = 1")]
    InvalidFraction { n: i64, a: i64 },
    #[error("chain not reduced: entry {entry} at index {index}")]
    NotReduced { index: usize, entry: i64 },
    #[error("empty chain")]
    EmptyChain,
    #[error("position {0} out of range")]
    PositionOutOfRange(usize),
    #[error("entry at index {index} is {entry}, expected 1")]
    EntryNotOne { index: usize, entry: i64 },
}

impl CfracError {
    pub fn code(&self) -> &'static str {
        match self {
            CfracError::InvalidFraction { .. } => "invalid-fraction",
            CfracError::NotReduced { .. } => "not-reduced",
            CfracError::EmptyChain => "empty-chain",
            CfracError::PositionOutOfRange(_) => "position-out-of-range",
            CfracError::EntryNotOne { .. } => "entry-not-one",
        }
    }
}

/// A point of the projective rational line.
///
/// # Invariants
/// - `den >= 0`; `den == 0` encodes the point at infinity (normal form `1/0`)
/// - finite values are stored with `gcd(|num|, den) = 1`
/// - `0/0` is not a value; constructors reject it
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ProjectiveRational {
    num: BigInt,
    den: BigInt,
}

impl ProjectiveRational {
    pub fn new(num: BigInt, den: BigInt) -> Self {
        assert!(
            !(num.is_zero() && den.is_zero()),
            "0/0 is not a projective point"
        );
        let (num, den) = if den.is_negative() {
            (-num, -den)
        } else {
            (num, den)
        };
        if den.is_zero() {
            return Self {
                num: BigInt::one(),
                den,
            };
        }
        let g = num.gcd(&den);
        if g.is_one() {
            Self { num, den }
        } else {
            Self {
                num: num / &g,
                den: den / &g,
            }
        }
    }

    pub fn integer(v: i64) -> Self {
        Self {
            num: BigInt::from(v),
            den: BigInt::one(),
        }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(BigInt::from(num), BigInt::from(den))
    }

    pub fn infinity() -> Self {
        Self {
            num: BigInt::one(),
            den: BigInt::zero(),
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.den.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    /// Reciprocal; swaps 0 and infinity.
    pub fn recip(&self) -> Self {
        Self::new(self.den.clone(), self.num.clone())
    }

    /// Sum, with infinity absorbing.
    pub fn add(&self, rhs: &Self) -> Self {
        if self.is_infinite() || rhs.is_infinite() {
            return Self::infinity();
        }
        Self::new(&self.num * &rhs.den + &rhs.num * &self.den, &self.den * &rhs.den)
    }

    /// Difference, with infinity absorbing.
    pub fn sub(&self, rhs: &Self) -> Self {
        if self.is_infinite() || rhs.is_infinite() {
            return Self::infinity();
        }
        Self::new(&self.num * &rhs.den - &rhs.num * &self.den, &self.den * &rhs.den)
    }

    /// Product, with infinity absorbing.
    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_infinite() || rhs.is_infinite() {
            return Self::infinity();
        }
        Self::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }

    /// Quotient `self * rhs.recip()`.
    pub fn div(&self, rhs: &Self) -> Self {
        self.mul(&rhs.recip())
    }

    pub fn neg(&self) -> Self {
        Self {
            num: -self.num.clone(),
            den: self.den.clone(),
        }
    }
}

impl PartialOrd for ProjectiveRational {
    /// Finite values compare as fractions; infinity compares to nothing.
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        if self.is_infinite() || other.is_infinite() {
            return None;
        }
        // denominators are positive here
        Some((&self.num * &other.den).cmp(&(&other.num * &self.den)))
    }
}

impl fmt::Display for ProjectiveRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for ProjectiveRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl Serialize for ProjectiveRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("ProjectiveRational", 2)?;
        s.serialize_field("num", &self.num.to_string())?;
        s.serialize_field("den", &self.den.to_string())?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for ProjectiveRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            num: String,
            den: String,
        }
        let raw = Raw::deserialize(deserializer)?;
        let num = BigInt::from_str(&raw.num).map_err(D::Error::custom)?;
        let den = BigInt::from_str(&raw.den).map_err(D::Error::custom)?;
        if num.is_zero() && den.is_zero() {
            return Err(D::Error::custom("0/0 is not a projective point"));
        }
        Ok(Self::new(num, den))
    }
}

/// A chain of curve coefficients (negated self-intersections).
///
/// Entries are normally >= 1 and a chain is *reduced* when all entries
/// are >= 2; the single chain `[0]` also occurs as the blow-down terminus
/// of the zero chains.  The empty chain is legal and evaluates to infinity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chain(pub Vec<i64>);

impl Chain {
    pub fn new(entries: Vec<i64>) -> Self {
        Chain(entries)
    }

    pub fn is_reduced(&self) -> bool {
        self.0.iter().all(|&c| c >= 2)
    }

    /// Reversed copy; chains read equally well from either end.
    pub fn reversed(&self) -> Self {
        let mut v = self.0.clone();
        v.reverse();
        Chain(v)
    }
}

impl Deref for Chain {
    type Target = [i64];

    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl From<Vec<i64>> for Chain {
    fn from(v: Vec<i64>) -> Self {
        Chain(v)
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", c)?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Chain {
    type Err = String;

    /// Accepts `3,4,2` or `[3,4,2]`.
    fn from_str(s: &str) -> Result<Self, String> {
        let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
        if inner.trim().is_empty() {
            return Ok(Chain(vec![]));
        }
        inner
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|e| format!("bad entry {:?}: {}", t, e)))
            .collect::<Result<Vec<_>, _>>()
            .map(Chain)
    }
}

/// Evaluates `[c_1,...,c_t]` right to left over the projective line.
pub fn eval_chain(chain: &Chain) -> ProjectiveRational {
    let mut v = ProjectiveRational::infinity();
    for &c in chain.0.iter().rev() {
        v = ProjectiveRational::integer(c).sub(&v.recip());
    }
    v
}

/// The unique reduced chain with `eval_chain = n/a`.
pub fn expand_fraction(n: i64, a: i64) -> Result<Chain, CfracError> {
    if !(n > a && a >= 1) || n.gcd(&a) != 1 {
        return Err(CfracError::InvalidFraction { n, a });
    }
    let (mut n, mut a) = (n, a);
    let mut entries = Vec::new();
    while a > 0 {
        let b = (n + a - 1) / a;
        entries.push(b);
        let next = b * a - n;
        n = a;
        a = next;
    }
    Ok(Chain(entries))
}

fn expand_big(n: &BigInt, a: &BigInt) -> Vec<BigInt> {
    let (mut n, mut a) = (n.clone(), a.clone());
    let mut entries = Vec::new();
    while a.is_positive() {
        let b = (&n + &a - BigInt::one()).div_floor(&a);
        let next = &b * &a - &n;
        entries.push(b);
        n = a;
        a = next;
    }
    entries
}

/// The Riemenschneider dual: if `eval_chain(c) = n/a` the dual evaluates to
/// `n/(n-a)`.
pub fn dual_chain(chain: &Chain) -> Result<Chain, CfracError> {
    if chain.is_empty() {
        return Err(CfracError::EmptyChain);
    }
    if let Some((index, &entry)) = chain.iter().enumerate().find(|(_, &c)| c < 2) {
        return Err(CfracError::NotReduced { index, entry });
    }
    let v = eval_chain(chain);
    let n = v.numer();
    let a = v.denom();
    let entries = expand_big(n, &(n - a));
    Ok(Chain(
        entries
            .into_iter()
            .map(|b| i64::try_from(&b).expect("dual entry exceeds i64"))
            .collect(),
    ))
}

/// Where a blow-up inserts its new `1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlowUpSite {
    LeftEnd,
    /// Between entries `i` and `i + 1` (0-based).
    Junction(usize),
    RightEnd,
}

/// Inserts a 1-entry, bumping the adjacent entries.  Interior blow-ups
/// preserve `eval_chain`; end blow-ups do not.
pub fn blow_up_at(chain: &Chain, site: BlowUpSite) -> Result<Chain, CfracError> {
    let mut v = chain.0.clone();
    match site {
        BlowUpSite::LeftEnd => {
            if let Some(first) = v.first_mut() {
                *first += 1;
            }
            v.insert(0, 1);
        }
        BlowUpSite::RightEnd => {
            if let Some(last) = v.last_mut() {
                *last += 1;
            }
            v.push(1);
        }
        BlowUpSite::Junction(i) => {
            if i + 1 >= v.len() {
                return Err(CfracError::PositionOutOfRange(i));
            }
            v[i] += 1;
            v[i + 1] += 1;
            v.insert(i + 1, 1);
        }
    }
    Ok(Chain(v))
}

/// Removes a 1-entry and decrements each surviving neighbor; exact inverse of
/// [`blow_up_at`].
pub fn contract_at(chain: &Chain, index: usize) -> Result<Chain, CfracError> {
    let Some(&entry) = chain.0.get(index) else {
        return Err(CfracError::PositionOutOfRange(index));
    };
    if entry != 1 {
        return Err(CfracError::EntryNotOne { index, entry });
    }
    let mut v = chain.0.clone();
    v.remove(index);
    if index > 0 {
        v[index - 1] -= 1;
    }
    if index < v.len() {
        v[index] -= 1;
    }
    Ok(Chain(v))
}

/// Leftmost-first contraction witness for chains obtainable from `[0]` by
/// blow-ups; `None` when the chain is not a zero chain.
pub fn zero_chain_witness(chain: &Chain) -> Option<Vec<usize>> {
    let mut cur = chain.clone();
    let mut witness = Vec::new();
    loop {
        if cur.0 == [0] {
            return Some(witness);
        }
        let i = cur.0.iter().position(|&c| c == 1)?;
        cur = contract_at(&cur, i).expect("entry just checked");
        witness.push(i);
    }
}

/// True iff repeated blow-downs of 1-entries reach `[0]`.
pub fn is_zero_chain(chain: &Chain) -> bool {
    zero_chain_witness(chain).is_some()
}
