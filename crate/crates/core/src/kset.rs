//! The sets K_e of bounded zero continued fractions: the index sets for
//! minimal symplectic fillings and, through the MMP correspondence, for
//! Milnor fibers.
//!
//! Enumeration generates candidates from `[0]` by blow-ups (the constructive
//! characterization); the positive-semidefinite matrix test is kept as an
//! independent cross-check.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::cfrac::{blow_up_at, expand_fraction, BlowUpSite, CfracError, Chain, ProjectiveRational};
use crate::tsing::SingularityType;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum KsetError {
    #[error("1/{n}(1,{a}) has a length-1 dual expansion; its descriptor set is degenerate")]
    DegenerateLength { n: i64, a: i64 },
    #[error(transparent)]
    Cfrac(#[from] CfracError),
}

impl KsetError {
    pub fn code(&self) -> &'static str {
        match self {
            KsetError::DegenerateLength { .. } => "degenerate-length",
            KsetError::Cfrac(e) => e.code(),
        }
    }
}

/// A tuple (n_1,...,n_e) of K_e together with its bounds (a_1,...,a_e) and
/// the singularity it belongs to.  Index 1 is nearest the +1-section of the
/// compactified boundary; this orientation is global across the crate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FillingDescriptor {
    pub n_tuple: Vec<i64>,
    pub bounds: Chain,
    pub singularity: SingularityType,
}

impl FillingDescriptor {
    /// The blow-up counts d_i = a_i − n_i.
    pub fn d_vector(&self) -> Vec<i64> {
        self.bounds
            .iter()
            .zip(&self.n_tuple)
            .map(|(a, n)| a - n)
            .collect()
    }

    /// Lisca's name for the filling, e.g. `W_{19,7}(2,2,1,3)`.
    pub fn filling_name(&self) -> String {
        let tuple = self
            .n_tuple
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "W_{{{},{}}}({})",
            self.singularity.n, self.singularity.a, tuple
        )
    }
}

/// True when `partial` embeds into `bounds` by an order-preserving position
/// map with each entry within its bound.  Blow-ups only grow entries and
/// keep their relative order, so failure here prunes the whole branch.
fn embeds(partial: &[i64], bounds: &[i64]) -> bool {
    let mut p = 0;
    for &c in partial {
        loop {
            if p == bounds.len() {
                return false;
            }
            p += 1;
            if c <= bounds[p - 1] {
                break;
            }
        }
    }
    true
}

/// All chains of length `e` reachable from `[0]` by blow-ups with entry i
/// bounded by `bounds[i]`, sorted lexicographically.
pub fn enumerate_zero_chains(e: usize, bounds: &Chain) -> Vec<Chain> {
    assert!(e >= 2, "descriptor length must be at least 2");
    assert_eq!(bounds.len(), e, "bounds must have length e");
    assert!(bounds.iter().all(|&b| b >= 2), "bounds entries must be >= 2");
    let mut level: BTreeSet<Vec<i64>> = BTreeSet::from([vec![0]]);
    for _ in 1..e {
        let mut next = BTreeSet::new();
        for c in &level {
            let chain = Chain(c.clone());
            let mut sites = vec![BlowUpSite::LeftEnd, BlowUpSite::RightEnd];
            sites.extend((0..c.len().saturating_sub(1)).map(BlowUpSite::Junction));
            for site in sites {
                let up = blow_up_at(&chain, site).expect("site in range");
                if embeds(&up.0, bounds) {
                    next.insert(up.0);
                }
            }
        }
        level = next;
    }
    level.into_iter().map(Chain).collect()
}

/// K_e(n/(n−a)) as filling descriptors, e = length of the dual expansion.
pub fn k_set(n: i64, a: i64) -> Result<Vec<FillingDescriptor>, KsetError> {
    let bounds = expand_fraction(n, n - a)?;
    if bounds.len() == 1 {
        return Err(KsetError::DegenerateLength { n, a });
    }
    let singularity = SingularityType { n, a };
    Ok(enumerate_zero_chains(bounds.len(), &bounds)
        .into_iter()
        .map(|c| FillingDescriptor {
            n_tuple: c.0,
            bounds: bounds.clone(),
            singularity,
        })
        .collect())
}

/// Interval determinants of the tridiagonal form with diagonal `n_i` and
/// off-diagonal −1; positive semidefiniteness for such matrices is
/// equivalent to all of these being non-negative (non-contiguous principal
/// submatrices split into direct sums of intervals).
fn interval_minors_nonnegative(tuple: &[i64]) -> bool {
    let e = tuple.len();
    for start in 0..e {
        let mut prev2 = BigInt::from(1); // empty interval
        let mut prev1 = BigInt::from(tuple[start]);
        if prev1.is_negative() {
            return false;
        }
        for &n in &tuple[start + 1..] {
            let det = BigInt::from(n) * &prev1 - &prev2;
            if det.is_negative() {
                return false;
            }
            prev2 = prev1;
            prev1 = det;
        }
    }
    true
}

/// Exact rank by rational Gaussian elimination.
fn rank(mut m: Vec<Vec<ProjectiveRational>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut col = 0;
    while rank < rows && col < cols {
        let Some(pivot) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            col += 1;
            continue;
        };
        m.swap(rank, pivot);
        let (top, rest) = m.split_at_mut(rank + 1);
        let lead = &top[rank];
        for row in rest {
            if row[col].is_zero() {
                continue;
            }
            let f = row[col].div(&lead[col]);
            for (c, cell) in row.iter_mut().enumerate().skip(col) {
                let sub = lead[c].mul(&f);
                *cell = cell.sub(&sub);
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}

/// Determinant of the full tridiagonal form, by the three-term recurrence.
fn full_determinant(tuple: &[i64]) -> BigInt {
    let mut prev2 = BigInt::from(1);
    let mut prev1 = BigInt::from(tuple[0]);
    for &n in &tuple[1..] {
        let det = BigInt::from(n) * &prev1 - &prev2;
        prev2 = prev1;
        prev1 = det;
    }
    prev1
}

/// The defining matrix test for membership in a K_e set (bounds aside):
/// `M(n_1,...,n_e)` positive semidefinite of rank at least e−1, and singular
/// so that the continued fraction represents 0.  Cross-check only; the
/// enumerator never calls this.
pub fn is_admissible_zero(tuple: &Chain) -> bool {
    let e = tuple.len();
    if e == 0 {
        return false;
    }
    debug_assert!(tuple.iter().all(|&v| v >= 0));
    if !interval_minors_nonnegative(tuple) {
        return false;
    }
    if !full_determinant(tuple).is_zero() {
        return false;
    }
    let mut m = vec![vec![ProjectiveRational::integer(0); e]; e];
    for (i, &n) in tuple.iter().enumerate() {
        m[i][i] = ProjectiveRational::integer(n);
        if i + 1 < e {
            m[i][i + 1] = ProjectiveRational::integer(-1);
            m[i + 1][i] = ProjectiveRational::integer(-1);
        }
    }
    rank(m) >= e - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfrac::is_zero_chain;

    fn ch(v: &[i64]) -> Chain {
        Chain(v.to_vec())
    }

    #[test]
    fn length_two() {
        assert_eq!(enumerate_zero_chains(2, &ch(&[2, 2])), vec![ch(&[1, 1])]);
    }

    #[test]
    fn length_three_full_bounds() {
        assert_eq!(
            enumerate_zero_chains(3, &ch(&[2, 2, 2])),
            vec![ch(&[1, 2, 1]), ch(&[2, 1, 2])]
        );
    }

    #[test]
    fn bounds_for_19_7() {
        assert_eq!(
            enumerate_zero_chains(4, &ch(&[2, 3, 2, 3])),
            vec![ch(&[1, 2, 2, 1]), ch(&[1, 3, 1, 2]), ch(&[2, 2, 1, 3])]
        );
    }

    #[test]
    fn unbounded_counts_are_catalan() {
        let wide = |e: usize| Chain(vec![9; e]);
        for (e, catalan) in [(2, 1), (3, 2), (4, 5), (5, 14), (6, 42)] {
            let set = enumerate_zero_chains(e, &wide(e));
            assert_eq!(set.len(), catalan, "length {}", e);
            for c in &set {
                assert!(is_zero_chain(c), "{:?}", c);
            }
        }
    }

    #[test]
    fn k_set_19_7() {
        let ks = k_set(19, 7).unwrap();
        assert_eq!(
            ks.iter().map(|d| d.n_tuple.clone()).collect::<Vec<_>>(),
            vec![vec![1, 2, 2, 1], vec![1, 3, 1, 2], vec![2, 2, 1, 3]]
        );
        assert!(ks.iter().all(|d| d.bounds == ch(&[2, 3, 2, 3])));
        assert_eq!(ks[2].d_vector(), vec![0, 1, 1, 0]);
        assert_eq!(ks[0].d_vector(), vec![1, 1, 0, 2]);
        assert_eq!(ks[2].filling_name(), "W_{19,7}(2,2,1,3)");
    }

    #[test]
    fn k_set_4_1() {
        let ks = k_set(4, 1).unwrap();
        assert_eq!(
            ks.iter().map(|d| d.n_tuple.clone()).collect::<Vec<_>>(),
            vec![vec![1, 2, 1], vec![2, 1, 2]]
        );
    }

    #[test]
    fn degenerate_dual_length() {
        for n in [2, 5, 9] {
            let err = k_set(n, n - 1).unwrap_err();
            assert_eq!(err.code(), "degenerate-length");
        }
        assert_eq!(k_set(4, 2).unwrap_err().code(), "invalid-fraction");
    }

    #[test]
    fn matrix_test_examples() {
        assert!(is_admissible_zero(&ch(&[2, 2, 1, 3])));
        assert!(is_admissible_zero(&ch(&[1, 2, 1])));
        assert!(is_admissible_zero(&ch(&[2, 1, 2])));
        assert!(is_admissible_zero(&ch(&[0])));
        assert!(!is_admissible_zero(&ch(&[1, 1, 1])));
        assert!(!is_admissible_zero(&ch(&[2])));
        assert!(!is_admissible_zero(&ch(&[])));
    }

    #[test]
    fn matrix_test_agrees_on_small_tuples() {
        // every positive tuple of length <= 4 with entries <= 4
        for len in 1..=4usize {
            let mut idx = vec![1i64; len];
            loop {
                let c = Chain(idx.clone());
                assert_eq!(
                    is_admissible_zero(&c),
                    is_zero_chain(&c),
                    "disagreement on {:?}",
                    c
                );
                let mut pos = 0;
                loop {
                    if pos == len {
                        break;
                    }
                    idx[pos] += 1;
                    if idx[pos] <= 4 {
                        break;
                    }
                    idx[pos] = 1;
                    pos += 1;
                }
                if pos == len {
                    break;
                }
            }
        }
    }
}
