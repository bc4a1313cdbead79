//! Class-T and Wahl chain recognition plus their numerical invariants:
//! discrepancies, curve multiplicities, initial curves, and relative
//! canonical degrees.
//!
//! A chain is of class T when it is an A-series Du Val chain or arises from
//! the base cases `[4]` and `[3,2,...,2,3]` by the two extension moves
//! (prepend 2 and bump the last entry / bump the first entry and append 2).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::cfrac::{eval_chain, Chain, ProjectiveRational};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TsingError {
    #[error("chain {0} is not a Wahl chain")]
    NotWahl(Chain),
    #[error("invalid singularity type 1/{n}(1,{a})")]
    InvalidType { n: i64, a: i64 },
}

impl TsingError {
    pub fn code(&self) -> &'static str {
        match self {
            TsingError::NotWahl(_) => "not-wahl",
            TsingError::InvalidType { .. } => "invalid-type",
        }
    }
}

/// The cyclic quotient singularity `1/n(1,a)`; `n = 1` is a smooth point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SingularityType {
    pub n: i64,
    pub a: i64,
}

impl SingularityType {
    pub fn new(n: i64, a: i64) -> Result<Self, TsingError> {
        let ok = match n {
            1 => a == 0,
            _ => n > 1 && a >= 1 && a < n && n.gcd(&a) == 1,
        };
        if ok {
            Ok(Self { n, a })
        } else {
            Err(TsingError::InvalidType { n, a })
        }
    }

    pub fn smooth() -> Self {
        Self { n: 1, a: 0 }
    }

    pub fn is_smooth(&self) -> bool {
        self.n == 1
    }
}

impl fmt::Display for SingularityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}(1,{})", self.n, self.a)
    }
}

/// One application of a class-T extension move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtensionMove {
    /// `[e_1,...,e_s] -> [2, e_1, ..., e_s + 1]`
    PrependTwo,
    /// `[e_1,...,e_s] -> [e_1 + 1, ..., e_s, 2]`
    AppendTwo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum TKind {
    NotT,
    DuValA { k: i64 },
    ClassT { d: i64, m: i64, a: i64 },
    Wahl { m: i64, a: i64 },
}

/// Classification verdict together with its derivation witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TClassification {
    pub kind: TKind,
    /// Base case the chain reduces to (`[4]` or `[3,2,...,2,3]`); absent for
    /// Du Val and non-T chains.
    pub base_chain: Option<Chain>,
    /// Moves rebuilding the chain from `base_chain`, in application order.
    pub moves: Vec<ExtensionMove>,
}

impl Serialize for TClassification {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.kind.serialize(serializer)
    }
}

impl TClassification {
    pub fn is_class_t(&self) -> bool {
        !matches!(self.kind, TKind::NotT)
    }

    pub fn is_wahl(&self) -> bool {
        matches!(self.kind, TKind::Wahl { .. })
    }

    /// The singularity the chain contracts to.
    pub fn singularity(&self) -> Option<SingularityType> {
        match self.kind {
            TKind::NotT => None,
            TKind::DuValA { k } => Some(SingularityType {
                n: k + 1,
                a: k,
            }),
            TKind::ClassT { d, m, a } => Some(SingularityType {
                n: d * m * m,
                a: d * m * a - 1,
            }),
            TKind::Wahl { m, a } => Some(SingularityType {
                n: m * m,
                a: m * a - 1,
            }),
        }
    }
}

fn not_t() -> TClassification {
    TClassification {
        kind: TKind::NotT,
        base_chain: None,
        moves: Vec::new(),
    }
}

/// Recovers (d, m, a) from the evaluated fraction dm²/(dma−1).
fn dma_from_eval(value: &ProjectiveRational) -> Option<(i64, i64, i64)> {
    if value.is_infinite() || !value.numer().is_positive() {
        return None;
    }
    let delta = value.numer().clone();
    let omega = value.denom().clone();
    let g = delta.gcd(&(&omega + BigInt::one()));
    let m = &delta / &g;
    let a = (&omega + BigInt::one()) / &g;
    let (d, rem) = delta.div_rem(&(&m * &m));
    if !rem.is_zero() || d.is_zero() {
        return None;
    }
    if &d * &m * &a - BigInt::one() != omega {
        return None;
    }
    Some((d.to_i64()?, m.to_i64()?, a.to_i64()?))
}

/// Runs the reverse extension moves down to a base case.
///
/// At most one reverse move applies at each step, so the reduction path is
/// unique; class-T chains never have a 2 at both ends before reaching their
/// base.
pub fn classify_chain(chain: &Chain) -> TClassification {
    if chain.is_empty() || !chain.is_reduced() {
        return not_t();
    }
    if chain.iter().all(|&e| e == 2) {
        return TClassification {
            kind: TKind::DuValA {
                k: chain.len() as i64,
            },
            base_chain: None,
            moves: Vec::new(),
        };
    }
    let mut c = chain.0.clone();
    let mut moves = Vec::new();
    loop {
        let (first, last) = (c[0], *c.last().expect("nonempty"));
        if c.len() >= 2 && first == 2 && last >= 3 {
            c.remove(0);
            *c.last_mut().expect("nonempty") -= 1;
            moves.push(ExtensionMove::PrependTwo);
        } else if c.len() >= 2 && last == 2 && first >= 3 {
            c.pop();
            c[0] -= 1;
            moves.push(ExtensionMove::AppendTwo);
        } else {
            break;
        }
    }
    moves.reverse();
    let is_base = c == [4]
        || (c.len() >= 2
            && c[0] == 3
            && *c.last().expect("nonempty") == 3
            && c[1..c.len() - 1].iter().all(|&e| e == 2));
    if !is_base {
        return not_t();
    }
    let Some((d, m, a)) = dma_from_eval(&eval_chain(chain)) else {
        return not_t();
    };
    let kind = if d == 1 {
        TKind::Wahl { m, a }
    } else {
        TKind::ClassT { d, m, a }
    };
    TClassification {
        kind,
        base_chain: Some(Chain(c)),
        moves,
    }
}

/// All Wahl chains of length <= `max_len`, closing `[4]` under the two
/// extension moves; sorted by length then lexicographically.
pub fn generate_wahl_chains(max_len: usize) -> Vec<Chain> {
    assert!(max_len >= 1);
    let mut out: Vec<Chain> = Vec::new();
    let mut level: std::collections::BTreeSet<Vec<i64>> = [vec![4]].into();
    for _ in 0..max_len {
        out.extend(level.iter().cloned().map(Chain));
        let mut next = std::collections::BTreeSet::new();
        for c in &level {
            let mut p = c.clone();
            *p.last_mut().expect("nonempty") += 1;
            p.insert(0, 2);
            next.insert(p);
            let mut q = c.clone();
            q[0] += 1;
            q.push(2);
            next.insert(q);
        }
        level = next;
    }
    out
}

/// Wahl chain invariants: multiplicities, initial curve, discrepancies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WahlData {
    pub chain: Chain,
    pub m: i64,
    pub a: i64,
    /// 0-based position of the unique curve with multiplicity 1.
    pub initial_index: usize,
    /// Multiplicities ν_1,...,ν_{s+1}; the extra last entry equals `m`.
    pub nu: Vec<i64>,
    pub discrepancies: Vec<ProjectiveRational>,
}

/// Replays the extension-move derivation on the nodal-curve multiplicity
/// model; returns ν_1,...,ν_{s+1}.
pub fn nu_replay(chain: &Chain) -> Result<Vec<i64>, TsingError> {
    let cls = classify_chain(chain);
    if !cls.is_wahl() {
        return Err(TsingError::NotWahl(chain.clone()));
    }
    // seed [4] carries ν = (1) with ν_{s+1} = 2
    let mut nu = vec![1i64];
    let mut nu_last = 2i64;
    for mv in &cls.moves {
        match mv {
            ExtensionMove::PrependTwo => {
                let bump = *nu.last().expect("nonempty");
                nu.insert(0, nu_last);
                nu_last += bump;
            }
            ExtensionMove::AppendTwo => {
                let bump = nu[0];
                nu.push(nu_last);
                nu_last += bump;
            }
        }
    }
    nu.push(nu_last);
    Ok(nu)
}

/// Solves the tridiagonal system Σ_j d_j (E_j·E_i) = e_i − 2 exactly.
///
/// The intersection form of a reduced chain is negative definite, so the
/// elimination never meets a zero pivot.  Du Val chains get all zeros.
pub fn discrepancies(chain: &Chain) -> Vec<ProjectiveRational> {
    assert!(!chain.is_empty(), "discrepancies of an empty chain");
    assert!(chain.is_reduced(), "discrepancies need a reduced chain");
    let s = chain.len();
    let one = ProjectiveRational::integer(1);
    let mut diag: Vec<ProjectiveRational> =
        chain.iter().map(|&e| ProjectiveRational::integer(-e)).collect();
    let mut rhs: Vec<ProjectiveRational> =
        chain.iter().map(|&e| ProjectiveRational::integer(e - 2)).collect();
    for i in 1..s {
        let w = one.div(&diag[i - 1]);
        diag[i] = diag[i].sub(&w);
        rhs[i] = rhs[i].sub(&rhs[i - 1].mul(&w));
    }
    let mut d = vec![ProjectiveRational::integer(0); s];
    d[s - 1] = rhs[s - 1].div(&diag[s - 1]);
    for i in (0..s - 1).rev() {
        d[i] = rhs[i].sub(&d[i + 1]).div(&diag[i]);
    }
    d
}

/// Full numeric data of a Wahl chain.  Discrepancies come from the linear
/// solve; ν_i = m(1 + d_i) with the replay oracle kept for cross-checks.
pub fn wahl_data(chain: &Chain) -> Result<WahlData, TsingError> {
    let cls = classify_chain(chain);
    let TKind::Wahl { m, a } = cls.kind else {
        return Err(TsingError::NotWahl(chain.clone()));
    };
    let ds = discrepancies(chain);
    let m_rat = ProjectiveRational::integer(m);
    let one = ProjectiveRational::integer(1);
    let mut nu: Vec<i64> = ds
        .iter()
        .map(|d| {
            let v = m_rat.mul(&one.add(d));
            assert!(v.denom().is_one(), "multiplicity not integral");
            v.numer().to_i64().expect("multiplicity exceeds i64")
        })
        .collect();
    let ones: Vec<usize> = nu
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == 1)
        .map(|(i, _)| i)
        .collect();
    assert_eq!(ones.len(), 1, "expected a unique multiplicity-1 curve");
    let initial_index = ones[0];
    assert_eq!(m - nu[chain.len() - 1], a, "a = ν_{{s+1}} − ν_s violated");
    nu.push(m);
    Ok(WahlData {
        chain: chain.clone(),
        m,
        a,
        initial_index,
        nu,
        discrepancies: ds,
    })
}

/// Degree of the canonical class against a kept curve after contracting its
/// touching blocks: `(−2 − selfint) − Σ touching`.
pub fn relative_canonical_degree(
    selfint: i64,
    touching: &[ProjectiveRational],
) -> ProjectiveRational {
    debug_assert!(selfint <= -1);
    let mut acc = ProjectiveRational::integer(-2 - selfint);
    for d in touching {
        acc = acc.sub(d);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(v: &[i64]) -> Chain {
        Chain(v.to_vec())
    }

    #[test]
    fn classify_base_cases() {
        assert_eq!(classify_chain(&ch(&[4])).kind, TKind::Wahl { m: 2, a: 1 });
        assert_eq!(
            classify_chain(&ch(&[3, 3])).kind,
            TKind::ClassT { d: 2, m: 2, a: 1 }
        );
        assert_eq!(
            classify_chain(&ch(&[3, 2, 3])).kind,
            TKind::ClassT { d: 3, m: 2, a: 1 }
        );
        assert_eq!(
            classify_chain(&ch(&[3, 2, 2, 3])).kind,
            TKind::ClassT { d: 4, m: 2, a: 1 }
        );
    }

    #[test]
    fn classify_du_val() {
        assert_eq!(classify_chain(&ch(&[2])).kind, TKind::DuValA { k: 1 });
        assert_eq!(classify_chain(&ch(&[2, 2, 2])).kind, TKind::DuValA { k: 3 });
    }

    #[test]
    fn classify_rejects() {
        assert_eq!(classify_chain(&ch(&[2, 4])).kind, TKind::NotT);
        assert_eq!(classify_chain(&ch(&[2, 3])).kind, TKind::NotT);
        assert_eq!(classify_chain(&ch(&[5, 3])).kind, TKind::NotT);
        assert_eq!(classify_chain(&ch(&[3, 4, 2])).kind, TKind::NotT);
        assert_eq!(classify_chain(&ch(&[])).kind, TKind::NotT);
        assert_eq!(classify_chain(&ch(&[3, 1, 3])).kind, TKind::NotT);
    }

    #[test]
    fn classify_witness_rebuilds_chain() {
        let cls = classify_chain(&ch(&[2, 5]));
        assert_eq!(cls.kind, TKind::Wahl { m: 3, a: 2 });
        assert_eq!(cls.base_chain, Some(ch(&[4])));
        assert_eq!(cls.moves, vec![ExtensionMove::PrependTwo]);
        let cls = classify_chain(&ch(&[5, 2]));
        assert_eq!(cls.kind, TKind::Wahl { m: 3, a: 1 });
        assert_eq!(cls.moves, vec![ExtensionMove::AppendTwo]);
        // replay the witness
        let mut c = cls.base_chain.clone().unwrap().0;
        for mv in &cls.moves {
            match mv {
                ExtensionMove::PrependTwo => {
                    *c.last_mut().unwrap() += 1;
                    c.insert(0, 2);
                }
                ExtensionMove::AppendTwo => {
                    c[0] += 1;
                    c.push(2);
                }
            }
        }
        assert_eq!(Chain(c), ch(&[5, 2]));
    }

    #[test]
    fn singularity_of_classification() {
        assert_eq!(
            classify_chain(&ch(&[4])).singularity(),
            Some(SingularityType { n: 4, a: 1 })
        );
        assert_eq!(
            classify_chain(&ch(&[3, 2, 3])).singularity(),
            Some(SingularityType { n: 12, a: 5 })
        );
        assert_eq!(
            classify_chain(&ch(&[2, 2])).singularity(),
            Some(SingularityType { n: 3, a: 2 })
        );
    }

    #[test]
    fn generate_small_levels() {
        assert_eq!(generate_wahl_chains(1), vec![ch(&[4])]);
        let two = generate_wahl_chains(2);
        assert_eq!(two, vec![ch(&[4]), ch(&[2, 5]), ch(&[5, 2])]);
        for s in 1..=6 {
            let count = generate_wahl_chains(s)
                .iter()
                .filter(|c| c.len() == s)
                .count();
            assert_eq!(count, 1 << (s - 1), "length {}", s);
        }
    }

    #[test]
    fn generated_chains_are_wahl() {
        for c in generate_wahl_chains(6) {
            let cls = classify_chain(&c);
            assert!(cls.is_wahl(), "{:?} classified {:?}", c, cls.kind);
        }
    }

    #[test]
    fn discrepancy_solves() {
        assert_eq!(
            discrepancies(&ch(&[3, 4, 2])),
            vec![
                ProjectiveRational::ratio(-11, 19),
                ProjectiveRational::ratio(-14, 19),
                ProjectiveRational::ratio(-7, 19),
            ]
        );
        assert_eq!(discrepancies(&ch(&[2])), vec![ProjectiveRational::integer(0)]);
        assert_eq!(
            discrepancies(&ch(&[2, 2])),
            vec![ProjectiveRational::integer(0), ProjectiveRational::integer(0)]
        );
        assert_eq!(discrepancies(&ch(&[4])), vec![ProjectiveRational::ratio(-1, 2)]);
    }

    #[test]
    fn wahl_data_for_5_2() {
        let w = wahl_data(&ch(&[5, 2])).unwrap();
        assert_eq!((w.m, w.a), (3, 1));
        assert_eq!(w.nu, vec![1, 2, 3]);
        assert_eq!(w.initial_index, 0);
        assert_eq!(
            w.discrepancies,
            vec![ProjectiveRational::ratio(-2, 3), ProjectiveRational::ratio(-1, 3)]
        );
    }

    #[test]
    fn initial_curve_spot_checks() {
        assert_eq!(wahl_data(&ch(&[2, 6, 2, 3])).unwrap().initial_index, 1);
        assert_eq!(
            wahl_data(&ch(&[2, 2, 2, 2, 2, 7, 2, 2, 7])).unwrap().initial_index,
            5
        );
        assert_eq!(wahl_data(&ch(&[3, 2, 6, 2])).unwrap().initial_index, 2);
    }

    #[test]
    fn replay_matches_linear_solve() {
        for c in [ch(&[5, 2]), ch(&[2, 6, 2, 3]), ch(&[2, 2, 6, 2, 4])] {
            let w = wahl_data(&c).unwrap();
            assert_eq!(nu_replay(&c).unwrap(), w.nu, "{:?}", c);
        }
    }

    #[test]
    fn replay_rejects_non_wahl() {
        assert_eq!(nu_replay(&ch(&[3, 3])).unwrap_err().code(), "not-wahl");
        assert!(wahl_data(&ch(&[2, 2])).is_err());
    }

    #[test]
    fn end_discrepancy_identity() {
        for c in [ch(&[4]), ch(&[5, 2]), ch(&[2, 6, 2, 3])] {
            let d = discrepancies(&c);
            let sum = d[0].add(&d[c.len() - 1]);
            assert_eq!(sum, ProjectiveRational::integer(-1), "{:?}", c);
        }
    }

    #[test]
    fn canonical_degree_examples() {
        assert_eq!(
            relative_canonical_degree(-1, &[]),
            ProjectiveRational::integer(-1)
        );
        assert_eq!(
            relative_canonical_degree(
                -1,
                &[ProjectiveRational::ratio(-1, 2), ProjectiveRational::ratio(-1, 2)]
            ),
            ProjectiveRational::integer(0)
        );
        assert_eq!(
            relative_canonical_degree(
                -1,
                &[ProjectiveRational::ratio(-2, 3), ProjectiveRational::ratio(-1, 2)]
            ),
            ProjectiveRational::ratio(1, 6)
        );
    }

    #[test]
    fn singularity_type_validation() {
        assert!(SingularityType::new(19, 7).is_ok());
        assert!(SingularityType::new(1, 0).is_ok());
        assert!(SingularityType::new(4, 2).is_err());
        assert!(SingularityType::new(4, 0).is_err());
        assert!(SingularityType::new(4, 4).is_err());
        assert_eq!(SingularityType::new(19, 7).unwrap().to_string(), "1/19(1,7)");
    }

    #[test]
    fn classification_json() {
        let json = serde_json::to_string(&classify_chain(&ch(&[3, 2, 3]))).unwrap();
        assert_eq!(json, r#"{"kind":"ClassT","d":3,"m":2,"a":1}"#);
        let json = serde_json::to_string(&classify_chain(&ch(&[4]))).unwrap();
        assert_eq!(json, r#"{"kind":"Wahl","m":2,"a":1}"#);
    }
}
