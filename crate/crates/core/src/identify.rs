//! The two directions of the correspondence between partial resolutions of a
//! cyclic quotient surface singularity and the descriptors of its smoothing
//! components' Milnor fibers, plus an end-to-end bijectivity verifier.
//!
//! Forward: run the controlled minimal-model program on a compactified
//! decoration and read the descriptor off the discovered (−1)-curve counts.
//! Backward: rebuild the decoration from a descriptor by the boundary
//! contraction algorithm.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cfrac::{eval_chain, expand_fraction, is_zero_chain, Chain};
use crate::kset::{k_set, FillingDescriptor, KsetError};
use crate::mmp::MmpError;
use crate::resolutions::{
    compactify, crepant_m_resolution, enumerate_p_resolutions_bruteforce, validate_p_resolution,
    DecoratedResolution, ResolutionError, Segment, ValidationMode,
};
use crate::tsing::SingularityType;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum IdentifyError {
    #[error("descriptor ({tuple}) of 1/{n}(1,{a}) is outside the admissible set")]
    NotInK { tuple: Chain, n: i64, a: i64 },
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
    #[error(transparent)]
    Kset(#[from] KsetError),
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
    #[error(transparent)]
    Mmp(#[from] MmpError),
}

impl IdentifyError {
    /// Stable machine-readable identifier for this error.
    pub fn code(&self) -> &'static str {
        match self {
            IdentifyError::NotInK { .. } => "not-in-k",
            IdentifyError::InvalidDescriptor(_) => "invalid-descriptor",
            IdentifyError::Kset(e) => e.code(),
            IdentifyError::Resolution(e) => e.code(),
            IdentifyError::Mmp(e) => e.code(),
        }
    }
}

/// Full bijectivity evidence for one singularity: every descriptor paired
/// with its reconstructed decoration.
#[derive(Debug, Clone)]
pub struct CorrespondenceReport {
    pub singularity: SingularityType,
    pub pairs: Vec<(DecoratedResolution, FillingDescriptor)>,
    pub bijective: bool,
    pub k_set_size: usize,
}

/// Identifies the Milnor fiber of the smoothing attached to `dec`: the
/// decoration (crepant-refined first if it is in `P` form) is compactified,
/// the controlled program is run, and the descriptor `n_j = a_j − d_j` is
/// read off and checked against the admissible set.
pub fn milnor_fiber_descriptor(
    dec: &DecoratedResolution,
    n: i64,
    a: i64,
) -> Result<FillingDescriptor, IdentifyError> {
    let m_form = if validate_p_resolution(dec, n, a, ValidationMode::M)?.passes {
        dec.clone()
    } else if validate_p_resolution(dec, n, a, ValidationMode::P)?.passes {
        crepant_m_resolution(dec)?
    } else {
        return Err(ResolutionError::InvalidInput(format!(
            "decoration is valid in neither mode for 1/{n}(1,{a})"
        ))
        .into());
    };
    let state = compactify(&m_form, n, a)?;
    let trace = state.run_controlled_mmp(None)?;
    let n_tuple = trace.n_tuple();
    let set = k_set(n, a)?;
    set.into_iter()
        .find(|desc| desc.n_tuple == n_tuple)
        .ok_or_else(|| IdentifyError::NotInK {
            tuple: Chain::from(n_tuple),
            n,
            a,
        })
}

/// One boundary curve during the backward reconstruction.
struct BoundaryCurve {
    /// Boundary index, `e` down to 1; 0 marks the extra curve below `D_1`
    /// that is never contracted.
    index: usize,
    selfint: i64,
    /// Remaining attached (−1)-curves.
    attached: i64,
}

/// Rebuilds the decorated resolution producing a given descriptor.
///
/// The boundary chain `D_e(−a_e),…,D_1(−a_1)` plus a guard (−1)-curve is laid
/// out with `d_j = a_j − n_j` attached (−1)-curves on each `D_j`.  Each round
/// emits one block — `A_{d−1}` when the outermost curve has `d` attachments,
/// otherwise the class-T chain of `1/(δn'²)(1, δn'a'−1)` where `n'/a'` spans
/// the attachment-free outer run and `δ` counts the first attachments beyond
/// it — then contracts those attachments and cascades outermost-first through
/// boundary curves reaching −1, stopping at any curve that still carries
/// attachments.  If attachments remain, the round closes with a kept curve
/// whose self-intersection records how far the cascade ran.  The emitted
/// segments, read back from the boundary, form the decoration.
pub fn p_resolution_from_descriptor(
    desc: &FillingDescriptor,
    n: i64,
    a: i64,
) -> Result<DecoratedResolution, IdentifyError> {
    let a_chain = expand_fraction(n, n - a).map_err(ResolutionError::Cfrac)?;
    if a_chain.len() == 1 {
        return Err(KsetError::DegenerateLength { n, a }.into());
    }
    if desc.bounds != a_chain {
        return Err(IdentifyError::InvalidDescriptor(format!(
            "bounds {} do not match the expansion {} of {n}/{}",
            desc.bounds,
            a_chain,
            n - a
        )));
    }
    if desc.n_tuple.len() != a_chain.len() {
        return Err(IdentifyError::InvalidDescriptor(
            "descriptor length does not match the boundary length".into(),
        ));
    }
    for (i, (&ni, &ai)) in desc.n_tuple.iter().zip(a_chain.iter()).enumerate() {
        if ni < 1 || ni > ai {
            return Err(IdentifyError::InvalidDescriptor(format!(
                "entry n_{} = {ni} outside 1..={ai}",
                i + 1
            )));
        }
    }
    if !is_zero_chain(&Chain::from(desc.n_tuple.clone())) {
        return Err(IdentifyError::InvalidDescriptor(format!(
            "({}) does not represent zero",
            Chain::from(desc.n_tuple.clone())
        )));
    }

    let e = a_chain.len();
    let mut boundary: Vec<BoundaryCurve> = (1..=e)
        .rev()
        .map(|j| BoundaryCurve {
            index: j,
            selfint: -a_chain[j - 1],
            attached: a_chain[j - 1] - desc.n_tuple[j - 1],
        })
        .collect();
    boundary.push(BoundaryCurve {
        index: 0,
        selfint: -1,
        attached: 0,
    });

    let mut segments: Vec<Segment> = Vec::new();
    while boundary.iter().any(|b| b.attached > 0) {
        // Step one: emit the block for this round and pick the curve whose
        // attachments get contracted.
        let (designated, outer_case) = if boundary[0].attached > 0 {
            let delta = boundary[0].attached;
            if delta >= 2 {
                segments.push(Segment::Block(Chain::from(vec![2; (delta - 1) as usize])));
            }
            (0, true)
        } else {
            let skip = boundary
                .iter()
                .position(|b| b.attached > 0)
                .expect("attachments remain");
            let outer: Vec<i64> = boundary[..skip].iter().map(|b| -b.selfint).collect();
            let value = eval_chain(&Chain::from(outer));
            let np: i64 = value
                .numer()
                .try_into()
                .map_err(|_| IdentifyError::InvalidDescriptor("chain value overflow".into()))?;
            let ap: i64 = value
                .denom()
                .try_into()
                .map_err(|_| IdentifyError::InvalidDescriptor("chain value overflow".into()))?;
            let delta = boundary[skip].attached;
            let index = delta
                .checked_mul(np)
                .and_then(|v| v.checked_mul(np))
                .ok_or_else(|| IdentifyError::InvalidDescriptor("block index overflow".into()))?;
            let twist = delta * np * ap - 1;
            let block = expand_fraction(index, twist).map_err(ResolutionError::Cfrac)?;
            segments.push(Segment::Block(block));
            (skip, false)
        };

        // Step two: contract the designated curve's attachments, then cascade
        // outermost-first through boundary curves at −1.  A curve still
        // carrying attachments stops the cascade; the innermost guard curve
        // is never contracted.
        let round_outer_index = boundary[0].index;
        boundary[designated].selfint += boundary[designated].attached;
        boundary[designated].attached = 0;
        let mut outer_contracted = false;
        let mut m = 0_i64;
        loop {
            let pos = boundary
                .iter()
                .position(|b| b.index != 0 && b.selfint == -1);
            let Some(pos) = pos else { break };
            if boundary[pos].attached > 0 {
                break;
            }
            let contracted = boundary.remove(pos);
            if pos > 0 {
                boundary[pos - 1].selfint += 1;
            }
            if pos < boundary.len() {
                boundary[pos].selfint += 1;
            }
            if contracted.index == round_outer_index {
                outer_contracted = true;
            }
            if outer_contracted {
                m += 1;
            }
        }

        // Step three: unless everything is resolved, close the round with a
        // kept curve recording the cascade depth.
        if boundary.iter().all(|b| b.attached == 0) {
            break;
        }
        let base = if outer_case { 2 } else { 1 };
        segments.push(Segment::Kept(-(base + m)));
    }

    segments.reverse();
    Ok(DecoratedResolution::from_segments(segments))
}

/// Checks the full correspondence for `1/n(1,a)`: every admissible descriptor
/// reconstructs to a decoration that validates in `P` mode and maps forward
/// to the same descriptor, and (within the exhaustive-search bound) the
/// reconstructions are exactly the brute-force enumeration.
pub fn verify_correspondence(n: i64, a: i64) -> Result<CorrespondenceReport, IdentifyError> {
    let set = k_set(n, a)?;
    let singularity =
        SingularityType::new(n, a).map_err(|e| IdentifyError::InvalidDescriptor(e.to_string()))?;
    let mut pairs = Vec::new();
    let mut bijective = true;
    for desc in &set {
        let dec = p_resolution_from_descriptor(desc, n, a)?;
        let valid = validate_p_resolution(&dec, n, a, ValidationMode::P)?.passes;
        let round_trip = milnor_fiber_descriptor(&dec, n, a)?;
        if !valid || round_trip.n_tuple != desc.n_tuple {
            bijective = false;
        }
        pairs.push((dec, desc.clone()));
    }
    match enumerate_p_resolutions_bruteforce(n, a) {
        Ok(brute) => {
            let rebuilt: BTreeSet<&DecoratedResolution> = pairs.iter().map(|(d, _)| d).collect();
            let brute_set: BTreeSet<&DecoratedResolution> = brute.iter().collect();
            if rebuilt != brute_set || brute.len() != set.len() {
                bijective = false;
            }
        }
        Err(ResolutionError::BoundExceeded { .. }) => {}
        Err(e) => return Err(e.into()),
    }
    Ok(CorrespondenceReport {
        singularity,
        pairs,
        bijective,
        k_set_size: set.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolutions::Segment;

    fn ch(entries: &[i64]) -> Chain {
        Chain::from(entries.to_vec())
    }

    fn y1() -> DecoratedResolution {
        DecoratedResolution::from_segments(vec![
            Segment::Kept(-3),
            Segment::Kept(-4),
            Segment::Block(ch(&[2])),
        ])
    }

    fn y2() -> DecoratedResolution {
        DecoratedResolution::from_segments(vec![
            Segment::Kept(-3),
            Segment::Block(ch(&[4])),
            Segment::Kept(-2),
        ])
    }

    fn y3() -> DecoratedResolution {
        DecoratedResolution::from_segments(vec![
            Segment::Block(ch(&[4])),
            Segment::Kept(-1),
            Segment::Block(ch(&[5, 2])),
        ])
    }

    fn descriptor(n: i64, a: i64, tuple: &[i64]) -> FillingDescriptor {
        k_set(n, a)
            .unwrap()
            .into_iter()
            .find(|d| d.n_tuple == tuple)
            .expect("descriptor in the admissible set")
    }

    #[test]
    fn forward_direction_for_19_7() {
        assert_eq!(
            milnor_fiber_descriptor(&y1(), 19, 7).unwrap().n_tuple,
            vec![1, 2, 2, 1]
        );
        assert_eq!(
            milnor_fiber_descriptor(&y2(), 19, 7).unwrap().n_tuple,
            vec![1, 3, 1, 2]
        );
        assert_eq!(
            milnor_fiber_descriptor(&y3(), 19, 7).unwrap().n_tuple,
            vec![2, 2, 1, 3]
        );
    }

    #[test]
    fn backward_direction_for_19_7() {
        assert_eq!(
            p_resolution_from_descriptor(&descriptor(19, 7, &[1, 2, 2, 1]), 19, 7).unwrap(),
            y1()
        );
        assert_eq!(
            p_resolution_from_descriptor(&descriptor(19, 7, &[1, 3, 1, 2]), 19, 7).unwrap(),
            y2()
        );
        assert_eq!(
            p_resolution_from_descriptor(&descriptor(19, 7, &[2, 2, 1, 3]), 19, 7).unwrap(),
            y3()
        );
    }

    #[test]
    fn backward_direction_for_8_3() {
        // 8/5 = [2,3,2]; the two-block descriptor carries a single [3,3].
        assert_eq!(
            p_resolution_from_descriptor(&descriptor(8, 3, &[2, 1, 2]), 8, 3).unwrap(),
            DecoratedResolution::from_segments(vec![Segment::Block(ch(&[3, 3]))])
        );
        assert_eq!(
            p_resolution_from_descriptor(&descriptor(8, 3, &[1, 2, 1]), 8, 3).unwrap(),
            DecoratedResolution::all_kept(&ch(&[3, 3]))
        );
    }

    #[test]
    fn round_trips_for_8_3() {
        for desc in k_set(8, 3).unwrap() {
            let dec = p_resolution_from_descriptor(&desc, 8, 3).unwrap();
            assert!(validate_p_resolution(&dec, 8, 3, ValidationMode::P)
                .unwrap()
                .passes);
            let forward = milnor_fiber_descriptor(&dec, 8, 3).unwrap();
            assert_eq!(forward.n_tuple, desc.n_tuple);
        }
    }

    #[test]
    fn report_for_19_7_is_bijective() {
        let report = verify_correspondence(19, 7).unwrap();
        assert!(report.bijective);
        assert_eq!(report.k_set_size, 3);
        assert_eq!(report.pairs.len(), 3);
    }

    #[test]
    fn report_for_4_1() {
        let report = verify_correspondence(4, 1).unwrap();
        assert!(report.bijective);
        assert_eq!(report.k_set_size, 2);
    }

    #[test]
    fn degenerate_boundary_is_rejected() {
        let err = verify_correspondence(2, 1).unwrap_err();
        assert_eq!(err.code(), "degenerate-length");
        let err = verify_correspondence(5, 4).unwrap_err();
        assert_eq!(err.code(), "degenerate-length");
    }

    #[test]
    fn descriptor_validation_rejects_bad_tuples() {
        let mut desc = descriptor(19, 7, &[2, 2, 1, 3]);
        desc.n_tuple = vec![2, 2, 2, 3];
        let err = p_resolution_from_descriptor(&desc, 19, 7).unwrap_err();
        assert_eq!(err.code(), "invalid-descriptor");
        let mut desc = descriptor(19, 7, &[2, 2, 1, 3]);
        desc.n_tuple = vec![2, 4, 1, 3];
        let err = p_resolution_from_descriptor(&desc, 19, 7).unwrap_err();
        assert_eq!(err.code(), "invalid-descriptor");
    }

    #[test]
    fn artin_descriptor_comes_from_the_minimal_resolution() {
        let minimal = DecoratedResolution::all_kept(&expand_fraction(19, 7).unwrap());
        let desc = milnor_fiber_descriptor(&minimal, 19, 7).unwrap();
        assert_eq!(desc.n_tuple.first(), Some(&1));
        assert_eq!(desc.n_tuple.last(), Some(&1));
    }
}
