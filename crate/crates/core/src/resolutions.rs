//! The resolution hierarchy of a cyclic quotient surface singularity:
//! minimal and maximal resolutions, decorated partial resolutions whose
//! contracted blocks carry class-T or Wahl singularities, the crepant
//! refinement that replaces every class-T block by a string of Wahl blocks,
//! and the compactification that seeds the minimal-model-program engine.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cfrac::{
    blow_up_at, contract_at, expand_fraction, BlowUpSite, CfracError, Chain, ProjectiveRational,
};
use crate::mmp::{CurveSpec, FamilyState, Role};
use crate::tsing::{classify_chain, discrepancies, relative_canonical_degree, SingularityType, TKind};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ResolutionError {
    #[error("malformed decoration: {0}")]
    MalformedDecoration(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{n} exceeds the supported bound {bound} for exhaustive enumeration")]
    BoundExceeded { n: i64, bound: i64 },
    #[error(transparent)]
    Cfrac(#[from] CfracError),
}

impl ResolutionError {
    /// Stable machine-readable identifier for this error.
    pub fn code(&self) -> &'static str {
        match self {
            ResolutionError::MalformedDecoration(_) => "malformed-decoration",
            ResolutionError::InvalidInput(_) => "invalid-input",
            ResolutionError::BoundExceeded { .. } => "bound-exceeded",
            ResolutionError::Cfrac(e) => e.code(),
        }
    }
}

/// One curve of a decorated resolution: its self-intersection and the block
/// it belongs to, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DecoratedNode {
    #[serde(rename = "s")]
    pub selfint: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
}

/// A contracted block, recorded by the negated self-intersections of its
/// member curves.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockDecoration {
    pub chain: Chain,
}

/// A chain of curves partitioned into kept curves and contracted blocks.
///
/// Contracting every block yields a partial resolution whose singular points
/// are the blocks' singularities; the kept curves survive.  Which block kinds
/// are legal, and what the kept curves' canonical degrees must satisfy,
/// depends on the [`ValidationMode`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DecoratedResolution {
    pub nodes: Vec<DecoratedNode>,
    pub blocks: Vec<BlockDecoration>,
}

/// A maximal segment of a decorated resolution: either one kept curve or one
/// whole block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    /// A kept curve with the given (negative) self-intersection.
    Kept(i64),
    /// A contracted block with the given negated self-intersections.
    Block(Chain),
}

impl DecoratedResolution {
    /// Builds a decoration from segments in chain order, numbering blocks by
    /// order of appearance.
    pub fn from_segments(segments: impl IntoIterator<Item = Segment>) -> Self {
        let mut nodes = Vec::new();
        let mut blocks = Vec::new();
        for seg in segments {
            match seg {
                Segment::Kept(selfint) => nodes.push(DecoratedNode {
                    selfint,
                    block: None,
                }),
                Segment::Block(chain) => {
                    let id = blocks.len();
                    for &entry in chain.iter() {
                        nodes.push(DecoratedNode {
                            selfint: -entry,
                            block: Some(id),
                        });
                    }
                    blocks.push(BlockDecoration { chain });
                }
            }
        }
        DecoratedResolution { nodes, blocks }
    }

    /// The decoration with every curve kept and no blocks.
    pub fn all_kept(chain: &Chain) -> Self {
        DecoratedResolution {
            nodes: chain
                .iter()
                .map(|&entry| DecoratedNode {
                    selfint: -entry,
                    block: None,
                })
                .collect(),
            blocks: Vec::new(),
        }
    }

    /// Negated self-intersections of the whole chain, blocks included.
    pub fn underlying_chain(&self) -> Chain {
        Chain::from(self.nodes.iter().map(|n| -n.selfint).collect::<Vec<_>>())
    }

    /// The chain split back into kept curves and whole blocks.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.nodes.len() {
            match self.nodes[i].block {
                None => {
                    out.push(Segment::Kept(self.nodes[i].selfint));
                    i += 1;
                }
                Some(b) => {
                    out.push(Segment::Block(self.blocks[b].chain.clone()));
                    while i < self.nodes.len() && self.nodes[i].block == Some(b) {
                        i += 1;
                    }
                }
            }
        }
        out
    }

    /// Checks the structural invariants: block ids in range, every block a
    /// nonempty contiguous run matching its recorded chain, no two blocks
    /// adjacent without a kept curve between them, and all self-intersections
    /// negative.
    pub fn validate_structure(&self) -> Result<(), ResolutionError> {
        let malformed = |msg: String| Err(ResolutionError::MalformedDecoration(msg));
        if self.nodes.is_empty() {
            return malformed("empty chain".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.selfint >= 0 {
                return malformed(format!(
                    "node {i} has non-negative self-intersection {}",
                    node.selfint
                ));
            }
            if let Some(b) = node.block {
                if b >= self.blocks.len() {
                    return malformed(format!("node {i} references unknown block {b}"));
                }
            }
        }
        for w in self.nodes.windows(2) {
            if let (Some(b0), Some(b1)) = (w[0].block, w[1].block) {
                if b0 != b1 {
                    return malformed(format!(
                        "blocks {b0} and {b1} are adjacent without a kept curve between them"
                    ));
                }
            }
        }
        for (b, block) in self.blocks.iter().enumerate() {
            let span: Vec<usize> = (0..self.nodes.len())
                .filter(|&i| self.nodes[i].block == Some(b))
                .collect();
            if span.is_empty() {
                return malformed(format!("block {b} has no member curves"));
            }
            if span.windows(2).any(|w| w[1] != w[0] + 1) {
                return malformed(format!("block {b} is not contiguous"));
            }
            let negated: Vec<i64> = span.iter().map(|&i| -self.nodes[i].selfint).collect();
            if negated[..] != block.chain[..] {
                return malformed(format!(
                    "block {b} chain {} does not match its member curves",
                    block.chain
                ));
            }
        }
        Ok(())
    }

    /// Canonical degree of each kept curve against the adjacent block-end
    /// discrepancies, in node order.
    fn kept_degrees(&self) -> Vec<ProjectiveRational> {
        let end_discs: Vec<(ProjectiveRational, ProjectiveRational)> = self
            .blocks
            .iter()
            .map(|b| {
                let d = discrepancies(&b.chain);
                (d[0].clone(), d[d.len() - 1].clone())
            })
            .collect();
        let mut out = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.block.is_some() {
                continue;
            }
            let mut touching = Vec::new();
            if i > 0 {
                if let Some(b) = self.nodes[i - 1].block {
                    touching.push(end_discs[b].1.clone());
                }
            }
            if let Some(next) = self.nodes.get(i + 1) {
                if let Some(b) = next.block {
                    touching.push(end_discs[b].0.clone());
                }
            }
            out.push(relative_canonical_degree(node.selfint, &touching));
        }
        out
    }
}

/// What a decoration must satisfy to describe a partial resolution whose
/// relative canonical class is ample (`P`) or nef (`M`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValidationMode {
    /// Blocks may carry any class-T singularity (Wahl, larger class T, or Du
    /// Val A); every kept curve needs strictly positive canonical degree.
    P,
    /// Blocks must be Wahl; kept curves need nonnegative canonical degree.
    M,
}

/// Outcome of [`validate_p_resolution`], one flag per check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub mode: ValidationMode,
    /// Every block classifies as a legal singularity for the mode.
    pub blocks_class_t: bool,
    /// Every kept curve's canonical degree has the required sign.
    pub canonical_degrees: bool,
    /// The underlying chain blows down to the minimal resolution and, in `P`
    /// mode, is additionally dominated by the maximal resolution.  (`M`-mode
    /// chains may blow up beyond the maximal resolution: joining curves of
    /// canonical degree 0 live outside its strictly-positive labels.)
    pub chain_between: bool,
    pub passes: bool,
}

/// Repeatedly contracts the leftmost interior 1-entry; the result is the
/// blow-down normal form of the chain.
pub fn blow_down_normal_form(chain: &Chain) -> Chain {
    let mut c = chain.clone();
    loop {
        let interior = (1..c.len().saturating_sub(1)).find(|&i| c[i] == 1);
        match interior {
            Some(i) => c = contract_at(&c, i).expect("interior 1-entries contract"),
            None => return c,
        }
    }
}

/// All chains reachable from `chain` by contracting interior 1-entries,
/// including `chain` itself.
pub fn blow_down_descendants(chain: &Chain) -> BTreeSet<Chain> {
    let mut seen = BTreeSet::from([chain.clone()]);
    let mut queue = VecDeque::from([chain.clone()]);
    while let Some(c) = queue.pop_front() {
        for i in 1..c.len().saturating_sub(1) {
            if c[i] == 1 {
                let next = contract_at(&c, i).expect("interior 1-entries contract");
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    seen
}

/// The maximal resolution: the largest chain over the singularity whose
/// log-discrepancy labels `α_i` stay positive, obtained by blowing up every
/// junction whose adjacent labels sum below 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaximalResolution {
    pub chain: Chain,
    /// Log-discrepancy labels in `(0, 1]`, one per curve; Du Val curves carry
    /// exactly 1.
    pub alphas: Vec<ProjectiveRational>,
}

/// Computes the maximal resolution of `1/n(1,a)`.  Starting from the minimal
/// resolution with `α_i = 1 + (discrepancy of E_i)`, every junction whose
/// labels satisfy `α_i + α_j < 1` is blown up, the new curve taking label
/// `α_i + α_j`, until no such junction remains.  The result is independent of
/// the junction order.
pub fn maximal_resolution(n: i64, a: i64) -> Result<MaximalResolution, ResolutionError> {
    let chain = expand_fraction(n, a)?;
    let one = ProjectiveRational::integer(1);
    let mut alphas: Vec<ProjectiveRational> = discrepancies(&chain)
        .into_iter()
        .map(|d| one.clone().add(&d))
        .collect();
    let mut chain = chain;
    loop {
        let junction = (0..chain.len() - 1)
            .find(|&i| alphas[i].clone().add(&alphas[i + 1]) < one);
        match junction {
            Some(i) => {
                let merged = alphas[i].clone().add(&alphas[i + 1]);
                chain = blow_up_at(&chain, BlowUpSite::Junction(i))?;
                alphas.insert(i + 1, merged);
            }
            None => break,
        }
    }
    Ok(MaximalResolution { chain, alphas })
}

fn mode_allows_block(mode: ValidationMode, chain: &Chain) -> bool {
    let class = classify_chain(chain);
    match mode {
        ValidationMode::P => class.is_class_t(),
        ValidationMode::M => class.is_wahl(),
    }
}

fn degree_ok(mode: ValidationMode, degree: &ProjectiveRational) -> bool {
    let zero = ProjectiveRational::integer(0);
    match mode {
        ValidationMode::P => *degree > zero,
        ValidationMode::M => *degree >= zero,
    }
}

fn validate_with_context(
    dec: &DecoratedResolution,
    bounds: &Chain,
    descendants: &BTreeSet<Chain>,
    mode: ValidationMode,
) -> Result<ValidationReport, ResolutionError> {
    dec.validate_structure()?;
    let blocks_class_t = dec
        .blocks
        .iter()
        .all(|b| mode_allows_block(mode, &b.chain));
    let canonical_degrees = dec.kept_degrees().iter().all(|deg| degree_ok(mode, deg));
    let chain = dec.underlying_chain();
    let dominates_minimal = blow_down_normal_form(&chain) == *bounds;
    let chain_between = match mode {
        ValidationMode::P => dominates_minimal && descendants.contains(&chain),
        ValidationMode::M => dominates_minimal,
    };
    Ok(ValidationReport {
        mode,
        blocks_class_t,
        canonical_degrees,
        chain_between,
        passes: blocks_class_t && canonical_degrees && chain_between,
    })
}

/// Validates `dec` as a partial resolution of `1/n(1,a)` in the given mode,
/// reporting each check separately: legal block kinds, canonical degree signs
/// at kept curves, and the underlying chain blowing down to the minimal
/// resolution (in `P` mode it must moreover be dominated by the maximal one).
pub fn validate_p_resolution(
    dec: &DecoratedResolution,
    n: i64,
    a: i64,
    mode: ValidationMode,
) -> Result<ValidationReport, ResolutionError> {
    let bounds = expand_fraction(n, a)?;
    let maximal = maximal_resolution(n, a)?;
    let descendants = blow_down_descendants(&maximal.chain);
    validate_with_context(dec, &bounds, &descendants, mode)
}

/// The crepant refinement: every class-T block `(d,m,a)` with `d ≥ 2` becomes
/// `d` Wahl blocks for `m²/(ma−1)` joined by kept (−1)-curves, every Du Val
/// block dissolves into kept (−2)-curves, and Wahl blocks pass through.  The
/// output is valid in `M` mode, with each joining curve of canonical degree
/// exactly 0; decorations already in `M` form come back unchanged.
pub fn crepant_m_resolution(
    dec: &DecoratedResolution,
) -> Result<DecoratedResolution, ResolutionError> {
    dec.validate_structure()
        .map_err(|e| ResolutionError::InvalidInput(e.to_string()))?;
    let zero = ProjectiveRational::integer(0);
    if !dec.kept_degrees().iter().all(|deg| *deg >= zero) {
        return Err(ResolutionError::InvalidInput(
            "a kept curve has negative canonical degree".into(),
        ));
    }
    let mut out = Vec::new();
    for seg in dec.segments() {
        match seg {
            Segment::Kept(s) => out.push(Segment::Kept(s)),
            Segment::Block(chain) => match classify_chain(&chain).kind {
                TKind::NotT => {
                    return Err(ResolutionError::InvalidInput(format!(
                        "block {chain} is not a class-T chain"
                    )))
                }
                TKind::DuValA { k } => {
                    out.extend(std::iter::repeat_n(Segment::Kept(-2), k as usize));
                }
                TKind::Wahl { .. } => out.push(Segment::Block(chain)),
                TKind::ClassT { d, m, a } => {
                    let wahl = expand_fraction(m * m, m * a - 1)?;
                    for copy in 0..d {
                        if copy > 0 {
                            out.push(Segment::Kept(-1));
                        }
                        out.push(Segment::Block(wahl.clone()));
                    }
                }
            },
        }
    }
    Ok(DecoratedResolution::from_segments(out))
}

/// Compactifies a valid `M`-mode decoration of `1/n(1,a)` into the initial
/// state for the controlled minimal-model program: the decoration's curves,
/// an interior (−1)-curve, then boundary curves `D_e(−a_e),…,D_2(−a_2)`,
/// `D_1(−(a_1−1))` and a (+1)-section, where `[a_1,…,a_e]` is the expansion
/// of `n/(n−a)`.
pub fn compactify(
    dec: &DecoratedResolution,
    n: i64,
    a: i64,
) -> Result<FamilyState, ResolutionError> {
    let report = validate_p_resolution(dec, n, a, ValidationMode::M)?;
    if !report.passes {
        return Err(ResolutionError::InvalidInput(format!(
            "not a valid M-mode decoration of 1/{n}(1,{a}): {report:?}"
        )));
    }
    let a_chain = expand_fraction(n, n - a)?;
    let e = a_chain.len();
    let mut specs: Vec<CurveSpec> = dec
        .nodes
        .iter()
        .map(|node| CurveSpec {
            selfint: node.selfint,
            role: Role::Interior,
            block: node.block,
        })
        .collect();
    specs.push(CurveSpec {
        selfint: -1,
        role: Role::Interior,
        block: None,
    });
    for j in (2..=e).rev() {
        specs.push(CurveSpec {
            selfint: -a_chain[j - 1],
            role: Role::Boundary(j),
            block: None,
        });
    }
    specs.push(CurveSpec {
        selfint: -(a_chain[0] - 1),
        role: Role::Boundary(1),
        block: None,
    });
    specs.push(CurveSpec {
        selfint: 1,
        role: Role::Section,
        block: None,
    });
    let blocks: BTreeMap<usize, Chain> = dec
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| (i, b.chain.clone()))
        .collect();
    let singularity = SingularityType::new(n, a)
        .map_err(|e| ResolutionError::InvalidInput(e.to_string()))?;
    Ok(FamilyState::new(specs, blocks, a_chain, singularity))
}

/// Enumerates every valid `P`-mode decoration of every chain between the
/// minimal and maximal resolutions of `1/n(1,a)`, with the default size
/// bound.
pub fn enumerate_p_resolutions_bruteforce(
    n: i64,
    a: i64,
) -> Result<Vec<DecoratedResolution>, ResolutionError> {
    enumerate_p_resolutions_with_bound(n, a, 60)
}

/// As [`enumerate_p_resolutions_bruteforce`] with an explicit bound on `n`.
pub fn enumerate_p_resolutions_with_bound(
    n: i64,
    a: i64,
    bound: i64,
) -> Result<Vec<DecoratedResolution>, ResolutionError> {
    if n > bound {
        return Err(ResolutionError::BoundExceeded { n, bound });
    }
    let bounds = expand_fraction(n, a)?;
    let maximal = maximal_resolution(n, a)?;
    let descendants = blow_down_descendants(&maximal.chain);
    let mut found = BTreeSet::new();
    for chain in &descendants {
        for dec in decorations_of(chain) {
            let report = validate_with_context(&dec, &bounds, &descendants, ValidationMode::P)?;
            if report.passes {
                found.insert(dec);
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// Pending left-context during decoration search.
enum Prev {
    Start,
    /// A kept curve whose right neighbor is not yet chosen, with the
    /// discrepancy contribution already incurred on its left.
    Kept(i64, ProjectiveRational),
    /// A block whose right-end discrepancy the next kept curve will touch.
    Block(ProjectiveRational),
}

/// All decorations of `chain` whose kept curves have strictly positive
/// canonical degree and whose blocks are class T, found by left-to-right
/// search with early pruning.
fn decorations_of(chain: &Chain) -> Vec<DecoratedResolution> {
    let len = chain.len();
    // Admissible block spans [i, j) with their end discrepancies.
    let mut spans: Vec<Vec<(usize, ProjectiveRational, ProjectiveRational)>> =
        vec![Vec::new(); len];
    for i in 0..len {
        for j in i + 1..=len {
            let sub = Chain::from(chain[i..j].to_vec());
            if sub.iter().any(|&e| e < 2) {
                continue;
            }
            if classify_chain(&sub).is_class_t() {
                let d = discrepancies(&sub);
                spans[i].push((j, d[0].clone(), d[d.len() - 1].clone()));
            }
        }
    }
    let zero = ProjectiveRational::integer(0);
    let mut out = Vec::new();
    let mut segments: Vec<Segment> = Vec::new();
    search(
        chain,
        &spans,
        &zero,
        0,
        Prev::Start,
        &mut segments,
        &mut out,
    );
    out
}

fn search(
    chain: &Chain,
    spans: &[Vec<(usize, ProjectiveRational, ProjectiveRational)>],
    zero: &ProjectiveRational,
    pos: usize,
    prev: Prev,
    segments: &mut Vec<Segment>,
    out: &mut Vec<DecoratedResolution>,
) {
    // Degree of a kept curve once both neighbor contributions are known.
    let kept_degree = |selfint: i64, left: &ProjectiveRational, right: &ProjectiveRational| {
        relative_canonical_degree(selfint, &[left.clone(), right.clone()])
    };
    if pos == chain.len() {
        if let Prev::Kept(selfint, left) = &prev {
            if kept_degree(*selfint, left, zero) <= *zero {
                return;
            }
        }
        out.push(DecoratedResolution::from_segments(segments.clone()));
        return;
    }
    // Keep the curve at `pos`.
    let keep_ok = match &prev {
        Prev::Kept(selfint, left) => kept_degree(*selfint, left, zero) > *zero,
        _ => true,
    };
    if keep_ok {
        let left = match &prev {
            Prev::Block(end) => end.clone(),
            _ => zero.clone(),
        };
        segments.push(Segment::Kept(-chain[pos]));
        search(
            chain,
            spans,
            zero,
            pos + 1,
            Prev::Kept(-chain[pos], left),
            segments,
            out,
        );
        segments.pop();
    }
    // Start a block at `pos` — only after a kept curve or at the start.
    if !matches!(prev, Prev::Block(_)) {
        for (end, first_disc, last_disc) in &spans[pos] {
            if let Prev::Kept(selfint, left) = &prev {
                if kept_degree(*selfint, left, first_disc) <= *zero {
                    continue;
                }
            }
            segments.push(Segment::Block(Chain::from(chain[pos..*end].to_vec())));
            search(
                chain,
                spans,
                zero,
                *end,
                Prev::Block(last_disc.clone()),
                segments,
                out,
            );
            segments.pop();
        }
    }
}
