//! The semi-stable minimal-model-program engine on compactified chains.
//!
//! A [`FamilyState`] is the combinatorial shadow of a one-parameter smoothing
//! whose central fiber contains a chain of rational curves: interior curves
//! (some grouped into Wahl blocks standing for Wahl singularities), boundary
//! curves `D_j`, and a (+1)-section.  Two primitive birational moves evolve
//! the state — the usual flip at an mk1A extremal neighborhood and the
//! Iitaka–Kodaira divisorial contraction — while a degeneration ledger tracks
//! which curves survive as limit components of each boundary divisor, and a
//! `d`-vector counts the discovered (−1)-curves attached to each `D_j`.
//!
//! [`FamilyState::run_controlled_mmp`] drives the moves to a smooth central
//! fiber and reports the resulting `d`-vector.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::cfrac::{eval_chain, is_zero_chain, Chain};
use crate::tsing::{classify_chain, SingularityType};

pub type CurveId = u32;

/// Position of a curve within the compactified central chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Role {
    /// Exceptional or flip-created curve over the singularity.
    Interior,
    /// Boundary divisor `D_j` (`j` counted from the section side, 1-based).
    Boundary(usize),
    /// The (+1)-section closing off the chain.
    Section,
}

/// One curve of the central chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveRecord {
    pub id: CurveId,
    pub selfint: i64,
    pub role: Role,
    /// Wahl block this curve belongs to, if any.
    pub block: Option<usize>,
}

/// Input description of one curve when assembling a state; ids are assigned
/// by [`FamilyState::new`] in chain order.
#[derive(Debug, Clone)]
pub struct CurveSpec {
    pub selfint: i64,
    pub role: Role,
    pub block: Option<usize>,
}

/// A discovered (−1)-curve: its transversal attachments to the boundary,
/// as a map from boundary index to intersection multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscoveredCurve {
    pub attachments: BTreeMap<usize, i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpKind {
    Flip,
    Contraction,
}

/// One applied operation, with self-intersection snapshots of the whole
/// central chain before and after.  Serialized as a single JSON object per
/// line by the command-line front-end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OpRecord {
    pub step: usize,
    pub op: OpKind,
    pub curve: CurveId,
    /// Flip only: the contracted extremal neighborhood's singularity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contracted: Option<String>,
    /// Flip only: the surviving Wahl block, oriented away from the flip.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub new_block: Option<Chain>,
    /// Contraction only: boundary index receiving a discovered (−1)-curve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attached_to: Option<usize>,
    /// Contraction only: boundary index whose last limit component was
    /// blown down (a boundary blow-down event).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<usize>,
    pub before: Vec<i64>,
    pub after: Vec<i64>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MmpError {
    #[error("curve {curve} is not at an mk1A flipping position")]
    NotMk1a { curve: CurveId },
    #[error("curve {curve} touches two Wahl blocks (extremal neighborhood of type mk2A)")]
    UnsupportedConfiguration { curve: CurveId },
    #[error("curve {curve} has non-transversal boundary attachments {attachments:?}")]
    AmbiguousAttachment {
        curve: CurveId,
        attachments: BTreeMap<usize, i64>,
    },
    #[error("operation precondition violated: {reason}")]
    PreViolation { reason: String },
    #[error("step budget of {budget} operations exceeded")]
    BudgetExceeded { budget: usize },
    #[error("a Wahl block remains but no (−1)-curve is available on its boundary side")]
    Stuck,
    #[error("boundary index {index}: multiplicity a={a} minus d={d} drops below 1")]
    DOutOfRange { index: usize, a: i64, d: i64 },
    #[error("final multiplicities {tuple} do not form a zero chain")]
    NotZeroChain { tuple: Chain },
}

impl MmpError {
    /// Stable machine-readable identifier for this error.
    pub fn code(&self) -> &'static str {
        match self {
            MmpError::NotMk1a { .. } => "not-mk1a",
            MmpError::UnsupportedConfiguration { .. } => "unsupported-configuration",
            MmpError::AmbiguousAttachment { .. } => "ambiguous-attachment",
            MmpError::PreViolation { .. } => "pre-violation",
            MmpError::BudgetExceeded { .. } => "budget-exceeded",
            MmpError::Stuck => "stuck",
            MmpError::DOutOfRange { .. } => "d-out-of-range",
            MmpError::NotZeroChain { .. } => "not-zero-chain",
        }
    }
}

/// The evolving state of the compactified family.
#[derive(Debug, Clone)]
pub struct FamilyState {
    /// Central chain in order; boundary curves sit between the interior part
    /// and the section, with `D_1` adjacent to the section.
    pub curves: Vec<CurveRecord>,
    /// Wahl blocks by id, each the negated self-intersections of a
    /// contiguous run of interior curves.
    pub blocks: BTreeMap<usize, Chain>,
    /// Limit components of each boundary divisor `D_j`, as ordered curve ids.
    pub ledger: BTreeMap<usize, Vec<CurveId>>,
    /// Discovered (−1)-curves in discovery order.
    pub discovered: Vec<DiscoveredCurve>,
    /// Count of discovered curves attached to each boundary index.
    pub d: BTreeMap<usize, i64>,
    pub op_log: Vec<OpRecord>,
    /// The dual expansion `[a_1,…,a_e]` of the compactified singularity.
    pub a_chain: Chain,
    pub singularity: SingularityType,
}

/// Outcome of a full controlled run.
#[derive(Debug, Clone)]
pub struct MmpTrace {
    pub final_state: FamilyState,
    pub flips: usize,
    pub contractions: usize,
    /// `(d_1,…,d_e)`.
    pub d_vector: Vec<i64>,
}

impl MmpTrace {
    /// The multiplicities `n_j = a_j − d_j` read off the finished run.
    pub fn n_tuple(&self) -> Vec<i64> {
        self.final_state
            .a_chain
            .iter()
            .zip(&self.d_vector)
            .map(|(a, d)| a - d)
            .collect()
    }
}

impl FamilyState {
    /// Assembles a state from curve descriptions in chain order.  Ids are
    /// assigned sequentially; the ledger starts with the singleton class
    /// `{D_j}` for every boundary curve and all `d_j = 0`.
    ///
    /// Panics if a block id has a non-contiguous span or its chain does not
    /// match the negated self-intersections of that span.
    pub fn new(
        specs: Vec<CurveSpec>,
        blocks: BTreeMap<usize, Chain>,
        a_chain: Chain,
        singularity: SingularityType,
    ) -> Self {
        let curves: Vec<CurveRecord> = specs
            .into_iter()
            .enumerate()
            .map(|(i, s)| CurveRecord {
                id: i as CurveId,
                selfint: s.selfint,
                role: s.role,
                block: s.block,
            })
            .collect();
        for (&b, chain) in &blocks {
            let span: Vec<usize> = (0..curves.len())
                .filter(|&p| curves[p].block == Some(b))
                .collect();
            assert!(
                !span.is_empty() && span.windows(2).all(|w| w[1] == w[0] + 1),
                "block {b} does not occupy a contiguous run"
            );
            let negated: Vec<i64> = span.iter().map(|&p| -curves[p].selfint).collect();
            assert_eq!(
                &negated[..],
                &chain[..],
                "block {b} chain does not match its span"
            );
        }
        let mut ledger = BTreeMap::new();
        for c in &curves {
            if let Role::Boundary(j) = c.role {
                let prev = ledger.insert(j, vec![c.id]);
                assert!(prev.is_none(), "duplicate boundary index {j}");
            }
        }
        let d = (1..=a_chain.len()).map(|j| (j, 0)).collect();
        FamilyState {
            curves,
            blocks,
            ledger,
            discovered: Vec::new(),
            d,
            op_log: Vec::new(),
            a_chain,
            singularity,
        }
    }

    /// Self-intersections of the central chain in order.
    pub fn selfints(&self) -> Vec<i64> {
        self.curves.iter().map(|c| c.selfint).collect()
    }

    /// `(d_1,…,d_e)`.
    pub fn d_vector(&self) -> Vec<i64> {
        (1..=self.a_chain.len())
            .map(|j| *self.d.get(&j).unwrap_or(&0))
            .collect()
    }

    fn position(&self, id: CurveId) -> Option<usize> {
        self.curves.iter().position(|c| c.id == id)
    }

    /// Removes the curve at `pos` and bumps both neighbors by +1.
    fn blow_down_at(&mut self, pos: usize) {
        self.curves.remove(pos);
        if pos > 0 {
            self.curves[pos - 1].selfint += 1;
        }
        if pos < self.curves.len() {
            self.curves[pos].selfint += 1;
        }
    }

    fn pre(reason: impl Into<String>) -> MmpError {
        MmpError::PreViolation {
            reason: reason.into(),
        }
    }

    /// Performs the usual flip at the (−1)-curve `c`, which must sit next to
    /// one end of a Wahl block with its other neighbor outside any block.
    /// The flip is realized as a blow-down cascade: `c` is contracted, then
    /// block curves that reach −1 are contracted in turn — never the block
    /// curve farthest from `c`, whose image becomes the new curve `C⁺` and
    /// joins every ledger class containing the outside neighbor.  The
    /// surviving block curves are re-registered as a (shorter) Wahl block.
    /// When `c` is itself a limit component of some boundary class, the
    /// class drops it and carries the limit onward with its remaining
    /// components alone; this keeps every class's total self-intersection
    /// equal to the boundary curve it degenerates from.
    pub fn usual_flip(&mut self, c: CurveId) -> Result<(), MmpError> {
        let pos = self
            .position(c)
            .ok_or_else(|| Self::pre(format!("no curve with id {c}")))?;
        if self.curves[pos].selfint != -1 {
            return Err(Self::pre(format!(
                "curve {c} has self-intersection {}, expected -1",
                self.curves[pos].selfint
            )));
        }
        if self.curves[pos].block.is_some() {
            return Err(Self::pre(format!("curve {c} belongs to a Wahl block")));
        }
        let left_block = pos.checked_sub(1).and_then(|p| self.curves[p].block);
        let right_block = self.curves.get(pos + 1).and_then(|r| r.block);
        let (b, block_on_left) = match (left_block, right_block) {
            (Some(_), Some(_)) => return Err(MmpError::UnsupportedConfiguration { curve: c }),
            (Some(b), None) => (b, true),
            (None, Some(b)) => (b, false),
            (None, None) => return Err(MmpError::NotMk1a { curve: c }),
        };
        if !classify_chain(&self.blocks[&b]).is_wahl() {
            return Err(Self::pre(format!("block {b} is not a Wahl chain")));
        }
        let span: Vec<usize> = (0..self.curves.len())
            .filter(|&p| self.curves[p].block == Some(b))
            .collect();
        // Farthest-from-c block curve: its image survives as C⁺.
        let survivor_pos = if block_on_left {
            span[0]
        } else {
            *span.last().unwrap()
        };
        let survivor = self.curves[survivor_pos].id;
        let outside = if block_on_left {
            self.curves.get(pos + 1).map(|r| r.id)
        } else {
            pos.checked_sub(1).map(|p| self.curves[p].id)
        };
        // Chain of the block read from the surviving end toward c, with the
        // last entry decremented: the contracted neighborhood's singularity.
        let mut toward_c: Vec<i64> = span.iter().map(|&p| -self.curves[p].selfint).collect();
        if !block_on_left {
            toward_c.reverse();
        }
        *toward_c.last_mut().unwrap() -= 1;
        let contracted = {
            let v = eval_chain(&Chain::from(toward_c));
            if v.numer().clone() == 1u32.into() {
                "smooth".to_string()
            } else {
                let delta: i64 = v.numer().try_into().expect("contracted index overflows i64");
                let omega: i64 = v.denom().try_into().expect("contracted index overflows i64");
                SingularityType::new(delta, omega)
                    .expect("contracted fraction is a singularity type")
                    .to_string()
            }
        };
        let before = self.selfints();

        self.blow_down_at(pos);
        loop {
            let next = (0..self.curves.len()).find(|&p| {
                self.curves[p].block == Some(b)
                    && self.curves[p].selfint == -1
                    && self.curves[p].id != survivor
            });
            match next {
                Some(p) => {
                    debug_assert!(self
                        .ledger
                        .values()
                        .all(|class| !class.contains(&self.curves[p].id)));
                    self.blow_down_at(p);
                }
                None => break,
            }
        }

        let survivor_pos = self.position(survivor).expect("C⁺ survives the cascade");
        self.curves[survivor_pos].block = None;
        let span: Vec<usize> = (0..self.curves.len())
            .filter(|&p| self.curves[p].block == Some(b))
            .collect();
        let new_block = if span.is_empty() {
            self.blocks.remove(&b);
            None
        } else {
            let stored: Vec<i64> = span.iter().map(|&p| -self.curves[p].selfint).collect();
            let mut away: Vec<i64> = stored.clone();
            if !block_on_left {
                away.reverse();
            }
            let chain = Chain::from(stored);
            debug_assert!(
                classify_chain(&chain).is_wahl(),
                "flip left a non-Wahl block {chain}"
            );
            self.blocks.insert(b, chain);
            Some(Chain::from(away))
        };
        if let Some(r) = outside {
            for class in self.ledger.values_mut() {
                if class.contains(&r) {
                    class.push(survivor);
                }
            }
        }
        // A flipped limit component disappears; its class keeps carrying the
        // limit with the remaining components only.
        for class in self.ledger.values_mut() {
            class.retain(|&id| id != c);
        }
        let after = self.selfints();
        self.op_log.push(OpRecord {
            step: self.op_log.len(),
            op: OpKind::Flip,
            curve: c,
            contracted: Some(contracted),
            new_block,
            attached_to: None,
            boundary: None,
            before,
            after,
        });
        Ok(())
    }

    /// Iitaka–Kodaira contraction of the (−1)-curve `c`, which must avoid
    /// Wahl blocks on both sides.  If `c` is the sole remaining limit
    /// component of some boundary class, the class is retired (a boundary
    /// blow-down).  Otherwise its intersection numbers against every ledger
    /// class decide the event: all zero is a plain blow-down, a unit vector
    /// at `j` records a discovered (−1)-curve attached to `D_j` and
    /// increments `d_j`, and anything else is an error.
    pub fn ik_contract(&mut self, c: CurveId) -> Result<(), MmpError> {
        let pos = self
            .position(c)
            .ok_or_else(|| Self::pre(format!("no curve with id {c}")))?;
        if self.curves[pos].selfint != -1 {
            return Err(Self::pre(format!(
                "curve {c} has self-intersection {}, expected -1",
                self.curves[pos].selfint
            )));
        }
        if self.curves[pos].block.is_some() {
            return Err(Self::pre(format!("curve {c} belongs to a Wahl block")));
        }
        let near_block = [pos.checked_sub(1), Some(pos + 1)]
            .into_iter()
            .flatten()
            .filter_map(|p| self.curves.get(p))
            .any(|r| r.block.is_some());
        if near_block {
            return Err(Self::pre(format!("curve {c} touches a Wahl block")));
        }
        let before = self.selfints();

        if let Some((&j, _)) = self.ledger.iter().find(|(_, class)| class[..] == [c]) {
            self.ledger.remove(&j);
            self.blow_down_at(pos);
            let after = self.selfints();
            self.op_log.push(OpRecord {
                step: self.op_log.len(),
                op: OpKind::Contraction,
                curve: c,
                contracted: None,
                new_block: None,
                attached_to: None,
                boundary: Some(j),
                before,
                after,
            });
            return Ok(());
        }

        let mut attachments: BTreeMap<usize, i64> = BTreeMap::new();
        for (&j, class) in &self.ledger {
            let mut att = 0;
            for &gamma in class {
                if gamma == c {
                    att -= 1;
                } else {
                    let gp = self.position(gamma).expect("ledger curves stay in the chain");
                    if gp.abs_diff(pos) == 1 {
                        att += 1;
                    }
                }
            }
            if att != 0 {
                attachments.insert(j, att);
            }
        }
        let attached_to = match attachments.len() {
            0 => None,
            1 => {
                let (&j, &mult) = attachments.iter().next().unwrap();
                if mult != 1 {
                    return Err(MmpError::AmbiguousAttachment {
                        curve: c,
                        attachments,
                    });
                }
                *self.d.entry(j).or_insert(0) += 1;
                self.discovered.push(DiscoveredCurve { attachments });
                Some(j)
            }
            _ => {
                return Err(MmpError::AmbiguousAttachment {
                    curve: c,
                    attachments,
                })
            }
        };
        self.blow_down_at(pos);
        for class in self.ledger.values_mut() {
            class.retain(|&id| id != c);
        }
        let after = self.selfints();
        self.op_log.push(OpRecord {
            step: self.op_log.len(),
            op: OpKind::Contraction,
            curve: c,
            contracted: None,
            new_block: None,
            attached_to,
            boundary: None,
            before,
            after,
        });
        Ok(())
    }

    /// Runs the controlled program to a smooth central fiber.
    ///
    /// While blocks remain, the block closest to the boundary acts: the first
    /// (−1)-curve on its boundary side is flipped if it touches the block and
    /// contracted otherwise.  Once no block remains, the leftmost available
    /// (−1)-curve is contracted until none is left.  The run then checks that
    /// every `n_j = a_j − d_j` is at least 1 and that `(n_1,…,n_e)` is a zero
    /// chain.
    ///
    /// `budget` bounds the number of operations; it defaults to ten times the
    /// squared initial chain length.
    pub fn run_controlled_mmp(mut self, budget: Option<usize>) -> Result<MmpTrace, MmpError> {
        let budget = budget.unwrap_or(10 * self.curves.len() * self.curves.len());
        let mut ops = 0_usize;
        let spend = |ops: &mut usize| -> Result<(), MmpError> {
            *ops += 1;
            if *ops > budget {
                Err(MmpError::BudgetExceeded { budget })
            } else {
                Ok(())
            }
        };

        while !self.blocks.is_empty() {
            let span_end = (0..self.curves.len())
                .rev()
                .find(|&p| self.curves[p].block.is_some())
                .expect("a block exists");
            let c_pos = (span_end + 1..self.curves.len())
                .find(|&p| self.curves[p].selfint == -1)
                .ok_or(MmpError::Stuck)?;
            let c = self.curves[c_pos].id;
            spend(&mut ops)?;
            if c_pos == span_end + 1 {
                self.usual_flip(c)?;
            } else {
                self.ik_contract(c)?;
            }
        }

        loop {
            let next = (0..self.curves.len()).find(|&p| {
                self.curves[p].selfint == -1 && self.curves[p].role != Role::Section
            });
            let Some(c_pos) = next else { break };
            let c = self.curves[c_pos].id;
            spend(&mut ops)?;
            self.ik_contract(c)?;
        }

        let d_vector = self.d_vector();
        for (j, (&a, &d)) in self.a_chain.iter().zip(&d_vector).enumerate() {
            if a - d < 1 {
                return Err(MmpError::DOutOfRange {
                    index: j + 1,
                    a,
                    d,
                });
            }
        }
        let n_tuple = Chain::from(
            self.a_chain
                .iter()
                .zip(&d_vector)
                .map(|(a, d)| a - d)
                .collect::<Vec<_>>(),
        );
        if !self.a_chain.is_empty() && !is_zero_chain(&n_tuple) {
            return Err(MmpError::NotZeroChain { tuple: n_tuple });
        }
        let flips = self
            .op_log
            .iter()
            .filter(|op| op.op == OpKind::Flip)
            .count();
        let contractions = self.op_log.len() - flips;
        Ok(MmpTrace {
            final_state: self,
            flips,
            contractions,
            d_vector,
        })
    }
}
