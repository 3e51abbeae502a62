//! The analysis context for one finite model: an action, its regular
//! representation, the irreducible decomposition, a chosen irreducible
//! state space and the coherent family anchored at a base point.

use crate::error::{Error, Result};
use crate::group::GroupAction;
use crate::linalg::{CMat, CVec};
use crate::operators::{coherent_family, BasisTag, CoherentFamily};
use crate::repr::{
    decompose, projected_delta, InvariantSubspace, Representation, DEFAULT_DECOMPOSE_SEED,
};

/// How to pick the state space among the irreducible blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StateSpaceSelector {
    /// First block (in the deterministic decomposition order) with the
    /// given dimension.
    FirstOfDim(usize),
    /// Block by index in the decomposition order.
    Index(usize),
    /// First block of the largest dimension.
    #[default]
    LargestDim,
}

/// A fully prepared state space over a finite action.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub action: GroupAction,
    pub regular: Representation,
    pub blocks: Vec<InvariantSubspace>,
    pub m_index: usize,
    /// Restriction of the regular representation to the chosen block.
    pub rep_on_m: Representation,
    pub family: CoherentFamily,
    pub seed: u64,
}

impl StateSpace {
    /// Decomposes the regular representation and anchors a coherent family
    /// at `base_point`, using the normalized projection of the delta
    /// function at the base point as the reference vector.
    pub fn build(
        action: GroupAction,
        seed: u64,
        selector: StateSpaceSelector,
        base_point: usize,
    ) -> Result<Self> {
        let regular = Representation::regular(&action);
        let blocks = decompose(&regular, seed)?;
        let m_index =
            match selector {
                StateSpaceSelector::Index(i) => {
                    if i >= blocks.len() {
                        return Err(Error::IndexOutOfRange {
                            index: i,
                            order: blocks.len(),
                        });
                    }
                    i
                }
                StateSpaceSelector::FirstOfDim(d) => blocks
                    .iter()
                    .position(|b| b.dim() == d)
                    .ok_or(Error::DimensionMismatch(format!(
                        "no irreducible block of dimension {d}"
                    )))?,
                StateSpaceSelector::LargestDim => {
                    let max = blocks.iter().map(|b| b.dim()).max().unwrap_or(0);
                    blocks.iter().position(|b| b.dim() == max).unwrap()
                }
            };
        let rep_on_m = regular.restrict(&blocks[m_index].basis)?;
        let f0 = projected_delta(&blocks[m_index].basis, base_point)?;
        let tag = BasisTag(format!("M[seed={seed},block={m_index}]"));
        let family = coherent_family(&rep_on_m, &f0, &action, base_point, tag)?;
        Ok(StateSpace {
            action,
            regular,
            blocks,
            m_index,
            rep_on_m,
            family,
            seed,
        })
    }

    /// Same, with the default seed, base point 0 and largest block.
    pub fn default_for(action: GroupAction) -> Result<Self> {
        StateSpace::build(
            action,
            DEFAULT_DECOMPOSE_SEED,
            StateSpaceSelector::default(),
            0,
        )
    }

    /// Builds a state space with an explicit reference vector in the chosen
    /// block's coordinates instead of the projected delta function.
    pub fn with_reference_vector(
        action: GroupAction,
        seed: u64,
        selector: StateSpaceSelector,
        base_point: usize,
        f0: &CVec,
    ) -> Result<Self> {
        let mut space = StateSpace::build(action, seed, selector, base_point)?;
        let tag = space.family.tag.clone();
        space.family = coherent_family(&space.rep_on_m, f0, &space.action, base_point, tag)?;
        Ok(space)
    }

    pub fn m_dim(&self) -> usize {
        self.blocks[self.m_index].dim()
    }

    pub fn m_basis(&self) -> &CMat {
        &self.blocks[self.m_index].basis
    }

    /// Evaluates a state-space vector (given in M coordinates) as a
    /// function on `Φ`.
    pub fn as_function(&self, coords: &CVec) -> CVec {
        self.m_basis() * coords
    }

    /// Restriction matrix of the state space to a subset of points: rows
    /// indexed by the subset, columns by the M basis.
    pub fn restriction_to(&self, subset: &[usize]) -> CMat {
        let basis = self.m_basis();
        CMat::from_fn(subset.len(), basis.ncols(), |r, c| basis[(subset[r], c)])
    }
}
