//! Expansion of supertiles, transition matrices, patch counting, and
//! combinatorial structure checks.

mod matching;
mod patch;
mod structure;

pub use matching::{count_patch, patch_occurrences};
pub use patch::{expand, piece_count, ConcretePatch, Coord, PatchPieces, PlacedPiece};
pub use structure::{
    adjacency_classes, adjacency_complexity, adjacency_complexity_at_depth, primitivity,
    rank_bound, strong_primitivity, van_hove_diagnostic, AdjacencyClass, LevelPrimitivity,
    PrimitivityReport, PrimitivityVerdict, RankBound, StableZeroCertificate,
};

use crate::error::{FusionError, Result};
use crate::matrix::IntMatrix;
use crate::rule::FusionRule;

/// `M_{n,N}`: entry `(i, j)` counts level-`n` supertiles of type `i` in `P_N(j)`.
///
/// Computed as the product of single-step matrices `M_{n,n+1} ··· M_{N-1,N}`.
pub fn transition_matrix(rule: &FusionRule, n: usize, big_n: usize) -> Result<IntMatrix> {
    if n >= big_n {
        return Err(FusionError::InvalidArgument(format!(
            "transition matrix needs n < N, got {n} and {big_n}"
        )));
    }
    let mut m = rule.step_matrix(n + 1)?;
    for k in n + 2..=big_n {
        m = &m * &rule.step_matrix(k)?;
    }
    Ok(m)
}

/// Every `M_{n,N}` for a fixed `n` and `N = n+1..=top`, sharing the products.
pub fn transition_matrices_from(rule: &FusionRule, n: usize, top: usize) -> Result<Vec<IntMatrix>> {
    let mut out: Vec<IntMatrix> = Vec::new();
    for k in n + 1..=top {
        let step = rule.step_matrix(k)?;
        let next = match out.last() {
            Some(prev) => prev * &step,
            None => step,
        };
        out.push(next);
    }
    Ok(out)
}
