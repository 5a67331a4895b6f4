//! Primitivity, van Hove ratios, adjacency complexity and the rank bound.

use std::collections::{BTreeSet, HashMap};

use crate::error::{FusionError, Result};
use crate::matrix::IntMatrix;
use crate::rule::{FusionRule, Shape};
use crate::scalar::Scalar;

use super::patch::{expand, Coord, PlacedPiece};
use super::transition_matrices_from;

/// Zero pattern that no product of the observed steps can fill.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableZeroCertificate {
    /// Union of the supports of the steps `M_{k-1,k}` observed, `k = n+1..=horizon`.
    pub support: Vec<Vec<bool>>,
    /// Support of every product of such matrices (transitive closure).
    pub closure: Vec<Vec<bool>>,
    /// An entry that is zero in the closure: type `row` never occurs in type `col`.
    pub zero: (usize, usize),
}

impl StableZeroCertificate {
    /// Re-checks that `closure` is closed under multiplication by `support`,
    /// contains it, and has the claimed zero.
    pub fn verify(&self) -> bool {
        let n = self.support.len();
        let prod = bool_mul(&self.closure, &self.support);
        (0..n).all(|i| {
            (0..n).all(|j| {
                (!self.support[i][j] || self.closure[i][j]) && (!prod[i][j] || self.closure[i][j])
            })
        }) && !self.closure[self.zero.0][self.zero.1]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimitivityVerdict {
    /// `M_{n,witness}` is entrywise positive (checked exactly).
    Primitive {
        witness: usize,
    },
    NotPrimitive(StableZeroCertificate),
    Inconclusive {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelPrimitivity {
    pub n: usize,
    pub verdict: PrimitivityVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitivityReport {
    pub horizon: usize,
    pub levels: Vec<LevelPrimitivity>,
}

impl PrimitivityReport {
    pub fn is_primitive(&self) -> bool {
        self.levels
            .iter()
            .all(|l| matches!(l.verdict, PrimitivityVerdict::Primitive { .. }))
    }

    /// The first stable-zero certificate, if any level has one.
    pub fn certificate(&self) -> Option<(usize, &StableZeroCertificate)> {
        self.levels.iter().find_map(|l| match &l.verdict {
            PrimitivityVerdict::NotPrimitive(c) => Some((l.n, c)),
            _ => None,
        })
    }
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..b.len()).any(|k| a[i][k] && b[k][j]))
                .collect()
        })
        .collect()
}

/// For each `n < horizon`, the least `N ≤ horizon` with `M_{n,N} > 0`, or a
/// certificate that no `N` works, or an inconclusive verdict.
///
/// A certificate is only issued when every observed step is square of the
/// same size and the union of their zero patterns is closed under products.
pub fn primitivity(rule: &FusionRule, horizon: usize) -> Result<PrimitivityReport> {
    let mut levels = Vec::new();
    let steps: Vec<IntMatrix> = (1..=horizon)
        .map(|k| rule.step_matrix(k))
        .collect::<Result<_>>()?;
    for n in 0..horizon {
        let products = transition_matrices_from(rule, n, horizon)?;
        let verdict = match products.iter().position(IntMatrix::is_positive) {
            Some(p) => PrimitivityVerdict::Primitive { witness: n + 1 + p },
            None => stable_zero(&steps[n..]).map_or_else(
                || PrimitivityVerdict::Inconclusive {
                    reason: format!(
                        "no positive M({n},N) for N <= {horizon} and no stable zero pattern"
                    ),
                },
                PrimitivityVerdict::NotPrimitive,
            ),
        };
        levels.push(LevelPrimitivity { n, verdict });
    }
    Ok(PrimitivityReport { horizon, levels })
}

fn stable_zero(steps: &[IntMatrix]) -> Option<StableZeroCertificate> {
    let size = steps.first()?.rows();
    if steps.iter().any(|m| m.rows() != size || m.cols() != size) {
        return None;
    }
    let mut support = vec![vec![false; size]; size];
    for m in steps {
        for (i, row) in m.support().into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                support[i][j] |= v;
            }
        }
    }
    let mut closure = support.clone();
    loop {
        let next = bool_mul(&closure, &support);
        let mut changed = false;
        for i in 0..size {
            for j in 0..size {
                if next[i][j] && !closure[i][j] {
                    closure[i][j] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let zero = (0..size)
        .flat_map(|i| (0..size).map(move |j| (i, j)))
        .find(|&(i, j)| !closure[i][j])?;
    Some(StableZeroCertificate {
        support,
        closure,
        zero,
    })
}

/// Whether each step `M_{n-1,n}`, `n = 1..=horizon`, is entrywise positive.
pub fn strong_primitivity(rule: &FusionRule, horizon: usize) -> Result<Vec<bool>> {
    (1..=horizon)
        .map(|n| Ok(rule.step_matrix(n)?.is_positive()))
        .collect()
}

/// Per-supertile ratio `Vol((∂A)^{+r}) / Vol(A)` at level `n`.
///
/// In 1-D the thickened boundary of an interval of length `L` has volume
/// `2r`. In 2-D the thickened boundary of a `w × h` rectangle is bounded
/// above by `2r(w+h) + 4r²`, which keeps everything exact.
pub fn van_hove_diagnostic(rule: &FusionRule, n: usize, r: &Scalar) -> Result<Vec<Scalar>> {
    if r.is_negative() {
        return Err(FusionError::InvalidArgument(
            "negative thickening radius".into(),
        ));
    }
    let two = Scalar::from_int(2);
    let lvl = rule.level(n)?;
    Ok(lvl
        .shapes
        .iter()
        .map(|s| match s {
            Shape::Interval(len) => &(&two * r) / len,
            Shape::Rect { width, height } => {
                let boundary =
                    &(&(&two * r) * &(width + height)) + &(&Scalar::from_int(4) * &(r * r));
                &boundary / &(width * height)
            }
        })
        .collect())
}

/// A translation class of two edge-adjacent level-`n` supertiles: `second`
/// lies to the right of `first` (horizontal) or on top of it (vertical),
/// shifted along the shared edge by `offset` (lower-left corners).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AdjacencyClass {
    pub first: usize,
    pub second: usize,
    pub horizontal: bool,
    pub offset: Scalar,
}

/// Adjacency classes of level-`n` supertiles harvested from the expansions
/// of every level-`(n + depth)` supertile.
pub fn adjacency_classes(
    rule: &FusionRule,
    n: usize,
    depth: usize,
) -> Result<BTreeSet<AdjacencyClass>> {
    if rule.dimension() != 2 {
        return Err(FusionError::WrongDimension { expected: 2 });
    }
    let top = n + depth;
    let count = match rule.type_count(top) {
        Ok(c) => c,
        Err(FusionError::LevelNotDefined { .. }) => {
            return Err(FusionError::HorizonTooSmall { level: top })
        }
        Err(e) => return Err(e),
    };
    let mut raw: BTreeSet<(usize, usize, bool, Coord)> = BTreeSet::new();
    let mut den = None;
    for j in 0..count {
        let patch = expand(rule, top, j, n)?;
        den.get_or_insert_with(|| patch.den.clone());
        collect_adjacencies(&patch.placements(), &patch.extents, &mut raw);
    }
    let den = den.unwrap_or_else(|| rule.coordinate_denominator());
    Ok(raw
        .into_iter()
        .map(|(first, second, horizontal, off)| AdjacencyClass {
            first,
            second,
            horizontal,
            offset: off.to_scalar(&den),
        })
        .collect())
}

fn collect_adjacencies(
    pieces: &[PlacedPiece],
    extents: &[(Coord, Coord)],
    out: &mut BTreeSet<(usize, usize, bool, Coord)>,
) {
    let mut by_left: HashMap<Coord, Vec<usize>> = HashMap::new();
    let mut by_bottom: HashMap<Coord, Vec<usize>> = HashMap::new();
    for (i, p) in pieces.iter().enumerate() {
        by_left.entry(p.x).or_default().push(i);
        by_bottom.entry(p.y).or_default().push(i);
    }
    for a in pieces {
        let (w, h) = extents[a.piece];
        if let Some(cands) = by_left.get(&(a.x + w)) {
            for &bi in cands {
                let b = &pieces[bi];
                if b.y < a.y + h && a.y < b.y + extents[b.piece].1 {
                    out.insert((a.piece, b.piece, true, b.y - a.y));
                }
            }
        }
        if let Some(cands) = by_bottom.get(&(a.y + h)) {
            for &bi in cands {
                let b = &pieces[bi];
                if b.x < a.x + w && a.x < b.x + extents[b.piece].0 {
                    out.insert((a.piece, b.piece, false, b.x - a.x));
                }
            }
        }
    }
}

/// Depth of the harvest used by [`adjacency_complexity`].
pub const ADJACENCY_DEPTH: usize = 2;

/// Number of adjacency classes of level-`n` supertiles found inside
/// level-`(n+2)` supertiles.
pub fn adjacency_complexity(rule: &FusionRule, n: usize) -> Result<usize> {
    adjacency_complexity_at_depth(rule, n, ADJACENCY_DEPTH)
}

pub fn adjacency_complexity_at_depth(rule: &FusionRule, n: usize, depth: usize) -> Result<usize> {
    Ok(adjacency_classes(rule, n, depth)?.len())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankBound {
    /// `j_n` for `n = 1..=horizon`.
    pub type_counts: Vec<usize>,
    pub min: usize,
    /// First level attaining the minimum.
    pub argmin: usize,
}

/// Smallest number of supertile types over levels `1..=horizon`; bounds the
/// rank of the tiling system from above.
pub fn rank_bound(rule: &FusionRule, horizon: usize) -> Result<RankBound> {
    let top = rule.max_level().map_or(horizon, |m| m.min(horizon)).max(1);
    let type_counts: Vec<usize> = (1..=top)
        .map(|n| rule.type_count(n))
        .collect::<Result<_>>()?;
    let (idx, &min) = type_counts
        .iter()
        .enumerate()
        .min_by_key(|&(i, c)| (*c, i))
        .expect("at least one level");
    Ok(RankBound {
        type_counts,
        min,
        argmin: idx + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ruledsl::catalog;

    fn cat(name: &str) -> FusionRule {
        catalog(name, &Default::default()).unwrap()
    }

    #[test]
    fn chacon_is_certified_not_primitive() {
        let report = primitivity(&cat("chacon"), 4).unwrap();
        let (_, cert) = report.certificate().unwrap();
        assert_eq!(cert.zero, (0, 1));
        assert!(cert.verify());
        assert!(!report.is_primitive());
    }

    #[test]
    fn fibonacci_witness_two_steps() {
        let report = primitivity(&cat("fibonacci_1d"), 6).unwrap();
        for l in &report.levels[..4] {
            assert_eq!(
                l.verdict,
                PrimitivityVerdict::Primitive { witness: l.n + 2 }
            );
        }
        assert_eq!(
            strong_primitivity(&cat("two_measures"), 5).unwrap(),
            vec![true; 5]
        );
        assert_eq!(
            strong_primitivity(&cat("fibonacci_1d"), 2).unwrap(),
            vec![false; 2]
        );
    }

    #[test]
    fn van_hove_one_dimensional() {
        let rule = cat("fibonacci_1d");
        let r = Scalar::ratio(1, 2);
        assert_eq!(
            van_hove_diagnostic(&rule, 3, &r).unwrap(),
            vec![Scalar::ratio(1, 5), Scalar::ratio(1, 3)]
        );
        assert!(van_hove_diagnostic(&rule, 3, &Scalar::from_int(0))
            .unwrap()
            .iter()
            .all(|v| *v == Scalar::from_int(0)));
    }

    #[test]
    fn periodic_squares_have_two_classes() {
        assert_eq!(
            adjacency_complexity(&cat("periodic_squares"), 1).unwrap(),
            2
        );
    }

    #[test]
    fn rank_bounds() {
        assert_eq!(rank_bound(&cat("two_measures"), 5).unwrap().min, 2);
        assert_eq!(rank_bound(&cat("fibonacci_dpv"), 5).unwrap().min, 4);
        assert_eq!(rank_bound(&cat("periodic"), 5).unwrap().min, 1);
    }
}
