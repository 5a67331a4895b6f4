use std::collections::HashSet;

use num_traits::Zero;

use super::FrequencyVector;
use crate::engine::{count_patch, expand, patch_occurrences, ConcretePatch, Coord};
use crate::error::{FusionError, Result};
use crate::rule::FusionRule;
use crate::scalar::Scalar;

/// Partial sums `S_n = Σ_i #(P in P_n(i)) ρ_n(i)` over a range of levels.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchFrequency {
    pub levels: Vec<usize>,
    pub partial_sums: Vec<Scalar>,
    /// `|S_n − S_{n-1}|`, starting at the second level.
    pub gaps: Vec<f64>,
}

impl PatchFrequency {
    pub fn last(&self) -> Option<&Scalar> {
        self.partial_sums.last()
    }

    /// Last partial sum plus the geometric tail suggested by the last two
    /// gaps; the last partial sum itself when the gaps do not shrink.
    pub fn estimate(&self) -> f64 {
        let Some(last) = self.partial_sums.last().map(Scalar::to_f64) else {
            return 0.0;
        };
        let k = self.partial_sums.len();
        if k < 3 {
            return last;
        }
        let s: Vec<f64> = self.partial_sums[k - 3..]
            .iter()
            .map(Scalar::to_f64)
            .collect();
        let (d1, d2) = (s[1] - s[0], s[2] - s[1]);
        if d1 == 0.0 || (d2 / d1).abs() >= 1.0 {
            return last;
        }
        let r = d2 / d1;
        last + d2 * r / (1.0 - r)
    }
}

fn rho_at(rho: &[FrequencyVector], n: usize) -> Result<&FrequencyVector> {
    rho.iter().find(|r| r.level == n).ok_or_else(|| {
        FusionError::InvalidArgument(format!("no frequency vector supplied for level {n}"))
    })
}

fn gaps(sums: &[Scalar]) -> Vec<f64> {
    sums.windows(2)
        .map(|w| (&w[1] - &w[0]).abs().to_f64())
        .collect()
}

/// Partial sums of `freq(P) = lim_n Σ_i #(P in P_n(i)) ρ_n(i)` for the
/// levels in `levels`. The patch is counted in expansions of each `P_n(i)`
/// down to the patch's own level.
pub fn patch_frequency(
    rule: &FusionRule,
    rho: &[FrequencyVector],
    patch: &ConcretePatch,
    levels: impl IntoIterator<Item = usize>,
) -> Result<PatchFrequency> {
    let mut out = PatchFrequency {
        levels: Vec::new(),
        partial_sums: Vec::new(),
        gaps: Vec::new(),
    };
    for n in levels {
        let r = rho_at(rho, n)?;
        let mut sum = Scalar::zero();
        for (i, weight) in r.entries.iter().enumerate() {
            if weight.is_zero() {
                continue;
            }
            let count = count_patch(&expand(rule, n, i, patch.level)?, patch);
            sum += &(&Scalar::from(count as i64) * weight);
        }
        out.levels.push(n);
        out.partial_sums.push(sum);
    }
    out.gaps = gaps(&out.partial_sums);
    Ok(out)
}

/// Frequencies of `P ∪ (P + v)` next to those of `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairFrequency {
    pub single: PatchFrequency,
    pub pair: PatchFrequency,
    /// `pair / single²` at each level; `0` where `P` was not seen.
    pub ratios: Vec<f64>,
}

/// Counts translates `t` with both `P + t` and `P + v + t` inside each
/// `P_n(i)`, weighted by `ρ_n(i)`.
pub fn pair_frequency(
    rule: &FusionRule,
    rho: &[FrequencyVector],
    patch: &ConcretePatch,
    v: &[Scalar],
    levels: impl IntoIterator<Item = usize>,
) -> Result<PairFrequency> {
    if v.len() != rule.dimension() {
        return Err(FusionError::InvalidArgument(format!(
            "shift has {} components for a {}-dimensional rule",
            v.len(),
            rule.dimension()
        )));
    }
    let lattice = |s: &Scalar| {
        Coord::from_scalar(s, &patch.den).ok_or_else(|| {
            FusionError::InvalidArgument(format!(
                "shift {s} is not on the rule's coordinate lattice"
            ))
        })
    };
    let shift = (
        lattice(&v[0])?,
        if v.len() > 1 {
            lattice(&v[1])?
        } else {
            Coord::ZERO
        },
    );

    let mut single = PatchFrequency {
        levels: Vec::new(),
        partial_sums: Vec::new(),
        gaps: Vec::new(),
    };
    let mut pair = single.clone();
    for n in levels {
        let r = rho_at(rho, n)?;
        let (mut s1, mut s2) = (Scalar::zero(), Scalar::zero());
        for (i, weight) in r.entries.iter().enumerate() {
            if weight.is_zero() {
                continue;
            }
            let hay = expand(rule, n, i, patch.level)?;
            let occ = patch_occurrences(&hay, patch);
            let set: HashSet<(Coord, Coord)> = occ.iter().copied().collect();
            let doubled = occ
                .iter()
                .filter(
                    |(x, y)| match (x.checked_add(shift.0), y.checked_add(shift.1)) {
                        (Some(a), Some(b)) => set.contains(&(a, b)),
                        _ => false,
                    },
                )
                .count();
            s1 += &(&Scalar::from(occ.len() as i64) * weight);
            s2 += &(&Scalar::from(doubled as i64) * weight);
        }
        for (f, s) in [(&mut single, s1), (&mut pair, s2)] {
            f.levels.push(n);
            f.partial_sums.push(s);
        }
    }
    single.gaps = gaps(&single.partial_sums);
    pair.gaps = gaps(&pair.partial_sums);
    let ratios = single
        .partial_sums
        .iter()
        .zip(&pair.partial_sums)
        .map(|(s, p)| {
            if s.is_zero() {
                0.0
            } else {
                (p / &(s * s)).to_f64()
            }
        })
        .collect();
    Ok(PairFrequency {
        single,
        pair,
        ratios,
    })
}
