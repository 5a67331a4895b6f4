//! Complexity function, configurational entropy estimates and the
//! zero-entropy bound `log j_n / d_n^d`.

use std::collections::{HashMap, HashSet};

use num_traits::ToPrimitive;

use crate::engine::{expand, PatchPieces};
use crate::error::{FusionError, Result};
use crate::rule::{FusionRule, Shape};
use crate::scalar::Scalar;

/// Counts `#_n` of distinct windows (length `n` in 1-D, `n × n` squares in
/// 2-D) seen inside the expansions of every supertile at `harvest_level`.
///
/// A finite harvest can only show that a window occurs, so every count is a
/// lower bound for the admitted count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityProfile {
    pub dimension: usize,
    pub harvest_level: usize,
    /// `counts[n - 1] = #_n`.
    pub counts: Vec<u64>,
    pub lower_bound: bool,
}

impl ComplexityProfile {
    pub fn get(&self, n: usize) -> Option<u64> {
        n.checked_sub(1).and_then(|i| self.counts.get(i)).copied()
    }
}

pub fn complexity(
    rule: &FusionRule,
    max_n: usize,
    harvest_level: usize,
) -> Result<ComplexityProfile> {
    if !rule.has_unit_geometry() {
        return Err(FusionError::NotUnitGeometry);
    }
    let dim = rule.dimension();
    let mut seen: Vec<HashSet<Vec<usize>>> = vec![HashSet::new(); max_n];
    for j in 0..rule.type_count(harvest_level)? {
        let patch = expand(rule, harvest_level, j, 0)?;
        match &patch.pieces {
            PatchPieces::Line(word) => {
                for (n, set) in seen.iter_mut().enumerate() {
                    for w in word.windows(n + 1) {
                        set.insert(w.to_vec());
                    }
                }
            }
            PatchPieces::Plane(pieces) => {
                // unit squares sit on the integer lattice; index them by corner
                let den = patch
                    .den
                    .to_i128()
                    .filter(|d| *d > 0)
                    .ok_or(FusionError::NotUnitGeometry)?;
                let grid: HashMap<(i128, i128), usize> = pieces
                    .iter()
                    .map(|p| ((p.x.rat / den, p.y.rat / den), p.piece))
                    .collect();
                for (n, set) in seen.iter_mut().enumerate() {
                    let side = n as i128 + 1;
                    for &(x0, y0) in grid.keys() {
                        let window: Option<Vec<usize>> = (0..side)
                            .flat_map(|dy| (0..side).map(move |dx| (x0 + dx, y0 + dy)))
                            .map(|c| grid.get(&c).copied())
                            .collect();
                        if let Some(w) = window {
                            set.insert(w);
                        }
                    }
                }
            }
        }
    }
    Ok(ComplexityProfile {
        dimension: dim,
        harvest_level,
        counts: seen.iter().map(|s| s.len() as u64).collect(),
        lower_bound: true,
    })
}

/// `log(#_n) / n^d` for each `n`, with an extrapolated limit.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyEstimate {
    pub values: Vec<f64>,
    /// Fit of `L + b/n + c·log(n)/n` over the sequence, clamped to
    /// `[0, min values]`.
    pub limit: f64,
    pub lower_bound: bool,
}

pub fn entropy_estimate(profile: &ComplexityProfile) -> EntropyEstimate {
    let d = profile.dimension as i32;
    let values: Vec<f64> = profile
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (c.max(1) as f64).ln() / ((i + 1) as f64).powi(d))
        .collect();
    let floor = values.iter().copied().fold(f64::INFINITY, f64::min);
    let limit = if values.len() >= 4 {
        fit_limit(&values)
    } else {
        floor
    };
    let limit = if values.is_empty() {
        0.0
    } else {
        limit.clamp(0.0, floor)
    };
    EntropyEstimate {
        values,
        limit,
        lower_bound: profile.lower_bound,
    }
}

/// Least squares for `v_n ≈ L + b/n + c·log(n)/n`, returning `L`.
fn fit_limit(values: &[f64]) -> f64 {
    let rows: Vec<[f64; 3]> = (1..=values.len())
        .map(|n| {
            let n = n as f64;
            [1.0, 1.0 / n, n.ln() / n]
        })
        .collect();
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for (r, v) in rows.iter().zip(values) {
        for i in 0..3 {
            atb[i] += r[i] * v;
            for j in 0..3 {
                ata[i][j] += r[i] * r[j];
            }
        }
    }
    solve3(ata, atb).map_or(f64::NAN, |x| x[0])
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in 0..3 {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    Some([b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroEntropyVerdict {
    /// The sequence is decreasing towards zero over the horizon.
    ZeroEntropyBoundHolds,
    /// The sufficient condition is not observed; nothing is claimed.
    Silent,
}

/// `log j_n / d_n^d` for `n = 1..=horizon`, with `d_n` the largest
/// supertile length (1-D) or largest `w + h` (2-D, in place of the
/// diagonal so the size stays exact).
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroEntropyReport {
    pub type_counts: Vec<usize>,
    pub diameters: Vec<Scalar>,
    pub values: Vec<f64>,
    pub verdict: ZeroEntropyVerdict,
}

pub fn zero_entropy_bound(rule: &FusionRule, horizon: usize) -> Result<ZeroEntropyReport> {
    let d = rule.dimension() as i32;
    let mut report = ZeroEntropyReport {
        type_counts: Vec::new(),
        diameters: Vec::new(),
        values: Vec::new(),
        verdict: ZeroEntropyVerdict::Silent,
    };
    for n in 1..=horizon {
        let lvl = rule.level(n)?;
        let diameter = lvl
            .shapes
            .iter()
            .map(|s| match s {
                Shape::Interval(l) => l.clone(),
                Shape::Rect { width, height } => width + height,
            })
            .max()
            .ok_or(FusionError::HorizonTooSmall { level: n })?;
        let value = (lvl.len() as f64).ln() / diameter.to_f64().powi(d);
        report.type_counts.push(lvl.len());
        report.diameters.push(diameter);
        report.values.push(value);
    }
    report.verdict = trend(&report.values);
    Ok(report)
}

/// Holds when the last three values strictly decrease and the last is at
/// most half the largest.
fn trend(values: &[f64]) -> ZeroEntropyVerdict {
    let k = values.len();
    if k < 3 {
        return ZeroEntropyVerdict::Silent;
    }
    let peak = values.iter().copied().fold(0.0, f64::max);
    let decreasing = values[k - 3..].windows(2).all(|w| w[1] < w[0]);
    if decreasing && values[k - 1] <= peak / 2.0 {
        ZeroEntropyVerdict::ZeroEntropyBoundHolds
    } else {
        ZeroEntropyVerdict::Silent
    }
}
