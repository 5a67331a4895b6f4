//! Return vectors, the `η_n(α)` eigenvalue criterion, and constant-length
//! structure: solenoid profiles, coincidences and the pure-point verdict.

mod coincidence;

pub use coincidence::{
    agreement_fraction, coincidence_test, constant_length_profile, finite_waiting,
    pure_point_verdict, ConstantLengthProfile, PurePointCertificate, PurePointVerdict,
};

use std::collections::{BTreeSet, HashSet};
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::engine::{expand, piece_count, transition_matrix, Coord};
use crate::error::{FusionError, Result};
use crate::rule::FusionRule;
use crate::scalar::Scalar;

/// Largest induction step tried when the rule is not strongly primitive.
pub const MAX_INDUCTION: usize = 6;

/// Largest number of pieces whose pairwise differences are harvested.
pub const HARVEST_LIMIT: u64 = 20_000;

/// Relative positions of same-type `n`-supertiles inside the supertiles
/// `s` and `2s` levels up, measured corner to corner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReturnVectorSet {
    pub level: usize,
    /// `1` when the rule is strongly primitive at `n`; otherwise the step of
    /// the induced level sequence `n, n+s, n+2s`.
    pub induction_step: usize,
    pub harvest_level: usize,
    pub vectors: BTreeSet<Vec<Scalar>>,
}

impl ReturnVectorSet {
    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.vectors.contains(v)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Smallest `s` for which `M_{n,n+s}` and `M_{n+s,n+2s}` are both positive.
fn induction_step(rule: &FusionRule, n: usize) -> Result<usize> {
    for s in 1..=MAX_INDUCTION {
        match (
            transition_matrix(rule, n, n + s),
            transition_matrix(rule, n + s, n + 2 * s),
        ) {
            (Ok(a), Ok(b)) if a.is_positive() && b.is_positive() => return Ok(s),
            (Err(FusionError::LevelNotDefined { .. }), _)
            | (_, Err(FusionError::LevelNotDefined { .. })) => break,
            (Err(e), _) | (_, Err(e)) => return Err(e),
            _ => {}
        }
    }
    Err(FusionError::NotStronglyPrimitive {
        horizon: n + 2 * MAX_INDUCTION,
    })
}

/// The return vectors `𝒱ⁿ`, harvested from every supertile at the level two
/// (induced) steps above `n`.
pub fn return_vectors(rule: &FusionRule, n: usize) -> Result<ReturnVectorSet> {
    let s = induction_step(rule, n)?;
    let top = n + 2 * s;
    let types = rule.type_count(top)?;
    let mut total = BigInt::zero();
    for j in 0..types {
        total += piece_count(rule, top, j, n)?;
    }
    if total > BigInt::from(HARVEST_LIMIT) {
        return Err(FusionError::ExpansionTooLarge {
            count: total,
            cap: HARVEST_LIMIT,
        });
    }
    let dim = rule.dimension();
    let mut diffs: HashSet<(Coord, Coord)> = HashSet::new();
    let mut den = None;
    for j in 0..types {
        let patch = expand(rule, top, j, n)?;
        den = Some(patch.den.clone());
        let mut by_type: Vec<Vec<(Coord, Coord)>> = vec![Vec::new(); patch.extents.len()];
        for p in patch.placements() {
            by_type[p.piece].push((p.x, p.y));
        }
        for group in &by_type {
            for a in group {
                for b in group {
                    if a == b {
                        continue;
                    }
                    let d = (b.0.checked_sub(a.0), b.1.checked_sub(a.1));
                    let (Some(dx), Some(dy)) = d else {
                        return Err(FusionError::CoordinateOverflow { level: top });
                    };
                    diffs.insert((dx, dy));
                }
            }
        }
    }
    let den = den.unwrap_or_else(|| rule.coordinate_denominator());
    let vectors = diffs
        .into_iter()
        .map(|(x, y)| {
            let mut v = vec![x.to_scalar(&den)];
            if dim == 2 {
                v.push(y.to_scalar(&den));
            }
            v
        })
        .collect();
    Ok(ReturnVectorSet {
        level: n,
        induction_step: s,
        harvest_level: top,
        vectors,
    })
}

/// `η_n(α)` together with the return vector attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaValue {
    pub level: usize,
    pub value: f64,
    /// `α·v mod 1` for the maximizing `v`, exact.
    pub theta: Scalar,
    pub witness: Option<Vec<Scalar>>,
}

fn dot(alpha: &[Scalar], v: &[Scalar]) -> Scalar {
    alpha.iter().zip(v).map(|(a, x)| a * x).sum()
}

/// `|exp(2πiθ) − 1| = 2|sin(πθ)|`, evaluated after exact reduction mod 1.
pub fn unit_distance(theta: &Scalar) -> (Scalar, f64) {
    let reduced = theta.fract();
    let value = 2.0 * (PI * reduced.to_f64()).sin().abs();
    (reduced, value)
}

/// Maximum of `|exp(2πi α·v) − 1|` over `v ∈ 𝒱ⁿ`.
pub fn eta(rule: &FusionRule, n: usize, alpha: &[Scalar]) -> Result<EtaValue> {
    if alpha.len() != rule.dimension() {
        return Err(FusionError::InvalidArgument(format!(
            "α has {} components for a {}-dimensional rule",
            alpha.len(),
            rule.dimension()
        )));
    }
    Ok(eta_over(&return_vectors(rule, n)?, alpha))
}

fn eta_over(set: &ReturnVectorSet, alpha: &[Scalar]) -> EtaValue {
    let mut best = EtaValue {
        level: set.level,
        value: 0.0,
        theta: Scalar::zero(),
        witness: None,
    };
    for v in &set.vectors {
        let (theta, value) = unit_distance(&dot(alpha, v));
        if best.witness.is_none() || value > best.value {
            best = EtaValue {
                level: set.level,
                value,
                theta,
                witness: Some(v.clone()),
            };
        }
    }
    best
}

/// Thresholds for [`eigenvalue_test`].
#[derive(Clone, Debug, PartialEq)]
pub struct EigenTolerances {
    /// Levels ignored before the floor test.
    pub burn_in: usize,
    pub floor: f64,
    pub floor_levels: usize,
    /// Largest fitted geometric ratio accepted as decay.
    pub pass_ratio: f64,
    pub pass_levels: usize,
}

impl Default for EigenTolerances {
    fn default() -> Self {
        EigenTolerances {
            burn_in: 2,
            floor: 1e-3,
            floor_levels: 3,
            pass_ratio: 0.95,
            pass_levels: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenvalueVerdict {
    pub status: SpectralStatus,
    pub etas: Vec<EtaValue>,
    /// Fitted geometric ratio over the last `pass_levels` levels.
    pub ratio: Option<f64>,
    /// Smallest η over the last `floor_levels` levels past the burn-in.
    pub floor: Option<f64>,
    /// Why the η sequence stops short of the horizon, if it does.
    pub truncated: Option<String>,
    pub tolerances: EigenTolerances,
}

/// Checks whether `Σ η_n(α)` converges, from `η_0 … η_horizon`.
///
/// Passes when the tail decays geometrically, fails when it stays above a
/// positive floor, and is inconclusive otherwise. Levels whose harvest is
/// too large end the sequence early.
pub fn eigenvalue_test(
    rule: &FusionRule,
    alpha: &[Scalar],
    horizon: usize,
    tol: &EigenTolerances,
) -> Result<EigenvalueVerdict> {
    let mut etas = Vec::new();
    let mut truncated = None;
    for n in 0..=horizon {
        match eta(rule, n, alpha) {
            Ok(e) => etas.push(e),
            Err(
                e @ (FusionError::ExpansionTooLarge { .. } | FusionError::LevelNotDefined { .. }),
            ) if n > 0 => {
                truncated = Some(format!("stopped at level {n}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let values: Vec<f64> = etas.iter().map(|e| e.value).collect();
    let ratio = geometric_ratio(&values, tol.pass_levels);
    let post: Vec<f64> = values.iter().skip(tol.burn_in).copied().collect();
    let floor = (post.len() >= tol.floor_levels).then(|| {
        post[post.len() - tol.floor_levels..]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    });

    let status = if ratio.is_some_and(|r| r <= tol.pass_ratio) {
        SpectralStatus::Pass
    } else if floor.is_some_and(|f| f >= tol.floor) {
        SpectralStatus::Fail
    } else {
        SpectralStatus::Inconclusive
    };
    Ok(EigenvalueVerdict {
        status,
        etas,
        ratio,
        floor,
        truncated,
        tolerances: tol.clone(),
    })
}

/// Geometric ratio fitted to the last `k` values: `0` when they end in
/// exact zeros, `None` when a zero is followed by a nonzero value.
fn geometric_ratio(values: &[f64], k: usize) -> Option<f64> {
    if values.len() < k || k < 2 {
        return None;
    }
    let tail = &values[values.len() - k..];
    if let Some(first_zero) = tail.iter().position(|v| *v == 0.0) {
        return tail[first_zero..].iter().all(|v| *v == 0.0).then_some(0.0);
    }
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .map(|(i, v)| (i as f64, v.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some((sxy / sxx).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_fit() {
        let r = geometric_ratio(&[1.0, 0.5, 0.25, 0.125], 4).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        assert_eq!(geometric_ratio(&[1.0, 1.0, 0.0, 0.0], 4), Some(0.0));
        assert_eq!(geometric_ratio(&[0.0, 1.0, 0.0, 0.0], 4), None);
        assert_eq!(geometric_ratio(&[1.0], 4), None);
    }

    #[test]
    fn unit_distance_reduces_first() {
        let (r, v) = unit_distance(&Scalar::ratio(7, 2));
        assert_eq!(r, Scalar::ratio(1, 2));
        assert!((v - 2.0).abs() < 1e-12);
        let (r, v) = unit_distance(&Scalar::from(-3));
        assert!(r.is_zero() && v == 0.0);
    }
}
