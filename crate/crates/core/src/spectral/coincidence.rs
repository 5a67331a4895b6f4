use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::engine::primitivity;
use crate::engine::PrimitivityVerdict;
use crate::error::{FusionError, Result};
use crate::rule::{Composition, FusionRule, Run};

/// Slot counts of a constant-length rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantLengthProfile {
    pub is_constant_length: bool,
    /// `L_n` for `n = 1..=horizon`, the common number of children; only
    /// filled while the rule stays constant length.
    pub lengths: Vec<BigUint>,
    /// First level at which sizes or child counts differ.
    pub first_failure: Option<usize>,
}

impl ConstantLengthProfile {
    /// The solenoid `(L_1, L_2, …)` as text.
    pub fn solenoid(&self) -> String {
        let parts: Vec<String> = self.lengths.iter().map(ToString::to_string).collect();
        format!("({})", parts.join(", "))
    }
}

/// Whether all same-level supertiles share one volume and one child count,
/// level by level up to `horizon` (prototiles included).
pub fn constant_length_profile(rule: &FusionRule, horizon: usize) -> Result<ConstantLengthProfile> {
    let mut profile = ConstantLengthProfile {
        is_constant_length: true,
        lengths: Vec::new(),
        first_failure: None,
    };
    let fail = |mut p: ConstantLengthProfile, n| {
        p.is_constant_length = false;
        p.first_failure = Some(n);
        Ok(p)
    };
    if !all_equal(&rule.volumes(0)?) {
        return fail(profile, 0);
    }
    for n in 1..=horizon {
        if !all_equal(&rule.volumes(n)?) {
            return fail(profile, n);
        }
        let counts: Vec<BigUint> = rule
            .level(n)?
            .defs
            .iter()
            .map(|d| d.composition.child_count())
            .collect();
        if !all_equal(&counts) {
            return fail(profile, n);
        }
        profile
            .lengths
            .push(counts.into_iter().next().unwrap_or_default());
    }
    Ok(profile)
}

fn all_equal<T: PartialEq>(xs: &[T]) -> bool {
    xs.windows(2).all(|w| w[0] == w[1])
}

fn require_constant_length(rule: &FusionRule, horizon: usize) -> Result<()> {
    if rule.dimension() != 1 {
        return Err(FusionError::WrongDimension { expected: 1 });
    }
    let p = constant_length_profile(rule, horizon)?;
    match p.first_failure {
        Some(level) => Err(FusionError::NotConstantLength { level }),
        None => Ok(()),
    }
}

fn runs(c: &Composition) -> &[Run] {
    match c {
        Composition::Line(r) => r,
        Composition::Plane(_) => &[],
    }
}

/// Walks two run-length encoded words of equal length side by side, calling
/// `f(left, right, count)` for each maximal aligned stretch.
fn aligned(a: &[Run], b: &[Run], mut f: impl FnMut(usize, usize, &BigUint)) {
    let (mut i, mut j) = (0, 0);
    let (mut left_a, mut left_b) = (BigUint::zero(), BigUint::zero());
    loop {
        while left_a.is_zero() && i < a.len() {
            left_a = a[i].count.clone();
            i += 1;
        }
        while left_b.is_zero() && j < b.len() {
            left_b = b[j].count.clone();
            j += 1;
        }
        if left_a.is_zero() || left_b.is_zero() {
            return;
        }
        let step = left_a.clone().min(left_b.clone());
        f(a[i - 1].child, b[j - 1].child, &step);
        left_a -= &step;
        left_b -= &step;
    }
}

/// Pairwise table at level `n`, `combine` reading the aligned stretches of
/// children of each pair of supertiles.
fn lift<T>(
    rule: &FusionRule,
    n: usize,
    combine: impl Fn(&[(usize, usize, BigUint)]) -> T,
) -> Result<Vec<Vec<T>>> {
    let lvl = rule.level(n)?;
    let k = lvl.len();
    let mut table = Vec::with_capacity(k);
    for a in &lvl.defs {
        let mut row = Vec::with_capacity(k);
        for b in &lvl.defs {
            let mut stretches = Vec::new();
            aligned(runs(&a.composition), runs(&b.composition), |x, y, c| {
                stretches.push((x, y, c.clone()))
            });
            row.push(combine(&stretches));
        }
        table.push(row);
    }
    Ok(table)
}

/// Fraction of tile slots at which `P_n(i)` and `P_n(j)` carry the same
/// tile, minimized over pairs `i ≠ j` (`1` for a single type). Computed
/// level by level from aligned children, without expanding.
pub fn agreement_fraction(rule: &FusionRule, n: usize) -> Result<BigRational> {
    require_constant_length(rule, n)?;
    let k0 = rule.type_count(0)?;
    let mut table: Vec<Vec<BigRational>> = (0..k0)
        .map(|i| {
            (0..k0)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for m in 1..=n {
        let prev = table.clone();
        table = lift(rule, m, |stretches| {
            let total: BigUint = stretches.iter().map(|s| &s.2).sum();
            let agree: BigRational = stretches
                .iter()
                .map(|(x, y, c)| &prev[*x][*y] * BigRational::from_integer(BigInt::from(c.clone())))
                .sum();
            agree / BigRational::from_integer(BigInt::from(total))
        })?;
    }
    Ok(min_off_diagonal(&table).unwrap_or_else(BigRational::one))
}

fn min_off_diagonal<T: Ord + Clone>(table: &[Vec<T>]) -> Option<T> {
    table
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(move |(j, _)| *j != i)
                .map(|(_, v)| v.clone())
        })
        .min()
}

/// Least `N` in `n+1..=max_n` such that any two `N`-supertiles carry the
/// same `n`-supertile in some aligned slot.
pub fn coincidence_test(rule: &FusionRule, n: usize, max_n: usize) -> Result<Option<usize>> {
    require_constant_length(rule, max_n)?;
    let k = rule.type_count(n)?;
    let mut table: Vec<Vec<bool>> = (0..k).map(|i| (0..k).map(|j| i == j).collect()).collect();
    for big_n in n + 1..=max_n {
        let prev = table.clone();
        table = lift(rule, big_n, |stretches| {
            stretches.iter().any(|(x, y, _)| prev[*x][*y])
        })?;
        if table.iter().all(|row| row.iter().all(|&b| b)) {
            return Ok(Some(big_n));
        }
    }
    Ok(None)
}

/// A waiting time `k` such that `N = n + k` works for every sampled `n`,
/// the largest one needed; `None` if some `n` finds no coincidence within
/// `max_k` levels.
pub fn finite_waiting(
    rule: &FusionRule,
    levels: impl IntoIterator<Item = usize>,
    max_k: usize,
) -> Result<Option<usize>> {
    let mut k = 0;
    for n in levels {
        match coincidence_test(rule, n, n + max_k)? {
            Some(big_n) => k = k.max(big_n - n),
            None => return Ok(None),
        }
    }
    Ok(Some(k))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PurePointCertificate {
    pub lengths: Vec<BigUint>,
    pub primitivity_witness: usize,
    /// Bound `C` on the entries of every step matrix.
    pub matrix_bound: BigInt,
    /// Number of supertile types `J`.
    pub types: usize,
    pub waiting: usize,
    /// Blocks of `waiting` levels below the horizon.
    pub blocks: usize,
    /// `1 − ((C^k J^k − 1) / (C^k J^k))^m`.
    pub agreement_bound: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PurePointVerdict {
    PurePoint(PurePointCertificate),
    NotApplicable {
        reason: String,
        agreement: Vec<BigRational>,
    },
    Inconclusive {
        reason: String,
    },
}

/// Checks the hypotheses of the constant-length pure-point theorem up to
/// `horizon`: constant length, constant type count, primitivity, bounded
/// matrices, and coincidence with a finite waiting time.
pub fn pure_point_verdict(rule: &FusionRule, horizon: usize) -> Result<PurePointVerdict> {
    let not_applicable =
        |reason: String, agreement| Ok(PurePointVerdict::NotApplicable { reason, agreement });
    if rule.dimension() != 1 {
        return not_applicable(
            "constant-length analysis needs a 1-dimensional rule".into(),
            Vec::new(),
        );
    }
    if horizon < 2 {
        return Err(FusionError::HorizonTooSmall { level: horizon });
    }
    let profile = constant_length_profile(rule, horizon)?;
    if let Some(level) = profile.first_failure {
        return not_applicable(format!("not constant length (level {level})"), Vec::new());
    }
    let types = rule.type_count(0)?;
    for n in 1..=horizon {
        if rule.type_count(n)? != types {
            return not_applicable(
                format!("not prototile-regular (level {n} has a different type count)"),
                Vec::new(),
            );
        }
    }
    let agreement: Vec<BigRational> = (1..=horizon)
        .map(|n| agreement_fraction(rule, n))
        .collect::<Result<_>>()?;

    let report = primitivity(rule, horizon)?;
    let witness = match &report.levels[0].verdict {
        PrimitivityVerdict::Primitive { witness } => *witness,
        PrimitivityVerdict::NotPrimitive(_) => {
            return not_applicable("not primitive".into(), agreement)
        }
        PrimitivityVerdict::Inconclusive { reason } => {
            return Ok(PurePointVerdict::Inconclusive {
                reason: reason.clone(),
            })
        }
    };

    let maxima: Vec<BigInt> = (1..=horizon)
        .map(|n| Ok(rule.step_matrix(n)?.max_entry()))
        .collect::<Result<_>>()?;
    let half = horizon.div_ceil(2);
    let bound = maxima[..half].iter().max().cloned().unwrap_or_default();
    if maxima[half..].iter().any(|m| *m > bound) {
        return not_applicable(
            format!(
                "unbounded matrices (largest step entry grows to {})",
                maxima.last().unwrap()
            ),
            agreement,
        );
    }

    let max_k = horizon / 2;
    let Some(waiting) = finite_waiting(rule, 0..=horizon - max_k, max_k)? else {
        return Ok(PurePointVerdict::Inconclusive {
            reason: format!("no coincidence within {max_k} levels for some sampled level"),
        });
    };
    let waiting = waiting.max(1);
    let blocks = horizon / waiting;
    let ck = Pow::pow(&bound * BigInt::from(types), waiting as u32);
    let keep = BigRational::new(&ck - 1, ck);
    let agreement_bound = BigRational::one() - Pow::pow(keep, blocks as u32);
    Ok(PurePointVerdict::PurePoint(PurePointCertificate {
        lengths: profile.lengths,
        primitivity_witness: witness,
        matrix_bound: bound,
        types,
        waiting,
        blocks,
        agreement_bound,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(child: usize, count: u32) -> Run {
        Run {
            child,
            count: BigUint::from(count),
        }
    }

    #[test]
    fn aligned_stretches() {
        let mut out = Vec::new();
        aligned(
            &[run(0, 3), run(1, 2)],
            &[run(1, 1), run(0, 4)],
            |a, b, c| out.push((a, b, c.clone())),
        );
        let want: Vec<(usize, usize, BigUint)> = vec![
            (0, 1, 1u32.into()),
            (0, 0, 2u32.into()),
            (1, 0, 2u32.into()),
        ];
        assert_eq!(out, want);
    }
}
