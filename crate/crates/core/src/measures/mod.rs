//! Invariant measures: direction matrices and their polytopes, balance
//! scores, unique-ergodicity verdicts, κ-frequencies and patch frequencies.

mod frequency;
mod hull;

pub use frequency::{pair_frequency, patch_frequency, PairFrequency, PatchFrequency};
pub use hull::{ergodic_vertices, VertexReport};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::engine::{transition_matrices_from, transition_matrix};
use crate::error::{FusionError, Result};
use crate::matrix::IntMatrix;
use crate::rule::FusionRule;
use crate::scalar::{ln_rational, Scalar};

/// Volume-normalized columns of `M_{n,N}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionMatrix {
    pub from: usize,
    pub to: usize,
    /// `columns[k][l]` is entry `(l, k)` of `D_{n,N}`.
    pub columns: Vec<Vec<Scalar>>,
}

impl DirectionMatrix {
    /// Largest pairwise L¹ distance between columns, with the pair attaining it.
    pub fn diameter(&self) -> (Scalar, (usize, usize)) {
        let mut best = (Scalar::zero(), (0, 0));
        for a in 0..self.columns.len() {
            for b in a + 1..self.columns.len() {
                let d = l1(&self.columns[a], &self.columns[b]);
                if d > best.0 {
                    best = (d, (a, b));
                }
            }
        }
        best
    }
}

pub(crate) fn l1(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn normalize(
    m: &IntMatrix,
    volumes: &[Scalar],
    from: usize,
    to: usize,
) -> Result<Vec<Vec<Scalar>>> {
    (0..m.cols())
        .map(|k| {
            let col: Vec<Scalar> = m.column(k).into_iter().map(Scalar::from_int).collect();
            let total: Scalar = col.iter().zip(volumes).map(|(c, v)| c * v).sum();
            if total.is_zero() {
                return Err(FusionError::ZeroColumn {
                    from,
                    to,
                    column: k,
                });
            }
            let inv = total.recip();
            Ok(col.iter().map(|c| c * &inv).collect())
        })
        .collect()
}

/// `D_{n,N}(·, k) = M_{n,N}(·, k) / Σ_l M_{n,N}(l, k) Vol(P_n(l))`.
pub fn direction_matrix(rule: &FusionRule, n: usize, big_n: usize) -> Result<DirectionMatrix> {
    let m = transition_matrix(rule, n, big_n)?;
    let volumes = rule.volumes(n)?;
    Ok(DirectionMatrix {
        from: n,
        to: big_n,
        columns: normalize(&m, &volumes, n, big_n)?,
    })
}

/// Diameter (L¹) of `Δ_{n,N}`, the convex hull of the columns of `D_{n,N}`.
pub fn delta_diameter(rule: &FusionRule, n: usize, big_n: usize) -> Result<Scalar> {
    Ok(direction_matrix(rule, n, big_n)?.diameter().0)
}

/// `δ_n = min_k (min_i M_{n-1,n}(i,k) / max_i M_{n-1,n}(i,k))`.
pub fn balance_delta(rule: &FusionRule, n: usize) -> Result<BigRational> {
    if n == 0 {
        return Err(FusionError::InvalidArgument(
            "balance is defined for n >= 1".into(),
        ));
    }
    Ok(matrix_balance(&rule.step_matrix(n)?))
}

pub(crate) fn matrix_balance(m: &IntMatrix) -> BigRational {
    let mut best: Option<BigRational> = None;
    for k in 0..m.cols() {
        let col = m.column(k);
        let lo = col.iter().min().cloned().unwrap_or_default();
        let hi = col.iter().max().cloned().unwrap_or_default();
        let r = if hi.is_zero() {
            BigRational::zero()
        } else {
            BigRational::new(lo, hi)
        };
        best = Some(match best {
            Some(b) if b <= r => b,
            _ => r,
        });
    }
    best.unwrap_or_else(BigRational::one)
}

/// Supertile frequencies at level `n` read off a κ-sequence at level `N`:
/// `ρ_{n,N}(i) = M_{n,N}(i, k_N) / Vol(P_N(k_N))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyVector {
    pub level: usize,
    pub horizon: usize,
    pub entries: Vec<Scalar>,
}

impl FrequencyVector {
    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(Scalar::to_f64).collect()
    }
}

/// `kappa[N]` is the label chosen at level `N`; only `kappa[big_n]` is read.
pub fn kappa_frequencies(
    rule: &FusionRule,
    kappa: &[usize],
    n: usize,
    big_n: usize,
) -> Result<FrequencyVector> {
    let k = *kappa.get(big_n).ok_or_else(|| {
        FusionError::InvalidArgument(format!("κ-sequence has no label at level {big_n}"))
    })?;
    let vol = rule.volume(big_n, k)?;
    let entries = if n == big_n {
        (0..rule.type_count(n)?)
            .map(|i| if i == k { vol.recip() } else { Scalar::zero() })
            .collect()
    } else {
        let m = transition_matrix(rule, n, big_n)?;
        if k >= m.cols() {
            return Err(FusionError::NoSuchSupertile {
                level: big_n,
                index: k,
            });
        }
        let inv = vol.recip();
        m.column(k)
            .into_iter()
            .map(|c| &Scalar::from_int(c) * &inv)
            .collect()
    };
    Ok(FrequencyVector {
        level: n,
        horizon: big_n,
        entries,
    })
}

/// `ρ_{n,N}` for every `n` in `levels`, all read at the same horizon `N`.
pub fn kappa_frequency_levels(
    rule: &FusionRule,
    kappa: &[usize],
    levels: impl IntoIterator<Item = usize>,
    big_n: usize,
) -> Result<Vec<FrequencyVector>> {
    levels
        .into_iter()
        .map(|n| kappa_frequencies(rule, kappa, n, big_n))
        .collect()
}

/// The constant κ-sequence choosing label `k` at every level.
pub fn constant_kappa(k: usize, horizon: usize) -> Vec<usize> {
    vec![k; horizon + 1]
}

/// Thresholds used by [`unique_ergodicity`].
#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicityTolerances {
    /// Largest exponent `p` accepted in a fit `δ_n ≥ c / n^p`.
    pub max_power: f64,
    /// Smallest estimated limiting diameter accepted as persistent.
    pub diameter_floor: f64,
    /// Largest induction step tried for clause (a).
    pub max_induction: usize,
}

impl Default for ErgodicityTolerances {
    fn default() -> Self {
        ErgodicityTolerances {
            max_power: 1.0,
            diameter_floor: 1e-2,
            max_induction: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErgodicityStatus {
    UniquelyErgodic,
    NotUniquelyErgodic,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ErgodicityCertificate {
    /// Clause (a): every step of the rule induced on levels `0, s, 2s, …`
    /// is positive and its entries stay below `bound`.
    BoundedPrimitive {
        induced_step: usize,
        bound: BigInt,
        steps_checked: usize,
    },
    /// Clause (b): `δ_n ≥ c / n^p` over the horizon with `p ≤ max_power`.
    BalanceDivergence {
        deltas: Vec<BigRational>,
        c: f64,
        p: f64,
    },
    /// Clause (c): `Δ_{n,N}` keeps two columns apart.
    DiameterFloor {
        n: usize,
        columns: (usize, usize),
        diameters: Vec<Scalar>,
        floor: f64,
    },
    /// No clause fired; the data gathered is kept.
    Undecided {
        deltas: Vec<BigRational>,
        diameters: Vec<Scalar>,
        floor: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicityVerdict {
    pub status: ErgodicityStatus,
    /// `'a'`, `'b'` or `'c'`, the clause that decided.
    pub clause: Option<char>,
    pub horizon: usize,
    pub certificate: ErgodicityCertificate,
}

/// Decides unique ergodicity at a finite horizon, trying in order
/// (a) bounded matrices with strong primitivity (possibly after inducing),
/// (b) a slowly decaying balance sequence `δ_n`,
/// (c) a persistent lower bound on the diameter of `Δ_{0,N}`.
pub fn unique_ergodicity(
    rule: &FusionRule,
    horizon: usize,
    tol: &ErgodicityTolerances,
) -> Result<ErgodicityVerdict> {
    let horizon = rule.max_level().map_or(horizon, |m| m.min(horizon));
    if horizon < 2 {
        return Err(FusionError::HorizonTooSmall { level: horizon });
    }
    let verdict = |status, clause, certificate| ErgodicityVerdict {
        status,
        clause,
        horizon,
        certificate,
    };

    if let Some(cert) = bounded_primitive(rule, horizon, tol.max_induction)? {
        return Ok(verdict(ErgodicityStatus::UniquelyErgodic, Some('a'), cert));
    }

    let deltas: Vec<BigRational> = (1..=horizon)
        .map(|n| balance_delta(rule, n))
        .collect::<Result<_>>()?;
    if let Some((c, p)) = power_fit(&deltas) {
        if p <= tol.max_power {
            return Ok(verdict(
                ErgodicityStatus::UniquelyErgodic,
                Some('b'),
                ErgodicityCertificate::BalanceDivergence { deltas, c, p },
            ));
        }
    }

    let mut diameters = Vec::new();
    let mut pair = (0, 0);
    let volumes = rule.volumes(0)?;
    for (idx, m) in transition_matrices_from(rule, 0, horizon)?
        .iter()
        .enumerate()
    {
        let d = DirectionMatrix {
            from: 0,
            to: idx + 1,
            columns: normalize(m, &volumes, 0, idx + 1)?,
        };
        let (diam, p) = d.diameter();
        diameters.push(diam);
        pair = p;
    }
    let floor = diameter_floor(&diameters);
    if floor >= tol.diameter_floor {
        return Ok(verdict(
            ErgodicityStatus::NotUniquelyErgodic,
            Some('c'),
            ErgodicityCertificate::DiameterFloor {
                n: 0,
                columns: pair,
                diameters,
                floor,
            },
        ));
    }
    Ok(verdict(
        ErgodicityStatus::Inconclusive,
        None,
        ErgodicityCertificate::Undecided {
            deltas,
            diameters,
            floor,
        },
    ))
}

fn bounded_primitive(
    rule: &FusionRule,
    horizon: usize,
    max_step: usize,
) -> Result<Option<ErgodicityCertificate>> {
    for s in 1..=max_step {
        let count = horizon / s;
        if count < 2 {
            break;
        }
        let mut steps = Vec::with_capacity(count);
        for k in 1..=count {
            steps.push(transition_matrix(rule, (k - 1) * s, k * s)?);
        }
        if !steps.iter().all(IntMatrix::is_positive) {
            continue;
        }
        // bounded: the later half of the steps never exceeds the earlier half
        let maxima: Vec<BigInt> = steps.iter().map(IntMatrix::max_entry).collect();
        let half = count.div_ceil(2);
        let early = maxima[..half].iter().max().cloned().unwrap_or_default();
        if maxima[half..].iter().all(|m| *m <= early) {
            return Ok(Some(ErgodicityCertificate::BoundedPrimitive {
                induced_step: s,
                bound: early,
                steps_checked: count,
            }));
        }
    }
    Ok(None)
}

/// Least-squares fit `log δ_n ≈ log c − p log n`; `None` if some δ is zero.
fn power_fit(deltas: &[BigRational]) -> Option<(f64, f64)> {
    if deltas.iter().any(Zero::is_zero) || deltas.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = deltas
        .iter()
        .enumerate()
        .map(|(i, d)| (((i + 1) as f64).ln(), ln_rational(d)))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    // the bound must hold at every point, so c is the smallest admissible
    let p = -slope;
    let c = pts
        .iter()
        .map(|&(x, y)| (y + p * x).exp())
        .fold(f64::INFINITY, f64::min);
    Some((c, p))
}

/// Last diameter minus a geometric estimate of the remaining decrease.
/// Negative or zero when the diameters look like they tend to zero.
pub(crate) fn diameter_floor(diameters: &[Scalar]) -> f64 {
    let d: Vec<f64> = diameters.iter().map(Scalar::to_f64).collect();
    let Some(&last) = d.last() else { return 0.0 };
    if d.len() < 3 {
        return 0.0;
    }
    let k = d.len();
    let (g1, g2) = (d[k - 2] - d[k - 1], d[k - 3] - d[k - 2]);
    if g1 <= 0.0 {
        return last;
    }
    if g2 <= 0.0 {
        return 0.0;
    }
    let r = g1 / g2;
    if r >= 1.0 {
        return 0.0;
    }
    last - g1 * r / (1.0 - r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ruledsl::{catalog, parse_rule_str};

    fn cat(name: &str) -> FusionRule {
        catalog(name, &Default::default()).unwrap()
    }

    #[test]
    fn two_measures_first_direction_matrix() {
        let d = direction_matrix(&cat("two_measures"), 0, 1).unwrap();
        assert_eq!(
            d.columns[0],
            vec![Scalar::ratio(10, 11), Scalar::ratio(1, 11)]
        );
        assert_eq!(
            d.columns[1],
            vec![Scalar::ratio(1, 11), Scalar::ratio(10, 11)]
        );
    }

    #[test]
    fn balance_values() {
        let tm = cat("two_measures");
        for n in 1..=4u32 {
            assert_eq!(
                balance_delta(&tm, n as usize).unwrap(),
                BigRational::new(1.into(), BigInt::from(10).pow(n))
            );
        }
        let fib = cat("fibonacci_1d");
        assert!(balance_delta(&fib, 1).unwrap().is_zero());
        let induced = fib.induce_every(2, 8).unwrap();
        assert_eq!(
            balance_delta(&induced, 1).unwrap(),
            BigRational::new(1.into(), 2.into())
        );
        let ones =
            parse_rule_str("dim 1\ntile a\ntile b\nlevel(n): a -> a b ; b -> b a\n").unwrap();
        assert!(balance_delta(&ones, 2).unwrap().is_one());
    }

    #[test]
    fn verdicts() {
        let tol = ErgodicityTolerances::default();
        let v = unique_ergodicity(&cat("fibonacci_dpv"), 6, &tol).unwrap();
        assert_eq!(
            (v.status, v.clause),
            (ErgodicityStatus::UniquelyErgodic, Some('a'))
        );
        assert!(matches!(
            v.certificate,
            ErgodicityCertificate::BoundedPrimitive {
                induced_step: 2,
                ..
            }
        ));
        let v = unique_ergodicity(&cat("two_measures"), 5, &tol).unwrap();
        assert_eq!(v.status, ErgodicityStatus::NotUniquelyErgodic);
        let ErgodicityCertificate::DiameterFloor { floor, .. } = v.certificate else {
            panic!()
        };
        assert!(floor >= 1.6, "{floor}");
    }

    #[test]
    fn summable_balance_is_inconclusive() {
        let rule =
            parse_rule_str("dim 1\ntile a\ntile b\nlevel(n): a -> a^(2^n) b ; b -> a b\n").unwrap();
        let deltas: Vec<_> = (1..=6).map(|n| balance_delta(&rule, n).unwrap()).collect();
        assert_eq!(deltas[2], BigRational::new(1.into(), 8.into()));
        let v = unique_ergodicity(&rule, 6, &ErgodicityTolerances::default()).unwrap();
        assert_eq!(v.status, ErgodicityStatus::Inconclusive, "{v:?}");
    }
}
