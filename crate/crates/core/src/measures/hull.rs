use num_traits::{One, Zero};

use super::direction_matrix;
use crate::error::{FusionError, Result};
use crate::rule::FusionRule;
use crate::scalar::Scalar;

/// Largest `j_n` for which hull vertices are computed.
pub const MAX_HULL_DIMENSION: usize = 8;

/// A column counts as persisting when its distance to the hull of the other
/// columns, relative to the diameter, shrinks by less than this factor
/// between `N - 1` and `N`.
const SHRINK_RATIO: f64 = 0.5;

/// Hull vertices of `Δ_{n,N}` among the columns of `D_{n,N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexReport {
    pub from: usize,
    pub to: usize,
    /// Columns that are exact vertices of `Δ_{n,N}`; of several identical
    /// columns only the first is listed.
    pub vertices: Vec<usize>,
    /// L¹ distance from each column to the hull of the others, divided by
    /// the diameter of `Δ_{n,N}`.
    pub relative_distance: Vec<f64>,
    /// Vertices whose relative distance did not collapse since `N - 1`.
    pub persistent: Vec<usize>,
}

impl VertexReport {
    /// Upper bound suggested for the number of ergodic measures.
    pub fn candidate_count(&self) -> usize {
        self.persistent.len()
    }
}

pub fn ergodic_vertices(rule: &FusionRule, n: usize, big_n: usize) -> Result<VertexReport> {
    let dim = rule.type_count(n)?;
    if dim > MAX_HULL_DIMENSION {
        return Err(FusionError::DimensionTooHigh { dim });
    }
    let (vertices, relative_distance) = hull_distances(rule, n, big_n)?;
    let persistent = if big_n > n + 1 {
        let (_, before) = hull_distances(rule, n, big_n - 1)?;
        vertices
            .iter()
            .copied()
            .filter(|&k| {
                before
                    .get(k)
                    .is_none_or(|&b| relative_distance[k] >= SHRINK_RATIO * b)
            })
            .collect()
    } else {
        vertices.clone()
    };
    Ok(VertexReport {
        from: n,
        to: big_n,
        vertices,
        relative_distance,
        persistent,
    })
}

fn hull_distances(rule: &FusionRule, n: usize, big_n: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    let d = direction_matrix(rule, n, big_n)?;
    let (diam, _) = d.diameter();
    let cols = &d.columns;
    let mut vertices = Vec::new();
    let mut rel = Vec::with_capacity(cols.len());
    for k in 0..cols.len() {
        if cols[..k].contains(&cols[k]) {
            rel.push(0.0);
            continue;
        }
        let others: Vec<&Vec<Scalar>> = cols.iter().filter(|c| *c != &cols[k]).collect();
        let dist = if others.is_empty() {
            Scalar::one()
        } else {
            hull_distance(&cols[k], &others)
        };
        if !dist.is_zero() {
            vertices.push(k);
        }
        rel.push(if diam.is_zero() {
            1.0
        } else {
            (&dist / &diam).to_f64()
        });
    }
    Ok((vertices, rel))
}

/// L¹ distance from `point` to the convex hull of `others`, as a linear
/// program in `λ ≥ 0, u ≥ 0, w ≥ 0`:
/// minimize `Σ (u + w)` subject to `Σ λ_i c_i + u − w = point`, `Σ λ_i = 1`.
pub(crate) fn hull_distance(point: &[Scalar], others: &[&Vec<Scalar>]) -> Scalar {
    let d = point.len();
    let m = others.len();
    let vars = m + 2 * d;
    let mut a = vec![vec![Scalar::zero(); vars]; d + 1];
    let mut b = Vec::with_capacity(d + 1);
    for l in 0..d {
        for (i, c) in others.iter().enumerate() {
            a[l][i] = c[l].clone();
        }
        a[l][m + l] = Scalar::one();
        a[l][m + d + l] = -Scalar::one();
        b.push(point[l].clone());
    }
    for entry in a[d].iter_mut().take(m) {
        *entry = Scalar::one();
    }
    b.push(Scalar::one());
    let cost: Vec<Scalar> = (0..vars)
        .map(|j| if j < m { Scalar::zero() } else { Scalar::one() })
        .collect();
    lp_minimize(a, b, &cost).expect("hull distance program is feasible and bounded")
}

/// Exact two-phase simplex with Bland's rule for
/// `min c·x` subject to `A x = b, x ≥ 0`. Returns `None` when the program
/// is infeasible or unbounded.
pub(crate) fn lp_minimize(
    mut a: Vec<Vec<Scalar>>,
    mut b: Vec<Scalar>,
    cost: &[Scalar],
) -> Option<Scalar> {
    let rows = a.len();
    let n = cost.len();
    for (row, rhs) in a.iter_mut().zip(b.iter_mut()) {
        if rhs.is_negative() {
            row.iter_mut().for_each(|v| *v = -&*v);
            *rhs = -&*rhs;
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row.extend((0..rows).map(|r| {
            if r == i {
                Scalar::one()
            } else {
                Scalar::zero()
            }
        }));
    }
    let mut t = Tableau {
        a,
        b,
        basis: (n..n + rows).collect(),
    };

    let phase_one: Vec<Scalar> = (0..n + rows)
        .map(|j| if j < n { Scalar::zero() } else { Scalar::one() })
        .collect();
    t.run(&phase_one, n + rows)?;
    if !t.objective(&phase_one).is_zero() {
        return None;
    }
    for r in 0..rows {
        if t.basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| !t.a[r][j].is_zero()) {
                t.pivot(r, col);
            }
        }
    }
    let mut full = cost.to_vec();
    full.resize(n + rows, Scalar::zero());
    t.run(&full, n)?;
    Some(t.objective(&full))
}

struct Tableau {
    a: Vec<Vec<Scalar>>,
    b: Vec<Scalar>,
    basis: Vec<usize>,
}

impl Tableau {
    fn objective(&self, cost: &[Scalar]) -> Scalar {
        self.basis
            .iter()
            .zip(&self.b)
            .map(|(&j, v)| &cost[j] * v)
            .sum()
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let inv = self.a[r][col].recip();
        self.a[r].iter_mut().for_each(|v| *v = &*v * &inv);
        self.b[r] = &self.b[r] * &inv;
        let pivot_row = self.a[r].clone();
        let pivot_rhs = self.b[r].clone();
        for i in 0..self.a.len() {
            if i == r || self.a[i][col].is_zero() {
                continue;
            }
            let f = self.a[i][col].clone();
            for (v, p) in self.a[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &(&f * p);
                }
            }
            self.b[i] -= &(&f * &pivot_rhs);
        }
        self.basis[r] = col;
    }

    /// Optimizes over the first `allowed` columns; `None` if unbounded.
    fn run(&mut self, cost: &[Scalar], allowed: usize) -> Option<()> {
        loop {
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced: Scalar = &cost[j]
                    - &self
                        .basis
                        .iter()
                        .enumerate()
                        .map(|(i, &bj)| &cost[bj] * &self.a[i][j])
                        .sum::<Scalar>();
                reduced.is_negative()
            });
            let Some(col) = entering else { return Some(()) };
            let mut leave: Option<(usize, Scalar)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][col].is_positive() {
                    continue;
                }
                let ratio = &self.b[i] / &self.a[i][col];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let (r, _) = leave?;
            self.pivot(r, col);
        }
    }
}
