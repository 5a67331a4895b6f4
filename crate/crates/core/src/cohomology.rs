//! One-dimensional border forcing, Anderson-Putnam approximants and the
//! direct limit computing Ȟ¹ of the hull.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::engine::expand;
use crate::error::{FusionError, Result};
use crate::matrix::IntMatrix;
use crate::rule::{Composition, FusionRule};
use crate::scalar::Scalar;

/// Harvests look at least this many levels up, then keep going until a
/// level adds nothing new.
pub const MIN_HARVEST_DEPTH: usize = 2;

/// Deepest level, relative to the one studied, that a harvest reads.
pub const MAX_HARVEST_DEPTH: usize = 6;

/// Extra levels searched when [`h1_direct_limit`] checks border forcing.
pub const BORDER_WINDOW: usize = 3;

/// The `n`-supertiles immediately left and right of one `N`-supertile.
pub type Flank = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BorderForcing {
    /// Every `big_n`-supertile type sees a single flank. `flanks[t]` is
    /// `None` for types with no interior occurrence in the harvest.
    Forced {
        level: usize,
        big_n: usize,
        flanks: Vec<Option<Flank>>,
    },
    /// No `N ≤ max_n` works; `conflicts` lists, for `N = max_n`, each type
    /// with more than one flank and the flanks seen.
    NotForcedUpTo {
        level: usize,
        max_n: usize,
        conflicts: Vec<(usize, Vec<Flank>)>,
    },
}

impl BorderForcing {
    pub fn forced_at(&self) -> Option<usize> {
        match self {
            BorderForcing::Forced { big_n, .. } => Some(*big_n),
            BorderForcing::NotForcedUpTo { .. } => None,
        }
    }
}

fn require_line(rule: &FusionRule) -> Result<()> {
    if rule.dimension() != 1 {
        return Err(FusionError::WrongDimension { expected: 1 });
    }
    Ok(())
}

fn runs(c: &Composition) -> impl DoubleEndedIterator<Item = usize> + '_ {
    let runs = match c {
        Composition::Line(r) => r.as_slice(),
        Composition::Plane(_) => &[],
    };
    runs.iter().filter(|r| !r.count.is_zero()).map(|r| r.child)
}

/// Type of the first (or last) level-`n` piece of `P_m(j)`.
fn end_piece(rule: &FusionRule, m: usize, j: usize, n: usize, last: bool) -> Result<usize> {
    let (mut level, mut j) = (m, j);
    while level > n {
        let lvl = rule.level(level)?;
        let def = lvl
            .defs
            .get(j)
            .ok_or(FusionError::NoSuchSupertile { level, index: j })?;
        let mut children = runs(&def.composition);
        let next = if last {
            children.next_back()
        } else {
            children.next()
        };
        j = next.ok_or_else(|| {
            FusionError::InvalidArgument(format!("empty supertile at level {level}"))
        })?;
        level -= 1;
    }
    Ok(j)
}

/// Flanks of every `N`-supertile type, read from the interior occurrences
/// inside the expansions of all `(N+d)`-supertiles.
fn flanks_at_depth(
    rule: &FusionRule,
    n: usize,
    big_n: usize,
    d: usize,
) -> Result<Vec<BTreeSet<Flank>>> {
    let types = rule.type_count(big_n)?;
    let first: Vec<usize> = (0..types)
        .map(|t| end_piece(rule, big_n, t, n, false))
        .collect::<Result<_>>()?;
    let last: Vec<usize> = (0..types)
        .map(|t| end_piece(rule, big_n, t, n, true))
        .collect::<Result<_>>()?;
    let mut out = vec![BTreeSet::new(); types];
    for j in 0..rule.type_count(big_n + d)? {
        let patch = expand(rule, big_n + d, j, big_n)?;
        let word = patch.word().unwrap_or_default();
        for w in word.windows(3) {
            out[w[1]].insert((last[w[0]], first[w[2]]));
        }
    }
    Ok(out)
}

/// Flanks harvested from `d = 2` upwards until a level adds none. Deeper
/// levels that are undefined or too large end the harvest quietly.
fn flanks(rule: &FusionRule, n: usize, big_n: usize) -> Result<Vec<BTreeSet<Flank>>> {
    let mut seen = flanks_at_depth(rule, n, big_n, MIN_HARVEST_DEPTH)?;
    for d in MIN_HARVEST_DEPTH + 1..=MAX_HARVEST_DEPTH {
        let deeper = match flanks_at_depth(rule, n, big_n, d) {
            Ok(f) => f,
            Err(FusionError::ExpansionTooLarge { .. } | FusionError::LevelNotDefined { .. }) => {
                break
            }
            Err(e) => return Err(e),
        };
        if deeper == seen {
            break;
        }
        seen = deeper;
    }
    Ok(seen)
}

/// Least `N` in `n..=max_n` at which every `N`-supertile type determines
/// the `n`-supertiles on both sides of it.
///
/// Occurrences are harvested inside `(N+d)`-supertiles for `d ≥ 2`,
/// deepening while new flanks appear, so a positive answer is relative to
/// the contexts seen there.
pub fn border_forcing_check(rule: &FusionRule, n: usize, max_n: usize) -> Result<BorderForcing> {
    require_line(rule)?;
    let mut conflicts = Vec::new();
    for big_n in n..=max_n {
        let seen = flanks(rule, n, big_n)?;
        conflicts = seen
            .iter()
            .enumerate()
            .filter(|(_, s)| s.len() > 1)
            .map(|(t, s)| (t, s.iter().copied().collect()))
            .collect();
        if conflicts.is_empty() {
            let flanks = seen.into_iter().map(|s| s.into_iter().next()).collect();
            return Ok(BorderForcing::Forced {
                level: n,
                big_n,
                flanks,
            });
        }
    }
    Ok(BorderForcing::NotForcedUpTo {
        level: n,
        max_n,
        conflicts,
    })
}

/// Endpoint slot of a level-`n` cell: `2j` is the left end of cell `j`,
/// `2j + 1` the right end.
pub fn slot(cell: usize, right: bool) -> usize {
    2 * cell + usize::from(right)
}

/// The Anderson-Putnam complex `Γ_n` of a 1-D rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApComplex {
    pub level: usize,
    /// Length of the 1-cell for each `n`-supertile type.
    pub cells: Vec<Scalar>,
    /// Partition of the endpoint slots (see [`slot`]) into vertices.
    pub vertex_classes: Vec<Vec<usize>>,
    /// Adjacent pairs `(x, y)` of `n`-supertiles that were harvested.
    pub adjacencies: BTreeSet<(usize, usize)>,
    /// Row `s` counts how often `f_n` wraps `P_{n+1}(s)` around each cell.
    pub winding: IntMatrix,
}

impl ApComplex {
    pub fn vertex_count(&self) -> usize {
        self.vertex_classes.len()
    }

    /// A single vertex, so `Γ_n` is a wedge of circles.
    pub fn is_wedge(&self) -> bool {
        self.vertex_classes.len() == 1
    }

    /// Rank of `H¹(Γ_n)`: edges minus vertices plus components.
    pub fn first_betti(&self) -> usize {
        let k = self.cells.len();
        let mut uf = UnionFind::new(self.vertex_classes.len());
        let class_of = self.slot_classes();
        for j in 0..k {
            uf.union(class_of[&slot(j, false)], class_of[&slot(j, true)]);
        }
        k + uf.components() - self.vertex_classes.len()
    }

    fn slot_classes(&self) -> BTreeMap<usize, usize> {
        self.vertex_classes
            .iter()
            .enumerate()
            .flat_map(|(c, slots)| slots.iter().map(move |&s| (s, c)))
            .collect()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let p = self.parent[x];
        if p == x {
            return x;
        }
        let root = self.find(p);
        self.parent[x] = root;
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn components(&mut self) -> usize {
        (0..self.parent.len())
            .filter(|&x| self.find(x) == x)
            .count()
    }

    fn classes(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..self.parent.len() {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x);
        }
        by_root.into_values().collect()
    }
}

/// Adjacent level-`n` pairs inside the supertiles of level `m`, read from
/// consecutive children without expanding.
fn adjacencies_at(
    rule: &FusionRule,
    n: usize,
    m: usize,
    out: &mut BTreeSet<(usize, usize)>,
) -> Result<()> {
    let lvl = rule.level(m)?;
    for def in &lvl.defs {
        let Composition::Line(rs) = &def.composition else {
            continue;
        };
        for r in rs.iter().filter(|r| r.count > One::one()) {
            out.insert((
                end_piece(rule, m - 1, r.child, n, true)?,
                end_piece(rule, m - 1, r.child, n, false)?,
            ));
        }
        let children: Vec<usize> = runs(&def.composition).collect();
        for w in children.windows(2) {
            out.insert((
                end_piece(rule, m - 1, w[0], n, true)?,
                end_piece(rule, m - 1, w[1], n, false)?,
            ));
        }
    }
    Ok(())
}

/// Adjacencies from levels `n+1, n+2, …`, stopping once a level past
/// `n + MIN_HARVEST_DEPTH` adds nothing.
fn adjacencies(rule: &FusionRule, n: usize) -> Result<BTreeSet<(usize, usize)>> {
    let mut out = BTreeSet::new();
    for m in n + 1..=n + MAX_HARVEST_DEPTH {
        let before = out.len();
        match adjacencies_at(rule, n, m, &mut out) {
            Ok(()) => {}
            Err(FusionError::LevelNotDefined { .. }) if m > n + MIN_HARVEST_DEPTH => break,
            Err(e) => return Err(e),
        }
        if m > n + MIN_HARVEST_DEPTH && out.len() == before {
            break;
        }
    }
    Ok(out)
}

pub fn ap_complex(rule: &FusionRule, n: usize) -> Result<ApComplex> {
    require_line(rule)?;
    let lvl = rule.level(n)?;
    let cells: Vec<Scalar> = (0..lvl.len())
        .map(|j| rule.volume(n, j))
        .collect::<Result<_>>()?;
    let adjacencies = adjacencies(rule, n)?;
    let mut uf = UnionFind::new(2 * cells.len());
    for &(x, y) in &adjacencies {
        uf.union(slot(x, true), slot(y, false));
    }
    let winding = rule.step_matrix(n + 1)?.transpose();
    Ok(ApComplex {
        level: n,
        cells,
        vertex_classes: uf.classes(),
        adjacencies,
        winding,
    })
}

/// One step `f_n^*` of the direct system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PullbackStep {
    pub level: usize,
    pub matrix: IntMatrix,
    /// Exact determinant, for square matrices.
    pub determinant: Option<BigInt>,
    pub rank: usize,
    /// Nonzero invariant factors of the matrix.
    pub invariant_factors: Vec<BigInt>,
}

impl PullbackStep {
    pub fn is_unimodular(&self) -> bool {
        self.determinant.as_ref().is_some_and(|d| d.abs().is_one())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectLimitReport {
    pub steps: Vec<PullbackStep>,
    /// Every sampled pullback is square and unimodular.
    pub stabilized: bool,
    pub group: String,
    /// Whether every `Γ_n` sampled is a wedge of circles, so that its
    /// cohomology is `ℤ^{j_n}` as the pullbacks assume.
    pub wedges: bool,
    pub border_forcing: Vec<BorderForcing>,
    /// `None` when the border is forced at every sampled level.
    pub label: Option<String>,
    /// The rule's asserted recognizability, on which the identification
    /// with the hull's cohomology also rests.
    pub recognizable: bool,
}

/// The direct system `f_n^*` for `n = 1..=horizon`, with each pullback the
/// winding matrix of [`ap_complex`].
pub fn h1_direct_limit(rule: &FusionRule, horizon: usize) -> Result<DirectLimitReport> {
    require_line(rule)?;
    let mut steps = Vec::new();
    let mut wedges = true;
    let mut border_forcing = Vec::new();
    for n in 1..=horizon {
        let ap = ap_complex(rule, n)?;
        wedges &= ap.is_wedge();
        let matrix = ap.winding;
        let determinant = (matrix.rows() == matrix.cols()).then(|| matrix.determinant());
        steps.push(PullbackStep {
            level: n,
            rank: matrix.rank(),
            invariant_factors: matrix.invariant_factors(),
            determinant,
            matrix,
        });
        border_forcing.push(border_forcing_check(rule, n, n + BORDER_WINDOW)?);
    }
    let stabilized = !steps.is_empty() && steps.iter().all(PullbackStep::is_unimodular);
    let group = if stabilized && wedges {
        format!("ℤ{} (stable)", superscript(steps[0].matrix.cols()))
    } else {
        let ranks: Vec<String> = steps.iter().map(|s| s.rank.to_string()).collect();
        let factors: Vec<String> = steps
            .iter()
            .map(|s| {
                let f: Vec<String> = s
                    .invariant_factors
                    .iter()
                    .map(ToString::to_string)
                    .collect();
                format!("[{}]", f.join(", "))
            })
            .collect();
        let mut text = format!(
            "ranks ({}); invariant factors {}",
            ranks.join(", "),
            factors.join(" ")
        );
        if !wedges {
            text += "; some approximant is not a wedge of circles";
        }
        text
    };
    let label = border_forcing
        .iter()
        .any(|b| b.forced_at().is_none())
        .then(|| "pre-collaring, informational only".to_string());
    Ok(DirectLimitReport {
        steps,
        stabilized,
        group,
        wedges,
        border_forcing,
        label,
        recognizable: rule.recognizable(),
    })
}

fn superscript(k: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    k.to_string()
        .bytes()
        .map(|b| DIGITS[(b - b'0') as usize])
        .collect()
}
