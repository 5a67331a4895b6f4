//! Concrete patches: supertiles expanded into explicitly placed pieces.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::ops::{Add, Sub};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{FusionError, Result};
use crate::rule::{Composition, FusionRule, Shape};
use crate::scalar::Scalar;

/// An exact coordinate `(rat + phi·φ) / den` where `den` is the rule's
/// coordinate denominator (shared by every coordinate of a patch).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Coord {
    pub rat: i128,
    pub phi: i128,
}

impl Coord {
    pub const ZERO: Coord = Coord { rat: 0, phi: 0 };

    pub fn checked_add(self, o: Coord) -> Option<Coord> {
        Some(Coord {
            rat: self.rat.checked_add(o.rat)?,
            phi: self.phi.checked_add(o.phi)?,
        })
    }

    pub fn checked_sub(self, o: Coord) -> Option<Coord> {
        Some(Coord {
            rat: self.rat.checked_sub(o.rat)?,
            phi: self.phi.checked_sub(o.phi)?,
        })
    }

    /// Converts `s · den` to a coordinate, if it has integral parts that fit.
    pub fn from_scalar(s: &Scalar, den: &BigInt) -> Option<Coord> {
        let scale = BigRational::from_integer(den.clone());
        let r = s.rational_part() * &scale;
        let p = s.phi_part() * &scale;
        if !r.is_integer() || !p.is_integer() {
            return None;
        }
        Some(Coord {
            rat: r.to_integer().to_i128()?,
            phi: p.to_integer().to_i128()?,
        })
    }

    pub fn to_scalar(self, den: &BigInt) -> Scalar {
        Scalar::new(
            BigRational::new(self.rat.into(), den.clone()),
            BigRational::new(self.phi.into(), den.clone()),
        )
    }

    /// Sign of `rat + phi·φ`.
    pub fn signum(self) -> Ordering {
        let (a, b) = (self.rat, self.phi);
        if b == 0 {
            return a.cmp(&0);
        }
        if a == 0 {
            return b.cmp(&0);
        }
        if (a > 0) == (b > 0) {
            return a.cmp(&0);
        }
        // a + bφ = ((2a + b) + b√5) / 2 with opposite-signed parts
        let exact = || {
            let u: BigInt = BigInt::from(a) * 2 + BigInt::from(b);
            let lhs = &u * &u;
            let rhs: BigInt = BigInt::from(b) * BigInt::from(b) * 5;
            (u.sign(), lhs.cmp(&rhs))
        };
        let (u_sign, cmp) = match a.checked_mul(2).and_then(|x| x.checked_add(b)) {
            Some(u) => match (
                u.checked_mul(u),
                b.checked_mul(b).and_then(|x| x.checked_mul(5)),
            ) {
                (Some(l), Some(r)) => (BigInt::from(u).sign(), l.cmp(&r)),
                _ => exact(),
            },
            None => exact(),
        };
        use num_bigint::Sign;
        // the term with larger square decides
        match cmp {
            Ordering::Greater => {
                if u_sign == Sign::Minus {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            Ordering::Less => b.cmp(&0),
            Ordering::Equal => Ordering::Equal,
        }
    }
}

impl Add for Coord {
    type Output = Coord;
    fn add(self, o: Coord) -> Coord {
        Coord {
            rat: self.rat + o.rat,
            phi: self.phi + o.phi,
        }
    }
}

impl Sub for Coord {
    type Output = Coord;
    fn sub(self, o: Coord) -> Coord {
        Coord {
            rat: self.rat - o.rat,
            phi: self.phi - o.phi,
        }
    }
}

impl PartialOrd for Coord {
    fn partial_cmp(&self, o: &Coord) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Coord {
    fn cmp(&self, o: &Coord) -> Ordering {
        match self.checked_sub(*o) {
            Some(d) => d.signum(),
            None => self
                .to_scalar(&BigInt::from(1))
                .cmp(&o.to_scalar(&BigInt::from(1))),
        }
    }
}

/// One piece of a 2-D patch, placed by its lower-left corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PlacedPiece {
    pub piece: usize,
    pub x: Coord,
    pub y: Coord,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatchPieces {
    /// Left to right; positions follow from the piece lengths.
    Line(Vec<usize>),
    Plane(Vec<PlacedPiece>),
}

/// A finite patch of level-`level` supertiles (prototiles when `level = 0`)
/// with exact positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcretePatch {
    pub level: usize,
    /// Common denominator of every coordinate.
    pub den: BigInt,
    /// Width and height of each piece type, as coordinates.
    pub extents: Arc<Vec<(Coord, Coord)>>,
    pub pieces: PatchPieces,
}

impl ConcretePatch {
    pub fn dimension(&self) -> usize {
        match self.pieces {
            PatchPieces::Line(_) => 1,
            PatchPieces::Plane(_) => 2,
        }
    }

    pub fn len(&self) -> usize {
        match &self.pieces {
            PatchPieces::Line(w) => w.len(),
            PatchPieces::Plane(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The 1-D word of piece indices.
    pub fn word(&self) -> Option<&[usize]> {
        match &self.pieces {
            PatchPieces::Line(w) => Some(w),
            PatchPieces::Plane(_) => None,
        }
    }

    /// Every piece with its lower-left corner; in 1-D `y` is zero.
    pub fn placements(&self) -> Vec<PlacedPiece> {
        match &self.pieces {
            PatchPieces::Plane(p) => p.clone(),
            PatchPieces::Line(w) => {
                let mut x = Coord::ZERO;
                w.iter()
                    .map(|&piece| {
                        let p = PlacedPiece {
                            piece,
                            x,
                            y: Coord::ZERO,
                        };
                        x = x + self.extents[piece].0;
                        p
                    })
                    .collect()
            }
        }
    }

    /// Number of pieces of each type.
    pub fn population(&self) -> Vec<BigUint> {
        let mut counts = vec![0u64; self.extents.len()];
        match &self.pieces {
            PatchPieces::Line(w) => w.iter().for_each(|&c| counts[c] += 1),
            PatchPieces::Plane(p) => p.iter().for_each(|q| counts[q.piece] += 1),
        }
        counts.into_iter().map(BigUint::from).collect()
    }

    /// Bounding box `(x0, y0, x1, y1)` of the pieces.
    pub fn bounding_box(&self) -> (Coord, Coord, Coord, Coord) {
        let ps = self.placements();
        let mut it = ps.iter();
        let Some(first) = it.next() else {
            return (Coord::ZERO, Coord::ZERO, Coord::ZERO, Coord::ZERO);
        };
        let ext = |p: &PlacedPiece| (p.x + self.extents[p.piece].0, p.y + self.extents[p.piece].1);
        let (mut x0, mut y0) = (first.x, first.y);
        let (mut x1, mut y1) = ext(first);
        for p in it {
            let (px1, py1) = ext(p);
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(px1);
            y1 = y1.max(py1);
        }
        (x0, y0, x1, y1)
    }

    pub fn to_scalar(&self, c: Coord) -> Scalar {
        c.to_scalar(&self.den)
    }

    /// A 1-D patch given by a word of level-`level` supertile indices.
    pub fn from_word(rule: &FusionRule, level: usize, word: Vec<usize>) -> Result<ConcretePatch> {
        if rule.dimension() != 1 {
            return Err(FusionError::WrongDimension { expected: 1 });
        }
        let extents = extents(rule, level)?;
        if let Some(&bad) = word.iter().find(|&&c| c >= extents.len()) {
            return Err(FusionError::NoSuchSupertile { level, index: bad });
        }
        Ok(ConcretePatch {
            level,
            den: rule.coordinate_denominator(),
            extents,
            pieces: PatchPieces::Line(word),
        })
    }

    /// A 2-D patch from exact placements of level-`level` supertiles.
    pub fn from_placements(
        rule: &FusionRule,
        level: usize,
        pieces: &[(usize, Scalar, Scalar)],
    ) -> Result<ConcretePatch> {
        if rule.dimension() != 2 {
            return Err(FusionError::WrongDimension { expected: 2 });
        }
        let extents = extents(rule, level)?;
        let den = rule.coordinate_denominator();
        let mut out = Vec::with_capacity(pieces.len());
        for (piece, x, y) in pieces {
            if *piece >= extents.len() {
                return Err(FusionError::NoSuchSupertile {
                    level,
                    index: *piece,
                });
            }
            let conv = |s: &Scalar| {
                Coord::from_scalar(s, &den).ok_or_else(|| {
                    FusionError::InvalidArgument(format!(
                        "offset {s} is not on the rule's coordinate lattice"
                    ))
                })
            };
            out.push(PlacedPiece {
                piece: *piece,
                x: conv(x)?,
                y: conv(y)?,
            });
        }
        Ok(ConcretePatch {
            level,
            den,
            extents,
            pieces: PatchPieces::Plane(out),
        })
    }
}

fn extents(rule: &FusionRule, level: usize) -> Result<Arc<Vec<(Coord, Coord)>>> {
    let den = rule.coordinate_denominator();
    let lvl = rule.level(level)?;
    let mut out = Vec::with_capacity(lvl.shapes.len());
    for s in &lvl.shapes {
        let (w, h) = match s {
            Shape::Interval(l) => (l.clone(), Scalar::zero()),
            Shape::Rect { width, height } => (width.clone(), height.clone()),
        };
        let conv = |v: &Scalar| {
            Coord::from_scalar(v, &den).ok_or(FusionError::CoordinateOverflow { level })
        };
        out.push((conv(&w)?, conv(&h)?));
    }
    Ok(Arc::new(out))
}

/// Number of level-`t` pieces in `P_n(j)`, from the transition matrices.
pub fn piece_count(rule: &FusionRule, n: usize, j: usize, t: usize) -> Result<BigInt> {
    if t == n {
        return Ok(BigInt::from(1));
    }
    let m = super::transition_matrix(rule, t, n)?;
    if j >= m.cols() {
        return Err(FusionError::NoSuchSupertile { level: n, index: j });
    }
    Ok(m.column(j).into_iter().sum())
}

/// Expands `P_n(j)` into level-`t` supertiles (`t ≤ n`); `t = 0` gives tiles.
///
/// Fails with [`FusionError::ExpansionTooLarge`] (carrying the exact count)
/// when the expansion would exceed the rule's cap.
pub fn expand(rule: &FusionRule, n: usize, j: usize, t: usize) -> Result<ConcretePatch> {
    if t > n {
        return Err(FusionError::InvalidArgument(format!(
            "cannot expand level {n} into level {t}"
        )));
    }
    let count = piece_count(rule, n, j, t)?;
    let cap = rule.limits().expansion_cap;
    if count > BigInt::from(cap) {
        return Err(FusionError::ExpansionTooLarge { count, cap });
    }
    let extents = extents(rule, t)?;
    let den = rule.coordinate_denominator();
    if t == n {
        if j >= rule.type_count(n)? {
            return Err(FusionError::NoSuchSupertile { level: n, index: j });
        }
        let pieces = match rule.dimension() {
            1 => PatchPieces::Line(vec![j]),
            _ => PatchPieces::Plane(vec![PlacedPiece {
                piece: j,
                x: Coord::ZERO,
                y: Coord::ZERO,
            }]),
        };
        return Ok(ConcretePatch {
            level: t,
            den,
            extents,
            pieces,
        });
    }
    let pieces = match rule.dimension() {
        1 => {
            let mut memo = HashMap::new();
            PatchPieces::Line(line_word(rule, n, j, t, &mut memo)?.to_vec())
        }
        _ => {
            let mut out = Vec::with_capacity(count.to_usize().unwrap_or(0));
            let mut memo = HashMap::new();
            place(
                rule,
                &den,
                n,
                j,
                t,
                Coord::ZERO,
                Coord::ZERO,
                &mut memo,
                &mut out,
            )?;
            PatchPieces::Plane(out)
        }
    };
    Ok(ConcretePatch {
        level: t,
        den,
        extents,
        pieces,
    })
}

type WordMemo = HashMap<(usize, usize), Arc<Vec<usize>>>;

fn line_word(
    rule: &FusionRule,
    k: usize,
    j: usize,
    t: usize,
    memo: &mut WordMemo,
) -> Result<Arc<Vec<usize>>> {
    if k == t {
        return Ok(Arc::new(vec![j]));
    }
    if let Some(w) = memo.get(&(k, j)) {
        return Ok(w.clone());
    }
    let lvl = rule.level(k)?;
    let def = lvl
        .defs
        .get(j)
        .ok_or(FusionError::NoSuchSupertile { level: k, index: j })?;
    let Composition::Line(runs) = &def.composition else {
        return Err(FusionError::WrongDimension { expected: 1 });
    };
    let mut out = Vec::new();
    for r in runs {
        let child = line_word(rule, k - 1, r.child, t, memo)?;
        let reps = r.count.to_usize().ok_or(FusionError::ExpansionTooLarge {
            count: BigInt::from(r.count.clone()),
            cap: rule.limits().expansion_cap,
        })?;
        if child.len() == 1 {
            out.resize(out.len() + reps, child[0]);
        } else {
            for _ in 0..reps {
                out.extend_from_slice(&child);
            }
        }
    }
    let w = Arc::new(out);
    memo.insert((k, j), w.clone());
    Ok(w)
}

type PlaneMemo = HashMap<(usize, usize), Arc<Vec<(usize, Coord, Coord)>>>;

/// Placements of the children of `P_k(j)` converted to lattice coordinates.
fn children(
    rule: &FusionRule,
    den: &BigInt,
    k: usize,
    j: usize,
    memo: &mut PlaneMemo,
) -> Result<Arc<Vec<(usize, Coord, Coord)>>> {
    if let Some(c) = memo.get(&(k, j)) {
        return Ok(c.clone());
    }
    let lvl = rule.level(k)?;
    let def = lvl
        .defs
        .get(j)
        .ok_or(FusionError::NoSuchSupertile { level: k, index: j })?;
    let Composition::Plane(ps) = &def.composition else {
        return Err(FusionError::WrongDimension { expected: 2 });
    };
    let conv =
        |s: &Scalar| Coord::from_scalar(s, den).ok_or(FusionError::CoordinateOverflow { level: k });
    let mut out = Vec::with_capacity(ps.len());
    for p in ps {
        out.push((p.child, conv(&p.x)?, conv(&p.y)?));
    }
    let out = Arc::new(out);
    memo.insert((k, j), out.clone());
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn place(
    rule: &FusionRule,
    den: &BigInt,
    k: usize,
    j: usize,
    t: usize,
    x: Coord,
    y: Coord,
    memo: &mut PlaneMemo,
    out: &mut Vec<PlacedPiece>,
) -> Result<()> {
    if k == t {
        out.push(PlacedPiece { piece: j, x, y });
        return Ok(());
    }
    let kids = children(rule, den, k, j, memo)?;
    for &(child, dx, dy) in kids.iter() {
        let overflow = FusionError::CoordinateOverflow { level: k };
        let cx = x.checked_add(dx).ok_or(overflow.clone())?;
        let cy = y.checked_add(dy).ok_or(overflow)?;
        place(rule, den, k - 1, child, t, cx, cy, memo, out)?;
    }
    Ok(())
}
