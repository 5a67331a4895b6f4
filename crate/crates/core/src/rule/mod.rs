//! Prototiles, supertile compositions, fusion rules and transition matrices.
//!
//! Indices are 0-based throughout: supertile `j` at level `n` is
//! `rule.level(n)?.defs[j]`, and level 0 is the prototile set.

pub mod program;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{FusionError, Result};
use crate::matrix::IntMatrix;
use crate::scalar::Scalar;
use program::{Below, EvalCtx, RuleProgram};

pub use validate::{validate, ValidationReport, Violation};

/// Geometry of a prototile or a supertile's support.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Interval(Scalar),
    Rect { width: Scalar, height: Scalar },
}

impl Shape {
    /// `(width, height)`; intervals report a zero height.
    pub fn extent(&self) -> (Scalar, Scalar) {
        match self {
            Shape::Interval(l) => (l.clone(), Scalar::zero()),
            Shape::Rect { width, height } => (width.clone(), height.clone()),
        }
    }

    pub fn volume(&self) -> Scalar {
        match self {
            Shape::Interval(l) => l.clone(),
            Shape::Rect { width, height } => width * height,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Shape::Interval(_) => 1,
            Shape::Rect { .. } => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Prototile {
    pub id: usize,
    pub label: String,
    pub shape: Shape,
}

/// `count` consecutive copies of one child in a 1-D composition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Run {
    pub child: usize,
    pub count: BigUint,
}

/// A child placed with its lower-left corner at `(x, y)` relative to the
/// parent's lower-left corner.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Placement {
    pub child: usize,
    pub x: Scalar,
    pub y: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Composition {
    /// Left to right, run-length encoded.
    Line(Vec<Run>),
    Plane(Vec<Placement>),
}

impl Composition {
    /// Number of children of each type, as a vector over the level below.
    pub fn population(&self, width: usize) -> Vec<BigUint> {
        let mut pop = vec![BigUint::zero(); width];
        match self {
            Composition::Line(runs) => {
                for r in runs {
                    pop[r.child] += &r.count;
                }
            }
            Composition::Plane(ps) => {
                for p in ps {
                    pop[p.child] += 1u32;
                }
            }
        }
        pop
    }

    pub fn child_count(&self) -> BigUint {
        match self {
            Composition::Line(runs) => runs.iter().map(|r| &r.count).sum(),
            Composition::Plane(ps) => BigUint::from(ps.len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Composition::Line(runs) => runs.iter().all(|r| r.count.is_zero()),
            Composition::Plane(ps) => ps.is_empty(),
        }
    }

    /// Child sequence of a 1-D composition, expanded; `None` for 2-D or
    /// when longer than `cap`.
    pub fn word(&self, cap: u64) -> Option<Vec<usize>> {
        let Composition::Line(runs) = self else {
            return None;
        };
        let total = self.child_count().to_u64().filter(|&t| t <= cap)?;
        let mut w = Vec::with_capacity(total as usize);
        for r in runs {
            w.extend(std::iter::repeat_n(r.child, r.count.to_usize()?));
        }
        Some(w)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SupertileDef {
    pub level: usize,
    pub index: usize,
    pub name: String,
    /// Optional free-form label; no analysis reads it.
    pub label: Option<String>,
    pub composition: Composition,
}

/// One materialized level: names, shapes and (above level 0) compositions.
#[derive(Clone, Debug)]
pub struct Level {
    pub index: usize,
    pub names: Vec<String>,
    pub shapes: Vec<Shape>,
    pub defs: Vec<SupertileDef>,
}

impl Level {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest integer (in bits) a generator expression may produce.
    pub bit_bound: u64,
    /// Largest number of pieces an expansion or generated body may hold.
    pub expansion_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            bit_bound: 4096,
            expansion_cap: 10_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LevelSource {
    Program(RuleProgram),
    /// Level `k` is level `levels[k]` of `base`, with `levels[0] = 0`.
    Induced {
        base: Box<FusionRule>,
        levels: Vec<usize>,
    },
}

/// A fusion rule: prototiles plus a recipe for every level of supertiles.
///
/// Levels are materialized on demand and memoized; clones share the cache.
#[derive(Clone)]
pub struct FusionRule {
    dimension: usize,
    prototiles: Vec<Prototile>,
    source: LevelSource,
    recognizable: bool,
    origin: Option<String>,
    limits: Limits,
    cache: Arc<Mutex<BTreeMap<usize, Arc<Level>>>>,
}

impl PartialEq for FusionRule {
    fn eq(&self, o: &Self) -> bool {
        self.dimension == o.dimension
            && self.prototiles == o.prototiles
            && self.source == o.source
            && self.recognizable == o.recognizable
    }
}

impl fmt::Debug for FusionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FusionRule")
            .field("dimension", &self.dimension)
            .field("prototiles", &self.prototiles)
            .field("origin", &self.origin)
            .finish_non_exhaustive()
    }
}

impl FusionRule {
    pub fn new(dimension: usize, prototiles: Vec<Prototile>, program: RuleProgram) -> Result<Self> {
        if !(1..=2).contains(&dimension) {
            return Err(FusionError::InvalidArgument(format!(
                "dimension {dimension}"
            )));
        }
        if prototiles.is_empty() {
            return Err(FusionError::InvalidArgument("no prototiles".into()));
        }
        for (i, p) in prototiles.iter().enumerate() {
            if p.id != i {
                return Err(FusionError::InvalidArgument(format!(
                    "prototile `{}` has id {}",
                    p.label, p.id
                )));
            }
            if p.shape.dimension() != dimension {
                return Err(FusionError::InvalidArgument(format!(
                    "prototile `{}` does not match dimension {dimension}",
                    p.label
                )));
            }
            let (w, h) = p.shape.extent();
            if !w.is_positive() || (dimension == 2 && !h.is_positive()) {
                return Err(FusionError::InvalidArgument(format!(
                    "prototile `{}` has non-positive size",
                    p.label
                )));
            }
            if prototiles[..i].iter().any(|q| q.label == p.label) {
                return Err(FusionError::InvalidArgument(format!(
                    "duplicate label `{}`",
                    p.label
                )));
            }
        }
        Ok(FusionRule {
            dimension,
            prototiles,
            source: LevelSource::Program(program),
            recognizable: false,
            origin: None,
            limits: Limits::default(),
            cache: Arc::default(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn prototiles(&self) -> &[Prototile] {
        &self.prototiles
    }

    pub fn source(&self) -> &LevelSource {
        &self.source
    }

    pub fn program(&self) -> Option<&RuleProgram> {
        match &self.source {
            LevelSource::Program(p) => Some(p),
            LevelSource::Induced { .. } => None,
        }
    }

    pub fn recognizable(&self) -> bool {
        self.recognizable
    }

    pub fn with_recognizable(mut self, flag: bool) -> Self {
        self.recognizable = flag;
        self
    }

    pub fn origin(&self) -> Option<&str> {
        self.origin.as_deref()
    }

    pub fn with_origin(mut self, origin: impl Into<String>) -> Self {
        self.origin = Some(origin.into());
        self
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    /// Changes limits; the level cache is reset since generator results may differ.
    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self.cache = Arc::default();
        self
    }

    /// Highest level this rule defines, if finite.
    pub fn max_level(&self) -> Option<usize> {
        match &self.source {
            LevelSource::Program(p) => p.explicit_max(),
            LevelSource::Induced { base, levels } => {
                let top = base.max_level();
                match top {
                    None => Some(levels.len() - 1),
                    Some(t) => Some(levels.iter().take_while(|&&l| l <= t).count() - 1),
                }
            }
        }
    }

    pub fn level(&self, n: usize) -> Result<Arc<Level>> {
        if n == 0 {
            return Ok(Arc::new(self.level_zero()));
        }
        let mut cache = self.cache.lock().expect("level cache poisoned");
        if let Some(l) = cache.get(&n) {
            return Ok(l.clone());
        }
        let start = (1..n).rev().find(|k| cache.contains_key(k)).unwrap_or(0);
        let mut below = match start {
            0 => Arc::new(self.level_zero()),
            k => cache[&k].clone(),
        };
        for k in start + 1..=n {
            let lvl = Arc::new(self.build_level(k, &below)?);
            cache.insert(k, lvl.clone());
            below = lvl;
        }
        Ok(below)
    }

    /// The supertiles of level `n ≥ 1`.
    pub fn materialize_level(&self, n: usize) -> Result<Vec<SupertileDef>> {
        if n == 0 {
            return Err(FusionError::InvalidArgument(
                "level 0 holds prototiles, not supertiles".into(),
            ));
        }
        Ok(self.level(n)?.defs.clone())
    }

    pub fn type_count(&self, n: usize) -> Result<usize> {
        Ok(self.level(n)?.len())
    }

    pub fn shape(&self, n: usize, j: usize) -> Result<Shape> {
        let lvl = self.level(n)?;
        lvl.shapes
            .get(j)
            .cloned()
            .ok_or(FusionError::NoSuchSupertile { level: n, index: j })
    }

    /// Exact volume (length in 1-D, area in 2-D) of `P_n(j)`.
    pub fn volume(&self, n: usize, j: usize) -> Result<Scalar> {
        Ok(self.shape(n, j)?.volume())
    }

    pub fn volumes(&self, n: usize) -> Result<Vec<Scalar>> {
        Ok(self.level(n)?.shapes.iter().map(Shape::volume).collect())
    }

    /// Single-step transition matrix `M_{n-1,n}`, entry `(i, j)` counting
    /// `(n-1)`-supertiles of type `i` inside `P_n(j)`.
    pub fn step_matrix(&self, n: usize) -> Result<IntMatrix> {
        if n == 0 {
            return Err(FusionError::InvalidArgument("no step into level 0".into()));
        }
        let below = self.type_count(n - 1)?;
        let lvl = self.level(n)?;
        let mut m = IntMatrix::zeros(below, lvl.len());
        for (j, def) in lvl.defs.iter().enumerate() {
            for (i, c) in def.composition.population(below).into_iter().enumerate() {
                m.set(i, j, BigInt::from(c));
            }
        }
        Ok(m)
    }

    /// Common denominator `D` such that every length, multiplied by `D`,
    /// has integral rational and φ parts.
    pub fn coordinate_denominator(&self) -> BigInt {
        let mut d = BigInt::one();
        let mut absorb = |s: &Scalar| {
            d = d.lcm(s.rational_part().denom()).lcm(s.phi_part().denom());
        };
        for p in &self.prototiles {
            let (w, h) = p.shape.extent();
            absorb(&w);
            absorb(&h);
        }
        let prog = match &self.source {
            LevelSource::Program(prog) => prog,
            LevelSource::Induced { base, .. } => return d.lcm(&base.coordinate_denominator()),
        };
        {
            for b in &prog.blocks {
                for def in &b.defs {
                    if let program::Body::Placed(items) = &def.body {
                        for it in items {
                            absorb(&it.x);
                            absorb(&it.y);
                        }
                    }
                }
            }
        }
        d
    }

    /// Whether every prototile is a unit interval or unit square.
    pub fn has_unit_geometry(&self) -> bool {
        let one = Scalar::one();
        self.prototiles.iter().all(|p| match &p.shape {
            Shape::Interval(l) => *l == one,
            Shape::Rect { width, height } => *width == one && *height == one,
        })
    }

    /// The rule induced on the levels `levels` (which must start at 0 and
    /// increase): its level `k` is level `levels[k]` of `self`.
    pub fn induce(&self, levels: Vec<usize>) -> Result<FusionRule> {
        if levels.first() != Some(&0) || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FusionError::InvalidArgument(
                "induced levels must start at 0 and strictly increase".into(),
            ));
        }
        Ok(FusionRule {
            dimension: self.dimension,
            prototiles: self.prototiles.clone(),
            source: LevelSource::Induced {
                base: Box::new(self.clone()),
                levels,
            },
            recognizable: self.recognizable,
            origin: self.origin.as_ref().map(|o| format!("{o} (induced)")),
            limits: self.limits,
            cache: Arc::default(),
        })
    }

    /// Induced rule on the arithmetic level sequence `0, step, 2·step, …`
    /// up to `top` (inclusive, rounded down).
    pub fn induce_every(&self, step: usize, top: usize) -> Result<FusionRule> {
        if step == 0 {
            return Err(FusionError::InvalidArgument("induction step 0".into()));
        }
        self.induce((0..=top / step).map(|k| k * step).collect())
    }

    /// Base-rule level of induced level `k`, or `k` itself.
    pub fn base_level(&self, k: usize) -> usize {
        match &self.source {
            LevelSource::Induced { levels, .. } => levels.get(k).copied().unwrap_or(usize::MAX),
            LevelSource::Program(_) => k,
        }
    }

    fn level_zero(&self) -> Level {
        Level {
            index: 0,
            names: self.prototiles.iter().map(|p| p.label.clone()).collect(),
            shapes: self.prototiles.iter().map(|p| p.shape.clone()).collect(),
            defs: Vec::new(),
        }
    }

    fn build_level(&self, n: usize, below: &Level) -> Result<Level> {
        match &self.source {
            LevelSource::Program(prog) => {
                let block = prog
                    .block_for(n)
                    .ok_or(FusionError::LevelNotDefined { level: n })?;
                let ctx = EvalCtx {
                    level: n,
                    bit_bound: self.limits.bit_bound,
                    piece_cap: self.limits.expansion_cap,
                    program: prog,
                    below: Below {
                        names: &below.names,
                        shapes: &below.shapes,
                    },
                };
                let mut defs = Vec::with_capacity(block.defs.len());
                for (index, t) in block.defs.iter().enumerate() {
                    let composition = ctx.evaluate(t)?;
                    defs.push(SupertileDef {
                        level: n,
                        index,
                        name: t.name.clone(),
                        label: t.label.clone(),
                        composition,
                    });
                }
                self.finish_level(n, defs, below)
            }
            LevelSource::Induced { base, levels } => {
                let (&top, &bottom) = levels
                    .get(n)
                    .zip(levels.get(n - 1))
                    .ok_or(FusionError::LevelNotDefined { level: n })?;
                let lvl = base.level(top)?;
                let mut defs = Vec::with_capacity(lvl.len());
                for j in 0..lvl.len() {
                    let composition = base.flatten(top, j, bottom)?;
                    defs.push(SupertileDef {
                        level: n,
                        index: j,
                        name: lvl.names[j].clone(),
                        label: lvl.defs[j].label.clone(),
                        composition,
                    });
                }
                self.finish_level(n, defs, below)
            }
        }
    }

    fn finish_level(&self, n: usize, defs: Vec<SupertileDef>, below: &Level) -> Result<Level> {
        if defs.is_empty() {
            return Err(FusionError::GeneratorEval {
                level: n,
                reason: "no supertiles".into(),
            });
        }
        let mut shapes = Vec::with_capacity(defs.len());
        for def in &defs {
            shapes.push(self.shape_of(def, below)?);
        }
        Ok(Level {
            index: n,
            names: defs.iter().map(|d| d.name.clone()).collect(),
            shapes,
            defs,
        })
    }

    fn shape_of(&self, def: &SupertileDef, below: &Level) -> Result<Shape> {
        let bad_child = |child| FusionError::InvalidChildIndex {
            level: def.level,
            supertile: def.name.clone(),
            child,
        };
        match &def.composition {
            Composition::Line(runs) => {
                if self.dimension != 1 {
                    return Err(FusionError::WrongDimension { expected: 1 });
                }
                // sum counts per type first; scalar arithmetic is comparatively slow
                let mut totals = vec![BigUint::zero(); below.shapes.len()];
                for r in runs {
                    *totals.get_mut(r.child).ok_or_else(|| bad_child(r.child))? += &r.count;
                }
                let mut len = Scalar::zero();
                for (s, c) in below.shapes.iter().zip(totals) {
                    if !c.is_zero() {
                        len += &(s.volume() * Scalar::from_int(BigInt::from(c)));
                    }
                }
                Ok(Shape::Interval(len))
            }
            Composition::Plane(ps) => {
                if self.dimension != 2 {
                    return Err(FusionError::WrongDimension { expected: 2 });
                }
                let mut max_x = Scalar::zero();
                let mut max_y = Scalar::zero();
                for p in ps {
                    let (w, h) = below
                        .shapes
                        .get(p.child)
                        .ok_or_else(|| bad_child(p.child))?
                        .extent();
                    max_x = max_x.max(&p.x + &w);
                    max_y = max_y.max(&p.y + &h);
                }
                Ok(Shape::Rect {
                    width: max_x,
                    height: max_y,
                })
            }
        }
    }

    /// Composition of `P_n(j)` in terms of level-`t` supertiles (`t < n`),
    /// with exact offsets. Meant for desk-scale inductions.
    pub fn flatten(&self, n: usize, j: usize, t: usize) -> Result<Composition> {
        if t >= n {
            return Err(FusionError::InvalidArgument(format!("flatten {n} -> {t}")));
        }
        let lvl = self.level(n)?;
        let def = lvl
            .defs
            .get(j)
            .ok_or(FusionError::NoSuchSupertile { level: n, index: j })?;
        if t + 1 == n {
            return Ok(def.composition.clone());
        }
        match &def.composition {
            Composition::Line(runs) => {
                let mut out: Vec<Run> = Vec::new();
                let mut pieces = 0u64;
                for r in runs {
                    let Composition::Line(inner) = self.flatten(n - 1, r.child, t)? else {
                        unreachable!()
                    };
                    let reps = r.count.to_u64().unwrap_or(u64::MAX);
                    if inner.len() == 1 {
                        let run = Run {
                            child: inner[0].child,
                            count: &inner[0].count * &r.count,
                        };
                        push(&mut out, run);
                        continue;
                    }
                    pieces = pieces.saturating_add(reps.saturating_mul(inner.len() as u64));
                    if pieces > self.limits.expansion_cap {
                        return Err(FusionError::ExpansionTooLarge {
                            count: BigInt::from(pieces),
                            cap: self.limits.expansion_cap,
                        });
                    }
                    for _ in 0..reps {
                        for run in &inner {
                            push(&mut out, run.clone());
                        }
                    }
                }
                Ok(Composition::Line(out))
            }
            Composition::Plane(ps) => {
                let mut out = Vec::new();
                for p in ps {
                    let Composition::Plane(inner) = self.flatten(n - 1, p.child, t)? else {
                        unreachable!()
                    };
                    for q in inner {
                        out.push(Placement {
                            child: q.child,
                            x: &p.x + &q.x,
                            y: &p.y + &q.y,
                        });
                    }
                    if out.len() as u64 > self.limits.expansion_cap {
                        return Err(FusionError::ExpansionTooLarge {
                            count: BigInt::from(out.len()),
                            cap: self.limits.expansion_cap,
                        });
                    }
                }
                Ok(Composition::Plane(out))
            }
        }
    }
}

fn push(out: &mut Vec<Run>, run: Run) {
    match out.last_mut() {
        Some(last) if last.child == run.child => last.count += run.count,
        _ => out.push(run),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ruledsl::catalog::catalog;

    #[test]
    fn two_measures_first_level() {
        let rule = catalog("two_measures", &Default::default()).unwrap();
        let l1 = rule.level(1).unwrap();
        assert_eq!(
            l1.defs[0].composition.word(100).unwrap(),
            [vec![0; 10], vec![1]].concat()
        );
        assert_eq!(
            l1.defs[1].composition.word(100).unwrap(),
            [vec![1; 10], vec![0]].concat()
        );
    }

    #[test]
    fn materialization_is_deterministic() {
        let rule = catalog("coincidence_waiting", &Default::default()).unwrap();
        let a = rule.materialize_level(3).unwrap();
        let fresh = catalog("coincidence_waiting", &Default::default()).unwrap();
        let _ = fresh.materialize_level(1).unwrap();
        assert_eq!(a, fresh.materialize_level(3).unwrap());
        assert_eq!(a, rule.materialize_level(3).unwrap());
    }

    #[test]
    fn chacon_second_level_word() {
        let rule = catalog("chacon", &Default::default()).unwrap();
        let Composition::Line(_) = rule.flatten(2, 0, 0).unwrap() else {
            panic!()
        };
        let w = rule.flatten(2, 0, 0).unwrap().word(100).unwrap();
        let s: String = w.iter().map(|&c| if c == 0 { 'a' } else { 'b' }).collect();
        assert_eq!(s, "aabaaababaaba");
    }

    #[test]
    fn volumes() {
        let dpv = catalog("fibonacci_dpv", &Default::default()).unwrap();
        assert_eq!(dpv.volume(1, 0).unwrap(), Scalar::from_int(4));
        assert_eq!(dpv.volume(0, 2).unwrap(), Scalar::one());
        let cw = catalog("coincidence_waiting", &Default::default()).unwrap();
        for n in 1..=4u32 {
            let expected: BigInt = (1..=n).map(|j| BigInt::from(10).pow(j) + 2).product();
            assert_eq!(
                cw.volume(n as usize, 0).unwrap(),
                Scalar::from_int(expected.clone())
            );
            assert_eq!(
                cw.volume(n as usize, 1).unwrap(),
                Scalar::from_int(expected)
            );
        }
    }

    #[test]
    fn explicit_rule_beyond_declared_levels() {
        let rule =
            crate::ruledsl::parse_rule_str("dim 1\ntile a len 1\nlevel 1: a -> a a\n").unwrap();
        assert_eq!(rule.max_level(), Some(1));
        assert!(matches!(
            rule.level(2),
            Err(FusionError::LevelNotDefined { level: 2 })
        ));
    }

    #[test]
    fn induced_rule_matches_product() {
        let fib = catalog("fibonacci_1d", &Default::default()).unwrap();
        let ind = fib.induce_every(2, 10).unwrap();
        assert_eq!(
            ind.step_matrix(1).unwrap(),
            IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]])
        );
        assert_eq!(ind.volume(2, 0).unwrap(), fib.volume(4, 0).unwrap());
    }
}
