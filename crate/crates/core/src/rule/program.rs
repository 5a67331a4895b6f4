//! Level templates: the declarative description of how each level is fused
//! from the one below, possibly depending on the level index `n`.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

use super::{Composition, Placement, Run, Shape};
use crate::error::{FusionError, Result};
use crate::ruledsl::expr::IntExpr;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Odd,
    Even,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LevelSelector {
    /// `level k:`, exactly one level.
    Exact(usize),
    /// `level(n) from k [odd|even]:`, every matching level `n ≥ k`.
    From {
        start: usize,
        parity: Option<Parity>,
    },
}

impl LevelSelector {
    pub fn matches(&self, n: usize) -> bool {
        match *self {
            LevelSelector::Exact(k) => k == n,
            LevelSelector::From { start, parity } => {
                n >= start
                    && match parity {
                        None => true,
                        Some(Parity::Odd) => n % 2 == 1,
                        Some(Parity::Even) => n.is_multiple_of(2),
                    }
            }
        }
    }
}

/// One repeated reference inside a 1-D body.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum WordItem {
    /// `name` or `name^(expr)`.
    Repeat { name: String, count: IntExpr },
    /// `sigma^(expr)[seed]`: the word obtained by iterating a declared
    /// substitution on `seed`, read as names of the level below.
    Iterate {
        subst: String,
        power: IntExpr,
        seed: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GridItem {
    Repeat { name: String, count: IntExpr },
    Block(Grid),
}

/// Rows listed top to bottom, cells left to right.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    pub rows: Vec<Vec<GridItem>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlacedItem {
    pub name: String,
    pub x: Scalar,
    pub y: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Body {
    Word(Vec<WordItem>),
    Grid(Grid),
    Placed(Vec<PlacedItem>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TemplateDef {
    pub name: String,
    pub label: Option<String>,
    pub body: Body,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LevelBlock {
    pub selector: LevelSelector,
    pub defs: Vec<TemplateDef>,
}

/// A 1-D substitution usable through `WordItem::Iterate`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Substitution {
    pub name: String,
    /// letter → image as runs of letters
    pub images: Vec<(String, Vec<(String, IntExpr)>)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RuleProgram {
    pub substitutions: Vec<Substitution>,
    pub blocks: Vec<LevelBlock>,
}

impl RuleProgram {
    /// Block governing level `n`: an exact declaration wins, otherwise the
    /// first matching parametric block in declaration order.
    pub fn block_for(&self, n: usize) -> Option<&LevelBlock> {
        self.blocks
            .iter()
            .find(|b| b.selector == LevelSelector::Exact(n))
            .or_else(|| {
                self.blocks.iter().find(|b| {
                    !matches!(b.selector, LevelSelector::Exact(_)) && b.selector.matches(n)
                })
            })
    }

    /// Largest level reachable when no parametric block exists.
    pub fn explicit_max(&self) -> Option<usize> {
        if self
            .blocks
            .iter()
            .any(|b| !matches!(b.selector, LevelSelector::Exact(_)))
        {
            return None;
        }
        let mut n = 0;
        while self.block_for(n + 1).is_some() {
            n += 1;
        }
        Some(n)
    }
}

/// What a template evaluator knows about the level below.
pub(crate) struct Below<'a> {
    pub names: &'a [String],
    pub shapes: &'a [Shape],
}

pub(crate) struct EvalCtx<'a> {
    pub level: usize,
    pub bit_bound: u64,
    pub piece_cap: u64,
    pub program: &'a RuleProgram,
    pub below: Below<'a>,
}

impl EvalCtx<'_> {
    fn err(&self, reason: impl Into<String>) -> FusionError {
        FusionError::GeneratorEval {
            level: self.level,
            reason: reason.into(),
        }
    }

    fn lookup(&self, name: &str) -> Result<usize> {
        self.below
            .names
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| self.err(format!("unknown name `{name}` at level {}", self.level - 1)))
    }

    fn count(&self, e: &IntExpr) -> Result<BigUint> {
        let v = e
            .eval(self.level as u64, self.bit_bound)
            .map_err(|err| self.err(format!("`{e}`: {err}")))?;
        if !v.is_positive() {
            return Err(self.err(format!("`{e}` evaluates to non-positive {v}")));
        }
        Ok(v.magnitude().clone())
    }

    fn small_count(&self, e: &IntExpr) -> Result<usize> {
        let c = self.count(e)?;
        c.to_usize()
            .filter(|&c| (c as u64) <= self.piece_cap)
            .ok_or_else(|| self.err(format!("`{e}` = {c} exceeds the piece cap")))
    }

    pub fn evaluate(&self, def: &TemplateDef) -> Result<Composition> {
        match &def.body {
            Body::Word(items) => self.word(items).map(Composition::Line),
            Body::Grid(grid) => {
                let mut out = Vec::new();
                self.grid(grid, &Scalar::zero(), &Scalar::zero(), &mut out)?;
                Ok(Composition::Plane(out))
            }
            Body::Placed(items) => items
                .iter()
                .map(|p| {
                    Ok(Placement {
                        child: self.lookup(&p.name)?,
                        x: p.x.clone(),
                        y: p.y.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(Composition::Plane),
        }
    }

    fn word(&self, items: &[WordItem]) -> Result<Vec<Run>> {
        let mut runs: Vec<Run> = Vec::new();
        for item in items {
            match item {
                WordItem::Repeat { name, count } => {
                    push_run(&mut runs, self.lookup(name)?, self.count(count)?);
                }
                WordItem::Iterate { subst, power, seed } => {
                    let k = self.count_allow_zero(power)?;
                    for (letter, c) in self.iterate(subst, k, seed)? {
                        push_run(&mut runs, self.lookup(&letter)?, c);
                    }
                }
            }
            if runs.len() as u64 > self.piece_cap {
                return Err(self.err("word exceeds the piece cap"));
            }
        }
        if runs.is_empty() {
            return Err(self.err("empty composition"));
        }
        Ok(runs)
    }

    fn count_allow_zero(&self, e: &IntExpr) -> Result<usize> {
        let v = e
            .eval(self.level as u64, self.bit_bound)
            .map_err(|err| self.err(format!("`{e}`: {err}")))?;
        if v.is_negative() {
            return Err(self.err(format!("`{e}` evaluates to negative {v}")));
        }
        v.to_usize()
            .ok_or_else(|| self.err(format!("iteration count `{e}` too large")))
    }

    /// Run-length encoded `σ^k(seed)`.
    fn iterate(&self, subst: &str, k: usize, seed: &str) -> Result<Vec<(String, BigUint)>> {
        let sub = self
            .program
            .substitutions
            .iter()
            .find(|s| s.name == subst)
            .ok_or_else(|| self.err(format!("unknown substitution `{subst}`")))?;
        let letters: Vec<&str> = sub.images.iter().map(|(l, _)| l.as_str()).collect();
        let index = |l: &str| {
            letters
                .iter()
                .position(|x| *x == l)
                .ok_or_else(|| self.err(format!("`{l}` is not a letter of `{subst}`")))
        };
        let mut images: Vec<Vec<(usize, u64)>> = Vec::with_capacity(letters.len());
        for (_, img) in &sub.images {
            let mut runs = Vec::new();
            for (l, e) in img {
                let c = self.small_count(e)? as u64;
                push_pair(&mut runs, index(l)?, c);
            }
            images.push(runs);
        }
        let too_long = || self.err("substitution iterate exceeds the piece cap");
        let mut word: Vec<(usize, u64)> = vec![(index(seed)?, 1)];
        for _ in 0..k {
            let mut next: Vec<(usize, u64)> = Vec::new();
            for &(letter, count) in &word {
                let img = &images[letter];
                if img.len() == 1 {
                    push_pair(
                        &mut next,
                        img[0].0,
                        img[0].1.checked_mul(count).ok_or_else(too_long)?,
                    );
                    continue;
                }
                if count.saturating_mul(img.len() as u64) > self.piece_cap {
                    return Err(too_long());
                }
                for _ in 0..count {
                    for &(l, c) in img {
                        push_pair(&mut next, l, c);
                    }
                }
                if next.len() as u64 > self.piece_cap {
                    return Err(too_long());
                }
            }
            word = next;
        }
        Ok(word
            .into_iter()
            .map(|(l, c)| (letters[l].to_string(), BigUint::from(c)))
            .collect())
    }

    /// Lays out a grid with its lower-left corner at `(x0, y0)`; returns its size.
    fn grid(
        &self,
        grid: &Grid,
        x0: &Scalar,
        y0: &Scalar,
        out: &mut Vec<Placement>,
    ) -> Result<(Scalar, Scalar)> {
        if grid.rows.is_empty() {
            return Err(self.err("empty grid"));
        }
        // measure every row first, then place bottom-up
        let mut row_sizes = Vec::with_capacity(grid.rows.len());
        for row in &grid.rows {
            row_sizes.push(self.measure_row(row)?);
        }
        let width = row_sizes[0].0.clone();
        if let Some((w, _)) = row_sizes.iter().find(|(w, _)| *w != width) {
            return Err(self.err(format!("grid rows of unequal width ({width} vs {w})")));
        }
        let mut y = y0.clone();
        for (row, (_, h)) in grid.rows.iter().zip(&row_sizes).rev() {
            let mut x = x0.clone();
            for item in row {
                match item {
                    GridItem::Repeat { name, count } => {
                        let child = self.lookup(name)?;
                        let (w, _) = self.below.shapes[child].extent();
                        for _ in 0..self.small_count(count)? {
                            out.push(Placement {
                                child,
                                x: x.clone(),
                                y: y.clone(),
                            });
                            x += &w;
                        }
                    }
                    GridItem::Block(g) => {
                        let (w, _) = self.grid(g, &x, &y, out)?;
                        x += &w;
                    }
                }
                if out.len() as u64 > self.piece_cap {
                    return Err(self.err("grid exceeds the piece cap"));
                }
            }
            y += h;
        }
        let height = &y - y0;
        Ok((width, height))
    }

    fn measure_row(&self, row: &[GridItem]) -> Result<(Scalar, Scalar)> {
        let mut width = Scalar::zero();
        let mut height: Option<Scalar> = None;
        for item in row {
            let (w, h) = match item {
                GridItem::Repeat { name, count } => {
                    let (w, h) = self.below.shapes[self.lookup(name)?].extent();
                    let c = Scalar::from_int(BigInt::from(self.small_count(count)?));
                    (&w * &c, h)
                }
                GridItem::Block(g) => self.measure_grid(g)?,
            };
            width += &w;
            match &height {
                None => height = Some(h),
                Some(prev) if *prev != h => {
                    return Err(
                        self.err(format!("cells of unequal height in a row ({prev} vs {h})"))
                    )
                }
                _ => {}
            }
        }
        Ok((width, height.ok_or_else(|| self.err("empty grid row"))?))
    }

    fn measure_grid(&self, grid: &Grid) -> Result<(Scalar, Scalar)> {
        let mut width: Option<Scalar> = None;
        let mut height = Scalar::zero();
        for row in &grid.rows {
            let (w, h) = self.measure_row(row)?;
            if width.as_ref().is_some_and(|prev| *prev != w) {
                return Err(self.err("grid rows of unequal width"));
            }
            width = Some(w);
            height += &h;
        }
        Ok((width.ok_or_else(|| self.err("empty grid"))?, height))
    }
}

fn push_run(runs: &mut Vec<Run>, child: usize, count: BigUint) {
    match runs.last_mut() {
        Some(last) if last.child == child => last.count += count,
        _ => runs.push(Run { child, count }),
    }
}

fn push_pair(runs: &mut Vec<(usize, u64)>, letter: usize, count: u64) {
    match runs.last_mut() {
        Some((l, c)) if *l == letter => *c += count,
        _ => runs.push((letter, count)),
    }
}

/// Names declared at each level, for reference checking without evaluation.
pub(crate) fn names_by_level(program: &RuleProgram, n: usize) -> Option<Vec<String>> {
    program
        .block_for(n)
        .map(|b| b.defs.iter().map(|d| d.name.clone()).collect())
}
