//! The `.fuse` rule language and the built-in catalog.
//!
//! ```text
//! # two measures
//! dim 1
//! tile a len 1
//! tile b len 1
//! level(n): a -> a^(10^n) b ; b -> b^(10^n) a
//! ```

pub mod catalog;
pub mod expr;
mod lexer;
mod parse;
mod print;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::error::FusionError;
use crate::rule::program::{names_by_level, LevelSelector, RuleProgram};
use crate::rule::{validate, FusionRule, Prototile};

pub use catalog::{catalog, catalog_names, CatalogError};
pub use expr::{EvalError, IntExpr};
pub use parse::{parse_int_expr, parse_scalar};
pub use print::print_rule;

/// Rule text together with where it came from (a path or a catalog name).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSource {
    pub text: String,
    pub origin: String,
}

impl RuleSource {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        RuleSource {
            text: text.into(),
            origin: origin.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: expected {}, found {found}", .expected.join(" or "))]
    Syntax {
        line: usize,
        col: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("{line}:{col}: undefined symbol `{name}`")]
    UndefinedSymbol {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: dimension mismatch: {detail}")]
    DimensionMismatch {
        line: usize,
        col: usize,
        detail: String,
    },
    #[error("{line}:{col}: invalid rule: {detail}")]
    Invalid {
        line: usize,
        col: usize,
        detail: String,
    },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match *self {
            ParseError::Syntax { line, col, .. }
            | ParseError::UndefinedSymbol { line, col, .. }
            | ParseError::DimensionMismatch { line, col, .. }
            | ParseError::Invalid { line, col, .. } => (line, col),
        }
    }
}

/// Levels materialized and validated while parsing.
const PARSE_HORIZON: usize = 2;

pub fn parse_rule_str(text: &str) -> Result<FusionRule, ParseError> {
    parse_rule(&RuleSource::new(text, "<string>"))
}

/// Parses and validates a rule file.
pub fn parse_rule(src: &RuleSource) -> Result<FusionRule, ParseError> {
    let toks = lexer::tokenize(&src.text)?;
    let parsed = parse::Parser::new(toks).file()?;
    let (dl, dc) = parsed.dim_site;
    if parsed.tiles.is_empty() {
        return Err(ParseError::Invalid {
            line: dl,
            col: dc,
            detail: "no tiles declared".into(),
        });
    }
    if parsed.program.blocks.is_empty() {
        return Err(ParseError::Invalid {
            line: dl,
            col: dc,
            detail: "no levels declared".into(),
        });
    }
    check_duplicates(&parsed)?;
    check_references(&parsed)?;

    let prototiles: Vec<Prototile> = parsed
        .tiles
        .iter()
        .enumerate()
        .map(|(id, (label, shape, _, _))| Prototile {
            id,
            label: label.clone(),
            shape: shape.clone(),
        })
        .collect();
    let rule = FusionRule::new(parsed.dim, prototiles, parsed.program.clone())
        .map_err(|e| ParseError::Invalid {
            line: dl,
            col: dc,
            detail: e.to_string(),
        })?
        .with_recognizable(parsed.recognizable)
        .with_origin(src.origin.clone());

    let report = validate(&rule, PARSE_HORIZON);
    if let Some(v) = report.violations.first() {
        let (line, col) = site_for(&parsed, v.level, v.supertile.as_deref());
        let is_geometry = v.message.contains("unequal");
        return Err(if is_geometry {
            ParseError::DimensionMismatch {
                line,
                col,
                detail: v.to_string(),
            }
        } else {
            ParseError::Invalid {
                line,
                col,
                detail: v.to_string(),
            }
        });
    }
    Ok(rule)
}

/// Position of the body of `supertile` in the block governing `level`.
fn site_for(parsed: &parse::Parsed, level: usize, supertile: Option<&str>) -> (usize, usize) {
    let prog = &parsed.program;
    let Some(block) = prog.block_for(level) else {
        return parsed.dim_site;
    };
    let bi = prog
        .blocks
        .iter()
        .position(|b| std::ptr::eq(b, block))
        .unwrap_or(0);
    let di = supertile.and_then(|s| block.defs.iter().position(|d| d.name == s));
    match di {
        Some(di) => parsed
            .bodies
            .iter()
            .find(|b| b.block == bi && b.def == di)
            .map_or(parsed.block_sites[bi], |b| (b.line, b.col)),
        None => parsed.block_sites[bi],
    }
}

fn check_duplicates(parsed: &parse::Parsed) -> Result<(), ParseError> {
    let mut seen = BTreeSet::new();
    for (name, _, line, col) in &parsed.tiles {
        if !seen.insert(name.as_str()) {
            return Err(ParseError::Invalid {
                line: *line,
                col: *col,
                detail: format!("tile `{name}` declared twice"),
            });
        }
    }
    let mut subs = BTreeSet::new();
    for s in &parsed.program.substitutions {
        if !subs.insert(s.name.as_str()) {
            let (line, col) = parsed.dim_site;
            return Err(ParseError::Invalid {
                line,
                col,
                detail: format!("substitution `{}` declared twice", s.name),
            });
        }
    }
    let mut exact = BTreeSet::new();
    for (i, b) in parsed.program.blocks.iter().enumerate() {
        let (line, col) = parsed.block_sites[i];
        if let LevelSelector::Exact(k) = b.selector {
            if !exact.insert(k) {
                return Err(ParseError::Invalid {
                    line,
                    col,
                    detail: format!("level {k} declared twice"),
                });
            }
        }
        let mut names = BTreeSet::new();
        for d in &b.defs {
            if !names.insert(d.name.as_str()) {
                return Err(ParseError::Invalid {
                    line,
                    col,
                    detail: format!("supertile `{}` declared twice in one level", d.name),
                });
            }
        }
    }
    Ok(())
}

/// Levels at which a block is checked for undefined names.
fn sample_levels(prog: &RuleProgram, block: usize) -> Vec<usize> {
    let b = &prog.blocks[block];
    match b.selector {
        LevelSelector::Exact(k) => vec![k],
        LevelSelector::From { start, .. } => (start..start + 6)
            .filter(|&n| prog.block_for(n).is_some_and(|g| std::ptr::eq(g, b)))
            .take(2)
            .collect(),
    }
}

fn check_references(parsed: &parse::Parsed) -> Result<(), ParseError> {
    let prog = &parsed.program;
    let tiles: Vec<String> = parsed.tiles.iter().map(|t| t.0.clone()).collect();
    for bi in 0..prog.blocks.len() {
        for n in sample_levels(prog, bi) {
            let below = if n == 1 {
                tiles.clone()
            } else {
                match names_by_level(prog, n - 1) {
                    Some(names) => names,
                    None => {
                        let (line, col) = parsed.block_sites[bi];
                        return Err(ParseError::Invalid {
                            line,
                            col,
                            detail: format!(
                                "level {n} refers to level {} which is not declared",
                                n - 1
                            ),
                        });
                    }
                }
            };
            for r in parsed.refs.iter().filter(|r| r.block == bi) {
                let undefined = |name: &str| ParseError::UndefinedSymbol {
                    line: r.line,
                    col: r.col,
                    name: name.to_string(),
                };
                match &r.via_subst {
                    None => {
                        if !below.contains(&r.name) {
                            return Err(undefined(&r.name));
                        }
                    }
                    Some(sub) => {
                        let s = prog
                            .substitutions
                            .iter()
                            .find(|s| &s.name == sub)
                            .ok_or_else(|| undefined(sub))?;
                        if !s.images.iter().any(|(l, _)| *l == r.name) {
                            return Err(undefined(&r.name));
                        }
                        for (letter, image) in &s.images {
                            for name in std::iter::once(letter).chain(image.iter().map(|(l, _)| l))
                            {
                                if !below.contains(name) {
                                    return Err(undefined(name));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

impl From<ParseError> for FusionError {
    fn from(e: ParseError) -> Self {
        FusionError::InvalidArgument(e.to_string())
    }
}
