//! Canonical text form of a rule; parsing it back gives an equal rule.

use std::fmt::Write;

use crate::error::Result;
use crate::rule::program::{Body, Grid, GridItem, LevelBlock, LevelSelector, Parity, WordItem};
use crate::rule::{Composition, FusionRule, LevelSource, Shape};
use crate::ruledsl::expr::IntExpr;

/// Prints `rule` in the `.fuse` language.
///
/// Program rules print their templates. Induced rules have no template form,
/// so their (finitely many) levels are materialized and printed explicitly.
pub fn print_rule(rule: &FusionRule) -> Result<String> {
    let mut out = header(rule);
    match rule.source() {
        LevelSource::Program(prog) => {
            for s in &prog.substitutions {
                let images: Vec<String> = s
                    .images
                    .iter()
                    .map(|(l, img)| {
                        let body: Vec<String> = img.iter().map(|(x, c)| repeated(x, c)).collect();
                        format!("{l} -> {}", body.join(" "))
                    })
                    .collect();
                writeln!(out, "subst {}: {}", s.name, images.join(" ; ")).unwrap();
            }
            for b in &prog.blocks {
                out.push_str(&block(b));
                out.push('\n');
            }
        }
        LevelSource::Induced { .. } => {
            let top = rule.max_level().unwrap_or(0);
            for n in 1..=top {
                out.push_str(&explicit_level(rule, n)?);
                out.push('\n');
            }
        }
    }
    Ok(out)
}

fn header(rule: &FusionRule) -> String {
    let mut out = format!("dim {}\n", rule.dimension());
    for p in rule.prototiles() {
        match &p.shape {
            Shape::Interval(l) => writeln!(out, "tile {} len {l}", p.label).unwrap(),
            Shape::Rect { width, height } => {
                writeln!(out, "tile {} size {width} x {height}", p.label).unwrap()
            }
        }
    }
    if rule.recognizable() {
        out.push_str("recognizable\n");
    }
    out
}

fn label(name: &str, label: &Option<String>) -> String {
    match label {
        Some(l) => format!("{name} \"{l}\""),
        None => name.to_string(),
    }
}

fn repeated(name: &str, count: &IntExpr) -> String {
    match count {
        IntExpr::Lit(v) if *v == 1.into() => name.to_string(),
        e => format!("{name}^({e})"),
    }
}

fn block(b: &LevelBlock) -> String {
    let head = match b.selector {
        LevelSelector::Exact(k) => format!("level {k}"),
        LevelSelector::From { start, parity } => {
            let mut h = "level(n)".to_string();
            if start != 1 {
                write!(h, " from {start}").unwrap();
            }
            match parity {
                Some(Parity::Odd) => h.push_str(" odd"),
                Some(Parity::Even) => h.push_str(" even"),
                None => {}
            }
            h
        }
    };
    let defs: Vec<String> = b
        .defs
        .iter()
        .map(|d| format!("{} -> {}", label(&d.name, &d.label), body(&d.body)))
        .collect();
    format!("{head}: {}", defs.join(" ; "))
}

fn body(b: &Body) -> String {
    match b {
        Body::Word(items) => items
            .iter()
            .map(|it| match it {
                WordItem::Repeat { name, count } => repeated(name, count),
                WordItem::Iterate { subst, power, seed } => format!("{subst}^({power})[{seed}]"),
            })
            .collect::<Vec<_>>()
            .join(" "),
        Body::Grid(g) => grid(g),
        Body::Placed(items) => {
            let parts: Vec<String> = items
                .iter()
                .map(|p| format!("{}@({}, {})", p.name, p.x, p.y))
                .collect();
            format!("{{ {} }}", parts.join(" "))
        }
    }
}

fn grid(g: &Grid) -> String {
    let rows: Vec<String> = g
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|it| match it {
                    GridItem::Repeat { name, count } => repeated(name, count),
                    GridItem::Block(inner) => grid(inner),
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    format!("[{}]", rows.join(" / "))
}

fn explicit_level(rule: &FusionRule, n: usize) -> Result<String> {
    let below = rule.level(n - 1)?;
    let lvl = rule.level(n)?;
    let defs: Vec<String> = lvl
        .defs
        .iter()
        .map(|d| {
            let body = match &d.composition {
                Composition::Line(runs) => runs
                    .iter()
                    .map(|r| repeated(&below.names[r.child], &IntExpr::Lit(r.count.clone().into())))
                    .collect::<Vec<_>>()
                    .join(" "),
                Composition::Plane(ps) => {
                    let parts: Vec<String> = ps
                        .iter()
                        .map(|p| format!("{}@({}, {})", below.names[p.child], p.x, p.y))
                        .collect();
                    format!("{{ {} }}", parts.join(" "))
                }
            };
            format!("{} -> {body}", label(&d.name, &d.label))
        })
        .collect();
    Ok(format!("level {n}: {}", defs.join(" ; ")))
}
