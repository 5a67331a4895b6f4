use std::fmt;

use super::{Composition, FusionRule, Level, Limits};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub level: usize,
    pub supertile: Option<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.supertile {
            Some(s) => write!(f, "level {}, supertile {s}: {}", self.level, self.message),
            None => write!(f, "level {}: {}", self.level, self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    /// Highest level actually checked.
    pub checked_to: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every level `1..=horizon` (or up to the rule's last level).
pub fn validate(rule: &FusionRule, horizon: usize) -> ValidationReport {
    let top = rule.max_level().map_or(horizon, |m| m.min(horizon));
    let mut violations = Vec::new();
    let mut checked_to = 0;
    // a second instance with a cold cache, to confirm generator determinism
    let fresh = rule.clone().with_limits(Limits { ..rule.limits() });
    for n in 1..=top {
        let lvl = match rule.level(n) {
            Ok(l) => l,
            Err(e) => {
                violations.push(Violation {
                    level: n,
                    supertile: None,
                    message: e.to_string(),
                });
                break;
            }
        };
        checked_to = n;
        let below = rule.level(n - 1).expect("lower level already materialized");
        for def in &lvl.defs {
            if def.composition.is_empty() {
                violations.push(Violation {
                    level: n,
                    supertile: Some(def.name.clone()),
                    message: "empty composition".into(),
                });
            }
            if let Composition::Plane(_) = def.composition {
                if let Some(msg) = check_exact_tiling(def, &below, &lvl) {
                    violations.push(Violation {
                        level: n,
                        supertile: Some(def.name.clone()),
                        message: msg,
                    });
                }
            }
        }
        if lvl
            .names
            .iter()
            .enumerate()
            .any(|(i, a)| lvl.names[..i].contains(a))
        {
            violations.push(Violation {
                level: n,
                supertile: None,
                message: "duplicate supertile names".into(),
            });
        }
        match fresh.level(n) {
            Ok(again) if again.defs == lvl.defs => {}
            _ => violations.push(Violation {
                level: n,
                supertile: None,
                message: "re-materializing the level gave a different result".into(),
            }),
        }
    }
    ValidationReport {
        checked_to,
        violations,
    }
}

/// Children must be pairwise interior-disjoint and cover the bounding box.
fn check_exact_tiling(def: &super::SupertileDef, below: &Level, lvl: &Level) -> Option<String> {
    let Composition::Plane(ps) = &def.composition else {
        return None;
    };
    let (width, height) = lvl.shapes[def.index].extent();
    let mut rects: Vec<(Scalar, Scalar, Scalar, Scalar, usize)> = Vec::with_capacity(ps.len());
    let mut area = Scalar::from_int(0);
    for (k, p) in ps.iter().enumerate() {
        let (w, h) = below.shapes[p.child].extent();
        if p.x.is_negative() || p.y.is_negative() {
            return Some(format!(
                "child #{k} ({}) placed at negative offset",
                below.names[p.child]
            ));
        }
        area += &(&w * &h);
        rects.push((p.x.clone(), &p.x + &w, p.y.clone(), &p.y + &h, k));
    }
    rects.sort_by(|a, b| a.0.cmp(&b.0));
    // sweep in x; the active set holds rectangles still open at the current left edge
    let mut active: Vec<usize> = Vec::new();
    for i in 0..rects.len() {
        active.retain(|&a| rects[a].1 > rects[i].0);
        for &a in &active {
            let (ra, rb) = (&rects[a], &rects[i]);
            if ra.2 < rb.3 && rb.2 < ra.3 {
                return Some(format!(
                    "children #{} ({}) and #{} ({}) overlap",
                    ra.4, below.names[ps[ra.4].child], rb.4, below.names[ps[rb.4].child]
                ));
            }
        }
        active.push(i);
    }
    if area != &width * &height {
        return Some(format!(
            "children cover area {area} of bounding box {width} x {height}"
        ));
    }
    None
}
