//! One function per subcommand; each returns the text to print.

use fusion_lab::cohomology::{ap_complex, h1_direct_limit, BorderForcing};
use fusion_lab::engine::{expand as expand_patch, primitivity, PrimitivityVerdict};
use fusion_lab::entropy::{complexity, entropy_estimate, zero_entropy_bound, ZeroEntropyVerdict};
use fusion_lab::measures::{unique_ergodicity, ErgodicityCertificate, ErgodicityTolerances};
use fusion_lab::ruledsl::parse_scalar;
use fusion_lab::spectral::{constant_length_profile, eigenvalue_test, EigenTolerances};
use fusion_lab::{print_rule, validate, FusionError, FusionRule, Scalar, Shape};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::json::{bools, int, matrix, rationals, scalar, scalars};
use crate::render::svg;
use crate::{load_rule, CliError, ExpandArgs, Format, Passes, RuleArgs};

fn report(
    rule: &FusionRule,
    origin: &str,
    command: &str,
    parameters: Value,
    results: Value,
) -> Result<String, CliError> {
    let canonical = print_rule(rule)?;
    let hash = hex::encode(Sha256::digest(canonical.as_bytes()));
    let doc = json!({
        "schema": 1,
        "toolVersion": env!("CARGO_PKG_VERSION"),
        "ruleHash": hash,
        "rule": origin,
        "command": command,
        "parameters": parameters,
        "results": results,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    text.push('\n');
    Ok(text)
}

fn names(rule: &FusionRule, n: usize) -> Result<Vec<String>, FusionError> {
    Ok(rule.level(n)?.names.clone())
}

pub fn analyze(args: &RuleArgs, horizon: usize, passes: Passes) -> Result<String, CliError> {
    let (rule, origin) = load_rule(args)?;
    let mut results = Map::new();
    if passes.validate {
        let v = validate(&rule, horizon);
        if !v.is_valid() {
            let lines: Vec<String> = v.violations.iter().map(ToString::to_string).collect();
            return Err(CliError::Validation(format!(
                "{origin}: invalid rule\n  {}",
                lines.join("\n  ")
            )));
        }
        results.insert(
            "validation".into(),
            json!({ "valid": true, "checkedTo": v.checked_to }),
        );
    }
    if passes.matrices {
        let mut steps = Vec::new();
        for n in 1..=horizon {
            steps.push(json!({ "from": n - 1, "to": n, "matrix": matrix(&rule.step_matrix(n)?) }));
        }
        let counts: Vec<usize> = (0..=horizon)
            .map(|n| rule.type_count(n))
            .collect::<Result<_, _>>()?;
        results.insert(
            "matrices".into(),
            json!({ "typeCounts": counts, "steps": steps }),
        );
    }
    if passes.primitivity {
        let p = primitivity(&rule, horizon)?;
        let levels: Vec<Value> = p
            .levels
            .iter()
            .map(|l| {
                let verdict = match &l.verdict {
                    PrimitivityVerdict::Primitive { witness } => {
                        json!({ "kind": "primitive", "witness": witness })
                    }
                    PrimitivityVerdict::NotPrimitive(c) => json!({
                        "kind": "notPrimitive",
                        "certificate": {
                            "support": bools(&c.support),
                            "closure": bools(&c.closure),
                            "zero": [c.zero.0, c.zero.1],
                        },
                    }),
                    PrimitivityVerdict::Inconclusive { reason } => {
                        json!({ "kind": "inconclusive", "reason": reason })
                    }
                };
                json!({ "n": l.n, "verdict": verdict })
            })
            .collect();
        results.insert(
            "primitivity".into(),
            json!({ "primitive": p.is_primitive(), "levels": levels }),
        );
    }
    if passes.ergodicity {
        let tol = ErgodicityTolerances::default();
        let v = unique_ergodicity(&rule, horizon, &tol)?;
        let certificate = match &v.certificate {
            ErgodicityCertificate::BoundedPrimitive {
                induced_step,
                bound,
                steps_checked,
            } => json!({
                "kind": "boundedPrimitive", "inducedStep": induced_step, "bound": int(bound), "stepsChecked": steps_checked,
            }),
            ErgodicityCertificate::BalanceDivergence { deltas, c, p } => json!({
                "kind": "balanceDivergence", "deltas": rationals(deltas), "c": c, "p": p,
            }),
            ErgodicityCertificate::DiameterFloor {
                n,
                columns,
                diameters,
                floor,
            } => json!({
                "kind": "diameterFloor", "n": n, "columns": [columns.0, columns.1], "diameters": scalars(diameters),
                "floor": floor,
            }),
            ErgodicityCertificate::Undecided {
                deltas,
                diameters,
                floor,
            } => json!({
                "kind": "undecided", "deltas": rationals(deltas), "diameters": scalars(diameters), "floor": floor,
            }),
        };
        results.insert(
            "ergodicity".into(),
            json!({
                "status": format!("{:?}", v.status),
                "clause": v.clause.map(String::from),
                "horizon": v.horizon,
                "certificate": certificate,
                "tolerances": {
                    "maxPower": tol.max_power, "diameterFloor": tol.diameter_floor, "maxInduction": tol.max_induction,
                },
            }),
        );
    }
    if passes.constant_length {
        let p = constant_length_profile(&rule, horizon)?;
        let lengths: Vec<String> = p.lengths.iter().map(ToString::to_string).collect();
        results.insert(
            "constantLength".into(),
            json!({
                "isConstantLength": p.is_constant_length,
                "lengths": lengths,
                "firstFailure": p.first_failure,
                "solenoid": p.is_constant_length.then(|| p.solenoid()),
            }),
        );
    }
    let params = json!({
        "horizon": horizon,
        "passes": {
            "validate": passes.validate, "matrices": passes.matrices, "primitivity": passes.primitivity,
            "ergodicity": passes.ergodicity, "constantLength": passes.constant_length,
        },
    });
    report(&rule, &origin, "analyze", params, Value::Object(results))
}

fn supertile_index(rule: &FusionRule, n: usize, spec: &str) -> Result<usize, CliError> {
    let lvl = rule.level(n)?;
    if let Some(j) = lvl.position(spec) {
        return Ok(j);
    }
    match spec.parse::<usize>() {
        Ok(j) if j < lvl.len() => Ok(j),
        Ok(j) => Err(FusionError::NoSuchSupertile { level: n, index: j }.into()),
        Err(_) => Err(CliError::Input(format!(
            "no supertile named `{spec}` at level {n}"
        ))),
    }
}

pub fn expand(args: &ExpandArgs, default: Format) -> Result<String, CliError> {
    let (rule, origin) = load_rule(&args.rule)?;
    let scale = parse_scalar(&args.scale).map_err(|e| CliError::Input(format!("--scale: {e}")))?;
    if !scale.is_positive() {
        return Err(CliError::Input("--scale must be positive".into()));
    }
    let j = supertile_index(&rule, args.level, &args.supertile)?;
    let patch = expand_patch(&rule, args.level, j, args.to)?;
    let piece_names = names(&rule, args.to)?;
    let format = args.format.unwrap_or(default);
    let text = match format {
        Format::Svg => svg(&patch, &piece_names, &scale),
        Format::Json => {
            let two_d = patch.dimension() == 2;
            let pieces: Vec<Value> = patch
                .placements()
                .iter()
                .map(|p| {
                    let mut o =
                        json!({ "type": piece_names[p.piece], "x": scalar(&patch.to_scalar(p.x)) });
                    if two_d {
                        o["y"] = scalar(&patch.to_scalar(p.y));
                    }
                    o
                })
                .collect();
            let extents: Vec<Value> = patch
                .extents
                .iter()
                .zip(&piece_names)
                .map(|((w, h), name)| {
                    let mut o = json!({ "type": name, "width": scalar(&patch.to_scalar(*w)) });
                    if two_d {
                        o["height"] = scalar(&patch.to_scalar(*h));
                    }
                    o
                })
                .collect();
            let params =
                json!({ "level": args.level, "type": names(&rule, args.level)?[j], "to": args.to });
            let results = json!({ "count": patch.len(), "extents": extents, "pieces": pieces });
            report(&rule, &origin, "expand", params, results)?
        }
    };
    match &args.out {
        Some(path) => {
            std::fs::write(path, text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

/// `"(1/3, 0)"`, `"(1,0)"` or a single number.
pub fn parse_alpha(text: &str) -> Result<Vec<Scalar>, CliError> {
    let t = text.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or(t);
    inner
        .split(',')
        .map(|part| {
            parse_scalar(part.trim()).map_err(|e| CliError::Input(format!("--alpha `{part}`: {e}")))
        })
        .collect()
}

pub fn spectrum(args: &RuleArgs, alpha_text: &str, horizon: usize) -> Result<String, CliError> {
    let (rule, origin) = load_rule(args)?;
    let alpha = parse_alpha(alpha_text)?;
    let tol = EigenTolerances::default();
    let v = eigenvalue_test(&rule, &alpha, horizon, &tol)?;
    let etas: Vec<Value> = v
        .etas
        .iter()
        .map(|e| {
            json!({
                "level": e.level,
                "value": e.value,
                "theta": scalar(&e.theta),
                "witness": e.witness.as_deref().map(scalars),
            })
        })
        .collect();
    let results = json!({
        "status": format!("{:?}", v.status),
        "ratio": v.ratio,
        "floor": v.floor,
        "truncated": v.truncated,
        "tolerances": {
            "burnIn": tol.burn_in, "floor": tol.floor, "floorLevels": tol.floor_levels,
            "passRatio": tol.pass_ratio, "passLevels": tol.pass_levels,
        },
        "etas": etas,
    });
    report(
        &rule,
        &origin,
        "spectrum",
        json!({ "alpha": scalars(&alpha), "horizon": horizon }),
        results,
    )
}

/// Least level whose shortest supertile side reaches `2 · maxn`.
fn auto_harvest(rule: &FusionRule, maxn: usize) -> Result<usize, CliError> {
    let want = Scalar::from(2 * maxn as i64);
    for h in 0..=40 {
        let shortest = rule
            .level(h)?
            .shapes
            .iter()
            .map(|s| match s {
                Shape::Interval(l) => l.clone(),
                Shape::Rect { width, height } => width.clone().min(height.clone()),
            })
            .min();
        if shortest.is_some_and(|s| s >= want) {
            return Ok(h);
        }
    }
    Err(CliError::Input(format!(
        "no level up to 40 has supertiles of side {want}; pass --harvest"
    )))
}

pub fn entropy(
    args: &RuleArgs,
    maxn: usize,
    harvest: Option<usize>,
    horizon: usize,
) -> Result<String, CliError> {
    let (rule, origin) = load_rule(args)?;
    let harvest = match harvest {
        Some(h) => h,
        None => auto_harvest(&rule, maxn)?,
    };
    let profile = complexity(&rule, maxn, harvest)?;
    let estimate = entropy_estimate(&profile);
    let bound = zero_entropy_bound(&rule, horizon)?;
    let results = json!({
        "complexity": { "counts": profile.counts, "lowerBound": profile.lower_bound, "harvestLevel": profile.harvest_level },
        "entropy": { "values": estimate.values, "limit": estimate.limit, "lowerBound": estimate.lower_bound },
        "zeroEntropyBound": {
            "typeCounts": bound.type_counts,
            "diameters": scalars(&bound.diameters),
            "values": bound.values,
            "verdict": match bound.verdict {
                ZeroEntropyVerdict::ZeroEntropyBoundHolds => "ZeroEntropyBoundHolds",
                ZeroEntropyVerdict::Silent => "Silent",
            },
        },
    });
    let params = json!({ "maxn": maxn, "harvest": harvest, "horizon": horizon });
    report(&rule, &origin, "entropy", params, results)
}

pub fn cohomology(args: &RuleArgs, horizon: usize) -> Result<String, CliError> {
    let (rule, origin) = load_rule(args)?;
    let r = h1_direct_limit(&rule, horizon)?;
    let mut approximants = Vec::new();
    for n in 1..=horizon {
        let ap = ap_complex(&rule, n)?;
        approximants.push(json!({
            "level": n,
            "cells": scalars(&ap.cells),
            "vertexClasses": ap.vertex_classes,
            "firstBetti": ap.first_betti(),
            "windingMatrix": matrix(&ap.winding),
        }));
    }
    let steps: Vec<Value> = r
        .steps
        .iter()
        .map(|s| {
            json!({
                "level": s.level,
                "pullback": matrix(&s.matrix),
                "determinant": s.determinant.as_ref().map(int),
                "rank": s.rank,
                "invariantFactors": s.invariant_factors.iter().map(int).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut forcing = Vec::new();
    for b in &r.border_forcing {
        forcing.push(match b {
            BorderForcing::Forced { level, big_n, flanks } => {
                let nm = names(&rule, *level)?;
                let flanks: Vec<Value> = flanks.iter().map(|f| json!(f.map(|(l, r)| [&nm[l], &nm[r]]))).collect();
                json!({ "level": level, "forcedAt": big_n, "flanks": flanks })
            }
            BorderForcing::NotForcedUpTo { level, max_n, conflicts } => {
                let nm = names(&rule, *level)?;
                let conflicts: Vec<Value> = conflicts
                    .iter()
                    .map(|(t, fs)| {
                        json!({ "type": t, "flanks": fs.iter().map(|(l, r)| [&nm[*l], &nm[*r]]).collect::<Vec<_>>() })
                    })
                    .collect();
                json!({ "level": level, "forcedAt": null, "notForcedUpTo": max_n, "conflicts": conflicts })
            }
        });
    }
    let results = json!({
        "group": r.group,
        "stabilized": r.stabilized,
        "label": r.label,
        "recognizable": r.recognizable,
        "wedges": r.wedges,
        "steps": steps,
        "borderForcing": forcing,
        "approximants": approximants,
    });
    report(
        &rule,
        &origin,
        "cohomology",
        json!({ "horizon": horizon }),
        results,
    )
}
