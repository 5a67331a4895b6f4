use std::collections::{BTreeMap, BTreeSet};

use fusion_lab::cohomology::{
    ap_complex, border_forcing_check, h1_direct_limit, slot, BorderForcing,
};
use fusion_lab::engine::{expand, transition_matrix};
use fusion_lab::ruledsl::catalog;
use fusion_lab::{parse_rule_str, FusionError, FusionRule, IntMatrix, Scalar};
use num_bigint::BigInt;
use proptest::prelude::*;

fn cat(name: &str) -> FusionRule {
    catalog(name, &BTreeMap::new()).unwrap()
}

fn substitution(bodies: &[&str]) -> FusionRule {
    let names = ["a", "b", "c"];
    let mut text = String::from("dim 1\n");
    for name in &names[..bodies.len()] {
        text += &format!("tile {name}\n");
    }
    let defs: Vec<String> = bodies
        .iter()
        .enumerate()
        .map(|(i, b)| format!("{} -> {b}", names[i]))
        .collect();
    text += &format!("level(n): {}\n", defs.join(" ; "));
    parse_rule_str(&text).unwrap()
}

#[test]
fn abb_abbb_forces_border_one_level_up() {
    let rule = cat("border_forced");
    for n in 0..4 {
        let r = border_forcing_check(&rule, n, n + 3).unwrap();
        assert_eq!(r.forced_at(), Some(n + 1), "n = {n}");
        // both types are preceded by b and followed by a
        let BorderForcing::Forced { flanks, .. } = r else {
            unreachable!()
        };
        assert_eq!(flanks, vec![Some((1, 0)), Some((1, 0))]);
    }
}

#[test]
fn period_doubling_never_forces() {
    let rule = cat("period_doubling");
    for n in 0..3 {
        match border_forcing_check(&rule, n, n + 5).unwrap() {
            BorderForcing::NotForcedUpTo {
                max_n, conflicts, ..
            } => {
                assert_eq!(max_n, n + 5);
                assert!(!conflicts.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn single_type_is_forced_immediately() {
    let rule = cat("periodic");
    for n in 0..3 {
        assert_eq!(
            border_forcing_check(&rule, n, n + 2).unwrap().forced_at(),
            Some(n)
        );
    }
}

#[test]
fn border_check_needs_a_line() {
    assert_eq!(
        border_forcing_check(&cat("fibonacci_dpv"), 0, 2),
        Err(FusionError::WrongDimension { expected: 1 })
    );
    assert_eq!(
        ap_complex(&cat("fibonacci_dpv"), 0).unwrap_err(),
        FusionError::WrongDimension { expected: 1 }
    );
}

#[test]
fn worked_example_is_a_figure_eight() {
    let rule = cat("ap_example");
    for n in 0..5 {
        let ap = ap_complex(&rule, n).unwrap();
        assert!(ap.is_wedge(), "n = {n}");
        assert_eq!(ap.vertex_classes, vec![vec![0, 1, 2, 3]]);
        assert_eq!(ap.first_betti(), 2);
        assert_eq!(
            ap.winding.transpose(),
            IntMatrix::from_rows(&[vec![1, 2], vec![2, 3]])
        );
    }
}

#[test]
fn periodic_is_one_circle() {
    for block in [2u32, 3, 5] {
        let params = BTreeMap::from([("block".to_string(), block.to_string())]);
        let rule = catalog("periodic", &params).unwrap();
        let ap = ap_complex(&rule, 1).unwrap();
        assert_eq!(ap.cells, vec![Scalar::from(block as i64)]);
        assert_eq!(ap.vertex_classes, vec![vec![0, 1]]);
        assert_eq!(ap.first_betti(), 1);
        assert_eq!(ap.winding, IntMatrix::from_rows(&[vec![block as i64]]));
    }
}

#[test]
fn fibonacci_wedge() {
    let rule = cat("fibonacci_1d");
    let ap = ap_complex(&rule, 0).unwrap();
    // aa, ab and ba occur; bb does not
    assert_eq!(ap.adjacencies, BTreeSet::from([(0, 0), (0, 1), (1, 0)]));
    assert!(ap.is_wedge());
    assert_eq!(
        ap.winding.transpose(),
        IntMatrix::from_rows(&[vec![1, 1], vec![1, 0]])
    );
    let ap = ap_complex(&rule, 3).unwrap();
    assert_eq!(ap.cells, vec![Scalar::from(5), Scalar::from(3)]);
}

#[test]
fn disconnected_vertices() {
    // a and b never meet, so Γ_0 is two circles
    let rule = substitution(&["a a", "b b"]);
    let ap = ap_complex(&rule, 0).unwrap();
    assert_eq!(
        ap.vertex_classes,
        vec![
            vec![slot(0, false), slot(0, true)],
            vec![slot(1, false), slot(1, true)]
        ]
    );
    assert_eq!(ap.first_betti(), 2);
    // a b a b ... makes one circle out of two edges
    let rule = substitution(&["a b", "a b"]);
    let ap = ap_complex(&rule, 0).unwrap();
    assert_eq!(ap.vertex_count(), 2);
    assert_eq!(ap.first_betti(), 1);
}

#[test]
fn worked_example_direct_limit() {
    let report = h1_direct_limit(&cat("ap_example"), 5).unwrap();
    assert!(report.stabilized);
    assert!(report.wedges);
    assert_eq!(report.group, "ℤ² (stable)");
    assert!(report.recognizable);
    for step in &report.steps {
        assert_eq!(step.determinant, Some(BigInt::from(-1)));
        assert_eq!(step.matrix, IntMatrix::from_rows(&[vec![1, 2], vec![2, 3]]));
    }
    assert_eq!(report.label, None);
    assert!(report
        .border_forcing
        .iter()
        .all(|b| b.forced_at().is_some()));
}

#[test]
fn doubling_circle_is_not_stable() {
    let report = h1_direct_limit(&cat("periodic"), 4).unwrap();
    assert!(!report.stabilized);
    for step in &report.steps {
        assert_eq!(step.determinant, Some(BigInt::from(2)));
        assert_eq!(step.invariant_factors, vec![BigInt::from(2)]);
    }
    assert!(report.group.contains("[2] [2] [2] [2]"), "{}", report.group);
    assert_eq!(report.label, None);
}

#[test]
fn fibonacci_is_stable_but_informational() {
    let report = h1_direct_limit(&cat("fibonacci_1d"), 5).unwrap();
    assert!(report.stabilized);
    assert_eq!(report.group, "ℤ² (stable)");
    assert!(report
        .steps
        .iter()
        .all(|s| s.determinant == Some(BigInt::from(-1))));
    assert_eq!(
        report.label.as_deref(),
        Some("pre-collaring, informational only")
    );
}

#[test]
fn unimodular_at_every_step_gives_constant_rank() {
    for name in [
        "ap_example",
        "fibonacci_1d",
        "border_forced",
        "period_doubling",
        "chacon",
    ] {
        let report = h1_direct_limit(&cat(name), 4).unwrap();
        if report.stabilized {
            let j = report.steps[0].matrix.cols();
            assert!(
                report
                    .steps
                    .iter()
                    .all(|s| s.rank == j && s.matrix.rows() == j),
                "{name}"
            );
        }
    }
}

/// Flanks of each `N`-supertile type seen in tile words, by locating the
/// `N`-supertiles inside each expanded `(N+d)`-supertile, deepening `d`
/// from 2 while new flanks appear.
fn flanks_by_expansion(rule: &FusionRule, big_n: usize) -> Vec<BTreeSet<(usize, usize)>> {
    let mut seen = flanks_at_depth(rule, big_n, 2);
    for d in 3..=6 {
        let deeper = flanks_at_depth(rule, big_n, d);
        if deeper == seen {
            break;
        }
        seen = deeper;
    }
    seen
}

fn flanks_at_depth(rule: &FusionRule, big_n: usize, d: usize) -> Vec<BTreeSet<(usize, usize)>> {
    let lens: Vec<usize> = (0..rule.type_count(big_n).unwrap())
        .map(|t| expand(rule, big_n, t, 0).unwrap().len())
        .collect();
    let mut out = vec![BTreeSet::new(); lens.len()];
    for j in 0..rule.type_count(big_n + d).unwrap() {
        let tiles = expand(rule, big_n + d, j, 0)
            .unwrap()
            .word()
            .unwrap()
            .to_vec();
        let blocks = expand(rule, big_n + d, j, big_n)
            .unwrap()
            .word()
            .unwrap()
            .to_vec();
        let mut start = 0;
        for (i, &t) in blocks.iter().enumerate() {
            let end = start + lens[t];
            if i > 0 && i + 1 < blocks.len() {
                out[t].insert((tiles[start - 1], tiles[end]));
            }
            start = end;
        }
    }
    out
}

fn small_substitution() -> impl Strategy<Value = FusionRule> {
    (1usize..=3)
        .prop_flat_map(|k| proptest::collection::vec(proptest::collection::vec(0..k, 1..=4), k))
        .prop_filter("needs growth", |bodies| bodies.iter().any(|b| b.len() > 1))
        .prop_map(|bodies| {
            let names = ["a", "b", "c"];
            let words: Vec<String> = bodies
                .iter()
                .map(|b| b.iter().map(|&c| names[c]).collect::<Vec<_>>().join(" "))
                .collect();
            let refs: Vec<&str> = words.iter().map(String::as_str).collect();
            substitution(&refs)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn winding_is_transposed_step_matrix(rule in small_substitution(), n in 0usize..3) {
        let ap = ap_complex(&rule, n).unwrap();
        prop_assert_eq!(ap.winding.transpose(), transition_matrix(&rule, n, n + 1).unwrap());
        // the classes partition the endpoint slots
        let mut all: Vec<usize> = ap.vertex_classes.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..2 * ap.cells.len()).collect::<Vec<_>>());
        prop_assert!(ap.vertex_classes.iter().all(|c| !c.is_empty()));
    }

    #[test]
    fn adjacencies_match_expansion(rule in small_substitution(), n in 0usize..2) {
        let ap = ap_complex(&rule, n).unwrap();
        let mut want = BTreeSet::new();
        for m in n + 1..=n + 6 {
            let before = want.len();
            for j in 0..rule.type_count(m).unwrap() {
                let w = expand(&rule, m, j, n).unwrap().word().unwrap().to_vec();
                want.extend(w.windows(2).map(|p| (p[0], p[1])));
            }
            if m > n + 2 && want.len() == before {
                break;
            }
        }
        prop_assert_eq!(ap.adjacencies, want);
    }

    #[test]
    fn border_forcing_matches_expansion(rule in small_substitution()) {
        let max_n = 3;
        let brute: Vec<bool> = (0..=max_n).map(|big_n| flanks_by_expansion(&rule, big_n).iter().all(|s| s.len() <= 1)).collect();
        let first = brute.iter().position(|&b| b);
        prop_assert_eq!(border_forcing_check(&rule, 0, max_n).unwrap().forced_at(), first);
        if let Some(i) = first {
            prop_assert!(brute[i..].iter().all(|&b| b));
        }
    }
}
