use std::collections::BTreeMap;

use fusion_lab::ruledsl::{catalog, catalog_names, parse_rule, print_rule, ParseError, RuleSource};
use fusion_lab::{parse_rule_str, validate, IntMatrix, Scalar};
use num_bigint::BigInt;

fn cat(name: &str) -> fusion_lab::FusionRule {
    catalog(name, &BTreeMap::new()).unwrap()
}

#[test]
fn catalog_rules_validate_to_six() {
    for (name, _) in catalog_names() {
        let rule = cat(name);
        let report = validate(&rule, 6);
        assert!(report.is_valid(), "{name}: {:?}", report.violations);
        assert_eq!(report.checked_to, 6, "{name}");
    }
}

#[test]
fn catalog_rules_round_trip() {
    for (name, _) in catalog_names() {
        let rule = cat(name);
        let text = print_rule(&rule).unwrap();
        let again = parse_rule_str(&text).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
        assert_eq!(again, rule, "{name}");
        assert_eq!(print_rule(&again).unwrap(), text);
    }
}

#[test]
fn two_measures_from_text() {
    let rule = parse_rule_str(
        "dim 1\ntile a len 1\ntile b len 1\nrecognizable\nlevel(n): a -> a^(10^n) b ; b -> b^(10^n) a\n",
    )
    .unwrap();
    assert_eq!(rule, cat("two_measures"));
}

fn kappa_step(n: u32) -> IntMatrix {
    let t = BigInt::from(10).pow(n);
    let rows = vec![
        vec![&t * 2, BigInt::from(1), t.clone()],
        vec![BigInt::from(1), &t * 2, t.clone()],
        vec![BigInt::from(1), BigInt::from(1), BigInt::from(2)],
    ];
    let mut m = IntMatrix::zeros(3, 3);
    for (i, r) in rows.into_iter().enumerate() {
        for (j, v) in r.into_iter().enumerate() {
            m.set(i, j, v);
        }
    }
    m
}

#[test]
fn kappa_transition_matrices() {
    let rule = cat("three_letter_kappa");
    for n in 1..=5 {
        assert_eq!(rule.step_matrix(n as usize).unwrap(), kappa_step(n));
    }
}

#[test]
fn nonpisot_dpv_populations() {
    let rule = cat("nonpisot_dpv");
    let m = rule.step_matrix(1).unwrap();
    assert_eq!(
        m,
        IntMatrix::from_rows(&[
            vec![1, 1, 1, 1],
            vec![3, 0, 3, 0],
            vec![3, 3, 0, 0],
            vec![9, 0, 0, 0]
        ])
    );
}

#[test]
fn fibonacci_1d_geometry_modes() {
    let unit = cat("fibonacci_1d");
    assert!(unit.has_unit_geometry());
    let q = catalog(
        "fibonacci_1d",
        &BTreeMap::from([("geometry".into(), "quadratic".into())]),
    )
    .unwrap();
    assert_eq!(q.volume(1, 0).unwrap().to_string(), "1+phi");
    assert_eq!(
        q.step_matrix(1).unwrap(),
        IntMatrix::from_rows(&[vec![1, 1], vec![1, 0]])
    );
}

#[test]
fn empty_body_is_a_syntax_error() {
    let err = parse_rule_str("dim 1\ntile a len 1\nlevel 1: a -> ; b -> a\n").unwrap_err();
    assert!(
        matches!(
            err,
            ParseError::Syntax {
                line: 3,
                col: 15,
                ..
            }
        ),
        "{err}"
    );
}

#[test]
fn undefined_symbol_is_positioned() {
    let err = parse_rule_str("dim 1\ntile a len 1\nlevel(n): a -> a q\n").unwrap_err();
    assert_eq!(
        err,
        ParseError::UndefinedSymbol {
            line: 3,
            col: 18,
            name: "q".into()
        }
    );
}

#[test]
fn unequal_rows_are_a_dimension_mismatch() {
    let err = parse_rule_str("dim 2\ntile a size 1 x 1\nlevel(n): a -> [a a / a]\n").unwrap_err();
    assert!(
        matches!(err, ParseError::DimensionMismatch { line: 3, .. }),
        "{err}"
    );
}

#[test]
fn word_body_in_plane_rule() {
    let err = parse_rule_str("dim 2\ntile a size 1 x 1\nlevel(n): a -> a a\n").unwrap_err();
    assert!(matches!(err, ParseError::DimensionMismatch { .. }), "{err}");
}

#[test]
fn grid_parse_keeps_layout() {
    let rule = cat("fibonacci_dpv");
    let text = print_rule(&rule).unwrap();
    assert!(text.contains("a -> [c a / d b]"), "{text}");
}

#[test]
fn explicit_level_wins_over_parametric() {
    let rule =
        parse_rule_str("dim 1\ntile a len 1\nlevel(n): a -> a a\nlevel 2: a -> a a a\n").unwrap();
    assert_eq!(rule.volume(2, 0).unwrap().to_string(), "6");
    assert_eq!(rule.volume(3, 0).unwrap().to_string(), "12");
}

#[test]
fn comments_and_continuations() {
    let src = RuleSource::new(
        "# a comment\ndim 2\ntile a size 1 x 1  # trailing\nlevel(n): a -> [a a /\n   a a] ;\n",
        "inline",
    );
    // a trailing `;` expects another definition
    assert!(parse_rule(&src).is_err());
    let src = RuleSource::new(
        "dim 2\ntile a size 1 x 1\nlevel(n): a -> [a a /\n   a a]\n",
        "inline",
    );
    let rule = parse_rule(&src).unwrap();
    assert_eq!(rule.origin(), Some("inline"));
    assert_eq!(rule.volume(1, 0).unwrap().to_string(), "4");
}

#[test]
fn induced_rule_prints_explicitly() {
    let fib = cat("fibonacci_1d");
    let ind = fib.induce_every(2, 6).unwrap();
    let text = print_rule(&ind).unwrap();
    let back = parse_rule_str(&text).unwrap();
    for n in 1..=3 {
        assert_eq!(back.step_matrix(n).unwrap(), ind.step_matrix(n).unwrap());
    }
}

#[test]
fn standalone_scalars() {
    use fusion_lab::ruledsl::parse_scalar;
    assert_eq!(parse_scalar("1/3").unwrap(), Scalar::ratio(1, 3));
    assert_eq!(parse_scalar("-2").unwrap(), Scalar::from(-2));
    let s = parse_scalar("2/5phi - 1/5").unwrap();
    assert_eq!(s, Scalar::phi() * Scalar::ratio(2, 5) - Scalar::ratio(1, 5));
    assert!(parse_scalar("1/3 x").is_err());
    assert!(parse_scalar("").is_err());
}
