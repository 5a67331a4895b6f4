use std::collections::{BTreeMap, HashSet};

use fusion_lab::entropy::{
    complexity, entropy_estimate, zero_entropy_bound, ComplexityProfile, ZeroEntropyVerdict,
};
use fusion_lab::ruledsl::catalog;
use fusion_lab::{parse_rule_str, FusionError, FusionRule};

fn cat(name: &str) -> FusionRule {
    catalog(name, &BTreeMap::new()).unwrap()
}

/// Distinct factors of each length `1..=max_n` of a long Fibonacci word.
fn fibonacci_factor_counts(max_n: usize) -> Vec<u64> {
    let mut w = vec![0u8];
    while w.len() < 20_000 {
        w = w
            .iter()
            .flat_map(|&c| if c == 0 { vec![0, 1] } else { vec![0] })
            .collect();
    }
    (1..=max_n)
        .map(|n| w.windows(n).collect::<HashSet<_>>().len() as u64)
        .collect()
}

#[test]
fn fibonacci_is_sturmian() {
    let p = complexity(&cat("fibonacci_1d"), 12, 12).unwrap();
    assert!(p.lower_bound);
    let want: Vec<u64> = (1..=12).map(|n| n + 1).collect();
    assert_eq!(fibonacci_factor_counts(12), want);
    assert_eq!(p.counts, want);
}

#[test]
fn periodic_has_two_windows() {
    let rule = parse_rule_str("dim 1\ntile a\ntile b\nlevel(n): a -> a b ; b -> a b\n").unwrap();
    let p = complexity(&rule, 10, 6).unwrap();
    assert_eq!(p.counts, vec![2; 10]);
    let e = entropy_estimate(&p);
    assert_eq!(e.values[0], 2f64.ln());
    assert!(e.limit.abs() < 1e-9 || e.limit < e.values[9]);
    assert!(e.limit < 0.1);
}

#[test]
fn two_measures_growth_is_recorded() {
    let p = complexity(&cat("two_measures"), 8, 3).unwrap();
    println!("two_measures #_n, n = 1..8: {:?}", p.counts);
    assert_eq!(p.get(1), Some(2));
}

#[test]
fn estimates_tend_to_zero() {
    let p = complexity(&cat("fibonacci_1d"), 40, 14).unwrap();
    let e = entropy_estimate(&p);
    assert!(e.limit < 0.05, "{}", e.limit);
    let ones = ComplexityProfile {
        dimension: 1,
        harvest_level: 0,
        counts: vec![1; 6],
        lower_bound: true,
    };
    let e = entropy_estimate(&ones);
    assert!(e.values.iter().all(|v| *v == 0.0));
    assert_eq!(e.limit, 0.0);
}

#[test]
fn square_windows() {
    let p = complexity(&cat("periodic_squares"), 4, 3).unwrap();
    assert_eq!(p.counts, vec![1; 4]);
    let p = complexity(&cat("fibonacci_dpv"), 3, 6).unwrap();
    assert_eq!(p.get(1), Some(4));
    assert!(p.counts.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn needs_unit_geometry() {
    let params = BTreeMap::from([("geometry".to_string(), "quadratic".to_string())]);
    let rule = catalog("fibonacci_1d", &params).unwrap();
    assert_eq!(complexity(&rule, 3, 3), Err(FusionError::NotUnitGeometry));
}

#[test]
fn harvest_monotonicity_and_ceiling() {
    for name in [
        "fibonacci_1d",
        "chacon",
        "period_doubling",
        "border_forced",
        "fibonacci_dpv",
    ] {
        let rule = cat(name);
        let k = rule.type_count(0).unwrap() as f64;
        let mut prev: Option<ComplexityProfile> = None;
        for h in 2..=5 {
            let p = complexity(&rule, 4, h).unwrap();
            if let Some(q) = &prev {
                assert!(
                    p.counts.iter().zip(&q.counts).all(|(a, b)| a >= b),
                    "{name}"
                );
            }
            for v in entropy_estimate(&p).values {
                assert!(v <= k.ln() + 1e-12, "{name}");
            }
            prev = Some(p);
        }
    }
}

#[test]
fn zero_entropy_bounds() {
    let r = zero_entropy_bound(&cat("fibonacci_dpv"), 8).unwrap();
    assert_eq!(r.verdict, ZeroEntropyVerdict::ZeroEntropyBoundHolds);
    assert!(r.type_counts.iter().all(|&j| j == 4));
    // d_n = 2 f_{n+2}, so the values are log 4 / (4 f_{n+2}²)
    let fib = [
        1.0f64, 1.0, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0, 34.0, 55.0, 89.0,
    ];
    for (i, v) in r.values.iter().enumerate() {
        let f = fib[i + 2];
        assert!((v - 4f64.ln() / (4.0 * f * f)).abs() < 1e-12);
    }

    let r = zero_entropy_bound(&cat("fibonacci_1d"), 8).unwrap();
    assert_eq!(r.verdict, ZeroEntropyVerdict::ZeroEntropyBoundHolds);

    let r = zero_entropy_bound(&exponential_types(), 3).unwrap();
    assert_eq!(r.type_counts, vec![4, 16, 256]);
    assert_eq!(r.verdict, ZeroEntropyVerdict::Silent);
    assert!(r.values.iter().all(|v| (v - 2f64.ln()).abs() < 1e-12));
}

/// Three explicit levels where level `n` lists every concatenation of two
/// level-`(n-1)` supertiles, so `j_n = 2^(length)`.
fn exponential_types() -> FusionRule {
    let mut text = String::from("dim 1\ntile a\ntile b\n");
    let mut names: Vec<String> = vec!["a".into(), "b".into()];
    for level in 1..=3 {
        let mut defs = Vec::new();
        let mut next = Vec::new();
        for x in &names {
            for y in &names {
                let name = format!("s{level}_{}", next.len());
                defs.push(format!("{name} -> {x} {y}"));
                next.push(name);
            }
        }
        text += &format!("level {level}: {}\n", defs.join(" ; "));
        names = next;
    }
    parse_rule_str(&text).unwrap()
}
