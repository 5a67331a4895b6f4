use std::collections::BTreeMap;

use fusion_lab::engine::{
    adjacency_complexity, count_patch, expand, primitivity, rank_bound, strong_primitivity,
    transition_matrix, van_hove_diagnostic, ConcretePatch, PrimitivityVerdict,
};
use fusion_lab::ruledsl::catalog;
use fusion_lab::{parse_rule_str, validate, FusionRule, IntMatrix, Scalar};
use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;

fn cat(name: &str) -> FusionRule {
    catalog(name, &BTreeMap::new()).unwrap()
}

fn word_string(rule: &FusionRule, patch: &ConcretePatch) -> String {
    let names = &rule.level(patch.level).unwrap().names;
    patch
        .word()
        .unwrap()
        .iter()
        .map(|&i| names[i].as_str())
        .collect()
}

/// Iterates a letter substitution on plain strings.
fn substitute(rules: &[(char, &str)], seed: &str, times: usize) -> String {
    let map: BTreeMap<char, &str> = rules.iter().copied().collect();
    (0..times).fold(seed.to_string(), |w, _| {
        w.chars().map(|c| map[&c]).collect()
    })
}

fn fib(n: usize) -> i64 {
    let (mut a, mut b) = (1i64, 1i64);
    for _ in 1..n {
        (a, b) = (b, a + b);
    }
    a
}

fn dpv_step() -> IntMatrix {
    IntMatrix::from_rows(&[
        vec![1, 1, 1, 1],
        vec![1, 0, 1, 0],
        vec![1, 1, 0, 0],
        vec![1, 0, 0, 0],
    ])
}

#[test]
fn chacon_second_level() {
    let rule = cat("chacon");
    let a = rule.level(2).unwrap().position("a").unwrap();
    let patch = expand(&rule, 2, a, 0).unwrap();
    assert_eq!(word_string(&rule, &patch), "aabaaababaaba");
    assert_eq!(
        word_string(&rule, &patch),
        substitute(&[('a', "aaba"), ('b', "b")], "a", 2)
    );
}

#[test]
fn expanding_to_the_same_level_is_the_supertile() {
    for name in ["chacon", "two_measures", "fibonacci_dpv"] {
        let rule = cat(name);
        for j in 0..rule.type_count(2).unwrap() {
            let patch = expand(&rule, 2, j, 2).unwrap();
            assert_eq!(patch.len(), 1, "{name}");
            assert_eq!(patch.placements()[0].piece, j);
        }
    }
}

#[test]
fn dpv_second_level_is_three_by_three() {
    let rule = cat("fibonacci_dpv");
    let a = rule.level(2).unwrap().position("a").unwrap();
    let patch = expand(&rule, 2, a, 0).unwrap();
    let (x0, y0, x1, y1) = patch.bounding_box();
    assert_eq!(patch.to_scalar(x1) - patch.to_scalar(x0), Scalar::from(3));
    assert_eq!(patch.to_scalar(y1) - patch.to_scalar(y0), Scalar::from(3));
    // column a of F⊗F squared, F = [[1,1],[1,0]]
    let want: Vec<BigUint> = [4u32, 2, 2, 1].into_iter().map(BigUint::from).collect();
    assert_eq!(patch.population(), want);
    let m = transition_matrix(&rule, 0, 2).unwrap();
    let col: Vec<BigUint> = m
        .column(a)
        .into_iter()
        .map(|v| v.to_biguint().unwrap())
        .collect();
    assert_eq!(col, want);
}

#[test]
fn two_measures_steps() {
    let rule = cat("two_measures");
    for n in 1..=5u32 {
        let t = BigInt::from(10).pow(n);
        let want =
            IntMatrix::from_rows(&[vec![t.clone(), BigInt::from(1)], vec![BigInt::from(1), t]]);
        assert_eq!(
            transition_matrix(&rule, n as usize - 1, n as usize).unwrap(),
            want
        );
    }
}

#[test]
fn composing_two_steps() {
    for name in [
        "two_measures",
        "three_letter_kappa",
        "fibonacci_dpv",
        "chacon",
    ] {
        let rule = cat(name);
        for n in 0..3 {
            let direct = transition_matrix(&rule, n, n + 2).unwrap();
            let a = transition_matrix(&rule, n, n + 1).unwrap();
            let b = transition_matrix(&rule, n + 1, n + 2).unwrap();
            assert_eq!(direct, &a * &b, "{name} n={n}");
        }
    }
}

#[test]
fn dpv_every_step() {
    let rule = cat("fibonacci_dpv");
    for n in 1..=6 {
        assert_eq!(rule.step_matrix(n).unwrap(), dpv_step(), "n={n}");
    }
}

#[test]
fn counting_words() {
    let rule = parse_rule_str("dim 1\ntile a\ntile b\nlevel(n): a -> a b ; b -> a\n").unwrap();
    let hay = ConcretePatch::from_word(&rule, 0, vec![0, 0, 1, 0, 0]).unwrap();
    let needle = ConcretePatch::from_word(&rule, 0, vec![0, 1, 0]).unwrap();
    assert_eq!(count_patch(&hay, &needle), 1);
    let single = ConcretePatch::from_word(&rule, 0, vec![0]).unwrap();
    assert_eq!(count_patch(&hay, &single), 4);
}

#[test]
fn a_supertile_contains_itself_once() {
    for (name, n) in [("fibonacci_1d", 4), ("chacon", 2), ("fibonacci_dpv", 3)] {
        let rule = cat(name);
        let patch = expand(&rule, n, 0, 0).unwrap();
        assert_eq!(count_patch(&patch, &patch), 1, "{name}");
    }
}

#[test]
fn coincidence_first_level_agreement() {
    let rule = cat("coincidence_waiting");
    let lvl = rule.level(1).unwrap();
    let b = expand(&rule, 1, lvl.position("b").unwrap(), 0).unwrap();
    let c = expand(&rule, 1, lvl.position("c").unwrap(), 0).unwrap();
    let (wb, wc) = (word_string(&rule, &b), word_string(&rule, &c));
    assert_eq!(wb, "bbcccccbbbbc");
    assert_eq!(wc, "bcbbbbbccccc");
    let agree = wb.chars().zip(wc.chars()).filter(|(x, y)| x == y).count();
    assert_eq!((agree, wb.len()), (2, 12));
}

#[test]
fn primitivity_examples() {
    let chacon = primitivity(&cat("chacon"), 5).unwrap();
    assert!(!chacon.is_primitive());
    let (_, cert) = chacon.certificate().unwrap();
    assert!(cert.verify());
    let a_in_b = cert.zero;
    assert_eq!(a_in_b, (0, 1));

    let fib = primitivity(&cat("fibonacci_1d"), 6).unwrap();
    for l in fib.levels.iter().filter(|l| l.n + 2 <= 6) {
        assert_eq!(
            l.verdict,
            PrimitivityVerdict::Primitive { witness: l.n + 2 }
        );
    }
    assert!(strong_primitivity(&cat("two_measures"), 5)
        .unwrap()
        .iter()
        .all(|&s| s));
}

#[test]
fn van_hove_ratios() {
    let rule = cat("fibonacci_1d");
    let r = Scalar::ratio(1, 2);
    for n in 0..5 {
        let got = van_hove_diagnostic(&rule, n, &r).unwrap();
        for (j, v) in got.iter().enumerate() {
            assert_eq!(v, &(Scalar::from(1) / rule.volume(n, j).unwrap()));
        }
    }

    let dpv = cat("fibonacci_dpv");
    let one = Scalar::from(1);
    let mut last: Option<Scalar> = None;
    for n in 1..=8 {
        let v = van_hove_diagnostic(&dpv, n, &one).unwrap()[0].clone();
        let side = fib(n + 2);
        assert_eq!(v, Scalar::ratio(4 * side + 4, side * side), "n={n}");
        if let Some(prev) = &last {
            assert!(v < *prev);
        }
        last = Some(v);
    }
    let zero = van_hove_diagnostic(&dpv, 3, &Scalar::from(0)).unwrap();
    assert!(zero.iter().all(|v| *v == Scalar::from(0)));
    assert!(van_hove_diagnostic(&dpv, 3, &Scalar::from(-1)).is_err());
}

#[test]
fn periodic_squares_adjacency() {
    let rule = cat("periodic_squares");
    for n in 0..3 {
        assert_eq!(adjacency_complexity(&rule, n).unwrap(), 2);
    }
}

#[test]
fn rank_bounds() {
    assert_eq!(rank_bound(&cat("two_measures"), 5).unwrap().min, 2);
    assert_eq!(rank_bound(&cat("fibonacci_dpv"), 5).unwrap().min, 4);
    let single = parse_rule_str("dim 1\ntile a\nlevel 1: a -> a a\nlevel 2: a -> a a a\n").unwrap();
    assert_eq!(rank_bound(&single, 5).unwrap().min, 1);
}

#[test]
fn volumes() {
    let dpv = cat("fibonacci_dpv");
    let a = dpv.level(1).unwrap().position("a").unwrap();
    assert_eq!(dpv.volume(1, a).unwrap(), Scalar::from(4));
    for j in 0..dpv.type_count(0).unwrap() {
        assert_eq!(
            dpv.volume(0, j).unwrap(),
            dpv.prototiles()[j].shape.volume()
        );
    }

    let cw = cat("coincidence_waiting");
    let mut want = 1i64;
    for n in 1..=3u32 {
        want *= 10i64.pow(n) + 2;
        for j in 0..cw.type_count(n as usize).unwrap() {
            assert_eq!(
                cw.volume(n as usize, j).unwrap(),
                Scalar::from(want),
                "n={n}"
            );
        }
    }
}

#[test]
fn validation_reports() {
    assert!(validate(&cat("fibonacci_dpv"), 6).is_valid());

    let overlap = parse_rule_str(
        "dim 2\ntile a size 1 x 1\nlevel(n): a -> [a a / a a]\nlevel 3: a -> { a@(0,0) a@(2,0) a@(0,4) a@(4,4) a@(4,0) }\n",
    )
    .unwrap();
    let report = validate(&overlap, 4);
    let v = &report.violations[0];
    assert_eq!(v.level, 3);
    assert_eq!(v.supertile.as_deref(), Some("a"));
    assert!(v.message.contains("overlap"), "{}", v.message);

    let empty =
        parse_rule_str("dim 1\ntile a\ntile b\nlevel(n): a -> a^(3-n) b^(3-n) ; b -> b a\n")
            .unwrap();
    let report = validate(&empty, 5);
    assert!(!report.is_valid());
    assert!(
        report.violations.iter().all(|v| v.level == 3),
        "{:?}",
        report.violations
    );
}

/// Random 1-D substitutions on up to three letters, with lengths 1..3.
fn substitution_rule() -> impl Strategy<Value = (FusionRule, Vec<String>, Vec<i64>)> {
    (1usize..=3)
        .prop_flat_map(|k| {
            (
                proptest::collection::vec(proptest::collection::vec(0..k, 1..=4), k),
                proptest::collection::vec(1i64..=3, k),
            )
        })
        .prop_filter("needs growth", |(bodies, _)| {
            bodies.iter().any(|b| b.len() > 1)
        })
        .prop_map(|(bodies, lens)| {
            let names = ['a', 'b', 'c'];
            let words: Vec<String> = bodies
                .iter()
                .map(|b| b.iter().map(|&c| names[c]).collect())
                .collect();
            let mut text = String::from("dim 1\n");
            for (i, len) in lens.iter().enumerate() {
                text += &format!("tile {} len {len}\n", names[i]);
            }
            let bodies: Vec<String> = words
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let spaced: Vec<String> = w.chars().map(String::from).collect();
                    format!("{} -> {}", names[i], spaced.join(" "))
                })
                .collect();
            text += &format!("level(n): {}\n", bodies.join(" ; "));
            (parse_rule_str(&text).unwrap(), words, lens)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrices_match_string_substitution((rule, words, _) in substitution_rule(), n in 0usize..3, gap in 1usize..4) {
        let letters: Vec<char> = "abc".chars().take(words.len()).collect();
        let table: Vec<(char, &str)> = letters.iter().copied().zip(words.iter().map(String::as_str)).collect();
        let m = transition_matrix(&rule, n, n + gap).unwrap();
        for (j, &c) in letters.iter().enumerate() {
            let w = substitute(&table, &c.to_string(), gap);
            for (i, &d) in letters.iter().enumerate() {
                let count = w.chars().filter(|&x| x == d).count();
                prop_assert_eq!(m.get(i, j), &BigInt::from(count));
            }
            let patch = expand(&rule, n + gap, j, n).unwrap();
            let pop: Vec<BigInt> = patch.population().into_iter().map(BigInt::from).collect();
            prop_assert_eq!(pop, m.column(j));
        }
    }

    #[test]
    fn composition_and_volume((rule, _, lens) in substitution_rule(), n in 0usize..2, mid in 1usize..3, top in 1usize..3) {
        let (m, big) = (n + mid, n + mid + top);
        let whole = transition_matrix(&rule, n, big).unwrap();
        prop_assert_eq!(&whole, &(&transition_matrix(&rule, n, m).unwrap() * &transition_matrix(&rule, m, big).unwrap()));
        for j in 0..whole.cols() {
            let mut sum = Scalar::from(0);
            for i in 0..whole.rows() {
                sum = &sum + &(&Scalar::from_int(whole.get(i, j).clone()) * &rule.volume(n, i).unwrap());
            }
            prop_assert_eq!(&sum, &rule.volume(big, j).unwrap());
        }
        if n == 0 {
            for (j, len) in lens.iter().enumerate() {
                prop_assert_eq!(rule.volume(0, j).unwrap(), Scalar::from(*len));
            }
        }
    }

    #[test]
    fn primitivity_is_monotone((rule, _, _) in substitution_rule()) {
        let report = primitivity(&rule, 6).unwrap();
        for l in &report.levels {
            if let PrimitivityVerdict::Primitive { witness } = l.verdict {
                for big in witness..=6 {
                    prop_assert!(transition_matrix(&rule, l.n, big).unwrap().is_positive());
                }
            }
        }
    }

    #[test]
    fn count_patch_matches_scan(hay in proptest::collection::vec(0usize..2, 0..300), needle in proptest::collection::vec(0usize..2, 1..6)) {
        let rule = parse_rule_str("dim 1\ntile a\ntile b len 2\nlevel(n): a -> a b ; b -> a\n").unwrap();
        let h = ConcretePatch::from_word(&rule, 0, hay.clone()).unwrap();
        let p = ConcretePatch::from_word(&rule, 0, needle.clone()).unwrap();
        let naive = if needle.len() > hay.len() { 0 } else { hay.windows(needle.len()).filter(|w| *w == needle.as_slice()).count() };
        prop_assert_eq!(count_patch(&h, &p), naive as u64);
    }
}
