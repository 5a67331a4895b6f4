use std::collections::BTreeMap;

use fusion_lab::engine::{transition_matrix, ConcretePatch};
use fusion_lab::measures::{
    balance_delta, constant_kappa, delta_diameter, direction_matrix, ergodic_vertices,
    kappa_frequencies, kappa_frequency_levels, pair_frequency, patch_frequency, unique_ergodicity,
    ErgodicityStatus, ErgodicityTolerances,
};
use fusion_lab::ruledsl::catalog;
use fusion_lab::{parse_rule_str, FusionRule, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn cat(name: &str) -> FusionRule {
    catalog(name, &BTreeMap::new()).unwrap()
}

fn cat_with(name: &str, key: &str, value: &str) -> FusionRule {
    let params = BTreeMap::from([(key.to_string(), value.to_string())]);
    catalog(name, &params).unwrap()
}

fn ratio(a: i64, b: i64) -> Scalar {
    Scalar::ratio(a, b)
}

const INV_PHI_SQ: f64 = 0.381_966_011_250_105_1;

#[test]
fn two_measures_direction_columns() {
    let d = direction_matrix(&cat("two_measures"), 0, 1).unwrap();
    assert_eq!(
        d.columns,
        vec![
            vec![ratio(10, 11), ratio(1, 11)],
            vec![ratio(1, 11), ratio(10, 11)]
        ]
    );
}

#[test]
fn identical_columns_give_identical_directions() {
    let rule =
        parse_rule_str("dim 1\ntile a\ntile b\nlevel(n): a -> a b b ; b -> b a b\n").unwrap();
    let d = direction_matrix(&rule, 0, 3).unwrap();
    assert_eq!(d.columns[0], d.columns[1]);
    assert!(delta_diameter(&rule, 0, 3).unwrap().is_zero());
}

/// Largest L¹ distance between columns of `D_{0,N}` for the Kronecker square
/// of `[[1,1],[1,0]]`, computed in floating point.
fn kronecker_fibonacci_spread(big_n: u32) -> f64 {
    let f = [[1.0f64, 1.0], [1.0, 0.0]];
    let mut m = [[0.0f64; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = f[i / 2][j / 2] * f[i % 2][j % 2];
        }
    }
    let mut p = m;
    for _ in 1..big_n {
        let mut q = [[0.0f64; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                q[i][j] = (0..4).map(|k| p[i][k] * m[k][j]).sum();
            }
        }
        p = q;
    }
    let cols: Vec<Vec<f64>> = (0..4)
        .map(|j| {
            let total: f64 = (0..4).map(|i| p[i][j]).sum();
            (0..4).map(|i| p[i][j] / total).collect()
        })
        .collect();
    let mut best = 0.0f64;
    for a in &cols {
        for b in &cols {
            best = best.max(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum());
        }
    }
    best
}

fn column_spread(rule: &FusionRule, big_n: usize) -> f64 {
    delta_diameter(rule, 0, big_n).unwrap().to_f64()
}

#[test]
fn fibonacci_dpv_columns_converge() {
    let rule = cat("fibonacci_dpv");
    let at_12 = column_spread(&rule, 12);
    let oracle = kronecker_fibonacci_spread(12);
    assert!(
        (at_12 - oracle).abs() < 1e-12 * oracle.max(1.0),
        "{at_12} vs {oracle}"
    );
    // the spread first drops below 10⁻⁶ at N = 16
    assert!(column_spread(&rule, 15) > 1e-6);
    assert!(column_spread(&rule, 16) < 1e-6);
}

#[test]
fn single_type_diameter_is_zero() {
    let rule = parse_rule_str("dim 1\ntile a len 2\nlevel(n): a -> a a a\n").unwrap();
    assert!(delta_diameter(&rule, 0, 3).unwrap().is_zero());
}

#[test]
fn two_measures_diameters_persist() {
    let rule = cat("two_measures");
    let ds: Vec<Scalar> = (1..=6)
        .map(|n| delta_diameter(&rule, 0, n).unwrap())
        .collect();
    for w in ds.windows(2) {
        assert!(w[1] < w[0]);
    }
    // independent: the columns are (1±α_N)/2 swapped, so the L¹ diameter is 2α_N
    for (k, d) in ds.iter().enumerate() {
        assert_eq!(*d, Scalar::from_rational(alpha(k + 1) * BigInt::from(2)));
        assert!(d.to_f64() > 1.6);
    }
}

fn alpha(n: usize) -> BigRational {
    (1..=n as u32).fold(BigRational::one(), |acc, k| {
        let t = BigInt::from(10).pow(k);
        acc * BigRational::new(&t - 1, &t + 1)
    })
}

#[test]
fn fibonacci_dpv_diameters_shrink_like_phi_squared() {
    let rule = cat("fibonacci_dpv");
    let ds: Vec<f64> = (1..=12)
        .map(|n| delta_diameter(&rule, 0, n).unwrap().to_f64())
        .collect();
    let tail: Vec<f64> = ds[6..].windows(2).map(|w| w[1] / w[0]).collect();
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    assert!((mean - INV_PHI_SQ).abs() < 0.02, "{ds:?}");
}

#[test]
fn balance_scores() {
    let tm = cat("two_measures");
    for n in 1..=5u32 {
        assert_eq!(
            balance_delta(&tm, n as usize).unwrap(),
            BigRational::new(BigInt::one(), BigInt::from(10).pow(n))
        );
    }
    let fib = cat("fibonacci_1d");
    assert!(balance_delta(&fib, 1).unwrap().is_zero());
    assert_eq!(
        balance_delta(&fib.induce_every(2, 10).unwrap(), 1).unwrap(),
        BigRational::new(1.into(), 2.into())
    );
    let ones = parse_rule_str("dim 1\ntile a\ntile b\nlevel(n): a -> a b ; b -> a b\n").unwrap();
    assert!(balance_delta(&ones, 3).unwrap().is_one());
}

#[test]
fn ergodicity_verdicts() {
    let tol = ErgodicityTolerances::default();
    let v = unique_ergodicity(&cat("fibonacci_dpv"), 8, &tol).unwrap();
    assert_eq!(v.status, ErgodicityStatus::UniquelyErgodic);
    assert_eq!(v.clause, Some('a'));

    let v = unique_ergodicity(&cat("two_measures"), 6, &tol).unwrap();
    assert_eq!(v.status, ErgodicityStatus::NotUniquelyErgodic);
    assert_eq!(v.clause, Some('c'));

    let rule =
        parse_rule_str("dim 1\ntile a\ntile b\nlevel(n): a -> a^(2^n) b ; b -> a b\n").unwrap();
    for n in 1..=6u32 {
        assert_eq!(
            balance_delta(&rule, n as usize).unwrap(),
            BigRational::new(1.into(), BigInt::from(2).pow(n))
        );
    }
    let v = unique_ergodicity(&rule, 6, &tol).unwrap();
    assert_eq!(v.status, ErgodicityStatus::Inconclusive);
    assert_eq!(v.clause, None);
}

#[test]
fn two_measures_kappa_fraction() {
    let rule = cat("two_measures");
    let kappa = constant_kappa(0, 6);
    for big_n in 1..=6 {
        let rho = kappa_frequencies(&rule, &kappa, 0, big_n).unwrap();
        let total = &rho.entries[0] + &rho.entries[1];
        let fraction = &rho.entries[0] / &total;
        let want = (BigRational::one() + alpha(big_n)) / BigInt::from(2);
        assert_eq!(fraction, Scalar::from_rational(want), "N = {big_n}");
    }
}

#[test]
fn single_type_kappa_is_inverse_volume() {
    let rule = parse_rule_str("dim 1\ntile a len 3\nlevel(n): a -> a a\n").unwrap();
    let rho = kappa_frequencies(&rule, &constant_kappa(0, 4), 2, 4).unwrap();
    assert_eq!(rho.entries, vec![Scalar::ratio(1, 12)]);
}

#[test]
fn three_letter_kappa_c_is_the_average() {
    let rule = cat("three_letter_kappa");
    let rho = |k| {
        kappa_frequencies(&rule, &constant_kappa(k, 6), 0, 6)
            .unwrap()
            .to_f64()
    };
    let (a, b, c) = (rho(0), rho(1), rho(2));
    for i in 0..3 {
        assert!(
            (c[i] - (a[i] + b[i]) / 2.0).abs() < 1e-6,
            "{a:?} {b:?} {c:?}"
        );
    }
}

#[test]
fn dpv_single_tile_frequency() {
    let rule = cat("fibonacci_dpv");
    let rho = kappa_frequency_levels(&rule, &constant_kappa(0, 14), 0..=7, 14).unwrap();
    let tile =
        ConcretePatch::from_placements(&rule, 0, &[(0, Scalar::zero(), Scalar::zero())]).unwrap();
    let f = patch_frequency(&rule, &rho, &tile, 2..=7).unwrap();
    assert!(
        (f.last().unwrap().to_f64() - INV_PHI_SQ).abs() < 1e-3,
        "{:?}",
        f.partial_sums
    );
    // single tiles never straddle supertile borders, so the sums are exact
    assert!(f.gaps.iter().all(|g| *g == 0.0), "{:?}", f.gaps);
}

#[test]
fn whole_supertile_counts_itself() {
    let rule = cat("two_measures");
    let rho = kappa_frequency_levels(&rule, &constant_kappa(0, 3), [1], 3).unwrap();
    let p1a = fusion_lab::engine::expand(&rule, 1, 0, 0).unwrap();
    let f = patch_frequency(&rule, &rho, &p1a, [1]).unwrap();
    assert_eq!(f.partial_sums[0], rho[0].entries[0]);
}

/// Frequency of `word` per unit length in a long prefix of the Fibonacci word.
fn brute_force_frequency(word: &[u8], length: usize) -> f64 {
    let mut s = vec![b'a'];
    while s.len() < length {
        s = s
            .iter()
            .flat_map(|&c| {
                if c == b'a' {
                    vec![b'a', b'b']
                } else {
                    vec![b'a']
                }
            })
            .collect();
    }
    s.truncate(length);
    let hits = s.windows(word.len()).filter(|w| *w == word).count();
    hits as f64 / length as f64
}

#[test]
fn fibonacci_ab_frequency() {
    let rule = cat("fibonacci_1d");
    let rho = kappa_frequency_levels(&rule, &constant_kappa(0, 30), 4..=20, 30).unwrap();
    let ab = ConcretePatch::from_word(&rule, 0, vec![0, 1]).unwrap();
    let f = patch_frequency(&rule, &rho, &ab, 4..=20).unwrap();
    let oracle = brute_force_frequency(b"ab", 100_000);
    assert!((oracle - INV_PHI_SQ).abs() < 1e-4);
    assert!((f.last().unwrap().to_f64() - oracle).abs() < 1e-4);
    assert!((f.estimate() - INV_PHI_SQ).abs() < 1e-6, "{}", f.estimate());
    for w in f.gaps[2..].windows(2) {
        assert!(w[1] <= w[0], "{:?}", f.gaps);
    }
}

#[test]
fn vertices() {
    let r = ergodic_vertices(&cat("two_measures"), 0, 4).unwrap();
    assert_eq!(r.vertices, vec![0, 1]);
    assert_eq!(r.candidate_count(), 2);

    let single = parse_rule_str("dim 1\ntile a\nlevel(n): a -> a a\n").unwrap();
    assert_eq!(
        ergodic_vertices(&single, 0, 3).unwrap().candidate_count(),
        1
    );

    let r = ergodic_vertices(&cat("three_letter_kappa"), 0, 4).unwrap();
    assert_eq!(r.persistent, vec![0, 1], "{r:?}");
    assert!(r.relative_distance[2] < 1e-3);
}

#[test]
fn vertex_dimension_limit() {
    let letters: Vec<String> = (0..9).map(|i| format!("t{i}")).collect();
    let mut text = String::from("dim 1\n");
    for l in &letters {
        text += &format!("tile {l}\n");
    }
    let bodies: Vec<String> = letters.iter().map(|l| format!("{l} -> {l} {l}")).collect();
    text += &format!("level(n): {}\n", bodies.join(" ; "));
    let rule = parse_rule_str(&text).unwrap();
    assert!(matches!(
        ergodic_vertices(&rule, 0, 2),
        Err(fusion_lab::FusionError::DimensionTooHigh { dim: 9 })
    ));
}

fn quadratic_length(word: &[u8]) -> f64 {
    word.iter()
        .map(|&c| {
            if c == b'a' {
                1.618_033_988_749_895
            } else {
                1.0
            }
        })
        .sum()
}

#[test]
fn fibonacci_pair_frequency() {
    let rule = cat_with("fibonacci_1d", "geometry", "quadratic");
    let rho = kappa_frequency_levels(&rule, &constant_kappa(0, 24), 4..=14, 24).unwrap();
    let a = ConcretePatch::from_word(&rule, 0, vec![0]).unwrap();
    let phi_sq = &Scalar::phi() + &Scalar::one();
    let pf = pair_frequency(&rule, &rho, &a, &[phi_sq], 4..=14).unwrap();
    // oracle: "a" followed by an "a" at distance φ² means the word "aba"
    let word: Vec<u8> = {
        let mut s = vec![b'a'];
        while s.len() < 200_000 {
            s = s
                .iter()
                .flat_map(|&c| {
                    if c == b'a' {
                        vec![b'a', b'b']
                    } else {
                        vec![b'a']
                    }
                })
                .collect();
        }
        s
    };
    let len = quadratic_length(&word);
    let a_freq = |w: &[u8]| w.iter().filter(|&&c| c == b'a').count() as f64 / quadratic_length(w);
    let aba = word.windows(3).filter(|w| *w == b"aba").count() as f64 / len;
    let pair = pf.pair.last().unwrap().to_f64();
    assert!((pair - aba).abs() < 1e-3, "{pair} vs {aba}");
    let limit = aba / (a_freq(&word) * a_freq(&word));
    assert!(pf.ratios.iter().all(|r| *r > 1.0), "{:?}", pf.ratios);
    assert!(
        (pf.ratios.last().unwrap() - limit).abs() < 1e-2,
        "{:?} vs {limit}",
        pf.ratios
    );

    let bb = ConcretePatch::from_word(&rule, 0, vec![1, 1]).unwrap();
    let none = pair_frequency(&rule, &rho, &bb, &[Scalar::one()], 4..=8).unwrap();
    assert!(none.pair.partial_sums.iter().all(Zero::is_zero));
    assert!(none.ratios.iter().all(|r| *r == 0.0));
}

#[test]
fn two_measures_pair_frequency_floor() {
    let rule = cat("two_measures");
    let rho = kappa_frequency_levels(&rule, &constant_kappa(0, 5), 2..=3, 5).unwrap();
    let b = ConcretePatch::from_word(&rule, 0, vec![1]).unwrap();
    let shift = rule.volume(1, 1).unwrap();
    let pf = pair_frequency(&rule, &rho, &b, &[shift], 2..=3).unwrap();
    for s in &pf.pair.partial_sums {
        assert!(s.to_f64() > 0.0);
    }
    assert!(pf.ratios.iter().all(|r| *r > 1.0), "{:?}", pf.ratios);
}

/// Random constant-length rules: a level-1 block and a generic block, each
/// with every body of the same length.
fn constant_length_rule() -> impl Strategy<Value = FusionRule> {
    (2usize..=3, 1usize..=3, 1usize..=3)
        .prop_flat_map(|(k, l1, l2)| {
            let word = move |len| prop::collection::vec(0..k, len);
            (
                Just(k),
                prop::collection::vec(word(l1), k),
                prop::collection::vec(word(l2), k),
            )
        })
        .prop_filter_map("every column needs a nonzero entry", |(k, first, rest)| {
            let names = ["a", "b", "c"];
            let block = |bodies: &[Vec<usize>]| {
                (0..k)
                    .map(|i| {
                        let body: Vec<&str> = bodies[i].iter().map(|&c| names[c]).collect();
                        format!("{} -> {}", names[i], body.join(" "))
                    })
                    .collect::<Vec<_>>()
                    .join(" ; ")
            };
            let mut text = String::from("dim 1\n");
            for name in &names[..k] {
                text += &format!("tile {name}\n");
            }
            text += &format!(
                "level 1: {}\nlevel(n) from 2: {}\n",
                block(&first),
                block(&rest)
            );
            parse_rule_str(&text).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn columns_are_volume_normalized(rule in constant_length_rule(), n in 0usize..3, gap in 1usize..4) {
        let d = direction_matrix(&rule, n, n + gap).unwrap();
        let vols = rule.volumes(n).unwrap();
        for col in &d.columns {
            let total: Scalar = col.iter().zip(&vols).map(|(c, v)| c * v).sum();
            prop_assert!(total.is_one());
        }
    }

    #[test]
    fn polytopes_nest_and_contract(rule in constant_length_rule(), n in 0usize..2) {
        for big_n in n + 1..n + 5 {
            let before = delta_diameter(&rule, n, big_n).unwrap();
            let after = delta_diameter(&rule, n, big_n + 1).unwrap();
            prop_assert!(after <= before);
            let delta = Scalar::from_rational(balance_delta(&rule, big_n + 1).unwrap());
            prop_assert!(after <= &(&Scalar::one() - &delta) * &before);
        }
    }

    #[test]
    fn kappa_vectors_are_transition_consistent(rule in constant_length_rule(), k in 0usize..2, n in 0usize..2) {
        let big_n = 5;
        let kappa = constant_kappa(k % rule.type_count(big_n).unwrap(), big_n);
        let low = kappa_frequencies(&rule, &kappa, n, big_n).unwrap();
        let high = kappa_frequencies(&rule, &kappa, n + 2, big_n).unwrap();
        let m = transition_matrix(&rule, n, n + 2).unwrap();
        for (i, want) in low.entries.iter().enumerate() {
            let got: Scalar = (0..m.cols()).map(|j| &Scalar::from(m.get(i, j).clone()) * &high.entries[j]).sum();
            prop_assert_eq!(&got, want);
        }
        let vols = rule.volumes(n).unwrap();
        let total: Scalar = low.entries.iter().zip(&vols).map(|(r, v)| r * v).sum();
        prop_assert!(total.is_one());
    }
}
