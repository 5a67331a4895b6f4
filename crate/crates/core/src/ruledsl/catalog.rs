//! Built-in rules, each generated as `.fuse` text and parsed.

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

use super::expr::IntExpr;
use super::{parse_rule, ParseError, RuleSource};
use crate::rule::FusionRule;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),
    #[error("bad parameter `{param}` for `{entry}`: {reason}")]
    BadParam {
        entry: String,
        param: String,
        reason: String,
    },
    #[error("catalog entry `{entry}` failed to build: {source}")]
    Rule { entry: String, source: ParseError },
}

struct Entry {
    name: &'static str,
    summary: &'static str,
    params: &'static [&'static str],
}

const ENTRIES: &[Entry] = &[
    Entry {
        name: "chacon",
        summary: "a -> a a b a, b -> b",
        params: &["la", "lb"],
    },
    Entry {
        name: "fibonacci_1d",
        summary: "a -> a b, b -> a",
        params: &["geometry"],
    },
    Entry {
        name: "two_measures",
        summary: "a -> a^(10^n) b, b -> b^(10^n) a",
        params: &[],
    },
    Entry {
        name: "three_letter_kappa",
        summary: "three types, two ergodic measures",
        params: &[],
    },
    Entry {
        name: "coincidence_waiting",
        summary: "coincident with waiting, not pure point",
        params: &[],
    },
    Entry {
        name: "three_tile_solenoid",
        summary: "three tiles over one solenoid",
        params: &[],
    },
    Entry {
        name: "scrambled_fibonacci",
        summary: "accelerated Fibonacci with exceptional odd levels",
        params: &["N", "horizon", "geometry"],
    },
    Entry {
        name: "fibonacci_dpv",
        summary: "2-D product of Fibonacci",
        params: &["geometry"],
    },
    Entry {
        name: "nonpisot_dpv",
        summary: "2-D product of a -> a b b b, b -> a",
        params: &[],
    },
    Entry {
        name: "ap_example",
        summary: "a -> a b b, b permuting a^2 b^3",
        params: &[],
    },
    Entry {
        name: "border_forced",
        summary: "a -> a b b, b -> a b b b",
        params: &[],
    },
    Entry {
        name: "period_doubling",
        summary: "a -> a b, b -> a a",
        params: &[],
    },
    Entry {
        name: "periodic",
        summary: "a -> a^block",
        params: &["block"],
    },
    Entry {
        name: "periodic_squares",
        summary: "one unit square, 2 x 2 blocks",
        params: &[],
    },
];

/// Names of every built-in rule, with a one-line description.
pub fn catalog_names() -> Vec<(&'static str, &'static str)> {
    ENTRIES.iter().map(|e| (e.name, e.summary)).collect()
}

/// Builds the named rule. Parameters are given as strings; see [`catalog_names`].
pub fn catalog(name: &str, params: &BTreeMap<String, String>) -> Result<FusionRule, CatalogError> {
    let entry = ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CatalogError::UnknownCatalogEntry(name.into()))?;
    if let Some(k) = params.keys().find(|k| !entry.params.contains(&k.as_str())) {
        return Err(bad(name, k, "not a parameter of this entry"));
    }
    let text = source_text(name, params)?;
    parse_rule(&RuleSource::new(text, name)).map_err(|source| CatalogError::Rule {
        entry: name.into(),
        source,
    })
}

/// The `.fuse` text behind a catalog entry.
pub fn source_text(name: &str, params: &BTreeMap<String, String>) -> Result<String, CatalogError> {
    let get = |k: &str| params.get(k).map(String::as_str);
    let text = match name {
        "chacon" => {
            let la = length(name, "la", get("la"))?;
            let lb = length(name, "lb", get("lb"))?;
            format!("dim 1\ntile a len {la}\ntile b len {lb}\nrecognizable\nlevel(n): a -> a a b a ; b -> b\n")
        }
        "fibonacci_1d" => {
            let (la, lb) = if quadratic(name, get("geometry"))? { ("phi", "1") } else { ("1", "1") };
            format!("dim 1\ntile a len {la}\ntile b len {lb}\nrecognizable\nlevel(n): a -> a b ; b -> a\n")
        }
        "two_measures" => "dim 1\ntile a len 1\ntile b len 1\nrecognizable\n\
                           level(n): a -> a^(10^n) b ; b -> b^(10^n) a\n"
            .into(),
        "three_letter_kappa" => "dim 1\ntile a len 1\ntile b len 1\ntile c len 1\nrecognizable\n\
                                 level(n): a -> a^(10^n) b c a^(10^n) ; b -> b^(10^n) a c b^(10^n) ;\n\
                                 \x20 c -> a^(10^n) c c b^(10^n)\n"
            .into(),
        "coincidence_waiting" => "dim 1\ntile b len 1\ntile c len 1\nrecognizable\n\
                                  subst s: b -> b c^5 b^4 ; c -> c b^5 c^4\n\
                                  level(n): b -> b s^(n)[b] c ; c -> b s^(n)[c] c\n"
            .into(),
        "three_tile_solenoid" => "dim 1\ntile a len 1\ntile b len 1\ntile c len 1\nrecognizable\n\
                                  subst s: a -> a^10 ; b -> b c^5 b^4 ; c -> c b^5 c^4\n\
                                  level(n): a -> a s^(n)[a] b c ; b -> a s^(n)[b] b c ; c -> a s^(n)[c] b c\n"
            .into(),
        "scrambled_fibonacci" => scrambled(name, params)?,
        "fibonacci_dpv" => {
            let sizes = if quadratic(name, get("geometry"))? {
                ["phi x phi", "phi x 1", "1 x phi", "1 x 1"]
            } else {
                ["1 x 1"; 4]
            };
            format!(
                "dim 2\ntile a size {}\ntile b size {}\ntile c size {}\ntile d size {}\nrecognizable\n\
                 level(n): a -> [c a / d b] ; b -> [a c] ; c -> [b / a] ; d -> [a]\n",
                sizes[0], sizes[1], sizes[2], sizes[3]
            )
        }
        "nonpisot_dpv" => "dim 2\ntile a size 1 x 1\ntile b size 1 x 1\ntile c size 1 x 1\ntile d size 1 x 1\n\
                           recognizable\n\
                           level(n): a -> [c^3 a / d^3 b / d^3 b / d^3 b] ; b -> [c a c c] ;\n\
                           \x20 c -> [b / b / a / b] ; d -> [a]\n"
            .into(),
        "ap_example" => "dim 1\ntile a len 1\ntile b len 1\nrecognizable\n\
                         level(n) odd: a -> a b b ; b -> a b b a b\n\
                         level(n) even: a -> a b b ; b -> b a b b a\n"
            .into(),
        "border_forced" => "dim 1\ntile a len 1\ntile b len 1\nrecognizable\n\
                            level(n): a -> a b b ; b -> a b b b\n"
            .into(),
        "period_doubling" => "dim 1\ntile a len 1\ntile b len 1\nrecognizable\n\
                              level(n): a -> a b ; b -> a a\n"
            .into(),
        "periodic" => {
            let block = match get("block") {
                None => 2,
                Some(s) => s
                    .parse::<u32>()
                    .ok()
                    .filter(|&b| b >= 1)
                    .ok_or_else(|| bad(name, "block", "expected a positive integer"))?,
            };
            format!("dim 1\ntile a len 1\nlevel(n): a -> a^{block}\n")
        }
        "periodic_squares" => "dim 2\ntile a size 1 x 1\nlevel(n): a -> [a a / a a]\n".into(),
        other => return Err(CatalogError::UnknownCatalogEntry(other.into())),
    };
    Ok(text)
}

fn bad(entry: &str, param: &str, reason: impl Into<String>) -> CatalogError {
    CatalogError::BadParam {
        entry: entry.into(),
        param: param.into(),
        reason: reason.into(),
    }
}

fn quadratic(entry: &str, value: Option<&str>) -> Result<bool, CatalogError> {
    match value {
        None if entry == "fibonacci_1d" || entry == "fibonacci_dpv" => Ok(false),
        None => Ok(true),
        Some("unit") => Ok(false),
        Some("quadratic") => Ok(true),
        Some(_) => Err(bad(entry, "geometry", "expected `unit` or `quadratic`")),
    }
}

/// A positive tile length, in rule-file number syntax.
fn length(entry: &str, param: &str, value: Option<&str>) -> Result<String, CatalogError> {
    let Some(v) = value else {
        return Ok("1".into());
    };
    let probe = format!("dim 1\ntile a len {v}\nlevel(n): a -> a a\n");
    match parse_rule(&RuleSource::new(probe, "probe")) {
        Ok(r) if r.volume(0, 0).is_ok_and(|l| l.is_positive()) => Ok(v.to_string()),
        _ => Err(bad(entry, param, format!("`{v}` is not a positive length"))),
    }
}

const FIB_WORD_CAP: usize = 1 << 20;

/// Explicit levels of the scrambled Fibonacci rule. Level `n` is the
/// `N(n)`-th Fibonacci level; odd levels gain an exceptional type `e`
/// (the population of `b` with every `a` first), and even levels replace
/// the first `b` of each supertile with `e`.
fn scrambled(name: &str, params: &BTreeMap<String, String>) -> Result<String, CatalogError> {
    let n_expr = match params.get("N") {
        None => IntExpr::mul(IntExpr::lit(3), IntExpr::Level),
        Some(s) => super::parse::parse_int_expr(s).map_err(|e| bad(name, "N", e.to_string()))?,
    };
    let horizon = match params.get("horizon") {
        None => 6,
        Some(s) => s
            .parse::<usize>()
            .ok()
            .filter(|&h| (2..=64).contains(&h))
            .ok_or_else(|| bad(name, "horizon", "expected an integer in 2..=64"))?,
    };
    let (la, lb) = if quadratic(name, params.get("geometry").map(String::as_str))? {
        ("phi", "1")
    } else {
        ("1", "1")
    };
    let eval = |n: usize| -> Result<i64, CatalogError> {
        if n == 0 {
            return Ok(0);
        }
        n_expr
            .eval(n as u64, 64)
            .ok()
            .and_then(|v| i64::try_from(v).ok())
            .ok_or_else(|| bad(name, "N", format!("N({n}) is not a small integer")))
    };
    let mut text = format!("dim 1\ntile a len {la}\ntile b len {lb}\nrecognizable\n");
    for n in 1..=horizon {
        let step = eval(n)? - eval(n - 1)?;
        if step <= 2 {
            return Err(bad(
                name,
                "N",
                format!("N({n}) - N({}) = {step}, must exceed 2", n - 1),
            ));
        }
        let a = fib_word(0, step as usize).ok_or_else(|| bad(name, "N", "increments too large"))?;
        let b = fib_word(1, step as usize).ok_or_else(|| bad(name, "N", "increments too large"))?;
        write!(text, "level {n}:").unwrap();
        if n % 2 == 1 {
            let ones = b.iter().filter(|&&c| c == 1).count();
            let e: Vec<u8> = std::iter::repeat_n(0, b.len() - ones)
                .chain(std::iter::repeat_n(1, ones))
                .collect();
            write!(
                text,
                " a -> {} ; b -> {} ; e -> {}",
                runs(&a),
                runs(&b),
                runs(&e)
            )
            .unwrap();
        } else {
            write!(
                text,
                " a -> {} ; b -> {}",
                runs(&scramble(a)),
                runs(&scramble(b))
            )
            .unwrap();
        }
        text.push('\n');
    }
    Ok(text)
}

/// `σ^k(x)` for σ: a → ab, b → a, with `0 = a`, `1 = b`.
fn fib_word(seed: u8, k: usize) -> Option<Vec<u8>> {
    let mut w = vec![seed];
    for _ in 0..k {
        let mut next = Vec::with_capacity(w.len() * 2);
        for &c in &w {
            if c == 0 {
                next.extend([0, 1]);
            } else {
                next.push(0);
            }
        }
        if next.len() > FIB_WORD_CAP {
            return None;
        }
        w = next;
    }
    Some(w)
}

/// Replaces the first `b` with `e` (code 2).
fn scramble(mut w: Vec<u8>) -> Vec<u8> {
    if let Some(p) = w.iter().position(|&c| c == 1) {
        w[p] = 2;
    }
    w
}

fn runs(w: &[u8]) -> String {
    let names = ["a", "b", "e"];
    let mut parts = Vec::new();
    let mut i = 0;
    while i < w.len() {
        let mut j = i;
        while j < w.len() && w[j] == w[i] {
            j += 1;
        }
        let name = names[w[i] as usize];
        parts.push(if j - i == 1 {
            name.to_string()
        } else {
            format!("{name}^{}", j - i)
        });
        i = j;
    }
    parts.join(" ")
}
