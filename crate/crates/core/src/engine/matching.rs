use std::collections::HashMap;

use super::patch::{ConcretePatch, Coord, PatchPieces};

/// Number of translates of `needle` lying entirely inside `haystack`.
///
/// Pieces are compared by type index, so both patches should be over the
/// same level of the same rule; patches of different levels or dimensions
/// never match. An empty needle matches nowhere.
pub fn count_patch(haystack: &ConcretePatch, needle: &ConcretePatch) -> u64 {
    if haystack.level != needle.level || needle.is_empty() || haystack.den != needle.den {
        return 0;
    }
    match (&haystack.pieces, &needle.pieces) {
        (PatchPieces::Line(h), PatchPieces::Line(n)) => count_word(h, n),
        (PatchPieces::Plane(_), PatchPieces::Plane(n)) => {
            let index: HashMap<(Coord, Coord), usize> = haystack
                .placements()
                .into_iter()
                .map(|p| ((p.x, p.y), p.piece))
                .collect();
            let anchor = n[0];
            let mut count = 0;
            for (&(x, y), &piece) in &index {
                if piece != anchor.piece {
                    continue;
                }
                let fits = n.iter().all(|q| {
                    let (Some(qx), Some(qy)) = (
                        x.checked_add(q.x).and_then(|v| v.checked_sub(anchor.x)),
                        y.checked_add(q.y).and_then(|v| v.checked_sub(anchor.y)),
                    ) else {
                        return false;
                    };
                    index.get(&(qx, qy)) == Some(&q.piece)
                });
                if fits {
                    count += 1;
                }
            }
            count
        }
        _ => 0,
    }
}

/// Translations `t` with `needle + t` inside `haystack`, in no particular
/// order. Both patches are read relative to their own origins.
pub fn patch_occurrences(haystack: &ConcretePatch, needle: &ConcretePatch) -> Vec<(Coord, Coord)> {
    if haystack.level != needle.level || needle.is_empty() || haystack.den != needle.den {
        return Vec::new();
    }
    match (&haystack.pieces, &needle.pieces) {
        (PatchPieces::Line(h), PatchPieces::Line(n)) => {
            let ends = word_matches(h, n);
            let mut out = Vec::with_capacity(ends.len());
            let mut x = Coord::ZERO;
            let mut next = ends.iter().peekable();
            for (i, &c) in h.iter().enumerate() {
                if next.peek().is_some_and(|&&start| start == i) {
                    out.push((x, Coord::ZERO));
                    next.next();
                }
                x = x + haystack.extents[c].0;
            }
            out
        }
        (PatchPieces::Plane(_), PatchPieces::Plane(n)) => {
            let index: HashMap<(Coord, Coord), usize> = haystack
                .placements()
                .into_iter()
                .map(|p| ((p.x, p.y), p.piece))
                .collect();
            let anchor = n[0];
            let mut out = Vec::new();
            for (&(x, y), &piece) in &index {
                if piece != anchor.piece {
                    continue;
                }
                let (Some(tx), Some(ty)) = (x.checked_sub(anchor.x), y.checked_sub(anchor.y))
                else {
                    continue;
                };
                let fits = n
                    .iter()
                    .all(|q| match (q.x.checked_add(tx), q.y.checked_add(ty)) {
                        (Some(qx), Some(qy)) => index.get(&(qx, qy)) == Some(&q.piece),
                        _ => false,
                    });
                if fits {
                    out.push((tx, ty));
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

/// Start indices of the occurrences of `needle` in `hay`, increasing.
fn word_matches(hay: &[usize], needle: &[usize]) -> Vec<usize> {
    let mut starts = Vec::new();
    kmp(hay, needle, |end| starts.push(end + 1 - needle.len()));
    starts
}

fn count_word(hay: &[usize], needle: &[usize]) -> u64 {
    let mut count = 0;
    kmp(hay, needle, |_| count += 1);
    count
}

/// Calls `hit` with the end index of every occurrence of `needle` in `hay`,
/// overlaps included (Knuth-Morris-Pratt).
fn kmp(hay: &[usize], needle: &[usize], mut hit: impl FnMut(usize)) {
    let mut fail = vec![0usize; needle.len()];
    let mut k = 0;
    for i in 1..needle.len() {
        while k > 0 && needle[i] != needle[k] {
            k = fail[k - 1];
        }
        if needle[i] == needle[k] {
            k += 1;
        }
        fail[i] = k;
    }
    k = 0;
    for (i, &c) in hay.iter().enumerate() {
        while k > 0 && c != needle[k] {
            k = fail[k - 1];
        }
        if c == needle[k] {
            k += 1;
        }
        if k == needle.len() {
            hit(i);
            k = fail[k - 1];
        }
    }
}
