//! Enumeration of fixed-length words over small alphabets.

use crate::error::{Error, Result};

/// `radix^len`, or `None` on overflow.
pub fn word_count(radix: usize, len: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..len {
        acc = acc.checked_mul(radix)?;
    }
    Some(acc)
}

/// Checks that `radix^len <= cap` and returns the count.
pub fn checked_count(radix: usize, len: usize, cap: usize, what: &str) -> Result<usize> {
    match word_count(radix, len) {
        Some(c) if c <= cap => Ok(c),
        _ => Err(Error::Capacity(format!("{what}: {radix}^{len} words exceeds the enumeration cap {cap}"))),
    }
}

/// Word with index `idx`, most significant symbol first.
pub fn word_at(mut idx: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut w = vec![0; len];
    for i in (0..len).rev() {
        w[i] = idx % radix;
        idx /= radix;
    }
    w
}

pub fn word_index(word: &[usize], radix: usize) -> usize {
    word.iter().fold(0, |acc, &a| acc * radix + a)
}

/// Calls `f(index, word)` for every word in lexicographic order.
pub fn for_each_word(radix: usize, len: usize, mut f: impl FnMut(usize, &[usize])) {
    let mut w = vec![0usize; len];
    let mut idx = 0usize;
    loop {
        f(idx, &w);
        idx += 1;
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            w[i] += 1;
            if w[i] < radix {
                break;
            }
            w[i] = 0;
        }
    }
}

/// All compositions of `total` into `parts` nonnegative parts, lexicographic.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; parts];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            rec(pos + 1, left - v, cur, out);
        }
    }
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, total, &mut cur, &mut out);
    out
}

/// Number of compositions, saturating.
pub fn composition_count(total: usize, parts: usize) -> usize {
    if parts == 0 {
        return usize::from(total == 0);
    }
    // C(total + parts - 1, parts - 1)
    let k = parts - 1;
    let n = total + k;
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Lattice points of the probability simplex with denominator `resolution`.
pub fn simplex_grid(dim: usize, resolution: usize) -> Vec<Vec<f64>> {
    compositions(resolution, dim)
        .into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / resolution as f64).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_matches_indexing() {
        let mut seen = 0;
        for_each_word(3, 4, |i, w| {
            assert_eq!(word_at(i, 3, 4), w);
            assert_eq!(word_index(w, 3), i);
            seen += 1;
        });
        assert_eq!(seen, 81);
    }

    #[test]
    fn composition_counts() {
        for (t, p) in [(0, 1), (5, 2), (6, 3), (10, 4)] {
            assert_eq!(compositions(t, p).len(), composition_count(t, p));
        }
        assert_eq!(simplex_grid(3, 32).len(), 561);
    }
}
