//! Shortest edit script between two line sequences.
//!
//! Uses the linear-space variant of Myers' O(ND) algorithm: find the middle
//! snake of the optimal path, then recurse on both halves.

use std::ops::{Index, IndexMut, Range};

/// A maximal run of deletions and insertions between two unchanged regions.
///
/// `old_start`/`new_start` are the positions of the hunk in the old and new
/// sequences; the lines `old[old_start..old_start + deleted]` are replaced by
/// `new[new_start..new_start + inserted]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hunk {
    pub old_start: usize,
    pub deleted: usize,
    pub new_start: usize,
    pub inserted: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EditScript {
    pub hunks: Vec<Hunk>,
    pub old_len: usize,
    pub new_len: usize,
}

impl EditScript {
    pub fn is_empty(&self) -> bool {
        self.hunks.is_empty()
    }

    /// Total number of deleted plus inserted lines.
    pub fn edit_count(&self) -> usize {
        self.hunks.iter().map(|h| h.deleted + h.inserted).sum()
    }

    /// Rebuilds the new sequence from `old`, taking inserted lines from `new`.
    ///
    /// Unchanged regions are copied from `old`, so comparing the result with
    /// `new` checks that the script is valid.
    pub fn apply<T: Clone>(&self, old: &[T], new: &[T]) -> Vec<T> {
        let mut out = Vec::with_capacity(self.new_len);
        let mut cursor = 0;
        for h in &self.hunks {
            out.extend_from_slice(&old[cursor..h.old_start]);
            out.extend_from_slice(&new[h.new_start..h.new_start + h.inserted]);
            cursor = h.old_start + h.deleted;
        }
        out.extend_from_slice(&old[cursor..]);
        out
    }
}

/// Line change totals of a script.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChangeCounts {
    pub added: u64,
    pub deleted: u64,
    pub modified: u64,
}

/// Pairs deletions with insertions inside each hunk: the paired lines count
/// as modified, the surplus as pure additions or deletions.
pub fn classify_hunks(script: &EditScript) -> ChangeCounts {
    let mut counts = ChangeCounts::default();
    for h in &script.hunks {
        let (d, i) = (h.deleted as u64, h.inserted as u64);
        counts.modified += d.min(i);
        counts.added += i.saturating_sub(d);
        counts.deleted += d.saturating_sub(i);
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Equal,
    Delete,
    Insert,
}

/// Computes a minimal edit script turning `old` into `new`.
pub fn diff_lines<T: PartialEq>(old: &[T], new: &[T]) -> EditScript {
    let max_d = (old.len() + new.len()).div_ceil(2) + 1;
    let mut vf = V::new(max_d);
    let mut vb = V::new(max_d);
    let mut ops = Vec::new();
    conquer(old, 0..old.len(), new, 0..new.len(), &mut vf, &mut vb, &mut ops);
    EditScript {
        hunks: collect_hunks(&ops),
        old_len: old.len(),
        new_len: new.len(),
    }
}

fn collect_hunks(ops: &[(Op, usize)]) -> Vec<Hunk> {
    let mut hunks = Vec::new();
    let (mut o, mut n) = (0, 0);
    let mut current: Option<Hunk> = None;
    for &(op, len) in ops {
        if len == 0 {
            continue;
        }
        match op {
            Op::Equal => {
                hunks.extend(current.take());
                o += len;
                n += len;
            }
            Op::Delete => {
                let h = current.get_or_insert(Hunk {
                    old_start: o,
                    deleted: 0,
                    new_start: n,
                    inserted: 0,
                });
                h.deleted += len;
                o += len;
            }
            Op::Insert => {
                let h = current.get_or_insert(Hunk {
                    old_start: o,
                    deleted: 0,
                    new_start: n,
                    inserted: 0,
                });
                h.inserted += len;
                n += len;
            }
        }
    }
    hunks.extend(current);
    hunks
}

/// Diagonal-indexed furthest-reaching vector; `k` ranges over `-max..=max`.
struct V {
    offset: isize,
    v: Vec<usize>,
}

impl V {
    fn new(max_d: usize) -> Self {
        Self {
            offset: max_d as isize,
            v: vec![0; 2 * max_d + 2],
        }
    }
}

impl Index<isize> for V {
    type Output = usize;

    fn index(&self, k: isize) -> &usize {
        &self.v[(k + self.offset) as usize]
    }
}

impl IndexMut<isize> for V {
    fn index_mut(&mut self, k: isize) -> &mut usize {
        &mut self.v[(k + self.offset) as usize]
    }
}

fn common_prefix<T: PartialEq>(old: &[T], o: Range<usize>, new: &[T], n: Range<usize>) -> usize {
    old[o].iter().zip(&new[n]).take_while(|(a, b)| a == b).count()
}

fn common_suffix<T: PartialEq>(old: &[T], o: Range<usize>, new: &[T], n: Range<usize>) -> usize {
    old[o]
        .iter()
        .rev()
        .zip(new[n].iter().rev())
        .take_while(|(a, b)| a == b)
        .count()
}

/// Returns a point `(x, y)` on an optimal path, strictly between the corners
/// of the (prefix/suffix-stripped, non-empty) region.
fn middle_snake<T: PartialEq>(
    old: &[T],
    o: Range<usize>,
    new: &[T],
    n: Range<usize>,
    vf: &mut V,
    vb: &mut V,
) -> Option<(usize, usize)> {
    let len_o = o.len();
    let len_n = n.len();
    let delta = len_o as isize - len_n as isize;
    let odd = delta & 1 == 1;
    vf[1] = 0;
    vb[1] = 0;
    let d_max = ((len_o + len_n).div_ceil(2) + 1) as isize;

    for d in 0..d_max {
        let mut k = d;
        while k >= -d {
            let mut x = if k == -d || (k != d && vf[k - 1] < vf[k + 1]) {
                vf[k + 1]
            } else {
                vf[k - 1] + 1
            };
            let y = (x as isize - k) as usize;
            let (x0, y0) = (x, y);
            if x < len_o && y < len_n {
                x += common_prefix(old, o.start + x..o.end, new, n.start + y..n.end);
            }
            vf[k] = x;
            if odd && (k - delta).abs() < d && vf[k] + vb[-(k - delta)] >= len_o {
                return Some((o.start + x0, n.start + y0));
            }
            k -= 2;
        }

        let mut k = d;
        while k >= -d {
            let mut x = if k == -d || (k != d && vb[k - 1] < vb[k + 1]) {
                vb[k + 1]
            } else {
                vb[k - 1] + 1
            };
            let mut y = (x as isize - k) as usize;
            if x < len_o && y < len_n {
                let adv = common_suffix(old, o.start..o.end - x, new, n.start..n.end - y);
                x += adv;
                y += adv;
            }
            vb[k] = x;
            if !odd && (k - delta).abs() <= d && vb[k] + vf[-(k - delta)] >= len_o {
                return Some((o.end - x, n.end - y));
            }
            k -= 2;
        }
    }
    None
}

fn conquer<T: PartialEq>(
    old: &[T],
    mut o: Range<usize>,
    new: &[T],
    mut n: Range<usize>,
    vf: &mut V,
    vb: &mut V,
    ops: &mut Vec<(Op, usize)>,
) {
    let prefix = common_prefix(old, o.clone(), new, n.clone());
    ops.push((Op::Equal, prefix));
    o.start += prefix;
    n.start += prefix;
    let suffix = common_suffix(old, o.clone(), new, n.clone());
    o.end -= suffix;
    n.end -= suffix;

    if o.is_empty() {
        ops.push((Op::Insert, n.len()));
    } else if n.is_empty() {
        ops.push((Op::Delete, o.len()));
    } else if let Some((x, y)) = middle_snake(old, o.clone(), new, n.clone(), vf, vb) {
        conquer(old, o.start..x, new, n.start..y, vf, vb, ops);
        conquer(old, x..o.end, new, y..n.end, vf, vb, ops);
    } else {
        ops.push((Op::Delete, o.len()));
        ops.push((Op::Insert, n.len()));
    }

    ops.push((Op::Equal, suffix));
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Quadratic LCS length, independent of the Myers search.
    fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
        let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                dp[i][j] = if a[i - 1] == b[j - 1] {
                    dp[i - 1][j - 1] + 1
                } else {
                    dp[i - 1][j].max(dp[i][j - 1])
                };
            }
        }
        dp[a.len()][b.len()]
    }

    #[test]
    fn insert_into_empty() {
        let script = diff_lines::<&str>(&[], &["a"]);
        assert_eq!(
            script.hunks,
            vec![Hunk {
                old_start: 0,
                deleted: 0,
                new_start: 0,
                inserted: 1
            }]
        );
    }

    #[test]
    fn replace_middle_line() {
        let old = ["a", "b", "c"];
        let new = ["a", "x", "c"];
        let script = diff_lines(&old, &new);
        assert_eq!(
            script.hunks,
            vec![Hunk {
                old_start: 1,
                deleted: 1,
                new_start: 1,
                inserted: 1
            }]
        );
        assert_eq!(script.edit_count(), old.len() + new.len() - 2 * lcs_len(&old, &new));
    }

    #[test]
    fn identical_inputs_give_empty_script() {
        let lines = ["x", "y", "z"];
        assert!(diff_lines(&lines, &lines).is_empty());
    }

    #[test]
    fn classify_pairs_deletions_with_insertions() {
        let hunk = |deleted, inserted| Hunk {
            old_start: 0,
            deleted,
            new_start: 0,
            inserted,
        };
        let script = |hunks| EditScript {
            hunks,
            old_len: 0,
            new_len: 0,
        };
        let c = classify_hunks(&script(vec![hunk(1, 1)]));
        assert_eq!((c.added, c.deleted, c.modified), (0, 0, 1));
        let c = classify_hunks(&script(vec![hunk(0, 5)]));
        assert_eq!((c.added, c.deleted, c.modified), (5, 0, 0));
        let c = classify_hunks(&script(vec![hunk(2, 1), hunk(0, 3)]));
        assert_eq!((c.added, c.deleted, c.modified), (3, 1, 1));
    }

    proptest! {
        #[test]
        fn minimal_and_valid(
            old in prop::collection::vec(0u8..4, 0..20),
            new in prop::collection::vec(0u8..4, 0..20),
        ) {
            let script = diff_lines(&old, &new);
            prop_assert_eq!(script.apply(&old, &new), new.clone());
            prop_assert_eq!(script.edit_count(), old.len() + new.len() - 2 * lcs_len(&old, &new));
            let c = classify_hunks(&script);
            prop_assert_eq!(
                c.added as i64 - c.deleted as i64,
                new.len() as i64 - old.len() as i64
            );
        }

        #[test]
        fn hunks_are_separated(
            old in prop::collection::vec(0u8..3, 0..30),
            new in prop::collection::vec(0u8..3, 0..30),
        ) {
            let script = diff_lines(&old, &new);
            for w in script.hunks.windows(2) {
                prop_assert!(w[0].old_start + w[0].deleted < w[1].old_start);
            }
        }
    }

    #[test]
    fn large_rewrite_terminates() {
        let old: Vec<u32> = (0..5000).collect();
        let new: Vec<u32> = (0..5000).map(|i| if i % 7 == 0 { i + 100_000 } else { i }).collect();
        let script = diff_lines(&old, &new);
        assert_eq!(script.apply(&old, &new), new);
        assert_eq!(script.edit_count(), 2 * old.iter().filter(|&&i| i % 7 == 0).count());
    }
}
