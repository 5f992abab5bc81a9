//! Exact `lambda(R)`: the smallest `S ⊆ [0, R]` with `0, R ∈ S` whose positive
//! differences cover `[1, R]`.
//!
//! Iterative deepening over `|S|`. Within a size, marks are placed in
//! increasing order, so the first cover found is the lexicographically
//! smallest one. Mirror symmetry `S -> R - S` is broken by requiring the
//! smallest interior mark `a` and the largest interior mark `b` to satisfy
//! `a <= R - b`; the lexicographically smallest cover always does.

use serde::{Deserialize, Serialize};

use super::cover_certificate;
use crate::error::{FlatError, Result};

/// Largest `R` searched without an explicit node budget.
pub const EXHAUSTIVE_THRESHOLD: u64 = 120;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaResult {
    #[serde(rename = "R")]
    pub r: u64,
    /// Exact value when the search completed.
    pub lambda: Option<usize>,
    pub lower: usize,
    pub upper: usize,
    /// Minimal cover when complete, otherwise the best known cover.
    pub witness: Vec<u64>,
    pub complete: bool,
    pub nodes: u64,
}

/// `[0, s-1] ∪ {s, 2s, ...} ∪ {R}` with `s = ceil(sqrt(R))`; always a cover.
pub fn simple_cover(r: u64) -> Vec<u64> {
    let mut s = (r as f64).sqrt().ceil() as u64;
    while s * s < r {
        s += 1;
    }
    let s = s.max(1);
    let mut set: Vec<u64> = (0..s.min(r + 1)).collect();
    let mut x = s;
    while x <= r {
        set.push(x);
        x += s;
    }
    set.push(r);
    set.sort_unstable();
    set.dedup();
    set
}

enum Outcome {
    Found,
    Exhausted,
    OutOfBudget,
}

struct Search {
    r: usize,
    counts: Vec<u32>,
    uncovered: usize,
    marks: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl Search {
    fn new(r: usize, budget: u64) -> Self {
        let mut s = Search {
            r,
            counts: vec![0; r + 1],
            uncovered: r,
            marks: Vec::new(),
            nodes: 0,
            budget,
        };
        s.push(0);
        s.push(r);
        s
    }

    fn push(&mut self, y: usize) {
        for i in 0..self.marks.len() {
            let d = self.marks[i].abs_diff(y);
            if self.counts[d] == 0 {
                self.uncovered -= 1;
            }
            self.counts[d] += 1;
        }
        self.marks.push(y);
    }

    fn pop(&mut self) {
        let y = self.marks.pop().unwrap();
        for &x in &self.marks {
            let d = x.abs_diff(y);
            self.counts[d] -= 1;
            if self.counts[d] == 0 {
                self.uncovered += 1;
            }
        }
    }

    fn largest_uncovered(&self) -> Option<usize> {
        (1..self.r).rev().find(|&d| self.counts[d] == 0)
    }

    /// Places `remaining` interior marks in `[next, limit]`.
    fn dfs(&mut self, next: usize, remaining: usize, limit: usize) -> Outcome {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Outcome::OutOfBudget;
        }
        if self.uncovered == 0 {
            return Outcome::Found;
        }
        if remaining == 0 || next > limit || limit + 1 - next < remaining {
            return Outcome::Exhausted;
        }
        let c = self.marks.len();
        if remaining * c + remaining * (remaining - 1) / 2 < self.uncovered {
            return Outcome::Exhausted;
        }
        // the largest gap needs a new mark y with y - D >= 0 or y + D <= R
        if let Some(d) = self.largest_uncovered() {
            if limit < d && next + d > self.r {
                return Outcome::Exhausted;
            }
        }

        let first = c == 2;
        let last_start = limit + 1 - remaining;
        for y in next..=last_start {
            let lim = if first {
                if y > self.r - y {
                    break;
                }
                self.r - y
            } else {
                limit
            };
            self.push(y);
            let out = self.dfs(y + 1, remaining - 1, lim);
            if !matches!(out, Outcome::Exhausted) {
                return out;
            }
            self.pop();
        }
        Outcome::Exhausted
    }
}

/// Exact `lambda(R)` with a lexicographically smallest witness. Without a
/// budget, `R` must not exceed [`EXHAUSTIVE_THRESHOLD`]. When the node budget
/// runs out, the result carries a `[lower, upper]` bracket and
/// `complete = false`.
pub fn lambda_exact(r: u64, budget: Option<u64>) -> Result<LambdaResult> {
    if r < 1 {
        return Err(FlatError::InvalidInput("lambda needs R >= 1".into()));
    }
    if budget.is_none() && r > EXHAUSTIVE_THRESHOLD {
        return Err(FlatError::Budget(format!(
            "R = {r} exceeds the exhaustive threshold {EXHAUSTIVE_THRESHOLD}; pass a node budget"
        )));
    }
    let fallback = simple_cover(r);
    debug_assert!(cover_certificate(&fallback, r).map(|c| c.is_cover).unwrap_or(false));

    let mut k = 2usize;
    while k * (k - 1) / 2 < r as usize {
        k += 1;
    }
    let mut search = Search::new(r as usize, budget.unwrap_or(u64::MAX));
    loop {
        let limit = (r as usize).saturating_sub(1);
        match search.dfs(1, k - 2, limit) {
            Outcome::Found => {
                let mut witness: Vec<u64> = search.marks.iter().map(|&x| x as u64).collect();
                witness.sort_unstable();
                log::info!("lambda({r}) = {k} after {} nodes", search.nodes);
                return Ok(LambdaResult {
                    r,
                    lambda: Some(witness.len()),
                    lower: witness.len(),
                    upper: witness.len(),
                    witness,
                    complete: true,
                    nodes: search.nodes,
                });
            }
            Outcome::Exhausted => {
                log::info!("lambda({r}): no cover of size {k} ({} nodes so far)", search.nodes);
                k += 1;
            }
            Outcome::OutOfBudget => {
                log::info!("lambda({r}): budget exhausted at size {k}");
                return Ok(LambdaResult {
                    r,
                    lambda: None,
                    lower: k,
                    upper: fallback.len(),
                    witness: fallback,
                    complete: false,
                    nodes: search.nodes - 1,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        let l = lambda_exact(4, None).unwrap();
        assert_eq!(l.lambda, Some(4));
        assert_eq!(l.witness, vec![0, 1, 2, 4]);
        let l = lambda_exact(9, None).unwrap();
        assert_eq!(l.lambda, Some(5));
        assert_eq!(l.witness, vec![0, 1, 2, 6, 9]);
        assert_eq!(lambda_exact(1, None).unwrap().witness, vec![0, 1]);
        assert_eq!(lambda_exact(2, None).unwrap().lambda, Some(3));
    }

    #[test]
    fn simple_cover_is_cover() {
        for r in 1..200 {
            assert!(cover_certificate(&simple_cover(r), r).unwrap().is_cover, "R = {r}");
        }
    }

    #[test]
    fn budget_brackets() {
        let l = lambda_exact(100, Some(50)).unwrap();
        assert!(!l.complete);
        assert!(l.lower <= l.upper);
        assert!(cover_certificate(&l.witness, 100).unwrap().is_cover);
        assert!(lambda_exact(500, None).is_err());
    }
}
