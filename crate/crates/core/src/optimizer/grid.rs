//! Exhaustive search over 4-subsets of a uniform parameter grid.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::curves::Curve;
use crate::ratio::{ptolemy_ratio, QuadParams};

/// Most candidates retained for seeding; exact for grids up to n ≈ 70.
const CANDIDATE_CAPACITY: usize = 1 << 20;

#[derive(Debug, Clone, Serialize)]
pub struct GridResult {
    pub value: f64,
    pub argmax: QuadParams,
    pub evaluated: usize,
    /// Quadruples whose diagonals vanished.
    pub skipped: usize,
}

/// A grid quadruple `i < j < k < l` with its ratio.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate {
    pub value: f64,
    pub idx: [u32; 4],
}

impl Candidate {
    pub fn params(&self, n: usize) -> [f64; 4] {
        self.idx.map(|i| i as f64 / n as f64)
    }
}

// "Greater" means better: larger value, then lexicographically smaller indices.
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

/// Evaluates every quadruple of `{k/n}` with `t1` the smallest member.
/// Returns the summary and the best candidates, best first.
pub(crate) fn enumerate(curve: &Curve, n: usize) -> (GridResult, Vec<Candidate>) {
    let points: Vec<_> = (0..n).map(|k| curve.point_at(k as f64 / n as f64)).collect();
    let mut heap: BinaryHeap<Reverse<Candidate>> = BinaryHeap::new();
    let mut evaluated = 0;
    let mut skipped = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    evaluated += 1;
                    let Ok(value) = ptolemy_ratio(points[i], points[j], points[k], points[l]) else {
                        skipped += 1;
                        continue;
                    };
                    let cand = Candidate { value, idx: [i, j, k, l].map(|v| v as u32) };
                    if heap.len() < CANDIDATE_CAPACITY {
                        heap.push(Reverse(cand));
                    } else if heap.peek().is_some_and(|Reverse(worst)| cand > *worst) {
                        heap.pop();
                        heap.push(Reverse(cand));
                    }
                }
            }
        }
    }
    let mut candidates: Vec<Candidate> = heap.into_iter().map(|Reverse(c)| c).collect();
    candidates.sort_by(|a, b| b.cmp(a));
    let (value, argmax) = match candidates.first() {
        Some(best) => (
            best.value,
            QuadParams::from_array(best.params(n)).expect("grid indices are increasing"),
        ),
        None => (f64::NAN, QuadParams::quarter_turns()),
    };
    (GridResult { value, argmax, evaluated, skipped }, candidates)
}
