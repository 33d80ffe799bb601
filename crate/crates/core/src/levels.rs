//! Level grading of nested cycles.
//!
//! Intervals of the depth-n cycle are sorted into levels L_k^n by how
//! recently their ancestry passed through the turning point: the interval
//! containing 0 sits at level 0, and every other interval sits one level
//! deeper than its parent in the depth-(n-1) cycle. The grading drives
//! the per-level decay sums of the decomposition bounds.

use crate::cycle::Cycle;
use crate::error::{Error, Result};

/// Slack for parent containment; interval endpoints carry root-finder
/// roundoff and children may share an endpoint with their parent.
const NEST_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct LevelSets {
    /// assignment[n][i] = level of interval i in the depth-n cycle;
    /// row 0 is the single root interval [-1, 1] at level 0.
    assignment: Vec<Vec<usize>>,
    /// parent[n][i] = index of the containing interval one depth up
    /// (parent[0] and parent[1] point at the root).
    parents: Vec<Vec<usize>>,
}

impl LevelSets {
    /// Deepest graded cycle (row 0 is the root, so this equals the number
    /// of cycles supplied).
    pub fn depth(&self) -> usize {
        self.assignment.len() - 1
    }

    pub fn level_of(&self, n: usize, i: usize) -> usize {
        self.assignment[n][i]
    }

    pub fn parent_of(&self, n: usize, i: usize) -> usize {
        self.parents[n][i]
    }

    /// Indices of the depth-n intervals at level k, in dynamical order.
    pub fn members(&self, n: usize, k: usize) -> Vec<usize> {
        self.assignment[n]
            .iter()
            .enumerate()
            .filter(|&(_, &lv)| lv == k)
            .map(|(i, _)| i)
            .collect()
    }

    /// |L_k^n| for k = 0..=n.
    pub fn sizes(&self, n: usize) -> Vec<usize> {
        let mut out = vec![0usize; n + 1];
        for &lv in &self.assignment[n] {
            out[lv] += 1;
        }
        out
    }
}

/// Grade the supplied nested cycles (cycles[n-1] has depth n). Every
/// interval must sit inside exactly one interval of the previous depth.
pub fn level_sets(cycles: &[Cycle]) -> Result<LevelSets> {
    let mut assignment: Vec<Vec<usize>> = vec![vec![0]];
    let mut parents: Vec<Vec<usize>> = vec![vec![0]];
    for (d, cycle) in cycles.iter().enumerate() {
        let n = d + 1;
        let mut row = vec![0usize; cycle.period()];
        let mut par = vec![0usize; cycle.period()];
        for (i, iv) in cycle.intervals().iter().enumerate() {
            if n > 1 {
                let up = cycles[d - 1].intervals();
                let j = up
                    .iter()
                    .position(|p| p.contains(iv.mid(), 0.0))
                    .ok_or_else(|| Error::Nesting {
                        parent: n - 1,
                        child: i,
                        detail: format!("midpoint {} lies between depth-{} intervals", iv.mid(), n - 1),
                    })?;
                if !up[j].contains_interval(iv, NEST_SLACK) {
                    return Err(Error::Nesting {
                        parent: j,
                        child: i,
                        detail: format!("{iv:?} straddles the boundary of {:?}", up[j]),
                    });
                }
                par[i] = j;
                row[i] = if iv.contains(0.0, 0.0) {
                    0
                } else {
                    assignment[n - 1][j] + 1
                };
            } else {
                row[i] = if iv.contains(0.0, 0.0) { 0 } else { 1 };
            }
        }
        assignment.push(row);
        parents.push(par);
    }
    Ok(LevelSets {
        assignment,
        parents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::{find_cycle, find_cycle_with};
    use crate::pair::Pair;
    use crate::perm::UnimodalPermutation;

    // t = 0.875: the fold -1.75x^2 + 0.75 is twice renormalizable
    // (between the second period-doubling and the 4-to-2 band merging)
    fn nested_doubling() -> Vec<Cycle> {
        let pair = Pair::identity(0.875, 2.0, 4).unwrap();
        let c1 = find_cycle_with(&pair, &UnimodalPermutation::doubling()).unwrap();
        let c2 = find_cycle(&pair, 4).unwrap().expect("period-4 cycle");
        assert_eq!(
            c2.perm(),
            &UnimodalPermutation::from_one_based(&[3, 4, 2, 1]).unwrap()
        );
        vec![c1, c2]
    }

    #[test]
    fn doubling_level_sizes() {
        let cycles = nested_doubling();
        let ls = level_sets(&cycles).unwrap();
        assert_eq!(ls.depth(), 2);
        assert_eq!(ls.sizes(0), vec![1]);
        assert_eq!(ls.sizes(1), vec![1, 1]);
        assert_eq!(ls.sizes(2), vec![1, 1, 2]);
        // central interval is always level 0
        assert_eq!(ls.level_of(1, 1), 0);
        assert_eq!(ls.level_of(2, 3), 0);
    }

    #[test]
    fn levels_match_brute_force_containment() {
        let cycles = nested_doubling();
        let ls = level_sets(&cycles).unwrap();
        // hand table: which depth-1 interval holds each depth-2 interval
        for (i, iv) in cycles[1].intervals().iter().enumerate() {
            let j = ls.parent_of(2, i);
            assert!(cycles[0].intervals()[j].contains_interval(iv, 1e-9));
            let expect = if iv.contains(0.0, 0.0) {
                0
            } else {
                ls.level_of(1, j) + 1
            };
            assert_eq!(ls.level_of(2, i), expect, "interval {i}");
        }
        // partition: sizes sum to the cycle period
        assert_eq!(ls.sizes(2).iter().sum::<usize>(), 4);
    }

    #[test]
    fn non_nested_input_is_rejected() {
        // swap depths so "children" are wider than "parents"
        let cycles = nested_doubling();
        let swapped = vec![cycles[1].clone(), cycles[0].clone()];
        assert!(level_sets(&swapped).is_err());
    }
}
