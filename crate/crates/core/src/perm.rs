//! Unimodal cycle combinatorics: the spatial permutation induced by a
//! periodic orbit of a map that rises to a single maximum and falls.
//!
//! Ranks are 0-based throughout; `sigma[r]` is the rank the interval at
//! rank `r` is carried onto.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape test only: increasing up to the position of the top rank, then
/// decreasing. Assumes `sigma` is already a permutation of 0..len.
pub fn is_unimodal(sigma: &[usize]) -> bool {
    let q = sigma.len();
    let m = match sigma.iter().position(|&v| v == q - 1) {
        Some(m) => m,
        None => return false,
    };
    for i in 1..=m {
        if sigma[i - 1] >= sigma[i] {
            return false;
        }
    }
    for i in m + 1..q {
        if sigma[i - 1] <= sigma[i] {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnimodalPermutation {
    sigma: Vec<usize>,
}

impl UnimodalPermutation {
    /// Validates: a permutation of {0..q-1} with q >= 2, consisting of a
    /// single q-cycle, with the unimodal shape.
    pub fn new(sigma: Vec<usize>) -> Result<Self> {
        let q = sigma.len();
        if q < 2 {
            return Err(Error::BadPermutation(format!("period {q} < 2")));
        }
        let mut seen = vec![false; q];
        for &v in &sigma {
            if v >= q || seen[v] {
                return Err(Error::BadPermutation(format!("{sigma:?} is not a bijection")));
            }
            seen[v] = true;
        }
        let mut x = 0usize;
        for _ in 0..q - 1 {
            x = sigma[x];
            if x == 0 {
                return Err(Error::BadPermutation(format!(
                    "{sigma:?} is not a single cycle"
                )));
            }
        }
        if sigma[x] != 0 {
            return Err(Error::BadPermutation(format!("{sigma:?} is not a single cycle")));
        }
        if !is_unimodal(&sigma) {
            return Err(Error::BadPermutation(format!("{sigma:?} is not unimodal")));
        }
        Ok(UnimodalPermutation { sigma })
    }

    pub fn from_one_based(s: &[usize]) -> Result<Self> {
        if s.iter().any(|&v| v == 0) {
            return Err(Error::BadPermutation("one-based entries start at 1".into()));
        }
        Self::new(s.iter().map(|&v| v - 1).collect())
    }

    /// The permutation of the period-doubling cycle.
    pub fn doubling() -> Self {
        UnimodalPermutation { sigma: vec![1, 0] }
    }

    /// Spatial permutation of a periodic orbit listed in dynamical order
    /// (`points[i+1]` is the image of `points[i]`).
    pub fn from_orbit(points: &[f64]) -> Result<Self> {
        let q = points.len();
        let mut order: Vec<usize> = (0..q).collect();
        order.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
        for w in order.windows(2) {
            if (points[w[1]] - points[w[0]]).abs() < 1e-13 {
                return Err(Error::BadPermutation(format!(
                    "orbit points {} and {} coincide",
                    points[w[0]], points[w[1]]
                )));
            }
        }
        let mut rank = vec![0usize; q];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let mut sigma = vec![0usize; q];
        for i in 0..q {
            sigma[rank[i]] = rank[(i + 1) % q];
        }
        Self::new(sigma)
    }

    pub fn period(&self) -> usize {
        self.sigma.len()
    }

    pub fn apply(&self, r: usize) -> usize {
        self.sigma[r]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.sigma
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.sigma.iter().map(|&v| v + 1).collect()
    }

    /// Rank of the interval containing the turning point: the one carried
    /// onto the top rank.
    pub fn central_rank(&self) -> usize {
        let q = self.period();
        self.sigma.iter().position(|&v| v == q - 1).unwrap()
    }

    pub fn label(&self) -> String {
        if self.sigma == [1, 0] {
            return "doubling".into();
        }
        self.one_based()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    /// Whether the full traversal of the non-central blocks preserves
    /// orientation: each block strictly right of the central one lies in
    /// the decreasing branch and reverses once.
    fn net_orientation_even(&self) -> bool {
        (self.period() - 1 - self.central_rank()) % 2 == 0
    }

    /// Star product: the combinatorics of a cycle that renormalizes first
    /// through `self` (as the block permutation) and whose return map has
    /// combinatorics `inner`.
    pub fn star(&self, inner: &UnimodalPermutation) -> UnimodalPermutation {
        let d = self.period();
        let qp = inner.period();
        let q = d * qp;
        let m = self.central_rank();
        // Blocks left of the central one are traversed preserving order,
        // blocks right of it reversing. When the net traversal reverses,
        // the raw return map is valley-shaped and the normalized inner
        // combinatorics appear conjugated by the rank reversal; the central
        // block must scatter accordingly.
        let eps = self.net_orientation_even();
        let mut sigma = vec![0usize; q];
        for j in 0..d {
            let tj = self.apply(j);
            for r in 0..qp {
                let internal = if j == m {
                    if eps {
                        inner.apply(r)
                    } else {
                        inner.apply(qp - 1 - r)
                    }
                } else if j < m {
                    r
                } else {
                    qp - 1 - r
                };
                sigma[j * qp + r] = tj * qp + internal;
            }
        }
        UnimodalPermutation::new(sigma).expect("star product of admissible permutations")
    }

    fn try_factor(&self, d: usize) -> Option<(UnimodalPermutation, UnimodalPermutation)> {
        let q = self.period();
        let s = q / d;
        let mut tau = vec![0usize; d];
        for j in 0..d {
            let b0 = self.sigma[j * s] / s;
            for r in 1..s {
                if self.sigma[j * s + r] / s != b0 {
                    return None;
                }
            }
            tau[j] = b0;
        }
        let tau = UnimodalPermutation::new(tau).ok()?;
        let m = self.central_rank() / s;
        let mut raw = vec![0usize; s];
        for (r, slot) in raw.iter_mut().enumerate() {
            let mut x = m * s + r;
            for _ in 0..d {
                x = self.sigma[x];
            }
            if x / s != m {
                return None;
            }
            *slot = x - m * s;
        }
        // undo the rank reversal picked up when the net traversal of the
        // non-central blocks reverses orientation
        let ret = if tau.net_orientation_even() {
            raw
        } else {
            (0..s).map(|r| s - 1 - raw[s - 1 - r]).collect()
        };
        let ret = UnimodalPermutation::new(ret).ok()?;
        Some((tau, ret))
    }

    /// Factor into primitive permutations, listed in the order the
    /// renormalizations are applied. A permutation admitting no block
    /// structure returns itself alone.
    pub fn maximal_factorization(&self) -> Vec<UnimodalPermutation> {
        let q = self.period();
        // block count d needs blocks of size >= 2, so d <= q/2
        for d in 2..=q / 2 {
            if q % d != 0 {
                continue;
            }
            if let Some((tau, ret)) = self.try_factor(d) {
                let mut out = vec![tau];
                out.extend(ret.maximal_factorization());
                return out;
            }
        }
        vec![self.clone()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_is_admissible() {
        let d = UnimodalPermutation::doubling();
        assert_eq!(d.period(), 2);
        assert_eq!(d.central_rank(), 0);
        assert_eq!(d.label(), "doubling");
    }

    #[test]
    fn period_three_and_four_cycles() {
        let p3 = UnimodalPermutation::from_one_based(&[2, 3, 1]).unwrap();
        assert_eq!(p3.central_rank(), 1);
        let p4 = UnimodalPermutation::from_one_based(&[3, 4, 2, 1]).unwrap();
        assert_eq!(p4.central_rank(), 1);
        assert_eq!(p4.label(), "3-4-2-1");
    }

    #[test]
    fn rejects_non_cycles_and_non_unimodal() {
        // two 2-cycles
        assert!(UnimodalPermutation::from_one_based(&[2, 1, 4, 3]).is_err());
        // single 3-cycle but wrong shape
        assert!(UnimodalPermutation::from_one_based(&[3, 1, 2]).is_err());
        // identity entries
        assert!(UnimodalPermutation::from_one_based(&[1, 2]).is_err());
        // not a bijection
        assert!(UnimodalPermutation::from_one_based(&[2, 2]).is_err());
    }

    #[test]
    fn orbit_ranking_recovers_the_permutation() {
        // superstable period-4 style data, dynamical order
        let pts = [0.0, 1.0, -0.31, 0.873];
        let p = UnimodalPermutation::from_orbit(&pts).unwrap();
        assert_eq!(p.one_based(), vec![3, 4, 2, 1]);
    }

    #[test]
    fn star_of_two_doublings_is_the_period_four_cycle() {
        let d = UnimodalPermutation::doubling();
        let p4 = d.star(&d);
        assert_eq!(p4.one_based(), vec![3, 4, 2, 1]);
    }

    #[test]
    fn factorization_splits_the_period_four_cycle() {
        let p4 = UnimodalPermutation::from_one_based(&[3, 4, 2, 1]).unwrap();
        let factors = p4.maximal_factorization();
        assert_eq!(factors.len(), 2);
        assert_eq!(factors[0], UnimodalPermutation::doubling());
        assert_eq!(factors[1], UnimodalPermutation::doubling());
    }

    #[test]
    fn primitive_cycles_do_not_factor() {
        let p3 = UnimodalPermutation::from_one_based(&[2, 3, 1]).unwrap();
        assert_eq!(p3.maximal_factorization(), vec![p3.clone()]);
    }

    #[test]
    fn cascade_of_three_doublings_factors_fully() {
        let d = UnimodalPermutation::doubling();
        let p8 = d.star(&d.star(&d));
        assert_eq!(p8.period(), 8);
        let factors = p8.maximal_factorization();
        assert_eq!(factors.len(), 3);
        assert!(factors.iter().all(|f| *f == d));
    }

    #[test]
    fn star_return_map_is_the_inner_permutation() {
        let d = UnimodalPermutation::doubling();
        let p3 = UnimodalPermutation::from_one_based(&[2, 3, 1]).unwrap();
        let s = d.star(&p3);
        // block structure: central block left, folded up to the right
        // block, which falls back reversing; return map comes out as p3
        assert_eq!(s.one_based(), vec![4, 6, 5, 3, 2, 1]);
        let factors = s.maximal_factorization();
        assert_eq!(factors, vec![d.clone(), p3.clone()]);
        let s2 = p3.star(&d);
        assert_eq!(s2.one_based(), vec![3, 4, 5, 6, 2, 1]);
        let f2 = s2.maximal_factorization();
        assert_eq!(f2, vec![p3, d]);
    }
}
