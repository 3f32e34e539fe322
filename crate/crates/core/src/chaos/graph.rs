use num_bigint::BigUint;
use num_traits::One;

use super::contraction::ContractionVector;
use crate::special::{binomial_big, factorial_big};

/// One admissible assignment of contraction edges between the k factors.
///
/// `beta[j][q]` counts legs paired between factor j and factor q (symmetric, zero
/// diagonal). `free[j]` is the number of uncontracted legs of factor j. `weight`
/// is the number of leg-level pairings realizing this multiplicity table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionGraph {
    pub k: u32,
    pub m: u32,
    pub beta: Vec<Vec<u32>>,
    pub free: Vec<u32>,
    pub weight: BigUint,
}

impl ContractionGraph {
    pub fn delta(&self) -> u32 {
        self.free.iter().sum()
    }

    /// Edges from factor j to earlier factors.
    pub fn step_contractions(&self, j: usize) -> u32 {
        self.beta[j][..j].iter().sum()
    }

    pub fn is_consistent(&self) -> bool {
        let k = self.k as usize;
        for j in 0..k {
            if self.beta[j][j] != 0 {
                return false;
            }
            for q in 0..k {
                if self.beta[j][q] != self.beta[q][j] {
                    return false;
                }
            }
            let incident: u32 = self.beta[j].iter().sum();
            if incident + self.free[j] != self.m {
                return false;
            }
        }
        true
    }
}

/// All multiplicity tables compatible with the contraction vector, built step by step:
/// factor j spends r_j legs on earlier factors with free legs left.
pub fn enumerate_graphs(v: &ContractionVector) -> Vec<ContractionGraph> {
    let k = v.k as usize;
    let m = v.m;
    let mut out = Vec::new();
    let mut beta = vec![vec![0u32; k]; k];
    let mut free = vec![m; k];
    let mut weight = BigUint::one();
    build(v, 1, &mut beta, &mut free, &mut weight, &mut out);
    out.sort_by(|a, b| a.beta.cmp(&b.beta));
    out
}

fn build(
    v: &ContractionVector,
    j: usize,
    beta: &mut Vec<Vec<u32>>,
    free: &mut Vec<u32>,
    weight: &mut BigUint,
    out: &mut Vec<ContractionGraph>,
) {
    let k = v.k as usize;
    if j == k {
        out.push(ContractionGraph {
            k: v.k,
            m: v.m,
            beta: beta.clone(),
            free: free.clone(),
            weight: weight.clone(),
        });
        return;
    }
    let rj = v.r[j - 1];
    let step = factorial_big(rj) * binomial_big(v.m, rj);
    let mut alloc = vec![0u32; j];
    distribute(v, j, 0, rj, &mut alloc, beta, free, weight, &step, out);
}

#[allow(clippy::too_many_arguments)]
fn distribute(
    v: &ContractionVector,
    j: usize,
    q: usize,
    left: u32,
    alloc: &mut Vec<u32>,
    beta: &mut Vec<Vec<u32>>,
    free: &mut Vec<u32>,
    weight: &mut BigUint,
    step: &BigUint,
    out: &mut Vec<ContractionGraph>,
) {
    if q == j {
        if left != 0 {
            return;
        }
        let mut w = weight.clone() * step;
        for (p, &b) in alloc.iter().enumerate() {
            w *= binomial_big(free[p], b);
        }
        for (p, &b) in alloc.iter().enumerate() {
            beta[j][p] = b;
            beta[p][j] = b;
            free[p] -= b;
        }
        let total: u32 = alloc.iter().sum();
        free[j] = v.m - total;
        let saved = std::mem::replace(weight, w);
        build(v, j + 1, beta, free, weight, out);
        *weight = saved;
        free[j] = v.m;
        for (p, &b) in alloc.iter().enumerate() {
            beta[j][p] = 0;
            beta[p][j] = 0;
            free[p] += b;
        }
        return;
    }
    for b in 0..=left.min(free[q]) {
        alloc[q] = b;
        distribute(v, j, q + 1, left - b, alloc, beta, free, weight, step, out);
    }
    alloc[q] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::contraction::{c1_constant, enumerate_contractions};

    #[test]
    fn weights_sum_to_c1() {
        for m in 1..=3 {
            for k in 1..=4 {
                for v in enumerate_contractions(k, m).unwrap() {
                    let graphs = enumerate_graphs(&v);
                    assert!(!graphs.is_empty());
                    let total: BigUint = graphs.iter().map(|g| g.weight.clone()).sum();
                    assert_eq!(total, c1_constant(&v), "k={k} m={m} r={:?}", v.r);
                    for g in &graphs {
                        assert!(g.is_consistent());
                        assert_eq!(g.delta(), v.delta);
                        for j in 1..k as usize {
                            assert_eq!(g.step_contractions(j), v.r[j - 1]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn three_factor_split() {
        // k=3, m=1, r=(0,1): the third factor pairs with either of the first two.
        let v = ContractionVector::new(3, 1, vec![0, 1]).unwrap();
        let g = enumerate_graphs(&v);
        assert_eq!(g.len(), 2);
        assert!(g.iter().all(|x| x.weight == BigUint::from(1u32)));
    }
}
