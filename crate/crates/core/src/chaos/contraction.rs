use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{binomial_big, factorial_big};

pub const DEFAULT_CEILING: u32 = 40;

/// Per-step contraction counts for expanding the k-th power of a rank-m multiple integral.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ContractionVector {
    pub k: u32,
    pub m: u32,
    pub r: Vec<u32>,
    pub delta: u32,
}

impl ContractionVector {
    pub fn new(k: u32, m: u32, r: Vec<u32>) -> Result<Self> {
        if k < 1 || m < 1 {
            return Err(Error::InvalidParameter("k and m must be >= 1".into()));
        }
        if r.len() != (k - 1) as usize {
            return Err(Error::InvalidParameter(format!(
                "contraction vector for k = {k} needs {} entries, got {}",
                k - 1,
                r.len()
            )));
        }
        let mut used = 0u32;
        for (idx, &rj) in r.iter().enumerate() {
            let j = idx as u32 + 1;
            let avail = j * m - 2 * used;
            if rj > m.min(avail) {
                return Err(Error::InvalidParameter(format!(
                    "r_{j} = {rj} exceeds min(m, {avail})"
                )));
            }
            used += rj;
        }
        Ok(Self { k, m, r, delta: k * m - 2 * used })
    }

    /// Degree of the running product before step j (1-based).
    fn degree_before(&self, j: usize) -> u32 {
        j as u32 * self.m - 2 * self.r[..j - 1].iter().sum::<u32>()
    }
}

fn check_ceiling(k: u32, m: u32, ceiling: u32) -> Result<()> {
    if k < 1 || m < 1 {
        return Err(Error::InvalidParameter("k and m must be >= 1".into()));
    }
    if k * m > ceiling {
        return Err(Error::CeilingExceeded { km: k * m, ceiling });
    }
    Ok(())
}

pub fn enumerate_contractions(k: u32, m: u32) -> Result<Vec<ContractionVector>> {
    enumerate_contractions_with_ceiling(k, m, DEFAULT_CEILING)
}

pub fn enumerate_contractions_with_ceiling(
    k: u32,
    m: u32,
    ceiling: u32,
) -> Result<Vec<ContractionVector>> {
    check_ceiling(k, m, ceiling)?;
    let mut out = Vec::new();
    let mut r = Vec::with_capacity(k as usize - 1);
    extend(k, m, 1, m, &mut r, &mut out);
    Ok(out)
}

// `deg` is the degree of the product of the first j factors.
fn extend(k: u32, m: u32, j: u32, deg: u32, r: &mut Vec<u32>, out: &mut Vec<ContractionVector>) {
    if j == k {
        out.push(ContractionVector { k, m, r: r.clone(), delta: deg });
        return;
    }
    for rj in 0..=m.min(deg) {
        r.push(rj);
        extend(k, m, j + 1, deg + m - 2 * rj, r, out);
        r.pop();
    }
}

/// C₁ = ∏_j r_j! C(m, r_j) C(jm − 2Σ_{l<j} r_l, r_j), exact.
pub fn c1_constant(v: &ContractionVector) -> BigUint {
    let mut acc = BigUint::one();
    for j in 1..=v.r.len() {
        let rj = v.r[j - 1];
        acc *= factorial_big(rj) * binomial_big(v.m, rj) * binomial_big(v.degree_before(j), rj);
    }
    acc
}

/// d ↦ Σ_{r: δ(k,r) = d} C₁(r).
pub fn chaos_projection_profile(k: u32, m: u32) -> Result<BTreeMap<u32, BigUint>> {
    chaos_projection_profile_with_ceiling(k, m, DEFAULT_CEILING)
}

pub fn chaos_projection_profile_with_ceiling(
    k: u32,
    m: u32,
    ceiling: u32,
) -> Result<BTreeMap<u32, BigUint>> {
    let mut profile = BTreeMap::new();
    for v in enumerate_contractions_with_ceiling(k, m, ceiling)? {
        *profile.entry(v.delta).or_insert_with(BigUint::default) += c1_constant(&v);
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(v: &[ContractionVector]) -> Vec<(Vec<u32>, u32)> {
        v.iter().map(|c| (c.r.clone(), c.delta)).collect()
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(
            rs(&enumerate_contractions(2, 1).unwrap()),
            vec![(vec![0], 2), (vec![1], 0)]
        );
        assert_eq!(
            rs(&enumerate_contractions(2, 2).unwrap()),
            vec![(vec![0], 4), (vec![1], 2), (vec![2], 0)]
        );
        assert_eq!(
            rs(&enumerate_contractions(3, 1).unwrap()),
            vec![(vec![0, 0], 3), (vec![0, 1], 1), (vec![1, 0], 1)]
        );
        assert_eq!(rs(&enumerate_contractions(1, 3).unwrap()), vec![(vec![], 3)]);
    }

    #[test]
    fn c1_examples() {
        let v = ContractionVector::new(2, 1, vec![1]).unwrap();
        assert_eq!(c1_constant(&v), BigUint::from(1u32));
        let v = ContractionVector::new(2, 2, vec![1]).unwrap();
        assert_eq!(c1_constant(&v), BigUint::from(4u32));
        let p = chaos_projection_profile(3, 1).unwrap();
        assert_eq!(p[&1], BigUint::from(3u32));
        assert_eq!(p[&3], BigUint::from(1u32));
    }

    #[test]
    fn profiles_match_hermite_expansion() {
        let p = chaos_projection_profile(4, 1).unwrap();
        let got: Vec<(u32, u32)> = p.iter().map(|(d, c)| (*d, c.try_into().unwrap())).collect();
        assert_eq!(got, vec![(0, 3), (2, 6), (4, 1)]);
        assert_eq!(chaos_projection_profile(6, 1).unwrap()[&0], BigUint::from(15u32));
        let p2 = chaos_projection_profile(2, 1).unwrap();
        assert_eq!(p2[&0], BigUint::from(1u32));
        assert_eq!(p2[&2], BigUint::from(1u32));
    }

    #[test]
    fn ceiling_guard() {
        assert!(matches!(
            enumerate_contractions(11, 4),
            Err(Error::CeilingExceeded { km: 44, ceiling: 40 })
        ));
        assert!(enumerate_contractions_with_ceiling(11, 4, 44).is_ok());
    }

    #[test]
    fn inadmissible_vectors_rejected() {
        assert!(ContractionVector::new(2, 1, vec![2]).is_err());
        assert!(ContractionVector::new(3, 1, vec![1, 1]).is_err());
        assert!(ContractionVector::new(3, 1, vec![0]).is_err());
    }
}
