//! Brute-force ground truth: explicit rows of `G_N` and exhaustive coset scans.

use std::collections::VecDeque;

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::bitops::{check_exponent, check_index};
use crate::error::{Error, Result};

/// Default bound on the number of coset words a single scan may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 26;

/// Scans at least this large are split into independent blocks.
const PARALLEL_BLOCK_LOG2: u32 = 16;

/// A binary vector of length `2^n`, packed LSB-first into 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryVector {
    len: usize,
    words: Vec<u64>,
}

impl BinaryVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (k, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(k);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, k: usize) -> u8 {
        ((self.words[k / 64] >> (k % 64)) & 1) as u8
    }

    fn set(&mut self, k: usize) {
        self.words[k / 64] |= 1 << (k % 64);
    }

    pub fn weight(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn xor_assign(&mut self, other: &BinaryVector) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len).map(|k| self.get(k)).collect()
    }

    /// Support `s(x)`.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len).filter(|&k| self.get(k) == 1).collect()
    }

    /// `x|_I` for the positions `I` in ascending order.
    pub fn project(&self, positions: &[usize]) -> BinaryVector {
        let bits: Vec<u8> = positions.iter().map(|&k| self.get(k)).collect();
        Self::from_bits(&bits)
    }
}

/// `g_k = gg_{b_{n-1}(k)} ⊗ ... ⊗ gg_{b_0(k)}` with `gg_0 = (1,0)`, `gg_1 = (1,1)`.
pub fn row(n: u32, k: u64) -> Result<BinaryVector> {
    check_index(n, k)?;
    // Building the Kronecker product from the most significant factor outward:
    // position p of the result has digits p_{n-1}..p_0 and is one exactly when
    // each factor's entry at digit p_r is one.
    let mut bits = vec![1u8];
    for r in (0..n).rev() {
        let factor: [u8; 2] = if (k >> r) & 1 == 1 { [1, 1] } else { [1, 0] };
        bits = bits.iter().flat_map(|&a| factor.iter().map(move |&b| a & b)).collect();
    }
    Ok(BinaryVector::from_bits(&bits))
}

/// All rows `g_0..g_{N-1}`.
pub fn generator_rows(n: u32) -> Result<Vec<BinaryVector>> {
    check_exponent(n)?;
    (0..1u64 << n).map(|k| row(n, k)).collect()
}

/// The coset fixed by `u_0..u_i`: `Σ_{j ∈ s(prefix)} g_j + <g_{i+1}, ..., g_{N-1}>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetSpec {
    pub n: u32,
    pub prefix: Vec<u8>,
}

impl CosetSpec {
    pub fn new(n: u32, prefix: Vec<u8>) -> Result<Self> {
        check_exponent(n)?;
        if prefix.is_empty() || prefix.len() as u64 > 1u64 << n {
            return Err(Error::arg(format!(
                "coset prefix length {} must be in 1..={}",
                prefix.len(),
                1u64 << n
            )));
        }
        if prefix.iter().any(|&b| b > 1) {
            return Err(Error::arg("coset prefix entries must be 0 or 1"));
        }
        Ok(Self { n, prefix })
    }

    /// `(0, ..., 0, last)` of length `i + 1`.
    pub fn stage(n: u32, i: u64, last: u8) -> Result<Self> {
        check_index(n, i)?;
        let mut prefix = vec![0u8; i as usize + 1];
        prefix[i as usize] = last;
        Self::new(n, prefix)
    }

    /// Index of the last fixed position.
    pub fn last_index(&self) -> u64 {
        self.prefix.len() as u64 - 1
    }
}

/// Scan limits for the exhaustive routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub enumeration_cap: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl OracleConfig {
    fn check_cap(&self, free: u64) -> Result<()> {
        let size = 1u128 << free.min(127);
        if free >= 64 || size as u64 > self.enumeration_cap {
            return Err(Error::ResourceCap {
                what: "exhaustive coset enumeration".to_string(),
                required: format!("2^{free} words"),
                cap: format!("{} words", self.enumeration_cap),
                hint: String::new(),
            });
        }
        Ok(())
    }

    /// Weight distribution (`counts[w]`, `w = 0..=N`) of the coset, by
    /// visiting every word.
    pub fn enumerate_coset_wd(&self, spec: &CosetSpec) -> Result<Vec<BigUint>> {
        let n = spec.n;
        let big_n = 1u64 << n;
        let i = spec.last_index();
        let free = big_n - i - 1;
        self.check_cap(free)?;
        let rows = generator_rows(n)?;
        let mut base = BinaryVector::zeros(big_n as usize);
        for (j, &b) in spec.prefix.iter().enumerate() {
            if b == 1 {
                base.xor_assign(&rows[j]);
            }
        }
        let gens = &rows[(i + 1) as usize..];
        let tally = gray_scan(
            &base,
            gens,
            big_n as usize,
            |tally: &mut Vec<u64>, x| tally[x.weight() as usize] += 1,
            vec![0u64; big_n as usize + 1],
            |a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            },
        );
        Ok(tally.into_iter().map(BigUint::from).collect())
    }

    /// `min { w(x) : x ∈ g_i + g_j + <g_{j+1}, ..., g_{N-1}> }` for `i < j`.
    pub fn brute_min_distance_pair(&self, n: u32, i: u64, j: u64) -> Result<u64> {
        check_index(n, i)?;
        check_index(n, j)?;
        if i >= j {
            return Err(Error::arg(format!("need i < j, got i = {i}, j = {j}")));
        }
        let big_n = 1u64 << n;
        self.check_cap(big_n - j - 1)?;
        let rows = generator_rows(n)?;
        let mut base = rows[i as usize].clone();
        base.xor_assign(&rows[j as usize]);
        let gens = &rows[(j + 1) as usize..];
        Ok(gray_scan(
            &base,
            gens,
            big_n as usize,
            |best: &mut u64, x| *best = (*best).min(x.weight()),
            u64::MAX,
            |a, b| *a = (*a).min(b),
        ))
    }
}

/// Visits `base + Σ_{k ∈ S} gens[k]` for every subset `S`, one XOR per step
/// in Gray-code order. Large scans run as fixed blocks whose partial results
/// are merged in block order.
fn gray_scan<A, F, M>(base: &BinaryVector, gens: &[BinaryVector], len: usize, visit: F, init: A, merge: M) -> A
where
    A: Clone + Send + Sync,
    F: Fn(&mut A, &BinaryVector) + Sync,
    M: Fn(&mut A, A),
{
    let k = gens.len() as u32;
    let block_log2 = if k > PARALLEL_BLOCK_LOG2 {
        PARALLEL_BLOCK_LOG2
    } else {
        k
    };
    let blocks = 1u64 << (k - block_log2);
    let per_block = 1u64 << block_log2;
    let partials: Vec<A> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * per_block;
            let mut acc = init.clone();
            let mut x = base.clone();
            let gray = start ^ (start >> 1);
            for (g, gen) in gens.iter().enumerate() {
                if (gray >> g) & 1 == 1 {
                    x.xor_assign(gen);
                }
            }
            debug_assert_eq!(x.len(), len);
            visit(&mut acc, &x);
            for s in start + 1..start + per_block {
                x.xor_assign(&gens[s.trailing_zeros() as usize]);
                visit(&mut acc, &x);
            }
            acc
        })
        .collect();
    let mut out = init;
    for part in partials {
        merge(&mut out, part);
    }
    out
}

pub fn enumerate_coset_wd(spec: &CosetSpec) -> Result<Vec<BigUint>> {
    OracleConfig::default().enumerate_coset_wd(spec)
}

pub fn brute_min_distance_pair(n: u32, i: u64, j: u64) -> Result<u64> {
    OracleConfig::default().brute_min_distance_pair(n, i, j)
}

/// Ordered pairs `(i, j)` reachable from `i` by the two generator steps
/// (bit moved to a higher empty position, or bits added), found by
/// breadth-first search from every start. `reach[i][j]` is the answer.
pub fn generator_closure(n: u32) -> Result<Vec<Vec<bool>>> {
    check_exponent(n)?;
    let size = 1usize << n;
    let mut reach = vec![vec![false; size]; size];
    for (start, seen) in reach.iter_mut().enumerate() {
        let mut queue = VecDeque::from([start as u64]);
        seen[start] = true;
        while let Some(a) = queue.pop_front() {
            let mut next = Vec::new();
            for u in 0..n {
                if (a >> u) & 1 == 0 {
                    // Domination: adding one bit at a time generates all supersets.
                    next.push(a | (1 << u));
                    continue;
                }
                for w in u + 1..n {
                    if (a >> w) & 1 == 0 {
                        next.push((a & !(1 << u)) | (1 << w));
                    }
                }
            }
            for b in next {
                if !seen[b as usize] {
                    seen[b as usize] = true;
                    queue.push_back(b);
                }
            }
        }
    }
    Ok(reach)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn kronecker_rows() {
        assert_eq!(row(3, 2).unwrap().bits(), vec![1, 0, 1, 0, 0, 0, 0, 0]);
        assert_eq!(row(3, 5).unwrap().bits(), vec![1, 1, 0, 0, 1, 1, 0, 0]);
        assert_eq!(row(0, 0).unwrap().bits(), vec![1]);
        assert_eq!(row(2, 1).unwrap().bits(), vec![1, 1, 0, 0]);
        assert_eq!(row(2, 3).unwrap().bits(), vec![1; 4]);
        assert!(row(2, 4).is_err());
    }

    #[test]
    fn rows_form_lower_triangular_kernel_power() {
        // G_N = [[G, 0], [G, G]] with G = G_{N/2}.
        let half = generator_rows(3).unwrap();
        let full = generator_rows(4).unwrap();
        for k in 0..8 {
            let g = half[k].bits();
            let lower: Vec<u8> = g.iter().chain(std::iter::repeat_n(&0, 8)).copied().collect();
            let upper: Vec<u8> = g.iter().chain(g.iter()).copied().collect();
            assert_eq!(full[k].bits(), lower);
            assert_eq!(full[k + 8].bits(), upper);
        }
    }

    #[test]
    fn table_rows_by_enumeration() {
        let wd = enumerate_coset_wd(&CosetSpec::new(3, vec![1]).unwrap()).unwrap();
        assert_eq!(wd, counts(&[0, 8, 0, 56, 0, 56, 0, 8, 0]));
        let wd = enumerate_coset_wd(&CosetSpec::stage(3, 7, 1).unwrap()).unwrap();
        assert_eq!(wd, counts(&[0, 0, 0, 0, 0, 0, 0, 0, 1]));
    }

    #[test]
    fn arbitrary_prefix() {
        // g0+g1 = (0,1,0,0); span of g2 = (1,0,1,0), g3 = (1,1,1,1).
        // Words: (0,1,0,0) w1, (1,1,1,0) w3, (1,0,1,1) w3, (0,0,0,1) w1.
        let wd = enumerate_coset_wd(&CosetSpec::new(2, vec![1, 1]).unwrap()).unwrap();
        assert_eq!(wd, counts(&[0, 2, 0, 2, 0]));
    }

    #[test]
    fn pair_minima() {
        assert_eq!(brute_min_distance_pair(3, 2, 5).unwrap(), 4);
        assert_eq!(brute_min_distance_pair(2, 1, 2).unwrap(), 2);
        assert_eq!(brute_min_distance_pair(1, 0, 1).unwrap(), 1);
        assert!(brute_min_distance_pair(2, 2, 1).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = OracleConfig {
            enumeration_cap: 1 << 10,
        };
        let err = cfg.enumerate_coset_wd(&CosetSpec::stage(4, 2, 1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::ResourceCap { .. }));
        assert!(err.to_string().contains("2^13"));
        assert!(cfg.enumerate_coset_wd(&CosetSpec::stage(4, 5, 1).unwrap()).is_ok());
        assert!(cfg.brute_min_distance_pair(4, 0, 1).is_err());
    }

    #[test]
    fn blocked_scan_matches_sequential_count() {
        // 2^18 words: exercises the multi-block path.
        let wd = enumerate_coset_wd(&CosetSpec::stage(5, 13, 0).unwrap()).unwrap();
        let total: BigUint = wd.iter().sum();
        assert_eq!(total, BigUint::from(1u64 << 18));
        assert_eq!(wd[0], BigUint::from(1u32));
    }

    #[test]
    fn closure_small() {
        let reach = generator_closure(2).unwrap();
        assert!(reach[1][2]);
        assert!(!reach[2][1]);
        assert!(reach[0][3]);
        assert!(!reach[3][0]);
    }

    #[test]
    fn coset_spec_validation() {
        assert!(CosetSpec::new(2, vec![]).is_err());
        assert!(CosetSpec::new(2, vec![0; 5]).is_err());
        assert!(CosetSpec::new(2, vec![2]).is_err());
        assert!(CosetSpec::stage(2, 4, 1).is_err());
    }
}
