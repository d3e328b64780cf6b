//! The channel partial order between synthetic channels.
//!
//! `i ⪯ j` when `j` can be reached from `i` by a sequence of steps, each of
//! which either moves a single one-bit from position `u` to a higher empty
//! position `w` ([`Step::Swap`]) or sets additional bits ([`Step::Dominate`]).
//! Every such step preserves the suffix counts
//! `Σ_{k >= n-1-t} b_k`, and the decision procedure here uses that suffix
//! dominance as the criterion, emitting a replayable chain as evidence.

use serde::{Deserialize, Serialize};

use crate::bitops::check_index;
use crate::closedform::{first_nonzero, FirstComponent};
use crate::error::{Error, Result};

/// One generator step between consecutive chain elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    /// Bit `u` set and bit `w` clear before; swapped after; `u < w`.
    Swap { u: u32, w: u32 },
    /// Every set bit stays set.
    Dominate,
}

impl Step {
    /// Whether `from -> to` is a legal instance of this step over `n` bits.
    pub fn holds(&self, n: u32, from: u64, to: u64) -> bool {
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if from & !mask != 0 || to & !mask != 0 {
            return false;
        }
        match *self {
            Step::Swap { u, w } => {
                if u >= w || w >= n {
                    return false;
                }
                let pair = (1u64 << u) | (1u64 << w);
                (from & !pair) == (to & !pair)
                    && (from >> u) & 1 == 1
                    && (to >> w) & 1 == 1
                    && (from >> w) & 1 == 0
                    && (to >> u) & 1 == 0
            }
            Step::Dominate => from & !to == 0,
        }
    }
}

/// A chain `a_0 = i, ..., a_ℓ = j` with one step per consecutive pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegradationCertificate {
    pub n: u32,
    pub chain: Vec<u64>,
    pub steps: Vec<Step>,
}

impl DegradationCertificate {
    pub fn source(&self) -> u64 {
        self.chain[0]
    }

    pub fn target(&self) -> u64 {
        *self.chain.last().expect("chain is never empty")
    }

    /// Replays every step against its definition.
    pub fn verify(&self) -> bool {
        !self.chain.is_empty()
            && self.steps.len() + 1 == self.chain.len()
            && self
                .steps
                .iter()
                .zip(self.chain.windows(2))
                .all(|(step, pair)| step.holds(self.n, pair[0], pair[1]))
    }
}

/// `Σ_{k=n-1-t}^{n-1} b_k(i) <= Σ_{k=n-1-t}^{n-1} b_k(j)` for all `t < n`.
pub fn suffix_dominance(n: u32, i: u64, j: u64) -> Result<bool> {
    check_index(n, i)?;
    check_index(n, j)?;
    let (mut si, mut sj) = (0u32, 0u32);
    for k in (0..n).rev() {
        si += ((i >> k) & 1) as u32;
        sj += ((j >> k) & 1) as u32;
        if si > sj {
            return Ok(false);
        }
    }
    Ok(true)
}

fn ones_descending(n: u32, x: u64) -> Vec<u32> {
    (0..n).rev().filter(|&k| (x >> k) & 1 == 1).collect()
}

/// Returns a certificate when `i ⪯ j`, `None` when the pair is not ordered
/// that way.
///
/// The `k`-th highest one-bit of `i` is moved onto the `k`-th highest one-bit
/// of `j` (suffix dominance guarantees the latter is not lower), most
/// significant first, and any remaining one-bits of `j` are added by a final
/// domination step.
pub fn is_degraded(n: u32, i: u64, j: u64) -> Result<Option<DegradationCertificate>> {
    if !suffix_dominance(n, i, j)? {
        return Ok(None);
    }
    let mut chain = vec![i];
    let mut steps = Vec::new();
    let mut current = i;
    let targets = ones_descending(n, j);
    for (&from, &to) in ones_descending(n, i).iter().zip(&targets) {
        debug_assert!(to >= from);
        if to > from {
            current = (current & !(1u64 << from)) | (1u64 << to);
            steps.push(Step::Swap { u: from, w: to });
            chain.push(current);
        }
    }
    if current != j {
        steps.push(Step::Dominate);
        chain.push(j);
    }
    Ok(Some(DegradationCertificate { n, chain, steps }))
}

/// Which branch of the first-component dichotomy a pair falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DichotomyCase {
    /// `w(g_j) > w(g_i)`.
    StrictlyHeavierFirstWeight,
    /// `w(g_j) = w(g_i)` and `s_i > s_j`.
    EqualWeightSmallerCount,
    /// The pair is not ordered by the partial order.
    Incomparable,
    /// Ordered, yet neither branch holds.
    Violated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralVerdict {
    pub comparable: bool,
    pub case: DichotomyCase,
    pub first_i: FirstComponent,
    pub first_j: FirstComponent,
}

/// Classifies an ordered pair `i < j` by the first nonzero components of
/// `S_i^(n)` and `S_j^(n)`.
pub fn spectral_dichotomy(n: u32, i: u64, j: u64) -> Result<SpectralVerdict> {
    check_index(n, i)?;
    check_index(n, j)?;
    if i >= j {
        return Err(Error::arg(format!("the dichotomy needs i < j, got i = {i}, j = {j}")));
    }
    let first_i = first_nonzero(n, i)?;
    let first_j = first_nonzero(n, j)?;
    let comparable = is_degraded(n, i, j)?.is_some();
    let case = if !comparable {
        DichotomyCase::Incomparable
    } else if first_j.weight > first_i.weight {
        DichotomyCase::StrictlyHeavierFirstWeight
    } else if first_j.weight == first_i.weight && first_i.log2_count > first_j.log2_count {
        DichotomyCase::EqualWeightSmallerCount
    } else {
        DichotomyCase::Violated
    };
    Ok(SpectralVerdict {
        comparable,
        case,
        first_i,
        first_j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_certificate() {
        let cert = is_degraded(2, 1, 2).unwrap().unwrap();
        assert_eq!(cert.chain, vec![1, 2]);
        assert_eq!(cert.steps, vec![Step::Swap { u: 0, w: 1 }]);
        assert!(cert.verify());
    }

    #[test]
    fn reflexive_certificate() {
        for k in 0..16 {
            let cert = is_degraded(4, k, k).unwrap().unwrap();
            assert_eq!(cert.chain, vec![k]);
            assert!(cert.steps.is_empty());
            assert!(cert.verify());
        }
    }

    #[test]
    fn incomparable_and_reverse() {
        assert!(is_degraded(2, 2, 1).unwrap().is_none());
        assert!(is_degraded(3, 4, 3).unwrap().is_none());
        assert!(is_degraded(3, 3, 4).unwrap().is_none());
    }

    #[test]
    fn mixed_chain() {
        // 0b00101 -> 0b11010: move bit 2 -> 4, bit 0 -> 3, then add bit 1.
        let cert = is_degraded(5, 0b00101, 0b11010).unwrap().unwrap();
        assert!(cert.verify());
        assert_eq!(cert.target(), 0b11010);
        assert_eq!(cert.steps.last(), Some(&Step::Dominate));
    }

    #[test]
    fn suffix_examples() {
        assert!(suffix_dominance(2, 1, 2).unwrap());
        assert!(suffix_dominance(3, 5, 5).unwrap());
        assert!(!suffix_dominance(2, 3, 2).unwrap());
        assert!(suffix_dominance(2, 4, 1).is_err());
    }

    #[test]
    fn dichotomy_examples() {
        let v = spectral_dichotomy(2, 1, 2).unwrap();
        assert_eq!(v.case, DichotomyCase::EqualWeightSmallerCount);
        assert_eq!(v.first_i.log2_count, 2);
        assert_eq!(v.first_j.log2_count, 1);

        let v = spectral_dichotomy(3, 1, 3).unwrap();
        assert_eq!(v.case, DichotomyCase::StrictlyHeavierFirstWeight);
        assert_eq!((v.first_i.weight, v.first_j.weight), (2, 4));

        assert_eq!(spectral_dichotomy(3, 3, 4).unwrap().case, DichotomyCase::Incomparable);
        assert!(spectral_dichotomy(2, 2, 1).is_err());
        assert!(spectral_dichotomy(2, 1, 1).is_err());
    }

    #[test]
    fn bad_certificates_are_rejected() {
        let forged = DegradationCertificate {
            n: 3,
            chain: vec![2, 1],
            steps: vec![Step::Swap { u: 0, w: 1 }],
        };
        assert!(!forged.verify());
        let forged = DegradationCertificate {
            n: 3,
            chain: vec![3, 5],
            steps: vec![Step::Dominate],
        };
        assert!(!forged.verify());
        assert!(!Step::Swap { u: 1, w: 1 }.holds(3, 2, 2));
    }

    #[test]
    fn certificates_replay_for_all_pairs() {
        for n in 0..=6u32 {
            for i in 0..(1u64 << n) {
                for j in 0..(1u64 << n) {
                    if let Some(cert) = is_degraded(n, i, j).unwrap() {
                        assert!(cert.verify(), "n={n} i={i} j={j}");
                        assert_eq!((cert.source(), cert.target()), (i, j));
                    }
                }
            }
        }
    }
}
