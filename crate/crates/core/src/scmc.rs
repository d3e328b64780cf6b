//! Genie-aided Monte Carlo estimation of the SC stage error probabilities
//! `P_e(i)` over BPSK/AWGN.
//!
//! The all-zero codeword is sent. For each requested stage `i` the decision
//! statistic `ln W^(i)(y, 0..0 | 0) / W^(i)(y, 0..0 | 1)` is evaluated with
//! the correct (all-zero) prefix, so stages are scored independently of
//! earlier decisions. A negative statistic is an error, zero counts as half
//! an error.
//!
//! Randomness: trials are split into fixed blocks of [`TRIALS_PER_BLOCK`].
//! Block `b` draws from ChaCha8 seeded with `seed_from_u64(seed)` on stream
//! `b`, so results depend only on `(seed, trials)` and not on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitops::{check_exponent, check_index};
use crate::bounds::ChannelModel;
use crate::error::{Error, Result};

pub const TRIALS_PER_BLOCK: u64 = 1 << 12;

/// Two-sided 95% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Below this many errors the Wilson interval replaces the normal one.
const WILSON_BELOW_ERRORS: f64 = 30.0;

/// `ln((1 + e^{a+b}) / (e^a + e^b))`, the exact check-node rule, in a form
/// that does not overflow.
#[inline]
pub fn boxplus(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    sign * a.abs().min(b.abs()) + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

/// `u G_N` over GF(2), `G_N = G_2^{⊗n}` without bit reversal.
pub fn encode(u: &[u8]) -> Vec<u8> {
    let mut x = u.to_vec();
    let n = x.len();
    let mut half = n / 2;
    // x = (x_a + x_b, x_b) applied from the outermost level inward.
    while half >= 1 {
        for block in x.chunks_mut(2 * half) {
            let (a, b) = block.split_at_mut(half);
            for (p, q) in a.iter_mut().zip(b.iter()) {
                *p ^= q;
            }
        }
        half /= 2;
    }
    x
}

/// Decision log-ratio `ln W^(i)(y, prefix | 0) / W^(i)(y, prefix | 1)` for
/// `i = prefix.len()`, from channel LLRs, by the exact SC recursion.
pub fn sc_metrics(y_llrs: &[f64], forced_prefix: &[u8]) -> Result<f64> {
    let len = y_llrs.len();
    if !len.is_power_of_two() {
        return Err(Error::arg(format!("LLR vector length {len} is not a power of two")));
    }
    if forced_prefix.len() >= len {
        return Err(Error::arg(format!(
            "prefix length {} leaves no bit to decide among {len}",
            forced_prefix.len()
        )));
    }
    if forced_prefix.iter().any(|&b| b > 1) {
        return Err(Error::arg("prefix entries must be 0 or 1"));
    }
    Ok(metric(y_llrs, forced_prefix))
}

fn metric(llrs: &[f64], prefix: &[u8]) -> f64 {
    if llrs.len() == 1 {
        return llrs[0];
    }
    let half = llrs.len() / 2;
    let (left, right) = llrs.split_at(half);
    if prefix.len() < half {
        let combined: Vec<f64> = left.iter().zip(right).map(|(&a, &b)| boxplus(a, b)).collect();
        metric(&combined, prefix)
    } else {
        let upper = encode(&prefix[..half]);
        let combined: Vec<f64> = left
            .iter()
            .zip(right)
            .zip(&upper)
            .map(|((&a, &b), &v)| if v == 0 { b + a } else { b - a })
            .collect();
        metric(&combined, &prefix[half..])
    }
}

/// Evaluates the all-zero-prefix statistic for every stage flagged in
/// `wanted`, skipping subtrees that contain no wanted stage.
struct GenieEvaluator {
    levels: Vec<Vec<f64>>,
    /// `wanted_before[k]` = number of wanted stages below `k`.
    wanted_before: Vec<u32>,
}

impl GenieEvaluator {
    fn new(n: u32, wanted: &[bool]) -> Self {
        let levels = (0..=n).map(|d| vec![0.0; 1 << (n - d)]).collect();
        let mut wanted_before = Vec::with_capacity(wanted.len() + 1);
        let mut acc = 0;
        wanted_before.push(0);
        for &w in wanted {
            acc += w as u32;
            wanted_before.push(acc);
        }
        Self { levels, wanted_before }
    }

    fn channel(&mut self) -> &mut [f64] {
        &mut self.levels[0]
    }

    fn run(&mut self, out: &mut [f64]) {
        descend(&mut self.levels, 0, &self.wanted_before, out);
    }
}

fn descend(levels: &mut [Vec<f64>], offset: usize, wanted_before: &[u32], out: &mut [f64]) {
    let (cur, rest) = levels.split_first_mut().expect("at least one level");
    let len = cur.len();
    if len == 1 {
        out[offset] = cur[0];
        return;
    }
    let half = len / 2;
    let any = |lo: usize, hi: usize| wanted_before[hi] > wanted_before[lo];
    let (left, right) = cur.split_at(half);
    if any(offset, offset + half) {
        for ((c, &a), &b) in rest[0].iter_mut().zip(left).zip(right) {
            *c = boxplus(a, b);
        }
        descend(rest, offset, wanted_before, out);
    }
    if any(offset + half, offset + len) {
        for ((c, &a), &b) in rest[0].iter_mut().zip(left).zip(right) {
            *c = a + b;
        }
        descend(rest, offset + half, wanted_before, out);
    }
}

/// Monte Carlo estimate of `P_e(i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeEstimate {
    pub i: u64,
    pub trials: u64,
    /// Trials whose statistic favoured `u_i = 1`.
    pub errors: u64,
    /// Trials with a statistic of exactly zero, each scored as half an error.
    pub ties: u64,
    pub p_hat: f64,
    /// Half-width of the 95% interval: normal approximation, or Wilson when
    /// fewer than 30 errors were seen.
    pub ci95: f64,
}

impl PeEstimate {
    fn new(i: u64, trials: u64, errors: u64, ties: u64) -> Self {
        let scored = errors as f64 + 0.5 * ties as f64;
        let p_hat = scored / trials as f64;
        Self {
            i,
            trials,
            errors,
            ties,
            p_hat,
            ci95: ci95_half_width(scored, trials),
        }
    }

    /// Binomial standard error `sqrt(p (1 - p) / trials)` at probability `p`.
    pub fn standard_error_at(&self, p: f64) -> f64 {
        binomial_standard_error(p, self.trials)
    }
}

pub fn binomial_standard_error(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

fn ci95_half_width(scored_errors: f64, trials: u64) -> f64 {
    let n = trials as f64;
    let p = scored_errors / n;
    if scored_errors >= WILSON_BELOW_ERRORS {
        Z95 * (p * (1.0 - p) / n).sqrt()
    } else {
        let z2 = Z95 * Z95;
        Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
    }
}

/// Runs `trials` transmissions over `ch` at block length `2^n` and scores
/// every index in `indices` on the same noise realizations. Results come
/// back in ascending index order, without duplicates.
pub fn estimate_pe(n: u32, ch: &ChannelModel, indices: &[u64], trials: u64, seed: u64) -> Result<Vec<PeEstimate>> {
    check_exponent(n)?;
    if n > 24 {
        return Err(Error::arg(format!("Monte Carlo block length 2^{n} is too large")));
    }
    if trials == 0 {
        return Err(Error::arg("at least one trial is required"));
    }
    for &i in indices {
        check_index(n, i)?;
    }
    let mut stages: Vec<u64> = indices.to_vec();
    stages.sort_unstable();
    stages.dedup();
    if stages.is_empty() {
        return Ok(Vec::new());
    }
    let len = 1usize << n;
    let mut wanted = vec![false; len];
    for &i in &stages {
        wanted[i as usize] = true;
    }

    let blocks = trials.div_ceil(TRIALS_PER_BLOCK);
    let sigma = ch.sigma();
    let per_block: Vec<Vec<(u64, u64)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = TRIALS_PER_BLOCK.min(trials - b * TRIALS_PER_BLOCK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut eval = GenieEvaluator::new(n, &wanted);
            let mut stats = vec![0.0; len];
            let mut tally = vec![(0u64, 0u64); stages.len()];
            for _ in 0..count {
                for l in eval.channel().iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *l = ch.llr(1.0 + sigma * z);
                }
                eval.run(&mut stats);
                for (t, &i) in tally.iter_mut().zip(&stages) {
                    let s = stats[i as usize];
                    if s < 0.0 {
                        t.0 += 1;
                    } else if s == 0.0 {
                        t.1 += 1;
                    }
                }
            }
            tally
        })
        .collect();

    let mut totals = vec![(0u64, 0u64); stages.len()];
    for block in per_block {
        for (t, (e, z)) in totals.iter_mut().zip(block) {
            t.0 += e;
            t.1 += z;
        }
    }
    Ok(stages
        .iter()
        .zip(totals)
        .map(|(&i, (errors, ties))| PeEstimate::new(i, trials, errors, ties))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::Rng;

    #[test]
    fn boxplus_matches_definition() {
        for &(a, b) in &[
            (0.3, -1.2),
            (2.0, 5.0),
            (-4.0, -0.1),
            (0.0, 3.0),
            (40.0, -45.0),
            (1e-3, 1e-3),
        ] {
            let direct = ((1.0 + f64::exp(a + b)) / (f64::exp(a) + f64::exp(b))).ln();
            assert!((boxplus(a, b) - direct).abs() < 1e-12, "{a} {b}");
        }
        assert!(boxplus(800.0, -900.0).is_finite());
        assert!((boxplus(800.0, -900.0) + 800.0).abs() < 1e-9);
    }

    #[test]
    fn encode_matches_generator_rows() {
        let rows = oracle::generator_rows(3).unwrap();
        for k in 0..8 {
            let mut u = vec![0u8; 8];
            u[k] = 1;
            assert_eq!(encode(&u), rows[k].bits());
        }
    }

    #[test]
    fn base_cases() {
        assert_eq!(sc_metrics(&[1.7], &[]).unwrap(), 1.7);
        let (l0, l1) = (0.8, -2.5);
        assert!((sc_metrics(&[l0, l1], &[]).unwrap() - boxplus(l0, l1)).abs() < 1e-15);
        assert_eq!(sc_metrics(&[l0, l1], &[0]).unwrap(), l0 + l1);
        assert_eq!(sc_metrics(&[l0, l1], &[1]).unwrap(), l1 - l0);
        assert!(sc_metrics(&[1.0, 2.0, 3.0], &[]).is_err());
        assert!(sc_metrics(&[1.0, 2.0], &[0, 0]).is_err());
    }

    /// Direct evaluation of the synthetic channel ratio as a sum over the
    /// two cosets, with `W(y_k | x) ∝ exp((1 - 2x) L_k / 2)`.
    fn exhaustive_ratio(llrs: &[f64], prefix: &[u8]) -> f64 {
        let len = llrs.len();
        let n = len.trailing_zeros();
        let i = prefix.len();
        let side = |last: u8| -> f64 {
            let mut total = 0.0;
            for tail in 0..(1u64 << (len - i - 1)) {
                let mut u = prefix.to_vec();
                u.push(last);
                for k in 0..len - i - 1 {
                    u.push(((tail >> k) & 1) as u8);
                }
                let mut x = oracle::BinaryVector::zeros(len);
                for (j, &b) in u.iter().enumerate() {
                    if b == 1 {
                        x.xor_assign(&oracle::row(n, j as u64).unwrap());
                    }
                }
                let e: f64 = (0..len).map(|k| (1.0 - 2.0 * x.get(k) as f64) * llrs[k] / 2.0).sum();
                total += e.exp();
            }
            total
        };
        (side(0) / side(1)).ln()
    }

    #[test]
    fn recursion_matches_exhaustive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 0..=3u32 {
            let len = 1usize << n;
            for _ in 0..25 {
                let llrs: Vec<f64> = (0..len).map(|_| rng.random_range(-4.0..4.0)).collect();
                for i in 0..len {
                    let prefix: Vec<u8> = (0..i).map(|_| rng.random_range(0..2u8)).collect();
                    let fast = sc_metrics(&llrs, &prefix).unwrap();
                    let slow = exhaustive_ratio(&llrs, &prefix);
                    assert!(
                        (fast - slow).abs() <= 1e-9 * slow.abs().max(1.0),
                        "n={n} i={i}: {fast} vs {slow}"
                    );
                }
            }
        }
    }

    #[test]
    fn genie_pass_matches_single_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 5;
        let wanted = vec![true; 32];
        let mut eval = GenieEvaluator::new(n, &wanted);
        let llrs: Vec<f64> = (0..32).map(|_| rng.random_range(-3.0..5.0)).collect();
        eval.channel().copy_from_slice(&llrs);
        let mut out = vec![f64::NAN; 32];
        eval.run(&mut out);
        for (i, &genie) in out.iter().enumerate() {
            let single = sc_metrics(&llrs, &vec![0; i]).unwrap();
            assert!((genie - single).abs() < 1e-12);
        }
        // Pruned: only stage 9 is evaluated.
        let mut wanted = vec![false; 32];
        wanted[9] = true;
        let mut eval = GenieEvaluator::new(n, &wanted);
        eval.channel().copy_from_slice(&llrs);
        let mut pruned = vec![f64::NAN; 32];
        eval.run(&mut pruned);
        assert_eq!(pruned[9], out[9]);
        assert!(pruned[8].is_nan());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let ch = ChannelModel::new(0.7).unwrap();
        let a = estimate_pe(4, &ch, &[3, 1, 15, 3], 10_000, 0).unwrap();
        let b = estimate_pe(4, &ch, &[1, 3, 15], 10_000, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|e| e.i).collect::<Vec<_>>(), vec![1, 3, 15]);
        let c = estimate_pe(4, &ch, &[1, 3, 15], 10_000, 1).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn index_subsets_share_noise() {
        let ch = ChannelModel::new(0.9).unwrap();
        let all: Vec<u64> = (0..16).collect();
        let full = estimate_pe(4, &ch, &all, 5_000, 3).unwrap();
        let some = estimate_pe(4, &ch, &[2, 7], 5_000, 3).unwrap();
        assert_eq!(some[0], full[2]);
        assert_eq!(some[1], full[7]);
    }

    #[test]
    fn n1_upper_stage_probability() {
        // Stage 1 of N = 2 sees y_0 + y_1: error probability (1/2) erfc(1) at σ² = 1.
        let ch = ChannelModel::new(1.0).unwrap();
        let est = estimate_pe(1, &ch, &[1], 400_000, 9).unwrap();
        let want = 0.5 * crate::bounds::erfc(1.0);
        assert!((est[0].p_hat - want).abs() <= 3.0 * est[0].standard_error_at(want));
    }

    #[test]
    fn argument_errors() {
        let ch = ChannelModel::new(1.0).unwrap();
        assert!(estimate_pe(3, &ch, &[8], 10, 0).is_err());
        assert!(estimate_pe(3, &ch, &[1], 0, 0).is_err());
        assert!(estimate_pe(3, &ch, &[], 10, 0).unwrap().is_empty());
    }

    #[test]
    fn interval_methods() {
        // Wilson for few errors, normal otherwise.
        let few = PeEstimate::new(0, 1000, 5, 0);
        let z2 = Z95 * Z95;
        let p: f64 = 0.005;
        let wilson = Z95 / (1.0 + z2 / 1000.0) * (p * (1.0 - p) / 1000.0 + z2 / 4e6).sqrt();
        assert!((few.ci95 - wilson).abs() < 1e-15);
        let many = PeEstimate::new(0, 1000, 100, 0);
        assert!((many.ci95 - Z95 * (0.1f64 * 0.9 / 1000.0).sqrt()).abs() < 1e-15);
        let none = PeEstimate::new(0, 1000, 0, 0);
        assert!(none.ci95 > 0.0 && none.p_hat == 0.0);
        let tie = PeEstimate::new(0, 4, 1, 2);
        assert_eq!(tie.p_hat, 0.5);
    }
}
