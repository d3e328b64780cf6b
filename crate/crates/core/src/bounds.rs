//! Approximate union bound on the SC stage error probability under BPSK/AWGN:
//!
//! `P_ub(i) = Σ_w (1/2) S_{i,w} erfc(sqrt(w / (2σ²)))`.

use std::f64::consts::{LN_2, PI};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{Coset, SpectralTerms};

/// Unit-energy BPSK (`0 ↦ +1`, `1 ↦ -1`) over real AWGN of variance `σ²`;
/// `SNR_dB = -10 log10 σ²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    sigma2: f64,
}

impl ChannelModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::arg(format!(
                "noise variance must be positive and finite, got {sigma2}"
            )));
        }
        Ok(Self { sigma2 })
    }

    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::arg(format!("SNR must be finite, got {snr_db}")));
        }
        Self::new(10f64.powf(-snr_db / 10.0))
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn snr_db(&self) -> f64 {
        -10.0 * self.sigma2.log10()
    }

    /// Channel LLR for a received sample: `ln W(y|0)/W(y|1) = 2y/σ²`.
    #[inline]
    pub fn llr(&self, y: f64) -> f64 {
        2.0 * y / self.sigma2
    }

    /// Probability that a single competing word at Hamming distance `w` is
    /// more likely than the transmitted one: `(1/2) erfc(sqrt(w/(2σ²)))`.
    pub fn pairwise_error(&self, w: u64) -> f64 {
        0.5 * erfc(self.erfc_argument(w))
    }

    fn erfc_argument(&self, w: u64) -> f64 {
        (w as f64 / (2.0 * self.sigma2)).sqrt()
    }
}

/// Above this argument `erfc` is evaluated through its continued fraction.
const CONTINUED_FRACTION_FROM: f64 = 5.0;
const CONTINUED_FRACTION_DEPTH: u32 = 80;

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `ln erfc(x)`, finite for every finite `x` (no underflow in the tail).
pub fn ln_erfc(x: f64) -> f64 {
    if x < CONTINUED_FRACTION_FROM {
        return libm::erfc(x).ln();
    }
    // erfc(x) = exp(-x²)/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut tail = x;
    for k in (1..=CONTINUED_FRACTION_DEPTH).rev() {
        tail = x + (k as f64 / 2.0) / tail;
    }
    -x * x - 0.5 * PI.ln() - tail.ln()
}

/// Natural logarithm of a positive big integer.
pub(crate) fn ln_biguint(c: &BigUint) -> f64 {
    let bits = c.bits();
    if bits <= 1000 {
        return c.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (c >> shift).to_f64().expect("64-bit value fits in f64");
    top.ln() + shift as f64 * LN_2
}

/// Count bit length below which terms are evaluated as direct products.
const DIRECT_MAX_BITS: u64 = 500;

fn term(count: &BigUint, x: f64) -> f64 {
    if count.bits() < DIRECT_MAX_BITS && x < CONTINUED_FRACTION_FROM {
        let c = count.to_f64().expect("count below 2^500 fits in f64");
        0.5 * c * erfc(x)
    } else {
        (ln_biguint(count) + ln_erfc(x) - LN_2).exp()
    }
}

/// Per-weight contributions `(w, (1/2) S_w erfc(sqrt(w/(2σ²))))`.
pub fn union_bound_terms<S: SpectralTerms + ?Sized>(wd: &S, ch: &ChannelModel) -> Result<Vec<(u64, f64)>> {
    if wd.coset() != Coset::One {
        return Err(Error::arg(
            "the union bound is defined over the competing (one) coset, got a zero-coset spectrum",
        ));
    }
    Ok(wd
        .terms()
        .map(|(w, count)| (w, term(count, ch.erfc_argument(w))))
        .collect())
}

/// `P_ub(i)` over the terms present in `wd`; a truncated spectrum gives the
/// sum restricted to its first `p` nonzero terms.
pub fn union_bound<S: SpectralTerms + ?Sized>(wd: &S, ch: &ChannelModel) -> Result<f64> {
    Ok(union_bound_terms(wd, ch)?.into_iter().map(|(_, t)| t).sum())
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::spectrum::{wd_one_coset, wd_truncated, wd_zero_coset, SpectrumConfig, WeightDistribution};
    use num_traits::One;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    // Reference values from 50-digit evaluations of erfc.
    const ERFC_REFERENCE: [(f64, f64); 8] = [
        (0.0, 1.0),
        (0.1, 0.8875370839817151078),
        (1.0, 0.15729920705028513066),
        (2.5, 4.0695201744495893956e-4),
        (5.0, 1.5374597944280348502e-12),
        (10.0, 2.088487583762544757e-45),
        (20.0, 5.3958656116079009289e-176),
        (26.0, 5.6631924088561428465e-296),
    ];

    // ln erfc at arguments where erfc underflows f64.
    const LN_ERFC_REFERENCE: [(f64, f64); 3] = [
        (30.0, -903.97411711064387808),
        (100.0, -10005.177585122664333),
        (1000.0, -1000007.4801207219062),
    ];

    #[test]
    fn erfc_matches_reference() {
        for (x, want) in ERFC_REFERENCE {
            assert!(close(erfc(x), want, 1e-10), "erfc({x}) = {} vs {want}", erfc(x));
            assert!(close(ln_erfc(x), want.ln(), 1e-12), "ln_erfc({x})");
        }
        for (x, want) in LN_ERFC_REFERENCE {
            assert!(close(ln_erfc(x), want, 1e-12), "ln_erfc({x}) = {}", ln_erfc(x));
        }
    }

    #[test]
    fn erfc_symmetry_and_continuity() {
        for k in 0..300 {
            let x = k as f64 * 0.1;
            assert!(close(erfc(-x), 2.0 - erfc(x), 1e-15));
        }
        // Both branches of ln_erfc agree near the switch point.
        let below = libm::erfc(5.0).ln();
        let mut tail = 5.0;
        for k in (1..=CONTINUED_FRACTION_DEPTH).rev() {
            tail = 5.0 + (k as f64 / 2.0) / tail;
        }
        let cf = -25.0 - 0.5 * PI.ln() - f64::ln(tail);
        assert!(close(cf, below, 1e-13));
    }

    #[test]
    fn channel_conventions() {
        let ch = ChannelModel::new(0.158).unwrap();
        assert!((ch.snr_db() - 8.013).abs() < 1e-3);
        let back = ChannelModel::from_snr_db(ch.snr_db()).unwrap();
        assert!(close(back.sigma2(), 0.158, 1e-12));
        assert!(ChannelModel::new(0.0).is_err());
        assert!(ChannelModel::new(-1.0).is_err());
        assert!(ChannelModel::new(f64::NAN).is_err());
    }

    #[test]
    fn single_word_bound() {
        let ch = ChannelModel::new(0.5).unwrap();
        let wd = wd_one_coset(1, 0).unwrap();
        assert!(close(union_bound(&wd, &ch).unwrap(), 0.15729920705028513, 1e-12));
        for n in [3u32, 8] {
            let last = (1u64 << n) - 1;
            let wd = SpectrumConfig::default().one_coset(n, last).unwrap();
            let want = 0.5 * erfc(((1u64 << n) as f64 / 1.0).sqrt());
            assert!(close(union_bound(&wd, &ch).unwrap(), want, 1e-12));
        }
    }

    #[test]
    fn table_row_zero_bound() {
        let ch = ChannelModel::new(0.158).unwrap();
        let wd = wd_one_coset(3, 0).unwrap();
        let expect: f64 = [(1, 8.0), (3, 56.0), (5, 56.0), (7, 8.0)]
            .iter()
            .map(|&(w, c)| 0.5 * c * erfc((w as f64 / 0.316).sqrt()))
            .sum();
        assert!(close(union_bound(&wd, &ch).unwrap(), expect, 1e-14));
        // 50-digit reference of the same sum.
        assert!(close(expect, 0.04787762364636968161, 1e-10));
    }

    #[test]
    fn zero_coset_rejected() {
        let ch = ChannelModel::new(0.5).unwrap();
        assert!(union_bound(&wd_zero_coset(3, 1).unwrap(), &ch).is_err());
    }

    #[test]
    fn huge_counts_stay_finite() {
        // 2^1100 is beyond the f64 range; the term itself is about 1e-105.
        let ch = ChannelModel::new(0.5).unwrap();
        let mut counts = vec![BigUint::default(); 1025];
        counts[1000] = BigUint::one() << 1100u32;
        let wd = WeightDistribution {
            n: 10,
            i: 0,
            coset: Coset::One,
            counts,
        };
        let got = union_bound(&wd, &ch).unwrap();
        let want = (1100.0 * LN_2 + ln_erfc(1000f64.sqrt()) - LN_2).exp();
        assert!(got.is_finite() && got > 1e-110 && got < 1e-100, "{got}");
        assert!(close(got, want, 1e-12));
        assert!(close(got, 6.147400649140879839e-106, 1e-10));

        let big_x = BigUint::one() << 3000u32;
        assert!(close(ln_biguint(&big_x), 3000.0 * LN_2, 1e-15));
        assert!(close(
            ln_biguint(&(BigUint::from(3u32) << 2000u32)),
            3f64.ln() + 2000.0 * LN_2,
            1e-15
        ));
    }

    #[test]
    fn truncation_lower_bounds_full() {
        let cfg = SpectrumConfig::default();
        for sigma2 in [0.05, 0.158, 0.5, 1.0] {
            let ch = ChannelModel::new(sigma2).unwrap();
            for i in 0..64 {
                let full = cfg.one_coset(6, i).unwrap();
                let ub = union_bound(&full, &ch).unwrap();
                for p in [1usize, 2, 4] {
                    let t = wd_truncated(6, i, p, Coset::One).unwrap();
                    assert!(union_bound(&t, &ch).unwrap() <= ub * (1.0 + 1e-12));
                }
                let all = wd_truncated(6, i, 64, Coset::One).unwrap();
                assert!(close(union_bound(&all, &ch).unwrap(), ub, 1e-12));
            }
        }
    }

    #[test]
    fn monotone_in_noise() {
        let wd = wd_one_coset(5, 6).unwrap();
        let mut last = 0.0;
        for k in 1..40 {
            let ub = union_bound(&wd, &ChannelModel::new(k as f64 * 0.05).unwrap()).unwrap();
            assert!(ub > last);
            last = ub;
        }
    }
}
