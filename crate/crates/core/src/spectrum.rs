//! Weight distributions of the SC decoding cosets.
//!
//! `S_i^(n)` counts the words of `g_i + <g_{i+1}, ..., g_{N-1}>` by Hamming
//! weight (the one coset) and `T_i^(n)` does the same for
//! `<g_{i+1}, ..., g_{N-1}>` (the zero coset). Both follow the same recursion
//! over the Kronecker levels `j = 1..n`, `N_j = 2^j`, `h = N_j / 2`:
//!
//! - row `r < h` (lower half): every level-`(j-1)` word `x1` of weight `w'`
//!   contributes `2^{w'} * C(h - w', t)` words of weight `w' + 2t`;
//! - row `r >= h` (upper half): words are repetitions `(x, x)` of the words of
//!   row `r - h`, so weights double.
//!
//! Base cases are `S^(0) = (0, 1)` and `T^(0) = (1, 0)`.
//!
//! Internally a spectrum is a sorted list of its nonzero `(weight, count)`
//! terms. Both recursion steps map "the first `p` nonzero terms" of a row to
//! the first `p` nonzero terms of its children, which is what makes the
//! truncated computation exact.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitops::{check_exponent, check_index};
use crate::error::{Error, Result};

/// Default largest `n` for which full distributions are computed.
pub const DEFAULT_FULL_MAX_N: u32 = 12;

/// Default memory budget for memoized binomial rows.
pub const DEFAULT_BINOMIAL_CACHE_BYTES: usize = 256 << 20;

/// Which of the two cosets at stage `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coset {
    /// `C(0..0, 1)`, the competing coset after a correct prefix.
    One,
    /// `C(0..0, 0)`, the coset holding the transmitted all-zero word.
    Zero,
}

impl Coset {
    /// Value of `u_i` selecting this coset.
    pub fn last_bit(self) -> u8 {
        match self {
            Coset::One => 1,
            Coset::Zero => 0,
        }
    }

    fn base(self) -> Row {
        let w = match self {
            Coset::One => 1,
            Coset::Zero => 0,
        };
        Row {
            shift: 0,
            terms: vec![(w, BigUint::one())],
        }
    }
}

impl fmt::Display for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coset::One => f.write_str("one"),
            Coset::Zero => f.write_str("zero"),
        }
    }
}

impl std::str::FromStr for Coset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" | "1" => Ok(Coset::One),
            "zero" | "0" => Ok(Coset::Zero),
            other => Err(Error::arg(format!("unknown coset '{other}' (expected one|zero)"))),
        }
    }
}

/// Nonzero `(weight, count)` pairs sorted by weight.
type Terms = Vec<(u64, BigUint)>;

/// One row of the recursion with the power of two shared by all of its
/// counts held apart: the count of weight `w` is `terms[k].1 << shift`.
///
/// The lower-half step multiplies every count by at least `2^{w_min}`, so
/// without this the big integers would mostly carry trailing zeros.
#[derive(Clone, Debug)]
struct Row {
    shift: u64,
    terms: Terms,
}

impl Row {
    fn into_terms(self) -> Terms {
        let shift = self.shift;
        self.terms.into_iter().map(|(w, c)| (w, c << shift)).collect()
    }

    /// Moves common trailing zeros of the mantissas into `shift`.
    fn normalize(&mut self) {
        let Some(tz) = self.terms.iter().filter_map(|(_, c)| c.trailing_zeros()).min() else {
            return;
        };
        if tz > 0 {
            for (_, c) in &mut self.terms {
                *c >>= tz;
            }
            self.shift += tz;
        }
    }
}

/// Exact weight distribution of one coset: `counts[w]` for `w = 0..=N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightDistribution {
    pub n: u32,
    pub i: u64,
    pub coset: Coset,
    pub counts: Vec<BigUint>,
}

impl WeightDistribution {
    fn from_terms(n: u32, i: u64, coset: Coset, terms: &[(u64, BigUint)]) -> Self {
        let mut counts = vec![BigUint::zero(); (1usize << n) + 1];
        for (w, c) in terms {
            counts[*w as usize] = c.clone();
        }
        Self { n, i, coset, counts }
    }

    pub fn block_length(&self) -> u64 {
        1u64 << self.n
    }

    /// Smallest weight with a nonzero count.
    pub fn min_weight(&self) -> Option<u64> {
        self.counts.iter().position(|c| !c.is_zero()).map(|w| w as u64)
    }

    /// Number of words in the coset.
    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    pub fn nonzero_terms(&self) -> impl Iterator<Item = (u64, &BigUint)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(w, c)| (w as u64, c))
    }

    /// The first `p` nonzero components of this distribution.
    pub fn truncate(&self, p: usize) -> TruncatedSpectrum {
        TruncatedSpectrum {
            n: self.n,
            i: self.i,
            coset: self.coset,
            p,
            terms: self.nonzero_terms().take(p).map(|(w, c)| (w, c.clone())).collect(),
        }
    }
}

/// The first `p` nonzero components of a coset weight distribution.
///
/// `terms` holds at most `p` `(weight, count)` pairs in increasing weight
/// order; fewer are present when the coset has fewer distinct weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSpectrum {
    pub n: u32,
    pub i: u64,
    pub coset: Coset,
    pub p: usize,
    pub terms: Vec<(u64, BigUint)>,
}

impl TruncatedSpectrum {
    pub fn min_weight(&self) -> Option<u64> {
        self.terms.first().map(|(w, _)| *w)
    }

    pub fn counts(&self) -> impl Iterator<Item = &BigUint> + '_ {
        self.terms.iter().map(|(_, c)| c)
    }
}

/// Read access shared by full and truncated spectra.
pub trait SpectralTerms {
    fn exponent(&self) -> u32;
    fn row(&self) -> u64;
    fn coset(&self) -> Coset;
    /// Nonzero `(weight, count)` terms in increasing weight order.
    fn terms(&self) -> Box<dyn Iterator<Item = (u64, &BigUint)> + '_>;
}

impl SpectralTerms for WeightDistribution {
    fn exponent(&self) -> u32 {
        self.n
    }
    fn row(&self) -> u64 {
        self.i
    }
    fn coset(&self) -> Coset {
        self.coset
    }
    fn terms(&self) -> Box<dyn Iterator<Item = (u64, &BigUint)> + '_> {
        Box::new(self.nonzero_terms())
    }
}

impl SpectralTerms for TruncatedSpectrum {
    fn exponent(&self) -> u32 {
        self.n
    }
    fn row(&self) -> u64 {
        self.i
    }
    fn coset(&self) -> Coset {
        self.coset
    }
    fn terms(&self) -> Box<dyn Iterator<Item = (u64, &BigUint)> + '_> {
        Box::new(self.terms.iter().map(|(w, c)| (*w, c)))
    }
}

/// How many nonzero components to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Depth {
    Full,
    First(usize),
}

/// Output of the batch driver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Spectrum {
    Full(WeightDistribution),
    Truncated(TruncatedSpectrum),
}

impl SpectralTerms for Spectrum {
    fn exponent(&self) -> u32 {
        match self {
            Spectrum::Full(s) => s.n,
            Spectrum::Truncated(s) => s.n,
        }
    }
    fn row(&self) -> u64 {
        match self {
            Spectrum::Full(s) => s.i,
            Spectrum::Truncated(s) => s.i,
        }
    }
    fn coset(&self) -> Coset {
        match self {
            Spectrum::Full(s) => s.coset,
            Spectrum::Truncated(s) => s.coset,
        }
    }
    fn terms(&self) -> Box<dyn Iterator<Item = (u64, &BigUint)> + '_> {
        match self {
            Spectrum::Full(s) => s.terms(),
            Spectrum::Truncated(s) => s.terms(),
        }
    }
}

/// Binomial rows `C(m, 0..len)` for one recursion level, built on first use.
///
/// Rows are memoized until the byte budget is spent; later rows are computed
/// on demand and dropped after use.
struct LevelBinomials {
    limit: usize,
    rows: Vec<OnceLock<Arc<Vec<BigUint>>>>,
    budget: usize,
    used: AtomicUsize,
}

impl LevelBinomials {
    fn new(half: u64, limit: usize, budget: usize) -> Self {
        let rows = (0..=half).map(|_| OnceLock::new()).collect();
        Self {
            limit,
            rows,
            budget,
            used: AtomicUsize::new(0),
        }
    }

    fn row(&self, m: u64) -> Arc<Vec<BigUint>> {
        let slot = &self.rows[m as usize];
        if let Some(row) = slot.get() {
            return Arc::clone(row);
        }
        let len = self.limit.min(m as usize + 1);
        // Approximate size: C(m, t) has at most m bits.
        let bytes = len * (m as usize / 8 + 32);
        if self.used.load(Ordering::Relaxed) + bytes > self.budget {
            return Arc::new(binomial_row(m, len));
        }
        Arc::clone(slot.get_or_init(|| {
            self.used.fetch_add(bytes, Ordering::Relaxed);
            Arc::new(binomial_row(m, len))
        }))
    }
}

/// `C(m, t)` for `t = 0..len`, by the exact multiplicative recurrence.
fn binomial_row(m: u64, len: usize) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(len);
    let mut c = BigUint::one();
    for t in 0..len as u64 {
        if t > 0 {
            c *= m - t + 1;
            c /= t;
        }
        row.push(c.clone());
    }
    row
}

/// Upper-half step: `S_r^(j)[2w] = S_{r-h}^(j-1)[w]`.
fn spread(row: &Row) -> Row {
    Row {
        shift: row.shift,
        terms: row.terms.iter().map(|(w, c)| (2 * w, c.clone())).collect(),
    }
}

/// Lower-half step, keeping at most `limit` output terms.
fn convolve(row: &Row, half: u64, limit: usize, binomials: &LevelBinomials) -> Row {
    let terms = &row.terms;
    let Some(&(w_min, _)) = terms.first() else {
        return row.clone();
    };
    // Outputs live at w_min + 2k, k = 0..=half - w_min, and all are nonzero.
    let out_len = limit.min((half - w_min) as usize + 1);
    let mut out = vec![BigUint::zero(); out_len];
    for (w, c) in terms {
        let base = ((w - w_min) / 2) as usize;
        if base >= out_len {
            break;
        }
        let m = half - w;
        let t_max = (m as usize).min(out_len - 1 - base);
        // 2^{w} = 2^{w_min} (folded into the shift) * 2^{w - w_min}
        let scaled = c << (w - w_min);
        let binoms = binomials.row(m);
        for (slot, binom) in out[base..=base + t_max].iter_mut().zip(binoms.iter()) {
            *slot += &scaled * binom;
        }
    }
    let mut next = Row {
        shift: row.shift + w_min,
        terms: out
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (w_min + 2 * k as u64, c))
            .collect(),
    };
    next.normalize();
    next
}

/// Computation caps and cache sizing for the recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpectrumConfig {
    /// Largest `n` for which full distributions are produced.
    pub full_max_n: u32,
    /// Memory budget for memoized binomial rows, per level.
    pub binomial_cache_bytes: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            full_max_n: DEFAULT_FULL_MAX_N,
            binomial_cache_bytes: DEFAULT_BINOMIAL_CACHE_BYTES,
        }
    }
}

impl SpectrumConfig {
    fn check_full(&self, n: u32) -> Result<()> {
        if n > self.full_max_n {
            return Err(Error::ResourceCap {
                what: format!("a full weight distribution at n = {n}"),
                required: format!("N = {} (Θ(N²) big integers)", 1u64 << n),
                cap: format!("n = {}", self.full_max_n),
                hint: "; use the truncated computation (first p nonzero components) or raise the cap".to_string(),
            });
        }
        Ok(())
    }

    /// Runs the recursion along the path of row `i` only.
    fn path_terms(&self, n: u32, i: u64, limit: usize, coset: Coset) -> Terms {
        let mut row = coset.base();
        for j in 1..=n {
            let half = 1u64 << (j - 1);
            row = if (i >> (j - 1)) & 1 == 1 {
                spread(&row)
            } else {
                let binomials = LevelBinomials::new(half, limit, self.binomial_cache_bytes);
                convolve(&row, half, limit, &binomials)
            };
        }
        row.into_terms()
    }

    /// Full distribution of the requested coset at stage `i`.
    pub fn distribution(&self, n: u32, i: u64, coset: Coset) -> Result<WeightDistribution> {
        check_index(n, i)?;
        self.check_full(n)?;
        let terms = self.path_terms(n, i, usize::MAX, coset);
        Ok(WeightDistribution::from_terms(n, i, coset, &terms))
    }

    pub fn one_coset(&self, n: u32, i: u64) -> Result<WeightDistribution> {
        self.distribution(n, i, Coset::One)
    }

    pub fn zero_coset(&self, n: u32, i: u64) -> Result<WeightDistribution> {
        self.distribution(n, i, Coset::Zero)
    }

    /// First `p` nonzero components; no size cap applies.
    pub fn truncated(&self, n: u32, i: u64, p: usize, coset: Coset) -> Result<TruncatedSpectrum> {
        check_index(n, i)?;
        check_p(p)?;
        Ok(TruncatedSpectrum {
            n,
            i,
            coset,
            p,
            terms: self.path_terms(n, i, p, coset),
        })
    }

    /// Runs the whole recursion tree, level by level, and returns the rows of
    /// the last level. Each level-`(j-1)` row feeds exactly its two children.
    fn all_terms(&self, n: u32, limit: usize, coset: Coset) -> Vec<Terms> {
        let mut level = vec![coset.base()];
        for j in 1..=n {
            let half = 1u64 << (j - 1);
            let binomials = LevelBinomials::new(half, limit, self.binomial_cache_bytes);
            let mut next: Vec<Row> = level
                .par_iter()
                .map(|row| convolve(row, half, limit, &binomials))
                .collect();
            next.extend(level.iter().map(spread));
            level = next;
        }
        level.into_par_iter().map(Row::into_terms).collect()
    }

    /// All `N` full distributions.
    pub fn all_full(&self, n: u32, coset: Coset) -> Result<Vec<WeightDistribution>> {
        check_exponent(n)?;
        self.check_full(n)?;
        Ok(self
            .all_terms(n, usize::MAX, coset)
            .iter()
            .enumerate()
            .map(|(i, terms)| WeightDistribution::from_terms(n, i as u64, coset, terms))
            .collect())
    }

    /// The first `p` nonzero components of all `N` distributions.
    pub fn all_truncated(&self, n: u32, p: usize, coset: Coset) -> Result<Vec<TruncatedSpectrum>> {
        check_exponent(n)?;
        check_p(p)?;
        Ok(self
            .all_terms(n, p, coset)
            .into_iter()
            .enumerate()
            .map(|(i, terms)| TruncatedSpectrum {
                n,
                i: i as u64,
                coset,
                p,
                terms,
            })
            .collect())
    }

    pub fn all(&self, n: u32, depth: Depth, coset: Coset) -> Result<Vec<Spectrum>> {
        Ok(match depth {
            Depth::Full => self.all_full(n, coset)?.into_iter().map(Spectrum::Full).collect(),
            Depth::First(p) => self
                .all_truncated(n, p, coset)?
                .into_iter()
                .map(Spectrum::Truncated)
                .collect(),
        })
    }
}

fn check_p(p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::arg("the number of retained components p must be at least 1"));
    }
    Ok(())
}

/// `S_i^(n)` with the default configuration.
pub fn wd_one_coset(n: u32, i: u64) -> Result<WeightDistribution> {
    SpectrumConfig::default().one_coset(n, i)
}

/// `T_i^(n)` with the default configuration.
pub fn wd_zero_coset(n: u32, i: u64) -> Result<WeightDistribution> {
    SpectrumConfig::default().zero_coset(n, i)
}

pub fn wd_truncated(n: u32, i: u64, p: usize, coset: Coset) -> Result<TruncatedSpectrum> {
    SpectrumConfig::default().truncated(n, i, p, coset)
}

pub fn wd_all(n: u32, depth: Depth, coset: Coset) -> Result<Vec<Spectrum>> {
    SpectrumConfig::default().all(n, depth, coset)
}
