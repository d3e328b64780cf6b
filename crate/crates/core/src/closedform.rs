//! Closed-form spectral quantities.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::bitops::{check_index, prefix_popcount};
use crate::error::Result;

/// Position and value of the first nonzero entry of `S_i^(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstComponent {
    /// `w(g_i) = 2^{popcount(i)}`.
    pub weight: u64,
    /// `log2 s_i^(n)`; at most `N - 1`.
    pub log2_count: u64,
}

impl FirstComponent {
    /// `s_i^(n) = 2^{log2_count}`.
    pub fn count(&self) -> BigUint {
        BigUint::one() << self.log2_count
    }
}

/// `log2 s_i = Σ_{j<n} (1 - b_j(i)) 2^{p_j(i)}` and `w(g_i) = 2^{p_{n-1}(i)}`.
pub fn first_nonzero(n: u32, i: u64) -> Result<FirstComponent> {
    check_index(n, i)?;
    let log2_count = (0..n)
        .filter(|&j| (i >> j) & 1 == 0)
        .map(|j| 1u64 << prefix_popcount(i, j))
        .sum();
    Ok(FirstComponent {
        weight: 1u64 << i.count_ones(),
        log2_count,
    })
}

/// Minimum weight of `C(i, j) = g_i + g_j + <g_{j+1}, ..., g_{N-1}>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDistance {
    pub distance: u64,
    /// Set when `i = j`; the value is then `w(g_i + g_i) = 0`.
    pub degenerate: bool,
}

/// `w(g_i + g_j) = w(g_i) + w(g_j) - 2^{t+1}` with `t = popcount(i & j)`.
///
/// Arguments may come in either order.
pub fn pair_min_distance(n: u32, i: u64, j: u64) -> Result<PairDistance> {
    check_index(n, i)?;
    check_index(n, j)?;
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    let t = (lo & hi).count_ones();
    let distance = (1u64 << lo.count_ones()) + (1u64 << hi.count_ones()) - (1u64 << (t + 1));
    Ok(PairDistance {
        distance,
        degenerate: lo == hi,
    })
}
