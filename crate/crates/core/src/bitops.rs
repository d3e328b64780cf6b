//! Bit arithmetic on row indices of `G_N`, `N = 2^n`.
//!
//! Bit positions are zero-based and LSB-first: `i = Σ_j b_j(i) 2^j`.

use crate::error::{Error, Result};

/// Largest supported code exponent.
pub const MAX_EXPONENT: u32 = 30;

pub(crate) fn check_exponent(n: u32) -> Result<()> {
    if n > MAX_EXPONENT {
        return Err(Error::arg(format!(
            "code exponent n = {n} exceeds the supported maximum {MAX_EXPONENT}"
        )));
    }
    Ok(())
}

pub(crate) fn check_index(n: u32, i: u64) -> Result<()> {
    check_exponent(n)?;
    if i >= 1u64 << n {
        return Err(Error::arg(format!(
            "row index {i} is out of range for n = {n} (must be < {})",
            1u64 << n
        )));
    }
    Ok(())
}

/// A row index `i` of `G_N` together with its code exponent `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowIndex {
    index: u64,
    n: u32,
}

impl RowIndex {
    pub fn new(n: u32, index: u64) -> Result<Self> {
        check_index(n, index)?;
        Ok(Self { index, n })
    }

    #[inline]
    pub fn index(self) -> u64 {
        self.index
    }

    #[inline]
    pub fn exponent(self) -> u32 {
        self.n
    }

    /// `N = 2^n`.
    #[inline]
    pub fn block_length(self) -> u64 {
        1u64 << self.n
    }

    fn check_position(self, j: u32) -> Result<()> {
        if j >= self.n {
            return Err(Error::arg(format!(
                "bit position {j} is out of range for n = {}",
                self.n
            )));
        }
        Ok(())
    }

    /// `b_j(i)`.
    pub fn bit(self, j: u32) -> Result<u8> {
        self.check_position(j)?;
        Ok(((self.index >> j) & 1) as u8)
    }

    /// `p_j(i) = b_0(i) + ... + b_j(i)`.
    pub fn prefix_sum(self, j: u32) -> Result<u32> {
        self.check_position(j)?;
        Ok(prefix_popcount(self.index, j))
    }

    /// `f_ℓ(i)`: drop bit `ℓ` and close the gap, giving an index for `n - 1`.
    pub fn remove_bit(self, l: u32) -> Result<RowIndex> {
        self.check_position(l)?;
        Ok(RowIndex {
            index: remove_bit_raw(self.index, l),
            n: self.n - 1,
        })
    }

    #[inline]
    pub fn popcount(self) -> u32 {
        self.index.count_ones()
    }

    /// Hamming weight of `g_i`, which is `2^{popcount(i)}`.
    #[inline]
    pub fn row_weight(self) -> u64 {
        1u64 << self.popcount()
    }

    /// `t_{i,j} = popcount(i & j)`.
    pub fn overlap_exponent(self, other: RowIndex) -> Result<u32> {
        if self.n != other.n {
            return Err(Error::arg(format!(
                "row indices belong to different exponents ({} and {})",
                self.n, other.n
            )));
        }
        Ok((self.index & other.index).count_ones())
    }
}

/// Number of set bits among positions `0..=j`.
#[inline]
pub(crate) fn prefix_popcount(i: u64, j: u32) -> u32 {
    let mask = if j >= 63 { u64::MAX } else { (1u64 << (j + 1)) - 1 };
    (i & mask).count_ones()
}

#[inline]
pub(crate) fn remove_bit_raw(k: u64, l: u32) -> u64 {
    let low = k & ((1u64 << l) - 1);
    let high = k >> (l + 1);
    low | (high << l)
}
