//! Exact weight distributions of the cosets met during successive-cancellation
//! (SC) decoding of polar codes.
//!
//! For `N = 2^n` and a row index `i`, the one coset `C(0..0, 1)` is
//! `g_i + <g_{i+1}, ..., g_{N-1}>` and the zero coset drops the `g_i` shift,
//! where `g_k` is row `k` of `G_2^{⊗n}` (no bit-reversal permutation).
//!
//! - [`spectrum`] computes full and truncated weight distributions of both
//!   cosets with the level-by-level `|u|u+v|` recursion.
//! - [`closedform`] gives the first nonzero component and the minimum weight
//!   of two-error-path cosets without any recursion.
//! - [`partialorder`] decides the channel partial order with certificates.
//! - [`oracle`] is the brute-force ground truth used by the tests and the
//!   `check` command.
//! - [`bounds`] and [`scmc`] turn spectra into union bounds and compare them
//!   with genie-aided Monte Carlo SC decoding over BPSK/AWGN.

pub mod bitops;
pub mod bounds;
pub mod check;
pub mod closedform;
pub mod error;
pub mod oracle;
pub mod output;
pub mod partialorder;
pub mod scmc;
pub mod spectrum;

pub use error::{Error, Result};
