//! Cross-checks of the fast computations against the exhaustive oracles.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitops::check_exponent;
use crate::closedform::{first_nonzero, pair_min_distance};
use crate::error::Result;
use crate::oracle::{generator_closure, CosetSpec, OracleConfig};
use crate::partialorder::{spectral_dichotomy, suffix_dominance, DichotomyCase};
use crate::spectrum::{Coset, SpectrumConfig, WeightDistribution};

/// Largest coset dimension the default suite enumerates word by word.
pub const DEFAULT_ENUMERATION_DIMENSION: u64 = 23;
/// Largest `n` for the quadratic-in-`N` partial-order comparison.
pub const PARTIAL_ORDER_MAX_N: u32 = 8;
const TRUNCATION_DEPTHS: [usize; 4] = [1, 2, 4, 8];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub n: u32,
    pub i: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<u64>,
    pub detail: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.j {
            Some(j) => write!(f, "(n={}, i={}, j={j}): {}", self.n, self.i, self.detail),
            None => write!(f, "(n={}, i={}): {}", self.n, self.i, self.detail),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub cases: u64,
    pub failures: Vec<Mismatch>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub sections: Vec<Section>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.sections.iter().all(|s| s.failures.is_empty())
    }

    pub fn failures(&self) -> impl Iterator<Item = &Mismatch> {
        self.sections.iter().flat_map(|s| s.failures.iter())
    }
}

/// Which cases the suite covers.
#[derive(Clone, Copy, Debug)]
pub struct CheckConfig {
    pub max_n: u32,
    /// Cosets of dimension above this are skipped by the enumeration checks.
    pub enumeration_dimension: u64,
    pub spectrum: SpectrumConfig,
}

impl CheckConfig {
    pub fn new(max_n: u32) -> Self {
        Self {
            max_n,
            enumeration_dimension: DEFAULT_ENUMERATION_DIMENSION,
            spectrum: SpectrumConfig::default(),
        }
    }

    fn oracle(&self) -> OracleConfig {
        OracleConfig {
            enumeration_cap: 1u64 << self.enumeration_dimension,
        }
    }

    /// Runs every section for `n = 0..=max_n`.
    pub fn run(&self) -> Result<CheckReport> {
        check_exponent(self.max_n)?;
        Ok(CheckReport {
            sections: vec![
                self.spectra_vs_enumeration()?,
                self.structure()?,
                self.closed_form()?,
                self.pair_distance()?,
                self.partial_order()?,
            ],
        })
    }

    fn ns(&self) -> std::ops::RangeInclusive<u32> {
        0..=self.max_n
    }

    fn full_ns(&self) -> std::ops::RangeInclusive<u32> {
        0..=self.max_n.min(self.spectrum.full_max_n)
    }

    /// Recursion against word-by-word enumeration, both cosets, wherever the
    /// coset has at most `enumeration_dimension` free rows.
    pub fn spectra_vs_enumeration(&self) -> Result<Section> {
        let oracle = self.oracle();
        let mut cases = 0;
        let mut failures = Vec::new();
        for n in self.full_ns() {
            let big_n = 1u64 << n;
            let first = big_n.saturating_sub(self.enumeration_dimension + 1);
            for coset in [Coset::One, Coset::Zero] {
                let all = self.spectrum.all_full(n, coset)?;
                for wd in &all[first as usize..] {
                    let spec = CosetSpec::stage(n, wd.i, coset.last_bit())?;
                    let want = oracle.enumerate_coset_wd(&spec)?;
                    cases += 1;
                    if wd.counts != want {
                        failures.push(Mismatch {
                            n,
                            i: wd.i,
                            j: None,
                            detail: format!(
                                "{coset} coset: recursion {} vs enumeration {}",
                                show(&wd.counts),
                                show(&want)
                            ),
                        });
                    }
                }
            }
        }
        Ok(section("spectra vs enumeration", cases, failures))
    }

    /// Cardinality, symmetry, parity and truncation agreement.
    pub fn structure(&self) -> Result<Section> {
        let mut cases = 0;
        let mut failures = Vec::new();
        for n in self.full_ns() {
            for coset in [Coset::One, Coset::Zero] {
                let all = self.spectrum.all_full(n, coset)?;
                let truncated: Vec<_> = TRUNCATION_DEPTHS
                    .iter()
                    .map(|&p| self.spectrum.all_truncated(n, p, coset))
                    .collect::<Result<_>>()?;
                for wd in &all {
                    cases += 1;
                    let mut fail = |detail: String| {
                        failures.push(Mismatch {
                            n,
                            i: wd.i,
                            j: None,
                            detail: format!("{coset} coset: {detail}"),
                        })
                    };
                    if let Some(d) = structural_defect(wd) {
                        fail(d);
                    }
                    for (p, rows) in TRUNCATION_DEPTHS.iter().zip(&truncated) {
                        if rows[wd.i as usize] != wd.truncate(*p) {
                            fail(format!("first {p} terms differ from the full distribution"));
                        }
                    }
                }
            }
        }
        Ok(section("structural invariants", cases, failures))
    }

    /// Closed-form first component against the recursion.
    pub fn closed_form(&self) -> Result<Section> {
        let mut cases = 0;
        let mut failures = Vec::new();
        for n in self.ns() {
            let rows = if n <= self.spectrum.full_max_n {
                self.spectrum
                    .all_full(n, Coset::One)?
                    .iter()
                    .map(|wd| wd.truncate(1))
                    .collect()
            } else {
                self.spectrum.all_truncated(n, 1, Coset::One)?
            };
            for t in rows {
                cases += 1;
                let fc = first_nonzero(n, t.i)?;
                let got = t.terms.first().map(|(w, c)| (*w, c.clone()));
                if got != Some((fc.weight, fc.count())) {
                    failures.push(Mismatch {
                        n,
                        i: t.i,
                        j: None,
                        detail: format!(
                            "closed form ({}, 2^{}) vs recursion {:?}",
                            fc.weight, fc.log2_count, got
                        ),
                    });
                }
            }
        }
        Ok(section("first component", cases, failures))
    }

    /// Two-row coset minimum weight against brute force.
    pub fn pair_distance(&self) -> Result<Section> {
        let oracle = self.oracle();
        let mut cases = 0;
        let mut failures = Vec::new();
        for n in self.ns() {
            let big_n = 1u64 << n;
            let pairs: Vec<(u64, u64)> = (0..big_n)
                .flat_map(|i| (i + 1..big_n).map(move |j| (i, j)))
                .filter(|&(_, j)| big_n - j - 1 <= self.enumeration_dimension)
                .collect();
            let outcomes: Vec<Option<Mismatch>> = pairs
                .par_iter()
                .map(|&(i, j)| -> Result<Option<Mismatch>> {
                    let formula = pair_min_distance(n, i, j)?.distance;
                    let brute = oracle.brute_min_distance_pair(n, i, j)?;
                    Ok((formula != brute).then(|| Mismatch {
                        n,
                        i,
                        j: Some(j),
                        detail: format!("formula {formula} vs brute force {brute}"),
                    }))
                })
                .collect::<Result<_>>()?;
            cases += pairs.len() as u64;
            failures.extend(outcomes.into_iter().flatten());
        }
        Ok(section("pair minimum distance", cases, failures))
    }

    /// Suffix dominance against the generator closure, and the first-component
    /// dichotomy on every ordered comparable pair.
    pub fn partial_order(&self) -> Result<Section> {
        let mut cases = 0;
        let mut failures = Vec::new();
        for n in 0..=self.max_n.min(PARTIAL_ORDER_MAX_N) {
            let reach = generator_closure(n)?;
            let size = 1u64 << n;
            for i in 0..size {
                for j in 0..size {
                    cases += 1;
                    let closure = reach[i as usize][j as usize];
                    let decided = suffix_dominance(n, i, j)?;
                    if closure != decided {
                        failures.push(Mismatch {
                            n,
                            i,
                            j: Some(j),
                            detail: format!("closure says {closure}, suffix dominance says {decided}"),
                        });
                    }
                    if i < j && closure {
                        let v = spectral_dichotomy(n, i, j)?;
                        if matches!(v.case, DichotomyCase::Violated | DichotomyCase::Incomparable) {
                            failures.push(Mismatch {
                                n,
                                i,
                                j: Some(j),
                                detail: format!(
                                    "ordered pair outside both branches: {:?} vs {:?}",
                                    v.first_i, v.first_j
                                ),
                            });
                        }
                    }
                }
            }
        }
        Ok(section("partial order", cases, failures))
    }
}

/// Runs the default suite up to `max_n`.
pub fn run_check(max_n: u32) -> Result<CheckReport> {
    CheckConfig::new(max_n).run()
}

fn section(name: &str, cases: u64, failures: Vec<Mismatch>) -> Section {
    Section {
        name: name.to_string(),
        cases,
        failures,
    }
}

fn show(counts: &[BigUint]) -> String {
    let parts: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
    format!("[{}]", parts.join(" "))
}

/// First violated structural property of a full distribution, if any.
pub fn structural_defect(wd: &WeightDistribution) -> Option<String> {
    let big_n = wd.block_length();
    let dim = big_n - wd.i - 1;
    if wd.counts.len() as u64 != big_n + 1 {
        return Some(format!("{} weight slots for N = {big_n}", wd.counts.len()));
    }
    if wd.total() != BigUint::from(1u8) << dim {
        return Some(format!("{} words, expected 2^{dim}", wd.total()));
    }
    if wd.i + 1 < big_n {
        let asymmetric = (0..=big_n).find(|&w| wd.counts[w as usize] != wd.counts[(big_n - w) as usize]);
        if let Some(w) = asymmetric {
            return Some(format!("count at weight {w} differs from weight {}", big_n - w));
        }
    }
    if let Some(w0) = wd.min_weight() {
        if let Some((w, _)) = wd.nonzero_terms().find(|(w, _)| (w - w0) % 2 == 1) {
            return Some(format!("weight {w} has a different parity from the minimum {w0}"));
        }
    } else {
        return Some("empty distribution".to_string());
    }
    if wd.coset == Coset::Zero && wd.counts[0].is_zero() {
        return Some("zero coset lacks the zero word".to_string());
    }
    None
}
