//! Machine-readable records emitted by the command-line tool.
//!
//! Counts travel as decimal strings so that values beyond `2^53` survive JSON
//! and CSV unchanged.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::check::CheckReport;
use crate::partialorder::{DegradationCertificate, DichotomyCase, Step};
use crate::scmc::PeEstimate;
use crate::spectrum::{Coset, SpectralTerms};

/// One command invocation: its name, the parameters it ran with and what it
/// produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub result: Payload,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    Spectra { coset: Coset, rows: Vec<WdRow> },
    Bounds { rows: Vec<BoundRow>, terms: Vec<BoundTerm> },
    Order(OrderReport),
    Distance(DistanceReport),
    Estimates { rows: Vec<PeEstimate> },
    Check(CheckReport),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WdRow {
    pub i: u64,
    pub w: u64,
    #[serde(with = "decimal")]
    pub count: BigUint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    pub i: u64,
    pub p_ub: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundTerm {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    pub i: u64,
    pub w: u64,
    pub term: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderReport {
    pub n: u32,
    pub i: u64,
    pub j: u64,
    pub certificate: Option<DegradationCertificate>,
    /// Whether `j ⪯ i` holds instead.
    pub reverse: bool,
    /// Present when `i < j`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dichotomy: Option<DichotomyCase>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub n: u32,
    pub i: u64,
    pub j: u64,
    pub formula: u64,
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brute: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matches: Option<bool>,
}

/// `(i, w, count)` rows in ascending `i`, then `w`.
pub fn wd_rows<'a, S: SpectralTerms + 'a>(spectra: impl IntoIterator<Item = &'a S>) -> Vec<WdRow> {
    spectra
        .into_iter()
        .flat_map(|s| {
            let i = s.row();
            s.terms()
                .map(move |(w, c)| WdRow { i, w, count: c.clone() })
                .collect::<Vec<_>>()
        })
        .collect()
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| D::Error::custom(format!("not a decimal count: {s:?}")))
    }
}

fn step_text(step: &Step) -> String {
    match step {
        Step::Swap { u, w } => format!("Swap({u},{w})"),
        Step::Dominate => "Dominate".to_string(),
    }
}

impl OutputRecord {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// CSV rendering, or `None` for payloads without a tabular form.
    pub fn to_csv(&self) -> Option<String> {
        let mut out = String::new();
        match &self.result {
            Payload::Spectra { rows, .. } => {
                out.push_str("i,w,count\n");
                for r in rows {
                    let _ = writeln!(out, "{},{},{}", r.i, r.w, r.count);
                }
            }
            Payload::Bounds { rows, terms } => {
                let ranged = rows.iter().any(|r| r.snr_db.is_some());
                out.push_str(if ranged { "snr_db,i,p_ub\n" } else { "i,p_ub\n" });
                for r in rows {
                    if let Some(snr) = r.snr_db {
                        let _ = write!(out, "{snr},");
                    }
                    let _ = writeln!(out, "{},{:e}", r.i, r.p_ub);
                }
                if !terms.is_empty() {
                    out.push('\n');
                    out.push_str(if ranged { "snr_db,i,w,term\n" } else { "i,w,term\n" });
                    for t in terms {
                        if let Some(snr) = t.snr_db {
                            let _ = write!(out, "{snr},");
                        }
                        let _ = writeln!(out, "{},{},{:e}", t.i, t.w, t.term);
                    }
                }
            }
            Payload::Distance(d) => {
                out.push_str("i,j,formula,brute,match\n");
                let brute = d.brute.map(|b| b.to_string()).unwrap_or_default();
                let matches = d.matches.map(|m| m.to_string()).unwrap_or_default();
                let _ = writeln!(out, "{},{},{},{brute},{matches}", d.i, d.j, d.formula);
            }
            Payload::Estimates { rows } => {
                out.push_str("i,trials,errors,ties,p_hat,ci95\n");
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{:e},{:e}",
                        r.i, r.trials, r.errors, r.ties, r.p_hat, r.ci95
                    );
                }
            }
            Payload::Order(_) | Payload::Check(_) => return None,
        }
        Some(out)
    }

    /// Human-readable rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.result {
            Payload::Order(o) => match &o.certificate {
                None if o.reverse => {
                    let _ = writeln!(out, "no chain from {} to {}; the reverse order holds", o.i, o.j);
                }
                None => {
                    let _ = writeln!(out, "incomparable");
                }
                Some(cert) => {
                    let chain: Vec<String> = cert.chain.iter().map(u64::to_string).collect();
                    let via: Vec<String> = cert.steps.iter().map(step_text).collect();
                    if via.is_empty() {
                        let _ = writeln!(out, "chain {} (identical indices)", chain.join(" -> "));
                    } else {
                        let _ = writeln!(out, "chain {} via {}", chain.join(" -> "), via.join(", "));
                    }
                    if let Some(case) = o.dichotomy {
                        let _ = writeln!(out, "first-component case: {}", dichotomy_text(case));
                    }
                }
            },
            Payload::Distance(d) => {
                let _ = write!(out, "formula {}", d.formula);
                if let (Some(b), Some(m)) = (d.brute, d.matches) {
                    let _ = write!(out, ", brute {b}, {}", if m { "match" } else { "MISMATCH" });
                }
                out.push('\n');
            }
            Payload::Check(report) => {
                for s in &report.sections {
                    let _ = writeln!(
                        out,
                        "{:<28} {:>9} cases  {}",
                        s.name,
                        s.cases,
                        if s.failures.is_empty() {
                            "ok".to_string()
                        } else {
                            format!("{} FAILED", s.failures.len())
                        }
                    );
                    for f in &s.failures {
                        let _ = writeln!(out, "  {f}");
                    }
                }
                let _ = writeln!(
                    out,
                    "{}",
                    if report.passed() {
                        "all checks passed"
                    } else {
                        "mismatches found"
                    }
                );
            }
            _ => return self.to_csv().expect("tabular payloads render as CSV"),
        }
        out
    }
}

fn dichotomy_text(case: DichotomyCase) -> &'static str {
    match case {
        DichotomyCase::StrictlyHeavierFirstWeight => "heavier minimum weight at j",
        DichotomyCase::EqualWeightSmallerCount => "equal minimum weight, fewer minimum-weight words at j",
        DichotomyCase::Incomparable => "incomparable",
        DichotomyCase::Violated => "VIOLATED",
    }
}
