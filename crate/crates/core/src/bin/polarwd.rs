use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use polarwd::bounds::{union_bound_terms, ChannelModel};
use polarwd::check::CheckConfig;
use polarwd::closedform::pair_min_distance;
use polarwd::oracle::brute_min_distance_pair;
use polarwd::output::{wd_rows, BoundRow, BoundTerm, DistanceReport, OrderReport, OutputRecord, Payload};
use polarwd::partialorder::{is_degraded, spectral_dichotomy};
use polarwd::scmc::estimate_pe;
use polarwd::spectrum::{Coset, Depth, Spectrum, SpectrumConfig};
use polarwd::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_CAP: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

/// Weight distributions of polar-code SC cosets, union bounds and
/// cross-checks.
#[derive(Parser, Debug)]
#[command(name = "polarwd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coset weight distributions as (i, w, count) rows.
    Wd(WdArgs),
    /// Union bound on the stage error probability.
    Bound(BoundArgs),
    /// Decide whether channel i is degraded with respect to channel j.
    Po(PairArgs),
    /// Minimum weight of g_i + g_j + <g_{j+1}, ..., g_{N-1}>.
    Mindist(MindistArgs),
    /// Genie-aided Monte Carlo SC stage error rates over BPSK/AWGN.
    Simulate(SimulateArgs),
    /// Run the oracle-equivalence suite.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format; tabular commands default to csv, reports to text.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the output to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Selection {
    /// A single row index.
    #[arg(long)]
    i: Option<u64>,
    /// Every row index 0..2^n.
    #[arg(long)]
    all: bool,
}

#[derive(Args, Debug)]
struct WdArgs {
    #[arg(long)]
    n: u32,
    #[command(flatten)]
    sel: Selection,
    #[arg(long, default_value = "one")]
    coset: Coset,
    /// Keep only the first P nonzero components.
    #[arg(long, value_name = "P")]
    truncate: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
#[group(id = "noise", required = true, multiple = false)]
struct Noise {
    /// Noise variance.
    #[arg(long)]
    sigma2: Option<f64>,
    /// SNR in dB (-10 log10 sigma2), a single value or an integer-step range a..b.
    #[arg(long, value_parser = parse_snr, allow_hyphen_values = true)]
    snr_db: Option<SnrSpec>,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long)]
    n: u32,
    #[command(flatten)]
    noise: Noise,
    #[command(flatten)]
    sel: Selection,
    #[arg(long, value_name = "P")]
    truncate: Option<usize>,
    /// Also emit every per-weight term.
    #[arg(long)]
    terms: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct PairArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    i: u64,
    #[arg(long)]
    j: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct MindistArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Also enumerate the coset and compare.
    #[arg(long)]
    brute: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    n: u32,
    #[command(flatten)]
    noise: Noise,
    #[arg(long)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated row indices; all of them when omitted.
    #[arg(long, value_delimiter = ',')]
    indices: Option<Vec<u64>>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, default_value_t = 4)]
    max_n: u32,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Debug, PartialEq)]
enum SnrSpec {
    Single(f64),
    Range(i64, i64),
}

impl SnrSpec {
    fn points(&self) -> Vec<f64> {
        match *self {
            SnrSpec::Single(x) => vec![x],
            SnrSpec::Range(a, b) => (a..=b).map(|x| x as f64).collect(),
        }
    }
}

fn parse_snr(s: &str) -> Result<SnrSpec, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: i64 = a
            .trim()
            .parse()
            .map_err(|_| format!("range bound {a:?} is not an integer"))?;
        let b: i64 = b
            .trim()
            .parse()
            .map_err(|_| format!("range bound {b:?} is not an integer"))?;
        if a > b {
            return Err(format!("empty SNR range {a}..{b}"));
        }
        return Ok(SnrSpec::Range(a, b));
    }
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .map(SnrSpec::Single)
        .ok_or_else(|| format!("{s:?} is neither a number nor a range a..b"))
}

enum Failure {
    Usage(String),
    Lib(Error),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

struct Emit {
    record: OutputRecord,
    format: Format,
    ok: bool,
}

fn params(kv: &[(&str, String)]) -> BTreeMap<String, String> {
    kv.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(T::to_string).unwrap_or_default()
}

fn selection_text(sel: &Selection) -> String {
    sel.i.map(|i| i.to_string()).unwrap_or_else(|| "all".into())
}

fn spectra(n: u32, sel: &Selection, truncate: Option<usize>, coset: Coset) -> Result<Vec<Spectrum>, Error> {
    let cfg = SpectrumConfig::default();
    let depth = truncate.map_or(Depth::Full, Depth::First);
    match sel.i {
        None => cfg.all(n, depth, coset),
        Some(i) => Ok(vec![match depth {
            Depth::Full => Spectrum::Full(cfg.distribution(n, i, coset)?),
            Depth::First(p) => Spectrum::Truncated(cfg.truncated(n, i, p, coset)?),
        }]),
    }
}

fn channels(noise: &Noise) -> Result<Vec<(Option<f64>, ChannelModel)>, Error> {
    match (&noise.sigma2, &noise.snr_db) {
        (Some(s), _) => Ok(vec![(None, ChannelModel::new(*s)?)]),
        (None, Some(SnrSpec::Single(x))) => Ok(vec![(None, ChannelModel::from_snr_db(*x)?)]),
        (None, Some(spec)) => spec
            .points()
            .into_iter()
            .map(|x| Ok((Some(x), ChannelModel::from_snr_db(x)?)))
            .collect(),
        (None, None) => unreachable!("clap requires one noise flag"),
    }
}

fn noise_params(noise: &Noise) -> (&'static str, String) {
    match (&noise.sigma2, &noise.snr_db) {
        (Some(s), _) => ("sigma2", s.to_string()),
        (None, Some(SnrSpec::Single(x))) => ("snr_db", x.to_string()),
        (None, Some(SnrSpec::Range(a, b))) => ("snr_db", format!("{a}..{b}")),
        (None, None) => unreachable!("clap requires one noise flag"),
    }
}

fn run(command: &Command) -> Result<Emit, Failure> {
    match command {
        Command::Wd(a) => {
            let rows = spectra(a.n, &a.sel, a.truncate, a.coset)?;
            Ok(Emit {
                record: OutputRecord {
                    command: "wd".into(),
                    parameters: params(&[
                        ("n", a.n.to_string()),
                        ("i", selection_text(&a.sel)),
                        ("coset", a.coset.to_string()),
                        ("truncate", opt(&a.truncate)),
                    ]),
                    result: Payload::Spectra {
                        coset: a.coset,
                        rows: wd_rows(&rows),
                    },
                },
                format: a.common.format.unwrap_or(Format::Csv),
                ok: true,
            })
        }
        Command::Bound(a) => {
            let spectra = spectra(a.n, &a.sel, a.truncate, Coset::One)?;
            let mut rows = Vec::new();
            let mut terms = Vec::new();
            for (snr_db, ch) in channels(&a.noise)? {
                for s in &spectra {
                    let per_weight = union_bound_terms(s, &ch)?;
                    let i = polarwd::spectrum::SpectralTerms::row(s);
                    rows.push(BoundRow {
                        snr_db,
                        i,
                        p_ub: per_weight.iter().map(|t| t.1).sum(),
                    });
                    if a.terms {
                        terms.extend(per_weight.into_iter().map(|(w, term)| BoundTerm { snr_db, i, w, term }));
                    }
                }
            }
            let (noise_key, noise_value) = noise_params(&a.noise);
            Ok(Emit {
                record: OutputRecord {
                    command: "bound".into(),
                    parameters: params(&[
                        ("n", a.n.to_string()),
                        ("i", selection_text(&a.sel)),
                        (noise_key, noise_value),
                        ("truncate", opt(&a.truncate)),
                        ("terms", a.terms.to_string()),
                    ]),
                    result: Payload::Bounds { rows, terms },
                },
                format: a.common.format.unwrap_or(Format::Csv),
                ok: true,
            })
        }
        Command::Po(a) => {
            let certificate = is_degraded(a.n, a.i, a.j)?;
            let reverse = certificate.is_none() && is_degraded(a.n, a.j, a.i)?.is_some();
            let dichotomy = if a.i < a.j {
                Some(spectral_dichotomy(a.n, a.i, a.j)?.case)
            } else {
                None
            };
            Ok(Emit {
                record: OutputRecord {
                    command: "po".into(),
                    parameters: pair_params(a),
                    result: Payload::Order(OrderReport {
                        n: a.n,
                        i: a.i,
                        j: a.j,
                        certificate,
                        reverse,
                        dichotomy,
                    }),
                },
                format: a.common.format.unwrap_or(Format::Text),
                ok: true,
            })
        }
        Command::Mindist(a) => {
            let p = &a.pair;
            let d = pair_min_distance(p.n, p.i, p.j)?;
            let brute = if a.brute {
                Some(brute_min_distance_pair(p.n, p.i.min(p.j), p.i.max(p.j))?)
            } else {
                None
            };
            let matches = brute.map(|b| b == d.distance);
            let mut parameters = pair_params(p);
            parameters.insert("brute".into(), a.brute.to_string());
            Ok(Emit {
                record: OutputRecord {
                    command: "mindist".into(),
                    parameters,
                    result: Payload::Distance(DistanceReport {
                        n: p.n,
                        i: p.i,
                        j: p.j,
                        formula: d.distance,
                        degenerate: d.degenerate,
                        brute,
                        matches,
                    }),
                },
                format: p.common.format.unwrap_or(Format::Text),
                ok: matches != Some(false),
            })
        }
        Command::Simulate(a) => {
            let ch = match channels(&a.noise)?.as_slice() {
                [(_, ch)] => *ch,
                _ => return Err(Failure::Usage("simulate takes a single SNR value, not a range".into())),
            };
            if a.n > polarwd::bitops::MAX_EXPONENT {
                return Err(Failure::Lib(Error::InvalidArgument(format!(
                    "n = {} is too large",
                    a.n
                ))));
            }
            let indices = a.indices.clone().unwrap_or_else(|| (0..1u64 << a.n).collect());
            let rows = estimate_pe(a.n, &ch, &indices, a.trials, a.seed)?;
            let (noise_key, noise_value) = noise_params(&a.noise);
            Ok(Emit {
                record: OutputRecord {
                    command: "simulate".into(),
                    parameters: params(&[
                        ("n", a.n.to_string()),
                        (noise_key, noise_value),
                        ("trials", a.trials.to_string()),
                        ("seed", a.seed.to_string()),
                        (
                            "indices",
                            a.indices.as_ref().map_or("all".into(), |v| {
                                v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
                            }),
                        ),
                    ]),
                    result: Payload::Estimates { rows },
                },
                format: a.common.format.unwrap_or(Format::Csv),
                ok: true,
            })
        }
        Command::Check(a) => {
            let report = CheckConfig::new(a.max_n).run()?;
            let ok = report.passed();
            Ok(Emit {
                record: OutputRecord {
                    command: "check".into(),
                    parameters: params(&[("max_n", a.max_n.to_string())]),
                    result: Payload::Check(report),
                },
                format: a.common.format.unwrap_or(Format::Text),
                ok,
            })
        }
    }
}

fn pair_params(a: &PairArgs) -> BTreeMap<String, String> {
    params(&[("n", a.n.to_string()), ("i", a.i.to_string()), ("j", a.j.to_string())])
}

fn common(command: &Command) -> &Common {
    match command {
        Command::Wd(a) => &a.common,
        Command::Bound(a) => &a.common,
        Command::Po(a) => &a.common,
        Command::Mindist(a) => &a.pair.common,
        Command::Simulate(a) => &a.common,
        Command::Check(a) => &a.common,
    }
}

fn render(emit: &Emit) -> Result<String, Failure> {
    match emit.format {
        Format::Json => Ok(emit.record.to_json()),
        Format::Text => Ok(emit.record.to_text()),
        Format::Csv => emit
            .record
            .to_csv()
            .ok_or_else(|| Failure::Usage(format!("{} has no csv form; use text or json", emit.record.command))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = run(&cli.command).and_then(|emit| {
        let text = render(&emit)?;
        match &common(&cli.command).out {
            Some(path) => std::fs::write(path, &text)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
            None => {
                let mut stdout = std::io::stdout().lock();
                let _ = stdout.write_all(text.as_bytes());
                let _ = stdout.flush();
            }
        }
        if emit.ok {
            Ok(())
        } else {
            Err(Failure::Mismatch(format!(
                "{}: cross-check mismatch",
                emit.record.command
            )))
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) | Err(Failure::Lib(Error::InvalidArgument(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e @ Error::ResourceCap { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CAP)
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_MISMATCH)
        }
    }
}
