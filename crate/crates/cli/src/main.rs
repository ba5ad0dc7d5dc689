//! `bincorr` command-line front end.
//!
//! Every command renders its whole artifact in memory before anything is
//! written, so a failing run leaves no partial output behind.

mod figures;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bincorr::entropy::{entropy_report, epsilon_csv, epsilon_sweep, SweepAxis};
use bincorr::gf2::{build_recursive_toeplitz, check_circulant, toeplitz_nonsingular_fraction};
use bincorr::moments::{covariance_empirical, covariance_exact, covariance_histogram, Binning};
use bincorr::region::{
    characteristic_points, convergence_csv, convergence_to_limit, membership_against,
    region_constraints, region_json,
};
use bincorr::{BitVector, ModelSpec, ModelTemplate, SourceRealization, DEFAULT_ENUMERATION_CAP};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "bincorr",
    version,
    about = "Correlated binary source models: PMFs, moments, entropy, GF(2) checks"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Model spec JSON file.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Sample count for `sample` and `cov --empirical`.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Joint PMF over every outcome, or at one realization.
    Pmf {
        /// Realization as a bit string, source 1 first.
        #[arg(long)]
        at: Option<String>,
    },
    /// Draw realizations from the model.
    Sample,
    /// Covariance matrix, exact or estimated from samples.
    Cov {
        #[arg(long)]
        empirical: bool,
    },
    /// Histogram of covariance entries.
    CovHist {
        /// Fixed-width bins; distinct values when omitted.
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Joint entropy, bounds, and rates.
    Entropy,
    /// Finite-size gap over a range of N or M.
    EpsilonSweep {
        /// Sources per chain, e.g. `2..20` or `4,8,16`.
        #[arg(long, conflicts_with = "m")]
        n: Option<String>,
        /// Chains (mixed models only).
        #[arg(long)]
        m: Option<String>,
    },
    /// Achievable-region constraints and characteristic points.
    Region {
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
        /// Comma-separated capacities to test for membership.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        /// Report convergence of the characteristic points over this N range.
        #[arg(long)]
        convergence: Option<String>,
    },
    /// GF(2) matrix checks.
    Gf2Check {
        /// Circulant of size N with d ones per row.
        #[arg(long, num_args = 2, value_names = ["N", "D"])]
        circulant: Option<Vec<usize>>,
        /// Recursive Toeplitz matrix of this size; taps from `--taps`.
        #[arg(long, value_name = "N")]
        recursive: Option<usize>,
        #[arg(long, default_value = "1")]
        taps: String,
        /// Non-singular fraction of random Toeplitz matrices of this size.
        #[arg(long, value_name = "N")]
        toeplitz: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
    /// Write the figure data set as CSV files.
    Figures {
        #[arg(long, default_value = "figures")]
        out: PathBuf,
    },
}

enum Failure {
    Lib(bincorr::Error),
    Io(String),
    Usage(String),
}

impl From<bincorr::Error> for Failure {
    fn from(e: bincorr::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(bincorr::Error::EnumerationCap { .. }) => 3,
            Failure::Io(_) => 4,
            _ => 2,
        }
    }

    fn line(&self) -> String {
        let (kind, msg) = match self {
            Failure::Lib(e @ bincorr::Error::EnumerationCap { .. }) => {
                ("cap-exceeded", e.to_string())
            }
            Failure::Lib(e) => ("invalid-spec", e.to_string()),
            Failure::Io(m) => ("io", m.clone()),
            Failure::Usage(m) => ("usage", m.clone()),
        };
        format!("error: {kind}: {}", msg.replace('\n', " "))
    }
}

type Outcome<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Outcome<()> {
    let g = &cli.global;
    if let Command::Figures { out } = &cli.command {
        let files = figures::render()?;
        return figures::write(out, &files);
    }
    let text = match &cli.command {
        Command::Gf2Check {
            circulant,
            recursive,
            taps,
            toeplitz,
            trials,
        } => gf2_check(
            g,
            circulant.as_deref(),
            *recursive,
            taps,
            *toeplitz,
            *trials,
        )?,
        command => {
            let spec = load_model(g.model.as_deref())?;
            model_command(g, command, &spec)?
        }
    };
    emit(g.output.as_deref(), &text)
}

fn load_model(path: Option<&Path>) -> Outcome<ModelSpec> {
    let path = path.ok_or_else(|| Failure::Usage("this command needs --model <file>".into()))?;
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(ModelSpec::from_json(&text)?)
}

fn emit(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

/// `a..b` (inclusive), a comma list, or a single value.
fn parse_range(text: &str) -> Outcome<Vec<usize>> {
    let bad = || Failure::Usage(format!("cannot parse range {text:?}; use a..b or a,b,c"));
    let values: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b
            .trim_start_matches('=')
            .trim()
            .parse()
            .map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        text.split(',')
            .map(|v| v.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

fn bits(text: &str) -> Outcome<Vec<bool>> {
    let v: BitVector = text.parse()?;
    Ok(v.iter().collect())
}

fn model_command(g: &Global, command: &Command, spec: &ModelSpec) -> Outcome<String> {
    let json = g.format == Format::Json;
    let t = spec.total();
    Ok(match command {
        Command::Pmf { at: Some(x) } => {
            let x: SourceRealization = x.parse()?;
            let p = spec.pmf(&x)?;
            if json {
                pretty(&json!({ "x": x.to_string(), "p": p }))
            } else {
                format!("x,p\n{x},{p}\n")
            }
        }
        Command::Pmf { at: None } => {
            let table = spec.pmf_table(DEFAULT_ENUMERATION_CAP)?;
            let label = |w: usize| {
                BitVector::from_word(t, w as u64)
                    .expect("t <= cap")
                    .to_string()
            };
            if json {
                let rows: Vec<_> = table
                    .iter()
                    .enumerate()
                    .map(|(w, p)| json!({ "x": label(w), "p": p }))
                    .collect();
                pretty(&json!(rows))
            } else {
                let mut out = String::from("x,p\n");
                for (w, p) in table.iter().enumerate() {
                    let _ = writeln!(out, "{},{p}", label(w));
                }
                out
            }
        }
        Command::Sample => {
            let count = g.samples.unwrap_or(10);
            if count == 0 {
                return Err(Failure::Usage("--samples must be at least 1".into()));
            }
            let xs = spec.sample(g.seed, count);
            if json {
                pretty(&json!(xs.iter().map(|x| x.to_string()).collect::<Vec<_>>()))
            } else {
                let mut out = String::from("x\n");
                for x in xs {
                    let _ = writeln!(out, "{x}");
                }
                out
            }
        }
        Command::Cov { empirical } => {
            let c = if *empirical {
                covariance_empirical(spec, g.samples.unwrap_or(100_000), g.seed)?
            } else {
                covariance_exact(spec)?
            };
            if json {
                let rows: Vec<&[f64]> = (0..c.dim()).map(|i| c.row(i)).collect();
                pretty(&json!(rows))
            } else {
                c.to_csv()
            }
        }
        Command::CovHist { bins } => {
            let binning = bins.map_or(Binning::Distinct, Binning::Fixed);
            let h = covariance_histogram(&covariance_exact(spec)?, binning)?;
            if json {
                let bins: Vec<_> = h
                    .bins
                    .iter()
                    .map(|b| json!({ "value": b.value, "lower": b.lower, "upper": b.upper, "count": b.count }))
                    .collect();
                pretty(&json!(bins))
            } else {
                h.to_csv()
            }
        }
        Command::Entropy => {
            let r = entropy_report(spec)?;
            let doc = json!({
                "exact": r.exact,
                "closed_form": r.closed_form,
                "lower_bound": r.lower_bound,
                "upper_bound": r.upper_bound,
                "rate": r.rate,
                "asymptotic_rate": r.asymptotic_rate,
                "finite_horizon": r.finite_horizon,
                "epsilon": r.epsilon,
            });
            if json {
                pretty(&doc)
            } else {
                let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                format!(
                    "exact,closed_form,lower_bound,upper_bound,rate,asymptotic_rate,finite_horizon,epsilon\n{},{},{},{},{},{},{},{}\n",
                    opt(r.exact),
                    opt(r.closed_form),
                    r.lower_bound,
                    r.upper_bound,
                    opt(r.rate),
                    r.asymptotic_rate,
                    r.finite_horizon,
                    opt(r.epsilon)
                )
            }
        }
        Command::EpsilonSweep { n, m } => {
            let axis = match (n, m) {
                (Some(n), None) => SweepAxis::N(parse_range(n)?),
                (None, Some(m)) => SweepAxis::M(parse_range(m)?),
                _ => return Err(Failure::Usage("give exactly one of --n or --m".into())),
            };
            let rows = epsilon_sweep(&ModelTemplate::from_spec(spec)?, &axis)?;
            if json {
                let rows: Vec<_> = rows
                    .iter()
                    .map(|r| {
                        json!({
                            "model": r.model, "rho": r.rho, "N": r.n, "M": r.m,
                            "epsilon": r.epsilon, "epsilon_lb": r.epsilon_lb, "epsilon_ub": r.epsilon_ub,
                        })
                    })
                    .collect();
                pretty(&json!(rows))
            } else {
                epsilon_csv(&rows)
            }
        }
        Command::Region {
            rate,
            lambdas,
            convergence,
        } => {
            if let Some(range) = convergence {
                let rows = convergence_to_limit(
                    &ModelTemplate::from_spec(spec)?,
                    *rate,
                    &parse_range(range)?,
                )?;
                return Ok(if json {
                    pretty(&json!(rows))
                } else {
                    convergence_csv(&rows)
                });
            }
            let constraints = region_constraints(spec, *rate)?;
            let points = characteristic_points(spec, *rate)?;
            let member = match lambdas {
                Some(l) if l.len() != t => {
                    return Err(Failure::Usage(format!(
                        "--lambdas needs {t} values, got {}",
                        l.len()
                    )))
                }
                Some(l) => Some(membership_against(&constraints, l)),
                None => None,
            };
            if json {
                let mut doc = region_json(&constraints, &points);
                if let Some(mb) = &member {
                    doc["inside"] = json!(mb.inside);
                    doc["violated"] =
                        json!(mb.violated.iter().map(|s| s.labels()).collect::<Vec<_>>());
                }
                pretty(&doc)
            } else {
                let mut out = String::from("subset,bound");
                if member.is_some() {
                    out.push_str(",satisfied");
                }
                out.push('\n');
                for c in &constraints {
                    let labels: Vec<String> =
                        c.subset.labels().iter().map(|l| l.to_string()).collect();
                    let _ = write!(out, "{},{}", labels.join(" "), c.bound);
                    if let Some(mb) = &member {
                        let _ = write!(out, ",{}", !mb.violated.contains(&c.subset));
                    }
                    out.push('\n');
                }
                out
            }
        }
        Command::Gf2Check { .. } | Command::Figures { .. } => {
            unreachable!("handled before model loading")
        }
    })
}

fn gf2_check(
    g: &Global,
    circulant: Option<&[usize]>,
    recursive: Option<usize>,
    taps: &str,
    toeplitz: Option<usize>,
    trials: usize,
) -> Outcome<String> {
    let json = g.format == Format::Json;
    let chosen = [circulant.is_some(), recursive.is_some(), toeplitz.is_some()];
    if chosen.iter().filter(|&&c| c).count() != 1 {
        return Err(Failure::Usage(
            "give exactly one of --circulant, --recursive, --toeplitz".into(),
        ));
    }
    if let Some(&[n, d]) = circulant {
        let c = check_circulant(n, d)?;
        return Ok(if json {
            pretty(&json!({
                "n": c.n, "d": c.d, "predicted": c.predicted, "eliminated": c.eliminated,
                "consistent": c.consistent(), "verdict": c.verdict.to_string(),
            }))
        } else {
            format!("{}\n", c.verdict)
        });
    }
    if let Some(n) = recursive {
        let a = build_recursive_toeplitz(n, &bits(taps)?)?;
        let det = a.determinant()?;
        return Ok(if json {
            pretty(
                &json!({ "n": n, "taps": taps, "determinant": u8::from(det), "rows": a.to_row_strings() }),
            )
        } else {
            format!("determinant: {}\n", u8::from(det))
        });
    }
    let n = toeplitz.expect("one option is set");
    let frac = toeplitz_nonsingular_fraction(n, trials, g.seed)?;
    Ok(if json {
        pretty(&json!({ "n": n, "trials": trials, "seed": g.seed, "nonsingular_fraction": frac }))
    } else {
        format!("n,trials,nonsingular_fraction\n{n},{trials},{frac}\n")
    })
}
