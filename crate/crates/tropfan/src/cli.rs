use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use tropfan_core::activation::{
    enumerate_all_cones, lineality_dim, pattern_of, ActivationPattern, Dataset, Enumerator, LossFilter,
};
use tropfan_core::classification::{chamber_path, loss, report, Covector, Dichotomy};
use tropfan_core::dual::{decision_boundary, dual_edges, Window};
use tropfan_core::matroid::{om_axioms_check, pattern_axioms_check};
use tropfan_core::rational::parse_rational;
use tropfan_core::relu::{bound_m, net_to_tropical_capped, prune_with_certificates};
use tropfan_core::{Rational, Sign, Signomial};

use crate::formats::*;
use crate::parallel;
use crate::svg::render_svg;

#[derive(Debug, Parser)]
#[command(name = "tropfan", version, about = "Exact activation and classification fans of tropical rational classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Threads used by enumerations.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Limit on candidate checks per enumeration task (or on terms, for relu-convert).
    #[arg(long, global = true)]
    pub cap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Split {
    /// Numerator terms.
    #[arg(long)]
    pub n: usize,
    /// Denominator terms.
    #[arg(long)]
    pub m: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Value, sign and maximizing terms at every data point.
    Eval {
        /// Parameter file (signomial or tropical rational).
        #[arg(long)]
        theta: PathBuf,
        /// Dataset file.
        #[arg(long)]
        data: PathBuf,
    },
    /// Activation pattern of a parameter on a dataset.
    Pattern {
        /// Parameter file (signomial or tropical rational).
        #[arg(long)]
        theta: PathBuf,
        /// Dataset file.
        #[arg(long)]
        data: PathBuf,
    },
    /// Maximal cones of the activation fan with `--n` terms (all cones with `--all`).
    EnumFan {
        /// Dataset file.
        #[arg(long)]
        data: PathBuf,
        /// Number of terms.
        #[arg(long)]
        n: usize,
        /// Include lower-dimensional cones.
        #[arg(long)]
        all: bool,
    },
    /// Level sets of the classification fan; sizes of all levels when `--k` is absent.
    Levels {
        /// Dataset file.
        #[arg(long)]
        data: PathBuf,
        /// Target signs, e.g. `+,-,-,+`.
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[command(flatten)]
        split: Split,
        /// Comma-separated loss values.
        #[arg(long)]
        k: Option<String>,
    },
    /// Wall-connected components of the sublevel set `loss <= k`.
    Components {
        /// Dataset file.
        #[arg(long)]
        data: PathBuf,
        /// Target signs, e.g. `+,-,-,+`.
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[command(flatten)]
        split: Split,
        /// Loss bound.
        #[arg(long)]
        k: usize,
    },
    /// Dichotomies realized by the `(n, m)` classification fan.
    Dichotomies {
        /// Dataset file.
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        split: Split,
    },
    /// Decision-boundary edges of a parameter, optionally drawn as SVG.
    Boundary {
        /// Parameter file (signomial or tropical rational).
        #[arg(long)]
        theta: PathBuf,
        /// Points to draw; only used with `--svg`.
        #[arg(long, requires = "svg")]
        data: Option<PathBuf>,
        /// Point colors; needs `--data`.
        #[arg(long, allow_hyphen_values = true, requires = "data")]
        target: Option<String>,
        /// Write an SVG drawing here; needs `--window`.
        #[arg(long, requires = "window")]
        svg: Option<PathBuf>,
        /// `x0,x1,y0,y1`.
        #[arg(long, allow_hyphen_values = true, requires = "svg")]
        window: Option<String>,
    },
    /// Rewrites a ReLU network as a difference of tropical signomials.
    ReluConvert {
        /// Network file.
        #[arg(long)]
        net: PathBuf,
        /// Also drop terms that are nowhere the unique maximum.
        #[arg(long)]
        prune: bool,
    },
    /// Closure properties of the activation fan with `--n` terms.
    CheckAxioms {
        /// Dataset file.
        #[arg(long)]
        data: PathBuf,
        /// Number of terms.
        #[arg(long)]
        n: usize,
        /// Check only the maximal cones.
        #[arg(long)]
        maximal_only: bool,
    },
    /// Wall path of linear classifiers from `--start` to the target chamber.
    Path {
        /// Dataset file.
        #[arg(long)]
        data: PathBuf,
        /// Target signs, e.g. `+,-,-,+`.
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        /// Sign vector of the starting chamber.
        #[arg(long, allow_hyphen_values = true)]
        start: String,
    },
}

/// Failure with a machine-readable kind.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> CliError {
        CliError { kind, message: message.into() }
    }

    pub fn to_report(&self) -> ErrorReport {
        ErrorReport { error: ErrorBody { kind: self.kind.into(), message: self.message.clone() } }
    }
}

impl From<tropfan_core::Error> for CliError {
    fn from(e: tropfan_core::Error) -> CliError {
        use tropfan_core::Error as E;
        let kind = match e {
            E::DimensionMismatch { .. } => "dimension_mismatch",
            E::ShapeMismatch(_) => "shape_mismatch",
            E::Infeasible => "infeasible",
            E::CapExceeded { .. } => "cap_exceeded",
            E::Precondition(_) => "precondition",
            E::Parse(_) => "parse",
        };
        CliError::new(kind, e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Settings shared by the fan queries, checked once up front.
#[derive(Debug, Clone)]
pub struct JobConfig {
    pub data: Dataset,
    pub target: Option<Dichotomy>,
    pub n: usize,
    pub m: usize,
    pub cap: Option<usize>,
    pub workers: usize,
}

impl JobConfig {
    fn new(cli: &Cli, data: &Path, target: Option<&str>, n: usize, m: usize) -> CliResult<JobConfig> {
        if cli.cap == Some(0) {
            return Err(CliError::new("usage", "--cap must be positive"));
        }
        if cli.workers == 0 {
            return Err(CliError::new("usage", "--workers must be positive"));
        }
        let data = load_data(data)?;
        let target = target.map(Dichotomy::parse).transpose()?;
        if let Some(t) = &target {
            if t.len() != data.len() {
                return Err(CliError::new(
                    "shape_mismatch",
                    format!("target has {} signs but the dataset has {} points", t.len(), data.len()),
                ));
            }
        }
        Ok(JobConfig { data, target, n, m, cap: cli.cap, workers: cli.workers })
    }

    fn target(&self) -> &Dichotomy {
        self.target.as_ref().expect("target required")
    }

    fn split(&self) -> CliResult<Enumerator<'_>> {
        Ok(Enumerator::split(&self.data, self.n, self.m)?.with_cap(self.cap))
    }

    fn with_loss(&self, min: usize, max: usize) -> CliResult<Enumerator<'_>> {
        let filter = LossFilter { target: self.target().signs().to_vec(), numerator: self.n, min, max };
        Ok(self.split()?.with_loss(filter)?)
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::new("json", format!("{}: {e}", path.display())))
}

fn load_data(path: &Path) -> CliResult<Dataset> {
    Ok(read_json::<DataFile>(path)?.to_dataset()?)
}

fn load_theta(path: &Path) -> CliResult<ThetaFile> {
    read_json(path)
}

fn parse_window(text: &str) -> CliResult<Window> {
    let parts = text.split(',').map(parse_rational).collect::<tropfan_core::Result<Vec<_>>>()?;
    let [x0, x1, y0, y1]: [Rational; 4] =
        parts.try_into().map_err(|_| CliError::new("usage", "--window takes x0,x1,y0,y1"))?;
    Ok(Window::new(x0, x1, y0, y1)?)
}

fn parse_ks(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| CliError::new("usage", format!("bad loss value {s:?}"))))
        .collect()
}

fn progress(msg: &str) {
    eprintln!("tropfan: {msg}");
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))
}

/// Runs one command and returns the JSON document it produces.
pub fn execute(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Eval { theta, data } => {
            let data = load_data(data)?;
            let mut points = Vec::with_capacity(data.len());
            match load_theta(theta)? {
                ThetaFile::Rational(t) => {
                    let f = t.to_rational()?;
                    for p in data.points() {
                        let num = f.num.eval(p)?;
                        let den = f.den.eval(p)?;
                        let value = &num.value - &den.value;
                        points.push(EvalPoint {
                            sign: Sign::of(&value).to_string(),
                            value: Q(value),
                            num_argmax: one_based(&num.argmax),
                            den_argmax: one_based(&den.argmax),
                        });
                    }
                }
                ThetaFile::Signomial(s) => {
                    let s = s.to_signomial()?;
                    for p in data.points() {
                        let e = s.eval(p)?;
                        points.push(EvalPoint {
                            sign: Sign::of(&e.value).to_string(),
                            value: Q(e.value),
                            num_argmax: one_based(&e.argmax),
                            den_argmax: Vec::new(),
                        });
                    }
                }
            }
            Ok(to_json(&EvalReport { points }))
        }
        Command::Pattern { theta, data } => {
            let data = load_data(data)?;
            let sig: Signomial = match load_theta(theta)? {
                ThetaFile::Rational(t) => t.to_rational()?.merged(),
                ThetaFile::Signomial(s) => s.to_signomial()?,
            };
            Ok(to_json(&PatternJson::from_pattern(&pattern_of(&sig, &data)?)))
        }
        Command::EnumFan { data, n, all } => {
            let job = JobConfig::new(cli, data, None, *n, 0)?;
            let ambient_dim = n * (job.data.dim() + 1);
            progress(&format!("enumerating maximal cones with {n} terms on {} points", job.data.len()));
            let en = Enumerator::new(&job.data, *n)?.with_cap(job.cap);
            let maximal = parallel::maximal_patterns(&en, job.workers)?;
            let cones = if *all {
                progress("closing under intersection");
                enumerate_all_cones(&job.data, *n, job.cap)?
                    .iter()
                    .map(|c| ConeJson { neighbors: c.pattern.one_based(), dim: c.dimension() })
                    .collect()
            } else {
                maximal.iter().map(|p| ConeJson { neighbors: p.one_based(), dim: ambient_dim }).collect()
            };
            Ok(to_json(&FanReport {
                n_terms: *n,
                points: job.data.len(),
                ambient_dim,
                lineality: lineality_dim(&job.data, *n),
                maximal_count: maximal.len(),
                cones,
            }))
        }
        Command::Levels { data, target, split, k } => {
            let job = JobConfig::new(cli, data, Some(target), split.n, split.m)?;
            let mut out = LevelsReport {
                n: split.n,
                m: split.m,
                target: job.target().to_string(),
                sizes: None,
                levels: Vec::new(),
            };
            match k {
                None => {
                    progress("enumerating the full classification fan");
                    let en = job.split()?;
                    let mut sizes = vec![0usize; job.data.len() + 1];
                    for c in parallel::canonical_labelings(&en, job.workers)? {
                        let orbit = en.expand(&c);
                        sizes[loss(&orbit[0], job.target(), job.n, job.m)?] += orbit.len();
                    }
                    out.sizes = Some(sizes);
                }
                Some(ks) => {
                    for k in parse_ks(ks)? {
                        progress(&format!("level {k}"));
                        let patterns = parallel::maximal_patterns(&job.with_loss(k, k)?, job.workers)?;
                        let r = report(k, patterns, &job.data, job.n, job.m)?;
                        out.levels.push(LevelJson::from_report(&r));
                    }
                }
            }
            Ok(to_json(&out))
        }
        Command::Components { data, target, split, k } => {
            let job = JobConfig::new(cli, data, Some(target), split.n, split.m)?;
            progress(&format!("sublevel set with loss <= {k}"));
            let patterns = parallel::maximal_patterns(&job.with_loss(0, *k)?, job.workers)?;
            let r = report(*k, patterns, &job.data, job.n, job.m)?;
            Ok(to_json(&LevelJson::from_report(&r)))
        }
        Command::Dichotomies { data, split } => {
            let job = JobConfig::new(cli, data, None, split.n, split.m)?;
            let en = job.split()?;
            let mut set = std::collections::BTreeSet::new();
            for c in parallel::canonical_labelings(&en, job.workers)? {
                let signs = c.iter().map(|&l| if l < job.n { Sign::Positive } else { Sign::Negative }).collect();
                set.insert(Dichotomy::new(signs)?);
            }
            let list: Vec<Dichotomy> = set.into_iter().collect();
            Ok(to_json(&DichotomiesReport::new(job.n, job.m, &list)))
        }
        Command::Boundary { theta, data, target, svg, window } => {
            let out = match load_theta(theta)? {
                ThetaFile::Rational(t) => {
                    let f = t.to_rational()?;
                    if let Some(path) = svg {
                        let window = window
                            .as_deref()
                            .ok_or_else(|| CliError::new("usage", "--svg needs --window x0,x1,y0,y1"))?;
                        let window = parse_window(window)?;
                        let data = data.as_deref().map(load_data).transpose()?;
                        let target = target.as_deref().map(Dichotomy::parse).transpose()?;
                        write_file(path, &render_svg(&f, data.as_ref(), target.as_ref(), &window)?)?;
                    }
                    decision_boundary(&f)?
                }
                ThetaFile::Signomial(s) => {
                    if svg.is_some() {
                        return Err(CliError::new("usage", "drawing needs a parameter with \"num\" and \"den\""));
                    }
                    dual_edges(&s.to_signomial()?)?
                }
            };
            Ok(to_json(&EdgesReport { edges: out.iter().map(EdgeJson::from_edge).collect() }))
        }
        Command::ReluConvert { net, prune } => {
            let net = read_json::<NetworkJson>(net)?.to_network()?;
            let result = net_to_tropical_capped(&net, cli.cap)?;
            let dims = net.dims();
            let bound = bound_m(&dims[1..dims.len() - 1]).to_string();
            let mut out = ConversionReport::new(&result, bound);
            if *prune {
                let pruned = prune_with_certificates(&result.theta)?;
                out.pruned =
                    Some(PrunedJson { theta: ThetaJson::from_rational(&pruned.theta), removed: pruned.certificates.len() });
            }
            Ok(to_json(&out))
        }
        Command::CheckAxioms { data, n, maximal_only } => {
            let job = JobConfig::new(cli, data, None, *n, 0)?;
            progress(&format!("enumerating the fan with {n} terms"));
            let patterns: Vec<ActivationPattern> = if *maximal_only {
                parallel::maximal_patterns(&Enumerator::new(&job.data, *n)?.with_cap(job.cap), job.workers)?
            } else {
                enumerate_all_cones(&job.data, *n, job.cap)?.into_iter().map(|c| c.pattern).collect()
            };
            let report = pattern_axioms_check(&patterns, *maximal_only)?;
            let covector_axioms = if *n == 2 && !*maximal_only {
                let covectors = patterns.iter().map(Covector::from_pattern).collect::<tropfan_core::Result<Vec<_>>>()?;
                axioms_json(&om_axioms_check(&covectors))
            } else {
                Vec::new()
            };
            Ok(to_json(&AxiomsReport {
                n_terms: *n,
                patterns: patterns.len(),
                pattern_axioms: axioms_json(&report),
                covector_axioms,
            }))
        }
        Command::Path { data, target, start } => {
            let job = JobConfig::new(cli, data, Some(target), 1, 1)?;
            let start = Covector::parse(start)?;
            let path = chamber_path(&start, job.target(), &job.data)?;
            Ok(to_json(&PathReport { steps: path.len() - 1, path: path.iter().map(|c| c.to_string()).collect() }))
        }
    }
}

/// Parses arguments, runs, and writes results. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = CliError::new("usage", e.to_string().trim().to_string());
            eprintln!("{}", serde_json::to_string(&err.to_report()).expect("serializable"));
            return 2;
        }
    };
    let result = execute(&cli).and_then(|json| match &cli.out {
        Some(path) => write_file(path, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    });
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", serde_json::to_string(&err.to_report()).expect("serializable"));
            1
        }
    }
}
