use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::character::{average_profile, evaluate, CharacterSpec, McConfig};
use crate::diagram::{BratteliDiagram, Continuation, DEFAULT_WINDOW_SEARCH};
use crate::error::{Error, Result};
use crate::group::{ClopenSet, GroupElement};
use crate::irs::{
    compare_chi, empirical_f_measure, f_measure_reference, SampleConfig, DEFAULT_EXTRA_DEPTH,
};
use crate::measure::{approximate_ergodic_set, stationary_measure, InvariantMeasure, MultiIndex};
use crate::scalar::Arithmetic;
use crate::verify::{self, Check, VerifyConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "bratteli",
    version,
    about = "Finite-level experiments on Bratteli diagrams and their AF full groups"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vertex counts, path counts and simplicity/evenness windows per level.
    Info(InfoArgs),
    /// Invariant measures as per-level cylinder weights.
    Measures(MeasuresArgs),
    /// Evaluate a character on a group element.
    Char(CharArgs),
    /// Averages of fixed-point measures over pointwise stabilizers.
    Avg(AvgArgs),
    /// Sample the stabilizer distribution and estimate χ, χ′ and φ(𝓕(A)).
    SampleIrs(SampleIrsArgs),
    /// Run the built-in verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    /// JSON file or builtin:odometer<r>, builtin:polynomial, builtin:ones2.
    #[arg(long)]
    pub diagram: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Measure JSON file; repeat for labels 0, 1, ...
    #[arg(long = "measure")]
    pub measures: Vec<PathBuf>,
    #[arg(long, default_value = "rational")]
    pub mode: Arithmetic,
    /// Depth of the Dirac pushdown when measures are approximated.
    #[arg(long, default_value_t = 40)]
    pub ergodic_depth: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    #[command(flatten)]
    pub diagram: DiagramArgs,
    #[arg(long, default_value = "1..5")]
    pub levels: String,
    /// How many levels past n to search for a simple/even window.
    #[arg(long, default_value_t = DEFAULT_WINDOW_SEARCH)]
    pub window: usize,
}

#[derive(Debug, Args)]
pub struct MeasuresArgs {
    #[command(flatten)]
    pub diagram: DiagramArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
}

#[derive(Debug, Args)]
pub struct CharArgs {
    #[command(flatten)]
    pub diagram: DiagramArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Exponents `k1,k2,...`; omit with --regular.
    #[arg(long, required_unless_present = "regular")]
    pub alpha: Option<String>,
    #[arg(long, conflicts_with = "alpha")]
    pub regular: bool,
    /// Element file or inline text `level=n; v0:(0 1)`.
    #[arg(long)]
    pub element: String,
}

#[derive(Debug, Args)]
pub struct AvgArgs {
    #[command(flatten)]
    pub diagram: DiagramArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value = "1..6")]
    pub levels: String,
    /// Clopen set `A` (file or inline `level=n; v0:0,1`); default empty.
    #[arg(long)]
    pub set: Option<String>,
    /// Monte Carlo fallback when the exact sum is over its cap (needs --seed).
    #[arg(long, requires = "seed")]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct SampleIrsArgs {
    #[command(flatten)]
    pub diagram: DiagramArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub element: String,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Trace depth; defaults to the element's level plus 4.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Also estimate φ(𝓕(A)) for this clopen set.
    #[arg(long)]
    pub set: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(default_value = "all")]
    pub which: Check,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub workers: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Text produced by a command and whether its checks passed.
pub struct Report {
    pub text: String,
    pub passed: bool,
}

pub fn load_diagram(source: &str) -> Result<BratteliDiagram> {
    let Some(name) = source.strip_prefix("builtin:") else {
        return BratteliDiagram::from_file(source);
    };
    match name {
        "polynomial" | "polynomial-example" => Ok(BratteliDiagram::polynomial_example()),
        "ones2" => BratteliDiagram::stationary(vec![1, 1], vec![vec![1, 1], vec![1, 1]]),
        _ => name
            .strip_prefix("odometer")
            .and_then(|r| r.parse::<u64>().ok())
            .filter(|&r| r >= 1)
            .map(BratteliDiagram::odometer)
            .ok_or_else(|| Error::Parse(format!("unknown builtin diagram {name:?}"))),
    }
}

/// Inline text if it contains `level=`, otherwise a file holding it.
fn read_inline_or_file(source: &str) -> Result<String> {
    if source.trim_start().starts_with("level") {
        Ok(source.to_string())
    } else {
        Ok(std::fs::read_to_string(source)?.trim().to_string())
    }
}

pub fn parse_levels(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("bad level range {text:?} (expected a..b or n)"));
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (
            a.trim().parse::<usize>().map_err(|_| bad())?,
            b.trim_start_matches('=')
                .trim()
                .parse::<usize>()
                .map_err(|_| bad())?,
        ),
        None => {
            let n = text.trim().parse::<usize>().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo == 0 || hi < lo {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

/// User-supplied measures, or computed ones to depth `depth`.
fn load_measures(
    d: &BratteliDiagram,
    args: &MeasureArgs,
    depth: usize,
) -> Result<(Vec<InvariantMeasure>, Vec<String>)> {
    if !args.measures.is_empty() {
        let ms = args
            .measures
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let m = InvariantMeasure::from_file(d, p)?.with_label(i);
                m.check_depth(depth)?;
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok((ms, Vec::new()));
    }
    if d.continuation() == Continuation::Stationary {
        return Ok((vec![stationary_measure(d, depth, args.mode)?], Vec::new()));
    }
    if args.ergodic_depth <= depth {
        return Err(Error::InvalidArgument(format!(
            "--ergodic-depth {} must exceed the required depth {depth}",
            args.ergodic_depth
        )));
    }
    let set = approximate_ergodic_set(d, args.ergodic_depth, args.eps, depth)?;
    let g = &set.diagnostics;
    let notes = vec![format!(
        "# ergodic approximation: depth={}, clusters={}, candidates={}, max_intra_spread={:e}, inter_depth_spread={:e}, stable={}",
        g.depth, g.clusters, g.candidates, g.max_intra_spread, g.inter_depth_spread, g.stable
    )];
    Ok((set.measures, notes))
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.write_record(r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

fn trailer(seed: Option<u64>, workers: Option<usize>) -> String {
    let show = |x: Option<String>| x.unwrap_or_else(|| "none".into());
    format!(
        "# seed={}, workers={}, tool-version={TOOL_VERSION}\n",
        show(seed.map(|s| s.to_string())),
        show(workers.map(|w| w.to_string()))
    )
}

pub fn run(cli: Cli) -> Result<(Report, Option<PathBuf>)> {
    match cli.command {
        Command::Info(a) => Ok((info(&a)?, a.diagram.out)),
        Command::Measures(a) => Ok((measures(&a)?, a.diagram.out)),
        Command::Char(a) => Ok((character(&a)?, a.diagram.out)),
        Command::Avg(a) => Ok((avg(&a)?, a.diagram.out)),
        Command::SampleIrs(a) => Ok((sample_irs(&a)?, a.diagram.out)),
        Command::Verify(a) => Ok((verify_cmd(&a)?, a.out)),
    }
}

fn info(a: &InfoArgs) -> Result<Report> {
    let d = load_diagram(&a.diagram.diagram)?;
    let mut rows = Vec::new();
    for n in parse_levels(&a.levels)? {
        let counts: Vec<String> = d.path_counts(n)?.iter().map(|h| h.to_string()).collect();
        rows.push(vec![
            n.to_string(),
            d.vertex_count(n)?.to_string(),
            counts.join(" "),
            d.is_simple_up_to(n, n + a.window)?.to_string(),
            d.is_even_up_to(n, n + a.window)?.to_string(),
        ]);
    }
    let mut text = csv_text(
        &[
            "level",
            "vertices",
            "path_counts",
            "simple_window",
            "even_window",
        ],
        &rows,
    )?;
    text += &trailer(None, None);
    Ok(Report { text, passed: true })
}

fn measures(a: &MeasuresArgs) -> Result<Report> {
    let d = load_diagram(&a.diagram.diagram)?;
    let (ms, notes) = load_measures(&d, &a.measure, a.depth)?;
    let mut rows = Vec::new();
    for (i, m) in ms.iter().enumerate() {
        for n in 1..=a.depth {
            for (v, q) in m.level(n)?.iter().enumerate() {
                rows.push(vec![
                    m.label().unwrap_or(i).to_string(),
                    n.to_string(),
                    v.to_string(),
                    q.to_string(),
                ]);
            }
        }
    }
    let mut text = csv_text(&["measure", "level", "vertex", "weight"], &rows)?;
    for note in notes {
        text += &note;
        text.push('\n');
    }
    text += &trailer(None, None);
    Ok(Report { text, passed: true })
}

fn character(a: &CharArgs) -> Result<Report> {
    let d = load_diagram(&a.diagram.diagram)?;
    let g = GroupElement::parse(&d, &read_inline_or_file(&a.element)?)?;
    let spec = match &a.alpha {
        Some(alpha) => CharacterSpec::Alpha(alpha.parse::<MultiIndex>()?),
        None => CharacterSpec::Regular,
    };
    let (ms, notes) = match &spec {
        CharacterSpec::Alpha(alpha) if alpha.total() > 0 => {
            load_measures(&d, &a.measure, g.level())?
        }
        _ => (Vec::new(), Vec::new()),
    };
    let value = evaluate(&spec, &g, &ms)?;
    let rows = vec![vec![
        spec.name(),
        g.to_string(),
        value.to_string(),
        value.to_f64().to_string(),
    ]];
    let mut text = csv_text(&["character", "element", "value", "value_f64"], &rows)?;
    for note in notes {
        let _ = writeln!(text, "{note}");
    }
    text += &trailer(None, None);
    Ok(Report { text, passed: true })
}

fn avg(a: &AvgArgs) -> Result<Report> {
    let d = load_diagram(&a.diagram.diagram)?;
    let alpha: MultiIndex = a.alpha.parse()?;
    let levels = parse_levels(&a.levels)?;
    let set = match &a.set {
        Some(s) => ClopenSet::parse(&d, &read_inline_or_file(s)?)?,
        None => ClopenSet::empty(&d, 1)?,
    };
    let depth = *levels.last().expect("nonempty range");
    if depth < set.level() {
        return Err(Error::InvalidArgument(format!(
            "levels must reach the level of A ({})",
            set.level()
        )));
    }
    let (ms, notes) = load_measures(&d, &a.measure, depth)?;
    let mc = match (a.samples, a.seed) {
        (Some(samples), Some(seed)) => Some(McConfig {
            samples,
            seed,
            workers: a.workers,
        }),
        _ => None,
    };
    let profile = average_profile(&d, &set, &alpha, &ms, &levels, mc)?;
    let rows: Vec<Vec<String>> = profile
        .rows
        .iter()
        .map(|r| {
            vec![
                r.level.to_string(),
                r.subgroup_order.to_string(),
                r.method.as_str().to_string(),
                r.value.to_string(),
                r.std_err.map(|s| s.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    let mut text = csv_text(
        &["level", "subgroup_order", "exact_or_mc", "value", "std_err"],
        &rows,
    )?;
    let _ = writeln!(
        text,
        "# floor={}, monotone={}, above_floor={}",
        profile.floor, profile.monotone, profile.above_floor
    );
    for note in notes {
        let _ = writeln!(text, "{note}");
    }
    text += &trailer(mc.map(|m| m.seed), mc.map(|m| m.workers));
    Ok(Report {
        text,
        passed: profile.passes(),
    })
}

fn sample_irs(a: &SampleIrsArgs) -> Result<Report> {
    let d = load_diagram(&a.diagram.diagram)?;
    let alpha: MultiIndex = a.alpha.parse()?;
    let g = GroupElement::parse(&d, &read_inline_or_file(&a.element)?)?;
    let set = a
        .set
        .as_deref()
        .map(|s| read_inline_or_file(s).and_then(|t| ClopenSet::parse(&d, &t)))
        .transpose()?;
    let depth = a
        .depth
        .unwrap_or(g.level() + DEFAULT_EXTRA_DEPTH)
        .max(set.as_ref().map_or(0, ClopenSet::level));
    let (ms, notes) = load_measures(&d, &a.measure, depth)?;
    let config = SampleConfig {
        samples: a.samples,
        depth,
        seed: a.seed,
        workers: a.workers,
    };
    let exact = evaluate(&CharacterSpec::Alpha(alpha.clone()), &g, &ms)?.to_f64();
    let c = compare_chi(&d, &alpha, &ms, &g, config)?;
    let mut rows = vec![
        vec![
            "chi".to_string(),
            c.chi.mean.to_string(),
            c.chi.std_err.to_string(),
            exact.to_string(),
            c.collision_rate.to_string(),
        ],
        vec![
            "chi_prime".to_string(),
            c.chi_prime.mean.to_string(),
            c.chi_prime.std_err.to_string(),
            exact.to_string(),
            c.collision_rate.to_string(),
        ],
    ];
    if let Some(set) = &set {
        let f = empirical_f_measure(&d, &alpha, &ms, set, config)?;
        rows.push(vec![
            "f_measure".to_string(),
            f.mean.to_string(),
            f.std_err.to_string(),
            f_measure_reference(&alpha, &ms, set)?.to_string(),
            String::new(),
        ]);
    }
    let mut text = csv_text(
        &[
            "quantity",
            "estimate",
            "std_err",
            "exact_reference",
            "collision_rate",
        ],
        &rows,
    )?;
    let _ = writeln!(
        text,
        "# element={g}, depth={depth}, samples={}, trace equality by label multiset",
        a.samples
    );
    for note in notes {
        let _ = writeln!(text, "{note}");
    }
    text += &trailer(Some(a.seed), Some(a.workers));
    Ok(Report { text, passed: true })
}

fn verify_cmd(a: &VerifyArgs) -> Result<Report> {
    let config = VerifyConfig {
        seed: a.seed,
        workers: a.workers,
        samples: a.samples,
    };
    let outcomes = verify::run(a.which, config)?;
    let rows: Vec<Vec<String>> = outcomes
        .iter()
        .map(|o| {
            vec![
                o.check.to_string(),
                o.case.clone(),
                if o.passed { "pass" } else { "fail" }.to_string(),
                o.detail.clone(),
            ]
        })
        .collect();
    let mut text = csv_text(&["check", "case", "status", "detail"], &rows)?;
    text += &trailer(Some(a.seed), Some(a.workers));
    Ok(Report {
        text,
        passed: outcomes.iter().all(|o| o.passed),
    })
}

/// Parses arguments, runs the command and returns the process exit code:
/// 0 success, 1 failed verification, 2 invalid input.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (report, out) = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let written = match out {
        Some(path) => std::fs::write(&path, &report.text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(report.text.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    if report.passed {
        0
    } else {
        eprintln!("verification failed");
        1
    }
}
