//! Command-line front end: `fit`, `bench` and `simulate`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use splitwise::bench::{
    aggregate, emit_report, failure_counts, parse_methods, run_suite, DataSource, ReportFormat, SuiteOptions,
};
use splitwise::data::{generate_synthetic, load_csv, parse_formula, write_csv, NaPolicy, GENERATOR_NAME};
use splitwise::search::fit_model;
use splitwise::{Criterion, Direction, Error, Mode, SearchConfig, SynthConfig, TreeParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "splitwise", version, about = "Stepwise regression with tree-derived threshold dummies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model to a CSV file and print its summary.
    Fit(FitArgs),
    /// Compare selection methods over synthetic replications or a dataset.
    Bench(BenchArgs),
    /// Write a synthetic dataset and its ground truth.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Iterative,
    Univariate,
    Classical,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Backward,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CriterionArg {
    Aic,
    Bic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Iterative => Mode::Iterative,
            ModeArg::Univariate => Mode::Univariate,
            ModeArg::Classical => Mode::Classical,
        }
    }
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Backward => Direction::Backward,
            DirectionArg::Both => Direction::Both,
        }
    }
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Aic => Criterion::Aic,
            CriterionArg::Bic => Criterion::Bic,
        }
    }
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with a header row; every column must be numeric.
    #[arg(long)]
    pub data: PathBuf,
    /// Model formula, e.g. "mpg ~ ." or "y ~ a + b" or "y ~ . - c".
    #[arg(long)]
    pub formula: String,
    /// Search mode: threshold dummies re-derived each step, fixed from a first pass, or linear only.
    #[arg(long, value_enum, default_value = "iterative")]
    pub mode: ModeArg,
    /// Which moves the search may make.
    #[arg(long, value_enum, default_value = "backward")]
    pub direction: DirectionArg,
    /// Information criterion to minimize.
    #[arg(long, value_enum, default_value = "aic")]
    pub criterion: CriterionArg,
    /// Minimum relative SSE gain for a tree split.
    #[arg(long, default_value_t = 0.01)]
    pub cp: f64,
    /// Minimum node size for attempting a split.
    #[arg(long, default_value_t = 20)]
    pub minsplit: usize,
    /// Minimum observations in each child.
    #[arg(long, default_value_t = 7)]
    pub minbucket: usize,
    /// Tree depth: 1 gives single cuts only, 2 also allows two cuts.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub max_depth: u8,
    /// Also write the fitted model as JSON to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Synthetic design with the given predictor count, e.g. "p=15".
    #[arg(long, conflicts_with = "data", value_parser = parse_synthetic)]
    pub synthetic: Option<usize>,
    /// Benchmark on a fixed CSV dataset instead.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Formula for --data.
    #[arg(long, requires = "data")]
    pub formula: Option<String>,
    /// Rows per synthetic dataset.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Use step-function signals in the synthetic design.
    #[arg(long)]
    pub threshold_effects: bool,
    /// Replications; seeds run from --seed upwards.
    #[arg(long, default_value_t = 20)]
    pub reps: u64,
    /// First seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Comma-separated method identifiers, or "all".
    #[arg(long, default_value = "all")]
    pub methods: String,
    /// Information criterion to minimize.
    #[arg(long, value_enum, default_value = "aic")]
    pub criterion: CriterionArg,
    /// Hold out this fraction of rows for RMSE/MAE.
    #[arg(long)]
    pub holdout: Option<f64>,
    /// Report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Record mean wall time in the report, which makes it non-reproducible.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of predictors.
    #[arg(long, default_value_t = 15)]
    pub p: usize,
    /// Number of rows.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Step-function signals instead of linear ones.
    #[arg(long)]
    pub threshold_effects: bool,
    /// CSV path; the ground truth goes to "<out>.truth.json".
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_synthetic(s: &str) -> Result<usize, String> {
    let value = s.strip_prefix("p=").unwrap_or(s);
    match value.parse::<usize>() {
        Ok(p) if p > 0 => Ok(p),
        _ => Err(format!("expected p=<count>, got {s:?}")),
    }
}

/// Failure of a subcommand, split by exit code.
#[derive(Debug)]
pub enum Failure {
    User(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_user_error() {
            Failure::User(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn write_out(out: &mut dyn Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Internal(format!("cannot write output: {e}")))
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| {
        Failure::from(Error::Write {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    })
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Internal(format!("JSON encoding failed: {e}")))
}

pub fn cmd_fit(args: &FitArgs, out: &mut dyn Write) -> Outcome {
    let (dataset, _) = load_csv(&args.data, NaPolicy::RejectRow)?;
    let formula = parse_formula(&args.formula, &dataset)?;
    let mut config = SearchConfig::new(args.mode.into(), args.direction.into(), args.criterion.into());
    config.tree_params = TreeParams {
        max_depth: args.max_depth,
        cp: args.cp,
        minsplit: args.minsplit,
        minbucket: args.minbucket,
    };
    config.validate()?;
    let model = fit_model(&dataset, &formula, &config)?;
    write_out(out, &model.summary())?;
    if let Some(path) = &args.json {
        write_file(path, &to_json(&model)?)?;
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Outcome {
    let methods = parse_methods(&args.methods)?;
    if args.reps == 0 {
        return Err(Failure::User("--reps must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..args.reps).map(|i| args.seed.wrapping_add(i)).collect();
    let base = SuiteOptions {
        criterion: args.criterion.into(),
        holdout: args.holdout,
        seed: args.seed,
        threads: None,
    };
    let records = match (&args.data, args.synthetic) {
        (Some(path), _) => {
            let formula_text = args
                .formula
                .as_deref()
                .ok_or_else(|| Failure::User("--data needs --formula".into()))?;
            let (dataset, _) = load_csv(path, NaPolicy::RejectRow)?;
            let formula = parse_formula(formula_text, &dataset)?;
            let source = DataSource::Fixed { dataset, formula };
            let mut all = Vec::new();
            for &seed in &seeds {
                all.extend(run_suite(&methods, &source, &SuiteOptions { seed, ..base.clone() })?);
            }
            all
        }
        (None, Some(p)) => {
            let template = SynthConfig::with_defaults(args.n, p, args.threshold_effects, args.seed);
            run_suite(&methods, &DataSource::Synthetic { template, seeds }, &base)?
        }
        (None, None) => return Err(Failure::User("one of --synthetic or --data is required".into())),
    };

    let mut rows = aggregate(&records)?;
    let mut text = String::new();
    if args.synthetic.is_some() {
        text.push_str(&format!("generator: {GENERATOR_NAME}\n"));
    }
    for row in &rows {
        text.push_str(&format!(
            "{:<24} rmse {:.4}  aic {}  bic {}  adj.r2 {:.4}  vars {:.2}  stability {:.2}  time {:.3}s\n",
            row.method,
            row.rmse_mean,
            fmt_opt(row.aic_mean),
            fmt_opt(row.bic_mean),
            row.adj_r2_mean,
            row.vars_mean,
            row.stability,
            row.time_s.unwrap_or(f64::NAN),
        ));
    }
    for (method, count) in failure_counts(&records) {
        text.push_str(&format!("warning: {method} failed on {count} run(s)\n"));
    }
    write_out(out, &text)?;
    if let Some(path) = &args.out {
        if !args.timing {
            rows.iter_mut().for_each(|r| r.time_s = None);
        }
        emit_report(&rows, args.format.into(), path)?;
    }
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Outcome {
    let config = SynthConfig::with_defaults(args.n, args.p, args.threshold_effects, args.seed);
    let (dataset, truth) = generate_synthetic(&config)?;
    let file = fs::File::create(&args.out).map_err(|e| {
        Failure::from(Error::Write {
            path: args.out.clone(),
            message: e.to_string(),
        })
    })?;
    write_csv(&dataset, file)?;
    let mut truth_path = args.out.clone().into_os_string();
    truth_path.push(".truth.json");
    let truth_path = PathBuf::from(truth_path);
    write_file(&truth_path, &to_json(&truth)?)?;
    write_out(
        out,
        &format!(
            "wrote {} rows x {} predictors to {} (truth: {})\n",
            args.n,
            args.p,
            args.out.display(),
            truth_path.display()
        ),
    )
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USER } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::User(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USER
        }
        Err(Failure::Internal(msg)) => {
            let _ = writeln!(err, "internal error: {msg}");
            EXIT_INTERNAL
        }
    }
}
