//! The `melodic` command-line tool.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::biplot::{biplot_geometry, parse_dims, parse_window, render_svg, BiplotOptions};
use crate::data::{load_csv, parse_fit_config, read_columns, RunConfig};
use crate::document::{
    read_json, to_json, FitDocument, PredictionDocument, ScanDocument, PREDICTION_FORMAT, SCAN_FORMAT,
};
use crate::error::{MelodicError, Result};
use crate::model::{predict, Dataset};
use crate::selection::{dimension_scan, predictor_drop_scan, quality_of_representation, ModelSummary};
use crate::solver::fit;
use crate::validate::{run_validation, ValidateOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "melodic", version, about = "Multivariate logistic distance models")]
pub struct Cli {
    /// CSV file with predictors and responses.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// TOML configuration document.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output document; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for restarts and validation runs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Only report errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the model described by --config to --data.
    Fit,
    /// Compare models across dimensionalities or with predictors left out.
    Scan(ScanArgs),
    /// Export biplot geometry and an SVG drawing.
    Biplot(BiplotArgs),
    /// Probabilities and classes for new subjects.
    Predict(PredictArgs),
    /// Run the built-in numerical self-checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ScanArgs {
    /// Range of dimensionalities, e.g. 1..4.
    #[arg(long)]
    pub dims: Option<String>,
    /// Refit with each predictor left out in turn.
    #[arg(long)]
    pub drop_predictors: bool,
}

#[derive(Debug, Args)]
pub struct BiplotArgs {
    /// Fit document.
    #[arg(long)]
    pub model: PathBuf,
    /// Dimension pair, counted from 1.
    #[arg(long, default_value = "1,2")]
    pub dims: String,
    /// `auto` or x0,x1,y0,y1.
    #[arg(long, default_value = "auto")]
    pub window: String,
    /// SVG output path.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Draw decision lines regardless of the number of responses.
    #[arg(long)]
    pub decision_lines: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Fit document.
    #[arg(long)]
    pub model: PathBuf,
    /// CSV with the training predictor columns.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Majorizer curvature; changing it is a mutation test of the checks.
    #[arg(long, hide = true)]
    pub curvature: Option<f64>,
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| MelodicError::config(flag, "this command needs the flag"))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| MelodicError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| MelodicError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn load_run(cli: &Cli) -> Result<(RunConfig, Dataset)> {
    let mut cfg = parse_fit_config(required(&cli.config, "--config")?)?;
    let ds = load_csv(required(&cli.data, "--data")?, &cfg.ingest)?;
    cfg.align_to(&ds)?;
    cfg.fit.seed = cli.seed;
    Ok((cfg, ds))
}

fn cmd_fit(cli: &Cli) -> Result<i32> {
    let (cfg, ds) = load_run(cli)?;
    let result = fit(&ds, &cfg.fit)?;
    let m = cfg.fit.dimensions;
    let label = if cfg.fit.assignment.is_some() {
        format!("constrained M = {m}")
    } else {
        format!("M = {m}")
    };
    let summary = ModelSummary::from_fit(label, &ds, &cfg.fit, &result);
    let quality = quality_of_representation(&ds, &result)?.entries;
    let doc = FitDocument::new(&ds, &cfg.fit, &result, summary.clone(), quality);
    emit(cli.out.as_deref(), &to_json(&doc)?)?;
    if !cli.quiet {
        eprintln!(
            "deviance {:.4}  parameters {}  AIC {:.2}  BIC {:.2}  iterations {}",
            summary.deviance, summary.n_params, summary.aic, summary.bic, result.iterations
        );
        if result.quasi_separation {
            eprintln!("warning: possible quasi-separation (large discrimination parameters)");
        }
    }
    if !result.converged {
        eprintln!("warning: no convergence within {} iterations", cfg.fit.max_iter);
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}

fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let bad = || MelodicError::config("dims", "expected lo..hi");
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    Ok(lo..=hi)
}

fn cmd_scan(cli: &Cli, args: &ScanArgs) -> Result<i32> {
    let (cfg, ds) = load_run(cli)?;
    let (kind, table) = match &args.dims {
        Some(range) => ("dimensions", dimension_scan(&ds, parse_range(range)?, &cfg.fit)?),
        None => ("drop-predictors", predictor_drop_scan(&ds, &cfg.fit)?),
    };
    let doc = ScanDocument {
        format: SCAN_FORMAT.into(),
        kind: kind.into(),
        n: ds.n(),
        table,
    };
    emit(cli.out.as_deref(), &to_json(&doc)?)?;
    if !cli.quiet && cli.out.is_some() {
        print!("{}", doc.table.render());
    }
    let unconverged = doc.table.rows.iter().any(|r| r.converged != Some(true));
    Ok(if unconverged { EXIT_NOT_CONVERGED } else { EXIT_OK })
}

/// Read the model's predictor columns from `path` and map them onto model scale.
fn model_scale_predictors(doc: &FitDocument, path: &Path) -> Result<nalgebra::DMatrix<f64>> {
    let raw = read_columns(path, &doc.predictor_names)?;
    let meta = doc.meta();
    let mut x = raw.clone();
    for (i, row) in raw.row_iter().enumerate() {
        let values: Vec<f64> = row.iter().copied().collect();
        for (j, v) in meta.to_model_scale(&values)?.into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    Ok(x)
}

fn load_model(path: &Path) -> Result<FitDocument> {
    let doc: FitDocument = read_json(path)?;
    doc.validate()?;
    Ok(doc)
}

fn cmd_biplot(cli: &Cli, args: &BiplotArgs) -> Result<i32> {
    let doc = load_model(&args.model)?;
    let x = match &cli.data {
        Some(path) => model_scale_predictors(&doc, path)?,
        None => nalgebra::DMatrix::zeros(0, doc.predictor_names.len()),
    };
    let options = BiplotOptions {
        dims: parse_dims(&args.dims)?,
        window: parse_window(&args.window)?,
        decision_lines: args.decision_lines.then_some(true),
    };
    let geometry = biplot_geometry(&doc, &x, &options)?;
    emit(cli.out.as_deref(), &to_json(&geometry)?)?;
    if let Some(svg) = &args.svg {
        std::fs::write(svg, render_svg(&geometry)).map_err(|source| MelodicError::Io {
            path: svg.clone(),
            source,
        })?;
    }
    Ok(EXIT_OK)
}

fn cmd_predict(cli: &Cli, args: &PredictArgs) -> Result<i32> {
    let doc = load_model(&args.model)?;
    let params = doc.params()?;
    let meta = doc.meta();
    let raw = read_columns(&args.input, &doc.predictor_names)?;
    let rows = raw
        .row_iter()
        .map(|row| predict(&row.iter().copied().collect::<Vec<_>>(), &params, &meta))
        .collect::<Result<Vec<_>>>()?;
    let out = PredictionDocument {
        format: PREDICTION_FORMAT.into(),
        response_names: doc.response_names.clone(),
        rows,
    };
    emit(cli.out.as_deref(), &to_json(&out)?)?;
    Ok(EXIT_OK)
}

fn cmd_validate(cli: &Cli, args: &ValidateArgs) -> Result<i32> {
    let mut options = ValidateOptions {
        seed: cli.seed,
        ..Default::default()
    };
    if let Some(c) = args.curvature {
        options.curvature = c;
    }
    let report = run_validation(&options);
    let text = report.render();
    match &cli.out {
        Some(path) => emit(Some(path), &text)?,
        None if !cli.quiet => print!("{text}"),
        None => {}
    }
    if report.passed() {
        Ok(EXIT_OK)
    } else {
        eprintln!("validation failed: {}", report.failures().join(", "));
        Ok(EXIT_VALIDATION)
    }
}

pub fn run(cli: &Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Fit => cmd_fit(cli),
        Command::Scan(a) => cmd_scan(cli, a),
        Command::Biplot(a) => cmd_biplot(cli, a),
        Command::Predict(a) => cmd_predict(cli, a),
        Command::Validate(a) => cmd_validate(cli, a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            EXIT_INPUT
        }
    }
}

/// Parse the process arguments, set up logging and run.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.quiet { "error" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    run(&cli)
}
