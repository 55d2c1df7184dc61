use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use wavecast::ingest::{align, descriptive_stats, parse_jhu_cases, parse_ohlcv, PriceSeries, TimeSeriesFrame};
use wavecast::stationarity::{run as run_unit_root, Deterministic, Transform, UnitRootSpec};
use wavecast::swt::{coefficient_labels, decompose_column};
use wavecast::trainer::{
    build_features, compare_configurations, evaluate, forecast, grid_search, meyer, model_spec, Budget,
    GridSearchReport, HyperParams, HyperSpace, MetricScale, PipelineConfig, TrainedPipeline, Trainer,
};
use wavecast::Execution;

use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::{Cli, Command, CompareArgs, FrameArgs, GridArgs, IngestArgs, PipelineArgs, TrainArgs};

type CliResult<T = ()> = Result<T, CliError>;

/// `println!` that ignores a closed stdout (e.g. piping into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

const DEFAULT_OUT: &str = "wavecast-out";

/// Settings shared by every subcommand, after merging flags over the manifest.
pub struct Context {
    pub manifest: RunManifest,
    pub out: PathBuf,
    pub seed: u64,
    pub exec: Execution,
    pub quiet: bool,
}

impl Context {
    pub fn new(cli: &Cli) -> CliResult<Self> {
        let manifest = match &cli.manifest {
            Some(p) => RunManifest::load(p)?,
            None => RunManifest::default(),
        };
        let quiet = cli.quiet || manifest.quiet;
        let seed = match cli.seed.or(manifest.seed) {
            Some(s) => s,
            None => {
                let s: u64 = rand::random();
                eprintln!("seed: {s}");
                s
            }
        };
        let threads = cli.threads.or(manifest.threads);
        let exec = match threads {
            Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
            Some(1) => Execution::Sequential,
            Some(n) => {
                configure_pool(n);
                Execution::Parallel
            }
            None => Execution::default(),
        };
        let out = cli
            .out
            .clone()
            .or_else(|| manifest.out.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        Ok(Self { manifest, out, seed, exec, quiet })
    }

    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn write(&self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.out.join(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| wavecast::Error::io(dir, e))?;
        }
        std::fs::write(&path, contents).map_err(|e| wavecast::Error::io(&path, e))?;
        self.note(format!("wrote {}", path.display()));
        Ok(path)
    }

    fn config(&self, args: &PipelineArgs) -> CliResult<PipelineConfig> {
        let mut c = self.manifest.config.clone();
        c.seed = self.seed;
        if let Some(v) = args.mode {
            c.mode = v;
        }
        if let Some(v) = &args.target {
            c.target = v.clone();
        }
        if let Some(v) = args.lookback {
            c.lookback = v;
        }
        if let Some(v) = args.horizon {
            c.horizon = v;
        }
        if let Some(v) = args.epochs {
            c.epochs = v;
        }
        if let Some(v) = args.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = args.train_fraction {
            c.train_fraction = v;
        }
        if let Some(v) = args.levels {
            c.levels = v;
        }
        if let Some(v) = args.scope {
            c.scope = v;
        }
        if let Some(v) = args.metric {
            c.metric_scale = v;
        }
        c.validate()?;
        Ok(c)
    }

    /// Frame from `--frame`, the manifest's `frame`, the manifest's raw
    /// sources, or `<out>/frame.csv` left by an earlier `ingest`, in that order.
    fn frame(&self, args: &FrameArgs) -> CliResult<TimeSeriesFrame> {
        if let Some(p) = args.frame.as_ref().or(self.manifest.frame.as_ref()) {
            return read_frame(p);
        }
        if !self.manifest.sources.is_empty() {
            return Ok(self.ingest_sources(&self.manifest.sources)?.0);
        }
        let previous = self.out.join("frame.csv");
        if previous.is_file() {
            return read_frame(&previous);
        }
        Err(CliError::Usage(
            "no input data: pass --frame, or set `frame` or the raw source files in the manifest".into(),
        ))
    }

    fn ingest_sources(&self, sources: &[(String, PathBuf)]) -> CliResult<(TimeSeriesFrame, Vec<(String, usize)>)> {
        let mut series = Vec::new();
        let mut dropped = Vec::new();
        let mut cases = None;
        for (name, path) in sources {
            let text = read_text(path)?;
            if name == "cases" {
                cases = Some(parse_jhu_cases(&text).map_err(|e| in_file(path, e))?);
            } else {
                let parsed = parse_ohlcv(&text).map_err(|e| in_file(path, e))?;
                dropped.push((name.clone(), parsed.dropped));
                series.push(PriceSeries::from_records(name.clone(), &parsed.records));
            }
        }
        let cases = cases.ok_or_else(|| CliError::Usage("no case table given (`cases`)".into()))?;
        if series.is_empty() {
            return Err(CliError::Usage("no price series given".into()));
        }
        Ok((align(&series, &cases)?, dropped))
    }
}

#[cfg(feature = "parallel")]
fn configure_pool(n: usize) {
    // A pool may already exist when called twice in one process; the first wins.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

#[cfg(not(feature = "parallel"))]
fn configure_pool(_n: usize) {}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| wavecast::Error::io(path, e).into())
}

/// Prefixes parse errors with the offending file.
fn in_file(path: &Path, e: wavecast::Error) -> CliError {
    match e {
        wavecast::Error::Row { line, message } => {
            wavecast::Error::Format(format!("{}: line {line}: {message}", path.display())).into()
        }
        wavecast::Error::Format(m) => wavecast::Error::Format(format!("{}: {m}", path.display())).into(),
        other => other.into(),
    }
}

fn read_frame(path: &Path) -> CliResult<TimeSeriesFrame> {
    TimeSeriesFrame::from_csv(&read_text(path)?).map_err(|e| in_file(path, e))
}

fn to_json(value: &impl serde::Serialize) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(wavecast::Error::from)?;
    s.push('\n');
    Ok(s)
}

pub fn dispatch(ctx: &Context, command: &Command) -> CliResult {
    match command {
        Command::Ingest(a) => ingest(ctx, a),
        Command::Stats(a) => stats(ctx, a),
        Command::Unitroot(a) => unitroot(ctx, &a.input, a.max_lags),
        Command::Decompose(a) => decompose(ctx, &a.input, a.levels),
        Command::Train(a) => train(ctx, a),
        Command::Gridsearch(a) => gridsearch(ctx, a).map(|_| ()),
        Command::Forecast(a) => forecast_cmd(ctx, &a.input, a.model.clone()),
        Command::Compare(a) => compare(ctx, a),
        Command::Run(a) => run(ctx, a),
    }
}

fn stats_json(frame: &TimeSeriesFrame) -> CliResult<Value> {
    let mut rows = Vec::new();
    for (name, col) in frame.names().iter().zip(frame.columns()) {
        let s = descriptive_stats(col)?;
        let mut v = serde_json::to_value(s).map_err(wavecast::Error::from)?;
        v["variable"] = json!(name);
        rows.push(v);
    }
    Ok(Value::Array(rows))
}

fn ingest(ctx: &Context, args: &IngestArgs) -> CliResult {
    let mut sources = ctx.manifest.sources.clone();
    let flags = [
        ("crude_oil", &args.crude_oil),
        ("dji", &args.dji),
        ("sp500", &args.sp500),
        ("nasdaq", &args.nasdaq),
        ("cases", &args.cases),
    ];
    for (name, path) in flags {
        if let Some(p) = path {
            sources.retain(|(n, _)| n != name);
            sources.push((name.to_owned(), p.clone()));
        }
    }
    // Column order follows the fixed instrument order, not the flag order.
    sources.sort_by_key(|(n, _)| crate::manifest::SOURCE_KEYS.iter().position(|k| k == n));
    let (frame, dropped) = ctx.ingest_sources(&sources)?;
    for (name, n) in dropped.iter().filter(|(_, n)| *n > 0) {
        ctx.note(format!("{name}: dropped {n} rows with missing values"));
    }
    ctx.note(format!(
        "{} aligned rows, {} to {}",
        frame.len(),
        frame.dates().first().map_or_else(String::new, ToString::to_string),
        frame.dates().last().map_or_else(String::new, ToString::to_string)
    ));
    ctx.write("frame.csv", &frame.to_csv())?;
    ctx.write("stats.json", &to_json(&stats_json(&frame)?)?)?;
    Ok(())
}

fn stats(ctx: &Context, args: &FrameArgs) -> CliResult {
    let frame = ctx.frame(args)?;
    let table = stats_json(&frame)?;
    if !ctx.quiet {
        say!("{:<12} {:>6} {:>14} {:>14} {:>14} {:>14} {:>9} {:>9}", "variable", "n", "mean", "max", "min", "std", "kurt", "skew");
        for r in table.as_array().into_iter().flatten() {
            say!(
                "{:<12} {:>6} {:>14.4} {:>14.4} {:>14.4} {:>14.4} {:>9.4} {:>9.4}",
                r["variable"].as_str().unwrap_or(""),
                r["n"],
                r["mean"].as_f64().unwrap_or(f64::NAN),
                r["max"].as_f64().unwrap_or(f64::NAN),
                r["min"].as_f64().unwrap_or(f64::NAN),
                r["std_dev"].as_f64().unwrap_or(f64::NAN),
                r["kurtosis"].as_f64().unwrap_or(f64::NAN),
                r["skewness"].as_f64().unwrap_or(f64::NAN),
            );
        }
    }
    ctx.write("stats.json", &to_json(&table)?)?;
    Ok(())
}

fn unitroot(ctx: &Context, args: &FrameArgs, max_lags: Option<usize>) -> CliResult {
    let frame = ctx.frame(args)?;
    let max_lags = max_lags.unwrap_or(ctx.manifest.max_lags);
    let mut specs = Vec::new();
    for transform in [Transform::Level, Transform::FirstDifference] {
        for det in [Deterministic::Intercept, Deterministic::TrendAndIntercept] {
            for base in [UnitRootSpec::adf(det), UnitRootSpec::pp(det)] {
                specs.push(UnitRootSpec { max_lags, ..base.with_transform(transform) });
            }
        }
    }
    let mut variables = Vec::new();
    for (name, col) in frame.names().iter().zip(frame.columns()) {
        let cells: Vec<Value> = ctx.exec.map(&specs, |spec| {
            let mut cell = json!({
                "test": spec.test,
                "transform": spec.transform,
                "deterministic": spec.deterministic,
            });
            match run_unit_root(col, spec) {
                Ok(r) => {
                    cell["display"] = json!(r.display());
                    cell["statistic"] = json!(r.statistic);
                    cell["lags_or_bandwidth"] = json!(r.lags_or_bandwidth);
                    cell["nobs"] = json!(r.nobs);
                    cell["critical_values"] = json!(r.critical_values);
                    cell["asymptotic"] = json!(r.asymptotic);
                }
                Err(e) => cell["error"] = json!(e.to_string()),
            }
            cell
        });
        if !ctx.quiet {
            let shown: Vec<&str> = cells.iter().map(|c| c["display"].as_str().unwrap_or("n/a")).collect();
            say!("{name:<12} {}", shown.join("  "));
        }
        variables.push(json!({ "variable": name, "cells": cells }));
    }
    ctx.write("unitroot.json", &to_json(&Value::Array(variables))?)?;
    Ok(())
}

fn decompose(ctx: &Context, args: &FrameArgs, levels: Option<usize>) -> CliResult {
    let frame = ctx.frame(args)?;
    let levels = levels.unwrap_or(ctx.manifest.config.levels);
    if levels == 0 {
        return Err(CliError::Usage("--levels must be at least 1".into()));
    }
    let filters = meyer()?;
    let labels = coefficient_labels(levels);
    let decomposed = ctx.exec.map(frame.columns(), |c| decompose_column(c, levels, filters));
    for (name, coeffs) in frame.names().iter().zip(decomposed) {
        let coeffs = coeffs?;
        let mut csv = format!("date,{}\n", labels.join(","));
        for (row, date) in frame.dates().iter().enumerate() {
            csv.push_str(&date.format("%Y-%m-%d").to_string());
            for c in &coeffs {
                csv.push(',');
                csv.push_str(&c[row].to_string());
            }
            csv.push('\n');
        }
        ctx.write(&format!("decompose/{name}.csv"), &csv)?;
    }
    Ok(())
}

fn train_pipeline(
    ctx: &Context,
    frame: &TimeSeriesFrame,
    config: &PipelineConfig,
    hp: &HyperParams,
    seed: u64,
    resume: Option<&Path>,
) -> CliResult<TrainedPipeline> {
    let features = build_features(frame, config, ctx.exec)?;
    let (mut trainer, mut trace) = match resume {
        Some(path) => {
            let saved = TrainedPipeline::load(path)?;
            if saved.features != features.pipeline || saved.hyperparams != *hp {
                return Err(wavecast::Error::Config(format!(
                    "{} was trained with different data or settings",
                    path.display()
                ))
                .into());
            }
            (Trainer::resume(saved.checkpoint, config.batch_size, ctx.exec)?, saved.train_loss_trace)
        }
        None => {
            let spec = model_spec(hp, features.train.num_features, config.horizon, &config.dropout);
            (Trainer::new(&spec, hp, seed, config.batch_size, ctx.exec)?, Vec::new())
        }
    };
    ctx.note(format!(
        "training {} on {} windows ({} features), {} epochs",
        config.mode, features.train.num_samples, features.train.num_features, config.epochs
    ));
    for _ in 0..config.epochs {
        let loss = trainer.train_epoch(&features.train)?;
        if !loss.is_finite() {
            return Err(wavecast::Error::Numeric(format!("training loss diverged at epoch {}", trainer.epoch)).into());
        }
        trace.push(loss);
        if !ctx.quiet && (trainer.epoch % 10 == 0 || trainer.epoch == 1) {
            eprintln!("epoch {:>4}  loss {loss:.6}", trainer.epoch);
        }
    }
    let scale = (config.metric_scale == MetricScale::Price).then_some(&features.pipeline.scaler);
    let eval = evaluate(&trainer.model, &features.test, scale, ctx.exec)?;
    // Record the total epoch count so a resumed model matches one trained in a single run.
    let config = PipelineConfig { epochs: trainer.epoch, ..config.clone() };
    let mut saved = TrainedPipeline::new(config, hp.clone(), features.pipeline, trainer.checkpoint());
    saved.train_loss_trace = trace;
    saved.rmse = Some(eval.rmse);
    saved.mae = Some(eval.mae);
    Ok(saved)
}

fn train(ctx: &Context, args: &TrainArgs) -> CliResult {
    let frame = ctx.frame(&args.input)?;
    let config = ctx.config(&args.pipeline)?;
    let hp = ctx.manifest.hyperparams.clone();
    let saved = train_pipeline(ctx, &frame, &config, &hp, ctx.seed, args.resume.as_deref())?;
    report_metrics(ctx, &saved);
    ctx.write("model.json", &(saved.to_json()? + "\n"))?;
    Ok(())
}

fn report_metrics(ctx: &Context, saved: &TrainedPipeline) {
    if !ctx.quiet {
        say!(
            "test RMSE {:.6}  MAE {:.6}  ({})",
            saved.rmse.unwrap_or(f64::NAN),
            saved.mae.unwrap_or(f64::NAN),
            match saved.config.metric_scale {
                MetricScale::Scaled => "scaled units",
                MetricScale::Price => "price units",
            }
        );
    }
}

fn search_space(ctx: &Context) -> HyperSpace {
    ctx.manifest.space.clone()
}

fn gridsearch(ctx: &Context, args: &GridArgs) -> CliResult<(TimeSeriesFrame, PipelineConfig, GridSearchReport)> {
    let frame = ctx.frame(&args.input)?;
    let config = ctx.config(&args.pipeline)?;
    let budget: Budget = args.budget.clone().unwrap_or_else(|| ctx.manifest.budget.clone());
    let space = search_space(ctx);
    let features = build_features(&frame, &config, ctx.exec)?;
    ctx.note(format!("searching {} of {} configurations", describe(&budget), space.size()));
    let report = grid_search(&features, &space, &config, &budget, ctx.exec)?;
    ctx.write("trials.json", &to_json(&report.trials)?)?;
    ctx.write("ranking.csv", &report.ranking_csv())?;
    let failed = report.trials.len() - report.ranking.len();
    if failed > 0 {
        ctx.note(format!("{failed} trials failed"));
    }
    match report.best() {
        Some(best) => {
            if !ctx.quiet {
                let hp = &best.hyperparams;
                say!(
                    "best #{}: bdlstm {} fc {} {} {} lr {} decay {} l2 {}  RMSE {:.6}  MAE {:.6}",
                    best.index,
                    wavecast::trainer::format_sizes(&hp.bdlstm_sizes),
                    wavecast::trainer::format_sizes(&hp.fc_sizes),
                    hp.activation,
                    hp.optimizer,
                    hp.learning_rate,
                    hp.decay,
                    hp.l2,
                    best.rmse.unwrap_or(f64::NAN),
                    best.mae.unwrap_or(f64::NAN)
                );
            }
            Ok((frame, config, report))
        }
        None => Err(wavecast::Error::Numeric("every trial failed".into()).into()),
    }
}

fn describe(budget: &Budget) -> String {
    match budget {
        Budget::Full => "all".into(),
        Budget::Random(k) => format!("{k} random"),
        Budget::Fixed(list) => format!("{} listed", list.len()),
    }
}

fn forecast_cmd(ctx: &Context, args: &FrameArgs, model: Option<PathBuf>) -> CliResult {
    let frame = ctx.frame(args)?;
    let path = model.unwrap_or_else(|| ctx.out.join("model.json"));
    let saved = TrainedPipeline::load(&path)?;
    write_forecast(ctx, &frame, &saved)
}

fn write_forecast(ctx: &Context, frame: &TimeSeriesFrame, saved: &TrainedPipeline) -> CliResult {
    let report = forecast(&saved.checkpoint.model, frame, &saved.features, ctx.exec)?;
    if !ctx.quiet {
        say!("{} after {}:", report.target, report.last_observed);
        for r in &report.rows {
            say!("  {}  {:.4}", r.date, r.predicted_price);
        }
    }
    ctx.write("forecast.csv", &report.to_csv())?;
    Ok(())
}

fn compare(ctx: &Context, args: &CompareArgs) -> CliResult {
    let frame = ctx.frame(&args.input)?;
    let mut config = ctx.config(&args.pipeline)?;
    if args.pipeline.horizon.is_none() {
        config.horizon = ctx.manifest.compare_horizon;
        config.validate()?;
    }
    let seeds = args.seeds.clone().unwrap_or_else(|| {
        if ctx.manifest.seeds.is_empty() {
            vec![ctx.seed]
        } else {
            ctx.manifest.seeds.clone()
        }
    });
    let targets = args.targets.clone().unwrap_or_else(|| {
        if ctx.manifest.targets.is_empty() {
            vec![config.target.clone()]
        } else {
            ctx.manifest.targets.clone()
        }
    });
    let report = compare_configurations(
        &frame,
        &ctx.manifest.hyperparams,
        &config,
        &targets,
        &ctx.manifest.modes,
        &seeds,
        ctx.exec,
    )?;
    if !ctx.quiet {
        say!("{:<12} {:<8} {:>12} {:>12} {:>7}", "target", "mode", "median RMSE", "median MAE", "failed");
        for c in &report.cells {
            say!(
                "{:<12} {:<8} {:>12.6} {:>12.6} {:>7}",
                c.target,
                c.mode.to_string(),
                c.rmse.map_or(f64::NAN, |s| s.median),
                c.mae.map_or(f64::NAN, |s| s.median),
                c.failed
            );
        }
    }
    ctx.write("comparison.json", &to_json(&report)?)?;
    Ok(())
}

fn run(ctx: &Context, args: &GridArgs) -> CliResult {
    let (frame, config, report) = gridsearch(ctx, args)?;
    let best = report.best().expect("gridsearch returns an error when no trial succeeded");
    let saved = train_pipeline(ctx, &frame, &config, &best.hyperparams, best.seed, None)?;
    report_metrics(ctx, &saved);
    ctx.write("model.json", &(saved.to_json()? + "\n"))?;
    write_forecast(ctx, &frame, &saved)
}
