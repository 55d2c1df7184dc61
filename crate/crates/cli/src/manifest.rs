//! Plain-text run manifest: one `key = value` per line, `#` starts a comment.
//! Relative paths are resolved against the manifest's directory.

use std::path::{Path, PathBuf};

use wavecast::network::{Activation, OptimizerKind};
use wavecast::trainer::{parse_sizes, Budget, HyperParams, HyperSpace, Mode, PipelineConfig};

use crate::error::CliError;

/// Raw input files, keyed like the frame columns (`cases` for the case table).
pub const SOURCE_KEYS: [&str; 5] = ["crude_oil", "dji", "sp500", "nasdaq", "cases"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub frame: Option<PathBuf>,
    pub sources: Vec<(String, PathBuf)>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub quiet: bool,
    pub config: PipelineConfig,
    pub hyperparams: HyperParams,
    pub space: HyperSpace,
    pub budget: Budget,
    pub seeds: Vec<u64>,
    pub targets: Vec<String>,
    pub modes: Vec<Mode>,
    pub compare_horizon: usize,
    pub max_lags: usize,
}

impl Default for RunManifest {
    fn default() -> Self {
        Self {
            frame: None,
            sources: Vec::new(),
            out: None,
            seed: None,
            threads: None,
            quiet: false,
            config: PipelineConfig::default(),
            hyperparams: HyperParams::best_reported(),
            space: HyperSpace::reference(),
            budget: Budget::Full,
            seeds: Vec::new(),
            targets: Vec::new(),
            modes: Mode::ALL.to_vec(),
            compare_horizon: 1,
            max_lags: 31,
        }
    }
}

fn bad(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("manifest line {line}: {msg}"))
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| bad(line, format!("`{key}` expects a number, got `{v}`")))
}

fn list<T>(line: usize, v: &str, sep: char, f: impl Fn(&str) -> Result<T, CliError>) -> Result<Vec<T>, CliError> {
    let items = v
        .split(sep)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(f)
        .collect::<Result<Vec<_>, _>>()?;
    if items.is_empty() {
        return Err(bad(line, "empty list"));
    }
    Ok(items)
}

fn core<T>(line: usize, r: wavecast::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| bad(line, e))
}

/// `bdlstm=64-64; fc=12; activation=tanh; ...`; unset fields keep `base`.
fn parse_trial(line: usize, v: &str, base: &HyperParams) -> Result<HyperParams, CliError> {
    let mut hp = base.clone();
    for part in v.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, val) = part
            .split_once('=')
            .ok_or_else(|| bad(line, format!("trial field `{part}` is not key=value")))?;
        let (k, val) = (k.trim(), val.trim());
        match k {
            "bdlstm" => hp.bdlstm_sizes = core(line, parse_sizes(val))?,
            "fc" => hp.fc_sizes = core(line, parse_sizes(val))?,
            "activation" => hp.activation = core(line, val.parse())?,
            "optimizer" => hp.optimizer = core(line, val.parse())?,
            "learning_rate" => hp.learning_rate = num(line, k, val)?,
            "decay" => hp.decay = num(line, k, val)?,
            "l2" => hp.l2 = num(line, k, val)?,
            other => return Err(bad(line, format!("unknown trial field `{other}`"))),
        }
    }
    Ok(hp)
}

fn parse_bool(line: usize, v: &str) -> Result<bool, CliError> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(line, format!("expected true or false, got `{v}`"))),
    }
}

impl RunManifest {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut m = RunManifest::default();
        let mut trials = Vec::new();
        let mut fixed = false;
        let path = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| bad(line, format!("expected `key = value`, got `{content}`")))?;
            let (key, v) = (key.trim(), value.trim());
            let c = &mut m.config;
            match key {
                "frame" => m.frame = Some(path(v)),
                k if SOURCE_KEYS.contains(&k) => {
                    m.sources.retain(|(name, _)| name != k);
                    m.sources.push((k.to_owned(), path(v)));
                }
                "out" => m.out = Some(path(v)),
                "seed" => m.seed = Some(num(line, key, v)?),
                "threads" => m.threads = Some(num(line, key, v)?),
                "quiet" => m.quiet = parse_bool(line, v)?,
                "mode" => c.mode = core(line, v.parse())?,
                "target" => c.target = v.to_owned(),
                "lookback" => c.lookback = num(line, key, v)?,
                "horizon" => c.horizon = num(line, key, v)?,
                "train_fraction" => c.train_fraction = num(line, key, v)?,
                "epochs" => c.epochs = num(line, key, v)?,
                "batch_size" => c.batch_size = num(line, key, v)?,
                "dropout" => c.dropout = list(line, v, ',', |s| num(line, key, s))?,
                "levels" => c.levels = num(line, key, v)?,
                "scope" => c.scope = core(line, v.parse())?,
                "metric" => c.metric_scale = core(line, v.parse())?,
                "bdlstm" => m.hyperparams.bdlstm_sizes = core(line, parse_sizes(v))?,
                "fc" => m.hyperparams.fc_sizes = core(line, parse_sizes(v))?,
                "activation" => m.hyperparams.activation = core(line, v.parse())?,
                "optimizer" => m.hyperparams.optimizer = core(line, v.parse())?,
                "learning_rate" => m.hyperparams.learning_rate = num(line, key, v)?,
                "decay" => m.hyperparams.decay = num(line, key, v)?,
                "l2" => m.hyperparams.l2 = num(line, key, v)?,
                "budget" if v.eq_ignore_ascii_case("fixed") => fixed = true,
                "budget" => m.budget = core(line, v.parse())?,
                "trial" => trials.push(parse_trial(line, v, &m.hyperparams)?),
                "grid.bdlstm" => m.space.bdlstm_sizes = list(line, v, '|', |s| core(line, parse_sizes(s)))?,
                "grid.fc" => m.space.fc_sizes = list(line, v, '|', |s| core(line, parse_sizes(s)))?,
                "grid.activation" => {
                    m.space.activation = list(line, v, '|', |s| core(line, s.parse::<Activation>()))?
                }
                "grid.optimizer" => {
                    m.space.optimizer = list(line, v, '|', |s| core(line, s.parse::<OptimizerKind>()))?
                }
                "grid.learning_rate" => m.space.learning_rate = list(line, v, '|', |s| num(line, key, s))?,
                "grid.decay" => m.space.decay = list(line, v, '|', |s| num(line, key, s))?,
                "grid.l2" => m.space.l2 = list(line, v, '|', |s| num(line, key, s))?,
                "seeds" => m.seeds = list(line, v, ',', |s| num(line, key, s))?,
                "targets" => m.targets = list(line, v, ',', |s| Ok(s.to_owned()))?,
                "modes" => m.modes = list(line, v, ',', |s| core(line, s.parse::<Mode>()))?,
                "compare_horizon" => m.compare_horizon = num(line, key, v)?,
                "max_lags" => m.max_lags = num(line, key, v)?,
                other => return Err(bad(line, format!("unknown key `{other}`"))),
            }
        }
        if fixed {
            if trials.is_empty() {
                return Err(CliError::Usage("manifest: `budget = fixed` needs at least one `trial` line".into()));
            }
            m.budget = Budget::Fixed(trials);
        } else if !trials.is_empty() {
            return Err(CliError::Usage("manifest: `trial` lines require `budget = fixed`".into()));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Core(wavecast::Error::io(path, e)))?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, dir)
    }
}
