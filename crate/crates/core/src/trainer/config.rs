use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Activation, OptimizerKind};
use crate::swt::{DecompositionMode, DEFAULT_LEVELS};

/// Input configuration: raw scaled series or wavelet coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "RAW")]
    Raw,
    #[serde(rename = "WT_AD")]
    WtAd,
    #[serde(rename = "WT_ADA")]
    WtAda,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Raw, Mode::WtAd, Mode::WtAda];

    pub fn decomposition(self) -> Option<DecompositionMode> {
        match self {
            Mode::Raw => None,
            Mode::WtAd => Some(DecompositionMode::Ad),
            Mode::WtAda => Some(DecompositionMode::Ada),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "RAW" => Ok(Mode::Raw),
            "WT_AD" => Ok(Mode::WtAd),
            "WT_ADA" => Ok(Mode::WtAda),
            other => Err(Error::Config(format!("unknown mode `{other}` (RAW, WT_AD, WT_ADA)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Raw => "RAW",
            Mode::WtAd => "WT_AD",
            Mode::WtAda => "WT_ADA",
        })
    }
}

/// Which rows the wavelet transform sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionScope {
    /// Train and test partitions are decomposed separately, so no test value
    /// can reach a training feature through the filters.
    #[default]
    PerPartition,
    /// The whole scaled series is decomposed before splitting.
    FullSeries,
}

impl FromStr for DecompositionScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "per_partition" => Ok(Self::PerPartition),
            "full_series" | "full" => Ok(Self::FullSeries),
            other => Err(Error::Config(format!("unknown decomposition scope `{other}`"))),
        }
    }
}

/// Units the metrics are reported in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricScale {
    #[default]
    Scaled,
    Price,
}

impl FromStr for MetricScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scaled" => Ok(Self::Scaled),
            "price" | "raw" => Ok(Self::Price),
            other => Err(Error::Config(format!("unknown metric scale `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub lookback: usize,
    pub horizon: usize,
    pub target: String,
    pub train_fraction: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Dropout after each BDLSTM layer; the last entry repeats for deeper stacks.
    pub dropout: Vec<f64>,
    pub levels: usize,
    pub scope: DecompositionScope,
    pub metric_scale: MetricScale,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mode: Mode::WtAda,
            lookback: 128,
            horizon: 5,
            target: "crude_oil".into(),
            train_fraction: 0.8,
            epochs: 100,
            batch_size: 32,
            seed: 0,
            dropout: vec![0.2, 0.1],
            levels: DEFAULT_LEVELS,
            scope: DecompositionScope::PerPartition,
            metric_scale: MetricScale::Scaled,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lookback == 0 || self.horizon == 0 {
            return Err(Error::Config("lookback and horizon must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!("train fraction {} outside (0, 1)", self.train_fraction)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.levels == 0 {
            return Err(Error::Config("decomposition needs at least one level".into()));
        }
        if let Some(p) = self.dropout.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(Error::Config(format!("dropout {p} outside [0, 1)")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub bdlstm_sizes: Vec<usize>,
    pub fc_sizes: Vec<usize>,
    pub activation: Activation,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub decay: f64,
    pub l2: f64,
}

impl HyperParams {
    /// BDLSTM (64, 64), FC (12), tanh, Adam, lr 0.001, decay 1e-6, L2 1e-4.
    pub fn best_reported() -> Self {
        Self {
            bdlstm_sizes: vec![64, 64],
            fc_sizes: vec![12],
            activation: Activation::Tanh,
            optimizer: OptimizerKind::Adam,
            learning_rate: 1e-3,
            decay: 1e-6,
            l2: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bdlstm_sizes.is_empty() || self.fc_sizes.is_empty() {
            return Err(Error::Config("layer size lists must be non-empty".into()));
        }
        if self.bdlstm_sizes.contains(&0) || self.fc_sizes.contains(&0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        if !(self.learning_rate > 0.0) || !(self.decay >= 0.0) || !(self.l2 >= 0.0) {
            return Err(Error::Config("learning rate must be positive, decay and L2 non-negative".into()));
        }
        Ok(())
    }
}

/// Widths joined with `-`, e.g. `64-32`.
pub fn format_sizes(sizes: &[usize]) -> String {
    sizes.iter().map(usize::to_string).collect::<Vec<_>>().join("-")
}

/// Parses `64-32`, `64,32` or `(64, 32)`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
    let sizes = inner
        .split(|c| c == ',' || c == '-')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| Error::Config(format!("bad layer width `{t}` in `{s}`"))))
        .collect::<Result<Vec<_>>>()?;
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::Config(format!("layer sizes `{s}` must be non-empty and positive")));
    }
    Ok(sizes)
}

/// Candidate values per hyperparameter; the search space is their product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperSpace {
    pub bdlstm_sizes: Vec<Vec<usize>>,
    pub fc_sizes: Vec<Vec<usize>>,
    pub activation: Vec<Activation>,
    pub optimizer: Vec<OptimizerKind>,
    pub learning_rate: Vec<f64>,
    pub decay: Vec<f64>,
    pub l2: Vec<f64>,
}

impl HyperSpace {
    /// The full published search space (17,496 combinations).
    pub fn reference() -> Self {
        let v = |s: &[&[usize]]| s.iter().map(|x| x.to_vec()).collect::<Vec<_>>();
        Self {
            bdlstm_sizes: v(&[
                &[32],
                &[64],
                &[32, 32],
                &[64, 32],
                &[64, 64],
                &[32, 32, 32],
                &[64, 32, 32],
                &[64, 32, 64],
                &[64, 64, 64],
            ]),
            fc_sizes: v(&[
                &[12],
                &[24],
                &[12, 12],
                &[24, 12],
                &[24, 24],
                &[12, 12, 12],
                &[24, 12, 12],
                &[24, 12, 24],
                &[24, 24, 24],
            ]),
            activation: Activation::ALL.to_vec(),
            optimizer: vec![OptimizerKind::Adam, OptimizerKind::RmsProp],
            learning_rate: vec![1e-4, 1e-3, 1e-2],
            decay: vec![1e-7, 1e-6, 1e-5],
            l2: vec![1e-4, 1e-3, 1e-2],
        }
    }

    /// A space holding exactly one point.
    pub fn single(hp: &HyperParams) -> Self {
        Self {
            bdlstm_sizes: vec![hp.bdlstm_sizes.clone()],
            fc_sizes: vec![hp.fc_sizes.clone()],
            activation: vec![hp.activation],
            optimizer: vec![hp.optimizer],
            learning_rate: vec![hp.learning_rate],
            decay: vec![hp.decay],
            l2: vec![hp.l2],
        }
    }

    fn radices(&self) -> [usize; 7] {
        [
            self.bdlstm_sizes.len(),
            self.fc_sizes.len(),
            self.activation.len(),
            self.optimizer.len(),
            self.learning_rate.len(),
            self.decay.len(),
            self.l2.len(),
        ]
    }

    pub fn size(&self) -> usize {
        self.radices().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// Combination number `index` in enumeration order (the last axis, L2,
    /// varies fastest).
    pub fn get(&self, index: usize) -> Option<HyperParams> {
        if index >= self.size() {
            return None;
        }
        let radices = self.radices();
        let mut digits = [0usize; 7];
        let mut rest = index;
        for (d, r) in digits.iter_mut().zip(radices).rev() {
            *d = rest % r;
            rest /= r;
        }
        Some(HyperParams {
            bdlstm_sizes: self.bdlstm_sizes[digits[0]].clone(),
            fc_sizes: self.fc_sizes[digits[1]].clone(),
            activation: self.activation[digits[2]],
            optimizer: self.optimizer[digits[3]],
            learning_rate: self.learning_rate[digits[4]],
            decay: self.decay[digits[5]],
            l2: self.l2[digits[6]],
        })
    }

    /// Enumeration index of `hp`, if it lies in the space.
    pub fn index_of(&self, hp: &HyperParams) -> Option<usize> {
        let digits = [
            self.bdlstm_sizes.iter().position(|s| *s == hp.bdlstm_sizes)?,
            self.fc_sizes.iter().position(|s| *s == hp.fc_sizes)?,
            self.activation.iter().position(|a| *a == hp.activation)?,
            self.optimizer.iter().position(|o| *o == hp.optimizer)?,
            self.learning_rate.iter().position(|v| *v == hp.learning_rate)?,
            self.decay.iter().position(|v| *v == hp.decay)?,
            self.l2.iter().position(|v| *v == hp.l2)?,
        ];
        Some(digits.iter().zip(self.radices()).fold(0, |acc, (d, r)| acc * r + d))
    }

    pub fn contains(&self, hp: &HyperParams) -> bool {
        self.index_of(hp).is_some()
    }
}

/// How many grid points a search visits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    /// Every combination.
    Full,
    /// `k` distinct combinations drawn uniformly with the run seed.
    Random(usize),
    /// An explicit list, visited in order.
    Fixed(Vec<HyperParams>),
}

impl FromStr for Budget {
    type Err = Error;

    /// Accepts `full`, `random_<k>` and `random:<k>`; fixed lists are only
    /// available programmatically or through a manifest.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "full" {
            return Ok(Budget::Full);
        }
        if let Some(k) = lower.strip_prefix("random_").or_else(|| lower.strip_prefix("random:")) {
            let k: usize = k.parse().map_err(|_| Error::Config(format!("bad random budget `{s}`")))?;
            if k == 0 {
                return Err(Error::Config("random budget must be at least 1".into()));
            }
            return Ok(Budget::Random(k));
        }
        Err(Error::Config(format!("unknown budget `{s}` (full, random_<k>)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_space_size() {
        assert_eq!(HyperSpace::reference().size(), 9 * 9 * 4 * 2 * 3 * 3 * 3);
        assert_eq!(HyperSpace::reference().size(), 17_496);
    }

    #[test]
    fn best_point_is_in_the_space() {
        let space = HyperSpace::reference();
        let best = HyperParams::best_reported();
        let idx = space.index_of(&best).unwrap();
        assert_eq!(space.get(idx).unwrap(), best);
    }

    #[test]
    fn index_round_trip() {
        let space = HyperSpace::reference();
        for idx in [0, 1, 2, 3, 26, 27, 999, 17_495] {
            assert_eq!(space.index_of(&space.get(idx).unwrap()), Some(idx));
        }
        assert!(space.get(17_496).is_none());
    }

    #[test]
    fn last_axis_varies_fastest() {
        let space = HyperSpace::reference();
        assert_eq!(space.get(0).unwrap().l2, 1e-4);
        assert_eq!(space.get(1).unwrap().l2, 1e-3);
        assert_eq!(space.get(3).unwrap().decay, 1e-6);
    }

    #[test]
    fn parsing() {
        assert_eq!("wt-ada".parse::<Mode>().unwrap(), Mode::WtAda);
        assert_eq!("random_10".parse::<Budget>().unwrap(), Budget::Random(10));
        assert_eq!("full".parse::<Budget>().unwrap(), Budget::Full);
        assert!("random_0".parse::<Budget>().is_err());
        assert_eq!(parse_sizes("(64, 32)").unwrap(), vec![64, 32]);
        assert_eq!(parse_sizes("24-12-24").unwrap(), vec![24, 12, 24]);
        assert!(parse_sizes("()").is_err());
        assert_eq!(format_sizes(&[64, 64]), "64-64");
    }

    #[test]
    fn config_validation() {
        assert!(PipelineConfig::default().validate().is_ok());
        let bad = PipelineConfig { train_fraction: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = PipelineConfig { lookback: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
