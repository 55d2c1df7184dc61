use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{format_sizes, Budget, HyperParams, HyperSpace, PipelineConfig};
use super::features::FeatureSet;
use super::train::{derive_seed, train_and_evaluate, TrialResult};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// The `(enumeration index, hyperparameters)` pairs a budget visits, in
/// enumeration order.
pub fn plan_trials(space: &HyperSpace, budget: &Budget, run_seed: u64) -> Result<Vec<(usize, HyperParams)>> {
    if let Budget::Fixed(list) = budget {
        if list.is_empty() {
            return Err(Error::Config("fixed budget lists no hyperparameters".into()));
        }
        for hp in list {
            hp.validate()?;
        }
        return Ok(list.iter().cloned().enumerate().collect());
    }
    let size = space.size();
    if size == 0 {
        return Err(Error::Config("hyperparameter space is empty".into()));
    }
    let indices: Vec<usize> = match *budget {
        Budget::Full => (0..size).collect(),
        Budget::Random(k) => {
            if k > size {
                return Err(Error::Config(format!("random budget {k} exceeds the {size} combinations")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
            let mut picked = rand::seq::index::sample(&mut rng, size, k).into_vec();
            picked.sort_unstable();
            picked
        }
        Budget::Fixed(_) => unreachable!(),
    };
    indices
        .into_iter()
        .map(|i| {
            let hp = space.get(i).expect("index below space size");
            hp.validate()?;
            Ok((i, hp))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchReport {
    /// Every trial, failed ones included, in enumeration order.
    pub trials: Vec<TrialResult>,
    /// Positions in `trials` of the successful trials, best first.
    pub ranking: Vec<usize>,
}

impl GridSearchReport {
    pub fn best(&self) -> Option<&TrialResult> {
        self.ranking.first().map(|&i| &self.trials[i])
    }

    /// `rank,index,bdlstm,fc,activation,optimizer,learning_rate,decay,l2,rmse,mae`
    pub fn ranking_csv(&self) -> String {
        let mut out = String::from("rank,index,bdlstm,fc,activation,optimizer,learning_rate,decay,l2,rmse,mae\n");
        for (rank, &pos) in self.ranking.iter().enumerate() {
            let t = &self.trials[pos];
            let hp = &t.hyperparams;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                rank + 1,
                t.index,
                format_sizes(&hp.bdlstm_sizes),
                format_sizes(&hp.fc_sizes),
                hp.activation,
                hp.optimizer,
                hp.learning_rate,
                hp.decay,
                hp.l2,
                t.rmse.unwrap_or(f64::NAN),
                t.mae.unwrap_or(f64::NAN),
            ));
        }
        out
    }
}

/// Orders successful trials by RMSE, then MAE, then enumeration index.
pub fn rank_trials(trials: &[TrialResult]) -> Vec<usize> {
    let mut ok: Vec<usize> = (0..trials.len()).filter(|&i| trials[i].is_ok()).collect();
    ok.sort_by(|&a, &b| {
        let (ta, tb) = (&trials[a], &trials[b]);
        let key = |t: &TrialResult| (t.rmse.unwrap_or(f64::INFINITY), t.mae.unwrap_or(f64::INFINITY));
        let ((ra, ma), (rb, mb)) = (key(ta), key(tb));
        ra.total_cmp(&rb)
            .then(ma.total_cmp(&mb))
            .then(ta.index.cmp(&tb.index))
    });
    ok
}

/// Trains every planned trial (concurrently under `Execution::Parallel`)
/// and ranks the results. Each trial's seed derives from the run seed and
/// its enumeration index, so results do not depend on scheduling.
pub fn grid_search(
    features: &FeatureSet,
    space: &HyperSpace,
    config: &PipelineConfig,
    budget: &Budget,
    exec: Execution,
) -> Result<GridSearchReport> {
    let plan = plan_trials(space, budget, config.seed)?;
    let trials = exec.map(&plan, |(index, hp)| {
        train_and_evaluate(*index, hp, features, config, derive_seed(config.seed, *index as u64), exec)
    });
    let ranking = rank_trials(&trials);
    Ok(GridSearchReport { trials, ranking })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Activation, OptimizerKind};
    use crate::trainer::TrialStatus;
    use std::time::Duration;

    fn small_space() -> HyperSpace {
        HyperSpace {
            bdlstm_sizes: vec![vec![2], vec![3]],
            fc_sizes: vec![vec![2]],
            activation: vec![Activation::Tanh, Activation::Relu],
            optimizer: vec![OptimizerKind::Adam],
            learning_rate: vec![1e-2, 1e-3],
            decay: vec![0.0],
            l2: vec![0.0],
        }
    }

    #[test]
    fn full_budget_visits_everything_once() {
        let plan = plan_trials(&small_space(), &Budget::Full, 1).unwrap();
        assert_eq!(plan.len(), 8);
        let idx: Vec<usize> = plan.iter().map(|p| p.0).collect();
        assert_eq!(idx, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn random_budget_is_seeded_and_distinct() {
        let space = HyperSpace::reference();
        let a = plan_trials(&space, &Budget::Random(10), 5).unwrap();
        let b = plan_trials(&space, &Budget::Random(10), 5).unwrap();
        assert_eq!(a, b);
        let mut idx: Vec<usize> = a.iter().map(|p| p.0).collect();
        idx.dedup();
        assert_eq!(idx.len(), 10);
        assert!(plan_trials(&small_space(), &Budget::Random(9), 5).is_err());
    }

    #[test]
    fn empty_space_rejected() {
        let mut space = small_space();
        space.l2.clear();
        assert!(plan_trials(&space, &Budget::Full, 0).is_err());
    }

    fn trial(index: usize, rmse: Option<f64>, mae: Option<f64>) -> TrialResult {
        TrialResult {
            index,
            hyperparams: HyperParams::best_reported(),
            seed: 0,
            status: if rmse.is_some() { TrialStatus::Ok } else { TrialStatus::Failed },
            failure: None,
            train_loss_trace: vec![],
            rmse,
            mae,
            wall_time: Duration::ZERO,
        }
    }

    #[test]
    fn ranking_ties_and_failures() {
        let trials = vec![
            trial(0, Some(0.2), Some(0.1)),
            trial(1, None, None),
            trial(2, Some(0.1), Some(0.09)),
            trial(3, Some(0.1), Some(0.05)),
            trial(4, Some(0.1), Some(0.05)),
        ];
        assert_eq!(rank_trials(&trials), vec![3, 4, 2, 0]);
    }
}
