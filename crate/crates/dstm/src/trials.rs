//! Parallel version of [`dstm_core::eval::run_trials`].
//!
//! Each (trial, model) fit runs as its own task; results come back in the
//! same order as the sequential runner, so reports do not depend on the
//! number of workers.

use dstm_core::corpus::split_tokens;
use dstm_core::eval::{evaluate_on_split, model_names, trial_split_seed, TrialResult};
use dstm_core::{Corpus, ModelConfig};
use rayon::prelude::*;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialPlan {
    pub n_trials: usize,
    pub base_seed: u64,
    pub ratio: f64,
    /// Worker threads; 0 lets rayon choose.
    pub jobs: usize,
}

pub fn run_trials_parallel(corpus: &Corpus, configs: &[ModelConfig], plan: TrialPlan) -> Result<Vec<TrialResult>> {
    if plan.n_trials == 0 {
        return Err(Error::Invalid("at least one trial is required".into()));
    }
    for c in configs {
        c.validate()?;
    }
    let names = model_names(configs);
    let splits = (0..plan.n_trials)
        .map(|j| split_tokens(corpus, plan.ratio, trial_split_seed(plan.base_seed, j)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let tasks: Vec<(usize, usize)> = (0..plan.n_trials)
        .flat_map(|j| (0..configs.len()).map(move |m| (j, m)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))?;
    let results = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(j, m)| {
                let r = evaluate_on_split(&splits[j], &configs[m], &names[m], j);
                if let Ok(r) = &r {
                    log::info!("trial {} {}: ppl {:.4}", j, r.model, r.epoch_averaged);
                }
                r
            })
            .collect::<std::result::Result<Vec<_>, _>>()
    })?;
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dstm_core::eval::run_trials;
    use dstm_core::synth::{generate, GeneratorSpec};

    #[test]
    fn matches_sequential_runner() {
        let (corpus, _) = generate(&GeneratorSpec::planted(2, 3, 2, 30, 8, 15, 4)).unwrap();
        let configs = vec![
            ModelConfig::dstm(3, 2).with_schedule(12, 4, 4),
            ModelConfig::lda(3).with_schedule(12, 4, 4),
        ];
        let seq = run_trials(&corpus, &configs, 2, 9, 0.8).unwrap();
        let plan = TrialPlan { n_trials: 2, base_seed: 9, ratio: 0.8, jobs: 3 };
        assert_eq!(run_trials_parallel(&corpus, &configs, plan).unwrap(), seq);
    }
}
