//! The randomized-setting trial protocol.
//!
//! One trial: the source emits a hidden state, each wing flips a fair coin
//! for its setting, each wing measures. Trials run either as independent
//! "laboratories" (any order, any number of workers) or strictly in sequence
//! with the full history handed to the source.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{HiddenVariableModel, ModelClass, ModelDescriptor, SettingTable, SourceContext, Wing};
use crate::outcomes::{select_actual, Outcome, Quadruple, SettingLabel, SettingPair};
use crate::rng::{CounterStream, TrialStreams};

/// Environment variable that overrides the worker count of parallel runs.
pub const WORKERS_ENV: &str = "BELLHARNESS_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionMode {
    #[default]
    Parallel,
    Sequential,
}

/// One observed trial. `revealed` is present only when the model exposes its
/// quadruple and the run asked for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub a: SettingLabel,
    pub b: SettingLabel,
    pub x: Outcome,
    pub y: Outcome,
    pub revealed: Option<Quadruple>,
    #[serde(skip)]
    pub mode: ExecutionMode,
}

impl TrialRecord {
    pub fn settings(&self) -> SettingPair {
        (self.a, self.b)
    }

    /// Checks `(x, y) = select_actual(revealed, a, b)` when a quadruple is present.
    pub fn is_consistent(&self) -> bool {
        self.revealed
            .map_or(true, |q| select_actual(&q, self.a, self.b) == (self.x, self.y))
    }
}

pub type TrialLog = Vec<TrialRecord>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelDescriptor,
    pub table: SettingTable,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub mode: ExecutionMode,
    #[serde(default = "default_reveal")]
    pub reveal_hidden: bool,
}

fn default_reveal() -> bool {
    true
}

impl ExperimentConfig {
    pub fn new(model: ModelDescriptor, trials: u64, seed: u64) -> Self {
        ExperimentConfig {
            model,
            table: SettingTable::default(),
            trials,
            seed,
            mode: ExecutionMode::Parallel,
            reveal_hidden: true,
        }
    }

    pub fn with_mode(mut self, mode: ExecutionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_table(mut self, table: SettingTable) -> Self {
        self.table = table;
        self
    }

    pub fn with_reveal(mut self, reveal: bool) -> Self {
        self.reveal_hidden = reveal;
        self
    }
}

/// Two independent fair coins, one per wing.
#[inline]
pub fn draw_settings(rng: &mut CounterStream) -> SettingPair {
    let bits = rng.next_u64();
    let label = |bit: u64| if bit == 0 { SettingLabel::One } else { SettingLabel::Two };
    (label(bits >> 63), label((bits >> 62) & 1))
}

fn check_mode(config: &ExperimentConfig, model: &dyn HiddenVariableModel) -> Result<()> {
    if model.uses_history() && config.mode == ExecutionMode::Parallel {
        return Err(Error::Contract(format!(
            "model `{}` depends on trial history and requires sequential mode",
            model.descriptor().name
        )));
    }
    Ok(())
}

/// Runs trial `index`. The source never sees this trial's settings unless
/// the model is conspiracy-class.
pub fn run_trial(
    config: &ExperimentConfig,
    model: &dyn HiddenVariableModel,
    index: u64,
    history: &[TrialRecord],
) -> Result<TrialRecord> {
    check_mode(config, model)?;
    if config.mode == ExecutionMode::Parallel && !history.is_empty() {
        return Err(Error::Contract("parallel trials must not receive a history".into()));
    }
    let mut streams = TrialStreams::new(config.seed, index);
    let table = &config.table;
    let class = model.class();
    let ctx = SourceContext::new(index, table).with_history(history);

    let ((a, b), state) = if class == ModelClass::Conspiracy {
        let settings = draw_settings(&mut streams.settings);
        let state = model.sample_source(&ctx.with_settings(settings), &mut streams.source)?;
        (settings, state)
    } else {
        let state = model.sample_source(&ctx, &mut streams.source)?;
        (draw_settings(&mut streams.settings), state)
    };

    let (x, y) = match class {
        ModelClass::LocalRealistic | ModelClass::Conspiracy => (
            model.measure(Wing::Left, a, table, &state)?,
            model.measure(Wing::Right, b, table, &state)?,
        ),
        ModelClass::Quantum | ModelClass::Signaling => {
            model.measure_joint(a, b, table, &state, &mut streams.measurement)?
        }
    };

    let revealed = if config.reveal_hidden && class.has_quadruple() {
        state.revealed_quadruple
    } else {
        None
    };
    let record = TrialRecord { index, a, b, x, y, revealed, mode: config.mode };
    if !record.is_consistent() {
        return Err(Error::Contract(format!(
            "model `{}` produced outcomes inconsistent with its quadruple at trial {index}",
            model.descriptor().name
        )));
    }
    Ok(record)
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs the configured experiment with the default worker count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<TrialLog> {
    let model = crate::models::build_model(&config.model)?;
    run_experiment_with(config, model.as_ref(), workers_from_env()?)
}

/// Runs `config.trials` trials of `model`.
///
/// In parallel mode the result is identical for every `workers` value.
pub fn run_experiment_with(
    config: &ExperimentConfig,
    model: &dyn HiddenVariableModel,
    workers: Option<usize>,
) -> Result<TrialLog> {
    check_mode(config, model)?;
    match config.mode {
        ExecutionMode::Sequential => {
            let mut log = Vec::with_capacity(config.trials as usize);
            for index in 0..config.trials {
                let rec = run_trial(config, model, index, &log)?;
                log.push(rec);
            }
            Ok(log)
        }
        ExecutionMode::Parallel => {
            let run = || {
                (0..config.trials as usize)
                    .into_par_iter()
                    .with_min_len(4096)
                    .map(|index| run_trial(config, model, index as u64, &[]))
                    .collect::<Result<Vec<_>>>()
            };
            match workers {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Contract(format!("cannot start {n} workers: {e}")))?
                    .install(run),
                None => run(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_model;

    fn config(name: &str, trials: u64) -> ExperimentConfig {
        ExperimentConfig::new(ModelDescriptor::builtin(name).unwrap(), trials, 99)
    }

    #[test]
    fn zero_trials_is_empty() {
        assert!(run_experiment(&config("uniform-lhv", 0)).unwrap().is_empty());
    }

    #[test]
    fn memory_model_rejects_parallel_mode() {
        let err = run_experiment(&config("memory-lhv", 10)).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
        assert!(err.to_string().contains("sequential"));
        let ok = run_experiment(&config("memory-lhv", 10).with_mode(ExecutionMode::Sequential)).unwrap();
        assert_eq!(ok.len(), 10);
    }

    #[test]
    fn parallel_trial_with_history_is_rejected() {
        let cfg = config("uniform-lhv", 2);
        let model = build_model(&cfg.model).unwrap();
        let first = run_trial(&cfg, model.as_ref(), 0, &[]).unwrap();
        assert!(run_trial(&cfg, model.as_ref(), 1, &[first]).is_err());
    }

    #[test]
    fn records_reveal_only_for_quadruple_models() {
        let log = run_experiment(&config("uniform-lhv", 50)).unwrap();
        assert!(log.iter().all(|r| r.revealed.is_some() && r.is_consistent()));
        let log = run_experiment(&config("singlet", 50)).unwrap();
        assert!(log.iter().all(|r| r.revealed.is_none()));
        let log = run_experiment(&config("uniform-lhv", 50).with_reveal(false)).unwrap();
        assert!(log.iter().all(|r| r.revealed.is_none()));
    }

    #[test]
    fn draw_settings_is_deterministic() {
        let mut a = CounterStream::from_key(5);
        let mut b = CounterStream::from_key(5);
        for _ in 0..100 {
            assert_eq!(draw_settings(&mut a), draw_settings(&mut b));
        }
    }

    #[test]
    fn indices_are_in_order() {
        let log = run_experiment_with(
            &config("uniform-lhv", 10_000),
            build_model(&ModelDescriptor::builtin("uniform-lhv").unwrap()).unwrap().as_ref(),
            Some(3),
        )
        .unwrap();
        assert!(log.iter().enumerate().all(|(i, r)| r.index == i as u64));
    }

    #[test]
    fn record_serialization_shape() {
        let rec = TrialRecord {
            index: 3,
            a: SettingLabel::One,
            b: SettingLabel::Two,
            x: Outcome::Plus,
            y: Outcome::Minus,
            revealed: None,
            mode: ExecutionMode::Parallel,
        };
        assert_eq!(
            serde_json::to_string(&rec).unwrap(),
            r#"{"index":3,"a":1,"b":2,"x":1,"y":-1,"revealed":null}"#
        );
    }
}
