//! Estimators for the equality form of Bell's inequality and the audits of
//! its assumptions.
//!
//! The headline statistic is
//!
//! ```text
//! Ŝ = p̂(1,2) − p̂(1,1) − p̂(2,1) − p̂(2,2),   p̂(i,j) = #{X = Y, AB = ij} / #{AB = ij}
//! ```
//!
//! which local realism with free settings keeps at or below zero in
//! expectation, and the singlet state drives to √2 − 1 at the default table.
//! The finite-sample guard is a martingale score: per trial `+4·1{X=Y}` when
//! `AB = 12` and `−4·1{X=Y}` otherwise. Its conditional mean given the past is
//! the Bell combination of that trial, hence nonpositive even for sources
//! with memory, and Azuma–Hoeffding with increments in `[−4, 4]` bounds its
//! average.

mod audits;
pub mod stats;

use std::ops::{Index, IndexMut};

use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use audits::{
    freedom_test, independence_from_table, no_signaling_from_tally, no_signaling_test, IndependenceReport, NoSignalingReport, SignalingComparison};

use crate::engine::TrialRecord;
use crate::error::{Error, Result};
use crate::models::SettingTable;
use crate::outcomes::{pair_index, Outcome, SettingLabel, SettingPair, SETTING_PAIRS};

/// A value per setting pair, serialized as `{"11": .., "12": .., "21": .., "22": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerPair<T>(pub [T; 4]);

impl<T> Index<SettingPair> for PerPair<T> {
    type Output = T;
    fn index(&self, pair: SettingPair) -> &T {
        &self.0[pair_index(pair)]
    }
}

impl<T> IndexMut<SettingPair> for PerPair<T> {
    fn index_mut(&mut self, pair: SettingPair) -> &mut T {
        &mut self.0[pair_index(pair)]
    }
}

fn pair_key(pair: SettingPair) -> String {
    format!("{}{}", pair.0, pair.1)
}

impl<T: Serialize> Serialize for PerPair<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(4))?;
        for (pair, v) in SETTING_PAIRS.iter().zip(&self.0) {
            map.serialize_entry(&pair_key(*pair), v)?;
        }
        map.end()
    }
}

impl<'de, T: Deserialize<'de> + Copy + Default> Deserialize<'de> for PerPair<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = std::collections::BTreeMap::<String, T>::deserialize(d)?;
        let mut out = PerPair::default();
        for pair in SETTING_PAIRS {
            let key = pair_key(pair);
            out[pair] = *raw
                .get(&key)
                .ok_or_else(|| serde::de::Error::custom(format!("missing setting pair `{key}`")))?;
        }
        Ok(out)
    }
}

const PAIR_12: SettingPair = (SettingLabel::One, SettingLabel::Two);

/// Running counts over a trial log; lets large logs be analysed as a stream.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BellTally {
    pub counts: PerPair<u64>,
    pub equal: PerPair<u64>,
    pub left_plus: PerPair<u64>,
    pub right_plus: PerPair<u64>,
    /// Sum of the per-trial scores, divided by 4.
    score_quarters: i64,
    pub trials: u64,
}

impl BellTally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_log<'a>(log: impl IntoIterator<Item = &'a TrialRecord>) -> Self {
        let mut t = BellTally::new();
        for r in log {
            t.push(r);
        }
        t
    }

    #[inline]
    pub fn push(&mut self, r: &TrialRecord) {
        let pair = r.settings();
        let eq = r.x == r.y;
        self.counts[pair] += 1;
        self.equal[pair] += u64::from(eq);
        self.left_plus[pair] += u64::from(r.x == Outcome::Plus);
        self.right_plus[pair] += u64::from(r.y == Outcome::Plus);
        if eq {
            self.score_quarters += if pair == PAIR_12 { 1 } else { -1 };
        }
        self.trials += 1;
    }

    /// Conditional equality frequencies; an empty pair is an error.
    pub fn frequencies(&self) -> Result<PerPair<f64>> {
        let mut p = PerPair::default();
        for pair in SETTING_PAIRS {
            let n = self.counts[pair];
            if n == 0 {
                return Err(Error::UndefinedCell(pair));
            }
            p[pair] = self.equal[pair] as f64 / n as f64;
        }
        Ok(p)
    }

    pub fn score_mean(&self) -> Result<f64> {
        if self.trials == 0 {
            return Err(Error::Contract("score mean of an empty log".into()));
        }
        Ok(4.0 * self.score_quarters as f64 / self.trials as f64)
    }

    pub fn estimate(&self, confidence: f64) -> Result<BellEstimate> {
        let p_hat = self.frequencies()?;
        Ok(BellEstimate {
            p_hat,
            counts: self.counts,
            s_hat: bell_statistic(&p_hat),
            score_mean: self.score_mean()?,
            epsilon: concentration_bound(self.trials, confidence),
            confidence,
            trials: self.trials,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellEstimate {
    pub p_hat: PerPair<f64>,
    pub counts: PerPair<u64>,
    pub s_hat: f64,
    pub score_mean: f64,
    pub epsilon: f64,
    pub confidence: f64,
    pub trials: u64,
}

impl BellEstimate {
    /// `Ŝ ≤ ε`: nothing beyond what local realism allows at this confidence.
    pub fn consistent_with_local_realism(&self) -> bool {
        self.s_hat <= self.epsilon
    }
}

/// `p̂(i,j)` and the trial count of each setting pair.
pub fn conditional_equality_freqs(log: &[TrialRecord]) -> Result<(PerPair<f64>, PerPair<u64>)> {
    let t = BellTally::from_log(log);
    Ok((t.frequencies()?, t.counts))
}

/// `p(1,2) − p(1,1) − p(2,1) − p(2,2)`.
pub fn bell_statistic(p: &PerPair<f64>) -> f64 {
    use SettingLabel::{One, Two};
    p[(One, Two)] - p[(One, One)] - p[(Two, One)] - p[(Two, Two)]
}

/// The singlet value of the Bell combination, from `Pr{X=Y} = (1 − a·b)/2`.
pub fn chsh_quantum_prediction(table: &SettingTable) -> f64 {
    use SettingLabel::{One, Two};
    let c = |a, b| table.correlation_dot(a, b);
    (c(One, One) + c(Two, One) + c(Two, Two) - c(One, Two) - 2.0) / 2.0
}

pub fn martingale_score_mean(log: &[TrialRecord]) -> Result<f64> {
    BellTally::from_log(log).score_mean()
}

/// `ε = sqrt(32 ln(1/(1 − confidence)) / n)`.
///
/// Panics if `n_trials` is zero or `confidence` is outside `(0, 1)`.
pub fn concentration_bound(n_trials: u64, confidence: f64) -> f64 {
    assert!(n_trials >= 1, "concentration bound needs at least one trial");
    assert!(confidence > 0.0 && confidence < 1.0, "confidence must lie in (0, 1)");
    (32.0 * (1.0 / (1.0 - confidence)).ln() / n_trials as f64).sqrt()
}

/// Full estimate for a log.
pub fn estimate(log: &[TrialRecord], confidence: f64) -> Result<BellEstimate> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Config(format!("confidence {confidence} outside (0, 1)")));
    }
    BellTally::from_log(log).estimate(confidence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ExecutionMode;
    use crate::models::{Direction, Plane};
    use SettingLabel::{One, Two};

    pub(crate) fn rec(index: u64, a: SettingLabel, b: SettingLabel, x: Outcome, y: Outcome) -> TrialRecord {
        TrialRecord { index, a, b, x, y, revealed: None, mode: ExecutionMode::Parallel }
    }

    #[test]
    fn all_equal_one_per_pair() {
        let log: Vec<_> = SETTING_PAIRS
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| rec(i as u64, a, b, Outcome::Plus, Outcome::Plus))
            .collect();
        let (p, counts) = conditional_equality_freqs(&log).unwrap();
        assert_eq!(p.0, [1.0; 4]);
        assert_eq!(counts.0, [1; 4]);
    }

    #[test]
    fn missing_pair_is_named() {
        let log = vec![
            rec(0, One, One, Outcome::Plus, Outcome::Plus),
            rec(1, Two, One, Outcome::Plus, Outcome::Plus),
            rec(2, Two, Two, Outcome::Plus, Outcome::Plus),
        ];
        let err = conditional_equality_freqs(&log).unwrap_err();
        assert!(matches!(err, Error::UndefinedCell((One, Two))));
        assert!(err.to_string().contains("(1, 2)"));
    }

    #[test]
    fn bell_statistic_arithmetic() {
        assert_eq!(bell_statistic(&PerPair([0.25; 4])), -0.5);
        // order in PerPair is 11, 12, 21, 22
        assert_eq!(bell_statistic(&PerPair([0.0, 1.0, 0.0, 0.0])), 1.0);
    }

    #[test]
    fn quantum_prediction_cases() {
        let got = chsh_quantum_prediction(&SettingTable::default());
        assert!((got - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        // c11 = c22 = 1, c12 = c21 = 0
        let aligned = SettingTable::from_angles(Plane::Xy, [0.0, 90.0], [0.0, 90.0]);
        assert!(chsh_quantum_prediction(&aligned).abs() < 1e-15);
        let d = Direction::in_plane(Plane::Xy, 30.0);
        assert!(chsh_quantum_prediction(&SettingTable::new(d, d, d, d)).abs() < 1e-15);
    }

    #[test]
    fn score_definition() {
        let s = martingale_score_mean(&[rec(0, One, Two, Outcome::Plus, Outcome::Plus)]).unwrap();
        assert_eq!(s, 4.0);
        let s = martingale_score_mean(&[rec(0, One, One, Outcome::Minus, Outcome::Minus)]).unwrap();
        assert_eq!(s, -4.0);
        let s = martingale_score_mean(&[rec(0, Two, Two, Outcome::Minus, Outcome::Plus)]).unwrap();
        assert_eq!(s, 0.0);
        assert!(martingale_score_mean(&[]).is_err());
    }

    #[test]
    fn bound_values() {
        // sqrt(32 ln 100 / 10⁴) = 0.121 39...
        let e = concentration_bound(10_000, 0.99);
        assert!((e - (32.0 * 100f64.ln() / 1e4).sqrt()).abs() < 1e-15);
        assert!((e - 0.1214).abs() < 1e-4);
        let ratio = concentration_bound(40_000, 0.99) / e;
        assert!((ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn estimate_rejects_bad_confidence() {
        let log = vec![rec(0, One, One, Outcome::Plus, Outcome::Plus)];
        assert!(matches!(estimate(&log, 1.0), Err(Error::Config(_))));
        assert!(matches!(estimate(&log, 0.0), Err(Error::Config(_))));
    }

    #[test]
    fn per_pair_serde_shape() {
        let p = PerPair([1u64, 2, 3, 4]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"11":1,"12":2,"21":3,"22":4}"#);
        let back: PerPair<u64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<PerPair<u64>>(r#"{"11":1}"#).is_err());
    }
}
