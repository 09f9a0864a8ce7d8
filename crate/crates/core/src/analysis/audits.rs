//! Freedom and no-signaling audits.

use serde::{Deserialize, Serialize};

use super::stats::{chi_square_sf, two_proportion_z};
use super::BellTally;
use crate::engine::TrialRecord;
use crate::error::{Error, Result};
use crate::models::Wing;
use crate::outcomes::{pair_index, SettingLabel, SETTING_PAIRS};

/// Chi-square test of independence between the setting pair and the
/// revealed quadruple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Observed counts, rows in setting-pair order 11, 12, 21, 22, columns by
    /// quadruple code.
    pub table: Vec<[u64; 16]>,
}

/// Pearson chi-square on the 4 × 16 table of (setting pair) × (quadruple).
///
/// Rows and columns with zero total have zero expected count; they are
/// dropped and the degrees of freedom shrink accordingly.
pub fn freedom_test(log: &[TrialRecord]) -> Result<IndependenceReport> {
    let mut table = vec![[0u64; 16]; 4];
    for r in log {
        let q = r.revealed.ok_or(Error::MissingRevealed(r.index))?;
        table[pair_index(r.settings())][q.code()] += 1;
    }
    independence_from_table(table)
}

/// [`freedom_test`] on an already tallied 4 × 16 table.
pub fn independence_from_table(table: Vec<[u64; 16]>) -> Result<IndependenceReport> {
    if table.len() != 4 {
        return Err(Error::Contract(format!("expected 4 table rows, got {}", table.len())));
    }
    let row_tot: Vec<u64> = table.iter().map(|row| row.iter().sum()).collect();
    let col_tot: Vec<u64> = (0..16).map(|c| table.iter().map(|row| row[c]).sum()).collect();
    let rows: Vec<usize> = (0..4).filter(|&r| row_tot[r] > 0).collect();
    let cols: Vec<usize> = (0..16).filter(|&c| col_tot[c] > 0).collect();
    if rows.len() < 2 {
        return Err(Error::DegenerateTable(format!(
            "{} setting pair(s) observed; need at least two",
            rows.len()
        )));
    }
    if cols.len() < 2 {
        return Err(Error::DegenerateTable(format!(
            "{} distinct quadruple(s) observed; need at least two",
            cols.len()
        )));
    }
    let n: u64 = row_tot.iter().sum();
    let n = n as f64;
    let mut statistic = 0.0;
    for &r in &rows {
        for &c in &cols {
            let expected = row_tot[r] as f64 * col_tot[c] as f64 / n;
            let d = table[r][c] as f64 - expected;
            statistic += d * d / expected;
        }
    }
    let dof = (rows.len() - 1) * (cols.len() - 1);
    Ok(IndependenceReport { statistic, dof, p_value: chi_square_sf(statistic, dof), table })
}

/// One marginal comparison: a wing's `Pr{outcome = +1}` at its own fixed
/// setting, under the two settings of the remote wing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalingComparison {
    pub wing: Wing,
    pub local_setting: SettingLabel,
    pub plus_rate_remote_1: f64,
    pub plus_rate_remote_2: f64,
    pub trials_remote_1: u64,
    pub trials_remote_2: u64,
    pub z: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoSignalingReport {
    pub comparisons: Vec<SignalingComparison>,
    /// Smallest per-comparison p-value.
    pub min_p_value: f64,
    /// Bonferroni-adjusted family p-value over all comparisons.
    pub p_value: f64,
}

impl NoSignalingReport {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Two-proportion z-tests of each wing's marginal against the remote setting.
pub fn no_signaling_test(log: &[TrialRecord]) -> Result<NoSignalingReport> {
    no_signaling_from_tally(&BellTally::from_log(log))
}

/// [`no_signaling_test`] on precomputed counts.
pub fn no_signaling_from_tally(t: &BellTally) -> Result<NoSignalingReport> {
    for pair in SETTING_PAIRS {
        if t.counts[pair] == 0 {
            return Err(Error::UndefinedCell(pair));
        }
    }
    let mut comparisons = Vec::with_capacity(4);
    for wing in [Wing::Left, Wing::Right] {
        for local in SettingLabel::BOTH {
            let pair = |remote| match wing {
                Wing::Left => (local, remote),
                Wing::Right => (remote, local),
            };
            let plus = match wing {
                Wing::Left => &t.left_plus,
                Wing::Right => &t.right_plus,
            };
            let (p1, p2) = (pair(SettingLabel::One), pair(SettingLabel::Two));
            let (k1, n1, k2, n2) = (plus[p1], t.counts[p1], plus[p2], t.counts[p2]);
            let (z, p_value) = two_proportion_z(k1, n1, k2, n2);
            comparisons.push(SignalingComparison {
                wing,
                local_setting: local,
                plus_rate_remote_1: k1 as f64 / n1 as f64,
                plus_rate_remote_2: k2 as f64 / n2 as f64,
                trials_remote_1: n1,
                trials_remote_2: n2,
                z,
                p_value,
            });
        }
    }
    let min_p_value = comparisons.iter().map(|c| c.p_value).fold(1.0, f64::min);
    let p_value = (min_p_value * comparisons.len() as f64).min(1.0);
    Ok(NoSignalingReport { comparisons, min_p_value, p_value })
}
