//! Command implementations behind the `bellharness` binary.
//!
//! Each `cmd_*` function prints its diagnostics and returns the process exit
//! code. The code set is fixed: see [`exit`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    chsh_quantum_prediction, independence_from_table, no_signaling_from_tally, BellEstimate, BellTally,
    IndependenceReport, NoSignalingReport,
};
use crate::config::{ConfigFile, HpSection};
use crate::engine::{run_experiment_with, workers_from_env, ExperimentConfig};
use crate::error::{Error, Result};
use crate::hpdensity::{locality_audit, LocalityAuditReport, OutcomeFields, SlabIndex, Verdict};
use crate::models::{build_model, SettingTable};
use crate::outcomes::{delta, enumerate_quadruples, equality_count, pair_index, product_identity_holds, SETTING_PAIRS};
use crate::trial_log::{open_log, write_log};

pub mod exit {
    pub const OK: i32 = 0;
    pub const ORACLE_FAILURE: i32 = 1;
    /// Bell statistic above the local-realism bound.
    pub const VIOLATION: i32 = 10;
    /// Slab law depends on the remote setting.
    pub const NON_LOCAL: i32 = 20;
    pub const CONFIG: i32 = 64;
    pub const CONTRACT: i32 = 65;
}

pub const LOG_FILE: &str = "trials.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const HP_REPORT_FILE: &str = "hp_audit.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub artifact_version: String,
    pub timestamp: String,
    pub output_paths: Vec<String>,
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.into()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn report_error(cmd: &str, e: &Error) -> i32 {
    eprintln!("{cmd}: {e}");
    e.exit_code()
}

/// Runs the experiment in `config_path` and writes the log and manifest.
pub fn simulate(config_path: &Path, out_dir: &Path) -> Result<RunManifest> {
    let config = ConfigFile::load(config_path)?.experiment()?;
    let model = build_model(&config.model)?;
    let log = run_experiment_with(&config, model.as_ref(), workers_from_env()?)?;
    fs::create_dir_all(out_dir)?;
    let log_path = out_dir.join(LOG_FILE);
    write_log(&log_path, &log)?;
    let manifest = RunManifest {
        config,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: timestamp(),
        output_paths: vec![log_path.display().to_string()],
    };
    write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn cmd_simulate(config_path: &Path, out_dir: &Path) -> i32 {
    match simulate(config_path, out_dir) {
        Ok(m) => {
            println!(
                "simulated {} trials of `{}` (seed {}, {:?}) -> {}",
                m.config.trials,
                m.config.model.name,
                m.config.seed,
                m.config.mode,
                m.output_paths.join(", ")
            );
            exit::OK
        }
        Err(e) => report_error("simulate", &e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub log: String,
    pub estimate: BellEstimate,
    pub quantum_prediction: f64,
    pub table: SettingTable,
    pub no_signaling: NoSignalingReport,
    /// Present when every record carries its quadruple.
    pub freedom: Option<IndependenceReport>,
    pub freedom_note: Option<String>,
    /// Manifest found next to the log, echoed for provenance.
    pub provenance: Option<serde_json::Value>,
}

/// Streams a trial log and computes every estimate and audit that applies.
pub fn analyze(log_path: &Path, table_path: &Path, confidence: f64, out: Option<&Path>) -> Result<AnalysisSummary> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Config(format!("confidence {confidence} outside (0, 1)")));
    }
    let table = ConfigFile::load(table_path)?.setting_table()?;
    let mut tally = BellTally::new();
    let mut quad_table = vec![[0u64; 16]; 4];
    let mut missing = None;
    for rec in open_log(log_path)? {
        let rec = rec?;
        tally.push(&rec);
        match rec.revealed {
            Some(q) => quad_table[pair_index(rec.settings())][q.code()] += 1,
            None => missing = missing.or(Some(rec.index)),
        }
    }
    let estimate = tally.estimate(confidence)?;
    let no_signaling = no_signaling_from_tally(&tally)?;
    let (freedom, freedom_note) = match missing {
        Some(idx) => (None, Some(Error::MissingRevealed(idx).to_string())),
        None => match independence_from_table(quad_table) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        },
    };
    let dir = log_path.parent().unwrap_or(Path::new("."));
    let provenance = fs::read_to_string(dir.join(MANIFEST_FILE))
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok());
    let summary = AnalysisSummary {
        log: log_path.display().to_string(),
        estimate,
        quantum_prediction: chsh_quantum_prediction(&table),
        table,
        no_signaling,
        freedom,
        freedom_note,
        provenance,
    };
    let out = out.map_or_else(|| dir.join(SUMMARY_FILE), Path::to_path_buf);
    write_json(&out, &summary)?;
    Ok(summary)
}

fn print_summary(s: &AnalysisSummary) {
    let e = &s.estimate;
    println!("pair   trials      Pr(X=Y)");
    for pair in SETTING_PAIRS {
        println!("{}{}   {:>10}  {:.6}", pair.0, pair.1, e.counts[pair], e.p_hat[pair]);
    }
    println!("S_hat            {:+.6}", e.s_hat);
    println!("score mean       {:+.6}", e.score_mean);
    println!("epsilon ({:.3})  {:.6}", e.confidence, e.epsilon);
    println!("quantum value    {:+.6}", s.quantum_prediction);
    println!("no-signaling p   {:.3e}", s.no_signaling.p_value);
    match (&s.freedom, &s.freedom_note) {
        (Some(f), _) => println!("freedom p        {:.3e} (chi2 = {:.2}, dof = {})", f.p_value, f.statistic, f.dof),
        (None, Some(note)) => println!("freedom          skipped: {note}"),
        (None, None) => {}
    }
    if e.consistent_with_local_realism() {
        println!("verdict          consistent with local realism (S_hat <= epsilon)");
    } else {
        println!("verdict          Bell inequality violated beyond the bound");
    }
}

pub fn cmd_analyze(log_path: &Path, table_path: &Path, confidence: f64, out: Option<&Path>) -> i32 {
    match analyze(log_path, table_path, confidence, out) {
        Ok(s) => {
            print_summary(&s);
            if s.estimate.consistent_with_local_realism() {
                exit::OK
            } else {
                exit::VIOLATION
            }
        }
        Err(e) => report_error("analyze", &e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpAuditOutput {
    pub config: HpSection,
    pub report: LocalityAuditReport,
}

pub fn hp_audit(config_path: &Path, out: Option<&Path>) -> Result<HpAuditOutput> {
    let hp = ConfigFile::load(config_path)?.hp()?;
    let report = locality_audit(hp.spec_builder(), &OutcomeFields::unit(), &hp.a_grid(), &hp.b_grid(), &hp.quadrature()?)?;
    let output = HpAuditOutput { config: hp, report };
    let out = match out {
        Some(p) => p.to_path_buf(),
        None => config_path.parent().map_or_else(|| PathBuf::from(HP_REPORT_FILE), |d| d.join(HP_REPORT_FILE)),
    };
    write_json(&out, &output)?;
    Ok(output)
}

pub fn cmd_hp_audit(config_path: &Path, out: Option<&Path>) -> i32 {
    match hp_audit(config_path, out) {
        Ok(o) => {
            let r = &o.report;
            println!("slab   b-dependence   a-dependence");
            for (i, b) in &r.per_slab_b_dependence {
                println!("{:>4}   {:.9}    {:.9}", i.0, b, r.per_slab_a_dependence[i]);
            }
            println!("mass range       [{:.9}, {:.9}]", r.normalization_range.0, r.normalization_range.1);
            for w in &r.quadrature_warnings {
                println!("warning: {w}");
            }
            match r.verdict {
                Verdict::Local => {
                    println!("verdict          local");
                    exit::OK
                }
                Verdict::NonLocal => {
                    let dev = r.per_slab_b_dependence.get(&SlabIndex::FIRST).copied().unwrap_or(0.0);
                    println!("verdict          non-local (max deviation {:.9}, slab -2 b-dependence {:.9})", r.max_deviation(), dev);
                    exit::NON_LOCAL
                }
            }
        }
        Err(e) => report_error("hp-audit", &e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub quadruples: usize,
    pub equality_distribution: BTreeMap<u8, usize>,
    pub delta_distribution: BTreeMap<i8, usize>,
    pub min_delta: i8,
    pub max_delta: i8,
    pub product_identity_failures: usize,
    pub passed: bool,
}

/// Brute-force check of the parity facts over all sixteen quadruples.
pub fn oracle() -> OracleReport {
    let all = enumerate_quadruples();
    let mut eq_dist = BTreeMap::new();
    let mut delta_dist = BTreeMap::new();
    let mut failures = 0;
    for q in &all {
        *eq_dist.entry(equality_count(q)).or_insert(0) += 1;
        *delta_dist.entry(delta(q)).or_insert(0) += 1;
        failures += usize::from(!product_identity_holds(q));
    }
    let min_delta = *delta_dist.keys().next().unwrap_or(&0);
    let max_delta = *delta_dist.keys().next_back().unwrap_or(&0);
    let distinct: std::collections::HashSet<_> = all.iter().collect();
    let passed = all.len() == 16
        && distinct.len() == 16
        && eq_dist.keys().all(|k| [0, 2, 4].contains(k))
        && delta_dist.keys().all(|k| [0, -2].contains(k))
        && failures == 0;
    OracleReport {
        quadruples: all.len(),
        equality_distribution: eq_dist,
        delta_distribution: delta_dist,
        min_delta,
        max_delta,
        product_identity_failures: failures,
        passed,
    }
}

fn fmt_distribution<K: std::fmt::Display>(m: &BTreeMap<K, usize>) -> String {
    m.iter().map(|(k, v)| format!("{k}: {v}")).collect::<Vec<_>>().join(", ")
}

pub fn cmd_oracle() -> i32 {
    let r = oracle();
    println!("quadruples                 {}", r.quadruples);
    println!("equality count             {{{}}}", fmt_distribution(&r.equality_distribution));
    println!("delta                      {{{}}}", fmt_distribution(&r.delta_distribution));
    println!("max delta                  {}", r.max_delta);
    println!("min delta                  {}", r.min_delta);
    println!("product identity failures  {}", r.product_identity_failures);
    if r.passed {
        println!("oracle: all checks passed");
        exit::OK
    } else {
        eprintln!("oracle: parity checks FAILED");
        exit::ORACLE_FAILURE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_distribution() {
        let r = oracle();
        assert!(r.passed);
        assert_eq!(r.equality_distribution, BTreeMap::from([(0, 2), (2, 12), (4, 2)]));
        assert_eq!((r.min_delta, r.max_delta), (-2, 0));
    }
}
