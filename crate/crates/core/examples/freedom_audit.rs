//! Tests whether the settings are independent of the hidden quadruple, for
//! an honest source and for a conspiring one.
//!
//! ```text
//! cargo run --release --example freedom_audit [trials]
//! ```

use bellharness::analysis::{estimate, freedom_test};
use bellharness::engine::{run_experiment, ExperimentConfig};
use bellharness::models::ModelDescriptor;

fn main() -> bellharness::Result<()> {
    let trials = std::env::args().nth(1).map_or(200_000, |a| a.parse().expect("integer argument"));
    for (name, strength) in [("uniform-lhv", None), ("conspiracy", Some(0.05)), ("conspiracy", Some(0.5))] {
        let mut desc = ModelDescriptor::builtin(name).unwrap();
        if let Some(s) = strength {
            desc = desc.with_param("strength", s);
        }
        let log = run_experiment(&ExperimentConfig::new(desc, trials, 61))?;
        let report = freedom_test(&log)?;
        let est = estimate(&log, 0.99)?;
        println!(
            "{name:<12} strength {:<5} chi2 = {:>10.1} (dof {}), p = {:.3e}, S_hat = {:+.4}",
            strength.map_or("-".into(), |s| s.to_string()),
            report.statistic,
            report.dof,
            report.p_value,
            est.s_hat
        );
    }
    Ok(())
}
