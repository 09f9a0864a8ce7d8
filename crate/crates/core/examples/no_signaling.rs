//! Compares each wing's outcome rate across the remote setting, for the
//! singlet and for a model that leaks the remote setting.
//!
//! ```text
//! cargo run --release --example no_signaling [trials]
//! ```

use bellharness::analysis::no_signaling_test;
use bellharness::engine::{run_experiment, ExperimentConfig};
use bellharness::models::ModelDescriptor;

fn main() -> bellharness::Result<()> {
    let trials = std::env::args().nth(1).map_or(1_000_000, |a| a.parse().expect("integer argument"));
    for (name, shift) in [("singlet", None), ("signaling", Some(0.0)), ("signaling", Some(0.01)), ("signaling", Some(0.1))] {
        let mut desc = ModelDescriptor::builtin(name).unwrap();
        if let Some(s) = shift {
            desc = desc.with_param("shift", s);
        }
        let report = no_signaling_test(&run_experiment(&ExperimentConfig::new(desc, trials, 71))?)?;
        println!("{name} shift {:?}: family p = {:.3e}", shift.unwrap_or(0.0), report.p_value);
        for c in &report.comparisons {
            println!(
                "    {:?} wing, local setting {}: Pr(+) {:.4} vs {:.4}, z = {:+.2}",
                c.wing, c.local_setting, c.plus_rate_remote_1, c.plus_rate_remote_2, c.z
            );
        }
    }
    Ok(())
}
