//! Simulates the singlet state at the default settings and compares the Bell
//! statistic with the closed form and the local-realism bound.
//!
//! ```text
//! cargo run --release --example quantum_violation [trials] [seed]
//! ```

use bellharness::analysis::{chsh_quantum_prediction, estimate};
use bellharness::engine::{run_experiment, ExperimentConfig};
use bellharness::models::{ModelDescriptor, Plane, SettingTable};
use bellharness::outcomes::SETTING_PAIRS;

fn main() -> bellharness::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("integer argument"));
    let trials = args.next().unwrap_or(1_000_000);
    let seed = args.next().unwrap_or(31);

    let table = SettingTable::default();
    let config = ExperimentConfig::new(ModelDescriptor::builtin("singlet").unwrap(), trials, seed);
    let est = estimate(&run_experiment(&config)?, 0.99)?;
    for pair in SETTING_PAIRS {
        let expected = (1.0 - table.left(pair.0).dot(table.right(pair.1))) / 2.0;
        println!("Pr(X=Y | {}{}) = {:.5}   (singlet law {:.5})", pair.0, pair.1, est.p_hat[pair], expected);
    }
    println!("S_hat      = {:+.5}", est.s_hat);
    println!("prediction = {:+.5}", chsh_quantum_prediction(&table));
    println!("epsilon    = {:.5}", est.epsilon);
    println!("violation  = {}", !est.consistent_with_local_realism());

    // The prediction depends on the angles; aligned settings give no violation.
    let flat = SettingTable::from_angles(Plane::Xy, [0.0, 0.0], [0.0, 0.0]);
    println!("\nprediction with every direction at 0 deg: {:+.5}", chsh_quantum_prediction(&flat));
    Ok(())
}
