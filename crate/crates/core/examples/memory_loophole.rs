//! An adaptive source that watches the past and bets on the next setting
//! pair. Re-randomized settings keep its score inside the martingale bound.
//!
//! ```text
//! cargo run --release --example memory_loophole [trials] [seeds]
//! ```

use bellharness::analysis::{concentration_bound, estimate};
use bellharness::engine::{run_experiment, ExecutionMode, ExperimentConfig};
use bellharness::models::ModelDescriptor;

fn main() -> bellharness::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("integer argument"));
    let trials = args.next().unwrap_or(10_000);
    let seeds = args.next().unwrap_or(200);
    let eps = concentration_bound(trials, 0.99);
    for strength in [0.0, 0.5, 1.0] {
        let desc = ModelDescriptor::builtin("memory-lhv").unwrap().with_param("strength", strength);
        let mut alarms = 0;
        let mut mean = 0.0;
        for seed in 0..seeds {
            let config = ExperimentConfig::new(desc.clone(), trials, seed).with_mode(ExecutionMode::Sequential);
            let est = estimate(&run_experiment(&config)?, 0.99)?;
            mean += est.score_mean / seeds as f64;
            alarms += usize::from(est.score_mean > eps);
        }
        println!(
            "strength {strength:.1}: mean score {mean:+.5}, false alarms {alarms}/{seeds} (epsilon {eps:.4})"
        );
    }
    // The same model cannot run as independent laboratories.
    let parallel = ExperimentConfig::new(ModelDescriptor::builtin("memory-lhv").unwrap(), 10, 0);
    println!("\nparallel mode: {}", run_experiment(&parallel).unwrap_err());
    Ok(())
}
