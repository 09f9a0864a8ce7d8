//! Runs each local-realistic model over a batch of seeds and reports how
//! often the Bell statistic stays below the concentration bound.
//!
//! ```text
//! cargo run --release --example local_models [trials] [seeds]
//! ```

use bellharness::analysis::{concentration_bound, estimate};
use bellharness::engine::{run_experiment, ExecutionMode, ExperimentConfig};
use bellharness::models::ModelDescriptor;

fn main() -> bellharness::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("integer argument"));
    let trials = args.next().unwrap_or(100_000);
    let seeds = args.next().unwrap_or(20);
    let eps = concentration_bound(trials, 0.99);
    println!("N = {trials}, epsilon(0.99) = {eps:.5}\n");
    println!("{:<14} {:>10} {:>10} {:>8}", "model", "mean S", "max S", "within");
    for (name, mode) in [
        ("uniform-lhv", ExecutionMode::Parallel),
        ("rotating-lhv", ExecutionMode::Parallel),
        ("memory-lhv", ExecutionMode::Sequential),
    ] {
        let mut stats = Vec::new();
        for seed in 0..seeds {
            let config = ExperimentConfig::new(ModelDescriptor::builtin(name).unwrap(), trials, seed).with_mode(mode);
            stats.push(estimate(&run_experiment(&config)?, 0.99)?.s_hat);
        }
        let mean = stats.iter().sum::<f64>() / stats.len() as f64;
        let max = stats.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let within = stats.iter().filter(|s| **s <= eps).count();
        println!("{name:<14} {mean:>+10.5} {max:>+10.5} {within:>5}/{seeds}");
    }
    Ok(())
}
