//! Enumerates the sixteen outcome quadruples and tabulates the parity facts.
//!
//! ```text
//! cargo run --example parity_oracle
//! ```

use bellharness::outcomes::{delta, enumerate_quadruples, equality_count, product_identity_holds};

fn main() {
    println!("x1 x2 y1 y2   equalities  delta  identity");
    for q in enumerate_quadruples() {
        let v = q.values();
        println!(
            "{:>2} {:>2} {:>2} {:>2}   {:>10}  {:>5}  {}",
            v[0],
            v[1],
            v[2],
            v[3],
            equality_count(&q),
            delta(&q),
            product_identity_holds(&q)
        );
    }
    let report = bellharness::cli::oracle();
    println!("\nequality counts {:?}", report.equality_distribution);
    println!("delta values    {:?}", report.delta_distribution);
}
