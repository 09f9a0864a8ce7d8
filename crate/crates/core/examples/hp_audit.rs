//! Integrates a slab density family over its slabs and audits whether the
//! slab weight depends on the remote setting.
//!
//! ```text
//! cargo run --release --example hp_audit
//! ```

use std::sync::Arc;

use bellharness::hpdensity::{
    locality_audit, marginal_i, OutcomeFields, QuadratureConfig, Residual, SlabDensitySpec, SlabIndex,
    UniformProductFamily,
};
use bellharness::models::{Direction, Plane};

fn main() -> bellharness::Result<()> {
    let quad = QuadratureConfig::default();
    let unit = OutcomeFields::unit();
    let deg = |d| Direction::in_plane(Plane::Xy, d);

    println!("Pr(i = -2) for the reference family");
    print!("{:>8}", "a \\ b");
    let angles = [0.0, 30.0, 60.0, 90.0];
    for b in angles {
        print!("{b:>8}");
    }
    println!();
    for a in angles {
        print!("{a:>8}");
        for b in angles {
            let spec = SlabDensitySpec::reference(1, deg(a), deg(b), Residual::Complement)?;
            print!("{:>8.4}", marginal_i(&spec, &unit, SlabIndex::FIRST, &quad)?.value);
        }
        println!();
    }

    let grid: Vec<Direction> = [0.0, 30.0, 45.0, 60.0, 90.0].map(deg).to_vec();
    let reference = locality_audit(
        |a, b| SlabDensitySpec::reference(1, *a, *b, Residual::Complement),
        &unit,
        &grid,
        &grid,
        &quad,
    )?;
    println!("\nreference family: {:?}, max deviation {:.6}", reference.verdict, reference.max_deviation());
    for w in reference.witnesses.iter().take(3) {
        println!(
            "    slab {}: varying {:?} moves the weight by {:.6}",
            w.slab.0, w.varied, w.deviation
        );
    }

    let uniform = locality_audit(
        |a, b| SlabDensitySpec::new(1, *a, *b, Arc::new(UniformProductFamily::covering(1))),
        &unit,
        &grid,
        &grid,
        &quad,
    )?;
    println!("uniform family:   {:?}, max deviation {:.6}", uniform.verdict, uniform.max_deviation());
    Ok(())
}
