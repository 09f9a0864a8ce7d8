use std::sync::Arc;

use bellharness::hpdensity::{
    density, expectation, kappa, kappa2, locality_audit, marginal_i, total_mass, OutcomeFields, QuadratureConfig,
    Residual, SlabDensitySpec, SlabIndex, Verdict, WeightFamily,
};
use bellharness::models::{Direction, Plane, Wing};
use bellharness::outcomes::Outcome;
use proptest::prelude::*;

fn deg(d: f64) -> Direction {
    Direction::in_plane(Plane::Xy, d)
}

fn reference(a: Direction, b: Direction, residual: Residual) -> SlabDensitySpec {
    SlabDensitySpec::reference(1, a, b, residual).unwrap()
}

fn grid_points(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k).map(|j| lo + (hi - lo) * (j as f64 + 0.5) / k as f64).collect()
}

/// Weights linear within each slab: σ = a₁²·frac(u), τ = (1 + b₂²)·frac(v).
#[derive(Debug)]
struct Ramp;

impl WeightFamily for Ramp {
    fn sigma(&self, a: &Direction, u: f64) -> f64 {
        a.x() * a.x() * (u - u.floor())
    }
    fn tau(&self, b: &Direction, v: f64) -> f64 {
        (1.0 + b.y() * b.y()) * (v - v.floor())
    }
}

#[test]
fn kappa_collapses_kappa2() {
    let n = 2;
    let pts = grid_points(-3.0, 3.0 * n as f64, 100);
    for &u in &pts {
        for &v in &pts {
            for i in SlabIndex::all(n) {
                assert_eq!(kappa(u, v, i), kappa2(u, v, i, i));
                let sum: u8 = SlabIndex::all(n).map(|j| kappa2(u, v, i, j)).sum();
                assert_eq!(sum, kappa(u, v, i));
            }
            let hits: u8 = SlabIndex::all(n).map(|i| kappa(u, v, i)).sum();
            assert_eq!(hits, u8::from(u.floor() == v.floor()));
        }
    }
}

#[test]
fn density_is_rank_one_per_slab() {
    let pts = grid_points(-3.0, 3.0, 24);
    for (a, b) in [(deg(0.0), deg(45.0)), (deg(30.0), deg(80.0)), (deg(90.0), deg(10.0))] {
        for spec in [
            reference(a, b, Residual::Complement),
            SlabDensitySpec::new(1, a, b, Arc::new(Ramp)).unwrap(),
        ] {
            for i in spec.slabs() {
                for &u in &pts {
                    for &v in &pts {
                        for &(u2, v2) in &[(pts[3], pts[17]), (pts[9], pts[9]), (pts[20], pts[1])] {
                            let lhs = density(&spec, u, v, i) * density(&spec, u2, v2, i);
                            let rhs = density(&spec, u, v2, i) * density(&spec, u2, v, i);
                            assert!((lhs - rhs).abs() < 1e-14);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn reference_marginal_on_direction_grid() {
    let quad = QuadratureConfig::default();
    let unit = OutcomeFields::unit();
    for ka in 0..10 {
        for kb in 0..10 {
            let (a, b) = (deg(10.0 * ka as f64), deg(10.0 * kb as f64));
            let expected = (10.0 * ka as f64).to_radians().cos().abs() * (10.0 * kb as f64).to_radians().cos().abs();
            let m = marginal_i(&reference(a, b, Residual::Complement), &unit, SlabIndex(-2), &quad).unwrap();
            assert!((m.value - expected).abs() < 1e-9);
            assert!(m.converged);
        }
    }
}

#[test]
fn ramp_marginal_matches_closed_form() {
    let quad = QuadratureConfig::default();
    let unit = OutcomeFields::unit();
    for (a, b) in [(deg(0.0), deg(0.0)), (deg(20.0), deg(70.0)), (deg(55.0), deg(90.0))] {
        let spec = SlabDensitySpec::new(1, a, b, Arc::new(Ramp)).unwrap();
        // ∫ frac = 1/2 on every slab side
        let per_slab = a.x() * a.x() * 0.5 * (1.0 + b.y() * b.y()) * 0.5;
        for i in spec.slabs() {
            let m = marginal_i(&spec, &unit, i, &quad).unwrap();
            assert!((m.value - per_slab).abs() < 1e-12, "slab {i:?}");
        }
        let total = total_mass(&spec, &quad).unwrap();
        assert!((total.value - 6.0 * per_slab).abs() < 1e-11);
    }
}

#[test]
fn outcome_signs_flip_the_integral() {
    let quad = QuadratureConfig::default();
    let spec = reference(deg(20.0), deg(40.0), Residual::Complement);
    let plus = expectation(&spec, &OutcomeFields::unit(), &quad).unwrap().value;
    let minus = expectation(&spec, &OutcomeFields::constant(Outcome::Minus, Outcome::Plus), &quad).unwrap().value;
    assert!((plus - 1.0).abs() < 1e-12 && (minus + 1.0).abs() < 1e-12);
}

#[test]
fn reference_audit_reports_remote_dependence() {
    let quad = QuadratureConfig::default();
    let grid: Vec<Direction> = [0.0, 30.0, 45.0, 60.0, 90.0].map(deg).to_vec();
    let report = locality_audit(
        |a, b| Ok(reference(*a, *b, Residual::Complement)),
        &OutcomeFields::unit(),
        &grid,
        &grid,
        &quad,
    )
    .unwrap();
    assert_eq!(report.verdict, Verdict::NonLocal);
    assert!((report.per_slab_b_dependence[&SlabIndex(-2)] - 1.0).abs() < 1e-9);
    assert!((report.max_deviation() - 1.0).abs() < 1e-9);
    assert!(report.quadrature_warnings.is_empty());
    assert!((report.normalization_range.0 - 1.0).abs() < 1e-12 && (report.normalization_range.1 - 1.0).abs() < 1e-12);
    let w = report.witnesses.iter().find(|w| w.slab == SlabIndex(-2) && w.varied == Wing::Right).unwrap();
    assert!((w.deviation - 1.0).abs() < 1e-9);
    assert!((w.fixed.x().abs() - 1.0).abs() < 1e-12);
}

#[test]
fn audit_is_symmetric_without_residual() {
    let quad = QuadratureConfig::default();
    let a_grid: Vec<Direction> = [0.0, 25.0, 70.0].map(deg).to_vec();
    let b_grid: Vec<Direction> = [10.0, 50.0, 80.0, 90.0].map(deg).to_vec();
    let report = locality_audit(
        |a, b| Ok(reference(*a, *b, Residual::None)),
        &OutcomeFields::unit(),
        &a_grid,
        &b_grid,
        &quad,
    )
    .unwrap();
    let abs1 = |g: &[Direction]| g.iter().map(|d| d.x().abs()).collect::<Vec<_>>();
    let spread = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
    let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let (a1, b1) = (abs1(&a_grid), abs1(&b_grid));
    let first = SlabIndex(-2);
    assert!((report.per_slab_b_dependence[&first] - max(&a1) * spread(&b1)).abs() < 1e-9);
    assert!((report.per_slab_a_dependence[&first] - max(&b1) * spread(&a1)).abs() < 1e-9);
    for (i, d) in &report.per_slab_b_dependence {
        if *i != first {
            assert_eq!(*d, 0.0);
            assert_eq!(report.per_slab_a_dependence[i], 0.0);
        }
    }
}

#[test]
fn single_b_grid_still_sweeps_a() {
    let quad = QuadratureConfig::default();
    let a_grid: Vec<Direction> = [0.0, 60.0].map(deg).to_vec();
    let report = locality_audit(
        |a, b| Ok(reference(*a, *b, Residual::Complement)),
        &OutcomeFields::unit(),
        &a_grid,
        &[deg(0.0)],
        &quad,
    )
    .unwrap();
    assert!(report.per_slab_b_dependence.values().all(|d| *d == 0.0));
    assert!((report.per_slab_a_dependence[&SlabIndex(-2)] - 0.5).abs() < 1e-9);
}

#[test]
fn halving_the_step_moves_integrals_below_tolerance() {
    let quad = QuadratureConfig::new(4, 1e-10).unwrap();
    for spec in [
        reference(deg(33.0), deg(71.0), Residual::Complement),
        SlabDensitySpec::new(2, deg(10.0), deg(50.0), Arc::new(Ramp)).unwrap(),
    ] {
        for i in spec.slabs() {
            let m = marginal_i(&spec, &OutcomeFields::unit(), i, &quad).unwrap();
            assert!(m.converged && m.refinement_change < quad.tolerance);
        }
    }
}

proptest! {
    #[test]
    fn half_open_slab_membership(u in -3.0f64..6.0, v in -3.0f64..6.0) {
        let i = SlabIndex::containing(u);
        prop_assert!(i.lower() <= u && u < i.lower() + 1.0);
        prop_assert!(i.contains(u));
        prop_assert_eq!(kappa(u, v, i), u8::from(i.contains(v)));
    }

    #[test]
    fn reference_density_is_nonnegative_and_normalized(a in 0.0f64..360.0, b in 0.0f64..360.0) {
        let spec = reference(deg(a), deg(b), Residual::Complement);
        for i in spec.slabs() {
            for u in grid_points(-3.0, 3.0, 12) {
                prop_assert!(density(&spec, u, u, i) >= 0.0);
            }
        }
        let mass = total_mass(&spec, &QuadratureConfig::default()).unwrap();
        prop_assert!((mass.value - 1.0).abs() < 1e-12);
    }
}
