//! Slab-partitioned hidden-variable densities and the locality audit of the
//! shared slab index.
//!
//! The density over `(u, v, i)` is
//!
//! ```text
//! ρ_ab(u, v; i) = σ_a(u)·1{i−1 ≤ u < i} · τ_b(v)·1{i−1 ≤ v < i},   i = −2, …, 3n
//! ```
//!
//! on `Ω = [−3, 3n)`. For each fixed `i` it is a product of a left factor and
//! a right factor, so `u` and `v` are local. The index `i` is shared by both
//! wings, and its distribution `∫∫ ρ_ab(u, v; i) du dv` is free to depend on
//! `a` and `b` jointly. [`locality_audit`] measures exactly that dependence.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Direction, Wing};
use crate::outcomes::Outcome;

/// Absolute deviation above which the audit declares the slab law non-local.
pub const NON_LOCALITY_TOLERANCE: f64 = 1e-6;

/// Index of the unit slab `[i − 1, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SlabIndex(pub i64);

impl SlabIndex {
    pub const FIRST: SlabIndex = SlabIndex(-2);

    /// Checks `−2 ≤ i ≤ 3n`.
    pub fn new(i: i64, n: u32) -> Result<Self> {
        if (-2..=3 * n as i64).contains(&i) {
            Ok(SlabIndex(i))
        } else {
            Err(Error::Contract(format!("slab index {i} outside [-2, {}]", 3 * n as i64)))
        }
    }

    /// Slab containing `u`.
    #[inline]
    pub fn containing(u: f64) -> Self {
        SlabIndex(u.floor() as i64 + 1)
    }

    #[inline]
    pub fn lower(self) -> f64 {
        (self.0 - 1) as f64
    }

    #[inline]
    pub fn contains(self, u: f64) -> bool {
        self.lower() <= u && u < self.0 as f64
    }

    /// All slabs `−2..=3n`.
    pub fn all(n: u32) -> impl Iterator<Item = SlabIndex> {
        (-2..=3 * n as i64).map(SlabIndex)
    }
}

impl fmt::Display for SlabIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[inline]
fn indicator(cond: bool) -> u8 {
    u8::from(cond)
}

/// `δ_ij · 1{i−1 ≤ u < i} · 1{j−1 ≤ v < j}`.
pub fn kappa2(u: f64, v: f64, i: SlabIndex, j: SlabIndex) -> u8 {
    indicator(i == j) * indicator(i.contains(u)) * indicator(j.contains(v))
}

/// `1{i−1 ≤ u < i} · 1{i−1 ≤ v < i}`.
pub fn kappa(u: f64, v: f64, i: SlabIndex) -> u8 {
    indicator(i.contains(u)) * indicator(i.contains(v))
}

/// Local weight functions `σ_a(u)` and `τ_b(v)`.
pub trait WeightFamily: Send + Sync + fmt::Debug {
    fn sigma(&self, a: &Direction, u: f64) -> f64;
    fn tau(&self, b: &Direction, v: f64) -> f64;
}

/// What the reference family puts on slabs other than `−2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Residual {
    /// Slab −1 carries `σ = 1, τ = 1 − |b₁|`, slab 0 carries
    /// `σ = 1 − |a₁|, τ = |b₁|`, so the slab masses add up to one.
    #[default]
    Complement,
    /// Nothing outside slab −2.
    None,
}

/// Weights pinned only on slab −2: `σ_a = |a₁|`, `τ_b = |b₁|`, which gives
/// `Pr(i = −2) = |a₁|·|b₁|` with unit outcome fields.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceFamily {
    pub residual: Residual,
}

impl WeightFamily for ReferenceFamily {
    fn sigma(&self, a: &Direction, u: f64) -> f64 {
        let a1 = a.x().abs();
        match (SlabIndex::containing(u).0, self.residual) {
            (-2, _) => a1,
            (-1, Residual::Complement) => 1.0,
            (0, Residual::Complement) => 1.0 - a1,
            _ => 0.0,
        }
    }

    fn tau(&self, b: &Direction, v: f64) -> f64 {
        let b1 = b.x().abs();
        match (SlabIndex::containing(v).0, self.residual) {
            (-2, _) => b1,
            (-1, Residual::Complement) => 1.0 - b1,
            (0, Residual::Complement) => b1,
            _ => 0.0,
        }
    }
}

/// Setting-independent weights spreading unit mass evenly over `slabs` slabs
/// starting at −2.
#[derive(Debug, Clone, Copy)]
pub struct UniformProductFamily {
    slabs: u32,
}

impl UniformProductFamily {
    pub fn new(slabs: u32) -> Self {
        assert!(slabs > 0);
        UniformProductFamily { slabs }
    }

    /// One slab per index of a density with parameter `n`.
    pub fn covering(n: u32) -> Self {
        Self::new(3 * n + 3)
    }

    fn weight(&self, u: f64) -> f64 {
        let i = SlabIndex::containing(u).0;
        if (-2..-2 + self.slabs as i64).contains(&i) {
            (self.slabs as f64).sqrt().recip()
        } else {
            0.0
        }
    }
}

impl WeightFamily for UniformProductFamily {
    fn sigma(&self, _a: &Direction, u: f64) -> f64 {
        self.weight(u)
    }

    fn tau(&self, _b: &Direction, v: f64) -> f64 {
        self.weight(v)
    }
}

/// One member `ρ_ab` of a slab density family.
#[derive(Debug, Clone)]
pub struct SlabDensitySpec {
    pub n: u32,
    pub a: Direction,
    pub b: Direction,
    pub family: Arc<dyn WeightFamily>,
    pub omega_lo: f64,
    pub omega_hi: f64,
}

impl SlabDensitySpec {
    /// `Ω = [−3, 3n)`.
    pub fn new(n: u32, a: Direction, b: Direction, family: Arc<dyn WeightFamily>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("slab parameter n must be positive".into()));
        }
        Ok(SlabDensitySpec { n, a, b, family, omega_lo: -3.0, omega_hi: 3.0 * n as f64 })
    }

    pub fn reference(n: u32, a: Direction, b: Direction, residual: Residual) -> Result<Self> {
        Self::new(n, a, b, Arc::new(ReferenceFamily { residual }))
    }

    pub fn slabs(&self) -> impl Iterator<Item = SlabIndex> {
        SlabIndex::all(self.n)
    }

    fn validate(&self) -> Result<()> {
        if self.omega_lo != -3.0 || self.omega_hi != 3.0 * self.n as f64 {
            return Err(Error::Contract(format!(
                "Ω = [{}, {}) does not match n = {}",
                self.omega_lo, self.omega_hi, self.n
            )));
        }
        Ok(())
    }
}

type FieldFn = dyn Fn(&Direction, f64) -> Outcome + Send + Sync;

/// Outcome functions `A_a(u)` and `B_b(v)`.
#[derive(Clone)]
pub struct OutcomeFields {
    left: Arc<FieldFn>,
    right: Arc<FieldFn>,
}

impl fmt::Debug for OutcomeFields {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("OutcomeFields { .. }")
    }
}

impl OutcomeFields {
    pub fn new(
        left: impl Fn(&Direction, f64) -> Outcome + Send + Sync + 'static,
        right: impl Fn(&Direction, f64) -> Outcome + Send + Sync + 'static,
    ) -> Self {
        OutcomeFields { left: Arc::new(left), right: Arc::new(right) }
    }

    pub fn constant(left: Outcome, right: Outcome) -> Self {
        Self::new(move |_, _| left, move |_, _| right)
    }

    /// `A ≡ B ≡ +1`; integrals then give plain probability mass.
    pub fn unit() -> Self {
        Self::constant(Outcome::Plus, Outcome::Plus)
    }

    pub fn left(&self, a: &Direction, u: f64) -> Outcome {
        (self.left)(a, u)
    }

    pub fn right(&self, b: &Direction, v: f64) -> Outcome {
        (self.right)(b, v)
    }
}

/// `σ_a(u, i)·τ_b(v, i)`.
pub fn density(spec: &SlabDensitySpec, u: f64, v: f64, i: SlabIndex) -> f64 {
    if kappa(u, v, i) == 0 {
        return 0.0;
    }
    spec.family.sigma(&spec.a, u) * spec.family.tau(&spec.b, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub cells_per_unit: u32,
    pub tolerance: f64,
}

impl QuadratureConfig {
    pub fn new(cells_per_unit: u32, tolerance: f64) -> Result<Self> {
        if cells_per_unit < 4 {
            return Err(Error::Config(format!("cells_per_unit must be at least 4, got {cells_per_unit}")));
        }
        if !(tolerance > 0.0) {
            return Err(Error::Config(format!("quadrature tolerance must be positive, got {tolerance}")));
        }
        Ok(QuadratureConfig { cells_per_unit, tolerance })
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { cells_per_unit: 8, tolerance: 1e-10 }
    }
}

/// A quadrature result with its step-halving check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    /// `|I(h/2) − I(h)|`.
    pub refinement_change: f64,
    pub converged: bool,
}

/// Midpoint rule on the square `[i−1, i)²` with `cells` cells per side.
/// `κ` vanishes outside that square, so this is the integral over `Ω²`.
fn slab_integral(spec: &SlabDensitySpec, outc: &OutcomeFields, i: SlabIndex, cells: u32) -> f64 {
    let h = 1.0 / cells as f64;
    let lo = i.lower();
    let mids: Vec<f64> = (0..cells).map(|k| lo + (k as f64 + 0.5) * h).collect();
    let mut total = 0.0;
    for &u in &mids {
        let au = f64::from(outc.left(&spec.a, u).value());
        let mut row = 0.0;
        for &v in &mids {
            let bv = f64::from(outc.right(&spec.b, v).value());
            row += au * bv * density(spec, u, v, i);
        }
        total += row;
    }
    total * h * h
}

/// `∫∫_Ω A_a(u) B_b(v) ρ_ab(u, v; i) du dv`.
pub fn marginal_i(
    spec: &SlabDensitySpec,
    outc: &OutcomeFields,
    i: SlabIndex,
    quadrature: &QuadratureConfig,
) -> Result<Integral> {
    spec.validate()?;
    SlabIndex::new(i.0, spec.n)?;
    let coarse = slab_integral(spec, outc, i, quadrature.cells_per_unit);
    let fine = slab_integral(spec, outc, i, 2 * quadrature.cells_per_unit);
    let change = (fine - coarse).abs();
    Ok(Integral { value: fine, refinement_change: change, converged: change <= quadrature.tolerance })
}

/// `Σ_i ∫∫_Ω A_a(u) B_b(v) ρ_ab(u, v; i) du dv`, summed in slab order.
pub fn expectation(spec: &SlabDensitySpec, outc: &OutcomeFields, quadrature: &QuadratureConfig) -> Result<Integral> {
    let mut value = 0.0;
    let mut change = 0.0;
    for i in spec.slabs() {
        let m = marginal_i(spec, outc, i, quadrature)?;
        value += m.value;
        change += m.refinement_change;
    }
    Ok(Integral { value, refinement_change: change, converged: change <= quadrature.tolerance })
}

/// Total probability mass `Σ_i ∫∫ ρ_ab`.
pub fn total_mass(spec: &SlabDensitySpec, quadrature: &QuadratureConfig) -> Result<Integral> {
    expectation(spec, &OutcomeFields::unit(), quadrature)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Local,
    NonLocal,
}

/// A pair of settings on one wing that moves the slab law, with the other
/// wing's setting held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub slab: SlabIndex,
    /// Wing whose setting was varied.
    pub varied: Wing,
    pub fixed: Direction,
    pub first: Direction,
    pub second: Direction,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityAuditReport {
    /// Per slab: max over `a` of `max_{b,b′} |m(a,b,i) − m(a,b′,i)|`.
    pub per_slab_b_dependence: BTreeMap<SlabIndex, f64>,
    /// Per slab: max over `b` of `max_{a,a′} |m(a,b,i) − m(a′,b,i)|`.
    pub per_slab_a_dependence: BTreeMap<SlabIndex, f64>,
    pub witnesses: Vec<Witness>,
    pub verdict: Verdict,
    pub tolerance: f64,
    /// Smallest and largest `Σ_i m(a,b,i)` over the grid.
    pub normalization_range: (f64, f64),
    /// Integrals whose step-halving check exceeded the quadrature tolerance.
    pub quadrature_warnings: Vec<String>,
}

impl LocalityAuditReport {
    pub fn max_deviation(&self) -> f64 {
        self.per_slab_a_dependence
            .values()
            .chain(self.per_slab_b_dependence.values())
            .copied()
            .fold(0.0, f64::max)
    }
}

/// Sweeps the grids and measures how much each slab's weight moves when one
/// wing's setting changes with the other held fixed.
pub fn locality_audit(
    spec_builder: impl Fn(&Direction, &Direction) -> Result<SlabDensitySpec>,
    outc: &OutcomeFields,
    a_grid: &[Direction],
    b_grid: &[Direction],
    quadrature: &QuadratureConfig,
) -> Result<LocalityAuditReport> {
    if a_grid.is_empty() || b_grid.is_empty() {
        return Err(Error::Contract("locality audit needs nonempty direction grids".into()));
    }
    let mut slabs: Vec<SlabIndex> = Vec::new();
    let mut warnings = Vec::new();
    // marg[ai][bi][k] for slab slabs[k]
    let mut marg = vec![vec![Vec::new(); b_grid.len()]; a_grid.len()];
    for (ai, a) in a_grid.iter().enumerate() {
        for (bi, b) in b_grid.iter().enumerate() {
            let spec = spec_builder(a, b)?;
            if slabs.is_empty() {
                slabs = spec.slabs().collect();
            } else if slabs.len() != spec.slabs().count() {
                return Err(Error::Contract("spec builder changed the slab range across the grid".into()));
            }
            for &i in &slabs {
                let m = marginal_i(&spec, outc, i, quadrature)?;
                if !m.converged {
                    warnings.push(format!(
                        "slab {i} at a#{ai}, b#{bi}: refinement moved the integral by {:.3e}",
                        m.refinement_change
                    ));
                }
                marg[ai][bi].push(m.value);
            }
        }
    }

    let mut b_dep = BTreeMap::new();
    let mut a_dep = BTreeMap::new();
    let mut witnesses = Vec::new();
    for (k, &i) in slabs.iter().enumerate() {
        // vary b with a fixed
        let mut best: Option<Witness> = None;
        for (ai, a) in a_grid.iter().enumerate() {
            let (lo, hi) = extremes(b_grid.len(), |bi| marg[ai][bi][k]);
            let dev = marg[ai][hi][k] - marg[ai][lo][k];
            if best.as_ref().map_or(true, |w| dev > w.deviation) {
                best = Some(Witness { slab: i, varied: Wing::Right, fixed: *a, first: b_grid[hi], second: b_grid[lo], deviation: dev });
            }
        }
        let w = best.expect("nonempty grid");
        b_dep.insert(i, w.deviation);
        if w.deviation > NON_LOCALITY_TOLERANCE {
            witnesses.push(w);
        }

        // vary a with b fixed
        let mut best: Option<Witness> = None;
        for (bi, b) in b_grid.iter().enumerate() {
            let (lo, hi) = extremes(a_grid.len(), |ai| marg[ai][bi][k]);
            let dev = marg[hi][bi][k] - marg[lo][bi][k];
            if best.as_ref().map_or(true, |w| dev > w.deviation) {
                best = Some(Witness { slab: i, varied: Wing::Left, fixed: *b, first: a_grid[hi], second: a_grid[lo], deviation: dev });
            }
        }
        let w = best.expect("nonempty grid");
        a_dep.insert(i, w.deviation);
        if w.deviation > NON_LOCALITY_TOLERANCE {
            witnesses.push(w);
        }
    }

    let masses = marg.iter().flatten().map(|ms| ms.iter().sum::<f64>());
    let normalization_range = masses.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(m), hi.max(m)));
    let verdict = if witnesses.is_empty() { Verdict::Local } else { Verdict::NonLocal };
    Ok(LocalityAuditReport {
        per_slab_b_dependence: b_dep,
        per_slab_a_dependence: a_dep,
        witnesses,
        verdict,
        tolerance: NON_LOCALITY_TOLERANCE,
        normalization_range,
        quadrature_warnings: warnings,
    })
}

/// Indices of the minimum and maximum of `f` over `0..len`, first occurrence.
fn extremes(len: usize, f: impl Fn(usize) -> f64) -> (usize, usize) {
    let (mut lo, mut hi) = (0, 0);
    for k in 1..len {
        if f(k) < f(lo) {
            lo = k;
        }
        if f(k) > f(hi) {
            hi = k;
        }
    }
    (lo, hi)
}
