//! Hidden-variable models.
//!
//! A model turns a per-trial random stream (and, for models with memory, the
//! record of earlier trials) into a [`HiddenState`], and then into outcomes.
//! Local realistic models expose the full potential-outcome quadruple; the
//! quantum singlet sampler does not have one. Two negative controls break
//! the assumptions on purpose: `conspiracy` peeks at the current settings
//! before choosing its quadruple, `signaling` lets the left outcome depend on
//! the right setting.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::TrialRecord;
use crate::error::{Error, Result};
use crate::outcomes::{delta, enumerate_quadruples, pair_index, Outcome, Quadruple, SettingLabel, SettingPair, SETTING_PAIRS};
use crate::rng::CounterStream;

const UNIT_TOLERANCE: f64 = 1e-12;

/// A unit vector in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction {
    x: f64,
    y: f64,
    z: f64,
}

impl Direction {
    /// Accepts components that already form a unit vector (within 1e−12).
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm2 = x * x + y * y + z * z;
        if !norm2.is_finite() || (norm2 - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::Config(format!(
                "direction ({x}, {y}, {z}) is not a unit vector (|v|² = {norm2})"
            )));
        }
        Ok(Direction { x, y, z })
    }

    /// Rescales any nonzero vector to unit length.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Config(format!("cannot normalize ({x}, {y}, {z})")));
        }
        Ok(Direction { x: x / norm, y: y / norm, z: z / norm })
    }

    /// Direction at `degrees` from the first axis of `plane`.
    pub fn in_plane(plane: Plane, degrees: f64) -> Self {
        let (s, c) = degrees.to_radians().sin_cos();
        match plane {
            Plane::Xy => Direction { x: c, y: s, z: 0.0 },
            Plane::Xz => Direction { x: c, y: 0.0, z: s },
            Plane::Yz => Direction { x: 0.0, y: c, z: s },
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(&self, other: &Direction) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Applies a rotation matrix given row-major. The result is renormalized.
    pub fn rotated(&self, m: &[[f64; 3]; 3]) -> Self {
        let v = self.components();
        let r = |row: &[f64; 3]| row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        Direction::normalized(r(&m[0]), r(&m[1]), r(&m[2])).expect("rotation of a unit vector")
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            x: f64,
            y: f64,
            z: f64,
        }
        let r = Raw::deserialize(d)?;
        Direction::new(r.x, r.y, r.z).map_err(serde::de::Error::custom)
    }
}

/// Coordinate plane used when directions are given as angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    #[default]
    Xy,
    Xz,
    Yz,
}

/// Measurement directions behind the setting labels of each wing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingTable {
    pub a1dir: Direction,
    pub a2dir: Direction,
    pub b1dir: Direction,
    pub b2dir: Direction,
}

impl SettingTable {
    pub fn new(a1dir: Direction, a2dir: Direction, b1dir: Direction, b2dir: Direction) -> Self {
        SettingTable { a1dir, a2dir, b1dir, b2dir }
    }

    /// Coplanar table from angles in degrees.
    pub fn from_angles(plane: Plane, left: [f64; 2], right: [f64; 2]) -> Self {
        SettingTable {
            a1dir: Direction::in_plane(plane, left[0]),
            a2dir: Direction::in_plane(plane, left[1]),
            b1dir: Direction::in_plane(plane, right[0]),
            b2dir: Direction::in_plane(plane, right[1]),
        }
    }

    pub fn left(&self, a: SettingLabel) -> &Direction {
        match a {
            SettingLabel::One => &self.a1dir,
            SettingLabel::Two => &self.a2dir,
        }
    }

    pub fn right(&self, b: SettingLabel) -> &Direction {
        match b {
            SettingLabel::One => &self.b1dir,
            SettingLabel::Two => &self.b2dir,
        }
    }

    /// `a·b` for the directions selected by `(a, b)`.
    pub fn correlation_dot(&self, a: SettingLabel, b: SettingLabel) -> f64 {
        self.left(a).dot(self.right(b))
    }
}

impl Default for SettingTable {
    /// Left at 0° and 90°, right at 45° and 135°, all in the xy plane.
    fn default() -> Self {
        SettingTable::from_angles(Plane::Xy, [0.0, 90.0], [45.0, 135.0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelClass {
    LocalRealistic,
    Quantum,
    Conspiracy,
    Signaling,
}

impl ModelClass {
    /// Classes whose outcomes come from a revealed quadruple.
    pub fn has_quadruple(self) -> bool {
        matches!(self, ModelClass::LocalRealistic | ModelClass::Conspiracy)
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelClass::LocalRealistic => "local_realistic",
            ModelClass::Quantum => "quantum",
            ModelClass::Conspiracy => "conspiracy",
            ModelClass::Signaling => "signaling",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub name: String,
    pub class: ModelClass,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ModelDescriptor {
    fn new(name: &str, class: ModelClass, params: &[(&str, f64)]) -> Self {
        ModelDescriptor {
            name: name.to_string(),
            class,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    /// The built-in descriptor called `name`, with default parameters.
    pub fn builtin(name: &str) -> Option<Self> {
        builtin_models().into_iter().find(|d| d.name == name)
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

/// Every model shipped with the crate, with default parameters.
pub fn builtin_models() -> Vec<ModelDescriptor> {
    use ModelClass::*;
    vec![
        ModelDescriptor::new("uniform-lhv", LocalRealistic, &[]),
        ModelDescriptor::new(
            "rotating-lhv",
            LocalRealistic,
            &[("drift", TAU * 0.381_966_011_250_105_1), ("jitter", 0.0)],
        ),
        ModelDescriptor::new(
            "memory-lhv",
            LocalRealistic,
            &[("decay", 0.5), ("strength", 1.0), ("window", 16.0)],
        ),
        ModelDescriptor::new("singlet", Quantum, &[]),
        ModelDescriptor::new("conspiracy", Conspiracy, &[("strength", 0.5)]),
        ModelDescriptor::new("signaling", Signaling, &[("shift", 0.1)]),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wing {
    Left,
    Right,
}

/// Model-private part of a hidden state. The engine never looks inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payload {
    Empty,
    Angle(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenState {
    pub payload: Payload,
    pub revealed_quadruple: Option<Quadruple>,
}

impl HiddenState {
    pub fn empty() -> Self {
        HiddenState { payload: Payload::Empty, revealed_quadruple: None }
    }

    pub fn from_quadruple(q: Quadruple) -> Self {
        HiddenState { payload: Payload::Empty, revealed_quadruple: Some(q) }
    }
}

/// Everything a source may see when it emits a hidden state.
///
/// `settings` is only filled in for conspiracy-class models.
#[derive(Debug, Clone, Copy)]
pub struct SourceContext<'a> {
    pub index: u64,
    pub history: &'a [TrialRecord],
    pub table: &'a SettingTable,
    pub settings: Option<SettingPair>,
}

impl<'a> SourceContext<'a> {
    pub fn new(index: u64, table: &'a SettingTable) -> Self {
        SourceContext { index, history: &[], table, settings: None }
    }

    pub fn with_history(mut self, history: &'a [TrialRecord]) -> Self {
        self.history = history;
        self
    }

    pub fn with_settings(mut self, settings: SettingPair) -> Self {
        self.settings = Some(settings);
        self
    }
}

/// The contract every model implements.
pub trait HiddenVariableModel: Send + Sync {
    fn descriptor(&self) -> &ModelDescriptor;

    fn class(&self) -> ModelClass {
        self.descriptor().class
    }

    /// Whether `sample_source` reads `ctx.history`. Such models only make
    /// sense when trials run in order.
    fn uses_history(&self) -> bool {
        false
    }

    fn sample_source(&self, ctx: &SourceContext<'_>, rng: &mut CounterStream) -> Result<HiddenState>;

    /// One wing's outcome from its own setting and the shared state.
    fn measure(
        &self,
        wing: Wing,
        setting: SettingLabel,
        _table: &SettingTable,
        state: &HiddenState,
    ) -> Result<Outcome> {
        match (self.class(), state.revealed_quadruple) {
            (c, Some(q)) if c.has_quadruple() => Ok(match wing {
                Wing::Left => q.left(setting),
                Wing::Right => q.right(setting),
            }),
            (c, _) => Err(Error::Contract(format!(
                "model `{}` ({c}) has no per-wing outcome function; use measure_joint",
                self.descriptor().name
            ))),
        }
    }

    /// Both outcomes at once, for models that need both settings.
    fn measure_joint(
        &self,
        _a: SettingLabel,
        _b: SettingLabel,
        _table: &SettingTable,
        _state: &HiddenState,
        _rng: &mut CounterStream,
    ) -> Result<(Outcome, Outcome)> {
        Err(Error::Contract(format!(
            "model `{}` ({}) is measured one wing at a time",
            self.descriptor().name,
            self.class()
        )))
    }
}

/// Instantiates a descriptor. Unknown names or parameters are config errors.
pub fn build_model(desc: &ModelDescriptor) -> Result<Box<dyn HiddenVariableModel>> {
    let default = ModelDescriptor::builtin(&desc.name)
        .ok_or_else(|| Error::Config(format!("unknown model `{}`", desc.name)))?;
    if desc.class != default.class {
        return Err(Error::Config(format!(
            "model `{}` has class {}, not {}",
            desc.name, default.class, desc.class
        )));
    }
    for key in desc.params.keys() {
        if !default.params.contains_key(key) {
            return Err(Error::Config(format!("model `{}` has no parameter `{key}`", desc.name)));
        }
    }
    let mut merged = default.clone();
    merged.params.extend(desc.params.iter().map(|(k, v)| (k.clone(), *v)));
    let p = |key: &str| merged.params[key];
    let in_range = |key: &str, lo: f64, hi: f64| -> Result<f64> {
        let v = p(key);
        if v.is_finite() && (lo..=hi).contains(&v) {
            Ok(v)
        } else {
            Err(Error::Config(format!("parameter `{key}` = {v} outside [{lo}, {hi}]")))
        }
    };

    Ok(match merged.name.as_str() {
        "uniform-lhv" => Box::new(UniformLhv { desc: merged }),
        "rotating-lhv" => {
            let drift = in_range("drift", -1e6, 1e6)?;
            let jitter = in_range("jitter", 0.0, 1.0)?;
            Box::new(RotatingLhv { drift, jitter, desc: merged })
        }
        "memory-lhv" => {
            let decay = in_range("decay", 0.0, 1.0)?;
            let strength = in_range("strength", 0.0, 1.0)?;
            let window = in_range("window", 1.0, 4096.0)?.round() as usize;
            let candidates = SETTING_PAIRS.map(MemoryLhv::candidates);
            Box::new(MemoryLhv { decay, strength, window, candidates, desc: merged })
        }
        "singlet" => Box::new(Singlet { desc: merged }),
        "conspiracy" => {
            let strength = in_range("strength", 0.0, 1.0)?;
            let favourable = SETTING_PAIRS.map(|pair| {
                enumerate_quadruples().into_iter().filter(|q| favours(q, pair)).collect()
            });
            Box::new(Conspiracy { strength, favourable, desc: merged })
        }
        "signaling" => {
            let shift = in_range("shift", 0.0, 0.5)?;
            Box::new(Signaling { shift, desc: merged })
        }
        other => unreachable!("builtin `{other}` without a constructor"),
    })
}

#[inline]
fn uniform_quadruple(rng: &mut CounterStream) -> Quadruple {
    Quadruple::from_code((rng.gen::<u32>() >> 28) as usize)
}

/// Whether `q` yields `X = Y` exactly when that helps the Bell statistic at `pair`.
fn favours(q: &Quadruple, pair: SettingPair) -> bool {
    let equal = q.left(pair.0) == q.right(pair.1);
    if pair == (SettingLabel::One, SettingLabel::Two) {
        equal
    } else {
        !equal
    }
}

/// Draws `X = Y` with probability `(1 − a·b)/2` given a fair `first` outcome.
#[inline]
fn singlet_partner(first: Outcome, dot: f64, rng: &mut CounterStream) -> Outcome {
    if rng.gen::<f64>() < 0.5 * (1.0 - dot) {
        first
    } else {
        first.flip()
    }
}

/// Fair coin over all sixteen quadruples, independent of everything.
#[derive(Debug)]
pub struct UniformLhv {
    desc: ModelDescriptor,
}

impl HiddenVariableModel for UniformLhv {
    fn descriptor(&self) -> &ModelDescriptor {
        &self.desc
    }

    fn sample_source(&self, _ctx: &SourceContext<'_>, rng: &mut CounterStream) -> Result<HiddenState> {
        Ok(HiddenState::from_quadruple(uniform_quadruple(rng)))
    }
}

/// A shared polarization angle that drifts with the trial index.
///
/// Left outcome is `sign(a·λ)`, right is `−sign(b·λ)` with `λ` the unit
/// vector at the current angle in the xy plane.
#[derive(Debug)]
pub struct RotatingLhv {
    desc: ModelDescriptor,
    drift: f64,
    jitter: f64,
}

impl RotatingLhv {
    fn angle(&self, index: u64, rng: &mut CounterStream) -> f64 {
        let base = (self.drift * index as f64).rem_euclid(TAU);
        let noise = if self.jitter > 0.0 { self.jitter * TAU * (rng.gen::<f64>() - 0.5) } else { 0.0 };
        (base + noise).rem_euclid(TAU)
    }

    fn outcome(wing: Wing, dir: &Direction, phi: f64) -> Outcome {
        let (s, c) = phi.sin_cos();
        let proj = Outcome::sign_of(dir.x() * c + dir.y() * s);
        match wing {
            Wing::Left => proj,
            Wing::Right => proj.flip(),
        }
    }
}

impl HiddenVariableModel for RotatingLhv {
    fn descriptor(&self) -> &ModelDescriptor {
        &self.desc
    }

    fn sample_source(&self, ctx: &SourceContext<'_>, rng: &mut CounterStream) -> Result<HiddenState> {
        let phi = self.angle(ctx.index, rng);
        let t = ctx.table;
        let q = Quadruple::new(
            Self::outcome(Wing::Left, &t.a1dir, phi),
            Self::outcome(Wing::Left, &t.a2dir, phi),
            Self::outcome(Wing::Right, &t.b1dir, phi),
            Self::outcome(Wing::Right, &t.b2dir, phi),
        );
        Ok(HiddenState { payload: Payload::Angle(phi), revealed_quadruple: Some(q) })
    }

    fn measure(
        &self,
        wing: Wing,
        setting: SettingLabel,
        table: &SettingTable,
        state: &HiddenState,
    ) -> Result<Outcome> {
        let Payload::Angle(phi) = state.payload else {
            return Err(Error::Contract("rotating-lhv state without an angle".into()));
        };
        let dir = match wing {
            Wing::Left => table.left(setting),
            Wing::Right => table.right(setting),
        };
        Ok(Self::outcome(wing, dir, phi))
    }
}

/// Local realistic source that tries to exploit the past.
///
/// It weights the setting pairs of the last `window` trials by `decay^age`,
/// guesses the most frequent one will come up again, and with probability
/// `strength` emits a quadruple that is optimal for that guess (Δ = 0 and
/// favourable at the guessed pair). The quadruple is globally negated when
/// the previous trial ended with `X = Y`, so it also depends on past outcomes.
#[derive(Debug)]
pub struct MemoryLhv {
    desc: ModelDescriptor,
    decay: f64,
    strength: f64,
    window: usize,
    candidates: [Vec<Quadruple>; 4],
}

impl MemoryLhv {
    fn guess(&self, history: &[TrialRecord]) -> Option<SettingPair> {
        let start = history.len().saturating_sub(self.window);
        let mut weights = [0.0f64; 4];
        let mut w = 1.0;
        for rec in history[start..].iter().rev() {
            weights[pair_index((rec.a, rec.b))] += w;
            w *= self.decay;
        }
        if history.is_empty() {
            return None;
        }
        let best = (0..4).fold(0, |best, i| if weights[i] > weights[best] { i } else { best });
        Some(SETTING_PAIRS[best])
    }

    fn candidates(pair: SettingPair) -> Vec<Quadruple> {
        enumerate_quadruples()
            .into_iter()
            .filter(|q| delta(q) == 0 && favours(q, pair))
            .collect()
    }
}

impl HiddenVariableModel for MemoryLhv {
    fn descriptor(&self) -> &ModelDescriptor {
        &self.desc
    }

    fn uses_history(&self) -> bool {
        true
    }

    fn sample_source(&self, ctx: &SourceContext<'_>, rng: &mut CounterStream) -> Result<HiddenState> {
        let adversarial = rng.gen::<f64>() < self.strength;
        let q = match (adversarial, self.guess(ctx.history)) {
            (true, Some(pair)) => {
                let c = &self.candidates[pair_index(pair)];
                let q = c[rng.gen_range(0..c.len())];
                match ctx.history.last() {
                    Some(last) if last.x == last.y => q.negated(),
                    _ => q,
                }
            }
            _ => uniform_quadruple(rng),
        };
        Ok(HiddenState::from_quadruple(q))
    }
}

/// Quantum singlet: fair marginals, `Pr{X = Y} = (1 − a·b)/2`.
#[derive(Debug)]
pub struct Singlet {
    desc: ModelDescriptor,
}

impl HiddenVariableModel for Singlet {
    fn descriptor(&self) -> &ModelDescriptor {
        &self.desc
    }

    fn sample_source(&self, _ctx: &SourceContext<'_>, _rng: &mut CounterStream) -> Result<HiddenState> {
        Ok(HiddenState::empty())
    }

    fn measure_joint(
        &self,
        a: SettingLabel,
        b: SettingLabel,
        table: &SettingTable,
        _state: &HiddenState,
        rng: &mut CounterStream,
    ) -> Result<(Outcome, Outcome)> {
        let x = if rng.gen::<bool>() { Outcome::Plus } else { Outcome::Minus };
        let y = singlet_partner(x, table.correlation_dot(a, b), rng);
        Ok((x, y))
    }
}

/// Violates freedom: the quadruple is chosen after looking at `(A, B)`.
///
/// With probability `strength` the quadruple is drawn from the eight that
/// favour the current pair, otherwise uniformly.
#[derive(Debug)]
pub struct Conspiracy {
    desc: ModelDescriptor,
    strength: f64,
    favourable: [Vec<Quadruple>; 4],
}

impl HiddenVariableModel for Conspiracy {
    fn descriptor(&self) -> &ModelDescriptor {
        &self.desc
    }

    fn sample_source(&self, ctx: &SourceContext<'_>, rng: &mut CounterStream) -> Result<HiddenState> {
        let pair = ctx
            .settings
            .ok_or_else(|| Error::RequiresSettings { model: self.desc.name.clone() })?;
        let q = if rng.gen::<f64>() < self.strength {
            let favourable = &self.favourable[pair_index(pair)];
            favourable[rng.gen_range(0..favourable.len())]
        } else {
            uniform_quadruple(rng)
        };
        Ok(HiddenState::from_quadruple(q))
    }
}

/// Violates locality: singlet statistics built with the remote setting in
/// hand, plus a left-marginal shift of `shift` toward +1 whenever `B = 2`.
#[derive(Debug)]
pub struct Signaling {
    desc: ModelDescriptor,
    shift: f64,
}

impl HiddenVariableModel for Signaling {
    fn descriptor(&self) -> &ModelDescriptor {
        &self.desc
    }

    fn sample_source(&self, _ctx: &SourceContext<'_>, _rng: &mut CounterStream) -> Result<HiddenState> {
        Ok(HiddenState::empty())
    }

    fn measure_joint(
        &self,
        a: SettingLabel,
        b: SettingLabel,
        table: &SettingTable,
        _state: &HiddenState,
        rng: &mut CounterStream,
    ) -> Result<(Outcome, Outcome)> {
        let y = if rng.gen::<bool>() { Outcome::Plus } else { Outcome::Minus };
        let mut x = singlet_partner(y, table.correlation_dot(a, b), rng);
        if b == SettingLabel::Two && x == Outcome::Minus && rng.gen::<f64>() < 2.0 * self.shift {
            x = Outcome::Plus;
        }
        Ok((x, y))
    }
}
