//! Potential-outcome quadruples and the combinatorics behind the equality
//! form of Bell's inequality.
//!
//! A local realistic model assigns, for every trial, four binary values: the
//! outcome the left wing would show under setting 1 or 2, and the same for the
//! right wing. Only one left and one right value is ever observed; the rest is
//! bookkeeping that the audits in [`crate::analysis`] can inspect when a model
//! chooses to reveal it.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A single binary measurement outcome, stored as an exact signed unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    #[inline]
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            _ => None,
        }
    }

    /// Threshold map used by deterministic models. Ties go to `Plus`.
    #[inline]
    pub fn sign_of(x: f64) -> Self {
        if x >= 0.0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    #[inline]
    pub fn flip(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Plus => f.write_str("+1"),
            Outcome::Minus => f.write_str("-1"),
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Outcome::from_value(v)
            .ok_or_else(|| serde::de::Error::custom(format!("outcome must be +1 or -1, got {v}")))
    }
}

/// Which of the two settings a wing was asked to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SettingLabel {
    One,
    Two,
}

impl SettingLabel {
    pub const BOTH: [SettingLabel; 2] = [SettingLabel::One, SettingLabel::Two];

    /// Zero-based index, handy for table lookups.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            SettingLabel::One => 0,
            SettingLabel::Two => 1,
        }
    }

    #[inline]
    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(n: i64) -> Option<Self> {
        match n {
            1 => Some(SettingLabel::One),
            2 => Some(SettingLabel::Two),
            _ => None,
        }
    }
}

impl fmt::Display for SettingLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl Serialize for SettingLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

impl<'de> Deserialize<'de> for SettingLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        SettingLabel::from_number(v)
            .ok_or_else(|| serde::de::Error::custom(format!("setting must be 1 or 2, got {v}")))
    }
}

/// A setting pair `(A, B)`, left label first.
pub type SettingPair = (SettingLabel, SettingLabel);

/// The four setting pairs in the fixed order 11, 12, 21, 22.
pub const SETTING_PAIRS: [SettingPair; 4] = [
    (SettingLabel::One, SettingLabel::One),
    (SettingLabel::One, SettingLabel::Two),
    (SettingLabel::Two, SettingLabel::One),
    (SettingLabel::Two, SettingLabel::Two),
];

/// Position of a pair in [`SETTING_PAIRS`].
#[inline]
pub fn pair_index(pair: SettingPair) -> usize {
    pair.0.index() * 2 + pair.1.index()
}

/// Potential outcomes `(X₁, X₂, Y₁, Y₂)`: left under settings 1 and 2, then
/// right under settings 1 and 2. Serialized in that order everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quadruple {
    pub x1: Outcome,
    pub x2: Outcome,
    pub y1: Outcome,
    pub y2: Outcome,
}

impl Quadruple {
    pub fn new(x1: Outcome, x2: Outcome, y1: Outcome, y2: Outcome) -> Self {
        Quadruple { x1, x2, y1, y2 }
    }

    /// Builds from four signed units, rejecting anything other than ±1.
    pub fn from_values(v: [i64; 4]) -> Option<Self> {
        Some(Quadruple {
            x1: Outcome::from_value(v[0])?,
            x2: Outcome::from_value(v[1])?,
            y1: Outcome::from_value(v[2])?,
            y2: Outcome::from_value(v[3])?,
        })
    }

    pub fn values(&self) -> [i8; 4] {
        [self.x1.value(), self.x2.value(), self.y1.value(), self.y2.value()]
    }

    /// Dense code in `0..16`; bit 3 is `x1`, bit 0 is `y2`, a set bit means −1.
    pub fn code(&self) -> usize {
        let bit = |o: Outcome| usize::from(o == Outcome::Minus);
        (bit(self.x1) << 3) | (bit(self.x2) << 2) | (bit(self.y1) << 1) | bit(self.y2)
    }

    pub fn from_code(code: usize) -> Self {
        let o = |bit: usize| {
            if (code >> bit) & 1 == 1 {
                Outcome::Minus
            } else {
                Outcome::Plus
            }
        };
        Quadruple::new(o(3), o(2), o(1), o(0))
    }

    #[inline]
    pub fn left(&self, a: SettingLabel) -> Outcome {
        match a {
            SettingLabel::One => self.x1,
            SettingLabel::Two => self.x2,
        }
    }

    #[inline]
    pub fn right(&self, b: SettingLabel) -> Outcome {
        match b {
            SettingLabel::One => self.y1,
            SettingLabel::Two => self.y2,
        }
    }

    /// Flips all four outcomes. Leaves every cross-wing equality unchanged.
    pub fn negated(&self) -> Self {
        Quadruple::new(self.x1.flip(), self.x2.flip(), self.y1.flip(), self.y2.flip())
    }
}

impl Serialize for Quadruple {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.values().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Quadruple {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = <[i64; 4]>::deserialize(d)?;
        Quadruple::from_values(v).ok_or_else(|| {
            serde::de::Error::custom(format!("revealed quadruple must hold four ±1 values, got {v:?}"))
        })
    }
}

/// Number of the four cross-wing pairs `(Xᵢ, Yⱼ)` that agree. Always even.
pub fn equality_count(q: &Quadruple) -> u8 {
    SETTING_PAIRS
        .iter()
        .map(|&(a, b)| u8::from(q.left(a) == q.right(b)))
        .sum()
}

/// `1{X₁=Y₂} − 1{X₁=Y₁} − 1{X₂=Y₁} − 1{X₂=Y₂}`; only ever 0 or −2.
pub fn delta(q: &Quadruple) -> i8 {
    let eq = |a: Outcome, b: Outcome| i8::from(a == b);
    eq(q.x1, q.y2) - eq(q.x1, q.y1) - eq(q.x2, q.y1) - eq(q.x2, q.y2)
}

/// Checks `X₁Y₂ = (X₁Y₁)(X₂Y₁)(X₂Y₂)` with exact integer arithmetic.
pub fn product_identity_holds(q: &Quadruple) -> bool {
    let [x1, x2, y1, y2] = q.values();
    x1 * y2 == (x1 * y1) * (x2 * y1) * (x2 * y2)
}

/// The observed pair `(X_a, Y_b)`.
#[inline]
pub fn select_actual(q: &Quadruple, a: SettingLabel, b: SettingLabel) -> (Outcome, Outcome) {
    (q.left(a), q.right(b))
}

/// All 2⁴ quadruples, ordered by [`Quadruple::code`].
pub fn enumerate_quadruples() -> Vec<Quadruple> {
    (0..16).map(Quadruple::from_code).collect()
}
