//! The TOML experiment file.
//!
//! ```toml
//! [model]
//! name = "memory-lhv"
//! params = { decay = 0.5, strength = 1.0 }
//!
//! [table]
//! plane = "xy"
//! left_deg = [0.0, 90.0]
//! right_deg = [45.0, 135.0]
//!
//! [run]
//! trials = 100000
//! seed = 7
//! mode = "sequential"
//!
//! [analysis]
//! confidence = 0.99
//!
//! [hp]
//! family = "reference"
//! a_grid_deg = [0.0, 45.0, 90.0]
//! b_grid_deg = [0.0, 45.0, 90.0]
//! ```
//!
//! Every section is optional as far as parsing goes; each command checks for
//! the ones it needs. Directions are angles in degrees within `plane`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::{ExecutionMode, ExperimentConfig};
use crate::error::{Error, Result};
use crate::hpdensity::{QuadratureConfig, ReferenceFamily, Residual, SlabDensitySpec, UniformProductFamily, WeightFamily};
use crate::models::{ModelClass, ModelDescriptor, Plane, SettingTable, Direction};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<ModelSection>,
    pub table: Option<TableSection>,
    pub run: Option<RunSection>,
    pub analysis: Option<AnalysisSection>,
    pub hp: Option<HpSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub name: String,
    /// Optional; must agree with the built-in model's class when given.
    pub class: Option<ModelClass>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSection {
    #[serde(default)]
    pub plane: Plane,
    pub left_deg: [f64; 2],
    pub right_deg: [f64; 2],
}

impl TableSection {
    pub fn to_table(&self) -> Result<SettingTable> {
        for d in self.left_deg.iter().chain(&self.right_deg) {
            if !d.is_finite() {
                return Err(Error::Config(format!("setting angle {d} is not finite")));
            }
        }
        Ok(SettingTable::from_angles(self.plane, self.left_deg, self.right_deg))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub mode: ExecutionMode,
    #[serde(default = "yes")]
    pub reveal_hidden: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

fn default_confidence() -> f64 {
    0.99
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// Slab −2 weights `|a₁|`, `|b₁|` plus the chosen residual.
    #[default]
    Reference,
    /// Setting-independent uniform product weights.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HpSection {
    #[serde(default)]
    pub family: FamilyKind,
    #[serde(default)]
    pub residual: Residual,
    #[serde(default = "one")]
    pub n: u32,
    #[serde(default)]
    pub plane: Plane,
    #[serde(default = "default_grid")]
    pub a_grid_deg: Vec<f64>,
    #[serde(default = "default_grid")]
    pub b_grid_deg: Vec<f64>,
    #[serde(default = "default_cells")]
    pub cells_per_unit: u32,
    #[serde(default = "default_quad_tol")]
    pub tolerance: f64,
}

fn one() -> u32 {
    1
}

fn default_grid() -> Vec<f64> {
    vec![0.0, 30.0, 45.0, 60.0, 90.0]
}

fn default_cells() -> u32 {
    8
}

fn default_quad_tol() -> f64 {
    1e-10
}

impl Default for HpSection {
    fn default() -> Self {
        HpSection {
            family: FamilyKind::default(),
            residual: Residual::default(),
            n: one(),
            plane: Plane::default(),
            a_grid_deg: default_grid(),
            b_grid_deg: default_grid(),
            cells_per_unit: default_cells(),
            tolerance: default_quad_tol(),
        }
    }
}

impl HpSection {
    pub fn a_grid(&self) -> Vec<Direction> {
        self.a_grid_deg.iter().map(|&d| Direction::in_plane(self.plane, d)).collect()
    }

    pub fn b_grid(&self) -> Vec<Direction> {
        self.b_grid_deg.iter().map(|&d| Direction::in_plane(self.plane, d)).collect()
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig> {
        QuadratureConfig::new(self.cells_per_unit, self.tolerance)
    }

    pub fn family(&self) -> Arc<dyn WeightFamily> {
        match self.family {
            FamilyKind::Reference => Arc::new(ReferenceFamily { residual: self.residual }),
            FamilyKind::Uniform => Arc::new(UniformProductFamily::covering(self.n)),
        }
    }

    /// Builder for the density at a setting pair, as the audit expects.
    pub fn spec_builder(&self) -> impl Fn(&Direction, &Direction) -> Result<SlabDensitySpec> {
        let family = self.family();
        let n = self.n;
        move |a, b| SlabDensitySpec::new(n, *a, *b, family.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("hp.n must be positive".into()));
        }
        if self.a_grid_deg.is_empty() || self.b_grid_deg.is_empty() {
            return Err(Error::Config("hp direction grids must be nonempty".into()));
        }
        if self.a_grid_deg.iter().chain(&self.b_grid_deg).any(|d| !d.is_finite()) {
            return Err(Error::Config("hp grid angles must be finite".into()));
        }
        self.quadrature().map(|_| ())
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The setting table, defaulting to 0°/90° against 45°/135°.
    pub fn setting_table(&self) -> Result<SettingTable> {
        self.table.as_ref().map_or(Ok(SettingTable::default()), TableSection::to_table)
    }

    pub fn confidence(&self) -> f64 {
        self.analysis.as_ref().map_or_else(default_confidence, |a| a.confidence)
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let model = self.model.as_ref().ok_or_else(|| Error::Config("missing [model] section".into()))?;
        let run = self.run.as_ref().ok_or_else(|| Error::Config("missing [run] section".into()))?;
        let builtin = ModelDescriptor::builtin(&model.name)
            .ok_or_else(|| Error::Config(format!("unknown model `{}`", model.name)))?;
        let descriptor = ModelDescriptor {
            name: model.name.clone(),
            class: model.class.unwrap_or(builtin.class),
            params: model.params.clone(),
        };
        // surfaces unknown parameters and class mismatches as config errors
        crate::models::build_model(&descriptor)?;
        Ok(ExperimentConfig {
            model: descriptor,
            table: self.setting_table()?,
            trials: run.trials,
            seed: run.seed,
            mode: run.mode,
            reveal_hidden: run.reveal_hidden,
        })
    }

    pub fn hp(&self) -> Result<HpSection> {
        let hp = self.hp.clone().unwrap_or_default();
        hp.validate()?;
        Ok(hp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_file_parses() {
        let cfg = ConfigFile::parse(
            r#"
            [model]
            name = "memory-lhv"
            params = { decay = 0.25 }
            [table]
            plane = "xz"
            left_deg = [0, 90]
            right_deg = [45, 135]
            [run]
            trials = 10
            seed = 3
            mode = "sequential"
            [analysis]
            confidence = 0.95
            [hp]
            family = "uniform"
            a_grid_deg = [0]
            "#,
        )
        .unwrap();
        let exp = cfg.experiment().unwrap();
        assert_eq!(exp.mode, ExecutionMode::Sequential);
        assert_eq!(exp.model.class, ModelClass::LocalRealistic);
        assert_eq!(exp.model.params["decay"], 0.25);
        assert!(exp.reveal_hidden);
        assert!((exp.table.a2dir.z() - 1.0).abs() < 1e-15);
        assert_eq!(cfg.confidence(), 0.95);
        let hp = cfg.hp().unwrap();
        assert_eq!(hp.family, FamilyKind::Uniform);
        assert_eq!(hp.b_grid_deg, default_grid());
    }

    #[test]
    fn errors_are_config_errors() {
        for bad in [
            "[model]\nname = 1",
            "[unknown]\nx = 1",
            "[model]\nname = \"nope\"\n[run]\ntrials = 1\nseed = 1",
            "[model]\nname = \"singlet\"\nparams = { foo = 1.0 }\n[run]\ntrials = 1\nseed = 1",
            "[model]\nname = \"singlet\"\nclass = \"conspiracy\"\n[run]\ntrials = 1\nseed = 1",
            "[model]\nname = \"singlet\"",
        ] {
            let r = ConfigFile::parse(bad).and_then(|c| c.experiment());
            assert!(matches!(r, Err(Error::Config(_))), "{bad}");
        }
        let r = ConfigFile::parse("[hp]\ncells_per_unit = 2").and_then(|c| c.hp());
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn defaults() {
        let cfg = ConfigFile::parse("").unwrap();
        assert_eq!(cfg.setting_table().unwrap(), SettingTable::default());
        assert_eq!(cfg.confidence(), 0.99);
        assert_eq!(cfg.hp().unwrap(), HpSection::default());
    }
}
