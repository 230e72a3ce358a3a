//! Scenario configuration: one TOML file holding the building, the measure catalog, the
//! economic scenario and run options.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::econ::{EconomicScenario, FuelConstraint};
use crate::measures::{Catalog, MeasureSpec, Package};
use crate::model::{validate_building, BuildingModel};
use crate::sim::{CalibrationSetup, MonthlyWeather};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// End uses come from the monthly model.
    #[default]
    Simulate,
    /// End uses come from an external `case,end_use,fuel,gj` file.
    Import,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "simulate" => Ok(Mode::Simulate),
            "import" => Ok(Mode::Import),
            other => Err(format!("unknown mode `{other}` (expected simulate | import)")),
        }
    }
}

/// Observed aggregates for the base building, used for comparison in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValues {
    /// GJ/yr
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_energy_gj: Option<f64>,
    /// CAD/yr
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_cost_cad: Option<f64>,
    /// tCO₂e/yr
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ghg_t: Option<f64>,
    /// tCO₂e/yr after the full waterfall package.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub package_ghg_t: Option<f64>,
    /// How the observed cost should be split across fuels.
    #[serde(default = "mixed")]
    pub fuel_constraint: FuelConstraint,
}

fn mixed() -> FuelConstraint {
    FuelConstraint::Mixed
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub mode: Mode,
    /// End-use CSV, required in import mode. Relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub import_path: Option<PathBuf>,
    /// Monthly weather CSV; the bundled profile when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weather_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_dir: Option<PathBuf>,
    /// Measure ids in waterfall order; catalog order when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub waterfall_order: Vec<String>,
    pub building: BuildingModel,
    #[serde(default)]
    pub measures: Vec<MeasureSpec>,
    pub economics: EconomicScenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationSetup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceValues>,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// One problem found while loading a config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigError {
    /// File the problem was found in.
    pub path: String,
    /// 1-based line, when known.
    pub line: Option<u64>,
    /// Dotted field path, or the bare field name for parse errors.
    pub field: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}: {}", self.path, line, self.field, self.reason),
            None => write!(f, "{}: {}: {}", self.path, self.field, self.reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    /// Unknown keys that were ignored.
    pub warnings: Vec<String>,
}

pub fn load_scenario_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_scenario_config(&text, &path.display().to_string(), &base_dir)
}

fn line_of(text: &str, offset: usize) -> u64 {
    text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count() as u64
        + 1
}

fn backticked(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

fn toml_error(source: &str, text: &str, e: &toml::de::Error) -> ConfigError {
    let message = e.message().trim().to_string();
    ConfigError {
        path: source.to_string(),
        line: e.span().map(|s| line_of(text, s.start)),
        field: backticked(&message).unwrap_or("<document>").to_string(),
        reason: message,
    }
}

/// Parse and validate config text; `source` names it in errors.
pub fn parse_scenario_config(text: &str, source: &str, base_dir: &Path) -> Result<LoadedConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::Config(vec![toml_error(source, text, &e)]))?;
    let mut warnings = Vec::new();
    let mut config: ScenarioConfig = serde_ignored::deserialize(de, |p| {
        warnings.push(format!("{source}: unknown field `{p}` ignored"));
    })
    .map_err(|e| Error::Config(vec![toml_error(source, text, &e)]))?;
    config.base_dir = base_dir.to_path_buf();

    let errors = config.validate(source);
    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    Ok(LoadedConfig { config, warnings })
}

impl ScenarioConfig {
    /// Every problem with an already-parsed config; empty when it is usable.
    pub fn validate(&self, source: &str) -> Vec<ConfigError> {
        let mut errors = Vec::new();
        let mut push = |field: String, reason: String| {
            errors.push(ConfigError {
                path: source.to_string(),
                line: None,
                field,
                reason,
            })
        };

        for v in validate_building(&self.building).violations {
            push(format!("building.{}", v.field), v.reason);
        }

        let mut ids = BTreeSet::new();
        for (i, m) in self.measures.iter().enumerate() {
            if !ids.insert(m.id.as_str()) {
                push(format!("measures[{i}].id"), format!("duplicate measure id `{}`", m.id));
            }
            for v in m.validate().violations {
                push(format!("measures[{i}].{}", v.field), v.reason);
            }
        }

        if let Err(e) = self.economics.validate() {
            push("economics".into(), e.to_string());
        }

        let mut seen = BTreeSet::new();
        for (i, id) in self.waterfall_order.iter().enumerate() {
            if !ids.contains(id.as_str()) {
                push(format!("waterfall_order[{i}]"), format!("unknown measure id `{id}`"));
            } else if !seen.insert(id.as_str()) {
                push(format!("waterfall_order[{i}]"), format!("duplicate measure id `{id}`"));
            }
        }

        match (self.mode, &self.import_path) {
            (Mode::Import, None) => push("import_path".into(), "required when mode = \"import\"".into()),
            (_, Some(p)) if self.mode == Mode::Import && !self.resolve(p).is_file() => push(
                "import_path".into(),
                format!("file not found: {}", self.resolve(p).display()),
            ),
            _ => {}
        }
        if let Some(p) = &self.weather_path {
            if !self.resolve(p).is_file() {
                push(
                    "weather_path".into(),
                    format!("file not found: {}", self.resolve(p).display()),
                );
            }
        }

        if let Some(c) = &self.calibration {
            let unique: BTreeSet<_> = c.parameters.iter().collect();
            if c.parameters.is_empty() || c.parameters.len() > 3 || unique.len() != c.parameters.len() {
                push(
                    "calibration.parameters".into(),
                    "must list between one and three distinct parameters".into(),
                );
            }
            if c.targets == Default::default() {
                push("calibration.targets".into(), "at least one target is required".into());
            }
        }
        errors
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn catalog(&self) -> Result<Catalog> {
        Catalog::new(self.measures.clone())
    }

    /// The configured waterfall order, or every measure in catalog order.
    pub fn waterfall_package(&self, catalog: &Catalog) -> Result<Package> {
        if self.waterfall_order.is_empty() {
            let ids: Vec<&str> = catalog.measures().iter().map(|m| m.id.as_str()).collect();
            Package::new(&ids, catalog)
        } else {
            Package::new(&self.waterfall_order, catalog)
        }
    }

    pub fn weather(&self) -> Result<MonthlyWeather> {
        match &self.weather_path {
            Some(p) => MonthlyWeather::from_path(&self.resolve(p)),
            None => Ok(MonthlyWeather::bundled()),
        }
    }

    pub fn import_path(&self) -> Option<PathBuf> {
        self.import_path.as_deref().map(|p| self.resolve(p))
    }

    pub fn report_dir(&self) -> Option<PathBuf> {
        self.report_dir.as_deref().map(|p| self.resolve(p))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidInput(format!("cannot serialize config: {e}")))
    }
}
