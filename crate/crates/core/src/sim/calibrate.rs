//! Deterministic calibration of a few free model parameters against observed annual totals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{pv_annual_yield, simulate_annual, MonthlyWeather};
use crate::model::{validate_pv, BuildingModel, PvSpec, ValidationReport};
use crate::{Error, Result};

const MAX_PARAMETERS: usize = 3;
const GRID_STEPS: usize = 20;
const REFINE_LEVELS: usize = 6;
const MAX_PASSES: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationParameter {
    /// Gain utilisation factor η.
    GainUtilization,
    /// Hot-water draw, L/day.
    DhwDailyDraw,
    /// PV performance ratio.
    PvPerformanceRatio,
}

impl CalibrationParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            CalibrationParameter::GainUtilization => "gain_utilization",
            CalibrationParameter::DhwDailyDraw => "dhw_daily_draw",
            CalibrationParameter::PvPerformanceRatio => "pv_performance_ratio",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Observed annual totals, GJ. Any subset may be given.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_gj: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub electricity_gj: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub natural_gas_gj: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pv_generation_gj: Option<f64>,
}

impl CalibrationTargets {
    fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> {
        [
            ("total_gj", self.total_gj),
            ("electricity_gj", self.electricity_gj),
            ("natural_gas_gj", self.natural_gas_gj),
            ("pv_generation_gj", self.pv_generation_gj),
        ]
        .into_iter()
        .filter_map(|(name, v)| v.map(|v| (name, v)))
    }
}

fn default_tolerance() -> f64 {
    0.10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSetup {
    /// Free parameters, searched in this order. At most three.
    pub parameters: Vec<CalibrationParameter>,
    pub targets: CalibrationTargets,
    /// Largest acceptable relative error; results above it are flagged infeasible.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bounds: BTreeMap<CalibrationParameter, ParameterBounds>,
    /// Array used for the PV target when the building itself has none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pv_reference: Option<PvSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetResidual {
    pub name: &'static str,
    pub target: f64,
    pub simulated: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub gain_utilization: f64,
    pub dhw_daily_draw: f64,
    /// Tuned ratio for the building's array, or the reference array when the building has none.
    pub pv_performance_ratio: Option<f64>,
    /// Largest relative error over all targets after tuning.
    pub residual: f64,
    pub initial_residual: f64,
    pub targets: Vec<TargetResidual>,
    /// `residual <= tolerance`.
    pub feasible: bool,
    pub evaluations: usize,
}

impl CalibrationResult {
    /// Copy of `b` with the tuned parameters written back.
    pub fn apply(&self, b: &BuildingModel) -> BuildingModel {
        let mut out = b.clone();
        out.gain_utilization = self.gain_utilization;
        out.dhw.daily_draw_volume = self.dhw_daily_draw;
        if let (Some(pv), Some(pr)) = (out.pv.as_mut(), self.pv_performance_ratio) {
            pv.performance_ratio = pr;
        }
        out
    }
}

struct Problem<'a> {
    building: &'a BuildingModel,
    weather: &'a MonthlyWeather,
    targets: &'a CalibrationTargets,
    pv_reference: Option<PvSpec>,
    evaluations: usize,
}

#[derive(Clone, Copy)]
struct Point {
    eta: f64,
    draw: f64,
    pr: f64,
}

impl Point {
    fn get(&self, p: CalibrationParameter) -> f64 {
        match p {
            CalibrationParameter::GainUtilization => self.eta,
            CalibrationParameter::DhwDailyDraw => self.draw,
            CalibrationParameter::PvPerformanceRatio => self.pr,
        }
    }

    fn set(&mut self, p: CalibrationParameter, v: f64) {
        match p {
            CalibrationParameter::GainUtilization => self.eta = v,
            CalibrationParameter::DhwDailyDraw => self.draw = v,
            CalibrationParameter::PvPerformanceRatio => self.pr = v,
        }
    }
}

impl Problem<'_> {
    fn building_at(&self, x: Point) -> BuildingModel {
        let mut b = self.building.clone();
        b.gain_utilization = x.eta;
        b.dhw.daily_draw_volume = x.draw;
        if let Some(pv) = b.pv.as_mut() {
            pv.performance_ratio = x.pr;
        }
        b
    }

    fn residuals(&mut self, x: Point) -> Result<Vec<TargetResidual>> {
        self.evaluations += 1;
        let b = self.building_at(x);
        let table = simulate_annual(&b, self.weather)?;
        let pv_yield = match (&b.pv, &self.pv_reference) {
            (Some(pv), _) => pv_annual_yield(pv, self.weather),
            (None, Some(reference)) => pv_annual_yield(
                &PvSpec {
                    performance_ratio: x.pr,
                    ..reference.clone()
                },
                self.weather,
            ),
            (None, None) => 0.0,
        };
        Ok(self
            .targets
            .iter()
            .map(|(name, target)| {
                let simulated = match name {
                    "total_gj" => table.total(),
                    "electricity_gj" => table.electricity(),
                    "natural_gas_gj" => table.natural_gas(),
                    _ => pv_yield,
                };
                let err = (simulated - target).abs();
                let relative_error = if target != 0.0 { err / target.abs() } else { err };
                TargetResidual {
                    name,
                    target,
                    simulated,
                    relative_error,
                }
            })
            .collect())
    }

    fn objective(&mut self, x: Point) -> Result<f64> {
        Ok(self.residuals(x)?.iter().map(|r| r.relative_error).fold(0.0, f64::max))
    }
}

fn default_bounds(p: CalibrationParameter, initial: f64) -> ParameterBounds {
    match p {
        CalibrationParameter::GainUtilization | CalibrationParameter::PvPerformanceRatio => {
            ParameterBounds { lower: 0.0, upper: 1.0 }
        }
        CalibrationParameter::DhwDailyDraw => ParameterBounds {
            lower: 0.0,
            upper: (4.0 * initial).max(1000.0),
        },
    }
}

/// Coordinate-wise grid search with successive refinement.
///
/// Parameters are visited in declared order; each visit scans a 21-point grid over the
/// current bracket, then narrows the bracket around the best point six times. A move is
/// accepted only when it strictly lowers the worst relative error, so a building that
/// already matches its targets comes back unchanged.
pub fn calibrate_model(
    building: &BuildingModel,
    weather: &MonthlyWeather,
    setup: &CalibrationSetup,
) -> Result<CalibrationResult> {
    if setup.parameters.is_empty() || setup.parameters.len() > MAX_PARAMETERS {
        return Err(Error::InvalidInput(format!(
            "calibration takes between 1 and {MAX_PARAMETERS} free parameters, got {}",
            setup.parameters.len()
        )));
    }
    for (i, p) in setup.parameters.iter().enumerate() {
        if setup.parameters[..i].contains(p) {
            return Err(Error::InvalidInput(format!(
                "calibration parameter `{}` declared twice",
                p.as_str()
            )));
        }
    }
    if setup.targets.iter().next().is_none() {
        return Err(Error::InvalidInput("calibration needs at least one target".into()));
    }
    if let Some((name, v)) = setup.targets.iter().find(|(_, v)| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput(format!(
            "calibration target {name} must be >= 0, got {v}"
        )));
    }
    let has_pv = building.pv.is_some() || setup.pv_reference.is_some();
    let wants_pv = setup.parameters.contains(&CalibrationParameter::PvPerformanceRatio)
        || setup.targets.pv_generation_gj.is_some();
    if wants_pv && !has_pv {
        return Err(Error::InvalidInput(
            "PV calibration needs a PV array on the building or a pv_reference".into(),
        ));
    }
    if let Some(reference) = &setup.pv_reference {
        let mut report = ValidationReport::default();
        validate_pv(reference, "pv_reference", &mut report);
        if !report.is_clean() {
            return Err(Error::InvalidBuilding(report));
        }
    }

    let start = Point {
        eta: building.gain_utilization,
        draw: building.dhw.daily_draw_volume,
        pr: building
            .pv
            .as_ref()
            .or(setup.pv_reference.as_ref())
            .map_or(0.0, |pv| pv.performance_ratio),
    };
    let mut problem = Problem {
        building,
        weather,
        targets: &setup.targets,
        pv_reference: setup.pv_reference.clone(),
        evaluations: 0,
    };

    let initial_residual = problem.objective(start)?;
    let mut x = start;
    let mut best = initial_residual;

    if best > 0.0 {
        for _ in 0..MAX_PASSES {
            let before = best;
            for &param in &setup.parameters {
                let bounds = setup
                    .bounds
                    .get(&param)
                    .copied()
                    .unwrap_or_else(|| default_bounds(param, start.get(param)));
                if bounds.lower.is_nan() || bounds.upper.is_nan() || bounds.lower > bounds.upper {
                    return Err(Error::InvalidInput(format!(
                        "bounds for `{}` are empty: [{}, {}]",
                        param.as_str(),
                        bounds.lower,
                        bounds.upper
                    )));
                }
                let (mut lo, mut hi) = (bounds.lower, bounds.upper);
                let mut value = x.get(param);
                for _ in 0..REFINE_LEVELS {
                    for k in 0..=GRID_STEPS {
                        let candidate = lo + (hi - lo) * k as f64 / GRID_STEPS as f64;
                        let mut trial = x;
                        trial.set(param, candidate);
                        let f = problem.objective(trial)?;
                        if f < best {
                            best = f;
                            value = candidate;
                        }
                    }
                    let span = (hi - lo) / GRID_STEPS as f64;
                    lo = (value - span).max(bounds.lower);
                    hi = (value + span).min(bounds.upper);
                }
                x.set(param, value);
            }
            if best == 0.0 || before - best <= 1e-12 * before.max(1.0) {
                break;
            }
        }
    }

    let targets = problem.residuals(x)?;
    Ok(CalibrationResult {
        gain_utilization: x.eta,
        dhw_daily_draw: x.draw,
        pv_performance_ratio: (building.pv.is_some() || setup.pv_reference.is_some()).then_some(x.pr),
        residual: best,
        initial_residual,
        targets,
        feasible: best <= setup.tolerance,
        evaluations: problem.evaluations,
    })
}
