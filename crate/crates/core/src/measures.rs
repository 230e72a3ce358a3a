//! Retrofit catalog: each measure is a declarative transformation of a [`BuildingModel`]
//! plus the capital-cost basis used for upfront cost.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::enduse::{EndUse, Fuel};
use crate::model::{validate_pv, BuildingModel, HrvSpec, PvSpec, SurfaceKind, ValidationReport};
use crate::units::convert_r_imperial_to_rsi;
use crate::{Error, Result};

/// Declarative parameter targets. Insulation and PV measures add to the building and may
/// only be applied once; every other kind sets an absolute value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Transformation {
    /// Add batt insulation of the given imperial R-value to every roof surface.
    AddRoofRsi {
        r_imperial: f64,
    },
    /// Add batt insulation of the given imperial R-value to every opaque wall.
    AddWallRsi {
        r_imperial: f64,
    },
    SetWindowUShgc {
        u_value: f64,
        shgc: f64,
    },
    SetInfiltration {
        rate_per_envelope_area: f64,
    },
    SetHeatingCopFuel {
        heating_cop: f64,
        heating_fuel: Fuel,
    },
    SetDhwCop {
        cop: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fuel: Option<Fuel>,
    },
    /// Set heat-recovery effectiveness; `ventilation_flow` is needed only when the building
    /// has no mechanical ventilation yet.
    SetHrvEff {
        sensible_effectiveness: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ventilation_flow: Option<f64>,
    },
    AddPv {
        array_area: f64,
        module_efficiency: f64,
        performance_ratio: f64,
    },
    SetSetback {
        heating_setback: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        setback_fraction: Option<f64>,
    },
    /// Lighting density becomes `factor` × original.
    ScaleLighting {
        factor: f64,
    },
    /// Plug density becomes `factor` × original.
    ScalePlug {
        factor: f64,
    },
}

impl Transformation {
    pub fn kind(&self) -> &'static str {
        match self {
            Transformation::AddRoofRsi { .. } => "add_roof_rsi",
            Transformation::AddWallRsi { .. } => "add_wall_rsi",
            Transformation::SetWindowUShgc { .. } => "set_window_u_shgc",
            Transformation::SetInfiltration { .. } => "set_infiltration",
            Transformation::SetHeatingCopFuel { .. } => "set_heating_cop_fuel",
            Transformation::SetDhwCop { .. } => "set_dhw_cop",
            Transformation::SetHrvEff { .. } => "set_hrv_eff",
            Transformation::AddPv { .. } => "add_pv",
            Transformation::SetSetback { .. } => "set_setback",
            Transformation::ScaleLighting { .. } => "scale_lighting",
            Transformation::ScalePlug { .. } => "scale_plug",
        }
    }

    /// Additive measures conflict on a second application instead of stacking.
    pub fn is_additive(&self) -> bool {
        matches!(
            self,
            Transformation::AddRoofRsi { .. } | Transformation::AddWallRsi { .. } | Transformation::AddPv { .. }
        )
    }

    /// Envelope area the per-m² capital cost applies to, if any.
    pub fn affected_area(&self, b: &BuildingModel) -> Option<f64> {
        match self {
            Transformation::AddRoofRsi { .. } => Some(b.area_of(SurfaceKind::Roof)),
            Transformation::AddWallRsi { .. } => Some(b.area_of(SurfaceKind::Wall)),
            Transformation::SetWindowUShgc { .. } => Some(b.area_of(SurfaceKind::Window)),
            Transformation::SetInfiltration { .. } => Some(b.infiltration.reference_area),
            Transformation::AddPv { array_area, .. } => Some(*array_area),
            Transformation::ScaleLighting { .. } | Transformation::ScalePlug { .. } => Some(b.loads.floor_area),
            Transformation::SetHeatingCopFuel { .. }
            | Transformation::SetDhwCop { .. }
            | Transformation::SetHrvEff { .. }
            | Transformation::SetSetback { .. } => None,
        }
        .filter(|a| *a > 0.0)
    }
}

/// Capital cost: a per-m² rate over the affected area plus a system lump sum, with an optional
/// end-of-life lump sum.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBasis {
    /// CAD per m² of affected envelope area.
    #[serde(default)]
    pub unit_cost_per_m2: f64,
    /// CAD, system capital cost.
    #[serde(default)]
    pub lump_sum: f64,
    /// CAD, incurred at the end of the analysis horizon.
    #[serde(default)]
    pub disposal_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub id: String,
    pub label: String,
    pub transformation: Transformation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostBasis>,
}

impl MeasureSpec {
    pub fn new(id: impl Into<String>, label: impl Into<String>, transformation: Transformation) -> Self {
        MeasureSpec {
            id: id.into(),
            label: label.into(),
            transformation,
            cost: None,
        }
    }

    pub fn with_cost(mut self, cost: CostBasis) -> Self {
        self.cost = Some(cost);
        self
    }

    /// Parameter and cost-basis bounds, independent of any building.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        let mut bound = |ok: bool, field: &str, reason: String| {
            if !ok {
                r.push(field.to_string(), reason);
            }
        };
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        match &self.transformation {
            Transformation::AddRoofRsi { r_imperial } | Transformation::AddWallRsi { r_imperial } => bound(
                nonneg(*r_imperial),
                "r_imperial",
                format!("must be >= 0, got {r_imperial}"),
            ),
            Transformation::SetWindowUShgc { u_value, shgc } => {
                bound(
                    *u_value > 0.0 && u_value.is_finite(),
                    "u_value",
                    format!("must be > 0, got {u_value}"),
                );
                bound(unit(*shgc), "shgc", format!("must lie in [0, 1], got {shgc}"));
            }
            Transformation::SetInfiltration { rate_per_envelope_area } => bound(
                nonneg(*rate_per_envelope_area),
                "rate_per_envelope_area",
                format!("must be >= 0, got {rate_per_envelope_area}"),
            ),
            Transformation::SetHeatingCopFuel { heating_cop, .. } => bound(
                *heating_cop > 0.0 && heating_cop.is_finite(),
                "heating_cop",
                format!("must be > 0, got {heating_cop}"),
            ),
            Transformation::SetDhwCop { cop, .. } => {
                bound(*cop > 0.0 && cop.is_finite(), "cop", format!("must be > 0, got {cop}"))
            }
            Transformation::SetHrvEff {
                sensible_effectiveness,
                ventilation_flow,
            } => {
                bound(
                    unit(*sensible_effectiveness),
                    "sensible_effectiveness",
                    format!("must lie in [0, 1], got {sensible_effectiveness}"),
                );
                if let Some(flow) = ventilation_flow {
                    bound(nonneg(*flow), "ventilation_flow", format!("must be >= 0, got {flow}"));
                }
            }
            Transformation::AddPv {
                array_area,
                module_efficiency,
                performance_ratio,
            } => {
                let pv = PvSpec {
                    array_area: *array_area,
                    module_efficiency: *module_efficiency,
                    performance_ratio: *performance_ratio,
                };
                let mut sub = ValidationReport::default();
                validate_pv(&pv, "pv", &mut sub);
                for v in sub.violations {
                    bound(false, &v.field, v.reason);
                }
            }
            Transformation::SetSetback {
                heating_setback,
                setback_fraction,
            } => {
                bound(heating_setback.is_finite(), "heating_setback", "must be finite".into());
                if let Some(f) = setback_fraction {
                    bound(unit(*f), "setback_fraction", format!("must lie in [0, 1], got {f}"));
                }
            }
            Transformation::ScaleLighting { factor } | Transformation::ScalePlug { factor } => {
                bound(nonneg(*factor), "factor", format!("must be >= 0, got {factor}"))
            }
        }
        if let Some(c) = &self.cost {
            bound(
                nonneg(c.unit_cost_per_m2),
                "cost.unit_cost_per_m2",
                format!("must be >= 0, got {}", c.unit_cost_per_m2),
            );
            bound(
                nonneg(c.lump_sum),
                "cost.lump_sum",
                format!("must be >= 0, got {}", c.lump_sum),
            );
            bound(
                nonneg(c.disposal_cost),
                "cost.disposal_cost",
                format!("must be >= 0, got {}", c.disposal_cost),
            );
        }
        r
    }
}

/// Immutable, id-unique list of measures.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Catalog {
    measures: Vec<MeasureSpec>,
}

impl Catalog {
    pub fn new(measures: Vec<MeasureSpec>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for m in &measures {
            if !seen.insert(m.id.as_str()) {
                return Err(Error::DuplicateMeasure(m.id.clone()));
            }
            let report = m.validate();
            if !report.is_clean() {
                return Err(Error::InvalidBuilding(report.prefixed(&format!("measures.{}", m.id))));
            }
        }
        Ok(Catalog { measures })
    }

    pub fn measures(&self) -> &[MeasureSpec] {
        &self.measures
    }

    pub fn len(&self) -> usize {
        self.measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measures.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&MeasureSpec> {
        self.measures.iter().find(|m| m.id == id)
    }
}

/// Ordered, duplicate-free selection of catalog measures.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Package {
    ids: Vec<String>,
}

impl Package {
    pub fn new<S: AsRef<str>>(ids: &[S], catalog: &Catalog) -> Result<Self> {
        let mut out: Vec<String> = Vec::with_capacity(ids.len());
        for id in ids {
            let id = id.as_ref();
            if catalog.get(id).is_none() {
                return Err(Error::UnknownMeasure(id.to_string()));
            }
            if out.iter().any(|x| x == id) {
                return Err(Error::DuplicateMeasure(id.to_string()));
            }
            out.push(id.to_string());
        }
        Ok(Package { ids: out })
    }

    pub fn empty() -> Self {
        Package::default()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Resolve ids against the catalog the package was built from.
    pub fn resolve<'c>(&self, catalog: &'c Catalog) -> Result<Vec<&'c MeasureSpec>> {
        self.ids
            .iter()
            .map(|id| catalog.get(id).ok_or_else(|| Error::UnknownMeasure(id.clone())))
            .collect()
    }
}

fn conflict(m: &MeasureSpec, reason: impl Into<String>) -> Error {
    Error::Conflict {
        measure: m.id.clone(),
        reason: reason.into(),
    }
}

fn add_insulation(b: &mut BuildingModel, m: &MeasureSpec, kind: SurfaceKind, r_imperial: f64) -> Result<()> {
    let added = convert_r_imperial_to_rsi(r_imperial)?;
    let mut touched = false;
    for s in b.surfaces.iter_mut().filter(|s| s.kind == kind) {
        if s.added_rsi > 0.0 {
            return Err(conflict(m, format!("{kind} insulation was already added")));
        }
        s.u_value = 1.0 / (1.0 / s.u_value + added);
        s.added_rsi = added;
        touched = true;
    }
    if !touched {
        return Err(conflict(m, format!("building has no {kind} surfaces")));
    }
    Ok(())
}

/// New building with `m` applied; `b` is left untouched.
pub fn apply_measure(b: &BuildingModel, m: &MeasureSpec) -> Result<BuildingModel> {
    let mut out = b.clone();
    match &m.transformation {
        Transformation::AddRoofRsi { r_imperial } => add_insulation(&mut out, m, SurfaceKind::Roof, *r_imperial)?,
        Transformation::AddWallRsi { r_imperial } => add_insulation(&mut out, m, SurfaceKind::Wall, *r_imperial)?,
        Transformation::SetWindowUShgc { u_value, shgc } => {
            let mut touched = false;
            for w in out.surfaces.iter_mut().filter(|s| s.kind == SurfaceKind::Window) {
                w.u_value = *u_value;
                w.shgc = Some(*shgc);
                touched = true;
            }
            if !touched {
                return Err(conflict(m, "building has no window surfaces"));
            }
        }
        Transformation::SetInfiltration { rate_per_envelope_area } => {
            out.infiltration.rate_per_envelope_area = *rate_per_envelope_area;
        }
        Transformation::SetHeatingCopFuel {
            heating_cop,
            heating_fuel,
        } => {
            out.hvac.heating_cop = *heating_cop;
            out.hvac.heating_fuel = *heating_fuel;
            out.fuel_map.insert(EndUse::SpaceHeating, *heating_fuel);
        }
        Transformation::SetDhwCop { cop, fuel } => {
            out.dhw.cop = *cop;
            if let Some(fuel) = fuel {
                out.dhw.fuel = *fuel;
                out.fuel_map.insert(EndUse::Dhw, *fuel);
            }
        }
        Transformation::SetHrvEff {
            sensible_effectiveness,
            ventilation_flow,
        } => match (out.hrv.as_mut(), ventilation_flow) {
            (Some(hrv), flow) => {
                hrv.sensible_effectiveness = *sensible_effectiveness;
                if let Some(flow) = flow {
                    hrv.ventilation_flow = *flow;
                }
            }
            (None, Some(flow)) => {
                out.hrv = Some(HrvSpec {
                    sensible_effectiveness: *sensible_effectiveness,
                    ventilation_flow: *flow,
                })
            }
            (None, None) => {
                return Err(conflict(
                    m,
                    "building has no mechanical ventilation and the measure gives no ventilation_flow",
                ))
            }
        },
        Transformation::AddPv {
            array_area,
            module_efficiency,
            performance_ratio,
        } => {
            if out.pv.is_some() {
                return Err(conflict(m, "building already has a PV array"));
            }
            out.pv = Some(PvSpec {
                array_area: *array_area,
                module_efficiency: *module_efficiency,
                performance_ratio: *performance_ratio,
            });
        }
        Transformation::SetSetback {
            heating_setback,
            setback_fraction,
        } => {
            out.thermostat.heating_setback = *heating_setback;
            if let Some(f) = setback_fraction {
                out.thermostat.setback_fraction = *f;
            }
        }
        Transformation::ScaleLighting { factor } => out.loads.lighting_factor = *factor,
        Transformation::ScalePlug { factor } => out.loads.plug_factor = *factor,
    }
    Ok(out)
}

/// Left fold of [`apply_measure`] in order; the first conflict aborts.
pub fn apply_measures(b: &BuildingModel, measures: &[&MeasureSpec]) -> Result<BuildingModel> {
    let mut out = b.clone();
    for m in measures {
        out = apply_measure(&out, m)?;
    }
    Ok(out)
}

pub fn apply_package(b: &BuildingModel, package: &Package, catalog: &Catalog) -> Result<BuildingModel> {
    apply_measures(b, &package.resolve(catalog)?)
}

/// Upfront capital cost, CAD: per-m² cost over the affected area plus the system lump sum.
pub fn measure_upfront_cost(m: &MeasureSpec, b: &BuildingModel) -> Result<f64> {
    let cost = m.cost.as_ref().ok_or_else(|| Error::MissingCostBasis(m.id.clone()))?;
    let envelope = if cost.unit_cost_per_m2 > 0.0 {
        let area = m
            .transformation
            .affected_area(b)
            .ok_or_else(|| Error::MissingArea(m.id.clone()))?;
        cost.unit_cost_per_m2 * area
    } else {
        0.0
    };
    Ok(envelope + cost.lump_sum)
}
