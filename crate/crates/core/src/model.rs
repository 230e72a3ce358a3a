//! Building description: envelope surfaces, air exchange, systems, internal loads and the
//! explicit end-use to fuel mapping.
//!
//! Every type here is a plain value; a [`BuildingModel`] is never mutated once built, retrofit
//! measures produce new copies (see [`crate::measures`]).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::enduse::{EndUse, Fuel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Wall,
    Roof,
    Floor,
    Window,
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SurfaceKind::Wall => "wall",
            SurfaceKind::Roof => "roof",
            SurfaceKind::Floor => "floor",
            SurfaceKind::Window => "window",
        };
        f.write_str(s)
    }
}

/// An aggregate envelope surface. Windows carry their own U-value and SHGC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub kind: SurfaceKind,
    /// m²
    pub area: f64,
    /// W/m²K, including any added insulation.
    pub u_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shgc: Option<f64>,
    /// Insulation resistance (m²K/W) added by a retrofit; zero for the original assembly.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub added_rsi: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl Surface {
    pub fn opaque(kind: SurfaceKind, area: f64, u_value: f64) -> Self {
        Surface {
            kind,
            area,
            u_value,
            shgc: None,
            added_rsi: 0.0,
        }
    }

    pub fn window(area: f64, u_value: f64, shgc: f64) -> Self {
        Surface {
            kind: SurfaceKind::Window,
            area,
            u_value,
            shgc: Some(shgc),
            added_rsi: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfiltrationSpec {
    /// m³/s per m² of above-grade envelope.
    pub rate_per_envelope_area: f64,
    /// m²
    pub reference_area: f64,
}

impl InfiltrationSpec {
    /// Total infiltration flow, m³/s.
    pub fn flow(&self) -> f64 {
        self.rate_per_envelope_area * self.reference_area
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HvacSpec {
    pub heating_cop: f64,
    pub cooling_cop: f64,
    pub heating_fuel: Fuel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DhwSpec {
    pub cop: f64,
    /// °C
    pub delivery_temp: f64,
    pub fuel: Fuel,
    /// L/day
    pub daily_draw_volume: f64,
    /// °C
    pub inlet_temp: f64,
}

/// Mechanical ventilation with optional sensible heat recovery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrvSpec {
    pub sensible_effectiveness: f64,
    /// m³/s
    pub ventilation_flow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvSpec {
    /// m²
    pub array_area: f64,
    pub module_efficiency: f64,
    pub performance_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermostatSchedule {
    /// °C, occupied hours
    pub heating_setpoint: f64,
    /// °C, setback hours
    pub heating_setback: f64,
    /// °C
    pub cooling_setpoint: f64,
    /// Fraction of hours held at the setback temperature.
    pub setback_fraction: f64,
}

impl ThermostatSchedule {
    /// Time-weighted heating base temperature used for degree days.
    pub fn effective_heating_base(&self) -> f64 {
        (1.0 - self.setback_fraction) * self.heating_setpoint + self.setback_fraction * self.heating_setback
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalLoads {
    /// W/m² of floor area
    pub lighting_density: f64,
    /// W/m² of floor area
    pub plug_density: f64,
    pub usage_fraction: f64,
    /// m²
    pub floor_area: f64,
    /// Multiplier applied by a lighting retrofit (1 = original fixtures).
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub lighting_factor: f64,
    /// Multiplier applied by an appliance retrofit (1 = original appliances).
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub plug_factor: f64,
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

impl InternalLoads {
    pub fn effective_lighting_density(&self) -> f64 {
        self.lighting_density * self.lighting_factor
    }

    pub fn effective_plug_density(&self) -> f64 {
        self.plug_density * self.plug_factor
    }

    /// Mean lighting power, W.
    pub fn lighting_power(&self) -> f64 {
        self.effective_lighting_density() * self.floor_area * self.usage_fraction
    }

    /// Mean plug power, W.
    pub fn plug_power(&self) -> f64 {
        self.effective_plug_density() * self.floor_area * self.usage_fraction
    }
}

pub const DEFAULT_GAIN_UTILIZATION: f64 = 0.9;

fn default_gain_utilization() -> f64 {
    DEFAULT_GAIN_UTILIZATION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingModel {
    pub surfaces: Vec<Surface>,
    pub infiltration: InfiltrationSpec,
    pub hvac: HvacSpec,
    pub dhw: DhwSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hrv: Option<HrvSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pv: Option<PvSpec>,
    pub thermostat: ThermostatSchedule,
    pub loads: InternalLoads,
    pub fuel_map: BTreeMap<EndUse, Fuel>,
    /// Fraction of internal and solar gains that offsets heating losses.
    #[serde(default = "default_gain_utilization")]
    pub gain_utilization: f64,
}

impl BuildingModel {
    pub fn surfaces_of(&self, kind: SurfaceKind) -> impl Iterator<Item = &Surface> {
        self.surfaces.iter().filter(move |s| s.kind == kind)
    }

    pub fn area_of(&self, kind: SurfaceKind) -> f64 {
        self.surfaces_of(kind).map(|s| s.area).sum()
    }

    pub fn fuel_for(&self, end_use: EndUse) -> Option<Fuel> {
        self.fuel_map.get(&end_use).copied()
    }
}

/// One violated invariant, named by field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, field: impl Into<String>, reason: impl Into<String>) {
        self.violations.push(Violation {
            field: field.into(),
            reason: reason.into(),
        });
    }

    /// Prefix every field path, for nesting reports inside a larger document.
    pub fn prefixed(mut self, prefix: &str) -> Self {
        for v in &mut self.violations {
            v.field = format!("{prefix}.{}", v.field);
        }
        self
    }

    fn check(&mut self, ok: bool, field: impl Into<String>, reason: impl Into<String>) {
        if !ok {
            self.push(field, reason);
        }
    }

    fn finite(&mut self, value: f64, field: &str) -> bool {
        if value.is_finite() {
            true
        } else {
            self.push(field, format!("must be a finite number, got {value}"));
            false
        }
    }

    fn positive(&mut self, value: f64, field: &str) {
        if self.finite(value, field) {
            self.check(value > 0.0, field, format!("must be > 0, got {value}"));
        }
    }

    fn non_negative(&mut self, value: f64, field: &str) {
        if self.finite(value, field) {
            self.check(value >= 0.0, field, format!("must be >= 0, got {value}"));
        }
    }

    fn unit_interval(&mut self, value: f64, field: &str) {
        if self.finite(value, field) {
            self.check(
                (0.0..=1.0).contains(&value),
                field,
                format!("must lie in [0, 1], got {value}"),
            );
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  {v}")?;
        }
        Ok(())
    }
}

pub fn validate_pv(pv: &PvSpec, prefix: &str, report: &mut ValidationReport) {
    report.non_negative(pv.array_area, &format!("{prefix}.array_area"));
    report.unit_interval(pv.module_efficiency, &format!("{prefix}.module_efficiency"));
    report.unit_interval(pv.performance_ratio, &format!("{prefix}.performance_ratio"));
}

/// Check every field bound and structural rule. Violations are data, never errors.
pub fn validate_building(b: &BuildingModel) -> ValidationReport {
    let mut r = ValidationReport::default();

    for (i, s) in b.surfaces.iter().enumerate() {
        let p = format!("surfaces[{i}]");
        r.positive(s.area, &format!("{p}.area"));
        r.positive(s.u_value, &format!("{p}.u_value"));
        r.non_negative(s.added_rsi, &format!("{p}.added_rsi"));
        match (s.kind, s.shgc) {
            (SurfaceKind::Window, Some(shgc)) => r.unit_interval(shgc, &format!("{p}.shgc")),
            (SurfaceKind::Window, None) => r.push(format!("{p}.shgc"), "windows require an SHGC"),
            (kind, Some(_)) => r.push(format!("{p}.shgc"), format!("{kind} surfaces carry no SHGC")),
            (_, None) => {}
        }
    }
    if b.surfaces_of(SurfaceKind::Wall).count() == 0 {
        r.push("surfaces", "at least one wall surface is required");
    }
    if b.surfaces_of(SurfaceKind::Roof).count() == 0 {
        r.push("surfaces", "at least one roof surface is required");
    }

    r.non_negative(
        b.infiltration.rate_per_envelope_area,
        "infiltration.rate_per_envelope_area",
    );
    r.positive(b.infiltration.reference_area, "infiltration.reference_area");

    r.positive(b.hvac.heating_cop, "hvac.heating_cop");
    r.positive(b.hvac.cooling_cop, "hvac.cooling_cop");

    r.positive(b.dhw.cop, "dhw.cop");
    r.non_negative(b.dhw.daily_draw_volume, "dhw.daily_draw_volume");
    if r.finite(b.dhw.delivery_temp, "dhw.delivery_temp") && r.finite(b.dhw.inlet_temp, "dhw.inlet_temp") {
        r.check(
            b.dhw.delivery_temp > b.dhw.inlet_temp,
            "dhw.delivery_temp",
            format!(
                "must exceed inlet_temp ({} <= {})",
                b.dhw.delivery_temp, b.dhw.inlet_temp
            ),
        );
    }

    if let Some(hrv) = &b.hrv {
        r.unit_interval(hrv.sensible_effectiveness, "hrv.sensible_effectiveness");
        r.non_negative(hrv.ventilation_flow, "hrv.ventilation_flow");
    }
    if let Some(pv) = &b.pv {
        validate_pv(pv, "pv", &mut r);
    }

    let t = &b.thermostat;
    let sp_ok = r.finite(t.heating_setpoint, "thermostat.heating_setpoint");
    let sb_ok = r.finite(t.heating_setback, "thermostat.heating_setback");
    if sp_ok && sb_ok {
        r.check(
            t.heating_setback <= t.heating_setpoint,
            "thermostat.heating_setback",
            format!(
                "setback {} exceeds heating setpoint {}",
                t.heating_setback, t.heating_setpoint
            ),
        );
    }
    r.finite(t.cooling_setpoint, "thermostat.cooling_setpoint");
    r.unit_interval(t.setback_fraction, "thermostat.setback_fraction");

    let l = &b.loads;
    r.non_negative(l.lighting_density, "loads.lighting_density");
    r.non_negative(l.plug_density, "loads.plug_density");
    r.unit_interval(l.usage_fraction, "loads.usage_fraction");
    r.non_negative(l.floor_area, "loads.floor_area");
    r.non_negative(l.lighting_factor, "loads.lighting_factor");
    r.non_negative(l.plug_factor, "loads.plug_factor");

    for end_use in EndUse::CONSUMING {
        if !b.fuel_map.contains_key(&end_use) {
            r.push(format!("fuel_map.{end_use}"), "no fuel mapped for this end use");
        }
    }
    if b.fuel_map.contains_key(&EndUse::PvGeneration) {
        r.push(
            "fuel_map.pv_generation",
            "PV generation is always netted against electricity",
        );
    }
    if let Some(fuel) = b.fuel_for(EndUse::SpaceHeating) {
        r.check(
            fuel == b.hvac.heating_fuel,
            "hvac.heating_fuel",
            format!("{} disagrees with fuel_map.space_heating = {fuel}", b.hvac.heating_fuel),
        );
    }
    if let Some(fuel) = b.fuel_for(EndUse::Dhw) {
        r.check(
            fuel == b.dhw.fuel,
            "dhw.fuel",
            format!("{} disagrees with fuel_map.dhw = {fuel}", b.dhw.fuel),
        );
    }

    r.unit_interval(b.gain_utilization, "gain_utilization");
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::presets;

    #[test]
    fn bundled_ng_building_is_clean() {
        let b = presets::ng_building();
        let report = validate_building(&b);
        assert!(report.is_clean(), "{report}");
        let e = presets::e_building();
        assert!(validate_building(&e).is_clean());
    }

    #[test]
    fn window_shgc_out_of_range_names_field() {
        let mut b = presets::ng_building();
        let idx = b.surfaces.iter().position(|s| s.kind == SurfaceKind::Window).unwrap();
        b.surfaces[idx].shgc = Some(1.2);
        let report = validate_building(&b);
        assert_eq!(report.len(), 1);
        assert_eq!(report.violations[0].field, format!("surfaces[{idx}].shgc"));
    }

    #[test]
    fn missing_roof_is_one_violation() {
        let mut b = presets::ng_building();
        b.surfaces.retain(|s| s.kind != SurfaceKind::Roof);
        let report = validate_building(&b);
        assert_eq!(report.len(), 1, "{report}");
        assert!(report.violations[0].reason.contains("roof"));
    }

    #[test]
    fn opaque_surface_with_shgc_rejected() {
        let mut b = presets::ng_building();
        b.surfaces[0].shgc = Some(0.5);
        assert_eq!(validate_building(&b).len(), 1);
    }

    #[test]
    fn setback_above_setpoint_rejected() {
        let mut b = presets::ng_building();
        b.thermostat.heating_setback = 25.0;
        let report = validate_building(&b);
        assert_eq!(report.violations[0].field, "thermostat.heating_setback");
    }

    #[test]
    fn fuel_map_must_cover_all_end_uses() {
        let mut b = presets::ng_building();
        b.fuel_map.remove(&EndUse::Plug);
        let report = validate_building(&b);
        assert_eq!(report.violations[0].field, "fuel_map.plug");
    }

    #[test]
    fn heating_fuel_must_match_fuel_map() {
        let mut b = presets::ng_building();
        b.hvac.heating_fuel = Fuel::Electricity;
        assert_eq!(validate_building(&b).violations[0].field, "hvac.heating_fuel");
    }

    #[test]
    fn nan_is_reported_not_panicking() {
        let mut b = presets::ng_building();
        b.infiltration.reference_area = f64::NAN;
        assert_eq!(validate_building(&b).len(), 1);
    }

    #[test]
    fn effective_base_blends_setpoint_and_setback() {
        let t = ThermostatSchedule {
            heating_setpoint: 22.0,
            heating_setback: 18.0,
            cooling_setpoint: 26.0,
            setback_fraction: 0.25,
        };
        assert_eq!(t.effective_heating_base(), 21.0);
    }
}
