//! Monthly quasi-steady-state energy model.
//!
//! Space heating is a monthly degree-day balance: transmission, infiltration and ventilation
//! losses at an effective (setback-weighted) base temperature, offset by a constant fraction
//! of internal and solar gains. Cooling uses cooling degree days at the cooling setpoint.
//! Lighting, plug loads and hot water are annual totals; PV is netted annually against
//! electricity.

mod calibrate;
mod weather;

pub use calibrate::{
    calibrate_model, CalibrationParameter, CalibrationResult, CalibrationSetup, CalibrationTargets, ParameterBounds,
    TargetResidual,
};
pub use weather::{MonthClimate, MonthlyWeather};

use serde::Serialize;

use crate::enduse::{EndUse, EndUseTable, Fuel};
use crate::model::{validate_building, BuildingModel, DhwSpec, PvSpec, SurfaceKind};
use crate::units::{
    AIR_VOLUMETRIC_HEAT_CAPACITY, HOURS_PER_YEAR, J_PER_GJ, J_PER_KWH, SECONDS_PER_DAY, WATER_SPECIFIC_HEAT,
};
use crate::{Error, Result};

/// Share of global horizontal irradiation reaching the average window plane after
/// orientation, frame and shading losses.
pub const SOLAR_APERTURE_FACTOR: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeDayMode {
    Heating,
    Cooling,
}

/// Degree days (K·day) per month against `base_temp`.
pub fn degree_days(weather: &MonthlyWeather, base_temp: f64, mode: DegreeDayMode) -> [f64; 12] {
    weather.months().map(|m| {
        let diff = match mode {
            DegreeDayMode::Heating => base_temp - m.mean_temp_c,
            DegreeDayMode::Cooling => m.mean_temp_c - base_temp,
        };
        diff.max(0.0) * f64::from(m.days)
    })
}

/// Ventilation flow and its unrecovered fraction contribute ρc·V·(1 − η).
fn ventilation_conductance(b: &BuildingModel) -> f64 {
    b.hrv.as_ref().map_or(0.0, |hrv| {
        AIR_VOLUMETRIC_HEAT_CAPACITY * hrv.ventilation_flow * (1.0 - hrv.sensible_effectiveness)
    })
}

/// Overall heat-loss coefficient H, W/K.
pub fn heat_loss_coefficient(b: &BuildingModel) -> f64 {
    let transmission: f64 = b.surfaces.iter().map(|s| s.u_value * s.area).sum();
    let infiltration = AIR_VOLUMETRIC_HEAT_CAPACITY * b.infiltration.flow();
    transmission + infiltration + ventilation_conductance(b)
}

/// Heating demand in GJ for one period: losses H·DD minus utilised gains, floored at zero.
pub fn space_heating_demand(h_w_per_k: f64, degree_days: f64, gains_j: f64, gain_utilization: f64) -> f64 {
    let losses = h_w_per_k * degree_days * SECONDS_PER_DAY;
    (losses - gain_utilization * gains_j).max(0.0) / J_PER_GJ
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonthlyHeating {
    /// Heat to be delivered to the space, GJ.
    pub demand_gj: [f64; 12],
    /// Fuel or electricity consumed by the heating plant, GJ.
    pub delivered_gj: [f64; 12],
}

impl MonthlyHeating {
    pub fn annual_demand(&self) -> f64 {
        self.demand_gj.iter().sum()
    }

    pub fn annual_delivered(&self) -> f64 {
        self.delivered_gj.iter().sum()
    }
}

/// Internal gains (lighting and plug) plus solar gains through windows, J per month.
pub fn monthly_gains(b: &BuildingModel, weather: &MonthlyWeather) -> [f64; 12] {
    let internal_w = b.loads.lighting_power() + b.loads.plug_power();
    let solar_aperture: f64 = b
        .surfaces_of(SurfaceKind::Window)
        .map(|w| w.area * w.shgc.unwrap_or(0.0))
        .sum::<f64>()
        * SOLAR_APERTURE_FACTOR;
    weather
        .months()
        .map(|m| internal_w * f64::from(m.days) * SECONDS_PER_DAY + solar_aperture * m.ghi_kwh_m2 * J_PER_KWH)
}

pub fn monthly_space_heating(b: &BuildingModel, weather: &MonthlyWeather) -> MonthlyHeating {
    let h = heat_loss_coefficient(b);
    let dd = degree_days(weather, b.thermostat.effective_heating_base(), DegreeDayMode::Heating);
    let gains = monthly_gains(b, weather);
    let mut demand_gj = [0.0; 12];
    let mut delivered_gj = [0.0; 12];
    for m in 0..12 {
        demand_gj[m] = space_heating_demand(h, dd[m], gains[m], b.gain_utilization);
        delivered_gj[m] = demand_gj[m] / b.hvac.heating_cop;
    }
    MonthlyHeating {
        demand_gj,
        delivered_gj,
    }
}

/// Annual space cooling energy, GJ, from cooling degree days at the cooling setpoint.
pub fn annual_space_cooling(b: &BuildingModel, weather: &MonthlyWeather) -> f64 {
    let h = heat_loss_coefficient(b);
    let cdd: f64 = degree_days(weather, b.thermostat.cooling_setpoint, DegreeDayMode::Cooling)
        .iter()
        .sum();
    h * cdd * SECONDS_PER_DAY / J_PER_GJ / b.hvac.cooling_cop
}

/// Delivered hot-water energy, GJ/yr.
pub fn dhw_annual(dhw: &DhwSpec) -> Result<f64> {
    if dhw.cop.is_nan() || dhw.cop <= 0.0 {
        return Err(Error::InvalidInput(format!("DHW COP must be > 0, got {}", dhw.cop)));
    }
    let heat_j = dhw.daily_draw_volume * 365.0 * WATER_SPECIFIC_HEAT * (dhw.delivery_temp - dhw.inlet_temp);
    Ok(heat_j / dhw.cop / J_PER_GJ)
}

/// Annual PV generation, GJ.
pub fn pv_annual_yield(pv: &PvSpec, weather: &MonthlyWeather) -> f64 {
    pv.array_area * weather.annual_ghi() * pv.module_efficiency * pv.performance_ratio * J_PER_KWH / J_PER_GJ
}

fn annual_from_power(mean_w: f64) -> f64 {
    mean_w * HOURS_PER_YEAR * 3600.0 / J_PER_GJ
}

/// Annual energy by end use for a validated building.
pub fn simulate_annual(b: &BuildingModel, weather: &MonthlyWeather) -> Result<EndUseTable> {
    let report = validate_building(b);
    if !report.is_clean() {
        return Err(Error::InvalidBuilding(report));
    }
    let fuel = |e: EndUse| -> Fuel { b.fuel_map[&e] };

    let heating = monthly_space_heating(b, weather).annual_delivered();
    let cooling = annual_space_cooling(b, weather);
    let dhw = dhw_annual(&b.dhw)?;
    let lighting = annual_from_power(b.loads.lighting_power());
    let plug = annual_from_power(b.loads.plug_power());
    let pv = b.pv.as_ref().map_or(0.0, |pv| pv_annual_yield(pv, weather));

    EndUseTable::from_entries([
        (EndUse::SpaceHeating, fuel(EndUse::SpaceHeating), heating),
        (EndUse::SpaceCooling, fuel(EndUse::SpaceCooling), cooling),
        (EndUse::Dhw, fuel(EndUse::Dhw), dhw),
        (EndUse::Lighting, fuel(EndUse::Lighting), lighting),
        (EndUse::Plug, fuel(EndUse::Plug), plug),
        (EndUse::PvGeneration, Fuel::Electricity, pv),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::presets;
    use crate::model::{HrvSpec, Surface};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn bare_building() -> BuildingModel {
        let mut b = presets::ng_building();
        b.surfaces = vec![
            Surface::opaque(SurfaceKind::Wall, 100.0, 0.5),
            Surface::opaque(SurfaceKind::Roof, 1.0, 1e-9),
        ];
        b.infiltration.rate_per_envelope_area = 0.0;
        b.hrv = None;
        b
    }

    #[test]
    fn degree_day_examples() {
        let w = MonthlyWeather::uniform(8.0, 30, 0.0).unwrap();
        assert_eq!(degree_days(&w, 18.0, DegreeDayMode::Heating)[0], 300.0);
        let w = MonthlyWeather::uniform(25.0, 30, 0.0).unwrap();
        assert_eq!(degree_days(&w, 18.0, DegreeDayMode::Heating)[0], 0.0);
        assert_eq!(degree_days(&w, 18.0, DegreeDayMode::Cooling)[0], 210.0);

        let mut months = *MonthlyWeather::uniform(0.0, 30, 0.0).unwrap().months();
        for (m, t) in months.iter_mut().zip([5.0, 10.0, 20.0]) {
            m.mean_temp_c = t;
        }
        let w = MonthlyWeather::new(months).unwrap();
        let dd = degree_days(&w, 18.0, DegreeDayMode::Heating);
        // (18 − T)·30 per month
        assert_eq!(&dd[..3], &[390.0, 240.0, 0.0]);
    }

    #[test]
    fn heat_loss_examples() {
        let b = bare_building();
        assert_relative_eq!(heat_loss_coefficient(&b), 50.0, max_relative = 1e-9);

        let mut b = bare_building();
        b.infiltration.rate_per_envelope_area = 0.001314;
        b.infiltration.reference_area = 1000.0;
        assert_relative_eq!(b.infiltration.flow(), 1.314, max_relative = 1e-12);
        assert_relative_eq!(heat_loss_coefficient(&b) - 50.0, 1576.8, max_relative = 1e-9);

        let mut b = bare_building();
        b.hrv = Some(HrvSpec {
            sensible_effectiveness: 1.0,
            ventilation_flow: 2.0,
        });
        assert_relative_eq!(heat_loss_coefficient(&b), 50.0, max_relative = 1e-9);
    }

    #[test]
    fn heating_demand_examples() {
        // 200 W/K · 300 K·day · 86400 s = 5.184e9 J
        let demand = space_heating_demand(200.0, 300.0, 0.0, 0.9);
        assert_relative_eq!(demand, 5.184, max_relative = 1e-12);
        assert_relative_eq!(demand / 0.8, 6.48, max_relative = 1e-12);
        assert_relative_eq!(demand / 2.75, 1.885_090_909_090_909, max_relative = 1e-12);
        assert_eq!(space_heating_demand(200.0, 300.0, 1e10, 0.9), 0.0);
    }

    #[test]
    fn dhw_examples() {
        let mut dhw = presets::ng_building().dhw;
        dhw.daily_draw_volume = 1000.0;
        dhw.inlet_temp = 10.0;
        dhw.delivery_temp = 60.0;
        dhw.cop = 1.0;
        // 1000 L · 365 · 4186 J/kgK · 50 K
        let oracle = 1000.0 * 365.0 * 4186.0 * 50.0 / 1e9;
        assert_relative_eq!(dhw_annual(&dhw).unwrap(), oracle, max_relative = 1e-12);
        // Reference figures are truncated to one decimal.
        assert_eq!((dhw_annual(&dhw).unwrap() * 10.0).trunc(), 763.0);
        dhw.cop = 0.85;
        assert_eq!((dhw_annual(&dhw).unwrap() * 10.0).trunc(), 898.0);
        dhw.daily_draw_volume = 0.0;
        assert_eq!(dhw_annual(&dhw).unwrap(), 0.0);
        dhw.cop = 0.0;
        assert!(dhw_annual(&dhw).is_err());
    }

    #[test]
    fn pv_examples() {
        let w = MonthlyWeather::uniform(10.0, 30, 100.0).unwrap();
        let pv = PvSpec {
            array_area: 50.0,
            module_efficiency: 0.18,
            performance_ratio: 0.8,
        };
        // 50 · 1200 · 0.18 · 0.8 = 8640 kWh
        assert_relative_eq!(pv_annual_yield(&pv, &w), 8640.0 * 3.6e-3, max_relative = 1e-12);
        assert_relative_eq!(pv_annual_yield(&pv, &w), 31.104, max_relative = 1e-12);
        let none = PvSpec { array_area: 0.0, ..pv };
        assert_eq!(pv_annual_yield(&none, &w), 0.0);
    }

    #[test]
    fn all_zero_building_gives_zero_table() {
        let mut b = bare_building();
        b.loads.lighting_density = 0.0;
        b.loads.plug_density = 0.0;
        b.dhw.daily_draw_volume = 0.0;
        b.surfaces.iter_mut().for_each(|s| s.u_value = 1e-300);
        let w = MonthlyWeather::uniform(22.0, 30, 0.0).unwrap();
        let mut b2 = b.clone();
        b2.thermostat.cooling_setpoint = 22.0;
        let t = simulate_annual(&b2, &w).unwrap();
        assert_eq!(t.total(), 0.0);
        assert!(t.entries().all(|(_, _, v)| v == 0.0));
    }

    #[test]
    fn fuel_totals_balance_exactly() {
        let b = presets::ng_building();
        let t = simulate_annual(&b, &MonthlyWeather::bundled()).unwrap();
        let mut ee = 0.0;
        let mut ne = 0.0;
        for (e, f, v) in t.entries() {
            match (e, f) {
                (EndUse::PvGeneration, _) => {}
                (_, Fuel::Electricity) => ee += v,
                (_, Fuel::NaturalGas) => ne += v,
            }
        }
        assert_eq!(t.electricity(), ee - t.pv_generation());
        assert_eq!(t.natural_gas(), ne);
        assert_eq!(b.fuel_map[&EndUse::SpaceHeating], Fuel::NaturalGas);
        assert_eq!(t.natural_gas(), t.space_heating());
    }

    #[test]
    fn simulation_is_bit_deterministic() {
        let b = presets::ng_building();
        let w = MonthlyWeather::bundled();
        let a = simulate_annual(&b, &w).unwrap();
        let c = simulate_annual(&b.clone(), &w.clone()).unwrap();
        assert_eq!(format!("{a:?}"), format!("{c:?}"));
    }

    #[test]
    fn invalid_building_is_rejected() {
        let mut b = presets::ng_building();
        b.hvac.heating_cop = 0.0;
        assert!(matches!(
            simulate_annual(&b, &MonthlyWeather::bundled()),
            Err(Error::InvalidBuilding(_))
        ));
    }

    #[test]
    fn hrv_zero_effectiveness_is_plain_ventilation() {
        let mut b = bare_building();
        b.hrv = Some(HrvSpec {
            sensible_effectiveness: 0.0,
            ventilation_flow: 0.5,
        });
        assert_relative_eq!(
            heat_loss_coefficient(&b),
            50.0 + 1e-9 + 1200.0 * 0.5,
            max_relative = 1e-12
        );
    }

    fn arb_building() -> impl Strategy<Value = BuildingModel> {
        (
            prop::collection::vec((50.0f64..2000.0, 0.1f64..4.0), 1..4),
            0.0f64..0.003,
            0.0f64..2.0,
            0.0f64..1.0,
            0.0f64..1.0,
            0.2f64..4.0,
        )
            .prop_map(|(walls, infil, vent, eff, eta, cop)| {
                let mut b = presets::ng_building();
                b.surfaces.retain(|s| s.kind != SurfaceKind::Wall);
                for (area, u) in walls {
                    b.surfaces.push(Surface::opaque(SurfaceKind::Wall, area, u));
                }
                b.infiltration.rate_per_envelope_area = infil;
                b.hrv = Some(HrvSpec {
                    sensible_effectiveness: eff,
                    ventilation_flow: vent,
                });
                b.gain_utilization = eta;
                b.hvac.heating_cop = cop;
                b
            })
    }

    proptest! {
        #[test]
        fn lower_u_never_raises_heating(b in arb_building(), idx in 0usize..8, scale in 0.0f64..1.0) {
            let w = MonthlyWeather::bundled();
            let before = monthly_space_heating(&b, &w).annual_demand();
            let mut lower = b.clone();
            let i = idx % lower.surfaces.len();
            lower.surfaces[i].u_value *= scale.max(1e-6);
            let after = monthly_space_heating(&lower, &w).annual_demand();
            prop_assert!(after <= before);
        }

        #[test]
        fn lower_infiltration_or_ventilation_never_raises_heating(b in arb_building(), scale in 0.0f64..1.0) {
            let w = MonthlyWeather::bundled();
            let before = monthly_space_heating(&b, &w).annual_demand();
            let mut tighter = b.clone();
            tighter.infiltration.rate_per_envelope_area *= scale;
            prop_assert!(monthly_space_heating(&tighter, &w).annual_demand() <= before);
            let mut recovered = b.clone();
            if let Some(hrv) = recovered.hrv.as_mut() {
                hrv.sensible_effectiveness += (1.0 - hrv.sensible_effectiveness) * (1.0 - scale);
            }
            prop_assert!(monthly_space_heating(&recovered, &w).annual_demand() <= before);
        }

        #[test]
        fn heat_loss_is_additive_over_surfaces(
            a in prop::collection::vec((1.0f64..500.0, 0.1f64..5.0), 1..5),
            c in prop::collection::vec((1.0f64..500.0, 0.1f64..5.0), 1..5),
        ) {
            let with = |set: &[(f64, f64)]| {
                let mut b = bare_building();
                b.surfaces = set.iter().map(|&(ar, u)| Surface::opaque(SurfaceKind::Wall, ar, u)).collect();
                heat_loss_coefficient(&b)
            };
            let joined: Vec<_> = a.iter().chain(c.iter()).copied().collect();
            let lhs = with(&joined);
            let rhs = with(&a) + with(&c);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs);
        }

        #[test]
        fn higher_heating_cop_reduces_delivered(b in arb_building(), bump in 0.01f64..3.0) {
            let w = MonthlyWeather::bundled();
            let base = monthly_space_heating(&b, &w);
            prop_assume!(base.annual_demand() > 0.0);
            let mut better = b.clone();
            better.hvac.heating_cop += bump;
            prop_assert!(monthly_space_heating(&better, &w).annual_delivered() < base.annual_delivered());
        }
    }
}
