//! Tariffs, carbon pricing, emission factors and life-cycle cost arithmetic.

use serde::{Deserialize, Serialize};

use crate::enduse::EndUseTable;
use crate::measures::{measure_upfront_cost, Catalog, MeasureSpec, Package};
use crate::model::BuildingModel;
use crate::units::KWH_PER_GJ;
use crate::{Error, Result};

/// Energy prices in CAD/kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tariff {
    /// CAD/kWh.
    pub electricity_price: f64,
    /// CAD/kWh.
    pub gas_price: f64,
    /// Yearly fractional escalation of both prices; 0 keeps tariffs flat.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub escalation_rate: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl Tariff {
    pub fn new(electricity_price: f64, gas_price: f64) -> Self {
        Tariff {
            electricity_price,
            gas_price,
            escalation_rate: 0.0,
        }
    }

    /// CAD/GJ.
    pub fn electricity_per_gj(&self) -> f64 {
        self.electricity_price * KWH_PER_GJ
    }

    /// CAD/GJ.
    pub fn gas_per_gj(&self) -> f64 {
        self.gas_price * KWH_PER_GJ
    }

    fn escalation(&self, years_from_anchor: i32) -> f64 {
        if self.escalation_rate == 0.0 {
            1.0
        } else {
            (1.0 + self.escalation_rate).powi(years_from_anchor)
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("electricity_price", self.electricity_price),
            ("gas_price", self.gas_price),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.escalation_rate.is_finite() && self.escalation_rate > -1.0) {
            return Err(Error::InvalidInput(format!(
                "escalation_rate must be > -1, got {}",
                self.escalation_rate
            )));
        }
        Ok(())
    }
}

/// Carbon price trajectory: fixed yearly steps from the start price up to the mid anchor,
/// linear interpolation to the end anchor, flat afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CarbonTaxSchedule {
    pub start_year: i32,
    /// CAD/tCO₂e
    pub start_price: f64,
    /// CAD/tCO₂e per year until the mid anchor.
    pub annual_step: f64,
    pub mid_year: i32,
    pub mid_price: f64,
    pub end_year: i32,
    pub end_price: f64,
}

impl Default for CarbonTaxSchedule {
    fn default() -> Self {
        CarbonTaxSchedule {
            start_year: 2022,
            start_price: 50.0,
            annual_step: 15.0,
            mid_year: 2030,
            mid_price: 170.0,
            end_year: 2050,
            end_price: 300.0,
        }
    }
}

impl CarbonTaxSchedule {
    pub fn validate(&self) -> Result<()> {
        let prices = [self.start_price, self.annual_step, self.mid_price, self.end_price];
        if prices.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidInput("carbon tax prices and step must be >= 0".into()));
        }
        if !(self.start_year <= self.mid_year && self.mid_year < self.end_year) {
            return Err(Error::InvalidInput(
                "carbon tax anchor years must satisfy start_year <= mid_year < end_year".into(),
            ));
        }
        if !(self.start_price <= self.mid_price && self.mid_price <= self.end_price) {
            return Err(Error::InvalidInput(
                "carbon tax anchor prices must be non-decreasing".into(),
            ));
        }
        Ok(())
    }
}

/// CAD/tCO₂e in `year`.
pub fn carbon_tax_at(schedule: &CarbonTaxSchedule, year: i32) -> Result<f64> {
    let s = schedule;
    if year < s.start_year {
        return Err(Error::InvalidInput(format!(
            "year {year} precedes the carbon tax start year {}",
            s.start_year
        )));
    }
    let price = if year < s.mid_year {
        (s.start_price + s.annual_step * f64::from(year - s.start_year)).min(s.mid_price)
    } else if year < s.end_year {
        let frac = f64::from(year - s.mid_year) / f64::from(s.end_year - s.mid_year);
        s.mid_price + (s.end_price - s.mid_price) * frac
    } else {
        s.end_price
    };
    Ok(price)
}

/// Emission factors, tCO₂e/GJ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmissionFactors {
    /// Grid electricity.
    pub electricity: f64,
    /// Pipeline natural gas.
    pub natural_gas: f64,
}

/// Grid factor implied by the all-electric reference building (6.79 t over 2125.11 GJ).
pub const DEFAULT_ELECTRICITY_FACTOR: f64 = 6.79 / 2125.11;
/// Stoichiometric combustion factor for pipeline natural gas.
pub const DEFAULT_GAS_FACTOR: f64 = 0.0499;

impl Default for EmissionFactors {
    fn default() -> Self {
        EmissionFactors {
            electricity: DEFAULT_ELECTRICITY_FACTOR,
            natural_gas: DEFAULT_GAS_FACTOR,
        }
    }
}

fn default_horizon() -> u32 {
    25
}

fn default_anchor_year() -> i32 {
    2022
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomicScenario {
    pub tariff: Tariff,
    #[serde(default)]
    pub carbon_tax: CarbonTaxSchedule,
    #[serde(default)]
    pub emission_factors: EmissionFactors,
    /// Fraction per year.
    pub discount_rate: f64,
    /// Years; cash flows run over t = 0..=horizon.
    #[serde(default = "default_horizon")]
    pub horizon_years: u32,
    /// Calendar year of t = 0.
    #[serde(default = "default_anchor_year")]
    pub anchor_year: i32,
    /// Whether reported annual energy cost includes carbon tax.
    #[serde(default)]
    pub include_carbon: bool,
}

impl EconomicScenario {
    pub fn new(tariff: Tariff, discount_rate: f64, horizon_years: u32) -> Self {
        EconomicScenario {
            tariff,
            carbon_tax: CarbonTaxSchedule::default(),
            emission_factors: EmissionFactors::default(),
            discount_rate,
            horizon_years,
            anchor_year: default_anchor_year(),
            include_carbon: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tariff.validate()?;
        self.carbon_tax.validate()?;
        let f = &self.emission_factors;
        if !(f.electricity.is_finite() && f.electricity >= 0.0 && f.natural_gas.is_finite() && f.natural_gas >= 0.0) {
            return Err(Error::InvalidInput("emission factors must be >= 0".into()));
        }
        if !(self.discount_rate.is_finite() && self.discount_rate >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "discount_rate must be >= 0, got {}",
                self.discount_rate
            )));
        }
        if self.horizon_years < 1 {
            return Err(Error::InvalidInput("horizon_years must be >= 1".into()));
        }
        if self.anchor_year < self.carbon_tax.start_year {
            return Err(Error::InvalidInput(format!(
                "anchor_year {} precedes the carbon tax start year {}",
                self.anchor_year, self.carbon_tax.start_year
            )));
        }
        Ok(())
    }

    /// Calendar years t = 0..=T.
    pub fn years(&self) -> impl Iterator<Item = i32> {
        let anchor = self.anchor_year;
        (0..=self.horizon_years as i32).map(move |t| anchor + t)
    }
}

/// tCO₂e/yr: each fuel times its emission factor.
pub fn annual_ghg(e: &EndUseTable, f: &EmissionFactors) -> f64 {
    e.electricity() * f.electricity + e.natural_gas() * f.natural_gas
}

/// Carbon-tax savings in `year`, CAD.
pub fn carbon_tax_savings(
    base: &EndUseTable,
    retro: &EndUseTable,
    f: &EmissionFactors,
    schedule: &CarbonTaxSchedule,
    year: i32,
) -> Result<f64> {
    let ct = carbon_tax_at(schedule, year)?;
    Ok(((base.electricity() - retro.electricity()) * f.electricity
        + (base.natural_gas() - retro.natural_gas()) * f.natural_gas)
        * ct)
}

/// CAD/yr for the given table.
pub fn annual_energy_cost(
    e: &EndUseTable,
    tariff: &Tariff,
    f: &EmissionFactors,
    schedule: &CarbonTaxSchedule,
    year: i32,
    include_carbon: bool,
) -> Result<f64> {
    let mut cost = e.electricity() * tariff.electricity_per_gj() + e.natural_gas() * tariff.gas_per_gj();
    if include_carbon {
        cost += annual_ghg(e, f) * carbon_tax_at(schedule, year)?;
    }
    Ok(cost)
}

/// Operating-cost savings in `year`, CAD: energy savings at tariff plus carbon-tax savings.
pub fn annual_operating_savings(
    base: &EndUseTable,
    retro: &EndUseTable,
    scenario: &EconomicScenario,
    year: i32,
) -> Result<f64> {
    let t = &scenario.tariff;
    let escalation = t.escalation(year - scenario.anchor_year);
    let energy = ((base.electricity() - retro.electricity()) * t.electricity_per_gj()
        + (base.natural_gas() - retro.natural_gas()) * t.gas_per_gj())
        * escalation;
    let cts = carbon_tax_savings(base, retro, &scenario.emission_factors, &scenario.carbon_tax, year)?;
    Ok(energy + cts)
}

/// Σ_{t=0}^{T} flow_t / (1+r)^t, with `flows[t]` the flow in year t.
pub fn npv(flows: &[f64], r: f64) -> Result<f64> {
    if !r.is_finite() || r <= -1.0 {
        return Err(Error::InvalidInput(format!("discount rate must be > -1, got {r}")));
    }
    let factor = 1.0 / (1.0 + r);
    let mut discount = 1.0;
    let mut sum = 0.0;
    for &flow in flows {
        sum += flow * discount;
        discount *= factor;
    }
    Ok(sum)
}

/// Σ upfront cost over measures, CAD, areas taken from `b`.
pub fn upfront_cost_of(measures: &[&MeasureSpec], b: &BuildingModel) -> Result<f64> {
    measures.iter().map(|m| measure_upfront_cost(m, b)).sum()
}

pub fn upfront_cost_total(package: &Package, catalog: &Catalog, b: &BuildingModel) -> Result<f64> {
    upfront_cost_of(&package.resolve(catalog)?, b)
}

/// Upfront cost less lifetime savings; negative means a net life-cycle saving.
pub fn lcc(upfront: f64, lifetime_savings: f64) -> f64 {
    upfront - lifetime_savings
}

/// Deltas of a retrofit against its base; positive values are savings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrofitEvaluation {
    /// GJ/yr
    pub delta_electricity: f64,
    /// GJ/yr
    pub delta_gas: f64,
    /// tCO₂e/yr
    pub delta_ghg: f64,
    /// CAD per year t = 0..=T.
    pub carbon_tax_savings: Vec<f64>,
    /// CAD per year t = 0..=T.
    pub annual_operating_savings: Vec<f64>,
    /// Net present value of operating savings less discounted disposal, CAD.
    pub lifetime_savings: f64,
    /// CAD
    pub upfront: f64,
    /// CAD
    pub lcc: f64,
}

impl RetrofitEvaluation {
    /// `disposal` is an end-of-life cost incurred in year T.
    pub fn compute(
        base: &EndUseTable,
        retro: &EndUseTable,
        upfront: f64,
        disposal: f64,
        scenario: &EconomicScenario,
    ) -> Result<Self> {
        let mut cts = Vec::with_capacity(scenario.horizon_years as usize + 1);
        let mut operating = Vec::with_capacity(cts.capacity());
        for year in scenario.years() {
            cts.push(carbon_tax_savings(
                base,
                retro,
                &scenario.emission_factors,
                &scenario.carbon_tax,
                year,
            )?);
            operating.push(annual_operating_savings(base, retro, scenario, year)?);
        }
        let mut savings = npv(&operating, scenario.discount_rate)?;
        if disposal != 0.0 {
            savings -= disposal / (1.0 + scenario.discount_rate).powi(scenario.horizon_years as i32);
        }
        let f = &scenario.emission_factors;
        Ok(RetrofitEvaluation {
            delta_electricity: base.electricity() - retro.electricity(),
            delta_gas: base.natural_gas() - retro.natural_gas(),
            delta_ghg: annual_ghg(base, f) - annual_ghg(retro, f),
            carbon_tax_savings: cts,
            annual_operating_savings: operating,
            lifetime_savings: savings,
            upfront,
            lcc: lcc(upfront, savings),
        })
    }

    pub fn delta_energy(&self) -> f64 {
        self.delta_electricity + self.delta_gas
    }
}

/// Which fuels a reported aggregate may be split across.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuelConstraint {
    /// Solve the two-fuel linear system.
    Mixed,
    /// All energy is electricity; only the cost residual is informative.
    AllElectric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitStatus {
    Consistent,
    /// The linear solve produced a negative fuel quantity.
    NegativeSolution,
    /// Forward cost of the split misses the reported cost by more than the tolerance.
    CostMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuelSplit {
    /// Electricity, GJ
    pub electricity: f64,
    /// Natural gas, GJ
    pub natural_gas: f64,
    /// Cost recomputed from the split, CAD.
    pub forward_cost: f64,
    /// |forward − reported| / reported.
    pub residual: f64,
    pub status: SplitStatus,
}

impl FuelSplit {
    pub fn is_flagged(&self) -> bool {
        self.status != SplitStatus::Consistent
    }
}

/// Relative cost tolerance for a split to count as consistent.
pub const SPLIT_COST_TOLERANCE: f64 = 0.005;

/// Recover electricity and gas use from a reported total energy and cost.
///
/// `carbon_cost` is the carbon-tax portion already folded into `total_cost`, if any.
pub fn calibrate_fuel_split(
    total_energy: f64,
    total_cost: f64,
    tariff: &Tariff,
    carbon_cost: Option<f64>,
    constraint: FuelConstraint,
) -> Result<FuelSplit> {
    if !(total_energy.is_finite() && total_energy >= 0.0 && total_cost.is_finite() && total_cost >= 0.0) {
        return Err(Error::InvalidInput(
            "total energy and cost must be finite and >= 0".into(),
        ));
    }
    let ep = tariff.electricity_per_gj();
    let np = tariff.gas_per_gj();
    let carbon = carbon_cost.unwrap_or(0.0);
    let energy_cost = total_cost - carbon;

    let (mut ee, mut ne) = match constraint {
        FuelConstraint::AllElectric => (total_energy, 0.0),
        FuelConstraint::Mixed => {
            if ep == np {
                return Err(Error::InvalidInput(
                    "electricity and gas prices are equal; the fuel split is not identifiable".into(),
                ));
            }
            let ee = (energy_cost - np * total_energy) / (ep - np);
            (ee, total_energy - ee)
        }
    };
    // Rounding in the reported figures can leave a vanishing negative share.
    let slack = 1e-4 * total_energy.max(1.0);
    if ee < 0.0 && ee >= -slack {
        ne += ee;
        ee = 0.0;
    }
    if ne < 0.0 && ne >= -slack {
        ee += ne;
        ne = 0.0;
    }
    let negative = ee < 0.0 || ne < 0.0;
    let forward_cost = ee * ep + ne * np + carbon;
    let residual = if total_cost == 0.0 {
        if forward_cost == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (forward_cost - total_cost).abs() / total_cost
    };
    let status = if negative {
        SplitStatus::NegativeSolution
    } else if residual > SPLIT_COST_TOLERANCE {
        SplitStatus::CostMismatch
    } else {
        SplitStatus::Consistent
    };
    Ok(FuelSplit {
        electricity: ee,
        natural_gas: ne,
        forward_cost,
        residual,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enduse::{EndUse, Fuel};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn table(ee: f64, ne: f64) -> EndUseTable {
        EndUseTable::from_entries([
            (EndUse::Plug, Fuel::Electricity, ee),
            (EndUse::SpaceHeating, Fuel::NaturalGas, ne),
        ])
        .unwrap()
    }

    fn scenario(r: f64) -> EconomicScenario {
        EconomicScenario::new(Tariff::new(0.15, 0.032), r, 25)
    }

    #[test]
    fn carbon_tax_anchors() {
        let s = CarbonTaxSchedule::default();
        assert_eq!(carbon_tax_at(&s, 2022).unwrap(), 50.0);
        assert_eq!(carbon_tax_at(&s, 2023).unwrap(), 65.0);
        assert_eq!(carbon_tax_at(&s, 2030).unwrap(), 170.0);
        assert_eq!(carbon_tax_at(&s, 2040).unwrap(), 235.0);
        assert_eq!(carbon_tax_at(&s, 2050).unwrap(), 300.0);
        assert_eq!(carbon_tax_at(&s, 2080).unwrap(), 300.0);
        assert!(carbon_tax_at(&s, 2021).is_err());
    }

    #[test]
    fn late_start_caps_at_mid_price() {
        let s = CarbonTaxSchedule {
            start_year: 2018,
            ..Default::default()
        };
        assert_eq!(carbon_tax_at(&s, 2029).unwrap(), 170.0);
        assert_eq!(carbon_tax_at(&s, 2030).unwrap(), 170.0);
    }

    #[test]
    fn ghg_examples() {
        let f = EmissionFactors::default();
        assert_relative_eq!(annual_ghg(&table(2125.11, 0.0), &f), 6.79, epsilon = 1e-12);
        assert_eq!(annual_ghg(&EndUseTable::zero(), &f), 0.0);
        let f = EmissionFactors {
            electricity: 0.01,
            natural_gas: 0.01,
        };
        assert_relative_eq!(annual_ghg(&table(100.0, 100.0), &f), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn carbon_tax_savings_examples() {
        let s = CarbonTaxSchedule::default();
        let f = EmissionFactors {
            electricity: 3.195e-3,
            natural_gas: 0.0499,
        };
        let t = table(300.0, 1500.0);
        assert_eq!(carbon_tax_savings(&t, &t, &f, &s, 2022).unwrap(), 0.0);
        assert_relative_eq!(
            carbon_tax_savings(&table(300.0, 0.0), &table(100.0, 0.0), &f, &s, 2022).unwrap(),
            31.95,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            carbon_tax_savings(&table(0.0, 1500.0), &table(0.0, 500.0), &f, &s, 2030).unwrap(),
            8483.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn energy_cost_examples() {
        let s = CarbonTaxSchedule::default();
        let f = EmissionFactors::default();
        let t = Tariff::new(0.15, 0.032);
        let c = annual_energy_cost(&table(992.54, 1219.93), &t, &f, &s, 2022, false).unwrap();
        assert!((c - 52200.0).abs() / 52200.0 <= 0.005, "{c}");
        assert_eq!(
            annual_energy_cost(&EndUseTable::zero(), &t, &f, &s, 2022, true).unwrap(),
            0.0
        );
        assert_relative_eq!(
            annual_energy_cost(&table(1.0, 0.0), &t, &f, &s, 2022, false).unwrap(),
            41.6667,
            epsilon = 1e-9
        );
        let with_carbon = annual_energy_cost(&table(100.0, 0.0), &t, &f, &s, 2022, true).unwrap();
        assert_relative_eq!(
            with_carbon,
            100.0 * 41.6667 + 100.0 * f.electricity * 50.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn annual_operating_savings_examples() {
        let mut sc = scenario(0.04);
        sc.emission_factors = EmissionFactors {
            electricity: 0.0,
            natural_gas: 0.0,
        };
        let t = table(500.0, 0.0);
        assert_eq!(annual_operating_savings(&t, &t, &sc, 2022).unwrap(), 0.0);
        let v = annual_operating_savings(&table(500.0, 0.0), &table(400.0, 0.0), &sc, 2022).unwrap();
        assert_relative_eq!(v, 4166.67, epsilon = 1e-9);

        sc.emission_factors.electricity = 3.195e-3;
        let v = annual_operating_savings(&table(300.0, 0.0), &table(200.0, 0.0), &sc, 2022).unwrap();
        let cts = 100.0 * 3.195e-3 * 50.0;
        assert_relative_eq!(v, 4166.67 + cts, epsilon = 1e-9);
    }

    #[test]
    fn escalation_scales_energy_term_only() {
        let mut sc = scenario(0.0);
        sc.emission_factors = EmissionFactors {
            electricity: 0.0,
            natural_gas: 0.0,
        };
        sc.tariff.escalation_rate = 0.1;
        let v = annual_operating_savings(&table(100.0, 0.0), &table(0.0, 0.0), &sc, 2024).unwrap();
        assert_relative_eq!(v, 4166.67 * 1.21, max_relative = 1e-12);
    }

    #[test]
    fn npv_examples() {
        assert_eq!(npv(&[1000.0; 11], 0.0).unwrap(), 11000.0);
        let oracle = 1000.0 + 1000.0 / 1.05 + 1000.0 / (1.05 * 1.05);
        assert_relative_eq!(npv(&[1000.0; 3], 0.05).unwrap(), oracle, max_relative = 1e-15);
        assert_relative_eq!(npv(&[1000.0; 3], 0.05).unwrap(), 2859.410430, epsilon = 1e-6);
        assert_eq!(npv(&[0.0; 26], 0.04).unwrap(), 0.0);
        assert!(npv(&[1.0], -1.0).is_err());
    }

    #[test]
    fn lcc_examples() {
        assert_eq!(lcc(10000.0, 12000.0), -2000.0);
        assert_eq!(lcc(7.5, 0.0), 7.5);
        assert_eq!(lcc(0.0, 5000.0), -5000.0);
    }

    #[test]
    fn evaluation_is_exact_and_discounts_disposal() {
        let sc = scenario(0.04);
        let base = table(1000.0, 1200.0);
        let retro = table(1100.0, 300.0);
        let e = RetrofitEvaluation::compute(&base, &retro, 350_000.0, 0.0, &sc).unwrap();
        assert_eq!(e.lcc, e.upfront - e.lifetime_savings);
        assert_eq!(e.annual_operating_savings.len(), 26);
        assert_eq!(e.delta_electricity, -100.0);
        assert_eq!(e.delta_gas, 900.0);

        let d = RetrofitEvaluation::compute(&base, &retro, 350_000.0, 10_000.0, &sc).unwrap();
        assert_relative_eq!(
            e.lifetime_savings - d.lifetime_savings,
            10_000.0 / 1.04f64.powi(25),
            max_relative = 1e-9
        );
        assert_eq!(d.lcc, d.upfront - d.lifetime_savings);
    }

    #[test]
    fn fuel_split_examples() {
        let t = Tariff::new(0.15, 0.032);
        let ng = calibrate_fuel_split(2212.47, 52200.0, &t, None, FuelConstraint::Mixed).unwrap();
        assert!((ng.electricity - 992.5).abs() < 0.5, "{ng:?}");
        assert!((ng.natural_gas - 1219.9).abs() < 0.5, "{ng:?}");
        assert!(!ng.is_flagged());
        assert!(ng.residual <= 0.005);

        let forward = 1000.0 * t.electricity_per_gj();
        let e = calibrate_fuel_split(1000.0, forward, &t, None, FuelConstraint::Mixed).unwrap();
        assert_relative_eq!(e.electricity, 1000.0, max_relative = 1e-9);
        assert!(e.natural_gas.abs() < 1e-6);

        let eb = calibrate_fuel_split(2125.11, 56080.0, &t, None, FuelConstraint::AllElectric).unwrap();
        assert_eq!(eb.status, SplitStatus::CostMismatch);
        assert!((eb.forward_cost - 88_546.0).abs() < 50.0, "{eb:?}");
        assert!(eb.residual > 0.5);

        assert!(calibrate_fuel_split(1.0, 1.0, &Tariff::new(0.1, 0.1), None, FuelConstraint::Mixed).is_err());
        let neg = calibrate_fuel_split(1000.0, 100_000.0, &t, None, FuelConstraint::Mixed).unwrap();
        assert_eq!(neg.status, SplitStatus::NegativeSolution);
    }

    #[test]
    fn fuel_split_removes_carbon_portion() {
        let t = Tariff::new(0.15, 0.032);
        let base = 500.0 * t.electricity_per_gj() + 700.0 * t.gas_per_gj();
        let s = calibrate_fuel_split(1200.0, base + 1234.0, &t, Some(1234.0), FuelConstraint::Mixed).unwrap();
        assert_relative_eq!(s.electricity, 500.0, max_relative = 1e-9);
        assert!(!s.is_flagged());
    }

    proptest! {
        #[test]
        fn npv_matches_annuity(a in -1e5f64..1e5, r in 1e-4f64..=0.2, t in 0usize..=50) {
            let npv = npv(&vec![a; t + 1], r).unwrap();
            let closed = a * (1.0 - (1.0 + r).powi(-(t as i32 + 1))) / (1.0 - 1.0 / (1.0 + r));
            prop_assert!((npv - closed).abs() <= 1e-9 * closed.abs().max(1e-300));
        }

        #[test]
        fn npv_strictly_decreasing_in_rate(a in 1.0f64..1e5, r in 0.0f64..0.19, dr in 1e-3f64..0.01, t in 1usize..=50) {
            let flows = vec![a; t + 1];
            prop_assert!(npv(&flows, r + dr).unwrap() < npv(&flows, r).unwrap());
        }

        #[test]
        fn ghg_is_linear(e1 in 0.0f64..5e3, n1 in 0.0f64..5e3, e2 in 0.0f64..5e3, n2 in 0.0f64..5e3) {
            let f = EmissionFactors::default();
            let sum = annual_ghg(&table(e1 + e2, n1 + n2), &f);
            let parts = annual_ghg(&table(e1, n1), &f) + annual_ghg(&table(e2, n2), &f);
            prop_assert!((sum - parts).abs() <= 1e-9 * sum.abs().max(1.0));
        }

        #[test]
        fn carbon_tax_savings_is_linear(
            b1 in 0.0f64..5e3, r1 in 0.0f64..5e3, b2 in 0.0f64..5e3, r2 in 0.0f64..5e3, year in 2022i32..2070,
        ) {
            let f = EmissionFactors::default();
            let s = CarbonTaxSchedule::default();
            let both = carbon_tax_savings(&table(b1 + b2, b1 + b2), &table(r1 + r2, r1 + r2), &f, &s, year).unwrap();
            let one = carbon_tax_savings(&table(b1, b1), &table(r1, r1), &f, &s, year).unwrap();
            let two = carbon_tax_savings(&table(b2, b2), &table(r2, r2), &f, &s, year).unwrap();
            prop_assert!((both - (one + two)).abs() <= 1e-8 * both.abs().max(1.0));
        }

        #[test]
        fn carbon_tax_monotone(y in 2022i32..2100) {
            let s = CarbonTaxSchedule::default();
            prop_assert!(carbon_tax_at(&s, y + 1).unwrap() >= carbon_tax_at(&s, y).unwrap());
        }

        #[test]
        fn fuel_split_round_trips(ee in 1.0f64..5e3, ne in 1.0f64..5e3) {
            let t = Tariff::new(0.15, 0.032);
            let s = CarbonTaxSchedule::default();
            let f = EmissionFactors::default();
            let cost = annual_energy_cost(&table(ee, ne), &t, &f, &s, 2022, false).unwrap();
            let split = calibrate_fuel_split(ee + ne, cost, &t, None, FuelConstraint::Mixed).unwrap();
            prop_assert!(!split.is_flagged());
            let back = annual_energy_cost(&table(split.electricity, split.natural_gas), &t, &f, &s, 2022, false).unwrap();
            prop_assert!((back - cost).abs() <= 0.005 * cost);
        }
    }
}
