//! Bundled reference scenarios: the gas-heated and the all-electric mid-rise building.

use std::path::Path;

use super::config::{parse_scenario_config, ScenarioConfig};
use crate::measures::Catalog;
use crate::model::BuildingModel;

pub const NG_SCENARIO_TOML: &str = include_str!("../../data/ng_scenario.toml");
pub const E_SCENARIO_TOML: &str = include_str!("../../data/e_scenario.toml");
/// Base-building end uses for both reference buildings, cases `ng_base` and `e_base`.
pub const REFERENCE_BASE_CSV: &str = include_str!("../../data/reference_base.csv");

fn bundled(text: &str, name: &str) -> ScenarioConfig {
    parse_scenario_config(text, name, Path::new("."))
        .unwrap_or_else(|e| panic!("bundled scenario {name} is invalid: {e}"))
        .config
}

pub fn ng_scenario() -> ScenarioConfig {
    bundled(NG_SCENARIO_TOML, "ng_scenario.toml")
}

pub fn e_scenario() -> ScenarioConfig {
    bundled(E_SCENARIO_TOML, "e_scenario.toml")
}

pub fn ng_building() -> BuildingModel {
    ng_scenario().building
}

pub fn e_building() -> BuildingModel {
    e_scenario().building
}

pub fn ng_catalog() -> Catalog {
    ng_scenario().catalog().expect("bundled catalog is valid")
}

pub fn e_catalog() -> Catalog {
    e_scenario().catalog().expect("bundled catalog is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::import::read_end_use_csv;
    use approx::assert_relative_eq;

    #[test]
    fn reference_rows_sum_to_reported_totals() {
        let imp = read_end_use_csv(REFERENCE_BASE_CSV.as_bytes(), "reference_base.csv").unwrap();
        assert_relative_eq!(imp.cases["ng_base"].total(), 2212.47, epsilon = 1e-9);
        assert_relative_eq!(imp.cases["e_base"].total(), 2125.11, epsilon = 1e-9);
        assert_eq!(imp.cases["e_base"].natural_gas(), 0.0);
    }
}
