//! Unit constants and boundary conversions.

use crate::{Error, Result};

/// m²K/W per ft²·°F·h/BTU.
pub const RSI_PER_R_IMPERIAL: f64 = 0.1761;

/// Volumetric heat capacity of air, J/m³K.
pub const AIR_VOLUMETRIC_HEAT_CAPACITY: f64 = 1200.0;

/// Specific heat of water, J/kgK (density taken as 1 kg/L).
pub const WATER_SPECIFIC_HEAT: f64 = 4186.0;

pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const HOURS_PER_YEAR: f64 = 8_760.0;
pub const J_PER_GJ: f64 = 1e9;
pub const J_PER_KWH: f64 = 3.6e6;

/// Tariff conversion pinned at the price boundary.
pub const KWH_PER_GJ: f64 = 277.778;

/// Convert an imperial R-value to RSI (m²K/W).
pub fn convert_r_imperial_to_rsi(r_imperial: f64) -> Result<f64> {
    if !r_imperial.is_finite() || r_imperial < 0.0 {
        return Err(Error::InvalidInput(format!(
            "R-value must be a non-negative number, got {r_imperial}"
        )));
    }
    Ok(r_imperial * RSI_PER_R_IMPERIAL)
}

pub fn convert_rsi_to_r_imperial(rsi: f64) -> Result<f64> {
    if !rsi.is_finite() || rsi < 0.0 {
        return Err(Error::InvalidInput(format!(
            "RSI must be a non-negative number, got {rsi}"
        )));
    }
    Ok(rsi * (1.0 / RSI_PER_R_IMPERIAL))
}
