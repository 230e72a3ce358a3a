use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const BUNDLED_WEATHER: &str = include_str!("../../data/weather_vancouver.csv");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonthClimate {
    /// °C
    pub mean_temp_c: f64,
    pub days: u32,
    /// Global horizontal irradiation, kWh/m² over the month.
    pub ghi_kwh_m2: f64,
}

/// Twelve months of long-term mean climate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonthlyWeather {
    months: [MonthClimate; 12],
}

#[derive(Debug, Deserialize)]
struct WeatherRow {
    month: u32,
    mean_temp_c: f64,
    days: u32,
    ghi_kwh_m2: f64,
}

impl MonthlyWeather {
    pub fn new(months: [MonthClimate; 12]) -> Result<Self> {
        for (i, m) in months.iter().enumerate() {
            if !(28..=31).contains(&m.days) {
                return Err(Error::InvalidInput(format!(
                    "month {}: days must be in [28, 31], got {}",
                    i + 1,
                    m.days
                )));
            }
            if !m.mean_temp_c.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "month {}: mean temperature is not finite",
                    i + 1
                )));
            }
            if !m.ghi_kwh_m2.is_finite() || m.ghi_kwh_m2 < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "month {}: irradiance must be >= 0, got {}",
                    i + 1,
                    m.ghi_kwh_m2
                )));
            }
        }
        Ok(MonthlyWeather { months })
    }

    /// Same climate in every month, mostly for tests.
    pub fn uniform(mean_temp_c: f64, days: u32, ghi_kwh_m2: f64) -> Result<Self> {
        Self::new(
            [MonthClimate {
                mean_temp_c,
                days,
                ghi_kwh_m2,
            }; 12],
        )
    }

    /// Read the `month,mean_temp_c,days,ghi_kwh_m2` CSV format (12 rows, months 1..=12).
    pub fn from_csv_reader<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| parse_error(source, 1, e.to_string()))?
            .clone();
        let expected = ["month", "mean_temp_c", "days", "ghi_kwh_m2"];
        if headers.iter().ne(expected.iter().copied()) {
            return Err(parse_error(
                source,
                1,
                format!("header must be `{}`", expected.join(",")),
            ));
        }
        let mut slots: [Option<MonthClimate>; 12] = [None; 12];
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_error(source, line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let row: WeatherRow = record
                .deserialize(Some(&headers))
                .map_err(|e| parse_error(source, line, e.to_string()))?;
            if !(1..=12).contains(&row.month) {
                return Err(parse_error(source, line, format!("month {} out of range", row.month)));
            }
            let slot = &mut slots[(row.month - 1) as usize];
            if slot.is_some() {
                return Err(parse_error(source, line, format!("month {} repeated", row.month)));
            }
            *slot = Some(MonthClimate {
                mean_temp_c: row.mean_temp_c,
                days: row.days,
                ghi_kwh_m2: row.ghi_kwh_m2,
            });
        }
        let mut months = [MonthClimate {
            mean_temp_c: 0.0,
            days: 30,
            ghi_kwh_m2: 0.0,
        }; 12];
        for (i, slot) in slots.iter().enumerate() {
            months[i] = slot.ok_or_else(|| parse_error(source, 0, format!("month {} missing", i + 1)))?;
        }
        Self::new(months)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, &path.display().to_string())
    }

    /// Long-term monthly means for the Metro Vancouver coast.
    pub fn bundled() -> Self {
        Self::from_csv_reader(BUNDLED_WEATHER.as_bytes(), "weather_vancouver.csv")
            .expect("bundled weather file is valid")
    }

    pub fn months(&self) -> &[MonthClimate; 12] {
        &self.months
    }

    /// Annual global horizontal irradiation, kWh/m².
    pub fn annual_ghi(&self) -> f64 {
        self.months.iter().map(|m| m.ghi_kwh_m2).sum()
    }
}

fn parse_error(source: &str, line: u64, reason: String) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        reason,
    }
}
