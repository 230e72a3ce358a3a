//! Annual energy by end use and by fuel.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fuel {
    Electricity,
    NaturalGas,
}

impl Fuel {
    pub fn as_str(self) -> &'static str {
        match self {
            Fuel::Electricity => "electricity",
            Fuel::NaturalGas => "natural_gas",
        }
    }
}

impl fmt::Display for Fuel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Fuel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "electricity" => Ok(Fuel::Electricity),
            "natural_gas" => Ok(Fuel::NaturalGas),
            other => Err(format!("unknown fuel `{other}` (expected electricity | natural_gas)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndUse {
    SpaceHeating,
    SpaceCooling,
    Dhw,
    Lighting,
    Plug,
    VentilationFans,
    /// On-site generation; netted against electricity, never a consumption.
    PvGeneration,
}

impl EndUse {
    /// End uses that consume a fuel and therefore need a fuel mapping.
    pub const CONSUMING: [EndUse; 6] = [
        EndUse::SpaceHeating,
        EndUse::SpaceCooling,
        EndUse::Dhw,
        EndUse::Lighting,
        EndUse::Plug,
        EndUse::VentilationFans,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EndUse::SpaceHeating => "space_heating",
            EndUse::SpaceCooling => "space_cooling",
            EndUse::Dhw => "dhw",
            EndUse::Lighting => "lighting",
            EndUse::Plug => "plug",
            EndUse::VentilationFans => "ventilation_fans",
            EndUse::PvGeneration => "pv_generation",
        }
    }
}

impl fmt::Display for EndUse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EndUse {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        EndUse::CONSUMING
            .into_iter()
            .chain([EndUse::PvGeneration])
            .find(|e| e.as_str() == s)
            .ok_or_else(|| format!("unknown end use `{s}`"))
    }
}

/// Annual GJ per end use with per-fuel totals.
///
/// `electricity` is net of PV generation (annual net metering); it can go negative when the
/// array out-produces the building, which represents credit carried to later bills.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndUseTable {
    entries: BTreeMap<(EndUse, Fuel), f64>,
    electricity: f64,
    natural_gas: f64,
}

impl EndUseTable {
    /// Build from `(end use, fuel, GJ)` triples. Duplicate keys accumulate.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (EndUse, Fuel, f64)>,
    {
        let mut map: BTreeMap<(EndUse, Fuel), f64> = BTreeMap::new();
        for (end_use, fuel, gj) in entries {
            if !gj.is_finite() || gj < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "{end_use} ({fuel}) must be a finite value >= 0 GJ, got {gj}"
                )));
            }
            if end_use == EndUse::PvGeneration && fuel != Fuel::Electricity {
                return Err(Error::InvalidInput(
                    "pv_generation can only be netted against electricity".into(),
                ));
            }
            *map.entry((end_use, fuel)).or_insert(0.0) += gj;
        }
        Ok(Self::from_map(map))
    }

    fn from_map(entries: BTreeMap<(EndUse, Fuel), f64>) -> Self {
        let mut electricity = 0.0;
        let mut natural_gas = 0.0;
        let mut pv = 0.0;
        for (&(end_use, fuel), &gj) in &entries {
            match (end_use, fuel) {
                (EndUse::PvGeneration, _) => pv += gj,
                (_, Fuel::Electricity) => electricity += gj,
                (_, Fuel::NaturalGas) => natural_gas += gj,
            }
        }
        EndUseTable {
            entries,
            electricity: electricity - pv,
            natural_gas,
        }
    }

    pub fn zero() -> Self {
        Self::from_map(BTreeMap::new())
    }

    /// GJ for one end use across all fuels.
    pub fn get(&self, end_use: EndUse) -> f64 {
        self.entries
            .iter()
            .filter(|((e, _), _)| *e == end_use)
            .map(|(_, v)| *v)
            .sum()
    }

    pub fn get_fuel(&self, end_use: EndUse, fuel: Fuel) -> f64 {
        self.entries.get(&(end_use, fuel)).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (EndUse, Fuel, f64)> + '_ {
        self.entries.iter().map(|(&(e, f), &v)| (e, f, v))
    }

    pub fn space_heating(&self) -> f64 {
        self.get(EndUse::SpaceHeating)
    }

    pub fn space_cooling(&self) -> f64 {
        self.get(EndUse::SpaceCooling)
    }

    pub fn dhw(&self) -> f64 {
        self.get(EndUse::Dhw)
    }

    pub fn lighting(&self) -> f64 {
        self.get(EndUse::Lighting)
    }

    pub fn plug(&self) -> f64 {
        self.get(EndUse::Plug)
    }

    pub fn ventilation_fans(&self) -> f64 {
        self.get(EndUse::VentilationFans)
    }

    pub fn pv_generation(&self) -> f64 {
        self.get(EndUse::PvGeneration)
    }

    /// Net electricity, GJ.
    pub fn electricity(&self) -> f64 {
        self.electricity
    }

    /// Natural gas, GJ.
    pub fn natural_gas(&self) -> f64 {
        self.natural_gas
    }

    pub fn fuel_total(&self, fuel: Fuel) -> f64 {
        match fuel {
            Fuel::Electricity => self.electricity,
            Fuel::NaturalGas => self.natural_gas,
        }
    }

    /// Net site energy, electricity plus gas.
    pub fn total(&self) -> f64 {
        self.electricity + self.natural_gas
    }
}
