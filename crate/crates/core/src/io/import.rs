//! Annual end uses from an external simulator, one `case,end_use,fuel,gj` row per value.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::enduse::{EndUse, EndUseTable, Fuel};
use crate::{Error, Result};

pub const END_USE_HEADER: [&str; 4] = ["case", "end_use", "fuel", "gj"];

#[derive(Debug, Clone, PartialEq)]
pub struct ImportedEndUses {
    pub cases: BTreeMap<String, EndUseTable>,
    /// Where the data came from, for reports.
    pub source: String,
}

#[derive(Debug, Deserialize, Serialize)]
struct Row {
    case: String,
    end_use: String,
    fuel: String,
    gj: f64,
}

fn parse_error(source: &str, line: u64, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        reason: reason.into(),
    }
}

pub fn import_end_use_csv(path: &Path) -> Result<ImportedEndUses> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_end_use_csv(file, &path.display().to_string())
}

pub fn read_end_use_csv<R: Read>(reader: R, source: &str) -> Result<ImportedEndUses> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_error(source, 1, e.to_string()))?
        .clone();
    if headers.iter().ne(END_USE_HEADER.iter().copied()) {
        return Err(parse_error(
            source,
            1,
            format!("header must be `{}`", END_USE_HEADER.join(",")),
        ));
    }
    let mut grouped: BTreeMap<String, Vec<(EndUse, Fuel, f64)>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(source, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row: Row = record
            .deserialize(Some(&headers))
            .map_err(|e| parse_error(source, line, e.to_string()))?;
        if row.case.is_empty() {
            return Err(parse_error(source, line, "case name is empty"));
        }
        let end_use: EndUse = row.end_use.parse().map_err(|e: String| parse_error(source, line, e))?;
        let fuel: Fuel = row.fuel.parse().map_err(|e: String| parse_error(source, line, e))?;
        if !(row.gj.is_finite() && row.gj >= 0.0) {
            return Err(parse_error(source, line, format!("gj must be >= 0, got {}", row.gj)));
        }
        if end_use == EndUse::PvGeneration && fuel != Fuel::Electricity {
            return Err(parse_error(source, line, "pv_generation must be on electricity"));
        }
        grouped.entry(row.case).or_default().push((end_use, fuel, row.gj));
    }
    let cases = grouped
        .into_iter()
        .map(|(case, entries)| Ok((case, EndUseTable::from_entries(entries)?)))
        .collect::<Result<_>>()?;
    Ok(ImportedEndUses {
        cases,
        source: source.to_string(),
    })
}

/// Write tables in the importer's format (header derived from the row fields); rows are ordered
/// by case, end use, fuel.
pub fn write_end_use_csv<W: Write>(cases: &BTreeMap<String, EndUseTable>, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (case, table) in cases {
        for (end_use, fuel, gj) in table.entries() {
            w.serialize(Row {
                case: case.clone(),
                end_use: end_use.to_string(),
                fuel: fuel.to_string(),
                gj,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}
