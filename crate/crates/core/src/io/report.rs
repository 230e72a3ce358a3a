//! Report files: plot-ready CSVs plus JSON and Markdown summaries.
//!
//! Numbers are written with six significant digits and no locale or clock dependence, so
//! identical inputs always produce byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use super::config::{Mode, ReferenceValues};
use crate::analysis::{MeasureDeltaRow, Metrics, ParetoResult, Rankings, Waterfall};
use crate::econ::FuelSplit;
use crate::enduse::EndUseTable;
use crate::sim::CalibrationResult;
use crate::{Error, Result};

pub const PER_MEASURE_CSV: &str = "per_measure.csv";
pub const WATERFALL_ENERGY_CSV: &str = "waterfall_energy.csv";
pub const WATERFALL_COST_CSV: &str = "waterfall_cost.csv";
pub const WATERFALL_GHG_CSV: &str = "waterfall_ghg.csv";
pub const PARETO_CSV: &str = "pareto.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_MD: &str = "summary.md";

pub const REPORT_FILES: [&str; 7] = [
    PER_MEASURE_CSV,
    WATERFALL_ENERGY_CSV,
    WATERFALL_COST_CSV,
    WATERFALL_GHG_CSV,
    PARETO_CSV,
    SUMMARY_JSON,
    SUMMARY_MD,
];

/// Everything a run produced. Absent sections are written as header-only files.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ReportInput {
    pub scenario: String,
    pub mode: Mode,
    pub base: Option<Metrics>,
    pub base_end_uses: Option<EndUseTable>,
    pub rows: Vec<MeasureDeltaRow>,
    pub rankings: Option<Rankings>,
    pub waterfall: Option<Waterfall>,
    pub pareto: Option<ParetoResult>,
    pub calibration: Option<CalibrationResult>,
    pub fuel_split: Option<FuelSplit>,
    pub reference: Option<ReferenceValues>,
    pub notes: Vec<String>,
}

/// Six significant digits, plain decimal notation for ordinary magnitudes.
pub fn fmt6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs();
    let mut s = if !(1e-4..1e15).contains(&mag) {
        format!("{x:.5e}")
    } else {
        let exponent = mag.log10().floor() as i32;
        let decimals = (5 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    };
    if s.contains('.') {
        let split = s.find('e').unwrap_or(s.len());
        let (mantissa, exp) = s.split_at(split);
        s = format!("{}{exp}", mantissa.trim_end_matches('0').trim_end_matches('.'));
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn round6(x: f64) -> f64 {
    fmt6(x).parse().unwrap_or(x)
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(f) = n.as_f64() {
                *v = serde_json::Number::from_f64(round6(f)).map_or(Value::Null, Value::Number);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn per_measure_csv(rows: &[MeasureDeltaRow]) -> Vec<u8> {
    csv_bytes(
        &[
            "id",
            "label",
            "delta_energy_gj",
            "delta_electricity_gj",
            "delta_gas_gj",
            "delta_cost_cad",
            "delta_ghg_t",
            "upfront_cad",
            "lifetime_savings_cad",
            "lcc_cad",
        ],
        rows.iter()
            .map(|r| {
                vec![
                    r.id.clone(),
                    r.label.clone(),
                    fmt6(r.delta_energy),
                    fmt6(r.delta_electricity),
                    fmt6(r.delta_gas),
                    fmt6(r.delta_cost),
                    fmt6(r.delta_ghg),
                    fmt6(r.upfront),
                    fmt6(r.lifetime_savings),
                    fmt6(r.lcc),
                ]
            })
            .collect(),
    )
}

#[derive(Clone, Copy)]
pub enum WaterfallMetric {
    Energy,
    Cost,
    Ghg,
}

/// Step 0 is the base building; later steps are cumulative.
pub fn waterfall_csv(w: Option<&Waterfall>, metric: WaterfallMetric) -> Vec<u8> {
    let unit = match metric {
        WaterfallMetric::Energy => "gj",
        WaterfallMetric::Cost => "cad",
        WaterfallMetric::Ghg => "t",
    };
    let remaining = format!("remaining_{unit}");
    let marginal = format!("marginal_{unit}");
    let mut rows = Vec::new();
    if let Some(w) = w {
        let base = match metric {
            WaterfallMetric::Energy => w.base.energy,
            WaterfallMetric::Cost => w.base.cost,
            WaterfallMetric::Ghg => w.base.ghg,
        };
        rows.push(vec![
            "0".into(),
            "base".into(),
            "Base building".into(),
            fmt6(base),
            "0".into(),
        ]);
        for (i, s) in w.steps.iter().enumerate() {
            let (rem, marg) = match metric {
                WaterfallMetric::Energy => (s.energy, s.marginal_energy),
                WaterfallMetric::Cost => (s.cost, s.marginal_cost),
                WaterfallMetric::Ghg => (s.ghg, s.marginal_ghg),
            };
            rows.push(vec![
                (i + 1).to_string(),
                s.id.clone(),
                s.label.clone(),
                fmt6(rem),
                fmt6(marg),
            ]);
        }
    }
    csv_bytes(&["step", "id", "label", &remaining, &marginal], rows)
}

pub fn pareto_csv(p: Option<&ParetoResult>) -> Vec<u8> {
    let rows = p
        .map(|p| {
            p.front
                .iter()
                .enumerate()
                .map(|(i, pt)| {
                    vec![
                        (i + 1).to_string(),
                        pt.ids.len().to_string(),
                        pt.ids.join("+"),
                        fmt6(pt.lcc),
                        fmt6(pt.ghg),
                        fmt6(pt.energy),
                        fmt6(pt.upfront),
                    ]
                })
                .collect()
        })
        .unwrap_or_default();
    csv_bytes(
        &[
            "rank",
            "size",
            "measures",
            "lcc_cad",
            "ghg_t",
            "energy_gj",
            "upfront_cad",
        ],
        rows,
    )
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: &'a str,
    mode: Mode,
    base: Option<&'a Metrics>,
    base_end_uses: Option<Vec<EndUseEntry>>,
    measures: &'a [MeasureDeltaRow],
    rankings: Option<&'a Rankings>,
    waterfall: Option<WaterfallSummary<'a>>,
    pareto: Option<ParetoSummary<'a>>,
    calibration: Option<&'a CalibrationResult>,
    fuel_split: Option<&'a FuelSplit>,
    reference: Option<&'a ReferenceValues>,
    notes: &'a [String],
}

#[derive(Serialize)]
struct EndUseEntry {
    end_use: String,
    fuel: String,
    gj: f64,
}

#[derive(Serialize)]
struct WaterfallSummary<'a> {
    order: Vec<&'a str>,
    final_energy_gj: f64,
    final_cost_cad: f64,
    final_ghg_t: f64,
    ghg_reduction_fraction: f64,
}

#[derive(Serialize)]
struct ParetoSummary<'a> {
    evaluated: usize,
    skipped: usize,
    front: Vec<&'a crate::analysis::ParetoPoint>,
}

pub fn summary_json(input: &ReportInput) -> Vec<u8> {
    let summary = Summary {
        scenario: &input.scenario,
        mode: input.mode,
        base: input.base.as_ref(),
        base_end_uses: input.base_end_uses.as_ref().map(|t| {
            t.entries()
                .map(|(e, f, gj)| EndUseEntry {
                    end_use: e.to_string(),
                    fuel: f.to_string(),
                    gj,
                })
                .collect()
        }),
        measures: &input.rows,
        rankings: input.rankings.as_ref(),
        waterfall: input.waterfall.as_ref().map(|w| WaterfallSummary {
            order: w.steps.iter().map(|s| s.id.as_str()).collect(),
            final_energy_gj: w.final_energy(),
            final_cost_cad: w.final_cost(),
            final_ghg_t: w.final_ghg(),
            ghg_reduction_fraction: if w.base.ghg > 0.0 {
                1.0 - w.final_ghg() / w.base.ghg
            } else {
                0.0
            },
        }),
        pareto: input.pareto.as_ref().map(|p| ParetoSummary {
            evaluated: p.evaluated.len(),
            skipped: p.skipped,
            front: p.front.iter().collect(),
        }),
        calibration: input.calibration.as_ref(),
        fuel_split: input.fuel_split.as_ref(),
        reference: input.reference.as_ref(),
        notes: &input.notes,
    };
    let mut value = serde_json::to_value(&summary).expect("summary is serializable");
    round_json(&mut value);
    let mut out = serde_json::to_vec_pretty(&value).expect("value is serializable");
    out.push(b'\n');
    out
}

fn md_table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    out.push('\n');
}

pub fn summary_md(input: &ReportInput) -> Vec<u8> {
    let mut out = String::new();
    let mode = match input.mode {
        Mode::Simulate => "simulate",
        Mode::Import => "import",
    };
    let _ = writeln!(out, "# Retrofit evaluation: {}\n", input.scenario);
    let _ = writeln!(out, "Energy source: {mode}\n");

    if let Some(b) = &input.base {
        let _ = writeln!(out, "## Base building\n");
        let mut rows = vec![
            vec!["Total energy (GJ/yr)".into(), fmt6(b.energy)],
            vec!["Electricity, net (GJ/yr)".into(), fmt6(b.electricity)],
            vec!["Natural gas (GJ/yr)".into(), fmt6(b.natural_gas)],
            vec!["Energy cost (CAD/yr)".into(), fmt6(b.cost)],
            vec!["GHG emissions (tCO2e/yr)".into(), fmt6(b.ghg)],
        ];
        if let Some(r) = &input.reference {
            let refs = [r.total_energy_gj, None, None, r.energy_cost_cad, r.ghg_t];
            for (row, reference) in rows.iter_mut().zip(refs) {
                row.push(reference.map_or_else(|| "-".into(), fmt6));
            }
            md_table(&mut out, &["Quantity", "Model", "Reference"], &rows);
        } else {
            md_table(&mut out, &["Quantity", "Model"], &rows);
        }
    }

    if let Some(s) = &input.fuel_split {
        let _ = writeln!(out, "## Reference fuel split\n");
        md_table(
            &mut out,
            &[
                "Electricity (GJ)",
                "Natural gas (GJ)",
                "Forward cost (CAD)",
                "Residual",
                "Status",
            ],
            &[vec![
                fmt6(s.electricity),
                fmt6(s.natural_gas),
                fmt6(s.forward_cost),
                fmt6(s.residual),
                format!("{:?}", s.status),
            ]],
        );
    }

    if let Some(c) = &input.calibration {
        let _ = writeln!(out, "## Calibration\n");
        let _ = writeln!(
            out,
            "Residual {} (initial {}), {} after {} evaluations.\n",
            fmt6(c.residual),
            fmt6(c.initial_residual),
            if c.feasible {
                "within tolerance"
            } else {
                "OUTSIDE tolerance"
            },
            c.evaluations
        );
        let rows: Vec<Vec<String>> = c
            .targets
            .iter()
            .map(|t| {
                vec![
                    t.name.to_string(),
                    fmt6(t.target),
                    fmt6(t.simulated),
                    fmt6(t.relative_error),
                ]
            })
            .collect();
        md_table(&mut out, &["Target", "Observed", "Simulated", "Relative error"], &rows);
    }

    if !input.rows.is_empty() {
        let _ = writeln!(out, "## Individual measures\n");
        let rows: Vec<Vec<String>> = input
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.label.clone(),
                    fmt6(r.delta_energy),
                    fmt6(r.delta_cost),
                    fmt6(r.delta_ghg),
                    fmt6(r.upfront),
                    fmt6(r.lcc),
                ]
            })
            .collect();
        md_table(
            &mut out,
            &[
                "Measure",
                "Energy saved (GJ/yr)",
                "Cost saved (CAD/yr)",
                "GHG saved (t/yr)",
                "Upfront (CAD)",
                "LCC (CAD)",
            ],
            &rows,
        );
        if let Some(r) = &input.rankings {
            let _ = writeln!(out, "Ranked by energy saved: {}\n", r.by_energy.join(", "));
            let _ = writeln!(out, "Ranked by GHG saved: {}\n", r.by_ghg.join(", "));
            let _ = writeln!(out, "Ranked by LCC: {}\n", r.by_lcc.join(", "));
        }
    }

    if let Some(w) = &input.waterfall {
        let _ = writeln!(out, "## Cumulative package\n");
        let mut rows = vec![vec![
            "Base".into(),
            fmt6(w.base.energy),
            fmt6(w.base.cost),
            fmt6(w.base.ghg),
        ]];
        rows.extend(
            w.steps
                .iter()
                .map(|s| vec![format!("+ {}", s.label), fmt6(s.energy), fmt6(s.cost), fmt6(s.ghg)]),
        );
        md_table(
            &mut out,
            &["Step", "Energy (GJ/yr)", "Cost (CAD/yr)", "GHG (t/yr)"],
            &rows,
        );
        if w.base.ghg > 0.0 {
            let _ = writeln!(
                out,
                "GHG reduction over the package: {} %.\n",
                fmt6(100.0 * (1.0 - w.final_ghg() / w.base.ghg))
            );
        }
        if let Some(target) = input.reference.as_ref().and_then(|r| r.package_ghg_t) {
            let _ = writeln!(
                out,
                "Reference post-package emissions: {} t/yr (model: {} t/yr).\n",
                fmt6(target),
                fmt6(w.final_ghg())
            );
        }
    }

    if let Some(p) = &input.pareto {
        let _ = writeln!(out, "## Pareto front (LCC vs annual GHG)\n");
        let _ = writeln!(
            out,
            "{} packages evaluated, {} skipped as conflicting.\n",
            p.evaluated.len(),
            p.skipped
        );
        let rows: Vec<Vec<String>> = p
            .front
            .iter()
            .map(|pt| {
                let ids = if pt.ids.is_empty() {
                    "(none)".to_string()
                } else {
                    pt.ids.join(" + ")
                };
                vec![ids, fmt6(pt.lcc), fmt6(pt.ghg)]
            })
            .collect();
        md_table(&mut out, &["Measures", "LCC (CAD)", "GHG (t/yr)"], &rows);
    }

    if !input.notes.is_empty() {
        let _ = writeln!(out, "## Notes\n");
        for n in &input.notes {
            let _ = writeln!(out, "- {n}");
        }
        out.push('\n');
    }
    out.into_bytes()
}

/// Write the full report set into `dir`, creating it if needed. Returns the written paths.
pub fn emit_reports(input: &ReportInput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files: [(&str, Vec<u8>); 7] = [
        (PER_MEASURE_CSV, per_measure_csv(&input.rows)),
        (
            WATERFALL_ENERGY_CSV,
            waterfall_csv(input.waterfall.as_ref(), WaterfallMetric::Energy),
        ),
        (
            WATERFALL_COST_CSV,
            waterfall_csv(input.waterfall.as_ref(), WaterfallMetric::Cost),
        ),
        (
            WATERFALL_GHG_CSV,
            waterfall_csv(input.waterfall.as_ref(), WaterfallMetric::Ghg),
        ),
        (PARETO_CSV, pareto_csv(input.pareto.as_ref())),
        (SUMMARY_JSON, summary_json(input)),
        (SUMMARY_MD, summary_md(input)),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
