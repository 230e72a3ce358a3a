//! Scenario analytics: per-measure deltas, cumulative waterfalls, rankings and Pareto fronts
//! over measure subsets.
//!
//! Reported quantities are rounded onto a 2⁻²⁰ grid. At the magnitudes involved (well below
//! 2³²) sums and differences of grid values are exact, so waterfall marginals telescope to the
//! package total without rounding drift.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::econ::{annual_energy_cost, annual_ghg, upfront_cost_of, EconomicScenario, RetrofitEvaluation};
use crate::enduse::EndUseTable;
use crate::measures::{apply_measures, Catalog, MeasureSpec, Package};
use crate::model::BuildingModel;
use crate::sim::{simulate_annual, MonthlyWeather};
use crate::{Error, Result};

/// Largest catalog enumerated exhaustively without a package-size bound.
pub const EXHAUSTIVE_LIMIT: usize = 20;

const GRID: f64 = 1_048_576.0;

/// Round onto the 2⁻²⁰ grid.
pub fn snap(x: f64) -> f64 {
    (x * GRID).round() / GRID
}

/// Where annual end-use energy for a (possibly retrofitted) building comes from.
pub trait EnergySource: Sync {
    /// `building` is the base with `applied` already folded in.
    fn energy(&self, building: &BuildingModel, applied: &[&MeasureSpec]) -> Result<EndUseTable>;
}

/// Energy from the monthly model.
pub struct Simulated<'w> {
    pub weather: &'w MonthlyWeather,
}

impl EnergySource for Simulated<'_> {
    fn energy(&self, building: &BuildingModel, _applied: &[&MeasureSpec]) -> Result<EndUseTable> {
        simulate_annual(building, self.weather)
    }
}

/// Energy looked up from externally simulated cases. The base case is keyed `base`; a
/// retrofit case is keyed by its measure ids joined with `+`, in application order or sorted.
pub struct Imported<'a> {
    pub cases: &'a BTreeMap<String, EndUseTable>,
}

impl Imported<'_> {
    pub fn case_key(applied: &[&MeasureSpec]) -> String {
        if applied.is_empty() {
            "base".to_string()
        } else {
            applied.iter().map(|m| m.id.as_str()).collect::<Vec<_>>().join("+")
        }
    }
}

impl EnergySource for Imported<'_> {
    fn energy(&self, _building: &BuildingModel, applied: &[&MeasureSpec]) -> Result<EndUseTable> {
        let key = Self::case_key(applied);
        if let Some(t) = self.cases.get(&key) {
            return Ok(t.clone());
        }
        let mut ids: Vec<&str> = applied.iter().map(|m| m.id.as_str()).collect();
        ids.sort_unstable();
        self.cases.get(&ids.join("+")).cloned().ok_or(Error::MissingCase(key))
    }
}

/// Snapped annual aggregates of one energy table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    /// GJ, net of PV
    pub energy: f64,
    /// GJ
    pub electricity: f64,
    /// GJ
    pub natural_gas: f64,
    /// CAD/yr at the anchor year
    pub cost: f64,
    /// tCO₂e/yr
    pub ghg: f64,
}

impl Metrics {
    pub fn of(e: &EndUseTable, scenario: &EconomicScenario) -> Result<Self> {
        let cost = annual_energy_cost(
            e,
            &scenario.tariff,
            &scenario.emission_factors,
            &scenario.carbon_tax,
            scenario.anchor_year,
            scenario.include_carbon,
        )?;
        Ok(Metrics {
            energy: snap(e.total()),
            electricity: snap(e.electricity()),
            natural_gas: snap(e.natural_gas()),
            cost: snap(cost),
            ghg: snap(annual_ghg(e, &scenario.emission_factors)),
        })
    }
}

/// Savings of a retrofit relative to the base; positive means a reduction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureDeltaRow {
    pub id: String,
    pub label: String,
    /// GJ/yr
    pub delta_energy: f64,
    /// GJ/yr
    pub delta_electricity: f64,
    /// GJ/yr
    pub delta_gas: f64,
    /// CAD/yr at the anchor year
    pub delta_cost: f64,
    /// tCO₂e/yr
    pub delta_ghg: f64,
    /// CAD
    pub upfront: f64,
    /// CAD, net present value of operating savings
    pub lifetime_savings: f64,
    /// CAD
    pub lcc: f64,
}

/// Evaluation of one package against a base table, snapped.
#[derive(Debug, Clone, PartialEq)]
struct PackageOutcome {
    after: Metrics,
    upfront: f64,
    lifetime_savings: f64,
    lcc: f64,
}

fn evaluate_package(
    base_building: &BuildingModel,
    base_energy: &EndUseTable,
    measures: &[&MeasureSpec],
    source: &dyn EnergySource,
    scenario: &EconomicScenario,
) -> Result<PackageOutcome> {
    let retro_building = apply_measures(base_building, measures)?;
    let retro = source.energy(&retro_building, measures)?;
    let upfront = upfront_cost_of(measures, base_building)?;
    let disposal: f64 = measures
        .iter()
        .filter_map(|m| m.cost.as_ref())
        .map(|c| c.disposal_cost)
        .sum();
    let eval = RetrofitEvaluation::compute(base_energy, &retro, upfront, disposal, scenario)?;
    let upfront = snap(eval.upfront);
    let lifetime_savings = snap(eval.lifetime_savings);
    Ok(PackageOutcome {
        after: Metrics::of(&retro, scenario)?,
        upfront,
        lifetime_savings,
        lcc: upfront - lifetime_savings,
    })
}

/// Base-case energy from `source`.
pub fn base_energy(base: &BuildingModel, source: &dyn EnergySource) -> Result<EndUseTable> {
    source.energy(base, &[])
}

/// One row per catalog measure, in catalog order, each applied alone to the base.
pub fn per_measure_deltas(
    base: &BuildingModel,
    catalog: &Catalog,
    source: &dyn EnergySource,
    scenario: &EconomicScenario,
) -> Result<Vec<MeasureDeltaRow>> {
    if catalog.is_empty() {
        return Ok(Vec::new());
    }
    scenario.validate()?;
    let base_table = base_energy(base, source)?;
    let before = Metrics::of(&base_table, scenario)?;
    catalog
        .measures()
        .par_iter()
        .map(|m| {
            let out = evaluate_package(base, &base_table, &[m], source, scenario)?;
            Ok(MeasureDeltaRow {
                id: m.id.clone(),
                label: m.label.clone(),
                delta_energy: before.energy - out.after.energy,
                delta_electricity: before.electricity - out.after.electricity,
                delta_gas: before.natural_gas - out.after.natural_gas,
                delta_cost: before.cost - out.after.cost,
                delta_ghg: before.ghg - out.after.ghg,
                upfront: out.upfront,
                lifetime_savings: out.lifetime_savings,
                lcc: out.lcc,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaterfallStep {
    pub id: String,
    pub label: String,
    /// Remaining annual quantities once this and all earlier steps are applied.
    pub energy: f64,
    pub cost: f64,
    pub ghg: f64,
    /// Reduction attributed to this step: previous remaining minus this remaining.
    pub marginal_energy: f64,
    pub marginal_cost: f64,
    pub marginal_ghg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Waterfall {
    pub base: Metrics,
    pub steps: Vec<WaterfallStep>,
}

impl Waterfall {
    /// Quantities after the last step, or the base when there are no steps.
    pub fn final_energy(&self) -> f64 {
        self.steps.last().map_or(self.base.energy, |s| s.energy)
    }

    pub fn final_cost(&self) -> f64 {
        self.steps.last().map_or(self.base.cost, |s| s.cost)
    }

    pub fn final_ghg(&self) -> f64 {
        self.steps.last().map_or(self.base.ghg, |s| s.ghg)
    }
}

/// Apply the package one measure at a time, attributing each step's marginal reduction.
pub fn cumulative_waterfall(
    base: &BuildingModel,
    package: &Package,
    catalog: &Catalog,
    source: &dyn EnergySource,
    scenario: &EconomicScenario,
) -> Result<Waterfall> {
    scenario.validate()?;
    let measures = package.resolve(catalog)?;
    let base_metrics = Metrics::of(&base_energy(base, source)?, scenario)?;

    let prefixes: Vec<Metrics> = (1..=measures.len())
        .into_par_iter()
        .map(|k| {
            let prefix = &measures[..k];
            let b = apply_measures(base, prefix)?;
            Metrics::of(&source.energy(&b, prefix)?, scenario)
        })
        .collect::<Result<_>>()?;

    let mut prev = base_metrics;
    let steps = measures
        .iter()
        .zip(prefixes)
        .map(|(m, cur)| {
            let step = WaterfallStep {
                id: m.id.clone(),
                label: m.label.clone(),
                energy: cur.energy,
                cost: cur.cost,
                ghg: cur.ghg,
                marginal_energy: prev.energy - cur.energy,
                marginal_cost: prev.cost - cur.cost,
                marginal_ghg: prev.ghg - cur.ghg,
            };
            prev = cur;
            step
        })
        .collect();
    Ok(Waterfall {
        base: base_metrics,
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoPoint {
    /// Measure ids in catalog order.
    pub ids: Vec<String>,
    /// Bit i set when catalog measure i is included.
    pub mask: u64,
    /// CAD
    pub lcc: f64,
    /// Post-retrofit annual emissions, tCO₂e/yr.
    pub ghg: f64,
    /// Post-retrofit annual energy, GJ/yr.
    pub energy: f64,
    /// CAD
    pub upfront: f64,
}

impl ParetoPoint {
    /// Strictly better in one objective and no worse in the other.
    pub fn dominates(&self, other: &ParetoPoint) -> bool {
        self.lcc <= other.lcc && self.ghg <= other.ghg && (self.lcc < other.lcc || self.ghg < other.ghg)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParetoOptions {
    /// Only enumerate packages with at most this many measures.
    pub max_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoResult {
    /// Non-dominated points ordered by (LCC, GHG, mask).
    pub front: Vec<ParetoPoint>,
    /// Every evaluated subset in mask order.
    pub evaluated: Vec<ParetoPoint>,
    /// Subsets skipped because their measures conflict.
    pub skipped: usize,
}

fn subset_masks(n: usize, max_size: Option<usize>) -> Vec<u64> {
    let limit = max_size.unwrap_or(n).min(n);
    if n <= EXHAUSTIVE_LIMIT {
        (0..1u64 << n).filter(|m| m.count_ones() as usize <= limit).collect()
    } else {
        // Enumerate combinations by size to avoid scanning 2^n masks.
        let mut out = Vec::new();
        fn rec(start: usize, n: usize, left: usize, mask: u64, out: &mut Vec<u64>) {
            out.push(mask);
            if left == 0 {
                return;
            }
            for i in start..n {
                rec(i + 1, n, left - 1, mask | (1 << i), out);
            }
        }
        rec(0, n, limit, 0, &mut out);
        out.sort_unstable();
        out
    }
}

/// Minimal non-dominated set of `points` under (min LCC, min GHG); coincident points are all kept.
pub fn non_dominated(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut sorted: Vec<&ParetoPoint> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.lcc
            .total_cmp(&b.lcc)
            .then(a.ghg.total_cmp(&b.ghg))
            .then(a.mask.cmp(&b.mask))
    });
    let mut front: Vec<ParetoPoint> = Vec::new();
    let mut best_ghg = f64::INFINITY;
    for p in sorted {
        let coincident = front.last().is_some_and(|q| q.lcc == p.lcc && q.ghg == p.ghg);
        if p.ghg < best_ghg || coincident {
            best_ghg = best_ghg.min(p.ghg);
            front.push(p.clone());
        }
    }
    front
}

/// Enumerate measure subsets and return the (LCC, GHG) Pareto front.
pub fn pareto_front(
    base: &BuildingModel,
    catalog: &Catalog,
    source: &dyn EnergySource,
    scenario: &EconomicScenario,
    options: ParetoOptions,
) -> Result<ParetoResult> {
    let n = catalog.len();
    if options.max_size.is_none() && n > EXHAUSTIVE_LIMIT {
        return Err(Error::CatalogTooLarge {
            size: n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    if n > 64 {
        return Err(Error::InvalidInput(format!(
            "catalog has {n} measures; at most 64 are supported"
        )));
    }
    scenario.validate()?;
    let base_table = base_energy(base, source)?;
    let all: Vec<&MeasureSpec> = catalog.measures().iter().collect();

    let outcomes: Vec<Option<ParetoPoint>> = subset_masks(n, options.max_size)
        .into_par_iter()
        .map(|mask| {
            let chosen: Vec<&MeasureSpec> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| all[i]).collect();
            match evaluate_package(base, &base_table, &chosen, source, scenario) {
                Ok(out) => Ok(Some(ParetoPoint {
                    ids: chosen.iter().map(|m| m.id.clone()).collect(),
                    mask,
                    lcc: out.lcc,
                    ghg: out.after.ghg,
                    energy: out.after.energy,
                    upfront: out.upfront,
                })),
                Err(Error::Conflict { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let skipped = outcomes.iter().filter(|o| o.is_none()).count();
    let evaluated: Vec<ParetoPoint> = outcomes.into_iter().flatten().collect();
    Ok(ParetoResult {
        front: non_dominated(&evaluated),
        evaluated,
        skipped,
    })
}

/// Measure ids ordered per metric: savings descending, LCC ascending, ties by id.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Rankings {
    pub by_energy: Vec<String>,
    pub by_cost: Vec<String>,
    pub by_ghg: Vec<String>,
    pub by_lcc: Vec<String>,
}

pub fn rank_measures(rows: &[MeasureDeltaRow]) -> Rankings {
    let order = |key: &dyn Fn(&MeasureDeltaRow) -> f64, descending: bool| -> Vec<String> {
        let mut v: Vec<&MeasureDeltaRow> = rows.iter().collect();
        v.sort_by(|a, b| {
            let ord = key(a).total_cmp(&key(b));
            let ord = if descending { ord.reverse() } else { ord };
            if ord == Ordering::Equal {
                a.id.cmp(&b.id)
            } else {
                ord
            }
        });
        v.into_iter().map(|r| r.id.clone()).collect()
    };
    Rankings {
        by_energy: order(&|r| r.delta_energy, true),
        by_cost: order(&|r| r.delta_cost, true),
        by_ghg: order(&|r| r.delta_ghg, true),
        by_lcc: order(&|r| r.lcc, false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::Tariff;
    use crate::enduse::{EndUse, Fuel};
    use crate::io::presets;
    use crate::measures::{CostBasis, Transformation};
    use proptest::prelude::*;

    fn scenario() -> EconomicScenario {
        EconomicScenario::new(Tariff::new(0.15, 0.032), 0.04, 25)
    }

    fn point(lcc: f64, ghg: f64, mask: u64) -> ParetoPoint {
        ParetoPoint {
            ids: vec![],
            mask,
            lcc,
            ghg,
            energy: 0.0,
            upfront: 0.0,
        }
    }

    fn brute_force(points: &[ParetoPoint]) -> Vec<u64> {
        let mut keep: Vec<&ParetoPoint> = points
            .iter()
            .filter(|p| {
                !points
                    .iter()
                    .any(|q| q.lcc <= p.lcc && q.ghg <= p.ghg && (q.lcc < p.lcc || q.ghg < p.ghg))
            })
            .collect();
        keep.sort_by(|a, b| {
            a.lcc
                .total_cmp(&b.lcc)
                .then(a.ghg.total_cmp(&b.ghg))
                .then(a.mask.cmp(&b.mask))
        });
        keep.into_iter().map(|p| p.mask).collect()
    }

    #[test]
    fn dominance_example() {
        let pts = vec![
            point(9.0, 6.0, 0),
            point(10.0, 5.0, 1),
            point(11.0, 4.0, 2),
            point(12.0, 3.0, 3),
            point(13.0, 4.0, 4),
        ];
        let front: Vec<u64> = non_dominated(&pts).iter().map(|p| p.mask).collect();
        assert_eq!(front, vec![0, 1, 2, 3]);
        assert_eq!(front, brute_force(&pts));
    }

    #[test]
    fn coincident_points_both_kept() {
        let pts = vec![point(1.0, 1.0, 0), point(1.0, 1.0, 1), point(1.0, 2.0, 2)];
        let front: Vec<u64> = non_dominated(&pts).iter().map(|p| p.mask).collect();
        assert_eq!(front, vec![0, 1]);
        assert_eq!(front, brute_force(&pts));
    }

    proptest! {
        #[test]
        fn sweep_matches_brute_force(raw in prop::collection::vec((0i32..20, 0i32..20), 0..60)) {
            let pts: Vec<ParetoPoint> = raw.iter().enumerate()
                .map(|(i, &(l, g))| point(f64::from(l), f64::from(g), i as u64))
                .collect();
            let front: Vec<u64> = non_dominated(&pts).iter().map(|p| p.mask).collect();
            prop_assert_eq!(front, brute_force(&pts));
        }

        #[test]
        fn snapped_differences_are_exact(a in 0.0f64..1e6, b in 0.0f64..1e6, c in 0.0f64..1e6) {
            let (a, b, c) = (snap(a), snap(b), snap(c));
            prop_assert_eq!((a - b) + (b - c), a - c);
        }
    }

    #[test]
    fn empty_catalog_gives_no_rows() {
        let b = presets::ng_building();
        let w = MonthlyWeather::bundled();
        let rows = per_measure_deltas(&b, &Catalog::default(), &Simulated { weather: &w }, &scenario()).unwrap();
        assert!(rows.is_empty());
        assert_eq!(rank_measures(&rows), Rankings::default());
    }

    #[test]
    fn identity_measure_gives_zero_row() {
        let b = presets::ng_building();
        let w = MonthlyWeather::bundled();
        let same = MeasureSpec::new(
            "noop",
            "No change",
            Transformation::SetInfiltration {
                rate_per_envelope_area: b.infiltration.rate_per_envelope_area,
            },
        )
        .with_cost(CostBasis::default());
        let cat = Catalog::new(vec![same]).unwrap();
        let rows = per_measure_deltas(&b, &cat, &Simulated { weather: &w }, &scenario()).unwrap();
        let r = &rows[0];
        assert_eq!(
            [
                r.delta_energy,
                r.delta_cost,
                r.delta_ghg,
                r.upfront,
                r.lifetime_savings,
                r.lcc
            ],
            [0.0; 6]
        );
    }

    #[test]
    fn equal_rows_rank_by_id() {
        let row = |id: &str| MeasureDeltaRow {
            id: id.into(),
            label: id.into(),
            delta_energy: 1.0,
            delta_electricity: 1.0,
            delta_gas: 0.0,
            delta_cost: 1.0,
            delta_ghg: 1.0,
            upfront: 0.0,
            lifetime_savings: 0.0,
            lcc: 0.0,
        };
        let r = rank_measures(&[row("b"), row("a")]);
        assert_eq!(r.by_energy, ["a", "b"]);
        assert_eq!(r.by_lcc, ["a", "b"]);
    }

    /// Linear mock: each measure removes a fixed amount of electricity.
    struct Linear;

    impl EnergySource for Linear {
        fn energy(&self, _b: &BuildingModel, applied: &[&MeasureSpec]) -> Result<EndUseTable> {
            let cut: f64 = applied
                .iter()
                .map(|m| match m.id.as_str() {
                    "a" => 100.0,
                    "b" => 250.0,
                    _ => 0.0,
                })
                .sum();
            EndUseTable::from_entries([(EndUse::Plug, Fuel::Electricity, 1000.0 - cut)])
        }
    }

    #[test]
    fn additive_mock_marginals_equal_standalone() {
        let b = presets::ng_building();
        let cat = Catalog::new(vec![
            MeasureSpec::new("a", "A", Transformation::ScalePlug { factor: 0.9 }).with_cost(CostBasis::default()),
            MeasureSpec::new("b", "B", Transformation::ScaleLighting { factor: 0.9 }).with_cost(CostBasis::default()),
        ])
        .unwrap();
        let sc = scenario();
        let rows = per_measure_deltas(&b, &cat, &Linear, &sc).unwrap();
        let wf = cumulative_waterfall(&b, &Package::new(&["a", "b"], &cat).unwrap(), &cat, &Linear, &sc).unwrap();
        for (row, step) in rows.iter().zip(&wf.steps) {
            assert_eq!(row.delta_energy, step.marginal_energy);
            assert_eq!(row.delta_cost, step.marginal_cost);
            assert_eq!(row.delta_ghg, step.marginal_ghg);
        }
        assert_eq!(wf.final_energy(), 650.0);
    }

    #[test]
    fn singleton_waterfall_matches_per_measure() {
        let b = presets::ng_building();
        let w = MonthlyWeather::bundled();
        let cat = presets::ng_catalog();
        let src = Simulated { weather: &w };
        let sc = scenario();
        let rows = per_measure_deltas(&b, &cat, &src, &sc).unwrap();
        for row in &rows {
            let p = Package::new(&[row.id.as_str()], &cat).unwrap();
            let wf = cumulative_waterfall(&b, &p, &cat, &src, &sc).unwrap();
            let s = &wf.steps[0];
            assert_eq!(
                (s.marginal_energy, s.marginal_cost, s.marginal_ghg),
                (row.delta_energy, row.delta_cost, row.delta_ghg)
            );
        }
    }

    #[test]
    fn single_measure_front() {
        let b = presets::ng_building();
        let w = MonthlyWeather::bundled();
        let full = presets::ng_catalog();
        let cat = Catalog::new(vec![full.get("setback").unwrap().clone()]).unwrap();
        let res = pareto_front(
            &b,
            &cat,
            &Simulated { weather: &w },
            &scenario(),
            ParetoOptions::default(),
        )
        .unwrap();
        assert_eq!(res.evaluated.len(), 2);
        assert_eq!(res.evaluated[0].lcc, 0.0);
        // Setback is cheaper over its life and lowers emissions, so it dominates doing nothing.
        assert_eq!(res.front.len(), 1);
        assert_eq!(res.front[0].ids, ["setback"]);
    }

    #[test]
    fn too_large_catalog_needs_bound() {
        let b = presets::ng_building();
        let w = MonthlyWeather::bundled();
        let measures: Vec<MeasureSpec> = (0..21)
            .map(|i| {
                MeasureSpec::new(format!("m{i:02}"), "plug", Transformation::ScalePlug { factor: 0.9 })
                    .with_cost(CostBasis::default())
            })
            .collect();
        let cat = Catalog::new(measures).unwrap();
        let src = Simulated { weather: &w };
        assert!(matches!(
            pareto_front(&b, &cat, &src, &scenario(), ParetoOptions::default()),
            Err(Error::CatalogTooLarge { size: 21, limit: 20 })
        ));
        let res = pareto_front(&b, &cat, &src, &scenario(), ParetoOptions { max_size: Some(1) }).unwrap();
        assert_eq!(res.evaluated.len(), 22);
    }

    #[test]
    fn imported_source_looks_up_cases() {
        let mut cases = BTreeMap::new();
        let t = EndUseTable::from_entries([(EndUse::Plug, Fuel::Electricity, 5.0)]).unwrap();
        cases.insert("base".to_string(), t.clone());
        cases.insert("a+b".to_string(), t);
        let src = Imported { cases: &cases };
        let b = presets::ng_building();
        let a = MeasureSpec::new("a", "A", Transformation::ScalePlug { factor: 0.9 });
        let bm = MeasureSpec::new("b", "B", Transformation::ScalePlug { factor: 0.9 });
        assert!(src.energy(&b, &[]).is_ok());
        assert!(src.energy(&b, &[&bm, &a]).is_ok());
        assert!(matches!(src.energy(&b, &[&a]), Err(Error::MissingCase(k)) if k == "a"));
    }
}
