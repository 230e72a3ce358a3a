//! C ABI for the retrofit evaluation engine.
//!
//! Handles are opaque and owned by the caller once returned; release them with the matching
//! `*_free` function. Every fallible call returns an [`RlStatus`]; on failure a description is
//! available from [`rl_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use retrofit_core::analysis::{
    base_energy, cumulative_waterfall, pareto_front, per_measure_deltas, rank_measures, EnergySource, Imported,
    MeasureDeltaRow, Metrics, ParetoOptions, ParetoResult, Simulated, EXHAUSTIVE_LIMIT,
};
use retrofit_core::econ::{carbon_tax_at, npv, CarbonTaxSchedule};
use retrofit_core::enduse::EndUseTable;
use retrofit_core::io::config::{load_scenario_config, parse_scenario_config, Mode, ScenarioConfig};
use retrofit_core::io::import::import_end_use_csv;
use retrofit_core::io::report::{emit_reports, ReportInput};
use retrofit_core::measures::{apply_measures, Catalog};
use retrofit_core::sim::MonthlyWeather;
use retrofit_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlStatus {
    Ok = 0,
    /// A required pointer was null, a string was not UTF-8, or an index was out of range.
    InvalidArgument = 1,
    /// The configuration, building or a measure failed validation or could not be parsed.
    Validation = 2,
    /// A file could not be read or written.
    Io = 3,
    /// A measure could not be applied to the building.
    Conflict = 4,
    /// An internal error; the handle involved should be discarded.
    Internal = 5,
}

/// Annual aggregates of one building state.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RlMetrics {
    /// GJ/yr, net of PV.
    pub energy_gj: f64,
    pub electricity_gj: f64,
    pub natural_gas_gj: f64,
    /// CAD/yr at the anchor year.
    pub cost_cad: f64,
    /// tCO2e/yr
    pub ghg_t: f64,
}

impl From<Metrics> for RlMetrics {
    fn from(m: Metrics) -> Self {
        RlMetrics {
            energy_gj: m.energy,
            electricity_gj: m.electricity,
            natural_gas_gj: m.natural_gas,
            cost_cad: m.cost,
            ghg_t: m.ghg,
        }
    }
}

/// Savings of one measure applied alone; positive values are reductions.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RlMeasureRow {
    pub delta_energy_gj: f64,
    pub delta_electricity_gj: f64,
    pub delta_gas_gj: f64,
    pub delta_cost_cad: f64,
    pub delta_ghg_t: f64,
    pub upfront_cad: f64,
    pub lifetime_savings_cad: f64,
    pub lcc_cad: f64,
}

impl From<&MeasureDeltaRow> for RlMeasureRow {
    fn from(r: &MeasureDeltaRow) -> Self {
        RlMeasureRow {
            delta_energy_gj: r.delta_energy,
            delta_electricity_gj: r.delta_electricity,
            delta_gas_gj: r.delta_gas,
            delta_cost_cad: r.delta_cost,
            delta_ghg_t: r.delta_ghg,
            upfront_cad: r.upfront,
            lifetime_savings_cad: r.lifetime_savings,
            lcc_cad: r.lcc,
        }
    }
}

enum Source {
    Simulated(Box<MonthlyWeather>),
    Imported(BTreeMap<String, EndUseTable>),
}

/// A loaded, validated scenario.
pub struct RlScenario {
    config: ScenarioConfig,
    catalog: Catalog,
    source: Source,
}

impl RlScenario {
    fn new(config: ScenarioConfig) -> Result<Self, Error> {
        let catalog = config.catalog()?;
        let source = match config.mode {
            Mode::Simulate => Source::Simulated(Box::new(config.weather()?)),
            Mode::Import => {
                let path = config
                    .import_path()
                    .ok_or_else(|| Error::InvalidInput("import mode needs import_path".into()))?;
                Source::Imported(import_end_use_csv(&path)?.cases)
            }
        };
        Ok(RlScenario {
            config,
            catalog,
            source,
        })
    }

    fn with<R>(&self, f: impl FnOnce(&dyn EnergySource) -> R) -> R {
        match &self.source {
            Source::Simulated(weather) => f(&Simulated { weather }),
            Source::Imported(cases) => f(&Imported { cases }),
        }
    }

    fn base_metrics(&self) -> Result<Metrics, Error> {
        let table = self.with(|s| base_energy(&self.config.building, s))?;
        Metrics::of(&table, &self.config.economics)
    }
}

/// Per-measure results of one evaluation run.
pub struct RlEvaluation {
    rows: Vec<MeasureDeltaRow>,
    ids: Vec<CString>,
}

/// Pareto front of one enumeration run.
pub struct RlPareto {
    result: ParetoResult,
    ids: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> RlStatus {
    match e {
        Error::Io { .. } => RlStatus::Io,
        Error::Conflict { .. } => RlStatus::Conflict,
        _ => RlStatus::Validation,
    }
}

fn fail(e: Error) -> RlStatus {
    set_last_error(&e.to_string());
    status_of(&e)
}

fn invalid(message: &str) -> RlStatus {
    set_last_error(message);
    RlStatus::InvalidArgument
}

/// Run `f`, turning panics into [`RlStatus::Internal`].
fn guard(f: impl FnOnce() -> RlStatus) -> RlStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal error");
            RlStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, RlStatus> {
    if p.is_null() {
        return Err(invalid(&format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(&format!("`{name}` is not valid UTF-8")))
}

fn id_strings<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<CString> {
    ids.map(|s| CString::new(s).unwrap_or_default()).collect()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or null when the last call succeeded.
/// Free the result with [`rl_string_free`].
#[no_mangle]
pub extern "C" fn rl_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// Free a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Load a scenario configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_scenario_load(path: *const c_char, out: *mut *mut RlScenario) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return invalid("`out` is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_scenario_config(Path::new(path)).and_then(|l| RlScenario::new(l.config)) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(s));
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parse a scenario from TOML text. Relative paths in it resolve against `base_dir`, which may
/// be null for the current directory.
///
/// # Safety
/// `toml` and a non-null `base_dir` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_scenario_from_toml(
    toml: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut RlScenario,
) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return invalid("`out` is null");
        }
        let text = match str_arg(toml, "toml") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let dir = if base_dir.is_null() {
            "."
        } else {
            match str_arg(base_dir, "base_dir") {
                Ok(d) => d,
                Err(s) => return s,
            }
        };
        match parse_scenario_config(text, "<memory>", Path::new(dir)).and_then(|l| RlScenario::new(l.config)) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(s));
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a scenario. Null is ignored.
///
/// # Safety
/// `s` must come from a scenario constructor and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rl_scenario_free(s: *mut RlScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of measures in the scenario's catalog; 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn rl_scenario_measure_count(s: *const RlScenario) -> usize {
    s.as_ref().map_or(0, |s| s.catalog.len())
}

/// Annual aggregates of the base building.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_scenario_base_metrics(s: *const RlScenario, out: *mut RlMetrics) -> RlStatus {
    guard(|| {
        let (Some(s), false) = (s.as_ref(), out.is_null()) else {
            return invalid("null argument");
        };
        match s.base_metrics() {
            Ok(m) => {
                *out = m.into();
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Aggregates after the full package in the configured waterfall order.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_scenario_package_metrics(s: *const RlScenario, out: *mut RlMetrics) -> RlStatus {
    guard(|| {
        let (Some(s), false) = (s.as_ref(), out.is_null()) else {
            return invalid("null argument");
        };
        let result = (|| {
            let package = s.config.waterfall_package(&s.catalog)?;
            let measures = package.resolve(&s.catalog)?;
            let retrofitted = apply_measures(&s.config.building, &measures)?;
            let table = s.with(|src| src.energy(&retrofitted, &measures))?;
            Metrics::of(&table, &s.config.economics)
        })();
        match result {
            Ok(m) => {
                *out = m.into();
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Evaluate every catalog measure on its own against the base building.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_evaluate(s: *const RlScenario, out: *mut *mut RlEvaluation) -> RlStatus {
    guard(|| {
        let (Some(s), false) = (s.as_ref(), out.is_null()) else {
            return invalid("null argument");
        };
        match s.with(|src| per_measure_deltas(&s.config.building, &s.catalog, src, &s.config.economics)) {
            Ok(rows) => {
                let ids = id_strings(rows.iter().map(|r| r.id.as_str()));
                *out = Box::into_raw(Box::new(RlEvaluation { rows, ids }));
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Release an evaluation. Null is ignored.
///
/// # Safety
/// `e` must come from [`rl_evaluate`] and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rl_evaluation_free(e: *mut RlEvaluation) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// # Safety
/// `e` must be null or a live evaluation handle.
#[no_mangle]
pub unsafe extern "C" fn rl_evaluation_row_count(e: *const RlEvaluation) -> usize {
    e.as_ref().map_or(0, |e| e.rows.len())
}

/// Numeric results of row `index` (catalog order).
///
/// # Safety
/// `e` must be a live evaluation handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_evaluation_row(e: *const RlEvaluation, index: usize, out: *mut RlMeasureRow) -> RlStatus {
    guard(|| {
        let (Some(e), false) = (e.as_ref(), out.is_null()) else {
            return invalid("null argument");
        };
        match e.rows.get(index) {
            Some(r) => {
                *out = r.into();
                RlStatus::Ok
            }
            None => invalid(&format!("row index {index} out of range ({} rows)", e.rows.len())),
        }
    })
}

/// Measure id of row `index`, borrowed from the handle (valid until it is freed); null when
/// out of range.
///
/// # Safety
/// `e` must be null or a live evaluation handle.
#[no_mangle]
pub unsafe extern "C" fn rl_evaluation_row_id(e: *const RlEvaluation, index: usize) -> *const c_char {
    e.as_ref()
        .and_then(|e| e.ids.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Enumerate measure packages and keep the (LCC, GHG) Pareto front. `max_size` of 0 means no
/// bound on package size.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_pareto(s: *const RlScenario, max_size: usize, out: *mut *mut RlPareto) -> RlStatus {
    guard(|| {
        let (Some(s), false) = (s.as_ref(), out.is_null()) else {
            return invalid("null argument");
        };
        let options = ParetoOptions {
            max_size: (max_size > 0).then_some(max_size),
        };
        match s.with(|src| pareto_front(&s.config.building, &s.catalog, src, &s.config.economics, options)) {
            Ok(result) => {
                let joined: Vec<String> = result.front.iter().map(|p| p.ids.join("+")).collect();
                let ids = id_strings(joined.iter().map(String::as_str));
                *out = Box::into_raw(Box::new(RlPareto { result, ids }));
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a Pareto result. Null is ignored.
///
/// # Safety
/// `p` must come from [`rl_pareto`] and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rl_pareto_free(p: *mut RlPareto) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of points on the front.
///
/// # Safety
/// `p` must be null or a live Pareto handle.
#[no_mangle]
pub unsafe extern "C" fn rl_pareto_len(p: *const RlPareto) -> usize {
    p.as_ref().map_or(0, |p| p.result.front.len())
}

/// Number of packages evaluated while building the front.
///
/// # Safety
/// `p` must be null or a live Pareto handle.
#[no_mangle]
pub unsafe extern "C" fn rl_pareto_evaluated(p: *const RlPareto) -> usize {
    p.as_ref().map_or(0, |p| p.result.evaluated.len())
}

/// LCC (CAD) and annual GHG (t) of front point `index`, ordered by ascending LCC.
///
/// # Safety
/// `p` must be a live Pareto handle; `lcc` and `ghg` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_pareto_point(p: *const RlPareto, index: usize, lcc: *mut f64, ghg: *mut f64) -> RlStatus {
    guard(|| {
        let (Some(p), false, false) = (p.as_ref(), lcc.is_null(), ghg.is_null()) else {
            return invalid("null argument");
        };
        match p.result.front.get(index) {
            Some(pt) => {
                *lcc = pt.lcc;
                *ghg = pt.ghg;
                RlStatus::Ok
            }
            None => invalid(&format!("point index {index} out of range")),
        }
    })
}

/// Measure ids of front point `index` joined with `+` (empty for doing nothing), borrowed from
/// the handle; null when out of range.
///
/// # Safety
/// `p` must be null or a live Pareto handle.
#[no_mangle]
pub unsafe extern "C" fn rl_pareto_point_measures(p: *const RlPareto, index: usize) -> *const c_char {
    p.as_ref()
        .and_then(|p| p.ids.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Run the full evaluation and write the report files into `dir`. The Pareto section is left
/// empty when the catalog is too large to enumerate exhaustively.
///
/// # Safety
/// `s` must be a live scenario handle; `dir` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rl_write_reports(s: *const RlScenario, dir: *const c_char) -> RlStatus {
    guard(|| {
        let Some(s) = s.as_ref() else {
            return invalid("`s` is null");
        };
        let dir = match str_arg(dir, "dir") {
            Ok(d) => d,
            Err(st) => return st,
        };
        let run = || -> Result<(), Error> {
            let b = &s.config.building;
            let econ = &s.config.economics;
            let package = s.config.waterfall_package(&s.catalog)?;
            let rows = s.with(|src| per_measure_deltas(b, &s.catalog, src, econ))?;
            let base_table = s.with(|src| base_energy(b, src))?;
            let pareto = if s.catalog.len() > EXHAUSTIVE_LIMIT {
                None
            } else {
                Some(s.with(|src| pareto_front(b, &s.catalog, src, econ, ParetoOptions::default()))?)
            };
            let input = ReportInput {
                scenario: s.config.name.clone().unwrap_or_else(|| "scenario".into()),
                mode: s.config.mode,
                base: Some(Metrics::of(&base_table, econ)?),
                base_end_uses: Some(base_table),
                rankings: Some(rank_measures(&rows)),
                rows,
                waterfall: Some(s.with(|src| cumulative_waterfall(b, &package, &s.catalog, src, econ))?),
                pareto,
                reference: s.config.reference.clone(),
                ..Default::default()
            };
            emit_reports(&input, Path::new(dir)).map(|_| ())
        };
        match run() {
            Ok(()) => RlStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Carbon price (CAD/tCO2e) in `year` under the default schedule.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_carbon_tax_at(year: i32, out: *mut f64) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return invalid("`out` is null");
        }
        match carbon_tax_at(&CarbonTaxSchedule::default(), year) {
            Ok(v) => {
                *out = v;
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Net present value of `len` yearly flows (year 0 first) at rate `rate`.
///
/// # Safety
/// `flows` must point to `len` readable doubles (or be null with `len` 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_npv(flows: *const f64, len: usize, rate: f64, out: *mut f64) -> RlStatus {
    guard(|| {
        if out.is_null() || (flows.is_null() && len > 0) {
            return invalid("null argument");
        }
        let slice = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(flows, len)
        };
        match npv(slice, rate) {
            Ok(v) => {
                *out = v;
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
