use std::ffi::{CStr, CString};
use std::ptr;

use retrofit_core::io::presets::NG_SCENARIO_TOML;
use retrofit_ffi::*;

fn last_error() -> Option<String> {
    let p = rl_last_error_message();
    if p.is_null() {
        return None;
    }
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { rl_string_free(p) };
    Some(s)
}

fn load_ng() -> *mut RlScenario {
    let toml = CString::new(NG_SCENARIO_TOML).unwrap();
    let mut s = ptr::null_mut();
    let status = unsafe { rl_scenario_from_toml(toml.as_ptr(), ptr::null(), &mut s) };
    assert_eq!(status, RlStatus::Ok, "{:?}", last_error());
    assert!(!s.is_null());
    s
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(rl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn base_metrics_match_reference_total() {
    let s = load_ng();
    assert_eq!(unsafe { rl_scenario_measure_count(s) }, 11);
    let mut m = RlMetrics::default();
    assert_eq!(unsafe { rl_scenario_base_metrics(s, &mut m) }, RlStatus::Ok);
    assert!((m.energy_gj - 2212.47).abs() < 0.05, "{}", m.energy_gj);
    assert!((m.electricity_gj + m.natural_gas_gj - m.energy_gj).abs() < 1e-6);
    assert!(m.cost_cad > 0.0 && m.ghg_t > 0.0);

    let mut pkg = RlMetrics::default();
    assert_eq!(unsafe { rl_scenario_package_metrics(s, &mut pkg) }, RlStatus::Ok);
    assert!(pkg.energy_gj < m.energy_gj);
    assert!(pkg.ghg_t < m.ghg_t);
    unsafe { rl_scenario_free(s) };
}

#[test]
fn evaluation_rows_and_ids() {
    let s = load_ng();
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { rl_evaluate(s, &mut e) }, RlStatus::Ok);
    let n = unsafe { rl_evaluation_row_count(e) };
    assert_eq!(n, 11);
    let first = unsafe { CStr::from_ptr(rl_evaluation_row_id(e, 0)) }.to_str().unwrap();
    assert_eq!(first, "roof_insulation");
    let mut row = RlMeasureRow::default();
    assert_eq!(unsafe { rl_evaluation_row(e, 0, &mut row) }, RlStatus::Ok);
    assert!(row.delta_energy_gj > 0.0);
    assert!((row.lcc_cad - (row.upfront_cad - row.lifetime_savings_cad)).abs() < 1e-6);

    assert_eq!(unsafe { rl_evaluation_row(e, n, &mut row) }, RlStatus::InvalidArgument);
    assert!(last_error().unwrap().contains("out of range"));
    assert!(unsafe { rl_evaluation_row_id(e, n) }.is_null());
    unsafe {
        rl_evaluation_free(e);
        rl_scenario_free(s);
    }
}

#[test]
fn pareto_front_is_sorted_and_bounded() {
    let s = load_ng();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { rl_pareto(s, 0, &mut p) }, RlStatus::Ok);
    assert_eq!(unsafe { rl_pareto_evaluated(p) }, 2048);
    let n = unsafe { rl_pareto_len(p) };
    assert!(n >= 2);
    let mut prev = f64::NEG_INFINITY;
    let mut prev_ghg = f64::INFINITY;
    for i in 0..n {
        let (mut lcc, mut ghg) = (0.0, 0.0);
        assert_eq!(unsafe { rl_pareto_point(p, i, &mut lcc, &mut ghg) }, RlStatus::Ok);
        assert!(lcc >= prev && ghg <= prev_ghg);
        prev = lcc;
        prev_ghg = ghg;
        assert!(!unsafe { rl_pareto_point_measures(p, i) }.is_null());
    }
    unsafe { rl_pareto_free(p) };

    let mut small = ptr::null_mut();
    assert_eq!(unsafe { rl_pareto(s, 1, &mut small) }, RlStatus::Ok);
    assert_eq!(unsafe { rl_pareto_evaluated(small) }, 12);
    unsafe {
        rl_pareto_free(small);
        rl_scenario_free(s);
    }
}

#[test]
fn reports_written() {
    let s = load_ng();
    let dir = tempfile::tempdir().unwrap();
    let d = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { rl_write_reports(s, d.as_ptr()) },
        RlStatus::Ok,
        "{:?}",
        last_error()
    );
    for f in [
        "per_measure.csv",
        "pareto.csv",
        "summary.json",
        "summary.md",
        "waterfall_energy.csv",
    ] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    unsafe { rl_scenario_free(s) };
}

#[test]
fn null_and_bad_inputs_are_reported() {
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { rl_scenario_load(ptr::null(), &mut s) },
        RlStatus::InvalidArgument
    );
    assert!(last_error().unwrap().contains("path"));

    let missing = CString::new("/nonexistent/scenario.toml").unwrap();
    assert_eq!(unsafe { rl_scenario_load(missing.as_ptr(), &mut s) }, RlStatus::Io);
    assert!(s.is_null());

    let broken = CString::new("[building]\nfloor_area = \"x\"\n").unwrap();
    assert_eq!(
        unsafe { rl_scenario_from_toml(broken.as_ptr(), ptr::null(), &mut s) },
        RlStatus::Validation
    );
    assert!(last_error().is_some());

    let mut m = RlMetrics::default();
    assert_eq!(
        unsafe { rl_scenario_base_metrics(ptr::null(), &mut m) },
        RlStatus::InvalidArgument
    );
    assert_eq!(unsafe { rl_scenario_measure_count(ptr::null()) }, 0);
    unsafe {
        rl_scenario_free(ptr::null_mut());
        rl_evaluation_free(ptr::null_mut());
        rl_string_free(ptr::null_mut());
    }
}

#[test]
fn success_clears_last_error() {
    let mut v = 0.0;
    assert_eq!(
        unsafe { rl_npv(ptr::null(), 3, 0.04, &mut v) },
        RlStatus::InvalidArgument
    );
    assert!(last_error().is_some());
    assert_eq!(unsafe { rl_carbon_tax_at(2022, &mut v) }, RlStatus::Ok);
    assert!(last_error().is_none());
}

#[test]
fn scalar_helpers() {
    let mut v = 0.0;
    assert_eq!(unsafe { rl_carbon_tax_at(2022, &mut v) }, RlStatus::Ok);
    assert_eq!(v, 50.0);
    assert_eq!(unsafe { rl_carbon_tax_at(2030, &mut v) }, RlStatus::Ok);
    assert_eq!(v, 170.0);
    assert_eq!(unsafe { rl_carbon_tax_at(2050, &mut v) }, RlStatus::Ok);
    assert_eq!(v, 300.0);

    let flows = [0.0, 100.0, 100.0];
    assert_eq!(
        unsafe { rl_npv(flows.as_ptr(), flows.len(), 0.0, &mut v) },
        RlStatus::Ok
    );
    assert!((v - 200.0).abs() < 1e-12);
    assert_eq!(
        unsafe { rl_npv(flows.as_ptr(), flows.len(), 0.1, &mut v) },
        RlStatus::Ok
    );
    let expected = 100.0 / 1.1 + 100.0 / 1.21;
    assert!((v - expected).abs() < 1e-9);
    assert_eq!(unsafe { rl_npv(ptr::null(), 0, 0.04, &mut v) }, RlStatus::Ok);
    assert_eq!(v, 0.0);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/retrofit_lcc.h")).unwrap();
    for name in [
        "rl_version",
        "rl_last_error_message",
        "rl_string_free",
        "rl_scenario_load",
        "rl_scenario_from_toml",
        "rl_scenario_free",
        "rl_scenario_base_metrics",
        "rl_scenario_package_metrics",
        "rl_evaluate",
        "rl_evaluation_row",
        "rl_pareto",
        "rl_pareto_point",
        "rl_write_reports",
        "rl_carbon_tax_at",
        "rl_npv",
        "RL_STATUS_OK",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
