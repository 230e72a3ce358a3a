use retrofit_core::econ::{annual_ghg, EmissionFactors};
use retrofit_core::io::import::{import_end_use_csv, read_end_use_csv};
use retrofit_core::io::presets::REFERENCE_BASE_CSV;
use retrofit_core::Error;

#[test]
fn bundled_base_cases_sum_to_reference_totals() {
    let imp = read_end_use_csv(REFERENCE_BASE_CSV.as_bytes(), "bundled").unwrap();
    let ng = &imp.cases["ng_base"];
    let e = &imp.cases["e_base"];
    assert!((ng.total() - 2212.47).abs() < 1e-6, "{}", ng.total());
    assert!((e.total() - 2125.11).abs() < 1e-6, "{}", e.total());
    assert_eq!(e.natural_gas(), 0.0);
    assert!((annual_ghg(e, &EmissionFactors::default()) - 6.79).abs() < 1e-9);
}

#[test]
fn file_errors_carry_path_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("bad.csv");
    std::fs::write(&p, "case,end_use,fuel,gj\nbase,lighting,electricity,abc\n").unwrap();
    match import_end_use_csv(&p) {
        Err(Error::Parse { path, line, .. }) => {
            assert!(path.ends_with("bad.csv"));
            assert_eq!(line, 2);
        }
        other => panic!("{other:?}"),
    }
    assert!(import_end_use_csv(&tmp.path().join("missing.csv")).unwrap_err().is_io());
}
