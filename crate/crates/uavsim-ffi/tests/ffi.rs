//! Exercises the C surface the way a foreign caller would: through the
//! exported extern functions, raw pointers and status codes.

use std::ffi::{CStr, CString};
use std::ptr;

use uavsim_ffi::*;

const SMALL_TOML: &str = r#"
seed = 3

[region]
width_m = 100.0
height_m = 100.0

[slots]
per_macro = 3
macro_slots = 2
relocation_deadline_s = 30.0

[users]
count = 8

[uavs]
count = 2
capacity = 3
altitude_range_m = [40.0, 90.0]

[city]
density = 0.15
"#;

fn last_error() -> String {
    let ptr = uavsim_last_error_message();
    assert!(!ptr.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string()
}

#[test]
fn run_through_the_c_surface() {
    let toml = CString::new(SMALL_TOML).unwrap();
    unsafe {
        let scenario = uavsim_scenario_from_toml(toml.as_ptr());
        assert!(!scenario.is_null());
        assert_eq!(uavsim_scenario_set_seed(scenario, 9), UavsimStatus::Ok);
        let name = CString::new("bt").unwrap();
        assert_eq!(
            uavsim_scenario_set_algorithm(scenario, name.as_ptr()),
            UavsimStatus::Ok
        );

        let run = uavsim_run(scenario);
        assert!(!run.is_null(), "{}", last_error());
        assert_eq!(uavsim_run_len(run), 6);

        let mut rec = UavsimMetricsRecord {
            slot: 0,
            unserved_pct: 0.0,
            delay_sd_s: 0.0,
            total_bits: 0.0,
            energy_j: 0.0,
            ee_bits_per_j: 0.0,
            ee_defined: false,
        };
        assert_eq!(uavsim_run_record(run, 5, &mut rec), UavsimStatus::Ok);
        assert_eq!(rec.slot, 5);
        assert!(rec.unserved_pct >= 0.0 && rec.unserved_pct <= 100.0);
        assert!(rec.energy_j > 0.0);
        assert_eq!(uavsim_run_total_energy_j(run), rec.energy_j);
        assert_eq!(
            uavsim_run_record(run, 6, &mut rec),
            UavsimStatus::OutOfRange
        );

        let out = std::env::temp_dir().join("uavsim_ffi_metrics.csv");
        let out_c = CString::new(out.to_str().unwrap()).unwrap();
        assert_eq!(
            uavsim_run_write_metrics_csv(run, out_c.as_ptr()),
            UavsimStatus::Ok
        );
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("slot,algorithm,"));
        assert_eq!(text.lines().count(), 7);
        assert!(text.lines().nth(1).unwrap().contains(",bt,"));
        std::fs::remove_file(&out).ok();

        uavsim_run_free(run);
        uavsim_scenario_free(scenario);
    }
}

#[test]
fn determinism_across_handles() {
    let toml = CString::new(SMALL_TOML).unwrap();
    unsafe {
        let totals: Vec<f64> = (0..2)
            .map(|_| {
                let s = uavsim_scenario_from_toml(toml.as_ptr());
                let r = uavsim_run(s);
                assert!(!r.is_null());
                let mut rec = std::mem::zeroed::<UavsimMetricsRecord>();
                assert_eq!(uavsim_run_record(r, 5, &mut rec), UavsimStatus::Ok);
                uavsim_run_free(r);
                uavsim_scenario_free(s);
                rec.total_bits
            })
            .collect();
        assert_eq!(totals[0].to_bits(), totals[1].to_bits());
    }
}

#[test]
fn null_and_error_paths() {
    unsafe {
        assert!(uavsim_scenario_from_toml(ptr::null()).is_null());
        assert!(last_error().contains("TOML"));

        let bad = CString::new("definitely not toml [").unwrap();
        assert!(uavsim_scenario_from_toml(bad.as_ptr()).is_null());

        let missing = CString::new("/nonexistent/uavsim.toml").unwrap();
        assert!(uavsim_scenario_from_file(missing.as_ptr()).is_null());

        assert_eq!(
            uavsim_scenario_set_seed(ptr::null_mut(), 1),
            UavsimStatus::NullArgument
        );

        let scenario = uavsim_scenario_default();
        let bogus = CString::new("kmeanz").unwrap();
        assert_eq!(
            uavsim_scenario_set_algorithm(scenario, bogus.as_ptr()),
            UavsimStatus::InvalidArgument
        );
        assert!(last_error().contains("kmeanz"));
        uavsim_scenario_free(scenario);

        assert!(uavsim_run(ptr::null()).is_null());
        assert_eq!(uavsim_run_len(ptr::null()), 0);
        uavsim_run_free(ptr::null_mut());
        uavsim_scenario_free(ptr::null_mut());
        uavsim_string_free(ptr::null_mut());
    }
}

#[test]
fn scenario_toml_roundtrip() {
    let toml = CString::new(SMALL_TOML).unwrap();
    unsafe {
        let scenario = uavsim_scenario_from_toml(toml.as_ptr());
        let text = uavsim_scenario_to_toml(scenario);
        assert!(!text.is_null());
        let rendered = CStr::from_ptr(text).to_str().unwrap().to_string();
        assert!(rendered.contains("seed = 3"));
        uavsim_string_free(text);

        let again = CString::new(rendered).unwrap();
        let back = uavsim_scenario_from_toml(again.as_ptr());
        assert!(!back.is_null());
        uavsim_scenario_free(back);
        uavsim_scenario_free(scenario);
    }
}

#[test]
fn pure_math_exports() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(uavsim_path_loss_db(1.0, 69.8, 2.0, &mut v), UavsimStatus::Ok);
        assert_eq!(v, 69.8);
        assert_eq!(
            uavsim_path_loss_db(100.0, 69.8, 2.0, &mut v),
            UavsimStatus::Ok
        );
        assert!((v - 109.8).abs() < 1e-12);
        assert_eq!(
            uavsim_path_loss_db(0.0, 69.8, 2.0, &mut v),
            UavsimStatus::InvalidArgument
        );

        assert_eq!(uavsim_propulsion_power_w(10.0, &mut v), UavsimStatus::Ok);
        assert!((v - 126.484265).abs() < 1e-6);
        assert_eq!(
            uavsim_propulsion_power_w(0.0, &mut v),
            UavsimStatus::InvalidArgument
        );
        assert_eq!(
            uavsim_propulsion_power_w(10.0, ptr::null_mut()),
            UavsimStatus::NullArgument
        );
    }
}
