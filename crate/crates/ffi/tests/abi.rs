use std::ffi::{CStr, CString};
use std::ptr;

use ampenc_ffi::*;

fn last_error() -> String {
    let p = ampenc_last_error_message();
    assert!(!p.is_null(), "an error message is expected");
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn solve(cfg: *const AmpencConfig) -> (AmpencStatus, *mut AmpencReport) {
    let mut report = ptr::null_mut();
    let status = unsafe { ampenc_solve(cfg, &mut report) };
    (status, report)
}

#[test]
fn fixed_point_through_the_abi() {
    let cfg = ampenc_config_new(AmpencSolver::FixedPoint);
    unsafe {
        assert_eq!(ampenc_config_set_steps(cfg, 3), AmpencStatus::Ok);
        let (status, report) = solve(cfg);
        assert_eq!(status, AmpencStatus::Ok);
        assert!(ampenc_last_error_message().is_null());
        assert_eq!(ampenc_report_len(report), 4);
        assert_eq!(ampenc_report_dim(report), 2);
        let (mut re, mut im) = ([0.0; 2], [0.0; 2]);
        assert_eq!(ampenc_report_iterate(report, 3, re.as_mut_ptr(), im.as_mut_ptr(), 2), AmpencStatus::Ok);
        assert!((re[0] - 0.64404296875).abs() < 1e-12 && (re[1] - 0.9921875).abs() < 1e-12);
        assert!(im.iter().all(|v| v.abs() < 1e-12));
        let mut info = AmpencStepInfo::default();
        assert_eq!(ampenc_report_step(report, 1, &mut info), AmpencStatus::Ok);
        assert_eq!(info.gate_count, 154);
        assert!((info.norm - 1.25f64.sqrt()).abs() < 1e-12);
        assert_eq!(ampenc_report_step(report, 9, &mut info), AmpencStatus::OutOfRange);
        assert!(last_error().contains("no step 9"));
        ampenc_report_free(report);
        ampenc_config_free(cfg);
    }
}

#[test]
fn newton_with_bundled_angles() {
    let cfg = ampenc_config_new(AmpencSolver::Newton);
    unsafe {
        let x0 = [2.0, 0.25];
        assert_eq!(ampenc_config_set_x0(cfg, x0.as_ptr(), ptr::null(), 2), AmpencStatus::Ok);
        assert_eq!(ampenc_config_set_steps(cfg, 1), AmpencStatus::Ok);
        assert_eq!(
            ampenc_config_set_inversion(cfg, AmpencInversion::Qsvt, 6.0, 0.1, ptr::null()),
            AmpencStatus::Ok
        );
        let (status, report) = solve(cfg);
        assert_eq!(status, AmpencStatus::Ok);
        let (mut re, mut im) = ([0.0; 2], [0.0; 2]);
        assert_eq!(ampenc_report_iterate(report, 1, re.as_mut_ptr(), im.as_mut_ptr(), 2), AmpencStatus::Ok);
        assert!((re[0] - 3.032).abs() < 0.05 && (re[1] + 0.129).abs() < 0.05);
        ampenc_report_free(report);

        // a mismatched condition bound makes the angle validation fail
        assert_eq!(
            ampenc_config_set_inversion(cfg, AmpencInversion::Qsvt, 12.0, 0.1, ptr::null()),
            AmpencStatus::Ok
        );
        let (status, report) = solve(cfg);
        assert_eq!(status, AmpencStatus::Validation);
        assert!(report.is_null());
        assert!(last_error().contains("deviation"));
        ampenc_config_free(cfg);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let (status, _) = solve(ptr::null());
        assert_eq!(status, AmpencStatus::NullPointer);

        let cfg = ampenc_config_new(AmpencSolver::FixedPoint);
        let name = CString::new("no-such-problem").unwrap();
        assert_eq!(ampenc_config_set_problem(cfg, name.as_ptr()), AmpencStatus::Ok);
        assert_eq!(solve(cfg).0, AmpencStatus::Config);
        assert!(last_error().contains("no-such-problem"));

        let bad = [0xffu8, 0];
        assert_eq!(ampenc_config_set_problem(cfg, bad.as_ptr().cast()), AmpencStatus::InvalidUtf8);
        assert_eq!(ampenc_config_set_monte_carlo(cfg, 10, 0), AmpencStatus::OutOfRange);
        ampenc_config_free(cfg);
        ampenc_config_free(ptr::null_mut());
        ampenc_report_free(ptr::null_mut());
        ampenc_string_free(ptr::null_mut());
    }
}

#[test]
fn config_json_round_trip_and_report_files() {
    let cfg = ampenc_config_new(AmpencSolver::FixedPoint);
    unsafe {
        ampenc_config_set_steps(cfg, 2);
        ampenc_config_set_backend(cfg, AmpencBackend::Algebraic);
        ampenc_config_set_seed(cfg, 17);
        let mut json = ptr::null_mut();
        assert_eq!(ampenc_config_to_json(cfg, &mut json), AmpencStatus::Ok);
        let mut copy = ptr::null_mut();
        assert_eq!(ampenc_config_from_json(json, &mut copy), AmpencStatus::Ok);
        ampenc_string_free(json);

        let (s1, r1) = solve(cfg);
        let (s2, r2) = solve(copy);
        assert_eq!((s1, s2), (AmpencStatus::Ok, AmpencStatus::Ok));
        let (mut j1, mut j2) = (ptr::null_mut(), ptr::null_mut());
        ampenc_report_to_json(r1, &mut j1);
        ampenc_report_to_json(r2, &mut j2);
        assert_eq!(CStr::from_ptr(j1), CStr::from_ptr(j2));
        assert!(CStr::from_ptr(j1).to_str().unwrap().contains("\"seed\": 17"));
        ampenc_string_free(j1);
        ampenc_string_free(j2);

        let dir = tempfile::tempdir().unwrap();
        let d = CString::new(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(ampenc_report_write(r1, d.as_ptr()), AmpencStatus::Ok);
        assert!(dir.path().join("report.json").is_file() && dir.path().join("iterates.csv").is_file());

        let garbage = CString::new("{not json").unwrap();
        let mut none = ptr::null_mut();
        assert_eq!(ampenc_config_from_json(garbage.as_ptr(), &mut none), AmpencStatus::Config);
        for h in [r1, r2] {
            ampenc_report_free(h);
        }
        ampenc_config_free(copy);
        ampenc_config_free(cfg);
    }
}

#[test]
fn verify_subset() {
    let filter = CString::new("amplify").unwrap();
    let mut failed = usize::MAX;
    assert_eq!(unsafe { ampenc_verify(filter.as_ptr(), &mut failed) }, AmpencStatus::Ok);
    assert_eq!(failed, 0);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(ampenc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
