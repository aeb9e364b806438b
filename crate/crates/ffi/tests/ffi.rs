use std::ffi::{CStr, CString};
use std::ptr;

use cgl_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cgl_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

unsafe fn grid_1d(n: usize) -> *mut CglGrid {
    let mut g = ptr::null_mut();
    assert_eq!(cgl_grid_new(1, [1.0].as_ptr(), [n].as_ptr(), &mut g), CglStatus::Ok);
    g
}

unsafe fn field(u1: &[f64], u2: &[f64]) -> *mut CglField {
    let mut f = ptr::null_mut();
    assert_eq!(cgl_field_new(u1.as_ptr(), u2.as_ptr(), u1.len(), &mut f), CglStatus::Ok);
    f
}

unsafe fn read(f: *const CglField) -> (Vec<f64>, Vec<f64>) {
    let n = cgl_field_len(f);
    let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
    assert_eq!(cgl_field_read(f, a.as_mut_ptr(), b.as_mut_ptr(), n), CglStatus::Ok);
    (a, b)
}

const RUN: &str = r#"
[grid]
dim = 1
lengths = [1.0]
n = [16]

[params]
lambda = 1.0
alpha = 1.0
beta = 1.0
kappa = 1.0
q = 3.0
r = 4.0
epsilon = 0.1
mu = 0.1

[scheme]
equation = "ae_eps_mu"
dt = 1e-3
t_end = 0.01

[initial]
kind = "sine_mode"
amplitude = 0.1
"#;

#[test]
fn grid_and_field_handles() {
    unsafe {
        let g = grid_1d(8);
        assert_eq!(cgl_grid_len(g), 8);
        assert_eq!(cgl_grid_len(ptr::null()), 0);

        let u1: Vec<f64> = (0..8).map(|i| (i as f64 * 0.3).sin()).collect();
        let u2: Vec<f64> = (0..8).map(|i| 0.1 * i as f64).collect();
        let f = field(&u1, &u2);
        assert_eq!(cgl_field_len(f), 8);
        assert_eq!(read(f), (u1.clone(), u2.clone()));

        let mut short = vec![0.0; 3];
        let s = cgl_field_read(f, short.as_mut_ptr(), short.as_mut_ptr(), 3);
        assert_eq!(s, CglStatus::GridMismatch);
        assert!(!last_error().is_empty());

        cgl_field_free(f);
        cgl_grid_free(g);
        cgl_grid_free(ptr::null_mut());
        cgl_field_free(ptr::null_mut());
    }
}

#[test]
fn invalid_input_reports_status_and_message() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(
            cgl_grid_new(1, [1.0].as_ptr(), [2usize].as_ptr(), &mut g),
            CglStatus::InvalidGrid
        );
        assert!(g.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(
            cgl_grid_new(1, ptr::null(), [8usize].as_ptr(), &mut g),
            CglStatus::NullPointer
        );
        assert!(last_error().contains("lengths"));

        let mut v = 0.0;
        assert_eq!(cgl_phi(ptr::null(), ptr::null(), &mut v), CglStatus::NullPointer);

        let g = grid_1d(8);
        let f = field(&[1.0; 4], &[0.0; 4]);
        assert_eq!(cgl_phi(g, f, &mut v), CglStatus::GridMismatch);
        assert_eq!(cgl_phi(g, f, ptr::null_mut()), CglStatus::GridMismatch);
        cgl_field_free(f);

        let mut bad = CglParams {
            lambda: 1.0,
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            kappa: 1.0,
            q: 3.0,
            r: 4.0,
            epsilon: 0.1,
            mu: 0.1,
        };
        assert_eq!(cgl_params_validate(&bad, 1), CglStatus::Ok);
        bad.lambda = -1.0;
        assert_eq!(cgl_params_validate(&bad, 1), CglStatus::InvalidParams);
        assert!(!last_error().is_empty());
        cgl_grid_free(g);
    }
}

#[test]
fn operators_match_core() {
    use cgl_core::convex;
    use cgl_core::grid::Grid;

    let cg = Grid::new(1, &[1.0], &[12]).unwrap();
    let u = cg.sample(|x| ((3.0 * x[0]).sin(), x[0] * (1.0 - x[0])));
    let settings = convex::ProxSolveSettings::default();
    unsafe {
        let g = grid_1d(12);
        let f = field(u.u1(), u.u2());

        let mut v = 0.0;
        assert_eq!(cgl_phi(g, f, &mut v), CglStatus::Ok);
        assert_eq!(v, convex::phi(&u, &cg).unwrap());
        assert_eq!(cgl_psi(g, f, 4.0, &mut v), CglStatus::Ok);
        assert_eq!(v, convex::psi_r(&u, 4.0, &cg).unwrap());
        assert_eq!(cgl_moreau_env_psi(g, f, 4.0, 0.5, &mut v), CglStatus::Ok);
        assert_eq!(v, convex::moreau_env_psi(&u, 4.0, 0.5, &cg, &settings).unwrap());

        let mut out = ptr::null_mut();
        let expect = |w: cgl_core::grid::Field| (w.u1().to_vec(), w.u2().to_vec());

        assert_eq!(cgl_grad_phi(g, f, &mut out), CglStatus::Ok);
        assert_eq!(read(out), expect(convex::grad_phi(&u, &cg).unwrap()));
        cgl_field_free(out);

        assert_eq!(cgl_grad_psi(f, 3.0, &mut out), CglStatus::Ok);
        assert_eq!(read(out), expect(convex::grad_psi(&u, 3.0).unwrap()));
        cgl_field_free(out);

        assert_eq!(cgl_resolvent_psi(f, 4.0, 0.5, &mut out), CglStatus::Ok);
        assert_eq!(
            read(out),
            expect(convex::resolvent_psi(&u, 4.0, 0.5, &settings).unwrap())
        );
        cgl_field_free(out);

        assert_eq!(cgl_yosida_psi(f, 4.0, 0.5, &mut out), CglStatus::Ok);
        assert_eq!(read(out), expect(convex::yosida_psi(&u, 4.0, 0.5, &settings).unwrap()));
        cgl_field_free(out);

        assert_eq!(cgl_resolvent_phi_complex(g, f, 0.1, 1.0, 2.0, &mut out), CglStatus::Ok);
        let w = convex::resolvent_phi_complex(&u, 0.1, 1.0, 2.0, &cg, &settings).unwrap();
        assert_eq!(read(out), expect(w));
        cgl_field_free(out);

        assert_eq!(cgl_resolvent_psi(f, 4.0, -1.0, &mut out), CglStatus::InvalidArgument);

        cgl_field_free(f);
        cgl_grid_free(g);
    }
}

#[test]
fn config_run_and_records() {
    let dir = tempfile::tempdir().unwrap();
    let text = CString::new(RUN).unwrap();
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(cgl_config_parse(text.as_ptr(), ptr::null(), &mut c), CglStatus::Ok);

        let mut res = ptr::null_mut();
        assert_eq!(cgl_run(c, &mut res), CglStatus::Ok);
        assert_eq!(cgl_run_record_count(res), 11);
        let mut t = 0.0;
        assert_eq!(cgl_run_blown_up(res, &mut t), 0);
        assert!(t.is_nan());

        let mut rec = [0.0; CGL_RECORD_FIELDS];
        assert_eq!(cgl_run_record(res, 10, rec.as_mut_ptr()), CglStatus::Ok);
        assert!((rec[0] - 0.01).abs() < 1e-15);
        assert!(rec.iter().all(|v| v.is_finite()));
        assert_eq!(cgl_run_record(res, 11, rec.as_mut_ptr()), CglStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));

        let mut f = ptr::null_mut();
        assert_eq!(cgl_run_final_field(res, &mut f), CglStatus::Ok);
        assert_eq!(cgl_field_len(f), 16);
        cgl_field_free(f);

        let csv = dir.path().join("out.csv");
        let p = CString::new(csv.to_str().unwrap()).unwrap();
        assert_eq!(cgl_run_write_csv(res, p.as_ptr()), CglStatus::Ok);
        let body = std::fs::read_to_string(&csv).unwrap();
        assert_eq!(body.lines().count(), 12);
        assert!(body.starts_with("t,l2_sq,"));

        cgl_run_result_free(res);
        cgl_config_free(c);

        let path = dir.path().join("run.toml");
        std::fs::write(&path, RUN).unwrap();
        let p = CString::new(path.to_str().unwrap()).unwrap();
        assert_eq!(cgl_config_load(p.as_ptr(), &mut c), CglStatus::Ok);
        cgl_config_free(c);

        let missing = CString::new(dir.path().join("nope.toml").to_str().unwrap()).unwrap();
        assert_eq!(cgl_config_load(missing.as_ptr(), &mut c), CglStatus::Io);

        let broken = CString::new("[grid]\ndim = \"one\"\n").unwrap();
        assert_eq!(
            cgl_config_parse(broken.as_ptr(), ptr::null(), &mut c),
            CglStatus::Config
        );
        assert!(!last_error().is_empty());
    }
}

#[test]
fn blow_up_is_reported_through_status_query() {
    let text = CString::new(
        r#"
[grid]
dim = 1
lengths = [1.0]
n = [32]

[params]
lambda = 1.0
kappa = 1.0
q = 4.0
r = 6.0

[scheme]
equation = "acgl"
dt = 1e-4
t_end = 1.0

[initial]
kind = "sine_mode"
amplitude = 50.0
"#,
    )
    .unwrap();
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(cgl_config_parse(text.as_ptr(), ptr::null(), &mut c), CglStatus::Ok);
        let mut res = ptr::null_mut();
        assert_eq!(cgl_run(c, &mut res), CglStatus::Ok);
        let mut t = f64::NAN;
        assert_eq!(cgl_run_blown_up(res, &mut t), 1);
        assert!(t > 0.0 && t < 1.0);
        assert_eq!(cgl_run_blown_up(ptr::null(), ptr::null_mut()), 0);
        cgl_run_result_free(res);
        cgl_config_free(c);
    }
}

#[test]
fn check_entry_point() {
    let mut pass = -1;
    assert_eq!(unsafe { cgl_check(20, 3, &mut pass) }, CglStatus::Ok);
    assert_eq!(pass, 1);
    assert_eq!(unsafe { cgl_check(20, 3, ptr::null_mut()) }, CglStatus::NullPointer);
}

#[test]
fn header_declares_the_exported_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cgl_ffi.h")).unwrap();
    for name in [
        "cgl_grid_new",
        "cgl_field_read",
        "cgl_resolvent_phi_complex",
        "cgl_config_parse",
        "cgl_run_blown_up",
        "cgl_check",
        "cgl_last_error_message",
        "CGL_STATUS_NULL_POINTER",
        "CGL_RECORD_FIELDS",
        "typedef struct CglRunResult CglRunResult",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let status = std::process::Command::new("cc")
        .args([
            "-std=c11",
            "-D_DEFAULT_SOURCE",
            "-Wall",
            "-Werror",
            "-fsyntax-only",
            "-I",
        ])
        .arg(format!("{dir}/include"))
        .arg(format!("{dir}/examples/smoke.c"))
        .status();
    match status {
        Ok(s) => assert!(s.success(), "cc rejected the header"),
        Err(e) => eprintln!("skipping: no C compiler ({e})"),
    }
}
