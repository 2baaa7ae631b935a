use std::ffi::{c_void, CStr};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use hfpquad_ffi::*;

unsafe extern "C" fn constant_times_theta(x: f64, user: *mut c_void) -> f64 {
    // g(x) = c·y²/sin²(y/2), y = x - t, stored as [c, t]
    let p = &*(user as *const [f64; 2]);
    let y = x - p[1];
    if y == 0.0 {
        return 4.0 * p[0];
    }
    p[0] * (y / (0.5 * y).sin()).powi(2)
}

unsafe extern "C" fn nan_g(_x: f64, _user: *mut c_void) -> f64 {
    f64::NAN
}

unsafe extern "C" fn one_g(_x: f64, _user: *mut c_void) -> f64 {
    1.0
}

unsafe extern "C" fn phi_rhs(x: f64, _user: *mut c_void) -> f64 {
    x.cos()
}

fn last_error() -> String {
    let p = hfp_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn poisson_integrand_matches_closed_form() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(hfp_integrand_new_poisson(3, 1.0, 2.0 * std::f64::consts::PI, 0.5, &mut f), HfpStatus::Ok);
        let mut v = 0.0;
        assert_eq!(hfp_t_hat(f, 0, 40, HfpRulePath::Preferred, &mut v), HfpStatus::Ok);
        let mut exact = 0.0;
        assert_eq!(hfp_exact_supersingular(0.5, 1.0, &mut exact), HfpStatus::Ok);
        assert!((v - exact).abs() < 1e-10);
        let mut g = 0.0;
        assert_eq!(hfp_t_hat(f, 2, 20, HfpRulePath::Generic, &mut g), HfpStatus::Ok);
        assert!(((g - exact).abs() / 4.19e-5 - 1.0).abs() < 0.05);
        hfp_integrand_free(f);
    }
}

#[test]
fn callback_integrand_with_user_data() {
    let data = [2.0f64, 0.9];
    let t = data[1];
    let (a, b) = (t - std::f64::consts::PI, t + std::f64::consts::PI);
    unsafe {
        let mut f = ptr::null_mut();
        let derivs = [8.0, 0.0, 4.0 / 3.0];
        let status = hfp_integrand_new(
            2,
            t,
            a,
            b,
            Some(constant_times_theta),
            &data as *const _ as *mut c_void,
            derivs.as_ptr(),
            derivs.len(),
            &mut f,
        );
        assert_eq!(status, HfpStatus::Ok);
        for s in 0..=2 {
            let mut v = f64::NAN;
            assert_eq!(hfp_t_hat(f, s, 16, HfpRulePath::Compact, &mut v), HfpStatus::Ok);
            assert!(v.abs() < 1e-10, "s={s}: {v}");
        }
        hfp_integrand_free(f);
    }
}

#[test]
fn status_codes_and_messages() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(hfp_zeta(5, &mut v), HfpStatus::Domain);
        assert!(last_error().contains('5'));
        assert_eq!(hfp_zeta(2, &mut v), HfpStatus::Ok);
        assert!(hfp_last_error_message().is_null());
        assert_eq!(hfp_zeta(2, ptr::null_mut()), HfpStatus::NullPointer);
        assert_eq!(hfp_poisson_u(1.0, 0.0, &mut v), HfpStatus::Domain);
        assert_eq!(hfp_dirichlet_kernel_deriv(1, 5, 0.1, 1.0, &mut v), HfpStatus::InvalidArgument);
        assert_eq!(hfp_t_hat(ptr::null(), 0, 8, HfpRulePath::Compact, &mut v), HfpStatus::NullPointer);

        let mut f = ptr::null_mut();
        assert_eq!(
            hfp_integrand_new(3, 0.0, -1.0, 1.0, None, ptr::null_mut(), ptr::null(), 0, &mut f),
            HfpStatus::NullPointer
        );
        assert_eq!(
            hfp_integrand_new(3, 2.0, -1.0, 1.0, Some(nan_g), ptr::null_mut(), ptr::null(), 0, &mut f),
            HfpStatus::InvalidArgument
        );
        assert_eq!(
            hfp_integrand_new(3, 0.0, -1.0, 1.0, Some(nan_g), ptr::null_mut(), ptr::null(), 0, &mut f),
            HfpStatus::Ok
        );
        assert_eq!(hfp_t_hat(f, 3, 8, HfpRulePath::Compact, &mut v), HfpStatus::UnsupportedRule);
        assert_eq!(hfp_t_hat(f, 2, 8, HfpRulePath::Compact, &mut v), HfpStatus::EvaluationFailed);
        hfp_integrand_free(f);
        assert_eq!(
            hfp_integrand_new(3, 0.0, -1.0, 1.0, Some(one_g), ptr::null_mut(), ptr::null(), 0, &mut f),
            HfpStatus::Ok
        );
        assert_eq!(hfp_t_hat(f, 0, 8, HfpRulePath::Compact, &mut v), HfpStatus::MissingDerivatives);
        assert!(last_error().contains('3'));
        hfp_integrand_free(f);

        let name = CStr::from_ptr(hfp_status_name(HfpStatus::SingularSystem));
        assert_eq!(name.to_str().unwrap(), "singular system");
    }
}

#[test]
fn manufactured_solve() {
    unsafe {
        let mut k = ptr::null_mut();
        assert_eq!(hfp_kernel_new_cos_over_sin_cubed(0.0, 2.0 * std::f64::consts::PI, &mut k), HfpStatus::Ok);
        let mut sol = ptr::null_mut();
        assert_eq!(hfp_solve_ie_manufactured(k, 0.3, 1.0, 16, HfpApproach::Simple, &mut sol), HfpStatus::Ok);
        let len = hfp_solution_len(sol);
        assert_eq!(len, 64);
        let grid = std::slice::from_raw_parts(hfp_solution_grid(sol), len);
        let values = std::slice::from_raw_parts(hfp_solution_values(sol), len);
        for (&x, &v) in grid.iter().zip(values) {
            let mut phi = 0.0;
            hfp_poisson_u(0.3, x, &mut phi);
            assert!((v - phi).abs() < 1e-6);
        }
        assert!(hfp_solution_condition(sol) > 1.0);
        hfp_solution_free(sol);

        assert_eq!(
            hfp_solve_ie_manufactured(k, 0.3, 1.0, 7, HfpApproach::Advanced, &mut sol),
            HfpStatus::InvalidArgument
        );
        assert_eq!(hfp_solve_ie(k, None, ptr::null_mut(), 1.0, 4, HfpApproach::Simple, &mut sol), HfpStatus::NullPointer);
        assert_eq!(
            hfp_solve_ie(k, Some(phi_rhs), ptr::null_mut(), 1.0, 4, HfpApproach::Simple, &mut sol),
            HfpStatus::Ok
        );
        assert_eq!(hfp_solution_len(sol), 16);
        hfp_solution_free(sol);
        hfp_kernel_free(k);
        assert_eq!(hfp_solution_len(ptr::null()), 0);
        assert!(hfp_solution_residual(ptr::null()).is_nan());
    }
}

#[test]
fn floor_passthrough() {
    let v = hfp_roundoff_floor(1.0, 0.0, 0.0, 2.0 * std::f64::consts::PI, 100, 2f64.powi(-53));
    assert!((v - 6.760915618107720e-14).abs() < 1e-26);
}

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let lib = target_dir().join("libhfpquad_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping C link check: no C compiler or {} missing", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <math.h>
#include "hfpquad.h"
int main(void) {
    HfpIntegrand *f = NULL;
    double v = 0.0, exact = 0.0;
    if (hfp_integrand_new_poisson(3, 1.0, 6.283185307179586, 0.5, &f) != HFP_STATUS_OK) return 1;
    if (hfp_t_hat(f, 0, 40, HFP_RULE_PATH_PREFERRED, &v) != HFP_STATUS_OK) return 2;
    if (hfp_exact_supersingular(0.5, 1.0, &exact) != HFP_STATUS_OK) return 3;
    hfp_integrand_free(f);
    if (hfp_zeta(7, &v) != HFP_STATUS_DOMAIN || hfp_last_error_message() == NULL) return 4;
    printf("%.3e\n", fabs(v - exact));
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg(format!("-I{}", include.display()))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
}
