use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use pdc_ffi::*;

fn last_error() -> String {
    let p = pdc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn spectrum_and_statistics_round_trip() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(
            pdc_spectrum_gaussian_mehler(25.0, 1.0, std::f64::consts::FRAC_PI_4, 1e-9, &mut s),
            PdcStatus::Ok
        );
        assert!((pdc_spectrum_schmidt_number(s) - 2.6).abs() < 1e-9);
        let n = pdc_spectrum_len(s);
        let mut buf = vec![0.0; n];
        assert_eq!(
            pdc_spectrum_eigenvalues(s, buf.as_mut_ptr(), n),
            PdcStatus::Ok
        );
        assert!((buf[0] - 5.0 / 9.0).abs() < 1e-12);
        assert_eq!(
            pdc_spectrum_eigenvalues(s, buf.as_mut_ptr(), n - 1),
            PdcStatus::BufferTooSmall
        );
        assert!(pdc_spectrum_residual(s) <= 1e-9);

        let mut svd = ptr::null_mut();
        assert_eq!(
            pdc_spectrum_gaussian_svd(25.0, 1.0, std::f64::consts::FRAC_PI_4, 300, 1e-9, &mut svd),
            PdcStatus::Ok
        );
        assert!((pdc_spectrum_schmidt_number(svd) - 2.6).abs() < 1e-6);
        pdc_spectrum_free(svd);

        let mut c = 0.0;
        assert_eq!(pdc_solve_coupling(s, 1.0, &mut c), PdcStatus::Ok);
        let mut p = ptr::null_mut();
        assert_eq!(pdc_pnd_from_spectrum(s, c, 1e-12, &mut p), PdcStatus::Ok);
        assert!((pdc_pnd_mean(p) - 1.0).abs() < 1e-9);
        let mut fixed = ptr::null_mut();
        assert_eq!(
            pdc_pnd_from_spectrum_nmax(s, c, 10, &mut fixed),
            PdcStatus::Ok
        );
        assert_eq!(pdc_pnd_len(fixed), 11);

        let mut lossy = ptr::null_mut();
        assert_eq!(pdc_pnd_apply_loss(fixed, 0.6, &mut lossy), PdcStatus::Ok);
        let mut back = ptr::null_mut();
        let mut residual = f64::NAN;
        assert_eq!(
            pdc_pnd_invert_loss(lossy, 0.6, 10, &mut back, &mut residual),
            PdcStatus::Ok
        );
        assert!(residual < 1e-12);
        let mut delta = f64::NAN;
        assert_eq!(
            pdc_variational_distance(back, fixed, &mut delta),
            PdcStatus::Ok
        );
        assert!(delta < 1e-8);

        let mut joint = ptr::null_mut();
        assert_eq!(pdc_pnd_joint(fixed, &mut joint), PdcStatus::Ok);
        assert_eq!(pdc_pnd_len(joint), 21);
        let mut probs = vec![0.0; 21];
        assert_eq!(pdc_pnd_probs(joint, probs.as_mut_ptr(), 21), PdcStatus::Ok);
        assert_eq!(probs[1], 0.0);

        for h in [p, fixed, lossy, back, joint] {
            pdc_pnd_free(h);
        }
        pdc_spectrum_free(s);
    }
}

#[test]
fn references_and_explicit_inputs() {
    unsafe {
        let mut t = ptr::null_mut();
        let mut q = ptr::null_mut();
        assert_eq!(pdc_reference_thermal(1.0, 40, &mut t), PdcStatus::Ok);
        assert_eq!(pdc_reference_poisson(1.0, 40, &mut q), PdcStatus::Ok);
        let mut d = 0.0;
        assert_eq!(pdc_variational_distance(t, q, &mut d), PdcStatus::Ok);
        assert!(d > 0.1);

        let w = [0.5, 0.3, 0.2];
        let mut s = ptr::null_mut();
        assert_eq!(
            pdc_spectrum_from_eigenvalues(w.as_ptr(), 3, &mut s),
            PdcStatus::Ok
        );
        assert!((pdc_spectrum_schmidt_number(s) - 1.0 / 0.38).abs() < 1e-12);

        let probs = [0.25, 0.75];
        let mut p = ptr::null_mut();
        assert_eq!(
            pdc_pnd_from_probs(probs.as_ptr(), 2, 0.0, &mut p),
            PdcStatus::Ok
        );
        assert_eq!(pdc_pnd_mean(p), 0.75);
        pdc_pnd_free(p);
        pdc_pnd_free(t);
        pdc_pnd_free(q);
        pdc_spectrum_free(s);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(
            pdc_spectrum_gaussian_mehler(-1.0, 1.0, 0.0, 1e-9, &mut s),
            PdcStatus::InvalidArgument
        );
        assert!(s.is_null());
        assert!(!last_error().is_empty());

        let bad = [0.9, 0.9];
        assert_eq!(
            pdc_spectrum_from_eigenvalues(bad.as_ptr(), 2, &mut s),
            PdcStatus::InvalidArgument
        );
        assert_eq!(
            pdc_spectrum_from_eigenvalues(ptr::null(), 2, &mut s),
            PdcStatus::NullPointer
        );
        assert_eq!(
            pdc_spectrum_gaussian_mehler(25.0, 1.0, 0.3, 1e-9, ptr::null_mut()),
            PdcStatus::NullPointer
        );

        let path = CString::new("/does/not/exist.csv").unwrap();
        assert_eq!(
            pdc_spectrum_from_kernel_file(path.as_ptr(), true, 1e-9, &mut s),
            PdcStatus::Io
        );
        assert!(last_error().contains("exist.csv"));

        let mut c = 0.0;
        assert_eq!(
            pdc_solve_coupling(ptr::null(), 1.0, &mut c),
            PdcStatus::NullPointer
        );
        assert!(pdc_spectrum_schmidt_number(ptr::null()).is_nan());
        assert_eq!(pdc_pnd_len(ptr::null()), 0);
        pdc_pnd_free(ptr::null_mut());
        pdc_spectrum_free(ptr::null_mut());

        let probs = [1.0];
        let mut p = ptr::null_mut();
        assert_eq!(
            pdc_pnd_from_probs(probs.as_ptr(), 1, 0.0, &mut p),
            PdcStatus::Ok
        );
        let mut out = ptr::null_mut();
        assert_eq!(
            pdc_pnd_apply_loss(p, 1.5, &mut out),
            PdcStatus::EfficiencyOutOfRange
        );
        assert_eq!(
            pdc_pnd_invert_loss(p, 0.5, 0, &mut out, ptr::null_mut()),
            PdcStatus::Ok
        );
        pdc_pnd_free(out);
        pdc_pnd_free(p);
    }
}

#[test]
fn kernel_file_through_the_c_interface() {
    let dir = std::env::temp_dir().join(format!("pdc-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("k.csv");
    std::fs::write(&path, "# axis1: 0,1,2\n# axis2: 0,1,2\n3,0\n0,4\n").unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(
            pdc_spectrum_from_kernel_file(c.as_ptr(), true, 1e-12, &mut s),
            PdcStatus::Ok
        );
        let mut buf = [0.0; 2];
        assert_eq!(
            pdc_spectrum_eigenvalues(s, buf.as_mut_ptr(), 2),
            PdcStatus::Ok
        );
        assert!((buf[0] - 0.64).abs() < 1e-12 && (buf[1] - 0.36).abs() < 1e-12);
        pdc_spectrum_free(s);
        assert_eq!(
            pdc_spectrum_from_kernel_file(c.as_ptr(), false, 1e-12, &mut s),
            PdcStatus::NotNormalized
        );
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(pdc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// Compiles `tests/smoke.c` against the generated header and the static library.
#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler found; skipping");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libpdc_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let exe = profile_dir.join(format!("pdc-smoke-{}", std::process::id()));
    let status = Command::new(&cc)
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("2.600000000"));
}
