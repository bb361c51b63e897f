mod common;

use std::f64::consts::FRAC_PI_4;

use pdc_core::coupling::solve_coupling;
use pdc_core::kernel_io::{load_kernel, save_kernel, KernelFormat};
use pdc_core::loss::{apply_loss, invert_loss};
use pdc_core::schmidt::{decompose_mehler_eps, decompose_svd, decompose_svd_with_modes};
use pdc_core::sdf::sample_gaussian;
use pdc_core::stats::{bank_from_spectrum, convolve_gf, variational_distance};
use pdc_core::{GaussianParams, Truncation};

#[test]
fn kernel_file_to_reconstructed_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let p = GaussianParams::from_variances(25.0, 1.0, FRAC_PI_4).unwrap();
    let sampled = sample_gaussian(&p, &p.default_grid(240)).unwrap();
    assert!(sampled.truncation.is_none());

    for (name, format) in [("k.csv", KernelFormat::Csv), ("k.json", KernelFormat::Json)] {
        let path = dir.path().join(name);
        save_kernel(&sampled.kernel, &path, format).unwrap();
        let loaded = load_kernel(&path, KernelFormat::from_path(&path), false).unwrap();
        assert_eq!(loaded, sampled.kernel);
    }

    let path = dir.path().join("k.csv");
    let kernel = load_kernel(&path, KernelFormat::Csv, true).unwrap();
    let spectrum = decompose_svd(&kernel, 1e-9).unwrap();
    let closed = decompose_mehler_eps(&p, 1e-9).unwrap();
    assert!((spectrum.schmidt_number() - 2.6).abs() < 1e-6);
    assert!(common::max_abs_diff(spectrum.eigenvalues(), closed.eigenvalues()) < 1e-6);

    let coupling = solve_coupling(&spectrum, 1.5).unwrap();
    let pnd = convolve_gf(
        &bank_from_spectrum(&spectrum, coupling).unwrap(),
        Truncation::Fixed(40),
    )
    .unwrap();
    assert!((pnd.mean() - 1.5).abs() < 1e-6);

    let measured = apply_loss(&pnd, 0.7).unwrap();
    let restored = invert_loss(&measured, 0.7, 40).unwrap();
    assert!(variational_distance(&restored.pnd, &pnd).delta < 1e-6);
}

#[test]
fn modes_reconstruct_the_kernel() {
    let p = GaussianParams::from_variances(9.0, 1.0, 0.5).unwrap();
    let k = sample_gaussian(&p, &p.default_grid(90)).unwrap().kernel;
    let s = decompose_svd_with_modes(&k, 1e-12).unwrap();
    let modes = s.modes().unwrap();
    assert!(modes.orthonormality_error() < 1e-10);
    let mut worst = 0.0f64;
    for i in 0..k.n1() {
        for j in 0..k.n2() {
            let sum: num_complex::Complex64 = s
                .eigenvalues()
                .iter()
                .enumerate()
                .map(|(n, l)| modes.modes1[n][i] * modes.modes2[n][j] * l.sqrt())
                .sum();
            worst = worst.max((sum - k.value(i, j)).norm());
        }
    }
    assert!(worst < 1e-6, "{worst}");
}
