//! Schmidt decomposition of an SDF.
//!
//! Two routes are provided. [`decompose_svd`] discretizes the integral operator
//! with kernel `f` and takes a dense SVD of `f_mn·√(Δω1Δω2)`; its squared
//! singular values are the Schmidt eigenvalues. [`decompose_mehler`] uses the
//! closed form available for Gaussian kernels, where the spectrum is geometric,
//! `λ_n = (1 - q) qⁿ` with `q = γ²`.

use std::fmt::Write as _;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sdf::{sample_gaussian, GaussianParams, SpectralKernel};

/// Default cumulative-weight cutoff: modes are kept until Σλ ≥ 1 - 1e-9.
pub const DEFAULT_EPS_LAMBDA: f64 = 1e-9;

/// Largest deviation of the weighted norm from 1 accepted by [`decompose_svd`].
pub const NORM_CHECK_TOLERANCE: f64 = 1e-6;

/// Successive Schmidt numbers closer than this count as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;

/// Discretized Schmidt mode functions, orthonormal under the weighted inner
/// product `⟨u, v⟩ = Σ conj(u_i) v_i Δω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtModes {
    pub step1: f64,
    pub step2: f64,
    /// `modes1[n][i] = ξ⁽¹⁾_n(axis1[i])`
    pub modes1: Vec<Vec<Complex64>>,
    /// `modes2[n][j] = ξ⁽²⁾_n(axis2[j])`
    pub modes2: Vec<Vec<Complex64>>,
}

impl SchmidtModes {
    fn inner(a: &[Complex64], b: &[Complex64], step: f64) -> Complex64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.conj() * y)
            .sum::<Complex64>()
            * step
    }

    /// Largest deviation of the Gram matrices of both mode sets from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let gram_err = |modes: &[Vec<Complex64>], step: f64| {
            let mut worst = 0.0f64;
            for (i, a) in modes.iter().enumerate() {
                for (j, b) in modes.iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((Self::inner(a, b, step) - target).norm());
                }
            }
            worst
        };
        gram_err(&self.modes1, self.step1).max(gram_err(&self.modes2, self.step2))
    }
}

/// Ordered Schmidt eigenvalues `λ_0 ≥ λ_1 ≥ … ≥ 0` with the discarded weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    eigenvalues: Vec<f64>,
    truncation_residual: f64,
    modes: Option<SchmidtModes>,
}

impl SchmidtSpectrum {
    /// Spectrum from explicit eigenvalues. They are sorted descending; the
    /// residual is `1 - Σλ`, and a total above `1 + 1e-9` is rejected.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::invalid("spectrum needs at least one eigenvalue"));
        }
        if eigenvalues.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::invalid(
                "eigenvalues must be finite and non-negative",
            ));
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = eigenvalues.iter().sum();
        if total > 1.0 + 1e-9 || total == 0.0 {
            return Err(Error::invalid(format!(
                "eigenvalues sum to {total}, expected at most 1"
            )));
        }
        Ok(Self {
            eigenvalues,
            truncation_residual: (1.0 - total).max(0.0),
            modes: None,
        })
    }

    /// The spectrum of a separable kernel.
    pub fn single_mode() -> Self {
        Self {
            eigenvalues: vec![1.0],
            truncation_residual: 0.0,
            modes: None,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn truncation_residual(&self) -> f64 {
        self.truncation_residual
    }

    pub fn modes(&self) -> Option<&SchmidtModes> {
        self.modes.as_ref()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn schmidt_number(&self) -> f64 {
        schmidt_number(self)
    }

    pub fn to_json(&self) -> SpectrumJson<'_> {
        SpectrumJson {
            lambda: &self.eigenvalues,
            k: self.schmidt_number(),
            residual: self.truncation_residual,
        }
    }
}

/// Serialized form `{ "lambda": [...], "K": ..., "residual": ... }`.
#[derive(Debug, Serialize)]
pub struct SpectrumJson<'a> {
    pub lambda: &'a [f64],
    #[serde(rename = "K")]
    pub k: f64,
    pub residual: f64,
}

/// K = 1 / Σλ².
pub fn schmidt_number(s: &SchmidtSpectrum) -> f64 {
    1.0 / s.eigenvalues.iter().map(|l| l * l).sum::<f64>()
}

/// Number of leading eigenvalues needed so that their sum reaches `1 - eps`.
fn cutoff(eigenvalues: &[f64], eps_lambda: f64) -> usize {
    let mut acc = 0.0;
    for (n, l) in eigenvalues.iter().enumerate() {
        acc += l;
        if acc >= 1.0 - eps_lambda {
            return n + 1;
        }
    }
    eigenvalues.len()
}

fn check_eps(eps_lambda: f64) -> Result<()> {
    if eps_lambda > 0.0 && eps_lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "eps_lambda must lie in (0, 1), got {eps_lambda}"
        )))
    }
}

fn check_normalized(k: &SpectralKernel) -> Result<()> {
    let norm_sq = k.weighted_norm_sq();
    if (norm_sq - 1.0).abs() > NORM_CHECK_TOLERANCE {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(())
}

/// `f_mn·√(Δω1Δω2)`, kept real when the kernel is real.
enum Weighted {
    Real(Mat<f64>),
    Complex(Mat<Complex64>),
}

fn weighted_matrix(k: &SpectralKernel) -> Weighted {
    let w = k.cell_weight().sqrt();
    let n2 = k.n2();
    let vals = k.values();
    if k.is_real() {
        Weighted::Real(Mat::from_fn(k.n1(), n2, |i, j| vals[i * n2 + j].re * w))
    } else {
        Weighted::Complex(Mat::from_fn(k.n1(), n2, |i, j| vals[i * n2 + j] * w))
    }
}

fn svd_failure(e: faer::linalg::svd::SvdError) -> Error {
    Error::Numerical(format!("SVD did not converge: {e:?}"))
}

fn spectrum_from_singular_values(sv: &[f64], eps_lambda: f64) -> (Vec<f64>, f64) {
    let all: Vec<f64> = sv.iter().map(|s| s * s).collect();
    let kept = cutoff(&all, eps_lambda);
    let eigenvalues = all[..kept].to_vec();
    let residual = (1.0 - eigenvalues.iter().sum::<f64>()).max(0.0);
    (eigenvalues, residual)
}

/// Schmidt eigenvalues of a normalized kernel by dense SVD. Mode functions
/// are not computed; see [`decompose_svd_with_modes`].
pub fn decompose_svd(k: &SpectralKernel, eps_lambda: f64) -> Result<SchmidtSpectrum> {
    check_eps(eps_lambda)?;
    check_normalized(k)?;
    let sv = match weighted_matrix(k) {
        Weighted::Real(m) => m.singular_values().map_err(svd_failure)?,
        Weighted::Complex(m) => m.singular_values().map_err(svd_failure)?,
    };
    let (eigenvalues, truncation_residual) = spectrum_from_singular_values(&sv, eps_lambda);
    Ok(SchmidtSpectrum {
        eigenvalues,
        truncation_residual,
        modes: None,
    })
}

/// Like [`decompose_svd`] but also returns the retained Schmidt modes,
/// scaled to be orthonormal under the quadrature weights.
pub fn decompose_svd_with_modes(k: &SpectralKernel, eps_lambda: f64) -> Result<SchmidtSpectrum> {
    check_eps(eps_lambda)?;
    check_normalized(k)?;
    let (n1, n2) = (k.n1(), k.n2());
    let (sv, u, v): (Vec<f64>, Mat<Complex64>, Mat<Complex64>) = match weighted_matrix(k) {
        Weighted::Real(m) => {
            let svd = m.thin_svd().map_err(svd_failure)?;
            let s = svd.S().column_vector();
            let r = s.nrows();
            (
                (0..r).map(|i| s[i]).collect(),
                Mat::from_fn(n1, r, |i, j| Complex64::new(svd.U()[(i, j)], 0.0)),
                Mat::from_fn(n2, r, |i, j| Complex64::new(svd.V()[(i, j)], 0.0)),
            )
        }
        Weighted::Complex(m) => {
            let svd = m.thin_svd().map_err(svd_failure)?;
            let s = svd.S().column_vector();
            let r = s.nrows();
            (
                (0..r).map(|i| s[i].re).collect(),
                svd.U().to_owned(),
                svd.V().to_owned(),
            )
        }
    };
    let (eigenvalues, truncation_residual) = spectrum_from_singular_values(&sv, eps_lambda);
    let (s1, s2) = (k.step1().sqrt(), k.step2().sqrt());
    let kept = eigenvalues.len();
    let modes = SchmidtModes {
        step1: k.step1(),
        step2: k.step2(),
        modes1: (0..kept)
            .map(|n| (0..n1).map(|i| u[(i, n)] / s1).collect())
            .collect(),
        modes2: (0..kept)
            .map(|n| (0..n2).map(|j| v[(j, n)].conj() / s2).collect())
            .collect(),
    };
    Ok(SchmidtSpectrum {
        eigenvalues,
        truncation_residual,
        modes: Some(modes),
    })
}

/// Mehler contraction parameter γ of a Gaussian SDF, or `None` when b = 0
/// (separable kernel).
///
/// Of the two roots of the underlying quadratic the one with |γ| < 1 is
/// returned, written in the cancellation-free form `-b / (√(ac) + √(ac - b²))`.
pub fn mehler_gamma(p: &GaussianParams) -> Result<Option<f64>> {
    let q = p.coefficients();
    if q.b == 0.0 {
        return Ok(None);
    }
    let det = q.determinant();
    if det.is_nan() || det <= 0.0 {
        return Err(Error::GammaOutOfRange { gamma: 1.0 });
    }
    let gamma = -q.b / ((q.a * q.c).sqrt() + det.sqrt());
    if gamma.is_nan() || gamma.abs() >= 1.0 {
        return Err(Error::GammaOutOfRange { gamma: gamma.abs() });
    }
    Ok(Some(gamma))
}

/// Analytic Schmidt spectrum of a Gaussian SDF, `λ_n = (1 - γ²) γ²ⁿ` for
/// `n ≤ n_max`, the remaining geometric tail `γ^(2(n_max+1))` is reported as
/// the truncation residual.
pub fn decompose_mehler(p: &GaussianParams, n_max: usize) -> Result<SchmidtSpectrum> {
    let Some(gamma) = mehler_gamma(p)? else {
        return Ok(SchmidtSpectrum::single_mode());
    };
    let q = gamma * gamma;
    let eigenvalues: Vec<f64> = (0..=n_max).map(|n| (1.0 - q) * q.powi(n as i32)).collect();
    Ok(SchmidtSpectrum {
        eigenvalues,
        truncation_residual: q.powi(n_max as i32 + 1),
        modes: None,
    })
}

/// [`decompose_mehler`] with the same cumulative cutoff rule as [`decompose_svd`].
pub fn decompose_mehler_eps(p: &GaussianParams, eps_lambda: f64) -> Result<SchmidtSpectrum> {
    check_eps(eps_lambda)?;
    let Some(gamma) = mehler_gamma(p)? else {
        return Ok(SchmidtSpectrum::single_mode());
    };
    let q = gamma * gamma;
    // smallest n with q^(n+1) <= eps
    let n_max = if q <= eps_lambda {
        0
    } else {
        (eps_lambda.ln() / q.ln()).ceil() as usize - 1
    };
    let mut n = n_max;
    while n > 0 && q.powi(n as i32) <= eps_lambda {
        n -= 1;
    }
    while q.powi(n as i32 + 1) > eps_lambda {
        n += 1;
    }
    decompose_mehler(p, n)
}

/// Samples the Gaussian on its default `n × n` grid and decomposes by SVD.
pub fn decompose_gaussian_svd(
    p: &GaussianParams,
    n: usize,
    eps_lambda: f64,
) -> Result<SchmidtSpectrum> {
    let sampled = sample_gaussian(p, &p.default_grid(n))?;
    decompose_svd(&sampled.kernel, eps_lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub grid: usize,
    /// λ_0 … λ_9, shorter if fewer modes were kept.
    pub leading: Vec<f64>,
    #[serde(rename = "K")]
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Last two Schmidt numbers differ by less than [`CONVERGENCE_TOLERANCE`].
    pub converged: bool,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("grid,K");
        for n in 0..10 {
            let _ = write!(out, ",lambda_{n}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{},{:.16e}", row.grid, row.k);
            for n in 0..10 {
                let _ = write!(out, ",{:.16e}", row.leading.get(n).copied().unwrap_or(0.0));
            }
            out.push('\n');
        }
        out
    }
}

/// Decomposes the Gaussian at each grid size (default extent) and tabulates
/// the leading eigenvalues and K.
pub fn convergence_study(
    p: &GaussianParams,
    grid_sizes: &[usize],
    eps_lambda: f64,
) -> Result<ConvergenceReport> {
    if grid_sizes.is_empty() {
        return Err(Error::invalid(
            "convergence study needs at least one grid size",
        ));
    }
    if grid_sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid sizes must be strictly increasing"));
    }
    let rows = grid_sizes
        .iter()
        .map(|&grid| {
            let s = decompose_gaussian_svd(p, grid, eps_lambda)?;
            Ok(ConvergenceRow {
                grid,
                leading: s.eigenvalues.iter().take(10).copied().collect(),
                k: s.schmidt_number(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let converged = match rows.as_slice() {
        [.., a, b] => (a.k - b.k).abs() < CONVERGENCE_TOLERANCE,
        _ => false,
    };
    Ok(ConvergenceReport { rows, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdf::sample_gaussian;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn working_point() -> GaussianParams {
        GaussianParams::from_variances(25.0, 1.0, FRAC_PI_4).unwrap()
    }

    #[test]
    fn schmidt_number_of_simple_spectra() {
        assert_eq!(SchmidtSpectrum::single_mode().schmidt_number(), 1.0);
        let s = SchmidtSpectrum::from_eigenvalues(vec![0.5, 0.5]).unwrap();
        assert_eq!(s.schmidt_number(), 2.0);
    }

    #[test]
    fn from_eigenvalues_sorts_and_validates() {
        let s = SchmidtSpectrum::from_eigenvalues(vec![0.2, 0.7]).unwrap();
        assert_eq!(s.eigenvalues(), &[0.7, 0.2]);
        assert!((s.truncation_residual() - 0.1).abs() < 1e-15);
        assert!(SchmidtSpectrum::from_eigenvalues(vec![0.8, 0.8]).is_err());
        assert!(SchmidtSpectrum::from_eigenvalues(vec![-0.1]).is_err());
        assert!(SchmidtSpectrum::from_eigenvalues(vec![]).is_err());
    }

    #[test]
    fn separable_kernel_has_one_mode() {
        let p = GaussianParams::from_variances(25.0, 1.0, 0.0).unwrap();
        let s = decompose_gaussian_svd(&p, 120, DEFAULT_EPS_LAMBDA).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.schmidt_number() - 1.0).abs() < 1e-12);
        assert_eq!(
            decompose_mehler(&p, 10).unwrap(),
            SchmidtSpectrum::single_mode()
        );
    }

    #[test]
    fn equal_widths_are_separable_for_any_angle() {
        let p = GaussianParams::new(1.5, 1.5, 0.9).unwrap();
        assert!(mehler_gamma(&p).unwrap().is_none());
        assert_eq!(decompose_mehler(&p, 5).unwrap().eigenvalues(), &[1.0]);
    }

    #[test]
    fn working_point_mehler_matches_closed_form() {
        // a = c = 0.26, b = 0.24: γ = -2/3, q = 4/9, K = (1 + q)/(1 - q) = 2.6
        let g = mehler_gamma(&working_point()).unwrap().unwrap();
        assert!((g + 2.0 / 3.0).abs() < 1e-14, "gamma = {g}");
        let s = decompose_mehler_eps(&working_point(), 1e-12).unwrap();
        assert!((s.schmidt_number() - 2.6).abs() < 1e-10);
        let total: f64 = s.eigenvalues().iter().sum::<f64>() + s.truncation_residual();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(s.truncation_residual() <= 1e-12);
    }

    #[test]
    fn mehler_eps_cutoff_is_minimal() {
        let p = working_point();
        let eps = 1e-9;
        let s = decompose_mehler_eps(&p, eps).unwrap();
        assert!(s.truncation_residual() <= eps);
        let q = 4.0 / 9.0f64;
        assert!(q.powi(s.len() as i32 - 1) > eps);
    }

    #[test]
    fn svd_spectrum_is_geometric_at_working_point() {
        let s = decompose_gaussian_svd(&working_point(), 300, DEFAULT_EPS_LAMBDA).unwrap();
        // linear regression of ln λ_n on n
        let pts: Vec<(f64, f64)> = s
            .eigenvalues()
            .iter()
            .enumerate()
            .filter(|(_, l)| **l > 1e-10)
            .map(|(n, l)| (n as f64, l.ln()))
            .collect();
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = pts.iter().map(|(_, y)| (y - my).powi(2)).sum();
        let r2 = sxy * sxy / (sxx * syy);
        assert!(r2 > 1.0 - 1e-6, "R^2 = {r2}");
        let q = (sxy / sxx).exp();
        assert!(q > 0.0 && q < 1.0);
        let total: f64 = s.eigenvalues().iter().sum::<f64>() + s.truncation_residual();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn svd_rejects_unnormalized_kernel() {
        let p = working_point();
        let k = sample_gaussian(&p, &p.default_grid(40)).unwrap().kernel;
        let k = k.scaled(Complex64::new(2.0, 0.0));
        assert!(matches!(
            decompose_svd(&k, 1e-9),
            Err(Error::NotNormalized { .. })
        ));
        assert!(decompose_svd(&k.normalize().unwrap(), 0.0).is_err());
    }

    #[test]
    fn modes_are_orthonormal_and_reconstruct_kernel() {
        let p = GaussianParams::from_variances(9.0, 1.0, 0.6).unwrap();
        let k = sample_gaussian(&p, &p.default_grid(80)).unwrap().kernel;
        let k = k
            .scaled(Complex64::from_polar(1.0, 0.4))
            .normalize()
            .unwrap();
        let s = decompose_svd_with_modes(&k, 1e-14).unwrap();
        let modes = s.modes().unwrap();
        assert!(modes.orthonormality_error() < 1e-8);
        let mut worst = 0.0f64;
        for i in 0..k.n1() {
            for j in 0..k.n2() {
                let approx: Complex64 = s
                    .eigenvalues()
                    .iter()
                    .enumerate()
                    .map(|(n, l)| modes.modes1[n][i] * modes.modes2[n][j] * l.sqrt())
                    .sum();
                worst = worst.max((approx - k.value(i, j)).norm());
            }
        }
        assert!(worst < 1e-6, "reconstruction error {worst}");
    }

    #[test]
    fn exchange_symmetric_kernel_has_matching_mode_pairs() {
        let axis = crate::sdf::uniform_axis(-6.0, 6.0, 90);
        let k = SpectralKernel::from_fn(axis.clone(), axis, |x, y| {
            Complex64::new((-0.3 * x * x - 0.4 * x * y - 0.3 * y * y).exp(), 0.0)
        })
        .unwrap()
        .normalize()
        .unwrap();
        let s = decompose_svd_with_modes(&k, 1e-10).unwrap();
        let modes = s.modes().unwrap();
        for n in 0..s.len().min(4) {
            // equal up to a per-mode phase: |⟨ξ1, conj ξ2⟩| = 1
            let overlap: Complex64 = modes.modes1[n]
                .iter()
                .zip(&modes.modes2[n])
                .map(|(a, b)| a.conj() * b.conj())
                .sum::<Complex64>()
                * modes.step1;
            assert!((overlap.norm() - 1.0).abs() < 1e-8, "mode {n}: {overlap}");
        }
    }

    #[test]
    fn rotation_endpoints_are_separable() {
        for theta in [0.0, FRAC_PI_2] {
            let p = GaussianParams::from_variances(25.0, 1.0, theta).unwrap();
            let s = decompose_gaussian_svd(&p, 150, DEFAULT_EPS_LAMBDA).unwrap();
            assert!((s.schmidt_number() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn convergence_study_shapes() {
        let sep = GaussianParams::from_variances(4.0, 1.0, 0.0).unwrap();
        let r = convergence_study(&sep, &[40, 60, 80], DEFAULT_EPS_LAMBDA).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows.iter().all(|row| (row.k - 1.0).abs() < 1e-12));
        assert!(r.converged);
        assert_eq!(r.to_csv().lines().count(), 4);
        assert!(convergence_study(&sep, &[80, 40], 1e-9).is_err());
        assert!(convergence_study(&sep, &[], 1e-9).is_err());
    }
}
