//! Spectral distribution functions: analytic Gaussians and tabulated grids.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result, Warning};

/// Relative boundary density |f|² above which a sampled Gaussian is flagged as truncated.
pub const BOUNDARY_THRESHOLD: f64 = 1e-8;

/// Default half-width of a Gaussian grid, in units of `max(sigma_x, sigma_y)`.
pub const DEFAULT_EXTENT_SIGMAS: f64 = 5.0;

const NORM_TOLERANCE: f64 = 1e-12;
const ANGLE_SLACK: f64 = 1e-9;

/// Rotated two-dimensional Gaussian SDF, parameterized by the spectral widths of
/// signal and idler and the rotation angle with respect to the signal axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    sigma_x: f64,
    sigma_y: f64,
    theta: f64,
}

/// Coefficients of the quadratic form `a x² + 2 b x y + c y²` in the exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticForm {
    pub fn determinant(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }
}

impl GaussianParams {
    /// `theta` must lie in `[0, π/2]`; values within 1e-9 outside are clamped so
    /// that rounded decimal input such as `1.5707963268` is accepted.
    pub fn new(sigma_x: f64, sigma_y: f64, theta: f64) -> Result<Self> {
        if !(sigma_x.is_finite() && sigma_x > 0.0) {
            return Err(Error::invalid(format!(
                "sigma_x must be positive, got {sigma_x}"
            )));
        }
        if !(sigma_y.is_finite() && sigma_y > 0.0) {
            return Err(Error::invalid(format!(
                "sigma_y must be positive, got {sigma_y}"
            )));
        }
        if !theta.is_finite() || !(-ANGLE_SLACK..=FRAC_PI_2 + ANGLE_SLACK).contains(&theta) {
            return Err(Error::invalid(format!(
                "theta must lie in [0, pi/2], got {theta}"
            )));
        }
        Ok(Self {
            sigma_x,
            sigma_y,
            theta: theta.clamp(0.0, FRAC_PI_2),
        })
    }

    /// Same as [`GaussianParams::new`] but taking the squared widths σx², σy².
    pub fn from_variances(sigma_x2: f64, sigma_y2: f64, theta: f64) -> Result<Self> {
        if !(sigma_x2.is_finite() && sigma_x2 > 0.0 && sigma_y2.is_finite() && sigma_y2 > 0.0) {
            return Err(Error::invalid(format!(
                "squared widths must be positive, got {sigma_x2} and {sigma_y2}"
            )));
        }
        Self::new(sigma_x2.sqrt(), sigma_y2.sqrt(), theta)
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.sigma_x, self.sigma_y, theta)
    }

    pub fn coefficients(&self) -> QuadraticForm {
        gaussian_coefficients(self)
    }

    /// Unnormalized SDF value including the `1/√(π σx σy)` prefactor.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let q = self.coefficients();
        let prefactor = 1.0 / (PI * self.sigma_x * self.sigma_y).sqrt();
        prefactor * (-q.a * x * x - 2.0 * q.b * x * y - q.c * y * y).exp()
    }

    /// Symmetric square grid covering ±5·max(σx, σy) on both axes.
    pub fn default_grid(&self, n: usize) -> GridSpec {
        let half = DEFAULT_EXTENT_SIGMAS * self.sigma_x.max(self.sigma_y);
        GridSpec::square(half, n)
    }
}

pub fn gaussian_coefficients(p: &GaussianParams) -> QuadraticForm {
    let (s, c) = p.theta.sin_cos();
    let sin2 = (2.0 * p.theta).sin();
    let vx = p.sigma_x * p.sigma_x;
    let vy = p.sigma_y * p.sigma_y;
    QuadraticForm {
        a: c * c / (2.0 * vx) + s * s / (2.0 * vy),
        b: -sin2 / (4.0 * vx) + sin2 / (4.0 * vy),
        c: s * s / (2.0 * vx) + c * c / (2.0 * vy),
    }
}

/// Rectangular sampling domain `[range1.0, range1.1] × [range2.0, range2.1]`
/// split into `n1 × n2` equal cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub range1: (f64, f64),
    pub range2: (f64, f64),
    pub n1: usize,
    pub n2: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, n: usize) -> Self {
        Self {
            range1: (-half_width, half_width),
            range2: (-half_width, half_width),
            n1: n,
            n2: n,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n1 < 2 || self.n2 < 2 {
            return Err(Error::invalid(format!(
                "grid needs at least 2 points per axis, got {}x{}",
                self.n1, self.n2
            )));
        }
        for (lo, hi) in [self.range1, self.range2] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!("invalid grid range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// Cell midpoints along both axes.
    pub fn midpoints(&self) -> (Vec<f64>, Vec<f64>) {
        let mid = |(lo, hi): (f64, f64), n: usize| {
            let h = (hi - lo) / n as f64;
            uniform_axis(lo + 0.5 * h, hi - 0.5 * h, n)
        };
        (mid(self.range1, self.n1), mid(self.range2, self.n2))
    }
}

/// `n` equally spaced points from `start` to `stop` inclusive.
///
/// This is the only place uniform axes are generated, so an axis written as
/// `start,stop,n` and read back is reproduced bit for bit.
pub fn uniform_axis(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let span = stop - start;
            let last = (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        stop
                    } else {
                        start + span * (i as f64 / last)
                    }
                })
                .collect()
        }
    }
}

/// Discretized complex SDF `f(ω1, ω2)` on a uniform grid, stored row-major
/// with rows indexed by `axis1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralKernel {
    axis1: Vec<f64>,
    axis2: Vec<f64>,
    values: Vec<Complex64>,
    step1: f64,
    step2: f64,
}

fn axis_step(axis: &[f64], name: &str) -> Result<f64> {
    if axis.len() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "{name} needs at least 2 points, got {}",
            axis.len()
        )));
    }
    if axis.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("{name} contains non-finite values")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!("{name} is not strictly increasing")));
    }
    let step = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    let uniform = axis
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs().max(1.0));
    if !uniform {
        return Err(Error::invalid(format!("{name} is not uniformly spaced")));
    }
    Ok(step)
}

impl SpectralKernel {
    pub fn new(axis1: Vec<f64>, axis2: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        let step1 = axis_step(&axis1, "axis1")?;
        let step2 = axis_step(&axis2, "axis2")?;
        if values.len() != axis1.len() * axis2.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {}x{} = {} values, got {}",
                axis1.len(),
                axis2.len(),
                axis1.len() * axis2.len(),
                values.len()
            )));
        }
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::invalid("kernel contains non-finite values"));
        }
        Ok(Self {
            axis1,
            axis2,
            values,
            step1,
            step2,
        })
    }

    /// Builds a kernel by evaluating `f` at every grid point.
    pub fn from_fn(
        axis1: Vec<f64>,
        axis2: Vec<f64>,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Result<Self> {
        let values = axis1
            .iter()
            .flat_map(|&x| axis2.iter().map(move |&y| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(axis1, axis2, values)
    }

    pub fn axis1(&self) -> &[f64] {
        &self.axis1
    }

    pub fn axis2(&self) -> &[f64] {
        &self.axis2
    }

    pub fn n1(&self) -> usize {
        self.axis1.len()
    }

    pub fn n2(&self) -> usize {
        self.axis2.len()
    }

    /// Row-major values, `values()[i * n2 + j] = f(axis1[i], axis2[j])`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.n2() + j]
    }

    pub fn step1(&self) -> f64 {
        self.step1
    }

    pub fn step2(&self) -> f64 {
        self.step2
    }

    /// Quadrature cell area Δω1·Δω2.
    pub fn cell_weight(&self) -> f64 {
        self.step1 * self.step2
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Σ |f_mn|² Δω1 Δω2.
    pub fn weighted_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_weight()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Kernel with the roles of ω1 and ω2 exchanged.
    pub fn transposed(&self) -> Self {
        let (n1, n2) = (self.n1(), self.n2());
        let values = (0..n2)
            .flat_map(|j| (0..n1).map(move |i| (i, j)))
            .map(|(i, j)| self.values[i * n2 + j])
            .collect();
        Self {
            axis1: self.axis2.clone(),
            axis2: self.axis1.clone(),
            values,
            step1: self.step2,
            step2: self.step1,
        }
    }

    /// Largest |f|² on the outermost rows and columns relative to the largest |f|² overall.
    pub fn boundary_ratio(&self) -> f64 {
        let (n1, n2) = (self.n1(), self.n2());
        let max = self.values.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let rows = [0, n1 - 1]
            .into_iter()
            .flat_map(|i| (0..n2).map(move |j| (i, j)));
        let cols = [0, n2 - 1]
            .into_iter()
            .flat_map(|j| (0..n1).map(move |i| (i, j)));
        let edge = rows
            .chain(cols)
            .map(|(i, j)| self.value(i, j).norm_sqr())
            .fold(0.0, f64::max);
        edge / max
    }

    pub fn normalize(&self) -> Result<Self> {
        normalize(self)
    }

    pub fn is_normalized(&self, tolerance: f64) -> bool {
        (self.weighted_norm_sq() - 1.0).abs() <= tolerance
    }
}

/// Rescales the kernel to unit weighted L2 norm.
pub fn normalize(k: &SpectralKernel) -> Result<SpectralKernel> {
    let norm_sq = k.weighted_norm_sq();
    if norm_sq == 0.0 {
        return Err(Error::ZeroKernel);
    }
    let mut out = k.scaled(Complex64::new(1.0 / norm_sq.sqrt(), 0.0));
    // one extra pass absorbs the rounding of the first rescale
    let residual = out.weighted_norm_sq();
    if (residual - 1.0).abs() > NORM_TOLERANCE / 10.0 {
        out = out.scaled(Complex64::new(1.0 / residual.sqrt(), 0.0));
    }
    Ok(out)
}

/// Result of [`sample_gaussian`]: a normalized kernel plus an optional boundary warning.
#[derive(Debug, Clone)]
pub struct Sampled {
    pub kernel: SpectralKernel,
    pub truncation: Option<Warning>,
}

/// Samples the Gaussian SDF at cell midpoints of `grid` and normalizes the result.
pub fn sample_gaussian(p: &GaussianParams, grid: &GridSpec) -> Result<Sampled> {
    grid.validate()?;
    let (axis1, axis2) = grid.midpoints();
    let raw = SpectralKernel::from_fn(axis1, axis2, |x, y| Complex64::new(p.value(x, y), 0.0))?;
    let ratio = raw.boundary_ratio();
    let truncation = (ratio > BOUNDARY_THRESHOLD).then(|| {
        let w = Warning::DomainTruncation { ratio };
        log::warn!("{w}");
        w
    });
    Ok(Sampled {
        kernel: normalize(&raw)?,
        truncation,
    })
}
