//! Photon-number distributions of a bank of independent two-mode squeezers.
//!
//! Each squeezer with strength `r` has a thermal marginal
//! `p(n) = sech²r · tanh²ⁿr`. The distribution of the whole bank is the
//! convolution of the marginals, computed either directly ([`convolve_direct`])
//! or as the coefficients of the product of generating functions
//! `g(ζ) = sech²r / (1 - ζ tanh²r)` ([`convolve_gf`]).

use std::fmt::Write as _;

use serde::Serialize;

use crate::coupling::solve_coupling;
use crate::error::{Error, Result};
use crate::output::sci;
use crate::schmidt::{decompose_gaussian_svd, decompose_mehler_eps, SchmidtSpectrum};
use crate::sdf::GaussianParams;

/// Default bound on the probability mass beyond the truncation point.
pub const DEFAULT_TAIL: f64 = 1e-10;

/// Hard cap on adaptive truncation lengths.
pub const MAX_NMAX: usize = 1 << 22;

/// Squeezing strengths `r_k = C·√λ_k` of independent two-mode squeezers.
///
/// Phases are carried along but never enter a photon-number distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezerBank {
    strengths: Vec<f64>,
    phases: Vec<f64>,
}

impl SqueezerBank {
    pub fn new(strengths: Vec<f64>) -> Result<Self> {
        if strengths.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::invalid(
                "squeezing strengths must be finite and non-negative",
            ));
        }
        let phases = vec![0.0; strengths.len()];
        Ok(Self { strengths, phases })
    }

    pub fn with_phases(strengths: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != strengths.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} strengths but {} phases",
                strengths.len(),
                phases.len()
            )));
        }
        let mut bank = Self::new(strengths)?;
        bank.phases = phases;
        Ok(bank)
    }

    /// `n` identical squeezers of strength `r`.
    pub fn uniform(n: usize, r: f64) -> Result<Self> {
        Self::new(vec![r; n])
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.strengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strengths.is_empty()
    }

    pub fn mean_photon_number(&self) -> f64 {
        mean_photon_number(self)
    }
}

pub fn bank_from_spectrum(s: &SchmidtSpectrum, coupling: f64) -> Result<SqueezerBank> {
    if !(coupling.is_finite() && coupling >= 0.0) {
        return Err(Error::invalid(format!(
            "coupling must be non-negative, got {coupling}"
        )));
    }
    SqueezerBank::new(
        s.eigenvalues()
            .iter()
            .map(|l| coupling * l.sqrt())
            .collect(),
    )
}

/// n̄ = Σ sinh²(r_k).
pub fn mean_photon_number(bank: &SqueezerBank) -> f64 {
    bank.strengths.iter().map(|r| r.sinh().powi(2)).sum()
}

/// Where to cut a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Keep `p(0..=n_max)`.
    Fixed(usize),
    /// Smallest `n_max` whose discarded mass is at most the given bound.
    Tail(f64),
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Tail(DEFAULT_TAIL)
    }
}

impl Truncation {
    fn validate(self) -> Result<Self> {
        match self {
            Truncation::Fixed(n) if n > MAX_NMAX => Err(Error::invalid(format!(
                "n_max {n} exceeds the limit {MAX_NMAX}"
            ))),
            Truncation::Tail(t) if !(1e-15..1.0).contains(&t) => Err(Error::invalid(format!(
                "tail bound must lie in [1e-15, 1), got {t}"
            ))),
            _ => Ok(self),
        }
    }
}

/// Truncated photon-number distribution `p(0..=n_max)` with a bound on the
/// mass beyond `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pnd {
    probs: Vec<f64>,
    tail: f64,
}

#[derive(Debug, Serialize)]
struct PndJson<'a> {
    p: &'a [f64],
    tail: f64,
    mean: f64,
}

impl Pnd {
    pub fn new(probs: Vec<f64>, tail: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("distribution needs at least p(0)"));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::invalid(
                "probabilities must be finite and non-negative",
            ));
        }
        if !(tail.is_finite() && tail >= 0.0) {
            return Err(Error::invalid(format!(
                "tail bound must be non-negative, got {tail}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + 1e-9 {
            return Err(Error::invalid(format!("probabilities sum to {total} > 1")));
        }
        Ok(Self { probs, tail })
    }

    /// `p = [1]`.
    pub fn vacuum() -> Self {
        Self {
            probs: vec![1.0],
            tail: 0.0,
        }
    }

    pub(crate) fn from_parts(probs: Vec<f64>, tail: f64) -> Self {
        debug_assert!(probs.iter().all(|p| *p >= 0.0));
        Self { probs, tail }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Σ p(n) over the stored entries.
    pub fn total(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }

    /// Σ n·p(n) over the stored entries.
    pub fn mean(&self) -> f64 {
        compensated_sum(self.probs.iter().enumerate().map(|(n, p)| n as f64 * p))
    }

    pub fn to_json(&self) -> Result<String> {
        crate::output::to_json(&PndJson {
            p: &self.probs,
            tail: self.tail,
            mean: self.mean(),
        })
    }

    /// `n,p` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p\n");
        for (n, p) in self.probs.iter().enumerate() {
            let _ = writeln!(out, "{n},{}", sci(*p));
        }
        out
    }
}

/// Neumaier summation.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `p(n) = (1 - q) qⁿ` given `weight = 1 - q` computed without cancellation.
fn geometric(weight: f64, q: f64, trunc: Truncation) -> Result<Pnd> {
    let trunc = trunc.validate()?;
    if q == 0.0 {
        return Ok(Pnd::vacuum());
    }
    if q >= 1.0 || weight <= 0.0 {
        return Err(Error::Numerical(format!(
            "geometric ratio {q} too close to 1 to represent"
        )));
    }
    let n_max = match trunc {
        Truncation::Fixed(n) => n,
        Truncation::Tail(tol) => {
            // smallest n with q^(n+1) <= tol
            let guess = (tol.ln() / q.ln()).ceil().max(1.0);
            if guess > MAX_NMAX as f64 {
                return Err(Error::Numerical(format!(
                    "tail bound {tol} needs more than {MAX_NMAX} terms"
                )));
            }
            let mut n = guess as usize - 1;
            while n > 0 && q.powf(n as f64) <= tol {
                n -= 1;
            }
            while q.powf(n as f64 + 1.0) > tol {
                n += 1;
            }
            n
        }
    };
    let mut probs = Vec::with_capacity(n_max + 1);
    let mut p = weight;
    for _ in 0..=n_max {
        probs.push(p);
        p *= q;
    }
    Ok(Pnd::from_parts(probs, q.powf(n_max as f64 + 1.0)))
}

fn thermal_weights(r: f64) -> (f64, f64) {
    let c = r.cosh();
    let t = r.tanh();
    (1.0 / (c * c), t * t)
}

/// Thermal marginal of one two-mode squeezer, `sech²r · tanh²ⁿr`, with the exact
/// geometric tail `tanh^(2(n_max+1)) r`.
pub fn thermal_pnd(r: f64, trunc: Truncation) -> Result<Pnd> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::invalid(format!(
            "squeezing strength must be non-negative, got {r}"
        )));
    }
    let (w, q) = thermal_weights(r);
    geometric(w, q, trunc)
}

/// Thermal distribution `n̄ⁿ / (1 + n̄)^(n+1)`.
pub fn reference_thermal(mean: f64, trunc: Truncation) -> Result<Pnd> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(Error::invalid(format!(
            "mean must be non-negative, got {mean}"
        )));
    }
    geometric(1.0 / (1.0 + mean), mean / (1.0 + mean), trunc)
}

fn ln_factorial_table(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// Poisson distribution `e^(-μ) μⁿ / n!`; the tail is summed explicitly.
pub fn reference_poisson(mean: f64, trunc: Truncation) -> Result<Pnd> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(Error::invalid(format!(
            "mean must be non-negative, got {mean}"
        )));
    }
    let trunc = trunc.validate()?;
    if mean == 0.0 {
        return Ok(Pnd::vacuum());
    }
    let ln_mu = mean.ln();
    let pmf = |n: usize, ln_fact: f64| (-mean + n as f64 * ln_mu - ln_fact).exp();
    // upper bound of Σ_{k>n} p(k) once n + 2 > μ
    let tail_bound = |n: usize, p_next: f64| p_next / (1.0 - mean / (n as f64 + 2.0));
    let n_max = match trunc {
        Truncation::Fixed(n) => n,
        Truncation::Tail(tol) => {
            let mut n = 0usize;
            let mut ln_fact_next = 0.0;
            loop {
                ln_fact_next += ((n + 1) as f64).ln();
                if (n as f64) + 2.0 > mean && tail_bound(n, pmf(n + 1, ln_fact_next)) <= tol {
                    break n;
                }
                n += 1;
                if n > MAX_NMAX {
                    return Err(Error::Numerical(format!(
                        "Poisson tail below {tol} needs more than {MAX_NMAX} terms"
                    )));
                }
            }
        }
    };
    let ln_fact = ln_factorial_table(n_max);
    let probs: Vec<f64> = (0..=n_max).map(|n| pmf(n, ln_fact[n])).collect();
    // explicit tail: continue the recursion until the terms stop mattering
    let mut tail = 0.0;
    let mut term = probs[n_max];
    let mut k = n_max;
    loop {
        k += 1;
        term *= mean / k as f64;
        tail += term;
        if (k as f64) > mean && term <= tail * 1e-17 || term == 0.0 {
            break;
        }
    }
    Ok(Pnd::from_parts(probs, tail))
}

/// Full-length discrete convolution of all inputs.
///
/// Because nothing is cut off, the missing mass is exactly
/// `1 - Π(1 - t_k)` when every input satisfies `Σp + t = 1`; this never
/// exceeds the sum of the input tails.
pub fn convolve_direct(pnds: &[Pnd]) -> Result<Pnd> {
    let (first, rest) = pnds
        .split_first()
        .ok_or_else(|| Error::invalid("convolution needs at least one distribution"))?;
    let mut acc = first.probs.clone();
    for p in rest {
        let mut out = vec![0.0; acc.len() + p.probs.len() - 1];
        for (i, a) in acc.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in p.probs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        acc = out;
    }
    let log_keep: f64 = pnds.iter().map(|p| (-p.tail.min(1.0)).ln_1p()).sum();
    Ok(Pnd::from_parts(acc, -log_keep.exp_m1()))
}

/// Coefficients of ζⁿ, `n ≤ n_max`, in `Π_k g_k(ζ)`.
///
/// Multiplying a truncated series by `(1 - q)/(1 - qζ)` is the recurrence
/// `h_n = q·h_(n-1) + (1 - q)·g_n`, so the cost is O(modes · n_max). The
/// survival function `S_n = P(N > n)` obeys a similar recurrence,
/// `S'_n = S_n + A_n` with `A_n = q·(A_(n-1) + g_n)`. Both involve only
/// non-negative terms, so coefficients and tail are accurate to rounding in
/// the relative sense, however small.
pub fn convolve_gf(bank: &SqueezerBank, trunc: Truncation) -> Result<Pnd> {
    let factors: Vec<(f64, f64)> = bank
        .strengths
        .iter()
        .filter(|r| **r > 0.0)
        .map(|&r| thermal_weights(r))
        .collect();
    if factors.iter().any(|&(w, q)| q >= 1.0 || w <= 0.0) {
        return Err(Error::Numerical(
            "squeezing strength too large to represent".into(),
        ));
    }
    let product = |n_max: usize| {
        let mut h = vec![0.0; n_max + 1];
        let mut survival = vec![0.0; n_max + 1];
        h[0] = 1.0;
        for &(w, q) in &factors {
            let (mut prev, mut carry) = (0.0, 0.0);
            for (v, s) in h.iter_mut().zip(survival.iter_mut()) {
                carry = q * (carry + *v);
                *s += carry;
                prev = q * prev + w * *v;
                *v = prev;
            }
        }
        (h, survival)
    };
    match trunc.validate()? {
        Truncation::Fixed(n) => {
            let (h, survival) = product(n);
            Ok(Pnd::from_parts(h, survival[n]))
        }
        Truncation::Tail(tol) => {
            if factors.is_empty() {
                return Ok(Pnd::vacuum());
            }
            let mean: f64 = factors.iter().map(|(w, q)| q / w).sum();
            let mut n = ((8.0 * (mean + 1.0)).ceil() as usize).max(32);
            loop {
                let (mut h, survival) = product(n);
                if let Some(cut) = survival.iter().position(|s| *s <= tol) {
                    h.truncate(cut + 1);
                    return Ok(Pnd::from_parts(h, survival[cut]));
                }
                if n >= MAX_NMAX {
                    return Err(Error::Numerical(format!(
                        "tail bound {tol} not reached within {MAX_NMAX} terms"
                    )));
                }
                n = (2 * n).min(MAX_NMAX);
            }
        }
    }
}

/// Variational distance `Σ_n |p1(n) - p2(n)|` over the union of the stored
/// supports. `slack = tail1 + tail2` bounds what the truncated tails could add.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distance {
    pub delta: f64,
    pub slack: f64,
}

pub fn variational_distance(p1: &Pnd, p2: &Pnd) -> Distance {
    let n = p1.len().max(p2.len());
    let delta = compensated_sum((0..n).map(|k| (p1.get(k) - p2.get(k)).abs()));
    Distance {
        delta,
        slack: p1.tail + p2.tail,
    }
}

/// Joint signal+idler count distribution: `p_joint(2n) = p(n)`, odd entries zero.
pub fn joint_pnd(p: &Pnd) -> Pnd {
    let mut probs = vec![0.0; 2 * p.len() - 1];
    for (n, v) in p.probs.iter().enumerate() {
        probs[2 * n] = *v;
    }
    Pnd::from_parts(probs, p.tail)
}

/// Couples the spectrum so that the bank's mean photon number equals `mean`
/// and returns the coupling together with the resulting distribution.
pub fn pnd_at_mean(s: &SchmidtSpectrum, mean: f64, trunc: Truncation) -> Result<(f64, Pnd)> {
    let coupling = solve_coupling(s, mean)?;
    let bank = bank_from_spectrum(s, coupling)?;
    Ok((coupling, convolve_gf(&bank, trunc)?))
}

/// How Schmidt spectra are obtained inside a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumMethod {
    /// Dense SVD on the default `grid × grid` sampling of the Gaussian.
    Svd { grid: usize },
    /// Closed-form geometric spectrum.
    Mehler,
}

impl SpectrumMethod {
    pub fn decompose(&self, p: &GaussianParams, eps_lambda: f64) -> Result<SchmidtSpectrum> {
        match *self {
            SpectrumMethod::Svd { grid } => decompose_gaussian_svd(p, grid, eps_lambda),
            SpectrumMethod::Mehler => decompose_mehler_eps(p, eps_lambda),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Rotation angle θ in radians.
    Theta,
    /// Squared signal width σx².
    SigmaX2,
}

impl SweepVariable {
    pub fn column_name(&self) -> &'static str {
        match self {
            SweepVariable::Theta => "theta",
            SweepVariable::SigmaX2 => "sigma_x2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Parameters held fixed while the swept variable changes.
    pub template: GaussianParams,
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub method: SpectrumMethod,
    pub eps_lambda: f64,
    /// Every point is re-coupled to this mean photon number.
    pub target_mean: f64,
    pub tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub coupling: f64,
    pub delta_thermal: f64,
    pub delta_poisson: f64,
}

/// Distances of the multi-mode distribution from thermal and Poissonian
/// references with the same mean, along a sweep of θ or σx².
pub fn distance_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.values.is_empty() {
        return Err(Error::invalid("sweep range is empty"));
    }
    spec.values
        .iter()
        .map(|&value| {
            let t = &spec.template;
            let params = match spec.variable {
                SweepVariable::Theta => t.with_theta(value)?,
                SweepVariable::SigmaX2 => {
                    GaussianParams::from_variances(value, t.sigma_y().powi(2), t.theta())?
                }
            };
            let spectrum = spec.method.decompose(&params, spec.eps_lambda)?;
            let (coupling, pnd) =
                pnd_at_mean(&spectrum, spec.target_mean, Truncation::Tail(spec.tail))?;
            let n_max = Truncation::Fixed(pnd.n_max());
            let mean = spec.target_mean;
            Ok(SweepRow {
                parameter: value,
                k: spectrum.schmidt_number(),
                coupling,
                delta_thermal: variational_distance(&pnd, &reference_thermal(mean, n_max)?).delta,
                delta_poisson: variational_distance(&pnd, &reference_poisson(mean, n_max)?).delta,
            })
        })
        .collect()
}

pub fn sweep_to_csv(rows: &[SweepRow], variable: SweepVariable) -> String {
    let mut out = format!(
        "{},K,coupling,delta_thermal,delta_poisson\n",
        variable.column_name()
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            sci(r.parameter),
            sci(r.k),
            sci(r.coupling),
            sci(r.delta_thermal),
            sci(r.delta_poisson)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Eq.-style partition sum: all ordered tuples (n_0, …, n_(N-1)) with
    /// Σ n_k = n, zeros allowed.
    fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
        if parts == 1 {
            return vec![vec![n]];
        }
        (0..=n)
            .flat_map(|first| {
                compositions(n - first, parts - 1)
                    .into_iter()
                    .map(move |mut rest| {
                        rest.insert(0, first);
                        rest
                    })
            })
            .collect()
    }

    fn partition_sum(pnds: &[Pnd], n: usize) -> f64 {
        compositions(n, pnds.len())
            .iter()
            .map(|c| c.iter().zip(pnds).map(|(k, p)| p.get(*k)).product::<f64>())
            .sum()
    }

    #[test]
    fn bank_from_spectrum_examples() {
        let one = SchmidtSpectrum::single_mode();
        assert_eq!(
            bank_from_spectrum(&one, 0.8814).unwrap().strengths(),
            &[0.8814]
        );
        let s = SchmidtSpectrum::from_eigenvalues(vec![0.64, 0.36]).unwrap();
        let b = bank_from_spectrum(&s, 1.0).unwrap();
        assert!((b.strengths()[0] - 0.8).abs() < 1e-15 && (b.strengths()[1] - 0.6).abs() < 1e-15);
        assert!(bank_from_spectrum(&s, 0.0)
            .unwrap()
            .strengths()
            .iter()
            .all(|r| *r == 0.0));
        assert!(bank_from_spectrum(&s, -1.0).is_err());
    }

    #[test]
    fn thermal_vacuum_and_half() {
        assert_eq!(
            thermal_pnd(0.0, Truncation::Fixed(5)).unwrap(),
            Pnd::vacuum()
        );
        let r = 1.0f64.asinh();
        let p = thermal_pnd(r, Truncation::Fixed(30)).unwrap();
        for (n, v) in p.probs().iter().enumerate() {
            assert!((v - 0.5f64.powi(n as i32 + 1)).abs() < 1e-15);
        }
        assert!((p.total() + p.tail() - 1.0).abs() < 1e-15);
        let p = thermal_pnd(r, Truncation::Tail(1e-10)).unwrap();
        assert!(p.tail() <= 1e-10 && p.tail() > 0.0);
        assert!(0.5f64.powi(p.n_max() as i32) > 1e-10);
    }

    #[test]
    fn direct_convolution_examples() {
        let p = thermal_pnd(0.7, Truncation::Fixed(10)).unwrap();
        let single = convolve_direct(std::slice::from_ref(&p)).unwrap();
        assert_eq!(single.probs(), p.probs());
        assert!((single.tail() - p.tail()).abs() < 1e-16);
        let with_vac = convolve_direct(&[p.clone(), Pnd::vacuum()]).unwrap();
        assert_eq!(with_vac.probs(), p.probs());
        assert!(convolve_direct(&[]).is_err());
    }

    #[test]
    fn two_equal_thermals_give_negative_binomial() {
        let r = 0.9f64;
        let q = r.tanh().powi(2);
        let p = thermal_pnd(r, Truncation::Fixed(12)).unwrap();
        let pnds = [p.clone(), p];
        let c = convolve_direct(&pnds).unwrap();
        for n in 0..=6 {
            let brute = partition_sum(&pnds, n);
            let closed = (n as f64 + 1.0) * (1.0 - q).powi(2) * q.powi(n as i32);
            assert!((c.get(n) - brute).abs() < 1e-15);
            assert!((c.get(n) - closed).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn gf_single_mode_equals_thermal() {
        let bank = SqueezerBank::new(vec![0.6]).unwrap();
        let a = convolve_gf(&bank, Truncation::Fixed(25)).unwrap();
        let b = thermal_pnd(0.6, Truncation::Fixed(25)).unwrap();
        for (x, y) in a.probs().iter().zip(b.probs()) {
            assert!((x - y).abs() < 1e-16);
        }
    }

    #[test]
    fn gf_adaptive_tail() {
        let bank = SqueezerBank::new(vec![1.2, 0.8, 0.3]).unwrap();
        let p = convolve_gf(&bank, Truncation::Tail(1e-10)).unwrap();
        assert!(p.tail() <= 1e-10);
        assert!((p.total() + p.tail() - 1.0).abs() < 1e-12);
        assert!((p.mean() - bank.mean_photon_number()).abs() < 1e-7);
        let empty = convolve_gf(
            &SqueezerBank::new(vec![0.0, 0.0]).unwrap(),
            Truncation::Tail(1e-10),
        )
        .unwrap();
        assert_eq!(empty, Pnd::vacuum());
    }

    #[test]
    fn mean_photon_number_examples() {
        assert_eq!(
            mean_photon_number(&SqueezerBank::uniform(3, 0.0).unwrap()),
            0.0
        );
        let b = SqueezerBank::new(vec![1.0f64.asinh()]).unwrap();
        assert!((mean_photon_number(&b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reference_distributions() {
        assert_eq!(
            reference_poisson(0.0, Truncation::Fixed(4)).unwrap(),
            Pnd::vacuum()
        );
        assert_eq!(
            reference_thermal(0.0, Truncation::Fixed(4)).unwrap(),
            Pnd::vacuum()
        );
        let th = reference_thermal(1.0, Truncation::Fixed(20)).unwrap();
        for (n, v) in th.probs().iter().enumerate() {
            assert!((v - 0.5f64.powi(n as i32 + 1)).abs() < 1e-16);
        }
        let po = reference_poisson(1.0, Truncation::Fixed(20)).unwrap();
        let e = (-1.0f64).exp();
        assert!((po.get(0) - e).abs() < 1e-16 && (po.get(1) - e).abs() < 1e-16);
        assert!((po.total() + po.tail() - 1.0).abs() < 1e-15);
        let po = reference_poisson(30.0, Truncation::Tail(1e-10)).unwrap();
        assert!(po.tail() <= 1e-10);
        assert!((po.total() + po.tail() - 1.0).abs() < 1e-13);
        assert!((po.mean() - 30.0).abs() < 1e-6);
    }

    #[test]
    fn distance_examples() {
        let p = reference_poisson(2.0, Truncation::Fixed(20)).unwrap();
        assert_eq!(variational_distance(&p, &p).delta, 0.0);
        let th = reference_thermal(1.0, Truncation::Tail(1e-12)).unwrap();
        let d = variational_distance(&Pnd::vacuum(), &th);
        assert!((d.delta + d.slack - 1.0).abs() < 1e-15);
        assert!((d.delta - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn joint_mapping() {
        assert_eq!(joint_pnd(&Pnd::vacuum()), Pnd::vacuum());
        let p = Pnd::new(vec![0.5, 0.5], 0.0).unwrap();
        assert_eq!(joint_pnd(&p).probs(), &[0.5, 0.0, 0.5]);
        let th = reference_thermal(0.7, Truncation::Fixed(9)).unwrap();
        assert_eq!(joint_pnd(&th).total(), th.total());
    }

    #[test]
    fn pnd_validation() {
        assert!(Pnd::new(vec![], 0.0).is_err());
        assert!(Pnd::new(vec![0.5, -0.1], 0.0).is_err());
        assert!(Pnd::new(vec![0.7, 0.7], 0.0).is_err());
        assert!(Pnd::new(vec![1.0], -1.0).is_err());
    }

    #[test]
    fn csv_and_json_exports() {
        let p = Pnd::new(vec![0.75, 0.25], 0.0).unwrap();
        assert_eq!(
            p.to_csv(),
            "n,p\n0,7.5000000000000000e-1\n1,2.5000000000000000e-1\n"
        );
        let v: serde_json::Value = serde_json::from_str(&p.to_json().unwrap()).unwrap();
        assert_eq!(v["mean"], 0.25);
        assert_eq!(v["p"][1], 0.25);
    }

    #[test]
    fn sweep_rejects_empty_range() {
        let spec = SweepSpec {
            template: GaussianParams::from_variances(25.0, 1.0, 0.0).unwrap(),
            variable: SweepVariable::Theta,
            values: vec![],
            method: SpectrumMethod::Mehler,
            eps_lambda: 1e-9,
            target_mean: 1.0,
            tail: 1e-10,
        };
        assert!(distance_sweep(&spec).is_err());
    }
}
