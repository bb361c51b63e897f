//! Closed-form reference values used by the integration tests. Everything here
//! is computed independently of the library code paths it is compared with.
#![allow(dead_code)]

/// Thermal (Bose–Einstein) law with mean `m`: `mⁿ / (1 + m)^(n+1)`.
pub fn thermal(mean: f64, n_max: usize) -> Vec<f64> {
    let ratio = mean / (1.0 + mean);
    (0..=n_max)
        .map(|n| ratio.powi(n as i32) / (1.0 + mean))
        .collect()
}

/// Poisson law, built by the multiplicative recurrence `p(n) = p(n-1)·m/n`.
pub fn poisson(mean: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut p = (-mean).exp();
    for n in 0..=n_max {
        if n > 0 {
            p *= mean / n as f64;
        }
        out.push(p);
    }
    out
}

/// Marginal photon statistics of one two-mode squeezer: `sech²r · tanh²ⁿr`.
pub fn squeezer(r: f64, n: usize) -> f64 {
    let t = r.tanh();
    t.powi(2 * n as i32) / r.cosh().powi(2)
}

/// Brute-force sum over every way of splitting `n` photons among the modes.
pub fn composition_sum(strengths: &[f64], n: usize) -> f64 {
    fn go(strengths: &[f64], left: usize) -> f64 {
        match strengths.split_first() {
            None => {
                if left == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Some((r, rest)) => (0..=left)
                .map(|k| squeezer(*r, k) * go(rest, left - k))
                .sum(),
        }
    }
    go(strengths, n)
}

/// Negative binomial law of `N` identical squeezers, `C(n+N-1, n) sech^(2N) r tanh^(2n) r`.
pub fn negative_binomial(modes: usize, r: f64, n: usize) -> f64 {
    let mut binom = 1.0;
    for k in 0..n {
        binom *= (modes + k) as f64 / (k + 1) as f64;
    }
    binom * r.tanh().powi(2 * n as i32) / r.cosh().powi(2 * modes as i32)
}

/// Schmidt number of a real Gaussian kernel `exp(-(a x² + 2bxy + c y²))`
/// from the purity of its reduced density, `Σλ² = √((ac - b²)/(ac))`.
pub fn gaussian_schmidt_number(a: f64, b: f64, c: f64) -> f64 {
    (a * c / (a * c - b * b)).sqrt()
}

/// Schmidt weights of that kernel: geometric with ratio `(K - 1)/(K + 1)`.
pub fn gaussian_weights(a: f64, b: f64, c: f64, count: usize) -> Vec<f64> {
    let k = gaussian_schmidt_number(a, b, c);
    let mu = (k - 1.0) / (k + 1.0);
    (0..count).map(|n| (1.0 - mu) * mu.powi(n as i32)).collect()
}

/// `(a, b, c)` written out directly in terms of σx², σy², θ.
pub fn gaussian_abc(sx2: f64, sy2: f64, theta: f64) -> (f64, f64, f64) {
    let (s, c) = theta.sin_cos();
    let s2 = (2.0 * theta).sin();
    (
        c * c / (2.0 * sx2) + s * s / (2.0 * sy2),
        s2 / (4.0 * sy2) - s2 / (4.0 * sx2),
        s * s / (2.0 * sx2) + c * c / (2.0 * sy2),
    )
}

pub fn l1(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    (0..n)
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum()
}

pub fn max_abs_diff(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    (0..n)
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}
