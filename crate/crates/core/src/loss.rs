//! Binomial detection loss and its inversion.
//!
//! Every photon survives independently with probability η, so
//! `p'(m) = Σ_n L(m|n) p(n)` with `L(m|n) = C(n, m) η^m (1 - η)^(n-m)`.

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result, Warning};
use crate::nnls::nnls;
use crate::stats::Pnd;

/// Below this efficiency inversion results carry an [`Warning::IllConditioned`].
pub const ILL_CONDITIONED_EFFICIENCY: f64 = 0.1;

/// Upper-triangular loss matrix over photon numbers `0..=n_max`; column `n`
/// is the binomial distribution of survivors of `n` photons.
#[derive(Debug, Clone)]
pub struct LossMap {
    efficiency: f64,
    matrix: Mat<f64>,
}

impl LossMap {
    pub fn new(efficiency: f64, n_max: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::EfficiencyOutOfRange(efficiency));
        }
        let size = n_max + 1;
        let mut matrix = Mat::<f64>::zeros(size, size);
        matrix[(0, 0)] = 1.0;
        // L(m|n) = η L(m-1|n-1) + (1-η) L(m|n-1)
        for n in 1..size {
            for m in 0..=n {
                let keep = if m > 0 {
                    efficiency * matrix[(m - 1, n - 1)]
                } else {
                    0.0
                };
                let lose = if m < n {
                    (1.0 - efficiency) * matrix[(m, n - 1)]
                } else {
                    0.0
                };
                matrix[(m, n)] = keep + lose;
            }
        }
        Ok(Self { efficiency, matrix })
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn n_max(&self) -> usize {
        self.matrix.nrows() - 1
    }

    /// L(m|n)
    pub fn entry(&self, m: usize, n: usize) -> f64 {
        self.matrix[(m, n)]
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    /// `L·p` for `p` of length at most `n_max + 1`.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let size = p.len();
        (0..size)
            .map(|m| (m..size).map(|n| self.matrix[(m, n)] * p[n]).sum())
            .collect()
    }

    /// 2-norm condition number. Saturates at `f64::MAX` when the smallest
    /// singular value underflows.
    pub fn condition_number(&self) -> Result<f64> {
        let sv = self
            .matrix
            .singular_values()
            .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
        let (max, min) = (sv[0], sv[sv.len() - 1]);
        Ok(if min > 0.0 {
            (max / min).min(f64::MAX)
        } else {
            f64::MAX
        })
    }
}

/// Distribution after binomial thinning. The input tail bound carries over
/// since columns of the loss map sum to one.
pub fn apply_loss(p: &Pnd, eta: f64) -> Result<Pnd> {
    let map = LossMap::new(eta, p.n_max())?;
    let out = map
        .apply(p.probs())
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    Pnd::new(out, p.tail())
}

#[derive(Debug, Clone)]
pub struct LossInversion {
    pub pnd: Pnd,
    /// ‖L q - measured‖₂ before renormalization.
    pub residual: f64,
    pub condition_number: f64,
    pub warning: Option<Warning>,
}

#[derive(Serialize)]
struct InversionJson<'a> {
    p: &'a [f64],
    tail: f64,
    mean: f64,
    efficiency: f64,
    residual: f64,
    condition_number: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<String>,
}

impl LossInversion {
    pub fn to_json(&self, efficiency: f64) -> Result<String> {
        crate::output::to_json(&InversionJson {
            p: self.pnd.probs(),
            tail: self.pnd.tail(),
            mean: self.pnd.mean(),
            efficiency,
            residual: self.residual,
            condition_number: self.condition_number,
            warning: self.warning.map(|w| w.to_string()),
        })
    }
}

/// Estimates the pre-loss distribution on `0..=n_max` by non-negative least
/// squares. The result is scaled down if its mass exceeds one; whatever is
/// missing to one becomes the tail.
pub fn invert_loss(measured: &Pnd, eta: f64, n_max: usize) -> Result<LossInversion> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::EfficiencyOutOfRange(eta));
    }
    if n_max < measured.n_max() {
        return Err(Error::invalid(format!(
            "n_max {n_max} is smaller than the measured range {}",
            measured.n_max()
        )));
    }
    let map = LossMap::new(eta, n_max)?;
    let mut rhs = measured.probs().to_vec();
    rhs.resize(n_max + 1, 0.0);
    let sol = nnls(map.matrix().as_ref(), &rhs)?;
    let total: f64 = sol.x.iter().sum();
    let mut q = sol.x;
    if total > 1.0 {
        q.iter_mut().for_each(|v| *v /= total);
    }
    let tail = (1.0 - q.iter().sum::<f64>()).max(0.0);
    let condition_number = map.condition_number()?;
    let warning = (eta < ILL_CONDITIONED_EFFICIENCY).then(|| {
        let w = Warning::IllConditioned {
            efficiency: eta,
            condition_number,
        };
        log::warn!("{w}");
        w
    });
    Ok(LossInversion {
        pnd: Pnd::new(q, tail)?,
        residual: sol.residual_norm,
        condition_number,
        warning,
    })
}

/// Reads a measured distribution from `n,p` rows (header and `#` comments allowed).
/// Photon numbers must be 0, 1, 2, … in order.
pub fn load_measured(path: &std::path::Path) -> Result<Pnd> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let rows = crate::coupling::parse_two_column_csv(&text)?;
    let mut probs = Vec::with_capacity(rows.len());
    for (expected, (line, n, p)) in rows.into_iter().enumerate() {
        if n != expected as f64 {
            return Err(Error::parse(
                line,
                1,
                format!("expected photon number {expected}, found {n}"),
            ));
        }
        probs.push(p);
    }
    let total: f64 = probs.iter().sum();
    Pnd::new(probs, (1.0 - total).max(0.0))
}
