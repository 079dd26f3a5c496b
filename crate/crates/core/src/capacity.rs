//! Waterfilling capacity over channel eigenmodes and the
//! identical-eigenvalue upper bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mimo::EigenSpectrum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub snr: f64,
    /// bits/s/Hz
    pub capacity: f64,
    pub water_level: f64,
    /// Power per eigenvalue, in the order of the input.
    pub powers: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DofBound {
    pub snr: f64,
    pub rho: usize,
    /// bits/s/Hz
    pub bound: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Waterfilling over `spectrum` with total power `snr` (linear).
pub fn waterfill(spectrum: &EigenSpectrum, snr: f64) -> Result<CapacityResult> {
    waterfill_values(&spectrum.values, snr)
}

/// Exact active-set waterfilling: with the positive eigenvalues sorted
/// descending, the water level for the `k` strongest modes is
/// `(snr + sum 1/lambda_i) / k`; the active set is the largest `k` whose
/// weakest mode still gets positive power.
pub fn waterfill_values(eigenvalues: &[f64], snr: f64) -> Result<CapacityResult> {
    if !(snr.is_finite() && snr > 0.0) {
        return Err(Error::domain(format!("SNR must be positive, got {snr}")));
    }
    if eigenvalues.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::domain("eigenvalues must be finite and nonnegative"));
    }
    let mut order: Vec<usize> = (0..eigenvalues.len())
        .filter(|&i| eigenvalues[i] > 0.0)
        .collect();
    if order.is_empty() {
        return Err(Error::domain("spectrum has no positive eigenvalue"));
    }
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));

    let mut inv_sum = 0.0;
    let mut level = 0.0;
    for (k, &i) in order.iter().enumerate() {
        let inv = 1.0 / eigenvalues[i];
        let candidate = (snr + inv_sum + inv) / (k + 1) as f64;
        if k > 0 && candidate <= inv {
            break;
        }
        inv_sum += inv;
        level = candidate;
    }

    let powers: Vec<f64> = eigenvalues
        .iter()
        .map(|&l| if l > 0.0 { (level - 1.0 / l).max(0.0) } else { 0.0 })
        .collect();
    let capacity = eigenvalues
        .iter()
        .zip(&powers)
        .map(|(&l, &p)| (1.0 + p * l).log2())
        .sum();
    Ok(CapacityResult {
        snr,
        capacity,
        water_level: level,
        powers,
    })
}

/// `max over rho in 1..=n of rho log2(1 + snr n^2 / rho^2)`, ties going to
/// the larger `rho`.
pub fn dof_bound(n: usize, snr: f64) -> Result<DofBound> {
    if n == 0 {
        return Err(Error::domain("antenna count must be >= 1"));
    }
    if !(snr.is_finite() && snr > 0.0) {
        return Err(Error::domain(format!("SNR must be positive, got {snr}")));
    }
    let n2 = (n * n) as f64;
    let mut best = DofBound {
        snr,
        rho: 0,
        bound: f64::NEG_INFINITY,
    };
    for rho in 1..=n {
        let r = rho as f64;
        let c = r * (1.0 + snr * n2 / (r * r)).log2();
        if c >= best.bound {
            best.rho = rho;
            best.bound = c;
        }
    }
    Ok(best)
}
