//! Uniform linear arrays, channel matrices sampled from the impulse
//! response, and their eigenvalue spectra.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::dof_bound;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::oracle::Point3;
use crate::quadrature::{estimate_nodes, synthesize_impulse, QuadratureSpec, SpatialLag};
use crate::spectrum::{FieldComponent, SceneConfig};

/// `sqrt(lambda D / N)`: the spacing that turns the LOS matrix between
/// parallel ULAs at range `D` into a scaled Fourier matrix.
pub fn spacing_rayleigh(wavelength: f64, range: f64, n: usize) -> f64 {
    (wavelength * range / n as f64).sqrt()
}

/// Spacing that spreads the array over the `rho*(snr)` degrees of freedom
/// maximizing the identical-eigenvalue capacity bound:
/// `sqrt(eta lambda D / N)` with `eta = rho* / N`.
pub fn spacing_snr(wavelength: f64, range: f64, n: usize, snr: f64) -> Result<f64> {
    let bound = dof_bound(n, snr)?;
    let eta = bound.rho as f64 / n as f64;
    Ok((eta * wavelength * range / n as f64).sqrt())
}

/// `N` antennas spaced `spacing` apart along `axis`, symmetric about
/// `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayLayout {
    pub n: usize,
    pub spacing: f64,
    pub center: Point3,
    pub axis: Point3,
}

impl ArrayLayout {
    pub fn new(n: usize, spacing: f64, center: Point3, axis: Point3) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("array needs at least one antenna"));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::domain(format!("antenna spacing must be positive, got {spacing}")));
        }
        let len = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if !(len.is_finite() && len > 0.0) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("array axis must be a nonzero finite vector"));
        }
        Ok(ArrayLayout {
            n,
            spacing,
            center,
            axis: [axis[0] / len, axis[1] / len, axis[2] / len],
        })
    }

    /// ULA along x centered at `(0, 0, z)`.
    pub fn along_x(n: usize, spacing: f64, z: f64) -> Result<Self> {
        Self::new(n, spacing, [0.0, 0.0, z], [1.0, 0.0, 0.0])
    }

    pub fn position(&self, idx: usize) -> Point3 {
        let offset = (idx as f64 - (self.n as f64 - 1.0) / 2.0) * self.spacing;
        [
            self.center[0] + offset * self.axis[0],
            self.center[1] + offset * self.axis[1],
            self.center[2] + offset * self.axis[2],
        ]
    }

    pub fn positions(&self) -> Vec<Point3> {
        (0..self.n).map(|i| self.position(i)).collect()
    }

    /// Distance between the outermost antennas.
    pub fn aperture(&self) -> f64 {
        (self.n as f64 - 1.0) * self.spacing
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMatrix {
    /// `entries[(m, n)] = h(r_m, s_n)`.
    pub entries: CMatrix,
    pub tx: ArrayLayout,
    pub rx: ArrayLayout,
    pub component: FieldComponent,
    pub scene: SceneConfig,
    pub quadrature: QuadratureSpec,
    /// Number of distinct impulse-response evaluations.
    pub distinct_evaluations: usize,
    /// Some evaluation ran below its oscillation budget.
    pub under_resolved: bool,
}

impl ChannelMatrix {
    /// CSV with columns `row,col,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,re,im\n");
        for r in 0..self.entries.rows() {
            for c in 0..self.entries.cols() {
                let z = self.entries[(r, c)];
                let _ = writeln!(out, "{r},{c},{},{}", z.re, z.im);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel matrix serializes")
    }
}

/// Quadrature budget covering every antenna pair of the two layouts.
pub fn nodes_for_layouts(
    scene: &SceneConfig,
    tx: &ArrayLayout,
    rx: &ArrayLayout,
    comp: FieldComponent,
) -> QuadratureSpec {
    let mut max_lag: f64 = 0.0;
    let mut max_path: f64 = 0.0;
    for r in rx.positions() {
        for s in tx.positions() {
            max_lag = max_lag.max((r[0] - s[0]).hypot(r[1] - s[1]));
            let entry = SceneConfig {
                source_z: s[2],
                receiver_z: r[2],
                ..scene.clone()
            };
            max_path = max_path.max(entry.path_length(comp));
        }
    }
    estimate_nodes(scene, max_lag, max_path)
}

// Picometre grid; identical lags land on the same key.
fn lag_key(v: f64) -> i64 {
    (v * 1e12).round() as i64
}

/// Samples the impulse response at every (receiver, transmitter) pair.
/// Pairs with the same transverse lag and planes share one evaluation, so
/// parallel ULAs need only `n_rx + n_tx - 1` of them.
pub fn build_channel_matrix(
    scene: &SceneConfig,
    tx: &ArrayLayout,
    rx: &ArrayLayout,
    comp: FieldComponent,
    q: &QuadratureSpec,
) -> Result<ChannelMatrix> {
    let rx_pos = rx.positions();
    let tx_pos = tx.positions();

    type Key = [i64; 4];
    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut jobs: Vec<(SpatialLag, f64, f64)> = Vec::new();
    let mut slot = vec![0usize; rx.n * tx.n];
    for (m, r) in rx_pos.iter().enumerate() {
        for (n, s) in tx_pos.iter().enumerate() {
            let lag = SpatialLag::new(r[0] - s[0], r[1] - s[1]);
            let key = [lag_key(lag.x), lag_key(lag.y), lag_key(r[2]), lag_key(s[2])];
            let id = *index.entry(key).or_insert_with(|| {
                jobs.push((lag, r[2], s[2]));
                jobs.len() - 1
            });
            slot[m * tx.n + n] = id;
        }
    }

    let values: Vec<Result<(Complex64, bool)>> = jobs
        .par_iter()
        .map(|&(lag, rz, sz)| {
            let entry_scene = SceneConfig {
                source_z: sz,
                receiver_z: rz,
                ..scene.clone()
            };
            entry_scene.validate()?;
            let h = synthesize_impulse(&entry_scene, comp, lag, q)?;
            Ok((h.value, h.under_resolved))
        })
        .collect();
    let values: Vec<(Complex64, bool)> = values.into_iter().collect::<Result<_>>()?;

    let entries = CMatrix::from_fn(rx.n, tx.n, |m, n| values[slot[m * tx.n + n]].0);
    if !entries.is_finite() {
        return Err(Error::domain("channel matrix has non-finite entries"));
    }
    Ok(ChannelMatrix {
        entries,
        tx: tx.clone(),
        rx: rx.clone(),
        component: comp,
        scene: scene.clone(),
        quadrature: *q,
        distinct_evaluations: jobs.len(),
        under_resolved: values.iter().any(|v| v.1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "scale", rename_all = "snake_case")]
pub enum Normalization {
    /// Scale so the eigenvalues sum to `n_rx * n_tx` (`N^2` for square).
    SelfSum,
    /// Multiply the raw eigenvalues by a fixed factor, typically the
    /// [`reference_scale`] of a LOS matrix of the same geometry.
    RelativeTo(f64),
}

/// Factor that maps the eigenvalues of `reference` to the self-sum
/// normalization.
pub fn reference_scale(reference: &CMatrix) -> f64 {
    (reference.rows() * reference.cols()) as f64 / reference.frobenius_norm_sqr()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSpectrum {
    /// Descending, nonnegative.
    pub values: Vec<f64>,
    pub normalization: Normalization,
    /// Factor applied to the raw eigenvalues of `H H^*`.
    pub scale: f64,
}

impl EigenSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `10 log10(lambda)` per eigenvalue.
    pub fn db(&self) -> Vec<f64> {
        self.values.iter().map(|v| 10.0 * v.log10()).collect()
    }

    /// Largest over smallest eigenvalue, in dB.
    pub fn spread_db(&self) -> f64 {
        let max = self.values.first().copied().unwrap_or(0.0);
        let min = self.values.last().copied().unwrap_or(0.0);
        10.0 * (max / min).log10()
    }
}

/// Eigenvalues of `H H^*` for an arbitrary matrix.
pub fn spectrum_of(h: &CMatrix, normalization: Normalization) -> EigenSpectrum {
    let eig = hermitian_eigen(&h.gram());
    let raw: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let scale = match normalization {
        Normalization::SelfSum => {
            let total: f64 = raw.iter().sum();
            if total > 0.0 {
                (h.rows() * h.cols()) as f64 / total
            } else {
                1.0
            }
        }
        Normalization::RelativeTo(s) => s,
    };
    EigenSpectrum {
        values: raw.iter().map(|v| v * scale).collect(),
        normalization,
        scale,
    }
}

pub fn eigen_spectrum(h: &ChannelMatrix, normalization: Normalization) -> EigenSpectrum {
    spectrum_of(&h.entries, normalization)
}
