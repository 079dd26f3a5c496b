//! Spatial impulse response by inverse Fourier synthesis over the
//! propagating disk.
//!
//! The disk is parametrized by incidence angle `alpha` in `[0, pi/2]` and
//! azimuth `beta` in `[0, 2 pi)`:
//!
//! ```text
//! kx = k1 sin(alpha) cos(beta),  ky = k1 sin(alpha) sin(beta)
//! dkx dky / k1z = k1 sin(alpha) dalpha dbeta
//! ```
//!
//! so the `1/k1z` rim singularity of `H` disappears and the integrand is
//! smooth. `alpha` uses Gauss–Legendre nodes, `beta` the periodic trapezoid
//! rule or, because every material here is isotropic, the exact azimuthal
//! integral `2 pi J0(k1 rho sin(alpha))`.
//!
//! Cutting the spectrum at the rim of the disk leaves an endpoint
//! contribution at grazing incidence. It is of the same order as the
//! spherical wave itself (on axis the raw disk integral is
//! `(exp(i k1 z) - 1) / (i k1 z)` instead of `exp(i k1 z) / (i k1 z)`), and in
//! the full plane-wave expansion it is cancelled by the evanescent spectrum.
//! [`EdgeTaper::Smooth`] rolls the integrand off to zero over the grazing
//! band with the integral of a Kaiser window in `cos(alpha)`. On axis the
//! leftover error is the Fourier transform of that window at `k1 dz`, so the
//! Kaiser shape, which is near optimal for concentrating a band-limited
//! window, keeps it small down to separations of a few wavelengths. The
//! stationary-phase region below the start of the band is untouched. Use
//! [`EdgeTaper::None`] for the raw truncated integral.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::gauss_legendre;
use crate::special::bessel_j0;
use crate::spectrum::{FieldComponent, ResponseKernel, SceneConfig};

/// Nodes per oscillation period for both angular variables.
pub const OVERSAMPLING: f64 = 6.0;

/// Default start of the grazing roll-off, in degrees of incidence.
pub const DEFAULT_TAPER_START_DEG: f64 = 60.0;

/// Node ceiling for [`convergence_study`].
pub const DEFAULT_NODE_CEILING: usize = 1 << 16;

const MIN_ALPHA_NODES: usize = 2;
const MIN_BETA_NODES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AzimuthRule {
    /// Periodic trapezoid rule with `n_beta` nodes.
    Trapezoid,
    /// Closed-form azimuthal integral; `n_beta` is ignored.
    Bessel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeTaper {
    None,
    /// Window equal to one up to `start` (radians) and rolling off smoothly
    /// to zero at grazing incidence.
    Smooth { start: f64 },
}

impl Default for EdgeTaper {
    fn default() -> Self {
        EdgeTaper::Smooth {
            start: DEFAULT_TAPER_START_DEG.to_radians(),
        }
    }
}

impl EdgeTaper {
    #[inline]
    fn weight(self, alpha: f64) -> f64 {
        match self {
            EdgeTaper::None => 1.0,
            EdgeTaper::Smooth { start } => {
                let t0 = start.cos();
                let t = alpha.cos();
                if alpha <= start || t >= t0 {
                    return 1.0;
                }
                if t <= 0.0 {
                    return 0.0;
                }
                kaiser_cdf(t / t0, TAPER_SHARPNESS)
            }
        }
    }
}

/// Kaiser shape parameter of the roll-off.
const TAPER_SHARPNESS: f64 = 12.0;

/// Integral of the Kaiser window `I0(beta sqrt(1 - v^2))` over `[-1, 2u - 1]`,
/// normalized to one at `u = 1`. Expands `I0` in powers of `1 - v^2` and uses
/// `J_k(v) = (v (1 - v^2)^k + 2k J_{k-1}(v)) / (2k + 1)` for the integrals of
/// those powers; every term is positive.
fn kaiser_cdf(u: f64, beta: f64) -> f64 {
    let v = 2.0 * u - 1.0;
    let q = 1.0 - v * v;
    let quarter = 0.25 * beta * beta;
    let (mut j, mut j_full) = (v + 1.0, 2.0);
    let (mut coef, mut qk) = (1.0, 1.0);
    let (mut num, mut den) = (j, j_full);
    for k in 1..200 {
        let kf = k as f64;
        qk *= q;
        j = (v * qk + 2.0 * kf * j) / (2.0 * kf + 1.0);
        j_full = 2.0 * kf * j_full / (2.0 * kf + 1.0);
        coef *= quarter / (kf * kf);
        num += coef * j;
        den += coef * j_full;
        if coef * j_full < 1e-17 * den && kf > quarter.sqrt() {
            break;
        }
    }
    (num / den).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n_alpha: usize,
    pub n_beta: usize,
    pub azimuth: AzimuthRule,
    pub taper: EdgeTaper,
}

impl QuadratureSpec {
    /// Tapered rule with the closed-form azimuthal integral.
    pub fn new(n_alpha: usize, n_beta: usize) -> Result<Self> {
        let q = QuadratureSpec {
            n_alpha,
            n_beta,
            azimuth: AzimuthRule::Bessel,
            taper: EdgeTaper::default(),
        };
        q.validate()?;
        Ok(q)
    }

    pub fn with_azimuth(self, azimuth: AzimuthRule) -> Self {
        QuadratureSpec { azimuth, ..self }
    }

    pub fn with_taper(self, taper: EdgeTaper) -> Self {
        QuadratureSpec { taper, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_alpha < MIN_ALPHA_NODES {
            return Err(Error::domain(format!("n_alpha must be >= 2, got {}", self.n_alpha)));
        }
        if self.n_beta < MIN_BETA_NODES {
            return Err(Error::domain(format!("n_beta must be >= 4, got {}", self.n_beta)));
        }
        if let EdgeTaper::Smooth { start } = self.taper {
            if !(0.0..FRAC_PI_2).contains(&start) {
                return Err(Error::domain(format!(
                    "taper start must lie in [0, pi/2), got {start}"
                )));
            }
        }
        Ok(())
    }

    /// Same rule with both node counts doubled.
    pub fn doubled(self) -> Self {
        QuadratureSpec {
            n_alpha: 2 * self.n_alpha,
            n_beta: 2 * self.n_beta,
            ..self
        }
    }

    fn covers(&self, required: &QuadratureSpec) -> bool {
        self.n_alpha >= required.n_alpha
            && (self.azimuth == AzimuthRule::Bessel || self.n_beta >= required.n_beta)
    }
}

/// Transverse separation `r - s` between receiver and source.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpatialLag {
    pub x: f64,
    pub y: f64,
}

impl SpatialLag {
    pub fn new(x: f64, y: f64) -> Self {
        SpatialLag { x, y }
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseResult {
    pub value: Complex64,
    /// The rule has fewer nodes than the oscillation budget asks for.
    pub under_resolved: bool,
}

/// Node counts for an integrand whose phase spans `dz_total` of
/// longitudinal path and `max_lag` of transverse lag.
pub fn estimate_nodes(scene: &SceneConfig, max_lag: f64, dz_total: f64) -> QuadratureSpec {
    let k1 = scene.medium.kappa1;
    let max_lag = max_lag.abs();
    let dz_total = dz_total.abs();
    let alpha_periods = k1 * (dz_total + max_lag) / TAU;
    // exp(i a cos(beta)) sweeps 2a of phase twice per turn
    let beta_periods = 2.0 * k1 * max_lag / PI;
    let n_alpha = round_up_coarse((OVERSAMPLING * alpha_periods).ceil() as usize)
        .max(MIN_ALPHA_NODES);
    let n_beta = round_up_coarse((OVERSAMPLING * beta_periods).ceil() as usize)
        .max(MIN_BETA_NODES);
    QuadratureSpec {
        n_alpha,
        n_beta,
        azimuth: AzimuthRule::Bessel,
        taper: EdgeTaper::default(),
    }
}

/// Rounds up to a granularity of about 1/16 of the magnitude so nearby
/// geometries share cached node tables.
fn round_up_coarse(n: usize) -> usize {
    if n <= 16 {
        return n;
    }
    let step = n.next_power_of_two() / 16;
    n.div_ceil(step) * step
}

/// `h(x, y; r_z, s_z)` for the scene's source and receiver planes.
pub fn synthesize_impulse(
    scene: &SceneConfig,
    comp: FieldComponent,
    lag: SpatialLag,
    q: &QuadratureSpec,
) -> Result<ImpulseResult> {
    q.validate()?;
    let kernel = ResponseKernel::new(scene, comp)?;
    let k1 = scene.medium.kappa1;
    let rho = lag.radius();
    let rule = gauss_legendre(q.n_alpha);

    let sum = match q.azimuth {
        AzimuthRule::Bessel => {
            let mut acc = Complex64::new(0.0, 0.0);
            for (alpha, w) in rule.mapped(0.0, FRAC_PI_2) {
                let taper = q.taper.weight(alpha);
                if taper == 0.0 {
                    continue;
                }
                let (s, c) = alpha.sin_cos();
                let kt = k1 * s;
                let reg = kernel.regular(k1 * c, kt * kt);
                acc += reg * (w * taper * s * TAU * bessel_j0(kt * rho));
            }
            acc
        }
        AzimuthRule::Trapezoid => {
            let h = TAU / q.n_beta as f64;
            let dirs: Vec<f64> = (0..q.n_beta)
                .map(|j| {
                    let (sb, cb) = (j as f64 * h).sin_cos();
                    lag.x * cb + lag.y * sb
                })
                .collect();
            let nodes: Vec<(f64, f64)> = rule.mapped(0.0, FRAC_PI_2).collect();
            // fixed chunking keeps the summation order reproducible
            let partials: Vec<Complex64> = nodes
                .par_chunks(64)
                .map(|chunk| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &(alpha, w) in chunk {
                        let taper = q.taper.weight(alpha);
                        if taper == 0.0 {
                            continue;
                        }
                        let (s, c) = alpha.sin_cos();
                        let kt = k1 * s;
                        let reg = kernel.regular(k1 * c, kt * kt);
                        let ring: Complex64 =
                            dirs.iter().map(|&d| Complex64::cis(kt * d)).sum::<Complex64>() * h;
                        acc += reg * ring * (w * taper * s);
                    }
                    acc
                })
                .collect();
            partials.into_iter().sum()
        }
    };

    let value = sum * (k1 / (TAU * TAU));
    let required = estimate_nodes(scene, rho, scene.path_length(comp));
    Ok(ImpulseResult {
        value,
        under_resolved: !q.covers(&required),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n_alpha: usize,
    pub n_beta: usize,
    pub value: Complex64,
    /// Relative change from the previous row.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub rows: Vec<ConvergenceRow>,
    pub converged: bool,
}

impl ConvergenceTrace {
    pub fn last(&self) -> Option<&ConvergenceRow> {
        self.rows.last()
    }

    /// CSV with columns `n_alpha,n_beta,re,im,delta`; the first row has an
    /// empty delta.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n_alpha,n_beta,re,im,delta\n");
        for r in &self.rows {
            let delta = r.delta.map(|d| d.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.n_alpha, r.n_beta, r.value.re, r.value.im, delta
            );
        }
        out
    }
}

/// Relative change that ends a [`convergence_study`].
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;

/// Doubles both node counts, starting at an eighth of the estimated budget,
/// until two successive values agree to [`CONVERGENCE_TOLERANCE`] or
/// `n_alpha` would exceed `ceiling`.
pub fn convergence_study(
    scene: &SceneConfig,
    comp: FieldComponent,
    lag: SpatialLag,
    azimuth: AzimuthRule,
    ceiling: usize,
) -> Result<ConvergenceTrace> {
    let budget = estimate_nodes(scene, lag.radius(), scene.path_length(comp));
    let mut q = QuadratureSpec {
        n_alpha: (budget.n_alpha / 8).max(MIN_ALPHA_NODES),
        n_beta: (budget.n_beta / 8).max(MIN_BETA_NODES),
        ..budget
    }
    .with_azimuth(azimuth);
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut converged = false;
    while q.n_alpha <= ceiling {
        let value = synthesize_impulse(scene, comp, lag, &q)?.value;
        let delta = rows
            .last()
            .map(|prev| (value - prev.value).norm() / value.norm().max(f64::MIN_POSITIVE));
        rows.push(ConvergenceRow {
            n_alpha: q.n_alpha,
            n_beta: q.n_beta,
            value,
            delta,
        });
        if matches!(delta, Some(d) if d < CONVERGENCE_TOLERANCE) {
            converged = true;
            break;
        }
        q = q.doubled();
    }
    Ok(ConvergenceTrace { rows, converged })
}
