//! Closed-form reference fields.
//!
//! The free-space impulse response follows from the plane-wave expansion of
//! a spherical wave:
//!
//! ```text
//! exp(i k1 r) / r = (i / 2 pi) ∬ exp(i (kx x + ky y + k1z |z|)) / k1z dkx dky
//! ```
//!
//! Combined with the `(k1 eta1 / 2) / k1z` amplitude of the spectrum and the
//! `1 / (2 pi)^2` of the inverse transform this gives
//! `-i k1 eta1 / (4 pi) * exp(i k1 r) / r`, in absolute terms.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::materials::Medium;
use crate::spectrum::SEPARATION_GUARD_WAVELENGTHS;

pub type Point3 = [f64; 3];

/// A field sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointField {
    pub position: Point3,
    pub value: Complex64,
}

fn distance(a: Point3, b: Point3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// `exp(i k1 |r|) / |r|`.
pub fn spherical_wave(kappa1: f64, r: Point3) -> Result<Complex64> {
    let dist = distance(r, [0.0; 3]);
    if !(dist > 0.0) {
        return Err(Error::domain("spherical wave is singular at the origin"));
    }
    Ok(Complex64::cis(kappa1 * dist) / dist)
}

/// `-i k1 eta1 / (4 pi)`: the constant linking the channel spectrum to a
/// unit spherical wave.
pub fn impulse_prefactor(medium: &Medium) -> Complex64 {
    Complex64::new(0.0, -medium.kappa1 * medium.eta1 / (4.0 * PI))
}

/// Free-space impulse response between source `s` and receiver `r`,
/// including the evanescent part of the spectrum.
pub fn los_impulse_oracle(medium: &Medium, r: Point3, s: Point3) -> Result<Complex64> {
    let dist = distance(r, s);
    let guard = SEPARATION_GUARD_WAVELENGTHS * medium.wavelength();
    if !(dist >= guard) {
        return Err(Error::domain(format!(
            "points {dist} m apart are closer than the {guard} m guard"
        )));
    }
    let rel = [r[0] - s[0], r[1] - s[1], r[2] - s[2]];
    Ok(impulse_prefactor(medium) * spherical_wave(medium.kappa1, rel)?)
}

/// Mirror of `s` in the plane `z = d1`.
pub fn image_point(s: Point3, d1: f64) -> Point3 {
    [s[0], s[1], 2.0 * d1 - s[2]]
}

/// Direct wave plus the negated wave from the mirrored source, which is the
/// exact field in front of a perfectly conducting plane.
pub fn image_field_oracle(medium: &Medium, r: Point3, s: Point3, d1: f64) -> Result<Complex64> {
    Ok(los_impulse_oracle(medium, r, s)? + image_reflection_oracle(medium, r, s, d1)?)
}

/// The reflected term alone.
pub fn image_reflection_oracle(medium: &Medium, r: Point3, s: Point3, d1: f64) -> Result<Complex64> {
    if !medium.material.is_perfect_conductor() {
        return Err(Error::usage(format!(
            "the image construction is exact only for a perfect conductor, not {}",
            medium.material.name
        )));
    }
    if !(s[2] < d1 && r[2] <= d1) {
        return Err(Error::usage("source and receiver must lie in front of the surface"));
    }
    Ok(-los_impulse_oracle(medium, r, image_point(s, d1))?)
}

/// Field sample of [`image_field_oracle`].
pub fn image_field_at(medium: &Medium, r: Point3, s: Point3, d1: f64) -> Result<PointField> {
    Ok(PointField {
        position: r,
        value: image_field_oracle(medium, r, s, d1)?,
    })
}

/// The LOS spectrum integrated over the propagating disk only, on axis:
///
/// ```text
/// (k1 eta1 / 2) / (2 pi)^2 * 2 pi * ∫_0^k1 exp(i u dz) du
///   = k1 eta1 / (4 pi) * (exp(i k1 dz) - 1) / (i dz)
/// ```
///
/// Reference for the untapered quadrature.
pub fn truncated_los_on_axis(medium: &Medium, dz: f64) -> Complex64 {
    let k1 = medium.kappa1;
    let dz = dz.abs();
    let c = k1 * medium.eta1 / (4.0 * PI);
    (Complex64::cis(k1 * dz) - 1.0) / Complex64::new(0.0, dz) * c
}
