//! Wavenumber-domain channel response between a source plane and a receiver
//! plane in front of (or behind) the reflecting surface.
//!
//! Phasors follow `exp(+i k . r)` for upgoing propagation. Evanescent
//! samples are excluded by the disk indicator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::Medium;

/// Minimum source-to-surface separation, in wavelengths.
pub const SEPARATION_GUARD_WAVELENGTHS: f64 = 10.0;

/// `sqrt(kappa^2 - kx^2 - ky^2)`, defined on the closed disk of radius `kappa`.
pub fn kappa_z(kappa: f64, kx: f64, ky: f64) -> Result<f64> {
    let arg = kappa * kappa - kx * kx - ky * ky;
    if !(arg >= 0.0) {
        return Err(Error::domain(format!(
            "({kx}, {ky}) lies outside the disk of radius {kappa}"
        )));
    }
    Ok(arg.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldComponent {
    /// Receiver below the source: downgoing incident wave plus reflection.
    DowngoingLosPlusReflection,
    /// Receiver above the source and in front of the surface.
    LosPlusReflection,
    LosOnly,
    ReflectionOnly,
    /// Receiver behind the surface.
    Transmission,
}

impl FieldComponent {
    pub fn name(self) -> &'static str {
        match self {
            FieldComponent::DowngoingLosPlusReflection => "downgoing_los_plus_reflection",
            FieldComponent::LosPlusReflection => "los_plus_reflection",
            FieldComponent::LosOnly => "los_only",
            FieldComponent::ReflectionOnly => "reflection_only",
            FieldComponent::Transmission => "transmission",
        }
    }
}

/// A point of the propagating disk with its longitudinal wavenumbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavenumberSample {
    pub kx: f64,
    pub ky: f64,
    pub k1z: f64,
    /// `None` when the right half-space is a perfect conductor.
    pub k2z: Option<f64>,
}

impl WavenumberSample {
    pub fn new(medium: &Medium, kx: f64, ky: f64) -> Result<Self> {
        let k1z = kappa_z(medium.kappa1, kx, ky)?;
        let k2z = match medium.kappa2().finite() {
            Some(k2) => Some(kappa_z(k2, kx, ky)?),
            None => None,
        };
        Ok(WavenumberSample { kx, ky, k1z, k2z })
    }
}

/// Planar geometry: surface at `z = surface_z`, point source on the plane
/// `z = source_z` inside a sphere of radius `source_radius`, receiver on
/// `z = receiver_z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub medium: Medium,
    pub surface_z: f64,
    pub source_z: f64,
    pub receiver_z: f64,
    pub source_radius: f64,
}

impl SceneConfig {
    pub fn new(
        medium: Medium,
        surface_z: f64,
        source_z: f64,
        receiver_z: f64,
        source_radius: f64,
    ) -> Result<Self> {
        let scene = SceneConfig {
            medium,
            surface_z,
            source_z,
            receiver_z,
            source_radius,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.surface_z, self.source_z, self.receiver_z, self.source_radius];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::scene("geometry must be finite"));
        }
        if self.source_radius < 0.0 {
            return Err(Error::scene("source radius R0 must be >= 0"));
        }
        if !(self.source_z < self.surface_z) {
            return Err(Error::scene(format!(
                "source plane s_z = {} must lie left of the surface d1 = {}",
                self.source_z, self.surface_z
            )));
        }
        let guard = SEPARATION_GUARD_WAVELENGTHS * self.medium.wavelength();
        if self.surface_z - self.source_z < guard {
            return Err(Error::scene(format!(
                "source-to-surface separation d1 - s_z = {} m is below the {} wavelength guard ({} m)",
                self.surface_z - self.source_z,
                SEPARATION_GUARD_WAVELENGTHS,
                guard
            )));
        }
        if !(self.source_radius < self.surface_z - self.source_z) {
            return Err(Error::scene("source sphere must not reach the surface (R0 < d1)"));
        }
        Ok(())
    }

    /// Same geometry with a different receiver plane.
    pub fn with_receiver_z(&self, receiver_z: f64) -> Self {
        SceneConfig {
            receiver_z,
            ..self.clone()
        }
    }

    pub fn with_medium(&self, medium: Medium) -> Self {
        SceneConfig {
            medium,
            ..self.clone()
        }
    }

    /// Checks that `comp` is one of the cases valid at this receiver plane.
    pub fn check_component(&self, comp: FieldComponent) -> Result<()> {
        let dz = self.receiver_z - self.source_z;
        let r0 = self.source_radius;
        let left = self.receiver_z <= self.surface_z;
        let ok = match comp {
            FieldComponent::DowngoingLosPlusReflection => dz < -r0,
            FieldComponent::LosPlusReflection => dz > r0 && left,
            FieldComponent::LosOnly | FieldComponent::ReflectionOnly => dz.abs() > r0 && left,
            FieldComponent::Transmission => self.receiver_z >= self.surface_z,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::usage(format!(
                "component {} is not defined for r_z = {}, s_z = {}, d1 = {}, R0 = {}",
                comp.name(),
                self.receiver_z,
                self.source_z,
                self.surface_z,
                r0
            )))
        }
    }

    /// Phase bookkeeping length of `comp`: the distance over which the
    /// integrand accumulates `kappa1 * k1z / kappa1` phase. Used to size
    /// quadrature rules.
    pub fn path_length(&self, comp: FieldComponent) -> f64 {
        let direct = (self.receiver_z - self.source_z).abs();
        let image = 2.0 * self.surface_z - self.receiver_z - self.source_z;
        match comp {
            FieldComponent::LosOnly => direct,
            FieldComponent::ReflectionOnly => image,
            FieldComponent::LosPlusReflection | FieldComponent::DowngoingLosPlusReflection => {
                direct.max(image)
            }
            FieldComponent::Transmission => {
                let n = self.medium.material.refractive_index().unwrap_or(1.0);
                (self.surface_z - self.source_z) + n * (self.receiver_z - self.surface_z)
            }
        }
    }
}

/// Precomputed, validated evaluator of `k1z * H` for one scene and
/// component. Multiplying by `k1z` removes the edge singularity; the
/// quadrature supplies the matching Jacobian.
#[derive(Debug, Clone)]
pub(crate) struct ResponseKernel<'a> {
    scene: &'a SceneConfig,
    comp: FieldComponent,
    prefactor: f64,
}

impl<'a> ResponseKernel<'a> {
    pub(crate) fn new(scene: &'a SceneConfig, comp: FieldComponent) -> Result<Self> {
        scene.check_component(comp)?;
        let m = &scene.medium;
        Ok(ResponseKernel {
            scene,
            comp,
            prefactor: 0.5 * m.kappa1 * m.eta1,
        })
    }

    /// `k1z * H(kx, ky)` for an in-disk sample with `kt2 = kx^2 + ky^2`.
    #[inline]
    pub(crate) fn regular(&self, k1z: f64, kt2: f64) -> Complex64 {
        let s = self.scene;
        let rz = s.receiver_z;
        let sz = s.source_z;
        let d1 = s.surface_z;
        let p = self.prefactor;
        let reflected = || {
            let r = s.medium.fresnel_in_disk(k1z, kt2).reflection;
            Complex64::from_polar(p * r, -k1z * (rz + sz - 2.0 * d1))
        };
        match self.comp {
            FieldComponent::LosOnly => Complex64::from_polar(p, k1z * (rz - sz).abs()),
            FieldComponent::ReflectionOnly => reflected(),
            FieldComponent::LosPlusReflection => {
                Complex64::from_polar(p, k1z * (rz - sz)) + reflected()
            }
            FieldComponent::DowngoingLosPlusReflection => {
                Complex64::from_polar(p, -k1z * (rz - sz)) + reflected()
            }
            FieldComponent::Transmission => {
                let t = s.medium.fresnel_in_disk(k1z, kt2).transmission;
                if t == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let k2 = s
                    .medium
                    .kappa2()
                    .finite()
                    .expect("finite kappa2 whenever T is nonzero");
                let k2z = (k2 * k2 - kt2).max(0.0).sqrt();
                Complex64::from_polar(p * t, k1z * (d1 - sz) + k2z * (rz - d1))
            }
        }
    }
}

/// `H(kx, ky)` for the requested field component; exactly zero outside the
/// propagating disk.
pub fn wavenumber_response(
    scene: &SceneConfig,
    comp: FieldComponent,
    kx: f64,
    ky: f64,
) -> Result<Complex64> {
    let kernel = ResponseKernel::new(scene, comp)?;
    let k1 = scene.medium.kappa1;
    let kt2 = kx * kx + ky * ky;
    if !(kt2 <= k1 * k1) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let k1z = (k1 * k1 - kt2).sqrt();
    if k1z == 0.0 {
        return Err(Error::domain(
            "H is singular on the rim of the propagating disk (k1z = 0)",
        ));
    }
    Ok(kernel.regular(k1z, kt2) / k1z)
}
