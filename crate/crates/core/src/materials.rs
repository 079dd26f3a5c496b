//! Material properties of the reflecting half-space and the Fresnel
//! coefficients of an upgoing propagating plane wave hitting it.
//!
//! The left half-space is vacuum. The right half-space is either a lossless
//! dielectric, described by its refractive index and relative permeability,
//! or an ideal perfect conductor. Coefficients are real because every
//! catalog dielectric is optically denser than vacuum, so the longitudinal
//! wavenumber in the right half-space stays real over the whole propagating
//! disk.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s. Matches the rounding of the tabulated
/// building-material wavenumbers at 57.5 GHz.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Free-space wave impedance, ohm.
pub const FREE_SPACE_IMPEDANCE: f64 = 376.730_313_668;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaterialKind {
    Dielectric {
        refractive_index: f64,
        /// mu2 / mu1.
        permeability_ratio: f64,
    },
    PerfectConductor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub kind: MaterialKind,
}

impl Material {
    /// Nonmagnetic lossless dielectric.
    pub fn dielectric(name: impl Into<String>, refractive_index: f64) -> Result<Self> {
        Self::magnetic_dielectric(name, refractive_index, 1.0)
    }

    pub fn magnetic_dielectric(
        name: impl Into<String>,
        refractive_index: f64,
        permeability_ratio: f64,
    ) -> Result<Self> {
        if !refractive_index.is_finite() || refractive_index < 1.0 {
            return Err(Error::domain(format!(
                "refractive index must be finite and >= 1, got {refractive_index}"
            )));
        }
        if !permeability_ratio.is_finite() || permeability_ratio <= 0.0 {
            return Err(Error::domain(format!(
                "permeability ratio of a dielectric must be finite and > 0, got {permeability_ratio}"
            )));
        }
        Ok(Material {
            name: name.into(),
            kind: MaterialKind::Dielectric {
                refractive_index,
                permeability_ratio,
            },
        })
    }

    pub fn perfect_conductor() -> Self {
        Material {
            name: "perfect_conductor".into(),
            kind: MaterialKind::PerfectConductor,
        }
    }

    pub fn vacuum() -> Self {
        Material {
            name: "vacuum".into(),
            kind: MaterialKind::Dielectric {
                refractive_index: 1.0,
                permeability_ratio: 1.0,
            },
        }
    }

    pub fn concrete() -> Self {
        Self::table("concrete", 2.55)
    }

    pub fn floor_board() -> Self {
        Self::table("floor_board", 1.98)
    }

    pub fn plaster_board() -> Self {
        Self::table("plaster_board", 1.50)
    }

    fn table(name: &str, n: f64) -> Self {
        Material {
            name: name.into(),
            kind: MaterialKind::Dielectric {
                refractive_index: n,
                permeability_ratio: 1.0,
            },
        }
    }

    pub fn is_perfect_conductor(&self) -> bool {
        matches!(self.kind, MaterialKind::PerfectConductor)
    }

    /// `None` for the perfect conductor.
    pub fn refractive_index(&self) -> Option<f64> {
        match self.kind {
            MaterialKind::Dielectric {
                refractive_index, ..
            } => Some(refractive_index),
            MaterialKind::PerfectConductor => None,
        }
    }

    pub fn permeability_ratio(&self) -> f64 {
        match self.kind {
            MaterialKind::Dielectric {
                permeability_ratio, ..
            } => permeability_ratio,
            MaterialKind::PerfectConductor => 0.0,
        }
    }
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MaterialKind::PerfectConductor => write!(f, "{} (n2 = inf)", self.name),
            MaterialKind::Dielectric {
                refractive_index, ..
            } => write!(f, "{} (n2 = {refractive_index})", self.name),
        }
    }
}

/// The building materials tabulated at 57.5 GHz, plus vacuum.
pub fn material_catalog() -> Vec<Material> {
    vec![
        Material::perfect_conductor(),
        Material::concrete(),
        Material::floor_board(),
        Material::plaster_board(),
        Material::vacuum(),
    ]
}

/// Looks a material up by name in `catalog`, ignoring case and treating
/// `-`, `_` and spaces alike.
pub fn find_material<'a>(catalog: &'a [Material], name: &str) -> Option<&'a Material> {
    let key = normalize_name(name);
    catalog.iter().find(|m| normalize_name(&m.name) == key)
}

fn normalize_name(name: &str) -> String {
    name.trim()
        .chars()
        .map(|c| match c {
            '-' | ' ' => '_',
            c => c.to_ascii_lowercase(),
        })
        .collect()
}

/// Parses a material list, one `name n2` (or `name, n2`) pair per line.
/// `#` starts a comment. `inf` or `pec` as the index selects the perfect
/// conductor; an optional third column gives mu2/mu1.
pub fn parse_material_catalog(text: &str) -> Result<Vec<Material>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `name n2 [mu_ratio]`, got `{line}`"),
            });
        }
        let name = fields[0];
        let index = fields[1].to_ascii_lowercase();
        let material = if index == "inf" || index == "pec" {
            Material {
                name: name.into(),
                kind: MaterialKind::PerfectConductor,
            }
        } else {
            let n: f64 = index.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad refractive index `{}`", fields[1]),
            })?;
            let mu = match fields.get(2) {
                Some(s) => s.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad permeability ratio `{s}`"),
                })?,
                None => 1.0,
            };
            Material::magnetic_dielectric(name, n, mu).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?
        };
        out.push(material);
    }
    Ok(out)
}

/// Right-half-space wavenumber. The perfect conductor has no finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wavenumber {
    Finite(f64),
    Infinite,
}

impl Wavenumber {
    pub fn finite(self) -> Option<f64> {
        match self {
            Wavenumber::Finite(k) => Some(k),
            Wavenumber::Infinite => None,
        }
    }
}

/// `(kappa1, kappa2)` in rad/m at frequency `f` Hz.
pub fn wavenumbers(f: f64, material: &Material) -> Result<(f64, Wavenumber)> {
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::domain(format!("frequency must be positive, got {f}")));
    }
    let k1 = 2.0 * PI * f / SPEED_OF_LIGHT;
    let k2 = match material.kind {
        MaterialKind::Dielectric {
            refractive_index, ..
        } => Wavenumber::Finite(refractive_index * k1),
        MaterialKind::PerfectConductor => Wavenumber::Infinite,
    };
    Ok((k1, k2))
}

/// Vacuum on the left of the surface, `material` on the right, at a fixed
/// frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub frequency: f64,
    pub kappa1: f64,
    pub eta1: f64,
    pub material: Material,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelCoefficients {
    pub reflection: f64,
    pub transmission: f64,
}

impl Medium {
    pub fn new(frequency: f64, material: Material) -> Result<Self> {
        let (kappa1, _) = wavenumbers(frequency, &material)?;
        Ok(Medium {
            frequency,
            kappa1,
            eta1: FREE_SPACE_IMPEDANCE,
            material,
        })
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency
    }

    pub fn kappa2(&self) -> Wavenumber {
        match self.material.kind {
            MaterialKind::Dielectric {
                refractive_index, ..
            } => Wavenumber::Finite(refractive_index * self.kappa1),
            MaterialKind::PerfectConductor => Wavenumber::Infinite,
        }
    }

    /// Same frequency, different right half-space.
    pub fn with_material(&self, material: Material) -> Self {
        Medium {
            material,
            ..self.clone()
        }
    }

    /// Reflection and transmission coefficients at transverse wavenumber
    /// `(kx, ky)`, which must lie in the propagating disk.
    pub fn fresnel(&self, kx: f64, ky: f64) -> Result<FresnelCoefficients> {
        let kt2 = kx * kx + ky * ky;
        let k1 = self.kappa1;
        if !(kt2 <= k1 * k1) {
            return Err(Error::domain(format!(
                "transverse wavenumber ({kx}, {ky}) lies outside the propagating disk of radius {k1}"
            )));
        }
        let k1z = (k1 * k1 - kt2).max(0.0).sqrt();
        Ok(self.fresnel_in_disk(k1z, kt2))
    }

    /// Coefficients from a precomputed `k1z` and squared transverse
    /// wavenumber. The caller guarantees the sample is in the disk.
    #[inline]
    pub(crate) fn fresnel_in_disk(&self, k1z: f64, kt2: f64) -> FresnelCoefficients {
        match self.material.kind {
            MaterialKind::PerfectConductor => FresnelCoefficients {
                reflection: -1.0,
                transmission: 0.0,
            },
            MaterialKind::Dielectric {
                refractive_index,
                permeability_ratio: mu,
            } => {
                let k2z = if refractive_index == 1.0 {
                    k1z
                } else {
                    let k2 = refractive_index * self.kappa1;
                    (k2 * k2 - kt2).max(0.0).sqrt()
                };
                let den = mu * k1z + k2z;
                if den == 0.0 {
                    // grazing incidence on vacuum
                    return FresnelCoefficients {
                        reflection: 0.0,
                        transmission: 1.0,
                    };
                }
                FresnelCoefficients {
                    reflection: (mu * k1z - k2z) / den,
                    transmission: 2.0 * mu * k1z / den,
                }
            }
        }
    }

    pub fn fresnel_reflection(&self, kx: f64, ky: f64) -> Result<f64> {
        self.fresnel(kx, ky).map(|c| c.reflection)
    }

    pub fn fresnel_transmission(&self, kx: f64, ky: f64) -> Result<f64> {
        self.fresnel(kx, ky).map(|c| c.transmission)
    }

    /// Reflection coefficient at incidence angle `theta` (radians from the
    /// surface normal).
    pub fn reflection_at_angle(&self, theta: f64) -> Result<f64> {
        self.fresnel_reflection(self.kappa1 * theta.sin(), 0.0)
    }
}
