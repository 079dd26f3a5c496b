//! Flat `key = value` experiment configuration with units in the key names.
//!
//! ```text
//! # defaults
//! frequency_ghz = 57.5
//! d1_m = 15
//! range_m = 10
//! antennas = 8
//! materials = perfect_conductor, concrete, floor_board, plaster_board
//! snr_grid_db = -10:2:40
//! normalization = relative_to_los
//! material.brick = 1.9
//! ```
//!
//! `snr_grid_db` takes either a comma separated list or `start:step:stop`.
//! `material.<name> = n2 [mu2/mu1]` (or `pec`) adds a material that can then
//! be listed in `materials`.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use surfmimo::materials::{find_material, parse_material_catalog, SPEED_OF_LIGHT};
use surfmimo::quadrature::{AzimuthRule, DEFAULT_TAPER_START_DEG};
use surfmimo::spectrum::SEPARATION_GUARD_WAVELENGTHS;
use surfmimo::{material_catalog, FieldComponent, Material, MaterialKind, Medium, SceneConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("scene guard violated: {0}")]
    Scene(#[source] surfmimo::Error),
    #[error("JSON config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    SelfSum,
    /// Reflected spectra share the scale that SelfSum-normalizes the LOS
    /// matrix of the same array geometry, so their power loss stays visible.
    RelativeToLos,
}

impl NormalizationMode {
    pub fn name(self) -> &'static str {
        match self {
            NormalizationMode::SelfSum => "self_sum",
            NormalizationMode::RelativeToLos => "relative_to_los",
        }
    }
}

impl FromStr for NormalizationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "self_sum" => Ok(NormalizationMode::SelfSum),
            "relative_to_los" => Ok(NormalizationMode::RelativeToLos),
            _ => Err(format!("expected self_sum or relative_to_los, got `{s}`")),
        }
    }
}

/// Antenna spacing: Rayleigh or SNR-dependent, at the direct range `D` or
/// the equivalent range `De = 2 d1 - D` of the reflected path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpacingRule {
    #[serde(rename = "rayleigh_D")]
    RayleighD,
    #[serde(rename = "rayleigh_De")]
    RayleighDe,
    #[serde(rename = "snr_dependent_D")]
    SnrDependentD,
    #[serde(rename = "snr_dependent_De")]
    SnrDependentDe,
}

impl SpacingRule {
    pub const ALL: [SpacingRule; 4] = [
        SpacingRule::RayleighD,
        SpacingRule::RayleighDe,
        SpacingRule::SnrDependentD,
        SpacingRule::SnrDependentDe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpacingRule::RayleighD => "rayleigh_D",
            SpacingRule::RayleighDe => "rayleigh_De",
            SpacingRule::SnrDependentD => "snr_dependent_D",
            SpacingRule::SnrDependentDe => "snr_dependent_De",
        }
    }

    pub fn snr_dependent(self) -> bool {
        matches!(self, SpacingRule::SnrDependentD | SpacingRule::SnrDependentDe)
    }

    pub fn equivalent_range(self) -> bool {
        matches!(self, SpacingRule::RayleighDe | SpacingRule::SnrDependentDe)
    }
}

impl fmt::Display for SpacingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpacingRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SpacingRule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| {
                format!("expected one of rayleigh_D, rayleigh_De, snr_dependent_D, snr_dependent_De, got `{s}`")
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub frequency_ghz: f64,
    /// Surface plane `d1`.
    pub d1_m: f64,
    /// Array separation `D`.
    pub range_m: f64,
    pub antennas: usize,
    pub source_radius_m: f64,
    pub materials: Vec<String>,
    pub custom_materials: Vec<Material>,
    pub snr_grid_db: Vec<f64>,
    pub normalization: NormalizationMode,
    /// Overrides the experiment's spacing for the reflected channels.
    pub spacing_rule: Option<SpacingRule>,
    pub n_alpha: Option<usize>,
    pub n_beta: Option<usize>,
    pub azimuth: AzimuthRule,
    pub taper_start_deg: f64,
    pub fresnel_step_deg: f64,
    pub validate_points: usize,
    pub validate_max_lag_m: f64,
    pub validate_dz_max_m: f64,
    pub export_matrices: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            frequency_ghz: 57.5,
            d1_m: 15.0,
            range_m: 10.0,
            antennas: 8,
            source_radius_m: 0.0,
            materials: ["perfect_conductor", "concrete", "floor_board", "plaster_board"]
                .map(String::from)
                .to_vec(),
            custom_materials: Vec::new(),
            snr_grid_db: (0..=25).map(|k| -10.0 + 2.0 * k as f64).collect(),
            normalization: NormalizationMode::RelativeToLos,
            spacing_rule: None,
            n_alpha: None,
            n_beta: None,
            azimuth: AzimuthRule::Bessel,
            taper_start_deg: DEFAULT_TAPER_START_DEG,
            fresnel_step_deg: 1.0,
            validate_points: 20,
            validate_max_lag_m: 1.0,
            validate_dz_max_m: 20.0,
            export_matrices: false,
        }
    }
}

const KEYS: &[&str] = &[
    "frequency_ghz",
    "d1_m",
    "range_m",
    "antennas",
    "source_radius_m",
    "materials",
    "snr_grid_db",
    "normalization",
    "spacing_rule",
    "n_alpha",
    "n_beta",
    "azimuth",
    "taper_start_deg",
    "fresnel_step_deg",
    "validate_points",
    "validate_max_lag_m",
    "validate_dz_max_m",
    "export_matrices",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| invalid(key, format!("`{value}`: {e}")))
}

fn parse_snr_grid(value: &str) -> Result<Vec<f64>, ConfigError> {
    let key = "snr_grid_db";
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').map(str::trim).collect();
        let [start, step, stop] = parts[..] else {
            return Err(invalid(key, "range form is start:step:stop"));
        };
        let (start, step, stop): (f64, f64, f64) =
            (parse_num(key, start)?, parse_num(key, step)?, parse_num(key, stop)?);
        if !(step > 0.0 && step.is_finite()) || !(start <= stop) {
            return Err(invalid(key, "need step > 0 and start <= stop"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..n).map(|k| start + step * k as f64).collect());
    }
    value
        .split(',')
        .map(|v| parse_num(key, v.trim()))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(invalid(key, format!("expected true or false, got `{value}`"))),
    }
}

fn parse_azimuth(value: &str) -> Result<AzimuthRule, ConfigError> {
    match value {
        "bessel" => Ok(AzimuthRule::Bessel),
        "trapezoid" => Ok(AzimuthRule::Trapezoid),
        _ => Err(invalid("azimuth", format!("expected bessel or trapezoid, got `{value}`"))),
    }
}

fn azimuth_name(rule: AzimuthRule) -> &'static str {
    match rule {
        AzimuthRule::Bessel => "bessel",
        AzimuthRule::Trapezoid => "trapezoid",
    }
}

impl ExperimentConfig {
    /// Parses the text form on top of the defaults and validates the
    /// result.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("expected `key = value`, got `{body}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            seen.push(key.to_string());

            if let Some(name) = key.strip_prefix("material.") {
                let parsed = parse_material_catalog(&format!("{name} {value}"))
                    .map_err(|e| invalid(key, e.to_string()))?;
                cfg.custom_materials.extend(parsed);
                continue;
            }
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "frequency_ghz" => self.frequency_ghz = parse_num(key, value)?,
            "d1_m" => self.d1_m = parse_num(key, value)?,
            "range_m" => self.range_m = parse_num(key, value)?,
            "antennas" => self.antennas = parse_num(key, value)?,
            "source_radius_m" => self.source_radius_m = parse_num(key, value)?,
            "materials" => {
                self.materials = value
                    .split(',')
                    .map(|m| m.trim().to_string())
                    .filter(|m| !m.is_empty())
                    .collect()
            }
            "snr_grid_db" => self.snr_grid_db = parse_snr_grid(value)?,
            "normalization" => self.normalization = value.parse().map_err(|e| invalid(key, e))?,
            "spacing_rule" => {
                self.spacing_rule = match value {
                    "" | "default" => None,
                    v => Some(v.parse().map_err(|e| invalid(key, e))?),
                }
            }
            "n_alpha" => self.n_alpha = Some(parse_num(key, value)?),
            "n_beta" => self.n_beta = Some(parse_num(key, value)?),
            "azimuth" => self.azimuth = parse_azimuth(value)?,
            "taper_start_deg" => self.taper_start_deg = parse_num(key, value)?,
            "fresnel_step_deg" => self.fresnel_step_deg = parse_num(key, value)?,
            "validate_points" => self.validate_points = parse_num(key, value)?,
            "validate_max_lag_m" => self.validate_max_lag_m = parse_num(key, value)?,
            "validate_dz_max_m" => self.validate_dz_max_m = parse_num(key, value)?,
            "export_matrices" => self.export_matrices = parse_bool(key, value)?,
            _ => unreachable!("key list and setter disagree on `{key}`"),
        }
        Ok(())
    }

    /// Takes the `config` echoed in a result file's provenance, or a bare
    /// config object.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let node = value
            .get("provenance")
            .and_then(|p| p.get("config"))
            .unwrap_or(&value);
        let cfg: ExperimentConfig = serde_json::from_value(node.clone())?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// JSON if the file starts with `{`, the text form otherwise.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if text.trim_start().starts_with('{') {
            Self::from_json(&text)
        } else {
            Self::from_text(&text)
        }
    }

    /// Canonical text form; parsing it gives back an identical config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("frequency_ghz", self.frequency_ghz.to_string());
        kv("d1_m", self.d1_m.to_string());
        kv("range_m", self.range_m.to_string());
        kv("antennas", self.antennas.to_string());
        kv("source_radius_m", self.source_radius_m.to_string());
        kv("materials", self.materials.join(", "));
        let grid: Vec<String> = self.snr_grid_db.iter().map(f64::to_string).collect();
        kv("snr_grid_db", grid.join(", "));
        kv("normalization", self.normalization.name().to_string());
        kv(
            "spacing_rule",
            self.spacing_rule.map_or("default", SpacingRule::name).to_string(),
        );
        if let Some(n) = self.n_alpha {
            kv("n_alpha", n.to_string());
        }
        if let Some(n) = self.n_beta {
            kv("n_beta", n.to_string());
        }
        kv("azimuth", azimuth_name(self.azimuth).to_string());
        kv("taper_start_deg", self.taper_start_deg.to_string());
        kv("fresnel_step_deg", self.fresnel_step_deg.to_string());
        kv("validate_points", self.validate_points.to_string());
        kv("validate_max_lag_m", self.validate_max_lag_m.to_string());
        kv("validate_dz_max_m", self.validate_dz_max_m.to_string());
        kv("export_matrices", self.export_matrices.to_string());
        for m in &self.custom_materials {
            let value = match m.kind {
                MaterialKind::PerfectConductor => "pec".to_string(),
                MaterialKind::Dielectric {
                    refractive_index,
                    permeability_ratio,
                } if permeability_ratio == 1.0 => refractive_index.to_string(),
                MaterialKind::Dielectric {
                    refractive_index,
                    permeability_ratio,
                } => format!("{refractive_index} {permeability_ratio}"),
            };
            kv(&format!("material.{}", m.name), value);
        }
        out
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_ghz * 1e9
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz()
    }

    /// `De = 2 d1 - D`.
    pub fn equivalent_range(&self) -> f64 {
        2.0 * self.d1_m - self.range_m
    }

    /// Custom materials first, then the built-in catalog.
    pub fn resolve_material(&self, name: &str) -> Result<Material, ConfigError> {
        find_material(&self.custom_materials, name)
            .cloned()
            .or_else(|| find_material(&material_catalog(), name).cloned())
            .ok_or_else(|| invalid("materials", format!("unknown material `{name}`")))
    }

    pub fn resolved_materials(&self) -> Result<Vec<Material>, ConfigError> {
        self.materials.iter().map(|n| self.resolve_material(n)).collect()
    }

    /// The scene of the reflected channel for `material`.
    pub fn scene(&self, material: Material) -> Result<SceneConfig, ConfigError> {
        let medium = Medium::new(self.frequency_hz(), material).map_err(ConfigError::Scene)?;
        SceneConfig::new(medium, self.d1_m, 0.0, self.range_m, self.source_radius_m)
            .map_err(ConfigError::Scene)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(key, format!("must be positive and finite, got {v}")))
            }
        };
        positive("frequency_ghz", self.frequency_ghz)?;
        positive("d1_m", self.d1_m)?;
        positive("range_m", self.range_m)?;
        positive("fresnel_step_deg", self.fresnel_step_deg)?;
        positive("validate_dz_max_m", self.validate_dz_max_m)?;
        if !(self.source_radius_m.is_finite() && self.source_radius_m >= 0.0) {
            return Err(invalid("source_radius_m", "must be >= 0"));
        }
        if !(self.validate_max_lag_m.is_finite() && self.validate_max_lag_m >= 0.0) {
            return Err(invalid("validate_max_lag_m", "must be >= 0"));
        }
        if self.antennas == 0 {
            return Err(invalid("antennas", "need at least one antenna"));
        }
        if self.materials.is_empty() {
            return Err(invalid("materials", "list is empty"));
        }
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(invalid("snr_grid_db", "need at least one finite SNR"));
        }
        if self.fresnel_step_deg > 90.0 {
            return Err(invalid("fresnel_step_deg", "must not exceed 90"));
        }
        if self.validate_points < 2 {
            return Err(invalid("validate_points", "need at least 2 points"));
        }
        if !(0.0..90.0).contains(&self.taper_start_deg) {
            return Err(invalid("taper_start_deg", "must lie in [0, 90)"));
        }
        if self.n_alpha.is_some_and(|n| n < 2) {
            return Err(invalid("n_alpha", "must be >= 2"));
        }
        if self.n_beta.is_some_and(|n| n < 4) {
            return Err(invalid("n_beta", "must be >= 4"));
        }
        let guard = SEPARATION_GUARD_WAVELENGTHS * self.wavelength();
        if self.validate_dz_max_m < guard {
            return Err(invalid(
                "validate_dz_max_m",
                format!("must be at least {SEPARATION_GUARD_WAVELENGTHS} wavelengths ({guard} m)"),
            ));
        }

        for m in self.resolved_materials()? {
            let scene = self.scene(m)?;
            scene
                .check_component(FieldComponent::LosOnly)
                .and_then(|_| scene.check_component(FieldComponent::ReflectionOnly))
                .map_err(ConfigError::Scene)?;
        }
        Ok(())
    }
}
