//! Named experiments and their result tables.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use surfmimo::capacity::{db_to_linear, waterfill};
use surfmimo::mimo::{
    build_channel_matrix, nodes_for_layouts, reference_scale, spacing_rayleigh, spacing_snr,
    spectrum_of, ArrayLayout, ChannelMatrix, EigenSpectrum, Normalization,
};
use surfmimo::oracle::{image_reflection_oracle, los_impulse_oracle};
use surfmimo::quadrature::{
    convergence_study, ConvergenceTrace, EdgeTaper, DEFAULT_NODE_CEILING,
};
use surfmimo::spectrum::SEPARATION_GUARD_WAVELENGTHS;
use surfmimo::{
    estimate_nodes, synthesize_impulse, FieldComponent, Material, Medium, QuadratureSpec,
    SceneConfig, SpatialLag,
};

use crate::config::{ConfigError, ExperimentConfig, NormalizationMode, SpacingRule};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] surfmimo::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    FresnelSweep,
    ImpulseValidate,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Fig2,
        Experiment::Fig3,
        Experiment::Fig4,
        Experiment::Fig5,
        Experiment::FresnelSweep,
        Experiment::ImpulseValidate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::FresnelSweep => "fresnel_sweep",
            Experiment::ImpulseValidate => "impulse_validate",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment `{s}`, expected one of {}", names.join(", "))
            })
    }
}

/// Material label of the direct channel in every table.
pub const LOS_LABEL: &str = "los";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRow {
    pub material: String,
    pub spacing_rule: SpacingRule,
    /// 1-based, descending eigenvalues.
    pub index: usize,
    pub lambda: f64,
    /// Empty for a zero eigenvalue.
    pub lambda_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub material: String,
    pub spacing_rule: SpacingRule,
    pub snr_db: f64,
    pub bits_per_s_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FresnelRow {
    pub material: String,
    pub theta_deg: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub reflectivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub dz_m: f64,
    /// Transverse lag along x.
    pub lag_m: f64,
    pub rel_err: f64,
}

/// Quadrature used for one channel matrix or validation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub label: String,
    pub spacing_m: Option<f64>,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub evaluations: usize,
    pub under_resolved: bool,
    /// Factor applied to the raw eigenvalues.
    pub eigen_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub library: String,
    pub version: String,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub config_text: String,
    pub quadrature: Vec<NodeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub label: String,
    pub matrix: ChannelMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub provenance: Provenance,
    pub eigenvalues: Vec<EigenRow>,
    pub capacity: Vec<CapacityRow>,
    pub fresnel: Vec<FresnelRow>,
    pub validation: Vec<ValidationRow>,
    /// Perfect-conductor reflection against the image source.
    pub image_validation: Vec<ValidationRow>,
    pub matrices: Vec<MatrixRecord>,
}

impl ResultSet {
    fn new(experiment: Experiment, cfg: &ExperimentConfig) -> Self {
        ResultSet {
            provenance: Provenance {
                library: "surfmimo".into(),
                version: surfmimo::VERSION.into(),
                experiment: experiment.name().into(),
                config: cfg.clone(),
                config_text: cfg.to_text(),
                quadrature: Vec::new(),
            },
            eigenvalues: Vec::new(),
            capacity: Vec::new(),
            fresnel: Vec::new(),
            validation: Vec::new(),
            image_validation: Vec::new(),
            matrices: Vec::new(),
        }
    }
}

pub fn run_named(experiment: Experiment, cfg: &ExperimentConfig) -> Result<ResultSet, RunError> {
    cfg.validate()?;
    let mut out = ResultSet::new(experiment, cfg);
    match experiment {
        Experiment::Fig2 => eigen_experiment(cfg, SpacingRule::RayleighD, SpacingRule::RayleighD, &mut out)?,
        Experiment::Fig4 => eigen_experiment(cfg, SpacingRule::RayleighD, SpacingRule::RayleighDe, &mut out)?,
        Experiment::Fig3 => {
            capacity_experiment(cfg, SpacingRule::SnrDependentD, SpacingRule::SnrDependentD, &mut out)?
        }
        Experiment::Fig5 => {
            capacity_experiment(cfg, SpacingRule::SnrDependentD, SpacingRule::SnrDependentDe, &mut out)?
        }
        Experiment::FresnelSweep => fresnel_sweep(cfg, &mut out)?,
        Experiment::ImpulseValidate => impulse_validate(cfg, &mut out)?,
    }
    Ok(out)
}

/// One channel matrix to build: `None` is the direct path.
#[derive(Debug, Clone, PartialEq)]
struct Job {
    material: Option<Material>,
    spacing: f64,
}

impl Job {
    fn label(&self) -> String {
        let m = self.material.as_ref().map_or(LOS_LABEL, |m| m.name.as_str());
        format!("{m}@{}", self.spacing)
    }
}

struct ChannelBank {
    matrices: HashMap<String, Arc<ChannelMatrix>>,
}

impl ChannelBank {
    /// Builds every distinct job in parallel.
    fn build(cfg: &ExperimentConfig, jobs: &[Job]) -> Result<Self, RunError> {
        let mut distinct: Vec<&Job> = Vec::new();
        for j in jobs {
            if !distinct.iter().any(|d| d.label() == j.label()) {
                distinct.push(j);
            }
        }
        let built: Vec<Result<(String, Arc<ChannelMatrix>), RunError>> = distinct
            .par_iter()
            .map(|job| Ok((job.label(), Arc::new(build_job(cfg, job)?))))
            .collect();
        let matrices = built.into_iter().collect::<Result<_, _>>()?;
        Ok(ChannelBank { matrices })
    }

    fn get(&self, job: &Job) -> &Arc<ChannelMatrix> {
        &self.matrices[&job.label()]
    }
}

fn quadrature_for(cfg: &ExperimentConfig, estimated: QuadratureSpec) -> Result<QuadratureSpec, RunError> {
    let q = QuadratureSpec {
        n_alpha: cfg.n_alpha.unwrap_or(estimated.n_alpha),
        n_beta: cfg.n_beta.unwrap_or(estimated.n_beta),
        ..estimated
    }
    .with_azimuth(cfg.azimuth)
    .with_taper(EdgeTaper::Smooth {
        start: cfg.taper_start_deg.to_radians(),
    });
    q.validate()?;
    Ok(q)
}

fn build_job(cfg: &ExperimentConfig, job: &Job) -> Result<ChannelMatrix, RunError> {
    let (material, comp) = match &job.material {
        None => (Material::vacuum(), FieldComponent::LosOnly),
        Some(m) => (m.clone(), FieldComponent::ReflectionOnly),
    };
    let scene = cfg.scene(material)?;
    let tx = ArrayLayout::along_x(cfg.antennas, job.spacing, scene.source_z)?;
    let rx = ArrayLayout::along_x(cfg.antennas, job.spacing, scene.receiver_z)?;
    let q = quadrature_for(cfg, nodes_for_layouts(&scene, &tx, &rx, comp))?;
    Ok(build_channel_matrix(&scene, &tx, &rx, comp, &q)?)
}

fn spacing(cfg: &ExperimentConfig, rule: SpacingRule, snr_db: Option<f64>) -> Result<f64, RunError> {
    let range = if rule.equivalent_range() {
        cfg.equivalent_range()
    } else {
        cfg.range_m
    };
    if rule.snr_dependent() {
        let snr_db = snr_db.ok_or_else(|| {
            RunError::Usage(format!(
                "spacing rule {rule} depends on the SNR and cannot be used for an eigenvalue experiment"
            ))
        })?;
        Ok(spacing_snr(cfg.wavelength(), range, cfg.antennas, db_to_linear(snr_db))?)
    } else {
        Ok(spacing_rayleigh(cfg.wavelength(), range, cfg.antennas))
    }
}

/// Spectrum of `job` under the configured normalization; `reference` is the
/// LOS matrix with the same arrays.
fn normalized_spectrum(cfg: &ExperimentConfig, h: &ChannelMatrix, reference: &ChannelMatrix) -> EigenSpectrum {
    let norm = match cfg.normalization {
        NormalizationMode::SelfSum => Normalization::SelfSum,
        NormalizationMode::RelativeToLos => Normalization::RelativeTo(reference_scale(&reference.entries)),
    };
    spectrum_of(&h.entries, norm)
}

fn record(out: &mut ResultSet, job: &Job, h: &ChannelMatrix, scale: Option<f64>) {
    let label = job.label();
    if out.provenance.quadrature.iter().any(|r| r.label == label) {
        return;
    }
    out.provenance.quadrature.push(NodeRecord {
        label: label.clone(),
        spacing_m: Some(job.spacing),
        n_alpha: h.quadrature.n_alpha,
        n_beta: h.quadrature.n_beta,
        evaluations: h.distinct_evaluations,
        under_resolved: h.under_resolved,
        eigen_scale: scale,
    });
    if out.provenance.config.export_matrices {
        out.matrices.push(MatrixRecord {
            label,
            matrix: h.clone(),
        });
    }
}

fn eigen_experiment(
    cfg: &ExperimentConfig,
    los_rule: SpacingRule,
    reflected_rule: SpacingRule,
    out: &mut ResultSet,
) -> Result<(), RunError> {
    let reflected_rule = cfg.spacing_rule.unwrap_or(reflected_rule);
    let materials = cfg.resolved_materials()?;
    let los_spacing = spacing(cfg, los_rule, None)?;
    let refl_spacing = spacing(cfg, reflected_rule, None)?;

    let los = Job {
        material: None,
        spacing: los_spacing,
    };
    let refl_reference = Job {
        material: None,
        spacing: refl_spacing,
    };
    let mut jobs = vec![los.clone(), refl_reference.clone()];
    jobs.extend(materials.iter().map(|m| Job {
        material: Some(m.clone()),
        spacing: refl_spacing,
    }));
    let bank = ChannelBank::build(cfg, &jobs)?;

    let mut rows = |label: &str, rule: SpacingRule, spec: &EigenSpectrum| {
        for (i, &lambda) in spec.values.iter().enumerate() {
            out.eigenvalues.push(EigenRow {
                material: label.to_string(),
                spacing_rule: rule,
                index: i + 1,
                lambda,
                lambda_db: (lambda > 0.0).then(|| 10.0 * lambda.log10()),
            });
        }
    };
    let h_los = bank.get(&los);
    let spec = normalized_spectrum(cfg, h_los, h_los);
    rows(LOS_LABEL, los_rule, &spec);
    let mut records = vec![(los.clone(), Arc::clone(h_los), spec.scale)];

    let reference = bank.get(&refl_reference);
    for job in &jobs[2..] {
        let h = bank.get(job);
        let spec = normalized_spectrum(cfg, h, reference);
        rows(&job.material.as_ref().expect("reflected job").name, reflected_rule, &spec);
        records.push((job.clone(), Arc::clone(h), spec.scale));
    }
    for (job, h, scale) in records {
        record(out, &job, &h, Some(scale));
    }
    Ok(())
}

fn capacity_of(spec: &EigenSpectrum, snr_db: f64) -> Result<f64, RunError> {
    if spec.values.iter().all(|&v| v <= 0.0) {
        return Ok(0.0);
    }
    Ok(waterfill(spec, db_to_linear(snr_db))?.capacity)
}

fn capacity_experiment(
    cfg: &ExperimentConfig,
    los_rule: SpacingRule,
    reflected_rule: SpacingRule,
    out: &mut ResultSet,
) -> Result<(), RunError> {
    let reflected_rule = cfg.spacing_rule.unwrap_or(reflected_rule);
    let materials = cfg.resolved_materials()?;

    // (snr, los job, reflected spacing)
    let mut plan = Vec::with_capacity(cfg.snr_grid_db.len());
    let mut jobs = Vec::new();
    for &snr_db in &cfg.snr_grid_db {
        let los = Job {
            material: None,
            spacing: spacing(cfg, los_rule, Some(snr_db))?,
        };
        let refl = spacing(cfg, reflected_rule, Some(snr_db))?;
        jobs.push(los.clone());
        jobs.push(Job {
            material: None,
            spacing: refl,
        });
        for m in &materials {
            jobs.push(Job {
                material: Some(m.clone()),
                spacing: refl,
            });
        }
        plan.push((snr_db, los, refl));
    }
    let bank = ChannelBank::build(cfg, &jobs)?;

    let mut records: Vec<(Job, Arc<ChannelMatrix>, f64)> = Vec::new();
    let mut los_rows = Vec::new();
    for (snr_db, los, _) in &plan {
        let h = bank.get(los);
        let spec = normalized_spectrum(cfg, h, h);
        los_rows.push(CapacityRow {
            material: LOS_LABEL.into(),
            spacing_rule: los_rule,
            snr_db: *snr_db,
            bits_per_s_hz: capacity_of(&spec, *snr_db)?,
        });
        records.push((los.clone(), Arc::clone(h), spec.scale));
    }
    out.capacity.extend(los_rows);

    for m in &materials {
        for (snr_db, _, refl) in &plan {
            let job = Job {
                material: Some(m.clone()),
                spacing: *refl,
            };
            let reference = bank.get(&Job {
                material: None,
                spacing: *refl,
            });
            let h = bank.get(&job);
            let spec = normalized_spectrum(cfg, h, reference);
            out.capacity.push(CapacityRow {
                material: m.name.clone(),
                spacing_rule: reflected_rule,
                snr_db: *snr_db,
                bits_per_s_hz: capacity_of(&spec, *snr_db)?,
            });
            records.push((job, Arc::clone(h), spec.scale));
        }
    }
    for (job, h, scale) in records {
        record(out, &job, &h, Some(scale));
    }
    Ok(())
}

fn fresnel_sweep(cfg: &ExperimentConfig, out: &mut ResultSet) -> Result<(), RunError> {
    let steps = (90.0 / cfg.fresnel_step_deg + 1e-9).floor() as usize;
    for m in cfg.resolved_materials()? {
        let medium = Medium::new(cfg.frequency_hz(), m)?;
        for k in 0..=steps {
            let theta_deg = k as f64 * cfg.fresnel_step_deg;
            let c = medium.fresnel(medium.kappa1 * theta_deg.to_radians().sin(), 0.0)?;
            out.fresnel.push(FresnelRow {
                material: medium.material.name.clone(),
                theta_deg,
                r: c.reflection,
                t: c.transmission,
                reflectivity: c.reflection * c.reflection,
            });
        }
    }
    Ok(())
}

/// Fractions of `min(max lag, dz)` cycled over the validation points.
/// Keeping the lateral offset within the separation keeps the stationary
/// direction clear of the grazing band.
const LAG_PATTERN: [f64; 5] = [0.0, 0.3, -0.6, 1.0, -0.15];

/// `(dz, x)` pairs log-spaced from the separation guard to
/// `validate_dz_max_m`.
pub fn validation_grid(cfg: &ExperimentConfig) -> Vec<(f64, f64)> {
    let lo = SEPARATION_GUARD_WAVELENGTHS * cfg.wavelength();
    let hi = cfg.validate_dz_max_m;
    let n = cfg.validate_points;
    (0..n)
        .map(|i| {
            let dz = if i + 1 == n {
                hi
            } else {
                lo * (hi / lo).powf(i as f64 / (n - 1) as f64)
            };
            let x = LAG_PATTERN[i % LAG_PATTERN.len()] * cfg.validate_max_lag_m.min(dz);
            (dz, x)
        })
        .collect()
}

struct PointCheck {
    los: f64,
    image: f64,
    q: QuadratureSpec,
    under_resolved: bool,
}

/// LOS in vacuum between planes `dz` apart, and the perfect-conductor
/// reflection with source at 0 and receiver on a surface at `dz`, whose
/// image path is also `dz` long.
fn check_point(cfg: &ExperimentConfig, dz: f64, x: f64) -> Result<PointCheck, RunError> {
    let f = cfg.frequency_hz();
    let vacuum = Medium::new(f, Material::vacuum())?;
    let pec = Medium::new(f, Material::perfect_conductor())?;
    let los_scene = SceneConfig::new(vacuum.clone(), dz, 0.0, dz, 0.0)?;
    let pec_scene = los_scene.with_medium(pec.clone());
    let lag = SpatialLag::new(x, 0.0);
    let q = quadrature_for(cfg, estimate_nodes(&los_scene, x, dz))?;
    let rel = |a: surfmimo::Complex64, b: surfmimo::Complex64| (a - b).norm() / b.norm();

    let h = synthesize_impulse(&los_scene, FieldComponent::LosOnly, lag, &q)?;
    let los = rel(h.value, los_impulse_oracle(&vacuum, [x, 0.0, dz], [0.0; 3])?);
    let g = synthesize_impulse(&pec_scene, FieldComponent::ReflectionOnly, lag, &q)?;
    let image = rel(g.value, image_reflection_oracle(&pec, [x, 0.0, dz], [0.0; 3], dz)?);
    Ok(PointCheck {
        los,
        image,
        q,
        under_resolved: h.under_resolved || g.under_resolved,
    })
}

fn impulse_validate(cfg: &ExperimentConfig, out: &mut ResultSet) -> Result<(), RunError> {
    let grid = validation_grid(cfg);
    let checks: Vec<Result<PointCheck, RunError>> =
        grid.par_iter().map(|&(dz, x)| check_point(cfg, dz, x)).collect();
    for ((dz, x), check) in grid.into_iter().zip(checks) {
        let c = check?;
        out.validation.push(ValidationRow {
            dz_m: dz,
            lag_m: x,
            rel_err: c.los,
        });
        out.image_validation.push(ValidationRow {
            dz_m: dz,
            lag_m: x,
            rel_err: c.image,
        });
        out.provenance.quadrature.push(NodeRecord {
            label: format!("dz={dz},x={x}"),
            spacing_m: None,
            n_alpha: c.q.n_alpha,
            n_beta: c.q.n_beta,
            evaluations: 2,
            under_resolved: c.under_resolved,
            eigen_scale: None,
        });
    }
    Ok(())
}

/// Node-doubling study of the vacuum LOS impulse at separation `dz` and
/// lateral lag `lag` along x.
pub fn converge(cfg: &ExperimentConfig, dz: f64, lag: f64) -> Result<ConvergenceTrace, RunError> {
    cfg.validate()?;
    let medium = Medium::new(cfg.frequency_hz(), Material::vacuum())?;
    let scene = SceneConfig::new(medium, dz, 0.0, dz, 0.0)?;
    Ok(convergence_study(
        &scene,
        FieldComponent::LosOnly,
        SpatialLag::new(lag, 0.0),
        cfg.azimuth,
        DEFAULT_NODE_CEILING,
    )?)
}
