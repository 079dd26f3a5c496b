use std::process::Command;

use surfmimo::MaterialKind;
use surfmimo_cli::config::{ConfigError, NormalizationMode, SpacingRule};
use surfmimo_cli::emit::{table_csv, to_json};
use surfmimo_cli::experiments::validation_grid;
use surfmimo_cli::{emit, run_named, Experiment, ExperimentConfig, Format};

fn small_config() -> ExperimentConfig {
    ExperimentConfig::from_text(
        "antennas = 4\n\
         materials = perfect_conductor, concrete\n\
         snr_grid_db = 0:10:30\n\
         fresnel_step_deg = 15\n",
    )
    .unwrap()
}

#[test]
fn text_config_parses_and_round_trips() {
    let text = "\
        # a comment\n\
        frequency_ghz = 60   # trailing comment\n\
        d1_m = 12.5\n\
        range_m = 8\n\
        antennas = 6\n\
        materials = concrete, brick\n\
        material.brick = 1.9\n\
        material.ferrite = 2 3\n\
        snr_grid_db = -5, 0, 5\n\
        normalization = self_sum\n\
        spacing_rule = rayleigh_De\n\
        n_alpha = 5000\n\
        azimuth = trapezoid\n\
        export_matrices = true\n";
    let c = ExperimentConfig::from_text(text).unwrap();
    assert_eq!(c.frequency_ghz, 60.0);
    assert_eq!(c.d1_m, 12.5);
    assert_eq!(c.antennas, 6);
    assert_eq!(c.snr_grid_db, vec![-5.0, 0.0, 5.0]);
    assert_eq!(c.normalization, NormalizationMode::SelfSum);
    assert_eq!(c.spacing_rule, Some(SpacingRule::RayleighDe));
    assert_eq!(c.n_alpha, Some(5000));
    assert_eq!(c.n_beta, None);
    assert!(c.export_matrices);
    assert_eq!(c.equivalent_range(), 17.0);
    let brick = c.resolve_material("Brick").unwrap();
    assert_eq!(brick.refractive_index(), Some(1.9));
    assert!(matches!(
        c.custom_materials[1].kind,
        MaterialKind::Dielectric { permeability_ratio, .. } if permeability_ratio == 3.0
    ));

    let again = ExperimentConfig::from_text(&c.to_text()).unwrap();
    assert_eq!(again, c);
    assert_eq!(again.to_text(), c.to_text());
    let d = ExperimentConfig::default();
    assert_eq!(ExperimentConfig::from_text(&d.to_text()).unwrap(), d);
    assert_eq!(ExperimentConfig::from_text("").unwrap(), d);
}

#[test]
fn config_errors_name_the_problem() {
    let err = |t: &str| ExperimentConfig::from_text(t).unwrap_err();
    assert!(matches!(err("nonsense"), ConfigError::Syntax { line: 1, .. }));
    assert!(matches!(err("\nfrequency = 3"), ConfigError::UnknownKey { line: 2, .. }));
    assert!(matches!(err("d1_m = 3\nd1_m = 4"), ConfigError::Duplicate { line: 2, .. }));
    assert!(matches!(err("antennas = -2"), ConfigError::Invalid { .. }));
    assert!(matches!(err("antennas = 0"), ConfigError::Invalid { .. }));
    assert!(matches!(err("materials = unobtainium"), ConfigError::Invalid { .. }));
    assert!(matches!(err("normalization = loud"), ConfigError::Invalid { .. }));
    assert!(matches!(err("material.bad = 0.5"), ConfigError::Invalid { .. }));
    // receivers behind the surface
    let e = err("range_m = 20");
    assert!(matches!(e, ConfigError::Scene(_)), "{e}");
    // surface closer than ten wavelengths to the source
    let e = err("d1_m = 0.01\nrange_m = 0.005");
    assert!(matches!(e, ConfigError::Scene(_)), "{e}");
    assert!(e.to_string().contains("guard"), "{e}");
}

#[test]
fn json_output_reproduces_the_result_set() {
    let mut cfg = small_config();
    cfg.export_matrices = true;
    let first = run_named(Experiment::Fig4, &cfg).unwrap();
    let json = to_json(&first).unwrap();
    let back = ExperimentConfig::from_json(&json).unwrap();
    assert_eq!(back, cfg);
    let second = run_named(Experiment::Fig4, &back).unwrap();
    assert_eq!(first, second);
    let parsed: surfmimo_cli::ResultSet = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed, first);

    // and from a file, through `load`
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig4.json");
    std::fs::write(&path, &json).unwrap();
    assert_eq!(ExperimentConfig::load(&path).unwrap(), cfg);
}

#[test]
fn eigenvalue_rows_carry_material_and_rule() {
    let cfg = small_config();
    let r = run_named(Experiment::Fig4, &cfg).unwrap();
    assert_eq!(r.eigenvalues.len(), 3 * 4);
    let csv = table_csv(&r.eigenvalues).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("material,spacing_rule,index,lambda,lambda_db"));
    assert!(lines.next().unwrap().starts_with("los,rayleigh_D,1,"));
    assert!(csv.contains("\nconcrete,rayleigh_De,4,"));
    // LOS under its own scale sums to N^2
    let sum: f64 = r.eigenvalues.iter().filter(|e| e.material == "los").map(|e| e.lambda).sum();
    assert!((sum - 16.0).abs() < 1e-10);
}

#[test]
fn capacity_rows_follow_the_grid() {
    let cfg = small_config();
    let r = run_named(Experiment::Fig3, &cfg).unwrap();
    assert_eq!(r.capacity.len(), 3 * 4);
    let csv = table_csv(&r.capacity).unwrap();
    assert!(csv.starts_with("material,spacing_rule,snr_db,bits_per_s_hz\nlos,snr_dependent_D,0.0,"));
    for m in ["los", "perfect_conductor", "concrete"] {
        let c: Vec<f64> = r.capacity.iter().filter(|x| x.material == m).map(|x| x.bits_per_s_hz).collect();
        assert!(c.windows(2).all(|w| w[1] > w[0]), "{m}: {c:?}");
    }
    // the reflection loses power against the direct path
    let at = |m: &str| r.capacity.iter().find(|x| x.material == m && x.snr_db == 30.0).unwrap().bits_per_s_hz;
    assert!(at("los") > at("perfect_conductor") && at("perfect_conductor") > at("concrete"));
}

#[test]
fn emit_writes_documented_tables() {
    let cfg = small_config();
    let dir = tempfile::tempdir().unwrap();

    let r = run_named(Experiment::FresnelSweep, &cfg).unwrap();
    let files = emit(&r, Format::Csv, dir.path()).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec!["fresnel.csv", "provenance.json"]);
    let fresnel = std::fs::read_to_string(dir.path().join("fresnel.csv")).unwrap();
    assert!(fresnel.starts_with("material,theta_deg,R,T,reflectivity\nperfect_conductor,0.0,-1.0,0.0,1.0\n"));
    assert_eq!(fresnel.lines().count(), 1 + 2 * 7);

    let json_dir = dir.path().join("json");
    let files = emit(&r, Format::Json, &json_dir).unwrap();
    assert_eq!(files, vec![json_dir.join("fresnel_sweep.json")]);

    let mut cfg = small_config();
    cfg.export_matrices = true;
    let r = run_named(Experiment::Fig2, &cfg).unwrap();
    let mdir = dir.path().join("fig2");
    emit(&r, Format::Csv, &mdir).unwrap();
    let matrices: Vec<_> = std::fs::read_dir(mdir.join("matrices")).unwrap().collect();
    assert_eq!(matrices.len(), 2 * 3);
    let los = r.matrices.iter().find(|m| m.label.starts_with("los@")).unwrap();
    assert_eq!(los.matrix.distinct_evaluations, 7);
}

#[test]
fn impulse_validation_table() {
    let cfg = ExperimentConfig::from_text("validate_points = 4\nvalidate_dz_max_m = 2").unwrap();
    let r = run_named(Experiment::ImpulseValidate, &cfg).unwrap();
    assert_eq!(r.validation.len(), 4);
    assert_eq!(r.image_validation.len(), 4);
    let grid = validation_grid(&cfg);
    for (row, (dz, x)) in r.validation.iter().zip(grid) {
        assert_eq!((row.dz_m, row.lag_m), (dz, x));
        assert!(row.rel_err < 1e-3);
    }
    let csv = table_csv(&r.validation).unwrap();
    assert!(csv.starts_with("dz_m,lag_m,rel_err\n"));
}

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_surfmimo"))
}

#[test]
fn binary_subcommands() {
    let out = exe().args(["materials", "list"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("concrete,2.55,1,3.0709"));
    assert!(text.contains("perfect_conductor,inf,0,inf"));

    let dir = tempfile::tempdir().unwrap();
    let catalog = dir.path().join("extra.txt");
    std::fs::write(&catalog, "# extra\nglass 1.7\n").unwrap();
    let out = exe().args(["materials", "list", "--catalog"]).arg(&catalog).output().unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("glass,1.7,1,"));

    let out = exe().args(["converge", "--dz", "1", "--lag", "0.2"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("n_alpha,n_beta,re,im,delta\n"));
    assert!(csv.lines().count() >= 4);

    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "materials = concrete\nfresnel_step_deg = 45\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = exe()
        .args(["run", "fresnel_sweep", "--format", "json", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("fresnel_sweep.json").exists());

    let out = exe().args(["run", "fig9"]).output().unwrap();
    assert!(!out.status.success());
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "range_m = 40\n").unwrap();
    let out = exe().args(["run", "fig2", "--config"]).arg(&bad).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("scene guard"));
}
