//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::TAU;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;

use surfmimo::capacity::{db_to_linear, dof_bound, waterfill_values};
use surfmimo::materials::{Wavenumber, SPEED_OF_LIGHT};
use surfmimo::spectrum::kappa_z;
use surfmimo::{
    estimate_nodes, synthesize_impulse, FieldComponent, Material, MaterialKind, Medium, SceneConfig,
    SpatialLag,
};
use surfmimo_cli::experiments::{CapacityRow, EigenRow, LOS_LABEL};
use surfmimo_cli::{run_named, Experiment, ExperimentConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const F: f64 = 57.5e9;

fn table_one() -> Vec<Material> {
    vec![
        Material::perfect_conductor(),
        Material::concrete(),
        Material::floor_board(),
        Material::plaster_board(),
    ]
}

fn fresnel_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let (mut linear, mut energy): (f64, f64) = (0.0, 0.0);
    let mut samples = 0;
    for m in table_one() {
        let medium = Medium::new(F, m).unwrap();
        let k1 = medium.kappa1;
        for _ in 0..10_000 {
            let r = k1 * rng.gen::<f64>().sqrt();
            let phi = TAU * rng.gen::<f64>();
            let (kx, ky) = (r * phi.cos(), r * phi.sin());
            let c = medium.fresnel(kx, ky).unwrap();
            linear = linear.max((1.0 + c.reflection - c.transmission).abs());
            if let MaterialKind::Dielectric {
                refractive_index,
                permeability_ratio,
            } = medium.material.kind
            {
                let k1z = kappa_z(k1, kx, ky).unwrap();
                let k2z = kappa_z(refractive_index * k1, kx, ky).unwrap();
                let alpha = k2z / (permeability_ratio * k1z);
                let e = c.reflection.powi(2) + alpha * c.transmission.powi(2) - 1.0;
                energy = energy.max(e.abs());
            }
            samples += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        linear <= 1e-12 && energy <= 1e-12 && elapsed.as_secs_f64() < 1.0,
        format!(
            "{samples} samples, max |1+R-T| = {linear:.1e}, max |R^2+aT^2-1| = {energy:.1e}, {elapsed:.2?}"
        ),
    )
}

fn table_one_reproduction() -> Outcome {
    let expected = [("concrete", "3.07"), ("floor_board", "2.38"), ("plaster_board", "1.81")];
    let mut ok = true;
    let mut got = Vec::new();
    for (m, (name, want)) in table_one()[1..].iter().zip(expected) {
        assert_eq!(m.name, name);
        let Wavenumber::Finite(k2) = Medium::new(F, m.clone()).unwrap().kappa2() else {
            unreachable!()
        };
        let shown = format!("{:.2}", k2 / 1e3);
        ok &= shown == want;
        got.push(format!("{name} {shown} (table {want})"));
    }
    outcome(ok, got.join(", "))
}

fn worst(rows: &[surfmimo_cli::experiments::ValidationRow]) -> (f64, f64, f64) {
    rows.iter()
        .map(|r| (r.rel_err, r.dz_m, r.lag_m))
        .fold((0.0, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a })
}

fn los_oracle(validation: &surfmimo_cli::ResultSet) -> Outcome {
    let rows = &validation.validation;
    let (err, dz, x) = worst(rows);
    let lo = rows.iter().map(|r| r.dz_m).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.dz_m).fold(0.0, f64::max);
    let max_lag = rows.iter().map(|r| r.lag_m.abs()).fold(0.0, f64::max);
    let lambda = SPEED_OF_LIGHT / F;
    let spans = rows.len() == 20 && (lo - 10.0 * lambda).abs() < 1e-12 && hi == 20.0 && max_lag <= 1.0;
    outcome(
        spans && err <= 1e-3,
        format!(
            "{} points, dz {lo:.4}..{hi} m, |x| <= {max_lag} m, worst rel err {err:.1e} at dz {dz:.4} x {x:.4}",
            rows.len()
        ),
    )
}

fn image_oracle(validation: &surfmimo_cli::ResultSet) -> Outcome {
    let (err, dz, x) = worst(&validation.image_validation);

    // total field on a perfectly conducting surface
    let mut rng = StdRng::seed_from_u64(4);
    let pec = Medium::new(F, Material::perfect_conductor()).unwrap();
    let d1 = 15.0;
    let scene = SceneConfig::new(pec, d1, 0.0, d1, 0.0).unwrap();
    let mut null: f64 = 0.0;
    for _ in 0..100 {
        let lag = SpatialLag::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let q = estimate_nodes(&scene, lag.radius(), d1);
        let total = synthesize_impulse(&scene, FieldComponent::LosPlusReflection, lag, &q).unwrap();
        let los = synthesize_impulse(&scene, FieldComponent::LosOnly, lag, &q).unwrap();
        null = null.max(total.value.norm() / los.value.norm());
    }
    outcome(
        err <= 1e-3 && null <= 1e-3,
        format!(
            "worst image rel err {err:.1e} at dz {dz:.4} x {x:.4}; surface null |E|/|E_los| <= {null:.1e} over 100 points"
        ),
    )
}

fn rows_for<'a>(rows: &'a [EigenRow], material: &str) -> Vec<&'a EigenRow> {
    rows.iter().filter(|r| r.material == material).collect()
}

fn spread_db(rows: &[&EigenRow]) -> f64 {
    let max = rows.iter().map(|r| r.lambda).fold(0.0, f64::max);
    let min = rows.iter().map(|r| r.lambda).fold(f64::INFINITY, f64::min);
    10.0 * (max / min).log10()
}

fn fig2_los(fig2: &surfmimo_cli::ResultSet) -> Outcome {
    let los = rows_for(&fig2.eigenvalues, LOS_LABEL);
    let target = 10.0 * 8f64.log10();
    let dev = los
        .iter()
        .map(|r| (r.lambda_db.unwrap() - target).abs())
        .fold(0.0, f64::max);
    let sum: f64 = los.iter().map(|r| r.lambda).sum();
    let spacing = fig2.provenance.quadrature[0].spacing_m.unwrap();
    outcome(
        los.len() == 8 && dev <= 0.5 && (sum - 64.0).abs() <= 1e-10 * 64.0,
        format!(
            "d(D) = {spacing:.4} m, 8 LOS eigenvalues within {dev:.3} dB of {target:.2} dB, sum {sum:.6}"
        ),
    )
}

fn fig4_flatness(fig2: &surfmimo_cli::ResultSet, fig4: &surfmimo_cli::ResultSet) -> Outcome {
    let at_de = spread_db(&rows_for(&fig4.eigenvalues, "perfect_conductor"));
    let at_d = spread_db(&rows_for(&fig2.eigenvalues, "perfect_conductor"));
    outcome(
        at_de <= 0.5 && at_d > at_de,
        format!("perfect conductor spread {at_de:.3} dB at d(De), {at_d:.1} dB at d(D)"),
    )
}

fn reflectivity_scaling(fig4: &surfmimo_cli::ResultSet) -> Outcome {
    let cfg = &fig4.provenance.config;
    let pec = rows_for(&fig4.eigenvalues, "perfect_conductor");
    // both arrays are centered on the z axis: the specular ray between the
    // centers has no lateral offset
    let lateral = 0.0f64;
    let theta = lateral.atan2(2.0 * cfg.d1_m - cfg.range_m);
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for m in [Material::concrete(), Material::floor_board(), Material::plaster_board()] {
        let r = Medium::new(F, m.clone()).unwrap().reflection_at_angle(theta).unwrap();
        let rows = rows_for(&fig4.eigenvalues, &m.name);
        let dev = rows
            .iter()
            .zip(&pec)
            .map(|(d, p)| (d.lambda / (p.lambda * r * r) - 1.0).abs())
            .fold(0.0, f64::max);
        worst = worst.max(dev);
        notes.push(format!("{} |R|^2 = {:.4} max dev {:.2}%", m.name, r * r, 100.0 * dev));
    }
    outcome(
        worst <= 0.10,
        format!("theta_spec = {theta} rad; {}", notes.join(", ")),
    )
}

fn high_snr_slope(rows: &[&CapacityRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.snr_db >= 30.0)
        .map(|r| (r.snr_db, r.bits_per_s_hz))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn capacity_properties(fig5: &surfmimo_cli::ResultSet) -> Outcome {
    let n = 8usize;
    let grid = &fig5.provenance.config.snr_grid_db;
    let mut rng = StdRng::seed_from_u64(8);
    let mut excess = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let mut v: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen::<f64>() })
            .collect();
        v[0] += 1e-3;
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x *= (n * n) as f64 / s);
        for &db in grid {
            let snr = db_to_linear(db);
            let c = waterfill_values(&v, snr).unwrap().capacity;
            excess = excess.max(c - dof_bound(n, snr).unwrap().bound);
        }
    }

    let flat = vec![n as f64; n];
    let flat_err = grid
        .iter()
        .map(|&db| {
            let snr = db_to_linear(db);
            let c = waterfill_values(&flat, snr).unwrap().capacity;
            let rho_n = n as f64 * (1.0 + snr * (n * n) as f64 / (n * n) as f64).log2();
            (c - rho_n).abs()
        })
        .fold(0.0, f64::max);

    let scan = (1..=n)
        .map(|rho| {
            let r = rho as f64;
            r * (1.0 + 10.0 * 64.0 / (r * r)).log2()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = dof_bound(n, 10.0).unwrap().bound;
    let bound_ok = (bound - scan).abs() < 1e-12 && format!("{bound:.2}") == "27.68";

    let los: Vec<&CapacityRow> = fig5.capacity.iter().filter(|r| r.material == LOS_LABEL).collect();
    let los_slope = high_snr_slope(&los);
    let mut slope_ok = true;
    let mut slopes = Vec::new();
    for m in &fig5.provenance.config.materials {
        let rows: Vec<&CapacityRow> = fig5.capacity.iter().filter(|r| &r.material == m).collect();
        let s = high_snr_slope(&rows);
        let dev = (s / los_slope - 1.0).abs();
        slope_ok &= dev <= 0.02;
        slopes.push(format!("{m} {s:.4} ({:.2}%)", 100.0 * dev));
    }

    outcome(
        excess <= 1e-9 && flat_err <= 1e-9 && bound_ok && slope_ok,
        format!(
            "waterfill - bound <= {excess:.1e}; flat vs rho=N {flat_err:.1e}; dof_bound(8, 10 dB) = {bound:.4}; \
             slope over SNR >= 30 dB, b/s/Hz per dB: los {los_slope:.4}, {}",
            slopes.join(", ")
        ),
    )
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_surfmimo");
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(exe)
            .args(["run", "fig2", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, String::from_utf8_lossy(&status.stderr).to_string());
        }
        outputs.push(std::fs::read(out.join("eigenvalues.csv")).unwrap());
    }
    outcome(
        outputs[0] == outputs[1] && !outputs[0].is_empty(),
        format!("two `run fig2` processes, eigenvalues.csv {} bytes each, identical: {}", outputs[0].len(), outputs[0] == outputs[1]),
    )
}

fn main() {
    let cfg = ExperimentConfig::default();
    let total = Instant::now();
    let mut results: Vec<(usize, &str, Outcome, std::time::Duration)> = Vec::new();
    let mut timed = |id: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let line = format!(
            "criterion {id} [{}] {name}: {} ({:.1?})",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed()
        );
        println!("{line}");
        results.push((id, name, o, t.elapsed()));
    };

    let run = |e: Experiment| {
        let t = Instant::now();
        let r = run_named(e, &cfg).unwrap();
        (r, t.elapsed())
    };
    let note = |o: Outcome, e: Experiment, d: std::time::Duration| Outcome {
        detail: format!("{}; `{}` took {d:.1?}", o.detail, e.name()),
        ..o
    };

    timed(1, "fresnel identities", &fresnel_identities);
    timed(2, "table I wavenumbers", &table_one_reproduction);
    let (validation, tv) = run(Experiment::ImpulseValidate);
    timed(3, "LOS oracle equivalence", &|| note(los_oracle(&validation), Experiment::ImpulseValidate, tv));
    timed(4, "image-theorem equivalence", &|| image_oracle(&validation));
    let (fig2, t2) = run(Experiment::Fig2);
    let (fig4, t4) = run(Experiment::Fig4);
    timed(5, "fig2 LOS flatness", &|| note(fig2_los(&fig2), Experiment::Fig2, t2));
    timed(6, "fig4 spacing correction", &|| note(fig4_flatness(&fig2, &fig4), Experiment::Fig4, t4));
    timed(7, "reflectivity scaling", &|| reflectivity_scaling(&fig4));
    let (fig5, t5) = run(Experiment::Fig5);
    timed(8, "capacity properties", &|| note(capacity_properties(&fig5), Experiment::Fig5, t5));
    timed(9, "determinism", &determinism);

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} passed in {:.1?}",
        results.len() - failed.len(),
        results.len(),
        total.elapsed()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
