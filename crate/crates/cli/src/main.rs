use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use surfmimo::materials::{parse_material_catalog, Wavenumber};
use surfmimo::{material_catalog, Medium};
use surfmimo_cli::{converge, emit, run_named, Experiment, ExperimentConfig, Format};

#[derive(Parser)]
#[command(name = "surfmimo", version, about = "LOS MIMO next to a reflecting surface")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named experiment: fig2, fig3, fig4, fig5, fresnel_sweep,
    /// impulse_validate.
    Run {
        name: Experiment,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory [default: results/<name>]
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = Format::Csv)]
        format: Format,
    },
    Materials {
        #[command(subcommand)]
        action: MaterialsAction,
    },
    /// Node-doubling study of the LOS impulse response.
    Converge {
        #[arg(long)]
        dz: f64,
        #[arg(long)]
        lag: f64,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write convergence.csv here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MaterialsAction {
    /// Built-in catalog plus config and file materials, with kappa2.
    List {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Extra materials, one `name n2 [mu]` per line.
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("config {}", p.display())),
        None => Ok(ExperimentConfig::default()),
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            name,
            config,
            out,
            format,
        } => {
            let cfg = load_config(config.as_ref())?;
            let results = run_named(name, &cfg)?;
            for r in results.provenance.quadrature.iter().filter(|r| r.under_resolved) {
                eprintln!("warning: {} ran below its oscillation budget", r.label);
            }
            let dir = out.unwrap_or_else(|| PathBuf::from("results").join(name.name()));
            for path in emit(&results, format, &dir)? {
                println!("{}", path.display());
            }
        }
        Command::Materials {
            action: MaterialsAction::List { config, catalog },
        } => {
            let cfg = load_config(config.as_ref())?;
            let mut all = material_catalog();
            all.extend(cfg.custom_materials.iter().cloned());
            if let Some(p) = catalog {
                let text = std::fs::read_to_string(&p)
                    .with_context(|| format!("reading {}", p.display()))?;
                all.extend(parse_material_catalog(&text)?);
            }
            println!("name,refractive_index,permeability_ratio,kappa2_krad_per_m");
            for m in all {
                let medium = Medium::new(cfg.frequency_hz(), m)?;
                let n = medium
                    .material
                    .refractive_index()
                    .map_or("inf".to_string(), |n| n.to_string());
                let k2 = match medium.kappa2() {
                    Wavenumber::Finite(k) => format!("{:.4}", k / 1e3),
                    Wavenumber::Infinite => "inf".to_string(),
                };
                println!(
                    "{},{},{},{}",
                    medium.material.name,
                    n,
                    medium.material.permeability_ratio(),
                    k2
                );
            }
        }
        Command::Converge {
            dz,
            lag,
            config,
            out,
        } => {
            let cfg = load_config(config.as_ref())?;
            let trace = converge(&cfg, dz, lag)?;
            if !trace.converged {
                eprintln!("warning: node ceiling reached before convergence");
            }
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let path = dir.join("convergence.csv");
                    std::fs::write(&path, trace.to_csv())?;
                    println!("{}", path.display());
                }
                None => print!("{}", trace.to_csv()),
            }
        }
    }
    Ok(())
}
