use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rosim::mesh::{export_msh, mesh_quality};
use rosim::postproc::write_table;
use rosim::runs::{
    build_mesh, default_ladder, mesh_study, run_validation, solve_run, sweep, sweep_grid,
    write_artifacts, Refinement, ValidationCase,
};
use rosim::{Error, RunConfig};

#[derive(Parser)]
#[command(name = "rosim", version, about = "Steady reverse-osmosis channel simulator")]
struct Cli {
    /// JSON run configuration; the reference channel is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `outputs.directory`.
    #[arg(long, global = true, env = "ROSIM_OUT")]
    out: Option<PathBuf>,
    /// Worker threads for independent solves.
    #[arg(long, global = true, env = "ROSIM_JOBS", default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or import the mesh and report its quality.
    Mesh,
    /// Solve the configured case and write VTK, CSV and JSON outputs.
    Run,
    /// Compare against an analytic pressure drop.
    Validate {
        #[arg(long, value_enum)]
        case: Case,
        /// Wall velocity for the Berman case (m/s); defaults to dP/I0.
        #[arg(long)]
        wall_velocity: Option<f64>,
    },
    /// Total mass flow over a refinement ladder.
    MeshStudy {
        #[arg(long, value_enum, default_value = "toward-membrane")]
        refinement: Kind,
        /// Rows across the channel per step, comma separated.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
    },
    /// Permeate flow for every spacer configuration, inlet velocity and pressure.
    Sweep,
}

#[derive(Clone, Copy, ValueEnum)]
enum Case {
    Poiseuille,
    Berman,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Uniform,
    TowardMembrane,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotConverged { .. } | Error::SingularMatrix { .. } | Error::LinearSolve(_) => 3,
        Error::Io { .. } => 4,
        _ => 2,
    }
}

fn load(cli: &Cli) -> rosim::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.outputs.directory = out.clone();
    }
    if cli.jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> rosim::Result<&Path> {
    let dir = cfg.outputs.directory.as_path();
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    Ok(dir)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> rosim::Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serialisable");
    std::fs::write(path, text + "\n").map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn execute(cli: &Cli) -> rosim::Result<()> {
    let cfg = load(cli)?;
    match &cli.command {
        Command::Mesh => {
            let mesh = build_mesh(&cfg)?;
            let q = mesh_quality(&mesh);
            let dir = out_dir(&cfg)?;
            export_msh(&mesh, dir.join("mesh.msh"))?;
            write_json(&dir.join("mesh_quality.json"), &q)?;
            println!(
                "{} cells, {} vertices, min angle {:.2} deg, max aspect {:.2}",
                q.cell_count,
                q.vertex_count,
                q.min_angle.to_degrees(),
                q.max_aspect_ratio
            );
        }
        Command::Run => {
            let out = solve_run(&cfg)?;
            let files = write_artifacts(&cfg, &out, out_dir(&cfg)?)?;
            let s = &out.summary;
            println!(
                "converged in {} iterations on {} cells: V/W = {:.6e} m^2/s, mdot = {:.6e} kg/s",
                s.iterations, s.cells, s.volumetric_flow_per_width, s.total_mass_flow
            );
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Command::Validate {
            case,
            wall_velocity,
        } => {
            let (case, name) = match case {
                Case::Poiseuille => (ValidationCase::Poiseuille, "poiseuille"),
                Case::Berman => (ValidationCase::Berman, "berman"),
            };
            let r = run_validation(&cfg, case, *wall_velocity)?;
            println!("{:>10} {:>12} {:>12} {:>10}", "x", "analytic", "computed", "rel_err");
            for row in &r.rows {
                println!(
                    "{:>10.5} {:>12.5} {:>12.5} {:>10.2e}",
                    row.x, row.analytic, row.computed, row.rel_error
                );
            }
            println!("max relative error {:.3e} ({} cells)", r.max_rel_error, r.cells);
            let path = out_dir(&cfg)?.join(format!("validate_{name}.csv"));
            write_table(&r.rows, &path)?;
        }
        Command::MeshStudy { refinement, ladder } => {
            let (kind, name) = match refinement {
                Kind::Uniform => (Refinement::Uniform, "uniform"),
                Kind::TowardMembrane => (Refinement::TowardMembrane, "toward_membrane"),
            };
            let ladder = ladder.clone().unwrap_or_else(|| default_ladder(kind));
            let rows = mesh_study(&cfg, kind, &ladder)?;
            for r in &rows {
                match r.rel_change {
                    Some(c) => println!("{:>8} cells  mdot {:.6e}  change {:.3e}", r.cells, r.total_mass_flow, c),
                    None => println!("{:>8} cells  mdot {:.6e}", r.cells, r.total_mass_flow),
                }
            }
            write_table(&rows, out_dir(&cfg)?.join(format!("mesh_study_{name}.csv")))?;
        }
        Command::Sweep => {
            let rows = sweep(&cfg, &sweep_grid(), cli.jobs)?;
            for r in &rows {
                println!(
                    "{:<10} {:>7} {:>9} {:.5e}",
                    r.config.name(),
                    r.u0,
                    r.delta_p,
                    r.volumetric_flow_per_width
                );
            }
            write_table(&rows, out_dir(&cfg)?.join("sweep.csv"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NotConverged { trace } = &e {
                if let Some(last) = trace.last_increment() {
                    eprintln!("last relative increment {last:.3e}");
                }
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
