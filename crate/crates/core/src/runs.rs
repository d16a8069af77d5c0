//! Complete runs: single solves, analytic validation, mesh studies and the
//! spacer parameter sweep.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{OutputFormat, RunConfig, DEFAULT_SPACER_COUNT};
use crate::error::{Error, Result};
use crate::fem::{FemSpaces, MembraneCondition};
use crate::geometry::{ChannelGeometry, GradingMode, GradingSpec, SpacerConfig};
use crate::mesh::{build_channel_mesh, import_msh, Mesh};
use crate::oracles::{berman_dp, poiseuille_dp};
use crate::postproc::{
    export_csv, export_vtk, flux_bounds, mass_balance, permeate_profile, pressure_drop_at,
    pressure_drop_profile, total_mass_flow, volumetric_flow_per_width, write_table, FluxBounds,
    LineProfile, MassBalance, Wall,
};
use crate::solver::{
    compute_residuals, divergence_residual, picard_solve, ConvergenceTrace, ResidualReport,
    SolutionFields,
};

pub fn build_mesh(cfg: &RunConfig) -> Result<Mesh> {
    match (&cfg.mesh.msh, &cfg.mesh.grading) {
        (Some(path), _) => import_msh(path),
        (None, Some(g)) => build_channel_mesh(&cfg.geometry, g),
        (None, None) => Err(Error::Config("mesh: grading or msh is required".into())),
    }
}

/// Scalar results of one coupled solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub config: SpacerConfig,
    pub u0: f64,
    pub delta_p: f64,
    pub cells: usize,
    pub iterations: usize,
    pub converged: bool,
    /// m^3/(s m)
    pub volumetric_flow_per_width: f64,
    /// kg/s
    pub total_mass_flow: f64,
    /// Mid-height pressure drop over the whole channel (Pa).
    pub pressure_drop: Option<f64>,
    pub theta_min: f64,
    pub theta_max: f64,
    /// `max(0, theta0 - min theta) / theta0`.
    pub undershoot: f64,
    pub mass_balance: MassBalance,
    pub flux_bounds: FluxBounds,
    /// Interior continuity residual, see [`divergence_residual`].
    pub divergence: f64,
    pub residuals: ResidualReport,
}

pub struct RunOutcome {
    pub mesh: Mesh,
    pub spaces: FemSpaces,
    pub fields: SolutionFields,
    pub trace: ConvergenceTrace,
    pub summary: RunSummary,
}

/// Meshes and solves `cfg`. Non-convergence is an error carrying the trace.
pub fn solve_run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mesh = build_mesh(cfg)?;
    solve_on(cfg, mesh)
}

pub fn solve_on(cfg: &RunConfig, mesh: Mesh) -> Result<RunOutcome> {
    let p = &cfg.physics;
    let spaces = FemSpaces::channel(&mesh, p.u0, p.theta0, cfg.membrane);
    let (fields, trace) = picard_solve(&mesh, &spaces, p, &cfg.nitsche, &cfg.solver)?;
    let summary = summarize(cfg, &mesh, &spaces, &fields, &trace);
    Ok(RunOutcome {
        mesh,
        spaces,
        fields,
        trace,
        summary,
    })
}

fn summarize(
    cfg: &RunConfig,
    mesh: &Mesh,
    spaces: &FemSpaces,
    fields: &SolutionFields,
    trace: &ConvergenceTrace,
) -> RunSummary {
    let p = &cfg.physics;
    let dofs = &spaces.dofs;
    let (lo, hi) = mesh.bounding_box();
    let dp = pressure_drop_at(mesh, fields, &[hi[0]], 0.5 * (lo[1] + hi[1]));
    let theta_min = fields.theta_min();
    RunSummary {
        name: cfg.name.clone(),
        config: cfg.geometry.config,
        u0: p.u0,
        delta_p: p.delta_p,
        cells: mesh.n_cells(),
        iterations: trace.iterations,
        converged: trace.converged,
        volumetric_flow_per_width: volumetric_flow_per_width(mesh, dofs, fields),
        total_mass_flow: total_mass_flow(mesh, dofs, fields, p, cfg.geometry.width),
        pressure_drop: dp.values.first().copied(),
        theta_min,
        theta_max: fields.theta_max(),
        undershoot: if p.theta0 > 0.0 { ((p.theta0 - theta_min) / p.theta0).max(0.0) } else { 0.0 },
        mass_balance: mass_balance(mesh, dofs, fields),
        flux_bounds: flux_bounds(mesh, dofs, fields, p),
        divergence: divergence_residual(mesh, dofs, &fields.u, true),
        residuals: compute_residuals(mesh, spaces, p, &cfg.nitsche, &cfg.solver, fields),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
struct TraceRow {
    iteration: usize,
    du: f64,
    dtheta: f64,
}

fn renamed(mut p: LineProfile, field: &str) -> LineProfile {
    p.field = field.to_string();
    p
}

/// Writes the requested outputs into `dir` and returns the file paths.
///
/// `solution.vtk`, `profiles.csv` (pressure drop and wall profiles),
/// `trace.csv` and `summary.json`.
pub fn write_artifacts(cfg: &RunConfig, out: &RunOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let dofs = &out.spaces.dofs;
    if cfg.outputs.wants(OutputFormat::Vtk) {
        let path = dir.join("solution.vtk");
        export_vtk(&out.mesh, dofs, &out.fields, &path)?;
        written.push(path);
    }
    if cfg.outputs.wants(OutputFormat::Csv) {
        let dp = pressure_drop_profile(&out.mesh, &out.fields, 11);
        let (ub, tb) = permeate_profile(&out.mesh, dofs, &out.fields, Wall::Bottom);
        let (ut, tt) = permeate_profile(&out.mesh, dofs, &out.fields, Wall::Top);
        let profiles = [
            dp,
            renamed(ub, "u_y_bottom"),
            renamed(tb, "theta_bottom"),
            renamed(ut, "u_y_top"),
            renamed(tt, "theta_top"),
        ];
        let refs: Vec<&LineProfile> = profiles.iter().collect();
        let path = dir.join("profiles.csv");
        export_csv(&refs, &cfg.name, &path)?;
        written.push(path);

        let rows: Vec<TraceRow> = (0..out.trace.iterations)
            .map(|k| TraceRow {
                iteration: k + 1,
                du: out.trace.du[k],
                dtheta: out.trace.dtheta[k],
            })
            .collect();
        let path = dir.join("trace.csv");
        write_table(&rows, &path)?;
        written.push(path);
    }
    if cfg.outputs.wants(OutputFormat::Json) {
        let path = dir.join("summary.json");
        let text = serde_json::to_string_pretty(&out.summary).expect("summary serialises");
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationCase {
    /// Impermeable walls.
    Poiseuille,
    /// Uniform wall suction.
    Berman,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub x: f64,
    pub analytic: f64,
    pub computed: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub case: ValidationCase,
    pub u0: f64,
    /// Wall velocity used by the Berman case, 0 for Poiseuille.
    pub v_w: f64,
    pub cells: usize,
    pub rows: Vec<ValidationRow>,
    pub max_rel_error: f64,
}

/// `x_i = i L / 10` for `i = 1..=10`.
pub fn validation_points(geom: &ChannelGeometry) -> Vec<f64> {
    (1..=10).map(|i| geom.length * i as f64 / 10.0).collect()
}

/// Runs an analytic validation case on the plain channel of `cfg`.
///
/// Poiseuille imposes `u = 0` strongly on the membranes. Berman imposes
/// `u.n = v_w` through the Nitsche terms with the osmotic coupling off;
/// `v_w` defaults to `dP/I0`.
pub fn run_validation(cfg: &RunConfig, case: ValidationCase, v_w: Option<f64>) -> Result<ValidationReport> {
    let mut run = cfg.clone();
    run.geometry.config = SpacerConfig::NoSpacers;
    run.geometry.spacer_x.clear();
    run.mesh.msh = None;
    if run.mesh.grading.is_none() {
        run.mesh.grading = crate::config::MeshConfig::default().grading;
    }
    let v_w = match case {
        ValidationCase::Poiseuille => {
            run.membrane = MembraneCondition::NoSlip;
            0.0
        }
        ValidationCase::Berman => {
            let v = v_w.unwrap_or_else(|| cfg.physics.drive_velocity());
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("wall velocity must be >= 0, got {v}")));
            }
            run.membrane = MembraneCondition::Nitsche;
            run.physics = run.physics.with_constant_flux(v);
            v
        }
    };
    let out = solve_run(&run)?;
    let g = &run.geometry;
    let xs = validation_points(g);
    let computed = pressure_drop_at(&out.mesh, &out.fields, &xs, g.half_height());
    let rows: Vec<ValidationRow> = computed
        .x
        .iter()
        .zip(&computed.values)
        .map(|(&x, &c)| {
            let a = match case {
                ValidationCase::Poiseuille => poiseuille_dp(x, &run.physics, g),
                ValidationCase::Berman => berman_dp(x, &run.physics, g, v_w),
            };
            ValidationRow {
                x,
                analytic: a,
                computed: c,
                rel_error: ((c - a) / a).abs(),
            }
        })
        .collect();
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok(ValidationReport {
        case,
        u0: run.physics.u0,
        v_w,
        cells: out.mesh.n_cells(),
        rows,
        max_rel_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    Uniform,
    TowardMembrane,
}

/// Growth ratio of the graded ladder when the config does not set one.
pub const LADDER_RATIO: f64 = 1.3;

/// Rows across the channel for each ladder step.
pub fn default_ladder(kind: Refinement) -> Vec<usize> {
    match kind {
        Refinement::Uniform => (2..=12).map(|j| 2 * j).collect(),
        Refinement::TowardMembrane => (1..=5).map(|j| 5 * j).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshStudyRow {
    pub n_y: usize,
    pub cells: usize,
    pub total_mass_flow: f64,
    /// Relative change from the previous row.
    pub rel_change: Option<f64>,
}

/// Solves `cfg` on each mesh of the ladder, coarse to fine. The graded ladder
/// keeps the growth ratio of a graded `cfg` mesh.
pub fn mesh_study(cfg: &RunConfig, kind: Refinement, ladder: &[usize]) -> Result<Vec<MeshStudyRow>> {
    let ratio = match &cfg.mesh.grading {
        Some(g) if g.mode == GradingMode::TowardMembrane => g.ratio,
        _ => LADDER_RATIO,
    };
    let mut rows: Vec<MeshStudyRow> = Vec::with_capacity(ladder.len());
    for &n_y in ladder {
        let grading = match kind {
            Refinement::Uniform => GradingSpec::uniform(n_y),
            Refinement::TowardMembrane => GradingSpec::toward_membrane(n_y, ratio),
        };
        let mut run = cfg.clone();
        run.mesh.msh = None;
        run.mesh.grading = Some(grading);
        let out = solve_run(&run)?;
        let m = out.summary.total_mass_flow;
        log::info!("mesh study n_y={n_y} cells={} mdot={m:.6e}", out.summary.cells);
        let rel_change = rows.last().map(|r| ((m - r.total_mass_flow) / r.total_mass_flow).abs());
        rows.push(MeshStudyRow {
            n_y,
            cells: out.summary.cells,
            total_mass_flow: m,
            rel_change,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub config: SpacerConfig,
    pub u0: f64,
    pub delta_p: f64,
}

pub const SWEEP_CONFIGS: [SpacerConfig; 3] = [SpacerConfig::Cavity, SpacerConfig::Submerged, SpacerConfig::ZigZag];
pub const SWEEP_U0: [f64; 3] = [0.258, 0.129, 0.0645];
pub const SWEEP_DELTA_P: [f64; 2] = [4_053_000.0, 5_572_875.0];

/// The 18 operating points, grouped by configuration, then pressure, then
/// decreasing inlet velocity.
pub fn sweep_grid() -> Vec<SweepPoint> {
    let mut v = Vec::with_capacity(18);
    for config in SWEEP_CONFIGS {
        for delta_p in SWEEP_DELTA_P {
            for u0 in SWEEP_U0 {
                v.push(SweepPoint { config, u0, delta_p });
            }
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub config: SpacerConfig,
    pub u0: f64,
    pub delta_p: f64,
    /// m^3/(s m)
    pub volumetric_flow_per_width: f64,
    pub cells: usize,
    pub iterations: usize,
}

/// Sweep mesh used when the base config keeps the default grading. Spacer
/// channels need finer rows than the plain channel.
pub fn sweep_grading() -> GradingSpec {
    GradingSpec::toward_membrane(24, 1.15)
}

/// The configuration for one sweep point. Spacer positions come from `base`
/// when it already uses that configuration, otherwise the default layout.
pub fn sweep_config(base: &RunConfig, point: &SweepPoint) -> RunConfig {
    let mut cfg = base.clone();
    if cfg.mesh.msh.is_none() && cfg.mesh.grading == crate::config::MeshConfig::default().grading {
        cfg.mesh.grading = Some(sweep_grading());
    }
    if cfg.geometry.config != point.config {
        cfg.geometry.config = point.config;
        cfg.geometry.spacer_x = ChannelGeometry::equally_spaced(cfg.geometry.length, DEFAULT_SPACER_COUNT);
    }
    cfg.physics.u0 = point.u0;
    cfg.physics.delta_p = point.delta_p;
    cfg.membrane = MembraneCondition::Nitsche;
    cfg.name = format!("{}_{}_{}", point.config.name(), point.u0, point.delta_p);
    if let Some(g) = cfg.mesh.grading.as_mut() {
        if g.mode == GradingMode::Uniform {
            log::warn!("sweep on a uniform mesh; the polarization layer may be under-resolved");
        }
    }
    cfg
}

/// Solves every point on a pool of `jobs` threads and returns the full
/// summaries in grid order.
pub fn sweep_summaries(base: &RunConfig, points: &[SweepPoint], jobs: usize) -> Result<Vec<RunSummary>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        points
            .par_iter()
            .map(|pt| {
                let s = solve_run(&sweep_config(base, pt))?.summary;
                log::info!(
                    "sweep {} u0={} dP={} V/W={:.6e} ({} iterations)",
                    pt.config.name(),
                    pt.u0,
                    pt.delta_p,
                    s.volumetric_flow_per_width,
                    s.iterations
                );
                Ok(s)
            })
            .collect()
    })
}

pub fn sweep(base: &RunConfig, points: &[SweepPoint], jobs: usize) -> Result<Vec<SweepRow>> {
    Ok(sweep_summaries(base, points, jobs)?.iter().map(SweepRow::from).collect())
}

impl From<&RunSummary> for SweepRow {
    fn from(s: &RunSummary) -> Self {
        SweepRow {
            config: s.config,
            u0: s.u0,
            delta_p: s.delta_p,
            volumetric_flow_per_width: s.volumetric_flow_per_width,
            cells: s.cells,
            iterations: s.iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.mesh.grading = Some(GradingSpec::toward_membrane(4, 1.2).with_n_x(40));
        cfg
    }

    #[test]
    fn grid_has_eighteen_points_in_table_order() {
        let g = sweep_grid();
        assert_eq!(g.len(), 18);
        assert_eq!(g[0], SweepPoint { config: SpacerConfig::Cavity, u0: 0.258, delta_p: 4_053_000.0 });
        assert_eq!(g[5].delta_p, 5_572_875.0);
        assert_eq!(g[6].config, SpacerConfig::Submerged);
        assert_eq!(g[17].config, SpacerConfig::ZigZag);
        assert_eq!(g[17].u0, 0.0645);
    }

    #[test]
    fn validation_points_are_tenths_of_the_channel() {
        let xs = validation_points(&ChannelGeometry::default());
        assert_eq!(xs.len(), 10);
        assert!((xs[9] - 0.015).abs() < 1e-18);
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn ladders_increase() {
        for k in [Refinement::Uniform, Refinement::TowardMembrane] {
            let l = default_ladder(k);
            assert!(l.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn sweep_config_sets_the_point() {
        let pt = SweepPoint { config: SpacerConfig::ZigZag, u0: 0.0645, delta_p: 5_572_875.0 };
        let cfg = sweep_config(&RunConfig::default(), &pt);
        assert_eq!(cfg.geometry.spacer_x.len(), DEFAULT_SPACER_COUNT);
        assert_eq!(cfg.physics.u0, 0.0645);
        assert_eq!(cfg.mesh.grading, Some(sweep_grading()));
        cfg.validate().unwrap();
        let mut base = RunConfig::default();
        base.mesh.grading = Some(GradingSpec::uniform(6));
        assert_eq!(sweep_config(&base, &pt).mesh.grading, Some(GradingSpec::uniform(6)));
    }

    #[test]
    fn berman_with_zero_wall_velocity_matches_poiseuille() {
        let cfg = coarse();
        let p = run_validation(&cfg, ValidationCase::Poiseuille, None).unwrap();
        let b = run_validation(&cfg, ValidationCase::Berman, Some(0.0)).unwrap();
        assert_eq!(p.rows.len(), 10);
        for (r, s) in p.rows.iter().zip(&b.rows) {
            assert_eq!(r.analytic, s.analytic);
            assert!((r.computed - s.computed).abs() < 1e-3 * r.analytic, "{r:?} {s:?}");
        }
    }

    #[test]
    fn coarse_run_writes_all_artifacts() {
        let cfg = coarse();
        let out = solve_run(&cfg).unwrap();
        assert!(out.summary.converged);
        let dir = tempfile::tempdir().unwrap();
        let files = write_artifacts(&cfg, &out, dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        assert!(files.iter().all(|f| f.is_file()));
        let s: RunSummary =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(s.cells, out.mesh.n_cells());
    }

    #[test]
    fn non_convergence_surfaces_the_trace() {
        let mut cfg = coarse();
        cfg.solver.max_outer = 1;
        match solve_run(&cfg) {
            Err(Error::NotConverged { trace }) => assert_eq!(trace.iterations, 1),
            other => panic!("expected NotConverged, got {:?}", other.map(|o| o.summary)),
        }
    }
}
