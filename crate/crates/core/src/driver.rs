//! Run pipelines behind the command-line subcommands: single solves, parameter
//! sweeps, grid-convergence studies and transient runs, plus their file output.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::cartesian::{self, compute_coefficients, CartesianCoefficients, Xi};
use crate::config::{Model, RunConfig, VelocitySource};
use crate::csv_io::Table;
use crate::error::{Error, Result};
use crate::numerics::stencil::first_derivative;
use crate::numerics::{FieldProfile, Grid1D};
use crate::parameters::{nondimensionalize, NondimGroups};
use crate::spherical::{self, SphericalParams};
use crate::thermal::{solve_coupled_steady, SolutionBundle, ThermalProblem};
use crate::transient::{run_scenario, total_heat, TransientState};

pub const RESOLVED_CONFIG_FILE: &str = "resolved.conf";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const PROFILE_FILE: &str = "profile.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Tables and summary values produced by one solve.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub model: Model,
    /// `(file name, table)` in write order.
    pub tables: Vec<(String, Table)>,
    pub summary: Vec<(String, f64)>,
    pub bundle: Option<SolutionBundle>,
    pub snapshots: Vec<TransientState>,
}

impl SolveOutput {
    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

pub fn groups(cfg: &RunConfig) -> Result<NondimGroups> {
    nondimensionalize(&cfg.params)
}

fn field_stats(summary: &mut Vec<(String, f64)>, name: &str, values: &[f64]) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    summary.push((format!("{name}_first"), values[0]));
    summary.push((format!("{name}_last"), values[values.len() - 1]));
    summary.push((format!("{name}_min"), min));
    summary.push((format!("{name}_max"), max));
}

fn profile_summary(table: &Table) -> Vec<(String, f64)> {
    let mut s = Vec::new();
    for (name, col) in table.header.iter().zip(&table.columns).skip(1) {
        field_stats(&mut s, name, col);
    }
    s
}

fn cartesian_coefficients(cfg: &RunConfig, xi: Xi) -> Result<CartesianCoefficients> {
    compute_coefficients(&groups(cfg)?, cfg.params.phi_f, xi)
}

/// Velocity and its derivative on `grid` according to the configured source.
pub fn velocity_profiles(cfg: &RunConfig, grid: Grid1D) -> Result<(FieldProfile, FieldProfile)> {
    match cfg.velocity_source {
        VelocitySource::ClosedForm => {
            let c = cartesian_coefficients(cfg, Xi::Off)?;
            Ok((
                FieldProfile::try_from_fn(grid, |x| cartesian::fluid_velocity(&c, x))?,
                FieldProfile::try_from_fn(grid, |x| c.velocity_derivative(x))?,
            ))
        }
        VelocitySource::Zero => Ok((FieldProfile::constant(grid, 0.0), FieldProfile::constant(grid, 0.0))),
        VelocitySource::File => {
            let path = cfg
                .velocity_file
                .as_ref()
                .ok_or_else(|| Error::Argument("velocity_source = file needs scenario.velocity_file".into()))?;
            let table = Table::read(path)?;
            table.check_profile()?;
            let x = &table.columns[0];
            let v = table
                .column("v_f")
                .ok_or_else(|| Error::Argument(format!("{}: no 'v_f' column", path.display())))?;
            let sample = |col: &[f64]| FieldProfile::try_from_fn(grid, |t| interpolate_sorted(x, col, t));
            let vf = sample(v)?;
            let dv = match table.column("dv_f") {
                Some(d) => sample(d)?,
                None => first_derivative(&vf),
            };
            Ok((vf, dv))
        }
    }
}

fn interpolate_sorted(x: &[f64], y: &[f64], t: f64) -> Result<f64> {
    let (lo, hi) = (x[0], x[x.len() - 1]);
    if t < lo - 1e-12 || t > hi + 1e-12 {
        return Err(Error::Domain(format!("velocity file covers [{lo}, {hi}], needed {t}")));
    }
    let k = x.partition_point(|v| *v <= t).clamp(1, x.len() - 1);
    let w = (t - x[k - 1]) / (x[k] - x[k - 1]);
    Ok(y[k - 1] + w * (y[k] - y[k - 1]))
}

fn thermal_problem(cfg: &RunConfig, v: FieldProfile, dv: FieldProfile) -> Result<ThermalProblem> {
    let g = groups(cfg)?;
    let mut p = ThermalProblem::new(g.pe_f, g.n, g.kappa_ratio, v, dv)?;
    p.convection = cfg.convection;
    Ok(p)
}

fn solve_spherical(cfg: &RunConfig, grid: Grid1D) -> Result<SolveOutput> {
    let g = groups(cfg)?;
    let sp = SphericalParams::new(cfg.lambda, cfg.params.phi_f, g.da, cfg.varrho)?;
    let prof = spherical::profiles(&sp, grid)?;
    let table = Table::from_named(vec![
        ("r", grid.nodes()),
        ("pressure", prof.pressure.into_values()),
        ("v_f", prof.velocity.into_values()),
        ("u_s", prof.displacement.into_values()),
    ])?;
    let mut summary = vec![
        ("flow_rate".to_string(), spherical::flow_rate(&sp, cfg.quadrature_nodes)?),
        ("pressure_center".to_string(), spherical::pressure(&sp, 0.0)?),
    ];
    summary.extend(profile_summary(&table));
    Ok(SolveOutput {
        model: Model::Spherical,
        tables: vec![(PROFILE_FILE.into(), table)],
        summary,
        bundle: None,
        snapshots: Vec::new(),
    })
}

fn solve_thermal(cfg: &RunConfig, grid: Grid1D) -> Result<SolveOutput> {
    let (v, dv) = velocity_profiles(cfg, grid)?;
    let problem = thermal_problem(cfg, v.clone(), dv)?;
    let (tf, ts) = solve_coupled_steady(&problem)?;
    let table = Table::from_named(vec![
        ("x", grid.nodes()),
        ("v_f", v.into_values()),
        ("theta_f", tf.into_values()),
        ("theta_s", ts.into_values()),
    ])?;
    Ok(SolveOutput {
        model: Model::Thermal,
        summary: profile_summary(&table),
        tables: vec![(PROFILE_FILE.into(), table)],
        bundle: None,
        snapshots: Vec::new(),
    })
}

/// Coefficients, velocity and pressure, heat, then the displacement for the
/// configured `Xi`. The `Xi = 0` and `Xi = 1` displacements are both computed
/// so the summary can report their difference.
pub fn solve_cartesian_chain(cfg: &RunConfig, grid: Grid1D) -> Result<(SolutionBundle, f64)> {
    let c = cartesian_coefficients(cfg, Xi::Off)?;
    let v = FieldProfile::try_from_fn(grid, |x| cartesian::fluid_velocity(&c, x))?;
    let dv = FieldProfile::try_from_fn(grid, |x| c.velocity_derivative(x))?;
    let pressure = FieldProfile::try_from_fn(grid, |x| cartesian::pressure(&c, x))?;
    let (theta_f, theta_s) = solve_coupled_steady(&thermal_problem(cfg, v.clone(), dv)?)?;
    let u_off = cartesian::displacement_profile(&c, grid, None)?;
    let on = CartesianCoefficients { xi: Xi::On, ..c };
    let u_on = cartesian::displacement_profile(&on, grid, Some(&theta_s))?;
    let gap = u_on.max_abs_diff(&u_off)?;
    let u_s = if cfg.xi == Xi::On { u_on } else { u_off };
    Ok((
        SolutionBundle {
            grid,
            v_f: v,
            pressure,
            u_s,
            theta_f,
            theta_s,
        },
        gap,
    ))
}

fn solve_cartesian(cfg: &RunConfig, grid: Grid1D) -> Result<SolveOutput> {
    let (b, gap) = solve_cartesian_chain(cfg, grid)?;
    let c = cartesian_coefficients(cfg, Xi::Off)?;
    let table = Table::from_named(vec![
        ("x", grid.nodes()),
        ("v_f", b.v_f.values().to_vec()),
        ("pressure", b.pressure.values().to_vec()),
        ("u_s", b.u_s.values().to_vec()),
        ("theta_f", b.theta_f.values().to_vec()),
        ("theta_s", b.theta_s.values().to_vec()),
    ])?;
    let mut summary = vec![
        ("residual_v_inlet".to_string(), b.v_f.first() - 1.0),
        ("residual_dv_outlet".to_string(), c.velocity_derivative(1.0)?),
        ("residual_u_inlet".to_string(), b.u_s.first()),
        ("residual_u_outlet".to_string(), b.u_s.last()),
        ("u_s_gap".to_string(), gap),
    ];
    summary.extend(profile_summary(&table));
    Ok(SolveOutput {
        model: Model::Cartesian,
        tables: vec![(PROFILE_FILE.into(), table)],
        summary,
        bundle: Some(b),
        snapshots: Vec::new(),
    })
}

pub fn snapshot_table(s: &TransientState) -> Result<Table> {
    Table::from_named(vec![
        ("r", s.theta_f.grid().nodes()),
        ("theta_f", s.theta_f.values().to_vec()),
        ("theta_s", s.theta_s.values().to_vec()),
        ("v_f", s.v_f.values().to_vec()),
        ("u_s", s.u_s.values().to_vec()),
    ])
}

pub fn snapshot_file_name(index: usize) -> String {
    format!("snapshot_{index:03}.csv")
}

fn solve_transient(cfg: &RunConfig) -> Result<SolveOutput> {
    let tc = cfg.transient_config();
    let mut times = cfg.snapshot_times.clone();
    let extra_end = times.last() != Some(&tc.t_end);
    if extra_end {
        times.push(tc.t_end);
    }
    let mut snaps = run_scenario(&tc, &times)?;
    let initial = crate::transient::initial_state(&tc)?;
    let end = if extra_end { snaps.pop().expect("t_end snapshot") } else { snaps[snaps.len() - 1].clone() };
    let end_table = snapshot_table(&end)?;
    let mut summary = vec![
        ("t_end".to_string(), end.t),
        ("total_heat_initial".to_string(), total_heat(&initial, &tc)),
        ("total_heat_final".to_string(), total_heat(&end, &tc)),
    ];
    summary.extend(profile_summary(&end_table));
    let tables = snaps
        .iter()
        .enumerate()
        .map(|(i, s)| Ok((snapshot_file_name(i), snapshot_table(s)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SolveOutput {
        model: Model::Transient,
        tables,
        summary,
        bundle: None,
        snapshots: snaps,
    })
}

/// Runs the configured model without touching the file system.
pub fn solve(cfg: &RunConfig) -> Result<SolveOutput> {
    let grid = || Grid1D::unit(cfg.grid);
    match cfg.model {
        Model::Spherical => solve_spherical(cfg, grid()?),
        Model::Cartesian => solve_cartesian(cfg, grid()?),
        Model::Thermal => solve_thermal(cfg, grid()?),
        Model::Transient => solve_transient(cfg),
    }
}

pub fn format_number(x: f64, precision: usize) -> String {
    format!("{:.*e}", precision.clamp(1, 17) - 1, x)
}

pub fn summary_text(summary: &[(String, f64)], precision: usize) -> String {
    summary
        .iter()
        .map(|(k, v)| format!("{k} = {}\n", format_number(*v, precision)))
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes tables, the summary, the resolved configuration and (for transient
/// runs) the manifest into `dir`.
pub fn write_output(out: &SolveOutput, cfg: &RunConfig, dir: &Path) -> Result<()> {
    ensure_dir(dir)?;
    for (name, table) in &out.tables {
        table.check_profile()?;
        table.write(&dir.join(name), cfg.precision)?;
    }
    write_text(&dir.join(SUMMARY_FILE), &summary_text(&out.summary, cfg.precision))?;
    let resolved = cfg.to_text();
    write_text(&dir.join(RESOLVED_CONFIG_FILE), &resolved)?;
    if out.model == Model::Transient {
        let mut m = String::from("# snapshots\nindex,t,file\n");
        for (i, (s, (name, _))) in out.snapshots.iter().zip(&out.tables).enumerate() {
            m.push_str(&format!("{i},{},{name}\n", format_number(s.t, cfg.precision)));
        }
        m.push_str("\n# configuration\n");
        m.push_str(&resolved);
        write_text(&dir.join(MANIFEST_FILE), &m)?;
    }
    Ok(())
}

pub fn cmd_solve(cfg: &RunConfig, dir: &Path) -> Result<SolveOutput> {
    let out = solve(cfg)?;
    write_output(&out, cfg, dir)?;
    Ok(out)
}

/// Number of sweep workers: `THERMOPORO_THREADS` if set to a positive integer.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("THERMOPORO_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Argument(format!("THERMOPORO_THREADS must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(None),
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub key: String,
    pub values: Vec<String>,
    pub cases: Vec<SolveOutput>,
    pub table: Table,
}

pub fn case_dir_name(index: usize) -> String {
    format!("case_{index:03}")
}

/// Solves once per value of `key`, on at most `threads` workers. Results are
/// ordered like `values` regardless of scheduling.
pub fn sweep(cfg: &RunConfig, key: &str, values: &[String], threads: Option<usize>) -> Result<SweepOutput> {
    if values.is_empty() {
        return Err(Error::Argument("sweep needs at least one value".into()));
    }
    let configs = values
        .iter()
        .map(|v| {
            let mut c = cfg.clone();
            c.set(key, v)?;
            v.trim().parse::<f64>().map_err(|_| {
                Error::Argument(format!("sweep values must be numeric, got '{v}' for {key}"))
            })?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Solver(format!("cannot start sweep workers: {e}")))?;
    let results: Vec<Result<SolveOutput>> = pool.install(|| configs.par_iter().map(solve).collect());
    let mut cases = Vec::with_capacity(results.len());
    for (r, v) in results.into_iter().zip(values) {
        cases.push(r.map_err(|e| Error::Solver(format!("sweep case {key} = {v} failed: {e}")))?);
    }

    let keys: Vec<String> = cases[0].summary.iter().map(|(k, _)| k.clone()).collect();
    let mut header = vec![key.to_string()];
    header.extend(keys.iter().cloned());
    let mut columns = vec![values.iter().map(|v| v.trim().parse().expect("checked above")).collect()];
    for k in &keys {
        columns.push(
            cases
                .iter()
                .map(|c| c.summary_value(k).ok_or_else(|| Error::Solver(format!("sweep case lacks '{k}'"))))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    Ok(SweepOutput {
        key: key.to_string(),
        values: values.to_vec(),
        cases,
        table: Table::new(header, columns)?,
    })
}

pub fn cmd_sweep(cfg: &RunConfig, key: &str, values: &[String], threads: Option<usize>, dir: &Path) -> Result<SweepOutput> {
    let out = sweep(cfg, key, values, threads)?;
    ensure_dir(dir)?;
    out.table.write(&dir.join(SWEEP_FILE), cfg.precision)?;
    write_text(&dir.join(RESOLVED_CONFIG_FILE), &cfg.to_text())?;
    for (i, (case, v)) in out.cases.iter().zip(values).enumerate() {
        let mut c = cfg.clone();
        c.set(key, v)?;
        write_output(case, &c, &dir.join(case_dir_name(i)))?;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub model: Model,
    /// Grid node counts, or time steps for transient runs.
    pub resolutions: Vec<f64>,
    /// Max-norm errors against the extrapolated reference.
    pub errors: Vec<f64>,
    /// Observed orders from successive differences; empty for closed forms.
    pub orders: Vec<f64>,
    pub expected_order: Option<f64>,
    pub min_order: Option<f64>,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        match self.min_order {
            Some(min) => self.orders.iter().all(|p| *p >= min),
            None => true,
        }
    }

    pub fn to_table(&self) -> Result<Table> {
        let label = if self.model == Model::Transient { "dt" } else { "nodes" };
        let mut order = vec![f64::NAN; self.errors.len()];
        for (i, p) in self.orders.iter().enumerate() {
            order[i + 1] = *p;
        }
        let mut t = Table::from_named(vec![(label, self.resolutions.clone()), ("error", self.errors.clone())])?;
        if !self.orders.is_empty() {
            t.header.push("order".into());
            t.columns.push(order);
        }
        Ok(t)
    }
}

/// Samples `fine` at the nodes of the nested coarser grid `coarse`.
fn restrict(fine: &FieldProfile, coarse: &Grid1D) -> Result<Vec<f64>> {
    let nf = fine.len() - 1;
    let nc = coarse.len() - 1;
    if nf % nc != 0 {
        return Err(Error::Argument(format!("grid {} is not nested in {}", nc + 1, nf + 1)));
    }
    let stride = nf / nc;
    Ok(fine.values().iter().step_by(stride).copied().collect())
}

fn study(solutions: &[Vec<Vec<f64>>], ratios: &[f64], order: f64) -> (Vec<f64>, Vec<f64>) {
    // solutions[k][field] restricted to the coarsest grid
    let m = solutions.len();
    let fine = &solutions[m - 1];
    let prev = &solutions[m - 2];
    let factor = ratios[m - 2].powf(order) - 1.0;
    let reference: Vec<Vec<f64>> = fine
        .iter()
        .zip(prev)
        .map(|(f, c)| f.iter().zip(c).map(|(a, b)| a + (a - b) / factor).collect())
        .collect();
    let dist = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        a.iter()
            .zip(b)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max)
    };
    let errors = solutions.iter().map(|s| dist(s, &reference)).collect();
    let diffs: Vec<f64> = solutions.windows(2).map(|w| dist(&w[0], &w[1])).collect();
    let orders = diffs
        .windows(2)
        .zip(ratios)
        .map(|(d, r)| (d[0] / d[1]).ln() / r.ln())
        .collect();
    (errors, orders)
}

/// Grid (or time-step) refinement study of the configured model.
pub fn converge(cfg: &RunConfig) -> Result<ConvergenceReport> {
    let grids = &cfg.converge_grids;
    if grids.len() < 3 {
        return Err(Error::Argument(format!("convergence needs at least 3 grids, got {}", grids.len())));
    }
    match cfg.model {
        Model::Spherical => {
            let g = groups(cfg)?;
            let sp = SphericalParams::new(cfg.lambda, cfg.params.phi_f, g.da, cfg.varrho)?;
            let q: Vec<f64> = grids
                .iter()
                .map(|n| spherical::flow_rate(&sp, *n))
                .collect::<Result<_>>()?;
            let best = q[q.len() - 1];
            Ok(ConvergenceReport {
                model: cfg.model,
                resolutions: grids.iter().map(|n| *n as f64).collect(),
                errors: q.iter().map(|v| (v - best).abs()).collect(),
                orders: Vec::new(),
                expected_order: None,
                min_order: None,
            })
        }
        Model::Thermal | Model::Cartesian => {
            let coarsest = Grid1D::unit(grids[0])?;
            let mut solutions = Vec::new();
            for n in grids {
                let grid = Grid1D::unit(*n)?;
                let fields = if cfg.model == Model::Thermal {
                    let (v, dv) = velocity_profiles(cfg, grid)?;
                    let (tf, ts) = solve_coupled_steady(&thermal_problem(cfg, v, dv)?)?;
                    vec![tf, ts]
                } else {
                    let (b, _) = solve_cartesian_chain(cfg, grid)?;
                    vec![b.theta_f, b.theta_s, b.u_s]
                };
                solutions.push(fields.iter().map(|f| restrict(f, &coarsest)).collect::<Result<Vec<_>>>()?);
            }
            let ratios: Vec<f64> = grids.windows(2).map(|w| (w[1] - 1) as f64 / (w[0] - 1) as f64).collect();
            let (errors, orders) = study(&solutions, &ratios, 2.0);
            Ok(ConvergenceReport {
                model: cfg.model,
                resolutions: grids.iter().map(|n| *n as f64).collect(),
                errors,
                orders,
                expected_order: Some(2.0),
                min_order: Some(1.5),
            })
        }
        Model::Transient => {
            let base = cfg.transient_config();
            let dts: Vec<f64> = (0..grids.len()).map(|k| base.dt / 2f64.powi(k as i32)).collect();
            let mut solutions = Vec::new();
            for dt in &dts {
                let tc = crate::transient::TransientConfig { dt: *dt, ..base.clone() };
                let end = run_scenario(&tc, &[tc.t_end])?.pop().expect("one snapshot");
                solutions.push(vec![end.theta_f.into_values(), end.theta_s.into_values()]);
            }
            let ratios = vec![2.0; dts.len() - 1];
            let (errors, orders) = study(&solutions, &ratios, 1.0);
            Ok(ConvergenceReport {
                model: cfg.model,
                resolutions: dts,
                errors,
                orders,
                expected_order: Some(1.0),
                min_order: Some(0.7),
            })
        }
    }
}

pub fn cmd_converge(cfg: &RunConfig, dir: &Path) -> Result<ConvergenceReport> {
    let report = converge(cfg)?;
    ensure_dir(dir)?;
    let t = report.to_table()?;
    write_text(&dir.join("convergence.csv"), &t.to_csv(cfg.precision))?;
    write_text(&dir.join(RESOLVED_CONFIG_FILE), &cfg.to_text())?;
    Ok(report)
}

/// Default output directory for a subcommand when none is configured.
pub fn output_dir(cfg: &RunConfig, cli_out: Option<&Path>) -> PathBuf {
    cli_out.map(Path::to_path_buf).unwrap_or_else(|| cfg.out_dir.clone())
}
