//! Run orchestration shared by the command-line entry point: evolve and
//! expander loops with monitor cadence, CSV rendering, and the
//! machine-readable failure summary.
//!
//! Output is deterministic for a fixed config: stencils, reduction order,
//! and the 17-significant-digit CSV encoding are all worker-count
//! independent.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::config::RunConfig;
use crate::expander::{
    solve_expander_flow_with, ExpanderConfig, ExpanderOutcome, ExpanderReport,
};
use crate::flow::{cfl_dt, step, FlowError, FlowState};
use crate::grid::GridError;
use crate::initialdata::{build_initial, Certificate, InitError};
use crate::invariants::{monitor_suite, MonitorError, MonitorReport};
use crate::snapshot::{write_snapshot, SnapshotError};

#[derive(Debug)]
pub enum RunError {
    Grid(GridError),
    Initial(InitError),
    Flow(FlowError),
    Monitor(MonitorError),
    Snapshot(SnapshotError),
    Io(std::io::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Grid(e) => write!(f, "grid: {e}"),
            RunError::Initial(e) => write!(f, "initial data: {e}"),
            RunError::Flow(e) => write!(f, "flow: {e}"),
            RunError::Monitor(e) => write!(f, "monitor: {e}"),
            RunError::Snapshot(e) => write!(f, "snapshot: {e}"),
            RunError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<GridError> for RunError {
    fn from(e: GridError) -> Self {
        RunError::Grid(e)
    }
}
impl From<InitError> for RunError {
    fn from(e: InitError) -> Self {
        RunError::Initial(e)
    }
}
impl From<FlowError> for RunError {
    fn from(e: FlowError) -> Self {
        RunError::Flow(e)
    }
}
impl From<MonitorError> for RunError {
    fn from(e: MonitorError) -> Self {
        RunError::Monitor(e)
    }
}
impl From<SnapshotError> for RunError {
    fn from(e: SnapshotError) -> Self {
        RunError::Snapshot(e)
    }
}
impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

/// Result of an evolve run: endpoint, monitor series, initial certificate.
pub struct EvolveOutcome {
    pub state: FlowState,
    pub reports: Vec<MonitorReport>,
    pub certificate: Certificate,
}

/// Step from the configured initial data to the horizon, evaluating the
/// monitor suite at the configured cadence (plus start and end).
///
/// `observe` is called after every accepted step and may write snapshots.
pub fn evolve_with<F>(cfg: &RunConfig, threads: usize, mut observe: F) -> Result<EvolveOutcome, RunError>
where
    F: FnMut(&FlowState),
{
    let grid = cfg.build_grid()?;
    let spec = cfg.initial_spec();
    let (map, certificate) = build_initial(&spec, &grid, cfg.n, cfg.epsilon, cfg.delta)?;
    let specs = cfg.bound_specs();
    let tol = cfg.tol();
    let mut state = FlowState::new(map, cfg.mode);
    let baseline = monitor_suite(&state, None, &specs, tol)?;
    let mut reports = vec![baseline.clone()];
    let dt = cfl_dt(&grid, cfg.cfl_factor);
    while state.time < cfg.horizon - 1e-12 {
        let step_dt = dt.min(cfg.horizon - state.time);
        state = step(&state, step_dt, threads)?;
        observe(&state);
        let at_end = state.time >= cfg.horizon - 1e-12;
        if state.step_count % cfg.monitor_every as u64 == 0 || at_end {
            reports.push(monitor_suite(&state, Some(&baseline), &specs, tol)?);
        }
    }
    Ok(EvolveOutcome {
        state,
        reports,
        certificate,
    })
}

pub fn evolve(cfg: &RunConfig, threads: usize) -> Result<EvolveOutcome, RunError> {
    evolve_with(cfg, threads, |_| {})
}

/// Expander run with monitors evaluated at every residual report.
pub struct ExpanderRunOutcome {
    pub outcome: ExpanderOutcome,
    pub reports: Vec<MonitorReport>,
    pub residuals: Vec<ExpanderReport>,
    pub certificate: Certificate,
}

pub fn expander_run(cfg: &RunConfig, threads: usize) -> Result<ExpanderRunOutcome, RunError> {
    let grid = cfg.build_grid()?;
    let spec = cfg.initial_spec();
    let (map, certificate) = build_initial(&spec, &grid, cfg.n, cfg.epsilon, cfg.delta)?;
    let specs = cfg.bound_specs();
    let tol = cfg.tol();
    let xcfg = ExpanderConfig {
        s_end: cfg.horizon,
        cfl_factor: cfg.cfl_factor,
        epsilon: cfg.epsilon,
        report_every: cfg.monitor_every,
        threads,
        ..ExpanderConfig::default()
    };
    let mut reports: Vec<MonitorReport> = Vec::new();
    let mut residuals: Vec<ExpanderReport> = Vec::new();
    let mut monitor_err: Option<MonitorError> = None;
    let outcome = solve_expander_flow_with(&map, &xcfg, |state, report| {
        if monitor_err.is_some() {
            return;
        }
        let baseline = reports.first().cloned();
        match monitor_suite(state, baseline.as_ref(), &specs, tol) {
            Ok(r) => {
                reports.push(r);
                residuals.push(report.clone());
            }
            Err(e) => monitor_err = Some(e),
        }
    })?;
    if let Some(e) = monitor_err {
        return Err(RunError::Monitor(e));
    }
    Ok(ExpanderRunOutcome {
        outcome,
        reports,
        residuals,
        certificate,
    })
}

fn push_num(out: &mut String, v: f64) {
    out.push_str(&format!("{v:.16e}"));
}

/// Monitor series as CSV: `s_or_t` then value/threshold/pass triplets per
/// kind in configured order; optional expander residual columns appended.
/// Floats carry 17 significant digits, so the decimal round-trips exactly.
pub fn render_csv(reports: &[MonitorReport], residuals: Option<&[ExpanderReport]>) -> String {
    let mut out = String::new();
    if reports.is_empty() {
        return out;
    }
    out.push_str("s_or_t");
    for entry in &reports[0].entries {
        out.push_str(&format!(
            ",{k}_value,{k}_threshold,{k}_pass",
            k = entry.kind
        ));
    }
    if residuals.is_some() {
        out.push_str(",residual_sup,residual_l2,graph_residual_sup");
    }
    out.push('\n');
    for (i, report) in reports.iter().enumerate() {
        push_num(&mut out, report.time);
        for entry in &report.entries {
            out.push(',');
            push_num(&mut out, entry.observed);
            out.push(',');
            push_num(&mut out, entry.threshold);
            out.push_str(if entry.pass { ",1" } else { ",0" });
        }
        if let Some(res) = residuals {
            let r = &res[i];
            out.push(',');
            push_num(&mut out, r.residual_sup);
            out.push(',');
            push_num(&mut out, r.residual_l2);
            out.push(',');
            push_num(&mut out, r.graph_residual_sup);
        }
        out.push('\n');
    }
    out
}

/// One machine-readable failure line (JSON object per line).
pub fn failure_json(kind: &str, time: f64, observed: f64, threshold: f64, margin: f64) -> String {
    format!(
        "{{\"monitor\":\"{kind}\",\"time\":{time:.16e},\"observed\":{observed:.16e},\
         \"threshold\":{threshold:.16e},\"margin\":{margin:.16e}}}"
    )
}

/// Collect the asserted-and-failed entries of a monitor series as JSON
/// lines; empty when everything passes.
pub fn collect_failures(reports: &[MonitorReport]) -> Vec<String> {
    let mut out = Vec::new();
    for report in reports {
        for e in &report.entries {
            if e.asserted && !e.pass {
                out.push(failure_json(
                    &e.kind, report.time, e.observed, e.threshold, e.margin,
                ));
            }
        }
    }
    out
}

/// Write the full artifact set of an evolve/expander run into `out_dir`:
/// config echo, monitor CSV, final snapshot.
pub fn write_artifacts(
    cfg: &RunConfig,
    state: &FlowState,
    csv: &str,
    out_dir: &Path,
) -> Result<(), RunError> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("config_echo.txt"), cfg.echo())?;
    fs::write(out_dir.join("monitors.csv"), csv)?;
    write_snapshot(state, &out_dir.join("final.gmcf"))?;
    Ok(())
}

/// h-refinement study: run the configured datum at three nested
/// resolutions and report the sup difference between successive levels on
/// their common nodes, plus the observed convergence order.
pub fn converge_study(cfg: &RunConfig, threads: usize) -> Result<String, RunError> {
    assert!(
        (cfg.nodes - 1) % 4 == 0,
        "converge needs N - 1 divisible by 4"
    );
    let levels = [
        (cfg.nodes - 1) / 4 + 1,
        (cfg.nodes - 1) / 2 + 1,
        cfg.nodes,
    ];
    let mut finals: Vec<FlowState> = Vec::new();
    for &nodes in &levels {
        let mut level_cfg = cfg.clone();
        level_cfg.nodes = nodes;
        finals.push(evolve(&level_cfg, threads)?.state);
    }
    // successive sup differences restricted to the coarser level's nodes
    let diff = |coarse: &FlowState, fine: &FlowState| -> f64 {
        let cg = &coarse.map.grid;
        let fg = &fine.map.grid;
        let mask = cg.inner_mask();
        let mut idx = vec![0usize; cg.m];
        let mut sup: f64 = 0.0;
        for node in 0..cg.node_count() {
            if !mask[node] {
                continue;
            }
            cg.multi_index(node, &mut idx);
            let fine_idx: Vec<usize> = idx.iter().map(|&i| 2 * i).collect();
            let fnode = fg.flat_index(&fine_idx);
            for alpha in 0..coarse.map.n {
                sup = sup.max((coarse.map.value(node, alpha) - fine.map.value(fnode, alpha)).abs());
            }
        }
        sup
    };
    let d01 = diff(&finals[0], &finals[1]);
    let d12 = diff(&finals[1], &finals[2]);
    let order = if d12 > 0.0 { (d01 / d12).log2() } else { f64::INFINITY };
    let mut out = String::new();
    out.push_str("N,h,sup_diff_to_next\n");
    for (i, &nodes) in levels.iter().enumerate() {
        let h = 2.0 * cfg.half_width / (nodes - 1) as f64;
        let d = match i {
            0 => format!("{d01:.16e}"),
            1 => format!("{d12:.16e}"),
            _ => "-".to_string(),
        };
        out.push_str(&format!("{nodes},{h:.16e},{d}\n"));
    }
    out.push_str(&format!("observed_order,{order:.3}\n"));
    Ok(out)
}

/// Condensed deterministic property battery for the `selftest` subcommand.
/// Returns the per-check report and the overall verdict.
pub fn selftest(threads: usize) -> (String, bool) {
    use crate::flow::{rhs, Mode};
    use crate::geometry;
    use crate::grid::{build_grid, GridMap};
    use crate::invariants::ode_bound;
    use crate::snapshot::{read_snapshot, write_snapshot};

    let mut out = String::new();
    let mut all_ok = true;
    let mut check = |name: &str, ok: bool, out: &mut String| {
        out.push_str(if ok { "ok   " } else { "FAIL " });
        out.push_str(name);
        out.push('\n');
        all_ok &= ok;
    };

    // geometry kernel identities on a fixed jet
    {
        let mut jet = geometry::Jet::zero(2, 2);
        jet.j = vec![0.5, 0.3, -0.7, 0.2];
        jet.h2 = vec![0.9, -0.1, 0.3, 0.4, 0.3, 0.4, -0.2, 0.8];
        let s = geometry::sample(&jet);
        let fr = geometry::svd_frames(&jet);
        let mut ok = s.lili_gap >= -1e-10;
        ok &= (fr.s11 * fr.s11 + fr.t11 * fr.t11 - 1.0).abs() < 1e-12;
        ok &= (fr.s22 * fr.s22 + fr.t22 * fr.t22 - 1.0).abs() < 1e-12;
        // graph-form rate equals the ambient identity component-wise
        let (_, ginv, _) = geometry::metric(&jet);
        for alpha in 0..2 {
            let mut lhs = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    lhs += ginv.get(i, j) * jet.hess(i, j, alpha);
                }
            }
            let mut recon = s.hvec[2 + alpha];
            for i in 0..2 {
                recon -= jet.slope(i, alpha) * s.hvec[i];
            }
            ok &= (lhs - recon).abs() < 1e-12;
        }
        check("geometry kernel identities", ok, &mut out);
    }

    // linear maps are stationary in both modes
    {
        let grid = build_grid(2, 33, 4.0, 1.0).unwrap();
        let map = GridMap::from_fn(&grid, 2, |x, f| {
            f[0] = 0.4 * x[0] - 0.2 * x[1];
            f[1] = 0.1 * x[0] + 0.3 * x[1];
        });
        let raw = FlowState::new(map.clone(), Mode::Raw);
        let norm = FlowState::new(map, Mode::Normalized);
        let ok = rhs(&raw, threads)
            .map(|r| r.iter().all(|v| v.abs() < 1e-10))
            .unwrap_or(false)
            && rhs(&norm, threads)
                .map(|r| r.iter().all(|v| v.abs() < 1e-10))
                .unwrap_or(false);
        check("linear data stationary", ok, &mut out);
    }

    // ODE comparator oracles
    {
        let exp = ode_bound(|k| k, 2.0, 1.0, 0.005);
        let exact = 2.0 * 1.0f64.exp();
        let mut ok = (exp.values.last().unwrap() - exact).abs() / exact < 1e-8;
        let logistic = ode_bound(|k| k * (1.0 - k), 0.1, 2.0, 0.01);
        for (t, v) in logistic.times.iter().zip(&logistic.values) {
            ok &= (v - 1.0 / (1.0 + 9.0 * (-t).exp())).abs() < 1e-8;
        }
        check("ODE comparison principle", ok, &mut out);
    }

    // snapshot roundtrip
    {
        let grid = build_grid(2, 9, 1.0, 0.5).unwrap();
        let map = GridMap::from_fn(&grid, 2, |x, f| {
            f[0] = x[0] + 0.1;
            f[1] = x[1] * x[0];
        });
        let state = FlowState::new(map, Mode::Raw);
        let path = std::env::temp_dir().join(format!("gmcf-selftest-{}.gmcf", std::process::id()));
        let ok = write_snapshot(&state, &path).is_ok()
            && read_snapshot(&path)
                .map(|back| {
                    back.map
                        .values
                        .iter()
                        .zip(&state.map.values)
                        .all(|(a, b)| a.to_bits() == b.to_bits())
                })
                .unwrap_or(false);
        let _ = std::fs::remove_file(&path);
        check("snapshot roundtrip", ok, &mut out);
    }

    // shear stays area preserving over a short run
    {
        let cfg = crate::config::parse_config(
            "initial=shear\na=0.5\nN=65\nhorizon=0.1\nmonitors=splitting_p0\n",
        )
        .unwrap();
        let ok = evolve(&cfg, threads)
            .map(|o| o.reports.iter().all(|r| r.all_asserted_pass()))
            .unwrap_or(false);
        check("shear run keeps p = 0", ok, &mut out);
    }

    // cone run preserves the uniform area-decreasing bound
    {
        let cfg = crate::config::parse_config(
            "initial=cone2theta\nbeta=0.2\nN=65\nhorizon=0.1\nmonitors=p_min,mean_ratio\n",
        )
        .unwrap();
        let ok = evolve(&cfg, threads)
            .map(|o| o.reports.iter().all(|r| r.all_asserted_pass()))
            .unwrap_or(false);
        check("cone run preserves p bound", ok, &mut out);
    }

    (out, all_ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn small_linear_cfg() -> RunConfig {
        parse_config(
            "initial=linear\ncoeffs=0.3,0,0,0.3\nN=33\nL=4\nhorizon=0.05\nmonitor_every=8\n",
        )
        .unwrap()
    }

    #[test]
    fn linear_series_constant_and_passing() {
        let cfg = small_linear_cfg();
        let out = evolve(&cfg, 1).unwrap();
        assert!(out.reports.len() >= 2);
        for report in &out.reports {
            assert!(report.all_asserted_pass());
        }
        let first = out.reports.first().unwrap().entry("p_min").unwrap().observed;
        let last = out.reports.last().unwrap().entry("p_min").unwrap().observed;
        assert!((first - last).abs() < 1e-12);
    }

    #[test]
    fn csv_schema_and_precision() {
        let cfg = small_linear_cfg();
        let out = evolve(&cfg, 1).unwrap();
        let csv = render_csv(&out.reports, None);
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("s_or_t,p_min_value,p_min_threshold,p_min_pass,"));
        let row = lines.next().unwrap();
        // 1 time + 3 columns per monitor
        assert_eq!(row.split(',').count(), 1 + 3 * cfg.monitors.len());
        // 17 significant digits: mantissa with 16 decimals
        let first = row.split(',').next().unwrap();
        assert!(first.contains("e"), "{first}");
        assert_eq!(first.split('.').nth(1).unwrap().split('e').next().unwrap().len(), 16);
    }

    #[test]
    fn csv_thread_count_invariant() {
        let cfg = small_linear_cfg();
        let a = render_csv(&evolve(&cfg, 1).unwrap().reports, None);
        let b = render_csv(&evolve(&cfg, 4).unwrap().reports, None);
        assert_eq!(a, b);
    }

    #[test]
    fn failure_lines_name_the_monitor() {
        // impossible growth bound: |f|^2 exceeds a tiny constant polynomial
        let cfg = parse_config(
            "initial=linear\ncoeffs=0.9,0,0,0.9\nN=33\nL=4\nhorizon=0.01\nepsilon=0.05\n\
             monitors=growth_poly\nphi=1e-9\n",
        )
        .unwrap();
        let out = evolve(&cfg, 1).unwrap();
        let failures = collect_failures(&out.reports);
        assert!(!failures.is_empty());
        assert!(failures[0].contains("\"monitor\":\"growth_poly\""));
        assert!(failures[0].contains("\"observed\":"));
    }

    #[test]
    fn artifacts_written() {
        let cfg = small_linear_cfg();
        let out = evolve(&cfg, 1).unwrap();
        let csv = render_csv(&out.reports, None);
        let dir = tempfile::tempdir().unwrap();
        write_artifacts(&cfg, &out.state, &csv, dir.path()).unwrap();
        assert!(dir.path().join("config_echo.txt").exists());
        assert!(dir.path().join("monitors.csv").exists());
        assert!(dir.path().join("final.gmcf").exists());
        let echoed = fs::read_to_string(dir.path().join("config_echo.txt")).unwrap();
        let back = parse_config(&echoed).unwrap();
        assert_eq!(back.nodes, cfg.nodes);
    }

    #[test]
    fn expander_run_emits_residual_columns() {
        let cfg = parse_config(
            "initial=linear\ncoeffs=0.3,0,0,0.3\nN=33\nL=4\nmode=normalized\nhorizon=1\n",
        )
        .unwrap();
        let out = expander_run(&cfg, 1).unwrap();
        assert!(out.outcome.converged);
        let csv = render_csv(&out.reports, Some(&out.residuals));
        let header = csv.lines().next().unwrap();
        assert!(header.ends_with("residual_sup,residual_l2,graph_residual_sup"));
        assert_eq!(out.reports.len(), out.residuals.len());
    }
}
