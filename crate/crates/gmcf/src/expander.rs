//! Self-expander residuals and the normalized-flow expander solver.
//!
//! A self-expanding soliton satisfies `F_perp = H` for the normalized
//! position; the ambient residual `H - F_perp` is computed directly from
//! the geometry kernel, independent of the graph form of the normalized
//! flow, so the two residual flavors cross-check each other. Node-wise the
//! ambient residual is the normal projection of `(0, rate)` with `rate` the
//! graph-form normalized rate, hence never larger in norm.

use crate::flow::{cfl_dt, step, FlowError, FlowState, JetFields, Mode};
use crate::geometry;
use crate::grid::GridMap;

/// Residual norms over the inner region at one normalized time.
#[derive(Debug, Clone)]
pub struct ExpanderReport {
    pub s: f64,
    /// `sup |H - F_perp|`.
    pub residual_sup: f64,
    /// Area-weighted L2 norm of the same.
    pub residual_l2: f64,
    /// `sup` over nodes of the norm of the graph-form rate vector.
    pub graph_residual_sup: f64,
}

/// Parameters of the expander solve.
#[derive(Debug, Clone)]
pub struct ExpanderConfig {
    pub s_end: f64,
    /// Convergence tolerance on `residual_sup`; the default sits above the
    /// O(h^2) discretization floor at the desk-scale grid.
    pub tol_exp: f64,
    pub cfl_factor: f64,
    /// Claimed uniform area-decreasing bound for the endpoint.
    pub epsilon: f64,
    /// Steps between residual reports.
    pub report_every: usize,
    pub threads: usize,
}

impl Default for ExpanderConfig {
    fn default() -> Self {
        ExpanderConfig {
            s_end: 6.0,
            tol_exp: 1e-3,
            cfl_factor: 0.5,
            epsilon: 0.25,
            report_every: 16,
            threads: 0,
        }
    }
}

/// Result of the solve, converged or not.
#[derive(Debug, Clone)]
pub struct ExpanderOutcome {
    pub state: FlowState,
    pub series: Vec<ExpanderReport>,
    pub converged: bool,
    pub endpoint_min_p: f64,
    /// `endpoint_min_p >= epsilon - tol` with `tol = 10 h^2`.
    pub endpoint_uniform: bool,
    /// Observed log-slope of `residual_sup` over the last reports;
    /// diagnostic for non-convergence.
    pub decay_rate: Option<f64>,
}

/// `expander_residual`: both residual flavors over the inner region.
pub fn expander_residual(state: &FlowState) -> ExpanderReport {
    assert_eq!(state.mode, Mode::Normalized, "expander residual needs normalized mode");
    let map = &state.map;
    let grid = &map.grid;
    let (m, n) = (grid.m, map.n);
    let dim = m + n;
    let jets = JetFields::compute(map);
    let mask = grid.inner_mask();
    let cell = grid.h.powi(m as i32);
    let mut pos = vec![0.0; m];
    let mut fvec = vec![0.0; dim];
    let mut sup: f64 = 0.0;
    let mut l2 = 0.0;
    let mut graph_sup: f64 = 0.0;
    for node in 0..grid.node_count() {
        if !mask[node] {
            continue;
        }
        let jet = jets.jet_at(node);
        let (_, ginv, detg) = geometry::metric(&jet);
        let (pperp, _, hvec) = geometry::second_fundamental(&jet);
        grid.position(node, &mut pos);
        fvec[..m].copy_from_slice(&pos);
        for alpha in 0..n {
            fvec[m + alpha] = map.value(node, alpha);
        }
        let fperp = pperp.apply(&fvec);
        let mut r2 = 0.0;
        for d in 0..dim {
            let r = hvec[d] - fperp[d];
            r2 += r * r;
        }
        sup = sup.max(r2.sqrt());
        l2 += r2 * detg.max(0.0).sqrt() * cell;

        let mut rate2 = 0.0;
        for alpha in 0..n {
            let mut rate = -map.value(node, alpha);
            for i in 0..m {
                for j in 0..m {
                    rate += ginv.get(i, j) * jet.hess(i, j, alpha);
                }
                rate += pos[i] * jet.slope(i, alpha);
            }
            rate2 += rate * rate;
        }
        graph_sup = graph_sup.max(rate2.sqrt());
    }
    ExpanderReport {
        s: state.time,
        residual_sup: sup,
        residual_l2: l2.sqrt(),
        graph_residual_sup: graph_sup,
    }
}

/// `solve_expander_flow`: run the normalized flow from `initial` until the
/// ambient residual drops below `tol_exp` or `s_end` is reached.
pub fn solve_expander_flow(
    initial: &GridMap,
    cfg: &ExpanderConfig,
) -> Result<ExpanderOutcome, FlowError> {
    solve_expander_flow_with(initial, cfg, |_, _| {})
}

/// `solve_expander_flow` with a per-report observer (state at report time,
/// report); used by the CLI to interleave monitor evaluation.
pub fn solve_expander_flow_with<F>(
    initial: &GridMap,
    cfg: &ExpanderConfig,
    mut observe: F,
) -> Result<ExpanderOutcome, FlowError>
where
    F: FnMut(&FlowState, &ExpanderReport),
{
    let grid = initial.grid.clone();
    let dt = cfl_dt(&grid, cfg.cfl_factor);
    let tol = 10.0 * grid.h * grid.h;
    let mut state = FlowState::new(initial.clone(), Mode::Normalized);
    let mut series = vec![expander_residual(&state)];
    observe(&state, &series[0]);
    let mut converged = series[0].residual_sup < cfg.tol_exp;
    while !converged && state.time < cfg.s_end - 1e-12 {
        let step_dt = dt.min(cfg.s_end - state.time);
        state = step(&state, step_dt, cfg.threads)?;
        if state.step_count % cfg.report_every as u64 == 0 || state.time >= cfg.s_end - 1e-12 {
            let report = expander_residual(&state);
            converged = report.residual_sup < cfg.tol_exp;
            observe(&state, &report);
            series.push(report);
        }
    }
    let jets = JetFields::compute(&state.map);
    let mask = grid.inner_mask();
    let mut min_p = f64::INFINITY;
    for node in 0..grid.node_count() {
        if mask[node] {
            let (p, _, _) = geometry::area_p(&jets.jet_at(node));
            min_p = min_p.min(p);
        }
    }
    let decay_rate = if series.len() >= 3 {
        let a = &series[series.len() - 3];
        let b = &series[series.len() - 1];
        if a.residual_sup > 0.0 && b.residual_sup > 0.0 && b.s > a.s {
            Some((b.residual_sup.ln() - a.residual_sup.ln()) / (b.s - a.s))
        } else {
            None
        }
    } else {
        None
    };
    Ok(ExpanderOutcome {
        converged,
        endpoint_min_p: min_p,
        endpoint_uniform: min_p >= cfg.epsilon - tol,
        decay_rate,
        state,
        series,
    })
}

/// Sup-norm change of one normalized step from `state`; a converged
/// expander endpoint moves by at most `dt * tol_exp`.
pub fn one_step_delta(state: &FlowState, cfl_factor: f64, threads: usize) -> Result<f64, FlowError> {
    let dt = cfl_dt(&state.map.grid, cfl_factor);
    let next = step(state, dt, threads)?;
    let mut sup: f64 = 0.0;
    for (a, b) in state.map.values.iter().zip(&next.map.values) {
        sup = sup.max((a - b).abs());
    }
    Ok(sup)
}

/// Cubic Lagrange interpolation of a map at an off-grid point, separable
/// per axis with clamped 4-node windows.
pub fn interp_map(map: &GridMap, point: &[f64]) -> Vec<f64> {
    let grid = &map.grid;
    let m = grid.m;
    debug_assert_eq!(point.len(), m);
    // per-axis window base index and Lagrange weights
    let mut bases = vec![0usize; m];
    let mut weights = vec![[0.0; 4]; m];
    for axis in 0..m {
        let u = (point[axis] + grid.half_width) / grid.h;
        let i = (u.floor() as isize - 1)
            .clamp(0, grid.nodes as isize - 4) as usize;
        bases[axis] = i;
        let t = u - i as f64; // in [~1, ~2] for interior points
        let node_offsets = [0.0, 1.0, 2.0, 3.0];
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (t - node_offsets[b]) / (node_offsets[a] - node_offsets[b]);
                }
            }
            weights[axis][a] = w;
        }
    }
    let mut out = vec![0.0; map.n];
    // tensor-product accumulation over the 4^m window
    let mut offsets = vec![0usize; m];
    loop {
        let mut w = 1.0;
        let mut idx = 0usize;
        for axis in 0..m {
            w *= weights[axis][offsets[axis]];
            idx = idx * grid.nodes + bases[axis] + offsets[axis];
        }
        for alpha in 0..map.n {
            out[alpha] += w * map.value(idx, alpha);
        }
        // odometer over the window
        let mut axis = m;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            offsets[axis] += 1;
            if offsets[axis] < 4 {
                break;
            }
            offsets[axis] = 0;
        }
    }
}

/// Self-similarity check: evolve the endpoint's unnormalized lift under the
/// raw flow to `t_short` and compare against the predicted profile
/// `sqrt(2t+1) * f(x / sqrt(2t+1))`; returns the inner-region sup error.
pub fn self_similarity_error(
    endpoint: &GridMap,
    t_short: f64,
    cfl_factor: f64,
    threads: usize,
) -> Result<f64, FlowError> {
    let grid = endpoint.grid.clone();
    let dt = cfl_dt(&grid, cfl_factor);
    let mut state = FlowState::new(endpoint.clone(), Mode::Raw);
    while state.time < t_short - 1e-12 {
        let step_dt = dt.min(t_short - state.time);
        state = step(&state, step_dt, threads)?;
    }
    let scale = (2.0 * state.time + 1.0).sqrt();
    let mask = grid.inner_mask();
    let mut pos = vec![0.0; grid.m];
    let mut sup: f64 = 0.0;
    for node in 0..grid.node_count() {
        if !mask[node] {
            continue;
        }
        grid.position(node, &mut pos);
        let shrunk: Vec<f64> = pos.iter().map(|x| x / scale).collect();
        let predicted = interp_map(endpoint, &shrunk);
        for alpha in 0..endpoint.n {
            let err = (state.map.value(node, alpha) - scale * predicted[alpha]).abs();
            sup = sup.max(err);
        }
    }
    Ok(sup)
}
