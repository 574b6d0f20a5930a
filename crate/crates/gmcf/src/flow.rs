//! Time integration of the non-parametric mean curvature flow and its
//! normalized version on the truncated grid.
//!
//! Raw mode integrates `df/dt = tr_g D^2 f`; normalized mode integrates
//! `df/ds = tr_g D^2 f - f + <x, Df>`, the graph form of `dF/ds = H - F`
//! after absorbing the tangential part of `-F`.

use std::fmt;

use crate::geometry::Jet;
use crate::grid::{diff1, diff2, Grid, GridMap};
use crate::linalg::SquareMat;
use crate::parallel::par_fill;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Raw,
    Normalized,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Raw => write!(f, "raw"),
            Mode::Normalized => write!(f, "normalized"),
        }
    }
}

/// Map plus time coordinate; `time` is `t` in raw mode and `s` in
/// normalized mode.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub map: GridMap,
    pub time: f64,
    pub mode: Mode,
    pub step_count: u64,
}

impl FlowState {
    pub fn new(map: GridMap, mode: Mode) -> Self {
        FlowState {
            map,
            time: 0.0,
            mode,
            step_count: 0,
        }
    }

    /// Unnormalized time `t` for a normalized state (`t = (e^{2s}-1)/2`),
    /// or the time itself in raw mode.
    pub fn raw_time(&self) -> f64 {
        match self.mode {
            Mode::Raw => self.time,
            Mode::Normalized => 0.5 * ((2.0 * self.time).exp() - 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowError {
    /// Non-finite jet or state value; carries the offending node position.
    Instability { node: usize, position: Vec<f64> },
    StepTooLarge { dt: f64, limit: f64 },
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::Instability { node, position } => {
                write!(f, "instability: non-finite value at node {node} {position:?}")
            }
            FlowError::StepTooLarge { dt, limit } => {
                write!(f, "step {dt} exceeds the CFL limit {limit}")
            }
        }
    }
}

impl std::error::Error for FlowError {}

/// All first and second derivative fields of a map, from the grid stencils.
pub struct JetFields {
    m: usize,
    n: usize,
    /// `d1[axis * n + alpha]` — first derivatives.
    d1: Vec<Vec<f64>>,
    /// `d2[pair(a, b) * n + alpha]` — second derivatives, `a <= b`.
    d2: Vec<Vec<f64>>,
}

#[inline]
fn pair_index(m: usize, a: usize, b: usize) -> usize {
    // index of (a, b) with a <= b in row-major upper-triangular order
    debug_assert!(a <= b);
    a * m - a * (a + 1) / 2 + b
}

impl JetFields {
    pub fn compute(map: &GridMap) -> JetFields {
        let grid = &map.grid;
        let (m, n) = (grid.m, map.n);
        let mut d1 = Vec::with_capacity(m * n);
        let mut d2 = Vec::with_capacity(m * (m + 1) / 2 * n);
        let comps: Vec<Vec<f64>> = (0..n).map(|a| map.component(a)).collect();
        for axis in 0..m {
            for comp in comps.iter() {
                d1.push(diff1(grid, comp, axis));
            }
        }
        for a in 0..m {
            for b in a..m {
                for comp in comps.iter() {
                    d2.push(diff2(grid, comp, a, b));
                }
            }
        }
        JetFields { m, n, d1, d2 }
    }

    /// Assemble the 2-jet at one node.
    pub fn jet_at(&self, node: usize) -> Jet {
        let (m, n) = (self.m, self.n);
        let mut jet = Jet::zero(m, n);
        for axis in 0..m {
            for alpha in 0..n {
                jet.j[axis * n + alpha] = self.d1[axis * n + alpha][node];
            }
        }
        for a in 0..m {
            for b in a..m {
                for alpha in 0..n {
                    let v = self.d2[pair_index(m, a, b) * n + alpha][node];
                    jet.h2[(a * m + b) * n + alpha] = v;
                    jet.h2[(b * m + a) * n + alpha] = v;
                }
            }
        }
        jet
    }
}

fn rhs_at_node(
    grid: &Grid,
    jets: &JetFields,
    map: &GridMap,
    node: usize,
    comp: usize,
    normalized: bool,
    pos_buf: &mut Vec<f64>,
) -> f64 {
    if grid.is_boundary(node) {
        return 0.0;
    }
    let (m, n) = (grid.m, map.n);
    // g = I + J J^T from the first-derivative fields.
    let mut g = SquareMat::identity(m);
    for i in 0..m {
        for k in 0..m {
            let mut s = 0.0;
            for alpha in 0..n {
                s += jets.d1[i * n + alpha][node] * jets.d1[k * n + alpha][node];
            }
            g.data[i * m + k] += s;
        }
    }
    let (ginv, _) = g.inverse_det();
    let mut rate = 0.0;
    for i in 0..m {
        for k in 0..m {
            let w = if i == k { 1.0 } else { 2.0 };
            if k < i {
                continue;
            }
            rate += w * ginv.get(i, k) * jets.d2[pair_index(m, i, k) * n + comp][node];
        }
    }
    if normalized {
        pos_buf.resize(m, 0.0);
        grid.position(node, pos_buf);
        rate -= map.value(node, comp);
        for i in 0..m {
            rate += pos_buf[i] * jets.d1[i * n + comp][node];
        }
    }
    rate
}

fn rhs_impl(state: &FlowState, normalized: bool, threads: usize) -> Result<Vec<f64>, FlowError> {
    let map = &state.map;
    let grid = &map.grid;
    let n = map.n;
    let jets = JetFields::compute(map);
    let mut out = vec![0.0; map.values.len()];
    par_fill(threads, &mut out, |idx| {
        let node = idx / n;
        let comp = idx % n;
        let mut pos = Vec::new();
        rhs_at_node(grid, &jets, map, node, comp, normalized, &mut pos)
    });
    if let Some(bad) = out.iter().position(|v| !v.is_finite()) {
        let node = bad / n;
        let mut position = vec![0.0; grid.m];
        grid.position(node, &mut position);
        return Err(FlowError::Instability { node, position });
    }
    Ok(out)
}

/// `mcf_rhs`: `rate^alpha = g^{ij} d_i d_j f^alpha` at interior nodes,
/// zero on the frozen boundary.
pub fn mcf_rhs(state: &FlowState, threads: usize) -> Result<Vec<f64>, FlowError> {
    debug_assert_eq!(state.mode, Mode::Raw);
    rhs_impl(state, false, threads)
}

/// `normalized_rhs`: `rate^alpha = g^{ij} d_i d_j f^alpha - f^alpha
/// + <x, Df^alpha>` at interior nodes, zero on the frozen boundary.
pub fn normalized_rhs(state: &FlowState, threads: usize) -> Result<Vec<f64>, FlowError> {
    debug_assert_eq!(state.mode, Mode::Normalized);
    rhs_impl(state, true, threads)
}

/// Rate of the state's own mode.
pub fn rhs(state: &FlowState, threads: usize) -> Result<Vec<f64>, FlowError> {
    match state.mode {
        Mode::Raw => mcf_rhs(state, threads),
        Mode::Normalized => normalized_rhs(state, threads),
    }
}

/// Universal explicit CFL step: `dt = cfl_factor * h^2 / (2m)`.
///
/// `g >= I` bounds the symbol of `g^{ij} d_i d_j` by the flat Laplacian,
/// so this is sufficient for every state; no per-step spectral estimate.
pub fn cfl_dt(grid: &Grid, cfl_factor: f64) -> f64 {
    cfl_factor * grid.h * grid.h / (2.0 * grid.m as f64)
}

/// One explicit Heun (RK2) step with double buffering.
pub fn step(state: &FlowState, dt: f64, threads: usize) -> Result<FlowState, FlowError> {
    let limit = cfl_dt(&state.map.grid, 1.0);
    if dt.abs() > limit * (1.0 + 1e-12) {
        return Err(FlowError::StepTooLarge { dt, limit });
    }
    let k1 = rhs(state, threads)?;
    let mut mid = state.clone();
    for (v, k) in mid.map.values.iter_mut().zip(&k1) {
        *v += dt * k;
    }
    mid.time = state.time + dt;
    let k2 = rhs(&mid, threads)?;
    let mut next = state.clone();
    for ((v, a), b) in next.map.values.iter_mut().zip(&k1).zip(&k2) {
        *v += 0.5 * dt * (a + b);
    }
    next.time = state.time + dt;
    next.step_count = state.step_count + 1;
    if let Some(bad) = next.map.values.iter().position(|v| !v.is_finite()) {
        let node = bad / next.map.n;
        let mut position = vec![0.0; next.map.grid.m];
        next.map.grid.position(node, &mut position);
        return Err(FlowError::Instability { node, position });
    }
    Ok(next)
}
