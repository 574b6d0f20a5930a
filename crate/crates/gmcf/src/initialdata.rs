//! Catalog of initial maps, each with a certified singular-value summary
//! over the inner region.

use std::fmt;

use crate::flow::JetFields;
use crate::geometry;
use crate::grid::{Grid, GridMap};

/// Smooth transition profile: 0 for `rho <= 0`, 1 for `rho >= 1`, and
/// `exp(1 - 1/(1 - (1-rho)^2))` in between. Fixed explicitly so that
/// certificates are reproducible bit-for-bit.
pub fn cutoff(rho: f64) -> f64 {
    if rho <= 0.0 {
        0.0
    } else if rho >= 1.0 {
        1.0
    } else {
        let w = 1.0 - (1.0 - rho) * (1.0 - rho);
        (1.0 - 1.0 / w).exp()
    }
}

/// Catalog entry with its parameters.
#[derive(Debug, Clone)]
pub enum InitialKind {
    /// `f = A x` for an `n x m` coefficient matrix, row-major.
    Linear { coeffs: Vec<f64> },
    /// `f = beta r (cos 2theta, sin 2theta)` smoothed off near the origin,
    /// exactly 1-homogeneous for `r >= r1`; constant in extra variables.
    Cone2Theta { beta: f64 },
    /// `f = (|x| sin log |x|, 0)` outside the unit ball, quintic fill inside.
    SinLog,
    /// Rotationally symmetric translator profile, `f = (scale u(|x|), 0)`.
    BowlLike { scale: f64 },
    /// `f = (x1 + a sin x2, x2)`: area preserving, `p = 0` identically.
    Shear { a: f64 },
    /// Compactly supported `f = (a sin(k.x) prod_i cutoff(x_i), 0)`.
    Bump { a: f64, k: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct InitialSpec {
    pub kind: InitialKind,
    /// Smoothing radius (cutoff reaches 0 / support edge reaches 1).
    pub r0: f64,
    /// Outer radius where the data is exactly in closed form.
    pub r1: f64,
}

impl InitialSpec {
    pub fn new(kind: InitialKind) -> Self {
        let (r0, r1) = match kind {
            InitialKind::Bump { .. } => (4.0, 6.0),
            _ => (1.0, 3.0),
        };
        InitialSpec { kind, r0, r1 }
    }
}

/// Inner-region summary attached to every built datum.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub min_p: f64,
    pub max_lambda: f64,
    /// `sup |F_perp|^2 / (1 + |F|^2)^{1-delta}` at the build's `delta`.
    pub conical_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitError {
    BadRadii { r0: f64, r1: f64, limit: f64 },
    DimensionTooSmall { need: usize, got: usize },
    BadTarget { need: usize, got: usize },
    NotUniform { min_p: f64, epsilon: f64 },
    BadParam(String),
}

impl fmt::Display for InitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitError::BadRadii { r0, r1, limit } => {
                write!(f, "radii must satisfy 0 < r0 < r1 < {limit}, got r0={r0}, r1={r1}")
            }
            InitError::DimensionTooSmall { need, got } => {
                write!(f, "entry needs m >= {need}, got {got}")
            }
            InitError::BadTarget { need, got } => write!(f, "entry needs n = {need}, got {got}"),
            InitError::NotUniform { min_p, epsilon } => write!(
                f,
                "certificate min p = {min_p} below the configured epsilon = {epsilon}"
            ),
            InitError::BadParam(s) => write!(f, "{s}"),
        }
    }
}

impl std::error::Error for InitError {}

fn quintic_fill(rho: f64) -> f64 {
    // Matches |x| sin log |x| at rho = 1 in value, first and second
    // derivative, with a triple zero at the origin.
    let (a, b, c) = (-3.5, 6.0, -2.5);
    rho * rho * rho * (a + rho * (b + rho * c))
}

/// `sinlog` radial profile.
pub fn sinlog_profile(rho: f64) -> f64 {
    if rho >= 1.0 {
        rho * rho.ln().sin()
    } else {
        quintic_fill(rho)
    }
}

/// `bowl_profile`: radial samples of the graphical translator,
/// `u''/(1+u'^2) + (m-1) u'/r = 1`, `u(0) = u'(0) = 0`.
///
/// Classical RK4 from a series start `u = r^2/(2m)`; returns samples of
/// `u` on the uniform mesh `r = i * h_ode`.
pub fn bowl_profile(m: usize, r_max: f64, h_ode: f64) -> Vec<f64> {
    assert!(m >= 2);
    assert!(r_max > 0.0 && h_ode > 0.0);
    let steps = (r_max / h_ode).ceil() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mf = m as f64;
    // series start at the first mesh point
    let mut r = h_ode;
    let mut u = r * r / (2.0 * mf);
    let mut v = r / mf;
    out.push(0.0);
    out.push(u);
    let rhs = |r: f64, v: f64| (1.0 + v * v) * (1.0 - (mf - 1.0) * v / r);
    for _ in 1..steps {
        let k1u = v;
        let k1v = rhs(r, v);
        let k2u = v + 0.5 * h_ode * k1v;
        let k2v = rhs(r + 0.5 * h_ode, v + 0.5 * h_ode * k1v);
        let k3u = v + 0.5 * h_ode * k2v;
        let k3v = rhs(r + 0.5 * h_ode, v + 0.5 * h_ode * k2v);
        let k4u = v + h_ode * k3v;
        let k4v = rhs(r + h_ode, v + h_ode * k3v);
        u += h_ode / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h_ode / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        r += h_ode;
        out.push(u);
    }
    out
}

fn sample_profile(table: &[f64], h_ode: f64, r: f64) -> f64 {
    let x = r / h_ode;
    let i = (x.floor() as usize).min(table.len() - 2);
    let frac = x - i as f64;
    table[i] * (1.0 - frac) + table[i + 1] * frac
}

fn evaluate(spec: &InitialSpec, m: usize, n: usize, x: &[f64], f: &mut [f64], bowl: Option<&(Vec<f64>, f64)>) {
    for v in f.iter_mut() {
        *v = 0.0;
    }
    match &spec.kind {
        InitialKind::Linear { coeffs } => {
            for alpha in 0..n {
                let mut s = 0.0;
                for i in 0..m {
                    s += coeffs[alpha * m + i] * x[i];
                }
                f[alpha] = s;
            }
        }
        InitialKind::Cone2Theta { beta } => {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let r = r2.sqrt();
            if r > 1e-300 {
                let chi = cutoff((r - spec.r0) / (spec.r1 - spec.r0));
                f[0] = beta * chi * (x[0] * x[0] - x[1] * x[1]) / r;
                f[1] = beta * chi * 2.0 * x[0] * x[1] / r;
            }
        }
        InitialKind::SinLog => {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            f[0] = sinlog_profile(r);
        }
        InitialKind::BowlLike { scale } => {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let (table, h_ode) = bowl.expect("bowl profile table");
            f[0] = scale * sample_profile(table, *h_ode, r);
        }
        InitialKind::Shear { a } => {
            f[0] = x[0] + a * x[1].sin();
            f[1] = x[1];
        }
        InitialKind::Bump { a, k } => {
            let mut phase = 0.0;
            let mut window = 1.0;
            for i in 0..m {
                phase += k[i] * x[i];
                window *= cutoff((spec.r1 - x[i].abs()) / (spec.r1 - spec.r0));
            }
            f[0] = a * phase.sin() * window;
        }
    }
}

/// Certificate over the inner region, from the grid stencils.
pub fn certify(map: &GridMap, delta: f64) -> Certificate {
    let grid = &map.grid;
    let jets = JetFields::compute(map);
    let mask = grid.inner_mask();
    let mut min_p = f64::INFINITY;
    let mut max_lambda: f64 = 0.0;
    let mut conical_ratio: f64 = 0.0;
    let mut pos = vec![0.0; grid.m];
    for node in 0..grid.node_count() {
        if !mask[node] {
            continue;
        }
        let jet = jets.jet_at(node);
        let (p, _, _) = geometry::area_p(&jet);
        min_p = min_p.min(p);
        let lambda = geometry::singular_values(&jet);
        max_lambda = max_lambda.max(lambda[0]);

        grid.position(node, &mut pos);
        let (pperp, _, _) = geometry::second_fundamental(&jet);
        let dim = grid.m + map.n;
        let mut fvec = vec![0.0; dim];
        fvec[..grid.m].copy_from_slice(&pos);
        for alpha in 0..map.n {
            fvec[grid.m + alpha] = map.value(node, alpha);
        }
        let fperp = pperp.apply(&fvec);
        let f2: f64 = fvec.iter().map(|v| v * v).sum();
        let fperp2: f64 = fperp.iter().map(|v| v * v).sum();
        conical_ratio = conical_ratio.max(fperp2 / (1.0 + f2).powf(1.0 - delta));
    }
    Certificate {
        min_p,
        max_lambda,
        conical_ratio,
    }
}

/// `build_initial`: sample a catalog entry on the grid and certify it.
///
/// `epsilon` is enforced only for entries that claim the uniformly
/// area-decreasing property (`linear`, `cone2theta`).
pub fn build_initial(
    spec: &InitialSpec,
    grid: &Grid,
    n: usize,
    epsilon: f64,
    delta: f64,
) -> Result<(GridMap, Certificate), InitError> {
    let m = grid.m;
    let conical_entry = matches!(
        spec.kind,
        InitialKind::Cone2Theta { .. } | InitialKind::Bump { .. }
    );
    if conical_entry {
        let limit = grid.half_width - grid.band;
        if !(spec.r0 > 0.0 && spec.r0 < spec.r1 && spec.r1 < limit) {
            return Err(InitError::BadRadii {
                r0: spec.r0,
                r1: spec.r1,
                limit,
            });
        }
    }
    match &spec.kind {
        InitialKind::Linear { coeffs } => {
            if coeffs.len() != m * n {
                return Err(InitError::BadParam(format!(
                    "linear coefficient matrix needs {} entries, got {}",
                    m * n,
                    coeffs.len()
                )));
            }
        }
        InitialKind::Cone2Theta { beta } => {
            if !(beta.is_finite() && *beta > 0.0) {
                return Err(InitError::BadParam(format!("beta must be positive, got {beta}")));
            }
            if m < 2 {
                return Err(InitError::DimensionTooSmall { need: 2, got: m });
            }
            if n != 2 {
                return Err(InitError::BadTarget { need: 2, got: n });
            }
        }
        InitialKind::Shear { .. } => {
            if m < 2 {
                return Err(InitError::DimensionTooSmall { need: 2, got: m });
            }
            if n != 2 {
                return Err(InitError::BadTarget { need: 2, got: n });
            }
        }
        InitialKind::BowlLike { .. } => {
            if m < 2 {
                return Err(InitError::DimensionTooSmall { need: 2, got: m });
            }
        }
        InitialKind::Bump { k, .. } => {
            if k.len() != m {
                return Err(InitError::BadParam(format!(
                    "bump wave vector needs {} entries, got {}",
                    m,
                    k.len()
                )));
            }
        }
        InitialKind::SinLog => {}
    }

    let bowl = match spec.kind {
        InitialKind::BowlLike { .. } => {
            let r_max = grid.half_width * (m as f64).sqrt() + 1.0;
            let h_ode = 1e-4;
            Some((bowl_profile(m, r_max, h_ode), h_ode))
        }
        _ => None,
    };
    let map = GridMap::from_fn(grid, n, |x, f| evaluate(spec, m, n, x, f, bowl.as_ref()));
    let cert = certify(&map, delta);
    let claims_uniform = matches!(
        spec.kind,
        InitialKind::Linear { .. } | InitialKind::Cone2Theta { .. }
    );
    if claims_uniform && cert.min_p < epsilon {
        return Err(InitError::NotUniform {
            min_p: cert.min_p,
            epsilon,
        });
    }
    Ok((map, cert))
}
