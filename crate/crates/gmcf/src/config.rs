//! Flat key=value run configuration.
//!
//! Every key has a documented default; unknown keys are rejected with the
//! offending line number, and the parsed config can be echoed back as text
//! for provenance.

use std::fmt;

use crate::flow::Mode;
use crate::grid::{build_grid, Grid, GridError};
use crate::initialdata::{InitialKind, InitialSpec};
use crate::invariants::BoundSpec;

#[derive(Debug, Clone)]
pub struct RunConfig {
    // grid
    pub m: usize,
    pub n: usize,
    pub nodes: usize,
    pub half_width: f64,
    pub band: f64,
    // flow
    pub mode: Mode,
    pub horizon: f64,
    pub epsilon: f64,
    pub cfl_factor: f64,
    pub monitor_every: usize,
    pub snapshot_every: usize,
    pub tol_factor: f64,
    pub seed: u64,
    // initial datum
    pub initial: String,
    pub beta: f64,
    pub a: f64,
    pub k: Vec<f64>,
    pub scale: f64,
    pub coeffs: Vec<f64>,
    pub r0: Option<f64>,
    pub r1: Option<f64>,
    // monitors
    pub monitors: Vec<String>,
    pub delta: f64,
    pub sigma: f64,
    pub decay_k: f64,
    pub phi: Vec<f64>,
    pub y0: Vec<f64>,
    pub t0: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            m: 2,
            n: 2,
            nodes: 129,
            half_width: 8.0,
            band: 1.0,
            mode: Mode::Raw,
            horizon: 1.0,
            epsilon: 0.25,
            cfl_factor: 0.5,
            monitor_every: 16,
            snapshot_every: 0,
            tol_factor: 10.0,
            seed: 0,
            initial: "cone2theta".to_string(),
            beta: 0.2,
            a: 0.5,
            k: vec![1.0, 1.0],
            scale: 1.0,
            coeffs: vec![0.3, 0.0, 0.0, 0.3],
            r0: None,
            r1: None,
            monitors: vec![
                "p_min".to_string(),
                "mean_ratio".to_string(),
                "interior_H".to_string(),
                "interior_A".to_string(),
                "lili".to_string(),
            ],
            delta: 0.5,
            sigma: 1.0,
            decay_k: 2.0,
            phi: vec![1.0, 1.0],
            y0: Vec::new(),
            t0: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, message: String) -> ConfigError {
    ConfigError { line, message }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse()
        .map_err(|_| err(line, format!("malformed value for {key}: {v:?}")))
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse()
        .map_err(|_| err(line, format!("malformed value for {key}: {v:?}")))
}

fn parse_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| err(line, format!("malformed value in {key}: {s:?}")))
        })
        .collect()
}

/// `parse_config`: flat `key=value` lines, `#` comments, documented
/// defaults for everything omitted.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(lineno, format!("expected key=value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "m" => cfg.m = parse_usize(lineno, key, value)?,
            "n" => cfg.n = parse_usize(lineno, key, value)?,
            "N" => {
                cfg.nodes = parse_usize(lineno, key, value)?;
                if cfg.nodes % 2 == 0 {
                    return Err(err(lineno, format!("N must be odd, got {}", cfg.nodes)));
                }
            }
            "L" => cfg.half_width = parse_f64(lineno, key, value)?,
            "band" => cfg.band = parse_f64(lineno, key, value)?,
            "mode" => {
                cfg.mode = match value {
                    "raw" => Mode::Raw,
                    "normalized" => Mode::Normalized,
                    _ => {
                        return Err(err(
                            lineno,
                            format!("mode must be raw or normalized, got {value:?}"),
                        ))
                    }
                }
            }
            "horizon" => cfg.horizon = parse_f64(lineno, key, value)?,
            "epsilon" => {
                cfg.epsilon = parse_f64(lineno, key, value)?;
                if !(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0) {
                    return Err(err(
                        lineno,
                        format!("epsilon must lie in (0, 1], got {}", cfg.epsilon),
                    ));
                }
            }
            "cfl_factor" => {
                cfg.cfl_factor = parse_f64(lineno, key, value)?;
                if !(cfg.cfl_factor > 0.0 && cfg.cfl_factor < 1.0) {
                    return Err(err(
                        lineno,
                        format!("cfl_factor must lie in (0, 1), got {}", cfg.cfl_factor),
                    ));
                }
            }
            "monitor_every" => cfg.monitor_every = parse_usize(lineno, key, value)?,
            "snapshot_every" => cfg.snapshot_every = parse_usize(lineno, key, value)?,
            "tol_factor" => cfg.tol_factor = parse_f64(lineno, key, value)?,
            "seed" => {
                cfg.seed = value
                    .parse()
                    .map_err(|_| err(lineno, format!("malformed value for seed: {value:?}")))?
            }
            "initial" => cfg.initial = value.to_string(),
            "beta" => cfg.beta = parse_f64(lineno, key, value)?,
            "a" => cfg.a = parse_f64(lineno, key, value)?,
            "k" => cfg.k = parse_list(lineno, key, value)?,
            "scale" => cfg.scale = parse_f64(lineno, key, value)?,
            "coeffs" => cfg.coeffs = parse_list(lineno, key, value)?,
            "r0" => cfg.r0 = Some(parse_f64(lineno, key, value)?),
            "r1" => cfg.r1 = Some(parse_f64(lineno, key, value)?),
            "monitors" => {
                cfg.monitors = value.split(',').map(|s| s.trim().to_string()).collect()
            }
            "delta" => cfg.delta = parse_f64(lineno, key, value)?,
            "sigma" => cfg.sigma = parse_f64(lineno, key, value)?,
            "decay_k" => cfg.decay_k = parse_f64(lineno, key, value)?,
            "phi" => cfg.phi = parse_list(lineno, key, value)?,
            "y0" => cfg.y0 = parse_list(lineno, key, value)?,
            "t0" => cfg.t0 = parse_f64(lineno, key, value)?,
            _ => return Err(err(lineno, format!("unknown key {key:?}"))),
        }
    }
    for (i, name) in cfg.monitors.iter().enumerate() {
        if !KNOWN_MONITORS.contains(&name.as_str()) {
            return Err(err(0, format!("unknown monitor kind {name:?} (entry {})", i + 1)));
        }
    }
    if !KNOWN_INITIAL.contains(&cfg.initial.as_str()) {
        return Err(err(0, format!("unknown initial datum {:?}", cfg.initial)));
    }
    Ok(cfg)
}

const KNOWN_MONITORS: &[&str] = &[
    "p_min",
    "mean_ratio",
    "interior_H",
    "interior_A",
    "decay_a",
    "decay_b",
    "decay_c",
    "growth_poly",
    "conical",
    "gaussian",
    "lili",
    "splitting_p0",
    "evol_consistency",
];

const KNOWN_INITIAL: &[&str] = &[
    "linear",
    "cone2theta",
    "sinlog",
    "bowl_like",
    "shear",
    "bump",
];

impl RunConfig {
    pub fn build_grid(&self) -> Result<Grid, GridError> {
        build_grid(self.m, self.nodes, self.half_width, self.band)
    }

    pub fn initial_spec(&self) -> InitialSpec {
        let kind = match self.initial.as_str() {
            "linear" => InitialKind::Linear {
                coeffs: self.coeffs.clone(),
            },
            "cone2theta" => InitialKind::Cone2Theta { beta: self.beta },
            "sinlog" => InitialKind::SinLog,
            "bowl_like" => InitialKind::BowlLike { scale: self.scale },
            "shear" => InitialKind::Shear { a: self.a },
            "bump" => InitialKind::Bump {
                a: self.a,
                k: self.k.clone(),
            },
            other => unreachable!("validated initial name {other}"),
        };
        let mut spec = InitialSpec::new(kind);
        if let Some(r0) = self.r0 {
            spec.r0 = r0;
        }
        if let Some(r1) = self.r1 {
            spec.r1 = r1;
        }
        spec
    }

    pub fn bound_specs(&self) -> Vec<BoundSpec> {
        self.monitors
            .iter()
            .map(|name| match name.as_str() {
                "p_min" => BoundSpec::PMin {
                    epsilon: self.epsilon,
                },
                "mean_ratio" => BoundSpec::MeanRatio,
                "interior_H" => BoundSpec::InteriorH {
                    epsilon: self.epsilon,
                },
                "interior_A" => BoundSpec::InteriorA {
                    epsilon: self.epsilon,
                },
                "decay_a" => BoundSpec::DecayA {
                    epsilon: self.epsilon,
                    sigma: self.sigma,
                },
                "decay_b" => BoundSpec::DecayB {
                    epsilon: self.epsilon,
                    k: self.decay_k,
                },
                "decay_c" => BoundSpec::DecayC {
                    epsilon: self.epsilon,
                    sigma: self.sigma,
                },
                "growth_poly" => BoundSpec::GrowthPoly {
                    phi: self.phi.clone(),
                },
                "conical" => BoundSpec::Conical { delta: self.delta },
                "gaussian" => BoundSpec::Gaussian {
                    y0: if self.y0.is_empty() {
                        vec![0.0; self.m + self.n]
                    } else {
                        self.y0.clone()
                    },
                    t0: self.t0,
                },
                "lili" => BoundSpec::Lili,
                "splitting_p0" => BoundSpec::SplittingP0,
                "evol_consistency" => BoundSpec::EvolConsistency,
                other => unreachable!("validated monitor name {other}"),
            })
            .collect()
    }

    /// Sup/min tolerance `tol_factor * h^2` at this config's resolution.
    pub fn tol(&self) -> f64 {
        let h = 2.0 * self.half_width / (self.nodes - 1) as f64;
        self.tol_factor * h * h
    }

    /// Full key=value echo for provenance; parses back to the same config.
    pub fn echo(&self) -> String {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = String::new();
        out.push_str(&format!("m={}\n", self.m));
        out.push_str(&format!("n={}\n", self.n));
        out.push_str(&format!("N={}\n", self.nodes));
        out.push_str(&format!("L={}\n", self.half_width));
        out.push_str(&format!("band={}\n", self.band));
        out.push_str(&format!("mode={}\n", self.mode));
        out.push_str(&format!("horizon={}\n", self.horizon));
        out.push_str(&format!("epsilon={}\n", self.epsilon));
        out.push_str(&format!("cfl_factor={}\n", self.cfl_factor));
        out.push_str(&format!("monitor_every={}\n", self.monitor_every));
        out.push_str(&format!("snapshot_every={}\n", self.snapshot_every));
        out.push_str(&format!("tol_factor={}\n", self.tol_factor));
        out.push_str(&format!("seed={}\n", self.seed));
        out.push_str(&format!("initial={}\n", self.initial));
        out.push_str(&format!("beta={}\n", self.beta));
        out.push_str(&format!("a={}\n", self.a));
        out.push_str(&format!("k={}\n", list(&self.k)));
        out.push_str(&format!("scale={}\n", self.scale));
        out.push_str(&format!("coeffs={}\n", list(&self.coeffs)));
        if let Some(r0) = self.r0 {
            out.push_str(&format!("r0={r0}\n"));
        }
        if let Some(r1) = self.r1 {
            out.push_str(&format!("r1={r1}\n"));
        }
        out.push_str(&format!("monitors={}\n", self.monitors.join(",")));
        out.push_str(&format!("delta={}\n", self.delta));
        out.push_str(&format!("sigma={}\n", self.sigma));
        out.push_str(&format!("decay_k={}\n", self.decay_k));
        out.push_str(&format!("phi={}\n", list(&self.phi)));
        if !self.y0.is_empty() {
            out.push_str(&format!("y0={}\n", list(&self.y0)));
        }
        out.push_str(&format!("t0={}\n", self.t0));
        out
    }
}
