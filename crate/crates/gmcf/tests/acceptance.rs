//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them).  Desk scale is
//! m = 2, n = 2, N = 129, L = 8, band = 1, epsilon = 0.25 unless a
//! criterion states otherwise; all tolerances are pinned in code.
//!
//! Criterion 7's second clause is expected to fail and is left failing on
//! purpose: with Dirichlet boundary values frozen at the initial data, the
//! normalized flow from the sin-log datum relaxes to a window-dependent
//! stationary profile instead of wandering forever, so a truncated run
//! cannot reproduce the continuum non-convergence.  See the failure detail
//! it prints.

use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gmcf::config::parse_config;
use gmcf::expander::{one_step_delta, self_similarity_error, solve_expander_flow, ExpanderConfig};
use gmcf::flow::{cfl_dt, step, FlowState, Mode};
use gmcf::geometry::{metric, sample, second_fundamental, singular_values, svd_frames, Jet};
use gmcf::grid::{build_grid, GridMap};
use gmcf::initialdata::{build_initial, InitialKind, InitialSpec};
use gmcf::invariants::ode_bound;
use gmcf::run::{evolve, EvolveOutcome};

/// Worker count for the heavy runs; modest so concurrently running
/// criteria do not oversubscribe the machine.
const THREADS: usize = 2;

fn verdict(num: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {num:02} {name}: {tag} ({detail})");
    assert!(pass, "criterion {num:02} {name}: {detail}");
}

// ---------------------------------------------------------------------------
// 1. Geometry kernel against brute-force frame oracles.
// ---------------------------------------------------------------------------

/// Independent pointwise oracle: Gram-Schmidt orthonormal tangent and
/// normal frames, then plain index sums.  Shares no code with the kernel
/// beyond the jet layout.
struct FrameOracle {
    g: [[f64; 2]; 2],
    lambda: [f64; 2],
    /// Ambient second fundamental form vectors, `[i][j][dim]`.
    a_amb: [[[f64; 4]; 2]; 2],
    hvec: [f64; 4],
    norm_a2: f64,
    norm_h2: f64,
    norm_ah2: f64,
    norm_adota2: f64,
    norm_rperp2: f64,
}

fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn frame_oracle(jet: &Jet) -> FrameOracle {
    // Coordinate tangent vectors t_i = (e_i, J_i.) and exact normal
    // spanning vectors n_alpha = (-J_.alpha, e_alpha).
    let mut t = [[0.0; 4]; 2];
    let mut nraw = [[0.0; 4]; 2];
    for i in 0..2 {
        t[i][i] = 1.0;
        for al in 0..2 {
            t[i][2 + al] = jet.slope(i, al);
        }
    }
    for al in 0..2 {
        for i in 0..2 {
            nraw[al][i] = -jet.slope(i, al);
        }
        nraw[al][2 + al] = 1.0;
    }

    // Gram-Schmidt; record the tangent combination tau_a = sum_i c[a][i] t_i.
    let mut tau = [[0.0; 4]; 2];
    let mut c = [[0.0; 2]; 2];
    let mut nu = [[0.0; 4]; 2];
    for a in 0..2 {
        let mut v = t[a];
        let mut coef = [0.0; 2];
        coef[a] = 1.0;
        for b in 0..a {
            let proj = dot4(&v, &tau[b]);
            for d in 0..4 {
                v[d] -= proj * tau[b][d];
            }
            // tau_b itself is a combination of t_0..t_b.
            for i in 0..2 {
                coef[i] -= proj * c[b][i];
            }
        }
        let norm = dot4(&v, &v).sqrt();
        for d in 0..4 {
            tau[a][d] = v[d] / norm;
        }
        for i in 0..2 {
            c[a][i] = coef[i] / norm;
        }
    }
    for r in 0..2 {
        let mut v = nraw[r];
        for s in 0..r {
            let proj = dot4(&v, &nu[s]);
            for d in 0..4 {
                v[d] -= proj * nu[s][d];
            }
        }
        let norm = dot4(&v, &v).sqrt();
        for d in 0..4 {
            nu[r][d] = v[d] / norm;
        }
    }

    let mut g = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = dot4(&t[i], &t[j]);
        }
    }

    // Singular values: closed-form eigenvalues of the 2x2 matrix J^T J.
    let (p, q, r) = {
        let e = |i: usize, al: usize| jet.slope(i, al);
        (
            e(0, 0) * e(0, 0) + e(0, 1) * e(0, 1),
            e(0, 0) * e(1, 0) + e(0, 1) * e(1, 1),
            e(1, 0) * e(1, 0) + e(1, 1) * e(1, 1),
        )
    };
    let disc = (0.25 * (p - r) * (p - r) + q * q).sqrt();
    let lambda = [
        (0.5 * (p + r) + disc).max(0.0).sqrt(),
        (0.5 * (p + r) - disc).max(0.0).sqrt(),
    ];

    // A(d_i, d_j) = normal projection of (0, f_ij).
    let mut a_amb = [[[0.0; 4]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let hij = [0.0, 0.0, jet.hess(i, j, 0), jet.hess(i, j, 1)];
            for r in 0..2 {
                let comp = dot4(&hij, &nu[r]);
                for d in 0..4 {
                    a_amb[i][j][d] += comp * nu[r][d];
                }
            }
        }
    }

    // Frame components a^r_ab in the orthonormal bases.
    let mut af = [[[0.0; 2]; 2]; 2]; // [r][a][b]
    for r in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                let mut v = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        v += c[a][i] * c[b][j] * dot4(&a_amb[i][j], &nu[r]);
                    }
                }
                af[r][a][b] = v;
            }
        }
    }

    let mut norm_a2 = 0.0;
    let mut h = [0.0; 2];
    for r in 0..2 {
        for a in 0..2 {
            h[r] += af[r][a][a];
            for b in 0..2 {
                norm_a2 += af[r][a][b] * af[r][a][b];
            }
        }
    }
    let norm_h2 = h[0] * h[0] + h[1] * h[1];
    let mut hvec = [0.0; 4];
    for r in 0..2 {
        for d in 0..4 {
            hvec[d] += h[r] * nu[r][d];
        }
    }

    let mut norm_ah2 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let ah: f64 = (0..2).map(|r| h[r] * af[r][a][b]).sum();
            norm_ah2 += ah * ah;
        }
    }

    let mut norm_adota2 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    let ip: f64 = (0..2).map(|r| af[r][a][b] * af[r][cc][d]).sum();
                    norm_adota2 += ip * ip;
                }
            }
        }
    }

    let mut norm_rperp2 = 0.0;
    for r in 0..2 {
        for s in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let rr: f64 = (0..2)
                        .map(|cc| af[r][a][cc] * af[s][b][cc] - af[s][a][cc] * af[r][b][cc])
                        .sum();
                    norm_rperp2 += rr * rr;
                }
            }
        }
    }

    FrameOracle {
        g,
        lambda,
        a_amb,
        hvec,
        norm_a2,
        norm_h2,
        norm_ah2,
        norm_adota2,
        norm_rperp2,
    }
}

#[test]
fn criterion_01_geometry_kernel_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x676d6366);
    let tol = 1e-10;
    let mut worst = 0.0f64;
    let mut worst_gap = f64::INFINITY;
    let mut worst_frame = 0.0f64;
    for _ in 0..10_000 {
        let mut jet = Jet::zero(2, 2);
        for v in jet.j.iter_mut() {
            *v = rng.gen_range(-0.9..0.9);
        }
        for i in 0..2 {
            for jj in i..2 {
                for al in 0..2 {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    jet.h2[(i * 2 + jj) * 2 + al] = v;
                    jet.h2[(jj * 2 + i) * 2 + al] = v;
                }
            }
        }

        let oracle = frame_oracle(&jet);
        let (g, _, _) = metric(&jet);
        let (_, a, hvec) = second_fundamental(&jet);
        let lambda = singular_values(&jet);
        let s = sample(&jet);

        let mut d = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((g.get(i, j) - oracle.g[i][j]).abs());
                for dd in 0..4 {
                    d = d.max((a[(i * 2 + j) * 4 + dd] - oracle.a_amb[i][j][dd]).abs());
                }
            }
            d = d.max((lambda[i] - oracle.lambda[i]).abs());
        }
        for dd in 0..4 {
            d = d.max((hvec[dd] - oracle.hvec[dd]).abs());
        }
        d = d.max((s.norm_a2 - oracle.norm_a2).abs());
        d = d.max((s.norm_h2 - oracle.norm_h2).abs());
        d = d.max((s.norm_ah2 - oracle.norm_ah2).abs());
        d = d.max((s.norm_adota2 - oracle.norm_adota2).abs());
        d = d.max((s.norm_rperp2 - oracle.norm_rperp2).abs());
        worst = worst.max(d);
        worst_gap = worst_gap.min(s.lili_gap);

        let f = svd_frames(&jet);
        worst_frame = worst_frame
            .max((f.s11 * f.s11 + f.t11 * f.t11 - 1.0).abs())
            .max((f.s22 * f.s22 + f.t22 * f.t22 - 1.0).abs());
    }
    let pass = worst <= tol && worst_frame <= 1e-12 && worst_gap >= -1e-10;
    verdict(
        1,
        "geometry kernel vs frame oracle",
        pass,
        &format!(
            "worst oracle diff {worst:.2e} <= 1e-10, worst S^2+T^2 defect {worst_frame:.2e} <= 1e-12, min Li-Li gap {worst_gap:.2e} >= -1e-10"
        ),
    );
}

// ---------------------------------------------------------------------------
// 2. Heat limit for small-amplitude data.
// ---------------------------------------------------------------------------

const BUMP_A: f64 = 1e-3;

fn bump_state(nodes: usize, t_end: f64) -> FlowState {
    let grid = build_grid(2, nodes, 8.0, 1.0).expect("grid");
    let spec = InitialSpec::new(InitialKind::Bump {
        a: BUMP_A,
        k: vec![1.0, 1.0],
    });
    let (map, _) = build_initial(&spec, &grid, 2, f64::NEG_INFINITY, 0.5).expect("bump");
    let dt = cfl_dt(&grid, 0.5);
    let mut state = FlowState::new(map, Mode::Raw);
    while state.time < t_end - 1e-12 {
        state = step(&state, dt.min(t_end - state.time), THREADS).expect("step");
    }
    state
}

/// Exact linear heat solution of the bump's first component, evaluated by
/// quadrature of the heat kernel against the closed-form initial datum
/// sampled on a fine fixed source grid (independent of the run resolution;
/// the integrand is smooth and compactly supported, so the trapezoid rule
/// converges faster than any power of the source spacing).
fn heat_oracle_row(targets: &[f64], t: f64) -> Vec<f64> {
    let src_grid = build_grid(2, 257, 8.0, 1.0).expect("grid");
    let spec = InitialSpec::new(InitialKind::Bump {
        a: BUMP_A,
        k: vec![1.0, 1.0],
    });
    let (src, _) = build_initial(&spec, &src_grid, 2, f64::NEG_INFINITY, 0.5).expect("bump");
    let nsrc = src_grid.nodes;
    let h = src_grid.h;
    let norm = h * h / (4.0 * std::f64::consts::PI * t);
    targets
        .iter()
        .map(|&x1| {
            let mut conv = 0.0;
            for si in 0..nsrc {
                let dx = x1 - src_grid.coord(si);
                for sj in 0..nsrc {
                    let u0 = src.value(si * nsrc + sj, 0);
                    if u0 != 0.0 {
                        let dy = src_grid.coord(sj);
                        conv += norm * (-(dx * dx + dy * dy) / (4.0 * t)).exp() * u0;
                    }
                }
            }
            conv
        })
        .collect()
}

#[test]
fn criterion_02_heat_limit() {
    let t_end = 0.5;
    // Row nodes shared by the N=65 and N=129 grids (spacing 0.25).
    let targets: Vec<f64> = (0..57).map(|i| -7.0 + 0.25 * i as f64).collect();
    let oracle = heat_oracle_row(&targets, t_end);

    let row_errors = |state: &FlowState| -> Vec<f64> {
        let grid = &state.map.grid;
        let mid = grid.nodes / 2;
        targets
            .iter()
            .zip(&oracle)
            .map(|(&x1, &conv)| {
                let i = ((x1 + grid.half_width) / grid.h).round() as usize;
                (state.map.value(i * grid.stride(0) + mid, 0) - conv).abs()
            })
            .collect()
    };

    let fine = row_errors(&bump_state(129, t_end));
    let coarse = row_errors(&bump_state(65, t_end));

    let rel_sup = fine.iter().cloned().fold(0.0f64, f64::max) / BUMP_A;
    let rel_tol = 1e-4 + BUMP_A * BUMP_A;

    // Order measured away from the truncation boundary (|x1| <= 6), where
    // the error is stencil-dominated rather than domain-truncation noise.
    let interior: Vec<usize> = targets
        .iter()
        .enumerate()
        .filter(|(_, &x)| x.abs() <= 6.0)
        .map(|(i, _)| i)
        .collect();
    let sup_of = |e: &[f64]| interior.iter().map(|&i| e[i]).fold(0.0f64, f64::max);
    let order = (sup_of(&coarse) / sup_of(&fine)).log2();

    let pass = rel_sup <= rel_tol && order >= 1.9;
    verdict(
        2,
        "small-amplitude heat limit",
        pass,
        &format!("relative sup error {rel_sup:.2e} <= {rel_tol:.2e}, observed spatial order {order:.2} >= 1.9"),
    );
}

// ---------------------------------------------------------------------------
// 3/4/5/9 share one desk-scale cone run to t = 1.
// ---------------------------------------------------------------------------

fn cone_run() -> &'static EvolveOutcome {
    static RUN: OnceLock<EvolveOutcome> = OnceLock::new();
    RUN.get_or_init(|| {
        let cfg = parse_config(
            "initial = cone2theta\n\
             beta = 0.2\n\
             horizon = 1\n\
             monitor_every = 64\n\
             monitors = p_min, mean_ratio, interior_H, interior_A, gaussian\n\
             t0 = 2\n",
        )
        .expect("config");
        evolve(&cfg, THREADS).expect("cone run")
    })
}

/// Desk-scale tolerance 10 h^2 at N = 129, L = 8.
fn desk_tol() -> f64 {
    let h = 16.0 / 128.0;
    10.0 * h * h
}

#[test]
fn criterion_03_p_preservation() {
    let run = cone_run();
    let initial = run.reports[0].entry("p_min").unwrap().observed;
    let min_over_run = run
        .reports
        .iter()
        .map(|r| r.entry("p_min").unwrap().observed)
        .fold(f64::INFINITY, f64::min);
    let pass = min_over_run >= initial - desk_tol();
    verdict(
        3,
        "area-decreasing bound preserved",
        pass,
        &format!("min over run {min_over_run:.5} >= initial {initial:.5} - {:.4}", desk_tol()),
    );
}

#[test]
fn criterion_04_mean_ratio_monotone() {
    let run = cone_run();
    let initial = run.reports[0].entry("mean_ratio").unwrap().observed;
    let max_over_run = run
        .reports
        .iter()
        .map(|r| r.entry("mean_ratio").unwrap().observed)
        .fold(0.0f64, f64::max);
    let pass = max_over_run <= initial + desk_tol();
    verdict(
        4,
        "sup |H|^2/p bounded by its initial value",
        pass,
        &format!("max over run {max_over_run:.5} <= initial {initial:.5} + {:.4}", desk_tol()),
    );
}

#[test]
fn criterion_05_interior_estimates() {
    let run = cone_run();
    let max_h = run
        .reports
        .iter()
        .map(|r| r.entry("interior_H").unwrap().observed)
        .fold(0.0f64, f64::max);
    let max_a = run
        .reports
        .iter()
        .map(|r| r.entry("interior_A").unwrap().observed)
        .fold(0.0f64, f64::max);
    // m/epsilon = 8 at epsilon = 0.25; t|A|^2 ceiling 2/(3 sqrt(eps)-1)^2 = 8.
    let pass = max_h <= 8.0 + desk_tol() && max_a <= 8.0 + desk_tol();
    verdict(
        5,
        "interior curvature estimates",
        pass,
        &format!(
            "max (2t|H|^2+m)/p {max_h:.5} and max t|A|^2 {max_a:.5} both <= 8 + {:.4}",
            desk_tol()
        ),
    );
}

#[test]
fn criterion_09_gaussian_density_monotone() {
    let run = cone_run();
    let series: Vec<(f64, f64)> = run
        .reports
        .iter()
        .map(|r| {
            let e = r.entry("gaussian").unwrap();
            (e.observed, e.aux) // (density, quadrature tail bound)
        })
        .collect();
    let mut pass = true;
    let mut worst = f64::NEG_INFINITY;
    for w in series.windows(2) {
        let ((prev, tail_prev), (next, tail_next)) = (w[0], w[1]);
        let slack = desk_tol() + tail_prev + tail_next;
        worst = worst.max(next - prev - slack);
        if next > prev + slack {
            pass = false;
        }
    }
    verdict(
        9,
        "Gaussian density nonincreasing",
        pass,
        &format!("worst step increase beyond slack {worst:.2e} <= 0 over {} samples", series.len()),
    );
}

// ---------------------------------------------------------------------------
// 6. Expander from the cone.
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_expander_convergence() {
    let grid = build_grid(2, 129, 8.0, 1.0).expect("grid");
    let spec = InitialSpec::new(InitialKind::Cone2Theta { beta: 0.2 });
    let (map, _) = build_initial(&spec, &grid, 2, 0.25, 0.5).expect("cone");
    let cfg = ExpanderConfig {
        threads: THREADS,
        ..ExpanderConfig::default()
    };
    let outcome = solve_expander_flow(&map, &cfg).expect("normalized flow");

    let monotone = outcome
        .series
        .windows(2)
        .filter(|w| w[0].s >= 1.0)
        .all(|w| w[1].residual_sup <= w[0].residual_sup * (1.0 + 1e-12));

    let dt = cfl_dt(&grid, cfg.cfl_factor);
    let delta = one_step_delta(&outcome.state, cfg.cfl_factor, THREADS).expect("probe");
    let stationary = delta <= 1.5 * dt * cfg.tol_exp;

    let ss_err = self_similarity_error(&outcome.state.map, 0.05, cfg.cfl_factor, THREADS)
        .expect("raw flow");
    let self_similar = ss_err <= 5.0 * cfg.tol_exp;

    let last = outcome.series.last().unwrap();
    let pass = outcome.converged
        && monotone
        && outcome.endpoint_uniform
        && stationary
        && self_similar;
    verdict(
        6,
        "expander solve from the cone",
        pass,
        &format!(
            "converged {} (residual {:.2e} < 1e-3 by s = {:.2}), monotone for s >= 1: {monotone}, \
             endpoint min p {:.4} uniform: {}, one-step delta {delta:.2e} <= {:.2e}, \
             self-similarity error {ss_err:.2e} <= 5e-3",
            outcome.converged,
            last.residual_sup,
            last.s,
            outcome.endpoint_min_p,
            outcome.endpoint_uniform,
            1.5 * dt * cfg.tol_exp
        ),
    );
}

// ---------------------------------------------------------------------------
// 7. sin-log counterexample.
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_sinlog_counterexample() {
    let delta = 0.5;
    let ratio_at = |half_width: f64| {
        let grid = build_grid(2, 129, half_width, half_width / 16.0).expect("grid");
        let spec = InitialSpec::new(InitialKind::SinLog);
        let (_, cert) = build_initial(&spec, &grid, 2, f64::NEG_INFINITY, delta).expect("sinlog");
        cert.conical_ratio
    };
    let r1 = ratio_at(std::f64::consts::PI.exp());
    let r2 = ratio_at((2.0 * std::f64::consts::PI).exp());
    let growth = r2 / r1;
    let grows = growth >= 2.0;

    let grid = build_grid(2, 129, 8.0, 1.0).expect("grid");
    let spec = InitialSpec::new(InitialKind::SinLog);
    let (map, _) = build_initial(&spec, &grid, 2, f64::NEG_INFINITY, delta).expect("sinlog");
    let cfg = ExpanderConfig {
        threads: THREADS,
        ..ExpanderConfig::default()
    };
    let outcome = solve_expander_flow(&map, &cfg).expect("normalized flow");
    let non_convergent = !outcome.converged;

    let pass = grows && non_convergent;
    verdict(
        7,
        "sin-log counterexample behavior",
        pass,
        &format!(
            "conical ratio growth {growth:.2} >= 2 over one extra half-period: {grows}; \
             normalized run non-convergent: {non_convergent} (frozen Dirichlet boundary pins a \
             window-dependent stationary profile, so the truncated run converges spuriously; \
             the continuum behavior survives only as the window dependence in the first clause)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 8. Splitting regime.
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_splitting_shear() {
    let cfg = parse_config(
        "initial = shear\n\
         a = 0.5\n\
         horizon = 0.5\n\
         monitor_every = 64\n\
         monitors = splitting_p0\n",
    )
    .expect("config");
    let run = evolve(&cfg, THREADS).expect("shear run");
    let max_abs_p = run
        .reports
        .iter()
        .map(|r| r.entry("splitting_p0").unwrap().observed)
        .fold(0.0f64, f64::max);
    let pass = max_abs_p <= desk_tol();
    verdict(
        8,
        "area-preserving shear keeps p = 0",
        pass,
        &format!("max |p| {max_abs_p:.2e} <= {:.4} throughout", desk_tol()),
    );
}

// ---------------------------------------------------------------------------
// 10. ODE comparator.
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_ode_comparator() {
    let beta = 0.8;
    let u0 = 1.3;
    let horizon = 2.0;
    let sol = ode_bound(|k| beta * k, u0, horizon, 1e-4);
    let exp_err = sol
        .times
        .iter()
        .zip(&sol.values)
        .map(|(&t, &v)| ((v - u0 * (beta * t).exp()) / (u0 * (beta * t).exp())).abs())
        .fold(0.0f64, f64::max);

    let k0 = 0.1;
    let sol = ode_bound(|k| k * (1.0 - k), k0, horizon, 1e-4);
    let logistic_err = sol
        .times
        .iter()
        .zip(&sol.values)
        .map(|(&t, &v)| {
            let exact = 1.0 / (1.0 + (1.0 - k0) / k0 * (-t).exp());
            ((v - exact) / exact).abs()
        })
        .fold(0.0f64, f64::max);

    let pass = exp_err <= 1e-8 && logistic_err <= 1e-8;
    verdict(
        10,
        "comparison ODE against closed forms",
        pass,
        &format!("exponential rel err {exp_err:.2e}, logistic rel err {logistic_err:.2e}, both <= 1e-8"),
    );
}

// ---------------------------------------------------------------------------
// 11. Persistence and determinism.
// ---------------------------------------------------------------------------

#[test]
fn criterion_11_persistence_determinism() {
    // Snapshot roundtrip, bit for bit.
    let grid = build_grid(2, 33, 4.0, 1.0).expect("grid");
    let map = GridMap::from_fn(&grid, 2, |x, out| {
        out[0] = 0.3 * x[0] + (x[1] * 1.7).sin() / 3.0;
        out[1] = x[0] * x[1] * 0.01 - 1.0 / 7.0;
    });
    let mut state = FlowState::new(map, Mode::Raw);
    state.time = 0.625;
    state.step_count = 42;
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("state.gmcf");
    gmcf::snapshot::write_snapshot(&state, &path).expect("write");
    let back = gmcf::snapshot::read_snapshot(&path).expect("read");
    let roundtrip = back.time.to_bits() == state.time.to_bits()
        && back.step_count == state.step_count
        && back
            .map
            .values
            .iter()
            .zip(&state.map.values)
            .all(|(a, b)| a.to_bits() == b.to_bits());

    // Identical CSV bytes from 1 and 8 workers, through the real binary.
    let config = "N = 65\nL = 4\nr0 = 0.8\nr1 = 2.4\nhorizon = 0.05\nmonitor_every = 8\n";
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, config).expect("config");
    let csv_with_threads = |threads: &str, sub: &str| {
        let out = dir.path().join(format!("out-{threads}"));
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_gmcf"))
            .arg(sub)
            .arg("--config")
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out)
            .env("GMCF_THREADS", threads)
            .output()
            .expect("spawn gmcf");
        assert!(status.status.success(), "gmcf {sub} failed: {status:?}");
        std::fs::read(out.join("monitors.csv")).expect("csv")
    };
    let identical = csv_with_threads("1", "evolve") == csv_with_threads("8", "evolve");

    let pass = roundtrip && identical;
    verdict(
        11,
        "snapshot roundtrip and thread determinism",
        pass,
        &format!("snapshot bit-identical: {roundtrip}, 1-thread vs 8-thread CSV identical: {identical}"),
    );
}
