//! The sin-log graph f = (|x| sin log |x|, 0): an entire Lipschitz map
//! whose graph has no tangent cone at infinity.
//!
//! Two symptoms show up numerically.  First, the conical deviation ratio
//! sup |F_perp|^2 / (1 + |F|^2)^{1-delta} keeps growing as the window
//! widens (for a map with a cone at infinity it would saturate).  Second,
//! the normalized flow started from it does not settle on an expander at
//! the tolerance the cone data reaches easily.

use gmcf::expander::{solve_expander_flow, ExpanderConfig};
use gmcf::grid::build_grid;
use gmcf::initialdata::{build_initial, InitialKind, InitialSpec};

fn main() {
    let delta = 0.5;

    // Windows at successive half-periods of sin log r: L = e^pi, e^{2pi}.
    println!("{:>12}  {:>14}", "half-width", "conical ratio");
    let mut prev = None;
    for half_periods in [1, 2] {
        let half_width = (half_periods as f64 * std::f64::consts::PI).exp();
        let grid = build_grid(2, 129, half_width, half_width / 16.0).expect("grid");
        let spec = InitialSpec::new(InitialKind::SinLog);
        let (_, cert) = build_initial(&spec, &grid, 2, f64::NEG_INFINITY, delta).expect("sinlog");
        println!("{:>12.3}  {:>14.4}", half_width, cert.conical_ratio);
        if let Some(p) = prev {
            println!("{:>12}  growth factor {:.2}", "", cert.conical_ratio / p);
        }
        prev = Some(cert.conical_ratio);
    }

    println!();
    println!("normalized flow from the sin-log datum:");
    let grid = build_grid(2, 65, 8.0, 1.0).expect("grid");
    let spec = InitialSpec::new(InitialKind::SinLog);
    let (map, _) = build_initial(&spec, &grid, 2, f64::NEG_INFINITY, delta).expect("sinlog");
    let cfg = ExpanderConfig {
        s_end: 3.0,
        ..ExpanderConfig::default()
    };
    let outcome = solve_expander_flow(&map, &cfg).expect("normalized flow");
    for report in outcome.series.iter().step_by(4) {
        println!("  s = {:6.3}   |H - F_perp| = {:.4e}", report.s, report.residual_sup);
    }
    println!(
        "  converged: {} (decay rate {:?})",
        outcome.converged, outcome.decay_rate
    );
}
