//! Rigidity of the area-preserving boundary case: the shear map
//! f = (x1 + a sin x2, x2) has p = 0 identically, and the flow keeps it
//! there while the profile relaxes by the plain heat equation.
//!
//! The monitors track max |p| over the inner region (it should stay at the
//! discretization floor) and the decay of the shear amplitude.

use gmcf::config::parse_config;
use gmcf::flow::JetFields;
use gmcf::geometry::sample;
use gmcf::run::evolve;

fn main() {
    let cfg = parse_config(
        "initial = shear\n\
         a = 0.5\n\
         N = 65\n\
         L = 8\n\
         horizon = 0.5\n\
         monitor_every = 64\n\
         monitors = splitting_p0\n",
    )
    .expect("config");

    let outcome = evolve(&cfg, 0).expect("flow");
    println!("{:>8}  {:>12}", "t", "max |p|");
    for report in &outcome.reports {
        let entry = report.entry("splitting_p0").expect("entry");
        println!("{:8.4}  {:12.4e}", report.time, entry.observed);
    }

    // Amplitude of the first component's deviation from x1 at the center
    // row.  The small-slope limit is the heat equation (decay e^{-t} at
    // wavenumber 1); at a = 0.5 the metric factor slows the decay, so the
    // observed amplitude sits above the linear prediction.
    let grid = &outcome.state.map.grid;
    let mid = grid.nodes / 2;
    let quarter = grid.nodes / 4;
    let node = mid * grid.stride(0) + quarter;
    let x2 = grid.coord(quarter);
    let residual = outcome.state.map.value(node, 0) - grid.coord(mid);
    println!();
    println!(
        "shear amplitude at t = {:.2}: {:.5} (linear heat value {:.5})",
        outcome.state.time,
        residual / x2.sin(),
        0.5 * (-outcome.state.time).exp()
    );

    // The evolved map still has singular values (lambda, 1/lambda): check
    // lambda * mu = 1 at the extremal node of the last report.
    let jets = JetFields::compute(&outcome.state.map);
    let node = outcome.reports.last().unwrap().entries[0].extremal_node;
    let s = sample(&jets.jet_at(node));
    println!(
        "singular values at the extremal node: {:.6} * {:.6} = {:.6}",
        s.lambda[0],
        s.lambda[1],
        s.lambda[0] * s.lambda[1]
    );
}
