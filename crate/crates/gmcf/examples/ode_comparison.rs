//! Scalar comparison ODEs dk/dt = Phi(k): the a priori ceilings that the
//! maximum principle attaches to curvature quantities along the flow.
//!
//! Three solves: one with a closed-form answer (exponential), one bounded
//! (logistic), and one that blows up in finite time (Riccati dk/dt = k^2),
//! whose numerical blow-up time brackets the exact 1/k0.

use gmcf::invariants::ode_bound;

fn main() {
    let horizon = 2.0;
    let dt = 1e-4;

    let exp = ode_bound(|k| k, 1.0, horizon, dt);
    let exact = horizon.exp();
    let last = *exp.values.last().unwrap();
    println!("dk/dt = k,        k(0) = 1:   k(2) = {:.8}  (exact e^2 = {:.8}, err {:.1e})",
             last, exact, (last - exact).abs());

    let logistic = ode_bound(|k| k * (1.0 - k), 0.1, horizon, dt);
    let exact = 1.0 / (1.0 + 9.0 * (-horizon).exp());
    let last = *logistic.values.last().unwrap();
    println!("dk/dt = k(1-k),   k(0) = 0.1: k(2) = {:.8}  (exact {:.8}, err {:.1e})",
             last, exact, (last - exact).abs());

    let riccati = ode_bound(|k| k * k, 2.0, horizon, dt);
    let t_blow = *riccati.times.last().unwrap();
    println!("dk/dt = k^2,      k(0) = 2:   blew up: {} at t ~ {:.4} (exact 1/2)",
             riccati.blew_up, t_blow);
}
