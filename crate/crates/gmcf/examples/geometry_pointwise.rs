//! Pointwise geometry of a graph from its 2-jet, at a single hand-picked
//! point: metric, singular values, the split form S = I - J J^T, second
//! fundamental form, and the curvature norms entering the Li-Li estimate.
//!
//! The identities printed at the end hold for any immersion and make a
//! quick smoke test of the kernel: sigma_k = (1 - lambda_k^2)/(1 + lambda_k^2),
//! S_kk^2 + T_kk^2 = 1 in the SVD frame, and the nonnegative gap
//! 3|A|^4 - 2|A.A|^2 - 2|R_perp|^2 >= 0.

use gmcf::geometry::{sample, svd_frames, Jet};

fn main() {
    // Jet of f(x) = (0.3 x1 + 0.1 x1 x2, 0.2 x2 + 0.05 x1^2) at x = (1, 1).
    let mut jet = Jet::zero(2, 2);
    jet.j = vec![
        0.4, 0.1, // d f^1 / d x1, d f^1 / d x2
        0.1, 0.2, // d f^2 / d x1, d f^2 / d x2
    ];
    jet.h2 = vec![
        0.0, 0.1, 0.1, 0.0, // Hessian of f^1
        0.1, 0.0, 0.0, 0.0, // Hessian of f^2
    ];

    let s = sample(&jet);
    println!("det g = {:.6}", s.detg);
    println!("singular values of Df: {:.6}, {:.6}", s.lambda[0], s.lambda[1]);
    println!("sigma (eigenvalues of S w.r.t. g): {:.6}, {:.6}", s.sigma[0], s.sigma[1]);
    println!("p = (tr_g S + 2 - m)/2 = {:.6}", s.p);
    println!("|A|^2 = {:.6}, |H|^2 = {:.6}", s.norm_a2, s.norm_h2);
    println!("|A^H|^2 = {:.6}, |A.A|^2 = {:.6}, |R_perp|^2 = {:.6}",
             s.norm_ah2, s.norm_adota2, s.norm_rperp2);
    println!("Li-Li gap 3|A|^4 - 2|A.A|^2 - 2|R_perp|^2 = {:.6}", s.lili_gap);

    println!();
    for (k, (lam, sig)) in s.lambda.iter().zip(&s.sigma).enumerate() {
        let predicted = (1.0 - lam * lam) / (1.0 + lam * lam);
        println!(
            "sigma_{k} - (1 - lambda^2)/(1 + lambda^2) = {:.2e}",
            sig - predicted
        );
    }
    let frames = svd_frames(&jet);
    for (k, (sk, tk)) in [(frames.s11, frames.t11), (frames.s22, frames.t22)]
        .into_iter()
        .enumerate()
    {
        let k = k + 1;
        println!("S_{k}{k}^2 + T_{k}{k}^2 - 1 = {:.2e}", sk * sk + tk * tk - 1.0);
    }
}
