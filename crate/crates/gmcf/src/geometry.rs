//! Pointwise geometry kernel: from a 2-jet of the map, every geometric
//! quantity of the graph `{(x, f(x))}` — induced metric, normal projector,
//! second fundamental form, mean curvature, singular values, the
//! area-decreasing scalar `p` and the frame components of the split metric.

use crate::linalg::{dot, norm, sym_eigen, SquareMat};

/// First and second derivative data of `f` at one point.
///
/// `j[i][alpha]` holds the slope `d_i f^alpha`; `h2[i][j][alpha]` the Hessian
/// `d_i d_j f^alpha`, symmetric in `(i, j)`.
#[derive(Debug, Clone)]
pub struct Jet {
    pub m: usize,
    pub n: usize,
    pub j: Vec<f64>,
    pub h2: Vec<f64>,
}

impl Jet {
    pub fn zero(m: usize, n: usize) -> Self {
        Jet {
            m,
            n,
            j: vec![0.0; m * n],
            h2: vec![0.0; m * m * n],
        }
    }

    #[inline]
    pub fn slope(&self, i: usize, alpha: usize) -> f64 {
        self.j[i * self.n + alpha]
    }

    #[inline]
    pub fn hess(&self, i: usize, jj: usize, alpha: usize) -> f64 {
        self.h2[(i * self.m + jj) * self.n + alpha]
    }

    pub fn is_finite(&self) -> bool {
        self.j.iter().all(|v| v.is_finite()) && self.h2.iter().all(|v| v.is_finite())
    }
}

/// All pointwise geometric quantities derived from one jet.
#[derive(Debug, Clone)]
pub struct GeometrySample {
    pub m: usize,
    pub n: usize,
    pub g: SquareMat,
    pub ginv: SquareMat,
    pub detg: f64,
    /// Normal projector on the ambient space, `(m+n) x (m+n)`.
    pub pperp: SquareMat,
    /// Second fundamental form: `m*m` ambient vectors of length `m+n`.
    pub a: Vec<f64>,
    /// Mean curvature vector, ambient.
    pub hvec: Vec<f64>,
    pub norm_a2: f64,
    pub norm_h2: f64,
    pub norm_ah2: f64,
    pub norm_adota2: f64,
    pub norm_rperp2: f64,
    /// `3|A|^4 - 2|A.A|^2 - 2|R_perp|^2`, nonnegative for any immersion.
    pub lili_gap: f64,
    /// Singular values of `Df`, descending.
    pub lambda: Vec<f64>,
    /// Eigenvalues of the split metric `S` with respect to `g`.
    pub sigma: Vec<f64>,
    pub p: f64,
    /// `sqrt(p)`, defined only where `p > 0`.
    pub q: Option<f64>,
}

/// `metric`: induced metric `g = I + J J^T` with inverse and determinant.
pub fn metric(jet: &Jet) -> (SquareMat, SquareMat, f64) {
    let m = jet.m;
    let mut g = SquareMat::identity(m);
    for i in 0..m {
        for k in 0..m {
            let mut s = 0.0;
            for alpha in 0..jet.n {
                s += jet.slope(i, alpha) * jet.slope(k, alpha);
            }
            g.data[i * m + k] += s;
        }
    }
    let (ginv, detg) = g.inverse_det();
    (g, ginv, detg)
}

/// Pullback of the split metric `dx^2 - dy^2`: `S = I - J J^T`.
pub fn split_form(jet: &Jet) -> SquareMat {
    let m = jet.m;
    let mut s = SquareMat::identity(m);
    for i in 0..m {
        for k in 0..m {
            let mut acc = 0.0;
            for alpha in 0..jet.n {
                acc += jet.slope(i, alpha) * jet.slope(k, alpha);
            }
            s.data[i * m + k] -= acc;
        }
    }
    s
}

/// `singular_values`: descending square roots of the eigenvalues of `J J^T`.
pub fn singular_values(jet: &Jet) -> Vec<f64> {
    let m = jet.m;
    let mut jjt = SquareMat::zeros(m);
    for i in 0..m {
        for k in 0..m {
            let mut s = 0.0;
            for alpha in 0..jet.n {
                s += jet.slope(i, alpha) * jet.slope(k, alpha);
            }
            jjt.data[i * m + k] = s;
        }
    }
    let (vals, _) = sym_eigen(&jjt);
    vals.into_iter().map(|v| v.max(0.0).sqrt()).collect()
}

/// `area_p`: the scalar `p = (tr_g S + 2 - m)/2`, its square root when
/// positive, and the `g`-eigenvalues of `S`.
pub fn area_p(jet: &Jet) -> (f64, Option<f64>, Vec<f64>) {
    let (_, ginv, _) = metric(jet);
    let s = split_form(jet);
    let m = jet.m;
    let mut tr = 0.0;
    for i in 0..m {
        for k in 0..m {
            tr += ginv.get(i, k) * s.get(k, i);
        }
    }
    let p = 0.5 * (tr + 2.0 - m as f64);
    let q = if p > 0.0 { Some(p.sqrt()) } else { None };
    let sigma = singular_values(jet)
        .iter()
        .map(|l| (1.0 - l * l) / (1.0 + l * l))
        .collect();
    (p, q, sigma)
}

/// `second_fundamental`: normal projector, second fundamental form and mean
/// curvature vector, all ambient.
///
/// The tangent frame is `t_i = (e_i, J e_i)`; the projector is the
/// least-squares complement `I - T g^{-1} T^T`, and `A_ij` is the normal
/// projection of the vertical Hessian vector `(0, d_i d_j f)`.
pub fn second_fundamental(jet: &Jet) -> (SquareMat, Vec<f64>, Vec<f64>) {
    let (m, n) = (jet.m, jet.n);
    let dim = m + n;
    let (_, ginv, _) = metric(jet);

    // Tangent matrix T, (m+n) x m, column i = (e_i, J e_i).
    let mut tan = vec![0.0; dim * m];
    for i in 0..m {
        tan[i * m + i] = 1.0;
        for alpha in 0..n {
            tan[(m + alpha) * m + i] = jet.slope(i, alpha);
        }
    }

    // Pperp = I - T ginv T^T.
    let mut pperp = SquareMat::identity(dim);
    for r in 0..dim {
        for c in 0..dim {
            let mut s = 0.0;
            for i in 0..m {
                for k in 0..m {
                    s += tan[r * m + i] * ginv.get(i, k) * tan[c * m + k];
                }
            }
            pperp.data[r * dim + c] -= s;
        }
    }

    // A_ij = Pperp . (0, d_i d_j f).
    let mut a = vec![0.0; m * m * dim];
    let mut vert = vec![0.0; dim];
    for i in 0..m {
        for jj in 0..m {
            for v in vert.iter_mut() {
                *v = 0.0;
            }
            for alpha in 0..n {
                vert[m + alpha] = jet.hess(i, jj, alpha);
            }
            let proj = pperp.apply(&vert);
            a[(i * m + jj) * dim..(i * m + jj + 1) * dim].copy_from_slice(&proj);
        }
    }

    // H = ginv^{ij} A_ij.
    let mut hvec = vec![0.0; dim];
    for i in 0..m {
        for jj in 0..m {
            let w = ginv.get(i, jj);
            for d in 0..dim {
                hvec[d] += w * a[(i * m + jj) * dim + d];
            }
        }
    }
    (pperp, a, hvec)
}

/// Frame diagnostics of the singular value decomposition (codimension two).
#[derive(Debug, Clone)]
pub struct SvdFrames {
    pub lambda: f64,
    pub mu: f64,
    pub s11: f64,
    pub s22: f64,
    pub t11: f64,
    pub t22: f64,
    /// Unit normal vectors, ambient `(m+2)`.
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    /// Domain singular directions `alpha_1, alpha_2`.
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
}

/// Deterministic sign fix: first nonzero component positive.
fn fix_sign(v: &mut [f64]) {
    for &x in v.iter() {
        if x.abs() > 1e-12 {
            if x < 0.0 {
                for y in v.iter_mut() {
                    *y = -*y;
                }
            }
            return;
        }
    }
}

/// `svd_frames`: the normal frame `xi, eta` and the components `S_kk, T_kk`
/// of the split metric in the singular-value basis. Requires `n = 2`.
///
/// Degenerate singular values are resolved by a fixed deterministic rule
/// (eigenvector with lexicographically largest first component, sign fixed
/// positive); the monitored scalars are frame-independent anyway.
pub fn svd_frames(jet: &Jet) -> SvdFrames {
    assert_eq!(jet.n, 2, "svd_frames requires target dimension 2");
    let m = jet.m;

    // 2x2 J^T J in the target space.
    let mut jtj = SquareMat::zeros(2);
    for a in 0..2 {
        for b in 0..2 {
            let mut s = 0.0;
            for i in 0..m {
                s += jet.slope(i, a) * jet.slope(i, b);
            }
            jtj.data[a * 2 + b] = s;
        }
    }
    let (vals, vecs) = sym_eigen(&jtj);
    let lambda = vals[0].max(0.0).sqrt();
    let mu = vals[1].max(0.0).sqrt();
    let mut beta1 = vec![vecs.get(0, 0), vecs.get(0, 1)];
    let mut beta2 = vec![vecs.get(1, 0), vecs.get(1, 1)];
    if (lambda - mu).abs() < 1e-12 {
        // Degenerate pair: any orthonormal basis of the eigenspace works;
        // pin the standard one for reproducibility.
        beta1 = vec![1.0, 0.0];
        beta2 = vec![0.0, 1.0];
    }
    fix_sign(&mut beta1);
    fix_sign(&mut beta2);

    // alpha_k = J beta_k / lambda_k; kernel completion when a singular
    // value vanishes.
    let apply_j = |beta: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|i| jet.slope(i, 0) * beta[0] + jet.slope(i, 1) * beta[1])
            .collect()
    };
    let mut alpha1 = if lambda > 1e-12 {
        let mut v = apply_j(&beta1);
        let nv = norm(&v);
        for x in v.iter_mut() {
            *x /= nv;
        }
        v
    } else {
        let mut v = vec![0.0; m];
        v[0] = 1.0;
        v
    };
    fix_sign(&mut alpha1);
    let mut alpha2 = if mu > 1e-12 {
        let mut v = apply_j(&beta2);
        let nv = norm(&v);
        for x in v.iter_mut() {
            *x /= nv;
        }
        v
    } else {
        // First standard basis vector with a nonzero residual after
        // projecting out alpha1, Gram-Schmidt normalized.
        let mut pick = vec![0.0; m];
        for k in 0..m {
            let mut v = vec![0.0; m];
            v[k] = 1.0;
            let c = dot(&v, &alpha1);
            for (x, &a1) in v.iter_mut().zip(&alpha1) {
                *x -= c * a1;
            }
            let nv = norm(&v);
            if nv > 1e-6 {
                for x in v.iter_mut() {
                    *x /= nv;
                }
                pick = v;
                break;
            }
        }
        pick
    };
    fix_sign(&mut alpha2);

    let dim = m + 2;
    let mut xi = vec![0.0; dim];
    let mut eta = vec![0.0; dim];
    let nl = (1.0 + lambda * lambda).sqrt();
    let nm = (1.0 + mu * mu).sqrt();
    for i in 0..m {
        xi[i] = -lambda * alpha1[i] / nl;
        eta[i] = -mu * alpha2[i] / nm;
    }
    for a in 0..2 {
        xi[m + a] = beta1[a] / nl;
        eta[m + a] = beta2[a] / nm;
    }

    SvdFrames {
        lambda,
        mu,
        s11: (1.0 - lambda * lambda) / (1.0 + lambda * lambda),
        s22: (1.0 - mu * mu) / (1.0 + mu * mu),
        t11: -2.0 * lambda / (1.0 + lambda * lambda),
        t22: -2.0 * mu / (1.0 + mu * mu),
        xi,
        eta,
        alpha1,
        alpha2,
    }
}

/// Orthonormal basis of the normal space, rows of the returned matrix.
///
/// Gram-Schmidt over the projector columns in fixed order; deterministic
/// and valid for any codimension.
pub fn normal_frame(pperp: &SquareMat, n: usize) -> Vec<Vec<f64>> {
    let dim = pperp.dim;
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n);
    for col in 0..dim {
        if frame.len() == n {
            break;
        }
        let mut v: Vec<f64> = (0..dim).map(|r| pperp.get(r, col)).collect();
        for f in &frame {
            let c = dot(&v, f);
            for (x, &fv) in v.iter_mut().zip(f) {
                *x -= c * fv;
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            for x in v.iter_mut() {
                *x /= nv;
            }
            frame.push(v);
        }
    }
    assert_eq!(frame.len(), n, "normal space has unexpected dimension");
    frame
}

/// Tensor norms of the second fundamental form with full `g`-contractions.
pub struct CurvatureNorms {
    pub norm_a2: f64,
    pub norm_h2: f64,
    pub norm_ah2: f64,
    pub norm_adota2: f64,
    pub norm_rperp2: f64,
    pub lili_gap: f64,
}

/// `curvature_norms`: `|A|^2`, `|H|^2`, `|A^H|^2`, `|A.A|^2`, `|R_perp|^2`
/// and the Li-Li gap `3|A|^4 - 2|A.A|^2 - 2|R_perp|^2`.
pub fn curvature_norms(
    jet: &Jet,
    ginv: &SquareMat,
    pperp: &SquareMat,
    a: &[f64],
    hvec: &[f64],
) -> CurvatureNorms {
    let (m, n) = (jet.m, jet.n);
    let dim = m + n;
    let av = |i: usize, j: usize| &a[(i * m + j) * dim..(i * m + j + 1) * dim];

    // <A_ij, A_kl> table.
    let mut inner = vec![0.0; m * m * m * m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    inner[((i * m + j) * m + k) * m + l] = dot(av(i, j), av(k, l));
                }
            }
        }
    }
    let ip = |i: usize, j: usize, k: usize, l: usize| inner[((i * m + j) * m + k) * m + l];

    let mut norm_a2 = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    norm_a2 += ginv.get(i, k) * ginv.get(j, l) * ip(i, j, k, l);
                }
            }
        }
    }

    let norm_h2 = dot(hvec, hvec);

    // A^H_ij = <H, A_ij>.
    let mut ah = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            ah[i * m + j] = dot(hvec, av(i, j));
        }
    }
    let mut norm_ah2 = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    norm_ah2 += ginv.get(i, k) * ginv.get(j, l) * ah[i * m + j] * ah[k * m + l];
                }
            }
        }
    }

    // |A.A|^2 with four metric contractions.
    let mut norm_adota2 = 0.0;
    for i1 in 0..m {
        for i2 in 0..m {
            for j1 in 0..m {
                for j2 in 0..m {
                    let t1 = ip(i1, i2, j1, j2);
                    if t1 == 0.0 {
                        continue;
                    }
                    for k1 in 0..m {
                        for k2 in 0..m {
                            let w1 = ginv.get(i1, k1) * ginv.get(i2, k2);
                            if w1 == 0.0 {
                                continue;
                            }
                            for l1 in 0..m {
                                for l2 in 0..m {
                                    norm_adota2 += t1
                                        * w1
                                        * ginv.get(j1, l1)
                                        * ginv.get(j2, l2)
                                        * ip(k1, k2, l1, l2);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Normal curvature from the Ricci equation, in an orthonormal normal
    // frame: R_{ij}^{ab} = g^{kl} (A^a_ik A^b_jl - A^b_ik A^a_jl).
    let frame = normal_frame(pperp, n);
    let mut acomp = vec![0.0; n * m * m];
    for (alpha, nu) in frame.iter().enumerate() {
        for i in 0..m {
            for j in 0..m {
                acomp[(alpha * m + i) * m + j] = dot(nu, av(i, j));
            }
        }
    }
    let ac = |alpha: usize, i: usize, j: usize| acomp[(alpha * m + i) * m + j];
    let mut rcomp = vec![0.0; n * n * m * m];
    for alpha in 0..n {
        for beta in 0..n {
            for i in 0..m {
                for j in 0..m {
                    let mut rij = 0.0;
                    for k in 0..m {
                        for l in 0..m {
                            rij += ginv.get(k, l)
                                * (ac(alpha, i, k) * ac(beta, j, l)
                                    - ac(beta, i, k) * ac(alpha, j, l));
                        }
                    }
                    rcomp[((alpha * n + beta) * m + i) * m + j] = rij;
                }
            }
        }
    }
    let rc = |alpha: usize, beta: usize, i: usize, j: usize| {
        rcomp[((alpha * n + beta) * m + i) * m + j]
    };
    let mut norm_rperp2 = 0.0;
    for alpha in 0..n {
        for beta in 0..n {
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        for l in 0..m {
                            norm_rperp2 += ginv.get(i, k)
                                * ginv.get(j, l)
                                * rc(alpha, beta, i, j)
                                * rc(alpha, beta, k, l);
                        }
                    }
                }
            }
        }
    }

    let lili_gap = 3.0 * norm_a2 * norm_a2 - 2.0 * norm_adota2 - 2.0 * norm_rperp2;
    CurvatureNorms {
        norm_a2,
        norm_h2,
        norm_ah2,
        norm_adota2,
        norm_rperp2,
        lili_gap,
    }
}

/// Full geometry sample from one jet.
pub fn sample(jet: &Jet) -> GeometrySample {
    let (g, ginv, detg) = metric(jet);
    let (pperp, a, hvec) = second_fundamental(jet);
    let norms = curvature_norms(jet, &ginv, &pperp, &a, &hvec);
    let (p, q, sigma) = area_p(jet);
    let lambda = singular_values(jet);
    GeometrySample {
        m: jet.m,
        n: jet.n,
        g,
        ginv,
        detg,
        pperp,
        a,
        hvec,
        norm_a2: norms.norm_a2,
        norm_h2: norms.norm_h2,
        norm_ah2: norms.norm_ah2,
        norm_adota2: norms.norm_adota2,
        norm_rperp2: norms.norm_rperp2,
        lili_gap: norms.lili_gap,
        lambda,
        sigma,
        p,
        q,
    }
}
