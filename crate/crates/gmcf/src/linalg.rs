//! Small dense linear algebra for the pointwise geometry kernel.
//!
//! All matrices here are tiny (`m x m` with `m` the spatial dimension, or
//! `(m+n) x (m+n)` for ambient projectors), stored row-major in a `Vec<f64>`.

/// Row-major square matrix of runtime dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMat {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl SquareMat {
    pub fn zeros(dim: usize) -> Self {
        SquareMat {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn matmul(&self, other: &SquareMat) -> SquareMat {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = SquareMat::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        let d = self.dim;
        let mut out = vec![0.0; d];
        for i in 0..d {
            let mut s = 0.0;
            for j in 0..d {
                s += self.get(i, j) * v[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// LU factorization with partial pivoting; returns (inverse, determinant).
    ///
    /// Panics on a singular matrix; the induced metric `g = I + J J^T` is
    /// always at least the identity, so this cannot trigger on kernel inputs.
    pub fn inverse_det(&self) -> (SquareMat, f64) {
        let d = self.dim;
        let mut a = self.data.clone();
        let mut inv = SquareMat::identity(d);
        let mut det = 1.0;
        for col in 0..d {
            let mut pivot = col;
            for r in (col + 1)..d {
                if a[r * d + col].abs() > a[pivot * d + col].abs() {
                    pivot = r;
                }
            }
            if pivot != col {
                for j in 0..d {
                    a.swap(col * d + j, pivot * d + j);
                    inv.data.swap(col * d + j, pivot * d + j);
                }
                det = -det;
            }
            let p = a[col * d + col];
            assert!(p != 0.0, "singular matrix in inverse_det");
            det *= p;
            let pinv = 1.0 / p;
            for j in 0..d {
                a[col * d + j] *= pinv;
                inv.data[col * d + j] *= pinv;
            }
            for r in 0..d {
                if r == col {
                    continue;
                }
                let f = a[r * d + col];
                if f == 0.0 {
                    continue;
                }
                for j in 0..d {
                    a[r * d + j] -= f * a[col * d + j];
                    inv.data[r * d + j] -= f * inv.data[col * d + j];
                }
            }
        }
        (inv, det)
    }
}

/// Eigenvalues and eigenvectors of a symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues in descending order together with the
/// corresponding eigenvectors as rows.
pub fn sym_eigen(mat: &SquareMat) -> (Vec<f64>, SquareMat) {
    let d = mat.dim;
    let mut a = mat.clone();
    let mut v = SquareMat::identity(d);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                off += a.get(i, j) * a.get(i, j);
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a.get(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..d {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..d {
                    let vpk = v.get(p, k);
                    let vqk = v.get(q, k);
                    v.set(p, k, c * vpk - s * vqk);
                    v.set(q, k, s * vpk + c * vqk);
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..d)
        .map(|i| (a.get(i, i), (0..d).map(|k| v.get(i, k)).collect()))
        .collect();
    // Descending by eigenvalue; ties broken by original index (stable sort).
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let vals = pairs.iter().map(|p| p.0).collect();
    let mut vecs = SquareMat::zeros(d);
    for (i, (_, ev)) in pairs.iter().enumerate() {
        for k in 0..d {
            vecs.set(i, k, ev[k]);
        }
    }
    (vals, vecs)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
