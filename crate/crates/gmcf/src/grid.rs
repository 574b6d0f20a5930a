//! Uniform tensor-product grid on the truncated box `[-L, L]^m` with
//! finite-difference stencils and inner-region masking.
//!
//! Storage layout is lexicographic with axis 1 slowest, fixed so that runs
//! are bit-reproducible across implementations.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    EvenNodes(usize),
    TooFewNodes(usize),
    NonPositiveHalfWidth(f64),
    BandOutOfRange { band: f64, min: f64, max: f64 },
    BadDimension(usize),
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::EvenNodes(n) => write!(f, "N must be odd, got {n}"),
            GridError::TooFewNodes(n) => write!(f, "N must be at least 5, got {n}"),
            GridError::NonPositiveHalfWidth(l) => write!(f, "L must be positive, got {l}"),
            GridError::BandOutOfRange { band, min, max } => {
                write!(f, "band {band} out of range [{min}, {max})")
            }
            GridError::BadDimension(m) => write!(f, "spatial dimension must be >= 1, got {m}"),
        }
    }
}

impl std::error::Error for GridError {}

/// Uniform grid over `[-L, L]^m` with `nodes` points per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub m: usize,
    pub nodes: usize,
    pub half_width: f64,
    pub h: f64,
    pub band: f64,
}

/// Sampled map values `f^alpha` per node, `n` components each, node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    pub grid: Grid,
    pub n: usize,
    pub values: Vec<f64>,
}

/// `build_grid`: validated constructor; `h = 2L/(N-1)`, nodes at `-L + i h`.
pub fn build_grid(m: usize, nodes: usize, half_width: f64, band: f64) -> Result<Grid, GridError> {
    if m < 1 {
        return Err(GridError::BadDimension(m));
    }
    if half_width <= 0.0 {
        return Err(GridError::NonPositiveHalfWidth(half_width));
    }
    if nodes < 5 {
        return Err(GridError::TooFewNodes(nodes));
    }
    if nodes % 2 == 0 {
        return Err(GridError::EvenNodes(nodes));
    }
    let h = 2.0 * half_width / (nodes - 1) as f64;
    if band < 2.0 * h || band >= half_width {
        return Err(GridError::BandOutOfRange {
            band,
            min: 2.0 * h,
            max: half_width,
        });
    }
    Ok(Grid {
        m,
        nodes,
        half_width,
        h,
        band,
    })
}

impl Grid {
    pub fn node_count(&self) -> usize {
        self.nodes.pow(self.m as u32)
    }

    /// Coordinate of node index `i` along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h
    }

    /// Multi-index of a flat node index (axis 1 slowest).
    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        debug_assert_eq!(out.len(), self.m);
        for axis in (0..self.m).rev() {
            out[axis] = flat % self.nodes;
            flat /= self.nodes;
        }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for &i in idx {
            flat = flat * self.nodes + i;
        }
        flat
    }

    /// Node coordinates for a flat index.
    pub fn position(&self, flat: usize, out: &mut [f64]) {
        let mut idx = vec![0usize; self.m];
        self.multi_index(flat, &mut idx);
        for a in 0..self.m {
            out[a] = self.coord(idx[a]);
        }
    }

    /// Stride of one step along `axis` in flat index space.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.nodes.pow((self.m - 1 - axis) as u32)
    }

    /// True where every coordinate satisfies `|x_i| <= L - band`.
    pub fn inner_mask(&self) -> Vec<bool> {
        let cut = self.half_width - self.band + 1e-9 * self.h;
        let mut mask = vec![true; self.node_count()];
        let mut idx = vec![0usize; self.m];
        for flat in 0..self.node_count() {
            self.multi_index(flat, &mut idx);
            for a in 0..self.m {
                if self.coord(idx[a]).abs() > cut {
                    mask[flat] = false;
                    break;
                }
            }
        }
        mask
    }

    /// True where any axis index is 0 or N-1.
    pub fn is_boundary(&self, flat: usize) -> bool {
        let mut idx = vec![0usize; self.m];
        self.multi_index(flat, &mut idx);
        idx.iter().any(|&i| i == 0 || i == self.nodes - 1)
    }
}

impl GridMap {
    pub fn zeros(grid: &Grid, n: usize) -> Self {
        GridMap {
            grid: grid.clone(),
            n,
            values: vec![0.0; grid.node_count() * n],
        }
    }

    /// Sample a map component-wise from a closure of the node position.
    pub fn from_fn<F>(grid: &Grid, n: usize, f: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]),
    {
        let mut map = Self::zeros(grid, n);
        let mut pos = vec![0.0; grid.m];
        let mut val = vec![0.0; n];
        for node in 0..grid.node_count() {
            grid.position(node, &mut pos);
            f(&pos, &mut val);
            for (a, &v) in val.iter().enumerate() {
                map.values[node * n + a] = v;
            }
        }
        map
    }

    #[inline]
    pub fn value(&self, node: usize, comp: usize) -> f64 {
        self.values[node * self.n + comp]
    }

    /// One scalar component as a flat field.
    pub fn component(&self, comp: usize) -> Vec<f64> {
        (0..self.grid.node_count())
            .map(|node| self.value(node, comp))
            .collect()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// First derivative of a scalar field along `axis`.
///
/// Interior: 4th-order central `(-f2 + 8 f1 - 8 f_-1 + f_-2)/(12 h)`.
/// Ring next to the boundary: 2nd-order central; boundary itself: one-sided
/// 2nd-order. Boundary rings are excluded from all monitors anyway.
pub fn diff1(grid: &Grid, field: &[f64], axis: usize) -> Vec<f64> {
    debug_assert_eq!(field.len(), grid.node_count());
    let n = grid.nodes;
    let stride = grid.stride(axis);
    let h = grid.h;
    let mut out = vec![0.0; field.len()];
    let mut idx = vec![0usize; grid.m];
    for node in 0..field.len() {
        grid.multi_index(node, &mut idx);
        let i = idx[axis];
        out[node] = if i >= 2 && i + 2 < n {
            (-field[node + 2 * stride] + 8.0 * field[node + stride]
                - 8.0 * field[node - stride]
                + field[node - 2 * stride])
                / (12.0 * h)
        } else if i == 0 {
            (-3.0 * field[node] + 4.0 * field[node + stride] - field[node + 2 * stride]) / (2.0 * h)
        } else if i == n - 1 {
            (3.0 * field[node] - 4.0 * field[node - stride] + field[node - 2 * stride]) / (2.0 * h)
        } else {
            (field[node + stride] - field[node - stride]) / (2.0 * h)
        };
    }
    out
}

/// Second derivative along a single axis (`axis_a == axis_b` case of `diff2`).
fn diff2_axis(grid: &Grid, field: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.nodes;
    let stride = grid.stride(axis);
    let h2 = grid.h * grid.h;
    let mut out = vec![0.0; field.len()];
    let mut idx = vec![0usize; grid.m];
    for node in 0..field.len() {
        grid.multi_index(node, &mut idx);
        let i = idx[axis];
        out[node] = if i >= 2 && i + 2 < n {
            (-field[node + 2 * stride] + 16.0 * field[node + stride] - 30.0 * field[node]
                + 16.0 * field[node - stride]
                - field[node - 2 * stride])
                / (12.0 * h2)
        } else if i == 0 {
            (2.0 * field[node] - 5.0 * field[node + stride] + 4.0 * field[node + 2 * stride]
                - field[node + 3 * stride])
                / h2
        } else if i == n - 1 {
            (2.0 * field[node] - 5.0 * field[node - stride] + 4.0 * field[node - 2 * stride]
                - field[node - 3 * stride])
                / h2
        } else {
            (field[node + stride] - 2.0 * field[node] + field[node - stride]) / h2
        };
    }
    out
}

/// Second derivative `d_a d_b` of a scalar field.
///
/// Mixed derivatives compose the two 1-D stencils; since they act along
/// distinct axes the operators commute, so the result is symmetric in
/// `(axis_a, axis_b)` by construction.
pub fn diff2(grid: &Grid, field: &[f64], axis_a: usize, axis_b: usize) -> Vec<f64> {
    if axis_a == axis_b {
        diff2_axis(grid, field, axis_a)
    } else {
        let d = diff1(grid, field, axis_a.min(axis_b));
        diff1(grid, &d, axis_a.max(axis_b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_1d() -> Grid {
        build_grid(1, 9, 2.0, 1.0).unwrap()
    }

    #[test]
    fn build_grid_examples() {
        let g = grid_1d();
        assert_eq!(g.h, 0.5);
        let nodes: Vec<f64> = (0..9).map(|i| g.coord(i)).collect();
        assert_eq!(
            nodes,
            vec![-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0]
        );

        let g2 = build_grid(2, 129, 8.0, 1.0).unwrap();
        assert_eq!(g2.h, 0.125);
    }

    #[test]
    fn build_grid_rejects() {
        assert!(matches!(
            build_grid(2, 128, 8.0, 1.0),
            Err(GridError::EvenNodes(128))
        ));
        assert!(matches!(
            build_grid(2, 129, -1.0, 1.0),
            Err(GridError::NonPositiveHalfWidth(_))
        ));
        assert!(matches!(
            build_grid(2, 129, 8.0, 9.0),
            Err(GridError::BandOutOfRange { .. })
        ));
        assert!(matches!(
            build_grid(2, 129, 8.0, 0.1),
            Err(GridError::BandOutOfRange { .. })
        ));
    }

    #[test]
    fn inner_mask_1d() {
        let g = grid_1d();
        // band = 1: nodes with |x| <= 1 survive.
        assert_eq!(
            g.inner_mask(),
            vec![false, false, true, true, true, true, true, false, false]
        );
    }

    #[test]
    fn inner_mask_minimal_band_excludes_two_rings() {
        let g = build_grid(1, 9, 1.0, 0.5).unwrap(); // h = 0.25, band = 2h
        let mask = g.inner_mask();
        assert_eq!(
            mask,
            vec![false, false, true, true, true, true, true, false, false]
        );
    }

    #[test]
    fn inner_mask_count_desk_scale() {
        let g = build_grid(2, 129, 8.0, 1.0).unwrap();
        let count = g.inner_mask().iter().filter(|&&b| b).count();
        // Oracle: nodes with |x| <= 7 at h = 0.125 along each axis.
        let per_axis = (0..129).filter(|&i| g.coord(i).abs() <= 7.0 + 1e-12).count();
        assert_eq!(per_axis, 113);
        assert_eq!(count, 113 * 113);
    }

    #[test]
    fn diff1_constant_and_linear() {
        let g = build_grid(1, 21, 1.0, 0.3).unwrap();
        let constant = vec![3.7; g.node_count()];
        assert!(diff1(&g, &constant, 0).iter().all(|&v| v.abs() < 1e-13));

        let linear: Vec<f64> = (0..g.node_count()).map(|i| g.coord(i)).collect();
        let d = diff1(&g, &linear, 0);
        for (i, v) in d.iter().enumerate() {
            // exact on cubics in the interior, exact on linears everywhere
            assert!((v - 1.0).abs() < 1e-12, "node {i}: {v}");
        }
    }

    #[test]
    fn diff1_sine_fourth_order() {
        // h = 0.1 around x = 0; analytic oracle cos(0) = 1.
        let g = build_grid(1, 41, 2.0, 0.5).unwrap();
        assert!((g.h - 0.1).abs() < 1e-12);
        let f: Vec<f64> = (0..g.node_count()).map(|i| g.coord(i).sin()).collect();
        let d = diff1(&g, &f, 0);
        let center = g.node_count() / 2;
        assert!((d[center] - 1.0).abs() < 4e-6);
    }

    #[test]
    fn diff2_quadratics_exact() {
        let g = build_grid(2, 9, 1.0, 0.5).unwrap();
        let mut pos = vec![0.0; 2];
        let mut f1 = vec![0.0; g.node_count()];
        let mut f12 = vec![0.0; g.node_count()];
        for node in 0..g.node_count() {
            g.position(node, &mut pos);
            f1[node] = pos[0] * pos[0];
            f12[node] = pos[0] * pos[1];
        }
        for v in diff2(&g, &f1, 0, 0) {
            assert!((v - 2.0).abs() < 1e-11);
        }
        for v in diff2(&g, &f12, 0, 1) {
            assert!((v - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn diff2_mixed_sine_and_symmetry() {
        let g = build_grid(2, 41, 2.0, 0.5).unwrap();
        let mut pos = vec![0.0; 2];
        let mut f = vec![0.0; g.node_count()];
        for node in 0..g.node_count() {
            g.position(node, &mut pos);
            f[node] = pos[0].sin() * pos[1].sin();
        }
        let d01 = diff2(&g, &f, 0, 1);
        let d10 = diff2(&g, &f, 1, 0);
        let center = g.flat_index(&[20, 20]);
        assert!((d01[center] - 1.0).abs() < 1e-4);
        for (a, b) in d01.iter().zip(&d10) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn stencils_linear_operators() {
        let g = build_grid(1, 21, 1.0, 0.3).unwrap();
        let f: Vec<f64> = (0..g.node_count()).map(|i| (g.coord(i) * 3.0).sin()).collect();
        let gfield: Vec<f64> = (0..g.node_count()).map(|i| g.coord(i).cos()).collect();
        let (a, b) = (1.3, -0.4);
        let combo: Vec<f64> = f.iter().zip(&gfield).map(|(x, y)| a * x + b * y).collect();
        let lhs = diff1(&g, &combo, 0);
        let df = diff1(&g, &f, 0);
        let dg = diff1(&g, &gfield, 0);
        for i in 0..g.node_count() {
            assert!((lhs[i] - (a * df[i] + b * dg[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_halves_spacing() {
        let g = build_grid(2, 65, 8.0, 1.0).unwrap();
        let g2 = build_grid(2, 129, 8.0, 1.0).unwrap();
        assert_eq!(g.h, 2.0 * g2.h);
    }
}
