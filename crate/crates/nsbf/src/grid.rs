//! Uniform mesh on `[0, b]` and grid-sampled functions, together with the
//! indefinite integration primitive every coefficient recurrence is built on.
//!
//! Integration uses degree-5 polynomial interpolation on blocks of 5
//! subintervals (the composite 6-point Newton-Cotes rule). Inside each block
//! the local interpolant is integrated analytically to every interior node,
//! so the cumulative integral is available at all `M + 1` nodes.

use std::io::Write;
use std::sync::Arc;

use crate::error::{NsbfError, Result};

/// Uniform mesh with `M + 1` nodes `x_i = i b / M` on `[0, b]`.
///
/// `M` must be a multiple of 5 so that the mesh splits into 6-point
/// Newton-Cotes blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    b: f64,
    subintervals: usize,
}

impl Grid {
    /// Creates a uniform grid on `[0, b]` with `m` subintervals.
    pub fn new(b: f64, m: usize) -> Result<Grid> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(NsbfError::InvalidGrid(format!(
                "right endpoint b must be positive and finite, got {b}"
            )));
        }
        if m < 10 || m % 5 != 0 {
            return Err(NsbfError::InvalidGrid(format!(
                "subinterval count M must be >= 10 and a multiple of 5 \
                 (6-point rule alignment), got {m}"
            )));
        }
        Ok(Grid { b, subintervals: m })
    }

    /// Right endpoint `b`.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of subintervals `M`.
    pub fn subintervals(&self) -> usize {
        self.subintervals
    }

    /// Number of nodes, `M + 1`.
    pub fn len(&self) -> usize {
        self.subintervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mesh spacing `h = b / M`.
    pub fn spacing(&self) -> f64 {
        self.b / self.subintervals as f64
    }

    /// Node coordinate `x_i`.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.subintervals);
        if i == self.subintervals {
            self.b
        } else {
            i as f64 * self.b / self.subintervals as f64
        }
    }

    /// All node coordinates.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Index of the node closest to `x`, if `x` lies within `h/2` of a node.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let h = self.spacing();
        let i = (x / h).round();
        if i < 0.0 || i > self.subintervals as f64 {
            return None;
        }
        let i = i as usize;
        if (x - self.node(i)).abs() <= 1e-9 * self.b.max(1.0) {
            Some(i)
        } else {
            None
        }
    }
}

/// Real-valued samples on a [`Grid`].
///
/// Immutable after construction; cheap to clone (the grid is shared).
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    /// Wraps a value vector; its length must equal the node count and all
    /// entries must be finite.
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<GridFunction> {
        if values.len() != grid.len() {
            return Err(NsbfError::InvalidArgument(format!(
                "value count {} does not match node count {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(NsbfError::InvalidArgument(format!(
                "non-finite value at node {i}"
            )));
        }
        Ok(GridFunction { grid, values })
    }

    /// Samples a closure at every node.
    pub fn sample(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        GridFunction::new(Arc::clone(grid), values)
    }

    /// Constant zero function.
    pub fn zeros(grid: &Arc<Grid>) -> GridFunction {
        GridFunction {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Last node value, `f(b)`.
    pub fn end_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Degree-5 Lagrange interpolation on the 6-node block containing `x`
    /// (clamped to `[0, b]`). Exact at the nodes.
    pub fn interpolate(&self, x: f64) -> f64 {
        let grid = &self.grid;
        let x = x.clamp(0.0, grid.b());
        let h = grid.spacing();
        let blocks = grid.subintervals() / 5;
        let blk = ((x / (5.0 * h)) as usize).min(blocks - 1);
        let base = 5 * blk;
        let s = x / h - base as f64; // local coordinate in [0, 5]
        let seg = &self.values[base..base + 6];
        let mut out = 0.0;
        for m in 0..6 {
            let mut lm = 1.0;
            for r in 0..6 {
                if r != m {
                    lm *= (s - r as f64) / (m as f64 - r as f64);
                }
            }
            out += lm * seg[m];
        }
        out
    }

    /// Writes the function as headerless two-column CSV `x,value` with 17
    /// significant digits.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        for (i, v) in self.values.iter().enumerate() {
            // 17 significant digits: exact round-trip through text
            writeln!(w, "{:.16e},{:.16e}", self.grid.node(i), v)?;
        }
        Ok(())
    }
}

/// Cumulative-integral weights for one 6-node block.
///
/// `W[k][m]` is the weight of node `m` (0..=5) in the integral of the local
/// degree-5 interpolant from the block start to node `k` (1..=5), in units
/// of the spacing `h`.
fn block_weights() -> [[f64; 6]; 5] {
    let mut w = [[0.0; 6]; 5];
    for m in 0..6i64 {
        // Expand the Lagrange numerator prod_{r != m} (s - r) into monomial
        // coefficients, then integrate term by term over a common denominator
        // of 60 = lcm(1..6). Everything stays an exact integer until the one
        // final division, so each weight is correctly rounded.
        let mut coeff = vec![1i64];
        let mut denom = 1i64;
        for r in 0..6i64 {
            if r == m {
                continue;
            }
            denom *= m - r;
            let mut next = vec![0i64; coeff.len() + 1];
            for (j, &c) in coeff.iter().enumerate() {
                next[j + 1] += c;
                next[j] -= c * r;
            }
            coeff = next;
        }
        for k in 1..=5i64 {
            let mut num = 0i64;
            let mut power = k;
            for (j, &c) in coeff.iter().enumerate() {
                num += c * power * (60 / (j as i64 + 1));
                power *= k;
            }
            w[k as usize - 1][m as usize] = num as f64 / (60 * denom) as f64;
        }
    }
    w
}

/// Antiderivative `g(x_i) ~= int_0^{x_i} f`, exact for polynomials of degree
/// at most 5 sampled on the grid.
pub fn cumulative_integral(f: &GridFunction) -> GridFunction {
    let grid = f.grid();
    let h = grid.spacing();
    let weights = block_weights();
    let vals = f.values();
    let mut out = vec![0.0; vals.len()];
    let blocks = grid.subintervals() / 5;
    for blk in 0..blocks {
        let base_idx = 5 * blk;
        let base = out[base_idx];
        let seg = &vals[base_idx..base_idx + 6];
        for k in 1..=5 {
            let w = &weights[k - 1];
            let mut s = 0.0;
            for m in 0..6 {
                s += w[m] * seg[m];
            }
            out[base_idx + k] = base + h * s;
        }
    }
    GridFunction {
        grid: Arc::clone(grid),
        values: out,
    }
}

/// `int_0^b f`, the final value of [`cumulative_integral`].
pub fn definite_integral(f: &GridFunction) -> f64 {
    cumulative_integral(f).end_value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(b: f64, m: usize) -> Arc<Grid> {
        Arc::new(Grid::new(b, m).unwrap())
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid::new(0.0, 100).is_err());
        assert!(Grid::new(-1.0, 100).is_err());
        assert!(Grid::new(std::f64::consts::PI, 7).is_err());
        assert!(Grid::new(1.0, 5).is_err());
    }

    #[test]
    fn node_layout() {
        let g = grid(std::f64::consts::PI, 5000);
        assert_eq!(g.len(), 5001);
        assert!((g.node(2500) - std::f64::consts::PI / 2.0).abs() < 1e-15);
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(5000), std::f64::consts::PI);

        let g = grid(1.0, 10);
        for i in 0..=10 {
            assert!((g.node(i) - 0.1 * i as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn integrates_constants_exactly() {
        let g = grid(2.0, 20);
        let f = GridFunction::sample(&g, |_| 1.0).unwrap();
        let cum = cumulative_integral(&f);
        for i in 0..g.len() {
            assert!((cum.value(i) - g.node(i)).abs() < 1e-15);
        }
    }

    #[test]
    fn degree5_exactness() {
        let g = grid(1.0, 10);
        for k in 0..=5u32 {
            let f = GridFunction::sample(&g, |x| x.powi(k as i32)).unwrap();
            let cum = cumulative_integral(&f);
            for i in 1..g.len() {
                let x = g.node(i);
                let exact = x.powi(k as i32 + 1) / (k as f64 + 1.0);
                assert!(
                    (cum.value(i) - exact).abs() <= 1e-13 * exact.abs().max(1e-300) + 1e-16,
                    "k={k} i={i}: {} vs {exact}",
                    cum.value(i)
                );
            }
        }
        let f = GridFunction::sample(&g, |x| x.powi(5)).unwrap();
        assert!((definite_integral(&f) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn exp_on_unit_interval() {
        let g = grid(1.0, 1000);
        let f = GridFunction::sample(&g, f64::exp).unwrap();
        let e = std::f64::consts::E;
        assert!((definite_integral(&f) - (e - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn quadratic_on_pi() {
        let pi = std::f64::consts::PI;
        let g = grid(pi, 100);
        let f = GridFunction::sample(&g, |x| x * x).unwrap();
        assert!((definite_integral(&f) - pi.powi(3) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn q3_potential_definite_integral() {
        // q3(x) = 1 for x <= pi/2, 1 + (x - pi/2)^3 beyond; integral over
        // [0, pi] is pi + (pi/2)^4 / 4.
        let pi = std::f64::consts::PI;
        let g = grid(pi, 5000);
        let f = GridFunction::sample(&g, |x| {
            if x <= pi / 2.0 {
                1.0
            } else {
                1.0 + (x - pi / 2.0).powi(3)
            }
        })
        .unwrap();
        let exact = pi + (pi / 2.0).powi(4) / 4.0;
        assert!((definite_integral(&f) - exact).abs() < 1e-10);
    }

    #[test]
    fn refinement_is_order_six() {
        // Halving h must reduce the max node error on sin by >= 32x. Coarse
        // grids on a longer interval keep the errors above the rounding floor.
        let errs: Vec<f64> = [10usize, 20, 40]
            .iter()
            .map(|&m| {
                let g = grid(5.0, m);
                let f = GridFunction::sample(&g, f64::sin).unwrap();
                let cum = cumulative_integral(&f);
                (0..g.len())
                    .map(|i| (cum.value(i) - (1.0 - g.node(i).cos())).abs())
                    .fold(0.0_f64, f64::max)
            })
            .collect();
        assert!(errs[0] / errs[1] >= 32.0, "{errs:?}");
        assert!(errs[1] / errs[2] >= 32.0, "{errs:?}");
    }

    #[test]
    fn interpolation_degree5_exact() {
        let g = grid(1.0, 20);
        let f = GridFunction::sample(&g, |x| {
            1.0 + x * (2.0 + x * (-1.5 + x * (0.5 + x * (3.0 - 2.0 * x))))
        })
        .unwrap();
        for i in 0..200 {
            let x = i as f64 / 199.0;
            let exact = 1.0 + x * (2.0 + x * (-1.5 + x * (0.5 + x * (3.0 - 2.0 * x))));
            assert!((f.interpolate(x) - exact).abs() < 1e-13, "x={x}");
        }
        assert_eq!(f.interpolate(g.node(7)), f.value(7));
    }

    #[test]
    fn csv_round_trip_precision() {
        let g = grid(1.0, 10);
        let f = GridFunction::sample(&g, |x| (x * 10.0).sin() / 3.0).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for (i, line) in text.lines().enumerate() {
            let mut cols = line.split(',');
            let x: f64 = cols.next().unwrap().parse().unwrap();
            let v: f64 = cols.next().unwrap().parse().unwrap();
            assert_eq!(x, g.node(i));
            assert_eq!(v, f.value(i));
        }
    }

    proptest! {
        #[test]
        fn linearity(a in -5.0f64..5.0, c in -5.0f64..5.0, seed in 0u64..1000) {
            let g = grid(1.0, 50);
            let f = GridFunction::sample(&g, |x| (x * (seed % 7 + 1) as f64).sin()).unwrap();
            let p = GridFunction::sample(&g, |x| (x + seed as f64 * 1e-3).cos()).unwrap();
            let combo = GridFunction::new(
                Arc::clone(&g),
                f.values().iter().zip(p.values()).map(|(u, v)| a * u + c * v).collect(),
            ).unwrap();
            let lhs = cumulative_integral(&combo);
            let fi = cumulative_integral(&f);
            let pi_ = cumulative_integral(&p);
            let scale = lhs.max_abs().max(1.0);
            for i in 0..g.len() {
                let rhs = a * fi.value(i) + c * pi_.value(i);
                prop_assert!((lhs.value(i) - rhs).abs() <= 1e-14 * scale);
            }
        }

        #[test]
        fn monotone_for_nonnegative(shift in 0.0f64..3.0) {
            let g = grid(2.0, 30);
            let f = GridFunction::sample(&g, |x| (x * 3.0 + shift).sin() + 1.0).unwrap();
            let cum = cumulative_integral(&f);
            for i in 1..g.len() {
                prop_assert!(cum.value(i) + 1e-12 >= cum.value(i - 1));
            }
        }
    }
}
