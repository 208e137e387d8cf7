//! Uniform node-centered 1D grid with the interpolation and quadrature
//! helpers shared by deposition, field solves, and diagnostics.
//!
//! Nodes sit at `x_min + k*dx` for `k = 0..=n_cells`. All integrals are
//! trapezoidal over nodes; windows with fractional endpoints integrate the
//! piecewise-linear interpolant exactly.

/// Uniform grid over [x_min, x_max] with `n_cells` cells (n_cells+1 nodes).
#[derive(Clone, Debug)]
pub struct Grid1d {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    dx: f64,
}

impl Grid1d {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Self {
        assert!(x_max > x_min && n_cells > 0);
        let dx = (x_max - x_min) / n_cells as f64;
        Self {
            x_min,
            x_max,
            n_cells,
            dx,
        }
    }

    #[inline]
    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    #[inline]
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    #[inline]
    pub fn node_x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Cell index and fractional offset in [0, 1) for a point inside the
    /// domain. The right boundary maps to the last cell with offset 1.
    #[inline]
    pub fn locate(&self, x: f64) -> (usize, f64) {
        debug_assert!(self.contains(x), "x={x} outside [{}, {}]", self.x_min, self.x_max);
        let u = (x - self.x_min) / self.dx;
        let mut k = u.floor() as usize;
        if k >= self.n_cells {
            k = self.n_cells - 1;
        }
        (k, u - k as f64)
    }

    /// Linear interpolation of a node array at `x`.
    #[inline]
    pub fn interp(&self, field: &[f64], x: f64) -> f64 {
        debug_assert_eq!(field.len(), self.n_nodes());
        let (k, theta) = self.locate(x);
        (1.0 - theta) * field[k] + theta * field[k + 1]
    }

    /// Trapezoidal integral over all nodes.
    pub fn trapezoid(&self, field: &[f64]) -> f64 {
        debug_assert_eq!(field.len(), self.n_nodes());
        let n = field.len();
        let mut s = 0.5 * (field[0] + field[n - 1]);
        for &v in &field[1..n - 1] {
            s += v;
        }
        s * self.dx
    }

    /// Cumulative trapezoidal integral from `x_min`; `out[0] = 0`.
    pub fn cumulative_trapezoid(&self, field: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(field.len(), self.n_nodes());
        out.clear();
        out.reserve(field.len());
        out.push(0.0);
        let mut acc = 0.0;
        for k in 1..field.len() {
            acc += 0.5 * self.dx * (field[k - 1] + field[k]);
            out.push(acc);
        }
    }

    /// Integral of the linear interpolant over the window [a, b].
    pub fn integral_between(&self, field: &[f64], a: f64, b: f64) -> f64 {
        debug_assert!(a <= b);
        debug_assert!(self.contains(a) && self.contains(b));
        let (ka, ta) = self.locate(a);
        let (kb, tb) = self.locate(b);
        if ka == kb {
            // both endpoints inside one cell: trapezoid of interpolated values
            let fa = self.interp(field, a);
            let fb = self.interp(field, b);
            return 0.5 * (fa + fb) * (b - a);
        }
        // partial left cell [a, node ka+1]
        let fa = (1.0 - ta) * field[ka] + ta * field[ka + 1];
        let mut s = 0.5 * (fa + field[ka + 1]) * (1.0 - ta) * self.dx;
        // full interior cells
        for k in ka + 1..kb {
            s += 0.5 * (field[k] + field[k + 1]) * self.dx;
        }
        // partial right cell [node kb, b]
        let fb = (1.0 - tb) * field[kb] + tb * field[kb + 1];
        s += 0.5 * (field[kb] + fb) * tb * self.dx;
        s
    }
}
