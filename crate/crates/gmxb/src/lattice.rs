//! The (wealth × benefit-base) lattice and value surfaces the backward
//! solvers work on.
//!
//! The wealth grid is log-uniform on `[W₀, W_M]` with `W₀ = 1e−10` standing
//! in for zero and `W_M` several standard deviations above the terminal
//! asset distribution. The benefit-base grid is a dedicated `A = 0` slice
//! plus a log-uniform grid that always contains the initial base `A(0)` as a
//! node and tops out at `W_M`.

use crate::model::MarketModel;
use crate::numerics::fastmath::fast_ln;
use crate::numerics::{axis_stencil, local_cubic_uniform, stencil_apply};
use crate::{cast, EngineError, Result, Scalar};

/// Grid-size configuration for the lattice.
#[derive(Debug, Clone, Copy)]
pub struct LatticeParams {
    /// Number of wealth-grid intervals M (the grid has M+1 nodes).
    pub wealth_intervals: usize,
    /// Total number of benefit-base slices J, including the zero slice.
    pub base_slices: usize,
    /// Wealth stand-in for zero, the bottom of the log grid.
    pub wealth_floor: f64,
    /// Upper wealth bound in standard deviations of `ln S(T)` beyond `|mean|`.
    pub quantile_width: f64,
    /// Lowest positive base node as a fraction of `A(0)`.
    pub base_floor_ratio: f64,
}

impl Default for LatticeParams {
    fn default() -> Self {
        Self {
            wealth_intervals: 400,
            base_slices: 200,
            wealth_floor: 1e-10,
            quantile_width: 5.0,
            base_floor_ratio: 1e-2,
        }
    }
}

/// Discretisation of the contract state space at one point in time.
#[derive(Debug, Clone)]
pub struct Lattice<T> {
    /// Uniform grid in `x = ln W`.
    log_wealth: Vec<T>,
    /// `exp` of the log grid.
    wealth: Vec<T>,
    /// Base levels per slice: `base[0] = 0`, `base[1..]` log-uniform.
    base: Vec<T>,
    /// `ln` of the positive base nodes (`base[1..]`), uniform.
    log_base: Vec<T>,
    /// Slice index of the initial benefit base.
    a0_slice: usize,
}

impl<T: Scalar> Lattice<T> {
    /// Builds the lattice for a contract starting at `(w0, a0)`. The upper
    /// wealth bound comes from the fee-free asset distribution,
    /// `W_M = scale·exp(|mean| + width·stdev)`, so the grid does not move
    /// when the fee is varied during a root search.
    pub fn new(model: &MarketModel<T>, w0: T, a0: T, params: &LatticeParams) -> Result<Self> {
        if !(w0 > T::zero()) || a0 < T::zero() {
            return Err(EngineError::Parameter(
                "initial wealth must be positive and initial base non-negative".into(),
            ));
        }
        let m = params.wealth_intervals;
        let j = params.base_slices;
        if m < 8 || j < 5 {
            return Err(EngineError::Parameter(format!(
                "lattice needs at least 8 wealth intervals and 5 base slices, got M={m}, J={j}"
            )));
        }

        let scale = w0.max(a0);
        // A one-log-unit floor on the stochastic band keeps degenerate
        // low-volatility grids from truncating the deterministic growth path.
        let spread = model.log_asset_mean().abs()
            + (cast::<T>(params.quantile_width) * model.log_asset_stdev()).max(T::one());
        let w_max = scale * spread.exp();
        let x_lo = cast::<T>(params.wealth_floor).ln();
        let x_hi = w_max.ln();
        let dx = (x_hi - x_lo) / cast(m as f64);
        let log_wealth: Vec<T> = (0..=m).map(|i| x_lo + dx * cast(i as f64)).collect();
        let wealth: Vec<T> = log_wealth.iter().map(|x| x.exp()).collect();

        // Positive base nodes: log-uniform, hitting both a0 and W_M exactly.
        let anchor = if a0 > T::zero() { a0 } else { w0 };
        if anchor >= w_max {
            return Err(EngineError::Parameter(
                "initial base lies above the wealth-grid upper bound".into(),
            ));
        }
        let y_anchor = anchor.ln();
        let y_top = x_hi;
        let y_bottom_target = (anchor * cast(params.base_floor_ratio)).ln();
        let intervals = j - 2;
        let dy_target =
            (y_top - y_bottom_target).to_f64().unwrap() / intervals as f64;
        let up_f = (y_top - y_anchor).to_f64().unwrap() / dy_target;
        let n_up = (up_f.ceil() as usize).clamp(1, intervals);
        let n_down = intervals - n_up;
        let dy = (y_top - y_anchor) / cast(n_up as f64);
        let log_base: Vec<T> = (0..=intervals)
            .map(|k| y_anchor + dy * cast(k as f64 - n_down as f64))
            .collect();
        let mut base = Vec::with_capacity(j);
        base.push(T::zero());
        base.extend(log_base.iter().map(|y| y.exp()));
        // Pin the anchor level exactly; exp(ln a0) can be off by an ulp.
        base[1 + n_down] = anchor;

        let a0_slice = if a0 > T::zero() { 1 + n_down } else { 0 };

        Ok(Self { log_wealth, wealth, base, log_base, a0_slice })
    }

    /// Number of wealth nodes (M+1).
    pub fn n_wealth(&self) -> usize {
        self.wealth.len()
    }

    /// Number of base slices J, including the zero slice.
    pub fn n_base(&self) -> usize {
        self.base.len()
    }

    pub fn wealth_nodes(&self) -> &[T] {
        &self.wealth
    }

    pub fn log_wealth_nodes(&self) -> &[T] {
        &self.log_wealth
    }

    pub fn base_levels(&self) -> &[T] {
        &self.base
    }

    /// Log of the positive base levels (`base_levels()[1..]`).
    pub fn log_base_nodes(&self) -> &[T] {
        &self.log_base
    }

    pub fn wealth(&self, m: usize) -> T {
        self.wealth[m]
    }

    pub fn base(&self, j: usize) -> T {
        self.base[j]
    }

    /// Slice index holding the initial benefit base (the zero slice when
    /// `a0 = 0`).
    pub fn a0_slice(&self) -> usize {
        self.a0_slice
    }

    pub fn wealth_floor(&self) -> T {
        self.wealth[0]
    }

    pub fn wealth_cap(&self) -> T {
        *self.wealth.last().unwrap()
    }
}

/// Which side of an event date a surface belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceSide {
    PreEvent,
    PostEvent,
}

/// Contract values on the lattice at a fixed time slice: `value(j, m)` is the
/// price at base slice `j` and wealth node `m`.
#[derive(Debug, Clone)]
pub struct ValueSurface<T> {
    values: Vec<T>,
    n_wealth: usize,
    pub time_index: usize,
    pub side: SurfaceSide,
}

impl<T: Scalar> ValueSurface<T> {
    pub fn zeros(lattice: &Lattice<T>, time_index: usize, side: SurfaceSide) -> Self {
        Self {
            values: vec![T::zero(); lattice.n_wealth() * lattice.n_base()],
            n_wealth: lattice.n_wealth(),
            time_index,
            side,
        }
    }

    pub fn n_base(&self) -> usize {
        self.values.len() / self.n_wealth
    }

    pub fn n_wealth(&self) -> usize {
        self.n_wealth
    }

    #[inline]
    pub fn at(&self, j: usize, m: usize) -> T {
        self.values[j * self.n_wealth + m]
    }

    #[inline]
    pub fn row(&self, j: usize) -> &[T] {
        &self.values[j * self.n_wealth..(j + 1) * self.n_wealth]
    }

    pub fn row_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.values[j * self.n_wealth..(j + 1) * self.n_wealth]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Parallel-friendly mutable access: all rows at once.
    pub fn rows_mut(&mut self) -> core::slice::ChunksMut<'_, T> {
        self.values.chunks_mut(self.n_wealth)
    }

    /// Returns slice-level diagnostics for the first non-finite entry.
    pub fn check_finite(&self, context: &str) -> Result<()> {
        for (idx, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(EngineError::Numerical(format!(
                    "{context}: non-finite value {v} at base slice {}, wealth node {} \
                     (time index {}, {:?})",
                    idx / self.n_wealth,
                    idx % self.n_wealth,
                    self.time_index,
                    self.side,
                )));
            }
        }
        Ok(())
    }
}

/// Read-only interpolating view over a surface, used to evaluate post-jump
/// states that fall off the lattice nodes.
///
/// Evaluation rules: bi-cubic in `(ln W, ln A)` on the positive-base region;
/// the dedicated zero slice is interpolated one-dimensionally in `ln W`;
/// bases between zero and the first positive node blend the two linearly in
/// `A`. Wealth below the grid floor clamps to the floor value, wealth above
/// the cap extends linearly.
pub struct SurfaceInterpolant<'a, T> {
    lattice: &'a Lattice<T>,
    zero_row: &'a [T],
    /// Positive-base values in wealth-major layout,
    /// `transposed[m·(J−1) + (j−1)]`. A withdrawal-candidate sweep holds the
    /// wealth node nearly fixed while the base runs through its whole range,
    /// so making the base the contiguous axis keeps the sixteen-point
    /// stencils inside a few hot cache lines.
    transposed: Vec<T>,
    n_pos: usize,
    x_lo: T,
    dx_inv: T,
    y_lo: T,
    dy_inv: T,
    x_cells: T,
}

impl<'a, T: Scalar> SurfaceInterpolant<'a, T> {
    pub fn new(lattice: &'a Lattice<T>, surface: &'a ValueSurface<T>) -> Result<Self> {
        let n_w = lattice.n_wealth();
        let n_pos = lattice.n_base() - 1;
        if n_pos < 4 || n_w < 4 {
            return Err(EngineError::Parameter(
                "surface interpolation needs at least 4 positive base slices and 4 wealth nodes"
                    .into(),
            ));
        }
        let mut transposed = vec![T::zero(); n_w * n_pos];
        for j in 0..n_pos {
            let row = surface.row(j + 1);
            for (m, value) in row.iter().enumerate() {
                transposed[m * n_pos + j] = *value;
            }
        }
        let x_lo = lattice.log_wealth_nodes()[0];
        let x_hi = *lattice.log_wealth_nodes().last().unwrap();
        let dx = (x_hi - x_lo) / cast((n_w - 1) as f64);
        let ys = lattice.log_base_nodes();
        let dy = (ys[ys.len() - 1] - ys[0]) / cast((ys.len() - 1) as f64);
        Ok(Self {
            lattice,
            zero_row: surface.row(0),
            transposed,
            n_pos,
            x_lo,
            dx_inv: T::one() / dx,
            y_lo: ys[0],
            dy_inv: T::one() / dy,
            x_cells: cast((n_w - 1) as f64),
        })
    }

    /// Wealth coordinate in grid units, clamped at the floor.
    #[inline]
    fn wealth_units(&self, wealth: T) -> T {
        if wealth <= self.lattice.wealth_floor() {
            return T::zero();
        }
        let u = (fast_ln(wealth) - self.x_lo) * self.dx_inv;
        u.max(T::zero())
    }

    /// Bi-cubic value on the positive-base region at grid-unit coordinates:
    /// four base-direction stencil applications at the neighbouring wealth
    /// rows, combined by the wealth-direction stencil.
    #[inline]
    fn positive_eval(&self, u: T, v: T) -> T {
        let sx = axis_stencil(u, self.lattice.n_wealth());
        let sv = axis_stencil(v, self.n_pos);
        let wx = &sx.coefficients;
        let mut acc = T::zero();
        for r in 0..4 {
            if wx[r] != T::zero() {
                let row = &self.transposed[(sx.anchor + r) * self.n_pos..];
                acc += wx[r] * stencil_apply(&row[..self.n_pos], &sv);
            }
        }
        acc
    }

    /// Value at an arbitrary post-jump state.
    pub fn eval(&self, wealth: T, base: T) -> T {
        let u = self.wealth_units(wealth);
        let first_base = self.lattice.base(1);
        if base >= first_base {
            let v = (fast_ln(base) - self.y_lo) * self.dy_inv;
            self.positive_eval(u, v)
        } else if base <= T::zero() {
            local_cubic_uniform(self.zero_row, u)
        } else {
            // Blend linearly in A between the zero slice and the first
            // positive slice.
            let zero = local_cubic_uniform(self.zero_row, u);
            let first = self.positive_eval(u, T::zero());
            zero + (first - zero) * (base / first_base)
        }
    }

    /// Value on the wealth grid when the base is exactly zero.
    pub fn eval_zero_base(&self, wealth: T) -> T {
        local_cubic_uniform(self.zero_row, self.wealth_units(wealth))
    }

    /// Largest wealth-grid coordinate in grid units (M).
    pub fn wealth_cells(&self) -> T {
        self.x_cells
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MarketModel;

    fn lattice() -> Lattice<f64> {
        let model = MarketModel::uniform(10.0, 4, 0.05, 0.2, Some(4)).unwrap();
        Lattice::new(&model, 100.0, 100.0, &LatticeParams::default()).unwrap()
    }

    #[test]
    fn grids_are_log_uniform_and_cover_quantiles() {
        let model = MarketModel::uniform(10.0, 4, 0.05, 0.2, Some(4)).unwrap();
        let lat = lattice();
        let xs = lat.log_wealth_nodes();
        let dx = xs[1] - xs[0];
        for i in 2..xs.len() {
            assert!(((xs[i] - xs[i - 1]) - dx).abs() < 1e-12);
        }
        let spread = f64::abs(model.log_asset_mean()) + 5.0 * model.log_asset_stdev();
        assert!(lat.wealth_cap() >= 100.0 * spread.exp() * (1.0 - 1e-12));
        assert_eq!(lat.n_wealth(), 401);
        assert_eq!(lat.n_base(), 200);
    }

    #[test]
    fn initial_base_is_a_grid_node() {
        let lat = lattice();
        assert_eq!(lat.base(lat.a0_slice()), 100.0);
        assert_eq!(lat.base(0), 0.0);
        let ys = lat.log_base_nodes();
        let dy = ys[1] - ys[0];
        for i in 2..ys.len() {
            assert!(((ys[i] - ys[i - 1]) - dy).abs() < 1e-10);
        }
        // Top of the base grid coincides with the wealth cap.
        assert!((lat.base(lat.n_base() - 1) / lat.wealth_cap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interpolant_reproduces_nodes_and_blends_small_bases() {
        let lat = lattice();
        let mut surf = ValueSurface::zeros(&lat, 0, SurfaceSide::PostEvent);
        for j in 0..lat.n_base() {
            let a = lat.base(j);
            for m in 0..lat.n_wealth() {
                surf.row_mut(j)[m] = lat.wealth(m) + 2.0 * a;
            }
        }
        let interp = SurfaceInterpolant::new(&lat, &surf).unwrap();
        for &j in &[0usize, 1, 7, lat.n_base() - 1] {
            for &m in &[0usize, 1, 200, lat.n_wealth() - 1] {
                let got = interp.eval(lat.wealth(m), lat.base(j));
                let want = surf.at(j, m);
                let tol = 1e-9 * (1.0 + want.abs());
                assert!((got - want).abs() < tol, "j={j} m={m}: {got} vs {want}");
            }
        }
        // Between A = 0 and the first positive slice the blend is linear in A.
        let a1 = lat.base(1);
        let w = 100.0;
        let at = |a: f64| interp.eval(w, a);
        let mid = at(0.5 * a1);
        assert!((mid - 0.5 * (at(0.0) + at(a1))).abs() < 1e-9 * (1.0 + mid.abs()));
    }

    #[test]
    fn wealth_clamps_below_floor() {
        let lat = lattice();
        let mut surf = ValueSurface::zeros(&lat, 0, SurfaceSide::PostEvent);
        for j in 0..lat.n_base() {
            for m in 0..lat.n_wealth() {
                surf.row_mut(j)[m] = 3.0 + lat.base(j);
            }
        }
        let interp = SurfaceInterpolant::new(&lat, &surf).unwrap();
        assert!((interp.eval(0.0, 0.0) - 3.0).abs() < 1e-12);
        assert!((interp.eval(1e-30, lat.base(5)) - (3.0 + lat.base(5))).abs() < 1e-9);
    }
}
