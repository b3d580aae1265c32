//! Bi-cubic spline interpolation on uniform rectangular grids.
//!
//! On a uniform grid the second derivatives of a cubic spline segment can be
//! taken from three-point central differences (natural zero at the domain
//! edges), so a single one-dimensional interpolation touches only the four
//! neighbouring nodes. A two-dimensional evaluation composes five such
//! interpolations: four along x at the rows bracketing y, then one along y
//! through those results — sixteen grid points in total.

use crate::{cast, EngineError, Result, Scalar};

/// Cubic value on the unit cell `[0, 1]` given endpoint values `f0, f1` and
/// scaled curvatures `m = f''·h²` from central differences.
#[inline]
fn cell<T: Scalar>(t: T, f0: T, f1: T, m0: T, m1: T) -> T {
    let a = T::one() - t;
    let b = t;
    a * f0 + b * f1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) / cast(6.0)
}

/// Four-point stencil form of one 1-D interpolation: the value is the dot
/// product of `coefficients` with `values[anchor..anchor + 4]`. Folding the
/// curvature differences into per-node coefficients lets a 2-D evaluation
/// reuse the x-direction weights across the four neighbouring rows.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AxisStencil<T> {
    pub anchor: usize,
    pub coefficients: [T; 4],
}

/// Stencil for a grid of `n ≥ 4` nodes at grid-unit coordinate `u` (node `i`
/// sits at `u = i`): natural (zero) curvature at the ends, linear
/// extrapolation outside.
#[inline]
pub(crate) fn axis_stencil<T: Scalar>(u: T, n: usize) -> AxisStencil<T> {
    debug_assert!(n >= 4);
    let six_inv = T::one() / cast::<T>(6.0);
    let last = n - 1;
    let top: T = cast(last as f64);
    if u <= T::zero() {
        // Linear extension with the spline slope at the first node:
        // value = f₀ + u·((f₁ − f₀) − (f₀ − 2f₁ + f₂)/6).
        let u6 = u * six_inv;
        return AxisStencil {
            anchor: 0,
            coefficients: [
                T::one() - u - u6,
                u + u6 + u6,
                -u6,
                T::zero(),
            ],
        };
    }
    if u >= top {
        let e = u - top;
        let e6 = e * six_inv;
        return AxisStencil {
            anchor: n - 4,
            coefficients: [
                T::zero(),
                e6,
                -e - e6 - e6,
                T::one() + e + e6,
            ],
        };
    }
    let i = (u.to_usize().unwrap_or(0)).min(n - 2);
    let t = u - cast(i as f64);
    let a = T::one() - t;
    let b = t;
    let wc = (a * a * a - a) * six_inv;
    let wd = (b * b * b - b) * six_inv;
    let two = cast::<T>(2.0);
    if i == 0 {
        // Natural start: no curvature at node 0.
        AxisStencil { anchor: 0, coefficients: [a + wd, b - two * wd, wd, T::zero()] }
    } else if i + 2 > last {
        // Natural end: no curvature at the last node.
        AxisStencil { anchor: n - 4, coefficients: [T::zero(), wc, a - two * wc, b + wc] }
    } else {
        AxisStencil {
            anchor: i - 1,
            coefficients: [wc, a - two * wc + wd, b + wc - two * wd, wd],
        }
    }
}

#[inline]
pub(crate) fn stencil_apply<T: Scalar>(values: &[T], stencil: &AxisStencil<T>) -> T {
    let w = &stencil.coefficients;
    let v = &values[stencil.anchor..stencil.anchor + 4];
    w[0] * v[0] + w[1] * v[1] + w[2] * v[2] + w[3] * v[3]
}

/// One-dimensional cubic interpolation on a uniform grid of `values`, with
/// `u` expressed in grid units (node `i` sits at `u = i`). Natural (zero)
/// curvature at both ends; linear extrapolation outside the grid.
pub fn local_cubic_uniform<T: Scalar>(values: &[T], u: T) -> T {
    let n = values.len();
    debug_assert!(n >= 2);
    if n >= 4 {
        return stencil_apply(values, &axis_stencil(u, n));
    }
    let last = n - 1;
    let six = cast::<T>(6.0);
    if u <= T::zero() {
        let m1 = if n >= 3 {
            values[0] - cast::<T>(2.0) * values[1] + values[2]
        } else {
            T::zero()
        };
        let slope = values[1] - values[0] - m1 / six;
        return values[0] + slope * u;
    }
    let top: T = cast(last as f64);
    if u >= top {
        let m_prev = if n >= 3 {
            values[last - 2] - cast::<T>(2.0) * values[last - 1] + values[last]
        } else {
            T::zero()
        };
        let slope = values[last] - values[last - 1] + m_prev / six;
        return values[last] + slope * (u - top);
    }
    let i = (u.to_usize().unwrap_or(0)).min(n - 2);
    let t = u - cast(i as f64);
    let m_lo = if i >= 1 {
        values[i - 1] - cast::<T>(2.0) * values[i] + values[i + 1]
    } else {
        T::zero()
    };
    let m_hi = if i + 2 <= last {
        values[i] - cast::<T>(2.0) * values[i + 1] + values[i + 2]
    } else {
        T::zero()
    };
    cell(t, values[i], values[i + 1], m_lo, m_hi)
}

/// Bi-cubic spline over a uniform `x`-grid × uniform `y`-grid value matrix,
/// stored row-major by `y` (`values[j * nx + i]` is the value at `(xᵢ, yⱼ)`).
///
/// Borrowing the matrix keeps construction allocation-free, which matters to
/// the solvers that rebuild the view at every event date.
#[derive(Debug, Clone)]
pub struct BicubicSpline2D<'a, T> {
    x0: T,
    dx: T,
    nx: usize,
    y0: T,
    dy: T,
    ny: usize,
    values: &'a [T],
}

fn uniform_step<T: Scalar>(grid: &[T], axis: &str) -> Result<T> {
    let n = grid.len();
    if n < 2 {
        return Err(EngineError::Parameter(format!(
            "bicubic {axis}-grid needs at least 2 nodes, got {n}"
        )));
    }
    let step = (grid[n - 1] - grid[0]) / cast((n - 1) as f64);
    if !(step > T::zero()) {
        return Err(EngineError::Parameter(format!(
            "bicubic {axis}-grid must be strictly increasing"
        )));
    }
    let tol = step * cast(1e-9);
    for i in 1..n {
        if ((grid[i] - grid[i - 1]) - step).abs() > tol {
            return Err(EngineError::Parameter(format!(
                "bicubic {axis}-grid is not uniform (node {i}); non-uniform grids are rejected"
            )));
        }
    }
    Ok(step)
}

impl<'a, T: Scalar> BicubicSpline2D<'a, T> {
    pub fn new(x_grid: &[T], y_grid: &[T], values: &'a [T]) -> Result<Self> {
        let dx = uniform_step(x_grid, "x")?;
        let dy = uniform_step(y_grid, "y")?;
        if values.len() != x_grid.len() * y_grid.len() {
            return Err(EngineError::Parameter(format!(
                "bicubic value matrix has {} entries, expected {}×{}",
                values.len(),
                y_grid.len(),
                x_grid.len()
            )));
        }
        Ok(Self {
            x0: x_grid[0],
            dx,
            nx: x_grid.len(),
            y0: y_grid[0],
            dy,
            ny: y_grid.len(),
            values,
        })
    }

    #[inline]
    fn row(&self, j: usize) -> &[T] {
        &self.values[j * self.nx..(j + 1) * self.nx]
    }

    /// Evaluates at `(x, y)`; linear extrapolation outside the grid.
    pub fn eval(&self, x: T, y: T) -> T {
        let u = (x - self.x0) / self.dx;
        let v = (y - self.y0) / self.dy;
        self.eval_grid_units(u, v)
    }

    /// Same as [`eval`](Self::eval) with coordinates already in grid units.
    /// Composed of the four x-direction interpolations at the rows the
    /// y-stencil touches, then one along y — with the x weights computed
    /// once and reused across rows.
    pub fn eval_grid_units(&self, u: T, v: T) -> T {
        if self.nx < 4 || self.ny < 4 {
            return self.eval_small(u, v);
        }
        let sx = axis_stencil(u, self.nx);
        let sy = axis_stencil(v, self.ny);
        let mut rows = [T::zero(); 4];
        for (r, slot) in rows.iter_mut().enumerate() {
            if sy.coefficients[r] != T::zero() {
                *slot = stencil_apply(self.row(sy.anchor + r), &sx);
            }
        }
        let w = &sy.coefficients;
        w[0] * rows[0] + w[1] * rows[1] + w[2] * rows[2] + w[3] * rows[3]
    }

    /// Fallback for degenerate grids with fewer than four nodes per axis.
    fn eval_small(&self, u: T, v: T) -> T {
        let ny = self.ny;
        let last = ny - 1;
        let six = cast::<T>(6.0);
        let two = cast::<T>(2.0);
        if v <= T::zero() {
            let f0 = local_cubic_uniform(self.row(0), u);
            let f1 = local_cubic_uniform(self.row(1), u);
            let m1 = if ny >= 3 {
                f0 - two * f1 + local_cubic_uniform(self.row(2), u)
            } else {
                T::zero()
            };
            let slope = f1 - f0 - m1 / six;
            return f0 + slope * v;
        }
        let top: T = cast(last as f64);
        if v >= top {
            let f_last = local_cubic_uniform(self.row(last), u);
            let f_prev = local_cubic_uniform(self.row(last - 1), u);
            let m_prev = if ny >= 3 {
                local_cubic_uniform(self.row(last - 2), u) - two * f_prev + f_last
            } else {
                T::zero()
            };
            let slope = f_last - f_prev + m_prev / six;
            return f_last + slope * (v - top);
        }
        let j = (v.to_usize().unwrap_or(0)).min(ny - 2);
        let t = v - cast(j as f64);
        let f_lo = local_cubic_uniform(self.row(j), u);
        let f_hi = local_cubic_uniform(self.row(j + 1), u);
        let m_lo = if j >= 1 {
            local_cubic_uniform(self.row(j - 1), u) - two * f_lo + f_hi
        } else {
            T::zero()
        };
        let m_hi = if j + 2 <= last {
            f_lo - two * f_hi + local_cubic_uniform(self.row(j + 2), u)
        } else {
            T::zero()
        };
        cell(t, f_lo, f_hi, m_lo, m_hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn node_values_returned_exactly() {
        let xs = grid(20, -1.0, 3.0);
        let ys = grid(17, 0.0, 5.0);
        let values: Vec<f64> = ys
            .iter()
            .flat_map(|y| xs.iter().map(move |x| (x * 1.7 + y).sin() + x * y))
            .collect();
        let s = BicubicSpline2D::new(&xs, &ys, &values).unwrap();
        for (j, y) in ys.iter().enumerate() {
            for (i, x) in xs.iter().enumerate() {
                let got = s.eval(*x, *y);
                let want = values[j * xs.len() + i];
                assert!((got - want).abs() < 1e-12, "node ({i},{j})");
            }
        }
    }

    #[test]
    fn reproduces_bilinear_function_everywhere() {
        let xs = grid(20, 0.0, 2.0);
        let ys = grid(20, -1.0, 1.0);
        let f = |x: f64, y: f64| 3.0 * x + 2.0 * y - 1.0;
        let values: Vec<f64> = ys
            .iter()
            .flat_map(|y| xs.iter().map(move |x| f(*x, *y)))
            .collect();
        let s = BicubicSpline2D::new(&xs, &ys, &values).unwrap();
        for &(x, y) in &[
            (0.37, 0.11),
            (1.99, -0.99),
            (0.0, 0.0),
            (2.0, 1.0),
            (-0.5, 0.3),  // extrapolation in x
            (1.0, 1.8),   // extrapolation in y
            (2.7, -1.6),  // both
        ] {
            assert!((s.eval(x, y) - f(x, y)).abs() < 1e-10, "({x},{y})");
        }
    }

    #[test]
    fn smooth_function_oracle() {
        // f(x,y) = sin(x)cos(y) on a 101×101 grid over [0,π]²; dense analytic
        // values are the oracle at random interior points.
        let n = 101;
        let xs = grid(n, 0.0, std::f64::consts::PI);
        let ys = grid(n, 0.0, std::f64::consts::PI);
        let values: Vec<f64> = ys
            .iter()
            .flat_map(|y| xs.iter().map(move |x| x.sin() * y.cos()))
            .collect();
        let s = BicubicSpline2D::new(&xs, &ys, &values).unwrap();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rand01 = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let x = std::f64::consts::PI * (0.01 + 0.98 * rand01());
            let y = std::f64::consts::PI * (0.01 + 0.98 * rand01());
            worst = worst.max((s.eval(x, y) - x.sin() * y.cos()).abs());
        }
        assert!(worst < 1e-6, "max abs error {worst}");
    }

    #[test]
    fn equals_composition_of_five_one_dimensional_interpolations() {
        let xs = grid(12, 0.0, 1.1);
        let ys = grid(9, 0.0, 0.8);
        let values: Vec<f64> = ys
            .iter()
            .flat_map(|y| xs.iter().map(move |x| (3.0 * x).cos() * (2.0 * y).exp()))
            .collect();
        let s = BicubicSpline2D::new(&xs, &ys, &values).unwrap();

        let (x, y) = (0.53, 0.42);
        let u = (x - xs[0]) / (xs[1] - xs[0]);
        let v = (y - ys[0]) / (ys[1] - ys[0]);
        let j = v.floor() as usize;
        // Four x-direction interpolations at the neighbouring rows...
        let rows: Vec<f64> = (j - 1..=j + 2)
            .map(|jj| local_cubic_uniform(&values[jj * xs.len()..(jj + 1) * xs.len()], u))
            .collect();
        // ...then one along y through those values.
        let m_lo = rows[0] - 2.0 * rows[1] + rows[2];
        let m_hi = rows[1] - 2.0 * rows[2] + rows[3];
        let t = v - j as f64;
        let a = 1.0 - t;
        let b = t;
        let manual = a * rows[1]
            + b * rows[2]
            + ((a * a * a - a) * m_lo + (b * b * b - b) * m_hi) / 6.0;
        assert!((s.eval(x, y) - manual).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_uniform_grids() {
        let xs = vec![0.0, 1.0, 2.5, 3.0];
        let ys = grid(4, 0.0, 1.0);
        let values = vec![0.0; 16];
        assert!(BicubicSpline2D::new(&xs, &ys, &values).is_err());
    }
}
