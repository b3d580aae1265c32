//! Natural cubic spline interpolation.

use crate::numerics::tridiag;
use crate::{cast, EngineError, Result, Scalar};

/// Natural cubic spline through `(knots[i], values[i])`: second derivative is
/// continuous at interior knots and zero at both ends, and evaluation outside
/// the knot range extends linearly (zero curvature) with the boundary slope.
#[derive(Debug, Clone)]
pub struct CubicSpline1D<T> {
    knots: Vec<T>,
    values: Vec<T>,
    /// Second derivatives at the knots; endpoints are zero.
    curvatures: Vec<T>,
    /// Knot spacing when the grid is uniform, enabling O(1) location.
    uniform_step: Option<T>,
}

impl<T: Scalar> CubicSpline1D<T> {
    /// Builds the spline. Requires at least three strictly increasing knots.
    pub fn new(knots: Vec<T>, values: Vec<T>) -> Result<Self> {
        let n = knots.len();
        if n < 3 {
            return Err(EngineError::Parameter(format!(
                "cubic spline needs at least 3 knots, got {n}"
            )));
        }
        if values.len() != n {
            return Err(EngineError::Parameter(format!(
                "spline knots ({n}) and values ({}) differ in length",
                values.len()
            )));
        }
        for i in 1..n {
            if !(knots[i] > knots[i - 1]) {
                return Err(EngineError::Parameter(format!(
                    "spline knots must be strictly increasing (violated at index {i})"
                )));
            }
        }

        let six_inv = T::one() / cast(6.0);
        let third = T::one() / cast(3.0);
        let interior = n - 2;
        let mut sub = vec![T::zero(); interior.saturating_sub(1)];
        let mut diag = vec![T::zero(); interior];
        let mut sup = vec![T::zero(); interior.saturating_sub(1)];
        let mut rhs = vec![T::zero(); interior];
        for i in 1..n - 1 {
            let h_lo = knots[i] - knots[i - 1];
            let h_hi = knots[i + 1] - knots[i];
            let k = i - 1;
            if k > 0 {
                sub[k - 1] = h_lo * six_inv;
            }
            diag[k] = (h_lo + h_hi) * third;
            if k + 1 < interior {
                sup[k] = h_hi * six_inv;
            }
            rhs[k] = (values[i + 1] - values[i]) / h_hi - (values[i] - values[i - 1]) / h_lo;
        }
        let inner = tridiag::solve(&sub, &diag, &sup, &rhs)?;
        let mut curvatures = vec![T::zero(); n];
        curvatures[1..n - 1].copy_from_slice(&inner);

        let step = (knots[n - 1] - knots[0]) / cast((n - 1) as f64);
        let tol = step.abs() * cast(1e-9);
        let uniform = (1..n).all(|i| ((knots[i] - knots[i - 1]) - step).abs() <= tol);

        Ok(Self {
            knots,
            values,
            curvatures,
            uniform_step: uniform.then_some(step),
        })
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Second derivatives at the knots (zero at both ends).
    pub fn curvatures(&self) -> &[T] {
        &self.curvatures
    }

    #[inline]
    fn segment(&self, x: T) -> usize {
        let n = self.knots.len();
        if let Some(h) = self.uniform_step {
            let idx = ((x - self.knots[0]) / h).floor();
            let idx = idx.to_isize().unwrap_or(0);
            idx.clamp(0, n as isize - 2) as usize
        } else {
            // partition_point: first knot strictly greater than x.
            let upper = self.knots.partition_point(|k| *k <= x);
            upper.clamp(1, n - 1) - 1
        }
    }

    /// Evaluates the spline; linear extrapolation outside the knot range.
    pub fn eval(&self, x: T) -> T {
        let n = self.knots.len();
        let six_inv = T::one() / cast(6.0);
        if x < self.knots[0] {
            let h = self.knots[1] - self.knots[0];
            let slope = (self.values[1] - self.values[0]) / h - self.curvatures[1] * h * six_inv;
            return self.values[0] + slope * (x - self.knots[0]);
        }
        if x > self.knots[n - 1] {
            let h = self.knots[n - 1] - self.knots[n - 2];
            let slope =
                (self.values[n - 1] - self.values[n - 2]) / h + self.curvatures[n - 2] * h * six_inv;
            return self.values[n - 1] + slope * (x - self.knots[n - 1]);
        }
        let i = self.segment(x);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - x) / h;
        let b = T::one() - a;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.curvatures[i] + (b * b * b - b) * self.curvatures[i + 1])
                * h
                * h
                * six_inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_linear_data_everywhere() {
        let knots: Vec<f64> = vec![-2.0, -0.5, 0.1, 1.0, 3.7, 9.0];
        let values: Vec<f64> = knots.iter().map(|x| 2.0 * x + 1.0).collect();
        let s = CubicSpline1D::new(knots, values).unwrap();
        for &x in &[-5.0, -2.0, -1.3, 0.0, 0.99, 2.5, 9.0, 14.0] {
            assert!((s.eval(x) - (2.0 * x + 1.0)).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn interpolates_knot_values_exactly() {
        let knots = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let values = vec![1.0, -1.0, 5.0, 0.0, 2.0];
        let s = CubicSpline1D::new(knots.clone(), values.clone()).unwrap();
        for (k, v) in knots.iter().zip(&values) {
            assert_eq!(s.eval(*k), *v);
        }
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(CubicSpline1D::new(vec![0.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(CubicSpline1D::new(vec![0.0, 1.0, 1.0], vec![0.0; 3]).is_err());
        assert!(CubicSpline1D::new(vec![0.0, 2.0, 1.0], vec![0.0; 3]).is_err());
    }

    #[test]
    fn beats_linear_interpolation_on_cubic_data() {
        // y = x³ sampled on 201 uniform knots over [0, 1]; the spline error at
        // cell midpoints must be below the linear-interpolation error, both
        // measured against the dense analytic values.
        let n = 201;
        let knots: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let values: Vec<f64> = knots.iter().map(|x| x * x * x).collect();
        let s = CubicSpline1D::new(knots.clone(), values.clone()).unwrap();
        let mut worst_spline = 0.0f64;
        let mut worst_linear = 0.0f64;
        for i in 0..n - 1 {
            let mid = 0.5 * (knots[i] + knots[i + 1]);
            let exact = mid * mid * mid;
            worst_spline = worst_spline.max((s.eval(mid) - exact).abs());
            worst_linear = worst_linear.max((0.5 * (values[i] + values[i + 1]) - exact).abs());
        }
        assert!(
            worst_spline < worst_linear,
            "spline {worst_spline} vs linear {worst_linear}"
        );
    }

    #[test]
    fn extrapolates_linearly_above_with_end_slope() {
        let knots: Vec<f64> = vec![0.0, 1.0, 2.0, 3.0];
        let values = vec![0.0, 1.0, 8.0, 27.0];
        let s = CubicSpline1D::new(knots, values).unwrap();
        let h = 1.0f64;
        let slope = (27.0 - 8.0) / h + s.curvatures()[2] * h / 6.0;
        let x = 4.5;
        assert!((s.eval(x) - (27.0 + slope * (x - 3.0))).abs() < 1e-12);
        // Far out, growth stays linear: equal increments.
        let d1 = s.eval(10.0) - s.eval(9.0);
        let d2 = s.eval(11.0) - s.eval(10.0);
        assert!((d1 - d2).abs() < 1e-9);
    }

    #[test]
    fn extrapolates_linearly_below() {
        let knots: Vec<f64> = vec![0.0, 1.0, 2.0, 3.0];
        let values = vec![0.0, 1.0, 8.0, 27.0];
        let s = CubicSpline1D::new(knots, values).unwrap();
        let h = 1.0f64;
        let slope = (1.0 - 0.0) / h - s.curvatures()[1] * h / 6.0;
        let x = -2.0;
        assert!((s.eval(x) - (0.0 + slope * x)).abs() < 1e-12);
    }

    proptest! {
        // Random linear functions on random knot sets are reproduced to 1e−11.
        #[test]
        fn linear_reproduction(
            slope in -100.0f64..100.0,
            intercept in -100.0f64..100.0,
            start in -10.0f64..10.0,
            steps in proptest::collection::vec(0.01f64..2.0, 3..40),
            probe in -0.5f64..1.5,
        ) {
            let mut knots = vec![start];
            for d in &steps {
                knots.push(knots.last().unwrap() + d);
            }
            let values: Vec<f64> = knots.iter().map(|x| slope * x + intercept).collect();
            let lo = knots[0];
            let hi = *knots.last().unwrap();
            let s = CubicSpline1D::new(knots, values).unwrap();
            let x = lo + probe * (hi - lo);
            let scale = 1.0 + slope.abs() * x.abs() + intercept.abs();
            prop_assert!((s.eval(x) - (slope * x + intercept)).abs() < 1e-11 * scale);
        }
    }
}
