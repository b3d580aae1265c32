//! Gauss-Hermite quadrature: `∫ e^{−x²} f(x) dx ≈ Σᵢ λᵢ f(ξᵢ)`.
//!
//! The nodes `ξᵢ` are the roots of the Hermite polynomial `H_q` and the
//! weights follow from the standard formula
//! `λᵢ = 2^{q−1} q! √π / (q² H_{q−1}(ξᵢ)²)`. The rule integrates
//! `e^{−x²} p(x)` exactly for any polynomial `p` of degree ≤ 2q−1.

use crate::{cast, EngineError, Result, Scalar};

/// A Gauss-Hermite rule of a given order: nodes are strictly increasing and
/// symmetric about zero, weights are positive and sum to √π.
#[derive(Debug, Clone)]
pub struct GaussHermite<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussHermite<T> {
    /// Largest supported order; the Newton iteration on the orthonormal
    /// recurrence stays stable well past this, but nothing in the engine
    /// needs more points.
    pub const MAX_ORDER: usize = 64;

    /// Computes the rule of the given order.
    ///
    /// Roots are found by Newton iteration on the orthonormal three-term
    /// recurrence with the usual asymptotic initial guesses, working from the
    /// largest root inward; the negative half is filled by symmetry.
    pub fn new(order: usize) -> Result<Self> {
        if order < 1 || order > Self::MAX_ORDER {
            return Err(EngineError::Parameter(format!(
                "quadrature order {order} outside [1, {}]",
                Self::MAX_ORDER
            )));
        }

        let q = order;
        let mut nodes = vec![T::zero(); q];
        let mut weights = vec![T::zero(); q];

        let eps = T::epsilon() * cast(100.0);
        let qf: T = cast(q as f64);
        let half_count = q.div_ceil(2);

        // Guesses for the i-th largest root, refined by Newton.
        let mut guess_prev = T::zero();
        let mut guess_prev2 = T::zero();
        for i in 0..half_count {
            let mut z = match i {
                0 => {
                    let a = (cast::<T>(2.0) * qf + T::one()).sqrt();
                    a - cast::<T>(1.85575) * (cast::<T>(2.0) * qf + T::one()).powf(cast(-1.0 / 6.0))
                }
                1 => guess_prev - cast::<T>(1.14) * qf.powf(cast(0.426)) / guess_prev,
                2 => cast::<T>(1.86) * guess_prev - cast::<T>(0.86) * guess_prev2,
                3 => cast::<T>(1.91) * guess_prev - cast::<T>(0.91) * guess_prev2,
                _ => cast::<T>(2.0) * guess_prev - guess_prev2,
            };

            let mut h_prev = T::zero();
            for _ in 0..200 {
                // Orthonormal Hermite values h̃_q(z) and h̃_{q−1}(z).
                let mut p1 = T::PI().powf(cast(-0.25));
                let mut p2 = T::zero();
                for j in 1..=q {
                    let jf: T = cast(j as f64);
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (cast::<T>(2.0) / jf).sqrt() * p2
                        - ((jf - T::one()) / jf).sqrt() * p3;
                }
                h_prev = p2;
                let derivative = (cast::<T>(2.0) * qf).sqrt() * p2;
                let step = p1 / derivative;
                z = z - step;
                if step.abs() <= eps {
                    break;
                }
            }

            guess_prev2 = guess_prev;
            guess_prev = z;

            // λᵢ = 1 / (q · h̃_{q−1}(ξᵢ)²), equivalent to the H_{q−1} formula.
            let w = T::one() / (qf * h_prev * h_prev);
            let hi = q - 1 - i;
            nodes[i] = z;
            nodes[hi] = -z;
            weights[i] = w;
            weights[hi] = w;
        }
        if q % 2 == 1 {
            nodes[q / 2] = T::zero();
        }
        nodes.reverse();
        weights.reverse();

        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes in strictly increasing order.
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Approximates `∫ e^{−x²} f(x) dx`.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .fold(T::zero(), |acc, v| acc + v)
    }
}
