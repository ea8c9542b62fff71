//! One-dimensional quadrature rules on a finite interval.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::Real;

/// Quadrature family used to discretise a frequency axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    #[default]
    GaussLegendre,
    Trapezoid,
}

/// Nodes and weights of a rule mapped onto `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Nodes<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> Nodes<T> {
    pub fn new(rule: QuadratureRule, lo: T, hi: T, n: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(domain(format!("empty interval [{lo}, {hi}]")));
        }
        match rule {
            QuadratureRule::GaussLegendre => {
                if n < 1 {
                    return Err(domain("Gauss-Legendre needs at least one node"));
                }
                Ok(gauss_legendre(lo, hi, n))
            }
            QuadratureRule::Trapezoid => {
                if n < 2 {
                    return Err(domain("trapezoid rule needs at least two nodes"));
                }
                Ok(trapezoid(lo, hi, n))
            }
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Weighted sum of `f` over the nodes.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn trapezoid<T: Real>(lo: T, hi: T, n: usize) -> Nodes<T> {
    let step = (hi - lo) / T::from_usize_lossy(n - 1);
    let half = step / (T::one() + T::one());
    let points = (0..n)
        .map(|i| {
            // Mirror the upper half so the node set is exactly symmetric.
            if 2 * i < n {
                lo + step * T::from_usize_lossy(i)
            } else {
                hi - step * T::from_usize_lossy(n - 1 - i)
            }
        })
        .collect();
    let weights = (0..n)
        .map(|i| if i == 0 || i == n - 1 { half } else { step })
        .collect();
    Nodes { points, weights }
}

/// Legendre nodes/weights on `[-1, 1]`, ascending, computed in `f64`.
pub fn legendre_reference(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            deriv = dp;
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        if dp.is_finite() {
            deriv = dp;
        }
        let weight = 2.0 / ((1.0 - z * z) * deriv * deriv);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

fn gauss_legendre<T: Real>(lo: T, hi: T, n: usize) -> Nodes<T> {
    let (x, w) = legendre_reference(n);
    let two = T::one() + T::one();
    let mid = (lo + hi) / two;
    let half = (hi - lo) / two;
    Nodes {
        points: x.iter().map(|&xi| mid + half * T::lit(xi)).collect(),
        weights: w.iter().map(|&wi| half * T::lit(wi)).collect(),
    }
}
