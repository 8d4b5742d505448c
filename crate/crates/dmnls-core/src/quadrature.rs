//! Gauss–Legendre quadrature on [0, 1] for the averaged-nonlinearity r-integral.

use crate::error::{Error, Result};

/// Nodes and weights on (0, 1); exact for polynomials up to degree 2·order − 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    /// Gauss–Legendre rule, nodes found by Newton iteration on Pₙ with the
    /// Chebyshev-angle initial guess.
    pub fn gauss_legendre(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParams("quadrature order must be positive".into()));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // root of P_n in (−1, 1), descending; refine by Newton
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [−1,1] -> [0,1]; cos-descending order means index n−1−i is ascending
            nodes[n - 1 - i] = 0.5 * (x + 1.0);
            weights[n - 1 - i] = 0.5 * w;
        }
        let rule = Self { nodes, weights, order };
        rule.validate()?;
        Ok(rule)
    }

    fn validate(&self) -> Result<()> {
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidParams(format!(
                "quadrature weights sum to {sum}, expected 1"
            )));
        }
        let ascending = self.nodes.windows(2).all(|w| w[0] < w[1]);
        let interior = self.nodes.iter().all(|&x| x > 0.0 && x < 1.0);
        if !ascending || !interior {
            return Err(Error::InvalidParams(
                "quadrature nodes must be strictly increasing inside (0,1)".into(),
            ));
        }
        Ok(())
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// (Pₙ(x), Pₙ′(x)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
