//! Gauss-Legendre rules on $[-1,1]$ and their affine/tensor extensions.

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped from $[-1,1]$ onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (mid + half * x, half * w))
            .collect()
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).into_iter().map(|(x, w)| w * f(x)).sum()
    }

    /// Tensor-product nodes `(x, y, weight)` on `[ax,bx] x [ay,by]`, x varying fastest.
    pub fn tensor_2d(&self, ax: f64, bx: f64, ay: f64, by: f64) -> Vec<(f64, f64, f64)> {
        let xs = self.mapped(ax, bx);
        let ys = self.mapped(ay, by);
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for &(y, wy) in &ys {
            for &(x, wx) in &xs {
                out.push((x, y, wx * wy));
            }
        }
        out
    }
}

/// Legendre polynomial $P_n(x)$ and its derivative via the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule with `order` nodes, exact for polynomials of degree `2 order - 1`.
pub fn gauss_legendre(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::Argument(format!(
            "quadrature order {order} outside 1..={MAX_ORDER}"
        )));
    }
    if order == 1 {
        return Ok(QuadratureRule {
            nodes: vec![0.0],
            weights: vec![2.0],
        });
    }
    let n = order;
    let half = n / 2;
    let mut pos = Vec::with_capacity(half);
    for i in 0..half {
        // roots counted from the right end, each refined by Newton
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d.is_finite() {
            dp = d;
        }
        pos.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &(x, w) in &pos {
        nodes.push(-x);
        weights.push(w);
    }
    if n % 2 == 1 {
        let (_, d) = legendre(n, 0.0);
        nodes.push(0.0);
        weights.push(2.0 / (d * d));
    }
    for &(x, w) in pos.iter().rev() {
        nodes.push(x);
        weights.push(w);
    }
    Ok(QuadratureRule { nodes, weights })
}
