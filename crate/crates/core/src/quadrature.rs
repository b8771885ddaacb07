//! Deterministic averages over the truncated inhomogeneity distribution.
//!
//! Integrals run Gauss-Legendre on each smooth piece of the truncated
//! support, with the Gaussian density folded into the integrand. Every
//! average is evaluated with [`BASE_NODES`] and again with twice as many
//! nodes; the two must agree to [`AGREEMENT_TOL`].

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::model::ReservoirModel;

pub const BASE_NODES: usize = 64;
pub const AGREEMENT_TOL: f64 = 1e-12;

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi's approximation to the i-th root, refined by Newton.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    fn for_each_node(&self, a: f64, b: f64, mut f: impl FnMut(f64, f64)) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            f(mid + half * x, w * half);
        }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

fn rule(n: usize) -> &'static GaussLegendre {
    static BASE: OnceLock<GaussLegendre> = OnceLock::new();
    static DOUBLE: OnceLock<GaussLegendre> = OnceLock::new();
    match n {
        BASE_NODES => BASE.get_or_init(|| GaussLegendre::new(BASE_NODES)),
        _ => DOUBLE.get_or_init(|| GaussLegendre::new(2 * BASE_NODES)),
    }
}

/// `E[f(delta)]` for a vector-valued `f` of length `dim` under the truncated
/// distribution of `res`. `breaks` lists kinks of `f` inside the support.
///
/// For `sigma = 0` the distribution is a point mass and `f(0)` is returned.
pub fn average_vec(
    res: &ReservoirModel,
    dim: usize,
    breaks: &[f64],
    f: impl Fn(f64) -> Vec<f64>,
) -> Result<Vec<f64>> {
    if res.sigma() == 0.0 {
        return Ok(f(0.0));
    }
    let coarse = average_with(rule(BASE_NODES), res, dim, breaks, &f);
    let fine = average_with(rule(2 * BASE_NODES), res, dim, breaks, &f);
    let gap = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if gap.is_nan() || gap > AGREEMENT_TOL {
        return Err(Error::Convergence(format!(
            "quadrature with {} and {} nodes disagrees by {gap:e}",
            BASE_NODES,
            2 * BASE_NODES
        )));
    }
    Ok(fine)
}

/// Scalar version of [`average_vec`].
pub fn average(res: &ReservoirModel, breaks: &[f64], f: impl Fn(f64) -> f64) -> Result<f64> {
    average_vec(res, 1, breaks, |x| vec![f(x)]).map(|v| v[0])
}

fn average_with(
    rule: &GaussLegendre,
    res: &ReservoirModel,
    dim: usize,
    breaks: &[f64],
    f: &impl Fn(f64) -> Vec<f64>,
) -> Vec<f64> {
    let (lo, hi) = res.support();
    let mut edges = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|b| *b > lo && *b < hi).collect();
    inner.sort_by(f64::total_cmp);
    edges.extend(inner);
    edges.push(hi);

    let mut acc = vec![0.0; dim];
    let mut mass = 0.0;
    for w in edges.windows(2) {
        rule.for_each_node(w[0], w[1], |x, wt| {
            let g = res.pdf(x) * wt;
            mass += g;
            for (a, v) in acc.iter_mut().zip(f(x)) {
                *a += g * v;
            }
        });
    }
    for a in &mut acc {
        *a /= mass;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let r = GaussLegendre::new(8);
        // degree 15 is the highest exact degree for 8 nodes
        let got = r.integrate(-1.0, 2.0, |x| x.powi(15) + 3.0 * x * x);
        let exact = (2f64.powi(16) - 1.0) / 16.0 + (8.0 + 1.0);
        assert!((got - exact).abs() < 1e-9 * exact.abs());
        let wsum: f64 = GaussLegendre::new(128).weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_moments() {
        let res = ReservoirModel::hamiltonian(0.05).unwrap();
        let m1 = average(&res, &[], |x| x).unwrap();
        let m2 = average(&res, &[], |x| x * x).unwrap();
        assert!(m1.abs() < 1e-15);
        // truncation at 6 sigma removes ~2e-9 of the mass
        assert!((m2 / 0.0025 - 1.0).abs() < 1e-6);
        let abs = average(&res, &[0.0], f64::abs).unwrap();
        assert!((abs / (0.05 * (2.0 / std::f64::consts::PI).sqrt()) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn point_mass_for_zero_width() {
        let res = ReservoirModel::temperature(0.0).unwrap();
        assert_eq!(average(&res, &[], |x| x + 2.0).unwrap(), 2.0);
    }

    #[test]
    fn kink_without_break_fails_validation() {
        let res = ReservoirModel::hamiltonian(0.05).unwrap();
        assert!(matches!(average(&res, &[], |x| x.abs()), Err(Error::Convergence(_))));
    }
}
