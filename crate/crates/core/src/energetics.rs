//! Work, heat and internal-energy bookkeeping for single collisions and
//! their ensemble averages.
//!
//! Sign conventions: work is energy injected into the system-qudit pair,
//! heat is energy released by the reservoir qudit into the system, so
//! `dU = W + Q` for every collision.

use serde::{Deserialize, Serialize};

use crate::dynamics::{decay_factor, thermal_populations};
use crate::error::{Error, Result};
use crate::model::{InhomogeneityKind, ModelParams, Population};

/// Energetic ledger of one collision, in units of `hbar g0` (with `g0`
/// carried by the parameters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionRecord {
    pub delta: f64,
    pub work: f64,
    pub heat: f64,
    pub d_u: f64,
}

impl CollisionRecord {
    /// Evaluates all three quantities for a system in `p_sys` meeting a
    /// reservoir qudit with inhomogeneity `delta`.
    pub fn evaluate(
        p_sys: &Population,
        delta: f64,
        params: &ModelParams,
        kind: InhomogeneityKind,
    ) -> Result<Self> {
        let q = local_thermal(p_sys, delta, params)?;
        let gap = energy_gap(p_sys, &q, params);
        let d_u = params.g0() * params.sin2() * gap;
        let (work, heat) = match kind {
            InhomogeneityKind::Hamiltonian => {
                let heat = params.g0() * (1.0 + delta) * params.sin2() * gap;
                (params.g0() * delta * params.sin2() * level_gap(p_sys, &q), heat)
            }
            InhomogeneityKind::Temperature => (0.0, d_u),
        };
        Ok(Self {
            delta,
            work,
            heat,
            d_u,
        })
    }

    /// `|dU - W - Q|`.
    pub fn first_law_residual(&self) -> f64 {
        (self.d_u - self.work - self.heat).abs()
    }
}

fn local_thermal(p_sys: &Population, delta: f64, params: &ModelParams) -> Result<Population> {
    if delta.is_nan() || delta <= -1.0 {
        return Err(Error::Domain(format!("inhomogeneity must satisfy delta > -1, got {delta}")));
    }
    if p_sys.dim() != params.d() {
        return Err(Error::DimensionMismatch {
            expected: params.d(),
            actual: p_sys.dim(),
        });
    }
    thermal_populations(params, delta)
}

/// `sum_j (j - (d-1)/2) (q_j - p_j)`.
fn energy_gap(p: &Population, q: &Population, params: &ModelParams) -> f64 {
    p.iter()
        .zip(q.iter())
        .enumerate()
        .map(|(j, (pj, qj))| params.level_offset(j) * (qj - pj))
        .sum()
}

/// `sum_j j (p_j - q_j)`; the level offset drops out since both sum to one.
fn level_gap(p: &Population, q: &Population) -> f64 {
    p.iter()
        .zip(q.iter())
        .enumerate()
        .map(|(j, (pj, qj))| j as f64 * (pj - qj))
        .sum()
}

/// Work injected during one collision with a Hamiltonian-inhomogeneous
/// qudit: `g0 delta sin^2(theta) sum_j j [p_j - q_j(delta)]`.
pub fn work_single(p_sys: &Population, delta: f64, params: &ModelParams) -> Result<f64> {
    let q = local_thermal(p_sys, delta, params)?;
    Ok(params.g0() * delta * params.sin2() * level_gap(p_sys, &q))
}

/// Heat released by the reservoir qudit into the system.
pub fn heat_single(
    p_sys: &Population,
    delta: f64,
    params: &ModelParams,
    kind: InhomogeneityKind,
) -> Result<f64> {
    CollisionRecord::evaluate(p_sys, delta, params, kind).map(|r| r.heat)
}

/// Change of the system energy, identical for both inhomogeneity kinds.
pub fn delta_u(p_sys: &Population, delta: f64, params: &ModelParams) -> Result<f64> {
    let q = local_thermal(p_sys, delta, params)?;
    Ok(params.g0() * params.sin2() * energy_gap(p_sys, &q, params))
}

/// Value and first two `delta`-derivatives of `q_j(delta)` at `delta = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoefficients {
    pub level: usize,
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

impl TaylorCoefficients {
    /// `q_j(0) + q_j'(0) delta + q_j''(0) delta^2 / 2`.
    pub fn second_order(&self, delta: f64) -> f64 {
        self.value + self.first * delta + 0.5 * self.second * delta * delta
    }
}

/// Derivatives of the thermal populations with respect to `delta`.
///
/// With `u = beta g0 (1 + delta)`, `d ln q_j / du = <k> - j` and
/// `d <k> / du = -Var(k)`, where the moments are over `q` itself.
pub fn taylor_coefficients(params: &ModelParams, j: usize) -> Result<TaylorCoefficients> {
    if j >= params.d() {
        return Err(Error::Domain(format!("level {j} outside 0..{}", params.d())));
    }
    let q = thermal_populations(params, 0.0)?;
    Ok(taylor_from_moments(params, &q, j))
}

fn taylor_from_moments(params: &ModelParams, q: &Population, j: usize) -> TaylorCoefficients {
    let mean: f64 = q.iter().enumerate().map(|(k, qk)| k as f64 * qk).sum();
    let var: f64 = q.iter().enumerate().map(|(k, qk)| (k as f64 - mean).powi(2) * qk).sum();
    let x = params.beta_g0();
    let shift = mean - j as f64;
    TaylorCoefficients {
        level: j,
        value: q[j],
        first: x * q[j] * shift,
        second: x * x * q[j] * (shift * shift - var),
    }
}

/// Coefficients for every level.
pub fn all_taylor_coefficients(params: &ModelParams) -> Result<Vec<TaylorCoefficients>> {
    let q = thermal_populations(params, 0.0)?;
    Ok((0..params.d()).map(|j| taylor_from_moments(params, &q, j)).collect())
}

/// `sum_j j q_j'(0)`.
fn level_weighted_slope(params: &ModelParams) -> Result<f64> {
    Ok(all_taylor_coefficients(params)?
        .iter()
        .map(|t| t.level as f64 * t.first)
        .sum())
}

/// Leading-order ensemble-averaged work per collision,
/// `-sigma^2 g0 sin^2(theta) sum_j j q_j'(0)`. Independent of the system
/// state and of the collision index.
pub fn avg_work_taylor(params: &ModelParams, sigma: f64) -> Result<f64> {
    Ok(-sigma * sigma * params.g0() * params.sin2() * level_weighted_slope(params)?)
}

/// Leading-order ensemble-averaged heat per collision (Hamiltonian kind)
/// for a system whose averaged pre-collision state is `p_bar`:
///
/// `g0 sin^2(theta) sum_j (j - (d-1)/2) [q_j(0) - p_bar_j + (q_j'(0) + q_j''(0)/2) sigma^2]`.
pub fn avg_heat_taylor(p_bar: &Population, params: &ModelParams, sigma: f64) -> Result<f64> {
    let coeffs = checked_coefficients(p_bar, params)?;
    let s2 = sigma * sigma;
    let sum: f64 = coeffs
        .iter()
        .zip(p_bar.iter())
        .map(|(t, p)| params.level_offset(t.level) * (t.value - p + (t.first + 0.5 * t.second) * s2))
        .sum();
    Ok(params.g0() * params.sin2() * sum)
}

/// Leading-order ensemble-averaged system energy change,
/// `g0 sin^2(theta) sum_j (j - (d-1)/2) [q_j(0) - p_bar_j + q_j''(0) sigma^2 / 2]`.
pub fn avg_delta_u_taylor(p_bar: &Population, params: &ModelParams, sigma: f64) -> Result<f64> {
    let coeffs = checked_coefficients(p_bar, params)?;
    let s2 = sigma * sigma;
    let sum: f64 = coeffs
        .iter()
        .zip(p_bar.iter())
        .map(|(t, p)| params.level_offset(t.level) * (t.value - p + 0.5 * t.second * s2))
        .sum();
    Ok(params.g0() * params.sin2() * sum)
}

fn checked_coefficients(p_bar: &Population, params: &ModelParams) -> Result<Vec<TaylorCoefficients>> {
    if p_bar.dim() != params.d() {
        return Err(Error::DimensionMismatch {
            expected: params.d(),
            actual: p_bar.dim(),
        });
    }
    all_taylor_coefficients(params)
}

/// Accumulated work and residual distance after `n` collisions when the
/// mixing angle scales as `sin^2(theta) = c n^(-xi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccumulatedWork {
    pub n: u64,
    pub sin2: f64,
    /// `n g0 sigma^2 sin^2(theta) |sum_j j q_j'(0)|`.
    pub work: f64,
    /// `D(rho_n, tau_bar) / D(rho_0, tau_bar) = cos^{2n}(theta)`.
    pub distance_ratio: f64,
}

pub fn accumulated_work(params: &ModelParams, sigma: f64, n: u64, c: f64, xi: f64) -> Result<AccumulatedWork> {
    if n == 0 {
        return Err(Error::param("n", "needs at least one collision"));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::param("c", format!("must be finite and > 0, got {c}")));
    }
    if !xi.is_finite() {
        return Err(Error::param("xi", "must be finite"));
    }
    let sin2 = c * (n as f64).powf(-xi);
    if sin2 > 1.0 {
        return Err(Error::param("c", format!("sin^2(theta) = c n^-xi = {sin2} exceeds 1")));
    }
    let slope = level_weighted_slope(params)?;
    let work = n as f64 * params.g0() * sigma * sigma * sin2 * slope.abs();
    // (1 - s)^n via log1p keeps precision for s ~ 1/n
    let distance_ratio = if sin2 == 1.0 {
        0.0
    } else if n <= i32::MAX as u64 {
        ((n as f64) * (-sin2).ln_1p()).exp()
    } else {
        decay_factor(1.0 - sin2, n)
    };
    Ok(AccumulatedWork {
        n,
        sin2,
        work,
        distance_ratio,
    })
}
