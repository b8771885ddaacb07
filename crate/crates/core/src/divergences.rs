//! Rényi divergences to the reference thermal state, the generalized free
//! energies built on them, and checks of their monotonicity along
//! collision trajectories.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{collide, ensemble_avg_thermal, thermal_populations, trace_distance};
use crate::energetics::{taylor_coefficients, work_single};
use crate::error::{Error, Result};
use crate::joint::{joint_post_collision, relative_entropy_dense, CMatrix};
use crate::model::{ModelParams, Population, ReservoirModel};
use crate::quadrature;

/// `beta * dF` above this counts as a violation.
pub const VIOLATION_TOL: f64 = 1e-12;

/// Order of a Rényi divergence, including the two limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Alpha {
    Finite(f64),
    /// Kullback-Leibler limit.
    One,
    /// Max-divergence limit.
    Infinity,
}

impl Alpha {
    /// Maps `1.0` to [`Alpha::One`] and `+inf` to [`Alpha::Infinity`].
    pub fn new(a: f64) -> Result<Self> {
        if a.is_nan() || a == f64::NEG_INFINITY {
            return Err(Error::param("alpha", format!("unsupported order {a}")));
        }
        Ok(if a == 1.0 {
            Alpha::One
        } else if a == f64::INFINITY {
            Alpha::Infinity
        } else {
            Alpha::Finite(a)
        })
    }

    pub fn value(self) -> f64 {
        match self {
            Alpha::Finite(a) => a,
            Alpha::One => 1.0,
            Alpha::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::One => write!(f, "1"),
            Alpha::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "inf" | "infinity" | "+inf" | "∞" => Ok(Alpha::Infinity),
            _ => t
                .parse::<f64>()
                .map_err(|_| Error::param("alpha", format!("cannot parse `{s}`")))
                .and_then(Alpha::new),
        }
    }
}

impl From<Alpha> for String {
    fn from(a: Alpha) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Alpha {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Ordered set of divergence orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Alpha>", into = "Vec<Alpha>")]
pub struct AlphaGrid(Vec<Alpha>);

impl AlphaGrid {
    pub fn new(mut alphas: Vec<Alpha>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::param("alphas", "grid is empty"));
        }
        alphas.sort_by(|a, b| a.value().total_cmp(&b.value()));
        if alphas.windows(2).any(|w| w[0].value() == w[1].value()) {
            return Err(Error::param("alphas", "orders must be distinct"));
        }
        Ok(Self(alphas))
    }

    pub fn alphas(&self) -> &[Alpha] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for AlphaGrid {
    /// `{0.5, 1, 2, 3, inf}`.
    fn default() -> Self {
        Self(vec![Alpha::Finite(0.5), Alpha::One, Alpha::Finite(2.0), Alpha::Finite(3.0), Alpha::Infinity])
    }
}

impl TryFrom<Vec<Alpha>> for AlphaGrid {
    type Error = Error;

    fn try_from(v: Vec<Alpha>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AlphaGrid> for Vec<Alpha> {
    fn from(g: AlphaGrid) -> Self {
        g.0
    }
}

/// Rényi divergence `D_alpha(p || q)` in nats between commuting states.
///
/// For `alpha < 0` the divergence is `+inf` as soon as `p` has a zero
/// entry; `alpha = 0` is the limit from above.
pub fn renyi_divergence(p: &Population, q: &Population, alpha: Alpha) -> Result<f64> {
    p.check_dim(q)?;
    if let Some(j) = q.iter().position(|&x| x <= 0.0) {
        return Err(Error::Domain(format!("reference state has zero weight at level {j}")));
    }
    let pairs = || p.iter().zip(q.iter());
    Ok(match alpha {
        Alpha::One => pairs().filter(|(pj, _)| **pj > 0.0).map(|(pj, qj)| pj * (pj / qj).ln()).sum(),
        Alpha::Infinity => pairs().map(|(pj, qj)| pj / qj).fold(0.0, f64::max).ln(),
        Alpha::Finite(0.0) => {
            -pairs().filter(|(pj, _)| **pj > 0.0).map(|(_, qj)| qj).sum::<f64>().ln()
        }
        Alpha::Finite(a) => {
            if a < 0.0 && p.iter().any(|&x| x == 0.0) {
                return Ok(f64::INFINITY);
            }
            // log sum_j exp(a ln p_j + (1 - a) ln q_j), zero-p terms drop for a > 0
            let logs: Vec<f64> = pairs()
                .filter(|(pj, _)| **pj > 0.0)
                .map(|(pj, qj)| a * pj.ln() + (1.0 - a) * qj.ln())
                .collect();
            let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
            let d = a.signum() / (a - 1.0) * lse;
            // exact equality p = q can round to -1e-17
            d.max(0.0)
        }
    })
}

/// `Z_S = sum_j exp(-beta g0 (j - (d-1)/2))`.
pub fn partition_function(params: &ModelParams) -> f64 {
    (0..params.d())
        .map(|j| (-params.beta_g0() * params.level_offset(j)).exp())
        .sum()
}

/// Generalized free energy `(1/beta) [D_alpha(p || tau_S) - ln Z_S]`.
pub fn free_energy(p: &Population, params: &ModelParams, alpha: Alpha) -> Result<f64> {
    let tau = thermal_populations(params, 0.0)?;
    Ok((renyi_divergence(p, &tau, alpha)? - partition_function(params).ln()) / params.beta())
}

/// One `(step, alpha)` entry of a [`DivergenceReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceEntry {
    /// Index of the later state of the transition.
    pub step: usize,
    pub alpha: Alpha,
    /// `D_alpha(rho_step || tau_S)`.
    pub divergence: f64,
    /// `F_alpha(rho_step) - F_alpha(rho_{step-1})`.
    pub delta_f: f64,
    pub violation: bool,
}

/// Free-energy changes along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DivergenceReport {
    pub entries: Vec<DivergenceEntry>,
}

impl DivergenceReport {
    pub fn violations(&self) -> impl Iterator<Item = &DivergenceEntry> {
        self.entries.iter().filter(|e| e.violation)
    }

    pub fn violation_count(&self) -> usize {
        self.violations().count()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn for_alpha(&self, alpha: Alpha) -> impl Iterator<Item = &DivergenceEntry> {
        self.entries.iter().filter(move |e| e.alpha == alpha)
    }
}

/// Flags every transition that increases a generalized free energy by more
/// than [`VIOLATION_TOL`] (in units of `1/beta`).
pub fn second_laws_check(trajectory: &[Population], params: &ModelParams, grid: &AlphaGrid) -> Result<DivergenceReport> {
    let mut report = DivergenceReport::default();
    if trajectory.len() < 2 {
        return Ok(report);
    }
    let tau = thermal_populations(params, 0.0)?;
    for &alpha in grid.alphas() {
        let divs = trajectory
            .iter()
            .map(|p| renyi_divergence(p, &tau, alpha))
            .collect::<Result<Vec<_>>>()?;
        for (step, w) in divs.windows(2).enumerate() {
            let beta_df = divergence_change(w[0], w[1]);
            report.entries.push(DivergenceEntry {
                step: step + 1,
                alpha,
                divergence: w[1],
                delta_f: beta_df / params.beta(),
                violation: beta_df > VIOLATION_TOL,
            });
        }
    }
    report.entries.sort_by_key(|e| e.step);
    Ok(report)
}

fn divergence_change(before: f64, after: f64) -> f64 {
    if before.is_infinite() && after.is_infinite() {
        0.0
    } else {
        after - before
    }
}

/// `beta W` and `beta dF_alpha` of a single collision at one `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyWorkRow {
    pub delta: f64,
    pub beta_work: f64,
    /// One entry per grid order.
    pub beta_delta_f: Vec<f64>,
    /// `beta dF_alpha > beta W` beyond [`VIOLATION_TOL`].
    pub exceeds_work: Vec<bool>,
}

/// Compares the free-energy change of one collision with the injected work
/// across inhomogeneities (Hamiltonian kind).
pub fn delta_f_vs_work(p0: &Population, delta_grid: &[f64], params: &ModelParams, grid: &AlphaGrid) -> Result<Vec<FreeEnergyWorkRow>> {
    let tau = thermal_populations(params, 0.0)?;
    let before = grid
        .alphas()
        .iter()
        .map(|&a| renyi_divergence(p0, &tau, a))
        .collect::<Result<Vec<_>>>()?;
    delta_grid
        .iter()
        .map(|&delta| {
            let q = thermal_populations(params, delta)?;
            let (after, _) = collide(p0, &q, params.theta())?;
            let beta_work = params.beta() * work_single(p0, delta, params)?;
            let beta_delta_f = grid
                .alphas()
                .iter()
                .zip(&before)
                .map(|(&a, &b)| Ok(divergence_change(b, renyi_divergence(&after, &tau, a)?)))
                .collect::<Result<Vec<_>>>()?;
            let exceeds_work = beta_delta_f.iter().map(|df| df - beta_work > VIOLATION_TOL).collect();
            Ok(FreeEnergyWorkRow {
                delta,
                beta_work,
                beta_delta_f,
                exceeds_work,
            })
        })
        .collect()
}

/// Distance between the reference and ensemble-averaged thermal states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonBound {
    /// `D(tau_S, tau_bar)`.
    pub exact: f64,
    /// `E[D(tau_S, tau(delta))]`, which bounds `exact` by convexity.
    pub averaged: f64,
    /// `sqrt(2/pi) beta g0 a/(1+a)^2 sigma`; qubits only.
    pub estimate: Option<f64>,
}

pub fn epsilon_bound(params: &ModelParams, res: &ReservoirModel) -> Result<EpsilonBound> {
    let tau_s = thermal_populations(params, 0.0)?;
    let tau_bar = ensemble_avg_thermal(params, res)?;
    let exact = trace_distance(&tau_s, &tau_bar)?;
    let averaged = quadrature::average(res, &[0.0], |delta| {
        let q = thermal_populations(params, delta).expect("support lies above -1");
        trace_distance(&tau_s, &q).expect("same dimension")
    })?;
    let estimate = if params.d() == 2 {
        let slope = taylor_coefficients(params, 0)?.first;
        Some((2.0 / std::f64::consts::PI).sqrt() * slope * res.sigma())
    } else {
        None
    };
    Ok(EpsilonBound {
        exact,
        averaged,
        estimate,
    })
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Entropy production `D[rho' || rho'_S (x) tau(delta)]` of one collision,
/// where `rho'` is the joint post-collision state.
///
/// `rho'` is block diagonal: each pair `{|jk>, |kj>}` with `j < k` spans a
/// 2x2 coherence block, and `|jj>` is untouched.
pub fn entropy_production(p_sys: &Population, delta: f64, params: &ModelParams) -> Result<f64> {
    if delta.is_nan() || delta <= -1.0 {
        return Err(Error::Domain(format!("inhomogeneity must satisfy delta > -1, got {delta}")));
    }
    let q = thermal_populations(params, delta)?;
    p_sys.check_dim(&q)?;
    let (c2, s2) = (params.cos2(), params.sin2());
    let cs = params.theta().cos() * params.theta().sin();
    let (p_out, _) = collide(p_sys, &q, params.theta())?;
    let d = params.d();

    let mut neg_entropy = 0.0;
    let mut cross = 0.0;
    let mut add_diag = |j: usize, k: usize, w: f64| {
        if w > 0.0 {
            cross += w * (p_out[j] * q[k]).ln();
        }
    };
    for j in 0..d {
        let w = p_sys[j] * q[j];
        neg_entropy += xlogx(w);
        add_diag(j, j, w);
        for k in j + 1..d {
            let (x, y) = (p_sys[j] * q[k], p_sys[k] * q[j]);
            let a = c2 * x + s2 * y;
            let b = s2 * x + c2 * y;
            let off = cs * (y - x);
            let mean = 0.5 * (a + b);
            let radius = (0.25 * (a - b).powi(2) + off * off).sqrt();
            neg_entropy += xlogx(mean + radius) + xlogx((mean - radius).max(0.0));
            add_diag(j, k, a);
            add_diag(k, j, b);
        }
    }
    Ok(neg_entropy - cross)
}

/// Dense route for [`entropy_production`]: full eigendecomposition of the
/// `d^2 x d^2` joint state and of the reference product state.
pub fn entropy_production_dense(p_sys: &Population, delta: f64, params: &ModelParams) -> Result<f64> {
    let q = thermal_populations(params, delta)?;
    let joint = joint_post_collision(p_sys, &q, params.theta())?;
    let sys = joint.system_marginal();
    let q_mat = CMatrix::from_fn(q.dim(), q.dim(), |a, b| {
        if a == b {
            q[a].into()
        } else {
            0.0.into()
        }
    });
    let reference = sys.kronecker(&q_mat);
    Ok(relative_entropy_dense(joint.matrix(), &reference))
}
