//! Parameter and state types shared by every module.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total probability of a [`Population`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Half-width of the inhomogeneity support, in units of `sigma`.
pub const TRUNCATION_SIGMAS: f64 = 6.0;

/// Samples must stay strictly above `-1 + LOWER_GUARD`.
pub const LOWER_GUARD: f64 = 1e-6;

/// Physical constants of a run, with `hbar = k_B = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    d: usize,
    beta: f64,
    g0: f64,
    theta: f64,
}

impl ModelParams {
    /// Validates the constants. `theta` is folded into `[0, pi/2]`, which
    /// leaves `cos^2 theta` and `sin^2 theta` unchanged.
    pub fn new(d: usize, beta: f64, g0: f64, theta: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::param("d", format!("qudit dimension must be >= 2, got {d}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::param("beta", format!("must be finite and > 0, got {beta}")));
        }
        if !(g0.is_finite() && g0 > 0.0) {
            return Err(Error::param("g0", format!("must be finite and > 0, got {g0}")));
        }
        if !theta.is_finite() {
            return Err(Error::param("theta", "must be finite"));
        }
        Ok(Self {
            d,
            beta,
            g0,
            theta: fold_angle(theta),
        })
    }

    /// Qubit with `beta * g0 = 1` and the given mixing angle.
    pub fn qubit(theta: f64) -> Self {
        Self::new(2, 1.0, 1.0, theta).expect("unit qubit parameters are valid")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.d, self.beta, self.g0, theta)
    }

    pub fn with_dim(&self, d: usize) -> Result<Self> {
        Self::new(d, self.beta, self.g0, self.theta)
    }

    /// `beta * g0`, the only combination entering the thermal populations.
    pub fn beta_g0(&self) -> f64 {
        self.beta * self.g0
    }

    pub fn cos2(&self) -> f64 {
        let c = self.theta.cos();
        c * c
    }

    pub fn sin2(&self) -> f64 {
        let s = self.theta.sin();
        s * s
    }

    /// Boltzmann ratio `a(delta) = exp(-beta g0 (1 + delta))`.
    pub fn boltzmann_ratio(&self, delta: f64) -> f64 {
        (-self.beta_g0() * (1.0 + delta)).exp()
    }

    /// Energy offset of level `j`: the `s_z` eigenvalue `j - (d-1)/2`.
    pub fn level_offset(&self, j: usize) -> f64 {
        j as f64 - (self.d as f64 - 1.0) / 2.0
    }
}

fn fold_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if t > FRAC_PI_2 {
        PI - t
    } else {
        t
    }
}

/// Diagonal qudit state: occupation probabilities of the energy levels,
/// ground state first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Population(Vec<f64>);

impl Population {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::param("population", format!("needs at least 2 levels, got {}", p.len())));
        }
        if let Some((j, &x)) = p.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::param("population", format!("entry {j} is {x}, must be finite and >= 0")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::param("population", format!("entries sum to {total}, expected 1")));
        }
        Ok(Self(p))
    }

    /// Qubit state with ground-state occupation `p0`.
    pub fn qubit(p0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::param("p0", format!("must lie in [0, 1], got {p0}")));
        }
        Self::new(vec![p0, 1.0 - p0])
    }

    pub fn uniform(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::param("d", format!("qudit dimension must be >= 2, got {d}")));
        }
        Ok(Self(vec![1.0 / d as f64; d]))
    }

    /// Wraps values produced by a normalization-preserving map. Negative
    /// round-off is clipped.
    pub(crate) fn from_raw(mut p: Vec<f64>) -> Self {
        for x in &mut p {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        Self(p)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// Mean of `s_z` in units of hbar.
    pub fn mean_spin(&self) -> f64 {
        let offset = (self.dim() as f64 - 1.0) / 2.0;
        self.0.iter().enumerate().map(|(j, p)| (j as f64 - offset) * p).sum()
    }

    pub(crate) fn check_dim(&self, other: &Population) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for Population {
    type Output = f64;

    fn index(&self, j: usize) -> &f64 {
        &self.0[j]
    }
}

impl TryFrom<Vec<f64>> for Population {
    type Error = Error;

    fn try_from(p: Vec<f64>) -> Result<Self> {
        Self::new(p)
    }
}

impl From<Population> for Vec<f64> {
    fn from(p: Population) -> Self {
        p.0
    }
}

/// Which local parameter of each reservoir qudit is perturbed by `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InhomogeneityKind {
    /// `g_r = g0 (1 + delta_r)`, `beta_r = beta`.
    Hamiltonian,
    /// `beta_r = beta (1 + delta_r)`, `g_r = g0`.
    Temperature,
}

impl std::str::FromStr for InhomogeneityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hamiltonian" | "h" => Ok(Self::Hamiltonian),
            "temperature" | "t" => Ok(Self::Temperature),
            other => Err(Error::param("kind", format!("unknown inhomogeneity kind `{other}`"))),
        }
    }
}

/// i.i.d. inhomogeneities drawn from a zero-mean Gaussian of width `sigma`,
/// truncated to `|delta| <= 6 sigma` and `delta > -1 + 1e-6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirModel {
    kind: InhomogeneityKind,
    sigma: f64,
}

impl ReservoirModel {
    pub fn new(kind: InhomogeneityKind, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::param("sigma", format!("must be finite and >= 0, got {sigma}")));
        }
        Ok(Self { kind, sigma })
    }

    pub fn hamiltonian(sigma: f64) -> Result<Self> {
        Self::new(InhomogeneityKind::Hamiltonian, sigma)
    }

    pub fn temperature(sigma: f64) -> Result<Self> {
        Self::new(InhomogeneityKind::Temperature, sigma)
    }

    pub fn kind(&self) -> InhomogeneityKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Closed support `[lo, hi]` of the truncated distribution.
    pub fn support(&self) -> (f64, f64) {
        let half = TRUNCATION_SIGMAS * self.sigma;
        ((-half).max(-1.0 + LOWER_GUARD), half)
    }

    /// Probability mass of the untruncated Gaussian inside the support.
    pub fn retained_mass(&self) -> f64 {
        if self.sigma == 0.0 {
            return 1.0;
        }
        let (lo, hi) = self.support();
        std_normal_cdf(hi / self.sigma) - std_normal_cdf(lo / self.sigma)
    }

    /// Density of the truncated distribution. Zero outside the support;
    /// undefined (returns 0) for `sigma = 0`, which is a point mass.
    pub fn pdf(&self, delta: f64) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        let (lo, hi) = self.support();
        if delta < lo || delta > hi {
            return 0.0;
        }
        let z = delta / self.sigma;
        (-0.5 * z * z).exp() / (self.sigma * (2.0 * PI).sqrt() * self.retained_mass())
    }

    /// Cumulative distribution of the truncated distribution.
    pub fn cdf(&self, delta: f64) -> f64 {
        if self.sigma == 0.0 {
            return if delta >= 0.0 { 1.0 } else { 0.0 };
        }
        let (lo, hi) = self.support();
        if delta <= lo {
            return 0.0;
        }
        if delta >= hi {
            return 1.0;
        }
        (std_normal_cdf(delta / self.sigma) - std_normal_cdf(lo / self.sigma)) / self.retained_mass()
    }
}

pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}
