//! Distributions of single-collision work and heat induced by the
//! inhomogeneity distribution, for qubits.
//!
//! Each observable is a scalar map `y(delta)` in units of
//! `hbar g0 sin^2(theta)`. Its density follows from the change of variables
//! `G_Y(y) = sum_roots G(delta_s) / |y'(delta_s)|`, either with the exact map
//! inverted numerically on its monotone pieces or with the second-order
//! polynomial model solved in closed form.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dynamics::qubit_ground;
use crate::energetics::taylor_coefficients;
use crate::error::{Error, Result};
use crate::model::{InhomogeneityKind, ModelParams, Population, ReservoirModel};
use crate::parallel::{chunk_ranges, map_indexed, stream, Execution};

/// Number of grid points of a [`DensityCurve`].
pub const GRID_POINTS: usize = 2001;

/// Samples drawn per random stream in [`empirical_distribution`].
pub const SAMPLE_CHUNK: usize = 4096;

const SCAN_INTERVALS: usize = 4096;

/// Draws one inhomogeneity from the truncated Gaussian by rejection.
pub fn sample_delta<R: Rng + ?Sized>(res: &ReservoirModel, rng: &mut R) -> f64 {
    if res.sigma() == 0.0 {
        return 0.0;
    }
    let (lo, hi) = res.support();
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let delta = z * res.sigma();
        if delta >= lo && delta <= hi {
            return delta;
        }
    }
}

/// Which single-collision quantity a distribution describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Work, Hamiltonian inhomogeneity.
    Work,
    /// Heat under the given inhomogeneity kind.
    Heat(InhomogeneityKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMode {
    QuadraticApprox,
    ExactNumeric,
}

/// A smooth scalar map `delta -> y`.
trait Response {
    fn value(&self, delta: f64) -> f64;
    fn slope(&self, delta: f64) -> f64;
}

/// Exact `y(delta)` for a qubit with ground population `p0`.
#[derive(Debug, Clone, Copy)]
struct ExactResponse {
    observable: Observable,
    p0: f64,
    params: ModelParams,
}

impl ExactResponse {
    fn ground(&self, delta: f64) -> (f64, f64) {
        let a = self.params.boltzmann_ratio(delta);
        let q = 1.0 / (1.0 + a);
        (q, self.params.beta_g0() * a * q * q)
    }
}

impl Response for ExactResponse {
    fn value(&self, delta: f64) -> f64 {
        let q = qubit_ground(&self.params, delta);
        match self.observable {
            Observable::Work => delta * (q - self.p0),
            Observable::Heat(InhomogeneityKind::Hamiltonian) => (1.0 + delta) * (self.p0 - q),
            Observable::Heat(InhomogeneityKind::Temperature) => self.p0 - q,
        }
    }

    fn slope(&self, delta: f64) -> f64 {
        let (q, dq) = self.ground(delta);
        match self.observable {
            Observable::Work => q - self.p0 + delta * dq,
            Observable::Heat(InhomogeneityKind::Hamiltonian) => self.p0 - q - (1.0 + delta) * dq,
            Observable::Heat(InhomogeneityKind::Temperature) => -dq,
        }
    }
}

/// Polynomial model `a delta^2 + b delta + c(y) = 0` with `dc/dy = sign`.
/// As a forward map, `y = -sign (a delta^2 + b delta + c0)`.
#[derive(Debug, Clone, Copy)]
struct QuadraticResponse {
    a: f64,
    b: f64,
    c0: f64,
    sign: f64,
}

impl QuadraticResponse {
    fn new(observable: Observable, p0: f64, params: &ModelParams) -> Result<Self> {
        let t = taylor_coefficients(params, 0)?;
        let (q0, q1, q2) = (t.value, t.first, t.second);
        Ok(match observable {
            // q0' d^2 + (q0 - p0) d - y = 0
            Observable::Work => Self { a: q1, b: q0 - p0, c0: 0.0, sign: -1.0 },
            // q0' d^2 + (q0' + q0 - p0) d + (y - p0 + q0) = 0
            Observable::Heat(InhomogeneityKind::Hamiltonian) => Self { a: q1, b: q1 + q0 - p0, c0: q0 - p0, sign: 1.0 },
            // q0''/2 d^2 + q0' d + (q0 - p0 + y) = 0
            Observable::Heat(InhomogeneityKind::Temperature) => Self { a: 0.5 * q2, b: q1, c0: q0 - p0, sign: 1.0 },
        })
    }

    /// Constant term for a given `y`.
    fn c(&self, y: f64) -> f64 {
        self.c0 + self.sign * y
    }

    fn discriminant(&self, y: f64) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c(y)
    }

    /// Density `sum_s G(delta_s) / sqrt(D)` over the real roots of the quadratic.
    fn density(&self, y: f64, res: &ReservoirModel) -> f64 {
        if self.a.abs() < 1e-300 {
            if self.b == 0.0 {
                return 0.0;
            }
            return res.pdf(-self.c(y) / self.b) / self.b.abs();
        }
        let disc = self.discriminant(y);
        if disc < 0.0 {
            return 0.0;
        }
        let root = disc.sqrt();
        let g = res.pdf((-self.b + root) / (2.0 * self.a)) + res.pdf((-self.b - root) / (2.0 * self.a));
        if g == 0.0 {
            0.0
        } else if root == 0.0 {
            f64::INFINITY
        } else {
            g / root
        }
    }
}

impl Response for QuadraticResponse {
    fn value(&self, delta: f64) -> f64 {
        -self.sign * (self.a * delta * delta + self.b * delta + self.c0)
    }

    fn slope(&self, delta: f64) -> f64 {
        -self.sign * (2.0 * self.a * delta + self.b)
    }
}

/// Monotone decomposition of a response over the truncated support.
#[derive(Debug, Clone)]
struct Pieces {
    /// Breakpoints `lo, crit..., hi`.
    edges: Vec<f64>,
    values: Vec<f64>,
}

impl Pieces {
    fn new(resp: &impl Response, lo: f64, hi: f64) -> Self {
        let mut edges = vec![lo];
        let step = (hi - lo) / SCAN_INTERVALS as f64;
        let mut prev_x = lo;
        let mut prev_s = resp.slope(lo);
        for i in 1..=SCAN_INTERVALS {
            let x = if i == SCAN_INTERVALS { hi } else { lo + step * i as f64 };
            let s = resp.slope(x);
            if prev_s != 0.0 && s != 0.0 && (prev_s > 0.0) != (s > 0.0) {
                edges.push(bisect(|t| resp.slope(t), prev_x, x));
            } else if s == 0.0 && i < SCAN_INTERVALS {
                edges.push(x);
            }
            prev_x = x;
            if s != 0.0 {
                prev_s = s;
            }
        }
        edges.push(hi);
        edges.dedup();
        let values = edges.iter().map(|&x| resp.value(x)).collect();
        Self { edges, values }
    }

    /// All `delta` with `y(delta) = y`, one per piece whose image contains `y`.
    fn roots(&self, resp: &impl Response, y: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(2);
        let n = self.edges.len() - 1;
        for i in 0..n {
            let (a, b) = (self.edges[i], self.edges[i + 1]);
            let (ya, yb) = (self.values[i], self.values[i + 1]);
            let (lo, hi) = if ya <= yb { (ya, yb) } else { (yb, ya) };
            if y < lo || y > hi {
                continue;
            }
            // a value shared by two adjacent pieces belongs to the left one
            if i > 0 && y == ya && out.last().is_some_and(|&r: &f64| r == a) {
                continue;
            }
            let root = bisect(|t| resp.value(t) - y, a, b);
            out.push(root);
        }
        out
    }

    fn image(&self) -> (f64, f64) {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Whether the image bound `target` is attained at an interior critical
    /// point, where the density has an inverse-square-root singularity.
    fn is_singular_bound(&self, target: f64) -> bool {
        let n = self.edges.len();
        (1..n - 1).any(|i| self.values[i] == target)
    }
}

/// Root of `f` in `[a, b]` by bisection to machine precision. Returns the
/// endpoint with the smaller residual when `f` does not change sign.
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    if (fa > 0.0) == (fb > 0.0) {
        return if fa.abs() <= fb.abs() { a } else { b };
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Slopes below this magnitude mark a root as an integrable singularity.
pub const SINGULAR_SLOPE: f64 = 1e-14;

/// Change-of-variables density of `y` for the exact response.
fn exact_density(resp: &ExactResponse, pieces: &Pieces, res: &ReservoirModel, y: f64) -> f64 {
    let mut total = 0.0;
    for delta in pieces.roots(resp, y) {
        let g = res.pdf(delta);
        if g == 0.0 {
            continue;
        }
        let slope = resp.slope(delta).abs();
        if slope < SINGULAR_SLOPE {
            return f64::INFINITY;
        }
        total += g / slope;
    }
    total
}

/// A qubit observable with a fixed input state and inhomogeneity law.
#[derive(Debug, Clone, Copy)]
pub struct ObservableModel {
    pub observable: Observable,
    pub p0: f64,
    pub params: ModelParams,
    pub reservoir: ReservoirModel,
}

impl ObservableModel {
    pub fn new(observable: Observable, p0: f64, params: &ModelParams, sigma: f64) -> Result<Self> {
        if params.d() != 2 {
            return Err(Error::Unsupported(format!(
                "work and heat densities are derived for qubits only, got d = {}",
                params.d()
            )));
        }
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::param("p0", format!("must lie in [0, 1], got {p0}")));
        }
        let kind = match observable {
            Observable::Work => InhomogeneityKind::Hamiltonian,
            Observable::Heat(kind) => kind,
        };
        Ok(Self {
            observable,
            p0,
            params: *params,
            reservoir: ReservoirModel::new(kind, sigma)?,
        })
    }

    fn exact(&self) -> ExactResponse {
        ExactResponse {
            observable: self.observable,
            p0: self.p0,
            params: self.params,
        }
    }

    /// `y(delta)` in units of `hbar g0 sin^2(theta)`.
    pub fn response(&self, delta: f64) -> f64 {
        self.exact().value(delta)
    }

    /// Density of `y` at a single point.
    pub fn density(&self, y: f64, mode: DensityMode) -> Result<f64> {
        self.require_spread()?;
        let (lo, hi) = self.reservoir.support();
        Ok(match mode {
            DensityMode::ExactNumeric => {
                let resp = self.exact();
                exact_density(&resp, &Pieces::new(&resp, lo, hi), &self.reservoir, y)
            }
            DensityMode::QuadraticApprox => {
                QuadraticResponse::new(self.observable, self.p0, &self.params)?.density(y, &self.reservoir)
            }
        })
    }

    fn require_spread(&self) -> Result<()> {
        if self.reservoir.sigma() == 0.0 {
            return Err(Error::Domain("a point-mass inhomogeneity has no density".into()));
        }
        Ok(())
    }

    /// Density tabulated on [`GRID_POINTS`] cell centres spanning the image
    /// of the response over the truncated support.
    pub fn curve(&self, mode: DensityMode) -> Result<DensityCurve> {
        self.require_spread()?;
        let (lo, hi) = self.reservoir.support();
        match mode {
            DensityMode::ExactNumeric => {
                let resp = self.exact();
                let pieces = Pieces::new(&resp, lo, hi);
                Ok(DensityCurve::tabulate(mode, &pieces, |y| {
                    exact_density(&resp, &pieces, &self.reservoir, y)
                }))
            }
            DensityMode::QuadraticApprox => {
                let quad = QuadraticResponse::new(self.observable, self.p0, &self.params)?;
                let pieces = Pieces::new(&quad, lo, hi);
                Ok(DensityCurve::tabulate(mode, &pieces, |y| quad.density(y, &self.reservoir)))
            }
        }
    }

    /// `y` range of the exact response and whether each end is singular.
    pub fn image(&self) -> (f64, f64) {
        let (lo, hi) = self.reservoir.support();
        Pieces::new(&self.exact(), lo, hi).image()
    }

    /// Interior critical points of the exact response inside the support.
    pub fn critical_points(&self) -> Vec<f64> {
        let (lo, hi) = self.reservoir.support();
        let p = Pieces::new(&self.exact(), lo, hi);
        p.edges[1..p.edges.len() - 1].to_vec()
    }

    /// Real roots `delta` of `y(delta) = y` inside the support.
    pub fn roots(&self, y: f64) -> Vec<f64> {
        let (lo, hi) = self.reservoir.support();
        let resp = self.exact();
        Pieces::new(&resp, lo, hi).roots(&resp, y)
    }
}

/// `1/2 - zeta(1/2, 1/2)` style constant: midpoint-rule deficit of
/// `integral_0^{Nh} y^{-1/2} dy` after the first cell is integrated exactly,
/// in units of `sqrt(h)`. Equals `-zeta(1/2, 1/2) - (2 - sqrt 2)`.
const SQRT_SINGULARITY_RESIDUAL: f64 = 0.604_898_643_421_630_4 - (2.0 - std::f64::consts::SQRT_2);

/// Cells next to a singular bound whose CDF is interpolated in `sqrt(y)`.
const SQRT_INTERP_CELLS: usize = 16;

/// A density tabulated at cell centres of a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub mode: DensityMode,
    /// Cell centres.
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// Outer edges of the grid.
    pub lower: f64,
    pub upper: f64,
    /// Whether the density diverges as an inverse square root at an end.
    pub singular_lower: bool,
    pub singular_upper: bool,
}

impl DensityCurve {
    fn tabulate(mode: DensityMode, pieces: &Pieces, f: impl Fn(f64) -> f64) -> Self {
        let (lower, upper) = pieces.image();
        let h = (upper - lower) / GRID_POINTS as f64;
        let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lower + (i as f64 + 0.5) * h).collect();
        let density = grid.iter().map(|&y| f(y)).collect();
        Self {
            mode,
            grid,
            density,
            lower,
            upper,
            singular_lower: pieces.is_singular_bound(lower),
            singular_upper: pieces.is_singular_bound(upper),
        }
    }

    pub fn cell_width(&self) -> f64 {
        (self.upper - self.lower) / self.grid.len() as f64
    }

    /// Probability mass per cell: midpoint rule, with the cells next to a
    /// singular bound integrated for an `A / sqrt(|y - y*|)` profile.
    pub fn cell_masses(&self) -> Vec<f64> {
        let h = self.cell_width();
        let n = self.density.len();
        let mut m: Vec<f64> = self.density.iter().map(|g| g * h).collect();
        let mut patch = |first: usize, second: usize| {
            let amp = self.density[first] * (0.5 * h).sqrt();
            m[first] = 2.0 * amp * h.sqrt();
            m[second] += SQRT_SINGULARITY_RESIDUAL * amp * h.sqrt();
        };
        if self.singular_lower && n > 1 {
            patch(0, 1);
        }
        if self.singular_upper && n > 1 {
            patch(n - 1, n - 2);
        }
        m
    }

    /// Integral of the density over the grid.
    pub fn normalization(&self) -> f64 {
        self.cell_masses().iter().sum()
    }

    /// Cumulative mass at the `n + 1` cell edges, starting at zero.
    pub fn cdf_edges(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.grid.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for m in self.cell_masses() {
            acc += m;
            out.push(acc);
        }
        out
    }

    /// CDF normalized by [`normalization`](Self::normalization), linearly
    /// interpolated except next to singular bounds.
    pub fn cdf_fn(&self) -> impl Fn(f64) -> f64 + '_ {
        let edges = self.cdf_edges();
        let total = *edges.last().unwrap();
        let h = self.cell_width();
        let n = self.grid.len();
        move |y: f64| {
            if y <= self.lower {
                return 0.0;
            }
            if y >= self.upper {
                return 1.0;
            }
            let t = (y - self.lower) / h;
            let i = (t.floor() as usize).min(n - 1);
            let frac = t - i as f64;
            let w = if self.singular_lower && i < SQRT_INTERP_CELLS {
                let (a, b) = ((i as f64).sqrt(), (i as f64 + 1.0).sqrt());
                ((t).sqrt() - a) / (b - a)
            } else if self.singular_upper && n - 1 - i < SQRT_INTERP_CELLS {
                let k = (n - i) as f64;
                let (a, b) = (k.sqrt(), (k - 1.0).sqrt());
                (a - (n as f64 - t).sqrt()) / (a - b)
            } else {
                frac
            };
            (edges[i] + w * (edges[i + 1] - edges[i])) / total
        }
    }

    /// Smallest `y` with `CDF(y) >= prob`.
    pub fn quantile(&self, prob: f64) -> f64 {
        let cdf = self.cdf_fn();
        let (mut a, mut b) = (self.lower, self.upper);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if cdf(m) >= prob {
                b = m;
            } else {
                a = m;
            }
        }
        b
    }

    pub fn interquartile_range(&self) -> f64 {
        self.quantile(0.75) - self.quantile(0.25)
    }

    pub fn argmax(&self) -> usize {
        self.density
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &g)| if g > best.1 { (i, g) } else { best })
            .0
    }

    /// Grid location of the density maximum.
    pub fn peak(&self) -> f64 {
        self.grid[self.argmax()]
    }
}

/// Density of single-collision work at `y` (Hamiltonian kind, qubit).
pub fn work_density(y: f64, p0: f64, params: &ModelParams, sigma: f64, mode: DensityMode) -> Result<f64> {
    ObservableModel::new(Observable::Work, p0, params, sigma)?.density(y, mode)
}

/// Density of single-collision heat at `y` (qubit).
pub fn heat_density(
    y: f64,
    p0: f64,
    params: &ModelParams,
    sigma: f64,
    kind: InhomogeneityKind,
    mode: DensityMode,
) -> Result<f64> {
    ObservableModel::new(Observable::Heat(kind), p0, params, sigma)?.density(y, mode)
}

/// Reproducible Monte Carlo sample of an observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub seed: u64,
    pub n: usize,
}

impl SampleSet {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (self.n - 1) as f64
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// `n` i.i.d. evaluations of the observable at sampled inhomogeneities, in
/// units of `hbar g0 sin^2(theta)`. Sample `i` comes from stream
/// `i / SAMPLE_CHUNK`, so growing `n` keeps earlier samples.
pub fn empirical_distribution(model: &ObservableModel, n: usize, seed: u64, exec: Execution) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::param("n", "needs at least one sample"));
    }
    let p_sys = Population::qubit(model.p0)?;
    let params = model.params;
    let kind = model.reservoir.kind();
    let scale = params.g0() * params.sin2();
    if scale == 0.0 {
        return Err(Error::Domain("theta = 0: reduced units hbar g0 sin^2(theta) are undefined".into()));
    }
    let chunks = chunk_ranges(n, SAMPLE_CHUNK);
    let observable = model.observable;
    let reservoir = model.reservoir;
    let parts = map_indexed(chunks.len(), exec, |c| -> Result<Vec<f64>> {
        let mut rng = stream(seed, c as u64);
        let (_, len) = chunks[c];
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let delta = sample_delta(&reservoir, &mut rng);
            let record = crate::energetics::CollisionRecord::evaluate(&p_sys, delta, &params, kind)?;
            let v = match observable {
                Observable::Work => record.work,
                Observable::Heat(_) => record.heat,
            };
            out.push(v / scale);
        }
        Ok(out)
    });
    let mut values = Vec::with_capacity(n);
    for part in parts {
        values.extend(part?);
    }
    Ok(SampleSet { values, seed, n })
}

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `sorted` (ascending) and a continuous CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}
