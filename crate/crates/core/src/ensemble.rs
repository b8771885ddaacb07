//! Monte Carlo trajectories of the collisional model.
//!
//! A trajectory draws one inhomogeneity per collision from its own random
//! stream (`seed`, trajectory index). Followed on its own it is a frozen
//! configuration; averaging many of them estimates the ensemble-averaged
//! dynamics.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{collide_weights, thermal_populations};
use crate::energetics::CollisionRecord;
use crate::error::{Error, Result};
use crate::model::{ModelParams, Population, ReservoirModel};
use crate::parallel::{chunk_ranges, map_indexed, stream, Execution};
use crate::statistics::sample_delta;

/// Trajectories per parallel work item.
pub const TRAJECTORY_CHUNK: usize = 64;

/// State after a collision together with that collision's energetics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub state: Population,
    pub record: CollisionRecord,
}

/// Evolves `p0` through `steps` collisions drawing inhomogeneities from
/// `rng`. The returned vector has one entry per collision.
pub fn simulate<R: Rng + ?Sized>(
    p0: &Population,
    params: &ModelParams,
    res: &ReservoirModel,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<TrajectoryStep>> {
    check_state(p0, params)?;
    let (c2, s2) = (params.cos2(), params.sin2());
    let mut state = p0.clone();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let delta = sample_delta(res, rng);
        let q = thermal_populations(params, delta)?;
        let record = CollisionRecord::evaluate(&state, delta, params, res.kind())?;
        state = collide_weights(&state, &q, c2, s2).0;
        out.push(TrajectoryStep {
            state: state.clone(),
            record,
        });
    }
    Ok(out)
}

/// States `rho_0, ..., rho_steps` of trajectory `index` under `seed`.
pub fn frozen_trajectory(
    p0: &Population,
    params: &ModelParams,
    res: &ReservoirModel,
    steps: usize,
    seed: u64,
    index: u64,
) -> Result<Vec<Population>> {
    let mut rng = stream(seed, index);
    let mut states = vec![p0.clone()];
    states.extend(simulate(p0, params, res, steps, &mut rng)?.into_iter().map(|s| s.state));
    Ok(states)
}

fn check_state(p0: &Population, params: &ModelParams) -> Result<()> {
    if p0.dim() != params.d() {
        return Err(Error::DimensionMismatch {
            expected: params.d(),
            actual: p0.dim(),
        });
    }
    Ok(())
}

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|mean - target| <= k * std_error`, with exact agreement (to
    /// `1e-12`) required when the standard error vanishes.
    pub fn within(&self, target: f64, k: f64) -> bool {
        let gap = (self.mean - target).abs();
        if self.std_error == 0.0 {
            gap <= 1e-12
        } else {
            gap <= k * self.std_error
        }
    }
}

/// Per-step ensemble statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStep {
    /// Population estimates after `step` collisions.
    pub population: Vec<Estimate>,
    /// Work, heat and energy change of collision `step`; absent for step 0.
    pub work: Option<Estimate>,
    pub heat: Option<Estimate>,
    pub d_u: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub trajectories: usize,
    pub seed: u64,
    /// Entry `r` describes the state after `r` collisions.
    pub steps: Vec<EnsembleStep>,
}

/// Welford moments of one observable at every step; chunks merge with
/// Chan's pairwise update.
#[derive(Debug, Clone)]
struct Moments {
    count: Vec<f64>,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            count: vec![0.0; len],
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, i: usize, x: f64) {
        self.count[i] += 1.0;
        let dx = x - self.mean[i];
        self.mean[i] += dx / self.count[i];
        self.m2[i] += dx * (x - self.mean[i]);
    }

    fn merge(&mut self, other: &Moments) {
        for i in 0..self.count.len() {
            let (na, nb) = (self.count[i], other.count[i]);
            if nb == 0.0 {
                continue;
            }
            let n = na + nb;
            let dx = other.mean[i] - self.mean[i];
            self.mean[i] += dx * nb / n;
            self.m2[i] += other.m2[i] + dx * dx * na * nb / n;
            self.count[i] = n;
        }
    }

    fn estimate(&self, i: usize) -> Estimate {
        let n = self.count[i];
        let var = if n > 1.0 { self.m2[i] / (n - 1.0) } else { 0.0 };
        Estimate {
            mean: self.mean[i],
            std_error: (var / n).sqrt(),
        }
    }
}

/// Layout: channel `j < d` is population `j` at steps `0..=steps`; then
/// work, heat and dU at collisions `1..=steps` (index `r - 1`).
#[derive(Debug, Clone)]
struct Accumulator {
    populations: Vec<Moments>,
    work: Moments,
    heat: Moments,
    d_u: Moments,
}

impl Accumulator {
    fn new(d: usize, steps: usize) -> Self {
        Self {
            populations: (0..d).map(|_| Moments::new(steps + 1)).collect(),
            work: Moments::new(steps),
            heat: Moments::new(steps),
            d_u: Moments::new(steps),
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        for (a, b) in self.populations.iter_mut().zip(&other.populations) {
            a.merge(b);
        }
        self.work.merge(&other.work);
        self.heat.merge(&other.heat);
        self.d_u.merge(&other.d_u);
    }
}

/// Runs `trajectories` independent trajectories of `steps` collisions.
/// Trajectory `i` uses stream `i` of `seed`; results are identical for
/// both execution modes.
pub fn run_ensemble(
    p0: &Population,
    params: &ModelParams,
    res: &ReservoirModel,
    steps: usize,
    trajectories: usize,
    seed: u64,
    exec: Execution,
) -> Result<EnsembleSummary> {
    check_state(p0, params)?;
    if trajectories == 0 {
        return Err(Error::param("trajectories", "needs at least one trajectory"));
    }
    let d = params.d();
    let chunks = chunk_ranges(trajectories, TRAJECTORY_CHUNK);
    let parts = map_indexed(chunks.len(), exec, |c| -> Result<Accumulator> {
        let (start, len) = chunks[c];
        let mut acc = Accumulator::new(d, steps);
        for t in start..start + len {
            let mut rng = stream(seed, t as u64);
            for (j, m) in acc.populations.iter_mut().enumerate() {
                m.push(0, p0[j]);
            }
            for (r, step) in simulate(p0, params, res, steps, &mut rng)?.iter().enumerate() {
                for (j, m) in acc.populations.iter_mut().enumerate() {
                    m.push(r + 1, step.state[j]);
                }
                acc.work.push(r, step.record.work);
                acc.heat.push(r, step.record.heat);
                acc.d_u.push(r, step.record.d_u);
            }
        }
        Ok(acc)
    });

    let mut total = Accumulator::new(d, steps);
    for part in parts {
        total.merge(&part?);
    }
    let steps_out = (0..=steps)
        .map(|r| EnsembleStep {
            population: total.populations.iter().map(|m| m.estimate(r)).collect(),
            work: (r > 0).then(|| total.work.estimate(r - 1)),
            heat: (r > 0).then(|| total.heat.estimate(r - 1)),
            d_u: (r > 0).then(|| total.d_u.estimate(r - 1)),
        })
        .collect();
    Ok(EnsembleSummary {
        trajectories,
        seed,
        steps: steps_out,
    })
}
