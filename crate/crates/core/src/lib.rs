//! Collisional model of a qudit thermalizing against an inhomogeneous
//! reservoir.
//!
//! The system meets one reservoir qudit per step through a partial swap.
//! Each reservoir qudit carries an i.i.d. inhomogeneity `delta`, either in
//! its level splitting or in its inverse temperature. The crate covers the
//! reduced dynamics, per-collision work and heat together with their
//! inhomogeneity-induced distributions, and the generalized free energies
//! that decide which state transformations a thermal operation allows.
//!
//! Units: `hbar = k_B = 1`. Energies carry the factor `g0` of
//! [`ModelParams`].

pub mod divergences;
pub mod dynamics;
pub mod energetics;
pub mod ensemble;
pub mod error;
pub mod joint;
pub mod model;
pub mod parallel;
pub mod quadrature;
pub mod statistics;

pub use divergences::{
    delta_f_vs_work, entropy_production, entropy_production_dense, epsilon_bound, free_energy, partition_function,
    renyi_divergence, second_laws_check, Alpha, AlphaGrid, DivergenceEntry, DivergenceReport, EpsilonBound,
    FreeEnergyWorkRow,
};
pub use dynamics::{analytic_state, collide, ensemble_avg_thermal, thermal_populations, trace_distance};
pub use energetics::{
    accumulated_work, avg_delta_u_taylor, avg_heat_taylor, avg_work_taylor, delta_u, heat_single, taylor_coefficients,
    work_single, AccumulatedWork, CollisionRecord, TaylorCoefficients,
};
pub use ensemble::{frozen_trajectory, run_ensemble, EnsembleSummary, Estimate};
pub use error::{Error, Result};
pub use joint::{joint_post_collision, JointState};
pub use model::{InhomogeneityKind, ModelParams, Population, ReservoirModel};
pub use parallel::Execution;
pub use statistics::{
    empirical_distribution, heat_density, ks_statistic, sample_delta, work_density, DensityCurve, DensityMode,
    Observable, ObservableModel, SampleSet,
};
