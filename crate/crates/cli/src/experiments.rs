//! The experiments. Each returns plot-ready tables.

use almost_thermal::parallel::map_indexed;
use almost_thermal::{
    accumulated_work, analytic_state, avg_delta_u_taylor, avg_heat_taylor, avg_work_taylor, delta_f_vs_work,
    empirical_distribution, ensemble_avg_thermal, frozen_trajectory, ks_statistic, renyi_divergence, run_ensemble,
    thermal_populations, DensityMode, Execution, InhomogeneityKind, Observable, ObservableModel,
    Population,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;
use crate::table::{flag, Table};

const UNIT_STEP: &str = "collisions";
const UNIT_ENERGY: &str = "hbar g0";
const UNIT_REDUCED: &str = "hbar g0 sin^2(theta)";
const UNIT_DENSITY: &str = "1/(hbar g0 sin^2(theta))";

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Table>, CliError> {
    match cfg.experiment {
        Experiment::Dynamics => run_dynamics(cfg),
        Experiment::WorkDist => run_work_dist(cfg),
        Experiment::HeatDist => run_heat_dist(cfg),
        Experiment::SecondLaws => run_second_laws(cfg),
        Experiment::LongTerm => run_long_term(cfg),
        Experiment::Scaling => run_scaling(cfg),
    }
}

fn execution(cfg: &ExperimentConfig) -> Execution {
    if cfg.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Per step: analytic ensemble state, Monte Carlo mean and standard error,
/// trajectory 0 as a frozen configuration, and trace distances. A second
/// table holds the per-collision energetics.
pub fn run_dynamics(cfg: &ExperimentConfig) -> Result<Vec<Table>, CliError> {
    let params = cfg.params()?;
    let res = cfg.reservoir()?;
    let p0 = cfg.input_state()?;
    let d = params.d();
    let tau_s = thermal_populations(&params, 0.0)?;
    let tau_bar = ensemble_avg_thermal(&params, &res)?;
    let mc = run_ensemble(&p0, &params, &res, cfg.steps, cfg.samples, cfg.seed, execution(cfg))?;
    let frozen = frozen_trajectory(&p0, &params, &res, cfg.steps, cfg.seed, 0)?;

    let mut table = Table::new("dynamics").column("step", UNIT_STEP);
    for j in 0..d {
        table = table
            .column(format!("analytic_p{j}"), "1")
            .column(format!("mc_mean_p{j}"), "1")
            .column(format!("mc_se_p{j}"), "1")
            .column(format!("frozen_p{j}"), "1");
    }
    for name in ["analytic", "mc", "frozen"] {
        table = table
            .column(format!("dist_{name}_tau_s"), "1")
            .column(format!("dist_{name}_tau_bar"), "1");
    }
    for (r, (step, frozen)) in mc.steps.iter().zip(&frozen).enumerate() {
        let analytic = analytic_state(&p0, &tau_bar, params.theta(), r as u64)?;
        let mean: Vec<f64> = step.population.iter().map(|e| e.mean).collect();
        let mut row = vec![r as f64];
        for j in 0..d {
            row.extend([analytic[j], mean[j], step.population[j].std_error, frozen[j]]);
        }
        for state in [analytic.as_slice(), mean.as_slice(), frozen.as_slice()] {
            row.push(distance(state, tau_s.as_slice()));
            row.push(distance(state, tau_bar.as_slice()));
        }
        table.push(row);
    }

    let scale = params.g0();
    let work_taylor = avg_work_taylor(&params, res.sigma())? / scale;
    let mut energetics = Table::new("dynamics_energetics")
        .column("step", UNIT_STEP)
        .column("work_mean", UNIT_ENERGY)
        .column("work_se", UNIT_ENERGY)
        .column("heat_mean", UNIT_ENERGY)
        .column("heat_se", UNIT_ENERGY)
        .column("delta_u_mean", UNIT_ENERGY)
        .column("delta_u_se", UNIT_ENERGY)
        .column("work_taylor", UNIT_ENERGY)
        .column("heat_taylor", UNIT_ENERGY)
        .column("delta_u_taylor", UNIT_ENERGY);
    for r in 1..=cfg.steps {
        let step = &mc.steps[r];
        let (w, q, u) = (
            step.work.expect("collision step"),
            step.heat.expect("collision step"),
            step.d_u.expect("collision step"),
        );
        // Taylor heat is taken around the analytic ensemble state before collision r
        let before = analytic_state(&p0, &tau_bar, params.theta(), r as u64 - 1)?;
        let u_taylor = avg_delta_u_taylor(&before, &params, res.sigma())? / scale;
        let q_taylor = match res.kind() {
            InhomogeneityKind::Hamiltonian => avg_heat_taylor(&before, &params, res.sigma())? / scale,
            InhomogeneityKind::Temperature => u_taylor,
        };
        let w_taylor = match res.kind() {
            InhomogeneityKind::Hamiltonian => work_taylor,
            InhomogeneityKind::Temperature => 0.0,
        };
        energetics.push(vec![
            r as f64,
            w.mean / scale,
            w.std_error / scale,
            q.mean / scale,
            q.std_error / scale,
            u.mean / scale,
            u.std_error / scale,
            w_taylor,
            q_taylor,
            u_taylor,
        ]);
    }
    Ok(vec![table, energetics])
}

pub fn run_work_dist(cfg: &ExperimentConfig) -> Result<Vec<Table>, CliError> {
    if cfg.kind != InhomogeneityKind::Hamiltonian {
        return Err(CliError::config("kind", "work is only injected by Hamiltonian inhomogeneity"));
    }
    distribution(cfg, Observable::Work, "work_dist")
}

pub fn run_heat_dist(cfg: &ExperimentConfig) -> Result<Vec<Table>, CliError> {
    distribution(cfg, Observable::Heat(cfg.kind), "heat_dist")
}

/// Densities on the ExactNumeric grid of each input, the model and
/// empirical CDFs there, and one summary row per input.
fn distribution(cfg: &ExperimentConfig, observable: Observable, name: &str) -> Result<Vec<Table>, CliError> {
    let params = cfg.params()?;
    let mut curves = Table::new(name)
        .column("p0", "1")
        .column("y", UNIT_REDUCED)
        .column("density_quadratic", UNIT_DENSITY)
        .column("density_exact", UNIT_DENSITY)
        .column("cdf_exact", "1")
        .column("cdf_empirical", "1");
    let mut summary = Table::new(format!("{name}_summary"))
        .column("p0", "1")
        .column("y_min", UNIT_REDUCED)
        .column("y_max", UNIT_REDUCED)
        .column("cell_width", UNIT_REDUCED)
        .column("normalization_exact", "1")
        .column("normalization_quadratic", "1")
        .column("argmax_y", UNIT_REDUCED)
        .column("interquartile_range", UNIT_REDUCED)
        .column("ks_distance", "1")
        .column("sample_mean", UNIT_REDUCED)
        .column("sample_se", UNIT_REDUCED)
        .column("taylor_mean", UNIT_REDUCED)
        .column("samples", "1");
    for p0 in cfg.qubit_inputs() {
        let model = ObservableModel::new(observable, p0, &params, cfg.sigma)?;
        let exact = model.curve(DensityMode::ExactNumeric)?;
        let quadratic = model.curve(DensityMode::QuadraticApprox)?;
        let samples = empirical_distribution(&model, cfg.samples, cfg.seed, execution(cfg))?;
        let sorted = samples.sorted();
        let cdf = exact.cdf_fn();
        let ks = ks_statistic(&sorted, &cdf);
        for (&y, &g) in exact.grid.iter().zip(&exact.density) {
            let below = sorted.partition_point(|&v| v <= y);
            curves.push(vec![
                p0,
                y,
                model.density(y, DensityMode::QuadraticApprox)?,
                g,
                cdf(y),
                below as f64 / sorted.len() as f64,
            ]);
        }
        summary.push(vec![
            p0,
            exact.lower,
            exact.upper,
            exact.cell_width(),
            exact.normalization(),
            quadratic.normalization(),
            exact.peak(),
            exact.interquartile_range(),
            ks,
            samples.mean(),
            samples.std_error(),
            taylor_mean(observable, p0, cfg)?,
            cfg.samples as f64,
        ]);
    }
    Ok(vec![curves, summary])
}

fn taylor_mean(observable: Observable, p0: f64, cfg: &ExperimentConfig) -> Result<f64, CliError> {
    let params = cfg.params()?;
    let p = Population::qubit(p0)?;
    let value = match observable {
        Observable::Work => avg_work_taylor(&params, cfg.sigma)?,
        Observable::Heat(InhomogeneityKind::Hamiltonian) => avg_heat_taylor(&p, &params, cfg.sigma)?,
        Observable::Heat(InhomogeneityKind::Temperature) => avg_delta_u_taylor(&p, &params, cfg.sigma)?,
    };
    Ok(value / (params.g0() * params.sin2()))
}

/// `beta W` against `beta dF_alpha` for one collision across `delta`.
pub fn run_second_laws(cfg: &ExperimentConfig) -> Result<Vec<Table>, CliError> {
    let params = cfg.params()?;
    if params.d() != 2 {
        return Err(almost_thermal::Error::Unsupported(format!("second_laws is defined for qubits, got d = {}", params.d())).into());
    }
    let p0 = cfg.input_state()?;
    let rows = delta_f_vs_work(&p0, &cfg.delta_grid(), &params, &cfg.alphas)?;
    let mut table = Table::new("second_laws").column("delta", "1").column("beta_work", "1");
    for a in cfg.alphas.alphas() {
        table = table
            .column(format!("beta_delta_f_{a}"), "1")
            .column(format!("exceeds_work_{a}"), "flag");
    }
    for row in rows {
        let mut out = vec![row.delta, row.beta_work];
        for (df, exceeds) in row.beta_delta_f.iter().zip(&row.exceeds_work) {
            out.extend([*df, flag(*exceeds)]);
        }
        table.push(out);
    }
    Ok(vec![table])
}

/// Rényi divergences to `tau_S` per step: one frozen configuration, the
/// mean over `samples` frozen configurations, and the ensemble-averaged
/// state.
pub fn run_long_term(cfg: &ExperimentConfig) -> Result<Vec<Table>, CliError> {
    let params = cfg.params()?;
    let res = cfg.reservoir()?;
    let p0 = cfg.input_state()?;
    let tau_s = thermal_populations(&params, 0.0)?;
    let tau_bar = ensemble_avg_thermal(&params, &res)?;
    let alphas = cfg.alphas.alphas();

    let divergences = |states: &[Population]| -> Result<Vec<Vec<f64>>, CliError> {
        states
            .iter()
            .map(|p| {
                alphas
                    .iter()
                    .map(|&a| renyi_divergence(p, &tau_s, a).map_err(CliError::from))
                    .collect()
            })
            .collect()
    };
    let per_config = map_indexed(cfg.samples, execution(cfg), |i| -> Result<Vec<Vec<f64>>, CliError> {
        divergences(&frozen_trajectory(&p0, &params, &res, cfg.steps, cfg.seed, i as u64)?)
    });
    let mut mean = vec![vec![0.0; alphas.len()]; cfg.steps + 1];
    let mut single = Vec::new();
    for (i, traj) in per_config.into_iter().enumerate() {
        let traj = traj?;
        for (acc, row) in mean.iter_mut().zip(&traj) {
            for (m, v) in acc.iter_mut().zip(row) {
                *m += v;
            }
        }
        if i == 0 {
            single = traj;
        }
    }
    let ensemble = divergences(
        &(0..=cfg.steps)
            .map(|r| analytic_state(&p0, &tau_bar, params.theta(), r as u64))
            .collect::<Result<Vec<_>, _>>()?,
    )?;
    let plateau = divergences(std::slice::from_ref(&tau_bar))?.remove(0);

    let mut table = Table::new("long_term").column("step", UNIT_STEP);
    for a in alphas {
        table = table
            .column(format!("d_frozen_{a}"), "1")
            .column(format!("d_frozen_mean_{a}"), "1")
            .column(format!("d_ensemble_{a}"), "1")
            .column(format!("d_plateau_{a}"), "1");
    }
    let n = cfg.samples as f64;
    for r in 0..=cfg.steps {
        let mut row = vec![r as f64];
        for k in 0..alphas.len() {
            row.extend([single[r][k], mean[r][k] / n, ensemble[r][k], plateau[k]]);
        }
        table.push(row);
    }
    Ok(vec![table])
}

/// Accumulated work and residual distance after `N` collisions with
/// `sin^2(theta) = c N^-xi`. Combinations with `c N^-xi > 1` are skipped.
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<Vec<Table>, CliError> {
    if cfg.kind != InhomogeneityKind::Hamiltonian {
        return Err(CliError::config("kind", "scaling requires Hamiltonian inhomogeneity"));
    }
    let params = cfg.params()?;
    let mut table = Table::new("scaling")
        .column("xi", "1")
        .column("c", "1")
        .column("n", UNIT_STEP)
        .column("sin2_theta", "1")
        .column("accumulated_work", UNIT_ENERGY)
        .column("distance_ratio", "1")
        .column("distance_ratio_limit", "1");
    for &xi in &cfg.xi_values {
        for &c in &cfg.c_values {
            for &n in &cfg.n_values {
                let sin2 = c * (n as f64).powf(-xi);
                if sin2 > 1.0 {
                    continue;
                }
                let acc = accumulated_work(&params, cfg.sigma, n, c, xi)?;
                table.push(vec![
                    xi,
                    c,
                    n as f64,
                    acc.sin2,
                    acc.work / params.g0(),
                    acc.distance_ratio,
                    (-c * (n as f64).powf(1.0 - xi)).exp(),
                ]);
            }
        }
    }
    Ok(vec![table])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(e: Experiment, pairs: &[(&str, &str)]) -> ExperimentConfig {
        let ov: Vec<_> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        ExperimentConfig::resolve(e, None, &ov).unwrap()
    }

    #[test]
    fn zero_steps_echo_input() {
        let t = run_dynamics(&cfg(Experiment::Dynamics, &[("steps", "0"), ("samples", "10"), ("p0", "[0.3]")])).unwrap();
        assert_eq!(t[0].rows.len(), 1);
        assert_eq!(t[0].values("mc_mean_p0").unwrap(), vec![0.3]);
        assert_eq!(t[0].values("analytic_p0").unwrap(), vec![0.3]);
        assert!(t[1].rows.is_empty());
    }

    #[test]
    fn sharp_reservoir_matches_analytic() {
        let t = run_dynamics(&cfg(Experiment::Dynamics, &[("sigma", "0"), ("steps", "30"), ("samples", "70")])).unwrap();
        let a = t[0].values("analytic_p0").unwrap();
        let m = t[0].values("mc_mean_p0").unwrap();
        for (x, y) in a.iter().zip(&m) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn qudit_dynamics_need_population() {
        let err = run_dynamics(&cfg(Experiment::Dynamics, &[("d", "3")])).unwrap_err();
        assert!(matches!(err, CliError::Config { ref field, .. } if field == "population"));
        let t = run_dynamics(&cfg(
            Experiment::Dynamics,
            &[("d", "3"), ("population", "[0.2,0.3,0.5]"), ("steps", "3"), ("samples", "5")],
        ))
        .unwrap();
        assert!(t[0].index("frozen_p2").is_some());
    }

    #[test]
    fn distributions_reject_qudits() {
        let err = run_work_dist(&cfg(Experiment::WorkDist, &[("d", "3"), ("samples", "10")])).unwrap_err();
        assert!(matches!(err, CliError::Model(almost_thermal::Error::Unsupported(_))));
        assert_eq!(err.exit_code(), crate::error::EXIT_CONFIG);
    }

    #[test]
    fn second_laws_reference_row() {
        let t = run_second_laws(&cfg(Experiment::SecondLaws, &[])).unwrap();
        let i = t[0].values("delta").unwrap().iter().position(|&d| d == 0.0).unwrap();
        let row = &t[0].rows[i];
        assert_eq!(row[1], 0.0);
        for a in ["0.5", "1", "2", "3", "inf"] {
            assert!(row[t[0].index(&format!("beta_delta_f_{a}")).unwrap()] <= 1e-12);
        }
    }

    #[test]
    fn scaling_skips_invalid_angles() {
        let t = run_scaling(&cfg(Experiment::Scaling, &[("n_values", "[1,10]"), ("xi_values", "[0.5]")])).unwrap();
        assert_eq!(t[0].values("n").unwrap(), vec![10.0]);
    }
}
