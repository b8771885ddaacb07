//! Reduced dynamics of a diagonal system state under repeated partial-swap
//! collisions.

use crate::error::{Error, Result};
use crate::model::{ModelParams, Population, ReservoirModel};
use crate::quadrature;

/// Thermal populations `q_j(delta)` of a reservoir qudit whose product
/// `beta_r g_r` equals `beta g0 (1 + delta)`.
///
/// Both inhomogeneity kinds share this form. `delta = -1` is the
/// infinite-temperature limit and gives the uniform state; `delta < -1`
/// would invert the populations and is rejected.
pub fn thermal_populations(params: &ModelParams, delta: f64) -> Result<Population> {
    if !delta.is_finite() || delta < -1.0 {
        return Err(Error::Domain(format!("inhomogeneity must satisfy delta >= -1, got {delta}")));
    }
    let u = params.beta_g0() * (1.0 + delta);
    // exp(-u j) / sum_k exp(-u k), which equals (1-a)/(1-a^d) a^j
    let weights: Vec<f64> = (0..params.d()).map(|j| (-u * j as f64).exp()).collect();
    let z: f64 = weights.iter().sum();
    Ok(Population::from_raw(weights.into_iter().map(|w| w / z).collect()))
}

/// Ground-state population of a thermal qubit, `1 / (1 + a(delta))`.
pub(crate) fn qubit_ground(params: &ModelParams, delta: f64) -> f64 {
    1.0 / (1.0 + params.boltzmann_ratio(delta))
}

/// One partial-swap collision between a system in `p_sys` and a reservoir
/// qudit in `q_res`. Returns the system and reservoir-qudit marginals.
pub fn collide(p_sys: &Population, q_res: &Population, theta: f64) -> Result<(Population, Population)> {
    p_sys.check_dim(q_res)?;
    let c2 = theta.cos().powi(2);
    let s2 = theta.sin().powi(2);
    Ok(collide_weights(p_sys, q_res, c2, s2))
}

pub(crate) fn collide_weights(p: &Population, q: &Population, c2: f64, s2: f64) -> (Population, Population) {
    let sys = p.iter().zip(q.iter()).map(|(p, q)| c2 * p + s2 * q).collect();
    let res = p.iter().zip(q.iter()).map(|(p, q)| c2 * q + s2 * p).collect();
    (Population::from_raw(sys), Population::from_raw(res))
}

/// System state after `r` collisions with reservoir qudits all in `tau`:
/// `tau - (tau - p0) cos^{2r} theta`.
pub fn analytic_state(p0: &Population, tau: &Population, theta: f64, r: u64) -> Result<Population> {
    p0.check_dim(tau)?;
    let decay = decay_factor(theta.cos().powi(2), r);
    Ok(Population::from_raw(
        p0.iter().zip(tau.iter()).map(|(p, t)| t - (t - p) * decay).collect(),
    ))
}

/// `cos2^r` with an exact integer power.
pub(crate) fn decay_factor(cos2: f64, r: u64) -> f64 {
    if r <= i32::MAX as u64 {
        cos2.powi(r as i32)
    } else {
        cos2.powf(r as f64)
    }
}

/// Ensemble-averaged thermal state `E[tau(delta)]` under the truncated
/// inhomogeneity distribution, by validated quadrature.
pub fn ensemble_avg_thermal(params: &ModelParams, res: &ReservoirModel) -> Result<Population> {
    if res.sigma() == 0.0 {
        return thermal_populations(params, 0.0);
    }
    let (lo, _) = res.support();
    if lo <= -1.0 {
        return Err(Error::Domain("inhomogeneity support reaches delta = -1".into()));
    }
    let avg = quadrature::average_vec(res, params.d(), &[], |delta| {
        thermal_populations(params, delta)
            .expect("quadrature nodes lie inside the support")
            .into_vec()
    })?;
    let total: f64 = avg.iter().sum();
    Ok(Population::from_raw(avg.into_iter().map(|x| x / total).collect()))
}

/// Trace distance `1/2 sum_j |p_j - q_j|` between diagonal states.
pub fn trace_distance(p: &Population, q: &Population) -> Result<f64> {
    p.check_dim(q)?;
    Ok(0.5 * p.iter().zip(q.iter()).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2};

    fn assert_close(a: &Population, b: &Population, tol: f64) {
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn thermal_qubit_ground_population() {
        let params = ModelParams::qubit(0.1);
        let q = thermal_populations(&params, 0.0).unwrap();
        assert!((q[0] - 1.0 / (1.0 + 1.0 / E)).abs() < 1e-15);
        assert!((q[0] - 0.73).abs() < 0.005);
    }

    #[test]
    fn thermal_qutrit_matches_geometric_formula() {
        let params = ModelParams::new(3, 1.0, 1.0, 0.1).unwrap();
        let q = thermal_populations(&params, 0.0).unwrap();
        // independent route: normalized exp(-j)
        let z: f64 = (0..3).map(|j| (-(j as f64)).exp()).sum();
        let expected = [0.66524, 0.24473, 0.09003];
        for j in 0..3 {
            assert!((q[j] - (-(j as f64)).exp() / z).abs() < 1e-15);
            assert!((q[j] - expected[j]).abs() < 5e-6);
        }
        let a = params.boltzmann_ratio(0.0);
        assert!((q[1] - (1.0 - a) / (1.0 - a.powi(3)) * a).abs() < 1e-15);
    }

    #[test]
    fn infinite_temperature_limit_is_uniform() {
        for d in 2..6 {
            let params = ModelParams::new(d, 1.0, 1.0, 0.1).unwrap();
            let q = thermal_populations(&params, -1.0).unwrap();
            assert!(q.iter().all(|x| (x - 1.0 / d as f64).abs() < 1e-15));
        }
        assert!(thermal_populations(&ModelParams::qubit(0.1), -1.5).is_err());
        assert!(thermal_populations(&ModelParams::qubit(0.1), f64::NAN).is_err());
    }

    #[test]
    fn collide_identity_and_full_swap() {
        let p = Population::new(vec![0.2, 0.5, 0.3]).unwrap();
        let q = Population::new(vec![0.6, 0.3, 0.1]).unwrap();
        let (s, r) = collide(&p, &q, 0.0).unwrap();
        assert_eq!((s, r), (p.clone(), q.clone()));
        let (s, r) = collide(&p, &q, FRAC_PI_2).unwrap();
        assert_close(&s, &q, 1e-15);
        assert_close(&r, &p, 1e-15);
        assert!(collide(&p, &Population::uniform(2).unwrap(), 0.1).is_err());
    }

    #[test]
    fn analytic_state_edges() {
        let p0 = Population::qubit(0.2).unwrap();
        let tau = Population::qubit(0.7).unwrap();
        assert_eq!(analytic_state(&p0, &tau, 0.3, 0).unwrap(), p0);
        assert_close(&analytic_state(&tau, &tau, 0.3, 17).unwrap(), &tau, 1e-15);
        assert_close(&analytic_state(&p0, &tau, 0.3, 5000).unwrap(), &tau, 1e-12);
    }

    #[test]
    fn zero_width_average_is_reference_thermal_state() {
        let params = ModelParams::new(4, 0.7, 1.3, 0.2).unwrap();
        let res = ReservoirModel::hamiltonian(0.0).unwrap();
        assert_eq!(
            ensemble_avg_thermal(&params, &res).unwrap(),
            thermal_populations(&params, 0.0).unwrap()
        );
    }

    #[test]
    fn averaged_ground_population_drops() {
        let params = ModelParams::qubit(0.1);
        let res = ReservoirModel::hamiltonian(0.05).unwrap();
        let avg = ensemble_avg_thermal(&params, &res).unwrap();
        assert!(avg[0] < 1.0 / (1.0 + 1.0 / E));
        assert!((avg.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_edges() {
        let p = Population::qubit(0.3).unwrap();
        assert_eq!(trace_distance(&p, &p).unwrap(), 0.0);
        let a = Population::qubit(1.0).unwrap();
        let b = Population::qubit(0.0).unwrap();
        assert_eq!(trace_distance(&a, &b).unwrap(), 1.0);
        assert!(trace_distance(&p, &Population::uniform(3).unwrap()).is_err());
    }
}
