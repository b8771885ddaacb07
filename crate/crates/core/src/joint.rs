//! Dense two-qudit matrices: the partial-swap unitary, the joint
//! post-collision state and the local Hamiltonians.
//!
//! The reduced dynamics never needs these. They back the closed forms
//! with an independent route and compute entropy production.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::dynamics::thermal_populations;
use crate::error::Result;
use crate::model::{InhomogeneityKind, ModelParams, Population};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Index of the product basis vector `|j>_S (x) |k>_R`.
#[inline]
pub fn product_index(d: usize, j: usize, k: usize) -> usize {
    j * d + k
}

/// `cos(theta) I + i sin(theta) S` on two qudits of dimension `d`.
pub fn partial_swap_unitary(d: usize, theta: f64) -> CMatrix {
    let n = d * d;
    let mut u = CMatrix::from_element(n, n, ZERO);
    let (s, c) = theta.sin_cos();
    for j in 0..d {
        for k in 0..d {
            let a = product_index(d, j, k);
            u[(a, a)] += Complex64::new(c, 0.0);
            u[(product_index(d, k, j), a)] += Complex64::new(0.0, s);
        }
    }
    u
}

/// Diagonal matrix `g s_z` on one qudit.
pub fn spin_hamiltonian(d: usize, g: f64) -> CMatrix {
    let offset = (d as f64 - 1.0) / 2.0;
    CMatrix::from_fn(d, d, |a, b| {
        if a == b {
            Complex64::new(g * (a as f64 - offset), 0.0)
        } else {
            ZERO
        }
    })
}

fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Local Hamiltonians `(H_S (x) I, I (x) H_R)` for one collision.
///
/// The reservoir splitting is `g0 (1 + delta)` for the Hamiltonian kind and
/// `g0` for the temperature kind.
pub fn local_hamiltonians(params: &ModelParams, kind: InhomogeneityKind, delta: f64) -> (CMatrix, CMatrix) {
    let d = params.d();
    let g_res = match kind {
        InhomogeneityKind::Hamiltonian => params.g0() * (1.0 + delta),
        InhomogeneityKind::Temperature => params.g0(),
    };
    let h_sys = spin_hamiltonian(d, params.g0()).kronecker(&identity(d));
    let h_res = identity(d).kronecker(&spin_hamiltonian(d, g_res));
    (h_sys, h_res)
}

/// Frobenius norm of `[H_S + H_R, U]` for the partial swap.
pub fn commutator_norm(params: &ModelParams, kind: InhomogeneityKind, delta: f64) -> f64 {
    let (h_sys, h_res) = local_hamiltonians(params, kind, delta);
    let h = h_sys + h_res;
    let u = partial_swap_unitary(params.d(), params.theta());
    (&h * &u - &u * &h).norm()
}

fn diag_matrix(values: impl IntoIterator<Item = f64>) -> CMatrix {
    let v: Vec<Complex64> = values.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(v))
}

/// Density matrix of a two-qudit state in the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    d: usize,
    rho: CMatrix,
}

impl JointState {
    /// Uncorrelated diagonal state `p (x) q`.
    pub fn product(p: &Population, q: &Population) -> Result<Self> {
        p.check_dim(q)?;
        let d = p.dim();
        let rho = diag_matrix(p.iter().flat_map(|pj| q.iter().map(move |qk| pj * qk)));
        Ok(Self { d, rho })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> CMatrix {
        self.rho
    }

    /// `U rho U^dagger`.
    pub fn conjugate(&self, u: &CMatrix) -> Self {
        Self {
            d: self.d,
            rho: u * &self.rho * u.adjoint(),
        }
    }

    /// Reduced state of the system (first factor).
    pub fn system_marginal(&self) -> CMatrix {
        let d = self.d;
        CMatrix::from_fn(d, d, |a, b| (0..d).map(|k| self.rho[(product_index(d, a, k), product_index(d, b, k))]).sum())
    }

    /// Reduced state of the reservoir qudit (second factor).
    pub fn reservoir_marginal(&self) -> CMatrix {
        let d = self.d;
        CMatrix::from_fn(d, d, |a, b| (0..d).map(|j| self.rho[(product_index(d, j, a), product_index(d, j, b))]).sum())
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// Largest entry of `|rho - rho^dagger|`.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.rho.clone()).eigenvalues.iter().copied().collect()
    }

    /// `Tr[rho O]`, real part.
    pub fn expectation(&self, op: &CMatrix) -> f64 {
        (&self.rho * op).trace().re
    }
}

/// Joint state after one collision, `U (p (x) q) U^dagger`.
pub fn joint_post_collision(p_sys: &Population, q_res: &Population, theta: f64) -> Result<JointState> {
    let before = JointState::product(p_sys, q_res)?;
    Ok(before.conjugate(&partial_swap_unitary(p_sys.dim(), theta)))
}

/// Diagonal of a (reduced) density matrix, real parts.
pub fn diagonal(m: &CMatrix) -> Vec<f64> {
    m.diagonal().iter().map(|z| z.re).collect()
}

/// Largest off-diagonal magnitude of a square matrix.
pub fn max_off_diagonal(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..m.nrows() {
        for b in 0..m.ncols() {
            if a != b {
                worst = worst.max(m[(a, b)].norm());
            }
        }
    }
    worst
}

/// Work, heat and system energy change of one collision, by direct matrix
/// evaluation: `W = Tr[(rho' - rho) H]`, `Q = -Tr[(rho' - rho) H_R]`,
/// `dU = Tr[(rho' - rho) H_S]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixEnergetics {
    pub work: f64,
    pub heat: f64,
    pub d_u: f64,
}

pub fn matrix_energetics(
    p_sys: &Population,
    delta: f64,
    params: &ModelParams,
    kind: InhomogeneityKind,
) -> Result<MatrixEnergetics> {
    let q = thermal_populations(params, delta)?;
    let before = JointState::product(p_sys, &q)?;
    let after = before.conjugate(&partial_swap_unitary(params.d(), params.theta()));
    let (h_sys, h_res) = local_hamiltonians(params, kind, delta);
    let change = |h: &CMatrix| after.expectation(h) - before.expectation(h);
    let d_sys = change(&h_sys);
    let d_res = change(&h_res);
    Ok(MatrixEnergetics {
        work: d_sys + d_res,
        heat: -d_res,
        d_u: d_sys,
    })
}

/// Hermitian matrix function `f(M)` via eigendecomposition.
fn hermitian_apply(m: &CMatrix, f: impl Fn(f64) -> f64) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let v = &eig.eigenvectors;
    let fl = diag_matrix(eig.eigenvalues.iter().map(|&l| f(l)));
    (eig.eigenvalues.iter().copied().collect(), v * fl * v.adjoint())
}

/// Quantum relative entropy `Tr[rho (log rho - log sigma)]` by full
/// eigendecomposition of both arguments, in nats. Eigenvalues below
/// `1e-300` are treated as zero; returns `+inf` when the support of `rho`
/// is not contained in that of `sigma`.
pub fn relative_entropy_dense(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    const FLOOR: f64 = 1e-300;
    let (lr, _) = hermitian_apply(rho, |x| x);
    let neg_entropy: f64 = lr.iter().filter(|&&l| l > FLOOR).map(|l| l * l.ln()).sum();

    let eig = SymmetricEigen::new(sigma.clone());
    let v = &eig.eigenvectors;
    let mut cross = 0.0;
    for (i, &ls) in eig.eigenvalues.iter().enumerate() {
        let col = v.column(i);
        // <v_i| rho |v_i>
        let w = (col.adjoint() * rho * col)[(0, 0)].re;
        if w <= 1e-14 {
            continue;
        }
        if ls <= FLOOR {
            return f64::INFINITY;
        }
        cross += w * ls.ln();
    }
    neg_entropy - cross
}
