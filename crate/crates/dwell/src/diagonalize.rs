//! Simultaneous diagonalization by congruence of A and B^T B (with
//! B^T B positive definite), producing the separated-squares canonical form
//! `1/2 xi^2 + sum_i (1/2 alpha_i w_i^2 - psi_i w_i)` with `xi = Lambda(w)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{DwellError, Result};
use crate::instance::DwpInstance;

/// Canonical separated-squares instance.
#[derive(Debug, Clone)]
pub struct CanonicalInstance {
    pub alpha: DVector<f64>,
    pub psi: DVector<f64>,
    pub phi: DVector<f64>,
    pub nu: f64,
    pub p: DMatrix<f64>,
    pub p_inv: DMatrix<f64>,
    pub sigma0: f64,
    pub constant_offset: f64,
}

impl CanonicalInstance {
    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    /// The quadratic operator Lambda(w) = sum_i (1/2 w_i^2 - phi_i w_i) - nu.
    pub fn lambda_operator(&self, w: &DVector<f64>) -> f64 {
        w.iter()
            .zip(self.phi.iter())
            .map(|(&wi, &pi)| 0.5 * wi * wi - pi * wi)
            .sum::<f64>()
            - self.nu
    }

    /// Canonical objective 1/2 Lambda(w)^2 + sum_i (1/2 alpha_i w_i^2 - psi_i w_i).
    pub fn objective(&self, w: &DVector<f64>) -> f64 {
        let xi = self.lambda_operator(w);
        let quad: f64 = (0..self.n())
            .map(|i| 0.5 * self.alpha[i] * w[i] * w[i] - self.psi[i] * w[i])
            .sum();
        0.5 * xi * xi + quad + self.constant_offset
    }

    /// Map canonical coordinates back to x-space: x = P w.
    pub fn recover_x(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.p * w
    }

    /// Map x-space coordinates into canonical coordinates: w = P^{-1} x.
    pub fn w_of_x(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.p_inv * x
    }

    /// tau_i = psi_i - alpha_i phi_i, the linear coefficients after completing
    /// squares; shared by the dual-of-dual machinery.
    pub fn tau(&self) -> DVector<f64> {
        DVector::from_fn(self.n(), |i, _| self.psi[i] - self.alpha[i] * self.phi[i])
    }
}

/// Congruence transform: P with P^T G P = I and P^T A P = Diag(alpha),
/// alpha sorted ascending. Built from the Cholesky factor of G followed by an
/// orthogonal eigenbasis; falls back to a spectral inverse square root when
/// Cholesky fails near the positive-definiteness margin.
pub fn congruence_transform(
    a: &DMatrix<f64>,
    g: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = g.nrows();
    let p1 = match nalgebra::Cholesky::new(g.clone()) {
        Some(chol) => chol
            .l()
            .transpose()
            .try_inverse()
            .ok_or_else(|| DwellError::Internal("singular Cholesky factor".into()))?,
        None => {
            let eig = nalgebra::SymmetricEigen::new(g.clone());
            let max_eig = eig.eigenvalues.max();
            let min_eig = eig.eigenvalues.min();
            if min_eig <= 1e-10 * max_eig.max(0.0) {
                return Err(DwellError::NotPositiveDefinite { min_eig });
            }
            let scaled = DMatrix::from_fn(n, n, |i, j| {
                eig.eigenvectors[(i, j)] / eig.eigenvalues[j].sqrt()
            });
            scaled
        }
    };
    let m = p1.transpose() * a * &p1;
    let m = (&m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(m);

    // Ascending eigenvalue order with a deterministic sign convention.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let mut p2 = DMatrix::zeros(n, n);
    let mut alpha = DVector::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        alpha[dst] = eig.eigenvalues[src];
        let col = eig.eigenvectors.column(src);
        let pivot = col.iter().cloned().fold(0.0_f64, |acc, v| {
            if v.abs() > acc.abs() {
                v
            } else {
                acc
            }
        });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            p2[(i, dst)] = sign * col[i];
        }
    }
    Ok((p1 * p2, alpha))
}

/// Build the canonical instance of an input whose Gram matrix is positive
/// definite (run the space reduction first otherwise).
pub fn to_canonical(inst: &DwpInstance) -> Result<CanonicalInstance> {
    let gram = inst.gram();
    let (p, alpha) = congruence_transform(inst.a(), &gram)?;
    let p_inv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| DwellError::Internal("congruence transform is singular".into()))?;
    let psi = p.transpose() * inst.f();
    let phi = p.transpose() * inst.b().transpose() * inst.c();
    let nu = inst.d() - 0.5 * inst.c().norm_squared();
    let sigma0 = alpha.iter().map(|&ai| -ai).fold(f64::NEG_INFINITY, f64::max);
    Ok(CanonicalInstance {
        alpha,
        psi,
        phi,
        nu,
        p,
        p_inv,
        sigma0,
        constant_offset: inst.constant_offset(),
    })
}
