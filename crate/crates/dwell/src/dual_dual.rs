//! The dual of the canonical dual: a linearly constrained convex minimization
//! in lambda, the nonlinear lambda <-> w correspondences, and the
//! completed-squares primal form F(w).

use nalgebra::DVector;

use crate::diagonalize::CanonicalInstance;
use crate::dual;
use crate::error::{DwellError, Result};

/// Feasibility slack for the constraints lambda_i + phi_i^2/2 >= 0.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// A point in the dual-of-dual variable space.
#[derive(Debug, Clone)]
pub struct LambdaPoint {
    pub lambda: DVector<f64>,
}

impl LambdaPoint {
    pub fn new(can: &CanonicalInstance, lambda: DVector<f64>) -> Result<Self> {
        for i in 0..lambda.len() {
            if lambda[i] + 0.5 * can.phi[i] * can.phi[i] < -FEASIBILITY_TOL {
                return Err(DwellError::InfeasibleLambda { index: i });
            }
        }
        Ok(LambdaPoint { lambda })
    }
}

fn radicand(can: &CanonicalInstance, lambda: &DVector<f64>, i: usize) -> f64 {
    (2.0 * lambda[i] + can.phi[i] * can.phi[i]).max(0.0)
}

/// Convex objective
/// `sum alpha_i lambda_i - sum |tau_i| sqrt(2 lambda_i + phi_i^2)
///  + 1/2 (sum lambda_i - nu)^2 - sum tau_i phi_i`.
pub fn pdd_value(can: &CanonicalInstance, point: &LambdaPoint) -> f64 {
    let tau = can.tau();
    let lambda = &point.lambda;
    let mut s = 0.0;
    let mut total = 0.0;
    for i in 0..can.n() {
        s += can.alpha[i] * lambda[i] - tau[i].abs() * radicand(can, lambda, i).sqrt()
            - tau[i] * can.phi[i];
        total += lambda[i];
    }
    let dev = total - can.nu;
    s + 0.5 * dev * dev + can.constant_offset
}

/// Gradient of [`pdd_value`]; undefined on boundary components with tau_i != 0.
fn pdd_gradient(can: &CanonicalInstance, lambda: &DVector<f64>) -> DVector<f64> {
    let tau = can.tau();
    let dev: f64 = lambda.iter().sum::<f64>() - can.nu;
    DVector::from_fn(can.n(), |i, _| {
        let root = radicand(can, lambda, i).sqrt();
        let sqrt_term = if tau[i] == 0.0 {
            0.0
        } else {
            -tau[i].abs() / root.max(1e-300)
        };
        can.alpha[i] + sqrt_term + dev
    })
}

/// The image of lambda under the sign-selected square-root map:
/// `w_i = phi_i + sqrt(2 lambda_i + phi_i^2)` when tau_i >= 0, minus branch
/// otherwise. Returns the indices where tau_i = 0 and both signs are
/// admissible (the plus branch is reported).
pub fn w_from_lambda(can: &CanonicalInstance, point: &LambdaPoint) -> (DVector<f64>, Vec<usize>) {
    let tau = can.tau();
    let mut multivalued = Vec::new();
    let w = DVector::from_fn(can.n(), |i, _| {
        let root = radicand(can, &point.lambda, i).sqrt();
        if tau[i] == 0.0 {
            multivalued.push(i);
        }
        if tau[i] >= 0.0 {
            can.phi[i] + root
        } else {
            can.phi[i] - root
        }
    });
    (w, multivalued)
}

/// The total map `lambda_i = 1/2 (w_i - phi_i)^2 - phi_i^2/2`; always
/// feasible. The boolean reports whether w satisfies the sign constraints
/// `tau_i (w_i - phi_i) >= 0` under which the value identity with F holds.
pub fn lambda_from_w(can: &CanonicalInstance, w: &DVector<f64>) -> (LambdaPoint, bool) {
    let tau = can.tau();
    let lambda = DVector::from_fn(can.n(), |i, _| {
        let dev = w[i] - can.phi[i];
        0.5 * dev * dev - 0.5 * can.phi[i] * can.phi[i]
    });
    let in_sector = (0..can.n()).all(|i| tau[i] * (w[i] - can.phi[i]) >= -FEASIBILITY_TOL);
    (LambdaPoint { lambda }, in_sector)
}

/// Completed-squares form of the canonical objective.
pub fn f_value(can: &CanonicalInstance, w: &DVector<f64>) -> f64 {
    let tau = can.tau();
    let mut lam_sum = 0.0;
    let mut rest = 0.0;
    for i in 0..can.n() {
        let dev = w[i] - can.phi[i];
        let lam = 0.5 * dev * dev - 0.5 * can.phi[i] * can.phi[i];
        lam_sum += lam;
        rest += can.alpha[i] * lam - tau[i] * w[i];
    }
    let dev = lam_sum - can.nu;
    0.5 * dev * dev + rest + can.constant_offset
}

/// Minimize the dual-of-dual objective over the box
/// `{lambda : lambda_i >= -phi_i^2/2}` by projected gradient descent with
/// backtracking. Returns one minimizer (the set may be non-singleton).
pub fn solve_pdd(can: &CanonicalInstance, tol: f64) -> Result<(LambdaPoint, f64)> {
    let n = can.n();
    let tau = can.tau();
    // Keep iterates strictly inside boundary components where the gradient
    // has an infinite inward slope.
    let project = |lambda: &mut DVector<f64>| {
        for i in 0..n {
            let floor = -0.5 * can.phi[i] * can.phi[i]
                + if tau[i] != 0.0 { 1e-14 } else { 0.0 };
            if lambda[i] < floor {
                lambda[i] = floor;
            }
        }
    };

    // Feasible, well-scaled start: the image of w(sigma0 + 1).
    let w_start = dual::w_of_sigma(can, can.sigma0 + 1.0)?;
    let (start, _) = lambda_from_w(can, &w_start);
    let mut lambda = start.lambda;
    project(&mut lambda);

    let mut value = pdd_value(can, &LambdaPoint { lambda: lambda.clone() });
    let mut step = 1.0;
    for _ in 0..2_000 {
        let grad = pdd_gradient(can, &lambda);
        // Projected-gradient residual at unit step.
        let mut probe = &lambda - &grad;
        project(&mut probe);
        let residual = (&lambda - &probe).norm();
        if residual <= tol * value.abs().max(1.0) {
            break;
        }
        // Backtracking line search along the projected arc.
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = &lambda - &grad * step;
            project(&mut trial);
            let direction = &trial - &lambda;
            let trial_value = pdd_value(can, &LambdaPoint { lambda: trial.clone() });
            if trial_value <= value + 1e-4 * grad.dot(&direction) {
                lambda = trial;
                value = trial_value;
                accepted = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    // Steepest descent crawls on ill-conditioned instances; polish with exact
    // cyclic coordinate minimization. Each coordinate problem is strictly
    // convex with curvature >= 1, and its derivative tends to -inf at the
    // floor whenever tau_i != 0, so the coordinate minimizer is interior and
    // bracketed bisection nails it.
    for _ in 0..500 {
        for i in 0..n {
            let floor = -0.5 * can.phi[i] * can.phi[i];
            let rest: f64 = lambda.iter().sum::<f64>() - lambda[i];
            if tau[i] == 0.0 {
                lambda[i] = (can.nu - rest - can.alpha[i]).max(floor);
                continue;
            }
            // Derivative alpha_i - |tau_i|/sqrt(2 lambda + phi_i^2) + lambda + rest - nu.
            let slope = |l: f64| {
                can.alpha[i] - tau[i].abs() / (2.0 * (l - floor)).sqrt() + l + rest - can.nu
            };
            let mut hi = (can.nu - rest - can.alpha[i] + tau[i].abs()).max(floor + 1.0);
            for _ in 0..200 {
                if slope(hi) > 0.0 {
                    break;
                }
                hi = floor + 2.0 * (hi - floor);
            }
            let mut lo = floor;
            for _ in 0..120 {
                let mid = 0.5 * (lo + hi);
                if slope(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lambda[i] = 0.5 * (lo + hi);
        }
        let grad = pdd_gradient(can, &lambda);
        let mut probe = &lambda - &grad;
        project(&mut probe);
        value = pdd_value(can, &LambdaPoint { lambda: lambda.clone() });
        if (&lambda - &probe).norm() <= tol * value.abs().max(1.0) {
            break;
        }
    }
    value = pdd_value(can, &LambdaPoint { lambda: lambda.clone() });
    Ok((LambdaPoint { lambda }, value))
}
