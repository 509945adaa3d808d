//! The canonical dual: maximize
//! `-1/2 sigma^2 - 1/2 sum_i (psi_i + sigma phi_i)^2 / (alpha_i + sigma) - nu sigma`
//! over (sigma0, +inf), with boundary/hard-case resolution and recovery of the
//! global solution set (a unique point or a sphere).

use nalgebra::DVector;
use rand::Rng;

use crate::diagonalize::CanonicalInstance;
use crate::error::{DwellError, Result};

/// Result of maximizing the dual function.
#[derive(Debug, Clone)]
pub enum DualResult {
    /// Unique stationary sigma in the open interval (sigma0, inf).
    Interior { sigma_star: f64, iterations: usize },
    /// Supremum attained in the limit at sigma0.
    Boundary {
        sigma0: f64,
        /// lim_{sigma -> sigma0+} of the dual derivative; always <= 0 here.
        g_limit: f64,
        /// Indices with alpha_i + sigma0 = 0.
        critical: Vec<usize>,
        /// Complement indices.
        regular: Vec<usize>,
    },
}

/// Shape of the global minimizer set in canonical w-space.
#[derive(Debug, Clone)]
pub enum SolutionShape {
    UniquePoint,
    Sphere {
        /// Indices over which the sphere extends.
        free: Vec<usize>,
        /// Full-length center: phi_i on free indices, the fixed w_j elsewhere.
        center: DVector<f64>,
        radius: f64,
    },
}

#[derive(Debug, Clone)]
pub struct GlobalSolutionSet {
    pub shape: SolutionShape,
    pub value: f64,
    pub xi_star: f64,
    /// Boundarified representative (equals the unique point when the set is a singleton).
    pub representative_w: DVector<f64>,
    /// Representative mapped back through P (x-space of the diagonalized instance).
    pub representative_x: DVector<f64>,
}

impl GlobalSolutionSet {
    /// Draw a uniformly random member of the solution set.
    pub fn sample(&self, rng: &mut impl Rng) -> DVector<f64> {
        match &self.shape {
            SolutionShape::UniquePoint => self.representative_w.clone(),
            SolutionShape::Sphere {
                free,
                center,
                radius,
            } => {
                let mut dir = vec![0.0; free.len()];
                loop {
                    let mut norm2 = 0.0_f64;
                    for d in dir.iter_mut() {
                        *d = rng.random_range(-1.0..1.0);
                        norm2 += *d * *d;
                    }
                    if norm2 > 1e-12 {
                        let norm = norm2.sqrt();
                        let mut w = center.clone();
                        for (k, &i) in free.iter().enumerate() {
                            w[i] = center[i] + radius * dir[k] / norm;
                        }
                        return w;
                    }
                }
            }
        }
    }
}

/// Tolerance grouping near-degenerate eigenvalues into the critical index set.
fn tie_tol(can: &CanonicalInstance) -> f64 {
    1e-9 * can.alpha.amax().max(1.0)
}

/// Tolerance deciding whether a hard-case numerator psi_i + sigma0 phi_i vanishes.
fn hard_case_tol(can: &CanonicalInstance) -> f64 {
    1e-8 * (can.psi.amax() + can.sigma0.abs() * can.phi.amax()).max(1.0)
}

/// Window around sigma0 inside which an evaluation point is treated as the
/// boundary limit. Narrower than any interior bracket endpoint.
fn boundary_window(can: &CanonicalInstance) -> f64 {
    1e-12 * (1.0 + can.sigma0.abs())
}

/// Indices with alpha_i + sigma0 = 0 (up to the tie tolerance) and the complement.
pub fn critical_indices(can: &CanonicalInstance) -> (Vec<usize>, Vec<usize>) {
    let tol = tie_tol(can);
    let mut critical = Vec::new();
    let mut regular = Vec::new();
    for i in 0..can.n() {
        if can.alpha[i] + can.sigma0 <= tol {
            critical.push(i);
        } else {
            regular.push(i);
        }
    }
    (critical, regular)
}

fn check_boundary_numerators(can: &CanonicalInstance) -> bool {
    let (critical, _) = critical_indices(can);
    let tol = hard_case_tol(can);
    critical
        .iter()
        .all(|&i| (can.psi[i] + can.sigma0 * can.phi[i]).abs() <= tol)
}

/// Dual function value at sigma; at sigma = sigma0 the critical terms are
/// dropped (their numerators must vanish for the limit to exist).
pub fn dual_value(can: &CanonicalInstance, sigma: f64) -> Result<f64> {
    let window = boundary_window(can);
    let at_boundary = sigma <= can.sigma0 + window;
    if at_boundary && (sigma < can.sigma0 - window || !check_boundary_numerators(can)) {
        return Err(DwellError::DualDomain { sigma });
    }
    let (critical, _) = critical_indices(can);
    let mut sum = 0.0;
    for i in 0..can.n() {
        if at_boundary && critical.contains(&i) {
            continue;
        }
        let num = can.psi[i] + sigma * can.phi[i];
        sum += num * num / (can.alpha[i] + sigma);
    }
    Ok(-0.5 * sigma * sigma - 0.5 * sum - can.nu * sigma + can.constant_offset)
}

/// w(sigma)_i = (psi_i + sigma phi_i) / (alpha_i + sigma), with the limit
/// value phi_i on critical indices at sigma = sigma0.
pub fn w_of_sigma(can: &CanonicalInstance, sigma: f64) -> Result<DVector<f64>> {
    let window = boundary_window(can);
    let at_boundary = sigma <= can.sigma0 + window;
    if at_boundary && (sigma < can.sigma0 - window || !check_boundary_numerators(can)) {
        return Err(DwellError::DualDomain { sigma });
    }
    let (critical, _) = critical_indices(can);
    Ok(DVector::from_fn(can.n(), |i, _| {
        if at_boundary && critical.contains(&i) {
            can.phi[i]
        } else {
            (can.psi[i] + sigma * can.phi[i]) / (can.alpha[i] + sigma)
        }
    }))
}

/// Dual derivative g(sigma) = Lambda(w(sigma)) - sigma; strictly decreasing
/// on (sigma0, inf).
pub fn dual_derivative(can: &CanonicalInstance, sigma: f64) -> Result<f64> {
    let w = w_of_sigma(can, sigma)?;
    Ok(can.lambda_operator(&w) - sigma)
}

/// Closed-form derivative of g: -sum tau_i^2/(alpha_i + sigma)^3 - 1.
fn g_prime(can: &CanonicalInstance, sigma: f64) -> f64 {
    let tau = can.tau();
    let mut s = 0.0;
    for i in 0..can.n() {
        let den = can.alpha[i] + sigma;
        s += tau[i] * tau[i] / (den * den * den);
    }
    -s - 1.0
}

/// Complementary gap function G_ap(w, sigma) = sum 1/2 (alpha_i + sigma) w_i^2;
/// nonnegative for every w exactly when sigma >= sigma0.
pub fn gap_function(can: &CanonicalInstance, w: &DVector<f64>, sigma: f64) -> f64 {
    (0..can.n())
        .map(|i| 0.5 * (can.alpha[i] + sigma) * w[i] * w[i])
        .sum()
}

/// Total complementary function Xi(w, sigma).
pub fn total_complementary(can: &CanonicalInstance, w: &DVector<f64>, sigma: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..can.n() {
        s += 0.5 * (can.alpha[i] + sigma) * w[i] * w[i] - (can.psi[i] + sigma * can.phi[i]) * w[i];
    }
    -0.5 * sigma * sigma + s - sigma * can.nu + can.constant_offset
}

/// Maximize the dual function. Returns the interior stationary point when the
/// derivative has a root in (sigma0, inf), otherwise the boundary description.
pub fn solve_dual(can: &CanonicalInstance, tol: f64) -> Result<DualResult> {
    let sigma0 = can.sigma0;
    let boundary_finite = check_boundary_numerators(can);
    let g_limit = if boundary_finite {
        dual_derivative(can, sigma0)?
    } else {
        f64::INFINITY
    };
    if boundary_finite && g_limit <= 0.0 {
        let (critical, regular) = critical_indices(can);
        return Ok(DualResult::Boundary {
            sigma0,
            g_limit,
            critical,
            regular,
        });
    }

    // Interior root of the strictly decreasing g on (sigma0, inf).
    let stop = tol * can.nu.abs().max(1.0);
    let mut lo = sigma0 + (1e-9 * (1.0 + sigma0.abs())).max(1e-12);
    let floor = 10.0 * boundary_window(can);
    while dual_derivative(can, lo)? <= 0.0 && lo - sigma0 > floor {
        lo = sigma0 + (lo - sigma0) / 10.0;
    }
    let mut hi = sigma0 + 1.0;
    while dual_derivative(can, hi)? >= 0.0 {
        hi = sigma0 + 2.0 * (hi - sigma0);
    }

    let mut sigma = 0.5 * (lo + hi);
    let mut iterations = 0;
    for _ in 0..200 {
        iterations += 1;
        let g = dual_derivative(can, sigma)?;
        if g.abs() <= stop {
            break;
        }
        if g > 0.0 {
            lo = sigma;
        } else {
            hi = sigma;
        }
        let newton = sigma - g / g_prime(can, sigma);
        sigma = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(DualResult::Interior {
        sigma_star: sigma,
        iterations,
    })
}

/// Recover the global primal solution set from a dual result (hard-case style
/// boundary handling with boundarification of the sphere representative).
pub fn primal_from_dual(can: &CanonicalInstance, result: &DualResult) -> Result<GlobalSolutionSet> {
    match result {
        DualResult::Interior { sigma_star, .. } => {
            let w = w_of_sigma(can, *sigma_star)?;
            let value = dual_value(can, *sigma_star)?;
            let x = can.recover_x(&w);
            Ok(GlobalSolutionSet {
                shape: SolutionShape::UniquePoint,
                value,
                xi_star: *sigma_star,
                representative_w: w,
                representative_x: x,
            })
        }
        DualResult::Boundary {
            sigma0,
            critical,
            regular,
            ..
        } => {
            let mut center = DVector::zeros(can.n());
            for &i in critical {
                center[i] = can.phi[i];
            }
            let mut fixed_sum = 0.0;
            for &j in regular {
                let wj = (can.psi[j] + sigma0 * can.phi[j]) / (can.alpha[j] + sigma0);
                center[j] = wj;
                fixed_sum += wj * wj - 2.0 * can.phi[j] * wj;
            }
            let phi_sum: f64 = critical.iter().map(|&i| can.phi[i] * can.phi[i]).sum();
            let rho2 = phi_sum - fixed_sum + 2.0 * sigma0 + 2.0 * can.nu;
            if rho2 < -1e-8 {
                return Err(DwellError::Internal(format!(
                    "negative squared sphere radius {rho2} contradicts boundary optimality"
                )));
            }
            let value = dual_value(can, *sigma0)?;
            let rho = rho2.max(0.0).sqrt();
            let degenerate = rho2 <= 1e-12 * (1.0 + phi_sum.abs() + fixed_sum.abs());
            let mut representative_w = center.clone();
            if !degenerate {
                representative_w[critical[0]] += rho;
            }
            let representative_x = can.recover_x(&representative_w);
            let shape = if degenerate {
                SolutionShape::UniquePoint
            } else {
                SolutionShape::Sphere {
                    free: critical.clone(),
                    center,
                    radius: rho,
                }
            };
            Ok(GlobalSolutionSet {
                shape,
                value,
                xi_star: *sigma0,
                representative_w,
                representative_x,
            })
        }
    }
}
