//! End-to-end solve: space reduction, congruence diagonalization, dual
//! maximization, and solution recovery, reported in a schema-stable form.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::diagonalize::to_canonical;
use crate::dual::{primal_from_dual, solve_dual, DualResult, SolutionShape};
use crate::error::Result;
use crate::instance::DwpInstance;
use crate::reduction::{lift_solution, reduce, ReductionBranch, ReductionOutcome};

/// Default tolerance on the dual derivative root.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    GlobalMinimum,
    GlobalSphere,
    Unbounded,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphereReport {
    /// Center in canonical w-coordinates of the reduced instance.
    pub center: Vec<f64>,
    pub radius: f64,
    /// (index, value) pairs of the coordinates fixed by the regular indices.
    pub fixed: Vec<(usize, f64)>,
    /// Two distinct members of the solution set, lifted to x-space.
    pub samples: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub reduction_branch: String,
    pub critical_indices: Vec<usize>,
    pub regular_indices: Vec<usize>,
    pub dual_iterations: usize,
    /// Residual of the dual stationarity (interior) or the derivative limit
    /// (boundary).
    pub dual_residual: f64,
    /// Norm of the full objective gradient at the reported point.
    pub gradient_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sphere: Option<SphereReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport>,
    pub diagnostics: Diagnostics,
}

fn branch_name(branch: ReductionBranch) -> &'static str {
    match branch {
        ReductionBranch::FullRank => "full-rank",
        ReductionBranch::IndefiniteAuu => "indefinite-null-block",
        ReductionBranch::LinearDescent => "linear-descent",
        ReductionBranch::ZeroAuu => "zero-null-block",
        ReductionBranch::PsdAuu => "psd-null-block",
    }
}

fn to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

/// Run the full global-minimization pipeline.
pub fn solve(inst: &DwpInstance, tol: f64) -> Result<SolveReport> {
    let (sub, lift, branch) = match reduce(inst)? {
        ReductionOutcome::Unbounded { certificate, branch } => {
            return Ok(SolveReport {
                status: SolveStatus::Unbounded,
                sigma: None,
                value: None,
                x: None,
                sphere: None,
                certificate: Some(CertificateReport {
                    base: to_vec(&certificate.base),
                    direction: to_vec(&certificate.direction),
                }),
                diagnostics: Diagnostics {
                    reduction_branch: branch_name(branch).to_string(),
                    critical_indices: vec![],
                    regular_indices: vec![],
                    dual_iterations: 0,
                    dual_residual: 0.0,
                    gradient_residual: 0.0,
                },
            });
        }
        ReductionOutcome::Reduced { sub, lift, branch } => (sub, lift, branch),
    };

    let can = to_canonical(&sub)?;
    let dual_result = solve_dual(&can, tol)?;
    let set = primal_from_dual(&can, &dual_result)?;

    let (sigma, dual_iterations, dual_residual, critical, regular) = match &dual_result {
        DualResult::Interior {
            sigma_star,
            iterations,
        } => (
            *sigma_star,
            *iterations,
            crate::dual::dual_derivative(&can, *sigma_star)?,
            vec![],
            vec![],
        ),
        DualResult::Boundary {
            sigma0,
            g_limit,
            critical,
            regular,
        } => (*sigma0, 0, *g_limit, critical.clone(), regular.clone()),
    };

    let lift_x = |w: &DVector<f64>| lift_solution(&lift, &can.recover_x(w));
    let x = lift_x(&set.representative_w);
    let gradient_residual = inst.evaluate_gradient(&x)?.norm();

    let (status, sphere) = match &set.shape {
        SolutionShape::UniquePoint => (SolveStatus::GlobalMinimum, None),
        SolutionShape::Sphere {
            free,
            center,
            radius,
        } => {
            let fixed = (0..can.n())
                .filter(|i| !free.contains(i))
                .map(|j| (j, center[j]))
                .collect();
            // Two antipodal members of the sphere.
            let mut other = center.clone();
            other[free[0]] -= radius;
            let samples = vec![to_vec(&lift_x(&set.representative_w)), to_vec(&lift_x(&other))];
            (
                SolveStatus::GlobalSphere,
                Some(SphereReport {
                    center: to_vec(center),
                    radius: *radius,
                    fixed,
                    samples,
                }),
            )
        }
    };

    Ok(SolveReport {
        status,
        sigma: Some(sigma),
        value: Some(set.value),
        x: Some(to_vec(&x)),
        sphere,
        certificate: None,
        diagnostics: Diagnostics {
            reduction_branch: branch_name(branch).to_string(),
            critical_indices: critical,
            regular_indices: regular,
            dual_iterations,
            dual_residual,
            gradient_residual,
        },
    })
}
