//! Space reduction over the null space of B.
//!
//! Splits x = Uy + Vz with U spanning null(B), minimizes analytically over y,
//! and either certifies unboundedness or emits an equivalent lower-dimensional
//! instance whose Gram matrix B^T B is positive definite.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::instance::DwpInstance;

/// Relative singular-value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Relative eigenvalue floor for the positive-semidefiniteness test of A_uu.
pub const PSD_TOL: f64 = 1e-9;

/// Orthonormal split of R^n into null(B) and its complement.
#[derive(Debug, Clone)]
pub struct NullSpaceSplit {
    /// n x r, orthonormal columns spanning null(B).
    pub u: DMatrix<f64>,
    /// n x (n - r), orthonormal columns spanning the orthogonal complement.
    pub v: DMatrix<f64>,
    /// Rank deficiency of B.
    pub r: usize,
}

/// Descent path certifying that the objective is unbounded below.
#[derive(Debug, Clone)]
pub struct DescentCertificate {
    pub base: DVector<f64>,
    pub direction: DVector<f64>,
}

/// Map from reduced z-space back to x-space solutions.
#[derive(Debug, Clone)]
pub struct LiftMap {
    v: DMatrix<f64>,
    /// U A_uu^+ U^T, zero-dimension aware (n x n; zero matrix when r = 0).
    pinv_part: DMatrix<f64>,
    /// U W, basis of the free y-directions (all lifts x + U W beta share the value).
    pub free_directions: DMatrix<f64>,
    a: DMatrix<f64>,
    f: DVector<f64>,
    identity: bool,
}

impl LiftMap {
    fn identity(n: usize) -> Self {
        LiftMap {
            v: DMatrix::identity(n, n),
            pinv_part: DMatrix::zeros(n, n),
            free_directions: DMatrix::zeros(n, 0),
            a: DMatrix::zeros(n, n),
            f: DVector::zeros(n),
            identity: true,
        }
    }

    /// Lift a reduced-space point z to x = U y*(0) + V z, with
    /// y* = -A_uu^+ U^T (A V z - f) (the beta = 0 representative).
    pub fn lift(&self, z: &DVector<f64>) -> DVector<f64> {
        if self.identity {
            return z.clone();
        }
        let vz = &self.v * z;
        &vz - &self.pinv_part * (&self.a * &vz - &self.f)
    }
}

/// Which of the four reduction branches fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionBranch {
    /// B already has full column rank; nothing to do.
    FullRank,
    /// A_uu has a negative eigenvalue.
    IndefiniteAuu,
    /// A_uu = 0 with a surviving linear term in y.
    LinearDescent,
    /// A_uu = 0 and y vanishes from the problem entirely.
    ZeroAuu,
    /// A_uu is PSD with positive rank and the stationarity system is consistent.
    PsdAuu,
}

#[derive(Debug, Clone)]
pub enum ReductionOutcome {
    Unbounded {
        certificate: DescentCertificate,
        branch: ReductionBranch,
    },
    Reduced {
        sub: DwpInstance,
        lift: LiftMap,
        branch: ReductionBranch,
    },
}

/// Orthonormal bases for null(B) and its complement via the spectral
/// decomposition of B^T B. The cutoff is relative on the Gram eigenvalues so
/// that every direction kept here survives the positive-definiteness check
/// of the congruence transform, which uses the same eigenvalue scale.
pub fn null_space_basis(b: &DMatrix<f64>) -> NullSpaceSplit {
    let n = b.ncols();
    let gram = b.transpose() * b;
    let eig = nalgebra::SymmetricEigen::new(gram);
    let eigs: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let eig_max = eigs.iter().cloned().fold(0.0, f64::max);
    let cutoff = RANK_TOL * eig_max;
    let mut null_cols = Vec::new();
    let mut range_cols = Vec::new();
    for (i, &l) in eigs.iter().enumerate() {
        if l <= cutoff {
            null_cols.push(i);
        } else {
            range_cols.push(i);
        }
    }
    let col = |idx: &[usize]| {
        DMatrix::from_fn(n, idx.len(), |i, j| eig.eigenvectors[(i, idx[j])])
    };
    NullSpaceSplit {
        u: col(&null_cols),
        v: col(&range_cols),
        r: null_cols.len(),
    }
}

/// Symmetric pseudoinverse with relative eigenvalue cutoff; also returns an
/// orthonormal basis of the (numerical) null space.
fn sym_pinv(m: &DMatrix<f64>, rel_tol: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let k = m.nrows();
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let scale = eig.eigenvalues.amax().max(1.0);
    let mut pinv = DMatrix::zeros(k, k);
    let mut null_cols = Vec::new();
    for i in 0..k {
        let l = eig.eigenvalues[i];
        if l.abs() > rel_tol * scale {
            let q = eig.eigenvectors.column(i);
            pinv += q * q.transpose() / l;
        } else {
            null_cols.push(i);
        }
    }
    let null_basis = DMatrix::from_fn(k, null_cols.len(), |i, j| {
        eig.eigenvectors[(i, null_cols[j])]
    });
    (pinv, null_basis)
}

/// Scale a unit linear-descent direction so the certified path passes well
/// below -10^6 by t = 10^3.
fn scale_linear_direction(direction: DVector<f64>, slope: f64) -> DVector<f64> {
    let kappa = (2e3 / slope).max(1.0);
    direction * kappa
}

pub fn reduce(inst: &DwpInstance) -> Result<ReductionOutcome> {
    let n = inst.n();
    let split = null_space_basis(inst.b());
    if split.r == 0 {
        return Ok(ReductionOutcome::Reduced {
            sub: inst.clone(),
            lift: LiftMap::identity(n),
            branch: ReductionBranch::FullRank,
        });
    }
    let u = &split.u;
    let v = &split.v;
    let a_uu = u.transpose() * inst.a() * u;
    let a_uv = u.transpose() * inst.a() * v;
    let utf = u.transpose() * inst.f();

    let eig = nalgebra::SymmetricEigen::new(a_uu.clone());
    let eig_scale = eig.eigenvalues.amax().max(1.0);
    let min_idx = eig.eigenvalues.imin();
    let min_eig = eig.eigenvalues[min_idx];

    if min_eig < -PSD_TOL * eig_scale {
        // Negative curvature inside null(B): quadratic descent along U q.
        let q = eig.eigenvectors.column(min_idx);
        let mut direction = u * q;
        if inst.f().dot(&direction) < 0.0 {
            direction = -direction;
        }
        let kappa = (2.0 / (-min_eig).sqrt()).max(1.0);
        return Ok(ReductionOutcome::Unbounded {
            certificate: DescentCertificate {
                base: DVector::zeros(n),
                direction: direction * kappa,
            },
            branch: ReductionBranch::IndefiniteAuu,
        });
    }

    let zero_scale = 1e-12 * inst.a().amax().max(inst.f().amax()).max(1.0);
    let auu_is_zero = a_uu.amax() <= 1e-12 * inst.a().amax().max(1.0);

    if auu_is_zero {
        if a_uv.amax() > zero_scale || utf.amax() > zero_scale {
            // Surviving linear term in y: pick (z0, y_hat) with negative slope.
            let (base_z, residual) = linear_descent_seed(&a_uv, &utf);
            let slope_vec = residual.clone();
            let y_hat = -&slope_vec / slope_vec.norm();
            let slope = slope_vec.norm();
            let base = v * &base_z;
            let direction = scale_linear_direction(u * y_hat, slope);
            return Ok(ReductionOutcome::Unbounded {
                certificate: DescentCertificate { base, direction },
                branch: ReductionBranch::LinearDescent,
            });
        }
        // y is absent from objective and constraint: drop it.
        let sub = reduced_instance(inst, u, v, &DMatrix::zeros(split.r, split.r))?;
        let lift = LiftMap {
            v: v.clone(),
            pinv_part: DMatrix::zeros(n, n),
            free_directions: u.clone(),
            a: inst.a().clone(),
            f: inst.f().clone(),
            identity: false,
        };
        return Ok(ReductionOutcome::Reduced {
            sub,
            lift,
            branch: ReductionBranch::ZeroAuu,
        });
    }

    // A_uu PSD with rank >= 1. The inner minimum over y is finite only when
    // the stationarity system is consistent along null(A_uu).
    let (auu_pinv, w_basis) = sym_pinv(&a_uu, PSD_TOL);
    if w_basis.ncols() > 0 {
        let m = w_basis.transpose() * &a_uv;
        let g = w_basis.transpose() * &utf;
        if m.amax() > zero_scale || g.amax() > zero_scale {
            let (base_z, residual) = linear_descent_seed(&m, &g);
            let y_hat_w = -&residual / residual.norm();
            let slope = residual.norm();
            let base = v * &base_z;
            let direction = scale_linear_direction(u * (&w_basis * y_hat_w), slope);
            return Ok(ReductionOutcome::Unbounded {
                certificate: DescentCertificate { base, direction },
                branch: ReductionBranch::PsdAuu,
            });
        }
    }

    let sub = reduced_instance(inst, u, v, &auu_pinv)?;
    let lift = LiftMap {
        v: v.clone(),
        pinv_part: u * &auu_pinv * u.transpose(),
        free_directions: u * &w_basis,
        a: inst.a().clone(),
        f: inst.f().clone(),
        identity: false,
    };
    Ok(ReductionOutcome::Reduced {
        sub,
        lift,
        branch: ReductionBranch::PsdAuu,
    })
}

/// Seed (z0, M z0 - g) for a linear-descent certificate, guaranteeing the
/// residual is nonzero given M != 0 or g != 0.
fn linear_descent_seed(m: &DMatrix<f64>, g: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let cols = m.ncols();
    if g.amax() >= m.amax() {
        let z0 = DVector::zeros(cols);
        (z0, -g.clone())
    } else {
        // Take the transposed row of largest norm; then (M z0)_k = ||row_k||^2 > 0.
        let k = (0..m.nrows())
            .max_by(|&i, &j| {
                m.row(i)
                    .norm()
                    .partial_cmp(&m.row(j).norm())
                    .unwrap()
            })
            .unwrap();
        let z0 = m.row(k).transpose();
        (z0.clone(), m * z0 - g)
    }
}

/// Assemble the reduced instance over z per the analytic elimination of y.
fn reduced_instance(
    inst: &DwpInstance,
    u: &DMatrix<f64>,
    v: &DMatrix<f64>,
    auu_pinv: &DMatrix<f64>,
) -> Result<DwpInstance> {
    let projector = DMatrix::identity(inst.n(), inst.n()) - inst.a() * u * auu_pinv * u.transpose();
    let a_hat = &projector * inst.a();
    let f_hat = &projector * inst.f();
    let a_sub = v.transpose() * &a_hat * v;
    let a_sub = (&a_sub + a_sub.transpose()) * 0.5;
    let f_sub = v.transpose() * f_hat;
    let b_sub = inst.b() * v;
    let offset = inst.constant_offset()
        - 0.5 * (inst.f().transpose() * u * auu_pinv * u.transpose() * inst.f())[(0, 0)];
    DwpInstance::new(a_sub, b_sub, inst.c().clone(), inst.d(), f_sub, offset)
}

/// Lift a reduced-space solution back to x-space.
pub fn lift_solution(lift: &LiftMap, z: &DVector<f64>) -> DVector<f64> {
    lift.lift(z)
}
