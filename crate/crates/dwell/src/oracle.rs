//! Desk-scale verification oracles: dense grid search, multistart descent,
//! and a 1-D stationarity scan over the canonical variable xi.
//!
//! The multistart and grid searches run their independent work items through
//! rayon when the `parallel` feature is enabled (the default); results are
//! merged by value with index tie-break, so both backends return identical
//! output for the same seed.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagonalize::CanonicalInstance;
use crate::error::{DwellError, Result};
use crate::instance::DwpInstance;

/// Work-execution backend for the embarrassingly parallel oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Sequential,
    /// Rayon thread pool; falls back to sequential when the `parallel`
    /// feature is disabled.
    Parallel,
}

impl Default for Backend {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Backend::Parallel
        } else {
            Backend::Sequential
        }
    }
}

#[cfg(feature = "parallel")]
fn run_indexed<T: Send>(
    backend: Backend,
    count: usize,
    f: impl Fn(usize) -> T + Sync + Send,
) -> Vec<T> {
    use rayon::prelude::*;
    match backend {
        Backend::Parallel => (0..count).into_par_iter().map(f).collect(),
        Backend::Sequential => (0..count).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_indexed<T: Send>(
    _backend: Backend,
    count: usize,
    f: impl Fn(usize) -> T + Sync + Send,
) -> Vec<T> {
    (0..count).map(f).collect()
}

/// A stationary point of the canonical objective found by the xi-scan.
#[derive(Debug, Clone)]
pub struct StationaryPoint {
    pub xi: f64,
    pub w: DVector<f64>,
    pub value: f64,
    pub kind: StationaryKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryKind {
    /// Root of g on a pole-free interval.
    Regular,
    /// Candidate at xi = -alpha_i with vanishing numerator.
    SingularBranch,
}

fn g_general(can: &CanonicalInstance, xi: f64) -> f64 {
    let w = DVector::from_fn(can.n(), |i, _| {
        (can.psi[i] + xi * can.phi[i]) / (can.alpha[i] + xi)
    });
    can.lambda_operator(&w) - xi
}

fn w_general(can: &CanonicalInstance, xi: f64) -> DVector<f64> {
    DVector::from_fn(can.n(), |i, _| {
        (can.psi[i] + xi * can.phi[i]) / (can.alpha[i] + xi)
    })
}

/// Scan for stationary points of the canonical objective: roots of
/// g(xi) = Lambda(w(xi)) - xi on each pole-free subinterval, plus singular
/// candidates at the poles. Sample-limited; roots between grid points of the
/// same sign pattern are missed.
pub fn stationary_scan(
    can: &CanonicalInstance,
    xi_range: (f64, f64),
    samples: usize,
) -> Vec<StationaryPoint> {
    assert!(samples >= 100, "scan needs at least 100 samples");
    let (lo, hi) = xi_range;
    let mut poles: Vec<f64> = can.alpha.iter().map(|&a| -a).collect();
    poles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    poles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut cuts = vec![lo];
    for &p in &poles {
        if p > lo && p < hi {
            cuts.push(p);
        }
    }
    cuts.push(hi);

    let mut points = Vec::new();
    let pole_margin = 1e-9 * (1.0 + hi.abs().max(lo.abs()));
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0] + pole_margin, pair[1] - pole_margin);
        if b <= a {
            continue;
        }
        let local = ((b - a) / (hi - lo) * samples as f64).ceil().max(8.0) as usize;
        let mut prev_xi = a;
        let mut prev_g = g_general(can, prev_xi);
        for k in 1..=local {
            let xi = a + (b - a) * k as f64 / local as f64;
            let g = g_general(can, xi);
            if prev_g == 0.0 || prev_g.signum() != g.signum() {
                let root = bisect(|x| g_general(can, x), prev_xi, xi, 1e-10);
                let w = w_general(can, root);
                points.push(StationaryPoint {
                    xi: root,
                    value: can.objective(&w),
                    w,
                    kind: StationaryKind::Regular,
                });
            }
            prev_xi = xi;
            prev_g = g;
        }
    }

    // Singular-branch candidates at each pole with vanishing numerators.
    let num_tol = 1e-8 * (can.psi.amax() + can.phi.amax()).max(1.0);
    for &pole in &poles {
        if pole < lo || pole > hi {
            continue;
        }
        let critical: Vec<usize> = (0..can.n())
            .filter(|&i| (can.alpha[i] + pole).abs() < 1e-9 * can.alpha.amax().max(1.0))
            .collect();
        if critical.is_empty()
            || critical
                .iter()
                .any(|&i| (can.psi[i] + pole * can.phi[i]).abs() > num_tol)
        {
            continue;
        }
        let mut w = DVector::zeros(can.n());
        let mut fixed_sum = 0.0;
        let mut phi_sum = 0.0;
        for i in 0..can.n() {
            if critical.contains(&i) {
                w[i] = can.phi[i];
                phi_sum += can.phi[i] * can.phi[i];
            } else {
                w[i] = (can.psi[i] + pole * can.phi[i]) / (can.alpha[i] + pole);
                fixed_sum += w[i] * w[i] - 2.0 * can.phi[i] * w[i];
            }
        }
        let rho2 = phi_sum - fixed_sum + 2.0 * pole + 2.0 * can.nu;
        if rho2 < 0.0 {
            continue;
        }
        w[critical[0]] += rho2.sqrt();
        points.push(StationaryPoint {
            xi: pole,
            value: can.objective(&w),
            w,
            kind: StationaryKind::SingularBranch,
        });
    }
    points
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a <= tol {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa.signum() == fm.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Exhaustive lattice search. Guarded to n <= 3.
pub fn grid_min(
    inst: &DwpInstance,
    box_bounds: &[(f64, f64)],
    steps: usize,
) -> Result<(DVector<f64>, f64)> {
    grid_min_with(inst, box_bounds, steps, Backend::default())
}

pub fn grid_min_with(
    inst: &DwpInstance,
    box_bounds: &[(f64, f64)],
    steps: usize,
    backend: Backend,
) -> Result<(DVector<f64>, f64)> {
    let n = inst.n();
    if n > 3 {
        return Err(DwellError::Dimension(format!(
            "grid search is limited to n <= 3, instance has n = {}",
            n
        )));
    }
    if box_bounds.len() != n || steps < 10 {
        return Err(DwellError::Dimension(
            "grid search needs one interval per dimension and steps >= 10".into(),
        ));
    }
    let coord = |dim: usize, k: usize| {
        let (lo, hi) = box_bounds[dim];
        lo + (hi - lo) * k as f64 / steps as f64
    };
    // Parallelize over the slices of the first coordinate.
    let slices = run_indexed(backend, steps + 1, |k0| {
        let mut best_v = f64::INFINITY;
        let mut best_x = DVector::zeros(n);
        let mut x = DVector::zeros(n);
        x[0] = coord(0, k0);
        let inner = (steps + 1).pow(n as u32 - 1);
        for rest in 0..inner {
            let mut acc = rest;
            for dim in 1..n {
                x[dim] = coord(dim, acc % (steps + 1));
                acc /= steps + 1;
            }
            let v = inst.evaluate_objective(&x).expect("dimensions checked");
            if v < best_v {
                best_v = v;
                best_x.copy_from(&x);
            }
        }
        (best_v, best_x)
    });
    let (value, x) = slices
        .into_iter()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .expect("at least one lattice slice");
    Ok((x, value))
}

/// Best local minimum over seeded gradient-descent runs. Deterministic for a
/// given seed regardless of backend.
pub fn multistart_min(
    inst: &DwpInstance,
    starts: usize,
    seed: u64,
) -> Result<(DVector<f64>, f64)> {
    multistart_min_with(inst, starts, seed, Backend::default())
}

pub fn multistart_min_with(
    inst: &DwpInstance,
    starts: usize,
    seed: u64,
    backend: Backend,
) -> Result<(DVector<f64>, f64)> {
    if starts == 0 {
        return Err(DwellError::Dimension("multistart needs starts >= 1".into()));
    }
    let radius = start_box_radius(inst);
    let results = run_indexed(backend, starts, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(k as u64 + 1)));
        let x0 = DVector::from_fn(inst.n(), |_, _| rng.random_range(-radius..radius));
        descend(inst, x0)
    });
    let (k, (x, value)) = results
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.1.partial_cmp(&b.1).unwrap().then(i.cmp(j)))
        .expect("starts >= 1");
    let _ = k;
    Ok((x, value))
}

/// Scale for the random start box: large enough to cover the well ring
/// 1/2 ||Bx - c||^2 ~ d plus the linear-term displacement.
fn start_box_radius(inst: &DwpInstance) -> f64 {
    let gram = inst.gram();
    let eig = nalgebra::SymmetricEigen::new(gram);
    let sigma_min = eig.eigenvalues.min().max(1e-6).sqrt();
    let reach = (inst.c().norm() + (2.0 * inst.d().abs()).sqrt()) / sigma_min;
    2.0 * (reach + inst.f().norm() + 1.0)
}

/// Gradient descent with backtracking; returns the terminal point and value.
fn descend(inst: &DwpInstance, mut x: DVector<f64>) -> (DVector<f64>, f64) {
    let mut value = inst.evaluate_objective(&x).expect("dimensions fixed");
    let mut step = 1.0;
    for _ in 0..5_000 {
        let grad = inst.evaluate_gradient(&x).expect("dimensions fixed");
        let gnorm = grad.norm();
        if gnorm <= 1e-12 * value.abs().max(1.0) {
            break;
        }
        let mut moved = false;
        for _ in 0..60 {
            let trial = &x - &grad * step;
            let tv = inst.evaluate_objective(&trial).expect("dimensions fixed");
            if tv <= value - 1e-4 * step * gnorm * gnorm {
                x = trial;
                value = tv;
                step *= 2.0;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (x, value)
}

/// Random test instance: entries of A, B, f, c uniform on [-3, 3], d on
/// [-5, 40], A symmetrized, B guaranteed nonzero.
pub fn random_instance(rng: &mut impl Rng, max_n: usize) -> DwpInstance {
    loop {
        let n = rng.random_range(1..=max_n);
        let m = rng.random_range(1..=max_n);
        let raw = nalgebra::DMatrix::from_fn(n, n, |_, _| rng.random_range(-3.0..3.0));
        let a = (&raw + raw.transpose()) * 0.5;
        let b = nalgebra::DMatrix::from_fn(m, n, |_, _| rng.random_range(-3.0..3.0));
        let c = DVector::from_fn(m, |_, _| rng.random_range(-3.0..3.0));
        let f = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        let d = rng.random_range(-5.0..40.0);
        if let Ok(inst) = DwpInstance::new(a, b, c, d, f, 0.0) {
            return inst;
        }
    }
}

/// Random instance rigged toward the boundary/hard case: diagonal A with
/// B = I, and f chosen so psi_i + sigma0 phi_i = 0 on the minimal-alpha
/// coordinate.
pub fn rigged_hard_case(rng: &mut impl Rng, max_n: usize) -> DwpInstance {
    let n = rng.random_range(1..=max_n);
    let mut diag: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let sigma0 = -diag[0];
    let a = nalgebra::DMatrix::from_diagonal(&DVector::from_vec(diag));
    let c = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
    let mut f = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
    // psi = f and phi = c when B = I and A is ascending diagonal.
    f[0] = -sigma0 * c[0];
    let d = rng.random_range(10.0..40.0);
    DwpInstance::new(a, nalgebra::DMatrix::identity(n, n), c, d, f, 0.0).unwrap()
}
