//! Discrete Ginzburg-Landau energy on a uniform grid over the unit square and
//! its double-well majorant instance.

use nalgebra::{DMatrix, DVector};

use crate::error::{DwellError, Result};
use crate::instance::DwpInstance;

/// Uniform grid and material constants.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    /// Subintervals along x.
    pub s: usize,
    /// Subintervals along y.
    pub t: usize,
    /// Material constant alpha (> 0).
    pub gl_alpha: f64,
    /// Material constant beta (> 0).
    pub gl_beta: f64,
}

impl GridSpec {
    pub fn new(s: usize, t: usize, gl_alpha: f64, gl_beta: f64) -> Result<Self> {
        if s < 1 || t < 1 {
            return Err(DwellError::InvalidField {
                field: "s/t".into(),
                reason: "grid subdivisions must be >= 1".into(),
            });
        }
        if !(gl_alpha > 0.0) || !(gl_beta > 0.0) {
            return Err(DwellError::InvalidField {
                field: "alpha/beta".into(),
                reason: "material constants must be positive".into(),
            });
        }
        Ok(GridSpec { s, t, gl_alpha, gl_beta })
    }

    /// Number of grid nodes, (s+1)(t+1).
    pub fn nodes(&self) -> usize {
        (self.s + 1) * (self.t + 1)
    }

    /// Linear index of node (i, j), both 1-based: i + (j-1)(s+1), 0-based result.
    fn idx(&self, i: usize, j: usize) -> usize {
        (i - 1) + (j - 1) * (self.s + 1)
    }
}

/// Riemann-sum energy
/// `sum s/2t (e_{i+1,j}-e_{i,j})^2 + sum t/2s (e_{i,j+1}-e_{i,j})^2
///  + sum alpha/2st (1/2 e_{i,j}^2 - beta)^2` over i = 1..s, j = 1..t.
pub fn discrete_energy(spec: &GridSpec, e: &DVector<f64>) -> Result<f64> {
    if e.len() != spec.nodes() {
        return Err(DwellError::Dimension(format!(
            "field has {} entries but the grid has {} nodes",
            e.len(),
            spec.nodes()
        )));
    }
    let (s, t) = (spec.s as f64, spec.t as f64);
    let mut energy = 0.0;
    for j in 1..=spec.t {
        for i in 1..=spec.s {
            let e00 = e[spec.idx(i, j)];
            let dx = e[spec.idx(i + 1, j)] - e00;
            let dy = e[spec.idx(i, j + 1)] - e00;
            let well = 0.5 * e00 * e00 - spec.gl_beta;
            energy += s / (2.0 * t) * dx * dx
                + t / (2.0 * s) * dy * dy
                + spec.gl_alpha / (2.0 * s * t) * well * well;
        }
    }
    Ok(energy)
}

/// Assemble the double-well majorant instance: B = (alpha/ts)^{1/4} I,
/// A the difference-stencil matrix minus alpha beta/(ts) I, c = d = f = 0,
/// constant offset alpha beta^2 / 2.
pub fn build_dwp_instance(spec: &GridSpec) -> Result<DwpInstance> {
    let n = spec.nodes();
    let (s, t) = (spec.s as f64, spec.t as f64);
    let mut a = DMatrix::zeros(n, n);
    // Stencil accumulation over interior-facing cells (1-based i <= s, j <= t).
    for j in 1..=spec.t {
        for i in 1..=spec.s {
            let p = spec.idx(i, j);
            let right = spec.idx(i + 1, j);
            let up = spec.idx(i, j + 1);
            let wx = s / t;
            a[(p, p)] += wx;
            a[(right, right)] += wx;
            a[(p, right)] -= wx;
            a[(right, p)] -= wx;
            let wy = t / s;
            a[(p, p)] += wy;
            a[(up, up)] += wy;
            a[(p, up)] -= wy;
            a[(up, p)] -= wy;
        }
    }
    let shift = spec.gl_alpha * spec.gl_beta / (t * s);
    for k in 0..n {
        a[(k, k)] -= shift;
    }
    let b_scale = (spec.gl_alpha / (t * s)).powf(0.25);
    DwpInstance::new(
        a,
        DMatrix::identity(n, n) * b_scale,
        DVector::zeros(n),
        0.0,
        DVector::zeros(n),
        0.5 * spec.gl_alpha * spec.gl_beta * spec.gl_beta,
    )
}

/// Evaluate the majorant and the energy at the same field.
///
/// The majorant replaces the stencil-node sums of the well term by sums over
/// all nodes, so it dominates the energy whenever the fictitious boundary
/// rows (i = s+1 or j = t+1) carry no mass, and more generally whenever
/// `2 * (stencil-node mass) + (boundary mass) >= 4 beta` — the quartic
/// surplus then covers the extra `-beta` terms. Outside that regime (a field
/// concentrated on the boundary rows with large beta) the bound can dip
/// below the energy, so no dominance is asserted here.
pub fn upper_bound_check(spec: &GridSpec, e: &DVector<f64>) -> Result<(f64, f64)> {
    let inst = build_dwp_instance(spec)?;
    let bound = inst.evaluate_objective(e)?;
    let energy = discrete_energy(spec, e)?;
    Ok((bound, energy))
}

/// Split `||e||^2` into stencil-node mass (i <= s, j <= t) and the remainder
/// on the fictitious boundary rows.
pub fn mass_split(spec: &GridSpec, e: &DVector<f64>) -> Result<(f64, f64)> {
    if e.len() != spec.nodes() {
        return Err(DwellError::Dimension(format!(
            "field has {} entries but the grid has {} nodes",
            e.len(),
            spec.nodes()
        )));
    }
    let mut interior = 0.0;
    for j in 1..=spec.t {
        for i in 1..=spec.s {
            let v = e[spec.idx(i, j)];
            interior += v * v;
        }
    }
    Ok((interior, e.norm_squared() - interior))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn random_field(rng: &mut impl Rng, spec: &GridSpec) -> DVector<f64> {
        DVector::from_fn(spec.nodes(), |_, _| rng.random_range(-2.0..2.0))
    }

    // Random field rescaled into the regime where the majorant provably
    // dominates the energy: 2 * interior mass + boundary mass >= 4 beta.
    fn dominated_field(rng: &mut impl Rng, spec: &GridSpec) -> DVector<f64> {
        let mut e = random_field(rng, spec);
        let (interior, boundary) = mass_split(spec, &e).unwrap();
        let mass = 2.0 * interior + boundary;
        let need = 4.0 * spec.gl_beta;
        if mass < need {
            e *= (1.01 * need / mass.max(1e-12)).sqrt();
        }
        e
    }

    #[test]
    fn constant_well_field_has_zero_energy() {
        let spec = GridSpec::new(3, 2, 8.0, 1.0).unwrap();
        let e = DVector::from_element(spec.nodes(), (2.0 * spec.gl_beta).sqrt());
        assert_abs_diff_eq!(discrete_energy(&spec, &e).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn single_cell_zero_field() {
        let spec = GridSpec::new(1, 1, 8.0, 1.0).unwrap();
        let e = DVector::zeros(4);
        // Single well term (8/2)(0 - 1)^2 = 4.
        assert_abs_diff_eq!(discrete_energy(&spec, &e).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn energy_matches_quadratic_form_assembly() {
        // The difference part of the assembled A reproduces the explicit sums.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let spec = GridSpec::new(
                rng.random_range(1..5),
                rng.random_range(1..5),
                rng.random_range(0.5..10.0),
                rng.random_range(0.1..3.0),
            )
            .unwrap();
            let e = random_field(&mut rng, &spec);
            let inst = build_dwp_instance(&spec).unwrap();
            let n = spec.nodes();
            let shift = spec.gl_alpha * spec.gl_beta / (spec.s as f64 * spec.t as f64);
            let diff_part = inst.a() + DMatrix::identity(n, n) * shift;
            let quad = 0.5 * (e.transpose() * diff_part * &e)[(0, 0)];
            let (s, t) = (spec.s as f64, spec.t as f64);
            let mut loops = 0.0;
            for j in 1..=spec.t {
                for i in 1..=spec.s {
                    let e00 = e[(i - 1) + (j - 1) * (spec.s + 1)];
                    let dx = e[i + (j - 1) * (spec.s + 1)] - e00;
                    let dy = e[(i - 1) + j * (spec.s + 1)] - e00;
                    loops += s / (2.0 * t) * dx * dx + t / (2.0 * s) * dy * dy;
                }
            }
            assert_abs_diff_eq!(quad, loops, epsilon = 1e-12 * loops.abs().max(1.0));
        }
    }

    #[test]
    fn single_cell_instance_layout() {
        let spec = GridSpec::new(1, 1, 8.0, 1.0).unwrap();
        let inst = build_dwp_instance(&spec).unwrap();
        assert_eq!(inst.n(), 4);
        let a = inst.a();
        assert_abs_diff_eq!(a[(0, 0)], -6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(1, 1)], -7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(2, 2)], -7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(3, 3)], -8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(0, 1)], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(0, 2)], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(1, 0)], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(2, 0)], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(1, 2)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(1, 3)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(2, 3)], 0.0, epsilon = 1e-12);
        let expect_b = 8.0_f64.powf(0.25);
        assert_abs_diff_eq!(inst.b()[(0, 0)], expect_b, epsilon = 1e-12);
        assert_abs_diff_eq!(inst.constant_offset(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn beta_to_zero_limit_is_positive_semidefinite() {
        // With a vanishing beta shift the stencil matrix is a graph Laplacian.
        let spec = GridSpec::new(3, 2, 4.0, 1e-300).unwrap();
        let inst = build_dwp_instance(&spec).unwrap();
        let eig = nalgebra::SymmetricEigen::new(inst.a().clone());
        assert!(eig.eigenvalues.min() > -1e-10);
    }

    #[test]
    fn off_diagonal_pattern_matches_grid_adjacency() {
        let spec = GridSpec::new(3, 4, 2.0, 1.0).unwrap();
        let inst = build_dwp_instance(&spec).unwrap();
        let a = inst.a();
        let sp = spec.s + 1;
        for p in 0..spec.nodes() {
            for q in (p + 1)..spec.nodes() {
                let (ip, jp) = (p % sp + 1, p / sp + 1);
                // Stencil edges come only from cells with i <= s, j <= t.
                let right_edge = q == p + 1 && ip <= spec.s && jp <= spec.t;
                let up_edge = q == p + sp && ip <= spec.s && jp <= spec.t;
                if right_edge || up_edge {
                    assert!(a[(p, q)] < 0.0, "missing edge between {} and {}", p, q);
                } else {
                    assert_eq!(a[(p, q)], 0.0, "unexpected coupling {} {}", p, q);
                }
            }
        }
    }

    #[test]
    fn bound_dominates_energy_on_random_fields() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let spec = GridSpec::new(
                rng.random_range(1..5),
                rng.random_range(1..5),
                rng.random_range(0.5..10.0),
                rng.random_range(0.1..3.0),
            )
            .unwrap();
            let e = dominated_field(&mut rng, &spec);
            let (bound, energy) = upper_bound_check(&spec, &e).unwrap();
            assert!(bound >= energy - 1e-9, "bound {} < energy {}", bound, energy);
        }
    }

    #[test]
    fn bound_can_undershoot_outside_dominance_regime() {
        // A field supported on the fictitious boundary rows with large beta:
        // the majorant's extra -beta terms are not covered by any quartic
        // surplus, so it dips below the energy.
        let spec = GridSpec::new(2, 2, 8.0, 3.0).unwrap();
        let mut e = DVector::zeros(spec.nodes());
        e[spec.nodes() - 1] = 1.0;
        let (bound, energy) = upper_bound_check(&spec, &e).unwrap();
        assert!(bound < energy);
    }

    #[test]
    fn bound_at_special_fields() {
        let spec = GridSpec::new(2, 2, 8.0, 1.0).unwrap();
        let zero = DVector::zeros(spec.nodes());
        let (bound, energy) = upper_bound_check(&spec, &zero).unwrap();
        assert!(bound >= energy);
        let well = DVector::from_element(spec.nodes(), (2.0 * spec.gl_beta).sqrt());
        let (bound, energy) = upper_bound_check(&spec, &well).unwrap();
        assert_abs_diff_eq!(energy, 0.0, epsilon = 1e-12);
        assert!(bound >= 0.0);
    }

    #[test]
    fn invalid_spec_rejected() {
        assert!(GridSpec::new(0, 1, 1.0, 1.0).is_err());
        assert!(GridSpec::new(1, 1, 0.0, 1.0).is_err());
        assert!(GridSpec::new(1, 1, 1.0, 0.0).is_err());
    }
}
