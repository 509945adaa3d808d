//! Raw double-well problem data: the quartic objective
//! `1/2 (1/2 ||Bx - c||^2 - d)^2 + 1/2 x^T A x - f^T x`, its gradient,
//! and the JSON on-disk format.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{DwellError, Result};

/// Relative tolerance under which an almost-symmetric `A` is silently
/// symmetrized at load; larger violations are rejected.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A double-well potential problem instance.
///
/// Immutable after construction; all operations are pure functions.
#[derive(Debug, Clone, PartialEq)]
pub struct DwpInstance {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DVector<f64>,
    d: f64,
    f: DVector<f64>,
    constant_offset: f64,
}

impl DwpInstance {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DVector<f64>,
        d: f64,
        f: DVector<f64>,
        constant_offset: f64,
    ) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(DwellError::Dimension(format!(
                "A must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.ncols() != n {
            return Err(DwellError::Dimension(format!(
                "B has {} columns but A is {}x{}",
                b.ncols(),
                n,
                n
            )));
        }
        let m = b.nrows();
        if m == 0 {
            return Err(DwellError::Dimension("B must have at least one row".into()));
        }
        if c.len() != m {
            return Err(DwellError::Dimension(format!(
                "c has length {} but B has {} rows",
                c.len(),
                m
            )));
        }
        if f.len() != n {
            return Err(DwellError::Dimension(format!(
                "f has length {} but A is {}x{}",
                f.len(),
                n,
                n
            )));
        }
        if b.iter().all(|&v| v == 0.0) {
            return Err(DwellError::ZeroB);
        }
        let a_max = a.amax().max(1.0);
        let deviation = (&a - a.transpose()).amax();
        let tolerance = SYMMETRY_TOL * a_max;
        if deviation > tolerance {
            return Err(DwellError::Asymmetric {
                deviation,
                tolerance,
            });
        }
        // Symmetrize residual roundoff so downstream eigensolves see exact symmetry.
        let a = (&a + a.transpose()) * 0.5;
        Ok(Self {
            a,
            b,
            c,
            d,
            f,
            constant_offset,
        })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn f(&self) -> &DVector<f64> {
        &self.f
    }

    pub fn constant_offset(&self) -> f64 {
        self.constant_offset
    }

    /// Gram matrix `B^T B`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.b.transpose() * &self.b
    }

    /// Objective value `1/2 (1/2 ||Bx - c||^2 - d)^2 + 1/2 x^T A x - f^T x + offset`.
    pub fn evaluate_objective(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_point(x)?;
        let residual = &self.b * x - &self.c;
        let xi = 0.5 * residual.norm_squared() - self.d;
        let quad = 0.5 * (x.transpose() * &self.a * x)[(0, 0)] - self.f.dot(x);
        Ok(0.5 * xi * xi + quad + self.constant_offset)
    }

    /// Gradient `(1/2 ||Bx - c||^2 - d) B^T (Bx - c) + A x - f`.
    pub fn evaluate_gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_point(x)?;
        let residual = &self.b * x - &self.c;
        let xi = 0.5 * residual.norm_squared() - self.d;
        Ok(self.b.transpose() * residual * xi + &self.a * x - &self.f)
    }

    fn check_point(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n() {
            return Err(DwellError::Dimension(format!(
                "point has length {} but instance dimension is {}",
                x.len(),
                self.n()
            )));
        }
        Ok(())
    }

    pub fn load(bytes: &[u8]) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_slice(bytes)?;
        doc.try_into()
    }

    pub fn save(&self) -> Vec<u8> {
        let doc = InstanceDoc::from(self);
        serde_json::to_vec_pretty(&doc).expect("instance serialization cannot fail")
    }
}

/// On-disk JSON schema for a [`DwpInstance`].
#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub d: f64,
    pub f: Vec<f64>,
    #[serde(default)]
    pub constant_offset: f64,
}

fn matrix_from_rows(name: &str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    if rows.len() != nrows {
        return Err(DwellError::InvalidField {
            field: name.into(),
            reason: format!("expected {} rows, got {}", nrows, rows.len()),
        });
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(DwellError::InvalidField {
                field: name.into(),
                reason: format!("row {} has length {}, expected {}", i, row.len(), ncols),
            });
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl TryFrom<InstanceDoc> for DwpInstance {
    type Error = DwellError;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        let a = matrix_from_rows("A", &doc.a, doc.n, doc.n)?;
        let b = matrix_from_rows("B", &doc.b, doc.m, doc.n)?;
        if doc.c.len() != doc.m {
            return Err(DwellError::InvalidField {
                field: "c".into(),
                reason: format!("length {} does not match m = {}", doc.c.len(), doc.m),
            });
        }
        if doc.f.len() != doc.n {
            return Err(DwellError::InvalidField {
                field: "f".into(),
                reason: format!("length {} does not match n = {}", doc.f.len(), doc.n),
            });
        }
        DwpInstance::new(
            a,
            b,
            DVector::from_vec(doc.c),
            doc.d,
            DVector::from_vec(doc.f),
            doc.constant_offset,
        )
    }
}

impl From<&DwpInstance> for InstanceDoc {
    fn from(inst: &DwpInstance) -> Self {
        let row_vec = |m: &DMatrix<f64>| {
            (0..m.nrows())
                .map(|i| m.row(i).iter().copied().collect())
                .collect()
        };
        InstanceDoc {
            n: inst.n(),
            m: inst.m(),
            a: row_vec(&inst.a),
            b: row_vec(&inst.b),
            c: inst.c.iter().copied().collect(),
            d: inst.d,
            f: inst.f.iter().copied().collect(),
            constant_offset: inst.constant_offset,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::example1;
    use approx::assert_abs_diff_eq;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn objective_at_reported_minimizer() {
        let inst = example1();
        let v = inst.evaluate_objective(&dvector![-7.748]).unwrap();
        assert_abs_diff_eq!(v, -49.109, epsilon = 1e-2);
    }

    #[test]
    fn objective_at_origin() {
        let inst = example1();
        // 1/2 (1/2 * 4 - 14)^2 = 72
        let v = inst.evaluate_objective(&dvector![0.0]).unwrap();
        assert_abs_diff_eq!(v, 72.0, epsilon = 1e-12);
    }

    #[test]
    fn objective_zero_input() {
        let inst = DwpInstance::new(
            DMatrix::zeros(2, 2),
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            0.0,
            DVector::zeros(2),
            0.0,
        )
        .unwrap();
        assert_eq!(inst.evaluate_objective(&DVector::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn gradient_near_zero_at_minimizer() {
        let inst = example1();
        // The minimizer is quoted to three decimals; with curvature ~25 at
        // the bottom of the well the gradient can legitimately reach ~1.3e-2.
        let g = inst.evaluate_gradient(&dvector![-7.748]).unwrap();
        assert!(g.norm() <= 2.5e-2, "gradient norm {}", g.norm());
    }

    #[test]
    fn gradient_zero_instance() {
        let inst = DwpInstance::new(
            DMatrix::zeros(2, 2),
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            0.0,
            DVector::zeros(2),
            0.0,
        )
        .unwrap();
        let g = inst.evaluate_gradient(&DVector::zeros(2)).unwrap();
        assert_eq!(g, DVector::zeros(2));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let inst = crate::oracle::random_instance(&mut rng, 3);
            let x = DVector::from_fn(inst.n(), |_, _| rng.random_range(-3.0..3.0));
            let g = inst.evaluate_gradient(&x).unwrap();
            let h = 1e-5;
            let scale = g.norm().max(1.0);
            for k in 0..inst.n() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let fd = (inst.evaluate_objective(&xp).unwrap()
                    - inst.evaluate_objective(&xm).unwrap())
                    / (2.0 * h);
                assert!(
                    (g[k] - fd).abs() <= 1e-6 * scale.max(fd.abs()),
                    "component {}: analytic {} vs fd {}",
                    k,
                    g[k],
                    fd
                );
            }
        }
    }

    #[test]
    fn coercive_when_gram_positive_definite() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let inst = example1();
        for _ in 0..20 {
            let mut u = DVector::from_fn(inst.n(), |_, _| rng.random_range(-1.0..1.0f64));
            if u.norm() < 1e-6 {
                u[0] = 1.0;
            }
            u /= u.norm();
            let lo = inst.evaluate_objective(&(&u * 1e2)).unwrap();
            let hi = inst.evaluate_objective(&(&u * 1e3)).unwrap();
            assert!(hi > lo, "objective must grow along {:?}", u);
        }
    }

    #[test]
    fn load_example1_document() {
        let doc = br#"{
            "n": 1, "m": 2,
            "A": [[-2.0]],
            "B": [[0.0], [-1.0]],
            "c": [0.0, 2.0],
            "d": 14.0,
            "f": [1.0]
        }"#;
        let inst = DwpInstance::load(doc).unwrap();
        assert_eq!(inst.n(), 1);
        assert_eq!(inst.m(), 2);
        assert_eq!(inst.constant_offset(), 0.0);
        assert_eq!(inst, example1());
    }

    #[test]
    fn save_load_round_trip() {
        let inst = example1();
        let again = DwpInstance::load(&inst.save()).unwrap();
        assert_eq!(inst, again);
    }

    proptest::proptest! {
        #[test]
        fn save_load_round_trip_arbitrary(
            seed in 0u64..1_000_000,
            n in 1usize..5,
            m in 1usize..5,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let half = DMatrix::from_fn(n, n, |_, _| rng.random_range(-5.0..5.0));
            let a = (&half + half.transpose()) * 0.5;
            let mut b = DMatrix::from_fn(m, n, |_, _| rng.random_range(-5.0..5.0));
            b[(0, 0)] += 1.0; // keep B nonzero
            let c = DVector::from_fn(m, |_, _| rng.random_range(-5.0..5.0));
            let f = DVector::from_fn(n, |_, _| rng.random_range(-5.0..5.0));
            let inst = DwpInstance::new(a, b, c, rng.random_range(-10.0..40.0), f, 0.0).unwrap();
            let again = DwpInstance::load(&inst.save()).unwrap();
            proptest::prop_assert_eq!(inst, again);
        }
    }

    #[test]
    fn asymmetric_a_rejected() {
        let doc = br#"{
            "n": 2, "m": 1,
            "A": [[1.0, 2.0], [1.0, 1.0]],
            "B": [[1.0, 0.0]],
            "c": [0.0],
            "d": 0.0,
            "f": [0.0, 0.0]
        }"#;
        assert!(matches!(
            DwpInstance::load(doc),
            Err(DwellError::Asymmetric { .. })
        ));
    }

    #[test]
    fn zero_b_rejected() {
        let r = DwpInstance::new(
            dmatrix![1.0],
            dmatrix![0.0],
            dvector![0.0],
            0.0,
            dvector![0.0],
            0.0,
        );
        assert!(matches!(r, Err(DwellError::ZeroB)));
    }
}
