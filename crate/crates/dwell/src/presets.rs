//! Small built-in instances used throughout the test suites and the docs.

use nalgebra::{dmatrix, dvector, DMatrix, DVector};

use crate::instance::DwpInstance;

/// 1-D double well: A = -2, B = (0, -1)^T, c = (0, 2)^T, d = 14, f = 1.
/// Global minimum at x = -7.748 with value -49.109.
pub fn example1() -> DwpInstance {
    DwpInstance::new(
        dmatrix![-2.0],
        dmatrix![0.0; -1.0],
        dvector![0.0, 2.0],
        14.0,
        dvector![1.0],
        0.0,
    )
    .unwrap()
}

/// 2-D double well with a unique interior dual optimum at sigma = 4.8475
/// and optimal value -243.416.
pub fn example2() -> DwpInstance {
    DwpInstance::new(
        dmatrix![1.0, 0.0; 0.0, -2.0],
        dmatrix![-0.07, 0.04; -0.01, -1.0],
        dvector![-2.0, 0.0],
        28.0,
        dvector![-7.0, -22.0],
        0.0,
    )
    .unwrap()
}

/// Mexican hat: A = 0, B = Diag(-0.5, -0.5), c = 0, d = 38, f = 0.
/// The global minimum set is the circle 1/2 w1^2 + 1/2 w2^2 = 38 with value 0.
pub fn example3() -> DwpInstance {
    DwpInstance::new(
        DMatrix::zeros(2, 2),
        dmatrix![-0.5, 0.0; 0.0, -0.5],
        dvector![0.0, 0.0],
        38.0,
        dvector![0.0, 0.0],
        0.0,
    )
    .unwrap()
}

/// The pair A = [[1,-1],[-1,0]], B = [[1,-2],[3,-6]] for which A and B^T B
/// are not simultaneously diagonalizable by congruence; the problem is
/// unbounded below and the space reduction certifies it.
pub fn sdc_failure() -> DwpInstance {
    DwpInstance::new(
        dmatrix![1.0, -1.0; -1.0, 0.0],
        dmatrix![1.0, -2.0; 3.0, -6.0],
        DVector::zeros(2),
        0.0,
        DVector::zeros(2),
        0.0,
    )
    .unwrap()
}
