//! Dense complex linear-algebra helpers shared by the oracle and the tests.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default cap on the register size for dense 2^N x 2^N matrices.
pub const DEFAULT_DENSE_CAP: usize = 12;

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |U^dagger U - I|` element-wise.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &CMatrix::identity(u.nrows(), u.ncols()))
}

pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

/// Element-wise distance between `a` and `b` after removing the global phase.
///
/// The phase is fixed from the largest-magnitude element of `b`.
pub fn phase_aligned_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let (idx, _) = b
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .expect("non-empty matrix");
    let ratio = a[idx] / b[idx];
    if !ratio.is_finite() || ratio.norm() == 0.0 {
        return max_abs_diff(a, b);
    }
    let phase = ratio / ratio.norm();
    max_abs_diff(a, &b.map(|x| x * phase))
}

/// `min_phi || a - e^{i phi} b ||_2` for state vectors.
pub fn state_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let overlap: Complex64 = b.iter().zip(a).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub(crate) fn check_dense_cap(n_qubits: usize, cap: usize) -> crate::Result<()> {
    if n_qubits > cap {
        Err(crate::Error::RegisterTooLarge { n_qubits, cap })
    } else {
        Ok(())
    }
}
