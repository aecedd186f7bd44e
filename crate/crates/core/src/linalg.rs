//! Thin wrappers over nalgebra for the dense complex linear algebra used throughout.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Determinant by LU with partial pivoting. The empty matrix has determinant 1.
pub fn det(m: &CMatrix) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// Copy of `m` without row `r`.
pub fn delete_row(m: &CMatrix, r: usize) -> CMatrix {
    m.clone().remove_row(r)
}

/// Eigenvalues of a general complex square matrix, read off the diagonal of the Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    if !m.iter().all(|z| z.is_finite()) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 10_000 * n)
        .ok_or_else(|| Error::Eigen(format!("Schur iteration did not converge for {n}x{n} matrix")))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Singular values (descending) and the right singular vector of the smallest one.
pub fn smallest_right_singular(m: &CMatrix) -> Result<(Vec<f64>, CVector)> {
    // for a wide matrix the null space is not spanned by the thin SVD
    if m.ncols() > m.nrows() {
        return Err(Error::Eigen("null vector requested for a wide matrix".into()));
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or_else(|| Error::Eigen("SVD returned no right vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let min_idx = *order.last().ok_or_else(|| Error::Eigen("empty matrix".into()))?;
    // rows of V^H are conjugated right singular vectors
    let v = v_t.row(min_idx).transpose().map(|z| z.conj());
    Ok((sv, v))
}

/// Solve a square system, failing on exact singularity.
pub fn solve(m: &CMatrix, b: &CVector) -> Option<CVector> {
    m.clone().lu().solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_triangular_and_rotation() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
                C64::new(-1.0, 0.5),
                C64::new(3.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(2.0, 0.0),
            ],
        );
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - C64::new(-1.0, 0.5)).norm() < 1e-12);
        assert!((ev[2] - C64::new(2.0, 0.0)).norm() < 1e-12);

        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let r = CMatrix::from_row_slice(2, 2, &[z, -one, one, z]);
        let mut ev = eigenvalues(&r).unwrap();
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - C64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - C64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn null_vector_of_rank_deficient_tall_matrix() {
        let c = |r: f64, i: f64| C64::new(r, i);
        let m = CMatrix::from_row_slice(3, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0), c(0.0, 2.0), c(3.0, 1.0), c(6.0, 2.0)]);
        let (sv, v) = smallest_right_singular(&m).unwrap();
        assert!(sv[1] < 1e-12 * sv[0]);
        assert!((&m * &v).norm() < 1e-12);
    }

    #[test]
    fn determinant_of_empty_is_one() {
        assert_eq!(det(&CMatrix::zeros(0, 0)), C64::new(1.0, 0.0));
    }
}
