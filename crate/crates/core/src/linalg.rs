//! Thin wrappers over `nalgebra` decompositions used for rank decisions.

use nalgebra::{DMatrix, DVector};

use crate::CMatrix;

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    sorted_desc(m.clone().svd(false, false).singular_values.iter().copied())
}

pub fn real_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    sorted_desc(m.clone().svd(false, false).singular_values.iter().copied())
}

fn sorted_desc(it: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = it.collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Number of singular values at or above `tol · σ_max`; zero when `σ_max ≤ tol`.
pub fn numerical_rank(sv: &[f64], tol: f64) -> usize {
    let Some(&largest) = sv.first() else { return 0 };
    if largest <= tol {
        return 0;
    }
    sv.iter().filter(|&&s| s >= tol * largest).count()
}

/// Minimum-norm least-squares solution of `J x = r`, truncating `σ < rcond · σ_max`.
pub fn pinv_solve(j: &DMatrix<f64>, r: &DVector<f64>, rcond: f64) -> DVector<f64> {
    let svd = j.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let (Some(u), Some(vt)) = (&svd.u, &svd.v_t) else {
        return DVector::zeros(j.ncols());
    };
    let utr = u.transpose() * r;
    let mut coeff = DVector::zeros(svd.singular_values.len());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > 0.0 && s >= rcond * smax {
            coeff[k] = utr[k] / s;
        }
    }
    vt.transpose() * coeff
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn rank_uses_relative_and_absolute_thresholds() {
        assert_eq!(numerical_rank(&[2.0, 1e-3, 1e-9], 1e-7), 2);
        assert_eq!(numerical_rank(&[1e-9, 0.0], 1e-7), 0);
        assert_eq!(numerical_rank(&[], 1e-7), 0);
    }

    #[test]
    fn complex_rank_one_matrix() {
        let c = |re, im| Complex64::new(re, im);
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.5), c(0.0, 0.0)]);
        let sv = singular_values(&m);
        assert_eq!(numerical_rank(&sv, 1e-7), 1);
        assert!((sv[0] - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn pinv_gives_minimum_norm_solution() {
        let j = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let r = DVector::from_vec(vec![2.0]);
        let x = pinv_solve(&j, &r, 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }
}
