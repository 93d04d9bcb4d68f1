//! Characteristic-polynomial coefficients `det(T − λI) = Σ_k A_k (−λ)^k + (−λ)^n`.
//!
//! The primary route sums principal minors (`A_k` is the sum of all principal
//! `(n−k)×(n−k)` minors); [`coeffs_from_eigenvalues`] is the spectral cross-check
//! `A_k = e_{n−k}(d_1, …, d_n)`.

use num_complex::Complex64;

use crate::CMatrix;

/// Matrices up to this order use exact cofactor expansion for every minor.
const COFACTOR_MAX_ORDER: usize = 4;

/// `(A_0, …, A_{n−1})` from sums of principal minors.
pub fn char_coeffs(t: &CMatrix) -> Vec<f64> {
    let n = t.nrows();
    debug_assert_eq!(n, t.ncols());
    let use_cofactor = n <= COFACTOR_MAX_ORDER;
    (0..n)
        .map(|k| {
            let order = n - k;
            let mut sum = Complex64::new(0.0, 0.0);
            for_each_subset(n, order, |idx| {
                sum += if use_cofactor {
                    cofactor_det(t, idx)
                } else {
                    lu_det(t, idx)
                };
            });
            sum.re
        })
        .collect()
}

/// `(A_0, …, A_{n−1})` with `A_k = e_{n−k}` of the given eigenvalues.
pub fn coeffs_from_eigenvalues(d: &[f64]) -> Vec<f64> {
    let n = d.len();
    // e[m] = elementary symmetric polynomial of degree m
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (count, &x) in d.iter().enumerate() {
        for m in (1..=count + 1).rev() {
            e[m] += x * e[m - 1];
        }
    }
    (0..n).map(|k| e[n - k]).collect()
}

fn for_each_subset(n: usize, size: usize, mut f: impl FnMut(&[usize])) {
    if size > n {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        f(&idx);
        // advance to the next combination in lexicographic order
        let mut i = size;
        while i > 0 && idx[i - 1] == i - 1 + n - size {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        let i = i - 1;
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Laplace expansion along the first row of the principal submatrix on `idx`.
fn cofactor_det(t: &CMatrix, idx: &[usize]) -> Complex64 {
    match idx.len() {
        0 => Complex64::new(1.0, 0.0),
        1 => t[(idx[0], idx[0])],
        2 => t[(idx[0], idx[0])] * t[(idx[1], idx[1])] - t[(idx[0], idx[1])] * t[(idx[1], idx[0])],
        m => {
            let mut sum = Complex64::new(0.0, 0.0);
            let row = idx[0];
            let rest_rows = &idx[1..];
            let mut cols: Vec<usize> = Vec::with_capacity(m - 1);
            for (j, &col) in idx.iter().enumerate() {
                cols.clear();
                cols.extend(idx.iter().copied().filter(|&c| c != col));
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sum += t[(row, col)] * sign * minor_det(t, rest_rows, &cols);
            }
            sum
        }
    }
}

/// Determinant of the (not necessarily principal) submatrix `rows × cols`.
fn minor_det(t: &CMatrix, rows: &[usize], cols: &[usize]) -> Complex64 {
    match rows.len() {
        0 => Complex64::new(1.0, 0.0),
        1 => t[(rows[0], cols[0])],
        2 => t[(rows[0], cols[0])] * t[(rows[1], cols[1])] - t[(rows[0], cols[1])] * t[(rows[1], cols[0])],
        _ => {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut sub: Vec<usize> = Vec::with_capacity(cols.len() - 1);
            for (j, &col) in cols.iter().enumerate() {
                sub.clear();
                sub.extend(cols.iter().copied().filter(|&c| c != col));
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sum += t[(rows[0], col)] * sign * minor_det(t, &rows[1..], &sub);
            }
            sum
        }
    }
}

/// Gaussian elimination with partial pivoting on the principal submatrix on `idx`.
fn lu_det(t: &CMatrix, idx: &[usize]) -> Complex64 {
    let m = idx.len();
    let mut a: Vec<Vec<Complex64>> = idx
        .iter()
        .map(|&r| idx.iter().map(|&c| t[(r, c)]).collect())
        .collect();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
            .unwrap_or(col);
        if a[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for r in col + 1..m {
            let factor = a[r][col] / p;
            if factor.norm() == 0.0 {
                continue;
            }
            for c in col..m {
                let v = a[col][c];
                a[r][c] -= factor * v;
            }
        }
    }
    det
}
