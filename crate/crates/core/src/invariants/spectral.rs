//! Cyclic Jacobi eigenvalue solver for small dense Hermitian matrices.

use num_complex::Complex64;

use super::InvariantError;
use crate::hypersurface::hermitian_deviation;
use crate::CMatrix;

const OFF_DIAGONAL_TOL: f64 = 1e-13;
const HERMITIAN_TOL: f64 = 1e-8;
const MAX_SWEEPS: usize = 64;

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                s += a[(p, q)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
///
/// Each rotation acts on the `(p, q)` plane as `G = D·R`, where `D = diag(1, e^{-iφ})`
/// removes the phase of `a_pq = |a_pq| e^{iφ}` and `R` is the real Jacobi rotation of
/// the resulting real symmetric 2×2 block. Sweeps visit the upper triangle row by row
/// until the off-diagonal Frobenius norm drops below `1e-13·‖T‖_F`.
pub fn hermitian_eigenvalues(t: &CMatrix) -> Result<Vec<f64>, InvariantError> {
    let n = t.nrows();
    if t.ncols() != n {
        return Err(InvariantError::NotSquare {
            rows: n,
            cols: t.ncols(),
        });
    }
    let scale = t.norm();
    let dev = hermitian_deviation(t);
    if dev > HERMITIAN_TOL * scale.max(1.0) {
        return Err(InvariantError::NotHermitian { deviation: dev });
    }
    let mut a = t.clone();
    // symmetrize away the tolerated asymmetry
    for p in 0..n {
        a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
        for q in p + 1..n {
            let avg = (a[(p, q)] + a[(q, p)].conj()) * 0.5;
            a[(p, q)] = avg;
            a[(q, p)] = avg.conj();
        }
    }

    let target = OFF_DIAGONAL_TOL * scale;
    let mut sweeps = 0;
    while off_diagonal_norm(&a) > target {
        if sweeps == MAX_SWEEPS {
            return Err(InvariantError::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
    }

    let mut d: Vec<f64> = (0..n).map(|j| a[(j, j)].re).collect();
    d.sort_by(|x, y| y.total_cmp(x));
    Ok(d)
}

fn rotate(a: &mut CMatrix, p: usize, q: usize) {
    let h = a[(p, q)];
    let m = h.norm();
    if m == 0.0 {
        return;
    }
    let phase = h / m; // e^{iφ}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * m);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
    let gpp = Complex64::new(c, 0.0);
    let gpq = Complex64::new(s, 0.0);
    let gqp = -phase.conj() * s;
    let gqq = phase.conj() * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * gpp + akq * gqp;
        a[(k, q)] = akp * gpq + akq * gqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
        a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
}

/// Number of eigenvalues with `|d| ≤ eig_zero_tol · max(1, max_j |d_j|)`.
pub fn nullity(eigenvalues: &[f64], eig_zero_tol: f64) -> usize {
    let radius = eigenvalues.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let threshold = eig_zero_tol * radius.max(1.0);
    eigenvalues.iter().filter(|d| d.abs() <= threshold).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
        let m = CMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        m.qr().q()
    }

    #[test]
    fn diagonal_input_is_sorted() {
        let t = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(3.0, 0.0), c(0.0, 0.0)]));
        assert_eq!(hermitian_eigenvalues(&t).unwrap(), vec![3.0, 1.0, 0.0]);
    }

    #[test]
    fn classic_two_by_two() {
        let t = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let d = hermitian_eigenvalues(&t).unwrap();
        assert!((d[0] - 3.0).abs() < 1e-14 && (d[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_off_diagonal_entries() {
        // [[1, i], [-i, 1]] has eigenvalues 2 and 0
        let t = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]);
        let d = hermitian_eigenvalues(&t).unwrap();
        assert!((d[0] - 2.0).abs() < 1e-14 && d[1].abs() < 1e-14);
    }

    #[test]
    fn recovers_prescribed_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=7 {
            for _ in 0..50 {
                let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                let q = random_unitary(&mut rng, n);
                let diag = CMatrix::from_diagonal(&DVector::from_iterator(n, d.iter().map(|x| c(*x, 0.0))));
                let t = &q * diag * q.adjoint();
                let got = hermitian_eigenvalues(&t).unwrap();
                d.sort_by(|a, b| b.total_cmp(a));
                for (x, y) in got.iter().zip(&d) {
                    assert!((x - y).abs() <= 1e-10, "n={n}: {got:?} vs {d:?}");
                }
            }
        }
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let t = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(hermitian_eigenvalues(&t), Err(InvariantError::NotHermitian { .. })));
    }

    #[test]
    fn zero_matrix_has_zero_spectrum() {
        assert_eq!(hermitian_eigenvalues(&CMatrix::zeros(3, 3)).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn nullity_thresholds() {
        assert_eq!(nullity(&[1.0, 0.0], 1e-7), 1);
        assert_eq!(nullity(&[1.0, 1e-12], 1e-7), 1);
        // threshold is 1e-7 · max(1, 1e-3) = 1e-7
        assert_eq!(nullity(&[1e-3, 1e-9], 1e-7), 1);
        assert_eq!(nullity(&[1e3, 1e-5], 1e-7), 1);
        assert_eq!(nullity(&[1e3, 1e-3], 1e-7), 0);
    }
}
