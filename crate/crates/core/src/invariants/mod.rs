//! Levi matrix, spectrum, characteristic coefficients, nullity and pseudoconvexity.

mod charpoly;
mod spectral;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

pub use charpoly::{char_coeffs, coeffs_from_eigenvalues};
pub use spectral::{hermitian_eigenvalues, nullity};

use crate::hypersurface::{GeometryError, Hypersurface, PointOnM};
use crate::{CMatrix, CVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvariantError {
    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("Jacobi iteration did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("pseudoconvexity scan needs at least one point")]
    EmptySample,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Orientation applied to `θ` (and hence to the Levi form).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LeviSign {
    #[default]
    Positive,
    Negative,
}

impl LeviSign {
    pub fn factor(self) -> f64 {
        match self {
            LeviSign::Positive => 1.0,
            LeviSign::Negative => -1.0,
        }
    }
}

/// Per-point Levi-form record.
#[derive(Debug, Clone, PartialEq)]
pub struct LeviData {
    pub point: PointOnM,
    /// `T = s · B·Hess·B*`.
    pub levi: CMatrix,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `(A_0, …, A_{n−1})` from principal minors of `T`.
    pub coeffs: Vec<f64>,
    pub nullity: usize,
    pub sign: LeviSign,
}

/// `T_jk = Σ_ab B_ja ∂²ρ/∂z_a∂z̄_b conj(B_kb)` for an arbitrary frame at an arbitrary point.
pub fn levi_matrix_in_frame(h: &Hypersurface, p: &CVector, frame: &CMatrix) -> Result<CMatrix, GeometryError> {
    let hess = h.complex_hessian(p)?;
    Ok(frame * hess * frame.adjoint())
}

/// Levi matrix in the point's stored CR frame.
pub fn levi_matrix(h: &Hypersurface, x: &PointOnM) -> Result<CMatrix, GeometryError> {
    levi_matrix_in_frame(h, &x.point, &x.frame)
}

/// Frame-free cross-check: spectrum of `P·Hessᵀ·P` with `P = I − ĝĝ*`, `ĝ = conj(g)/|g|`,
/// after dropping the eigenvalue forced to zero along `ĝ`.
///
/// The transpose appears because the frame rows (not their conjugates) are orthogonal
/// to `conj(g)`; `T` and `Tᵀ` share their spectrum.
pub fn projected_levi_spectrum(h: &Hypersurface, x: &PointOnM) -> Result<Vec<f64>, InvariantError> {
    let hess = h.complex_hessian(&x.point)?;
    let dim = hess.nrows();
    let g = &x.gradient;
    let ghat = g.map(|v| v.conj()) / Complex64::new(g.norm(), 0.0);
    let proj = CMatrix::identity(dim, dim) - &ghat * ghat.adjoint();
    let m = &proj * hess.transpose() * &proj;
    let mut d = hermitian_eigenvalues(&m)?;
    let forced = d
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    d.remove(forced);
    Ok(d)
}

/// Levi matrix → eigenvalues → coefficients → nullity, under orientation `sign`.
pub fn classify_point(h: &Hypersurface, x: &PointOnM, sign: LeviSign) -> Result<LeviData, InvariantError> {
    let levi = levi_matrix(h, x)? * Complex64::new(sign.factor(), 0.0);
    let eigenvalues = hermitian_eigenvalues(&levi)?;
    let coeffs = char_coeffs(&levi);
    let nullity = nullity(&eigenvalues, h.tol().eig_zero_tol);
    Ok(LeviData {
        point: x.clone(),
        levi,
        eigenvalues,
        coeffs,
        nullity,
        sign,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudoconvexityVerdict {
    Pseudoconvex(LeviSign),
    NotPseudoconvex,
    /// Every sampled Levi matrix vanished; compatible with pseudoconvexity (Levi-flat).
    Undetermined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoconvexityReport {
    pub verdict: PseudoconvexityVerdict,
    /// Orientation minimizing sign violations (positive on ties).
    pub sign: LeviSign,
    pub witness: Option<CVector>,
    pub witness_eigenvalues: Option<Vec<f64>>,
    pub samples: usize,
    pub violations: usize,
}

impl PseudoconvexityReport {
    pub fn is_pseudoconvex_compatible(&self) -> bool {
        !matches!(self.verdict, PseudoconvexityVerdict::NotPseudoconvex)
    }
}

/// Chooses one orientation for all samples and checks semi-definiteness at each.
pub fn pseudoconvexity_scan(h: &Hypersurface, points: &[PointOnM]) -> Result<PseudoconvexityReport, InvariantError> {
    if points.is_empty() {
        return Err(InvariantError::EmptySample);
    }
    let tol = h.tol().eig_zero_tol;
    let spectra: Vec<Vec<f64>> = points
        .par_iter()
        .map(|x| hermitian_eigenvalues(&levi_matrix(h, x)?))
        .collect::<Result<_, _>>()?;

    let threshold = |d: &[f64]| tol * d.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let violates = |d: &[f64], s: f64| d.iter().any(|v| s * v < -threshold(d));
    let count = |s: f64| spectra.iter().filter(|d| violates(d, s)).count();

    let all_flat = spectra.iter().all(|d| d.iter().all(|v| v.abs() <= tol));
    let (pos, neg) = (count(1.0), count(-1.0));
    let (sign, violations) = if neg < pos {
        (LeviSign::Negative, neg)
    } else {
        (LeviSign::Positive, pos)
    };

    let mut report = PseudoconvexityReport {
        verdict: PseudoconvexityVerdict::Pseudoconvex(sign),
        sign,
        witness: None,
        witness_eigenvalues: None,
        samples: points.len(),
        violations,
    };
    if all_flat {
        report.verdict = PseudoconvexityVerdict::Undetermined;
    } else if violations > 0 {
        let mixed = |d: &[f64]| violates(d, 1.0) && violates(d, -1.0);
        let idx = spectra
            .iter()
            .position(|d| mixed(d))
            .or_else(|| spectra.iter().position(|d| violates(d, sign.factor())))
            .unwrap_or(0);
        report.verdict = PseudoconvexityVerdict::NotPseudoconvex;
        report.witness = Some(points[idx].point.clone());
        report.witness_eigenvalues = Some(spectra[idx].clone());
    }
    Ok(report)
}
