//! The hypersurface `M = {ρ = 0} ⊂ ℂ^N`, points on it, and CR frames.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{self, is_real_valued, wirtinger_dz, wirtinger_dzbar, EvalError, Expr, VarSpace};
use crate::{CMatrix, CVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("defining function is not real-valued (witness {witness:?})")]
    NotRealValued { witness: Option<Vec<Complex64>> },
    #[error("complex Hessian is not Hermitian (deviation {deviation:e})")]
    HessianNotHermitian { deviation: f64 },
    #[error("gradient norm {norm:e} is below the smoothness threshold")]
    GradientDegenerate { norm: f64 },
    #[error("projection did not converge after {iterations} iterations (|rho| = {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("tolerance `{0}` must be strictly positive")]
    InvalidTolerance(&'static str),
    #[error("expected a point of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("defining function refers to z{0}, outside the ambient space")]
    VariableOutOfSpace(usize),
    #[error("|rho| = {residual:e} exceeds the on-hypersurface tolerance")]
    NotOnHypersurface { residual: f64 },
}

/// Numerical thresholds shared by every analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Eigenvalues with `|d| ≤ eig_zero_tol · max(1, spectral radius)` count as zero.
    pub eig_zero_tol: f64,
    /// Relative singular-value threshold for rank decisions.
    pub rank_tol: f64,
    /// Residual `|ρ|` accepted as "on M".
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Minimum `|∂ρ|` for a point to count as smooth.
    pub grad_min: f64,
    /// Residual bound for stratum and zero-set membership.
    pub stratum_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eig_zero_tol: 1e-7,
            rank_tol: 1e-7,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            grad_min: 1e-8,
            stratum_tol: 1e-6,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let checks = [
            (self.eig_zero_tol, "eig_zero_tol"),
            (self.rank_tol, "rank_tol"),
            (self.newton_tol, "newton_tol"),
            (self.grad_min, "grad_min"),
            (self.stratum_tol, "stratum_tol"),
        ];
        for (v, name) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(GeometryError::InvalidTolerance(name));
            }
        }
        if self.newton_max_iter == 0 {
            return Err(GeometryError::InvalidTolerance("newton_max_iter"));
        }
        Ok(())
    }
}

/// A point of `M` together with the data every later computation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOnM {
    pub point: CVector,
    /// `|ρ(p)|`.
    pub residual: f64,
    /// `g_m = ∂ρ/∂z_m (p)`.
    pub gradient: CVector,
    /// `n × N` matrix; row `j` holds the coefficients of `L_j = Σ_m B_jm ∂/∂z_m`.
    pub frame: CMatrix,
}

impl PointOnM {
    /// Same point with frame rows mixed by an `n × n` unitary `U` (`B ↦ U B`).
    pub fn with_mixed_frame(&self, u: &CMatrix) -> Self {
        Self {
            frame: u * &self.frame,
            ..self.clone()
        }
    }
}

/// Real hypersurface `{ρ = 0}` with symbolic derivatives of `ρ` precomputed.
#[derive(Debug, Clone)]
pub struct Hypersurface {
    rho: Expr,
    space: VarSpace,
    gradient: Vec<Expr>,
    /// `hessian[j][k] = ∂²ρ / ∂z_j ∂z̄_k`.
    hessian: Vec<Vec<Expr>>,
    tol: ToleranceConfig,
}

const HERMITIAN_SPOT_CHECKS: usize = 16;

impl Hypersurface {
    pub fn new(rho: Expr, space: VarSpace, tol: ToleranceConfig) -> Result<Self, GeometryError> {
        tol.validate()?;
        let dim = space.dim();
        if rho.arity() > dim {
            return Err(GeometryError::VariableOutOfSpace(rho.arity()));
        }
        let real = is_real_valued(&rho, 64);
        if !real.real {
            return Err(GeometryError::NotRealValued {
                witness: real.witness,
            });
        }
        let gradient: Vec<Expr> = (0..dim).map(|j| wirtinger_dz(&rho, j)).collect();
        let anti: Vec<Expr> = (0..dim).map(|k| wirtinger_dzbar(&rho, k)).collect();
        let hessian = (0..dim)
            .map(|j| anti.iter().map(|dk| wirtinger_dz(dk, j)).collect())
            .collect();
        let h = Self {
            rho,
            space,
            gradient,
            hessian,
            tol,
        };
        h.spot_check_hermitian()?;
        Ok(h)
    }

    /// Parses `source` over `ℂ^dim` and builds the hypersurface.
    pub fn from_source(source: &str, dim: usize, tol: ToleranceConfig) -> Result<Self, crate::Error> {
        let space = VarSpace::ambient(dim)?;
        let rho = expr::parse(source, &space)?;
        Ok(Self::new(rho, space, tol)?)
    }

    fn spot_check_hermitian(&self) -> Result<(), GeometryError> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4e55);
        for _ in 0..HERMITIAN_SPOT_CHECKS {
            let p = random_point(&mut rng, self.dim(), 1.0);
            let Ok(h) = self.complex_hessian(&p) else { continue };
            let dev = hermitian_deviation(&h);
            if dev > 1e-10 * h.norm().max(1.0) {
                return Err(GeometryError::HessianNotHermitian { deviation: dev });
            }
        }
        Ok(())
    }

    /// Ambient complex dimension `N`.
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// CR dimension `n = N − 1`.
    pub fn cr_dim(&self) -> usize {
        self.dim() - 1
    }

    pub fn rho(&self) -> &Expr {
        &self.rho
    }

    pub fn space(&self) -> &VarSpace {
        &self.space
    }

    pub fn tol(&self) -> &ToleranceConfig {
        &self.tol
    }

    pub fn with_tol(&self, tol: ToleranceConfig) -> Result<Self, GeometryError> {
        tol.validate()?;
        Ok(Self { tol, ..self.clone() })
    }

    fn check_dim(&self, p: &CVector) -> Result<(), GeometryError> {
        if p.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        Ok(())
    }

    /// `ρ(p)` (real part; `ρ` is real-valued).
    pub fn rho_value(&self, p: &CVector) -> Result<f64, GeometryError> {
        self.check_dim(p)?;
        Ok(self.rho.eval(p.as_slice())?.re)
    }

    /// `(∂ρ/∂z_1, …, ∂ρ/∂z_N)` at `p`.
    pub fn gradient(&self, p: &CVector) -> Result<CVector, GeometryError> {
        self.check_dim(p)?;
        let vals = self
            .gradient
            .iter()
            .map(|e| e.eval(p.as_slice()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// `N × N` matrix of `∂²ρ/∂z_j∂z̄_k` at `p`.
    pub fn complex_hessian(&self, p: &CVector) -> Result<CMatrix, GeometryError> {
        self.check_dim(p)?;
        let n = self.dim();
        let mut h = CMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                h[(j, k)] = self.hessian[j][k].eval(p.as_slice())?;
            }
        }
        Ok(h)
    }

    /// Orthonormal CR frame at `p` (which need not lie on `M`).
    pub fn cr_frame(&self, p: &CVector) -> Result<CMatrix, GeometryError> {
        cr_frame(&self.gradient(p)?, self.tol.grad_min)
    }

    /// Wraps `p` as a [`PointOnM`], checking residual and smoothness.
    pub fn point(&self, p: CVector) -> Result<PointOnM, GeometryError> {
        let residual = self.rho_value(&p)?.abs();
        if residual > self.tol.newton_tol {
            return Err(GeometryError::NotOnHypersurface { residual });
        }
        let gradient = self.gradient(&p)?;
        let frame = cr_frame(&gradient, self.tol.grad_min)?;
        Ok(PointOnM {
            point: p,
            residual,
            gradient,
            frame,
        })
    }

    /// Newton iteration along the real gradient of `ρ` until `|ρ| ≤ newton_tol`.
    ///
    /// Viewing `ρ` as a function of `2N` real variables, its gradient written in complex
    /// coordinates is `2·conj(∂ρ)`, so a Newton step is `p ← p − ρ·conj(g) / (2|g|²)`.
    pub fn project_to_m(&self, seed: &CVector) -> Result<PointOnM, GeometryError> {
        self.check_dim(seed)?;
        let mut p = seed.clone();
        let mut residual = f64::INFINITY;
        for _ in 0..=self.tol.newton_max_iter {
            let r = self.rho_value(&p)?;
            residual = r.abs();
            let g = self.gradient(&p)?;
            let gn = g.norm();
            if gn < self.tol.grad_min {
                return Err(GeometryError::GradientDegenerate { norm: gn });
            }
            if residual <= self.tol.newton_tol {
                let frame = cr_frame(&g, self.tol.grad_min)?;
                return Ok(PointOnM {
                    point: p,
                    residual,
                    gradient: g,
                    frame,
                });
            }
            let scale = Complex64::new(r / (2.0 * gn * gn), 0.0);
            p -= g.map(|x| x.conj()) * scale;
        }
        Err(GeometryError::NoConvergence {
            iterations: self.tol.newton_max_iter,
            residual,
        })
    }

    /// Newton iteration restricted to the real line `seed + t·direction`.
    pub fn project_along(&self, seed: &CVector, direction: &CVector) -> Result<PointOnM, GeometryError> {
        self.check_dim(seed)?;
        self.check_dim(direction)?;
        let mut p = seed.clone();
        let mut residual = f64::INFINITY;
        for _ in 0..=self.tol.newton_max_iter {
            let r = self.rho_value(&p)?;
            residual = r.abs();
            if residual <= self.tol.newton_tol {
                return self.point(p);
            }
            // dρ(v) = 2 Re Σ g_m v_m for real ρ
            let g = self.gradient(&p)?;
            let slope = 2.0 * g.iter().zip(direction.iter()).map(|(a, b)| a * b).sum::<Complex64>().re;
            if slope.abs() < self.tol.grad_min {
                return Err(GeometryError::GradientDegenerate { norm: slope.abs() });
            }
            p -= direction * Complex64::new(r / slope, 0.0);
        }
        Err(GeometryError::NoConvergence {
            iterations: self.tol.newton_max_iter,
            residual,
        })
    }
}

/// Orthonormal basis of `{v : Σ g_m v_m = 0}`, returned as the rows of an `n × N` matrix.
///
/// Pivot `m = argmax |g_m|` (lowest index on ties); raw vectors `e_j − (g_j/g_m) e_m`
/// for `j ≠ m` in index order, then Gram–Schmidt.
pub fn cr_frame(g: &CVector, grad_min: f64) -> Result<CMatrix, GeometryError> {
    let norm = g.norm();
    if !(norm >= grad_min) {
        return Err(GeometryError::GradientDegenerate { norm });
    }
    let dim = g.len();
    let mut pivot = 0;
    for j in 1..dim {
        if g[j].norm() > g[pivot].norm() {
            pivot = j;
        }
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut rows: Vec<CVector> = Vec::with_capacity(dim - 1);
    for j in (0..dim).filter(|&j| j != pivot) {
        let mut v = CVector::from_element(dim, zero);
        v[j] = Complex64::new(1.0, 0.0);
        v[pivot] = -g[j] / g[pivot];
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &rows {
                let proj: Complex64 = v.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum();
                v -= b * proj;
            }
        }
        let n = v.norm();
        v /= Complex64::new(n, 0.0);
        rows.push(v);
    }
    let mut frame = CMatrix::from_element(dim - 1, dim, zero);
    for (i, r) in rows.iter().enumerate() {
        frame.set_row(i, &r.transpose());
    }
    Ok(frame)
}

/// `max |H_jk − conj(H_kj)|`.
pub fn hermitian_deviation(h: &CMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for j in 0..h.nrows() {
        for k in 0..h.ncols() {
            dev = dev.max((h[(j, k)] - h[(k, j)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn random_point(rng: &mut impl Rng, dim: usize, radius: f64) -> CVector {
    DVector::from_iterator(
        dim,
        (0..dim).map(|_| {
            Complex64::new(
                rng.random_range(-radius..radius),
                rng.random_range(-radius..radius),
            )
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn v(xs: &[Complex64]) -> CVector {
        DVector::from_row_slice(xs)
    }

    fn surf(src: &str, dim: usize) -> Hypersurface {
        Hypersurface::from_source(src, dim, ToleranceConfig::default()).unwrap()
    }

    #[test]
    fn sphere_gradient_and_hessian() {
        let h = surf("abs2(z1)+abs2(z2)-1", 2);
        let p = v(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(h.gradient(&p).unwrap(), v(&[c(1.0, 0.0), c(0.0, 0.0)]));
        let hess = h.complex_hessian(&v(&[c(0.3, 0.2), c(-0.4, 0.9)])).unwrap();
        assert_eq!(hess, CMatrix::identity(2, 2));
    }

    #[test]
    fn weighted_model_gradient_and_hessian() {
        let h = surf("Re(w) + abs2(z1) + abs2(z2)^2", 3);
        let a = c(0.6, -0.8);
        let g = h.gradient(&v(&[a, c(0.0, 0.0), c(0.1, 0.3)])).unwrap();
        assert!((g - v(&[a.conj(), c(0.0, 0.0), c(0.5, 0.0)])).norm() < 1e-15);
        let z2 = c(0.3, 0.4);
        let hess = h.complex_hessian(&v(&[a, z2, c(0.1, 0.3)])).unwrap();
        let expected = CMatrix::from_diagonal(&v(&[c(1.0, 0.0), c(4.0 * z2.norm_sqr(), 0.0), c(0.0, 0.0)]));
        assert!((hess - expected).norm() < 1e-14);
    }

    #[test]
    fn rank_one_model_gradient_and_hessian() {
        let h = surf("Re(w) + abs2(z1*z2)", 3);
        let u = c(0.7, 0.2);
        let g = h.gradient(&v(&[c(0.0, 0.0), u, c(0.0, 0.0)])).unwrap();
        assert!((g - v(&[c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)])).norm() < 1e-15);
        let (z1, z2) = (c(0.2, -0.5), c(-1.1, 0.3));
        let hess = h.complex_hessian(&v(&[z1, z2, c(0.4, 0.4)])).unwrap();
        let vv = v(&[z2, z1, c(0.0, 0.0)]);
        let expected = &vv * vv.adjoint();
        assert!((hess - expected).norm() < 1e-14);
    }

    #[test]
    fn sphere_projection_is_radial() {
        let h = surf("abs2(z1)+abs2(z2)-1", 2);
        let x = h.project_to_m(&v(&[c(2.0, 0.0), c(0.0, 0.0)])).unwrap();
        assert!((x.point[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(x.residual <= 1e-12);
        assert_eq!(x.frame, CMatrix::from_row_slice(1, 2, &[c(0.0, 0.0), c(1.0, 0.0)]));
    }

    #[test]
    fn projection_along_w_solves_for_real_part() {
        let h = surf("Re(w) + abs2(z1) + abs2(z2)^2", 3);
        let seed = v(&[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let dir = v(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let x = h.project_along(&seed, &dir).unwrap();
        assert!((x.point[2] - c(-2.0, 0.0)).norm() < 1e-12);
        assert_eq!(x.point[0], c(1.0, 0.0));
        assert_eq!(x.point[1], c(1.0, 0.0));
    }

    #[test]
    fn degenerate_gradient_is_rejected() {
        let h = surf("Re(w)^2 + abs2(z1)^2", 2);
        let err = h.project_to_m(&v(&[c(0.0, 0.0), c(0.0, 0.5)])).unwrap_err();
        assert!(matches!(err, GeometryError::GradientDegenerate { .. }));
    }

    #[test]
    fn projection_is_idempotent() {
        let h = surf("Re(w) + abs2(z1) + abs2(z2)^2", 3);
        let x = h.project_to_m(&v(&[c(0.3, 0.1), c(-0.5, 0.2), c(0.9, -0.4)])).unwrap();
        let y = h.project_to_m(&x.point).unwrap();
        assert!((x.point - y.point).norm() <= 10.0 * h.tol().newton_tol);
    }

    #[test]
    fn rank_one_frame_at_z2_axis_is_canonical() {
        let h = surf("Re(w) + abs2(z1*z2)", 3);
        let x = h.point(v(&[c(0.0, 0.0), c(0.8, -0.3), c(0.0, 0.0)])).unwrap();
        let expected = CMatrix::from_row_slice(
            2,
            3,
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        );
        assert_eq!(x.frame, expected);
    }

    #[test]
    fn frame_completes_to_unitary_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in 2..6 {
            for _ in 0..20 {
                let g = random_point(&mut rng, dim, 2.0);
                let b = cr_frame(&g, 1e-8).unwrap();
                let n = dim - 1;
                // B B* = I and Σ_m B_jm g_m = 0
                assert!((&b * b.adjoint() - CMatrix::identity(n, n)).norm() < 1e-10);
                assert!((&b * &g).norm() < 1e-10);
                let ghat = g.map(|x| x.conj()) / Complex64::new(g.norm(), 0.0);
                let mut u = CMatrix::zeros(dim, dim);
                for j in 0..n {
                    u.set_row(j, &b.row(j));
                }
                u.set_row(n, &ghat.transpose());
                assert!((&u * u.adjoint() - CMatrix::identity(dim, dim)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn pivot_tie_goes_to_lowest_index() {
        let g = v(&[c(1.0, 0.0), c(0.0, 1.0)]);
        let b = cr_frame(&g, 1e-8).unwrap();
        // pivot 0: raw vector e_1 − (g_1/g_0) e_0 = (−i, 1)
        let s = 0.5f64.sqrt();
        assert!((b.row(0).transpose() - v(&[c(0.0, -s), c(s, 0.0)])).norm() < 1e-15);
    }

    #[test]
    fn non_real_defining_function_rejected() {
        let err = Hypersurface::from_source("z1 + abs2(z2)", 2, ToleranceConfig::default()).unwrap_err();
        assert!(matches!(err, crate::Error::Geometry(GeometryError::NotRealValued { .. })));
    }

    #[test]
    fn zero_tolerance_rejected() {
        let tol = ToleranceConfig {
            rank_tol: 0.0,
            ..Default::default()
        };
        assert_eq!(tol.validate(), Err(GeometryError::InvalidTolerance("rank_tol")));
    }

    #[test]
    fn hessian_is_hermitian_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for src in ["Re(w) + abs2(z1*z2)", "Re(w) + abs2(z1) - abs2(z2)", "Re(w*conj(z1)) + abs2(z2)^2 + Im(z1*z2)"] {
            let h = surf(src, 3);
            for _ in 0..100 {
                let p = random_point(&mut rng, 3, 1.5);
                assert!(hermitian_deviation(&h.complex_hessian(&p).unwrap()) <= 1e-10);
            }
        }
    }
}
