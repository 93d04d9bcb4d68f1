//! Tangential Cauchy–Riemann operator and tests for candidate complex submanifolds
//! of `M`: non-degeneracy of defining systems, the `∂̄_b` rank test, the wedge test,
//! parametrized embeddings and candidate generators of a stratum.
//!
//! Every verdict is certified only at the sampled points it was given.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{is_real_valued, parse, wirtinger_dz, wirtinger_dzbar, EvalError, Expr, ParseError, VarSpace, VarSpaceError};
use crate::hypersurface::{GeometryError, Hypersurface, PointOnM};
use crate::invariants::{classify_point, InvariantError, LeviSign};
use crate::linalg::{numerical_rank, real_singular_values, singular_values};
use crate::strata::{dedup_by_distance, detect_stratum, refine_onto, sample_hypersurface, Region, StrataError, StratumOptions, DEDUP_RADIUS};
use crate::{CMatrix, CVector};

/// Holomorphy and tangency bound in [`verify_parametrized`].
pub const PARAMETRIZATION_TOL: f64 = 1e-8;
const REAL_CHECK_TRIALS: usize = 64;

/// `(L̄_1 r, …, L̄_n r)` at a point.
pub type Covector = CVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubmanifoldError {
    #[error("defining system is empty")]
    EmptySystem,
    #[error("function {index} of the system is not real-valued")]
    NotRealValued { index: usize, witness: Option<CVector> },
    #[error("system has {got} functions, expected {expected}")]
    SystemSize { expected: usize, got: usize },
    #[error("target complex dimension {q} outside 0..={n}")]
    TargetOutOfRange { q: usize, n: usize },
    #[error("parametrization has {got} components, expected {expected}")]
    ComponentCount { expected: usize, got: usize },
    #[error("parameter point has {got} coordinates, expected {expected}")]
    ParameterDimension { expected: usize, got: usize },
    #[error("no points to test")]
    NoPoints,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    VarSpace(#[from] VarSpaceError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Strata(#[from] StrataError),
}

/// Real-valued functions `ρ_1 … ρ_d` on the ambient space, restricted to `M`.
#[derive(Debug, Clone)]
pub struct DefiningSystem {
    functions: Vec<Expr>,
    dz: Vec<Vec<Expr>>,
    dzbar: Vec<Vec<Expr>>,
    k: Option<usize>,
}

impl DefiningSystem {
    /// `dim` is the number of ambient variables; `k` is the intended rank (`d = 2k+1`).
    pub fn new(functions: Vec<Expr>, dim: usize, k: Option<usize>) -> Result<Self, SubmanifoldError> {
        if functions.is_empty() {
            return Err(SubmanifoldError::EmptySystem);
        }
        for (index, f) in functions.iter().enumerate() {
            let check = is_real_valued(f, REAL_CHECK_TRIALS);
            if !check.real {
                return Err(SubmanifoldError::NotRealValued {
                    index,
                    witness: check.witness.map(|w| CVector::from_vec(w)),
                });
            }
        }
        let derive = |d: fn(&Expr, usize) -> Expr| -> Vec<Vec<Expr>> {
            functions.iter().map(|f| (0..dim).map(|m| d(f, m)).collect()).collect()
        };
        Ok(Self {
            dz: derive(wirtinger_dz),
            dzbar: derive(wirtinger_dzbar),
            functions,
            k,
        })
    }

    pub fn parse<S: AsRef<str>>(sources: &[S], space: &VarSpace, k: Option<usize>) -> Result<Self, SubmanifoldError> {
        let functions = sources
            .iter()
            .map(|s| parse(s.as_ref(), space))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(functions, space.dim(), k)
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn functions(&self) -> &[Expr] {
        &self.functions
    }

    /// `(ρ_1(p), …, ρ_d(p))`.
    pub fn values(&self, p: &CVector) -> Result<Vec<f64>, EvalError> {
        self.functions.iter().map(|f| Ok(f.eval(p.as_slice())?.re)).collect()
    }

    fn check_ambient(&self, h: &Hypersurface) -> Result<(), SubmanifoldError> {
        match self.dz.first() {
            Some(row) if row.len() != h.dim() => Err(GeometryError::DimensionMismatch {
                expected: h.dim(),
                got: row.len(),
            }
            .into()),
            _ => Ok(()),
        }
    }

    fn covector(&self, j: usize, x: &PointOnM) -> Result<Covector, SubmanifoldError> {
        let p = x.point.as_slice();
        let grad = self.dzbar[j]
            .iter()
            .map(|e| e.eval(p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(pair_conj_frame(&x.frame, &grad))
    }

    /// `dρ_j` applied to the real tangent vector with `(1,0)` part `c`.
    fn differential(&self, j: usize, p: &CVector, c: &CVector) -> Result<f64, SubmanifoldError> {
        let mut s = Complex64::new(0.0, 0.0);
        for m in 0..c.len() {
            s += c[m] * self.dz[j][m].eval(p.as_slice())? + c[m].conj() * self.dzbar[j][m].eval(p.as_slice())?;
        }
        Ok(s.re)
    }
}

fn pair_conj_frame(frame: &CMatrix, dzbar: &[Complex64]) -> Covector {
    CVector::from_fn(frame.nrows(), |i, _| {
        (0..frame.ncols()).map(|m| frame[(i, m)].conj() * dzbar[m]).sum()
    })
}

/// `∂̄_b r` at `x`: component `i` is `Σ_m conj(B_im) ∂r/∂z̄_m`.
pub fn dbar_b(h: &Hypersurface, x: &PointOnM, r: &Expr) -> Result<Covector, SubmanifoldError> {
    let p = x.point.as_slice();
    let grad = (0..h.dim())
        .map(|m| wirtinger_dzbar(r, m).eval(p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(pair_conj_frame(&x.frame, &grad))
}

/// The `d × n` matrix of covectors `∂̄_b ρ_j` at `x`.
pub fn covector_matrix(sys: &DefiningSystem, x: &PointOnM) -> Result<CMatrix, SubmanifoldError> {
    let n = x.frame.nrows();
    let mut m = CMatrix::zeros(sys.len(), n);
    for j in 0..sys.len() {
        m.set_row(j, &sys.covector(j, x)?.transpose());
    }
    Ok(m)
}

/// Real basis of `T_x M`, as `(1,0)` parts: `B_j`, `i·B_j`, and `i·conj(g)/|g|`.
fn real_tangent_basis(x: &PointOnM) -> Vec<CVector> {
    let i = Complex64::new(0.0, 1.0);
    let mut basis = Vec::with_capacity(2 * x.frame.nrows() + 1);
    for row in x.frame.row_iter() {
        let b: CVector = row.transpose();
        basis.push(&b * i);
        basis.push(b);
    }
    let g = &x.gradient;
    basis.push(g.map(|v| v.conj()) * (i / g.norm()));
    basis
}

#[derive(Debug, Clone, PartialEq)]
pub struct NondegeneracyReport {
    pub nondegenerate: bool,
    /// First point where the differentials were dependent.
    pub witness: Option<CVector>,
    /// Smallest `σ_min / σ_max` over the tested points.
    pub min_ratio: f64,
    pub points: usize,
}

/// `dρ_1 ∧ … ∧ dρ_d ≠ 0` on `T(M)` at every point, via the `d × (2n+1)` pairing matrix.
pub fn nondegeneracy_check(
    h: &Hypersurface,
    sys: &DefiningSystem,
    pts: &[PointOnM],
) -> Result<NondegeneracyReport, SubmanifoldError> {
    sys.check_ambient(h)?;
    let max = 2 * h.cr_dim() + 1;
    if sys.len() > max {
        return Err(SubmanifoldError::SystemSize {
            expected: max,
            got: sys.len(),
        });
    }
    let ratios = pts
        .par_iter()
        .map(|x| -> Result<f64, SubmanifoldError> {
            let basis = real_tangent_basis(x);
            let mut m = DMatrix::zeros(sys.len(), basis.len());
            for j in 0..sys.len() {
                for (c, v) in basis.iter().enumerate() {
                    m[(j, c)] = sys.differential(j, &x.point, v)?;
                }
            }
            let sv = real_singular_values(&m);
            let largest = sv[0];
            Ok(if largest == 0.0 { 0.0 } else { sv[sv.len() - 1] / largest })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let tol = h.tol().rank_tol;
    let failing = ratios.iter().position(|r| *r < tol);
    Ok(NondegeneracyReport {
        nondegenerate: failing.is_none(),
        witness: failing.map(|i| pts[i].point.clone()),
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        points: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankKind {
    /// Rank `k` everywhere: the zero set is a complex manifold of this complex dimension.
    ComplexManifold { complex_dim: usize },
    RankTooHigh,
    RankTooLow,
    RankNotConstant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankVerdict {
    pub ranks: Vec<usize>,
    pub min_rank: usize,
    pub max_rank: usize,
    pub kind: RankKind,
    pub k: usize,
    pub tol: f64,
}

/// Numerical rank of the covector span at each point, compared against `k` with
/// `d = 2k+1`. The system's own `k` is used when set, otherwise it is inferred from `d`.
pub fn rank_test(h: &Hypersurface, sys: &DefiningSystem, pts: &[PointOnM]) -> Result<RankVerdict, SubmanifoldError> {
    sys.check_ambient(h)?;
    let d = sys.len();
    let k = sys.k.unwrap_or(d / 2);
    if d != 2 * k + 1 {
        return Err(SubmanifoldError::SystemSize {
            expected: 2 * k + 1,
            got: d,
        });
    }
    if pts.is_empty() {
        return Err(SubmanifoldError::NoPoints);
    }
    let tol = h.tol().rank_tol;
    let ranks = pts
        .par_iter()
        .map(|x| Ok(numerical_rank(&singular_values(&covector_matrix(sys, x)?), tol)))
        .collect::<Result<Vec<_>, SubmanifoldError>>()?;
    let min_rank = *ranks.iter().min().unwrap_or(&0);
    let max_rank = *ranks.iter().max().unwrap_or(&0);
    let kind = if min_rank != max_rank {
        RankKind::RankNotConstant
    } else if min_rank == k {
        RankKind::ComplexManifold {
            complex_dim: h.cr_dim() - k.min(h.cr_dim()),
        }
    } else if min_rank > k {
        RankKind::RankTooHigh
    } else {
        RankKind::RankTooLow
    };
    Ok(RankVerdict {
        ranks,
        min_rank,
        max_rank,
        kind,
        k,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum WedgeVerdict {
    Pass,
    /// The leading block of `n − q` covectors is dependent.
    FailIndependent { witness: CVector },
    /// Adding `∂̄_b ρ_function` to the block does not make the wedge vanish.
    FailDependent { function: usize, witness: CVector },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WedgeReport {
    pub verdict: WedgeVerdict,
    pub q: usize,
    pub points: usize,
    pub min_block_gram: f64,
    /// Largest `Gram(extended) / max(1, Π‖v‖²)`.
    pub max_extended_gram: f64,
}

fn gram(rows: &CMatrix) -> f64 {
    if rows.nrows() == 0 {
        return 1.0;
    }
    (rows * rows.adjoint()).determinant().re
}

/// Wedge test for a complex `q`-dimensional zero set: the first `n − q` covectors are
/// independent, and every later covector lies in their span.
pub fn wedge_check(
    h: &Hypersurface,
    sys: &DefiningSystem,
    q: usize,
    pts: &[PointOnM],
) -> Result<WedgeReport, SubmanifoldError> {
    sys.check_ambient(h)?;
    let n = h.cr_dim();
    if q > n {
        return Err(SubmanifoldError::TargetOutOfRange { q, n });
    }
    let block = n - q;
    if block > sys.len() {
        return Err(SubmanifoldError::SystemSize {
            expected: block,
            got: sys.len(),
        });
    }
    if pts.is_empty() {
        return Err(SubmanifoldError::NoPoints);
    }
    let tol = h.tol().rank_tol;
    let per_point = pts
        .par_iter()
        .map(|x| -> Result<(f64, Vec<f64>), SubmanifoldError> {
            let cov = covector_matrix(sys, x)?;
            let head = cov.rows(0, block).into_owned();
            let head_norms: f64 = head.row_iter().map(|r| r.norm_squared()).product();
            let extended = (block..sys.len())
                .map(|l| {
                    let mut m = CMatrix::zeros(block + 1, cov.ncols());
                    m.rows_mut(0, block).copy_from(&head);
                    m.set_row(block, &cov.row(l));
                    gram(&m) / (head_norms * cov.row(l).norm_squared()).max(1.0)
                })
                .collect();
            Ok((gram(&head), extended))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut verdict = WedgeVerdict::Pass;
    for (x, (block_gram, _)) in pts.iter().zip(&per_point) {
        if *block_gram < tol {
            verdict = WedgeVerdict::FailIndependent {
                witness: x.point.clone(),
            };
            break;
        }
    }
    if verdict == WedgeVerdict::Pass {
        'outer: for (x, (_, ext)) in pts.iter().zip(&per_point) {
            for (offset, g) in ext.iter().enumerate() {
                if *g > tol {
                    verdict = WedgeVerdict::FailDependent {
                        function: block + offset,
                        witness: x.point.clone(),
                    };
                    break 'outer;
                }
            }
        }
    }
    Ok(WedgeReport {
        verdict,
        q,
        points: pts.len(),
        min_block_gram: per_point.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        max_extended_gram: per_point
            .iter()
            .flat_map(|p| p.1.iter().copied())
            .fold(0.0, f64::max),
    })
}

/// Candidate embedding `u ↦ (f_1(u), …, f_N(u))` from `ℂ^q`.
#[derive(Debug, Clone)]
pub struct Parametrization {
    space: VarSpace,
    components: Vec<Expr>,
    du: Vec<Vec<Expr>>,
    dubar: Vec<Vec<Expr>>,
}

impl Parametrization {
    pub fn new(components: Vec<Expr>, q: usize) -> Result<Self, SubmanifoldError> {
        let space = VarSpace::parameters(q)?;
        let derive = |d: fn(&Expr, usize) -> Expr| -> Vec<Vec<Expr>> {
            components.iter().map(|f| (0..q).map(|i| d(f, i)).collect()).collect()
        };
        Ok(Self {
            du: derive(wirtinger_dz),
            dubar: derive(wirtinger_dzbar),
            components,
            space,
        })
    }

    /// Components are parsed over `u1 … uq` (`u` alone when `q = 1`).
    pub fn parse<S: AsRef<str>>(sources: &[S], q: usize) -> Result<Self, SubmanifoldError> {
        let space = VarSpace::parameters(q)?;
        let components = sources
            .iter()
            .map(|s| parse(s.as_ref(), &space))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(components, q)
    }

    pub fn q(&self) -> usize {
        self.space.dim()
    }

    pub fn space(&self) -> &VarSpace {
        &self.space
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn eval(&self, u: &CVector) -> Result<CVector, EvalError> {
        let vals = self
            .components
            .iter()
            .map(|f| f.eval(u.as_slice()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CVector::from_vec(vals))
    }

    fn jacobian(&self, which: &[Vec<Expr>], u: &CVector) -> Result<CMatrix, EvalError> {
        let mut m = CMatrix::zeros(self.components.len(), self.q());
        for (r, row) in which.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                m[(r, c)] = e.eval(u.as_slice())?;
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParametrizationClause {
    /// Image in `M`.
    OnHypersurface,
    /// `∂f/∂ū = 0`.
    Holomorphic,
    /// `∂f/∂u` annihilates `θ`.
    Tangent,
    /// `∂f/∂u` has rank `q`.
    Immersion,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParametrizationVerdict {
    Pass,
    Fail {
        clause: ParametrizationClause,
        witness: CVector,
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParametrizationReport {
    pub verdict: ParametrizationVerdict,
    pub samples: usize,
    pub max_residual: f64,
    pub max_antiholomorphic: f64,
    pub max_tangency: f64,
    pub min_rank: usize,
}

struct ParamSample {
    residual: f64,
    antiholomorphic: f64,
    tangency: f64,
    rank: usize,
}

/// Checks at each parameter point that `f(u) ∈ M`, `f` is holomorphic, its image
/// tangents lie in `H(M)`, and it is an immersion. Clauses are reported in that order.
pub fn verify_parametrized(
    h: &Hypersurface,
    f: &Parametrization,
    params: &[CVector],
) -> Result<ParametrizationReport, SubmanifoldError> {
    if f.components.len() != h.dim() {
        return Err(SubmanifoldError::ComponentCount {
            expected: h.dim(),
            got: f.components.len(),
        });
    }
    if params.is_empty() {
        return Err(SubmanifoldError::NoPoints);
    }
    if let Some(u) = params.iter().find(|u| u.len() != f.q()) {
        return Err(SubmanifoldError::ParameterDimension {
            expected: f.q(),
            got: u.len(),
        });
    }
    let samples = params
        .par_iter()
        .map(|u| -> Result<ParamSample, SubmanifoldError> {
            let p = f.eval(u)?;
            let residual = h.rho_value(&p)?.abs();
            let jac = f.jacobian(&f.du, u)?;
            let antiholomorphic = f.jacobian(&f.dubar, u)?.iter().fold(0.0f64, |m, v| m.max(v.norm()));
            let g = h.gradient(&p)?;
            let tangency = (g.transpose() * &jac).iter().fold(0.0f64, |m, v| m.max(v.norm()));
            let rank = numerical_rank(&singular_values(&jac), h.tol().rank_tol);
            Ok(ParamSample {
                residual,
                antiholomorphic,
                tangency,
                rank,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let tol = h.tol();
    let q = f.q();
    type Probe = (ParametrizationClause, fn(&ParamSample) -> f64, f64);
    let probes: [Probe; 4] = [
        (ParametrizationClause::OnHypersurface, |s| s.residual, tol.stratum_tol),
        (ParametrizationClause::Holomorphic, |s| s.antiholomorphic, PARAMETRIZATION_TOL),
        (ParametrizationClause::Tangent, |s| s.tangency, PARAMETRIZATION_TOL),
        (ParametrizationClause::Immersion, |s| s.rank as f64, 0.0),
    ];
    let mut verdict = ParametrizationVerdict::Pass;
    'clauses: for (clause, value, bound) in probes {
        for (u, s) in params.iter().zip(&samples) {
            let v = value(s);
            let failed = match clause {
                ParametrizationClause::Immersion => s.rank != q,
                _ => v > bound,
            };
            if failed {
                verdict = ParametrizationVerdict::Fail {
                    clause,
                    witness: u.clone(),
                    value: v,
                };
                break 'clauses;
            }
        }
    }
    let max = |sel: fn(&ParamSample) -> f64| samples.iter().map(sel).fold(0.0, f64::max);
    Ok(ParametrizationReport {
        verdict,
        samples: samples.len(),
        max_residual: max(|s| s.residual),
        max_antiholomorphic: max(|s| s.antiholomorphic),
        max_tangency: max(|s| s.tangency),
        min_rank: samples.iter().map(|s| s.rank).min().unwrap_or(0),
    })
}

/// Common zeros of a defining system on `M`, refined from a sample of the region.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub points: Vec<PointOnM>,
    pub seeds: usize,
    /// Sample points whose refinement did not reach the zero set inside the region.
    pub rejected: usize,
}

pub fn locate_common_zeros(h: &Hypersurface, sys: &DefiningSystem, region: &Region) -> Result<ZeroSet, SubmanifoldError> {
    sys.check_ambient(h)?;
    let sample = sample_hypersurface(h, region)?;
    let refined: Vec<Option<PointOnM>> = sample
        .points
        .par_iter()
        .map(|x| {
            refine_onto(h, &x.point, |p| Ok(sys.values(p)?))
                .map(|(on_m, _)| on_m)
                .filter(|on_m| region.contains(&on_m.point))
        })
        .collect();
    let rejected = refined.iter().filter(|r| r.is_none()).count();
    let (points, _) = dedup_by_distance(refined.into_iter().flatten().collect(), DEDUP_RADIUS, |x| &x.point);
    Ok(ZeroSet {
        points,
        seeds: sample.seeds,
        rejected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadicalClause {
    /// Generators vanish on the detected stratum.
    VanishOnStratum,
    /// Common zeros of the generators lie in the stratum.
    ZerosInStratum,
    Nondegenerate,
    Rank,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RadicalVerdict {
    /// Every necessary condition holds at the sampled points; generation of the real
    /// radical itself is not decided.
    PassNecessary,
    Fail {
        clause: RadicalClause,
        witness: Option<CVector>,
    },
    /// Neither the stratum nor the common zero set produced sample points.
    NoData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadicalReport {
    pub verdict: RadicalVerdict,
    pub q: usize,
    pub stratum_members: usize,
    pub common_zeros: usize,
    pub rank: Option<RankVerdict>,
}

/// Necessary conditions for `gens` (with `2(n−q)+1` members) to generate the real
/// radical of `{A_0, …, A_{q−1}}` and cut out a complex `q`-dimensional manifold.
pub fn verify_radical_generators(
    h: &Hypersurface,
    gens: &DefiningSystem,
    q: usize,
    region: &Region,
) -> Result<RadicalReport, SubmanifoldError> {
    gens.check_ambient(h)?;
    let n = h.cr_dim();
    if q == 0 || q > n {
        return Err(SubmanifoldError::TargetOutOfRange { q, n });
    }
    let k = n - q;
    if gens.len() != 2 * k + 1 {
        return Err(SubmanifoldError::SystemSize {
            expected: 2 * k + 1,
            got: gens.len(),
        });
    }
    let tol = *h.tol();
    let stratum = detect_stratum(h, region, q, &StratumOptions::default())?;
    let zeros = locate_common_zeros(h, gens, region)?;
    let mut report = RadicalReport {
        verdict: RadicalVerdict::NoData,
        q,
        stratum_members: stratum.members.len(),
        common_zeros: zeros.points.len(),
        rank: None,
    };
    if stratum.members.is_empty() && zeros.points.is_empty() {
        return Ok(report);
    }
    let fail = |clause, witness: &CVector| RadicalVerdict::Fail {
        clause,
        witness: Some(witness.clone()),
    };

    for m in &stratum.members {
        let p = &m.data.point.point;
        if gens.values(p)?.iter().any(|v| v.abs() > tol.stratum_tol) {
            report.verdict = fail(RadicalClause::VanishOnStratum, p);
            return Ok(report);
        }
    }
    for x in &zeros.points {
        if classify_point(h, x, LeviSign::Positive)?.nullity < q {
            report.verdict = fail(RadicalClause::ZerosInStratum, &x.point);
            return Ok(report);
        }
    }
    if zeros.points.is_empty() {
        report.verdict = RadicalVerdict::Fail {
            clause: RadicalClause::ZerosInStratum,
            witness: None,
        };
        return Ok(report);
    }
    let nd = nondegeneracy_check(h, gens, &zeros.points)?;
    if let Some(w) = nd.witness {
        report.verdict = fail(RadicalClause::Nondegenerate, &w);
        return Ok(report);
    }
    let sys = DefiningSystem {
        k: Some(k),
        ..gens.clone()
    };
    let rank = rank_test(h, &sys, &zeros.points)?;
    report.verdict = match rank.kind {
        RankKind::ComplexManifold { .. } => RadicalVerdict::PassNecessary,
        _ => {
            let at = rank.ranks.iter().position(|r| *r != k).unwrap_or(0);
            fail(RadicalClause::Rank, &zeros.points[at].point)
        }
    };
    report.rank = Some(rank);
    Ok(report)
}
