//! Sampling of `M` and detection of the nullity strata
//! `S_q = {A_0 = … = A_{q−1} = 0}`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::hypersurface::{GeometryError, Hypersurface, PointOnM, ToleranceConfig};
use crate::invariants::{char_coeffs, classify_point, levi_matrix_in_frame, LeviData, LeviSign};
use crate::linalg::{pinv_solve, real_singular_values};
use crate::CVector;

/// Points closer than this are merged.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Step of the central differences in the Gauss–Newton Jacobian.
pub const FD_STEP: f64 = 1e-6;
/// Relative singular-value cut in the local PCA.
pub const PCA_CUT: f64 = 0.1;
const JITTER_FRACTION: f64 = 0.25;
const PINV_RCOND: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrataError {
    #[error("region has {got} axes, expected {expected} (two per complex variable)")]
    AxisCountMismatch { expected: usize, got: usize },
    #[error("axis {0} has an empty or non-finite interval")]
    BadInterval(usize),
    #[error("axis {0} needs a resolution of at least 2")]
    ResolutionTooSmall(usize),
    #[error("stratum index q = {q} outside 1..={n}")]
    QOutOfRange { q: usize, n: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Box in the `2N` real coordinates `(Re z_1, Im z_1, …, Re z_N, Im z_N)` with a seed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    bounds: Vec<(f64, f64)>,
    resolution: Vec<usize>,
    seed: u64,
}

impl Region {
    pub fn new(bounds: Vec<(f64, f64)>, resolution: Vec<usize>, seed: u64) -> Result<Self, StrataError> {
        if resolution.len() != bounds.len() {
            return Err(StrataError::AxisCountMismatch {
                expected: bounds.len(),
                got: resolution.len(),
            });
        }
        for (axis, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(StrataError::BadInterval(axis));
            }
            if resolution[axis] < 2 {
                return Err(StrataError::ResolutionTooSmall(axis));
            }
        }
        Ok(Self {
            bounds,
            resolution,
            seed,
        })
    }

    /// `[−half_width, half_width]` on every real axis of `ℂ^dim`.
    pub fn cube(dim: usize, half_width: f64, resolution: usize, seed: u64) -> Result<Self, StrataError> {
        Self::new(vec![(-half_width, half_width); 2 * dim], vec![resolution; 2 * dim], seed)
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn complex_dim(&self) -> usize {
        self.bounds.len() / 2
    }

    pub fn center(&self) -> CVector {
        let mid: Vec<f64> = self.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
        from_real(&mid)
    }

    pub fn max_width(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max)
    }

    /// Whether `p` lies in the box widened by one grid spacing on every axis.
    ///
    /// Refined points are kept only inside this neighborhood; seeds on a face may
    /// legitimately project slightly outside the box itself.
    pub fn contains(&self, p: &CVector) -> bool {
        p.len() * 2 == self.bounds.len()
            && to_real(p).iter().enumerate().all(|(a, x)| {
                let (lo, hi) = self.bounds[a];
                let spacing = (hi - lo) / (self.resolution[a] - 1) as f64;
                lo - spacing <= *x && *x <= hi + spacing
            })
    }

    fn check(&self, h: &Hypersurface) -> Result<(), StrataError> {
        if self.bounds.len() != 2 * h.dim() {
            return Err(StrataError::AxisCountMismatch {
                expected: 2 * h.dim(),
                got: self.bounds.len(),
            });
        }
        Ok(())
    }

    /// Jittered grid points in row-major order (last axis varies fastest).
    ///
    /// Each coordinate moves by up to a quarter of the grid spacing, clamped to the box.
    /// The jitter stream is drawn sequentially from the region seed, so the list is
    /// reproducible.
    pub fn seeds(&self) -> Vec<CVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let total: usize = self.resolution.iter().product();
        let axes = self.bounds.len();
        let mut out = Vec::with_capacity(total);
        let mut counter = vec![0usize; axes];
        for _ in 0..total {
            let coords: Vec<f64> = (0..axes)
                .map(|a| {
                    let (lo, hi) = self.bounds[a];
                    let spacing = (hi - lo) / (self.resolution[a] - 1) as f64;
                    let jitter = rng.random_range(-JITTER_FRACTION..JITTER_FRACTION) * spacing;
                    (lo + spacing * counter[a] as f64 + jitter).clamp(lo, hi)
                })
                .collect();
            out.push(from_real(&coords));
            for a in (0..axes).rev() {
                counter[a] += 1;
                if counter[a] < self.resolution[a] {
                    break;
                }
                counter[a] = 0;
            }
        }
        out
    }
}

pub(crate) fn to_real(p: &CVector) -> DVector<f64> {
    DVector::from_iterator(2 * p.len(), p.iter().flat_map(|z| [z.re, z.im]))
}

pub(crate) fn from_real(x: &[f64]) -> CVector {
    DVector::from_iterator(x.len() / 2, x.chunks(2).map(|c| Complex64::new(c[0], c[1])))
}

/// Projected sample of `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    /// Distinct points, in seed order.
    pub points: Vec<PointOnM>,
    pub seeds: usize,
    /// Seeds whose projection failed.
    pub dropped: usize,
    /// Converged seeds merged into an earlier point.
    pub merged: usize,
}

/// Keeps the first of every cluster of points closer than `radius`, preserving order.
pub fn dedup_by_distance<T>(items: Vec<T>, radius: f64, pos: impl Fn(&T) -> &CVector) -> (Vec<T>, usize) {
    let mut buckets: HashMap<i64, Vec<usize>> = HashMap::new();
    let mut kept: Vec<T> = Vec::with_capacity(items.len());
    let mut merged = 0;
    for item in items {
        let p = pos(&item);
        let key = (p[0].re / radius).floor() as i64;
        let close = (key - 1..=key + 1).any(|b| {
            buckets
                .get(&b)
                .is_some_and(|ids| ids.iter().any(|&i| (pos(&kept[i]) - p).norm() < radius))
        });
        if close {
            merged += 1;
        } else {
            buckets.entry(key).or_default().push(kept.len());
            kept.push(item);
        }
    }
    (kept, merged)
}

/// Projects every seed of `region` onto `M`; failures are counted, not fatal.
pub fn sample_hypersurface(h: &Hypersurface, region: &Region) -> Result<SampleSet, StrataError> {
    region.check(h)?;
    let seeds = region.seeds();
    let projected: Vec<Option<PointOnM>> = seeds.par_iter().map(|s| h.project_to_m(s).ok()).collect();
    let dropped = projected.iter().filter(|p| p.is_none()).count();
    let converged: Vec<PointOnM> = projected.into_iter().flatten().collect();
    let (points, merged) = dedup_by_distance(converged, DEDUP_RADIUS, |x| &x.point);
    Ok(SampleSet {
        points,
        seeds: seeds.len(),
        dropped,
        merged,
    })
}

/// Gauss–Newton on `(ρ, extra…)` over the `2N` real coordinates, with a central-difference
/// Jacobian and minimum-norm steps. Iterates past the acceptance tolerance down to
/// `min(newton_tol, 1e-6·stratum_tol)`; the caller decides acceptance.
pub fn gauss_newton<F>(h: &Hypersurface, start: &CVector, extra: F) -> Result<CVector, GeometryError>
where
    F: Fn(&CVector) -> Result<Vec<f64>, GeometryError>,
{
    let tol = h.tol();
    let floor = tol.newton_tol.min(1e-6 * tol.stratum_tol);
    let residual = |x: &DVector<f64>| -> Result<DVector<f64>, GeometryError> {
        let p = from_real(x.as_slice());
        let mut r = vec![h.rho_value(&p)?];
        r.extend(extra(&p)?);
        Ok(DVector::from_vec(r))
    };
    let mut x = to_real(start);
    for _ in 0..tol.newton_max_iter {
        let r = residual(&x)?;
        if r.amax() <= floor {
            break;
        }
        let mut jac = DMatrix::zeros(r.len(), x.len());
        for col in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[col] += FD_STEP;
            xm[col] -= FD_STEP;
            let d = (residual(&xp)? - residual(&xm)?) / (2.0 * FD_STEP);
            jac.set_column(col, &d);
        }
        let step = pinv_solve(&jac, &(-r), PINV_RCOND);
        if !step.iter().all(|s| s.is_finite()) {
            break;
        }
        x += &step;
        if step.norm() <= 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    Ok(from_real(x.as_slice()))
}

/// `(A_0, …, A_{q−1})` at any smooth point (on or off `M`), via principal minors.
pub fn stratum_residuals(h: &Hypersurface, p: &CVector, q: usize) -> Result<Vec<f64>, GeometryError> {
    let frame = h.cr_frame(p)?;
    let t = levi_matrix_in_frame(h, p, &frame)?;
    Ok(char_coeffs(&t).into_iter().take(q).collect())
}

/// Refines `start` onto `{ρ = 0} ∩ {extra = 0}` and accepts it when every extra residual
/// is within `stratum_tol` after a final projection onto `M`.
pub fn refine_onto<F>(h: &Hypersurface, start: &CVector, extra: F) -> Option<(PointOnM, Vec<f64>)>
where
    F: Fn(&CVector) -> Result<Vec<f64>, GeometryError>,
{
    let x = gauss_newton(h, start, &extra).ok()?;
    let on_m = h.project_to_m(&x).ok()?;
    let res: Vec<f64> = extra(&on_m.point).ok()?.into_iter().map(f64::abs).collect();
    res.iter()
        .all(|r| *r <= h.tol().stratum_tol)
        .then_some((on_m, res))
}

/// Local real dimension of a sampled set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionEstimate {
    Dim(usize),
    Insufficient { found: usize, required: usize },
    /// No members at all.
    Empty,
}

/// Local PCA: samples within `radius` of `center`, mean-centred, counting singular values
/// at or above `0.1·σ_max`. Needs at least `4·(2n+1)` samples; `n` is the CR dimension.
pub fn estimate_dimension(samples: &[CVector], center: &CVector, radius: f64, cr_dim: usize) -> DimensionEstimate {
    let required = 4 * (2 * cr_dim + 1);
    let local: Vec<&CVector> = samples.iter().filter(|p| (*p - center).norm() <= radius).collect();
    if local.len() < required {
        return DimensionEstimate::Insufficient {
            found: local.len(),
            required,
        };
    }
    let cols = 2 * center.len();
    let mut m = DMatrix::from_fn(local.len(), cols, |r, c| {
        let z = local[r][c / 2];
        if c % 2 == 0 {
            z.re
        } else {
            z.im
        }
    });
    let mean = m.row_mean();
    for mut row in m.row_iter_mut() {
        row -= &mean;
    }
    let sv = real_singular_values(&m);
    let largest = sv.first().copied().unwrap_or(0.0);
    if largest == 0.0 {
        return DimensionEstimate::Dim(0);
    }
    let dim = sv.iter().filter(|&&s| s >= PCA_CUT * largest).count();
    DimensionEstimate::Dim(dim.min(2 * cr_dim + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NecessaryCondition {
    /// `dim S_q ≥ 2q`: a complex `q`-dimensional submanifold is not excluded.
    Pass,
    /// No complex `q`-dimensional submanifold can exist locally.
    Fail,
    Insufficient,
}

/// One accepted point of `S_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumSample {
    pub data: LeviData,
    /// `|A_0|, …, |A_{q−1}|`.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct StratumOptions {
    /// Defaults to the member closest to the region center.
    pub center: Option<CVector>,
    /// Defaults to a quarter of the widest region axis.
    pub radius: Option<f64>,
    pub sign: LeviSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratumReport {
    pub q: usize,
    pub members: Vec<StratumSample>,
    pub seeds: usize,
    /// Distinct points of `M` the refinement started from.
    pub sampled: usize,
    /// Sampled points of `M` whose refinement was rejected or left the region.
    pub rejected: usize,
    pub dimension: DimensionEstimate,
    pub center: CVector,
    pub radius: f64,
    pub verdict: NecessaryCondition,
    pub sign: LeviSign,
    pub tol: ToleranceConfig,
}

/// Samples `M`, refines every sample onto `S_q`, and estimates the local dimension.
pub fn detect_stratum(
    h: &Hypersurface,
    region: &Region,
    q: usize,
    opts: &StratumOptions,
) -> Result<StratumReport, StrataError> {
    let n = h.cr_dim();
    if q == 0 || q > n {
        return Err(StrataError::QOutOfRange { q, n });
    }
    let sample = sample_hypersurface(h, region)?;
    let refined: Vec<Option<StratumSample>> = sample
        .points
        .par_iter()
        .map(|x| {
            let (on_m, residuals) = refine_onto(h, &x.point, |p| stratum_residuals(h, p, q))?;
            if !region.contains(&on_m.point) {
                return None;
            }
            let data = classify_point(h, &on_m, opts.sign).ok()?;
            Some(StratumSample { data, residuals })
        })
        .collect();
    let rejected = refined.iter().filter(|r| r.is_none()).count();
    let (members, _) = dedup_by_distance(refined.into_iter().flatten().collect(), DEDUP_RADIUS, |s| {
        &s.data.point.point
    });

    let positions: Vec<CVector> = members.iter().map(|m| m.data.point.point.clone()).collect();
    let region_center = region.center();
    let center = opts.center.clone().unwrap_or_else(|| {
        positions
            .iter()
            .min_by(|a, b| (*a - &region_center).norm().total_cmp(&(*b - &region_center).norm()))
            .cloned()
            .unwrap_or(region_center.clone())
    });
    let radius = opts.radius.unwrap_or(0.25 * region.max_width());
    let dimension = if members.is_empty() {
        DimensionEstimate::Empty
    } else {
        estimate_dimension(&positions, &center, radius, n)
    };
    let mut report = StratumReport {
        q,
        members,
        seeds: sample.seeds,
        sampled: sample.points.len(),
        rejected,
        dimension,
        center,
        radius,
        verdict: NecessaryCondition::Insufficient,
        sign: opts.sign,
        tol: *h.tol(),
    };
    report.verdict = necessary_condition(&report);
    Ok(report)
}

/// `dim S_q ≥ 2q`; an empty stratum fails.
pub fn necessary_condition(report: &StratumReport) -> NecessaryCondition {
    match report.dimension {
        DimensionEstimate::Empty => NecessaryCondition::Fail,
        DimensionEstimate::Insufficient { .. } => NecessaryCondition::Insufficient,
        DimensionEstimate::Dim(d) if d >= 2 * report.q => NecessaryCondition::Pass,
        DimensionEstimate::Dim(_) => NecessaryCondition::Fail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surf(src: &str, dim: usize) -> Hypersurface {
        Hypersurface::from_source(src, dim, ToleranceConfig::default()).unwrap()
    }

    #[test]
    fn region_validation() {
        assert_eq!(
            Region::new(vec![(0.0, 1.0)], vec![1], 0),
            Err(StrataError::ResolutionTooSmall(0))
        );
        assert_eq!(Region::new(vec![(1.0, 1.0)], vec![3], 0), Err(StrataError::BadInterval(0)));
        assert_eq!(
            Region::new(vec![(0.0, 1.0)], vec![3, 3], 0),
            Err(StrataError::AxisCountMismatch { expected: 1, got: 2 })
        );
        let h = surf("Re(w)", 2);
        let r = Region::cube(3, 1.0, 2, 0).unwrap();
        assert!(matches!(sample_hypersurface(&h, &r), Err(StrataError::AxisCountMismatch { .. })));
    }

    #[test]
    fn seeds_are_reproducible_and_cover_the_grid() {
        let r = Region::cube(2, 1.0, 3, 42).unwrap();
        let a = r.seeds();
        assert_eq!(a.len(), 81);
        assert_eq!(a, r.seeds());
        // last axis fastest: seeds 0 and 1 differ mainly in Im z2
        assert!((a[1][1].im - a[0][1].im - 1.0).abs() <= 0.5);
        assert!((a[1][0].re - a[0][0].re).abs() <= 0.5);
    }

    #[test]
    fn sphere_sampling_lands_on_the_sphere() {
        let h = surf("abs2(z1)+abs2(z2)-1", 2);
        let s = sample_hypersurface(&h, &Region::cube(2, 2.0, 5, 1).unwrap()).unwrap();
        assert!(s.points.len() >= 100, "{} points", s.points.len());
        assert!(s.points.iter().all(|x| x.residual <= 1e-12));
    }

    #[test]
    fn positive_function_has_no_zero_set() {
        let h = surf("abs2(z1)+abs2(z2)+1", 2);
        let s = sample_hypersurface(&h, &Region::cube(2, 1.0, 3, 1).unwrap()).unwrap();
        assert!(s.points.is_empty());
        assert_eq!(s.dropped, s.seeds);
    }

    #[test]
    fn levi_flat_sampling_has_zero_real_part() {
        let h = surf("Re(w)", 3);
        let s = sample_hypersurface(&h, &Region::cube(3, 1.0, 2, 5).unwrap()).unwrap();
        assert!(!s.points.is_empty());
        assert!(s.points.iter().all(|x| x.point[2].re.abs() <= 1e-12));
    }

    #[test]
    fn dedup_merges_close_points() {
        let p = |x: f64| DVector::from_vec(vec![Complex64::new(x, 0.0), Complex64::new(0.0, 0.0)]);
        let (kept, merged) = dedup_by_distance(vec![p(0.0), p(5e-7), p(1.0), p(2e-6)], DEDUP_RADIUS, |v| v);
        assert_eq!(kept.len(), 3);
        assert_eq!(merged, 1);
    }

    #[test]
    fn dimension_of_sampled_subspaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let plane: Vec<CVector> = (0..200)
            .map(|_| {
                let t: f64 = rng.random_range(-1.0..1.0);
                let s: f64 = rng.random_range(-1.0..1.0);
                DVector::from_vec(vec![Complex64::new(t, s), Complex64::new(0.0, 0.0), Complex64::new(0.0, t)])
            })
            .collect();
        let center = DVector::from_element(3, Complex64::new(0.0, 0.0));
        assert_eq!(estimate_dimension(&plane, &center, 5.0, 2), DimensionEstimate::Dim(2));
        assert_eq!(
            estimate_dimension(&plane[..10], &center, 5.0, 2),
            DimensionEstimate::Insufficient { found: 10, required: 20 }
        );
    }

    #[test]
    fn q_out_of_range() {
        let h = surf("abs2(z1)+abs2(z2)-1", 2);
        let r = Region::cube(2, 1.0, 2, 0).unwrap();
        let opts = StratumOptions::default();
        assert_eq!(detect_stratum(&h, &r, 0, &opts), Err(StrataError::QOutOfRange { q: 0, n: 1 }));
        assert_eq!(detect_stratum(&h, &r, 2, &opts), Err(StrataError::QOutOfRange { q: 2, n: 1 }));
    }

    #[test]
    fn sphere_has_no_degenerate_stratum() {
        let h = surf("abs2(z1)+abs2(z2)-1", 2);
        let r = Region::cube(2, 1.5, 3, 3).unwrap();
        let report = detect_stratum(&h, &r, 1, &StratumOptions::default()).unwrap();
        assert!(report.members.is_empty());
        assert_eq!(report.dimension, DimensionEstimate::Empty);
        assert_eq!(report.verdict, NecessaryCondition::Fail);
    }
}
