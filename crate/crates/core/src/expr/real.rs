use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::diff::{conjugate, normalize};
use super::Expr;

const SAMPLE_TOL: f64 = 1e-10;
const SAMPLE_SEED: u64 = 0x5eed_1e71;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealCheckMethod {
    /// The normal form equals the normal form of its conjugate.
    Structural,
    /// `|Im e|` stayed below tolerance at every sampled point.
    Sampled { trials: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealCheck {
    pub real: bool,
    pub method: RealCheckMethod,
    /// First sampled point where the imaginary part exceeded tolerance.
    pub witness: Option<Vec<Complex64>>,
}

/// Decides whether `e` is real-valued: structurally if possible, else by sampling.
///
/// Sampling visits the probe points `i·e_k` and `e_k` first, then pseudo-random points
/// in the unit box. Points where evaluation fails are skipped.
pub fn is_real_valued(e: &Expr, trials: usize) -> RealCheck {
    let normal = normalize(e);
    if normal == conjugate(&normal) {
        return RealCheck {
            real: true,
            method: RealCheckMethod::Structural,
            witness: None,
        };
    }

    let dim = e.arity().max(1);
    let mut probes: Vec<Vec<Complex64>> = Vec::new();
    for k in 0..dim {
        for unit in [Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)] {
            let mut p = vec![Complex64::new(0.0, 0.0); dim];
            p[k] = unit;
            probes.push(p);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    probes.extend((0..trials).map(|_| {
        (0..dim)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }));

    let total = probes.len();
    for p in probes {
        let Ok(v) = e.eval(&p) else { continue };
        if v.im.abs() > SAMPLE_TOL * v.re.abs().max(1.0) {
            return RealCheck {
                real: false,
                method: RealCheckMethod::Sampled { trials: total },
                witness: Some(p),
            };
        }
    }
    RealCheck {
        real: true,
        method: RealCheckMethod::Sampled { trials: total },
        witness: None,
    }
}
