//! Normalization and Wirtinger differentiation.
//!
//! Normal form: `Re`, `Im` and `abs2` are rewritten into conjugate/arithmetic form,
//! conjugation is pushed down to the leaves, and the operands of `+` and `*` are put
//! in structural order. Only constant folding and 0/1 identities are applied.

use std::cmp::Ordering;

use num_complex::Complex64;

use super::Expr;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        (a, b) if a.is_zero() => b,
        (a, b) if b.is_zero() => a,
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        (a, b) if b.is_zero() => a,
        (a, b) if a.is_zero() => neg(b),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        (a, _) if a.is_zero() => Expr::Const(ZERO),
        (_, b) if b.is_zero() => Expr::Const(ZERO),
        (a, b) if a.is_one() => b,
        (a, b) if b.is_one() => a,
        (Expr::Const(x), b) if x == -ONE => neg(b),
        (a, Expr::Const(y)) if y == -ONE => neg(a),
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, b) if b.is_zero() => Expr::Div(Box::new(a), Box::new(b)),
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x / y),
        (a, _) if a.is_zero() => Expr::Const(ZERO),
        (a, b) if b.is_one() => a,
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn pow(a: Expr, k: u32) -> Expr {
    match (a, k) {
        (_, 0) => Expr::Const(ONE),
        (a, 1) => a,
        (Expr::Const(x), k) => Expr::Const(x.powu(k)),
        (a, k) => Expr::Pow(Box::new(a), k),
    }
}

/// Conjugate of an already-normalized tree, keeping conjugation at the leaves.
fn conj_normal(e: &Expr) -> Expr {
    match e {
        Expr::Const(c) => Expr::Const(c.conj()),
        Expr::Var { index, conj } => Expr::Var {
            index: *index,
            conj: !conj,
        },
        Expr::Neg(a) => neg(conj_normal(a)),
        Expr::Add(a, b) => ordered_add(conj_normal(a), conj_normal(b)),
        Expr::Sub(a, b) => sub(conj_normal(a), conj_normal(b)),
        Expr::Mul(a, b) => ordered_mul(conj_normal(a), conj_normal(b)),
        Expr::Div(a, b) => div(conj_normal(a), conj_normal(b)),
        Expr::Pow(a, k) => pow(conj_normal(a), *k),
        // not present in normal form, but keep the function total
        Expr::Conj(a) => normalize(a),
        Expr::Re(_) | Expr::Im(_) | Expr::Abs2(_) => conj_normal(&normalize(e)),
    }
}

fn ordered_add(a: Expr, b: Expr) -> Expr {
    if a.structural_cmp(&b) == Ordering::Greater {
        add(b, a)
    } else {
        add(a, b)
    }
}

fn ordered_mul(a: Expr, b: Expr) -> Expr {
    if a.structural_cmp(&b) == Ordering::Greater {
        mul(b, a)
    } else {
        mul(a, b)
    }
}

/// Rewrites `e` into normal form.
pub fn normalize(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var { .. } => e.clone(),
        Expr::Neg(a) => neg(normalize(a)),
        Expr::Conj(a) => conj_normal(&normalize(a)),
        Expr::Re(a) => {
            let n = normalize(a);
            let c = conj_normal(&n);
            ordered_mul(Expr::constant(0.5), ordered_add(n, c))
        }
        Expr::Im(a) => {
            // Im x = (x - conj x) / (2i) = (-i/2) (x - conj x)
            let n = normalize(a);
            let c = conj_normal(&n);
            ordered_mul(Expr::Const(Complex64::new(0.0, -0.5)), sub(n, c))
        }
        Expr::Abs2(a) => {
            let n = normalize(a);
            let c = conj_normal(&n);
            ordered_mul(n, c)
        }
        Expr::Add(a, b) => ordered_add(normalize(a), normalize(b)),
        Expr::Sub(a, b) => sub(normalize(a), normalize(b)),
        Expr::Mul(a, b) => ordered_mul(normalize(a), normalize(b)),
        Expr::Div(a, b) => div(normalize(a), normalize(b)),
        Expr::Pow(a, k) => pow(normalize(a), *k),
    }
}

/// Conjugate of `e` in normal form.
pub(crate) fn conjugate(e: &Expr) -> Expr {
    conj_normal(&normalize(e))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Holomorphic,
    Anti,
}

impl Kind {
    fn swap(self) -> Self {
        match self {
            Kind::Holomorphic => Kind::Anti,
            Kind::Anti => Kind::Holomorphic,
        }
    }
}

fn d(e: &Expr, j: usize, kind: Kind) -> Expr {
    match e {
        Expr::Const(_) => Expr::Const(ZERO),
        Expr::Var { index, conj } => {
            let hit = *index == j && *conj == (kind == Kind::Anti);
            Expr::Const(if hit { ONE } else { ZERO })
        }
        Expr::Neg(a) => neg(d(a, j, kind)),
        Expr::Add(a, b) => add(d(a, j, kind), d(b, j, kind)),
        Expr::Sub(a, b) => sub(d(a, j, kind), d(b, j, kind)),
        Expr::Mul(a, b) => add(
            mul(d(a, j, kind), (**b).clone()),
            mul((**a).clone(), d(b, j, kind)),
        ),
        Expr::Div(a, b) => {
            let da = d(a, j, kind);
            let db = d(b, j, kind);
            if db.is_zero() {
                div(da, (**b).clone())
            } else {
                div(
                    sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                    pow((**b).clone(), 2),
                )
            }
        }
        Expr::Pow(a, k) => match k {
            0 => Expr::Const(ZERO),
            k => mul(
                mul(Expr::constant(f64::from(*k)), pow((**a).clone(), k - 1)),
                d(a, j, kind),
            ),
        },
        // ∂/∂z conj(x) = conj(∂x/∂z̄)
        Expr::Conj(a) => conjugate(&d(a, j, kind.swap())),
        Expr::Re(_) | Expr::Im(_) | Expr::Abs2(_) => d(&normalize(e), j, kind),
    }
}

/// `∂e/∂z_j` (zero-based `j`), treating `z_j` and `z̄_j` as independent.
pub fn wirtinger_dz(e: &Expr, j: usize) -> Expr {
    d(&normalize(e), j, Kind::Holomorphic)
}

/// `∂e/∂z̄_j` (zero-based `j`).
pub fn wirtinger_dzbar(e: &Expr, j: usize) -> Expr {
    d(&normalize(e), j, Kind::Anti)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, VarSpace};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Central-difference Wirtinger derivative, independent of the symbolic engine.
    fn fd_wirtinger(e: &Expr, p: &[Complex64], j: usize, anti: bool) -> Complex64 {
        let h = 1e-5;
        let shifted = |delta: Complex64| {
            let mut q = p.to_vec();
            q[j] += delta;
            e.eval(&q).unwrap()
        };
        let dx = (shifted(c(h, 0.0)) - shifted(c(-h, 0.0))) / (2.0 * h);
        let dy = (shifted(c(0.0, h)) - shifted(c(0.0, -h))) / (2.0 * h);
        let i = c(0.0, 1.0);
        if anti {
            (dx + i * dy) * 0.5
        } else {
            (dx - i * dy) * 0.5
        }
    }

    #[test]
    fn product_rule_drops_conjugate_factor() {
        let e = Expr::Mul(Box::new(Expr::var(0)), Box::new(Expr::var_bar(0)));
        assert_eq!(wirtinger_dz(&e, 0), Expr::var_bar(0));
        assert_eq!(wirtinger_dzbar(&e, 0), Expr::var(0));
    }

    #[test]
    fn real_part_derivative_is_one_half() {
        let space = VarSpace::ambient(3).unwrap();
        let e = parse("Re(w)", &space).unwrap();
        assert_eq!(wirtinger_dzbar(&e, 2), Expr::constant(0.5));
        assert_eq!(wirtinger_dz(&e, 2), Expr::constant(0.5));
        assert_eq!(wirtinger_dz(&e, 0), Expr::constant(0.0));
    }

    #[test]
    fn abs2_of_product_matches_finite_differences() {
        let space = VarSpace::ambient(2).unwrap();
        let e = parse("abs2(z1*z2)", &space).unwrap();
        let de = wirtinger_dz(&e, 0);
        let closed = parse("conj(z1)*abs2(z2)", &space).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let p: Vec<Complex64> = (0..2)
                .map(|_| c(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)))
                .collect();
            let sym = de.eval(&p).unwrap();
            assert!((sym - fd_wirtinger(&e, &p, 0, false)).norm() <= 1e-6);
            assert!((sym - closed.eval(&p).unwrap()).norm() <= 1e-12);
        }
    }

    #[test]
    fn quotient_and_power_rules() {
        let space = VarSpace::ambient(2).unwrap();
        let e = parse("(z1^3 + Im(z2)) / (2 + abs2(z1))", &space).unwrap();
        let p = [c(0.3, -0.7), c(1.1, 0.4)];
        for j in 0..2 {
            for anti in [false, true] {
                let sym = if anti { wirtinger_dzbar(&e, j) } else { wirtinger_dz(&e, j) };
                let diff = (sym.eval(&p).unwrap() - fd_wirtinger(&e, &p, j, anti)).norm();
                assert!(diff <= 1e-6, "j={j} anti={anti} diff={diff}");
            }
        }
    }

    #[test]
    fn holomorphic_expression_has_zero_antiderivative() {
        let space = VarSpace::ambient(2).unwrap();
        let e = parse("z1^4 * z2 - 3*i*z1", &space).unwrap();
        assert!(wirtinger_dzbar(&e, 0).is_zero());
        assert!(wirtinger_dzbar(&e, 1).is_zero());
    }

    #[test]
    fn normal_form_has_no_sugar_nodes() {
        let space = VarSpace::ambient(3).unwrap();
        let e = parse("conj(Re(w)*abs2(z1) + Im(z2*z3))", &space).unwrap();
        fn check(e: &Expr) {
            match e {
                Expr::Re(_) | Expr::Im(_) | Expr::Abs2(_) | Expr::Conj(_) => {
                    panic!("sugar node survived: {e}")
                }
                Expr::Neg(a) | Expr::Pow(a, _) => check(a),
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                    check(a);
                    check(b)
                }
                _ => {}
            }
        }
        let n = normalize(&e);
        check(&n);
        let p = [c(0.2, 0.9), c(-1.0, 0.5), c(0.7, 0.1)];
        assert!((n.eval(&p).unwrap() - e.eval(&p).unwrap()).norm() < 1e-14);
    }

    fn small_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Expr::Const(c(a, b))),
            (0usize..2).prop_map(Expr::var),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                inner.clone().prop_map(|a| Expr::Conj(Box::new(a))),
                inner.clone().prop_map(|a| Expr::Re(Box::new(a))),
                inner.clone().prop_map(|a| Expr::Im(Box::new(a))),
                inner.clone().prop_map(|a| Expr::Abs2(Box::new(a))),
                (inner.clone(), 0u32..4).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                // denominators bounded away from zero
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(
                    Box::new(a),
                    Box::new(Expr::Add(Box::new(Expr::constant(3.0)), Box::new(Expr::Abs2(Box::new(b)))))
                )),
            ]
        })
    }

    proptest! {
        #[test]
        fn derivatives_agree_with_finite_differences(
            e in small_expr(),
            re in proptest::collection::vec(-1.0f64..1.0, 2),
            im in proptest::collection::vec(-1.0f64..1.0, 2),
            j in 0usize..2,
        ) {
            let p: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| c(*a, *b)).collect();
            for anti in [false, true] {
                let sym = if anti { wirtinger_dzbar(&e, j) } else { wirtinger_dz(&e, j) };
                let exact = sym.eval(&p).unwrap();
                let fd = fd_wirtinger(&e, &p, j, anti);
                // relative guard for the rare large-magnitude trees
                let scale = 1.0f64.max(exact.norm());
                prop_assert!((exact - fd).norm() <= 1e-6 * scale, "{} vs {}", exact, fd);
            }
        }

        #[test]
        fn conjugation_swaps_derivative_kinds(
            e in small_expr(),
            re in proptest::collection::vec(-1.0f64..1.0, 2),
            im in proptest::collection::vec(-1.0f64..1.0, 2),
            j in 0usize..2,
        ) {
            let p: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| c(*a, *b)).collect();
            let lhs = wirtinger_dzbar(&Expr::Conj(Box::new(e.clone())), j).eval(&p).unwrap();
            let rhs = wirtinger_dz(&e, j).eval(&p).unwrap().conj();
            prop_assert!((lhs - rhs).norm() <= 1e-10 * 1.0f64.max(rhs.norm()));
        }
    }
}
