//! Real-valued expressions in complex variables `z_1 … z_N` and their conjugates.
//!
//! Expressions are parsed from a small infix grammar (see [`parse`]), evaluated at
//! complex points, and differentiated symbolically with respect to `z_j` and `z̄_j`
//! (Wirtinger calculus). Variables are addressed by zero-based index throughout the
//! API; the textual names (`z1`, `z2`, …, `w`) are a property of the [`VarSpace`].

mod diff;
mod parse;
mod real;

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub use diff::{normalize, wirtinger_dz, wirtinger_dzbar};
pub use parse::{parse, ParseError, ParseErrorKind};
pub use real::{is_real_valued, RealCheck, RealCheckMethod};

/// Abstract syntax tree of an expression.
///
/// Trees produced by [`parse`] never contain conjugated variables directly; those
/// appear once [`normalize`] pushes conjugation down to the leaves.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Var { index: usize, conj: bool },
    Neg(Box<Expr>),
    Conj(Box<Expr>),
    Re(Box<Expr>),
    Im(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    /// `|e|² = e · conj(e)`.
    Abs2(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("variable index {index} out of range for a point of dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },
    #[error("non-finite value produced by `{0}`")]
    NonFinite(String),
}

/// Names of the variables an expression may refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct VarSpace {
    names: Vec<String>,
    aliases: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VarSpaceError {
    #[error("ambient dimension must be at least 2, got {0}")]
    AmbientTooSmall(usize),
    #[error("a variable space needs at least one variable")]
    Empty,
}

impl VarSpace {
    /// Ambient space `ℂ^N` with variables `z1 … zN`; the last one is also reachable as `w`.
    pub fn ambient(dim: usize) -> Result<Self, VarSpaceError> {
        if dim < 2 {
            return Err(VarSpaceError::AmbientTooSmall(dim));
        }
        let names = (1..=dim).map(|j| format!("z{j}")).collect();
        Ok(Self {
            names,
            aliases: vec![("w".to_string(), dim - 1)],
        })
    }

    /// Parameter space `ℂ^q` with variables `u1 … uq`; `u` aliases `u1` when `q = 1`.
    pub fn parameters(dim: usize) -> Result<Self, VarSpaceError> {
        if dim == 0 {
            return Err(VarSpaceError::Empty);
        }
        let names = (1..=dim).map(|j| format!("u{j}")).collect();
        let aliases = if dim == 1 {
            vec![("u".to_string(), 0)]
        } else {
            Vec::new()
        };
        Ok(Self { names, aliases })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .or_else(|| self.aliases.iter().find(|(a, _)| a == name).map(|(_, i)| *i))
    }
}

impl Expr {
    pub fn constant(re: f64) -> Self {
        Expr::Const(Complex64::new(re, 0.0))
    }

    pub fn var(index: usize) -> Self {
        Expr::Var { index, conj: false }
    }

    pub fn var_bar(index: usize) -> Self {
        Expr::Var { index, conj: true }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == Complex64::new(0.0, 0.0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == Complex64::new(1.0, 0.0))
    }

    /// One more than the largest variable index used, or 0 for a constant tree.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var { index, .. } => index + 1,
            Expr::Neg(a) | Expr::Conj(a) | Expr::Re(a) | Expr::Im(a) | Expr::Abs2(a) => a.arity(),
            Expr::Pow(a, _) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    /// Evaluates the tree at `point`; conjugated variables read the conjugate entry.
    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var { index, conj } => {
                let z = point.get(*index).copied().ok_or(EvalError::VariableOutOfRange {
                    index: *index,
                    dim: point.len(),
                })?;
                if *conj {
                    z.conj()
                } else {
                    z
                }
            }
            Expr::Neg(a) => -a.eval(point)?,
            Expr::Conj(a) => a.eval(point)?.conj(),
            Expr::Re(a) => Complex64::new(a.eval(point)?.re, 0.0),
            Expr::Im(a) => Complex64::new(a.eval(point)?.im, 0.0),
            Expr::Abs2(a) => Complex64::new(a.eval(point)?.norm_sqr(), 0.0),
            Expr::Add(a, b) => a.eval(point)? + b.eval(point)?,
            Expr::Sub(a, b) => a.eval(point)? - b.eval(point)?,
            Expr::Mul(a, b) => a.eval(point)? * b.eval(point)?,
            Expr::Div(a, b) => {
                let den = b.eval(point)?;
                if den.norm_sqr() == 0.0 {
                    return Err(EvalError::DivisionByZero(self.to_string()));
                }
                a.eval(point)? / den
            }
            Expr::Pow(a, k) => a.eval(point)?.powu(*k),
        };
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(EvalError::NonFinite(self.to_string()));
        }
        Ok(v)
    }

    /// Printer bound to a variable space (so `z3` prints as the space's third name).
    pub fn display<'a>(&'a self, space: &'a VarSpace) -> ExprDisplay<'a> {
        ExprDisplay {
            expr: self,
            space: Some(space),
        }
    }

    fn variant_rank(&self) -> u8 {
        match self {
            Expr::Const(_) => 0,
            Expr::Var { .. } => 1,
            Expr::Neg(_) => 2,
            Expr::Conj(_) => 3,
            Expr::Re(_) => 4,
            Expr::Im(_) => 5,
            Expr::Abs2(_) => 6,
            Expr::Pow(..) => 7,
            Expr::Add(..) => 8,
            Expr::Sub(..) => 9,
            Expr::Mul(..) => 10,
            Expr::Div(..) => 11,
        }
    }

    /// Total structural order, used to sort the operands of commutative nodes.
    pub fn structural_cmp(&self, other: &Expr) -> Ordering {
        use Expr::*;
        match (self, other) {
            (Const(a), Const(b)) => a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)),
            (Var { index: i, conj: c }, Var { index: j, conj: d }) => i.cmp(j).then(c.cmp(d)),
            (Neg(a), Neg(b))
            | (Conj(a), Conj(b))
            | (Re(a), Re(b))
            | (Im(a), Im(b))
            | (Abs2(a), Abs2(b)) => a.structural_cmp(b),
            (Pow(a, k), Pow(b, l)) => a.structural_cmp(b).then(k.cmp(l)),
            (Add(a1, a2), Add(b1, b2))
            | (Sub(a1, a2), Sub(b1, b2))
            | (Mul(a1, a2), Mul(b1, b2))
            | (Div(a1, a2), Div(b1, b2)) => a1.structural_cmp(b1).then_with(|| a2.structural_cmp(b2)),
            _ => self.variant_rank().cmp(&other.variant_rank()),
        }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    space: Option<&'a VarSpace>,
}

fn fmt_real(x: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    // `{:?}` is the shortest representation that reads back to the same f64.
    if x < 0.0 || (x == 0.0 && x.is_sign_negative()) {
        write!(f, "(-{:?})", -x)
    } else {
        write!(f, "{x:?}")
    }
}

impl ExprDisplay<'_> {
    fn child<'b>(&self, e: &'b Expr) -> ExprDisplay<'b>
    where
        Self: 'b,
    {
        ExprDisplay {
            expr: e,
            space: self.space,
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Const(c) => {
                if c.im == 0.0 {
                    fmt_real(c.re, f)
                } else if c.re == 0.0 && c.im == 1.0 {
                    write!(f, "i")
                } else if c.re == 0.0 {
                    write!(f, "(")?;
                    fmt_real(c.im, f)?;
                    write!(f, "*i)")
                } else {
                    write!(f, "(")?;
                    fmt_real(c.re, f)?;
                    write!(f, " + ")?;
                    fmt_real(c.im, f)?;
                    write!(f, "*i)")
                }
            }
            Expr::Var { index, conj } => {
                let name = match self.space {
                    Some(s) if *index < s.dim() => s.name(*index).to_string(),
                    _ => format!("z{}", index + 1),
                };
                if *conj {
                    write!(f, "conj({name})")
                } else {
                    write!(f, "{name}")
                }
            }
            Expr::Neg(a) => write!(f, "-({})", self.child(a)),
            Expr::Conj(a) => write!(f, "conj({})", self.child(a)),
            Expr::Re(a) => write!(f, "Re({})", self.child(a)),
            Expr::Im(a) => write!(f, "Im({})", self.child(a)),
            Expr::Abs2(a) => write!(f, "abs2({})", self.child(a)),
            Expr::Pow(a, k) => write!(f, "({})^{k}", self.child(a)),
            Expr::Add(a, b) => write!(f, "({} + {})", self.child(a), self.child(b)),
            Expr::Sub(a, b) => write!(f, "({} - {})", self.child(a), self.child(b)),
            Expr::Mul(a, b) => write!(f, "({} * {})", self.child(a), self.child(b)),
            Expr::Div(a, b) => write!(f, "({} / {})", self.child(a), self.child(b)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        ExprDisplay {
            expr: self,
            space: None,
        }
        .fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sphere_vanishes_at_unit_vector() {
        let space = VarSpace::ambient(2).unwrap();
        let e = parse("abs2(z1) + abs2(z2) - 1", &space).unwrap();
        assert_eq!(e.eval(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn real_part_of_last_variable() {
        let space = VarSpace::ambient(2).unwrap();
        let e = parse("Re(w)", &space).unwrap();
        assert_eq!(e.eval(&[c(0.0, 1.0), c(3.0, 4.0)]).unwrap(), c(3.0, 0.0));
    }

    #[test]
    fn division_by_zero_reports_subexpression() {
        let space = VarSpace::ambient(2).unwrap();
        let e = parse("z1/z1", &space).unwrap();
        match e.eval(&[c(0.0, 0.0), c(1.0, 0.0)]) {
            Err(EvalError::DivisionByZero(s)) => assert_eq!(s, "(z1 / z1)"),
            other => panic!("expected division by zero, got {other:?}"),
        }
    }

    #[test]
    fn short_point_is_rejected() {
        let e = Expr::var(2);
        assert!(matches!(
            e.eval(&[c(1.0, 0.0)]),
            Err(EvalError::VariableOutOfRange { index: 2, dim: 1 })
        ));
    }

    #[test]
    fn ambient_space_requires_two_variables() {
        assert_eq!(VarSpace::ambient(1), Err(VarSpaceError::AmbientTooSmall(1)));
        let s = VarSpace::ambient(3).unwrap();
        assert_eq!(s.lookup("w"), Some(2));
        assert_eq!(s.lookup("z3"), Some(2));
        assert_eq!(s.lookup("u"), None);
    }

    #[test]
    fn parameter_alias_only_in_one_dimension() {
        assert_eq!(VarSpace::parameters(1).unwrap().lookup("u"), Some(0));
        assert_eq!(VarSpace::parameters(2).unwrap().lookup("u"), None);
    }
}
