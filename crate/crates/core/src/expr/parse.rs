//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := atom ("^" nonneg-int)? | "-" factor
//! atom   := number | "i" | ident | "conj(" expr ")" | "Re(" expr ")"
//!         | "Im(" expr ")" | "abs2(" expr ")" | "(" expr ")"
//! ```

use num_complex::Complex64;
use thiserror::Error;

use super::{Expr, VarSpace};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected token `{0}`")]
    UnexpectedToken(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("malformed number `{0}`")]
    BadNumber(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("negative exponent")]
    NegativeExponent,
    #[error("non-integer exponent `{0}`")]
    NonIntegerExponent(String),
    #[error("exponent `{0}` is too large")]
    ExponentOverflow(String),
    #[error("denominator is identically zero")]
    ZeroDenominator,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Num(s) | Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        let start = i;
        match ch {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((start, Tok::Plus)),
            b'-' => out.push((start, Tok::Minus)),
            b'*' => out.push((start, Tok::Star)),
            b'/' => out.push((start, Tok::Slash)),
            b'^' => out.push((start, Tok::Caret)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent part: e, E followed by optional sign and digits
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                out.push((start, Tok::Num(src[start..i].to_string())));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
                continue;
            }
            _ => {
                let c = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::UnexpectedChar(c),
                });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    space: &'a VarSpace,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind,
        }
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(t) => self.err(ParseErrorKind::UnexpectedToken(t.text())),
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let at = self.offset();
                    let den = self.factor()?;
                    if is_structurally_zero(&den) {
                        return Err(ParseError {
                            offset: at,
                            kind: ParseErrorKind::ZeroDenominator,
                        });
                    }
                    lhs = Expr::Div(Box::new(lhs), Box::new(den));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        match self.peek().cloned() {
            Some(Tok::Minus) => Err(self.err(ParseErrorKind::NegativeExponent)),
            Some(Tok::Num(s)) => {
                if !s.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(self.err(ParseErrorKind::NonIntegerExponent(s)));
                }
                let k: u32 = s
                    .parse()
                    .map_err(|_| self.err(ParseErrorKind::ExponentOverflow(s.clone())))?;
                self.pos += 1;
                Ok(Expr::Pow(Box::new(base), k))
            }
            _ => Err(self.unexpected()),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.err(ParseErrorKind::UnexpectedEnd));
        };
        match tok {
            Tok::Num(s) => {
                let v: f64 = s
                    .parse()
                    .map_err(|_| self.err(ParseErrorKind::BadNumber(s.clone())))?;
                self.pos += 1;
                Ok(Expr::Const(Complex64::new(v, 0.0)))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let wrap: Option<fn(Box<Expr>) -> Expr> = match name.as_str() {
                    "conj" => Some(Expr::Conj),
                    "Re" => Some(Expr::Re),
                    "Im" => Some(Expr::Im),
                    "abs2" => Some(Expr::Abs2),
                    _ => None,
                };
                if let Some(wrap) = wrap {
                    self.pos += 1;
                    self.expect(Tok::LParen)?;
                    let e = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(wrap(Box::new(e)));
                }
                if name == "i" {
                    self.pos += 1;
                    return Ok(Expr::Const(Complex64::new(0.0, 1.0)));
                }
                match self.space.lookup(&name) {
                    Some(index) => {
                        self.pos += 1;
                        Ok(Expr::var(index))
                    }
                    None => Err(self.err(ParseErrorKind::UnknownVariable(name))),
                }
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// A denominator is rejected when it contains no variables and evaluates to zero.
fn is_structurally_zero(e: &Expr) -> bool {
    e.arity() == 0 && matches!(e.eval(&[]), Ok(v) if v.norm_sqr() == 0.0)
}

/// Parses `source` against the variable names of `space`.
pub fn parse(source: &str, space: &VarSpace) -> Result<Expr, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: source.len(),
        space,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.unexpected());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    fn space3() -> VarSpace {
        VarSpace::ambient(3).unwrap()
    }

    #[test]
    fn sphere_expression_shape() {
        let e = parse("abs2(z1) + abs2(z2) - 1", &space3()).unwrap();
        let expected = Expr::Sub(
            b(Expr::Add(b(Expr::Abs2(b(Expr::var(0)))), b(Expr::Abs2(b(Expr::var(1)))))),
            b(Expr::constant(1.0)),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn rank_one_model_shape() {
        let e = parse("Re(w) + abs2(z1*z2)", &space3()).unwrap();
        let expected = Expr::Add(
            b(Expr::Re(b(Expr::var(2)))),
            b(Expr::Abs2(b(Expr::Mul(b(Expr::var(0)), b(Expr::var(1)))))),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn negative_exponent_rejected() {
        let err = parse("z1 ^ -1", &space3()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NegativeExponent);
        assert_eq!(err.offset, 5);
    }

    #[test]
    fn fractional_exponent_rejected() {
        let err = parse("z1^1.5", &space3()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonIntegerExponent("1.5".into()));
    }

    #[test]
    fn unknown_variable_carries_offset() {
        let err = parse("z1 + z7", &space3()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownVariable("z7".into()));
        assert_eq!(err.offset, 5);
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse("abs2(z1", &space3()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(err.offset, 7);
        let err = parse("z1 $ z2", &space3()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('$'));
        assert_eq!(err.offset, 3);
        let err = parse("z1 z2", &space3()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedToken("z2".into()));
    }

    #[test]
    fn zero_denominator_rejected() {
        let err = parse("z1/(1-1)", &space3()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ZeroDenominator);
    }

    #[test]
    fn unary_minus_binds_tighter_than_power_base() {
        let e = parse("-z1^2", &space3()).unwrap();
        assert_eq!(e, Expr::Neg(b(Expr::Pow(b(Expr::var(0)), 2))));
    }

    #[test]
    fn scientific_notation_numbers() {
        let e = parse("2.5e-3*i", &space3()).unwrap();
        assert_eq!(
            e,
            Expr::Mul(b(Expr::constant(2.5e-3)), b(Expr::Const(Complex64::new(0.0, 1.0))))
        );
    }

    /// Trees with the shapes the parser itself produces.
    fn parsed_shape() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(Expr::constant),
            Just(Expr::Const(Complex64::new(0.0, 1.0))),
            (0usize..3).prop_map(Expr::var),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                inner.clone().prop_map(|a| Expr::Conj(Box::new(a))),
                inner.clone().prop_map(|a| Expr::Re(Box::new(a))),
                inner.clone().prop_map(|a| Expr::Im(Box::new(a))),
                inner.clone().prop_map(|a| Expr::Abs2(Box::new(a))),
                (inner.clone(), 0u32..6).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
                (inner.clone(), inner.clone()).prop_map(|(a, c)| Expr::Add(Box::new(a), Box::new(c))),
                (inner.clone(), inner.clone()).prop_map(|(a, c)| Expr::Sub(Box::new(a), Box::new(c))),
                (inner.clone(), inner.clone()).prop_map(|(a, c)| Expr::Mul(Box::new(a), Box::new(c))),
                (inner.clone(), (0usize..3).prop_map(Expr::var))
                    .prop_map(|(a, c)| Expr::Div(Box::new(a), Box::new(c))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in parsed_shape()) {
            let space = space3();
            let text = e.display(&space).to_string();
            let back = parse(&text, &space).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
