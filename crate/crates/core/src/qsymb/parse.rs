//! Plain-text expressions for elements of the coordinate algebra.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (['*'] factor)*
//! factor := ('-' factor) | atom ['^' power]
//! atom   := a | a* | b | b* | A | B | B* | q | number ['/' number] | '(' expr ')'
//! power  := integer | '(' ['-'] integer ['/' integer] ')' | '-' integer
//! ```
//!
//! A `*` directly after `a`, `b` or `B` is the involution when it is followed
//! by the end of input, whitespace, `)`, `+`, `-`, `*` or `^`; otherwise it is
//! a product. Fractional and negative powers are only allowed on `q`, and
//! their denominator must divide 2.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{qmul, QPolynomial};
use crate::error::{Error, Result};
use crate::laurent::LaurentScalar;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Gen(Gen),
    Q,
    Num(BigInt),
    Slash,
    Plus,
    Minus,
    Times,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Gen {
    A,
    AStar,
    B,
    BStar,
    SphereA,
    SphereB,
    SphereBStar,
}

fn parse_err(position: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position,
        message: message.into(),
    }
}

fn lex(input: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let star_follows = |i: usize| -> bool {
        if chars.get(i) != Some(&'*') {
            return false;
        }
        match chars.get(i + 1) {
            None => true,
            Some(c) => c.is_whitespace() || matches!(c, ')' | '+' | '-' | '*' | '^'),
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            'a' | 'b' | 'B' => {
                let starred = star_follows(i + 1);
                i += if starred { 2 } else { 1 };
                Tok::Gen(match (c, starred) {
                    ('a', false) => Gen::A,
                    ('a', true) => Gen::AStar,
                    ('b', false) => Gen::B,
                    ('b', true) => Gen::BStar,
                    ('B', false) => Gen::SphereB,
                    _ => Gen::SphereBStar,
                })
            }
            'A' => {
                i += 1;
                Tok::Gen(Gen::SphereA)
            }
            'q' => {
                i += 1;
                Tok::Q
            }
            '0'..='9' => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                Tok::Num(digits.parse().expect("ascii digits"))
            }
            '/' | '+' | '-' | '*' | '^' | '(' | ')' => {
                i += 1;
                match c {
                    '/' => Tok::Slash,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Times,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    _ => Tok::RParen,
                }
            }
            other => return Err(parse_err(start, format!("unexpected character '{other}'"))),
        };
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        let at = self.offset();
        match self.next() {
            Some(t) if t == tok => Ok(()),
            _ => Err(parse_err(at, format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<QPolynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Gen(_) | Tok::Q | Tok::Num(_) | Tok::LParen)
        )
    }

    fn term(&mut self) -> Result<QPolynomial> {
        let mut acc = self.factor()?;
        loop {
            if self.peek() == Some(&Tok::Times) {
                self.pos += 1;
                acc = qmul(&acc, &self.factor()?);
            } else if self.starts_factor() {
                acc = qmul(&acc, &self.factor()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<QPolynomial> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(-self.factor()?);
        }
        let at = self.offset();
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(match base {
                Atom::Q => QPolynomial::scalar(LaurentScalar::q_pow(1)),
                Atom::Poly(p) => p,
            });
        }
        self.pos += 1;
        let exp_at = self.offset();
        let (num, den) = self.power()?;
        match base {
            Atom::Q => {
                if den != 1 && den != 2 {
                    return Err(parse_err(exp_at, "powers of q must be multiples of 1/2"));
                }
                let half = num * (2 / den);
                Ok(QPolynomial::scalar(LaurentScalar::q_pow_half(half)))
            }
            Atom::Poly(p) => {
                if den != 1 || num < 0 {
                    return Err(parse_err(
                        exp_at,
                        "only q may carry negative or fractional powers",
                    ));
                }
                let n = u32::try_from(num).map_err(|_| parse_err(at, "power too large"))?;
                Ok(p.pow(n))
            }
        }
    }

    fn small_int(&mut self) -> Result<i64> {
        let at = self.offset();
        match self.next() {
            Some(Tok::Num(n)) => {
                i64::try_from(n).map_err(|_| parse_err(at, "integer too large"))
            }
            _ => Err(parse_err(at, "expected an integer")),
        }
    }

    /// Returns `(numerator, denominator)` of a power in lowest terms.
    fn power(&mut self) -> Result<(i64, i64)> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok((-self.small_int()?, 1))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let sign = if self.peek() == Some(&Tok::Minus) {
                    self.pos += 1;
                    -1
                } else {
                    1
                };
                let num = self.small_int()?;
                let mut den = 1;
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    let at = self.offset();
                    den = self.small_int()?;
                    if den == 0 {
                        return Err(parse_err(at, "division by zero"));
                    }
                }
                self.expect(Tok::RParen, "')'")?;
                let g = gcd(num, den);
                Ok((sign * num / g, den / g))
            }
            _ => Ok((self.small_int()?, 1)),
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let at = self.offset();
        match self.next() {
            Some(Tok::Gen(g)) => Ok(Atom::Poly(match g {
                Gen::A => QPolynomial::a(),
                Gen::AStar => QPolynomial::a_star(),
                Gen::B => QPolynomial::b(),
                Gen::BStar => QPolynomial::b_star(),
                Gen::SphereA => QPolynomial::sphere_a(),
                Gen::SphereB => QPolynomial::sphere_b(),
                Gen::SphereBStar => QPolynomial::sphere_b_star(),
            })),
            Some(Tok::Q) => Ok(Atom::Q),
            Some(Tok::Num(n)) => {
                let mut value = BigRational::from_integer(n);
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    let den_at = self.offset();
                    match self.next() {
                        Some(Tok::Num(d)) if d != BigInt::from(0) => {
                            value /= BigRational::from_integer(d);
                        }
                        Some(Tok::Num(_)) => return Err(parse_err(den_at, "division by zero")),
                        _ => return Err(parse_err(den_at, "expected a denominator")),
                    }
                }
                Ok(Atom::Poly(QPolynomial::scalar(LaurentScalar::monomial(
                    value, 0,
                ))))
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Atom::Poly(inner))
            }
            Some(_) => Err(parse_err(at, "expected an operand")),
            None => Err(parse_err(at, "unexpected end of input")),
        }
    }
}

enum Atom {
    Q,
    Poly(QPolynomial),
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Parses an expression into a normal-form polynomial.
pub fn parse_expression(input: &str) -> Result<QPolynomial> {
    let toks = lex(input)?;
    if toks.is_empty() {
        return Err(parse_err(0, "empty expression"));
    }
    let mut parser = Parser {
        toks,
        pos: 0,
        end: input.len(),
    };
    let p = parser.expr()?;
    if parser.pos < parser.toks.len() {
        return Err(parse_err(parser.offset(), "unexpected trailing input"));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsymb::{adjoint, QMonomial};

    fn p(s: &str) -> QPolynomial {
        parse_expression(s).unwrap()
    }

    #[test]
    fn generators() {
        assert_eq!(p("a"), QPolynomial::a());
        assert_eq!(p("a*"), QPolynomial::a_star());
        assert_eq!(p("b*"), QPolynomial::b_star());
        assert_eq!(p("A"), QPolynomial::sphere_a());
        assert_eq!(p("B*"), adjoint(&QPolynomial::sphere_b()));
        assert_eq!(p("1"), QPolynomial::one());
    }

    #[test]
    fn star_versus_product() {
        assert_eq!(p("a*b"), qmul(&QPolynomial::a(), &QPolynomial::b()));
        assert_eq!(p("a* b"), qmul(&QPolynomial::a_star(), &QPolynomial::b()));
        assert_eq!(p("a**b"), qmul(&QPolynomial::a_star(), &QPolynomial::b()));
        assert_eq!(p("b*b"), p("b b"));
        assert_eq!(p("b*^2"), QPolynomial::b_star().pow(2));
        assert_eq!(p("(b* a*)"), p("q^-1 a* b*"));
    }

    #[test]
    fn scalars_and_powers() {
        let expected = QPolynomial::term(QMonomial::new(0, 1, 1), LaurentScalar::from_ratio(3, 4));
        assert_eq!(p("3/4*A"), expected);
        assert_eq!(p("q^(1/2)"), QPolynomial::scalar(LaurentScalar::q_pow_half(1)));
        assert_eq!(p("q^(-2/4)"), QPolynomial::scalar(LaurentScalar::q_pow_half(-1)));
        assert_eq!(p("A^3 - A^3"), QPolynomial::zero());
        assert_eq!(p("-A + 2"), &QPolynomial::one().scale_rational(2, 1) - &QPolynomial::sphere_a());
        assert_eq!(p("(1 - A)^2"), p("1 - 2A + A A"));
    }

    #[test]
    fn errors() {
        for bad in ["", "a +", "x", "A^(1/2)", "q^(1/3)", "(A", "A)", "1/0", "A^-1"] {
            assert!(parse_expression(bad).is_err(), "{bad}");
        }
        match parse_expression("A + x") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
    }
}
