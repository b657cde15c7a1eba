//! Exact symbolic arithmetic in the coordinate algebra of quantum SU(2).
//!
//! Elements are kept in the normal form `a^i b^j (b*)^k` or `(a*)^i b^j (b*)^k`
//! with coefficients in [`LaurentScalar`]. The relations used are
//!
//! ```text
//! ba = q ab,   b*a = q ab*,   bb* = b*b,
//! a*a + q^2 bb* = 1 = aa* + bb*
//! ```
//!
//! together with their adjoints. Besides the *-algebra structure this module
//! implements the grading automorphism `del_k` and the twisted derivations
//! `del_e`, `del_f`, from which the two sphere derivations are built.

mod parse;
pub(crate) mod repr;
mod rewrite;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::laurent::LaurentScalar;

pub use parse::parse_expression;
pub use repr::{eval_pi_theta, CompressedRepr};
pub use rewrite::{normal_form, normal_form_with, RewriteStrategy, Word};

/// One of the four generator letters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    AStar,
    B,
    BStar,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AStar, Letter::B, Letter::BStar];

    /// Exponent (in half-units) picked up under `del_k`.
    pub fn grade(self) -> i64 {
        match self {
            Letter::A | Letter::B => 1,
            Letter::AStar | Letter::BStar => -1,
        }
    }

    pub fn adjoint(self) -> Letter {
        match self {
            Letter::A => Letter::AStar,
            Letter::AStar => Letter::A,
            Letter::B => Letter::BStar,
            Letter::BStar => Letter::B,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::A => "a",
            Letter::AStar => "a*",
            Letter::B => "b",
            Letter::BStar => "b*",
        })
    }
}

/// A normal-ordered monomial `a^i b^j (b*)^k` or, when `starred`,
/// `(a*)^i b^j (b*)^k`.
///
/// A starred monomial always has `a_pow >= 1`; the unit is `(0, 0, 0)`
/// unstarred.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QMonomial {
    starred: bool,
    a_pow: u32,
    b_pow: u32,
    bstar_pow: u32,
}

impl QMonomial {
    pub const ONE: QMonomial = QMonomial {
        starred: false,
        a_pow: 0,
        b_pow: 0,
        bstar_pow: 0,
    };

    /// `a^i b^j (b*)^k`.
    pub fn new(i: u32, j: u32, k: u32) -> Self {
        Self {
            starred: false,
            a_pow: i,
            b_pow: j,
            bstar_pow: k,
        }
    }

    /// `(a*)^i b^j (b*)^k`; collapses to the unstarred form when `i == 0`.
    pub fn starred(i: u32, j: u32, k: u32) -> Self {
        Self {
            starred: i > 0,
            a_pow: i,
            b_pow: j,
            bstar_pow: k,
        }
    }

    pub fn is_starred(&self) -> bool {
        self.starred
    }

    pub fn a_pow(&self) -> u32 {
        self.a_pow
    }

    pub fn b_pow(&self) -> u32 {
        self.b_pow
    }

    pub fn bstar_pow(&self) -> u32 {
        self.bstar_pow
    }

    /// Signed power of `a`: positive for `a`, negative for `a*`.
    pub fn a_signed(&self) -> i64 {
        if self.starred {
            -(self.a_pow as i64)
        } else {
            self.a_pow as i64
        }
    }

    /// `del_k` weight in half-units.
    pub fn grade(&self) -> i64 {
        self.a_signed() + self.b_pow as i64 - self.bstar_pow as i64
    }

    pub fn degree(&self) -> u32 {
        self.a_pow + self.b_pow + self.bstar_pow
    }

    pub fn letters(&self) -> Vec<Letter> {
        let a = if self.starred { Letter::AStar } else { Letter::A };
        let mut out = Vec::with_capacity(self.degree() as usize);
        out.extend(std::iter::repeat_n(a, self.a_pow as usize));
        out.extend(std::iter::repeat_n(Letter::B, self.b_pow as usize));
        out.extend(std::iter::repeat_n(Letter::BStar, self.bstar_pow as usize));
        out
    }

    pub fn from_letter(l: Letter) -> Self {
        match l {
            Letter::A => Self::new(1, 0, 0),
            Letter::AStar => Self::starred(1, 0, 0),
            Letter::B => Self::new(0, 1, 0),
            Letter::BStar => Self::new(0, 0, 1),
        }
    }
}

impl fmt::Display for QMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == QMonomial::ONE {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        let mut push = |name: &str, p: u32| match p {
            0 => {}
            1 => parts.push(name.to_string()),
            _ => parts.push(format!("{name}^{p}")),
        };
        push(if self.starred { "a*" } else { "a" }, self.a_pow);
        push("b", self.b_pow);
        push("b*", self.bstar_pow);
        write!(f, "{}", parts.join("*"))
    }
}

/// A finite linear combination of normal monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QPolynomial {
    terms: BTreeMap<QMonomial, LaurentScalar>,
}

impl QPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(LaurentScalar::one())
    }

    pub fn scalar(c: LaurentScalar) -> Self {
        Self::term(QMonomial::ONE, c)
    }

    pub fn term(m: QMonomial, c: LaurentScalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    pub fn monomial(m: QMonomial) -> Self {
        Self::term(m, LaurentScalar::one())
    }

    pub fn letter(l: Letter) -> Self {
        Self::monomial(QMonomial::from_letter(l))
    }

    pub fn a() -> Self {
        Self::letter(Letter::A)
    }

    pub fn a_star() -> Self {
        Self::letter(Letter::AStar)
    }

    pub fn b() -> Self {
        Self::letter(Letter::B)
    }

    pub fn b_star() -> Self {
        Self::letter(Letter::BStar)
    }

    /// The sphere generator `A = b* b`.
    pub fn sphere_a() -> Self {
        Self::monomial(QMonomial::new(0, 1, 1))
    }

    /// The sphere generator `B = a b*`.
    pub fn sphere_b() -> Self {
        Self::monomial(QMonomial::new(1, 0, 1))
    }

    /// `B* = b a* = q^{-1} a* b`.
    pub fn sphere_b_star() -> Self {
        Self::term(QMonomial::starred(1, 1, 0), LaurentScalar::q_pow(-1))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&QMonomial, &LaurentScalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &QMonomial) -> LaurentScalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// The coefficient of the unit monomial.
    pub fn constant_term(&self) -> LaurentScalar {
        self.coefficient(&QMonomial::ONE)
    }

    pub(crate) fn add_term(&mut self, m: QMonomial, c: &LaurentScalar) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_default();
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, c: &LaurentScalar) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(*m, &(v * c));
        }
        out
    }

    pub fn scale_rational(&self, numer: i64, denom: i64) -> Self {
        self.scale(&LaurentScalar::from_ratio(numer, denom))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = qmul(&out, self);
        }
        out
    }

    /// Largest power of `a` over all monomials: the number of index steps
    /// an element can raise a basis vector by in the representation.
    pub fn max_raise(&self) -> u32 {
        self.terms
            .keys()
            .filter(|m| !m.is_starred())
            .map(|m| m.a_pow())
            .max()
            .unwrap_or(0)
    }

    /// Total number of `a`/`a*` letters in the longest-in-`a` monomial.
    pub fn a_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.a_pow()).max().unwrap_or(0)
    }

    /// `Some(g)` when every monomial has the same `del_k` weight `g`.
    pub fn homogeneous_grade(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(QMonomial::grade);
        let first = it.next().unwrap_or(0);
        it.all(|g| g == first).then_some(first)
    }

    /// Membership in the sphere subalgebra: invariance under `del_k`.
    pub fn is_sphere_element(&self) -> bool {
        self.terms.keys().all(|m| m.grade() == 0)
    }
}

/// Product of two normal monomials, returned in normal form.
fn mono_mul(x: &QMonomial, y: &QMonomial) -> QPolynomial {
    // Move b^j (b*)^k of `x` to the right of the a-part of `y`.
    let commute = (x.b_pow + x.bstar_pow) as i64 * y.a_signed();
    let prefactor = LaurentScalar::q_pow(commute);

    // alpha^i beta^l = a-part * p(bb*), with p a polynomial in x = bb*.
    let (a_signed, bb_poly) = a_part_product(x.a_signed(), y.a_signed());

    let mut out = QPolynomial::zero();
    for (s, c) in bb_poly.into_iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let s = s as u32;
        let m = if a_signed < 0 {
            QMonomial::starred(
                (-a_signed) as u32,
                x.b_pow + y.b_pow + s,
                x.bstar_pow + y.bstar_pow + s,
            )
        } else {
            QMonomial::new(
                a_signed as u32,
                x.b_pow + y.b_pow + s,
                x.bstar_pow + y.bstar_pow + s,
            )
        };
        out.add_term(m, &(&c * &prefactor));
    }
    out
}

/// Reduces `alpha^i beta^l` (signed powers of `a`) to `a-part * sum_s c_s (bb*)^s`.
fn a_part_product(left: i64, right: i64) -> (i64, Vec<LaurentScalar>) {
    if left == 0 || right == 0 || left.signum() == right.signum() {
        return (left + right, vec![LaurentScalar::one()]);
    }
    let i = left.abs();
    let l = right.abs();
    let m = i.min(l);
    // Factors (1 - c_t x) with c_t depending on the order of a and a*.
    let factors: Vec<LaurentScalar> = if left > 0 {
        // a^i (a*)^l: a a* = 1 - bb*, bb* a* = q^{-2} a* bb*.
        (1..=m).map(|t| LaurentScalar::q_pow(-2 * (l - t))).collect()
    } else {
        // (a*)^i a^l: a* a = 1 - q^2 bb*, bb* a = q^2 a bb*.
        (0..m).map(|t| LaurentScalar::q_pow(2 * (l - t))).collect()
    };
    let mut poly = vec![LaurentScalar::one()];
    for c in factors {
        let mut next = vec![LaurentScalar::zero(); poly.len() + 1];
        for (s, v) in poly.iter().enumerate() {
            next[s] += v;
            next[s + 1] -= &(v * &c);
        }
        poly = next;
    }
    (left + right, poly)
}

/// Exact product in normal form.
pub fn qmul(p: &QPolynomial, r: &QPolynomial) -> QPolynomial {
    let mut out = QPolynomial::zero();
    for (m1, c1) in &p.terms {
        for (m2, c2) in &r.terms {
            let c = c1 * c2;
            for (m, v) in mono_mul(m1, m2).terms {
                out.add_term(m, &(&v * &c));
            }
        }
    }
    out
}

/// Product of a sequence of letters, in normal form.
pub fn word_product(letters: &[Letter]) -> QPolynomial {
    letters
        .iter()
        .fold(QPolynomial::one(), |acc, l| qmul(&acc, &QPolynomial::letter(*l)))
}

/// The antilinear involution. Coefficients are real Laurent polynomials, so
/// only the monomials are reversed.
pub fn adjoint(p: &QPolynomial) -> QPolynomial {
    let mut out = QPolynomial::zero();
    for (m, c) in &p.terms {
        let reversed: Vec<Letter> = m.letters().iter().rev().map(|l| l.adjoint()).collect();
        for (mm, v) in word_product(&reversed).terms {
            out.add_term(mm, &(&v * c));
        }
    }
    out
}

/// The grading automorphism `del_k` (or its inverse).
pub fn del_k(p: &QPolynomial, inverse: bool) -> QPolynomial {
    let sign = if inverse { -1 } else { 1 };
    let mut out = QPolynomial::zero();
    for (m, c) in &p.terms {
        out.add_term(*m, &c.shift(sign * m.grade()));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Twisted {
    E,
    F,
}

fn twisted_on_letter(kind: Twisted, l: Letter) -> QPolynomial {
    match (kind, l) {
        (Twisted::E, Letter::A) => -QPolynomial::b_star(),
        (Twisted::E, Letter::B) => QPolynomial::a_star().scale(&LaurentScalar::q_pow(-1)),
        (Twisted::E, _) => QPolynomial::zero(),
        (Twisted::F, Letter::AStar) => QPolynomial::b().scale(&LaurentScalar::q_pow(1)),
        (Twisted::F, Letter::BStar) => -QPolynomial::a(),
        (Twisted::F, _) => QPolynomial::zero(),
    }
}

/// Twisted Leibniz expansion over the letters of each monomial:
/// `D(x_1..x_n) = sum_t del_{k^-1}(x_1..x_{t-1}) D(x_t) del_k(x_{t+1}..x_n)`.
fn twisted_derivation(kind: Twisted, p: &QPolynomial) -> QPolynomial {
    let mut out = QPolynomial::zero();
    for (m, c) in &p.terms {
        let letters = m.letters();
        for t in 0..letters.len() {
            let d = twisted_on_letter(kind, letters[t]);
            if d.is_zero() {
                continue;
            }
            let before: i64 = letters[..t].iter().map(|l| l.grade()).sum();
            let after: i64 = letters[t + 1..].iter().map(|l| l.grade()).sum();
            let prefix = QPolynomial::monomial(monomial_of(&letters[..t]));
            let suffix = QPolynomial::monomial(monomial_of(&letters[t + 1..]));
            let term = qmul(&qmul(&prefix, &d), &suffix);
            let scale = c.shift(after - before);
            for (mm, v) in term.terms {
                out.add_term(mm, &(&v * &scale));
            }
        }
    }
    out
}

/// A contiguous piece of a normal word is itself a normal monomial.
fn monomial_of(letters: &[Letter]) -> QMonomial {
    let mut m = QMonomial::ONE;
    for l in letters {
        match l {
            Letter::A => m.a_pow += 1,
            Letter::AStar => {
                m.a_pow += 1;
                m.starred = true;
            }
            Letter::B => m.b_pow += 1,
            Letter::BStar => m.bstar_pow += 1,
        }
    }
    m
}

pub fn del_e(p: &QPolynomial) -> QPolynomial {
    twisted_derivation(Twisted::E, p)
}

pub fn del_f(p: &QPolynomial) -> QPolynomial {
    twisted_derivation(Twisted::F, p)
}

fn require_sphere(p: &QPolynomial) -> Result<()> {
    if p.is_sphere_element() {
        Ok(())
    } else {
        Err(Error::NotSphereElement(p.to_string()))
    }
}

/// `d_1 = q^{1/2} del_e` on the sphere subalgebra.
pub fn del1_sym(p: &QPolynomial) -> Result<QPolynomial> {
    require_sphere(p)?;
    Ok(del_e(p).scale(&LaurentScalar::q_pow_half(1)))
}

/// `d_2 = q^{-1/2} del_f` on the sphere subalgebra.
pub fn del2_sym(p: &QPolynomial) -> Result<QPolynomial> {
    require_sphere(p)?;
    Ok(del_f(p).scale(&LaurentScalar::q_pow_half(-1)))
}

impl Add for &QPolynomial {
    type Output = QPolynomial;
    fn add(self, rhs: &QPolynomial) -> QPolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c);
        }
        out
    }
}

impl Add for QPolynomial {
    type Output = QPolynomial;
    fn add(self, rhs: QPolynomial) -> QPolynomial {
        &self + &rhs
    }
}

impl Sub for &QPolynomial {
    type Output = QPolynomial;
    fn sub(self, rhs: &QPolynomial) -> QPolynomial {
        self + &(-rhs)
    }
}

impl Sub for QPolynomial {
    type Output = QPolynomial;
    fn sub(self, rhs: QPolynomial) -> QPolynomial {
        &self - &rhs
    }
}

impl Neg for &QPolynomial {
    type Output = QPolynomial;
    fn neg(self) -> QPolynomial {
        QPolynomial {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Neg for QPolynomial {
    type Output = QPolynomial;
    fn neg(self) -> QPolynomial {
        -&self
    }
}

impl Mul for &QPolynomial {
    type Output = QPolynomial;
    fn mul(self, rhs: &QPolynomial) -> QPolynomial {
        qmul(self, rhs)
    }
}

impl Mul for QPolynomial {
    type Output = QPolynomial;
    fn mul(self, rhs: QPolynomial) -> QPolynomial {
        qmul(&self, &rhs)
    }
}

impl From<LaurentScalar> for QPolynomial {
    fn from(c: LaurentScalar) -> Self {
        QPolynomial::scalar(c)
    }
}

impl fmt::Display for QPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if *m == QMonomial::ONE {
                write!(f, "({c})")?;
            } else if c.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "({c})*{m}")?;
            }
        }
        Ok(())
    }
}

/// `(1 - q^{2n}) / (1 - q^2) = 1 + q^2 + ... + q^{2(n-1)}`.
pub fn q_number_squared(n: u32) -> LaurentScalar {
    let mut s = LaurentScalar::zero();
    for j in 0..n as i64 {
        s += &LaurentScalar::q_pow(2 * j);
    }
    s
}

/// Finite approximant of the spectral projection of `A` at `q^{2k}`.
///
/// Built from the limit formula
/// `chi_k = lim_M ( q^{-2kM} A^M - sum_{j=1..k} q^{-2jM} chi_{k-j} )`,
/// with the inner projections replaced by approximants of order `(j+1) M`
/// so that the substitution error stays below the outer scale factor.
pub fn indicator_approximant(k: u32, order: u32) -> QPolynomial {
    let a_pow = QPolynomial::sphere_a().pow(order);
    let lead = a_pow.scale(&LaurentScalar::q_pow(-2 * k as i64 * order as i64));
    let mut out = lead;
    for j in 1..=k {
        let inner = indicator_approximant(k - j, (j + 1) * order);
        out = &out - &inner.scale(&LaurentScalar::q_pow(-2 * j as i64 * order as i64));
    }
    out
}

/// The unnormalized matrix-unit polynomial `B^{n-k} chi_k` (or
/// `(B*)^{k-n} chi_k`), using [`indicator_approximant`] of the given order.
///
/// Multiplying its evaluation by `C_{n,k}^{-1/2}` approximates `f_{n,k}`.
pub fn matrix_unit_polynomial(n: u32, k: u32, order: u32) -> QPolynomial {
    let chi = indicator_approximant(k, order);
    let shift = if n >= k {
        QPolynomial::sphere_b().pow(n - k)
    } else {
        QPolynomial::sphere_b_star().pow(k - n)
    };
    qmul(&shift, &chi)
}
