//! Laurent polynomials in `q^{1/2}` with rational coefficients.
//!
//! Exponents are stored in half-units: the key `e` stands for `q^{e/2}`.
//! Zero coefficients are never stored, so structural equality is ring
//! equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentScalar {
    terms: BTreeMap<i64, BigRational>,
}

impl LaurentScalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn from_integer(c: i64) -> Self {
        Self::monomial(BigRational::from_integer(BigInt::from(c)), 0)
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::monomial(BigRational::new(numer.into(), denom.into()), 0)
    }

    /// `c * q^{half_exp/2}`.
    pub fn monomial(c: BigRational, half_exp: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(half_exp, c);
        }
        Self { terms }
    }

    /// `q^{half_exp/2}`.
    pub fn q_pow_half(half_exp: i64) -> Self {
        Self::monomial(BigRational::one(), half_exp)
    }

    /// `q^n`.
    pub fn q_pow(n: i64) -> Self {
        Self::q_pow_half(2 * n)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|c| c.is_one())
    }

    /// Iterates `(half_exponent, coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Multiplies by `q^{half_exp/2}`.
    pub fn shift(&self, half_exp: i64) -> Self {
        if half_exp == 0 {
            return self.clone();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e + half_exp, c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    /// Coefficient of `q^{half_exp/2}`.
    pub fn coefficient(&self, half_exp: i64) -> BigRational {
        self.terms.get(&half_exp).cloned().unwrap_or_else(BigRational::zero)
    }

    /// True when every exponent is an integer power of `q`.
    pub fn has_integral_exponents(&self) -> bool {
        self.terms.keys().all(|e| e % 2 == 0)
    }

    fn add_term(&mut self, half_exp: i64, c: &BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(half_exp).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&half_exp);
        }
    }

    /// Evaluates at a numeric `q > 0`.
    ///
    /// Terms are summed from the smallest magnitude upwards so the result is
    /// deterministic and loses as little as possible to cancellation.
    pub fn eval(&self, q: f64) -> f64 {
        let sqrt_q = q.sqrt();
        let mut values: Vec<f64> = self
            .terms
            .iter()
            .map(|(e, c)| rational_to_f64(c) * pow_half(q, sqrt_q, *e))
            .collect();
        values.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        values.into_iter().sum()
    }
}

fn pow_half(q: f64, sqrt_q: f64, half_exp: i64) -> f64 {
    let whole = (half_exp.div_euclid(2)) as i32;
    let odd = half_exp.rem_euclid(2) == 1;
    let base = q.powi(whole);
    if odd {
        base * sqrt_q
    } else {
        base
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Ratio::to_f64 only fails for values outside the f64 range.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

impl From<i64> for LaurentScalar {
    fn from(c: i64) -> Self {
        Self::from_integer(c)
    }
}

impl AddAssign<&LaurentScalar> for LaurentScalar {
    fn add_assign(&mut self, rhs: &LaurentScalar) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c);
        }
    }
}

impl SubAssign<&LaurentScalar> for LaurentScalar {
    fn sub_assign(&mut self, rhs: &LaurentScalar) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, &-c);
        }
    }
}

impl Add for &LaurentScalar {
    type Output = LaurentScalar;
    fn add(self, rhs: &LaurentScalar) -> LaurentScalar {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for LaurentScalar {
    type Output = LaurentScalar;
    fn add(mut self, rhs: LaurentScalar) -> LaurentScalar {
        self += &rhs;
        self
    }
}

impl Sub for &LaurentScalar {
    type Output = LaurentScalar;
    fn sub(self, rhs: &LaurentScalar) -> LaurentScalar {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for LaurentScalar {
    type Output = LaurentScalar;
    fn sub(mut self, rhs: LaurentScalar) -> LaurentScalar {
        self -= &rhs;
        self
    }
}

impl Neg for &LaurentScalar {
    type Output = LaurentScalar;
    fn neg(self) -> LaurentScalar {
        LaurentScalar {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl Neg for LaurentScalar {
    type Output = LaurentScalar;
    fn neg(self) -> LaurentScalar {
        -&self
    }
}

impl Mul for &LaurentScalar {
    type Output = LaurentScalar;
    fn mul(self, rhs: &LaurentScalar) -> LaurentScalar {
        let mut out = LaurentScalar::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1 + e2, &(c1 * c2));
            }
        }
        out
    }
}

impl Mul for LaurentScalar {
    type Output = LaurentScalar;
    fn mul(self, rhs: LaurentScalar) -> LaurentScalar {
        &self * &rhs
    }
}

impl fmt::Display for LaurentScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let show_coeff = !abs.is_one() || *e == 0;
            if show_coeff {
                write!(f, "{abs}")?;
            }
            if *e != 0 {
                if show_coeff {
                    write!(f, "*")?;
                }
                if e % 2 == 0 {
                    if *e == 2 {
                        write!(f, "q")?;
                    } else {
                        write!(f, "q^{}", e / 2)?;
                    }
                } else {
                    write!(f, "q^({}/2)", e)?;
                }
            }
        }
        Ok(())
    }
}
