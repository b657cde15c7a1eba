//! Evaluation in the irreducible representations `pi_theta`.
//!
//! On the basis `e_0, e_1, ...`:
//!
//! ```text
//! a e_n  = sqrt(1 - q^{2(n+1)}) e_{n+1}
//! a* e_n = sqrt(1 - q^{2n}) e_{n-1}
//! b e_n  = e^{i theta} q^n e_n
//! ```

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::QPolynomial;
use crate::error::{Error, Result};
use crate::laurent::LaurentScalar;

/// The compression of `pi_theta(p)` to the window `e_0..e_N`.
#[derive(Clone, Debug)]
pub struct CompressedRepr {
    /// `(N+1) x (N+1)` matrix of `P pi_theta(p) P`.
    pub matrix: DMatrix<Complex64>,
    /// Columns `0..valid_cols` are mapped into the window without loss, so
    /// products of compressions are exact there when this element is the
    /// right factor.
    pub valid_cols: usize,
    /// Frobenius norm of `(1 - P) pi_theta(p) P`, an upper bound on the
    /// operator norm of what the compression drops.
    pub tail_bound: f64,
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidQ(q))
    }
}

/// `prod_{t=1..steps} sqrt(1 - q^{2(l+t)})`: the weight of `a^steps e_l`.
fn raise_weight(q: f64, l: usize, steps: usize) -> f64 {
    (1..=steps)
        .map(|t| (1.0 - q.powi(2 * (l + t) as i32)).sqrt())
        .product()
}

/// Evaluates `p` in `pi_theta` compressed to the window of size `n + 1`.
///
/// For each column the contributions of monomials with the same `a`-shift and
/// the same `b` phase are collected exactly before evaluation, so identities
/// that cancel in the coefficient ring also cancel numerically.
pub fn eval_pi_theta(p: &QPolynomial, q: f64, theta: f64, n: usize) -> Result<CompressedRepr> {
    check_q(q)?;
    let dim = n + 1;
    let raise = p.max_raise() as usize;
    let mut full = DMatrix::<Complex64>::zeros(dim + raise, dim);

    for l in 0..dim {
        // (a-shift, b-phase) -> exact coefficient of the resulting vector.
        let mut groups: BTreeMap<(i64, i64), LaurentScalar> = BTreeMap::new();
        for (m, c) in p.terms() {
            let shift = m.a_signed();
            if (l as i64) + shift < 0 {
                continue;
            }
            let b_total = (m.b_pow() + m.bstar_pow()) as i64;
            let phase = m.b_pow() as i64 - m.bstar_pow() as i64;
            let entry = groups.entry((shift, phase)).or_default();
            *entry += &c.shift(2 * l as i64 * b_total);
        }
        for ((shift, phase), coeff) in groups {
            let value = coeff.eval(q);
            if value == 0.0 {
                continue;
            }
            let row = (l as i64 + shift) as usize;
            let weight = if shift >= 0 {
                raise_weight(q, l, shift as usize)
            } else {
                raise_weight(q, row, (-shift) as usize)
            };
            let z = Complex64::from_polar(value * weight, theta * phase as f64);
            full[(row, l)] += z;
        }
    }

    let matrix = full.rows(0, dim).into_owned();
    let tail_bound = full.rows(dim, raise).norm();
    let valid_cols = dim.saturating_sub(raise);
    Ok(CompressedRepr {
        matrix,
        valid_cols,
        tail_bound,
    })
}
