//! The derivation `d_1` on truncated elements and the seminorm `L`.
//!
//! A derivative is stored in the basis `f_{n,k} (b*)^2` with `n <= N` and
//! `k <= N + 1`: the first term of the closed form moves mass one column to
//! the right, so a window element has derivatives in column `N + 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{from_qpoly, from_row_major, row_major, sigma_max, ModelConstants, PodlesElement};
use crate::qsymb::{del1_sym, eval_pi_theta, QPolynomial};

/// `xi = sum c_{n,k} f_{n,k} (b*)^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeElement {
    constants: ModelConstants,
    c: DMatrix<Complex64>,
}

impl DerivativeElement {
    /// `c` must be `(N + 1) x (N + 2)`.
    pub fn new(constants: ModelConstants, c: DMatrix<Complex64>) -> Result<Self> {
        let (r, k) = (constants.dim(), constants.dim() + 1);
        if c.nrows() != r || c.ncols() != k {
            return Err(Error::InvalidArgument(format!(
                "coefficient matrix is {}x{}, expected {r}x{k}",
                c.nrows(),
                c.ncols()
            )));
        }
        Ok(Self { constants, c })
    }

    pub fn zero(constants: ModelConstants) -> Self {
        let c = DMatrix::zeros(constants.dim(), constants.dim() + 1);
        Self { constants, c }
    }

    pub fn constants(&self) -> &ModelConstants {
        &self.constants
    }

    pub fn coefficients(&self) -> &DMatrix<Complex64> {
        &self.c
    }

    pub fn coefficient(&self, n: usize, k: usize) -> Complex64 {
        self.c[(n, k)]
    }

    /// `[c_{n,k} q^{2k}]`: the matrix of `pi_0(xi)` up to the phase of
    /// `(b*)^2`.
    pub fn weighted(&self) -> DMatrix<Complex64> {
        let mut w = self.c.clone();
        for k in 0..w.ncols() {
            let s = self.constants.weight(k);
            w.column_mut(k).iter_mut().for_each(|z| *z *= s);
        }
        w
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.constants != other.constants {
            return Err(Error::MismatchedConstants);
        }
        Ok(Self {
            constants: self.constants,
            c: &self.c + &other.c,
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            constants: self.constants,
            c: &self.c * s,
        }
    }

    pub fn to_json(&self) -> String {
        let doc = DerivativeDoc {
            q: self.constants.q(),
            order: self.constants.order(),
            c: row_major(&self.c),
        };
        serde_json::to_string(&doc).expect("plain numeric document")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: DerivativeDoc = serde_json::from_str(s)?;
        let constants = ModelConstants::with_guard(doc.q, doc.order, true)?;
        let c = from_row_major(&doc.c, constants.dim(), constants.dim() + 1)?;
        Self::new(constants, c)
    }
}

#[derive(Serialize, Deserialize)]
struct DerivativeDoc {
    q: f64,
    #[serde(rename = "N")]
    order: usize,
    c: Vec<[f64; 2]>,
}

/// The derivation `d_1` in closed form:
///
/// ```text
/// (1 - q^2) c_{n,k} = lambda_{n,k-1} q^{-3k+1} sqrt(1 - q^{2k})
///                   - lambda_{n+1,k} q^{-2k-n} sqrt(1 - q^{2(n+1)})
/// ```
///
/// with `lambda_{n,-1} = 0` and `lambda_{N+1,k} = 0`.
pub fn d1(x: &PodlesElement) -> DerivativeElement {
    let constants = *x.constants();
    let q = constants.q();
    let dim = constants.dim();
    let lam = x.lambda();
    let denom = 1.0 - q * q;
    let mut c = DMatrix::zeros(dim, dim + 1);
    for k in 0..=dim {
        let first = if k >= 1 {
            q.powi(1 - 3 * k as i32) * (1.0 - q.powi(2 * k as i32)).sqrt()
        } else {
            0.0
        };
        for n in 0..dim {
            let mut v = Complex64::new(0.0, 0.0);
            if k >= 1 {
                v += lam[(n, k - 1)] * first;
            }
            if n + 1 < dim && k < dim {
                let second = q.powi(-2 * k as i32 - n as i32) * (1.0 - q.powi(2 * (n as i32 + 1))).sqrt();
                v -= lam[(n + 1, k)] * second;
            }
            c[(n, k)] = v / denom;
        }
    }
    DerivativeElement { constants, c }
}

/// The norm of a derivative: the largest singular value of the
/// column-weighted coefficients.
pub fn deriv_norm(xi: &DerivativeElement) -> f64 {
    sigma_max(&xi.weighted())
}

/// `L(x) = max(|d_1(x)|, |d_1(x*)|)`, using `d_2(x) = -d_1(x*)*`.
pub fn seminorm_l(x: &PodlesElement) -> f64 {
    let direct = deriv_norm(&d1(x));
    if x.is_self_adjoint(0.0) {
        return direct;
    }
    direct.max(deriv_norm(&d1(&x.adjoint())))
}

/// The matrix of `pi_theta(xi)` on the window of order `N + 1`, assembled
/// from the matrices of `f_{n,k}` and a direct evaluation of `(b*)^2`.
pub fn representation_matrix(xi: &DerivativeElement, theta: f64) -> Result<DMatrix<Complex64>> {
    let constants = xi.constants;
    let dim = constants.dim() + 1;
    let mut f = DMatrix::zeros(dim, dim);
    for n in 0..constants.dim() {
        for k in 0..dim {
            // pi_theta(f_{n,k}) = e^{-i theta (n - k)} E_{n,k}
            f[(n, k)] = xi.c[(n, k)] * Complex64::from_polar(1.0, -theta * (n as f64 - k as f64));
        }
    }
    let bs2 = eval_pi_theta(&QPolynomial::b_star().pow(2), constants.q(), theta, dim - 1)?;
    Ok(f * bs2.matrix)
}

/// Operator norm of `pi_theta(xi)`, computed without the closed form.
pub fn representation_norm(xi: &DerivativeElement, theta: f64) -> Result<f64> {
    Ok(sigma_max(&representation_matrix(xi, theta)?))
}

/// Outcome of comparing the two routes to `d_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrosscheckReport {
    /// Largest entrywise difference on the compared block.
    pub discrepancy: f64,
    /// Largest entry of the symbolic route on the compared block.
    pub scale: f64,
    /// Rows `0..rows` and columns `0..cols` were compared.
    pub rows: usize,
    pub cols: usize,
}

/// Computes `d_1(p)` symbolically and through the closed form on the
/// truncated element, both in `pi_theta`, and compares them.
///
/// Truncating `p` to the window drops `lambda_{N+1,k}` and everything in
/// column `N + 1`, so rows `<= N - 1` and columns `<= N` are compared.
pub fn d1_crosscheck(p: &QPolynomial, constants: &ModelConstants, theta: f64) -> Result<CrosscheckReport> {
    let symbolic = del1_sym(p)?;
    let route_i = eval_pi_theta(&symbolic, constants.q(), theta, constants.order() + 1)?.matrix;
    let x = from_qpoly(p, constants)?;
    let route_ii = representation_matrix(&d1(&x), theta)?;
    let rows = constants.order();
    let cols = constants.dim();
    let mut discrepancy = 0.0_f64;
    let mut scale = 0.0_f64;
    for n in 0..rows {
        for k in 0..cols {
            discrepancy = discrepancy.max((route_i[(n, k)] - route_ii[(n, k)]).norm());
            scale = scale.max(route_i[(n, k)].norm());
        }
    }
    Ok(CrosscheckReport {
        discrepancy,
        scale,
        rows,
        cols,
    })
}
