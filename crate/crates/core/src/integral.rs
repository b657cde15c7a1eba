//! The quantum vertical, horizontal and total integrals.
//!
//! All operators act on coefficient columns: a vector `v` in the fiber `k`
//! stands for `sum_n v_n f_{n,k}`, and its norm is the Euclidean norm of `v`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dirac::{deriv_norm, DerivativeElement};
use crate::error::{Error, Result};
use crate::model::{sigma_max, ModelConstants, PodlesElement};

/// A coefficient column in the fiber over `q^{2k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberColumn {
    pub fiber: usize,
    pub coeffs: DVector<Complex64>,
}

impl FiberColumn {
    pub fn zeros(fiber: usize, len: usize) -> Self {
        Self {
            fiber,
            coeffs: DVector::zeros(len),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }
}

/// The shift, diagonal and projection operators building the integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralOperators {
    q: f64,
}

impl IntegralOperators {
    pub fn new(constants: &ModelConstants) -> Self {
        Self { q: constants.q() }
    }

    /// `Gamma` at `(n, k)`: `q^{n-k-1} sqrt((1 - q^{2(k+1)}) / (1 - q^{2n}))`
    /// for `n >= k + 1`, else 0.
    pub fn gamma_entry(&self, n: usize, k: usize) -> f64 {
        if n < k + 1 {
            return 0.0;
        }
        let q = self.q;
        q.powi((n - k - 1) as i32)
            * ((1.0 - q.powi(2 * (k as i32 + 1))) / (1.0 - q.powi(2 * n as i32))).sqrt()
    }

    /// `Delta` at `(n, k)`: `q^{k-n+1} sqrt((1 - q^{2(n-1)}) / (1 - q^{2k}))`
    /// for `0 < n <= k`, else 0.
    pub fn delta_entry(&self, n: usize, k: usize) -> f64 {
        if n == 0 || n > k {
            return 0.0;
        }
        let q = self.q;
        q.powi((k - n + 1) as i32)
            * ((1.0 - q.powi(2 * (n as i32 - 1))) / (1.0 - q.powi(2 * k as i32))).sqrt()
    }

    /// `S^V: f_{n,k} -> f_{n+1,k}`. The last entry is dropped, so the column
    /// length stays fixed.
    pub fn shift_vertical(&self, v: &FiberColumn) -> FiberColumn {
        FiberColumn {
            fiber: v.fiber,
            coeffs: shift_down(&v.coeffs),
        }
    }

    /// `S^H: f_{n,k} -> f_{n+1,k+1}`.
    pub fn shift_horizontal(&self, v: &FiberColumn) -> FiberColumn {
        FiberColumn {
            fiber: v.fiber + 1,
            coeffs: shift_down(&v.coeffs),
        }
    }

    /// `(S^H)*: f_{n,k} -> f_{n-1,k-1}`, zero when `n` or `k` is 0.
    pub fn shift_horizontal_adjoint(&self, v: &FiberColumn) -> FiberColumn {
        let len = v.coeffs.len();
        if v.fiber == 0 {
            return FiberColumn::zeros(0, len);
        }
        let mut out = DVector::zeros(len);
        for n in 1..len {
            out[n - 1] = v.coeffs[n];
        }
        FiberColumn {
            fiber: v.fiber - 1,
            coeffs: out,
        }
    }

    pub fn gamma(&self, v: &FiberColumn) -> FiberColumn {
        self.diagonal(v, |n, k| self.gamma_entry(n, k))
    }

    pub fn delta(&self, v: &FiberColumn) -> FiberColumn {
        self.diagonal(v, |n, k| self.delta_entry(n, k))
    }

    /// `P`: keeps `f_{n,k}` with `n <= k`.
    pub fn project(&self, v: &FiberColumn) -> FiberColumn {
        self.diagonal(v, |n, k| if n <= k { 1.0 } else { 0.0 })
    }

    fn diagonal(&self, v: &FiberColumn, entry: impl Fn(usize, usize) -> f64) -> FiberColumn {
        let mut out = v.clone();
        for (n, z) in out.coeffs.iter_mut().enumerate() {
            *z *= entry(n, v.fiber);
        }
        out
    }

    /// `q^m (1 - q^2) (1 - q^{2(m+1)})^{-1/2}`.
    fn outer_coefficient(&self, m: usize) -> f64 {
        let q = self.q;
        q.powi(m as i32) * (1.0 - q * q) / (1.0 - q.powi(2 * (m as i32 + 1))).sqrt()
    }
}

fn shift_down(v: &DVector<Complex64>) -> DVector<Complex64> {
    let len = v.len();
    let mut out = DVector::zeros(len);
    for n in 1..len {
        out[n] = v[n - 1];
    }
    out
}

/// `q^{2l}` times column `l` of `xi`: right multiplication by
/// `chi_{q^{2l}}(A) b^2 q^{-2l}`, using `(b*)^2 b^2 = A^2`.
pub fn column_extract(xi: &DerivativeElement, l: usize) -> Result<FiberColumn> {
    let c = xi.coefficients();
    if l >= c.ncols() {
        return Err(Error::ColumnOutOfRange {
            column: l,
            max: c.ncols() - 1,
        });
    }
    let w = xi.constants().weight(l);
    Ok(FiberColumn {
        fiber: l,
        coeffs: c.column(l).map(|z| z * w),
    })
}

fn padded(col: FiberColumn, len: usize) -> FiberColumn {
    let mut coeffs = DVector::zeros(len);
    let m = len.min(col.coeffs.len());
    coeffs.rows_mut(0, m).copy_from(&col.coeffs.rows(0, m));
    FiberColumn {
        fiber: col.fiber,
        coeffs,
    }
}

/// The vertical integral on the window of order `out_order`.
///
/// For a general `xi` the vertical integral keeps feeding mass into later
/// columns and lower rows; everything with index above `out_order` is
/// dropped. Rows are only ever shifted downwards, so the retained entries are
/// exact.
pub fn integral_vertical_on(xi: &DerivativeElement, out_order: usize) -> Result<PodlesElement> {
    let constants = xi.constants().with_order(out_order)?;
    let ops = IntegralOperators::new(&constants);
    let len = out_order + 1;
    let cols = xi.coefficients().ncols();
    let mut lambda = DMatrix::<Complex64>::zeros(len, len);
    let mut u = FiberColumn::zeros(0, len);
    for m in 0..len {
        if m > 0 {
            u = ops.shift_horizontal(&ops.gamma(&u));
        }
        if m < cols {
            let col = padded(column_extract(xi, m)?, len);
            u.coeffs += ops.shift_vertical(&col).coeffs;
        }
        let out = ops.gamma(&u);
        let s = -ops.outer_coefficient(m);
        lambda.column_mut(m).copy_from(&(out.coeffs * Complex64::new(s, 0.0)));
    }
    PodlesElement::from_coefficients(constants, lambda)
}

/// The horizontal integral. It never leaves the window of `xi`.
pub fn integral_horizontal(xi: &DerivativeElement) -> Result<PodlesElement> {
    let constants = *xi.constants();
    let ops = IntegralOperators::new(&constants);
    let len = constants.dim() + 1;
    let cols = xi.coefficients().ncols();
    let mut lambda = DMatrix::<Complex64>::zeros(constants.dim(), constants.dim());
    for l in 1..cols {
        let col = padded(column_extract(xi, l)?, len);
        let mut z = ops.project(&ops.shift_vertical(&col));
        for m in (0..l).rev() {
            let term = ops.shift_horizontal_adjoint(&z);
            debug_assert_eq!(term.fiber, m);
            let s = Complex64::new(ops.outer_coefficient(m), 0.0);
            for n in 0..constants.dim() {
                lambda[(n, m)] += term.coeffs[n] * s;
            }
            z = ops.shift_horizontal_adjoint(&ops.delta(&z));
        }
    }
    PodlesElement::from_coefficients(constants, lambda)
}

/// The vertical integral truncated to the window of `xi`.
pub fn integral_vertical(xi: &DerivativeElement) -> Result<PodlesElement> {
    integral_vertical_on(xi, xi.constants().order())
}

/// Vertical plus horizontal integral, on the window of `xi`.
pub fn integral_total(xi: &DerivativeElement) -> Result<PodlesElement> {
    integral_vertical(xi)?.add(&integral_horizontal(xi)?)
}

/// Extra rows and columns needed before the vertical integral of a window
/// element decays below `1e-8` relative to its size.
pub fn decay_padding(q: f64) -> usize {
    (8.0 * std::f64::consts::LN_10 / -q.ln()).ceil() as usize
}

/// Measured norms of the integrals restricted to columns `>= k`, with the
/// continuity bounds they must respect.
#[derive(Clone, Debug, PartialEq)]
pub struct TailColumnReport {
    pub k: usize,
    pub deriv_norm: f64,
    pub total: f64,
    pub vertical: f64,
    pub horizontal: f64,
    /// `|xi| q^k (k + 2) (1 - q)^{-2}`.
    pub bound_total: f64,
    /// `|xi| q^k (k + 1) (1 - q)^{-2}`.
    pub bound_vertical: f64,
    /// `|xi| q^k (1 - q)^{-2}`.
    pub bound_horizontal: f64,
}

impl TailColumnReport {
    /// True when every measured norm is within its bound, up to `slack`
    /// relative to the bound.
    pub fn passes(&self, slack: f64) -> bool {
        let ok = |v: f64, b: f64| v <= b * (1.0 + slack);
        ok(self.total, self.bound_total)
            && ok(self.vertical, self.bound_vertical)
            && ok(self.horizontal, self.bound_horizontal)
    }
}

fn tail_norm(x: &PodlesElement, k: usize) -> f64 {
    let lam = x.lambda();
    if k >= lam.ncols() {
        return 0.0;
    }
    sigma_max(&lam.columns(k, lam.ncols() - k).into_owned())
}

/// Norms of the integrals of `xi` cut to columns `>= k`.
///
/// The vertical integral is evaluated on a window enlarged by
/// [`decay_padding`], so that its infinite tail is mostly captured; the
/// compression to any window can only decrease a norm, so the check stays
/// sound.
pub fn tail_column_bound(xi: &DerivativeElement, k: usize) -> Result<TailColumnReport> {
    let constants = xi.constants();
    if k > constants.order() {
        return Err(Error::ColumnOutOfRange {
            column: k,
            max: constants.order(),
        });
    }
    let q = constants.q();
    let big = constants.order() + decay_padding(q);
    let vertical = integral_vertical_on(xi, big)?;
    let horizontal = integral_horizontal(xi)?;
    let mut horizontal_big = DMatrix::zeros(big + 1, big + 1);
    horizontal_big
        .view_mut((0, 0), (constants.dim(), constants.dim()))
        .copy_from(horizontal.lambda());
    let horizontal_big = PodlesElement::from_coefficients(*vertical.constants(), horizontal_big)?;
    let total = vertical.add(&horizontal_big)?;
    let dn = deriv_norm(xi);
    let base = dn * q.powi(k as i32) / (1.0 - q).powi(2);
    Ok(TailColumnReport {
        k,
        deriv_norm: dn,
        total: tail_norm(&total, k),
        vertical: tail_norm(&vertical, k),
        horizontal: tail_norm(&horizontal_big, k),
        bound_total: base * (k as f64 + 2.0),
        bound_vertical: base * (k as f64 + 1.0),
        bound_horizontal: base,
    })
}

/// `(1 - q^2)^{1/2} (1 - q)^{-2}`, the operator-norm bound of each integral.
pub fn integral_norm_bound(q: f64) -> f64 {
    (1.0 - q * q).sqrt() / (1.0 - q).powi(2)
}
