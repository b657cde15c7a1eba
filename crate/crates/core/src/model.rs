//! The truncated matrix-unit model of the standard Podleś sphere.
//!
//! The sphere is the unitalization of the compact operators, with matrix units
//! `f_{n,k}` acting as `e_k -> e_n` in the representation `pi_0`. An element is
//! `mu * 1 + sum lambda_{n,k} f_{n,k}` with `n, k <= N`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsymb::{eval_pi_theta, QPolynomial};

/// Default range of `q` accepted without an explicit override.
pub const Q_GUARD: (f64, f64) = (0.05, 0.95);

/// The deformation parameter and the truncation order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConstants {
    q: f64,
    order: usize,
}

impl ModelConstants {
    /// Accepts `q` in [`Q_GUARD`] and `order >= 1`.
    pub fn new(q: f64, order: usize) -> Result<Self> {
        Self::with_guard(q, order, false)
    }

    /// As [`ModelConstants::new`], but any `q` in `(0, 1)` is accepted when
    /// `allow_extreme` is set.
    pub fn with_guard(q: f64, order: usize, allow_extreme: bool) -> Result<Self> {
        crate::qsymb::repr::check_q(q)?;
        if !allow_extreme && !(Q_GUARD.0..=Q_GUARD.1).contains(&q) {
            return Err(Error::InvalidQ(q));
        }
        if order == 0 {
            return Err(Error::InvalidOrder(order));
        }
        Ok(Self { q, order })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// The truncation order `N`; indices run over `0..=N`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.order + 1
    }

    /// The same `q` with another truncation order.
    pub fn with_order(&self, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder(order));
        }
        Ok(Self { q: self.q, order })
    }

    /// `q^{2j} (1 - q^{2(j+1)})`, one factor of the normalizing constants.
    fn step(&self, j: usize) -> f64 {
        self.q.powi(2 * j as i32) * (1.0 - self.q.powi(2 * (j as i32 + 1)))
    }

    /// `C_{n,k} = prod_{j=min..max-1} q^{2j} (1 - q^{2(j+1)})`; `C_{n,n} = 1`.
    ///
    /// Underflows to 0 for large index gaps; use [`ModelConstants::c_inv_sqrt`]
    /// when normalizing.
    pub fn c(&self, n: usize, k: usize) -> f64 {
        let (lo, hi) = (n.min(k), n.max(k));
        (lo..hi).map(|j| self.step(j)).product()
    }

    /// `C_{n,k}^{-1/2}`, accumulated factor by factor.
    pub fn c_inv_sqrt(&self, n: usize, k: usize) -> f64 {
        let (lo, hi) = (n.min(k), n.max(k));
        (lo..hi).map(|j| 1.0 / self.step(j).sqrt()).product()
    }

    /// Column weight `q^{2k}`: the value of `A` on the fiber over `q^{2k}`.
    pub fn weight(&self, k: usize) -> f64 {
        self.q.powi(2 * k as i32)
    }

    /// Operator norm of the part of `A` outside the window.
    pub fn tail_a(&self) -> f64 {
        self.q.powi(2 * (self.order as i32 + 1))
    }

    /// Operator norm of the part of `B` outside the window:
    /// `sup_{k >= N} q^k sqrt(1 - q^{2(k+1)})`.
    pub fn tail_b(&self) -> f64 {
        let q = self.q;
        let mut best = 0.0_f64;
        let mut k = self.order as i32;
        loop {
            let qk = q.powi(k);
            if qk <= best || qk == 0.0 {
                return best;
            }
            best = best.max(qk * (1.0 - q.powi(2 * (k + 1))).sqrt());
            k += 1;
        }
    }

    fn check_index(&self, n: usize, k: usize) -> Result<()> {
        if n > self.order || k > self.order {
            Err(Error::IndexOutOfWindow {
                n,
                k,
                order: self.order,
            })
        } else {
            Ok(())
        }
    }
}

/// A truncated element `mu * 1 + sum lambda_{n,k} f_{n,k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PodlesElement {
    constants: ModelConstants,
    mu: Complex64,
    lambda: DMatrix<Complex64>,
}

/// Named elements available through [`generator`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    A,
    B,
    BStar,
    One,
    /// The spectral projection of `A` at `q^{2k}`.
    Chi(usize),
}

impl PodlesElement {
    pub fn new(constants: ModelConstants, mu: Complex64, lambda: DMatrix<Complex64>) -> Result<Self> {
        let d = constants.dim();
        if lambda.nrows() != d || lambda.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "coefficient matrix is {}x{}, expected {d}x{d}",
                lambda.nrows(),
                lambda.ncols()
            )));
        }
        Ok(Self {
            constants,
            mu,
            lambda,
        })
    }

    pub fn zero(constants: ModelConstants) -> Self {
        let d = constants.dim();
        Self {
            constants,
            mu: Complex64::new(0.0, 0.0),
            lambda: DMatrix::zeros(d, d),
        }
    }

    pub fn scalar(constants: ModelConstants, mu: Complex64) -> Self {
        Self {
            mu,
            ..Self::zero(constants)
        }
    }

    /// An element with `mu = 0` and the given coefficients.
    pub fn from_coefficients(constants: ModelConstants, lambda: DMatrix<Complex64>) -> Result<Self> {
        Self::new(constants, Complex64::new(0.0, 0.0), lambda)
    }

    pub fn constants(&self) -> &ModelConstants {
        &self.constants
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    pub fn lambda(&self) -> &DMatrix<Complex64> {
        &self.lambda
    }

    pub fn coefficient(&self, n: usize, k: usize) -> Complex64 {
        self.lambda[(n, k)]
    }

    fn same(&self, other: &Self) -> Result<()> {
        if self.constants == other.constants {
            Ok(())
        } else {
            Err(Error::MismatchedConstants)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same(other)?;
        Ok(Self {
            constants: self.constants,
            mu: self.mu + other.mu,
            lambda: &self.lambda + &other.lambda,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same(other)?;
        Ok(Self {
            constants: self.constants,
            mu: self.mu - other.mu,
            lambda: &self.lambda - &other.lambda,
        })
    }

    /// `(mu_x mu_y, mu_x L_y + mu_y L_x + L_x L_y)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same(other)?;
        let lambda = &self.lambda * &other.lambda
            + &other.lambda * self.mu
            + &self.lambda * other.mu;
        Ok(Self {
            constants: self.constants,
            mu: self.mu * other.mu,
            lambda,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            constants: self.constants,
            mu: self.mu * c,
            lambda: &self.lambda * c,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            constants: self.constants,
            mu: self.mu.conj(),
            lambda: self.lambda.adjoint(),
        }
    }

    /// Self-adjointness up to `tol` in every coefficient.
    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        (self.mu.im).abs() <= tol
            && self
                .lambda
                .iter()
                .zip(self.lambda.adjoint().iter())
                .all(|(x, y)| (x - y).norm() <= tol)
    }

    /// `mu * I + Lambda`, the compression of `pi_0(x)` to the window.
    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let mut m = self.lambda.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += self.mu;
        }
        m
    }

    /// `pi_theta(x)`: conjugation of `pi_0(x)` by `diag(e^{-i theta n})`.
    pub fn to_matrix_theta(&self, theta: f64) -> DMatrix<Complex64> {
        let mut m = self.to_matrix();
        let d = self.constants.dim();
        for k in 0..d {
            for n in 0..d {
                m[(n, k)] *= Complex64::from_polar(1.0, -theta * (n as f64 - k as f64));
            }
        }
        m
    }

    /// The C*-norm: the larger of the character value and the norm in the
    /// faithful representation.
    pub fn cstar_norm(&self) -> f64 {
        self.mu.norm().max(sigma_max(&self.to_matrix()))
    }

    /// The value of the character `psi_infinity`.
    pub fn psi_infty(&self) -> Complex64 {
        self.mu
    }

    /// Largest entrywise difference, including the scalar part.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let lam = self
            .lambda
            .iter()
            .zip(other.lambda.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        lam.max((self.mu - other.mu).norm())
    }

    pub fn to_json(&self) -> String {
        let doc = ElementDoc {
            q: self.constants.q,
            order: self.constants.order,
            mu: [self.mu.re, self.mu.im],
            lambda: row_major(&self.lambda),
        };
        serde_json::to_string(&doc).expect("plain numeric document")
    }

    /// Parses an element document. `q` outside the default guard is accepted
    /// as long as it lies in `(0, 1)`.
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ElementDoc = serde_json::from_str(s)?;
        let constants = ModelConstants::with_guard(doc.q, doc.order, true)?;
        let lambda = from_row_major(&doc.lambda, constants.dim(), constants.dim())?;
        Self::new(constants, Complex64::new(doc.mu[0], doc.mu[1]), lambda)
    }
}

#[derive(Serialize, Deserialize)]
struct ElementDoc {
    q: f64,
    #[serde(rename = "N")]
    order: usize,
    mu: [f64; 2],
    lambda: Vec<[f64; 2]>,
}

pub(crate) fn row_major(m: &DMatrix<Complex64>) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            out.push([z.re, z.im]);
        }
    }
    out
}

pub(crate) fn from_row_major(v: &[[f64; 2]], rows: usize, cols: usize) -> Result<DMatrix<Complex64>> {
    if v.len() != rows * cols {
        return Err(Error::Format(format!(
            "expected {} entries, found {}",
            rows * cols,
            v.len()
        )));
    }
    Ok(DMatrix::from_row_iterator(
        rows,
        cols,
        v.iter().map(|[re, im]| Complex64::new(*re, *im)),
    ))
}

/// Largest singular value.
pub fn sigma_max(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// The matrix unit `f_{n,k}`.
pub fn matrix_unit(n: usize, k: usize, constants: &ModelConstants) -> Result<PodlesElement> {
    constants.check_index(n, k)?;
    let mut x = PodlesElement::zero(*constants);
    x.lambda[(n, k)] = Complex64::new(1.0, 0.0);
    Ok(x)
}

/// A named element truncated to the window.
pub fn generator(which: Generator, constants: &ModelConstants) -> Result<PodlesElement> {
    generator_with_tail(which, constants).map(|(x, _)| x)
}

/// A named element together with the operator norm of its part outside the
/// window.
pub fn generator_with_tail(
    which: Generator,
    constants: &ModelConstants,
) -> Result<(PodlesElement, f64)> {
    let one = Complex64::new(1.0, 0.0);
    let q = constants.q;
    let n = constants.order;
    let mut x = PodlesElement::zero(*constants);
    let tail = match which {
        Generator::One => {
            x.mu = one;
            0.0
        }
        Generator::A => {
            for k in 0..=n {
                x.lambda[(k, k)] = Complex64::new(constants.weight(k), 0.0);
            }
            constants.tail_a()
        }
        Generator::B | Generator::BStar => {
            for k in 0..n {
                let v = q.powi(k as i32) * (1.0 - q.powi(2 * (k as i32 + 1))).sqrt();
                x.lambda[(k + 1, k)] = Complex64::new(v, 0.0);
            }
            if which == Generator::BStar {
                x = x.adjoint();
            }
            constants.tail_b()
        }
        Generator::Chi(k) => {
            constants.check_index(k, k)?;
            x.lambda[(k, k)] = one;
            0.0
        }
    };
    Ok((x, tail))
}

/// `f_{n,k}` assembled from the generators: the spectral projection of `A`
/// at `q^{2k}`, followed by `n - k` normalized factors of `B` (or `k - n` of
/// `B*`).
///
/// The projection comes from an eigendecomposition of `A` and each factor is
/// divided by its own contribution to `C_{n,k}^{1/2}`, so nothing underflows.
pub fn matrix_unit_from_generators(
    n: usize,
    k: usize,
    constants: &ModelConstants,
) -> Result<PodlesElement> {
    constants.check_index(n, k)?;
    let a = generator(Generator::A, constants)?;
    let eig = nalgebra::SymmetricEigen::new(a.lambda.map(|z| z.re));
    let target = constants.weight(k);
    let mut proj = DMatrix::<f64>::zeros(constants.dim(), constants.dim());
    for (i, ev) in eig.eigenvalues.iter().enumerate() {
        if (ev - target).abs() <= 0.5 * target * (1.0 - constants.q * constants.q) {
            let v = eig.eigenvectors.column(i);
            proj += v * v.transpose();
        }
    }
    let mut x = PodlesElement::from_coefficients(*constants, proj.map(|r| Complex64::new(r, 0.0)))?;
    let b = generator(Generator::B, constants)?;
    let bs = generator(Generator::BStar, constants)?;
    let (lo, hi) = (n.min(k), n.max(k));
    // Applying B (or B*) to the fiber at index j scales by q^j sqrt(1 - q^{2(j+1)}).
    let steps: Box<dyn Iterator<Item = usize>> = if n >= k {
        Box::new(lo..hi)
    } else {
        Box::new((lo..hi).rev())
    };
    for j in steps {
        let s = 1.0 / constants.step(j).sqrt();
        let factor = if n >= k { &b } else { &bs };
        x = factor.scale(Complex64::new(s, 0.0)).mul(&x)?;
    }
    Ok(x)
}

/// The truncated element represented by a sphere polynomial.
///
/// The scalar part is the character value (`A, B -> 0`), and the
/// coefficients come from the compression of `pi_0(p)`.
pub fn from_qpoly(p: &QPolynomial, constants: &ModelConstants) -> Result<PodlesElement> {
    if !p.is_sphere_element() {
        return Err(Error::NotSphereElement(p.to_string()));
    }
    let q = constants.q;
    let c = p.constant_term();
    let mu = Complex64::new(c.eval(q), 0.0);
    let rest = p - &QPolynomial::one().scale(&c);
    let lambda = eval_pi_theta(&rest, q, 0.0, constants.order)?.matrix;
    PodlesElement::new(*constants, mu, lambda)
}

/// A state: weight `t` at `psi_infinity` plus `(1 - t)` times a density
/// matrix in the representation `pi_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct QState {
    t: f64,
    rho: DMatrix<Complex64>,
}

const STATE_TOL: f64 = 1e-12;

impl QState {
    pub fn new(t: f64, rho: DMatrix<Complex64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidState(format!("weight {t} outside [0, 1]")));
        }
        if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let tr = rho.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let herm_err = (&rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > STATE_TOL {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let h = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eig = h.symmetric_eigenvalues().min();
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix has eigenvalue {min_eig}"
            )));
        }
        Ok(Self { t, rho })
    }

    /// `psi_infinity` on a window of order `order`.
    pub fn psi_infty(order: usize) -> Self {
        let mut rho = DMatrix::zeros(order + 1, order + 1);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        Self { t: 1.0, rho }
    }

    /// The vector state `omega_k`.
    pub fn vector(k: usize, order: usize) -> Result<Self> {
        if k > order {
            return Err(Error::IndexOutOfWindow { n: k, k, order });
        }
        let mut rho = DMatrix::zeros(order + 1, order + 1);
        rho[(k, k)] = Complex64::new(1.0, 0.0);
        Ok(Self { t: 0.0, rho })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn rho(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    /// The window order the density matrix lives on.
    pub fn order(&self) -> usize {
        self.rho.nrows() - 1
    }

    /// True when the density matrix is diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.rho
            .iter()
            .enumerate()
            .all(|(i, z)| i % self.rho.nrows() == i / self.rho.nrows() || *z == Complex64::new(0.0, 0.0))
    }

    /// The same state on a window of another order. Fails when the density
    /// matrix has support beyond the new window.
    pub fn resize(&self, order: usize) -> Result<Self> {
        let d = order + 1;
        let old = self.rho.nrows();
        for r in 0..old {
            for c in 0..old {
                if (r >= d || c >= d) && self.rho[(r, c)] != Complex64::new(0.0, 0.0) {
                    return Err(Error::InvalidState(format!(
                        "support reaches index {} beyond order {order}",
                        r.max(c)
                    )));
                }
            }
        }
        let mut rho = DMatrix::zeros(d, d);
        let m = d.min(old);
        rho.view_mut((0, 0), (m, m)).copy_from(&self.rho.view((0, 0), (m, m)));
        Ok(Self { t: self.t, rho })
    }

    pub fn to_json(&self) -> String {
        let doc = StateDoc {
            t: self.t,
            rho: row_major(&self.rho),
        };
        serde_json::to_string(&doc).expect("plain numeric document")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: StateDoc = serde_json::from_str(s)?;
        let d = (doc.rho.len() as f64).sqrt().round() as usize;
        let rho = from_row_major(&doc.rho, d, d)?;
        Self::new(doc.t, rho)
    }
}

#[derive(Serialize, Deserialize)]
struct StateDoc {
    t: f64,
    rho: Vec<[f64; 2]>,
}

/// `t mu + (1 - t) tr(rho (mu I + Lambda))`.
pub fn state_eval(s: &QState, x: &PodlesElement) -> Result<Complex64> {
    if s.rho.nrows() != x.constants.dim() {
        return Err(Error::InvalidState(format!(
            "state has order {}, element has order {}",
            s.order(),
            x.constants.order
        )));
    }
    let tr: Complex64 = (0..s.rho.nrows())
        .flat_map(|r| (0..s.rho.ncols()).map(move |c| (r, c)))
        .map(|(r, c)| s.rho[(r, c)] * x.lambda[(c, r)])
        .sum();
    Ok(x.mu + tr * (1.0 - s.t))
}
