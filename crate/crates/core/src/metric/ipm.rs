//! Log-det barrier method for a linear objective over a spectral-norm ball.
//!
//! Solves
//!
//! ```text
//! maximize  a . y   subject to   sigma_max(M(y)) <= r,   M(y) = sum_i y_i T_i
//! ```
//!
//! with sparse complex `T_i`, using the barrier `-log det(r^2 I - M M*)`. The
//! constraint is the block inequality `[[rI, M], [M*, rI]] >= 0`, whose
//! barrier parameter is the block size.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Nonzero entries `(row, col, value)` of one constraint matrix.
pub(crate) type Sparse = Vec<(usize, usize, Complex64)>;

pub(crate) struct BallProblem {
    pub rows: usize,
    pub cols: usize,
    pub basis: Vec<Sparse>,
    pub objective: Vec<f64>,
    pub radius: f64,
}

pub(crate) struct BarrierOptions {
    /// Stop once the barrier gap bound falls below `gap_rel * max(1, |value|)`.
    pub gap_rel: f64,
    /// Budget of Newton steps over all centering rounds.
    pub max_newton: usize,
    pub start: Vec<f64>,
}

pub(crate) struct BarrierOutcome {
    /// The best feasible point seen, scaled to the boundary of the ball.
    pub y: Vec<f64>,
    pub value: f64,
    /// Upper bound on the optimum from the last completed centering.
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Slack {
    q: DMatrix<Complex64>,
    log_det: f64,
}

impl BallProblem {
    fn assemble(&self, y: &[f64]) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (yi, t) in y.iter().zip(&self.basis) {
            if *yi == 0.0 {
                continue;
            }
            for &(r, c, v) in t {
                m[(r, c)] += v * *yi;
            }
        }
        m
    }

    fn value(&self, y: &[f64]) -> f64 {
        y.iter().zip(&self.objective).map(|(a, b)| a * b).sum()
    }

    /// `(r^2 I - M M*)^{-1}` and its log-determinant, or `None` outside the
    /// open ball.
    fn slack(&self, m: &DMatrix<Complex64>) -> Option<Slack> {
        let r2 = self.radius * self.radius;
        let mut s = -(m * m.adjoint());
        for i in 0..self.rows {
            s[(i, i)] += r2;
        }
        let chol = nalgebra::Cholesky::new(s)?;
        // Complex Cholesky takes complex square roots of the pivots, so an
        // indefinite matrix shows up as a pivot off the positive real axis.
        let diag = chol.l_dirty().diagonal();
        if diag.iter().any(|z| z.re.is_nan() || z.re <= 0.0 || z.im.abs() > 1e-12 * z.re) {
            return None;
        }
        let log_det = 2.0 * diag.iter().map(|z| z.re.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return None;
        }
        Some(Slack {
            q: chol.inverse(),
            log_det,
        })
    }

    fn nu(&self) -> f64 {
        (self.rows + self.cols) as f64
    }

    pub(crate) fn spectral_norm(&self, y: &[f64]) -> f64 {
        crate::model::sigma_max(&self.assemble(y))
    }

    /// Gradient and Hessian of `-t a.y - log det(r^2 I - M M*)`.
    fn derivatives(&self, t: f64, m: &DMatrix<Complex64>, sl: &Slack) -> (DVector<f64>, DMatrix<f64>) {
        let q = &sl.q;
        let p = m.adjoint() * q;
        let z = &p * m;
        let n = self.basis.len();
        let mut g = DVector::zeros(n);
        for (i, ti) in self.basis.iter().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for &(r, c, v) in ti {
                s += v * p[(c, r)];
            }
            g[i] = 2.0 * s.re - t * self.objective[i];
        }
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            let ti = &self.basis[i];
            for j in i..n {
                let tj = &self.basis[j];
                let mut s = 0.0;
                for &(r1, c1, v1) in ti {
                    for &(r2, c2, v2) in tj {
                        let w = v1 * v2.conj();
                        let mut acc = z[(c1, c2)] * q[(r2, r1)];
                        if c1 == c2 {
                            acc += q[(r2, r1)];
                        }
                        s += (w * acc).re + (v1 * v2 * p[(c1, r2)] * p[(c2, r1)]).re;
                    }
                }
                h[(i, j)] = 2.0 * s;
                h[(j, i)] = 2.0 * s;
            }
        }
        (g, h)
    }

    /// Solves `H d = -g`, regularizing when rounding has cost positive
    /// definiteness.
    fn newton_direction(h: DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
        let scale = h.diagonal().iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut shift = 0.0;
        for _ in 0..8 {
            let mut hh = h.clone();
            for i in 0..hh.nrows() {
                hh[(i, i)] += shift;
            }
            if let Some(ch) = nalgebra::Cholesky::new(hh) {
                let d = ch.solve(&(-g));
                if d.iter().all(|v| v.is_finite()) {
                    return Some(d);
                }
            }
            shift = if shift == 0.0 { scale * 1e-14 } else { shift * 100.0 };
        }
        None
    }

    pub(crate) fn solve(&self, opts: &BarrierOptions) -> BarrierOutcome {
        let n = self.basis.len();
        let mut y = DVector::from_vec(opts.start.clone());
        let mut best_y = vec![0.0; n];
        let mut best = 0.0_f64;
        let mut iterations = 0;

        let Some(mut sl) = self.slack(&self.assemble(y.as_slice())) else {
            return BarrierOutcome {
                y: best_y,
                value: 0.0,
                upper: f64::INFINITY,
                iterations,
                converged: false,
            };
        };

        // Initial weight: the value of the objective direction scaled to the
        // boundary sets the scale of the problem.
        let nu = self.nu();
        let dir_norm = self.spectral_norm(&self.objective);
        let scale0 = if dir_norm > 0.0 {
            self.value(&self.objective) * self.radius / dir_norm
        } else {
            1.0
        };
        let mut t = nu / scale0.max(f64::MIN_POSITIVE);
        let mut upper = f64::INFINITY;
        let mut converged = false;

        let record = |y: &[f64], best: &mut f64, best_y: &mut Vec<f64>| {
            let v = self.value(y);
            if v <= 0.0 {
                return;
            }
            let norm = self.spectral_norm(y);
            if norm <= 0.0 {
                return;
            }
            let s = self.radius / norm;
            let scaled = v * s;
            if scaled > *best {
                *best = scaled;
                *best_y = y.iter().map(|v| v * s).collect();
            }
        };

        'outer: loop {
            let mut centered = false;
            loop {
                if iterations >= opts.max_newton {
                    break 'outer;
                }
                let m = self.assemble(y.as_slice());
                let (g, h) = self.derivatives(t, &m, &sl);
                let Some(d) = Self::newton_direction(h, &g) else {
                    break;
                };
                iterations += 1;
                let decrement = -g.dot(&d);
                if !decrement.is_finite() || decrement <= 0.0 {
                    break;
                }
                let f0 = -t * self.value(y.as_slice()) - sl.log_det;
                let mut alpha = 1.0;
                let mut accepted = None;
                while alpha > 1e-14 {
                    let trial = &y + &d * alpha;
                    if let Some(s_new) = self.slack(&self.assemble(trial.as_slice())) {
                        let f1 = -t * self.value(trial.as_slice()) - s_new.log_det;
                        if f1 <= f0 - 0.25 * alpha * decrement {
                            accepted = Some((trial, s_new));
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                let Some((trial, s_new)) = accepted else {
                    break;
                };
                let f1 = -t * self.value(trial.as_slice()) - s_new.log_det;
                y = trial;
                sl = s_new;
                let stalled = f0 - f1 <= 64.0 * f64::EPSILON * f0.abs().max(1.0);
                if decrement * 0.5 <= 1e-10 || stalled {
                    centered = true;
                    break;
                }
            }
            record(y.as_slice(), &mut best, &mut best_y);
            if !centered {
                break;
            }
            upper = self.value(y.as_slice()) + nu / t;
            if nu / t <= opts.gap_rel * best.abs().max(1.0) {
                converged = true;
                break;
            }
            t *= 8.0;
        }

        BarrierOutcome {
            y: best_y,
            value: best,
            upper,
            iterations,
            converged,
        }
    }
}
