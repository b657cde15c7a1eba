//! Monge-Kantorovich distances for the seminorm `L` and Lipschitz-ball
//! diagnostics.
//!
//! A distance is the supremum of `s1(x) - s2(x)` over self-adjoint `x` with
//! `mu = 0` and `L(x) <= 1`. For self-adjoint `x` the constraint is the single
//! spectral-norm bound `|d_1(x)| <= 1`, a convex ball pulled back through a
//! linear map, so the supremum is computed by a barrier method over a real
//! basis of the admissible coefficients.
//!
//! When both states have diagonal density matrices the search is restricted
//! to diagonal `x`: conjugating by `diag(e^{i n phi})` leaves states, `L` and
//! the objective unchanged, and averaging over `phi` projects any feasible `x`
//! onto its diagonal.

mod ipm;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dirac::{d1, deriv_norm, seminorm_l};
use crate::error::{Error, Result};
use crate::model::{state_eval, ModelConstants, PodlesElement, QState};

use ipm::{BallProblem, BarrierOptions, Sparse};

/// Which coefficients the distance solver optimizes over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Reduction {
    /// Diagonal coefficients when both states are diagonal, otherwise all.
    Auto,
    /// All Hermitian coefficient matrices.
    Full,
    /// Diagonal coefficient matrices only.
    Diagonal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Relative accuracy target for distances.
    pub tolerance: f64,
    /// Newton-step budget per distance.
    pub max_iterations: usize,
    /// Seed for the starting point.
    pub seed: u64,
    /// Radius of the Lipschitz ball.
    pub radius: f64,
    pub reduction: Reduction,
    /// Rerun on the window of half the order to estimate truncation effects.
    pub estimate_gap: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 100_000,
            seed: 0,
            radius: 1.0,
            reduction: Reduction::Auto,
            estimate_gap: true,
        }
    }
}

/// A certified lower bound for a distance on the truncated model.
#[derive(Clone, Debug, PartialEq)]
pub struct MKResult {
    pub value: f64,
    /// Self-adjoint, `mu = 0`, `L <= radius`, attaining `value`.
    pub witness: PodlesElement,
    /// Upper bound for the optimum of the truncated problem.
    pub truncated_upper: f64,
    /// `|value(N) - value(N/2)|`, when both states fit the smaller window.
    pub gap_estimate: Option<f64>,
    pub iterations: usize,
    pub tolerance: f64,
    pub converged: bool,
}

#[derive(Serialize)]
struct MKDoc {
    value: f64,
    truncated_upper: f64,
    gap_estimate: Option<f64>,
    iterations: usize,
    tolerance: f64,
    converged: bool,
    witness: serde_json::Value,
}

impl MKResult {
    pub fn to_json(&self) -> String {
        let doc = MKDoc {
            value: self.value,
            truncated_upper: self.truncated_upper,
            gap_estimate: self.gap_estimate,
            iterations: self.iterations,
            tolerance: self.tolerance,
            converged: self.converged,
            witness: serde_json::from_str(&self.witness.to_json()).expect("valid element document"),
        };
        serde_json::to_string(&doc).expect("plain numeric document")
    }
}

/// One coefficient direction: `(n, k, value)` entries of a coefficient matrix.
type Direction = Vec<(usize, usize, Complex64)>;

fn hermitian_basis(dim: usize) -> Vec<Direction> {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(dim * dim);
    for n in 0..dim {
        out.push(vec![(n, n, one)]);
    }
    for n in 0..dim {
        for k in n + 1..dim {
            out.push(vec![(n, k, one), (k, n, one)]);
            out.push(vec![(n, k, i), (k, n, -i)]);
        }
    }
    out
}

fn diagonal_basis(dim: usize) -> Vec<Direction> {
    (0..dim).map(|n| vec![(n, n, Complex64::new(1.0, 0.0))]).collect()
}

fn column_basis(dim: usize, k: usize) -> Vec<Direction> {
    let mut out = Vec::with_capacity(2 * dim);
    for n in 0..dim {
        out.push(vec![(n, k, Complex64::new(1.0, 0.0))]);
        out.push(vec![(n, k, Complex64::new(0.0, 1.0))]);
    }
    out
}

fn element_of(constants: &ModelConstants, dirs: &[Direction], y: &[f64]) -> PodlesElement {
    let d = constants.dim();
    let mut lam = DMatrix::zeros(d, d);
    for (dir, yi) in dirs.iter().zip(y) {
        for &(n, k, v) in dir {
            lam[(n, k)] += v * *yi;
        }
    }
    PodlesElement::from_coefficients(*constants, lam).expect("window-sized coefficients")
}

/// The weighted derivative of each direction, as sparse constraint matrices.
fn derivative_images(constants: &ModelConstants, dirs: &[Direction]) -> Vec<Sparse> {
    dirs.iter()
        .map(|dir| {
            let x = element_of(constants, std::slice::from_ref(dir), &[1.0]);
            let w = d1(&x).weighted();
            let mut out = Vec::new();
            for c in 0..w.ncols() {
                for r in 0..w.nrows() {
                    if w[(r, c)] != Complex64::new(0.0, 0.0) {
                        out.push((r, c, w[(r, c)]));
                    }
                }
            }
            out
        })
        .collect()
}

fn start_point(problem: &BallProblem, seed: u64) -> Vec<f64> {
    let n = problem.basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = problem.spectral_norm(&y);
    if norm == 0.0 {
        return vec![0.0; n];
    }
    let s = 0.25 * problem.radius / norm;
    y.into_iter().map(|v| v * s).collect()
}

struct Maximized {
    element: PodlesElement,
    value: f64,
    upper: f64,
    iterations: usize,
    converged: bool,
}

/// Maximizes `sum_i objective_i y_i` over `|d_1(sum y_i dir_i)| <= radius`.
fn maximize(
    constants: &ModelConstants,
    dirs: &[Direction],
    objective: Vec<f64>,
    config: &SolverConfig,
) -> Maximized {
    let problem = BallProblem {
        rows: constants.dim(),
        cols: constants.dim() + 1,
        basis: derivative_images(constants, dirs),
        objective,
        radius: config.radius,
    };
    if problem.objective.iter().all(|a| *a == 0.0) {
        return Maximized {
            element: PodlesElement::zero(*constants),
            value: 0.0,
            upper: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let out = problem.solve(&BarrierOptions {
        gap_rel: 1e-2 * config.tolerance,
        max_newton: config.max_iterations,
        start: start_point(&problem, config.seed),
    });
    Maximized {
        element: element_of(constants, dirs, &out.y),
        value: out.value,
        upper: out.upper,
        iterations: out.iterations,
        converged: out.converged,
    }
}

/// Pairing of a coefficient direction with `s1 - s2` on elements with `mu = 0`.
fn pairing(s1: &QState, s2: &QState, dir: &Direction) -> f64 {
    let mut v = 0.0;
    for &(n, k, z) in dir {
        // tr(rho E_{n,k}) = rho_{k,n}
        v += ((1.0 - s1.t()) * (s1.rho()[(k, n)] * z)).re;
        v -= ((1.0 - s2.t()) * (s2.rho()[(k, n)] * z)).re;
    }
    v
}

fn check_states(s1: &QState, s2: &QState, constants: &ModelConstants) -> Result<()> {
    for s in [s1, s2] {
        if s.order() != constants.order() {
            return Err(Error::InvalidState(format!(
                "state has order {}, model has order {}",
                s.order(),
                constants.order()
            )));
        }
    }
    Ok(())
}

fn solve_distance(
    s1: &QState,
    s2: &QState,
    constants: &ModelConstants,
    config: &SolverConfig,
) -> Maximized {
    let diagonal = match config.reduction {
        Reduction::Auto => s1.is_diagonal() && s2.is_diagonal(),
        Reduction::Full => false,
        Reduction::Diagonal => true,
    };
    let dirs = if diagonal {
        diagonal_basis(constants.dim())
    } else {
        hermitian_basis(constants.dim())
    };
    let objective = dirs.iter().map(|d| pairing(s1, s2, d)).collect();
    maximize(constants, &dirs, objective, config)
}

/// The Monge-Kantorovich distance between two states, as a certified lower
/// bound on the truncated model.
pub fn mk_distance(
    s1: &QState,
    s2: &QState,
    constants: &ModelConstants,
    config: &SolverConfig,
) -> Result<MKResult> {
    if [config.tolerance, config.radius].iter().any(|v| v.is_nan() || *v <= 0.0) {
        return Err(Error::InvalidArgument(
            "tolerance and radius must be positive".into(),
        ));
    }
    check_states(s1, s2, constants)?;
    let main = solve_distance(s1, s2, constants, config);
    let gap_estimate = if config.estimate_gap && constants.order() >= 2 {
        let half = constants.with_order(constants.order() / 2)?;
        match (s1.resize(half.order()), s2.resize(half.order())) {
            (Ok(h1), Ok(h2)) => {
                let small = solve_distance(&h1, &h2, &half, config);
                Some((main.value - small.value).abs())
            }
            _ => None,
        }
    } else {
        None
    };
    Ok(MKResult {
        value: main.value,
        witness: main.element,
        truncated_upper: main.upper,
        gap_estimate,
        iterations: main.iterations,
        tolerance: config.tolerance,
        converged: main.converged,
    })
}

/// Checks a distance result against its own contract: the witness attains
/// the value, is admissible, and the value is nonnegative.
pub fn check_witness(result: &MKResult, s1: &QState, s2: &QState, radius: f64) -> Result<bool> {
    let w = &result.witness;
    let attained = (state_eval(s1, w)? - state_eval(s2, w)?).re;
    let tol = result.tolerance;
    Ok(result.value >= 0.0
        && (attained - result.value).abs() <= tol * result.value.max(1.0)
        && seminorm_l(w) <= radius * (1.0 + tol)
        && w.mu() == Complex64::new(0.0, 0.0)
        && w.is_self_adjoint(0.0))
}

/// One row of the quantized-interval table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalRow {
    pub q: f64,
    #[serde(rename = "N")]
    pub order: usize,
    pub k: usize,
    /// `d(omega_k, omega_{k+1})`.
    pub d_consecutive: f64,
    /// `d(omega_0, omega_k)`.
    pub d_from_zero: f64,
    /// `d(psi_infinity, omega_k)`.
    pub d_from_psi_infty: f64,
    /// Largest of the three stabilization diagnostics.
    pub gap_estimate: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Distances along the spectrum of `A` for `k = 0..=kmax`.
pub fn interval_metric_table(
    constants: &ModelConstants,
    kmax: usize,
    config: &SolverConfig,
) -> Result<Vec<IntervalRow>> {
    let order = constants.order();
    if kmax > order / 2 {
        return Err(Error::InvalidArgument(format!(
            "kmax {kmax} exceeds half the order {order}"
        )));
    }
    let psi = QState::psi_infty(order);
    let omega0 = QState::vector(0, order)?;
    let mut rows = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let wk = QState::vector(k, order)?;
        let wk1 = QState::vector(k + 1, order)?;
        let consecutive = mk_distance(&wk, &wk1, constants, config)?;
        let from_zero = mk_distance(&omega0, &wk, constants, config)?;
        let from_psi = mk_distance(&psi, &wk, constants, config)?;
        let parts = [&consecutive, &from_zero, &from_psi];
        let gap_estimate = parts
            .iter()
            .map(|r| r.gap_estimate)
            .try_fold(0.0_f64, |acc, g| g.map(|g| acc.max(g)));
        rows.push(IntervalRow {
            q: constants.q(),
            order,
            k,
            d_consecutive: consecutive.value,
            d_from_zero: from_zero.value,
            d_from_psi_infty: from_psi.value,
            gap_estimate,
            iterations: parts.iter().map(|r| r.iterations).sum(),
            converged: parts.iter().all(|r| r.converged),
        });
    }
    Ok(rows)
}

/// The largest C*-norm in the fiber over `q^{2k}` under `|d_1(x)| <= 1`,
/// with a maximizer.
pub fn fiber_ball_extremal(
    k: usize,
    constants: &ModelConstants,
    config: &SolverConfig,
) -> Result<(f64, PodlesElement)> {
    if k + 1 > constants.order() {
        return Err(Error::InvalidArgument(format!(
            "fiber {k} needs order at least {}",
            k + 1
        )));
    }
    let dim = constants.dim();
    let dirs = column_basis(dim, k);
    // The norm is the Euclidean norm of the column, a convex function, so its
    // maximum over the ball sits at an extreme point. Repeatedly maximizing
    // its linearization climbs to a local maximum; every coordinate direction
    // and a few random ones serve as starting directions.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut starts: Vec<Vec<f64>> = (0..dim)
        .map(|n| {
            let mut u = vec![0.0; 2 * dim];
            u[2 * n] = 1.0;
            u
        })
        .collect();
    for _ in 0..4 {
        starts.push((0..2 * dim).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    let mut best = (0.0_f64, PodlesElement::zero(*constants));
    for mut u in starts {
        let mut last = 0.0;
        for _ in 0..50 {
            let m = maximize(constants, &dirs, u.clone(), config);
            let x = m.element;
            let col: Vec<f64> = (0..dim)
                .flat_map(|n| {
                    let z = x.coefficient(n, k);
                    [z.re, z.im]
                })
                .collect();
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            // Several fiber elements attain the optimum; ties keep the earliest
            // start, whose first direction leads to the multiple of `f_{0,k}`.
            if norm > best.0 * (1.0 + config.tolerance) {
                best = (norm, x.clone());
            }
            if norm == 0.0 || (norm - last).abs() <= config.tolerance * norm {
                break;
            }
            last = norm;
            u = col.iter().map(|v| v / norm).collect();
        }
    }
    let value = best.1.cstar_norm();
    Ok((value, best.1))
}

/// `q^k (1 - q^2) (1 - q^{2(k+1)})^{-1/2}`: the largest norm in the fiber
/// ball, attained at a multiple of `f_{0,k}`.
pub fn fiber_ball_radius(q: f64, k: usize) -> f64 {
    q.powi(k as i32) * (1.0 - q * q) / (1.0 - q.powi(2 * (k as i32 + 1))).sqrt()
}

/// `q^{n-1} (1 - q^2) (1 - q^{2n})^{-1/2}` for `n >= 1`, and `q^{-1}` for
/// `n = 0`.
pub fn coefficient_bound(q: f64, n: usize) -> f64 {
    if n == 0 {
        1.0 / q
    } else {
        q.powi(n as i32 - 1) * (1.0 - q * q) / (1.0 - q.powi(2 * n as i32)).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayAudit {
    pub k: usize,
    pub samples: usize,
    /// Largest `|lambda_n| / bound_n` over all samples and rows.
    pub max_ratio: f64,
    pub violations: usize,
}

fn decay_ratio(x: &PodlesElement, k: usize) -> f64 {
    let q = x.constants().q();
    (0..x.constants().dim())
        .map(|n| x.coefficient(n, k).norm() / coefficient_bound(q, n))
        .fold(0.0, f64::max)
}

/// Scales `x` onto `|d_1(x)| = 1`; zero stays zero.
fn to_fiber_boundary(x: &PodlesElement) -> PodlesElement {
    let n = deriv_norm(&d1(x));
    if n == 0.0 {
        x.clone()
    } else {
        x.scale(Complex64::new(1.0 / n, 0.0))
    }
}

/// Draws elements of the fiber over `q^{2k}` on the boundary of
/// `|d_1(x)| <= 1` and compares their coefficients with the decay bound.
///
/// Half of the samples are dense random columns; the rest are random
/// single-coefficient columns, which come closest to the bound.
pub fn coefficient_decay_audit(
    k: usize,
    samples: usize,
    constants: &ModelConstants,
    seed: u64,
) -> Result<DecayAudit> {
    if k > constants.order() {
        return Err(Error::ColumnOutOfRange {
            column: k,
            max: constants.order(),
        });
    }
    let dim = constants.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = 0.0_f64;
    let mut violations = 0;
    for s in 0..samples {
        let mut lam = DMatrix::zeros(dim, dim);
        if s % 2 == 0 {
            for n in 0..dim {
                lam[(n, k)] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        } else {
            let n = rng.random_range(0..dim);
            lam[(n, k)] = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        }
        let x = to_fiber_boundary(&PodlesElement::from_coefficients(*constants, lam)?);
        let r = decay_ratio(&x, k);
        max_ratio = max_ratio.max(r);
        if r > 1.0 + 1e-12 {
            violations += 1;
        }
    }
    Ok(DecayAudit {
        k,
        samples,
        max_ratio,
        violations,
    })
}

/// Ratio of a fiber element's coefficients to the decay bound.
pub fn coefficient_decay_ratio(x: &PodlesElement, k: usize) -> f64 {
    decay_ratio(x, k)
}

/// `2 (1 - q)^{-2}`: the norm bound for `mu = 0`, `L <= 1`.
pub fn lip_ball_norm_bound(q: f64) -> f64 {
    2.0 / (1.0 - q).powi(2)
}

/// Random self-adjoint elements with `mu = 0` scaled to `L = 1`.
pub fn random_lip_ball_elements(
    constants: &ModelConstants,
    samples: usize,
    seed: u64,
) -> Vec<PodlesElement> {
    let dim = constants.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mut lam = DMatrix::from_fn(dim, dim, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            lam = (&lam + lam.adjoint()) * Complex64::new(0.5, 0.0);
            let x = PodlesElement::from_coefficients(*constants, lam).expect("window-sized");
            let l = seminorm_l(&x);
            x.scale(Complex64::new(1.0 / l, 0.0))
        })
        .collect()
}
