//! The invariant suite behind `podles verify`.
//!
//! Every check reports a measured quantity and the bound it must respect.
//! Counts of failed exact identities are reported with bound 0.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use podles::dirac::{d1, d1_crosscheck, deriv_norm, representation_matrix, representation_norm, seminorm_l};
use podles::integral::{
    integral_horizontal, integral_norm_bound, integral_total, integral_vertical, tail_column_bound,
    FiberColumn, IntegralOperators,
};
use podles::metric::{
    coefficient_decay_audit, fiber_ball_extremal, fiber_ball_radius, lip_ball_norm_bound, mk_distance,
    random_lip_ball_elements,
};
use podles::model::{generator, matrix_unit, matrix_unit_from_generators, Generator};
use podles::qsymb::{
    del1_sym, eval_pi_theta, normal_form_with, q_number_squared, qmul, word_product, Letter,
    RewriteStrategy, Word,
};
use podles::{
    DerivativeElement, LaurentScalar, ModelConstants, PodlesElement, QPolynomial, QState, Result,
    SolverConfig,
};

use crate::RunConfig;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub lemma_key: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckRecord {
    fn new(check: impl Into<String>, lemma_key: &str, measured: f64, bound: f64) -> Self {
        Self {
            check: check.into(),
            lemma_key: lemma_key.into(),
            measured,
            bound,
            pass: measured <= bound,
        }
    }
}

struct Suite<'a> {
    config: &'a RunConfig,
    constants: ModelConstants,
    rng: ChaCha8Rng,
    records: Vec<CheckRecord>,
}

/// Runs every check for one configuration.
pub fn run_suite(config: &RunConfig) -> Result<Vec<CheckRecord>> {
    let mut s = Suite {
        config,
        constants: config.constants()?,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        records: Vec::new(),
    };
    s.confluence();
    s.relations();
    s.derivative_powers();
    s.matrix_units()?;
    s.normalizing_constants();
    s.derivative_of_matrix_units()?;
    s.derivative_of_indicators()?;
    s.crosscheck()?;
    s.norm_oracle()?;
    s.leibniz();
    s.fundamental_theorem()?;
    s.continuity()?;
    s.operator_certificates();
    s.fiber_ball()?;
    s.lip_ball()?;
    Ok(s.records)
}

fn qp(n: i64) -> QPolynomial {
    QPolynomial::scalar(LaurentScalar::q_pow(n))
}

fn count(flags: impl IntoIterator<Item = bool>) -> f64 {
    flags.into_iter().filter(|ok| !ok).count() as f64
}

impl Suite<'_> {
    fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    fn q(&self) -> f64 {
        self.constants.q()
    }

    fn order(&self) -> usize {
        self.constants.order()
    }

    fn unit(&mut self) -> f64 {
        self.rng.random_range(-1.0..1.0)
    }

    fn complex(&mut self) -> Complex64 {
        Complex64::new(self.unit(), self.unit())
    }

    fn random_element(&mut self, with_scalar: bool) -> PodlesElement {
        let d = self.constants.dim();
        let lam = DMatrix::from_fn(d, d, |_, _| self.complex());
        let mu = if with_scalar { self.complex() } else { Complex64::new(0.0, 0.0) };
        PodlesElement::new(self.constants, mu, lam).expect("window-sized")
    }

    fn random_derivative(&mut self) -> DerivativeElement {
        let d = self.constants.dim();
        let c = DMatrix::from_fn(d, d + 1, |_, _| self.complex());
        DerivativeElement::new(self.constants, c).expect("window-sized")
    }

    fn confluence(&mut self) {
        let letters = [Letter::A, Letter::AStar, Letter::B, Letter::BStar];
        let mut flags = Vec::with_capacity(500);
        for i in 0..500u64 {
            let len = self.rng.random_range(0..=8);
            let w: Vec<Letter> = (0..len).map(|_| letters[self.rng.random_range(0..4)]).collect();
            let word = Word::new(w.clone());
            let reference = normal_form_with(&word, RewriteStrategy::Leftmost);
            flags.push(
                normal_form_with(&word, RewriteStrategy::Rightmost) == reference
                    && normal_form_with(&word, RewriteStrategy::Random(self.config.seed ^ i)) == reference
                    && word_product(&w) == reference,
            );
        }
        self.push(CheckRecord::new("rewrite confluence on 500 words", "confluence", count(flags), 0.0));
    }

    fn relations(&mut self) {
        use Letter::*;
        let w = |ls: &[Letter]| word_product(ls);
        let one = QPolynomial::one();
        let (cap_a, cap_b, cap_bs) = (
            QPolynomial::sphere_a(),
            QPolynomial::sphere_b(),
            QPolynomial::sphere_b_star(),
        );
        let (astar, bstar) = (QPolynomial::a_star(), QPolynomial::b_star());
        let defining = [
            w(&[B, A]) == &qp(1) * &w(&[A, B]),
            w(&[BStar, A]) == &qp(1) * &w(&[A, BStar]),
            w(&[B, BStar]) == w(&[BStar, B]),
            &w(&[AStar, A]) + &(&qp(2) * &w(&[B, BStar])) == one,
            &w(&[A, AStar]) + &w(&[B, BStar]) == one,
        ];
        self.push(CheckRecord::new("defining relations", "relations", count(defining), 0.0));
        let sphere = [
            qmul(&bstar, &cap_b) == &qp(1) * &qmul(&cap_b, &bstar),
            qmul(&astar, &cap_bs) == &qp(1) * &qmul(&cap_bs, &astar),
            qmul(&astar, &cap_a) == &qp(2) * &qmul(&cap_a, &astar),
            qmul(&bstar, &cap_a) == qmul(&cap_a, &bstar),
            qmul(&cap_a, &cap_b) == &qp(2) * &qmul(&cap_b, &cap_a),
            qmul(&cap_b, &cap_bs) == &qp(-2) * &qmul(&cap_a, &(&one - &cap_a)),
        ];
        self.push(CheckRecord::new("commutation with A, B, B*", "eq:bBrel", count(sphere), 0.0));
    }

    fn derivative_powers(&mut self) {
        let (cap_a, cap_b, cap_bs) = (
            QPolynomial::sphere_a(),
            QPolynomial::sphere_b(),
            QPolynomial::sphere_b_star(),
        );
        let bsas = qmul(&QPolynomial::b_star(), &QPolynomial::a_star());
        let bs2 = QPolynomial::b_star().pow(2);
        let as2 = QPolynomial::a_star().pow(2);
        let mut flags = Vec::new();
        for n in 1..=10u32 {
            let qn = QPolynomial::scalar(q_number_squared(n));
            flags.push(del1_sym(&cap_a.pow(n)).ok() == Some(&qn * &qmul(&cap_a.pow(n - 1), &bsas)));
            flags.push(del1_sym(&cap_b.pow(n)).ok() == Some(-(&qn * &qmul(&cap_b.pow(n - 1), &bs2))));
            flags.push(
                del1_sym(&cap_bs.pow(n)).ok() == Some(&(&qp(-1) * &qn) * &qmul(&cap_bs.pow(n - 1), &as2)),
            );
        }
        self.push(CheckRecord::new("d1 of A^n, B^n, B*^n for n <= 10", "l:derpotens", count(flags), 0.0));
    }

    fn matrix_units(&mut self) -> Result<()> {
        let small = self.constants.with_order(self.order().min(12))?;
        let d = small.dim();
        let units: Vec<Vec<PodlesElement>> = (0..d)
            .map(|n| (0..d).map(|k| matrix_unit(n, k, &small)).collect())
            .collect::<Result<_>>()?;
        let zero = PodlesElement::zero(small);
        let mut flags = Vec::new();
        for n in 0..d {
            for k in 0..d {
                flags.push(units[n][k].adjoint() == units[k][n]);
                for m in 0..d {
                    for l in 0..d {
                        let expected = if k == m { &units[n][l] } else { &zero };
                        flags.push(units[n][k].mul(&units[m][l])? == *expected);
                    }
                }
            }
        }
        self.push(CheckRecord::new(
            format!("matrix-unit relations, all indices <= {}", small.order()),
            "l:matrix",
            count(flags),
            0.0,
        ));
        let mut worst = 0.0_f64;
        for n in 0..=self.order() {
            for k in 0..=self.order() {
                let g = matrix_unit_from_generators(n, k, &self.constants)?;
                worst = worst.max(g.max_abs_diff(&matrix_unit(n, k, &self.constants)?));
            }
        }
        self.push(CheckRecord::new("matrix units built from A, B, B*", "eq:onb", worst, 1e-12));
        Ok(())
    }

    fn normalizing_constants(&mut self) {
        let q = self.q();
        let c = |n, k| self.constants.c(n, k);
        let mut worst = 0.0_f64;
        for n in 1..=self.order() {
            for k in 0..n {
                if c(n, k) < 1e-250 {
                    continue;
                }
                let r1 = c(n, k + 1) / c(n, k) * q.powi(2 * k as i32) * (1.0 - q.powi(2 * (k as i32 + 1)));
                let r2 = c(n - 1, k) / c(n, k) * q.powi(2 * (n as i32 - 1)) * (1.0 - q.powi(2 * n as i32));
                worst = worst.max((r1 - 1.0).abs()).max((r2 - 1.0).abs());
            }
        }
        self.push(CheckRecord::new("ratios of normalizing constants", "l:derbasII", worst, 1e-12));
    }

    fn derivative_of_matrix_units(&mut self) -> Result<()> {
        let q = self.q();
        let denom = 1.0 - q * q;
        let mut worst = 0.0_f64;
        for n in 0..=self.order() {
            for k in 0..=self.order() {
                let xi = d1(&matrix_unit(n, k, &self.constants)?);
                let mut expected = DMatrix::<Complex64>::zeros(self.constants.dim(), self.constants.dim() + 1);
                expected[(n, k + 1)] = Complex64::new(
                    q.powi(-3 * k as i32 - 2) * (1.0 - q.powi(2 * (k as i32 + 1))).sqrt() / denom,
                    0.0,
                );
                if n >= 1 {
                    expected[(n - 1, k)] = Complex64::new(
                        -q.powi(-2 * k as i32 - n as i32 + 1) * (1.0 - q.powi(2 * n as i32)).sqrt() / denom,
                        0.0,
                    );
                }
                for (a, b) in xi.coefficients().iter().zip(expected.iter()) {
                    worst = worst.max((a - b).norm() / b.norm().max(1.0));
                }
            }
        }
        self.push(CheckRecord::new("d1 of every matrix unit", "l:derbasII", worst, 1e-12));
        Ok(())
    }

    fn derivative_of_indicators(&mut self) -> Result<()> {
        let q = self.q();
        let n = self.order();
        let theta = 0.7;
        let bsas = eval_pi_theta(&qmul(&QPolynomial::b_star(), &QPolynomial::a_star()), q, theta, n + 1)?.matrix;
        let mut worst = 0.0_f64;
        for k in 0..=n {
            let chi = generator(Generator::Chi(k), &self.constants)?;
            let lhs = representation_matrix(&d1(&chi), theta)?;
            let mut proj = DMatrix::<Complex64>::zeros(n + 2, n + 2);
            proj[(k, k)] = Complex64::new(q.powi(-2 * k as i32) / (1.0 - q * q), 0.0);
            if k >= 1 {
                proj[(k - 1, k - 1)] = Complex64::new(-q.powi(-2 * (k as i32 - 1)) / (1.0 - q * q), 0.0);
            }
            let rhs = proj * &bsas;
            let scale = rhs.iter().map(|z| z.norm()).fold(1.0, f64::max);
            worst = worst.max((lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale);
        }
        self.push(CheckRecord::new("d1 of spectral projections of A", "l:derind", worst, 1e-12));
        Ok(())
    }

    fn crosscheck(&mut self) -> Result<()> {
        let (cap_a, cap_b, cap_bs) = (
            QPolynomial::sphere_a(),
            QPolynomial::sphere_b(),
            QPolynomial::sphere_b_star(),
        );
        let mut polys = vec![
            QPolynomial::one(),
            cap_a.clone(),
            cap_a.pow(2),
            cap_a.pow(4),
            cap_b.clone(),
            cap_b.pow(3),
            cap_bs.clone(),
            cap_bs.pow(2),
            qmul(&cap_a, &cap_b),
            qmul(&cap_b, &cap_bs),
            qmul(&cap_bs, &cap_b),
            qmul(&qmul(&cap_a, &cap_b), &cap_bs),
        ];
        let pool = [cap_a, cap_b, cap_bs, QPolynomial::one()];
        while polys.len() < 20 {
            let mut p = QPolynomial::zero();
            for _ in 0..3 {
                let mut t = QPolynomial::one();
                for _ in 0..self.rng.random_range(1..=3) {
                    t = qmul(&t, &pool[self.rng.random_range(0..pool.len())]);
                }
                p = &p + &t.scale_rational(self.rng.random_range(-4..=4), self.rng.random_range(1..=3));
            }
            polys.push(p);
        }
        let mut worst = 0.0_f64;
        for p in &polys {
            for theta in [0.0, 1.3] {
                let r = d1_crosscheck(p, &self.constants, theta)?;
                worst = worst.max(r.discrepancy / r.scale.max(1.0));
            }
        }
        self.push(CheckRecord::new(
            "closed-form d1 against symbolic d1 on 20 polynomials, relative",
            "p:totaldern",
            worst,
            1e-9,
        ));
        Ok(())
    }

    fn norm_oracle(&mut self) -> Result<()> {
        let grid = self.config.theta_grid.max(1);
        let mut mismatch = 0.0_f64;
        let mut variation = 0.0_f64;
        for _ in 0..20 {
            let xi = self.random_derivative();
            let closed = deriv_norm(&xi);
            let mut lo = f64::INFINITY;
            let mut hi = 0.0_f64;
            for t in 0..grid {
                let v = representation_norm(&xi, std::f64::consts::TAU * t as f64 / grid as f64)?;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            mismatch = mismatch.max((hi - closed).abs()).max((lo - closed).abs());
            variation = variation.max(hi - lo);
        }
        self.push(CheckRecord::new("weighted norm against representation norms", "p:fibhilb", mismatch, 1e-9));
        self.push(CheckRecord::new("representation norm across angles", "p:fibhilb", variation, 1e-10));
        Ok(())
    }

    fn leibniz(&mut self) {
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..20 {
            let x = self.random_element(true);
            let y = self.random_element(true);
            let lhs = seminorm_l(&x.mul(&y).expect("same constants"));
            let rhs = seminorm_l(&x) * y.cstar_norm() + x.cstar_norm() * seminorm_l(&y);
            worst = worst.max((lhs - rhs) / rhs.max(1.0));
        }
        self.push(CheckRecord::new("Leibniz inequality for L", "l:Leibniz", worst.max(0.0), 1e-9));
    }

    fn fundamental_theorem(&mut self) -> Result<()> {
        let mut worst = 0.0_f64;
        let mut split = Vec::new();
        let mut inputs: Vec<PodlesElement> = (0..30).map(|_| self.random_element(true)).collect();
        for n in 0..=self.order() {
            for k in 0..=self.order() {
                inputs.push(matrix_unit(n, k, &self.constants)?);
            }
        }
        for x in &inputs {
            let xi = d1(x);
            let target = x.sub(&PodlesElement::scalar(self.constants, x.psi_infty()))?;
            worst = worst.max(integral_total(&xi)?.sub(&target)?.cstar_norm());
            let v = integral_vertical(&xi)?;
            let h = integral_horizontal(&xi)?;
            for n in 0..self.constants.dim() {
                for k in 0..self.constants.dim() {
                    let zero_side = if n > k { &h } else { &v };
                    split.push(zero_side.coefficient(n, k) == Complex64::new(0.0, 0.0));
                }
            }
        }
        self.push(CheckRecord::new("integral of d1(x) recovers x - psi(x)", "t:fundam", worst, 1e-10));
        self.push(CheckRecord::new(
            "vertical integral vanishes on n <= k, horizontal on n > k",
            "l:quavertf/l:quahorif",
            count(split),
            0.0,
        ));
        Ok(())
    }

    fn continuity(&mut self) -> Result<()> {
        let q = self.q();
        let kmax = self.order().min(8);
        let (mut total, mut vertical, mut horizontal, mut norm) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        for _ in 0..20 {
            let xi = self.random_derivative();
            for k in 0..=kmax {
                let r = tail_column_bound(&xi, k)?;
                total = total.max(r.total / r.bound_total);
                vertical = vertical.max(r.vertical / r.bound_vertical);
                horizontal = horizontal.max(r.horizontal / r.bound_horizontal);
            }
            let dn = deriv_norm(&xi);
            for part in [integral_vertical(&xi)?, integral_horizontal(&xi)?] {
                norm = norm.max(part.cstar_norm() / (integral_norm_bound(q) * dn));
            }
        }
        let slack = 1.0 + 1e-12;
        self.push(CheckRecord::new(
            format!("tail of the total integral, ratio to bound, k <= {kmax}"),
            "p:continuity",
            total,
            slack,
        ));
        self.push(CheckRecord::new("tail of the vertical integral, ratio to bound", "l:vertcontf", vertical, slack));
        self.push(CheckRecord::new("tail of the horizontal integral, ratio to bound", "l:horicont", horizontal, slack));
        self.push(CheckRecord::new("integral operator norms, ratio to bound", "integral-norm", norm, slack));
        Ok(())
    }

    fn operator_certificates(&mut self) {
        let ops = IntegralOperators::new(&self.constants);
        let q = self.q();
        let len = self.constants.dim() + 1;
        let (mut g, mut d, mut p) = (0.0_f64, 0.0_f64, 0.0_f64);
        for fiber in 0..=self.order() {
            for _ in 0..5 {
                let v = FiberColumn {
                    fiber,
                    coeffs: DVector::from_fn(len, |_, _| self.complex()),
                };
                let n = v.norm();
                g = g.max(ops.gamma(&v).norm() / n);
                d = d.max(ops.delta(&v).norm() / (q * n));
                p = p.max(ops.project(&v).norm() / n);
            }
        }
        let slack = 1.0 + 1e-12;
        self.push(CheckRecord::new("norm of Gamma", "integral-operators", g, slack));
        self.push(CheckRecord::new("norm of Delta relative to q", "integral-operators", d, slack));
        self.push(CheckRecord::new("norm of P", "integral-operators", p, slack));
    }

    fn fiber_ball(&mut self) -> Result<()> {
        let q = self.q();
        let small = self.constants.with_order(self.order().min(12))?;
        let kmax = 6.min(small.order() - 1);
        let solver = self.solver();
        let mut worst = 0.0_f64;
        let mut witness = Vec::new();
        for k in 0..=kmax {
            let (v, w) = fiber_ball_extremal(k, &small, &solver)?;
            worst = worst.max((v - fiber_ball_radius(q, k)).abs());
            let lead = w.coefficient(0, k).norm();
            witness.push((lead - v).abs() <= 1e-6 && (w.cstar_norm() - lead).abs() <= 1e-6);
        }
        self.push(CheckRecord::new(
            format!("fiber-ball maximum, k <= {kmax}"),
            "l:norbou",
            worst,
            1e-6,
        ));
        self.push(CheckRecord::new("fiber-ball maximizer is a multiple of f_0k", "l:norbou", count(witness), 0.0));
        let mut violations = 0;
        let mut ratio = 0.0_f64;
        for k in 0..=kmax {
            let a = coefficient_decay_audit(k, 200, &self.constants, self.config.seed + k as u64)?;
            violations += a.violations;
            ratio = ratio.max(a.max_ratio);
        }
        self.push(CheckRecord::new(
            format!("coefficient decay, max ratio {ratio:.6}"),
            "t:0-totbou",
            violations as f64,
            0.0,
        ));
        Ok(())
    }

    fn lip_ball(&mut self) -> Result<()> {
        let q = self.q();
        let order = self.order();
        let bound = lip_ball_norm_bound(q);
        let mut ratio = 0.0_f64;
        for x in random_lip_ball_elements(&self.constants, 30, self.config.seed) {
            ratio = ratio.max(x.cstar_norm() / bound);
        }
        let solver = SolverConfig {
            estimate_gap: false,
            ..self.solver()
        };
        let psi = QState::psi_infty(order);
        let mut dist = 0.0_f64;
        for k in 0..=6.min(order) {
            let r = mk_distance(&psi, &QState::vector(k, order)?, &self.constants, &solver)?;
            ratio = ratio.max(r.witness.cstar_norm() / bound);
            let b = 2.0 * q.powi(k as i32) * (k as f64 + 2.0) / (1.0 - q).powi(2);
            dist = dist.max(r.value / b);
        }
        self.push(CheckRecord::new("norm of Lip-ball elements, ratio to bound", "p:l-compact", ratio, 1.0));
        self.push(CheckRecord::new("distance from psi to omega_k, ratio to bound", "p:continuity", dist, 1.0));
        Ok(())
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.config.tolerance,
            seed: self.config.seed,
            ..Default::default()
        }
    }
}
