//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits nonzero if any of them fails.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use podles::dirac::{d1, deriv_norm, d1_crosscheck, representation_norm};
use podles::integral::{
    integral_horizontal, integral_norm_bound, integral_total, integral_vertical, tail_column_bound,
    FiberColumn, IntegralOperators,
};
use podles::metric::{
    coefficient_decay_audit, coefficient_decay_ratio, fiber_ball_extremal, fiber_ball_radius,
    lip_ball_norm_bound, mk_distance, random_lip_ball_elements,
};
use podles::model::{matrix_unit, matrix_unit_from_generators, sigma_max};
use podles::qsymb::{
    adjoint, del1_sym, del2_sym, del_e, del_k, normal_form_with, q_number_squared, qmul, word_product,
    Letter, RewriteStrategy, Word,
};
use podles::{
    DerivativeElement, LaurentScalar, ModelConstants, PodlesElement, QPolynomial, QState, SolverConfig,
};

const QS: [f64; 3] = [0.3, 0.5, 0.8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn consts(q: f64, order: usize) -> ModelConstants {
    ModelConstants::new(q, order).unwrap()
}

fn qp(n: i64) -> QPolynomial {
    QPolynomial::scalar(LaurentScalar::q_pow(n))
}

fn random_letters(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<Letter> {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| match rng.random_range(0..4) {
            0 => Letter::A,
            1 => Letter::AStar,
            2 => Letter::B,
            _ => Letter::BStar,
        })
        .collect()
}

fn random_element(constants: &ModelConstants, rng: &mut ChaCha8Rng, with_scalar: bool) -> PodlesElement {
    let d = constants.dim();
    let lam = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let mu = if with_scalar {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    } else {
        Complex64::new(0.0, 0.0)
    };
    PodlesElement::new(*constants, mu, lam).unwrap()
}

fn random_derivative(constants: &ModelConstants, rng: &mut ChaCha8Rng) -> DerivativeElement {
    let d = constants.dim();
    let c = DMatrix::from_fn(d, d + 1, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    DerivativeElement::new(*constants, c).unwrap()
}

fn exact_algebra() -> Outcome {
    let (a, astar, b, bstar) = (
        QPolynomial::a(),
        QPolynomial::a_star(),
        QPolynomial::b(),
        QPolynomial::b_star(),
    );
    let one = QPolynomial::one();
    let cap_a = QPolynomial::sphere_a();
    let cap_b = QPolynomial::sphere_b();
    let cap_bs = QPolynomial::sphere_b_star();
    let w = |ls: &[Letter]| word_product(ls);
    use Letter::*;

    let mut failures = Vec::new();
    let mut check = |name: &str, lhs: QPolynomial, rhs: QPolynomial| {
        if lhs != rhs {
            failures.push(name.to_string());
        }
    };

    // Defining relations and their adjoints.
    check("ba = q ab", w(&[B, A]), &qp(1) * &w(&[A, B]));
    check("b*a = q ab*", w(&[BStar, A]), &qp(1) * &w(&[A, BStar]));
    check("a*b = q ba*", w(&[AStar, B]), &qp(1) * &w(&[B, AStar]));
    check("a*b* = q b*a*", w(&[AStar, BStar]), &qp(1) * &w(&[BStar, AStar]));
    check("bb* = b*b", w(&[B, BStar]), w(&[BStar, B]));
    check(
        "a*a + q^2 bb* = 1",
        &w(&[AStar, A]) + &(&qp(2) * &w(&[B, BStar])),
        one.clone(),
    );
    check("aa* + bb* = 1", &w(&[A, AStar]) + &w(&[B, BStar]), one.clone());
    check("adjoint(ab)", adjoint(&w(&[A, B])), &qp(-1) * &w(&[AStar, BStar]));

    // Commutation relations with the sphere generators.
    check("b*B = q Bb*", qmul(&bstar, &cap_b), &qp(1) * &qmul(&cap_b, &bstar));
    check("a*B* = q B*a*", qmul(&astar, &cap_bs), &qp(1) * &qmul(&cap_bs, &astar));
    check("a*A = q^2 Aa*", qmul(&astar, &cap_a), &qp(2) * &qmul(&cap_a, &astar));
    check("b*A = Ab*", qmul(&bstar, &cap_a), qmul(&cap_a, &bstar));
    check("AB = q^2 BA", qmul(&cap_a, &cap_b), &qp(2) * &qmul(&cap_b, &cap_a));
    check(
        "BB* = q^-2 A(1 - A)",
        qmul(&cap_b, &cap_bs),
        &qp(-2) * &qmul(&cap_a, &(&one - &cap_a)),
    );
    check("B* = adjoint(B)", adjoint(&cap_b), cap_bs.clone());

    // Derivatives of powers.
    let bsas = qmul(&bstar, &astar);
    let bs2 = bstar.pow(2);
    let as2 = astar.pow(2);
    for n in 1..=10u32 {
        let qn = QPolynomial::scalar(q_number_squared(n));
        check(
            &format!("d1(A^{n})"),
            del1_sym(&cap_a.pow(n)).unwrap(),
            &qn * &qmul(&cap_a.pow(n - 1), &bsas),
        );
        check(
            &format!("d1(B^{n})"),
            del1_sym(&cap_b.pow(n)).unwrap(),
            -(&qn * &qmul(&cap_b.pow(n - 1), &bs2)),
        );
        check(
            &format!("d1(B*^{n})"),
            del1_sym(&cap_bs.pow(n)).unwrap(),
            &(&qp(-1) * &qn) * &qmul(&cap_bs.pow(n - 1), &as2),
        );
    }
    check("d1(1) = 0", del1_sym(&one).unwrap(), QPolynomial::zero());
    check("q^1/2 del_e(b*b) = b*a*", &QPolynomial::scalar(LaurentScalar::q_pow_half(1)) * &del_e(&w(&[BStar, B])), bsas.clone());
    check("del_k(a)", del_k(&a, false), &QPolynomial::scalar(LaurentScalar::q_pow_half(1)) * &a);
    check("del_e(a) = -b*", del_e(&a), -bstar.clone());
    check("del_e(b) = q^-1 a*", del_e(&b), &qp(-1) * &astar);
    check(
        "d1(B)* = -d2(B*)",
        adjoint(&del1_sym(&cap_b).unwrap()),
        -del2_sym(&cap_bs).unwrap(),
    );

    // Confluence: every reduction order, and the closed-form product, agree.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut divergent = 0;
    for i in 0..500u64 {
        let letters = random_letters(&mut rng, 8);
        let coeff = LaurentScalar::from_ratio(rng.random_range(-5..=5), rng.random_range(1..=4))
            * LaurentScalar::q_pow_half(rng.random_range(-3..=3));
        let word = Word::with_coeff(coeff.clone(), letters.clone());
        let reference = normal_form_with(&word, RewriteStrategy::Leftmost);
        let others = [
            normal_form_with(&word, RewriteStrategy::Rightmost),
            normal_form_with(&word, RewriteStrategy::Random(i)),
            normal_form_with(&word, RewriteStrategy::Random(i + 1000)),
            word_product(&letters).scale(&coeff),
        ];
        if others.iter().any(|o| *o != reference) {
            divergent += 1;
        }
    }
    let pass = failures.is_empty() && divergent == 0;
    outcome(
        pass,
        format!(
            "identity failures: {:?}; divergent words: {divergent}/500",
            failures
        ),
    )
}

fn matrix_units() -> Outcome {
    let m = consts(0.5, 16);
    let d = m.dim();
    let units: Vec<Vec<PodlesElement>> = (0..d)
        .map(|n| (0..d).map(|k| matrix_unit(n, k, &m).unwrap()).collect())
        .collect();
    let zero = PodlesElement::zero(m);
    let mut exact_failures = 0usize;
    for n in 0..d {
        for k in 0..d {
            if units[n][k].adjoint() != units[k][n] {
                exact_failures += 1;
            }
            for mm in 0..d {
                for l in 0..d {
                    let p = units[n][k].mul(&units[mm][l]).unwrap();
                    let expected = if k == mm { &units[n][l] } else { &zero };
                    if p != *expected {
                        exact_failures += 1;
                    }
                }
            }
        }
    }
    // The same units assembled from the generators A, B, B*.
    let mut worst = 0.0_f64;
    for &q in &QS {
        let m = consts(q, 32);
        for n in 0..=32 {
            for k in 0..=32 {
                let g = matrix_unit_from_generators(n, k, &m).unwrap();
                worst = worst.max(g.max_abs_diff(&matrix_unit(n, k, &m).unwrap()));
            }
        }
    }
    outcome(
        exact_failures == 0 && worst <= 1e-12,
        format!(
            "exact relation failures (N=16, all n,k,m,l): {exact_failures}; generator-built units at N=32 deviate by {worst:.2e}"
        ),
    )
}

fn sphere_polynomials(rng: &mut ChaCha8Rng) -> Vec<QPolynomial> {
    let cap_a = QPolynomial::sphere_a();
    let cap_b = QPolynomial::sphere_b();
    let cap_bs = QPolynomial::sphere_b_star();
    let mut out = vec![
        cap_a.clone(),
        cap_a.pow(2),
        cap_a.pow(3),
        cap_a.pow(5),
        cap_b.clone(),
        cap_b.pow(2),
        cap_b.pow(3),
        cap_bs.clone(),
        cap_bs.pow(2),
        qmul(&cap_a, &cap_b),
        qmul(&cap_b, &cap_a),
        qmul(&cap_b, &cap_bs),
        qmul(&cap_bs, &cap_b),
        qmul(&qmul(&cap_a, &cap_b), &cap_bs),
        qmul(&cap_a.pow(2), &cap_bs.pow(2)),
    ];
    let pool = [cap_a.clone(), cap_b.clone(), cap_bs.clone(), QPolynomial::one()];
    while out.len() < 20 {
        let mut p = QPolynomial::zero();
        for _ in 0..3 {
            let mut t = QPolynomial::one();
            for _ in 0..rng.random_range(1..=3) {
                t = qmul(&t, &pool[rng.random_range(0..pool.len())]);
            }
            p = &p + &t.scale_rational(rng.random_range(-4..=4), rng.random_range(1..=3));
        }
        out.push(p);
    }
    out
}

fn derivative_crosscheck() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let polys = sphere_polynomials(&mut rng);
    let mut worst = 0.0_f64;
    for &q in &QS {
        let m = consts(q, 16);
        for p in &polys {
            for theta in [0.0, 0.9, 2.3] {
                let r = d1_crosscheck(p, &m, theta).unwrap();
                worst = worst.max(r.discrepancy);
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("20 polynomials x 3 q x 3 theta, max discrepancy {worst:.2e} (bound 1e-9)"),
    )
}

fn fundamental_theorem() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    let mut pattern_failures = 0usize;
    for &q in &QS {
        let m = consts(q, 24);
        let mut inputs: Vec<PodlesElement> = (0..100).map(|_| random_element(&m, &mut rng, true)).collect();
        for n in 0..=24 {
            for k in 0..=24 {
                inputs.push(matrix_unit(n, k, &m).unwrap());
            }
        }
        for x in &inputs {
            let xi = d1(x);
            let target = x.sub(&PodlesElement::scalar(m, x.psi_infty())).unwrap();
            let back = integral_total(&xi).unwrap();
            worst = worst.max(back.sub(&target).unwrap().cstar_norm());

            let v = integral_vertical(&xi).unwrap();
            let h = integral_horizontal(&xi).unwrap();
            for n in 0..m.dim() {
                for k in 0..m.dim() {
                    let (zero_side, other) = if n > k { (&h, &v) } else { (&v, &h) };
                    if zero_side.coefficient(n, k) != Complex64::new(0.0, 0.0) {
                        pattern_failures += 1;
                    }
                    let scale = x.coefficient(n, k).norm().max(1.0);
                    if (other.coefficient(n, k) - x.coefficient(n, k)).norm() > 1e-10 * scale {
                        pattern_failures += 1;
                    }
                }
            }
        }
    }
    outcome(
        worst <= 1e-10 && pattern_failures == 0,
        format!(
            "N=24, 100 random elements and all matrix units per q: max norm error {worst:.2e} (bound 1e-10), split failures {pattern_failures}"
        ),
    )
}

fn bound_audits() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0usize;
    let mut worst_ratio = 0.0_f64;
    let mut checks = 0usize;
    for &q in &QS {
        let m = consts(q, 10);
        let ops = IntegralOperators::new(&m);
        let norm_bound = integral_norm_bound(q);
        for _ in 0..100 {
            let xi = random_derivative(&m, &mut rng);
            for k in 0..=8 {
                let r = tail_column_bound(&xi, k).unwrap();
                checks += 3;
                for (v, b) in [
                    (r.total, r.bound_total),
                    (r.vertical, r.bound_vertical),
                    (r.horizontal, r.bound_horizontal),
                ] {
                    worst_ratio = worst_ratio.max(v / b);
                    if v > b * (1.0 + 1e-12) {
                        violations += 1;
                    }
                }
            }
            let dn = deriv_norm(&xi);
            for part in [integral_vertical(&xi).unwrap(), integral_horizontal(&xi).unwrap()] {
                checks += 1;
                if part.cstar_norm() > norm_bound * dn * (1.0 + 1e-12) {
                    violations += 1;
                }
            }
            for fiber in 0..=8 {
                let len = m.dim() + 1;
                let v = FiberColumn {
                    fiber,
                    coeffs: DVector::from_fn(len, |_, _| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    }),
                };
                let n0 = v.norm();
                checks += 3;
                violations += usize::from(ops.gamma(&v).norm() > n0 * (1.0 + 1e-12));
                violations += usize::from(ops.delta(&v).norm() > q * n0 * (1.0 + 1e-12));
                violations += usize::from(ops.project(&v).norm() > n0 * (1.0 + 1e-12));
            }
        }
    }
    outcome(
        violations == 0,
        format!("{checks} checks, {violations} violations, largest tail ratio {worst_ratio:.3}"),
    )
}

fn fiber_extremal() -> Outcome {
    let mut worst = 0.0_f64;
    let mut witness_failures = 0usize;
    let mut decay_violations = 0usize;
    let mut decay_max = 0.0_f64;
    for &q in &QS {
        let m = consts(q, 10);
        for k in 0..=6 {
            let (v, w) = fiber_ball_extremal(k, &m, &SolverConfig::default()).unwrap();
            worst = worst.max((v - fiber_ball_radius(q, k)).abs());
            let lead = w.coefficient(0, k).norm();
            let rest = (0..m.dim())
                .flat_map(|n| (0..m.dim()).map(move |c| (n, c)))
                .filter(|&(n, c)| (n, c) != (0, k))
                .map(|(n, c)| w.coefficient(n, c).norm())
                .fold(0.0, f64::max);
            if (lead - v).abs() > 1e-6 || rest > 1e-6 || deriv_norm(&d1(&w)) > 1.0 + 1e-8 {
                witness_failures += 1;
            }
            decay_max = decay_max.max(coefficient_decay_ratio(&w, k));
            let audit = coefficient_decay_audit(k, 200, &m, 17 + k as u64).unwrap();
            decay_violations += audit.violations;
            decay_max = decay_max.max(audit.max_ratio);
        }
    }
    outcome(
        worst <= 1e-6 && witness_failures == 0 && decay_violations == 0,
        format!(
            "k<=6, 3 q: max value error {worst:.2e}, witness failures {witness_failures}, decay violations {decay_violations} (max ratio {decay_max:.6})"
        ),
    )
}

fn lip_ball() -> Outcome {
    let mut worst = 0.0_f64;
    let mut violations = 0usize;
    for &q in &QS {
        let m = consts(q, 16);
        let bound = lip_ball_norm_bound(q);
        let mut feasible = random_lip_ball_elements(&m, 100, 23);
        let psi = QState::psi_infty(16);
        let cfg = SolverConfig {
            estimate_gap: false,
            ..Default::default()
        };
        for k in 0..=6 {
            let wk = QState::vector(k, 16).unwrap();
            let r = mk_distance(&psi, &wk, &m, &cfg).unwrap();
            let b = 2.0 * q.powi(k as i32) * (k as f64 + 2.0) / (1.0 - q).powi(2);
            worst = worst.max(r.value / b);
            if r.value > b {
                violations += 1;
            }
            feasible.push(r.witness);
        }
        for x in &feasible {
            if x.cstar_norm() > bound * (1.0 + 1e-9) {
                violations += 1;
            }
            worst = worst.max(x.cstar_norm() / bound);
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations, largest value/bound ratio {worst:.3}"),
    )
}

/// Distances between diagonal states reduce to `|lambda_{i-1} - lambda_i| <= r_i`
/// with `lambda_{N+1} = 0`, whose optimum is a sum of consecutive `r_i`.
fn reduced_distance(q: f64, order: usize, j: Option<usize>, k: usize) -> f64 {
    let r = |i: usize| q.powi(i as i32 - 1) * (1.0 - q * q) / (1.0 - q.powi(2 * i as i32)).sqrt();
    match j {
        Some(j) => (j.min(k) + 1..=j.max(k)).map(r).sum(),
        None => (k + 1..=order + 1).map(r).sum(),
    }
}

fn metric_axioms() -> Outcome {
    let q = 0.5;
    let order = 32;
    let m = consts(q, order);
    let cfg = SolverConfig {
        estimate_gap: false,
        ..Default::default()
    };
    let labels: Vec<Option<usize>> = std::iter::once(None).chain((0..=6).map(Some)).collect();
    let state = |l: &Option<usize>, n: usize| match l {
        None => QState::psi_infty(n),
        Some(k) => QState::vector(*k, n).unwrap(),
    };
    let s = labels.len();
    let mut d = vec![vec![0.0; s]; s];
    let mut asym = 0.0_f64;
    let mut oracle = 0.0_f64;
    for i in 0..s {
        for j in 0..s {
            if i == j {
                continue;
            }
            d[i][j] = mk_distance(&state(&labels[i], order), &state(&labels[j], order), &m, &cfg)
                .unwrap()
                .value;
        }
    }
    for i in 0..s {
        for j in i + 1..s {
            asym = asym.max((d[i][j] - d[j][i]).abs());
            let exact = match (labels[i], labels[j]) {
                (None, Some(k)) | (Some(k), None) => reduced_distance(q, order, None, k),
                (Some(a), Some(b)) => reduced_distance(q, order, Some(a), b),
                (None, None) => 0.0,
            };
            oracle = oracle.max((d[i][j] - exact).abs());
        }
    }
    let mut triangle = 0.0_f64;
    for i in 0..s {
        for j in 0..s {
            for k in 0..s {
                triangle = triangle.max(d[i][k] - d[i][j] - d[j][k]);
            }
        }
    }

    let mut monotone_failures = 0usize;
    let mut stab = 0.0_f64;
    let mut prev: Vec<f64> = Vec::new();
    for n in [8usize, 16, 32] {
        let mn = consts(q, n);
        let vals: Vec<f64> = (0..=4)
            .flat_map(|k| {
                let pairs = [
                    (QState::vector(k, n).unwrap(), QState::vector(k + 1, n).unwrap()),
                    (QState::vector(0, n).unwrap(), QState::vector(k, n).unwrap()),
                    (QState::psi_infty(n), QState::vector(k, n).unwrap()),
                ];
                pairs
                    .into_iter()
                    .map(|(a, b)| mk_distance(&a, &b, &mn, &cfg).unwrap().value)
                    .collect::<Vec<_>>()
            })
            .collect();
        if !prev.is_empty() {
            for (v, p) in vals.iter().zip(&prev) {
                if *v < p - 1e-8 {
                    monotone_failures += 1;
                }
                if n == 32 {
                    stab = stab.max((v - p).abs());
                }
            }
        }
        prev = vals;
    }
    outcome(
        asym <= 2e-8 && triangle <= 3e-8 && monotone_failures == 0 && stab < 1e-4,
        format!(
            "symmetry {asym:.2e}, triangle excess {triangle:.2e}, N-monotonicity failures {monotone_failures}, |d(32) - d(16)| {stab:.2e}, reduced-problem deviation {oracle:.2e}"
        ),
    )
}

fn norm_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut mismatch = 0.0_f64;
    let mut variation = 0.0_f64;
    for i in 0..50 {
        let q = QS[i % 3];
        let m = consts(q, 8 + i % 5);
        let xi = random_derivative(&m, &mut rng);
        let closed = deriv_norm(&xi);
        let norms: Vec<f64> = (0..20)
            .map(|t| representation_norm(&xi, std::f64::consts::TAU * t as f64 / 20.0).unwrap())
            .collect();
        let (lo, hi) = norms
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        variation = variation.max(hi - lo);
        mismatch = mismatch.max((hi - closed).abs()).max((lo - closed).abs());
        debug_assert!(sigma_max(&xi.weighted()) == closed);
    }
    outcome(
        mismatch <= 1e-9 && variation <= 1e-10,
        format!("50 elements x 20 angles: max mismatch {mismatch:.2e}, theta variation {variation:.2e}"),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("exact algebra", exact_algebra),
        ("matrix units", matrix_units),
        ("derivative cross-check", derivative_crosscheck),
        ("fundamental theorem", fundamental_theorem),
        ("bound audits", bound_audits),
        ("fiber extremal", fiber_extremal),
        ("Lip-ball bound", lip_ball),
        ("metric axioms", metric_axioms),
        ("norm oracle", norm_oracle),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {} [{tag}] {name}: {} ({:.1}s)",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
