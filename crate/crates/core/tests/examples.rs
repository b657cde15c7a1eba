use nalgebra::DMatrix;
use num_complex::Complex64;

use podles::dirac::{d1, deriv_norm, seminorm_l};
use podles::integral::{column_extract, integral_total};
use podles::metric::{fiber_ball_extremal, mk_distance, SolverConfig};
use podles::model::{from_qpoly, generator, generator_with_tail, matrix_unit, state_eval, Generator};
use podles::qsymb::{del1_sym, del_k, eval_pi_theta, parse_expression, qmul, QPolynomial};
use podles::{DerivativeElement, LaurentScalar, ModelConstants, PodlesElement, QState};

fn consts(q: f64, n: usize) -> ModelConstants {
    ModelConstants::new(q, n).unwrap()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn symbolic_values() {
    let bb = QPolynomial::b().pow(2);
    assert_eq!(del_k(&bb, false), bb.scale(&LaurentScalar::q_pow(1)));
    let b = QPolynomial::sphere_b();
    assert_eq!(del_k(&b, false), b);
    assert_eq!(del1_sym(&b).unwrap(), -QPolynomial::b_star().pow(2));
    assert_eq!(
        qmul(&QPolynomial::sphere_a(), &b),
        qmul(&b, &QPolynomial::sphere_a()).scale(&LaurentScalar::q_pow(2))
    );
    assert_eq!(parse_expression("a* b*").unwrap(), qmul(&QPolynomial::a_star(), &QPolynomial::b_star()));
    assert!(del1_sym(&QPolynomial::a()).is_err());
}

#[test]
fn representation_of_the_sphere_generators() {
    let q: f64 = 0.5;
    let n = 6;
    let a = eval_pi_theta(&QPolynomial::sphere_a(), q, 1.1, n).unwrap();
    let b = eval_pi_theta(&QPolynomial::sphere_b(), q, 0.0, n).unwrap();
    for r in 0..=n {
        for col in 0..=n {
            let ea = if r == col { q.powi(2 * r as i32) } else { 0.0 };
            assert!((a.matrix[(r, col)] - c(ea)).norm() < 1e-15);
            let eb = if r == col + 1 {
                q.powi(col as i32) * (1.0 - q.powi(2 * (col as i32 + 1))).sqrt()
            } else {
                0.0
            };
            assert!((b.matrix[(r, col)] - c(eb)).norm() < 1e-15);
        }
    }
    let one = eval_pi_theta(&QPolynomial::one(), q, 0.3, n).unwrap();
    assert_eq!(one.matrix, DMatrix::identity(n + 1, n + 1));
}

#[test]
fn model_values() {
    let q: f64 = 0.5;
    let m = consts(q, 12);
    let a = generator(Generator::A, &m).unwrap();
    let b = generator(Generator::B, &m).unwrap();
    let bs = generator(Generator::BStar, &m).unwrap();
    assert!((a.cstar_norm() - 1.0).abs() < 1e-12);
    assert!((b.cstar_norm() - 0.75f64.sqrt()).abs() < 1e-12);

    let ab = a.mul(&b).unwrap();
    let ba = b.mul(&a).unwrap().scale(c(q * q));
    assert!(ab.max_abs_diff(&ba) < 1e-13);

    let one = generator(Generator::One, &m).unwrap();
    let rhs = a.mul(&one.sub(&a).unwrap()).unwrap().scale(c(q.powi(-2)));
    let lhs = b.mul(&bs).unwrap();
    for n in 0..m.order() {
        for k in 0..m.order() {
            assert!((lhs.coefficient(n, k) - rhs.coefficient(n, k)).norm() < 1e-13);
        }
    }

    let f00 = matrix_unit(0, 0, &m).unwrap();
    assert!((f00.sub(&one).unwrap().cstar_norm() - 1.0).abs() < 1e-12);
    let p = matrix_unit(0, 1, &m).unwrap().mul(&matrix_unit(1, 2, &m).unwrap()).unwrap();
    assert_eq!(p, matrix_unit(0, 2, &m).unwrap());

    for k in 0..m.order() {
        let chi = generator(Generator::Chi(k), &m).unwrap();
        let next = generator(Generator::Chi(k + 1), &m).unwrap();
        assert!(chi.mul(&bs).unwrap().max_abs_diff(&bs.mul(&next).unwrap()) < 1e-15);
    }

    let (_, tail_a) = generator_with_tail(Generator::A, &m).unwrap();
    assert!((tail_a - q.powi(26)).abs() < 1e-20);
}

#[test]
fn states() {
    let m = consts(0.5, 8);
    let a = generator(Generator::A, &m).unwrap();
    assert_eq!(state_eval(&QState::psi_infty(8), &a).unwrap(), c(0.0));
    assert!((state_eval(&QState::vector(0, 8).unwrap(), &a).unwrap() - 1.0).norm() < 1e-15);
    let one = generator(Generator::One, &m).unwrap();
    assert_eq!(state_eval(&QState::vector(5, 8).unwrap(), &one).unwrap(), c(1.0));
    assert!(QState::new(0.5, DMatrix::from_element(2, 2, c(0.5))).is_ok());
    assert!(QState::new(0.0, DMatrix::from_diagonal_element(2, 2, c(0.7))).is_err());
}

#[test]
fn polynomials_enter_the_model() {
    let m = consts(0.5, 10);
    let b = from_qpoly(&QPolynomial::sphere_b(), &m).unwrap();
    assert!(b.max_abs_diff(&generator(Generator::B, &m).unwrap()) < 1e-15);
    let a40 = from_qpoly(&QPolynomial::sphere_a().pow(40), &m).unwrap();
    assert!(a40.max_abs_diff(&matrix_unit(0, 0, &m).unwrap()) < 1e-11);
    assert_eq!(
        from_qpoly(&QPolynomial::one(), &m).unwrap(),
        generator(Generator::One, &m).unwrap()
    );
}

#[test]
fn derivative_values() {
    let q: f64 = 0.5;
    let m = consts(q, 10);
    let f00 = matrix_unit(0, 0, &m).unwrap();
    assert!((seminorm_l(&f00) - (1.0 - q * q).powf(-0.5)).abs() < 1e-12);
    let xi = d1(&generator(Generator::A, &m).unwrap());
    for k in 1..=10 {
        let col = column_extract(&xi, k).unwrap();
        let expected = q.powi(2 * k as i32) * q.powi(-(k as i32) - 1) * (1.0 - q.powi(2 * k as i32)).sqrt();
        assert!((col.coeffs[k - 1] - c(expected)).norm() < 1e-12);
    }
    assert_eq!(deriv_norm(&DerivativeElement::zero(m)), 0.0);
    let a = generator(Generator::A, &m).unwrap();
    assert!(integral_total(&d1(&a)).unwrap().max_abs_diff(&a) < 1e-12);
}

#[test]
fn distances() {
    let q = 0.5;
    let m = consts(q, 32);
    let w0 = QState::vector(0, 32).unwrap();
    let w1 = QState::vector(1, 32).unwrap();
    let a = mk_distance(&w0, &w1, &m, &SolverConfig::default()).unwrap();
    let b = mk_distance(&w0, &w1, &m, &SolverConfig { seed: 99, ..Default::default() }).unwrap();
    assert!(a.value > 0.0);
    assert!((a.value - b.value).abs() < 1e-5);
    assert!(a.gap_estimate.unwrap() < 1e-6);
    let same = mk_distance(&w1, &w1, &m, &SolverConfig::default()).unwrap();
    assert_eq!(same.value, 0.0);
    assert_eq!(same.witness, PodlesElement::zero(m));

    let (v, w) = fiber_ball_extremal(0, &consts(q, 6), &SolverConfig::default()).unwrap();
    assert!((v - 0.75f64.sqrt()).abs() < 1e-6);
    assert!(v <= 1.0);
    let doubled = w.scale(c(2.0));
    assert!((deriv_norm(&d1(&doubled)) - 2.0).abs() < 1e-6);
}

#[test]
fn json_round_trips_are_bit_exact() {
    let m = consts(0.37, 5);
    let x = PodlesElement::new(
        m,
        Complex64::new(0.1, -1.0 / 3.0),
        DMatrix::from_fn(6, 6, |r, k| Complex64::new((r as f64).sqrt() / 7.0, -(k as f64) / 3.0)),
    )
    .unwrap();
    let back = PodlesElement::from_json(&x.to_json()).unwrap();
    assert_eq!(back, x);
    let s = QState::vector(3, 5).unwrap();
    assert_eq!(QState::from_json(&s.to_json()).unwrap(), s);
    let xi = d1(&x);
    assert_eq!(DerivativeElement::from_json(&xi.to_json()).unwrap(), xi);
}
