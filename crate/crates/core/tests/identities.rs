use nssl::expr::Expr;
use nssl::mfunc::{compute_ln, compute_mn, continuation_check, wronskian_defect};
use nssl::ode::Tolerances;
use nssl::problem::{Endpoint, Problem, RightBc};
use nssl::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn e(src: &str) -> Expr {
    Expr::parse_closed(src).unwrap()
}

/// (problem, truncation point) triples covering a regular, a decaying-weight
/// and a rotated-oscillator problem, each with a different left angle.
fn problems() -> Vec<(&'static str, Problem, f64)> {
    vec![
        (
            "regular",
            Problem::new(e("1+x/2"), e("sin(x)"), e("1"), 0.0, Endpoint::Finite(1.0), c(0.3, 0.2), RightBc::Angle(c(0.7, -0.1)), vec![1.0])
                .unwrap(),
            1.0,
        ),
        (
            "decaying weight",
            Problem::new(e("1"), e("0.75+i"), e("exp(-3*x)"), 0.0, Endpoint::Infinite, c(0.0, 0.0), RightBc::reference(e("exp(-x)")), vec![10.0])
                .unwrap(),
            10.0,
        ),
        (
            "rotated oscillator",
            Problem::new(e("1"), e("(1+3*i)*x^2"), e("1"), 0.0, Endpoint::Infinite, c(std::f64::consts::FRAC_PI_4, 0.0), RightBc::Dirichlet, vec![6.0])
                .unwrap(),
            6.0,
        ),
    ]
}

fn random_lambda(rng: &mut StdRng) -> Complex64 {
    c(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0))
}

#[test]
fn m_and_l_are_negative_reciprocals() {
    let tol = Tolerances::default();
    let mut rng = StdRng::seed_from_u64(3);
    for (name, pr, bn) in problems() {
        for _ in 0..100 {
            let lambda = random_lambda(&mut rng);
            let m = compute_mn(&pr, bn, lambda, tol).unwrap();
            let l = compute_ln(&pr, bn, lambda, tol).unwrap();
            if m.at_pole || l.at_pole {
                continue;
            }
            let err = (m.value * l.value + 1.0).norm();
            assert!(err <= 1e-9, "{name} at {lambda}: m l + 1 = {err:e}");
        }
    }
}

#[test]
fn wronskian_of_fundamental_pair_is_minus_one() {
    let tol = Tolerances::default();
    let mut rng = StdRng::seed_from_u64(5);
    for (name, pr, bn) in problems() {
        for _ in 0..10 {
            let lambda = random_lambda(&mut rng);
            let defect = wronskian_defect(&pr, bn, lambda, tol).unwrap();
            assert!(defect <= 1e-8, "{name} at {lambda}: {defect:e}");
        }
    }
}

#[test]
fn continuation_formula_reproduces_m() {
    let (_, pr, bn) = problems().swap_remove(1);
    let tol = Tolerances::default();
    let mut rng = StdRng::seed_from_u64(9);
    for _ in 0..10 {
        let reference = c(rng.gen_range(0.0..100.0), rng.gen_range(0.0..20.0));
        let lambda = c(rng.gen_range(0.0..100.0), rng.gen_range(0.0..20.0));
        let check = continuation_check(&pr, bn, reference, lambda, tol).unwrap();
        assert!(check.discrepancy <= 1e-5, "{reference} -> {lambda}: {check:?}");
    }
}

#[test]
fn selfadjoint_problem_has_real_m_on_real_axis() {
    // q, w and α real: m_n(λ) is real for real λ and conjugate-symmetric
    let pr = Problem::new(e("1"), e("x^2"), e("1"), 0.0, Endpoint::Infinite, c(0.4, 0.0), RightBc::Dirichlet, vec![8.0]).unwrap();
    let tol = Tolerances::default();
    for lambda in [c(-3.0, 0.0), c(2.0, 0.0), c(4.5, 0.0)] {
        let m = compute_mn(&pr, 8.0, lambda, tol).unwrap().value;
        assert!(m.im.abs() <= 1e-10 * m.norm().max(1.0), "{lambda}: {m}");
    }
    let z = c(2.0, 1.5);
    let a = compute_mn(&pr, 8.0, z, tol).unwrap().value;
    let b = compute_mn(&pr, 8.0, z.conj(), tol).unwrap().value;
    assert!((a - b.conj()).norm() <= 1e-10 * a.norm());
}
