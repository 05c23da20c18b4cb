use qpbraid::braid::QpFactor;
use qpbraid::realization::{realization_curve, realize, RealizationPlan};
use qpbraid::{BraidWord, QuasipositiveFactorization};

fn qpf(n: usize, parts: &[(&str, usize)]) -> QuasipositiveFactorization {
    let factors = parts
        .iter()
        .map(|(c, k)| QpFactor {
            conjugator: BraidWord::parse(n, c).unwrap(),
            k: *k,
        })
        .collect();
    QuasipositiveFactorization::new(n, factors).unwrap()
}

#[test]
fn curve_coefficients() {
    // (w - 1)(w - z) + 0.05 = w^2 - w - z w + z + 0.05
    let f = realization_curve(2, 0.05).unwrap();
    let z = num_complex::Complex64::new(0.3, -0.7);
    let w = num_complex::Complex64::new(1.1, 0.4);
    let direct = (w - 1.0) * (w - z) + 0.05;
    assert!((f.eval(z, w) - direct).norm() < 1e-14);
}

#[test]
fn plans_have_every_generator() {
    for n in 2..=5 {
        let plan = RealizationPlan::build(n).unwrap();
        assert_eq!(plan.generators.len(), n - 1);
    }
}

#[test]
fn knot_examples() {
    let r = realize(&qpf(3, &[("", 1), ("", 1), ("", 2), ("s2", 1)])).unwrap();
    assert_eq!(r.word.exponent_sum(), 4);
    let r = realize(&qpf(3, &[("", 1), ("s2 s2 s2", 1)])).unwrap();
    assert_eq!(r.word.exponent_sum(), 2);
}
