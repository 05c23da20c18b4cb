use num_complex::Complex64;
use proptest::prelude::*;
use qpbraid::branch::{analyze, branch_points, check_genericity, BranchData, DEFAULT_BUDGET, MAX_HALVINGS};
use qpbraid::poly::{discriminant_w, parse_polynomial, roots};
use qpbraid::{BivariatePolynomial, UnivariatePolynomial};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn planted() -> impl Strategy<Value = Vec<Complex64>> {
    // distinct points of the half-integer grid in [-3, 3]^2
    prop::collection::btree_set((-6i32..=6, -6i32..=6), 1..=8)
        .prop_map(|s| s.into_iter().map(|(a, b)| c(a as f64 / 2.0, b as f64 / 2.0)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn planted_roots_are_recovered(r in planted()) {
        let p = UnivariatePolynomial::from_roots(&r);
        let found = roots(&p, 1e-12).unwrap().flattened();
        prop_assert_eq!(found.len(), r.len());
        for want in &r {
            let d = found.iter().map(|z| (z - want).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(d <= 1e-8 * (1.0 + want.norm()), "root {} missed by {:e}", want, d);
        }
    }
}

fn fiber_product(f: &BivariatePolynomial, z: Complex64) -> Complex64 {
    let r = f.fiber_roots_raw(z, None, 1e-13).unwrap();
    let n = f.degree_w();
    let mut prod = f.leading().powu(2 * n as u32 - 2);
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            prod *= (r[i] - r[j]).powu(2);
        }
    }
    prod
}

#[test]
fn discriminant_matches_root_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for expr in ["w^2 - z", "w^3 - 3*w + 2*z^4", "w^4 - z w^3 - w^2 + z w + 0.05", "2*w^3 + z^2 w - 1", "w^5 - z w + 1"] {
        let f = parse_polynomial(expr).unwrap();
        let d = discriminant_w(&f).unwrap();
        for _ in 0..20 {
            let z = c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let (a, b) = (d.eval(z), fiber_product(&f, z));
            assert!((a - b).norm() <= 1e-7 * (1.0 + b.norm()), "{expr} at {z}: {a} vs {b}");
        }
    }
}

#[test]
fn fiber_roots_move_lipschitz() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for expr in ["w^3 - 3*w + 2*z^4", "w^4 - z w^3 - w^2 + z w + 0.05"] {
        let (f, b) = analyze(&parse_polynomial(expr).unwrap(), DEFAULT_BUDGET, None).unwrap();
        let mut tested = 0;
        while tested < 20 {
            let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if b.points.iter().any(|p| (p.z - z).norm() < 0.1) {
                continue;
            }
            let delta = Complex64::from_polar(1e-7, rng.gen_range(0.0..std::f64::consts::TAU));
            let r0 = f.fiber_roots_raw(z, None, 1e-13).unwrap();
            let r1 = f.fiber_roots_raw(z + delta, None, 1e-13).unwrap();
            for w in &r0 {
                // first-order prediction from the implicit function theorem
                let speed = (f.dz(z, *w) / f.dw(z, *w)).norm();
                let moved = r1.iter().map(|v| (v - w).norm()).fold(f64::INFINITY, f64::min);
                assert!(moved <= 2.0 * speed * delta.norm() + 1e-12, "{expr} at {z}: moved {moved:e}, speed {speed}");
            }
            tested += 1;
        }
    }
}

#[test]
fn rotation_margin_bounds_every_gap() {
    for expr in ["w^3 - 3*w + 2*z^4", "w^4 - z w^3 - w^2 + z w + 0.05", "w^3 - z w^2 + w - z + 0.05", "w^2 - z"] {
        let (_, b) = analyze(&parse_polynomial(expr).unwrap(), DEFAULT_BUDGET, None).unwrap();
        let rot = b.rotation();
        let Some(margin) = b.margin else { continue };
        assert!(margin > 0.0);
        for p in &b.points {
            let mut re: Vec<f64> = p.fiber.iter().map(|r| (rot * r.value).re).collect();
            re.sort_by(f64::total_cmp);
            for g in re.windows(2) {
                assert!(g[1] - g[0] >= margin * (1.0 - 1e-12), "{expr}: gap {} < margin {margin}", g[1] - g[0]);
            }
        }
    }
}

fn hausdorff(a: &BranchData, b: &BranchData) -> f64 {
    let one_way = |x: &BranchData, y: &BranchData| {
        x.points
            .iter()
            .map(|p| y.points.iter().map(|q| (p.z - q.z).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

#[test]
fn perturbed_branch_points_converge() {
    for expr in ["w^2 - z^2", "w^2 - z^3", "w^3 - z^2"] {
        let f = parse_polynomial(expr).unwrap();
        let limit = branch_points(&f).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..=MAX_HALVINGS {
            let eps = DEFAULT_BUDGET * 0.5f64.powi(k as i32);
            let b = branch_points(&f.add_w_term(c(eps, 0.0))).unwrap();
            let d = hausdorff(&b, &limit);
            assert!(d <= last + 1e-9, "{expr}: distance grew from {last:e} to {d:e} at eps {eps:e}");
            last = d;
        }
        assert!(last < 1e-2, "{expr}: final distance {last:e}");
    }
}

#[test]
fn genericity_reports_are_deterministic() {
    for expr in ["w^2 - z^2", "w^3 - 3*w + 2*z^4", "w^3 - z^2"] {
        let f = parse_polynomial(expr).unwrap();
        let b = branch_points(&f).unwrap();
        assert_eq!(check_genericity(&f, &b), check_genericity(&f, &branch_points(&f).unwrap()));
    }
}
