use proptest::prelude::*;
use qfa::tfcore::{
    poly_roots, rf_arith, rf_eval, ArithOp, ComplexPoly, RationalFunction, DEFAULT_ROOT_TOL,
};
use qfa::Complex64;

fn complex(range: f64) -> impl Strategy<Value = Complex64> {
    (-range..range, -range..range).prop_map(|(re, im)| Complex64::new(re, im))
}

fn poly(max_degree: usize) -> impl Strategy<Value = ComplexPoly> {
    proptest::collection::vec(complex(3.0), 2..=max_degree + 1).prop_map(|mut c| {
        let last = c.len() - 1;
        // Keep the leading coefficient away from zero.
        if c[last].norm() < 0.1 {
            c[last] += Complex64::new(1.0, 0.0);
        }
        ComplexPoly::new(c)
    })
}

fn monic(degree: usize) -> impl Strategy<Value = ComplexPoly> {
    proptest::collection::vec(complex(3.0), degree).prop_map(|mut c| {
        c.push(Complex64::new(1.0, 0.0));
        ComplexPoly::new(c)
    })
}

fn residual_bound(p: &ComplexPoly, r: Complex64) -> f64 {
    let m = r.norm().max(1.0);
    p.coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm() * m.powi(k as i32))
        .sum()
}

/// Greedy multiset match; returns the largest pairing distance.
fn match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut pool = b.to_vec();
    let mut worst: f64 = 0.0;
    for x in a {
        let (i, d) = pool
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        worst = worst.max(d);
        pool.swap_remove(i);
    }
    worst
}

fn min_separation(r: &[Complex64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            m = m.min((r[i] - r[j]).norm());
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn roots_have_small_residuals(p in poly(6)) {
        let roots = poly_roots(&p, DEFAULT_ROOT_TOL).unwrap();
        prop_assert_eq!(roots.len(), p.degree());
        for r in roots {
            prop_assert!(p.eval(r).norm() <= DEFAULT_ROOT_TOL * residual_bound(&p, r));
        }
    }

    #[test]
    fn arithmetic_commutes_with_evaluation(
        an in poly(3), ad in monic(2), bn in poly(3), bd in monic(2), s in complex(4.0),
        op in prop_oneof![Just(ArithOp::Add), Just(ArithOp::Sub), Just(ArithOp::Mul), Just(ArithOp::Div)],
    ) {
        let a = RationalFunction::new(an, ad).unwrap();
        let b = RationalFunction::new(bn, bd).unwrap();
        let (Ok(va), Ok(vb)) = (rf_eval(&a, s), rf_eval(&b, s)) else { return Ok(()) };
        // Stay away from poles and zeros of the divisor.
        prop_assume!(va.norm() < 1e6 && vb.norm() < 1e6 && vb.norm() > 1e-6);
        let expected = match op {
            ArithOp::Add => va + vb,
            ArithOp::Sub => va - vb,
            ArithOp::Mul => va * vb,
            ArithOp::Div => va / vb,
        };
        let got = rf_eval(&rf_arith(&a, &b, op).unwrap(), s).unwrap();
        let scale = match op {
            ArithOp::Add | ArithOp::Sub => va.norm() + vb.norm(),
            _ => expected.norm(),
        };
        prop_assert!((got - expected).norm() <= 1e-10 * scale.max(1e-300), "{got} vs {expected}");
    }

    #[test]
    fn roots_of_products_are_unions(rp in proptest::collection::vec(complex(2.0), 1..=4),
                                    rq in proptest::collection::vec(complex(2.0), 1..=4)) {
        let all: Vec<Complex64> = rp.iter().chain(&rq).copied().collect();
        prop_assume!(min_separation(&all) > 0.05);
        let p = ComplexPoly::from_roots(&rp);
        let q = ComplexPoly::from_roots(&rq);
        let roots = poly_roots(&(&p * &q), DEFAULT_ROOT_TOL).unwrap();
        prop_assert_eq!(roots.len(), all.len());
        prop_assert!(match_distance(&roots, &all) < 1e-6);
    }
}

#[test]
fn reduction_keeps_the_response() {
    // (s + 1)(s − 2i) / ((s + 1)(s + 3)) → (s − 2i)/(s + 3)
    let one = Complex64::new(1.0, 0.0);
    let num = ComplexPoly::from_roots(&[-one, Complex64::new(0.0, 2.0)]);
    let den = ComplexPoly::from_roots(&[-one, -3.0 * one]);
    let f = RationalFunction::new(num, den).unwrap();
    let r = f.reduced(qfa::tfcore::DEFAULT_CANCEL_TOL);
    assert_eq!(r.den().degree(), 1);
    for k in 0..41 {
        let s = Complex64::new(0.3, -4.0 + 0.2 * k as f64);
        let (a, b) = (f.eval(s).unwrap(), r.eval(s).unwrap());
        assert!((a - b).norm() <= 1e-9 * a.norm());
    }
}
