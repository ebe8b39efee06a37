//! Property tests for the expression engine and the quantifier-elimination
//! step of the inequality checks.

use num_complex::Complex64;
use plurisub_core::expr::{
    self, eval, parse, wirtinger, Evaluator, ScalarField, WirtingerIndex, WirtingerOp,
};
use plurisub_core::geometry::DomainGeometry;
use plurisub_core::transforms::{choose_c, ConstantEstimates};
use plurisub_core::types::{ComplexPoint2, ComplexVector2, HermitianForm2};
use plurisub_core::verify::FieldAnalyzer;
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Tree {
    Z1,
    Z2,
    Const(f64, f64),
    Conj(Box<Tree>),
    Add(Box<Tree>, Box<Tree>),
    Mul(Box<Tree>, Box<Tree>),
    PowInt(Box<Tree>, i32),
    Re(Box<Tree>),
    Im(Box<Tree>),
    Abs2(Box<Tree>),
    Exp(Box<Tree>),
}

impl Tree {
    fn build(&self) -> ScalarField {
        match self {
            Tree::Z1 => expr::z1(),
            Tree::Z2 => expr::z2(),
            Tree::Const(re, im) => expr::konst(Complex64::new(*re, *im)),
            Tree::Conj(a) => expr::conj(&a.build()),
            Tree::Add(a, b) => expr::add(&a.build(), &b.build()),
            Tree::Mul(a, b) => expr::mul(&a.build(), &b.build()),
            Tree::PowInt(a, k) => expr::powi(&a.build(), *k),
            Tree::Re(a) => expr::re(&a.build()),
            Tree::Im(a) => expr::im(&a.build()),
            Tree::Abs2(a) => expr::abs2(&a.build()),
            Tree::Exp(a) => expr::exp(&a.build()),
        }
    }
}

fn tree_strategy() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![
        Just(Tree::Z1),
        Just(Tree::Z2),
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Tree::Const(re, im)),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Tree::Conj(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), 0u8..4u8).prop_map(|(a, k)| Tree::PowInt(Box::new(a), k as i32)),
            inner.clone().prop_map(|a| Tree::Re(Box::new(a))),
            inner.clone().prop_map(|a| Tree::Im(Box::new(a))),
            inner.clone().prop_map(|a| Tree::Abs2(Box::new(a))),
            inner.prop_map(|a| Tree::Exp(Box::new(a))),
        ]
    })
}

fn test_points() -> Vec<ComplexPoint2> {
    vec![
        ComplexPoint2::from_re_im(0.3, -0.2, 0.1, 0.4),
        ComplexPoint2::from_re_im(-0.7, 0.5, -0.3, -0.1),
        ComplexPoint2::from_re_im(0.0, 0.0, 0.9, 0.0),
    ]
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// Printing and reparsing a field preserves its values.
    #[test]
    fn print_parse_round_trip(tree in tree_strategy()) {
        let f = tree.build();
        let printed = f.to_string();
        let reparsed = parse(&printed)
            .unwrap_or_else(|e| panic!("reparse of '{printed}' failed: {e}"));
        for q in test_points() {
            let (a, b) = (eval(&f, q), eval(&reparsed, q));
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    prop_assert!(
                        close(a, b, 1e-12),
                        "values diverge at {q}: {a} vs {b} for '{printed}'"
                    );
                    if f.real_valued() {
                        prop_assert!(
                            a.im.abs() <= 1e-12 * (1.0 + a.re.abs()),
                            "flagged real but evaluates to {a} at {q}"
                        );
                    }
                }
                // overflow in exp chains may legitimately fail on both sides
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "divergent eval outcomes {a:?} vs {b:?}"),
            }
        }
    }

    /// Mixed Wirtinger partials commute.
    #[test]
    fn wirtinger_indices_commute(
        tree in tree_strategy(),
        ops in proptest::collection::vec(0usize..4, 2..4),
        swap in 0usize..3,
    ) {
        let all = [WirtingerOp::Z1, WirtingerOp::Z2, WirtingerOp::Z1Bar, WirtingerOp::Z2Bar];
        let idx: Vec<WirtingerOp> = ops.iter().map(|&i| all[i]).collect();
        let mut permuted = idx.clone();
        let k = swap % (idx.len() - 1);
        permuted.swap(k, k + 1);
        let f = tree.build();
        let d1 = wirtinger(&f, &WirtingerIndex::new(idx));
        let d2 = wirtinger(&f, &WirtingerIndex::new(permuted));
        for q in test_points() {
            let mut ev = Evaluator::new(q);
            if let (Ok(a), Ok(b)) = (ev.eval(&d1), ev.eval(&d2)) {
                prop_assert!(close(a, b, 1e-12), "order matters at {q}: {a} vs {b}");
            }
        }
    }

    /// For real-valued fields the barred derivative is the conjugate of the
    /// unbarred one, and the mixed Hessian is Hermitian.
    #[test]
    fn real_fields_have_conjugate_symmetry(tree in tree_strategy()) {
        let f = expr::re(&tree.build());
        let dz = wirtinger(&f, &WirtingerIndex::new(vec![WirtingerOp::Z1]));
        let dzbar = wirtinger(&f, &WirtingerIndex::new(vec![WirtingerOp::Z1Bar]));
        let h12 = wirtinger(&dz, &WirtingerIndex::new(vec![WirtingerOp::Z2Bar]));
        let h21 = wirtinger(&f, &WirtingerIndex::new(vec![WirtingerOp::Z2, WirtingerOp::Z1Bar]));
        for q in test_points() {
            let mut ev = Evaluator::new(q);
            if let (Ok(a), Ok(b)) = (ev.eval(&dz), ev.eval(&dzbar)) {
                prop_assert!(close(a, b.conj(), 1e-12));
            }
            if let (Ok(a), Ok(b)) = (ev.eval(&h12), ev.eval(&h21)) {
                prop_assert!(close(a, b.conj(), 1e-12), "Hessian not Hermitian: {a} vs {b}");
            }
        }
    }

    /// The damping multiplier never drops when a weak sample is added and
    /// never grows when the slack widens.
    #[test]
    fn damping_multiplier_monotonicity(
        aps in proptest::collection::vec(-1.0..1.0f64, 1..8),
        extra in 1e-3..1.0f64,
        eps_lo in 1e-3..0.5f64,
        factor in 1.1..4.0f64,
    ) {
        let est = ConstantEstimates { c3: 0.5, c4: 1.0, a_max: 1.0 };
        let base = choose_c(eps_lo, &est, &aps).unwrap();
        let mut more = aps.clone();
        more.push(extra);
        let grown = choose_c(eps_lo, &est, &more).unwrap();
        prop_assert!(grown >= base - 1e-15);
        let eps_hi = eps_lo * factor;
        let looser = choose_c(eps_hi, &est, &aps).unwrap();
        prop_assert!(looser <= base + 1e-15);
    }
}

/// The eigenvalue margin is a sound quantifier elimination: for random
/// directions the scalar inequality margin is bounded below by the smallest
/// eigenvalue of the margin matrix.
#[test]
fn eigenvalue_margin_bounds_directional_margins() {
    use rand::{Rng, SeedableRng};
    let rho =
        parse("re(z2) + abs2(z2) + re(z2)*abs2(z1) + abs2(z1)*abs2(z2) + abs2(z1)^2 + abs2(z1)^3")
            .unwrap();
    let geom = DomainGeometry::new(rho.clone());
    let sigma = plurisub_core::transforms::sigma_from_geometry(&geom);
    let r = plurisub_core::transforms::modified_defining_with_sigma(
        &rho,
        &sigma,
        3.95,
        plurisub_core::Side::Interior,
    );
    let r1 = plurisub_core::transforms::quadratic_boost(&r, 1.0);
    let analyzer = FieldAnalyzer::new(&r1);
    let (epsilon, k) = (0.1, 1.0);
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(42);
    let mut scratch = Vec::new();
    let mut out = Vec::new();
    let mut tested = 0;
    while tested < 1000 {
        let q = ComplexPoint2::from_re_im(
            0.2 * (rng.gen::<f64>() - 0.5),
            0.2 * (rng.gen::<f64>() - 0.5),
            -0.15 * rng.gen::<f64>() - 1e-3,
            0.01 * (rng.gen::<f64>() - 0.5),
        );
        let Ok(data) = analyzer.at(q, &mut scratch, &mut out) else {
            continue;
        };
        if data.value >= 0.0 {
            continue;
        }
        tested += 1;
        let m = data
            .levi
            .shift(-epsilon * data.value)
            .add(&HermitianForm2::rank_one(&data.grad).scale(-k));
        let lmin = m.min_eigenvalue();
        let xi = ComplexVector2([
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
        ]);
        let lhs = data.levi.apply(&xi)
            - epsilon * data.value * xi.norm_sqr()
            - k * data.grad.pair(&xi).norm_sqr();
        assert!(
            lhs >= (lmin - 1e-9) * xi.norm_sqr(),
            "direction beats the eigenvalue bound at {q}: {lhs} < {lmin} * |xi|^2"
        );
    }
}

/// Derivative fields keep evaluating identically through the flat tape.
#[test]
fn program_agrees_with_evaluator_on_derived_fields() {
    let rho =
        parse("re(z2) + abs2(z2) + re(z2)*abs2(z1) + abs2(z1)*abs2(z2) + abs2(z1)^2").unwrap();
    let geom = DomainGeometry::new(rho);
    let fields = [
        geom.levi_ll_field(),
        geom.levi_nl_field(),
        geom.obstruction_field(),
    ];
    let program = expr::Program::compile(&[fields[0], fields[1], fields[2]]);
    for q in test_points() {
        let Ok(out) = program.eval_at(q) else {
            continue;
        };
        let mut ev = Evaluator::new(q);
        for (f, tape_value) in fields.iter().zip(out.iter()) {
            let direct = ev.eval(f).unwrap();
            assert_eq!(direct, *tape_value);
        }
    }
}
