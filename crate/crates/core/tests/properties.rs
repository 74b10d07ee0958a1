use cameral_core::cameral::{random_chart, CameralChart, Deformation};
use cameral_core::geomobs::{cubic, default_pairing, res2_trapezoid, sk_metric_sl2, QuadOptions};
use cameral_core::invariants::invariant_set;
use cameral_core::polyalg::{rat, MultiPoly, UniPolyC};
use cameral_core::rootsys::{weyl_orbit, GroupName};
use cameral_core::swdiff::{gm_oracle_linear, sw_derivative_at, sw_derivative_expr};
use num_complex::Complex64 as C;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn group() -> impl Strategy<Value = GroupName> {
    prop_oneof![
        Just(GroupName::A1),
        Just(GroupName::A2),
        Just(GroupName::B2),
        Just(GroupName::G2),
    ]
}

fn degrees(g: GroupName) -> Vec<usize> {
    match g {
        GroupName::A1 => vec![3],
        _ => vec![1, 1],
    }
}

fn complex() -> impl Strategy<Value = C> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C::new(a, b))
}

fn deformation(rank: usize) -> impl Strategy<Value = Deformation> {
    prop::collection::vec(prop::collection::vec(complex(), 1..=3), rank)
        .prop_map(|g| Deformation::new(g.into_iter().map(UniPolyC::new).collect()))
}

fn chart(g: GroupName, seed: u64) -> CameralChart {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_chart(g, &degrees(g), &mut rng).expect("generic chart")
}

/// A point outside the disc containing every branch point.
fn base_point(chart: &CameralChart, t: f64) -> C {
    let far = chart.branch_points.iter().map(|b| b.norm()).fold(0.0, f64::max);
    C::from_polar(far + 1.0, t)
}

fn rel(a: &[C], b: &[C]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let s: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    d / s.max(1.0)
}

proptest! {
    #[test]
    fn generators_are_weyl_invariant_at_integer_points(
        g in group(),
        x in prop::collection::vec(-20i64..20, 2),
    ) {
        let inv = invariant_set(g);
        let x = &x[..inv.rank()];
        let q = |v: &[i64]| v.iter().map(|&n| rat(n)).collect::<Vec<BigRational>>();
        for w in &inv.weyl.elements {
            let y = w.apply_int(x);
            for gen in &inv.gens {
                prop_assert_eq!(
                    gen.evaluate_rational(&q(&y)).unwrap(),
                    gen.evaluate_rational(&q(x)).unwrap()
                );
            }
        }
    }

    #[test]
    fn generators_are_homogeneous(
        g in group(),
        x in prop::collection::vec(-9i64..9, 2),
        t in -5i64..5,
    ) {
        let inv = invariant_set(g);
        let x: Vec<BigRational> = x[..inv.rank()].iter().map(|&n| rat(n)).collect();
        let tx: Vec<BigRational> = x.iter().map(|v| v * rat(t)).collect();
        for (gen, &d) in inv.gens.iter().zip(&inv.degrees) {
            let mut td = BigRational::one();
            for _ in 0..d {
                td *= rat(t);
            }
            prop_assert_eq!(
                gen.evaluate_rational(&tx).unwrap(),
                td * gen.evaluate_rational(&x).unwrap()
            );
        }
    }

    #[test]
    fn orbit_sizes_divide_group_order(
        g in group(),
        x in prop::collection::vec(-3i64..3, 2),
    ) {
        let inv = invariant_set(g);
        let p: Vec<C> = x[..inv.rank()].iter().map(|&n| C::new(n as f64, 0.0)).collect();
        let n = weyl_orbit(&inv.weyl, &p).len();
        prop_assert_eq!(inv.weyl.order() % n, 0);
    }

    #[test]
    fn substitution_commutes_with_evaluation(
        a in prop::collection::vec(-4i64..4, 4),
        x in prop::collection::vec(-6i64..6, 2),
    ) {
        let p = MultiPoly::parse("a^3 - 2*a*b + b^2 + 5", &["a", "b"]).unwrap();
        let images = [
            MultiPoly::linear_form(&[a[0], a[1]]),
            MultiPoly::linear_form(&[a[2], a[3]]),
        ];
        let x: Vec<BigRational> = x.iter().map(|&n| rat(n)).collect();
        let sx: Vec<BigRational> = images
            .iter()
            .map(|m| m.evaluate_rational(&x).unwrap())
            .collect();
        prop_assert_eq!(
            p.substitute(&images).unwrap().evaluate_rational(&x).unwrap(),
            p.evaluate_rational(&sx).unwrap()
        );
    }

    #[test]
    fn trapezoid_residue_is_linear(
        a in complex(),
        b in complex(),
        p in prop::collection::vec(complex(), 5),
        q in prop::collection::vec(complex(), 5),
    ) {
        let laurent = |c: &[C], w: C| c.iter().enumerate().map(|(k, ck)| ck * w.powi(k as i32 - 3)).sum::<C>();
        let r = 1e-2;
        let lhs = res2_trapezoid(|w| a * laurent(&p, w) + b * laurent(&q, w), r, 128);
        let rhs = a * res2_trapezoid(|w| laurent(&p, w), r, 128) + b * res2_trapezoid(|w| laurent(&q, w), r, 128);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        // The w^-2 coefficient is p[1] (index k = 1).
        prop_assert!((res2_trapezoid(|w| laurent(&p, w), r, 128) - p[1]).norm() <= 1e-9);
    }

    #[test]
    fn default_pairing_is_invariant(g in group()) {
        let inv = invariant_set(g);
        prop_assert!(default_pairing(&inv).is_invariant(&inv));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solved_fibers_are_closed_weyl_orbits(g in group(), seed in any::<u64>(), t in 0.0..std::f64::consts::TAU) {
        let ch = chart(g, seed);
        let fiber = ch.solve_fiber(base_point(&ch, t)).unwrap();
        prop_assert_eq!(fiber.points.len(), ch.weyl_order());
        prop_assert!(ch.weyl_closure_defect(&fiber) <= 1e-9);
        let scale = ch.beta_at(fiber.z).iter().map(|b| b.norm()).fold(1.0, f64::max);
        prop_assert!(ch.fiber_residual(&fiber) <= 1e-12 * scale);
    }

    #[test]
    fn derivative_is_linear_in_gamma(
        g in group(),
        seed in any::<u64>(),
        a in complex(),
        b in complex(),
        g1 in deformation(2),
        g2 in deformation(2),
    ) {
        let ch = chart(g, seed);
        let l = ch.rank();
        let g1 = Deformation::new(g1.gamma[..l].to_vec());
        let g2 = Deformation::new(g2.gamma[..l].to_vec());
        let mix = g1.combine(a, &g2, b);
        let fiber = ch.solve_fiber(base_point(&ch, 0.5)).unwrap();
        let e1 = sw_derivative_expr(&ch.inv, &g1).unwrap();
        let e2 = sw_derivative_expr(&ch.inv, &g2).unwrap();
        let em = sw_derivative_expr(&ch.inv, &mix).unwrap();
        for p in &fiber.points {
            let v1 = sw_derivative_at(&ch, &e1, fiber.z, p).unwrap().coeffs;
            let v2 = sw_derivative_at(&ch, &e2, fiber.z, p).unwrap().coeffs;
            let vm = sw_derivative_at(&ch, &em, fiber.z, p).unwrap().coeffs;
            let combo: Vec<C> = v1.iter().zip(&v2).map(|(x, y)| a * x + b * y).collect();
            prop_assert!(rel(&vm, &combo) <= 1e-12);
        }
    }

    #[test]
    fn derivative_is_minus_the_linear_oracle(g in group(), seed in any::<u64>(), gamma in deformation(2)) {
        let ch = chart(g, seed);
        let gamma = Deformation::new(gamma.gamma[..ch.rank()].to_vec());
        let expr = sw_derivative_expr(&ch.inv, &gamma).unwrap();
        let fiber = ch.solve_fiber(base_point(&ch, 2.0)).unwrap();
        for p in &fiber.points {
            let v = sw_derivative_at(&ch, &expr, fiber.z, p).unwrap().coeffs;
            let o: Vec<C> = gm_oracle_linear(&ch, &gamma, fiber.z, p).unwrap().coeffs.iter().map(|c| -c).collect();
            prop_assert!(rel(&v, &o) <= 1e-10);
        }
    }

    #[test]
    fn sk_metric_is_quadratic(seed in any::<u64>(), c in complex(), gamma in deformation(1)) {
        let ch = chart(GroupName::A1, seed);
        let opts = QuadOptions { tol: 1e-6, ..QuadOptions::default() };
        let scaled = Deformation::new(vec![gamma.gamma[0].scale(c)]);
        let base = sk_metric_sl2(&ch, &gamma, 1.0, opts).unwrap().value;
        let s = sk_metric_sl2(&ch, &scaled, 1.0, opts).unwrap().value;
        prop_assert!(base >= 0.0);
        prop_assert!((s - c.norm_sqr() * base).abs() <= 1e-5 * (1.0 + s.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn cubic_terms_agree_within_a_cluster(seed in any::<u64>(), gs in prop::collection::vec(deformation(2), 3)) {
        let ch = chart(GroupName::A2, seed);
        let pairing = default_pairing(&ch.inv);
        let value = cubic(&ch, &gs[0], &gs[1], &gs[2], &pairing).unwrap();
        for b in &ch.branch_points {
            let terms: Vec<C> = value
                .per_ramification_terms
                .iter()
                .filter(|t| t.branch == *b)
                .map(|t| t.contribution)
                .collect();
            prop_assert_eq!(terms.len(), ch.weyl_order() / 2);
            let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max).max(1e-300);
            for t in &terms {
                prop_assert!((t - terms[0]).norm() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn composite_loop_matches_composed_lassos(seed in any::<u64>()) {
        // Linear beta gives three branch points for A2, whose monodromy
        // group is non-abelian.
        let ch = chart(GroupName::A2, seed);
        prop_assert_eq!(ch.branch_points.len(), 3);
        let base = base_point(&ch, 0.3);
        let fiber = ch.solve_fiber(base).unwrap();
        let r = 0.3 * ch.min_separation;
        let mut composite = Vec::new();
        let mut composed: Vec<usize> = (0..fiber.points.len()).collect();
        for b in &ch.branch_points {
            let lasso = ch.lasso(base, *b, r, 64);
            let p = ch.track_loop(&fiber, &lasso).unwrap();
            composed = composed.iter().map(|&i| p[i]).collect();
            composite.extend(lasso);
        }
        prop_assert_eq!(ch.track_loop(&fiber, &composite).unwrap(), composed);
    }
}

#[test]
fn zero_deformation_has_zero_metric() {
    let ch = chart(GroupName::A1, 7);
    let v = sk_metric_sl2(&ch, &Deformation::zero(1), 1.0, QuadOptions::default()).unwrap();
    assert!(v.value.is_zero());
}
