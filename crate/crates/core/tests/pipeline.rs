//! End-to-end runs through chart, fiber, derivative, probe and cubic.

use cameral_core::cameral::{certify_generic, CameralChart, ChartSpec, Deformation};
use cameral_core::geomobs::{cubic, default_pairing};
use cameral_core::polyalg::UniPolyC;
use cameral_core::rootsys::GroupName;
use cameral_core::swdiff::{
    equivariance_check, gm_oracle, holomorphy_probe, overdivided_control, ramification_points,
    sw_derivative_at, sw_derivative_expr,
};
use num_complex::Complex64 as C;

fn a2_chart() -> CameralChart {
    let spec: ChartSpec = serde_json::from_str(
        r#"{"group": "A2", "beta": [[[0.4, 0.1], [1.0, -0.3]], [[-0.2, 0.5], [0.6, 0.8]]]}"#,
    )
    .unwrap();
    CameralChart::from_spec(&spec).unwrap()
}

fn gamma(pairs: &[&[(f64, f64)]]) -> Deformation {
    Deformation::new(
        pairs
            .iter()
            .map(|p| UniPolyC::new(p.iter().map(|&(a, b)| C::new(a, b)).collect()))
            .collect(),
    )
}

#[test]
fn chart_spec_survives_json() {
    let ch = a2_chart();
    let text = serde_json::to_string(&ch.to_spec()).unwrap();
    let back: ChartSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, ch.to_spec());
}

#[test]
fn crafted_a2_chart_is_generic_and_every_probe_passes() {
    let ch = a2_chart();
    certify_generic(&ch).unwrap();
    assert_eq!(ch.branch_points.len(), 3);
    let g = gamma(&[&[(1.0, 0.0), (0.5, 0.5)], &[(0.0, 1.0)]]);
    let expr = sw_derivative_expr(&ch.inv, &g).unwrap();
    for &b in &ch.branch_points {
        assert_eq!(ramification_points(&ch, b).unwrap().len(), 3);
        let report = holomorphy_probe(&ch, &expr, b, None).unwrap();
        assert!(report.pass, "{report:?}");
        let control = overdivided_control(&ch.inv, &g).unwrap();
        assert!(!holomorphy_probe(&ch, &control, b, None).unwrap().pass);
    }
}

#[test]
fn derivative_against_finite_differences_on_every_sheet() {
    let ch = a2_chart();
    let g = gamma(&[&[(0.3, -0.2)], &[(1.0, 0.0), (0.0, 1.0)]]);
    let expr = sw_derivative_expr(&ch.inv, &g).unwrap();
    let z = C::new(2.5, 1.0);
    let fiber = ch.solve_fiber(z).unwrap();
    for p in &fiber.points {
        let v = sw_derivative_at(&ch, &expr, z, p).unwrap();
        let fd = gm_oracle(&ch, &g, z, p, 1e-5).unwrap();
        let diff: f64 = v.coeffs.iter().zip(&fd.coeffs).map(|(a, b)| (a + b).norm_sqr()).sum::<f64>().sqrt();
        assert!(diff <= 1e-6 * v.norm().max(1.0), "{diff:e}");
    }
    assert!(equivariance_check(&ch, &expr, &fiber).unwrap().max_defect <= 1e-9);
}

#[test]
fn cubic_is_symmetric_on_the_crafted_chart() {
    let ch = a2_chart();
    let gs = [
        gamma(&[&[(1.0, 0.0)], &[(0.0, 0.0)]]),
        gamma(&[&[(0.0, 0.0)], &[(1.0, 0.0), (0.2, 0.1)]]),
        gamma(&[&[(0.5, 0.5)], &[(-1.0, 0.3)]]),
    ];
    let pairing = default_pairing(&ch.inv);
    let base = cubic(&ch, &gs[0], &gs[1], &gs[2], &pairing).unwrap().value;
    assert!(base.norm() > 0.0);
    for [i, j, k] in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        let v = cubic(&ch, &gs[i], &gs[j], &gs[k], &pairing).unwrap().value;
        assert!((v - base).norm() <= 1e-5 * base.norm(), "{i}{j}{k}: {v} vs {base}");
    }
}

#[test]
fn group_names_accept_lie_algebra_aliases() {
    assert_eq!("sl2".parse::<GroupName>().unwrap(), GroupName::A1);
    assert_eq!("SL3".parse::<GroupName>().unwrap(), GroupName::A2);
}
