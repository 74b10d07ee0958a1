//! Acceptance harness. Each criterion runs a batch of checks against
//! independent references (closed forms, exact identities, oracles) and
//! reports pass/fail; the CLI and the integration tests share it.

use std::time::Instant;

use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cameral::{
    certify_generic, genus_cameral, norm, random_chart, CameralChart, Deformation, FiberSet,
};
use crate::geomobs::{cubic, default_pairing, sk_metric_sl2, QuadOptions};
use crate::invariants::{
    discriminant_in_invariants, discriminant_matches_jacobian_square, invariant_set,
    steinberg_check,
};
use crate::polyalg::{MultiPoly, PolyMatrix, UniPolyC};
use crate::rootsys::GroupName;
use crate::swdiff::{
    gm_oracle, gm_oracle_linear, holomorphy_probe, overdivided_control, sw_derivative_at,
    sw_derivative_expr, transposed_control,
};
use crate::tolerances::SW_SIGN;

type C = Complex64;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Informational checks do not decide the criterion.
    pub required: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub elapsed_s: f64,
    pub checks: Vec<Check>,
}

impl CriterionReport {
    /// One line: status, title, time, and the failing checks if any.
    pub fn summary_line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let failing: Vec<String> = self
            .checks
            .iter()
            .filter(|c| c.required && !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect();
        let tail = if failing.is_empty() {
            format!("{} checks", self.checks.iter().filter(|c| c.required).count())
        } else {
            failing.join("; ")
        };
        format!(
            "criterion {} [{}] {} ({:.2} s) {}",
            self.id, status, self.title, self.elapsed_s, tail
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 20_251_015 }
    }
}

struct Builder {
    id: u8,
    title: &'static str,
    start: Instant,
    checks: Vec<Check>,
}

impl Builder {
    fn new(id: u8, title: &'static str) -> Self {
        Builder {
            id,
            title,
            start: Instant::now(),
            checks: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            required: true,
            detail: detail.into(),
        });
    }

    fn info(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            required: false,
            detail: detail.into(),
        });
    }

    fn finish(self) -> CriterionReport {
        let passed = self.checks.iter().filter(|c| c.required).all(|c| c.passed);
        CriterionReport {
            id: self.id,
            title: self.title.to_string(),
            passed,
            elapsed_s: self.start.elapsed().as_secs_f64(),
            checks: self.checks,
        }
    }

    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Reference polynomial forms for the rank-two groups, in simple-root
/// coordinates `a1, a2`.
pub mod reference {
    pub const A2_DET: &str = "27*a1*a2*(a1 + a2)";
    pub const A2_MATRIX: [[&str; 2]; 2] = [
        ["3*a1^2 - 6*a1*a2 - 6*a2^2", "2*a2 + a1"],
        ["-6*a1^2 - 6*a1*a2 + 3*a2^2", "-2*a1 - a2"],
    ];
    pub const G2_DET: &str = "-2*a1*a2*(a1 + a2)*(2*a1 + a2)*(3*a1 + a2)*(3*a1 + 2*a2)";
    pub const G2_MATRIX: [[&str; 2]; 2] = [
        [
            "-2*a1^2*(6*a1^3 + 13*a1^2*a2 + 9*a1*a2^2 + 2*a2^3)",
            "3*a1 + 2*a2",
        ],
        [
            "2*a1*(12*a1^4 + 30*a1^3*a2 + 26*a1^2*a2^2 + 9*a1*a2^3 + a2^4)",
            "-6*a1 - 3*a2",
        ],
    ];
    /// `D = I2 (4 I1^3 - 27 I2)`.
    pub const G2_DISCRIMINANT: &str = "u2*(4*u1^3 - 27*u2)";
}

fn ab(text: &str) -> MultiPoly {
    MultiPoly::parse(text, &["a1", "a2"]).expect("reference form parses")
}

fn matrix_from(texts: &[[&str; 2]; 2]) -> PolyMatrix {
    PolyMatrix::new(texts.iter().map(|r| r.iter().map(|t| ab(t)).collect()).collect())
        .expect("square")
}

/// Exact symbolic identities.
pub fn symbolic_identities() -> CriterionReport {
    let mut b = Builder::new(1, "symbolic identities");
    for g in GroupName::ALL {
        let inv = invariant_set(g);
        b.check(format!("{g} invariance"), inv.is_weyl_invariant(), "I_k(w x) = I_k(x)");
        let det = inv.jac.det();
        let adj = inv.jac.adjugate();
        let id = PolyMatrix::scalar_identity(inv.rank(), inv.rank(), &det);
        b.check(
            format!("{g} adj*M"),
            adj.mul(&inv.jac) == id && inv.jac.mul(&adj) == id,
            "adj(DI) DI = DI adj(DI) = det(DI) Id",
        );
        match (steinberg_check(&inv), discriminant_in_invariants(&inv)) {
            (Ok(st), Ok(disc)) => {
                b.check(format!("{g} steinberg"), st.holds, format!("c = {}", st.constant));
                b.check(
                    format!("{g} discriminant"),
                    disc.back_substitution_holds(&inv)
                        && discriminant_matches_jacobian_square(&inv, &disc, &st),
                    format!("P = {}", disc.to_text()),
                );
                let expected: Option<i64> = match g {
                    GroupName::A1 => Some(2),
                    GroupName::A2 => Some(27),
                    GroupName::G2 => Some(-2),
                    GroupName::B2 => None,
                };
                if let Some(c) = expected {
                    b.check(
                        format!("{g} steinberg constant"),
                        st.constant == BigRational::from_integer(c.into()),
                        format!("expected {c}, got {}", st.constant),
                    );
                }
                if g == GroupName::G2 {
                    let p = MultiPoly::parse(reference::G2_DISCRIMINANT, &["u1", "u2"]).unwrap();
                    let via = p.substitute(&inv.gens).map(|q| q == disc.as_poly).unwrap_or(false);
                    b.check(
                        "G2 discriminant form",
                        disc.in_invariants == p && via,
                        format!("P = {}", disc.to_text()),
                    );
                }
            }
            (s, d) => b.check(format!("{g} steinberg/discriminant"), false, format!("{s:?} {d:?}")),
        }
    }
    for (g, det_text, mat) in [
        (GroupName::A2, reference::A2_DET, &reference::A2_MATRIX),
        (GroupName::G2, reference::G2_DET, &reference::G2_MATRIX),
    ] {
        let inv = invariant_set(g);
        b.check(format!("{g} det form"), inv.jac.det() == ab(det_text), det_text);
        let expr = sw_derivative_expr(&inv, &Deformation::zero(2)).expect("rank 2");
        b.check(
            format!("{g} derivative matrix"),
            expr.coefficient_matrix == matrix_from(mat) && expr.denominator() == &ab(det_text),
            "-adj(DI)/det(DI) equals the reference matrix",
        );
    }
    let t = b.elapsed();
    b.check("runtime", t <= 5.0, format!("{t:.2} s (limit 5 s)"));
    b.finish()
}

fn random_poly<R: Rng>(rng: &mut R, degree: usize) -> UniPolyC {
    UniPolyC::new(
        (0..=degree)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
}

fn random_deformation<R: Rng>(rng: &mut R, rank: usize, degree: usize) -> Deformation {
    Deformation::new((0..rank).map(|_| random_poly(rng, degree)).collect())
}

fn chart_degrees(g: GroupName) -> Vec<usize> {
    match g {
        GroupName::A1 => vec![3],
        _ => vec![1, 1],
    }
}

/// Point at distance at least `0.3 * min_separation` from every branch point,
/// chosen as the best of a few random candidates.
fn base_point<R: Rng>(chart: &CameralChart, rng: &mut R) -> C {
    let clearance = |z: C| {
        chart
            .branch_points
            .iter()
            .map(|b| (b - z).norm())
            .fold(f64::INFINITY, f64::min)
    };
    (0..32)
        .map(|_| C::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
        .max_by(|a, b| clearance(*a).total_cmp(&clearance(*b)))
        .expect("candidates")
}

fn isolation(chart: &CameralChart, b: C) -> f64 {
    chart
        .branch_points
        .iter()
        .filter(|o| (*o - b).norm() > 0.0)
        .map(|o| (o - b).norm())
        .fold(f64::INFINITY, f64::min)
}

fn is_free_involution(p: &[usize]) -> bool {
    p.iter().enumerate().all(|(i, &j)| j != i && p[j] == i)
}

/// Residual, closure and monodromy checks on random generic charts.
pub fn fiber_monodromy(cfg: &VerifyConfig, charts_per_group: usize) -> CriterionReport {
    let mut b = Builder::new(2, "fibers and monodromy");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 2);
    for g in GroupName::ALL {
        let mut worst_res: f64 = 0.0;
        let mut worst_closure: f64 = 0.0;
        let (mut loops, mut bad_loops, mut trivial_bad, mut compose_bad, mut errors) = (0, 0, 0, 0, 0);
        let mut first_error = String::new();
        for _ in 0..charts_per_group {
            let outcome = (|| -> Result<(), String> {
                let chart = random_chart(g, &chart_degrees(g), &mut rng).map_err(|e| e.to_string())?;
                let z0 = base_point(&chart, &mut rng);
                let fiber = chart.solve_fiber(z0).map_err(|e| e.to_string())?;
                worst_res = worst_res.max(chart.fiber_residual(&fiber));
                worst_closure = worst_closure.max(chart.weyl_closure_defect(&fiber));
                let mut perms = Vec::new();
                let mut lassos = Vec::new();
                for &bp in &chart.branch_points {
                    let r = (0.3 * isolation(&chart, bp)).min(0.5 * (z0 - bp).norm());
                    let lasso = chart.lasso(z0, bp, r, 48);
                    let perm = chart.track_loop(&fiber, &lasso).map_err(|e| e.to_string())?;
                    loops += 1;
                    if !is_free_involution(&perm) {
                        bad_loops += 1;
                    }
                    perms.push(perm);
                    lassos.push(lasso);
                }
                // A loop around a point with no branch point inside.
                let far = (0..16)
                    .map(|k| z0 + C::from_polar(0.6, k as f64))
                    .max_by(|a, c| {
                        let d = |z: C| chart.branch_points.iter().map(|bp| (bp - z).norm()).fold(f64::INFINITY, f64::min);
                        d(*a).total_cmp(&d(*c))
                    })
                    .unwrap();
                let clear = chart.branch_points.iter().map(|bp| (bp - far).norm()).fold(f64::INFINITY, f64::min);
                let trivial = chart.lasso(z0, far, 0.5 * clear.min((far - z0).norm()), 32);
                let id = chart.track_loop(&fiber, &trivial).map_err(|e| e.to_string())?;
                if id.iter().enumerate().any(|(i, &j)| i != j) {
                    trivial_bad += 1;
                }
                if lassos.len() >= 2 {
                    let mut composite = lassos[0].clone();
                    composite.extend_from_slice(&lassos[1][1..]);
                    let both = chart.track_loop(&fiber, &composite).map_err(|e| e.to_string())?;
                    let expected: Vec<usize> = perms[0].iter().map(|&j| perms[1][j]).collect();
                    if both != expected {
                        compose_bad += 1;
                    }
                }
                Ok(())
            })();
            if let Err(e) = outcome {
                errors += 1;
                if first_error.is_empty() {
                    first_error = e;
                }
            }
        }
        b.check(format!("{g} solver errors"), errors == 0, format!("{errors} failures {first_error}"));
        b.check(format!("{g} residual"), worst_res <= 1e-12, format!("max {worst_res:.2e} (limit 1e-12)"));
        b.check(format!("{g} closure"), worst_closure <= 1e-9, format!("max {worst_closure:.2e} (limit 1e-9)"));
        b.check(
            format!("{g} simple loops"),
            bad_loops == 0 && loops > 0,
            format!("{bad_loops} of {loops} not fixed-point-free involutions"),
        );
        b.check(format!("{g} contractible loops"), trivial_bad == 0, format!("{trivial_bad} non-identity"));
        b.check(format!("{g} composition"), compose_bad == 0, format!("{compose_bad} mismatches"));
    }
    let t = b.elapsed();
    b.check("runtime", t <= 60.0, format!("{t:.2} s (limit 60 s)"));
    b.finish()
}

fn rel(a: &[C], b: &[C]) -> f64 {
    let d: Vec<C> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b).max(f64::MIN_POSITIVE)
}

/// Engine against the linear-solve and finite-difference oracles.
pub fn oracle_agreement(cfg: &VerifyConfig, tuples_per_group: usize) -> CriterionReport {
    let mut b = Builder::new(3, "derivative vs oracle");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 3);
    let mut signs: Vec<f64> = Vec::new();
    let (mut worst_lin, mut worst_fd, mut worst_sl2): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut count = 0;
    let mut errors = 0;
    let mut first_error = String::new();
    for g in [GroupName::A1, GroupName::A2, GroupName::B2, GroupName::G2] {
        let per_chart = 10;
        for _ in 0..tuples_per_group.div_ceil(per_chart) {
            let outcome = (|| -> Result<(), String> {
                let chart = random_chart(g, &chart_degrees(g), &mut rng).map_err(|e| e.to_string())?;
                for _ in 0..per_chart {
                    let z = base_point(&chart, &mut rng);
                    let fiber: FiberSet = chart.solve_fiber(z).map_err(|e| e.to_string())?;
                    let alpha = &fiber.points[rng.gen_range(0..fiber.points.len())];
                    let gamma = random_deformation(&mut rng, chart.rank(), 2);
                    let expr = sw_derivative_expr(&chart.inv, &gamma).map_err(|e| e.to_string())?;
                    let v = sw_derivative_at(&chart, &expr, z, alpha).map_err(|e| e.to_string())?.coeffs;
                    let lin = gm_oracle_linear(&chart, &gamma, z, alpha).map_err(|e| e.to_string())?.coeffs;
                    let fd = gm_oracle(&chart, &gamma, z, alpha, 1e-5).map_err(|e| e.to_string())?.coeffs;
                    let dot: C = v.iter().zip(&lin).map(|(x, y)| x * y.conj()).sum();
                    signs.push(dot.re.signum());
                    let s = SW_SIGN;
                    let scaled = |u: &[C]| -> Vec<C> { u.iter().map(|x| x * s).collect() };
                    worst_lin = worst_lin.max(rel(&v, &scaled(&lin)));
                    worst_fd = worst_fd.max(rel(&v, &scaled(&fd)));
                    if g == GroupName::A1 {
                        let closed = [gamma.gamma[0].eval(z) / (2.0 * alpha[0])];
                        worst_sl2 = worst_sl2.max(rel(&v, &scaled(&closed)));
                    }
                    count += 1;
                }
                Ok(())
            })();
            if let Err(e) = outcome {
                errors += 1;
                if first_error.is_empty() {
                    first_error = e;
                }
            }
        }
    }
    let uniform = signs.iter().all(|&s| s == SW_SIGN);
    b.check("tuples", count >= 200 && errors == 0, format!("{count} tuples, {errors} failures {first_error}"));
    b.check("global sign", uniform, format!("sigma = {SW_SIGN} on every tuple: {uniform}"));
    b.check("linear-solve oracle", worst_lin <= 1e-10, format!("max rel {worst_lin:.2e} (limit 1e-10)"));
    b.check("finite-difference oracle", worst_fd <= 1e-6, format!("max rel {worst_fd:.2e} (limit 1e-6)"));
    b.check("rank-one closed form", worst_sl2 <= 1e-12, format!("max rel {worst_sl2:.2e} (limit 1e-12)"));
    b.finish()
}

/// Boundedness of the section near ramification, and the negative controls.
pub fn holomorphy(cfg: &VerifyConfig, charts_per_group: usize) -> CriterionReport {
    let mut b = Builder::new(4, "holomorphy at ramification");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 4);
    let degrees = |g: GroupName| if g == GroupName::A1 { vec![2] } else { vec![1, 1] };
    let mut transposed_total = 0;
    let mut transposed_flagged = 0;
    let mut transposed_ratio: f64 = 0.0;
    let mut over_total = 0;
    let mut over_flagged = 0;
    for g in GroupName::ALL {
        let (mut probes, mut failed, mut errors) = (0, 0, 0);
        let mut first_error = String::new();
        let mut worst_ratio: f64 = 0.0;
        for _ in 0..charts_per_group {
            let outcome = (|| -> Result<(), String> {
                let chart = random_chart(g, &degrees(g), &mut rng).map_err(|e| e.to_string())?;
                certify_generic(&chart).map_err(|e| e.to_string())?;
                let gamma = random_deformation(&mut rng, chart.rank(), 1);
                let expr = sw_derivative_expr(&chart.inv, &gamma).map_err(|e| e.to_string())?;
                for &bp in &chart.branch_points {
                    let rep = holomorphy_probe(&chart, &expr, bp, None).map_err(|e| e.to_string())?;
                    probes += 1;
                    if !rep.pass {
                        failed += 1;
                    }
                    for l in &rep.ramification {
                        for w in l.max_modulus.windows(2) {
                            worst_ratio = worst_ratio.max(w[1] / w[0]);
                        }
                    }
                }
                if matches!(g, GroupName::A2 | GroupName::G2) {
                    let bp = chart.branch_points[0];
                    let ctl = transposed_control(&chart.inv, &gamma).map_err(|e| e.to_string())?;
                    let rep = holomorphy_probe(&chart, &ctl, bp, None).map_err(|e| e.to_string())?;
                    transposed_total += 1;
                    if !rep.pass {
                        transposed_flagged += 1;
                    }
                    for l in &rep.ramification {
                        for w in l.max_modulus.windows(2) {
                            transposed_ratio = transposed_ratio.max(w[1] / w[0]);
                        }
                    }
                    let over = overdivided_control(&chart.inv, &gamma).map_err(|e| e.to_string())?;
                    over_total += 1;
                    if !holomorphy_probe(&chart, &over, bp, None).map_err(|e| e.to_string())?.pass {
                        over_flagged += 1;
                    }
                }
                Ok(())
            })();
            if let Err(e) = outcome {
                errors += 1;
                if first_error.is_empty() {
                    first_error = e;
                }
            }
        }
        b.check(
            format!("{g} probes"),
            failed == 0 && errors == 0 && probes > 0,
            format!("{failed} of {probes} failed, {errors} errors {first_error}; worst ratio {worst_ratio:.4}"),
        );
    }
    b.check(
        "transposed-adjugate control fails",
        transposed_flagged > 0,
        format!(
            "flagged on {transposed_flagged} of {transposed_total} charts; worst ratio {transposed_ratio:.4} (the control stays bounded)"
        ),
    );
    b.info(
        "extra 1/det control fails",
        over_flagged == over_total && over_total > 0,
        format!("flagged on {over_flagged} of {over_total} charts"),
    );
    b.finish()
}

/// Riemann-Hurwitz counts for the rank-one and G2 cases.
pub fn genus_arithmetic() -> CriterionReport {
    let mut b = Builder::new(5, "genus arithmetic");
    for g in 2..=10u32 {
        let a1 = genus_cameral(g, GroupName::A1).map(|r| r.genus);
        let g2 = genus_cameral(g, GroupName::G2).map(|r| r.genus);
        let want_a1 = 4 * g as u64 - 3;
        let want_g2 = 84 * (g as u64 - 1) + 1;
        b.check(format!("A1 g={g}"), a1 == Ok(want_a1), format!("{a1:?} vs {want_a1}"));
        b.check(format!("G2 g={g}"), g2 == Ok(want_g2), format!("{g2:?} vs {want_g2}"));
    }
    b.finish()
}

/// Points with pairwise distance at least `sep` in the square `[-1,1]^2`.
fn separated_points<R: Rng>(rng: &mut R, n: usize, sep: f64) -> Vec<C> {
    let mut pts: Vec<C> = Vec::new();
    while pts.len() < n {
        let p = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if pts.iter().all(|q| (p - q).norm() >= sep) {
            pts.push(p);
        }
    }
    pts
}

/// Residue cubic: rank-one closed form, symmetry and trilinearity.
pub fn cubic_properties(cfg: &VerifyConfig) -> CriterionReport {
    let mut b = Builder::new(6, "cubic");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 6);
    let mut worst: f64 = 0.0;
    let mut errors = Vec::new();
    for _ in 0..10 {
        let roots = separated_points(&mut rng, 3, 0.4);
        let lead = C::new(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5));
        let beta = UniPolyC::from_roots(lead, &roots);
        let gs: Vec<Deformation> = (0..3).map(|_| random_deformation(&mut rng, 1, 2)).collect();
        // 1/2 sum_j g1 g2 g3 (z_j) / beta'(z_j)^2 with beta' from the factored form.
        let oracle: C = roots
            .iter()
            .enumerate()
            .map(|(j, &zj)| {
                let dbeta: C = roots
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .fold(lead, |acc, (_, &zk)| acc * (zj - zk));
                gs.iter().map(|g| g.gamma[0].eval(zj)).product::<C>() / (dbeta * dbeta)
            })
            .sum::<C>()
            * 0.5;
        match CameralChart::for_group(GroupName::A1, vec![beta])
            .map_err(|e| e.to_string())
            .and_then(|ch| {
                cubic(&ch, &gs[0], &gs[1], &gs[2], &default_pairing(&ch.inv)).map_err(|e| e.to_string())
            }) {
            Ok(v) => worst = worst.max((v.value - oracle).norm() / oracle.norm()),
            Err(e) => errors.push(e),
        }
    }
    b.check(
        "rank-one closed form",
        errors.is_empty() && worst <= 1e-6,
        format!("max rel {worst:.2e} (limit 1e-6) over 10 charts; errors {errors:?}"),
    );

    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut worst_sym: f64 = 0.0;
    let mut worst_lin: f64 = 0.0;
    let mut errors = Vec::new();
    for _ in 0..3 {
        let outcome = (|| -> Result<(), String> {
            let ch = random_chart(GroupName::A2, &[1, 1], &mut rng).map_err(|e| e.to_string())?;
            let pairing = default_pairing(&ch.inv);
            let gs: Vec<Deformation> = (0..4).map(|_| random_deformation(&mut rng, 2, 1)).collect();
            let cub = |a: &Deformation, b2: &Deformation, c: &Deformation| {
                cubic(&ch, a, b2, c, &pairing).map(|v| v.value).map_err(|e| e.to_string())
            };
            let base = cub(&gs[0], &gs[1], &gs[2])?;
            for p in &perms {
                let v = cub(&gs[p[0]], &gs[p[1]], &gs[p[2]])?;
                worst_sym = worst_sym.max((v - base).norm() / base.norm());
            }
            let (x, y) = (C::new(0.7, -0.3), C::new(-1.2, 0.4));
            let mix = gs[0].combine(x, &gs[3], y);
            for slot in 0..3 {
                let mut args = [gs[0].clone(), gs[1].clone(), gs[2].clone()];
                let mut alt = args.clone();
                args[slot] = mix.clone();
                alt[slot] = gs[3].clone();
                let mut first = [gs[0].clone(), gs[1].clone(), gs[2].clone()];
                first[slot] = gs[0].clone();
                let lhs = cub(&args[0], &args[1], &args[2])?;
                let c1 = cub(&first[0], &first[1], &first[2])?;
                let c2 = cub(&alt[0], &alt[1], &alt[2])?;
                let rhs = x * c1 + y * c2;
                let scale = (x * c1).norm() + (y * c2).norm();
                worst_lin = worst_lin.max((lhs - rhs).norm() / scale);
            }
            Ok(())
        })();
        if let Err(e) = outcome {
            errors.push(e);
        }
    }
    b.check(
        "permutation symmetry",
        errors.is_empty() && worst_sym <= 1e-5,
        format!("max rel {worst_sym:.2e} (limit 1e-5) on 3 A2 charts; errors {errors:?}"),
    );
    b.check(
        "trilinearity",
        errors.is_empty() && worst_lin <= 1e-10,
        format!("max rel {worst_lin:.2e} (limit 1e-10)"),
    );
    b.finish()
}

/// Rank-one special Kahler metric: reference integral, positivity, scaling.
pub fn sk_metric(cfg: &VerifyConfig) -> CriterionReport {
    let mut b = Builder::new(7, "special Kahler metric");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 7);
    let two_pi = 2.0 * std::f64::consts::PI;
    let opts = QuadOptions::default();
    let unit = CameralChart::for_group(GroupName::A1, vec![UniPolyC::from_real(&[0.0, 1.0])]);
    match unit.as_ref().map_err(|e| e.to_string()).and_then(|ch| {
        sk_metric_sl2(ch, &Deformation::new(vec![UniPolyC::from_real(&[1.0])]), 1.0, opts)
            .map_err(|e| e.to_string())
    }) {
        Ok(v) => {
            let r = (v.value - two_pi).abs() / two_pi;
            b.check("reference integral", r <= 1e-4, format!("{:.12} vs 2 pi, rel {r:.2e} (limit 1e-4)", v.value));
        }
        Err(e) => b.check("reference integral", false, e),
    }
    let mut min_value = f64::INFINITY;
    let mut worst_scale: f64 = 0.0;
    let mut errors = Vec::new();
    for _ in 0..5 {
        let outcome = (|| -> Result<(), String> {
            let ch = random_chart(GroupName::A1, &[2], &mut rng).map_err(|e| e.to_string())?;
            let g = random_deformation(&mut rng, 1, 1);
            let v = sk_metric_sl2(&ch, &g, 1.0, opts).map_err(|e| e.to_string())?.value;
            min_value = min_value.min(v);
            let c = C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let scaled = Deformation::new(vec![g.gamma[0].scale(c)]);
            let vs = sk_metric_sl2(&ch, &scaled, 1.0, opts).map_err(|e| e.to_string())?.value;
            let want = c.norm_sqr() * v;
            worst_scale = worst_scale.max((vs - want).abs() / want);
            Ok(())
        })();
        if let Err(e) = outcome {
            errors.push(e);
        }
    }
    b.check("positivity", errors.is_empty() && min_value > 0.0, format!("min {min_value:.4e}; errors {errors:?}"));
    b.check("scaling", errors.is_empty() && worst_scale <= 1e-10, format!("max rel {worst_scale:.2e} (limit 1e-10)"));
    b.finish()
}

/// Every criterion at full size.
pub fn run_all(cfg: &VerifyConfig) -> Vec<CriterionReport> {
    vec![
        symbolic_identities(),
        fiber_monodromy(cfg, 20),
        oracle_agreement(cfg, 60),
        holomorphy(cfg, 10),
        genus_arithmetic(),
        cubic_properties(cfg),
        sk_metric(cfg),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_forms_parse() {
        for row in reference::A2_MATRIX.iter().chain(&reference::G2_MATRIX) {
            for t in row {
                assert!(!ab(t).is_zero());
            }
        }
        assert_eq!(ab(reference::A2_DET).total_degree(), Some(3));
        assert_eq!(ab(reference::G2_DET).total_degree(), Some(6));
    }

    #[test]
    fn summary_line_names_failures() {
        let mut b = Builder::new(9, "demo");
        b.check("ok", true, "fine");
        b.check("bad", false, "broken");
        b.info("note", false, "ignored");
        let r = b.finish();
        assert!(!r.passed);
        let line = r.summary_line();
        assert!(line.starts_with("criterion 9 [FAIL] demo"));
        assert!(line.contains("bad: broken") && !line.contains("note"));
    }

    #[test]
    fn free_involution_detection() {
        assert!(is_free_involution(&[1, 0, 3, 2]));
        assert!(!is_free_involution(&[0, 1]));
        assert!(!is_free_involution(&[1, 2, 0]));
    }
}
