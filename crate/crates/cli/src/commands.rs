use cameral_core::cameral::{genus_cameral, CameralChart, FiberSet, GenusReport};
use cameral_core::geomobs::{cubic, default_pairing, sk_metric_sl2, CubicValue, PairingSpec, QuadOptions, SkMetricValue};
use cameral_core::invariants::{
    discriminant_in_invariants, discriminant_matches_jacobian_square, invariant_set_with, steinberg_check,
    A1Convention,
};
use cameral_core::rootsys::{build_root_system, GroupName, IntMatrix};
use cameral_core::swdiff::{
    equivariance_check, holomorphy_probe, sw_derivative_at, sw_derivative_expr, EquivarianceReport, ProbeReport,
};
use cameral_core::verify::{run_all, CriterionReport, VerifyConfig};
use num_complex::Complex64 as C;
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;
use crate::input::{read_deformation, read_json, read_loop, ChartArgs};
use crate::output::{csv_err, fmt_f64, render, Format};

/// What a command hands back to `main`: the rendered text and exit code.
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, code: 0 }
    }
}

fn group(name: &str) -> Result<GroupName, CliError> {
    Ok(name.parse::<GroupName>()?)
}

#[derive(Serialize)]
struct RootsOut {
    group: GroupName,
    rank: usize,
    cartan: Vec<Vec<i64>>,
    positive_roots: Vec<Vec<i64>>,
    num_roots: usize,
    simple_reflections: Vec<IntMatrix>,
    weyl_order: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    weyl_elements: Option<Vec<IntMatrix>>,
}

pub fn roots(name: &str, elements: bool, format: Format) -> Result<Outcome, CliError> {
    let rs = build_root_system(group(name)?);
    let w = rs.weyl_group();
    let out = RootsOut {
        group: rs.name,
        rank: rs.rank,
        cartan: rs.cartan.clone(),
        positive_roots: rs.positive_roots.clone(),
        num_roots: rs.num_roots(),
        simple_reflections: rs.simple_reflections.clone(),
        weyl_order: w.order(),
        weyl_elements: elements.then(|| w.elements.clone()),
    };
    Ok(Outcome::ok(render(&out, format)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum IdentityCheck {
    /// `det DI = c * prod(positive roots)`.
    Steinberg,
    /// Discriminant in the invariants, back substitution and `(det DI)^2`.
    Discriminant,
    /// Exact W-invariance of the generators.
    Invariance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum A1Choice {
    /// `I = alpha^2`.
    Curve,
    /// `I = -alpha^2`.
    Determinant,
}

#[derive(Serialize, Default)]
struct Identities {
    #[serde(skip_serializing_if = "Option::is_none")]
    invariance: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    steinberg: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discriminant_back_substitution: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    jacobian_square: Option<bool>,
}

#[derive(Serialize)]
struct InvariantsOut {
    group: GroupName,
    degrees: Vec<u32>,
    generators: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discriminant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    identities: Option<Identities>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pass: Option<bool>,
}

pub fn invariants(name: &str, checks: &[IdentityCheck], a1: A1Choice, format: Format) -> Result<Outcome, CliError> {
    let convention = match a1 {
        A1Choice::Curve => A1Convention::CurveEquation,
        A1Choice::Determinant => A1Convention::Determinant,
    };
    let inv = invariant_set_with(group(name)?, convention);
    let names = ["a1", "a2", "a3"];
    let mut out = InvariantsOut {
        group: inv.name(),
        degrees: inv.degrees.clone(),
        generators: inv.gens.iter().map(|g| g.to_string_with(&names[..inv.rank()])).collect(),
        c: None,
        discriminant: None,
        identities: None,
        pass: None,
    };
    if checks.is_empty() {
        return Ok(Outcome::ok(render(&out, format)?));
    }
    let mut ids = Identities::default();
    if checks.contains(&IdentityCheck::Invariance) {
        ids.invariance = Some(inv.is_weyl_invariant());
    }
    let st = steinberg_check(&inv)?;
    if checks.contains(&IdentityCheck::Steinberg) {
        out.c = Some(serde_json::to_value(&st).expect("plain data")["constant"].clone());
        ids.steinberg = Some(st.holds);
    }
    if checks.contains(&IdentityCheck::Discriminant) {
        let disc = discriminant_in_invariants(&inv)?;
        out.discriminant = Some(disc.to_text());
        ids.discriminant_back_substitution = Some(disc.back_substitution_holds(&inv));
        ids.jacobian_square = Some(discriminant_matches_jacobian_square(&inv, &disc, &st));
    }
    let all = [ids.invariance, ids.steinberg, ids.discriminant_back_substitution, ids.jacobian_square];
    let pass = all.iter().flatten().all(|&b| b);
    out.identities = Some(ids);
    out.pass = Some(pass);
    Ok(Outcome {
        text: render(&out, format)?,
        code: if pass { 0 } else { 1 },
    })
}

#[derive(Serialize)]
struct FiberOut {
    #[serde(flatten)]
    fiber: FiberSet,
    residual: f64,
    closure_defect: f64,
    branch_points: Vec<C>,
}

pub fn fiber(chart: &ChartArgs, z: C, seed: Option<u64>, format: Format) -> Result<Outcome, CliError> {
    let ch = chart.load(seed)?;
    let fiber = ch.solve_fiber(z)?;
    let out = FiberOut {
        residual: ch.fiber_residual(&fiber),
        closure_defect: ch.weyl_closure_defect(&fiber),
        branch_points: ch.branch_points.clone(),
        fiber,
    };
    Ok(Outcome::ok(render(&out, format)?))
}

fn isolation(ch: &CameralChart, b: C) -> f64 {
    ch.branch_points
        .iter()
        .filter(|o| **o != b)
        .map(|o| (o - b).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Default base point: outside the disc holding every branch point.
fn default_base(ch: &CameralChart) -> C {
    let far = ch.branch_points.iter().map(|b| b.norm()).fold(0.0, f64::max);
    C::from_polar(far + 1.0, 0.3)
}

pub struct LoopChoice<'a> {
    pub path: Option<&'a str>,
    pub around: Option<usize>,
    pub radius: Option<f64>,
    pub base: Option<C>,
}

pub fn monodromy(chart: &ChartArgs, choice: LoopChoice<'_>, seed: Option<u64>, format: Format) -> Result<Outcome, CliError> {
    let ch = chart.load(seed)?;
    let (base, loop_pts) = match (choice.path, choice.around) {
        (Some(p), None) => {
            let pts = read_loop(p)?;
            (choice.base.unwrap_or(pts[0]), pts)
        }
        (None, Some(k)) => {
            let bp = *ch.branch_points.get(k).ok_or_else(|| {
                CliError::validation(format!("--around {k}: chart has {} branch points", ch.branch_points.len()))
            })?;
            let base = choice.base.unwrap_or_else(|| default_base(&ch));
            let r = choice
                .radius
                .unwrap_or_else(|| (0.3 * isolation(&ch, bp)).min(0.5 * (base - bp).norm()));
            (base, ch.lasso(base, bp, r, 64))
        }
        _ => return Err(CliError::validation("pass exactly one of --loop and --around")),
    };
    let fiber = ch.solve_fiber(base)?;
    let perm = ch.track_loop(&fiber, &loop_pts)?;
    Ok(Outcome::ok(render(&perm, format)?))
}

#[derive(Serialize)]
struct SheetValue {
    sheet: usize,
    point: Vec<C>,
    value: Vec<C>,
    det_jacobian: C,
}

#[derive(Serialize)]
struct SwOut {
    z: C,
    sheets: Vec<SheetValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    equivariance: Option<EquivarianceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probe: Option<Vec<ProbeReport>>,
}

pub struct SwRequest<'a> {
    pub gamma: &'a str,
    pub z: Option<C>,
    pub sheet: usize,
    pub all_sheets: bool,
    pub probe: bool,
    pub grid: Option<GridSpec>,
}

pub struct GridSpec {
    pub n: usize,
    pub center: C,
    pub half_width: Option<f64>,
}

pub fn sw_deriv(chart: &ChartArgs, req: SwRequest<'_>, seed: Option<u64>, format: Format) -> Result<Outcome, CliError> {
    let ch = chart.load(seed)?;
    let gamma = read_deformation(req.gamma, "gamma", ch.rank())?;
    let expr = sw_derivative_expr(&ch.inv, &gamma)?;
    if let Some(grid) = req.grid {
        return Ok(Outcome::ok(emit_grid(&ch, &expr, &grid)?));
    }
    let z = req
        .z
        .ok_or_else(|| CliError::validation("--z is required unless --emit-grid is given"))?;
    let fiber = ch.solve_fiber(z)?;
    let chosen: Vec<usize> = if req.all_sheets {
        (0..fiber.points.len()).collect()
    } else if req.sheet < fiber.points.len() {
        vec![req.sheet]
    } else {
        return Err(CliError::validation(format!(
            "--sheet {}: fiber has {} points",
            req.sheet,
            fiber.points.len()
        )));
    };
    let sheets = chosen
        .into_iter()
        .map(|k| {
            let p = &fiber.points[k];
            Ok(SheetValue {
                sheet: k,
                point: p.clone(),
                value: sw_derivative_at(&ch, &expr, z, p)?.coeffs,
                det_jacobian: ch.det_jacobian(p),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let equivariance = if req.all_sheets {
        Some(equivariance_check(&ch, &expr, &fiber)?)
    } else {
        None
    };
    let probe = if req.probe {
        Some(
            ch.branch_points
                .iter()
                .map(|&b| holomorphy_probe(&ch, &expr, b, None))
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };
    let out = SwOut {
        z,
        sheets,
        equivariance,
        probe,
    };
    Ok(Outcome::ok(render(&out, format)?))
}

/// CSV of the derivative on an `n x n` grid, one row per grid node and
/// sheet. Nodes too close to a branch point are left out.
fn emit_grid(ch: &CameralChart, expr: &cameral_core::swdiff::SWDerivativeExpr, grid: &GridSpec) -> Result<String, CliError> {
    if grid.n < 2 {
        return Err(CliError::validation("--emit-grid needs n >= 2"));
    }
    let half = grid.half_width.unwrap_or_else(|| {
        let reach = ch
            .branch_points
            .iter()
            .map(|b| (b - grid.center).norm())
            .fold(0.0, f64::max);
        (1.25 * reach).max(1.0)
    });
    let l = ch.rank();
    let mut header = vec!["re_z".to_string(), "im_z".to_string(), "sheet".to_string()];
    for i in 1..=l {
        header.push(format!("re_c{i}"));
        header.push(format!("im_c{i}"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(csv_err)?;
    let step = 2.0 * half / (grid.n - 1) as f64;
    for i in 0..grid.n {
        for j in 0..grid.n {
            let z = grid.center + C::new(-half + step * j as f64, -half + step * i as f64);
            let Ok(fiber) = ch.solve_fiber(z) else { continue };
            for (k, p) in fiber.points.iter().enumerate() {
                let Ok(v) = sw_derivative_at(ch, expr, z, p) else { continue };
                let mut row = vec![fmt_f64(z.re), fmt_f64(z.im), k.to_string()];
                for c in &v.coeffs {
                    row.push(fmt_f64(c.re));
                    row.push(fmt_f64(c.im));
                }
                w.write_record(&row).map_err(csv_err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}

pub struct CubicRequest<'a> {
    pub g1: &'a str,
    pub g2: &'a str,
    pub g3: &'a str,
    pub pairing: &'a str,
}

pub fn cubic_cmd(chart: &ChartArgs, req: CubicRequest<'_>, seed: Option<u64>, format: Format) -> Result<Outcome, CliError> {
    let ch = chart.load(seed)?;
    let l = ch.rank();
    let g1 = read_deformation(req.g1, "g1", l)?;
    let g2 = read_deformation(req.g2, "g2", l)?;
    let g3 = read_deformation(req.g3, "g3", l)?;
    let pairing = if req.pairing == "default" {
        default_pairing(&ch.inv)
    } else {
        let m: Vec<Vec<i64>> = read_json(req.pairing, "pairing")?;
        PairingSpec::custom(&ch.inv, m)?
    };
    let value: CubicValue = cubic(&ch, &g1, &g2, &g3, &pairing)?;
    Ok(Outcome::ok(render(&value, format)?))
}

pub fn sk_metric_cmd(
    chart: &ChartArgs,
    gamma: &str,
    radius: f64,
    opts: QuadOptions,
    seed: Option<u64>,
    format: Format,
) -> Result<Outcome, CliError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(CliError::validation(format!("--radius must be positive, got {radius}")));
    }
    let ch = chart.load(seed)?;
    let gamma = read_deformation(gamma, "gamma", ch.rank())?;
    let value: SkMetricValue = sk_metric_sl2(&ch, &gamma, radius, opts)?;
    Ok(Outcome::ok(render(&value, format)?))
}

pub fn genus(name: &str, gx: u32, format: Format) -> Result<Outcome, CliError> {
    let report: GenusReport = genus_cameral(gx, group(name)?)?;
    Ok(Outcome::ok(render(&report, format)?))
}

#[derive(Serialize)]
struct VerifyOut {
    seed: u64,
    criteria: Vec<CriterionReport>,
    passed: usize,
    total: usize,
    pass: bool,
}

pub fn verify_all(seed: Option<u64>, format: Format) -> Result<Outcome, CliError> {
    let mut cfg = VerifyConfig::default();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let criteria = run_all(&cfg);
    for c in &criteria {
        eprintln!("{}", c.summary_line());
    }
    let passed = criteria.iter().filter(|c| c.passed).count();
    let out = VerifyOut {
        seed: cfg.seed,
        total: criteria.len(),
        pass: passed == criteria.len(),
        passed,
        criteria,
    };
    Ok(Outcome {
        text: render(&out, format)?,
        code: if out.pass { 0 } else { 1 },
    })
}
