//! Cameral covers on one affine chart of the base curve.
//!
//! A chart is the vector `beta(z)` of complex polynomials; the cover over it
//! is `{ (z, alpha) : I(alpha) = beta(z) }`. Fibers are found by homotopy
//! continuation seeded with an exact Weyl orbit: for random `alpha0` the
//! fiber over `c0 = I(alpha0)` is `W . alpha0`, and each orbit point is
//! carried along the segment from `c0` to `beta(z)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::invariants::{
    discriminant_in_invariants, invariant_set, Discriminant, InvariantError, InvariantSet,
};
use crate::polyalg::{CompiledMatrix, CompiledPoly, UniPolyC};
use crate::rootsys::{weyl_orbit, GroupName, RootSystemError};
use crate::tolerances::{
    DELTA_DISC, NEWTON_MAX_ITERS, R_MIN_FACTOR, STEP_FLOOR, STEP_INITIAL, TAU_NEWTON, TAU_ORBIT,
    TAU_SIMPLE,
};

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CameralError {
    #[error("expected {expected} chart polynomials, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("chart is not generic: {0}")]
    NotGeneric(String),
    #[error("point z = {z} lies within r_min = {r_min:e} of a branch point")]
    TooCloseToBranch { z: C, r_min: f64 },
    #[error("path came within the discriminant guard (|det DI| = {0:e})")]
    NearDiscriminant(f64),
    #[error("continuation step underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("Newton corrector did not reach the residual bound (residual {0:e})")]
    NewtonDivergence(f64),
    #[error("fiber solving failed after {0} restarts")]
    RetriesExhausted(usize),
    #[error("sheets collided while tracking a loop")]
    SheetCollision,
    #[error("genus of the base curve must be at least 2, got {0}")]
    InvalidGenus(u32),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    RootSystem(#[from] RootSystemError),
    #[error("root finder failed: {0}")]
    RootFinder(String),
}

/// Chart data on the wire: `beta[k]` is a list of `[re, im]` coefficients,
/// lowest degree first.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ChartSpec {
    pub group: String,
    pub beta: Vec<Vec<[f64; 2]>>,
}

/// Deformation on the wire, same coefficient layout as [`ChartSpec`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DeformationSpec {
    pub gamma: Vec<Vec<[f64; 2]>>,
}

pub fn poly_from_pairs(coeffs: &[[f64; 2]]) -> UniPolyC {
    UniPolyC::new(coeffs.iter().map(|&[re, im]| C::new(re, im)).collect())
}

pub fn poly_to_pairs(p: &UniPolyC) -> Vec<[f64; 2]> {
    p.coeffs().iter().map(|c| [c.re, c.im]).collect()
}

/// Tangent direction `g` in chart form: `gamma_k(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Deformation {
    pub gamma: Vec<UniPolyC>,
}

impl Deformation {
    pub fn new(gamma: Vec<UniPolyC>) -> Self {
        Deformation { gamma }
    }

    pub fn zero(rank: usize) -> Self {
        Deformation {
            gamma: vec![UniPolyC::zero(); rank],
        }
    }

    pub fn from_spec(spec: &DeformationSpec) -> Self {
        Deformation::new(spec.gamma.iter().map(|g| poly_from_pairs(g)).collect())
    }

    pub fn to_spec(&self) -> DeformationSpec {
        DeformationSpec {
            gamma: self.gamma.iter().map(poly_to_pairs).collect(),
        }
    }

    pub fn eval(&self, z: C) -> Vec<C> {
        self.gamma.iter().map(|g| g.eval(z)).collect()
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: C, other: &Deformation, b: C) -> Deformation {
        Deformation::new(
            self.gamma
                .iter()
                .zip(&other.gamma)
                .map(|(p, q)| &p.scale(a) + &q.scale(b))
                .collect(),
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub seed: u64,
    pub max_retries: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            seed: 0x5eed_ca3e,
            max_retries: 8,
        }
    }
}

/// Floating-point form of the adjoint quotient `I` and its Jacobian.
#[derive(Clone, Debug)]
pub struct NumericSystem {
    gens: Vec<CompiledPoly>,
    jac: CompiledMatrix,
}

impl NumericSystem {
    pub fn new(inv: &InvariantSet) -> Self {
        NumericSystem {
            gens: inv.gens.iter().map(|g| g.compile()).collect(),
            jac: inv.jac.compile(),
        }
    }

    pub fn eval(&self, x: &[C]) -> Vec<C> {
        self.gens.iter().map(|g| g.eval(x)).collect()
    }

    pub fn eval_abs(&self, x: &[C]) -> f64 {
        self.gens.iter().map(|g| g.eval_abs(x)).fold(0.0, f64::max)
    }

    pub fn jacobian(&self, x: &[C]) -> DMatrix<C> {
        self.jac.eval(x)
    }
}

pub(crate) fn solve_linear(m: DMatrix<C>, rhs: &[C]) -> Option<Vec<C>> {
    let b = DVector::from_column_slice(rhs);
    let sol = m.lu().solve(&b)?;
    sol.iter().all(|v| v.is_finite()).then(|| sol.iter().copied().collect())
}

pub(crate) fn norm(v: &[C]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn diff(a: &[C], b: &[C]) -> Vec<C> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Affine chart of a cameral cover.
#[derive(Clone, Debug)]
pub struct CameralChart {
    pub inv: Arc<InvariantSet>,
    pub disc: Arc<Discriminant>,
    pub beta: Vec<UniPolyC>,
    pub beta_prime: Vec<UniPolyC>,
    /// `P(beta(z))`, the discriminant pulled back to the chart.
    pub disc_on_chart: UniPolyC,
    pub branch_points: Vec<C>,
    /// Smallest pairwise branch-point distance (1 when fewer than two).
    pub min_separation: f64,
    pub options: SolveOptions,
    system: NumericSystem,
}

impl CameralChart {
    /// Builds a chart without locating branch points.
    pub fn unchecked(inv: Arc<InvariantSet>, beta: Vec<UniPolyC>) -> Result<Self, CameralError> {
        if beta.len() != inv.rank() {
            return Err(CameralError::ArityMismatch {
                expected: inv.rank(),
                found: beta.len(),
            });
        }
        let disc = Arc::new(discriminant_in_invariants(&inv)?);
        let disc_on_chart = disc
            .in_invariants
            .compose_univariate(&beta)
            .expect("arity checked");
        let beta_prime = beta.iter().map(UniPolyC::derivative).collect();
        let system = NumericSystem::new(&inv);
        Ok(CameralChart {
            inv,
            disc,
            beta,
            beta_prime,
            disc_on_chart,
            branch_points: Vec::new(),
            min_separation: 1.0,
            options: SolveOptions::default(),
            system,
        })
    }

    /// Builds a chart and rejects it unless every branch point is simple.
    pub fn new(inv: Arc<InvariantSet>, beta: Vec<UniPolyC>) -> Result<Self, CameralError> {
        let mut chart = Self::unchecked(inv, beta)?;
        chart.branch_points = branch_points(&chart)?;
        chart.min_separation = separation(&chart.branch_points);
        Ok(chart)
    }

    pub fn for_group(group: GroupName, beta: Vec<UniPolyC>) -> Result<Self, CameralError> {
        Self::new(Arc::new(invariant_set(group)), beta)
    }

    pub fn from_spec(spec: &ChartSpec) -> Result<Self, CameralError> {
        let group: GroupName = spec.group.parse()?;
        Self::for_group(group, spec.beta.iter().map(|b| poly_from_pairs(b)).collect())
    }

    pub fn to_spec(&self) -> ChartSpec {
        ChartSpec {
            group: self.inv.name().to_string(),
            beta: self.beta.iter().map(poly_to_pairs).collect(),
        }
    }

    pub fn with_options(mut self, options: SolveOptions) -> Self {
        self.options = options;
        self
    }

    pub fn rank(&self) -> usize {
        self.inv.rank()
    }

    pub fn weyl_order(&self) -> usize {
        self.inv.weyl.order()
    }

    pub fn system(&self) -> &NumericSystem {
        &self.system
    }

    pub fn r_min(&self) -> f64 {
        R_MIN_FACTOR * self.min_separation
    }

    pub fn beta_at(&self, z: C) -> Vec<C> {
        self.beta.iter().map(|b| b.eval(z)).collect()
    }

    pub fn beta_prime_at(&self, z: C) -> Vec<C> {
        self.beta_prime.iter().map(|b| b.eval(z)).collect()
    }

    pub fn det_jacobian(&self, x: &[C]) -> C {
        self.system.jacobian(x).determinant()
    }

    pub fn min_root_value(&self, x: &[C]) -> f64 {
        self.inv
            .group
            .positive_root_values(x)
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Residual bound for a Newton-polished point over target `c`.
    fn residual_bound(&self, c: &[C]) -> f64 {
        TAU_NEWTON * c.iter().map(|v| v.norm()).fold(1.0, f64::max)
    }

    /// Newton iteration on `I(x) = target` until the residual bound holds.
    pub fn newton_polish(&self, x: &[C], target: &[C]) -> Result<Vec<C>, CameralError> {
        let bound = self.residual_bound(target);
        let mut x = x.to_vec();
        let mut res = norm(&diff(&self.system.eval(&x), target));
        for _ in 0..30 {
            if res <= bound {
                return Ok(x);
            }
            let f = diff(&self.system.eval(&x), target);
            let dx = solve_linear(self.system.jacobian(&x), &f)
                .ok_or(CameralError::NewtonDivergence(res))?;
            let next: Vec<C> = diff(&x, &dx);
            let next_res = norm(&diff(&self.system.eval(&next), target));
            if !next_res.is_finite() {
                return Err(CameralError::NewtonDivergence(res));
            }
            x = next;
            res = next_res;
        }
        if res <= bound {
            Ok(x)
        } else {
            Err(CameralError::NewtonDivergence(res))
        }
    }

    /// Predictor-corrector continuation of one point along `I(x) = c(t)`,
    /// `t` from 0 to 1. `path(t)` returns `(c(t), c'(t))`.
    pub fn track<F>(&self, start: &[C], path: F) -> Result<Vec<C>, CameralError>
    where
        F: Fn(f64) -> (Vec<C>, Vec<C>),
    {
        let mut x = start.to_vec();
        let mut t = 0.0;
        let mut h = STEP_INITIAL;
        let mut streak = 0;
        while t < 1.0 {
            let det = self.det_jacobian(&x).norm();
            if det < DELTA_DISC {
                return Err(CameralError::NearDiscriminant(det));
            }
            let (_, dc) = path(t);
            let velocity = solve_linear(self.system.jacobian(&x), &dc)
                .ok_or(CameralError::NearDiscriminant(det))?;
            let speed = norm(&velocity);
            // Sheets w.x closest to x sit at distance ~ |root(x)|.
            let scale = self.min_root_value(&x).max(1e-300);
            let cap = if speed > 0.0 { 0.1 * scale / speed } else { f64::INFINITY };
            let step = h.min(cap).min(1.0 - t);
            if step < STEP_FLOOR {
                return Err(CameralError::StepUnderflow(t));
            }
            let t_next = if 1.0 - t - step < 1e-15 { 1.0 } else { t + step };
            let predicted: Vec<C> = x
                .iter()
                .zip(&velocity)
                .map(|(a, v)| a + v * (t_next - t))
                .collect();
            let (target, _) = path(t_next);
            match self.corrector(&predicted, &target, 0.25 * scale) {
                Some(next) => {
                    x = next;
                    t = t_next;
                    streak += 1;
                    if streak >= 3 {
                        h = (h * 2.0).min(0.2);
                        streak = 0;
                    }
                }
                None => {
                    h = step * 0.5;
                    streak = 0;
                    if h < STEP_FLOOR {
                        return Err(CameralError::StepUnderflow(t));
                    }
                }
            }
        }
        let (target, _) = path(1.0);
        self.newton_polish(&x, &target)
    }

    /// Newton corrector with a displacement cap that rules out path jumping.
    fn corrector(&self, x0: &[C], target: &[C], max_move: f64) -> Option<Vec<C>> {
        let mut x = x0.to_vec();
        for _ in 0..NEWTON_MAX_ITERS {
            let f = diff(&self.system.eval(&x), target);
            let dx = solve_linear(self.system.jacobian(&x), &f)?;
            x = diff(&x, &dx);
            if norm(&diff(&x, x0)) > max_move {
                return None;
            }
            if norm(&dx) <= 1e-11 * (1.0 + norm(&x)) {
                return Some(x);
            }
        }
        None
    }

    fn check_clear_of_branches(&self, z: C) -> Result<(), CameralError> {
        let r_min = self.r_min();
        if self.branch_points.iter().any(|b| (b - z).norm() < r_min) {
            return Err(CameralError::TooCloseToBranch { z, r_min });
        }
        Ok(())
    }

    /// All `|W|` solutions of `I(alpha) = beta(z)`.
    pub fn solve_fiber(&self, z: C) -> Result<FiberSet, CameralError> {
        self.check_clear_of_branches(z)?;
        self.solve_fiber_unchecked(z)
    }

    pub fn solve_fiber_unchecked(&self, z: C) -> Result<FiberSet, CameralError> {
        let target = self.beta_at(z);
        let order = self.weyl_order();
        let l = self.rank();
        // Typical size of a fiber point: |beta_k|^(1/d_k).
        let scale = target
            .iter()
            .zip(&self.inv.degrees)
            .map(|(b, &d)| b.norm().powf(1.0 / d as f64))
            .fold(0.0, f64::max)
            .max(0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(self.options.seed ^ z.re.to_bits().rotate_left(17) ^ z.im.to_bits());
        for _ in 0..=self.options.max_retries {
            let alpha0: Vec<C> = (0..l)
                .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale)
                .collect();
            let orbit = weyl_orbit(&self.inv.weyl, &alpha0);
            if orbit.len() != order {
                continue;
            }
            let c0 = self.system.eval(&alpha0);
            let dc: Vec<C> = diff(&target, &c0);
            let path = |t: f64| -> (Vec<C>, Vec<C>) {
                (
                    c0.iter().zip(&dc).map(|(a, d)| a + d * t).collect(),
                    dc.clone(),
                )
            };
            let tracked: Result<Vec<Vec<C>>, CameralError> =
                orbit.par_iter().map(|p| self.track(p, path)).collect();
            let Ok(points) = tracked else { continue };
            if let Some(fiber) = self.assemble_fiber(z, points) {
                return Ok(fiber);
            }
        }
        Err(CameralError::RetriesExhausted(self.options.max_retries))
    }

    /// Sorts sheets and rejects coincident endpoints.
    fn assemble_fiber(&self, z: C, mut points: Vec<Vec<C>>) -> Option<FiberSet> {
        points.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let scale = points.iter().map(|p| norm(p)).fold(0.0, f64::max).max(1e-300);
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if norm(&diff(&points[i], &points[j])) <= 1e-8 * scale {
                    return None;
                }
            }
        }
        let min_root_value = points
            .iter()
            .map(|p| self.min_root_value(p))
            .fold(f64::INFINITY, f64::min);
        let sheet_labels = (0..points.len()).collect();
        Some(FiberSet {
            z,
            points,
            sheet_labels,
            min_root_value,
        })
    }

    /// Worst residual `|I(alpha) - beta(z)|` over a fiber.
    pub fn fiber_residual(&self, fiber: &FiberSet) -> f64 {
        let target = self.beta_at(fiber.z);
        fiber
            .points
            .iter()
            .map(|p| norm(&diff(&self.system.eval(p), &target)))
            .fold(0.0, f64::max)
    }

    /// Largest distance from `w . alpha` to the nearest fiber point.
    pub fn weyl_closure_defect(&self, fiber: &FiberSet) -> f64 {
        let mut worst: f64 = 0.0;
        for w in &self.inv.weyl.elements {
            for p in &fiber.points {
                let img = w.apply(p);
                let best = fiber
                    .points
                    .iter()
                    .map(|q| norm(&diff(&img, q)))
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max(best);
            }
        }
        worst
    }

    /// Sheet permutation obtained by continuing every sheet of `base`
    /// around the closed polyline `loop_pts` (closed automatically).
    /// `perm[i] = j` means sheet `i` returns as sheet `j`.
    pub fn track_loop(&self, base: &FiberSet, loop_pts: &[C]) -> Result<Vec<usize>, CameralError> {
        let mut pts = loop_pts.to_vec();
        if pts.first().is_none_or(|p| (p - base.z).norm() > 1e-14 * (1.0 + base.z.norm())) {
            pts.insert(0, base.z);
        }
        if pts.last().is_none_or(|p| (p - base.z).norm() > 1e-14 * (1.0 + base.z.norm())) {
            pts.push(base.z);
        }
        let r_min = self.r_min();
        for seg in pts.windows(2) {
            for b in &self.branch_points {
                if segment_distance(*b, seg[0], seg[1]) < r_min {
                    return Err(CameralError::TooCloseToBranch { z: *b, r_min });
                }
            }
        }
        let ends: Result<Vec<Vec<C>>, CameralError> = base
            .points
            .par_iter()
            .map(|start| {
                let mut x = start.clone();
                for seg in pts.windows(2) {
                    let (a, b) = (seg[0], seg[1]);
                    if (b - a).norm() == 0.0 {
                        continue;
                    }
                    let path = |t: f64| {
                        let z = a + (b - a) * t;
                        let c = self.beta_at(z);
                        let dc = self.beta_prime_at(z).iter().map(|v| v * (b - a)).collect();
                        (c, dc)
                    };
                    x = self.track(&x, path)?;
                }
                Ok(x)
            })
            .collect();
        let ends = ends?;
        let tol = TAU_ORBIT.max(1e-12 * base.points.iter().map(|p| norm(p)).fold(0.0, f64::max));
        let mut perm = Vec::with_capacity(ends.len());
        for e in &ends {
            let j = base
                .points
                .iter()
                .position(|q| norm(&diff(e, q)) <= tol)
                .ok_or(CameralError::SheetCollision)?;
            perm.push(j);
        }
        let mut seen = perm.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != perm.len() {
            return Err(CameralError::SheetCollision);
        }
        Ok(perm)
    }

    /// Lasso from the base point around a single branch point: out along a
    /// straight line, once counter-clockwise around a circle, back.
    pub fn lasso(&self, base: C, center: C, radius: f64, nodes: usize) -> Vec<C> {
        let dir = (base - center) / (base - center).norm();
        let start_angle = dir.arg();
        let mut pts = vec![base];
        pts.extend((0..=nodes).map(|k| {
            let th = start_angle + 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
            center + C::from_polar(radius, th)
        }));
        pts.push(base);
        pts
    }
}

fn segment_distance(p: C, a: C, b: C) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn separation(points: &[C]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.min((points[i] - points[j]).norm());
        }
    }
    if best.is_finite() {
        best
    } else {
        1.0
    }
}

/// The `|W|` points over one `z`, indexed by sheet label.
#[derive(Clone, Debug, Serialize)]
pub struct FiberSet {
    pub z: C,
    pub points: Vec<Vec<C>>,
    pub sheet_labels: Vec<usize>,
    /// Minimum of `|root(point)|` over points and positive roots.
    pub min_root_value: f64,
}

/// Zeros of `P(beta(z))`, each required to be simple.
pub fn branch_points(chart: &CameralChart) -> Result<Vec<C>, CameralError> {
    let p = &chart.disc_on_chart;
    if p.is_zero() {
        return Err(InvariantError::DegenerateChart.into());
    }
    let roots = p
        .roots()
        .map_err(|e| CameralError::RootFinder(e.to_string()))?;
    let dp = p.derivative();
    for (i, r) in roots.iter().enumerate() {
        // Scale of |p'(r)| made of absolute term sizes.
        let scale: f64 = p
            .coeffs()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.norm() * k as f64 * r.norm().powi(k as i32 - 1))
            .sum();
        if dp.eval(*r).norm() <= TAU_SIMPLE * scale.max(f64::MIN_POSITIVE) {
            return Err(CameralError::NotGeneric(format!(
                "branch point {r} is not a simple zero of the discriminant"
            )));
        }
        for s in &roots[i + 1..] {
            if (r - s).norm() <= 1e-6 * (1.0 + r.norm()) {
                return Err(CameralError::NotGeneric(format!(
                    "branch points {r} and {s} coincide (multiple zero)"
                )));
            }
        }
    }
    Ok(roots)
}

#[derive(Clone, Debug, Serialize)]
pub struct GenusReport {
    pub genus: u64,
    pub branch_points: u64,
    pub ramification_points: u64,
}

/// Riemann-Hurwitz for a cameral cover with simple ramification.
pub fn genus_cameral(g_x: u32, group: GroupName) -> Result<GenusReport, CameralError> {
    if g_x < 2 {
        return Err(CameralError::InvalidGenus(g_x));
    }
    let rs = crate::rootsys::build_root_system(group);
    let order = rs.weyl_group().order() as u64;
    let roots = rs.num_roots() as u64;
    let g = g_x as u64;
    let branch = roots * (2 * g - 2);
    let ram = branch * order / 2;
    Ok(GenusReport {
        genus: order * (g - 1) + 1 + roots * (g - 1) * order / 2,
        branch_points: branch,
        ramification_points: ram,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GenericityReport {
    pub branch_points: Vec<C>,
    pub min_separation: f64,
    pub r_min: f64,
    /// Fiber points examined next to branch points.
    pub samples: usize,
    /// Worst ratio smallest/second-smallest root value at those samples.
    pub worst_root_ratio: f64,
    /// Worst `sigma_min / sigma_max` of `(-beta' | DI)` at those samples.
    pub worst_rank_ratio: f64,
}

/// Threshold on smallest/second-smallest root value near a branch point.
const RAMIFICATION_RATIO: f64 = 0.25;
/// Relative singular value below which `(-beta' | DI)` counts as rank deficient.
const RANK_RATIO: f64 = 1e-8;

/// Genericity certificate: simple well-separated branch points, exactly
/// one vanishing root per sheet near each branch point, and full rank of
/// `(-beta' | DI)` there.
pub fn certify_generic(chart: &CameralChart) -> Result<GenericityReport, CameralError> {
    let bps = branch_points(chart)?;
    let min_separation = separation(&bps);
    let r_min = R_MIN_FACTOR * min_separation;
    if bps.len() > 1 && min_separation < 2.0 * r_min.max(1e-9) {
        return Err(CameralError::NotGeneric("branch points too close".into()));
    }
    let mut probe = chart.clone();
    probe.branch_points = bps.clone();
    probe.min_separation = min_separation;

    let mut samples = 0;
    let mut worst_root_ratio: f64 = 0.0;
    let mut worst_rank_ratio = f64::INFINITY;
    for b in &bps {
        let rho = 4.0 * r_min;
        let z = b + C::new(rho, 0.0);
        let fiber = probe.solve_fiber_unchecked(z)?;
        let bp = chart.beta_prime_at(z);
        for p in &fiber.points {
            let mut vals: Vec<f64> = chart
                .inv
                .group
                .positive_root_values(p)
                .iter()
                .map(|v| v.norm())
                .collect();
            vals.sort_by(f64::total_cmp);
            let ratio = if vals.len() > 1 { vals[0] / vals[1] } else { 0.0 };
            if vals.len() > 1 && ratio > RAMIFICATION_RATIO {
                return Err(CameralError::NotGeneric(format!(
                    "no single vanishing root near branch point {b} (ratio {ratio:.3})"
                )));
            }
            worst_root_ratio = worst_root_ratio.max(ratio);
            let jac = chart.system.jacobian(p);
            let l = chart.rank();
            let aug = DMatrix::from_fn(l, l + 1, |i, j| if j == 0 { -bp[i] } else { jac[(i, j - 1)] });
            let sv = aug.singular_values();
            let (smin, smax) = sv.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &s| (a.min(s), b.max(s)));
            let rr = smin / smax;
            if rr < RANK_RATIO {
                return Err(CameralError::NotGeneric(format!(
                    "(-beta' | DI) drops rank near branch point {b}"
                )));
            }
            worst_rank_ratio = worst_rank_ratio.min(rr);
            samples += 1;
        }
    }
    Ok(GenericityReport {
        branch_points: bps,
        min_separation,
        r_min,
        samples,
        worst_root_ratio,
        worst_rank_ratio,
    })
}

/// Random chart with `beta_k` of the given degrees and coefficients drawn
/// uniformly from the unit square, retried until it is generic.
pub fn random_chart<R: Rng>(
    group: GroupName,
    degrees: &[usize],
    rng: &mut R,
) -> Result<CameralChart, CameralError> {
    let inv = Arc::new(invariant_set(group));
    for _ in 0..64 {
        let beta: Vec<UniPolyC> = degrees
            .iter()
            .map(|&d| {
                UniPolyC::new(
                    (0..=d)
                        .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect(),
                )
            })
            .collect();
        if let Ok(chart) = CameralChart::new(inv.clone(), beta) {
            if chart.branch_points.len() == chart.disc_on_chart.degree().unwrap_or(0)
                && chart.min_separation > 0.05
            {
                return Ok(chart);
            }
        }
    }
    Err(CameralError::NotGeneric("could not draw a generic chart".into()))
}
