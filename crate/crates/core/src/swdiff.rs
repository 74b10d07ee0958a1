//! Gauss-Manin derivative of the Seiberg-Witten differential.
//!
//! On a chart the derivative along `gamma` at a cover point `(z, alpha)` is
//! the t-valued one-form `-adj(DI) gamma(z) / det(DI) dz`. This module builds
//! that expression exactly, evaluates it, compares it against an
//! implicit-differentiation oracle, and probes it near ramification.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::cameral::{diff, norm, solve_linear, CameralChart, CameralError, Deformation, FiberSet};
use crate::invariants::InvariantSet;
use crate::polyalg::{MixedPoly, MultiPoly, PolyMatrix, RationalSectionExpr};
use crate::tolerances::{
    DELTA_DISC, FD_EPS_MAX, FD_EPS_MIN, PROBE_GROWTH, RESIDUE_MAX_RADIUS, TAU_MINOR, TAU_NEWTON,
};

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwError {
    #[error("expected {expected} deformation components, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("|det DI| = {0:e} is within the ramification guard; use the holomorphy probe")]
    NearRamification(f64),
    #[error("finite-difference step {0:e} outside the accepted range")]
    StepOutOfRange(f64),
    #[error("Newton did not re-converge on the perturbed fiber")]
    OracleDiverged,
    #[error("no local coordinate alpha_k with |det M_k| above threshold at {0}")]
    NoLocalCoordinate(C),
    #[error("ramification point refinement failed near branch point {0}")]
    RamificationNotFound(C),
    #[error("contour point did not converge at |w| = {0:e}")]
    ContourDiverged(f64),
    #[error(transparent)]
    Cameral(#[from] CameralError),
}

/// Coefficients `c_i` of `sum c_i e_i (x) dz` at one cover point.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CotangentValue {
    pub coeffs: Vec<C>,
}

impl CotangentValue {
    pub fn norm(&self) -> f64 {
        norm(&self.coeffs)
    }
}

/// `-adj(DI) gamma(z) / det(DI)`, kept exact.
#[derive(Clone, Debug)]
pub struct SWDerivativeExpr {
    /// `-adj(DI)`.
    pub coefficient_matrix: PolyMatrix,
    pub section: RationalSectionExpr,
}

impl SWDerivativeExpr {
    /// Section built from an arbitrary numerator matrix over `det DI`.
    pub fn with_matrix(
        inv: &InvariantSet,
        matrix: PolyMatrix,
        gamma: &Deformation,
    ) -> Result<Self, SwError> {
        let l = inv.rank();
        if gamma.gamma.len() != l {
            return Err(SwError::ArityMismatch {
                expected: l,
                found: gamma.gamma.len(),
            });
        }
        let numerators = (0..l)
            .map(|i| {
                (0..l).fold(MixedPoly::zero(l), |acc, j| {
                    &acc + &MixedPoly::from_product(matrix.get(i, j), &gamma.gamma[j])
                })
            })
            .collect();
        Ok(SWDerivativeExpr {
            coefficient_matrix: matrix,
            section: RationalSectionExpr::new(numerators, inv.jac.det()),
        })
    }

    pub fn denominator(&self) -> &MultiPoly {
        &self.section.denominator
    }

    pub fn eval(&self, alpha: &[C], z: C) -> Vec<C> {
        self.section.eval(alpha, z)
    }
}

pub fn sw_derivative_expr(inv: &InvariantSet, gamma: &Deformation) -> Result<SWDerivativeExpr, SwError> {
    SWDerivativeExpr::with_matrix(inv, inv.jac.adjugate().neg(), gamma)
}

/// Engine value at a cover point away from ramification.
pub fn sw_derivative_at(
    chart: &CameralChart,
    expr: &SWDerivativeExpr,
    z: C,
    alpha: &[C],
) -> Result<CotangentValue, SwError> {
    let det = chart.det_jacobian(alpha).norm();
    if det <= DELTA_DISC {
        return Err(SwError::NearRamification(det));
    }
    Ok(CotangentValue {
        coeffs: expr.eval(alpha, z),
    })
}

/// Oracle: solves `DI(alpha) delta = gamma(z)`.
pub fn gm_oracle_linear(
    chart: &CameralChart,
    gamma: &Deformation,
    z: C,
    alpha: &[C],
) -> Result<CotangentValue, SwError> {
    let det = chart.det_jacobian(alpha).norm();
    if det <= DELTA_DISC {
        return Err(SwError::NearRamification(det));
    }
    let g = gamma.eval(z);
    let coeffs = solve_linear(chart.system().jacobian(alpha), &g).ok_or(SwError::NearRamification(det))?;
    Ok(CotangentValue { coeffs })
}

/// Oracle: central difference of the fiber point under `beta -> beta +- eps gamma`.
/// `eps` is relative: the actual step is `eps * max(1, |beta(z)|) / |gamma(z)|`.
pub fn gm_oracle(
    chart: &CameralChart,
    gamma: &Deformation,
    z: C,
    alpha: &[C],
    eps: f64,
) -> Result<CotangentValue, SwError> {
    if !(FD_EPS_MIN..=FD_EPS_MAX).contains(&eps) {
        return Err(SwError::StepOutOfRange(eps));
    }
    let l = chart.rank();
    let g = gamma.eval(z);
    let gn = norm(&g);
    if gn == 0.0 {
        return Ok(CotangentValue {
            coeffs: vec![C::new(0.0, 0.0); l],
        });
    }
    let beta = chart.beta_at(z);
    let h = eps * norm(&beta).max(1.0) / gn;
    let shifted = |s: f64| -> Result<Vec<C>, SwError> {
        let target: Vec<C> = beta.iter().zip(&g).map(|(b, gi)| b + gi * (s * h)).collect();
        let x = chart
            .newton_polish(alpha, &target)
            .map_err(|_| SwError::OracleDiverged)?;
        // Guard against converging onto a neighbouring sheet.
        if norm(&diff(&x, alpha)) > 0.25 * chart.min_root_value(alpha) {
            return Err(SwError::OracleDiverged);
        }
        Ok(x)
    };
    let plus = shifted(1.0)?;
    let minus = shifted(-1.0)?;
    Ok(CotangentValue {
        coeffs: plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceReport {
    /// `max |v(w.alpha) - w v(alpha)| / max(1, |v(alpha)|)` over W and sheets.
    pub max_defect: f64,
    pub pairs_checked: usize,
}

/// Checks `v(w.alpha) = w . v(alpha)` with `w.alpha` matched to the fiber.
pub fn equivariance_check(
    chart: &CameralChart,
    expr: &SWDerivativeExpr,
    fiber: &FiberSet,
) -> Result<EquivarianceReport, SwError> {
    let values: Vec<Vec<C>> = fiber
        .points
        .iter()
        .map(|p| sw_derivative_at(chart, expr, fiber.z, p).map(|v| v.coeffs))
        .collect::<Result<_, _>>()?;
    let mut max_defect: f64 = 0.0;
    let mut pairs = 0;
    for w in &chart.inv.weyl.elements {
        for (p, v) in fiber.points.iter().zip(&values) {
            let img = w.apply(p);
            let (j, _) = fiber
                .points
                .iter()
                .enumerate()
                .map(|(j, q)| (j, norm(&diff(&img, q))))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty fiber");
            let moved = w.apply(v);
            let d = norm(&diff(&values[j], &moved)) / norm(v).max(1.0);
            max_defect = max_defect.max(d);
            pairs += 1;
        }
    }
    Ok(EquivarianceReport {
        max_defect,
        pairs_checked: pairs,
    })
}

/// A ramification point with its local curve coordinate `w = alpha_k - alpha_k(m)`.
#[derive(Clone, Debug, Serialize)]
pub struct RamificationPoint {
    pub branch: C,
    pub z: C,
    pub point: Vec<C>,
    /// Positive root vanishing at the point.
    pub root: Vec<i64>,
    /// Index of the coordinate used as the local parameter.
    pub k: usize,
    pub det_mk: f64,
}

/// `(-beta'(z) | DI(alpha))` as an `l x (l+1)` matrix.
fn augmented(chart: &CameralChart, z: C, alpha: &[C]) -> DMatrix<C> {
    let l = chart.rank();
    let bp = chart.beta_prime_at(z);
    let jac = chart.system().jacobian(alpha);
    DMatrix::from_fn(l, l + 1, |i, j| if j == 0 { -bp[i] } else { jac[(i, j - 1)] })
}

/// `M_k`: the augmented matrix with the column of `alpha_k` removed.
fn minor_k(aug: &DMatrix<C>, k: usize) -> DMatrix<C> {
    aug.clone().remove_column(k + 1)
}

/// Size of the rounding error when evaluating `I` at `alpha`.
fn rounding_floor(chart: &CameralChart, alpha: &[C]) -> f64 {
    64.0 * f64::EPSILON * chart.system().eval_abs(alpha)
}

fn refine_on_wall(
    chart: &CameralChart,
    root: &[i64],
    z0: C,
    alpha0: &[C],
) -> Option<(C, Vec<C>)> {
    let l = chart.rank();
    let j = root.iter().position(|&r| r != 0)?;
    let rj = root[j] as f64;
    let complete = |free: &[C]| -> Vec<C> {
        let mut a = vec![C::new(0.0, 0.0); l];
        let mut it = free.iter();
        for (i, slot) in a.iter_mut().enumerate() {
            if i != j {
                *slot = *it.next().unwrap();
            }
        }
        let s: C = (0..l).filter(|&i| i != j).map(|i| a[i] * root[i] as f64).sum();
        a[j] = -s / rj;
        a
    };
    let mut z = z0;
    let mut free: Vec<C> = (0..l).filter(|&i| i != j).map(|i| alpha0[i]).collect();
    let mut extra = 2;
    for _ in 0..60 {
        let a = complete(&free);
        let f = diff(&chart.system().eval(&a), &chart.beta_at(z));
        if norm(&f) <= rounding_floor(chart, &a) {
            if extra == 0 {
                return Some((z, a));
            }
            extra -= 1;
        }
        let aug = augmented(chart, z, &a);
        // Columns: z, then alpha_i for i != j with alpha_j eliminated.
        let jac = DMatrix::from_fn(l, l, |r, c| {
            if c == 0 {
                aug[(r, 0)]
            } else {
                let i = (0..l).filter(|&i| i != j).nth(c - 1).unwrap();
                aug[(r, i + 1)] - aug[(r, j + 1)] * (root[i] as f64 / rj)
            }
        });
        let step = solve_linear(jac, &f)?;
        z -= step[0];
        for (x, s) in free.iter_mut().zip(&step[1..]) {
            *x -= s;
        }
        if norm(&step) <= 1e-14 * (1.0 + z.norm() + norm(&free)) {
            let a = complete(&free);
            return Some((z, a));
        }
    }
    None
}

/// The `|W|/2` ramification points over the branch point nearest `branch`.
pub fn ramification_points(chart: &CameralChart, branch: C) -> Result<Vec<RamificationPoint>, SwError> {
    let zb = nearest_branch(chart, branch);
    let rho = 4.0 * chart.r_min();
    let fiber = chart.solve_fiber_unchecked(zb + C::new(rho, 0.0))?;
    let roots = &chart.inv.group.positive_roots;
    let mut found: Vec<RamificationPoint> = Vec::new();
    for p in &fiber.points {
        let vals = chart.inv.group.positive_root_values(p);
        let (ri, _) = vals
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("at least one root");
        let root = &roots[ri];
        let s = chart
            .inv
            .weyl
            .root_reflection(root)
            .ok_or(SwError::RamificationNotFound(zb))?;
        let partner = s.apply(p);
        let mid: Vec<C> = p.iter().zip(&partner).map(|(a, b)| (a + b) * 0.5).collect();
        let (z, point) = refine_on_wall(chart, root, zb, &mid).ok_or(SwError::RamificationNotFound(zb))?;
        if (z - zb).norm() > 0.5 * chart.min_separation {
            return Err(SwError::RamificationNotFound(zb));
        }
        let scale = 1e-8 * (1.0 + norm(&point));
        if found.iter().any(|r| norm(&diff(&r.point, &point)) <= scale) {
            continue;
        }
        let aug = augmented(chart, z, &point);
        let (k, det_mk) = (0..chart.rank())
            .map(|k| (k, minor_k(&aug, k).determinant().norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("rank >= 1");
        if det_mk <= TAU_MINOR {
            return Err(SwError::NoLocalCoordinate(z));
        }
        found.push(RamificationPoint {
            branch: zb,
            z,
            point,
            root: root.clone(),
            k,
            det_mk,
        });
    }
    if found.len() != chart.weyl_order() / 2 {
        return Err(SwError::RamificationNotFound(zb));
    }
    found.sort_by(|a, b| {
        a.point
            .iter()
            .zip(&b.point)
            .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(found)
}

pub(crate) fn nearest_branch(chart: &CameralChart, z: C) -> C {
    chart
        .branch_points
        .iter()
        .copied()
        .min_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()))
        .unwrap_or(z)
}

/// Distance from a branch point to the nearest other branch point.
pub(crate) fn isolation(chart: &CameralChart, zb: C) -> f64 {
    chart
        .branch_points
        .iter()
        .filter(|b| (*b - zb).norm() > 0.0)
        .map(|b| (b - zb).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Default contour radius in the local coordinate.
pub fn default_radius(chart: &CameralChart, zb: C) -> f64 {
    RESIDUE_MAX_RADIUS.min(0.1 * isolation(chart, zb))
}

/// A point of the cover in the local chart around a ramification point.
#[derive(Clone, Debug)]
pub struct LocalPoint {
    pub w: C,
    pub z: C,
    pub alpha: Vec<C>,
    /// `dz / dw` along the curve.
    pub dz_dw: C,
    /// `|det M_k|` at the point.
    pub det_mk: f64,
}

impl RamificationPoint {
    /// Solves `I(alpha) = beta(z)` with `alpha_k = alpha_k(m) + w` from `guess`.
    fn solve_local(&self, chart: &CameralChart, w: C, guess: &(C, Vec<C>)) -> Option<LocalPoint> {
        let l = chart.rank();
        let (mut z, mut alpha) = guess.clone();
        alpha[self.k] = self.point[self.k] + w;
        // Sweeps still to run once the residual bound is met; the floor is
        // pessimistic and det DI ~ w magnifies any leftover error.
        let mut extra = 2;
        for _ in 0..40 {
            let target = chart.beta_at(z);
            let f = diff(&chart.system().eval(&alpha), &target);
            let aug = augmented(chart, z, &alpha);
            let mk = minor_k(&aug, self.k);
            let bound = (TAU_NEWTON * 1e-2).max(rounding_floor(chart, &alpha));
            if norm(&f) <= bound && extra > 0 {
                extra -= 1;
            } else if norm(&f) <= bound {
                let rhs: Vec<C> = (0..l).map(|i| -aug[(i, self.k + 1)]).collect();
                let det_mk = mk.determinant().norm();
                let v = solve_linear(mk, &rhs)?;
                return Some(LocalPoint {
                    w,
                    z,
                    alpha,
                    dz_dw: v[0],
                    det_mk,
                });
            }
            let step = solve_linear(mk, &f)?;
            z -= step[0];
            let mut it = step[1..].iter();
            for (i, a) in alpha.iter_mut().enumerate() {
                if i != self.k {
                    *a -= it.next().unwrap();
                }
            }
        }
        None
    }

    /// Cover points on `|w| = r` at `n` equally spaced angles, reached by
    /// continuation from the ramification point.
    pub fn circle(&self, chart: &CameralChart, r: f64, n: usize) -> Result<Vec<LocalPoint>, SwError> {
        let mut guess = (self.z, self.point.clone());
        let radial = 8;
        for s in 1..=radial {
            let w = C::new(r * s as f64 / radial as f64, 0.0);
            let p = self.solve_local(chart, w, &guess).ok_or(SwError::ContourDiverged(r))?;
            guess = (p.z, p.alpha);
        }
        let mut out = Vec::with_capacity(n);
        for j in 0..=n {
            let w = C::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
            let p = self.solve_local(chart, w, &guess).ok_or(SwError::ContourDiverged(r))?;
            guess = (p.z, p.alpha.clone());
            out.push(p);
        }
        // Going once around must return to the first node.
        let last = out.pop().expect("n + 1 nodes");
        let gap = (last.z - out[0].z).norm() + norm(&diff(&last.alpha, &out[0].alpha));
        if gap > 1e-8 * (1.0 + norm(&out[0].alpha)) {
            return Err(SwError::ContourDiverged(r));
        }
        // The contour must stay in the disc around this branch point.
        let iso = isolation(chart, self.branch);
        if out.iter().any(|p| (p.z - self.branch).norm() >= 0.5 * iso) {
            return Err(SwError::ContourDiverged(r));
        }
        Ok(out)
    }

    /// Largest `r <= r_max` (by halving) on which `alpha_k` is a good local
    /// coordinate: the contour closes and `|det M_k|` stays within a factor
    /// of two of its value at the ramification point.
    pub fn contour_radius(&self, chart: &CameralChart, r_max: f64) -> Result<f64, SwError> {
        let mut r = r_max;
        for _ in 0..40 {
            if let Ok(pts) = self.circle(chart, r, 32) {
                if pts
                    .iter()
                    .all(|p| p.det_mk >= 0.5 * self.det_mk && p.det_mk <= 2.0 * self.det_mk)
                {
                    return Ok(r);
                }
            }
            r *= 0.5;
        }
        Err(SwError::ContourDiverged(r))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeLocal {
    pub point: Vec<C>,
    pub k: usize,
    pub det_mk: f64,
    pub radii: Vec<f64>,
    /// Max over the circle of `|section|` in the `d alpha_k` frame, per radius.
    pub max_modulus: Vec<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub branch_point: C,
    pub ramification: Vec<ProbeLocal>,
    pub pass: bool,
}

/// Nodes per probe circle.
const PROBE_NODES: usize = 64;

/// Boundedness test of the section near every ramification point over one
/// branch point. Without explicit radii each point uses `r, r/2, r/4` with
/// `r` from [`RamificationPoint::contour_radius`].
pub fn holomorphy_probe(
    chart: &CameralChart,
    expr: &SWDerivativeExpr,
    branch_point: C,
    radii: Option<&[f64]>,
) -> Result<ProbeReport, SwError> {
    let zb = nearest_branch(chart, branch_point);
    let mut locals = Vec::new();
    for rp in ramification_points(chart, zb)? {
        let radii: Vec<f64> = match radii {
            Some(r) => r.to_vec(),
            None => {
                let r = rp.contour_radius(chart, default_radius(chart, zb))?;
                vec![r, r / 2.0, r / 4.0]
            }
        };
        let mut max_modulus = Vec::with_capacity(radii.len());
        for &r in &radii {
            let pts = rp.circle(chart, r, PROBE_NODES)?;
            let m = pts
                .iter()
                .map(|p| {
                    // dz/d alpha_k = dz/dw since w = alpha_k - const.
                    let v = expr.eval(&p.alpha, p.z);
                    norm(&v) * p.dz_dw.norm()
                })
                .fold(0.0, f64::max);
            max_modulus.push(m);
        }
        let pass = max_modulus.iter().all(|m| m.is_finite())
            && max_modulus.windows(2).all(|w| w[1] <= PROBE_GROWTH * w[0]);
        locals.push(ProbeLocal {
            point: rp.point.clone(),
            k: rp.k,
            det_mk: rp.det_mk,
            radii,
            max_modulus,
            pass,
        });
    }
    let pass = locals.iter().all(|l| l.pass);
    Ok(ProbeReport {
        branch_point: zb,
        ramification: locals,
        pass,
    })
}

/// Negative-control section: the adjugate replaced by its transpose.
pub fn transposed_control(inv: &InvariantSet, gamma: &Deformation) -> Result<SWDerivativeExpr, SwError> {
    SWDerivativeExpr::with_matrix(inv, inv.jac.adjugate().transpose().neg(), gamma)
}

/// Section with an extra factor `1 / det DI`: has a genuine pole at ramification.
pub fn overdivided_control(inv: &InvariantSet, gamma: &Deformation) -> Result<SWDerivativeExpr, SwError> {
    let mut e = sw_derivative_expr(inv, gamma)?;
    e.section.denominator = &e.section.denominator * &e.section.denominator;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::invariant_set;
    use crate::polyalg::UniPolyC;
    use crate::rootsys::GroupName;
    use crate::tolerances::SW_SIGN;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn consts(v: &[f64]) -> Deformation {
        Deformation::new(v.iter().map(|&x| UniPolyC::from_real(&[x])).collect())
    }

    fn parse(text: &str) -> MultiPoly {
        // "a1"/"a2" monomials with integer coefficients, e.g. "3 a1^2 - 6 a1 a2".
        let mut p = MultiPoly::zero(2);
        for (coef, e1, e2) in parse_terms(text) {
            p = &p + &MultiPoly::from_int_terms(2, &[(coef, &[e1, e2])]);
        }
        p
    }

    fn parse_terms(text: &str) -> Vec<(i64, u32, u32)> {
        text.replace('-', "+-")
            .split('+')
            .filter(|t| !t.trim().is_empty())
            .map(|t| {
                let t = t.trim();
                let (sign, t) = t.strip_prefix('-').map_or((1, t), |r| (-1, r.trim()));
                let mut coef = 1;
                let (mut e1, mut e2) = (0, 0);
                for f in t.split_whitespace() {
                    if let Some(v) = f.strip_prefix("a1") {
                        e1 += v.strip_prefix('^').map_or(1, |x| x.parse().unwrap());
                    } else if let Some(v) = f.strip_prefix("a2") {
                        e2 += v.strip_prefix('^').map_or(1, |x| x.parse().unwrap());
                    } else {
                        coef *= f.parse::<i64>().unwrap();
                    }
                }
                (sign * coef, e1, e2)
            })
            .collect()
    }

    #[test]
    fn a2_matrix_matches_displayed_form() {
        let inv = invariant_set(GroupName::A2);
        let e = sw_derivative_expr(&inv, &consts(&[1.0, 0.0])).unwrap();
        let shown = [
            ["3 a1^2 - 6 a1 a2 - 6 a2^2", "2 a2 + a1"],
            ["-6 a1^2 - 6 a1 a2 + 3 a2^2", "-2 a1 - a2"],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(e.coefficient_matrix.get(i, j), &parse(shown[i][j]), "({i},{j})");
            }
        }
        assert_eq!(e.denominator(), &parse("27 a1^2 a2 + 27 a1 a2^2"));
    }

    #[test]
    fn g2_matrix_matches_displayed_form() {
        let inv = invariant_set(GroupName::G2);
        let e = sw_derivative_expr(&inv, &consts(&[1.0, 0.0])).unwrap();
        let a1sq = parse("-2 a1^2");
        let p00 = &a1sq * &parse("6 a1^3 + 13 a1^2 a2 + 9 a1 a2^2 + 2 a2^3");
        let p10 = &parse("2 a1") * &parse("12 a1^4 + 30 a1^3 a2 + 26 a1^2 a2^2 + 9 a1 a2^3 + a2^4");
        assert_eq!(e.coefficient_matrix.get(0, 0), &p00);
        assert_eq!(e.coefficient_matrix.get(0, 1), &parse("3 a1 + 2 a2"));
        assert_eq!(e.coefficient_matrix.get(1, 0), &p10);
        assert_eq!(e.coefficient_matrix.get(1, 1), &parse("-6 a1 - 3 a2"));
        let det = [
            "-2 a1", "a2", "a1 + a2", "2 a1 + a2", "3 a1 + a2", "3 a1 + 2 a2",
        ]
        .iter()
        .fold(MultiPoly::one(2), |acc, f| &acc * &parse(f));
        assert_eq!(e.denominator(), &det);
    }

    #[test]
    fn a1_value_and_oracles() {
        let ch = CameralChart::for_group(GroupName::A1, vec![UniPolyC::from_real(&[0.0, 1.0])]).unwrap();
        let g = consts(&[1.0]);
        let e = sw_derivative_expr(&ch.inv, &g).unwrap();
        let alpha = [c(2.0, 0.0)];
        let v = sw_derivative_at(&ch, &e, c(4.0, 0.0), &alpha).unwrap();
        assert!((v.coeffs[0] - c(-0.25, 0.0)).norm() < 1e-15);
        let lin = gm_oracle_linear(&ch, &g, c(4.0, 0.0), &alpha).unwrap();
        assert!((lin.coeffs[0] - c(0.25, 0.0)).norm() < 1e-15);
        let fd = gm_oracle(&ch, &g, c(4.0, 0.0), &alpha, 1e-5).unwrap();
        assert!((fd.coeffs[0] - c(0.25, 0.0)).norm() < 1e-9);
        assert!((v.coeffs[0] - lin.coeffs[0] * SW_SIGN).norm() < 1e-15);
    }

    #[test]
    fn a2_value_at_one_two() {
        let inv = invariant_set(GroupName::A2);
        let e = sw_derivative_expr(&inv, &consts(&[1.0, 0.0])).unwrap();
        let alpha = [c(1.0, 0.0), c(2.0, 0.0)];
        assert_eq!(inv.jac.det().evaluate(&alpha).unwrap(), c(162.0, 0.0));
        let v = e.eval(&alpha, c(0.0, 0.0));
        // -adj(DI)(1,0) at (1,2) is the first column of the displayed matrix.
        assert!((v[0] - c((3.0 - 12.0 - 24.0) / 162.0, 0.0)).norm() < 1e-15);
        assert!((v[1] - c((-6.0 - 12.0 + 12.0) / 162.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_deformation_gives_zero() {
        let ch = CameralChart::for_group(GroupName::G2, vec![UniPolyC::from_real(&[0.8]), UniPolyC::from_real(&[0.0, 1.0])]).unwrap();
        let g = Deformation::zero(2);
        let e = sw_derivative_expr(&ch.inv, &g).unwrap();
        let f = ch.solve_fiber(c(0.1, 0.2)).unwrap();
        for p in &f.points {
            assert!(sw_derivative_at(&ch, &e, f.z, p).unwrap().coeffs.iter().all(|x| *x == c(0.0, 0.0)));
            assert_eq!(gm_oracle(&ch, &g, f.z, p, 1e-6).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn refuses_near_ramification() {
        let ch = CameralChart::for_group(GroupName::A1, vec![UniPolyC::from_real(&[0.0, 1.0])]).unwrap();
        let e = sw_derivative_expr(&ch.inv, &consts(&[1.0])).unwrap();
        assert!(matches!(
            sw_derivative_at(&ch, &e, c(1e-14, 0.0), &[c(1e-7, 0.0)]),
            Err(SwError::NearRamification(_))
        ));
        assert!(matches!(
            gm_oracle(&ch, &consts(&[1.0]), c(4.0, 0.0), &[c(2.0, 0.0)], 1e-2),
            Err(SwError::StepOutOfRange(_))
        ));
    }

    #[test]
    fn g2_equivariance() {
        let ch = CameralChart::for_group(GroupName::G2, vec![UniPolyC::from_real(&[0.8, 0.1]), UniPolyC::from_real(&[0.0, 1.0])]).unwrap();
        let g = Deformation::new(vec![UniPolyC::from_real(&[0.3, -1.0]), UniPolyC::from_real(&[1.0, 0.5])]);
        let e = sw_derivative_expr(&ch.inv, &g).unwrap();
        let f = ch.solve_fiber(c(0.2, 0.4)).unwrap();
        let rep = equivariance_check(&ch, &e, &f).unwrap();
        assert_eq!(rep.pairs_checked, 144);
        assert!(rep.max_defect <= 1e-9, "{}", rep.max_defect);
    }

    #[test]
    fn a1_probe_passes_with_unit_ratio() {
        let ch = CameralChart::for_group(GroupName::A1, vec![UniPolyC::from_real(&[0.0, 1.0])]).unwrap();
        let e = sw_derivative_expr(&ch.inv, &consts(&[1.0])).unwrap();
        let rep = holomorphy_probe(&ch, &e, c(0.0, 0.0), None).unwrap();
        assert!(rep.pass);
        let m = &rep.ramification[0].max_modulus;
        // Section in the d alpha frame is -gamma = -1 on the nose.
        assert!(m.iter().all(|x| (x - 1.0).abs() < 1e-9), "{m:?}");
    }

    #[test]
    fn ramification_points_lie_on_walls() {
        let ch = CameralChart::for_group(GroupName::A2, vec![UniPolyC::from_real(&[1.0, 0.3]), UniPolyC::from_real(&[0.2, 1.0])]).unwrap();
        for &b in &ch.branch_points {
            let rps = ramification_points(&ch, b).unwrap();
            assert_eq!(rps.len(), 3);
            for rp in &rps {
                assert!(crate::rootsys::RootSystemSpec::root_value(&rp.root, &rp.point).norm() < 1e-12);
                assert!((rp.z - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn overdivided_section_fails_probe() {
        let ch = CameralChart::for_group(GroupName::A2, vec![UniPolyC::from_real(&[1.0, 0.3]), UniPolyC::from_real(&[0.2, 1.0])]).unwrap();
        let g = consts(&[1.0, 0.5]);
        let bad = overdivided_control(&ch.inv, &g).unwrap();
        let rep = holomorphy_probe(&ch, &bad, ch.branch_points[0], None).unwrap();
        assert!(!rep.pass);
        let good = sw_derivative_expr(&ch.inv, &g).unwrap();
        assert!(holomorphy_probe(&ch, &good, ch.branch_points[0], None).unwrap().pass);
    }
}
