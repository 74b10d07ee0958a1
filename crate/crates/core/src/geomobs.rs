//! Observables built on the Gauss-Manin derivative: the cubic on the base
//! via quadratic residues at ramification points, and the special Kahler
//! metric for rank one.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cameral::{CameralChart, Deformation};
use crate::invariants::{log_derivative_along, InvariantError, InvariantSet};
use crate::rootsys::GroupName;
use crate::swdiff::{
    default_radius, ramification_points, sw_derivative_expr, LocalPoint, SWDerivativeExpr, SwError,
};
use crate::tolerances::{RESIDUE_NODES, TAU_QUAD, TAU_RES};

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("contour residues disagree between r and r/2 (relative {0:e})")]
    ResidueUnstable(f64),
    #[error("quadrature did not reach tolerance within {0} cells")]
    MeshNotConverged(usize),
    #[error("special Kahler metric is implemented for A1 only, got {0}")]
    WrongGroup(GroupName),
    #[error("pairing is not W-invariant")]
    PairingNotInvariant,
    #[error("expected a {expected}x{expected} pairing")]
    PairingShape { expected: usize },
    #[error(transparent)]
    Sw(#[from] SwError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}

/// Trapezoid estimate of the `w^-2` coefficient of `f` on `|w| = r`:
/// `(1/2 pi i) \oint w f(w) dw = mean of w^2 f(w)`.
pub fn res2_trapezoid<F: Fn(C) -> C>(f: F, r: f64, n: usize) -> C {
    let sum: C = (0..n)
        .map(|j| {
            let w = C::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
            w * w * f(w)
        })
        .sum();
    sum / n as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct Res2Value {
    pub value: C,
    pub radius: f64,
    /// `|Res(r) - Res(r/2)| / max|Res|`.
    pub stability: f64,
}

fn stability(a: C, b: C) -> f64 {
    let d = (a - b).norm();
    let s = a.norm().max(b.norm());
    // Both vanish up to rounding.
    if d <= 1e-13 {
        0.0
    } else {
        d / s
    }
}

/// `Res^2` of an integrand given in the `dw^2` frame on the cover, checked
/// across `r` and `r/2`.
pub fn res2_at<F>(
    chart: &CameralChart,
    rp: &crate::swdiff::RamificationPoint,
    radius: f64,
    integrand: F,
) -> Result<Res2Value, GeomError>
where
    F: Fn(&LocalPoint) -> C,
{
    let mut vals = [C::new(0.0, 0.0); 2];
    for (slot, r) in vals.iter_mut().zip([radius, radius / 2.0]) {
        let pts = rp.circle(chart, r, RESIDUE_NODES)?;
        let s: C = pts.iter().map(|p| p.w * p.w * integrand(p)).sum();
        *slot = s / pts.len() as f64;
    }
    let st = stability(vals[0], vals[1]);
    if st > TAU_RES {
        return Err(GeomError::ResidueUnstable(st));
    }
    // Rounding in the integrand grows like |w|^-2, so the larger contour is
    // the more accurate one; r/2 only certifies stability.
    Ok(Res2Value {
        value: vals[0],
        radius,
        stability: st,
    })
}

/// W-invariant bilinear form on t, integer entries.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PairingSpec {
    pub matrix: Vec<Vec<i64>>,
    /// Ratio of `matrix` to the W-average of the identity.
    #[serde(serialize_with = "crate::serde_rational")]
    pub scale: BigRational,
}

impl PairingSpec {
    /// Accepts a user matrix after an exact invariance check.
    pub fn custom(inv: &InvariantSet, matrix: Vec<Vec<i64>>) -> Result<Self, GeomError> {
        let l = inv.rank();
        if matrix.len() != l || matrix.iter().any(|r| r.len() != l) {
            return Err(GeomError::PairingShape { expected: l });
        }
        let spec = PairingSpec {
            matrix,
            scale: BigRational::from_integer(BigInt::from(0)),
        };
        if !spec.is_invariant(inv) {
            return Err(GeomError::PairingNotInvariant);
        }
        let avg = w_average_identity(inv);
        // Both are W-invariant; compare on one nonzero diagonal entry.
        let scale = BigRational::new(BigInt::from(spec.matrix[0][0]) * BigInt::from(inv.weyl.order() as i64), BigInt::from(avg[0][0]));
        Ok(PairingSpec { scale, ..spec })
    }

    pub fn is_invariant(&self, inv: &InvariantSet) -> bool {
        inv.weyl.elements.iter().all(|w| congruence(w, &self.matrix) == self.matrix)
    }

    pub fn apply(&self, x: &[C], y: &[C]) -> C {
        let mut s = C::new(0.0, 0.0);
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                if b != 0 {
                    s += x[i] * y[j] * b as f64;
                }
            }
        }
        s
    }
}

/// `w^T B w`.
fn congruence(w: &crate::rootsys::IntMatrix, b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = b.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .flat_map(|p| (0..n).map(move |q| (p, q)))
                        .map(|(p, q)| w.get(p, i) * b[p][q] * w.get(q, j))
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// `sum_w w^T w` (the W-average of the identity times `|W|`).
fn w_average_identity(inv: &InvariantSet) -> Vec<Vec<i64>> {
    let l = inv.rank();
    let id: Vec<Vec<i64>> = (0..l).map(|i| (0..l).map(|j| (i == j) as i64).collect()).collect();
    let mut acc = vec![vec![0i64; l]; l];
    for w in &inv.weyl.elements {
        let c = congruence(w, &id);
        for i in 0..l {
            for j in 0..l {
                acc[i][j] += c[i][j];
            }
        }
    }
    acc
}

/// Identity for A1; otherwise the W-average of the identity reduced to
/// coprime integer entries.
pub fn default_pairing(inv: &InvariantSet) -> PairingSpec {
    let sum = w_average_identity(inv);
    let g = sum.iter().flatten().fold(0i64, |a, &b| a.gcd(&b)).max(1);
    let matrix: Vec<Vec<i64>> = sum.iter().map(|r| r.iter().map(|v| v / g).collect()).collect();
    PairingSpec {
        matrix,
        scale: BigRational::new(BigInt::from(inv.weyl.order() as i64), BigInt::from(g)),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CubicTerm {
    pub branch: C,
    /// Index of the ramification point within the cluster over `branch`.
    pub cluster: usize,
    pub point: Vec<C>,
    pub contribution: C,
    pub stability: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CubicValue {
    pub value: C,
    pub pairing: PairingSpec,
    pub per_ramification_terms: Vec<CubicTerm>,
}

/// `1/2 sum_m Res^2_m( L_{g1} D / D * B(nabla_{g2} lambda, nabla_{g3} lambda) )`
/// over every ramification point of the chart.
pub fn cubic(
    chart: &CameralChart,
    g1: &Deformation,
    g2: &Deformation,
    g3: &Deformation,
    pairing: &PairingSpec,
) -> Result<CubicValue, GeomError> {
    let l = chart.rank();
    if pairing.matrix.len() != l {
        return Err(GeomError::PairingShape { expected: l });
    }
    let logd = log_derivative_along(&chart.disc, &chart.beta, &g1.gamma)?;
    let e2 = sw_derivative_expr(&chart.inv, g2)?;
    let e3 = sw_derivative_expr(&chart.inv, g3)?;
    let per_branch: Vec<Result<Vec<CubicTerm>, GeomError>> = chart
        .branch_points
        .par_iter()
        .map(|&zb| {
            let r_max = default_radius(chart, zb);
            ramification_points(chart, zb)?
                .iter()
                .enumerate()
                .map(|(cluster, rp)| {
                    let r = rp.contour_radius(chart, r_max)?;
                    let res = res2_at(chart, rp, r, |p| {
                        cubic_integrand(&e2, &e3, pairing, p) * logd.eval(p.z)
                    })?;
                    Ok(CubicTerm {
                        branch: zb,
                        cluster,
                        point: rp.point.clone(),
                        contribution: res.value,
                        stability: res.stability,
                    })
                })
                .collect()
        })
        .collect();
    let mut terms = Vec::new();
    for t in per_branch {
        terms.extend(t?);
    }
    let value = terms.iter().map(|t| t.contribution).sum::<C>() * 0.5;
    Ok(CubicValue {
        value,
        pairing: pairing.clone(),
        per_ramification_terms: terms,
    })
}

/// `B(s2, s3) (dz/dw)^2` with `s` the `dz`-frame coefficients.
fn cubic_integrand(e2: &SWDerivativeExpr, e3: &SWDerivativeExpr, b: &PairingSpec, p: &LocalPoint) -> C {
    let s2 = e2.eval(&p.alpha, p.z);
    let s3 = e3.eval(&p.alpha, p.z);
    b.apply(&s2, &s3) * p.dz_dw * p.dz_dw
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub tol: f64,
    pub max_cells: usize,
    /// Gauss-Legendre points per direction on each cell.
    pub order: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: TAU_QUAD,
            max_cells: 200_000,
            order: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SkMetricValue {
    pub value: f64,
    pub radius: f64,
    pub cells: usize,
    pub evaluations: usize,
    pub error_estimate: f64,
    /// Branch points outside the disc; nonzero means the region misses
    /// part of the ramification.
    pub branch_points_outside: usize,
    pub truncated: bool,
}

#[derive(Clone, Copy)]
struct Cell {
    r0: f64,
    r1: f64,
    t0: f64,
    t1: f64,
}

impl Cell {
    fn split(&self) -> [Cell; 4] {
        let rm = 0.5 * (self.r0 + self.r1);
        let tm = 0.5 * (self.t0 + self.t1);
        [
            Cell { r0: self.r0, r1: rm, t0: self.t0, t1: tm },
            Cell { r0: rm, r1: self.r1, t0: self.t0, t1: tm },
            Cell { r0: self.r0, r1: rm, t0: tm, t1: self.t1 },
            Cell { r0: rm, r1: self.r1, t0: tm, t1: self.t1 },
        ]
    }
}

struct Leaf {
    cell: Cell,
    value: f64,
    error: f64,
}

/// `g_SK(gamma, gamma)` restricted to `|z| < radius`.
///
/// With `alpha^2 = beta` the derivative is `gamma / (2 alpha) dz` up to sign,
/// so `|nabla lambda|^2 = |gamma|^2 / (4 |beta|) dA` on each sheet. Two equal
/// sheets and the prefactor 2 give `int |gamma|^2 / |beta| dA` over the disc.
pub fn sk_metric_sl2(
    chart: &CameralChart,
    gamma: &Deformation,
    radius: f64,
    opts: QuadOptions,
) -> Result<SkMetricValue, GeomError> {
    if chart.inv.name() != GroupName::A1 {
        return Err(GeomError::WrongGroup(chart.inv.name()));
    }
    let expr = sw_derivative_expr(&chart.inv, gamma)?;
    let rule = GaussLegendre::new(NonZeroUsize::new(opts.order).expect("order >= 1"));
    let nw: Vec<(f64, f64)> = rule.nodes().copied().zip(rule.weights().copied()).collect();
    let sheet_density = |z: C| -> f64 {
        let alpha = [chart.beta[0].eval(z).sqrt()];
        expr.eval(&alpha, z)[0].norm_sqr()
    };
    let tensor = |c: &Cell| -> f64 {
        let (hr, ht) = (0.5 * (c.r1 - c.r0), 0.5 * (c.t1 - c.t0));
        let (mr, mt) = (0.5 * (c.r1 + c.r0), 0.5 * (c.t1 + c.t0));
        let mut s = 0.0;
        for &(xr, wr) in &nw {
            let r = mr + hr * xr;
            for &(xt, wt) in &nw {
                let th = mt + ht * xt;
                s += wr * wt * r * sheet_density(C::from_polar(r, th));
            }
        }
        // Two sheets, prefactor 2.
        4.0 * s * hr * ht
    };
    let make_leaf = |cell: Cell| -> Leaf {
        let coarse = tensor(&cell);
        let fine: f64 = cell.split().iter().map(tensor).sum();
        Leaf {
            cell,
            value: fine,
            error: (fine - coarse).abs(),
        }
    };
    let sectors = 8;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut leaves: Vec<Leaf> = (0..sectors)
        .map(|k| Cell {
            r0: 0.0,
            r1: radius,
            t0: two_pi * k as f64 / sectors as f64,
            t1: two_pi * (k + 1) as f64 / sectors as f64,
        })
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(make_leaf)
        .collect();
    loop {
        let total: f64 = leaves.iter().map(|l| l.value).sum();
        let err: f64 = leaves.iter().map(|l| l.error).sum();
        if err <= opts.tol * total.abs() || err == 0.0 {
            let outside = chart
                .branch_points
                .iter()
                .filter(|b| b.norm() >= radius)
                .count();
            let cells = leaves.len();
            return Ok(SkMetricValue {
                value: total,
                radius,
                cells,
                evaluations: cells * 5 * opts.order * opts.order,
                error_estimate: err,
                branch_points_outside: outside,
                truncated: outside > 0,
            });
        }
        if leaves.len() > opts.max_cells {
            return Err(GeomError::MeshNotConverged(opts.max_cells));
        }
        let threshold = err / leaves.len() as f64;
        let (refine, keep): (Vec<Leaf>, Vec<Leaf>) = leaves.into_iter().partition(|l| l.error >= threshold);
        let children: Vec<Leaf> = refine
            .iter()
            .flat_map(|l| l.cell.split())
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(make_leaf)
            .collect();
        leaves = keep;
        leaves.extend(children);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::invariant_set;
    use crate::polyalg::UniPolyC;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn consts(v: &[f64]) -> Deformation {
        Deformation::new(v.iter().map(|&x| UniPolyC::from_real(&[x])).collect())
    }

    #[test]
    fn res2_defining_cases() {
        let one = res2_trapezoid(|w| 1.0 / (w * w), 1e-2, RESIDUE_NODES);
        assert!((one - c(1.0, 0.0)).norm() < 1e-12);
        let zero = res2_trapezoid(|w| 1.0 / w, 1e-2, RESIDUE_NODES);
        assert!(zero.norm() < 1e-12);
        // q dz^2 with q = (z - zj)^-2 pulled back by z = zj + w^2.
        let zj = c(0.3, -0.2);
        let pulled = res2_trapezoid(
            |w| {
                let z = zj + w * w;
                let dz_dw = 2.0 * w;
                dz_dw * dz_dw / ((z - zj) * (z - zj))
            },
            1e-2,
            RESIDUE_NODES,
        );
        assert!((pulled - c(4.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn default_pairings() {
        let a1 = default_pairing(&invariant_set(GroupName::A1));
        assert_eq!(a1.matrix, vec![vec![1]]);
        let a2 = default_pairing(&invariant_set(GroupName::A2));
        assert_eq!(a2.matrix, vec![vec![2, 1], vec![1, 2]]);
        for g in GroupName::ALL {
            let inv = invariant_set(g);
            assert!(default_pairing(&inv).is_invariant(&inv), "{g}");
        }
        let inv = invariant_set(GroupName::A2);
        assert_eq!(
            PairingSpec::custom(&inv, vec![vec![1, 0], vec![0, 1]]),
            Err(GeomError::PairingNotInvariant)
        );
        assert_eq!(PairingSpec::custom(&inv, vec![vec![4, 2], vec![2, 4]]).unwrap().scale, &a2.scale * BigRational::from_integer(2.into()));
    }

    #[test]
    fn a1_cubic_matches_local_expansion() {
        // beta = (z - 1)(z + 2)(z - 0.5i)
        let roots = [c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 0.5)];
        let beta = UniPolyC::from_roots(c(1.0, 0.0), &roots);
        let ch = CameralChart::for_group(GroupName::A1, vec![beta.clone()]).unwrap();
        let g1 = Deformation::new(vec![UniPolyC::from_real(&[1.0, 0.5])]);
        let g2 = Deformation::new(vec![UniPolyC::from_real(&[0.2, -1.0, 0.3])]);
        let g3 = consts(&[0.7]);
        let v = cubic(&ch, &g1, &g2, &g3, &default_pairing(&ch.inv)).unwrap();
        let bp = beta.derivative();
        let expected: C = roots
            .iter()
            .map(|&zj| g1.gamma[0].eval(zj) * g2.gamma[0].eval(zj) * g3.gamma[0].eval(zj) / (bp.eval(zj) * bp.eval(zj)))
            .sum::<C>()
            * 0.5;
        assert!((v.value - expected).norm() <= 1e-6 * expected.norm(), "{} vs {}", v.value, expected);
        assert_eq!(v.per_ramification_terms.len(), 3);
    }

    #[test]
    fn cubic_vanishes_for_zero_first_argument() {
        let ch = CameralChart::for_group(GroupName::A1, vec![UniPolyC::from_real(&[-1.0, 0.0, 1.0])]).unwrap();
        let v = cubic(&ch, &Deformation::zero(1), &consts(&[1.0]), &consts(&[1.0]), &default_pairing(&ch.inv)).unwrap();
        assert_eq!(v.value, c(0.0, 0.0));
    }

    #[test]
    fn sk_reference_integrals() {
        let ch = CameralChart::for_group(GroupName::A1, vec![UniPolyC::from_real(&[0.0, 1.0])]).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        let v = sk_metric_sl2(&ch, &consts(&[1.0]), 1.0, QuadOptions::default()).unwrap();
        assert!((v.value - two_pi).abs() <= 1e-10 * two_pi, "{}", v.value);
        assert!(!v.truncated);
        let g = Deformation::new(vec![UniPolyC::from_real(&[0.0, 1.0])]);
        let v = sk_metric_sl2(&ch, &g, 1.0, QuadOptions::default()).unwrap();
        assert!((v.value - two_pi / 3.0).abs() <= 1e-9, "{}", v.value);
        let z = sk_metric_sl2(&ch, &Deformation::zero(1), 1.0, QuadOptions::default()).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn sk_off_centre_branch_point() {
        // beta = z - 1/2 has its zero inside the disc but off the polar origin.
        let ch = CameralChart::for_group(GroupName::A1, vec![UniPolyC::from_real(&[-0.5, 1.0])]).unwrap();
        let v = sk_metric_sl2(&ch, &consts(&[1.0]), 1.0, QuadOptions::default()).unwrap();
        assert!(v.value > 0.0 && v.error_estimate <= TAU_QUAD * v.value);
        let sk_err = sk_metric_sl2(&ch, &consts(&[1.0]), 1.0, QuadOptions { max_cells: 10, ..Default::default() });
        assert!(matches!(sk_err, Err(GeomError::MeshNotConverged(10))));
        let g2 = CameralChart::for_group(GroupName::G2, vec![UniPolyC::from_real(&[0.8]), UniPolyC::from_real(&[0.0, 1.0])]).unwrap();
        assert!(matches!(sk_metric_sl2(&g2, &Deformation::zero(2), 1.0, QuadOptions::default()), Err(GeomError::WrongGroup(_))));
    }
}
