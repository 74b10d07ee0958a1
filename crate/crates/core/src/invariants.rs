//! Basic Weyl-invariant polynomials for each shipped group, the Steinberg
//! factorization of their Jacobian determinant, and the discriminant
//! written as a polynomial in the generators.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::polyalg::{jacobian, MultiPoly, PolyMatrix, UniPolyC};
use crate::rootsys::{build_root_system, GroupName, RootSystemSpec, WeylGroup};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantError {
    #[error("Jacobian determinant of the {0} generators vanishes identically")]
    DegenerateJacobian(GroupName),
    #[error("no polynomial in the generators reproduces the {0} discriminant")]
    DiscriminantUnsolvable(GroupName),
    #[error("discriminant composed with the chart vanishes identically")]
    DegenerateChart,
    #[error("expected {expected} chart polynomials, got {found}")]
    ArityMismatch { expected: usize, found: usize },
}

/// Normalization of the single A1 generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum A1Convention {
    /// `I = alpha^2`, so the cameral curve reads `alpha^2 = b`.
    #[default]
    CurveEquation,
    /// `I = det = -alpha^2` on traceless diagonal matrices.
    Determinant,
}

/// Sign of the shipped A1 generator under the default convention.
pub const A1_DEFAULT: A1Convention = A1Convention::CurveEquation;

#[derive(Clone, Debug)]
pub struct InvariantSet {
    pub group: RootSystemSpec,
    pub weyl: WeylGroup,
    pub gens: Vec<MultiPoly>,
    pub degrees: Vec<u32>,
    /// Cached Jacobi matrix `DI`, rows = generators.
    pub jac: PolyMatrix,
}

impl InvariantSet {
    pub fn rank(&self) -> usize {
        self.group.rank
    }

    pub fn name(&self) -> GroupName {
        self.group.name
    }

    /// Product of the positive roots as an exact polynomial.
    pub fn positive_root_product(&self) -> MultiPoly {
        self.group
            .positive_roots
            .iter()
            .fold(MultiPoly::one(self.rank()), |acc, r| {
                &acc * &MultiPoly::linear_form(r)
            })
    }

    /// Exact W-invariance of every generator under every group element.
    pub fn is_weyl_invariant(&self) -> bool {
        let l = self.rank();
        self.weyl.elements.iter().all(|w| {
            let images: Vec<MultiPoly> = (0..l)
                .map(|i| {
                    let row: Vec<i64> = (0..l).map(|j| w.get(i, j)).collect();
                    MultiPoly::linear_form(&row)
                })
                .collect();
            self.gens
                .iter()
                .all(|g| g.substitute(&images).expect("matching arity") == *g)
        })
    }

    pub fn eval_gens(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.gens
            .iter()
            .map(|g| g.evaluate(x).expect("matching arity"))
            .collect()
    }
}

pub fn invariant_set(group: GroupName) -> InvariantSet {
    invariant_set_with(group, A1_DEFAULT)
}

pub fn invariant_set_with(group: GroupName, a1: A1Convention) -> InvariantSet {
    let gens = match group {
        GroupName::A1 => {
            let s = match a1 {
                A1Convention::CurveEquation => 1,
                A1Convention::Determinant => -1,
            };
            vec![MultiPoly::from_int_terms(1, &[(s, &[2])])]
        }
        GroupName::A2 => vec![
            MultiPoly::from_int_terms(2, &[(1, &[2, 0]), (1, &[1, 1]), (1, &[0, 2])]),
            MultiPoly::from_int_terms(
                2,
                &[(-2, &[3, 0]), (-3, &[2, 1]), (3, &[1, 2]), (2, &[0, 3])],
            ),
        ],
        GroupName::B2 => {
            // Squared orthogonal coordinates e1 = x1 + x2, e2 = x2.
            let e1sq = MultiPoly::linear_form(&[1, 1]).pow(2);
            let e2sq = MultiPoly::var(2, 1).pow(2);
            vec![&e1sq + &e2sq, &e1sq * &e2sq]
        }
        GroupName::G2 => vec![
            MultiPoly::from_int_terms(2, &[(3, &[2, 0]), (3, &[1, 1]), (1, &[0, 2])]),
            MultiPoly::from_int_terms(
                2,
                &[
                    (4, &[6, 0]),
                    (12, &[5, 1]),
                    (13, &[4, 2]),
                    (6, &[3, 3]),
                    (1, &[2, 4]),
                ],
            ),
        ],
    };
    let root_system = build_root_system(group);
    let weyl = root_system.weyl_group();
    let degrees = gens
        .iter()
        .map(|g| g.homogeneous_degree().expect("generators are homogeneous"))
        .collect();
    let jac = jacobian(&gens);
    InvariantSet {
        group: root_system,
        weyl,
        gens,
        degrees,
        jac,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SteinbergCheck {
    /// `det DI = constant * prod(positive roots)` when `holds`.
    #[serde(serialize_with = "crate::serde_rational")]
    pub constant: BigRational,
    pub holds: bool,
}

/// Compares `det DI` with the product of positive roots; the constant is
/// the ratio of graded-lex leading coefficients.
pub fn steinberg_check(inv: &InvariantSet) -> Result<SteinbergCheck, InvariantError> {
    let det = inv.jac.det();
    let prod = inv.positive_root_product();
    let (m_det, c_det) = det
        .leading_term()
        .ok_or(InvariantError::DegenerateJacobian(inv.name()))?;
    let (m_prod, c_prod) = prod.leading_term().expect("roots are nonzero forms");
    if m_det != m_prod {
        return Ok(SteinbergCheck {
            constant: BigRational::zero(),
            holds: false,
        });
    }
    let constant = c_det / c_prod;
    let holds = det == prod.scale(&constant);
    Ok(SteinbergCheck { constant, holds })
}

#[derive(Clone, Debug)]
pub struct Discriminant {
    /// Product of all roots, positive and negative.
    pub as_poly: MultiPoly,
    /// `P(u_1..u_l)` with `as_poly = P(I_1..I_l)`.
    pub in_invariants: MultiPoly,
}

impl Discriminant {
    pub fn back_substitution_holds(&self, inv: &InvariantSet) -> bool {
        self.in_invariants
            .substitute(&inv.gens)
            .map(|p| p == self.as_poly)
            .unwrap_or(false)
    }

    pub fn to_text(&self) -> String {
        let names: Vec<String> = (1..=self.in_invariants.nvars())
            .map(|i| format!("u{i}"))
            .collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        self.in_invariants.to_string_with(&refs)
    }
}

/// Exponent vectors `m` with `sum_k m_k d_k = target`.
fn weighted_monomials(degrees: &[u32], target: u32) -> Vec<Vec<u32>> {
    fn rec(degrees: &[u32], left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        match degrees.split_first() {
            None => {
                if left == 0 {
                    out.push(prefix.clone());
                }
            }
            Some((&d, rest)) => {
                for k in 0..=(left / d) {
                    prefix.push(k);
                    rec(rest, left - k * d, prefix, out);
                    prefix.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(degrees, target, &mut Vec::new(), &mut out);
    out
}

/// Exact Gaussian elimination for an overdetermined consistent system.
fn solve_exact(mut rows: Vec<Vec<BigRational>>, ncols: usize) -> Option<Vec<BigRational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = BigRational::one() / rows[r][col].clone();
        for v in rows[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in 0..=ncols {
                    let t = &f * &rows[r][j];
                    rows[i][j] -= t;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    // Inconsistent if some zero row has a nonzero right-hand side.
    if rows[r..].iter().any(|row| !row[ncols].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); ncols];
    for (i, &col) in pivots.iter().enumerate() {
        x[col] = rows[i][ncols].clone();
    }
    Some(x)
}

/// Expresses the product of all roots as a polynomial in the generators by
/// matching monomial coefficients exactly, then certifies the result.
pub fn discriminant_in_invariants(inv: &InvariantSet) -> Result<Discriminant, InvariantError> {
    let l = inv.rank();
    let npos = inv.group.positive_roots.len();
    let sq = inv.positive_root_product().pow(2);
    let as_poly = if npos.is_multiple_of(2) { sq } else { -&sq };
    let target = 2 * npos as u32;

    let basis = weighted_monomials(&inv.degrees, target);
    let expanded: Vec<MultiPoly> = basis
        .iter()
        .map(|m| {
            m.iter()
                .zip(&inv.gens)
                .fold(MultiPoly::one(l), |acc, (&k, g)| &acc * &g.pow(k))
        })
        .collect();
    let mut monos: Vec<_> = expanded
        .iter()
        .flat_map(|p| p.terms().map(|(m, _)| m.clone()))
        .chain(as_poly.terms().map(|(m, _)| m.clone()))
        .collect();
    monos.sort();
    monos.dedup();
    let rows: Vec<Vec<BigRational>> = monos
        .iter()
        .map(|mono| {
            let mut row: Vec<BigRational> = expanded.iter().map(|p| p.coeff(&mono.0)).collect();
            row.push(as_poly.coeff(&mono.0));
            row
        })
        .collect();
    let sol = solve_exact(rows, basis.len())
        .ok_or(InvariantError::DiscriminantUnsolvable(inv.name()))?;

    let mut in_invariants = MultiPoly::zero(l);
    for (m, c) in basis.iter().zip(sol) {
        in_invariants.add_term(crate::polyalg::Monomial(m.clone()), c);
    }
    let disc = Discriminant {
        as_poly,
        in_invariants,
    };
    if !disc.back_substitution_holds(inv) {
        return Err(InvariantError::DiscriminantUnsolvable(inv.name()));
    }
    Ok(disc)
}

/// Rational function in `z` as a pair of complex polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunctionC {
    pub num: UniPolyC,
    pub den: UniPolyC,
}

impl RationalFunctionC {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.num.eval(z) / self.den.eval(z)
    }
}

/// `(sum_k dP/du_k(beta) gamma_k) / P(beta)`: the logarithmic derivative of
/// the discriminant along the deformation `gamma`.
pub fn log_derivative_along(
    disc: &Discriminant,
    beta: &[UniPolyC],
    gamma: &[UniPolyC],
) -> Result<RationalFunctionC, InvariantError> {
    let l = disc.in_invariants.nvars();
    for v in [beta, gamma] {
        if v.len() != l {
            return Err(InvariantError::ArityMismatch {
                expected: l,
                found: v.len(),
            });
        }
    }
    let den = disc
        .in_invariants
        .compose_univariate(beta)
        .expect("arity checked");
    if den.is_zero() {
        return Err(InvariantError::DegenerateChart);
    }
    let mut num = UniPolyC::zero();
    for (k, g) in gamma.iter().enumerate() {
        let dk = disc
            .in_invariants
            .partial_derivative(k)
            .compose_univariate(beta)
            .expect("arity checked");
        num = &num + &(&dk * g);
    }
    Ok(RationalFunctionC { num, den })
}

/// `(det DI)^2 = c^2 (-1)^N D` with `N` positive roots, checked exactly.
pub fn discriminant_matches_jacobian_square(
    inv: &InvariantSet,
    disc: &Discriminant,
    steinberg: &SteinbergCheck,
) -> bool {
    let det = inv.jac.det();
    let npos = inv.group.positive_roots.len();
    let mut rhs = disc.as_poly.scale(&(&steinberg.constant * &steinberg.constant));
    if npos % 2 == 1 {
        rhs = -&rhs;
    }
    !steinberg.constant.is_zero() && &det * &det == rhs
}
