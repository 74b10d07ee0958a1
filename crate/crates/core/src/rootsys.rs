//! Root systems of types A1, A2, B2 and G2 together with their Weyl groups.
//!
//! Points of the Cartan subalgebra are written in simple-root coordinates
//! `x_i = alpha_i(u)`. A root `sum_i n_i alpha_i` is then the linear form
//! `x -> sum_i n_i x_i`, and Weyl group elements act on `x` by integer
//! matrices.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerances::TAU_ORBIT;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootSystemError {
    #[error("unknown group name `{0}` (expected one of A1, A2, B2, G2)")]
    UnknownGroup(String),
    #[error("Weyl closure exceeded {0} elements; generators are probably wrong")]
    ClosureTooLarge(usize),
    #[error("generator has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupName {
    A1,
    A2,
    B2,
    G2,
}

impl GroupName {
    pub const ALL: [GroupName; 4] = [GroupName::A1, GroupName::A2, GroupName::B2, GroupName::G2];
}

impl FromStr for GroupName {
    type Err = RootSystemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A1" | "SL2" => Ok(GroupName::A1),
            "A2" | "SL3" => Ok(GroupName::A2),
            "B2" => Ok(GroupName::B2),
            "G2" => Ok(GroupName::G2),
            _ => Err(RootSystemError::UnknownGroup(s.to_string())),
        }
    }
}

impl fmt::Display for GroupName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GroupName::A1 => "A1",
            GroupName::A2 => "A2",
            GroupName::B2 => "B2",
            GroupName::G2 => "G2",
        };
        f.write_str(s)
    }
}

/// Square integer matrix, row-major. Ordering compares entries row by row.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        IntMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        IntMatrix {
            n,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n.max(1)).map(<[i64]>::to_vec).collect()
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        let n = self.n;
        let mut data = vec![0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * rhs.get(k, j);
                }
            }
        }
        IntMatrix { n, data }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| x[j] * self.get(i, j) as f64)
                    .sum::<Complex64>()
            })
            .collect()
    }

    pub fn apply_int(&self, x: &[i64]) -> Vec<i64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Determinant by cofactor expansion (n is tiny here).
    pub fn det(&self) -> i64 {
        fn rec(m: &[Vec<i64>]) -> i64 {
            match m.len() {
                0 => 1,
                1 => m[0][0],
                n => (0..n)
                    .map(|j| {
                        let minor: Vec<Vec<i64>> = m[1..]
                            .iter()
                            .map(|r| {
                                r.iter()
                                    .enumerate()
                                    .filter(|(k, _)| *k != j)
                                    .map(|(_, v)| *v)
                                    .collect()
                            })
                            .collect();
                        let s = if j % 2 == 0 { 1 } else { -1 };
                        s * m[0][j] * rec(&minor)
                    })
                    .sum(),
            }
        }
        rec(&self.rows())
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

/// Static root data of one simple group.
#[derive(Clone, Debug, Serialize)]
pub struct RootSystemSpec {
    pub name: GroupName,
    pub rank: usize,
    /// `cartan[i][j] = <alpha_i^vee, alpha_j>`.
    pub cartan: Vec<Vec<i64>>,
    /// Positive roots as coefficient vectors in the simple-root basis.
    pub positive_roots: Vec<Vec<i64>>,
    /// Simple reflections acting on simple-root coordinates of points.
    pub simple_reflections: Vec<IntMatrix>,
}

impl RootSystemSpec {
    /// Total number of roots, positive and negative.
    pub fn num_roots(&self) -> usize {
        2 * self.positive_roots.len()
    }

    /// Value of a root (as a linear form) at a point.
    pub fn root_value(root: &[i64], x: &[Complex64]) -> Complex64 {
        root.iter().zip(x).map(|(&n, xi)| xi * n as f64).sum()
    }

    /// Values of every positive root at `x`.
    pub fn positive_root_values(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.positive_roots
            .iter()
            .map(|r| Self::root_value(r, x))
            .collect()
    }

    pub fn weyl_group(&self) -> WeylGroup {
        weyl_closure(self.rank, &self.simple_reflections, 1024)
            .expect("built-in root systems have finite Weyl groups")
    }
}

/// Simple reflection `s_j` in simple-root coordinates:
/// `x_i -> x_i - <alpha_j^vee, alpha_i> x_j`.
fn simple_reflection(cartan: &[Vec<i64>], j: usize) -> IntMatrix {
    let n = cartan.len();
    let mut m = IntMatrix::identity(n);
    for i in 0..n {
        m.data[i * n + j] -= cartan[j][i];
    }
    m
}

pub fn build_root_system(name: GroupName) -> RootSystemSpec {
    let (cartan, positive_roots): (Vec<Vec<i64>>, Vec<Vec<i64>>) = match name {
        GroupName::A1 => (vec![vec![2]], vec![vec![1]]),
        GroupName::A2 => (
            vec![vec![2, -1], vec![-1, 2]],
            vec![vec![1, 0], vec![0, 1], vec![1, 1]],
        ),
        // alpha_1 long, alpha_2 short.
        GroupName::B2 => (
            vec![vec![2, -1], vec![-2, 2]],
            vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, 2]],
        ),
        // alpha_1 short, alpha_2 long.
        GroupName::G2 => (
            vec![vec![2, -3], vec![-1, 2]],
            vec![
                vec![1, 0],
                vec![0, 1],
                vec![1, 1],
                vec![2, 1],
                vec![3, 1],
                vec![3, 2],
            ],
        ),
    };
    let simple_reflections = (0..cartan.len())
        .map(|j| simple_reflection(&cartan, j))
        .collect();
    RootSystemSpec {
        name,
        rank: cartan.len(),
        cartan,
        positive_roots,
        simple_reflections,
    }
}

pub fn build_root_system_by_name(name: &str) -> Result<RootSystemSpec, RootSystemError> {
    Ok(build_root_system(name.parse()?))
}

/// Finite matrix group with a multiplication table.
#[derive(Clone, Debug, Serialize)]
pub struct WeylGroup {
    pub elements: Vec<IntMatrix>,
    /// `cayley[i][j]` is the index of `elements[i] * elements[j]`.
    pub cayley: Vec<Vec<usize>>,
}

impl WeylGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn identity_index(&self) -> usize {
        let id = IntMatrix::identity(self.dim());
        self.elements
            .iter()
            .position(|e| *e == id)
            .expect("group contains identity")
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        let e = self.identity_index();
        self.cayley[i]
            .iter()
            .position(|&k| k == e)
            .expect("every element has an inverse")
    }

    /// The reflection fixing the hyperplane `root = 0` pointwise.
    pub fn root_reflection(&self, root: &[i64]) -> Option<&IntMatrix> {
        let n = root.len();
        // Spanning set for the kernel of the linear form.
        let mut kernel = Vec::new();
        for i in 0..n {
            for k in (i + 1)..n {
                let mut v = vec![0; n];
                v[i] = root[k];
                v[k] = -root[i];
                kernel.push(v);
            }
        }
        let id = IntMatrix::identity(n);
        self.elements.iter().find(|g| {
            **g != id
                && g.mul(g) == id
                && g.det() == -1
                && kernel.iter().all(|v| g.apply_int(v) == *v)
        })
    }
}

/// Closes `generators` under multiplication by breadth-first search.
/// Elements come back sorted by their row-major entries.
pub fn weyl_closure(
    dim: usize,
    generators: &[IntMatrix],
    bound: usize,
) -> Result<WeylGroup, RootSystemError> {
    if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
        return Err(RootSystemError::DimensionMismatch {
            expected: dim,
            found: g.dim(),
        });
    }
    let mut seen: BTreeSet<IntMatrix> = BTreeSet::new();
    let mut queue = VecDeque::from([IntMatrix::identity(dim)]);
    seen.insert(IntMatrix::identity(dim));
    while let Some(g) = queue.pop_front() {
        for s in generators {
            let h = g.mul(s);
            if seen.insert(h.clone()) {
                if seen.len() > bound {
                    return Err(RootSystemError::ClosureTooLarge(bound));
                }
                queue.push_back(h);
            }
        }
    }
    let elements: Vec<IntMatrix> = seen.into_iter().collect();
    let index: HashMap<&IntMatrix, usize> =
        elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let cayley = elements
        .iter()
        .map(|a| {
            elements
                .iter()
                .map(|b| {
                    *index
                        .get(&a.mul(b))
                        .expect("closure of a finite group is closed under products")
                })
                .collect()
        })
        .collect();
    Ok(WeylGroup { elements, cayley })
}

/// Orbit of `point`, duplicates merged within [`TAU_ORBIT`] per coordinate.
pub fn weyl_orbit(group: &WeylGroup, point: &[Complex64]) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    for g in &group.elements {
        let y = g.apply(point);
        let dup = out.iter().any(|o| {
            o.iter()
                .zip(&y)
                .all(|(a, b)| (a.re - b.re).abs() <= TAU_ORBIT && (a.im - b.im).abs() <= TAU_ORBIT)
        });
        if !dup {
            out.push(y);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn root_counts_and_group_orders() {
        let expected = [(GroupName::A1, 1, 2), (GroupName::A2, 3, 6), (GroupName::B2, 4, 8), (GroupName::G2, 6, 12)];
        for (g, nroots, order) in expected {
            let rs = build_root_system(g);
            assert_eq!(rs.positive_roots.len(), nroots, "{g}");
            assert_eq!(rs.weyl_group().order(), order, "{g}");
            for s in &rs.simple_reflections {
                assert_eq!(s.mul(s), IntMatrix::identity(rs.rank));
            }
        }
    }

    #[test]
    fn g2_positive_roots_verbatim() {
        let rs = build_root_system(GroupName::G2);
        assert_eq!(
            rs.positive_roots,
            vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 1], vec![3, 1], vec![3, 2]]
        );
    }

    #[test]
    fn a2_reflection_matrices() {
        let rs = build_root_system(GroupName::A2);
        // s1: (x1, x2) -> (-x1, x1 + x2), s2: (x1, x2) -> (x1 + x2, -x2)
        assert_eq!(rs.simple_reflections[0], IntMatrix::from_rows(&[vec![-1, 0], vec![1, 1]]));
        assert_eq!(rs.simple_reflections[1], IntMatrix::from_rows(&[vec![1, 1], vec![0, -1]]));
    }

    #[test]
    fn closure_edge_cases() {
        let trivial = weyl_closure(2, &[IntMatrix::identity(2)], 10).unwrap();
        assert_eq!(trivial.order(), 1);
        let a1 = weyl_closure(1, &[IntMatrix::from_rows(&[vec![-1]])], 10).unwrap();
        assert_eq!(a1.order(), 2);
        let runaway = weyl_closure(1, &[IntMatrix::from_rows(&[vec![2]])], 50);
        assert_eq!(runaway.unwrap_err(), RootSystemError::ClosureTooLarge(50));
        assert!(weyl_closure(2, &[IntMatrix::identity(1)], 10).is_err());
    }

    #[test]
    fn closure_is_sorted_and_group_like() {
        let w = build_root_system(GroupName::G2).weyl_group();
        assert!(w.elements.windows(2).all(|p| p[0] < p[1]));
        for i in 0..w.order() {
            let inv = w.inverse_index(i);
            assert_eq!(w.cayley[i][inv], w.identity_index());
        }
    }

    #[test]
    fn unknown_group_is_rejected() {
        assert!(matches!(
            build_root_system_by_name("E8"),
            Err(RootSystemError::UnknownGroup(_))
        ));
        assert_eq!(build_root_system_by_name("g2").unwrap().name, GroupName::G2);
    }

    #[test]
    fn orbits() {
        let a1 = build_root_system(GroupName::A1).weyl_group();
        let orb = weyl_orbit(&a1, &[c(3.0)]);
        assert_eq!(orb.len(), 2);
        assert!(orb.contains(&vec![c(-3.0)]));

        let a2 = build_root_system(GroupName::A2).weyl_group();
        assert_eq!(weyl_orbit(&a2, &[c(1.0), c(2.0)]).len(), 6);

        let g2 = build_root_system(GroupName::G2);
        assert_eq!(g2.simple_reflections[0].apply(&[c(0.0), c(1.0)]), vec![c(0.0), c(1.0)]);
        let wall = weyl_orbit(&g2.weyl_group(), &[c(0.0), c(1.0)]);
        assert!(wall.len() < 12);
        assert_eq!(12 % wall.len(), 0);
    }

    #[test]
    fn every_positive_root_has_a_reflection_fixing_its_wall() {
        for g in GroupName::ALL {
            let rs = build_root_system(g);
            let w = rs.weyl_group();
            for root in &rs.positive_roots {
                let s = w.root_reflection(root).unwrap_or_else(|| panic!("{g} {root:?}"));
                // The root itself changes sign under its reflection.
                let x: Vec<i64> = (0..rs.rank).map(|i| 3 + 2 * i as i64).collect();
                let y = s.apply_int(&x);
                let val = |v: &[i64]| root.iter().zip(v).map(|(a, b)| a * b).sum::<i64>();
                assert_eq!(val(&y), -val(&x));
            }
        }
    }
}
