//! Exact multivariate polynomials over the rationals, complex univariate
//! polynomials in the chart coordinate `z`, and the small amount of matrix
//! algebra (Jacobians, cofactor determinants, adjugates) built on top.
//!
//! Matrix index convention, used everywhere in the crate: row `j` holds the
//! equation `I_j`, column `i` holds the variable `alpha_i`, so
//! `jacobian(I)[(j, i)] = dI_j / d alpha_i`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, Schur};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("arity mismatch: expected {expected} variables, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("companion eigenvalue solver failed for degree {0}")]
    RootSolver(usize),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back on numerator/denominator separately for huge values.
        r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
    })
}

/// Exponent vector, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial in `nvars` variables with exact rational coefficients.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, rat(1))
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    /// The coordinate function `x_i` (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(Monomial(e), rat(1));
        p
    }

    /// Linear form `sum_i c_i x_i`.
    pub fn linear_form(coeffs: &[i64]) -> Self {
        let n = coeffs.len();
        coeffs
            .iter()
            .enumerate()
            .fold(Self::zero(n), |acc, (i, &c)| &acc + &Self::var(n, i).scale(&rat(c)))
    }

    /// Builds a polynomial from integer-coefficient terms.
    pub fn from_int_terms(nvars: usize, terms: &[(i64, &[u32])]) -> Self {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            assert_eq!(e.len(), nvars, "exponent vector of wrong length");
            p.add_term(Monomial(e.to_vec()), rat(*c));
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        debug_assert_eq!(m.0.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> BigRational {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// `Some(d)` if every term has degree `d`; the zero polynomial is not homogeneous.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(Monomial::degree);
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    /// Largest term in graded-lex order.
    pub fn leading_term(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn partial_derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[i] -= 1;
            out.add_term(m2, c * rat(e as i64));
        }
        out
    }

    /// Substitutes `x_i -> images[i]`; the result lives in the images' ring.
    pub fn substitute(&self, images: &[MultiPoly]) -> Result<MultiPoly, PolyError> {
        if images.len() != self.nvars {
            return Err(PolyError::ArityMismatch {
                expected: self.nvars,
                found: images.len(),
            });
        }
        let target = images.first().map_or(0, MultiPoly::nvars);
        if let Some(bad) = images.iter().find(|p| p.nvars != target) {
            return Err(PolyError::ArityMismatch {
                expected: target,
                found: bad.nvars,
            });
        }
        // Cache powers of each image: substitution is dominated by them.
        let mut powers: Vec<Vec<MultiPoly>> = images
            .iter()
            .map(|p| vec![MultiPoly::one(target), p.clone()])
            .collect();
        let mut out = MultiPoly::zero(target);
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = &powers[i][powers[i].len() - 1] * &images[i];
                    powers[i].push(next);
                }
                if e > 0 {
                    t = &t * &powers[i][e as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    pub fn evaluate(&self, point: &[Complex64]) -> Result<Complex64, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::ArityMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| {
                m.0.iter()
                    .zip(point)
                    .fold(Complex64::new(rat_to_f64(c), 0.0), |acc, (&e, x)| {
                        acc * x.powu(e)
                    })
            })
            .sum())
    }

    pub fn evaluate_rational(&self, point: &[BigRational]) -> Result<BigRational, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::ArityMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (&e, x) in m.0.iter().zip(point) {
                t *= num_traits::pow(x.clone(), e as usize);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Largest monomial dividing every term (the zero polynomial gives `None`).
    pub fn monomial_content(&self) -> Option<Monomial> {
        let mut it = self.terms.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, m| {
            Monomial(acc.0.iter().zip(&m.0).map(|(a, b)| *a.min(b)).collect())
        }))
    }

    /// Exact division by a monomial that divides every term.
    pub fn div_monomial(&self, m: &Monomial) -> Option<Self> {
        let mut out = Self::zero(self.nvars);
        for (t, c) in &self.terms {
            if !m.divides(t) {
                return None;
            }
            out.add_term(
                Monomial(t.0.iter().zip(&m.0).map(|(a, b)| a - b).collect()),
                c.clone(),
            );
        }
        Some(out)
    }

    /// Same polynomial with one extra (last) variable of exponent 0.
    pub fn extend_vars(&self, extra: usize) -> Self {
        let mut out = Self::zero(self.nvars + extra);
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            e.extend(std::iter::repeat_n(0, extra));
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Composes with univariate complex polynomials `x_i -> q_i(z)`.
    pub fn compose_univariate(&self, images: &[UniPolyC]) -> Result<UniPolyC, PolyError> {
        if images.len() != self.nvars {
            return Err(PolyError::ArityMismatch {
                expected: self.nvars,
                found: images.len(),
            });
        }
        let mut out = UniPolyC::zero();
        for (m, c) in &self.terms {
            let mut t = UniPolyC::constant(Complex64::new(rat_to_f64(c), 0.0));
            for (&e, q) in m.0.iter().zip(images) {
                for _ in 0..e {
                    t = &t * q;
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.0.clone(), rat_to_f64(c)))
                .collect(),
        }
    }

    pub fn to_string_with(&self, names: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        names[i].to_string()
                    } else {
                        format!("{}^{}", names[i], e)
                    }
                })
                .collect();
            let coeff = if abs.is_integer() {
                abs.numer().to_string()
            } else {
                format!("{}/{}", abs.numer(), abs.denom())
            };
            if mono.is_empty() {
                s.push_str(&coeff);
            } else if abs.is_one() {
                s.push_str(&mono.join("*"));
            } else {
                s.push_str(&coeff);
                s.push('*');
                s.push_str(&mono.join("*"));
            }
        }
        s
    }

    /// Parses the text produced by [`MultiPoly::to_string_with`], plus
    /// parentheses and powers of parenthesised factors, e.g.
    /// `-2*a1*(a1 + a2)^2 + 1/3`.
    pub fn parse(text: &str, names: &[&str]) -> Result<MultiPoly, PolyError> {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
            names,
        };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(out)
    }

    fn default_names(&self) -> Vec<String> {
        (1..=self.nvars).map(|i| format!("a{i}")).collect()
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    names: &'a [&'a str],
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> PolyError {
        PolyError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<MultiPoly, PolyError> {
        let n = self.names.len();
        let mut acc = MultiPoly::zero(n);
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let t = self.term()?;
            acc = if sign < 0 { &acc - &t } else { &acc + &t };
            match self.peek() {
                Some(b'+') => sign = 1,
                Some(b'-') => sign = -1,
                _ => return Ok(acc),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MultiPoly, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.uint()?;
            let e = u32::try_from(e).map_err(|_| self.error("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<BigInt, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected digits"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("digits parse"))
    }

    fn atom(&mut self) -> Result<MultiPoly, PolyError> {
        let n = self.names.len();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.uint()?;
                let den = if self.peek() == Some(b'/') {
                    self.pos += 1;
                    self.uint()?
                } else {
                    BigInt::one()
                };
                if den.is_zero() {
                    return Err(self.error("zero denominator"));
                }
                Ok(MultiPoly::constant(n, BigRational::new(num, den)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii ident");
                match self.names.iter().position(|&v| v == ident) {
                    Some(i) => Ok(MultiPoly::var(n, i)),
                    None => {
                        self.pos = start;
                        Err(self.error(&format!("unknown variable '{ident}'")))
                    }
                }
            }
            _ => Err(self.error("expected a number, variable or '('")),
        }
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.default_names();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        f.write_str(&self.to_string_with(&refs))
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "polynomial arity mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "polynomial arity mismatch");
        let mut out = MultiPoly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

/// Floating-point snapshot of a [`MultiPoly`] for fast complex evaluation.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    nvars: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl CompiledPoly {
    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.nvars);
        let mut acc = Complex64::zero();
        for (e, c) in &self.terms {
            let mut t = Complex64::new(*c, 0.0);
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= xi.powu(k);
                }
            }
            acc += t;
        }
        acc
    }

    /// Sum of absolute term values, a scale for rounding-error estimates.
    pub fn eval_abs(&self, x: &[Complex64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c.abs()
                    * x.iter()
                        .zip(e)
                        .map(|(xi, &k)| xi.norm().powi(k as i32))
                        .product::<f64>()
            })
            .sum()
    }
}

/// Square matrix of exact polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: Vec<Vec<MultiPoly>>,
}

impl PolyMatrix {
    pub fn new(rows: Vec<Vec<MultiPoly>>) -> Result<Self, PolyError> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(PolyError::NotSquare {
                rows: n,
                cols: r.len(),
            });
        }
        Ok(PolyMatrix { rows })
    }

    pub fn scalar_identity(n: usize, nvars: usize, c: &MultiPoly) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { c.clone() } else { MultiPoly::zero(nvars) })
                    .collect()
            })
            .collect();
        PolyMatrix { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &MultiPoly {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<MultiPoly>] {
        &self.rows
    }

    fn nvars(&self) -> usize {
        self.rows
            .first()
            .and_then(|r| r.first())
            .map_or(0, MultiPoly::nvars)
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim();
        PolyMatrix {
            rows: (0..n)
                .map(|i| (0..n).map(|j| self.rows[j][i].clone()).collect())
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        PolyMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|p| -p).collect())
                .collect(),
        }
    }

    pub fn mul(&self, rhs: &PolyMatrix) -> Self {
        let n = self.dim();
        let nv = self.nvars();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(MultiPoly::zero(nv), |acc, k| {
                            &acc + &(&self.rows[i][k] * &rhs.rows[k][j])
                        })
                    })
                    .collect()
            })
            .collect();
        PolyMatrix { rows }
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> PolyMatrix {
        PolyMatrix {
            rows: self
                .rows
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip_row)
                .map(|(_, r)| {
                    r.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != skip_col)
                        .map(|(_, p)| p.clone())
                        .collect()
                })
                .collect(),
        }
    }

    /// Cofactor expansion along the first row.
    pub fn det(&self) -> MultiPoly {
        let n = self.dim();
        let nv = self.nvars();
        match n {
            0 => MultiPoly::one(nv),
            1 => self.rows[0][0].clone(),
            _ => {
                let mut acc = MultiPoly::zero(nv);
                for j in 0..n {
                    if self.rows[0][j].is_zero() {
                        continue;
                    }
                    let t = &self.rows[0][j] * &self.minor(0, j).det();
                    acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
                }
                acc
            }
        }
    }

    /// Classical adjugate: `adj[i][j] = (-1)^(i+j) det(minor(j, i))`.
    pub fn adjugate(&self) -> Self {
        let n = self.dim();
        let nv = self.nvars();
        if n == 1 {
            return PolyMatrix {
                rows: vec![vec![MultiPoly::one(nv)]],
            };
        }
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let d = self.minor(j, i).det();
                        if (i + j) % 2 == 0 {
                            d
                        } else {
                            -&d
                        }
                    })
                    .collect()
            })
            .collect();
        PolyMatrix { rows }
    }

    pub fn compile(&self) -> CompiledMatrix {
        CompiledMatrix {
            entries: self
                .rows
                .iter()
                .map(|r| r.iter().map(MultiPoly::compile).collect())
                .collect(),
        }
    }
}

/// Jacobi matrix of `polys`, rows = polynomials, columns = variables.
pub fn jacobian(polys: &[MultiPoly]) -> PolyMatrix {
    let rows = polys
        .iter()
        .map(|p| (0..p.nvars()).map(|i| p.partial_derivative(i)).collect())
        .collect();
    PolyMatrix { rows }
}

#[derive(Clone, Debug)]
pub struct CompiledMatrix {
    entries: Vec<Vec<CompiledPoly>>,
}

impl CompiledMatrix {
    pub fn eval(&self, x: &[Complex64]) -> DMatrix<Complex64> {
        let n = self.entries.len();
        DMatrix::from_fn(n, n, |i, j| self.entries[i][j].eval(x))
    }
}

/// Univariate polynomial with complex coefficients, lowest degree first.
/// The leading stored coefficient is nonzero unless the polynomial is zero.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct UniPolyC {
    coeffs: Vec<Complex64>,
}

impl UniPolyC {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPolyC { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        UniPolyC { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `prod_j (z - r_j)` times `lead`.
    pub fn from_roots(lead: Complex64, roots: &[Complex64]) -> Self {
        roots.iter().fold(Self::constant(lead), |acc, &r| {
            &acc * &Self::new(vec![-r, Complex64::new(1.0, 0.0)])
        })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// All complex roots with multiplicity: eigenvalues of the companion
    /// matrix, each polished by a few Newton steps on the polynomial.
    pub fn roots(&self) -> Result<Vec<Complex64>, PolyError> {
        let n = match self.degree() {
            None | Some(0) => return Ok(Vec::new()),
            Some(n) => n,
        };
        let lead = self.coeffs[n];
        let companion = DMatrix::from_fn(n, n, |i, j| {
            if i == 0 {
                -self.coeffs[n - 1 - j] / lead
            } else if i == j + 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::zero()
            }
        });
        let eig = Schur::try_new(companion, 1e-15, 10_000)
            .and_then(|s| s.eigenvalues())
            .ok_or(PolyError::RootSolver(n))?;
        let dp = self.derivative();
        let mut roots: Vec<Complex64> = eig
            .iter()
            .map(|&r| {
                let mut r = r;
                for _ in 0..4 {
                    let d = dp.eval(r);
                    if d.norm() == 0.0 {
                        break;
                    }
                    let step = self.eval(r) / d;
                    if !step.is_finite() || step.norm() > 1e-3 * (1.0 + r.norm()) {
                        break;
                    }
                    r -= step;
                }
                r
            })
            .collect();
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(roots)
    }
}

impl Add for &UniPolyC {
    type Output = UniPolyC;
    fn add(self, rhs: &UniPolyC) -> UniPolyC {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPolyC::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or_default()
                        + rhs.coeffs.get(k).copied().unwrap_or_default()
                })
                .collect(),
        )
    }
}

impl Sub for &UniPolyC {
    type Output = UniPolyC;
    fn sub(self, rhs: &UniPolyC) -> UniPolyC {
        self + &rhs.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &UniPolyC {
    type Output = UniPolyC;
    fn mul(self, rhs: &UniPolyC) -> UniPolyC {
        if self.is_zero() || rhs.is_zero() {
            return UniPolyC::zero();
        }
        let mut out = vec![Complex64::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPolyC::new(out)
    }
}

/// Polynomial in `alpha` whose coefficients are polynomials in `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, UniPolyC>,
}

impl MixedPoly {
    pub fn zero(nvars: usize) -> Self {
        MixedPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    /// `p(alpha) * q(z)`.
    pub fn from_product(p: &MultiPoly, q: &UniPolyC) -> Self {
        let mut out = Self::zero(p.nvars());
        for (m, c) in p.terms() {
            let t = q.scale(Complex64::new(rat_to_f64(c), 0.0));
            if !t.is_zero() {
                out.terms.insert(m.clone(), t);
            }
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &UniPolyC)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, alpha: &[Complex64], z: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, q)| {
                m.0.iter()
                    .zip(alpha)
                    .fold(q.eval(z), |acc, (&e, x)| acc * x.powu(e))
            })
            .sum()
    }

    fn monomial_content(&self) -> Option<Monomial> {
        let mut it = self.terms.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, m| {
            Monomial(acc.0.iter().zip(&m.0).map(|(a, b)| *a.min(b)).collect())
        }))
    }

    fn div_monomial(&self, m: &Monomial) -> Self {
        MixedPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(t, q)| {
                    (
                        Monomial(t.0.iter().zip(&m.0).map(|(a, b)| a - b).collect()),
                        q.clone(),
                    )
                })
                .collect(),
        }
    }
}

impl Add for &MixedPoly {
    type Output = MixedPoly;
    fn add(self, rhs: &MixedPoly) -> MixedPoly {
        let mut out = self.clone();
        for (m, q) in &rhs.terms {
            let sum = match out.terms.get(m) {
                Some(p) => p + q,
                None => q.clone(),
            };
            if sum.is_zero() {
                out.terms.remove(m);
            } else {
                out.terms.insert(m.clone(), sum);
            }
        }
        out
    }
}

/// Vector of mixed numerators over one exact denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalSectionExpr {
    pub numerators: Vec<MixedPoly>,
    pub denominator: MultiPoly,
}

impl RationalSectionExpr {
    pub fn new(numerators: Vec<MixedPoly>, denominator: MultiPoly) -> Self {
        assert!(!denominator.is_zero(), "denominator must be nonzero");
        RationalSectionExpr {
            numerators,
            denominator,
        }
    }

    /// Cancels the largest monomial dividing the denominator and every
    /// numerator term. No polynomial gcd is attempted.
    pub fn reduce_monomials(&self) -> Self {
        let mut common = match self.denominator.monomial_content() {
            Some(m) => m,
            None => return self.clone(),
        };
        for n in &self.numerators {
            if let Some(c) = n.monomial_content() {
                common = Monomial(common.0.iter().zip(&c.0).map(|(a, b)| *a.min(b)).collect());
            }
        }
        if common.degree() == 0 {
            return self.clone();
        }
        RationalSectionExpr {
            numerators: self
                .numerators
                .iter()
                .map(|n| n.div_monomial(&common))
                .collect(),
            denominator: self
                .denominator
                .div_monomial(&common)
                .expect("content divides denominator"),
        }
    }

    pub fn eval(&self, alpha: &[Complex64], z: Complex64) -> Vec<Complex64> {
        let den = self
            .denominator
            .evaluate(alpha)
            .expect("arity checked at construction");
        self.numerators
            .iter()
            .map(|n| n.eval(alpha, z) / den)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a2_invariants() -> (MultiPoly, MultiPoly) {
        let i1 = MultiPoly::from_int_terms(2, &[(1, &[2, 0]), (1, &[1, 1]), (1, &[0, 2])]);
        let i2 = MultiPoly::from_int_terms(
            2,
            &[(-2, &[3, 0]), (-3, &[2, 1]), (3, &[1, 2]), (2, &[0, 3])],
        );
        (i1, i2)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn partial_of_a2_quadratic() {
        let (i1, _) = a2_invariants();
        assert_eq!(i1.partial_derivative(0), MultiPoly::linear_form(&[2, 1]));
    }

    #[test]
    fn evaluate_a2_cubic_at_one_two() {
        let (_, i2) = a2_invariants();
        let v = i2.evaluate(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        // -2 - 6 + 12 + 16
        assert_eq!(v, c(20.0, 0.0));
        assert_eq!(i2.evaluate_rational(&[rat(1), rat(2)]).unwrap(), rat(20));
    }

    #[test]
    fn substitute_identity_is_noop() {
        let (i1, i2) = a2_invariants();
        let id = [MultiPoly::var(2, 0), MultiPoly::var(2, 1)];
        assert_eq!(i1.substitute(&id).unwrap(), i1);
        assert_eq!(i2.substitute(&id).unwrap(), i2);
    }

    #[test]
    fn arity_errors() {
        let (i1, _) = a2_invariants();
        assert!(matches!(
            i1.evaluate(&[c(1.0, 0.0)]),
            Err(PolyError::ArityMismatch { expected: 2, found: 1 })
        ));
        assert!(i1.substitute(&[MultiPoly::var(1, 0)]).is_err());
        assert!(PolyMatrix::new(vec![vec![MultiPoly::one(1)], vec![]]).is_err());
    }

    #[test]
    fn jacobian_rows_follow_equations() {
        let a1 = MultiPoly::from_int_terms(1, &[(1, &[2])]);
        let j = jacobian(std::slice::from_ref(&a1));
        assert_eq!(j.get(0, 0), &MultiPoly::from_int_terms(1, &[(2, &[1])]));

        let (i1, i2) = a2_invariants();
        let j = jacobian(&[i1, i2]);
        assert_eq!(j.get(0, 0), &MultiPoly::linear_form(&[2, 1]));
        assert_eq!(j.get(0, 1), &MultiPoly::linear_form(&[1, 2]));
    }

    #[test]
    fn det_and_adjugate_small_cases() {
        let id = PolyMatrix::scalar_identity(3, 2, &MultiPoly::one(2));
        assert_eq!(id.det(), MultiPoly::one(2));
        let p = PolyMatrix::new(vec![vec![MultiPoly::var(1, 0)]]).unwrap();
        assert_eq!(p.adjugate().get(0, 0), &MultiPoly::one(1));
    }

    #[test]
    fn a2_jacobian_determinant_is_27_times_roots() {
        let (i1, i2) = a2_invariants();
        let j = jacobian(&[i1, i2]);
        let roots = &(&MultiPoly::var(2, 0) * &MultiPoly::var(2, 1))
            * &MultiPoly::linear_form(&[1, 1]);
        assert_eq!(j.det(), roots.scale(&rat(27)));
        let adj = j.adjugate();
        assert_eq!(adj.mul(&j), PolyMatrix::scalar_identity(2, 2, &j.det()));
    }

    #[test]
    fn canonical_text_form() {
        let (i1, i2) = a2_invariants();
        assert_eq!(i1.to_string(), "a1^2 + a1*a2 + a2^2");
        assert_eq!(i2.to_string(), "-2*a1^3 - 3*a1^2*a2 + 3*a1*a2^2 + 2*a2^3");
        let half = MultiPoly::constant(1, BigRational::new(BigInt::from(-1), BigInt::from(2)));
        assert_eq!(half.to_string(), "-1/2");
        assert_eq!(MultiPoly::zero(2).to_string(), "0");
    }

    #[test]
    fn homogeneity_and_leading_term() {
        let (i1, i2) = a2_invariants();
        assert_eq!(i1.homogeneous_degree(), Some(2));
        assert_eq!(i2.homogeneous_degree(), Some(3));
        assert_eq!((&i1 + &i2).homogeneous_degree(), None);
        let (m, c) = i2.leading_term().unwrap();
        assert_eq!((m.0.clone(), c.clone()), (vec![3, 0], rat(-2)));
    }

    #[test]
    fn homogeneity_via_scaling_variable() {
        // I(t x) = t^d I(x) in Q[x1, x2, t].
        let (i1, i2) = a2_invariants();
        let t = MultiPoly::var(3, 2);
        let scaled = [&MultiPoly::var(3, 0) * &t, &MultiPoly::var(3, 1) * &t];
        for (p, d) in [(i1, 2), (i2, 3)] {
            assert_eq!(p.substitute(&scaled).unwrap(), &p.extend_vars(1) * &t.pow(d));
        }
    }

    #[test]
    fn univariate_roots_and_derivative() {
        let p = UniPolyC::from_real(&[-1.0, 0.0, 1.0]);
        let r = p.roots().unwrap();
        assert!((r[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - c(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(p.derivative(), UniPolyC::from_real(&[0.0, 2.0]));
        assert_eq!(UniPolyC::from_real(&[0.0, 0.0]).degree(), None);
        let z = UniPolyC::from_roots(c(2.0, 1.0), &[c(0.3, -0.2), c(-1.0, 0.5), c(0.0, 2.0)]);
        let rr = z.roots().unwrap();
        assert_eq!(rr.len(), 3);
        for root in [c(0.3, -0.2), c(-1.0, 0.5), c(0.0, 2.0)] {
            assert!(rr.iter().any(|x| (x - root).norm() < 1e-12));
        }
    }

    #[test]
    fn compose_univariate_matches_pointwise() {
        let (_, i2) = a2_invariants();
        let q = [UniPolyC::from_real(&[1.0, 2.0]), UniPolyC::from_real(&[0.0, 0.0, -1.0])];
        let comp = i2.compose_univariate(&q).unwrap();
        let z = c(0.4, -0.7);
        let direct = i2.evaluate(&[q[0].eval(z), q[1].eval(z)]).unwrap();
        assert!((comp.eval(z) - direct).norm() < 1e-12);
    }

    #[test]
    fn reduce_removes_common_monomial() {
        let x = MultiPoly::var(2, 0);
        let y = MultiPoly::var(2, 1);
        let one = UniPolyC::constant(c(1.0, 0.0));
        let e = RationalSectionExpr::new(
            vec![MixedPoly::from_product(&(&x * &y), &one)],
            &(&x * &x) * &y,
        );
        let r = e.reduce_monomials();
        assert_eq!(r.denominator, x);
        let pt = [c(0.5, 0.1), c(-0.3, 0.2)];
        assert!((r.eval(&pt, c(0.0, 0.0))[0] - e.eval(&pt, c(0.0, 0.0))[0]).norm() < 1e-14);
    }

    #[test]
    fn parse_accepts_products_and_powers() {
        let p = MultiPoly::parse("27*a1*a2*(a1 + a2)", &["a1", "a2"]).unwrap();
        assert_eq!(p.to_string(), "27*a1^2*a2 + 27*a1*a2^2");
        let q = MultiPoly::parse("-(a1 - 1/2)^2", &["a1"]).unwrap();
        assert_eq!(q.to_string(), "-a1^2 + a1 - 1/4");
        assert!(matches!(
            MultiPoly::parse("a1 + b", &["a1"]),
            Err(PolyError::Parse { pos: 5, .. })
        ));
        assert!(MultiPoly::parse("a1 +", &["a1"]).is_err());
        assert!(MultiPoly::parse("(a1", &["a1"]).is_err());
    }

    fn small_poly() -> impl Strategy<Value = MultiPoly> {
        prop::collection::vec((-5i64..=5, 0u32..4, 0u32..4), 0..6).prop_map(|ts| {
            let mut p = MultiPoly::zero(2);
            for (c, a, b) in ts {
                p.add_term(Monomial(vec![a, b]), rat(c));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn display_then_parse_round_trips(p in small_poly()) {
            let text = p.to_string();
            prop_assert_eq!(MultiPoly::parse(&text, &["a1", "a2"]).unwrap(), p);
        }

        #[test]
        fn derivative_is_linear_and_leibniz(p in small_poly(), q in small_poly(), i in 0usize..2) {
            prop_assert_eq!((&p + &q).partial_derivative(i),
                &p.partial_derivative(i) + &q.partial_derivative(i));
            prop_assert_eq!((&p * &q).partial_derivative(i),
                &(&p.partial_derivative(i) * &q) + &(&p * &q.partial_derivative(i)));
        }

        #[test]
        fn evaluate_commutes_with_substitute(
            p in small_poly(), s in small_poly(), t in small_poly(),
            x in -20i64..20, y in -20i64..20, d in 1i64..7,
        ) {
            let pt = [BigRational::new(x.into(), d.into()), BigRational::new(y.into(), (d + 1).into())];
            let lhs = p.substitute(&[s.clone(), t.clone()]).unwrap().evaluate_rational(&pt).unwrap();
            let img = [s.evaluate_rational(&pt).unwrap(), t.evaluate_rational(&pt).unwrap()];
            prop_assert_eq!(lhs, p.evaluate_rational(&img).unwrap());
        }
    }
}
