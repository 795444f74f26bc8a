//! The orthogonal (Proriol) basis on the reference triangle.
//!
//! `b_{n,k}(x1, x2) = (x1+x2)^k P_{n-k}^{(0,2k+1)}(2(x1+x2)-1) P_k((x1-x2)/(x1+x2))`
//! spans, for `k = 0..=n`, the polynomials of degree `n` that are orthogonal
//! on the unit triangle to every polynomial of degree `n-1`. The factor
//! `(x1+x2)^k P_k((x1-x2)/(x1+x2))` is evaluated as a homogeneous degree-k
//! polynomial in `(x1, x2)`, so the line `x1 + x2 = 0` needs no case split.
//!
//! Edge restrictions of the basis are polynomials on `[0, 1]`; their
//! coefficients are assembled in exact rational arithmetic. The restriction
//! map to any edge is invertible on the orthogonal space, which yields the
//! edge-to-triangle extension operator.

use nalgebra::{DMatrix, DVector};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly1d::Poly1;
use crate::quadrature::QuadratureRule;
use crate::special::{jacobi_eval, shifted_factorial_rational, JacobiParams};

const POINT_TOL: f64 = 1e-14;

/// A point of the closed reference triangle with vertices
/// `(0,0)`, `(1,0)`, `(0,1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefTrianglePoint {
    x1: f64,
    x2: f64,
}

impl RefTrianglePoint {
    /// Membership is enforced with an absolute tolerance of `1e-14`.
    pub fn new(x1: f64, x2: f64) -> Result<Self> {
        if x1 < -POINT_TOL || x2 < -POINT_TOL || x1 + x2 > 1.0 + POINT_TOL {
            return Err(Error::InvalidParameter(format!(
                "({x1}, {x2}) is not in the reference triangle"
            )));
        }
        Ok(Self { x1, x2 })
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }
}

/// The three edges of the reference triangle: `I` from `(0,0)` to `(1,0)`,
/// `II` from `(0,0)` to `(0,1)`, `III` from `(1,0)` to `(0,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeLabel {
    I,
    II,
    III,
}

impl EdgeLabel {
    pub const ALL: [EdgeLabel; 3] = [EdgeLabel::I, EdgeLabel::II, EdgeLabel::III];

    /// Parametrization of the edge by `t` in `[0, 1]`.
    pub fn point(&self, t: f64) -> (f64, f64) {
        match self {
            EdgeLabel::I => (t, 0.0),
            EdgeLabel::II => (0.0, t),
            EdgeLabel::III => (1.0 - t, t),
        }
    }
}

/// Homogeneous Legendre factor `q_k(a, b) = (a+b)^k P_k((a-b)/(a+b))`,
/// by the recurrence `(m+1) q_{m+1} = (2m+1)(a-b) q_m - m (a+b)^2 q_{m-1}`.
fn homogeneous_legendre(k: u32, a: f64, b: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let diff = a - b;
    let sum_sq = (a + b) * (a + b);
    let mut prev = 1.0;
    let mut cur = diff;
    for m in 1..k {
        let m = m as f64;
        let next = ((2.0 * m + 1.0) * diff * cur - m * sum_sq * prev) / (m + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Raw evaluation of `b_{n,k}` without any domain check; the formula is a
/// polynomial, so values outside the triangle are well defined.
pub(crate) fn proriol_eval_raw(n: u32, k: u32, x1: f64, x2: f64) -> f64 {
    debug_assert!(k <= n);
    let s = x1 + x2;
    let jacobi = JacobiParams {
        n: n - k,
        alpha: 0.0,
        beta: 2.0 * k as f64 + 1.0,
    };
    jacobi_eval(jacobi, 2.0 * s - 1.0) * homogeneous_legendre(k, x1, x2)
}

/// Value of the orthogonal basis polynomial `b_{n,k}` at a triangle point.
pub fn proriol_eval(n: u32, k: u32, pt: RefTrianglePoint) -> Result<f64> {
    if k > n {
        return Err(Error::IndexOutOfRange(format!(
            "k = {k} exceeds degree n = {n}"
        )));
    }
    Ok(proriol_eval_raw(n, k, pt.x1, pt.x2))
}

/// Coefficients of a degree-`n` orthogonal polynomial in the basis
/// `{b_{n,k}: 0 <= k <= n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoCoeffs {
    degree: u32,
    coeffs: Vec<f64>,
}

impl OrthoCoeffs {
    pub fn new(degree: u32, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != degree as usize + 1 {
            return Err(Error::InvalidParameter(format!(
                "degree {degree} needs {} coefficients, got {}",
                degree + 1,
                coeffs.len()
            )));
        }
        Ok(Self { degree, coeffs })
    }

    pub fn zero(degree: u32) -> Self {
        Self {
            degree,
            coeffs: vec![0.0; degree as usize + 1],
        }
    }

    /// The coefficient vector `e_k`, i.e. the basis polynomial `b_{n,k}` itself.
    pub fn unit(degree: u32, k: u32) -> Result<Self> {
        if k > degree {
            return Err(Error::IndexOutOfRange(format!(
                "k = {k} exceeds degree {degree}"
            )));
        }
        let mut coeffs = vec![0.0; degree as usize + 1];
        coeffs[k as usize] = 1.0;
        Ok(Self { degree, coeffs })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coeffs)
    }

    pub fn from_vector(degree: u32, v: &DVector<f64>) -> Result<Self> {
        Self::new(degree, v.as_slice().to_vec())
    }

    /// Evaluation at arbitrary `(x1, x2)` (no triangle membership check).
    pub fn eval_xy(&self, x1: f64, x2: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| c * proriol_eval_raw(self.degree, k as u32, x1, x2))
            .sum()
    }

    pub fn eval(&self, pt: RefTrianglePoint) -> f64 {
        self.eval_xy(pt.x1, pt.x2)
    }

    /// Exact `L^2` inner product on the reference triangle. The basis is
    /// orthogonal with `||b_{n,k}||^2 = 1 / ((2n+2)(2k+1))`, so the product
    /// is a weighted dot of the coefficients.
    pub fn l2_inner(&self, other: &Self) -> f64 {
        assert_eq!(
            self.degree, other.degree,
            "degree mismatch in inner product"
        );
        let n = self.degree as f64;
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(k, (a, b))| a * b / ((2.0 * n + 2.0) * (2.0 * k as f64 + 1.0)))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_inner(self).sqrt()
    }
}

fn big(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut value = BigInt::one();
    for m in 0..k {
        value = value * BigInt::from(n - m) / BigInt::from(m + 1);
    }
    value
}

/// Monomial coefficients (exact) of the edge-I restriction
/// `b_{n,k}(x, 0) = sum_i (k-n)_i (-n-k-1)_i / (i!)^2 x^(n-i) (x-1)^i`.
fn trace_one_rational(n: u32, k: u32) -> Vec<BigRational> {
    let mut coeffs = vec![BigRational::zero(); n as usize + 1];
    for i in 0..=(n - k) {
        let term = shifted_factorial_rational(&big(k as i64 - n as i64), i)
            * shifted_factorial_rational(&big(-(n as i64) - k as i64 - 1), i)
            / (shifted_factorial_rational(&big(1), i) * shifted_factorial_rational(&big(1), i));
        if term.is_zero() {
            continue;
        }
        // x^(n-i) (x-1)^i contributes to x^(n-i+m) with sign (-1)^(i-m).
        for m in 0..=i {
            let mut c = BigRational::from_integer(binomial(i, m));
            if (i - m) % 2 == 1 {
                c = -c;
            }
            coeffs[(n - i + m) as usize] += &term * c;
        }
    }
    coeffs
}

/// Monomial coefficients (exact) of the Legendre polynomial `P_k`.
fn legendre_monomials_rational(k: u32) -> Vec<BigRational> {
    let mut prev = vec![BigRational::one()];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![BigRational::zero(), BigRational::one()];
    for m in 1..k {
        let mut next = vec![BigRational::zero(); m as usize + 2];
        for (d, c) in cur.iter().enumerate() {
            next[d + 1] += c * big(2 * m as i64 + 1);
        }
        for (d, c) in prev.iter().enumerate() {
            next[d] -= c * big(m as i64);
        }
        for c in next.iter_mut() {
            *c /= big(m as i64 + 1);
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Monomial coefficients (exact) of `P_k(1 - 2x)` on `[0, 1]`.
fn trace_three_rational(n: u32, k: u32) -> Vec<BigRational> {
    let legendre = legendre_monomials_rational(k);
    let mut coeffs = vec![BigRational::zero(); n as usize + 1];
    for (m, a) in legendre.iter().enumerate() {
        // (1 - 2x)^m = sum_j C(m, j) (-2)^j x^j
        let mut power = BigRational::one();
        for j in 0..=m {
            let c = BigRational::from_integer(binomial(m as u32, j as u32)) * &power;
            coeffs[j] += a * c;
            power *= big(-2);
        }
    }
    coeffs
}

fn trace_rational(n: u32, k: u32, edge: EdgeLabel) -> Vec<BigRational> {
    match edge {
        EdgeLabel::I => trace_one_rational(n, k),
        EdgeLabel::II => {
            let mut t = trace_one_rational(n, k);
            if k % 2 == 1 {
                for c in t.iter_mut() {
                    *c = -c.clone();
                }
            }
            t
        }
        EdgeLabel::III => trace_three_rational(n, k),
    }
}

/// Coefficients on `[0, 1]` of the restriction of `b_{n,k}` to an edge.
///
/// Edge `II` is `(-1)^k` times edge `I` by the mirror symmetry
/// `b_{n,k}(x1, x2) = (-1)^k b_{n,k}(x2, x1)`; edge `III` reduces to a
/// Legendre polynomial in the edge parameter.
pub fn edge_trace(n: u32, k: u32, edge: EdgeLabel) -> Result<Poly1> {
    if k > n {
        return Err(Error::IndexOutOfRange(format!(
            "k = {k} exceeds degree n = {n}"
        )));
    }
    let coeffs = trace_rational(n, k, edge)
        .iter()
        .map(|c| {
            c.to_f64()
                .ok_or_else(|| Error::Internal("trace coefficient overflow".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Poly1::new(coeffs))
}

/// Matrix whose k-th column holds the monomial coefficients of the trace of
/// `b_{n,k}` on the given edge.
pub fn trace_matrix(n: u32, edge: EdgeLabel) -> DMatrix<f64> {
    let dim = n as usize + 1;
    let mut m = DMatrix::zeros(dim, dim);
    for k in 0..=n {
        let trace = edge_trace(n, k, edge).expect("k <= n");
        for (row, c) in trace.coeffs.iter().enumerate() {
            m[(row, k as usize)] = *c;
        }
    }
    m
}

/// Trace on an edge of a polynomial given by orthogonal coefficients.
pub fn edge_trace_of(coeffs: &OrthoCoeffs, edge: EdgeLabel) -> Poly1 {
    let n = coeffs.degree();
    let mut out = Poly1::zero(n as usize);
    for (k, c) in coeffs.coeffs().iter().enumerate() {
        if *c == 0.0 {
            continue;
        }
        let t = edge_trace(n, k as u32, edge).expect("k <= n");
        for (row, tc) in t.coeffs.iter().enumerate() {
            out.coeffs[row] += c * tc;
        }
    }
    out
}

/// Exact Gaussian elimination over the rationals; `None` for a singular matrix.
fn solve_rational(
    mut a: Vec<Vec<BigRational>>,
    mut b: Vec<BigRational>,
) -> Option<Vec<BigRational>> {
    let dim = b.len();
    for col in 0..dim {
        let pivot_row = (col..dim).find(|row| !a[*row][col].is_zero())?;
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot = a[col][col].clone();
        for row in (col + 1)..dim {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = &a[row][col] / &pivot;
            for c in col..dim {
                let delta = &factor * &a[col][c];
                a[row][c] -= delta;
            }
            let delta = &factor * &b[col];
            b[row] -= delta;
        }
    }
    let mut x = vec![BigRational::zero(); dim];
    for row in (0..dim).rev() {
        let mut value = b[row].clone();
        for col in (row + 1)..dim {
            value -= &a[row][col] * &x[col];
        }
        x[row] = value / &a[row][row];
    }
    Some(x)
}

/// Unique orthogonal polynomial of degree `n` whose trace on the given edge
/// equals `v`. Requires `deg v <= n`.
///
/// The trace matrix is mildly ill-conditioned in the monomial basis for the
/// larger supported degrees, so the linear system is solved exactly over the
/// rationals; only the input and output coefficients live in `f64`.
pub fn extend_from_edge(v: &Poly1, edge: EdgeLabel, n: u32) -> Result<OrthoCoeffs> {
    if v.degree() > n as usize {
        return Err(Error::InvalidParameter(format!(
            "trace polynomial of formal degree {} does not fit degree {n}",
            v.degree()
        )));
    }
    let dim = n as usize + 1;
    let mut matrix = vec![vec![BigRational::zero(); dim]; dim];
    for k in 0..=n {
        for (row, c) in trace_rational(n, k, edge).into_iter().enumerate() {
            matrix[row][k as usize] = c;
        }
    }
    let mut rhs = vec![BigRational::zero(); dim];
    for (i, c) in v.coeffs.iter().enumerate() {
        rhs[i] = BigRational::from_float(*c)
            .ok_or_else(|| Error::InvalidParameter(format!("non-finite coefficient {c}")))?;
    }
    let solution = solve_rational(matrix, rhs)
        .ok_or_else(|| Error::Internal("edge trace system is singular".into()))?;
    let coeffs = solution
        .iter()
        .map(|c| {
            c.to_f64()
                .ok_or_else(|| Error::Internal("extension coefficient overflow".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    OrthoCoeffs::new(n, coeffs)
}

/// Largest moment of `b_{n,k}` against the monomials of total degree
/// `<= n-1`, computed with the supplied triangle quadrature
/// (exactness at least `2n` required).
pub fn ortho_check(n: u32, k: u32, quad: &QuadratureRule<2>) -> Result<f64> {
    if k > n {
        return Err(Error::IndexOutOfRange(format!(
            "k = {k} exceeds degree n = {n}"
        )));
    }
    if quad.exactness < 2 * n {
        return Err(Error::InvalidParameter(format!(
            "quadrature exactness {} is below the required 2n = {}",
            quad.exactness,
            2 * n
        )));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let values: Vec<f64> = quad
        .points
        .iter()
        .map(|p| proriol_eval_raw(n, k, p[0], p[1]))
        .collect();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..(n - a) {
            let moment: f64 = quad
                .points
                .iter()
                .zip(&quad.weights)
                .zip(&values)
                .map(|((p, w), v)| w * v * p[0].powi(a as i32) * p[1].powi(b as i32))
                .sum();
            worst = worst.max(moment.abs());
        }
    }
    Ok(worst)
}
