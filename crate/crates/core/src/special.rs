//! Scalar special-function kernels.
//!
//! Shifted factorials, Jacobi and Legendre polynomial evaluation, and the
//! hypergeometric coefficient sums that enter the reflection/symmetrization
//! matrices. Jacobi values are computed with the stable three-term
//! recurrence; the terminating-series coefficients are evaluated in exact
//! rational arithmetic because the alternating sums lose accuracy in floating
//! point for degrees above ten.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Shifted factorial (Pochhammer symbol) `(a)_n = a (a+1) ... (a+n-1)`,
/// with `(a)_0 = 1`.
pub fn shifted_factorial(a: f64, n: u32) -> f64 {
    let mut prod = 1.0;
    for m in 0..n {
        prod *= a + m as f64;
    }
    prod
}

fn rational(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `(a)_n` over the rationals.
pub(crate) fn shifted_factorial_rational(a: &BigRational, n: u32) -> BigRational {
    let mut prod = BigRational::one();
    let mut factor = a.clone();
    for _ in 0..n {
        prod *= &factor;
        factor += BigRational::one();
    }
    prod
}

/// Degree and exponent pair of a Jacobi polynomial `P_n^{(alpha,beta)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiParams {
    pub n: u32,
    pub alpha: f64,
    pub beta: f64,
}

impl JacobiParams {
    /// Requires `alpha > -1` and `beta > -1`.
    pub fn new(n: u32, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0) || !(beta > -1.0) {
            return Err(Error::InvalidParameter(format!(
                "Jacobi exponents must be > -1, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self { n, alpha, beta })
    }
}

/// Value of the Jacobi polynomial `P_n^{(alpha,beta)}(x)`.
///
/// Normalized so that `P_n(1) = (alpha+1)_n / n!` and
/// `P_n(-1) = (-1)^n (beta+1)_n / n!`.
pub fn jacobi_eval(params: JacobiParams, x: f64) -> f64 {
    let JacobiParams {
        n,
        alpha: a,
        beta: b,
    } = params;
    if n == 0 {
        return 1.0;
    }
    // P_1 cannot come out of the generic recurrence when alpha+beta = 0.
    let p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    if n == 1 {
        return p1;
    }
    let mut prev = 1.0;
    let mut cur = p1;
    for m in 2..=n {
        let m = m as f64;
        let c = 2.0 * m + a + b;
        let denom = 2.0 * m * (m + a + b) * (c - 2.0);
        let c1 = (c - 1.0) * (c * (c - 2.0) * x + a * a - b * b);
        let c2 = 2.0 * (m + a - 1.0) * (m + b - 1.0) * c;
        let next = (c1 * cur - c2 * prev) / denom;
        prev = cur;
        cur = next;
    }
    cur
}

/// Legendre polynomial `P_k(x) = P_k^{(0,0)}(x)` by the three-term recursion
/// `(k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}`.
pub fn legendre_eval(k: u32, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = x;
    for m in 1..k {
        let m = m as f64;
        let next = ((2.0 * m + 1.0) * x * cur - m * prev) / (m + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Exact rational value of the symmetrization-matrix entry
///
/// `M_{i,j}^{(p)} = (-1)^p 4F3(-j, j+1, -i, i+1; -p, p+2, 1; 1) (2i+1)/(p+1)`,
///
/// where the hypergeometric sum terminates at `min(i, j)` so that no `0/0`
/// term of the formal series is touched.
pub(crate) fn m_coeff_rational(p: u32, i: u32, j: u32) -> Result<BigRational> {
    if i > p || j > p {
        return Err(Error::IndexOutOfRange(format!(
            "matrix entry ({i}, {j}) outside degree-{p} range"
        )));
    }
    let terms = i.min(j);
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    for l in 0..=terms {
        sum += &term;
        if l == terms {
            break;
        }
        let l = l as i64;
        let (i, j, p) = (i as i64, j as i64, p as i64);
        let numer = rational(-j + l) * rational(j + 1 + l) * rational(-i + l) * rational(i + 1 + l);
        let denom = rational(-p + l) * rational(p + 2 + l) * rational(1 + l) * rational(1 + l);
        term *= numer / denom;
    }
    let sign = if p.is_multiple_of(2) { 1 } else { -1 };
    Ok(sum * rational(sign) * rational(2 * i as i64 + 1) / rational(p as i64 + 1))
}

/// Floating-point value of `M_{i,j}^{(p)}`; the sum itself is carried out in
/// exact rational arithmetic.
pub fn m_coeff(p: u32, i: u32, j: u32) -> Result<f64> {
    let value = m_coeff_rational(p, i, j)?;
    value.to_f64().ok_or_else(|| {
        Error::Internal(format!(
            "rational value for M[{i},{j}] (p={p}) overflows f64"
        ))
    })
}
