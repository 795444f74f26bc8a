//! Gauss quadrature on the reference simplices.
//!
//! Rules on the unit triangle and tetrahedron are built as collapsed
//! (square-to-simplex) tensor products of one-dimensional Gauss-Jacobi
//! rules, so all weights are positive and the exactness degree is an input
//! parameter rather than a fixed table.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest supported polynomial exactness for a simplex rule.
pub const MAX_EXACTNESS: u32 = 40;

/// Quadrature points and weights on the unit simplex of dimension `D`
/// (`D = 2`: triangle with vertices 0, e1, e2; `D = 3`: tetrahedron).
#[derive(Clone, Debug)]
pub struct QuadratureRule<const D: usize> {
    pub points: Vec<[f64; D]>,
    pub weights: Vec<f64>,
    pub exactness: u32,
}

impl<const D: usize> QuadratureRule<D> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Apply the rule to a function on the reference simplex.
    pub fn integrate(&self, mut f: impl FnMut(&[f64; D]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

/// Recurrence coefficients of monic Jacobi polynomials for the weight
/// `(1-x)^alpha (1+x)^beta` on `[-1, 1]`, then nodes/weights by the
/// Golub-Welsch eigenvalue construction.
fn gauss_jacobi_m11(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mu0 = {
        // 2^(a+b+1) * B(a+1, b+1) for the small integer exponents used here.
        let gamma = |x: f64| -> f64 {
            // x is a positive integer in all call sites
            (1..x as u64).map(|k| k as f64).product::<f64>().max(1.0)
        };
        2f64.powf(alpha + beta + 1.0) * gamma(alpha + 1.0) * gamma(beta + 1.0)
            / gamma(alpha + beta + 2.0)
    };
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (beta - alpha) / (alpha + beta + 2.0)
        } else {
            (beta * beta - alpha * alpha)
                / ((2.0 * kf + alpha + beta) * (2.0 * kf + alpha + beta + 2.0))
        };
        jacobi[(k, k)] = diag;
        if k + 1 < n {
            let kf = kf + 1.0;
            let b = if k == 0 {
                4.0 * (1.0 + alpha) * (1.0 + beta)
                    / ((2.0 + alpha + beta).powi(2) * (3.0 + alpha + beta))
            } else {
                4.0 * kf * (kf + alpha) * (kf + beta) * (kf + alpha + beta)
                    / ((2.0 * kf + alpha + beta).powi(2)
                        * (2.0 * kf + alpha + beta + 1.0)
                        * (2.0 * kf + alpha + beta - 1.0))
            };
            jacobi[(k, k + 1)] = b.sqrt();
            jacobi[(k + 1, k)] = b.sqrt();
        }
    }
    let eigen = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            (
                eigen.eigenvalues[i],
                mu0 * eigen.eigenvectors[(0, i)].powi(2),
            )
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Gauss-Legendre rule with `n` points on `[-1, 1]` (exact through degree `2n-1`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_jacobi_m11(n, 0.0, 0.0)
}

/// Rule with `n` points for the weight `(1-t)^alpha` on `[0, 1]`:
/// `sum w_i f(t_i) = integral of (1-t)^alpha f(t) dt`, exact for
/// `deg f <= 2n-1`.
pub fn gauss_jacobi_01(n: usize, alpha: u32) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_jacobi_m11(n, alpha as f64, 0.0);
    let scale = 2f64.powi(alpha as i32 + 1);
    x.into_iter()
        .map(|xi| (1.0 + xi) / 2.0)
        .zip(w.into_iter().map(|wi| wi / scale))
        .unzip()
}

fn points_for(exactness: u32) -> usize {
    (exactness as usize + 2) / 2
}

/// Collapsed-coordinate Gauss rule on the unit simplex, exact for all
/// polynomials of total degree `<= exactness`.
pub fn simplex_quadrature<const D: usize>(exactness: u32) -> Result<QuadratureRule<D>> {
    if exactness > MAX_EXACTNESS {
        return Err(Error::InvalidParameter(format!(
            "quadrature exactness {exactness} exceeds the supported maximum {MAX_EXACTNESS}"
        )));
    }
    let n = points_for(exactness);
    let (tu, wu) = gauss_jacobi_01(n, 0);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match D {
        2 => {
            let (tv, wv) = gauss_jacobi_01(n, 1);
            for (u, wu) in tu.iter().zip(&wu) {
                for (v, wv) in tv.iter().zip(&wv) {
                    let mut p = [0.0; D];
                    p[0] = u * (1.0 - v);
                    p[1] = *v;
                    points.push(p);
                    weights.push(wu * wv);
                }
            }
        }
        3 => {
            let (tv, wv) = gauss_jacobi_01(n, 1);
            let (tw, ww) = gauss_jacobi_01(n, 2);
            for (u, wu) in tu.iter().zip(&wu) {
                for (v, wv) in tv.iter().zip(&wv) {
                    for (w, ww) in tw.iter().zip(&ww) {
                        let mut p = [0.0; D];
                        p[0] = u * (1.0 - v) * (1.0 - w);
                        p[1] = v * (1.0 - w);
                        p[2] = *w;
                        points.push(p);
                        weights.push(wu * wv * ww);
                    }
                }
            }
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "simplex quadrature is implemented for dimensions 2 and 3, not {D}"
            )))
        }
    }
    Ok(QuadratureRule {
        points,
        weights,
        exactness,
    })
}
