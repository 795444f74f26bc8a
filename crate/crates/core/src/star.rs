//! Continuous piecewise orthogonal polynomials on triangle stars.
//!
//! A triangle star is a fan of `m >= 3` triangles sharing a center vertex and
//! covering its neighborhood. Each triangle carries a pullback to the
//! reference triangle whose argument order alternates with the triangle
//! parity; gluing the basis polynomial `b_{p,k}` through these pullbacks is
//! continuous for every `k` when `m` is even and exactly for even `k` when
//! `m` is odd.

use nalgebra::{Matrix2, Point2, Vector2};

use crate::error::{Error, Result};
use crate::ortho::OrthoCoeffs;

/// Affine bijection from the reference triangle onto a physical triangle.
#[derive(Clone, Copy, Debug)]
pub struct AffineMap2 {
    pub origin: Point2<f64>,
    pub jac: Matrix2<f64>,
    inv: Matrix2<f64>,
}

impl AffineMap2 {
    pub fn new(origin: Point2<f64>, jac: Matrix2<f64>) -> Result<Self> {
        let inv = jac
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter("degenerate triangle map".into()))?;
        Ok(Self { origin, jac, inv })
    }

    pub fn apply(&self, x1: f64, x2: f64) -> Point2<f64> {
        self.origin + self.jac * Vector2::new(x1, x2)
    }

    pub fn pull_back(&self, point: Point2<f64>) -> (f64, f64) {
        let local = self.inv * (point - self.origin);
        (local.x, local.y)
    }

    pub fn det(&self) -> f64 {
        self.jac.determinant()
    }
}

/// Fan of triangles around a common center vertex, outer vertices in
/// counterclockwise cyclic order.
#[derive(Clone, Debug)]
pub struct TriangleStar {
    center: Point2<f64>,
    outer: Vec<Point2<f64>>,
    pullbacks: Vec<AffineMap2>,
}

impl TriangleStar {
    pub fn new(center: Point2<f64>, outer: Vec<Point2<f64>>) -> Result<Self> {
        let m = outer.len();
        if m < 3 {
            return Err(Error::InvalidParameter(format!(
                "a triangle star needs at least 3 triangles, got {m}"
            )));
        }
        let mut pullbacks = Vec::with_capacity(m);
        for l in 1..=m {
            let a_l = outer[l - 1];
            let a_next = outer[l % m];
            // counterclockwise fan; the map determinant alternates with the
            // argument order, so orientation is checked on the raw triangle
            let e1 = a_l - center;
            let e2 = a_next - center;
            if e1.x * e2.y - e1.y * e2.x <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "triangle {l} of the star is degenerate or not counterclockwise"
                )));
            }
            let (first, second) = if l % 2 == 1 {
                (a_l, a_next)
            } else {
                (a_next, a_l)
            };
            let jac = Matrix2::from_columns(&[first - center, second - center]);
            pullbacks.push(AffineMap2::new(center, jac)?);
        }
        Ok(Self {
            center,
            outer,
            pullbacks,
        })
    }

    /// Star of `m` congruent triangles fanning a regular m-gon around the
    /// origin.
    pub fn regular(m: usize) -> Result<Self> {
        let outer = (0..m)
            .map(|l| {
                let angle = 2.0 * std::f64::consts::PI * l as f64 / m as f64;
                Point2::new(angle.cos(), angle.sin())
            })
            .collect();
        Self::new(Point2::origin(), outer)
    }

    pub fn triangle_count(&self) -> usize {
        self.outer.len()
    }

    pub fn center(&self) -> Point2<f64> {
        self.center
    }

    pub fn outer_vertex(&self, l: usize) -> Point2<f64> {
        self.outer[l % self.outer.len()]
    }

    /// Pullback of triangle `T_l` (1-based, `T_l` spans the center and the
    /// outer vertices `l`, `l+1`).
    pub fn pullback(&self, l: usize) -> &AffineMap2 {
        &self.pullbacks[l - 1]
    }

    /// The two triangles adjacent to the interior edge from the center to
    /// outer vertex `l` (1-based).
    fn edge_neighbors(&self, l: usize) -> (usize, usize) {
        let m = self.outer.len();
        if l == 1 {
            (m, 1)
        } else {
            (l - 1, l)
        }
    }
}

/// Per-triangle orthogonal coefficients of a piecewise polynomial on a star.
#[derive(Clone, Debug)]
pub struct StarFunction {
    pub degree: u32,
    pub per_triangle: Vec<OrthoCoeffs>,
}

impl StarFunction {
    /// Evaluate on triangle `l` (1-based) at a physical point.
    pub fn eval_on(&self, star: &TriangleStar, l: usize, point: Point2<f64>) -> f64 {
        let (x1, x2) = star.pullback(l).pull_back(point);
        self.per_triangle[l - 1].eval_xy(x1, x2)
    }
}

/// Dimension of the continuous piecewise orthogonal space on a star of `m_c`
/// triangles: `p+1` for even `m_c`, `floor(p/2)+1` for odd `m_c`.
pub fn star_dim(p: u32, m_c: usize) -> Result<usize> {
    if m_c < 3 {
        return Err(Error::InvalidParameter(format!(
            "a triangle star needs at least 3 triangles, got {m_c}"
        )));
    }
    Ok(if m_c.is_multiple_of(2) {
        p as usize + 1
    } else {
        p as usize / 2 + 1
    })
}

/// Index set of the basis polynomials that glue continuously: all `k` for an
/// even number of triangles, even `k` otherwise.
pub fn star_indices(p: u32, m_c: usize) -> Vec<u32> {
    if m_c.is_multiple_of(2) {
        (0..=p).collect()
    } else {
        (0..=p).step_by(2).collect()
    }
}

/// The continuous basis functions `b^C_{p,k}`, each represented by the same
/// coefficient vector `e_k` on every triangle of the star.
pub fn star_basis(p: u32, star: &TriangleStar) -> Vec<StarFunction> {
    star_indices(p, star.triangle_count())
        .into_iter()
        .map(|k| StarFunction {
            degree: p,
            per_triangle: (0..star.triangle_count())
                .map(|_| OrthoCoeffs::unit(p, k).unwrap())
                .collect(),
        })
        .collect()
}

const MEMBERSHIP_SAMPLES: usize = 50;
const MEMBERSHIP_TOL: f64 = 1e-9;

fn chebyshev_points(count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |j| {
        0.5 * (1.0 + (std::f64::consts::PI * (2.0 * j as f64 + 1.0) / (2.0 * count as f64)).cos())
    })
}

/// Continuity check across all interior edges of the star: returns whether
/// the root-mean-square trace mismatch at sampled edge points stays below
/// `1e-9`, together with the residual itself.
pub fn check_star_membership(f: &StarFunction, star: &TriangleStar) -> Result<(bool, f64)> {
    let m = star.triangle_count();
    if f.per_triangle.len() != m {
        return Err(Error::InvalidParameter(format!(
            "function has {} triangles, star has {m}",
            f.per_triangle.len()
        )));
    }
    for coeffs in &f.per_triangle {
        if coeffs.degree() != f.degree {
            return Err(Error::InvalidParameter(
                "per-triangle degree mismatch".into(),
            ));
        }
    }
    let mut sum_sq = 0.0;
    let mut samples = 0usize;
    for l in 1..=m {
        let (left, right) = star.edge_neighbors(l);
        let a_l = star.outer_vertex(l - 1);
        for t in chebyshev_points(MEMBERSHIP_SAMPLES) {
            let point = star.center() + (a_l - star.center()) * t;
            let from_left = f.eval_on(star, left, point);
            let from_right = f.eval_on(star, right, point);
            sum_sq += (from_left - from_right).powi(2);
            samples += 1;
        }
    }
    let residual = (sum_sq / samples as f64).sqrt();
    Ok((residual <= MEMBERSHIP_TOL, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::simplex_quadrature;
    use crate::s3::span_rank;
    use nalgebra::DMatrix;

    #[test]
    fn dimension_formula() {
        assert_eq!(star_dim(3, 3).unwrap(), 2);
        assert_eq!(star_dim(3, 4).unwrap(), 4);
        assert_eq!(star_dim(0, 5).unwrap(), 1);
        assert!(star_dim(2, 2).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(TriangleStar::regular(3).is_ok());
        assert!(TriangleStar::regular(2).is_err());
        // collinear outer vertex makes a degenerate triangle
        let bad = TriangleStar::new(
            Point2::origin(),
            vec![
                Point2::new(1.0, 0.0),
                Point2::new(2.0, 0.0),
                Point2::new(0.0, 1.0),
            ],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn basis_counts_match_dimension() {
        for m in 3..=6usize {
            let star = TriangleStar::regular(m).unwrap();
            for p in 0..=8u32 {
                let basis = star_basis(p, &star);
                assert_eq!(basis.len(), star_dim(p, m).unwrap(), "p={p} m={m}");
                if m % 2 == 1 {
                    for f in &basis {
                        for coeffs in &f.per_triangle {
                            for (k, c) in coeffs.coeffs().iter().enumerate() {
                                if k % 2 == 1 {
                                    assert_eq!(*c, 0.0, "odd-index coefficient on odd star");
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn basis_functions_are_continuous() {
        // two-sided edge agreement at sampled points
        for m in 3..=6usize {
            let star = TriangleStar::regular(m).unwrap();
            for p in 0..=8u32 {
                for (i, f) in star_basis(p, &star).iter().enumerate() {
                    for l in 1..=m {
                        let (left, right) = star.edge_neighbors(l);
                        let a_l = star.outer_vertex(l - 1);
                        for t in chebyshev_points(50) {
                            let point = star.center() + (a_l - star.center()) * t;
                            let lv = f.eval_on(&star, left, point);
                            let rv = f.eval_on(&star, right, point);
                            assert!(
                                (lv - rv).abs() <= 1e-11 * lv.abs().max(1.0),
                                "p={p} m={m} basis {i} edge {l}: {lv} vs {rv}"
                            );
                        }
                    }
                    let (ok, residual) = check_star_membership(f, &star).unwrap();
                    assert!(ok, "p={p} m={m} basis {i}: residual {residual}");
                }
            }
        }
    }

    #[test]
    fn basis_functions_are_independent() {
        // Gram matrix by per-triangle quadrature; full rank at several sizes.
        for m in 3..=6usize {
            let star = TriangleStar::regular(m).unwrap();
            for p in [2u32, 5, 8] {
                let basis = star_basis(p, &star);
                let quad = simplex_quadrature::<2>(2 * p).unwrap();
                let dim = basis.len();
                let mut gram = DMatrix::zeros(dim, dim);
                for i in 0..dim {
                    for j in 0..dim {
                        let mut total = 0.0;
                        for l in 1..=m {
                            let scale = star.pullback(l).det().abs();
                            total += scale
                                * quad.integrate(|pt| {
                                    basis[i].per_triangle[l - 1].eval_xy(pt[0], pt[1])
                                        * basis[j].per_triangle[l - 1].eval_xy(pt[0], pt[1])
                                });
                        }
                        gram[(i, j)] = total;
                    }
                }
                let columns: Vec<_> = (0..dim).map(|j| gram.column(j).into_owned()).collect();
                assert_eq!(span_rank(&columns), dim, "p={p} m={m}");
            }
        }
    }

    #[test]
    fn membership_rejects_one_sided_odd_function() {
        let star = TriangleStar::regular(3).unwrap();
        for p in 1..=4u32 {
            let mut per_triangle = vec![OrthoCoeffs::zero(p); 3];
            per_triangle[0] = OrthoCoeffs::unit(p, 1).unwrap();
            let f = StarFunction {
                degree: p,
                per_triangle,
            };
            let (ok, residual) = check_star_membership(&f, &star).unwrap();
            assert!(
                !ok,
                "p={p}: odd one-sided function accepted (residual {residual})"
            );
        }
    }

    #[test]
    fn membership_accepts_zero_and_checks_shape() {
        let star = TriangleStar::regular(4).unwrap();
        let zero = StarFunction {
            degree: 3,
            per_triangle: vec![OrthoCoeffs::zero(3); 4],
        };
        let (ok, residual) = check_star_membership(&zero, &star).unwrap();
        assert!(ok);
        assert_eq!(residual, 0.0);

        let wrong = StarFunction {
            degree: 3,
            per_triangle: vec![OrthoCoeffs::zero(3); 3],
        };
        assert!(check_star_membership(&wrong, &star).is_err());
        let mixed = StarFunction {
            degree: 3,
            per_triangle: vec![
                OrthoCoeffs::zero(3),
                OrthoCoeffs::zero(2),
                OrthoCoeffs::zero(3),
                OrthoCoeffs::zero(3),
            ],
        };
        assert!(check_star_membership(&mixed, &star).is_err());
    }
}
