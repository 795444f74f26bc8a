//! Decomposition of the triangle orthogonal polynomials under vertex
//! permutations.
//!
//! The six affine maps of the reference triangle onto itself act on the
//! degree-n orthogonal space; the action is generated by the reflection
//! `R: f(x1,x2) -> f(x2,x1)` and `M: f(x1,x2) -> f(1-x1-x2,x2)`. In the
//! `{b_{n,k}}` basis `R` is a diagonal sign matrix and `M` has terminating
//! 4F3 entries. The space splits into a totally symmetric part, a sign part
//! and a two-dimensional-representation ("reflection") part; this module
//! builds explicit bases for all three and the projection onto the last.
//!
//! Composition convention: the group elements named `RM` and `MR` act
//! pointwise as `RMf(x1,x2) = f(x2, 1-x1-x2)` and
//! `MRf(x1,x2) = f(1-x1-x2, x1)`; on coefficient vectors these are the
//! matrix products `M*R` and `R*M` respectively (the operator written first
//! acts first on the argument).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ortho::OrthoCoeffs;
use crate::special::m_coeff;

/// Multiplicities of the three irreducible components inside the degree-n
/// orthogonal polynomial space; `d_triv + d_sign + 2 d_refl = n + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Multiplicities {
    pub d_triv: usize,
    pub d_sign: usize,
    pub d_refl: usize,
}

fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

/// `d_triv = floor(n/2) - floor((n-1)/3)`, `d_sign = floor((n-1)/2) - floor((n-1)/3)`,
/// `d_refl = floor((n+2)/3)`.
pub fn multiplicities(n: u32) -> Multiplicities {
    let n = n as i64;
    let d_triv = floor_div(n, 2) - floor_div(n - 1, 3);
    let d_sign = floor_div(n - 1, 2) - floor_div(n - 1, 3);
    let d_refl = floor_div(n + 2, 3);
    Multiplicities {
        d_triv: d_triv as usize,
        d_sign: d_sign as usize,
        d_refl: d_refl as usize,
    }
}

/// The generator matrices on coefficient vectors for one degree.
#[derive(Clone, Debug)]
pub struct S3Matrices {
    degree: u32,
    pub r: DMatrix<f64>,
    pub m: DMatrix<f64>,
}

impl S3Matrices {
    pub fn new(degree: u32) -> Self {
        let dim = degree as usize + 1;
        let mut r = DMatrix::zeros(dim, dim);
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            r[(i, i)] = if i % 2 == 0 { 1.0 } else { -1.0 };
            for j in 0..dim {
                m[(i, j)] = m_coeff(degree, i as u32, j as u32).expect("indices in range");
            }
        }
        Self { degree, r, m }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    fn check_degree(&self, coeffs: &OrthoCoeffs) {
        assert_eq!(
            self.degree,
            coeffs.degree(),
            "degree mismatch with S3 matrices"
        );
    }

    /// Coefficients of `x -> f(x2, x1)`.
    pub fn apply_r(&self, coeffs: &OrthoCoeffs) -> OrthoCoeffs {
        self.check_degree(coeffs);
        OrthoCoeffs::from_vector(self.degree, &(&self.r * coeffs.as_vector())).unwrap()
    }

    /// Coefficients of `x -> f(1-x1-x2, x2)`.
    pub fn apply_m(&self, coeffs: &OrthoCoeffs) -> OrthoCoeffs {
        self.check_degree(coeffs);
        OrthoCoeffs::from_vector(self.degree, &(&self.m * coeffs.as_vector())).unwrap()
    }

    /// Coefficients of `x -> f(x2, 1-x1-x2)` (the rotation called `RM`).
    pub fn apply_rm(&self, coeffs: &OrthoCoeffs) -> OrthoCoeffs {
        self.check_degree(coeffs);
        let v = &self.m * (&self.r * coeffs.as_vector());
        OrthoCoeffs::from_vector(self.degree, &v).unwrap()
    }

    /// Coefficients of `x -> f(1-x1-x2, x1)` (the rotation called `MR`).
    pub fn apply_mr(&self, coeffs: &OrthoCoeffs) -> OrthoCoeffs {
        self.check_degree(coeffs);
        let v = &self.r * (&self.m * coeffs.as_vector());
        OrthoCoeffs::from_vector(self.degree, &v).unwrap()
    }

    /// Matrix of the projection `Pi = (2I - MR - RM)/3` onto the reflection
    /// component.
    pub fn projection_matrix(&self) -> DMatrix<f64> {
        let dim = self.degree as usize + 1;
        let rm = &self.m * &self.r;
        let mr = &self.r * &self.m;
        (DMatrix::identity(dim, dim) * 2.0 - rm - mr) / 3.0
    }

    /// Apply `Pi` to a coefficient vector.
    pub fn project_refl(&self, coeffs: &OrthoCoeffs) -> OrthoCoeffs {
        self.check_degree(coeffs);
        let v = self.projection_matrix() * coeffs.as_vector();
        OrthoCoeffs::from_vector(self.degree, &v).unwrap()
    }
}

/// `s3_matrices(n)` — convenience constructor mirroring [`S3Matrices::new`].
pub fn s3_matrices(n: u32) -> S3Matrices {
    S3Matrices::new(n)
}

/// Apply the reflection projection without keeping the matrices around.
pub fn project_refl(coeffs: &OrthoCoeffs) -> OrthoCoeffs {
    S3Matrices::new(coeffs.degree()).project_refl(coeffs)
}

/// `r_{p,2k} = 2 sum_j M_{2j,2k} b_{p,2j} + b_{p,2k}` (totally symmetric).
fn r_even(matrices: &S3Matrices, two_k: usize) -> OrthoCoeffs {
    let p = matrices.degree();
    let mut coeffs = vec![0.0; p as usize + 1];
    let mut j = 0;
    while 2 * j <= p as usize {
        coeffs[2 * j] += 2.0 * matrices.m[(2 * j, two_k)];
        j += 1;
    }
    coeffs[two_k] += 1.0;
    OrthoCoeffs::new(p, coeffs).unwrap()
}

/// `r_{p,2k+1} = -2 sum_j M_{2j+1,2k+1} b_{p,2j+1} + b_{p,2k+1}` (sign type).
fn r_odd(matrices: &S3Matrices, two_k_plus_one: usize) -> OrthoCoeffs {
    let p = matrices.degree();
    let mut coeffs = vec![0.0; p as usize + 1];
    let mut j = 0;
    while 2 * j < p as usize {
        coeffs[2 * j + 1] -= 2.0 * matrices.m[(2 * j + 1, two_k_plus_one)];
        j += 1;
    }
    coeffs[two_k_plus_one] += 1.0;
    OrthoCoeffs::new(p, coeffs).unwrap()
}

/// Basis of the totally symmetric orthogonal polynomials of degree `p`.
#[derive(Clone, Debug)]
pub struct SymBasis {
    pub degree: u32,
    pub functions: Vec<OrthoCoeffs>,
}

/// `b_{p,k}^sym = r_{p,p-2k}` for even `p`, `r_{p,p-1-2k}` for odd `p`,
/// `k = 0 .. d_triv(p)-1`.
pub fn sym_basis(p: u32) -> SymBasis {
    let matrices = S3Matrices::new(p);
    let d_triv = multiplicities(p).d_triv;
    let start = if p.is_multiple_of(2) {
        p as usize
    } else {
        p as usize - 1
    };
    let functions = (0..d_triv)
        .map(|k| r_even(&matrices, start - 2 * k))
        .collect();
    SymBasis {
        degree: p,
        functions,
    }
}

/// A linearly independent sign-type basis, selected from the candidates
/// `r_{p,2k+1}` by greedy Gram pivoting (threshold 1e-9 on the relative
/// residual after orthogonalization).
pub fn sign_basis(p: u32) -> Vec<OrthoCoeffs> {
    let target = multiplicities(p).d_sign;
    if target == 0 {
        return Vec::new();
    }
    let matrices = S3Matrices::new(p);
    let mut selected: Vec<OrthoCoeffs> = Vec::new();
    let mut ortho: Vec<OrthoCoeffs> = Vec::new();
    let mut index = 1;
    while index <= p as usize && selected.len() < target {
        let candidate = r_odd(&matrices, index);
        let norm2 = candidate.l2_inner(&candidate);
        let mut residual = candidate.as_vector();
        for q in &ortho {
            let coeff = candidate.l2_inner(q) / q.l2_inner(q);
            residual -= q.as_vector() * coeff;
        }
        let res = OrthoCoeffs::from_vector(p, &residual).unwrap();
        if norm2 > 0.0 && res.l2_inner(&res) > 1e-9 * norm2 {
            ortho.push(res);
            selected.push(candidate);
        }
        index += 2;
    }
    assert_eq!(
        selected.len(),
        target,
        "sign candidates did not span the sign component"
    );
    selected
}

/// Reflection basis member together with its two rotations.
#[derive(Clone, Debug)]
pub struct ReflTriple {
    /// `b_{p,k}^refl = Pi b_{p,2k}`, mirror symmetric through the bisector at 0.
    pub b: OrthoCoeffs,
    /// `RM b_{p,k}^refl`
    pub rm_b: OrthoCoeffs,
    /// `MR b_{p,k}^refl`
    pub mr_b: OrthoCoeffs,
}

/// The reflection-type basis of degree `p`: `d_refl(p)` triples whose members
/// sum to zero.
#[derive(Clone, Debug)]
pub struct ReflBasis {
    pub degree: u32,
    pub triples: Vec<ReflTriple>,
}

pub fn refl_basis(p: u32) -> Result<ReflBasis> {
    if p < 1 {
        return Err(Error::InvalidParameter(
            "reflection basis needs degree >= 1".into(),
        ));
    }
    let matrices = S3Matrices::new(p);
    let d_refl = multiplicities(p).d_refl;
    let mut triples = Vec::with_capacity(d_refl);
    for k in 0..d_refl {
        let seed = OrthoCoeffs::unit(p, 2 * k as u32).unwrap();
        let b = matrices.project_refl(&seed);
        let rm_b = matrices.apply_rm(&b);
        let mr_b = matrices.apply_mr(&b);
        triples.push(ReflTriple { b, rm_b, mr_b });
    }
    Ok(ReflBasis { degree: p, triples })
}

/// Vertex value `b_{p,0}^refl(1,0) = b_{p,0}^refl(0,1) = (1 - (-1)^p (p+1))/3`.
pub fn refl_vertex_constant(p: u32) -> f64 {
    let signed = if p.is_multiple_of(2) {
        (p + 1) as f64
    } else {
        -((p + 1) as f64)
    };
    (1.0 - signed) / 3.0
}

/// Real or complexified coefficient pair spanning one reflection module.
#[derive(Clone, Debug)]
pub struct ComplexOrthoCoeffs {
    pub re: OrthoCoeffs,
    pub im: OrthoCoeffs,
}

/// Alternative bases of the reflection component.
#[derive(Clone, Debug)]
pub enum AltReflBasis {
    /// `(T1 (I+R) b_{p,2k}, T2 (I+R) b_{p,2k})` with `T1 = I - MR`, `T2 = I - RM`.
    T1T2(Vec<(OrthoCoeffs, OrthoCoeffs)>),
    /// `(S1 b_{p,2k}, S2 b_{p,2k})` with
    /// `S1 = -(w T1 + w^2 T2)(I+R)/3`, `S2` its conjugate, `w = exp(2 pi i/3)`.
    S1S2(Vec<(ComplexOrthoCoeffs, ComplexOrthoCoeffs)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AltReflVariant {
    T1T2,
    S1S2,
}

pub fn alt_refl_bases(p: u32, variant: AltReflVariant) -> Result<AltReflBasis> {
    if p < 1 {
        return Err(Error::InvalidParameter(
            "reflection bases need degree >= 1".into(),
        ));
    }
    let matrices = S3Matrices::new(p);
    let d_refl = multiplicities(p).d_refl;
    let dim = p as usize + 1;
    let identity = DMatrix::<f64>::identity(dim, dim);
    // As matrix products T1 = I - M*R and T2 = I - R*M; this is the order
    // for which "M T1 (I+R) = -T1 (I+R)" holds entrywise.
    let t1 = &identity - &matrices.m * &matrices.r;
    let t2 = &identity - &matrices.r * &matrices.m;
    let i_plus_r = &identity + &matrices.r;
    let seeds: Vec<DVector<f64>> = (0..d_refl)
        .map(|k| OrthoCoeffs::unit(p, 2 * k as u32).unwrap().as_vector())
        .collect();
    match variant {
        AltReflVariant::T1T2 => {
            let pairs = seeds
                .iter()
                .map(|s| {
                    let shared = &i_plus_r * s;
                    let first = OrthoCoeffs::from_vector(p, &(&t1 * &shared)).unwrap();
                    let second = OrthoCoeffs::from_vector(p, &(&t2 * &shared)).unwrap();
                    (first, second)
                })
                .collect();
            Ok(AltReflBasis::T1T2(pairs))
        }
        AltReflVariant::S1S2 => {
            // w = -1/2 + i sqrt(3)/2; S1 b = (v1 + v2)/6 - i sqrt(3)(v1 - v2)/6
            // for v1 = T1(I+R)b, v2 = T2(I+R)b, and S2 b its conjugate.
            let sqrt3 = 3.0f64.sqrt();
            let pairs = seeds
                .iter()
                .map(|s| {
                    let shared = &i_plus_r * s;
                    let v1 = &t1 * &shared;
                    let v2 = &t2 * &shared;
                    let re = (&v1 + &v2) / 6.0;
                    let im = (&v1 - &v2) * (-sqrt3 / 6.0);
                    let s1 = ComplexOrthoCoeffs {
                        re: OrthoCoeffs::from_vector(p, &re).unwrap(),
                        im: OrthoCoeffs::from_vector(p, &im).unwrap(),
                    };
                    let s2 = ComplexOrthoCoeffs {
                        re: OrthoCoeffs::from_vector(p, &re).unwrap(),
                        im: OrthoCoeffs::from_vector(p, &(-&im)).unwrap(),
                    };
                    (s1, s2)
                })
                .collect();
            Ok(AltReflBasis::S1S2(pairs))
        }
    }
}

/// Numerical rank of the column span of the given coefficient vectors.
pub fn span_rank(vectors: &[DVector<f64>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let rows = vectors[0].len();
    let mut m = DMatrix::zeros(rows, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    let svd = m.svd(false, false);
    let max = svd.singular_values.max();
    if max == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|s| **s > 1e-9 * max)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::simplex_quadrature;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_triangle_points(count: usize, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = StdRng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let a: f64 = rng.random();
                let b: f64 = rng.random();
                if a + b <= 1.0 {
                    (a, b)
                } else {
                    (1.0 - a, 1.0 - b)
                }
            })
            .collect()
    }

    /// The six affine self-maps of the reference triangle.
    fn permutation_maps() -> Vec<Box<dyn Fn(f64, f64) -> (f64, f64)>> {
        vec![
            Box::new(|a, b| (a, b)),
            Box::new(|a, b| (b, a)),
            Box::new(|a, b| (1.0 - a - b, b)),
            Box::new(|a, b| (a, 1.0 - a - b)),
            Box::new(|a, b| (b, 1.0 - a - b)),
            Box::new(|a, b| (1.0 - a - b, a)),
        ]
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(
            multiplicities(6),
            Multiplicities {
                d_triv: 2,
                d_sign: 1,
                d_refl: 2
            }
        );
        assert_eq!(
            multiplicities(1),
            Multiplicities {
                d_triv: 0,
                d_sign: 0,
                d_refl: 1
            }
        );
        assert_eq!(
            multiplicities(2),
            Multiplicities {
                d_triv: 1,
                d_sign: 0,
                d_refl: 1
            }
        );
        assert_eq!(
            multiplicities(3),
            Multiplicities {
                d_triv: 1,
                d_sign: 1,
                d_refl: 1
            }
        );
        assert_eq!(
            multiplicities(0),
            Multiplicities {
                d_triv: 1,
                d_sign: 0,
                d_refl: 0
            }
        );
    }

    proptest! {
        #[test]
        fn multiplicities_partition_dimension(n in 0u32..=100) {
            let m = multiplicities(n);
            prop_assert_eq!(m.d_triv + m.d_sign + 2 * m.d_refl, n as usize + 1);
        }
    }

    #[test]
    fn degree_zero_and_one_matrices() {
        let m0 = S3Matrices::new(0);
        assert_eq!(m0.m[(0, 0)], 1.0);
        let m1 = S3Matrices::new(1);
        assert_abs_diff_eq!(m1.m[(0, 0)], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m1.m[(1, 0)], -1.5, epsilon = 1e-15);
        let sq = &m1.m * &m1.m;
        assert!((sq - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn group_relations_hold() {
        for n in 0..=12u32 {
            let s3 = S3Matrices::new(n);
            let dim = n as usize + 1;
            let id = DMatrix::<f64>::identity(dim, dim);
            assert!((&s3.m * &s3.m - &id).amax() <= 1e-10, "M^2 != I at n={n}");
            assert!((&s3.r * &s3.r - &id).amax() <= 1e-10, "R^2 != I at n={n}");
            let mr = &s3.r * &s3.m;
            assert!(
                (&mr * &mr * &mr - &id).amax() <= 1e-10,
                "(MR)^3 != I at n={n}"
            );
        }
    }

    #[test]
    fn s_matrix_parity_pattern() {
        for n in 0..=10u32 {
            let s3 = S3Matrices::new(n);
            let dim = n as usize + 1;
            let s = &s3.m * &s3.r + &s3.r * &s3.m + DMatrix::<f64>::identity(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                    let expected =
                        (sign(i) + sign(j)) * s3.m[(i, j)] + if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(s[(i, j)], expected, epsilon = 1e-12);
                    if (i + j) % 2 == 1 {
                        assert_abs_diff_eq!(s[(i, j)], 0.0, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn operator_actions_match_pointwise_composition() {
        let mut rng = StdRng::seed_from_u64(7);
        for n in 1..=7u32 {
            let s3 = S3Matrices::new(n);
            let coeffs =
                OrthoCoeffs::new(n, (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .unwrap();
            let m_applied = s3.apply_m(&coeffs);
            let r_applied = s3.apply_r(&coeffs);
            let rm_applied = s3.apply_rm(&coeffs);
            let mr_applied = s3.apply_mr(&coeffs);
            for (x1, x2) in random_triangle_points(40, 11 + n as u64) {
                let tol = 1e-10;
                assert_abs_diff_eq!(
                    m_applied.eval_xy(x1, x2),
                    coeffs.eval_xy(1.0 - x1 - x2, x2),
                    epsilon = tol
                );
                assert_abs_diff_eq!(
                    r_applied.eval_xy(x1, x2),
                    coeffs.eval_xy(x2, x1),
                    epsilon = tol
                );
                assert_abs_diff_eq!(
                    rm_applied.eval_xy(x1, x2),
                    coeffs.eval_xy(x2, 1.0 - x1 - x2),
                    epsilon = tol
                );
                assert_abs_diff_eq!(
                    mr_applied.eval_xy(x1, x2),
                    coeffs.eval_xy(1.0 - x1 - x2, x1),
                    epsilon = tol
                );
            }
        }
    }

    #[test]
    fn sym_basis_sizes_and_symmetry() {
        assert!(sym_basis(1).functions.is_empty());
        assert_eq!(sym_basis(2).functions.len(), 1);
        assert_eq!(sym_basis(6).functions.len(), 2);
        for p in 2..=8u32 {
            for f in &sym_basis(p).functions {
                for (x1, x2) in random_triangle_points(60, 100 + p as u64) {
                    let base = f.eval_xy(x1, x2);
                    for map in permutation_maps() {
                        let (y1, y2) = map(x1, x2);
                        assert!(
                            (f.eval_xy(y1, y2) - base).abs() <= 1e-11 * base.abs().max(1.0),
                            "p={p}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sym_basis_degree_six_is_independent() {
        // Gram determinant oracle via quadrature rather than closed-form norms.
        let basis = sym_basis(6);
        let quad = simplex_quadrature::<2>(12).unwrap();
        let mut gram = DMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                gram[(i, j)] = quad.integrate(|p| {
                    basis.functions[i].eval_xy(p[0], p[1]) * basis.functions[j].eval_xy(p[0], p[1])
                });
                let closed = basis.functions[i].l2_inner(&basis.functions[j]);
                assert_abs_diff_eq!(gram[(i, j)], closed, epsilon = 1e-10);
            }
        }
        assert!(gram.determinant() > 0.0);
    }

    #[test]
    fn sign_basis_properties() {
        assert!(sign_basis(1).is_empty());
        assert!(sign_basis(2).is_empty());
        let basis = sign_basis(3);
        assert_eq!(basis.len(), 1);
        for p in 3..=8u32 {
            let s3 = S3Matrices::new(p);
            let basis = sign_basis(p);
            assert_eq!(basis.len(), multiplicities(p).d_sign);
            for f in &basis {
                let rf = s3.apply_r(f);
                let mf = s3.apply_m(f);
                for (a, (b, c)) in f.coeffs().iter().zip(rf.coeffs().iter().zip(mf.coeffs())) {
                    assert!((b + a).abs() <= 1e-10, "Rf != -f at p={p}");
                    assert!((c + a).abs() <= 1e-10, "Mf != -f at p={p}");
                }
            }
        }
    }

    #[test]
    fn refl_triples_sum_to_zero_and_mirror() {
        assert!(refl_basis(0).is_err());
        for p in 1..=8u32 {
            let basis = refl_basis(p).unwrap();
            assert_eq!(basis.triples.len(), multiplicities(p).d_refl);
            for triple in &basis.triples {
                for i in 0..=(p as usize) {
                    let total =
                        triple.b.coeffs()[i] + triple.rm_b.coeffs()[i] + triple.mr_b.coeffs()[i];
                    assert!(total.abs() <= 1e-11, "triple sum at p={p}");
                }
                // mirror symmetry through the bisector at the origin
                for (x1, x2) in random_triangle_points(40, 500 + p as u64) {
                    let v = triple.b.eval_xy(x1, x2);
                    let w = triple.b.eval_xy(x2, x1);
                    assert!((v - w).abs() <= 1e-11 * v.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn refl_vertex_values() {
        assert_eq!(refl_vertex_constant(1), 1.0);
        assert_abs_diff_eq!(refl_vertex_constant(2), -2.0 / 3.0, epsilon = 1e-15);
        for p in 1..=12u32 {
            let c_p = refl_vertex_constant(p);
            assert!(c_p != 0.0);
            let b0 = &refl_basis(p).unwrap().triples[0].b;
            let at_10 = b0.eval_xy(1.0, 0.0);
            let at_01 = b0.eval_xy(0.0, 1.0);
            let scale = c_p.abs().max(1.0);
            assert!(
                (at_10 - c_p).abs() <= 1e-11 * scale,
                "p={p}: {at_10} vs {c_p}"
            );
            assert!((at_01 - c_p).abs() <= 1e-11 * scale);
            let at_00 = b0.eval_xy(0.0, 0.0);
            assert!((at_00 + 2.0 * c_p).abs() <= 1e-11 * scale.max(at_00.abs()));
        }
    }

    #[test]
    fn projection_annihilates_sym_and_sign() {
        for p in 2..=8u32 {
            let s3 = S3Matrices::new(p);
            for f in sym_basis(p).functions.iter().chain(sign_basis(p).iter()) {
                let projected = s3.project_refl(f);
                let scale = f.coeffs().iter().fold(1.0f64, |a, c| a.max(c.abs()));
                assert!(
                    projected.coeffs().iter().all(|c| c.abs() <= 1e-10 * scale),
                    "p={p}"
                );
            }
        }
    }

    #[test]
    fn projection_is_idempotent_as_a_matrix() {
        // Full matrix identity Pi^2 = Pi, not only on the reflection span.
        for n in 0..=12u32 {
            let s3 = S3Matrices::new(n);
            let pi = s3.projection_matrix();
            assert!((&pi * &pi - &pi).amax() <= 1e-10, "n={n}");
        }
    }

    #[test]
    fn reflection_rotations_span_component() {
        for n in 1..=12u32 {
            let mult = multiplicities(n);
            let basis = refl_basis(n).unwrap();
            let rotations: Vec<DVector<f64>> = basis
                .triples
                .iter()
                .flat_map(|t| [t.rm_b.as_vector(), t.mr_b.as_vector()])
                .collect();
            assert_eq!(span_rank(&rotations), 2 * mult.d_refl, "n={n}");

            let mut all: Vec<DVector<f64>> = rotations;
            all.extend(sym_basis(n).functions.iter().map(|f| f.as_vector()));
            all.extend(sign_basis(n).iter().map(|f| f.as_vector()));
            assert_eq!(span_rank(&all), n as usize + 1, "direct sum at n={n}");
        }
    }

    #[test]
    fn alternative_bases_match_reflection_span() {
        for p in 1..=8u32 {
            let refl: Vec<DVector<f64>> = refl_basis(p)
                .unwrap()
                .triples
                .iter()
                .flat_map(|t| [t.rm_b.as_vector(), t.mr_b.as_vector()])
                .collect();
            let rank = span_rank(&refl);

            let AltReflBasis::T1T2(pairs) = alt_refl_bases(p, AltReflVariant::T1T2).unwrap() else {
                unreachable!()
            };
            let t_vectors: Vec<DVector<f64>> = pairs
                .iter()
                .flat_map(|(a, b)| [a.as_vector(), b.as_vector()])
                .collect();
            assert_eq!(span_rank(&t_vectors), rank, "T1T2 rank at p={p}");
            let mut stacked = refl.clone();
            stacked.extend(t_vectors.iter().cloned());
            assert_eq!(span_rank(&stacked), rank, "T1T2 span equality at p={p}");

            let AltReflBasis::S1S2(pairs) = alt_refl_bases(p, AltReflVariant::S1S2).unwrap() else {
                unreachable!()
            };
            let s_vectors: Vec<DVector<f64>> = pairs
                .iter()
                .flat_map(|(s1, _)| [s1.re.as_vector(), s1.im.as_vector()])
                .collect();
            assert_eq!(span_rank(&s_vectors), rank, "S1S2 rank at p={p}");
            let mut stacked = refl.clone();
            stacked.extend(s_vectors.iter().cloned());
            assert_eq!(span_rank(&stacked), rank, "S1S2 span equality at p={p}");
        }
    }

    #[test]
    fn alternative_basis_operator_identities() {
        for p in 1..=8u32 {
            let s3 = S3Matrices::new(p);
            // M T1 (I+R) b = -T1 (I+R) b
            let AltReflBasis::T1T2(pairs) = alt_refl_bases(p, AltReflVariant::T1T2).unwrap() else {
                unreachable!()
            };
            for (t1b, _) in &pairs {
                let m_applied = s3.apply_m(t1b);
                for (a, b) in m_applied.coeffs().iter().zip(t1b.coeffs()) {
                    assert!((a + b).abs() <= 1e-10, "p={p}");
                }
            }
            // R S1 b = S2 b
            let AltReflBasis::S1S2(pairs) = alt_refl_bases(p, AltReflVariant::S1S2).unwrap() else {
                unreachable!()
            };
            for (s1, s2) in &pairs {
                let r_re = s3.apply_r(&s1.re);
                let r_im = s3.apply_r(&s1.im);
                for (a, b) in r_re.coeffs().iter().zip(s2.re.coeffs()) {
                    assert!((a - b).abs() <= 1e-10);
                }
                for (a, b) in r_im.coeffs().iter().zip(s2.im.coeffs()) {
                    assert!((a - b).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn ray_traces_sum_to_zero() {
        // q(t) + q-hat(t) + q-tilde(t) = 0 with q(t) = b(t,0),
        // q-hat(t) = b(1-t,0), q-tilde(t) = b(t,1-t), sampled densely
        for p in 1..=8u32 {
            for triple in &refl_basis(p).unwrap().triples {
                for step in 0..200 {
                    let t = step as f64 / 199.0;
                    let total = triple.b.eval_xy(t, 0.0)
                        + triple.b.eval_xy(1.0 - t, 0.0)
                        + triple.b.eval_xy(t, 1.0 - t);
                    assert!(total.abs() <= 1e-11, "p={p} t={t}: {total:e}");
                }
            }
        }
    }

    #[test]
    fn project_refl_reproduces_basis_member() {
        for p in 1..=8u32 {
            let basis = refl_basis(p).unwrap();
            for (k, triple) in basis.triples.iter().enumerate() {
                let seed = OrthoCoeffs::unit(p, 2 * k as u32).unwrap();
                let projected = project_refl(&seed);
                for (a, b) in projected.coeffs().iter().zip(triple.b.coeffs()) {
                    assert!((a - b).abs() <= 1e-12);
                }
            }
        }
    }
}
