//! Broken-Galerkin discretization of the Poisson model problem.
//!
//! The bilinear form uses elementwise gradients; continuity across facets is
//! only weak, which is exactly what the assembled basis provides. Homogeneous
//! Dirichlet data is built into the space: conforming functions of boundary
//! nodes are absent and the non-conforming functions satisfy the boundary
//! variant of the compatibility condition.

use nalgebra::{DMatrix, DVector, Matrix3, Point3, Vector3};

use crate::error::{Error, Result};
use crate::fespace::{assemble_dof_system, DofSystem, NodalFunction, ReferenceSimplex};
use crate::mesh::{generate_cube_mesh, SimplicialMesh3D};
use crate::quadrature::simplex_quadrature;

/// Piecewise-constant symmetric positive definite diffusion.
#[derive(Clone, Debug)]
pub enum Diffusion {
    Constant(Matrix3<f64>),
    PerTet(Vec<Matrix3<f64>>),
}

impl Diffusion {
    pub fn identity() -> Self {
        Diffusion::Constant(Matrix3::identity())
    }

    pub fn at(&self, tet: usize) -> &Matrix3<f64> {
        match self {
            Diffusion::Constant(a) => a,
            Diffusion::PerTet(list) => &list[tet],
        }
    }

    pub fn validate(&self, tet_count: usize) -> Result<()> {
        let check = |a: &Matrix3<f64>| -> Result<()> {
            if (a - a.transpose()).amax() > 1e-12 {
                return Err(Error::InvalidParameter(
                    "diffusion matrix is not symmetric".into(),
                ));
            }
            let eigen = a.symmetric_eigen();
            if eigen.eigenvalues.min() <= 0.0 {
                return Err(Error::InvalidParameter(
                    "diffusion matrix is not positive definite".into(),
                ));
            }
            Ok(())
        };
        match self {
            Diffusion::Constant(a) => check(a),
            Diffusion::PerTet(list) => {
                if list.len() != tet_count {
                    return Err(Error::InvalidParameter(format!(
                        "diffusion given per tet ({}) does not match mesh ({tet_count})",
                        list.len()
                    )));
                }
                list.iter().try_for_each(check)
            }
        }
    }
}

/// Poisson problem on a mesh: `-div(A grad u) = f`, `u = 0` on the boundary.
pub struct PoissonProblem<'a> {
    pub mesh: &'a SimplicialMesh3D,
    pub degree: u32,
    pub diffusion: Diffusion,
    pub source: Box<dyn Fn(&Point3<f64>) -> f64 + 'a>,
    pub exact: Option<Box<dyn Fn(&Point3<f64>) -> f64 + 'a>>,
    pub exact_gradient: Option<Box<dyn Fn(&Point3<f64>) -> Vector3<f64> + 'a>>,
    /// Overrides the default stiffness quadrature exactness `2p + 2`.
    pub quad_exactness: Option<u32>,
}

/// Compressed sparse row matrix; enough linear algebra for assembly and CG.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(dim: usize, triplets: &mut Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|(i, j, _)| (*i, *j));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for (i, j, v) in triplets.iter() {
            if let (Some(last_col), true) = (col_idx.last(), row_ptr[i + 1] > 0) {
                // merge duplicates within the current row
                if *last_col == *j && col_idx.len() > row_ptr[*i] {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            col_idx.push(*j);
            values.push(*v);
            row_ptr[i + 1] = col_idx.len();
        }
        // rows without entries inherit the previous offset
        for i in 1..=dim {
            if row_ptr[i] < row_ptr[i - 1] {
                row_ptr[i] = row_ptr[i - 1];
            }
        }
        Self {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.dim);
        for i in 0..self.dim {
            let mut acc = 0.0;
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[idx] * x[self.col_idx[idx]];
            }
            y[i] = acc;
        }
        y
    }

    pub fn diagonal(&self) -> DVector<f64> {
        let mut d = DVector::zeros(self.dim);
        for i in 0..self.dim {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[idx] == i {
                    d[i] = self.values[idx];
                }
            }
        }
        d
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[idx])] += self.values[idx];
            }
        }
        m
    }

    /// Largest asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let dense = self.to_dense();
        (&dense - dense.transpose()).amax()
    }
}

/// Per-quadrature-point reference basis data, cached once per rule.
struct RuleCache {
    points: Vec<Point3<f64>>,
    weights: Vec<f64>,
    values: Vec<DVector<f64>>,
    gradients: Vec<Vec<Vector3<f64>>>,
}

impl RuleCache {
    fn new(refs: &ReferenceSimplex, exactness: u32) -> Result<Self> {
        let rule = simplex_quadrature::<3>(exactness)?;
        let points: Vec<Point3<f64>> = rule
            .points
            .iter()
            .map(|p| Point3::new(p[0], p[1], p[2]))
            .collect();
        let values = points.iter().map(|p| refs.basis_values(p)).collect();
        let gradients = points.iter().map(|p| refs.basis_gradients(p)).collect();
        Ok(Self {
            points,
            weights: rule.weights,
            values,
            gradients,
        })
    }
}

/// Per-tet list of (global dof, local values) pairs.
fn supports_by_tet(dofs: &DofSystem, tet_count: usize) -> Vec<Vec<(usize, usize)>> {
    let mut by_tet: Vec<Vec<(usize, usize)>> = vec![Vec::new(); tet_count];
    for (dof, f) in dofs.functions.iter().enumerate() {
        for (entry, (tet, _)) in f.support.iter().enumerate() {
            by_tet[*tet].push((dof, entry));
        }
    }
    by_tet
}

/// Assembled stiffness matrix and load vector over the degree-of-freedom
/// system of the problem's mesh and degree.
pub struct AssembledSystem {
    pub stiffness: CsrMatrix,
    pub load: DVector<f64>,
}

pub fn assemble(problem: &PoissonProblem, dofs: &DofSystem) -> Result<AssembledSystem> {
    let mesh = problem.mesh;
    problem.diffusion.validate(mesh.tet_count())?;
    let exactness = problem.quad_exactness.unwrap_or(2 * problem.degree + 2);
    let cache = RuleCache::new(&dofs.refs, exactness)?;
    let by_tet = supports_by_tet(dofs, mesh.tet_count());
    let n = dofs.len();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut load = DVector::zeros(n);
    for tet in 0..mesh.tet_count() {
        let local = &by_tet[tet];
        if local.is_empty() {
            continue;
        }
        let map = mesh.tet_map(tet);
        let det = map.det().abs();
        let a_matrix = problem.diffusion.at(tet);
        // physical gradients and values of the local functions per point
        let mut local_grads: Vec<Vec<Vector3<f64>>> =
            vec![Vec::with_capacity(cache.points.len()); local.len()];
        let mut local_values: Vec<Vec<f64>> =
            vec![Vec::with_capacity(cache.points.len()); local.len()];
        for (q, _) in cache.points.iter().enumerate() {
            for (slot, (dof, entry)) in local.iter().enumerate() {
                let values = &dofs.functions[*dof].support[*entry].1;
                let mut reference_grad = Vector3::zeros();
                let mut value = 0.0;
                for (l, v) in values.iter().enumerate() {
                    if *v != 0.0 {
                        reference_grad += cache.gradients[q][l] * *v;
                        value += cache.values[q][l] * *v;
                    }
                }
                local_grads[slot].push(map.push_gradient(&reference_grad));
                local_values[slot].push(value);
            }
        }
        // local stiffness and load
        for (slot_i, (dof_i, _)) in local.iter().enumerate() {
            let mut rhs = 0.0;
            for (q, w) in cache.weights.iter().enumerate() {
                let physical = map.apply(&cache.points[q]);
                rhs += w * det * (problem.source)(&physical) * local_values[slot_i][q];
            }
            load[*dof_i] += rhs;
            for (slot_j, (dof_j, _)) in local.iter().enumerate() {
                let mut entry = 0.0;
                for (q, w) in cache.weights.iter().enumerate() {
                    entry +=
                        w * det * (a_matrix * local_grads[slot_j][q]).dot(&local_grads[slot_i][q]);
                }
                triplets.push((*dof_i, *dof_j, entry));
            }
        }
    }
    Ok(AssembledSystem {
        stiffness: CsrMatrix::from_triplets(n, &mut triplets),
        load,
    })
}

/// Threshold below which the linear system is solved by dense factorization.
pub const DENSE_CUTOFF: usize = 2000;
const CG_TOL: f64 = 1e-10;

/// Preconditioned conjugate gradients with a Jacobi preconditioner.
pub fn cg_solve(
    matrix: &CsrMatrix,
    rhs: &DVector<f64>,
    tol: f64,
    max_iterations: usize,
) -> Result<(DVector<f64>, usize)> {
    let n = matrix.dim();
    let diag = matrix.diagonal();
    if diag.iter().any(|d| *d <= 0.0) {
        return Err(Error::Solver("stiffness diagonal is not positive".into()));
    }
    let precondition = |r: &DVector<f64>| -> DVector<f64> {
        DVector::from_iterator(n, r.iter().zip(diag.iter()).map(|(r, d)| r / d))
    };
    let mut x = DVector::zeros(n);
    let mut r = rhs.clone();
    let rhs_norm = rhs.norm();
    if rhs_norm == 0.0 {
        return Ok((x, 0));
    }
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    for iteration in 1..=max_iterations {
        let ap = matrix.matvec(&p);
        let alpha = rz / p.dot(&ap);
        x += alpha * &p;
        r -= alpha * &ap;
        if r.norm() <= tol * rhs_norm {
            return Ok((x, iteration));
        }
        z = precondition(&r);
        let rz_next = r.dot(&z);
        let beta = rz_next / rz;
        rz = rz_next;
        p = z.clone() + beta * p;
    }
    Err(Error::Solver(format!(
        "conjugate gradients did not reach {tol:.1e} within {max_iterations} iterations"
    )))
}

/// Discrete solution together with its coefficients.
pub struct Solution {
    pub coefficients: DVector<f64>,
    pub function: NodalFunction,
    /// CG iteration count; `None` when the dense path was taken.
    pub iterations: Option<usize>,
}

/// Combine basis functions into a single nodal function over the whole mesh.
pub fn combine(
    dofs: &DofSystem,
    mesh: &SimplicialMesh3D,
    coefficients: &DVector<f64>,
) -> NodalFunction {
    let per_tet = dofs.nodal.per_tet[0].len();
    let mut values: Vec<Vec<f64>> = (0..mesh.tet_count()).map(|_| vec![0.0; per_tet]).collect();
    for (dof, f) in dofs.functions.iter().enumerate() {
        let c = coefficients[dof];
        if c == 0.0 {
            continue;
        }
        for (tet, local) in &f.support {
            for (l, v) in local.iter().enumerate() {
                values[*tet][l] += c * v;
            }
        }
    }
    NodalFunction::new(dofs.degree, values.into_iter().enumerate().collect())
}

/// Assemble and solve the Poisson problem; dense factorization below
/// [`DENSE_CUTOFF`] unknowns, Jacobi-preconditioned conjugate gradients above.
pub fn solve(problem: &PoissonProblem) -> Result<(DofSystem, Solution)> {
    let dofs = assemble_dof_system(problem.mesh, problem.degree)?;
    let system = assemble(problem, &dofs)?;
    let n = dofs.len();
    let (coefficients, iterations) = if n < DENSE_CUTOFF {
        let dense = system.stiffness.to_dense();
        let solution = dense
            .clone()
            .cholesky()
            .map(|c| c.solve(&system.load))
            .or_else(|| dense.lu().solve(&system.load))
            .ok_or_else(|| Error::Solver("dense factorization failed".into()))?;
        (solution, None)
    } else {
        let (x, iterations) = cg_solve(&system.stiffness, &system.load, CG_TOL, 10 * n)?;
        (x, Some(iterations))
    };
    let function = combine(&dofs, problem.mesh, &coefficients);
    Ok((
        dofs,
        Solution {
            coefficients,
            function,
            iterations,
        },
    ))
}

/// Elementwise `H^1` seminorm distance between a discrete function and an
/// exact gradient field.
pub fn broken_h1_error(
    mesh: &SimplicialMesh3D,
    refs: &ReferenceSimplex,
    u: &NodalFunction,
    exact_gradient: &dyn Fn(&Point3<f64>) -> Vector3<f64>,
) -> Result<f64> {
    let cache = RuleCache::new(refs, 2 * refs.degree() + 4)?;
    let mut total = 0.0;
    for tet in 0..mesh.tet_count() {
        let map = mesh.tet_map(tet);
        let det = map.det().abs();
        let values = u.values_on(tet);
        for (q, w) in cache.weights.iter().enumerate() {
            let physical = map.apply(&cache.points[q]);
            let mut grad = Vector3::zeros();
            if let Some(values) = values {
                let mut reference = Vector3::zeros();
                for (l, v) in values.iter().enumerate() {
                    if *v != 0.0 {
                        reference += cache.gradients[q][l] * *v;
                    }
                }
                grad = map.push_gradient(&reference);
            }
            total += w * det * (exact_gradient(&physical) - grad).norm_squared();
        }
    }
    Ok(total.sqrt())
}

/// `L^2` distance between a discrete function and an exact solution.
pub fn l2_error(
    mesh: &SimplicialMesh3D,
    refs: &ReferenceSimplex,
    u: &NodalFunction,
    exact: &dyn Fn(&Point3<f64>) -> f64,
) -> Result<f64> {
    let cache = RuleCache::new(refs, 2 * refs.degree() + 4)?;
    let mut total = 0.0;
    for tet in 0..mesh.tet_count() {
        let map = mesh.tet_map(tet);
        let det = map.det().abs();
        let values = u.values_on(tet);
        for (q, w) in cache.weights.iter().enumerate() {
            let physical = map.apply(&cache.points[q]);
            let mut value = 0.0;
            if let Some(values) = values {
                for (l, v) in values.iter().enumerate() {
                    value += cache.values[q][l] * *v;
                }
            }
            total += w * det * (exact(&physical) - value).powi(2);
        }
    }
    Ok(total.sqrt())
}

/// Nodal interpolant of a continuous function.
pub fn nodal_interpolant(
    mesh: &SimplicialMesh3D,
    p: u32,
    f: &dyn Fn(&Point3<f64>) -> f64,
) -> Result<NodalFunction> {
    let nodal = crate::mesh::nodal_points(mesh, p)?;
    let support = (0..mesh.tet_count())
        .map(|tet| {
            let values = nodal.per_tet[tet]
                .iter()
                .map(|g| f(&nodal.nodes[*g].position))
                .collect();
            (tet, values)
        })
        .collect();
    Ok(NodalFunction::new(p, support))
}

/// Broken inner-product Gram matrix of the assembled basis: elementwise
/// gradient products plus the product of elementwise means, which removes the
/// piecewise-constant kernel of the seminorm.
pub fn broken_gram(mesh: &SimplicialMesh3D, dofs: &DofSystem) -> Result<DMatrix<f64>> {
    let cache = RuleCache::new(&dofs.refs, 2 * dofs.degree + 2)?;
    let by_tet = supports_by_tet(dofs, mesh.tet_count());
    let n = dofs.len();
    let mut gram = DMatrix::zeros(n, n);
    for tet in 0..mesh.tet_count() {
        let local = &by_tet[tet];
        if local.is_empty() {
            continue;
        }
        let map = mesh.tet_map(tet);
        let det = map.det().abs();
        let volume = mesh.tet_volume(tet);
        let mut grads: Vec<Vec<Vector3<f64>>> = vec![Vec::new(); local.len()];
        let mut means = vec![0.0; local.len()];
        for (q, w) in cache.weights.iter().enumerate() {
            for (slot, (dof, entry)) in local.iter().enumerate() {
                let values = &dofs.functions[*dof].support[*entry].1;
                let mut reference = Vector3::zeros();
                let mut value = 0.0;
                for (l, v) in values.iter().enumerate() {
                    if *v != 0.0 {
                        reference += cache.gradients[q][l] * *v;
                        value += cache.values[q][l] * *v;
                    }
                }
                grads[slot].push(map.push_gradient(&reference));
                means[slot] += w * det * value;
            }
        }
        for slot_i in 0..local.len() {
            for slot_j in 0..local.len() {
                let mut entry = 0.0;
                for (q, w) in cache.weights.iter().enumerate() {
                    entry += w * det * grads[slot_i][q].dot(&grads[slot_j][q]);
                }
                entry += means[slot_i] * means[slot_j] / volume;
                gram[(local[slot_i].0, local[slot_j].0)] += entry;
            }
        }
    }
    Ok(gram)
}

/// Manufactured right-hand sides with known exact solutions on the unit cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ManufacturedProblem {
    /// `u = sin(pi x) sin(pi y) sin(pi z)`
    SineProduct,
    /// `u = x(1-x) y(1-y) z(1-z)`, a degree-6 polynomial
    PolynomialBubble,
}

impl ManufacturedProblem {
    pub fn exact(&self, x: &Point3<f64>) -> f64 {
        use std::f64::consts::PI;
        match self {
            ManufacturedProblem::SineProduct => {
                (PI * x.x).sin() * (PI * x.y).sin() * (PI * x.z).sin()
            }
            ManufacturedProblem::PolynomialBubble => {
                x.x * (1.0 - x.x) * x.y * (1.0 - x.y) * x.z * (1.0 - x.z)
            }
        }
    }

    pub fn exact_gradient(&self, x: &Point3<f64>) -> Vector3<f64> {
        use std::f64::consts::PI;
        match self {
            ManufacturedProblem::SineProduct => Vector3::new(
                PI * (PI * x.x).cos() * (PI * x.y).sin() * (PI * x.z).sin(),
                PI * (PI * x.x).sin() * (PI * x.y).cos() * (PI * x.z).sin(),
                PI * (PI * x.x).sin() * (PI * x.y).sin() * (PI * x.z).cos(),
            ),
            ManufacturedProblem::PolynomialBubble => {
                let b = |t: f64| t * (1.0 - t);
                let d = |t: f64| 1.0 - 2.0 * t;
                Vector3::new(
                    d(x.x) * b(x.y) * b(x.z),
                    b(x.x) * d(x.y) * b(x.z),
                    b(x.x) * b(x.y) * d(x.z),
                )
            }
        }
    }

    pub fn source(&self, x: &Point3<f64>) -> f64 {
        use std::f64::consts::PI;
        match self {
            ManufacturedProblem::SineProduct => 3.0 * PI * PI * self.exact(x),
            ManufacturedProblem::PolynomialBubble => {
                let b = |t: f64| t * (1.0 - t);
                2.0 * (b(x.y) * b(x.z) + b(x.x) * b(x.z) + b(x.x) * b(x.y))
            }
        }
    }

    pub fn problem<'a>(&self, mesh: &'a SimplicialMesh3D, degree: u32) -> PoissonProblem<'a> {
        let family = *self;
        PoissonProblem {
            mesh,
            degree,
            diffusion: Diffusion::identity(),
            source: Box::new(move |x| family.source(x)),
            exact: Some(Box::new(move |x| family.exact(x))),
            exact_gradient: Some(Box::new(move |x| family.exact_gradient(x))),
            quad_exactness: None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h: f64,
    pub dofs: usize,
    pub h1_error: f64,
    pub l2_error: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// Fitted rates `log2(e_l / e_(l+1))` between consecutive rows.
    pub fn h1_rates(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| (w[0].h1_error / w[1].h1_error).log2())
            .collect()
    }

    pub fn l2_rates(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| (w[0].l2_error / w[1].l2_error).log2())
            .collect()
    }

    /// CSV serialization: `level,h,dofs,h1_error,l2_error,h1_rate,l2_rate`;
    /// the first row has empty rate fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,h,dofs,h1_error,l2_error,h1_rate,l2_rate\n");
        let h1_rates = self.h1_rates();
        let l2_rates = self.l2_rates();
        for (i, row) in self.rows.iter().enumerate() {
            let (h1_rate, l2_rate) = if i == 0 {
                (String::new(), String::new())
            } else {
                (
                    format!("{:.6}", h1_rates[i - 1]),
                    format!("{:.6}", l2_rates[i - 1]),
                )
            };
            out.push_str(&format!(
                "{},{:.6e},{},{:.12e},{:.12e},{},{}\n",
                row.level, row.h, row.dofs, row.h1_error, row.l2_error, h1_rate, l2_rate
            ));
        }
        out
    }
}

/// Solve the manufactured problem on the unit-cube meshes `2^1 .. 2^levels`
/// and report errors and fitted rates.
pub fn convergence_study(
    p: u32,
    levels: usize,
    family: ManufacturedProblem,
) -> Result<ConvergenceReport> {
    if levels < 2 {
        return Err(Error::InvalidParameter(
            "a convergence study needs at least 2 levels".into(),
        ));
    }
    let mut rows = Vec::with_capacity(levels);
    for level in 1..=levels {
        let n = 1usize << level;
        let mesh = generate_cube_mesh(n)?;
        let problem = family.problem(&mesh, p);
        let (dofs, solution) = solve(&problem)?;
        let h1 = broken_h1_error(&mesh, &dofs.refs, &solution.function, &|x| {
            family.exact_gradient(x)
        })?;
        let l2 = l2_error(&mesh, &dofs.refs, &solution.function, &|x| family.exact(x))?;
        rows.push(ConvergenceRow {
            level,
            h: mesh.max_diameter(),
            dofs: dofs.len(),
            h1_error: h1,
            l2_error: l2,
        });
    }
    Ok(ConvergenceReport { rows })
}
