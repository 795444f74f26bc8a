//! Lagrange bookkeeping and the non-conforming basis functions.
//!
//! A discrete function is stored by its values at the equispaced nodal
//! points, per supporting tetrahedron. Two families of non-conforming
//! functions are built on top of that:
//!
//! * tetrahedron-supported functions whose boundary values come from a
//!   totally symmetric orthogonal polynomial lifted to all four facets and
//!   whose interior values are zero;
//! * facet-oriented functions supported on the two tetrahedra adjacent to an
//!   interior facet, with boundary values from a reflection-type orthogonal
//!   polynomial lifted so that the reference origin lands on the vertex
//!   opposite the shared facet.
//!
//! The global degree-of-freedom system combines the conforming Lagrange
//! functions of interior non-vertex nodes with both non-conforming families
//! (reflection functions restricted to the lowest index), in a fixed
//! deterministic order.

use nalgebra::{DMatrix, DVector, Point3, Vector3};

use crate::error::{Error, Result};
use crate::mesh::{reference_multi_indices, NodalSet, NodeClass, SimplicialMesh3D};
use crate::quadrature::simplex_quadrature;
use crate::s3::{multiplicities, refl_basis, sign_basis, sym_basis};

/// Supported polynomial degrees; equispaced nodes degrade beyond this.
pub const MAX_DEGREE: u32 = 8;

/// Cached reference-tetrahedron Lagrange data for one degree: nodes,
/// monomial exponents and the factorized generalized Vandermonde matrix.
#[derive(Clone, Debug)]
pub struct ReferenceSimplex {
    degree: u32,
    multi_indices: Vec<[u32; 4]>,
    nodes: Vec<Point3<f64>>,
    monomials: Vec<[u32; 3]>,
    /// LU of the transposed Vandermonde; solving against it gives
    /// Lagrange basis values from monomial values.
    vandermonde_t_lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl ReferenceSimplex {
    pub fn new(degree: u32) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(Error::InvalidParameter(format!(
                "degree {degree} outside supported range 1..={MAX_DEGREE}"
            )));
        }
        let multi_indices = reference_multi_indices(degree);
        let nodes: Vec<Point3<f64>> = multi_indices
            .iter()
            .map(|w| {
                Point3::new(
                    w[1] as f64 / degree as f64,
                    w[2] as f64 / degree as f64,
                    w[3] as f64 / degree as f64,
                )
            })
            .collect();
        let mut monomials = Vec::new();
        for a in 0..=degree {
            for b in 0..=(degree - a) {
                for c in 0..=(degree - a - b) {
                    monomials.push([a, b, c]);
                }
            }
        }
        let dim = nodes.len();
        debug_assert_eq!(dim, monomials.len());
        let mut vandermonde = DMatrix::zeros(dim, dim);
        for (row, node) in nodes.iter().enumerate() {
            for (col, m) in monomials.iter().enumerate() {
                vandermonde[(row, col)] =
                    node.x.powi(m[0] as i32) * node.y.powi(m[1] as i32) * node.z.powi(m[2] as i32);
            }
        }
        let vandermonde_t_lu = vandermonde.transpose().lu();
        Ok(Self {
            degree,
            multi_indices,
            nodes,
            monomials,
            vandermonde_t_lu,
        })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Point3<f64>] {
        &self.nodes
    }

    pub fn multi_indices(&self) -> &[[u32; 4]] {
        &self.multi_indices
    }

    fn monomial_values(&self, x: &Point3<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.monomials.len(),
            self.monomials
                .iter()
                .map(|m| x.x.powi(m[0] as i32) * x.y.powi(m[1] as i32) * x.z.powi(m[2] as i32)),
        )
    }

    fn monomial_gradients(&self, x: &Point3<f64>) -> Vec<Vector3<f64>> {
        self.monomials
            .iter()
            .map(|m| {
                let [a, b, c] = [m[0] as i32, m[1] as i32, m[2] as i32];
                let pow = |v: f64, e: i32| if e < 0 { 0.0 } else { v.powi(e) };
                Vector3::new(
                    a as f64 * pow(x.x, a - 1) * pow(x.y, b) * pow(x.z, c),
                    b as f64 * pow(x.x, a) * pow(x.y, b - 1) * pow(x.z, c),
                    c as f64 * pow(x.x, a) * pow(x.y, b) * pow(x.z, c - 1),
                )
            })
            .collect()
    }

    /// Values of all Lagrange basis functions at a reference point.
    pub fn basis_values(&self, x: &Point3<f64>) -> DVector<f64> {
        // l(x) solves V^T l = m(x)
        self.vandermonde_t_lu
            .solve(&self.monomial_values(x))
            .expect("Vandermonde is invertible for supported degrees")
    }

    /// Reference-coordinate gradients of all Lagrange basis functions.
    pub fn basis_gradients(&self, x: &Point3<f64>) -> Vec<Vector3<f64>> {
        let grads = self.monomial_gradients(x);
        let dim = self.monomials.len();
        let mut rhs = DMatrix::zeros(dim, 3);
        for (row, g) in grads.iter().enumerate() {
            rhs[(row, 0)] = g.x;
            rhs[(row, 1)] = g.y;
            rhs[(row, 2)] = g.z;
        }
        let solved = self
            .vandermonde_t_lu
            .solve(&rhs)
            .expect("Vandermonde is invertible for supported degrees");
        (0..dim)
            .map(|i| Vector3::new(solved[(i, 0)], solved[(i, 1)], solved[(i, 2)]))
            .collect()
    }
}

/// A piecewise polynomial given by nodal values on its supporting tets.
#[derive(Clone, Debug)]
pub struct NodalFunction {
    pub degree: u32,
    /// `(tet id, values at that tet's nodes in reference order)`, sorted by
    /// tet id.
    pub support: Vec<(usize, Vec<f64>)>,
}

impl NodalFunction {
    pub fn new(degree: u32, mut support: Vec<(usize, Vec<f64>)>) -> Self {
        support.sort_by_key(|(k, _)| *k);
        Self { degree, support }
    }

    pub fn values_on(&self, tet: usize) -> Option<&[f64]> {
        self.support
            .binary_search_by_key(&tet, |(k, _)| *k)
            .ok()
            .map(|idx| self.support[idx].1.as_slice())
    }

    /// Pointwise linear combination `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &NodalFunction, node_count: usize) -> NodalFunction {
        assert_eq!(self.degree, other.degree);
        let mut support: std::collections::BTreeMap<usize, Vec<f64>> =
            self.support.iter().cloned().collect();
        for (tet, values) in &other.support {
            let entry = support.entry(*tet).or_insert_with(|| vec![0.0; node_count]);
            for (target, v) in entry.iter_mut().zip(values) {
                *target += factor * v;
            }
        }
        NodalFunction {
            degree: self.degree,
            support: support.into_iter().collect(),
        }
    }
}

/// Evaluate a nodal function inside one of its tets. The point must lie in
/// the tet up to a barycentric tolerance of `1e-12`.
pub fn lagrange_eval(
    mesh: &SimplicialMesh3D,
    refs: &ReferenceSimplex,
    tet: usize,
    f: &NodalFunction,
    x: &Point3<f64>,
) -> Result<f64> {
    let local = mesh.tet_map(tet).pull_back(x);
    let tol = 1e-12;
    if local.x < -tol || local.y < -tol || local.z < -tol || local.x + local.y + local.z > 1.0 + tol
    {
        return Err(Error::InvalidParameter(format!(
            "point {x:?} lies outside tet {tet}"
        )));
    }
    let values = match f.values_on(tet) {
        Some(v) => v,
        None => return Ok(0.0),
    };
    let basis = refs.basis_values(&local);
    Ok(values.iter().zip(basis.iter()).map(|(v, b)| v * b).sum())
}

/// Conforming Lagrange function of one global node: value one at the node,
/// zero at all other nodes, supported on the tets containing the node.
pub fn conforming_nodal_function(nodal: &NodalSet, node: usize) -> NodalFunction {
    let mut support = Vec::new();
    for (tet, locals) in nodal.per_tet.iter().enumerate() {
        if let Some(local) = locals.iter().position(|g| *g == node) {
            let mut values = vec![0.0; locals.len()];
            values[local] = 1.0;
            support.push((tet, values));
        }
    }
    NodalFunction::new(nodal.degree, support)
}

/// Tetrahedron-supported non-conforming basis function: boundary nodal
/// values from the totally symmetric polynomial `b^sym_{p,k}` pulled back
/// facet-wise, zero at interior nodes.
pub fn build_sym_nc(
    mesh: &SimplicialMesh3D,
    nodal: &NodalSet,
    tet: usize,
    p: u32,
    k: u32,
) -> Result<NodalFunction> {
    let d_triv = multiplicities(p).d_triv;
    if (k as usize) >= d_triv {
        return Err(Error::IndexOutOfRange(format!(
            "symmetric index {k} out of range (d_triv({p}) = {d_triv})"
        )));
    }
    let symmetric = &sym_basis(p).functions[k as usize];
    let multi = reference_multi_indices(p);
    let facet_ids = mesh.tet_facet_ids(tet);
    let mut values = vec![0.0; multi.len()];
    for (local, weights) in multi.iter().enumerate() {
        // first facet containing the node; total symmetry makes the choice
        // immaterial
        let Some(omit) = (0..4).find(|m| weights[*m] == 0) else {
            continue;
        };
        let facet = facet_ids[omit];
        let origin = mesh.facet(facet).vertices[0];
        let map = mesh.facet_pullback(facet, origin)?;
        let position = nodal.nodes[nodal.per_tet[tet][local]].position;
        let (x1, x2) = map.pull_back(&position);
        values[local] = symmetric.eval_xy(x1, x2);
    }
    Ok(NodalFunction::new(p, vec![(tet, values)]))
}

/// Facet-oriented non-conforming basis function for an interior facet:
/// supported on the two adjacent tets, boundary values from the
/// reflection-type polynomial `b^refl_{p,k}` with the reference origin
/// mapped to the vertex opposite the facet, zero at all other nodes.
pub fn build_refl_nc(
    mesh: &SimplicialMesh3D,
    nodal: &NodalSet,
    facet: usize,
    p: u32,
    k: u32,
) -> Result<NodalFunction> {
    let info = mesh.facet(facet);
    let Some(second) = info.tet_second else {
        return Err(Error::InvalidParameter(format!(
            "facet {facet} lies on the boundary; facet-oriented functions need an interior facet"
        )));
    };
    let d_refl = multiplicities(p).d_refl;
    if (k as usize) >= d_refl {
        return Err(Error::IndexOutOfRange(format!(
            "reflection index {k} out of range (d_refl({p}) = {d_refl})"
        )));
    }
    let reflection = &refl_basis(p)?.triples[k as usize].b;
    let multi = reference_multi_indices(p);
    let mut support = Vec::new();
    for tet in [info.tet_first, second] {
        let tet_vertices = mesh.tet(tet);
        let facet_ids = mesh.tet_facet_ids(tet);
        let opposite_local = (0..4)
            .find(|m| facet_ids[*m] == facet)
            .ok_or_else(|| Error::Internal("facet adjacency inconsistent".into()))?;
        let opposite_vertex = tet_vertices[opposite_local];
        let mut values = vec![0.0; multi.len()];
        for (local, weights) in multi.iter().enumerate() {
            // outer facets are those containing the opposite vertex
            let Some(omit) = (0..4).find(|m| weights[*m] == 0 && *m != opposite_local) else {
                continue;
            };
            let outer = facet_ids[omit];
            let map = mesh.facet_pullback(outer, opposite_vertex)?;
            let position = nodal.nodes[nodal.per_tet[tet][local]].position;
            let (x1, x2) = map.pull_back(&position);
            values[local] = reflection.eval_xy(x1, x2);
        }
        support.push((tet, values));
    }
    Ok(NodalFunction::new(p, support))
}

fn facet_monomial_count(p: u32) -> usize {
    (p as usize * (p as usize + 1)) / 2
}

fn trace_at(
    mesh: &SimplicialMesh3D,
    refs: &ReferenceSimplex,
    f: &NodalFunction,
    tet: usize,
    physical: &Point3<f64>,
) -> f64 {
    match f.values_on(tet) {
        None => 0.0,
        Some(values) => {
            let local = mesh.tet_map(tet).pull_back(physical);
            let basis = refs.basis_values(&local);
            values.iter().zip(basis.iter()).map(|(v, b)| v * b).sum()
        }
    }
}

/// Moments of the jump of `f` across an interior facet against the monomials
/// of degree `<= p-1` on the facet reference coordinates. The jump is the
/// trace from the second adjacent tet minus the trace from the first,
/// matching the facet normal that points from the first into the second.
pub fn jump_moments(
    mesh: &SimplicialMesh3D,
    refs: &ReferenceSimplex,
    f: &NodalFunction,
    facet: usize,
    p: u32,
) -> Result<Vec<f64>> {
    let info = mesh.facet(facet);
    let Some(second) = info.tet_second else {
        return Err(Error::InvalidParameter(format!(
            "facet {facet} is not interior"
        )));
    };
    facet_moments(mesh, refs, facet, p, |physical| {
        trace_at(mesh, refs, f, second, physical)
            - trace_at(mesh, refs, f, info.tet_first, physical)
    })
}

/// Moments of the boundary trace of `f` on a boundary facet.
pub fn trace_moments(
    mesh: &SimplicialMesh3D,
    refs: &ReferenceSimplex,
    f: &NodalFunction,
    facet: usize,
    p: u32,
) -> Result<Vec<f64>> {
    let info = mesh.facet(facet);
    if info.tet_second.is_some() {
        return Err(Error::InvalidParameter(format!(
            "facet {facet} is not on the boundary"
        )));
    }
    facet_moments(mesh, refs, facet, p, |physical| {
        trace_at(mesh, refs, f, info.tet_first, physical)
    })
}

fn facet_moments(
    mesh: &SimplicialMesh3D,
    _refs: &ReferenceSimplex,
    facet: usize,
    p: u32,
    mut value: impl FnMut(&Point3<f64>) -> f64,
) -> Result<Vec<f64>> {
    let origin = mesh.facet(facet).vertices[0];
    let map = mesh.facet_pullback(facet, origin)?;
    let quad = simplex_quadrature::<2>(2 * p)?;
    let scale = map.area_scale();
    let mut moments = vec![0.0; facet_monomial_count(p)];
    for (pt, w) in quad.points.iter().zip(&quad.weights) {
        let physical = map.apply(pt[0], pt[1]);
        let v = value(&physical) * w * scale;
        let mut idx = 0;
        for a in 0..p {
            for b in 0..(p - a) {
                moments[idx] += v * pt[0].powi(a as i32) * pt[1].powi(b as i32);
                idx += 1;
            }
        }
    }
    Ok(moments)
}

/// One entry of the assembled basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DofKind {
    EdgeConforming { edge: usize, node: usize },
    FacetConforming { facet: usize, node: usize },
    CellConforming { tet: usize, node: usize },
    SymNc { tet: usize, k: u32 },
    ReflNc { facet: usize, k: u32 },
}

/// The assembled global basis: conforming functions of interior non-vertex
/// nodes, the tetrahedron-supported symmetric functions, and the lowest-index
/// facet-oriented reflection function per interior facet.
#[derive(Clone, Debug)]
pub struct DofSystem {
    pub degree: u32,
    pub kinds: Vec<DofKind>,
    pub functions: Vec<NodalFunction>,
    pub nodal: NodalSet,
    pub refs: ReferenceSimplex,
}

impl DofSystem {
    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }
}

pub fn assemble_dof_system(mesh: &SimplicialMesh3D, p: u32) -> Result<DofSystem> {
    if p < 1 {
        return Err(Error::InvalidParameter("degree must be >= 1".into()));
    }
    let refs = ReferenceSimplex::new(p)?;
    let nodal = crate::mesh::nodal_points(mesh, p)?;
    let mut kinds = Vec::new();
    let mut functions = Vec::new();

    // conforming: interior edge nodes, interior facet nodes, cell nodes
    let mut edge_nodes: Vec<(usize, usize)> = Vec::new();
    let mut facet_nodes: Vec<(usize, usize)> = Vec::new();
    let mut cell_nodes: Vec<(usize, usize)> = Vec::new();
    for (node_id, node) in nodal.nodes.iter().enumerate() {
        if node.on_boundary {
            continue;
        }
        match node.class {
            NodeClass::Vertex(_) => {}
            NodeClass::EdgeInterior(e) => edge_nodes.push((e, node_id)),
            NodeClass::FacetInterior(f) => facet_nodes.push((f, node_id)),
            NodeClass::CellInterior(k) => cell_nodes.push((k, node_id)),
        }
    }
    edge_nodes.sort_unstable();
    facet_nodes.sort_unstable();
    cell_nodes.sort_unstable();
    for (edge, node) in edge_nodes {
        kinds.push(DofKind::EdgeConforming { edge, node });
        functions.push(conforming_nodal_function(&nodal, node));
    }
    for (facet, node) in facet_nodes {
        kinds.push(DofKind::FacetConforming { facet, node });
        functions.push(conforming_nodal_function(&nodal, node));
    }
    for (tet, node) in cell_nodes {
        kinds.push(DofKind::CellConforming { tet, node });
        functions.push(conforming_nodal_function(&nodal, node));
    }

    let d_triv = multiplicities(p).d_triv;
    for tet in 0..mesh.tet_count() {
        for k in 0..d_triv {
            kinds.push(DofKind::SymNc { tet, k: k as u32 });
            functions.push(build_sym_nc(mesh, &nodal, tet, p, k as u32)?);
        }
    }
    for facet in mesh.interior_facet_ids().collect::<Vec<_>>() {
        kinds.push(DofKind::ReflNc { facet, k: 0 });
        functions.push(build_refl_nc(mesh, &nodal, facet, p, 0)?);
    }

    Ok(DofSystem {
        degree: p,
        kinds,
        functions,
        nodal,
        refs,
    })
}

/// Stack the per-tet nodal values of `f` into one dense vector
/// (tet-major, reference node order); a faithful linear embedding of the
/// broken polynomial space.
pub fn broken_vector(mesh: &SimplicialMesh3D, nodal: &NodalSet, f: &NodalFunction) -> DVector<f64> {
    let per_tet = nodal.per_tet[0].len();
    let mut out = DVector::zeros(mesh.tet_count() * per_tet);
    for (tet, values) in &f.support {
        for (l, v) in values.iter().enumerate() {
            out[tet * per_tet + l] = *v;
        }
    }
    out
}

/// Result of expressing a vertex Lagrange function in the assembled basis
/// extended by the conforming non-vertex functions.
#[derive(Clone, Copy, Debug)]
pub struct VertexSplit {
    /// Largest nodal mismatch of the reconstruction.
    pub residual: f64,
    /// Number of interior facets meeting the vertex.
    pub facet_count: usize,
    /// Coefficient applied to each facet function: `1 / (3 c_p)`. On any
    /// tet exactly the three facet functions of its own facets through the
    /// vertex contribute there, each with value `c_p`, so the patch value at
    /// the vertex is `3 c_p` regardless of how many facets meet it.
    pub scale: f64,
}

/// Sum of the facet-oriented functions of all facets meeting the vertex.
pub fn vertex_patch_function(
    mesh: &SimplicialMesh3D,
    nodal: &NodalSet,
    vertex: usize,
    p: u32,
) -> Result<NodalFunction> {
    if mesh.is_boundary_vertex(vertex) {
        return Err(Error::InvalidParameter(format!(
            "vertex {vertex} lies on the boundary"
        )));
    }
    let node_count = nodal.per_tet[0].len();
    let mut total = NodalFunction::new(p, Vec::new());
    for facet in 0..mesh.facet_count() {
        if !mesh.facet(facet).vertices.contains(&vertex) {
            continue;
        }
        debug_assert!(!mesh.facet(facet).is_boundary());
        let function = build_refl_nc(mesh, nodal, facet, p, 0)?;
        total = total.axpy(1.0, &function, node_count);
    }
    Ok(total)
}

/// Decompose the vertex Lagrange function `B_{p,V}` as the scaled vertex
/// patch of reflection functions plus a conforming remainder without vertex
/// components; returns the largest nodal defect of that decomposition.
pub fn vertex_function_decomposition(
    mesh: &SimplicialMesh3D,
    nodal: &NodalSet,
    vertex: usize,
    p: u32,
) -> Result<VertexSplit> {
    if mesh.is_boundary_vertex(vertex) {
        return Err(Error::InvalidParameter(format!(
            "vertex {vertex} lies on the boundary"
        )));
    }
    let c_p = crate::s3::refl_vertex_constant(p);
    let facet_count = (0..mesh.facet_count())
        .filter(|f| mesh.facet(*f).vertices.contains(&vertex))
        .count();
    let scale = 1.0 / (3.0 * c_p);
    let patch = vertex_patch_function(mesh, nodal, vertex, p)?;

    let vertex_node = nodal
        .nodes
        .iter()
        .position(|n| n.class == NodeClass::Vertex(vertex))
        .ok_or_else(|| Error::Internal("vertex node missing".into()))?;
    let hat = conforming_nodal_function(nodal, vertex_node);
    let node_count = nodal.per_tet[0].len();
    // r = B_{p,V} - u_V
    let remainder = hat.axpy(-scale, &patch, node_count);

    // nodal values of the conforming reconstruction: first-tet values at
    // interior non-vertex nodes, zero elsewhere
    let mut reconstruction: Vec<Option<f64>> = vec![None; nodal.node_count()];
    for (tet, values) in &remainder.support {
        for (local, global) in nodal.per_tet[*tet].iter().enumerate() {
            if reconstruction[*global].is_none() {
                reconstruction[*global] = Some(values[local]);
            }
        }
    }
    let admissible = |node: usize| -> bool {
        let n = &nodal.nodes[node];
        !n.on_boundary && !matches!(n.class, NodeClass::Vertex(_))
    };
    let mut residual: f64 = 0.0;
    for tet in 0..mesh.tet_count() {
        for (local, global) in nodal.per_tet[tet].iter().enumerate() {
            let r_value = remainder.values_on(tet).map(|v| v[local]).unwrap_or(0.0);
            let w_value = if admissible(*global) {
                reconstruction[*global].unwrap_or(0.0)
            } else {
                0.0
            };
            residual = residual.max((r_value - w_value).abs());
        }
    }
    Ok(VertexSplit {
        residual,
        facet_count,
        scale,
    })
}

/// Physical position of the node with the given barycentric weights.
fn node_position(
    mesh: &SimplicialMesh3D,
    tet_vertices: &[usize; 4],
    weights: &[u32; 4],
    p: u32,
) -> Point3<f64> {
    let mut coords = Vector3::zeros();
    for (v, w) in tet_vertices.iter().zip(weights.iter()) {
        coords += mesh.vertex(*v).coords * (*w as f64 / p as f64);
    }
    Point3::from(coords)
}

/// The boundary-surface functions that test the linear independence of the
/// reflection lifts centered at the four vertices of one tet.
#[derive(Clone, Debug)]
pub struct SurfaceLiftSet {
    /// Local node ids (within the tet) of the boundary nodes carrying values.
    pub boundary_locals: Vec<usize>,
    /// One column per `(center vertex, reflection index)` pair, index
    /// `i * d_refl + k`.
    pub columns: Vec<DVector<f64>>,
    pub d_refl: usize,
}

/// Surface nodal values of the functions built by lifting `b^refl_{p,k}`
/// to the three facets at each vertex of the tet, closed on the opposite
/// facet with zero interior values (a totally symmetric choice).
pub fn surface_lift_set(mesh: &SimplicialMesh3D, tet: usize, p: u32) -> Result<SurfaceLiftSet> {
    let d_refl = multiplicities(p).d_refl;
    let basis = refl_basis(p)?;
    let multi = reference_multi_indices(p);
    let tet_vertices = mesh.tet(tet);
    let facet_ids = mesh.tet_facet_ids(tet);
    let boundary_locals: Vec<usize> = multi
        .iter()
        .enumerate()
        .filter(|(_, w)| (0..4).any(|m| w[m] == 0))
        .map(|(l, _)| l)
        .collect();
    let mut columns = Vec::with_capacity(4 * d_refl);
    for center in 0..4usize {
        for k in 0..d_refl {
            let reflection = &basis.triples[k].b;
            let mut column = DVector::zeros(boundary_locals.len());
            for (row, &local) in boundary_locals.iter().enumerate() {
                let weights = &multi[local];
                // facets through the center vertex carry the reflection lift
                let Some(omit) = (0..4).find(|m| weights[*m] == 0 && *m != center) else {
                    // interior of the opposite facet: symmetric closure by zero
                    continue;
                };
                let facet = facet_ids[omit];
                let map = mesh.facet_pullback(facet, tet_vertices[center])?;
                let position = node_position(mesh, &tet_vertices, weights, p);
                let (x1, x2) = map.pull_back(&position);
                column[row] = reflection.eval_xy(x1, x2);
            }
            columns.push(column);
        }
    }
    Ok(SurfaceLiftSet {
        boundary_locals,
        columns,
        d_refl,
    })
}

/// Minimal singular value (after column normalization) of the surface lift
/// value matrix; positive values certify linear independence.
pub fn qki_independence_check(mesh: &SimplicialMesh3D, tet: usize, p: u32) -> Result<f64> {
    let set = surface_lift_set(mesh, tet, p)?;
    let rows = set.boundary_locals.len();
    let cols = set.columns.len();
    let mut matrix = DMatrix::zeros(rows, cols);
    for (j, col) in set.columns.iter().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::Internal("zero surface lift column".into()));
        }
        matrix.set_column(j, &(col / norm));
    }
    let svd = matrix.svd(false, false);
    Ok(svd.singular_values.min())
}

/// Continuous surface function on the octahedron mesh whose restriction to
/// every boundary facet is a sign-type orthogonal polynomial, extended into
/// the interior by zero nodal values.
///
/// Facet `i` of each apex fan carries `(-1)^i q_hat` composed with the apex
/// pullback; the alternating sign is what makes the glue continuous around
/// the apexes (each boundary vertex has even facet valence).
pub fn octahedron_sign_lift(
    mesh: &SimplicialMesh3D,
    nodal: &NodalSet,
    p: u32,
) -> Result<NodalFunction> {
    if mesh.vertex_count() != 7 || mesh.tet_count() != 8 {
        return Err(Error::InvalidParameter(
            "the sign-type surface lift is defined on the octahedron mesh".into(),
        ));
    }
    let signs = sign_basis(p);
    let Some(sign_poly) = signs.first() else {
        return Err(Error::InvalidParameter(format!(
            "no sign-type polynomial exists at degree {p}"
        )));
    };
    let multi = reference_multi_indices(p);
    // boundary facet {apex, A_i, A_(i+1)} -> (apex, i); equator vertices are
    // ids 1..=4, apexes 5 (top) and 6 (bottom)
    let classify = |facet: [usize; 3]| -> Result<(usize, usize)> {
        let apex = *facet
            .iter()
            .find(|v| **v >= 5)
            .ok_or_else(|| Error::Internal("boundary facet without apex".into()))?;
        let ring: Vec<usize> = facet.iter().copied().filter(|v| *v < 5).collect();
        let pair = (ring[0].min(ring[1]), ring[0].max(ring[1]));
        let i = match pair {
            (1, 2) => 1,
            (2, 3) => 2,
            (3, 4) => 3,
            (1, 4) => 4,
            other => {
                return Err(Error::Internal(format!(
                    "unexpected equator pair {other:?}"
                )))
            }
        };
        Ok((apex, i))
    };
    let mut support = Vec::new();
    for tet in 0..mesh.tet_count() {
        let facet_ids = mesh.tet_facet_ids(tet);
        let mut values = vec![0.0; multi.len()];
        for (local, weights) in multi.iter().enumerate() {
            let Some(omit) =
                (0..4).find(|m| weights[*m] == 0 && mesh.facet(facet_ids[*m]).is_boundary())
            else {
                continue;
            };
            let facet = facet_ids[omit];
            let fv = mesh.facet(facet).vertices;
            let (apex, i) = classify(fv)?;
            // pullback sends the origin to the apex, (1,0) to A_i, (0,1) to A_(i+1)
            let first = i;
            let second = if i == 4 { 1 } else { i + 1 };
            let origin = mesh.vertex(apex);
            let jac = nalgebra::Matrix3x2::from_columns(&[
                mesh.vertex(first) - origin,
                mesh.vertex(second) - origin,
            ]);
            let map = crate::mesh::FacetMap::new(origin, jac)?;
            let position = nodal.nodes[nodal.per_tet[tet][local]].position;
            let (x1, x2) = map.pull_back(&position);
            let parity = if i % 2 == 0 { -1.0 } else { 1.0 };
            values[local] = parity * sign_poly.eval_xy(x1, x2);
        }
        support.push((tet, values));
    }
    Ok(NodalFunction::new(p, support))
}
