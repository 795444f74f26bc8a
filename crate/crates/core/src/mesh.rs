//! Conforming simplicial meshes in 3D.
//!
//! Stores vertices and tetrahedra and derives facets, edges, adjacency and
//! oriented unit normals. Boundary facet normals point out of the domain;
//! the normal of an interior facet points from its first adjacent
//! tetrahedron into the second (first = lower tetrahedron index). Structured
//! generators cover the unit cube (Kuhn subdivision) and the octahedron
//! split into eight tetrahedra around the origin.
//!
//! Mesh text format, line oriented:
//!
//! ```text
//! cr3dmesh 1
//! v <x> <y> <z>
//! t <i0> <i1> <i2> <i3>
//! ```

use std::collections::BTreeMap;

use nalgebra::{Matrix2, Matrix3, Matrix3x2, Point3, Vector2, Vector3};

use crate::error::{Error, Result};

const DEDUP_TOL: f64 = 1e-12;

/// Invertible affine map from the reference tetrahedron onto a physical one.
#[derive(Clone, Debug)]
pub struct AffineMap3 {
    pub origin: Point3<f64>,
    pub jac: Matrix3<f64>,
    inv: Matrix3<f64>,
}

impl AffineMap3 {
    pub fn new(origin: Point3<f64>, jac: Matrix3<f64>) -> Result<Self> {
        let inv = jac
            .try_inverse()
            .ok_or_else(|| Error::MeshValidation("degenerate tetrahedron map".into()))?;
        Ok(Self { origin, jac, inv })
    }

    pub fn apply(&self, reference: &Point3<f64>) -> Point3<f64> {
        self.origin + self.jac * reference.coords
    }

    pub fn pull_back(&self, physical: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.inv * (physical - self.origin))
    }

    pub fn det(&self) -> f64 {
        self.jac.determinant()
    }

    /// Transpose-inverse applied to a reference gradient.
    pub fn push_gradient(&self, reference_gradient: &Vector3<f64>) -> Vector3<f64> {
        self.inv.transpose() * reference_gradient
    }
}

/// Affine embedding of the reference triangle onto a mesh facet.
#[derive(Clone, Debug)]
pub struct FacetMap {
    pub origin: Point3<f64>,
    pub jac: Matrix3x2<f64>,
    normal_gram_inv: Matrix2<f64>,
}

impl FacetMap {
    pub fn new(origin: Point3<f64>, jac: Matrix3x2<f64>) -> Result<Self> {
        let gram = jac.transpose() * jac;
        let normal_gram_inv = gram
            .try_inverse()
            .ok_or_else(|| Error::MeshValidation("degenerate facet map".into()))?;
        Ok(Self {
            origin,
            jac,
            normal_gram_inv,
        })
    }

    pub fn apply(&self, x1: f64, x2: f64) -> Point3<f64> {
        self.origin + self.jac * Vector2::new(x1, x2)
    }

    /// Reference coordinates of a point lying in the facet plane.
    pub fn pull_back(&self, physical: &Point3<f64>) -> (f64, f64) {
        let rhs = self.jac.transpose() * (physical - self.origin);
        let local = self.normal_gram_inv * rhs;
        (local.x, local.y)
    }

    /// Area scale: `sqrt(det(J^T J)) = 2 |T|`.
    pub fn area_scale(&self) -> f64 {
        (self.jac.transpose() * self.jac).determinant().sqrt()
    }
}

/// A mesh facet with adjacency and its fixed unit normal.
#[derive(Clone, Debug)]
pub struct FacetInfo {
    /// Vertex ids in ascending order.
    pub vertices: [usize; 3],
    /// Adjacent tetrahedron with the lower index.
    pub tet_first: usize,
    /// Second adjacent tetrahedron; `None` on the boundary.
    pub tet_second: Option<usize>,
    /// Unit normal: outward for boundary facets, pointing from `tet_first`
    /// into `tet_second` for interior ones.
    pub normal: Vector3<f64>,
    pub area: f64,
}

impl FacetInfo {
    pub fn is_boundary(&self) -> bool {
        self.tet_second.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct SimplicialMesh3D {
    vertices: Vec<Point3<f64>>,
    tets: Vec<[usize; 4]>,
    facets: Vec<FacetInfo>,
    facet_ids: BTreeMap<[usize; 3], usize>,
    edges: Vec<[usize; 2]>,
    edge_ids: BTreeMap<[usize; 2], usize>,
    boundary_vertex: Vec<bool>,
    boundary_edge: Vec<bool>,
    /// Facet ids per tetrahedron; entry `i` is the facet opposite local vertex `i`.
    tet_facets: Vec<[usize; 4]>,
}

fn tet_volume(v: &[Point3<f64>; 4]) -> f64 {
    let m = Matrix3::from_columns(&[v[1] - v[0], v[2] - v[0], v[3] - v[0]]);
    m.determinant() / 6.0
}

fn triangle_area(a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> f64 {
    (b - a).cross(&(c - a)).norm() / 2.0
}

impl SimplicialMesh3D {
    /// Build a mesh from raw vertices and tetrahedra, validating conformity.
    /// Tetrahedron vertex lists are canonicalized to ascending order.
    pub fn new(vertices: Vec<Point3<f64>>, tets: Vec<[usize; 4]>) -> Result<Self> {
        if tets.is_empty() {
            return Err(Error::MeshValidation("mesh contains no tetrahedra".into()));
        }
        let mut tets = tets;
        for tet in tets.iter_mut() {
            for &v in tet.iter() {
                if v >= vertices.len() {
                    return Err(Error::MeshValidation(format!(
                        "vertex index {v} out of range ({} vertices)",
                        vertices.len()
                    )));
                }
            }
            tet.sort_unstable();
            if tet[0] == tet[1] || tet[1] == tet[2] || tet[2] == tet[3] {
                return Err(Error::MeshValidation(format!(
                    "repeated vertex in tet {tet:?}"
                )));
            }
        }
        for (i, a) in vertices.iter().enumerate() {
            for (j, b) in vertices.iter().enumerate().skip(i + 1) {
                if (a - b).norm() <= DEDUP_TOL {
                    return Err(Error::MeshValidation(format!(
                        "vertices {i} and {j} coincide"
                    )));
                }
            }
        }
        {
            let mut seen = BTreeMap::new();
            for (k, tet) in tets.iter().enumerate() {
                if let Some(other) = seen.insert(*tet, k) {
                    return Err(Error::MeshValidation(format!(
                        "tets {other} and {k} have the same vertices"
                    )));
                }
            }
        }
        for (k, tet) in tets.iter().enumerate() {
            let pts = [
                vertices[tet[0]],
                vertices[tet[1]],
                vertices[tet[2]],
                vertices[tet[3]],
            ];
            if tet_volume(&pts).abs() <= 1e-14 {
                return Err(Error::MeshValidation(format!("tet {k} is degenerate")));
            }
        }

        // facet incidence
        let mut facet_tets: BTreeMap<[usize; 3], Vec<usize>> = BTreeMap::new();
        for (k, tet) in tets.iter().enumerate() {
            for omit in 0..4 {
                let mut f = [0usize; 3];
                let mut idx = 0;
                for (m, &v) in tet.iter().enumerate() {
                    if m != omit {
                        f[idx] = v;
                        idx += 1;
                    }
                }
                facet_tets.entry(f).or_default().push(k);
            }
        }
        for (f, ks) in &facet_tets {
            if ks.len() > 2 {
                return Err(Error::MeshValidation(format!(
                    "facet {f:?} is shared by {} tets",
                    ks.len()
                )));
            }
        }

        // hanging nodes: a vertex lying on a facet it is not a vertex of
        for (v_id, v) in vertices.iter().enumerate() {
            for f in facet_tets.keys() {
                if f.contains(&v_id) {
                    continue;
                }
                let a = vertices[f[0]];
                let b = vertices[f[1]];
                let c = vertices[f[2]];
                let e1 = b - a;
                let e2 = c - a;
                let normal = e1.cross(&e2);
                let area2 = normal.norm();
                if area2 <= DEDUP_TOL {
                    continue;
                }
                let rel = v - a;
                if rel.dot(&normal).abs() / area2 > DEDUP_TOL {
                    continue;
                }
                // in-plane barycentric coordinates
                let g11 = e1.dot(&e1);
                let g12 = e1.dot(&e2);
                let g22 = e2.dot(&e2);
                let det = g11 * g22 - g12 * g12;
                let r1 = rel.dot(&e1);
                let r2 = rel.dot(&e2);
                let s = (g22 * r1 - g12 * r2) / det;
                let t = (g11 * r2 - g12 * r1) / det;
                if s >= -DEDUP_TOL && t >= -DEDUP_TOL && s + t <= 1.0 + DEDUP_TOL {
                    return Err(Error::MeshValidation(format!(
                        "vertex {v_id} is a hanging node on facet {f:?}"
                    )));
                }
            }
        }

        let mut facets = Vec::with_capacity(facet_tets.len());
        let mut facet_ids = BTreeMap::new();
        for (f, ks) in &facet_tets {
            let id = facets.len();
            facet_ids.insert(*f, id);
            let a = vertices[f[0]];
            let b = vertices[f[1]];
            let c = vertices[f[2]];
            let mut normal = (b - a).cross(&(c - a)).normalize();
            let facet_centroid = Point3::from((a.coords + b.coords + c.coords) / 3.0);
            let tet_centroid = |k: usize| -> Point3<f64> {
                let t = tets[k];
                Point3::from(
                    (vertices[t[0]].coords
                        + vertices[t[1]].coords
                        + vertices[t[2]].coords
                        + vertices[t[3]].coords)
                        / 4.0,
                )
            };
            let (tet_first, tet_second) = match ks.as_slice() {
                [k] => {
                    // outward: away from the only tet
                    if normal.dot(&(facet_centroid - tet_centroid(*k))) < 0.0 {
                        normal = -normal;
                    }
                    (*k, None)
                }
                [k1, k2] => {
                    let (k1, k2) = (*k1.min(k2), *k1.max(k2));
                    // from first into second
                    if normal.dot(&(tet_centroid(k2) - facet_centroid)) < 0.0 {
                        normal = -normal;
                    }
                    (k1, Some(k2))
                }
                _ => unreachable!("incidence checked above"),
            };
            facets.push(FacetInfo {
                vertices: *f,
                tet_first,
                tet_second,
                normal,
                area: triangle_area(&a, &b, &c),
            });
        }

        let mut tet_facets = vec![[0usize; 4]; tets.len()];
        for (k, tet) in tets.iter().enumerate() {
            for omit in 0..4 {
                let mut f = [0usize; 3];
                let mut idx = 0;
                for (m, &v) in tet.iter().enumerate() {
                    if m != omit {
                        f[idx] = v;
                        idx += 1;
                    }
                }
                tet_facets[k][omit] = facet_ids[&f];
            }
        }

        let mut edge_ids = BTreeMap::new();
        let mut edges = Vec::new();
        for tet in &tets {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let e = [tet[i], tet[j]];
                    edge_ids.entry(e).or_insert_with(|| {
                        edges.push(e);
                        edges.len() - 1
                    });
                }
            }
        }

        let mut boundary_vertex = vec![false; vertices.len()];
        let mut boundary_edge = vec![false; edges.len()];
        for facet in facets.iter().filter(|f| f.is_boundary()) {
            let [a, b, c] = facet.vertices;
            for v in [a, b, c] {
                boundary_vertex[v] = true;
            }
            for e in [[a, b], [a, c], [b, c]] {
                boundary_edge[edge_ids[&e]] = true;
            }
        }

        Ok(Self {
            vertices,
            tets,
            facets,
            facet_ids,
            edges,
            edge_ids,
            boundary_vertex,
            boundary_edge,
            tet_facets,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, v: usize) -> Point3<f64> {
        self.vertices[v]
    }

    pub fn tet(&self, k: usize) -> [usize; 4] {
        self.tets[k]
    }

    pub fn facet(&self, t: usize) -> &FacetInfo {
        &self.facets[t]
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_ids.get(&[a.min(b), a.max(b)]).copied()
    }

    pub fn facet_id(&self, vertices: [usize; 3]) -> Option<usize> {
        let mut f = vertices;
        f.sort_unstable();
        self.facet_ids.get(&f).copied()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edge[e]
    }

    pub fn interior_facet_ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.facets.len()).filter(|t| !self.facets[*t].is_boundary())
    }

    pub fn boundary_facet_ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.facets.len()).filter(|t| self.facets[*t].is_boundary())
    }

    /// Facet ids of tet `k`; entry `i` is opposite the i-th vertex of the tet.
    pub fn tet_facet_ids(&self, k: usize) -> [usize; 4] {
        self.tet_facets[k]
    }

    /// Tets adjacent to facet `t` as a small list.
    pub fn facet_tets(&self, t: usize) -> Vec<usize> {
        let f = &self.facets[t];
        match f.tet_second {
            Some(k2) => vec![f.tet_first, k2],
            None => vec![f.tet_first],
        }
    }

    /// Tets containing vertex `v`.
    pub fn vertex_tets(&self, v: usize) -> Vec<usize> {
        (0..self.tets.len())
            .filter(|k| self.tets[*k].contains(&v))
            .collect()
    }

    /// Affine map from the reference tetrahedron onto tet `k`, sending the
    /// reference vertices to the tet vertices in stored (ascending) order.
    pub fn tet_map(&self, k: usize) -> AffineMap3 {
        let t = self.tets[k];
        let v0 = self.vertices[t[0]];
        let jac = Matrix3::from_columns(&[
            self.vertices[t[1]] - v0,
            self.vertices[t[2]] - v0,
            self.vertices[t[3]] - v0,
        ]);
        AffineMap3::new(v0, jac).expect("validated tets are nondegenerate")
    }

    pub fn tet_volume(&self, k: usize) -> f64 {
        let t = self.tets[k];
        tet_volume(&[
            self.vertices[t[0]],
            self.vertices[t[1]],
            self.vertices[t[2]],
            self.vertices[t[3]],
        ])
        .abs()
    }

    pub fn tet_centroid(&self, k: usize) -> Point3<f64> {
        let t = self.tets[k];
        Point3::from(
            (self.vertices[t[0]].coords
                + self.vertices[t[1]].coords
                + self.vertices[t[2]].coords
                + self.vertices[t[3]].coords)
                / 4.0,
        )
    }

    pub fn facet_centroid(&self, t: usize) -> Point3<f64> {
        let f = self.facets[t].vertices;
        Point3::from(
            (self.vertices[f[0]].coords + self.vertices[f[1]].coords + self.vertices[f[2]].coords)
                / 3.0,
        )
    }

    pub fn tet_diameter(&self, k: usize) -> f64 {
        let t = self.tets[k];
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                d = d.max((self.vertices[t[i]] - self.vertices[t[j]]).norm());
            }
        }
        d
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.tets.len())
            .map(|k| self.tet_diameter(k))
            .fold(0.0, f64::max)
    }

    /// Pullback of facet `t` mapping the reference origin to `origin_vertex`
    /// and the remaining reference vertices to the other two facet vertices
    /// in ascending global index order.
    pub fn facet_pullback(&self, t: usize, origin_vertex: usize) -> Result<FacetMap> {
        let f = self.facets[t].vertices;
        if !f.contains(&origin_vertex) {
            return Err(Error::IndexOutOfRange(format!(
                "vertex {origin_vertex} is not a vertex of facet {f:?}"
            )));
        }
        let mut others: Vec<usize> = f.iter().copied().filter(|v| *v != origin_vertex).collect();
        others.sort_unstable();
        let origin = self.vertices[origin_vertex];
        let jac = Matrix3x2::from_columns(&[
            self.vertices[others[0]] - origin,
            self.vertices[others[1]] - origin,
        ]);
        FacetMap::new(origin, jac)
    }

    /// Largest circumradius-to-inradius ratio over all tets.
    pub fn shape_regularity(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.tets.len() {
            let t = self.tets[k];
            let p: Vec<Point3<f64>> = t.iter().map(|&v| self.vertices[v]).collect();
            // circumcenter from 2 (p_i - p_0) . c = |p_i|^2 - |p_0|^2
            let rows = [
                2.0 * (p[1] - p[0]),
                2.0 * (p[2] - p[0]),
                2.0 * (p[3] - p[0]),
            ];
            let m = Matrix3::from_rows(&[
                rows[0].transpose(),
                rows[1].transpose(),
                rows[2].transpose(),
            ]);
            let rhs = Vector3::new(
                p[1].coords.norm_squared() - p[0].coords.norm_squared(),
                p[2].coords.norm_squared() - p[0].coords.norm_squared(),
                p[3].coords.norm_squared() - p[0].coords.norm_squared(),
            );
            let center = m.lu().solve(&rhs).expect("nondegenerate tet");
            let circumradius = (Point3::from(center) - p[0]).norm();
            let volume = self.tet_volume(k);
            let surface: f64 = [(1usize, 2usize, 3usize), (0, 2, 3), (0, 1, 3), (0, 1, 2)]
                .iter()
                .map(|&(a, b, c)| triangle_area(&p[a], &p[b], &p[c]))
                .sum();
            let inradius = 3.0 * volume / surface;
            worst = worst.max(circumradius / inradius);
        }
        worst
    }
}

/// Unit cube `[0,1]^3` subdivided into `n^3` subcubes of six tetrahedra each
/// (Kuhn subdivision), which is a conforming mesh.
pub fn generate_cube_mesh(n: usize) -> Result<SimplicialMesh3D> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "cube subdivision count must be >= 1".into(),
        ));
    }
    let stride = n + 1;
    let vid = |ix: usize, iy: usize, iz: usize| ix + stride * (iy + stride * iz);
    let mut vertices = vec![Point3::origin(); stride.pow(3)];
    let h = 1.0 / n as f64;
    for iz in 0..stride {
        for iy in 0..stride {
            for ix in 0..stride {
                vertices[vid(ix, iy, iz)] =
                    Point3::new(ix as f64 * h, iy as f64 * h, iz as f64 * h);
            }
        }
    }
    const PERMUTATIONS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tets = Vec::with_capacity(6 * n * n * n);
    for iz in 0..n {
        for iy in 0..n {
            for ix in 0..n {
                for perm in PERMUTATIONS {
                    let mut corner = [ix, iy, iz];
                    let mut tet = [vid(corner[0], corner[1], corner[2]), 0, 0, 0];
                    for (step, &axis) in perm.iter().enumerate() {
                        corner[axis] += 1;
                        tet[step + 1] = vid(corner[0], corner[1], corner[2]);
                    }
                    tets.push(tet);
                }
            }
        }
    }
    SimplicialMesh3D::new(vertices, tets)
}

/// Octahedron with apexes `(0,0,+-1)` and equator `(+-1,0,0)`, `(0,+-1,0)`,
/// split into eight congruent tetrahedra sharing the origin.
pub fn generate_octahedron_mesh() -> SimplicialMesh3D {
    let vertices = vec![
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(-1.0, 0.0, 0.0),
        Point3::new(0.0, -1.0, 0.0),
        Point3::new(0.0, 0.0, 1.0),
        Point3::new(0.0, 0.0, -1.0),
    ];
    let mut tets = Vec::with_capacity(8);
    for i in 1..=4usize {
        let next = if i == 4 { 1 } else { i + 1 };
        tets.push([0, i, next, 5]);
        tets.push([0, i, next, 6]);
    }
    SimplicialMesh3D::new(vertices, tets).expect("octahedron mesh is conforming")
}

/// Two unit-scale tetrahedra sharing the facet `{(1,0,0),(0,1,0),(0,0,1)}`.
pub fn generate_two_tet_mesh() -> SimplicialMesh3D {
    let vertices = vec![
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(0.0, 0.0, 1.0),
        Point3::new(1.0, 1.0, 1.0),
    ];
    let tets = vec![[0, 1, 2, 3], [1, 2, 3, 4]];
    SimplicialMesh3D::new(vertices, tets).expect("two-tet mesh is conforming")
}

/// Serialize a mesh in the plain-text format.
pub fn save_mesh(mesh: &SimplicialMesh3D) -> String {
    let mut out = String::from("cr3dmesh 1\n");
    for v in &mesh.vertices {
        out.push_str(&format!("v {:?} {:?} {:?}\n", v.x, v.y, v.z));
    }
    for t in &mesh.tets {
        out.push_str(&format!("t {} {} {} {}\n", t[0], t[1], t[2], t[3]));
    }
    out
}

/// Parse the plain-text mesh format and validate the mesh.
pub fn load_mesh(text: &str) -> Result<SimplicialMesh3D> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) if line.trim().is_empty() => continue,
            Some((no, line)) => break (no, line),
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        }
    };
    if header.1.trim() != "cr3dmesh 1" {
        return Err(Error::Parse {
            line: header.0 + 1,
            message: format!("expected header 'cr3dmesh 1', got '{}'", header.1.trim()),
        });
    }
    let mut vertices = Vec::new();
    let mut tets = Vec::new();
    for (no, line) in lines {
        let line_no = no + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<f64> = fields
                    .map(|f| {
                        f.parse::<f64>().map_err(|_| Error::Parse {
                            line: line_no,
                            message: format!("bad coordinate '{f}'"),
                        })
                    })
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("vertex needs 3 coordinates, got {}", coords.len()),
                    });
                }
                vertices.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            Some("t") => {
                let ids: Vec<usize> = fields
                    .map(|f| {
                        f.parse::<usize>().map_err(|_| Error::Parse {
                            line: line_no,
                            message: format!("bad vertex index '{f}'"),
                        })
                    })
                    .collect::<Result<_>>()?;
                if ids.len() != 4 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("tet needs 4 indices, got {}", ids.len()),
                    });
                }
                tets.push([ids[0], ids[1], ids[2], ids[3]]);
            }
            Some(other) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unknown record '{other}'"),
                });
            }
            None => unreachable!("empty lines are skipped"),
        }
    }
    SimplicialMesh3D::new(vertices, tets)
}

/// Barycentric multi-indices `(w0, w1, w2, w3)` with sum `p`, enumerated in
/// lexicographic order of the reference coordinates `(i, j, k) = (w1, w2, w3)`.
pub fn reference_multi_indices(p: u32) -> Vec<[u32; 4]> {
    let mut out = Vec::new();
    for i in 0..=p {
        for j in 0..=(p - i) {
            for k in 0..=(p - i - j) {
                out.push([p - i - j - k, i, j, k]);
            }
        }
    }
    out
}

/// Where a global node sits in the mesh.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeClass {
    Vertex(usize),
    EdgeInterior(usize),
    FacetInterior(usize),
    CellInterior(usize),
}

#[derive(Clone, Debug)]
pub struct GlobalNode {
    pub position: Point3<f64>,
    pub class: NodeClass,
    pub on_boundary: bool,
}

/// The global equispaced nodal points of degree `p`: per-tet node lists in
/// reference order plus the deduplicated, classified node set.
///
/// Deduplication is combinatorial (by the barycentric support over global
/// vertex ids), so shared nodes are identified exactly.
#[derive(Clone, Debug)]
pub struct NodalSet {
    pub degree: u32,
    pub nodes: Vec<GlobalNode>,
    pub per_tet: Vec<Vec<usize>>,
}

impl NodalSet {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

pub fn nodal_points(mesh: &SimplicialMesh3D, p: u32) -> Result<NodalSet> {
    if p < 1 {
        return Err(Error::InvalidParameter("nodal degree must be >= 1".into()));
    }
    let multi = reference_multi_indices(p);
    let mut keys: BTreeMap<Vec<(usize, u32)>, usize> = BTreeMap::new();
    let mut nodes: Vec<GlobalNode> = Vec::new();
    let mut per_tet = Vec::with_capacity(mesh.tet_count());
    for k in 0..mesh.tet_count() {
        let tet = mesh.tet(k);
        let mut ids = Vec::with_capacity(multi.len());
        for weights in &multi {
            let mut support: Vec<(usize, u32)> = tet
                .iter()
                .zip(weights.iter())
                .filter(|(_, w)| **w > 0)
                .map(|(v, w)| (*v, *w))
                .collect();
            support.sort_unstable();
            let next_id = nodes.len();
            let id = *keys.entry(support.clone()).or_insert(next_id);
            if id == nodes.len() {
                let mut coords = Vector3::zeros();
                for (v, w) in &support {
                    coords += mesh.vertex(*v).coords * (*w as f64 / p as f64);
                }
                let class = match support.len() {
                    1 => NodeClass::Vertex(support[0].0),
                    2 => NodeClass::EdgeInterior(
                        mesh.edge_id(support[0].0, support[1].0)
                            .ok_or_else(|| Error::Internal("node on unknown edge".into()))?,
                    ),
                    3 => NodeClass::FacetInterior(
                        mesh.facet_id([support[0].0, support[1].0, support[2].0])
                            .ok_or_else(|| Error::Internal("node on unknown facet".into()))?,
                    ),
                    _ => NodeClass::CellInterior(k),
                };
                let on_boundary = match &class {
                    NodeClass::Vertex(v) => mesh.is_boundary_vertex(*v),
                    NodeClass::EdgeInterior(e) => mesh.is_boundary_edge(*e),
                    NodeClass::FacetInterior(f) => mesh.facet(*f).is_boundary(),
                    NodeClass::CellInterior(_) => false,
                };
                nodes.push(GlobalNode {
                    position: Point3::from(coords),
                    class,
                    on_boundary,
                });
            }
            ids.push(id);
        }
        per_tet.push(ids);
    }
    Ok(NodalSet {
        degree: p,
        nodes,
        per_tet,
    })
}
