//! Subcommand implementations apart from the check suite.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use nalgebra::Point3;

use cr3d::fespace::{build_refl_nc, build_sym_nc, lagrange_eval, ReferenceSimplex};
use cr3d::mesh::{
    generate_cube_mesh, generate_octahedron_mesh, generate_two_tet_mesh, load_mesh, nodal_points,
    save_mesh, SimplicialMesh3D,
};
use cr3d::s3::{multiplicities, refl_basis, sym_basis};
use cr3d::solver::{
    broken_h1_error, convergence_study, l2_error, solve as solve_problem, ManufacturedProblem,
};

use crate::{BasisFamily, CliError, MeshKind, Problem};

fn write_output(out: Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

pub fn gen_mesh(kind: MeshKind, n: usize, out: Option<PathBuf>) -> Result<ExitCode, CliError> {
    let mesh = match kind {
        MeshKind::Cube => generate_cube_mesh(n)?,
        MeshKind::Octahedron => generate_octahedron_mesh(),
    };
    eprintln!(
        "{} tets, {} vertices, shape regularity (max circumradius/inradius): {:.6}",
        mesh.tet_count(),
        mesh.vertex_count(),
        mesh.shape_regularity()
    );
    write_output(out, &save_mesh(&mesh))?;
    Ok(ExitCode::SUCCESS)
}

fn triangle_grid(grid_n: usize) -> Vec<(f64, f64)> {
    // a collapsed square grid: grid_n^2 points covering the triangle
    let step = 1.0 / (grid_n.max(2) - 1) as f64;
    let mut points = Vec::with_capacity(grid_n * grid_n);
    for i in 0..grid_n {
        for j in 0..grid_n {
            let u = i as f64 * step;
            let v = j as f64 * step;
            points.push((u * (1.0 - v), v));
        }
    }
    points
}

pub fn basis_dump(
    p: u32,
    k: u32,
    family: BasisFamily,
    grid_n: usize,
    out: PathBuf,
) -> Result<ExitCode, CliError> {
    let mult = multiplicities(p);
    fs::create_dir_all(&out)?;
    match family {
        BasisFamily::Sym => {
            if (k as usize) >= mult.d_triv {
                return Err(CliError::Usage(format!(
                    "no symmetric basis function k={k} at degree {p} (d_triv = {})",
                    mult.d_triv
                )));
            }
            let polynomial = &sym_basis(p).functions[k as usize];
            let mut csv = String::from("x,y,value\n");
            for (x, y) in triangle_grid(grid_n) {
                csv.push_str(&format!(
                    "{x:.12e},{y:.12e},{:.12e}\n",
                    polynomial.eval_xy(x, y)
                ));
            }
            fs::write(out.join(format!("sym_p{p}_k{k}_triangle.csv")), csv)?;

            // boundary values of the tetrahedron-supported function on the
            // reference tetrahedron
            let mesh = unit_tet_mesh()?;
            let nodal = nodal_points(&mesh, p)?;
            let refs = ReferenceSimplex::new(p)?;
            let function = build_sym_nc(&mesh, &nodal, 0, p, k)?;
            let mut csv = String::from("x,y,z,value\n");
            for facet in 0..mesh.facet_count() {
                let origin = mesh.facet(facet).vertices[0];
                let map = mesh.facet_pullback(facet, origin)?;
                for (x1, x2) in triangle_grid(grid_n) {
                    let point = map.apply(x1, x2);
                    let value = lagrange_eval(&mesh, &refs, 0, &function, &point)?;
                    csv.push_str(&format!(
                        "{:.12e},{:.12e},{:.12e},{value:.12e}\n",
                        point.x, point.y, point.z
                    ));
                }
            }
            fs::write(out.join(format!("sym_p{p}_k{k}_tet_surface.csv")), csv)?;
        }
        BasisFamily::Refl => {
            if (k as usize) >= mult.d_refl {
                return Err(CliError::Usage(format!(
                    "no reflection basis function k={k} at degree {p} (d_refl = {})",
                    mult.d_refl
                )));
            }
            let polynomial = &refl_basis(p)?.triples[k as usize].b;
            let mut csv = String::from("x,y,value\n");
            for (x, y) in triangle_grid(grid_n) {
                csv.push_str(&format!(
                    "{x:.12e},{y:.12e},{:.12e}\n",
                    polynomial.eval_xy(x, y)
                ));
            }
            fs::write(out.join(format!("refl_p{p}_k{k}_triangle.csv")), csv)?;

            // boundary values of the facet-oriented function on the two-tet
            // patch surface
            let mesh = generate_two_tet_mesh();
            let nodal = nodal_points(&mesh, p)?;
            let refs = ReferenceSimplex::new(p)?;
            let shared = mesh
                .interior_facet_ids()
                .next()
                .expect("two-tet mesh has an interior facet");
            let function = build_refl_nc(&mesh, &nodal, shared, p, k)?;
            let mut csv = String::from("x,y,z,value\n");
            for facet in 0..mesh.facet_count() {
                let info = mesh.facet(facet);
                if !info.is_boundary() {
                    continue;
                }
                let tet = info.tet_first;
                let origin = info.vertices[0];
                let map = mesh.facet_pullback(facet, origin)?;
                for (x1, x2) in triangle_grid(grid_n) {
                    let point = map.apply(x1, x2);
                    let value = lagrange_eval(&mesh, &refs, tet, &function, &point)?;
                    csv.push_str(&format!(
                        "{:.12e},{:.12e},{:.12e},{value:.12e}\n",
                        point.x, point.y, point.z
                    ));
                }
            }
            fs::write(out.join(format!("refl_p{p}_k{k}_patch_surface.csv")), csv)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn unit_tet_mesh() -> Result<SimplicialMesh3D, CliError> {
    let vertices = vec![
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(0.0, 0.0, 1.0),
    ];
    Ok(SimplicialMesh3D::new(vertices, vec![[0, 1, 2, 3]])?)
}

fn resolve_mesh(mesh: Option<PathBuf>, gen: Option<String>) -> Result<SimplicialMesh3D, CliError> {
    match (mesh, gen) {
        (Some(path), None) => {
            let text = fs::read_to_string(&path).map_err(|e| {
                CliError::Usage(format!("cannot read mesh file {}: {e}", path.display()))
            })?;
            Ok(load_mesh(&text)?)
        }
        (None, Some(spec)) => match spec.as_str() {
            "octahedron" => Ok(generate_octahedron_mesh()),
            "two-tet" => Ok(generate_two_tet_mesh()),
            other => {
                if let Some(n) = other.strip_prefix("cube:") {
                    let n: usize = n
                        .parse()
                        .map_err(|_| CliError::Usage(format!("bad generator spec '{other}'")))?;
                    Ok(generate_cube_mesh(n)?)
                } else {
                    Err(CliError::Usage(format!(
                        "unknown generator '{other}' (use cube:N, octahedron or two-tet)"
                    )))
                }
            }
        },
        _ => Err(CliError::Usage(
            "exactly one of --mesh or --gen is required".into(),
        )),
    }
}

impl Problem {
    fn family(self) -> ManufacturedProblem {
        match self {
            Problem::Sine => ManufacturedProblem::SineProduct,
            Problem::Bubble => ManufacturedProblem::PolynomialBubble,
        }
    }
}

pub fn solve(
    p: u32,
    mesh: Option<PathBuf>,
    gen: Option<String>,
    problem: Problem,
    quad_exactness: Option<u32>,
    out: Option<PathBuf>,
) -> Result<ExitCode, CliError> {
    let mesh = resolve_mesh(mesh, gen)?;
    let family = problem.family();
    let mut poisson = family.problem(&mesh, p);
    poisson.quad_exactness = quad_exactness;
    let (dofs, solution) = solve_problem(&poisson)?;
    let h1 = broken_h1_error(&mesh, &dofs.refs, &solution.function, &|x| {
        family.exact_gradient(x)
    })?;
    let l2 = l2_error(&mesh, &dofs.refs, &solution.function, &|x| family.exact(x))?;
    let mut csv = String::from("dofs,h1_error,l2_error\n");
    csv.push_str(&format!("{},{h1:.12e},{l2:.12e}\n", dofs.len()));
    write_output(out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

pub fn convergence(
    p: u32,
    levels: usize,
    problem: Problem,
    out: Option<PathBuf>,
) -> Result<ExitCode, CliError> {
    let report = convergence_study(p, levels, problem.family())?;
    write_output(out, &report.to_csv())?;
    Ok(ExitCode::SUCCESS)
}
