use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use cr3d::fespace::assemble_dof_system;
use cr3d::mesh::generate_cube_mesh;
use cr3d::solver::{assemble, cg_solve, ManufacturedProblem};

fn bench_dof_system(c: &mut Criterion) {
    let mesh = generate_cube_mesh(2).unwrap();
    c.bench_function("dof-system-cube2-p2", |b| {
        b.iter(|| black_box(assemble_dof_system(&mesh, 2).unwrap()))
    });
}

fn bench_assemble(c: &mut Criterion) {
    let mesh = generate_cube_mesh(2).unwrap();
    let dofs = assemble_dof_system(&mesh, 2).unwrap();
    let problem = ManufacturedProblem::SineProduct.problem(&mesh, 2);
    c.bench_function("assemble-cube2-p2", |b| {
        b.iter(|| black_box(assemble(&problem, &dofs).unwrap()))
    });
}

fn bench_cg(c: &mut Criterion) {
    let mesh = generate_cube_mesh(4).unwrap();
    let dofs = assemble_dof_system(&mesh, 1).unwrap();
    let problem = ManufacturedProblem::SineProduct.problem(&mesh, 1);
    let system = assemble(&problem, &dofs).unwrap();
    c.bench_function("cg-cube4-p1", |b| {
        b.iter(|| {
            black_box(cg_solve(&system.stiffness, &system.load, 1e-10, 10 * dofs.len()).unwrap())
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_dof_system, bench_assemble, bench_cg
}
criterion_main!(benches);
