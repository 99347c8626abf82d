use criterion::{black_box, criterion_group, criterion_main, Criterion};
use lambda1_core::extend::verify_extension_modes;
use lambda1_core::glue::{glue, GluingSpec};
use lambda1_core::mesh::{icosphere, square_torus, IcosphereParams};
use lambda1_core::spectrum::{assemble_mass, assemble_stiffness, solve_smallest};

fn assembly(c: &mut Criterion) {
    let m = icosphere(IcosphereParams { subdiv: 4, flat_cap: None }).unwrap().mesh;
    c.bench_function("stiffness icosphere(4)", |b| b.iter(|| assemble_stiffness(black_box(&m)).unwrap()));
    c.bench_function("mass icosphere(4)", |b| b.iter(|| assemble_mass(black_box(&m), None).unwrap()));
}

fn eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigen");
    g.sample_size(10);
    for (name, m) in [
        ("icosphere(4)", icosphere(IcosphereParams { subdiv: 4, flat_cap: None }).unwrap().mesh),
        ("square torus 32", square_torus(32).unwrap()),
    ] {
        let s = assemble_stiffness(&m).unwrap();
        let mass = assemble_mass(&m, None).unwrap();
        g.bench_function(name, |b| b.iter(|| solve_smallest(&s, &mass, 8, 1e-9).unwrap()));
    }
    g.finish();
}

fn surgery(c: &mut Criterion) {
    let base = icosphere(IcosphereParams { subdiv: 4, flat_cap: Some(0.4) }).unwrap();
    let mut g = c.benchmark_group("glue");
    g.sample_size(10);
    g.bench_function("crosscap N32", |b| {
        b.iter(|| glue(&base.mesh, Some(&base.density), &GluingSpec::crosscap(0, 0.1, 1.0, 32)).unwrap())
    });
    g.bench_function("handle N32", |b| {
        b.iter(|| glue(&base.mesh, Some(&base.density), &GluingSpec::handle(0, 0.0, 0.03, 1.0, 32)).unwrap())
    });
    g.finish();
}

fn modes(c: &mut Criterion) {
    c.bench_function("mode certificate k<=32, 5 lengths", |b| {
        b.iter(|| verify_extension_modes(32, black_box(&[1.0397, 1.5, 2.0, 3.0, 5.0]), 1e-10))
    });
}

criterion_group!(benches, assembly, eigen, surgery, modes);
criterion_main!(benches);
