use criterion::{criterion_group, criterion_main, Criterion};
use rosim::fem::assembly::{nitsche_matrix, oseen, stokes, transport};
use rosim::fem::{apply_dirichlet, FemSpaces, MembraneCondition, SparseSystem};
use rosim::mesh::{build_channel_mesh, Mesh};
use rosim::solver::DirectLu;
use rosim::{ChannelGeometry, GradingSpec, NitscheParams, PhysicalParams, SolutionFields, SpacerConfig};
use std::hint::black_box;

fn channel() -> (Mesh, FemSpaces, PhysicalParams) {
    let p = PhysicalParams::default();
    let m = build_channel_mesh(&ChannelGeometry::default(), &GradingSpec::toward_membrane(10, 1.3)).unwrap();
    let s = FemSpaces::channel(&m, p.u0, p.theta0, MembraneCondition::Nitsche);
    (m, s, p)
}

fn shear_flow(m: &Mesh, s: &FemSpaces, p: &PhysicalParams) -> SolutionFields {
    let d = ChannelGeometry::default().height;
    SolutionFields::interpolate(m, &s.dofs, |x| [6.0 * p.u0 * x[1] / d * (1.0 - x[1] / d), 0.0], |_| 0.0, |_| p.theta0)
}

fn bench_assembly(c: &mut Criterion) {
    let (m, s, p) = channel();
    let f = shear_flow(&m, &s, &p);
    let nitsche = NitscheParams::default();
    let mut g = c.benchmark_group("assembly");
    g.sample_size(10);
    g.bench_function("stokes", |b| b.iter(|| black_box(stokes(&m, &s.dofs, &p).to_csr())));
    g.bench_function("oseen", |b| b.iter(|| black_box(oseen(&m, &s.dofs, p.rho, &f.u).to_csr())));
    g.bench_function("nitsche", |b| b.iter(|| black_box(nitsche_matrix(&m, &s.dofs, &p, &nitsche).to_csr())));
    g.bench_function("transport_supg", |b| {
        b.iter(|| black_box(transport(&m, &s.dofs, p.diffusivity, &f.u, true).to_csr()))
    });
    g.finish();
}

fn bench_solve(c: &mut Criterion) {
    let (m, s, p) = channel();
    let mut t = stokes(&m, &s.dofs, &p);
    t.append(nitsche_matrix(&m, &s.dofs, &p, &NitscheParams::default()));
    let sys = SparseSystem {
        matrix: t.to_csr(),
        rhs: vec![0.0; s.dofs.n_flow()],
    };
    let reduced = apply_dirichlet(&sys, &s.dofs.flow);
    let mut g = c.benchmark_group("linear");
    g.sample_size(10);
    g.bench_function("stokes_lu_cold", |b| b.iter(|| black_box(DirectLu::new().solve(&reduced.system).unwrap())));
    let mut lu = DirectLu::new();
    g.bench_function("stokes_lu_warm", |b| b.iter(|| black_box(lu.solve(&reduced.system).unwrap())));
    g.finish();
}

fn bench_mesh(c: &mut Criterion) {
    let geom = ChannelGeometry::with_spacers(SpacerConfig::ZigZag, 3);
    let mut g = c.benchmark_group("mesh");
    g.sample_size(10);
    g.bench_function("zig_zag_16", |b| {
        b.iter(|| black_box(build_channel_mesh(&geom, &GradingSpec::toward_membrane(16, 1.2)).unwrap()))
    });
    g.finish();
}

criterion_group!(benches, bench_assembly, bench_solve, bench_mesh);
criterion_main!(benches);
