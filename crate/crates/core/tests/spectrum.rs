use std::collections::BTreeMap;
use std::f64::consts::PI;

use lambda1_core::mesh::{equilateral_torus, icosphere, square_torus, IcosphereParams};
use lambda1_core::spectrum::{
    assemble_mass, assemble_stiffness, first_eigenspace, normalized_lambda1, project_first_eigenspace,
    quadratic_form_q, solve_smallest,
};
use lambda1_core::{DensityField, IntrinsicMesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sphere(subdiv: usize) -> IntrinsicMesh {
    icosphere(IcosphereParams { subdiv, flat_cap: None }).unwrap().mesh
}

fn mesh_from(n: usize, faces: Vec<[usize; 3]>, len: impl Fn(usize, usize) -> f64) -> IntrinsicMesh {
    let mut l = BTreeMap::new();
    for f in &faces {
        for c in 0..3 {
            let (i, j) = (f[c].min(f[(c + 1) % 3]), f[c].max(f[(c + 1) % 3]));
            l.insert([i, j], len(i, j));
        }
    }
    IntrinsicMesh::new(n, faces, &l).unwrap()
}

#[test]
fn equilateral_face_weights_and_masses() {
    let m = mesh_from(3, vec![[0, 1, 2]], |_, _| 1.0);
    let s = assemble_stiffness(&m).unwrap();
    let w = 1.0 / (2.0 * 3f64.sqrt());
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        assert!((s.matrix().get(i, j) + w).abs() < 1e-15);
    }
    let mass = assemble_mass(&m, None).unwrap();
    for &d in mass.diagonal() {
        assert!((d - 3f64.sqrt() / 12.0).abs() < 1e-15);
    }
}

#[test]
fn right_triangles_have_zero_diagonal_weight() {
    // unit square 0-1-2-3 split along 0-2
    let pos = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let m = mesh_from(4, vec![[0, 1, 2], [0, 2, 3]], |i, j| {
        let (p, q): ([f64; 2], [f64; 2]) = (pos[i], pos[j]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    });
    let s = assemble_stiffness(&m).unwrap();
    assert!(s.matrix().get(0, 2).abs() < 1e-15);
    for (i, j) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
        assert!((s.matrix().get(i, j) + 0.5).abs() < 1e-15, "{i}-{j}");
    }
}

#[test]
fn stiffness_is_symmetric_with_zero_row_sums() {
    let s = assemble_stiffness(&sphere(3)).unwrap();
    let a = s.matrix();
    assert!(a.max_abs_asymmetry() < 1e-14);
    for i in 0..a.dim() {
        let sum: f64 = a.row(i).map(|(_, v)| v).sum();
        assert!(sum.abs() < 1e-12 * a.max_abs());
    }
}

#[test]
fn mass_trace_is_area() {
    let m = sphere(3);
    let rho = DensityField::new((0..m.vertex_count()).map(|v| 0.5 + (v % 5) as f64).collect()).unwrap();
    let mass = assemble_mass(&m, Some(&rho)).unwrap();
    assert!((mass.trace() - m.area(Some(&rho))).abs() < 1e-12 * mass.trace());
}

#[test]
fn zero_density_vertex_shrinks_its_mass() {
    let t = square_torus(16).unwrap();
    let mut r = vec![1.0; t.vertex_count()];
    r[5] = 0.0;
    let full = assemble_mass(&t, None).unwrap();
    let cut = assemble_mass(&t, Some(&DensityField::new(r.clone()).unwrap())).unwrap();
    assert!(cut.diagonal()[5] < full.diagonal()[5]);
    assert!(cut.diagonal().iter().all(|&d| d >= 0.0));
    // pencil still solvable
    let s = assemble_stiffness(&t).unwrap();
    let res = solve_smallest(&s, &cut, 6, 1e-9).unwrap();
    assert!(res.lambda1() > 0.0);

    let zero = DensityField::new(vec![0.0; t.vertex_count()]).unwrap();
    assert!(assemble_mass(&t, Some(&zero)).is_err());
}

#[test]
fn square_torus_oracle() {
    let t = square_torus(64).unwrap();
    let s = assemble_stiffness(&t).unwrap();
    let m = assemble_mass(&t, None).unwrap();
    let res = solve_smallest(&s, &m, 8, 1e-9).unwrap();
    let lb = res.lambda1() * t.area(None);
    assert!((lb / (4.0 * PI * PI) - 1.0).abs() < 0.01, "{lb}");
    assert_eq!(res.first_multiplicity(1e-4), 4);
    assert!(res.eigenvalues[0].abs() <= 1e-10 * res.lambda1());
}

#[test]
fn equilateral_torus_oracle() {
    let t = equilateral_torus(48).unwrap();
    let lb = normalized_lambda1(&t, None).unwrap();
    let exact = 8.0 * PI * PI / 3f64.sqrt();
    assert!((lb / exact - 1.0).abs() < 0.01, "{lb} vs {exact}");
}

#[test]
fn sphere_spectrum_has_triple_first_eigenvalue() {
    let m = sphere(4);
    let s = assemble_stiffness(&m).unwrap();
    let mass = assemble_mass(&m, None).unwrap();
    let res = solve_smallest(&s, &mass, 10, 1e-9).unwrap();
    assert_eq!(res.first_multiplicity(1e-4), 3);
    assert!((res.lambda1() - 2.0).abs() < 0.02);
    assert!((res.eigenvalues[4] - 6.0).abs() < 0.1, "{}", res.eigenvalues[4]);
    // mass-orthonormal
    for i in 0..res.eigenvectors.len() {
        for j in 0..=i {
            let ip = mass.inner(&res.eigenvectors[i], &res.eigenvectors[j]);
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-8, "{i} {j} {ip}");
        }
    }
    for (r, v) in res.residuals.iter().zip(&res.eigenvalues) {
        assert!(*r <= 1e-9, "residual {r} at {v}");
    }
}

#[test]
fn two_components_have_two_dimensional_kernel() {
    let t = square_torus(10).unwrap();
    let two = t.disjoint_union(&t).unwrap();
    let s = assemble_stiffness(&two).unwrap();
    let m = assemble_mass(&two, None).unwrap();
    let res = solve_smallest(&s, &m, 4, 1e-9).unwrap();
    assert!(res.eigenvalues[0].abs() < 1e-8 && res.eigenvalues[1].abs() < 1e-8);
    assert!(res.eigenvalues[2] > 1.0);
}

#[test]
fn normalized_value_is_scale_invariant() {
    let m = sphere(3);
    let base = normalized_lambda1(&m, None).unwrap();
    let big = normalized_lambda1(&m.scaled(3.7).unwrap(), None).unwrap();
    assert!((big / base - 1.0).abs() < 1e-8);
    let rho = DensityField::new((0..m.vertex_count()).map(|v| 1.0 + 0.3 * ((v * 7) % 11) as f64 / 11.0).collect()).unwrap();
    let a = normalized_lambda1(&m, Some(&rho)).unwrap();
    let b = normalized_lambda1(&m, Some(&rho.scaled(5.0))).unwrap();
    assert!((a / b - 1.0).abs() < 1e-10);
}

#[test]
fn torus_eigenvalue_converges_at_second_order() {
    let exact = 4.0 * PI * PI;
    let err: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| (normalized_lambda1(&square_torus(n).unwrap(), None).unwrap() - exact).abs())
        .collect();
    for w in err.windows(2) {
        let slope = (w[0] / w[1]).log2();
        assert!((1.8..=2.2).contains(&slope), "slope {slope}, errors {err:?}");
    }
}

#[test]
fn first_eigenspace_demands_enough_eigenvalues() {
    let m = sphere(2);
    let s = assemble_stiffness(&m).unwrap();
    let mass = assemble_mass(&m, None).unwrap();
    let short = solve_smallest(&s, &mass, 4, 1e-9).unwrap();
    assert!(first_eigenspace(&short, 1e-4).is_err());
    let ok = solve_smallest(&s, &mass, 6, 1e-9).unwrap();
    let (basis, k) = first_eigenspace(&ok, 1e-4).unwrap();
    assert_eq!((basis.len(), k), (3, 3));
}

#[test]
fn generic_density_on_torus_has_simple_or_small_cluster() {
    let t = square_torus(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rho = DensityField::new((0..t.vertex_count()).map(|_| rng.gen_range(0.5..1.5)).collect()).unwrap();
    let s = assemble_stiffness(&t).unwrap();
    let m = assemble_mass(&t, Some(&rho)).unwrap();
    let res = solve_smallest(&s, &m, 8, 1e-9).unwrap();
    let (_, k) = first_eigenspace(&res, 1e-4).unwrap();
    assert!(k >= 1);
}

#[test]
fn quadratic_form_and_projection() {
    let m = sphere(3);
    let s = assemble_stiffness(&m).unwrap();
    let mass = assemble_mass(&m, None).unwrap();
    let res = solve_smallest(&s, &mass, 8, 1e-9).unwrap();
    let (basis, k) = first_eigenspace(&res, 1e-4).unwrap();
    let l1 = res.lambda1();
    let next = &res.eigenvectors[k + 1];
    let lk1 = res.eigenvalues[k + 1];
    assert!(quadratic_form_q(&s, &mass, l1, &basis[0], &basis[0]).abs() < 1e-8);
    assert!((quadratic_form_q(&s, &mass, l1, next, next) - (lk1 - l1)).abs() < 1e-8);

    // span member projects to itself, the next mode to zero
    let u: Vec<f64> = basis[0].iter().zip(&basis[2]).map(|(a, b)| 2.0 * a - b).collect();
    let p = project_first_eigenspace(&basis, &mass, &u);
    assert!(u.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-10));
    assert!(project_first_eigenspace(&basis, &mass, next).iter().all(|x| x.abs() < 1e-8));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ones = vec![1.0; m.vertex_count()];
    let total = mass.inner(&ones, &ones);
    for _ in 0..10 {
        let mut u: Vec<f64> = (0..m.vertex_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = mass.inner(&u, &ones) / total;
        u.iter_mut().for_each(|x| *x -= c);
        assert!(quadratic_form_q(&s, &mass, l1, &u, &u) >= -1e-10);
        let phi = project_first_eigenspace(&basis, &mass, &u);
        let w: Vec<f64> = u.iter().zip(&phi).map(|(a, b)| a - b).collect();
        let q = quadratic_form_q(&s, &mass, l1, &w, &w);
        let bound = (1.0 - l1 / lk1) * s.energy(&w);
        assert!(q - bound >= -1e-10 * s.energy(&w), "{q} < {bound}");
    }
}
