use std::collections::BTreeMap;
use std::f64::consts::PI;

use lambda1_core::mesh::{
    cylinder, equilateral_torus, flat_disk, flat_torus, icosphere, load, moebius, parse_imesh, save,
    square_torus, write_imesh, IcosphereParams, Orientability, Violation,
};
use lambda1_core::{DensityField, Error, IntrinsicMesh};

fn sphere(subdiv: usize) -> IntrinsicMesh {
    icosphere(IcosphereParams { subdiv, flat_cap: None }).unwrap().mesh
}

#[test]
fn icosahedron_counts() {
    let m = sphere(0);
    assert_eq!((m.vertex_count(), m.face_count(), m.edge_count()), (12, 20, 30));
    assert_eq!(m.euler_char(), 2);
    assert_eq!(m.orientability(), Orientability::Orientable);
    assert!(m.validate().is_empty());
}

#[test]
fn primitive_catalog() {
    let capped = icosphere(IcosphereParams { subdiv: 3, flat_cap: Some(0.4) }).unwrap().mesh;
    let cases: Vec<(&str, IntrinsicMesh, i64, Orientability, usize)> = vec![
        ("sphere", sphere(2), 2, Orientability::Orientable, 0),
        ("capped sphere", capped, 2, Orientability::Orientable, 0),
        ("torus", square_torus(12).unwrap(), 0, Orientability::Orientable, 0),
        ("equilateral torus", equilateral_torus(12).unwrap(), 0, Orientability::Orientable, 0),
        ("cylinder", cylinder(1.0, 16).unwrap(), 0, Orientability::Orientable, 2),
        ("moebius", moebius(1.0, 16, Some(8)).unwrap(), 0, Orientability::NonOrientable, 1),
        ("disk", flat_disk(0.5, 16).unwrap(), 1, Orientability::Orientable, 1),
    ];
    for (name, m, chi, orient, loops) in cases {
        assert!(m.validate().is_empty(), "{name}: {:?}", m.validate());
        assert_eq!(m.euler_char(), chi, "{name}");
        assert_eq!(m.orientability(), orient, "{name}");
        assert_eq!(m.boundary_loops().len(), loops, "{name}");
    }
}

#[test]
fn flat_primitive_areas_are_closed_form() {
    assert!((cylinder(1.0, 16).unwrap().area(None) - 4.0 * PI).abs() < 1e-12);
    assert!((moebius(1.0, 16, Some(8)).unwrap().area(None) - 2.0 * PI).abs() < 1e-12);
    assert!((square_torus(24).unwrap().area(None) - 1.0).abs() < 1e-12);
    let eq = equilateral_torus(20).unwrap();
    assert!((eq.area(None) - 3f64.sqrt() / 2.0).abs() < 1e-12);
    let skew = flat_torus([2.0, 0.0], [0.3, 1.5], 10, 7).unwrap();
    assert!((skew.area(None) - 3.0).abs() < 1e-12);
}

#[test]
fn sphere_area_converges() {
    let a = sphere(5).area(None);
    assert!((a / (4.0 * PI) - 1.0).abs() < 0.005, "{a}");
}

#[test]
fn area_is_linear_in_density() {
    let m = sphere(2);
    let rho: Vec<f64> = (0..m.vertex_count()).map(|v| 1.0 + (v % 7) as f64 * 0.1).collect();
    let r1 = DensityField::new(rho.clone()).unwrap();
    let r2 = DensityField::new(rho.iter().map(|x| 2.0 * x).collect()).unwrap();
    assert!((m.area(Some(&r2)) - 2.0 * m.area(Some(&r1))).abs() < 1e-12);
    let t = square_torus(16).unwrap();
    assert!((t.area(Some(&DensityField::uniform(t.vertex_count()))) - 1.0).abs() < 1e-12);
}

#[test]
fn odd_moebius_resolution_is_rejected() {
    assert!(moebius(1.0, 15, None).is_err());
    assert!(moebius(1.0, 6, None).is_err());
    assert!(moebius(0.0, 16, None).is_err());
    assert!(flat_torus([1.0, 0.0], [2.0, 0.0], 8, 8).is_err());
}

#[test]
fn triangle_inequality_violation_is_reported() {
    let mut m = sphere(1);
    let [a, b, c] = m.faces()[3];
    let sum = m.edge_length(a, c).unwrap() + m.edge_length(b, c).unwrap();
    m.set_edge_length(a, b, sum).unwrap();
    let v = m.validate();
    assert!(v.iter().any(|x| matches!(x, Violation::TriangleInequality { face: 3, .. })), "{v:?}");
}

#[test]
fn three_faces_on_an_edge_is_non_manifold() {
    let faces = vec![[0, 1, 2], [0, 1, 3], [1, 0, 4]];
    let mut l = BTreeMap::new();
    for f in &faces {
        for c in 0..3 {
            let (i, j) = (f[c], f[(c + 1) % 3]);
            l.insert([i.min(j), i.max(j)], 1.0);
        }
    }
    let m = IntrinsicMesh::new(5, faces, &l).unwrap();
    let v = m.validate();
    assert!(
        v.iter().any(|x| matches!(x, Violation::NonManifoldEdge { edge: [0, 1], faces: 3 })),
        "{v:?}"
    );
}

#[test]
fn save_load_round_trip() {
    let m = icosphere(IcosphereParams { subdiv: 1, flat_cap: Some(0.4) }).unwrap().mesh;
    let dir = std::env::temp_dir().join(format!("imesh-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ico1.imesh");
    save(&m, &path).unwrap();
    let back = load(&path).unwrap();
    assert_eq!(back, m);
    for (a, b) in back.lengths().iter().zip(m.lengths()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    std::fs::remove_dir_all(&dir).ok();

    let mb = moebius(1.0, 16, Some(8)).unwrap();
    let (again, _) = parse_imesh(&write_imesh(&mb, &[])).unwrap();
    assert_eq!(again, mb);
}

#[test]
fn save_is_deterministic() {
    let m = sphere(2);
    let c = vec!["provenance line".to_string()];
    assert_eq!(write_imesh(&m, &c), write_imesh(&m.clone(), &c));
    let (_, comments) = parse_imesh(&write_imesh(&m, &c)).unwrap();
    assert_eq!(comments, c);
}

fn line_of(e: Error) -> usize {
    match e {
        Error::Parse { line, .. } => line,
        other => panic!("expected a parse error, got {other}"),
    }
}

#[test]
fn malformed_files_are_rejected_with_line_numbers() {
    let good = "IMESH v1 3 1 0\no unknown\nf 0 1 2\ne 0 1 1.0\ne 0 2 1.0\ne 1 2 1.0\n";
    assert!(parse_imesh(good).is_ok());
    let negative = good.replace("e 1 2 1.0", "e 1 2 -1.0");
    assert_eq!(line_of(parse_imesh(&negative).unwrap_err()), 6);
    let dangling = good.replace("f 0 1 2", "f 0 1 7");
    assert_eq!(line_of(parse_imesh(&dangling).unwrap_err()), 3);
    assert_eq!(line_of(parse_imesh("MESH 3 1 0\n").unwrap_err()), 1);
}

#[test]
fn scaling_and_disjoint_union() {
    let t = square_torus(8).unwrap();
    assert!((t.scaled(3.0).unwrap().area(None) - 9.0).abs() < 1e-12);
    let two = t.disjoint_union(&t).unwrap();
    assert_eq!(two.component_count(), 2);
    assert_eq!(two.euler_char(), 0);
    assert!(two.validate().is_empty());
}

#[test]
fn capped_sphere_patch_is_flat() {
    for subdiv in [2, 3, 4] {
        let p = icosphere(IcosphereParams { subdiv, flat_cap: Some(0.4) }).unwrap();
        assert!(p.mesh.validate().is_empty(), "subdiv {subdiv}");
        assert_eq!(p.mesh.flat_patches().len(), 1);
        // density restores the round area
        let a = p.mesh.area(Some(&p.density));
        let round = sphere(subdiv).area(None);
        assert!((a / round - 1.0).abs() < 0.02, "{a} vs {round}");
    }
}
