use std::f64::consts::PI;

use lambda1_core::glue::{GluingKind, GluingSpec};
use lambda1_core::maximize::{
    extract_eigenmap, extremal_residual, fit_loglog, fit_loglog_log_corrected, gap_experiment, geomspace,
    gradient_at_point, maximize_conformal, mobius_balance, scaling_study, spec_grid, MaximizeOptions,
};
use lambda1_core::mesh::{equilateral_torus, flat_disk, icosphere, square_torus, unfold_patch, IcosphereParams, Primitive};
use lambda1_core::spectrum::{
    assemble_mass, assemble_stiffness, first_eigenspace, quadratic_form_q, solve_smallest,
};
use lambda1_core::{DensityField, EigenMap, IntrinsicMesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn round(subdiv: usize) -> Primitive {
    icosphere(IcosphereParams { subdiv, flat_cap: None }).unwrap()
}

fn capped(subdiv: usize) -> Primitive {
    icosphere(IcosphereParams { subdiv, flat_cap: Some(0.4) }).unwrap()
}

fn eigenmap_of(mesh: &IntrinsicMesh, rho: Option<&DensityField>) -> (EigenMap, f64) {
    let s = assemble_stiffness(mesh).unwrap();
    let m = assemble_mass(mesh, rho).unwrap();
    let res = solve_smallest(&s, &m, 10, 1e-9).unwrap();
    let (basis, _) = first_eigenspace(&res, 1e-4).unwrap();
    (extract_eigenmap(&basis, &m).unwrap(), res.lambda1())
}

#[test]
fn round_sphere_is_stationary() {
    let p = round(4);
    let (rho, trace) = maximize_conformal(&p.mesh, &p.density, &MaximizeOptions::default()).unwrap();
    for s in &trace.steps {
        assert!((s.value / (8.0 * PI) - 1.0).abs() < 0.01, "{}", s.value);
    }
    // unit-area output; uniform equivalent is 1 / area
    let a = p.mesh.vertex_areas();
    let total: f64 = a.iter().sum();
    let l1: f64 = rho.values().iter().zip(&a).map(|(r, w)| w * (r - 1.0 / total).abs()).sum();
    assert!(l1 < 0.05, "L1 distance {l1}");
}

#[test]
fn square_torus_trace_is_monotone() {
    let t = square_torus(24).unwrap();
    let opts = MaximizeOptions { max_iter: 15, ..MaximizeOptions::default() };
    let (_, trace) = maximize_conformal(&t, &DensityField::uniform(t.vertex_count()), &opts).unwrap();
    assert!((trace.initial() / (4.0 * PI * PI) - 1.0).abs() < 0.01);
    for w in trace.steps.windows(2) {
        assert!(w[1].value >= w[0].value * (1.0 - 1e-10));
    }
    assert!(trace.best() >= trace.initial());
    assert_eq!(trace.steps[0].multiplicity, 4);
}

#[test]
fn trace_is_invariant_under_density_scaling() {
    let p = capped(3);
    let opts = MaximizeOptions { max_iter: 6, ..MaximizeOptions::default() };
    let (_, a) = maximize_conformal(&p.mesh, &p.density, &opts).unwrap();
    let (_, b) = maximize_conformal(&p.mesh, &p.density.scaled(4.0), &opts).unwrap();
    let (_, c) = maximize_conformal(&p.mesh, &p.density.scaled(3.7), &opts).unwrap();
    assert_eq!(a.steps.len(), b.steps.len());
    assert_eq!(a.steps.len(), c.steps.len());
    for ((x, y), z) in a.steps.iter().zip(&b.steps).zip(&c.steps) {
        assert_eq!(x.value, y.value);
        assert!((x.value - z.value).abs() < 1e-9 * x.value);
    }
}

#[test]
fn sphere_eigenmap_is_the_identity() {
    let p = round(5);
    let s = assemble_stiffness(&p.mesh).unwrap();
    let m = assemble_mass(&p.mesh, None).unwrap();
    let (map, l1) = eigenmap_of(&p.mesh, None);
    assert_eq!(map.dimension(), 3);
    assert!(map.unit_defect < 0.02, "{}", map.unit_defect);
    let g = &map.gram;
    let mean = g.trace() / 3.0;
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { mean } else { 0.0 };
            assert!((g[(i, j)] - want).abs() < 1e-3 * mean, "{g}");
        }
    }
    for c in &map.components {
        let q = quadratic_form_q(&s, &m, l1, c, c);
        assert!(q.abs() < 1e-8 * s.energy(c), "{q}");
    }
}

#[test]
fn equilateral_torus_eigenmap_has_rank_six() {
    let t = equilateral_torus(24).unwrap();
    let (map, _) = eigenmap_of(&t, None);
    assert_eq!(map.dimension(), 6);
    assert!(map.unit_defect < 1e-6, "{}", map.unit_defect);
}

#[test]
fn one_dimensional_eigenspace_is_rejected() {
    let p = round(2);
    let m = assemble_mass(&p.mesh, None).unwrap();
    let v = vec![1.0; p.mesh.vertex_count()];
    assert!(extract_eigenmap(&[v], &m).is_err());
}

#[test]
fn extremal_residual_flags_random_density_and_is_scale_free() {
    let p = round(3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rho = DensityField::new((0..p.mesh.vertex_count()).map(|_| rng.gen_range(0.2..3.0)).collect()).unwrap();
    // a generic density has a simple first eigenvalue, so map by the three lowest modes
    let low_modes = |rho: &DensityField| {
        let s = assemble_stiffness(&p.mesh).unwrap();
        let m = assemble_mass(&p.mesh, Some(rho)).unwrap();
        let res = solve_smallest(&s, &m, 6, 1e-9).unwrap();
        (extract_eigenmap(&res.eigenvectors[1..4], &m).unwrap(), res.lambda1())
    };
    let (map, l1) = low_modes(&rho);
    let r = extremal_residual(&p.mesh, &rho, &map, l1).unwrap();
    assert!(r > 0.1, "{r}");

    let big = rho.scaled(3.0);
    let (map3, l3) = low_modes(&big);
    let r3 = extremal_residual(&p.mesh, &big, &map3, l3).unwrap();
    assert!((r - r3).abs() < 1e-6 * r, "{r} vs {r3}");

    let (um, ul) = eigenmap_of(&p.mesh, None);
    let ur = extremal_residual(&p.mesh, &DensityField::uniform(p.mesh.vertex_count()), &um, ul).unwrap();
    assert!(ur < r);
}

fn positions(p: &Primitive) -> Vec<Vec<f64>> {
    p.positions.as_ref().unwrap().iter().map(|x| x.to_vec()).collect()
}

#[test]
fn balanced_map_needs_no_iterations() {
    let pts = vec![
        vec![1.0, 0.0, 0.0],
        vec![-1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, -1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, -1.0],
    ];
    let b = mobius_balance(&pts, &[1.0; 6], 1e-12, None).unwrap();
    assert_eq!(b.iterations, 0);
    assert!(b.a.iter().all(|x| *x == 0.0));
}

#[test]
fn point_mass_at_the_pole_is_balanced() {
    let p = round(4);
    let mut mu = p.mesh.vertex_areas();
    let total: f64 = mu.iter().sum();
    // vertex 0 is the north pole; an atom of half the total mass or more cannot be balanced
    mu[0] += 0.5 * total;
    let b = mobius_balance(&positions(&p), &mu, 1e-8, Some(&p.mesh)).unwrap();
    assert!(b.residual < 1e-8);
    assert!(b.a.iter().map(|x| x * x).sum::<f64>() < 1.0);
    assert!(b.a[2] < 0.0, "the pole mass must be pushed away");
    let e = b.energy_after.unwrap();
    assert!((e / (8.0 * PI) - 1.0).abs() < 0.02, "{e}");
    let e0 = b.energy_before.unwrap();
    assert!((e0 / (8.0 * PI) - 1.0).abs() < 0.01, "{e0}");
}

#[test]
fn balancing_rejects_bad_input() {
    let p = round(1);
    let mut pts = positions(&p);
    let mu = vec![1.0; pts.len()];
    pts[3] = vec![0.0, 0.0, 1.2];
    assert!(mobius_balance(&pts, &mu, 1e-8, None).is_err());
    let hemi = vec![vec![0.0, 0.0, 1.0]; 5];
    assert!(mobius_balance(&hemi, &[1.0; 5], 1e-8, None).is_err());
    assert!(mobius_balance(&positions(&p), &vec![0.0; p.mesh.vertex_count()], 1e-8, None).is_err());
}

#[test]
fn gradient_probe_cases() {
    let p = round(4);
    let zero = vec![vec![3.0; p.mesh.vertex_count()]];
    assert_eq!(gradient_at_point(&p.mesh, &zero, 7).unwrap(), 0.0);

    let (map, _) = eigenmap_of(&p.mesh, None);
    let at0 = gradient_at_point(&p.mesh, &map.components, 0).unwrap();
    let at9 = gradient_at_point(&p.mesh, &map.components, 9).unwrap();
    assert!((at0 - 2.0).abs() < 0.05 && (at9 - 2.0).abs() < 0.05, "{at0} {at9}");

    let d = flat_disk(1.0, 32).unwrap();
    let coords = unfold_patch(&d, d.flat_patches()[0]).unwrap();
    let (a, b) = (0.7, -1.3);
    let u: Vec<f64> = (0..d.vertex_count())
        .map(|v| {
            // only the one-ring of the center matters
            coords.get(v).map_or(0.0, |x| a * x[0] + b * x[1] + 0.25)
        })
        .collect();
    let center = d.flat_patches()[0].center;
    let g = gradient_at_point(&d, &[u.clone()], center).unwrap();
    assert!((g - (a * a + b * b)).abs() < 1e-12, "{g}");
    let edge = d.boundary_loops()[0].vertices[0];
    assert!(gradient_at_point(&d, &[u], edge).is_err());
}

#[test]
fn synthetic_power_laws() {
    let eps = geomspace(1e-3, 1e-1, 5);
    let linear = fit_loglog(&eps, &eps);
    assert!((linear.slope - 1.0).abs() < 0.01);
    assert!(linear.ci_low <= 1.0 && linear.ci_high >= 1.0 - 1e-9);

    let ylog: Vec<f64> = eps.iter().map(|e| e * e.ln().abs()).collect();
    // numpy.polyfit(log(eps), log(eps*|log eps|), 1) on the same five points
    let raw = fit_loglog(&eps, &ylog);
    assert!((raw.slope - 0.76478).abs() < 1e-4, "{}", raw.slope);
    assert!(raw.ci_low < raw.slope && raw.slope < raw.ci_high);
    let corrected = fit_loglog_log_corrected(&eps, &ylog);
    assert!((corrected.slope - 1.0).abs() < 1e-12);

    assert!(!fit_loglog(&eps, &[0.3; 5]).is_defined());
}

#[test]
fn small_gap_experiment() {
    let p = capped(4);
    let opts = MaximizeOptions { max_iter: 20, ..MaximizeOptions::default() };
    let grid = vec![GluingSpec::crosscap(0, 0.1, 1.0, 32)];
    let rep = gap_experiment(&p.mesh, &p.density, &grid, &opts).unwrap();
    let row = &rep.rows[0];
    assert!(row.glued_max >= row.glued_initial);
    assert!(row.gap > 0.0, "gap {}", row.gap);
    assert!(!row.zero_density_at_p);
    assert_eq!(rep.argmax, 0);
    assert!(gap_experiment(&p.mesh, &p.density, &[], &opts).is_err());
}

#[test]
fn vanishing_density_at_p_is_flagged() {
    let p = capped(4);
    let mut r = p.density.values().to_vec();
    r[0] = 0.0;
    let rho = DensityField::new(r).unwrap();
    let opts = MaximizeOptions { max_iter: 2, ..MaximizeOptions::default() };
    let rep = gap_experiment(&p.mesh, &rho, &[GluingSpec::crosscap(0, 0.1, 1.0, 32)], &opts).unwrap();
    assert!(rep.rows[0].zero_density_at_p);
    assert!(rep.max_gap.is_finite());
}

#[test]
fn spec_grid_orders_eps_outer() {
    let g = spec_grid(GluingKind::Crosscap, 0, 0.0, &[0.05, 0.1], &[1.0, 2.0, 3.0], 32);
    assert_eq!(g.len(), 6);
    assert_eq!((g[2].eps, g[2].half_length), (0.05, 3.0));
    assert_eq!((g[3].eps, g[3].half_length), (0.1, 1.0));
}

#[test]
fn scaling_study_validates_and_reports() {
    let p = capped(4);
    let opts = MaximizeOptions { max_iter: 4, ..MaximizeOptions::default() };
    let fam = |eps: &[f64]| -> Vec<GluingSpec> { eps.iter().map(|&e| GluingSpec::crosscap(0, e, 1.0, 32)).collect() };
    assert!(scaling_study(&p.mesh, &p.density, &fam(&[0.1, 0.05, 0.025]), &opts).is_err());
    assert!(scaling_study(&p.mesh, &p.density, &fam(&[0.1, 0.05, 0.03, 0.01]), &opts).is_err());
    let mut mixed = fam(&[0.1, 0.05, 0.025, 0.0125]);
    mixed[1] = GluingSpec::handle(0, 0.0, 0.02, 1.0, 32);
    assert!(scaling_study(&p.mesh, &p.density, &mixed, &opts).is_err());

    let rep = scaling_study(&p.mesh, &p.density, &fam(&[0.0125, 0.025, 0.05, 0.1]), &opts).unwrap();
    assert_eq!(rep.rows.len(), 4);
    for r in &rep.rows {
        assert!(r.dimension >= 2);
        assert!(r.unit_defect_l2.is_finite() && r.grad_at_p.is_finite());
        assert!(r.transfer_discrepancy < 0.05, "{}", r.transfer_discrepancy);
    }
    assert_eq!(rep.unit_defect_slope.points, 4);
}
