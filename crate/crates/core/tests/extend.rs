use lambda1_core::extend::{
    conformal_log_pullback, dirichlet_energy, harmonic_extend, min_cylinder_energy,
    mode_checks_csv, refined_extend_crosscap, refined_extend_handle, split_even_odd,
    verify_extension_modes, CircleTrace, CylinderField, NeckKind, Splitting,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn single_mode_trace(band: usize, k: i64, a: Complex64) -> CircleTrace {
    let mut v = vec![c(0.0, 0.0); 2 * band + 1];
    v[(k + band as i64) as usize] = a;
    v[(-k + band as i64) as usize] = a.conj();
    CircleTrace::new(band, vec![v]).unwrap()
}

#[test]
fn harmonic_extension_of_first_mode_has_energy_two_pi() {
    // real trace 2 Re(e^{i theta}/2) = cos theta has energy pi; the complex pair sums to 2 * 2 pi |1/2|^2
    let h = harmonic_extend(&single_mode_trace(4, 1, c(0.5, 0.0)));
    assert!((dirichlet_energy(&h) - PI).abs() < 1e-14);
    // boundary restriction is the trace
    for th in [0.0, 0.7, 2.0] {
        assert!((h.eval(0, 1.0, th) - th.cos()).abs() < 1e-14);
        assert!((h.eval(0, 0.5, th) - 0.5 * th.cos()).abs() < 1e-14);
    }
}

#[test]
fn constant_trace_extends_to_zero_energy() {
    let h = harmonic_extend(&single_mode_trace(3, 0, c(2.5, 0.0)));
    assert_eq!(dirichlet_energy(&h), 0.0);
    assert!((h.eval(0, 0.3, 1.0) - 2.5).abs() < 1e-15);
}

#[test]
fn min_cylinder_energy_closed_forms() {
    let l = 1.5 * 2f64.ln();
    let e = min_cylinder_energy(1, l, c(1.0, 0.0));
    assert!((e - 2.0 * PI * 7.0 / 9.0).abs() < 1e-13);
    assert!((min_cylinder_energy(1, 40.0, c(1.0, 0.0)) - 2.0 * PI).abs() < 1e-12);
    let e2 = min_cylinder_energy(3, 2.0, c(2.0, 0.0));
    assert!((e2 - 4.0 * min_cylinder_energy(3, 2.0, c(1.0, 0.0))).abs() < 1e-12);
    assert_eq!(min_cylinder_energy(0, 2.0, c(1.0, 0.0)), 0.0);
}

#[test]
fn cosh_profile_energy_matches_tanh() {
    let l = 1.3;
    let u = CylinderField::from_profiles(NeckKind::Crosscap, l, 2, 1, 40, |_, k, t| {
        if k == 2 {
            c((2.0 * t).cosh() / (2.0 * l).cosh() * 0.5, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
    .unwrap();
    // real field cos(2 theta) cosh(2t)/cosh(2L): energy = 2 * 2 pi * 2 tanh(2L) / 4
    let expect = PI * 2.0 * (2.0 * l).tanh();
    assert!((dirichlet_energy(&u) - expect).abs() < 1e-11);
}

#[test]
fn crosscap_rejects_odd_mode_not_vanishing_on_core() {
    let r = CylinderField::from_profiles(NeckKind::Crosscap, 1.0, 1, 1, 4, |_, k, _| {
        if k == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) }
    });
    assert!(r.is_err());
}

#[test]
fn splitting_parity_of_pure_modes() {
    let odd = CylinderField::from_profiles(NeckKind::Crosscap, 1.0, 2, 1, 6, |_, k, t| {
        if k == 1 { c(t, 0.0) } else { c(0.0, 0.0) }
    })
    .unwrap();
    let (e, o) = split_even_odd(&odd, Splitting::CrosscapRotation).unwrap();
    assert_eq!(dirichlet_energy(&e), 0.0);
    assert!((dirichlet_energy(&o) - dirichlet_energy(&odd)).abs() < 1e-15);
    assert!(split_even_odd(&odd, Splitting::HandleReflection).is_err());
}

#[test]
fn sine_mode_pullback_preserves_energy() {
    let l = 2.0;
    let u = CylinderField::from_profiles(NeckKind::Crosscap, l, 1, 1, 30, |_, k, t| {
        if k == 1 { c((PI * t / (2.0 * l)).sin(), 0.0) } else { c(0.0, 0.0) }
    })
    .unwrap();
    let d = conformal_log_pullback(&u).unwrap();
    assert!((dirichlet_energy(&d) - dirichlet_energy(&u)).abs() < 1e-8 * dirichlet_energy(&u));
    assert_eq!(d.eval(0, 0.5 * (-l).exp(), 0.3), 0.0);
    // antipodal oddness
    for (r, th) in [(0.4, 0.1), (0.9, 2.0)] {
        assert!((d.eval(0, r, th) + d.eval(0, r, th + PI)).abs() < 1e-13);
    }
}

#[test]
fn pullback_rejects_non_odd_field() {
    let u = CylinderField::from_profiles(NeckKind::Crosscap, 1.0, 2, 1, 4, |_, k, _| {
        if k == 2 { c(1.0, 0.0) } else { c(0.0, 0.0) }
    })
    .unwrap();
    assert!(conformal_log_pullback(&u).is_err());
}

#[test]
fn per_mode_certificate_matches_coth() {
    let rows = verify_extension_modes(32, &[1.5 * 2f64.ln(), 2.0], 1e-10);
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| r.pass));
    let csv = mode_checks_csv(&rows);
    assert_eq!(csv.lines().count(), 65);
}

#[test]
fn trace_fit_recovers_band_limited_samples() {
    let n = 32;
    let s: Vec<f64> = (0..n)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / n as f64;
            1.0 + 0.5 * th.cos() - 0.25 * (3.0 * th).sin()
        })
        .collect();
    let (t, res) = CircleTrace::fit_samples(&s, 8).unwrap();
    assert!(res < 1e-14);
    assert!((t.coeff(0, 3) - c(0.0, 0.125)).norm() < 1e-15);
    assert!(CircleTrace::fit_samples(&s, 16).is_err());
}

fn random_field(kind: NeckKind, seed: u64, band: usize, l: f64) -> CylinderField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CylinderField::random(kind, l, band, 2, 10, &mut rng).unwrap()
}

#[test]
fn crosscap_trace_and_energy_drop() {
    let u = random_field(NeckKind::Crosscap, 11, 8, 2.0);
    let k = refined_extend_crosscap(&u).unwrap();
    let tr = k.boundary_trace();
    let ut = u.trace_at(2.0);
    for comp in 0..2 {
        for m in -8..=8 {
            assert!((tr.coeff(comp, m) - ut.coeff(comp, m)).norm() < 1e-13);
        }
    }
    let (ue, _) = split_even_odd(&u, Splitting::CrosscapRotation).unwrap();
    let ke = harmonic_extend(&ue.trace_at(2.0));
    let lhs = dirichlet_energy(&k) - dirichlet_energy(&u);
    let rhs = dirichlet_energy(&ke) - dirichlet_energy(&ue);
    assert!((lhs - rhs).abs() < 1e-8 * dirichlet_energy(&u).max(1.0), "{lhs} {rhs}");
}

#[test]
fn handle_extension_equivariance_and_vanishing() {
    let (l, eps, alpha) = (1.7, 0.01, 0.4);
    let u = random_field(NeckKind::Handle, 5, 6, l);
    let (_, uo) = split_even_odd(&u, Splitting::HandleReflection).unwrap();
    let (dp, dq) = refined_extend_handle(&uo, alpha, eps).unwrap();
    let inner = 0.5 * eps * (-l).exp();
    assert_eq!(dp.eval(0, inner, 1.0), 0.0);
    assert_eq!(dq.eval(1, inner, 1.0), 0.0);
    // odd part: iota maps the p-disk point (r, psi) to the q-disk point (r, 2 alpha - psi), value negates
    for (r, psi) in [(0.5 * eps, 0.2), (0.9 * eps, 3.0), (0.3 * eps, 5.5)] {
        let vp = dp.eval(0, r, psi);
        let vq = dq.eval(0, r, 2.0 * alpha - psi);
        assert!((vp + vq).abs() < 1e-10);
    }
    let e = dirichlet_energy(&dp) + dirichlet_energy(&dq);
    assert!((e - dirichlet_energy(&uo)).abs() < 1e-8 * dirichlet_energy(&uo));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_is_idempotent_and_energy_orthogonal(seed in 0u64..1000, handle in any::<bool>()) {
        let kind = if handle { NeckKind::Handle } else { NeckKind::Crosscap };
        let how = if handle { Splitting::HandleReflection } else { Splitting::CrosscapRotation };
        let u = random_field(kind, seed, 5, 1.5);
        let (e, o) = split_even_odd(&u, how).unwrap();
        let tot = dirichlet_energy(&u);
        prop_assert!((dirichlet_energy(&e) + dirichlet_energy(&o) - tot).abs() <= 1e-12 * tot.max(1.0));
        let (ee, eo) = split_even_odd(&e, how).unwrap();
        prop_assert_eq!(dirichlet_energy(&eo), 0.0);
        prop_assert!((dirichlet_energy(&ee) - dirichlet_energy(&e)).abs() <= 1e-14 * tot.max(1.0));
        for (th, t) in [(0.3, 0.2), (2.0, 1.1)] {
            let s = e.eval(0, th, t) + o.eval(0, th, t);
            prop_assert!((s - u.eval(0, th, t)).abs() < 1e-12);
        }
    }
}
