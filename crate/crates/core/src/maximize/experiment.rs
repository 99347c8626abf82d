//! Gap and scaling experiments over families of surgeries.

use rayon::prelude::*;

use super::ascent::{maximize_conformal, MaximizeOptions};
use super::eigenmap::{extract_eigenmap, gradient_at_point};
use super::fit::{fit_loglog, fit_loglog_log_corrected, SlopeFit};
use crate::error::{Error, Result};
use crate::extend::transfer_onto;
use crate::glue::{glue, GluingKind, GluingSpec};
use crate::mesh::{DensityField, IntrinsicMesh};
use crate::spectrum::{assemble_mass, assemble_stiffness, first_eigenspace, project_first_eigenspace, solve_smallest};

#[derive(Clone, Debug, serde::Serialize)]
pub struct GapRow {
    pub kind: GluingKind,
    pub eps: f64,
    pub half_length: f64,
    pub n: usize,
    /// lambda1-bar of the surgered-then-refilled base with the interpolated base density.
    pub base: f64,
    pub glued_initial: f64,
    pub glued_max: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Base density at the surgery point vanishes, so no gap is predicted.
    pub zero_density_at_p: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct GapReport {
    pub rows: Vec<GapRow>,
    pub max_gap: f64,
    pub argmax: usize,
}

fn gap_row(base: &IntrinsicMesh, rho: &DensityField, spec: &GluingSpec, opts: &MaximizeOptions) -> Result<GapRow> {
    let g = glue(base, Some(rho), spec)?;
    let refilled = g.refilled_base()?;
    let base_value = {
        let s = assemble_stiffness(&refilled.mesh)?;
        let m = assemble_mass(&refilled.mesh, Some(&refilled.density))?;
        solve_smallest(&s, &m, 6, opts.eig_tol)?.lambda1() * refilled.mesh.area(Some(&refilled.density))
    };
    let (_, trace) = maximize_conformal(&g.mesh, &g.density, opts)?;
    Ok(GapRow {
        kind: spec.kind,
        eps: spec.eps,
        half_length: spec.half_length,
        n: spec.n,
        base: base_value,
        glued_initial: trace.initial(),
        glued_max: trace.best(),
        gap: trace.best() - base_value,
        iterations: trace.steps.len() - 1,
        converged: trace.converged,
        zero_density_at_p: g.center_density == 0.0,
        warnings: spec.warnings(),
    })
}

/// For each spec: glue, maximize lambda1-bar in the conformal class of the glued
/// surface, and compare with the like-for-like refilled base. Rows keep grid order.
pub fn gap_experiment(
    base: &IntrinsicMesh,
    rho: &DensityField,
    grid: &[GluingSpec],
    opts: &MaximizeOptions,
) -> Result<GapReport> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("gap experiment needs at least one grid point".into()));
    }
    let rows: Vec<GapRow> = grid
        .par_iter()
        .map(|spec| gap_row(base, rho, spec, opts))
        .collect::<Result<_>>()?;
    let mut argmax = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.gap > rows[argmax].gap {
            argmax = i;
        }
    }
    Ok(GapReport {
        max_gap: rows[argmax].gap,
        argmax,
        rows,
    })
}

/// Cartesian grid of specs (eps outer, L inner).
pub fn spec_grid(kind: GluingKind, p: usize, v_angle: f64, eps: &[f64], lengths: &[f64], n: usize) -> Vec<GluingSpec> {
    let mut out = Vec::new();
    for &e in eps {
        for &l in lengths {
            out.push(match kind {
                GluingKind::Crosscap => GluingSpec::crosscap(p, e, l, n),
                GluingKind::Handle => GluingSpec::handle(p, v_angle, e, l, n),
            });
        }
    }
    out
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ScalingRow {
    pub eps: f64,
    pub lambda_bar: f64,
    pub dimension: usize,
    /// || 1 - |Phi_eps| ||^2 in L2 of the base after transfer and projection.
    pub unit_defect_l2: f64,
    /// |d Phi_eps(p)|^2 at the surgery point.
    pub grad_at_p: f64,
    pub transfer_discrepancy: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ScalingReport {
    pub kind: GluingKind,
    pub rows: Vec<ScalingRow>,
    pub unit_defect_slope: SlopeFit,
    pub grad_slope: SlopeFit,
    /// Slope of |d Phi(p)|^2 / |log eps|, the exponent under an eps |log eps| law.
    pub grad_slope_log_corrected: SlopeFit,
}

fn scaling_row(base: &IntrinsicMesh, rho: &DensityField, spec: &GluingSpec, opts: &MaximizeOptions) -> Result<ScalingRow> {
    let g = glue(base, Some(rho), spec)?;
    let (rho_star, trace) = maximize_conformal(&g.mesh, &g.density, opts)?;
    let s = assemble_stiffness(&g.mesh)?;
    let m = assemble_mass(&g.mesh, Some(&rho_star))?;
    let res = solve_smallest(&s, &m, 12, opts.eig_tol)?;
    let (basis, _) = first_eigenspace(&res, opts.cluster_tol)?;
    let map = extract_eigenmap(&basis, &m)?;

    let refilled = g.refilled_base()?;
    let bs = assemble_stiffness(&refilled.mesh)?;
    let bm = assemble_mass(&refilled.mesh, Some(&refilled.density))?;
    let bres = solve_smallest(&bs, &bm, 12, opts.eig_tol)?;
    let (bbasis, _) = first_eigenspace(&bres, opts.cluster_tol)?;
    let mut comps = Vec::new();
    let mut disc = 0.0f64;
    for c in &map.components {
        let t = transfer_onto(c, &g, &refilled, spec.n / 4)?;
        disc = disc.max(t.relative_discrepancy());
        comps.push(project_first_eigenspace(&bbasis, &bm, &t.values));
    }
    let mut defect = 0.0;
    for (v, w) in bm.diagonal().iter().enumerate() {
        let r: f64 = comps.iter().map(|c| c[v] * c[v]).sum::<f64>().sqrt();
        defect += w * (1.0 - r).powi(2);
    }
    let p = refilled.disks[0].center;
    Ok(ScalingRow {
        eps: spec.eps,
        lambda_bar: trace.best(),
        dimension: map.dimension(),
        unit_defect_l2: defect,
        grad_at_p: gradient_at_point(&refilled.mesh, &comps, p)?,
        transfer_discrepancy: disc,
    })
}

/// Runs the glued maximization along a family of specs differing in eps, transfers the
/// eigenmaps to the base, and fits log-log exponents. Purely descriptive: no bound on
/// the exponents is asserted.
pub fn scaling_study(
    base: &IntrinsicMesh,
    rho: &DensityField,
    family: &[GluingSpec],
    opts: &MaximizeOptions,
) -> Result<ScalingReport> {
    if family.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "scaling study needs at least 4 values of eps, got {}",
            family.len()
        )));
    }
    let kind = family[0].kind;
    if family.iter().any(|s| s.kind != kind) {
        return Err(Error::InvalidInput("scaling family mixes surgery kinds".into()));
    }
    let eps: Vec<f64> = family.iter().map(|s| s.eps).collect();
    let ratio = eps[1] / eps[0];
    if eps.windows(2).any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-6) || ratio == 1.0 {
        return Err(Error::InvalidInput("eps values must form a geometric sequence".into()));
    }
    let rows: Vec<ScalingRow> = family
        .par_iter()
        .map(|spec| scaling_row(base, rho, spec, opts))
        .collect::<Result<_>>()?;
    let d: Vec<f64> = rows.iter().map(|r| r.unit_defect_l2).collect();
    let gp: Vec<f64> = rows.iter().map(|r| r.grad_at_p).collect();
    Ok(ScalingReport {
        kind,
        unit_defect_slope: fit_loglog(&eps, &d),
        grad_slope: fit_loglog(&eps, &gp),
        grad_slope_log_corrected: fit_loglog_log_corrected(&eps, &gp),
        rows,
    })
}
