use std::path::Path;

use lambda1_core::extend::{mode_checks_csv, verify_extension_modes};
use lambda1_core::glue::{glue, GluingKind, GluingSpec};
use lambda1_core::maximize::{gap_experiment, maximize_conformal, scaling_study, spec_grid, AscentMethod, MaximizeOptions};
use lambda1_core::mesh::{
    cylinder, equilateral_torus, flat_disk, flat_torus, icosphere, load, moebius, square_torus, IcosphereParams,
};
use lambda1_core::spectrum::{assemble_mass, assemble_stiffness, EigenSolver, SolverOptions};
use lambda1_core::{DensityField, IntrinsicMesh};
use serde_json::{json, Value};

use crate::config::{Config, ConfigError};
use crate::report::Reporter;
use crate::Failure;

pub const DEFAULT_SEED: u64 = 7;

const MESH_KEYS: &[&str] = &["mesh", "subdiv", "cap", "n", "n1", "n2", "w1", "w2", "length", "radius", "rings", "path"];
const SURGERY_KEYS: &[&str] = &["subdiv", "cap", "kind", "p", "v"];
const ASCENT_KEYS: &[&str] = &["method", "max_iter", "tol", "cluster_tol", "initial_step", "max_backtracks", "eig_tol"];

/// Config keys accepted by each command.
pub fn allowed_keys(command: &str) -> Vec<&'static str> {
    let mut k: Vec<&'static str> = vec!["seed"];
    match command {
        "spectrum" => {
            k.extend(MESH_KEYS);
            k.extend(["count", "tol", "cluster_tol", "export_matrices"]);
        }
        "glue" => {
            k.extend(SURGERY_KEYS);
            k.extend(["eps", "L", "N", "count", "tol"]);
        }
        "verify-extend" => k.extend(["max_k", "lengths", "tol"]),
        "maximize" => {
            k.extend(MESH_KEYS);
            k.extend(ASCENT_KEYS);
        }
        "gap" => {
            k.extend(SURGERY_KEYS);
            k.extend(ASCENT_KEYS);
            k.extend(["eps", "lengths", "N"]);
        }
        "scaling" => {
            k.extend(SURGERY_KEYS);
            k.extend(ASCENT_KEYS);
            k.extend(["eps", "L", "N"]);
        }
        _ => {}
    }
    k
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

/// A mesh (with density when the construction supplies one) from the mesh keys.
fn build_mesh(c: &Config) -> Result<(String, IntrinsicMesh, DensityField), Failure> {
    let kind: String = c.get("mesh", "icosphere".to_string())?;
    let n = || c.check("n", 32usize, |v| v >= 3, "must be at least 3");
    let mesh = match kind.as_str() {
        "icosphere" | "capped-icosphere" => {
            let subdiv = c.check("subdiv", 3usize, |v| v <= 7, "subdivision level above 7 is too large")?;
            let flat_cap = if kind == "icosphere" {
                None
            } else {
                Some(c.check("cap", 0.4, |v| v > 0.0 && v < 1.0, "cap radius must lie in (0, 1)")?)
            };
            let p = icosphere(IcosphereParams { subdiv, flat_cap })?;
            return Ok((kind, p.mesh, p.density));
        }
        "square-torus" => square_torus(n()?)?,
        "equilateral-torus" => equilateral_torus(n()?)?,
        "flat-torus" => {
            let vec2 = |key: &str| -> Result<[f64; 2], Failure> {
                let v: Vec<f64> = c.require_list(key)?;
                if v.len() != 2 {
                    return Err(ConfigError::Invalid { key: key.into(), message: "needs two numbers".into() }.into());
                }
                Ok([v[0], v[1]])
            };
            flat_torus(vec2("w1")?, vec2("w2")?, c.get("n1", 16usize)?, c.get("n2", 16usize)?)?
        }
        "disk" => flat_disk(c.check("radius", 1.0, positive, "must be positive")?, n()?)?,
        "cylinder" => cylinder(c.check("length", 1.0, positive, "must be positive")?, n()?)?,
        "moebius" => moebius(c.check("length", 1.0, positive, "must be positive")?, n()?, c.opt("rings")?)?,
        "file" => load(c.require::<String>("path")?)?,
        other => {
            return Err(ConfigError::Invalid {
                key: "mesh".into(),
                message: format!(
                    "unknown mesh `{other}` (icosphere, capped-icosphere, square-torus, equilateral-torus, \
                     flat-torus, disk, cylinder, moebius, file)"
                ),
            }
            .into())
        }
    };
    let rho = DensityField::uniform(mesh.vertex_count());
    Ok((kind, mesh, rho))
}

fn mesh_json(kind: &str, m: &IntrinsicMesh) -> Value {
    json!({
        "kind": kind,
        "vertices": m.vertex_count(),
        "faces": m.face_count(),
        "edges": m.edge_count(),
        "euler_characteristic": m.euler_char(),
        "orientability": m.orientability(),
        "boundary_loops": m.boundary_loops().len(),
    })
}

fn ascent_options(c: &Config, seed: u64) -> Result<MaximizeOptions, Failure> {
    let d = MaximizeOptions::default();
    let method = match c.get("method", "hybrid".to_string())?.as_str() {
        "hybrid" => AscentMethod::Hybrid,
        "mirror" => AscentMethod::Mirror,
        "supergradient" => AscentMethod::Supergradient,
        "fixed-point" => AscentMethod::FixedPoint,
        other => {
            return Err(ConfigError::Invalid {
                key: "method".into(),
                message: format!("unknown method `{other}` (hybrid, mirror, supergradient, fixed-point)"),
            }
            .into())
        }
    };
    Ok(MaximizeOptions {
        method,
        max_iter: c.get("max_iter", d.max_iter)?,
        tol: c.check("tol", d.tol, positive, "must be positive")?,
        cluster_tol: c.check("cluster_tol", d.cluster_tol, positive, "must be positive")?,
        initial_step: c.check("initial_step", d.initial_step, positive, "must be positive")?,
        max_backtracks: c.get("max_backtracks", d.max_backtracks)?,
        eig_tol: c.check("eig_tol", d.eig_tol, |v| v >= 1e-9 && v < 1.0, "must lie in [1e-9, 1)")?,
        seed,
    })
}

/// Capped icosphere base plus one surgery spec per (eps, L).
fn surgery_base(c: &Config) -> Result<(IntrinsicMesh, DensityField, GluingKind, usize, f64), Failure> {
    let subdiv = c.check("subdiv", 4usize, |v| v <= 7, "subdivision level above 7 is too large")?;
    let cap = c.check("cap", 0.4, |v| v > 0.0 && v < 1.0, "cap radius must lie in (0, 1)")?;
    let base = icosphere(IcosphereParams { subdiv, flat_cap: Some(cap) })?;
    let kind = match c.get("kind", "crosscap".to_string())?.as_str() {
        "crosscap" => GluingKind::Crosscap,
        "handle" => GluingKind::Handle,
        other => {
            return Err(ConfigError::Invalid { key: "kind".into(), message: format!("unknown surgery `{other}`") }.into())
        }
    };
    let p = c.check("p", 0usize, |v| v < base.mesh.vertex_count(), "vertex index out of range")?;
    Ok((base.mesh, base.density, kind, p, c.get("v", 0.0)?))
}

fn csv_f(x: f64) -> String {
    format!("{x:?}")
}

pub fn spectrum(c: &Config, seed: u64, out: &Path) -> Result<(), Failure> {
    let (kind, mesh, rho) = build_mesh(c)?;
    let count = c.check("count", 8usize, |v| v >= 2, "must be at least 2")?;
    let tol = c.check("tol", 1e-9, |v| v >= 1e-9 && v < 1.0, "must lie in [1e-9, 1)")?;
    let cluster = c.check("cluster_tol", 1e-4, positive, "must be positive")?;
    let export: bool = c.get("export_matrices", false)?;
    let s = assemble_stiffness(&mesh)?;
    let m = assemble_mass(&mesh, Some(&rho))?;
    let opts = SolverOptions { count, tol, seed, ..SolverOptions::default() };
    let res = EigenSolver::new(&s).solve(&m, &opts, None)?;
    let area = mesh.area(Some(&rho));
    let lb = res.lambda1() * area;
    let k = res.first_multiplicity(cluster);
    let mut rep = Reporter::new(out, "spectrum", c, seed)?;
    if export {
        rep.text("stiffness.coo", &s.matrix().to_coordinate_text())?;
        let mass: String = m.diagonal().iter().enumerate().map(|(i, d)| format!("{i} {i} {d:?}\n")).collect();
        rep.text("mass.coo", &mass)?;
    }
    rep.json(
        true,
        &format!("lambda1-bar {lb:.6}, multiplicity {k}"),
        json!({
            "mesh": mesh_json(&kind, &mesh),
            "area": area,
            "eigenvalues": res.eigenvalues,
            "residuals": res.residuals,
            "restarts": res.restarts,
            "lambda1": res.lambda1(),
            "lambda1_bar": lb,
            "multiplicity": k,
        }),
    )?;
    rep.finish(0)?;
    Ok(())
}

pub fn glue_cmd(c: &Config, seed: u64, out: &Path) -> Result<(), Failure> {
    let (base, rho, kind, p, v) = surgery_base(c)?;
    let eps: f64 = c.require("eps")?;
    let l: f64 = c.get("L", 2.0)?;
    let n: usize = c.get("N", 32)?;
    let spec = match kind {
        GluingKind::Crosscap => GluingSpec::crosscap(p, eps, l, n),
        GluingKind::Handle => GluingSpec::handle(p, v, eps, l, n),
    };
    let g = glue(&base, Some(&rho), &spec)?;
    let count = c.check("count", 8usize, |v| v >= 2, "must be at least 2")?;
    let tol = c.check("tol", 1e-8, |v| v >= 1e-9 && v < 1.0, "must lie in [1e-9, 1)")?;
    let s = assemble_stiffness(&g.mesh)?;
    let m = assemble_mass(&g.mesh, Some(&g.density))?;
    let res = EigenSolver::new(&s).solve(&m, &SolverOptions { count, tol, seed, ..SolverOptions::default() }, None)?;
    let lb = res.lambda1() * g.mesh.area(Some(&g.density));
    let mut rep = Reporter::new(out, "glue", c, seed)?;
    rep.text("glued.imesh", &g.to_imesh())?;
    let density: Vec<String> = g.density.values().iter().enumerate().map(|(i, r)| format!("{i},{}", csv_f(*r))).collect();
    rep.csv("glued_density.csv", "vertex,rho", &density)?;
    rep.json(
        true,
        &format!("{} glued, lambda1-bar {lb:.6}", kind.as_str()),
        json!({
            "spec": spec,
            "mesh": mesh_json(kind.as_str(), &g.mesh),
            "center_density": g.center_density,
            "warnings": spec.warnings(),
            "lambda1_bar": lb,
            "eigenvalues": res.eigenvalues,
        }),
    )?;
    rep.finish(0)?;
    Ok(())
}

pub fn verify_extend(c: &Config, seed: u64, out: &Path) -> Result<(), Failure> {
    let max_k = c.check("max_k", 32u32, |v| (1..=4096).contains(&v), "must lie in 1..=4096")?;
    let lengths: Vec<f64> = c.list("lengths")?.unwrap_or_else(|| vec![1.5 * 2f64.ln(), 1.5, 2.0, 3.0, 5.0]);
    if lengths.iter().any(|l| !positive(*l)) {
        return Err(ConfigError::Invalid { key: "lengths".into(), message: "lengths must be positive".into() }.into());
    }
    let tol = c.check("tol", 1e-10, positive, "must be positive")?;
    let rows = verify_extension_modes(max_k, &lengths, tol);
    let failed = rows.iter().filter(|r| !r.pass).count();
    let worst = rows.iter().map(|r| ((r.ratio - r.coth) / r.coth).abs()).fold(0.0, f64::max);
    let mut rep = Reporter::new(out, "verify-extend", c, seed)?;
    let csv = mode_checks_csv(&rows);
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or_default().to_string();
    rep.csv("verify-extend.csv", &header, &lines.map(str::to_string).collect::<Vec<_>>())?;
    let pass = failed == 0;
    rep.json(
        pass,
        &format!("{} modes, {failed} failed, worst relative deviation from coth {worst:.3e}", rows.len()),
        json!({ "rows": rows.len(), "failed": failed, "worst_relative_deviation": worst, "tol": tol }),
    )?;
    let code = if pass { 0 } else { 2 };
    rep.finish(code)?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("{failed} per-mode checks failed")))
    }
}

pub fn maximize(c: &Config, seed: u64, out: &Path) -> Result<(), Failure> {
    let (kind, mesh, rho0) = build_mesh(c)?;
    let opts = ascent_options(c, seed)?;
    let (rho, trace) = maximize_conformal(&mesh, &rho0, &opts)?;
    let mut rep = Reporter::new(out, "maximize", c, seed)?;
    let rows: Vec<String> = rho.values().iter().enumerate().map(|(i, r)| format!("{i},{}", csv_f(*r))).collect();
    rep.csv("maximize_density.csv", "vertex,rho", &rows)?;
    let steps: Vec<String> = trace
        .steps
        .iter()
        .map(|s| format!("{},{},{},{},{}", s.iter, csv_f(s.value), csv_f(s.step), s.multiplicity, s.density_hash))
        .collect();
    rep.csv("maximize_trace.csv", "iter,lambda1_bar,step,multiplicity,density_hash", &steps)?;
    rep.json(
        true,
        &format!("lambda1-bar {:.6} -> {:.6} in {} steps", trace.initial(), trace.best(), trace.steps.len() - 1),
        json!({ "mesh": mesh_json(&kind, &mesh), "options": opts, "trace": trace }),
    )?;
    rep.finish(0)?;
    Ok(())
}

pub fn gap(c: &Config, seed: u64, out: &Path) -> Result<(), Failure> {
    let (base, rho, kind, p, v) = surgery_base(c)?;
    let eps: Vec<f64> = c.require_list("eps")?;
    let lengths: Vec<f64> = c.require_list("lengths")?;
    let n: usize = c.get("N", 32)?;
    let opts = ascent_options(c, seed)?;
    let grid = spec_grid(kind, p, v, &eps, &lengths, n);
    let report = gap_experiment(&base, &rho, &grid, &opts)?;
    let mut rep = Reporter::new(out, "gap", c, seed)?;
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.kind.as_str(),
                csv_f(r.eps),
                csv_f(r.half_length),
                r.n,
                csv_f(r.base),
                csv_f(r.glued_initial),
                csv_f(r.glued_max),
                csv_f(r.gap),
                r.iterations,
                r.converged,
                r.zero_density_at_p
            )
        })
        .collect();
    rep.csv("gap.csv", "kind,eps,L,N,base,glued_initial,glued_max,gap,iterations,converged,zero_density_at_p", &rows)?;
    let best = &report.rows[report.argmax];
    let pass = report.max_gap > 0.0;
    rep.json(
        pass,
        &format!("max gap {:+.6} at eps {} L {}", report.max_gap, best.eps, best.half_length),
        json!({ "options": opts, "report": report }),
    )?;
    rep.finish(0)?;
    Ok(())
}

pub fn scaling(c: &Config, seed: u64, out: &Path) -> Result<(), Failure> {
    let (base, rho, kind, p, v) = surgery_base(c)?;
    let eps: Vec<f64> = c.require_list("eps")?;
    let l: f64 = c.get("L", 2.0)?;
    let n: usize = c.get("N", 32)?;
    let opts = ascent_options(c, seed)?;
    let family = spec_grid(kind, p, v, &eps, &[l], n);
    let report = scaling_study(&base, &rho, &family, &opts)?;
    let mut rep = Reporter::new(out, "scaling", c, seed)?;
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{}",
                csv_f(r.eps),
                csv_f(r.lambda_bar),
                r.dimension,
                csv_f(r.unit_defect_l2),
                csv_f(r.grad_at_p),
                csv_f(r.transfer_discrepancy)
            )
        })
        .collect();
    rep.csv("scaling.csv", "eps,lambda1_bar,dimension,unit_defect_l2,grad_at_p,transfer_discrepancy", &rows)?;
    rep.json(
        true,
        &format!(
            "unit-defect slope {:.3}, gradient slope {:.3}",
            report.unit_defect_slope.slope, report.grad_slope.slope
        ),
        json!({ "options": opts, "report": report }),
    )?;
    rep.finish(0)?;
    Ok(())
}
