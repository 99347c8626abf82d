//! Balancing a sphere-valued map by conformal dilations of the target.
//!
//! For |a| < 1 the dilation of S^n towards a is
//!   G_a(x) = ((1 - |a|^2) x + 2 (1 + <a, x>) a) / (1 + 2 <a, x> + |a|^2),
//! which fixes +-a/|a|, pushes mass towards a/|a|, and is the identity at a = 0.

use crate::error::{Error, Result};
use crate::mesh::IntrinsicMesh;
use crate::spectrum::assemble_stiffness;

pub const MAX_BALANCE_ITER: usize = 10_000;

#[derive(Clone, Debug, serde::Serialize)]
pub struct BalanceResult {
    pub a: Vec<f64>,
    /// Balanced map, one vector per vertex.
    pub samples: Vec<Vec<f64>>,
    /// |integral of G_a o Phi d mu| / mu(M).
    pub residual: f64,
    pub iterations: usize,
    pub energy_before: Option<f64>,
    pub energy_after: Option<f64>,
    /// Energy grew under balancing (not excluded by the construction).
    pub energy_increased: bool,
}

pub fn dilate(a: &[f64], x: &[f64]) -> Vec<f64> {
    let a2: f64 = a.iter().map(|v| v * v).sum();
    if a2 == 0.0 {
        return x.to_vec();
    }
    let ax: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
    let den = 1.0 + 2.0 * ax + a2;
    x.iter()
        .zip(a)
        .map(|(xi, ai)| ((1.0 - a2) * xi + 2.0 * (1.0 + ax) * ai) / den)
        .collect()
}

fn center(a: &[f64], phi: &[Vec<f64>], mu: &[f64], total: f64) -> Vec<f64> {
    let mut c = vec![0.0; a.len()];
    for (x, w) in phi.iter().zip(mu) {
        if *w == 0.0 {
            continue;
        }
        for (ci, gi) in c.iter_mut().zip(dilate(a, x)) {
            *ci += w * gi;
        }
    }
    c.iter().map(|v| v / total).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn map_energy(mesh: &IntrinsicMesh, samples: &[Vec<f64>]) -> Result<f64> {
    let s = assemble_stiffness(mesh)?;
    let dim = samples[0].len();
    let mut e = 0.0;
    for c in 0..dim {
        let comp: Vec<f64> = samples.iter().map(|x| x[c]).collect();
        e += s.energy(&comp);
    }
    Ok(e)
}

/// Finds a with |a| < 1 such that the mu-average of G_a o Phi vanishes. `phi` holds one
/// point per vertex (renormalized to the unit sphere); `mesh` is used only to report
/// Dirichlet energies.
pub fn mobius_balance(
    phi: &[Vec<f64>],
    mu: &[f64],
    tol: f64,
    mesh: Option<&IntrinsicMesh>,
) -> Result<BalanceResult> {
    if phi.is_empty() || phi.len() != mu.len() {
        return Err(Error::InvalidInput("map samples and measure must have equal, nonzero length".into()));
    }
    if mu.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidInput("measure must be finite and nonnegative".into()));
    }
    let total: f64 = mu.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidInput("measure is zero".into()));
    }
    let dim = phi[0].len();
    let mut unit = Vec::with_capacity(phi.len());
    for (v, x) in phi.iter().enumerate() {
        let r = norm(x);
        if x.len() != dim || (r - 1.0).abs() > 0.05 {
            return Err(Error::InvalidInput(format!(
                "map value at vertex {v} has norm {r:.4}, outside 1 +- 0.05"
            )));
        }
        unit.push(x.iter().map(|c| c / r).collect::<Vec<f64>>());
    }
    let mut a = vec![0.0; dim];
    let mut c = center(&a, &unit, mu, total);
    let mut res = norm(&c);
    let mut tau = 0.75;
    let mut iterations = 0;
    while res >= tol {
        if iterations >= MAX_BALANCE_ITER {
            return Err(Error::NonConvergence {
                iterations,
                worst: res,
                residuals: vec![res],
            });
        }
        iterations += 1;
        let mut moved = false;
        for _ in 0..60 {
            let mut trial: Vec<f64> = a.iter().zip(&c).map(|(ai, ci)| ai - tau * ci).collect();
            let tn = norm(&trial);
            if tn >= 1.0 - 1e-12 {
                // stay inside the ball
                let s = (1.0 - 1e-6) / tn;
                trial.iter_mut().for_each(|t| *t *= s);
            }
            let ct = center(&trial, &unit, mu, total);
            let rt = norm(&ct);
            if rt < res {
                a = trial;
                c = ct;
                res = rt;
                tau *= 1.2;
                moved = true;
                break;
            }
            tau *= 0.5;
        }
        if !moved {
            let hemisphere = norm(&a) > 1.0 - 1e-4;
            return Err(if hemisphere {
                Error::Geometry(format!(
                    "map image degenerates toward a hemisphere boundary (|a| = {:.6}, residual {res:.3e})",
                    norm(&a)
                ))
            } else {
                Error::NonConvergence {
                    iterations,
                    worst: res,
                    residuals: vec![res],
                }
            });
        }
    }
    let samples: Vec<Vec<f64>> = unit.iter().map(|x| dilate(&a, x)).collect();
    let (energy_before, energy_after) = match mesh {
        Some(m) => (Some(map_energy(m, &unit)?), Some(map_energy(m, &samples)?)),
        None => (None, None),
    };
    let energy_increased = matches!((energy_before, energy_after), (Some(b), Some(e)) if e > b * (1.0 + 1e-12));
    Ok(BalanceResult {
        a,
        samples,
        residual: res,
        iterations,
        energy_before,
        energy_after,
        energy_increased,
    })
}
