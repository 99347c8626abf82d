//! Transfer of functions on a glued surface back to the base surface.
//!
//! Outside the surgery disks the function is kept. Inside, the refilled polar disk
//! receives the refined extension: the harmonic extension of the even part of the
//! seam trace (band limited, least-squares fit) plus the odd part carried inward ring
//! by ring. The refill rings 1..M are the conformal images of the neck rings, so the
//! odd part is sampled by index and vanishes past ring M.

use std::f64::consts::PI;

use super::{harmonic_extend, CircleTrace};
use crate::error::{Error, Result};
use crate::glue::{GluedSurface, GluingKind, RefilledBase};
use crate::spectrum::{assemble_stiffness, energy_on_faces};

/// Relative trace-fit residual above which a warning is recorded.
pub const FIT_WARNING: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct TransferResult {
    /// Vertex values on the refilled base mesh.
    pub values: Vec<f64>,
    /// ||d T(u)||^2 on the base.
    pub lhs: f64,
    /// ||du||^2 on the glued surface + ||d T(u)_E||^2 on the disks - ||d u_E||^2 on the neck.
    pub rhs: f64,
    pub glued_energy: f64,
    pub disk_even_energy: f64,
    pub neck_even_energy: f64,
    /// ||d T(u)||^2 on the refill disks and ||du||^2 on the neck.
    pub disk_energy: f64,
    pub neck_energy: f64,
    /// Relative residual of the even seam trace fit (worst seam).
    pub fit_residual: f64,
    pub warnings: Vec<String>,
}

impl TransferResult {
    /// |lhs - rhs| / max(lhs, rhs), zero when both vanish.
    pub fn relative_discrepancy(&self) -> f64 {
        let d = self.lhs.abs().max(self.rhs.abs());
        if d == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs).abs() / d
        }
    }

    /// |lhs - rhs| against the energy that actually moves: disks plus neck.
    pub fn local_discrepancy(&self) -> f64 {
        let d = self.disk_energy + self.neck_energy;
        if d == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs).abs() / d
        }
    }
}

/// Transfer with the default band limit N/4, building the refilled base.
pub fn transfer(u: &[f64], glued: &GluedSurface) -> Result<TransferResult> {
    let base = glued.refilled_base()?;
    transfer_onto(u, glued, &base, glued.spec.n / 4)
}

/// Even part of u on the neck, indexed like the band rings.
fn neck_even(u: &[f64], glued: &GluedSurface) -> Vec<Vec<f64>> {
    let band = &glued.band;
    let n = glued.spec.n;
    (0..band.rings.len())
        .map(|m| {
            (0..n)
                .map(|j| {
                    let (mm, jj) = band.mirror(m, j);
                    0.5 * (u[band.rings[m][j]] + u[band.rings[mm][jj]])
                })
                .collect()
        })
        .collect()
}

pub fn transfer_onto(u: &[f64], glued: &GluedSurface, base: &RefilledBase, band_limit: usize) -> Result<TransferResult> {
    let gm = &glued.mesh;
    if u.len() != gm.vertex_count() {
        return Err(Error::InvalidInput(format!(
            "function has {} values, the glued mesh has {} vertices",
            u.len(),
            gm.vertex_count()
        )));
    }
    let big_m = glued.neck_rings();
    let bands = &glued.band.rings;
    let nb = base.mesh.vertex_count();
    let mut values = vec![0.0; nb];
    values[..glued.n_vertices].copy_from_slice(&u[..glued.n_vertices]);

    let even = neck_even(u, glued);
    // seam ring of each hole in band indexing, and the band ring feeding disk ring i
    let (seam_rings, odd_source): (Vec<usize>, Box<dyn Fn(usize, usize) -> (usize, f64)>) = match glued.band.kind {
        GluingKind::Crosscap => (vec![big_m], Box::new(move |_h, i| (big_m - i, 1.0))),
        GluingKind::Handle => (
            vec![0, 2 * big_m],
            Box::new(move |h, i| if h == 0 { (i, 1.0) } else { (i, -1.0) }),
        ),
    };
    let mut warnings = Vec::new();
    let mut fit_residual = 0.0f64;
    let mut disk_even = vec![0.0; nb];
    let mut disk_faces = Vec::new();
    for (h, disk) in base.disks.iter().enumerate() {
        let (trace, res): (CircleTrace, f64) = CircleTrace::fit_samples(&even[seam_rings[h]], band_limit)?;
        fit_residual = fit_residual.max(res);
        if res > FIT_WARNING {
            warnings.push(format!("seam {h}: band-{band_limit} trace fit residual {res:.3e}"));
        }
        let hext = harmonic_extend(&trace).with_radius(disk.radii[0]);
        for (i, ids) in disk.ids.iter().enumerate().skip(1) {
            let c = disk.counts[i];
            let r = disk.radii[i];
            for (j, &id) in ids.iter().enumerate() {
                let th = 2.0 * PI * j as f64 / c as f64;
                let mut v = hext.eval_harmonic(0, r, th);
                if i <= big_m {
                    let (m, sign) = odd_source(h, i);
                    let (mm, jj) = glued.band.mirror(m, j);
                    v += sign * 0.5 * (u[bands[m][j]] - u[bands[mm][jj]]);
                }
                values[id] = v;
            }
        }
        values[disk.center] = hext.eval_harmonic(0, 0.0, 0.0);
        disk_faces.extend(disk.faces.clone());
    }

    // even part of T(u) on the disks
    match glued.band.kind {
        GluingKind::Crosscap => {
            let disk = &base.disks[0];
            for ids in &disk.ids {
                let c = ids.len();
                for j in 0..c {
                    disk_even[ids[j]] = 0.5 * (values[ids[j]] + values[ids[(j + c / 2) % c]]);
                }
            }
            disk_even[disk.center] = values[disk.center];
        }
        GluingKind::Handle => {
            let (p, q) = (&base.disks[0], &base.disks[1]);
            for (ip, iq) in p.ids.iter().zip(&q.ids) {
                for (&a, &b) in ip.iter().zip(iq) {
                    let e = 0.5 * (values[a] + values[b]);
                    disk_even[a] = e;
                    disk_even[b] = e;
                }
            }
            let e = 0.5 * (values[p.center] + values[q.center]);
            disk_even[p.center] = e;
            disk_even[q.center] = e;
        }
    }

    let mut neck_even_values = vec![0.0; gm.vertex_count()];
    for (ring, ev) in bands.iter().zip(&even) {
        for (&id, &x) in ring.iter().zip(ev) {
            neck_even_values[id] = x;
        }
    }
    let neck_faces: Vec<usize> = glued.neck_faces().collect();
    let lhs = assemble_stiffness(&base.mesh)?.energy(&values);
    let glued_energy = assemble_stiffness(gm)?.energy(u);
    let disk_even_energy = energy_on_faces(&base.mesh, &disk_faces, &disk_even)?;
    let neck_even_energy = energy_on_faces(gm, &neck_faces, &neck_even_values)?;
    let disk_energy = energy_on_faces(&base.mesh, &disk_faces, &values)?;
    let neck_energy = energy_on_faces(gm, &neck_faces, u)?;
    Ok(TransferResult {
        values,
        lhs,
        rhs: glued_energy + disk_even_energy - neck_even_energy,
        glued_energy,
        disk_even_energy,
        neck_even_energy,
        disk_energy,
        neck_energy,
        fit_residual,
        warnings,
    })
}
