//! Primitive surfaces: icosphere (optionally with a flat polar cap), flat tori,
//! flat disks, flat cylinders and flat Möbius bands.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::polar::{polar_rings, PolarDisk};
use super::{BoundaryLoop, DensityField, FlatPatch, IntrinsicMesh, Orientability};
use crate::error::{Error, Result};
use crate::util::smoothstep;

/// A constructed mesh together with its natural density and, for spheres, the
/// unit-sphere position of every vertex.
#[derive(Clone, Debug)]
pub struct Primitive {
    pub mesh: IntrinsicMesh,
    pub density: DensityField,
    pub positions: Option<Vec<[f64; 3]>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IcosphereParams {
    pub subdiv: usize,
    /// Radius of the flat polar cap (in the flat metric) around vertex 0, if any.
    pub flat_cap: Option<f64>,
}

fn k(i: usize, j: usize) -> [usize; 2] {
    if i < j {
        [i, j]
    } else {
        [j, i]
    }
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn normalize(p: [f64; 3]) -> [f64; 3] {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / n, p[1] / n, p[2] / n]
}

/// Subdivided icosahedron on the unit sphere with vertex 0 at the north pole.
fn icosphere_points(subdiv: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let z = 1.0 / 5f64.sqrt();
    let r = 2.0 / 5f64.sqrt();
    let mut pts = vec![[0.0, 0.0, 1.0]];
    for i in 0..5 {
        let a = 2.0 * PI * i as f64 / 5.0;
        pts.push([r * a.cos(), r * a.sin(), z]);
    }
    for i in 0..5 {
        let a = 2.0 * PI * (i as f64 + 0.5) / 5.0;
        pts.push([r * a.cos(), r * a.sin(), -z]);
    }
    pts.push([0.0, 0.0, -1.0]);
    let mut faces = Vec::new();
    for i in 0..5 {
        let (u0, u1) = (1 + i, 1 + (i + 1) % 5);
        let (l0, l1) = (6 + i, 6 + (i + 1) % 5);
        faces.push([0, u0, u1]);
        faces.push([u0, l0, u1]);
        faces.push([u1, l0, l1]);
        faces.push([11, l1, l0]);
    }
    for _ in 0..subdiv {
        let mut mid: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, pts: &mut Vec<[f64; 3]>| -> usize {
            *mid.entry(k(a, b)).or_insert_with(|| {
                let (p, q) = (pts[a], pts[b]);
                pts.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                pts.len() - 1
            })
        };
        for f in &faces {
            let ab = midpoint(f[0], f[1], &mut pts);
            let bc = midpoint(f[1], f[2], &mut pts);
            let ca = midpoint(f[2], f[0], &mut pts);
            next.push([f[0], ab, ca]);
            next.push([ab, f[1], bc]);
            next.push([ca, bc, f[2]]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    (pts, faces)
}

/// Icosphere with chord edge lengths.
///
/// With a flat cap of radius `d0`, the metric near vertex 0 is replaced by the
/// conformal flat metric |dy|^2 of stereographic coordinates y = 2 tan(s/2) (s the
/// polar angle), so that density (1 + |y|^2/4)^-2 recovers the round metric. Edges
/// with both ends at |y| <= d0 get exact flat lengths; elsewhere chords are scaled by
/// the conformal factor, blended back to 1 by a smoothstep between polar angles
/// s0 = 2 atan(d0/2) and 2 s0. The returned density makes the pair conformal to the
/// round sphere in every case.
pub fn icosphere(params: IcosphereParams) -> Result<Primitive> {
    let (pts, faces) = icosphere_points(params.subdiv);
    let n = pts.len();
    let mut lengths = BTreeMap::new();
    for f in &faces {
        for c in 0..3 {
            let (a, b) = (f[c], f[(c + 1) % 3]);
            lengths.insert(k(a, b), dist3(pts[a], pts[b]));
        }
    }
    let Some(d0) = params.flat_cap else {
        let mesh = IntrinsicMesh::new(n, faces, &lengths)?.with_orientable(Orientability::Orientable);
        return Ok(Primitive {
            mesh,
            density: DensityField::uniform(n),
            positions: Some(pts),
        });
    };
    if !(d0 > 0.0 && d0 < 2.0) {
        return Err(Error::InvalidInput(format!("flat cap radius {d0} must lie in (0, 2)")));
    }
    let s0 = 2.0 * (d0 / 2.0).atan();
    let s1 = 2.0 * s0;
    let mut y = vec![[0.0; 2]; n];
    let mut u = vec![0.0; n];
    let mut flat = vec![false; n];
    for (v, p) in pts.iter().enumerate() {
        let s = p[2].clamp(-1.0, 1.0).acos();
        let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let t = 2.0 * (s / 2.0).tan();
        if rho > 0.0 {
            y[v] = [t * p[0] / rho, t * p[1] / rho];
        }
        if s < s1 {
            let chi = 1.0 - smoothstep((s - s0) / (s1 - s0));
            u[v] = chi * (1.0 + t * t / 4.0).ln();
        }
        flat[v] = t <= d0 * (1.0 + 1e-12);
    }
    for (e, l) in lengths.iter_mut() {
        let (a, b) = (e[0], e[1]);
        if flat[a] && flat[b] {
            *l = ((y[a][0] - y[b][0]).powi(2) + (y[a][1] - y[b][1]).powi(2)).sqrt();
        } else {
            *l *= (0.5 * (u[a] + u[b])).exp();
        }
    }
    let density = DensityField::new(u.iter().map(|x| (-2.0 * x).exp()).collect())?;
    let mesh = IntrinsicMesh::new(n, faces, &lengths)?
        .with_flat_patches(vec![FlatPatch { center: 0, radius: d0 }])
        .with_orientable(Orientability::Orientable);
    Ok(Primitive {
        mesh,
        density,
        positions: Some(pts),
    })
}

/// Flat torus R^2 / (Z w1 + Z w2) sampled on an n1 x n2 grid; quads use the shorter
/// diagonal. Carries a flat patch at vertex 0 below the injectivity radius.
pub fn flat_torus(w1: [f64; 2], w2: [f64; 2], n1: usize, n2: usize) -> Result<IntrinsicMesh> {
    if n1 < 3 || n2 < 3 {
        return Err(Error::InvalidInput("torus grid needs at least 3 x 3 vertices".into()));
    }
    let det = w1[0] * w2[1] - w1[1] * w2[0];
    if !(det.abs() > 1e-12) {
        return Err(Error::InvalidInput("torus lattice vectors are degenerate".into()));
    }
    let id = |i: usize, j: usize| (i % n1) + n1 * (j % n2);
    let a = [w1[0] / n1 as f64, w1[1] / n1 as f64];
    let b = [w2[0] / n2 as f64, w2[1] / n2 as f64];
    let len = |v: [f64; 2]| (v[0] * v[0] + v[1] * v[1]).sqrt();
    let d1 = len([a[0] + b[0], a[1] + b[1]]);
    let d2 = len([b[0] - a[0], b[1] - a[1]]);
    let mut faces = Vec::with_capacity(2 * n1 * n2);
    let mut lengths = BTreeMap::new();
    for j in 0..n2 {
        for i in 0..n1 {
            let (p00, p10, p01, p11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            lengths.insert(k(p00, p10), len(a));
            lengths.insert(k(p00, p01), len(b));
            if d1 <= d2 {
                faces.push([p00, p10, p11]);
                faces.push([p00, p11, p01]);
                lengths.insert(k(p00, p11), d1);
            } else {
                faces.push([p00, p10, p01]);
                faces.push([p10, p11, p01]);
                lengths.insert(k(p10, p01), d2);
            }
        }
    }
    let shortest = [len(w1), len(w2), len([w1[0] - w2[0], w1[1] - w2[1]]), len([w1[0] + w2[0], w1[1] + w2[1]])]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(IntrinsicMesh::new(n1 * n2, faces, &lengths)?
        .with_flat_patches(vec![FlatPatch {
            center: 0,
            radius: 0.45 * shortest,
        }])
        .with_orientable(Orientability::Orientable))
}

/// Unit-area square torus.
pub fn square_torus(n: usize) -> Result<IntrinsicMesh> {
    flat_torus([1.0, 0.0], [0.0, 1.0], n, n)
}

/// Equilateral torus with lattice Z(1,0) + Z(1/2, sqrt(3)/2).
pub fn equilateral_torus(n: usize) -> Result<IntrinsicMesh> {
    flat_torus([1.0, 0.0], [0.5, 3f64.sqrt() / 2.0], n, n)
}

/// Flat polar disk of radius `radius` with `n` boundary vertices.
pub fn flat_disk(radius: f64, n: usize) -> Result<IntrinsicMesh> {
    if !(radius > 0.0) || n < 8 || n % 2 == 1 {
        return Err(Error::InvalidInput(
            "flat disk needs positive radius and even n >= 8".into(),
        ));
    }
    let disk = PolarDisk::build(polar_rings(radius, n, 0, 0.0), 0, None);
    let count = disk.fresh_count(false);
    let outer = disk.ids[0].clone();
    Ok(IntrinsicMesh::new(count, disk.faces, &disk.lengths)?
        .with_boundary_loops(vec![BoundaryLoop::regular(outer)])
        .with_flat_patches(vec![FlatPatch {
            center: disk.center,
            radius,
        }])
        .with_orientable(Orientability::Orientable))
}

/// Flat cylinder of circumference 2 pi over t in [-L, L] with n vertices per ring.
pub fn cylinder(half_length: f64, n: usize) -> Result<IntrinsicMesh> {
    if !(half_length > 0.0) || n < 3 {
        return Err(Error::InvalidInput("cylinder needs L > 0 and n >= 3".into()));
    }
    let step = 2.0 * PI / n as f64;
    let rings = ((2.0 * half_length / step).round() as usize).max(1);
    let dt = 2.0 * half_length / rings as f64;
    let id = |m: usize, j: usize| m * n + j % n;
    let mut faces = Vec::new();
    let mut lengths = BTreeMap::new();
    let diag = (step * step + dt * dt).sqrt();
    for m in 0..=rings {
        for j in 0..n {
            lengths.insert(k(id(m, j), id(m, j + 1)), step);
            if m < rings {
                lengths.insert(k(id(m, j), id(m + 1, j)), dt);
                lengths.insert(k(id(m, j), id(m + 1, j + 1)), diag);
                faces.push([id(m, j), id(m, j + 1), id(m + 1, j + 1)]);
                faces.push([id(m, j), id(m + 1, j + 1), id(m + 1, j)]);
            }
        }
    }
    let bottom: Vec<usize> = (0..n).map(|j| id(0, j)).collect();
    let top: Vec<usize> = (0..n).map(|j| id(rings, j)).collect();
    Ok(IntrinsicMesh::new((rings + 1) * n, faces, &lengths)?
        .with_boundary_loops(vec![BoundaryLoop::regular(bottom), BoundaryLoop::regular(top)])
        .with_flat_patches(vec![FlatPatch {
            center: id(rings / 2, 0),
            radius: 0.9 * half_length.min(PI).min(dt * (rings / 2).min(rings - rings / 2) as f64),
        }])
        .with_orientable(Orientability::Orientable))
}

/// Flat Möbius band: the quotient of S^1 x [-L, L] (circumference 2 pi) by
/// (z, t) ~ (-z, -t), represented on the fundamental domain t in [0, L] whose core
/// ring (t = 0) carries n/2 vertices. `rings` axial rings (default: square cells).
pub fn moebius(half_length: f64, n: usize, rings: Option<usize>) -> Result<IntrinsicMesh> {
    if n % 2 == 1 {
        return Err(Error::InvalidInput(format!(
            "Möbius band needs even N (antipodal pairing on the core), got {n}"
        )));
    }
    if n < 8 {
        return Err(Error::InvalidInput(format!("Möbius band needs N >= 8, got {n}")));
    }
    if !(half_length > 0.0) {
        return Err(Error::InvalidInput("Möbius band needs L > 0".into()));
    }
    let step = 2.0 * PI / n as f64;
    let m_rings = rings.unwrap_or_else(|| ((half_length / step).round() as usize).max(1));
    if m_rings == 0 {
        return Err(Error::InvalidInput("Möbius band needs at least one axial ring".into()));
    }
    let dt = half_length / m_rings as f64;
    let half = n / 2;
    let id = |m: usize, j: usize| {
        if m == 0 {
            j % half
        } else {
            half + (m - 1) * n + j % n
        }
    };
    let mut faces = Vec::new();
    let mut lengths = BTreeMap::new();
    let diag = (step * step + dt * dt).sqrt();
    for m in 0..=m_rings {
        for j in 0..n {
            lengths.insert(k(id(m, j), id(m, j + 1)), step);
            if m < m_rings {
                lengths.insert(k(id(m, j), id(m + 1, j)), dt);
                lengths.insert(k(id(m, j), id(m + 1, j + 1)), diag);
                faces.push([id(m, j), id(m, j + 1), id(m + 1, j + 1)]);
                faces.push([id(m, j), id(m + 1, j + 1), id(m + 1, j)]);
            }
        }
    }
    let outer: Vec<usize> = (0..n).map(|j| id(m_rings, j)).collect();
    Ok(IntrinsicMesh::new(half + m_rings * n, faces, &lengths)?
        .with_boundary_loops(vec![BoundaryLoop::regular(outer)])
        .with_flat_patches(vec![FlatPatch {
            center: 0,
            radius: 0.9 * half_length.min(PI / 2.0),
        }])
        .with_orientable(Orientability::NonOrientable))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosahedron_counts() {
        let p = icosphere(IcosphereParams { subdiv: 0, flat_cap: None }).unwrap();
        assert_eq!(p.mesh.vertex_count(), 12);
        assert_eq!(p.mesh.face_count(), 20);
        assert_eq!(p.mesh.euler_char(), 2);
        assert!(p.mesh.validate().is_empty());
    }

    #[test]
    fn odd_moebius_rejected() {
        assert!(moebius(1.0, 15, None).is_err());
        assert!(moebius(1.0, 6, None).is_err());
    }

    #[test]
    fn capped_icosphere_is_flat_in_cap() {
        let p = icosphere(IcosphereParams { subdiv: 3, flat_cap: Some(0.4) }).unwrap();
        assert!(p.mesh.validate().is_empty(), "{:?}", p.mesh.validate());
        assert!(p.density.values()[0] == 1.0);
    }
}
