//! Disk removal inside a flat patch.
//!
//! The patch is unfolded into the plane. Around each disk center we lay out polar rings
//! of N vertices, outward from the exact N-gon of radius eps with radial factor
//! e^{2 pi / N} (square cells), until their spacing matches the surrounding mesh.
//! Original faces reaching into the ring region are removed and the gap between the
//! outermost ring and the kept faces is filled by a constrained Delaunay triangulation.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::{key, Hole};
use crate::error::{Error, Result};
use crate::mesh::patch::{unfold_patch, PatchCoords};
use crate::mesh::{BoundaryLoop, DensityField, FlatPatch, IntrinsicMesh, Orientability};

/// A mesh after disk removal, with the data needed to glue and to refill.
#[derive(Clone, Debug)]
pub struct SurgeredMesh {
    pub mesh: IntrinsicMesh,
    pub density: DensityField,
    pub holes: Vec<Hole>,
    /// Flat patch radius delta0 around the surgery.
    pub patch_radius: f64,
    /// Base density interpolated at the first disk center.
    pub center_density: f64,
    pub base_euler: i64,
    pub base_hash: String,
    /// Removed original faces (planar corners and densities) for interpolation.
    pub(crate) removed: Vec<([[f64; 2]; 3], [f64; 3])>,
}

impl SurgeredMesh {
    /// Base density at a planar point inside the removed region.
    pub fn interpolate_density(&self, x: [f64; 2]) -> Option<f64> {
        interpolate(&self.removed, x)
    }
}

pub(crate) fn interpolate(removed: &[([[f64; 2]; 3], [f64; 3])], x: [f64; 2]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for (p, r) in removed {
        let b = barycentric(*p, x);
        let worst = b.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        let val = b[0] * r[0] + b[1] * r[1] + b[2] * r[2];
        if worst >= -1e-12 {
            return Some(val);
        }
        if best.map_or(true, |(w, _)| worst > w) {
            best = Some((worst, val));
        }
    }
    // roundoff on a shared edge: accept the nearest face
    best.filter(|(w, _)| *w > -1e-6).map(|(_, v)| v)
}

fn barycentric(p: [[f64; 2]; 3], x: [f64; 2]) -> [f64; 3] {
    let d = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let l1 = ((x[0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (x[1] - p[0][1])) / d;
    let l2 = ((p[1][0] - p[0][0]) * (x[1] - p[0][1]) - (x[0] - p[0][0]) * (p[1][1] - p[0][1])) / d;
    [1.0 - l1 - l2, l1, l2]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Disk to cut: planar center, loop parameterization angle = offset + orientation * 2 pi j / N.
#[derive(Clone, Copy, Debug)]
pub(crate) struct DiskCut {
    pub center: [f64; 2],
    pub offset: f64,
    pub orientation: f64,
}

fn locate_patch(mesh: &IntrinsicMesh, p: usize) -> Result<(PatchCoords, [f64; 2])> {
    if p >= mesh.vertex_count() {
        return Err(Error::InvalidInput(format!("surgery vertex {p} out of range")));
    }
    for patch in mesh.flat_patches() {
        let coords = unfold_patch(mesh, *patch)?;
        if let Some(c) = coords.get(p) {
            return Ok((coords, c));
        }
    }
    Err(Error::InvalidInput(format!("vertex {p} is not inside a declared flat patch")))
}

/// Removes D_eps(p) and remeshes so the new boundary is the regular N-gon of radius eps.
pub fn remove_disk(
    mesh: &IntrinsicMesh,
    density: Option<&DensityField>,
    p: usize,
    eps: f64,
    n: usize,
) -> Result<SurgeredMesh> {
    let (coords, c) = locate_patch(mesh, p)?;
    let cut = DiskCut {
        center: c,
        offset: 0.0,
        orientation: 1.0,
    };
    surgery(mesh, density, &coords, &[cut], eps, n, None)
}

/// Removes D_eps(p) and D_eps(q), q = p + sqrt(eps) (cos v, sin v) in the patch frame.
/// The q-loop is parameterized by 2v - theta_j, the image of the p-loop under the
/// reflection fixing v.
pub fn remove_disk_pair(
    mesh: &IntrinsicMesh,
    density: Option<&DensityField>,
    p: usize,
    v_angle: f64,
    eps: f64,
    n: usize,
) -> Result<SurgeredMesh> {
    let (coords, c) = locate_patch(mesh, p)?;
    let d = eps.sqrt();
    let q = [c[0] + d * v_angle.cos(), c[1] + d * v_angle.sin()];
    let cuts = [
        DiskCut {
            center: c,
            offset: 0.0,
            orientation: 1.0,
        },
        DiskCut {
            center: q,
            offset: 2.0 * v_angle,
            orientation: -1.0,
        },
    ];
    surgery(mesh, density, &coords, &cuts, eps, n, Some(0.45 * d))
}

fn even_odd_inside(x: [f64; 2], segments: &[([f64; 2], [f64; 2])]) -> bool {
    let mut inside = false;
    for (a, b) in segments {
        if (a[1] > x[1]) != (b[1] > x[1]) {
            let xi = a[0] + (x[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if x[0] < xi {
                inside = !inside;
            }
        }
    }
    inside
}

pub(crate) fn surgery(
    mesh: &IntrinsicMesh,
    density: Option<&DensityField>,
    coords: &PatchCoords,
    cuts: &[DiskCut],
    eps: f64,
    n: usize,
    ring_cap: Option<f64>,
) -> Result<SurgeredMesh> {
    if n % 2 == 1 || n < 8 {
        return Err(Error::InvalidInput(format!(
            "boundary resolution N must be even and at least 8, got {n}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("disk radius must be positive".into()));
    }
    let patch: FlatPatch = coords.patch;
    let nv = mesh.vertex_count();
    let rho: Vec<f64> = match density {
        Some(d) if d.len() == nv => d.values().to_vec(),
        Some(_) => return Err(Error::InvalidInput("density length does not match the mesh".into())),
        None => vec![1.0; nv],
    };
    for cut in cuts {
        let room = patch.radius - dist(cut.center, [0.0, 0.0]);
        if eps >= room {
            return Err(Error::InvalidInput(format!(
                "disk radius {eps} exceeds the flat patch (room {room:.6} around the center)"
            )));
        }
    }
    // local mesh size
    let (mut h_max, mut h_sum, mut h_n) = (0.0f64, 0.0, 0usize);
    for &f in &coords.faces {
        for l in mesh.face_lengths(f) {
            h_max = h_max.max(l);
            h_sum += l;
            h_n += 1;
        }
    }
    let h = h_sum / h_n.max(1) as f64;
    let gap = 0.75 * h;
    let room = cuts
        .iter()
        .map(|c| patch.radius - dist(c.center, [0.0, 0.0]))
        .fold(f64::INFINITY, f64::min);
    let cap = ring_cap.unwrap_or(f64::INFINITY).min(room - gap - h_max);
    let step = 2.0 * PI / n as f64;
    let chord = 2.0 * (PI / n as f64).sin();
    let mut radii = vec![eps];
    loop {
        let r = *radii.last().unwrap();
        if radii.len() >= 3 && r * chord >= 0.5 * h {
            break;
        }
        let next = r * step.exp();
        if next > cap {
            if radii.len() >= 3 {
                break;
            }
            return Err(Error::InvalidInput(format!(
                "disk of radius {eps} leaves no room for a two-ring collar in the flat patch"
            )));
        }
        radii.push(next);
    }
    let r_last = *radii.last().unwrap();
    let r_rm = r_last + gap;

    // faces to remove
    let near = |v: usize| -> bool {
        coords
            .get(v)
            .is_some_and(|x| cuts.iter().any(|c| dist(x, c.center) <= r_rm))
    };
    let faces = mesh.faces();
    let removed: Vec<bool> = faces.iter().map(|f| f.iter().any(|&v| near(v))).collect();
    let unfolded: std::collections::HashSet<usize> = coords.faces.iter().copied().collect();
    for (fi, &r) in removed.iter().enumerate() {
        if r && !unfolded.contains(&fi) {
            return Err(Error::InvalidInput(format!(
                "disk of radius {eps} with its remeshing collar does not fit in the flat patch"
            )));
        }
    }
    let mut removed_data = Vec::new();
    for (fi, f) in faces.iter().enumerate() {
        if removed[fi] {
            let p = [coords.get(f[0]).unwrap(), coords.get(f[1]).unwrap(), coords.get(f[2]).unwrap()];
            removed_data.push((p, [rho[f[0]], rho[f[1]], rho[f[2]]]));
        }
    }
    let center_density = interpolate(&removed_data, cuts[0].center)
        .ok_or_else(|| Error::Geometry("disk center is not covered by the removed faces".into()))?;

    // kept vertices: used by some kept face, or lying in the removed region beyond r_rm
    let mut keep = vec![false; nv];
    for (fi, f) in faces.iter().enumerate() {
        for &v in f {
            if !removed[fi] || !near(v) {
                keep[v] = true;
            }
        }
    }
    let mut new_id = vec![usize::MAX; nv];
    let mut next = 0;
    for v in 0..nv {
        if keep[v] {
            new_id[v] = next;
            next += 1;
        }
    }
    let mut pos: HashMap<usize, [f64; 2]> = HashMap::new();
    let mut holes = Vec::new();
    for cut in cuts {
        let mut rings = Vec::new();
        for &r in &radii {
            let ids: Vec<usize> = (next..next + n).collect();
            next += n;
            for (j, &id) in ids.iter().enumerate() {
                let a = cut.offset + cut.orientation * step * j as f64;
                pos.insert(id, [cut.center[0] + r * a.cos(), cut.center[1] + r * a.sin()]);
            }
            rings.push(ids);
        }
        holes.push(Hole {
            center: cut.center,
            radius: eps,
            angle_offset: cut.offset,
            orientation: cut.orientation,
            rings,
            ring_radii: radii.clone(),
        });
    }
    let total = next;
    for v in 0..nv {
        if keep[v] {
            if let Some(x) = coords.get(v) {
                pos.insert(new_id[v], x);
            }
        }
    }

    let mut out_faces: Vec<[usize; 3]> = Vec::new();
    let mut lengths: BTreeMap<[usize; 2], f64> = BTreeMap::new();
    for (fi, f) in faces.iter().enumerate() {
        if removed[fi] {
            continue;
        }
        let g = [new_id[f[0]], new_id[f[1]], new_id[f[2]]];
        for c in 0..3 {
            let (a, b) = (f[c], f[(c + 1) % 3]);
            lengths.insert(key(g[c], g[(c + 1) % 3]), mesh.edge_length(a, b).unwrap());
        }
        out_faces.push(g);
    }
    // structured ring faces
    for hole in &holes {
        for m in 0..hole.rings.len() - 1 {
            let (inner, outer) = (&hole.rings[m], &hole.rings[m + 1]);
            let (ri, ro) = (hole.ring_radii[m], hole.ring_radii[m + 1]);
            for j in 0..n {
                let j1 = (j + 1) % n;
                out_faces.push([inner[j], inner[j1], outer[j1]]);
                out_faces.push([inner[j], outer[j1], outer[j]]);
                lengths.insert(key(inner[j], inner[j1]), ri * chord);
                lengths.insert(key(outer[j], outer[j1]), ro * chord);
                lengths.insert(key(inner[j], outer[j]), ro - ri);
                let s = (PI / n as f64).sin();
                lengths.insert(
                    key(inner[j], outer[j1]),
                    ((ro - ri).powi(2) + 4.0 * ro * ri * s * s).sqrt(),
                );
            }
        }
    }

    // boundary of the removed region (edges between a removed and a kept face)
    let ef = mesh.edge_faces();
    let mut region_edges: Vec<[usize; 2]> = Vec::new();
    for (e, fs) in mesh.edges().iter().zip(&ef) {
        let nr = fs.iter().filter(|&&f| removed[f]).count();
        if nr == 1 && fs.len() == 2 {
            region_edges.push([new_id[e[0]], new_id[e[1]]]);
        } else if nr == 1 && fs.len() == 1 {
            return Err(Error::Geometry("removed region touches the mesh boundary".into()));
        }
    }
    // CDT over region boundary, interior kept points and outer rings
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut handle_of: BTreeMap<usize, spade::handles::FixedVertexHandle> = BTreeMap::new();
    let mut id_of: HashMap<usize, usize> = HashMap::new();
    let mut insert = |cdt: &mut ConstrainedDelaunayTriangulation<Point2<f64>>, id: usize, x: [f64; 2]| -> Result<()> {
        if handle_of.contains_key(&id) {
            return Ok(());
        }
        let h = cdt
            .insert(Point2::new(x[0], x[1]))
            .map_err(|e| Error::Geometry(format!("triangulation insert failed: {e:?}")))?;
        if let Some(other) = id_of.insert(h.index(), id) {
            if other != id {
                return Err(Error::Geometry("coincident vertices in the remeshed region".into()));
            }
        }
        handle_of.insert(id, h);
        Ok(())
    };
    let mut region_vertices: Vec<usize> = Vec::new();
    for (fi, f) in faces.iter().enumerate() {
        if removed[fi] {
            for &v in f {
                if keep[v] {
                    region_vertices.push(new_id[v]);
                }
            }
        }
    }
    region_vertices.sort_unstable();
    region_vertices.dedup();
    for &v in &region_vertices {
        insert(&mut cdt, v, pos[&v])?;
    }
    let mut segments: Vec<([f64; 2], [f64; 2])> = Vec::new();
    let mut constraints: Vec<[usize; 2]> = region_edges.clone();
    for hole in &holes {
        let outer = hole.rings.last().unwrap();
        for j in 0..n {
            insert(&mut cdt, outer[j], pos[&outer[j]])?;
            constraints.push([outer[j], outer[(j + 1) % n]]);
        }
    }
    for c in &constraints {
        let (a, b) = (handle_of[&c[0]], handle_of[&c[1]]);
        if !cdt.can_add_constraint(a, b) {
            return Err(Error::Geometry("remeshing constraints intersect".into()));
        }
        cdt.add_constraint(a, b);
        segments.push((pos[&c[0]], pos[&c[1]]));
    }
    for face in cdt.inner_faces() {
        let vs = face.vertices();
        let ids = [
            id_of[&vs[0].fix().index()],
            id_of[&vs[1].fix().index()],
            id_of[&vs[2].fix().index()],
        ];
        let x = [pos[&ids[0]], pos[&ids[1]], pos[&ids[2]]];
        // collinear grid points on the hull give zero-area slivers whose centroid sits on a constraint
        let area2 = ((x[1][0] - x[0][0]) * (x[2][1] - x[0][1]) - (x[2][0] - x[0][0]) * (x[1][1] - x[0][1])).abs();
        if area2 <= 1e-9 * h * h {
            continue;
        }
        let cen = [(x[0][0] + x[1][0] + x[2][0]) / 3.0, (x[0][1] + x[1][1] + x[2][1]) / 3.0];
        if !even_odd_inside(cen, &segments) {
            continue;
        }
        for c in 0..3 {
            let k = key(ids[c], ids[(c + 1) % 3]);
            lengths.entry(k).or_insert_with(|| dist(x[c], x[(c + 1) % 3]));
        }
        out_faces.push(ids);
    }

    let mut dens = vec![0.0; total];
    for v in 0..nv {
        if keep[v] {
            dens[new_id[v]] = rho[v];
        }
    }
    for hole in &holes {
        for ring in &hole.rings {
            for &id in ring {
                dens[id] = interpolate(&removed_data, pos[&id]).ok_or_else(|| {
                    Error::Geometry("ring vertex outside the removed faces".into())
                })?;
            }
        }
    }
    let loops = holes.iter().map(|h| BoundaryLoop {
        vertices: h.rings[0].clone(),
        angles: (0..n).map(|j| step * j as f64).collect(),
    });
    let out = IntrinsicMesh::new(total, out_faces, &lengths)?
        .with_boundary_loops(loops.collect())
        .with_orientable(match mesh.declared_orientability() {
            Orientability::Orientable => Orientability::Orientable,
            _ => Orientability::Unknown,
        });
    if out.euler_char() != mesh.euler_char() - cuts.len() as i64 {
        return Err(Error::Geometry(format!(
            "remeshing changed the topology (Euler characteristic {} instead of {})",
            out.euler_char(),
            mesh.euler_char() - cuts.len() as i64
        )));
    }
    Ok(SurgeredMesh {
        mesh: out,
        density: DensityField::new(dens)?,
        holes,
        patch_radius: patch.radius,
        center_density,
        base_euler: mesh.euler_char(),
        base_hash: super::mesh_hash(mesh),
        removed: removed_data,
    })
}
