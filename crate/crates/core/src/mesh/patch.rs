//! Planar coordinates on flat patches by intrinsic unfolding.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use super::{FlatPatch, IntrinsicMesh};
use crate::error::{Error, Result};

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Edge-graph distances from `source` (an upper bound on geodesic distance).
pub fn graph_distances(mesh: &IntrinsicMesh, source: usize) -> Vec<f64> {
    let mut adj = vec![Vec::new(); mesh.vertex_count()];
    for (e, l) in mesh.edges().iter().zip(mesh.lengths()) {
        adj[e[0]].push((e[1], *l));
        adj[e[1]].push((e[0], *l));
    }
    let mut dist = vec![f64::INFINITY; mesh.vertex_count()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::from([Item(0.0, source)]);
    while let Some(Item(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, l) in &adj[v] {
            let nd = d + l;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Item(nd, w));
            }
        }
    }
    dist
}

/// Vertices whose graph distance to the patch center is within the patch radius.
pub(crate) fn patch_members(mesh: &IntrinsicMesh, patch: FlatPatch) -> Vec<bool> {
    let limit = patch.radius * (1.0 + 1e-9);
    graph_distances(mesh, patch.center)
        .into_iter()
        .map(|d| d <= limit)
        .collect()
}

/// Planar layout of a flat patch: center at the origin, the first neighbour of the
/// center (in its lowest-index face) on the positive x-axis.
#[derive(Clone, Debug)]
pub struct PatchCoords {
    pub patch: FlatPatch,
    pub coords: Vec<Option<[f64; 2]>>,
    /// Faces that were laid out (all three vertices inside the patch).
    pub faces: Vec<usize>,
}

impl PatchCoords {
    pub fn get(&self, v: usize) -> Option<[f64; 2]> {
        self.coords.get(v).copied().flatten()
    }
}

fn place_third(a: [f64; 2], b: [f64; 2], la: f64, lb: f64, side: f64) -> [f64; 2] {
    // point at distance la from a and lb from b, on the side given by sign(side)
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    let d = (dx * dx + dy * dy).sqrt();
    let x = (la * la - lb * lb + d * d) / (2.0 * d);
    let h = (la * la - x * x).max(0.0).sqrt();
    let (ux, uy) = (dx / d, dy / d);
    let s = if side >= 0.0 { 1.0 } else { -1.0 };
    [a[0] + x * ux - s * h * uy, a[1] + x * uy + s * h * ux]
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Unfolds the faces of a flat patch into the plane.
pub fn unfold_patch(mesh: &IntrinsicMesh, patch: FlatPatch) -> Result<PatchCoords> {
    if patch.center >= mesh.vertex_count() {
        return Err(Error::InvalidInput("patch center out of range".into()));
    }
    let member = patch_members(mesh, patch);
    let inside = |f: usize| mesh.faces()[f].iter().all(|&v| member[v]);
    let vf = mesh.vertex_faces();
    let ef = mesh.edge_faces();
    let seed = *vf[patch.center]
        .iter()
        .filter(|&&f| inside(f))
        .min()
        .ok_or_else(|| Error::Geometry("flat patch has no face at its center".into()))?;
    let mut coords: Vec<Option<[f64; 2]>> = vec![None; mesh.vertex_count()];
    let face = mesh.faces()[seed];
    let c = face.iter().position(|&v| v == patch.center).unwrap();
    let (v0, v1, v2) = (face[c], face[(c + 1) % 3], face[(c + 2) % 3]);
    let l01 = mesh.edge_length(v0, v1).unwrap();
    let l02 = mesh.edge_length(v0, v2).unwrap();
    let l12 = mesh.edge_length(v1, v2).unwrap();
    coords[v0] = Some([0.0, 0.0]);
    coords[v1] = Some([l01, 0.0]);
    coords[v2] = Some(place_third([0.0, 0.0], [l01, 0.0], l02, l12, 1.0));
    let mut done = vec![false; mesh.face_count()];
    done[seed] = true;
    let mut laid = vec![seed];
    let mut queue = VecDeque::from([seed]);
    while let Some(f) = queue.pop_front() {
        let fv = mesh.faces()[f];
        for k in 0..3 {
            let (a, b, opp) = (fv[k], fv[(k + 1) % 3], fv[(k + 2) % 3]);
            let e = mesh.edge_index(a, b).unwrap();
            for &g in &ef[e] {
                if done[g] || !inside(g) {
                    continue;
                }
                done[g] = true;
                let gv = mesh.faces()[g];
                let w = *gv.iter().find(|&&x| x != a && x != b).unwrap();
                let pa = coords[a].unwrap();
                let pb = coords[b].unwrap();
                let po = coords[opp].unwrap();
                if coords[w].is_none() {
                    let side = -cross(pa, pb, po);
                    let la = mesh.edge_length(a, w).unwrap();
                    let lb = mesh.edge_length(b, w).unwrap();
                    coords[w] = Some(place_third(pa, pb, la, lb, side));
                }
                laid.push(g);
                queue.push_back(g);
            }
        }
    }
    laid.sort_unstable();
    Ok(PatchCoords {
        patch,
        coords,
        faces: laid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_point_on_requested_side() {
        let p = place_third([0.0, 0.0], [2.0, 0.0], 2f64.sqrt(), 2f64.sqrt(), 1.0);
        assert!((p[0] - 1.0).abs() < 1e-14 && (p[1] - 1.0).abs() < 1e-14);
        let q = place_third([0.0, 0.0], [2.0, 0.0], 2f64.sqrt(), 2f64.sqrt(), -1.0);
        assert!((q[1] + 1.0).abs() < 1e-14);
    }
}
