//! Intrinsic triangle meshes: combinatorics plus one length per edge.

pub mod io;
pub mod patch;
pub(crate) mod polar;
pub mod primitives;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load, parse_imesh, save, write_imesh};
pub use patch::{unfold_patch, PatchCoords};
pub use primitives::{
    cylinder, equilateral_torus, flat_disk, flat_torus, icosphere, moebius, square_torus,
    IcosphereParams, Primitive,
};

/// Tolerance on the angle sum at interior vertices of a flat patch.
pub const FLAT_ANGLE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientability {
    Orientable,
    NonOrientable,
    Unknown,
}

impl Orientability {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientability::Orientable => "orientable",
            Orientability::NonOrientable => "nonorientable",
            Orientability::Unknown => "unknown",
        }
    }
}

/// An ordered boundary cycle with its angular parameter per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryLoop {
    pub vertices: Vec<usize>,
    pub angles: Vec<f64>,
}

impl BoundaryLoop {
    /// Loop with the regular parameterization theta_j = 2 pi j / n.
    pub fn regular(vertices: Vec<usize>) -> Self {
        let n = vertices.len();
        let angles = (0..n)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / n as f64)
            .collect();
        BoundaryLoop { vertices, angles }
    }
}

/// Region around `center` (geodesic radius `radius`) where the metric is exactly Euclidean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatPatch {
    pub center: usize,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntrinsicMesh {
    vertex_count: usize,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    lengths: Vec<f64>,
    boundary_loops: Vec<BoundaryLoop>,
    flat_patches: Vec<FlatPatch>,
    orientable: Orientability,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    TriangleInequality { face: usize, lengths: [f64; 3] },
    NonManifoldEdge { edge: [usize; 2], faces: usize },
    IsolatedVertex { vertex: usize },
    BoundaryLoop { index: usize, reason: String },
    UndeclaredBoundaryEdge { edge: [usize; 2] },
    FlatPatchAngle { patch: usize, vertex: usize, angle_sum: f64 },
    OrientationFlag { declared: Orientability, computed: Orientability },
}

fn key(i: usize, j: usize) -> [usize; 2] {
    if i < j {
        [i, j]
    } else {
        [j, i]
    }
}

impl IntrinsicMesh {
    /// Builds a mesh from faces and a length for every face edge.
    ///
    /// Rejects out-of-range or repeated indices, missing or unused edge lengths, and
    /// lengths that are not finite and positive. Geometric invariants (triangle
    /// inequality, manifoldness) are left to [`IntrinsicMesh::validate`].
    pub fn new(
        vertex_count: usize,
        faces: Vec<[usize; 3]>,
        lengths: &BTreeMap<[usize; 2], f64>,
    ) -> Result<Self> {
        let mut needed = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= vertex_count {
                    return Err(Error::InvalidMesh(format!(
                        "face {fi} references vertex {v} but the mesh has {vertex_count} vertices"
                    )));
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidMesh(format!("face {fi} repeats a vertex")));
            }
            for c in 0..3 {
                needed.insert(key(f[c], f[(c + 1) % 3]), ());
            }
        }
        let mut edges = Vec::with_capacity(needed.len());
        let mut lens = Vec::with_capacity(needed.len());
        for e in needed.keys() {
            let l = *lengths.get(e).ok_or_else(|| {
                Error::InvalidMesh(format!("edge {}-{} has no length", e[0], e[1]))
            })?;
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "edge {}-{} has non-positive or non-finite length {l}",
                    e[0], e[1]
                )));
            }
            edges.push(*e);
            lens.push(l);
        }
        if lengths.len() != edges.len() {
            let extra = lengths.keys().find(|k| !needed.contains_key(*k)).unwrap();
            return Err(Error::InvalidMesh(format!(
                "edge {}-{} is not an edge of any face",
                extra[0], extra[1]
            )));
        }
        Ok(IntrinsicMesh {
            vertex_count,
            faces,
            edges,
            lengths: lens,
            boundary_loops: Vec::new(),
            flat_patches: Vec::new(),
            orientable: Orientability::Unknown,
        })
    }

    pub fn with_boundary_loops(mut self, loops: Vec<BoundaryLoop>) -> Self {
        self.boundary_loops = loops;
        self
    }

    pub fn with_flat_patches(mut self, patches: Vec<FlatPatch>) -> Self {
        self.flat_patches = patches;
        self
    }

    pub fn with_orientable(mut self, flag: Orientability) -> Self {
        self.orientable = flag;
        self
    }

    /// Sets the declared orientability flag to the computed one.
    pub fn with_computed_orientability(mut self) -> Self {
        self.orientable = self.orientability();
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Undirected edges as sorted pairs, in lexicographic order.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn boundary_loops(&self) -> &[BoundaryLoop] {
        &self.boundary_loops
    }

    pub fn flat_patches(&self) -> &[FlatPatch] {
        &self.flat_patches
    }

    pub fn declared_orientability(&self) -> Orientability {
        self.orientable
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.binary_search(&key(i, j)).ok()
    }

    pub fn edge_length(&self, i: usize, j: usize) -> Option<f64> {
        self.edge_index(i, j).map(|e| self.lengths[e])
    }

    /// Replaces one edge length (used to build deliberately broken meshes in tests).
    pub fn set_edge_length(&mut self, i: usize, j: usize, length: f64) -> Result<()> {
        let e = self
            .edge_index(i, j)
            .ok_or_else(|| Error::InvalidInput(format!("no edge {i}-{j}")))?;
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidInput(format!("bad edge length {length}")));
        }
        self.lengths[e] = length;
        Ok(())
    }

    /// All edge lengths as a map (for rebuilding derived meshes).
    pub fn length_map(&self) -> BTreeMap<[usize; 2], f64> {
        self.edges
            .iter()
            .copied()
            .zip(self.lengths.iter().copied())
            .collect()
    }

    /// Lengths opposite each corner: `l[c]` is the edge not touching `face[c]`.
    pub fn face_lengths(&self, f: usize) -> [f64; 3] {
        let [a, b, c] = self.faces[f];
        let l = |i, j| self.lengths[self.edge_index(i, j).expect("face edge present")];
        [l(b, c), l(c, a), l(a, b)]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        heron(self.face_lengths(f))
    }

    pub fn face_areas(&self) -> Vec<f64> {
        (0..self.faces.len()).map(|f| self.face_area(f)).collect()
    }

    /// Interior angles at the three corners, from the law of cosines.
    pub fn corner_angles(&self, f: usize) -> [f64; 3] {
        corner_angles(self.face_lengths(f))
    }

    /// Barycentric vertex areas a_v = sum over incident faces of area/3.
    pub fn vertex_areas(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.vertex_count];
        for (f, face) in self.faces.iter().enumerate() {
            let third = self.face_area(f) / 3.0;
            for &v in face {
                a[v] += third;
            }
        }
        a
    }

    /// Sum of face areas weighted by the face average of the density.
    pub fn area(&self, rho: Option<&DensityField>) -> f64 {
        let mut total = 0.0;
        for (f, face) in self.faces.iter().enumerate() {
            let w = match rho {
                Some(r) => face.iter().map(|&v| r.values()[v]).sum::<f64>() / 3.0,
                None => 1.0,
            };
            total += self.face_area(f) * w;
        }
        total
    }

    /// Number of faces incident to each edge.
    pub fn edge_face_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.edges.len()];
        for f in &self.faces {
            for c in 0..3 {
                if let Some(e) = self.edge_index(f[c], f[(c + 1) % 3]) {
                    counts[e] += 1;
                }
            }
        }
        counts
    }

    /// Edges with exactly one incident face.
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        self.edge_face_counts()
            .iter()
            .zip(&self.edges)
            .filter(|(c, _)| **c == 1)
            .map(|(_, e)| *e)
            .collect()
    }

    pub fn euler_char(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Faces incident to each vertex.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut vf = vec![Vec::new(); self.vertex_count];
        for (f, face) in self.faces.iter().enumerate() {
            for &v in face {
                vf[v].push(f);
            }
        }
        vf
    }

    /// Faces incident to each edge (indexed like [`IntrinsicMesh::edges`]).
    pub fn edge_faces(&self) -> Vec<Vec<usize>> {
        let mut ef = vec![Vec::new(); self.edges.len()];
        for (f, face) in self.faces.iter().enumerate() {
            for c in 0..3 {
                if let Some(e) = self.edge_index(face[c], face[(c + 1) % 3]) {
                    ef[e].push(f);
                }
            }
        }
        ef
    }

    /// Vertex adjacency lists (sorted).
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            nb[e[0]].push(e[1]);
            nb[e[1]].push(e[0]);
        }
        for n in &mut nb {
            n.sort_unstable();
        }
        nb
    }

    /// Number of connected components of the vertex graph (isolated vertices count).
    pub fn component_count(&self) -> usize {
        let nb = self.neighbors();
        let mut seen = vec![false; self.vertex_count];
        let mut count = 0;
        for s in 0..self.vertex_count {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &nb[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// Attempts a consistent orientation of all faces across interior edges.
    pub fn orientability(&self) -> Orientability {
        let ef = self.edge_faces();
        // flip[f]: whether face f must be reversed to agree with its component's seed
        let mut flip: Vec<Option<bool>> = vec![None; self.faces.len()];
        for seed in 0..self.faces.len() {
            if flip[seed].is_some() {
                continue;
            }
            flip[seed] = Some(false);
            let mut queue = VecDeque::from([seed]);
            while let Some(f) = queue.pop_front() {
                let face = self.faces[f];
                let ff = flip[f].unwrap();
                for c in 0..3 {
                    let (a, b) = (face[c], face[(c + 1) % 3]);
                    let e = self.edge_index(a, b).unwrap();
                    for &g in &ef[e] {
                        if g == f {
                            continue;
                        }
                        let gface = self.faces[g];
                        // same direction a->b in g means g must be flipped relative to f
                        let same = (0..3).any(|d| gface[d] == a && gface[(d + 1) % 3] == b);
                        let want = ff ^ same;
                        match flip[g] {
                            None => {
                                flip[g] = Some(want);
                                queue.push_back(g);
                            }
                            Some(x) if x != want => return Orientability::NonOrientable,
                            _ => {}
                        }
                    }
                }
            }
        }
        Orientability::Orientable
    }

    /// Checks every mesh invariant; an empty list means the mesh is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for f in 0..self.faces.len() {
            let l = self.face_lengths(f);
            let ok = l[0] < l[1] + l[2] && l[1] < l[0] + l[2] && l[2] < l[0] + l[1];
            if !ok {
                out.push(Violation::TriangleInequality { face: f, lengths: l });
            }
        }
        let counts = self.edge_face_counts();
        for (e, &c) in counts.iter().enumerate() {
            if c > 2 {
                out.push(Violation::NonManifoldEdge {
                    edge: self.edges[e],
                    faces: c,
                });
            }
        }
        let vf = self.vertex_faces();
        for (v, fs) in vf.iter().enumerate() {
            if fs.is_empty() {
                out.push(Violation::IsolatedVertex { vertex: v });
            }
        }
        // boundary loops must cover the boundary edges exactly once
        let mut declared: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for (li, lp) in self.boundary_loops.iter().enumerate() {
            if lp.vertices.len() < 3 || lp.vertices.len() != lp.angles.len() {
                out.push(Violation::BoundaryLoop {
                    index: li,
                    reason: "loop needs at least 3 vertices and one angle per vertex".into(),
                });
                continue;
            }
            let n = lp.vertices.len();
            for j in 0..n {
                let e = key(lp.vertices[j], lp.vertices[(j + 1) % n]);
                match self.edge_index(e[0], e[1]) {
                    Some(ei) if counts[ei] == 1 => {
                        *declared.entry(e).or_insert(0) += 1;
                    }
                    _ => out.push(Violation::BoundaryLoop {
                        index: li,
                        reason: format!("{}-{} is not a boundary edge", e[0], e[1]),
                    }),
                }
            }
        }
        for (e, &c) in self.edges.iter().zip(&counts) {
            if c == 1 && declared.get(e).copied().unwrap_or(0) != 1 {
                out.push(Violation::UndeclaredBoundaryEdge { edge: *e });
            }
        }
        let bverts = self.boundary_vertices();
        for (pi, patch) in self.flat_patches.iter().enumerate() {
            if patch.center >= self.vertex_count {
                out.push(Violation::BoundaryLoop {
                    index: pi,
                    reason: "flat patch center out of range".into(),
                });
                continue;
            }
            let member = patch::patch_members(self, *patch);
            for (v, fs) in vf.iter().enumerate() {
                if !member[v] || fs.is_empty() {
                    continue;
                }
                let inside = fs.iter().all(|&f| self.faces[f].iter().all(|&w| member[w]));
                let closed = !bverts[v];
                if inside && closed {
                    let sum: f64 = fs
                        .iter()
                        .map(|&f| {
                            let c = self.faces[f].iter().position(|&w| w == v).unwrap();
                            self.corner_angles(f)[c]
                        })
                        .sum();
                    if (sum - 2.0 * std::f64::consts::PI).abs() > FLAT_ANGLE_TOL {
                        out.push(Violation::FlatPatchAngle {
                            patch: pi,
                            vertex: v,
                            angle_sum: sum,
                        });
                    }
                }
            }
        }
        if self.orientable != Orientability::Unknown && out.is_empty() {
            let computed = self.orientability();
            if computed != self.orientable {
                out.push(Violation::OrientationFlag {
                    declared: self.orientable,
                    computed,
                });
            }
        }
        out
    }

    /// Vertices lying on some boundary edge.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut b = vec![false; self.vertex_count];
        for e in self.boundary_edges() {
            b[e[0]] = true;
            b[e[1]] = true;
        }
        b
    }

    /// Multiplies every edge length by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidInput(format!("scale factor {c} must be positive")));
        }
        let mut m = self.clone();
        for l in &mut m.lengths {
            *l *= c;
        }
        for p in &mut m.flat_patches {
            p.radius *= c;
        }
        Ok(m)
    }

    /// Disjoint union of two meshes (vertices of `other` shifted after ours).
    pub fn disjoint_union(&self, other: &IntrinsicMesh) -> Result<Self> {
        let shift = self.vertex_count;
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|f| [f[0] + shift, f[1] + shift, f[2] + shift]));
        let mut lengths = self.length_map();
        for (e, l) in other.edges.iter().zip(&other.lengths) {
            lengths.insert([e[0] + shift, e[1] + shift], *l);
        }
        let mut loops = self.boundary_loops.clone();
        loops.extend(other.boundary_loops.iter().map(|lp| BoundaryLoop {
            vertices: lp.vertices.iter().map(|v| v + shift).collect(),
            angles: lp.angles.clone(),
        }));
        let mut patches = self.flat_patches.clone();
        patches.extend(other.flat_patches.iter().map(|p| FlatPatch {
            center: p.center + shift,
            radius: p.radius,
        }));
        Ok(IntrinsicMesh::new(shift + other.vertex_count, faces, &lengths)?
            .with_boundary_loops(loops)
            .with_flat_patches(patches)
            .with_computed_orientability())
    }
}

/// Triangle area from side lengths (Kahan's stable Heron formula); 0 if degenerate.
pub fn heron(l: [f64; 3]) -> f64 {
    let mut s = l;
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if p <= 0.0 {
        0.0
    } else {
        0.25 * p.sqrt()
    }
}

/// Corner angles opposite the given side lengths.
pub fn corner_angles(l: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for c in 0..3 {
        let (a, b, o) = (l[(c + 1) % 3], l[(c + 2) % 3], l[c]);
        let cos = ((a * a + b * b - o * o) / (2.0 * a * b)).clamp(-1.0, 1.0);
        out[c] = cos.acos();
    }
    out
}

/// Nonnegative per-vertex conformal weight.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityField {
    values: Vec<f64>,
}

impl DensityField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidInput(format!(
                "density at vertex {i} is {v}; densities must be finite and nonnegative"
            )));
        }
        Ok(DensityField { values })
    }

    pub fn uniform(n: usize) -> Self {
        DensityField { values: vec![1.0; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        DensityField {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn zero_set(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}
