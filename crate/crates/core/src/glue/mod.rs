//! Surgery on flat patches: disk removal, cross-cap and handle attachment by
//! index-exact boundary maps, refilling, and conformal straightening of the seams.

mod spec;
mod surgery;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::Range;
use std::path::Path;

pub use spec::{GluingKind, GluingSpec};
pub use surgery::{remove_disk, remove_disk_pair, SurgeredMesh};

use crate::error::{Error, Result};
use crate::mesh::io::write_imesh;
use crate::mesh::polar::{polar_rings, PolarDisk};
use crate::mesh::{DensityField, IntrinsicMesh};
use crate::util::{hash_f64s, sha256_hex, smoothstep};

pub(crate) fn key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

pub(crate) fn mesh_hash(mesh: &IntrinsicMesh) -> String {
    let mut s = String::new();
    for f in mesh.faces() {
        s.push_str(&format!("{} {} {};", f[0], f[1], f[2]));
    }
    s.push_str(&hash_f64s(mesh.lengths()));
    sha256_hex(s.as_bytes())[..16].to_string()
}

/// A removed disk: planar center in the patch frame, radius, loop parameterization
/// (vertex j of ring m sits at angle `angle_offset + orientation * 2 pi j / N`), and
/// the outward collar rings (ring 0 is the boundary loop).
#[derive(Clone, Debug, PartialEq)]
pub struct Hole {
    pub center: [f64; 2],
    pub radius: f64,
    pub angle_offset: f64,
    pub orientation: f64,
    pub rings: Vec<Vec<usize>>,
    pub ring_radii: Vec<f64>,
}

impl Hole {
    pub fn boundary(&self) -> &[usize] {
        &self.rings[0]
    }

    /// Planar position of the point at radius r and parameter fraction `frac` of a turn.
    pub fn position(&self, r: f64, frac: f64) -> [f64; 2] {
        let a = self.angle_offset + self.orientation * 2.0 * PI * frac;
        [self.center[0] + r * a.cos(), self.center[1] + r * a.sin()]
    }
}

/// Ring structure of the attached neck. Every ring lists N ids indexed by j (the
/// cross-cap core ring repeats its N/2 vertices, j and j + N/2 being the same vertex).
#[derive(Clone, Debug, PartialEq)]
pub struct BandLayout {
    pub kind: GluingKind,
    pub rings: Vec<Vec<usize>>,
    /// Flat-coordinate ring spacing.
    pub dt: f64,
    /// Homothety factor applied to the flat band.
    pub scale: f64,
    pub half_length: f64,
}

impl BandLayout {
    /// Flat t coordinate of ring m.
    pub fn t(&self, m: usize) -> f64 {
        match self.kind {
            GluingKind::Crosscap => m as f64 * self.dt,
            GluingKind::Handle => -self.half_length + m as f64 * self.dt,
        }
    }

    /// Ring index of the image of (m, j) under the neck symmetry and the shifted j.
    pub fn mirror(&self, m: usize, j: usize) -> (usize, usize) {
        let n = self.rings[0].len();
        match self.kind {
            GluingKind::Crosscap => (m, (j + n / 2) % n),
            GluingKind::Handle => (self.rings.len() - 1 - m, j),
        }
    }
}

/// Closed surface obtained by one surgery. Vertices `0..n_vertices` and faces
/// `0..n_faces` form the surgered base N; the rest is the neck.
#[derive(Clone, Debug)]
pub struct GluedSurface {
    pub spec: GluingSpec,
    pub mesh: IntrinsicMesh,
    /// Base density on N, the base density at p on the neck.
    pub density: DensityField,
    pub holes: Vec<Hole>,
    pub band: BandLayout,
    pub n_vertices: usize,
    pub n_faces: usize,
    pub patch_radius: f64,
    pub center_density: f64,
    pub base_hash: String,
    removed: Vec<([[f64; 2]; 3], [f64; 3])>,
}

/// A polar disk put back into a hole.
#[derive(Clone, Debug, PartialEq)]
pub struct RefillDisk {
    pub radii: Vec<f64>,
    pub counts: Vec<usize>,
    /// Ring vertex ids, ring 0 the hole boundary.
    pub ids: Vec<Vec<usize>>,
    pub center: usize,
    pub faces: Range<usize>,
}

impl RefillDisk {
    /// (radius, fraction of a turn) of every disk vertex, in ring order, center last.
    pub fn polar_vertices(&self) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for ((r, c), ids) in self.radii.iter().zip(&self.counts).zip(&self.ids) {
            for (j, &id) in ids.iter().enumerate() {
                out.push((id, *r, j as f64 / *c as f64));
            }
        }
        out.push((self.center, 0.0, 0.0));
        out
    }
}

/// The surgered base with its holes filled by polar disks whose first rings follow
/// the conformal image of the neck rings.
#[derive(Clone, Debug)]
pub struct RefilledBase {
    pub mesh: IntrinsicMesh,
    pub density: DensityField,
    pub disks: Vec<RefillDisk>,
    pub n_vertices: usize,
    pub n_faces: usize,
}

fn ring_count(half_length: f64, n: usize) -> usize {
    ((half_length / (2.0 * PI / n as f64)).round() as usize).max(1)
}

fn check_loops(s: &SurgeredMesh, spec: &GluingSpec, want: usize) -> Result<()> {
    if s.holes.len() != want {
        return Err(Error::InvalidInput(format!(
            "{} needs {want} boundary loop(s), the mesh has {}",
            spec.kind.as_str(),
            s.holes.len()
        )));
    }
    for h in &s.holes {
        if h.boundary().len() != spec.n {
            return Err(Error::InvalidInput(format!(
                "boundary loop has {} vertices but the gluing spec asks for N = {}",
                h.boundary().len(),
                spec.n
            )));
        }
        if (h.radius - spec.eps).abs() > 1e-12 * spec.eps {
            return Err(Error::InvalidInput(format!(
                "boundary loop radius {} differs from eps = {}",
                h.radius, spec.eps
            )));
        }
    }
    Ok(())
}

struct BandBuilder {
    faces: Vec<[usize; 3]>,
    lengths: BTreeMap<[usize; 2], f64>,
}

impl BandBuilder {
    /// Quads (m, j)-(m, j+1)-(m+1, j+1)-(m+1, j) of a flat band with ring spacing dt
    /// and circumference 2 pi, scaled by `s`; existing seam lengths are kept and checked.
    fn build(rings: &[Vec<usize>], dt: f64, s: f64, base: &BTreeMap<[usize; 2], f64>) -> Result<Self> {
        let n = rings[0].len();
        let step = 2.0 * PI / n as f64;
        let mut b = BandBuilder {
            faces: Vec::new(),
            lengths: BTreeMap::new(),
        };
        let put = |b: &mut BandBuilder, x: usize, y: usize, l: f64| -> Result<()> {
            let k = key(x, y);
            if let Some(old) = base.get(&k) {
                if (old - l).abs() > 1e-12 * old {
                    return Err(Error::Geometry(format!(
                        "seam edge length mismatch: {old} on the disk side, {l} on the band"
                    )));
                }
                return Ok(());
            }
            b.lengths.insert(k, l);
            Ok(())
        };
        let diag = (step * step + dt * dt).sqrt() * s;
        for (m, ring) in rings.iter().enumerate() {
            for j in 0..n {
                let j1 = (j + 1) % n;
                if ring[j] != ring[j1] {
                    put(&mut b, ring[j], ring[j1], step * s)?;
                }
                if m + 1 < rings.len() {
                    let up = &rings[m + 1];
                    put(&mut b, ring[j], up[j], dt * s)?;
                    put(&mut b, ring[j], up[j1], diag)?;
                    b.faces.push([ring[j], ring[j1], up[j1]]);
                    b.faces.push([ring[j], up[j1], up[j]]);
                }
            }
        }
        Ok(b)
    }
}

fn assemble(
    s: &SurgeredMesh,
    spec: &GluingSpec,
    rings: Vec<Vec<usize>>,
    dt: f64,
    total: usize,
) -> Result<GluedSurface> {
    let n = spec.n;
    let scale = spec.eps * n as f64 * (PI / n as f64).sin() / PI;
    let base = s.mesh.length_map();
    let band = BandBuilder::build(&rings, dt, scale, &base)?;
    let mut lengths = base;
    lengths.extend(band.lengths);
    let mut faces = s.mesh.faces().to_vec();
    let n_faces = faces.len();
    faces.extend(band.faces);
    let mesh = IntrinsicMesh::new(total, faces, &lengths)?.with_computed_orientability();
    let mut dens = s.density.values().to_vec();
    dens.resize(total, s.center_density);
    Ok(GluedSurface {
        spec: spec.clone(),
        mesh,
        density: DensityField::new(dens)?,
        holes: s.holes.clone(),
        band: BandLayout {
            kind: spec.kind,
            rings,
            dt,
            scale,
            half_length: spec.half_length,
        },
        n_vertices: s.mesh.vertex_count(),
        n_faces,
        patch_radius: s.patch_radius,
        center_density: s.center_density,
        base_hash: s.base_hash.clone(),
        removed: s.removed.clone(),
    })
}

/// Attaches a flat Möbius band of circumference 2 pi and length L, scaled by
/// eps N sin(pi/N) / pi so its boundary ring is congruent to the N-gon. Band vertex j
/// of the boundary ring is the loop vertex at angle theta_j.
pub fn attach_crosscap(s: &SurgeredMesh, spec: &GluingSpec) -> Result<GluedSurface> {
    if spec.kind != GluingKind::Crosscap {
        return Err(Error::InvalidInput("attach_crosscap needs a crosscap spec".into()));
    }
    spec.validate(s.patch_radius)?;
    check_loops(s, spec, 1)?;
    let n = spec.n;
    let m_rings = ring_count(spec.half_length, n);
    let dt = spec.half_length / m_rings as f64;
    let mut next = s.mesh.vertex_count();
    let half = n / 2;
    let core: Vec<usize> = (0..n).map(|j| next + j % half).collect();
    next += half;
    let mut rings = vec![core];
    for _ in 1..m_rings {
        rings.push((next..next + n).collect());
        next += n;
    }
    rings.push(s.holes[0].boundary().to_vec());
    assemble(s, spec, rings, dt, next)
}

/// Attaches a flat cylinder of circumference 2 pi and length 2L: ring 0 (t = -L) is the
/// p-loop, ring 2M (t = L) the q-loop, both by index j. Since the q-loop is
/// parameterized by 2v - theta_j, the t = L end is glued through the reflection A_v.
pub fn attach_handle(s: &SurgeredMesh, spec: &GluingSpec) -> Result<GluedSurface> {
    if spec.kind != GluingKind::Handle {
        return Err(Error::InvalidInput("attach_handle needs a handle spec".into()));
    }
    spec.validate(s.patch_radius)?;
    check_loops(s, spec, 2)?;
    let (hp, hq) = (&s.holes[0], &s.holes[1]);
    let d = (hq.center[0] - hp.center[0]).hypot(hq.center[1] - hp.center[1]);
    if (d - spec.eps.sqrt()).abs() > 1e-9 * spec.eps.sqrt() {
        return Err(Error::InvalidInput(format!(
            "q must lie at distance sqrt(eps) = {} from p, found {d}",
            spec.eps.sqrt()
        )));
    }
    let expect_offset = hp.angle_offset + 2.0 * spec.v_angle;
    if hp.orientation != 1.0 || hq.orientation != -1.0 || (hq.angle_offset - expect_offset).abs() > 1e-12 {
        return Err(Error::InvalidInput(
            "q-loop parameterization is not the reflection of the p-loop about v".into(),
        ));
    }
    let n = spec.n;
    let m_rings = ring_count(spec.half_length, n);
    let dt = spec.half_length / m_rings as f64;
    let mut next = s.mesh.vertex_count();
    let mut rings = vec![hp.boundary().to_vec()];
    for _ in 1..2 * m_rings {
        rings.push((next..next + n).collect());
        next += n;
    }
    rings.push(hq.boundary().to_vec());
    assemble(s, spec, rings, dt, next)
}

/// Removes the disk(s) and attaches the neck described by `spec`.
pub fn glue(mesh: &IntrinsicMesh, density: Option<&DensityField>, spec: &GluingSpec) -> Result<GluedSurface> {
    let patch = mesh
        .flat_patches()
        .first()
        .ok_or_else(|| Error::InvalidInput("mesh has no flat patch for surgery".into()))?;
    spec.validate(patch.radius)?;
    match spec.kind {
        GluingKind::Crosscap => {
            let s = remove_disk(mesh, density, spec.p, spec.eps, spec.n)?;
            attach_crosscap(&s, spec)
        }
        GluingKind::Handle => {
            let s = remove_disk_pair(mesh, density, spec.p, spec.v_angle, spec.eps, spec.n)?;
            attach_handle(&s, spec)
        }
    }
}

impl GluedSurface {
    pub fn neck_faces(&self) -> Range<usize> {
        self.n_faces..self.mesh.face_count()
    }

    pub fn base_faces(&self) -> Range<usize> {
        0..self.n_faces
    }

    /// Faces of N between a seam and the first collar ring.
    pub fn collar_faces(&self) -> Vec<usize> {
        let mut ring: Vec<bool> = vec![false; self.mesh.vertex_count()];
        for h in &self.holes {
            for &v in h.rings[0].iter().chain(&h.rings[1]) {
                ring[v] = true;
            }
        }
        (0..self.n_faces)
            .filter(|&f| self.mesh.faces()[f].iter().all(|&v| ring[v]))
            .collect()
    }

    pub fn seam_loops(&self) -> Vec<&[usize]> {
        self.holes.iter().map(|h| h.boundary()).collect()
    }

    /// Number of flat rings between a seam and the middle of the neck.
    pub fn neck_rings(&self) -> usize {
        match self.band.kind {
            GluingKind::Crosscap => self.band.rings.len() - 1,
            GluingKind::Handle => (self.band.rings.len() - 1) / 2,
        }
    }

    /// Base density at a planar point of the surgery region.
    pub fn interpolate_density(&self, x: [f64; 2]) -> Option<f64> {
        surgery::interpolate(&self.removed, x)
    }

    /// Fills each hole with a polar disk: rings i = 1..M at radii eps e^{-i dt} keep N
    /// vertices (the conformal images of the neck rings), then square cells with
    /// halving counts down to a center vertex.
    pub fn refilled_base(&self) -> Result<RefilledBase> {
        let mut lengths: BTreeMap<[usize; 2], f64> = BTreeMap::new();
        let mut faces: Vec<[usize; 3]> = self.mesh.faces()[..self.n_faces].to_vec();
        for f in &faces {
            for c in 0..3 {
                let (a, b) = (f[c], f[(c + 1) % 3]);
                lengths.insert(key(a, b), self.mesh.edge_length(a, b).unwrap());
            }
        }
        let mut dens = self.density.values()[..self.n_vertices].to_vec();
        let mut next = self.n_vertices;
        let mut disks = Vec::new();
        for hole in &self.holes {
            let rings = polar_rings(hole.radius, self.spec.n, self.neck_rings(), self.band.dt);
            let disk = PolarDisk::build(rings, next, Some(hole.boundary()));
            next += disk.fresh_count(true);
            let start = faces.len();
            faces.extend(disk.faces.iter().copied());
            for (k, l) in &disk.lengths {
                match lengths.get(k) {
                    Some(old) if (old - l).abs() > 1e-12 * old => {
                        return Err(Error::Geometry("refill disk does not match the seam".into()));
                    }
                    Some(_) => {}
                    None => {
                        lengths.insert(*k, *l);
                    }
                }
            }
            let rd = RefillDisk {
                radii: disk.rings.iter().map(|r| r.radius).collect(),
                counts: disk.rings.iter().map(|r| r.count).collect(),
                ids: disk.ids.clone(),
                center: disk.center,
                faces: start..faces.len(),
            };
            dens.resize(next, 0.0);
            for (id, r, frac) in rd.polar_vertices() {
                if id < self.n_vertices {
                    continue;
                }
                let x = hole.position(r, frac);
                dens[id] = self
                    .interpolate_density(x)
                    .ok_or_else(|| Error::Geometry("refill vertex outside the removed faces".into()))?;
            }
            disks.push(rd);
        }
        let mesh = IntrinsicMesh::new(next, faces, &lengths)?.with_computed_orientability();
        Ok(RefilledBase {
            mesh,
            density: DensityField::new(dens)?,
            disks,
            n_vertices: self.n_vertices,
            n_faces: self.n_faces,
        })
    }

    /// Conformal straightening of the seams. On the first collar ring the flat disk
    /// metric is multiplied by psi = eps^2 / r^2 (turning the annulus into a product
    /// cylinder that continues the neck smoothly); over the second ring the exponent is
    /// cut off by a cubic smoothstep. Lengths scale by (psi_a psi_b)^{1/4}; the returned
    /// density is the ratio 1 / psi of the glued metric to the straightened one.
    pub fn straighten(&self) -> Result<(IntrinsicMesh, DensityField)> {
        let nv = self.mesh.vertex_count();
        let mut log_psi = vec![0.0; nv];
        for hole in &self.holes {
            if hole.rings.len() < 3 {
                return Err(Error::Geometry(
                    "straightening needs two collar rings outside each seam".into(),
                ));
            }
            let (r1, r2) = (hole.ring_radii[1], hole.ring_radii[2]);
            for (ring, &r) in hole.rings.iter().zip(&hole.ring_radii) {
                let chi = if r <= r1 {
                    1.0
                } else {
                    1.0 - smoothstep((r - r1) / (r2 - r1))
                };
                for &v in ring {
                    log_psi[v] = chi * 2.0 * (hole.radius / r).ln();
                }
            }
        }
        let mut lengths = BTreeMap::new();
        for (e, l) in self.mesh.edges().iter().zip(self.mesh.lengths()) {
            lengths.insert(*e, l * (0.25 * (log_psi[e[0]] + log_psi[e[1]])).exp());
        }
        let mesh = IntrinsicMesh::new(nv, self.mesh.faces().to_vec(), &lengths)?
            .with_orientable(self.mesh.declared_orientability());
        let rho = DensityField::new(log_psi.iter().map(|x| (-x).exp()).collect())?;
        Ok((mesh, rho))
    }

    /// IMESH text with a provenance block.
    pub fn to_imesh(&self) -> String {
        let mut comments = vec![format!("glued from base {}", self.base_hash)];
        comments.extend(self.spec.to_kv().lines().map(|l| format!("spec {l}")));
        write_imesh(&self.mesh, &comments)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_imesh())?;
        Ok(())
    }
}
