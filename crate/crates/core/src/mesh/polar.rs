//! Geodesic-polar ring grids on flat disks.
//!
//! Ring `m` has `count` vertices at angles `2 pi j / count`. Consecutive rings either
//! share the count (quads split along (m,j)-(m+1,j+1)) or halve it; the innermost ring
//! is closed by a fan around the center. The pattern is invariant under rotation by
//! any ring step and under the reflection j -> -j.

use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct PolarRing {
    pub radius: f64,
    pub count: usize,
}

/// Ring radii and counts, outermost first.
///
/// The first `fixed + 1` rings keep `n` vertices at radii `outer * exp(-m * fixed_step)`.
/// Further rings are square-celled (`exp(-2 pi / count)` radial factor) and halve
/// their count each time the radius halves, until the count can no longer be halved
/// (it must stay even and at least 8), after which a center vertex closes the disk.
pub(crate) fn polar_rings(outer: f64, n: usize, fixed: usize, fixed_step: f64) -> Vec<PolarRing> {
    let mut rings = vec![PolarRing {
        radius: outer,
        count: n,
    }];
    for m in 1..=fixed {
        rings.push(PolarRing {
            radius: outer * (-(m as f64) * fixed_step).exp(),
            count: n,
        });
    }
    let mut count = n;
    let mut r = rings.last().unwrap().radius;
    let mut mark = r;
    loop {
        if r <= 0.5 * mark {
            if count % 4 == 0 && count / 2 >= 8 {
                count /= 2;
                mark = r;
            } else {
                break;
            }
        }
        r *= (-2.0 * PI / count as f64).exp();
        rings.push(PolarRing { radius: r, count });
    }
    rings
}

/// Distance between polar points (r1, 2 pi f1) and (r2, 2 pi f2), stable for small angles.
pub(crate) fn polar_distance(r1: f64, f1: f64, r2: f64, f2: f64) -> f64 {
    let mut d = f2 - f1;
    d -= d.round();
    let s = (PI * d).sin();
    ((r1 - r2).powi(2) + 4.0 * r1 * r2 * s * s).sqrt()
}

/// Faces between an outer ring and the next inner ring (equal or half count).
pub(crate) fn ring_faces(outer: &[usize], inner: &[usize]) -> Vec<[usize; 3]> {
    let (no, ni) = (outer.len(), inner.len());
    let mut faces = Vec::new();
    if no == ni {
        for j in 0..no {
            let j1 = (j + 1) % no;
            faces.push([outer[j], outer[j1], inner[j1]]);
            faces.push([outer[j], inner[j1], inner[j]]);
        }
    } else {
        assert_eq!(no, 2 * ni, "ring counts must be equal or halve");
        for j in 0..ni {
            let j1 = (j + 1) % ni;
            let (a, b, c) = (outer[2 * j], outer[2 * j + 1], outer[(2 * j + 2) % no]);
            faces.push([a, b, inner[j]]);
            faces.push([b, inner[j1], inner[j]]);
            faces.push([b, c, inner[j1]]);
        }
    }
    faces
}

pub(crate) fn fan_faces(ring: &[usize], center: usize) -> Vec<[usize; 3]> {
    let n = ring.len();
    (0..n).map(|j| [ring[j], ring[(j + 1) % n], center]).collect()
}

/// A polar disk mesh fragment with vertex ids assigned.
#[derive(Clone, Debug)]
pub(crate) struct PolarDisk {
    pub rings: Vec<PolarRing>,
    pub ids: Vec<Vec<usize>>,
    pub center: usize,
    pub faces: Vec<[usize; 3]>,
    pub lengths: BTreeMap<[usize; 2], f64>,
}

impl PolarDisk {
    /// Builds the disk. Ring 0 uses `outer_ids` when given, otherwise fresh ids; fresh
    /// ids start at `first_id` and run ring by ring, the center last.
    pub fn build(rings: Vec<PolarRing>, first_id: usize, outer_ids: Option<&[usize]>) -> Self {
        let mut next = first_id;
        let mut ids = Vec::with_capacity(rings.len());
        for (m, ring) in rings.iter().enumerate() {
            if m == 0 {
                if let Some(o) = outer_ids {
                    assert_eq!(o.len(), ring.count);
                    ids.push(o.to_vec());
                    continue;
                }
            }
            ids.push((next..next + ring.count).collect::<Vec<_>>());
            next += ring.count;
        }
        let center = next;
        let mut polar = BTreeMap::new();
        for (ring, row) in rings.iter().zip(&ids) {
            for (j, &v) in row.iter().enumerate() {
                polar.insert(v, (ring.radius, j as f64 / ring.count as f64));
            }
        }
        polar.insert(center, (0.0, 0.0));
        let mut faces = Vec::new();
        for m in 0..rings.len() - 1 {
            faces.extend(ring_faces(&ids[m], &ids[m + 1]));
        }
        faces.extend(fan_faces(ids.last().unwrap(), center));
        let mut lengths = BTreeMap::new();
        for f in &faces {
            for c in 0..3 {
                let (a, b) = (f[c], f[(c + 1) % 3]);
                let k = if a < b { [a, b] } else { [b, a] };
                let (ra, fa) = polar[&a];
                let (rb, fb) = polar[&b];
                lengths.insert(k, polar_distance(ra, fa, rb, fb));
            }
        }
        PolarDisk {
            rings,
            ids,
            center,
            faces,
            lengths,
        }
    }

    /// Number of vertices created by this fragment (excluding reused outer ids).
    pub fn fresh_count(&self, reused_outer: bool) -> usize {
        let rings: usize = self.rings.iter().map(|r| r.count).sum();
        rings + 1 - if reused_outer { self.rings[0].count } else { 0 }
    }
}
