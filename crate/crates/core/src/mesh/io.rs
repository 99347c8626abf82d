//! Plain-text `IMESH v1` format.
//!
//! ```text
//! IMESH v1 <V> <F> <B>
//! # free comment lines (anywhere after the header)
//! o orientable|nonorientable|unknown
//! f i j k            (F lines)
//! e i j <length>     (one per undirected edge, i < j, lexicographic)
//! b n v0 a0 v1 a1 …  (B lines: loop vertices with angular parameters)
//! p center radius    (flat patches, optional)
//! ```
//! Reals are written with 17 significant digits, which round-trips f64 exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{BoundaryLoop, FlatPatch, IntrinsicMesh, Orientability};
use crate::error::{Error, Result};

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes a mesh; `comments` become `#` lines right after the header.
pub fn write_imesh(mesh: &IntrinsicMesh, comments: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "IMESH v1 {} {} {}",
        mesh.vertex_count(),
        mesh.face_count(),
        mesh.boundary_loops().len()
    );
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(s, "# {line}");
        }
    }
    let _ = writeln!(s, "o {}", mesh.declared_orientability().as_str());
    for f in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0], f[1], f[2]);
    }
    for (e, l) in mesh.edges().iter().zip(mesh.lengths()) {
        let _ = writeln!(s, "e {} {} {}", e[0], e[1], real(*l));
    }
    for lp in mesh.boundary_loops() {
        let _ = write!(s, "b {}", lp.vertices.len());
        for (v, a) in lp.vertices.iter().zip(&lp.angles) {
            let _ = write!(s, " {} {}", v, real(*a));
        }
        s.push('\n');
    }
    for p in mesh.flat_patches() {
        let _ = writeln!(s, "p {} {}", p.center, real(p.radius));
    }
    s
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let t = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    t.parse()
        .map_err(|_| perr(line, format!("cannot parse {what} from '{t}'")))
}

/// Parses `IMESH v1` text, returning the mesh and its comment lines.
pub fn parse_imesh(text: &str) -> Result<(IntrinsicMesh, Vec<String>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("IMESH") || tok.next() != Some("v1") {
        return Err(perr(hl, "expected header 'IMESH v1 <V> <F> <B>'"));
    }
    let nv: usize = num(tok.next(), hl, "vertex count")?;
    let nf: usize = num(tok.next(), hl, "face count")?;
    let nb: usize = num(tok.next(), hl, "boundary loop count")?;
    let mut comments = Vec::new();
    let mut faces = Vec::with_capacity(nf);
    let mut lengths = BTreeMap::new();
    let mut loops = Vec::new();
    let mut patches = Vec::new();
    let mut orient = Orientability::Unknown;
    for (ln, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            comments.push(c.strip_prefix(' ').unwrap_or(c).to_string());
            continue;
        }
        let mut t = line.split_whitespace();
        match t.next() {
            Some("o") => {
                orient = match t.next() {
                    Some("orientable") => Orientability::Orientable,
                    Some("nonorientable") => Orientability::NonOrientable,
                    Some("unknown") => Orientability::Unknown,
                    other => return Err(perr(ln, format!("bad orientability {other:?}"))),
                }
            }
            Some("f") => {
                let mut f = [0usize; 3];
                for (c, slot) in f.iter_mut().enumerate() {
                    *slot = num(t.next(), ln, &format!("face index {c}"))?;
                    if *slot >= nv {
                        return Err(perr(ln, format!("dangling vertex index {}", *slot)));
                    }
                }
                faces.push(f);
            }
            Some("e") => {
                let i: usize = num(t.next(), ln, "edge endpoint")?;
                let j: usize = num(t.next(), ln, "edge endpoint")?;
                let l: f64 = num(t.next(), ln, "edge length")?;
                if i >= nv || j >= nv {
                    return Err(perr(ln, format!("dangling vertex index in edge {i}-{j}")));
                }
                if !(l.is_finite() && l > 0.0) {
                    return Err(perr(ln, format!("edge length {l} must be positive")));
                }
                let key = if i < j { [i, j] } else { [j, i] };
                if lengths.insert(key, l).is_some() {
                    return Err(perr(ln, format!("duplicate edge {i}-{j}")));
                }
            }
            Some("b") => {
                let n: usize = num(t.next(), ln, "loop size")?;
                let mut vertices = Vec::with_capacity(n);
                let mut angles = Vec::with_capacity(n);
                for _ in 0..n {
                    let v: usize = num(t.next(), ln, "loop vertex")?;
                    if v >= nv {
                        return Err(perr(ln, format!("dangling vertex index {v}")));
                    }
                    vertices.push(v);
                    angles.push(num(t.next(), ln, "loop angle")?);
                }
                loops.push(BoundaryLoop { vertices, angles });
            }
            Some("p") => {
                let center: usize = num(t.next(), ln, "patch center")?;
                if center >= nv {
                    return Err(perr(ln, format!("dangling vertex index {center}")));
                }
                let radius: f64 = num(t.next(), ln, "patch radius")?;
                patches.push(FlatPatch { center, radius });
            }
            Some(other) => return Err(perr(ln, format!("unknown record '{other}'"))),
            None => {}
        }
        if t.next().is_some() {
            return Err(perr(ln, "trailing tokens"));
        }
    }
    if faces.len() != nf {
        return Err(perr(0, format!("header declares {nf} faces, found {}", faces.len())));
    }
    if loops.len() != nb {
        return Err(perr(0, format!("header declares {nb} loops, found {}", loops.len())));
    }
    let mesh = IntrinsicMesh::new(nv, faces, &lengths)
        .map_err(|e| perr(0, e.to_string()))?
        .with_boundary_loops(loops)
        .with_flat_patches(patches)
        .with_orientable(orient);
    Ok((mesh, comments))
}

pub fn save(mesh: &IntrinsicMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_imesh(mesh, &[]))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<IntrinsicMesh> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_imesh(&text)?.0)
}
