//! Cotangent stiffness, density-weighted lumped mass, and the smallest eigenpairs of
//! the pencil S phi = lambda M phi.

mod eigen;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{DensityField, IntrinsicMesh};

pub use eigen::{solve_smallest, EigenSolver, SolverOptions};

/// Default relative clustering threshold for the first eigenspace.
pub const DEFAULT_REL_TOL: f64 = 1e-4;

const DEGENERATE_ANGLE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct StiffnessMatrix(pub CsrMatrix);

impl StiffnessMatrix {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// u^T S u.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.0.bilinear(u, u)
    }
}

/// Lumped (diagonal) mass matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MassMatrix {
    diag: Vec<f64>,
}

impl MassMatrix {
    pub fn from_diagonal(diag: Vec<f64>) -> Result<Self> {
        if diag.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidInput("mass entries must be finite and nonnegative".into()));
        }
        if diag.iter().all(|d| *d == 0.0) {
            return Err(Error::InvalidInput("mass matrix is identically zero".into()));
        }
        Ok(MassMatrix { diag })
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.diag.iter().zip(u).zip(v).map(|((m, a), b)| m * a * b).sum()
    }

    pub fn norm_sq(&self, u: &[f64]) -> f64 {
        self.inner(u, u)
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.diag.iter().zip(u).map(|(m, a)| m * a).collect()
    }
}

/// Cotangents of the three corner angles; errors on numerically degenerate faces.
pub fn face_cotangents(mesh: &IntrinsicMesh, f: usize) -> Result<[f64; 3]> {
    let l = mesh.face_lengths(f);
    let area = mesh.face_area(f);
    let ang = mesh.corner_angles(f);
    if area <= 0.0
        || ang
            .iter()
            .any(|a| *a < DEGENERATE_ANGLE || *a > std::f64::consts::PI - DEGENERATE_ANGLE)
    {
        return Err(Error::DegenerateTriangle { face: f });
    }
    let mut cot = [0.0; 3];
    for c in 0..3 {
        let (a, b, o) = (l[(c + 1) % 3], l[(c + 2) % 3], l[c]);
        cot[c] = (a * a + b * b - o * o) / (4.0 * area);
    }
    Ok(cot)
}

/// Cotangent Laplacian: w_ij = (cot alpha + cot beta)/2, S_ij = -w_ij, S_ii = sum_j w_ij.
pub fn assemble_stiffness(mesh: &IntrinsicMesh) -> Result<StiffnessMatrix> {
    let mut w: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (f, face) in mesh.faces().iter().enumerate() {
        let cot = face_cotangents(mesh, f)?;
        for c in 0..3 {
            let (i, j) = (face[(c + 1) % 3], face[(c + 2) % 3]);
            let key = if i < j { (i, j) } else { (j, i) };
            *w.entry(key).or_insert(0.0) += 0.5 * cot[c];
        }
    }
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut diag = vec![0.0; mesh.vertex_count()];
    for (&(i, j), &wij) in &w {
        entries.insert((i, j), -wij);
        entries.insert((j, i), -wij);
        diag[i] += wij;
        diag[j] += wij;
    }
    for (i, d) in diag.into_iter().enumerate() {
        entries.insert((i, i), d);
    }
    Ok(StiffnessMatrix(CsrMatrix::from_map(mesh.vertex_count(), &entries)))
}

/// Lumped mass m_i = sum over faces at i of area/3 times the face-average density.
pub fn assemble_mass(mesh: &IntrinsicMesh, rho: Option<&DensityField>) -> Result<MassMatrix> {
    if let Some(r) = rho {
        if r.len() != mesh.vertex_count() {
            return Err(Error::InvalidInput(format!(
                "density has {} values for {} vertices",
                r.len(),
                mesh.vertex_count()
            )));
        }
    }
    let mut diag = vec![0.0; mesh.vertex_count()];
    for (f, face) in mesh.faces().iter().enumerate() {
        let avg = match rho {
            Some(r) => face.iter().map(|&v| r.values()[v]).sum::<f64>() / 3.0,
            None => 1.0,
        };
        let share = mesh.face_area(f) / 3.0 * avg;
        for &v in face {
            diag[v] += share;
        }
    }
    MassMatrix::from_diagonal(diag)
}

/// Eigenpairs of the pencil, smallest first.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// Mass-orthonormal eigenvectors.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Relative residuals ||S phi - lambda M phi|| / max(||S phi||, |lambda| ||M phi||, floor).
    pub residuals: Vec<f64>,
    /// Absolute residual norms ||S phi - lambda M phi||_2.
    pub residual_norms: Vec<f64>,
    pub restarts: usize,
}

impl SpectrumResult {
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[1]
    }

    /// Size of the cluster {i >= 1 : lambda_i <= lambda_1 (1 + rel_tol)}.
    pub fn first_multiplicity(&self, rel_tol: f64) -> usize {
        cluster_end(&self.eigenvalues, rel_tol) - 1
    }
}

fn cluster_end(ev: &[f64], rel_tol: f64) -> usize {
    let l1 = ev[1];
    let scale = ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let thresh = l1 + rel_tol * l1.abs() + 1e-12 * scale;
    let mut end = 1;
    while end < ev.len() && ev[end] <= thresh {
        end += 1;
    }
    end
}

/// The first eigenspace (indices 1..=k) and its dimension k.
///
/// Fails if every returned eigenvalue past index 0 falls in the cluster, since then
/// the gap to lambda_{k+1} is not certified.
pub fn first_eigenspace(result: &SpectrumResult, rel_tol: f64) -> Result<(Vec<Vec<f64>>, usize)> {
    if result.eigenvalues.len() < 3 {
        return Err(Error::CountTooSmall {
            count: result.eigenvalues.len(),
            cluster: result.eigenvalues.len().saturating_sub(1),
        });
    }
    let end = cluster_end(&result.eigenvalues, rel_tol);
    if end >= result.eigenvalues.len() {
        return Err(Error::CountTooSmall {
            count: result.eigenvalues.len(),
            cluster: end - 1,
        });
    }
    Ok((result.eigenvectors[1..end].to_vec(), end - 1))
}

/// lambda_1 times area(mesh, rho).
pub fn normalized_lambda1(mesh: &IntrinsicMesh, rho: Option<&DensityField>) -> Result<f64> {
    let s = assemble_stiffness(mesh)?;
    let m = assemble_mass(mesh, rho)?;
    let res = solve_smallest(&s, &m, 4, 1e-9)?;
    Ok(res.lambda1() * mesh.area(rho))
}

/// Q(u, v) = u^T S v - lambda_1 u^T M v.
pub fn quadratic_form_q(s: &StiffnessMatrix, m: &MassMatrix, lambda1: f64, u: &[f64], v: &[f64]) -> f64 {
    s.0.bilinear(u, v) - lambda1 * m.inner(u, v)
}

/// Mass-orthogonal projection onto span(basis); the basis must be mass-orthonormal.
pub fn project_first_eigenspace(basis: &[Vec<f64>], m: &MassMatrix, u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for phi in basis {
        let c = m.inner(phi, u);
        for (o, p) in out.iter_mut().zip(phi) {
            *o += c * p;
        }
    }
    out
}

/// Componentwise projection of a vector-valued function.
pub fn project_components(basis: &[Vec<f64>], m: &MassMatrix, u: &[Vec<f64>]) -> Vec<Vec<f64>> {
    u.iter().map(|c| project_first_eigenspace(basis, m, c)).collect()
}

/// Squared gradient norm of a P1 function on each face: (1/A) sum_c (cot_c / 2)(u_a - u_b)^2.
pub fn face_gradient_sq(mesh: &IntrinsicMesh, u: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(mesh.face_count());
    for (f, face) in mesh.faces().iter().enumerate() {
        let cot = face_cotangents(mesh, f)?;
        let mut e = 0.0;
        for c in 0..3 {
            let d = u[face[(c + 1) % 3]] - u[face[(c + 2) % 3]];
            e += 0.5 * cot[c] * d * d;
        }
        out.push(e / mesh.face_area(f));
    }
    Ok(out)
}

/// Dirichlet energy of a P1 function restricted to a set of faces.
pub fn energy_on_faces(mesh: &IntrinsicMesh, faces: &[usize], u: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for &f in faces {
        let cot = face_cotangents(mesh, f)?;
        let face = mesh.faces()[f];
        for c in 0..3 {
            let d = u[face[(c + 1) % 3]] - u[face[(c + 2) % 3]];
            total += 0.5 * cot[c] * d * d;
        }
    }
    Ok(total)
}
