//! Sphere-valued maps by first eigenfunctions, and pointwise probes of them.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::mesh::{DensityField, IntrinsicMesh};
use crate::spectrum::{face_gradient_sq, MassMatrix};

/// Numerical rank threshold on the Gram optimum, relative to its largest eigenvalue.
pub const RANK_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct EigenMap {
    /// Components Phi_0..Phi_n as vertex functions.
    pub components: Vec<Vec<f64>>,
    /// PSD coefficient matrix A with |Phi|^2 = phi^T A phi.
    pub gram: DMatrix<f64>,
    /// max over vertices with positive mass of |1 - |Phi|^2|.
    pub unit_defect: f64,
}

impl EigenMap {
    /// n + 1, the target dimension.
    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn norm_sq_at(&self, v: usize) -> f64 {
        self.components.iter().map(|c| c[v] * c[v]).sum()
    }
}

/// Fits min over PSD A of sum_x w_x (phi(x)^T A phi(x) - 1)^2 with w the lumped masses,
/// by accelerated projected gradient on the PSD cone, and returns Phi = A^{1/2} phi.
pub fn extract_eigenmap(basis: &[Vec<f64>], mass: &MassMatrix) -> Result<EigenMap> {
    let k = basis.len();
    if k < 2 {
        return Err(Error::InvalidInput(format!(
            "a sphere-valued eigenmap needs an eigenspace of dimension at least 2, got {k}"
        )));
    }
    let w = mass.diagonal();
    let nv = w.len();
    if basis.iter().any(|b| b.len() != nv) {
        return Err(Error::InvalidInput("basis vectors do not match the mass matrix".into()));
    }
    // quadratic model over vec(A): vec^T H vec - 2 g^T vec + sum w
    let kk = k * k;
    let mut h = DMatrix::<f64>::zeros(kk, kk);
    let mut g = DVector::<f64>::zeros(kk);
    let mut outer = vec![0.0; kk];
    for x in 0..nv {
        if w[x] == 0.0 {
            continue;
        }
        for i in 0..k {
            for j in 0..k {
                outer[i * k + j] = basis[i][x] * basis[j][x];
            }
        }
        for p in 0..kk {
            g[p] += w[x] * outer[p];
            let wp = w[x] * outer[p];
            for q in p..kk {
                h[(p, q)] += wp * outer[q];
            }
        }
    }
    for p in 0..kk {
        for q in 0..p {
            h[(p, q)] = h[(q, p)];
        }
    }
    let lip = 2.0 * SymmetricEigen::new(h.clone()).eigenvalues.max().max(1e-300);
    let grad = |a: &DVector<f64>| -> DVector<f64> { (&h * a - &g) * 2.0 };
    let to_mat = |v: &DVector<f64>| DMatrix::from_row_slice(k, k, v.as_slice());
    let project = |v: DVector<f64>| -> DVector<f64> {
        let m = to_mat(&v);
        let m = (&m + m.transpose()) * 0.5;
        let e = SymmetricEigen::new(m);
        let mut out = DMatrix::zeros(k, k);
        for c in 0..k {
            let l = e.eigenvalues[c];
            if l > 0.0 {
                let col = e.eigenvectors.column(c);
                out += col * col.transpose() * l;
            }
        }
        DVector::from_row_slice(out.transpose().as_slice())
    };
    // start from the scalar multiple of the identity that fits best
    let id = DVector::from_fn(kk, |p, _| if p / k == p % k { 1.0 } else { 0.0 });
    let c0 = g.dot(&id) / id.dot(&(&h * &id)).max(1e-300);
    let mut a = id * c0;
    let mut y = a.clone();
    let mut t = 1.0f64;
    for _ in 0..5000 {
        let an = project(&y - grad(&y) / lip);
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let delta = (&an - &a).norm();
        y = &an + (&an - &a) * ((t - 1.0) / tn);
        a = an;
        t = tn;
        if delta <= 1e-14 * (1.0 + a.norm()) {
            break;
        }
    }
    let gram = to_mat(&a);
    let gram = (&gram + gram.transpose()) * 0.5;
    let e = SymmetricEigen::new(gram.clone());
    let top = e.eigenvalues.max();
    if !(top > 0.0) {
        return Err(Error::Geometry("eigenmap Gram optimum is zero".into()));
    }
    let mut components = Vec::new();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| e.eigenvalues[j].total_cmp(&e.eigenvalues[i]));
    for c in order {
        let l = e.eigenvalues[c];
        if l <= RANK_THRESHOLD * top {
            continue;
        }
        let s = l.sqrt();
        let v = e.eigenvectors.column(c);
        let mut comp = vec![0.0; nv];
        for (i, b) in basis.iter().enumerate() {
            let coef = s * v[i];
            for (o, x) in comp.iter_mut().zip(b) {
                *o += coef * x;
            }
        }
        components.push(comp);
    }
    let mut unit_defect = 0.0f64;
    for x in 0..nv {
        if w[x] > 0.0 {
            let n2: f64 = components.iter().map(|c| c[x] * c[x]).sum();
            unit_defect = unit_defect.max((1.0 - n2).abs());
        }
    }
    Ok(EigenMap {
        components,
        gram,
        unit_defect,
    })
}

/// Sum over components of the face-constant squared gradients.
pub fn energy_density(mesh: &IntrinsicMesh, components: &[Vec<f64>]) -> Result<Vec<f64>> {
    let mut total = vec![0.0; mesh.face_count()];
    for c in components {
        for (t, g) in total.iter_mut().zip(face_gradient_sq(mesh, c)?) {
            *t += g;
        }
    }
    Ok(total)
}

/// max over faces of |lambda_1 rho_f - |d Phi|^2_f| / (lambda_1 max rho), with rho_f the
/// face average of the density.
pub fn extremal_residual(mesh: &IntrinsicMesh, rho: &DensityField, phi: &EigenMap, lambda1: f64) -> Result<f64> {
    let dens = energy_density(mesh, &phi.components)?;
    let r = rho.values();
    let rmax = r.iter().cloned().fold(0.0f64, f64::max);
    if !(rmax > 0.0) || !(lambda1 > 0.0) {
        return Err(Error::InvalidInput("extremal residual needs positive lambda_1 and density".into()));
    }
    let mut worst = 0.0f64;
    for (f, face) in mesh.faces().iter().enumerate() {
        let rf = face.iter().map(|&v| r[v]).sum::<f64>() / 3.0;
        worst = worst.max((lambda1 * rf - dens[f]).abs());
    }
    Ok(worst / (lambda1 * rmax))
}

/// |d Phi(p)|^2 as the area-weighted average of face gradient sums over the one-ring.
pub fn gradient_at_point(mesh: &IntrinsicMesh, components: &[Vec<f64>], p: usize) -> Result<f64> {
    if p >= mesh.vertex_count() {
        return Err(Error::InvalidInput(format!("vertex {p} out of range")));
    }
    if mesh.boundary_vertices()[p] {
        return Err(Error::InvalidInput(format!("vertex {p} lies on the boundary")));
    }
    let ring: Vec<usize> = mesh
        .faces()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.contains(&p))
        .map(|(i, _)| i)
        .collect();
    if ring.is_empty() {
        return Err(Error::InvalidInput(format!("vertex {p} has no faces")));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for c in components {
        let g = face_gradient_sq(mesh, c)?;
        for &f in &ring {
            num += mesh.face_area(f) * g[f];
        }
    }
    for &f in &ring {
        den += mesh.face_area(f);
    }
    Ok(num / den)
}
