//! Projected supergradient ascent of lambda1-bar over densities in a conformal class.
//!
//! Densities are normalized to unit area, so lambda1-bar is lambda_1. With vertex areas
//! a and a mass-orthonormal first eigenbasis phi_1..phi_k, the superdifferential of
//! lambda1-bar in the a-weighted L2 metric is {G(X) = lambda (1 - sum X_ij beta_ij)}
//! over the spectraplex X >= 0, tr X = 1, where
//!   beta_ij(a) = (1 / a_a) sum_{f at a} (A_f / 9) sum_{v in f} phi_i(v) phi_j(v)
//! is the derivative of the lumped mass quadratic form. The ascent direction is the
//! minimum-norm element of that set.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::mesh::{DensityField, IntrinsicMesh};
use crate::spectrum::{assemble_mass, assemble_stiffness, face_cotangents, EigenSolver, SolverOptions, SpectrumResult};
use crate::util::hash_f64s;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AscentMethod {
    /// Additive step along the minimum-norm supergradient, projected back to
    /// {rho >= 0, unit area}.
    Supergradient,
    /// Multiplicative step rho e^{tau g} along the minimum-norm supergradient g in the
    /// rho-weighted metric, renormalized to unit area.
    Mirror,
    /// Damped rho <- |d Phi|^2 / lambda_1, the discrete form of the extremal identity.
    FixedPoint,
    /// Fixed-point steps while they gain, then mirror steps.
    Hybrid,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct MaximizeOptions {
    pub method: AscentMethod,
    pub max_iter: usize,
    /// Stop when an accepted step improves lambda1-bar by less than this (relative),
    /// or the minimum-norm direction is below it (relative to lambda).
    pub tol: f64,
    /// Eigenvalues within this relative distance of lambda_1 join the first cluster.
    pub cluster_tol: f64,
    /// First trial step as a fraction of the mean density.
    pub initial_step: f64,
    pub max_backtracks: usize,
    pub eig_tol: f64,
    pub seed: u64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        MaximizeOptions {
            method: AscentMethod::Hybrid,
            max_iter: 60,
            tol: 1e-6,
            cluster_tol: 1e-2,
            initial_step: 0.5,
            max_backtracks: 12,
            eig_tol: 1e-8,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct AscentStep {
    pub iter: usize,
    pub value: f64,
    pub step: f64,
    pub multiplicity: usize,
    pub density_hash: String,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct AscentTrace {
    pub steps: Vec<AscentStep>,
    /// a-norm of the minimum-norm supergradient at the last iterate, relative to lambda.
    pub final_direction_norm: f64,
    pub converged: bool,
    /// The iteration cap was hit before the stopping rule.
    pub partial: bool,
}

impl AscentTrace {
    pub fn initial(&self) -> f64 {
        self.steps[0].value
    }

    pub fn best(&self) -> f64 {
        self.steps.last().unwrap().value
    }
}

/// Per-vertex derivative data of the mass form.
pub(crate) struct MassGeometry {
    /// Vertex areas a_a (sum of A_f / 3).
    pub vertex_area: Vec<f64>,
    face_area: Vec<f64>,
    faces: Vec<[usize; 3]>,
}

impl MassGeometry {
    pub fn new(mesh: &IntrinsicMesh) -> Self {
        MassGeometry {
            vertex_area: mesh.vertex_areas(),
            face_area: mesh.face_areas(),
            faces: mesh.faces().to_vec(),
        }
    }

    /// beta for a pair of vertex functions.
    pub fn beta(&self, p: &[f64], q: &[f64]) -> Vec<f64> {
        let mut b = vec![0.0; self.vertex_area.len()];
        for (f, face) in self.faces.iter().enumerate() {
            let s: f64 = face.iter().map(|&v| p[v] * q[v]).sum::<f64>() * self.face_area[f] / 9.0;
            for &v in face {
                b[v] += s;
            }
        }
        for (x, a) in b.iter_mut().zip(&self.vertex_area) {
            if *a > 0.0 {
                *x /= a;
            }
        }
        b
    }

}

/// Projection onto {rho >= 0, sum a rho = 1} in the a-weighted norm: rho = (y - mu)_+.
pub(crate) fn project_weighted_simplex(y: &[f64], a: &[f64]) -> Vec<f64> {
    let mass = |mu: f64| -> f64 { y.iter().zip(a).map(|(v, w)| w * (v - mu).max(0.0)).sum() };
    let total: f64 = a.iter().sum();
    let ymax = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ymin = y.iter().cloned().fold(f64::INFINITY, f64::min);
    // mass is decreasing in mu; bracket the root
    let (mut lo, mut hi) = (ymin - 1.0 / total, ymax);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    // on the active set the map is affine: finish exactly
    let mu = 0.5 * (lo + hi);
    let (mut wa, mut wy) = (0.0, 0.0);
    for (v, w) in y.iter().zip(a) {
        if *v > mu {
            wa += w;
            wy += w * v;
        }
    }
    let mu = if wa > 0.0 { (wy - 1.0) / wa } else { mu };
    y.iter().map(|v| (v - mu).max(0.0)).collect()
}

fn normalize(rho: &[f64], a: &[f64]) -> Result<Vec<f64>> {
    let mass: f64 = rho.iter().zip(a).map(|(r, w)| r * w).sum();
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::InvalidInput("density has zero total mass".into()));
    }
    Ok(rho.iter().map(|r| r / mass).collect())
}

/// Minimum of |sum_ij X_ij g_ij|^2 over the spectraplex, given the Gram matrix of the
/// symmetric generators; accelerated projected gradient.
pub(crate) fn min_norm_spectraplex(k: usize, gram: &DMatrix<f64>, pairs: &[(usize, usize)]) -> DMatrix<f64> {
    let pidx = |i: usize, j: usize| pairs.iter().position(|&p| p == (i.min(j), i.max(j))).unwrap();
    // f(X) = sum_{p,q} w_p w_q x_p x_q gram_pq with x_p = X_ij, and w_p = 2 off-diagonal
    let weight = |p: usize| if pairs[p].0 == pairs[p].1 { 1.0 } else { 2.0 };
    let grad = |x: &DMatrix<f64>| -> DMatrix<f64> {
        let mut vals = vec![0.0; pairs.len()];
        for p in 0..pairs.len() {
            let (i, j) = pairs[p];
            vals[p] = x[(i, j)] * weight(p);
        }
        let mut g = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let p = pidx(i, j);
                let mut s = 0.0;
                for q in 0..pairs.len() {
                    s += gram[(p, q)] * vals[q];
                }
                g[(i, j)] = 2.0 * s;
            }
        }
        g
    };
    // in coordinates y_p = sqrt(w_p) x_p the Hessian is 2 D gram D with D = diag(sqrt w)
    let np = pairs.len();
    let d = DMatrix::from_fn(np, np, |p, q| if p == q { weight(p).sqrt() } else { 0.0 });
    let lip = 2.0 * SymmetricEigen::new(&d * gram * &d).eigenvalues.max().max(1e-300);
    let mut x = DMatrix::identity(k, k) / k as f64;
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..3000 {
        let z = &y - grad(&y) / lip;
        let xn = project_spectraplex(z);
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &xn + (&xn - &x) * ((t - 1.0) / tn);
        if (&xn - &x).norm() < 1e-14 {
            x = xn;
            break;
        }
        x = xn;
        t = tn;
    }
    x
}

/// Euclidean projection onto {X symmetric PSD, tr X = 1}.
pub(crate) fn project_spectraplex(z: DMatrix<f64>) -> DMatrix<f64> {
    let sym = (&z + z.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let d = project_simplex(eig.eigenvalues.as_slice());
    let v = &eig.eigenvectors;
    let mut out = DMatrix::zeros(z.nrows(), z.ncols());
    for (c, dc) in d.iter().enumerate() {
        if *dc > 0.0 {
            let col = v.column(c);
            out += col * col.transpose() * *dc;
        }
    }
    out
}

/// Projection of a vector onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// State at one density: spectrum, cluster and the minimum-norm supergradient.
pub(crate) struct Probe {
    pub value: f64,
    pub spectrum: SpectrumResult,
    pub multiplicity: usize,
    /// Minimum-norm supergradient divided by lambda1-bar: 1 - sum X_ij beta_ij (unit area).
    pub direction: Vec<f64>,
    pub direction_norm: f64,
    /// Optimal spectraplex point over the first cluster.
    pub x: DMatrix<f64>,
}

pub(crate) struct Ascender<'a> {
    geom: MassGeometry,
    solver: EigenSolver,
    mesh: &'a IntrinsicMesh,
    opts: MaximizeOptions,
    count: usize,
}

impl<'a> Ascender<'a> {
    pub fn new(mesh: &'a IntrinsicMesh, opts: &MaximizeOptions) -> Result<Self> {
        let s = assemble_stiffness(mesh)?;
        Ok(Ascender {
            geom: MassGeometry::new(mesh),
            solver: EigenSolver::new(&s),
            mesh,
            opts: opts.clone(),
            count: 8,
        })
    }

    pub fn vertex_area(&self) -> &[f64] {
        &self.geom.vertex_area
    }

    /// `rho` must have unit area.
    pub fn probe(&mut self, rho: &[f64], warm: Option<&[Vec<f64>]>) -> Result<Probe> {
        let density = DensityField::new(rho.to_vec())?;
        let mass = assemble_mass(self.mesh, Some(&density))?;
        let spectrum = loop {
            let opts = SolverOptions {
                count: self.count,
                tol: self.opts.eig_tol,
                seed: self.opts.seed,
                ..SolverOptions::default()
            };
            let res = self.solver.solve(&mass, &opts, warm)?;
            let k = res.first_multiplicity(self.opts.cluster_tol);
            if k + 1 < res.eigenvalues.len() {
                break res;
            }
            if self.count >= 32 {
                return Err(Error::CountTooSmall {
                    count: self.count,
                    cluster: k,
                });
            }
            self.count += 4;
        };
        let k = spectrum.first_multiplicity(self.opts.cluster_tol);
        let area: f64 = self.mesh.area(Some(&density));
        let lambda = spectrum.lambda1();
        let basis = &spectrum.eigenvectors[1..=k];
        let mut pairs = Vec::new();
        for i in 0..k {
            for j in i..k {
                pairs.push((i, j));
            }
        }
        // normalized generators g_ij = delta_ij - area beta_ij
        let gens: Vec<Vec<f64>> = pairs
            .iter()
            .map(|&(i, j)| {
                let b = self.geom.beta(&basis[i], &basis[j]);
                let d = if i == j { 1.0 } else { 0.0 };
                b.iter().map(|x| d - area * x).collect()
            })
            .collect();
        // the norm matches the step geometry: a for additive steps, a rho for multiplicative
        let w: Vec<f64> = match self.opts.method {
            AscentMethod::Supergradient => self.geom.vertex_area.clone(),
            _ => self.geom.vertex_area.iter().zip(rho).map(|(a, r)| a * r).collect(),
        };
        let wsum: f64 = w.iter().sum();
        let inner = |p: &[f64], q: &[f64]| -> f64 { p.iter().zip(q).zip(&w).map(|((x, y), c)| x * y * c).sum::<f64>() / wsum };
        let np = pairs.len();
        let mut gram = DMatrix::zeros(np, np);
        for p in 0..np {
            for q in p..np {
                let v = inner(&gens[p], &gens[q]);
                gram[(p, q)] = v;
                gram[(q, p)] = v;
            }
        }
        let x = min_norm_spectraplex(k, &gram, &pairs);
        let nv = rho.len();
        let mut direction = vec![0.0; nv];
        for (p, &(i, j)) in pairs.iter().enumerate() {
            let c = if i == j { x[(i, j)] } else { 2.0 * x[(i, j)] };
            for v in 0..nv {
                direction[v] += c * gens[p][v];
            }
        }
        let direction_norm = inner(&direction, &direction).sqrt();
        Ok(Probe {
            value: lambda * area,
            spectrum,
            multiplicity: k,
            direction,
            direction_norm,
            x,
        })
    }

    /// Vertex-lumped |d Phi|^2 / lambda for Phi = X^{1/2} phi, normalized to unit area.
    fn fixed_point_density(&self, probe: &Probe) -> Result<Vec<f64>> {
        let k = probe.multiplicity;
        let basis = &probe.spectrum.eigenvectors[1..=k];
        let mut dens = vec![0.0; self.mesh.vertex_count()];
        for (f, face) in self.mesh.faces().iter().enumerate() {
            let cot = face_cotangents(self.mesh, f)?;
            let mut e = 0.0;
            for c in 0..3 {
                let (a, b) = (face[(c + 1) % 3], face[(c + 2) % 3]);
                let mut s = 0.0;
                for i in 0..k {
                    let di = basis[i][a] - basis[i][b];
                    for j in 0..k {
                        s += probe.x[(i, j)] * di * (basis[j][a] - basis[j][b]);
                    }
                }
                e += 0.5 * cot[c] * s;
            }
            // e is the face integral of |d Phi|^2
            for &v in face {
                dens[v] += e / 3.0;
            }
        }
        for (d, a) in dens.iter_mut().zip(&self.geom.vertex_area) {
            *d = if *a > 0.0 { (*d / a).max(0.0) } else { 0.0 };
        }
        normalize(&dens, &self.geom.vertex_area)
    }
}

/// Maximizes lambda1-bar over densities rho >= 0 from `rho0`. Returns the final
/// (unit-area) density and the trace of accepted iterates.
pub fn maximize_conformal(
    mesh: &IntrinsicMesh,
    rho0: &DensityField,
    opts: &MaximizeOptions,
) -> Result<(DensityField, AscentTrace)> {
    if rho0.len() != mesh.vertex_count() {
        return Err(Error::InvalidInput(format!(
            "density has {} values for {} vertices",
            rho0.len(),
            mesh.vertex_count()
        )));
    }
    let mut asc = Ascender::new(mesh, opts)?;
    let a = asc.vertex_area().to_vec();
    let mut rho = normalize(rho0.values(), &a)?;
    let mut cur = asc.probe(&rho, None)?;
    let mut steps = vec![AscentStep {
        iter: 0,
        value: cur.value,
        step: 0.0,
        multiplicity: cur.multiplicity,
        density_hash: hash_f64s(&rho),
    }];
    let (mut mode, mut step) = match opts.method {
        AscentMethod::Hybrid | AscentMethod::FixedPoint => (AscentMethod::FixedPoint, 1.0),
        m => (m, opts.initial_step),
    };
    let mut converged = false;
    let mut stalled = 0;
    let mut iter = 0;
    while iter < opts.max_iter {
        iter += 1;
        if cur.direction_norm < opts.tol {
            converged = true;
            break;
        }
        let dmax = cur.direction.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let target = match mode {
            AscentMethod::FixedPoint => Some(asc.fixed_point_density(&cur)?),
            _ => None,
        };
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let trial: Vec<f64> = match mode {
                AscentMethod::Supergradient => {
                    // additive step of at most `step` times the mean density
                    let tau = step / (a.iter().sum::<f64>() * dmax.max(1e-300));
                    let y: Vec<f64> = rho.iter().zip(&cur.direction).map(|(r, d)| r + tau * d).collect();
                    project_weighted_simplex(&y, &a)
                }
                AscentMethod::FixedPoint => {
                    let w = step.min(1.0);
                    let t = target.as_ref().unwrap();
                    let y: Vec<f64> = rho.iter().zip(t).map(|(r, f)| (1.0 - w) * r + w * f).collect();
                    normalize(&y, &a)?
                }
                _ => {
                    // multiplicative step: no vertex density changes by more than e^step
                    let tau = step / dmax.max(1e-300);
                    let y: Vec<f64> = rho.iter().zip(&cur.direction).map(|(r, d)| r * (tau * d).exp()).collect();
                    normalize(&y, &a)?
                }
            };
            let warm: Vec<Vec<f64>> = cur.spectrum.eigenvectors.clone();
            let next = asc.probe(&trial, Some(&warm))?;
            if next.value >= cur.value * (1.0 - 1e-10) {
                accepted = Some((trial, next));
                break;
            }
            step *= 0.5;
        }
        let switch = opts.method == AscentMethod::Hybrid && mode == AscentMethod::FixedPoint;
        let Some((trial, next)) = accepted else {
            if switch {
                mode = AscentMethod::Mirror;
                step = opts.initial_step;
                stalled = 0;
                continue;
            }
            converged = true;
            break;
        };
        let gain = (next.value - cur.value) / cur.value;
        rho = trial;
        cur = next;
        steps.push(AscentStep {
            iter,
            value: cur.value,
            step,
            multiplicity: cur.multiplicity,
            density_hash: hash_f64s(&rho),
        });
        step *= 1.5;
        // a single small gain can follow a backtrack; require a run of them
        stalled = if gain.abs() < opts.tol { stalled + 1 } else { 0 };
        if stalled >= 3 {
            if switch {
                mode = AscentMethod::Mirror;
                step = opts.initial_step;
                stalled = 0;
                continue;
            }
            converged = true;
            break;
        }
    }
    let trace = AscentTrace {
        steps,
        final_direction_norm: cur.direction_norm,
        converged,
        partial: !converged,
    };
    Ok((DensityField::new(rho)?, trace))
}
