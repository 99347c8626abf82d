//! Restarted block Krylov iteration with shift-invert for the smallest eigenpairs of
//! S phi = lambda M phi, M diagonal and possibly singular.
//!
//! The operator is x -> (S - sigma M)^{-1} M x with sigma = -1e-6 * mean(diag S).
//! Every basis vector lies in the range of that operator, where the M inner product is
//! definite (such vectors are S-harmonic on the vertices where M vanishes), so the
//! kernel of M never enters the Rayleigh–Ritz space. Rayleigh–Ritz is done on S with
//! an M-orthonormal basis.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{MassMatrix, SpectrumResult, StiffnessMatrix};
use crate::error::{Error, Result};
use crate::linalg::{EnvelopeCholesky, EnvelopePlan};
use crate::util::norm2;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Number of eigenpairs wanted (including lambda_0).
    pub count: usize,
    /// Relative residual tolerance.
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
    /// Krylov blocks generated per restart.
    pub depth: usize,
    /// Block size beyond `count`.
    pub extra: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            count: 8,
            tol: 1e-9,
            max_restarts: 60,
            seed: 0x5eed_1a4b,
            depth: 3,
            extra: 8,
        }
    }
}

/// Ritz pairs of S on the M-orthonormal basis q, the `keep` smallest first.
fn rayleigh_ritz(s: &StiffnessMatrix, q: &[Vec<f64>], keep: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k = q.len();
    let n = q.first().map_or(0, |v| v.len());
    let sq: Vec<Vec<f64>> = q.iter().map(|v| s.0.mul(v)).collect();
    let mut h = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            let v = 0.5 * (crate::util::dot(&q[i], &sq[j]) + crate::util::dot(&q[j], &sq[i]));
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vals = Vec::with_capacity(keep);
    let mut vecs = Vec::with_capacity(keep);
    for &c in idx.iter().take(keep) {
        let mut y = vec![0.0; n];
        for r in 0..k {
            let z = eig.eigenvectors[(r, c)];
            if z == 0.0 {
                continue;
            }
            for i in 0..n {
                y[i] += z * q[r][i];
            }
        }
        vals.push(eig.eigenvalues[c]);
        vecs.push(y);
    }
    (vals, vecs)
}

/// Factorization-independent state for repeated solves with the same stiffness.
#[derive(Clone, Debug)]
pub struct EigenSolver {
    s: StiffnessMatrix,
    plan: EnvelopePlan,
    s_max: f64,
}

fn m_inner(m: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..m.len() {
        s += m[i] * a[i] * b[i];
    }
    s
}

/// M-orthonormalizes `cand` against `basis` (and each other), appending survivors.
fn orthonormalize_into(m: &[f64], basis: &mut Vec<Vec<f64>>, cand: Vec<Vec<f64>>) -> usize {
    let mut added = 0;
    for mut w in cand {
        let n0 = m_inner(m, &w, &w).sqrt();
        if !(n0 > 0.0) || !n0.is_finite() {
            continue;
        }
        for _ in 0..2 {
            for q in basis.iter() {
                let c = m_inner(m, q, &w);
                for (x, y) in w.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        let n1 = m_inner(m, &w, &w).sqrt();
        if n1 <= 1e-10 * n0 {
            continue;
        }
        for x in &mut w {
            *x /= n1;
        }
        basis.push(w);
        added += 1;
    }
    added
}

impl EigenSolver {
    pub fn new(s: &StiffnessMatrix) -> Self {
        let plan = EnvelopePlan::new(&s.0.pattern());
        EigenSolver {
            s: s.clone(),
            plan,
            s_max: s.0.max_abs(),
        }
    }

    pub fn stiffness(&self) -> &StiffnessMatrix {
        &self.s
    }

    /// Smallest `opts.count` eigenpairs. `warm` vectors (if any) seed the start block.
    pub fn solve(
        &self,
        mass: &MassMatrix,
        opts: &SolverOptions,
        warm: Option<&[Vec<f64>]>,
    ) -> Result<SpectrumResult> {
        let n = self.s.dim();
        if mass.dim() != n {
            return Err(Error::InvalidInput(format!(
                "stiffness is {n}x{n} but mass has {} entries",
                mass.dim()
            )));
        }
        let m = mass.diagonal();
        let rank = m.iter().filter(|x| **x > 0.0).count();
        if opts.count == 0 || opts.count > rank {
            return Err(Error::InvalidInput(format!(
                "requested {} eigenpairs but the pencil has only {rank} finite eigenvalues",
                opts.count
            )));
        }
        let diag = self.s.0.diagonal();
        let mean_diag = diag.iter().sum::<f64>() / n as f64;
        if !(mean_diag > 0.0) {
            return Err(Error::InvalidInput("stiffness matrix has no positive diagonal".into()));
        }
        let sigma = -1e-6 * mean_diag;
        let shifted = self.s.0.add_diagonal(-sigma, m);
        let chol = EnvelopeCholesky::factor(&shifted, &self.plan)?;
        let op = |x: &[f64]| -> Vec<f64> {
            let mx: Vec<f64> = x.iter().zip(m).map(|(a, b)| a * b).collect();
            chol.solve(&mx)
        };

        let block = (opts.count + opts.extra).min(rank);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut start: Vec<Vec<f64>> = Vec::new();
        if let Some(w) = warm {
            for v in w.iter().take(block) {
                if v.len() == n {
                    start.push(v.clone());
                }
            }
        }
        while start.len() < block {
            start.push((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
        let mut x: Vec<Vec<f64>> = Vec::new();
        orthonormalize_into(m, &mut x, start.iter().map(|v| op(v)).collect());
        let mut refills = 0;
        while x.len() < block && refills < 4 {
            let fresh: Vec<Vec<f64>> = (0..block - x.len())
                .map(|_| op(&(0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()))
                .collect();
            orthonormalize_into(m, &mut x, fresh);
            refills += 1;
        }
        if x.len() < opts.count {
            return Err(Error::InvalidInput(
                "could not build a start block of the requested size".into(),
            ));
        }

        let mut last_res = vec![f64::INFINITY; opts.count];
        for restart in 0..opts.max_restarts {
            let mut q = x.clone();
            let mut front = x.clone();
            for _ in 0..opts.depth {
                let next: Vec<Vec<f64>> = front.iter().map(|v| op(v)).collect();
                let before = q.len();
                orthonormalize_into(m, &mut q, next);
                if q.len() == before {
                    break;
                }
                front = q[before..].to_vec();
            }
            let keep = block.min(q.len());
            let (thetas, ys) = rayleigh_ritz(&self.s, &q, keep);
            let mut vals = Vec::with_capacity(keep);
            let mut vecs = Vec::with_capacity(keep);
            let mut res = Vec::with_capacity(keep);
            let mut res_abs = Vec::with_capacity(keep);
            for (theta, y) in thetas.into_iter().zip(ys) {
                let sy = self.s.0.mul(&y);
                let my: Vec<f64> = y.iter().zip(m).map(|(a, b)| a * b).collect();
                let r: Vec<f64> = sy.iter().zip(&my).map(|(a, b)| a - theta * b).collect();
                let rn = norm2(&r);
                let denom = norm2(&sy)
                    .max(theta.abs() * norm2(&my))
                    .max(1e-4 * self.s_max * norm2(&y));
                vals.push(theta);
                vecs.push(y);
                res.push(rn / denom);
                res_abs.push(rn);
            }
            if vals.len() < opts.count {
                return Err(Error::InvalidInput("Krylov space collapsed below the requested count".into()));
            }
            let converged = res.iter().take(opts.count).all(|r| *r <= opts.tol);
            last_res = res[..opts.count.min(res.len())].to_vec();
            if converged {
                vals.truncate(opts.count);
                vecs.truncate(opts.count);
                res.truncate(opts.count);
                res_abs.truncate(opts.count);
                // constants per component: fix sign for reproducibility
                for v in vecs.iter_mut() {
                    let pivot = v.iter().fold(0.0f64, |a, b| if b.abs() > a.abs() { *b } else { a });
                    if pivot < 0.0 {
                        for x in v.iter_mut() {
                            *x = -*x;
                        }
                    }
                }
                return Ok(SpectrumResult {
                    eigenvalues: vals,
                    eigenvectors: vecs,
                    residuals: res,
                    residual_norms: res_abs,
                    restarts: restart,
                });
            }
            x = vecs;
        }
        let worst = last_res.iter().fold(0.0f64, |a, b| a.max(*b));
        Err(Error::NonConvergence {
            iterations: opts.max_restarts,
            worst,
            residuals: last_res,
        })
    }
}

/// One-shot solve of the `count` smallest eigenpairs with default options.
pub fn solve_smallest(
    s: &StiffnessMatrix,
    m: &MassMatrix,
    count: usize,
    tol: f64,
) -> Result<SpectrumResult> {
    let opts = SolverOptions {
        count,
        tol,
        ..SolverOptions::default()
    };
    EigenSolver::new(s).solve(m, &opts, None)
}
