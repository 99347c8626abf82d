use std::collections::VecDeque;

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Reverse Cuthill–McKee ordering; `perm[new] = old`.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_levels = |start: usize, mark: &mut Vec<u32>, stamp: u32| -> (usize, usize) {
        // returns (last vertex of the deepest level with minimal degree, depth)
        let mut level = vec![start];
        mark[start] = stamp;
        let mut depth = 0;
        let mut last = level.clone();
        while !level.is_empty() {
            let mut next = Vec::new();
            for &v in &level {
                for &w in &adj[v] {
                    if mark[w] != stamp {
                        mark[w] = stamp;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            depth += 1;
            last = next.clone();
            level = next;
        }
        let far = *last.iter().min_by_key(|&&v| (deg[v], v)).unwrap();
        (far, depth)
    };
    let mut mark = vec![0u32; n];
    let mut stamp = 0u32;
    for s in 0..n {
        if visited[s] {
            continue;
        }
        // pseudo-peripheral start (George–Liu)
        let mut start = s;
        stamp += 1;
        let (mut far, mut depth) = bfs_levels(start, &mut mark, stamp);
        for _ in 0..8 {
            stamp += 1;
            let (f2, d2) = bfs_levels(far, &mut mark, stamp);
            if d2 <= depth {
                break;
            }
            start = far;
            far = f2;
            depth = d2;
        }
        if depth > 0 {
            start = far;
        }
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (deg[w], w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Symbolic envelope structure (ordering and first nonzero column per row), reusable
/// across matrices with the same sparsity pattern.
#[derive(Clone, Debug)]
pub struct EnvelopePlan {
    perm: Vec<usize>,
    inv: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
}

impl EnvelopePlan {
    pub fn new(adj: &[Vec<usize>]) -> Self {
        let perm = reverse_cuthill_mckee(adj);
        let n = perm.len();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (old, nb) in adj.iter().enumerate() {
            let i = inv[old];
            for &w in nb {
                let j = inv[w];
                if j < i {
                    first[i] = first[i].min(j);
                }
            }
        }
        let mut offset = vec![0; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i] + 1);
        }
        EnvelopePlan {
            perm,
            inv,
            first,
            offset,
        }
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        *self.offset.last().unwrap()
    }
}

/// Cholesky factor L (A = L L^T) stored row-wise within the envelope.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    plan: EnvelopePlan,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix, plan: &EnvelopePlan) -> Result<Self> {
        let n = a.dim();
        let p = plan;
        let mut data = vec![0.0; p.envelope_size()];
        for old in 0..n {
            let i = p.inv[old];
            for (wold, v) in a.row(old) {
                let j = p.inv[wold];
                if j <= i {
                    data[p.offset[i] + (j - p.first[i])] = v;
                }
            }
        }
        for i in 0..n {
            let fi = p.first[i];
            let oi = p.offset[i];
            for j in fi..i {
                let fj = p.first[j];
                let oj = p.offset[j];
                let start = fi.max(fj);
                let mut s = 0.0;
                let ri = &data[oi + (start - fi)..oi + (j - fi)];
                let rj = &data[oj + (start - fj)..oj + (j - fj)];
                for (x, y) in ri.iter().zip(rj) {
                    s += x * y;
                }
                let ljj = data[oj + (j - fj)];
                data[oi + (j - fi)] = (data[oi + (j - fi)] - s) / ljj;
            }
            let row = &data[oi..oi + (i - fi)];
            let s: f64 = row.iter().map(|x| x * x).sum();
            let d = data[oi + (i - fi)] - s;
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { row: p.perm[i], pivot: d });
            }
            data[oi + (i - fi)] = d.sqrt();
        }
        Ok(EnvelopeCholesky {
            plan: plan.clone(),
            data,
        })
    }

    /// Solves A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let p = &self.plan;
        let n = b.len();
        let mut y: Vec<f64> = (0..n).map(|i| b[p.perm[i]]).collect();
        for i in 0..n {
            let fi = p.first[i];
            let oi = p.offset[i];
            let row = &self.data[oi..oi + (i - fi)];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, x)| l * x).sum();
            y[i] = (y[i] - s) / self.data[oi + (i - fi)];
        }
        for i in (0..n).rev() {
            let fi = p.first[i];
            let oi = p.offset[i];
            y[i] /= self.data[oi + (i - fi)];
            let xi = y[i];
            let row = &self.data[oi..oi + (i - fi)];
            for (yj, l) in y[fi..i].iter_mut().zip(row) {
                *yj -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[p.perm[i]] = y[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn path_laplacian_plus(n: usize, shift: f64) -> CsrMatrix {
        let mut m = BTreeMap::new();
        for i in 0..n {
            m.insert((i, i), 2.0 + shift);
            if i + 1 < n {
                m.insert((i, i + 1), -1.0);
                m.insert((i + 1, i), -1.0);
            }
        }
        CsrMatrix::from_map(n, &m)
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = path_laplacian_plus(10, 0.0);
        let mut p = reverse_cuthill_mckee(&a.pattern());
        p.sort();
        assert_eq!(p, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let a = path_laplacian_plus(5, -3.0);
        let plan = EnvelopePlan::new(&a.pattern());
        assert!(EnvelopeCholesky::factor(&a, &plan).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn solve_inverts_random_spd(
            n in 2usize..40,
            extra in proptest::collection::vec((0usize..40, 0usize..40, 0.01f64..1.0), 0..60),
            rhs_seed in proptest::collection::vec(-1.0f64..1.0, 40),
        ) {
            // graph Laplacian with random positive weights plus identity is SPD
            let mut m = BTreeMap::new();
            for i in 0..n {
                m.insert((i, i), 1.0);
            }
            for (a, b, w) in extra {
                let (a, b) = (a % n, b % n);
                if a == b { continue; }
                *m.entry((a, b)).or_insert(0.0) -= w;
                *m.entry((b, a)).or_insert(0.0) -= w;
                *m.entry((a, a)).or_insert(0.0) += w;
                *m.entry((b, b)).or_insert(0.0) += w;
            }
            let a = CsrMatrix::from_map(n, &m);
            let plan = EnvelopePlan::new(&a.pattern());
            let f = EnvelopeCholesky::factor(&a, &plan).unwrap();
            let b = &rhs_seed[..n];
            let x = f.solve(b);
            let r = a.mul(&x);
            for i in 0..n {
                prop_assert!((r[i] - b[i]).abs() < 1e-10);
            }
        }
    }
}
