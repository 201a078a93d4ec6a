//! Envelope (profile) LU factorization without pivoting.
//!
//! Nodal matrices of passive ladders are diagonally dominant, so no pivoting
//! is needed; a reverse Cuthill–McKee ordering keeps the profile narrow and
//! highly connected nodes (a driven shield tap) are moved to the end so
//! their dense row and column do not widen the rest of the envelope.

use std::collections::{BTreeMap, VecDeque};

/// Square sparse matrix in coordinate form, duplicate entries summed.
#[derive(Debug, Clone, Default)]
pub struct SparseMatrix {
    pub n: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl SparseMatrix {
    pub fn new(n: usize) -> Self {
        Self { n, entries: BTreeMap::new() }
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        *self.entries.entry((row, col)).or_insert(0.0) += value;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries.get(&(row, col)).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().filter(|(_, v)| **v != 0.0).map(|(&(r, c), &v)| (r, c, v))
    }

    /// Largest absolute entry per row.
    pub fn row_max(&self) -> Vec<f64> {
        let mut m = vec![0.0f64; self.n];
        for (r, _, v) in self.iter() {
            m[r] = m[r].max(v.abs());
        }
        m
    }

    pub fn to_csr(&self) -> Csr {
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for (r, c, v) in self.iter() {
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for r in 0..self.n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Csr { row_ptr, cols, vals }
    }
}

/// Compressed sparse rows, used for residual checks.
#[derive(Debug, Clone)]
pub struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    /// `out = b - A x`; returns `(max |out|, max row-sum |A| * max |x|)`.
    pub fn residual(&self, x: &[f64], b: &[f64], out: &mut [f64]) -> (f64, f64) {
        let mut r_max = 0.0f64;
        let mut a_norm = 0.0f64;
        for (i, o) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = b[i];
            let mut row_abs = 0.0;
            for k in lo..hi {
                s -= self.vals[k] * x[self.cols[k]];
                row_abs += self.vals[k].abs();
            }
            *o = s;
            r_max = r_max.max(s.abs());
            a_norm = a_norm.max(row_abs);
        }
        let x_max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (r_max, a_norm * x_max)
    }
}

/// Fill-reducing symmetric ordering; `perm[new] = old`.
pub fn ordering(a: &SparseMatrix) -> Vec<usize> {
    let n = a.n;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, c, _) in a.iter() {
        if r != c {
            adj[r].push(c);
            adj[c].push(r);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let hub_degree = 16usize.max(4 * (n as f64).sqrt() as usize);
    let is_hub: Vec<bool> = adj.iter().map(|l| l.len() > hub_degree).collect();
    let degree = |i: usize| adj[i].iter().filter(|&&j| !is_hub[j]).count();

    let mut visited = is_hub.clone();
    let mut order = Vec::with_capacity(n);
    // Start each component from a minimum-degree node.
    while let Some(start) = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree(i), i)) {
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&j| !visited[j]).collect();
            next.sort_by_key(|&j| (degree(j), j));
            for j in next {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order.extend((0..n).filter(|&i| is_hub[i]));
    order
}

/// A failed pivot, reported by its (original) row index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingularPivot(pub usize);

#[derive(Debug, Clone)]
pub struct EnvelopeLu {
    n: usize,
    perm: Vec<usize>,
    /// Row `i` of L covers columns `lo_start[i]..i`.
    lo_start: Vec<usize>,
    lo: Vec<Vec<f64>>,
    /// Column `j` of U covers rows `up_start[j]..j`.
    up_start: Vec<usize>,
    up: Vec<Vec<f64>>,
    diag: Vec<f64>,
}

impl EnvelopeLu {
    pub fn factor(a: &SparseMatrix, perm: Vec<usize>) -> Result<Self, SingularPivot> {
        let n = a.n;
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut lo_start: Vec<usize> = (0..n).collect();
        let mut up_start: Vec<usize> = (0..n).collect();
        for (r, c, _) in a.iter() {
            let (i, j) = (inv[r], inv[c]);
            if j < i {
                lo_start[i] = lo_start[i].min(j);
            } else if i < j {
                up_start[j] = up_start[j].min(i);
            }
        }
        let mut lo: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0; i - lo_start[i]]).collect();
        let mut up: Vec<Vec<f64>> = (0..n).map(|j| vec![0.0; j - up_start[j]]).collect();
        let mut diag = vec![0.0; n];
        for (r, c, v) in a.iter() {
            let (i, j) = (inv[r], inv[c]);
            if j < i {
                lo[i][j - lo_start[i]] = v;
            } else if i < j {
                up[j][i - up_start[j]] = v;
            } else {
                diag[i] = v;
            }
        }
        let row_max = a.row_max();

        for i in 0..n {
            // Row i of L.
            for j in lo_start[i]..i {
                let k0 = lo_start[i].max(up_start[j]);
                let s = dot(&lo[i][k0 - lo_start[i]..j - lo_start[i]], &up[j][k0 - up_start[j]..]);
                let idx = j - lo_start[i];
                lo[i][idx] = (lo[i][idx] - s) / diag[j];
            }
            // Column i of U.
            for j in up_start[i]..i {
                let k0 = lo_start[j].max(up_start[i]);
                let s = dot(&lo[j][k0 - lo_start[j]..], &up[i][k0 - up_start[i]..j - up_start[i]]);
                up[i][j - up_start[i]] -= s;
            }
            let k0 = lo_start[i].max(up_start[i]);
            let s = dot(&lo[i][k0 - lo_start[i]..], &up[i][k0 - up_start[i]..]);
            diag[i] -= s;
            let scale = row_max[perm[i]];
            if !(diag[i].abs() > 1e-13 * scale) || !diag[i].is_finite() {
                return Err(SingularPivot(perm[i]));
            }
        }
        Ok(Self { n, perm, lo_start, lo, up_start, up, diag })
    }

    /// Solve `A x = b` in place (`b` and `x` in original ordering).
    pub fn solve(&self, b: &[f64], x: &mut [f64], work: &mut Vec<f64>) {
        let n = self.n;
        work.clear();
        work.extend(self.perm.iter().map(|&old| b[old]));
        let y = work;
        for i in 0..n {
            let s0 = self.lo_start[i];
            y[i] -= dot(&self.lo[i], &y[s0..i]);
        }
        for i in (0..n).rev() {
            y[i] /= self.diag[i];
            let xi = y[i];
            let s0 = self.up_start[i];
            for (yj, u) in y[s0..i].iter_mut().zip(&self.up[i]) {
                *yj -= u * xi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
    }

    /// Stored entries in the envelope (diagnostic).
    pub fn envelope_size(&self) -> usize {
        self.n + self.lo.iter().map(Vec::len).sum::<usize>() + self.up.iter().map(Vec::len).sum::<usize>()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
