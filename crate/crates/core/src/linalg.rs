//! Direct solver for the sparse, nearly banded systems produced by the
//! trace-replaced generator.
//!
//! Unknowns are reordered with reverse Cuthill-McKee and factored by a
//! banded LU with partial pivoting (row interchanges confined to the lower
//! band, so the upper band grows to `kl + ku`).

use std::collections::VecDeque;

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Union-find over `0..n`.
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Reverse Cuthill-McKee ordering of an undirected graph given as adjacency
/// lists. Returns `perm` with `perm[new] = old`.
pub(crate) fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    while order.len() < n {
        let seed = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| degree[v])
            .expect("unvisited vertex exists");
        let start = pseudo_peripheral(adj, seed, &visited);

        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_unstable_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(adj: &[Vec<usize>], seed: usize, blocked: &[bool]) -> usize {
    let mut start = seed;
    let mut best_ecc = 0;
    for _ in 0..4 {
        let (far, ecc) = bfs_farthest(adj, start, blocked);
        if ecc <= best_ecc {
            break;
        }
        best_ecc = ecc;
        start = far;
    }
    start
}

fn bfs_farthest(adj: &[Vec<usize>], start: usize, blocked: &[bool]) -> (usize, usize) {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut far = (start, 0);
    while let Some(v) = queue.pop_front() {
        let d = dist[v];
        if d > far.1 || (d == far.1 && adj[v].len() < adj[far.0].len()) {
            far = (v, d);
        }
        for &w in &adj[v] {
            if !blocked[w] && dist[w] == usize::MAX {
                dist[w] = d + 1;
                queue.push_back(w);
            }
        }
    }
    far
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SingularPivot {
    pub column: usize,
    pub magnitude: f64,
}

/// LU factors of a banded matrix, stored row-wise. Row `i` holds columns
/// `i − kl ..= i + kl + ku`.
pub(crate) struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    upper: Vec<Complex64>,
    lower: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    /// Factors the `n × n` matrix given by `entries` (duplicates summed).
    /// `pivot_tol` is the absolute magnitude below which a pivot counts as zero.
    pub fn factor(
        n: usize,
        entries: impl IntoIterator<Item = (usize, usize, Complex64)>,
        pivot_tol: f64,
    ) -> Result<Self, SingularPivot> {
        let entries: Vec<_> = entries.into_iter().collect();
        let (mut kl, mut ku) = (0, 0);
        for &(r, c, _) in &entries {
            if r > c {
                kl = kl.max(r - c);
            } else {
                ku = ku.max(c - r);
            }
        }
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            upper: vec![ZERO; n * width],
            lower: vec![ZERO; n * kl],
            pivots: vec![0; n],
        };
        for (r, c, v) in entries {
            let k = lu.slot(r, c);
            lu.upper[k] += v;
        }
        lu.eliminate(pivot_tol)?;
        Ok(lu)
    }

    #[inline]
    fn slot(&self, row: usize, col: usize) -> usize {
        row * self.width + (col + self.kl - row)
    }

    fn eliminate(&mut self, pivot_tol: f64) -> Result<(), SingularPivot> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);

            let mut p = k;
            let mut best = self.upper[self.slot(k, k)].norm();
            for i in k + 1..=last_row {
                let mag = self.upper[self.slot(i, k)].norm();
                if mag > best {
                    best = mag;
                    p = i;
                }
            }
            if !(best > pivot_tol) {
                return Err(SingularPivot {
                    column: k,
                    magnitude: best,
                });
            }
            self.pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.slot(k, j), self.slot(p, j));
                    self.upper.swap(a, b);
                }
            }

            let pivot = self.upper[self.slot(k, k)];
            let inv = pivot.inv();
            let row_k = self.slot(k, k);
            for i in k + 1..=last_row {
                let s = self.slot(i, k);
                let factor = self.upper[s] * inv;
                self.upper[s] = ZERO;
                self.lower[k * kl + (i - k - 1)] = factor;
                if factor == ZERO {
                    continue;
                }
                let row_i = self.slot(i, k);
                let span = last_col - k;
                // columns k+1..=last_col of rows i and k are contiguous in storage
                debug_assert!(row_k + span < row_i);
                let (head, tail) = self.upper.split_at_mut(row_i);
                let (src, dst) = (&head[row_k + 1..=row_k + span], &mut tail[1..=span]);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= factor * s;
                }
            }
        }
        Ok(())
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        assert_eq!(b.len(), self.n);
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk == ZERO {
                continue;
            }
            let below = (k + kl).min(n - 1) - k;
            for (d, bi) in b[k + 1..=k + below].iter_mut().enumerate() {
                *bi -= self.lower[k * kl + d] * bk;
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + kl + ku).min(n - 1);
            let mut acc = b[k];
            for (j, bj) in b.iter().enumerate().take(last_col + 1).skip(k + 1) {
                acc -= self.upper[self.slot(k, j)] * bj;
            }
            b[k] = acc / self.upper[self.slot(k, k)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rcm_reduces_bandwidth_of_shuffled_path() {
        // path graph 0-5-2-7-1-4-6-3 scrambled by labels
        let path = [0usize, 5, 2, 7, 1, 4, 6, 3];
        let mut adj: [Vec<usize>; 8] = Default::default();
        for w in path.windows(2) {
            adj[w[0]].push(w[1]);
            adj[w[1]].push(w[0]);
        }
        let perm = reverse_cuthill_mckee(&adj);
        let mut pos = [0; 8];
        for (new, &old) in perm.iter().enumerate() {
            pos[old] = new;
        }
        let bw = path.windows(2).map(|w| pos[w[0]].abs_diff(pos[w[1]])).max().unwrap();
        assert_eq!(bw, 1);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let entries = vec![
            (0, 0, c(1.0, 0.0)),
            (0, 1, c(2.0, 0.0)),
            (1, 0, c(2.0, 0.0)),
            (1, 1, c(4.0, 0.0)),
        ];
        let err = BandedLu::factor(2, entries, 1e-12).err().unwrap();
        assert_eq!(err.column, 1);
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let entries = vec![
            (0, 1, c(1.0, 0.0)),
            (1, 0, c(1.0, 0.0)),
            (1, 1, c(1.0, 1.0)),
            (2, 2, c(3.0, 0.0)),
            (2, 1, c(1.0, 0.0)),
        ];
        let lu = BandedLu::factor(3, entries.clone(), 1e-14).unwrap();
        let mut b = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        lu.solve_in_place(&mut b);
        let mut dense = DMatrix::from_element(3, 3, c(0.0, 0.0));
        for (r, cc, v) in entries {
            dense[(r, cc)] += v;
        }
        let rhs = DVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let res = dense * DVector::from_vec(b) - rhs;
        assert!(res.camax() < 1e-14);
    }

    fn banded_system() -> impl Strategy<Value = (usize, Vec<(usize, usize, Complex64)>, Vec<Complex64>)> {
        (4usize..24, 0usize..4, 0usize..4).prop_flat_map(|(n, kl, ku)| {
            let cells: Vec<(usize, usize)> = (0..n)
                .flat_map(|r| (0..n).map(move |cc| (r, cc)))
                .filter(|&(r, cc)| cc + kl >= r && r + ku >= cc)
                .collect();
            let m = cells.len();
            (
                Just(n),
                Just(cells),
                proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), m),
                proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n),
            )
                .prop_map(|(n, cells, vals, rhs)| {
                    let entries = cells
                        .into_iter()
                        .zip(vals)
                        .map(|((r, cc), (a, b))| (r, cc, c(a, b)))
                        .collect();
                    (n, entries, rhs.into_iter().map(|(a, b)| c(a, b)).collect())
                })
        })
    }

    proptest! {
        #[test]
        fn banded_solve_matches_residual((n, entries, rhs) in banded_system()) {
            let mut dense = DMatrix::from_element(n, n, c(0.0, 0.0));
            for &(r, cc, v) in &entries {
                dense[(r, cc)] += v;
            }
            // skip numerically singular draws
            let svd = dense.clone().svd(false, false);
            let cond = svd.singular_values.max() / svd.singular_values.min();
            prop_assume!(cond.is_finite() && cond < 1e8);
            let lu = BandedLu::factor(n, entries, 1e-300).unwrap();
            let mut x = rhs.clone();
            lu.solve_in_place(&mut x);
            let res = &dense * DVector::from_vec(x) - DVector::from_vec(rhs);
            prop_assert!(res.camax() < 1e-12 * cond + 1e-12);
        }
    }
}
