//! Linear algebra over `F_p` and reduced homology of chain complexes.

use crate::error::{Error, Result};

pub fn inv_mod(a: u32, p: u32) -> u32 {
    // Fermat; p is prime and a != 0 mod p.
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

/// Rank of a dense matrix over `F_p` by Gaussian elimination.
pub fn fp_rank(matrix: &[Vec<u32>], p: u32) -> usize {
    let mut m: Vec<Vec<u32>> = matrix.iter().map(|r| r.iter().map(|&x| x % p).collect()).collect();
    let rows = m.len();
    let cols = m.first().map(Vec::len).unwrap_or(0);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = inv_mod(m[rank][c], p) as u64;
        for x in m[rank].iter_mut() {
            *x = (*x as u64 * inv % p as u64) as u32;
        }
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[c] != 0 {
                let f = row[c] as u64;
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = ((*x as u64 + (p as u64 - f) * y as u64) % p as u64) as u32;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Sparse column: `(row, coefficient)` sorted by row, coefficients nonzero mod p.
pub type SparseColumn = Vec<(u32, u32)>;

/// A boundary matrix stored by columns.
#[derive(Debug, Clone, Default)]
pub struct BoundaryMatrix {
    pub rows: usize,
    pub columns: Vec<SparseColumn>,
}

impl BoundaryMatrix {
    pub fn to_dense(&self) -> Vec<Vec<u32>> {
        let mut dense = vec![vec![0u32; self.columns.len()]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                dense[i as usize][j] = v;
            }
        }
        dense
    }
}

fn axpy(target: &SparseColumn, source: &SparseColumn, factor: u32, p: u32) -> SparseColumn {
    let mut out = Vec::with_capacity(target.len() + source.len());
    let (mut a, mut b) = (0, 0);
    let p64 = p as u64;
    while a < target.len() || b < source.len() {
        let take_a = b == source.len() || (a < target.len() && target[a].0 < source[b].0);
        let take_b = a == target.len() || (b < source.len() && source[b].0 < target[a].0);
        if take_a {
            out.push(target[a]);
            a += 1;
        } else if take_b {
            let v = (factor as u64 * source[b].1 as u64 % p64) as u32;
            out.push((source[b].0, v));
            b += 1;
        } else {
            let v = ((target[a].1 as u64 + factor as u64 * source[b].1 as u64) % p64) as u32;
            if v != 0 {
                out.push((target[a].0, v));
            }
            a += 1;
            b += 1;
        }
    }
    out
}

/// Column reduction. `skip[j]` marks columns known to reduce to zero.
/// Returns the rank and the pivot rows of the surviving columns.
pub fn reduce_columns(matrix: &BoundaryMatrix, p: u32, skip: &[bool]) -> (usize, Vec<u32>) {
    let mut pivot_of_row: Vec<Option<usize>> = vec![None; matrix.rows];
    let mut reduced: Vec<SparseColumn> = Vec::with_capacity(matrix.columns.len());
    let mut lows = Vec::new();
    for (j, col) in matrix.columns.iter().enumerate() {
        if skip.get(j).copied().unwrap_or(false) {
            reduced.push(Vec::new());
            continue;
        }
        let mut cur = col.clone();
        while let Some(&(low, coef)) = cur.last() {
            match pivot_of_row[low as usize] {
                Some(other) => {
                    let pivot_coef = reduced[other].last().expect("pivot column is nonempty").1;
                    // cur - (coef / pivot_coef) * other
                    let factor = (p as u64 - coef as u64 * inv_mod(pivot_coef, p) as u64 % p as u64) % p as u64;
                    cur = axpy(&cur, &reduced[other], factor as u32, p);
                }
                None => {
                    pivot_of_row[low as usize] = Some(j);
                    lows.push(low);
                    break;
                }
            }
        }
        reduced.push(cur);
    }
    (lows.len(), lows)
}

/// A reduced chain complex over `F_p`. Degree `-1` carries the augmentation.
#[derive(Debug, Clone)]
pub struct ChainComplexFp {
    pub p: u32,
    /// `sizes[j + 1]` is the dimension of `C_j`, starting at `j = -1`.
    pub sizes: Vec<usize>,
    /// `boundaries[j]` maps `C_j -> C_{j-1}` for `j >= 0`.
    pub boundaries: Vec<BoundaryMatrix>,
}

impl ChainComplexFp {
    pub fn new(p: u32, sizes: Vec<usize>, boundaries: Vec<BoundaryMatrix>) -> Result<Self> {
        if boundaries.len() + 1 != sizes.len() {
            return Err(Error::Shape("one boundary map per nonnegative degree".into()));
        }
        for (j, b) in boundaries.iter().enumerate() {
            if b.rows != sizes[j] || b.columns.len() != sizes[j + 1] {
                return Err(Error::Shape(format!("boundary in degree {j} has the wrong shape")));
            }
        }
        Ok(Self { p, sizes, boundaries })
    }

    pub fn top_degree(&self) -> i64 {
        self.sizes.len() as i64 - 2
    }

    /// Checks `d_j o d_{j+1} = 0` for every `j`.
    pub fn boundary_squares_to_zero(&self) -> bool {
        let p = self.p as u64;
        for j in 1..self.boundaries.len() {
            let lower = &self.boundaries[j - 1];
            let upper = &self.boundaries[j];
            for col in &upper.columns {
                let mut acc = vec![0u64; lower.rows];
                for &(mid, v) in col {
                    for &(row, w) in &lower.columns[mid as usize] {
                        acc[row as usize] = (acc[row as usize] + v as u64 * w as u64) % p;
                    }
                }
                if acc.iter().any(|&x| x != 0) {
                    return false;
                }
            }
        }
        true
    }

    /// Reduced Betti numbers `b_j` for `j = -1 ..= top`, indexed from 0.
    pub fn reduced_betti(&self) -> Vec<usize> {
        let n = self.boundaries.len();
        let mut ranks = vec![0usize; n + 1];
        let mut cleared: Vec<bool> = Vec::new();
        for j in (0..n).rev() {
            let skip = std::mem::take(&mut cleared);
            let (rank, lows) = reduce_columns(&self.boundaries[j], self.p, &skip);
            ranks[j] = rank;
            cleared = vec![false; self.boundaries[j].rows];
            for low in lows {
                cleared[low as usize] = true;
            }
        }
        // ranks[j] = rank of d_j : C_j -> C_{j-1}; betti of C_{j} uses d_j and d_{j+1}
        (0..self.sizes.len())
            .map(|idx| {
                let outgoing = if idx == 0 { 0 } else { ranks[idx - 1] };
                let incoming = ranks.get(idx).copied().unwrap_or(0);
                self.sizes[idx] - outgoing - incoming
            })
            .collect()
    }
}
