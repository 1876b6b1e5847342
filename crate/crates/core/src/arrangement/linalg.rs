//! Exact linear algebra over the rationals on small dense matrices.

use num_traits::{One, Zero};

use crate::scalar::Rational;

pub type RatMatrix = Vec<Vec<Rational>>;

/// Reduced row echelon form with zero rows dropped, plus pivot columns.
pub fn rref(rows: &[Vec<Rational>], ncols: usize) -> (RatMatrix, Vec<usize>) {
    let mut m: RatMatrix = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let factor = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &factor * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<Rational>], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Basis of `{x : A x = 0}` as rows.
pub fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> RatMatrix {
    let (r, pivots) = rref(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &pc) in r.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Row space of `a` contains the row space of `b`.
pub fn row_space_contains(a: &[Vec<Rational>], b: &[Vec<Rational>], ncols: usize) -> bool {
    let base = rank(a, ncols);
    let mut stacked = a.to_vec();
    stacked.extend_from_slice(b);
    rank(&stacked, ncols) == base
}

pub fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> RatMatrix {
    let inner = b.len();
    let cols = b.first().map(Vec::len).unwrap_or(0);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner)
                        .filter(|&t| !row[t].is_zero())
                        .map(|t| &row[t] * &b[t][j])
                        .sum()
                })
                .collect()
        })
        .collect()
}
