//! Order complexes of finite posets and their reduced `F_p` homology.
//!
//! Simplices are chains `z_0 < .. < z_j` listed in the poset's index
//! order, which callers guarantee to be a linear extension. The face that
//! drops `z_i` enters the boundary with sign `(-1)^i`.

use std::collections::HashMap;

use super::fp::{BoundaryMatrix, ChainComplexFp};
use super::lattice::ArrangementLattice;
use crate::error::Result;

/// A finite poset on `0..n` given by upward adjacency: `up[z]` lists every
/// `w` with `z < w`. Index order must be a linear extension.
#[derive(Debug, Clone)]
pub struct FinitePoset {
    pub up: Vec<Vec<usize>>,
}

impl FinitePoset {
    pub fn from_relation(n: usize, less: impl Fn(usize, usize) -> bool) -> Self {
        let up = (0..n).map(|z| (z + 1..n).filter(|&w| less(z, w)).collect()).collect();
        Self { up }
    }

    pub fn len(&self) -> usize {
        self.up.len()
    }

    pub fn is_empty(&self) -> bool {
        self.up.is_empty()
    }

    /// All chains, grouped by dimension (`chains[j]` has length `j + 1`).
    pub fn chains(&self) -> Vec<Vec<Vec<u32>>> {
        let mut out: Vec<Vec<Vec<u32>>> = Vec::new();
        let mut layer: Vec<Vec<u32>> = (0..self.len() as u32).map(|z| vec![z]).collect();
        while !layer.is_empty() {
            let mut next = Vec::new();
            for c in &layer {
                let last = *c.last().expect("chains are nonempty") as usize;
                for &w in &self.up[last] {
                    let mut e = c.clone();
                    e.push(w as u32);
                    next.push(e);
                }
            }
            out.push(layer);
            layer = next;
        }
        out
    }

    /// Augmented simplicial chain complex of the order complex.
    pub fn chain_complex(&self, p: u32) -> Result<ChainComplexFp> {
        let chains = self.chains();
        let mut sizes = vec![1usize];
        sizes.extend(chains.iter().map(Vec::len));
        let mut boundaries = Vec::with_capacity(chains.len());
        let neg_one = p - 1;
        for (j, layer) in chains.iter().enumerate() {
            if j == 0 {
                boundaries.push(BoundaryMatrix {
                    rows: 1,
                    columns: vec![vec![(0, 1 % p)]; layer.len()],
                });
                continue;
            }
            let index: HashMap<&[u32], u32> = chains[j - 1]
                .iter()
                .enumerate()
                .map(|(i, c)| (c.as_slice(), i as u32))
                .collect();
            let mut columns = Vec::with_capacity(layer.len());
            let mut face = Vec::with_capacity(j);
            for c in layer {
                let mut col: Vec<(u32, u32)> = Vec::with_capacity(j + 1);
                for skip in 0..=j {
                    face.clear();
                    face.extend(c.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &z)| z));
                    let row = index[face.as_slice()];
                    let coef = if skip % 2 == 0 { 1 } else { neg_one };
                    if coef % p != 0 {
                        col.push((row, coef % p));
                    }
                }
                col.sort_unstable_by_key(|e| e.0);
                columns.push(col);
            }
            boundaries.push(BoundaryMatrix {
                rows: chains[j - 1].len(),
                columns,
            });
        }
        ChainComplexFp::new(p, sizes, boundaries)
    }

    /// Reduced Betti numbers of the order complex, from degree `-1`.
    pub fn reduced_betti(&self, p: u32) -> Result<Vec<usize>> {
        Ok(self.chain_complex(p)?.reduced_betti())
    }

    /// Face numbers `f_{-1}, f_0, ..` of the order complex.
    pub fn face_numbers(&self) -> Vec<usize> {
        let mut f = vec![1];
        f.extend(self.chains().iter().map(Vec::len));
        f
    }
}

/// The open interval `(bottom, x)` of a lattice as a poset.
pub fn open_interval(lattice: &ArrangementLattice, x: usize) -> FinitePoset {
    let members = lattice.open_interval_below(x);
    FinitePoset::from_relation(members.len(), |a, b| lattice.less(members[a], members[b]))
}

/// Reduced Betti numbers over `F_p` of the order complex of `(bottom, x)`,
/// indexed from degree `-1`. An empty interval gives `[1]`.
pub fn order_complex_homology(lattice: &ArrangementLattice, x: usize, p: u32) -> Result<Vec<usize>> {
    if x == lattice.bottom() {
        return Err(crate::error::Error::InvalidParameter(
            "the interval below the bottom element is undefined".into(),
        ));
    }
    open_interval(lattice, x).reduced_betti(p)
}
