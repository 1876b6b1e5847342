//! Independent homology route for coordinate-equality arrangements.
//!
//! Every subspace of such an arrangement is a flat of the product of braid
//! arrangements, one per component of `(R^m)^q`. After dividing out the
//! per-component diagonals, the braid fans cut the unit sphere into a
//! simplicial complex: the join of Coxeter complexes, whose simplices are
//! tuples of chains of proper nonempty subsets of `[q]`. The arrangement
//! is a subcomplex `K` (a simplex lies in a flat iff each of its subsets is
//! a union of the flat's blocks), and the complement deformation retracts
//! onto the order complex of the simplices outside `K`.

use super::order_complex::FinitePoset;
use crate::error::{Error, Result};
use crate::partition::SetPartition;

/// Largest sphere dimension (number of components times `q - 1`, minus
/// one) for which the model is built.
pub const MAX_SPHERE_DIM: usize = 3;

/// Subspaces of `(R^components)^q` each given by one partition of `[q]`
/// per component: coordinates in a common block are equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualityPattern {
    pub q: usize,
    pub components: usize,
    pub flats: Vec<Vec<SetPartition>>,
}

impl EqualityPattern {
    /// Coordinate index of component `c` of point `i`.
    pub fn coordinate(&self, c: usize, i: usize) -> usize {
        c * self.q + i
    }

    pub fn ambient(&self) -> usize {
        self.q * self.components
    }

    pub fn sphere_dim(&self) -> usize {
        (self.q - 1) * self.components - 1
    }
}

fn chains_of_subsets(q: usize) -> Vec<Vec<u32>> {
    let full = (1u32 << q) - 1;
    let proper: Vec<u32> = (1..full).collect();
    let mut out: Vec<Vec<u32>> = vec![Vec::new()];
    let mut stack: Vec<Vec<u32>> = proper.iter().map(|&s| vec![s]).collect();
    while let Some(c) = stack.pop() {
        let last = *c.last().expect("nonempty");
        for &s in &proper {
            if s != last && s & last == last {
                let mut e = c.clone();
                e.push(s);
                stack.push(e);
            }
        }
        out.push(c);
    }
    out
}

fn is_union_of_blocks(set: u32, labels: &[usize], q: usize) -> bool {
    (0..q).all(|i| {
        (0..q).all(|j| labels[i] != labels[j] || ((set >> i) & 1) == ((set >> j) & 1))
    })
}

/// Reduced Betti numbers over `F_p` of the complement, in degrees
/// `0..ambient`, from the explicit cell model.
pub fn complement_betti_cell_model(pattern: &EqualityPattern, p: u32) -> Result<Vec<usize>> {
    let q = pattern.q;
    if q < 2 || pattern.components == 0 {
        return Err(Error::InvalidParameter("cell model needs q >= 2".into()));
    }
    if pattern.sphere_dim() > MAX_SPHERE_DIM {
        return Err(Error::InvalidParameter(format!(
            "cell model limited to spheres of dimension <= {MAX_SPHERE_DIM}"
        )));
    }
    let chains = chains_of_subsets(q);
    let labels: Vec<Vec<Vec<usize>>> = pattern
        .flats
        .iter()
        .map(|f| f.iter().map(SetPartition::labels).collect())
        .collect();

    // simplices: one chain index per component, not all empty
    let mut simplices: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..pattern.components {
        simplices = simplices
            .into_iter()
            .flat_map(|prefix| {
                (0..chains.len()).map(move |c| {
                    let mut s = prefix.clone();
                    s.push(c);
                    s
                })
            })
            .collect();
    }
    simplices.retain(|s| s.iter().any(|&c| !chains[c].is_empty()));

    let in_arrangement = |s: &[usize]| {
        labels.iter().any(|flat| {
            s.iter()
                .zip(flat)
                .all(|(&c, lab)| chains[c].iter().all(|&set| is_union_of_blocks(set, lab, q)))
        })
    };
    let mut outside: Vec<Vec<usize>> = simplices.into_iter().filter(|s| !in_arrangement(s)).collect();
    let dim = |s: &[usize]| s.iter().map(|&c| chains[c].len()).sum::<usize>();
    outside.sort_by_key(|s| dim(s));

    let is_face = |a: &[usize], b: &[usize]| {
        a.iter()
            .zip(b)
            .all(|(&ca, &cb)| chains[ca].iter().all(|x| chains[cb].contains(x)))
    };
    let poset = FinitePoset::from_relation(outside.len(), |a, b| {
        dim(&outside[a]) < dim(&outside[b]) && is_face(&outside[a], &outside[b])
    });
    let betti = poset.reduced_betti(p)?;
    // betti[0] is degree -1, which vanishes for a nonempty complement
    let mut out = vec![0usize; pattern.ambient()];
    for (deg, &b) in betti.iter().enumerate().skip(1) {
        if deg - 1 < out.len() {
            out[deg - 1] = b;
        } else if b != 0 {
            return Err(Error::CrossCheck(format!("homology in degree {} beyond the ambient", deg - 1)));
        }
    }
    Ok(out)
}
