//! Intersection lattice of a rational subspace arrangement.

use std::collections::HashMap;

use super::linalg::{nullspace, rank, row_space_contains, rref, RatMatrix};
use super::SubspaceArrangement;
use crate::error::{Error, Result};

/// Lattices are limited to this many generating subspaces, so that the set
/// of generators containing an element fits a `u64`.
pub const MAX_GENERATORS: usize = 64;

#[derive(Debug, Clone)]
pub struct LatticeElement {
    /// Rows spanning the subspace.
    pub basis: RatMatrix,
    /// Reduced row echelon form of the defining equations; the canonical key.
    pub equations: RatMatrix,
    pub codim: usize,
    /// Bit `i` is set iff the element lies inside generator `i`.
    pub generators: u64,
    /// Elements covering this one (next smaller subspaces).
    pub covers: Vec<usize>,
}

/// Intersections ordered by reverse inclusion. Element 0 is the ambient
/// space, and indices are sorted by codimension, so index order is a
/// linear extension of the partial order.
#[derive(Debug, Clone)]
pub struct ArrangementLattice {
    pub ambient: usize,
    pub elements: Vec<LatticeElement>,
}

impl ArrangementLattice {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn bottom(&self) -> usize {
        0
    }

    /// `x < y`: `y` is a proper subspace of `x`.
    #[inline]
    pub fn less(&self, x: usize, y: usize) -> bool {
        let (gx, gy) = (self.elements[x].generators, self.elements[y].generators);
        gx & gy == gx && gx != gy
    }

    /// Elements strictly between the bottom and `x`, in index order.
    pub fn open_interval_below(&self, x: usize) -> Vec<usize> {
        (1..x).filter(|&z| self.less(z, x)).collect()
    }

    /// Möbius function `mu(bottom, x)` for every element.
    pub fn mobius_from_bottom(&self) -> Vec<i64> {
        let mut mu = vec![0i64; self.len()];
        mu[0] = 1;
        for x in 1..self.len() {
            let s: i64 = (0..x).filter(|&z| z == 0 || self.less(z, x)).map(|z| mu[z]).sum();
            mu[x] = -s;
        }
        mu
    }
}

fn equations_of(basis: &RatMatrix, ambient: usize) -> RatMatrix {
    let eq = nullspace(basis, ambient);
    rref(&eq, ambient).0
}

/// Closure of the arrangement under intersection, with exact rational
/// arithmetic throughout.
pub fn intersection_lattice(arrangement: &SubspaceArrangement) -> Result<ArrangementLattice> {
    let d = arrangement.ambient();
    let gens = arrangement.subspaces();
    if gens.len() > MAX_GENERATORS {
        return Err(Error::InvalidParameter(format!(
            "{} subspaces exceed the lattice limit of {MAX_GENERATORS}",
            gens.len()
        )));
    }
    let gen_equations: Vec<RatMatrix> = gens.iter().map(|b| equations_of(b, d)).collect();

    let containment_mask = |equations: &RatMatrix| -> u64 {
        gen_equations
            .iter()
            .enumerate()
            .filter(|(_, ge)| row_space_contains(equations, ge, d))
            .fold(0u64, |m, (i, _)| m | (1 << i))
    };

    let mut keys: HashMap<RatMatrix, usize> = HashMap::new();
    let mut raw: Vec<(RatMatrix, u64)> = Vec::new();
    let ambient_eq: RatMatrix = Vec::new();
    keys.insert(ambient_eq.clone(), 0);
    raw.push((ambient_eq, 0));

    let mut frontier: Vec<usize> = Vec::new();
    for ge in &gen_equations {
        if !keys.contains_key(ge) {
            let mask = containment_mask(ge);
            keys.insert(ge.clone(), raw.len());
            frontier.push(raw.len());
            raw.push((ge.clone(), mask));
        }
    }
    while let Some(idx) = frontier.pop() {
        let (eq, mask) = raw[idx].clone();
        for (i, ge) in gen_equations.iter().enumerate() {
            if mask & (1 << i) != 0 {
                continue;
            }
            let mut stacked = eq.clone();
            stacked.extend(ge.iter().cloned());
            let key = rref(&stacked, d).0;
            if !keys.contains_key(&key) {
                let m = containment_mask(&key);
                keys.insert(key.clone(), raw.len());
                frontier.push(raw.len());
                raw.push((key, m));
            }
        }
    }

    raw.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.1.cmp(&b.1)));
    let mut elements: Vec<LatticeElement> = raw
        .into_iter()
        .map(|(equations, generators)| LatticeElement {
            basis: nullspace(&equations, d),
            codim: equations.len(),
            equations,
            generators,
            covers: Vec::new(),
        })
        .collect();

    let n = elements.len();
    let masks: Vec<u64> = elements.iter().map(|e| e.generators).collect();
    let less = |x: usize, y: usize| masks[x] & masks[y] == masks[x] && masks[x] != masks[y];
    for x in 0..n {
        let above: Vec<usize> = (x + 1..n).filter(|&y| less(x, y)).collect();
        elements[x].covers = above
            .iter()
            .copied()
            .filter(|&y| !above.iter().any(|&z| z != y && less(z, y)))
            .collect();
    }
    debug_assert_eq!(elements[0].codim, 0);
    Ok(ArrangementLattice { ambient: d, elements })
}

/// Exact subspace containment `inner ⊆ outer` of two lattice elements,
/// computed from their bases rather than generator masks.
pub fn contains_exact(lattice: &ArrangementLattice, outer: usize, inner: usize) -> bool {
    let o = &lattice.elements[outer];
    let i = &lattice.elements[inner];
    rank(&o.basis, lattice.ambient) == o.basis.len()
        && row_space_contains(&o.basis, &i.basis, lattice.ambient)
}
