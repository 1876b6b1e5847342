//! Finite groups as explicit multiplication tables, their left action on
//! tuple spaces `Map(G, Y)`, subsets of `G`, and the augmentation-zero
//! subspace `I[G]` of the group ring.

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Largest group order stored as a table.
pub const MAX_ORDER: usize = 4096;

/// Associativity is checked exhaustively up to this order.
pub const EXHAUSTIVE_AXIOM_ORDER: usize = 64;

/// A finite group on the dense indices `0..q`, identity at index 0.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupTable {
    order: usize,
    mult: Vec<u32>,
    inverses: Vec<usize>,
    label: String,
}

impl fmt::Debug for GroupTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupTable")
            .field("label", &self.label)
            .field("order", &self.order)
            .finish()
    }
}

/// Group descriptor as it appears in scenario files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupDescriptor {
    Cyclic { q: usize },
    PTorus { p: u64, n: u32 },
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl GroupTable {
    /// `Z/q` with `i * j = (i + j) mod q`.
    pub fn cyclic(q: usize) -> Result<Self> {
        if q == 0 || q > MAX_ORDER {
            return Err(Error::InvalidParameter(format!(
                "cyclic group order must lie in 1..={MAX_ORDER}, got {q}"
            )));
        }
        let mut mult = Vec::with_capacity(q * q);
        for i in 0..q {
            for j in 0..q {
                mult.push(((i + j) % q) as u32);
            }
        }
        let inverses = (0..q).map(|i| (q - i) % q).collect();
        Ok(Self {
            order: q,
            mult,
            inverses,
            label: format!("Z/{q}"),
        })
    }

    /// The elementary abelian group `(Z/p)^n`. Element `i` has base-`p`
    /// digits as its coordinates, so `p_torus(p, 1)` is `cyclic(p)`.
    pub fn p_torus(p: u64, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("torus rank must be positive".into()));
        }
        let q = (p as u128)
            .checked_pow(n)
            .filter(|&q| q <= MAX_ORDER as u128)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("p^n = {p}^{n} exceeds {MAX_ORDER}"))
            })? as usize;
        let p = p as usize;
        let digits = |mut x: usize| {
            let mut d = vec![0usize; n as usize];
            for slot in d.iter_mut() {
                *slot = x % p;
                x /= p;
            }
            d
        };
        let encode = |d: &[usize]| d.iter().rev().fold(0usize, |acc, &x| acc * p + x);
        let mut mult = Vec::with_capacity(q * q);
        for i in 0..q {
            let di = digits(i);
            for j in 0..q {
                let dj = digits(j);
                let sum: Vec<usize> = di.iter().zip(&dj).map(|(a, b)| (a + b) % p).collect();
                mult.push(encode(&sum) as u32);
            }
        }
        let inverses = (0..q)
            .map(|i| {
                let neg: Vec<usize> = digits(i).iter().map(|&a| (p - a) % p).collect();
                encode(&neg)
            })
            .collect();
        let label = if n == 1 {
            format!("Z/{p}")
        } else {
            format!("(Z/{p})^{n}")
        };
        Ok(Self {
            order: q,
            mult,
            inverses,
            label,
        })
    }

    /// Build from an explicit table and validate the group law.
    pub fn from_table(table: Vec<Vec<usize>>, label: impl Into<String>) -> Result<Self> {
        let group = Self::from_table_unchecked(table, label)?;
        group.verify_axioms()?;
        Ok(group)
    }

    /// Shape-checked but not axiom-checked. Used to exercise the axiom
    /// checker on deliberately broken tables.
    pub fn from_table_unchecked(table: Vec<Vec<usize>>, label: impl Into<String>) -> Result<Self> {
        let q = table.len();
        if q == 0 || q > MAX_ORDER {
            return Err(Error::InvalidParameter(format!("table order {q} out of range")));
        }
        let mut mult = Vec::with_capacity(q * q);
        for row in &table {
            if row.len() != q {
                return Err(Error::Shape(format!("table row of length {} in a {q}x{q} table", row.len())));
            }
            for &x in row {
                if x >= q {
                    return Err(Error::IndexOutOfRange { index: x, order: q });
                }
                mult.push(x as u32);
            }
        }
        let inverses = (0..q)
            .map(|a| (0..q).find(|&b| table[a][b] == 0).unwrap_or(0))
            .collect();
        Ok(Self {
            order: q,
            mult,
            inverses,
            label: label.into(),
        })
    }

    pub fn from_descriptor(desc: &GroupDescriptor) -> Result<Self> {
        match *desc {
            GroupDescriptor::Cyclic { q } => Self::cyclic(q),
            GroupDescriptor::PTorus { p, n } => Self::p_torus(p, n),
        }
    }

    /// Identity, inverses, closure and (for q <= 64) associativity.
    pub fn verify_axioms(&self) -> Result<()> {
        let q = self.order;
        for a in 0..q {
            if self.mul(0, a) != a || self.mul(a, 0) != a {
                return Err(Error::GroupAxiom(format!("index 0 is not a two-sided identity at {a}")));
            }
            let b = self.inverses[a];
            if self.mul(a, b) != 0 || self.mul(b, a) != 0 {
                return Err(Error::GroupAxiom(format!("element {a} has no two-sided inverse")));
            }
            let mut seen = vec![false; q];
            for c in 0..q {
                let x = self.mul(a, c);
                if seen[x] {
                    return Err(Error::GroupAxiom(format!("row {a} is not a permutation")));
                }
                seen[x] = true;
            }
        }
        if q <= EXHAUSTIVE_AXIOM_ORDER {
            for a in 0..q {
                for b in 0..q {
                    let ab = self.mul(a, b);
                    for c in 0..q {
                        if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                            return Err(Error::GroupAxiom(format!(
                                "associativity fails at ({a}, {b}, {c})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn inverses(&self) -> &[usize] {
        &self.inverses
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        self.mult
            .chunks(self.order)
            .map(|row| row.iter().map(|&x| x as usize).collect())
            .collect()
    }

    pub fn check_index(&self, g: usize) -> Result<()> {
        if g < self.order {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: g,
                order: self.order,
            })
        }
    }

    /// Order of the element `g`.
    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut n = 1;
        while x != 0 {
            x = self.mul(x, g);
            n += 1;
        }
        n
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Permutation of indices induced by left multiplication: `h -> g h`.
    pub fn left_translation(&self, g: usize) -> Vec<usize> {
        (0..self.order).map(|h| self.mul(g, h)).collect()
    }

    #[doc(hidden)]
    pub fn corrupt_entry(&mut self, a: usize, b: usize, value: usize) {
        self.mult[a * self.order + b] = value as u32;
    }
}

/// A point of `Y^q = Map(G, Y)` with `Y = R^dim`, indexed by group elements.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTuple<S> {
    group: Arc<GroupTable>,
    dim: usize,
    values: Vec<Vec<S>>,
}

impl<S: Scalar> OrbitTuple<S> {
    pub fn new(group: Arc<GroupTable>, values: Vec<Vec<S>>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::Shape(format!(
                "{} entries for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        let dim = values.first().map(Vec::len).unwrap_or(0);
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return Err(Error::Shape("entries must share a positive dimension".into()));
        }
        Ok(Self { group, dim, values })
    }

    /// Scalar tuple (`Y = R`).
    pub fn scalar(group: Arc<GroupTable>, values: Vec<S>) -> Result<Self> {
        Self::new(group, values.into_iter().map(|v| vec![v]).collect())
    }

    pub fn group(&self) -> &Arc<GroupTable> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Vec<S>] {
        &self.values
    }

    pub fn get(&self, g: usize) -> &[S] {
        &self.values[g]
    }

    /// First coordinates, for tuples of dimension 1.
    pub fn scalars(&self) -> Vec<S> {
        self.values.iter().map(|v| v[0].clone()).collect()
    }

    pub fn into_values(self) -> Vec<Vec<S>> {
        self.values
    }

    /// `(g phi)(h) = phi(g^-1 h)`.
    pub fn act(&self, g: usize) -> Result<Self> {
        self.group.check_index(g)?;
        let g_inv = self.group.inv(g);
        let values = (0..self.group.order())
            .map(|h| self.values[self.group.mul(g_inv, h)].clone())
            .collect();
        Ok(Self {
            group: Arc::clone(&self.group),
            dim: self.dim,
            values,
        })
    }
}

pub fn act_on_tuple<S: Scalar>(g: usize, phi: &OrbitTuple<S>) -> Result<OrbitTuple<S>> {
    phi.act(g)
}

/// A subset of group elements, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GroupSubset {
    order: usize,
    members: Vec<usize>,
}

impl GroupSubset {
    pub fn new(order: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&x| x >= order) {
            return Err(Error::IndexOutOfRange { index: bad, order });
        }
        Ok(Self { order, members })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.binary_search(&g).is_ok()
    }

    pub fn complement(&self) -> GroupSubset {
        GroupSubset {
            order: self.order,
            members: (0..self.order).filter(|&g| !self.contains(g)).collect(),
        }
    }

    pub fn mask(&self) -> u64 {
        debug_assert!(self.order <= 64);
        self.members.iter().fold(0u64, |m, &g| m | (1 << g))
    }

    /// `gM = {g x : x in M}`.
    pub fn act(&self, group: &GroupTable, g: usize) -> Result<GroupSubset> {
        group.check_index(g)?;
        if self.is_empty() {
            return Err(Error::InvalidParameter("cannot act on an empty subset label".into()));
        }
        GroupSubset::new(self.order, self.members.iter().map(|&x| group.mul(g, x)))
    }
}

pub fn act_on_subset(group: &GroupTable, g: usize, subset: &GroupSubset) -> Result<GroupSubset> {
    subset.act(group, g)
}

/// All `m`-element subsets `M` with `gM = M` for every `g`, by exhaustive
/// enumeration.
pub fn fixed_subsets(group: &GroupTable, m: usize) -> Vec<GroupSubset> {
    let q = group.order();
    assert!(q <= 20, "exhaustive subset enumeration is limited to q <= 20");
    let translations: Vec<Vec<usize>> = (0..q).map(|g| group.left_translation(g)).collect();
    let mut fixed = Vec::new();
    for mask in 0u32..(1u32 << q) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let is_fixed = translations.iter().all(|perm| {
            (0..q)
                .filter(|&x| mask & (1 << x) != 0)
                .all(|x| mask & (1 << perm[x]) != 0)
        });
        if is_fixed {
            let members = (0..q).filter(|&x| mask & (1 << x) != 0);
            fixed.push(GroupSubset::new(q, members).expect("indices in range"));
        }
    }
    fixed
}

/// A vector of the augmentation-zero subspace `I[G]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IGVector {
    coefficients: Vec<Rational>,
}

impl IGVector {
    pub fn new(coefficients: Vec<Rational>) -> Result<Self> {
        let sum: Rational = coefficients.iter().cloned().sum();
        if !sum.is_zero() {
            return Err(Error::InvalidParameter(format!(
                "coefficients sum to {sum}, not zero"
            )));
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<Rational> {
        self.coefficients
    }
}

/// Orthogonal projection onto `I[G]`: subtract the mean coefficient.
pub fn project_to_ig(v: &[Rational]) -> IGVector {
    if v.is_empty() {
        return IGVector {
            coefficients: Vec::new(),
        };
    }
    let mean: Rational = v.iter().cloned().sum::<Rational>() / Rational::from_i64(v.len() as i64);
    IGVector {
        coefficients: v.iter().map(|x| x - &mean).collect(),
    }
}

/// Coordinate permutation of `R^q = R[G]` by `g`: `(g v)(h) = v(g^-1 h)`.
pub fn permute_coordinates<T: Clone>(group: &GroupTable, g: usize, v: &[T]) -> Vec<T> {
    let g_inv = group.inv(g);
    (0..group.order()).map(|h| v[group.mul(g_inv, h)].clone()).collect()
}
