//! Diagonals of `Y^q`, the configuration-like spaces cut out by them, and
//! the classification maps used to cover them by equivariant pieces.
//!
//! Exact (rational) tuples are compared by equality. Float tuples use the
//! coincidence tolerance `eps`: two coordinate vectors coincide when their
//! max-norm distance is at most `eps`, coincidence classes are the
//! transitive closure of that relation, and any pair of classes closer than
//! the ambiguity ceiling is reported as [`Error::AmbiguousPattern`].

use std::cmp::Ordering;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{GroupSubset, GroupTable, OrbitTuple};
use crate::partition::{partitions_with_blocks, SetPartition};
use crate::scalar::{max_distance, Scalar, ScalarKind};

pub type CoincidencePattern = SetPartition;

/// Default float coincidence tolerance.
pub const DEFAULT_COINCIDENCE_EPS: f64 = 1e-9;

/// Inter-class distances in `(eps, AMBIGUITY_FACTOR * eps)` are ambiguous.
pub const AMBIGUITY_FACTOR: f64 = 10.0;

/// Distances below this many ulps of the tuple's scale are rounding noise;
/// leaving such a pair in separate classes is also ambiguous.
const ROUNDING_ULPS: f64 = 64.0;

/// Upper end of the ambiguity band for a float tuple with the given scale.
pub fn ambiguity_ceiling(eps: f64, scale: f64) -> f64 {
    (AMBIGUITY_FACTOR * eps).max(ROUNDING_ULPS * f64::EPSILON * scale.max(1.0))
}

/// Result of classifying a point of `W(q,k)` by its strict top block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopBlockResult {
    /// Multiplicity of the maximum.
    pub m: usize,
    /// Indices attaining the maximum.
    pub block: GroupSubset,
}

fn check_k(k: usize, q: usize) -> Result<()> {
    if (2..=q).contains(&k) {
        Ok(())
    } else {
        Err(Error::KOutOfRange { k, lo: 2, hi: q })
    }
}

fn tuple_scale<S: Scalar>(phi: &OrbitTuple<S>) -> f64 {
    phi.values()
        .iter()
        .flatten()
        .map(|x| x.to_f64().abs())
        .fold(0.0, f64::max)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// The partition of `0..q` into coincidence classes of the coordinates.
pub fn coincidence_pattern<S: Scalar>(phi: &OrbitTuple<S>, eps: f64) -> Result<CoincidencePattern> {
    let q = phi.len();
    let mut uf = UnionFind::new(q);
    match S::KIND {
        ScalarKind::Rational => {
            for i in 0..q {
                for j in 0..i {
                    if phi.get(i) == phi.get(j) {
                        uf.union(i, j);
                    }
                }
            }
        }
        ScalarKind::Float => {
            let mut dist = vec![0.0; q * q];
            for i in 0..q {
                for j in 0..i {
                    let d = max_distance(phi.get(i), phi.get(j));
                    dist[i * q + j] = d;
                    if d <= eps {
                        uf.union(i, j);
                    }
                }
            }
            let hi = ambiguity_ceiling(eps, tuple_scale(phi));
            for i in 0..q {
                for j in 0..i {
                    let d = dist[i * q + j];
                    if d > eps && d < hi && uf.find(i) != uf.find(j) {
                        return Err(Error::AmbiguousPattern {
                            i: j,
                            j: i,
                            distance: d,
                            lo: eps,
                            hi,
                        });
                    }
                }
            }
        }
    }
    let labels: Vec<usize> = (0..q).map(|i| uf.find(i)).collect();
    Ok(SetPartition::from_labels(&labels))
}

/// Number of distinct coordinate values.
pub fn distinct_count<S: Scalar>(phi: &OrbitTuple<S>, eps: f64) -> Result<usize> {
    Ok(coincidence_pattern(phi, eps)?.num_blocks())
}

/// Membership in `U(Y, p, l)`: at least `l` distinct coordinate values.
pub fn has_at_least_distinct<S: Scalar>(phi: &OrbitTuple<S>, l: usize, eps: f64) -> Result<bool> {
    Ok(distinct_count(phi, eps)? >= l)
}

/// Membership in the k-wise diagonal: some `k` coordinates coincide.
pub fn in_kwise_diagonal<S: Scalar>(phi: &OrbitTuple<S>, k: usize, eps: f64) -> Result<bool> {
    check_k(k, phi.len())?;
    Ok(coincidence_pattern(phi, eps)?.largest_block() >= k)
}

/// Membership in the k-wise maximum diagonal of `R^q`: the maximum is
/// attained at least `k` times.
pub fn in_max_diagonal<S: Scalar>(phi: &OrbitTuple<S>, k: usize, eps: f64) -> Result<bool> {
    if phi.dim() != 1 {
        return Err(Error::NotScalar(phi.dim()));
    }
    check_k(k, phi.len())?;
    let values = phi.scalars();
    let max = values
        .iter()
        .max_by(|a, b| a.total_cmp(b))
        .expect("nonempty tuple")
        .clone();
    let count = match S::KIND {
        ScalarKind::Rational => values.iter().filter(|v| **v == max).count(),
        ScalarKind::Float => {
            let m = max.to_f64();
            let hi = ambiguity_ceiling(eps, tuple_scale(phi));
            let mut count = 0;
            for (i, v) in values.iter().enumerate() {
                let d = m - v.to_f64();
                if d <= eps {
                    count += 1;
                } else if d < hi {
                    let argmax = values.iter().position(|w| *w == max).unwrap_or(0);
                    return Err(Error::AmbiguousPattern {
                        i: argmax,
                        j: i,
                        distance: d,
                        lo: eps,
                        hi,
                    });
                }
            }
            count
        }
    };
    Ok(count >= k)
}

/// `phi` lies in `U_M`: every value indexed by `M` strictly exceeds every
/// value outside `M`.
pub fn in_top_set<S: Scalar>(phi: &OrbitTuple<S>, block: &GroupSubset) -> bool {
    let values = phi.values();
    let complement = block.complement();
    block.members().iter().all(|&g| {
        complement
            .members()
            .iter()
            .all(|&h| values[g][0].total_cmp(&values[h][0]) == Ordering::Greater)
    })
}

/// Classify a point of `W(q,k)` into the piece `V_m` indexed by its strict
/// top block. Returns the smallest admissible `m`, the multiplicity of the
/// maximum.
pub fn top_block_classify<S: Scalar>(phi: &OrbitTuple<S>, k: usize) -> Result<TopBlockResult> {
    if phi.dim() != 1 {
        return Err(Error::NotScalar(phi.dim()));
    }
    let q = phi.len();
    check_k(k, q)?;
    let values = phi.values();
    let mut max = &values[0][0];
    for v in values.iter().skip(1) {
        if v[0].total_cmp(max) == Ordering::Greater {
            max = &v[0];
        }
    }
    let block: Vec<usize> = (0..q)
        .filter(|&g| values[g][0].total_cmp(max) == Ordering::Equal)
        .collect();
    if block.len() >= k {
        return Err(Error::NotInW {
            multiplicity: block.len(),
            k,
        });
    }
    Ok(TopBlockResult {
        m: block.len(),
        block: GroupSubset::new(q, block)?,
    })
}

/// For `k > q/2`, the unique k-element coincidence block of a point of
/// `Delta^k \ Delta^{k+1}`.
pub fn majority_block<S: Scalar>(phi: &OrbitTuple<S>, k: usize, eps: f64) -> Result<GroupSubset> {
    let q = phi.len();
    check_k(k, q)?;
    if 2 * k <= q {
        return Err(Error::KTooSmall { k, q });
    }
    let pattern = coincidence_pattern(phi, eps)?;
    let largest = pattern.largest_block();
    if largest != k {
        return Err(Error::NotInStratum { largest, k });
    }
    let block = pattern
        .blocks()
        .iter()
        .find(|b| b.len() == k)
        .expect("block of the largest size exists");
    GroupSubset::new(q, block.iter().copied())
}

/// Image of a pattern under the left translation by `g`.
pub fn act_on_pattern(group: &GroupTable, g: usize, pattern: &CoincidencePattern) -> CoincidencePattern {
    pattern.permuted(&group.left_translation(g))
}

/// Partitions of `0..q` into exactly `k` blocks that are fixed by every
/// group element.
pub fn pattern_action_fixed_points(group: &GroupTable, k: usize) -> Result<Vec<CoincidencePattern>> {
    let q = group.order();
    if !(1..=q).contains(&k) {
        return Err(Error::KOutOfRange { k, lo: 1, hi: q });
    }
    if q > 12 {
        return Err(Error::InvalidParameter(format!(
            "pattern enumeration is limited to q <= 12, got {q}"
        )));
    }
    let translations: Vec<Vec<usize>> = (0..q).map(|g| group.left_translation(g)).collect();
    Ok(partitions_with_blocks(q, k)
        .into_iter()
        .filter(|p| translations.iter().all(|t| p.permuted(t) == *p))
        .collect())
}

/// A linear action of a finite group on points of some `R^d`.
pub trait PointAction<S: Scalar> {
    fn group(&self) -> &Arc<GroupTable>;
    fn point_dim(&self) -> usize;
    fn apply(&self, g: usize, x: &[S]) -> Result<Vec<S>>;
}

/// The orbit map `f^(x)(g) = f(g^-1 x)`.
pub fn hat_map<S, A, F>(f: F, action: &A, x: &[S]) -> Result<OrbitTuple<S>>
where
    S: Scalar,
    A: PointAction<S> + ?Sized,
    F: Fn(&[S]) -> Result<Vec<S>>,
{
    let group = action.group();
    let values = (0..group.order())
        .map(|g| f(&action.apply(group.inv(g), x)?))
        .collect::<Result<Vec<_>>>()?;
    OrbitTuple::new(Arc::clone(group), values)
}

/// `x` lies in the coincidence set `A(f,k)`.
pub fn in_coincidence_set<S, A, F>(f: F, action: &A, x: &[S], k: usize, eps: f64) -> Result<bool>
where
    S: Scalar,
    A: PointAction<S> + ?Sized,
    F: Fn(&[S]) -> Result<Vec<S>>,
{
    in_kwise_diagonal(&hat_map(f, action, x)?, k, eps)
}

/// `x` lies in the maximum coincidence set `A'(f,k)` of a scalar map.
pub fn in_max_coincidence_set<S, A, F>(f: F, action: &A, x: &[S], k: usize, eps: f64) -> Result<bool>
where
    S: Scalar,
    A: PointAction<S> + ?Sized,
    F: Fn(&[S]) -> Result<Vec<S>>,
{
    in_max_diagonal(&hat_map(f, action, x)?, k, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn z(q: usize) -> Arc<GroupTable> {
        Arc::new(GroupTable::cyclic(q).unwrap())
    }

    fn tuple(q: usize, vals: &[i64]) -> OrbitTuple<Rational> {
        OrbitTuple::scalar(z(q), vals.iter().map(|&v| rat(v, 1)).collect()).unwrap()
    }

    #[test]
    fn kwise_diagonal_examples() {
        let phi = tuple(3, &[1, 1, 2]);
        assert!(in_kwise_diagonal(&phi, 2, 0.0).unwrap());
        assert!(!in_kwise_diagonal(&phi, 3, 0.0).unwrap());
        let c = tuple(4, &[5, 5, 5, 5]);
        for k in 2..=4 {
            assert!(in_kwise_diagonal(&c, k, 0.0).unwrap());
        }
        assert!(in_kwise_diagonal(&phi, 1, 0.0).is_err());
        assert!(in_kwise_diagonal(&phi, 4, 0.0).is_err());
    }

    #[test]
    fn max_diagonal_examples() {
        assert!(in_max_diagonal(&tuple(3, &[2, 2, 1]), 2, 0.0).unwrap());
        assert!(!in_max_diagonal(&tuple(3, &[1, 1, 2]), 2, 0.0).unwrap());
        let vector = OrbitTuple::new(z(2), vec![vec![rat(1, 1), rat(0, 1)]; 2]).unwrap();
        assert_eq!(in_max_diagonal(&vector, 2, 0.0), Err(Error::NotScalar(2)));
    }

    #[test]
    fn pattern_examples() {
        let p = coincidence_pattern(&tuple(5, &[3, 3, 8, 8, -1]), 0.0).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2, 3], vec![4]]);
        assert_eq!(coincidence_pattern(&tuple(4, &[1, 2, 3, 4]), 0.0).unwrap().num_blocks(), 4);
        assert_eq!(coincidence_pattern(&tuple(4, &[7; 4]), 0.0).unwrap().blocks(), &[vec![0, 1, 2, 3]]);
        assert!(has_at_least_distinct(&tuple(5, &[3, 3, 8, 8, -1]), 3, 0.0).unwrap());
        assert!(!has_at_least_distinct(&tuple(5, &[3, 3, 8, 8, -1]), 4, 0.0).unwrap());
    }

    #[test]
    fn float_pattern_tolerance_and_ambiguity() {
        let phi = OrbitTuple::scalar(z(3), vec![1.0, 1.0 + 1e-12, 2.0]).unwrap();
        assert_eq!(coincidence_pattern(&phi, 1e-9).unwrap().num_blocks(), 2);
        let near = OrbitTuple::scalar(z(3), vec![1.0, 1.0 + 5e-9, 2.0]).unwrap();
        assert!(matches!(
            coincidence_pattern(&near, 1e-9),
            Err(Error::AmbiguousPattern { .. })
        ));
        // rounding-level differences with a zero tolerance
        let rounding = OrbitTuple::scalar(z(3), vec![0.1 + 0.2, 0.3, 1.0]).unwrap();
        assert!(matches!(
            coincidence_pattern(&rounding, 0.0),
            Err(Error::AmbiguousPattern { .. })
        ));
        assert_eq!(coincidence_pattern(&rounding, 1e-9).unwrap().num_blocks(), 2);
    }

    #[test]
    fn fixed_patterns() {
        let z5 = GroupTable::cyclic(5).unwrap();
        assert!(pattern_action_fixed_points(&z5, 3).unwrap().is_empty());
        let one = pattern_action_fixed_points(&z5, 1).unwrap();
        assert_eq!(one, vec![SetPartition::single_block(5)]);
        assert_eq!(pattern_action_fixed_points(&z5, 5).unwrap(), vec![SetPartition::discrete(5)]);
        let z3 = GroupTable::cyclic(3).unwrap();
        assert!(pattern_action_fixed_points(&z3, 2).unwrap().is_empty());
    }

    #[test]
    fn top_block_examples() {
        let r = top_block_classify(&tuple(4, &[5, 5, 3, 1]), 4).unwrap();
        assert_eq!(r.m, 2);
        assert_eq!(r.block.members(), &[0, 1]);
        for k in 2..=4 {
            assert!(matches!(
                top_block_classify(&tuple(4, &[2; 4]), k),
                Err(Error::NotInW { .. })
            ));
        }
        assert!(in_top_set(&tuple(4, &[5, 5, 3, 1]), &r.block));
    }

    #[test]
    fn top_block_equivariant() {
        let phi = tuple(5, &[4, 9, 9, 0, 2]);
        let g = z(5);
        let base = top_block_classify(&phi, 3).unwrap();
        for h in 0..5 {
            let moved = top_block_classify(&phi.act(h).unwrap(), 3).unwrap();
            assert_eq!(moved.block, base.block.act(&g, h).unwrap());
        }
    }

    #[test]
    fn majority_examples() {
        assert_eq!(
            majority_block(&tuple(5, &[7, 7, 7, 1, 2]), 3, 0.0).unwrap().members(),
            &[0, 1, 2]
        );
        assert_eq!(
            majority_block(&tuple(5, &[7, 7, 7, 7, 2]), 3, 0.0),
            Err(Error::NotInStratum { largest: 4, k: 3 })
        );
        assert_eq!(
            majority_block(&tuple(4, &[1, 2, 3, 4]), 2, 0.0),
            Err(Error::KTooSmall { k: 2, q: 4 })
        );
    }

    #[test]
    fn max_and_kwise_agree_at_k_equals_q() {
        for vals in [[1, 1, 1], [1, 1, 2], [3, 1, 3], [0, 5, 9]] {
            let phi = tuple(3, &vals);
            assert_eq!(
                in_kwise_diagonal(&phi, 3, 0.0).unwrap(),
                in_max_diagonal(&phi, 3, 0.0).unwrap()
            );
        }
    }
}
