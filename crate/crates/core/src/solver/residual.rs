//! Residuals measuring the distance of an orbit from the coincidence sets.
//! All of them are symmetric functions of the orbit values, hence
//! invariant under the group action.

use itertools::Itertools;

use crate::scalar::Scalar;

/// Above this many k-subsets, `coincidence_residual` switches to greedy
/// clustering.
pub const MAX_ENUMERATED_SUBSETS: u128 = 100_000;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn squared_distance<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| {
        let d = x.clone() - y.clone();
        acc + d.clone() * d
    })
}

/// `min over k-subsets S of sum over unordered pairs {g,h} in S of
/// |v_g - v_h|^2`, with the minimising subset (ties broken by the
/// lexicographically first subset).
pub fn coincidence_residual<S: Scalar>(values: &[Vec<S>], k: usize) -> (S, Vec<usize>) {
    let q = values.len();
    assert!(k >= 1 && k <= q, "k must lie in 1..=q");
    let mut dist = vec![S::zero(); q * q];
    for i in 0..q {
        for j in 0..i {
            let d = squared_distance(&values[i], &values[j]);
            dist[i * q + j] = d.clone();
            dist[j * q + i] = d;
        }
    }
    let cost = |subset: &[usize]| {
        subset
            .iter()
            .tuple_combinations()
            .fold(S::zero(), |acc, (&a, &b)| acc + dist[a * q + b].clone())
    };
    if binomial(q, k) <= MAX_ENUMERATED_SUBSETS {
        let mut best: Option<(S, Vec<usize>)> = None;
        for subset in (0..q).combinations(k) {
            let c = cost(&subset);
            if best.as_ref().is_none_or(|(b, _)| c < *b) {
                best = Some((c, subset));
            }
        }
        best.expect("at least one subset")
    } else {
        log::warn!(
            "({q} choose {k}) subsets exceed {MAX_ENUMERATED_SUBSETS}; using greedy clustering, the residual is an upper bound"
        );
        let mut best: Option<(S, Vec<usize>)> = None;
        for anchor in 0..q {
            let mut order: Vec<usize> = (0..q).collect();
            order.sort_by(|&a, &b| dist[anchor * q + a].total_cmp(&dist[anchor * q + b]).then(a.cmp(&b)));
            let mut subset: Vec<usize> = order[..k].to_vec();
            subset.sort_unstable();
            let c = cost(&subset);
            if best.as_ref().is_none_or(|(b, _)| c < *b) {
                best = Some((c, subset));
            }
        }
        best.expect("at least one anchor")
    }
}

/// `(v_(1) - v_(k))^2` for the values sorted descending, with the indices
/// of the `k` largest values (ties broken by index).
pub fn max_coincidence_residual<S: Scalar>(values: &[S], k: usize) -> (S, Vec<usize>) {
    let q = values.len();
    assert!(k >= 1 && k <= q, "k must lie in 1..=q");
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let gap = values[order[0]].clone() - values[order[k - 1]].clone();
    let mut top: Vec<usize> = order[..k].to_vec();
    top.sort_unstable();
    (gap.clone() * gap, top)
}

/// Knaster residual for values `f(rho g x)`, `values[0]` at the identity:
/// spread of the non-identity values around their mean plus the squared
/// excess of the identity value over their minimum.
pub fn knaster_residual(values: &[f64]) -> (f64, f64) {
    let rest = &values[1..];
    let mean = rest.iter().sum::<f64>() / rest.len() as f64;
    let spread: f64 = rest.iter().map(|v| (v - mean).powi(2)).sum();
    let min = rest.iter().copied().fold(f64::INFINITY, f64::min);
    let hinge = (values[0] - min).max(0.0);
    (spread + hinge * hinge, mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(27, 13), 20_058_300);
        assert_eq!(binomial(3, 4), 0);
    }

    #[test]
    fn antipodal_pair() {
        let (r, s) = coincidence_residual(&[vec![1.0], vec![-1.0]], 2);
        assert_eq!(r, 4.0);
        assert_eq!(s, vec![0, 1]);
    }

    #[test]
    fn picks_closest_pair() {
        let v: Vec<Vec<Rational>> = [5, 1, 2, 9].iter().map(|&x| vec![rat(x, 1)]).collect();
        let (r, s) = coincidence_residual(&v, 2);
        assert_eq!((r, s), (rat(1, 1), vec![1, 2]));
    }

    #[test]
    fn max_residual_examples() {
        assert_eq!(max_coincidence_residual(&[2.0, 2.0, 1.0], 2).0, 0.0);
        assert_eq!(max_coincidence_residual(&[1.0, 1.0, 2.0], 2).0, 1.0);
        assert_eq!(max_coincidence_residual(&[3.5; 4], 4).0, 0.0);
        assert_eq!(max_coincidence_residual(&[1.0, 1.0, 2.0], 2).1, vec![0, 2]);
    }

    #[test]
    fn knaster_values() {
        assert_eq!(knaster_residual(&[-1.0, 0.5, 0.5]), (0.0, 0.5));
        let (r, _) = knaster_residual(&[1.0, -0.5, -0.5]);
        assert!((r - 2.25).abs() < 1e-15);
    }
}
