//! Set partitions of `{0, .., n-1}` in canonical block form.

use serde::Serialize;

/// A partition of `{0, .., n-1}`: blocks sorted internally and ordered by
/// least element, so equal partitions have equal representations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SetPartition {
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Canonicalise arbitrary blocks. Panics if they do not partition `0..n`.
    pub fn from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Self {
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .filter(|b| !b.is_empty())
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_unstable_by_key(|b| b[0]);
        let mut seen = vec![false; n];
        for &x in blocks.iter().flatten() {
            assert!(x < n && !seen[x], "blocks do not partition 0..{n}");
            seen[x] = true;
        }
        assert!(seen.iter().all(|&s| s), "blocks do not cover 0..{n}");
        Self { blocks }
    }

    /// From block labels: `x` and `y` share a block iff `labels[x] == labels[y]`.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut slot: Vec<Option<usize>> = Vec::new();
        for (x, &l) in labels.iter().enumerate() {
            if slot.len() <= l {
                slot.resize(l + 1, None);
            }
            match slot[l] {
                Some(b) => blocks[b].push(x),
                None => {
                    slot[l] = Some(blocks.len());
                    blocks.push(vec![x]);
                }
            }
        }
        Self { blocks }
    }

    pub fn discrete(n: usize) -> Self {
        Self {
            blocks: (0..n).map(|x| vec![x]).collect(),
        }
    }

    pub fn single_block(n: usize) -> Self {
        Self {
            blocks: if n == 0 { Vec::new() } else { vec![(0..n).collect()] },
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn ground_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn largest_block(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Block index of each element.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.ground_size()];
        for (i, b) in self.blocks.iter().enumerate() {
            for &x in b {
                labels[x] = i;
            }
        }
        labels
    }

    /// Image under a permutation of the ground set.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.ground_size();
        Self::from_blocks(
            n,
            self.blocks
                .iter()
                .map(|b| b.iter().map(|&x| perm[x]).collect())
                .collect(),
        )
    }

    /// True when every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &SetPartition) -> bool {
        let labels = other.labels();
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&x| labels[x] == labels[b[0]]))
    }
}

/// All partitions of `0..n` as restricted growth strings, in lexicographic
/// order of the strings.
pub fn all_partitions(n: usize) -> Vec<SetPartition> {
    let mut out = Vec::new();
    if n == 0 {
        out.push(SetPartition { blocks: Vec::new() });
        return out;
    }
    let mut rgs = vec![0usize; n];
    loop {
        out.push(SetPartition::from_labels(&rgs));
        // advance the restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            let max_prefix = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= max_prefix {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Partitions of `0..n` into exactly `k` blocks.
pub fn partitions_with_blocks(n: usize, k: usize) -> Vec<SetPartition> {
    all_partitions(n)
        .into_iter()
        .filter(|p| p.num_blocks() == k)
        .collect()
}

/// Partitions whose blocks have size 1 or at least `k`: the flats of the
/// k-equal arrangement.
pub fn k_equal_partitions(n: usize, k: usize) -> Vec<SetPartition> {
    all_partitions(n)
        .into_iter()
        .filter(|p| p.blocks().iter().all(|b| b.len() == 1 || b.len() >= k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let bell: Vec<usize> = (0..8).map(|n| all_partitions(n).len()).collect();
        assert_eq!(bell, vec![1, 1, 2, 5, 15, 52, 203, 877]);
    }

    #[test]
    fn canonical_form() {
        let a = SetPartition::from_blocks(5, vec![vec![4], vec![3, 2], vec![1, 0]]);
        assert_eq!(a.blocks(), &[vec![0, 1], vec![2, 3], vec![4]]);
        assert_eq!(SetPartition::from_labels(&[7, 7, 2, 2, 9]), a);
    }

    #[test]
    fn refinement() {
        let fine = SetPartition::discrete(3);
        let coarse = SetPartition::single_block(3);
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
    }
}
