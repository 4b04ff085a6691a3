//! Exact quantiles over every value seen so far.
//!
//! The oracle keeps the whole stream, so it is only used to produce ground
//! truth for evaluation. Values live in a treap keyed by value, with a
//! multiplicity per node and subtree sizes for order-statistic queries.

use crate::error::{Error, Result};
use crate::histogram::Quantile;

/// 1-based rank of the q-quantile in a sorted multiset of `n` values:
/// `max(1, ceil(q * n))`.
#[inline]
pub fn quantile_rank(q: Quantile, n: u64) -> u64 {
    ((q.value() * n as f64).ceil() as u64).clamp(1, n.max(1))
}

/// Exact q-quantile of an already sorted slice.
pub fn sorted_quantile(sorted: &[f64], q: Quantile) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Empty);
    }
    let rank = quantile_rank(q, sorted.len() as u64);
    Ok(sorted[rank as usize - 1])
}

/// Exact q-quantile of a sorted set of distinct `values` where `values[i]`
/// occurs `counts[i]` times. Counts are expected to be whole numbers.
pub(crate) fn weighted_sorted_quantile(values: &[f64], counts: &[f64], q: Quantile) -> Result<f64> {
    let total: f64 = counts.iter().sum();
    if values.is_empty() || !(total > 0.0) {
        return Err(Error::Empty);
    }
    let rank = quantile_rank(q, total.round() as u64) as f64;
    let mut cum = 0.0;
    for (&v, &c) in values.iter().zip(counts) {
        cum += c;
        if cum >= rank {
            return Ok(v);
        }
    }
    Ok(*values.last().unwrap())
}

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    key: f64,
    priority: u64,
    count: u64,
    size: u64,
    left: u32,
    right: u32,
}

#[derive(Debug, Clone)]
pub struct ExactQuantileStore {
    nodes: Vec<Node>,
    root: u32,
    len: u64,
    rng: u64,
}

impl ExactQuantileStore {
    pub fn new() -> Self {
        ExactQuantileStore {
            nodes: Vec::new(),
            root: NIL,
            len: 0,
            rng: 0x853c_49e6_748f_ea9b,
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of distinct values stored.
    pub fn distinct(&self) -> usize {
        self.nodes.len()
    }

    pub fn insert(&mut self, d: f64) -> Result<()> {
        if !d.is_finite() {
            return Err(Error::NonFinite(d));
        }
        self.root = self.insert_at(self.root, d);
        self.len += 1;
        Ok(())
    }

    /// Element of 1-based `rank` in sorted order.
    pub fn select(&self, rank: u64) -> Option<f64> {
        if rank == 0 || rank > self.len {
            return None;
        }
        let mut k = rank;
        let mut t = self.root;
        while t != NIL {
            let node = &self.nodes[t as usize];
            let left = self.size(node.left);
            if k <= left {
                t = node.left;
            } else if k <= left + node.count {
                return Some(node.key);
            } else {
                k -= left + node.count;
                t = node.right;
            }
        }
        None
    }

    /// Number of stored values `<= v`.
    pub fn rank_of(&self, v: f64) -> u64 {
        let mut acc = 0;
        let mut t = self.root;
        while t != NIL {
            let node = &self.nodes[t as usize];
            if v < node.key {
                t = node.left;
            } else {
                acc += self.size(node.left) + node.count;
                if v == node.key {
                    break;
                }
                t = node.right;
            }
        }
        acc
    }

    pub fn quantile(&self, q: Quantile) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::Empty);
        }
        Ok(self
            .select(quantile_rank(q, self.len))
            .expect("rank within store size"))
    }

    /// All stored values in ascending order, duplicates repeated.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len as usize);
        let mut stack = Vec::new();
        let mut t = self.root;
        while t != NIL || !stack.is_empty() {
            while t != NIL {
                stack.push(t);
                t = self.nodes[t as usize].left;
            }
            let top = stack.pop().unwrap();
            let node = &self.nodes[top as usize];
            out.extend(std::iter::repeat_n(node.key, node.count as usize));
            t = node.right;
        }
        out
    }

    #[inline]
    fn size(&self, t: u32) -> u64 {
        if t == NIL {
            0
        } else {
            self.nodes[t as usize].size
        }
    }

    fn update(&mut self, t: u32) {
        let (l, r) = {
            let n = &self.nodes[t as usize];
            (n.left, n.right)
        };
        let size = self.size(l) + self.size(r) + self.nodes[t as usize].count;
        self.nodes[t as usize].size = size;
    }

    fn next_priority(&mut self) -> u64 {
        // xorshift64*
        self.rng ^= self.rng >> 12;
        self.rng ^= self.rng << 25;
        self.rng ^= self.rng >> 27;
        self.rng.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    fn rotate_right(&mut self, t: u32) -> u32 {
        let l = self.nodes[t as usize].left;
        self.nodes[t as usize].left = self.nodes[l as usize].right;
        self.nodes[l as usize].right = t;
        self.update(t);
        self.update(l);
        l
    }

    fn rotate_left(&mut self, t: u32) -> u32 {
        let r = self.nodes[t as usize].right;
        self.nodes[t as usize].right = self.nodes[r as usize].left;
        self.nodes[r as usize].left = t;
        self.update(t);
        self.update(r);
        r
    }

    fn insert_at(&mut self, t: u32, key: f64) -> u32 {
        if t == NIL {
            let priority = self.next_priority();
            let id = u32::try_from(self.nodes.len()).expect("treap exceeds u32 nodes");
            self.nodes.push(Node {
                key,
                priority,
                count: 1,
                size: 1,
                left: NIL,
                right: NIL,
            });
            return id;
        }
        let node_key = self.nodes[t as usize].key;
        if key == node_key {
            self.nodes[t as usize].count += 1;
            self.nodes[t as usize].size += 1;
            return t;
        }
        if key < node_key {
            let l = self.insert_at(self.nodes[t as usize].left, key);
            self.nodes[t as usize].left = l;
            self.update(t);
            if self.nodes[l as usize].priority > self.nodes[t as usize].priority {
                return self.rotate_right(t);
            }
        } else {
            let r = self.insert_at(self.nodes[t as usize].right, key);
            self.nodes[t as usize].right = r;
            self.update(t);
            if self.nodes[r as usize].priority > self.nodes[t as usize].priority {
                return self.rotate_left(t);
            }
        }
        t
    }
}

impl Default for ExactQuantileStore {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(v: f64) -> Quantile {
        Quantile::new(v).unwrap()
    }

    fn store_of(values: &[f64]) -> ExactQuantileStore {
        let mut s = ExactQuantileStore::new();
        for &v in values {
            s.insert(v).unwrap();
        }
        s
    }

    #[test]
    fn quantile_examples() {
        let s = store_of(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(s.quantile(q(0.5)).unwrap(), 3.0);
        assert_eq!(store_of(&[7.0]).quantile(q(0.99)).unwrap(), 7.0);
        assert_eq!(
            store_of(&[1.0, 2.0, 3.0, 4.0]).quantile(q(0.95)).unwrap(),
            4.0
        );
    }

    #[test]
    fn duplicates_are_kept() {
        let mut s = store_of(&[5.0]);
        assert_eq!(s.len(), 1);
        s.insert(5.0).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.distinct(), 1);
        assert_eq!(s.sorted_values(), vec![5.0, 5.0]);
        assert_eq!(s.rank_of(5.0), 2);
    }

    #[test]
    fn empty_store_errors() {
        let s = ExactQuantileStore::new();
        assert!(matches!(s.quantile(q(0.5)), Err(Error::Empty)));
        assert_eq!(s.select(1), None);
    }

    #[test]
    fn rejects_non_finite() {
        let mut s = ExactQuantileStore::new();
        assert!(matches!(s.insert(f64::NAN), Err(Error::NonFinite(_))));
        assert!(s.insert(f64::INFINITY).is_err());
        assert!(s.is_empty());
    }

    #[test]
    fn rank_is_never_zero() {
        assert_eq!(quantile_rank(q(1e-9), 10), 1);
        assert_eq!(quantile_rank(q(0.5), 4), 2);
        assert_eq!(quantile_rank(q(0.9), 10), 9);
    }

    #[test]
    fn large_stream_matches_sort() {
        let mut s = ExactQuantileStore::new();
        let mut all = Vec::new();
        let mut x: u64 = 12345;
        for i in 0..1_000_000u64 {
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            // Coarse values force plenty of duplicates.
            let v = ((x >> 40) % 50_000) as f64 * 0.5;
            s.insert(v).unwrap();
            all.push(v);
            if i % 99_991 == 0 {
                let mut sorted = all.clone();
                sorted.sort_by(f64::total_cmp);
                for &qq in &[0.01, 0.5, 0.95, 0.995] {
                    assert_eq!(
                        s.quantile(q(qq)).unwrap(),
                        sorted_quantile(&sorted, q(qq)).unwrap()
                    );
                }
            }
        }
        all.sort_by(f64::total_cmp);
        assert_eq!(s.sorted_values(), all);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn agrees_with_full_sort(
            values in prop::collection::vec(-1e3f64..1e3, 1..200),
            dup in 0usize..4,
            qq in 0.0001f64..0.9999,
        ) {
            let mut values = values;
            // Re-insert a prefix to create duplicates.
            let extra: Vec<f64> = values.iter().take(dup * 5).copied().collect();
            values.extend(extra);
            let s = store_of(&values);
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            let got = s.quantile(q(qq)).unwrap();
            prop_assert_eq!(got, sorted_quantile(&sorted, q(qq)).unwrap());
            prop_assert!(values.contains(&got));
        }

        #[test]
        fn non_decreasing_in_q(values in prop::collection::vec(-1e3f64..1e3, 1..100)) {
            let s = store_of(&values);
            let mut prev = f64::NEG_INFINITY;
            for i in 1..200 {
                let v = s.quantile(q(i as f64 / 200.0)).unwrap();
                prop_assert!(v >= prev);
                prev = v;
            }
        }
    }
}
