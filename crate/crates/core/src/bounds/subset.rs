use std::collections::BTreeSet;

use num_rational::Rational64;

use super::{BoundMethod, DofBound, WitnessRecord};
use crate::assignment::MessageAssignment;
use crate::error::{Error, Result};

/// Largest `K` accepted by the exact subset search.
pub const EXACT_SUBSET_LIMIT: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubsetMode {
    /// True minimum by branch and bound (`K <= 24`).
    Exact,
    /// Grow `S` one transmitter at a time, least new messages first.
    Greedy,
}

/// `min_S max(|C_S|, K - |S|)` over transmitter subsets `S`.
pub fn subset_bound(assignment: &MessageAssignment, mode: SubsetMode) -> Result<DofBound> {
    match mode {
        SubsetMode::Exact => exact(assignment),
        SubsetMode::Greedy => Ok(greedy(assignment)),
    }
}

fn witness_from(assignment: &MessageAssignment, transmitters: BTreeSet<usize>) -> WitnessRecord {
    WitnessRecord {
        carried: assignment.carried_messages(&transmitters),
        transmitters,
        counters: None,
    }
}

struct ExactSearch {
    users: usize,
    carried_by: Vec<u32>,
    best_value: usize,
    best_mask: u32,
}

impl ExactSearch {
    // Include-first DFS over transmitters. A node's value can only fall to
    // max(|C_S|, K - |S| - remaining), and |C_S| never shrinks as S grows.
    fn dfs(&mut self, next: usize, chosen: u32, size: usize, carried: u32) {
        let covered = carried.count_ones() as usize;
        let value = covered.max(self.users - size);
        if value < self.best_value {
            self.best_value = value;
            self.best_mask = chosen;
        }
        if next == self.users {
            return;
        }
        let remaining = self.users - next;
        if covered >= self.best_value || self.users - size - remaining >= self.best_value {
            return;
        }
        self.dfs(next + 1, chosen | (1 << next), size + 1, carried | self.carried_by[next]);
        self.dfs(next + 1, chosen, size, carried);
    }
}

fn exact(assignment: &MessageAssignment) -> Result<DofBound> {
    let k = assignment.users();
    if k > EXACT_SUBSET_LIMIT {
        return Err(Error::TooLargeForExact {
            k,
            limit: EXACT_SUBSET_LIMIT,
        });
    }
    let carried_by = assignment
        .messages_per_transmitter()
        .iter()
        .map(|msgs| msgs.iter().fold(0u32, |m, &i| m | (1 << (i - 1))))
        .collect();
    let mut search = ExactSearch {
        users: k,
        carried_by,
        best_value: k,
        best_mask: 0,
    };
    search.dfs(0, 0, 0, 0);
    let transmitters = (1..=k).filter(|j| search.best_mask & (1 << (j - 1)) != 0).collect();
    let witness = witness_from(assignment, transmitters);
    debug_assert_eq!(witness.value(k), search.best_value);
    Ok(DofBound::from_witness(k, witness, BoundMethod::SubsetExact))
}

fn greedy(assignment: &MessageAssignment) -> DofBound {
    let k = assignment.users();
    let per_tx = assignment.messages_per_transmitter();
    let mut covered = vec![false; k + 1];
    let mut covered_count = 0;
    let mut chosen = vec![false; k + 1];
    let mut order = Vec::with_capacity(k);
    let mut best = (k, 0usize);
    for step in 1..=k {
        let (tx, gain) = (1..=k)
            .filter(|&j| !chosen[j])
            .map(|j| (j, per_tx[j - 1].iter().filter(|&&i| !covered[i]).count()))
            .min_by_key(|&(j, g)| (g, j))
            .expect("a transmitter remains");
        chosen[tx] = true;
        order.push(tx);
        for &i in &per_tx[tx - 1] {
            covered[i] = true;
        }
        covered_count += gain;
        let value = covered_count.max(k - step);
        if value < best.0 {
            best = (value, step);
        }
    }
    let transmitters = order[..best.1].iter().copied().collect();
    let mut bound = DofBound::from_witness(k, witness_from(assignment, transmitters), BoundMethod::SubsetGreedy);
    bound.value = Rational64::from_integer(best.0 as i64);
    bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::{scheme_assign, spiral_assign};

    // Plain enumeration of all 2^K subsets.
    fn brute_force(a: &MessageAssignment) -> usize {
        let k = a.users();
        (0u32..1 << k)
            .map(|mask| {
                let s: BTreeSet<usize> = (1..=k).filter(|j| mask & (1 << (j - 1)) != 0).collect();
                a.carried_messages(&s).len().max(k - s.len())
            })
            .min()
            .unwrap()
    }

    #[test]
    fn figure_style_instance() {
        let a = MessageAssignment::from_lists(5, vec![vec![1], vec![1, 2], vec![2, 3], vec![3, 4], vec![4, 5]])
            .unwrap();
        let b = subset_bound(&a, SubsetMode::Exact).unwrap();
        assert_eq!(b.value, Rational64::from_integer(3));
        assert_eq!(brute_force(&a), 3);
        let w = b.witness.unwrap();
        assert_eq!(w.value(5), 3);
        assert_eq!(w.carried, a.carried_messages(&w.transmitters));
    }

    #[test]
    fn identity_assignment_k4() {
        let a = MessageAssignment::identity(4).unwrap();
        assert_eq!(brute_force(&a), 2);
        assert_eq!(subset_bound(&a, SubsetMode::Exact).unwrap().value, Rational64::from_integer(2));
    }

    #[test]
    fn nothing_transmitted_gives_zero() {
        let a = MessageAssignment::empty(6).unwrap();
        let b = subset_bound(&a, SubsetMode::Exact).unwrap();
        assert_eq!(b.value, Rational64::from_integer(0));
        assert_eq!(b.witness.unwrap().transmitters.len(), 6);
        assert_eq!(subset_bound(&a, SubsetMode::Greedy).unwrap().value, Rational64::from_integer(0));
    }

    #[test]
    fn exact_limit() {
        let a = MessageAssignment::identity(25).unwrap();
        assert!(matches!(
            subset_bound(&a, SubsetMode::Exact),
            Err(Error::TooLargeForExact { k: 25, limit: 24 })
        ));
        assert!(subset_bound(&a, SubsetMode::Greedy).is_ok());
    }

    #[test]
    fn exact_matches_brute_force_on_structured_assignments() {
        for k in 1..=10 {
            for m in 1..=k.min(3) {
                let a = spiral_assign(k, m).unwrap();
                let exact = subset_bound(&a, SubsetMode::Exact).unwrap();
                assert_eq!(exact.value, Rational64::from_integer(brute_force(&a) as i64));
                let greedy = subset_bound(&a, SubsetMode::Greedy).unwrap();
                assert!(greedy.value >= exact.value);
            }
        }
        let a = scheme_assign(14, 3, 1).unwrap();
        assert_eq!(
            subset_bound(&a, SubsetMode::Exact).unwrap().value,
            Rational64::from_integer(brute_force(&a) as i64)
        );
    }
}
