use std::collections::BTreeSet;

use num_rational::Rational64;

use super::{BoundMethod, DofBound};
use crate::assignment::MessageAssignment;
use crate::channel::ChannelTopology;
use crate::error::{Error, Result};

/// Largest number of constrained users handled by [`no_coop_bound`].
pub const PAIRWISE_LIMIT: usize = 30;

/// Edges `(i, s)`, `i < s`, of the constraint `d_i + d_s <= 1`: user `i` is
/// served by a single transmitter `j` and `s` is another user that still
/// hears `j`. Users with an empty transmit set carry no DoF and are skipped.
pub fn pairwise_constraints(
    topology: &ChannelTopology,
    assignment: &MessageAssignment,
) -> Result<BTreeSet<(usize, usize)>> {
    check_inputs(topology, assignment)?;
    let mut edges = BTreeSet::new();
    for i in 1..=assignment.users() {
        let Some(&j) = assignment.transmit_set(i).iter().next() else {
            continue;
        };
        for s in topology.connected_receivers(j)? {
            if s != i && assignment.is_transmitted(s) {
                edges.insert((i.min(s), i.max(s)));
            }
        }
    }
    Ok(edges)
}

fn check_inputs(topology: &ChannelTopology, assignment: &MessageAssignment) -> Result<()> {
    if !topology.is_local() {
        return Err(Error::UnsupportedTopology(
            "pairwise bound needs a locally connected channel".into(),
        ));
    }
    if topology.users() != assignment.users() {
        return Err(Error::TopologyMismatch {
            expected: format!("K={}", topology.users()),
            found: format!("assignment with K={}", assignment.users()),
        });
    }
    let order = assignment.cooperation_order();
    if order > 1 {
        return Err(Error::CooperationNotOne(order));
    }
    Ok(())
}

struct Packing {
    vertices: Vec<usize>,
    adjacency: Vec<u32>,
    best: i64,
}

impl Packing {
    // Maximises |I| - |N(I)| over independent sets I.
    fn dfs(&mut self, next: usize, chosen: u32, blocked: u32) {
        let score = chosen.count_ones() as i64 - (blocked & !chosen).count_ones() as i64;
        self.best = self.best.max(score);
        if score + (self.vertices.len() - next) as i64 <= self.best {
            return;
        }
        for v in next..self.vertices.len() {
            if blocked & (1 << v) == 0 {
                self.dfs(v + 1, chosen | (1 << v), blocked | self.adjacency[v] | (1 << v));
            }
        }
    }
}

/// Optimum of `max sum d_i` subject to the pairwise constraints and
/// `0 <= d_i <= 1`. The optimum is half-integral: ones on an independent set
/// `I`, zeros on its neighbourhood and halves elsewhere, giving
/// `(K' + |I| - |N(I)|) / 2` over the `K'` users with a transmitter.
pub fn no_coop_bound(topology: &ChannelTopology, assignment: &MessageAssignment) -> Result<DofBound> {
    let edges = pairwise_constraints(topology, assignment)?;
    let vertices: Vec<usize> = (1..=assignment.users())
        .filter(|&i| assignment.is_transmitted(i))
        .collect();
    if vertices.len() > PAIRWISE_LIMIT {
        return Err(Error::TooLargeForExact {
            k: vertices.len(),
            limit: PAIRWISE_LIMIT,
        });
    }
    let position = |u: usize| vertices.binary_search(&u).expect("constrained users carry a message");
    let mut adjacency = vec![0u32; vertices.len()];
    for &(a, b) in &edges {
        let (pa, pb) = (position(a), position(b));
        adjacency[pa] |= 1 << pb;
        adjacency[pb] |= 1 << pa;
    }
    let mut packing = Packing {
        vertices,
        adjacency,
        best: 0,
    };
    packing.dfs(0, 0, 0);
    let users = packing.vertices.len() as i64;
    Ok(DofBound {
        value: Rational64::new(users + packing.best, 2),
        witness: None,
        method: BoundMethod::Pairwise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // LP optimum by enumerating every vector in {0, 1/2, 1}^n.
    fn half_integral_oracle(n: usize, edges: &BTreeSet<(usize, usize)>, vertices: &[usize]) -> Rational64 {
        let mut best = 0i64;
        let total = 3usize.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut doubled = vec![0i64; n];
            for d in doubled.iter_mut() {
                *d = (c % 3) as i64;
                c /= 3;
            }
            let pos = |u: usize| vertices.iter().position(|&v| v == u).unwrap();
            if edges.iter().all(|&(a, b)| doubled[pos(a)] + doubled[pos(b)] <= 2) {
                best = best.max(doubled.iter().sum());
            }
        }
        Rational64::new(best, 2)
    }

    #[test]
    fn wyner_three_users() {
        let t = ChannelTopology::local_shifted(3, 1).unwrap();
        let a = MessageAssignment::from_lists(3, vec![vec![1], vec![1], vec![2]]).unwrap();
        let edges = pairwise_constraints(&t, &a).unwrap();
        assert_eq!(edges, [(1, 2), (2, 3)].into_iter().collect());
        let b = no_coop_bound(&t, &a).unwrap();
        assert_eq!(b.value, Rational64::from_integer(2));
        assert_eq!(half_integral_oracle(3, &edges, &[1, 2, 3]), b.value);
    }

    #[test]
    fn original_model_identity() {
        for l in 2..=3 {
            let t = ChannelTopology::local_original(4, l).unwrap();
            let a = MessageAssignment::identity(4).unwrap();
            let b = no_coop_bound(&t, &a).unwrap();
            assert!(b.value <= Rational64::new(5, 2));
            let edges = pairwise_constraints(&t, &a).unwrap();
            assert_eq!(half_integral_oracle(4, &edges, &[1, 2, 3, 4]), b.value);
        }
    }

    #[test]
    fn single_user() {
        let t = ChannelTopology::local_shifted(1, 0).unwrap();
        let a = MessageAssignment::identity(1).unwrap();
        assert_eq!(no_coop_bound(&t, &a).unwrap().value, Rational64::from_integer(1));
    }

    #[test]
    fn rejects_cooperation_and_full() {
        let t = ChannelTopology::local_shifted(3, 1).unwrap();
        let a = MessageAssignment::from_lists(3, vec![vec![1, 2], vec![2], vec![3]]).unwrap();
        assert!(matches!(no_coop_bound(&t, &a), Err(Error::CooperationNotOne(2))));
        let f = ChannelTopology::fully_connected(3).unwrap();
        let a = MessageAssignment::identity(3).unwrap();
        assert!(matches!(no_coop_bound(&f, &a), Err(Error::UnsupportedTopology(_))));
    }

    #[test]
    fn matches_oracle_on_all_small_assignments() {
        for k in 2..=6 {
            for l in 1..k.min(3) {
                for topology in [
                    ChannelTopology::local_shifted(k, l).unwrap(),
                    ChannelTopology::local_original(k, l).unwrap(),
                ] {
                    // every map message -> {none} or a single transmitter
                    let total = (k + 1).pow(k as u32);
                    for code in (0..total).step_by(7) {
                        let mut c = code;
                        let lists: Vec<Vec<usize>> = (0..k)
                            .map(|_| {
                                let t = c % (k + 1);
                                c /= k + 1;
                                if t == 0 { vec![] } else { vec![t] }
                            })
                            .collect();
                        let a = MessageAssignment::from_lists(k, lists).unwrap();
                        let edges = pairwise_constraints(&topology, &a).unwrap();
                        let vertices: Vec<usize> = (1..=k).filter(|&i| a.is_transmitted(i)).collect();
                        let b = no_coop_bound(&topology, &a).unwrap();
                        assert_eq!(b.value, half_integral_oracle(vertices.len(), &edges, &vertices));
                    }
                }
            }
        }
    }
}
