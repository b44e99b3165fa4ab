//! Message assignments: which transmitters know which message.
//!
//! `T_i` is the transmit set of message `i` (equivalently of receiver `i`).
//! Empty transmit sets are legal and mean the message is not transmitted.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::RangeInclusive;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{ChannelTopology, Connectivity};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MessageAssignment {
    users: usize,
    sets: Vec<BTreeSet<usize>>,
}

impl MessageAssignment {
    pub fn new(users: usize, sets: Vec<BTreeSet<usize>>) -> Result<Self> {
        if users < 1 {
            return Err(Error::InvalidK {
                k: users,
                reason: "need at least one user".into(),
            });
        }
        if sets.len() != users {
            return Err(Error::Parse(format!(
                "expected {users} transmit sets, got {}",
                sets.len()
            )));
        }
        for set in &sets {
            if let Some(&bad) = set.iter().find(|&&t| t < 1 || t > users) {
                return Err(Error::IndexOutOfRange {
                    index: bad,
                    k: users,
                });
            }
        }
        Ok(Self { users, sets })
    }

    /// Builds from plain index lists; duplicates collapse.
    pub fn from_lists<I, S>(users: usize, lists: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = usize>,
    {
        Self::new(
            users,
            lists
                .into_iter()
                .map(|s| s.into_iter().collect())
                .collect(),
        )
    }

    /// Every message on its own transmitter.
    pub fn identity(users: usize) -> Result<Self> {
        Self::from_lists(users, (1..=users).map(|i| [i]))
    }

    pub fn empty(users: usize) -> Result<Self> {
        Self::new(users, vec![BTreeSet::new(); users])
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// `T_i`, 1-based.
    pub fn transmit_set(&self, message: usize) -> &BTreeSet<usize> {
        &self.sets[message - 1]
    }

    pub fn sets(&self) -> &[BTreeSet<usize>] {
        &self.sets
    }

    /// Replaces `T_i`.
    pub fn set_transmit_set(&mut self, message: usize, set: BTreeSet<usize>) -> Result<()> {
        if message < 1 || message > self.users {
            return Err(Error::IndexOutOfRange {
                index: message,
                k: self.users,
            });
        }
        if let Some(&bad) = set.iter().find(|&&t| t < 1 || t > self.users) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                k: self.users,
            });
        }
        self.sets[message - 1] = set;
        Ok(())
    }

    /// Cooperation order: the largest transmit set size (0 if all are empty).
    pub fn cooperation_order(&self) -> usize {
        self.sets.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Smallest `r` such that every `T_i` lies in `[i - r, i + r]`, measured
    /// on raw indices (no wraparound).
    pub fn local_radius(&self) -> usize {
        self.sets
            .iter()
            .enumerate()
            .flat_map(|(idx, set)| set.iter().map(move |&t| t.abs_diff(idx + 1)))
            .max()
            .unwrap_or(0)
    }

    /// `C_S`: messages with at least one transmitter in `transmitters`.
    pub fn carried_messages(&self, transmitters: &BTreeSet<usize>) -> BTreeSet<usize> {
        self.sets
            .iter()
            .enumerate()
            .filter(|(_, set)| !set.is_disjoint(transmitters))
            .map(|(idx, _)| idx + 1)
            .collect()
    }

    /// `C_{{j}}` for every transmitter `j`, indexed `j - 1`.
    pub fn messages_per_transmitter(&self) -> Vec<BTreeSet<usize>> {
        let mut out = vec![BTreeSet::new(); self.users];
        for (idx, set) in self.sets.iter().enumerate() {
            for &t in set {
                out[t - 1].insert(idx + 1);
            }
        }
        out
    }

    pub fn is_transmitted(&self, message: usize) -> bool {
        !self.sets[message - 1].is_empty()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentRepr {
    #[serde(rename = "K")]
    users: usize,
    sets: Vec<Vec<usize>>,
}

impl Serialize for MessageAssignment {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        AssignmentRepr {
            users: self.users,
            sets: self
                .sets
                .iter()
                .map(|s| s.iter().copied().collect())
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MessageAssignment {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = AssignmentRepr::deserialize(deserializer)?;
        MessageAssignment::from_lists(repr.users, repr.sets).map_err(serde::de::Error::custom)
    }
}

/// Spiral assignment: message `i` at transmitters `i, i+1, ..., i+M-1`,
/// wrapping past `K` back to 1.
pub fn spiral_assign(users: usize, cooperation: usize) -> Result<MessageAssignment> {
    if cooperation < 1 || cooperation > users {
        return Err(Error::InvalidM {
            m: cooperation,
            reason: format!("spiral needs 1 <= M <= K = {users}"),
        });
    }
    MessageAssignment::from_lists(
        users,
        (0..users).map(|i| (0..cooperation).map(move |d| (i + d) % users + 1)),
    )
}

/// Transmit sets of one cluster of `2M+L` users starting after `offset`.
///
/// Returns `(message, ordered transmit list)` for the `2M` served messages.
/// The list order is the successive-design order: ascending for the first `M`
/// messages, descending for the last `M`.
pub(crate) fn cluster_transmit_lists(
    offset: usize,
    cooperation: usize,
    interferers: usize,
) -> Vec<(usize, Vec<usize>)> {
    let (m, l) = (cooperation, interferers);
    let mut out = Vec::with_capacity(2 * m);
    for r in 1..=m {
        out.push((offset + r, (offset + r..=offset + m).collect()));
    }
    for r in l + m + 1..=l + 2 * m {
        out.push((offset + r, (offset + m + 1..=offset + r - l).rev().collect()));
    }
    out
}

pub(crate) fn check_scheme_parameters(users: usize, cooperation: usize, interferers: usize) -> Result<usize> {
    if cooperation < 1 {
        return Err(Error::InvalidM {
            m: cooperation,
            reason: "scheme needs M >= 1".into(),
        });
    }
    if interferers < 1 {
        return Err(Error::InvalidL {
            l: interferers as i64,
            k: users,
        });
    }
    let span = 2 * cooperation + interferers;
    if users < span {
        return Err(Error::TooFewUsers {
            k: users,
            needed: span,
        });
    }
    Ok(span)
}

/// Cluster assignment of the zero-forcing scheme: the network is cut into
/// blocks of `2M+L` users; inside each block the first `M` messages use
/// transmitters `i..=M`, the last `M` use `M+1..=i-L`, the middle `L` messages
/// are not transmitted. A trailing partial block gets empty sets.
pub fn scheme_assign(users: usize, cooperation: usize, interferers: usize) -> Result<MessageAssignment> {
    let span = check_scheme_parameters(users, cooperation, interferers)?;
    let mut sets = vec![BTreeSet::new(); users];
    for c in 0..users / span {
        for (msg, list) in cluster_transmit_lists(c * span, cooperation, interferers) {
            sets[msg - 1] = list.into_iter().collect();
        }
    }
    MessageAssignment::new(users, sets)
}

/// Message graph `G_{W_i, T_i}` on vertices `1..=K`.
///
/// Two vertices are adjacent iff both carry message `i` and lie within `L` of
/// each other; the marked vertices are the transmitters heard by receiver `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageGraph {
    pub message: usize,
    pub users: usize,
    pub members: BTreeSet<usize>,
    pub edges: BTreeSet<(usize, usize)>,
    pub marked: BTreeSet<usize>,
}

impl MessageGraph {
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Unweighted BFS distance from each reachable member to the nearest
    /// marked member. Members absent from the map sit in unmarked components.
    pub fn distances_to_marks(&self) -> BTreeMap<usize, usize> {
        let mut dist = BTreeMap::new();
        let mut queue = VecDeque::new();
        for &v in self.members.intersection(&self.marked) {
            dist.insert(v, 0);
            queue.push_back(v);
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            let next: Vec<usize> = self.neighbors(v).collect();
            for w in next {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

fn local_interferers(topology: &ChannelTopology) -> Result<usize> {
    topology.interferers().ok_or_else(|| {
        Error::UnsupportedTopology(
            "message graphs are defined for locally connected channels".into(),
        )
    })
}

pub fn build_message_graph(
    assignment: &MessageAssignment,
    topology: &ChannelTopology,
    message: usize,
) -> Result<MessageGraph> {
    let l = local_interferers(topology)?;
    let k = topology.users();
    if assignment.users() != k {
        return Err(Error::TopologyMismatch {
            expected: format!("{k} users"),
            found: format!("{} users in the assignment", assignment.users()),
        });
    }
    if message < 1 || message > k {
        return Err(Error::IndexOutOfRange { index: message, k });
    }
    let members = assignment.transmit_set(message).clone();
    let mut edges = BTreeSet::new();
    for &x in &members {
        for &y in members.range(x + 1..) {
            if y - x <= l {
                edges.insert((x, y));
            }
        }
    }
    let marked = topology.connected_transmitters(message)?.into_iter().collect();
    Ok(MessageGraph {
        message,
        users: k,
        members,
        edges,
        marked,
    })
}

/// Index window that an irreducible `T_i` of size at most `M` must lie in:
/// the marked transmitters widened by `(M-1)L` on both sides, clipped to `[1, K]`.
/// For the shifted model this is `{i-ML, ..., i+(M-1)L}`.
pub fn cooperation_envelope(
    topology: &ChannelTopology,
    message: usize,
    cooperation: usize,
) -> Result<RangeInclusive<usize>> {
    let l = local_interferers(topology)? as i64;
    let i = message as i64;
    let (lo, hi) = match topology.connectivity() {
        Connectivity::LocalShifted { .. } => (i - l, i),
        Connectivity::LocalOriginal { .. } => (i - (l + 1) / 2, i + l / 2),
        Connectivity::FullyConnected => unreachable!(),
    };
    let reach = (cooperation.max(1) as i64 - 1) * l;
    let lo = (lo - reach).max(1) as usize;
    let hi = ((hi + reach).min(topology.users() as i64)) as usize;
    Ok(lo..=hi)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvelopeViolation {
    pub message: usize,
    pub transmitter: usize,
    /// Graph distance to the nearest marked vertex.
    pub distance: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub assignment: MessageAssignment,
    /// `(message, transmitter)` pairs that were dropped.
    pub removed: Vec<(usize, usize)>,
    pub envelope_violations: Vec<EnvelopeViolation>,
}

/// Drops every transmitter whose vertex in the message graph is not connected
/// to a marked vertex; such transmitters cannot contribute to the sum rate.
/// Afterwards, checks that each surviving transmitter is within distance `M-1`
/// of a mark and inside [`cooperation_envelope`]; violations (possible only if
/// the input exceeded cooperation order `M`) are reported, not repaired.
///
/// A fully connected topology is returned unchanged.
pub fn reduce_assignment(
    assignment: &MessageAssignment,
    topology: &ChannelTopology,
    cooperation: usize,
) -> Result<Reduction> {
    if !topology.is_local() {
        return Ok(Reduction {
            assignment: assignment.clone(),
            removed: Vec::new(),
            envelope_violations: Vec::new(),
        });
    }
    let mut reduced = assignment.clone();
    let mut removed = Vec::new();
    let mut envelope_violations = Vec::new();
    for message in 1..=assignment.users() {
        let graph = build_message_graph(assignment, topology, message)?;
        let dist = graph.distances_to_marks();
        let keep: BTreeSet<usize> = graph
            .members
            .iter()
            .copied()
            .filter(|v| dist.contains_key(v))
            .collect();
        removed.extend(
            graph
                .members
                .iter()
                .filter(|v| !keep.contains(v))
                .map(|&v| (message, v)),
        );
        let window = cooperation_envelope(topology, message, cooperation)?;
        for &v in &keep {
            let d = dist[&v];
            if d + 1 > cooperation.max(1) || !window.contains(&v) {
                envelope_violations.push(EnvelopeViolation {
                    message,
                    transmitter: v,
                    distance: d,
                });
            }
        }
        reduced.set_transmit_set(message, keep)?;
    }
    Ok(Reduction {
        assignment: reduced,
        removed,
        envelope_violations,
    })
}
