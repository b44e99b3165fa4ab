//! Exhaustive search for the largest set of receivers that zero-forcing
//! transmit beams can serve interference-free on small instances.
//!
//! Feasibility of one message given the active set only depends on its own
//! transmit set, so the search enumerates active sets and, per active
//! message, looks for any admissible transmit set of size at most `M`.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::assignment::{cooperation_envelope, MessageAssignment};
use crate::channel::{ChannelTopology, Connectivity};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityViolation {
    pub message: usize,
    /// Active receivers reached by the transmit set, the message's own included.
    pub reached: usize,
    /// Transmitters that can usefully carry the message.
    pub transmitters: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<FeasibilityViolation>,
}

/// Size of a maximum matching between `rows` and `cols` along connected
/// pairs; the generic rank of the corresponding channel submatrix.
fn generic_rank(topology: &ChannelTopology, rows: &[usize], cols: &[usize]) -> usize {
    fn augment(
        topology: &ChannelTopology,
        row: usize,
        cols: &[usize],
        owner: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for (c, &tx) in cols.iter().enumerate() {
            if seen[c] || !topology.is_connected(row, tx) {
                continue;
            }
            seen[c] = true;
            if owner[c].is_none_or(|r| augment(topology, r, cols, owner, seen)) {
                owner[c] = Some(row);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; cols.len()];
    rows.iter()
        .filter(|&&r| {
            let mut seen = vec![false; cols.len()];
            augment(topology, r, cols, &mut owner, &mut seen)
        })
        .count()
}

/// Transmitters of `txs` joined to one reaching `message` by a chain of steps
/// of at most `L`. The rest share no receiver with them, so they can carry the
/// message with a zero coefficient and never count against it.
fn relevant_transmitters(topology: &ChannelTopology, message: usize, txs: &[usize]) -> Vec<usize> {
    let Some(l) = topology.interferers() else {
        return txs.to_vec();
    };
    let mut keep: Vec<bool> = txs.iter().map(|&j| topology.is_connected(message, j)).collect();
    let mut grown = true;
    while grown {
        grown = false;
        for a in 0..txs.len() {
            if !keep[a] && (0..txs.len()).any(|b| keep[b] && txs[a].abs_diff(txs[b]) <= l) {
                keep[a] = true;
                grown = true;
            }
        }
    }
    txs.iter().zip(keep).filter(|&(_, k)| k).map(|(&j, _)| j).collect()
}

/// Why `message` with transmit set `txs` cannot be served when `active` is active.
fn message_violation(
    topology: &ChannelTopology,
    message: usize,
    txs: &[usize],
    active: impl Iterator<Item = usize>,
) -> Option<FeasibilityViolation> {
    let txs = relevant_transmitters(topology, message, txs);
    let victims: Vec<usize> = active
        .filter(|&r| r != message && txs.iter().any(|&j| topology.is_connected(r, j)))
        .collect();
    let violation = |reason: &str| FeasibilityViolation {
        message,
        reached: victims.len() + 1,
        transmitters: txs.len(),
        reason: reason.into(),
    };
    if txs.is_empty() {
        return Some(violation("no transmitter of the message reaches its receiver"));
    }
    if victims.len() + 1 > txs.len() {
        return Some(violation("more active receivers reached than transmitters carrying the message"));
    }
    let mut rows = victims.clone();
    let without = generic_rank(topology, &rows, &txs);
    rows.push(message);
    if generic_rank(topology, &rows, &txs) != without + 1 {
        return Some(violation("own channel lies in the span of the channels to be nulled"));
    }
    None
}

/// Whether every active user can be served by zero-forcing beams under
/// `assignment` for a generic realization of `topology`.
pub fn zf_feasible(
    topology: &ChannelTopology,
    assignment: &MessageAssignment,
    active: &BTreeSet<usize>,
) -> Result<FeasibilityReport> {
    let k = topology.users();
    if assignment.users() != k {
        return Err(Error::TopologyMismatch {
            expected: format!("K={k}"),
            found: format!("assignment with K={}", assignment.users()),
        });
    }
    if let Some(&bad) = active.iter().find(|&&i| i < 1 || i > k) {
        return Err(Error::IndexOutOfRange { index: bad, k });
    }
    let violations: Vec<FeasibilityViolation> = active
        .iter()
        .filter_map(|&i| {
            let txs: Vec<usize> = assignment.transmit_set(i).iter().copied().collect();
            message_violation(topology, i, &txs, active.iter().copied())
        })
        .collect();
    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub max_users: usize,
    pub max_cooperation: usize,
    /// Reject any active set with more than `2M` actives in `2M+L` consecutive
    /// users (shifted model only).
    pub window_cap_pruning: bool,
    /// Allow any transmit set instead of the irreducible envelope around each message.
    pub unrestricted: bool,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            max_users: 12,
            max_cooperation: 3,
            window_cap_pruning: true,
            unrestricted: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub value: usize,
    pub assignment: MessageAssignment,
    pub active: BTreeSet<usize>,
    pub nodes: u64,
}

#[derive(Serialize, Deserialize)]
struct SearchResultRepr {
    value: usize,
    witness_sets: Vec<Vec<usize>>,
    active: Vec<usize>,
    nodes: u64,
}

impl Serialize for SearchResult {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SearchResultRepr {
            value: self.value,
            witness_sets: self.assignment.sets().iter().map(|s| s.iter().copied().collect()).collect(),
            active: self.active.iter().copied().collect(),
            nodes: self.nodes,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SearchResult {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SearchResultRepr::deserialize(deserializer)?;
        let users = repr.witness_sets.len();
        Ok(SearchResult {
            value: repr.value,
            assignment: MessageAssignment::from_lists(users, repr.witness_sets).map_err(serde::de::Error::custom)?,
            active: repr.active.into_iter().collect(),
            nodes: repr.nodes,
        })
    }
}

/// How each message's transmit set is chosen during the search.
enum Choice {
    /// Any admissible subset of these candidates, smallest first.
    Free(Vec<Vec<Vec<usize>>>),
    /// The given assignment, fixed.
    Fixed(Vec<Vec<usize>>),
}

struct Search<'a> {
    topology: &'a ChannelTopology,
    users: usize,
    choice: Choice,
    /// Receivers whose activity can influence each message's feasibility.
    relevant: Vec<u64>,
    window: Option<(usize, usize)>,
    memo: HashMap<(usize, u64), Option<usize>>,
    nodes: u64,
    best: Option<(usize, u64)>,
}

impl Search<'_> {
    /// Index into the message's option list of the first feasible transmit set.
    fn feasible_option(&mut self, message: usize, active: u64) -> Option<usize> {
        let key = (message, active & self.relevant[message - 1]);
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        let members = || (1..=self.users).filter(move |&u| active & bit(u) != 0);
        let found = match &self.choice {
            Choice::Free(options) => options[message - 1]
                .iter()
                .position(|txs| message_violation(self.topology, message, txs, members()).is_none()),
            Choice::Fixed(sets) => {
                message_violation(self.topology, message, &sets[message - 1], members()).is_none().then_some(0)
            }
        };
        self.memo.insert(key, found);
        found
    }

    fn window_ok(&self, active: u64, last: usize) -> bool {
        let Some((span, cap)) = self.window else {
            return true;
        };
        if last < span {
            return true;
        }
        let count = (last + 1 - span..=last).filter(|&u| active & bit(u) != 0).count();
        count <= cap
    }

    fn upper_bound(&self, count: usize, remaining: usize) -> usize {
        match self.window {
            Some((span, cap)) => count + remaining.min(remaining.div_ceil(span) * cap),
            None => count + remaining,
        }
    }

    fn dfs(&mut self, next: usize, active: u64, count: usize) {
        self.nodes += 1;
        if self.best.is_none_or(|(v, _)| count > v) {
            self.best = Some((count, active));
        }
        if next > self.users {
            return;
        }
        let remaining = self.users - next + 1;
        if self.best.is_some_and(|(v, _)| self.upper_bound(count, remaining) <= v) {
            return;
        }
        let with = active | bit(next);
        if self.window_ok(with, next) && self.consistent_after_adding(with, next) {
            self.dfs(next + 1, with, count + 1);
        }
        self.dfs(next + 1, active, count);
    }

    // Feasibility only gets harder as receivers are added, so a partial
    // active set that fails can be discarded with all its extensions.
    fn consistent_after_adding(&mut self, active: u64, added: usize) -> bool {
        (1..=added).all(|j| {
            active & bit(j) == 0
                || (self.relevant[j - 1] & bit(added) == 0 && j != added)
                || self.feasible_option(j, active).is_some()
        })
    }
}

fn bit(user: usize) -> u64 {
    1u64 << (user - 1)
}

fn subsets_up_to(candidates: &[usize], max_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    for size in 1..=max_size.min(candidates.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.iter().map(|&p| candidates[p]).collect());
            let Some(pos) = (0..size).rev().find(|&p| idx[p] != p + candidates.len() - size) else {
                break;
            };
            idx[pos] += 1;
            for q in pos + 1..size {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    out
}

fn receivers_reached(topology: &ChannelTopology, txs: impl Iterator<Item = usize>) -> Result<u64> {
    let mut mask = 0;
    for j in txs {
        for r in topology.connected_receivers(j)? {
            mask |= bit(r);
        }
    }
    Ok(mask)
}

fn check_limits(topology: &ChannelTopology, cooperation: usize, limits: &SearchLimits) -> Result<()> {
    let k = topology.users();
    if k > limits.max_users.min(64) {
        return Err(Error::LimitExceeded(format!("K={k} exceeds the search limit {}", limits.max_users.min(64))));
    }
    if cooperation > limits.max_cooperation {
        return Err(Error::LimitExceeded(format!(
            "M={cooperation} exceeds the search limit {}",
            limits.max_cooperation
        )));
    }
    if !topology.is_local() {
        return Err(Error::UnsupportedTopology("zero-forcing search needs a locally connected channel".into()));
    }
    Ok(())
}

fn window_for(topology: &ChannelTopology, cooperation: usize, limits: &SearchLimits) -> Option<(usize, usize)> {
    match topology.connectivity() {
        Connectivity::LocalShifted { interferers }
            if limits.window_cap_pruning && topology.users() >= 2 * cooperation + interferers =>
        {
            Some((2 * cooperation + interferers, 2 * cooperation))
        }
        _ => None,
    }
}

fn finish(mut search: Search<'_>) -> SearchResult {
    search.dfs(1, 0, 0);
    let (value, mask) = search.best.expect("the empty set is always feasible");
    let active: BTreeSet<usize> = (1..=search.users).filter(|&u| mask & bit(u) != 0).collect();
    let sets: Vec<Vec<usize>> = (1..=search.users)
        .map(|i| {
            if !active.contains(&i) {
                return vec![];
            }
            let pick = search.feasible_option(i, mask).expect("witness members are feasible");
            match &search.choice {
                Choice::Free(options) => options[i - 1][pick].clone(),
                Choice::Fixed(sets) => sets[i - 1].clone(),
            }
        })
        .collect();
    SearchResult {
        value,
        assignment: MessageAssignment::from_lists(search.users, sets).expect("indices come from the topology"),
        active,
        nodes: search.nodes,
    }
}

/// Largest number of simultaneously served users over all assignments of
/// cooperation order at most `M` and all active sets. Transmit sets are drawn
/// from [`cooperation_envelope`] unless `limits.unrestricted`. Among optimal
/// active sets the lexicographically smallest is returned, each message
/// paired with its smallest admissible transmit set.
pub fn max_zf_dof(topology: &ChannelTopology, cooperation: usize, limits: SearchLimits) -> Result<SearchResult> {
    check_limits(topology, cooperation, &limits)?;
    let k = topology.users();
    let all: Vec<usize> = (1..=k).collect();
    let mut options = Vec::with_capacity(k);
    let mut relevant = Vec::with_capacity(k);
    for i in 1..=k {
        let candidates: Vec<usize> = if limits.unrestricted {
            all.clone()
        } else {
            cooperation_envelope(topology, i, cooperation)?.collect()
        };
        let opts: Vec<Vec<usize>> = subsets_up_to(&candidates, cooperation)
            .into_iter()
            .filter(|txs| txs.iter().any(|&j| topology.is_connected(i, j)))
            .collect();
        relevant.push(receivers_reached(topology, candidates.iter().copied())?);
        options.push(opts);
    }
    Ok(finish(Search {
        topology,
        users: k,
        choice: Choice::Free(options),
        relevant,
        window: window_for(topology, cooperation, &limits),
        memo: HashMap::new(),
        nodes: 0,
        best: None,
    }))
}

/// Largest feasible active set for a fixed assignment.
pub fn max_zf_dof_for_assignment(topology: &ChannelTopology, assignment: &MessageAssignment) -> Result<SearchResult> {
    let limits = SearchLimits {
        max_cooperation: usize::MAX,
        window_cap_pruning: false,
        ..SearchLimits::default()
    };
    check_limits(topology, assignment.cooperation_order(), &limits)?;
    if assignment.users() != topology.users() {
        return Err(Error::TopologyMismatch {
            expected: format!("K={}", topology.users()),
            found: format!("assignment with K={}", assignment.users()),
        });
    }
    let sets: Vec<Vec<usize>> = assignment.sets().iter().map(|s| s.iter().copied().collect()).collect();
    let relevant = sets
        .iter()
        .map(|s| receivers_reached(topology, s.iter().copied()))
        .collect::<Result<Vec<u64>>>()?;
    Ok(finish(Search {
        topology,
        users: topology.users(),
        choice: Choice::Fixed(sets),
        relevant,
        window: None,
        memo: HashMap::new(),
        nodes: 0,
        best: None,
    }))
}

/// True iff every `2M+L` consecutive users hold at most `2M` active ones.
pub fn window_cap_check(active: &BTreeSet<usize>, users: usize, cooperation: usize, interferers: usize) -> bool {
    let span = 2 * cooperation + interferers;
    if users < span {
        return true;
    }
    (1..=users + 1 - span).all(|start| active.range(start..start + span).count() <= 2 * cooperation)
}
