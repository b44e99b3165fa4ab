//! Cluster-based zero-forcing scheme for the locally connected shifted model.
//!
//! The network is tiled by clusters of `2M+L` users. In a cluster the first
//! `M` users (`S1`) and the last `M` users (`S2`) are served, the middle `L`
//! receivers are inactive and the last `L` transmitters stay silent, which
//! decouples neighbouring clusters. Each message's beam is built
//! successively: unit coefficient at its base transmitter, then one new
//! coefficient per receiver it must be invisible at.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::assignment::{check_scheme_parameters, cluster_transmit_lists, MessageAssignment};
use crate::channel::{ChannelRealization, ChannelTopology, Connectivity};
use crate::error::{Error, Result};

/// Smallest divisor accepted by the successive design.
pub const DIVISOR_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    /// Users of this cluster are `offset+1 ..= offset+2M+L`.
    pub offset: usize,
    #[serde(rename = "S1")]
    pub s1: Vec<usize>,
    #[serde(rename = "S2")]
    pub s2: Vec<usize>,
    pub inactive_rx: Vec<usize>,
    pub silent_tx: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemePlan {
    #[serde(rename = "K")]
    pub users: usize,
    #[serde(rename = "M")]
    pub cooperation: usize,
    #[serde(rename = "L")]
    pub interferers: usize,
    /// Users `1..=origin` precede the first cluster.
    pub origin: usize,
    pub clusters: Vec<Cluster>,
    pub assignment: MessageAssignment,
    /// Transmit set of each served message in design order; the first entry is the base.
    pub transmit_order: BTreeMap<usize, Vec<usize>>,
    /// Receivers each served message is zero-forced at, in design order.
    pub cancel_sets: BTreeMap<usize, Vec<usize>>,
}

impl SchemePlan {
    pub fn span(&self) -> usize {
        2 * self.cooperation + self.interferers
    }

    pub fn active_users(&self) -> BTreeSet<usize> {
        self.transmit_order.keys().copied().collect()
    }

    pub fn is_active(&self, user: usize) -> bool {
        self.transmit_order.contains_key(&user)
    }

    /// Users covered by some cluster, active or not.
    pub fn covered_users(&self) -> BTreeSet<usize> {
        self.clusters
            .iter()
            .flat_map(|c| c.offset + 1..=c.offset + self.span())
            .collect()
    }

    pub fn topology(&self) -> Result<ChannelTopology> {
        ChannelTopology::local_shifted(self.users, self.interferers)
    }
}

/// Cluster plan starting at user 1.
pub fn plan_clusters(users: usize, cooperation: usize, interferers: usize) -> Result<SchemePlan> {
    plan_clusters_from(users, cooperation, interferers, 0)
}

/// Cluster plan whose first cluster starts after `origin` users. Clusters
/// never wrap past user `K`; users outside every full cluster are inactive.
pub fn plan_clusters_from(users: usize, cooperation: usize, interferers: usize, origin: usize) -> Result<SchemePlan> {
    let span = check_scheme_parameters(users, cooperation, interferers)?;
    if 2 * cooperation < interferers {
        return Err(Error::IaRegime {
            m: cooperation,
            l: interferers,
        });
    }
    let (m, l) = (cooperation, interferers);
    let mut clusters = Vec::new();
    let mut sets = vec![BTreeSet::new(); users];
    let mut transmit_order = BTreeMap::new();
    let mut cancel_sets = BTreeMap::new();
    let mut offset = origin;
    while offset + span <= users {
        clusters.push(Cluster {
            offset,
            s1: (offset + 1..=offset + m).collect(),
            s2: (offset + l + m + 1..=offset + span).collect(),
            inactive_rx: (offset + m + 1..=offset + m + l).collect(),
            silent_tx: (offset + span - l + 1..=offset + span).collect(),
        });
        for (msg, list) in cluster_transmit_lists(offset, m, l) {
            let r = msg - offset;
            let cancel: Vec<usize> = if r <= m {
                (msg + 1..=offset + m).collect()
            } else {
                (offset + l + m + 1..msg).rev().collect()
            };
            sets[msg - 1] = list.iter().copied().collect();
            transmit_order.insert(msg, list);
            cancel_sets.insert(msg, cancel);
        }
        offset += span;
    }
    Ok(SchemePlan {
        users,
        cooperation,
        interferers,
        origin,
        clusters,
        assignment: MessageAssignment::new(users, sets)?,
        transmit_order,
        cancel_sets,
    })
}

/// One plan per session; session `t` starts its tiling after `t mod (2M+L)` users.
pub fn reuse_schedule(users: usize, cooperation: usize, interferers: usize, sessions: usize) -> Result<Vec<SchemePlan>> {
    let span = check_scheme_parameters(users, cooperation, interferers)?;
    if sessions == 0 {
        return Err(Error::Parse("sessions must be at least 1".into()));
    }
    (0..sessions)
        .map(|t| plan_clusters_from(users, cooperation, interferers, t % span))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanDof {
    pub sessions: usize,
    #[serde(with = "crate::rational::vec")]
    pub per_user: Vec<Rational64>,
    #[serde(with = "crate::rational")]
    pub average: Rational64,
    /// Users covered by a cluster in every session.
    pub interior: Vec<usize>,
    #[serde(with = "crate::rational::option")]
    pub interior_average: Option<Rational64>,
}

/// Fraction of sessions in which each user is active.
pub fn plan_dof(plans: &[SchemePlan]) -> Result<PlanDof> {
    let first = plans
        .first()
        .ok_or_else(|| Error::Parse("plan_dof needs at least one plan".into()))?;
    let k = first.users;
    if plans.iter().any(|p| p.users != k) {
        return Err(Error::TopologyMismatch {
            expected: format!("K={k} in every session"),
            found: "plans with different K".into(),
        });
    }
    let sessions = plans.len() as i64;
    let per_user: Vec<Rational64> = (1..=k)
        .map(|u| Rational64::new(plans.iter().filter(|p| p.is_active(u)).count() as i64, sessions))
        .collect();
    let average = per_user.iter().sum::<Rational64>() / Rational64::from_integer(k as i64);
    let covered: Vec<BTreeSet<usize>> = plans.iter().map(SchemePlan::covered_users).collect();
    let interior: Vec<usize> = (1..=k).filter(|u| covered.iter().all(|c| c.contains(u))).collect();
    let interior_average = (!interior.is_empty()).then(|| {
        interior.iter().map(|&u| per_user[u - 1]).sum::<Rational64>() / Rational64::from_integer(interior.len() as i64)
    });
    Ok(PlanDof {
        sessions: plans.len(),
        per_user,
        average,
        interior,
        interior_average,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageBeam {
    pub base: usize,
    pub coefficients: BTreeMap<usize, f64>,
}

/// Per-message transmit coefficients; transmitter `j` sends
/// `X_j = sum_i c_{j,i} s_i` over the messages it carries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BeamDesign {
    pub beams: BTreeMap<usize, MessageBeam>,
}

impl BeamDesign {
    /// `sum_j H[rx][j] c_{j,message}`.
    pub fn effective_gain(&self, realization: &ChannelRealization, message: usize, rx: usize) -> f64 {
        self.beams.get(&message).map_or(0.0, |b| {
            b.coefficients.iter().map(|(&j, &c)| realization.gain(rx, j) * c).sum()
        })
    }

    /// `sum_i c_{j,i}^2` for transmitter `j`.
    pub fn transmit_load(&self, tx: usize) -> f64 {
        self.beams
            .values()
            .filter_map(|b| b.coefficients.get(&tx))
            .map(|c| c * c)
            .sum()
    }

    pub fn max_transmit_load(&self) -> f64 {
        let txs: BTreeSet<usize> = self.beams.values().flat_map(|b| b.coefficients.keys().copied()).collect();
        txs.into_iter().map(|j| self.transmit_load(j)).fold(0.0, f64::max)
    }

    /// CSV with header `message,tx,coefficient`; the base transmitter comes first per message.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(["message", "tx", "coefficient"])?;
        for (&message, beam) in &self.beams {
            let order = std::iter::once(beam.base).chain(beam.coefficients.keys().copied().filter(|&j| j != beam.base));
            for j in order {
                writer.write_record([
                    message.to_string(),
                    j.to_string(),
                    format!("{:.16e}", beam.coefficients[&j]),
                ])?;
            }
        }
        let bytes = writer.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Inverse of [`BeamDesign::to_csv`]: the first row of each message names its base.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut beams: BTreeMap<usize, MessageBeam> = BTreeMap::new();
        for record in reader.deserialize() {
            let (message, tx, coefficient): (usize, usize, f64) = record?;
            beams
                .entry(message)
                .or_insert_with(|| MessageBeam {
                    base: tx,
                    coefficients: BTreeMap::new(),
                })
                .coefficients
                .insert(tx, coefficient);
        }
        Ok(Self { beams })
    }
}

fn check_realization(realization: &ChannelRealization, plan: &SchemePlan) -> Result<()> {
    let expected = Connectivity::LocalShifted {
        interferers: plan.interferers,
    };
    if realization.users() != plan.users || realization.topology().connectivity() != expected {
        return Err(Error::TopologyMismatch {
            expected: format!("local_shifted K={} L={}", plan.users, plan.interferers),
            found: format!(
                "{} K={} L={}",
                realization.topology().kind().as_str(),
                realization.users(),
                realization.topology().interferers().unwrap_or(0)
            ),
        });
    }
    Ok(())
}

/// Successive beam design for every served message of `plan`.
pub fn design_beams(realization: &ChannelRealization, plan: &SchemePlan) -> Result<BeamDesign> {
    check_realization(realization, plan)?;
    let topology = realization.topology();
    let mut beams = BTreeMap::new();
    for (&message, order) in &plan.transmit_order {
        let base = order[0];
        let mut coefficients = BTreeMap::from([(base, 1.0)]);
        for &rx in &plan.cancel_sets[&message] {
            let unset: Vec<usize> = order
                .iter()
                .copied()
                .filter(|&j| !coefficients.contains_key(&j) && topology.is_connected(rx, j))
                .collect();
            let [j] = unset[..] else {
                return Err(Error::UnsolvableCancellation {
                    message,
                    rx,
                    reason: format!("{} unset connected transmitters, need exactly 1", unset.len()),
                });
            };
            let divisor = realization.gain(rx, j);
            if divisor.abs() < DIVISOR_FLOOR {
                return Err(Error::SingularChannel { rx, tx: j, value: divisor });
            }
            let accumulated: f64 = coefficients.iter().map(|(&t, &c)| realization.gain(rx, t) * c).sum();
            coefficients.insert(j, -accumulated / divisor);
        }
        beams.insert(message, MessageBeam { base, coefficients });
    }
    Ok(BeamDesign { beams })
}

/// Zero-forcing beams for an arbitrary assignment and active set: each active
/// message is projected onto the null space of the channels from its
/// transmitters to the other active receivers they reach, then scaled so its
/// largest coefficient is 1 (that transmitter becomes the base).
pub fn design_projection_beams(
    realization: &ChannelRealization,
    assignment: &MessageAssignment,
    active: &BTreeSet<usize>,
) -> Result<BeamDesign> {
    let k = realization.users();
    if assignment.users() != k {
        return Err(Error::TopologyMismatch {
            expected: format!("K={k}"),
            found: format!("assignment with K={}", assignment.users()),
        });
    }
    let topology = realization.topology();
    let mut beams = BTreeMap::new();
    for &message in active {
        if message < 1 || message > k {
            return Err(Error::IndexOutOfRange { index: message, k });
        }
        let txs: Vec<usize> = assignment.transmit_set(message).iter().copied().collect();
        let victims: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&r| r != message && txs.iter().any(|&j| topology.is_connected(r, j)))
            .collect();
        let own = DVector::from_iterator(txs.len(), txs.iter().map(|&j| realization.gain(message, j)));
        let c = if victims.is_empty() {
            own
        } else {
            let a = DMatrix::from_fn(victims.len(), txs.len(), |r, col| realization.gain(victims[r], txs[col]));
            let pinv = a
                .clone()
                .pseudo_inverse(DIVISOR_FLOOR)
                .map_err(|e| Error::InternalInvariant(e.to_string()))?;
            let projector = DMatrix::identity(txs.len(), txs.len()) - pinv * a;
            projector * own
        };
        let (pos, peak) = c
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(p, v)| (p, *v))
            .ok_or_else(|| Error::UnsolvableCancellation {
                message,
                rx: message,
                reason: "empty transmit set".into(),
            })?;
        if peak.abs() < DIVISOR_FLOOR {
            return Err(Error::UnsolvableCancellation {
                message,
                rx: message,
                reason: "own signal lies in the span of the zero-forcing constraints".into(),
            });
        }
        beams.insert(
            message,
            MessageBeam {
                base: txs[pos],
                coefficients: txs.iter().zip(c.iter()).map(|(&j, &v)| (j, v / peak)).collect(),
            },
        );
    }
    Ok(BeamDesign { beams })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RxResidual {
    pub rx: usize,
    pub own_gain: f64,
    /// Sum of `|effective gain|` of every other message at this receiver.
    pub interference: f64,
    /// `interference / |own_gain|`.
    pub relative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterferenceReport {
    pub max_residual: f64,
    pub per_rx: Vec<RxResidual>,
    /// `(message, rx)` pairs where an `S1` message's transmitter reaches an
    /// `S2` receiver of the same cluster or vice versa.
    pub silence_violations: Vec<(usize, usize)>,
}

impl InterferenceReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_residual < tolerance && self.silence_violations.is_empty()
    }
}

/// Residual interference at each active receiver, relative to its own gain,
/// plus a combinatorial check that `S1` and `S2` cannot hear each other.
pub fn verify_zero_interference(
    realization: &ChannelRealization,
    plan: &SchemePlan,
    beams: &BeamDesign,
) -> InterferenceReport {
    let topology = realization.topology();
    let mut per_rx = Vec::new();
    let mut max_residual: f64 = 0.0;
    for rx in plan.active_users() {
        let own_gain = beams.effective_gain(realization, rx, rx);
        let interference: f64 = beams
            .beams
            .keys()
            .filter(|&&i| i != rx)
            .map(|&i| beams.effective_gain(realization, i, rx).abs())
            .sum();
        let relative = if own_gain == 0.0 {
            f64::INFINITY
        } else {
            interference / own_gain.abs()
        };
        max_residual = max_residual.max(relative);
        per_rx.push(RxResidual {
            rx,
            own_gain,
            interference,
            relative,
        });
    }
    let mut silence_violations = Vec::new();
    for cluster in &plan.clusters {
        for (senders, listeners) in [(&cluster.s1, &cluster.s2), (&cluster.s2, &cluster.s1)] {
            for &message in senders {
                for &rx in listeners {
                    if plan.assignment.transmit_set(message).iter().any(|&j| topology.is_connected(rx, j)) {
                        silence_violations.push((message, rx));
                    }
                }
            }
        }
    }
    InterferenceReport {
        max_residual,
        per_rx,
        silence_violations,
    }
}
