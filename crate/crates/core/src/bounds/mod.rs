//! Certified upper bounds on the sum degrees of freedom.
//!
//! * [`subset_bound`] minimises `max(|C_S|, K - |S|)` over transmitter subsets.
//! * [`greedy_witness`] and [`m3_witness`] construct explicit subsets whose
//!   value proves the `(M-1)/M` and `5/8` per-user bounds for fully connected
//!   channels.
//! * [`closed_form_tau`] tabulates the known asymptotic per-user values.
//! * [`no_coop_bound`] aggregates pairwise constraints `d_i + d_s <= 1` for
//!   locally connected channels without cooperation.

mod closed_form;
mod pairwise;
mod subset;
mod witness;

use std::collections::BTreeSet;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

pub use closed_form::{closed_form_tau, TauConnectivity, TauKind, TauRestriction, TauSetting, TauValue};
pub use pairwise::{no_coop_bound, pairwise_constraints, PAIRWISE_LIMIT};
pub use subset::{subset_bound, SubsetMode, EXACT_SUBSET_LIMIT};
pub use witness::{greedy_witness, m3_witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    SubsetExact,
    SubsetGreedy,
    ClosedForm,
    Pairwise,
}

/// Counters of the cooperation-order-3 construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct M3Counters {
    pub x1: usize,
    pub x2: usize,
    pub x3: usize,
}

/// A transmitter subset `S` together with the messages `C_S` it carries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    #[serde(rename = "S")]
    pub transmitters: BTreeSet<usize>,
    #[serde(rename = "C_S")]
    pub carried: BTreeSet<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counters: Option<M3Counters>,
}

impl WitnessRecord {
    /// `max(|C_S|, K - |S|)`.
    pub fn value(&self, users: usize) -> usize {
        self.carried.len().max(users - self.transmitters.len())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DofBound {
    pub value: Rational64,
    pub witness: Option<WitnessRecord>,
    pub method: BoundMethod,
}

impl DofBound {
    pub fn from_witness(users: usize, witness: WitnessRecord, method: BoundMethod) -> Self {
        Self {
            value: Rational64::from_integer(witness.value(users) as i64),
            witness: Some(witness),
            method,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DofBoundRepr {
    value_num: i64,
    value_den: i64,
    #[serde(rename = "witness_S")]
    witness_s: Vec<usize>,
    #[serde(rename = "witness_CS")]
    witness_cs: Vec<usize>,
    method: BoundMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counters: Option<M3Counters>,
}

impl Serialize for DofBound {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let (witness_s, witness_cs, counters) = match &self.witness {
            Some(w) => (
                w.transmitters.iter().copied().collect(),
                w.carried.iter().copied().collect(),
                w.counters,
            ),
            None => (Vec::new(), Vec::new(), None),
        };
        DofBoundRepr {
            value_num: *self.value.numer(),
            value_den: *self.value.denom(),
            witness_s,
            witness_cs,
            method: self.method,
            counters,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DofBound {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = DofBoundRepr::deserialize(deserializer)?;
        if repr.value_den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        let has_witness = !repr.witness_s.is_empty()
            || !repr.witness_cs.is_empty()
            || matches!(repr.method, BoundMethod::SubsetExact | BoundMethod::SubsetGreedy);
        Ok(DofBound {
            value: Rational64::new(repr.value_num, repr.value_den),
            witness: has_witness.then(|| WitnessRecord {
                transmitters: repr.witness_s.into_iter().collect(),
                carried: repr.witness_cs.into_iter().collect(),
                counters: repr.counters,
            }),
            method: repr.method,
        })
    }
}
