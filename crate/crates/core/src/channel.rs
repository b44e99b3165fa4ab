//! Channel connectivity models and generic channel realizations.
//!
//! All user, transmitter and receiver indices in the public API are 1-based:
//! a `K`-user channel has transmitters and receivers `1..=K`.
//!
//! Three connectivity patterns are supported:
//!
//! * **fully connected** – every transmitter reaches every receiver;
//! * **local, original orientation** – transmitter `j` reaches receiver `i`
//!   iff `i - ceil(L/2) <= j <= i + floor(L/2)`;
//! * **local, shifted orientation** – transmitter `j` reaches receivers
//!   `j, j+1, ..., j+L`.
//!
//! The shifted orientation is the working model for the zero-forcing scheme,
//! the search oracle and the converse reconstruction; [`ChannelTopology::equivalent_shift`]
//! converts an original-orientation channel into it.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Non-zero coefficients are redrawn until their magnitude reaches this floor.
pub const GENERICITY_FLOOR: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TopologyKind {
    FullyConnected,
    LocalOriginal,
    LocalShifted,
}

impl TopologyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TopologyKind::FullyConnected => "full",
            TopologyKind::LocalOriginal => "local_original",
            TopologyKind::LocalShifted => "local_shifted",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full" => Some(TopologyKind::FullyConnected),
            "local_original" => Some(TopologyKind::LocalOriginal),
            "local_shifted" => Some(TopologyKind::LocalShifted),
            _ => None,
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connectivity {
    FullyConnected,
    LocalOriginal { interferers: usize },
    LocalShifted { interferers: usize },
}

/// Validated connectivity pattern of a `K`-user interference channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChannelTopology {
    users: usize,
    connectivity: Connectivity,
}

/// Result of [`ChannelTopology::equivalent_shift`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftedEquivalent {
    pub topology: ChannelTopology,
    /// Number of silenced leading transmitters (and deactivated trailing receivers).
    pub dropped: usize,
}

impl ShiftedEquivalent {
    /// Original-channel transmitter that becomes transmitter `tx` of the shifted channel.
    pub fn original_transmitter(&self, tx: usize) -> usize {
        tx + self.dropped
    }

    /// Receivers keep their labels.
    pub fn original_receiver(&self, rx: usize) -> usize {
        rx
    }
}

impl ChannelTopology {
    /// Builds and validates a topology. `interferers` (L) is ignored for the
    /// fully connected kind.
    pub fn new(kind: TopologyKind, users: usize, interferers: i64) -> Result<Self> {
        if users < 1 {
            return Err(Error::InvalidK {
                k: users,
                reason: "need at least one user".into(),
            });
        }
        let check_l = || -> Result<usize> {
            if interferers < 0 || interferers as u64 >= users as u64 {
                Err(Error::InvalidL {
                    l: interferers,
                    k: users,
                })
            } else {
                Ok(interferers as usize)
            }
        };
        let connectivity = match kind {
            TopologyKind::FullyConnected => Connectivity::FullyConnected,
            TopologyKind::LocalOriginal => Connectivity::LocalOriginal {
                interferers: check_l()?,
            },
            TopologyKind::LocalShifted => Connectivity::LocalShifted {
                interferers: check_l()?,
            },
        };
        Ok(Self {
            users,
            connectivity,
        })
    }

    pub fn fully_connected(users: usize) -> Result<Self> {
        Self::new(TopologyKind::FullyConnected, users, 0)
    }

    pub fn local_original(users: usize, interferers: usize) -> Result<Self> {
        Self::new(TopologyKind::LocalOriginal, users, interferers as i64)
    }

    pub fn local_shifted(users: usize, interferers: usize) -> Result<Self> {
        Self::new(TopologyKind::LocalShifted, users, interferers as i64)
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn connectivity(&self) -> Connectivity {
        self.connectivity
    }

    pub fn kind(&self) -> TopologyKind {
        match self.connectivity {
            Connectivity::FullyConnected => TopologyKind::FullyConnected,
            Connectivity::LocalOriginal { .. } => TopologyKind::LocalOriginal,
            Connectivity::LocalShifted { .. } => TopologyKind::LocalShifted,
        }
    }

    /// The connectivity parameter L, or `None` when fully connected.
    pub fn interferers(&self) -> Option<usize> {
        match self.connectivity {
            Connectivity::FullyConnected => None,
            Connectivity::LocalOriginal { interferers }
            | Connectivity::LocalShifted { interferers } => Some(interferers),
        }
    }

    pub fn is_local(&self) -> bool {
        !matches!(self.connectivity, Connectivity::FullyConnected)
    }

    /// Whether transmitter `tx` reaches receiver `rx`. Out-of-range indices
    /// are simply not connected.
    pub fn is_connected(&self, rx: usize, tx: usize) -> bool {
        if rx < 1 || tx < 1 || rx > self.users || tx > self.users {
            return false;
        }
        let (rx, tx) = (rx as i64, tx as i64);
        match self.connectivity {
            Connectivity::FullyConnected => true,
            Connectivity::LocalOriginal { interferers } => {
                let l = interferers as i64;
                let before = (l + 1) / 2;
                let after = l / 2;
                tx >= rx - before && tx <= rx + after
            }
            Connectivity::LocalShifted { interferers } => {
                rx >= tx && rx <= tx + interferers as i64
            }
        }
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index < 1 || index > self.users {
            Err(Error::IndexOutOfRange {
                index,
                k: self.users,
            })
        } else {
            Ok(())
        }
    }

    /// Receivers reached by transmitter `tx`, ascending.
    pub fn connected_receivers(&self, tx: usize) -> Result<Vec<usize>> {
        self.check_index(tx)?;
        Ok((1..=self.users)
            .filter(|&rx| self.is_connected(rx, tx))
            .collect())
    }

    /// Transmitters heard by receiver `rx`, ascending.
    pub fn connected_transmitters(&self, rx: usize) -> Result<Vec<usize>> {
        self.check_index(rx)?;
        Ok((1..=self.users)
            .filter(|&tx| self.is_connected(rx, tx))
            .collect())
    }

    /// Converts an original-orientation local channel into the shifted one by
    /// silencing the first `floor(L/2)` transmitters, dropping the last
    /// `floor(L/2)` receivers and relabelling the remaining transmitters.
    pub fn equivalent_shift(&self) -> Result<ShiftedEquivalent> {
        let Connectivity::LocalOriginal { interferers } = self.connectivity else {
            return Err(Error::TopologyMismatch {
                expected: TopologyKind::LocalOriginal.to_string(),
                found: self.kind().to_string(),
            });
        };
        let dropped = interferers / 2;
        let users = self.users - dropped;
        // When L >= K - floor(L/2) every shifted transmitter already reaches all
        // later receivers, so capping L keeps the connectivity unchanged.
        let topology = ChannelTopology::local_shifted(users, interferers.min(users - 1))?;
        Ok(ShiftedEquivalent { topology, dropped })
    }
}

impl fmt::Display for ChannelTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.interferers() {
            Some(l) => write!(f, "{}(K={}, L={})", self.kind(), self.users, l),
            None => write!(f, "{}(K={})", self.kind(), self.users),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyRepr {
    kind: String,
    #[serde(rename = "K")]
    users: usize,
    #[serde(rename = "L", default)]
    interferers: i64,
}

impl Serialize for ChannelTopology {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TopologyRepr {
            kind: self.kind().as_str().to_string(),
            users: self.users,
            interferers: self.interferers().unwrap_or(0) as i64,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ChannelTopology {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = TopologyRepr::deserialize(deserializer)?;
        let kind = TopologyKind::parse(&repr.kind).ok_or_else(|| {
            serde::de::Error::custom(format!("unknown topology kind {:?}", repr.kind))
        })?;
        ChannelTopology::new(kind, repr.users, repr.interferers).map_err(serde::de::Error::custom)
    }
}

/// One sampled set of real channel coefficients `H[rx][tx]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    topology: ChannelTopology,
    seed: u64,
    coefficients: Vec<f64>,
}

impl ChannelRealization {
    /// Samples every connected coefficient i.i.d. standard normal, redrawing
    /// values below [`GENERICITY_FLOOR`] in magnitude. Disconnected pairs are
    /// exactly zero. Identical `(topology, seed)` gives identical output.
    pub fn sample(topology: ChannelTopology, seed: u64) -> Self {
        let k = topology.users();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coefficients = vec![0.0; k * k];
        for rx in 1..=k {
            for tx in 1..=k {
                if topology.is_connected(rx, tx) {
                    coefficients[(rx - 1) * k + (tx - 1)] = loop {
                        let v: f64 = rng.sample(StandardNormal);
                        if v.abs() >= GENERICITY_FLOOR {
                            break v;
                        }
                    };
                }
            }
        }
        Self {
            topology,
            seed,
            coefficients,
        }
    }

    /// Wraps explicit coefficients, checking the zero pattern against the topology.
    pub fn from_coefficients(
        topology: ChannelTopology,
        seed: u64,
        coefficients: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = topology.users();
        if coefficients.len() != k || coefficients.iter().any(|row| row.len() != k) {
            return Err(Error::Parse(format!("expected a {k}x{k} coefficient matrix")));
        }
        for (r, row) in coefficients.iter().enumerate() {
            for (t, &v) in row.iter().enumerate() {
                let connected = topology.is_connected(r + 1, t + 1);
                if connected == (v == 0.0) || !v.is_finite() {
                    return Err(Error::Parse(format!(
                        "H[{}][{}] = {v} contradicts {topology}",
                        r + 1,
                        t + 1
                    )));
                }
            }
        }
        Ok(Self {
            topology,
            seed,
            coefficients: coefficients.into_iter().flatten().collect(),
        })
    }

    pub fn topology(&self) -> &ChannelTopology {
        &self.topology
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn users(&self) -> usize {
        self.topology.users()
    }

    /// `H[rx][tx]`; zero for out-of-range indices.
    pub fn gain(&self, rx: usize, tx: usize) -> f64 {
        let k = self.users();
        if rx < 1 || tx < 1 || rx > k || tx > k {
            return 0.0;
        }
        self.coefficients[(rx - 1) * k + (tx - 1)]
    }

    pub fn row(&self, rx: usize) -> &[f64] {
        let k = self.users();
        &self.coefficients[(rx - 1) * k..rx * k]
    }

    /// CSV export: one line per receiver, `K` comma-separated coefficients.
    pub fn to_csv(&self) -> String {
        let k = self.users();
        let mut out = String::new();
        for rx in 1..=k {
            let line: Vec<String> = self.row(rx).iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(topology: ChannelTopology, seed: u64, text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                line.split(',')
                    .map(|cell| {
                        cell.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Parse(format!("{cell:?}: {e}")))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_coefficients(topology, seed, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn original_orientation_l2_has_one_neighbor_each_side() {
        let t = ChannelTopology::local_original(5, 2).unwrap();
        assert_eq!(t.connected_transmitters(3).unwrap(), vec![2, 3, 4]);
    }

    #[test]
    fn shifted_orientation_reaches_following_receivers() {
        let t = ChannelTopology::local_shifted(5, 1).unwrap();
        assert_eq!(t.connected_receivers(2).unwrap(), vec![2, 3]);
        assert_eq!(t.connected_receivers(5).unwrap(), vec![5]);
    }

    #[test]
    fn zero_interferers_is_diagonal() {
        let t = ChannelTopology::local_original(3, 0).unwrap();
        for rx in 1..=3 {
            assert_eq!(t.connected_transmitters(rx).unwrap(), vec![rx]);
        }
    }

    #[test]
    fn fully_connected_reaches_everyone() {
        let t = ChannelTopology::fully_connected(4).unwrap();
        assert_eq!(t.connected_receivers(1).unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            ChannelTopology::local_shifted(5, 5),
            Err(Error::InvalidL { l: 5, k: 5 })
        ));
        assert!(matches!(
            ChannelTopology::new(TopologyKind::LocalOriginal, 5, -1),
            Err(Error::InvalidL { .. })
        ));
        assert!(matches!(
            ChannelTopology::fully_connected(0),
            Err(Error::InvalidK { .. })
        ));
        // L is ignored for the fully connected kind
        assert!(ChannelTopology::new(TopologyKind::FullyConnected, 3, 99).is_ok());
        let t = ChannelTopology::local_shifted(4, 1).unwrap();
        assert!(matches!(
            t.connected_receivers(5),
            Err(Error::IndexOutOfRange { index: 5, k: 4 })
        ));
        assert!(matches!(
            t.connected_receivers(0),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn equivalent_shift_drops_floor_half_l() {
        let cases = [(5, 2, 4, 1), (10, 4, 8, 2), (3, 1, 3, 0)];
        for (k, l, k_new, x) in cases {
            let eq = ChannelTopology::local_original(k, l)
                .unwrap()
                .equivalent_shift()
                .unwrap();
            assert_eq!(eq.topology, ChannelTopology::local_shifted(k_new, l).unwrap());
            assert_eq!(eq.dropped, x);
        }
        assert!(ChannelTopology::local_shifted(4, 1)
            .unwrap()
            .equivalent_shift()
            .is_err());
    }

    #[test]
    fn equivalent_shift_matches_restricted_original() {
        for k in 2..=12 {
            for l in 0..k {
                let orig = ChannelTopology::local_original(k, l).unwrap();
                let eq = orig.equivalent_shift().unwrap();
                let shifted = eq.topology;
                for rx in 1..=shifted.users() {
                    for tx in 1..=shifted.users() {
                        assert_eq!(
                            shifted.is_connected(rx, tx),
                            orig.is_connected(eq.original_receiver(rx), eq.original_transmitter(tx)),
                            "K={k} L={l} rx={rx} tx={tx}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn realization_is_deterministic_and_respects_pattern() {
        let t = ChannelTopology::local_shifted(5, 1).unwrap();
        let a = ChannelRealization::sample(t, 11);
        let b = ChannelRealization::sample(t, 11);
        assert_eq!(a, b);
        assert_eq!(a.gain(4, 2), 0.0);
        let c = ChannelRealization::sample(t, 12);
        assert_ne!(a, c);
    }

    #[test]
    fn fully_connected_realization_is_generic() {
        let t = ChannelTopology::fully_connected(6).unwrap();
        let r = ChannelRealization::sample(t, 7);
        for rx in 1..=6 {
            for tx in 1..=6 {
                assert!(r.gain(rx, tx).abs() >= GENERICITY_FLOOR);
            }
        }
    }

    #[test]
    fn support_matches_connected_receivers() {
        let t = ChannelTopology::local_original(9, 3).unwrap();
        let r = ChannelRealization::sample(t, 3);
        for tx in 1..=9 {
            let support: Vec<usize> = (1..=9).filter(|&rx| r.gain(rx, tx) != 0.0).collect();
            assert_eq!(support, t.connected_receivers(tx).unwrap());
        }
    }

    #[test]
    fn topology_json_round_trip() {
        let t = ChannelTopology::local_shifted(7, 1).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"kind":"local_shifted","K":7,"L":1}"#);
        let back: ChannelTopology = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        let bad: std::result::Result<ChannelTopology, _> =
            serde_json::from_str(r#"{"kind":"local_shifted","K":7,"L":9}"#);
        assert!(bad.is_err());
        let full: ChannelTopology = serde_json::from_str(r#"{"kind":"full","K":3}"#).unwrap();
        assert_eq!(full.kind(), TopologyKind::FullyConnected);
    }

    #[test]
    fn csv_round_trip() {
        let t = ChannelTopology::local_shifted(4, 2).unwrap();
        let r = ChannelRealization::sample(t, 5);
        let back = ChannelRealization::from_csv(t, 5, &r.to_csv()).unwrap();
        assert_eq!(back, r);
    }
}
