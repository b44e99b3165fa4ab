//! Link-level checks: analytic SINR rates over a power sweep, DoF slope
//! estimates, and the successive reconstruction used in the converse for
//! Wyner's asymmetric model.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, Connectivity};
use crate::error::{Error, Result};
use crate::zf_scheme::{design_beams, BeamDesign, SchemePlan, DIVISOR_FLOOR};

/// Environment variable capping the worker threads used for trials.
pub const THREADS_ENV: &str = "COMP_DOF_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Transmit powers `P` (linear), strictly increasing, each at least 1.
    pub power_sweep: Vec<f64>,
    /// Independent channel realizations averaged by [`simulate_plan`].
    pub trials: usize,
    pub seed: u64,
}

impl SimulationConfig {
    pub fn new(power_sweep: Vec<f64>, trials: usize, seed: u64) -> Result<Self> {
        if power_sweep.is_empty() {
            return Err(Error::InsufficientSweep("empty power sweep".into()));
        }
        if power_sweep.iter().any(|p| !p.is_finite() || *p < 1.0) {
            return Err(Error::InsufficientSweep("powers must be finite and at least 1".into()));
        }
        if power_sweep.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InsufficientSweep("powers must be strictly increasing".into()));
        }
        if trials == 0 {
            return Err(Error::Parse("trials must be at least 1".into()));
        }
        Ok(Self {
            power_sweep,
            trials,
            seed,
        })
    }

    /// Sweep `start_db, start_db + step_db, ...` up to `end_db` inclusive.
    pub fn from_db(start_db: f64, end_db: f64, step_db: f64, trials: usize, seed: u64) -> Result<Self> {
        if step_db.is_nan() || step_db <= 0.0 || end_db < start_db {
            return Err(Error::InsufficientSweep(format!("bad dB range {start_db}:{end_db}:{step_db}")));
        }
        let count = ((end_db - start_db) / step_db + 1e-9).floor() as usize + 1;
        let powers = (0..count)
            .map(|t| 10f64.powf((start_db + t as f64 * step_db) / 10.0))
            .collect();
        Self::new(powers, trials, seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSamples {
    pub powers: Vec<f64>,
    /// `rates[i-1][p]`: rate of user `i` at `powers[p]`, in bits per channel use.
    pub rates: Vec<Vec<f64>>,
    /// Per-user DoF estimates when the sweep is wide enough.
    pub slopes: Option<Vec<f64>>,
}

/// Per-message stream powers at total power `P`. Each beam is first scaled to
/// unit norm, then all streams share `P / max_j sum_i c_{j,i}^2` so that no
/// transmitter exceeds `P`.
fn stream_powers(beams: &BeamDesign, power: f64) -> Result<BTreeMap<usize, f64>> {
    let mut norms = BTreeMap::new();
    for (&message, beam) in &beams.beams {
        let norm: f64 = beam.coefficients.values().map(|c| c * c).sum();
        if !norm.is_finite() {
            return Err(Error::PowerViolation(format!("non-finite beam for message {message}")));
        }
        if norm > 0.0 {
            norms.insert(message, norm);
        }
    }
    let mut load: BTreeMap<usize, f64> = BTreeMap::new();
    for (message, norm) in &norms {
        for (&j, &c) in &beams.beams[message].coefficients {
            *load.entry(j).or_default() += c * c / norm;
        }
    }
    let max_load = load.values().copied().fold(0.0, f64::max);
    if max_load == 0.0 {
        return Ok(BTreeMap::new());
    }
    let ps: BTreeMap<usize, f64> = norms.iter().map(|(&i, norm)| (i, power / (max_load * norm))).collect();
    for &j in load.keys() {
        let used: f64 = ps
            .iter()
            .filter_map(|(i, p)| beams.beams[i].coefficients.get(&j).map(|c| c * c * p))
            .sum();
        if used > power * (1.0 + 1e-9) {
            return Err(Error::PowerViolation(format!("transmitter {j} uses {used} > P={power}")));
        }
    }
    Ok(ps)
}

/// Rates of `active` users with every beamed message transmitted; all
/// other users get rate 0. See [`stream_powers`] for the power split.
pub fn simulate_active_rates(
    realization: &ChannelRealization,
    active: &BTreeSet<usize>,
    beams: &BeamDesign,
    config: &SimulationConfig,
) -> Result<RateSamples> {
    let k = realization.users();
    let gains: BTreeMap<usize, Vec<f64>> = (1..=k)
        .filter(|u| active.contains(u))
        .map(|rx| {
            let row = (1..=k).map(|i| beams.effective_gain(realization, i, rx)).collect();
            (rx, row)
        })
        .collect();
    let mut rates = vec![vec![0.0; config.power_sweep.len()]; k];
    for (p_idx, &power) in config.power_sweep.iter().enumerate() {
        let ps = stream_powers(beams, power)?;
        let p_of = |i: usize| ps.get(&i).copied().unwrap_or(0.0);
        for (&rx, row) in &gains {
            let signal = row[rx - 1].powi(2) * p_of(rx);
            let interference: f64 = row
                .iter()
                .enumerate()
                .filter(|&(i, _)| i + 1 != rx)
                .map(|(i, g)| g * g * p_of(i + 1))
                .sum();
            rates[rx - 1][p_idx] = (1.0 + signal / (interference + 1.0)).log2();
        }
    }
    let mut samples = RateSamples {
        powers: config.power_sweep.clone(),
        rates,
        slopes: None,
    };
    samples.slopes = estimate_dof_slope(&samples).ok();
    Ok(samples)
}

/// Rates under `plan` for one realization.
pub fn simulate_rates(
    realization: &ChannelRealization,
    plan: &SchemePlan,
    beams: &BeamDesign,
    config: &SimulationConfig,
) -> Result<RateSamples> {
    if realization.users() != plan.users {
        return Err(Error::TopologyMismatch {
            expected: format!("K={}", plan.users),
            found: format!("realization with K={}", realization.users()),
        });
    }
    simulate_active_rates(realization, &plan.active_users(), beams, config)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(|e| Error::InternalInvariant(e.to_string()))
}

/// Averages [`simulate_rates`] over `config.trials` realizations seeded
/// `seed, seed + 1, ...`, designing the scheme's beams for each. The sum is
/// taken in trial order, so results do not depend on the thread count.
pub fn simulate_plan(plan: &SchemePlan, config: &SimulationConfig) -> Result<RateSamples> {
    let topology = plan.topology()?;
    let per_trial: Vec<RateSamples> = thread_pool()?.install(|| {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|t| {
                let realization = ChannelRealization::sample(topology, config.seed.wrapping_add(t));
                let beams = design_beams(&realization, plan)?;
                simulate_rates(&realization, plan, &beams, config)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let k = plan.users;
    let mut rates = vec![vec![0.0; config.power_sweep.len()]; k];
    for trial in &per_trial {
        for (acc, row) in rates.iter_mut().zip(&trial.rates) {
            for (a, r) in acc.iter_mut().zip(row) {
                *a += r;
            }
        }
    }
    for row in &mut rates {
        for r in row.iter_mut() {
            *r /= config.trials as f64;
        }
    }
    let mut samples = RateSamples {
        powers: config.power_sweep.clone(),
        rates,
        slopes: None,
    };
    samples.slopes = estimate_dof_slope(&samples).ok();
    Ok(samples)
}

/// Least-squares slope of rate against `log2 P` over the upper half of the
/// sweep (at least two points).
pub fn estimate_dof_slope(samples: &RateSamples) -> Result<Vec<f64>> {
    let n = samples.powers.len();
    if n < 3 {
        return Err(Error::InsufficientSweep(format!("{n} power points, need at least 3")));
    }
    let span_db = 10.0 * (samples.powers[n - 1] / samples.powers[0]).log10();
    if span_db < 30.0 - 1e-9 {
        return Err(Error::InsufficientSweep(format!("sweep spans {span_db:.3} dB, need 30 dB")));
    }
    let start = n - n.div_ceil(2).max(2);
    let xs: Vec<f64> = samples.powers[start..].iter().map(|p| p.log2()).collect();
    let mean_x = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    Ok(samples
        .rates
        .iter()
        .map(|row| {
            let ys = &row[start..];
            let mean_y = ys.iter().sum::<f64>() / ys.len() as f64;
            xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum::<f64>() / sxx
        })
        .collect())
}

/// `X_target = (Y_rx - sum_j H[rx][j] X_j) / H[rx][target]` with the `X_j` already known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionStep {
    pub target: usize,
    pub rx: usize,
    pub divisor: f64,
    pub subtract: Vec<(usize, f64)>,
}

/// Successive recovery of transmit signals from a subset of receivers in
/// the `L = 1` shifted channel, given every `(2M+1)`-th transmit signal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionPlan {
    #[serde(rename = "K")]
    pub users: usize,
    #[serde(rename = "M")]
    pub cooperation: usize,
    /// Receivers whose outputs are available.
    pub used_receivers: Vec<usize>,
    /// Transmitters whose signals are given exactly.
    pub given_transmitters: Vec<usize>,
    pub steps: Vec<ReconstructionStep>,
    /// Error of each recovered signal as a combination `sum coef * Z_rx`.
    pub noise: BTreeMap<usize, BTreeMap<usize, f64>>,
}

impl ReconstructionPlan {
    pub fn new(realization: &ChannelRealization, cooperation: usize) -> Result<Self> {
        let k = realization.users();
        if realization.topology().connectivity() != (Connectivity::LocalShifted { interferers: 1 }) {
            return Err(Error::TopologyMismatch {
                expected: "local_shifted with L=1".into(),
                found: realization.topology().to_string(),
            });
        }
        if cooperation < 1 {
            return Err(Error::InvalidM {
                m: cooperation,
                reason: "reconstruction needs M >= 1".into(),
            });
        }
        let n = 2 * cooperation + 1;
        if !k.is_multiple_of(n) {
            return Err(Error::InvalidK {
                k,
                reason: format!("reconstruction tiles K by 2M+1 = {n}"),
            });
        }
        let skipped: BTreeSet<usize> = (0..k / n).map(|c| c * n + cooperation + 1).collect();
        let used_receivers = (1..=k).filter(|r| !skipped.contains(r)).collect();
        let given_transmitters: Vec<usize> = (1..=k / n).map(|c| c * n).collect();
        let h = |rx: usize, tx: usize| -> Result<f64> {
            let v = realization.gain(rx, tx);
            if v.abs() < DIVISOR_FLOOR {
                return Err(Error::SingularChannel { rx, tx, value: v });
            }
            Ok(v)
        };
        let mut steps = Vec::new();
        for &anchor in &given_transmitters {
            // Backward: Y_r = H[r][r] X_r + H[r][r-1] X_{r-1} + Z_r yields X_{r-1}.
            for r in (anchor - cooperation + 1..=anchor).rev() {
                steps.push(ReconstructionStep {
                    target: r - 1,
                    rx: r,
                    divisor: h(r, r - 1)?,
                    subtract: vec![(r, realization.gain(r, r))],
                });
            }
            // Forward into the next cluster's first M receivers.
            if anchor < k {
                for r in anchor + 1..=anchor + cooperation {
                    steps.push(ReconstructionStep {
                        target: r,
                        rx: r,
                        divisor: h(r, r)?,
                        subtract: vec![(r - 1, realization.gain(r, r - 1))],
                    });
                }
            }
        }
        let mut noise: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
        for step in &steps {
            let mut combo = BTreeMap::from([(step.rx, 1.0 / step.divisor)]);
            for &(j, coef) in &step.subtract {
                for (&z, &c) in noise.get(&j).into_iter().flatten() {
                    *combo.entry(z).or_insert(0.0) -= coef * c / step.divisor;
                }
            }
            noise.insert(step.target, combo);
        }
        Ok(Self {
            users: k,
            cooperation,
            used_receivers,
            given_transmitters,
            steps,
            noise,
        })
    }

    /// Recovered transmitters in ascending order.
    pub fn recovered(&self) -> Vec<usize> {
        self.noise.keys().copied().collect()
    }

    /// Runs the steps on the given signals and receiver outputs (both
    /// indexed from 1, length `K`; entries outside the plan are ignored).
    pub fn apply(&self, given: &[f64], outputs: &[f64]) -> Result<BTreeMap<usize, f64>> {
        if given.len() != self.users || outputs.len() != self.users {
            return Err(Error::Parse(format!("expected length-{} signal vectors", self.users)));
        }
        let mut known: BTreeMap<usize, f64> = self.given_transmitters.iter().map(|&j| (j, given[j - 1])).collect();
        let mut estimates = BTreeMap::new();
        for step in &self.steps {
            let mut acc = outputs[step.rx - 1];
            for &(j, coef) in &step.subtract {
                acc -= coef * known[&j];
            }
            let value = acc / step.divisor;
            known.insert(step.target, value);
            estimates.insert(step.target, value);
        }
        Ok(estimates)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub estimates: BTreeMap<usize, f64>,
    /// `X_hat_j - X_j` obtained by pushing the noise alone through the steps;
    /// by linearity this is independent of the transmitted signals and of `P`.
    pub residuals: BTreeMap<usize, f64>,
    /// `X_hat_j - X_j` computed directly from the estimates.
    pub direct_error: BTreeMap<usize, f64>,
}

/// Recovers every transmit signal outside the given set and the first `M`
/// from `Y = H X + Z`.
pub fn wyner_reconstruct(
    realization: &ChannelRealization,
    cooperation: usize,
    transmit: &[f64],
    noise: &[f64],
) -> Result<Reconstruction> {
    let plan = ReconstructionPlan::new(realization, cooperation)?;
    let k = plan.users;
    if transmit.len() != k || noise.len() != k {
        return Err(Error::Parse(format!("expected length-{k} signal vectors")));
    }
    let outputs: Vec<f64> = (1..=k)
        .map(|r| (1..=k).map(|j| realization.gain(r, j) * transmit[j - 1]).sum::<f64>() + noise[r - 1])
        .collect();
    let estimates = plan.apply(transmit, &outputs)?;
    let residuals = plan.apply(&vec![0.0; k], noise)?;
    let direct_error = estimates.iter().map(|(&j, &x)| (j, x - transmit[j - 1])).collect();
    Ok(Reconstruction {
        estimates,
        residuals,
        direct_error,
    })
}

/// Draws `X ~ N(0, P)` and unit noise from `seed` on separate streams, so the
/// noise is the same for every `P`, then runs [`wyner_reconstruct`].
pub fn simulate_reconstruction(
    realization: &ChannelRealization,
    cooperation: usize,
    power: f64,
    seed: u64,
    with_noise: bool,
) -> Result<Reconstruction> {
    let k = realization.users();
    let mut signal_rng = ChaCha8Rng::seed_from_u64(seed);
    signal_rng.set_stream(1);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
    noise_rng.set_stream(2);
    let amplitude = power.sqrt();
    let transmit: Vec<f64> = (0..k)
        .map(|_| amplitude * signal_rng.sample::<f64, _>(StandardNormal))
        .collect();
    let noise: Vec<f64> = (0..k)
        .map(|_| {
            let z: f64 = noise_rng.sample(StandardNormal);
            if with_noise {
                z
            } else {
                0.0
            }
        })
        .collect();
    wyner_reconstruct(realization, cooperation, &transmit, &noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelTopology;
    use crate::zf_scheme::{design_beams, plan_clusters, MessageBeam};

    fn sweep() -> SimulationConfig {
        SimulationConfig::new(vec![1e3, 1e4, 1e5, 1e6], 1, 0).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SimulationConfig::new(vec![1.0, 1.0], 1, 0).is_err());
        assert!(SimulationConfig::new(vec![0.5, 10.0], 1, 0).is_err());
        assert!(SimulationConfig::new(vec![1.0, 10.0], 0, 0).is_err());
        let c = SimulationConfig::from_db(30.0, 60.0, 10.0, 1, 0).unwrap();
        assert_eq!(c.power_sweep.len(), 4);
        assert_eq!(c.power_sweep[0], 1e3);
    }

    #[test]
    fn verified_plan_slopes() {
        let plan = plan_clusters(7, 3, 1).unwrap();
        let realization = ChannelRealization::sample(plan.topology().unwrap(), 42);
        let beams = design_beams(&realization, &plan).unwrap();
        let samples = simulate_rates(&realization, &plan, &beams, &sweep()).unwrap();
        let slopes = samples.slopes.unwrap();
        for u in 1..=7 {
            if plan.is_active(u) {
                assert!((slopes[u - 1] - 1.0).abs() <= 0.05, "user {u}: {}", slopes[u - 1]);
            } else {
                assert!(slopes[u - 1].abs() < 1e-12);
                assert!(samples.rates[u - 1].iter().all(|&r| r == 0.0));
            }
        }
    }

    #[test]
    fn interference_limited_pair_saturates() {
        let topology = ChannelTopology::local_shifted(2, 1).unwrap();
        let realization = ChannelRealization::sample(topology, 9);
        let bare = |j| MessageBeam {
            base: j,
            coefficients: BTreeMap::from([(j, 1.0)]),
        };
        let beams = BeamDesign {
            beams: BTreeMap::from([(1, bare(1)), (2, bare(2))]),
        };
        let active: BTreeSet<usize> = [1, 2].into_iter().collect();
        let samples = simulate_active_rates(&realization, &active, &beams, &sweep()).unwrap();
        let slopes = samples.slopes.unwrap();
        assert!(slopes[1] < 0.1, "{}", slopes[1]);
        assert!((slopes[0] - 1.0).abs() < 0.05);
    }

    #[test]
    fn slope_preconditions() {
        let samples = RateSamples {
            powers: vec![1.0, 10.0, 100.0],
            rates: vec![vec![0.0; 3]],
            slopes: None,
        };
        assert!(matches!(estimate_dof_slope(&samples), Err(Error::InsufficientSweep(_))));
        let samples = RateSamples {
            powers: vec![1.0, 1e3],
            rates: vec![vec![0.0; 2]],
            slopes: None,
        };
        assert!(matches!(estimate_dof_slope(&samples), Err(Error::InsufficientSweep(_))));
    }

    #[test]
    fn trials_average_is_thread_independent() {
        let plan = plan_clusters(10, 2, 1).unwrap();
        let config = SimulationConfig::new(vec![1e3, 1e4, 1e5, 1e6], 4, 7).unwrap();
        let a = simulate_plan(&plan, &config).unwrap();
        let b = simulate_plan(&plan, &config).unwrap();
        assert_eq!(a, b);
        let manual: f64 = (0..4u64)
            .map(|t| {
                let r = ChannelRealization::sample(plan.topology().unwrap(), 7 + t);
                let beams = design_beams(&r, &plan).unwrap();
                simulate_rates(&r, &plan, &beams, &config).unwrap().rates[0][3]
            })
            .sum::<f64>()
            / 4.0;
        assert_eq!(a.rates[0][3], manual);
    }

    #[test]
    fn reconstruction_structure() {
        let realization = ChannelRealization::sample(ChannelTopology::local_shifted(7, 1).unwrap(), 3);
        let plan = ReconstructionPlan::new(&realization, 3).unwrap();
        assert_eq!(plan.given_transmitters, vec![7]);
        assert_eq!(plan.used_receivers, vec![1, 2, 3, 5, 6, 7]);
        assert_eq!(plan.recovered(), vec![4, 5, 6]);
        let rx: Vec<usize> = plan.steps.iter().map(|s| s.rx).collect();
        assert_eq!(rx, vec![7, 6, 5]);
    }

    #[test]
    fn noiseless_reconstruction_is_exact() {
        let realization = ChannelRealization::sample(ChannelTopology::local_shifted(10, 1).unwrap(), 5);
        let rec = simulate_reconstruction(&realization, 2, 1e4, 1, false).unwrap();
        assert!(rec.residuals.values().all(|&r| r == 0.0));
        assert_eq!(rec.estimates.keys().copied().collect::<Vec<_>>(), vec![3, 4, 6, 7, 8, 9]);
        for e in rec.direct_error.values() {
            assert!(e.abs() < 1e-6);
        }
    }

    #[test]
    fn reconstruction_rejects_bad_inputs() {
        let r = ChannelRealization::sample(ChannelTopology::local_shifted(8, 1).unwrap(), 5);
        assert!(matches!(ReconstructionPlan::new(&r, 1), Err(Error::InvalidK { .. })));
        let r = ChannelRealization::sample(ChannelTopology::local_shifted(6, 2).unwrap(), 5);
        assert!(matches!(ReconstructionPlan::new(&r, 1), Err(Error::TopologyMismatch { .. })));
    }
}
