//! Acceptance criteria, one test each. Every test prints a single
//! `PASS`/`FAIL` line before asserting.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use comp_dof::assignment::{cooperation_envelope, reduce_assignment, MessageAssignment};
use comp_dof::bounds::{
    closed_form_tau, greedy_witness, m3_witness, subset_bound, SubsetMode, TauConnectivity, TauKind, TauRestriction,
    TauSetting,
};
use comp_dof::channel::{ChannelRealization, ChannelTopology};
use comp_dof::search::{max_zf_dof, max_zf_dof_for_assignment, window_cap_check, SearchLimits};
use comp_dof::simulator::{simulate_plan, wyner_reconstruct, ReconstructionPlan, SimulationConfig};
use comp_dof::zf_scheme::{design_beams, plan_clusters, plan_dof, reuse_schedule, verify_zero_interference};
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const RESIDUAL_TOL: f64 = 1e-9;
const SCHEME_TIME: Duration = Duration::from_secs(5);
const SEARCH_TIME: Duration = Duration::from_secs(60);
const SLOPE_BAND: (f64, f64) = (0.95, 1.05);
const INACTIVE_SLOPE_TOL: f64 = 1e-6;
const NOISE_ORACLE_TOL: f64 = 1e-10;

fn report(id: u32, name: &str, ok: bool, detail: &str) {
    println!("{} criterion {id} ({name}): {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

fn random_assignment(rng: &mut ChaCha8Rng, k: usize, max_order: usize) -> MessageAssignment {
    let lists: Vec<Vec<usize>> = (0..k)
        .map(|_| {
            let size = rng.random_range(0..=max_order);
            let mut set = BTreeSet::new();
            while set.len() < size {
                set.insert(rng.random_range(1..=k));
            }
            set.into_iter().collect()
        })
        .collect();
    MessageAssignment::from_lists(k, lists).unwrap()
}

#[test]
fn criterion_1_scheme_achievability() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    for (m, l) in [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2)] {
        let n = 2 * m + l;
        let k = 4 * n;
        let plan = plan_clusters(k, m, l).unwrap();
        for seed in 0..100 {
            let realization = ChannelRealization::sample(plan.topology().unwrap(), seed);
            let beams = design_beams(&realization, &plan).unwrap();
            let r = verify_zero_interference(&realization, &plan, &beams);
            worst = worst.max(r.max_residual);
            if !r.silence_violations.is_empty() {
                problems.push(format!("silence violated for M={m} L={l}"));
            }
        }
        let dof = plan_dof(&reuse_schedule(k, m, l, n).unwrap()).unwrap();
        let expected = Rational64::new(2 * m as i64, n as i64);
        if dof.interior_average != Some(expected) {
            problems.push(format!("M={m} L={l}: interior DoF {:?} != {expected}", dof.interior_average));
        }
    }
    let elapsed = start.elapsed();
    let ok = worst < RESIDUAL_TOL && problems.is_empty() && elapsed < SCHEME_TIME;
    report(
        1,
        "scheme achievability",
        ok,
        &format!("max residual {worst:.3e} over 500 draws, interior DoF 2M/(2M+L) on all five (M,L), {elapsed:.2?} {problems:?}"),
    );
}

#[test]
fn criterion_2_exact_zf_optimum_at_tiling_sizes() {
    let mut lines = Vec::new();
    let mut ok = true;
    for (m, l) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        for c in 1..=2 {
            let k = c * (2 * m + l);
            let topology = ChannelTopology::local_shifted(k, l).unwrap();
            for pruning in [true, false] {
                let limits = SearchLimits {
                    window_cap_pruning: pruning,
                    ..SearchLimits::default()
                };
                let start = Instant::now();
                let r = max_zf_dof(&topology, m, limits).unwrap();
                let elapsed = start.elapsed();
                let good = r.value == 2 * m * c
                    && window_cap_check(&r.active, k, m, l)
                    && elapsed < SEARCH_TIME;
                ok &= good;
                lines.push(format!("(M={m},L={l},K={k},prune={pruning})={} in {elapsed:.2?}", r.value));
            }
        }
    }
    report(2, "exact ZF optimum", ok, &lines.join("; "));
}

#[test]
fn criterion_3_witness_constructions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = 0;
    let mut runs = 0;
    for k in [5, 9, 13] {
        for _ in 0..200 {
            let a = random_assignment(&mut rng, k, 2);
            runs += 1;
            match greedy_witness(&a, 2) {
                Ok(w) if w.transmitters.len() == (k - 1) / 2
                    && w.carried.len() <= k.div_ceil(2)
                    && w.carried == a.carried_messages(&w.transmitters) => {}
                _ => failures += 1,
            }
        }
    }
    for k in [15, 31] {
        for _ in 0..100 {
            let a = random_assignment(&mut rng, k, 3);
            runs += 1;
            let target = 5 * (k + 1) / 8;
            match m3_witness(&a) {
                Ok(w) if w.carried.len() <= target
                    && w.value(k) == target
                    && w.carried == a.carried_messages(&w.transmitters) => {}
                _ => failures += 1,
            }
        }
    }
    report(3, "witness constructions", failures == 0, &format!("{failures} failures in {runs} constructions"));
}

// The subset bound max(|C_S|, K - |S|) is a converse for fully connected
// channels. On locally connected channels a transmitter set S does not
// determine the other receivers' signals, so the bound can fall below what
// zero forcing achieves (e.g. K=3, L=1, M=1 serves 2 users while T_1={1},
// T_3={3} gives S={1,2}, C_S={1}, bound 1). This test applies the criterion
// as stated and reports every violating instance.
#[test]
fn criterion_4_converse_dominates_achievability() {
    let mut checked = 0;
    let mut violations = Vec::new();
    for k in 2..=8 {
        for m in 1..=2 {
            for l in 1..=2usize {
                if l >= k {
                    continue;
                }
                let topology = ChannelTopology::local_shifted(k, l).unwrap();
                let r = max_zf_dof(&topology, m, SearchLimits::default()).unwrap();
                let reduced = reduce_assignment(&r.assignment, &topology, m).unwrap().assignment;
                let bound = subset_bound(&reduced, SubsetMode::Exact).unwrap();
                checked += 1;
                if bound.value < Rational64::from_integer(r.value as i64) {
                    violations.push(format!("(K={k},M={m},L={l}): bound {} < {}", bound.value, r.value));
                }
            }
        }
    }
    report(
        4,
        "converse dominates achievability",
        violations.is_empty(),
        &format!("{} of {checked} instances violate: {}", violations.len(), violations.join(", ")),
    );
}

#[test]
fn criterion_5_dof_slope_estimation() {
    let plan = plan_clusters(7, 3, 1).unwrap();
    let config = SimulationConfig::from_db(30.0, 60.0, 10.0, 1, 0).unwrap();
    let samples = simulate_plan(&plan, &config).unwrap();
    let slopes = samples.slopes.clone().unwrap();
    let mut ok = true;
    let (mut lo, mut hi, mut idle): (f64, f64, f64) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for u in 1..=7 {
        let s = slopes[u - 1];
        if plan.is_active(u) {
            lo = lo.min(s);
            hi = hi.max(s);
            ok &= (SLOPE_BAND.0..=SLOPE_BAND.1).contains(&s);
        } else {
            idle = idle.max(s.abs());
            ok &= s.abs() < INACTIVE_SLOPE_TOL;
        }
    }
    report(
        5,
        "DoF slope estimation",
        ok,
        &format!("active slopes in [{lo:.4}, {hi:.4}], inactive max |slope| {idle:.1e}"),
    );
}

/// Closed-form error coefficients of the successive reconstruction.
fn noise_oracle(realization: &ChannelRealization, m: usize) -> BTreeMap<usize, BTreeMap<usize, f64>> {
    let k = realization.users();
    let n = 2 * m + 1;
    let h = |r: usize, t: usize| realization.gain(r, t);
    let mut out = BTreeMap::new();
    for a in (n..=k).step_by(n) {
        for j in a - m..a {
            let mut row = BTreeMap::new();
            for s in j + 1..=a {
                let sign = if (s - j - 1) % 2 == 0 { 1.0 } else { -1.0 };
                let num: f64 = (j + 1..s).map(|r| h(r, r)).product();
                let den: f64 = (j + 1..=s).map(|r| h(r, r - 1)).product();
                row.insert(s, sign * num / den);
            }
            out.insert(j, row);
        }
        if a < k {
            for j in a + 1..=a + m {
                let mut row = BTreeMap::new();
                for s in a + 1..=j {
                    let sign = if (j - s) % 2 == 0 { 1.0 } else { -1.0 };
                    let num: f64 = (s + 1..=j).map(|r| h(r, r - 1)).product();
                    let den: f64 = (s..=j).map(|r| h(r, r)).product();
                    row.insert(s, sign * num / den);
                }
                out.insert(j, row);
            }
        }
    }
    out
}

#[test]
fn criterion_6_reconstruction() {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for m in 1..=3 {
        let k = 2 * (2 * m + 1);
        let realization = ChannelRealization::sample(ChannelTopology::local_shifted(k, 1).unwrap(), 60 + m as u64);
        let plan = ReconstructionPlan::new(&realization, m).unwrap();
        let oracle = noise_oracle(&realization, m);
        ok &= oracle.keys().eq(plan.noise.keys());
        for (j, row) in &oracle {
            for (s, c) in row {
                let got = plan.noise[j].get(s).copied().unwrap_or(0.0);
                worst = worst.max((got - c).abs() / c.abs().max(1.0));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(600 + m as u64);
        let noise: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let unit: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let mut first = None;
        for p in [1e2, 1e4, 1e6] {
            let transmit: Vec<f64> = unit.iter().map(|x| x * f64::sqrt(p)).collect();
            let rec = wyner_reconstruct(&realization, m, &transmit, &noise).unwrap();
            for (j, row) in &oracle {
                let expected: f64 = row.iter().map(|(s, c)| c * noise[s - 1]).sum();
                worst = worst.max((rec.residuals[j] - expected).abs());
            }
            match &first {
                None => first = Some(rec.residuals.clone()),
                Some(f) => {
                    ok &= f.iter().zip(&rec.residuals).all(|((a, x), (b, y))| a == b && x.to_bits() == y.to_bits())
                }
            }
            let silent = wyner_reconstruct(&realization, m, &transmit, &vec![0.0; k]).unwrap();
            ok &= silent.residuals.values().all(|&r| r == 0.0);
        }
    }
    ok &= worst < NOISE_ORACLE_TOL;
    report(
        6,
        "reconstruction",
        ok,
        &format!("residuals bit-identical across P, zero without noise, oracle deviation {worst:.1e}"),
    );
}

#[test]
fn criterion_7_reduction_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    for trial in 0..500 {
        let k = rng.random_range(3..=8);
        let l = rng.random_range(1..=2usize).min(k - 1);
        let m = rng.random_range(1..=2);
        let topology = ChannelTopology::local_shifted(k, l).unwrap();
        let a = random_assignment(&mut rng, k, m);
        let once = reduce_assignment(&a, &topology, m).unwrap();
        let twice = reduce_assignment(&once.assignment, &topology, m).unwrap();
        let inside = (1..=k).all(|i| {
            let env = cooperation_envelope(&topology, i, m).unwrap();
            once.assignment.transmit_set(i).iter().all(|j| env.contains(j))
        });
        let before = max_zf_dof_for_assignment(&topology, &a).unwrap().value;
        let after = max_zf_dof_for_assignment(&topology, &once.assignment).unwrap().value;
        if twice.assignment != once.assignment
            || !twice.removed.is_empty()
            || !once.envelope_violations.is_empty()
            || !inside
            || before != after
        {
            failures.push(trial);
        }
    }
    report(
        7,
        "reduction soundness",
        failures.is_empty(),
        &format!("500 random assignments, failing trials {failures:?}"),
    );
}

#[test]
fn criterion_8_closed_forms() {
    let r = Rational64::new;
    let local = |l| TauConnectivity::Local { interferers: l };
    let cells: Vec<(TauConnectivity, usize, TauRestriction, Rational64, TauKind)> = vec![
        // fully connected, local cooperation
        (TauConnectivity::Full, 1, TauRestriction::LocalCooperation, r(1, 2), TauKind::Exact),
        (TauConnectivity::Full, 2, TauRestriction::LocalCooperation, r(1, 2), TauKind::Exact),
        (TauConnectivity::Full, 3, TauRestriction::LocalCooperation, r(1, 2), TauKind::Exact),
        (TauConnectivity::Full, 7, TauRestriction::LocalCooperation, r(1, 2), TauKind::Exact),
        // fully connected, general cooperation
        (TauConnectivity::Full, 1, TauRestriction::None, r(1, 2), TauKind::Exact),
        (TauConnectivity::Full, 2, TauRestriction::None, r(1, 2), TauKind::Exact),
        (TauConnectivity::Full, 3, TauRestriction::None, r(5, 8), TauKind::UpperBound),
        (TauConnectivity::Full, 4, TauRestriction::None, r(3, 4), TauKind::UpperBound),
        (TauConnectivity::Full, 10, TauRestriction::None, r(9, 10), TauKind::UpperBound),
        // L = 1
        (local(1), 1, TauRestriction::None, r(2, 3), TauKind::Exact),
        (local(1), 2, TauRestriction::None, r(4, 5), TauKind::Exact),
        (local(1), 5, TauRestriction::None, r(10, 11), TauKind::Exact),
        // L = 2
        (local(2), 1, TauRestriction::None, r(1, 2), TauKind::Exact),
        (local(2), 2, TauRestriction::None, r(2, 3), TauKind::LowerBound),
        (local(2), 4, TauRestriction::None, r(4, 5), TauKind::LowerBound),
        // general L
        (local(3), 1, TauRestriction::None, r(1, 2), TauKind::Exact),
        (local(3), 2, TauRestriction::None, r(4, 7), TauKind::LowerBound),
        (local(6), 2, TauRestriction::None, r(1, 2), TauKind::LowerBound),
        (local(9), 2, TauRestriction::None, r(1, 2), TauKind::LowerBound),
        (local(5), 3, TauRestriction::None, r(6, 11), TauKind::LowerBound),
        // zero-forcing restriction
        (local(3), 2, TauRestriction::ZeroForcing, r(4, 7), TauKind::Exact),
        (local(9), 2, TauRestriction::ZeroForcing, r(4, 13), TauKind::Exact),
        // local cooperation is optimal on local channels
        (local(1), 3, TauRestriction::LocalCooperation, r(6, 7), TauKind::Exact),
    ];
    let mismatches: Vec<String> = cells
        .iter()
        .filter_map(|&(connectivity, m, restriction, value, kind)| {
            let got = closed_form_tau(TauSetting {
                connectivity,
                cooperation: m,
                restriction,
            })
            .unwrap();
            (got.value != value || got.kind != kind).then(|| format!("{connectivity:?} M={m}: {got}"))
        })
        .collect();
    report(
        8,
        "closed forms",
        mismatches.is_empty(),
        &format!("{} cells checked, mismatches {mismatches:?}", cells.len()),
    );
}
