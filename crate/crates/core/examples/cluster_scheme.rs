//! The cluster zero-forcing scheme: plan, successive beam design, residual
//! check and the DoF of a rotating schedule.
//!
//! ```bash
//! cargo run --example cluster_scheme
//! ```

use comp_dof::channel::ChannelRealization;
use comp_dof::zf_scheme::{design_beams, plan_clusters, plan_dof, reuse_schedule, verify_zero_interference};

fn main() -> comp_dof::Result<()> {
    let (k, m, l) = (10, 2, 1);
    let plan = plan_clusters(k, m, l)?;
    for c in &plan.clusters {
        println!("cluster at {}: S1 {:?} S2 {:?} idle {:?}", c.offset, c.s1, c.s2, c.inactive_rx);
    }

    let realization = ChannelRealization::sample(plan.topology()?, 42);
    let beams = design_beams(&realization, &plan)?;
    for (message, beam) in &beams.beams {
        println!("  W_{message}: {:?}", beam.coefficients);
    }
    let report = verify_zero_interference(&realization, &plan, &beams);
    println!("max residual {:.2e}", report.max_residual);

    let n = 2 * m + l;
    let dof = plan_dof(&reuse_schedule(4 * n, m, l, n)?)?;
    println!(
        "K={} over {} sessions: average {}, interior {:?}",
        4 * n,
        dof.sessions,
        dof.average,
        dof.interior_average.map(|r| r.to_string())
    );
    Ok(())
}
