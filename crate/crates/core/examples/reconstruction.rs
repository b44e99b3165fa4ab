//! Rebuilding the remaining transmit signals of a Wyner channel from a few
//! given signals and most receiver outputs; the leftover error depends on the
//! noise only.
//!
//! ```bash
//! cargo run --example reconstruction
//! ```

use comp_dof::channel::{ChannelRealization, ChannelTopology};
use comp_dof::simulator::{simulate_reconstruction, ReconstructionPlan};

fn main() -> comp_dof::Result<()> {
    let (k, m) = (14, 3);
    let realization = ChannelRealization::sample(ChannelTopology::local_shifted(k, 1)?, 3);
    let plan = ReconstructionPlan::new(&realization, m)?;
    println!("given tx {:?}", plan.given_transmitters);
    println!("used rx {:?}", plan.used_receivers);
    println!("recovered {:?}", plan.recovered());
    for (j, coefs) in plan.noise.iter().take(3) {
        println!("  error of X_{j} = {coefs:?} . Z");
    }
    for power in [1e2, 1e6] {
        let rec = simulate_reconstruction(&realization, m, power, 9, true)?;
        let worst = rec.residuals.values().fold(0.0f64, |a, r| a.max(r.abs()));
        println!("P={power:.0e}: largest residual {worst:.4}");
    }
    Ok(())
}
