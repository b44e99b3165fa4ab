//! Rates of the cluster scheme over a power sweep and the DoF slope estimate.
//! Set COMP_DOF_THREADS to cap the worker pool.
//!
//! ```bash
//! cargo run --release --example rate_slopes
//! ```

use comp_dof::simulator::{simulate_plan, SimulationConfig};
use comp_dof::zf_scheme::plan_clusters;

fn main() -> comp_dof::Result<()> {
    let plan = plan_clusters(14, 3, 1)?;
    let config = SimulationConfig::from_db(0.0, 60.0, 10.0, 50, 1)?;
    let samples = simulate_plan(&plan, &config)?;
    let slopes = samples.slopes.as_deref().unwrap_or_default();
    for (u, rates) in samples.rates.iter().enumerate() {
        let shown: Vec<String> = rates.iter().map(|r| format!("{r:6.2}")).collect();
        println!("user {:>2}: {}  slope {:.3}", u + 1, shown.join(" "), slopes[u]);
    }
    Ok(())
}
