//! Without cooperation, pairs of interfering users share one degree of
//! freedom; the bound is the optimum of those pairwise constraints.
//!
//! ```bash
//! cargo run --example no_cooperation
//! ```

use comp_dof::assignment::MessageAssignment;
use comp_dof::bounds::{no_coop_bound, pairwise_constraints};
use comp_dof::channel::ChannelTopology;

fn main() -> comp_dof::Result<()> {
    for (k, l) in [(3, 1), (6, 1), (6, 2), (9, 3)] {
        let topology = ChannelTopology::local_shifted(k, l)?;
        let a = MessageAssignment::identity(k)?;
        let pairs = pairwise_constraints(&topology, &a)?;
        let bound = no_coop_bound(&topology, &a)?;
        println!("K={k} L={l}: {} pairs, sum DoF <= {}", pairs.len(), bound.value);
    }
    Ok(())
}
