//! Exhaustive zero-forcing optimum on small local channels.
//!
//! ```bash
//! cargo run --release --example zf_search
//! ```

use comp_dof::channel::ChannelTopology;
use comp_dof::search::{max_zf_dof, window_cap_check, SearchLimits};

fn main() -> comp_dof::Result<()> {
    for (k, m, l) in [(3, 1, 1), (6, 2, 2), (10, 2, 1), (12, 2, 2)] {
        let topology = ChannelTopology::local_shifted(k, l)?;
        let r = max_zf_dof(&topology, m, SearchLimits::default())?;
        println!(
            "K={k:>2} M={m} L={l}: {} users, active {:?}, {} nodes, window cap ok: {}",
            r.value,
            r.active,
            r.nodes,
            window_cap_check(&r.active, k, m, l)
        );
        for i in &r.active {
            println!("    T_{i} = {:?}", r.assignment.transmit_set(*i));
        }
    }
    Ok(())
}
