//! Upper bounds from transmitter subsets: exact search, greedy search and the
//! constructive witnesses for cooperation orders 2 and 3.
//!
//! ```bash
//! cargo run --example subset_bounds
//! ```

use comp_dof::assignment::spiral_assign;
use comp_dof::bounds::{greedy_witness, m3_witness, subset_bound, SubsetMode};

fn main() -> comp_dof::Result<()> {
    for k in [5, 9, 13] {
        let a = spiral_assign(k, 2)?;
        let exact = subset_bound(&a, SubsetMode::Exact)?;
        let greedy = subset_bound(&a, SubsetMode::Greedy)?;
        let w = greedy_witness(&a, 2)?;
        println!(
            "K={k:>2} M=2  exact {}  greedy {}  witness |S|={} |C_S|={} -> {}",
            exact.value,
            greedy.value,
            w.transmitters.len(),
            w.carried.len(),
            w.value(k)
        );
    }

    let k = 31;
    let w = m3_witness(&spiral_assign(k, 3)?)?;
    let c = w.counters.unwrap();
    println!(
        "K={k} M=3  x1={} x2={} x3={}  |S|={} |C_S|={} -> {} (5(K+1)/8 = {})",
        c.x1,
        c.x2,
        c.x3,
        w.transmitters.len(),
        w.carried.len(),
        w.value(k),
        5 * (k + 1) / 8
    );
    Ok(())
}
