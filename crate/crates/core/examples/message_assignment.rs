//! Building transmit sets and pruning transmitters that cannot help.
//!
//! ```bash
//! cargo run --example message_assignment
//! ```

use comp_dof::assignment::{cooperation_envelope, reduce_assignment, scheme_assign, spiral_assign, MessageAssignment};
use comp_dof::channel::ChannelTopology;

fn show(name: &str, a: &MessageAssignment) {
    println!("{name}:");
    for (i, t) in a.sets().iter().enumerate() {
        println!("  T_{} = {:?}", i + 1, t);
    }
}

fn main() -> comp_dof::Result<()> {
    show("spiral, K=5 M=2", &spiral_assign(5, 2)?);
    show("cluster scheme, K=7 M=3 L=1", &scheme_assign(7, 3, 1)?);

    let topology = ChannelTopology::local_shifted(8, 1)?;
    let messy = MessageAssignment::from_lists(8, vec![vec![1, 5], vec![1, 2], vec![], vec![4, 8], vec![], vec![], vec![], vec![]])?;
    let reduction = reduce_assignment(&messy, &topology, 2)?;
    show("\nreduced on local_shifted K=8 L=1", &reduction.assignment);
    println!("removed (message, tx): {:?}", reduction.removed);
    println!("envelope of message 4 with M=2: {:?}", cooperation_envelope(&topology, 4, 2)?);
    Ok(())
}
