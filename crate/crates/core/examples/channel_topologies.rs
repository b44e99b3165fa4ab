//! Connectivity patterns, seeded channel draws and the shift that turns the
//! centred local model into the one-sided one.
//!
//! ```bash
//! cargo run --example channel_topologies
//! ```

use comp_dof::channel::{ChannelRealization, ChannelTopology};

fn main() -> comp_dof::Result<()> {
    let original = ChannelTopology::local_original(8, 2)?;
    println!("{original}");
    for rx in 1..=original.users() {
        println!("  rx {rx} hears {:?}", original.connected_transmitters(rx)?);
    }

    let eq = original.equivalent_shift()?;
    println!("\n{} (dropped {} edge users)", eq.topology, eq.dropped);
    for tx in 1..=eq.topology.users() {
        println!("  tx {tx} is original tx {}", eq.original_transmitter(tx));
    }

    let draw = ChannelRealization::sample(ChannelTopology::local_shifted(4, 1)?, 7);
    print!("\nseed 7 draw:\n{}", draw.to_csv());
    Ok(())
}
