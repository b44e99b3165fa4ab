//! Per-user DoF limits for large networks as exact fractions.
//!
//! ```bash
//! cargo run --example tau_table
//! ```

use comp_dof::bounds::{closed_form_tau, TauConnectivity, TauRestriction, TauSetting};

fn main() -> comp_dof::Result<()> {
    let rows = [
        ("full", TauConnectivity::Full),
        ("L=1", TauConnectivity::Local { interferers: 1 }),
        ("L=2", TauConnectivity::Local { interferers: 2 }),
        ("L=4", TauConnectivity::Local { interferers: 4 }),
    ];
    for restriction in [TauRestriction::None, TauRestriction::LocalCooperation, TauRestriction::ZeroForcing] {
        println!("{restriction:?}");
        for (name, connectivity) in rows {
            let cells: Vec<String> = (1..=4)
                .map(|m| {
                    closed_form_tau(TauSetting {
                        connectivity,
                        cooperation: m,
                        restriction,
                    })
                    .map_or_else(|_| "-".to_string(), |t| t.to_string())
                })
                .collect();
            println!("  {name:<5} {}", cells.join(" | "));
        }
    }
    Ok(())
}
