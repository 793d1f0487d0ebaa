//! Simulation of one configuration next to the exact values.

use anyhow::Result;
use ehaoi::sim::SimConfig;
use ehaoi::{simulate_cmd, Discipline, SystemParams};

fn main() -> Result<()> {
    let params = SystemParams::new(vec![0.5, 0.5], 1.5, 1.0, 2)?;
    let config = SimConfig {
        horizon: 2e5,
        replications: 4,
        mgf_s_bar: vec![0.0, 0.05],
        ..SimConfig::default()
    };
    for disc in Discipline::ALL {
        let report = simulate_cmd(&params, disc, &config)?;
        for s in &report.sources {
            let m = &s.mean;
            println!(
                "{disc} source {}: mean {:.4} ± {:.4} exact {:.4} within 3 se {}",
                s.source,
                m.simulated,
                m.half_width,
                m.reference.unwrap_or(f64::NAN),
                m.pass.map_or("n/a".into(), |b| b.to_string())
            );
        }
        for (i, u) in report.updates.iter().enumerate() {
            println!(
                "  source {}: generated {} served {} preempted {} discarded {}",
                i + 1,
                u.generated,
                u.served,
                u.preempted,
                u.discarded
            );
        }
    }
    Ok(())
}
