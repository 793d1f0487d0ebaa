//! The three disciplines side by side with fairness and pairwise gaps.

use anyhow::Result;
use ehaoi::{compare, Method, SystemParams};

fn main() -> Result<()> {
    let params = SystemParams::from_utilizations(&[0.5, 0.05, 0.225, 0.225], 1.5, 1.0, 2)?;
    let cmp = compare(&params, 1, Method::Closed, &[])?;
    for row in &cmp.rows {
        println!(
            "{}: mean {:.4} std {:.4} sum {:.4} jfi {:.4}",
            row.report.discipline, row.report.mean, row.report.std, row.sum_aoi, row.jfi
        );
    }
    for (pair, gap) in &cmp.gaps {
        println!("{pair:?} {gap:.6}");
    }
    Ok(())
}
