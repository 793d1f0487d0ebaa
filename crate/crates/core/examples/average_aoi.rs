//! Average age of every source under each discipline, with the unlimited
//! energy value for reference.

use anyhow::Result;
use ehaoi::chains::build;
use ehaoi::closed_form::{avg_aoi_closed, avg_aoi_limit};
use ehaoi::shs::average_aoi;
use ehaoi::{Discipline, SystemParams};

fn main() -> Result<()> {
    let params = SystemParams::from_utilizations(&[0.6, 0.3, 0.1], 1.5, 1.0, 3)?;
    println!("discipline source closed shs no_eh_limit");
    for disc in Discipline::ALL {
        for i in 1..=params.n_sources() {
            let closed = avg_aoi_closed(disc, &params, i)?;
            let shs = average_aoi(&build(disc, &params, i)?)?;
            let limit = avg_aoi_limit(disc, &params, i)?;
            println!("{disc} {i} {closed:.9} {shs:.9} {limit:.6}");
        }
    }
    Ok(())
}
