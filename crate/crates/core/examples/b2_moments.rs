//! Explicit moments for a two-packet battery against the MGF derivatives,
//! including the published coefficients that disagree.

use anyhow::Result;
use ehaoi::closed_form::{moments_b2, ClosedMgf, CoefficientSet};
use ehaoi::shs::moment_from_mgf;
use ehaoi::{Discipline, SystemParams};

fn main() -> Result<()> {
    for params in [
        SystemParams::new(vec![1.0], 1.0, 1.0, 2)?,
        SystemParams::new(vec![0.25, 0.25], 0.5, 1.0, 2)?,
    ] {
        println!("lambda {:?} eta {}", params.arrival_rates, params.energy_rate);
        for disc in Discipline::ALL {
            let mgf = ClosedMgf::new(disc, &params, 1)?;
            let h0 = 0.02f64.min(mgf.bound() / 4.0);
            let d1 = moment_from_mgf(|s| mgf.eval(s), 1, params.service_rate, h0)?;
            let d2 = moment_from_mgf(|s| mgf.eval(s), 2, params.service_rate, h0)?;
            let (a1, a2) = moments_b2(disc, &params, 1, CoefficientSet::Amended)?;
            let (v1, v2) = moments_b2(disc, &params, 1, CoefficientSet::Verbatim)?;
            println!("  {disc}: derivatives ({d1:.6}, {d2:.6}) amended ({a1:.6}, {a2:.6}) verbatim ({v1:.6}, {v2:.6})");
        }
    }
    Ok(())
}
