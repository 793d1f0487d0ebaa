//! MGF of the age on a grid of normalized arguments up to the convergence
//! bound.

use anyhow::Result;
use ehaoi::closed_form::ClosedMgf;
use ehaoi::{Discipline, SystemParams};

fn main() -> Result<()> {
    let params = SystemParams::new(vec![0.5, 0.5], 1.5, 1.0, 2)?;
    for disc in Discipline::ALL {
        let mgf = ClosedMgf::new(disc, &params, 1)?;
        println!("{disc}: bound {:.6}", mgf.bound());
        for k in 0..5 {
            let s = mgf.bound() * k as f64 / 5.0;
            println!("  M({s:.4}) = {:.6}", mgf.eval(s)?);
        }
    }
    Ok(())
}
