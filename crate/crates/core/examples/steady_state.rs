//! Stationary distribution of each chain, from the closed forms and from the
//! generic linear solve.

use anyhow::Result;
use ehaoi::chains::{build, steady_state_closed};
use ehaoi::shs::steady_state;
use ehaoi::{Discipline, SystemParams};

fn main() -> Result<()> {
    let params = SystemParams::new(vec![0.3, 0.7], 1.5, 1.0, 2)?;
    for disc in Discipline::ALL {
        let model = build(disc, &params, 1)?;
        let closed = steady_state_closed(disc, &params, 1)?;
        let solved = steady_state(&model)?;
        println!("{disc}");
        for ((state, a), b) in model.states().iter().zip(&closed.pi).zip(&solved.pi) {
            println!("  state {state}: {a:.6} {b:.6}");
        }
    }
    Ok(())
}
