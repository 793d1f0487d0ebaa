//! Prints the states and transitions of a chain.
//!
//! `cargo run --example model_dump -- sa 2 1`

use anyhow::Result;
use ehaoi::chains::build;
use ehaoi::{Discipline, SystemParams};

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let discipline: Discipline = args.first().map(String::as_str).unwrap_or("wp").parse()?;
    let n: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(2);
    let b: usize = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let params = SystemParams::new(vec![0.5; n], 1.5, 1.0, b)?;
    print!("{}", build(discipline, &params, 1)?.dump());
    Ok(())
}
