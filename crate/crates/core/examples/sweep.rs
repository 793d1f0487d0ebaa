//! Battery and split sweeps written as CSV.

use anyhow::Result;
use ehaoi::sweep::{split_utilizations, sweep, Output, SweepParam, SweepSpec};
use ehaoi::{Discipline, SystemParams};

fn main() -> Result<()> {
    let base = SystemParams::new(vec![0.5, 0.5], 1.5, 1.0, 2)?;
    print!("{}", sweep(&SweepSpec::parse_axis("battery=1:8", base)?)?);

    let utils = split_utilizations(1.0, 0.5, 4)?;
    let base = SystemParams::from_utilizations(&utils, 1.5, 1.0, 2)?;
    let mut spec = SweepSpec::new(SweepParam::RhoSplit, 0.05, 0.95, 10, base);
    spec.disciplines = vec![Discipline::Ps, Discipline::Sa];
    spec.outputs = vec![Output::Jfi, Output::SumAoi];
    print!("{}", sweep(&spec)?);
    Ok(())
}
