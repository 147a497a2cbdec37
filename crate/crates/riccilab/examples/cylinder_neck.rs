//! A long cylinder is a neck everywhere: it shrinks like S^2 x R and is
//! recognised as locally canonical.

use riccilab::cli::execute;
use riccilab::config::{RunConfig, Scenario};

fn main() -> riccilab::Result<()> {
    let a = execute(&RunConfig::for_scenario(Scenario::Cylinder))?;
    let last = a.series.last().unwrap();
    println!("outcome {} at t = {:.5}", a.outcome_tag(), last.t);
    println!(
        "R at the end {:.4} (2 / (1 - 2t) = {:.4} for the exact cylinder)",
        last.r_max,
        2.0 / (1.0 - 2.0 * last.t)
    );
    Ok(())
}
