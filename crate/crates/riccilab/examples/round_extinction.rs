//! The round sphere shrinks homothetically and vanishes at t = 1/4.

use riccilab::cli::execute;
use riccilab::config::{RunConfig, Scenario};

fn main() -> riccilab::Result<()> {
    let mut config = RunConfig::for_scenario(Scenario::Round);
    config.n = 200;
    let a = execute(&config)?;
    println!("outcome {}", a.outcome_tag());
    println!(
        "extinction at t = {:.6} (exact 0.25)",
        a.extinction_time.unwrap_or(f64::NAN)
    );
    for row in a.series.iter().step_by(a.series.len() / 8 + 1) {
        println!("t = {:.4}  R = {:.4}  vol = {:.5}", row.t, row.r_min, row.volume);
    }
    Ok(())
}
