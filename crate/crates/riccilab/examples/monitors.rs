//! Monitored estimates along a run of the round sphere.

use riccilab::cli::execute;
use riccilab::config::{RunConfig, Scenario};
use riccilab::io::write_report;

fn main() -> riccilab::Result<()> {
    let mut config = RunConfig::for_scenario(Scenario::Round);
    config.n = 200;
    let a = execute(&config)?;
    print!("{}", write_report(&a.monitors));
    println!("all enforced checks pass: {}", a.monitors.pass());
    Ok(())
}
