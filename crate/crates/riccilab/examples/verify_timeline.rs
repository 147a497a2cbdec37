//! Write a run to disk, read the timeline back and audit it as a weak solution.

use riccilab::cli::{run, verify_dir};
use riccilab::config::{RunConfig, Scenario};

fn main() -> riccilab::Result<()> {
    let dir = std::env::temp_dir().join("riccilab-verify-example");
    let mut config = RunConfig::for_scenario(Scenario::Cylinder);
    config.t_end = 0.05;
    config.n = 128;
    println!("run exit code {}", run(&config, &dir));
    let report = verify_dir(&dir)?;
    println!("replayed timeline is a weak solution: {}", report.ok);
    for v in &report.violations {
        println!("  {v:?}");
    }
    Ok(())
}
