//! Lifetime of round spheres of several radii, run in parallel.

use riccilab::cli::{sweep, write_summary};
use riccilab::config::{RunConfig, Scenario};

fn main() -> riccilab::Result<()> {
    let mut template = RunConfig::for_scenario(Scenario::Round);
    template.n = 128;
    template.t_end = 1.0;
    let radii: Vec<String> = ["0.5", "0.75", "1", "1.25"].iter().map(|s| s.to_string()).collect();
    let rows = sweep(&template, "radius", &radii, 4, None)?;
    print!("{}", write_summary(&rows));
    Ok(())
}
