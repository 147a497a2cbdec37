//! A dumbbell pinches at its waist; surgery cuts the neck and caps both sides.

use riccilab::cli::execute;
use riccilab::config::{RunConfig, Scenario};

fn main() -> riccilab::Result<()> {
    let a = execute(&RunConfig::for_scenario(Scenario::Dumbbell))?;
    for ev in a.timeline.all_surgeries() {
        println!(
            "surgery at t = {:.6e} (normalized): {} necks, {} pieces, R_max {:.1} -> {:.1}",
            ev.time,
            ev.necks_used.len(),
            ev.components_after(),
            ev.pre.diagnostics.r_max,
            ev.post_r_max()
        );
    }
    println!("outcome {}", a.outcome_tag());
    println!("weak solution audit ok: {}", a.weak.ok);
    Ok(())
}
