//! Closed-form flows of homogeneous metrics and their rescaled limits.

use riccilab::homogeneous::{self, Family};

fn main() -> riccilab::Result<()> {
    let sphere = homogeneous::flow_constant_curvature(1.0, 0.0)?;
    println!("unit S^3 goes extinct at t = {:?}", sphere.extinction);
    for t in [1.0, 10.0, 100.0, 1000.0] {
        let h = homogeneous::state_at(Family::ConstantCurvature { k0: -1.0 }, 1.0, t)?;
        let p = homogeneous::state_at(Family::CircleTimesHypSurface { a: 1.0, b: 1.0 }, 1.0, t)?;
        let (hr, pr) = (h.scaled(1.0 / (4.0 * t)), p.scaled(1.0 / (4.0 * t)));
        println!(
            "t = {t:>6}: hyperbolic sec after g/(4t) {:+.5}, product curvatures after g/(4t) {:?}",
            hr.sectional().unwrap(),
            pr.curvature_eigenvalues()
        );
    }
    Ok(())
}
