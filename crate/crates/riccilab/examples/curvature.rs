//! Curvature of a warped profile and how close its waist is to a round neck.

use riccilab::surgery::{cutoff_params, neck_at};
use riccilab::warped::{self, make_profile, DumbbellShape, ProfileKind};

fn main() -> riccilab::Result<()> {
    let p = make_profile(ProfileKind::Dumbbell(DumbbellShape::new(0.05, 1.0)), 400)?;
    let c = warped::curvature(&p)?;
    println!(
        "R in [{:.3}, {:.3}], volume {:.5}",
        c.r_min(),
        c.r_max(),
        warped::volume(&p)
    );
    let s = p.arclength();
    for i in (0..=p.n()).step_by(50) {
        println!(
            "s = {:.4}  psi = {:.4}  K_orth = {:+.4e}  K_sph = {:+.4e}",
            s[i], p.psi[i], c.k_orth[i], c.k_sph[i]
        );
    }
    let params = cutoff_params(4.0, 8e-3, &Default::default())?;
    let neck = neck_at(&p, p.n() / 2, &params)?;
    println!(
        "waist: rescale {:.1}, distance from the unit cylinder {:.3e} (delta {})",
        neck.lambda, neck.quality, params.delta
    );
    Ok(())
}
