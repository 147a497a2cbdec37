//! Symmetry-reduced curvature checked against a Riemann tensor assembled
//! from the coordinate metric.

mod common;

use std::f64::consts::PI;

use common::{pole_step, round_error, warped_metric, warped_oracle, Riemann};
use riccilab::warped::{self, make_profile, ProfileKind};

#[test]
fn oracle_knows_model_geometries() {
    // Unit sphere, flat-sphere cylinder, hyperbolic space.
    let g = warped_metric(|_| 1.0, |x| x.sin());
    let (ko, ks, r) = warped_oracle(&g, 0.7, 1e-3);
    assert!(
        (ko - 1.0).abs() < 1e-8 && (ks - 1.0).abs() < 1e-8 && (r - 6.0).abs() < 1e-7,
        "{ko} {ks} {r}"
    );
    let g = warped_metric(|_| 1.0, |_| 2.0);
    let (ko, ks, r) = warped_oracle(&g, 0.3, 1e-3);
    assert!(ko.abs() < 1e-8 && (ks - 0.25).abs() < 1e-8 && (r - 0.5).abs() < 1e-7);
    let g = warped_metric(|_| 1.0, |x| x.sinh());
    let (_, _, r) = warped_oracle(&g, 0.9, 1e-3);
    assert!((r + 6.0).abs() < 1e-7, "{r}");
}

#[test]
fn round_matches_oracle() {
    let e = round_error(800, 0.1, 0.9);
    assert!(e <= 1e-6, "max deviation {e:e}");
    // Near the poles the oracle is too noisy; use the analytic value.
    let p = make_profile(ProfileKind::Round(1.0), 800).unwrap();
    let c = warped::curvature(&p).unwrap();
    let worst = c.r.iter().map(|r| (r - 6.0).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst:e}");
}

#[test]
fn round_converges() {
    // Coarse grids, where the discretization error dwarfs the oracle's.
    let e: Vec<f64> = [64, 128, 256].iter().map(|&n| round_error(n, 0.25, 0.75)).collect();
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "order {order} from {e:?}");
    }
}

#[test]
fn cylinder_matches_oracle() {
    let p = make_profile(
        ProfileKind::Cylinder {
            radius: 1.0,
            length: 20.0,
        },
        800,
    )
    .unwrap();
    let c = warped::curvature(&p).unwrap();
    let g = warped_metric(|_| 20.0, |_| 1.0);
    for i in (0..=800).step_by(37) {
        let (ko, ks, r) = warped_oracle(&g, p.x(i), 1e-3);
        assert!((c.k_orth[i] - ko).abs() <= 1e-6 && (c.k_sph[i] - ks).abs() <= 1e-6 && (c.r[i] - r).abs() <= 1e-6);
        assert!((c.r[i] - 2.0).abs() <= 1e-10);
    }
}

#[test]
fn nonuniform_profile_matches_oracle() {
    // A grid coordinate that is not arclength exercises the phi terms.
    let phi = |x: f64| 2.0 + 0.5 * (2.0 * PI * x).cos();
    let s = |x: f64| 2.0 * x + 0.5 * (2.0 * PI * x).sin() / (2.0 * PI);
    let len = s(1.0);
    let psi = move |x: f64| (len / PI) * (PI * s(x) / len).sin();
    let n = 1600;
    let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let mut ps: Vec<f64> = xs.iter().map(|&x| psi(x)).collect();
    ps[0] = 0.0;
    ps[n] = 0.0;
    let p = warped::WarpedProfile::new(xs.iter().map(|&x| phi(x)).collect(), ps, warped::Topology::ClosedS3).unwrap();
    let c = warped::curvature(&p).unwrap();
    let g = warped_metric(phi, psi);
    let want = (PI / len).powi(2) * 6.0;
    for i in (n / 10..=n - n / 10).step_by(97) {
        let (_, _, r) = warped_oracle(&g, xs[i], pole_step(xs[i]));
        assert!((r - want).abs() < 1e-6 * want, "oracle {r} vs {want}");
        assert!((c.r[i] - r).abs() < 1e-5, "node {i}: {} vs {r}", c.r[i]);
    }
}

#[test]
fn curvature_operator_eigenvalues() {
    // X uses {K_orth, K_orth, K_sph}: check the mixed planes of a
    // non-round profile carry K_orth.
    let g = warped_metric(|_| 1.0, |x| 1.0 + 0.3 * x * x);
    let rm = Riemann::at(&*g, [0.5, 1.1, 0.0]);
    assert!((rm.sectional(0, 1) - rm.sectional(0, 2)).abs() < 1e-8);
    let psi = 1.0 + 0.3 * 0.25;
    assert!((rm.sectional(0, 1) + 0.6 / psi).abs() < 1e-7);
}

#[test]
fn cylinder_flow_matches_ode() {
    // Homogeneous cylinder: d(psi^2)/dt = -2 psi^2 K_sph = -2, from the oracle.
    let g = warped_metric(|_| 1.0, |_| 1.0);
    let (_, ks, _) = warped_oracle(&g, 0.5, 1e-3);
    let rate = -2.0 * ks;
    let p = make_profile(
        ProfileKind::Cylinder {
            radius: 1.0,
            length: 20.0,
        },
        128,
    )
    .unwrap();
    let dts = vec![1e-3; 100];
    let q = warped::advance(&p, &dts, &warped::GridPolicy::default(), 0.2).unwrap();
    for v in &q.psi {
        assert!((v * v - (1.0 + rate * 0.1)).abs() <= 1e-6, "{}", v * v);
    }
}
