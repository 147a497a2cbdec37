mod common;

use common::{golden, mutate, Mutation};
use riccilab::config::Scenario;
use riccilab::timeline::verify_weak_solution;
use riccilab::topology::{classify_profile, Shape};

#[test]
fn golden_timelines_verify() {
    for s in Scenario::ALL {
        let a = &golden(s).artifacts;
        assert!(a.weak.ok, "{s}: {:?}", a.weak.violations);
    }
}

#[test]
fn mutations_are_rejected() {
    let t = &golden(Scenario::Dumbbell).artifacts.timeline;
    assert!(!t.surgeries.is_empty());
    for m in Mutation::ALL {
        let bad = mutate(t, m);
        let rep = verify_weak_solution(&bad);
        assert!(!rep.ok, "{m:?} accepted");
        assert!(
            rep.violations.iter().any(|v| v.condition == m.expected()),
            "{m:?}: {:?}",
            rep.violations
        );
        // Only the mutated surgery is at fault.
        assert!(
            rep.violations.iter().all(|v| v.time == t.surgeries[0].time),
            "{m:?}: {:?}",
            rep.violations
        );
    }
}

#[test]
fn dent_and_bulge_are_isolated() {
    let t = &golden(Scenario::Dumbbell).artifacts.timeline;
    for m in [Mutation::RminDrop, Mutation::MetricIncrease] {
        let v = mutate(t, m).surgeries[0].violations();
        assert!(
            !v.is_empty() && v.iter().all(|v| v.condition == m.expected()),
            "{m:?}: {v:?}"
        );
    }
}

#[test]
fn post_surgery_components_are_spheres() {
    let a = &golden(Scenario::Dumbbell).artifacts;
    let params = a.config.surgery_params().unwrap();
    for ev in a.timeline.all_surgeries() {
        for c in &ev.post {
            let p = c.snapshot.warped().unwrap();
            assert_eq!(classify_profile(p, &params).unwrap(), Shape::S3);
        }
    }
}
