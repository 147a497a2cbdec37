mod common;

use common::enumerate_decompositions;
use riccilab::surgery::cutoff_params;
use riccilab::topology::{classify, classify_profile, from_profile, oracle_classify, Shape};
use riccilab::warped::{make_profile, ProfileKind};

#[test]
fn exhaustive_agreement_up_to_six_pieces() {
    let all = enumerate_decompositions(6);
    let mut valid = 0;
    for d in &all {
        let (a, b) = (classify(d), oracle_classify(d));
        assert_eq!(a, b, "{d:?}");
        if a != Shape::Invalid {
            valid += 1;
        }
    }
    assert!(all.len() > 100_000, "{}", all.len());
    assert!(valid >= 100, "only {valid} valid decompositions");
}

#[test]
fn enumeration_covers_each_shape() {
    let mut seen: Vec<Shape> = enumerate_decompositions(4).iter().map(classify).collect();
    seen.sort_by_key(|s| s.tag());
    seen.dedup();
    for s in [
        Shape::S3,
        Shape::S2xS1,
        Shape::Spherical,
        Shape::R3,
        Shape::S2xR,
        Shape::Invalid,
    ] {
        assert!(seen.contains(&s), "{s} never produced");
    }
}

#[test]
fn profiles_classify() {
    let params = cutoff_params(4.0, 8e-3, &Default::default()).unwrap();
    let round = make_profile(ProfileKind::Round(1.0), 400).unwrap();
    assert_eq!(classify(&from_profile(&round, &params).unwrap()), Shape::Spherical);
    assert_eq!(classify_profile(&round, &params).unwrap(), Shape::S3);
    let cyl = make_profile(
        ProfileKind::Cylinder {
            radius: 1.0,
            length: 40.0,
        },
        400,
    )
    .unwrap();
    assert_eq!(classify_profile(&cyl, &params).unwrap(), Shape::S2xS1);
}
