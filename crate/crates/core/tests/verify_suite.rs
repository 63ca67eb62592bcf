use orlicz_lab::verify::{caccioppoli_suite, judge, BallPair, Expectation, Fixture, LevelData, UnitSpeed};
use orlicz_lab::{Grid2D, OrliczFunction, ScalarField};

fn sampled_levels(fixture: Fixture, sizes: &[usize]) -> Vec<LevelData> {
    sizes
        .iter()
        .map(|&n| {
            let g = Grid2D::square(n, -1.0, 1.0).unwrap();
            LevelData {
                u: fixture.sample(g),
                f: ScalarField::zeros(g),
            }
        })
        .collect()
}

#[test]
fn unit_speed_field_on_saddle_diverges() {
    let levels = sampled_levels(Fixture::Saddle, &[17, 33, 65, 129]);
    let balls = [BallPair::new((0.0, 0.0), 0.25).unwrap()];
    let q = OrliczFunction::quadratic();
    let table = caccioppoli_suite(&q, &UnitSpeed, &levels, &balls, 0.0).unwrap();
    assert!(judge(Expectation::Divergent, &table, true).pass);
    let smooth = caccioppoli_suite(&q, &q, &levels, &balls, 0.0).unwrap();
    assert!(!judge(Expectation::Divergent, &smooth, true).pass);
    assert!(judge(Expectation::Bounded, &smooth, true).pass);
}

#[test]
fn one_dimensional_profile_brackets_threshold() {
    let levels = sampled_levels(Fixture::PLaplaceProfile { p: 3.0 }, &[33, 65, 129, 257]);
    let balls = [BallPair::new((0.0, 0.0), 0.25).unwrap()];
    let phi = OrliczFunction::power(3.0).unwrap();
    let above = caccioppoli_suite(&phi, &OrliczFunction::power(2.1).unwrap(), &levels, &balls, 0.0).unwrap();
    let below = caccioppoli_suite(&phi, &OrliczFunction::power(1.9).unwrap(), &levels, &balls, 0.0).unwrap();
    assert!(judge(Expectation::LhsConverges, &above, true).pass);
    assert!(!judge(Expectation::LhsDiverges, &above, true).pass);
    assert!(judge(Expectation::LhsDiverges, &below, true).pass);
    assert!(!judge(Expectation::LhsConverges, &below, true).pass);
}
