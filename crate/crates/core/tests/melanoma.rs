use std::path::Path;

use sbs::classical::kalbfleisch_prentice;
use sbs::posterior::count_statistics;
use sbs::io::{ingest, Discretization};

#[test]
fn bundled_melanoma_data_has_expected_composition() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/melanoma.csv");
    let (data, grid) = ingest(&path, 2, &Discretization::default(), None).unwrap();
    assert_eq!(data.len(), 205);
    assert_eq!(data.covariate_names, vec!["sex".to_string()]);
    let count = |d: usize| data.observations.iter().filter(|o| o.cause == d).count();
    assert_eq!((count(1), count(2), count(0)), (57, 14, 134));
    let male = data.covariates.iter().filter(|w| w[0] == 1.0).count();
    assert_eq!((205 - male, male), (126, 79));

    let stats = count_statistics(&data.observations, grid.horizon(), 2).unwrap();
    let kp = kalbfleisch_prentice(&stats);
    let last = grid.horizon();
    let total = kp.cumulative(last, 1).unwrap() + kp.cumulative(last, 2).unwrap();
    assert!(total > 0.0 && total < 1.0);
}
