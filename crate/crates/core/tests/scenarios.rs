use fr3sim::scenario::config::ArrayConfig;
use fr3sim::scenario::stats::median;
use fr3sim::scenario::{run_capacity, run_satint, ScenarioConfig};

#[test]
fn larger_array_raises_sinr() {
    let mut cfg = ScenarioConfig::default();
    cfg.n_drops = 1000;
    cfg.capacity.interference.enabled = true;
    let mut small = cfg.capacity.bands[0];
    small.bs_array = ArrayConfig::ura(2, 2);
    let mut large = small;
    large.bs_array = ArrayConfig::ura(8, 8);
    cfg.capacity.bands = vec![small, large];

    let recs = run_capacity(&cfg, 4).unwrap();
    let better = recs
        .iter()
        .filter(|r| r.bands[1].sinr_db.unwrap() >= r.bands[0].sinr_db.unwrap())
        .count();
    assert!(better >= 700, "8x8 at least as good in {better}/1000 drops");
}

#[test]
fn interference_falls_with_frequency() {
    let mut cfg = ScenarioConfig::default();
    cfg.n_drops = 500;
    cfg.satint.lambda_grid = vec![0.0];
    let med = |f: f64| {
        let recs = run_satint(&cfg, f, 4).unwrap();
        median(&recs.iter().map(|r| r.inr_baseline_db).collect::<Vec<_>>()).unwrap()
    };
    assert!(med(18e9) <= med(6e9) - 6.0);
}

#[test]
fn drops_are_paired_across_frequencies() {
    let mut cfg = ScenarioConfig::default();
    cfg.n_drops = 50;
    let a = run_satint(&cfg, 6e9, 2).unwrap();
    let b = run_satint(&cfg, 18e9, 2).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.sat_azimuth_deg, y.sat_azimuth_deg);
        assert_eq!(x.ue_distance_m, y.ue_distance_m);
    }
}
