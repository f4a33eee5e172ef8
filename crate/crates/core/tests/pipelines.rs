//! End-to-end runs of the correlate pipeline on the synthetic battery.

use hoi::experiments::{correlate, synthetic_battery, BatteryConfig, CorrelateConfig};

#[test]
fn battery_signs_hold_within_each_class() {
    let battery = synthetic_battery(&BatteryConfig::default()).unwrap();
    let config = CorrelateConfig {
        draws: 30,
        ..CorrelateConfig::default()
    };
    let report = correlate(&battery.series, &battery.triads(), &config).unwrap();
    assert_eq!(report.records.len(), 225);

    let mut seen = 0;
    for class in ["redundant", "synergistic", "nonsignificant"] {
        let Some(c) = report.class(class) else { continue };
        if c.n_triads < 20 {
            continue;
        }
        seen += 1;
        let h2 = c.get("o_norm", "h2_avg_persistence").unwrap();
        let pc1 = c.get("o_norm", "pc1_variance").unwrap();
        assert!(h2.rho < 0.0, "{class}: rho(o_norm, h2_avg_persistence) = {}", h2.rho);
        assert!(pc1.rho > 0.0, "{class}: rho(o_norm, pc1_variance) = {}", pc1.rho);
    }
    assert!(seen >= 2, "too few populated classes");
}
