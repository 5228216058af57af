use std::path::PathBuf;

use pairblock_core::{load_config, run_sweep, Axis};

fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const SHIPPED: [&str; 9] = [
    "fig2_weak",
    "fig2_strong",
    "fig4",
    "fig5_weak",
    "fig5_strong",
    "fig6",
    "fig6_strong",
    "fig7",
    "fig7_strong",
];

#[test]
fn shipped_configs_parse_with_expected_axes() {
    for name in SHIPPED {
        let cfg = load_config(&config_dir().join(format!("{name}.toml"))).unwrap();
        assert_eq!(cfg.name, name);
        let expected = match &name[..4] {
            "fig2" => Axis::Delta,
            "fig4" => Axis::JCoupling,
            "fig5" | "fig6" => Axis::GammaM,
            _ => Axis::MTh,
        };
        assert_eq!(cfg.axis, expected, "{name}");
        assert!(cfg.check_truncation, "{name} must keep the truncation check");
        assert_eq!(cfg.couple_delta_to_j, expected != Axis::Delta, "{name}");
    }
}

#[test]
fn shipped_configs_run_end_to_end() {
    // the doubled-truncation pass is exercised by the CLI runs; here every
    // point is solved once at the configured cutoff
    for name in SHIPPED {
        let mut cfg = load_config(&config_dir().join(format!("{name}.toml"))).unwrap();
        cfg.check_truncation = false;
        let result = run_sweep(&cfg).unwrap();
        assert_eq!(result.rows.len(), cfg.axis_values.resolve().unwrap().len());
        assert_eq!(result.failed_rows(), 0, "{name}");
        for row in &result.rows {
            let r = row.record.as_ref().unwrap();
            assert!(r.log_neg >= 0.0 && r.mean_n >= 0.0 && r.mean_m >= 0.0);
        }
    }
}

#[test]
fn coupled_sweep_is_even_in_detuning_sign() {
    let mut cfg = load_config(&config_dir().join("fig4.toml")).unwrap();
    cfg.check_truncation = false;
    cfg.axis_values = pairblock_core::AxisValues::List(vec![0.05, 1.0, 20.0]);
    let plus = run_sweep(&cfg).unwrap();
    cfg.delta_sign = pairblock_core::sweep::DeltaSign::Minus;
    let minus = run_sweep(&cfg).unwrap();
    for (a, b) in plus.rows.iter().zip(&minus.rows) {
        assert_eq!(a.params.delta, -b.params.delta);
        let (ra, rb) = (a.record.as_ref().unwrap(), b.record.as_ref().unwrap());
        assert!((ra.mean_n - rb.mean_n).abs() <= 1e-8 * ra.mean_n);
        assert!((ra.log_neg - rb.log_neg).abs() <= 1e-8 * ra.log_neg.max(1e-300));
        let (ga, gb) = (ra.g2_nm.unwrap(), rb.g2_nm.unwrap());
        assert!((ga - gb).abs() <= 1e-8 * ga);
    }
}
