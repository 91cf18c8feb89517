use std::fs;

use beamtrack::harness::{
    emit_outputs, parse_summary_json, parse_trace_csv, run_monte_carlo, summarize, summary_json,
    ScenarioConfig, Scheme, CSV_HEADER,
};
use beamtrack::propagation::los_channel;

fn small_run() -> (ScenarioConfig, beamtrack::harness::RunResult) {
    let cfg = ScenarioConfig {
        trials: 6,
        epochs: 90,
        master_seed: 77,
        ..ScenarioConfig::default()
    };
    let run = run_monte_carlo(&cfg).unwrap();
    (cfg, run)
}

#[test]
fn aggregates_recompute_from_csv_bit_exactly() {
    let (cfg, run) = small_run();
    let dir = tempfile::tempdir().unwrap();
    let art = emit_outputs(&run.records, &run.summary, dir.path(), true).unwrap();
    assert_eq!(art.plots.len(), 3);

    let text = fs::read_to_string(&art.trace_csv).unwrap();
    assert!(text.starts_with(CSV_HEADER));
    let records = parse_trace_csv(&text).unwrap();
    assert_eq!(records, run.records);
    assert_eq!(records.len(), 2 * cfg.trials * cfg.epochs);

    let diverged: Vec<(Scheme, usize)> = run
        .outcomes
        .iter()
        .filter(|o| o.diverged.is_some())
        .map(|o| (o.scheme, o.trial))
        .collect();
    let recomputed = summarize(&cfg, &records, &diverged);
    assert_eq!(
        summary_json(&recomputed).unwrap(),
        summary_json(&run.summary).unwrap()
    );

    // And independently of `summarize`: the per-epoch means.
    for scheme in Scheme::ALL {
        let series = run.summary.series(scheme).unwrap();
        for e in 1..=cfg.epochs {
            let rows: Vec<_> = records
                .iter()
                .filter(|r| r.scheme == scheme && r.epoch == e)
                .collect();
            let mean_err =
                rows.iter().map(|r| r.abs_angle_error_deg()).sum::<f64>() / rows.len() as f64;
            let mean_rate = rows.iter().map(|r| r.rate_bpshz).sum::<f64>() / rows.len() as f64;
            assert_eq!(series.mean_abs_err_deg[e - 1], mean_err);
            assert_eq!(series.mean_rate_bpshz[e - 1], mean_rate);
        }
    }
}

#[test]
fn summary_json_round_trips() {
    let (_, run) = small_run();
    let text = summary_json(&run.summary).unwrap();
    let parsed = parse_summary_json(&text).unwrap();
    assert_eq!(parsed, run.summary);
    assert_eq!(summary_json(&parsed).unwrap(), text);
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["config_echo", "per_epoch", "per_scheme", "version"] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn rate_never_exceeds_aligned_bound() {
    let (cfg, run) = small_run();
    let p = cfg.power();
    for r in &run.records {
        let alpha = los_channel(cfg.alpha_ref, r.d_true_m, cfg.fc, cfg.c).unwrap();
        let bound = (1.0
            + p * (cfg.n_tx * cfg.m_vehicle) as f64 * alpha.norm_sqr() / cfg.sigma_c_sq)
            .log2();
        assert!(
            r.rate_bpshz <= bound * (1.0 + 1e-12),
            "{} > {bound}",
            r.rate_bpshz
        );
        assert!(r.abs_delta <= 1.0 + 1e-12);
    }
}

#[test]
fn header_only_csv_for_no_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::default();
    let summary = summarize(&cfg, &[], &[]);
    let art = emit_outputs(&[], &summary, dir.path(), false).unwrap();
    assert_eq!(
        fs::read_to_string(art.trace_csv).unwrap(),
        format!("{CSV_HEADER}\n")
    );
    assert!(art.plots.is_empty());
}
