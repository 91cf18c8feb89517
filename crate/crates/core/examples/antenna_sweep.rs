//! Tracking error and rate of both schemes as the array grows.
//!
//! cargo run --release --example antenna_sweep -- [trials]

use beamtrack::harness::{run_monte_carlo, ScenarioConfig, Scheme};

fn main() -> beamtrack::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(50);
    println!("    N   radar_err_deg  baseline_err_deg  radar_rate  baseline_rate  radar_better");
    for n in [16, 32, 64, 128] {
        let cfg = ScenarioConfig {
            trials,
            n_tx: n,
            n_rx: n,
            m_vehicle: n,
            ..ScenarioConfig::default()
        };
        let run = run_monte_carlo(&cfg)?;
        let s = &run.summary;
        let (d, f) = (
            s.totals(Scheme::Dfrc).unwrap(),
            s.totals(Scheme::Feedback).unwrap(),
        );
        println!(
            "{n:5} {:15.4} {:17.3} {:11.3} {:14.3} {:12.1}%",
            d.mean_abs_err_deg,
            f.mean_abs_err_deg,
            d.mean_rate_bpshz,
            f.mean_rate_bpshz,
            100.0 * s.per_scheme.dfrc_better_epoch_fraction.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
