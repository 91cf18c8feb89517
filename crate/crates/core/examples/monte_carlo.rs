//! Monte Carlo comparison of radar-assisted tracking against the feedback
//! baseline. Writes trace.csv, summary.json and SVG charts.
//!
//! cargo run --release --example monte_carlo -- [trials] [n_antennas] [out_dir]

use std::path::PathBuf;

use beamtrack::harness::{emit_outputs, run_monte_carlo, ScenarioConfig, Scheme};

fn main() -> beamtrack::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(64);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/monte_carlo".into()));

    let cfg = ScenarioConfig {
        trials,
        n_tx: n,
        n_rx: n,
        m_vehicle: n,
        ..ScenarioConfig::default()
    };
    let run = run_monte_carlo(&cfg)?;
    let s = &run.summary;

    println!("   t_s  theta_deg  err_dfrc  err_fb  rate_dfrc  rate_fb");
    for i in (0..cfg.epochs).step_by(10) {
        let (d, f) = (
            s.series(Scheme::Dfrc).unwrap(),
            s.series(Scheme::Feedback).unwrap(),
        );
        println!(
            "{:6.2} {:10.3} {:9.4} {:7.4} {:10.3} {:8.3}",
            s.per_epoch.t_s[i],
            s.per_epoch.theta_true_deg[i],
            d.mean_abs_err_deg[i],
            f.mean_abs_err_deg[i],
            d.mean_rate_bpshz[i],
            f.mean_rate_bpshz[i],
        );
    }
    for scheme in Scheme::ALL {
        if let Some(t) = s.totals(scheme) {
            println!(
                "{scheme}: mean err {:.4} deg, max epoch err {:.4} deg, rate {:.3}, diverged {}/{}",
                t.mean_abs_err_deg,
                t.max_epoch_mean_abs_err_deg,
                t.mean_rate_bpshz,
                t.diverged_trials,
                t.trials
            );
        }
    }
    if let Some(f) = s.per_scheme.dfrc_better_epoch_fraction {
        println!("dfrc better in {:.1}% of epochs", 100.0 * f);
    }
    let art = emit_outputs(&run.records, s, &out, true)?;
    println!("wrote {}", art.trace_csv.parent().unwrap().display());
    Ok(())
}
