//! One trial of each scheme through the harness, printing every tenth
//! epoch of the trace.
//!
//! cargo run --release --example single_trial -- [seed]

use beamtrack::harness::{run_trial, ScenarioConfig, Scheme};

fn main() -> beamtrack::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let cfg = ScenarioConfig::default();
    for scheme in Scheme::ALL {
        let out = run_trial(&cfg, scheme, 0, seed)?;
        println!("\n{scheme}  (seed {seed})");
        println!("   t_s  theta_true  theta_pred1  theta_est   d_est   v_est  |delta|   rate");
        for r in out.records.iter().filter(|r| r.epoch % 10 == 0) {
            println!(
                "{:6.2} {:11.3} {:12.3} {:10.3} {:7.2} {:7.2} {:8.4} {:6.2}",
                r.t_s,
                r.theta_true_deg,
                r.theta_pred1_deg,
                r.theta_est_deg,
                r.d_est_m,
                r.v_est_mps,
                r.abs_delta,
                r.rate_bpshz
            );
        }
        if let Some(reason) = out.diverged {
            println!("diverged: {reason}");
        }
    }
    Ok(())
}
