//! Straight-road ground truth against the first-order polar evolution
//! model the filter uses. Shows the one-step distance and angle error and
//! how it shrinks as the step is halved.
//!
//! cargo run --example motion_models

use beamtrack::harness::ScenarioConfig;
use beamtrack::motion::{evolve_state, pose_to_state, truth_step};
use rand_chacha::ChaCha8Rng;

fn main() -> beamtrack::Result<()> {
    let cfg = ScenarioConfig::default();
    let mut pose = cfg.initial_pose()?;
    println!("  t_s   theta_deg    d_m    d_err(dt)   d_err(dt/2)  ratio   theta_err_deg");
    for epoch in 0..=cfg.epochs {
        if epoch % 20 == 0 {
            let state = pose_to_state(pose, cfg.epsilon());
            let err = |dt: f64| -> beamtrack::Result<(f64, f64)> {
                let exact = pose_to_state(truth_step(pose, dt), cfg.epsilon());
                let model = evolve_state::<ChaCha8Rng>(&state, dt, None)?;
                Ok((
                    (model.d - exact.d).abs(),
                    (model.theta - exact.theta).abs().to_degrees(),
                ))
            };
            let (full, angle) = err(cfg.dt)?;
            let (half, _) = err(cfg.dt / 2.0)?;
            println!(
                "{:5.2} {:10.3} {:7.3} {:11.3e} {:12.3e} {:6.3} {:12.3e}",
                epoch as f64 * cfg.dt,
                state.theta.to_degrees(),
                state.d,
                full,
                half,
                full / half,
                angle
            );
        }
        pose = truth_step(pose, cfg.dt);
    }
    Ok(())
}
