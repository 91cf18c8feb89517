//! The predict / beamform / sense / track loop written out against the
//! library pieces directly, without the harness. Useful as a starting point
//! for a custom scenario or measurement model.
//!
//! cargo run --release --example manual_loop

use beamtrack::array::ArrayGeometry;
use beamtrack::harness::{ScenarioConfig, Scheme};
use beamtrack::motion::{pose_to_state, truth_step};
use beamtrack::propagation::synth_radar_measurement;
use beamtrack::tracker::{
    dfrc_measurement_model, EkfBelief, ExtendedKalmanFilter, PolarMotion, StateLayout,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> beamtrack::Result<()> {
    let cfg = ScenarioConfig::default();
    let sensing = cfg.sensing(Scheme::Dfrc);
    let tx = ArrayGeometry::new(cfg.n_tx)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let mut pose = cfg.initial_pose()?;
    let start = pose_to_state(pose, cfg.epsilon());
    let motion = PolarMotion {
        dt: cfg.dt,
        noise: cfg.process_noise(),
        layout: StateLayout::WithReflection,
    };
    let belief = EkfBelief::new(start.to_vector(), cfg.initial_mse(Scheme::Dfrc))?;
    let mut ekf = ExtendedKalmanFilter::new(belief, motion)?;

    println!("epoch  theta_true  theta_est   err_deg   trace(M)");
    for epoch in 1..=cfg.epochs {
        pose = truth_step(pose, cfg.dt);
        let truth = pose_to_state(pose, cfg.epsilon());

        let prediction = ekf.predict()?;
        let beam_angle = prediction.one_step.x[0];
        let echo = synth_radar_measurement(
            &truth,
            &tx.steering(beam_angle),
            cfg.n_rx,
            &sensing.budget,
            Some(&mut rng),
        )?;
        let model = dfrc_measurement_model(&sensing, beam_angle)?;
        ekf.correct(&prediction, &echo.measurement.to_real(), &model)?;

        if epoch % 20 == 0 {
            let est = ekf.belief.x[0];
            println!(
                "{epoch:5} {:11.4} {:10.4} {:9.5} {:10.3e}",
                truth.theta.to_degrees(),
                est.to_degrees(),
                (est - truth.theta).abs().to_degrees(),
                ekf.belief.m.trace()
            );
        }
    }
    Ok(())
}
