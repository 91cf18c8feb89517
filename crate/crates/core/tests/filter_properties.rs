use beamtrack::harness::{ScenarioConfig, Scheme};
use beamtrack::motion::VehicleState;
use beamtrack::numerics::RealMat;
use beamtrack::tracker::{
    dfrc_measurement_model, feedback_measurement_model, jacobian_g, jacobian_h_dfrc, kalman_gain,
    EkfBelief, MeasurementModel,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn central_difference(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], col: usize) -> Vec<f64> {
    let h = 1e-6 * x[col].abs().max(1.0);
    let (mut hi, mut lo) = (x.to_vec(), x.to_vec());
    hi[col] += h;
    lo[col] -= h;
    f(&hi)
        .iter()
        .zip(f(&lo))
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect()
}

fn assert_close_by_row(analytic: &RealMat, f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) {
    let cols: Vec<Vec<f64>> = (0..x.len()).map(|c| central_difference(&f, x, c)).collect();
    for r in 0..analytic.rows() {
        let scale = (0..x.len())
            .map(|c| analytic[(r, c)].abs().max(cols[c][r].abs()))
            .fold(0.0, f64::max);
        for c in 0..x.len() {
            let err = (analytic[(r, c)] - cols[c][r]).abs();
            assert!(
                err <= 1e-5 * scale.max(f64::MIN_POSITIVE),
                "row {r} col {c}: {err} vs {scale}"
            );
        }
    }
}

fn state() -> impl Strategy<Value = Vec<f64>> {
    (
        0.05f64..3.09,
        2.0f64..80.0,
        -35.0f64..35.0,
        -2.0f64..2.0,
        -2.0f64..2.0,
    )
        .prop_map(|(t, d, v, re, im)| vec![t, d, v, re, im])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_jacobian_matches_differences(x in state(), dt in 0.001f64..0.1) {
        let evolve = |s: &[f64]| {
            beamtrack::motion::evolve_state::<rand_chacha::ChaCha8Rng>(
                &VehicleState::from_vector(s).unwrap(), dt, None,
            ).unwrap().to_vector()
        };
        assert_close_by_row(&jacobian_g(&x, dt).unwrap(), evolve, &x);
    }

    #[test]
    fn echo_jacobian_matches_differences(x in state(), offset in -0.1f64..0.1, n in 2usize..40) {
        let cfg = ScenarioConfig { n_tx: n, n_rx: n, m_vehicle: n, ..ScenarioConfig::default() };
        let params = cfg.sensing(Scheme::Dfrc);
        let model = dfrc_measurement_model(&params, x[0] + offset).unwrap();
        let jac = jacobian_h_dfrc(&x, x[0] + offset, &params).unwrap();
        prop_assert_eq!(jac.shape(), (2 * n + 2, 5));
        assert_close_by_row(&jac, |s| model.mean(s).unwrap(), &x);
    }

    #[test]
    fn pilot_jacobian_matches_differences(
        x in state(),
        tx in -0.05f64..0.05,
        rx in -0.05f64..0.05,
        phase in 0.0f64..std::f64::consts::TAU,
    ) {
        let params = ScenarioConfig::default().sensing(Scheme::Feedback);
        let alpha = Complex64::from_polar(0.8, phase);
        let model = feedback_measurement_model(&params, x[0] + tx, x[0] + rx, alpha).unwrap();
        let k = &x[..3];
        assert_close_by_row(&model.jacobian(k).unwrap(), |s| model.mean(s).unwrap(), k);
    }

    /// Scaling both the prior MSE and the measurement noise by the same
    /// factor leaves the gain unchanged.
    #[test]
    fn gain_is_invariant_to_joint_scaling(c in 1e-3f64..1e3, theta_off in -0.02f64..0.02) {
        struct Scaled<'a, M>(&'a M, f64);
        impl<M: MeasurementModel> MeasurementModel for Scaled<'_, M> {
            fn dim(&self) -> usize { self.0.dim() }
            fn mean(&self, x: &[f64]) -> beamtrack::Result<Vec<f64>> { self.0.mean(x) }
            fn jacobian(&self, x: &[f64]) -> beamtrack::Result<RealMat> { self.0.jacobian(x) }
            fn noise_diag(&self, x: &[f64]) -> beamtrack::Result<Vec<f64>> {
                Ok(self.0.noise_diag(x)?.into_iter().map(|q| q * self.1).collect())
            }
        }
        let cfg = ScenarioConfig::default();
        let x = vec![cfg.theta0() + theta_off, cfg.d0, cfg.v0, cfg.beta0_re, cfg.beta0_im];
        let model = dfrc_measurement_model(&cfg.sensing(Scheme::Dfrc), cfg.theta0()).unwrap();
        let m = cfg.initial_mse(Scheme::Dfrc);
        let base = kalman_gain(&EkfBelief::new(x.clone(), m.clone()).unwrap(), &model, 1e12).unwrap();
        let scaled = kalman_gain(
            &EkfBelief::new(x, m.scale(c)).unwrap(),
            &Scaled(&model, c),
            1e12,
        ).unwrap();
        for r in 0..base.rows() {
            let row_scale = base.row(r).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for col in 0..base.cols() {
                let err = (base[(r, col)] - scaled[(r, col)]).abs();
                prop_assert!(err <= 1e-9 * row_scale, "K[{},{}] {} vs {}", r, col, base[(r, col)], scaled[(r, col)]);
            }
        }
    }
}
