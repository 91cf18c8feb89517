//! Post-matched-filter measurement synthesis and the downlink link budget.
//!
//! No waveform is generated: the echo vector, delay and Doppler are drawn
//! directly around their analytic means with variances that follow the
//! receive-SNR law.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::array::{array_gain, ArrayGeometry};
use crate::error::{Error, Result};
use crate::motion::VehicleState;
use crate::numerics::{inner, real_augment_vec, ComplexVec, RealVec};

/// Speed of light used by default, m/s.
pub const SPEED_OF_LIGHT: f64 = 3e8;

/// Floor applied to `|δ|²` inside the delay/Doppler variance law. Keeps the
/// variances finite (at most 1e6× their aligned value) when the beam misses.
pub const GAIN_SQ_FLOOR: f64 = 1e-6;

/// Post-matched-filter observation: the normalized echo (or, for the
/// feedback baseline, the single combined pilot), round-trip delay and
/// Doppler shift.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarMeasurement {
    pub r_tilde: ComplexVec,
    /// Seconds.
    pub tau: f64,
    /// Hz.
    pub mu: f64,
}

impl RadarMeasurement {
    /// `[Re r₁, Im r₁, …, τ, μ]`.
    pub fn to_real(&self) -> RealVec {
        let mut y = real_augment_vec(&self.r_tilde);
        y.push(self.tau);
        y.push(self.mu);
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseProfile {
    /// Echo noise, complex variance per antenna.
    pub sigma1_sq: f64,
    /// Delay noise, s².
    pub sigma2_sq: f64,
    /// Doppler noise, Hz².
    pub sigma3_sq: f64,
}

impl NoiseProfile {
    pub fn is_valid(&self) -> bool {
        [self.sigma1_sq, self.sigma2_sq, self.sigma3_sq]
            .iter()
            .all(|s| s.is_finite() && *s > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Transmit power (linear).
    pub p: f64,
    /// Radar receiver noise variance.
    pub sigma_sq: f64,
    /// Communication receiver noise variance.
    pub sigma_c_sq: f64,
    /// Matched-filter gain `G`.
    pub g_mf: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// Carrier frequency, Hz.
    pub fc: f64,
    /// Propagation speed, m/s.
    pub c: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("p", self.p),
            ("g_mf", self.g_mf),
            ("fc", self.fc),
            ("c", self.c),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        for (name, value) in [
            ("sigma_sq", self.sigma_sq),
            ("sigma_c_sq", self.sigma_c_sq),
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be non-negative, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Budget seen by the downlink pilot of the feedback baseline: the
    /// vehicle's receiver noise and a single-pilot matched-filter gain.
    pub fn pilot_budget(&self, g_mf: f64) -> Self {
        Self {
            sigma_sq: self.sigma_c_sq,
            g_mf,
            ..*self
        }
    }

    pub fn wavelength(&self) -> f64 {
        self.c / self.fc
    }
}

/// `β = ε/(2d)`.
pub fn reflection_coeff(epsilon: Complex64, d: f64) -> Result<Complex64> {
    if !(d > 0.0) {
        return Err(Error::invalid(format!(
            "distance must be positive, got {d}"
        )));
    }
    Ok(epsilon / (2.0 * d))
}

/// `σ₁² = a₁²σ²/(G p)` and `σᵢ² = aᵢ²σ²/(G κ²|β|²|δ|² p)` for i = 2, 3.
pub fn noise_variances(
    budget: &LinkBudget,
    beta: Complex64,
    delta: Complex64,
    kappa: f64,
) -> Result<NoiseProfile> {
    if beta.norm() == 0.0 || delta.norm() == 0.0 {
        return Err(Error::invalid(
            "zero reflection or beam gain gives unbounded delay/Doppler variance",
        ));
    }
    Ok(variance_law(
        budget,
        beta.norm_sqr(),
        delta.norm_sqr(),
        kappa,
    ))
}

/// [`noise_variances`] with `|δ|²` floored at [`GAIN_SQ_FLOOR`]. The flag is
/// set when the floor was active, which the harness reports as track loss.
pub fn noise_variances_clamped(
    budget: &LinkBudget,
    beta: Complex64,
    delta: Complex64,
    kappa: f64,
) -> Result<(NoiseProfile, bool)> {
    if !(beta.norm() > 0.0) {
        return Err(Error::invalid("reflection coefficient vanished"));
    }
    let gain_sq = delta.norm_sqr();
    let clamped = !(gain_sq >= GAIN_SQ_FLOOR);
    let gain_sq = if clamped { GAIN_SQ_FLOOR } else { gain_sq };
    Ok((
        variance_law(budget, beta.norm_sqr(), gain_sq, kappa),
        clamped,
    ))
}

fn variance_law(budget: &LinkBudget, beta_sq: f64, gain_sq: f64, kappa: f64) -> NoiseProfile {
    let base = budget.sigma_sq / (budget.g_mf * budget.p);
    let echo_power = kappa * kappa * beta_sq * gain_sq;
    NoiseProfile {
        sigma1_sq: budget.a1 * budget.a1 * base,
        sigma2_sq: budget.a2 * budget.a2 * base / echo_power,
        sigma3_sq: budget.a3 * budget.a3 * base / echo_power,
    }
}

/// Noise-free delay `2d/c`.
pub fn delay_mean(d: f64, budget: &LinkBudget) -> f64 {
    2.0 * d / budget.c
}

/// Noise-free Doppler `2 v cos θ f_c / c`.
pub fn doppler_mean(theta: f64, v: f64, budget: &LinkBudget) -> f64 {
    2.0 * v * theta.cos() * budget.fc / budget.c
}

/// A synthesized measurement with the noise law that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub measurement: RadarMeasurement,
    pub noise: NoiseProfile,
    /// Beam gain realized against the true angle.
    pub gain: Complex64,
    /// True when the variance floor was active.
    pub clamped: bool,
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    Complex64::new(
        s * rng.sample::<f64, _>(StandardNormal),
        s * rng.sample::<f64, _>(StandardNormal),
    )
}

fn real_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> f64 {
    variance.sqrt() * rng.sample::<f64, _>(StandardNormal)
}

fn add_noise<R: Rng + ?Sized>(
    echo: ComplexVec,
    tau: f64,
    mu: f64,
    noise: &NoiseProfile,
    rng: Option<&mut R>,
) -> RadarMeasurement {
    match rng {
        None => RadarMeasurement {
            r_tilde: echo,
            tau,
            mu,
        },
        Some(rng) => {
            let r_tilde = echo
                .into_iter()
                .map(|e| e + complex_gaussian(rng, noise.sigma1_sq))
                .collect();
            let tau = tau + real_gaussian(rng, noise.sigma2_sq);
            let mu = mu + real_gaussian(rng, noise.sigma3_sq);
            RadarMeasurement { r_tilde, tau, mu }
        }
    }
}

/// Radar echo at the RSU for transmit beam `f_beam` (length `N_t`) and a
/// receive array of `n_rx` elements: `r̃ = κβ b(θ) aᴴ(θ) f + z`,
/// `τ = 2d/c + z_τ`, `μ = 2v cos θ f_c/c + z_f`. Pass `None` for a
/// noise-free draw.
pub fn synth_radar_measurement<R: Rng + ?Sized>(
    state: &VehicleState,
    f_beam: &[Complex64],
    n_rx: usize,
    budget: &LinkBudget,
    rng: Option<&mut R>,
) -> Result<Synthesized> {
    let tx = ArrayGeometry::new(f_beam.len())?;
    let rx = ArrayGeometry::new(n_rx)?;
    let kappa = array_gain(tx.n_elements(), n_rx)?;
    let gain = inner(&tx.steering(state.theta), f_beam);
    let (noise, clamped) = noise_variances_clamped(budget, state.beta, gain, kappa)?;
    let amplitude = state.beta * gain * kappa;
    let echo = rx
        .steering(state.theta)
        .into_iter()
        .map(|b| amplitude * b)
        .collect();
    let measurement = add_noise(
        echo,
        delay_mean(state.d, budget),
        doppler_mean(state.theta, state.v, budget),
        &noise,
        rng,
    );
    Ok(Synthesized {
        measurement,
        noise,
        gain,
        clamped,
    })
}

/// Combined downlink pilot of the feedback baseline:
/// `κ̃ α wᴴu(θ) aᴴ(θ) f` plus delay and Doppler, with the variance law
/// evaluated for the pilot budget (`budget` should come from
/// [`LinkBudget::pilot_budget`]).
pub fn synth_pilot_measurement<R: Rng + ?Sized>(
    state: &VehicleState,
    f_beam: &[Complex64],
    w_beam: &[Complex64],
    alpha: Complex64,
    budget: &LinkBudget,
    rng: Option<&mut R>,
) -> Result<Synthesized> {
    let kappa = array_gain(f_beam.len(), w_beam.len())?;
    let gain = combined_gain(state.theta, f_beam, w_beam)?;
    let (noise, clamped) = noise_variances_clamped(budget, alpha, gain, kappa)?;
    let pilot = vec![alpha * gain * kappa];
    let measurement = add_noise(
        pilot,
        delay_mean(state.d, budget),
        doppler_mean(state.theta, state.v, budget),
        &noise,
        rng,
    );
    Ok(Synthesized {
        measurement,
        noise,
        gain,
        clamped,
    })
}

/// `wᴴu(θ) · aᴴ(θ) f` for a transmit beam `f` and vehicle combiner `w`.
pub fn combined_gain(theta: f64, f_beam: &[Complex64], w_beam: &[Complex64]) -> Result<Complex64> {
    let tx = ArrayGeometry::new(f_beam.len())?;
    let veh = ArrayGeometry::new(w_beam.len())?;
    Ok(inner(w_beam, &veh.steering(theta)) * inner(&tx.steering(theta), f_beam))
}

/// Line-of-sight coefficient `α = (α̃/d)·exp(j2π f_c d / c)`.
pub fn los_channel(alpha_ref: f64, d: f64, fc: f64, c: f64) -> Result<Complex64> {
    if !(d > 0.0) {
        return Err(Error::invalid(format!(
            "distance must be positive, got {d}"
        )));
    }
    Ok(Complex64::from_polar(alpha_ref / d, 2.0 * PI * fc * d / c))
}

/// Receive SNR at the vehicle, `p|κ̃ α wᴴu(θ) aᴴ(θ) f|²/σ_C²` with
/// `κ̃ = √(N_t·M)`.
pub fn comm_snr(
    theta: f64,
    f_beam: &[Complex64],
    w_beam: &[Complex64],
    alpha: Complex64,
    budget: &LinkBudget,
) -> Result<f64> {
    let kappa = array_gain(f_beam.len(), w_beam.len())?;
    let g = combined_gain(theta, f_beam, w_beam)?;
    Ok(budget.p * (alpha * g * kappa).norm_sqr() / budget.sigma_c_sq)
}

/// Achievable rate `log₂(1 + SNR)`, bit/s/Hz.
pub fn rate(snr: f64) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(Error::invalid(format!(
            "SNR must be non-negative, got {snr}"
        )));
    }
    Ok(snr.ln_1p() / std::f64::consts::LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::steering;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reference_budget() -> LinkBudget {
        LinkBudget {
            p: 10.0,
            sigma_sq: 1.0,
            sigma_c_sq: 1.0,
            g_mf: 10.0,
            a1: 1.0,
            a2: 6.7e-7,
            a3: 2e4,
            fc: 30e9,
            c: SPEED_OF_LIGHT,
        }
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn reflection_examples() {
        let h = 0.5f64.sqrt();
        let eps = Complex64::new(h, h) * 50.0;
        let beta = reflection_coeff(eps, 25.0).unwrap();
        assert!((beta - Complex64::new(h, h)).norm() < 1e-15);
        assert_eq!(
            reflection_coeff(Complex64::new(0.0, 0.0), 5.0)
                .unwrap()
                .norm(),
            0.0
        );
        let near = reflection_coeff(eps, 12.5).unwrap();
        assert!((near.norm() - 2.0 * beta.norm()).abs() < 1e-14);
        assert!(reflection_coeff(eps, 0.0).is_err());
    }

    #[test]
    fn variance_law_at_default_parameters() {
        let b = reference_budget();
        let n = noise_variances(&b, one(), one(), 64.0).unwrap();
        assert!((n.sigma1_sq - 0.01).abs() < 1e-15);
        let expected = (6.7e-7f64).powi(2) / (10.0 * 4096.0 * 10.0);
        assert!((n.sigma2_sq / expected - 1.0).abs() < 1e-12);
        assert!((n.sigma2_sq - 1.09595e-18).abs() < 1e-23);
        let doubled = noise_variances(&LinkBudget { g_mf: 20.0, ..b }, one(), one(), 64.0).unwrap();
        assert!((doubled.sigma1_sq * 2.0 - n.sigma1_sq).abs() <= 1e-15 * n.sigma1_sq);
        assert!((doubled.sigma2_sq * 2.0 - n.sigma2_sq).abs() <= 1e-15 * n.sigma2_sq);
        assert!((doubled.sigma3_sq * 2.0 - n.sigma3_sq).abs() <= 1e-15 * n.sigma3_sq);
    }

    #[test]
    fn zero_gain_is_an_error_unless_clamped() {
        let b = reference_budget();
        let zero = Complex64::new(0.0, 0.0);
        assert!(noise_variances(&b, zero, one(), 64.0).is_err());
        assert!(noise_variances(&b, one(), zero, 64.0).is_err());
        let (n, clamped) = noise_variances_clamped(&b, one(), zero, 64.0).unwrap();
        let nominal = noise_variances(&b, one(), one(), 64.0).unwrap();
        assert!(clamped);
        assert!((n.sigma2_sq / nominal.sigma2_sq - 1e6).abs() < 1e-3);
        assert!(n.is_valid());
    }

    #[test]
    fn noise_free_echo_with_perfect_beam() {
        let b = reference_budget();
        let theta = 9.2f64.to_radians();
        let state = VehicleState {
            theta,
            d: 25.0,
            v: 18.0,
            beta: Complex64::new(0.3, -0.4),
        };
        let f = steering(64, theta).unwrap();
        let s = synth_radar_measurement::<ChaCha8Rng>(&state, &f, 64, &b, None).unwrap();
        let rx = steering(64, theta).unwrap();
        for (r, e) in s.measurement.r_tilde.iter().zip(&rx) {
            assert!((r - state.beta * 64.0 * e).norm() < 1e-12);
        }
        assert!((s.measurement.tau - 1.6666666666666667e-7).abs() < 1e-20);
        // 2·18·cos(9.2°)·30e9/3e8
        assert!(
            (s.measurement.mu - 3553.7).abs() < 0.05,
            "{}",
            s.measurement.mu
        );
        assert!(!s.clamped);
    }

    #[test]
    fn sampled_noise_matches_law() {
        let b = reference_budget();
        let theta = 0.7;
        let state = VehicleState {
            theta,
            d: 10.0,
            v: 5.0,
            beta: Complex64::new(1.0, 0.0),
        };
        let f = steering(8, theta + 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let clean = synth_radar_measurement::<ChaCha8Rng>(&state, &f, 4, &b, None).unwrap();
        let n = 10_000;
        let (mut e1, mut e2, mut e3) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let s = synth_radar_measurement(&state, &f, 4, &b, Some(&mut rng)).unwrap();
            e1 += (s.measurement.r_tilde[2] - clean.measurement.r_tilde[2]).norm_sqr();
            e2 += (s.measurement.tau - clean.measurement.tau).powi(2);
            e3 += (s.measurement.mu - clean.measurement.mu).powi(2);
        }
        let n = n as f64;
        let law = clean.noise;
        assert!((e1 / n / law.sigma1_sq - 1.0).abs() < 0.05);
        assert!((e2 / n / law.sigma2_sq - 1.0).abs() < 0.05);
        assert!((e3 / n / law.sigma3_sq - 1.0).abs() < 0.05);
    }

    #[test]
    fn los_channel_examples() {
        let a = los_channel(25.0, 25.0, 30e9, SPEED_OF_LIGHT).unwrap();
        assert!((a.norm() - 1.0).abs() < 1e-15);
        let far = los_channel(25.0, 50.0, 30e9, SPEED_OF_LIGHT).unwrap();
        assert!((far.norm() - 0.5).abs() < 1e-15);
        let lambda = SPEED_OF_LIGHT / 30e9;
        let d = 10.0;
        let a0 = los_channel(1.0, d, 30e9, SPEED_OF_LIGHT).unwrap();
        let a1 = los_channel(1.0, d + lambda, 30e9, SPEED_OF_LIGHT).unwrap() * ((d + lambda) / d);
        assert!((a0 - a1).norm() < 1e-9);
        assert!(los_channel(1.0, 0.0, 30e9, SPEED_OF_LIGHT).is_err());
    }

    #[test]
    fn snr_examples() {
        let b = reference_budget();
        let theta = 1.2;
        let f = steering(64, theta).unwrap();
        let w = steering(64, theta).unwrap();
        let alpha = Complex64::from_polar(1.0, 0.3);
        let snr = comm_snr(theta, &f, &w, alpha, &b).unwrap();
        assert!((snr - 40960.0).abs() < 1e-6);
        let r = rate(snr).unwrap();
        assert!((r - 15.3219).abs() < 1e-4, "{r}");
        // A combiner pointing where wᴴu(θ) vanishes.
        let null = (theta.cos() + 2.0 / 64.0).acos();
        let w_null = steering(64, null).unwrap();
        assert!(comm_snr(theta, &f, &w_null, alpha, &b).unwrap() < 1e-20);
    }

    #[test]
    fn snr_ignores_global_phase() {
        let b = reference_budget();
        let f = steering(16, 1.0).unwrap();
        let w = steering(8, 1.05).unwrap();
        let rot = Complex64::from_polar(1.0, 2.1);
        let f_rot: Vec<_> = f.iter().map(|x| x * rot).collect();
        let w_rot: Vec<_> = w.iter().map(|x| x * rot.conj()).collect();
        let base = comm_snr(0.98, &f, &w, one(), &b).unwrap();
        assert!((comm_snr(0.98, &f_rot, &w, one(), &b).unwrap() - base).abs() < 1e-9 * base);
        assert!((comm_snr(0.98, &f, &w_rot, one(), &b).unwrap() - base).abs() < 1e-9 * base);
    }

    #[test]
    fn rate_examples_and_shape() {
        assert_eq!(rate(0.0).unwrap(), 0.0);
        assert!((rate(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((rate(3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(rate(-1.0).is_err());
        let h = 0.5;
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * h).collect();
        let r: Vec<f64> = grid.iter().map(|&s| rate(s).unwrap()).collect();
        for w in r.windows(3) {
            assert!(w[1] > w[0]);
            assert!(w[2] - 2.0 * w[1] + w[0] <= 0.0);
        }
    }

    #[test]
    fn pilot_budget_is_ten_times_noisier() {
        let b = reference_budget();
        let dfrc = noise_variances(&b, one(), one(), 64.0).unwrap();
        let fb = noise_variances(&b.pilot_budget(1.0), one(), one(), 64.0).unwrap();
        assert!((fb.sigma1_sq / dfrc.sigma1_sq - 10.0).abs() < 1e-12);
        assert!((fb.sigma3_sq / dfrc.sigma3_sq - 10.0).abs() < 1e-12);
    }

    #[test]
    fn pilot_mean_with_aligned_beams() {
        let b = reference_budget().pilot_budget(1.0);
        let theta = 0.9;
        let state = VehicleState {
            theta,
            d: 12.0,
            v: 3.0,
            beta: one(),
        };
        let alpha = los_channel(25.0, 12.0, b.fc, b.c).unwrap();
        let f = steering(64, theta).unwrap();
        let w = steering(64, theta).unwrap();
        let s = synth_pilot_measurement::<ChaCha8Rng>(&state, &f, &w, alpha, &b, None).unwrap();
        assert_eq!(s.measurement.r_tilde.len(), 1);
        assert!((s.measurement.r_tilde[0] - alpha * 64.0).norm() < 1e-12);
    }
}
