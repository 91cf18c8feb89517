//! Measurement-noise law and downlink rate at the reference parameters.
//!
//! cargo run --example link_budget

use beamtrack::array::{array_gain, steering};
use beamtrack::harness::{ScenarioConfig, Scheme};
use beamtrack::propagation::{comm_snr, los_channel, noise_variances, rate};
use num_complex::Complex64;

fn main() -> beamtrack::Result<()> {
    let cfg = ScenarioConfig::default();
    let radar = cfg.sensing(Scheme::Dfrc).budget;
    let pilot = cfg.sensing(Scheme::Feedback).budget;
    let kappa = array_gain(cfg.n_tx, cfg.n_rx)?;
    let kappa_c = array_gain(cfg.n_tx, cfg.m_vehicle)?;

    println!(
        "transmit power p = {:.3} ({} dB)",
        cfg.power(),
        cfg.tx_snr_db
    );
    println!("\n|delta|   sigma1^2      sigma2^2 (s^2)   sigma3^2 (Hz^2)   [radar echo]");
    for gain in [1.0, 0.7, 0.3, 0.1] {
        let n = noise_variances(&radar, cfg.beta0(), Complex64::new(gain, 0.0), kappa)?;
        println!(
            "{gain:6.2}  {:.4e}   {:.4e}       {:.4e}",
            n.sigma1_sq, n.sigma2_sq, n.sigma3_sq
        );
    }
    let p = noise_variances(
        &pilot,
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        kappa_c,
    )?;
    println!("pilot (G = {}): sigma1^2 = {:.4e}", pilot.g_mf, p.sigma1_sq);

    println!("\ndistance_m   |alpha|   SNR (dB)   rate (bit/s/Hz)   [aligned beams]");
    let theta = cfg.theta0();
    let f = steering(cfg.n_tx, theta)?;
    let w = steering(cfg.m_vehicle, theta)?;
    for d in [5.0, 10.0, 25.0, 50.0, 100.0] {
        let alpha = los_channel(cfg.alpha_ref, d, cfg.fc, cfg.c)?;
        let snr = comm_snr(theta, &f, &w, alpha, &cfg.budget())?;
        println!(
            "{d:10.1} {:9.3} {:10.2} {:12.3}",
            alpha.norm(),
            10.0 * snr.log10(),
            rate(snr)?
        );
    }
    Ok(())
}
