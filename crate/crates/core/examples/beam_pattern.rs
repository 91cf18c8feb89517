//! Steering vectors and the beamforming gain pattern of a uniform linear
//! array. Prints |δ| as the beam is swept past a fixed target.
//!
//! cargo run --example beam_pattern -- [n_antennas]

use beamtrack::array::{array_gain, beam_gain, ArrayGeometry};

fn main() -> beamtrack::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(64);
    let array = ArrayGeometry::new(n)?;
    let target = 60f64.to_radians();

    let a = array.steering(target);
    let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    println!(
        "N = {n}, ||a(60 deg)|| = {norm:.12}, kappa(N, N) = {}",
        array_gain(n, n)?
    );

    println!("\n offset_deg   |delta|   bar");
    for step in -20..=20 {
        let offset = step as f64 * 0.25;
        let g = beam_gain(target, target + offset.to_radians(), n)?.norm();
        let bar = "#".repeat((g * 50.0).round() as usize);
        println!("{offset:10.2} {g:9.4}   {bar}");
    }

    // The main lobe narrows toward broadside and widens toward end-fire.
    println!("\n angle_deg  half-power width (deg)");
    for deg in [10.0, 30.0, 60.0, 90.0, 120.0, 170.0] {
        let theta = f64::to_radians(deg);
        let mut width = 0.0;
        while beam_gain(theta, theta + (width / 2.0f64).to_radians(), n)?.norm_sqr() > 0.5 {
            width += 0.01;
        }
        println!("{deg:10.1} {width:10.2}");
    }
    Ok(())
}
