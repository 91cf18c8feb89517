//! Half-wavelength uniform linear arrays.
//!
//! Angles are measured from the array axis and live in `(0, π)`; broadside
//! is `π/2`. The phase of element `k` is `−πk·cos θ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{inner, ComplexVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayGeometry {
    n_elements: usize,
}

impl ArrayGeometry {
    pub fn new(n_elements: usize) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::invalid("array needs at least one element"));
        }
        Ok(Self { n_elements })
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn steering(&self, theta: f64) -> ComplexVec {
        steering_unchecked(self.n_elements, theta)
    }

    /// Element-wise derivative of [`ArrayGeometry::steering`] with respect to θ.
    pub fn steering_derivative(&self, theta: f64) -> ComplexVec {
        let scale = 1.0 / (self.n_elements as f64).sqrt();
        let (sin, cos) = theta.sin_cos();
        (0..self.n_elements)
            .map(|k| {
                let k = k as f64;
                Complex64::new(0.0, PI * k * sin) * Complex64::from_polar(scale, -PI * k * cos)
            })
            .collect()
    }
}

fn steering_unchecked(n: usize, theta: f64) -> ComplexVec {
    let scale = 1.0 / (n as f64).sqrt();
    let cos = theta.cos();
    (0..n)
        .map(|k| Complex64::from_polar(scale, -PI * k as f64 * cos))
        .collect()
}

/// Unit-norm steering vector `(1/√n)[1, e^{−jπ cos θ}, …]`.
pub fn steering(n: usize, theta: f64) -> Result<ComplexVec> {
    Ok(ArrayGeometry::new(n)?.steering(theta))
}

/// Beamforming gain `δ = aᴴ(θ_true)·a(θ_beam)`.
pub fn beam_gain(theta_true: f64, theta_beam: f64, n: usize) -> Result<Complex64> {
    let geom = ArrayGeometry::new(n)?;
    Ok(inner(
        &geom.steering(theta_true),
        &geom.steering(theta_beam),
    ))
}

/// `κ = √(n_tx·n_rx)`.
pub fn array_gain(n_tx: usize, n_rx: usize) -> Result<f64> {
    if n_tx == 0 || n_rx == 0 {
        return Err(Error::invalid("array gain needs non-zero element counts"));
    }
    Ok(((n_tx * n_rx) as f64).sqrt())
}
