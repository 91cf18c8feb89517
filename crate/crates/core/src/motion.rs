//! Vehicle kinematics.
//!
//! The road runs parallel to the RSU array. The RSU sits at the origin, the
//! array lies along the x axis and the vehicle drives in the −x direction at
//! a constant perpendicular offset `y`, so θ grows from near 0 through
//! broadside towards π.
//!
//! Two models live here: the exact Cartesian propagation used for ground
//! truth, and the first-order polar evolution used inside the filter.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::RealMat;

/// Polar kinematic state plus the radar reflection coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    /// Angle from the array axis, radians.
    pub theta: f64,
    /// Range, metres.
    pub d: f64,
    /// Speed, m/s.
    pub v: f64,
    pub beta: Complex64,
}

impl VehicleState {
    /// Real layout `[θ, d, v, Re β, Im β]`.
    pub fn to_vector(&self) -> Vec<f64> {
        vec![self.theta, self.d, self.v, self.beta.re, self.beta.im]
    }

    pub fn from_vector(x: &[f64]) -> Result<Self> {
        match *x {
            [theta, d, v, re, im] => Ok(Self {
                theta,
                d,
                v,
                beta: Complex64::new(re, im),
            }),
            [theta, d, v] => Ok(Self {
                theta,
                d,
                v,
                beta: Complex64::new(0.0, 0.0),
            }),
            _ => Err(Error::invalid(format!(
                "state vector must have 3 or 5 entries, got {}",
                x.len()
            ))),
        }
    }
}

/// Cartesian ground-truth pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthPose {
    /// Along-road coordinate, metres.
    pub x: f64,
    /// Perpendicular offset from the array line, metres.
    pub y: f64,
    pub v: f64,
}

impl TruthPose {
    pub fn from_polar(theta: f64, d: f64, v: f64) -> Result<Self> {
        if !(d > 0.0) {
            return Err(Error::invalid(format!(
                "distance must be positive, got {d}"
            )));
        }
        let (sin, cos) = theta.sin_cos();
        let pose = Self {
            x: d * cos,
            y: d * sin,
            v,
        };
        if !(pose.y > 0.0) {
            return Err(Error::invalid(format!(
                "angle {theta} puts the vehicle on the array line"
            )));
        }
        Ok(pose)
    }

    pub fn distance(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Exact straight-line motion: `x ← x − v·dt`.
pub fn truth_step(pose: TruthPose, dt: f64) -> TruthPose {
    TruthPose {
        x: pose.x - pose.v * dt,
        ..pose
    }
}

/// Polar view of a pose; `β = ε/(2d)`.
pub fn pose_to_state(pose: TruthPose, epsilon: Complex64) -> VehicleState {
    let d = pose.distance();
    VehicleState {
        theta: pose.y.atan2(pose.x),
        d,
        v: pose.v,
        beta: epsilon / (2.0 * d),
    }
}

/// Standard deviations of the evolution-model noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessNoise {
    pub sigma_theta: f64,
    pub sigma_d: f64,
    pub sigma_v: f64,
    /// Total complex standard deviation; each of Re/Im gets `σ_β²/2`.
    pub sigma_beta: f64,
}

impl ProcessNoise {
    pub fn zero() -> Self {
        Self {
            sigma_theta: 0.0,
            sigma_d: 0.0,
            sigma_v: 0.0,
            sigma_beta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.sigma_theta,
            self.sigma_d,
            self.sigma_v,
            self.sigma_beta,
        ];
        if all.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::invalid(format!(
                "process noise sigmas must be >= 0: {all:?}"
            )));
        }
        Ok(())
    }

    /// Diagonal entries for the `[θ, d, v, Re β, Im β]` layout.
    pub fn variances_full(&self) -> [f64; 5] {
        let half_beta = 0.5 * self.sigma_beta * self.sigma_beta;
        [
            self.sigma_theta * self.sigma_theta,
            self.sigma_d * self.sigma_d,
            self.sigma_v * self.sigma_v,
            half_beta,
            half_beta,
        ]
    }

    /// Diagonal entries for the `[θ, d, v]` layout.
    pub fn variances_kinematic(&self) -> [f64; 3] {
        let v = self.variances_full();
        [v[0], v[1], v[2]]
    }

    pub fn covariance_full(&self) -> RealMat {
        RealMat::from_diag(&self.variances_full())
    }

    pub fn covariance_kinematic(&self) -> RealMat {
        RealMat::from_diag(&self.variances_kinematic())
    }
}

/// First-order polar evolution:
///
/// ```text
/// θ' = θ + v·dt·sin θ / d
/// d' = d − v·dt·cos θ
/// v' = v
/// β' = β·(1 + v·dt·cos θ / d)
/// ```
///
/// plus optional Gaussian noise drawn from `noise`.
pub fn evolve_state<R: Rng + ?Sized>(
    x: &VehicleState,
    dt: f64,
    noise: Option<(&ProcessNoise, &mut R)>,
) -> Result<VehicleState> {
    if !(x.d > 0.0) {
        return Err(Error::invalid(format!(
            "distance must be positive, got {}",
            x.d
        )));
    }
    let (sin, cos) = x.theta.sin_cos();
    let step = x.v * dt;
    let growth = 1.0 + step * cos / x.d;
    let mut next = VehicleState {
        theta: x.theta + step * sin / x.d,
        d: x.d - step * cos,
        v: x.v,
        beta: x.beta * growth,
    };
    if let Some((q, rng)) = noise {
        let mut draw = |sigma: f64| sigma * rng.sample::<f64, _>(StandardNormal);
        next.theta += draw(q.sigma_theta);
        next.d += draw(q.sigma_d);
        next.v += draw(q.sigma_v);
        let half = q.sigma_beta / std::f64::consts::SQRT_2;
        next.beta += Complex64::new(draw(half), draw(half));
    }
    Ok(next)
}
