//! Extended Kalman filter for beam prediction and tracking.
//!
//! The recursion is generic over a [`StateTransition`] and a
//! [`MeasurementModel`], so the radar-echo tracker and the pilot-feedback
//! baseline share one implementation. Complex quantities are carried in
//! real-augmented form: the radar state is `[θ, d, v, Re β, Im β]`, the
//! baseline state is `[θ, d, v]`, and every complex measurement entry
//! expands to an interleaved `(Re, Im)` pair.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::array::{array_gain, ArrayGeometry};
use crate::error::{Error, Result};
use crate::motion::{evolve_state, ProcessNoise, VehicleState};
use crate::numerics::{inner, real_augment_vec, ComplexVec, RealMat, DEFAULT_CONDITION_CAP};
use crate::propagation::{noise_variances_clamped, LinkBudget};

/// Angles are kept inside `[ANGLE_MARGIN, π − ANGLE_MARGIN]` after updates.
pub const ANGLE_MARGIN: f64 = 1e-3;

/// Distance estimates are floored here after updates; this is the reference
/// distance of the path-loss model, below which the geometry means nothing.
pub const MIN_DISTANCE: f64 = 1.0;

/// State estimate and its MSE matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EkfBelief {
    pub x: Vec<f64>,
    pub m: RealMat,
}

impl EkfBelief {
    pub fn new(x: Vec<f64>, m: RealMat) -> Result<Self> {
        if m.shape() != (x.len(), x.len()) {
            return Err(Error::DimensionMismatch {
                op: "EkfBelief::new",
                left: (x.len(), 1),
                right: m.shape(),
            });
        }
        Ok(Self { x, m })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.x
            .iter()
            .chain(self.m.as_slice())
            .all(|v| v.is_finite())
    }

    /// Symmetric to `1e-9` relative with smallest eigenvalue above
    /// `−1e-9·trace(M)`.
    pub fn covariance_is_healthy(&self) -> bool {
        self.m.is_symmetric(1e-9) && self.m.is_psd_with_floor(1e-9 * self.m.trace().abs())
    }
}

pub trait StateTransition {
    fn dim(&self) -> usize;
    fn propagate(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn jacobian(&self, x: &[f64]) -> Result<RealMat>;
    fn process_noise(&self) -> RealMat;
}

pub trait MeasurementModel {
    fn dim(&self) -> usize;
    /// Noise-free measurement `h(x)`.
    fn mean(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn jacobian(&self, x: &[f64]) -> Result<RealMat>;
    /// Diagonal of the measurement-noise covariance at `x`.
    fn noise_diag(&self, x: &[f64]) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateLayout {
    /// `[θ, d, v, Re β, Im β]`.
    WithReflection,
    /// `[θ, d, v]`.
    Kinematic,
}

impl StateLayout {
    pub fn dim(self) -> usize {
        match self {
            StateLayout::WithReflection => 5,
            StateLayout::Kinematic => 3,
        }
    }
}

/// First-order polar evolution model (see [`evolve_state`]). Propagated
/// distances are floored at [`MIN_DISTANCE`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarMotion {
    pub dt: f64,
    pub noise: ProcessNoise,
    pub layout: StateLayout,
}

impl StateTransition for PolarMotion {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn propagate(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(x, self.dim(), "PolarMotion::propagate")?;
        let next =
            evolve_state::<rand_chacha::ChaCha8Rng>(&VehicleState::from_vector(x)?, self.dt, None)?;
        let mut out = next.to_vector();
        out.truncate(self.dim());
        floor_distance(&mut out);
        Ok(out)
    }

    fn jacobian(&self, x: &[f64]) -> Result<RealMat> {
        check_dim(x, self.dim(), "PolarMotion::jacobian")?;
        match self.layout {
            StateLayout::WithReflection => jacobian_g(x, self.dt),
            StateLayout::Kinematic => {
                let full = jacobian_g(&[x[0], x[1], x[2], 0.0, 0.0], self.dt)?;
                let mut out = RealMat::zeros(3, 3);
                for r in 0..3 {
                    for c in 0..3 {
                        out[(r, c)] = full[(r, c)];
                    }
                }
                Ok(out)
            }
        }
    }

    fn process_noise(&self) -> RealMat {
        match self.layout {
            StateLayout::WithReflection => self.noise.covariance_full(),
            StateLayout::Kinematic => self.noise.covariance_kinematic(),
        }
    }
}

fn check_dim(x: &[f64], expected: usize, op: &'static str) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            op,
            left: (x.len(), 1),
            right: (expected, 1),
        });
    }
    Ok(())
}

/// Jacobian of the polar evolution at `x = [θ, d, v, Re β, Im β]`.
///
/// The β row of the complex Jacobian becomes a 2×2 real block: the scalar
/// growth factor `1 + v·dt·cos θ/d` sits on both diagonal entries and the
/// θ/d/v partials split into their real and imaginary parts.
pub fn jacobian_g(x: &[f64], dt: f64) -> Result<RealMat> {
    check_dim(x, 5, "jacobian_g")?;
    let (theta, d, v) = (x[0], x[1], x[2]);
    if !(d > 0.0) {
        return Err(Error::invalid(format!(
            "distance must be positive, got {d}"
        )));
    }
    let (sin, cos) = theta.sin_cos();
    let growth = 1.0 + v * dt * cos / d;
    let mut j = RealMat::identity(5);

    j[(0, 0)] = growth;
    j[(0, 1)] = -v * dt * sin / (d * d);
    j[(0, 2)] = dt * sin / d;

    j[(1, 0)] = v * dt * sin;
    j[(1, 2)] = -dt * cos;

    let d_theta = -v * dt * sin / d;
    let d_dist = -v * dt * cos / (d * d);
    let d_speed = dt * cos / d;
    for (row, part) in [(3, x[3]), (4, x[4])] {
        j[(row, 0)] = part * d_theta;
        j[(row, 1)] = part * d_dist;
        j[(row, 2)] = part * d_speed;
        j[(row, row)] = growth;
    }
    Ok(j)
}

/// Output of the prediction step.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// `x̂_{n|n−1}` with `M_{n|n−1} = G M Gᵀ + Q_s`.
    pub one_step: EkfBelief,
    /// `x̂_{n+1|n−1} = g(x̂_{n|n−1})`, state only.
    pub two_step: Vec<f64>,
}

pub fn predict<T: StateTransition + ?Sized>(belief: &EkfBelief, model: &T) -> Result<Prediction> {
    let x1 = model.propagate(&belief.x)?;
    let g = model.jacobian(&belief.x)?;
    let m1 = g
        .mat_mul(&belief.m)?
        .mat_mul(&g.transpose())?
        .add(&model.process_noise())?;
    let two_step = model.propagate(&x1)?;
    Ok(Prediction {
        one_step: EkfBelief::new(x1, m1.symmetrize()?)?,
        two_step,
    })
}

/// Linearization of a measurement model at the predicted state.
struct Linearized {
    h: Vec<f64>,
    jac: RealMat,
    /// `1/√q` per measurement row.
    whitening: Vec<f64>,
}

fn linearize<M: MeasurementModel + ?Sized>(
    pred: &EkfBelief,
    y: &[f64],
    model: &M,
) -> Result<Linearized> {
    if y.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            op: "update",
            left: (y.len(), 1),
            right: (model.dim(), 1),
        });
    }
    let h = model.mean(&pred.x)?;
    let jac = model.jacobian(&pred.x)?;
    if jac.shape() != (model.dim(), pred.dim()) {
        return Err(Error::DimensionMismatch {
            op: "measurement jacobian",
            left: jac.shape(),
            right: (model.dim(), pred.dim()),
        });
    }
    let q = model.noise_diag(&pred.x)?;
    if q.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::invalid(
            "measurement noise variances must be positive",
        ));
    }
    Ok(Linearized {
        h,
        jac,
        whitening: q.iter().map(|v| 1.0 / v.sqrt()).collect(),
    })
}

fn scale_rows(a: &RealMat, s: &[f64]) -> RealMat {
    let mut out = a.clone();
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            out[(r, c)] *= s[r];
        }
    }
    out
}

/// Kalman gain `K = M Hᵀ (Q_m + H M Hᵀ)⁻¹`, evaluated through the
/// equivalent state-space form `K = M (I + Hᵀ Q_m⁻¹ H M)⁻¹ Hᵀ Q_m⁻¹`, so
/// only a state-sized matrix is inverted. Rows are whitened by `Q_m^{-1/2}`
/// first, which removes the many-decade spread between echo, delay and
/// Doppler units.
pub fn kalman_gain<M: MeasurementModel + ?Sized>(
    pred: &EkfBelief,
    model: &M,
    condition_cap: f64,
) -> Result<RealMat> {
    let h = model.mean(&pred.x)?;
    let lin = linearize(pred, &h, model)?;
    gain_from(pred, &lin, condition_cap)
}

fn gain_from(pred: &EkfBelief, lin: &Linearized, condition_cap: f64) -> Result<RealMat> {
    let n = pred.dim();
    let white = scale_rows(&lin.jac, &lin.whitening);
    let white_t = white.transpose();
    let info = white_t.mat_mul(&white)?;
    let system = RealMat::identity(n).add(&info.mat_mul(&pred.m)?)?;
    let inv = system.invert_with_cap(condition_cap)?;
    // Hᵀ Q⁻¹ = (Q^{-1/2} H)ᵀ Q^{-1/2}
    let mut ht_qinv = white_t;
    for r in 0..n {
        for c in 0..ht_qinv.cols() {
            ht_qinv[(r, c)] *= lin.whitening[c];
        }
    }
    pred.m.mat_mul(&inv)?.mat_mul(&ht_qinv)
}

/// Measurement update: `x̂ = x̂_pred + K(y − h(x̂_pred))`,
/// `M = sym((I − K H) M_pred)`.
pub fn update<M: MeasurementModel + ?Sized>(
    pred: &EkfBelief,
    y: &[f64],
    model: &M,
    condition_cap: f64,
) -> Result<EkfBelief> {
    let lin = linearize(pred, y, model)?;
    let gain = gain_from(pred, &lin, condition_cap)?;
    apply_gain(pred, y, &lin, &gain)
}

fn apply_gain(pred: &EkfBelief, y: &[f64], lin: &Linearized, gain: &RealMat) -> Result<EkfBelief> {
    let innovation: Vec<f64> = y.iter().zip(&lin.h).map(|(a, b)| a - b).collect();
    let correction = gain.mul_vec(&innovation)?;
    let x = pred.x.iter().zip(&correction).map(|(a, b)| a + b).collect();
    let n = pred.dim();
    let m = RealMat::identity(n)
        .sub(&gain.mat_mul(&lin.jac)?)?
        .mat_mul(&pred.m)?
        .symmetrize()?;
    EkfBelief::new(x, m)
}

/// Same update as [`update`] but through the textbook innovation form,
/// inverting the full (whitened) measurement-sized innovation covariance.
/// Slower; kept as a cross-check and for small measurement models.
pub fn update_innovation_form<M: MeasurementModel + ?Sized>(
    pred: &EkfBelief,
    y: &[f64],
    model: &M,
    condition_cap: f64,
) -> Result<EkfBelief> {
    let lin = linearize(pred, y, model)?;
    let white = scale_rows(&lin.jac, &lin.whitening);
    let white_t = white.transpose();
    let innovation_cov =
        RealMat::identity(model.dim()).add(&white.mat_mul(&pred.m)?.mat_mul(&white_t)?)?;
    let inv = innovation_cov.invert_with_cap(condition_cap)?;
    let mut gain = pred.m.mat_mul(&white_t)?.mat_mul(&inv)?;
    for r in 0..gain.rows() {
        for c in 0..gain.cols() {
            gain[(r, c)] *= lin.whitening[c];
        }
    }
    apply_gain(pred, y, &lin, &gain)
}

/// Clamps θ (entry 0) into `[ANGLE_MARGIN, π − ANGLE_MARGIN]`; returns
/// whether it moved.
pub fn clamp_angle(x: &mut [f64]) -> bool {
    let Some(theta) = x.first_mut() else {
        return false;
    };
    let clamped = theta.clamp(ANGLE_MARGIN, PI - ANGLE_MARGIN);
    let moved = clamped != *theta;
    *theta = clamped;
    moved
}

/// Floors d (entry 1) at [`MIN_DISTANCE`]; returns whether it moved.
pub fn floor_distance(x: &mut [f64]) -> bool {
    match x.get_mut(1) {
        Some(d) if *d < MIN_DISTANCE => {
            *d = MIN_DISTANCE;
            true
        }
        _ => false,
    }
}

/// Array sizes and link budget shared by both measurement models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingParams {
    pub n_tx: usize,
    pub n_rx: usize,
    pub m_vehicle: usize,
    pub budget: LinkBudget,
}

/// Radar-echo model for `[θ, d, v, Re β, Im β]` with the transmit beam
/// steered at `theta_beam`.
#[derive(Debug, Clone)]
pub struct DfrcModel {
    tx: ArrayGeometry,
    rx: ArrayGeometry,
    kappa: f64,
    beam: ComplexVec,
    budget: LinkBudget,
}

pub fn dfrc_measurement_model(params: &SensingParams, theta_beam: f64) -> Result<DfrcModel> {
    let tx = ArrayGeometry::new(params.n_tx)?;
    let rx = ArrayGeometry::new(params.n_rx)?;
    Ok(DfrcModel {
        tx,
        rx,
        kappa: array_gain(params.n_tx, params.n_rx)?,
        beam: tx.steering(theta_beam),
        budget: params.budget,
    })
}

impl DfrcModel {
    /// `κ b(θ) aᴴ(θ) a(θ_beam)`, the echo per unit β.
    fn unit_echo(&self, theta: f64) -> ComplexVec {
        let delta = inner(&self.tx.steering(theta), &self.beam);
        self.rx
            .steering(theta)
            .into_iter()
            .map(|b| b * delta * self.kappa)
            .collect()
    }
}

fn unpack5(x: &[f64]) -> Result<(f64, f64, f64, Complex64)> {
    check_dim(x, 5, "radar state")?;
    Ok((x[0], x[1], x[2], Complex64::new(x[3], x[4])))
}

fn unpack3(x: &[f64]) -> Result<(f64, f64, f64)> {
    check_dim(x, 3, "kinematic state")?;
    Ok((x[0], x[1], x[2]))
}

/// Delay and Doppler rows shared by both models (columns θ, d, v).
fn kinematic_rows(theta: f64, v: f64, budget: &LinkBudget) -> [[f64; 3]; 2] {
    let (sin, cos) = theta.sin_cos();
    [
        [0.0, 2.0 / budget.c, 0.0],
        [
            -2.0 * v * sin * budget.fc / budget.c,
            0.0,
            2.0 * budget.fc * cos / budget.c,
        ],
    ]
}

fn kinematic_means(theta: f64, d: f64, v: f64, budget: &LinkBudget) -> [f64; 2] {
    [
        2.0 * d / budget.c,
        2.0 * v * theta.cos() * budget.fc / budget.c,
    ]
}

impl MeasurementModel for DfrcModel {
    fn dim(&self) -> usize {
        2 * self.rx.n_elements() + 2
    }

    fn mean(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (theta, d, v, beta) = unpack5(x)?;
        let echo: ComplexVec = self
            .unit_echo(theta)
            .into_iter()
            .map(|e| e * beta)
            .collect();
        let mut out = real_augment_vec(&echo);
        out.extend(kinematic_means(theta, d, v, &self.budget));
        Ok(out)
    }

    fn jacobian(&self, x: &[f64]) -> Result<RealMat> {
        let (theta, _d, v, beta) = unpack5(x)?;
        jacobian_h_dfrc_parts(self, theta, v, beta)
    }

    fn noise_diag(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (theta, _, _, beta) = unpack5(x)?;
        let delta = inner(&self.tx.steering(theta), &self.beam);
        let (noise, _) = noise_variances_clamped(&self.budget, beta, delta, self.kappa)?;
        let mut q = vec![0.5 * noise.sigma1_sq; 2 * self.rx.n_elements()];
        q.push(noise.sigma2_sq);
        q.push(noise.sigma3_sq);
        Ok(q)
    }
}

fn jacobian_h_dfrc_parts(
    model: &DfrcModel,
    theta: f64,
    v: f64,
    beta: Complex64,
) -> Result<RealMat> {
    let n_rx = model.rx.n_elements();
    let b = model.rx.steering(theta);
    let db = model.rx.steering_derivative(theta);
    let delta = inner(&model.tx.steering(theta), &model.beam);
    let d_delta = inner(&model.tx.steering_derivative(theta), &model.beam);
    let mut j = RealMat::zeros(2 * n_rx + 2, 5);
    for k in 0..n_rx {
        let per_beta = b[k] * delta * model.kappa;
        let d_theta = beta * model.kappa * (db[k] * delta + b[k] * d_delta);
        let d_im_beta = Complex64::new(0.0, 1.0) * per_beta;
        j[(2 * k, 0)] = d_theta.re;
        j[(2 * k + 1, 0)] = d_theta.im;
        j[(2 * k, 3)] = per_beta.re;
        j[(2 * k + 1, 3)] = per_beta.im;
        j[(2 * k, 4)] = d_im_beta.re;
        j[(2 * k + 1, 4)] = d_im_beta.im;
    }
    for (i, row) in kinematic_rows(theta, v, &model.budget).iter().enumerate() {
        for (c, &value) in row.iter().enumerate() {
            j[(2 * n_rx + i, c)] = value;
        }
    }
    Ok(j)
}

/// Analytic `∂h/∂x` of the radar model at `x`, shape `(2N_r + 2) × 5`.
pub fn jacobian_h_dfrc(x: &[f64], theta_beam: f64, params: &SensingParams) -> Result<RealMat> {
    let (theta, d, v, beta) = unpack5(x)?;
    if !(d > 0.0) {
        return Err(Error::invalid(format!(
            "distance must be positive, got {d}"
        )));
    }
    let model = dfrc_measurement_model(params, theta_beam)?;
    jacobian_h_dfrc_parts(&model, theta, v, beta)
}

/// Downlink-pilot model for the feedback baseline on `[θ, d, v]`. The
/// channel coefficient is supplied as known; the vehicle combiner is
/// steered at `theta_rx_beam` and the RSU beam at `theta_tx_beam`.
#[derive(Debug, Clone)]
pub struct FeedbackModel {
    tx: ArrayGeometry,
    vehicle: ArrayGeometry,
    kappa: f64,
    f_beam: ComplexVec,
    w_beam: ComplexVec,
    alpha: Complex64,
    budget: LinkBudget,
}

/// `budget` here is the pilot budget (see
/// [`LinkBudget::pilot_budget`](crate::propagation::LinkBudget::pilot_budget)).
pub fn feedback_measurement_model(
    params: &SensingParams,
    theta_tx_beam: f64,
    theta_rx_beam: f64,
    alpha: Complex64,
) -> Result<FeedbackModel> {
    let tx = ArrayGeometry::new(params.n_tx)?;
    let vehicle = ArrayGeometry::new(params.m_vehicle)?;
    Ok(FeedbackModel {
        tx,
        vehicle,
        kappa: array_gain(params.n_tx, params.m_vehicle)?,
        f_beam: tx.steering(theta_tx_beam),
        w_beam: vehicle.steering(theta_rx_beam),
        alpha,
        budget: params.budget,
    })
}

impl FeedbackModel {
    fn gain(&self, theta: f64) -> Complex64 {
        inner(&self.w_beam, &self.vehicle.steering(theta))
            * inner(&self.tx.steering(theta), &self.f_beam)
    }

    fn gain_derivative(&self, theta: f64) -> Complex64 {
        let rx = inner(&self.w_beam, &self.vehicle.steering(theta));
        let d_rx = inner(&self.w_beam, &self.vehicle.steering_derivative(theta));
        let tx = inner(&self.tx.steering(theta), &self.f_beam);
        let d_tx = inner(&self.tx.steering_derivative(theta), &self.f_beam);
        d_rx * tx + rx * d_tx
    }
}

impl MeasurementModel for FeedbackModel {
    fn dim(&self) -> usize {
        4
    }

    fn mean(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (theta, d, v) = unpack3(x)?;
        let pilot = self.alpha * self.gain(theta) * self.kappa;
        let [tau, mu] = kinematic_means(theta, d, v, &self.budget);
        Ok(vec![pilot.re, pilot.im, tau, mu])
    }

    fn jacobian(&self, x: &[f64]) -> Result<RealMat> {
        let (theta, _, v) = unpack3(x)?;
        let d_pilot = self.alpha * self.gain_derivative(theta) * self.kappa;
        let [delay, doppler] = kinematic_rows(theta, v, &self.budget);
        RealMat::from_rows(&[
            vec![d_pilot.re, 0.0, 0.0],
            vec![d_pilot.im, 0.0, 0.0],
            delay.to_vec(),
            doppler.to_vec(),
        ])
    }

    fn noise_diag(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (theta, _, _) = unpack3(x)?;
        let (noise, _) =
            noise_variances_clamped(&self.budget, self.alpha, self.gain(theta), self.kappa)?;
        Ok(vec![
            0.5 * noise.sigma1_sq,
            0.5 * noise.sigma1_sq,
            noise.sigma2_sq,
            noise.sigma3_sq,
        ])
    }
}

/// A running filter: belief plus its evolution model.
#[derive(Debug, Clone)]
pub struct ExtendedKalmanFilter<T> {
    pub belief: EkfBelief,
    pub transition: T,
    pub condition_cap: f64,
}

impl<T: StateTransition> ExtendedKalmanFilter<T> {
    pub fn new(belief: EkfBelief, transition: T) -> Result<Self> {
        if belief.dim() != transition.dim() {
            return Err(Error::DimensionMismatch {
                op: "ExtendedKalmanFilter::new",
                left: (belief.dim(), 1),
                right: (transition.dim(), 1),
            });
        }
        Ok(Self {
            belief,
            transition,
            condition_cap: DEFAULT_CONDITION_CAP,
        })
    }

    pub fn predict(&self) -> Result<Prediction> {
        predict(&self.belief, &self.transition)
    }

    /// Runs the update against `prediction` and stores the result. Returns
    /// whether the angle or distance had to be clamped.
    pub fn correct<M: MeasurementModel + ?Sized>(
        &mut self,
        prediction: &Prediction,
        y: &[f64],
        model: &M,
    ) -> Result<bool> {
        let mut next = update(&prediction.one_step, y, model, self.condition_cap)?;
        let angle = clamp_angle(&mut next.x);
        let distance = floor_distance(&mut next.x);
        self.belief = next;
        Ok(angle || distance)
    }
}
