//! Conventional admittance controller.
//!
//! Handle force drives linear velocity through `(1/m) / (s^2 + (b/m) s + k/m)`
//! and handle torque drives angular velocity through the analogous
//! inertia/damping/elasticity model. Both filters are realized with the
//! bilinear transform at the control rate.

use thiserror::Error;

/// Steering saturation shared by both controllers, deg/s.
pub const OMEGA_LIMIT_DPS: f64 = 90.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdmittanceError {
    #[error("invalid input")]
    InvalidInput,
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("invalid tick duration {0}")]
    InvalidDt(f64),
}

fn check(name: &'static str, value: f64, ok: bool) -> Result<(), AdmittanceError> {
    if value.is_finite() && ok {
        Ok(())
    } else {
        Err(AdmittanceError::InvalidParameter { name, value })
    }
}

/// Virtual mass (kg), damping (N·s/m) and elasticity (N/m) of the
/// force-to-velocity channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearAdmittanceParams {
    pub mass: f64,
    pub damping: f64,
    pub stiffness: f64,
}

impl LinearAdmittanceParams {
    pub fn new(mass: f64, damping: f64, stiffness: f64) -> Result<Self, AdmittanceError> {
        let p = Self {
            mass,
            damping,
            stiffness,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), AdmittanceError> {
        check("mass", self.mass, self.mass > 0.0)?;
        check("damping", self.damping, self.damping >= 0.0)?;
        check("stiffness", self.stiffness, self.stiffness > 0.0)
    }

    /// Steady-state velocity per newton.
    pub fn dc_gain(&self) -> f64 {
        1.0 / self.stiffness
    }
}

impl Default for LinearAdmittanceParams {
    fn default() -> Self {
        Self {
            mass: 10.0,
            damping: 25.0,
            stiffness: 10.0,
        }
    }
}

/// Virtual inertia (kg·m²), damping (N·m·s/rad) and elasticity (N·m/rad)
/// of the torque-to-yaw-rate channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularAdmittanceParams {
    pub inertia: f64,
    pub damping: f64,
    pub stiffness: f64,
}

impl AngularAdmittanceParams {
    pub fn new(inertia: f64, damping: f64, stiffness: f64) -> Result<Self, AdmittanceError> {
        let p = Self {
            inertia,
            damping,
            stiffness,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), AdmittanceError> {
        check("inertia", self.inertia, self.inertia > 0.0)?;
        check("damping", self.damping, self.damping >= 0.0)?;
        check("stiffness", self.stiffness, self.stiffness > 0.0)
    }

    /// Steady-state yaw rate (rad/s) per N·m.
    pub fn dc_gain(&self) -> f64 {
        1.0 / self.stiffness
    }
}

impl Default for AngularAdmittanceParams {
    // Critically damped at 3 rad/s.
    fn default() -> Self {
        Self {
            inertia: 2.0,
            damping: 12.0,
            stiffness: 18.0,
        }
    }
}

/// Bilinear-discretized `1 / (a s^2 + b s + c)` in transposed direct form II.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderState {
    s1: f64,
    s2: f64,
    dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Coefficients {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Coefficients {
    fn bilinear(inertia: f64, damping: f64, stiffness: f64, dt: f64) -> Self {
        let k = 2.0 / dt;
        let mk2 = inertia * k * k;
        let a0 = mk2 + damping * k + stiffness;
        Self {
            b0: 1.0 / a0,
            b1: 2.0 / a0,
            b2: 1.0 / a0,
            a1: (2.0 * stiffness - 2.0 * mk2) / a0,
            a2: (mk2 - damping * k + stiffness) / a0,
        }
    }
}

impl SecondOrderState {
    pub fn new(dt: f64) -> Result<Self, AdmittanceError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(AdmittanceError::InvalidDt(dt));
        }
        Ok(Self {
            s1: 0.0,
            s2: 0.0,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Euclidean norm of the internal state.
    pub fn norm(&self) -> f64 {
        self.s1.hypot(self.s2)
    }

    fn advance(&mut self, c: &Coefficients, u: f64) -> f64 {
        let y = c.b0 * u + self.s1;
        self.s1 = c.b1 * u - c.a1 * y + self.s2;
        self.s2 = c.b2 * u - c.a2 * y;
        y
    }
}

/// One tick of the force-to-velocity filter. Returns the updated state and
/// the commanded linear velocity in m/s.
pub fn linear_admittance_step(
    state: SecondOrderState,
    params: &LinearAdmittanceParams,
    force: f64,
) -> Result<(SecondOrderState, f64), AdmittanceError> {
    if !force.is_finite() {
        return Err(AdmittanceError::InvalidInput);
    }
    let c = Coefficients::bilinear(params.mass, params.damping, params.stiffness, state.dt);
    let mut next = state;
    let v = next.advance(&c, force);
    Ok((next, v))
}

/// One tick of the torque-to-yaw-rate filter. The output is converted to
/// deg/s and saturated to ±[`OMEGA_LIMIT_DPS`]; the internal state is not
/// clipped.
pub fn angular_admittance_step(
    state: SecondOrderState,
    params: &AngularAdmittanceParams,
    torque: f64,
) -> Result<(SecondOrderState, f64), AdmittanceError> {
    if !torque.is_finite() {
        return Err(AdmittanceError::InvalidInput);
    }
    let c = Coefficients::bilinear(params.inertia, params.damping, params.stiffness, state.dt);
    let mut next = state;
    let omega = next.advance(&c, torque).to_degrees();
    Ok((next, saturate_omega(omega)))
}

pub fn saturate_omega(omega_dps: f64) -> f64 {
    omega_dps.clamp(-OMEGA_LIMIT_DPS, OMEGA_LIMIT_DPS)
}

/// Force/torque sample at the handle sensor. Positive `tau_z` commands a
/// left (counter-clockwise) turn under the conventional controller.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HandleWrench {
    pub f_x: f64,
    pub tau_z: f64,
}

impl HandleWrench {
    pub fn new(f_x: f64, tau_z: f64) -> Self {
        Self { f_x, tau_z }
    }

    pub fn is_finite(&self) -> bool {
        self.f_x.is_finite() && self.tau_z.is_finite()
    }
}

/// Linear velocity (m/s) and yaw rate (deg/s, CCW positive).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VelocityCommand {
    pub v: f64,
    pub omega: f64,
}

/// Stepper pair for the conventional controller.
#[derive(Debug, Clone)]
pub struct ConventionalController {
    pub linear: LinearAdmittanceParams,
    pub angular: AngularAdmittanceParams,
    lin_state: SecondOrderState,
    ang_state: SecondOrderState,
}

impl ConventionalController {
    pub fn new(
        linear: LinearAdmittanceParams,
        angular: AngularAdmittanceParams,
        dt: f64,
    ) -> Result<Self, AdmittanceError> {
        linear.validate()?;
        angular.validate()?;
        Ok(Self {
            linear,
            angular,
            lin_state: SecondOrderState::new(dt)?,
            ang_state: SecondOrderState::new(dt)?,
        })
    }

    /// Advance both channels independently by one tick.
    pub fn tick(&mut self, wrench: HandleWrench) -> Result<VelocityCommand, AdmittanceError> {
        let (lin, v) = linear_admittance_step(self.lin_state, &self.linear, wrench.f_x)?;
        let (ang, omega) = angular_admittance_step(self.ang_state, &self.angular, wrench.tau_z)?;
        self.lin_state = lin;
        self.ang_state = ang;
        Ok(VelocityCommand { v, omega })
    }
}

/// Linear channel alone, reused by the fuzzy controller for forward speed.
#[derive(Debug, Clone)]
pub struct LinearChannel {
    pub params: LinearAdmittanceParams,
    state: SecondOrderState,
}

impl LinearChannel {
    pub fn new(params: LinearAdmittanceParams, dt: f64) -> Result<Self, AdmittanceError> {
        params.validate()?;
        Ok(Self {
            params,
            state: SecondOrderState::new(dt)?,
        })
    }

    pub fn step(&mut self, force: f64) -> Result<f64, AdmittanceError> {
        let (state, v) = linear_admittance_step(self.state, &self.params, force)?;
        self.state = state;
        Ok(v)
    }
}

/// Closed-form continuous step response of `1 / (m s^2 + b s + k)`, used as
/// the reference for the discretization tests.
#[cfg(test)]
pub(crate) fn continuous_step_response(m: f64, b: f64, k: f64, t: f64) -> f64 {
    let wn = (k / m).sqrt();
    let zeta = b / (2.0 * (k * m).sqrt());
    let unit = if (zeta - 1.0).abs() < 1e-12 {
        1.0 - (-wn * t).exp() * (1.0 + wn * t)
    } else if zeta < 1.0 {
        let wd = wn * (1.0 - zeta * zeta).sqrt();
        1.0 - (-zeta * wn * t).exp() * ((wd * t).cos() + zeta * wn / wd * (wd * t).sin())
    } else {
        let root = (zeta * zeta - 1.0).sqrt();
        let r1 = -wn * (zeta - root);
        let r2 = -wn * (zeta + root);
        1.0 + (r2 * (r1 * t).exp() - r1 * (r2 * t).exp()) / (r1 - r2)
    };
    unit / k
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DT: f64 = 0.02;

    fn lin_response(p: &LinearAdmittanceParams, force: f64, ticks: usize) -> Vec<f64> {
        let mut s = SecondOrderState::new(DT).unwrap();
        (0..ticks)
            .map(|_| {
                let (n, v) = linear_admittance_step(s, p, force).unwrap();
                s = n;
                v
            })
            .collect()
    }

    #[test]
    fn zero_force_zero_velocity() {
        let out = lin_response(&LinearAdmittanceParams::default(), 0.0, 500);
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn force_equal_to_stiffness_settles_to_unit_speed() {
        let p = LinearAdmittanceParams::default();
        let out = lin_response(&p, p.stiffness, 3000);
        assert!((out.last().unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn underdamped_step_tracks_closed_form() {
        let p = LinearAdmittanceParams::new(1.0, 2.0, 4.0).unwrap();
        let out = lin_response(&p, 1.0, 500);
        let final_value = p.dc_gain();
        for (n, v) in out.iter().enumerate() {
            let t = n as f64 * DT;
            if t < 0.2 {
                continue;
            }
            let exact = continuous_step_response(1.0, 2.0, 4.0, t);
            assert!(
                (v - exact).abs() <= 0.02 * final_value,
                "t={t} discrete={v} exact={exact}"
            );
        }
    }

    #[test]
    fn angular_dc_gain_and_saturation() {
        let p = AngularAdmittanceParams::default();
        let mut s = SecondOrderState::new(DT).unwrap();
        let mut omega = 0.0;
        for _ in 0..2000 {
            (s, omega) = angular_admittance_step(s, &p, 0.0).unwrap();
        }
        assert_eq!(omega, 0.0);

        let mut s = SecondOrderState::new(DT).unwrap();
        for _ in 0..3000 {
            (s, omega) = angular_admittance_step(s, &p, p.stiffness).unwrap();
        }
        assert!((omega - 57.29578).abs() < 1e-4);

        let mut s = SecondOrderState::new(DT).unwrap();
        for _ in 0..3000 {
            (s, omega) = angular_admittance_step(s, &p, 10.0 * p.stiffness).unwrap();
        }
        assert_eq!(omega, OMEGA_LIMIT_DPS);
    }

    #[test]
    fn rejects_non_finite_inputs_and_bad_params() {
        let s = SecondOrderState::new(DT).unwrap();
        assert_eq!(
            linear_admittance_step(s, &LinearAdmittanceParams::default(), f64::NAN)
                .unwrap_err()
                .to_string(),
            "invalid input"
        );
        assert!(angular_admittance_step(s, &AngularAdmittanceParams::default(), f64::INFINITY)
            .is_err());
        assert!(LinearAdmittanceParams::new(0.0, 1.0, 1.0).is_err());
        assert!(LinearAdmittanceParams::new(1.0, -1.0, 1.0).is_err());
        assert!(AngularAdmittanceParams::new(1.0, 1.0, 0.0).is_err());
        assert!(SecondOrderState::new(0.0).is_err());
    }

    #[test]
    fn conventional_tick_channels_are_independent() {
        let mut both = ConventionalController::new(
            LinearAdmittanceParams::default(),
            AngularAdmittanceParams::default(),
            DT,
        )
        .unwrap();
        let mut lin_only = both.clone();
        for _ in 0..200 {
            let a = both.tick(HandleWrench::new(5.0, 3.0)).unwrap();
            let b = lin_only.tick(HandleWrench::new(5.0, 0.0)).unwrap();
            assert_eq!(a.v, b.v);
            assert_eq!(b.omega, 0.0);
            assert!(a.omega > 0.0);
        }
    }

    #[test]
    fn zero_input_state_decays() {
        let p = LinearAdmittanceParams::default();
        let mut s = SecondOrderState::new(DT).unwrap();
        for _ in 0..100 {
            (s, _) = linear_admittance_step(s, &p, 20.0).unwrap();
        }
        // State norm sampled every 50 ticks.
        let mut prev = f64::INFINITY;
        let mut last_v = f64::INFINITY;
        for i in 0..4000 {
            let v;
            (s, v) = linear_admittance_step(s, &p, 0.0).unwrap();
            if i % 50 == 0 {
                assert!(s.norm() <= prev + 1e-12);
                prev = s.norm();
            }
            last_v = v;
        }
        assert!(last_v.abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn linear_channel_is_linear(alpha in -5.0..5.0f64, f in -30.0..30.0f64) {
            let p = LinearAdmittanceParams::default();
            let a = lin_response(&p, f, 300);
            let b = lin_response(&p, alpha * f, 300);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((alpha * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }

        #[test]
        fn dc_gain_exact(m in 0.5..20.0f64, b in 0.5..40.0f64, k in 0.5..30.0f64, x in -20.0..20.0f64) {
            let p = LinearAdmittanceParams::new(m, b, k).unwrap();
            // Ten of the slowest time constants.
            let wn = (k / m).sqrt();
            let zeta = b / (2.0 * (k * m).sqrt());
            let slow = if zeta >= 1.0 { wn * (zeta - (zeta * zeta - 1.0).sqrt()) } else { zeta * wn };
            let ticks = ((10.0 / slow) / DT).ceil() as usize + 1;
            let out = lin_response(&p, x, ticks.min(200_000));
            let settled = *out.last().unwrap();
            prop_assert!((settled - x / k).abs() <= 0.005 * (x / k).abs() + 1e-12);
        }
    }
}
