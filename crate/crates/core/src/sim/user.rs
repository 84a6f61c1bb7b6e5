//! Synthetic one-handed user.
//!
//! The user pushes with the right hand only. The off-center grip turns the
//! forward push into a yaw moment at the handle sensor, which the wrist has
//! to cancel under admittance steering.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use super::plant::{heading_diff, WalkerPose};
use super::scenario::{Direction, PathError};
use super::ControllerKind;
use crate::admittance::{AngularAdmittanceParams, HandleWrench};
use crate::fuzzy::{AngleMeans, FuzzyProfile, USER5_ANGLES};
use crate::signals::{MovingAverage, SMOOTHING_WINDOW};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid user parameter {name} = {value}")]
pub struct UserParamError {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserModelParams {
    /// Nominal forward push, N.
    pub push_force: f64,
    /// Lateral lever arm of the pushing hand about the sensor z-axis, m.
    pub grip_offset: f64,
    pub wrist_torque_limit: f64,
    /// Perception delay, s.
    pub reaction_delay: f64,
    /// First-order wrist time constant, s.
    pub wrist_time_constant: f64,
    pub noise_sigma_force: f64,
    pub noise_sigma_torque: f64,
    pub noise_sigma_angle: f64,
    pub angle_means: AngleMeans,
    /// Maximum shoulder angle rate, deg/s.
    pub angle_slew: f64,
    /// Yaw rate the user aims for on turns, deg/s.
    pub turn_rate: f64,
    /// Heading-error gain, (deg/s)/deg.
    pub heading_gain: f64,
    /// Cross-track gain, (deg/s)/m.
    pub cross_track_gain: f64,
    /// Limit on the desired yaw rate, deg/s.
    pub max_turn_rate: f64,
    /// Acceptable yaw-rate mismatch for the fuzzy-mode torque search, deg/s.
    pub omega_tol: f64,
    /// Time over which the push ramps up from zero, s.
    pub push_ramp: f64,
    /// How far ahead of a segment change the shoulder takes up the next
    /// direction, s.
    pub intent_lead: f64,
}

impl Default for UserModelParams {
    fn default() -> Self {
        Self {
            push_force: 5.0,
            grip_offset: 0.25,
            wrist_torque_limit: 15.0,
            reaction_delay: 0.1,
            wrist_time_constant: 0.2,
            noise_sigma_force: 1.0,
            noise_sigma_torque: 0.2,
            noise_sigma_angle: 1.5,
            angle_means: USER5_ANGLES,
            angle_slew: 40.0,
            turn_rate: 30.0,
            heading_gain: 0.9,
            cross_track_gain: 12.5,
            max_turn_rate: 60.0,
            omega_tol: 2.0,
            push_ramp: 1.0,
            intent_lead: 0.6,
        }
    }
}

impl UserModelParams {
    pub fn noiseless(mut self) -> Self {
        self.noise_sigma_force = 0.0;
        self.noise_sigma_torque = 0.0;
        self.noise_sigma_angle = 0.0;
        self
    }

    pub fn validate(&self) -> Result<(), UserParamError> {
        let checks: [(&'static str, f64, bool); 14] = [
            ("push_force", self.push_force, self.push_force >= 0.0),
            ("grip_offset", self.grip_offset, self.grip_offset >= 0.0),
            (
                "wrist_torque_limit",
                self.wrist_torque_limit,
                self.wrist_torque_limit > 0.0,
            ),
            ("reaction_delay", self.reaction_delay, self.reaction_delay >= 0.0),
            (
                "wrist_time_constant",
                self.wrist_time_constant,
                self.wrist_time_constant > 0.0,
            ),
            (
                "noise_sigma_force",
                self.noise_sigma_force,
                self.noise_sigma_force >= 0.0,
            ),
            (
                "noise_sigma_torque",
                self.noise_sigma_torque,
                self.noise_sigma_torque >= 0.0,
            ),
            (
                "noise_sigma_angle",
                self.noise_sigma_angle,
                self.noise_sigma_angle >= 0.0,
            ),
            ("angle_slew", self.angle_slew, self.angle_slew > 0.0),
            ("turn_rate", self.turn_rate, self.turn_rate > 0.0),
            ("heading_gain", self.heading_gain, self.heading_gain >= 0.0),
            (
                "cross_track_gain",
                self.cross_track_gain,
                self.cross_track_gain >= 0.0,
            ),
            ("max_turn_rate", self.max_turn_rate, self.max_turn_rate > 0.0),
            ("omega_tol", self.omega_tol, self.omega_tol > 0.0),
        ];
        for (name, value, ok) in checks {
            if !(value.is_finite() && ok) {
                return Err(UserParamError { name, value });
            }
        }
        for (name, value) in [("push_ramp", self.push_ramp), ("intent_lead", self.intent_lead)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(UserParamError { name, value });
            }
        }
        Ok(())
    }

    /// Shoulder-angle target for an intended direction.
    pub fn angle_for(&self, d: Direction) -> f64 {
        match d {
            Direction::Left => self.angle_means.left,
            Direction::Straight => self.angle_means.straight,
            Direction::Right => self.angle_means.right,
        }
    }
}

/// What the user puts into the walker on one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserInputs {
    /// Net wrench seen by the handle sensor.
    pub wrench: HandleWrench,
    pub tau_wrist: f64,
    pub abduction_deg: f64,
    /// The wanted wrist torque exceeded the limit.
    pub saturated: bool,
}

#[derive(Debug, Clone, Copy)]
struct Percept {
    heading_error: f64,
    cross_track: f64,
    feedforward: f64,
    direction: Direction,
}

/// Which steering law the user is adapting to.
#[derive(Debug, Clone)]
pub enum Steering {
    Conventional(AngularAdmittanceParams),
    Fuzzy(FuzzyProfile),
}

impl Steering {
    pub fn kind(&self) -> ControllerKind {
        match self {
            Steering::Conventional(_) => ControllerKind::Conventional,
            Steering::Fuzzy(_) => ControllerKind::Fuzzy,
        }
    }
}

#[derive(Debug, Clone)]
pub struct UserModel {
    params: UserModelParams,
    steering: Steering,
    dt: f64,
    delay_ticks: usize,
    percepts: VecDeque<Percept>,
    rng: ChaCha8Rng,
    angle: f64,
    angle_filter: MovingAverage,
    tau_wrist: f64,
}

impl UserModel {
    pub fn new(
        params: UserModelParams,
        steering: Steering,
        dt: f64,
        seed: u64,
    ) -> Result<Self, UserParamError> {
        params.validate()?;
        Ok(Self {
            angle: params.angle_means.straight,
            delay_ticks: (params.reaction_delay / dt).round() as usize,
            params,
            steering,
            dt,
            percepts: VecDeque::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            angle_filter: MovingAverage::new(SMOOTHING_WINDOW),
            tau_wrist: 0.0,
        })
    }

    pub fn params(&self) -> &UserModelParams {
        &self.params
    }

    /// Forward push at time `t` before sensor noise.
    pub fn push_at(&self, t: f64) -> f64 {
        let ramp = if self.params.push_ramp > 0.0 {
            (t / self.params.push_ramp).min(1.0)
        } else {
            1.0
        };
        self.params.push_force * ramp
    }

    pub fn step(&mut self, t: f64, pose: &WalkerPose, path: &PathError) -> UserInputs {
        let p = self.params;
        // Same draw count on every tick so controllers see matched noise.
        let n_angle = self.gauss();
        let n_torque = self.gauss();
        let n_force = self.gauss();

        self.percepts.push_back(Percept {
            heading_error: heading_diff(path.heading_ref, pose.heading),
            cross_track: path.cross_track,
            feedforward: path.feedforward,
            direction: match path.next_direction {
                Some(next) if path.remaining < self.params.intent_lead => next,
                _ => path.direction,
            },
        });
        while self.percepts.len() > self.delay_ticks + 1 {
            self.percepts.pop_front();
        }
        let seen = self.percepts[0];
        let omega_des = (seen.feedforward + p.heading_gain * seen.heading_error
            - p.cross_track_gain * seen.cross_track)
            .clamp(-p.max_turn_rate, p.max_turn_rate);

        let target = p.angle_for(seen.direction);
        let max_step = p.angle_slew * self.dt;
        self.angle += (target - self.angle).clamp(-max_step, max_step);
        let abduction = self.angle + p.noise_sigma_angle * n_angle;
        let smoothed_angle = self.angle_filter.push(abduction);

        let push = self.push_at(t);
        let lever = p.grip_offset * push;
        let wanted = match &self.steering {
            Steering::Conventional(ang) => ang.stiffness * omega_des.to_radians() - lever,
            Steering::Fuzzy(profile) => {
                fuzzy_effort(profile, smoothed_angle, lever, omega_des, p.omega_tol, p.wrist_torque_limit)
            }
        };
        let saturated = wanted.abs() > p.wrist_torque_limit;
        let wanted = wanted.clamp(-p.wrist_torque_limit, p.wrist_torque_limit);
        self.tau_wrist += (wanted - self.tau_wrist) * (self.dt / p.wrist_time_constant).min(1.0);

        UserInputs {
            wrench: HandleWrench {
                f_x: push + p.noise_sigma_force * n_force,
                tau_z: self.tau_wrist + lever + p.noise_sigma_torque * n_torque,
            },
            tau_wrist: self.tau_wrist,
            abduction_deg: abduction,
            saturated,
        }
    }

    fn gauss(&mut self) -> f64 {
        Normal::new(0.0, 1.0).expect("unit normal").sample(&mut self.rng)
    }
}

const SEARCH_STEP: f64 = 0.25;
const BISECTIONS: usize = 10;

/// Smallest-magnitude wrist torque whose steady sensed torque makes the
/// fuzzy controller produce `omega_des` within `tol`.
///
/// Candidates are scanned outward in [`SEARCH_STEP`] increments on both
/// signs and the first feasible bracket is bisected. If no candidate within
/// `limit` is feasible, the best one found is returned with a magnitude just
/// past the limit so the caller records saturation.
pub fn fuzzy_effort(
    profile: &FuzzyProfile,
    angle: f64,
    lever: f64,
    omega_des: f64,
    tol: f64,
    limit: f64,
) -> f64 {
    let miss = |tw: f64| (profile.infer(angle, tw + lever) - omega_des).abs();
    if miss(0.0) < tol {
        return 0.0;
    }
    let steps = (limit / SEARCH_STEP).floor() as usize;
    let mut best = (f64::INFINITY, 0.0);
    for k in 1..=steps {
        let mag = k as f64 * SEARCH_STEP;
        let mut hit = None;
        for sign in [1.0, -1.0] {
            let tw = sign * mag;
            let m = miss(tw);
            if m < best.0 {
                best = (m, tw);
            }
            if m < tol && hit.is_none_or(|(hm, _)| m < hm) {
                hit = Some((m, sign));
            }
        }
        if let Some((_, sign)) = hit {
            let (mut lo, mut hi) = (mag - SEARCH_STEP, mag);
            for _ in 0..BISECTIONS {
                let mid = 0.5 * (lo + hi);
                if miss(sign * mid) < tol {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return sign * hi;
        }
    }
    let tw = best.1;
    tw.signum() * (limit + SEARCH_STEP).max(tw.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::user5_profile;

    #[test]
    fn effort_is_zero_when_intent_already_encoded() {
        let p = user5_profile();
        assert_eq!(fuzzy_effort(&p, 27.17, 1.0, 0.0, 3.0, 15.0), 0.0);
    }

    #[test]
    fn effort_meets_tolerance_and_is_minimal() {
        let p = user5_profile();
        let tw = fuzzy_effort(&p, 20.34, 1.25, -30.0, 3.0, 15.0);
        assert!(tw < 0.0);
        assert!((p.infer(20.34, tw + 1.25) + 30.0).abs() < 3.0);
        let smaller = tw * 0.97;
        assert!((p.infer(20.34, smaller + 1.25) + 30.0).abs() >= 3.0);
    }

    #[test]
    fn unreachable_rate_saturates() {
        let p = user5_profile();
        let tw = fuzzy_effort(&p, 27.17, 0.0, 89.0, 0.5, 15.0);
        assert!(tw.abs() > 15.0);
    }

    #[test]
    fn zero_push_has_no_lever_moment() {
        let params = UserModelParams {
            push_force: 0.0,
            ..UserModelParams::default()
        }
        .noiseless();
        let mut u = UserModel::new(
            params,
            Steering::Conventional(AngularAdmittanceParams::default()),
            0.02,
            1,
        )
        .unwrap();
        let path = PathError {
            segment: 0,
            heading_ref: 10.0,
            cross_track: 0.0,
            feedforward: 0.0,
            direction: Direction::Straight,
            speed: 0.5,
            remaining: 10.0,
            next_direction: None,
        };
        for n in 0..50 {
            let i = u.step(n as f64 * 0.02, &WalkerPose::default(), &path);
            assert_eq!(i.wrench.tau_z, i.tau_wrist);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let p = UserModelParams {
            noise_sigma_angle: -1.0,
            ..UserModelParams::default()
        };
        assert_eq!(p.validate().unwrap_err().name, "noise_sigma_angle");
    }
}
