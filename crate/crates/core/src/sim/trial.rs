use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::plant::{plant_step, WalkerPose};
use super::scenario::{PathTracker, Scenario};
use super::user::{Steering, UserModel, UserModelParams, UserParamError};
use super::ControllerKind;
use crate::admittance::{
    AdmittanceError, AngularAdmittanceParams, ConventionalController, LinearAdmittanceParams,
    VelocityCommand,
};
use crate::fuzzy::{user5_profile, FuzzyController, FuzzyProfile};
use crate::pose::ShoulderState;
use crate::signals::SampleRate;

pub const TRIAL_TIMEOUT_S: f64 = 120.0;
/// Trimmed from each end of a trial for analysis, s.
pub const EXCLUSION_S: f64 = 1.0;

pub const CSV_HEADER: &str = "t,x,y,heading_deg,v_mps,omega_dps,fx_N,tauz_Nm,tau_wrist_Nm,abduction_deg,segment,controller,seed,excluded";

#[derive(Debug, Error)]
pub enum TrialError {
    #[error(transparent)]
    Admittance(#[from] AdmittanceError),
    #[error(transparent)]
    User(#[from] UserParamError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad trial log: {0}")]
    Format(String),
}

/// Everything a trial needs besides the scenario and seed.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub rate: SampleRate,
    pub linear: LinearAdmittanceParams,
    pub angular: AngularAdmittanceParams,
    pub profile: FuzzyProfile,
    pub user: UserModelParams,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            rate: SampleRate::default(),
            linear: LinearAdmittanceParams::default(),
            angular: AngularAdmittanceParams::default(),
            profile: user5_profile(),
            user: UserModelParams::default(),
        }
    }
}

/// One logged tick. Pose is at `t`; command and inputs are those computed
/// at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
    pub v_mps: f64,
    pub omega_dps: f64,
    #[serde(rename = "fx_N")]
    pub fx_n: f64,
    #[serde(rename = "tauz_Nm")]
    pub tauz_nm: f64,
    #[serde(rename = "tau_wrist_Nm")]
    pub tau_wrist_nm: f64,
    pub abduction_deg: f64,
    pub segment: usize,
    pub controller: ControllerKind,
    pub seed: u64,
    #[serde(with = "flag")]
    pub excluded: bool,
}

mod flag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!("excluded must be 0 or 1, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialLog {
    pub scenario: String,
    pub controller: ControllerKind,
    pub seed: u64,
    pub rows: Vec<TickRecord>,
    /// False when the trial hit the timeout.
    pub complete: bool,
    /// Ticks on which the wanted wrist torque exceeded the limit.
    pub saturated_ticks: usize,
    /// Largest absolute cross-track error, m.
    pub max_cross_track: f64,
}

impl TrialLog {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, f: impl Fn(&TickRecord) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), TrialError> {
        let mut wr = csv::WriterBuilder::new().has_headers(true).from_writer(w);
        if self.rows.is_empty() {
            wr.write_record(CSV_HEADER.split(','))?;
        }
        for r in &self.rows {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Reads a log written by [`TrialLog::write_csv`]. Controller and seed
    /// are taken from the first row.
    pub fn read_csv<R: Read>(scenario: impl Into<String>, r: R) -> Result<Self, TrialError> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        if header.join(",") != CSV_HEADER {
            return Err(TrialError::Format(format!(
                "unexpected header `{}`",
                header.join(",")
            )));
        }
        let rows = rd
            .deserialize()
            .collect::<Result<Vec<TickRecord>, csv::Error>>()?;
        let first = rows
            .first()
            .ok_or_else(|| TrialError::Format("no rows".into()))?;
        let (controller, seed) = (first.controller, first.seed);
        if rows
            .iter()
            .any(|r| r.controller != controller || r.seed != seed)
        {
            return Err(TrialError::Format("mixed controller or seed".into()));
        }
        Ok(Self {
            scenario: scenario.into(),
            controller,
            seed,
            rows,
            complete: true,
            saturated_ticks: 0,
            max_cross_track: f64::NAN,
        })
    }
}

enum Controller {
    Conventional(ConventionalController),
    Fuzzy(FuzzyController),
}

/// Simulate one trial at the configured rate until the course is finished
/// or [`TRIAL_TIMEOUT_S`] elapses.
pub fn run_trial(
    scenario: &Scenario,
    kind: ControllerKind,
    cfg: &TrialConfig,
    seed: u64,
) -> Result<TrialLog, TrialError> {
    let dt = cfg.rate.dt();
    let steering = match kind {
        ControllerKind::Conventional => Steering::Conventional(cfg.angular),
        ControllerKind::Fuzzy => Steering::Fuzzy(cfg.profile.clone()),
    };
    let mut user = UserModel::new(cfg.user, steering, dt, seed)?;
    let mut controller = match kind {
        ControllerKind::Conventional => Controller::Conventional(ConventionalController::new(
            cfg.linear,
            cfg.angular,
            dt,
        )?),
        ControllerKind::Fuzzy => {
            Controller::Fuzzy(FuzzyController::new(cfg.profile.clone(), cfg.linear, dt)?)
        }
    };

    let mut pose = WalkerPose::default();
    let mut path = PathTracker::new(scenario, pose, cfg.user.turn_rate);
    let max_ticks = (TRIAL_TIMEOUT_S * cfg.rate.hz()).round() as usize;
    let mut rows = Vec::new();
    let mut saturated_ticks = 0;
    let mut max_cross_track = 0.0f64;
    let mut complete = false;

    for n in 0..max_ticks {
        let t = n as f64 * dt;
        let Some(err) = path.update(&pose) else {
            complete = true;
            break;
        };
        max_cross_track = max_cross_track.max(err.cross_track.abs());
        let input = user.step(t, &pose, &err);
        saturated_ticks += usize::from(input.saturated);
        let cmd: VelocityCommand = match &mut controller {
            Controller::Conventional(c) => c.tick(input.wrench)?,
            Controller::Fuzzy(c) => c.tick(
                input.wrench,
                &ShoulderState {
                    t,
                    abduction_deg: input.abduction_deg,
                    valid: true,
                },
            )?,
        };
        rows.push(TickRecord {
            t,
            x: pose.x,
            y: pose.y,
            heading_deg: pose.heading,
            v_mps: cmd.v,
            omega_dps: cmd.omega,
            fx_n: input.wrench.f_x,
            tauz_nm: input.wrench.tau_z,
            tau_wrist_nm: input.tau_wrist,
            abduction_deg: input.abduction_deg,
            segment: err.segment,
            controller: kind,
            seed,
            excluded: false,
        });
        pose = plant_step(pose, cmd, dt);
    }
    if !complete && path.update(&pose).is_none() {
        complete = true;
    }
    if !complete {
        log::warn!(
            "{} {} seed {}: timed out after {} s",
            scenario.name,
            kind,
            seed,
            TRIAL_TIMEOUT_S
        );
    }
    mark_exclusions(&mut rows, cfg.rate);
    Ok(TrialLog {
        scenario: scenario.name.clone(),
        controller: kind,
        seed,
        rows,
        complete,
        saturated_ticks,
        max_cross_track,
    })
}

/// Flag the first and last [`EXCLUSION_S`] of ticks.
pub fn mark_exclusions(rows: &mut [TickRecord], rate: SampleRate) {
    let k = (EXCLUSION_S * rate.hz()).round() as usize;
    let n = rows.len();
    for (i, r) in rows.iter_mut().enumerate() {
        r.excluded = i < k || i + k >= n;
    }
}
