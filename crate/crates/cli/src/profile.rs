//! Versioned plain-text controller profile.
//!
//! ```text
//! walker-profile v1
//! # fuzzy terms: center sigma
//! angle.Low = 20.34 3.415
//! rule.Low.Negative = SharpRight
//! mirror = false
//! user.push_force = 5
//! ```
//!
//! Every key is optional and falls back to the reference-user default.
//! Unknown and repeated keys are errors. `user.angle_*` default to the angle
//! term centers so the synthetic user matches the profile it is given.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;
use walker_core::admittance::{AngularAdmittanceParams, LinearAdmittanceParams};
use walker_core::fuzzy::{
    user5_profile, AngleMeans, AngleTerm, FuzzyProfile, GaussianMF, LinguisticVariable,
    OutputTerm, RuleBase, TorqueTerm, ANGLE_LABELS, OUTPUT_LABELS, TORQUE_LABELS,
};
use walker_core::pose::{CameraIntrinsics, DEFAULT_MIN_CONFIDENCE};
use walker_core::sim::{TrialConfig, UserModelParams};

pub const PROFILE_HEADER: &str = "walker-profile v1";

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid profile: {0}")]
    Invalid(String),
    #[error("reading profile: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileFile {
    pub camera: CameraIntrinsics,
    pub min_confidence: f64,
    pub fuzzy: FuzzyProfile,
    pub linear: LinearAdmittanceParams,
    pub angular: AngularAdmittanceParams,
    pub user: UserModelParams,
}

impl Default for ProfileFile {
    fn default() -> Self {
        Self::from_fuzzy(user5_profile())
    }
}

fn angle_means_of(p: &FuzzyProfile) -> AngleMeans {
    let c = p.angle_var().centers();
    AngleMeans {
        right: c[0],
        straight: c[1],
        left: c[2],
    }
}

fn invalid(e: impl std::fmt::Display) -> ProfileError {
    ProfileError::Invalid(e.to_string())
}

impl ProfileFile {
    /// Defaults around a given fuzzy profile.
    pub fn from_fuzzy(fuzzy: FuzzyProfile) -> Self {
        let user = UserModelParams {
            angle_means: angle_means_of(&fuzzy),
            ..UserModelParams::default()
        };
        Self {
            camera: CameraIntrinsics::default(),
            min_confidence: DEFAULT_MIN_CONFIDENCE,
            fuzzy,
            linear: LinearAdmittanceParams::default(),
            angular: AngularAdmittanceParams::default(),
            user,
        }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        self.camera.validate().map_err(invalid)?;
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(invalid(format!(
                "pose.min_confidence must be in [0, 1], got {}",
                self.min_confidence
            )));
        }
        self.linear.validate().map_err(|e| invalid(format!("linear: {e}")))?;
        self.angular
            .validate()
            .map_err(|e| invalid(format!("angular: {e}")))?;
        self.user.validate().map_err(invalid)?;
        Ok(())
    }

    pub fn trial_config(&self) -> TrialConfig {
        TrialConfig {
            linear: self.linear,
            angular: self.angular,
            profile: self.fuzzy.clone(),
            user: self.user,
            ..TrialConfig::default()
        }
    }

    pub fn load(path: &Path) -> Result<Self, ProfileError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, ProfileError> {
        let mut entries = Entries::read(text)?;
        let d = Self::default();

        let camera = CameraIntrinsics {
            fx: entries.f64("camera.fx", d.camera.fx)?,
            fy: entries.f64("camera.fy", d.camera.fy)?,
            cx: entries.f64("camera.cx", d.camera.cx)?,
            cy: entries.f64("camera.cy", d.camera.cy)?,
        };
        let min_confidence = entries.f64("pose.min_confidence", d.min_confidence)?;
        let mirror = entries.bool("mirror", d.fuzzy.mirror())?;

        let angle_var = entries.variable("angle", &ANGLE_LABELS, d.fuzzy.angle_var())?;
        let torque_var = entries.variable("torque", &TORQUE_LABELS, d.fuzzy.torque_var())?;
        let output_var = entries.variable("output", &OUTPUT_LABELS, d.fuzzy.output_var())?;
        let mut rules = Vec::new();
        for &a in AngleTerm::ALL {
            for &t in TorqueTerm::ALL {
                let key = format!("rule.{}.{}", a.label(), t.label());
                let o = match entries.take(&key) {
                    Some((line, v)) => v
                        .parse::<OutputTerm>()
                        .map_err(|e| ProfileError::Parse { line, msg: e.to_string() })?,
                    None => d.fuzzy.rules().get(a, t),
                };
                rules.push((a, t, o));
            }
        }
        let rules = RuleBase::from_entries(rules).map_err(invalid)?;
        let fuzzy = FuzzyProfile::new(angle_var, torque_var, output_var, rules, mirror)
            .map_err(invalid)?;

        let linear = LinearAdmittanceParams {
            mass: entries.f64("linear.mass", d.linear.mass)?,
            damping: entries.f64("linear.damping", d.linear.damping)?,
            stiffness: entries.f64("linear.stiffness", d.linear.stiffness)?,
        };
        let angular = AngularAdmittanceParams {
            inertia: entries.f64("angular.inertia", d.angular.inertia)?,
            damping: entries.f64("angular.damping", d.angular.damping)?,
            stiffness: entries.f64("angular.stiffness", d.angular.stiffness)?,
        };

        let du = d.user;
        let means = angle_means_of(&fuzzy);
        let user = UserModelParams {
            push_force: entries.f64("user.push_force", du.push_force)?,
            grip_offset: entries.f64("user.grip_offset", du.grip_offset)?,
            wrist_torque_limit: entries.f64("user.wrist_torque_limit", du.wrist_torque_limit)?,
            reaction_delay: entries.f64("user.reaction_delay", du.reaction_delay)?,
            wrist_time_constant: entries
                .f64("user.wrist_time_constant", du.wrist_time_constant)?,
            noise_sigma_force: entries.f64("user.noise_sigma_force", du.noise_sigma_force)?,
            noise_sigma_torque: entries.f64("user.noise_sigma_torque", du.noise_sigma_torque)?,
            noise_sigma_angle: entries.f64("user.noise_sigma_angle", du.noise_sigma_angle)?,
            angle_means: AngleMeans {
                left: entries.f64("user.angle_left", means.left)?,
                straight: entries.f64("user.angle_straight", means.straight)?,
                right: entries.f64("user.angle_right", means.right)?,
            },
            angle_slew: entries.f64("user.angle_slew", du.angle_slew)?,
            turn_rate: entries.f64("user.turn_rate", du.turn_rate)?,
            heading_gain: entries.f64("user.heading_gain", du.heading_gain)?,
            cross_track_gain: entries.f64("user.cross_track_gain", du.cross_track_gain)?,
            max_turn_rate: entries.f64("user.max_turn_rate", du.max_turn_rate)?,
            omega_tol: entries.f64("user.omega_tol", du.omega_tol)?,
            push_ramp: entries.f64("user.push_ramp", du.push_ramp)?,
            intent_lead: entries.f64("user.intent_lead", du.intent_lead)?,
        };
        entries.finish()?;

        let p = Self {
            camera,
            min_confidence,
            fuzzy,
            linear,
            angular,
            user,
        };
        p.validate()?;
        Ok(p)
    }

    /// Full profile text; every key is written.
    pub fn to_text(&self) -> String {
        let mut s = format!("{PROFILE_HEADER}\n");
        let c = &self.camera;
        let _ = writeln!(s, "\n# camera intrinsics, px");
        for (k, v) in [("fx", c.fx), ("fy", c.fy), ("cx", c.cx), ("cy", c.cy)] {
            let _ = writeln!(s, "camera.{k} = {v}");
        }
        let _ = writeln!(s, "pose.min_confidence = {}", self.min_confidence);

        let _ = writeln!(s, "\n# fuzzy terms: center sigma");
        for v in [
            ("angle", self.fuzzy.angle_var()),
            ("torque", self.fuzzy.torque_var()),
            ("output", self.fuzzy.output_var()),
        ] {
            for (label, mf) in v.1.terms() {
                let _ = writeln!(s, "{}.{label} = {} {}", v.0, mf.center, mf.sigma);
            }
        }
        let _ = writeln!(s, "\n# rules: angle.torque = output");
        for (a, t, o) in self.fuzzy.rules().entries() {
            let _ = writeln!(s, "rule.{}.{} = {}", a.label(), t.label(), o.label());
        }
        let _ = writeln!(s, "mirror = {}", self.fuzzy.mirror());

        let _ = writeln!(s, "\n# admittance");
        let (l, a) = (&self.linear, &self.angular);
        let _ = writeln!(s, "linear.mass = {}", l.mass);
        let _ = writeln!(s, "linear.damping = {}", l.damping);
        let _ = writeln!(s, "linear.stiffness = {}", l.stiffness);
        let _ = writeln!(s, "angular.inertia = {}", a.inertia);
        let _ = writeln!(s, "angular.damping = {}", a.damping);
        let _ = writeln!(s, "angular.stiffness = {}", a.stiffness);

        let _ = writeln!(s, "\n# synthetic user");
        let u = &self.user;
        for (k, v) in [
            ("push_force", u.push_force),
            ("grip_offset", u.grip_offset),
            ("wrist_torque_limit", u.wrist_torque_limit),
            ("reaction_delay", u.reaction_delay),
            ("wrist_time_constant", u.wrist_time_constant),
            ("noise_sigma_force", u.noise_sigma_force),
            ("noise_sigma_torque", u.noise_sigma_torque),
            ("noise_sigma_angle", u.noise_sigma_angle),
            ("angle_left", u.angle_means.left),
            ("angle_straight", u.angle_means.straight),
            ("angle_right", u.angle_means.right),
            ("angle_slew", u.angle_slew),
            ("turn_rate", u.turn_rate),
            ("heading_gain", u.heading_gain),
            ("cross_track_gain", u.cross_track_gain),
            ("max_turn_rate", u.max_turn_rate),
            ("omega_tol", u.omega_tol),
            ("push_ramp", u.push_ramp),
            ("intent_lead", u.intent_lead),
        ] {
            let _ = writeln!(s, "user.{k} = {v}");
        }
        s
    }
}

/// Key/value lines not yet consumed by the parser.
struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn read(text: &str) -> Result<Self, ProfileError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, PROFILE_HEADER)) => {}
            Some((line, other)) => {
                return Err(ProfileError::Parse {
                    line,
                    msg: format!("expected header `{PROFILE_HEADER}`, found `{other}`"),
                })
            }
            None => return Err(invalid("empty profile")),
        }
        let mut map = BTreeMap::new();
        for (line, l) in lines {
            let (k, v) = l.split_once('=').ok_or_else(|| ProfileError::Parse {
                line,
                msg: format!("expected `key = value`, found `{l}`"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if let Some((first, _)) = map.insert(k.to_string(), (line, v.to_string())) {
                return Err(ProfileError::Parse {
                    line,
                    msg: format!("duplicate key `{k}` (first on line {first})"),
                });
            }
        }
        Ok(Self { map })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64, ProfileError> {
        match self.take(key) {
            None => Ok(default),
            Some((line, v)) => parse_f64(&v).ok_or_else(|| ProfileError::Parse {
                line,
                msg: format!("`{key}` expects a finite number, found `{v}`"),
            }),
        }
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool, ProfileError> {
        match self.take(key) {
            None => Ok(default),
            Some((line, v)) => v.parse().map_err(|_| ProfileError::Parse {
                line,
                msg: format!("`{key}` expects true or false, found `{v}`"),
            }),
        }
    }

    fn variable(
        &mut self,
        prefix: &str,
        labels: &[&str],
        default: &LinguisticVariable,
    ) -> Result<LinguisticVariable, ProfileError> {
        let mut terms = Vec::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            let key = format!("{prefix}.{label}");
            let mf = match self.take(&key) {
                None => *default.mf(i),
                Some((line, v)) => {
                    let bad = |msg: String| ProfileError::Parse { line, msg };
                    let nums: Vec<f64> = v.split_whitespace().filter_map(parse_f64).collect();
                    if nums.len() != 2 || v.split_whitespace().count() != 2 {
                        return Err(bad(format!("`{key}` expects `center sigma`, found `{v}`")));
                    }
                    GaussianMF::new(nums[0], nums[1]).map_err(|e| bad(format!("`{key}`: {e}")))?
                }
            };
            terms.push((label.to_string(), mf));
        }
        LinguisticVariable::new(default.name.clone(), terms)
            .map_err(|e| invalid(format!("{prefix}: {e}")))
    }

    fn finish(self) -> Result<(), ProfileError> {
        match self.map.into_iter().min_by_key(|(_, (line, _))| *line) {
            None => Ok(()),
            Some((k, (line, _))) => Err(ProfileError::Parse {
                line,
                msg: format!("unknown key `{k}`"),
            }),
        }
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}
