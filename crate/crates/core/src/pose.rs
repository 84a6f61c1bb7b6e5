//! Keypoint geometry: pinhole deprojection and shoulder abduction angle.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Seconds an invalid frame may be bridged by the last valid angle.
pub const DROPOUT_HOLD_S: f64 = 0.5;
/// Time constant of the decay toward the straight center after the hold.
pub const DROPOUT_DECAY_TAU_S: f64 = 0.5;
pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoseError {
    #[error("invalid keypoint {0}: depth must be positive")]
    InvalidKeypoint(String),
    #[error("degenerate pose: zero-length limb vector")]
    DegeneratePose,
    #[error("invalid intrinsics")]
    InvalidIntrinsics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self, PoseError> {
        let k = Self { fx, fy, cx, cy };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), PoseError> {
        let finite = [self.fx, self.fy, self.cx, self.cy]
            .iter()
            .all(|v| v.is_finite());
        if finite && self.fx > 0.0 && self.fy > 0.0 {
            Ok(())
        } else {
            Err(PoseError::InvalidIntrinsics)
        }
    }
}

impl Default for CameraIntrinsics {
    // 1280x720 stereo camera, roughly.
    fn default() -> Self {
        Self {
            fx: 700.0,
            fy: 700.0,
            cx: 640.0,
            cy: 360.0,
        }
    }
}

/// BODY_18 joint labels in index order.
pub const BODY_18: [&str; 18] = [
    "nose",
    "neck",
    "right_shoulder",
    "right_elbow",
    "right_wrist",
    "left_shoulder",
    "left_elbow",
    "left_wrist",
    "right_hip",
    "right_knee",
    "right_ankle",
    "left_hip",
    "left_knee",
    "left_ankle",
    "right_eye",
    "left_eye",
    "right_ear",
    "left_ear",
];

pub fn is_body18_joint(name: &str) -> bool {
    BODY_18.contains(&name)
}

/// Swap `left_`/`right_` prefixes.
pub fn mirror_label(name: &str) -> String {
    if let Some(rest) = name.strip_prefix("right_") {
        format!("left_{rest}")
    } else if let Some(rest) = name.strip_prefix("left_") {
        format!("right_{rest}")
    } else {
        name.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keypoint2D {
    pub name: String,
    pub x: f64,
    pub y: f64,
    pub depth: f64,
    pub confidence: f64,
}

impl Keypoint2D {
    pub fn new(name: impl Into<String>, x: f64, y: f64, depth: f64, confidence: f64) -> Self {
        Self {
            name: name.into(),
            x,
            y,
            depth,
            confidence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Keypoint3D {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    fn sub(self, o: Self) -> [f64; 3] {
        [self.x - o.x, self.y - o.y, self.z - o.z]
    }
}

pub fn deproject(p: &Keypoint2D, k: &CameraIntrinsics) -> Result<Keypoint3D, PoseError> {
    if !(p.depth.is_finite() && p.depth > 0.0 && p.x.is_finite() && p.y.is_finite()) {
        return Err(PoseError::InvalidKeypoint(p.name.clone()));
    }
    let z = p.depth;
    Ok(Keypoint3D {
        x: (p.x - k.cx) * z / k.fx,
        y: (p.y - k.cy) * z / k.fy,
        z,
    })
}

/// Inverse of [`deproject`]: returns pixel coordinates.
pub fn project(p: &Keypoint3D, k: &CameraIntrinsics) -> (f64, f64) {
    (p.x * k.fx / p.z + k.cx, p.y * k.fy / p.z + k.cy)
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Angle between two 3-vectors in degrees.
pub fn vector_angle_deg(u: [f64; 3], w: [f64; 3]) -> Result<f64, PoseError> {
    let (nu, nw) = (norm(u), norm(w));
    if !(nu > 0.0 && nw > 0.0 && nu.is_finite() && nw.is_finite()) {
        return Err(PoseError::DegeneratePose);
    }
    let cross = [
        u[1] * w[2] - u[2] * w[1],
        u[2] * w[0] - u[0] * w[2],
        u[0] * w[1] - u[1] * w[0],
    ];
    // Same value as acos(u.w / |u||w|).
    Ok(norm(cross).atan2(dot(u, w)).to_degrees())
}

/// Angle at the shoulder between the upper arm and the torso side.
pub fn abduction_angle(
    shoulder: &Keypoint3D,
    elbow: &Keypoint3D,
    hip: &Keypoint3D,
) -> Result<f64, PoseError> {
    vector_angle_deg(elbow.sub(*shoulder), hip.sub(*shoulder))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyFrame {
    pub t: f64,
    pub joints: BTreeMap<String, Keypoint2D>,
}

impl BodyFrame {
    pub fn new(t: f64, joints: impl IntoIterator<Item = Keypoint2D>) -> Self {
        Self {
            t,
            joints: joints.into_iter().map(|k| (k.name.clone(), k)).collect(),
        }
    }

    /// Same frame with left and right labels exchanged.
    pub fn mirrored(&self) -> Self {
        Self {
            t: self.t,
            joints: self
                .joints
                .values()
                .map(|k| {
                    let name = mirror_label(&k.name);
                    (name.clone(), Keypoint2D { name, ..k.clone() })
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShoulderState {
    pub t: f64,
    pub abduction_deg: f64,
    pub valid: bool,
}

impl ShoulderState {
    pub fn invalid(t: f64) -> Self {
        Self {
            t,
            abduction_deg: f64::NAN,
            valid: false,
        }
    }
}

pub fn frame_to_shoulder_state(
    frame: &BodyFrame,
    k: &CameraIntrinsics,
    min_confidence: f64,
) -> ShoulderState {
    let joint = |name: &str| {
        frame
            .joints
            .get(name)
            .filter(|p| p.confidence >= min_confidence)
            .and_then(|p| deproject(p, k).ok())
    };
    let (Some(s), Some(e), Some(h)) = (
        joint("right_shoulder"),
        joint("right_elbow"),
        joint("right_hip"),
    ) else {
        return ShoulderState::invalid(frame.t);
    };
    match abduction_angle(&s, &e, &h) {
        Ok(a) => ShoulderState {
            t: frame.t,
            abduction_deg: a,
            valid: true,
        },
        Err(_) => ShoulderState::invalid(frame.t),
    }
}

/// Bridges invalid shoulder samples.
///
/// The last valid angle is held for [`DROPOUT_HOLD_S`]; after that the
/// output decays exponentially toward `straight_center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropoutHold {
    straight_center: f64,
    last_valid: Option<(f64, f64)>,
}

impl DropoutHold {
    pub fn new(straight_center: f64) -> Self {
        Self {
            straight_center,
            last_valid: None,
        }
    }

    pub fn observe(&mut self, state: &ShoulderState) {
        if state.valid && state.abduction_deg.is_finite() {
            self.last_valid = Some((state.t, state.abduction_deg));
        }
    }

    /// Angle to feed the controller at time `t`.
    pub fn angle_at(&self, t: f64) -> f64 {
        match self.last_valid {
            None => self.straight_center,
            Some((tv, a)) => {
                let gap = t - tv;
                if gap <= DROPOUT_HOLD_S {
                    a
                } else {
                    let w = (-(gap - DROPOUT_HOLD_S) / DROPOUT_DECAY_TAU_S).exp();
                    self.straight_center + (a - self.straight_center) * w
                }
            }
        }
    }
}

/// Turns a frame stream into shoulder states, in timestamp order.
#[derive(Debug, Clone)]
pub struct ShoulderTracker {
    intrinsics: CameraIntrinsics,
    min_confidence: f64,
    mirror: bool,
    hold: DropoutHold,
    last_t: Option<f64>,
}

impl ShoulderTracker {
    pub fn new(
        intrinsics: CameraIntrinsics,
        min_confidence: f64,
        straight_center: f64,
        mirror: bool,
    ) -> Self {
        Self {
            intrinsics,
            min_confidence,
            mirror,
            hold: DropoutHold::new(straight_center),
            last_t: None,
        }
    }

    /// Feed one frame. Returns `None` if its timestamp does not advance.
    pub fn update(&mut self, frame: &BodyFrame) -> Option<ShoulderState> {
        if self.last_t.is_some_and(|t| frame.t <= t) || !frame.t.is_finite() {
            return None;
        }
        self.last_t = Some(frame.t);
        let state = if self.mirror {
            frame_to_shoulder_state(&frame.mirrored(), &self.intrinsics, self.min_confidence)
        } else {
            frame_to_shoulder_state(frame, &self.intrinsics, self.min_confidence)
        };
        self.hold.observe(&state);
        Some(state)
    }

    pub fn angle_at(&self, t: f64) -> f64 {
        self.hold.angle_at(t)
    }

    pub fn mirror(&self) -> bool {
        self.mirror
    }
}
