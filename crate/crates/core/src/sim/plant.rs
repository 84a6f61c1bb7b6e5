use crate::admittance::VelocityCommand;

/// Planar pose; heading in degrees, CCW positive, kept in (-180, 180].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WalkerPose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl WalkerPose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_heading(heading),
        }
    }
}

/// Wrap an angle in degrees to (-180, 180].
pub fn normalize_heading(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Signed smallest difference `a - b` in degrees.
pub fn heading_diff(a: f64, b: f64) -> f64 {
    normalize_heading(a - b)
}

/// Unicycle step with ideal velocity tracking. Translation uses the
/// heading at mid-step.
pub fn plant_step(pose: WalkerPose, cmd: VelocityCommand, dt: f64) -> WalkerPose {
    let h = (pose.heading + 0.5 * cmd.omega * dt).to_radians();
    WalkerPose {
        x: pose.x + cmd.v * h.cos() * dt,
        y: pose.y + cmd.v * h.sin() * dt,
        heading: normalize_heading(pose.heading + cmd.omega * dt),
    }
}
