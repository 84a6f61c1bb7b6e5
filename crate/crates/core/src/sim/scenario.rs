//! Course definitions and reference-path geometry.
//!
//! Scenario file format, one directive per line, `#` starts a comment:
//!
//! ```text
//! walker-scenario v1
//! straight length=4.0 speed=0.5
//! turn angle=-90 speed=0.5
//! straight length=4.0 speed=0.5
//! ```
//!
//! Positive turn angles are to the left.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use super::plant::{heading_diff, WalkerPose};

pub const SCENARIO_HEADER: &str = "walker-scenario v1";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario has no segments")]
    Empty,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid segment {index}: {msg}")]
    Invalid { index: usize, msg: String },
    #[error("reading scenario: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Left,
    Straight,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Left, Direction::Straight, Direction::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Straight => "straight",
            Direction::Right => "right",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "left" => Ok(Direction::Left),
            "straight" => Ok(Direction::Straight),
            "right" => Ok(Direction::Right),
            _ => Err(format!("unknown direction {s}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentKind {
    Straight { length: f64 },
    Turn { angle: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub speed: f64,
}

impl Segment {
    pub fn straight(length: f64, speed: f64) -> Self {
        Self {
            kind: SegmentKind::Straight { length },
            speed,
        }
    }

    pub fn turn(angle: f64, speed: f64) -> Self {
        Self {
            kind: SegmentKind::Turn { angle },
            speed,
        }
    }

    pub fn direction(&self) -> Direction {
        match self.kind {
            SegmentKind::Straight { .. } => Direction::Straight,
            SegmentKind::Turn { angle } if angle > 0.0 => Direction::Left,
            SegmentKind::Turn { .. } => Direction::Right,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    segments: Vec<Segment>,
}

impl Scenario {
    pub fn new(name: impl Into<String>, segments: Vec<Segment>) -> Result<Self, ScenarioError> {
        if segments.is_empty() {
            return Err(ScenarioError::Empty);
        }
        for (index, s) in segments.iter().enumerate() {
            let bad = |msg: &str| ScenarioError::Invalid {
                index,
                msg: msg.to_string(),
            };
            if !(s.speed.is_finite() && s.speed > 0.0) {
                return Err(bad("speed must be positive"));
            }
            match s.kind {
                SegmentKind::Straight { length } if !(length.is_finite() && length > 0.0) => {
                    return Err(bad("length must be positive"))
                }
                SegmentKind::Turn { angle }
                    if !(angle.is_finite() && angle != 0.0 && angle.abs() < 360.0) =>
                {
                    return Err(bad("turn angle must be nonzero and below 360 degrees"))
                }
                _ => {}
            }
        }
        Ok(Self {
            name: name.into(),
            segments,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// 4 m straight, 90 degree turn, 4 m straight.
    pub fn course_4m_90(direction: Direction) -> Self {
        let (name, angle) = match direction {
            Direction::Left => ("course_4m_90_left", 90.0),
            _ => ("course_4m_90", -90.0),
        };
        Self::new(
            name,
            vec![
                Segment::straight(4.0, 0.5),
                Segment::turn(angle, 0.5),
                Segment::straight(4.0, 0.5),
            ],
        )
        .expect("static course")
    }

    pub fn straight_5m() -> Self {
        Self::new("straight_5m", vec![Segment::straight(5.0, 0.5)]).expect("static course")
    }

    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, ScenarioError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, SCENARIO_HEADER)) => {}
            Some((line, other)) => {
                return Err(ScenarioError::Parse {
                    line,
                    msg: format!("expected header `{SCENARIO_HEADER}`, found `{other}`"),
                })
            }
            None => return Err(ScenarioError::Empty),
        }
        let mut segments = Vec::new();
        for (line, l) in lines {
            segments.push(parse_segment(l).map_err(|msg| ScenarioError::Parse { line, msg })?);
        }
        Self::new(name, segments)
    }

    /// Loads a scenario; its name is the file stem.
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into());
        Self::parse(name, &text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{SCENARIO_HEADER}\n");
        for s in &self.segments {
            match s.kind {
                SegmentKind::Straight { length } => {
                    out += &format!("straight length={length} speed={}\n", s.speed)
                }
                SegmentKind::Turn { angle } => {
                    out += &format!("turn angle={angle} speed={}\n", s.speed)
                }
            }
        }
        out
    }
}

fn parse_segment(line: &str) -> Result<Segment, String> {
    let mut words = line.split_whitespace();
    let kind = words.next().ok_or("empty directive")?;
    let mut length = None;
    let mut angle = None;
    let mut speed = None;
    for w in words {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, found `{w}`"))?;
        let v: f64 = v.parse().map_err(|_| format!("bad number `{v}` for {k}"))?;
        let slot = match k {
            "length" => &mut length,
            "angle" => &mut angle,
            "speed" => &mut speed,
            _ => return Err(format!("unknown key `{k}`")),
        };
        if slot.replace(v).is_some() {
            return Err(format!("duplicate key `{k}`"));
        }
    }
    let speed = speed.ok_or("missing speed")?;
    match kind {
        "straight" if angle.is_none() => Ok(Segment::straight(length.ok_or("missing length")?, speed)),
        "turn" if length.is_none() => Ok(Segment::turn(angle.ok_or("missing angle")?, speed)),
        "straight" | "turn" => Err(format!("unexpected key for {kind}")),
        other => Err(format!("unknown segment kind `{other}`")),
    }
}

/// Where the walker is relative to the reference path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathError {
    /// Active segment index.
    pub segment: usize,
    /// Reference heading at the closest path point, deg.
    pub heading_ref: f64,
    /// Signed lateral offset, positive when left of the path, m.
    pub cross_track: f64,
    /// Yaw rate of the reference path, deg/s.
    pub feedforward: f64,
    pub direction: Direction,
    pub speed: f64,
    /// Time left on the active segment at its nominal pace, s.
    pub remaining: f64,
    /// Direction of the following segment, if any.
    pub next_direction: Option<Direction>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Primitive {
    Line {
        x0: f64,
        y0: f64,
        heading: f64,
        length: f64,
    },
    Arc {
        cx: f64,
        cy: f64,
        radius: f64,
        start_heading: f64,
        angle: f64,
        rate: f64,
    },
}

/// Reference path built from a scenario, with progress tracking.
#[derive(Debug, Clone)]
pub struct PathTracker {
    prims: Vec<(Primitive, Segment)>,
    active: usize,
    swept: f64,
    last_phi: Option<f64>,
}

impl PathTracker {
    /// Turns are laid out as arcs traversed at `turn_rate` deg/s.
    pub fn new(scenario: &Scenario, start: WalkerPose, turn_rate: f64) -> Self {
        let (mut x, mut y, mut h) = (start.x, start.y, start.heading);
        let mut prims = Vec::new();
        for seg in scenario.segments() {
            match seg.kind {
                SegmentKind::Straight { length } => {
                    prims.push((
                        Primitive::Line {
                            x0: x,
                            y0: y,
                            heading: h,
                            length,
                        },
                        *seg,
                    ));
                    x += length * h.to_radians().cos();
                    y += length * h.to_radians().sin();
                }
                SegmentKind::Turn { angle } => {
                    let sgn = angle.signum();
                    let radius = seg.speed / turn_rate.to_radians();
                    let hr = h.to_radians();
                    let cx = x - sgn * radius * hr.sin();
                    let cy = y + sgn * radius * hr.cos();
                    prims.push((
                        Primitive::Arc {
                            cx,
                            cy,
                            radius,
                            start_heading: h,
                            angle,
                            rate: sgn * turn_rate,
                        },
                        *seg,
                    ));
                    h += angle;
                    let hr = h.to_radians();
                    x = cx + sgn * radius * hr.sin();
                    y = cy - sgn * radius * hr.cos();
                }
            }
        }
        Self {
            prims,
            active: 0,
            swept: 0.0,
            last_phi: None,
        }
    }

    pub fn active(&self) -> usize {
        self.active
    }

    pub fn is_done(&self) -> bool {
        self.active >= self.prims.len()
    }

    /// Advance progress to `pose` and report the path error, or `None`
    /// once the final segment has been completed.
    pub fn update(&mut self, pose: &WalkerPose) -> Option<PathError> {
        while let Some(&(prim, seg)) = self.prims.get(self.active) {
            let next_direction = self.prims.get(self.active + 1).map(|p| p.1.direction());
            match prim {
                Primitive::Line {
                    x0,
                    y0,
                    heading,
                    length,
                } => {
                    let (s, c) = heading.to_radians().sin_cos();
                    let (dx, dy) = (pose.x - x0, pose.y - y0);
                    let along = dx * c + dy * s;
                    if along >= length {
                        self.advance();
                        continue;
                    }
                    return Some(PathError {
                        segment: self.active,
                        heading_ref: heading,
                        cross_track: -dx * s + dy * c,
                        feedforward: 0.0,
                        direction: seg.direction(),
                        speed: seg.speed,
                        remaining: (length - along) / seg.speed,
                        next_direction,
                    });
                }
                Primitive::Arc {
                    cx,
                    cy,
                    radius,
                    start_heading,
                    angle,
                    rate,
                } => {
                    let sgn = angle.signum();
                    let (rx, ry) = (pose.x - cx, pose.y - cy);
                    let phi = ry.atan2(rx).to_degrees();
                    if let Some(last) = self.last_phi {
                        self.swept += sgn * heading_diff(phi, last);
                    }
                    self.last_phi = Some(phi);
                    if self.swept >= angle.abs() {
                        self.advance();
                        continue;
                    }
                    let heading_ref = start_heading + sgn * self.swept.max(0.0);
                    return Some(PathError {
                        segment: self.active,
                        heading_ref,
                        cross_track: sgn * (radius - rx.hypot(ry)),
                        feedforward: rate,
                        direction: seg.direction(),
                        speed: seg.speed,
                        remaining: (angle.abs() - self.swept.max(0.0)) / rate.abs(),
                        next_direction,
                    });
                }
            }
        }
        None
    }

    fn advance(&mut self) {
        self.active += 1;
        self.swept = 0.0;
        self.last_phi = None;
    }
}
