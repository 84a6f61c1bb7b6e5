//! Offline replay of recorded keypoint and handle-torque streams.
//!
//! Keypoints are JSON lines, one frame per line:
//!
//! ```text
//! {"t": 0.02, "keypoints": [{"name": "right_shoulder", "x": 640.0, "y": 300.0, "depth": 2.0, "confidence": 0.9}, ...]}
//! ```
//!
//! Torque is CSV with header `t,fx_N,tauz_Nm`. Both streams must have
//! strictly increasing timestamps. Ticks run at the sample rate from the
//! first to the last keypoint timestamp; torque is held between samples.

use std::io::{BufRead, Read};

use serde::Deserialize;
use thiserror::Error;
use walker_core::admittance::{AdmittanceError, HandleWrench};
use walker_core::fuzzy::FuzzyController;
use walker_core::pose::{BodyFrame, Keypoint2D, ShoulderState, ShoulderTracker};
use walker_core::signals::SampleRate;

use crate::profile::ProfileFile;

pub const TORQUE_HEADER: &str = "t,fx_N,tauz_Nm";

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("{stream} line {line}: timestamp {t} does not advance past {prev}")]
    OutOfOrder {
        stream: &'static str,
        line: usize,
        t: f64,
        prev: f64,
    },
    #[error("torque stream: expected header `{TORQUE_HEADER}`, found `{0}`")]
    Header(String),
    #[error("reading {0}: {1}")]
    Io(&'static str, std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Admittance(#[from] AdmittanceError),
}

#[derive(Debug, Deserialize)]
struct KeypointLine {
    t: f64,
    keypoints: Vec<Keypoint2D>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct TorqueSample {
    pub t: f64,
    #[serde(rename = "fx_N")]
    pub fx_n: f64,
    #[serde(rename = "tauz_Nm")]
    pub tauz_nm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayTick {
    pub t: f64,
    pub v: f64,
    pub omega: f64,
}

fn check_order(
    stream: &'static str,
    line: usize,
    t: f64,
    prev: &mut Option<f64>,
) -> Result<(), ReplayError> {
    if let Some(p) = *prev {
        if !(t > p) {
            return Err(ReplayError::OutOfOrder {
                stream,
                line,
                t,
                prev: p,
            });
        }
    }
    *prev = Some(t);
    Ok(())
}

/// Parse keypoint JSON lines. Malformed lines are skipped with a warning.
pub fn read_keypoints<R: BufRead>(r: R) -> Result<Vec<BodyFrame>, ReplayError> {
    let mut frames = Vec::new();
    let mut prev = None;
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| ReplayError::Io("keypoints", e))?;
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<KeypointLine>(&line) {
            Ok(k) if k.t.is_finite() => {
                check_order("keypoints", n, k.t, &mut prev)?;
                frames.push(BodyFrame::new(k.t, k.keypoints));
            }
            Ok(_) => log::warn!("keypoints line {n}: non-finite timestamp, frame skipped"),
            Err(e) => log::warn!("keypoints line {n}: {e}, frame skipped"),
        }
    }
    Ok(frames)
}

/// Parse the torque CSV. Malformed rows are skipped with a warning.
pub fn read_torque<R: Read>(r: R) -> Result<Vec<TorqueSample>, ReplayError> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rd.headers()?.clone();
    let header = headers.iter().collect::<Vec<_>>().join(",");
    if header != TORQUE_HEADER {
        return Err(ReplayError::Header(header));
    }
    let mut out = Vec::new();
    let mut prev = None;
    for rec in rd.records() {
        let rec = match rec {
            Ok(rec) => rec,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                log::warn!("torque line {line}: {e}, skipped");
                continue;
            }
        };
        let line = rec.position().map_or(0, |p| p.line()) as usize;
        match rec.deserialize::<TorqueSample>(Some(&headers)) {
            Ok(s) if s.t.is_finite() && s.fx_n.is_finite() && s.tauz_nm.is_finite() => {
                check_order("torque", line, s.t, &mut prev)?;
                out.push(s);
            }
            Ok(_) => log::warn!("torque line {line}: non-finite value, skipped"),
            Err(e) => log::warn!("torque line {line}: {e}, skipped"),
        }
    }
    Ok(out)
}

/// Run the hybrid controller over the recorded streams.
pub fn replay(
    profile: &ProfileFile,
    frames: &[BodyFrame],
    torque: &[TorqueSample],
    rate: SampleRate,
) -> Result<Vec<ReplayTick>, ReplayError> {
    let (Some(first), Some(last)) = (frames.first(), frames.last()) else {
        return Ok(Vec::new());
    };
    let dt = rate.dt();
    let eps = 1e-9;
    let mut controller = FuzzyController::new(profile.fuzzy.clone(), profile.linear, dt)?;
    let mut tracker = ShoulderTracker::new(
        profile.camera,
        profile.min_confidence,
        profile.fuzzy.straight_center(),
        profile.fuzzy.mirror(),
    );
    let (mut fi, mut ti) = (0, 0);
    let mut wrench = HandleWrench::new(0.0, 0.0);
    let mut out = Vec::new();
    for n in 0.. {
        let t = first.t + n as f64 * dt;
        if t > last.t + eps {
            break;
        }
        let mut latest = None;
        while fi < frames.len() && frames[fi].t <= t + eps {
            latest = tracker.update(&frames[fi]).or(latest);
            fi += 1;
        }
        while ti < torque.len() && torque[ti].t <= t + eps {
            wrench = HandleWrench::new(torque[ti].fx_n, torque[ti].tauz_nm);
            ti += 1;
        }
        // A tick without a fresh valid frame counts as a dropout.
        let shoulder = match latest {
            Some(s) if s.valid => ShoulderState { t, ..s },
            _ => ShoulderState::invalid(t),
        };
        let cmd = controller.tick(wrench, &shoulder)?;
        out.push(ReplayTick {
            t,
            v: cmd.v,
            omega: cmd.omega,
        });
    }
    Ok(out)
}
