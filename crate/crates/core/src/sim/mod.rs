//! Kinematic walker plant, one-handed user model and trial harness.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub mod batch;
pub mod plant;
pub mod scenario;
pub mod trial;
pub mod user;

pub use batch::{run_batch, Execution, TrialSpec};
pub use plant::{normalize_heading, plant_step, WalkerPose};
pub use scenario::{Direction, PathTracker, Scenario, Segment, SegmentKind};
pub use trial::{run_trial, TickRecord, TrialConfig, TrialError, TrialLog};
pub use user::{UserModel, UserModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Conventional,
    Fuzzy,
}

impl ControllerKind {
    pub const BOTH: [ControllerKind; 2] = [ControllerKind::Conventional, ControllerKind::Fuzzy];

    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::Conventional => "conventional",
            ControllerKind::Fuzzy => "fuzzy",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControllerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "conventional" => Ok(ControllerKind::Conventional),
            "fuzzy" => Ok(ControllerKind::Fuzzy),
            _ => Err(format!("unknown controller `{s}`")),
        }
    }
}
