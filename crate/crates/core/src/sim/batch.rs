//! Many independent trials, optionally spread over a thread pool.

use super::scenario::Scenario;
use super::trial::{run_trial, TrialConfig, TrialError, TrialLog};
use super::ControllerKind;

#[derive(Debug, Clone)]
pub struct TrialSpec {
    pub scenario: Scenario,
    pub controller: ControllerKind,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise falls
    /// back to sequential.
    #[default]
    Parallel,
}

/// Run every spec; results keep the input order.
pub fn run_batch(
    specs: &[TrialSpec],
    cfg: &TrialConfig,
    exec: Execution,
) -> Result<Vec<TrialLog>, TrialError> {
    let one = |s: &TrialSpec| run_trial(&s.scenario, s.controller, cfg, s.seed);
    match exec {
        Execution::Sequential => specs.iter().map(one).collect(),
        Execution::Parallel => parallel_map(specs, one),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<F>(specs: &[TrialSpec], f: F) -> Result<Vec<TrialLog>, TrialError>
where
    F: Fn(&TrialSpec) -> Result<TrialLog, TrialError> + Sync + Send,
{
    use rayon::prelude::*;
    specs.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<F>(specs: &[TrialSpec], f: F) -> Result<Vec<TrialLog>, TrialError>
where
    F: Fn(&TrialSpec) -> Result<TrialLog, TrialError>,
{
    specs.iter().map(f).collect()
}

/// Matched specs: every scenario under both controllers for `seeds`.
pub fn matched_specs(scenarios: &[Scenario], seeds: impl Iterator<Item = u64> + Clone) -> Vec<TrialSpec> {
    let mut out = Vec::new();
    for sc in scenarios {
        for seed in seeds.clone() {
            for controller in ControllerKind::BOTH {
                out.push(TrialSpec {
                    scenario: sc.clone(),
                    controller,
                    seed,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scenario::Direction;
    use crate::sim::user::UserModelParams;

    #[test]
    fn parallel_matches_sequential() {
        let cfg = TrialConfig {
            user: UserModelParams::default(),
            ..TrialConfig::default()
        };
        let specs = matched_specs(&[Scenario::course_4m_90(Direction::Left)], 0..2);
        let a = run_batch(&specs, &cfg, Execution::Sequential).unwrap();
        let b = run_batch(&specs, &cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
    }
}
