//! Closed-loop runs with the synthetic user.

use walker_core::analysis::{aggregate_segments, infer_segment_directions};
use walker_core::fuzzy::{user5_profile, USER5_ANGLES};
use walker_core::sim::{
    run_trial, ControllerKind, Direction, Scenario, TrialConfig, TrialLog, UserModelParams,
};

/// Settled: outside the trimmed ends and 4 s after the push has ramped in.
const SETTLED_FROM_S: f64 = 5.0;

fn quiet() -> TrialConfig {
    TrialConfig {
        user: UserModelParams::default().noiseless(),
        ..TrialConfig::default()
    }
}

fn lever(cfg: &TrialConfig) -> f64 {
    cfg.user.push_force * cfg.user.grip_offset
}

fn settled_wrist(log: &TrialLog) -> Vec<f64> {
    log.rows
        .iter()
        .filter(|r| !r.excluded && r.t >= SETTLED_FROM_S)
        .map(|r| r.tau_wrist_nm)
        .collect()
}

#[test]
fn fuzzy_straight_needs_little_wrist_torque() {
    let cfg = quiet();
    let log = run_trial(&Scenario::straight_5m(), ControllerKind::Fuzzy, &cfg, 0).unwrap();
    let bound = 0.3 * lever(&cfg);
    let tw = settled_wrist(&log);
    assert!(tw.len() > 100);
    let worst = tw.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(worst < bound, "max |tau_wrist| {worst:.4} vs bound {bound:.4}");
}

#[test]
fn conventional_straight_wrist_cancels_lever() {
    let cfg = quiet();
    let log = run_trial(&Scenario::straight_5m(), ControllerKind::Conventional, &cfg, 0).unwrap();
    let target = -lever(&cfg);
    for tw in settled_wrist(&log) {
        assert!(
            (tw - target).abs() <= 0.05 * target.abs(),
            "tau_wrist {tw:.4} vs {target:.4}"
        );
    }
}

#[test]
fn two_handed_grip_needs_no_wrist_torque() {
    let mut cfg = quiet();
    cfg.user.grip_offset = 0.0;
    let log = run_trial(&Scenario::straight_5m(), ControllerKind::Conventional, &cfg, 0).unwrap();
    let worst = settled_wrist(&log)
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(worst < 1e-6, "max |tau_wrist| {worst}");
}

#[test]
fn fuzzy_straight_keeps_heading() {
    let log = run_trial(&Scenario::straight_5m(), ControllerKind::Fuzzy, &quiet(), 0).unwrap();
    assert!(log.complete);
    let h = log.rows.last().unwrap().heading_deg;
    assert!(h.abs() <= 3.0, "final heading {h}");
}

#[test]
fn fuzzy_course_stays_on_path() {
    for d in [Direction::Left, Direction::Right] {
        let log = run_trial(&Scenario::course_4m_90(d), ControllerKind::Fuzzy, &quiet(), 0).unwrap();
        assert!(log.complete, "{d}");
        assert!(log.max_cross_track < 0.3, "{d}: {}", log.max_cross_track);
        assert_eq!(log.rows.last().unwrap().segment, 2);
        assert_eq!(log.saturated_ticks, 0, "{d}");
    }
}

#[test]
fn left_turn_angles_match_calibration() {
    let sc = Scenario::course_4m_90(Direction::Left);
    let log = run_trial(&sc, ControllerKind::Fuzzy, &TrialConfig::default(), 3).unwrap();
    let turn: Vec<f64> = log
        .rows
        .iter()
        .filter(|r| r.segment == 1)
        .map(|r| r.abduction_deg)
        .collect();
    let mean = turn.iter().sum::<f64>() / turn.len() as f64;
    assert!(
        (mean - USER5_ANGLES.left).abs() <= 2.0,
        "turn mean {mean:.2} vs {}",
        USER5_ANGLES.left
    );
}

#[test]
fn segment_means_follow_calibration_order() {
    for d in [Direction::Left, Direction::Right] {
        let log =
            run_trial(&Scenario::course_4m_90(d), ControllerKind::Fuzzy, &quiet(), 0).unwrap();
        let dirs = infer_segment_directions(&log);
        assert_eq!(dirs, vec![Direction::Straight, d, Direction::Straight]);
        let segs = aggregate_segments(&log, &dirs);
        let straight = segs[0].angle.mean;
        let turn = segs[1].angle.mean;
        match d {
            Direction::Left => assert!(turn > straight, "{turn} {straight}"),
            _ => assert!(turn < straight, "{turn} {straight}"),
        }
    }
}

#[test]
fn same_seed_same_log() {
    let sc = Scenario::course_4m_90(Direction::Right);
    let cfg = TrialConfig::default();
    for kind in ControllerKind::BOTH {
        let a = run_trial(&sc, kind, &cfg, 42).unwrap();
        let b = run_trial(&sc, kind, &cfg, 42).unwrap();
        assert_eq!(a.to_csv_string(), b.to_csv_string());
        let c = run_trial(&sc, kind, &cfg, 43).unwrap();
        assert_ne!(a.to_csv_string(), c.to_csv_string());
    }
}

#[test]
fn mirrored_profile_turns_the_other_way() {
    let p = user5_profile();
    let m = p.clone().with_mirror(true);
    for (a, t) in [(20.34, -4.0), (27.17, 1.0), (39.06, 6.0)] {
        assert_eq!(m.infer(a, t), -p.infer(a, -t));
    }
}
