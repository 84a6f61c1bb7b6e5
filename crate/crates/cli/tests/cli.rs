use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use walker_cli::profile::ProfileFile;
use walker_core::fuzzy::{calibrate_profile, infer_omega, AngleMeans, TorqueThresholds};
use walker_core::sim::{ControllerKind, TrialLog};

fn walker(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walker"))
        .args(args)
        .output()
        .expect("spawn walker")
}

fn repo(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csvs(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn calibrate_from_means_file() {
    let dir = tempfile::tempdir().unwrap();
    let means = dir.path().join("user3.means");
    fs::write(&means, "left = 27.97\nstraight = 18.69\nright = 16.01\n").unwrap();
    let out = dir.path().join("user3.profile");
    let o = walker(&["calibrate", "--means", s(&means), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("Middle 18.690"));
    let p = ProfileFile::load(&out).unwrap();
    assert_eq!(p.fuzzy.angle_var().centers(), vec![16.01, 18.69, 27.97]);
    assert_eq!(p.fuzzy.torque_var().centers(), vec![-4.0, 1.0, 6.0]);
    assert_eq!(p.user.angle_means.left, 27.97);
}

#[test]
fn calibrate_rejects_unordered_means() {
    let dir = tempfile::tempdir().unwrap();
    let means = dir.path().join("bad.means");
    fs::write(&means, "left = 18\nstraight = 19\nright = 16\n").unwrap();
    let out = dir.path().join("bad.profile");
    let o = walker(&["calibrate", "--means", s(&means), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("left (18) must be greater than straight (19)"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn calibrate_from_trial_logs() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs");
    for sc in ["course_4m_90", "course_4m_90_left"] {
        let o = walker(&[
            "simulate",
            "--scenario",
            &repo(&format!("scenarios/{sc}.scenario")),
            "--controller",
            "conventional",
            "--trials",
            "2",
            "--out",
            s(&runs),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let logs = csvs(&runs);
    let mut args = vec!["calibrate".to_string(), "--trials".into()];
    args.extend(logs.iter().map(|p| p.to_string_lossy().into_owned()));
    let out = dir.path().join("cal.profile");
    args.extend(["--out".into(), s(&out).into()]);
    let o = walker(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(o.status.success(), "{}", stderr(&o));
    let c = ProfileFile::load(&out).unwrap().fuzzy.angle_var().centers();
    assert!((c[0] - 20.34).abs() < 2.0 && (c[1] - 27.17).abs() < 1.0 && (c[2] - 39.06).abs() < 2.0, "{c:?}");
}

#[test]
fn simulate_writes_named_logs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs");
    let o = walker(&[
        "simulate",
        "--scenario",
        &repo("scenarios/course_4m_90.scenario"),
        "--profile",
        &repo("profiles/user5.profile"),
        "--controller",
        "both",
        "--seed",
        "10",
        "--trials",
        "5",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let files = csvs(&out);
    assert_eq!(files.len(), 10);
    let fuzzy2 = out.join("course_4m_90_fuzzy_10_2.csv");
    assert!(files.contains(&fuzzy2));
    let log = TrialLog::read_csv("course_4m_90", fs::File::open(&fuzzy2).unwrap()).unwrap();
    assert_eq!(log.controller, ControllerKind::Fuzzy);
    assert_eq!(log.seed, 12);
    assert_eq!(log.rows.last().unwrap().segment, 2);
}

#[test]
fn simulate_validates_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.profile");
    fs::write(&bad, "walker-profile v1\nlinear.mass = 0\n").unwrap();
    let out = dir.path().join("runs");
    let o = walker(&["simulate", "--profile", s(&bad), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!out.exists());

    let sc = dir.path().join("bad.scenario");
    fs::write(&sc, "walker-scenario v1\nturn angle=0 speed=0.5\n").unwrap();
    let o = walker(&["simulate", "--scenario", s(&sc), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!out.exists());

    let o = walker(&["simulate", "--trials", "0", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

const SHOULDER_90: &str = r#"{"name": "right_shoulder", "x": 640, "y": 360, "depth": 2.0, "confidence": 1.0}, {"name": "right_elbow", "x": 990, "y": 360, "depth": 2.0, "confidence": 1.0}, {"name": "right_hip", "x": 640, "y": 710, "depth": 2.0, "confidence": 1.0}"#;

fn keypoint_lines(n: usize) -> String {
    (0..n)
        .map(|i| format!("{{\"t\": {}, \"keypoints\": [{SHOULDER_90}]}}\n", i as f64 * 0.02))
        .collect()
}

#[test]
fn infer_matches_engine_at_ninety_degrees() {
    let dir = tempfile::tempdir().unwrap();
    let fuzzy = calibrate_profile(
        AngleMeans {
            right: 90.0,
            straight: 100.0,
            left: 110.0,
        },
        TorqueThresholds::default(),
    )
    .unwrap();
    let expected = infer_omega(&fuzzy, 90.0, 1.0);
    assert!(expected.abs() < 10.0, "{expected}");
    let profile = dir.path().join("low.profile");
    fs::write(&profile, ProfileFile::from_fuzzy(fuzzy).to_text()).unwrap();
    let kp = dir.path().join("kp.jsonl");
    fs::write(&kp, keypoint_lines(100)).unwrap();
    let tq = dir.path().join("tq.csv");
    fs::write(&tq, "t,fx_N,tauz_Nm\n0,5,1\n").unwrap();

    let o = walker(&["infer", "--profile", s(&profile), "--keypoints", s(&kp), "--torque", s(&tq)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 100);
    for l in &lines {
        let cols: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 3);
        assert!((cols[2] - expected).abs() < 1e-5, "{l} vs {expected}");
    }
}

#[test]
fn infer_handles_empty_malformed_and_unordered_streams() {
    let dir = tempfile::tempdir().unwrap();
    let tq = dir.path().join("tq.csv");
    fs::write(&tq, "t,fx_N,tauz_Nm\n0,5,1\n").unwrap();

    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let o = walker(&["infer", "--keypoints", s(&empty), "--torque", s(&tq)]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());

    let kp = dir.path().join("mixed.jsonl");
    let mut text = keypoint_lines(3);
    text.push_str("{\"t\": 0.08, \"keypoints\": [oops\n");
    text.push_str(&format!("{{\"t\": 0.10, \"keypoints\": [{SHOULDER_90}]}}\n"));
    fs::write(&kp, text).unwrap();
    let o = walker(&["infer", "--keypoints", s(&kp), "--torque", s(&tq)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 6);

    let unordered = dir.path().join("unordered.jsonl");
    let mut text = keypoint_lines(3);
    text.push_str(&format!("{{\"t\": 0.01, \"keypoints\": [{SHOULDER_90}]}}\n"));
    fs::write(&unordered, text).unwrap();
    let o = walker(&["infer", "--keypoints", s(&unordered), "--torque", s(&tq)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn analyze_reports_and_flags_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs");
    let o = walker(&["simulate", "--trials", "3", "--out", s(&runs)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = dir.path().join("report.csv");
    let o = walker(&["analyze", "--runs", s(&runs), "--report", s(&report)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("right"));
    for f in ["report.csv", "report.txt", "report_heading.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let heading = fs::read_to_string(dir.path().join("report_heading.csv")).unwrap();
    assert!(heading.starts_with("scenario,seed,controller,t,x,y,heading_deg,omega_dps"));

    fs::remove_file(runs.join("course_4m_90_fuzzy_0_1.csv")).unwrap();
    let report2 = dir.path().join("again.csv");
    let o = walker(&["analyze", "--runs", s(&runs), "--report", s(&report2)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("course_4m_90 seed 1"), "{}", stderr(&o));
    assert!(!report2.exists());
}

#[test]
fn help_and_unknown_flags() {
    for (cmd, flags) in [
        ("calibrate", &["--means", "--trials", "--base", "--out"][..]),
        (
            "simulate",
            &["--scenario", "--controller", "--profile", "--seed", "--trials", "--out", "--sequential"][..],
        ),
        ("infer", &["--profile", "--keypoints", "--torque"][..]),
        ("analyze", &["--runs", "--report"][..]),
    ] {
        let o = walker(&[cmd, "--help"]);
        assert!(o.status.success());
        let help = String::from_utf8_lossy(&o.stdout);
        for f in flags {
            assert!(help.contains(f), "{cmd} help lacks {f}");
        }
        let o = walker(&[cmd, "--bogus"]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
    }
}
