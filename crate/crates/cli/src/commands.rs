use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use walker_core::analysis::{
    aggregate_segments, compare_controllers, heading_plot_csv, infer_segment_directions, mean,
    AnalysisError,
};
use walker_core::fuzzy::{calibrate_profile, AngleMeans, TorqueThresholds};
use walker_core::signals::SampleRate;
use walker_core::sim::batch::{run_batch, Execution, TrialSpec};
use walker_core::sim::{ControllerKind, Direction, Scenario, TrialError, TrialLog};

use crate::args::{AnalyzeArgs, CalibrateArgs, InferArgs, SimulateArgs};
use crate::error::{validation, CliError};
use crate::profile::ProfileFile;
use crate::replay::{read_keypoints, read_torque, replay, ReplayError};

/// Write through a temporary sibling so a failed write leaves nothing behind.
fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let name = path
        .file_name()
        .with_context(|| format!("{} has no file name", path.display()))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

fn require_parent_dir(path: &Path) -> Result<(), CliError> {
    match path.parent().filter(|p| !p.as_os_str().is_empty()) {
        Some(dir) if !dir.is_dir() => Err(validation(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

pub fn load_profile(path: Option<&Path>) -> Result<ProfileFile, CliError> {
    match path {
        None => Ok(ProfileFile::default()),
        Some(p) => {
            ProfileFile::load(p).map_err(|e| validation(format!("{}: {e}", p.display())))
        }
    }
}

/// Splits `{scenario}_{controller}_{seed}_{k}` into its parts.
pub fn parse_log_name(stem: &str) -> Option<(String, ControllerKind, u64, u64)> {
    let mut parts = stem.rsplitn(4, '_');
    let k = parts.next()?.parse().ok()?;
    let seed = parts.next()?.parse().ok()?;
    let controller = parts.next()?.parse().ok()?;
    let scenario = parts.next().filter(|s| !s.is_empty())?;
    Some((scenario.to_string(), controller, seed, k))
}

pub fn log_file_name(scenario: &str, kind: ControllerKind, seed: u64, k: u64) -> String {
    format!("{scenario}_{kind}_{seed}_{k}.csv")
}

/// Reads a trial log; the scenario name comes from the file name.
pub fn load_log(path: &Path) -> Result<TrialLog, CliError> {
    let stem = path.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    let (scenario, controller, _, _) = parse_log_name(&stem).ok_or_else(|| {
        validation(format!(
            "{}: name does not follow {{scenario}}_{{controller}}_{{seed}}_{{k}}.csv",
            path.display()
        ))
    })?;
    let file = File::open(path).map_err(|e| validation(format!("{}: {e}", path.display())))?;
    let log = TrialLog::read_csv(scenario, BufReader::new(file))
        .map_err(|e| validation(format!("{}: {e}", path.display())))?;
    if log.controller != controller {
        return Err(validation(format!(
            "{}: file name says {controller} but rows say {}",
            path.display(),
            log.controller
        )));
    }
    Ok(log)
}

fn parse_means_file(text: &str) -> Result<(AngleMeans, TorqueThresholds), CliError> {
    let mut values = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let n = i + 1;
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| validation(format!("means line {n}: expected `key = value`")))?;
        let k = k.trim();
        if !matches!(
            k,
            "left" | "straight" | "right" | "torque.left" | "torque.straight" | "torque.right"
        ) {
            return Err(validation(format!("means line {n}: unknown key `{k}`")));
        }
        let v: f64 = v
            .trim()
            .parse()
            .ok()
            .filter(|x: &f64| x.is_finite())
            .ok_or_else(|| validation(format!("means line {n}: `{k}` needs a finite number")))?;
        if values.insert(k.to_string(), v).is_some() {
            return Err(validation(format!("means line {n}: duplicate key `{k}`")));
        }
    }
    let angle = |k: &str| {
        values
            .get(k)
            .copied()
            .ok_or_else(|| validation(format!("means file is missing `{k}`")))
    };
    let means = AngleMeans {
        left: angle("left")?,
        straight: angle("straight")?,
        right: angle("right")?,
    };
    let d = TorqueThresholds::default();
    let torque = TorqueThresholds {
        left: values.get("torque.left").copied().unwrap_or(d.left),
        straight: values.get("torque.straight").copied().unwrap_or(d.straight),
        right: values.get("torque.right").copied().unwrap_or(d.right),
    };
    Ok((means, torque))
}

/// Average of per-trial segment angle means for each direction.
pub fn angle_means_from_logs(logs: &[TrialLog]) -> Result<AngleMeans, CliError> {
    let mut by_dir: BTreeMap<Direction, Vec<f64>> = BTreeMap::new();
    for log in logs {
        let dirs = infer_segment_directions(log);
        for s in aggregate_segments(log, &dirs) {
            by_dir.entry(s.angle.direction).or_default().push(s.angle.mean);
        }
    }
    let get = |d: Direction| {
        by_dir
            .get(&d)
            .map(|v| mean(v))
            .ok_or_else(|| validation(format!("trial logs contain no {d} segment")))
    };
    Ok(AngleMeans {
        left: get(Direction::Left)?,
        straight: get(Direction::Straight)?,
        right: get(Direction::Right)?,
    })
}

pub fn calibrate(a: &CalibrateArgs, out: &mut dyn Write) -> Result<ProfileFile, CliError> {
    let base = load_profile(a.base.as_deref())?;
    require_parent_dir(&a.out)?;
    let (means, torque) = match &a.means {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| validation(format!("{}: {e}", path.display())))?;
            parse_means_file(&text)?
        }
        None => {
            let logs = a
                .trials
                .iter()
                .map(|p| load_log(p))
                .collect::<Result<Vec<_>, _>>()?;
            (angle_means_from_logs(&logs)?, TorqueThresholds::default())
        }
    };
    let fuzzy = calibrate_profile(means, torque)
        .map_err(validation)?
        .with_mirror(base.fuzzy.mirror());
    let profile = ProfileFile {
        fuzzy,
        user: walker_core::sim::UserModelParams {
            angle_means: means,
            ..base.user
        },
        ..base
    };
    profile.validate().map_err(validation)?;
    write_atomic(&a.out, profile.to_text().as_bytes())?;

    for (name, var) in [
        ("angle", profile.fuzzy.angle_var()),
        ("torque", profile.fuzzy.torque_var()),
    ] {
        write!(out, "{name:<7}").context("stdout")?;
        for (label, mf) in var.terms() {
            write!(out, "  {label} {:.3} (sigma {:.3})", mf.center, mf.sigma).context("stdout")?;
        }
        writeln!(out).context("stdout")?;
    }
    writeln!(out, "wrote {}", a.out.display()).context("stdout")?;
    Ok(profile)
}

/// Paths written, in spec order.
pub fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<Vec<PathBuf>, CliError> {
    let profile = load_profile(a.profile.as_deref())?;
    let scenario = match &a.scenario {
        Some(p) => Scenario::load(p).map_err(|e| validation(format!("{}: {e}", p.display())))?,
        None => Scenario::course_4m_90(Direction::Right),
    };
    if a.out.exists() && !a.out.is_dir() {
        return Err(validation(format!("{} is not a directory", a.out.display())));
    }
    let cfg = profile.trial_config();
    let mut names = Vec::new();
    let mut specs = Vec::new();
    for k in 0..u64::from(a.trials) {
        let seed = a.seed.checked_add(k).ok_or_else(|| validation("seed overflows"))?;
        for controller in a.controller.kinds() {
            names.push(log_file_name(&scenario.name, controller, a.seed, k));
            specs.push(TrialSpec {
                scenario: scenario.clone(),
                controller,
                seed,
            });
        }
    }
    let exec = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let logs = run_batch(&specs, &cfg, exec).map_err(|e| match e {
        TrialError::Admittance(_) | TrialError::User(_) => validation(e),
        other => CliError::Runtime(other.into()),
    })?;

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut written = Vec::new();
    for (name, log) in names.iter().zip(&logs) {
        let path = a.out.join(name);
        write_atomic(&path, log.to_csv_string().as_bytes())?;
        let status = if log.complete { "complete" } else { "TIMEOUT" };
        writeln!(out, "{}  {} ticks  {status}", path.display(), log.len()).context("stdout")?;
        written.push(path);
    }
    let timeouts = logs.iter().filter(|l| !l.complete).count();
    if timeouts > 0 {
        log::warn!("{timeouts} trial(s) hit the timeout");
    }
    Ok(written)
}

fn replay_error(e: ReplayError) -> CliError {
    match e {
        ReplayError::Io(..) => CliError::Runtime(e.into()),
        other => validation(other),
    }
}

pub fn infer(a: &InferArgs, out: &mut dyn Write) -> Result<usize, CliError> {
    let profile = load_profile(a.profile.as_deref())?;
    let open = |p: &Path| File::open(p).map_err(|e| validation(format!("{}: {e}", p.display())));
    let frames = if a.keypoints.as_os_str() == "-" {
        read_keypoints(io::stdin().lock())
    } else {
        read_keypoints(BufReader::new(open(&a.keypoints)?))
    }
    .map_err(replay_error)?;
    let torque = read_torque(BufReader::new(open(&a.torque)?)).map_err(replay_error)?;
    let ticks = replay(&profile, &frames, &torque, SampleRate::default()).map_err(replay_error)?;
    let mut w = io::BufWriter::new(out);
    for k in &ticks {
        writeln!(w, "{:.4},{:.6},{:.6}", k.t, k.v, k.omega).context("stdout")?;
    }
    w.flush().context("stdout")?;
    Ok(ticks.len())
}

/// Report, table and heading-plot paths for a report CSV path.
pub fn report_paths(report: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let stem = report
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    (
        report.to_path_buf(),
        report.with_extension("txt"),
        report.with_file_name(format!("{stem}_heading.csv")),
    )
}

pub fn analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !a.runs.is_dir() {
        return Err(validation(format!("{} is not a directory", a.runs.display())));
    }
    require_parent_dir(&a.report)?;
    let mut paths: Vec<PathBuf> = fs::read_dir(&a.runs)
        .with_context(|| format!("listing {}", a.runs.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    let mut logs = Vec::new();
    for p in &paths {
        let stem = p.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
        if parse_log_name(&stem).is_none() {
            log::warn!("skipping {}: not a trial log name", p.display());
            continue;
        }
        logs.push(load_log(p)?);
    }
    if logs.is_empty() {
        return Err(validation(format!("no trial logs in {}", a.runs.display())));
    }
    let report = compare_controllers(&logs).map_err(|e| match e {
        AnalysisError::Unmatched(gaps) => {
            CliError::Mismatch(format!("unmatched runs: {}", gaps.join("; ")))
        }
        other => validation(other),
    })?;
    let (csv_path, txt_path, plot_path) = report_paths(&a.report);
    let table = report.to_table();
    write_atomic(&csv_path, report.to_csv().as_bytes())?;
    write_atomic(&txt_path, table.as_bytes())?;
    write_atomic(&plot_path, heading_plot_csv(&logs).as_bytes())?;
    write!(out, "{table}").context("stdout")?;
    writeln!(
        out,
        "\nwrote {}, {}, {}",
        csv_path.display(),
        txt_path.display(),
        plot_path.display()
    )
    .context("stdout")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_names_round_trip() {
        let n = log_file_name("course_4m_90", ControllerKind::Fuzzy, 7, 2);
        assert_eq!(n, "course_4m_90_fuzzy_7_2.csv");
        let stem = n.trim_end_matches(".csv");
        assert_eq!(
            parse_log_name(stem),
            Some(("course_4m_90".into(), ControllerKind::Fuzzy, 7, 2))
        );
        assert_eq!(parse_log_name("report"), None);
        assert_eq!(parse_log_name("_fuzzy_1_2"), None);
    }

    #[test]
    fn means_file_defaults_and_errors() {
        let (m, t) = parse_means_file("# user 3\nleft = 27.97\nstraight=18.69\nright = 16.01\n").unwrap();
        assert_eq!((m.right, m.straight, m.left), (16.01, 18.69, 27.97));
        assert_eq!(t, TorqueThresholds::default());
        let (_, t) = parse_means_file("left=3\nstraight=2\nright=1\ntorque.left=7\n").unwrap();
        assert_eq!(t.left, 7.0);
        for bad in [
            "left=3\nstraight=2\n",
            "left=3\nstraight=2\nright=1\nup=4\n",
            "left=3\nleft=3\nstraight=2\nright=1\n",
            "left=x\nstraight=2\nright=1\n",
        ] {
            assert_eq!(parse_means_file(bad).unwrap_err().exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn report_paths_sit_together() {
        let (c, t, h) = report_paths(Path::new("out/report.csv"));
        assert_eq!(c, Path::new("out/report.csv"));
        assert_eq!(t, Path::new("out/report.txt"));
        assert_eq!(h, Path::new("out/report_heading.csv"));
    }
}
