//! Trial statistics: segment summaries, correlation, paired t-tests and the
//! controller comparison report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use statrs::function::beta::beta_reg;
use thiserror::Error;

use crate::signals::{causal_mean, SMOOTHING_WINDOW};
use crate::sim::plant::heading_diff;
use crate::sim::{ControllerKind, Direction, TrialLog};

/// Heading-rate threshold for the turn detector, deg/s.
pub const TURN_RATE_THRESHOLD: f64 = 5.0;
/// Minimum sustained time above the threshold, s.
pub const TURN_MIN_DURATION: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} samples, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("undefined correlation: zero variance")]
    ZeroVariance,
    #[error("degenerate test: zero-variance differences")]
    Degenerate,
    #[error("non-finite sample")]
    NonFinite,
    #[error("unmatched runs: {}", .0.join("; "))]
    Unmatched(Vec<String>),
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn check_pair(x: &[f64], y: &[f64], need: usize) -> Result<(), AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < need {
        return Err(AnalysisError::TooShort {
            need,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    Ok(())
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    check_pair(x, y, 3)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalysisError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub df: f64,
    pub mean_diff: f64,
}

/// Two-sided tail probability of Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    beta_reg(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

/// Paired t-test on `a - b`.
pub fn paired_t(a: &[f64], b: &[f64]) -> Result<TTest, AnalysisError> {
    check_pair(a, b, 2)?;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let md = mean(&d);
    let sd = sample_std(&d);
    if sd == 0.0 {
        return Err(AnalysisError::Degenerate);
    }
    let t = md / (sd / n.sqrt());
    let df = n - 1.0;
    Ok(TTest {
        t,
        p: student_t_two_sided(t, df),
        df,
        mean_diff: md,
    })
}

/// Sign changes in `xs`, skipping exact zeros.
pub fn zero_crossings(xs: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for &x in xs {
        if x == 0.0 || !x.is_finite() {
            continue;
        }
        if last != 0.0 && (x > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = x;
    }
    count
}

/// Window-60 causal moving average of a log column.
pub fn smoothed(log: &TrialLog, f: impl Fn(&crate::sim::TickRecord) -> f64) -> Vec<f64> {
    causal_mean(&log.column(f), SMOOTHING_WINDOW)
}

fn kept<T: Copy>(log: &TrialLog, xs: &[T]) -> Vec<T> {
    log.rows
        .iter()
        .zip(xs)
        .filter(|(r, _)| !r.excluded)
        .map(|(_, &x)| x)
        .collect()
}

/// Zero crossings of the smoothed heading rate over non-excluded ticks.
pub fn heading_rate_zero_crossings(log: &TrialLog) -> usize {
    let w = smoothed(log, |r| r.omega_dps);
    zero_crossings(&kept(log, &w))
}

/// Pearson r between smoothed abduction angle and smoothed handle torque
/// over non-excluded ticks.
pub fn angle_torque_correlation(log: &TrialLog) -> Result<f64, AnalysisError> {
    let a = smoothed(log, |r| r.abduction_deg);
    let t = smoothed(log, |r| r.tauz_nm);
    pearson(&kept(log, &a), &kept(log, &t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentStats {
    pub direction: Direction,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl SegmentStats {
    pub fn from_samples(direction: Direction, xs: &[f64]) -> Option<Self> {
        (xs.len() >= 2).then(|| Self {
            direction,
            mean: mean(xs),
            std: sample_std(xs),
            n: xs.len(),
        })
    }
}

/// Per-segment summary of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSummary {
    pub segment: usize,
    pub angle: SegmentStats,
    pub wrist_torque: SegmentStats,
}

/// Direction of each logged segment from its net heading change: more than
/// 45 degrees either way is a turn.
pub fn infer_segment_directions(log: &TrialLog) -> Vec<Direction> {
    let n_seg = log.rows.iter().map(|r| r.segment + 1).max().unwrap_or(0);
    let mut net = vec![0.0; n_seg];
    for w in log.rows.windows(2) {
        if w[0].segment == w[1].segment {
            net[w[0].segment] += heading_diff(w[1].heading_deg, w[0].heading_deg);
        }
    }
    net.iter()
        .map(|&h| {
            if h > 45.0 {
                Direction::Left
            } else if h < -45.0 {
                Direction::Right
            } else {
                Direction::Straight
            }
        })
        .collect()
}

/// Per-tick direction labels from heading rate alone: runs where the
/// heading rate exceeds [`TURN_RATE_THRESHOLD`] for at least
/// [`TURN_MIN_DURATION`] are turns.
pub fn detect_turns(headings: &[f64], rate_hz: f64) -> Vec<Direction> {
    let n = headings.len();
    let mut labels = vec![Direction::Straight; n];
    if n < 2 {
        return labels;
    }
    let rates: Vec<f64> = (0..n)
        .map(|i| {
            let j = (i + 1).min(n - 1);
            let k = j.saturating_sub(1);
            heading_diff(headings[j], headings[k]) * rate_hz
        })
        .collect();
    let min_len = (TURN_MIN_DURATION * rate_hz).round() as usize;
    let mut i = 0;
    while i < n {
        let sign = if rates[i] > TURN_RATE_THRESHOLD {
            1.0
        } else if rates[i] < -TURN_RATE_THRESHOLD {
            -1.0
        } else {
            i += 1;
            continue;
        };
        let start = i;
        while i < n && rates[i] * sign > TURN_RATE_THRESHOLD {
            i += 1;
        }
        if i - start >= min_len {
            let d = if sign > 0.0 {
                Direction::Left
            } else {
                Direction::Right
            };
            labels[start..i].fill(d);
        }
    }
    labels
}

/// Segment ids from [`detect_turns`]: a new segment starts whenever the
/// label changes.
pub fn segment_by_heading_rate(headings: &[f64], rate_hz: f64) -> Vec<usize> {
    let labels = detect_turns(headings, rate_hz);
    let mut seg = 0;
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            if i > 0 && labels[i - 1] != *l {
                seg += 1;
            }
            seg
        })
        .collect()
}

/// Mean and spread of smoothed angle and smoothed wrist torque on each
/// segment, over non-excluded ticks. `directions[k]` labels segment `k`.
pub fn aggregate_segments(log: &TrialLog, directions: &[Direction]) -> Vec<SegmentSummary> {
    let angle = smoothed(log, |r| r.abduction_deg);
    let wrist = smoothed(log, |r| r.tau_wrist_nm);
    let mut by_seg: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (i, r) in log.rows.iter().enumerate() {
        if !r.excluded {
            let e = by_seg.entry(r.segment).or_default();
            e.0.push(angle[i]);
            e.1.push(wrist[i]);
        }
    }
    let mut out = Vec::new();
    for (segment, (a, w)) in by_seg {
        let direction = directions
            .get(segment)
            .copied()
            .unwrap_or(Direction::Straight);
        match (
            SegmentStats::from_samples(direction, &a),
            SegmentStats::from_samples(direction, &w),
        ) {
            (Some(angle), Some(wrist_torque)) => out.push(SegmentSummary {
                segment,
                angle,
                wrist_torque,
            }),
            _ => log::warn!(
                "{} seed {}: segment {segment} has fewer than 2 ticks, skipped",
                log.scenario,
                log.seed
            ),
        }
    }
    out
}

/// Percent reduction of `b` relative to `a`.
pub fn percent_reduction(a: f64, b: f64) -> f64 {
    100.0 * (a.abs() - b.abs()) / a.abs()
}

/// Wrist-torque comparison for one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionComparison {
    pub direction: Direction,
    /// Signed wrist torque over pooled ticks.
    pub conventional: SegmentStats,
    pub fuzzy: SegmentStats,
    pub conventional_mean_abs: f64,
    pub fuzzy_mean_abs: f64,
    /// Reduction of mean |wrist torque|, percent.
    pub reduction_pct: f64,
    /// Reduction of |mean wrist torque|, percent.
    pub signed_reduction_pct: f64,
    /// Paired over trials on per-trial mean |wrist torque|.
    pub paired: Option<TTest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialCorrelation {
    pub scenario: String,
    pub seed: u64,
    pub controller: ControllerKind,
    pub r: Option<f64>,
    pub zero_crossings: usize,
}

/// Straight-segment versus turn-segment angle means, paired over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSeparation {
    pub scenario: String,
    pub controller: ControllerKind,
    pub turn: Direction,
    pub straight_mean: f64,
    pub turn_mean: f64,
    pub test: Option<TTest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub directions: Vec<DirectionComparison>,
    pub trials: Vec<TrialCorrelation>,
    pub separations: Vec<AngleSeparation>,
}

#[derive(Default)]
struct Pool {
    ticks: Vec<f64>,
    per_trial: BTreeMap<(String, u64), f64>,
}

/// Compare matched conventional and fuzzy runs.
///
/// Runs are matched on (scenario, seed). Wrist torque is pooled per
/// direction over the non-excluded ticks of segments with that direction.
pub fn compare_controllers(runs: &[TrialLog]) -> Result<ComparisonReport, AnalysisError> {
    let mut keyed: BTreeMap<(String, u64), BTreeMap<ControllerKind, &TrialLog>> = BTreeMap::new();
    for r in runs {
        keyed
            .entry((r.scenario.clone(), r.seed))
            .or_default()
            .insert(r.controller, r);
    }
    let missing: Vec<String> = keyed
        .iter()
        .flat_map(|((sc, seed), m)| {
            ControllerKind::BOTH
                .iter()
                .filter(|k| !m.contains_key(k))
                .map(move |k| format!("{sc} seed {seed} {k}"))
        })
        .collect();
    if !missing.is_empty() {
        return Err(AnalysisError::Unmatched(missing));
    }

    let mut pools: BTreeMap<(Direction, ControllerKind), Pool> = BTreeMap::new();
    let mut trials = Vec::new();
    // (scenario, controller, turn direction) -> per-seed (straight, turn)
    let mut sep: BTreeMap<(String, ControllerKind, Direction), Vec<(f64, f64)>> = BTreeMap::new();

    for ((scenario, seed), by_kind) in &keyed {
        for (&kind, log) in by_kind {
            let dirs = infer_segment_directions(log);
            let mut abs_by_dir: BTreeMap<Direction, Vec<f64>> = BTreeMap::new();
            for r in log.rows.iter().filter(|r| !r.excluded) {
                let d = dirs[r.segment];
                abs_by_dir.entry(d).or_default().push(r.tau_wrist_nm.abs());
                pools
                    .entry((d, kind))
                    .or_default()
                    .ticks
                    .push(r.tau_wrist_nm);
            }
            for (d, xs) in abs_by_dir {
                pools
                    .entry((d, kind))
                    .or_default()
                    .per_trial
                    .insert((scenario.clone(), *seed), mean(&xs));
            }
            trials.push(TrialCorrelation {
                scenario: scenario.clone(),
                seed: *seed,
                controller: kind,
                r: angle_torque_correlation(log).ok(),
                zero_crossings: heading_rate_zero_crossings(log),
            });

            let summary = aggregate_segments(log, &dirs);
            let straight: Vec<&SegmentSummary> = summary
                .iter()
                .filter(|s| s.angle.direction == Direction::Straight)
                .collect();
            if straight.is_empty() {
                continue;
            }
            let weighted = |ss: &[&SegmentSummary]| {
                let n: usize = ss.iter().map(|s| s.angle.n).sum();
                ss.iter().map(|s| s.angle.mean * s.angle.n as f64).sum::<f64>() / n as f64
            };
            let straight_mean = weighted(&straight);
            for turn in [Direction::Left, Direction::Right] {
                let ts: Vec<&SegmentSummary> = summary
                    .iter()
                    .filter(|s| s.angle.direction == turn)
                    .collect();
                if !ts.is_empty() {
                    sep.entry((scenario.clone(), kind, turn))
                        .or_default()
                        .push((straight_mean, weighted(&ts)));
                }
            }
        }
    }

    let mut directions = Vec::new();
    for d in Direction::ALL {
        let (Some(cc), Some(pc)) = (
            pools.get(&(d, ControllerKind::Conventional)),
            pools.get(&(d, ControllerKind::Fuzzy)),
        ) else {
            continue;
        };
        let (Some(cs), Some(ps)) = (
            SegmentStats::from_samples(d, &cc.ticks),
            SegmentStats::from_samples(d, &pc.ticks),
        ) else {
            continue;
        };
        let cma = mean(&cc.ticks.iter().map(|x| x.abs()).collect::<Vec<_>>());
        let pma = mean(&pc.ticks.iter().map(|x| x.abs()).collect::<Vec<_>>());
        let (a, b): (Vec<f64>, Vec<f64>) = cc
            .per_trial
            .iter()
            .filter_map(|(k, v)| pc.per_trial.get(k).map(|w| (*v, *w)))
            .unzip();
        directions.push(DirectionComparison {
            direction: d,
            conventional: cs,
            fuzzy: ps,
            conventional_mean_abs: cma,
            fuzzy_mean_abs: pma,
            reduction_pct: percent_reduction(cma, pma),
            signed_reduction_pct: percent_reduction(cs.mean, ps.mean),
            paired: paired_t(&a, &b).ok(),
        });
    }

    let separations = sep
        .into_iter()
        .map(|((scenario, controller, turn), pairs)| {
            let (s, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            AngleSeparation {
                scenario,
                controller,
                turn,
                straight_mean: mean(&s),
                turn_mean: mean(&t),
                test: paired_t(&s, &t).ok(),
            }
        })
        .collect();

    Ok(ComparisonReport {
        directions,
        trials,
        separations,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl ComparisonReport {
    pub fn direction(&self, d: Direction) -> Option<&DirectionComparison> {
        self.directions.iter().find(|c| c.direction == d)
    }

    /// Summary rows for each direction, then per-trial rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "kind,direction,scenario,seed,controller,mean,std,n,mean_abs,reduction_pct,signed_reduction_pct,t,p,r,zero_crossings\n",
        );
        for c in &self.directions {
            for (kind, st, ma) in [
                (ControllerKind::Conventional, &c.conventional, c.conventional_mean_abs),
                (ControllerKind::Fuzzy, &c.fuzzy, c.fuzzy_mean_abs),
            ] {
                let _ = writeln!(
                    s,
                    "wrist,{},,,{},{:.6},{:.6},{},{:.6},{:.6},{:.6},{},{},,",
                    c.direction,
                    kind,
                    st.mean,
                    st.std,
                    st.n,
                    ma,
                    c.reduction_pct,
                    c.signed_reduction_pct,
                    opt(c.paired.map(|t| t.t)),
                    opt(c.paired.map(|t| t.p)),
                );
            }
        }
        for sp in &self.separations {
            let _ = writeln!(
                s,
                "angle_separation,{},{},,{},{:.6},,,,,,{},{},,",
                sp.turn,
                sp.scenario,
                sp.controller,
                sp.turn_mean - sp.straight_mean,
                opt(sp.test.map(|t| t.t)),
                opt(sp.test.map(|t| t.p)),
            );
        }
        for t in &self.trials {
            let _ = writeln!(
                s,
                "trial,,{},{},{},,,,,,,,,{},{}",
                t.scenario,
                t.seed,
                t.controller,
                opt(t.r),
                t.zero_crossings
            );
        }
        s
    }

    /// Wrist torque by direction in a fixed-width layout.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Right-wrist torque (N·m, mean ± std over non-excluded ticks)");
        let _ = writeln!(s, "reduction is of mean |torque|; `of |mean|` uses the signed mean");
        let _ = writeln!(
            s,
            "{:<10} {:>18} {:>18} {:>11} {:>13} {:>10}",
            "direction", "conventional", "fuzzy", "reduction", "of |mean|", "p"
        );
        for c in &self.directions {
            let _ = writeln!(
                s,
                "{:<10} {:>18} {:>18} {:>10.2}% {:>12.2}% {:>10}",
                c.direction.as_str(),
                format!("{:.2} ± {:.2}", c.conventional.mean, c.conventional.std),
                format!("{:.2} ± {:.2}", c.fuzzy.mean, c.fuzzy.std),
                c.reduction_pct,
                c.signed_reduction_pct,
                c.paired
                    .map(|t| format!("{:.4}", t.p))
                    .unwrap_or_else(|| "-".into()),
            );
        }
        if !self.separations.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(s, "Shoulder angle, straight vs turn segments (deg)");
            for sp in &self.separations {
                let _ = writeln!(
                    s,
                    "{:<20} {:<12} {:<6} straight {:>6.2}  turn {:>6.2}  p {}",
                    sp.scenario,
                    sp.controller.as_str(),
                    sp.turn.as_str(),
                    sp.straight_mean,
                    sp.turn_mean,
                    sp.test
                        .map(|t| format!("{:.4}", t.p))
                        .unwrap_or_else(|| "-".into()),
                );
            }
        }
        let rs: Vec<f64> = self
            .trials
            .iter()
            .filter(|t| t.controller == ControllerKind::Conventional)
            .filter_map(|t| t.r)
            .collect();
        if !rs.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(
                s,
                "Angle/torque correlation, conventional trials: mean r {:.3} (min {:.3}, n {})",
                mean(&rs),
                rs.iter().cloned().fold(f64::INFINITY, f64::min),
                rs.len()
            );
        }
        s
    }
}

/// Heading traces for plotting, one row per logged tick.
pub fn heading_plot_csv(runs: &[TrialLog]) -> String {
    let mut sorted: Vec<&TrialLog> = runs.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.scenario, a.seed, a.controller).cmp(&(&b.scenario, b.seed, b.controller))
    });
    let mut s = String::from("scenario,seed,controller,t,x,y,heading_deg,omega_dps\n");
    for log in sorted {
        for r in &log.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                log.scenario, log.seed, log.controller, r.t, r.x, r.y, r.heading_deg, r.omega_dps
            );
        }
    }
    s
}

/// Scenario names with a complete conventional/fuzzy pair for `seed`.
pub fn matched_scenarios(runs: &[TrialLog], seed: u64) -> BTreeSet<String> {
    let mut by: BTreeMap<&str, BTreeSet<ControllerKind>> = BTreeMap::new();
    for r in runs.iter().filter(|r| r.seed == seed) {
        by.entry(&r.scenario).or_default().insert(r.controller);
    }
    by.into_iter()
        .filter(|(_, k)| k.len() == 2)
        .map(|(s, _)| s.to_string())
        .collect()
}
