//! Two-input Mamdani steering controller.
//!
//! Inputs are the shoulder abduction angle (Low / Middle / High) and the
//! handle torque (Negative / Neutral / Positive). The output is a yaw rate
//! in deg/s, positive to the left, defuzzified by centroid.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::admittance::{
    AdmittanceError, HandleWrench, LinearAdmittanceParams, LinearChannel, VelocityCommand,
    OMEGA_LIMIT_DPS,
};
use crate::pose::{DropoutHold, ShoulderState};
use crate::signals::{MovingAverage, SMOOTHING_WINDOW};

/// Defuzzification grid step, deg/s.
pub const GRID_STEP: f64 = 0.1;
pub const OUTPUT_CENTERS: [f64; 5] = [-90.0, -45.0, 0.0, 45.0, 90.0];
pub const OUTPUT_SIGMA: f64 = 20.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuzzyError {
    #[error("invalid membership function: sigma must be positive and finite")]
    InvalidSigma,
    #[error("term centers of {0} must be strictly increasing")]
    UnorderedCenters(String),
    #[error("duplicate term label {0}")]
    DuplicateLabel(String),
    #[error("expected {expected} terms in {name}, found {found}")]
    TermCount {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("output term centers must lie within [-90, 90]")]
    OutputRange,
    #[error("calibration error: {0}")]
    Calibration(String),
    #[error("rule base missing ({0}, {1})")]
    MissingRule(AngleTerm, TorqueTerm),
    #[error("unknown term {0}")]
    UnknownTerm(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMF {
    pub center: f64,
    pub sigma: f64,
}

impl GaussianMF {
    pub fn new(center: f64, sigma: f64) -> Result<Self, FuzzyError> {
        if !(center.is_finite() && sigma.is_finite() && sigma > 0.0) {
            return Err(FuzzyError::InvalidSigma);
        }
        Ok(Self { center, sigma })
    }

    #[inline]
    pub fn membership(&self, x: f64) -> f64 {
        let d = (x - self.center) / self.sigma;
        (-0.5 * d * d).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticVariable {
    pub name: String,
    terms: Vec<(String, GaussianMF)>,
}

impl LinguisticVariable {
    pub fn new(
        name: impl Into<String>,
        terms: Vec<(String, GaussianMF)>,
    ) -> Result<Self, FuzzyError> {
        let name = name.into();
        for (i, (label, _)) in terms.iter().enumerate() {
            if terms[..i].iter().any(|(l, _)| l == label) {
                return Err(FuzzyError::DuplicateLabel(label.clone()));
            }
        }
        if terms.windows(2).any(|w| w[0].1.center >= w[1].1.center) {
            return Err(FuzzyError::UnorderedCenters(name));
        }
        Ok(Self { name, terms })
    }

    /// Terms whose sigma is half the mean distance to the adjacent centers.
    pub fn from_centers(
        name: impl Into<String>,
        labels: &[&str],
        centers: &[f64],
    ) -> Result<Self, FuzzyError> {
        let name = name.into();
        if labels.len() != centers.len() {
            return Err(FuzzyError::TermCount {
                name,
                expected: labels.len(),
                found: centers.len(),
            });
        }
        if centers.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(FuzzyError::UnorderedCenters(name));
        }
        let sigmas = neighbor_sigmas(centers);
        let terms = labels
            .iter()
            .zip(centers.iter().zip(&sigmas))
            .map(|(l, (&c, &s))| Ok((l.to_string(), GaussianMF::new(c, s)?)))
            .collect::<Result<Vec<_>, FuzzyError>>()?;
        Self::new(name, terms)
    }

    pub fn terms(&self) -> &[(String, GaussianMF)] {
        &self.terms
    }

    pub fn mf(&self, i: usize) -> &GaussianMF {
        &self.terms[i].1
    }

    pub fn centers(&self) -> Vec<f64> {
        self.terms.iter().map(|(_, m)| m.center).collect()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Half the mean distance from each center to its neighbors.
pub fn neighbor_sigmas(centers: &[f64]) -> Vec<f64> {
    let n = centers.len();
    (0..n)
        .map(|i| {
            let mut gaps = Vec::with_capacity(2);
            if i > 0 {
                gaps.push(centers[i] - centers[i - 1]);
            }
            if i + 1 < n {
                gaps.push(centers[i + 1] - centers[i]);
            }
            if gaps.is_empty() {
                1.0
            } else {
                gaps.iter().sum::<f64>() / gaps.len() as f64 / 2.0
            }
        })
        .collect()
}

macro_rules! term_enum {
    ($name:ident { $($variant:ident),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn index(self) -> usize {
                self as usize
            }

            pub fn label(self) -> &'static str {
                match self { $($name::$variant => stringify!($variant)),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }

        impl FromStr for $name {
            type Err = FuzzyError;
            fn from_str(s: &str) -> Result<Self, FuzzyError> {
                $name::ALL
                    .iter()
                    .copied()
                    .find(|t| t.label().eq_ignore_ascii_case(s))
                    .ok_or_else(|| FuzzyError::UnknownTerm(s.to_string()))
            }
        }
    };
}

term_enum!(AngleTerm { Low, Middle, High });
term_enum!(TorqueTerm { Negative, Neutral, Positive });
term_enum!(OutputTerm { SharpRight, GentleRight, Straight, GentleLeft, SharpLeft });

/// Complete 3x3 table from (angle term, torque term) to output term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleBase {
    rules: [[OutputTerm; 3]; 3],
}

impl RuleBase {
    pub fn from_entries(
        entries: impl IntoIterator<Item = (AngleTerm, TorqueTerm, OutputTerm)>,
    ) -> Result<Self, FuzzyError> {
        let mut table = [[None; 3]; 3];
        for (a, t, o) in entries {
            table[a.index()][t.index()] = Some(o);
        }
        let mut rules = [[OutputTerm::Straight; 3]; 3];
        for &a in AngleTerm::ALL {
            for &t in TorqueTerm::ALL {
                rules[a.index()][t.index()] =
                    table[a.index()][t.index()].ok_or(FuzzyError::MissingRule(a, t))?;
            }
        }
        Ok(Self { rules })
    }

    pub fn get(&self, a: AngleTerm, t: TorqueTerm) -> OutputTerm {
        self.rules[a.index()][t.index()]
    }

    pub fn entries(&self) -> impl Iterator<Item = (AngleTerm, TorqueTerm, OutputTerm)> + '_ {
        AngleTerm::ALL
            .iter()
            .flat_map(move |&a| TorqueTerm::ALL.iter().map(move |&t| (a, t, self.get(a, t))))
    }
}

impl Default for RuleBase {
    fn default() -> Self {
        default_rule_base()
    }
}

pub fn default_rule_base() -> RuleBase {
    use OutputTerm::*;
    RuleBase {
        rules: [
            [SharpRight, Straight, Straight],
            [GentleRight, Straight, Straight],
            [GentleRight, GentleLeft, SharpLeft],
        ],
    }
}

/// Output membership sampled on the defuzzification grid.
#[derive(Debug, PartialEq)]
struct OutputGrid {
    omega: Vec<f64>,
    weight: Vec<f64>,
    // term-major: mu[k * len + i]
    mu: Vec<f64>,
}

impl OutputGrid {
    fn new(output: &LinguisticVariable, step: f64) -> Self {
        let n = (2.0 * OMEGA_LIMIT_DPS / step).round() as usize + 1;
        let omega: Vec<f64> = (0..n)
            .map(|i| -OMEGA_LIMIT_DPS + i as f64 * step)
            .collect();
        let mut weight = vec![1.0; n];
        weight[0] = 0.5;
        weight[n - 1] = 0.5;
        let mu = output
            .terms()
            .iter()
            .flat_map(|(_, m)| omega.iter().map(move |&w| m.membership(w)))
            .collect();
        Self { omega, weight, mu }
    }

    fn centroid(&self, levels: &[f64]) -> f64 {
        let n = self.omega.len();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let mut agg = 0.0f64;
            for (k, &lv) in levels.iter().enumerate() {
                agg = agg.max(lv.min(self.mu[k * n + i]));
            }
            let w = agg * self.weight[i];
            num += w * self.omega[i];
            den += w;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleMeans {
    pub left: f64,
    pub straight: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorqueThresholds {
    pub left: f64,
    pub straight: f64,
    pub right: f64,
}

impl Default for TorqueThresholds {
    fn default() -> Self {
        Self {
            left: 6.0,
            straight: 1.0,
            right: -4.0,
        }
    }
}

/// Calibrated fuzzy controller definition.
#[derive(Debug, Clone)]
pub struct FuzzyProfile {
    angle_var: LinguisticVariable,
    torque_var: LinguisticVariable,
    output_var: LinguisticVariable,
    rules: RuleBase,
    mirror: bool,
    grid: Arc<OutputGrid>,
}

impl PartialEq for FuzzyProfile {
    fn eq(&self, o: &Self) -> bool {
        self.angle_var == o.angle_var
            && self.torque_var == o.torque_var
            && self.output_var == o.output_var
            && self.rules == o.rules
            && self.mirror == o.mirror
    }
}

pub const ANGLE_LABELS: [&str; 3] = ["Low", "Middle", "High"];
pub const TORQUE_LABELS: [&str; 3] = ["Negative", "Neutral", "Positive"];
pub const OUTPUT_LABELS: [&str; 5] = [
    "SharpRight",
    "GentleRight",
    "Straight",
    "GentleLeft",
    "SharpLeft",
];

fn expect_terms(v: &LinguisticVariable, n: usize) -> Result<(), FuzzyError> {
    if v.len() == n {
        Ok(())
    } else {
        Err(FuzzyError::TermCount {
            name: v.name.clone(),
            expected: n,
            found: v.len(),
        })
    }
}

impl FuzzyProfile {
    pub fn new(
        angle_var: LinguisticVariable,
        torque_var: LinguisticVariable,
        output_var: LinguisticVariable,
        rules: RuleBase,
        mirror: bool,
    ) -> Result<Self, FuzzyError> {
        expect_terms(&angle_var, 3)?;
        expect_terms(&torque_var, 3)?;
        expect_terms(&output_var, 5)?;
        if output_var
            .centers()
            .iter()
            .any(|c| c.abs() > OMEGA_LIMIT_DPS)
        {
            return Err(FuzzyError::OutputRange);
        }
        let grid = Arc::new(OutputGrid::new(&output_var, GRID_STEP));
        Ok(Self {
            angle_var,
            torque_var,
            output_var,
            rules,
            mirror,
            grid,
        })
    }

    pub fn angle_var(&self) -> &LinguisticVariable {
        &self.angle_var
    }

    pub fn torque_var(&self) -> &LinguisticVariable {
        &self.torque_var
    }

    pub fn output_var(&self) -> &LinguisticVariable {
        &self.output_var
    }

    pub fn rules(&self) -> &RuleBase {
        &self.rules
    }

    pub fn mirror(&self) -> bool {
        self.mirror
    }

    pub fn with_mirror(mut self, mirror: bool) -> Self {
        self.mirror = mirror;
        self
    }

    /// Angle center of the straight (Middle) term.
    pub fn straight_center(&self) -> f64 {
        self.angle_var.mf(AngleTerm::Middle.index()).center
    }

    /// Clip level of each output term for the given crisp inputs.
    pub fn output_levels(&self, angle: f64, torque: f64) -> [f64; 5] {
        let mut levels = [0.0f64; 5];
        for &a in AngleTerm::ALL {
            let ma = self.angle_var.mf(a.index()).membership(angle);
            for &t in TorqueTerm::ALL {
                let mt = self.torque_var.mf(t.index()).membership(torque);
                let k = self.rules.get(a, t).index();
                levels[k] = levels[k].max(ma.min(mt));
            }
        }
        levels
    }

    /// Crisp yaw rate in deg/s, positive to the left.
    pub fn infer(&self, angle: f64, torque: f64) -> f64 {
        if self.mirror {
            -self.infer_right(angle, -torque)
        } else {
            self.infer_right(angle, torque)
        }
    }

    fn infer_right(&self, angle: f64, torque: f64) -> f64 {
        if !(angle.is_finite() && torque.is_finite()) {
            return 0.0;
        }
        let levels = self.output_levels(angle, torque);
        self.grid
            .centroid(&levels)
            .clamp(-OMEGA_LIMIT_DPS, OMEGA_LIMIT_DPS)
    }
}

pub fn infer_omega(profile: &FuzzyProfile, angle: f64, torque: f64) -> f64 {
    profile.infer(angle, torque)
}

pub fn default_output_var() -> LinguisticVariable {
    let terms = OUTPUT_LABELS
        .iter()
        .zip(OUTPUT_CENTERS)
        .map(|(l, c)| (l.to_string(), GaussianMF { center: c, sigma: OUTPUT_SIGMA }))
        .collect();
    LinguisticVariable::new("omega", terms).expect("static output terms")
}

pub fn calibrate_profile(
    angle_means: AngleMeans,
    torque_thresholds: TorqueThresholds,
) -> Result<FuzzyProfile, FuzzyError> {
    let a = angle_means;
    let t = torque_thresholds;
    for (what, [r, s, l]) in [
        ("angle means", [a.right, a.straight, a.left]),
        ("torque thresholds", [t.right, t.straight, t.left]),
    ] {
        if let Some(msg) = ordering_violation(r, s, l) {
            return Err(FuzzyError::Calibration(format!(
                "{what} out of order: {msg} (need right < straight < left)"
            )));
        }
    }
    let angle_var =
        LinguisticVariable::from_centers("angle", &ANGLE_LABELS, &[a.right, a.straight, a.left])?;
    let torque_var =
        LinguisticVariable::from_centers("torque", &TORQUE_LABELS, &[t.right, t.straight, t.left])?;
    FuzzyProfile::new(
        angle_var,
        torque_var,
        default_output_var(),
        default_rule_base(),
        false,
    )
}

fn ordering_violation(right: f64, straight: f64, left: f64) -> Option<String> {
    if !(right.is_finite() && straight.is_finite() && left.is_finite()) {
        return Some(format!(
            "non-finite value in right={right} straight={straight} left={left}"
        ));
    }
    if !(straight < left) {
        Some(format!("left ({left}) must be greater than straight ({straight})"))
    } else if !(right < straight) {
        Some(format!("right ({right}) must be less than straight ({straight})"))
    } else {
        None
    }
}

/// Shoulder means of the reference user (user 5).
pub const USER5_ANGLES: AngleMeans = AngleMeans {
    left: 39.06,
    straight: 27.17,
    right: 20.34,
};

pub fn user5_profile() -> FuzzyProfile {
    calibrate_profile(USER5_ANGLES, TorqueThresholds::default()).expect("valid calibration")
}

/// Hybrid controller: admittance forward speed plus fuzzy steering on
/// smoothed torque and shoulder angle.
#[derive(Debug, Clone)]
pub struct FuzzyController {
    profile: FuzzyProfile,
    linear: LinearChannel,
    hold: DropoutHold,
    torque_filter: MovingAverage,
    angle_filter: MovingAverage,
}

impl FuzzyController {
    pub fn new(
        profile: FuzzyProfile,
        linear: LinearAdmittanceParams,
        dt: f64,
    ) -> Result<Self, AdmittanceError> {
        let hold = DropoutHold::new(profile.straight_center());
        Ok(Self {
            profile,
            linear: LinearChannel::new(linear, dt)?,
            hold,
            torque_filter: MovingAverage::new(SMOOTHING_WINDOW),
            angle_filter: MovingAverage::new(SMOOTHING_WINDOW),
        })
    }

    pub fn profile(&self) -> &FuzzyProfile {
        &self.profile
    }

    pub fn tick(
        &mut self,
        wrench: HandleWrench,
        shoulder: &ShoulderState,
    ) -> Result<VelocityCommand, AdmittanceError> {
        if !wrench.is_finite() {
            return Err(AdmittanceError::InvalidInput);
        }
        let v = self.linear.step(wrench.f_x)?;
        self.hold.observe(shoulder);
        let angle = self.angle_filter.push(self.hold.angle_at(shoulder.t));
        let torque = self.torque_filter.push(wrench.tau_z);
        Ok(VelocityCommand {
            v,
            omega: self.profile.infer(angle, torque),
        })
    }

    /// Current smoothed angle, or the straight center before any input.
    pub fn smoothed_angle(&self) -> f64 {
        self.angle_filter
            .value()
            .unwrap_or_else(|| self.profile.straight_center())
    }

    pub fn smoothed_torque(&self) -> f64 {
        self.torque_filter.value().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rule_table_cells() {
        use AngleTerm::*;
        use OutputTerm::*;
        use TorqueTerm::*;
        let r = default_rule_base();
        let want = [
            (Low, Negative, SharpRight),
            (Low, Neutral, Straight),
            (Low, Positive, Straight),
            (Middle, Negative, GentleRight),
            (Middle, Neutral, Straight),
            (Middle, Positive, Straight),
            (High, Negative, GentleRight),
            (High, Neutral, GentleLeft),
            (High, Positive, SharpLeft),
        ];
        for (a, t, o) in want {
            assert_eq!(r.get(a, t), o, "({a}, {t})");
        }
        assert_eq!(RuleBase::from_entries(r.entries()).unwrap(), r);
        assert!(matches!(
            RuleBase::from_entries(r.entries().skip(1)),
            Err(FuzzyError::MissingRule(Low, Negative))
        ));
    }

    #[test]
    fn calibration_centers_and_sigmas() {
        let p = user5_profile();
        assert_eq!(p.angle_var().centers(), vec![20.34, 27.17, 39.06]);
        assert_eq!(p.torque_var().centers(), vec![-4.0, 1.0, 6.0]);
        let s: Vec<f64> = p.angle_var().terms().iter().map(|(_, m)| m.sigma).collect();
        for (got, want) in s.iter().zip([3.415, 4.68, 5.945]) {
            assert!((got - want).abs() < 1e-9);
        }
        assert!(p.torque_var().terms().iter().all(|(_, m)| m.sigma == 2.5));

        let u1 = calibrate_profile(
            AngleMeans {
                left: 25.97,
                straight: 19.64,
                right: 15.04,
            },
            TorqueThresholds::default(),
        )
        .unwrap();
        assert_eq!(u1.angle_var().centers(), vec![15.04, 19.64, 25.97]);

        let bad = AngleMeans {
            left: 20.0,
            straight: 27.0,
            right: 15.0,
        };
        match calibrate_profile(bad, TorqueThresholds::default()) {
            Err(FuzzyError::Calibration(m)) => {
                assert!(m.contains("left (20) must be greater than straight (27)"), "{m}")
            }
            other => panic!("expected calibration error, got {other:?}"),
        }
        let bad_torque = TorqueThresholds {
            left: 6.0,
            straight: -5.0,
            right: -4.0,
        };
        match calibrate_profile(USER5_ANGLES, bad_torque) {
            Err(FuzzyError::Calibration(m)) => {
                assert!(m.starts_with("torque thresholds"), "{m}");
                assert!(m.contains("right (-4) must be less than straight (-5)"), "{m}");
            }
            other => panic!("expected calibration error, got {other:?}"),
        }
    }

    #[test]
    fn center_point_outputs() {
        let p = user5_profile();
        assert!(p.infer(27.17, 1.0).abs() < 5.0);
        assert!(p.infer(20.34, -4.0) < -45.0);
        assert!(p.infer(39.06, 6.0) > 45.0);
        assert!(p.infer(20.34, -4.0) < p.infer(27.17, -4.0));
        let hn = p.infer(39.06, 1.0);
        assert!(p.infer(39.06, 6.0) > hn && hn > 0.0);
    }

    #[test]
    fn matches_reference_table() {
        // Independent vectorized implementation of the same engine.
        let p = user5_profile();
        let rows: [(f64, &[(f64, f64)]); 3] = [
            (
                27.17,
                &[(0.0, -5.785), (1.0, 0.0), (2.0, 4.315), (3.0, 6.799), (4.0, 7.489)],
            ),
            (
                20.34,
                &[
                    (-4.0, -45.233),
                    (-3.0, -37.813),
                    (-2.0, -29.059),
                    (-1.0, -21.124),
                    (0.0, -13.696),
                    (1.0, -6.689),
                    (2.0, -2.499),
                ],
            ),
            (39.06, &[(-1.0, 5.602), (0.0, 16.696), (1.0, 27.557)]),
        ];
        for (a, cells) in rows {
            for &(t, want) in cells {
                let got = p.infer(a, t);
                assert!((got - want).abs() <= 1e-3, "a={a} t={t}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn lipschitz_in_angle_on_profile_grid() {
        let p = user5_profile();
        let angles: Vec<f64> = (0..50).map(|i| 60.0 * i as f64 / 49.0).collect();
        let torques: Vec<f64> = (0..50).map(|j| -10.0 + 20.0 * j as f64 / 49.0).collect();
        let mut worst = 0.0f64;
        for &t in &torques {
            for w in angles.windows(2) {
                let slope = (p.infer(w[1], t) - p.infer(w[0], t)).abs() / (w[1] - w[0]);
                worst = worst.max(slope);
            }
        }
        assert!(worst <= 25.0, "slope {worst}");
    }

    #[test]
    fn continuous_in_angle() {
        let p = user5_profile();
        for (a, t) in [(20.0, -3.0), (27.17, 1.0), (33.0, 0.5), (45.0, 6.0)] {
            let mut prev = f64::INFINITY;
            for k in 1..7 {
                let d = 10f64.powi(-k);
                let gap = (p.infer(a + d, t) - p.infer(a, t)).abs();
                assert!(gap <= prev.max(1e-12));
                prev = gap;
            }
            assert!(prev < 1e-4);
        }
    }

    #[test]
    fn invalid_mf_and_terms() {
        assert!(GaussianMF::new(0.0, 0.0).is_err());
        let m = GaussianMF::new(3.0, 2.0).unwrap();
        assert_eq!(m.membership(3.0), 1.0);
        assert!(LinguisticVariable::new(
            "x",
            vec![("a".into(), m), ("a".into(), GaussianMF::new(4.0, 1.0).unwrap())]
        )
        .is_err());
        assert!(LinguisticVariable::new(
            "x",
            vec![("a".into(), m), ("b".into(), GaussianMF::new(1.0, 1.0).unwrap())]
        )
        .is_err());
        assert_eq!("gentleleft".parse::<OutputTerm>().unwrap(), OutputTerm::GentleLeft);
    }

    #[test]
    fn controller_uses_hold_on_dropout() {
        let p = user5_profile();
        let mut c = FuzzyController::new(p.clone(), LinearAdmittanceParams::default(), 0.02)
            .unwrap();
        let w = HandleWrench::new(5.0, 1.0);
        for n in 0..200 {
            let t = n as f64 * 0.02;
            let s = if n < 100 {
                ShoulderState {
                    t,
                    abduction_deg: 39.06,
                    valid: true,
                }
            } else {
                ShoulderState::invalid(t)
            };
            let cmd = c.tick(w, &s).unwrap();
            if n == 110 {
                assert!((cmd.omega - p.infer(39.06, 1.0)).abs() < 1e-9);
            }
        }
        assert!(c.smoothed_angle() < 39.0);
    }

    proptest! {
        #[test]
        fn bounded_and_finite(a in 0.0..180.0f64, t in -20.0..20.0f64) {
            let w = user5_profile().infer(a, t);
            prop_assert!(w.is_finite() && w.abs() <= 90.0);
        }

        #[test]
        fn mirror_negates(a in 0.0..60.0f64, t in -10.0..10.0f64) {
            let p = user5_profile();
            let m = p.clone().with_mirror(true);
            prop_assert_eq!(m.infer(a, -t), -p.infer(a, t));
        }
    }
}
