use serde::{Deserialize, Serialize};

use super::{eval_family_member, SubsystemSpec, SwitchingRule, SystemSpec, CONVEX_SUM_TOL};
use crate::linalg::Mat;

/// Number of state samples used for the membership checks of each subsystem.
pub const MEMBERSHIP_SAMPLES: usize = 100;
/// Half-width of the sampled state box.
const SAMPLE_RADIUS: f64 = std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Dimension,
    Structure,
    Membership,
    Switching,
    Lambda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub severity: Severity,
    pub category: Category,
    pub subject: String,
    pub message: String,
}

impl Violation {
    pub fn is_dimensional(&self) -> bool {
        self.category == Category::Dimension
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.violations.iter().any(|v| v.severity == Severity::Error)
    }

    fn push(&mut self, severity: Severity, category: Category, subject: String, message: String) {
        self.violations.push(Violation { severity, category, subject, message });
    }
}

/// Deterministic low-discrepancy sample of a box (Kronecker sequence).
pub(crate) fn sample_states(dim: usize, count: usize) -> Vec<Vec<f64>> {
    // square roots of the first primes are rationally independent
    const PRIMES: [f64; 12] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0];
    (0..count)
        .map(|k| {
            (0..dim)
                .map(|d| {
                    let alpha = PRIMES[d % PRIMES.len()].sqrt() + (d / PRIMES.len()) as f64;
                    let u = ((k as f64 + 0.5) * alpha).fract();
                    SAMPLE_RADIUS * (2.0 * u - 1.0)
                })
                .collect()
        })
        .collect()
}

fn check_shape(
    report: &mut ValidationReport,
    subject: &str,
    m: &Mat,
    rows: usize,
    cols: usize,
) {
    if m.shape() != (rows, cols) {
        report.push(
            Severity::Error,
            Category::Dimension,
            subject.to_string(),
            format!("expected {rows}x{cols}, found {}x{}", m.nrows(), m.ncols()),
        );
    }
}

/// Lists every violated invariant of `sys`. Violations are data, never errors.
pub fn validate(sys: &SystemSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    if sys.subsystems.is_empty() {
        report.push(Severity::Error, Category::Structure, "system".into(), "no subsystems".into());
        return report;
    }
    for (i, sub) in sys.subsystems.iter().enumerate() {
        validate_subsystem(sys, i, sub, &mut report);
    }
    report
}

fn validate_subsystem(sys: &SystemSpec, i: usize, sub: &SubsystemSpec, report: &mut ValidationReport) {
    let subj = format!("subsystem[{i}]");
    let (n, p, u, v) = (sub.state_dim, sub.output_dim, sub.input_dim, sub.disturbance_dim);
    if n == 0 || p == 0 || u == 0 || v == 0 {
        report.push(Severity::Error, Category::Dimension, subj.clone(), "dimensions must be positive".into());
        return;
    }
    if sub.initial_state.len() != n {
        report.push(
            Severity::Error,
            Category::Dimension,
            format!("{subj}.initial_state"),
            format!("length {} but state_dim is {n}", sub.initial_state.len()),
        );
    }
    if sub.modes.is_empty() {
        report.push(Severity::Error, Category::Structure, subj.clone(), "no modes".into());
        return;
    }
    if sub.initial_mode >= sub.modes.len() {
        report.push(
            Severity::Error,
            Category::Structure,
            format!("{subj}.initial_mode"),
            format!("mode {} out of range", sub.initial_mode),
        );
    }

    for (j, mode) in sub.modes.iter().enumerate() {
        let msubj = format!("{subj}.mode[{j}]");
        if mode.rules.is_empty() {
            report.push(Severity::Error, Category::Structure, msubj.clone(), "no rules".into());
            continue;
        }
        if mode.memberships.len() != mode.rules.len() {
            report.push(
                Severity::Error,
                Category::Structure,
                msubj.clone(),
                "membership count differs from rule count".into(),
            );
            continue;
        }
        for (s, rule) in mode.rules.iter().enumerate() {
            let rsubj = format!("{msubj}.rule[{s}]");
            check_shape(report, &format!("{rsubj}.A"), &rule.a, n, n);
            check_shape(report, &format!("{rsubj}.B"), &rule.b, n, u);
            check_shape(report, &format!("{rsubj}.Bw"), &rule.bw, n, v);
            check_shape(report, &format!("{rsubj}.C"), &rule.c, p, n);
            for alpha in sys.peers(i) {
                let peer = &sys.subsystems[alpha];
                match rule.couplings.get(&alpha) {
                    Some(c) => {
                        check_shape(report, &format!("{rsubj}.coupling[{alpha}].F"), &c.f, n, peer.state_dim);
                        check_shape(
                            report,
                            &format!("{rsubj}.coupling[{alpha}].Bw"),
                            &c.bw,
                            n,
                            peer.disturbance_dim,
                        );
                    }
                    None => report.push(
                        Severity::Error,
                        Category::Structure,
                        format!("{rsubj}.coupling[{alpha}]"),
                        "missing coupling entry (zero matrices are allowed, absence is not)".into(),
                    ),
                }
            }
            for alpha in rule.couplings.keys() {
                if *alpha == i || *alpha >= sys.n() {
                    report.push(
                        Severity::Error,
                        Category::Structure,
                        format!("{rsubj}.coupling[{alpha}]"),
                        "coupling to itself or to a nonexistent subsystem".into(),
                    );
                }
            }
            if !rule.lambda.is_finite() {
                report.push(Severity::Error, Category::Lambda, rsubj.clone(), "lambda is not finite".into());
            } else if rule.lambda > 0.0 && mode.rules.len() > 1 {
                report.push(
                    Severity::Warning,
                    Category::Lambda,
                    rsubj.clone(),
                    format!(
                        "lambda = {} is positive; a non-constant membership has a negative derivative somewhere",
                        rule.lambda
                    ),
                );
            }
            let refs_ok = mode.memberships[s].sibling_refs().iter().all(|&k| k < mode.rules.len() && k != s);
            let states_ok = mode.memberships[s].max_state_index().map_or(true, |k| k < n);
            if !refs_ok || !states_ok {
                report.push(
                    Severity::Error,
                    Category::Membership,
                    format!("{rsubj}.membership"),
                    "references a missing state entry or sibling".into(),
                );
            }
        }
        check_memberships(sub, j, &msubj, report);
    }

    match &sub.switching {
        SwitchingRule::TimeSchedule(entries) => {
            for w in entries.windows(2) {
                if w[1].0 <= w[0].0 {
                    report.push(
                        Severity::Error,
                        Category::Switching,
                        format!("{subj}.switching"),
                        format!("schedule times not strictly increasing at t = {}", w[1].0),
                    );
                }
            }
            for &(t, m) in entries {
                if m >= sub.modes.len() || !t.is_finite() {
                    report.push(
                        Severity::Error,
                        Category::Switching,
                        format!("{subj}.switching"),
                        format!("entry ({t}, {m}) out of range"),
                    );
                }
            }
        }
        SwitchingRule::Hysteresis(frontiers) => {
            if frontiers.len() != sub.modes.len() {
                report.push(
                    Severity::Error,
                    Category::Switching,
                    format!("{subj}.switching"),
                    format!("{} frontiers for {} modes", frontiers.len(), sub.modes.len()),
                );
            }
            for (j, f) in frontiers.iter().enumerate() {
                if f.c.len() != n {
                    report.push(
                        Severity::Error,
                        Category::Dimension,
                        format!("{subj}.switching.frontiers[{j}]"),
                        format!("coefficient length {} but state_dim is {n}", f.c.len()),
                    );
                }
            }
        }
    }
}

fn check_memberships(sub: &SubsystemSpec, j: usize, subj: &str, report: &mut ValidationReport) {
    let family = &sub.modes[j].memberships;
    for state in sample_states(sub.state_dim, MEMBERSHIP_SAMPLES) {
        let mut sum = 0.0;
        for s in 0..family.len() {
            match eval_family_member(family, s, &state) {
                Some(h) if (-CONVEX_SUM_TOL..=1.0 + CONVEX_SUM_TOL).contains(&h) => sum += h,
                Some(h) => {
                    report.push(
                        Severity::Error,
                        Category::Membership,
                        format!("{subj}.rule[{s}].membership"),
                        format!("value {h} outside [0, 1] at state {state:?}"),
                    );
                    return;
                }
                None => return, // already reported as a bad reference
            }
        }
        if (sum - 1.0).abs() > CONVEX_SUM_TOL {
            report.push(
                Severity::Error,
                Category::Membership,
                subj.to_string(),
                format!("convex-sum violation: memberships sum to {sum} at state {state:?}"),
            );
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bundled_system, MembershipFn};

    #[test]
    fn bundled_system_is_clean() {
        let report = validate(&bundled_system());
        assert!(report.is_empty(), "{:#?}", report.violations);
    }

    #[test]
    fn constant_memberships_violate_convex_sum() {
        let mut sys = bundled_system();
        sys.subsystems[0].modes[1].memberships =
            vec![MembershipFn::parse("0.6").unwrap(), MembershipFn::parse("0.6").unwrap()];
        let report = validate(&sys);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].message.contains("convex-sum"));
    }

    #[test]
    fn positive_lambda_is_a_warning() {
        let mut sys = bundled_system();
        sys.subsystems[1].modes[0].rules[1].lambda = 2.0;
        let report = validate(&sys);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].severity, Severity::Warning);
        assert!(!report.has_errors());
    }

    #[test]
    fn missing_coupling_and_bad_schedule() {
        let mut sys = bundled_system();
        sys.subsystems[0].modes[0].rules[0].couplings.clear();
        sys.subsystems[1].switching = SwitchingRule::TimeSchedule(vec![(1.0, 0), (1.0, 1), (2.0, 7)]);
        let report = validate(&sys);
        let cats: Vec<_> = report.violations.iter().map(|v| v.category.clone()).collect();
        assert!(cats.contains(&Category::Structure));
        assert_eq!(cats.iter().filter(|c| **c == Category::Switching).count(), 2);
    }

    #[test]
    fn wrong_coupling_shape_is_dimensional() {
        let mut sys = bundled_system();
        let c = sys.subsystems[1].modes[0].rules[0].couplings.get_mut(&0).unwrap();
        c.f = c.f.transpose();
        let report = validate(&sys);
        assert!(report.violations.iter().any(Violation::is_dimensional));
    }

    #[test]
    fn samples_cover_box_deterministically() {
        let a = sample_states(3, MEMBERSHIP_SAMPLES);
        assert_eq!(a, sample_states(3, MEMBERSHIP_SAMPLES));
        assert!(a.iter().flatten().all(|v| v.abs() <= SAMPLE_RADIUS));
        assert!(a.iter().any(|s| s[0] > 2.0) && a.iter().any(|s| s[0] < -2.0));
    }
}
