//! Interconnected switched Takagi-Sugeno plants.
//!
//! A [`SystemSpec`] holds `n` subsystems. Subsystem `i` has `m_i` switching
//! modes, mode `j` blends `r_j` local linear models with state-dependent
//! memberships, and every local model carries coupling matrices towards
//! every peer subsystem `α ≠ i`. Indices are 0-based throughout.

mod format;
mod membership;
mod validate;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::linalg::Mat;

pub use format::{parse_system, parse_unchecked, serialize_system, ParseError};
pub use membership::{eval_family_member, Expr, GrammarError, MembershipFn};
pub use validate::{validate, Category, Severity, ValidationReport, Violation};

/// Tolerance for the convex-sum property checked at validation time.
pub const CONVEX_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub name: String,
    pub subsystems: Vec<SubsystemSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemSpec {
    pub state_dim: usize,
    pub output_dim: usize,
    pub input_dim: usize,
    pub disturbance_dim: usize,
    pub modes: Vec<ModeSpec>,
    pub switching: SwitchingRule,
    pub initial_state: Vec<f64>,
    pub initial_mode: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpec {
    pub rules: Vec<RuleSpec>,
    /// One membership per rule, evaluated as a family (siblings may refer to each other).
    pub memberships: Vec<MembershipFn>,
}

/// One local linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSpec {
    pub a: Mat,
    pub b: Mat,
    pub bw: Mat,
    pub c: Mat,
    /// Lower bound on the time derivative of this rule's membership.
    pub lambda: f64,
    /// Keyed by peer subsystem index.
    pub couplings: BTreeMap<usize, Coupling>,
}

/// Influence of peer `α` on the owning subsystem: `F x_α + B^{w_α} w_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub f: Mat,
    pub bw: Mat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SwitchingRule {
    /// `(switch_time, mode)` pairs, strictly increasing in time.
    TimeSchedule(Vec<(f64, usize)>),
    /// One affine frontier `H_j(x) = c·x + d` per mode.
    Hysteresis(Vec<Frontier>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    pub c: Vec<f64>,
    pub d: f64,
}

impl Frontier {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + self.d
    }
}

impl SystemSpec {
    pub fn n(&self) -> usize {
        self.subsystems.len()
    }

    /// The interconnection weight `1/(n-1)`; `None` for a single subsystem.
    pub fn pair_weight(&self) -> Option<f64> {
        (self.n() >= 2).then(|| 1.0 / (self.n() - 1) as f64)
    }

    /// Ordered pairs `(i, α)` with `α ≠ i`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (0..n).filter(move |&a| a != i).map(move |a| (i, a)))
            .collect()
    }

    pub fn peers(&self, i: usize) -> impl Iterator<Item = usize> {
        let n = self.n();
        (0..n).filter(move |&a| a != i)
    }
}

impl SubsystemSpec {
    pub fn rule_count(&self, mode: usize) -> usize {
        self.modes[mode].rules.len()
    }

    /// Size of the descriptor-augmented vector `(x, y, u)`.
    pub fn augmented_dim(&self) -> usize {
        self.state_dim + self.output_dim + self.input_dim
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MembershipError {
    #[error("state has length {got}, subsystem expects {expected}")]
    StateLength { expected: usize, got: usize },
    #[error("membership {rule} of mode {mode} could not be evaluated (bad reference)")]
    Unevaluable { mode: usize, rule: usize },
    #[error("membership {rule} of mode {mode} evaluated to {value}, outside [0, 1]")]
    OutOfRange { mode: usize, rule: usize, value: f64 },
    #[error("memberships of mode {mode} sum to {sum}, not 1")]
    NotConvex { mode: usize, sum: f64 },
}

/// Evaluates the membership weights of `mode` at `state`.
///
/// The result is componentwise in `[0, 1]` and sums to one within `1e-12`;
/// sums off by at most [`CONVEX_SUM_TOL`] are renormalized.
pub fn membership_eval(
    sub: &SubsystemSpec,
    mode: usize,
    state: &[f64],
) -> Result<Vec<f64>, MembershipError> {
    if state.len() != sub.state_dim {
        return Err(MembershipError::StateLength { expected: sub.state_dim, got: state.len() });
    }
    let family = &sub.modes[mode].memberships;
    let mut h = Vec::with_capacity(family.len());
    for rule in 0..family.len() {
        let v = eval_family_member(family, rule, state)
            .ok_or(MembershipError::Unevaluable { mode, rule })?;
        if !(-CONVEX_SUM_TOL..=1.0 + CONVEX_SUM_TOL).contains(&v) {
            return Err(MembershipError::OutOfRange { mode, rule, value: v });
        }
        h.push(v.clamp(0.0, 1.0));
    }
    let sum: f64 = h.iter().sum();
    if (sum - 1.0).abs() > CONVEX_SUM_TOL {
        return Err(MembershipError::NotConvex { mode, sum });
    }
    if sum != 1.0 {
        h.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(h)
}

/// `Σ_s h_s M_s`.
pub fn blend<'a>(weights: &[f64], mats: impl IntoIterator<Item = &'a Mat>) -> Mat {
    let mut it = mats.into_iter().zip(weights);
    let (first, w0) = it.next().expect("blend needs at least one matrix");
    let mut acc = first * *w0;
    for (m, w) in it {
        acc += m * *w;
    }
    acc
}

/// Text of the bundled two-subsystem example plant.
pub const BUNDLED_SYSTEM: &str = include_str!("../../examples/two_subsystem.sys");

pub fn bundled_system() -> SystemSpec {
    parse_system(BUNDLED_SYSTEM).expect("bundled system parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_memberships_at_origin_and_quarter_turn() {
        let sys = bundled_system();
        let s1 = &sys.subsystems[0];
        assert_eq!(membership_eval(s1, 0, &[0.0, 0.0]).unwrap(), vec![0.0, 1.0]);
        let h = membership_eval(s1, 0, &[std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        assert!((h[0] - 1.0).abs() < 1e-15 && h[1].abs() < 1e-15);
    }

    #[test]
    fn wrong_state_length_rejected() {
        let sys = bundled_system();
        assert!(matches!(
            membership_eval(&sys.subsystems[0], 0, &[0.0]),
            Err(MembershipError::StateLength { .. })
        ));
    }

    #[test]
    fn non_convex_family_rejected() {
        let mut sys = bundled_system();
        let mode = &mut sys.subsystems[0].modes[0];
        mode.memberships = vec![MembershipFn::parse("0.6").unwrap(), MembershipFn::parse("0.6").unwrap()];
        assert!(matches!(
            membership_eval(&sys.subsystems[0], 0, &[0.0, 0.0]),
            Err(MembershipError::NotConvex { .. })
        ));
    }

    #[test]
    fn out_of_range_member_rejected() {
        let mut sys = bundled_system();
        sys.subsystems[0].modes[0].memberships =
            vec![MembershipFn::parse("1.5").unwrap(), MembershipFn::parse("-0.5").unwrap()];
        assert!(matches!(
            membership_eval(&sys.subsystems[0], 0, &[0.0, 0.0]),
            Err(MembershipError::OutOfRange { .. })
        ));
    }

    #[test]
    fn tiny_sum_defect_is_renormalized() {
        let mut sys = bundled_system();
        sys.subsystems[0].modes[0].memberships =
            vec![MembershipFn::parse("0.5").unwrap(), MembershipFn::parse("0.5000000001").unwrap()];
        let h = membership_eval(&sys.subsystems[0], 0, &[0.0, 0.0]).unwrap();
        assert!((h.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pairs_of_three() {
        let mut sys = bundled_system();
        sys.subsystems.push(sys.subsystems[0].clone());
        assert_eq!(sys.pairs().len(), 6);
        assert_eq!(sys.pair_weight(), Some(0.5));
        sys.subsystems.truncate(1);
        assert!(sys.pairs().is_empty());
        assert_eq!(sys.pair_weight(), None);
    }
}
