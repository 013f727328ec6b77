use crate::model::SwitchingRule;

/// Slack when comparing schedule times against the step grid `k·dt`.
const SCHEDULE_TIME_TOL: f64 = 1e-9;

/// Next mode of a subsystem currently in `current`.
///
/// `entry` is the frontier value `H_current(x)` recorded when `current` was
/// entered; it is ignored by time schedules. A zero entry value carries no
/// sign, so no transition happens until the caller re-arms it with a nonzero
/// value.
pub fn switching_eval(rule: &SwitchingRule, current: usize, entry: f64, x: &[f64], t: f64) -> usize {
    match rule {
        SwitchingRule::TimeSchedule(entries) => entries
            .iter()
            .take_while(|(time, _)| *time <= t + SCHEDULE_TIME_TOL * t.abs().max(1.0))
            .last()
            .map_or(current, |&(_, mode)| mode),
        SwitchingRule::Hysteresis(frontiers) => {
            if entry == 0.0 {
                return current;
            }
            let now = frontiers[current].eval(x);
            if entry * now <= 0.0 {
                (current + 1) % frontiers.len()
            } else {
                current
            }
        }
    }
}

/// Mode and frontier reference of one subsystem during simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SwitchState {
    pub mode: usize,
    pub entry: f64,
}

impl SwitchState {
    pub fn start(rule: &SwitchingRule, mode: usize, x: &[f64]) -> Self {
        let mode = switching_eval(rule, mode, 0.0, x, 0.0);
        SwitchState { mode, entry: Self::frontier(rule, mode, x) }
    }

    fn frontier(rule: &SwitchingRule, mode: usize, x: &[f64]) -> f64 {
        match rule {
            SwitchingRule::Hysteresis(f) => f[mode].eval(x),
            SwitchingRule::TimeSchedule(_) => 0.0,
        }
    }

    /// Applies one evaluation; returns the previous mode on a transition.
    pub fn advance(&mut self, rule: &SwitchingRule, x: &[f64], t: f64) -> Option<usize> {
        let next = switching_eval(rule, self.mode, self.entry, x, t);
        if next != self.mode {
            let from = self.mode;
            self.mode = next;
            self.entry = Self::frontier(rule, next, x);
            Some(from)
        } else {
            if self.entry == 0.0 {
                self.entry = Self::frontier(rule, self.mode, x);
            }
            None
        }
    }
}
