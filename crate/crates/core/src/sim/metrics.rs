use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Trajectory;
use crate::controller::ControllerSet;
use crate::linalg::Vector;
use crate::model::{blend, membership_eval, MembershipError, SystemSpec};

#[derive(Debug, Error)]
pub enum LyapunovError {
    #[error("subsystem {i}: {source}")]
    Membership { i: usize, source: MembershipError },
    #[error("blended Lyapunov block of subsystem {i}, mode {j} is not positive definite at t = {t}")]
    Indefinite { i: usize, j: usize, t: f64 },
}

/// A switch with the Lyapunov values just before and after it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpSample {
    pub t: f64,
    pub subsystem: usize,
    pub from: usize,
    pub to: usize,
    pub v_minus: f64,
    pub v_plus: f64,
}

impl JumpSample {
    /// `v⁺/v⁻`, with `0/0` read as 0.
    pub fn ratio(&self) -> f64 {
        if self.v_minus > 0.0 {
            self.v_plus / self.v_minus
        } else if self.v_plus == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSeries {
    /// `v_i(t_k)` in the mode in force from sample `k` on.
    pub v: Vec<Vec<f64>>,
    /// `v_i(t_k)` in the mode in force over the step that ended at `k`.
    pub v_pre: Vec<Vec<f64>>,
    /// `V = Σ_i v_i`.
    pub total: Vec<f64>,
    pub total_pre: Vec<f64>,
    pub jumps: Vec<JumpSample>,
}

impl LyapunovSeries {
    /// Samples `k+1` where `V_pre(k+1) > V(k)·(1+rel) + abs`.
    pub fn increases(&self, rel: f64, abs: f64) -> Vec<(usize, f64)> {
        (1..self.total.len())
            .filter_map(|k| {
                let excess = self.total_pre[k] - (self.total[k - 1] * (1.0 + rel) + abs);
                (excess > 0.0).then_some((k, excess))
            })
            .collect()
    }
}

/// Evaluates `v = xᵀ (Σ_s h_s X1[s])⁻¹ x` along a trajectory.
pub fn lyapunov_samples(sys: &SystemSpec, traj: &Trajectory, ctrl: &ControllerSet) -> Result<LyapunovSeries, LyapunovError> {
    let value = |i: usize, j: usize, k: usize| -> Result<f64, LyapunovError> {
        let sub = &sys.subsystems[i];
        let x = &traj.subsystems[i].x[k];
        let h = membership_eval(sub, j, x).map_err(|source| LyapunovError::Membership { i, source })?;
        let rules = &ctrl.subsystems[i].modes[j].rules;
        let p = blend(&h, rules.iter().map(|r| &r.x1));
        let chol = Cholesky::new(p).ok_or(LyapunovError::Indefinite { i, j, t: traj.t[k] })?;
        let xv = Vector::from_column_slice(x);
        Ok(xv.dot(&chol.solve(&xv)))
    };
    let n = sys.n();
    let mut v = vec![Vec::with_capacity(traj.len()); n];
    let mut v_pre = vec![Vec::with_capacity(traj.len()); n];
    for i in 0..n {
        let tr = &traj.subsystems[i];
        for k in 0..traj.len() {
            let cur = value(i, tr.mode[k], k)?;
            let pre = if tr.mode_pre[k] == tr.mode[k] { cur } else { value(i, tr.mode_pre[k], k)? };
            v[i].push(cur);
            v_pre[i].push(pre);
        }
    }
    let total = (0..traj.len()).map(|k| v.iter().map(|s| s[k]).sum()).collect();
    let total_pre = (0..traj.len()).map(|k| v_pre.iter().map(|s| s[k]).sum()).collect();
    let jumps = traj
        .switches
        .iter()
        .filter(|e| e.step < traj.len() && (traj.t[e.step] - e.t).abs() <= 0.5 * traj.dt)
        .map(|e| JumpSample {
            t: e.t,
            subsystem: e.subsystem,
            from: e.from,
            to: e.to,
            v_minus: v_pre[e.subsystem][e.step],
            v_plus: v[e.subsystem][e.step],
        })
        .collect();
    Ok(LyapunovSeries { v, v_pre, total, total_pre, jumps })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HinfMetric {
    pub subsystem: usize,
    /// `∫ x_iᵀ x_i dt` (trapezoidal).
    pub state_energy: f64,
    /// `∫ y_iᵀ y_i dt` (trapezoidal).
    pub output_energy: f64,
    /// `∫ (w_iᵀ w_i + Σ_α w_αᵀ w_α) dt`, exact for held samples.
    pub disturbance_energy: f64,
    pub state_ratio: f64,
    pub output_ratio: f64,
    pub zeta: Option<f64>,
    /// Set when the disturbance energy is zero; ratios are then reported as 0.
    pub zero_disturbance: bool,
    /// The criterion assumes a zero initial state.
    pub nonzero_initial: bool,
}

impl HinfMetric {
    pub fn within(&self) -> Option<bool> {
        self.zeta.map(|z| self.state_ratio <= z)
    }
}

fn trapezoid(t: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    (1..t.len()).map(|k| 0.5 * (t[k] - t[k - 1]) * (f(k - 1) + f(k))).sum()
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Finite-horizon attenuation ratios per subsystem.
pub fn hinf_metrics(traj: &Trajectory, zeta: &[f64]) -> Vec<HinfMetric> {
    let n = traj.subsystems.len();
    let w_energy: Vec<f64> = traj
        .subsystems
        .iter()
        .map(|tr| (1..traj.len()).map(|k| (traj.t[k] - traj.t[k - 1]) * sq(&tr.w[k - 1])).sum())
        .collect();
    let total_w: f64 = w_energy.iter().sum();
    (0..n)
        .map(|i| {
            let tr = &traj.subsystems[i];
            let state_energy = trapezoid(&traj.t, |k| sq(&tr.x[k]));
            let output_energy = trapezoid(&traj.t, |k| sq(&tr.y[k]));
            // own channel plus every peer's: with n subsystems that is all of them
            let disturbance_energy = total_w;
            let zero = disturbance_energy == 0.0;
            let ratio = |num: f64| if zero { 0.0 } else { num / disturbance_energy };
            HinfMetric {
                subsystem: i,
                state_energy,
                output_energy,
                disturbance_energy,
                state_ratio: ratio(state_energy),
                output_ratio: ratio(output_energy),
                zeta: zeta.get(i).copied(),
                zero_disturbance: zero,
                nonzero_initial: tr.x.first().is_some_and(|x| sq(x) != 0.0),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SubsystemTrace;

    fn synthetic(x: Vec<f64>, w: Vec<f64>) -> Trajectory {
        let len = x.len();
        Trajectory {
            dt: 1.0,
            stride: 1,
            t: (0..len).map(|k| k as f64).collect(),
            subsystems: vec![SubsystemTrace {
                x: x.iter().map(|v| vec![*v]).collect(),
                y: x.iter().map(|v| vec![2.0 * v]).collect(),
                u: vec![vec![0.0]; len],
                w: w.iter().map(|v| vec![*v]).collect(),
                mode: vec![0; len],
                mode_pre: vec![0; len],
            }],
            switches: vec![],
            diverged: false,
        }
    }

    #[test]
    fn zero_disturbance_guarded() {
        let m = hinf_metrics(&synthetic(vec![0.0; 5], vec![0.0; 5]), &[1.0]);
        assert!(m[0].zero_disturbance);
        assert_eq!((m[0].state_ratio, m[0].output_ratio), (0.0, 0.0));
        assert!(!m[0].nonzero_initial);
    }

    #[test]
    fn ratio_arithmetic() {
        // ∫x² = 1 (trapezoid over [0,1] with x = 1 at both ends), ∫w² = 2 over [0,1]
        let m = hinf_metrics(&synthetic(vec![1.0, 1.0], vec![2f64.sqrt(), 0.0]), &[0.6]);
        assert!((m[0].state_energy - 1.0).abs() < 1e-15);
        assert!((m[0].disturbance_energy - 2.0).abs() < 1e-15);
        assert!((m[0].state_ratio - 0.5).abs() < 1e-15);
        assert!((m[0].output_ratio - 2.0).abs() < 1e-15);
        assert_eq!(m[0].within(), Some(true));
    }

    #[test]
    fn jump_ratio_guard() {
        let j = |v_minus, v_plus| JumpSample { t: 0.0, subsystem: 0, from: 0, to: 1, v_minus, v_plus };
        assert_eq!(j(0.0, 0.0).ratio(), 0.0);
        assert_eq!(j(2.0, 1.0).ratio(), 0.5);
        assert!(j(0.0, 1.0).ratio().is_infinite());
    }
}
