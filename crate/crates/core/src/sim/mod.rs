//! Closed-loop simulation of the interconnected switched plant.
//!
//! Fixed-step RK4. Within a step the modes and the disturbance samples are
//! frozen; the static control law is re-evaluated at every stage. Switching
//! is checked once per step, after the state update.

mod export;
mod metrics;
mod switching;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{control_output, ControlError, ControllerSet};
use crate::linalg::{Mat, Vector};
use crate::model::{blend, membership_eval, MembershipError, SystemSpec};

pub use export::{trajectory_csv, TrajectorySummary};
pub use metrics::{hinf_metrics, lyapunov_samples, HinfMetric, JumpSample, LyapunovError, LyapunovSeries};
pub use switching::switching_eval;
use switching::SwitchState;

/// State norm beyond which a run is declared divergent.
pub const DIVERGENCE_NORM: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseChannel {
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub t_end: f64,
    pub dt: f64,
    /// One channel per subsystem; empty for noise-free runs.
    #[serde(default)]
    pub noise: Vec<NoiseChannel>,
    /// Overrides the plant's initial states.
    #[serde(default)]
    pub initial_states: Option<Vec<Vec<f64>>>,
    /// Record every `stride`-th step.
    pub stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { t_end: 30.0, dt: 1e-3, noise: Vec::new(), initial_states: None, stride: 1 }
    }
}

impl SimConfig {
    /// Gaussian channels with standard deviation `sigma`, seeded `seed, seed+1, ...`.
    pub fn with_noise(mut self, n: usize, sigma: f64, seed: u64) -> Self {
        self.noise = (0..n as u64).map(|i| NoiseChannel { sigma, seed: seed.wrapping_add(i) }).collect();
        self
    }

    pub fn from_zero(mut self, sys: &SystemSpec) -> Self {
        self.initial_states = Some(sys.subsystems.iter().map(|s| vec![0.0; s.state_dim]).collect());
        self
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    fn check(&self, sys: &SystemSpec) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be at least dt", self.t_end));
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        if !self.noise.is_empty() && self.noise.len() != sys.n() {
            return bad(format!("{} noise channels for {} subsystems", self.noise.len(), sys.n()));
        }
        if self.noise.iter().any(|c| !(c.sigma >= 0.0 && c.sigma.is_finite())) {
            return bad("noise sigma must be non-negative".into());
        }
        if let Some(x0) = &self.initial_states {
            if x0.len() != sys.n() || x0.iter().zip(&sys.subsystems).any(|(x, s)| x.len() != s.state_dim) {
                return bad("initial states do not match the subsystem dimensions".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    pub t: f64,
    /// Index into the recorded samples (valid when the step is recorded).
    pub step: usize,
    pub subsystem: usize,
    pub from: usize,
    pub to: usize,
}

/// Recorded signals of one subsystem, one entry per recorded sample.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SubsystemTrace {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    /// Disturbance held over the step that starts at this sample.
    pub w: Vec<Vec<f64>>,
    /// Mode in force from this sample on (after the switch check).
    pub mode: Vec<usize>,
    /// Mode in force over the step that ended at this sample.
    pub mode_pre: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub stride: usize,
    pub t: Vec<f64>,
    pub subsystems: Vec<SubsystemTrace>,
    pub switches: Vec<SwitchEvent>,
    /// Set when the run stopped on divergence; the arrays hold the partial run.
    pub diverged: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `max_k ‖x_i(t_k)‖∞` over samples with `t_k ≥ from`.
    pub fn peak_after(&self, i: usize, from: f64) -> f64 {
        self.t
            .iter()
            .zip(&self.subsystems[i].x)
            .filter(|(t, _)| **t >= from)
            .map(|(_, x)| x.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("controller does not fit the plant: {0}")]
    Mismatch(String),
    #[error("subsystem {i}: {source}")]
    Membership { i: usize, source: MembershipError },
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("state norm exceeded {DIVERGENCE_NORM:e} at t = {t}")]
    Divergence { t: f64, partial: Box<Trajectory> },
}

/// Per-stage evaluation of one subsystem at fixed mode.
struct Stage {
    dx: Vector,
    y: Vector,
    u: Vector,
}

fn eval_subsystem(
    sys: &SystemSpec,
    ctrl: Option<&ControllerSet>,
    i: usize,
    mode: usize,
    xs: &[Vector],
    ws: &[Vector],
) -> Result<Stage, SimError> {
    let sub = &sys.subsystems[i];
    let rules = &sub.modes[mode].rules;
    let h = membership_eval(sub, mode, xs[i].as_slice()).map_err(|source| SimError::Membership { i, source })?;
    let a = blend(&h, rules.iter().map(|r| &r.a));
    let b = blend(&h, rules.iter().map(|r| &r.b));
    let bw = blend(&h, rules.iter().map(|r| &r.bw));
    let c = blend(&h, rules.iter().map(|r| &r.c));
    let y = &c * &xs[i];
    let u = match ctrl {
        Some(ctrl) => control_output(ctrl, i, mode, &h, y.as_slice())?.u,
        None => Vector::zeros(sub.input_dim),
    };
    let mut dx = &a * &xs[i] + &b * &u + &bw * &ws[i];
    for alpha in sys.peers(i) {
        let f: Mat = blend(&h, rules.iter().map(|r| &r.couplings[&alpha].f));
        let bwa: Mat = blend(&h, rules.iter().map(|r| &r.couplings[&alpha].bw));
        dx += f * &xs[alpha] + bwa * &ws[alpha];
    }
    Ok(Stage { dx, y, u })
}

fn derivative(
    sys: &SystemSpec,
    ctrl: Option<&ControllerSet>,
    modes: &[usize],
    xs: &[Vector],
    ws: &[Vector],
) -> Result<Vec<Stage>, SimError> {
    (0..sys.n()).map(|i| eval_subsystem(sys, ctrl, i, modes[i], xs, ws)).collect()
}

fn axpy(xs: &[Vector], h: f64, ks: &[Stage]) -> Vec<Vector> {
    xs.iter().zip(ks).map(|(x, k)| x + &k.dx * h).collect()
}

/// Integrates the closed loop (or the open loop when `ctrl` is `None`).
pub fn simulate(sys: &SystemSpec, ctrl: Option<&ControllerSet>, cfg: &SimConfig) -> Result<Trajectory, SimError> {
    cfg.check(sys)?;
    if let Some(c) = ctrl {
        c.check_against(sys).map_err(|e| SimError::Mismatch(e.to_string()))?;
    }
    let n = sys.n();
    let steps = cfg.steps();
    let mut xs: Vec<Vector> = match &cfg.initial_states {
        Some(x0) => x0.iter().map(|x| Vector::from_column_slice(x)).collect(),
        None => sys.subsystems.iter().map(|s| Vector::from_column_slice(&s.initial_state)).collect(),
    };
    let mut switch: Vec<SwitchState> = sys
        .subsystems
        .iter()
        .zip(&xs)
        .map(|(s, x)| SwitchState::start(&s.switching, s.initial_mode, x.as_slice()))
        .collect();
    let mut noise: Vec<(ChaCha8Rng, Normal<f64>)> = cfg
        .noise
        .iter()
        .map(|c| (ChaCha8Rng::seed_from_u64(c.seed), Normal::new(0.0, c.sigma).expect("sigma checked")))
        .collect();

    let mut traj = Trajectory {
        dt: cfg.dt,
        stride: cfg.stride,
        t: Vec::with_capacity(steps / cfg.stride + 1),
        subsystems: vec![SubsystemTrace::default(); n],
        switches: Vec::new(),
        diverged: false,
    };
    let mut mode_pre: Vec<usize> = switch.iter().map(|s| s.mode).collect();

    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let ws: Vec<Vector> = if k < steps && !noise.is_empty() {
            noise
                .iter_mut()
                .zip(&sys.subsystems)
                .map(|((rng, dist), s)| Vector::from_fn(s.disturbance_dim, |_, _| dist.sample(rng)))
                .collect()
        } else {
            sys.subsystems.iter().map(|s| Vector::zeros(s.disturbance_dim)).collect()
        };
        let modes: Vec<usize> = switch.iter().map(|s| s.mode).collect();
        let k1 = derivative(sys, ctrl, &modes, &xs, &ws)?;
        if k % cfg.stride == 0 {
            traj.t.push(t);
            for (i, tr) in traj.subsystems.iter_mut().enumerate() {
                tr.x.push(xs[i].as_slice().to_vec());
                tr.y.push(k1[i].y.as_slice().to_vec());
                tr.u.push(k1[i].u.as_slice().to_vec());
                tr.w.push(ws[i].as_slice().to_vec());
                tr.mode.push(modes[i]);
                tr.mode_pre.push(mode_pre[i]);
            }
        }
        if k == steps {
            break;
        }
        let h = cfg.dt;
        let k2 = derivative(sys, ctrl, &modes, &axpy(&xs, h / 2.0, &k1), &ws)?;
        let k3 = derivative(sys, ctrl, &modes, &axpy(&xs, h / 2.0, &k2), &ws)?;
        let k4 = derivative(sys, ctrl, &modes, &axpy(&xs, h, &k3), &ws)?;
        for i in 0..n {
            xs[i] += (&k1[i].dx + &k2[i].dx * 2.0 + &k3[i].dx * 2.0 + &k4[i].dx) * (h / 6.0);
        }
        let t_next = (k + 1) as f64 * cfg.dt;
        if xs.iter().any(|x| !(x.norm() <= DIVERGENCE_NORM)) {
            traj.diverged = true;
            return Err(SimError::Divergence { t: t_next, partial: Box::new(traj) });
        }
        mode_pre = modes;
        for (i, (state, sub)) in switch.iter_mut().zip(&sys.subsystems).enumerate() {
            if let Some(from) = state.advance(&sub.switching, xs[i].as_slice(), t_next) {
                traj.switches.push(SwitchEvent {
                    t: t_next,
                    step: (k + 1) / cfg.stride,
                    subsystem: i,
                    from,
                    to: state.mode,
                });
            }
        }
    }
    Ok(traj)
}
