//! A-posteriori certification of a controller: LMI residuals, Lyapunov
//! monotonicity and jumps on a noise-free run, decay, and empirical
//! attenuation over seeded noisy runs. Consumes only the plant, the
//! controller and simulated trajectories.

use std::fmt::Write as _;

use nalgebra::Cholesky;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::ControllerSet;
use crate::model::SystemSpec;
use crate::sdp::FamilyResidual;
use crate::sim::{hinf_metrics, lyapunov_samples, simulate, SimConfig, SimError, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub residual_tol: f64,
    pub dt: f64,
    /// Horizon of the noise-free run.
    pub t_end: f64,
    /// Horizon of each noisy run.
    pub hinf_t_end: f64,
    pub runs: usize,
    pub sigma: f64,
    pub seed: u64,
    /// Between-switch tolerance: `V(k+1) ≤ V(k)·(1+rel) + abs`.
    pub lyapunov_rel: f64,
    pub lyapunov_abs: f64,
    /// Jump tolerance: `v⁺/v⁻ ≤ μ·(1+jump_rel)`.
    pub jump_rel: f64,
    pub settle_time: f64,
    pub settle_bound: f64,
    /// Overrides the plant's initial states for the noise-free run.
    pub initial_states: Option<Vec<Vec<f64>>>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-7,
            dt: 1e-3,
            t_end: 30.0,
            hinf_t_end: 30.0,
            runs: 20,
            sigma: 0.01,
            seed: 2024,
            lyapunov_rel: 1e-8,
            lyapunov_abs: 1e-10,
            jump_rel: 1e-6,
            settle_time: 25.0,
            settle_bound: 1e-3,
            initial_states: None,
        }
    }
}

impl VerifyConfig {
    /// Seed of the first noise channel of run `r`.
    pub fn run_seed(&self, r: usize) -> u64 {
        self.seed.wrapping_add((r as u64) << 32)
    }

    pub fn noise_free(&self) -> SimConfig {
        SimConfig { t_end: self.t_end, dt: self.dt, noise: Vec::new(), initial_states: self.initial_states.clone(), stride: 1 }
    }

    pub fn noisy(&self, sys: &SystemSpec, r: usize) -> SimConfig {
        SimConfig { t_end: self.hinf_t_end, dt: self.dt, ..Default::default() }
            .with_noise(sys.n(), self.sigma, self.run_seed(r))
            .from_zero(sys)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualCheck {
    pub tol: f64,
    pub families: Vec<FamilyResidual>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCheck {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub samples: usize,
    pub increases: usize,
    /// Largest excess over the tolerance band (0 when none).
    pub worst_excess: f64,
    pub initial_value: f64,
    pub diverged: bool,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub t: f64,
    pub subsystem: usize,
    pub from: usize,
    pub to: usize,
    pub v_minus: f64,
    pub v_plus: f64,
    /// `None` when `v⁻ = 0 < v⁺`.
    pub ratio: Option<f64>,
    pub mu: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpCheck {
    pub rel_tol: f64,
    pub transitions: Vec<JumpRecord>,
    pub worst_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    pub from_time: f64,
    pub bound: f64,
    /// `max ‖x_i(t)‖∞` over `t ≥ from_time`, per subsystem.
    pub peaks: Vec<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HinfSubsystem {
    pub subsystem: usize,
    pub zeta: f64,
    /// State-energy ratio per run; `None` for a divergent run.
    pub state_ratios: Vec<Option<f64>>,
    pub output_ratios: Vec<Option<f64>>,
    pub worst_state_ratio: f64,
    pub worst_output_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HinfCheck {
    pub runs: usize,
    pub sigma: f64,
    pub horizon: f64,
    pub subsystems: Vec<HinfSubsystem>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexSpectrum {
    pub subsystem: usize,
    pub mode: usize,
    pub rule: usize,
    pub gain_rule: usize,
    /// `(re, im)` pairs.
    pub eigenvalues: Vec<(f64, f64)>,
    /// Some real part is `≥ 0`. Informative only.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub residuals: ResidualCheck,
    pub lyapunov: LyapunovCheck,
    pub jumps: JumpCheck,
    pub decay: DecayCheck,
    pub hinf: HinfCheck,
    pub spectra: Vec<VertexSpectrum>,
    pub pass: bool,
}

/// `A_s + B_s K_k M_k⁻¹ C_s` eigenvalues for every `(i, j, s, k)`.
pub fn closed_loop_vertex_spectra(sys: &SystemSpec, ctrl: &ControllerSet) -> Vec<VertexSpectrum> {
    let mut out = Vec::new();
    for (i, sub) in sys.subsystems.iter().enumerate() {
        for (j, mode) in sub.modes.iter().enumerate() {
            let Some(gains) = ctrl.rules(i, j) else { continue };
            for (s, rule) in mode.rules.iter().enumerate() {
                for (k, g) in gains.iter().enumerate() {
                    let Some(chol) = Cholesky::new(g.mixing.clone()) else { continue };
                    if g.gain.ncols() != rule.c.nrows() || g.gain.nrows() != rule.b.ncols() {
                        continue;
                    }
                    let closed = &rule.a + &rule.b * &g.gain * chol.solve(&rule.c);
                    let eigenvalues: Vec<(f64, f64)> =
                        closed.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
                    let flagged = eigenvalues.iter().any(|(re, _)| *re >= 0.0);
                    out.push(VertexSpectrum { subsystem: i, mode: j, rule: s, gain_rule: k, eigenvalues, flagged });
                }
            }
        }
    }
    out
}

fn check_residuals(sys: &SystemSpec, ctrl: &ControllerSet, tol: f64) -> ResidualCheck {
    match ctrl.recheck(sys, tol) {
        Ok(r) => ResidualCheck { tol, families: r.by_family(), error: None, pass: r.pass },
        Err(e) => ResidualCheck { tol, families: Vec::new(), error: Some(e.to_string()), pass: false },
    }
}

fn check_stability(
    sys: &SystemSpec,
    ctrl: &ControllerSet,
    cfg: &VerifyConfig,
) -> (LyapunovCheck, JumpCheck, DecayCheck) {
    let (traj, diverged, sim_error): (Option<Trajectory>, bool, Option<String>) =
        match simulate(sys, Some(ctrl), &cfg.noise_free()) {
            Ok(t) => (Some(t), false, None),
            Err(SimError::Divergence { t, partial }) => (Some(*partial), true, Some(format!("diverged at t = {t}"))),
            Err(e) => (None, false, Some(e.to_string())),
        };
    let mut lyap = LyapunovCheck {
        rel_tol: cfg.lyapunov_rel,
        abs_tol: cfg.lyapunov_abs,
        samples: 0,
        increases: 0,
        worst_excess: 0.0,
        initial_value: 0.0,
        diverged,
        error: sim_error,
        pass: false,
    };
    let mut jumps = JumpCheck { rel_tol: cfg.jump_rel, transitions: Vec::new(), worst_ratio: 0.0, pass: false };
    let mut decay = DecayCheck { from_time: cfg.settle_time, bound: cfg.settle_bound, peaks: Vec::new(), pass: false };
    let Some(traj) = traj else {
        return (lyap, jumps, decay);
    };
    match lyapunov_samples(sys, &traj, ctrl) {
        Ok(series) => {
            let inc = series.increases(cfg.lyapunov_rel, cfg.lyapunov_abs);
            lyap.samples = series.total.len();
            lyap.increases = inc.len();
            lyap.worst_excess = inc.iter().map(|(_, e)| *e).fold(0.0, f64::max);
            lyap.initial_value = series.total.first().copied().unwrap_or(0.0);
            lyap.pass = !diverged && lyap.error.is_none() && inc.is_empty();
            for j in &series.jumps {
                let mu = ctrl.meta.options.mu.get(j.subsystem, j.from, j.to);
                let ratio = j.ratio();
                let pass = ratio <= mu * (1.0 + cfg.jump_rel);
                jumps.worst_ratio = jumps.worst_ratio.max(ratio.min(f64::MAX));
                jumps.transitions.push(JumpRecord {
                    t: j.t,
                    subsystem: j.subsystem,
                    from: j.from,
                    to: j.to,
                    v_minus: j.v_minus,
                    v_plus: j.v_plus,
                    ratio: ratio.is_finite().then_some(ratio),
                    mu,
                    pass,
                });
            }
            jumps.pass = !diverged && jumps.transitions.iter().all(|r| r.pass);
        }
        Err(e) => lyap.error = Some(e.to_string()),
    }
    decay.peaks = (0..sys.n()).map(|i| traj.peak_after(i, cfg.settle_time)).collect();
    let reached = traj.t.last().is_some_and(|t| *t >= cfg.settle_time);
    decay.pass = !diverged && reached && decay.peaks.iter().all(|p| *p <= cfg.settle_bound);
    (lyap, jumps, decay)
}

fn check_hinf(sys: &SystemSpec, ctrl: &ControllerSet, cfg: &VerifyConfig) -> HinfCheck {
    let zeta = ctrl.meta.zeta.clone();
    let per_run: Vec<Option<Vec<(f64, f64)>>> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| {
            let traj = simulate(sys, Some(ctrl), &cfg.noisy(sys, r)).ok()?;
            Some(hinf_metrics(&traj, &zeta).iter().map(|m| (m.state_ratio, m.output_ratio)).collect())
        })
        .collect();
    let subsystems: Vec<HinfSubsystem> = (0..sys.n())
        .map(|i| {
            let state_ratios: Vec<Option<f64>> = per_run.iter().map(|r| r.as_ref().map(|v| v[i].0)).collect();
            let output_ratios: Vec<Option<f64>> = per_run.iter().map(|r| r.as_ref().map(|v| v[i].1)).collect();
            let worst = |v: &[Option<f64>]| v.iter().map(|r| r.unwrap_or(f64::MAX)).fold(0.0, f64::max);
            let z = zeta.get(i).copied().unwrap_or(f64::NAN);
            let worst_state_ratio = worst(&state_ratios);
            HinfSubsystem {
                subsystem: i,
                zeta: z,
                pass: state_ratios.iter().all(|r| r.is_some_and(|v| v <= z)),
                worst_output_ratio: worst(&output_ratios),
                worst_state_ratio,
                state_ratios,
                output_ratios,
            }
        })
        .collect();
    let pass = sys.n() < 2 || subsystems.iter().all(|s| s.pass);
    HinfCheck { runs: cfg.runs, sigma: cfg.sigma, horizon: cfg.hinf_t_end, subsystems, pass }
}

/// Runs every check. Simulation failures mark checks failed; they are not errors.
pub fn certify(sys: &SystemSpec, ctrl: &ControllerSet, cfg: &VerifyConfig) -> VerificationReport {
    let residuals = check_residuals(sys, ctrl, cfg.residual_tol);
    let (lyapunov, jumps, decay) = check_stability(sys, ctrl, cfg);
    let hinf = check_hinf(sys, ctrl, cfg);
    let spectra = closed_loop_vertex_spectra(sys, ctrl);
    let pass = residuals.pass && lyapunov.pass && jumps.pass && decay.pass && hinf.pass;
    VerificationReport { residuals, lyapunov, jumps, decay, hinf, spectra, pass }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let r = &self.residuals;
        let _ = writeln!(s, "[{}] LMI residuals (tol {:e})", verdict(r.pass), r.tol);
        for f in &r.families {
            let _ = writeln!(s, "       {:<7} {:>3} blocks, worst slack {:+.3e}", f.family.to_string(), f.blocks, f.worst_slack);
        }
        if let Some(e) = &r.error {
            let _ = writeln!(s, "       error: {e}");
        }
        let l = &self.lyapunov;
        let _ = writeln!(
            s,
            "[{}] Lyapunov between switches: {} increases over {} samples (rel {:e}, abs {:e})",
            verdict(l.pass),
            l.increases,
            l.samples,
            l.rel_tol,
            l.abs_tol
        );
        if let Some(e) = &l.error {
            let _ = writeln!(s, "       {e}");
        }
        let j = &self.jumps;
        let _ = writeln!(
            s,
            "[{}] jumps: {} transitions, worst ratio {:.9} (rel tol {:e})",
            verdict(j.pass),
            j.transitions.len(),
            j.worst_ratio,
            j.rel_tol
        );
        let d = &self.decay;
        let peaks: Vec<String> = d.peaks.iter().map(|p| format!("{p:.3e}")).collect();
        let _ = writeln!(
            s,
            "[{}] decay: max |x|inf after t = {} is [{}] (bound {:e})",
            verdict(d.pass),
            d.from_time,
            peaks.join(", "),
            d.bound
        );
        let h = &self.hinf;
        let _ = writeln!(s, "[{}] attenuation over {} runs (sigma {}, {} s)", verdict(h.pass), h.runs, h.sigma, h.horizon);
        for sub in &h.subsystems {
            let _ = writeln!(
                s,
                "       subsystem {}: worst state ratio {:.3e} vs zeta^2 {} (output ratio {:.3e})",
                sub.subsystem, sub.worst_state_ratio, sub.zeta, sub.worst_output_ratio
            );
        }
        let flagged = self.spectra.iter().filter(|v| v.flagged).count();
        let _ = writeln!(s, "[info] vertex spectra: {} vertices, {} with a nonnegative real part", self.spectra.len(), flagged);
        let _ = writeln!(s, "overall: {}", verdict(self.pass));
        s
    }
}
