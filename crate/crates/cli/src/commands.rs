use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use tslmi::controller::SynthError;
use tslmi::lmi::{Layout, LmiError};
use tslmi::model::{bundled_system, parse_unchecked, serialize_system, Severity};
use tslmi::sdp::ResidualReport;
use tslmi::sim::{hinf_metrics, lyapunov_samples, trajectory_csv, SimError, TrajectorySummary};
use tslmi::{certify, simulate, synthesize, validate, ControllerSet, SystemSpec, Trajectory, VerificationReport};

use crate::checks::{self, CheckResult};
use crate::config::RunConfig;
use crate::error::{CliError, Exit};

pub const DEFAULT_OUT: &str = "tslmi-out";

/// Exit status plus the text meant for standard output.
#[derive(Debug)]
pub struct Outcome {
    pub exit: Exit,
    pub text: String,
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.paths.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
}

fn echo_config(dir: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    write(dir, "config.toml", &cfg.to_toml())
}

/// Reads and parses a plant file without judging it.
pub fn read_system(path: &Path) -> Result<SystemSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_unchecked(&text).map_err(|e| CliError::new(Exit::Io, format!("{}: {e}", path.display())))
}

/// The configured plant, or the bundled example; rejects plants with validation errors.
pub fn load_system(cfg: &RunConfig) -> Result<SystemSpec, CliError> {
    let Some(path) = &cfg.paths.system else {
        return Ok(bundled_system());
    };
    let sys = read_system(path)?;
    let report = validate(&sys);
    if report.has_errors() {
        let mut msg = format!("{}: plant fails validation", path.display());
        for v in report.violations.iter().filter(|v| v.severity == Severity::Error) {
            let _ = write!(msg, "\n  {}: {}", v.subject, v.message);
        }
        return Err(CliError::new(Exit::Validation, msg));
    }
    Ok(sys)
}

pub fn cmd_validate(path: &Path) -> Result<Outcome, CliError> {
    let sys = read_system(path)?;
    let report = validate(&sys);
    let mut text = String::new();
    if report.is_empty() {
        let _ = writeln!(text, "{}: ok ({} subsystems)", path.display(), sys.n());
        return Ok(Outcome { exit: Exit::Ok, text });
    }
    for v in &report.violations {
        let sev = match v.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let _ = writeln!(text, "{sev}: [{:?}] {}: {}", v.category, v.subject, v.message);
    }
    Ok(Outcome { exit: Exit::Validation, text })
}

fn synth_exit(e: &SynthError) -> Exit {
    match e {
        SynthError::Infeasible { .. } | SynthError::Lmi(LmiError::LayoutInfeasible { .. }) => Exit::Infeasible,
        SynthError::Lmi(_) => Exit::Validation,
        SynthError::Solver { .. } | SynthError::Uncertified { .. } | SynthError::MixingIndefinite { .. } => Exit::Solver,
    }
}

pub struct Attempt {
    pub layout: Layout,
    pub result: Result<(ControllerSet, ResidualReport), SynthError>,
}

/// Synthesis over the configured layouts; the first certified one is chosen.
pub struct SynthRun {
    pub attempts: Vec<Attempt>,
    pub chosen: Option<usize>,
}

impl SynthRun {
    pub fn run(sys: &SystemSpec, cfg: &RunConfig) -> Self {
        let attempts: Vec<Attempt> = cfg
            .synthesis
            .layout
            .layouts()
            .into_iter()
            .map(|layout| Attempt { layout, result: synthesize(sys, &cfg.synthesis_options(layout), &cfg.solver) })
            .collect();
        let chosen = attempts.iter().position(|a| a.result.as_ref().is_ok_and(|(_, r)| r.pass));
        SynthRun { attempts, chosen }
    }

    pub fn controller(&self) -> Option<&ControllerSet> {
        self.chosen.and_then(|i| self.attempts[i].result.as_ref().ok()).map(|(c, _)| c)
    }

    pub fn exit(&self) -> Exit {
        if self.chosen.is_some() {
            return Exit::Ok;
        }
        let codes: Vec<Exit> = self.attempts.iter().filter_map(|a| a.result.as_ref().err()).map(synth_exit).collect();
        if codes.contains(&Exit::Solver) {
            Exit::Solver
        } else if codes.contains(&Exit::Validation) {
            Exit::Validation
        } else {
            Exit::Infeasible
        }
    }

    pub fn log(&self) -> String {
        let mut s = String::new();
        for a in &self.attempts {
            let _ = writeln!(s, "layout {}", a.layout);
            match &a.result {
                Ok((ctrl, report)) => {
                    let m = &ctrl.meta;
                    let _ = writeln!(s, "  status: feasible ({} iterations, {})", m.solver.iterations, m.solver.message);
                    let _ = writeln!(s, "  blocks: {}, scalars N = {}", m.blocks, m.scalars);
                    let _ = writeln!(s, "  zeta^2: {:?} (sum {})", m.zeta, m.zeta.iter().sum::<f64>());
                    let _ = writeln!(
                        s,
                        "  residuals (tol {:e}): {}",
                        report.tol,
                        if report.pass { "all blocks certified" } else { "FAILED" }
                    );
                    for f in report.by_family() {
                        let _ = writeln!(s, "    {:<7} {:>3} blocks, worst slack {:+.3e}", f.family.to_string(), f.blocks, f.worst_slack);
                    }
                }
                Err(e) => {
                    let _ = writeln!(s, "  status: {e}");
                }
            }
        }
        match self.chosen {
            Some(i) => {
                let _ = writeln!(s, "selected layout: {}", self.attempts[i].layout);
            }
            None => {
                let _ = writeln!(s, "no layout certified");
            }
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        for a in &self.attempts {
            if let Ok((ctrl, _)) = &a.result {
                write(dir, &format!("controller-{}.json", a.layout), &ctrl.to_json())?;
            }
        }
        if let Some(ctrl) = self.controller() {
            write(dir, "controller.json", &ctrl.to_json())?;
        }
        write(dir, "synthesis.log", &self.log())
    }
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = load_system(cfg)?;
    let dir = out_dir(cfg)?;
    echo_config(&dir, cfg)?;
    let run = SynthRun::run(&sys, cfg);
    run.write(&dir)?;
    Ok(Outcome { exit: run.exit(), text: run.log() })
}

/// Controller from the configured file, or synthesized in-process.
fn obtain_controller(sys: &SystemSpec, cfg: &RunConfig) -> Result<ControllerSet, CliError> {
    if let Some(path) = &cfg.paths.controller {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let ctrl = ControllerSet::from_json(&text).map_err(|e| CliError::io(path, e))?;
        ctrl.check_against(sys).map_err(|e| CliError::io(path, e))?;
        return Ok(ctrl);
    }
    let run = SynthRun::run(sys, cfg);
    run.controller().cloned().ok_or_else(|| CliError::new(run.exit(), run.log()))
}

fn trajectory_artifacts(sys: &SystemSpec, ctrl: &ControllerSet, traj: &Trajectory) -> (String, String) {
    let lyap = lyapunov_samples(sys, traj, ctrl).ok();
    let csv = trajectory_csv(traj, lyap.as_ref());
    let summary = TrajectorySummary::new(traj, hinf_metrics(traj, &ctrl.meta.zeta));
    (csv, summary.to_json())
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = load_system(cfg)?;
    let ctrl = obtain_controller(&sys, cfg)?;
    let dir = out_dir(cfg)?;
    echo_config(&dir, cfg)?;
    let (traj, exit, note) = match simulate(&sys, Some(&ctrl), &cfg.sim_config(sys.n())) {
        Ok(t) => (t, Exit::Ok, String::new()),
        Err(SimError::Divergence { t, partial }) => (*partial, Exit::Divergence, format!("diverged at t = {t}\n")),
        Err(e) => return Err(CliError::new(Exit::Validation, e.to_string())),
    };
    let (csv, summary) = trajectory_artifacts(&sys, &ctrl, &traj);
    write(&dir, "trajectory.csv", &csv)?;
    write(&dir, "summary.json", &summary)?;
    let mut text = note;
    let _ = writeln!(text, "{} samples, {} switches written to {}", traj.len(), traj.switches.len(), dir.display());
    Ok(Outcome { exit, text })
}

fn verify_exit(report: &VerificationReport) -> Exit {
    if report.pass {
        Exit::Ok
    } else if report.lyapunov.diverged {
        Exit::Divergence
    } else {
        Exit::Validation
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = load_system(cfg)?;
    let ctrl = obtain_controller(&sys, cfg)?;
    let dir = out_dir(cfg)?;
    echo_config(&dir, cfg)?;
    let report = certify(&sys, &ctrl, &cfg.verify);
    let text = report.summary_text();
    write(&dir, "verification.json", &report.to_json())?;
    write(&dir, "verification.txt", &text)?;
    Ok(Outcome { exit: verify_exit(&report), text })
}

/// validate → synthesize → simulate → verify, plus every acceptance check.
pub fn cmd_repro(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = load_system(cfg)?;
    let dir = out_dir(cfg)?;
    echo_config(&dir, cfg)?;
    write(&dir, "system.sys", &serialize_system(&sys))?;
    let mut text = String::new();

    let run = SynthRun::run(&sys, cfg);
    run.write(&dir)?;
    text.push_str(&run.log());
    let mut results: Vec<CheckResult> = Vec::new();
    let mut exit = Exit::Ok;
    results.push(checks::feasibility(&run));

    match run.controller() {
        Some(ctrl) => {
            let noise_free = tslmi::SimConfig { stride: cfg.simulation.stride, ..cfg.verify.noise_free() };
            let first = simulate(&sys, Some(ctrl), &noise_free);
            let artifacts = first.as_ref().ok().map(|t| trajectory_artifacts(&sys, ctrl, t));
            if let Some((csv, summary)) = &artifacts {
                write(&dir, "trajectory.csv", csv)?;
                write(&dir, "summary.json", summary)?;
            }
            let report = certify(&sys, ctrl, &cfg.verify);
            write(&dir, "verification.json", &report.to_json())?;
            write(&dir, "verification.txt", &report.summary_text())?;
            text.push_str(&report.summary_text());
            results.push(checks::closed_loop(&report));
            results.push(checks::attenuation(&report));
            results.push(checks::determinism(&sys, cfg, &run, &noise_free, artifacts.as_ref()));
            if report.lyapunov.diverged {
                exit = Exit::Divergence;
            }
        }
        None => {
            exit = run.exit();
            for (id, name) in [(2, "closed-loop stabilization"), (3, "empirical attenuation"), (9, "determinism")] {
                results.push(CheckResult::fail(id, name, "no certified controller"));
            }
        }
    }
    results.push(checks::enumeration(&sys, cfg));
    results.push(checks::encoder(&sys, cfg));
    results.push(checks::interconnection_bound());
    results.push(checks::lti(&cfg.solver));
    results.push(checks::integrator_order());
    results.sort_by_key(|r| r.id);

    let lines = checks::render(&results);
    text.push_str(&lines);
    write(&dir, "acceptance.txt", &lines)?;
    write(&dir, "acceptance.json", &serde_json::to_string_pretty(&results).expect("checks serialize"))?;
    let all = results.iter().all(|r| r.pass);
    if exit == Exit::Ok && !all {
        exit = Exit::Validation;
    }
    Ok(Outcome { exit, text })
}
