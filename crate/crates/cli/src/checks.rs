//! Acceptance checks run by `repro`. Each one is self-contained and cheap.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use tslmi::jacobi::min_eigenvalue;
use tslmi::lmi::{Assignment, Family, Layout, VarShape, ZetaSpec};
use tslmi::model::parse_system;
use tslmi::sdp::ConicProgram;
use tslmi::sim::trajectory_csv;
use tslmi::{assemble_program, simulate, synthesize, Mat, SimConfig, SolverOptions, SynthesisOptions, SystemSpec, VerificationReport};

use crate::commands::SynthRun;
use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(id: u8, name: &str, pass: bool, detail: String) -> Self {
        Self { id, name: name.into(), pass, detail }
    }

    pub fn fail(id: u8, name: &str, detail: &str) -> Self {
        Self::new(id, name, false, detail.into())
    }
}

pub fn render(results: &[CheckResult]) -> String {
    let mut s = String::new();
    for r in results {
        let _ = writeln!(s, "[{}] {} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.id, r.name, r.detail);
    }
    s
}

pub const RESIDUAL_TOL: f64 = 1e-7;

pub fn feasibility(run: &SynthRun) -> CheckResult {
    let mut detail = Vec::new();
    let mut pass = false;
    for a in &run.attempts {
        match &a.result {
            Ok((_, report)) => {
                let ok = report.pass && report.worst_slack() >= -RESIDUAL_TOL;
                pass |= ok;
                detail.push(format!("{} feasible, worst slack {:+.2e}", a.layout, report.worst_slack()));
            }
            Err(e) => detail.push(format!("{}: {e}", a.layout)),
        }
    }
    CheckResult::new(1, "feasibility reproduction", pass, detail.join("; "))
}

pub fn closed_loop(report: &VerificationReport) -> CheckResult {
    let pass = report.lyapunov.pass && report.jumps.pass && report.decay.pass;
    let peaks: Vec<String> = report.decay.peaks.iter().map(|p| format!("{p:.1e}")).collect();
    let detail = format!(
        "peak |x|inf after {} s [{}] <= {:e}; {} Lyapunov increases; {} jumps, worst ratio {:.9}",
        report.decay.from_time,
        peaks.join(", "),
        report.decay.bound,
        report.lyapunov.increases,
        report.jumps.transitions.len(),
        report.jumps.worst_ratio
    );
    CheckResult::new(2, "closed-loop stabilization", pass, detail)
}

pub fn attenuation(report: &VerificationReport) -> CheckResult {
    let parts: Vec<String> = report
        .hinf
        .subsystems
        .iter()
        .map(|s| format!("subsystem {}: worst {:.2e} <= {}", s.subsystem, s.worst_state_ratio, s.zeta))
        .collect();
    CheckResult::new(3, "empirical attenuation", report.hinf.pass, format!("{} runs; {}", report.hinf.runs, parts.join("; ")))
}

/// Block and scalar counts from the plant dimensions alone.
fn expected_counts(sys: &SystemSpec) -> ([usize; 5], usize) {
    let n = sys.n();
    let mut c = [0usize; 5];
    let mut scalars = n * n.saturating_sub(1);
    for sub in &sys.subsystems {
        let (nx, p, u) = (sub.state_dim, sub.output_dim, sub.input_dim);
        let r: Vec<usize> = sub.modes.iter().map(|m| m.rules.len()).collect();
        let total: usize = r.iter().sum();
        let cubes: usize = r.iter().map(|r| r * r * r).sum();
        let squares: usize = r.iter().map(|r| r * r).sum();
        c[0] += 3 * total;
        c[1] += cubes;
        c[2] += total * total - squares;
        c[3] += cubes;
        c[4] += (n - 1) * cubes;
        scalars += total * (nx * (nx + 1) / 2 + p * (p + 1) / 2 + u * (u + 1) / 2 + u * p) + squares * nx * (nx + 1) / 2;
    }
    (c, scalars)
}

pub fn enumeration(sys: &SystemSpec, cfg: &RunConfig) -> CheckResult {
    let opts = SynthesisOptions { zeta: ZetaSpec::Fixed(vec![1.0; sys.n()]), ..cfg.synthesis_options(Layout::Coherent) };
    let program = match assemble_program(sys, &opts) {
        Ok(p) => p,
        Err(e) => return CheckResult::fail(4, "enumeration agreement", &e.to_string()),
    };
    let (want, scalars) = expected_counts(sys);
    let got: Vec<usize> = Family::ALL.iter().map(|f| program.family_count(*f)).collect();
    let pass = got == want && program.catalogue.scalar_count() == scalars;
    let detail = format!(
        "blocks {:?} (expected {:?}, total {}), scalars {} (expected {})",
        got,
        want,
        program.blocks.len(),
        program.catalogue.scalar_count(),
        scalars
    );
    CheckResult::new(4, "enumeration agreement", pass, detail)
}

fn random_assignment(rng: &mut ChaCha8Rng, program: &tslmi::LmiProgram) -> Assignment {
    let mut x = program.catalogue.zero_assignment();
    for (k, info) in program.catalogue.vars().iter().enumerate() {
        let (r, c) = info.shape.dims();
        let mut m = Mat::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0));
        if matches!(info.shape, VarShape::Symmetric(_)) {
            m = (&m + m.transpose()) * 0.5;
        }
        x.values[k] = m;
    }
    x
}

pub fn encoder(sys: &SystemSpec, cfg: &RunConfig) -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for layout in [Layout::Coherent, Layout::Literal] {
        let Ok(program) = assemble_program(sys, &cfg.synthesis_options(layout)) else { continue };
        let conic = ConicProgram::encode(&program);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..100 {
            let x = random_assignment(&mut rng, &program);
            let theta = conic.pack(&program.catalogue, &x);
            exact &= conic.decode(&program.catalogue, &theta).is_ok_and(|d| d == x);
            for (blk, enc) in program.blocks.iter().zip(&conic.blocks) {
                let diff = blk.sense.adjust(&blk.eval(&x)) - enc.eval(&theta);
                worst = worst.max(diff.amax());
            }
        }
    }
    let pass = exact && worst <= 1e-12;
    CheckResult::new(5, "encoder equivalence", pass, format!("max deviation {worst:.2e} (tol 1e-12), round trip exact: {exact}"))
}

pub fn interconnection_bound() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let r = rng.gen_range(1..=6);
        let c = rng.gen_range(1..=6);
        let sa = rng.gen_range(0.1..10.0);
        let sb = rng.gen_range(0.1..10.0);
        let a = Mat::from_fn(r, c, |_, _| sa * rng.gen_range(-1.0..1.0));
        let b = Mat::from_fn(r, c, |_, _| sb * rng.gen_range(-1.0..1.0));
        let tau = 10f64.powf(rng.gen_range(-3.0..3.0));
        let (at, bt) = (a.transpose(), b.transpose());
        let m = &at * &a * tau + &bt * &b / tau - &at * &b - &bt * &a;
        worst = worst.min(min_eigenvalue(&((&m + m.transpose()) * 0.5)));
    }
    CheckResult::new(6, "interconnection bound fuzz", worst >= -1e-9, format!("1000 instances, smallest eigenvalue {worst:.2e} (tol -1e-9)"))
}

const LTI_PLANT: &str = r#"
[system]
name = "lti"
[[subsystem]]
state_dim = 2
output_dim = 1
input_dim = 1
disturbance_dim = 1
initial_state = [1.0, 0.0]
[subsystem.switching]
kind = "schedule"
entries = [{ time = 0.0, mode = 0 }]
[[subsystem.mode]]
[[subsystem.mode.rule]]
membership = "1"
lambda = 0.0
A = [[-0.1, 1.0], [0.0, -1.0]]
B = [[-1.0], [0.5]]
Bw = [[0.0], [0.0]]
C = [[1.0, 0.2]]
"#;

pub fn lti(solver: &SolverOptions) -> CheckResult {
    let sys = parse_system(LTI_PLANT).expect("embedded plant parses");
    let rule = &sys.subsystems[0].modes[0].rules[0];
    let mut parts = Vec::new();
    let mut feasible = 0;
    let mut stable = true;
    for layout in [Layout::Coherent, Layout::Literal] {
        match synthesize(&sys, &SynthesisOptions { layout, ..Default::default() }, solver) {
            Ok((ctrl, _)) => {
                feasible += 1;
                let g = &ctrl.subsystems[0].modes[0].rules[0];
                let Some(inv) = g.mixing.clone().try_inverse() else {
                    stable = false;
                    continue;
                };
                let closed = &rule.a + &rule.b * &g.gain * inv * &rule.c;
                let abscissa = closed.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
                stable &= abscissa < 0.0;
                parts.push(format!("{layout}: spectral abscissa {abscissa:.4}"));
            }
            Err(e) => parts.push(format!("{layout}: {e}")),
        }
    }
    CheckResult::new(7, "single-subsystem LTI", feasible > 0 && stable, parts.join("; "))
}

const DECAY_PLANT: &str = r#"
[system]
name = "decay"
[[subsystem]]
state_dim = 1
output_dim = 1
input_dim = 1
disturbance_dim = 1
initial_state = [1.0]
[subsystem.switching]
kind = "schedule"
entries = [{ time = 0.0, mode = 0 }]
[[subsystem.mode]]
[[subsystem.mode.rule]]
membership = "1"
lambda = 0.0
A = [[-5.0]]
B = [[0.0]]
Bw = [[0.0]]
C = [[1.0]]
"#;

pub fn integrator_order() -> CheckResult {
    let sys = parse_system(DECAY_PLANT).expect("embedded plant parses");
    let err = |dt: f64| -> f64 {
        let traj = simulate(&sys, None, &SimConfig { t_end: 1.0, dt, ..Default::default() }).expect("decay run");
        let t = *traj.t.last().expect("samples");
        (traj.subsystems[0].x.last().expect("samples")[0] - (-5.0 * t).exp()).abs()
    };
    let e: Vec<f64> = [1e-2, 5e-3, 2.5e-3].into_iter().map(err).collect();
    let orders: Vec<f64> = e.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let pass = orders.iter().all(|o| *o >= 3.9);
    CheckResult::new(8, "integrator order", pass, format!("observed orders {:.3?} (min 3.9)", orders))
}

/// Re-runs synthesis and simulation and compares the bytes.
pub fn determinism(
    sys: &SystemSpec,
    cfg: &RunConfig,
    run: &SynthRun,
    noise_free: &SimConfig,
    first: Option<&(String, String)>,
) -> CheckResult {
    let name = "determinism";
    let (Some(i), Some(ctrl)) = (run.chosen, run.controller()) else {
        return CheckResult::fail(9, name, "no certified controller");
    };
    let layout = run.attempts[i].layout;
    let again = match synthesize(sys, &cfg.synthesis_options(layout), &cfg.solver) {
        Ok((c, _)) => c,
        Err(e) => return CheckResult::fail(9, name, &e.to_string()),
    };
    let same_ctrl = again.to_json() == ctrl.to_json();
    let same_traj = match (first, simulate(sys, Some(ctrl), noise_free)) {
        (Some(first), Ok(t)) => {
            let lyap = tslmi::sim::lyapunov_samples(sys, &t, ctrl).ok();
            let summary = tslmi::sim::TrajectorySummary::new(&t, tslmi::sim::hinf_metrics(&t, &ctrl.meta.zeta));
            trajectory_csv(&t, lyap.as_ref()) == first.0 && summary.to_json() == first.1
        }
        _ => false,
    };
    let noisy = cfg.verify.noisy(sys, 0);
    let a = simulate(sys, Some(ctrl), &noisy).map(|t| trajectory_csv(&t, None));
    let b = simulate(sys, Some(ctrl), &noisy).map(|t| trajectory_csv(&t, None));
    let same_noisy = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
    let pass = same_ctrl && same_traj && same_noisy;
    CheckResult::new(
        9,
        name,
        pass,
        format!("controller JSON identical: {same_ctrl}; trajectory CSV/JSON identical: {same_traj}; seeded noisy CSV identical: {same_noisy}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_counts_for_bundled_plant() {
        let (c, n) = expected_counts(&tslmi::model::bundled_system());
        assert_eq!(c, [24, 32, 16, 32, 32]);
        assert_eq!(n, 234);
    }

    #[test]
    fn render_marks_each_line() {
        let lines = render(&[CheckResult::new(1, "a", true, "x".into()), CheckResult::fail(2, "b", "y")]);
        assert_eq!(lines, "[PASS] 1 a: x\n[FAIL] 2 b: y\n");
    }
}
