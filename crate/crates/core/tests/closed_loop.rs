mod common;

use proptest::prelude::*;
use tslmi::controller::control_output;
use tslmi::lmi::{Layout, ZetaSpec};
use tslmi::model::bundled_system;
use tslmi::sim::{trajectory_csv, SimError, TrajectorySummary};
use tslmi::verify::{certify, VerificationReport, VerifyConfig};
use tslmi::{simulate, synthesize, ControllerSet, Mat, SimConfig, SolverOptions, SynthesisOptions, SystemSpec};

fn siv_controller(layout: Layout) -> (SystemSpec, ControllerSet) {
    let sys = bundled_system();
    let opts = SynthesisOptions { layout, zeta: ZetaSpec::Fixed(vec![1.7, 1.5]), lambda: Some(-6.0), ..Default::default() };
    let (ctrl, _) = synthesize(&sys, &opts, &SolverOptions::default()).unwrap();
    (sys, ctrl)
}

fn stable_lti() -> SystemSpec {
    common::lti_plant(&[vec![-0.1, 1.0], vec![0.0, -1.0]], &[vec![-1.0], vec![0.5]], &[vec![1.0, 0.2]], &[1.0, 0.0])
}

#[test]
fn rk4_order_on_scalar_decay() {
    let a = -5.0;
    let sys = common::lti_plant(&[vec![a]], &[vec![0.0]], &[vec![1.0]], &[1.0]);
    let err = |dt: f64| {
        let cfg = SimConfig { t_end: 1.0, dt, ..Default::default() };
        let traj = simulate(&sys, None, &cfg).unwrap();
        let t = *traj.t.last().unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        (traj.subsystems[0].x.last().unwrap()[0] - (a * t).exp()).abs()
    };
    let e: Vec<f64> = [1e-2, 5e-3, 2.5e-3].iter().map(|dt| err(*dt)).collect();
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 3.9, "observed order {order} from errors {e:?}");
    }
}

#[test]
fn seeded_runs_are_byte_identical() {
    let (sys, ctrl) = siv_controller(Layout::Coherent);
    let cfg = SimConfig { t_end: 5.0, stride: 10, ..Default::default() }.with_noise(2, 0.01, 99);
    let run = || {
        let traj = simulate(&sys, Some(&ctrl), &cfg).unwrap();
        let summary = TrajectorySummary::new(&traj, tslmi::sim::hinf_metrics(&traj, &ctrl.meta.zeta));
        (trajectory_csv(&traj, None), summary.to_json())
    };
    let (a, b) = (run(), run());
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert_eq!(a.0.lines().count(), 1 + 501);
    let other = simulate(&sys, Some(&ctrl), &cfg.clone().with_noise(2, 0.01, 100)).unwrap();
    assert_ne!(trajectory_csv(&other, None), a.0);
}

#[test]
fn zero_dynamics_gives_constant_csv() {
    let sys = common::lti_plant(&[vec![0.0, 0.0], vec![0.0, 0.0]], &[vec![0.0], vec![0.0]], &[vec![1.0, 0.0]], &[0.3, -0.7]);
    let traj = simulate(&sys, None, &SimConfig { t_end: 1.0, dt: 1e-2, ..Default::default() }).unwrap();
    assert_eq!(traj.len(), 101);
    assert!(traj.subsystems[0].x.iter().all(|x| x == &vec![0.3, -0.7]));
}

#[test]
fn bundled_closed_loop_certifies() {
    let mut any = false;
    for layout in [Layout::Coherent, Layout::Literal] {
        let (sys, ctrl) = siv_controller(layout);
        let report = certify(&sys, &ctrl, &VerifyConfig::default());
        print!("{layout}\n{}", report.summary_text());
        assert!(report.residuals.pass);
        assert!(report.lyapunov.pass && report.lyapunov.increases == 0);
        assert!(report.jumps.pass);
        assert!(report.jumps.transitions.iter().all(|j| j.ratio.unwrap() <= j.mu * (1.0 + 1e-6)));
        assert!(report.decay.pass && report.decay.peaks.iter().all(|p| *p <= 1e-3));
        assert!(report.hinf.pass);
        assert_eq!(report.hinf.subsystems[0].state_ratios.len(), 20);
        assert_eq!(report.spectra.len(), 2 * 2 * 2 * 2);
        let back = VerificationReport::from_json(&report.to_json()).unwrap();
        assert_eq!(back, report);
        any |= report.pass;
    }
    assert!(any);
}

#[test]
fn zeroed_gain_on_unstable_variant_fails_lyapunov() {
    let sys = stable_lti();
    let (mut ctrl, _) = synthesize(&sys, &SynthesisOptions::default(), &SolverOptions::default()).unwrap();
    for g in &mut ctrl.subsystems[0].modes[0].rules {
        g.gain.fill(0.0);
    }
    let variant = common::lti_plant(&[vec![0.5, 1.0], vec![0.0, -1.0]], &[vec![-1.0], vec![0.5]], &[vec![1.0, 0.2]], &[1.0, 0.0]);
    let a = Mat::from_row_slice(2, 2, &[0.5, 1.0, 0.0, -1.0]);
    assert!(a.complex_eigenvalues().iter().any(|z| z.re > 0.0));
    let cfg = VerifyConfig { t_end: 10.0, hinf_t_end: 5.0, runs: 2, ..Default::default() };
    let report = certify(&variant, &ctrl, &cfg);
    assert!(!report.lyapunov.pass);
    assert!(report.lyapunov.increases > 0);
    assert!(!report.pass);
    assert!(report.spectra[0].flagged);
}

#[test]
fn no_switches_means_vacuous_jump_check() {
    let sys = stable_lti();
    let (ctrl, _) = synthesize(&sys, &SynthesisOptions::default(), &SolverOptions::default()).unwrap();
    let cfg = VerifyConfig { t_end: 10.0, runs: 2, hinf_t_end: 2.0, ..Default::default() };
    let report = certify(&sys, &ctrl, &cfg);
    assert!(report.jumps.pass && report.jumps.transitions.is_empty());
    assert!(report.lyapunov.pass);
    assert!(report.residuals.pass);
}

#[test]
fn divergence_fails_checks_instead_of_erroring() {
    let sys = stable_lti();
    let (mut ctrl, _) = synthesize(&sys, &SynthesisOptions::default(), &SolverOptions::default()).unwrap();
    ctrl.subsystems[0].modes[0].rules[0].gain.fill(-1e4);
    assert!(matches!(
        simulate(&sys, Some(&ctrl), &SimConfig { t_end: 10.0, ..Default::default() }),
        Err(SimError::Divergence { .. })
    ));
    let report = certify(&sys, &ctrl, &VerifyConfig { t_end: 10.0, runs: 1, hinf_t_end: 1.0, ..Default::default() });
    assert!(report.lyapunov.diverged);
    assert!(!report.lyapunov.pass && !report.decay.pass);
    assert!(report.summary_text().contains("FAIL"));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn control_law_is_homogeneous(c in -10.0f64..10.0, y in prop::collection::vec(-5.0f64..5.0, 3), h0 in 0.0f64..1.0) {
        let (_, ctrl) = siv_controller_cached();
        let h = [h0, 1.0 - h0];
        let u = control_output(ctrl, 1, 0, &h, &y).unwrap().u;
        let cy: Vec<f64> = y.iter().map(|v| c * v).collect();
        let cu = control_output(ctrl, 1, 0, &h, &cy).unwrap().u;
        prop_assert!((&cu - &u * c).amax() <= 1e-9 * (1.0 + u.amax() * c.abs()));
    }

    #[test]
    fn joint_scaling_of_gain_and_mixing_leaves_law_unchanged(c in 0.01f64..100.0, y in prop::collection::vec(-5.0f64..5.0, 2), h0 in 0.0f64..1.0) {
        let (_, ctrl) = siv_controller_cached();
        let mut scaled = ctrl.clone();
        for mode in &mut scaled.subsystems[0].modes {
            for r in &mut mode.rules {
                r.gain *= c;
                r.mixing *= c;
            }
        }
        let h = [h0, 1.0 - h0];
        let u = control_output(ctrl, 0, 1, &h, &y).unwrap().u;
        let v = control_output(&scaled, 0, 1, &h, &y).unwrap().u;
        prop_assert!((&u - &v).amax() <= 1e-9 * (1.0 + v.amax()));
    }
}

fn siv_controller_cached() -> &'static (SystemSpec, ControllerSet) {
    static CELL: std::sync::OnceLock<(SystemSpec, ControllerSet)> = std::sync::OnceLock::new();
    CELL.get_or_init(|| siv_controller(Layout::Coherent))
}
