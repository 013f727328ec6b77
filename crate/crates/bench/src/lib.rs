//! Fixtures shared by the benchmarks.

use tslmi::model::bundled_system;
use tslmi::{synthesize, ControllerSet, SolverOptions, SynthesisOptions, SystemSpec, ZetaSpec};

/// Bundled plant with the attenuation levels and rate bound used for reproduction.
pub fn fixture() -> (SystemSpec, SynthesisOptions) {
    let sys = bundled_system();
    let opts = SynthesisOptions { zeta: ZetaSpec::Fixed(vec![1.7, 1.5]), lambda: Some(-6.0), ..Default::default() };
    (sys, opts)
}

pub fn controller() -> (SystemSpec, ControllerSet) {
    let (sys, opts) = fixture();
    let (ctrl, _) = synthesize(&sys, &opts, &SolverOptions::default()).expect("bundled plant is feasible");
    (sys, ctrl)
}
