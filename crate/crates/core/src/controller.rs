//! End-to-end synthesis and the online switched non-PDC law
//! `u = (Σ h_k K_k)(Σ h_k M_k)⁻¹ y`.

use nalgebra::{Cholesky, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{rows_serde, Mat, Vector};
use crate::lmi::{assemble_program, Assignment, Layout, LmiError, SynthesisOptions, VarKey, ZetaSpec};
use crate::model::{blend, SystemSpec};
use crate::sdp::{residual_check, ConicProgram, ResidualReport, SolveDiagnostics, SolveStatus, SolverOptions};

/// Condition number of the blended mixing block above which it is reported.
pub const CONDITION_REPORT: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleGains {
    #[serde(with = "rows_serde")]
    pub gain: Mat,
    /// `X5` (coherent) or `X9` (paper-literal).
    #[serde(with = "rows_serde")]
    pub mixing: Mat,
    #[serde(with = "rows_serde")]
    pub x1: Mat,
    #[serde(with = "rows_serde")]
    pub x5: Mat,
    #[serde(with = "rows_serde")]
    pub x9: Mat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeGains {
    pub rules: Vec<RuleGains>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsystemGains {
    pub modes: Vec<ModeGains>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarValue {
    pub var: VarKey,
    #[serde(with = "rows_serde")]
    pub value: Mat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisMeta {
    pub layout: Layout,
    pub options: SynthesisOptions,
    /// Attenuation levels in force: prescribed, or the minimized values.
    pub zeta: Vec<f64>,
    pub blocks: usize,
    pub scalars: usize,
    /// Smallest `min_eig - margin` over all blocks at synthesis time.
    pub worst_slack: f64,
    pub solver: SolveDiagnostics,
}

/// Synthesized gains plus the full decision-variable assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerSet {
    pub meta: SynthesisMeta,
    pub subsystems: Vec<SubsystemGains>,
    pub assignment: Vec<VarValue>,
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Lmi(#[from] LmiError),
    #[error("LMIs infeasible (layout {layout}, zeta {zeta:?}, mu {mu}, lambda {lambda}, epsilon {epsilon}): {message}")]
    Infeasible { layout: Layout, zeta: ZetaSpec, mu: String, lambda: String, epsilon: f64, message: String },
    #[error("solver failed with {status:?}: {message}")]
    Solver { status: SolveStatus, message: String },
    #[error("solver point failed certification: block {label} has slack {slack:e}")]
    Uncertified { label: String, slack: f64 },
    #[error("mixing block of subsystem {i}, mode {j}, rule {k} is not positive definite")]
    MixingIndefinite { i: usize, j: usize, k: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum ControlError {
    #[error("no gains for subsystem {i}, mode {j}")]
    Index { i: usize, j: usize },
    #[error("expected {expected} {what}, got {got}")]
    Length { what: &'static str, expected: usize, got: usize },
    #[error("blended mixing block of subsystem {i}, mode {j} is not positive definite")]
    Indefinite { i: usize, j: usize },
}

#[derive(Debug, Error)]
pub enum ControllerFileError {
    #[error("controller file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("controller does not match the system: {0}")]
    Mismatch(String),
}

/// Result of one law evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlEval {
    pub u: Vector,
    /// Set when the blended mixing block's condition number exceeds [`CONDITION_REPORT`].
    pub ill_conditioned: Option<f64>,
}

/// Solves the LMIs and extracts a certified controller.
pub fn synthesize(
    sys: &SystemSpec,
    opts: &SynthesisOptions,
    solver: &SolverOptions,
) -> Result<(ControllerSet, ResidualReport), SynthError> {
    let program = assemble_program(sys, opts)?;
    let conic = ConicProgram::encode(&program);
    let result = crate::sdp::solve(&conic, solver);
    let point = match (result.status, &result.point) {
        (SolveStatus::Feasible, Some(p)) => p,
        (SolveStatus::Infeasible, _) => {
            return Err(SynthError::Infeasible {
                layout: opts.layout,
                zeta: opts.zeta.clone(),
                mu: format!("{} ({} overrides)", opts.mu.default, opts.mu.overrides.len()),
                lambda: opts.lambda.map_or("per rule".into(), |l| l.to_string()),
                epsilon: opts.epsilon,
                message: result.diagnostics.message,
            })
        }
        (status, _) => return Err(SynthError::Solver { status, message: result.diagnostics.message }),
    };
    let x = conic.decode(&program.catalogue, point).expect("solver returns a full-length point");
    let report = residual_check(&program, &x, solver.feas_tol);
    if let Some(bad) = report.blocks.iter().filter(|b| !b.pass).min_by(|a, b| a.slack().total_cmp(&b.slack())) {
        return Err(SynthError::Uncertified { label: bad.label.to_string(), slack: bad.slack() });
    }
    let zeta = match &opts.zeta {
        ZetaSpec::Fixed(z) => z.clone(),
        ZetaSpec::Minimize => (0..sys.n())
            .filter_map(|i| program.catalogue.get(VarKey::Zeta { i }))
            .map(|id| x.get(id)[(0, 0)])
            .collect(),
    };
    let meta = SynthesisMeta {
        layout: opts.layout,
        options: opts.clone(),
        zeta,
        blocks: program.blocks.len(),
        scalars: program.catalogue.scalar_count(),
        worst_slack: report.worst_slack(),
        solver: result.diagnostics,
    };
    let ctrl = ControllerSet::from_assignment(sys, meta, &program.catalogue, &x)?;
    Ok((ctrl, report))
}

fn is_spd(m: &Mat) -> bool {
    Cholesky::new(m.clone()).is_some()
}

impl ControllerSet {
    pub fn from_assignment(
        sys: &SystemSpec,
        meta: SynthesisMeta,
        cat: &crate::lmi::Catalogue,
        x: &Assignment,
    ) -> Result<Self, SynthError> {
        let mut subsystems = Vec::with_capacity(sys.n());
        for (i, sub) in sys.subsystems.iter().enumerate() {
            let mut modes = Vec::with_capacity(sub.modes.len());
            for (j, mode) in sub.modes.iter().enumerate() {
                let mut rules = Vec::with_capacity(mode.rules.len());
                for k in 0..mode.rules.len() {
                    let get = |key| x.get(cat.id(key)).clone();
                    let x5 = get(VarKey::X5 { i, j, k });
                    let x9 = get(VarKey::X9 { i, j, k });
                    let mixing = match meta.layout {
                        Layout::Coherent => x5.clone(),
                        Layout::Literal => x9.clone(),
                    };
                    if !is_spd(&mixing) {
                        return Err(SynthError::MixingIndefinite { i, j, k });
                    }
                    rules.push(RuleGains { gain: get(VarKey::K { i, j, k }), mixing, x1: get(VarKey::X1 { i, j, k }), x5, x9 });
                }
                modes.push(ModeGains { rules });
            }
            subsystems.push(SubsystemGains { modes });
        }
        let assignment =
            x.to_keyed(cat).into_iter().map(|(var, value)| VarValue { var, value }).collect();
        Ok(ControllerSet { meta, subsystems, assignment })
    }

    pub fn layout(&self) -> Layout {
        self.meta.layout
    }

    pub fn rules(&self, i: usize, j: usize) -> Option<&[RuleGains]> {
        self.subsystems.get(i)?.modes.get(j).map(|m| m.rules.as_slice())
    }

    /// The stored values laid out for `cat`; `None` if some variable is missing or misshapen.
    pub fn assignment_for(&self, cat: &crate::lmi::Catalogue) -> Option<Assignment> {
        let keyed: Vec<(VarKey, Mat)> = self.assignment.iter().map(|v| (v.var, v.value.clone())).collect();
        Assignment::from_keyed(cat, &keyed)
    }

    /// Re-runs the residual check of the stored assignment against `sys`.
    pub fn recheck(&self, sys: &SystemSpec, tol: f64) -> Result<ResidualReport, ControllerFileError> {
        let program = assemble_program(sys, &self.meta.options).map_err(|e| ControllerFileError::Mismatch(e.to_string()))?;
        let x = self
            .assignment_for(&program.catalogue)
            .ok_or_else(|| ControllerFileError::Mismatch("assignment does not cover the program's variables".into()))?;
        Ok(residual_check(&program, &x, tol))
    }

    /// Checks that gain shapes agree with `sys`.
    pub fn check_against(&self, sys: &SystemSpec) -> Result<(), ControllerFileError> {
        let fail = |m: String| Err(ControllerFileError::Mismatch(m));
        if self.subsystems.len() != sys.n() {
            return fail(format!("{} subsystems in controller, {} in system", self.subsystems.len(), sys.n()));
        }
        for (i, (g, sub)) in self.subsystems.iter().zip(&sys.subsystems).enumerate() {
            if g.modes.len() != sub.modes.len() {
                return fail(format!("subsystem {i}: mode count differs"));
            }
            let mix = match self.meta.layout {
                Layout::Coherent => sub.output_dim,
                Layout::Literal => sub.input_dim,
            };
            for (j, (gm, mode)) in g.modes.iter().zip(&sub.modes).enumerate() {
                if gm.rules.len() != mode.rules.len() {
                    return fail(format!("subsystem {i}, mode {j}: rule count differs"));
                }
                for r in &gm.rules {
                    if r.gain.shape() != (sub.input_dim, sub.output_dim) || r.mixing.shape() != (mix, mix) {
                        return fail(format!("subsystem {i}, mode {j}: gain shapes differ"));
                    }
                    if self.meta.layout == Layout::Literal && sub.input_dim != sub.output_dim {
                        return fail(format!("subsystem {i}: paper-literal gains need p = u"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("controller serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ControllerFileError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `u = K_h · M_h⁻¹ · y` for subsystem `i` in mode `j` with weights `h`.
pub fn control_output(ctrl: &ControllerSet, i: usize, j: usize, h: &[f64], y: &[f64]) -> Result<ControlEval, ControlError> {
    let rules = ctrl.rules(i, j).ok_or(ControlError::Index { i, j })?;
    if h.len() != rules.len() {
        return Err(ControlError::Length { what: "weights", expected: rules.len(), got: h.len() });
    }
    let p = rules[0].mixing.nrows();
    if y.len() != p {
        return Err(ControlError::Length { what: "outputs", expected: p, got: y.len() });
    }
    let k_h = blend(h, rules.iter().map(|r| &r.gain));
    let m_h = blend(h, rules.iter().map(|r| &r.mixing));
    let chol = Cholesky::new(m_h.clone()).ok_or(ControlError::Indefinite { i, j })?;
    let v = chol.solve(&Vector::from_column_slice(y));
    let eig = SymmetricEigen::new(m_h).eigenvalues;
    let cond = eig.max() / eig.min();
    Ok(ControlEval { u: k_h * v, ill_conditioned: (cond > CONDITION_REPORT).then_some(cond) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::MuMap;

    fn scalar_set(gains: &[f64], mixing: &[f64]) -> ControllerSet {
        let one = |v: f64| Mat::from_element(1, 1, v);
        ControllerSet {
            meta: SynthesisMeta {
                layout: Layout::Coherent,
                options: SynthesisOptions { mu: MuMap::default(), ..Default::default() },
                zeta: vec![],
                blocks: 0,
                scalars: 0,
                worst_slack: 0.0,
                solver: SolveDiagnostics::default(),
            },
            subsystems: vec![SubsystemGains {
                modes: vec![ModeGains {
                    rules: gains
                        .iter()
                        .zip(mixing)
                        .map(|(&k, &m)| RuleGains { gain: one(k), mixing: one(m), x1: one(1.0), x5: one(m), x9: one(1.0) })
                        .collect(),
                }],
            }],
            assignment: vec![],
        }
    }

    #[test]
    fn scalar_toy_blend() {
        let c = scalar_set(&[2.0, 4.0], &[1.0, 2.0]);
        let u = control_output(&c, 0, 0, &[0.5, 0.5], &[1.0]).unwrap().u;
        assert!((u[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_output_and_vertex() {
        let c = scalar_set(&[2.0, 4.0], &[1.0, 2.0]);
        assert_eq!(control_output(&c, 0, 0, &[0.3, 0.7], &[0.0]).unwrap().u[0], 0.0);
        let u = control_output(&c, 0, 0, &[0.0, 1.0], &[3.0]).unwrap().u[0];
        assert!((u - 6.0).abs() < 1e-15);
    }

    #[test]
    fn errors_are_hard() {
        let c = scalar_set(&[2.0, 4.0], &[-1.0, -2.0]);
        assert_eq!(control_output(&c, 0, 0, &[0.5, 0.5], &[1.0]), Err(ControlError::Indefinite { i: 0, j: 0 }));
        assert!(matches!(control_output(&c, 0, 1, &[1.0], &[1.0]), Err(ControlError::Index { .. })));
        assert!(matches!(control_output(&c, 0, 0, &[1.0], &[1.0]), Err(ControlError::Length { .. })));
    }

    #[test]
    fn ill_conditioning_is_reported() {
        let c = scalar_set(&[1.0], &[1.0]);
        assert!(control_output(&c, 0, 0, &[1.0], &[1.0]).unwrap().ill_conditioned.is_none());
        let mut c = c;
        c.subsystems[0].modes[0].rules[0].mixing = Mat::from_diagonal(&Vector::from_vec(vec![1.0, 1e-9]));
        c.subsystems[0].modes[0].rules[0].gain = Mat::zeros(1, 2);
        let e = control_output(&c, 0, 0, &[1.0], &[1.0, 1.0]).unwrap();
        assert!(e.ill_conditioned.unwrap() > 1e8);
    }
}
