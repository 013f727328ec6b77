//! TOML system files. The schema is documented in `docs/system-format.md`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    validate, Coupling, Frontier, MembershipFn, ModeSpec, RuleSpec, Severity, SubsystemSpec,
    SwitchingRule, SystemSpec,
};
use crate::linalg::{from_rows, to_rows, Mat};

#[derive(Debug, Error)]
pub enum ParseError {
    /// Syntax errors and unknown fields; the message carries line and column.
    #[error("{0}")]
    Syntax(String),
    #[error("{context}: ragged matrix rows")]
    Ragged { context: String },
    #[error("{context}: {source}")]
    Membership {
        context: String,
        #[source]
        source: super::GrammarError,
    },
    #[error("{context}: {message}")]
    Structure { context: String, message: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    system: SystemHeader,
    subsystem: Vec<SubsystemDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemHeader {
    name: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubsystemDoc {
    state_dim: usize,
    output_dim: usize,
    input_dim: usize,
    disturbance_dim: usize,
    initial_state: Vec<f64>,
    #[serde(default)]
    initial_mode: usize,
    switching: SwitchingDoc,
    mode: Vec<ModeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SwitchingDoc {
    Hysteresis { frontiers: Vec<FrontierDoc> },
    Schedule { entries: Vec<ScheduleEntry> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrontierDoc {
    c: Vec<f64>,
    #[serde(default)]
    d: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleEntry {
    time: f64,
    mode: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeDoc {
    rule: Vec<RuleDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    membership: String,
    lambda: f64,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "Bw")]
    bw: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    coupling: Vec<CouplingDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingDoc {
    alpha: usize,
    #[serde(rename = "F")]
    f: Vec<Vec<f64>>,
    #[serde(rename = "Bw")]
    bw: Vec<Vec<f64>>,
}

fn matrix(rows: &[Vec<f64>], context: impl FnOnce() -> String) -> Result<Mat, ParseError> {
    if rows.is_empty() {
        return Err(ParseError::Structure { context: context(), message: "empty matrix".into() });
    }
    from_rows(rows).ok_or_else(|| ParseError::Ragged { context: context() })
}

/// Parses a system file without dimension checks.
pub fn parse_unchecked(text: &str) -> Result<SystemSpec, ParseError> {
    let doc: Document = toml::from_str(text).map_err(|e| ParseError::Syntax(e.to_string()))?;
    let mut subsystems = Vec::with_capacity(doc.subsystem.len());
    for (i, sd) in doc.subsystem.into_iter().enumerate() {
        let mut modes = Vec::with_capacity(sd.mode.len());
        for (j, md) in sd.mode.into_iter().enumerate() {
            let mut rules = Vec::with_capacity(md.rule.len());
            let mut memberships = Vec::with_capacity(md.rule.len());
            for (s, rd) in md.rule.into_iter().enumerate() {
                let ctx = |what: &str| format!("subsystem[{i}].mode[{j}].rule[{s}].{what}");
                memberships.push(MembershipFn::parse(&rd.membership).map_err(|source| {
                    ParseError::Membership { context: ctx("membership"), source }
                })?);
                let mut couplings = BTreeMap::new();
                for cd in rd.coupling {
                    let cctx = |what: &str| ctx(&format!("coupling[{}].{what}", cd.alpha));
                    let c = Coupling {
                        f: matrix(&cd.f, || cctx("F"))?,
                        bw: matrix(&cd.bw, || cctx("Bw"))?,
                    };
                    if couplings.insert(cd.alpha, c).is_some() {
                        return Err(ParseError::Structure {
                            context: ctx("coupling"),
                            message: format!("duplicate coupling for alpha = {}", cd.alpha),
                        });
                    }
                }
                rules.push(RuleSpec {
                    a: matrix(&rd.a, || ctx("A"))?,
                    b: matrix(&rd.b, || ctx("B"))?,
                    bw: matrix(&rd.bw, || ctx("Bw"))?,
                    c: matrix(&rd.c, || ctx("C"))?,
                    lambda: rd.lambda,
                    couplings,
                });
            }
            modes.push(ModeSpec { rules, memberships });
        }
        let switching = match sd.switching {
            SwitchingDoc::Hysteresis { frontiers } => SwitchingRule::Hysteresis(
                frontiers.into_iter().map(|f| Frontier { c: f.c, d: f.d }).collect(),
            ),
            SwitchingDoc::Schedule { entries } => {
                SwitchingRule::TimeSchedule(entries.into_iter().map(|e| (e.time, e.mode)).collect())
            }
        };
        subsystems.push(SubsystemSpec {
            state_dim: sd.state_dim,
            output_dim: sd.output_dim,
            input_dim: sd.input_dim,
            disturbance_dim: sd.disturbance_dim,
            modes,
            switching,
            initial_state: sd.initial_state,
            initial_mode: sd.initial_mode,
        });
    }
    Ok(SystemSpec { name: doc.system.name, subsystems })
}

/// Parses a system file and rejects dimension violations.
///
/// Non-dimensional findings (convex sums, λ signs, schedules) are left to
/// [`validate`](super::validate).
pub fn parse_system(text: &str) -> Result<SystemSpec, ParseError> {
    let sys = parse_unchecked(text)?;
    let report = validate(&sys);
    if let Some(v) = report
        .violations
        .iter()
        .find(|v| v.severity == Severity::Error && v.is_dimensional())
    {
        return Err(ParseError::Dimension(format!("{}: {}", v.subject, v.message)));
    }
    Ok(sys)
}

pub fn serialize_system(sys: &SystemSpec) -> String {
    let doc = Document {
        system: SystemHeader { name: sys.name.clone() },
        subsystem: sys
            .subsystems
            .iter()
            .map(|sub| SubsystemDoc {
                state_dim: sub.state_dim,
                output_dim: sub.output_dim,
                input_dim: sub.input_dim,
                disturbance_dim: sub.disturbance_dim,
                initial_state: sub.initial_state.clone(),
                initial_mode: sub.initial_mode,
                switching: match &sub.switching {
                    SwitchingRule::Hysteresis(fs) => SwitchingDoc::Hysteresis {
                        frontiers: fs.iter().map(|f| FrontierDoc { c: f.c.clone(), d: f.d }).collect(),
                    },
                    SwitchingRule::TimeSchedule(es) => SwitchingDoc::Schedule {
                        entries: es.iter().map(|&(time, mode)| ScheduleEntry { time, mode }).collect(),
                    },
                },
                mode: sub
                    .modes
                    .iter()
                    .map(|m| ModeDoc {
                        rule: m
                            .rules
                            .iter()
                            .zip(&m.memberships)
                            .map(|(r, h)| RuleDoc {
                                membership: h.to_string(),
                                lambda: r.lambda,
                                a: to_rows(&r.a),
                                b: to_rows(&r.b),
                                bw: to_rows(&r.bw),
                                c: to_rows(&r.c),
                                coupling: r
                                    .couplings
                                    .iter()
                                    .map(|(&alpha, c)| CouplingDoc {
                                        alpha,
                                        f: to_rows(&c.f),
                                        bw: to_rows(&c.bw),
                                    })
                                    .collect(),
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    toml::to_string(&doc).expect("system document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::bundled_system;

    const SINGLE: &str = r#"
[system]
name = "lti"

[[subsystem]]
state_dim = 1
output_dim = 1
input_dim = 1
disturbance_dim = 1
initial_state = [1.0]
switching = { kind = "schedule", entries = [] }

[[subsystem.mode]]
[[subsystem.mode.rule]]
membership = "1"
lambda = 0.0
A = [[-1.0]]
B = [[1.0]]
Bw = [[0.0]]
C = [[1.0]]
"#;

    #[test]
    fn bundled_example_shape() {
        let sys = bundled_system();
        assert_eq!(sys.n(), 2);
        assert_eq!(sys.subsystems[0].state_dim, 2);
        assert_eq!(sys.subsystems[1].state_dim, 3);
        for sub in &sys.subsystems {
            assert_eq!(sub.modes.len(), 2);
            assert!(sub.modes.iter().all(|m| m.rules.len() == 2));
        }
    }

    #[test]
    fn single_subsystem_without_couplings() {
        let sys = parse_system(SINGLE).unwrap();
        assert_eq!(sys.n(), 1);
        assert!(sys.pairs().is_empty());
        assert!(sys.subsystems[0].modes[0].rules[0].couplings.is_empty());
    }

    #[test]
    fn wrong_shape_is_dimension_error() {
        let bad = SINGLE.replace("A = [[-1.0]]", "A = [[-1.0, 0.0]]");
        assert!(matches!(parse_system(&bad), Err(ParseError::Dimension(_))));
        // unchecked parse still succeeds so validation can list the violation
        assert!(parse_unchecked(&bad).is_ok());
    }

    #[test]
    fn syntax_and_field_errors() {
        let e = parse_system("[system\nname = 1").unwrap_err();
        assert!(matches!(e, ParseError::Syntax(ref m) if m.contains("line")));
        let unknown = SINGLE.replace("lambda = 0.0", "lambda = 0.0\nbogus = 1");
        let e = parse_system(&unknown).unwrap_err();
        assert!(matches!(e, ParseError::Syntax(ref m) if m.contains("bogus")));
        let ragged = SINGLE.replace("A = [[-1.0]]", "A = [[-1.0], [1.0, 2.0]]");
        assert!(matches!(parse_system(&ragged), Err(ParseError::Ragged { .. })));
        let grammar = SINGLE.replace("membership = \"1\"", "membership = \"tan(x[0])\"");
        assert!(matches!(parse_system(&grammar), Err(ParseError::Membership { .. })));
    }

    #[test]
    fn serialize_round_trip_bundled() {
        let sys = bundled_system();
        let text = serialize_system(&sys);
        let back = parse_system(&text).unwrap();
        assert_eq!(back, sys);
    }
}
