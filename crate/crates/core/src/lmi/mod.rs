//! Synthesis conditions as symmetric affine matrix inequalities.
//!
//! Five block families are generated for a plant:
//!
//! * `G1`: `X1, X5, X9 ⪰ εI` for every subsystem, mode and rule;
//! * `G2`: `X1[l] + W[s,k] ⪰ εI`, the slack that bounds the membership-rate term;
//! * `G3`: the Lyapunov jump bound at mode switches (non-strict);
//! * `G4stab`: the decay condition with the interconnection Schur columns;
//! * `G4rob`: the disturbance-attenuation condition, one per ordered pair `(i, α)`.

mod block;
mod builders;
mod vars;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use block::{AffineExpr, BlockLabel, Family, LmiBlock, Sense, Term};
pub use builders::{
    build_jump_set, build_phi, build_positivity_set, build_robustness_set, build_stability_set,
    gamma_core,
};
pub use vars::{Assignment, Catalogue, VarId, VarInfo, VarKey, VarShape};

use crate::model::SystemSpec;

/// Placement of the output and input slots in the decay block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layout {
    /// Derived from the descriptor form `[[A,0,B],[C,-I,0],[0,K·X5⁻¹,-I]]`.
    /// The online law inverts the `X5` blend; `p ≠ u` is allowed.
    #[serde(rename = "coherent")]
    Coherent,
    /// Output and state products share the input row; `(2,1)` is empty.
    /// The online law inverts the `X9` blend; requires `p = u`.
    #[serde(rename = "paper-literal")]
    Literal,
}

impl Layout {
    pub fn as_str(self) -> &'static str {
        match self {
            Layout::Coherent => "coherent",
            Layout::Literal => "paper-literal",
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "coherent" => Ok(Layout::Coherent),
            "paper-literal" | "literal" => Ok(Layout::Literal),
            other => Err(format!("unknown layout '{other}' (expected coherent or paper-literal)")),
        }
    }
}

/// Jump factors `μ_{j→j⁺}` per subsystem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuMap {
    pub default: f64,
    /// `(i, j, j⁺) → μ`.
    #[serde(default, with = "mu_overrides")]
    pub overrides: BTreeMap<(usize, usize, usize), f64>,
}

mod mu_overrides {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<(usize, usize, usize), f64>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(|(&(i, j, jp), &mu)| (i, j, jp, mu)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(usize, usize, usize), f64>, D::Error> {
        let v = Vec::<(usize, usize, usize, f64)>::deserialize(d)?;
        Ok(v.into_iter().map(|(i, j, jp, mu)| ((i, j, jp), mu)).collect())
    }
}

impl Default for MuMap {
    fn default() -> Self {
        Self { default: 1.0, overrides: BTreeMap::new() }
    }
}

impl MuMap {
    pub fn uniform(mu: f64) -> Self {
        Self { default: mu, overrides: BTreeMap::new() }
    }

    pub fn get(&self, i: usize, j: usize, jplus: usize) -> f64 {
        self.overrides.get(&(i, j, jplus)).copied().unwrap_or(self.default)
    }
}

/// Attenuation levels `ζ_i²`: prescribed, or decision variables to minimize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaSpec {
    Fixed(Vec<f64>),
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOptions {
    pub layout: Layout,
    /// Margin realizing strict inequalities.
    pub epsilon: f64,
    pub mu: MuMap,
    /// Broadcast value overriding every rule's membership-rate bound.
    pub lambda: Option<f64>,
    pub zeta: ZetaSpec,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            layout: Layout::Coherent,
            epsilon: 1e-6,
            mu: MuMap::default(),
            lambda: None,
            zeta: ZetaSpec::Minimize,
        }
    }
}

impl SynthesisOptions {
    pub fn lambda_for(&self, sys: &SystemSpec, i: usize, j: usize, s: usize) -> f64 {
        self.lambda.unwrap_or(sys.subsystems[i].modes[j].rules[s].lambda)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LmiError {
    #[error("jump factor mu = {mu} for subsystem {i}, transition {j} -> {jplus} must be positive")]
    InvalidMu { i: usize, j: usize, jplus: usize, mu: f64 },
    #[error("paper-literal layout needs equal output and input sizes; subsystem {i} has p = {p}, u = {u}")]
    LayoutInfeasible { i: usize, p: usize, u: usize },
    #[error("expected {expected} attenuation levels, got {got}")]
    ZetaCount { expected: usize, got: usize },
    #[error("attenuation level {value} for subsystem {i} must be positive")]
    ZetaNonPositive { i: usize, value: f64 },
    #[error("margin epsilon = {0} must be non-negative and finite")]
    InvalidEpsilon(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Feasibility,
    /// Minimize `Σ_i ζ_i²`.
    MinimizeZeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmiProgram {
    pub blocks: Vec<LmiBlock>,
    pub catalogue: Catalogue,
    pub objective: Objective,
    pub epsilon: f64,
}

impl LmiProgram {
    pub fn family_count(&self, family: Family) -> usize {
        self.blocks.iter().filter(|b| b.label.family == family).count()
    }

    /// Every term refers to a catalogued variable with conformable shapes.
    pub fn is_well_formed(&self) -> bool {
        self.blocks.iter().all(|b| {
            b.expr.terms.iter().all(|t| t.var.0 < self.catalogue.len()) && b.expr.conformable(&self.catalogue)
        })
    }
}

/// Builds every family for `sys` under `opts`.
pub fn assemble_program(sys: &SystemSpec, opts: &SynthesisOptions) -> Result<LmiProgram, LmiError> {
    if !(opts.epsilon >= 0.0 && opts.epsilon.is_finite()) {
        return Err(LmiError::InvalidEpsilon(opts.epsilon));
    }
    if let ZetaSpec::Fixed(z) = &opts.zeta {
        if sys.n() >= 2 {
            if z.len() != sys.n() {
                return Err(LmiError::ZetaCount { expected: sys.n(), got: z.len() });
            }
            if let Some((i, &value)) = z.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
                return Err(LmiError::ZetaNonPositive { i, value });
            }
        }
    }
    let cat = Catalogue::new(sys, opts);
    let mut blocks = build_positivity_set(sys, opts, &cat);
    blocks.extend(build_jump_set(sys, opts, &cat)?);
    blocks.extend(build_stability_set(sys, opts, &cat)?);
    blocks.extend(build_robustness_set(sys, opts, &cat)?);
    let objective = match (&opts.zeta, sys.n() >= 2) {
        (ZetaSpec::Minimize, true) => Objective::MinimizeZeta,
        _ => Objective::Feasibility,
    };
    Ok(LmiProgram { blocks, catalogue: cat, objective, epsilon: opts.epsilon })
}
