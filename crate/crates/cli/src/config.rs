use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tslmi::lmi::{Layout, MuMap, ZetaSpec};
use tslmi::{SimConfig, SolverOptions, SynthesisOptions, VerifyConfig};

use crate::error::{CliError, Exit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutChoice {
    Coherent,
    PaperLiteral,
    Both,
}

impl LayoutChoice {
    /// Layouts to try, in order of preference.
    pub fn layouts(self) -> Vec<Layout> {
        match self {
            LayoutChoice::Coherent => vec![Layout::Coherent],
            LayoutChoice::PaperLiteral => vec![Layout::Literal],
            LayoutChoice::Both => vec![Layout::Coherent, Layout::Literal],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZetaKeyword {
    Minimize,
}

/// `"minimize"` or one value per subsystem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZetaSetting {
    Keyword(ZetaKeyword),
    Values(Vec<f64>),
}

impl ZetaSetting {
    pub fn parse(text: &str) -> Result<Self, String> {
        if text.trim().eq_ignore_ascii_case("minimize") {
            return Ok(ZetaSetting::Keyword(ZetaKeyword::Minimize));
        }
        text.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| format!("bad attenuation level {v:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(ZetaSetting::Values)
    }

    fn spec(&self) -> ZetaSpec {
        match self {
            ZetaSetting::Keyword(ZetaKeyword::Minimize) => ZetaSpec::Minimize,
            ZetaSetting::Values(v) => ZetaSpec::Fixed(v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuOverride {
    pub subsystem: usize,
    pub from: usize,
    pub to: usize,
    pub mu: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Plant file; the bundled example when absent.
    pub system: Option<PathBuf>,
    /// Controller file for `simulate`/`verify`; synthesized in-process when absent.
    pub controller: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisSection {
    pub layout: LayoutChoice,
    pub zeta: ZetaSetting,
    pub mu: f64,
    pub mu_overrides: Vec<MuOverride>,
    /// Broadcast membership-rate bound; per-rule values from the plant file when absent.
    pub lambda: Option<f64>,
    pub epsilon: f64,
}

impl Default for SynthesisSection {
    fn default() -> Self {
        Self {
            layout: LayoutChoice::Both,
            zeta: ZetaSetting::Keyword(ZetaKeyword::Minimize),
            mu: 1.0,
            mu_overrides: Vec::new(),
            lambda: None,
            epsilon: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
    /// Per-subsystem noise standard deviation; 0 for noise-free runs.
    pub sigma: f64,
    pub seed: u64,
    pub initial_states: Option<Vec<Vec<f64>>>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let d = SimConfig::default();
        Self { t_end: d.t_end, dt: d.dt, stride: d.stride, sigma: 0.0, seed: 1, initial_states: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub synthesis: SynthesisSection,
    pub solver: SolverOptions,
    pub simulation: SimulationSection,
    pub verify: VerifyConfig,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Plant description file.
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Controller file to simulate or verify.
    #[arg(long)]
    pub controller: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub layout: Option<LayoutChoice>,
    /// Attenuation levels `v1,v2,...` or `minimize`.
    #[arg(long, value_parser = ZetaSetting::parse)]
    pub zeta: Option<ZetaSetting>,
    /// Jump factor for every mode transition.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Membership-rate bound broadcast to every rule.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Integration step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Simulation horizon.
    #[arg(long)]
    pub tend: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of noisy verification runs.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Noise standard deviation.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Record every n-th step.
    #[arg(long)]
    pub stride: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::new(Exit::Io, format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Config file (if any) with flags applied on top.
    pub fn resolve(o: &Overrides, base: RunConfig) -> Result<Self, CliError> {
        let mut c = match &o.config {
            Some(p) => Self::load(p)?,
            None => base,
        };
        if o.system.is_some() {
            c.paths.system = o.system.clone();
        }
        if o.controller.is_some() {
            c.paths.controller = o.controller.clone();
        }
        if o.out.is_some() {
            c.paths.out = o.out.clone();
        }
        if let Some(l) = o.layout {
            c.synthesis.layout = l;
        }
        if let Some(z) = &o.zeta {
            c.synthesis.zeta = z.clone();
        }
        if let Some(mu) = o.mu {
            c.synthesis.mu = mu;
        }
        if o.lambda.is_some() {
            c.synthesis.lambda = o.lambda;
        }
        if let Some(e) = o.epsilon {
            c.synthesis.epsilon = e;
        }
        if let Some(dt) = o.dt {
            c.simulation.dt = dt;
            c.verify.dt = dt;
        }
        if let Some(t) = o.tend {
            c.simulation.t_end = t;
            c.verify.t_end = t;
            c.verify.hinf_t_end = t;
        }
        if let Some(s) = o.seed {
            c.simulation.seed = s;
            c.verify.seed = s;
        }
        if let Some(r) = o.runs {
            c.verify.runs = r;
        }
        if let Some(s) = o.sigma {
            c.simulation.sigma = s;
            c.verify.sigma = s;
        }
        if let Some(s) = o.stride {
            c.simulation.stride = s;
        }
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::new(Exit::Validation, m));
        let s = &self.synthesis;
        if !(s.mu > 0.0 && s.mu.is_finite()) || self.synthesis.mu_overrides.iter().any(|m| !(m.mu > 0.0)) {
            return bad("mu must be positive".into());
        }
        if !(s.epsilon >= 0.0 && s.epsilon.is_finite()) {
            return bad(format!("epsilon = {} must be non-negative", s.epsilon));
        }
        if let ZetaSetting::Values(v) = &s.zeta {
            if v.iter().any(|z| !(*z > 0.0 && z.is_finite())) {
                return bad("attenuation levels must be positive".into());
            }
        }
        let sim = &self.simulation;
        if !(sim.dt > 0.0 && sim.t_end >= sim.dt && sim.stride >= 1 && sim.sigma >= 0.0) {
            return bad("simulation needs dt > 0, t_end >= dt, stride >= 1, sigma >= 0".into());
        }
        let v = &self.verify;
        if !(v.dt > 0.0 && v.t_end >= v.dt && v.hinf_t_end >= v.dt && v.sigma >= 0.0 && v.residual_tol >= 0.0) {
            return bad("verify needs dt > 0, horizons >= dt, sigma >= 0".into());
        }
        if let Some(p) = &self.paths.system {
            if !p.is_file() {
                return Err(CliError::new(Exit::Io, format!("{}: no such file", p.display())));
            }
        }
        if let Some(p) = &self.paths.controller {
            if !p.is_file() {
                return Err(CliError::new(Exit::Io, format!("{}: no such file", p.display())));
            }
        }
        Ok(())
    }

    pub fn synthesis_options(&self, layout: Layout) -> SynthesisOptions {
        let s = &self.synthesis;
        let mut mu = MuMap::uniform(s.mu);
        for o in &s.mu_overrides {
            mu.overrides.insert((o.subsystem, o.from, o.to), o.mu);
        }
        SynthesisOptions { layout, epsilon: s.epsilon, mu, lambda: s.lambda, zeta: s.zeta.spec() }
    }

    pub fn sim_config(&self, n: usize) -> SimConfig {
        let s = &self.simulation;
        let cfg = SimConfig {
            t_end: s.t_end,
            dt: s.dt,
            noise: Vec::new(),
            initial_states: s.initial_states.clone(),
            stride: s.stride,
        };
        if s.sigma > 0.0 {
            cfg.with_noise(n, s.sigma, s.seed)
        } else {
            cfg
        }
    }

    /// The settings of the bundled reproduction run.
    pub fn reproduction() -> Self {
        RunConfig {
            synthesis: SynthesisSection {
                zeta: ZetaSetting::Values(vec![1.7, 1.5]),
                lambda: Some(-6.0),
                ..Default::default()
            },
            ..Default::default()
        }
    }
}
