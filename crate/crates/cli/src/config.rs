//! Run configuration: one TOML file with optional sections, overridable by
//! command-line flags and the `NMG_OUTPUT_DIR` environment variable, and
//! materialized into the core model types before a run.
//!
//! Precedence, lowest to highest: built-in defaults, config file, environment
//! variable (output directory only), flags. The effective post-override
//! configuration is what gets echoed and content-hashed into summaries, so a
//! summary always records exactly what ran.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nmg_core::kernel::KernelError;
use nmg_core::model::{
    paper_datum, paper_params_with_barrier, ExteriorDatum, ModelError, Params,
};
use nmg_core::solver::SolveConfig;
use nmg_core::{FracOrder, QuadratureSpec};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// What the run does; mirrored one-to-one by the CLI subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Tabulate the curvature residual of the initial (flat) state.
    Nmc,
    /// Relax to the minimal graph and emit the solution.
    Solve,
    /// Run the inequality suite.
    Verify,
    /// Solve, then assert odd symmetry and the sign pattern.
    ExperimentMaxprinciple,
    /// Sweep eta and check the boundary-jump floor.
    ExperimentStickiness,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Nmc => "nmc",
            Mode::Solve => "solve",
            Mode::Verify => "verify",
            Mode::ExperimentMaxprinciple => "experiment-maxprinciple",
            Mode::ExperimentStickiness => "experiment-stickiness",
        }
    }
}

/// Structural parameters. `s`, `epsilon0`, `eta` select the preset; the
/// barrier-error constant and the optional domain-width override adjust the
/// derived fields after the fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub s: f64,
    pub epsilon0: f64,
    pub eta: f64,
    pub barrier_c: f64,
    /// Replace the preset domain half-width (useful to probe how the checks
    /// fail when the geometric smallness condition is broken).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_override: Option<f64>,
}

impl Default for ParamsSection {
    fn default() -> Self {
        ParamsSection { s: 0.5, epsilon0: 0.1, eta: 0.1, barrier_c: 1.0, d_override: None }
    }
}

/// Exterior-datum adjustments on top of the preset bump family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DatumSection {
    /// Ramp width of the trapezoidal bump; omitted = the preset default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ramp_width: Option<f64>,
    /// Replace the preset plateau height (normally C̄·η). A negative value
    /// flips the datum's sign pattern.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plateau_height: Option<f64>,
    /// Mirror the bump with opposite sign on the right (the odd setting the
    /// sign experiments require). Off = zero datum on the right half-line.
    pub odd_extension: OddExtension,
}

/// Wrapper so the flag can default to `true` under `#[serde(default)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OddExtension(pub bool);

impl Default for OddExtension {
    fn default() -> Self {
        OddExtension(true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n_nodes: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n_nodes: 257 }
    }
}

/// Quadrature adjustments; omitted fields fall back to defaults derived from
/// the domain width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct QuadSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singular_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub residual_tol: f64,
    pub max_iters: usize,
    pub step0: f64,
    pub step_shrink: f64,
    pub odd_symmetrize: bool,
}

impl Default for SolveSection {
    fn default() -> Self {
        let c = SolveConfig::default();
        SolveSection {
            residual_tol: c.residual_tol,
            max_iters: c.max_iters,
            step0: c.step0,
            step_shrink: c.step_shrink,
            odd_symmetrize: c.odd_symmetrize,
        }
    }
}

/// The full run configuration as read from TOML. Scalar fields precede the
/// sections so the echo serializes back to TOML cleanly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub output_dir: PathBuf,
    /// Seed for the randomized spot checks (verify mode); everything else is
    /// deterministic regardless.
    pub seed: u64,
    /// Strictly decreasing eta values for the stickiness sweep.
    pub eta_sweep: Vec<f64>,
    pub params: ParamsSection,
    pub datum: DatumSection,
    pub grid: GridSection,
    pub quadrature: QuadSection,
    pub solve: SolveSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Solve,
            output_dir: PathBuf::from("out"),
            seed: 7,
            eta_sweep: vec![0.2, 0.1, 0.05, 0.025],
            params: ParamsSection::default(),
            datum: DatumSection::default(),
            grid: GridSection::default(),
            quadrature: QuadSection::default(),
            solve: SolveSection::default(),
        }
    }
}

/// Flag-level overrides; `None` keeps the config-file (or default) value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub s: Option<f64>,
    pub epsilon0: Option<f64>,
    pub eta: Option<f64>,
    pub barrier_c: Option<f64>,
    pub d_override: Option<f64>,
    pub ramp_width: Option<f64>,
    pub plateau_height: Option<f64>,
    pub odd_datum: Option<bool>,
    pub n_nodes: Option<usize>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub residual_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub step0: Option<f64>,
    pub step_shrink: Option<f64>,
    pub odd_symmetrize: Option<bool>,
    pub eta_sweep: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn apply(&mut self, ov: &Overrides) {
        if let Some(v) = &ov.output_dir {
            self.output_dir = v.clone();
        }
        if let Some(v) = ov.seed {
            self.seed = v;
        }
        if let Some(v) = ov.s {
            self.params.s = v;
        }
        if let Some(v) = ov.epsilon0 {
            self.params.epsilon0 = v;
        }
        if let Some(v) = ov.eta {
            self.params.eta = v;
        }
        if let Some(v) = ov.barrier_c {
            self.params.barrier_c = v;
        }
        if let Some(v) = ov.d_override {
            self.params.d_override = Some(v);
        }
        if let Some(v) = ov.ramp_width {
            self.datum.ramp_width = Some(v);
        }
        if let Some(v) = ov.plateau_height {
            self.datum.plateau_height = Some(v);
        }
        if let Some(v) = ov.odd_datum {
            self.datum.odd_extension = OddExtension(v);
        }
        if let Some(v) = ov.n_nodes {
            self.grid.n_nodes = v;
        }
        if let Some(v) = ov.rel_tol {
            self.quadrature.rel_tol = Some(v);
        }
        if let Some(v) = ov.abs_tol {
            self.quadrature.abs_tol = Some(v);
        }
        if let Some(v) = ov.residual_tol {
            self.solve.residual_tol = v;
        }
        if let Some(v) = ov.max_iters {
            self.solve.max_iters = v;
        }
        if let Some(v) = ov.step0 {
            self.solve.step0 = v;
        }
        if let Some(v) = ov.step_shrink {
            self.solve.step_shrink = v;
        }
        if let Some(v) = ov.odd_symmetrize {
            self.solve.odd_symmetrize = v;
        }
        if let Some(v) = &ov.eta_sweep {
            self.eta_sweep = v.clone();
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.params;
        for (name, v) in [
            ("params.s", p.s),
            ("params.epsilon0", p.epsilon0),
            ("params.eta", p.eta),
            ("params.barrier_c", p.barrier_c),
        ] {
            if !v.is_finite() {
                return Err(ConfigError::Invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if let Some(d) = p.d_override {
            if !(d.is_finite() && d > 1.0) {
                return Err(ConfigError::Invalid(format!(
                    "params.d_override must exceed the inner offset 1, got {d}"
                )));
            }
        }
        if self.grid.n_nodes < 3 {
            return Err(ConfigError::Invalid(format!(
                "grid.n_nodes must be at least 3, got {}",
                self.grid.n_nodes
            )));
        }
        if self.mode == Mode::ExperimentStickiness {
            let sweep = &self.eta_sweep;
            if sweep.is_empty() {
                return Err(ConfigError::Invalid("eta_sweep must not be empty".into()));
            }
            for &e in sweep {
                if !(e.is_finite() && e >= 0.0) {
                    return Err(ConfigError::Invalid(format!(
                        "eta_sweep entries must be finite and >= 0, got {e}"
                    )));
                }
            }
            if !sweep.windows(2).all(|w| w[0] > w[1]) {
                return Err(ConfigError::Invalid(format!(
                    "eta_sweep must be strictly decreasing, got {sweep:?}"
                )));
            }
        }
        Ok(())
    }

    /// Build the preset for the given eta with this config's overrides
    /// applied: optional domain-width replacement, then the datum with its
    /// ramp/height/extension adjustments.
    pub fn build_model(&self, eta: f64) -> Result<(Params, ExteriorDatum), ConfigError> {
        let order = FracOrder::new(self.params.s)?;
        let mut p =
            paper_params_with_barrier(order, self.params.epsilon0, eta, self.params.barrier_c)?;
        if let Some(d) = self.params.d_override {
            p.d = d;
            p.recompute_derived(self.params.barrier_c);
        }
        let ramp = self.datum.ramp_width.unwrap_or_else(|| p.default_ramp_width());
        let mut u0 = paper_datum(&p, ramp)?;
        if let Some(height) = self.datum.plateau_height {
            u0.plateau_height = height;
        }
        u0.odd_extension = self.datum.odd_extension.0;
        Ok((p, u0))
    }

    pub fn resolve(self) -> Result<Resolved, ConfigError> {
        self.validate()?;
        let (params, datum) = self.build_model(self.params.eta)?;
        let mut quad = QuadratureSpec::for_domain_width(2.0 * params.d);
        if let Some(v) = self.quadrature.rel_tol {
            quad.rel_tol = v;
        }
        if let Some(v) = self.quadrature.abs_tol {
            quad.abs_tol = v;
        }
        if let Some(v) = self.quadrature.tail_radius {
            quad.tail_radius = v;
        }
        if let Some(v) = self.quadrature.singular_width {
            quad.singular_width = v;
        }
        quad.validate()?;
        let solve = SolveConfig {
            residual_tol: self.solve.residual_tol,
            max_iters: self.solve.max_iters,
            step0: self.solve.step0,
            step_shrink: self.solve.step_shrink,
            odd_symmetrize: self.solve.odd_symmetrize,
        };
        Ok(Resolved {
            mode: self.mode,
            params,
            datum,
            n_nodes: self.grid.n_nodes,
            quad,
            solve,
            eta_sweep: self.eta_sweep.clone(),
            output_dir: self.output_dir.clone(),
            seed: self.seed,
            effective: self,
        })
    }
}

/// Everything a driver needs, in core types, plus the effective config for
/// echo and hashing.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub mode: Mode,
    pub params: Params,
    pub datum: ExteriorDatum,
    pub n_nodes: usize,
    pub quad: QuadratureSpec,
    pub solve: SolveConfig,
    pub eta_sweep: Vec<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub effective: RunConfig,
}

impl Resolved {
    /// Rebuild params and datum for another eta (sweep rows): same structural
    /// knobs, bump height re-derived from the new eta.
    pub fn for_eta(&self, eta: f64) -> Result<(Params, ExteriorDatum), ConfigError> {
        let mut cfg = self.effective.clone();
        cfg.params.eta = eta;
        cfg.build_model(eta)
    }

    /// Hex SHA-256 of the effective configuration's canonical TOML form — the
    /// "same inputs" fingerprint recorded in every summary.
    pub fn input_hash(&self) -> String {
        let text = toml::to_string(&self.effective).expect("effective config serializes");
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        format!("{:x}", h.finalize())
    }
}

/// Read the config file (or start from defaults), force the mode from the
/// subcommand, and apply environment and flag overrides.
pub fn load(path: Option<&Path>, mode: Mode, ov: &Overrides) -> Result<Resolved, ConfigError> {
    let mut cfg: RunConfig = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|source| ConfigError::Unreadable { path: p.to_path_buf(), source })?;
            toml::from_str(&text)?
        }
        None => RunConfig::default(),
    };
    cfg.mode = mode;
    if ov.output_dir.is_none() {
        if let Ok(dir) = std::env::var("NMG_OUTPUT_DIR") {
            if !dir.is_empty() {
                cfg.output_dir = PathBuf::from(dir);
            }
        }
    }
    cfg.apply(ov);
    cfg.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_to_the_preset() {
        let r = RunConfig::default().resolve().unwrap();
        assert_eq!(r.n_nodes, 257);
        assert_eq!(r.params.order.s(), 0.5);
        assert!(r.params.theta > 0.0);
        assert!(r.datum.odd_extension);
        assert!(r.datum.ramp_width > 0.0);
        assert_eq!(r.datum.plateau_height, r.params.cbar * r.params.eta);
    }

    #[test]
    fn partial_toml_fills_in_defaults() {
        let cfg: RunConfig = toml::from_str(
            "mode = \"verify\"\n[params]\ns = 0.3\n[grid]\nn_nodes = 65\n",
        )
        .unwrap();
        assert_eq!(cfg.mode, Mode::Verify);
        assert_eq!(cfg.grid.n_nodes, 65);
        assert_eq!(cfg.params.eta, 0.1);
        let r = cfg.resolve().unwrap();
        assert_eq!(r.params.order.s(), 0.3);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_sweeps() {
        assert!(toml::from_str::<RunConfig>("typo_field = 3\n").is_err());
        let mut cfg = RunConfig::default();
        cfg.mode = Mode::ExperimentStickiness;
        cfg.eta_sweep = vec![0.1, 0.1];
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(_))));
        cfg.eta_sweep = vec![0.05, 0.2];
        assert!(cfg.validate().is_err());
        cfg.eta_sweep = vec![0.2, 0.05];
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn overrides_take_precedence_and_change_the_hash() {
        let base = RunConfig::default().resolve().unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply(&Overrides { eta: Some(0.05), ..Overrides::default() });
        let r = cfg.resolve().unwrap();
        assert_eq!(r.params.eta, 0.05);
        assert_eq!(r.datum.plateau_height, r.params.cbar * 0.05);
        assert_ne!(r.input_hash(), base.input_hash());
        assert_eq!(base.input_hash(), RunConfig::default().resolve().unwrap().input_hash());
    }

    #[test]
    fn domain_override_recomputes_the_budget() {
        let mut cfg = RunConfig::default();
        cfg.params.d_override = Some(0.5 * 14.58938076105978);
        let r = cfg.resolve().unwrap();
        assert!(r.params.theta < 0.0, "halved domain must break the budget");
    }

    #[test]
    fn eta_rebuild_rescales_the_bump() {
        let r = RunConfig::default().resolve().unwrap();
        let (p, u0) = r.for_eta(0.025).unwrap();
        assert_eq!(p.eta, 0.025);
        assert_eq!(u0.plateau_height, p.cbar * 0.025);
        assert_eq!(u0.ramp_width, r.datum.ramp_width);
    }
}
