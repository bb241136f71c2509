//! Experiment configuration, read from a TOML file.
//!
//! Relative paths inside the file are resolved against the file's directory.
//! Every random choice is driven by the `[seeds]` section.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use sse_core::pauli::ObservableSum;
use sse_core::shadow::EstimatorMode;
use sse_core::sim::{build_spin_ring, load_hamiltonian, Boundary, Circuit, NoiseModel, Onsite};
use sse_core::sse::{PipelineConfig, RegularizationConfig, SymmetryConfig, SymmetryMethod, TruncationRule};

use crate::error::{CliError, CliResult};

pub const MAX_STATEVECTOR_QUBITS: usize = 14;
pub const MAX_DENSITY_QUBITS: usize = 8;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default)]
    pub basis: BasisConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub regularization: RegularizationSection,
    pub gate_noise: Option<GateNoiseConfig>,
    pub symmetry: Option<SymmetrySection>,
    #[serde(default)]
    pub seeds: SeedsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    SpinRing {
        n_qubits: usize,
        j: f64,
        /// Explicit on-site fields; otherwise drawn from `onsite_seed`.
        onsite: Option<Vec<f64>>,
        onsite_seed: Option<u64>,
        #[serde(default)]
        boundary: BoundaryName,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryName {
    #[default]
    Periodic,
    Open,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitConfig {
    /// Hardware-efficient ansatz optimized on the noiseless state.
    Vqe {
        #[serde(default = "default_layers")]
        layers: usize,
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(default = "default_lr")]
        learning_rate: f64,
    },
    /// Gate list, one per line, applied to `|0…0⟩`.
    Circuit { path: PathBuf },
    /// Exact ground state plus `perturbation` times a random state.
    Ground { perturbation: f64 },
    /// Haar-like random state.
    Random,
}

fn default_layers() -> usize {
    2
}
fn default_steps() -> usize {
    100
}
fn default_lr() -> f64 {
    0.1
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig::Vqe { layers: default_layers(), steps: default_steps(), learning_rate: default_lr() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    #[serde(default = "default_weight")]
    pub max_weight: usize,
    pub max_operators: Option<usize>,
}

fn default_weight() -> usize {
    2
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig { max_weight: default_weight(), max_operators: None }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    #[serde(default = "default_keep")]
    pub keep: usize,
    /// Rank operators on data independent of the assembly data.
    #[serde(default)]
    pub independent_data: bool,
}

fn default_keep() -> usize {
    50
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig { keep: default_keep(), independent_data: false }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    /// `exact`, `gauss:<eps>`, `shadowvar:<Ns>` or `sampled:<Ns>`.
    #[serde(default = "default_mode")]
    pub mode: String,
}

fn default_mode() -> String {
    "exact".into()
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig { mode: default_mode() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizationSection {
    #[serde(default = "default_floor")]
    pub eigenvalue_floor: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    pub k_tilde_max: Option<usize>,
    #[serde(default = "default_scan_step")]
    pub scan_step: usize,
    #[serde(default)]
    pub rule: RuleName,
}

fn default_floor() -> f64 {
    1e-12
}
fn default_window() -> usize {
    5
}
fn default_scan_step() -> usize {
    1
}

impl Default for RegularizationSection {
    fn default() -> Self {
        RegularizationSection {
            eigenvalue_floor: default_floor(),
            window: default_window(),
            k_tilde_max: None,
            scan_step: default_scan_step(),
            rule: RuleName::Auto,
        }
    }
}

#[derive(Copy, Clone, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    #[default]
    Auto,
    MovingVariance,
    FirstMinimum,
    All,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateNoiseConfig {
    #[serde(default)]
    pub p1: f64,
    /// Defaults to `ratio · p1`.
    pub p2: Option<f64>,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
}

fn default_ratio() -> f64 {
    NoiseModel::TWO_QUBIT_RATIO
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySection {
    /// A Pauli word such as `ZZZZ`, or `coeff word` lines.
    pub operator: String,
    pub target: f64,
    #[serde(default = "default_sym_tol")]
    pub tol: f64,
    #[serde(default)]
    pub method: MethodName,
}

fn default_sym_tol() -> f64 {
    1e-6
}

#[derive(Copy, Clone, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    #[default]
    Project,
    Filter,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SeedsConfig {
    #[serde(default)]
    pub vqe: u64,
    #[serde(default)]
    pub shadows: u64,
    #[serde(default)]
    pub noise: u64,
    /// Random states for `ground` and `random` initializations.
    #[serde(default)]
    pub state: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    /// Also write `S` and `H` as CSV.
    #[serde(default)]
    pub dump_matrices: bool,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_out(), dump_matrices: false }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub k_values: Vec<usize>,
    /// `ε` for `gauss`, `N_s` for `shadowvar` and `sampled`.
    #[serde(default)]
    pub noise_levels: Vec<f64>,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_n_seeds")]
    pub n_seeds: usize,
}

fn default_n_seeds() -> usize {
    1
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { k_values: vec![], noise_levels: vec![], lambdas: vec![], n_seeds: default_n_seeds() }
    }
}

/// Estimator choice before any shadows are drawn.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum ModeSpec {
    Exact,
    Gauss(f64),
    ShadowVar(u64),
    Sampled(u64),
}

impl ModeSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        let text = text.trim();
        let bad = || config_err(format!("estimator mode {text:?}: expected exact, gauss:<eps>, shadowvar:<Ns> or sampled:<Ns>"));
        if text.eq_ignore_ascii_case("exact") {
            return Ok(ModeSpec::Exact);
        }
        let (kind, value) = text.split_once(':').ok_or_else(bad)?;
        let count = |v: &str| -> CliResult<u64> {
            let x: f64 = v.trim().parse().map_err(|_| bad())?;
            if x >= 1.0 && x.fract() == 0.0 && x <= 1e15 {
                Ok(x as u64)
            } else {
                Err(config_err(format!("estimator mode {text:?}: snapshot count must be a positive integer")))
            }
        };
        match kind.trim().to_ascii_lowercase().as_str() {
            "gauss" => {
                let eps: f64 = value.trim().parse().map_err(|_| bad())?;
                if !(eps.is_finite() && eps >= 0.0) {
                    return Err(config_err(format!("estimator mode {text:?}: eps must be finite and non-negative")));
                }
                Ok(ModeSpec::Gauss(eps))
            }
            "shadowvar" => Ok(ModeSpec::ShadowVar(count(value)?)),
            "sampled" => Ok(ModeSpec::Sampled(count(value)?)),
            _ => Err(bad()),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ModeSpec::Exact)
    }

    /// The same kind of mode at another noise level.
    pub fn at_level(&self, level: f64) -> CliResult<Self> {
        let count = || -> CliResult<u64> {
            if level >= 1.0 && level.fract() == 0.0 {
                Ok(level as u64)
            } else {
                Err(config_err(format!("sweep.noise_levels: {level} is not a snapshot count")))
            }
        };
        match self {
            ModeSpec::Exact => Err(config_err("sweep-noise needs a noisy estimator mode")),
            ModeSpec::Gauss(_) if level.is_finite() && level >= 0.0 => Ok(ModeSpec::Gauss(level)),
            ModeSpec::Gauss(_) => Err(config_err(format!("sweep.noise_levels: invalid eps {level}"))),
            ModeSpec::ShadowVar(_) => Ok(ModeSpec::ShadowVar(count()?)),
            ModeSpec::Sampled(_) => Ok(ModeSpec::Sampled(count()?)),
        }
    }

    /// Snapshot count behind the mode, if it has one.
    pub fn snapshots(&self) -> Option<u64> {
        match self {
            ModeSpec::ShadowVar(n) | ModeSpec::Sampled(n) => Some(*n),
            _ => None,
        }
    }

    /// Concrete estimator mode; `sampled` draws its shadows here.
    pub fn materialize(&self, state: &sse_core::sim::QuantumState, shadow_seed: u64) -> CliResult<EstimatorMode> {
        Ok(match *self {
            ModeSpec::Exact => EstimatorMode::Exact,
            ModeSpec::Gauss(e) => EstimatorMode::GaussianEps(e),
            ModeSpec::ShadowVar(n) => EstimatorMode::ShadowVariance(n),
            ModeSpec::Sampled(n) => {
                let set = sse_core::shadow::ShadowSet::sample(state, n as usize, shadow_seed)?;
                EstimatorMode::SampledShadows(Arc::new(set))
            }
        })
    }
}

impl std::fmt::Display for ModeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModeSpec::Exact => write!(f, "exact"),
            ModeSpec::Gauss(e) => write!(f, "gauss:{e}"),
            ModeSpec::ShadowVar(n) => write!(f, "shadowvar:{n}"),
            ModeSpec::Sampled(n) => write!(f, "sampled:{n}"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> CliResult<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base).map_err(|e| match e {
            CliError::Config(m) => config_err(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn mode(&self) -> CliResult<ModeSpec> {
        ModeSpec::parse(&self.estimator.mode)
    }

    fn validate(&self) -> CliResult<()> {
        if let ProblemConfig::SpinRing { n_qubits, j, onsite, onsite_seed, .. } = &self.problem {
            if !(3..=MAX_STATEVECTOR_QUBITS).contains(n_qubits) {
                return Err(config_err(format!("problem.n_qubits must be in 3..={MAX_STATEVECTOR_QUBITS}, got {n_qubits}")));
            }
            if !j.is_finite() {
                return Err(config_err("problem.j must be finite"));
            }
            match (onsite, onsite_seed) {
                (Some(_), Some(_)) => return Err(config_err("problem: give either onsite or onsite_seed, not both")),
                (Some(v), None) if v.len() != *n_qubits => {
                    return Err(config_err(format!("problem.onsite has {} values for {n_qubits} qubits", v.len())))
                }
                _ => {}
            }
        }
        if let InitConfig::Vqe { layers, learning_rate, .. } = &self.init {
            if *layers == 0 {
                return Err(config_err("init.layers must be at least 1"));
            }
            if !(learning_rate.is_finite() && *learning_rate > 0.0) {
                return Err(config_err("init.learning_rate must be positive"));
            }
        }
        if let InitConfig::Ground { perturbation } = &self.init {
            if !(perturbation.is_finite() && *perturbation >= 0.0) {
                return Err(config_err("init.perturbation must be non-negative"));
            }
        }
        if self.filter.keep == 0 {
            return Err(config_err("filter.keep must be at least 1"));
        }
        self.mode()?;
        self.regularization().validate().map_err(|e| config_err(format!("regularization: {e}")))?;
        if let Some(g) = &self.gate_noise {
            NoiseModel::with_p2(g.p1, g.p2.unwrap_or(g.ratio * g.p1)).map_err(|e| config_err(format!("gate_noise: {e}")))?;
            if !(g.ratio.is_finite() && g.ratio >= 0.0) {
                return Err(config_err("gate_noise.ratio must be non-negative"));
            }
        }
        if let Some(s) = &self.symmetry {
            parse_symmetry(&s.operator)?;
            if !(s.tol.is_finite() && s.tol >= 0.0) {
                return Err(config_err("symmetry.tol must be non-negative"));
            }
        }
        if self.sweep.n_seeds == 0 {
            return Err(config_err("sweep.n_seeds must be at least 1"));
        }
        if self.sweep.k_values.windows(2).any(|w| w[1] <= w[0]) || self.sweep.k_values.contains(&0) {
            return Err(config_err("sweep.k_values must be positive and strictly ascending"));
        }
        if self.sweep.noise_levels.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(config_err("sweep.noise_levels must be positive"));
        }
        if self.sweep.lambdas.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(config_err("sweep.lambdas must be non-negative"));
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> CliResult<ObservableSum> {
        match &self.problem {
            ProblemConfig::SpinRing { n_qubits, j, onsite, onsite_seed, boundary } => {
                let onsite = match onsite {
                    Some(v) => Onsite::Values(v.clone()),
                    None => Onsite::Seed(onsite_seed.unwrap_or(0)),
                };
                let b = match boundary {
                    BoundaryName::Periodic => Boundary::Periodic,
                    BoundaryName::Open => Boundary::Open,
                };
                build_spin_ring(*n_qubits, *j, &onsite, b).map_err(|e| config_err(format!("problem: {e}")))
            }
            ProblemConfig::File { path } => {
                let path = self.resolve(path);
                let h = load_hamiltonian(&path).map_err(|source| CliError::Input { path: path.clone(), source })?;
                if h.n_qubits() > MAX_STATEVECTOR_QUBITS {
                    return Err(config_err(format!(
                        "{}: {} qubits exceeds the limit of {MAX_STATEVECTOR_QUBITS}",
                        path.display(),
                        h.n_qubits()
                    )));
                }
                Ok(h)
            }
        }
    }

    pub fn circuit_file(&self, n_qubits: usize) -> CliResult<Option<Circuit>> {
        match &self.init {
            InitConfig::Circuit { path } => {
                let path = self.resolve(path);
                let text = std::fs::read_to_string(&path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                Circuit::parse(n_qubits, &text).map(Some).map_err(|source| CliError::Input { path, source })
            }
            _ => Ok(None),
        }
    }

    pub fn noise_model(&self) -> Option<NoiseModel> {
        self.gate_noise
            .as_ref()
            .map(|g| NoiseModel::with_p2(g.p1, g.p2.unwrap_or(g.ratio * g.p1)).expect("validated"))
    }

    pub fn regularization(&self) -> RegularizationConfig {
        let r = &self.regularization;
        RegularizationConfig {
            eigenvalue_floor: r.eigenvalue_floor,
            window: r.window,
            k_tilde_max: r.k_tilde_max,
            scan_step: r.scan_step,
            rule: match r.rule {
                RuleName::Auto => TruncationRule::Auto,
                RuleName::MovingVariance => TruncationRule::MovingVariance,
                RuleName::FirstMinimum => TruncationRule::FirstMinimum,
                RuleName::All => TruncationRule::All,
            },
        }
    }

    pub fn symmetry(&self) -> CliResult<Option<SymmetryConfig>> {
        self.symmetry
            .as_ref()
            .map(|s| {
                Ok(SymmetryConfig {
                    operator: parse_symmetry(&s.operator)?,
                    target: s.target,
                    tol: s.tol,
                    method: match s.method {
                        MethodName::Project => SymmetryMethod::Project,
                        MethodName::Filter => SymmetryMethod::Filter,
                    },
                })
            })
            .transpose()
    }

    pub fn pipeline(&self, keep: usize) -> CliResult<PipelineConfig> {
        Ok(PipelineConfig {
            max_weight: self.basis.max_weight,
            max_operators: self.basis.max_operators,
            keep,
            regularization: self.regularization(),
            symmetry: self.symmetry()?,
        })
    }
}

/// A bare word means coefficient one.
fn parse_symmetry(text: &str) -> CliResult<ObservableSum> {
    let trimmed = text.trim();
    let body = if trimmed.split_whitespace().count() == 1 { format!("1 {trimmed}") } else { trimmed.to_string() };
    ObservableSum::parse(&body).map_err(|e| config_err(format!("symmetry.operator: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[problem]
kind = "spin_ring"
n_qubits = 3
j = 0.1
onsite_seed = 4
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ExperimentConfig::from_toml(MINIMAL, ".").unwrap();
        assert_eq!(cfg.basis.max_weight, 2);
        assert_eq!(cfg.filter.keep, 50);
        assert_eq!(cfg.mode().unwrap(), ModeSpec::Exact);
        assert_eq!(cfg.hamiltonian().unwrap().n_qubits(), 3);
        assert!(matches!(cfg.init, InitConfig::Vqe { steps: 100, .. }));
    }

    #[test]
    fn mode_syntax() {
        assert_eq!(ModeSpec::parse("gauss:1e-2").unwrap(), ModeSpec::Gauss(0.01));
        assert_eq!(ModeSpec::parse("shadowvar:1e7").unwrap(), ModeSpec::ShadowVar(10_000_000));
        assert_eq!(ModeSpec::parse("sampled:1000").unwrap(), ModeSpec::Sampled(1000));
        for bad in ["gauss", "gauss:-1", "sampled:1.5", "poisson:3", "shadowvar:0"] {
            assert!(ModeSpec::parse(bad).is_err(), "{bad}");
        }
        assert_eq!(ModeSpec::Gauss(0.01).to_string(), "gauss:0.01");
        assert_eq!(ModeSpec::ShadowVar(10).at_level(20.0).unwrap(), ModeSpec::ShadowVar(20));
        assert!(ModeSpec::Exact.at_level(1e-3).is_err());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text = format!("{MINIMAL}\n[filter]\nkeep = \"many\"\n");
        let err = ExperimentConfig::from_toml(&text, ".").unwrap_err().to_string();
        assert!(err.contains("line 9"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[filter]\nkepp = 3\n");
        assert!(ExperimentConfig::from_toml(&text, ".").is_err());
        let text = MINIMAL.replace("j = 0.1", "j = 0.1\nspin = 2");
        assert!(ExperimentConfig::from_toml(&text, ".").is_err());
    }

    #[test]
    fn semantic_validation() {
        for (extra, needle) in [
            ("[filter]\nkeep = 0", "filter.keep"),
            ("[estimator]\nmode = \"gauss:x\"", "estimator mode"),
            ("[regularization]\nwindow = 1", "regularization"),
            ("[gate_noise]\np1 = 0.5", "gate_noise"),
            ("[sweep]\nk_values = [10, 5]", "k_values"),
            ("[symmetry]\noperator = \"ZZQ\"\ntarget = 1.0", "symmetry.operator"),
        ] {
            let err = ExperimentConfig::from_toml(&format!("{MINIMAL}\n{extra}\n"), ".").unwrap_err();
            assert!(matches!(err, CliError::Config(_)));
            assert!(err.to_string().contains(needle), "{err}");
        }
        let wide = MINIMAL.replace("n_qubits = 3", "n_qubits = 15");
        assert!(ExperimentConfig::from_toml(&wide, ".").is_err());
    }

    #[test]
    fn symmetry_word_shorthand() {
        assert_eq!(parse_symmetry("ZZZ").unwrap(), ObservableSum::parse("1 ZZZ").unwrap());
        assert_eq!(parse_symmetry("0.5 ZI\n0.5 IZ").unwrap().len(), 2);
    }
}
