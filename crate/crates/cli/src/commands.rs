//! The experiment verbs. Each one is a pure function of the config and
//! writes its tables into the output directory.

use serde::Serialize;
use sse_core::analysis::{h_norm, s_inv_frobenius, shot_noise_bound, spectrum_report, NoiseBoundInput};
use sse_core::exec;
use sse_core::pauli::ObservableSum;
use sse_core::shadow::{Estimator, EstimatorMode};
use sse_core::sim::{
    exact_spectrum, ground_state, run_vqe, sector_spectrum, Circuit, DensityMatrix, NoiseModel, ParamCircuit,
    QuantumState, StateVector, VqeOptions,
};
use sse_core::sse::{
    assemble_matrices, expansion_basis, local_filter, regularized_gevp, run_pipeline, solve_kept, weight_histogram,
    FilterResult, PipelineConfig, PipelineOutput, RegularizationConfig,
};

use crate::config::{ExperimentConfig, InitConfig, ModeSpec, MAX_DENSITY_QUBITS};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, fmt_opt, loglog_slope, median, std_dev, OutputDir};

/// Offset that separates the filter's data from the assembly data when
/// `filter.independent_data` is set.
const FILTER_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Largest system for which the exact reference energy is computed.
const MAX_REFERENCE_QUBITS: usize = 12;

/// Hamiltonian, noiseless initial state and the reference energy.
pub struct Problem {
    pub h: ObservableSum,
    pub state: StateVector,
    /// Circuit preparing `state`, when the initialization has one.
    pub circuit: Option<Circuit>,
    /// Ground energy, restricted to the symmetry sector when one is set.
    pub e_exact: Option<f64>,
}

pub fn prepare(cfg: &ExperimentConfig) -> CliResult<Problem> {
    let h = cfg.hamiltonian()?;
    let n = h.n_qubits();
    let (state, circuit) = match &cfg.init {
        InitConfig::Vqe { layers, steps, learning_rate } => {
            let ansatz = ParamCircuit::hardware_efficient(n, *layers)?;
            let opts = VqeOptions { steps: *steps, learning_rate: *learning_rate, seed: cfg.seeds.vqe };
            let r = run_vqe(&h, &ansatz, &opts)?;
            let c = ansatz.bind(&r.params)?;
            (r.state, Some(c))
        }
        InitConfig::Circuit { .. } => {
            let c = cfg.circuit_file(n)?.expect("circuit init");
            let mut psi = StateVector::zero(n)?;
            psi.apply_circuit(&c)?;
            (psi, Some(c))
        }
        InitConfig::Ground { perturbation } => {
            let (_, gs) = ground_state(&h)?;
            let noise = StateVector::random(n, cfg.seeds.state)?;
            let amps = gs.amplitudes().iter().zip(noise.amplitudes()).map(|(a, b)| a + b * *perturbation).collect();
            (StateVector::normalized(n, amps)?, None)
        }
        InitConfig::Random => (StateVector::random(n, cfg.seeds.state)?, None),
    };
    let e_exact = if n <= MAX_REFERENCE_QUBITS {
        Some(match cfg.symmetry()? {
            Some(s) => sector_spectrum(&h, &s.operator, s.target, s.tol)?[0],
            None => exact_spectrum(&h, Some(1))?[0],
        })
    } else {
        None
    };
    Ok(Problem { h, state, circuit, e_exact })
}

/// The state the estimators see: pure, or the circuit run under `noise`.
pub fn noisy_state(problem: &Problem, noise: Option<&NoiseModel>) -> CliResult<QuantumState> {
    let Some(noise) = noise else {
        return Ok(problem.state.clone().into());
    };
    let n = problem.h.n_qubits();
    if n > MAX_DENSITY_QUBITS {
        return Err(CliError::Config(format!("gate noise needs at most {MAX_DENSITY_QUBITS} qubits, problem has {n}")));
    }
    let c = problem
        .circuit
        .as_ref()
        .ok_or_else(|| CliError::Config("gate noise needs a circuit initialization (vqe or circuit)".into()))?;
    let mut rho = DensityMatrix::zero_state(n)?;
    rho.apply_noisy_circuit(c, noise)?;
    Ok(rho.into())
}

/// Estimator modes for repetition `rep`: assembly data and filter data.
struct Modes {
    assembly: EstimatorMode,
    filter: Option<EstimatorMode>,
    noise_seed: u64,
}

fn modes(cfg: &ExperimentConfig, spec: ModeSpec, state: &QuantumState, rep: u64) -> CliResult<Modes> {
    let shadows = cfg.seeds.shadows.wrapping_add(rep);
    let assembly = spec.materialize(state, shadows)?;
    let filter = if cfg.filter.independent_data && !spec.is_exact() {
        Some(spec.materialize(state, shadows.wrapping_add(FILTER_STREAM))?)
    } else {
        None
    };
    Ok(Modes { assembly, filter, noise_seed: cfg.seeds.noise.wrapping_add(rep) })
}

fn pipeline_once(
    pc: &PipelineConfig,
    h: &ObservableSum,
    state: &QuantumState,
    m: &Modes,
) -> CliResult<PipelineOutput> {
    let est = Estimator::new(&m.assembly, state, m.noise_seed)?;
    let fest = match &m.filter {
        Some(f) => Some(Estimator::new(f, state, m.noise_seed.wrapping_add(FILTER_STREAM))?),
        None => None,
    };
    Ok(run_pipeline(h, pc, &est, fest.as_ref())?)
}

fn abs_error(e: f64, exact: Option<f64>) -> Option<f64> {
    exact.map(|x| (e - x).abs())
}

#[derive(Clone, Debug, Serialize)]
pub struct Seeds {
    pub vqe: u64,
    pub shadows: u64,
    pub noise: u64,
    pub state: u64,
}

impl From<&ExperimentConfig> for Seeds {
    fn from(cfg: &ExperimentConfig) -> Self {
        Seeds { vqe: cfg.seeds.vqe, shadows: cfg.seeds.shadows, noise: cfg.seeds.noise, state: cfg.seeds.state }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub mode: String,
    pub seed: Seeds,
    pub n_qubits: usize,
    pub basis_size: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "K_tilde")]
    pub k_tilde: usize,
    pub n_retained: usize,
    #[serde(rename = "E_direct")]
    pub e_direct: f64,
    #[serde(rename = "E_sse")]
    pub e_sse: f64,
    #[serde(rename = "E_reported")]
    pub e_reported: f64,
    #[serde(rename = "E_exact")]
    pub e_exact: Option<f64>,
    pub error: Option<f64>,
    pub truncation_fallback: bool,
    pub truncation_short: bool,
    pub symmetry_projected: bool,
    pub energies_per_level: Vec<(usize, f64)>,
    pub spectrum: Vec<f64>,
    pub basis_weights_histogram: Vec<f64>,
}

pub fn cmd_run(cfg: &ExperimentConfig, out: &mut OutputDir) -> CliResult<RunReport> {
    let problem = prepare(cfg)?;
    let state = noisy_state(&problem, cfg.noise_model().as_ref())?;
    let spec = cfg.mode()?;
    let m = modes(cfg, spec, &state, 0)?;
    let pc = cfg.pipeline(cfg.filter.keep)?;
    let o = pipeline_once(&pc, &problem.h, &state, &m)?;
    let r = &o.result;
    let report = RunReport {
        mode: spec.to_string(),
        seed: cfg.into(),
        n_qubits: problem.h.n_qubits(),
        basis_size: o.basis_size,
        k: o.matrices.k(),
        k_tilde: r.k_tilde,
        n_retained: r.n_retained,
        e_direct: r.e_direct,
        e_sse: r.e_sse,
        e_reported: r.e_reported,
        e_exact: problem.e_exact,
        error: abs_error(r.e_reported, problem.e_exact),
        truncation_fallback: r.truncation.fallback,
        truncation_short: r.truncation.short,
        symmetry_projected: o.projected,
        energies_per_level: r.energies_per_level.clone(),
        spectrum: r.subspace_spectrum.clone(),
        basis_weights_histogram: weight_histogram(&o.matrices.basis, &r.weights),
    };
    out.json("result.json", &report)?;
    let spectrum = spectrum_report(&o.matrices.s, pc.regularization.eigenvalue_floor);
    write_spectrum(out, &spectrum.eigenvalues)?;
    out.csv(
        "energies_per_level.csv",
        &["level", "energy"],
        r.energies_per_level.iter().map(|(l, e)| vec![l.to_string(), fmt_f64(*e)]),
    )?;
    if cfg.output.dump_matrices {
        out.matrix("overlap_matrix.csv", &o.matrices.s)?;
        out.matrix("hamiltonian_matrix.csv", &o.matrices.h)?;
    }
    Ok(report)
}

fn write_spectrum(out: &mut OutputDir, eigenvalues: &[f64]) -> CliResult<()> {
    out.csv(
        "spectrum.csv",
        &["index", "eigenvalue"],
        eigenvalues.iter().enumerate().map(|(i, l)| vec![i.to_string(), fmt_f64(*l)]),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepKRow {
    pub k: usize,
    /// Operators actually kept; below `k` when the basis is smaller.
    pub k_used: usize,
    pub seed: usize,
    pub e_direct: f64,
    pub e_sse: f64,
    pub e_reported: f64,
    pub k_tilde: usize,
    pub error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub level: f64,
    pub median_error: Option<f64>,
    pub std_error: Option<f64>,
    pub median_k_tilde: f64,
}

fn summarize(level: f64, errors: Vec<Option<f64>>, k_tildes: Vec<usize>) -> SummaryRow {
    let errs: Option<Vec<f64>> = errors.into_iter().collect();
    let kt: Vec<f64> = k_tildes.into_iter().map(|k| k as f64).collect();
    SummaryRow {
        level,
        median_error: errs.as_deref().map(median),
        std_error: errs.as_deref().map(std_dev),
        median_k_tilde: median(&kt),
    }
}

fn require<T>(v: &[T], what: &str) -> CliResult<()> {
    if v.is_empty() {
        return Err(CliError::Config(format!("sweep.{what} is empty")));
    }
    Ok(())
}

/// One run per `K` and seed; the ranking is computed once per seed so the
/// kept sets are nested.
pub fn cmd_sweep_k(cfg: &ExperimentConfig, out: &mut OutputDir) -> CliResult<(Vec<SweepKRow>, Vec<SummaryRow>)> {
    let ks = &cfg.sweep.k_values;
    require(ks, "k_values")?;
    let problem = prepare(cfg)?;
    let state = noisy_state(&problem, cfg.noise_model().as_ref())?;
    let spec = cfg.mode()?;
    let k_max = *ks.last().expect("non-empty");
    let pc = cfg.pipeline(k_max)?;
    let per_seed = exec::try_map_range(cfg.sweep.n_seeds, |seed| -> CliResult<Vec<SweepKRow>> {
        let m = modes(cfg, spec, &state, seed as u64)?;
        let est = Estimator::new(&m.assembly, &state, m.noise_seed)?;
        let fest = match &m.filter {
            Some(f) => Some(Estimator::new(f, &state, m.noise_seed.wrapping_add(FILTER_STREAM))?),
            None => None,
        };
        let (basis, project) = expansion_basis(problem.h.n_qubits(), &pc)?;
        let ranking = local_filter(
            &basis,
            &problem.h,
            fest.as_ref().unwrap_or(&est),
            k_max,
            pc.regularization.eigenvalue_floor,
        )?;
        ks.iter()
            .map(|&k| {
                let kept = ranking.with_keep(k)?.kept();
                let (_, r) = solve_kept(&kept, &problem.h, &pc, project, &est)?;
                Ok(SweepKRow {
                    k,
                    k_used: kept.len(),
                    seed,
                    e_direct: r.e_direct,
                    e_sse: r.e_sse,
                    e_reported: r.e_reported,
                    k_tilde: r.k_tilde,
                    error: abs_error(r.e_reported, problem.e_exact),
                })
            })
            .collect()
    })?;
    let rows: Vec<SweepKRow> = per_seed.into_iter().flatten().collect();
    out.csv(
        "sweep_k.csv",
        &["K", "K_used", "seed", "E_direct", "E_sse", "E_reported", "K_tilde", "error"],
        rows.iter().map(|r| {
            vec![
                r.k.to_string(),
                r.k_used.to_string(),
                r.seed.to_string(),
                fmt_f64(r.e_direct),
                fmt_f64(r.e_sse),
                fmt_f64(r.e_reported),
                r.k_tilde.to_string(),
                fmt_opt(r.error),
            ]
        }),
    )?;
    let summary: Vec<SummaryRow> = ks
        .iter()
        .map(|&k| {
            let sel: Vec<&SweepKRow> = rows.iter().filter(|r| r.k == k).collect();
            summarize(k as f64, sel.iter().map(|r| r.error).collect(), sel.iter().map(|r| r.k_tilde).collect())
        })
        .collect();
    write_summary(out, "sweep_k_summary.csv", "K", &summary)?;
    Ok((rows, summary))
}

fn write_summary(out: &mut OutputDir, name: &str, level: &str, rows: &[SummaryRow]) -> CliResult<()> {
    out.csv(
        name,
        &[level, "median_error", "std_error", "median_K_tilde"],
        rows.iter().map(|r| {
            vec![fmt_f64(r.level), fmt_opt(r.median_error), fmt_opt(r.std_error), fmt_f64(r.median_k_tilde)]
        }),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct NoiseSweepReport {
    pub mode: String,
    pub n_seeds: usize,
    pub levels: Vec<f64>,
    pub median_errors: Vec<Option<f64>>,
    /// Slope of log median error against log noise level; informational.
    pub loglog_slope: Option<f64>,
    /// Probe word and the variance of its estimate across seeds, per level.
    pub probe_word: String,
    pub probe_variance: Vec<f64>,
}

/// Runs at each noise level with fresh noise seeds per level.
pub fn cmd_sweep_noise(cfg: &ExperimentConfig, out: &mut OutputDir) -> CliResult<(Vec<SummaryRow>, NoiseSweepReport)> {
    let levels = &cfg.sweep.noise_levels;
    require(levels, "noise_levels")?;
    let spec = cfg.mode()?;
    let specs: Vec<ModeSpec> = levels.iter().map(|&l| spec.at_level(l)).collect::<CliResult<_>>()?;
    let problem = prepare(cfg)?;
    let state = noisy_state(&problem, cfg.noise_model().as_ref())?;
    let pc = cfg.pipeline(cfg.filter.keep)?;
    let probe = problem
        .h
        .terms()
        .iter()
        .map(|(_, w)| *w)
        .find(|w| !w.is_identity())
        .ok_or_else(|| CliError::Config("Hamiltonian has no non-identity term".into()))?;
    let n_seeds = cfg.sweep.n_seeds;
    let runs = exec::try_map_range(levels.len() * n_seeds, |idx| -> CliResult<(f64, Option<f64>, usize, f64)> {
        let m = modes(cfg, specs[idx / n_seeds], &state, idx as u64)?;
        let o = pipeline_once(&pc, &problem.h, &state, &m)?;
        let probe_value = Estimator::new(&m.assembly, &state, m.noise_seed)?.word_value(&probe)?.re;
        Ok((o.result.e_reported, abs_error(o.result.e_reported, problem.e_exact), o.result.k_tilde, probe_value))
    })?;
    out.csv(
        "sweep_noise.csv",
        &["level", "seed", "E_reported", "error", "K_tilde", "probe_estimate"],
        runs.iter().enumerate().map(|(idx, r)| {
            vec![
                fmt_f64(levels[idx / n_seeds]),
                (idx % n_seeds).to_string(),
                fmt_f64(r.0),
                fmt_opt(r.1),
                r.2.to_string(),
                fmt_f64(r.3),
            ]
        }),
    )?;
    let mut summary = Vec::new();
    let mut probe_variance = Vec::new();
    for (li, &level) in levels.iter().enumerate() {
        let chunk = &runs[li * n_seeds..(li + 1) * n_seeds];
        summary.push(summarize(level, chunk.iter().map(|r| r.1).collect(), chunk.iter().map(|r| r.2).collect()));
        let probes: Vec<f64> = chunk.iter().map(|r| r.3).collect();
        probe_variance.push(std_dev(&probes).powi(2));
    }
    write_summary(out, "sweep_noise_summary.csv", "level", &summary)?;
    let medians: Vec<Option<f64>> = summary.iter().map(|s| s.median_error).collect();
    let slope = match medians.iter().copied().collect::<Option<Vec<f64>>>() {
        Some(m) => loglog_slope(levels, &m),
        None => None,
    };
    let report = NoiseSweepReport {
        mode: spec.to_string(),
        n_seeds,
        levels: levels.clone(),
        median_errors: medians,
        loglog_slope: slope,
        probe_word: probe.to_string(),
        probe_variance,
    };
    out.json("sweep_noise_report.json", &report)?;
    Ok((summary, report))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateNoiseRow {
    pub lambda: f64,
    pub p1: f64,
    pub p2: f64,
    pub seed: usize,
    /// `⟨H⟩` of the noisy state without estimation noise.
    pub e_noisy: f64,
    pub e_direct_noisy: f64,
    pub e_sse: f64,
    pub e_reported: f64,
    /// `E_direct_noisy - E_reported`.
    pub improvement: f64,
    pub k_tilde: usize,
    pub k_tilde_unclamped: usize,
    pub error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateNoiseSummary {
    pub lambda: f64,
    pub median_improvement: f64,
    pub std_improvement: f64,
    pub median_k_tilde: f64,
    pub median_k_tilde_unclamped: f64,
    pub median_error: Option<f64>,
}

/// SSE on the circuit state under depolarizing noise scaled to each fault
/// rate `λ`.
pub fn cmd_gate_noise(
    cfg: &ExperimentConfig,
    out: &mut OutputDir,
) -> CliResult<(Vec<GateNoiseRow>, Vec<GateNoiseSummary>)> {
    let lambdas = &cfg.sweep.lambdas;
    require(lambdas, "lambdas")?;
    let problem = prepare(cfg)?;
    let circuit =
        problem.circuit.as_ref().ok_or_else(|| CliError::Config("gate-noise needs a vqe or circuit initialization".into()))?;
    let ratio = cfg.gate_noise.as_ref().map(|g| g.ratio).unwrap_or(NoiseModel::TWO_QUBIT_RATIO);
    let spec = cfg.mode()?;
    let pc = cfg.pipeline(cfg.filter.keep)?;
    let unclamped = RegularizationConfig { k_tilde_max: None, ..pc.regularization.clone() };
    let n_seeds = cfg.sweep.n_seeds;
    let mut rows = Vec::new();
    for &lambda in lambdas {
        let noise = NoiseModel::for_fault_rate(circuit, lambda, ratio).map_err(|e| CliError::Config(e.to_string()))?;
        let state = noisy_state(&problem, Some(&noise))?;
        let e_noisy = state.expectation(&problem.h)?;
        let per_seed = exec::try_map_range(n_seeds, |seed| -> CliResult<GateNoiseRow> {
            let m = modes(cfg, spec, &state, seed as u64)?;
            let o = pipeline_once(&pc, &problem.h, &state, &m)?;
            let k_tilde_unclamped = if pc.regularization.k_tilde_max.is_some() {
                regularized_gevp(&o.matrices, &unclamped)?.k_tilde
            } else {
                o.result.k_tilde
            };
            let r = &o.result;
            Ok(GateNoiseRow {
                lambda,
                p1: noise.p1,
                p2: noise.p2,
                seed,
                e_noisy,
                e_direct_noisy: r.e_direct,
                e_sse: r.e_sse,
                e_reported: r.e_reported,
                improvement: r.e_direct - r.e_reported,
                k_tilde: r.k_tilde,
                k_tilde_unclamped,
                error: abs_error(r.e_reported, problem.e_exact),
            })
        })?;
        rows.extend(per_seed);
    }
    out.csv(
        "gate_noise.csv",
        &[
            "lambda",
            "p1",
            "p2",
            "seed",
            "E_noisy",
            "E_direct_noisy",
            "E_sse",
            "E_reported",
            "improvement",
            "K_tilde",
            "K_tilde_unclamped",
            "error",
        ],
        rows.iter().map(|r| {
            vec![
                fmt_f64(r.lambda),
                fmt_f64(r.p1),
                fmt_f64(r.p2),
                r.seed.to_string(),
                fmt_f64(r.e_noisy),
                fmt_f64(r.e_direct_noisy),
                fmt_f64(r.e_sse),
                fmt_f64(r.e_reported),
                fmt_f64(r.improvement),
                r.k_tilde.to_string(),
                r.k_tilde_unclamped.to_string(),
                fmt_opt(r.error),
            ]
        }),
    )?;
    let summary: Vec<GateNoiseSummary> = lambdas
        .iter()
        .map(|&lambda| {
            let sel: Vec<&GateNoiseRow> = rows.iter().filter(|r| r.lambda == lambda).collect();
            let imp: Vec<f64> = sel.iter().map(|r| r.improvement).collect();
            let kt: Vec<f64> = sel.iter().map(|r| r.k_tilde as f64).collect();
            let ku: Vec<f64> = sel.iter().map(|r| r.k_tilde_unclamped as f64).collect();
            let errs: Option<Vec<f64>> = sel.iter().map(|r| r.error).collect();
            GateNoiseSummary {
                lambda,
                median_improvement: median(&imp),
                std_improvement: std_dev(&imp),
                median_k_tilde: median(&kt),
                median_k_tilde_unclamped: median(&ku),
                median_error: errs.as_deref().map(median),
            }
        })
        .collect();
    out.csv(
        "gate_noise_summary.csv",
        &["lambda", "median_improvement", "std_improvement", "median_K_tilde", "median_K_tilde_unclamped", "median_error"],
        summary.iter().map(|s| {
            vec![
                fmt_f64(s.lambda),
                fmt_f64(s.median_improvement),
                fmt_f64(s.std_improvement),
                fmt_f64(s.median_k_tilde),
                fmt_f64(s.median_k_tilde_unclamped),
                fmt_opt(s.median_error),
            ]
        }),
    )?;
    Ok((rows, summary))
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumBoundReport {
    pub mode: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub eigenvalue_floor: f64,
    pub above_floor: usize,
    pub negative: usize,
    pub largest: f64,
    pub n_snapshots: Option<u64>,
    pub w: usize,
    pub w_prime: usize,
    pub s_inv_frobenius: Option<f64>,
    pub h_inf_upper: f64,
    pub h_norm_exact: bool,
    /// Shot-noise bound on `ε_M²`; absent without a snapshot count.
    pub bound: Option<f64>,
}

/// Overlap spectrum of the filtered basis and the shot-noise bound.
pub fn cmd_spectrum(cfg: &ExperimentConfig, out: &mut OutputDir) -> CliResult<SpectrumBoundReport> {
    let problem = prepare(cfg)?;
    let state = noisy_state(&problem, cfg.noise_model().as_ref())?;
    let spec = cfg.mode()?;
    let m = modes(cfg, spec, &state, 0)?;
    let est = Estimator::new(&m.assembly, &state, m.noise_seed)?;
    let pc = cfg.pipeline(cfg.filter.keep)?;
    let filter = filter_with(&pc, &problem.h, &state, &m, &est)?;
    let kept = filter.kept();
    let mats = assemble_matrices(&kept, &problem.h, &est, None)?;
    let floor = pc.regularization.eigenvalue_floor;
    let sr = spectrum_report(&mats.s, floor);
    write_spectrum(out, &sr.eigenvalues)?;
    let norm = h_norm(&problem.h);
    let s_inv = s_inv_frobenius(&mats.s, floor).ok();
    let w = problem.h.max_weight();
    let w_prime = kept.iter().map(|g| g.weight()).max().unwrap_or(0);
    let bound = match (spec.snapshots(), s_inv) {
        (Some(n), Some(s)) => Some(shot_noise_bound(&NoiseBoundInput {
            n_snapshots: n as f64,
            w,
            w_prime,
            k: kept.len(),
            s_inv_frobenius: s,
            h_inf_upper: norm.value,
        })),
        _ => None,
    };
    let report = SpectrumBoundReport {
        mode: spec.to_string(),
        k: kept.len(),
        eigenvalue_floor: floor,
        above_floor: sr.above_floor,
        negative: sr.negative,
        largest: sr.largest(),
        n_snapshots: spec.snapshots(),
        w,
        w_prime,
        s_inv_frobenius: s_inv,
        h_inf_upper: norm.value,
        h_norm_exact: norm.exact,
        bound,
    };
    out.json("bound.json", &report)?;
    Ok(report)
}

fn filter_with(
    pc: &PipelineConfig,
    h: &ObservableSum,
    state: &QuantumState,
    m: &Modes,
    est: &Estimator,
) -> CliResult<FilterResult> {
    let (basis, _) = expansion_basis(h.n_qubits(), pc)?;
    let fest = match &m.filter {
        Some(f) => Some(Estimator::new(f, state, m.noise_seed.wrapping_add(FILTER_STREAM))?),
        None => None,
    };
    Ok(local_filter(&basis, h, fest.as_ref().unwrap_or(est), pc.keep, pc.regularization.eigenvalue_floor)?)
}

/// The ranking of every candidate operator by its two-dimensional gap.
pub fn cmd_filter_report(cfg: &ExperimentConfig, out: &mut OutputDir) -> CliResult<FilterResult> {
    let problem = prepare(cfg)?;
    let state = noisy_state(&problem, cfg.noise_model().as_ref())?;
    let spec = cfg.mode()?;
    let m = modes(cfg, spec, &state, 0)?;
    let est = Estimator::new(&m.assembly, &state, m.noise_seed)?;
    let pc = cfg.pipeline(cfg.filter.keep)?;
    let f = filter_with(&pc, &problem.h, &state, &m, &est)?;
    let identity = f.kept()[0];
    let mut rows = vec![vec!["0".to_string(), identity.to_string(), "0".to_string(), fmt_f64(0.0), "true".to_string()]];
    rows.extend(f.ranked.iter().enumerate().map(|(i, (g, d))| {
        vec![(i + 1).to_string(), g.to_string(), g.weight().to_string(), fmt_f64(*d), (i + 1 < f.k_kept).to_string()]
    }));
    out.csv("filter.csv", &["rank", "operator", "weight", "delta_e", "kept"], rows)?;
    Ok(f)
}
