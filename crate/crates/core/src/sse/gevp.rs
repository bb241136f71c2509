use num_complex::Complex64;

use crate::error::{Result, SseError};
use crate::exec;
use crate::linalg::{eigh, eigvalsh, leading_block, quadratic_form, CMat};
use crate::sse::SseMatrices;

/// How the effective dimension `K̃` is picked from the level scan.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum TruncationRule {
    /// [`All`](Self::All) for exact matrices, moving variance otherwise.
    #[default]
    Auto,
    /// Global minimum of the moving variance.
    MovingVariance,
    /// First confirmed local minimum of the moving variance.
    FirstMinimum,
    /// Every eigenvector above the floor (subject to `k_tilde_max`).
    All,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularizationConfig {
    /// Overlap eigenvalues at or below this are discarded.
    pub eigenvalue_floor: f64,
    pub window: usize,
    pub k_tilde_max: Option<usize>,
    pub scan_step: usize,
    pub rule: TruncationRule,
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        RegularizationConfig {
            eigenvalue_floor: 1e-12,
            window: 5,
            k_tilde_max: None,
            scan_step: 1,
            rule: TruncationRule::Auto,
        }
    }
}

impl RegularizationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eigenvalue_floor >= 0.0 && self.eigenvalue_floor.is_finite()) {
            return Err(SseError::InvalidParameter(format!(
                "eigenvalue floor must be non-negative, got {}",
                self.eigenvalue_floor
            )));
        }
        if self.window < 2 {
            return Err(SseError::InvalidParameter(format!("window must be at least 2, got {}", self.window)));
        }
        if self.scan_step == 0 {
            return Err(SseError::InvalidParameter("scan step must be at least 1".into()));
        }
        if self.k_tilde_max == Some(0) {
            return Err(SseError::InvalidParameter("k_tilde_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of [`choose_truncation`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Truncation {
    /// Index into the energy sequence.
    pub index: usize,
    /// The first-minimum rule found no confirmed minimum and used the global one.
    pub fallback: bool,
    /// Fewer energies than the window; the last index was used.
    pub short: bool,
}

fn population_variance(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64
}

fn moving_variances(energies: &[f64], window: usize) -> Vec<f64> {
    energies.windows(window).map(population_variance).collect()
}

fn last_global_minimum(v: &[f64]) -> usize {
    let mut best = 0;
    for t in 1..v.len() {
        if v[t] <= v[best] {
            best = t;
        }
    }
    best
}

/// Moving-variance stopping rule.
///
/// `v_j` is the population variance of the `window` energies ending at `j`;
/// the chosen index is the `j` of the smallest `v_j`, the last one on ties.
pub fn choose_truncation(energies: &[f64], window: usize) -> Truncation {
    let window = window.max(2);
    if energies.len() < window {
        return Truncation { index: energies.len().saturating_sub(1), fallback: false, short: true };
    }
    let v = moving_variances(energies, window);
    Truncation { index: last_global_minimum(&v) + window - 1, fallback: false, short: false }
}

/// Stricter variant: the first local minimum of `v` that is followed by a
/// strict rise and then `window` non-decreasing values, falling back to
/// [`choose_truncation`] when no such pattern exists.
pub fn choose_truncation_first_minimum(energies: &[f64], window: usize) -> Truncation {
    let window = window.max(2);
    if energies.len() < window {
        return choose_truncation(energies, window);
    }
    let v = moving_variances(energies, window);
    for t in 0..v.len() {
        let dips = t == 0 || v[t] <= v[t - 1];
        let confirmed =
            t + window < v.len() && v[t + 1] > v[t] && v[t + 1..=t + window].windows(2).all(|w| w[1] >= w[0]);
        if dips && confirmed {
            return Truncation { index: t + window - 1, fallback: false, short: false };
        }
    }
    Truncation { index: last_global_minimum(&v) + window - 1, fallback: true, short: false }
}

/// `min(E_sse, E_direct)`.
pub fn clamp_to_direct(e_sse: f64, e_direct: f64) -> f64 {
    e_sse.min(e_direct)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SseResult {
    pub e_direct: f64,
    /// `(l, E_0^l)` for every scanned level.
    pub energies_per_level: Vec<(usize, f64)>,
    pub k_tilde: usize,
    pub e_sse: f64,
    pub e_reported: f64,
    /// Coefficients on the expansion basis, `w† S w = 1`.
    pub weights: Vec<Complex64>,
    /// Ascending eigenvalues of the regularized problem at `K̃`.
    pub subspace_spectrum: Vec<f64>,
    /// Overlap eigenvalues above the floor.
    pub n_retained: usize,
    pub truncation: Truncation,
}

/// Overlap eigenvectors above `floor`, largest first, and their eigenvalues.
pub fn regularize(s: &CMat, floor: f64) -> Result<(CMat, Vec<f64>)> {
    let eig = eigh(s);
    let keep: Vec<usize> = (0..eig.values.len()).rev().filter(|&i| eig.values[i] > floor).collect();
    if keep.is_empty() {
        return Err(SseError::DegenerateOverlap);
    }
    Ok((eig.vectors.select_columns(&keep), keep.iter().map(|&i| eig.values[i]).collect()))
}

/// `Q D^{-1/2}`: maps whitened coordinates back to the basis.
pub(crate) fn whitening(q: &CMat, d: &[f64]) -> CMat {
    let mut t = q.clone();
    for (j, dj) in d.iter().enumerate() {
        t.column_mut(j).scale_mut(1.0 / dj.sqrt());
    }
    t
}

fn scan_levels(l_max: usize, step: usize) -> Vec<usize> {
    let mut ls: Vec<usize> = (1..=l_max).step_by(step).collect();
    if ls.last() != Some(&l_max) {
        ls.push(l_max);
    }
    ls
}

/// Solves `H w = E S w` on the well-conditioned part of `S`.
///
/// Overlap eigenvectors above the floor are taken in descending eigenvalue
/// order; `E_0^l` is the lowest eigenvalue of the whitened problem on the
/// leading `l` of them. `K̃` comes from the configured rule. The returned
/// result has `e_reported = e_sse`; see [`clamp_to_direct`].
pub fn regularized_gevp(m: &SseMatrices, cfg: &RegularizationConfig) -> Result<SseResult> {
    cfg.validate()?;
    let (q, d) = regularize(&m.s, cfg.eigenvalue_floor)?;
    let t = whitening(&q, &d);
    let whitened = crate::linalg::hermitian_part(&(t.adjoint() * &m.h * &t));
    let l_max = cfg.k_tilde_max.map_or(d.len(), |c| c.min(d.len()));
    let levels = scan_levels(l_max, cfg.scan_step);
    let energies = exec::map_slice(&levels, |&l| eigvalsh(&leading_block(&whitened, l))[0]);

    let rule = match cfg.rule {
        TruncationRule::Auto if m.exact => TruncationRule::All,
        TruncationRule::Auto => TruncationRule::MovingVariance,
        r => r,
    };
    let truncation = match rule {
        TruncationRule::MovingVariance => choose_truncation(&energies, cfg.window),
        TruncationRule::FirstMinimum => choose_truncation_first_minimum(&energies, cfg.window),
        _ => Truncation { index: levels.len() - 1, fallback: false, short: false },
    };
    let k_tilde = levels[truncation.index];

    let sub = eigh(&leading_block(&whitened, k_tilde));
    let v = sub.vectors.column(0);
    let mut w = t.columns(0, k_tilde) * v;
    let norm = quadratic_form(&m.s, w.as_slice()).re;
    if norm > 0.0 {
        w.scale_mut(1.0 / norm.sqrt());
    }
    // With a projection, w† S' w = (T w)† S (T w), so the gauge carries over.
    if let Some(tr) = &m.transform {
        w = tr * w;
    }
    Ok(SseResult {
        e_direct: m.e_direct,
        energies_per_level: levels.into_iter().zip(energies).collect(),
        k_tilde,
        e_sse: sub.values[0],
        e_reported: sub.values[0],
        weights: w.iter().copied().collect(),
        subspace_spectrum: sub.values,
        n_retained: d.len(),
        truncation,
    })
}
