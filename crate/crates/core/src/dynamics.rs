//! Quench dynamics within one magnetization sector: outcome probabilities
//! in the configuration basis, spectral support statistics and regimes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{project_sector, Space, StateVector};
use crate::spectrum::{cluster_sorted, SpectrumResult};
use crate::tolerances;

/// `n` evenly spaced times on `[0, t_max]` (units h/J).
pub fn time_grid(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect(),
    }
}

pub const DEFAULT_T_MAX: f64 = 1.0;
pub const DEFAULT_T_STEPS: usize = 2001;

/// One degenerate eigenspace with nonzero overlap with the initial state.
#[derive(Clone, Debug)]
pub struct SupportCluster {
    /// Eigenvalue indices of the cluster in the sector spectrum.
    pub indices: std::ops::Range<usize>,
    pub energy: f64,
    /// Projection of the initial state onto the cluster.
    pub component: Vec<Complex64>,
    /// `‖P_cluster ψ₀‖`.
    pub weight: f64,
}

/// Eigenspaces reached by the initial state.
#[derive(Clone, Debug)]
pub struct SpectralSupport {
    pub m: i32,
    pub clusters: Vec<SupportCluster>,
    /// Per-eigenvector overlaps `⟨Ψ_ν|ψ₀⟩` above the support threshold.
    pub overlaps: Vec<(usize, Complex64)>,
    /// Frequency distinctness tolerance (the degeneracy tolerance).
    pub tolerance: f64,
}

impl SpectralSupport {
    pub fn delta0(&self) -> usize {
        self.clusters.len()
    }

    /// Coordinates of `P₀|c_k⟩` in the orthonormal basis formed by the
    /// normalized cluster components.
    pub fn outcome_coordinates(&self, k: usize) -> Vec<Complex64> {
        self.clusters
            .iter()
            .map(|c| c.component[k].conj() / c.weight)
            .collect()
    }

    /// Dense `P₀` on the sector, row-major.
    pub fn projector(&self) -> Vec<Vec<Complex64>> {
        let d = self.clusters.first().map_or(0, |c| c.component.len());
        let mut p = vec![vec![Complex64::new(0.0, 0.0); d]; d];
        for c in &self.clusters {
            let w2 = c.weight * c.weight;
            for (i, row) in p.iter_mut().enumerate() {
                for (j, x) in row.iter_mut().enumerate() {
                    *x += c.component[i] * c.component[j].conj() / w2;
                }
            }
        }
        p
    }

    /// `Σ_k e^{-i2π E_k t} P_k ψ₀` at time `t` (units h/J).
    pub fn amplitudes(&self, t: f64) -> Vec<Complex64> {
        let d = self.clusters.first().map_or(0, |c| c.component.len());
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        for c in &self.clusters {
            let phase = Complex64::from_polar(1.0, -std::f64::consts::TAU * c.energy * t);
            for (o, a) in out.iter_mut().zip(&c.component) {
                *o += phase * a;
            }
        }
        out
    }
}

fn sector_component(state: &StateVector, m: i32) -> Result<StateVector> {
    match state.space {
        Space::Full => Ok(project_sector(state, m)?.0),
        Space::Sector(s) if s == m => Ok(state.clone()),
        Space::Sector(s) => Err(Error::InvalidInput(format!(
            "state lives in sector M={s}, spectrum in M={m}"
        ))),
    }
}

/// Spectral support of the sector-`M` component of `state` (not
/// renormalized). Degenerate eigenspaces count once each.
pub fn spectral_support(state: &StateVector, spectrum: &SpectrumResult) -> Result<SpectralSupport> {
    spectral_support_with(state, spectrum, tolerances::SUPPORT)
}

/// As [`spectral_support`] with a custom threshold on `‖P_cluster ψ₀‖`.
pub fn spectral_support_with(state: &StateVector, spectrum: &SpectrumResult, support_tol: f64) -> Result<SpectralSupport> {
    let psi = sector_component(state, spectrum.m)?;
    let re = psi.real_parts();
    let im = psi.imag_parts();
    let d = spectrum.dim();
    let overlaps_all: Vec<Complex64> = (0..d)
        .into_par_iter()
        .map(|k| {
            let v = spectrum.eigenvectors.col(k);
            let (mut a, mut b) = (0.0, 0.0);
            for (i, &x) in v.iter().enumerate() {
                a += x * re[i];
                b += x * im[i];
            }
            Complex64::new(a, b)
        })
        .collect();
    let mut clusters = Vec::new();
    for range in &spectrum.clusters {
        let mut component = vec![Complex64::new(0.0, 0.0); d];
        for k in range.clone() {
            let o = overlaps_all[k];
            if o == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (c, &x) in component.iter_mut().zip(spectrum.eigenvectors.col(k).iter()) {
                *c += o * x;
            }
        }
        let weight = component.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if weight > support_tol {
            let energy =
                range.clone().map(|k| spectrum.eigenvalues[k]).sum::<f64>() / range.len() as f64;
            clusters.push(SupportCluster {
                indices: range.clone(),
                energy,
                component,
                weight,
            });
        }
    }
    let overlaps = overlaps_all
        .into_iter()
        .enumerate()
        .filter(|(_, o)| o.norm() > support_tol)
        .collect();
    Ok(SpectralSupport {
        m: spectrum.m,
        clusters,
        overlaps,
        tolerance: spectrum.tolerance,
    })
}

/// Outcome indices grouped by equality of `P₀|c_f⟩` up to a global phase
/// (a sign for real states).
pub fn equiprobability_classes(support: &SpectralSupport) -> Vec<Vec<usize>> {
    let d = support.clusters.first().map_or(0, |c| c.component.len());
    let rows: Vec<Vec<Complex64>> = (0..d)
        .into_par_iter()
        .map(|k| canonical_phase(support.outcome_coordinates(k)))
        .collect();
    let mut reps: Vec<usize> = Vec::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        let found = reps.iter().position(|&r| {
            rows[r]
                .iter()
                .zip(row)
                .all(|(a, b)| (a - b).norm() < tolerances::OUTCOME_VECTOR)
        });
        match found {
            Some(c) => classes[c].push(k),
            None => {
                reps.push(k);
                classes.push(vec![k]);
            }
        }
    }
    classes
}

/// Rotate so that the first clearly nonzero entry is real and positive.
fn canonical_phase(mut row: Vec<Complex64>) -> Vec<Complex64> {
    let scale = row.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale < tolerances::OUTCOME_VECTOR {
        row.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        return row;
    }
    if let Some(pivot) = row.iter().find(|x| x.norm() > 1e-4 * scale) {
        let phase = pivot.conj() / pivot.norm();
        row.iter_mut().for_each(|x| *x *= phase);
    }
    row
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FrequencyCount {
    /// `δ₀(δ₀ − 1)/2`.
    pub formula: usize,
    /// Numerically distinct positive differences `E_a − E_b`.
    pub distinct: usize,
}

pub fn frequency_count(support: &SpectralSupport) -> FrequencyCount {
    let n = support.delta0();
    let mut diffs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            diffs.push((support.clusters[a].energy - support.clusters[b].energy).abs());
        }
    }
    diffs.sort_by(f64::total_cmp);
    FrequencyCount {
        formula: n * n.saturating_sub(1) / 2,
        distinct: cluster_sorted(&diffs, support.tolerance).len(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TrajectoryStats {
    pub delta0: usize,
    pub n_p: usize,
    pub n_nu: FrequencyCount,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub m: i32,
    pub times: Vec<f64>,
    /// `probs[f][t]`, rescaled so each time slice sums to 1.
    pub probs: Vec<Vec<f64>>,
    pub classes: Vec<Vec<usize>>,
    pub stats: TrajectoryStats,
    /// Squared norm of the sector component before rescaling.
    pub sector_weight: f64,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn max_over_time(&self, f: usize) -> f64 {
        self.probs[f].iter().copied().fold(0.0, f64::max)
    }
}

/// Evolve `state` (full space or already in the sector) under the sector
/// spectrum and record rescaled outcome probabilities at `times`.
pub fn evolve_probabilities(state: &StateVector, spectrum: &SpectrumResult, times: &[f64]) -> Result<Trajectory> {
    evolve_probabilities_with(state, spectrum, times, tolerances::SUPPORT)
}

pub fn evolve_probabilities_with(
    state: &StateVector,
    spectrum: &SpectrumResult,
    times: &[f64],
    support_tol: f64,
) -> Result<Trajectory> {
    let psi = sector_component(state, spectrum.m)?;
    let weight = psi.norm_sqr();
    if weight.sqrt() <= support_tol {
        return Err(Error::EmptySector(spectrum.m));
    }
    let psi = psi.normalized().expect("nonzero");
    let support = spectral_support_with(&psi, spectrum, support_tol)?;
    let classes = equiprobability_classes(&support);
    let stats = TrajectoryStats {
        delta0: support.delta0(),
        n_p: classes.len(),
        n_nu: frequency_count(&support),
    };
    let columns: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| support.amplitudes(t).iter().map(|a| a.norm_sqr()).collect())
        .collect();
    let d = spectrum.dim();
    let probs = (0..d).map(|f| columns.iter().map(|c| c[f]).collect()).collect();
    Ok(Trajectory {
        m: spectrum.m,
        times: times.to_vec(),
        probs,
        classes,
        stats,
        sector_weight: weight,
    })
}

/// `|⟨ψ₀|ψ(t)⟩|²` for the normalized sector component of `state`.
pub fn return_probability(state: &StateVector, spectrum: &SpectrumResult, times: &[f64]) -> Result<Vec<f64>> {
    let psi = sector_component(state, spectrum.m)?;
    let psi = psi.normalized().ok_or(Error::EmptySector(spectrum.m))?;
    let support = spectral_support(&psi, spectrum)?;
    Ok(times
        .iter()
        .map(|&t| {
            support
                .clusters
                .iter()
                .map(|c| Complex64::from_polar(c.weight * c.weight, -std::f64::consts::TAU * c.energy * t))
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollapseMetrics {
    pub initial_dominant: usize,
    pub initial_probability: f64,
    /// First time the initially dominant outcome drops below the threshold.
    pub collapse_time: Option<f64>,
    /// Outcomes whose maximum exceeds twice the third-largest maximum.
    pub dominant: Vec<usize>,
    /// Largest probability reached by any other outcome.
    pub tail_max: f64,
}

pub fn collapse_metrics(traj: &Trajectory) -> CollapseMetrics {
    let threshold = tolerances::COLLAPSE_PROBABILITY;
    let (initial_dominant, initial_probability) = (0..traj.dim())
        .map(|f| (f, traj.probs[f][0]))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let collapse_time = if initial_probability >= threshold {
        traj.probs[initial_dominant]
            .iter()
            .position(|&p| p < threshold)
            .map(|k| traj.times[k])
    } else {
        None
    };
    let mut maxima: Vec<(usize, f64)> = (0..traj.dim()).map(|f| (f, traj.max_over_time(f))).collect();
    maxima.sort_by(|a, b| b.1.total_cmp(&a.1));
    let third = maxima.get(2).map_or(0.0, |x| x.1);
    let mut dominant: Vec<usize> = maxima.iter().filter(|x| x.1 > 2.0 * third).map(|x| x.0).collect();
    dominant.sort();
    let tail_max = maxima
        .iter()
        .filter(|x| !dominant.contains(&x.0))
        .map(|x| x.1)
        .fold(0.0, f64::max);
    CollapseMetrics {
        initial_dominant,
        initial_probability,
        collapse_time,
        dominant,
        tail_max,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Constant,
    Sinusoidal,
    Aperiodic,
    Collapse,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Constant => "constant",
            Regime::Sinusoidal => "sinusoidal",
            Regime::Aperiodic => "aperiodic",
            Regime::Collapse => "collapse",
        })
    }
}

pub fn regime_classifier(traj: &Trajectory) -> Regime {
    match traj.stats.n_nu.distinct {
        0 => Regime::Constant,
        1 => Regime::Sinusoidal,
        _ if collapse_metrics(traj).collapse_time.is_some() => Regime::Collapse,
        _ => Regime::Aperiodic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::ModelParams;
    use crate::hilbert::{build_initial_state, StateSpec};
    use crate::spectrum::diagonalize_sector_with;

    fn xxz() -> ModelParams {
        ModelParams::new(6.0, -3.0).unwrap()
    }

    #[test]
    fn grid() {
        let g = time_grid(1.0, 2001);
        assert_eq!(g.len(), 2001);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[2000], 1.0);
        assert!((g[1] - 5e-4).abs() < 1e-16);
        assert_eq!(time_grid(2.0, 1), vec![0.0]);
    }

    #[test]
    fn xi_m5_xxz_is_sinusoidal_with_two_classes() {
        let spec = diagonalize_sector_with(5, &xxz(), None).unwrap();
        let xi = build_initial_state(&StateSpec::Xi).unwrap();
        let traj = evolve_probabilities(&xi, &spec, &time_grid(1.0, 201)).unwrap();
        assert_eq!(traj.stats.delta0, 2);
        assert_eq!(traj.stats.n_p, 2);
        assert_eq!(traj.stats.n_nu, FrequencyCount { formula: 1, distinct: 1 });
        let mut classes = traj.classes.clone();
        classes.sort();
        assert_eq!(classes, vec![(0..6).collect::<Vec<_>>(), (6..12).collect()]);
        assert_eq!(regime_classifier(&traj), Regime::Sinusoidal);
        for t in 0..traj.times.len() {
            let s: f64 = (0..12).map(|f| traj.probs[f][t]).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ferromagnetic_sector_is_constant() {
        let spec = diagonalize_sector_with(6, &xxz(), None).unwrap();
        let xi = build_initial_state(&StateSpec::Xi).unwrap();
        let traj = evolve_probabilities(&xi, &spec, &time_grid(1.0, 11)).unwrap();
        assert_eq!(regime_classifier(&traj), Regime::Constant);
        assert!(traj.probs[0].iter().all(|&p| (p - 1.0).abs() < 1e-14));
        assert!((traj.sector_weight - 1.0 / 4096.0).abs() < 1e-18);
    }

    #[test]
    fn return_probability_starts_at_one() {
        let spec = diagonalize_sector_with(3, &xxz(), None).unwrap();
        let chi = build_initial_state(&StateSpec::Chi).unwrap();
        let r = return_probability(&chi, &spec, &time_grid(0.5, 51)).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-12);
        assert!(r.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
    }

    #[test]
    fn empty_sector_is_reported() {
        let spec = diagonalize_sector_with(5, &xxz(), None).unwrap();
        let c0 = StateVector::config(0);
        assert!(matches!(
            evolve_probabilities(&c0, &spec, &[0.0]),
            Err(Error::EmptySector(5))
        ));
    }

    #[test]
    fn support_projector_is_idempotent() {
        let spec = diagonalize_sector_with(4, &xxz(), None).unwrap();
        let xi = build_initial_state(&StateSpec::Xi).unwrap();
        let s = spectral_support(&xi, &spec).unwrap();
        assert_eq!(s.delta0(), 9);
        let p = s.projector();
        let d = p.len();
        let mut trace = 0.0;
        for i in 0..d {
            trace += p[i][i].re;
            for j in 0..d {
                let pp: Complex64 = (0..d).map(|k| p[i][k] * p[k][j]).sum();
                assert!((pp - p[i][j]).norm() < 1e-10);
                assert!((p[i][j] - p[j][i].conj()).norm() < 1e-12);
            }
        }
        assert!((trace - 9.0).abs() < 1e-10);
    }

    #[test]
    fn phase_canonicalization() {
        let a = vec![Complex64::new(0.0, 2.0), Complex64::new(1.0, 0.0)];
        let b: Vec<Complex64> = a.iter().map(|x| -x).collect();
        let ca = canonical_phase(a);
        let cb = canonical_phase(b);
        assert!(ca.iter().zip(&cb).all(|(x, y)| (x - y).norm() < 1e-15));
        assert!((ca[0] - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }
}
