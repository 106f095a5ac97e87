//! Sector-wise eigendecomposition, global degeneracy statistics and
//! ground-state scans.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_sector_hamiltonian, casimir_operator, coupling, ModelParams};
use crate::hilbert::{Configuration, FULL_DIM, MAX_M};
use crate::lattice::{build_geometry, build_group, Geometry, Irrep};
use crate::linalg::{column, symmetric_eigen, symmetric_eigenvalues, Matrix};
use crate::symmetry::{symmetry_adapted_basis, SectorSymmetry, SymmetryLabel};
use crate::tolerances;

/// Eigendecomposition of one sector. Within each degenerate cluster the
/// eigenvectors are rotated to carry a single irrep (and total spin for the
/// Heisenberg point).
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub m: i32,
    pub params: ModelParams,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
    /// Half-open index ranges of degenerate eigenvalues.
    pub clusters: Vec<std::ops::Range<usize>>,
    pub labels: Vec<SymmetryLabel>,
    /// Absolute clustering tolerance used.
    pub tolerance: f64,
}

impl SpectrumResult {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        column(&self.eigenvectors, k)
    }

    pub fn cluster_label(&self, cluster: usize) -> Vec<SymmetryLabel> {
        let mut labels: Vec<SymmetryLabel> = self.labels[self.clusters[cluster].clone()].to_vec();
        labels.dedup();
        labels
    }

    /// Count of eigenvectors carrying `irrep` (each 2D copy counted twice).
    pub fn irrep_dimension(&self, irrep: Irrep) -> usize {
        self.labels.iter().filter(|l| l.irrep == irrep).count()
    }
}

fn width(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

fn sector_eigenvalues(m: i32, params: &ModelParams) -> Result<Vec<f64>> {
    let h = build_sector_hamiltonian(m, params)?;
    symmetric_eigenvalues(&h.matrix).ok_or(Error::Eigensolver {
        m,
        alpha: params.alpha,
        jz_over_j: params.jz_over_j,
    })
}

/// All 4096 eigenvalues, sector by sector (`M = -6..=6`). Negative sectors
/// reuse the spectrum of their spin-flip partner.
pub fn all_eigenvalues(params: &ModelParams) -> Result<Vec<(i32, Vec<f64>)>> {
    let positive: Vec<Vec<f64>> = (0..=MAX_M)
        .into_par_iter()
        .map(|m| sector_eigenvalues(m, params))
        .collect::<Result<_>>()?;
    Ok((-MAX_M..=MAX_M)
        .map(|m| (m, positive[m.unsigned_abs() as usize].clone()))
        .collect())
}

/// `λ_max − λ_min` over the full spectrum.
pub fn spectral_width(params: &ModelParams) -> Result<f64> {
    let spectra = all_eigenvalues(params)?;
    let flat: Vec<f64> = spectra.into_iter().flat_map(|(_, v)| v).collect();
    Ok(width(&flat))
}

/// Absolute degeneracy tolerance `τ_deg` for the full spectrum.
pub fn global_tolerance(params: &ModelParams) -> Result<f64> {
    Ok(tolerances::DEGENERACY_REL * spectral_width(params)?)
}

/// Chain-cluster ascending values: neighbours within `tol` share a cluster.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// Smallest gap between neighbouring clusters; `None` for a single cluster.
pub fn smallest_separation(values: &[f64], clusters: &[std::ops::Range<usize>]) -> Option<f64> {
    clusters
        .windows(2)
        .map(|w| values[w[1].start] - values[w[0].end - 1])
        .min_by(f64::total_cmp)
}

/// Diagonalize sector `m`, clustering with `tolerance` (absolute) or, when
/// `None`, with the relative tolerance applied to this sector's width.
pub fn diagonalize_sector_with(m: i32, params: &ModelParams, tolerance: Option<f64>) -> Result<SpectrumResult> {
    let h = build_sector_hamiltonian(m, params)?;
    let (values, vectors) = symmetric_eigen(&h.matrix).ok_or(Error::Eigensolver {
        m,
        alpha: params.alpha,
        jz_over_j: params.jz_over_j,
    })?;
    let tol = tolerance.unwrap_or(tolerances::DEGENERACY_REL * width(&values));
    let clusters = cluster_sorted(&values, tol);

    let group = build_group(&build_geometry())?;
    let sym = SectorSymmetry::new(&group, m)?;
    let casimir = if params.is_heisenberg() {
        Some(casimir_operator(m)?)
    } else {
        None
    };
    let d = values.len();
    let adapted: Vec<Vec<(SymmetryLabel, Vec<f64>)>> = clusters
        .par_iter()
        .map(|range| {
            let members: Vec<Vec<f64>> = range.clone().map(|k| column(&vectors, k)).collect();
            symmetry_adapted_basis(&sym, &members, casimir.as_ref())
        })
        .collect::<Result<_>>()?;

    let mut eigenvectors = Matrix::zeros(d, d);
    let mut labels = Vec::with_capacity(d);
    let mut k = 0;
    for cluster in adapted {
        for (label, v) in cluster {
            for (r, x) in v.into_iter().enumerate() {
                eigenvectors[(r, k)] = x;
            }
            labels.push(label);
            k += 1;
        }
    }
    Ok(SpectrumResult {
        m,
        params: *params,
        eigenvalues: values,
        eigenvectors,
        clusters,
        labels,
        tolerance: tol,
    })
}

/// Diagonalize sector `m` with the global degeneracy tolerance.
pub fn diagonalize_sector(m: i32, params: &ModelParams) -> Result<SpectrumResult> {
    let tol = global_tolerance(params)?;
    diagonalize_sector_with(m, params, Some(tol))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegeneracyHistogram {
    /// Eigenspace dimension → number of eigenspaces.
    pub counts: BTreeMap<usize, usize>,
    pub tolerance: f64,
    /// Smallest gap between distinct eigenspaces.
    pub smallest_separation: Option<f64>,
}

impl DegeneracyHistogram {
    pub fn total_states(&self) -> usize {
        self.counts.iter().map(|(d, c)| d * c).sum()
    }

    pub fn eigenspaces(&self) -> usize {
        self.counts.values().sum()
    }
}

/// Global degeneracy histogram over the 4096-dimensional space.
pub fn degeneracy_histogram(params: &ModelParams) -> Result<DegeneracyHistogram> {
    degeneracy_histogram_with(params, tolerances::DEGENERACY_REL)
}

/// As [`degeneracy_histogram`] with a custom tolerance relative to the width.
pub fn degeneracy_histogram_with(params: &ModelParams, rel_tol: f64) -> Result<DegeneracyHistogram> {
    let mut all: Vec<f64> = all_eigenvalues(params)?.into_iter().flat_map(|(_, v)| v).collect();
    all.sort_by(f64::total_cmp);
    histogram_from_sorted(&all, rel_tol * width(&all))
}

pub fn histogram_from_sorted(sorted: &[f64], tol: f64) -> Result<DegeneracyHistogram> {
    let clusters = cluster_sorted(sorted, tol);
    let separation = smallest_separation(sorted, &clusters);
    if let Some(gap) = separation {
        if gap < tolerances::AMBIGUITY_FACTOR * tol {
            return Err(Error::AmbiguousClustering { gap, tol });
        }
    }
    let mut counts = BTreeMap::new();
    for c in &clusters {
        *counts.entry(c.len()).or_insert(0) += 1;
    }
    Ok(DegeneracyHistogram {
        counts,
        tolerance: tol,
        smallest_separation: separation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroundStatePoint {
    pub jz_over_j: f64,
    pub energy: f64,
    pub degeneracy: usize,
    /// Sectors holding a ground-state vector.
    pub sectors: Vec<i32>,
    /// Labels of the ground space (one per distinct label).
    pub labels: Vec<SymmetryLabel>,
}

impl GroundStatePoint {
    pub fn is_ferromagnetic(&self) -> bool {
        self.sectors.iter().all(|m| m.abs() == MAX_M)
    }
}

/// Energy of the fully polarized states, `J_z Σ_{i<j} (a/r_ij)^α`.
pub fn ferromagnetic_energy(params: &ModelParams) -> f64 {
    let g = build_geometry();
    params.jz_over_j
        * Geometry::pairs()
            .map(|(i, j)| coupling(&g, i, j, params.alpha).expect("distinct sites"))
            .sum::<f64>()
}

pub fn ground_state(params: &ModelParams) -> Result<GroundStatePoint> {
    ground_state_with(params, tolerances::DEGENERACY_REL)
}

pub fn ground_state_with(params: &ModelParams, rel_tol: f64) -> Result<GroundStatePoint> {
    let spectra = all_eigenvalues(params)?;
    let flat: Vec<f64> = spectra.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    let tol = rel_tol * width(&flat);
    let energy = flat.iter().copied().fold(f64::INFINITY, f64::min);
    let mut degeneracy = 0;
    let mut sectors = Vec::new();
    for (m, values) in &spectra {
        let n = values.iter().filter(|&&e| e - energy <= tol).count();
        if n > 0 {
            degeneracy += n;
            sectors.push(*m);
        }
    }
    let mut labels = Vec::new();
    for &m in sectors.iter().filter(|&&m| m >= 0) {
        let spec = diagonalize_sector_with(m, params, Some(tol))?;
        for (k, &e) in spec.eigenvalues.iter().enumerate() {
            if e - energy <= tol && !labels.contains(&spec.labels[k]) {
                labels.push(spec.labels[k]);
            }
        }
    }
    labels.sort();
    Ok(GroundStatePoint {
        jz_over_j: params.jz_over_j,
        energy,
        degeneracy,
        sectors,
        labels,
    })
}

pub fn ground_state_scan(alpha: f64, grid: &[f64]) -> Result<Vec<GroundStatePoint>> {
    grid.iter()
        .map(|&jz| ground_state(&ModelParams::new(alpha, jz)?))
        .collect()
}

/// Lowest eigenvalue outside the fully polarized sectors.
fn lowest_unpolarized(params: &ModelParams) -> Result<f64> {
    let mins: Vec<f64> = (0..MAX_M)
        .into_par_iter()
        .map(|m| Ok(sector_eigenvalues(m, params)?[0]))
        .collect::<Result<_>>()?;
    Ok(mins.into_iter().fold(f64::INFINITY, f64::min))
}

/// `J_z/J` at which the fully polarized pair stops being the ground state,
/// by bisection on `[lo, hi]` (ferromagnetic at `lo`, not at `hi`).
pub fn find_crossover(alpha: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let ferro = |jz: f64| -> Result<bool> {
        let p = ModelParams::new(alpha, jz)?;
        Ok(ferromagnetic_energy(&p) < lowest_unpolarized(&p)?)
    };
    let (mut a, mut b) = (lo, hi);
    if !ferro(a)? || ferro(b)? {
        return Err(Error::InvalidInput(format!(
            "no ferromagnetic crossover bracketed by [{lo}, {hi}]"
        )));
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if ferro(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Least-squares line through `(x, y)`; returns (slope, intercept, max residual).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).abs())
        .fold(0.0, f64::max);
    (slope, intercept, residual)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapPoint {
    pub jz_over_j: f64,
    /// `|⟨Ψ_GS^H|Ψ_GS⟩|²`.
    pub overlap: f64,
    /// Weight of the ground state on each total-spin subspace of M = 0.
    pub spin_weights: Vec<(u32, f64)>,
}

/// Compare the `M = 0` ground state at each `J_z/J` with the Heisenberg one.
pub fn heisenberg_overlap_scan(alpha: f64, grid: &[f64]) -> Result<Vec<OverlapPoint>> {
    let reference = diagonalize_sector_with(0, &ModelParams::heisenberg(alpha), None)?;
    let gs_h = reference.vector(0);
    grid.iter()
        .map(|&jz| {
            let p = ModelParams::new(alpha, jz)?;
            let h = build_sector_hamiltonian(0, &p)?;
            let (_, vecs) = symmetric_eigen(&h.matrix).ok_or(Error::Eigensolver {
                m: 0,
                alpha,
                jz_over_j: jz,
            })?;
            let gs = column(&vecs, 0);
            let overlap = crate::linalg::dot(&gs_h, &gs).powi(2);
            let mut weights: BTreeMap<u32, f64> = BTreeMap::new();
            for (k, label) in reference.labels.iter().enumerate() {
                let w = crate::linalg::dot(&reference.vector(k), &gs).powi(2);
                *weights.entry(label.spin.unwrap_or(0)).or_insert(0.0) += w;
            }
            Ok(OverlapPoint {
                jz_over_j: jz,
                overlap,
                spin_weights: weights.into_iter().collect(),
            })
        })
        .collect()
}

/// Ground-state degeneracy of the nearest-neighbour Ising model
/// `J_z Σ_{⟨ij⟩} σᶻσᶻ` over all 4096 configurations.
pub fn ising_degeneracy_check(jz: f64) -> usize {
    let g = build_geometry();
    let bonds: Vec<(usize, usize)> = Geometry::pairs().filter(|&(i, j)| g.distance_sq[i][j] == 1).collect();
    let energies: Vec<f64> = (0..FULL_DIM as u16)
        .map(|f| {
            let c = Configuration(f);
            jz * bonds.iter().map(|&(i, j)| c.sigma_z(i) * c.sigma_z(j)).sum::<f64>()
        })
        .collect();
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    energies.iter().filter(|&&e| e - min < 1e-9).count()
}
