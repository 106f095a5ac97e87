//! Closed-form description of the two-dimensional `(A2g, M = 5)` block,
//! spanned by the uniform single-↓ superpositions on each ring.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::Result;
use crate::hamiltonian::{build_exact_with_ratio, build_sector_hamiltonian, ModelParams};
use crate::hilbert::{Space, StateVector};
use crate::lattice::{Geometry, N_OUTER, N_SITES};

const M5: i32 = 5;

/// Uniform superposition of the six single-↓ configurations on one ring,
/// as a vector of the `M = 5` sector (whose index equals the ↓ site).
fn ring_vector(outer: bool) -> StateVector {
    let w = 1.0 / (N_OUTER as f64).sqrt();
    let amps: Vec<f64> = (0..N_SITES)
        .map(|k| if Geometry::is_outer(k) == outer { w } else { 0.0 })
        .collect();
    StateVector::from_real(Space::Sector(M5), &amps).expect("sector dimension 12")
}

pub fn e_outer() -> StateVector {
    ring_vector(true)
}

pub fn e_inner() -> StateVector {
    ring_vector(false)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct M5Block {
    pub alpha: f64,
    pub jz_over_j: f64,
    /// In the (outer, inner) basis, units of J.
    pub matrix: [[f64; 2]; 2],
    /// `|ΔE|/J` from the closed-form discriminant.
    pub delta_e: f64,
    /// Whether the lower eigenvector has more weight on the outer ring.
    pub lower_is_outer: bool,
}

impl M5Block {
    /// Eigenvalues (ascending) and the matching orthonormal eigenvectors.
    pub fn eigen(&self) -> ([f64; 2], [[f64; 2]; 2]) {
        let [[a, b], [_, d]] = self.matrix;
        let mean = 0.5 * (a + d);
        let half = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        let theta = 0.5 * (2.0 * b).atan2(a - d);
        let (c, s) = (theta.cos(), theta.sin());
        // (c, s) belongs to mean + half, (-s, c) to mean - half
        ([mean - half, mean + half], [[-s, c], [c, s]])
    }
}

/// Flip-flop and Ising coefficients of the block as functions of α.
fn coefficients(alpha: f64) -> ([f64; 3], [f64; 2]) {
    let p2 = 2f64.powf(-alpha);
    let p3 = 3f64.powf(-alpha);
    let r3 = 3f64.powf(-alpha / 2.0);
    let r7 = 7f64.powf(-alpha / 2.0);
    let h11 = 4.0 * p3 + 4.0 * r3 + 2.0 * p2 * r3;
    let h12 = 4.0 * (1.0 + p2 + r7);
    let h22 = 4.0 + 4.0 * r3 + 2.0 * p2;
    let z11 = 14.0 + 11.0 * p2 + 2.0 * p3 + 8.0 * r3 + p2 * r3 + 8.0 * r7;
    let z22 = 10.0 + 9.0 * p2 + 6.0 * p3 + 8.0 * r3 + 3.0 * p2 * r3 + 8.0 * r7;
    ([h11, h12, h22], [z11, z22])
}

/// `|ΔE|/J = sqrt(κ₀ + κ₁ (J_z/J)(J_z/J − 2))`.
pub fn gap_from_discriminant(alpha: f64, jz: f64) -> f64 {
    let pw = |b: f64, e: f64| b.powf(e);
    let k0 = 80.0
        + pw(2.0, 4.0 - alpha)
            * (9.0 + pw(3.0, -1.5 * alpha) - pw(3.0, -alpha) - pw(3.0, -alpha / 2.0) + 8.0 * pw(7.0, -alpha / 2.0))
        + pw(4.0, 1.0 - alpha) * (17.0 + pw(3.0, -alpha) - 2.0 * pw(3.0, -alpha / 2.0))
        - 32.0 * pw(3.0, -alpha)
        + 64.0 * pw(7.0, -alpha)
        + 128.0 * pw(7.0, -alpha / 2.0)
        + 16.0 * pw(9.0, -alpha);
    let inner = pw(2.0, 1.0 + alpha) + pw(3.0, alpha / 2.0) - pw(3.0, alpha) * (1.0 + pw(2.0, 1.0 + alpha));
    let k1 = pw(4.0, 1.0 - alpha) * pw(9.0, -alpha) * inner * inner;
    (k0 + k1 * jz * (jz - 2.0)).sqrt()
}

pub fn m5_block(alpha: f64, jz_over_j: f64) -> Result<M5Block> {
    let params = ModelParams::new(alpha, jz_over_j)?;
    let ([h11, h12, h22], [z11, z22]) = coefficients(params.alpha);
    let matrix = [
        [h11 + jz_over_j * z11, h12],
        [h12, h22 + jz_over_j * z22],
    ];
    let mut block = M5Block {
        alpha,
        jz_over_j,
        matrix,
        delta_e: gap_from_discriminant(alpha, jz_over_j),
        lower_is_outer: true,
    };
    let (_, vecs) = block.eigen();
    block.lower_is_outer = vecs[0][0].abs() >= vecs[0][1].abs();
    Ok(block)
}

/// `⟨e_a|H|e_b⟩` extracted from the floating-point sector Hamiltonian.
pub fn engine_m5_block(params: &ModelParams) -> Result<[[f64; 2]; 2]> {
    let h = build_sector_hamiltonian(M5, params)?.matrix;
    let mut out = [[0.0; 2]; 2];
    for i in 0..N_SITES {
        for j in 0..N_SITES {
            let a = usize::from(!Geometry::is_outer(i));
            let b = usize::from(!Geometry::is_outer(j));
            out[a][b] += h[(i, j)] / N_OUTER as f64;
        }
    }
    Ok(out)
}

/// Same block from the exact-rational sector Hamiltonian (α = 2·half_alpha).
pub fn exact_engine_m5_block(half_alpha: u32, jz_over_j: &BigRational) -> Result<[[BigRational; 2]; 2]> {
    let h = build_exact_with_ratio(M5, half_alpha, jz_over_j)?;
    let mut out: [[BigRational; 2]; 2] = Default::default();
    for (r, c, v) in &h.entries {
        let a = usize::from(!Geometry::is_outer(*r));
        let b = usize::from(!Geometry::is_outer(*c));
        out[a][b] += v;
    }
    let six = BigRational::from_integer(BigInt::from(N_OUTER));
    for row in out.iter_mut() {
        for x in row.iter_mut() {
            *x = &*x / &six;
        }
    }
    Ok(out)
}

/// Exact engine block for `params` when α is an even integer and `J_z/J`
/// is representable; `None` otherwise.
pub fn exact_engine_block_for(params: &ModelParams) -> Result<Option<[[BigRational; 2]; 2]>> {
    match (params.half_even_alpha(), BigRational::from_float(params.jz_over_j)) {
        (Some(half), Some(jz)) => Ok(Some(exact_engine_m5_block(half, &jz)?)),
        _ => Ok(None),
    }
}

/// Closed-form block in exact arithmetic (α = 2·half_alpha).
pub fn exact_m5_block(half_alpha: u32, jz_over_j: &BigRational) -> [[BigRational; 2]; 2] {
    let inv_pow = |base: i64, e: u32| {
        BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(base), e as usize))
    };
    let int = |n: i64| BigRational::from_integer(BigInt::from(n));
    let p2 = inv_pow(2, 2 * half_alpha);
    let p3 = inv_pow(3, 2 * half_alpha);
    let r3 = inv_pow(3, half_alpha);
    let r7 = inv_pow(7, half_alpha);
    let h11 = int(4) * &p3 + int(4) * &r3 + int(2) * &p2 * &r3;
    let h12 = int(4) * (BigRational::one() + &p2 + &r7);
    let h22 = int(4) + int(4) * &r3 + int(2) * &p2;
    let z11 = int(14) + int(11) * &p2 + int(2) * &p3 + int(8) * &r3 + &p2 * &r3 + int(8) * &r7;
    let z22 = int(10) + int(9) * &p2 + int(6) * &p3 + int(8) * &r3 + int(3) * &p2 * &r3 + int(8) * &r7;
    [
        [h11 + jz_over_j * z11, h12.clone()],
        [h12, h22 + jz_over_j * z22],
    ]
}

/// `(|S=6, M=5⟩, |A2g, S=5, M=5⟩)`.
pub fn heisenberg_m5_eigenstates() -> (StateVector, StateVector) {
    let o = e_outer().real_parts();
    let i = e_inner().real_parts();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sym: Vec<f64> = o.iter().zip(&i).map(|(a, b)| s * (a + b)).collect();
    let anti: Vec<f64> = o.iter().zip(&i).map(|(a, b)| s * (b - a)).collect();
    (
        StateVector::from_real(Space::Sector(M5), &sym).expect("sector vector"),
        StateVector::from_real(Space::Sector(M5), &anti).expect("sector vector"),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum M5Initial {
    /// `e_outer`.
    Outer,
    /// `(e_outer + e_inner)/√2`.
    Symmetric,
}

/// Probability of each single outer / single inner outcome at `times`
/// (units h/J).
pub fn m5_probabilities(initial: M5Initial, alpha: f64, jz_over_j: f64, times: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let block = m5_block(alpha, jz_over_j)?;
    let (values, vecs) = block.eigen();
    let c0 = match initial {
        M5Initial::Outer => [1.0, 0.0],
        M5Initial::Symmetric => [std::f64::consts::FRAC_1_SQRT_2; 2],
    };
    let weights = [
        vecs[0][0] * c0[0] + vecs[0][1] * c0[1],
        vecs[1][0] * c0[0] + vecs[1][1] * c0[1],
    ];
    let mut outer = Vec::with_capacity(times.len());
    let mut inner = Vec::with_capacity(times.len());
    for &t in times {
        let mut c = [Complex64::zero(); 2];
        for k in 0..2 {
            let phase = Complex64::from_polar(weights[k], -std::f64::consts::TAU * values[k] * t);
            c[0] += phase * vecs[k][0];
            c[1] += phase * vecs[k][1];
        }
        outer.push(c[0].norm_sqr() / N_OUTER as f64);
        inner.push(c[1].norm_sqr() / N_OUTER as f64);
    }
    Ok((outer, inner))
}
