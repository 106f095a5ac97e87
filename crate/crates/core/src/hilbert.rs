//! Configuration basis and total-Sz sectors.
//!
//! A configuration is a 12-bit mask `f`; bit `i` set means site `i` is ↓ᶻ.
//! Sector `M` holds the configurations with `6 - M` down spins, indexed by
//! ascending `f`.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Geometry, GroupElement, N_SITES};

pub const FULL_DIM: usize = 1 << N_SITES;
pub const ALL_DOWN: u16 = (FULL_DIM - 1) as u16;
pub const MAX_M: i32 = (N_SITES / 2) as i32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Configuration(pub u16);

impl Configuration {
    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn is_down(self, site: usize) -> bool {
        (self.0 >> site) & 1 == 1
    }

    pub fn m(self) -> i32 {
        magnetization(self.0)
    }

    /// σᶻ eigenvalue (+1 for ↑, -1 for ↓) of `site`.
    pub fn sigma_z(self, site: usize) -> f64 {
        if self.is_down(site) {
            -1.0
        } else {
            1.0
        }
    }
}

pub fn magnetization(bits: u16) -> i32 {
    MAX_M - bits.count_ones() as i32
}

pub fn check_sector(m: i32) -> Result<()> {
    if (-MAX_M..=MAX_M).contains(&m) {
        Ok(())
    } else {
        Err(Error::SectorOutOfRange(m))
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Clone, Debug)]
pub struct SectorBasis {
    m: i32,
    configs: Vec<u16>,
    index_of: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl SectorBasis {
    pub fn new(m: i32) -> Result<Self> {
        check_sector(m)?;
        let configs: Vec<u16> = (0..FULL_DIM as u16)
            .filter(|&f| magnetization(f) == m)
            .collect();
        let mut index_of = vec![ABSENT; FULL_DIM];
        for (k, &f) in configs.iter().enumerate() {
            index_of[f as usize] = k as u32;
        }
        Ok(Self {
            m,
            configs,
            index_of,
        })
    }

    /// Shared, lazily built basis for sector `m`.
    pub fn cached(m: i32) -> Result<&'static SectorBasis> {
        static BASES: OnceLock<Vec<SectorBasis>> = OnceLock::new();
        check_sector(m)?;
        let all = BASES.get_or_init(|| {
            (-MAX_M..=MAX_M)
                .map(|m| SectorBasis::new(m).expect("in range"))
                .collect()
        });
        Ok(&all[(m + MAX_M) as usize])
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn configs(&self) -> &[u16] {
        &self.configs
    }

    pub fn config(&self, k: usize) -> Configuration {
        Configuration(self.configs[k])
    }

    pub fn index(&self, f: u16) -> Option<usize> {
        match self.index_of[f as usize] {
            ABSENT => None,
            k => Some(k as usize),
        }
    }

    /// The action of `g` on this sector as a signed permutation of basis indices.
    pub fn signed_permutation(&self, g: &GroupElement) -> SignedPermutation {
        let target = self
            .configs
            .iter()
            .map(|&f| self.index_of[g.map_bits(f) as usize])
            .collect();
        SignedPermutation {
            target,
            sign: g.parity as f64,
        }
    }
}

pub fn sector_basis(m: i32) -> Result<SectorBasis> {
    SectorBasis::new(m)
}

/// `v ↦ sign · P v` with `(P v)[target[k]] = v[k]`.
#[derive(Clone, Debug)]
pub struct SignedPermutation {
    pub target: Vec<u32>,
    pub sign: f64,
}

impl SignedPermutation {
    pub fn apply_real(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.apply_real_into(v, &mut out);
        out
    }

    pub fn apply_real_into(&self, v: &[f64], out: &mut [f64]) {
        for (k, &t) in self.target.iter().enumerate() {
            out[t as usize] = self.sign * v[k];
        }
    }

    pub fn apply_complex(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (k, &t) in self.target.iter().enumerate() {
            out[t as usize] = v[k] * self.sign;
        }
        out
    }

    /// Number of fixed basis states times the sign: the trace of the operator.
    pub fn trace(&self) -> f64 {
        let fixed = self
            .target
            .iter()
            .enumerate()
            .filter(|(k, &t)| *k == t as usize)
            .count();
        self.sign * fixed as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Space {
    Full,
    Sector(i32),
}

impl Space {
    pub fn dim(self) -> usize {
        match self {
            Space::Full => FULL_DIM,
            Space::Sector(m) => binomial(N_SITES as u64, (MAX_M - m) as u64) as usize,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub space: Space,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(space: Space, amps: Vec<Complex64>) -> Result<Self> {
        if let Space::Sector(m) = space {
            check_sector(m)?;
        }
        if amps.len() != space.dim() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes for a space of dimension {}",
                amps.len(),
                space.dim()
            )));
        }
        Ok(Self { space, amps })
    }

    pub fn from_real(space: Space, amps: &[f64]) -> Result<Self> {
        Self::new(space, amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn basis_state(space: Space, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); space.dim()];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { space, amps }
    }

    pub fn config(f: u16) -> Self {
        Self::basis_state(Space::Full, f as usize)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n == 0.0 {
            return None;
        }
        Some(Self {
            space: self.space,
            amps: self.amps.iter().map(|a| a / n).collect(),
        })
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.amps.iter().all(|a| a.im.abs() <= tol)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.re).collect()
    }

    pub fn imag_parts(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.im).collect()
    }

    /// Full-space configuration index of amplitude `k`.
    pub fn config_of(&self, k: usize) -> Result<u16> {
        match self.space {
            Space::Full => Ok(k as u16),
            Space::Sector(m) => Ok(SectorBasis::cached(m)?.configs()[k]),
        }
    }
}

pub fn act_permutation(g: &GroupElement, state: &StateVector) -> Result<StateVector> {
    let sign = g.parity as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
    match state.space {
        Space::Full => {
            for (f, a) in state.amps.iter().enumerate() {
                out[g.map_bits(f as u16) as usize] = a * sign;
            }
        }
        Space::Sector(m) => {
            let basis = SectorBasis::cached(m)?;
            out = basis.signed_permutation(g).apply_complex(&state.amps);
        }
    }
    Ok(StateVector {
        space: state.space,
        amps: out,
    })
}

pub fn spin_flip(state: &StateVector) -> Result<StateVector> {
    match state.space {
        Space::Full => {
            let mut out = vec![Complex64::new(0.0, 0.0); FULL_DIM];
            for (f, a) in state.amps.iter().enumerate() {
                out[f ^ ALL_DOWN as usize] = *a;
            }
            Ok(StateVector {
                space: Space::Full,
                amps: out,
            })
        }
        Space::Sector(m) => {
            let from = SectorBasis::cached(m)?;
            let to = SectorBasis::cached(-m)?;
            let mut out = vec![Complex64::new(0.0, 0.0); to.dim()];
            for (k, &f) in from.configs().iter().enumerate() {
                out[to.index(f ^ ALL_DOWN).expect("complement lies in -M")] = state.amps[k];
            }
            Ok(StateVector {
                space: Space::Sector(-m),
                amps: out,
            })
        }
    }
}

/// Single-site state `up |↑ᶻ⟩ + down |↓ᶻ⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Spinor {
    pub up: Complex64,
    pub down: Complex64,
}

impl Spinor {
    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        let n = up.norm_sqr() + down.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "spinor is not normalized (|up|^2 + |down|^2 = {n})"
            )));
        }
        Ok(Self { up, down })
    }

    /// Bloch-sphere state with polar angle `theta` and azimuth `phi`.
    pub fn bloch(theta: f64, phi: f64) -> Self {
        Self {
            up: Complex64::new((theta / 2.0).cos(), 0.0),
            down: Complex64::from_polar((theta / 2.0).sin(), phi),
        }
    }

    pub fn up_z() -> Self {
        Self::bloch(0.0, 0.0)
    }

    pub fn down_z() -> Self {
        Self::bloch(std::f64::consts::PI, 0.0)
    }

    pub fn up_x() -> Self {
        Self::bloch(std::f64::consts::FRAC_PI_2, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StateSpec {
    Xi,
    Chi,
    Zeta { outer: Spinor, inner: Spinor },
    Config(u16),
}

impl StateSpec {
    /// Outer/inner spinors when the state is a ring-product (ζ-family) state.
    pub fn ring_spinors(&self) -> Option<(Spinor, Spinor)> {
        match *self {
            StateSpec::Xi => Some((Spinor::up_x(), Spinor::up_x())),
            StateSpec::Chi => Some((Spinor::up_x(), Spinor::up_z())),
            StateSpec::Zeta { outer, inner } => Some((outer, inner)),
            StateSpec::Config(_) => None,
        }
    }
}

impl std::str::FromStr for StateSpec {
    type Err = Error;

    /// `xi`, `chi`, `config:F`, or `zeta:THETA_OUT,PHI_OUT,THETA_IN,PHI_IN` (radians).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("invalid state spec {s:?}"));
        match s.trim() {
            "xi" => Ok(StateSpec::Xi),
            "chi" => Ok(StateSpec::Chi),
            other => {
                if let Some(f) = other.strip_prefix("config:") {
                    let f: u16 = f.trim().parse().map_err(|_| bad())?;
                    if f as usize >= FULL_DIM {
                        return Err(bad());
                    }
                    Ok(StateSpec::Config(f))
                } else if let Some(angles) = other.strip_prefix("zeta:") {
                    let v: Vec<f64> = angles
                        .split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad())?;
                    if v.len() != 4 || v.iter().any(|x| !x.is_finite()) {
                        return Err(bad());
                    }
                    Ok(StateSpec::Zeta {
                        outer: Spinor::bloch(v[0], v[1]),
                        inner: Spinor::bloch(v[2], v[3]),
                    })
                } else {
                    Err(bad())
                }
            }
        }
    }
}

pub fn build_initial_state(spec: &StateSpec) -> Result<StateVector> {
    match spec {
        StateSpec::Config(f) => Ok(StateVector::config(*f)),
        _ => {
            let (outer, inner) = spec.ring_spinors().expect("ring product state");
            let outer = Spinor::new(outer.up, outer.down)?;
            let inner = Spinor::new(inner.up, inner.down)?;
            let amps = (0..FULL_DIM as u16)
                .map(|f| {
                    let c = Configuration(f);
                    (0..N_SITES)
                        .map(|site| {
                            let s = if Geometry::is_outer(site) { outer } else { inner };
                            if c.is_down(site) {
                                s.down
                            } else {
                                s.up
                            }
                        })
                        .product()
                })
                .collect();
            Ok(StateVector {
                space: Space::Full,
                amps,
            })
        }
    }
}

/// Restriction of a full-space state to sector `m` (not renormalized),
/// together with its squared norm.
pub fn project_sector(state: &StateVector, m: i32) -> Result<(StateVector, f64)> {
    if state.space != Space::Full {
        return Err(Error::InvalidInput(
            "sector projection expects a full-space state".into(),
        ));
    }
    let basis = SectorBasis::cached(m)?;
    let amps: Vec<Complex64> = basis
        .configs()
        .iter()
        .map(|&f| state.amps[f as usize])
        .collect();
    let out = StateVector {
        space: Space::Sector(m),
        amps,
    };
    let weight = out.norm_sqr();
    Ok((out, weight))
}

/// Inverse of `project_sector`: place a sector state into the full space.
pub fn embed_sector(state: &StateVector) -> Result<StateVector> {
    match state.space {
        Space::Full => Ok(state.clone()),
        Space::Sector(m) => {
            let basis = SectorBasis::cached(m)?;
            let mut amps = vec![Complex64::new(0.0, 0.0); FULL_DIM];
            for (k, &f) in basis.configs().iter().enumerate() {
                amps[f as usize] = state.amps[k];
            }
            Ok(StateVector {
                space: Space::Full,
                amps,
            })
        }
    }
}
