//! Schmidt numbers of full-space states across bipartitions of the sites.

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{embed_sector, Space, StateVector, FULL_DIM};
use crate::lattice::N_SITES;
use crate::tolerances;

/// Bit `i` of `mask` set puts site `i` in part B.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Bipartition {
    pub mask: u16,
}

impl Bipartition {
    pub fn new(mask: u16) -> Result<Self> {
        let full = (FULL_DIM - 1) as u16;
        if mask == 0 || mask & full == full || mask > full {
            return Err(Error::InvalidInput(format!("mask {mask} does not split the sites")));
        }
        Ok(Self { mask })
    }

    pub fn size_b(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn size_a(&self) -> usize {
        N_SITES - self.size_b()
    }

    pub fn complement(&self) -> Self {
        Self {
            mask: !self.mask & (FULL_DIM - 1) as u16,
        }
    }

    /// Stable gather of the bits of `f` selected by `mask`.
    fn gather(f: u16, mask: u16) -> usize {
        let mut out = 0usize;
        let mut k = 0;
        for i in 0..N_SITES {
            if mask >> i & 1 == 1 {
                out |= ((f >> i & 1) as usize) << k;
                k += 1;
            }
        }
        out
    }

    /// (row in A, column in B) of configuration `f`.
    pub fn split(&self, f: u16) -> (usize, usize) {
        let a_mask = !self.mask & (FULL_DIM - 1) as u16;
        (Self::gather(f, a_mask), Self::gather(f, self.mask))
    }
}

/// One representative of each of the `2^11 − 1` nontrivial cuts (site 11
/// always in part A).
pub fn inequivalent_bipartitions() -> impl Iterator<Item = Bipartition> {
    (1u16..(1 << (N_SITES - 1))).map(|mask| Bipartition { mask })
}

/// Rank of the coefficient matrix of `state` across `cut`.
pub fn schmidt_number(state: &StateVector, cut: Bipartition) -> Result<usize> {
    let state = embed_sector(state)?;
    debug_assert_eq!(state.space, Space::Full);
    let rows = 1usize << cut.size_a();
    let cols = 1usize << cut.size_b();
    let sv: Vec<f64> = if state.is_real(0.0) {
        let mut m = Mat::<f64>::zeros(rows, cols);
        for (f, a) in state.amps.iter().enumerate() {
            let (r, c) = cut.split(f as u16);
            m[(r, c)] = a.re;
        }
        m.singular_values()
    } else {
        let mut m = Mat::<Complex64>::zeros(rows, cols);
        for (f, a) in state.amps.iter().enumerate() {
            let (r, c) = cut.split(f as u16);
            m[(r, c)] = *a;
        }
        m.singular_values()
    }
    .map_err(|_| Error::InvalidInput("singular value decomposition did not converge".into()))?;
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tolerances::SCHMIDT_REL * top).count())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntanglementVerdict {
    pub entangled: bool,
    pub min_rank: usize,
    /// A cut achieving the minimum.
    pub min_mask: u16,
}

/// Scan all inequivalent cuts; the state is entangled iff every cut has
/// Schmidt number at least 2.
pub fn is_entangled(state: &StateVector) -> Result<EntanglementVerdict> {
    let ranks = schmidt_scan(state)?;
    let (min_mask, min_rank) = ranks
        .iter()
        .copied()
        .min_by_key(|&(mask, r)| (r, mask))
        .expect("nonempty scan");
    Ok(EntanglementVerdict {
        entangled: min_rank >= 2,
        min_rank,
        min_mask,
    })
}

/// `(mask, rank)` for every inequivalent cut.
pub fn schmidt_scan(state: &StateVector) -> Result<Vec<(u16, usize)>> {
    let state = embed_sector(state)?;
    let cuts: Vec<Bipartition> = inequivalent_bipartitions().collect();
    cuts.par_iter()
        .map(|&cut| Ok((cut.mask, schmidt_number(&state, cut)?)))
        .collect()
}
