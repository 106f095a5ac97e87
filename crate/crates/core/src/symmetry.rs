//! Character-theoretic classification: irrep multiplicities per sector,
//! spin multiplets, projectors onto irreps, and labelling of states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::SparseOperator;
use crate::hilbert::{act_permutation, SectorBasis, SignedPermutation, StateVector, MAX_M};
use crate::lattice::{character_table, CharacterTable, ConjClass, GroupElement, Irrep, PointGroup, GROUP_ORDER};
use crate::linalg::{column, dot, mat_vec, norm, symmetric_eigen, Matrix};
use crate::tolerances;

/// Point-group action restricted to one sector.
#[derive(Clone, Debug)]
pub struct SectorSymmetry {
    pub m: i32,
    pub actions: Vec<SignedPermutation>,
    pub classes: Vec<ConjClass>,
    table: CharacterTable,
}

impl SectorSymmetry {
    pub fn new(group: &PointGroup, m: i32) -> Result<Self> {
        let basis = SectorBasis::cached(m)?;
        Ok(Self {
            m,
            actions: group.iter().map(|g| basis.signed_permutation(g)).collect(),
            classes: group.iter().map(|g| g.class).collect(),
            table: character_table(),
        })
    }

    pub fn dim(&self) -> usize {
        self.actions.first().map_or(0, |a| a.target.len())
    }

    pub fn projector(&self, irrep: Irrep) -> IrrepProjector<'_> {
        let scale = irrep.dim() as f64 / GROUP_ORDER as f64;
        let weights = self
            .classes
            .iter()
            .map(|&c| scale * self.table.character(irrep, c) as f64)
            .collect();
        IrrepProjector {
            irrep,
            sym: self,
            weights,
        }
    }
}

/// `P_ρ = (dim ρ / |G|) Σ_g χ_ρ(g) D(g)` on one sector.
pub struct IrrepProjector<'a> {
    pub irrep: Irrep,
    sym: &'a SectorSymmetry,
    weights: Vec<f64>,
}

impl IrrepProjector<'_> {
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (action, &w) in self.sym.actions.iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            let s = w * action.sign;
            for (k, &t) in action.target.iter().enumerate() {
                out[t as usize] += s * v[k];
            }
        }
        out
    }

    pub fn to_dense(&self) -> Matrix {
        let d = self.sym.dim();
        let mut p = Matrix::zeros(d, d);
        for (action, &w) in self.sym.actions.iter().zip(&self.weights) {
            for (k, &t) in action.target.iter().enumerate() {
                p[(t as usize, k)] += w * action.sign;
            }
        }
        p
    }

    pub fn trace(&self) -> f64 {
        self.sym
            .actions
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * a.trace())
            .sum()
    }
}

pub fn irrep_projector<'a>(sym: &'a SectorSymmetry, irrep: Irrep) -> IrrepProjector<'a> {
    sym.projector(irrep)
}

/// Trace of `g` on sector `m`: parity times the number of fixed configurations.
pub fn sector_character(g: &GroupElement, m: i32) -> Result<f64> {
    let basis = SectorBasis::cached(m)?;
    let fixed = basis.configs().iter().filter(|&&f| g.map_bits(f) == f).count();
    Ok(g.parity as f64 * fixed as f64)
}

fn sector_index(m: i32) -> usize {
    (m + MAX_M) as usize
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IrrepCountTable {
    /// `counts[irrep][M + 6]`: multiplicity of the irrep (E-type irreps
    /// counted once per two-dimensional copy).
    pub counts: [[u64; 13]; 6],
}

impl IrrepCountTable {
    pub fn get(&self, irrep: Irrep, m: i32) -> u64 {
        self.counts[irrep.index()][sector_index(m)]
    }

    /// Column total over all sectors.
    pub fn total(&self, irrep: Irrep) -> u64 {
        self.counts[irrep.index()].iter().sum()
    }

    /// Number of states in sector `m`: `Σ_ρ dim ρ · n_ρ(M)`.
    pub fn states_in_sector(&self, m: i32) -> u64 {
        Irrep::ALL
            .iter()
            .map(|&r| r.dim() as u64 * self.get(r, m))
            .sum()
    }
}

pub fn irrep_counts(group: &PointGroup) -> Result<IrrepCountTable> {
    let table = character_table();
    let mut counts = [[0u64; 13]; 6];
    for m in -MAX_M..=MAX_M {
        let chars: Vec<(ConjClass, f64)> = group
            .iter()
            .map(|g| Ok((g.class, sector_character(g, m)?)))
            .collect::<Result<_>>()?;
        for irrep in Irrep::ALL {
            let value: f64 = chars
                .iter()
                .map(|&(c, x)| table.character(irrep, c) as f64 * x)
                .sum::<f64>()
                / GROUP_ORDER as f64;
            if (value - value.round()).abs() > tolerances::INTEGRALITY || value < -0.5 {
                return Err(Error::NonIntegerProjection {
                    irrep: irrep.to_string(),
                    m,
                    value,
                });
            }
            counts[irrep.index()][sector_index(m)] = value.round() as u64;
        }
    }
    Ok(IrrepCountTable { counts })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultipletTable {
    /// `multiplets[irrep][S]` for `S = 0..=6`.
    pub multiplets: [[u64; 7]; 6],
}

impl MultipletTable {
    pub fn get(&self, irrep: Irrep, s: u32) -> u64 {
        self.multiplets[irrep.index()][s as usize]
    }

    /// `Σ_ρ dim ρ · multiplets(ρ, S)`.
    pub fn total(&self, s: u32) -> u64 {
        Irrep::ALL
            .iter()
            .map(|&r| r.dim() as u64 * self.get(r, s))
            .sum()
    }
}

/// Spin-S multiplets per irrep as `n_ρ(M = S) - n_ρ(M = S + 1)`.
pub fn multiplet_counts(counts: &IrrepCountTable) -> Result<MultipletTable> {
    let mut multiplets = [[0u64; 7]; 6];
    for irrep in Irrep::ALL {
        for s in 0..=MAX_M {
            let here = counts.get(irrep, s);
            let above = if s < MAX_M { counts.get(irrep, s + 1) } else { 0 };
            multiplets[irrep.index()][s as usize] =
                here.checked_sub(above).ok_or_else(|| Error::NegativeMultiplets {
                    irrep: irrep.to_string(),
                    s,
                })?;
        }
    }
    Ok(MultipletTable { multiplets })
}

/// `g ψ = λ_c ψ` for each conjugacy class, or an error naming the first
/// operation for which `ψ` is not an eigenvector.
pub fn classify_factorized_state(
    group: &PointGroup,
    state: &StateVector,
) -> Result<Vec<(ConjClass, f64)>> {
    let norm_sqr = state.norm_sqr();
    if norm_sqr == 0.0 {
        return Err(Error::InvalidInput("cannot classify the zero vector".into()));
    }
    let mut signature: Vec<(ConjClass, f64)> = Vec::new();
    for g in group.iter() {
        let image = act_permutation(g, state)?;
        let lambda = state.inner(&image) / norm_sqr;
        let residual: f64 = image
            .amps
            .iter()
            .zip(&state.amps)
            .map(|(a, b)| (a - b * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > 1e-10 * norm_sqr.sqrt() || lambda.im.abs() > 1e-10 {
            return Err(Error::NotAnEigenstate(g.class.label().into()));
        }
        match signature.iter().find(|(c, _)| *c == g.class) {
            Some(&(_, seen)) if (seen - lambda.re).abs() > 1e-10 => {
                return Err(Error::NotAnEigenstate(g.class.label().into()));
            }
            Some(_) => {}
            None => signature.push((g.class, lambda.re)),
        }
    }
    signature.sort_by_key(|(c, _)| *c);
    Ok(signature)
}

/// The one-dimensional irrep whose characters equal `signature`, if any.
pub fn one_dimensional_irrep(signature: &[(ConjClass, f64)]) -> Option<Irrep> {
    let table = character_table();
    Irrep::ALL.into_iter().filter(|r| r.dim() == 1).find(|&r| {
        signature
            .iter()
            .all(|&(c, x)| (table.character(r, c) as f64 - x).abs() < 1e-10)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SymmetryLabel {
    pub irrep: Irrep,
    pub spin: Option<u32>,
}

impl std::fmt::Display for SymmetryLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.spin {
            Some(s) => write!(f, "{}/S={}", self.irrep, s),
            None => write!(f, "{}", self.irrep),
        }
    }
}

/// Total spin `S` from `⟨S²⟩ = S(S+1)`.
pub fn spin_from_casimir(value: f64) -> Option<u32> {
    let s = (-1.0 + (1.0 + 4.0 * value).max(0.0).sqrt()) / 2.0;
    let r = s.round();
    let back = r * (r + 1.0);
    ((back - value).abs() < tolerances::CASIMIR && r >= 0.0).then_some(r as u32)
}

/// Label a single (normalized, real) sector vector.
pub fn label_eigenvector(
    sym: &SectorSymmetry,
    v: &[f64],
    casimir: Option<&SparseOperator>,
) -> Result<SymmetryLabel> {
    let n = norm(v);
    let irrep = Irrep::ALL
        .into_iter()
        .find(|&r| norm(&sym.projector(r).apply(v)) > tolerances::LABEL_WEIGHT * n)
        .ok_or_else(|| Error::AmbiguousLabel(format!("no irrep carries the vector in sector M={}", sym.m)))?;
    let spin = match casimir {
        Some(op) => {
            let value = dot(v, &op.apply(v)) / (n * n);
            Some(spin_from_casimir(value).ok_or_else(|| {
                Error::AmbiguousLabel(format!("<S^2> = {value} is not of the form S(S+1)"))
            })?)
        }
        None => None,
    };
    Ok(SymmetryLabel { irrep, spin })
}

/// Rotate an invariant subspace (columns of `vectors`, orthonormal) into a
/// basis of vectors that each carry a single irrep and, with `casimir`, a
/// single total spin. Output is ordered by label.
pub fn symmetry_adapted_basis(
    sym: &SectorSymmetry,
    vectors: &[Vec<f64>],
    casimir: Option<&SparseOperator>,
) -> Result<Vec<(SymmetryLabel, Vec<f64>)>> {
    let k = vectors.len();
    if k == 1 {
        let label = label_eigenvector(sym, &vectors[0], casimir)?;
        return Ok(vec![(label, vectors[0].clone())]);
    }
    let mut out = Vec::with_capacity(k);
    for irrep in Irrep::ALL {
        let p = sym.projector(irrep);
        let projected: Vec<Vec<f64>> = vectors.iter().map(|v| p.apply(v)).collect();
        let gram = small_gram(vectors, &projected);
        let (vals, vecs) = symmetric_eigen(&gram).ok_or_else(|| {
            Error::AmbiguousLabel("projector restricted to a cluster did not diagonalize".into())
        })?;
        let mut members = Vec::new();
        for (j, &lambda) in vals.iter().enumerate() {
            if lambda > 0.5 {
                if (lambda - 1.0).abs() > 1e-6 {
                    return Err(Error::AmbiguousLabel(format!(
                        "cluster is not invariant under the point group (weight {lambda} on {irrep})"
                    )));
                }
                members.push(combine(vectors, &column(&vecs, j)));
            } else if lambda.abs() > 1e-6 {
                return Err(Error::AmbiguousLabel(format!(
                    "cluster is not invariant under the point group (weight {lambda} on {irrep})"
                )));
            }
        }
        if members.is_empty() {
            continue;
        }
        match casimir {
            None => out.extend(members.into_iter().map(|v| (SymmetryLabel { irrep, spin: None }, v))),
            Some(op) => {
                let applied: Vec<Vec<f64>> = members.iter().map(|v| op.apply(v)).collect();
                let (svals, svecs) = symmetric_eigen(&small_gram(&members, &applied))
                    .ok_or_else(|| Error::AmbiguousLabel("S^2 block did not diagonalize".into()))?;
                for (j, &x) in svals.iter().enumerate() {
                    let spin = spin_from_casimir(x).ok_or_else(|| {
                        Error::AmbiguousLabel(format!("<S^2> = {x} is not of the form S(S+1)"))
                    })?;
                    out.push((
                        SymmetryLabel {
                            irrep,
                            spin: Some(spin),
                        },
                        combine(&members, &column(&svecs, j)),
                    ));
                }
            }
        }
    }
    if out.len() != k {
        return Err(Error::AmbiguousLabel(format!(
            "{} of {k} cluster vectors could be labelled",
            out.len()
        )));
    }
    out.sort_by_key(|(label, _)| *label);
    Ok(out)
}

fn small_gram(left: &[Vec<f64>], right: &[Vec<f64>]) -> Matrix {
    let k = left.len();
    let mut g = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] = 0.5 * (dot(&left[i], &right[j]) + dot(&left[j], &right[i]));
        }
    }
    g
}

fn combine(vectors: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; vectors[0].len()];
    for (v, &c) in vectors.iter().zip(coeffs) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    let n = norm(&out);
    out.iter_mut().for_each(|x| *x /= n);
    out
}

/// Apply `P_ρ` to a full-space state sector by sector.
pub fn project_full_state(group: &PointGroup, irrep: Irrep, state: &StateVector) -> Result<StateVector> {
    let mut out = state.clone();
    let table = character_table();
    out.amps.iter_mut().for_each(|a| *a *= 0.0);
    let scale = irrep.dim() as f64 / GROUP_ORDER as f64;
    for g in group.iter() {
        let w = scale * table.character(irrep, g.class) as f64;
        if w == 0.0 {
            continue;
        }
        let image = act_permutation(g, state)?;
        for (o, a) in out.amps.iter_mut().zip(&image.amps) {
            *o += a * w;
        }
    }
    Ok(out)
}

/// Dense check helper: `‖A‖` entrywise maximum of `P² - P`.
pub fn idempotency_defect(p: &Matrix) -> f64 {
    let p2 = p * p;
    let mut worst = 0.0f64;
    for j in 0..p.ncols() {
        for i in 0..p.nrows() {
            worst = worst.max((p2[(i, j)] - p[(i, j)]).abs());
        }
    }
    worst
}

pub fn apply_dense(p: &Matrix, v: &[f64]) -> Vec<f64> {
    mat_vec(p, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::casimir_operator;
    use crate::hilbert::{build_initial_state, project_sector, Space, Spinor, StateSpec};
    use crate::lattice::{build_geometry, build_group};

    fn group() -> PointGroup {
        build_group(&build_geometry()).unwrap()
    }

    #[test]
    fn sector_character_examples() {
        let g = group();
        let e = &g.elements[g.identity()];
        assert_eq!(sector_character(e, 0).unwrap(), 924.0);
        let c2x = g.find(&[3, 2, 1, 0, 5, 4, 6, 11, 10, 9, 8, 7], -1).unwrap();
        assert_eq!(sector_character(&g.elements[c2x], 6).unwrap(), -1.0);
        let inv = g.elements_of(ConjClass::I).next().unwrap();
        assert_eq!(sector_character(inv, 5).unwrap(), 0.0);
        // trace of the signed permutation agrees with the fixed-point count
        for m in [-3, 0, 4] {
            let sym = SectorSymmetry::new(&g, m).unwrap();
            for (a, el) in sym.actions.iter().zip(g.iter()) {
                assert_eq!(a.trace(), sector_character(el, m).unwrap());
            }
        }
    }

    #[test]
    fn irrep_count_examples() {
        let t = irrep_counts(&group()).unwrap();
        assert_eq!(t.get(Irrep::A2g, 5), 2);
        assert_eq!(t.get(Irrep::A1g, 6), 0);
        assert_eq!(t.get(Irrep::A2g, 6), 1);
        assert_eq!(t.get(Irrep::E2g, 0), 156);
        for m in -6..=6 {
            assert_eq!(t.states_in_sector(m), Space::Sector(m).dim() as u64);
            for r in Irrep::ALL {
                assert_eq!(t.get(r, m), t.get(r, -m));
            }
        }
        let total: u64 = Irrep::ALL.iter().map(|&r| r.dim() as u64 * t.total(r)).sum();
        assert_eq!(total, 4096);
    }

    #[test]
    fn multiplet_examples() {
        let m = multiplet_counts(&irrep_counts(&group()).unwrap()).unwrap();
        assert_eq!(m.get(Irrep::A2g, 6), 1);
        assert_eq!(m.get(Irrep::A1g, 0), 14);
        assert_eq!(m.total(0), 132);
    }

    #[test]
    fn projectors_are_orthogonal_idempotents() {
        let g = group();
        let sym = SectorSymmetry::new(&g, 4).unwrap();
        let counts = irrep_counts(&g).unwrap();
        let dense: Vec<Matrix> = Irrep::ALL.iter().map(|&r| sym.projector(r).to_dense()).collect();
        for (i, &r) in Irrep::ALL.iter().enumerate() {
            let p = &dense[i];
            assert!(idempotency_defect(p) < 1e-10);
            for a in 0..p.nrows() {
                for b in 0..p.ncols() {
                    assert!((p[(a, b)] - p[(b, a)]).abs() < 1e-14);
                }
            }
            let expected = (r.dim() as u64 * counts.get(r, 4)) as f64;
            assert!((sym.projector(r).trace() - expected).abs() < 1e-10);
            for (j, q) in dense.iter().enumerate() {
                if i != j {
                    let prod = p * q;
                    assert!(crate::linalg::max_abs(&prod) < 1e-10);
                }
            }
        }
        let s5 = SectorSymmetry::new(&g, 5).unwrap();
        assert!((s5.projector(Irrep::A2g).trace() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn xi_is_a2g_and_zeta_has_no_a1g_component() {
        let g = group();
        let xi = build_initial_state(&StateSpec::Xi).unwrap();
        let p = project_full_state(&g, Irrep::A2g, &xi).unwrap();
        assert!(p.amps.iter().zip(&xi.amps).all(|(a, b)| (a - b).norm() < 1e-14));
        let zeta = build_initial_state(&StateSpec::Zeta {
            outer: Spinor::bloch(0.7, 1.1),
            inner: Spinor::bloch(2.2, -0.4),
        })
        .unwrap();
        let p = project_full_state(&g, Irrep::A1g, &zeta).unwrap();
        assert!(p.norm() < 1e-14);
        // sector-wise application agrees
        let (x5, _) = project_sector(&xi, 5).unwrap();
        let sym = SectorSymmetry::new(&g, 5).unwrap();
        let v = x5.real_parts();
        let pv = sym.projector(Irrep::A2g).apply(&v);
        assert!(v.iter().zip(&pv).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn factorized_states_transform_as_a2g() {
        let g = group();
        let specs = [
            StateSpec::Xi,
            StateSpec::Chi,
            StateSpec::Zeta {
                outer: Spinor::up_z(),
                inner: Spinor::up_z(),
            },
            StateSpec::Zeta {
                outer: Spinor::bloch(0.3, 2.0),
                inner: Spinor::bloch(1.9, 0.5),
            },
        ];
        for spec in specs {
            let sig = classify_factorized_state(&g, &build_initial_state(&spec).unwrap()).unwrap();
            assert_eq!(sig.len(), 12);
            assert_eq!(one_dimensional_irrep(&sig), Some(Irrep::A2g), "{spec:?}");
            for (c, x) in sig {
                let minus = matches!(c, ConjClass::C2p | ConjClass::C2pp | ConjClass::SigmaD | ConjClass::SigmaV);
                assert!((x - if minus { -1.0 } else { 1.0 }).abs() < 1e-12);
            }
        }
        // a single flipped spin is not an eigenvector of the rotations
        assert!(matches!(
            classify_factorized_state(&g, &StateVector::config(1)),
            Err(Error::NotAnEigenstate(_))
        ));
    }

    #[test]
    fn labels_for_simple_vectors() {
        let g = group();
        let sym6 = SectorSymmetry::new(&g, 6).unwrap();
        let c6 = casimir_operator(6).unwrap();
        let label = label_eigenvector(&sym6, &[1.0], Some(&c6)).unwrap();
        assert_eq!(label, SymmetryLabel { irrep: Irrep::A2g, spin: Some(6) });
        let sym5 = SectorSymmetry::new(&g, 5).unwrap();
        let c5 = casimir_operator(5).unwrap();
        let s = 1.0 / 12f64.sqrt();
        let sym_comb = vec![s; 12];
        let label = label_eigenvector(&sym5, &sym_comb, Some(&c5)).unwrap();
        assert_eq!(label, SymmetryLabel { irrep: Irrep::A2g, spin: Some(6) });
        let mut anti = vec![-s; 12];
        anti[6..].iter_mut().for_each(|x| *x = s);
        let label = label_eigenvector(&sym5, &anti, Some(&c5)).unwrap();
        assert_eq!(label, SymmetryLabel { irrep: Irrep::A2g, spin: Some(5) });
        let mut single = vec![0.0; 12];
        single[0] = 1.0;
        assert!(label_eigenvector(&sym5, &single, None).is_err());
        assert_eq!(spin_from_casimir(42.0), Some(6));
        assert_eq!(spin_from_casimir(41.0), None);
    }

    #[test]
    fn adapted_basis_splits_a_sector() {
        // the whole M=5 sector is an invariant subspace
        let g = group();
        let sym5 = SectorSymmetry::new(&g, 5).unwrap();
        let vectors: Vec<Vec<f64>> = (0..12)
            .map(|k| {
                let mut v = vec![0.0; 12];
                v[k] = 1.0;
                v
            })
            .collect();
        let c5 = casimir_operator(5).unwrap();
        let adapted = symmetry_adapted_basis(&sym5, &vectors, Some(&c5)).unwrap();
        let count = |r: Irrep, s: u32| {
            adapted
                .iter()
                .filter(|(l, _)| l.irrep == r && l.spin == Some(s))
                .count()
        };
        assert_eq!(count(Irrep::A2g, 6), 1);
        assert_eq!(count(Irrep::A2g, 5), 1);
        assert_eq!(count(Irrep::E2g, 5), 4);
        assert_eq!(count(Irrep::B1u, 5), 1);
        let _ = Space::Full;
    }
}
