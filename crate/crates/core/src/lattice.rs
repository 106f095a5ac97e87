//! Hexagram geometry, the D6h point group as signed site permutations, and
//! the character table restricted to the representations that can occur
//! for spins confined to the horizontal plane.
//!
//! Sites 0..6 form the outer ring (radius √3, angles 90° + 60°k) and sites
//! 6..12 the inner ring (radius 1, angles 60°k), all in units of the
//! nearest-neighbour distance `a = r_08`.

use serde::Serialize;

use crate::error::{Error, Result};

pub const N_SITES: usize = 12;
pub const N_OUTER: usize = 6;
pub const GROUP_ORDER: usize = 24;

/// Site permutation: `perm[i]` is the site that site `i` is carried to.
pub type Perm = [usize; N_SITES];

#[derive(Clone, Debug, Serialize)]
pub struct Geometry {
    pub positions: [[f64; 2]; N_SITES],
    /// Squared distances in units of a², exact.
    pub distance_sq: [[u32; N_SITES]; N_SITES],
}

impl Geometry {
    pub fn is_outer(site: usize) -> bool {
        site < N_OUTER
    }

    pub fn outer_sites() -> std::ops::Range<usize> {
        0..N_OUTER
    }

    pub fn inner_sites() -> std::ops::Range<usize> {
        N_OUTER..N_SITES
    }

    /// Unordered site pairs `(i, j)` with `i < j`.
    pub fn pairs() -> impl Iterator<Item = (usize, usize)> {
        (0..N_SITES).flat_map(|i| (i + 1..N_SITES).map(move |j| (i, j)))
    }
}

pub fn build_geometry() -> Geometry {
    let mut positions = [[0.0; 2]; N_SITES];
    let outer_radius = 3f64.sqrt();
    for k in 0..N_OUTER {
        let outer = (90.0 + 60.0 * k as f64).to_radians();
        positions[k] = [outer_radius * outer.cos(), outer_radius * outer.sin()];
        let inner = (60.0 * k as f64).to_radians();
        positions[N_OUTER + k] = [inner.cos(), inner.sin()];
    }
    let mut distance_sq = [[0u32; N_SITES]; N_SITES];
    for i in 0..N_SITES {
        for j in 0..N_SITES {
            let dx = positions[i][0] - positions[j][0];
            let dy = positions[i][1] - positions[j][1];
            let d2 = dx * dx + dy * dy;
            // every squared distance on this lattice is an integer
            debug_assert!((d2 - d2.round()).abs() < 1e-9);
            distance_sq[i][j] = d2.round() as u32;
        }
    }
    Geometry {
        positions,
        distance_sq,
    }
}

/// Conjugacy classes of D6h, in character-table column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ConjClass {
    E,
    C6,
    C3,
    C2,
    C2p,
    C2pp,
    I,
    S3,
    S6,
    SigmaH,
    SigmaD,
    SigmaV,
}

impl ConjClass {
    pub const ALL: [ConjClass; 12] = [
        ConjClass::E,
        ConjClass::C6,
        ConjClass::C3,
        ConjClass::C2,
        ConjClass::C2p,
        ConjClass::C2pp,
        ConjClass::I,
        ConjClass::S3,
        ConjClass::S6,
        ConjClass::SigmaH,
        ConjClass::SigmaD,
        ConjClass::SigmaV,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn size(self) -> usize {
        use ConjClass::*;
        match self {
            E | C2 | I | SigmaH => 1,
            C6 | C3 | S3 | S6 => 2,
            C2p | C2pp | SigmaD | SigmaV => 3,
        }
    }

    pub fn label(self) -> &'static str {
        use ConjClass::*;
        match self {
            E => "E",
            C6 => "2C6",
            C3 => "2C3",
            C2 => "C2",
            C2p => "3C2'",
            C2pp => "3C2''",
            I => "I",
            S3 => "2S3",
            S6 => "2S6",
            SigmaH => "sigma_h",
            SigmaD => "3sigma_d",
            SigmaV => "3sigma_v",
        }
    }

    /// Class of `I·g` given the class of the proper rotation `g`.
    fn times_inversion(self) -> ConjClass {
        use ConjClass::*;
        match self {
            E => I,
            C6 => S3,
            C3 => S6,
            C2 => SigmaH,
            C2p => SigmaD,
            C2pp => SigmaV,
            I => E,
            S3 => C6,
            S6 => C3,
            SigmaH => C2,
            SigmaD => C2p,
            SigmaV => C2pp,
        }
    }
}

/// One D6h operation. Its action on the plane is `linear`; `z_sign` records
/// whether it flips the normal axis, so that `g` and `σ_h·g` (which permute
/// the sites identically) remain distinct elements.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupElement {
    pub perm: Perm,
    pub parity: i8,
    pub z_sign: i8,
    pub class: ConjClass,
    pub linear: [[f64; 2]; 2],
}

impl GroupElement {
    pub fn inverse_perm(&self) -> Perm {
        let mut inv = [0; N_SITES];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        inv
    }

    pub fn apply_to_point(&self, p: [f64; 2]) -> [f64; 2] {
        let m = &self.linear;
        [m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1]]
    }

    /// Image of a configuration bitmask: the spin on site `j` moves to site `perm[j]`.
    pub fn map_bits(&self, bits: u16) -> u16 {
        let mut out = 0u16;
        for (j, &target) in self.perm.iter().enumerate() {
            out |= ((bits >> j) & 1) << target;
        }
        out
    }

    /// Image of a bipartition mask (same routing as `map_bits`).
    pub fn map_mask(&self, mask: u16) -> u16 {
        self.map_bits(mask)
    }
}

/// Sign of a permutation from its inversion count.
pub fn permutation_parity(perm: &[usize]) -> i8 {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PointGroup {
    pub elements: Vec<GroupElement>,
}

impl PointGroup {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GroupElement> {
        self.elements.iter()
    }

    pub fn find(&self, perm: &Perm, z_sign: i8) -> Option<usize> {
        self.elements
            .iter()
            .position(|g| &g.perm == perm && g.z_sign == z_sign)
    }

    pub fn identity(&self) -> usize {
        self.elements
            .iter()
            .position(|g| g.class == ConjClass::E)
            .expect("group contains the identity")
    }

    /// Index of `a ∘ b` (apply `b` first).
    pub fn compose(&self, a: usize, b: usize) -> Option<usize> {
        let (ga, gb) = (&self.elements[a], &self.elements[b]);
        let mut perm = [0; N_SITES];
        for i in 0..N_SITES {
            perm[i] = ga.perm[gb.perm[i]];
        }
        self.find(&perm, ga.z_sign * gb.z_sign)
    }

    pub fn inverse(&self, a: usize) -> Option<usize> {
        let g = &self.elements[a];
        self.find(&g.inverse_perm(), g.z_sign)
    }

    /// Full multiplication table; `None` entries mean the set is not closed.
    pub fn multiplication_table(&self) -> Vec<Vec<Option<usize>>> {
        (0..self.len())
            .map(|a| (0..self.len()).map(|b| self.compose(a, b)).collect())
            .collect()
    }

    /// Conjugacy classes computed from the multiplication table, each sorted,
    /// ordered by their smallest member.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut classes = Vec::new();
        for a in 0..n {
            if seen[a] {
                continue;
            }
            let mut class: Vec<usize> = (0..n)
                .filter_map(|h| {
                    let hinv = self.inverse(h)?;
                    let ha = self.compose(h, a)?;
                    self.compose(ha, hinv)
                })
                .collect();
            class.sort_unstable();
            class.dedup();
            for &c in &class {
                seen[c] = true;
            }
            classes.push(class);
        }
        classes
    }

    pub fn elements_of(&self, class: ConjClass) -> impl Iterator<Item = &GroupElement> {
        self.elements.iter().filter(move |g| g.class == class)
    }
}

fn rotation(theta_deg: f64) -> [[f64; 2]; 2] {
    let t = theta_deg.to_radians();
    [[t.cos(), -t.sin()], [t.sin(), t.cos()]]
}

/// In-plane reflection across the line at angle `beta_deg`; as a 3D operation
/// combined with `z -> -z` this is the two-fold rotation about that line.
fn line_reflection(beta_deg: f64) -> [[f64; 2]; 2] {
    let t = (2.0 * beta_deg).to_radians();
    [[t.cos(), t.sin()], [t.sin(), -t.cos()]]
}

fn negate(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [[-m[0][0], -m[0][1]], [-m[1][0], -m[1][1]]]
}

fn site_permutation(geometry: &Geometry, linear: &[[f64; 2]; 2]) -> Option<Perm> {
    let mut perm = [0; N_SITES];
    for (i, p) in geometry.positions.iter().enumerate() {
        let q = [
            linear[0][0] * p[0] + linear[0][1] * p[1],
            linear[1][0] * p[0] + linear[1][1] * p[1],
        ];
        perm[i] = geometry.positions.iter().position(|r| {
            (r[0] - q[0]).abs() < 1e-9 && (r[1] - q[1]).abs() < 1e-9
        })?;
    }
    Some(perm)
}

fn classify(linear: &[[f64; 2]; 2], z_sign: i8, perm: &Perm) -> ConjClass {
    let det2 = linear[0][0] * linear[1][1] - linear[0][1] * linear[1][0];
    let proper = (det2 * z_sign as f64) > 0.0;
    if !proper {
        let mut counterpart = [0; N_SITES];
        // I·g: inversion maps site i to the diametrically opposite site of its ring
        for i in 0..N_SITES {
            counterpart[i] = opposite_site(perm[i]);
        }
        return classify(&negate(*linear), -z_sign, &counterpart).times_inversion();
    }
    if z_sign > 0 {
        let trace = linear[0][0] + linear[1][1];
        match trace.round() as i32 {
            2 => ConjClass::E,
            1 => ConjClass::C6,
            -1 => ConjClass::C3,
            _ => ConjClass::C2,
        }
    } else if Geometry::inner_sites().any(|s| perm[s] == s) {
        // axes through the inner vertices (the x axis among them)
        ConjClass::C2p
    } else {
        ConjClass::C2pp
    }
}

fn opposite_site(site: usize) -> usize {
    if site < N_OUTER {
        (site + 3) % N_OUTER
    } else {
        N_OUTER + (site - N_OUTER + 3) % N_OUTER
    }
}

pub fn build_group(geometry: &Geometry) -> Result<PointGroup> {
    let mut generators: Vec<([[f64; 2]; 2], i8)> = Vec::with_capacity(GROUP_ORDER);
    for k in 0..6 {
        generators.push((rotation(60.0 * k as f64), 1));
    }
    for k in 0..6 {
        generators.push((line_reflection(30.0 * k as f64), -1));
    }
    let proper = generators.clone();
    for (m, z) in proper {
        generators.push((negate(m), -z));
    }

    let mut elements = Vec::with_capacity(GROUP_ORDER);
    for (linear, z_sign) in generators {
        let perm = site_permutation(geometry, &linear).ok_or(Error::GeometryMismatch(
            "a point-group operation does not map the sites onto themselves".into(),
        ))?;
        for i in 0..N_SITES {
            for j in 0..N_SITES {
                if geometry.distance_sq[perm[i]][perm[j]] != geometry.distance_sq[i][j] {
                    return Err(Error::GeometryMismatch(format!(
                        "operation {perm:?} does not preserve the distance between sites {i} and {j}"
                    )));
                }
            }
        }
        let class = classify(&linear, z_sign, &perm);
        elements.push(GroupElement {
            perm,
            parity: permutation_parity(&perm),
            z_sign,
            class,
            linear,
        });
    }
    elements.sort_by_key(|g| g.class);
    Ok(PointGroup { elements })
}

/// The six irreducible representations whose σ_h character equals their
/// dimension, in the column order used by the irrep-count tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Irrep {
    A1g,
    A2g,
    E2g,
    B1u,
    B2u,
    E1u,
}

impl Irrep {
    pub const ALL: [Irrep; 6] = [
        Irrep::A1g,
        Irrep::A2g,
        Irrep::E2g,
        Irrep::B1u,
        Irrep::B2u,
        Irrep::E1u,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn dim(self) -> usize {
        match self {
            Irrep::E2g | Irrep::E1u => 2,
            _ => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Irrep::A1g => "A1g",
            Irrep::A2g => "A2g",
            Irrep::E2g => "E2g",
            Irrep::B1u => "B1u",
            Irrep::B2u => "B2u",
            Irrep::E1u => "E1u",
        }
    }
}

impl std::fmt::Display for Irrep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Irrep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Irrep::ALL
            .into_iter()
            .find(|r| r.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown irrep {s:?}")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterTable {
    pub irreps: [Irrep; 6],
    /// `characters[irrep][class]`.
    pub characters: [[i32; 12]; 6],
}

impl CharacterTable {
    pub fn character(&self, irrep: Irrep, class: ConjClass) -> i32 {
        self.characters[irrep.index()][class.index()]
    }
}

pub fn character_table() -> CharacterTable {
    CharacterTable {
        irreps: Irrep::ALL,
        characters: [
            [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1],
            [1, 1, 1, 1, -1, -1, 1, 1, 1, 1, -1, -1],
            [2, -1, -1, 2, 0, 0, 2, -1, -1, 2, 0, 0],
            [1, -1, 1, -1, 1, -1, -1, 1, -1, 1, -1, 1],
            [1, -1, 1, -1, -1, 1, -1, 1, -1, 1, 1, -1],
            [2, 1, -1, -2, 0, 0, -2, -1, 1, 2, 0, 0],
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle_parity(perm: &Perm) -> i8 {
        let mut seen = [false; N_SITES];
        let mut cycles = 0;
        for start in 0..N_SITES {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = perm[i];
            }
        }
        if (N_SITES - cycles) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    fn group() -> PointGroup {
        build_group(&build_geometry()).unwrap()
    }

    #[test]
    fn geometry_distances() {
        let g = build_geometry();
        assert_eq!(g.distance_sq[0][8], 1);
        assert_eq!(g.distance_sq[0][7], 1);
        assert_eq!(g.distance_sq[0][3], 12);
        assert_eq!(g.distance_sq[6][9], 4);
        let allowed = [1, 3, 4, 7, 9, 12];
        for (i, j) in Geometry::pairs() {
            assert!(allowed.contains(&g.distance_sq[i][j]), "{i},{j}");
        }
        for s in Geometry::outer_sites() {
            let [x, y] = g.positions[s];
            assert!((x * x + y * y - 3.0).abs() < 1e-12);
        }
        for s in Geometry::inner_sites() {
            let [x, y] = g.positions[s];
            assert!((x * x + y * y - 1.0).abs() < 1e-12);
        }
        assert!(g.positions[6][1].abs() < 1e-15 && g.positions[6][0] > 0.0);
        assert!(g.positions[0][0].abs() < 1e-15 && g.positions[0][1] > 0.0);
    }

    #[test]
    fn class_sizes_and_order() {
        let g = group();
        assert_eq!(g.len(), GROUP_ORDER);
        for class in ConjClass::ALL {
            assert_eq!(g.elements_of(class).count(), class.size(), "{class:?}");
        }
    }

    #[test]
    fn displayed_permutations_and_parities() {
        let g = group();
        let c6: Perm = [1, 2, 3, 4, 5, 0, 7, 8, 9, 10, 11, 6];
        let c2x: Perm = [3, 2, 1, 0, 5, 4, 6, 11, 10, 9, 8, 7];
        let inv: Perm = [3, 4, 5, 0, 1, 2, 9, 10, 11, 6, 7, 8];
        let e = &g.elements[g.find(&c6, 1).unwrap()];
        assert_eq!((e.class, e.parity), (ConjClass::C6, 1));
        let e = &g.elements[g.find(&c2x, -1).unwrap()];
        assert_eq!((e.class, e.parity), (ConjClass::C2p, -1));
        let e = &g.elements[g.find(&inv, -1).unwrap()];
        assert_eq!((e.class, e.parity), (ConjClass::I, 1));
    }

    #[test]
    fn parity_matches_cycle_decomposition() {
        for e in group().iter() {
            assert_eq!(e.parity, cycle_parity(&e.perm));
        }
    }

    #[test]
    fn group_axioms() {
        let g = group();
        let id = g.identity();
        for a in 0..g.len() {
            assert_eq!(g.compose(id, a), Some(a));
            let inv = g.inverse(a).expect("inverse in set");
            assert_eq!(g.compose(a, inv), Some(id));
            for b in 0..g.len() {
                let ab = g.compose(a, b).expect("closure");
                for c in 0..g.len() {
                    let left = g.compose(ab, c);
                    let right = g.compose(a, g.compose(b, c).unwrap());
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn conjugacy_classes_match_labels() {
        let g = group();
        let classes = g.conjugacy_classes();
        assert_eq!(classes.len(), 12);
        for class in classes {
            let label = g.elements[class[0]].class;
            assert!(class.iter().all(|&i| g.elements[i].class == label));
            assert_eq!(class.len(), label.size());
        }
    }

    #[test]
    fn coordinate_action_permutes_sites() {
        let geo = build_geometry();
        for e in group().iter() {
            for (i, &p) in geo.positions.iter().enumerate() {
                let q = e.apply_to_point(p);
                let r = geo.positions[e.perm[i]];
                assert!((q[0] - r[0]).abs() < 1e-12 && (q[1] - r[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn character_orthogonality() {
        let t = character_table();
        for a in Irrep::ALL {
            for b in Irrep::ALL {
                let s: i32 = ConjClass::ALL
                    .iter()
                    .map(|&c| c.size() as i32 * t.character(a, c) * t.character(b, c))
                    .sum();
                assert_eq!(s, if a == b { 24 } else { 0 });
            }
            assert_eq!(t.character(a, ConjClass::SigmaH), a.dim() as i32);
            assert_eq!(t.character(a, ConjClass::E), a.dim() as i32);
        }
        assert_eq!(t.character(Irrep::A2g, ConjClass::C2p), -1);
        assert_eq!(t.character(Irrep::E2g, ConjClass::E), 2);
    }

    #[test]
    fn sigma_h_g_shares_permutation_with_g() {
        let g = group();
        for e in g.iter() {
            let partner = g.find(&e.perm, -e.z_sign).unwrap();
            assert_ne!(g.elements[partner].class, e.class);
        }
    }
}
