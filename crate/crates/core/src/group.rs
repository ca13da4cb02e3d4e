//! Involutions, the diagonal torus, roots and the catalog of σ-parabolic
//! subgroups of SL(3, F).
//!
//! Parabolic subgroups containing the diagonal subalgebra are identified with
//! the root sets of their nilradicals. Every relation used downstream is a
//! statement about those root sets, so no group-level closure is computed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldTag, Mat3, Scalar};

/// A point of V = { t in R³ : t₁ + t₂ + t₃ = 0 }.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagVec([f64; 3]);

impl DiagVec {
    /// Orthogonal projection onto V.
    pub fn new(t: [f64; 3]) -> Self {
        let m = (t[0] + t[1] + t[2]) / 3.0;
        DiagVec([t[0] - m, t[1] - m, t[2] - m])
    }

    pub fn zero() -> Self {
        DiagVec([0.0; 3])
    }

    pub fn t(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn neg(&self) -> Self {
        DiagVec(self.0.map(|x| -x))
    }

    /// Coordinates permuted by the index map `perm` (zero-based): the result
    /// has entry `perm[i]` equal to entry `i` of `self`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[perm[i]] = self.0[i];
        }
        DiagVec(out)
    }

    pub fn scaled(&self, s: f64) -> Self {
        DiagVec(self.0.map(|x| x * s))
    }
}

impl std::ops::Add for DiagVec {
    type Output = DiagVec;
    fn add(self, rhs: DiagVec) -> DiagVec {
        DiagVec::new([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

/// The root e_i − e_j (one-based indices), equivalently the root space 𝔤_{i,j}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RootIdx {
    i: u8,
    j: u8,
}

impl RootIdx {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == j || !(1..=3).contains(&i) || !(1..=3).contains(&j) {
            return Err(Error::InvalidRoot(i, j));
        }
        Ok(RootIdx {
            i: i as u8,
            j: j as u8,
        })
    }

    const fn of(i: u8, j: u8) -> Self {
        RootIdx { i, j }
    }

    pub fn i(&self) -> usize {
        self.i as usize
    }

    pub fn j(&self) -> usize {
        self.j as usize
    }

    pub fn neg(&self) -> Self {
        RootIdx { i: self.j, j: self.i }
    }

    /// α(t) = t_i − t_j.
    pub fn eval(&self, t: &DiagVec) -> f64 {
        t.0[self.i() - 1] - t.0[self.j() - 1]
    }

    /// The sum of two roots, when it is again a root.
    pub fn add(&self, other: &RootIdx) -> Option<RootIdx> {
        if self.j == other.i && self.i != other.j {
            Some(RootIdx::of(self.i, other.j))
        } else if other.j == self.i && other.i != self.j {
            Some(RootIdx::of(other.i, self.j))
        } else {
            None
        }
    }

    /// All six roots in a fixed order.
    pub fn all() -> [RootIdx; 6] {
        [
            RootIdx::of(1, 2),
            RootIdx::of(1, 3),
            RootIdx::of(2, 1),
            RootIdx::of(2, 3),
            RootIdx::of(3, 1),
            RootIdx::of(3, 2),
        ]
    }

    fn elementary(&self, tag: FieldTag) -> Mat3 {
        let mut m = Mat3::zeros(tag);
        m.set(self.i() - 1, self.j() - 1, Scalar::one(tag))
            .expect("same tag");
        m
    }
}

impl fmt::Display for RootIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParabolicId {
    P1,
    P2,
    P3,
    Q1,
    Q2,
    Q3,
    Q4,
}

impl ParabolicId {
    pub const ALL: [ParabolicId; 7] = [
        ParabolicId::P1,
        ParabolicId::P2,
        ParabolicId::P3,
        ParabolicId::Q1,
        ParabolicId::Q2,
        ParabolicId::Q3,
        ParabolicId::Q4,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ParabolicId::P1 => "P1",
            ParabolicId::P2 => "P2",
            ParabolicId::P3 => "P3",
            ParabolicId::Q1 => "Q1",
            ParabolicId::Q2 => "Q2",
            ParabolicId::Q3 => "Q3",
            ParabolicId::Q4 => "Q4",
        }
    }

    fn roots(&self) -> &'static [(u8, u8)] {
        match self {
            ParabolicId::P1 => &[(1, 2), (1, 3), (2, 3)],
            ParabolicId::P2 => &[(2, 1), (1, 3), (2, 3)],
            ParabolicId::P3 => &[(2, 1), (3, 1), (2, 3)],
            ParabolicId::Q1 => &[(1, 3), (2, 3)],
            ParabolicId::Q2 => &[(2, 1), (3, 1)],
            ParabolicId::Q3 => &[(1, 2), (1, 3)],
            ParabolicId::Q4 => &[(2, 1), (2, 3)],
        }
    }
}

impl fmt::Display for ParabolicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ParabolicId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ParabolicId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown parabolic '{s}'")))
    }
}

/// A parabolic subgroup containing exp(𝔞), identified by its nilradical roots.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParabolicSpec {
    pub id: Option<ParabolicId>,
    pub nil_roots: BTreeSet<RootIdx>,
}

impl ParabolicSpec {
    pub fn named(id: ParabolicId) -> Self {
        ParabolicSpec {
            id: Some(id),
            nil_roots: id.roots().iter().map(|&(i, j)| RootIdx::of(i, j)).collect(),
        }
    }

    pub fn anonymous(nil_roots: impl IntoIterator<Item = RootIdx>) -> Self {
        ParabolicSpec {
            id: None,
            nil_roots: nil_roots.into_iter().collect(),
        }
    }

    pub fn label(&self) -> String {
        match self.id {
            Some(id) => id.name().to_string(),
            None => {
                let roots: Vec<String> = self.nil_roots.iter().map(|r| r.to_string()).collect();
                format!("{{{}}}", roots.join(","))
            }
        }
    }

    /// Closed under root addition.
    pub fn is_closed(&self) -> bool {
        self.nil_roots.iter().all(|a| {
            self.nil_roots
                .iter()
                .filter_map(|b| a.add(b))
                .all(|s| self.nil_roots.contains(&s))
        })
    }

    pub fn is_minimal(&self) -> bool {
        self.nil_roots.len() == 3
    }

    pub fn is_maximal(&self) -> bool {
        self.nil_roots.len() == 2
    }

    pub fn opposite(&self) -> BTreeSet<RootIdx> {
        self.nil_roots.iter().map(RootIdx::neg).collect()
    }

    /// Same root set, ignoring the label.
    pub fn same_roots(&self, other: &ParabolicSpec) -> bool {
        self.nil_roots == other.nil_roots
    }

    /// Catalog entry with the same root set, if any.
    pub fn identify(&self) -> Option<ParabolicId> {
        ParabolicId::ALL
            .into_iter()
            .find(|id| ParabolicSpec::named(*id).nil_roots == self.nil_roots)
    }
}

/// The seven catalogued σ-parabolics P1–P3, Q1–Q4.
pub fn catalog() -> Vec<ParabolicSpec> {
    ParabolicId::ALL.into_iter().map(ParabolicSpec::named).collect()
}

/// J = diag(1, −1, −1).
pub fn j_matrix(tag: FieldTag) -> Mat3 {
    Mat3::diag_real(tag, [1.0, -1.0, -1.0])
}

/// Cartan involution g ↦ (g⁻¹)†.
pub fn theta(g: &Mat3) -> Result<Mat3> {
    Ok(g.inverse()?.dagger())
}

/// g ↦ J θ(g) J.
pub fn sigma(g: &Mat3) -> Result<Mat3> {
    let j = j_matrix(g.tag());
    Ok(&(&j * &theta(g)?) * &j)
}

/// σ(g)⁻¹ = J g† J, without an inversion.
pub fn sigma_inv(g: &Mat3) -> Mat3 {
    let j = j_matrix(g.tag());
    &(&j * &g.dagger()) * &j
}

/// a_t = diag(e^{t₁}, e^{t₂}, e^{t₃}).
pub fn a_exp(t: &DiagVec, tag: FieldTag) -> Mat3 {
    Mat3::diag_real(tag, t.0.map(f64::exp))
}

/// I + Σ c_{ij} E_{ij}; the keys must be exactly the nilradical roots.
pub fn nil_elem(
    spec: &ParabolicSpec,
    coords: &BTreeMap<RootIdx, Scalar>,
    tag: FieldTag,
) -> Result<Mat3> {
    let keys: BTreeSet<RootIdx> = coords.keys().copied().collect();
    if keys != spec.nil_roots {
        return Err(Error::KeyMismatch {
            missing: spec.nil_roots.difference(&keys).copied().collect(),
            unexpected: keys.difference(&spec.nil_roots).copied().collect(),
        });
    }
    let mut m = Mat3::identity(tag);
    for (r, s) in coords {
        m.set(r.i() - 1, r.j() - 1, *s)?;
    }
    Ok(m)
}

/// n_{y,z} = I + z E₁₃ + y E₂₃, the generic element of N_{Q₁}.
pub fn n_yz(y: Scalar, z: Scalar) -> Result<Mat3> {
    let tag = y.tag();
    let coords = BTreeMap::from([(RootIdx::of(1, 3), z), (RootIdx::of(2, 3), y)]);
    nil_elem(&ParabolicSpec::named(ParabolicId::Q1), &coords, tag)
}

/// The representative of the nontrivial class of N_{K∩H}(𝔞)/Z_{K∩H}(𝔞).
pub fn w0(tag: FieldTag) -> Mat3 {
    Mat3::from_real(tag, [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]])
}

/// Image of a root space under a linear map, read off from the single
/// nonzero slot of the image of the elementary matrix.
fn root_image(map: impl Fn(&Mat3) -> Mat3) -> BTreeMap<RootIdx, (RootIdx, f64)> {
    let tag = FieldTag::R;
    RootIdx::all()
        .into_iter()
        .map(|r| {
            let img = map(&r.elementary(tag));
            let mut found = None;
            for a in RootIdx::all() {
                let s = img.get(a.i() - 1, a.j() - 1).re();
                if s.abs() > 0.5 {
                    assert!(found.is_none(), "root space image is not a root space");
                    found = Some((a, s.signum()));
                }
            }
            (r, found.expect("root space image is a root space"))
        })
        .collect()
}

/// dσ(X) = −J X† J on root spaces, as (target root, sign).
pub fn sigma_root_table() -> &'static BTreeMap<RootIdx, (RootIdx, f64)> {
    static TABLE: OnceLock<BTreeMap<RootIdx, (RootIdx, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        root_image(|x| {
            let j = j_matrix(FieldTag::R);
            (&(&j * &x.dagger()) * &j).scale(-1.0)
        })
    })
}

/// Ad(w₀) on root spaces, as (target root, sign).
pub fn w0_root_table() -> &'static BTreeMap<RootIdx, (RootIdx, f64)> {
    static TABLE: OnceLock<BTreeMap<RootIdx, (RootIdx, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let w = w0(FieldTag::R);
        let wi = w.inverse().expect("w0 invertible");
        root_image(|x| &(&w * x) * &wi)
    })
}

fn map_spec(spec: &ParabolicSpec, table: &BTreeMap<RootIdx, (RootIdx, f64)>) -> ParabolicSpec {
    let mut out = ParabolicSpec::anonymous(spec.nil_roots.iter().map(|r| table[r].0));
    out.id = out.identify();
    out
}

pub fn sigma_on_spec(spec: &ParabolicSpec) -> ParabolicSpec {
    map_spec(spec, sigma_root_table())
}

pub fn conj_by_w0(spec: &ParabolicSpec) -> ParabolicSpec {
    map_spec(spec, w0_root_table())
}

/// σ(P) is opposite to P.
pub fn is_sigma_parabolic(spec: &ParabolicSpec) -> bool {
    sigma_on_spec(spec).nil_roots == spec.opposite()
}

/// ρ_P(t) = (k/2) Σ_{α ∈ nilRoots} α(t).
pub fn rho(spec: &ParabolicSpec, t: &DiagVec, tag: FieldTag) -> f64 {
    let k = tag.real_dim() as f64;
    0.5 * k * spec.nil_roots.iter().map(|r| r.eval(t)).sum::<f64>()
}

/// δ_P(a_t) = e^{ρ_P(t)}.
pub fn delta_char(spec: &ParabolicSpec, t: &DiagVec, tag: FieldTag) -> f64 {
    rho(spec, t, tag).exp()
}

/// Nilradicals of the six minimal parabolics containing exp(𝔞), one per
/// Weyl chamber.
pub fn minimal_chambers() -> Vec<ParabolicSpec> {
    const PERMS: [[u8; 3]; 6] = [
        [1, 2, 3],
        [1, 3, 2],
        [2, 1, 3],
        [2, 3, 1],
        [3, 1, 2],
        [3, 2, 1],
    ];
    PERMS
        .iter()
        .map(|p| {
            let mut s = ParabolicSpec::anonymous([
                RootIdx::of(p[0], p[1]),
                RootIdx::of(p[0], p[2]),
                RootIdx::of(p[1], p[2]),
            ]);
            s.id = s.identify();
            s
        })
        .collect()
}

/// Nilradicals of the six maximal parabolics containing exp(𝔞): two-root
/// sets sharing a row index or a column index. Each one is the set of
/// positive roots with a positive coefficient on one simple root of some
/// chamber.
pub fn maximal_nilradicals() -> Vec<ParabolicSpec> {
    let mut out = Vec::new();
    for k in 1..=3u8 {
        let others: Vec<u8> = (1..=3).filter(|&x| x != k).collect();
        for column in [true, false] {
            let roots = others.iter().map(|&o| {
                if column {
                    RootIdx::of(o, k)
                } else {
                    RootIdx::of(k, o)
                }
            });
            let mut s = ParabolicSpec::anonymous(roots);
            s.id = s.identify();
            out.push(s);
        }
    }
    out
}

/// Orbits of σ-parabolic root sets under conjugation by w₀ (the group
/// N_{K∩H}(𝔞)/Z_{K∩H}(𝔞)). The representative is the orbit member that
/// does not contain 𝔤_{3,2}.
pub fn sigma_classes(specs: &[ParabolicSpec]) -> Vec<ParabolicSpec> {
    let r32 = RootIdx::of(3, 2);
    let mut reps: Vec<ParabolicSpec> = Vec::new();
    for s in specs.iter().filter(|s| s.is_closed() && is_sigma_parabolic(s)) {
        let partner = conj_by_w0(s);
        let rep = if s.nil_roots.contains(&r32) { partner } else { s.clone() };
        if !reps.iter().any(|r| r.same_roots(&rep)) {
            reps.push(rep);
        }
    }
    reps.sort_by(|a, b| a.nil_roots.cmp(&b.nil_roots));
    reps
}
