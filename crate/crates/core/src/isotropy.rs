//! Isotropy representation of a flag: module basis, k_Θ action, M action and
//! the (projected) bracket table.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chevalley::{
    build_realization, u_l_image, u_l_labels, AbstractElement, ChevError, MatrixRealization,
    StructureConstants,
};
use crate::exactalg::{q, QMatrix, Rational};
use crate::rootsys::{all_subsets, theta_closure, Family, LieType, RootError, RootSystem, ThetaSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IsoError {
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Chevalley(#[from] ChevError),
    #[error("rank {0} exceeds the enumeration guard of 12")]
    RankGuard(usize),
    #[error("k_theta does not preserve the module: {0}")]
    NotInvariant(String),
    #[error("basis change matrix is singular")]
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Σ g_α over α ∈ Π⁻∖⟨Θ⟩⁻.
    NMinus,
    /// Σ g_α over α ∈ Π⁺∖⟨Θ⟩⁺.
    NPlus,
    /// Complement of k_Θ in k, spanned by A_α = X_α − X_{−α}.
    MTheta,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::NMinus => "n_minus",
            Model::NPlus => "n_plus",
            Model::MTheta => "m_theta",
        }
    }

    pub fn parse(s: &str) -> Option<Model> {
        match s {
            "n_minus" => Some(Model::NMinus),
            "n_plus" => Some(Model::NPlus),
            "m_theta" => Some(Model::MTheta),
            _ => None,
        }
    }
}

/// Model used for verdicts when none is requested: m_theta for intermediate
/// flags of types C and D, n_minus otherwise.
pub fn default_model(t: LieType, theta: &ThetaSet) -> Model {
    let intermediate = !theta.members.is_empty() && theta.members.len() < t.rank;
    match t.family {
        Family::C | Family::D if intermediate => Model::MTheta,
        _ => Model::NMinus,
    }
}

#[derive(Debug, Clone)]
pub struct FlagSpec {
    pub rs: Arc<RootSystem>,
    pub theta: ThetaSet,
    pub model: Model,
}

impl FlagSpec {
    pub fn new(rs: Arc<RootSystem>, members: &[usize], model: Model) -> Self {
        let theta = theta_closure(&rs, members);
        FlagSpec { rs, theta, model }
    }

    pub fn lie_type(&self) -> LieType {
        self.rs.lie_type
    }
}

/// χ(α) as a bitmask over the simple roots: bit γ is ⟨α, γ∨⟩ mod 2.
pub fn m_character(rs: &RootSystem, a: usize) -> u32 {
    let mut chi = 0;
    for (k, &s) in rs.simple.iter().enumerate() {
        if rs.pairing(a, s).rem_euclid(2) == 1 {
            chi |= 1 << k;
        }
    }
    chi
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MClass {
    /// Negative roots of the class, as indices into the root list.
    pub roots: Vec<usize>,
    pub chi: u32,
    pub even: bool,
}

/// Partition of Π⁻∖⟨Θ⟩⁻ into M-equivalence classes, ordered by the
/// lexicographically smallest root (in λ-coordinates) of each class.
pub fn m_classes(rs: &RootSystem, theta: &ThetaSet) -> Vec<MClass> {
    let mut by_chi: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for &a in &theta.complement_minus {
        by_chi.entry(m_character(rs, a)).or_default().push(a);
    }
    let mut classes: Vec<MClass> = by_chi
        .into_iter()
        .map(|(chi, mut roots)| {
            roots.sort_by(|&x, &y| rs.root(x).cmp(rs.root(y)));
            MClass {
                even: roots.len() % 2 == 0,
                roots,
                chi,
            }
        })
        .collect();
    classes.sort_by(|x, y| rs.root(x.roots[0]).cmp(rs.root(y.roots[0])));
    classes
}

/// All proper Θ ⊊ Σ (as simple-root positions) whose M-classes are all even.
/// Θ = Σ is left out: its flag is a point and the condition is vacuous.
pub fn m_parity_filter(rs: &RootSystem) -> Result<Vec<Vec<usize>>, IsoError> {
    if rs.rank() > 12 {
        return Err(IsoError::RankGuard(rs.rank()));
    }
    Ok(all_subsets(rs.rank())
        .into_iter()
        .filter(|m| m.len() < rs.rank())
        .filter(|m| {
            let t = theta_closure(rs, m);
            m_classes(rs, &t).iter().all(|c| c.even)
        })
        .collect())
}

/// Diagonal sign matrices of M in the standard matrix model.
pub fn m_sign_patterns(t: LieType) -> Vec<Vec<i64>> {
    let l = t.rank;
    let signs = |n: usize| -> Vec<Vec<i64>> {
        (0u32..(1 << n))
            .map(|mask| (0..n).map(|i| if mask & (1 << i) != 0 { -1 } else { 1 }).collect())
            .collect()
    };
    let even = |v: &Vec<i64>| v.iter().product::<i64>() == 1;
    match t.family {
        Family::A => signs(l + 1).into_iter().filter(even).collect(),
        Family::B => signs(l)
            .into_iter()
            .filter(even)
            .map(|g| {
                let mut d = vec![1];
                d.extend(g.iter());
                d.extend(g.iter());
                d
            })
            .collect(),
        Family::C => signs(l)
            .into_iter()
            .map(|g| g.iter().chain(g.iter()).copied().collect())
            .collect(),
        Family::D => signs(l)
            .into_iter()
            .filter(even)
            .map(|g| g.iter().chain(g.iter()).copied().collect())
            .collect(),
        Family::G => vec![],
    }
}

/// Partition of the given roots by the signs with which the diagonal M
/// matrices act on their root vectors in the realization.
pub fn matrix_m_partition(
    real: &MatrixRealization,
    roots: &[usize],
) -> Result<Vec<Vec<usize>>, ChevError> {
    let patterns = m_sign_patterns(real.lie_type);
    let mut groups: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for &a in roots {
        let x = &real.x[a];
        let mut key = Vec::with_capacity(patterns.len());
        for p in &patterns {
            // D X D^{-1} with D diagonal: entry (i,j) scaled by p_i p_j
            let mut sign = 0;
            for i in 0..x.rows() {
                for j in 0..x.cols() {
                    if !x[(i, j)].is_zero() {
                        let s = p[i] * p[j];
                        if sign == 0 {
                            sign = s;
                        } else if sign != s {
                            return Err(ChevError::Inconsistent(
                                "M element does not act by a sign on a root line".into(),
                            ));
                        }
                    }
                }
            }
            key.push(sign);
        }
        groups.entry(key).or_default().push(a);
    }
    let mut parts: Vec<Vec<usize>> = groups.into_values().collect();
    for p in parts.iter_mut() {
        p.sort_unstable();
    }
    parts.sort();
    Ok(parts)
}

/// Compare the χ-partition of Π⁻∖⟨Θ⟩⁻ with the one induced by matrix M.
pub fn m_matrix_crosscheck(sc: &StructureConstants, theta: &ThetaSet) -> Result<bool, ChevError> {
    let real = build_realization(sc)?;
    let mut chi_parts: Vec<Vec<usize>> = m_classes(&sc.rs, theta)
        .into_iter()
        .map(|c| {
            let mut r = c.roots;
            r.sort_unstable();
            r
        })
        .collect();
    chi_parts.sort();
    Ok(chi_parts == matrix_m_partition(&real, &theta.complement_minus)?)
}

#[derive(Debug, Clone)]
pub struct IsotropyModel {
    pub sc: Arc<StructureConstants>,
    pub theta: ThetaSet,
    pub model: Model,
    pub labels: Vec<String>,
    /// Root of each vector in the canonical root-line basis.
    pub line_roots: Vec<usize>,
    /// Columns: current basis vectors in canonical coordinates.
    pub to_canonical: QMatrix,
    pub ktheta_labels: Vec<String>,
    pub ktheta_gens: Vec<QMatrix>,
    pub m_gens: Vec<QMatrix>,
    /// bracket[i * n + j] = coordinates of the projected [b_i, b_j].
    pub bracket: Vec<Vec<Rational>>,
    pub classes: Vec<MClass>,
    /// Canonical coordinate indices of each class.
    pub class_coords: Vec<Vec<usize>>,
}

impl IsotropyModel {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn lie_type(&self) -> LieType {
        self.sc.rs.lie_type
    }

    pub fn rs(&self) -> &RootSystem {
        &self.sc.rs
    }

    pub fn all_gens(&self) -> Vec<&QMatrix> {
        self.m_gens.iter().chain(self.ktheta_gens.iter()).collect()
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> &[Rational] {
        &self.bracket[i * self.dim() + j]
    }

    /// Bilinear extension of the bracket table.
    pub fn bracket_vec(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let n = self.dim();
        let mut out = vec![Rational::zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let f = &x[i] * &y[j];
                for (k, v) in self.bracket_basis(i, j).iter().enumerate() {
                    if !v.is_zero() {
                        out[k] += &f * v;
                    }
                }
            }
        }
        out
    }

    /// Whether the current basis is a signed/rescaled permutation of root
    /// lines, so that M acts diagonally.
    pub fn m_is_diagonal(&self) -> bool {
        self.m_gens.iter().all(|g| g.is_diagonal())
    }

    /// Characters χ per current basis vector when the basis is made of root lines.
    pub fn basis_characters(&self) -> Option<Vec<u32>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let col = self.to_canonical.col(j);
            let nz: Vec<usize> = (0..n).filter(|&i| !col[i].is_zero()).collect();
            if nz.len() != 1 {
                return None;
            }
            out.push(m_character(self.rs(), self.line_roots[nz[0]]));
        }
        Some(out)
    }

    /// Re-express the model in a new basis (columns of `p`, in current coordinates).
    pub fn change_basis(&self, p: &QMatrix, labels: Vec<String>) -> Result<IsotropyModel, IsoError> {
        let n = self.dim();
        assert_eq!(labels.len(), n);
        let pinv = if n == 0 {
            QMatrix::zeros(0, 0)
        } else {
            p.inverse().ok_or(IsoError::Singular)?
        };
        let conj = |g: &QMatrix| &(&pinv * g) * p;
        let cols = p.columns();
        let mut bracket = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let b = self.bracket_vec(&cols[i], &cols[j]);
                bracket.push(pinv.mul_vec(&b));
            }
        }
        Ok(IsotropyModel {
            sc: self.sc.clone(),
            theta: self.theta.clone(),
            model: self.model,
            labels,
            line_roots: self.line_roots.clone(),
            to_canonical: &self.to_canonical * p,
            ktheta_labels: self.ktheta_labels.clone(),
            ktheta_gens: self.ktheta_gens.iter().map(conj).collect(),
            m_gens: self.m_gens.iter().map(conj).collect(),
            bracket,
            classes: self.classes.clone(),
            class_coords: self.class_coords.clone(),
        })
    }

    /// Seeded permutation of the basis; returns the model and the permutation
    /// (new position k holds old basis vector perm[k]).
    pub fn shuffled(&self, seed: u64) -> (IsotropyModel, Vec<usize>) {
        let n = self.dim();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut p = QMatrix::zeros(n, n);
        for (k, &old) in perm.iter().enumerate() {
            p[(old, k)] = Rational::one();
        }
        let labels = perm.iter().map(|&o| self.labels[o].clone()).collect();
        (self.change_basis(&p, labels).expect("permutation is invertible"), perm)
    }

    /// Coordinates of a basis vector of canonical index `c` in the current basis.
    pub fn canonical_vector(&self, c: usize) -> Vec<Rational> {
        let n = self.dim();
        let mut e = vec![Rational::zero(); n];
        e[c] = Rational::one();
        if self.to_canonical.is_identity() {
            return e;
        }
        crate::exactalg::matrix::coordinates(&self.to_canonical, &e).expect("invertible basis")
    }

    /// Current-basis coordinates of a matrix lying in the span of the module's
    /// root vectors (n± models only).
    pub fn matrix_coords(&self, real: &MatrixRealization, m: &QMatrix) -> Option<Vec<Rational>> {
        if self.model == Model::MTheta {
            return None;
        }
        let n = self.dim();
        let size = real.size * real.size;
        let cols: Vec<Vec<Rational>> = (0..n)
            .map(|j| {
                let v = self.to_canonical.col(j);
                let mut acc = QMatrix::zeros(real.size, real.size);
                for (i, c) in v.iter().enumerate() {
                    if !c.is_zero() {
                        acc = &acc + &real.x[self.line_roots[i]].scale(c);
                    }
                }
                acc.to_flat()
            })
            .collect();
        let a = QMatrix::from_cols(size, &cols);
        crate::exactalg::matrix::coordinates(&a, &m.to_flat())
    }
}

/// Element of g represented by canonical basis vector with root `a`.
fn module_element(sc: &StructureConstants, model: Model, a: usize) -> AbstractElement {
    match model {
        Model::MTheta => sc.compact(a),
        _ => sc.x(a),
    }
}

/// Coordinates of an abstract element on the module lines; also returns the
/// part that falls outside (for n± this must vanish, for m_θ it is the k_Θ part).
fn read_module(
    sc: &StructureConstants,
    model: Model,
    lines: &[usize],
    e: &AbstractElement,
) -> (Vec<Rational>, bool) {
    let mut coords = Vec::with_capacity(lines.len());
    let mut rest = e.clone();
    for &a in lines {
        let c = e.x[a].clone();
        if !c.is_zero() {
            rest = rest.sub(&module_element(sc, model, a).scale(&c));
        }
        coords.push(c);
    }
    (coords, rest.is_zero())
}

pub fn build_isotropy(sc: Arc<StructureConstants>, fs: &FlagSpec) -> Result<IsotropyModel, IsoError> {
    let rs = sc.rs.clone();
    let theta = fs.theta.clone();
    let classes = m_classes(&rs, &theta);
    let mut line_roots = Vec::new();
    let mut class_coords = Vec::new();
    for c in &classes {
        let mut coords = Vec::new();
        for &a in &c.roots {
            coords.push(line_roots.len());
            line_roots.push(match fs.model {
                Model::NMinus => a,
                _ => rs.neg(a),
            });
        }
        class_coords.push(coords);
    }
    let n = line_roots.len();
    let prefix = match fs.model {
        Model::MTheta => "A",
        _ => "X",
    };
    let labels: Vec<String> = line_roots
        .iter()
        .map(|&a| format!("{}[{}]", prefix, rs.text(a)))
        .collect();

    let mut ktheta_gens = Vec::new();
    let mut ktheta_labels = Vec::new();
    for &t in &theta.closure_plus {
        let at = sc.compact(t);
        let mut g = QMatrix::zeros(n, n);
        for (j, &a) in line_roots.iter().enumerate() {
            let img = sc.bracket(&at, &module_element(&sc, fs.model, a));
            let (coords, exact) = read_module(&sc, fs.model, &line_roots, &img);
            if !exact {
                return Err(IsoError::NotInvariant(format!(
                    "ad(A[{}]) on {}",
                    rs.text(t),
                    labels[j]
                )));
            }
            for (i, c) in coords.into_iter().enumerate() {
                g[(i, j)] = c;
            }
        }
        ktheta_gens.push(g);
        ktheta_labels.push(format!("A[{}]", rs.text(t)));
    }

    let chis: Vec<u32> = line_roots.iter().map(|&a| m_character(&rs, a)).collect();
    let mut m_gens: Vec<QMatrix> = Vec::new();
    for k in 0..rs.rank() {
        let d: Vec<Rational> = chis
            .iter()
            .map(|c| if c & (1 << k) != 0 { q(-1) } else { q(1) })
            .collect();
        let g = QMatrix::diagonal(&d);
        if !g.is_identity() && !m_gens.contains(&g) {
            m_gens.push(g);
        }
    }

    let elems: Vec<AbstractElement> = line_roots
        .iter()
        .map(|&a| module_element(&sc, fs.model, a))
        .collect();
    let mut bracket = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let b = sc.bracket(&elems[i], &elems[j]);
            let (coords, exact) = read_module(&sc, fs.model, &line_roots, &b);
            if !exact && fs.model != Model::MTheta {
                return Err(IsoError::NotInvariant(format!(
                    "[{}, {}] leaves the module",
                    labels[i], labels[j]
                )));
            }
            bracket.push(coords);
        }
    }

    Ok(IsotropyModel {
        sc,
        theta,
        model: fs.model,
        labels,
        line_roots,
        to_canonical: QMatrix::identity(n),
        ktheta_labels,
        ktheta_gens,
        m_gens,
        bracket,
        classes,
        class_coords,
    })
}

/// The m_θ model of a C_l flag in the u(l) basis A[k,j], S[k,j], S[j,j].
pub fn c_unitary_basis(im: &IsotropyModel, real: &MatrixRealization) -> Result<IsotropyModel, IsoError> {
    let l = im.rs().rank();
    assert_eq!(im.model, Model::MTheta);
    let n = im.dim();
    let mut p = QMatrix::zeros(n, n);
    let mut labels = Vec::with_capacity(n);
    for (j, &a) in im.line_roots.iter().enumerate() {
        let m = real.embed(&im.sc.compact(a));
        let (am, bm) = u_l_image(&m, l)?;
        let lab = u_l_labels(&am, &bm);
        if lab.len() != 1 {
            return Err(ChevError::Inconsistent("compact root element is not a single u(l) label".into()).into());
        }
        // u(l) basis element = A_α / coefficient
        p[(j, j)] = Rational::one() / &lab[0].1;
        labels.push(lab[0].0.clone());
    }
    im.change_basis(&p, labels)
}

/// Convenience: everything for one flag.
pub fn flag_model(
    sc: Arc<StructureConstants>,
    members: &[usize],
    model: Model,
) -> Result<IsotropyModel, IsoError> {
    let fs = FlagSpec::new(sc.rs.clone(), members, model);
    build_isotropy(sc, &fs)
}
