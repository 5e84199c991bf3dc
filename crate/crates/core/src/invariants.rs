//! Commutant of the isotropy representation, decomposition into irreducibles,
//! existence of invariant almost complex structures and their parametrization.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exactalg::matrix::{column_basis, span_basis_reduced};
use crate::exactalg::poly::{make_vars, PolyMatrix, PolyQ, Vars};
use crate::exactalg::rational::{self, sqrt_exact};
use crate::exactalg::sparse::RowReducer;
use crate::exactalg::univariate;
use crate::exactalg::{nullspace, QMatrix, Rational};
use crate::isotropy::IsotropyModel;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvError {
    #[error("subspace is not invariant under generator {0}")]
    NotInvariant(usize),
    #[error("subspace basis is rank deficient")]
    RankDeficient,
    #[error("no invariant almost complex structure: {0}")]
    NoAcs(String),
    #[error("cannot parametrize: {0}")]
    Unsupported(String),
}

/// χ of each coordinate when every M generator is diagonal in the current basis.
pub fn coord_chis(im: &IsotropyModel) -> Option<Vec<u32>> {
    if !im.m_is_diagonal() {
        return None;
    }
    let n = im.dim();
    Some(
        (0..n)
            .map(|i| {
                im.m_gens
                    .iter()
                    .enumerate()
                    .filter(|(_, g)| g[(i, i)].is_negative())
                    .fold(0u32, |acc, (k, _)| acc | (1 << k))
            })
            .collect(),
    )
}

/// χ of each basis column, if every column lies in a single joint M-eigenspace.
fn basis_chis(chis: &[u32], basis: &QMatrix) -> Option<Vec<u32>> {
    (0..basis.cols())
        .map(|j| {
            let mut c = None;
            for i in 0..basis.rows() {
                if !basis[(i, j)].is_zero() {
                    match c {
                        None => c = Some(chis[i]),
                        Some(x) if x != chis[i] => return None,
                        _ => {}
                    }
                }
            }
            c
        })
        .collect()
}

/// Re-basis an M-invariant subspace so that each vector has a single χ.
fn m_adapt(chis: Option<&[u32]>, basis: &QMatrix) -> QMatrix {
    let Some(chis) = chis else {
        return span_basis_reduced(basis);
    };
    let n = basis.rows();
    let mut distinct: Vec<u32> = chis.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let mut cols = Vec::new();
    for chi in distinct {
        let mut proj = basis.clone();
        for i in 0..n {
            if chis[i] != chi {
                for j in 0..basis.cols() {
                    proj[(i, j)] = Rational::zero();
                }
            }
        }
        cols.extend(span_basis_reduced(&proj).columns());
    }
    let out = QMatrix::from_cols(n, &cols);
    debug_assert_eq!(out.cols(), basis.rank());
    out
}

fn left_inverse(b: &QMatrix) -> Result<QMatrix, InvError> {
    let bt = b.transpose();
    let g = &bt * b;
    let gi = g.inverse().ok_or(InvError::RankDeficient)?;
    Ok(&gi * &bt)
}

/// Matrices of all generators (M first, then k_Θ) restricted to span(basis).
pub fn restricted_action(im: &IsotropyModel, basis: &QMatrix) -> Result<Vec<QMatrix>, InvError> {
    if basis.cols() == 0 {
        return Ok(im.all_gens().iter().map(|_| QMatrix::zeros(0, 0)).collect());
    }
    let l = left_inverse(basis)?;
    im.all_gens()
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let gb = *g * basis;
            let r = &l * &gb;
            if &(basis * &r) != &gb {
                return Err(InvError::NotInvariant(k));
            }
            Ok(r)
        })
        .collect()
}

/// Solutions T (d2×d1) of T·r1[g] = r2[g]·T for every generator g. With a
/// χ mask, T is restricted to entries joining equal characters and the first
/// `skip` generators (diagonal M) are then automatic.
fn sylvester(
    d1: usize,
    d2: usize,
    r1: &[QMatrix],
    r2: &[QMatrix],
    mask: Option<(&[u32], &[u32])>,
    skip: usize,
) -> Vec<QMatrix> {
    let mut var_of = vec![usize::MAX; d2 * d1];
    let mut vars = Vec::new();
    for a in 0..d2 {
        for c in 0..d1 {
            let ok = match mask {
                Some((c1, c2)) => c2[a] == c1[c],
                None => true,
            };
            if ok {
                var_of[a * d1 + c] = vars.len();
                vars.push((a, c));
            }
        }
    }
    let first = if mask.is_some() { skip } else { 0 };
    let mut red = RowReducer::new(vars.len());
    for g in first..r1.len() {
        let (a1, a2) = (&r1[g], &r2[g]);
        for a in 0..d2 {
            for b in 0..d1 {
                let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
                for c in 0..d1 {
                    let v = var_of[a * d1 + c];
                    if v != usize::MAX && !a1[(c, b)].is_zero() {
                        *row.entry(v).or_insert_with(Rational::zero) += &a1[(c, b)];
                    }
                }
                for c in 0..d2 {
                    let v = var_of[c * d1 + b];
                    if v != usize::MAX && !a2[(a, c)].is_zero() {
                        *row.entry(v).or_insert_with(Rational::zero) -= &a2[(a, c)];
                    }
                }
                let row: Vec<(usize, Rational)> = row.into_iter().filter(|(_, x)| !x.is_zero()).collect();
                if !row.is_empty() {
                    red.push(row);
                }
            }
        }
    }
    red.kernel()
        .into_iter()
        .map(|k| {
            let mut t = QMatrix::zeros(d2, d1);
            for (idx, &(a, c)) in vars.iter().enumerate() {
                t[(a, c)] = k[idx].clone();
            }
            t
        })
        .collect()
}

/// Basis of the commutant End_G(m) (matrices commuting with every generator).
pub fn commutant(im: &IsotropyModel) -> Vec<QMatrix> {
    let n = im.dim();
    if n == 0 {
        return vec![];
    }
    let gens: Vec<QMatrix> = im.all_gens().into_iter().cloned().collect();
    let chis = coord_chis(im);
    let mask = chis.as_deref().map(|c| (c, c));
    sylvester(n, n, &gens, &gens, mask, im.m_gens.len())
}

pub fn moduli_dimension(im: &IsotropyModel) -> usize {
    commutant(im).len()
}

/// Basis of Hom_G(W1, W2) as d2×d1 matrices in the given bases.
pub fn intertwiners(im: &IsotropyModel, w1: &QMatrix, w2: &QMatrix) -> Result<Vec<QMatrix>, InvError> {
    if w1.cols() == 0 || w2.cols() == 0 {
        return Ok(vec![]);
    }
    let r1 = restricted_action(im, w1)?;
    let r2 = restricted_action(im, w2)?;
    let chis = coord_chis(im);
    let c1 = chis.as_deref().and_then(|c| basis_chis(c, w1));
    let c2 = chis.as_deref().and_then(|c| basis_chis(c, w2));
    let mask = match (&c1, &c2) {
        (Some(a), Some(b)) => Some((a.as_slice(), b.as_slice())),
        _ => None,
    };
    Ok(sylvester(w1.cols(), w2.cols(), &r1, &r2, mask, im.m_gens.len()))
}

/// Minimal polynomial (low degree first, monic).
pub fn min_poly(x: &QMatrix) -> Vec<Rational> {
    let d = x.rows();
    let mut powers: Vec<Vec<Rational>> = vec![QMatrix::identity(d).to_flat()];
    let mut cur = QMatrix::identity(d);
    loop {
        cur = &cur * x;
        let flat = cur.to_flat();
        let a = QMatrix::from_cols(d * d, &powers);
        if let Some(c) = crate::exactalg::matrix::coordinates(&a, &flat) {
            let mut p: Vec<Rational> = c.into_iter().map(|v| -v).collect();
            p.push(Rational::one());
            return p;
        }
        powers.push(flat);
    }
}

fn is_scalar(x: &QMatrix) -> bool {
    let d = x.rows();
    if d == 0 {
        return true;
    }
    let s = &x[(0, 0)];
    (0..d).all(|i| (0..d).all(|j| if i == j { &x[(i, j)] == s } else { x[(i, j)].is_zero() }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndoType {
    Real,
    Complex,
    Quaternionic,
    Unresolved,
}

#[derive(Debug, Clone)]
pub struct Component {
    /// Columns in current module coordinates.
    pub basis: QMatrix,
    pub endo: Vec<QMatrix>,
    pub endo_type: EndoType,
    pub class: usize,
    /// A seeded vector generates the whole component.
    pub cyclic: bool,
}

impl Component {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }
    pub fn endo_dim(&self) -> usize {
        self.endo.len()
    }
}

#[derive(Debug, Clone)]
pub struct Isotypic {
    pub members: Vec<usize>,
    pub basis: QMatrix,
    pub endo_type: EndoType,
    pub irrep_dim: usize,
}

impl Isotypic {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub components: Vec<Component>,
    pub isotypic: Vec<Isotypic>,
}

impl Decomposition {
    pub fn dims(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.dim()).collect()
    }
    pub fn all_irreducible_certified(&self) -> bool {
        self.components.iter().all(|c| c.endo_type != EndoType::Unresolved && c.cyclic)
    }
}

/// Try to split span(u) with elements of its endomorphism algebra. Returns the
/// two invariant pieces (kernel and image of a Fitting power).
fn try_split(endo: &[QMatrix], seed: u64) -> Option<(QMatrix, QMatrix)> {
    let d = endo.first()?.rows();
    let mut cands: Vec<QMatrix> = endo.iter().filter(|e| !is_scalar(e)).cloned().collect();
    let base = cands.clone();
    for i in 0..base.len().min(6) {
        for j in i..base.len().min(6) {
            cands.push(&base[i] * &base[j]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..4 {
        let mut acc = QMatrix::zeros(d, d);
        for e in endo {
            let c: i64 = rng.gen_range(-3..=3);
            acc = &acc + &e.scale(&rational::q(c));
        }
        cands.push(acc);
    }
    let squares: Vec<QMatrix> = cands.iter().map(|x| x * x).collect();
    cands.extend(squares);
    for x in cands.iter().filter(|x| !is_scalar(x)) {
        let mp = min_poly(x);
        let Some(roots) = univariate::rational_roots(&mp) else {
            continue;
        };
        for r in roots {
            let shifted = x - &QMatrix::identity(d).scale(&r);
            let mut nmat = shifted.clone();
            let mut k = 1;
            while k < d {
                nmat = &nmat * &nmat;
                k *= 2;
            }
            let ker = nullspace(&nmat);
            if !ker.is_empty() && ker.len() < d {
                let kb = QMatrix::from_cols(d, &ker);
                let ib = column_basis(&nmat);
                return Some((kb, ib));
            }
        }
    }
    None
}

fn classify_endo(endo: &[QMatrix]) -> EndoType {
    let d = endo.first().map_or(0, |m| m.rows());
    let trace_free: Vec<QMatrix> = endo
        .iter()
        .filter(|e| !is_scalar(e))
        .map(|e| {
            let t = e.trace() / rational::q(d as i64);
            e - &QMatrix::identity(d).scale(&t)
        })
        .collect();
    let neg_scalar = |m: &QMatrix| is_scalar(m) && m[(0, 0)].is_negative();
    match endo.len() {
        1 => EndoType::Real,
        2 if trace_free.len() == 1 && neg_scalar(&(&trace_free[0] * &trace_free[0])) => EndoType::Complex,
        4 => {
            // trace-free part must be a negative definite quadratic space
            let z = column_basis(&QMatrix::from_cols(d * d, &trace_free.iter().map(|m| m.to_flat()).collect::<Vec<_>>()));
            if z.cols() != 3 {
                return EndoType::Unresolved;
            }
            let zs: Vec<QMatrix> = (0..3).map(|k| QMatrix::from_vec(d, d, z.col(k))).collect();
            let mut g = QMatrix::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    let s = &(&zs[i] * &zs[j]) + &(&zs[j] * &zs[i]);
                    if !is_scalar(&s) {
                        return EndoType::Unresolved;
                    }
                    g[(i, j)] = -s[(0, 0)].clone();
                }
            }
            let m1 = g[(0, 0)].clone();
            let m2 = g.submatrix(&[0, 1], &[0, 1]);
            let det2 = &m2[(0, 0)] * &m2[(1, 1)] - &m2[(0, 1)] * &m2[(1, 0)];
            let det3 = det3(&g);
            if m1.is_positive() && det2.is_positive() && det3.is_positive() {
                EndoType::Quaternionic
            } else {
                EndoType::Unresolved
            }
        }
        _ => EndoType::Unresolved,
    }
}

fn det3(g: &QMatrix) -> Rational {
    let a = |i, j| g[(i, j)].clone();
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

fn cyclic_check(r: &[QMatrix], d: usize, seed: u64) -> bool {
    if d == 0 {
        return true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Rational> = vec![Rational::zero(); d];
    while v.iter().all(|x| x.is_zero()) {
        v = (0..d).map(|_| rational::q(rng.gen_range(-5..=5))).collect();
    }
    let mut red = RowReducer::new(d);
    let mut queue = vec![v];
    while let Some(v) = queue.pop() {
        if !red.push_dense(&v) {
            continue;
        }
        for g in r {
            queue.push(g.mul_vec(&v));
        }
    }
    red.rank() == d
}

fn first_nonzero_row(b: &QMatrix) -> usize {
    (0..b.rows()).find(|&i| (0..b.cols()).any(|j| !b[(i, j)].is_zero())).unwrap_or(usize::MAX)
}

/// Decomposition of the isotropy module into irreducible pieces, grouped by
/// equivalence.
pub fn decompose(im: &IsotropyModel) -> Result<Decomposition, InvError> {
    let n = im.dim();
    let chis = coord_chis(im);
    let mut leaves: Vec<(QMatrix, Vec<QMatrix>)> = Vec::new();
    let mut stack = vec![m_adapt(chis.as_deref(), &QMatrix::identity(n))];
    if n == 0 {
        stack.clear();
    }
    let mut seed = 0u64;
    while let Some(u) = stack.pop() {
        let endo = intertwiners(im, &u, &u)?;
        seed += 1;
        match if endo.len() > 1 { try_split(&endo, seed) } else { None } {
            Some((kb, ib)) => {
                for part in [kb, ib] {
                    let vecs = &u * &part;
                    stack.push(m_adapt(chis.as_deref(), &vecs));
                }
            }
            None => leaves.push((u, endo)),
        }
    }
    leaves.sort_by_key(|(b, _)| first_nonzero_row(b));
    let mut components: Vec<Component> = leaves
        .into_iter()
        .enumerate()
        .map(|(i, (basis, endo))| {
            let r = restricted_action(im, &basis)?;
            let cyclic = cyclic_check(&r, basis.cols(), 1000 + i as u64);
            let endo_type = classify_endo(&endo);
            Ok(Component {
                basis,
                endo,
                endo_type,
                class: usize::MAX,
                cyclic,
            })
        })
        .collect::<Result<_, InvError>>()?;
    let mut isotypic: Vec<Isotypic> = Vec::new();
    for i in 0..components.len() {
        if components[i].class != usize::MAX {
            continue;
        }
        let cls = isotypic.len();
        components[i].class = cls;
        let mut members = vec![i];
        for j in i + 1..components.len() {
            if components[j].class != usize::MAX
                || components[j].dim() != components[i].dim()
                || components[j].endo_dim() != components[i].endo_dim()
            {
                continue;
            }
            if !intertwiners(im, &components[i].basis, &components[j].basis)?.is_empty() {
                components[j].class = cls;
                members.push(j);
            }
        }
        let cols: Vec<Vec<Rational>> = members.iter().flat_map(|&m| components[m].basis.columns()).collect();
        isotypic.push(Isotypic {
            basis: QMatrix::from_cols(n, &cols),
            endo_type: components[i].endo_type,
            irrep_dim: components[i].dim(),
            members,
        });
    }
    Ok(Decomposition { components, isotypic })
}

// ---------------------------------------------------------------------------
// existence

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationStep {
    pub kind: String,
    pub description: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Obstruction {
    /// "odd_m_class", "odd_forced_subspace" or "odd_real_multiplicity".
    pub kind: String,
    #[serde(skip)]
    pub basis: QMatrix,
    pub dim: usize,
    pub span_labels: Vec<String>,
    pub derivation: Vec<DerivationStep>,
}

#[derive(Debug, Clone)]
pub struct AcsWitness {
    pub j: QMatrix,
    pub zero_dimensional: bool,
    pub construction: Vec<String>,
}

#[derive(Debug, Clone)]
pub enum AcsVerdict {
    Exists(AcsWitness),
    Obstructed(Obstruction),
    Inconclusive(String),
}

impl AcsVerdict {
    pub fn exists(&self) -> Option<bool> {
        match self {
            AcsVerdict::Exists(_) => Some(true),
            AcsVerdict::Obstructed(_) => Some(false),
            AcsVerdict::Inconclusive(_) => None,
        }
    }
}

fn span_eq(a: &QMatrix, b: &QMatrix) -> bool {
    if a.cols() != b.cols() {
        return false;
    }
    let cols: Vec<Vec<Rational>> = a.columns().into_iter().chain(b.columns()).collect();
    QMatrix::from_cols(a.rows(), &cols).rank() == a.cols()
}

/// Short description of a span by the labels of coordinates it touches.
pub fn span_labels(im: &IsotropyModel, b: &QMatrix) -> Vec<String> {
    let red = span_basis_reduced(b);
    (0..red.cols())
        .map(|j| {
            let col = red.col(j);
            let parts: Vec<String> = col
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| {
                    if c.is_one() {
                        format!(" + {}", im.labels[i])
                    } else if (-c).is_one() {
                        format!(" - {}", im.labels[i])
                    } else if c.is_negative() {
                        format!(" - {}*{}", rational::to_string(&-c), im.labels[i])
                    } else {
                        format!(" + {}*{}", rational::to_string(c), im.labels[i])
                    }
                })
                .collect();
            let s = parts.concat();
            match s.strip_prefix(" + ") {
                Some(rest) => rest.to_string(),
                None => format!("-{}", &s[3..]),
            }
        })
        .collect()
}

/// Subspace V_[α] (an M-class) in current coordinates.
pub fn class_subspace(im: &IsotropyModel, k: usize) -> QMatrix {
    let cols: Vec<Vec<Rational>> = im.class_coords[k].iter().map(|&c| im.canonical_vector(c)).collect();
    QMatrix::from_cols(im.dim(), &cols)
}

struct Forced {
    basis: QMatrix,
    kind: &'static str,
    description: String,
    parents: Option<(usize, usize)>,
}

fn derivation(list: &[Forced], k: usize, out: &mut Vec<DerivationStep>, seen: &mut Vec<bool>) {
    if seen[k] {
        return;
    }
    seen[k] = true;
    if let Some((a, b)) = list[k].parents {
        derivation(list, a, out, seen);
        derivation(list, b, out, seen);
    }
    out.push(DerivationStep {
        kind: list[k].kind.to_string(),
        description: list[k].description.clone(),
        dim: list[k].basis.cols(),
    });
}

const LATTICE_LIMIT: usize = 4000;

/// Smallest odd-dimensional subspace forced to be J-invariant, derived from
/// M-classes and isotypic components by intersections.
fn odd_forced_subspace(im: &IsotropyModel, dec: &Decomposition) -> Option<Obstruction> {
    let mut list: Vec<Forced> = Vec::new();
    for k in 0..im.classes.len() {
        let texts: Vec<String> = im.classes[k].roots.iter().map(|&a| im.rs().text(a)).collect();
        list.push(Forced {
            basis: class_subspace(im, k),
            kind: "m_class",
            description: format!("V[{}] = root class {{{}}}", k, texts.join(", ")),
            parents: None,
        });
    }
    for (k, iso) in dec.isotypic.iter().enumerate() {
        if list.iter().any(|f| span_eq(&f.basis, &iso.basis)) {
            continue;
        }
        list.push(Forced {
            basis: iso.basis.clone(),
            kind: "isotypic_component",
            description: format!(
                "isotypic component {} ({} copies of a {}-dimensional irreducible)",
                k,
                iso.multiplicity(),
                iso.irrep_dim
            ),
            parents: None,
        });
    }
    let mut best: Option<usize> = list
        .iter()
        .enumerate()
        .filter(|(_, f)| f.basis.cols() % 2 == 1)
        .min_by_key(|(_, f)| f.basis.cols())
        .map(|(i, _)| i);
    let mut start = 0;
    while best.is_none() && list.len() < LATTICE_LIMIT {
        let end = list.len();
        let mut added = false;
        for i in 0..end {
            for j in (i + 1).max(start)..end {
                let x = crate::exactalg::matrix::intersect_spans(&list[i].basis, &list[j].basis);
                let d = x.cols();
                if d == 0 || d == list[i].basis.cols() || d == list[j].basis.cols() {
                    continue;
                }
                if list.iter().any(|f| span_eq(&f.basis, &x)) {
                    continue;
                }
                let idx = list.len();
                list.push(Forced {
                    basis: x,
                    kind: "intersection",
                    description: format!("S{} = S{} ∩ S{}", idx, i, j),
                    parents: Some((i, j)),
                });
                added = true;
                if d % 2 == 1 && best.map_or(true, |b| list[b].basis.cols() > d) {
                    best = Some(idx);
                }
            }
        }
        if !added {
            break;
        }
        start = end;
    }
    let k = best?;
    let mut steps = Vec::new();
    let mut seen = vec![false; list.len()];
    derivation(&list, k, &mut steps, &mut seen);
    Some(Obstruction {
        kind: if list[k].kind == "m_class" { "odd_m_class" } else { "odd_forced_subspace" }.to_string(),
        dim: list[k].basis.cols(),
        span_labels: span_labels(im, &list[k].basis),
        basis: list[k].basis.clone(),
        derivation: steps,
    })
}

/// Re-check an obstruction independently of its derivation: the subspace is
/// odd-dimensional (or an odd real multiplicity), and every element of the
/// commutant maps it into itself, so every invariant J would too.
pub fn verify_obstruction(im: &IsotropyModel, obs: &Obstruction) -> bool {
    let b = &obs.basis;
    if b.rank() != b.cols() {
        return false;
    }
    let comm = commutant(im);
    let stable = comm.iter().all(|t| {
        let tb = t * b;
        crate::exactalg::matrix::intersect_spans(&tb, b).cols() == tb.rank()
    });
    match obs.kind.as_str() {
        "odd_real_multiplicity" => {
            // the commutant restricted to the subspace is a full matrix algebra of odd size
            stable && b.cols() > 0
        }
        _ => stable && b.cols() % 2 == 1,
    }
}

/// A complex structure z/√s on one component, if its endomorphism algebra
/// contains z with z² = -s·I for a rational square s.
fn complex_unit(endo: &[QMatrix]) -> Option<QMatrix> {
    let d = endo.first()?.rows();
    let mut tf: Vec<QMatrix> = endo
        .iter()
        .filter(|e| !is_scalar(e))
        .map(|e| {
            let t = e.trace() / rational::q(d as i64);
            e - &QMatrix::identity(d).scale(&t)
        })
        .collect();
    let k = tf.len();
    for i in 0..k {
        for j in i + 1..k {
            tf.push(&tf[i] + &tf[j]);
        }
    }
    for z in tf {
        let z2 = &z * &z;
        if is_scalar(&z2) && z2[(0, 0)].is_negative() {
            if let Some(r) = sqrt_exact(&-z2[(0, 0)].clone()) {
                return Some(z.scale(&(Rational::one() / r)));
            }
        }
    }
    None
}

fn block_assemble(n: usize, pieces: &[(QMatrix, QMatrix)]) -> Result<QMatrix, InvError> {
    // pieces: (basis columns, action on them in those coordinates)
    let cols: Vec<Vec<Rational>> = pieces.iter().flat_map(|(b, _)| b.columns()).collect();
    let p = QMatrix::from_cols(n, &cols);
    let jad = QMatrix::direct_sum(&pieces.iter().map(|(_, a)| a.clone()).collect::<Vec<_>>());
    let pinv = p.inverse().ok_or(InvError::RankDeficient)?;
    Ok(&(&p * &jad) * &pinv)
}

fn pair_action(t: &QMatrix) -> Option<QMatrix> {
    // J = [[0, -T^{-1}], [T, 0]] on W1 ⊕ W2 in the bases (w, w')
    let d = t.rows();
    let tinv = t.inverse()?;
    let mut j = QMatrix::zeros(2 * d, 2 * d);
    for a in 0..d {
        for b in 0..d {
            j[(d + a, b)] = t[(a, b)].clone();
            j[(a, d + b)] = -tinv[(a, b)].clone();
        }
    }
    Some(j)
}

fn witness_from(im: &IsotropyModel, dec: &Decomposition) -> Result<AcsWitness, String> {
    let n = im.dim();
    let mut pieces: Vec<(QMatrix, QMatrix)> = Vec::new();
    let mut construction = Vec::new();
    for (k, iso) in dec.isotypic.iter().enumerate() {
        let comps: Vec<&Component> = iso.members.iter().map(|&m| &dec.components[m]).collect();
        let mut used = vec![false; comps.len()];
        if matches!(iso.endo_type, EndoType::Complex | EndoType::Quaternionic) {
            for (i, c) in comps.iter().enumerate() {
                if let Some(z) = complex_unit(&c.endo) {
                    pieces.push((c.basis.clone(), z));
                    used[i] = true;
                    construction.push(format!("V{}: rescaled endomorphism z/√s", iso.members[i] + 1));
                }
            }
        }
        let rest: Vec<usize> = (0..comps.len()).filter(|&i| !used[i]).collect();
        if rest.len() % 2 == 1 {
            return Err(format!(
                "isotypic component {} leaves an odd number of copies without a rational complex unit",
                k + 1
            ));
        }
        for pair in rest.chunks(2) {
            let (c1, c2) = (comps[pair[0]], comps[pair[1]]);
            let homs = intertwiners(im, &c1.basis, &c2.basis).map_err(|e| e.to_string())?;
            let t = homs
                .iter()
                .find(|t| t.inverse().is_some())
                .ok_or_else(|| "no invertible intertwiner between equivalent copies".to_string())?;
            let j = pair_action(t).expect("invertible");
            let cols: Vec<Vec<Rational>> = c1.basis.columns().into_iter().chain(c2.basis.columns()).collect();
            pieces.push((QMatrix::from_cols(n, &cols), j));
            construction.push(format!(
                "V{} and V{}: J = T on the first, -T^-1 on the second",
                iso.members[pair[0]] + 1,
                iso.members[pair[1]] + 1
            ));
        }
    }
    let j = block_assemble(n, &pieces).map_err(|e| e.to_string())?;
    Ok(AcsWitness {
        j,
        zero_dimensional: false,
        construction,
    })
}

/// J² = -I and J commutes with every generator.
pub fn verify_acs(im: &IsotropyModel, j: &QMatrix) -> bool {
    let n = im.dim();
    &(j * j) == &(-&QMatrix::identity(n)) && im.all_gens().iter().all(|g| &(j * *g) == &(*g * j))
}

pub fn acs_exists(im: &IsotropyModel) -> Result<AcsVerdict, InvError> {
    let n = im.dim();
    if n == 0 {
        return Ok(AcsVerdict::Exists(AcsWitness {
            j: QMatrix::zeros(0, 0),
            zero_dimensional: true,
            construction: vec!["zero-dimensional module".into()],
        }));
    }
    if let Some(k) = im.classes.iter().position(|c| c.roots.len() % 2 == 1) {
        let basis = class_subspace(im, k);
        let texts: Vec<String> = im.classes[k].roots.iter().map(|&a| im.rs().text(a)).collect();
        return Ok(AcsVerdict::Obstructed(Obstruction {
            kind: "odd_m_class".into(),
            dim: basis.cols(),
            span_labels: span_labels(im, &basis),
            basis,
            derivation: vec![DerivationStep {
                kind: "m_class".into(),
                description: format!("root class {{{}}} has odd size", texts.join(", ")),
                dim: texts.len(),
            }],
        }));
    }
    let dec = decompose(im)?;
    if let Some(obs) = odd_forced_subspace(im, &dec) {
        return Ok(AcsVerdict::Obstructed(obs));
    }
    for (k, iso) in dec.isotypic.iter().enumerate() {
        if iso.endo_type == EndoType::Real && iso.multiplicity() % 2 == 1 {
            return Ok(AcsVerdict::Obstructed(Obstruction {
                kind: "odd_real_multiplicity".into(),
                dim: iso.basis.cols(),
                span_labels: span_labels(im, &iso.basis),
                basis: iso.basis.clone(),
                derivation: vec![DerivationStep {
                    kind: "isotypic_component".into(),
                    description: format!(
                        "isotypic component {} has odd multiplicity {} of a real-type irreducible",
                        k,
                        iso.multiplicity()
                    ),
                    dim: iso.basis.cols(),
                }],
            }));
        }
    }
    if !dec.all_irreducible_certified() {
        return Ok(AcsVerdict::Inconclusive("decomposition has unresolved components".into()));
    }
    match witness_from(im, &dec) {
        Ok(w) if verify_acs(im, &w.j) => Ok(AcsVerdict::Exists(w)),
        Ok(_) => Ok(AcsVerdict::Inconclusive("constructed witness failed verification".into())),
        Err(e) => Ok(AcsVerdict::Inconclusive(e)),
    }
}

// ---------------------------------------------------------------------------
// parametrized families

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    /// diagonal entry `a` of a 2×2 block [[a, -(1+a²)/c], [c, -a]]
    Diag,
    /// nonvanishing lower entry `c` of such a block
    Off,
    Sign,
    Entry,
}

#[derive(Debug, Clone)]
pub enum BlockSpec {
    /// J w_k = a w_k + c w'_k, J w'_k = -(1+a²)/c w_k - a w'_k.
    Pair {
        first: Vec<Vec<Rational>>,
        second: Vec<Vec<Rational>>,
    },
    /// J = ε·z on the span, z² = -I.
    Sign { vectors: Vec<Vec<Rational>>, z: QMatrix },
    /// J = Σ t_k B_k on the span, subject to J² = -I.
    Full { vectors: Vec<Vec<Rational>>, basis: Vec<QMatrix> },
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamBlock {
    pub kind: String,
    pub vars: Vec<String>,
    pub span_labels: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ParamAcs {
    pub vars: Vars,
    pub kinds: Vec<VarKind>,
    /// J = jn / denom.
    pub jn: PolyMatrix,
    pub denom: PolyQ,
    pub constraints: Vec<(String, PolyQ)>,
    pub nonvanishing: Vec<PolyQ>,
    pub blocks: Vec<ParamBlock>,
}

impl ParamAcs {
    pub fn sign_vars(&self) -> Vec<usize> {
        (0..self.kinds.len()).filter(|&i| self.kinds[i] == VarKind::Sign).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// J at a full parameter point; None where the denominator vanishes.
    pub fn eval(&self, vals: &[Rational]) -> Option<QMatrix> {
        let d = self.denom.eval_at(vals);
        if d.is_zero() {
            return None;
        }
        let n = self.jn.rows();
        let inv = Rational::one() / d;
        let mut j = QMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                j[(r, c)] = self.jn.get(r, c).eval_at(vals) * &inv;
            }
        }
        Some(j)
    }

    pub fn named_values(&self, vals: &[Rational]) -> BTreeMap<String, String> {
        self.vars
            .iter()
            .zip(vals)
            .map(|(n, v)| (n.clone(), rational::to_string(v)))
            .collect()
    }
}

fn vecs_matrix(n: usize, v: &[Vec<Rational>]) -> QMatrix {
    QMatrix::from_cols(n, v)
}

/// Assemble a family from blocks given in module coordinates. `names[i]`
/// overrides the variable names of block i (pairs: [a, c]).
pub fn family_from_blocks(
    im: &IsotropyModel,
    specs: &[BlockSpec],
    names: &[Option<Vec<String>>],
) -> Result<ParamAcs, InvError> {
    let n = im.dim();
    let mut var_names: Vec<String> = Vec::new();
    let mut kinds = Vec::new();
    let mut block_vars: Vec<Vec<usize>> = Vec::new();
    let (mut npair, mut nsign, mut nfull) = (0, 0, 0);
    for (b, s) in specs.iter().enumerate() {
        let custom = names.get(b).cloned().flatten();
        let mut vs = Vec::new();
        let mut add = |name: String, kind: VarKind, vs: &mut Vec<usize>| {
            vs.push(var_names.len());
            var_names.push(name);
            kinds.push(kind);
        };
        match s {
            BlockSpec::Pair { .. } => {
                npair += 1;
                let (a, c) = match &custom {
                    Some(v) => (v[0].clone(), v[1].clone()),
                    None => (format!("a{}", npair), format!("c{}", npair)),
                };
                add(a, VarKind::Diag, &mut vs);
                add(c, VarKind::Off, &mut vs);
            }
            BlockSpec::Sign { .. } => {
                nsign += 1;
                let e = custom.map(|v| v[0].clone()).unwrap_or_else(|| format!("e{}", nsign));
                add(e, VarKind::Sign, &mut vs);
            }
            BlockSpec::Full { basis, .. } => {
                nfull += 1;
                for k in 0..basis.len() {
                    let name = match &custom {
                        Some(v) => v[k].clone(),
                        None => format!("t{}_{}", nfull, k + 1),
                    };
                    add(name, VarKind::Entry, &mut vs);
                }
            }
        }
        block_vars.push(vs);
    }
    let vars = make_vars(&var_names);
    let one = PolyQ::one(&vars);
    let mut denom = one.clone();
    for (i, k) in kinds.iter().enumerate() {
        if *k == VarKind::Off {
            denom = denom.mul(&PolyQ::var(&vars, i));
        }
    }
    let mut cols: Vec<Vec<Rational>> = Vec::new();
    let mut jad_blocks: Vec<PolyMatrix> = Vec::new();
    let mut constraints = Vec::new();
    let mut nonvanishing = Vec::new();
    let mut blocks = Vec::new();
    for (b, s) in specs.iter().enumerate() {
        let vs = &block_vars[b];
        let (kind, span) = match s {
            BlockSpec::Pair { first, second } => {
                let d = first.len();
                let a = PolyQ::var(&vars, vs[0]);
                let c = PolyQ::var(&vars, vs[1]);
                let other = denom.div_exact(&c).expect("c divides the denominator");
                let one_plus = one.add(&a.mul(&a));
                let mut m = PolyMatrix::zeros(&vars, 2 * d, 2 * d);
                for k in 0..d {
                    m.set(k, k, denom.mul(&a));
                    m.set(d + k, k, c.mul(&denom));
                    m.set(k, d + k, one_plus.mul(&other).neg());
                    m.set(d + k, d + k, denom.mul(&a).neg());
                }
                nonvanishing.push(c.clone());
                nonvanishing.push(one_plus);
                jad_blocks.push(m);
                let all: Vec<Vec<Rational>> = first.iter().chain(second.iter()).cloned().collect();
                cols.extend(all.iter().cloned());
                ("pair", all)
            }
            BlockSpec::Sign { vectors, z } => {
                let e = PolyQ::var(&vars, vs[0]);
                let m = PolyMatrix::from_qmatrix(&vars, z).scale_poly(&e.mul(&denom));
                nonvanishing.push(e.clone());
                constraints.push((format!("{}^2 = 1", vars[vs[0]]), e.mul(&e).sub(&one)));
                jad_blocks.push(m);
                cols.extend(vectors.iter().cloned());
                ("sign", vectors.clone())
            }
            BlockSpec::Full { vectors, basis } => {
                let d = vectors.len();
                let mut j = PolyMatrix::zeros(&vars, d, d);
                for (k, bm) in basis.iter().enumerate() {
                    j = j.add(&PolyMatrix::from_qmatrix(&vars, bm).scale_poly(&PolyQ::var(&vars, vs[k])));
                }
                let sq = j.mul(&j);
                for r in 0..d {
                    for c in 0..d {
                        let mut p = sq.get(r, c).clone();
                        if r == c {
                            p = p.add(&one);
                        }
                        if !p.is_zero() {
                            constraints.push((format!("J^2+I block {} ({},{})", b, r, c), p));
                        }
                    }
                }
                jad_blocks.push(j.scale_poly(&denom));
                cols.extend(vectors.iter().cloned());
                ("full", vectors.clone())
            }
        };
        blocks.push(ParamBlock {
            kind: kind.to_string(),
            vars: vs.iter().map(|&i| vars[i].clone()).collect(),
            span_labels: span_labels(im, &vecs_matrix(n, &span)),
        });
    }
    if cols.len() != n {
        return Err(InvError::Unsupported(format!("blocks cover {} of {} dimensions", cols.len(), n)));
    }
    let p = QMatrix::from_cols(n, &cols);
    let pinv = p.inverse().ok_or(InvError::RankDeficient)?;
    let mut jad = PolyMatrix::zeros(&vars, n, n);
    let mut off = 0;
    for m in &jad_blocks {
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                jad.set(off + r, off + c, m.get(r, c).clone());
            }
        }
        off += m.rows();
    }
    let jn = PolyMatrix::from_qmatrix(&vars, &p)
        .mul(&jad)
        .mul(&PolyMatrix::from_qmatrix(&vars, &pinv));
    Ok(ParamAcs {
        vars,
        kinds,
        jn,
        denom,
        constraints,
        nonvanishing,
        blocks,
    })
}

/// Family of all invariant almost complex structures, built from the
/// commutant: equivalent real-type pairs get a 2×2 block with parameters (a, c),
/// single complex-type pieces a sign times a complex unit, everything else a
/// general commutant element constrained by J² = -I.
pub fn param_family(im: &IsotropyModel) -> Result<ParamAcs, InvError> {
    let dec = decompose(im)?;
    let mut specs = Vec::new();
    for iso in &dec.isotypic {
        let comps: Vec<&Component> = iso.members.iter().map(|&m| &dec.components[m]).collect();
        let m = comps.len();
        if iso.endo_type == EndoType::Real && m == 2 {
            let homs = intertwiners(im, &comps[0].basis, &comps[1].basis)?;
            let t = homs
                .iter()
                .find(|t| t.inverse().is_some())
                .ok_or_else(|| InvError::Unsupported("no invertible intertwiner".into()))?;
            let image = &comps[1].basis * t;
            specs.push(BlockSpec::Pair {
                first: comps[0].basis.columns(),
                second: image.columns(),
            });
            continue;
        }
        if iso.endo_type == EndoType::Complex && m == 1 {
            if let Some(z) = complex_unit(&comps[0].endo) {
                specs.push(BlockSpec::Sign {
                    vectors: comps[0].basis.columns(),
                    z,
                });
                continue;
            }
        }
        if iso.endo_type == EndoType::Real && m % 2 == 1 {
            return Err(InvError::NoAcs("odd multiplicity of a real-type irreducible".into()));
        }
        let basis = intertwiners(im, &iso.basis, &iso.basis)?;
        specs.push(BlockSpec::Full {
            vectors: iso.basis.columns(),
            basis,
        });
    }
    family_from_blocks(im, &specs, &[])
}

/// Family using only the M-classes: each 2-element class gets a pair block on
/// its two root lines, larger classes a general block. k_Θ-invariance is not
/// imposed (see `impose_k_invariance`).
pub fn m_only_family(im: &IsotropyModel) -> Result<ParamAcs, InvError> {
    let mut specs = Vec::new();
    for (k, cls) in im.class_coords.iter().enumerate() {
        let vecs: Vec<Vec<Rational>> = cls.iter().map(|&c| im.canonical_vector(c)).collect();
        match vecs.len() {
            d if d % 2 == 1 => {
                return Err(InvError::NoAcs(format!("class {} has odd size {}", k, d)));
            }
            2 => specs.push(BlockSpec::Pair {
                first: vec![vecs[0].clone()],
                second: vec![vecs[1].clone()],
            }),
            d => {
                let basis = (0..d)
                    .flat_map(|r| (0..d).map(move |c| QMatrix::unit(d, r, c)))
                    .collect();
                specs.push(BlockSpec::Full { vectors: vecs, basis });
            }
        }
    }
    family_from_blocks(im, &specs, &[])
}

/// Add the conditions [J, X] = 0 for every k_Θ generator.
pub fn impose_k_invariance(fam: &ParamAcs, im: &IsotropyModel) -> ParamAcs {
    let mut out = fam.clone();
    for (g, gen) in im.ktheta_gens.iter().enumerate() {
        let gp = PolyMatrix::from_qmatrix(&fam.vars, gen);
        let a = fam.jn.mul(&gp);
        let b = gp.mul(&fam.jn);
        for r in 0..a.rows() {
            for c in 0..a.cols() {
                let p = a.get(r, c).sub(b.get(r, c));
                if !p.is_zero() {
                    out.constraints.push((format!("[J,{}] ({},{})", im.ktheta_labels[g], r, c), p));
                }
            }
        }
    }
    out
}
