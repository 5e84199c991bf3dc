//! Chevalley basis structure constants, abstract brackets and matrix
//! realizations of the split classical algebras.

use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exactalg::{q, QMatrix, Rational};
use crate::rootsys::{Family, LieType, RootSystem};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChevError {
    #[error("no matrix realization for {0}")]
    NoMatrixModel(LieType),
    #[error("structure constant consistency failure: {0}")]
    Inconsistent(String),
    #[error("matrix is not in the compact subalgebra of sp(l)")]
    NotCompact,
}

/// Sign choices on extraspecial pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignConvention {
    /// All extraspecial constants positive.
    Positive,
    /// Positive except at the extraspecial pair of the given positive root.
    Flip(usize),
}

/// Chevalley constants N_{α,β} for all pairs of roots.
#[derive(Debug, Clone)]
pub struct StructureConstants {
    pub rs: Arc<RootSystem>,
    pub convention: SignConvention,
    n: Vec<i64>,
    /// Extraspecial pair (α₀, β₀) for each non-simple positive root.
    pub extraspecial: Vec<Option<(usize, usize)>>,
    /// Coroot of each root in the basis of simple coroots.
    coroots: Vec<Vec<Rational>>,
}

/// Element of the Lie algebra: Cartan part in simple coroots plus root vector
/// coefficients indexed like the root list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AbstractElement {
    pub h: Vec<Rational>,
    pub x: Vec<Rational>,
}

impl AbstractElement {
    pub fn zero(rank: usize, nroots: usize) -> Self {
        AbstractElement {
            h: vec![Rational::zero(); rank],
            x: vec![Rational::zero(); nroots],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.h.iter().all(|v| v.is_zero()) && self.x.iter().all(|v| v.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        AbstractElement {
            h: self.h.iter().zip(&o.h).map(|(a, b)| a + b).collect(),
            x: self.x.iter().zip(&o.x).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        AbstractElement {
            h: self.h.iter().zip(&o.h).map(|(a, b)| a - b).collect(),
            x: self.x.iter().zip(&o.x).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        AbstractElement {
            h: self.h.iter().map(|a| a * s).collect(),
            x: self.x.iter().map(|a| a * s).collect(),
        }
    }

    /// Flattened coordinates: Cartan part first, then root vectors.
    pub fn coords(&self) -> Vec<Rational> {
        self.h.iter().chain(self.x.iter()).cloned().collect()
    }
}

fn coroot_coeffs(rs: &RootSystem, a: usize) -> Vec<Rational> {
    let na = rs.norm2(a);
    rs.simple_coeffs(a)
        .iter()
        .zip(&rs.simple)
        .map(|(&c, &s)| q(c) * rs.norm2(s) / &na)
        .collect()
}

struct Builder<'a> {
    rs: &'a RootSystem,
    r: usize,
    /// Only positive/positive entries are filled during construction.
    pos: Vec<i64>,
}

impl<'a> Builder<'a> {
    fn idx(&self, a: usize, b: usize) -> usize {
        a * self.r + b
    }

    /// N_{a,b} for arbitrary roots once all positive pairs of smaller
    /// height are known. Returns 0 if a+b is not a root.
    fn get(&self, a: usize, b: usize) -> Rational {
        let rs = self.rs;
        let Some(s) = rs.sum_index(a, b) else {
            return Rational::zero();
        };
        let pa = rs.is_positive(a);
        let pb = rs.is_positive(b);
        if pa && pb {
            return q(self.pos[self.idx(a, b)]);
        }
        if !pa && !pb {
            return -q(self.pos[self.idx(rs.neg(a), rs.neg(b))]);
        }
        // a + b + c = 0
        let c = rs.neg(s);
        let pc = rs.is_positive(c);
        let positives = [pa, pb, pc].iter().filter(|&&x| x).count();
        if positives == 1 {
            return -self.get(rs.neg(a), rs.neg(b));
        }
        // exactly two positive among a, b, c; a and b have mixed signs
        if pb && pc {
            // N_{a,b}/(c,c) = N_{b,c}/(a,a)
            rs.norm2(c) / rs.norm2(a) * self.get(b, c)
        } else {
            // N_{a,b}/(c,c) = N_{c,a}/(b,b)
            rs.norm2(c) / rs.norm2(b) * self.get(c, a)
        }
    }
}

fn to_int(x: &Rational, what: &str) -> Result<i64, ChevError> {
    if !x.is_integer() {
        return Err(ChevError::Inconsistent(format!("non-integral constant {} for {}", x, what)));
    }
    Ok(x.to_integer().to_i64().unwrap())
}

pub fn generate_constants(rs: Arc<RootSystem>) -> Result<StructureConstants, ChevError> {
    generate_constants_with(rs, SignConvention::Positive)
}

pub fn generate_constants_with(
    rs: Arc<RootSystem>,
    convention: SignConvention,
) -> Result<StructureConstants, ChevError> {
    let r = rs.num_roots();
    let mut b = Builder {
        rs: &rs,
        r,
        pos: vec![0; r * r],
    };
    let mut extraspecial = vec![None; rs.num_positive()];
    for xi in rs.positive() {
        if rs.height(xi) < 2 {
            continue;
        }
        let mut pairs = Vec::new();
        for a in rs.positive() {
            let diff = rs.root(xi).sub(rs.root(a));
            if let Some(bb) = rs.index_of(&diff) {
                if rs.is_positive(bb) && a < bb {
                    pairs.push((a, bb));
                }
            }
        }
        let (a0, b0) = pairs[0];
        extraspecial[xi] = Some((a0, b0));
        let sign = match convention {
            SignConvention::Flip(f) if f == xi => -1,
            _ => 1,
        };
        let n0 = sign * (rs.string_down(a0, b0) + 1);
        let i = b.idx(a0, b0);
        b.pos[i] = n0;
        let i = b.idx(b0, a0);
        b.pos[i] = -n0;
        let xi2 = rs.norm2(xi);
        for &(a, bb) in &pairs[1..] {
            let mut acc = Rational::zero();
            let ma0 = rs.neg(a0);
            let mb0 = rs.neg(b0);
            if let Some(d) = rs.sum_index(bb, ma0) {
                acc += b.get(bb, ma0) * b.get(a, mb0) / rs.norm2(d);
            }
            if let Some(d) = rs.sum_index(a, ma0) {
                acc += b.get(ma0, a) * b.get(bb, mb0) / rs.norm2(d);
            }
            let val = &xi2 / q(n0) * acc;
            let v = to_int(&val, &format!("({}, {})", rs.text(a), rs.text(bb)))?;
            if v.abs() != rs.string_down(a, bb) + 1 {
                return Err(ChevError::Inconsistent(format!(
                    "|N| = {} for ({}, {})",
                    v,
                    rs.text(a),
                    rs.text(bb)
                )));
            }
            let i = b.idx(a, bb);
            b.pos[i] = v;
            let i = b.idx(bb, a);
            b.pos[i] = -v;
        }
    }
    let mut n = vec![0i64; r * r];
    for a in 0..r {
        for c in 0..r {
            if rs.sum_index(a, c).is_some() {
                n[a * r + c] = to_int(&b.get(a, c), "mixed pair")?;
            }
        }
    }
    let coroots = (0..r).map(|a| coroot_coeffs(&rs, a)).collect();
    Ok(StructureConstants {
        rs,
        convention,
        n,
        extraspecial,
        coroots,
    })
}

impl StructureConstants {
    pub fn rank(&self) -> usize {
        self.rs.rank()
    }

    pub fn nroots(&self) -> usize {
        self.rs.num_roots()
    }

    /// Dimension of the Lie algebra.
    pub fn dim(&self) -> usize {
        self.rank() + self.nroots()
    }

    /// N_{α,β}; zero when α+β is not a root.
    pub fn n(&self, a: usize, b: usize) -> i64 {
        self.n[a * self.nroots() + b]
    }

    pub fn coroot(&self, a: usize) -> &[Rational] {
        &self.coroots[a]
    }

    pub fn convention_id(&self) -> String {
        match self.convention {
            SignConvention::Positive => "chevalley-extraspecial-positive".to_string(),
            SignConvention::Flip(r) => {
                format!("chevalley-extraspecial-flip[{}]", self.rs.text(r))
            }
        }
    }

    pub fn zero(&self) -> AbstractElement {
        AbstractElement::zero(self.rank(), self.nroots())
    }

    /// Root vector X_α.
    pub fn x(&self, a: usize) -> AbstractElement {
        let mut e = self.zero();
        e.x[a] = Rational::one();
        e
    }

    /// Simple coroot h_i.
    pub fn h(&self, i: usize) -> AbstractElement {
        let mut e = self.zero();
        e.h[i] = Rational::one();
        e
    }

    /// Basis element k: coroots first, then root vectors.
    pub fn basis(&self, k: usize) -> AbstractElement {
        if k < self.rank() {
            self.h(k)
        } else {
            self.x(k - self.rank())
        }
    }

    /// A_α = X_α − X_{−α}, spanning k ∩ (g_α ⊕ g_{−α}).
    pub fn compact(&self, a: usize) -> AbstractElement {
        self.x(a).sub(&self.x(self.rs.neg(a)))
    }

    /// β(H) for H given in simple coroot coordinates.
    fn eval_root(&self, h: &[Rational], b: usize) -> Rational {
        let mut acc = Rational::zero();
        for (i, hi) in h.iter().enumerate() {
            if !hi.is_zero() {
                acc += hi * q(self.rs.pairing(b, self.rs.simple[i]));
            }
        }
        acc
    }

    pub fn bracket(&self, x: &AbstractElement, y: &AbstractElement) -> AbstractElement {
        let rs = &self.rs;
        let r = self.nroots();
        let mut out = self.zero();
        let hx = x.h.iter().any(|v| !v.is_zero());
        let hy = y.h.iter().any(|v| !v.is_zero());
        for b in 0..r {
            if hx && !y.x[b].is_zero() {
                out.x[b] += self.eval_root(&x.h, b) * &y.x[b];
            }
            if hy && !x.x[b].is_zero() {
                out.x[b] -= self.eval_root(&y.h, b) * &x.x[b];
            }
        }
        for a in 0..r {
            if x.x[a].is_zero() {
                continue;
            }
            let na = rs.neg(a);
            if !y.x[na].is_zero() {
                let f = &x.x[a] * &y.x[na];
                for (i, c) in self.coroots[a].iter().enumerate() {
                    out.h[i] += &f * c;
                }
            }
            for b in 0..r {
                if y.x[b].is_zero() {
                    continue;
                }
                let n = self.n(a, b);
                if n != 0 {
                    let s = rs.sum_index(a, b).unwrap();
                    out.x[s] += q(n) * &x.x[a] * &y.x[b];
                }
            }
        }
        out
    }

    fn jacobi(&self, a: usize, b: usize, c: usize) -> bool {
        let (x, y, z) = (self.basis(a), self.basis(b), self.basis(c));
        let t1 = self.bracket(&self.bracket(&x, &y), &z);
        let t2 = self.bracket(&self.bracket(&y, &z), &x);
        let t3 = self.bracket(&self.bracket(&z, &x), &y);
        t1.add(&t2).add(&t3).is_zero()
    }

    /// Jacobi on every triple of distinct basis elements.
    pub fn verify_jacobi_exhaustive(&self) -> Result<usize, ChevError> {
        let d = self.dim();
        let mut count = 0;
        for a in 0..d {
            for b in (a + 1)..d {
                for c in (b + 1)..d {
                    if !self.jacobi(a, b, c) {
                        return Err(ChevError::Inconsistent(format!("Jacobi fails on ({a},{b},{c})")));
                    }
                    count += 1;
                }
            }
        }
        Ok(count)
    }

    /// Jacobi on `samples` seeded random basis triples.
    pub fn verify_jacobi_sampled(&self, seed: u64, samples: usize) -> Result<usize, ChevError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = self.dim();
        for _ in 0..samples {
            let (a, b, c) = (rng.gen_range(0..d), rng.gen_range(0..d), rng.gen_range(0..d));
            if !self.jacobi(a, b, c) {
                return Err(ChevError::Inconsistent(format!("Jacobi fails on ({a},{b},{c})")));
            }
        }
        Ok(samples)
    }
}

/// Matrix model of a classical split algebra with root vectors built from
/// the simple ones by the same recursion that defines the constants.
#[derive(Debug, Clone)]
pub struct MatrixRealization {
    pub lie_type: LieType,
    pub model: &'static str,
    pub size: usize,
    /// Image of X_α for every root.
    pub x: Vec<QMatrix>,
    /// Image of the simple coroots.
    pub h: Vec<QMatrix>,
}

fn simple_matrices(t: LieType) -> (usize, Vec<QMatrix>) {
    let l = t.rank;
    let e = QMatrix::unit;
    match t.family {
        Family::A => {
            let n = l + 1;
            (n, (0..l).map(|i| e(n, i, i + 1)).collect())
        }
        Family::B => {
            // index 0, then 1..=l, then l+1..=2l
            let n = 2 * l + 1;
            let mut v: Vec<QMatrix> = (1..l)
                .map(|i| &e(n, i, i + 1) - &e(n, l + i + 1, l + i))
                .collect();
            v.push(&e(n, 0, 2 * l) - &e(n, l, 0));
            (n, v)
        }
        Family::C => {
            let n = 2 * l;
            let mut v: Vec<QMatrix> = (0..l - 1)
                .map(|i| &e(n, i, i + 1) - &e(n, l + i + 1, l + i))
                .collect();
            v.push(e(n, l - 1, 2 * l - 1));
            (n, v)
        }
        Family::D => {
            let n = 2 * l;
            let mut v: Vec<QMatrix> = (0..l - 1)
                .map(|i| &e(n, i, i + 1) - &e(n, l + i + 1, l + i))
                .collect();
            v.push(&e(n, l - 2, 2 * l - 1) - &e(n, l - 1, 2 * l - 2));
            (n, v)
        }
        Family::G => unreachable!(),
    }
}

pub fn build_realization(sc: &StructureConstants) -> Result<MatrixRealization, ChevError> {
    let rs = &sc.rs;
    let t = rs.lie_type;
    let model = match t.family {
        Family::A => "sl(l+1,R)",
        Family::B => "so(l,l+1)",
        Family::C => "sp(l,R)",
        Family::D => "so(l,l)",
        Family::G => return Err(ChevError::NoMatrixModel(t)),
    };
    let (size, simple) = simple_matrices(t);
    let r = rs.num_roots();
    let mut x: Vec<Option<QMatrix>> = vec![None; r];
    let mut h = Vec::with_capacity(rs.rank());
    for (i, m) in simple.into_iter().enumerate() {
        let s = rs.simple[i];
        let mt = m.transpose();
        let hm = m.commutator(&mt);
        // [H', X] = e X; rescale the negative so that [H, X] = 2X.
        let ad = hm.commutator(&m);
        let e = (0..size * size)
            .find(|&k| !m.entries()[k].is_zero())
            .map(|k| &ad.entries()[k] / &m.entries()[k])
            .unwrap();
        if ad != m.scale(&e) {
            return Err(ChevError::Inconsistent("simple root matrix is not a weight vector".into()));
        }
        let f = q(2) / e;
        h.push(hm.scale(&f));
        x[rs.neg(s)] = Some(mt.scale(&f));
        x[s] = Some(m);
    }
    for xi in rs.positive() {
        if let Some((a0, b0)) = sc.extraspecial[xi] {
            let n0 = q(sc.n(a0, b0));
            let pos = x[a0].as_ref().unwrap().commutator(x[b0].as_ref().unwrap());
            x[xi] = Some(pos.scale(&(Rational::one() / &n0)));
            let (na0, nb0) = (rs.neg(a0), rs.neg(b0));
            let nn = q(sc.n(na0, nb0));
            let neg = x[na0].as_ref().unwrap().commutator(x[nb0].as_ref().unwrap());
            x[rs.neg(xi)] = Some(neg.scale(&(Rational::one() / nn)));
        }
    }
    let real = MatrixRealization {
        lie_type: t,
        model,
        size,
        x: x.into_iter().map(|m| m.unwrap()).collect(),
        h,
    };
    real.verify(sc)?;
    Ok(real)
}

impl MatrixRealization {
    pub fn embed(&self, e: &AbstractElement) -> QMatrix {
        let mut m = QMatrix::zeros(self.size, self.size);
        for (i, c) in e.h.iter().enumerate() {
            if !c.is_zero() {
                m = &m + &self.h[i].scale(c);
            }
        }
        for (a, c) in e.x.iter().enumerate() {
            if !c.is_zero() {
                m = &m + &self.x[a].scale(c);
            }
        }
        m
    }

    /// Bracket preservation on all basis pairs.
    pub fn verify(&self, sc: &StructureConstants) -> Result<usize, ChevError> {
        let d = sc.dim();
        let images: Vec<QMatrix> = (0..d).map(|k| self.embed(&sc.basis(k))).collect();
        let mut count = 0;
        for i in 0..d {
            for j in (i + 1)..d {
                let lhs = self.embed(&sc.bracket(&sc.basis(i), &sc.basis(j)));
                if lhs != images[i].commutator(&images[j]) {
                    return Err(ChevError::Inconsistent(format!(
                        "realization bracket mismatch on basis pair ({i},{j})"
                    )));
                }
                count += 1;
            }
        }
        Ok(count)
    }
}

/// The pair (A, B) of `[[A, −B], [B, A]] ↦ A + iB` for a compact element of sp(l,R).
pub fn u_l_image(x: &QMatrix, l: usize) -> Result<(QMatrix, QMatrix), ChevError> {
    if x.rows() != 2 * l || x.cols() != 2 * l {
        return Err(ChevError::NotCompact);
    }
    let top: Vec<usize> = (0..l).collect();
    let bot: Vec<usize> = (l..2 * l).collect();
    let a = x.submatrix(&top, &top);
    let b = x.submatrix(&bot, &top);
    let ok = x.submatrix(&bot, &bot) == a
        && x.submatrix(&top, &bot) == -&b
        && (&a + &a.transpose()).is_zero()
        && b == b.transpose();
    if ok {
        Ok((a, b))
    } else {
        Err(ChevError::NotCompact)
    }
}

/// Coordinates of A + iB in the basis A[k,j] = E_kj − E_jk, S[k,j] = i(E_kj + E_jk)
/// (k > j) and S[j,j] = 2i E_jj, with 1-based labels. Zero coordinates omitted.
pub fn u_l_labels(a: &QMatrix, b: &QMatrix) -> Vec<(String, Rational)> {
    let l = a.rows();
    let mut out = Vec::new();
    for k in 0..l {
        for j in 0..k {
            if !a[(k, j)].is_zero() {
                out.push((format!("A[{},{}]", k + 1, j + 1), a[(k, j)].clone()));
            }
            if !b[(k, j)].is_zero() {
                out.push((format!("S[{},{}]", k + 1, j + 1), b[(k, j)].clone()));
            }
        }
        if !b[(k, k)].is_zero() {
            out.push((format!("S[{},{}]", k + 1, k + 1), &b[(k, k)] / q(2)));
        }
    }
    out
}

/// Largest |N| in the table; a quick sanity figure for reports.
pub fn max_abs_constant(sc: &StructureConstants) -> i64 {
    sc.n.iter().map(|v| v.abs()).max().unwrap_or(0)
}
