//! Root systems of types A, B, C, D and G2 in λ-coordinates.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::exactalg::{q, QMatrix, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RootError {
    #[error("invalid rank {rank} for family {family}")]
    InvalidRank { family: Family, rank: usize },
    #[error("unknown family '{0}'")]
    UnknownFamily(String),
    #[error("cannot parse root '{0}'")]
    BadRoot(String),
    #[error("'{0}' is not a root of {1}")]
    NotARoot(String, LieType),
    #[error("'{0}' is not a simple root of {1}")]
    NotSimple(String, LieType),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    G,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::G => "G",
        };
        write!(f, "{}", s)
    }
}

impl FromStr for Family {
    type Err = RootError;
    fn from_str(s: &str) -> Result<Self, RootError> {
        match s.trim() {
            "A" | "a" => Ok(Family::A),
            "B" | "b" => Ok(Family::B),
            "C" | "c" => Ok(Family::C),
            "D" | "d" => Ok(Family::D),
            "G" | "g" => Ok(Family::G),
            other => Err(RootError::UnknownFamily(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LieType {
    pub family: Family,
    pub rank: usize,
}

impl LieType {
    pub fn new(family: Family, rank: usize) -> Result<Self, RootError> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::B | Family::C => rank >= 2,
            Family::D => rank >= 3,
            Family::G => rank == 2,
        };
        if ok {
            Ok(LieType { family, rank })
        } else {
            Err(RootError::InvalidRank { family, rank })
        }
    }

    /// Number of λ-coordinates used for roots.
    pub fn coord_len(&self) -> usize {
        match self.family {
            Family::A => self.rank + 1,
            _ => self.rank,
        }
    }
}

impl fmt::Display for LieType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family, self.rank)
    }
}

/// Integer vector in the λ-basis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Root(pub Vec<i64>);

impl Root {
    pub fn neg(&self) -> Root {
        Root(self.0.iter().map(|x| -x).collect())
    }

    pub fn add(&self, other: &Root) -> Root {
        Root(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Root) -> Root {
        Root(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i64) -> Root {
        Root(self.0.iter().map(|x| k * x).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Text form: `l1-l2`, `2l3`, `-l1-l2`; G2 uses `a*l1+b*l2`.
    pub fn to_text(&self, family: Family) -> String {
        let mut s = String::new();
        for (i, &c) in self.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if c < 0 {
                s.push('-');
            } else if !s.is_empty() {
                s.push('+');
            }
            let a = c.abs();
            if a != 1 {
                s.push_str(&a.to_string());
                if family == Family::G {
                    s.push('*');
                }
            }
            s.push_str(&format!("l{}", i + 1));
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }

    /// Parse the text form. Accepts `2l3`, `2*l3`, signs and sums.
    pub fn parse(text: &str, coord_len: usize) -> Result<Root, RootError> {
        let bad = || RootError::BadRoot(text.to_string());
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(bad());
        }
        let mut coords = vec![0i64; coord_len];
        let bytes: Vec<char> = t.chars().collect();
        let mut k = 0;
        while k < bytes.len() {
            let mut sign = 1;
            if bytes[k] == '+' || bytes[k] == '-' {
                if bytes[k] == '-' {
                    sign = -1;
                }
                k += 1;
            } else if k != 0 {
                return Err(bad());
            }
            let start = k;
            while k < bytes.len() && bytes[k].is_ascii_digit() {
                k += 1;
            }
            let coef: i64 = if k > start {
                bytes[start..k].iter().collect::<String>().parse().map_err(|_| bad())?
            } else {
                1
            };
            if k < bytes.len() && bytes[k] == '*' {
                if k == start {
                    return Err(bad());
                }
                k += 1;
            }
            if k >= bytes.len() || (bytes[k] != 'l' && bytes[k] != 'L') {
                return Err(bad());
            }
            k += 1;
            let start = k;
            while k < bytes.len() && bytes[k].is_ascii_digit() {
                k += 1;
            }
            if k == start {
                return Err(bad());
            }
            let idx: usize = bytes[start..k].iter().collect::<String>().parse().map_err(|_| bad())?;
            if idx == 0 || idx > coord_len {
                return Err(bad());
            }
            coords[idx - 1] += sign * coef;
        }
        Ok(Root(coords))
    }
}

/// Root system with positive roots first, then their negatives in the same order.
#[derive(Debug, Clone)]
pub struct RootSystem {
    pub lie_type: LieType,
    /// Inner products (λ_i, λ_j).
    pub gram: QMatrix,
    /// Indices (into `roots`) of the simple roots σ_1..σ_l.
    pub simple: Vec<usize>,
    roots: Vec<Root>,
    index: HashMap<Root, usize>,
    simple_coeffs: Vec<Vec<i64>>,
    npos: usize,
}

fn classical_positive(t: LieType) -> Vec<Root> {
    let n = t.coord_len();
    let l = t.rank;
    let e = |i: usize| {
        let mut v = vec![0i64; n];
        v[i] = 1;
        Root(v)
    };
    let mut out = Vec::new();
    match t.family {
        Family::A => {
            for i in 0..n {
                for j in (i + 1)..n {
                    out.push(e(i).sub(&e(j)));
                }
            }
        }
        Family::B | Family::C | Family::D => {
            for i in 0..l {
                for j in (i + 1)..l {
                    out.push(e(i).sub(&e(j)));
                    out.push(e(i).add(&e(j)));
                }
                match t.family {
                    Family::B => out.push(e(i)),
                    Family::C => out.push(e(i).scale(2)),
                    _ => {}
                }
            }
        }
        Family::G => {
            for (a, b) in [(1, 0), (0, 1), (1, 1), (1, 2), (1, 3), (2, 3)] {
                out.push(Root(vec![a, b]));
            }
        }
    }
    out
}

fn simple_roots(t: LieType) -> Vec<Root> {
    let n = t.coord_len();
    let l = t.rank;
    let e = |i: usize| {
        let mut v = vec![0i64; n];
        v[i] = 1;
        Root(v)
    };
    match t.family {
        Family::A => (0..l).map(|i| e(i).sub(&e(i + 1))).collect(),
        Family::B | Family::C | Family::D => {
            let mut s: Vec<Root> = (0..l - 1).map(|i| e(i).sub(&e(i + 1))).collect();
            s.push(match t.family {
                Family::B => e(l - 1),
                Family::C => e(l - 1).scale(2),
                _ => e(l - 2).add(&e(l - 1)),
            });
            s
        }
        Family::G => vec![Root(vec![1, 0]), Root(vec![0, 1])],
    }
}

fn gram_matrix(t: LieType) -> QMatrix {
    match t.family {
        Family::G => QMatrix::from_i64(2, 2, &[6, -3, -3, 2]),
        _ => QMatrix::identity(t.coord_len()),
    }
}

pub fn build_root_system(t: LieType) -> Result<RootSystem, RootError> {
    let t = LieType::new(t.family, t.rank)?;
    let gram = gram_matrix(t);
    let simple_list = simple_roots(t);
    let pos = classical_positive(t);
    // simple-root coefficients by exact linear solve
    let n = t.coord_len();
    let sm = QMatrix::from_cols(
        n,
        &simple_list
            .iter()
            .map(|r| r.0.iter().map(|&x| q(x)).collect())
            .collect::<Vec<_>>(),
    );
    let mut with_coeffs: Vec<(Root, Vec<i64>)> = pos
        .into_iter()
        .map(|r| {
            let v: Vec<Rational> = r.0.iter().map(|&x| q(x)).collect();
            let c = crate::exactalg::matrix::coordinates(&sm, &v)
                .expect("positive root outside the simple-root span");
            let c: Vec<i64> = c
                .iter()
                .map(|x| {
                    assert!(x.is_integer() && *x >= Rational::zero(), "non-positive root");
                    x.to_integer().to_i64().unwrap()
                })
                .collect();
            (r, c)
        })
        .collect();
    with_coeffs.sort_by(|a, b| {
        let ha: i64 = a.1.iter().sum();
        let hb: i64 = b.1.iter().sum();
        ha.cmp(&hb).then_with(|| b.1.cmp(&a.1))
    });
    let npos = with_coeffs.len();
    let mut roots = Vec::with_capacity(2 * npos);
    let mut simple_coeffs = Vec::with_capacity(2 * npos);
    for (r, c) in &with_coeffs {
        roots.push(r.clone());
        simple_coeffs.push(c.clone());
    }
    for (r, c) in &with_coeffs {
        roots.push(r.neg());
        simple_coeffs.push(c.iter().map(|x| -x).collect());
    }
    let index: HashMap<Root, usize> = roots.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
    let simple = simple_list.iter().map(|r| index[r]).collect();
    Ok(RootSystem {
        lie_type: t,
        gram,
        simple,
        roots,
        index,
        simple_coeffs,
        npos,
    })
}

impl RootSystem {
    pub fn rank(&self) -> usize {
        self.lie_type.rank
    }

    pub fn family(&self) -> Family {
        self.lie_type.family
    }

    pub fn num_positive(&self) -> usize {
        self.npos
    }

    pub fn num_roots(&self) -> usize {
        self.roots.len()
    }

    pub fn root(&self, i: usize) -> &Root {
        &self.roots[i]
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn positive(&self) -> std::ops::Range<usize> {
        0..self.npos
    }

    pub fn negative(&self) -> std::ops::Range<usize> {
        self.npos..2 * self.npos
    }

    pub fn is_positive(&self, i: usize) -> bool {
        i < self.npos
    }

    pub fn neg(&self, i: usize) -> usize {
        if i < self.npos {
            i + self.npos
        } else {
            i - self.npos
        }
    }

    /// Positive representative of ±α.
    pub fn abs_index(&self, i: usize) -> usize {
        if i < self.npos {
            i
        } else {
            i - self.npos
        }
    }

    pub fn index_of(&self, r: &Root) -> Option<usize> {
        self.index.get(r).copied()
    }

    /// Index of α_i + α_j when it is a root.
    pub fn sum_index(&self, i: usize, j: usize) -> Option<usize> {
        self.index_of(&self.roots[i].add(&self.roots[j]))
    }

    pub fn simple_coeffs(&self, i: usize) -> &[i64] {
        &self.simple_coeffs[i]
    }

    pub fn height(&self, i: usize) -> i64 {
        self.simple_coeffs[i].iter().sum()
    }

    pub fn inner_vec(&self, a: &Root, b: &Root) -> Rational {
        let n = a.0.len();
        let mut acc = Rational::zero();
        for i in 0..n {
            for j in 0..n {
                let g = &self.gram[(i, j)];
                if !g.is_zero() && a.0[i] != 0 && b.0[j] != 0 {
                    acc += g * q(a.0[i] * b.0[j]);
                }
            }
        }
        acc
    }

    pub fn inner(&self, i: usize, j: usize) -> Rational {
        self.inner_vec(&self.roots[i], &self.roots[j])
    }

    pub fn norm2(&self, i: usize) -> Rational {
        self.inner(i, i)
    }

    /// Cartan pairing ⟨α_i, α_j∨⟩ = 2(α_i, α_j)/(α_j, α_j).
    pub fn pairing(&self, i: usize, j: usize) -> i64 {
        let v = q(2) * self.inner(i, j) / self.norm2(j);
        assert!(v.is_integer());
        v.to_integer().to_i64().unwrap()
    }

    pub fn cartan_matrix(&self) -> Vec<Vec<i64>> {
        self.simple
            .iter()
            .map(|&i| self.simple.iter().map(|&j| self.pairing(i, j)).collect())
            .collect()
    }

    pub fn text(&self, i: usize) -> String {
        self.roots[i].to_text(self.family())
    }

    pub fn parse_root(&self, text: &str) -> Result<usize, RootError> {
        let r = Root::parse(text, self.lie_type.coord_len())?;
        self.index_of(&r)
            .ok_or_else(|| RootError::NotARoot(text.trim().to_string(), self.lie_type))
    }

    /// Position of a root among the simple roots.
    pub fn simple_position(&self, i: usize) -> Option<usize> {
        self.simple.iter().position(|&s| s == i)
    }

    /// Parse a comma separated list of simple roots; empty text is Θ = ∅.
    pub fn parse_theta(&self, text: &str) -> Result<Vec<usize>, RootError> {
        let mut out = Vec::new();
        for tok in text.split(',') {
            if tok.trim().is_empty() {
                if text.trim().is_empty() {
                    continue;
                }
                return Err(RootError::BadRoot(text.to_string()));
            }
            let i = self.parse_root(tok)?;
            let p = self
                .simple_position(i)
                .ok_or_else(|| RootError::NotSimple(tok.trim().to_string(), self.lie_type))?;
            out.push(p);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Largest p with β − pα a root (α-string through β).
    pub fn string_down(&self, a: usize, b: usize) -> i64 {
        let mut p = 0;
        let mut cur = self.roots[b].clone();
        loop {
            cur = cur.sub(&self.roots[a]);
            if self.index_of(&cur).is_some() {
                p += 1;
            } else {
                return p;
            }
        }
    }
}

/// Θ ⊆ Σ together with ⟨Θ⟩± and the complement Π⁻∖⟨Θ⟩⁻.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaSet {
    /// Positions in the simple root list, sorted.
    pub members: Vec<usize>,
    pub closure_plus: Vec<usize>,
    pub closure_minus: Vec<usize>,
    pub complement_minus: Vec<usize>,
}

pub fn theta_closure(rs: &RootSystem, members: &[usize]) -> ThetaSet {
    let mut m = members.to_vec();
    m.sort_unstable();
    m.dedup();
    let inside = |i: usize| {
        rs.simple_coeffs(i)
            .iter()
            .enumerate()
            .all(|(k, &c)| c == 0 || m.contains(&k))
    };
    let closure_plus: Vec<usize> = rs.positive().filter(|&i| inside(i)).collect();
    let closure_minus: Vec<usize> = closure_plus.iter().map(|&i| rs.neg(i)).collect();
    let complement_minus = rs.negative().filter(|&i| !inside(i)).collect();
    ThetaSet {
        members: m,
        closure_plus,
        closure_minus,
        complement_minus,
    }
}

impl ThetaSet {
    pub fn to_text(&self, rs: &RootSystem) -> String {
        self.members
            .iter()
            .map(|&p| rs.text(rs.simple[p]))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn member_texts(&self, rs: &RootSystem) -> Vec<String> {
        self.members.iter().map(|&p| rs.text(rs.simple[p])).collect()
    }

    pub fn is_full(&self, rs: &RootSystem) -> bool {
        self.members.len() == rs.rank()
    }
}

/// All subsets of {0..n} as sorted position lists, ordered by bitmask.
pub fn all_subsets(n: usize) -> Vec<Vec<usize>> {
    (0u32..(1u32 << n))
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
        .collect()
}
