use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::matrix::QMatrix;
use super::rational::{self, Rational};
use super::AlgError;

pub type Vars = Arc<[String]>;
pub type Monomial = Vec<u16>;

/// Multivariate polynomial over Q with a fixed, shared variable list.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyQ {
    vars: Vars,
    terms: BTreeMap<Monomial, Rational>,
}

pub fn make_vars<S: AsRef<str>>(names: &[S]) -> Vars {
    names.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>().into()
}

impl PolyQ {
    pub fn zero(vars: &Vars) -> Self {
        PolyQ {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Vars, c: Rational) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; vars.len()], c);
        }
        p
    }

    pub fn one(vars: &Vars) -> Self {
        Self::constant(vars, Rational::one())
    }

    pub fn var(vars: &Vars, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Self::monomial(vars, e, Rational::one())
    }

    pub fn var_named(vars: &Vars, name: &str) -> Option<Self> {
        vars.iter().position(|v| v == name).map(|i| Self::var(vars, i))
    }

    pub fn monomial(vars: &Vars, exps: Monomial, c: Rational) -> Self {
        assert_eq!(exps.len(), vars.len());
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&vec![0u16; self.vars.len()])
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Value when constant.
    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_constant() {
            Some(self.constant_term())
        } else {
            None
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn coeff(&self, exps: &[u16]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    fn insert_add(&mut self, e: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    fn check_vars(&self, other: &PolyQ) {
        assert!(
            Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars,
            "polynomials over different variable lists"
        );
    }

    pub fn add(&self, other: &PolyQ) -> PolyQ {
        self.check_vars(other);
        let mut r = self.clone();
        for (e, c) in &other.terms {
            r.insert_add(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, other: &PolyQ) -> PolyQ {
        self.check_vars(other);
        let mut r = self.clone();
        for (e, c) in &other.terms {
            r.insert_add(e.clone(), -c.clone());
        }
        r
    }

    pub fn neg(&self) -> PolyQ {
        PolyQ {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> PolyQ {
        if s.is_zero() {
            return PolyQ::zero(&self.vars);
        }
        PolyQ {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &PolyQ) -> PolyQ {
        self.check_vars(other);
        let mut r = PolyQ::zero(&self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Monomial = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.insert_add(e, c1 * c2);
            }
        }
        r
    }

    pub fn pow(&self, k: u32) -> PolyQ {
        let mut r = PolyQ::one(&self.vars);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Degree in variable `i` (0 for the zero polynomial).
    pub fn degree_in(&self, i: usize) -> u16 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u32).sum())
            .max()
            .unwrap_or(0)
    }

    /// Indices of variables that actually occur.
    pub fn support(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for e in self.terms.keys() {
            for (i, &x) in e.iter().enumerate() {
                if x > 0 {
                    s.insert(i);
                }
            }
        }
        s
    }

    /// Coefficients as a polynomial in variable `i`: result[k] is the
    /// coefficient of var_i^k.
    pub fn coeffs_in(&self, i: usize) -> Vec<PolyQ> {
        let d = self.degree_in(i) as usize;
        let mut out = vec![PolyQ::zero(&self.vars); d + 1];
        for (e, c) in &self.terms {
            let k = e[i] as usize;
            let mut e2 = e.clone();
            e2[i] = 0;
            out[k].insert_add(e2, c.clone());
        }
        out
    }

    /// Exact evaluation; every occurring variable must be assigned.
    pub fn eval(&self, assignment: &BTreeMap<String, Rational>) -> Result<Rational, AlgError> {
        let mut vals = Vec::with_capacity(self.vars.len());
        for (i, name) in self.vars.iter().enumerate() {
            match assignment.get(name) {
                Some(v) => vals.push(Some(v.clone())),
                None => {
                    if self.degree_in(i) > 0 {
                        return Err(AlgError::MissingVariable(name.clone()));
                    }
                    vals.push(None);
                }
            }
        }
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    let v = vals[i].as_ref().expect("checked above");
                    for _ in 0..k {
                        t *= v;
                    }
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Evaluation at a full point given in variable order.
    pub fn eval_at(&self, vals: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t *= &vals[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Dense coefficients (low degree first) when only variable `i` occurs.
    pub fn as_univariate(&self, i: usize) -> Option<Vec<Rational>> {
        let d = self.degree_in(i) as usize;
        let mut out = vec![Rational::zero(); d + 1];
        for (e, c) in &self.terms {
            if e.iter().enumerate().any(|(j, &k)| j != i && k > 0) {
                return None;
            }
            out[e[i] as usize] = c.clone();
        }
        Some(out)
    }

    /// Replace variable `i` by polynomial `p` (over the same variables).
    pub fn substitute(&self, i: usize, p: &PolyQ) -> PolyQ {
        self.check_vars(p);
        if self.degree_in(i) == 0 {
            return self.clone();
        }
        let coeffs = self.coeffs_in(i);
        // Horner
        let mut r = PolyQ::zero(&self.vars);
        for c in coeffs.iter().rev() {
            r = r.mul(p).add(c);
        }
        r
    }

    /// Replace variable `i` by a rational value.
    pub fn substitute_value(&self, i: usize, v: &Rational) -> PolyQ {
        self.substitute(i, &PolyQ::constant(&self.vars, v.clone()))
    }

    fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    /// Exact quotient `self / d` if `d` divides `self`.
    pub fn div_exact(&self, d: &PolyQ) -> Option<PolyQ> {
        self.check_vars(d);
        let (ld, lc) = d.leading()?;
        let (ld, lc) = (ld.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quo = PolyQ::zero(&self.vars);
        while let Some((e, c)) = rem.leading() {
            if e.iter().zip(&ld).any(|(a, b)| a < b) {
                return None;
            }
            let qe: Monomial = e.iter().zip(&ld).map(|(a, b)| a - b).collect();
            let qc = c / &lc;
            let t = PolyQ::monomial(&self.vars, qe, qc);
            rem = rem.sub(&t.mul(d));
            quo = quo.add(&t);
        }
        Some(quo)
    }

    /// Divide by the monomial of least exponents occurring in all terms;
    /// returns (that monomial's exponents, quotient).
    pub fn split_monomial_content(&self) -> (Monomial, PolyQ) {
        let n = self.vars.len();
        if self.is_zero() {
            return (vec![0; n], self.clone());
        }
        let mut m = vec![u16::MAX; n];
        for e in self.terms.keys() {
            for i in 0..n {
                m[i] = m[i].min(e[i]);
            }
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.iter().zip(&m).map(|(a, b)| a - b).collect(), c.clone()))
            .collect();
        (
            m,
            PolyQ {
                vars: self.vars.clone(),
                terms,
            },
        )
    }

    /// Scale so that the leading coefficient is 1.
    pub fn monic(&self) -> PolyQ {
        match self.leading() {
            Some((_, c)) => {
                let inv = Rational::one() / c;
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }

    /// Scale to a primitive integer polynomial with positive leading coefficient.
    pub fn primitive(&self) -> PolyQ {
        if self.is_zero() {
            return self.clone();
        }
        let l = rational::lcm_denominators(self.terms.values());
        let ints: Vec<_> = self.terms.values().map(|c| (c * Rational::from_integer(l.clone())).to_integer()).collect();
        let g = ints
            .iter()
            .fold(num_bigint::BigInt::zero(), |a, b| num_integer::Integer::gcd(&a, b));
        let mut s = Rational::new(l, g);
        if self.leading().unwrap().1.is_negative() {
            s = -s;
        }
        self.scale(&s)
    }

    /// Express over a larger variable list that extends this one.
    pub fn lift(&self, vars: &Vars) -> PolyQ {
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v).expect("variable missing in lift"))
            .collect();
        let mut r = PolyQ::zero(vars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0u16; vars.len()];
            for (i, &k) in e.iter().enumerate() {
                e2[map[i]] = k;
            }
            r.insert_add(e2, c.clone());
        }
        r
    }
}

impl fmt::Display for PolyQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        self.vars[i].clone()
                    } else {
                        format!("{}^{}", self.vars[i], k)
                    }
                })
                .collect();
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            if mono.is_empty() {
                write!(f, "{}", rational::to_string(&a))?;
            } else if a.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", rational::to_string(&a), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PolyQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyQ({})", self)
    }
}

/// Dense matrix of polynomials over one shared variable list.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    vars: Vars,
    data: Vec<PolyQ>,
}

impl PolyMatrix {
    pub fn zeros(vars: &Vars, rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            vars: vars.clone(),
            data: vec![PolyQ::zero(vars); rows * cols],
        }
    }

    pub fn from_qmatrix(vars: &Vars, m: &QMatrix) -> Self {
        PolyMatrix {
            rows: m.rows(),
            cols: m.cols(),
            vars: vars.clone(),
            data: m
                .entries()
                .iter()
                .map(|c| PolyQ::constant(vars, c.clone()))
                .collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn get(&self, i: usize, j: usize) -> &PolyQ {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: PolyQ) {
        assert!(Arc::ptr_eq(&self.vars, p.vars()) || &self.vars == p.vars());
        self.data[i * self.cols + j] = p;
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.cols, other.rows);
        let mut r = PolyMatrix::zeros(&self.vars, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = PolyQ::zero(&self.vars);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                r.data[i * other.cols + j] = acc;
            }
        }
        r
    }

    pub fn add(&self, other: &PolyMatrix) -> PolyMatrix {
        let mut r = self.clone();
        for (a, b) in r.data.iter_mut().zip(&other.data) {
            *a = a.add(b);
        }
        r
    }

    pub fn scale_poly(&self, p: &PolyQ) -> PolyMatrix {
        let mut r = self.clone();
        for a in r.data.iter_mut() {
            *a = a.mul(p);
        }
        r
    }

    pub fn mul_vec(&self, v: &[PolyQ]) -> Vec<PolyQ> {
        (0..self.rows)
            .map(|i| {
                let mut acc = PolyQ::zero(&self.vars);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if !a.is_zero() && !v[k].is_zero() {
                        acc = acc.add(&a.mul(&v[k]));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn col(&self, j: usize) -> Vec<PolyQ> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn eval(&self, assignment: &BTreeMap<String, Rational>) -> Result<QMatrix, AlgError> {
        let data: Result<Vec<Rational>, AlgError> =
            self.data.iter().map(|p| p.eval(assignment)).collect();
        Ok(QMatrix::from_vec(self.rows, self.cols, data?))
    }

    pub fn map(&self, f: impl Fn(&PolyQ) -> PolyQ) -> PolyMatrix {
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            vars: self.vars.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn entries(&self) -> &[PolyQ] {
        &self.data
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }
}
