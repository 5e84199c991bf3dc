//! Shallow elimination over Q for small polynomial systems with a set of
//! nonvanishing polynomials: substitution of linear unknowns, removal of
//! nonvanishing factors, sign and rational-root branching. A branch ends in a
//! certified contradiction, an identically solved system, or is left stuck.

use std::collections::{BTreeSet, HashSet};

use num_traits::{Signed, Zero};

use crate::exactalg::poly::{PolyQ, Vars};
use crate::exactalg::univariate;
use crate::exactalg::Rational;

#[derive(Debug, Clone)]
pub struct Equation {
    pub poly: PolyQ,
    pub origin: String,
}

#[derive(Debug, Clone)]
pub struct System {
    pub vars: Vars,
    pub equations: Vec<Equation>,
    pub nonvanishing: Vec<PolyQ>,
    pub sign_vars: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Branch {
    eqs: Vec<Equation>,
    /// var := expression, in the order applied
    pub subs: Vec<(usize, PolyQ)>,
    nonzero: BTreeSet<usize>,
    nonvanishing: Vec<PolyQ>,
    /// branching choices
    pub trail: Vec<String>,
    pub log: Vec<String>,
}

impl Branch {
    pub fn remaining(&self) -> &[Equation] {
        &self.eqs
    }

    fn substituted(&self) -> BTreeSet<usize> {
        self.subs.iter().map(|(v, _)| *v).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Contradiction(String),
    Solved,
    Stuck,
}

#[derive(Debug, Clone)]
pub struct Leaf {
    pub branch: Branch,
    pub outcome: Outcome,
}

enum Norm {
    Zero,
    Contra(String),
    VarZero(usize),
    Keep(PolyQ, Vec<usize>),
}

/// Called on every leaf that is not a contradiction; returning true stops the run.
pub type LeafHook<'a> = Box<dyn FnMut(&Leaf) -> bool + 'a>;

pub struct Solver<'a> {
    vars: Vars,
    sign: BTreeSet<usize>,
    pub max_leaves: usize,
    /// substitutions over the whole run
    pub max_steps: usize,
    /// an equation growing beyond this many terms leaves its branch undecided
    pub max_terms: usize,
    leaves: usize,
    steps: usize,
    pub hook: Option<LeafHook<'a>>,
    halted: bool,
}

fn reduce_signs(p: &PolyQ, sign: &BTreeSet<usize>) -> PolyQ {
    if sign.is_empty() || !p.support().iter().any(|v| sign.contains(v)) {
        return p.clone();
    }
    let vars = p.vars().clone();
    let mut out = PolyQ::zero(&vars);
    for (e, c) in p.terms() {
        let mut e2 = e.clone();
        for &s in sign {
            e2[s] %= 2;
        }
        out = out.add(&PolyQ::monomial(&vars, e2, c.clone()));
    }
    out
}

/// No real zero: all exponents even, all coefficients of one sign, and a
/// nonzero constant term.
fn definite(p: &PolyQ) -> bool {
    if p.constant_term().is_zero() {
        return false;
    }
    let pos = p.constant_term().is_positive();
    p.terms()
        .iter()
        .all(|(e, c)| e.iter().all(|k| k % 2 == 0) && c.is_positive() == pos)
}

impl<'a> Solver<'a> {
    pub fn new(sys: &System) -> Self {
        Solver {
            vars: sys.vars.clone(),
            sign: sys.sign_vars.iter().copied().collect(),
            max_leaves: 20_000,
            max_steps: 50_000,
            max_terms: 600,
            leaves: 0,
            steps: 0,
            hook: None,
            halted: false,
        }
    }

    pub fn initial(&self, sys: &System) -> Branch {
        let mut nonzero: BTreeSet<usize> = self.sign.clone();
        let mut nonvanishing = Vec::new();
        for p in &sys.nonvanishing {
            if p.is_monomial() {
                nonzero.extend(p.support());
            } else if !p.is_constant() {
                nonvanishing.push(p.clone());
            }
        }
        Branch {
            eqs: sys.equations.clone(),
            subs: vec![],
            nonzero,
            nonvanishing,
            trail: vec![],
            log: vec![],
        }
    }

    pub fn run(&mut self, sys: &System) -> Vec<Leaf> {
        let b = self.initial(sys);
        self.solve(b)
    }

    pub fn exhausted(&self) -> bool {
        self.halted || self.leaves >= self.max_leaves || self.steps >= self.max_steps
    }

    /// True if the hook stopped the run early.
    pub fn halted(&self) -> bool {
        self.halted
    }

    fn normalize(&self, b: &Branch, p: &PolyQ) -> Norm {
        let p = reduce_signs(p, &self.sign);
        if p.is_zero() {
            return Norm::Zero;
        }
        let (m, mut rest) = p.split_monomial_content();
        let zero_vars: Vec<usize> = (0..m.len()).filter(|&i| m[i] > 0 && !b.nonzero.contains(&i)).collect();
        for nv in &b.nonvanishing {
            while !rest.is_constant() {
                match rest.div_exact(nv) {
                    Some(q) => rest = q,
                    None => break,
                }
            }
        }
        let rest = rest.primitive();
        if rest.is_constant() {
            return match zero_vars.len() {
                0 => Norm::Contra(format!("reduces to a nonzero multiple of a product of nonvanishing factors ({})", p)),
                1 => Norm::VarZero(zero_vars[0]),
                _ => Norm::Keep(rest, zero_vars),
            };
        }
        if zero_vars.is_empty() && definite(&rest) {
            return Norm::Contra(format!("factor {} has no real zero", rest));
        }
        Norm::Keep(rest, zero_vars)
    }

    /// Apply var := expr everywhere. Err on a violated nonvanishing condition.
    fn substitute(&mut self, b: &mut Branch, v: usize, expr: &PolyQ, why: String) -> Result<(), String> {
        self.steps += 1;
        b.log.push(why);
        for e in b.eqs.iter_mut() {
            e.poly = e.poly.substitute(v, expr);
        }
        let was_nonzero = b.nonzero.remove(&v);
        let mut nv: Vec<PolyQ> = b.nonvanishing.iter().map(|p| p.substitute(v, expr)).collect();
        if was_nonzero {
            nv.push(expr.clone());
        }
        let mut keep = Vec::new();
        for p in nv {
            let p = reduce_signs(&p, &self.sign);
            if p.is_zero() {
                return Err(format!("a nonvanishing quantity becomes 0 after {} := {}", self.vars[v], expr));
            }
            if p.is_constant() {
                continue;
            }
            if p.is_monomial() {
                b.nonzero.extend(p.support());
            } else if !keep.contains(&p) {
                keep.push(p);
            }
        }
        b.nonvanishing = keep;
        b.subs.push((v, expr.clone()));
        Ok(())
    }

    fn leaf(&mut self, branch: Branch, outcome: Outcome) -> Vec<Leaf> {
        self.leaves += 1;
        let leaf = Leaf { branch, outcome };
        if !matches!(leaf.outcome, Outcome::Contradiction(_)) {
            if let Some(h) = self.hook.as_mut() {
                if h(&leaf) {
                    self.halted = true;
                }
            }
        }
        vec![leaf]
    }

    pub fn solve(&mut self, mut b: Branch) -> Vec<Leaf> {
        loop {
            if self.halted {
                return vec![];
            }
            if self.exhausted() {
                return self.leaf(b, Outcome::Stuck);
            }
            // normalize
            let mut kept: Vec<(Equation, Vec<usize>)> = Vec::new();
            let mut seen: HashSet<PolyQ> = HashSet::new();
            let mut zero_var = None;
            for e in &b.eqs {
                match self.normalize(&b, &e.poly) {
                    Norm::Zero => {}
                    Norm::Contra(why) => {
                        let msg = format!("{}: {}", e.origin, why);
                        b.log.push(msg.clone());
                        return self.leaf(b, Outcome::Contradiction(msg));
                    }
                    Norm::VarZero(v) => {
                        zero_var = Some((v, e.origin.clone()));
                        break;
                    }
                    Norm::Keep(p, zv) => {
                        let mut full = p;
                        for &v in &zv {
                            full = full.mul(&PolyQ::var(&self.vars, v));
                        }
                        if seen.insert(full.clone()) {
                            kept.push((
                                Equation {
                                    poly: full,
                                    origin: e.origin.clone(),
                                },
                                zv,
                            ));
                        }
                    }
                }
            }
            if let Some((v, origin)) = zero_var {
                let zero = PolyQ::zero(&self.vars);
                let why = format!("{}: forces {} = 0", origin, self.vars[v]);
                if let Err(msg) = self.substitute(&mut b, v, &zero, why) {
                    return self.leaf(b, Outcome::Contradiction(msg));
                }
                continue;
            }
            b.eqs = kept.iter().map(|(e, _)| e.clone()).collect();
            if b.eqs.iter().any(|e| e.poly.num_terms() > self.max_terms) {
                b.log.push("expression swell; branch left undecided".into());
                return self.leaf(b, Outcome::Stuck);
            }
            if b.eqs.is_empty() {
                return self.leaf(b, Outcome::Solved);
            }
            // linear substitution
            if let Some((v, expr, origin)) = self.pick_linear(&b, &kept) {
                let why = format!("{}: {} := {}", origin, self.vars[v], expr);
                if let Err(msg) = self.substitute(&mut b, v, &expr, why) {
                    b.log.push(msg.clone());
                    return self.leaf(b, Outcome::Contradiction(msg));
                }
                continue;
            }
            // sign branching
            let occurring: BTreeSet<usize> = b.eqs.iter().flat_map(|e| e.poly.support()).collect();
            if let Some(&s) = self.sign.iter().find(|s| occurring.contains(s)) {
                let mut out = Vec::new();
                for val in [1i64, -1] {
                    let mut nb = b.clone();
                    nb.trail.push(format!("{} = {}", self.vars[s], val));
                    let c = PolyQ::constant(&self.vars, Rational::from_integer(val.into()));
                    match self.substitute(&mut nb, s, &c, format!("branch {} = {}", self.vars[s], val)) {
                        Ok(()) => out.extend(self.solve(nb)),
                        Err(msg) => out.extend(self.leaf(nb, Outcome::Contradiction(msg))),
                    }
                }
                return out;
            }
            // univariate equations
            if let Some(res) = self.univariate_branch(&b) {
                return res;
            }
            // eliminate a shared linear variable between two equations
            if let Some(msg) = self.pair_contradiction(&b, &kept) {
                b.log.push(msg.clone());
                return self.leaf(b, Outcome::Contradiction(msg));
            }
            // product with a possibly vanishing variable
            if let Some((e, zv)) = kept.iter().find(|(_, zv)| !zv.is_empty()) {
                let v = zv[0];
                let mut out = Vec::new();
                let mut nb = b.clone();
                nb.trail.push(format!("{} = 0", self.vars[v]));
                let zero = PolyQ::zero(&self.vars);
                match self.substitute(&mut nb, v, &zero, format!("{}: branch {} = 0", e.origin, self.vars[v])) {
                    Ok(()) => out.extend(self.solve(nb)),
                    Err(msg) => out.extend(self.leaf(nb, Outcome::Contradiction(msg))),
                }
                let mut nb = b.clone();
                nb.trail.push(format!("{} != 0", self.vars[v]));
                nb.nonzero.insert(v);
                out.extend(self.solve(nb));
                return out;
            }
            return self.leaf(b, Outcome::Stuck);
        }
    }

    /// An equation linear in some variable with an invertible coefficient.
    fn pick_linear(&self, b: &Branch, kept: &[(Equation, Vec<usize>)]) -> Option<(usize, PolyQ, String)> {
        let mut best: Option<(usize, u32, bool, usize, PolyQ, String)> = None;
        for (e, _) in kept {
            let p = &e.poly;
            for v in p.support() {
                if self.sign.contains(&v) || p.degree_in(v) != 1 {
                    continue;
                }
                let cs = p.coeffs_in(v);
                let (rest, coef) = (&cs[0], &cs[1]);
                let expr = if let Some(c) = coef.as_constant() {
                    rest.scale(&(-Rational::from_integer(1.into()) / c))
                } else if coef.is_monomial() && coef.support().iter().all(|u| b.nonzero.contains(u)) {
                    match rest.div_exact(coef) {
                        Some(q) => q.neg(),
                        None => continue,
                    }
                } else {
                    continue;
                };
                let key = (p.num_terms(), p.total_degree(), b.nonzero.contains(&v), v);
                let better = match &best {
                    None => true,
                    Some((t, d, nz, bv, _, _)) => key < (*t, *d, *nz, *bv),
                };
                if better {
                    best = Some((key.0, key.1, key.2, key.3, expr, e.origin.clone()));
                }
            }
        }
        best.map(|(_, _, _, v, expr, o)| (v, expr, o))
    }

    /// For p = l_p·v + r_p and q = l_q·v + r_q, the combination l_q·p − l_p·q
    /// vanishes wherever both do; report it if it normalizes to a contradiction.
    fn pair_contradiction(&self, b: &Branch, kept: &[(Equation, Vec<usize>)]) -> Option<String> {
        for (i, (p, _)) in kept.iter().enumerate() {
            for (q, _) in &kept[i + 1..] {
                for v in p.poly.support().intersection(&q.poly.support()) {
                    let v = *v;
                    if self.sign.contains(&v) || p.poly.degree_in(v) != 1 || q.poly.degree_in(v) != 1 {
                        continue;
                    }
                    let (cp, cq) = (p.poly.coeffs_in(v), q.poly.coeffs_in(v));
                    let r = cq[1].mul(&p.poly).sub(&cp[1].mul(&q.poly));
                    if r.is_zero() || r.num_terms() > self.max_terms {
                        continue;
                    }
                    if let Norm::Contra(why) = self.normalize(b, &r) {
                        return Some(format!("{} and {} eliminating {}: {}", p.origin, q.origin, self.vars[v], why));
                    }
                }
            }
        }
        None
    }

    fn univariate_branch(&mut self, b: &Branch) -> Option<Vec<Leaf>> {
        for e in &b.eqs {
            let sup = e.poly.support();
            if sup.len() != 1 {
                continue;
            }
            let v = *sup.iter().next().unwrap();
            let coeffs = e.poly.as_univariate(v)?;
            let roots = match univariate::rational_roots(&coeffs) {
                Some(r) => r,
                None => continue,
            };
            if univariate::count_real_roots(&coeffs) != roots.len() {
                continue;
            }
            let roots: Vec<Rational> = roots
                .into_iter()
                .filter(|r| !(r.is_zero() && b.nonzero.contains(&v)))
                .collect();
            if roots.is_empty() {
                let msg = format!("{}: {} has no admissible real root", e.origin, e.poly);
                let mut nb = b.clone();
                nb.log.push(msg.clone());
                return Some(self.leaf(nb, Outcome::Contradiction(msg)));
            }
            let mut out = Vec::new();
            for r in roots {
                let mut nb = b.clone();
                let rs = crate::exactalg::rational::to_string(&r);
                nb.trail.push(format!("{} = {}", self.vars[v], rs));
                let c = PolyQ::constant(&self.vars, r);
                match self.substitute(&mut nb, v, &c, format!("{}: root {} = {}", e.origin, self.vars[v], rs)) {
                    Ok(()) => out.extend(self.solve(nb)),
                    Err(msg) => out.extend(self.leaf(nb, Outcome::Contradiction(msg))),
                }
            }
            return Some(out);
        }
        None
    }

    /// Full assignment from a branch: free variables get `value(v, attempt)`,
    /// substituted ones are evaluated back. Nonvanishing conditions of the
    /// branch are checked.
    pub fn assignment(&self, b: &Branch, free: &dyn Fn(usize) -> Rational) -> Option<Vec<Rational>> {
        let n = self.vars.len();
        let subbed = b.substituted();
        let mut vals: Vec<Rational> = (0..n)
            .map(|v| if subbed.contains(&v) { Rational::zero() } else { free(v) })
            .collect();
        for (v, expr) in b.subs.iter().rev() {
            vals[*v] = expr.eval_at(&vals);
        }
        for &v in &b.nonzero {
            if vals[v].is_zero() {
                return None;
            }
        }
        for p in &b.nonvanishing {
            if p.eval_at(&vals).is_zero() {
                return None;
            }
        }
        Some(vals)
    }

    /// Depth-limited search over small values for the free variables of a
    /// stuck branch; returns a point accepted by `accept`.
    pub fn search(
        &mut self,
        b: &Branch,
        candidates: &dyn Fn(usize) -> Vec<Rational>,
        default: &dyn Fn(usize) -> Rational,
        accept: &mut dyn FnMut(&[Rational]) -> bool,
        depth: usize,
        budget: &mut usize,
    ) -> Option<Vec<Rational>> {
        if *budget == 0 || self.steps >= self.max_steps {
            return None;
        }
        *budget -= 1;
        let occurring: BTreeSet<usize> = b.eqs.iter().flat_map(|e| e.poly.support()).collect();
        if occurring.is_empty() || depth == 0 {
            let vals = self.assignment(b, default)?;
            return if accept(&vals) { Some(vals) } else { None };
        }
        // most frequent variable first
        let v = *occurring
            .iter()
            .max_by_key(|v| b.eqs.iter().filter(|e| e.poly.degree_in(**v) > 0).count())
            .unwrap();
        for val in candidates(v) {
            if val.is_zero() && b.nonzero.contains(&v) {
                continue;
            }
            let mut nb = b.clone();
            nb.trail.push(format!("guess {} = {}", self.vars[v], crate::exactalg::rational::to_string(&val)));
            let c = PolyQ::constant(&self.vars, val);
            if self.substitute(&mut nb, v, &c, "guess".into()).is_err() {
                continue;
            }
            let saved = self.leaves;
            let leaves = self.solve(nb);
            self.leaves = saved.min(self.leaves);
            for leaf in leaves {
                match leaf.outcome {
                    Outcome::Contradiction(_) => {}
                    Outcome::Solved => {
                        if let Some(vals) = self.assignment(&leaf.branch, default) {
                            if accept(&vals) {
                                return Some(vals);
                            }
                        }
                    }
                    Outcome::Stuck => {
                        if let Some(p) = self.search(&leaf.branch, candidates, default, accept, depth - 1, budget) {
                            return Some(p);
                        }
                    }
                }
                if *budget == 0 {
                    return None;
                }
            }
        }
        None
    }
}
