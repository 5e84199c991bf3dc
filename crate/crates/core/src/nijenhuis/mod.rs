//! Nijenhuis tensor N(X,Y) = [JX,JY] - [X,Y] - J[JX,Y] - J[X,JY] on the
//! isotropy module, exactly for a fixed J and symbolically over a family.

pub mod solver;

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exactalg::poly::{PolyQ, Vars};
use crate::exactalg::rational::{self, q};
use crate::exactalg::{QMatrix, Rational};
use crate::invariants::{acs_exists, commutant, verify_acs, AcsVerdict, ParamAcs, VarKind};
use crate::isotropy::IsotropyModel;

use solver::{Equation, Leaf, Outcome, Solver, System};

pub fn nijenhuis(im: &IsotropyModel, j: &QMatrix, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
    let jx = j.mul_vec(x);
    let jy = j.mul_vec(y);
    let a = im.bracket_vec(&jx, &jy);
    let b = im.bracket_vec(x, y);
    let c = j.mul_vec(&im.bracket_vec(&jx, y));
    let d = j.mul_vec(&im.bracket_vec(x, &jy));
    (0..x.len())
        .map(|k| &a[k] - &b[k] - &c[k] - &d[k])
        .collect()
}

fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct NEntry {
    pub i: usize,
    pub j: usize,
    #[serde(serialize_with = "ser_vec")]
    pub value: Vec<Rational>,
}

fn ser_vec<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    let strs: Vec<String> = v.iter().map(rational::to_string).collect();
    strs.serialize(s)
}

/// Nonzero values N(b_i, b_j), i < j, on basis vectors.
pub fn nijenhuis_table(im: &IsotropyModel, j: &QMatrix) -> Vec<NEntry> {
    let n = im.dim();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let v = nijenhuis(im, j, &unit(n, a), &unit(n, b));
            if v.iter().any(|x| !x.is_zero()) {
                out.push(NEntry { i: a, j: b, value: v });
            }
        }
    }
    out
}

/// First nonzero basis value of N, if any (early exit).
pub fn first_nonzero(im: &IsotropyModel, j: &QMatrix) -> Option<(usize, usize)> {
    let n = im.dim();
    for a in 0..n {
        for b in a + 1..n {
            let v = nijenhuis(im, j, &unit(n, a), &unit(n, b));
            if v.iter().any(|x| !x.is_zero()) {
                return Some((a, b));
            }
        }
    }
    None
}

/// Sparse bracket table: for each (a, b), the nonzero (k, coefficient).
fn sparse_brackets(im: &IsotropyModel) -> Vec<Vec<(usize, Rational)>> {
    let n = im.dim();
    (0..n * n)
        .map(|ab| {
            im.bracket[ab]
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (k, c.clone()))
                .collect()
        })
        .collect()
}

fn poly_bracket(n: usize, vars: &Vars, br: &[Vec<(usize, Rational)>], x: &[PolyQ], y: &[PolyQ]) -> Vec<PolyQ> {
    let mut out = vec![PolyQ::zero(vars); n];
    for a in 0..n {
        if x[a].is_zero() {
            continue;
        }
        for b in 0..n {
            if y[b].is_zero() || br[a * n + b].is_empty() {
                continue;
            }
            let f = x[a].mul(&y[b]);
            for (k, c) in &br[a * n + b] {
                out[*k] = out[*k].add(&f.scale(c));
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SymEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// coordinate k of D²·N(b_i, b_j), D the family denominator
    pub poly: PolyQ,
}

/// Coordinates of D²·N(b_i, b_j) over the family, i < j, nonzero only.
pub fn nijenhuis_symbolic(im: &IsotropyModel, fam: &ParamAcs) -> Vec<SymEntry> {
    let n = im.dim();
    let vars = fam.vars.clone();
    let br = sparse_brackets(im);
    let d2 = fam.denom.mul(&fam.denom);
    let cols: Vec<Vec<PolyQ>> = (0..n).map(|c| (0..n).map(|r| fam.jn.get(r, c).clone()).collect()).collect();
    let e = |i: usize| -> Vec<PolyQ> {
        (0..n)
            .map(|k| if k == i { PolyQ::one(&vars) } else { PolyQ::zero(&vars) })
            .collect()
    };
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let t1 = poly_bracket(n, &vars, &br, &cols[a], &cols[b]);
            let s1 = poly_bracket(n, &vars, &br, &cols[a], &e(b));
            let s2 = poly_bracket(n, &vars, &br, &e(a), &cols[b]);
            let s: Vec<PolyQ> = s1.iter().zip(&s2).map(|(x, y)| x.add(y)).collect();
            let t3 = fam.jn.mul_vec(&s);
            for k in 0..n {
                let base = im.bracket[a * n + b][k].clone();
                let mut p = t1[k].sub(&t3[k]);
                if !base.is_zero() {
                    p = p.sub(&d2.scale(&base));
                }
                if !p.is_zero() {
                    out.push(SymEntry { i: a, j: b, k, poly: p });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrabilityStatus {
    IntegrableWitness,
    NotIntegrableCertified,
    NotIntegrableSampled,
    FamilyInfeasible,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchSummary {
    pub choices: Vec<String>,
    pub steps: Vec<String>,
    pub end: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub choices: Vec<String>,
    pub assignment: BTreeMap<String, String>,
    #[serde(skip)]
    pub j: QMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegrabilityVerdict {
    pub status: IntegrabilityStatus,
    pub parameters: Vec<String>,
    pub equations: usize,
    /// every branch of the elimination when the verdict is certified
    pub certificate: Vec<BranchSummary>,
    pub solutions: Vec<Solution>,
    pub samples: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct IntegrabilityOptions {
    pub seed: u64,
    pub samples: usize,
    pub max_leaves: usize,
    /// enumerate every surviving branch instead of stopping at the first witness
    pub all_solutions: bool,
}

impl Default for IntegrabilityOptions {
    fn default() -> Self {
        IntegrabilityOptions {
            seed: 0,
            samples: 100,
            max_leaves: 20_000,
            all_solutions: false,
        }
    }
}

fn summary(choices: &[String], steps: &[String], end: String) -> BranchSummary {
    BranchSummary {
        choices: choices.to_vec(),
        steps: steps.to_vec(),
        end,
    }
}

fn guess_values(kind: VarKind) -> Vec<Rational> {
    match kind {
        VarKind::Diag => vec![q(0), q(1), q(-1)],
        VarKind::Off => vec![q(1), q(-1), q(2)],
        VarKind::Sign => vec![q(1), q(-1)],
        VarKind::Entry => vec![q(0), q(1), q(-1)],
    }
}

fn default_value(kind: VarKind) -> Rational {
    match kind {
        VarKind::Diag | VarKind::Entry => q(0),
        VarKind::Off | VarKind::Sign => q(1),
    }
}

/// Exact acceptance test for a family point: J² = -I, invariance, N = 0.
fn integrable_point(im: &IsotropyModel, fam: &ParamAcs, vals: &[Rational]) -> Option<QMatrix> {
    let j = fam.eval(vals)?;
    if verify_acs(im, &j) && first_nonzero(im, &j).is_none() {
        Some(j)
    } else {
        None
    }
}

pub fn system(fam: &ParamAcs, eqs: Vec<Equation>) -> System {
    System {
        vars: fam.vars.clone(),
        equations: eqs,
        nonvanishing: fam.nonvanishing.clone(),
        sign_vars: fam.sign_vars(),
    }
}

/// Random invariant complex structures g·J0·g⁻¹, g an invertible commutant element.
fn sample_structures(im: &IsotropyModel, j0: &QMatrix, count: usize, seed: u64) -> Vec<QMatrix> {
    let comm = commutant(im);
    let n = im.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < count && tries < count * 10 {
        tries += 1;
        let mut g = QMatrix::zeros(n, n);
        for c in &comm {
            g = &g + &c.scale(&q(rng.gen_range(-3..=3)));
        }
        if let Some(gi) = g.inverse() {
            let sign = if rng.gen_bool(0.5) { q(1) } else { q(-1) };
            out.push((&(&g * j0) * &gi).scale(&sign));
        }
    }
    out
}

pub fn integrability_verdict(im: &IsotropyModel, fam: &ParamAcs, opts: &IntegrabilityOptions) -> IntegrabilityVerdict {
    let parameters: Vec<String> = fam.vars.iter().cloned().collect();
    let n = im.dim();
    if n == 0 {
        return IntegrabilityVerdict {
            status: IntegrabilityStatus::IntegrableWitness,
            parameters,
            equations: 0,
            certificate: vec![],
            solutions: vec![Solution {
                choices: vec![],
                assignment: BTreeMap::new(),
                j: QMatrix::zeros(0, 0),
            }],
            samples: 0,
            notes: vec!["zero-dimensional flag".into()],
        };
    }
    let mut notes = Vec::new();
    let constraint_eqs: Vec<Equation> = fam
        .constraints
        .iter()
        .map(|(o, p)| Equation {
            poly: p.clone(),
            origin: o.clone(),
        })
        .collect();
    // the family itself
    if !constraint_eqs.is_empty() {
        let sys = system(fam, constraint_eqs.clone());
        let mut s = Solver::new(&sys);
        s.max_leaves = opts.max_leaves;
        let leaves = s.run(&sys);
        if !s.exhausted() && leaves.iter().all(|l| matches!(l.outcome, Outcome::Contradiction(_))) {
            return IntegrabilityVerdict {
                status: IntegrabilityStatus::FamilyInfeasible,
                parameters,
                equations: constraint_eqs.len(),
                certificate: leaves
                    .iter()
                    .map(|l| match &l.outcome {
                        Outcome::Contradiction(m) => summary(&l.branch.trail, &l.branch.log, m.clone()),
                        _ => unreachable!(),
                    })
                    .collect(),
                solutions: vec![],
                samples: 0,
                notes,
            };
        }
    }
    let labels = &im.labels;
    let mut eqs: Vec<Equation> = nijenhuis_symbolic(im, fam)
        .into_iter()
        .map(|e| Equation {
            poly: e.poly,
            origin: format!("N({},{})[{}]", labels[e.i], labels[e.j], labels[e.k]),
        })
        .collect();
    eqs.extend(constraint_eqs);
    let neq = eqs.len();
    let sys = system(fam, eqs);
    let kinds = fam.kinds.clone();
    let default = |v: usize| default_value(kinds[v]);
    let candidates = |v: usize| guess_values(kinds[v]);
    let mut solutions: Vec<Solution> = Vec::new();
    let mut stuck = 0;
    let (leaves, exhausted, halted) = {
        let mut try_leaf = |leaf: &Leaf| -> bool {
            let mut t = Solver::new(&sys);
            let mut found: Option<QMatrix> = None;
            let mut accept = |vals: &[Rational]| -> bool {
                found = integrable_point(im, fam, vals);
                found.is_some()
            };
            let point = match leaf.outcome {
                Outcome::Contradiction(_) => return false,
                Outcome::Solved => {
                    let mut p = t.assignment(&leaf.branch, &default).filter(|v| accept(v));
                    if p.is_none() {
                        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                        for _ in 0..20 {
                            let vals: Vec<Rational> = (0..kinds.len()).map(|_| q(rng.gen_range(1..=4))).collect();
                            let sign_vals = |v: usize| {
                                if kinds[v] == VarKind::Sign {
                                    q(1)
                                } else {
                                    vals[v].clone()
                                }
                            };
                            if let Some(a) = t.assignment(&leaf.branch, &sign_vals) {
                                if accept(&a) {
                                    p = Some(a);
                                    break;
                                }
                            }
                        }
                    }
                    p
                }
                Outcome::Stuck => {
                    let mut budget = 400;
                    let p = t.search(&leaf.branch, &candidates, &default, &mut accept, 12, &mut budget);
                    if p.is_none() {
                        stuck += 1;
                    }
                    p
                }
            };
            if let (Some(vals), Some(j)) = (point, found) {
                solutions.push(Solution {
                    choices: leaf.branch.trail.clone(),
                    assignment: fam.named_values(&vals),
                    j,
                });
                return !opts.all_solutions;
            }
            false
        };
        let mut s = Solver::new(&sys);
        s.max_leaves = opts.max_leaves;
        s.hook = Some(Box::new(&mut try_leaf));
        let leaves = s.run(&sys);
        (leaves, s.exhausted(), s.halted())
    };
    if !exhausted && leaves.iter().all(|l| matches!(l.outcome, Outcome::Contradiction(_))) {
        return IntegrabilityVerdict {
            status: IntegrabilityStatus::NotIntegrableCertified,
            parameters,
            equations: neq,
            certificate: leaves
                .iter()
                .map(|l| match &l.outcome {
                    Outcome::Contradiction(m) => summary(&l.branch.trail, &l.branch.log, m.clone()),
                    _ => unreachable!(),
                })
                .collect(),
            solutions: vec![],
            samples: 0,
            notes,
        };
    }
    if stuck > 0 {
        notes.push(format!("{} elimination branches left undecided", stuck));
    }
    if exhausted && !halted {
        notes.push("branch budget exhausted".into());
    }
    if !solutions.is_empty() {
        return IntegrabilityVerdict {
            status: IntegrabilityStatus::IntegrableWitness,
            parameters,
            equations: neq,
            certificate: vec![],
            solutions,
            samples: 0,
            notes,
        };
    }
    // sampling fallback
    let base = match acs_exists(im) {
        Ok(AcsVerdict::Exists(w)) => Some(w.j),
        _ => None,
    };
    let mut samples = 0;
    if let Some(j0) = base {
        for j in sample_structures(im, &j0, opts.samples, opts.seed) {
            samples += 1;
            if first_nonzero(im, &j).is_none() {
                return IntegrabilityVerdict {
                    status: IntegrabilityStatus::IntegrableWitness,
                    parameters,
                    equations: neq,
                    certificate: vec![],
                    solutions: vec![Solution {
                        choices: vec!["sampled".into()],
                        assignment: BTreeMap::new(),
                        j,
                    }],
                    samples,
                    notes,
                };
            }
        }
    }
    notes.push(format!("N is nonzero at all {} sampled invariant structures", samples));
    IntegrabilityVerdict {
        status: IntegrabilityStatus::NotIntegrableSampled,
        parameters,
        equations: neq,
        certificate: vec![],
        solutions: vec![],
        samples,
        notes,
    }
}
