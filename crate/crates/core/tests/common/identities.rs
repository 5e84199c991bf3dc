
use std::collections::BTreeSet;
use std::sync::Arc;

use flagacs::chevalley::{build_realization, generate_constants, MatrixRealization, StructureConstants};
use flagacs::exactalg::{q, PolyQ, QMatrix, Rational};
use flagacs::invariants::{
    acs_exists, decompose, family_from_blocks, impose_k_invariance, intertwiners, m_only_family, AcsVerdict,
    BlockSpec, ParamAcs,
};
use flagacs::isotropy::{c_unitary_basis, flag_model, IsotropyModel, Model};
use flagacs::nijenhuis::solver::{Equation, Outcome, Solver};
use flagacs::nijenhuis::{
    first_nonzero, integrability_verdict, nijenhuis, nijenhuis_symbolic, system, IntegrabilityOptions,
    IntegrabilityStatus, SymEntry,
};
use flagacs::rootsys::{build_root_system, Family, LieType};
use num_traits::{One, Zero};

fn sc(f: Family, l: usize) -> Arc<StructureConstants> {
    let rs = Arc::new(build_root_system(LieType::new(f, l).unwrap()).unwrap());
    Arc::new(generate_constants(rs).unwrap())
}

fn model(f: Family, l: usize, theta: &str, m: Model) -> IsotropyModel {
    let s = sc(f, l);
    let members = s.rs.parse_theta(theta).unwrap();
    flag_model(s, &members, m).unwrap()
}

fn idx(im: &IsotropyModel, label: &str) -> usize {
    im.labels
        .iter()
        .position(|l| l == label)
        .unwrap_or_else(|| panic!("no basis vector {} in {:?}", label, im.labels))
}

fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

fn pair(im: &IsotropyModel, first: &str, second: &str) -> BlockSpec {
    let n = im.dim();
    BlockSpec::Pair {
        first: vec![unit(n, idx(im, first))],
        second: vec![unit(n, idx(im, second))],
    }
}

fn names(v: &[&str]) -> Option<Vec<String>> {
    Some(v.iter().map(|s| s.to_string()).collect())
}

fn var(fam: &ParamAcs, name: &str) -> PolyQ {
    PolyQ::var_named(&fam.vars, name).unwrap_or_else(|| panic!("no parameter {}", name))
}

fn cst(fam: &ParamAcs, c: Rational) -> PolyQ {
    PolyQ::constant(&fam.vars, c)
}

/// Coordinate k of D²·N(b_i, b_j) from the symbolic table.
fn coeff(entries: &[SymEntry], fam: &ParamAcs, i: usize, j: usize, k: usize) -> PolyQ {
    let (a, b, sign) = if i < j { (i, j, 1) } else { (j, i, -1) };
    let p = entries
        .iter()
        .find(|e| e.i == a && e.j == b && e.k == k)
        .map(|e| e.poly.clone())
        .unwrap_or_else(|| PolyQ::zero(&fam.vars));
    if sign < 0 {
        p.neg()
    } else {
        p
    }
}

/// Structure constant c with [b_i, b_j] = c·b_k + ... in the module.
fn bracket_coeff(im: &IsotropyModel, i: usize, j: usize, k: usize) -> Rational {
    im.bracket_basis(i, j)[k].clone()
}

/// Rescale an n± model so that every basis vector is the matrix unit E_rc.
fn matrix_unit_basis(im: &IsotropyModel, real: &MatrixRealization) -> IsotropyModel {
    let n = im.dim();
    let mut p = QMatrix::zeros(n, n);
    let mut labels = Vec::new();
    for (j, &a) in im.line_roots.iter().enumerate() {
        let m = &real.x[a];
        let nz: Vec<usize> = (0..m.rows() * m.cols()).filter(|&k| !m.entries()[k].is_zero()).collect();
        assert_eq!(nz.len(), 1, "root vector is not a multiple of a matrix unit");
        let (r, c) = (nz[0] / m.cols(), nz[0] % m.cols());
        p[(j, j)] = Rational::one() / &m.entries()[nz[0]];
        labels.push(format!("E{}{}", r + 1, c + 1));
    }
    im.change_basis(&p, labels).unwrap()
}

pub fn a3_maximal_nijenhuis_coefficients() -> Result<(), String> {
    let s = sc(Family::A, 3);
    let real = build_realization(&s).unwrap();
    let im = matrix_unit_basis(&flag_model(s.clone(), &[], Model::NMinus).unwrap(), &real);
    let specs = [pair(&im, "E21", "E43"), pair(&im, "E31", "E42"), pair(&im, "E41", "E32")];
    let fam = family_from_blocks(&im, &specs, &[names(&["a2", "c2"]), names(&["a3", "c3"]), names(&["a4", "c4"])])
        .unwrap();
    let sym = nijenhuis_symbolic(&im, &fam);
    let (a2, a3, a4) = (var(&fam, "a2"), var(&fam, "a3"), var(&fam, "a4"));
    let (c2, c3, c4) = (var(&fam, "c2"), var(&fam, "c3"), var(&fam, "c4"));
    let d2 = fam.denom.mul(&fam.denom);
    let e = |l: &str| idx(&im, l);
    // N(E21,E31) = (c3-c2)c4 E32 + (c2a3 - a2c3 + a4(c3-c2)) E41
    check_eq!(coeff(&sym, &fam, e("E21"), e("E31"), e("E32")), d2.mul(&c3.sub(&c2).mul(&c4)));
    let e41 = c2.mul(&a3).sub(&a2.mul(&c3)).add(&a4.mul(&c3.sub(&c2)));
    check_eq!(coeff(&sym, &fam, e("E21"), e("E31"), e("E41")), d2.mul(&e41));
    // N(E21,E41) = c4(a3-a2) E31 + c4(c2+c3) E42
    check_eq!(coeff(&sym, &fam, e("E21"), e("E41"), e("E31")), d2.mul(&c4.mul(&a3.sub(&a2))));
    check_eq!(coeff(&sym, &fam, e("E21"), e("E41"), e("E42")), d2.mul(&c4.mul(&c2.add(&c3))));
    Ok(())
}

pub fn b2_maximal_nijenhuis_value() -> Result<(), String> {
    let im = model(Family::B, 2, "", Model::NMinus);
    let (x21, y21, x1, x2) = ("X[-l1+l2]", "X[-l1-l2]", "X[-l1]", "X[-l2]");
    let specs = [pair(&im, x21, y21), pair(&im, x1, x2)];
    let fam = family_from_blocks(&im, &specs, &[names(&["a21", "c21"]), names(&["a1", "c1"])]).unwrap();
    let sym = nijenhuis_symbolic(&im, &fam);
    let (i21, i1, i2) = (idx(&im, x21), idx(&im, x1), idx(&im, x2));
    // [X21, X2] = m X1
    let m = bracket_coeff(&im, i21, i2, i1);
    check!(!m.is_zero());
    let (a21, a1, c1) = (var(&fam, "a21"), var(&fam, "a1"), var(&fam, "c1"));
    let d2 = fam.denom.mul(&fam.denom);
    // N(X21, X1) = -m c1² X2 + m c1 (a21 - a1) X1
    check_eq!(coeff(&sym, &fam, i21, i1, i2), d2.mul(&c1.mul(&c1).scale(&-m.clone())));
    check_eq!(coeff(&sym, &fam, i21, i1, i1), d2.mul(&c1.mul(&a21.sub(&a1)).scale(&m)));
    for k in 0..im.dim() {
        if k != i1 && k != i2 {
            check!(coeff(&sym, &fam, i21, i1, k).is_zero());
        }
    }
    Ok(())
}

pub fn c6_maximal_long_root_coefficient() -> Result<(), String> {
    let l = 6;
    let im = model(Family::C, l, "", Model::NMinus);
    let n = im.dim();
    let mut specs = Vec::new();
    let mut nm = Vec::new();
    for i in 1..=l {
        for s in i + 1..=l {
            specs.push(pair(&im, &format!("X[-l{}+l{}]", i, s), &format!("X[-l{}-l{}]", i, s)));
            nm.push(names(&[&format!("a{}{}", s, i), &format!("c{}{}", s, i)]));
        }
    }
    let long: Vec<usize> = (1..=l).map(|j| idx(&im, &format!("X[-2l{}]", j))).collect();
    let mut basis = Vec::new();
    let mut full_names = Vec::new();
    for r in 0..l {
        for c in 0..l {
            basis.push(QMatrix::unit(l, r, c));
            // J X_1 = Σ b_j X_j is the first column
            full_names.push(if c == 0 { format!("b{}", r + 1) } else { format!("t{}{}", r + 1, c + 1) });
        }
    }
    specs.push(BlockSpec::Full {
        vectors: long.iter().map(|&i| unit(n, i)).collect(),
        basis,
    });
    nm.push(Some(full_names));
    let fam = family_from_blocks(&im, &specs, &nm).unwrap();
    let sym = nijenhuis_symbolic(&im, &fam);
    let d2 = fam.denom.mul(&fam.denom);
    let x1 = long[0];
    for s in 2..=l {
        let xs1 = idx(&im, &format!("X[-l1+l{}]", s));
        let ys1 = idx(&im, &format!("X[-l1-l{}]", s));
        // [X_s1, X_s] = m Y_s1
        let m = bracket_coeff(&im, xs1, long[s - 1], ys1);
        check!(!m.is_zero());
        let a = var(&fam, &format!("a{}1", s));
        let c = var(&fam, &format!("c{}1", s));
        let b = var(&fam, &format!("b{}", s));
        // b_s m (1 + a²)/c, cleared by D²
        let expected = d2
            .div_exact(&c)
            .unwrap()
            .mul(&b)
            .mul(&cst(&fam, q(1)).add(&a.mul(&a)))
            .scale(&m);
        check_eq!(coeff(&sym, &fam, xs1, x1, xs1), expected, "s = {}", s);
    }
    Ok(())
}

pub fn g2_maximal_conditions() -> Result<(), String> {
    let im = model(Family::G, 2, "", Model::NMinus);
    let lab = |s: &str| idx(&im, s);
    let specs = [
        pair(&im, "X[-l1]", "X[-l1-2*l2]"),
        pair(&im, "X[-l2]", "X[-2*l1-3*l2]"),
        pair(&im, "X[-l1-l2]", "X[-l1-3*l2]"),
    ];
    let fam = family_from_blocks(
        &im,
        &specs,
        &[names(&["a10", "c10"]), names(&["a01", "c01"]), names(&["a11", "c11"])],
    )
    .unwrap();
    let sym = nijenhuis_symbolic(&im, &fam);
    let (x11, x01, x12, x10) = (lab("X[-l1-l2]"), lab("X[-l2]"), lab("X[-l1-2*l2]"), lab("X[-l1]"));
    let m = bracket_coeff(&im, x11, x01, x12);
    check!(!m.is_zero());
    let (a10, a01, a11, c10) = (var(&fam, "a10"), var(&fam, "a01"), var(&fam, "a11"), var(&fam, "c10"));
    let one = cst(&fam, q(1));
    let d2 = fam.denom.mul(&fam.denom);
    let sum = a11.add(&a01);
    // m((a11 a01 - 1) + a10(a11 + a01)) X_{-l1-2l2} + m(a11 + a01)(1 + a10²)/c10 X_{-l1}
    let first = a11.mul(&a01).sub(&one).add(&a10.mul(&sum)).scale(&m);
    let second = sum.mul(&one.add(&a10.mul(&a10))).scale(&m);
    check_eq!(coeff(&sym, &fam, x11, x01, x12), d2.mul(&first));
    check_eq!(coeff(&sym, &fam, x11, x01, x10), d2.div_exact(&c10).unwrap().mul(&second));
    // a01 = -a11 and a11 a01 = 1 have no common real solution
    let eqs = vec![
        Equation {
            poly: coeff(&sym, &fam, x11, x01, x12),
            origin: "X[-l1-2*l2]".into(),
        },
        Equation {
            poly: coeff(&sym, &fam, x11, x01, x10),
            origin: "X[-l1]".into(),
        },
    ];
    let sys = system(&fam, eqs);
    let mut solver = Solver::new(&sys);
    let leaves = solver.run(&sys);
    check!(!solver.exhausted());
    check!(leaves.iter().all(|l| matches!(l.outcome, Outcome::Contradiction(_))));
    Ok(())
}

fn c3_unitary_family(im: &IsotropyModel) -> ParamAcs {
    let n = im.dim();
    let sign_block = |a: &str, s: &str| BlockSpec::Sign {
        vectors: vec![unit(n, idx(im, a)), unit(n, idx(im, s))],
        // z A = S, z S = -A
        z: QMatrix::from_rows(&[vec![q(0), q(-1)], vec![q(1), q(0)]]),
    };
    let specs = [
        sign_block("A[3,1]", "S[3,1]"),
        sign_block("A[3,2]", "S[3,2]"),
        pair(im, "A[2,1]", "S[2,1]"),
        pair(im, "S[1,1]", "S[2,2]"),
    ];
    let fam = family_from_blocks(
        im,
        &specs,
        &[names(&["e1"]), names(&["e2"]), names(&["a21", "nu"]), names(&["a11", "c11"])],
    )
    .unwrap();
    impose_k_invariance(&fam, im)
}

pub fn c3_sign_triples() -> Result<(), String> {
    let s = sc(Family::C, 3);
    let real = build_realization(&s).unwrap();
    let members = s.rs.parse_theta("2l3").unwrap();
    let im = c_unitary_basis(&flag_model(s.clone(), &members, Model::MTheta).unwrap(), &real).unwrap();
    let fam = c3_unitary_family(&im);
    let mut eqs: Vec<Equation> = nijenhuis_symbolic(&im, &fam)
        .into_iter()
        .map(|e| Equation {
            poly: e.poly,
            origin: format!("N({},{})[{}]", im.labels[e.i], im.labels[e.j], im.labels[e.k]),
        })
        .collect();
    eqs.extend(fam.constraints.iter().map(|(o, p)| Equation {
        poly: p.clone(),
        origin: o.clone(),
    }));
    let mut admissible = BTreeSet::new();
    for e1 in [1i64, -1] {
        for e2 in [1i64, -1] {
            for nu in [1i64, -1] {
                let mut all = eqs.clone();
                for (name, v) in [("e1", e1), ("e2", e2), ("nu", nu)] {
                    all.push(Equation {
                        poly: var(&fam, name).sub(&cst(&fam, q(v))),
                        origin: format!("{} = {}", name, v),
                    });
                }
                let sys = system(&fam, all);
                let mut solver = Solver::new(&sys);
                let leaves = solver.run(&sys);
                check!(!solver.exhausted());
                if leaves.iter().all(|l| matches!(l.outcome, Outcome::Contradiction(_))) {
                    continue;
                }
                // a point of the surviving branch: a21 = a11 = 0, c11 = 1
                let vals: Vec<Rational> = fam
                    .vars
                    .iter()
                    .map(|v| match v.as_str() {
                        "e1" => q(e1),
                        "e2" => q(e2),
                        "nu" => q(nu),
                        "c11" => q(1),
                        _ => q(0),
                    })
                    .collect();
                let j = fam.eval(&vals).unwrap();
                check!(flagacs::invariants::verify_acs(&im, &j));
                check!(first_nonzero(&im, &j).is_none(), "({}, {}, {}) survives elimination but N ≠ 0", e1, e2, nu);
                admissible.insert((e1, e2, nu));
            }
        }
    }
    let expected: BTreeSet<(i64, i64, i64)> =
        [(1, 1, 1), (-1, -1, -1), (1, -1, 1), (-1, 1, -1), (1, 1, -1), (-1, -1, 1)].into_iter().collect();
    check_eq!(admissible, expected);
    Ok(())
}

pub fn c3_unit_structure_is_integrable() -> Result<(), String> {
    let s = sc(Family::C, 3);
    let real = build_realization(&s).unwrap();
    let members = s.rs.parse_theta("2l3").unwrap();
    let im = c_unitary_basis(&flag_model(s.clone(), &members, Model::MTheta).unwrap(), &real).unwrap();
    let fam = c3_unitary_family(&im);
    // ε1 = ε2 = ν = 1, a11 = 0, c11 = 1
    let vals: Vec<Rational> = fam
        .vars
        .iter()
        .map(|v| if v.as_str() == "a21" || v.as_str() == "a11" { q(0) } else { q(1) })
        .collect();
    let j = fam.eval(&vals).unwrap();
    check!(flagacs::invariants::verify_acs(&im, &j));
    check!(flagacs::nijenhuis::nijenhuis_table(&im, &j).is_empty());
    Ok(())
}

pub fn b3_intermediate_nijenhuis_is_minus_bracket() -> Result<(), String> {
    let im = model(Family::B, 3, "l1-l2,l2-l3", Model::NPlus);
    let n = im.dim();
    let vc: Vec<usize> = ["X[l1]", "X[l2]", "X[l3]"].iter().map(|l| idx(&im, l)).collect();
    let vl: Vec<usize> = ["X[l1+l2]", "X[l1+l3]", "X[l2+l3]"].iter().map(|l| idx(&im, l)).collect();
    let j = match acs_exists(&im).unwrap() {
        AcsVerdict::Exists(w) => w.j,
        other => panic!("expected a witness, got {:?}", other),
    };
    // J exchanges V_c and V_l
    for &c in &vc {
        let img = j.col(c);
        check!(vc.iter().all(|&k| img[k].is_zero()));
    }
    let mut nonzero = 0;
    for &a in &vc {
        for &b in &vc {
            let (x, y) = (unit(n, a), unit(n, b));
            let br = im.bracket_vec(&x, &y);
            let neg: Vec<Rational> = br.iter().map(|v| -v.clone()).collect();
            check_eq!(nijenhuis(&im, &j, &x, &y), neg);
            if br.iter().any(|v| !v.is_zero()) {
                nonzero += 1;
                // [V_c, V_c] lies in V_l
                check!((0..n).filter(|k| !vl.contains(k)).all(|k| br[k].is_zero()));
            }
        }
    }
    check!(nonzero > 0);
    Ok(())
}

fn so_ll_matrix(l: usize, kind: char, i: usize, j: usize) -> QMatrix {
    let e = |r: usize, c: usize| QMatrix::unit(2 * l, r - 1, c - 1);
    match kind {
        // X_ij = E_{i,j} - E_{l+j,l+i}
        'X' => &e(i, j) - &e(l + j, l + i),
        // Y_ij = E_{i,l+j} - E_{j,l+i}
        _ => &e(i, l + j) - &e(j, l + i),
    }
}

fn span_eq(a: &QMatrix, b: &QMatrix) -> bool {
    let cols: Vec<Vec<Rational>> = a.columns().into_iter().chain(b.columns()).collect();
    a.rank() == a.cols() && b.rank() == a.cols() && QMatrix::from_cols(a.rows(), &cols).rank() == a.cols()
}

pub fn d4_components_and_intertwiner() -> Result<(), String> {
    let s = sc(Family::D, 4);
    let real = build_realization(&s).unwrap();
    let members = s.rs.parse_theta("l1-l2,l3-l4").unwrap();
    let im = flag_model(s.clone(), &members, Model::NPlus).unwrap();
    let n = im.dim();
    let m = |k: char, i: usize, j: usize| so_ll_matrix(4, k, i, j);
    let coords = |x: &QMatrix| im.matrix_coords(&real, x).expect("matrix lies in the module");
    let span = |v: &[QMatrix]| QMatrix::from_cols(n, &v.iter().map(coords).collect::<Vec<_>>());
    let v1 = span(&[&m('X', 1, 3) - &m('X', 2, 4), &m('X', 1, 4) + &m('X', 2, 3)]);
    let v2 = span(&[&m('X', 1, 3) + &m('X', 2, 4), &m('X', 1, 4) - &m('X', 2, 3)]);
    let v3 = span(&[&m('Y', 1, 3) - &m('Y', 2, 4), &m('Y', 1, 4) + &m('Y', 2, 3)]);
    let v4 = span(&[&m('Y', 1, 3) + &m('Y', 2, 4), &m('Y', 1, 4) - &m('Y', 2, 3)]);
    let g12 = span(&[m('Y', 1, 2)]);
    let g34 = span(&[m('Y', 3, 4)]);
    let dec = decompose(&im).unwrap();
    for (name, v) in [("V1", &v1), ("V2", &v2), ("V3", &v3), ("V4", &v4), ("g12", &g12), ("g34", &g34)] {
        check!(
            dec.components.iter().any(|c| span_eq(&c.basis, v)),
            "{} is not a computed irreducible component",
            name
        );
    }
    check_eq!(dec.components.len(), 6);
    // T13 sends the listed basis of V1 to the listed basis of V3: the identity
    // matrix in those bases must be an intertwiner.
    let homs = intertwiners(&im, &v1, &v3).unwrap();
    check_eq!(homs.len(), 1);
    let t = &homs[0];
    check!(t[(0, 1)].is_zero() && t[(1, 0)].is_zero() && t[(0, 0)] == t[(1, 1)] && !t[(0, 0)].is_zero());
    // V1 and V2 are not equivalent
    check!(intertwiners(&im, &v1, &v2).unwrap().is_empty());
    Ok(())
}

pub fn d_l_intermediate_families_are_infeasible() -> Result<(), String> {
    for (l, theta) in [
        (5, "l4-l5,l4+l5"),
        (5, "l3-l4,l4-l5,l4+l5"),
        (5, "l2-l3,l3-l4,l4-l5,l4+l5"),
        (6, "l5-l6,l5+l6"),
    ] {
        for m in [Model::NPlus, Model::MTheta] {
            let im = model(Family::D, l, theta, m);
            let fam = impose_k_invariance(&m_only_family(&im).unwrap(), &im);
            let v = integrability_verdict(&im, &fam, &IntegrabilityOptions::default());
            check_eq!(v.status, IntegrabilityStatus::FamilyInfeasible, "D{} {{{}}} {:?}", l, theta, m);
            check!(!v.certificate.is_empty());
        }
    }
    Ok(())
}

/// The m_θ bracket recomputed from commutators of compact matrices in the
/// split realization, projected onto m_θ along k_θ.
fn mtheta_matrix_bracket(im: &IsotropyModel, real: &MatrixRealization) -> Result<Vec<Vec<Rational>>, String> {
    let sc = &im.sc;
    let n = im.dim();
    let compact = |a: usize| real.embed(&sc.compact(a));
    // k basis: module roots first, then the closure of Θ
    let mut k_roots: Vec<usize> = im.line_roots.clone();
    k_roots.extend(im.theta.closure_plus.iter().copied());
    let k_basis = QMatrix::from_cols(
        real.x[0].rows() * real.x[0].cols(),
        &k_roots.iter().map(|&a| compact(a).to_flat()).collect::<Vec<_>>(),
    );
    let line: Vec<QMatrix> = im.line_roots.iter().map(|&a| compact(a)).collect();
    let elem = |i: usize| {
        let mut m = QMatrix::zeros(line[0].rows(), line[0].cols());
        for (k, l) in line.iter().enumerate() {
            let c = &im.to_canonical[(k, i)];
            if !c.is_zero() {
                m = &m + &l.scale(c);
            }
        }
        m
    };
    let elems: Vec<QMatrix> = (0..n).map(elem).collect();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let br = elems[i].commutator(&elems[j]).to_flat();
            let c = flagacs::exactalg::matrix::coordinates(&k_basis, &br)
                .ok_or_else(|| format!("commutator of {} and {} leaves k", im.labels[i], im.labels[j]))?;
            // canonical m-coordinates, then the current basis
            let canon: Vec<Rational> = c[..n].to_vec();
            let inv = im.to_canonical.inverse().ok_or("singular basis change")?;
            out.push(inv.mul_vec(&canon));
        }
    }
    Ok(out)
}

fn nij_by_table(table: &[Vec<Rational>], j: &QMatrix, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
    let n = j.rows();
    let br = |u: &[Rational], v: &[Rational]| {
        let mut acc = vec![Rational::zero(); n];
        for a in 0..n {
            for b in 0..n {
                let s = &u[a] * &v[b];
                if s.is_zero() {
                    continue;
                }
                for k in 0..n {
                    acc[k] += &s * &table[a * n + b][k];
                }
            }
        }
        acc
    };
    let (jx, jy) = (j.mul_vec(x), j.mul_vec(y));
    let t1 = br(&jx, &jy);
    let t2 = br(x, y);
    let t3 = j.mul_vec(&br(&jx, y));
    let t4 = j.mul_vec(&br(x, &jy));
    (0..n).map(|k| &t1[k] - &t2[k] - &t3[k] - &t4[k]).collect()
}

/// The compact-model bracket agrees with matrix commutators, and an
/// integrable structure found there has vanishing torsion by the matrix route.
pub fn mtheta_witness_by_matrices(f: Family, l: usize, theta: &str) -> Result<(), String> {
    let s = sc(f, l);
    let real = build_realization(&s).map_err(|e| e.to_string())?;
    let members = s.rs.parse_theta(theta).map_err(|e| e.to_string())?;
    let im = flag_model(s.clone(), &members, Model::MTheta).map_err(|e| e.to_string())?;
    let table = mtheta_matrix_bracket(&im, &real)?;
    let n = im.dim();
    for i in 0..n {
        for j in 0..n {
            check_eq!(table[i * n + j], im.bracket_basis(i, j).to_vec(), "[{}, {}]", im.labels[i], im.labels[j]);
        }
    }
    let fam = flagacs::invariants::param_family(&im).map_err(|e| e.to_string())?;
    let v = integrability_verdict(&im, &fam, &IntegrabilityOptions::default());
    check_eq!(v.status, IntegrabilityStatus::IntegrableWitness);
    let j = &v.solutions[0].j;
    check!(flagacs::invariants::verify_acs(&im, j));
    for a in 0..n {
        for b in a + 1..n {
            let nv = nij_by_table(&table, j, &unit(n, a), &unit(n, b));
            check!(nv.iter().all(|x| x.is_zero()), "N({}, {}) ≠ 0", im.labels[a], im.labels[b]);
        }
    }
    Ok(())
}
