//! Dense univariate polynomials over Q, coefficients stored low degree first.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::rational::{divisors, lcm_denominators, Rational};

/// Trial division is only attempted up to this size of coefficient.
const DIVISOR_LIMIT: i64 = 1_000_000_000_000;

pub fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
    p
}

pub fn degree(p: &[Rational]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn eval(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

pub fn derivative(p: &[Rational]) -> Vec<Rational> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * Rational::from_integer(BigInt::from(k)))
        .collect()
}

/// Remainder of `a` modulo `b` (b nonzero).
pub fn rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let lb = b[db].clone();
    let mut r = trim(a.to_vec());
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let f = &r[dr] / &lb;
        for i in 0..=db {
            let t = &f * &b[i];
            r[dr - db + i] -= t;
        }
        r = trim(r);
    }
    r
}

/// Divide by (x - root); assumes root is a root.
pub fn deflate(p: &[Rational], root: &Rational) -> Vec<Rational> {
    let p = trim(p.to_vec());
    if p.len() <= 1 {
        return p;
    }
    let n = p.len() - 1;
    let mut out = vec![Rational::zero(); n];
    let mut carry = Rational::zero();
    for k in (0..n).rev() {
        carry = &p[k + 1] + &carry * root;
        out[k] = carry.clone();
    }
    out
}

/// Distinct rational roots in increasing order. `None` if the coefficients are
/// too large for trial division, in which case the set would not be certain.
pub fn rational_roots(p: &[Rational]) -> Option<Vec<Rational>> {
    let mut p = trim(p.to_vec());
    if p.is_empty() {
        return Some(vec![]);
    }
    let mut roots = Vec::new();
    if p[0].is_zero() {
        roots.push(Rational::zero());
        while p[0].is_zero() {
            p.remove(0);
        }
    }
    if p.len() > 1 {
        let l = lcm_denominators(p.iter());
        let ints: Vec<BigInt> = p
            .iter()
            .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
            .collect();
        let limit = BigInt::from(DIVISOR_LIMIT);
        let a0 = ints[0].abs();
        let an = ints[ints.len() - 1].abs();
        if a0 > limit || an > limit {
            return None;
        }
        for num in divisors(&a0) {
            for den in divisors(&an) {
                for s in [1i64, -1] {
                    let x = Rational::new(&num * BigInt::from(s), den.clone());
                    if eval(&p, &x).is_zero() && !roots.contains(&x) {
                        roots.push(x);
                    }
                }
            }
        }
    }
    roots.sort();
    Some(roots)
}

fn sign_changes(values: &[Rational]) -> usize {
    let signs: Vec<bool> = values
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Number of distinct real roots, by a Sturm sequence.
pub fn count_real_roots(p: &[Rational]) -> usize {
    let p = trim(p.to_vec());
    if p.len() <= 1 {
        return 0;
    }
    let mut chain = vec![p.clone(), trim(derivative(&p))];
    loop {
        let n = chain.len();
        if chain[n - 1].is_empty() {
            chain.pop();
            break;
        }
        let r = rem(&chain[n - 2], &chain[n - 1]);
        if r.is_empty() {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    // sign at ±∞ is the sign of the leading coefficient (times (-1)^deg at -∞)
    let at_pos: Vec<Rational> = chain.iter().map(|c| c[c.len() - 1].clone()).collect();
    let at_neg: Vec<Rational> = chain
        .iter()
        .map(|c| {
            let lc = c[c.len() - 1].clone();
            if (c.len() - 1) % 2 == 1 {
                -lc
            } else {
                lc
            }
        })
        .collect();
    sign_changes(&at_neg) - sign_changes(&at_pos)
}
