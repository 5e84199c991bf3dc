use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational scalar. Always stored in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `"num/den"` (or `"num"` when the denominator is one).
pub fn to_string(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

fn int_sqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = num_integer::Roots::sqrt(n);
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

/// Exact square root if `x` is the square of a rational.
pub fn sqrt_exact(x: &Rational) -> Option<Rational> {
    let n = int_sqrt_exact(x.numer())?;
    let d = int_sqrt_exact(x.denom())?;
    Some(Rational::new(n, d))
}

/// Sum of two fractions by cross multiplication without intermediate gcd reduction.
/// Used as an independent path against the library addition.
pub fn add_unreduced(a: &Rational, b: &Rational) -> (BigInt, BigInt) {
    let n = a.numer() * b.denom() + b.numer() * a.denom();
    let d = a.denom() * b.denom();
    (n, d)
}

pub fn lcm_denominators<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Positive divisors of |n| by trial division. Intended for the small
/// integers that arise as polynomial coefficients here.
pub fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        return vec![];
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = BigInt::one();
    while &i * &i <= n {
        if (&n % &i).is_zero() {
            small.push(i.clone());
            let other = &n / &i;
            if other != i {
                large.push(other);
            }
        }
        i += 1;
        if i > BigInt::from(1_000_000) {
            break;
        }
    }
    large.reverse();
    small.extend(large);
    small
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!(parse("6/4"), Some(qf(3, 2)));
        assert_eq!(to_string(&qf(-3, 6)), "-1/2");
        assert_eq!(to_string(&q(7)), "7");
        assert_eq!(parse("1/0"), None);
    }

    #[test]
    fn squares() {
        assert_eq!(sqrt_exact(&qf(9, 4)), Some(qf(3, 2)));
        assert_eq!(sqrt_exact(&q(2)), None);
        assert_eq!(sqrt_exact(&q(-4)), None);
    }

    #[test]
    fn divisor_list() {
        let d: Vec<i64> = divisors(&BigInt::from(12))
            .iter()
            .map(|x| x.try_into().unwrap())
            .collect();
        assert_eq!(d, vec![1, 2, 3, 4, 6, 12]);
    }
}
