//! Exact rational roots of univariate rational polynomials.

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

/// Horner evaluation; `coeffs[k]` multiplies `x^k`.
pub fn eval(coeffs: &[BigRational], x: &BigRational) -> BigRational {
    coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn divisors(n: i64) -> Vec<i64> {
    let n = n.unsigned_abs();
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d as i64);
            if d * d != n {
                out.push((n / d) as i64);
            }
        }
        d += 1;
    }
    out
}

/// All distinct rational roots, ascending, by the rational root theorem.
///
/// Returns `None` if the cleared integer coefficients do not fit in `i64`
/// (never the case for the low-degree polynomials handled here).
pub fn rational_roots(coeffs: &[BigRational]) -> Option<Vec<BigRational>> {
    let mut c: Vec<BigRational> = coeffs.to_vec();
    while c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
    if c.len() <= 1 {
        return Some(Vec::new());
    }
    let lcm = c.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = c
        .iter()
        .map(|r| (r * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();

    let mut roots = Vec::new();
    let shift = ints.iter().position(|v| !v.is_zero()).unwrap_or(0);
    if shift > 0 {
        roots.push(BigRational::zero());
    }
    let ints = &ints[shift..];
    if ints.len() > 1 {
        let a0 = ints[0].abs().to_i64()?;
        let an = ints[ints.len() - 1].abs().to_i64()?;
        let full: Vec<BigRational> = ints.iter().map(|v| BigRational::from_integer(v.clone())).collect();
        for p in divisors(a0) {
            for q in divisors(an) {
                for sign in [1, -1] {
                    let x = BigRational::new(BigInt::from(sign * p), BigInt::from(q));
                    if eval(&full, &x).is_zero() && !roots.contains(&x) {
                        roots.push(x);
                    }
                }
            }
        }
    }
    roots.sort();
    Some(roots)
}
