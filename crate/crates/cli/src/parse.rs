//! Argument value parsers.

use num::{BigInt, BigRational, One, Zero};
use twistor_core::flow::Horizon;

/// `a/b`, an integer, or a plain decimal such as `-0.25`; parsed exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let bad = || format!("`{s}` is not a rational number (expected a/b, an integer or a decimal)");
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(format!("`{s}` has a zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = num::pow(BigInt::from(10), frac.len());
    let q = BigRational::new(digits, scale);
    Ok(if negative { -q } else { q })
}

/// `a:b:n` — `n ≥ 1` evenly spaced values from `a` to `b` inclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.end
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

pub fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("`{s}` is not a range (expected a:b:n)"));
    };
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("`{v}` is not a finite number"))
    };
    let count: usize = n.trim().parse().map_err(|_| format!("`{n}` is not a positive count"))?;
    if count == 0 {
        return Err("range count must be at least 1".into());
    }
    Ok(Range {
        start: num(a)?,
        end: num(b)?,
        count,
    })
}

/// `end` or a finite time.
pub fn parse_horizon(s: &str) -> Result<Horizon, String> {
    if s.eq_ignore_ascii_case("end") {
        return Ok(Horizon::End);
    }
    s.parse::<f64>()
        .ok()
        .filter(|t| t.is_finite())
        .map(Horizon::Time)
        .ok_or_else(|| format!("`{s}` is neither `end` nor a finite time"))
}

/// Exact rendering used in JSON output: integers without a denominator.
pub fn render_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        q.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_rational("-6/8").unwrap(), q(-3, 4));
        assert_eq!(parse_rational("2").unwrap(), q(2, 1));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), q(-3, 2));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn ranges() {
        let r = parse_range("0.5:2:4").unwrap();
        assert_eq!(r.values(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_range("3:3:1").unwrap().values(), vec![3.0]);
        assert!(parse_range("1:2:0").is_err());
        assert!(parse_range("1:2").is_err());
    }

    #[test]
    fn horizons() {
        assert_eq!(parse_horizon("end").unwrap(), Horizon::End);
        assert_eq!(parse_horizon("0.5").unwrap(), Horizon::Time(0.5));
        assert!(parse_horizon("inf").is_err());
    }
}
